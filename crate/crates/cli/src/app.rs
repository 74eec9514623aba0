//! Subcommands and their output.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use subseries::classify::{
    classify, conditionality_check, extract_oscillation_intervals, DiagnosticsConfig,
    ExtractOptions, ExtractionRule,
};
use subseries::constructions::{
    covm_point_from_set, d_bound_partition, greedy_finite_adjust, ssn_triple_test, two_set_defeat,
    BairePoint,
};
use subseries::index_set::IndexSet;
use subseries::rational::{ExactSum, Rational};
use subseries::relsys::{
    d_bound_candidate, d_bound_complemented, d_bound_constant_evens, d_bound_sampler,
    harness_config, splitting_candidate, splitting_complemented, splitting_forgetful,
    splitting_sampler, verify_tukey, VerificationReport,
};
use subseries::series::Series;

use crate::build::{self, BuildContext, BuildError};
use crate::spec::{parse_spec, ParseError};

/// Decimal places of the annotations printed next to exact values.
pub const DECIMAL_PLACES: usize = 12;

#[derive(Debug, Parser)]
#[command(
    name = "subseries",
    version,
    about = "Exact-rational subseries experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Debug, Args)]
pub struct Global {
    /// Finite horizon; each subcommand has its own default.
    #[arg(long, global = true)]
    pub horizon: Option<u64>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Write a machine-readable report here.
    #[arg(long, global = true)]
    pub json: Option<PathBuf>,
    /// Write the partial-sum trace `k,sum_exact,sum_decimal` here.
    #[arg(long, global = true)]
    pub csv: Option<PathBuf>,
    /// Tail window as a fraction of the members below the horizon.
    #[arg(long, global = true)]
    pub tail: Option<String>,
    #[arg(long, global = true)]
    pub tol: Option<String>,
    #[arg(long, global = true)]
    pub gap: Option<String>,
    #[arg(long, global = true)]
    pub revisit: Option<u64>,
    #[arg(long, global = true)]
    pub margin: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Partial sums and convergence verdicts.
    #[command(subcommand)]
    Series(SeriesCommand),
    /// Run a named construction and print a reusable spec.
    Construct(ConstructArgs),
    #[command(subcommand)]
    Extract(ExtractCommand),
    #[command(subcommand)]
    Verify(VerifyCommand),
    #[command(subcommand)]
    Demo(DemoCommand),
}

#[derive(Debug, Subcommand)]
pub enum SeriesCommand {
    /// Exact partial sum `Σ_{X∩horizon} a`.
    Eval(SeriesArgs),
    /// Finite-horizon verdict and conditionality evidence.
    Classify(SeriesArgs),
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long, default_value = "omega")]
    pub set: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Construction {
    SplitWitness,
    AlternatingOn,
    AlternatingOnTwo,
    CovmFromY,
    CovmPoint,
    AcFromF,
    AcDecay,
    DBound,
    DiagonalDefeat,
    TwoSetDefeat,
    Greedy,
}

#[derive(Debug, Args)]
pub struct ConstructArgs {
    #[arg(value_enum)]
    pub name: Construction,
    #[arg(long)]
    pub series: Option<String>,
    #[arg(long)]
    pub set: Option<String>,
    #[arg(long)]
    pub set2: Option<String>,
    /// List of sets, e.g. `[evens,odds]`.
    #[arg(long)]
    pub family: Option<String>,
    /// Baire point as nested lists; drawn from `--seed` when absent.
    #[arg(long)]
    pub y: Option<String>,
    /// Map spec such as `table([0,3,9])`.
    #[arg(long)]
    pub f: Option<String>,
    #[arg(long)]
    pub n_max: Option<u64>,
    #[arg(long, default_value_t = 2)]
    pub blocks: u64,
    #[arg(long, default_value_t = 10)]
    pub threshold: u64,
    #[arg(long, allow_hyphen_values = true)]
    pub lo: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    pub hi: Option<String>,
}

#[derive(Debug, Subcommand)]
pub enum ExtractCommand {
    /// Disjoint intervals with oppositely signed sums inside and outside `X`.
    Oscillation(ExtractArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Direct,
    Proof,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[arg(long)]
    pub series: String,
    #[arg(long)]
    pub set: String,
    #[arg(long, default_value_t = 3)]
    pub count: u64,
    #[arg(long)]
    pub c: Option<String>,
    #[arg(long, value_enum, default_value_t = RuleArg::Direct)]
    pub rule: RuleArg,
    #[arg(long)]
    pub scan_bound: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum VerifyCommand {
    /// Seeded trials of a candidate Tukey connection.
    Tukey(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum CandidateArg {
    Splitting,
    SplittingComplemented,
    SplittingForgetful,
    DBound,
    DBoundComplemented,
    DBoundEvens,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_enum)]
    pub candidate: CandidateArg,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
}

#[derive(Debug, Subcommand)]
pub enum DemoCommand {
    /// Which of `X_j = ω ∖ 3ℕ+j` carries both signed sums past the level.
    #[command(name = "ssn-n3")]
    SsnN3 {
        #[arg(long)]
        series: String,
        #[arg(long, default_value = "4")]
        level: String,
    },
}

#[derive(Debug, thiserror::Error)]
pub enum AppError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Build(#[from] BuildError),
    #[error("{0}")]
    Failed(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl AppError {
    /// 2 for usage errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_)
            | AppError::Parse(_)
            | AppError::Build(BuildError::Expected { .. }) => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// a check ran to completion and did not pass
    Failed,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Failed => 1,
        }
    }
}

type Result<T> = std::result::Result<T, AppError>;

fn rational_flag(name: &str, v: &Option<String>) -> Result<Option<Rational>> {
    v.as_deref()
        .map(|t| {
            t.parse::<Rational>()
                .map_err(|_| AppError::Usage(format!("--{name}: not a rational: {t}")))
        })
        .transpose()
}

fn config(g: &Global, base: DiagnosticsConfig, default_horizon: u64) -> Result<DiagnosticsConfig> {
    let mut cfg = base;
    cfg.horizon = g.horizon.unwrap_or(default_horizon);
    if let Some(v) = rational_flag("tail", &g.tail)? {
        cfg.tail_fraction = v;
    }
    if let Some(v) = rational_flag("tol", &g.tol)? {
        cfg.tolerance = v;
    }
    if let Some(v) = rational_flag("gap", &g.gap)? {
        cfg.oscillation_gap = v;
    }
    if let Some(v) = g.revisit {
        cfg.revisit_count = v;
    }
    if let Some(v) = rational_flag("margin", &g.margin)? {
        cfg.escape_margin = v;
    }
    cfg.validate().map_err(|e| AppError::Usage(e.to_string()))?;
    Ok(cfg)
}

fn exact(r: &Rational) -> String {
    format!("{r} (≈{})", r.to_decimal(DECIMAL_PLACES))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, v).map_err(|e| AppError::Failed(e.to_string()))?;
    writeln!(w)?;
    Ok(())
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialize")
}

/// `k, Σ_{X∩k} a` for `k = 0..=horizon`.
pub fn write_trace(
    w: &mut impl Write,
    a: &Series,
    x: &IndexSet,
    horizon: u64,
) -> std::io::Result<()> {
    writeln!(w, "k,sum_exact,sum_decimal")?;
    let mut acc = ExactSum::new();
    writeln!(w, "0,0,{}", Rational::zero().to_decimal(DECIMAL_PLACES))?;
    for (k, inside) in (1..=horizon).zip(x.cursor(0)) {
        if inside {
            acc.add(&a.term(k - 1));
        }
        let v = acc.value();
        writeln!(w, "{k},{v},{}", v.to_decimal(DECIMAL_PLACES))?;
    }
    Ok(())
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Outcome> {
    let g = &cli.global;
    match &cli.command {
        Command::Series(cmd) => run_series(g, cmd, out),
        Command::Construct(args) => run_construct(g, args, out),
        Command::Extract(ExtractCommand::Oscillation(args)) => run_extract(g, args, out),
        Command::Verify(VerifyCommand::Tukey(args)) => run_verify(g, args, out),
        Command::Demo(DemoCommand::SsnN3 { series, level }) => run_demo(g, series, level, out),
    }
}

fn run_series(g: &Global, cmd: &SeriesCommand, out: &mut dyn Write) -> Result<Outcome> {
    let (args, classifying) = match cmd {
        SeriesCommand::Eval(a) => (a, false),
        SeriesCommand::Classify(a) => (a, true),
    };
    let cfg = config(
        g,
        DiagnosticsConfig::default(),
        DiagnosticsConfig::default().horizon,
    )?;
    let ctx = BuildContext {
        horizon: cfg.horizon,
    };
    let a = build::series(&parse_spec(&args.series)?, &ctx)?;
    let x = build::set(&parse_spec(&args.set)?, &ctx)?;
    writeln!(out, "series   {}", a.description())?;
    writeln!(out, "set      {}", x.description())?;
    writeln!(out, "horizon  {}", cfg.horizon)?;
    let report = if classifying {
        let v = classify(&a, &x, &cfg).map_err(|e| AppError::Failed(e.to_string()))?;
        writeln!(out, "kind     {:?}", v.kind)?;
        if let Some(e) = &v.estimate {
            writeln!(out, "estimate {}", exact(e))?;
        }
        if let Some((l, u)) = &v.band {
            writeln!(out, "band     [{}, {}]", exact(l), exact(u))?;
        }
        if let Some(e) = &v.escape {
            writeln!(out, "escape   {}", exact(e))?;
        }
        writeln!(
            out,
            "members  {} (window {})",
            v.evidence.members, v.evidence.window
        )?;
        let cond = conditionality_check(&a, &x, &cfg).ok();
        if let Some(c) = &cond {
            writeln!(out, "conditional {}", c.truth)?;
        }
        json!({ "series": a.description(), "set": x.description(), "cfg": to_value(&cfg),
                "verdict": to_value(&v), "conditionality": cond.as_ref().map(to_value) })
    } else {
        let s = a.partial_sum(&x, cfg.horizon);
        writeln!(out, "sum      {}", exact(&s))?;
        json!({ "series": a.description(), "set": x.description(), "horizon": cfg.horizon,
                "sum_exact": s.to_string(), "sum_decimal": s.to_decimal(DECIMAL_PLACES) })
    };
    if let Some(p) = &g.csv {
        let mut w = BufWriter::new(File::create(p)?);
        write_trace(&mut w, &a, &x, cfg.horizon)?;
        w.flush()?;
    }
    if let Some(p) = &g.json {
        write_json(p, &report)?;
    }
    Ok(Outcome::Success)
}

fn required<'a>(v: &'a Option<String>, flag: &str, name: Construction) -> Result<&'a str> {
    v.as_deref()
        .ok_or_else(|| AppError::Usage(format!("{name:?} needs --{flag}")))
}

fn run_construct(g: &Global, args: &ConstructArgs, out: &mut dyn Write) -> Result<Outcome> {
    let horizon = g.horizon.unwrap_or(100_000);
    let ctx = BuildContext { horizon };
    let name = args.name;
    let series_arg = || -> Result<Series> {
        Ok(build::series(
            &parse_spec(required(&args.series, "series", name)?)?,
            &ctx,
        )?)
    };
    let set_arg = |v: &Option<String>, flag: &str| -> Result<IndexSet> {
        Ok(build::set(&parse_spec(required(v, flag, name)?)?, &ctx)?)
    };
    let n_max = |default: u64| args.n_max.unwrap_or(default);
    let failed = |e: subseries::constructions::ConstructionError| AppError::Failed(e.to_string());
    // the printed spec, plus extra JSON fields
    let (spec, extra): (String, Value) = match name {
        Construction::SplitWitness => {
            let x = set_arg(&args.set, "set")?;
            let s = subseries::constructions::split_witness_series(&x, horizon).map_err(failed)?;
            (s.description().to_string(), Value::Null)
        }
        Construction::AlternatingOn => {
            let x = set_arg(&args.set, "set")?;
            let s = subseries::constructions::alternating_on(&x).map_err(failed)?;
            (s.description().to_string(), Value::Null)
        }
        Construction::AlternatingOnTwo => {
            let (x0, x1) = (set_arg(&args.set, "set")?, set_arg(&args.set2, "set2")?);
            let s =
                subseries::constructions::alternating_on_two(&x0, &x1, horizon).map_err(failed)?;
            (s.description().to_string(), Value::Null)
        }
        Construction::CovmFromY => {
            let n = n_max(4) as usize;
            let y = match &args.y {
                Some(t) => build::point(&parse_spec(t)?)?,
                None => BairePoint::random(&mut ChaCha8Rng::seed_from_u64(g.seed), n, 3),
            };
            let s = subseries::constructions::covm_series_from_y(&y, n);
            (s.description().to_string(), json!({ "y": y.spec() }))
        }
        Construction::CovmPoint => {
            let x = set_arg(&args.set, "set")?;
            let y = covm_point_from_set(&x, n_max(4) as usize, horizon).map_err(failed)?;
            (y.spec(), Value::Null)
        }
        Construction::AcFromF => {
            let f = build::map(&parse_spec(required(&args.f, "f", name)?)?, &ctx)?;
            let s = subseries::constructions::ac_series_from_f(&f, n_max(8)).map_err(failed)?;
            (s.description().to_string(), Value::Null)
        }
        Construction::AcDecay => {
            let a = series_arg()?;
            let n = n_max(8);
            let f = subseries::constructions::ac_decay_function(&a, n).map_err(failed)?;
            let values: Vec<u64> = (0..=n).map(|k| f.apply(k)).collect();
            (
                format!("table([{}])", join(&values)),
                json!({ "map": f.description() }),
            )
        }
        Construction::DBound => {
            let a = series_arg()?;
            let p = match args.n_max {
                Some(n) => d_bound_partition(&a, n, horizon),
                None => subseries::constructions::d_bound_partition_below(&a, horizon),
            }
            .map_err(failed)?;
            let b: Vec<u64> = (0..=p.genuine_len().unwrap_or(0))
                .map(|n| p.boundary(n))
                .collect();
            (
                format!("bounds([{}])", join(&b)),
                json!({ "partition": p.description() }),
            )
        }
        Construction::DiagonalDefeat => {
            let fam = parse_spec(required(&args.family, "family", name)?)?;
            let family = match &fam {
                crate::spec::SpecExpr::List(items) => items
                    .iter()
                    .map(|e| build::set(e, &ctx))
                    .collect::<std::result::Result<Vec<_>, _>>(
                )?,
                other => {
                    return Err(AppError::Usage(format!(
                        "--family must be a list of sets, got {other}"
                    )))
                }
            };
            let d = subseries::constructions::diagonal_defeat(&family, args.blocks, horizon)
                .map_err(failed)?;
            (
                d.series.description().to_string(),
                json!({ "blocks": to_value(&d.blocks) }),
            )
        }
        Construction::TwoSetDefeat => {
            let (x0, x1) = (set_arg(&args.set, "set")?, set_arg(&args.set2, "set2")?);
            let d = two_set_defeat(&x0, &x1, horizon, args.threshold).map_err(failed)?;
            (
                d.series.description().to_string(),
                json!({ "case": format!("{:?}", d.case) }),
            )
        }
        Construction::Greedy => {
            let a = series_arg()?;
            let lo = rational_flag("lo", &args.lo)?
                .ok_or_else(|| AppError::Usage("greedy needs --lo".into()))?;
            let hi = rational_flag("hi", &args.hi)?
                .ok_or_else(|| AppError::Usage("greedy needs --hi".into()))?;
            let r = greedy_finite_adjust(&a, &lo, &hi, horizon).map_err(failed)?;
            let mut members = r.picks.clone();
            members.sort_unstable();
            writeln!(out, "sum  {}", exact(&r.sum))?;
            (
                format!("finite([{}])", join(&members)),
                json!({ "picks": r.picks, "sum": r.sum.to_string() }),
            )
        }
    };
    writeln!(out, "{spec}")?;
    if let Some(p) = &g.json {
        write_json(
            p,
            &json!({ "construction": format!("{name:?}"), "spec": spec, "details": extra }),
        )?;
    }
    Ok(Outcome::Success)
}

fn join(v: &[u64]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn run_extract(g: &Global, args: &ExtractArgs, out: &mut dyn Write) -> Result<Outcome> {
    let cfg = config(
        g,
        DiagnosticsConfig::default(),
        DiagnosticsConfig::default().horizon,
    )?;
    let ctx = BuildContext {
        horizon: cfg.horizon,
    };
    let a = build::series(&parse_spec(&args.series)?, &ctx)?;
    let x = build::set(&parse_spec(&args.set)?, &ctx)?;
    let mut opts = ExtractOptions::new(args.count).with_rule(match args.rule {
        RuleArg::Direct => ExtractionRule::Direct,
        RuleArg::Proof => ExtractionRule::Proof,
    });
    if let Some(c) = rational_flag("c", &args.c)? {
        opts = opts.with_c(c);
    }
    if let Some(b) = args.scan_bound {
        opts = opts.with_scan_bound(b);
    }
    let ex = extract_oscillation_intervals(&a, &x, &cfg, &opts)
        .map_err(|e| AppError::Failed(e.to_string()))?;
    writeln!(out, "c            {}", exact(&ex.c))?;
    writeln!(out, "orientation  {:?}", ex.orientation)?;
    for iv in &ex.intervals {
        let show = |s: &subseries::classify::SumCheck| {
            if s.exact {
                exact(&s.lo)
            } else {
                format!("[{}, {}]", exact(&s.lo), exact(&s.hi))
            }
        };
        writeln!(
            out,
            "[{}, {})  inside {}  outside {}",
            iv.start,
            iv.end,
            show(&iv.inside),
            show(&iv.outside)
        )?;
    }
    let ok = ex.inequalities_hold();
    let all_exact = ex
        .intervals
        .iter()
        .all(|iv| iv.inside.exact && iv.outside.exact);
    let how = if all_exact { "exact" } else { "certified" };
    writeln!(out, "{how}: {}", if ok { "pass" } else { "fail" })?;
    if let Some(p) = &g.json {
        write_json(
            p,
            &json!({ "extraction": to_value(&ex), "inequalities_hold": ok }),
        )?;
    }
    Ok(if ok {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn run_verify(g: &Global, args: &VerifyArgs, out: &mut dyn Write) -> Result<Outcome> {
    if args.trials == 0 {
        return Err(AppError::Usage("--trials must be positive".into()));
    }
    let split = matches!(
        args.candidate,
        CandidateArg::Splitting
            | CandidateArg::SplittingComplemented
            | CandidateArg::SplittingForgetful
    );
    let default_h = if split { 10_000 } else { 100_000 };
    let cfg = config(g, harness_config(default_h), default_h)?;
    let report: VerificationReport = if split {
        let c = match args.candidate {
            CandidateArg::Splitting => splitting_candidate(),
            CandidateArg::SplittingComplemented => splitting_complemented(),
            _ => splitting_forgetful(),
        };
        verify_tukey(&c, &splitting_sampler, args.trials, g.seed, &cfg)
    } else {
        let c = match args.candidate {
            CandidateArg::DBound => d_bound_candidate(),
            CandidateArg::DBoundComplemented => d_bound_complemented(),
            _ => d_bound_constant_evens(),
        };
        verify_tukey(&c, &d_bound_sampler(cfg.horizon), args.trials, g.seed, &cfg)
    };
    writeln!(out, "candidate  {}", report.candidate)?;
    writeln!(out, "trials     {}", report.trials.len())?;
    let (s, t) = (&report.counts, &report.target_counts);
    writeln!(
        out,
        "source     holds {} fails {} unknown {}",
        s.holds, s.fails, s.unknown
    )?;
    writeln!(
        out,
        "target     holds {} fails {} unknown {}",
        t.holds, t.fails, t.unknown
    )?;
    writeln!(out, "decisive   {}", exact(&report.decisive_fraction))?;
    writeln!(out, "violations {}", report.violations.len())?;
    for v in report.violations.iter().take(5) {
        writeln!(out, "  seed {}  {}  {}", v.seed, v.challenge, v.response)?;
    }
    if report.exhausted {
        writeln!(out, "sampler exhausted")?;
    }
    writeln!(out, "{}", if report.pass { "pass" } else { "fail" })?;
    if let Some(p) = &g.json {
        write_json(p, &to_value(&report))?;
    }
    Ok(if report.pass {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}

fn run_demo(g: &Global, series: &str, level: &str, out: &mut dyn Write) -> Result<Outcome> {
    let horizon = g.horizon.unwrap_or(1_000_000);
    let ctx = BuildContext { horizon };
    let a = build::series(&parse_spec(series)?, &ctx)?;
    let level: Rational = level
        .parse()
        .map_err(|_| AppError::Usage(format!("--level: not a rational: {level}")))?;
    let r = ssn_triple_test(&a, horizon, &level).map_err(|e| AppError::Failed(e.to_string()))?;
    writeln!(out, "series   {}", a.description())?;
    writeln!(out, "level    {level}")?;
    for (j, e) in r.escapes.iter().enumerate() {
        writeln!(
            out,
            "X_{j}  escaped {}  reached {}  positive {}  negative {}",
            e.escaped,
            e.reached,
            exact(&e.positive),
            exact(&e.negative)
        )?;
    }
    match r.surviving {
        Some(j) => writeln!(out, "surviving j = {j}")?,
        None => writeln!(out, "no j escaped below horizon {horizon}")?,
    }
    if let Some(p) = &g.json {
        write_json(p, &to_value(&r))?;
    }
    Ok(if r.surviving.is_some() {
        Outcome::Success
    } else {
        Outcome::Failed
    })
}
