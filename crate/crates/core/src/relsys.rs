//! Relational systems, duals, sequential composition and a seeded finite-horizon
//! harness that checks candidate Tukey connections trial by trial.
//!
//! A candidate `(ρ−, ρ+)` from a source system `⟨X, Y, R⟩` to a target `⟨X′, Y′, R′⟩`
//! must satisfy: `(ρ−(x), y′) ∈ R′` implies `(x, ρ+(y′)) ∈ R`. Relations are judged
//! with three-valued verdicts, so a trial is a violation only when the target
//! verdict is `Holds` and the source verdict is `Fails`.

use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bounds::{Bounds, Threshold};
use crate::classify::{
    classify, conditionality_check, ClassifyError, DiagnosticsConfig, VerdictKind,
};
use crate::combinatorics::{ip_dominates, is_split_by, DominationMode};
use crate::constructions::{alternating_on, d_bound_partition_below, split_witness_series};
use crate::index_set::{EventuallyPeriodic, IndexSet};
use crate::partition::IntervalPartition;
use crate::rational::Rational;
use crate::series::Series;
use crate::truth::Truth;

pub type Evaluate<C, R> = Arc<dyn Fn(&C, &R, &DiagnosticsConfig) -> Truth + Send + Sync>;

/// A relation `R ⊆ X × Y` judged on finite data.
pub struct RelationSpec<C, R> {
    pub name: String,
    evaluate: Evaluate<C, R>,
}

impl<C, R> Clone for RelationSpec<C, R> {
    fn clone(&self) -> Self {
        RelationSpec {
            name: self.name.clone(),
            evaluate: self.evaluate.clone(),
        }
    }
}

impl<C, R> RelationSpec<C, R> {
    pub fn new(
        name: impl Into<String>,
        evaluate: impl Fn(&C, &R, &DiagnosticsConfig) -> Truth + Send + Sync + 'static,
    ) -> Self {
        RelationSpec {
            name: name.into(),
            evaluate: Arc::new(evaluate),
        }
    }

    pub fn evaluate(&self, challenge: &C, response: &R, cfg: &DiagnosticsConfig) -> Truth {
        (self.evaluate)(challenge, response, cfg)
    }
}

impl<C, R> std::fmt::Debug for RelationSpec<C, R> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "RelationSpec({})", self.name)
    }
}

/// `R⊥ = {(y, x) : (x, y) ∉ R}`.
pub fn dual<C: 'static, R: 'static>(r: &RelationSpec<C, R>) -> RelationSpec<R, C> {
    let inner = r.evaluate.clone();
    RelationSpec::new(
        format!("dual({})", r.name),
        move |y: &R, x: &C, cfg: &DiagnosticsConfig| !inner(x, y, cfg),
    )
}

/// A challenge `(x, f)` of a sequential composition, `f` mapping first-stage
/// responses to second-stage challenges.
pub struct Chained<C1, R1, C2> {
    pub first: C1,
    pub next: Arc<dyn Fn(&R1) -> C2 + Send + Sync>,
}

impl<C1: Clone, R1, C2> Clone for Chained<C1, R1, C2> {
    fn clone(&self) -> Self {
        Chained {
            first: self.first.clone(),
            next: self.next.clone(),
        }
    }
}

impl<C1, R1, C2> Chained<C1, R1, C2> {
    pub fn new(first: C1, next: impl Fn(&R1) -> C2 + Send + Sync + 'static) -> Self {
        Chained {
            first,
            next: Arc::new(next),
        }
    }
}

/// `((x, f), (y, y′)) ∈ K` iff `(x, y) ∈ R` and `(f(y), y′) ∈ R′`, with Kleene
/// conjunction of the two verdicts.
pub fn sequential_compose<C1: 'static, R1: 'static, C2: 'static, R2: 'static>(
    s1: &RelationSpec<C1, R1>,
    s2: &RelationSpec<C2, R2>,
) -> RelationSpec<Chained<C1, R1, C2>, (R1, R2)> {
    let (e1, e2) = (s1.evaluate.clone(), s2.evaluate.clone());
    RelationSpec::new(
        format!("compose({},{})", s1.name, s2.name),
        move |c: &Chained<C1, R1, C2>, r: &(R1, R2), cfg: &DiagnosticsConfig| {
            let first = e1(&c.first, &r.0, cfg);
            first.and(e2(&(c.next)(&r.0), &r.1, cfg))
        },
    )
}

pub type RhoMinus<C, C2> = Arc<dyn Fn(&C, &DiagnosticsConfig) -> Result<C2, String> + Send + Sync>;
pub type RhoPlus<R2, R> = Arc<dyn Fn(&R2, &DiagnosticsConfig) -> Result<R, String> + Send + Sync>;

/// Maps `ρ− : X → X′` and `ρ+ : Y′ → Y` between a source and a target system.
pub struct TukeyCandidate<C, R, C2, R2> {
    pub name: String,
    pub rho_minus: RhoMinus<C, C2>,
    pub rho_plus: RhoPlus<R2, R>,
    pub source: RelationSpec<C, R>,
    pub target: RelationSpec<C2, R2>,
}

impl<C, R, C2, R2> Clone for TukeyCandidate<C, R, C2, R2> {
    fn clone(&self) -> Self {
        TukeyCandidate {
            name: self.name.clone(),
            rho_minus: self.rho_minus.clone(),
            rho_plus: self.rho_plus.clone(),
            source: self.source.clone(),
            target: self.target.clone(),
        }
    }
}

impl<C, R, C2, R2> TukeyCandidate<C, R, C2, R2> {
    pub fn new(
        name: impl Into<String>,
        source: RelationSpec<C, R>,
        target: RelationSpec<C2, R2>,
        rho_minus: impl Fn(&C, &DiagnosticsConfig) -> Result<C2, String> + Send + Sync + 'static,
        rho_plus: impl Fn(&R2, &DiagnosticsConfig) -> Result<R, String> + Send + Sync + 'static,
    ) -> Self {
        TukeyCandidate {
            name: name.into(),
            rho_minus: Arc::new(rho_minus),
            rho_plus: Arc::new(rho_plus),
            source,
            target,
        }
    }

    /// The same candidate with `ρ+` replaced.
    pub fn with_rho_plus(
        &self,
        name: impl Into<String>,
        rho_plus: impl Fn(&R2, &DiagnosticsConfig) -> Result<R, String> + Send + Sync + 'static,
    ) -> Self {
        TukeyCandidate {
            name: name.into(),
            rho_plus: Arc::new(rho_plus),
            ..self.clone()
        }
    }

    /// The same candidate with `ρ−` replaced.
    pub fn with_rho_minus(
        &self,
        name: impl Into<String>,
        rho_minus: impl Fn(&C, &DiagnosticsConfig) -> Result<C2, String> + Send + Sync + 'static,
    ) -> Self {
        TukeyCandidate {
            name: name.into(),
            rho_minus: Arc::new(rho_minus),
            ..self.clone()
        }
    }
}

/// Identity maps from the system with relation `sup` to the one with `sub`, valid
/// when `sub`'s verdict `Holds` only where `sup`'s does.
pub fn inclusion_connection<C: Clone + 'static, R: Clone + 'static>(
    sub: &RelationSpec<C, R>,
    sup: &RelationSpec<C, R>,
) -> TukeyCandidate<C, R, C, R> {
    TukeyCandidate::new(
        format!("inclusion({}⊆{})", sub.name, sup.name),
        sup.clone(),
        sub.clone(),
        |c: &C, _: &DiagnosticsConfig| Ok(c.clone()),
        |r: &R, _: &DiagnosticsConfig| Ok(r.clone()),
    )
}

/// One sampled pair `(x, y′)` with mini-language renderings.
pub struct Sample<C, R2> {
    pub challenge: C,
    pub response: R2,
    pub challenge_spec: String,
    pub response_spec: String,
}

pub type Sampler<C, R2> = dyn Fn(&mut ChaCha8Rng) -> Option<Sample<C, R2>> + Send + Sync;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub seed: u64,
    pub challenge: String,
    pub response: String,
    pub source: Truth,
    pub target: Truth,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl TrialRecord {
    pub fn is_violation(&self) -> bool {
        self.target == Truth::Holds && self.source == Truth::Fails
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Counts {
    pub holds: u64,
    pub fails: u64,
    pub unknown: u64,
}

impl Counts {
    fn tally(&mut self, t: Truth) {
        match t {
            Truth::Holds => self.holds += 1,
            Truth::Fails => self.fails += 1,
            Truth::Unknown => self.unknown += 1,
        }
    }

    pub fn total(&self) -> u64 {
        self.holds + self.fails + self.unknown
    }
}

/// Fraction of trials with a decisive source verdict required for a pass.
pub const MIN_DECISIVE: (u64, u64) = (1, 2);

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct VerificationReport {
    pub candidate: String,
    pub master_seed: u64,
    pub trials: Vec<TrialRecord>,
    pub cfg: DiagnosticsConfig,
    /// source verdicts
    pub counts: Counts,
    pub target_counts: Counts,
    pub decisive_fraction: Rational,
    pub violations: Vec<TrialRecord>,
    /// the sampler gave up on some trial; `trials` holds the rest
    pub exhausted: bool,
    pub pass: bool,
}

/// Per-trial seeds drawn from the master seed.
pub fn trial_seeds(master_seed: u64, trials: usize) -> Vec<u64> {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    (0..trials).map(|_| rng.next_u64()).collect()
}

/// Runs one trial from its seed; `None` when the sampler is exhausted.
pub fn replay_trial<C, R, C2, R2>(
    c: &TukeyCandidate<C, R, C2, R2>,
    sampler: &Sampler<C, R2>,
    seed: u64,
    cfg: &DiagnosticsConfig,
) -> Option<TrialRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let s = sampler(&mut rng)?;
    let mut notes = Vec::new();
    let target = match (c.rho_minus)(&s.challenge, cfg) {
        Ok(x2) => c.target.evaluate(&x2, &s.response, cfg),
        Err(e) => {
            notes.push(format!("rho_minus: {e}"));
            Truth::Unknown
        }
    };
    let source = match (c.rho_plus)(&s.response, cfg) {
        Ok(y) => c.source.evaluate(&s.challenge, &y, cfg),
        Err(e) => {
            notes.push(format!("rho_plus: {e}"));
            Truth::Unknown
        }
    };
    Some(TrialRecord {
        seed,
        challenge: s.challenge_spec,
        response: s.response_spec,
        source,
        target,
        note: if notes.is_empty() {
            None
        } else {
            Some(notes.join("; "))
        },
    })
}

/// Runs `trials` seeded trials on scoped worker threads; the report is sorted by
/// seed and depends only on `(master_seed, trials, cfg)`.
pub fn verify_tukey<C, R, C2, R2>(
    c: &TukeyCandidate<C, R, C2, R2>,
    sampler: &Sampler<C, R2>,
    trials: usize,
    master_seed: u64,
    cfg: &DiagnosticsConfig,
) -> VerificationReport {
    assert!(trials >= 1, "at least one trial");
    let seeds = trial_seeds(master_seed, trials);
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(u64, Option<TrialRecord>)>> = Mutex::new(Vec::with_capacity(trials));
    let workers = std::thread::available_parallelism()
        .map_or(1, |n| n.get())
        .min(trials);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&seed) = seeds.get(k) else { break };
                let rec = replay_trial(c, sampler, seed, cfg);
                results
                    .lock()
                    .expect("no poisoned workers")
                    .push((seed, rec));
            });
        }
    });
    let mut results = results.into_inner().expect("no poisoned workers");
    results.sort_by_key(|(seed, _)| *seed);
    let exhausted = results.iter().any(|(_, r)| r.is_none());
    let records: Vec<TrialRecord> = results.into_iter().filter_map(|(_, r)| r).collect();
    report_from(c.name.clone(), master_seed, records, cfg.clone(), exhausted)
}

fn report_from(
    candidate: String,
    master_seed: u64,
    trials: Vec<TrialRecord>,
    cfg: DiagnosticsConfig,
    exhausted: bool,
) -> VerificationReport {
    let (mut counts, mut target_counts) = (Counts::default(), Counts::default());
    for t in &trials {
        counts.tally(t.source);
        target_counts.tally(t.target);
    }
    let decisive = counts.holds + counts.fails;
    let decisive_fraction = if trials.is_empty() {
        Rational::zero()
    } else {
        Rational::from_i128(decisive as i128, trials.len() as u128)
    };
    let violations: Vec<TrialRecord> = trials
        .iter()
        .filter(|t| t.is_violation())
        .cloned()
        .collect();
    let enough =
        decisive * MIN_DECISIVE.1 >= trials.len() as u64 * MIN_DECISIVE.0 && !trials.is_empty();
    let pass = violations.is_empty() && enough && !exhausted;
    VerificationReport {
        candidate,
        master_seed,
        trials,
        cfg,
        counts,
        target_counts,
        decisive_fraction,
        violations,
        exhausted,
        pass,
    }
}

// ---- relations ----

/// Both `|X∩Y|` and `|X∖Y|` must reach this below the horizon for `Holds`.
pub const SPLIT_THRESHOLD: u64 = 10;

/// `X` is split by `Y`.
pub fn splitting() -> RelationSpec<IndexSet, IndexSet> {
    RelationSpec::new(
        "split",
        |x: &IndexSet, y: &IndexSet, cfg: &DiagnosticsConfig| {
            is_split_by(x, y, cfg.horizon, SPLIT_THRESHOLD).truth
        },
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SubseriesKind {
    /// `Σ_X a` converges
    C,
    /// `Σ_X a` converges conditionally
    Cc,
    /// `Σ_X a` converges absolutely
    Ac,
}

/// `(a, X) ∈ S_kind` judged by [`classify`] and [`conditionality_check`].
///
/// A divergent verdict fails every kind. A convergent verdict counts only when the
/// partial sums have also settled after the head window (see [`settled_after_head`]);
/// then it holds for `C`, for `Cc` it follows [`conditionality_check`], and `Ac`
/// is its negation.
pub fn subseries(kind: SubseriesKind) -> RelationSpec<Series, IndexSet> {
    let name = match kind {
        SubseriesKind::C => "subseries_c",
        SubseriesKind::Cc => "subseries_cc",
        SubseriesKind::Ac => "subseries_ac",
    };
    RelationSpec::new(
        name,
        move |a: &Series, x: &IndexSet, cfg: &DiagnosticsConfig| subseries_truth(kind, a, x, cfg),
    )
}

fn subseries_truth(
    kind: SubseriesKind,
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
) -> Truth {
    let Ok(v) = classify(a, x, cfg) else {
        return Truth::Unknown;
    };
    match v.kind {
        VerdictKind::TendsPlusInf | VerdictKind::TendsMinusInf | VerdictKind::Oscillates => {
            return Truth::Fails
        }
        VerdictKind::Inconclusive => return Truth::Unknown,
        VerdictKind::Converged => {}
    }
    if !settled_after_head(a, x, cfg).unwrap_or(false) {
        return Truth::Unknown;
    }
    if kind == SubseriesKind::C {
        return Truth::Holds;
    }
    let Ok(cond) = conditionality_check(a, x, cfg) else {
        return Truth::Unknown;
    };
    match kind {
        SubseriesKind::Cc => cond.truth,
        _ => !cond.truth,
    }
}

/// Whether every partial sum after the first `w` members of `X` lies in a band
/// narrower than the tolerance, `w` being the head window.
///
/// The tail window alone cannot tell convergence from divergence like `c·ln k`
/// with small `c`; over the last nine tenths of the members such drift is nine
/// times larger than over the tail.
pub fn settled_after_head(
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
) -> Result<bool, ClassifyError> {
    let members = x.rank(cfg.horizon);
    let w = cfg.window(members);
    let tol = Threshold::new(&cfg.tolerance)?;
    let mut acc = Bounds::ZERO;
    let (mut lo, mut hi) = (i128::MAX, i128::MIN);
    for (rank0, i) in x.members_below(cfg.horizon).enumerate() {
        acc = acc.add(Bounds::of(&a.term(i))?);
        if rank0 as u64 + 1 >= w {
            lo = lo.min(acc.lo);
            hi = hi.max(acc.hi);
        }
    }
    Ok(hi >= lo && hi - lo < tol.floor)
}

/// `I ⊑ J` in the given mode, with the partitions as challenge and response.
pub fn domination(
    mode: DominationMode,
    count: u64,
) -> RelationSpec<IntervalPartition, IntervalPartition> {
    let name = match mode {
        DominationMode::Star => format!("dominates_star({count})"),
        DominationMode::Infty => format!("dominates_infty({count})"),
    };
    RelationSpec::new(
        name,
        move |i: &IntervalPartition, j: &IntervalPartition, cfg: &DiagnosticsConfig| {
            ip_dominates(i, j, cfg.horizon, mode, count).truth
        },
    )
}

/// Tolerances loose enough for conditionality to be decided at `10^4..10^5`.
pub fn harness_config(horizon: u64) -> DiagnosticsConfig {
    DiagnosticsConfig {
        horizon,
        tolerance: Rational::new(1, 100),
        escape_margin: Rational::new(1, 4),
        ..DiagnosticsConfig::default()
    }
}

// ---- candidates ----

pub type SplitCandidate = TukeyCandidate<IndexSet, IndexSet, Series, IndexSet>;
pub type DBoundCandidate = TukeyCandidate<Series, IndexSet, IntervalPartition, IntervalPartition>;

/// `ρ−(X) = split_witness_series(X)`, `ρ+ = id`, from splitting into `S_cc`.
pub fn splitting_candidate() -> SplitCandidate {
    TukeyCandidate::new(
        "split_witness/identity",
        splitting(),
        subseries(SubseriesKind::Cc),
        |x: &IndexSet, cfg: &DiagnosticsConfig| {
            split_witness_series(x, cfg.horizon).map_err(|e| e.to_string())
        },
        |y: &IndexSet, _: &DiagnosticsConfig| Ok(y.clone()),
    )
}

/// `ρ+ = complement`. Splitting is symmetric in `Y` and `ω∖Y`, so this sibling
/// passes whenever the original does.
pub fn splitting_complemented() -> SplitCandidate {
    splitting_candidate().with_rho_plus(
        "split_witness/complement",
        |y: &IndexSet, _: &DiagnosticsConfig| Ok(y.complement()),
    )
}

/// `ρ−` ignores its argument and always returns the witness for the evens.
pub fn splitting_forgetful() -> SplitCandidate {
    splitting_candidate().with_rho_minus(
        "split_witness(evens)/identity",
        |_: &IndexSet, cfg: &DiagnosticsConfig| {
            split_witness_series(&IndexSet::evens(), cfg.horizon).map_err(|e| e.to_string())
        },
    )
}

/// Scan length for `ρ−` in the d-bound candidate as a multiple of the horizon, so
/// the singleton filler after the genuine intervals lies past the horizon.
pub const D_BOUND_REACH: u64 = 4;

/// `ρ−(a) = d_bound_partition(a)`, `ρ+(J) = ∪ J_{2n}`, from `S_cc` into `⊑*`.
pub fn d_bound_candidate() -> DBoundCandidate {
    TukeyCandidate::new(
        "d_bound/even_blocks",
        subseries(SubseriesKind::Cc),
        domination(DominationMode::Star, 2),
        |a: &Series, cfg: &DiagnosticsConfig| {
            d_bound_partition_below(a, cfg.horizon.saturating_mul(D_BOUND_REACH))
                .map_err(|e| e.to_string())
        },
        |j: &IntervalPartition, _: &DiagnosticsConfig| Ok(IndexSet::even_blocks(j)),
    )
}

/// `ρ+(J) = ω ∖ ∪ J_{2n} = ∪ J_{2n+1}`; the argument works for odd blocks too, so
/// this sibling passes whenever the original does.
pub fn d_bound_complemented() -> DBoundCandidate {
    d_bound_candidate().with_rho_plus(
        "d_bound/complement(even_blocks)",
        |j: &IntervalPartition, _: &DiagnosticsConfig| Ok(IndexSet::even_blocks(j).complement()),
    )
}

/// `ρ+(J) = evens` regardless of `J`.
pub fn d_bound_constant_evens() -> DBoundCandidate {
    d_bound_candidate().with_rho_plus(
        "d_bound/evens",
        |_: &IntervalPartition, _: &DiagnosticsConfig| Ok(IndexSet::evens()),
    )
}

// ---- samplers ----

/// A random eventually periodic set with prefix length at most `max_prefix` and
/// cycle length `2^k <= max_cycle`, both infinite and coinfinite; `None` after
/// 64 rejected draws.
pub fn random_periodic(
    rng: &mut impl Rng,
    max_prefix: usize,
    max_cycle: usize,
) -> Option<IndexSet> {
    let top = max_cycle.max(1).ilog2();
    for _ in 0..64 {
        let plen = rng.gen_range(0..=max_prefix);
        let clen = 1usize << rng.gen_range(0..=top);
        let prefix: Vec<bool> = (0..plen).map(|_| rng.gen()).collect();
        let cycle: Vec<bool> = (0..clen).map(|_| rng.gen()).collect();
        let e = EventuallyPeriodic::new(prefix, cycle)?.normalized();
        if e.is_infinite() && e.is_coinfinite() {
            return Some(IndexSet::periodic(e));
        }
    }
    None
}

/// `X` random periodic; `Y` independent, a superset of `X`, or inside `ω∖X`.
pub fn splitting_sampler(rng: &mut ChaCha8Rng) -> Option<Sample<IndexSet, IndexSet>> {
    let x = random_periodic(rng, 64, 64)?;
    for _ in 0..64 {
        let r = random_periodic(rng, 64, 64)?;
        let y = match rng.gen_range(0..3) {
            0 => r,
            1 => x.union(&r),
            _ => x.complement().intersect(&r),
        };
        let Some(e) = y.as_periodic() else { continue };
        if e.is_infinite() && e.is_coinfinite() {
            let y = IndexSet::periodic(e.normalized());
            return Some(Sample {
                challenge_spec: x.description().to_string(),
                response_spec: y.description().to_string(),
                challenge: x,
                response: y,
            });
        }
    }
    None
}

/// A conditionally convergent builder with a convergence modulus.
pub fn random_certified_builder(rng: &mut impl Rng, horizon: u64) -> Option<Series> {
    let ah = Series::alternating_harmonic();
    Some(match rng.gen_range(0..5) {
        0 => ah,
        1 => {
            let (p, q) = (rng.gen_range(1..=8i64), rng.gen_range(1..=8i64));
            let sign = if rng.gen() { 1 } else { -1 };
            ah.scale(&Rational::new(sign * p, q)).ok()?
        }
        2 => {
            let (p, q) = (rng.gen_range(-8..=8i64), rng.gen_range(1..=8i64));
            ah.perturb_quadratic(&Rational::new(p, q))
        }
        3 => split_witness_series(&random_periodic(rng, 16, 16)?, horizon).ok()?,
        _ => alternating_on(&random_periodic(rng, 16, 16)?).ok()?,
    })
}

/// Challenges from [`random_certified_builder`]; responses mostly coarsen the
/// candidate's `ρ−(a)` by merging runs of one to three intervals, otherwise they
/// are random partitions with gaps below `2^16`.
pub fn d_bound_sampler(
    horizon: u64,
) -> impl Fn(&mut ChaCha8Rng) -> Option<Sample<Series, IntervalPartition>> + Send + Sync {
    move |rng: &mut ChaCha8Rng| {
        let a = random_certified_builder(rng, horizon)?;
        let j = if rng.gen_range(0..4) < 3 {
            let i = d_bound_partition_below(&a, horizon.saturating_mul(D_BOUND_REACH)).ok()?;
            let Some(len) = i.genuine_len() else {
                return None;
            };
            let mut bounds = vec![0u64];
            let mut n = 0;
            while n < len {
                n = (n + rng.gen_range(1..=3)).min(len);
                bounds.push(i.boundary(n));
            }
            IntervalPartition::from_boundaries(bounds).ok()?
        } else {
            let mut bounds = vec![0u64];
            let limit = horizon.saturating_mul(D_BOUND_REACH);
            while *bounds.last().expect("nonempty") < limit {
                let gap = 1u64 << rng.gen_range(0..16);
                bounds.push(bounds.last().expect("nonempty") + rng.gen_range(1..=gap));
            }
            IntervalPartition::from_boundaries(bounds).ok()?
        };
        Some(Sample {
            challenge_spec: a.description().to_string(),
            response_spec: j.description().to_string(),
            challenge: a,
            response: j,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn eq_rel() -> RelationSpec<u8, u8> {
        RelationSpec::new("eq", |x: &u8, y: &u8, _: &DiagnosticsConfig| {
            Truth::from_bool(x == y)
        })
    }

    fn neq_rel() -> RelationSpec<u8, u8> {
        RelationSpec::new("neq", |x: &u8, y: &u8, _: &DiagnosticsConfig| {
            Truth::from_bool(x != y)
        })
    }

    #[test]
    fn dual_of_equality_holds_on_unequal_pairs() {
        let cfg = DiagnosticsConfig::default();
        let d = dual(&eq_rel());
        for x in 0..2u8 {
            for y in 0..2u8 {
                assert_eq!(d.evaluate(&y, &x, &cfg), Truth::from_bool(x != y));
                assert_eq!(
                    dual(&d).evaluate(&x, &y, &cfg),
                    eq_rel().evaluate(&x, &y, &cfg)
                );
            }
        }
        let unknown =
            RelationSpec::new("u", |_: &u8, _: &u8, _: &DiagnosticsConfig| Truth::Unknown);
        assert_eq!(dual(&unknown).evaluate(&0, &1, &cfg), Truth::Unknown);
    }

    #[test]
    fn composition_truth_table() {
        let cfg = DiagnosticsConfig::default();
        let k = sequential_compose(&eq_rel(), &neq_rel());
        let c = Chained::new(0u8, |y: &u8| *y);
        assert_eq!(k.evaluate(&c, &(0, 1), &cfg), Truth::Holds);
        assert_eq!(k.evaluate(&c, &(0, 0), &cfg), Truth::Fails);
        assert_eq!(k.evaluate(&c, &(1, 1), &cfg), Truth::Fails);
    }

    #[test]
    fn inclusion_in_itself_passes() {
        let cfg = DiagnosticsConfig::default();
        let c = inclusion_connection(&eq_rel(), &eq_rel());
        let sampler = |rng: &mut ChaCha8Rng| {
            let (x, y) = (rng.gen_range(0..2u8), rng.gen_range(0..2u8));
            Some(Sample {
                challenge: x,
                response: y,
                challenge_spec: x.to_string(),
                response_spec: y.to_string(),
            })
        };
        let r = verify_tukey(&c, &sampler, 40, 7, &cfg);
        assert!(r.pass);
        assert_eq!(r.trials.len(), 40);
        assert!(r.trials.windows(2).all(|w| w[0].seed <= w[1].seed));
    }

    #[test]
    fn broken_inclusion_is_caught() {
        let cfg = DiagnosticsConfig::default();
        let c = inclusion_connection(&eq_rel(), &neq_rel());
        let sampler = |rng: &mut ChaCha8Rng| {
            let x = rng.gen_range(0..2u8);
            Some(Sample {
                challenge: x,
                response: x,
                challenge_spec: x.to_string(),
                response_spec: x.to_string(),
            })
        };
        let r = verify_tukey(&c, &sampler, 10, 1, &cfg);
        assert_eq!(r.violations.len(), 10);
        assert!(!r.pass);
        let v = &r.violations[0];
        assert_eq!(replay_trial(&c, &sampler, v.seed, &cfg).as_ref(), Some(v));
    }

    #[test]
    fn exhausted_sampler_is_flagged() {
        let cfg = DiagnosticsConfig::default();
        let c = inclusion_connection(&eq_rel(), &eq_rel());
        let sampler = |rng: &mut ChaCha8Rng| {
            let x = rng.gen_range(0..4u8);
            (x < 2).then(|| Sample {
                challenge: x,
                response: x,
                challenge_spec: String::new(),
                response_spec: String::new(),
            })
        };
        let r = verify_tukey(&c, &sampler, 30, 3, &cfg);
        assert!(r.exhausted && !r.pass);
        assert!(r.trials.len() < 30);
    }

    #[test]
    fn all_unknown_is_not_a_pass() {
        let cfg = DiagnosticsConfig::default();
        let u = RelationSpec::new("u", |_: &u8, _: &u8, _: &DiagnosticsConfig| Truth::Unknown);
        let c = inclusion_connection(&u, &u);
        let sampler = |_: &mut ChaCha8Rng| {
            Some(Sample {
                challenge: 0u8,
                response: 0u8,
                challenge_spec: String::new(),
                response_spec: String::new(),
            })
        };
        let r = verify_tukey(&c, &sampler, 5, 0, &cfg);
        assert!(r.violations.is_empty() && !r.pass);
    }

    #[test]
    fn report_is_deterministic() {
        let cfg = harness_config(2000);
        let c = splitting_candidate();
        let a = verify_tukey(&c, &splitting_sampler, 12, 99, &cfg);
        let b = verify_tukey(&c, &splitting_sampler, 12, 99, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn cc_refines_c_on_altharmonic() {
        let cfg = harness_config(10_000);
        let ah = Series::alternating_harmonic();
        let cc = subseries(SubseriesKind::Cc);
        let c = subseries(SubseriesKind::C);
        let ac = subseries(SubseriesKind::Ac);
        assert_eq!(cc.evaluate(&ah, &IndexSet::omega(), &cfg), Truth::Holds);
        assert_eq!(c.evaluate(&ah, &IndexSet::omega(), &cfg), Truth::Holds);
        assert_eq!(ac.evaluate(&ah, &IndexSet::omega(), &cfg), Truth::Fails);
        assert_eq!(cc.evaluate(&ah, &IndexSet::evens(), &cfg), Truth::Fails);
        assert_eq!(
            ac.evaluate(&Series::basel(), &IndexSet::evens(), &cfg),
            Truth::Holds
        );
    }
}
