//! Finite-horizon convergence diagnostics and oscillation-interval extraction.
//!
//! Partial sums are followed with fixed-point enclosures from [`crate::bounds`], so
//! every strict inequality behind a verdict or an extracted interval holds for the
//! exact rational sums. Short intervals are additionally re-summed exactly.
//!
//! Windows are counted in members of `X`: with `M = |X ∩ horizon|` and
//! `w = ⌊tail_fraction·M⌋`, the head window holds the partial sums after the first
//! `w` members and the tail window those after the last `w` members.

use serde::{Deserialize, Serialize};

use crate::bounds::{Bounds, RangeError, Threshold};
use crate::index_set::{IndexSet, SetError};
use crate::rational::{ExactSum, Rational};
use crate::series::Series;
use crate::truth::Truth;

/// Intervals at most this long are re-checked with exact rational sums.
pub const EXACT_RECHECK_LEN: u64 = 4096;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    pub horizon: u64,
    pub tail_fraction: Rational,
    pub tolerance: Rational,
    pub oscillation_gap: Rational,
    pub revisit_count: u64,
    pub escape_margin: Rational,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            horizon: 100_000,
            tail_fraction: Rational::new(1, 10),
            tolerance: Rational::new(1, 1000),
            oscillation_gap: Rational::new(1, 2),
            revisit_count: 3,
            escape_margin: Rational::one(),
        }
    }
}

impl DiagnosticsConfig {
    pub fn with_horizon(mut self, horizon: u64) -> Self {
        self.horizon = horizon;
        self
    }

    pub fn validate(&self) -> Result<(), ClassifyError> {
        let half_open = self.tail_fraction.is_positive() && self.tail_fraction < Rational::one();
        if !half_open {
            return Err(ClassifyError::InvalidConfig(
                "tail fraction must lie in (0,1)",
            ));
        }
        if !(self.tolerance.is_positive()
            && self.oscillation_gap.is_positive()
            && self.escape_margin.is_positive())
        {
            return Err(ClassifyError::InvalidConfig(
                "tolerance, gap and margin must be positive",
            ));
        }
        if self.revisit_count == 0 || self.horizon == 0 {
            return Err(ClassifyError::InvalidConfig(
                "horizon and revisit count must be positive",
            ));
        }
        Ok(())
    }

    /// Window length for `members` members of `X` below the horizon.
    pub fn window(&self, members: u64) -> u64 {
        let w = (&self.tail_fraction * &Rational::from(members)).floor();
        u64::try_from(w).unwrap_or(0)
    }

    /// Tolerance, gap and margin multiplied by `q > 0`.
    pub fn scaled(&self, q: &Rational) -> Self {
        DiagnosticsConfig {
            tolerance: &self.tolerance * q,
            oscillation_gap: &self.oscillation_gap * q,
            escape_margin: &self.escape_margin * q,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ClassifyError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error("a term or partial sum left the fixed-point range")]
    Range,
    #[error("invalid diagnostics configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("tail window is empty: {0} members below the horizon")]
    EmptyWindow(u64),
    #[error("extraction needs an oscillating or divergent verdict, got {0:?}")]
    Precondition(VerdictKind),
    #[error("horizon exhausted after {} of the requested intervals", .0.intervals.len())]
    HorizonExhausted(Box<Extraction>),
}

impl From<RangeError> for ClassifyError {
    fn from(_: RangeError) -> Self {
        ClassifyError::Range
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum VerdictKind {
    Converged,
    TendsPlusInf,
    TendsMinusInf,
    Oscillates,
    Inconclusive,
}

/// Window statistics behind a verdict; sums are enclosure endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Evidence {
    pub members: u64,
    pub window: u64,
    pub head_min: Rational,
    pub head_max: Rational,
    pub tail_min: Rational,
    pub tail_max: Rational,
    /// `max lo − min hi` over the tail: a lower bound on the tail spread
    pub inner_width: Rational,
    /// entries into the lower and upper quarter of the tail band
    pub low_visits: u64,
    pub high_visits: u64,
    /// width of the final enclosure
    pub enclosure_width: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub kind: VerdictKind,
    pub estimate: Option<Rational>,
    pub band: Option<(Rational, Rational)>,
    pub escape: Option<Rational>,
    pub evidence: Evidence,
}

const CHUNK: usize = 4096;

/// Term enclosures of `a` for consecutive indices, fetched in chunks.
struct TermScan<'a> {
    a: &'a Series,
    buf: Vec<Bounds>,
    next: u64,
    pos: usize,
    bound: u64,
}

impl<'a> TermScan<'a> {
    const CHUNK: u64 = CHUNK as u64;

    fn new(a: &'a Series, start: u64, bound: u64) -> Self {
        TermScan {
            a,
            buf: Vec::new(),
            next: start,
            pos: 0,
            bound,
        }
    }

    #[inline]
    fn next(&mut self) -> Result<Bounds, RangeError> {
        if self.pos == self.buf.len() {
            let len = Self::CHUNK.min(self.bound.saturating_sub(self.next)).max(1);
            self.buf.resize(len as usize, Bounds::ZERO);
            self.a.fill_bounds(self.next, &mut self.buf)?;
            self.next += len;
            self.pos = 0;
        }
        self.pos += 1;
        Ok(self.buf[self.pos - 1])
    }
}

fn fixed(x: i128) -> Rational {
    crate::bounds::fixed_to_rational(x)
}

/// Calls `f(rank, index, running_sum)` after each member of `X` below `end`,
/// starting from `state = (start, rank, sum)`.
fn walk_members(
    a: &Series,
    x: &IndexSet,
    state: (u64, u64, Bounds),
    end: u64,
    mut f: impl FnMut(u64, u64, Bounds),
) -> Result<(), ClassifyError> {
    let (start, mut rank, mut sum) = state;
    for (i, inside) in (start..end).zip(x.cursor(start)) {
        if !inside {
            continue;
        }
        sum = sum.add(Bounds::of(&a.term(i))?);
        rank += 1;
        f(rank, i, sum);
    }
    Ok(())
}

/// Diagnoses `Σ_{X∩k} a` for `k` up to the horizon.
pub fn classify(
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
) -> Result<Verdict, ClassifyError> {
    cfg.validate()?;
    x.require_infinite()?;
    let members = x.rank(cfg.horizon);
    let w = cfg.window(members);
    if w == 0 {
        return Err(ClassifyError::EmptyWindow(members));
    }
    let tail_from = members - w + 1;

    let (mut head_min, mut head_max) = (i128::MAX, i128::MIN);
    let (mut tail_min_lo, mut tail_max_hi) = (i128::MAX, i128::MIN);
    let (mut tail_max_lo, mut tail_min_hi) = (i128::MIN, i128::MAX);
    let mut tail_state = (0u64, 0u64, Bounds::ZERO);
    let (mut prev, mut last) = (Bounds::ZERO, Bounds::ZERO);
    let mut before = (0u64, 0u64, Bounds::ZERO);
    walk_members(a, x, (0, 0, Bounds::ZERO), cfg.horizon, |rank, i, s| {
        if rank == tail_from {
            tail_state = before;
        }
        if rank <= w {
            head_min = head_min.min(s.lo);
            head_max = head_max.max(s.hi);
        }
        if rank >= tail_from {
            tail_min_lo = tail_min_lo.min(s.lo);
            tail_max_hi = tail_max_hi.max(s.hi);
            tail_max_lo = tail_max_lo.max(s.lo);
            tail_min_hi = tail_min_hi.min(s.hi);
        }
        prev = last;
        last = s;
        before = (i + 1, rank, s);
    })?;

    let margin = Threshold::new(&cfg.escape_margin)?;
    let tol = Threshold::new(&cfg.tolerance)?;
    let gap = Threshold::new(&cfg.oscillation_gap)?;

    let mut evidence = Evidence {
        members,
        window: w,
        head_min: fixed(head_min),
        head_max: fixed(head_max),
        tail_min: fixed(tail_min_lo),
        tail_max: fixed(tail_max_hi),
        inner_width: fixed(tail_max_lo - tail_min_hi),
        low_visits: 0,
        high_visits: 0,
        enclosure_width: fixed(last.width()),
    };
    let band = Some((fixed(tail_min_lo), fixed(tail_max_hi)));
    let verdict = |kind, estimate, escape, evidence| Verdict {
        kind,
        estimate,
        band: band.clone(),
        escape,
        evidence,
    };

    if tail_min_lo > head_max + margin.ceil {
        return Ok(verdict(
            VerdictKind::TendsPlusInf,
            None,
            Some(fixed(tail_min_lo)),
            evidence,
        ));
    }
    if tail_max_hi < head_min - margin.ceil {
        return Ok(verdict(
            VerdictKind::TendsMinusInf,
            None,
            Some(fixed(tail_max_hi)),
            evidence,
        ));
    }
    if tail_max_hi - tail_min_lo < tol.floor {
        let mid = Bounds {
            lo: prev.lo + last.lo,
            hi: prev.hi + last.hi,
        };
        // (prev + last)/2 as a dyadic midpoint of its enclosure
        let estimate = &mid.mid_rational() / &Rational::from_integer(2);
        return Ok(verdict(
            VerdictKind::Converged,
            Some(estimate),
            None,
            evidence,
        ));
    }
    if tail_max_lo - tail_min_hi >= gap.ceil {
        let quarter = (tail_max_hi - tail_min_lo) / 4;
        let (low, high) = (tail_min_lo + quarter, tail_max_hi - quarter);
        let mut zone = 0i8;
        let (mut lows, mut highs) = (0u64, 0u64);
        walk_members(a, x, tail_state, cfg.horizon, |_, _, s| {
            if s.hi <= low && zone != -1 {
                zone = -1;
                lows += 1;
            } else if s.lo >= high && zone != 1 {
                zone = 1;
                highs += 1;
            }
        })?;
        evidence.low_visits = lows;
        evidence.high_visits = highs;
        if lows >= cfg.revisit_count && highs >= cfg.revisit_count {
            return Ok(verdict(VerdictKind::Oscillates, None, None, evidence));
        }
    }
    Ok(verdict(VerdictKind::Inconclusive, None, None, evidence))
}

/// Growth of one monotone half `Σ_{X∩P_a}` or `Σ_{X∩N_a}`, as enclosure endpoints.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct HalfEvidence {
    pub at_head_end: Rational,
    pub at_tail_start: Rational,
    pub at_horizon: Rational,
    pub escapes: bool,
    pub stagnates: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Conditionality {
    pub truth: Truth,
    pub positive: HalfEvidence,
    pub negative: HalfEvidence,
}

/// Whether `Σ_{X∩P_a} a → ∞` and `Σ_{X∩N_a} a → −∞`, judged on the rank windows.
///
/// A half escapes when it grows by more than the margin between the head end and
/// the tail start; it stagnates when it grows by less than the tolerance across
/// the tail. Holds needs two escaping halves and no stagnation; Fails needs a
/// half that stagnates without having escaped. The stagnation test is a
/// heuristic.
pub fn conditionality_check(
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
) -> Result<Conditionality, ClassifyError> {
    cfg.validate()?;
    x.require_infinite()?;
    let members = x.rank(cfg.horizon);
    let w = cfg.window(members);
    if w == 0 {
        return Err(ClassifyError::EmptyWindow(members));
    }
    let tail_start = members - w;
    let (mut pos, mut neg) = (Bounds::ZERO, Bounds::ZERO);
    let mut marks = [(Bounds::ZERO, Bounds::ZERO); 2];
    let mut err = None;
    for (rank0, i) in x.members_below(cfg.horizon).enumerate() {
        let t = a.term(i);
        let b = match Bounds::of(&t) {
            Ok(b) => b,
            Err(e) => {
                err = Some(e);
                break;
            }
        };
        match t.signum() {
            1 => pos = pos.add(b),
            -1 => neg = neg.add(b),
            _ => {}
        }
        let rank = rank0 as u64 + 1;
        if rank == w {
            marks[0] = (pos, neg);
        }
        if rank == tail_start {
            marks[1] = (pos, neg);
        }
    }
    if let Some(e) = err {
        return Err(e.into());
    }
    let margin = Threshold::new(&cfg.escape_margin)?;
    let tol = Threshold::new(&cfg.tolerance)?;
    let positive = HalfEvidence {
        at_head_end: fixed(marks[0].0.hi),
        at_tail_start: fixed(marks[1].0.lo),
        at_horizon: fixed(pos.hi),
        escapes: marks[1].0.lo > marks[0].0.hi + margin.ceil,
        stagnates: pos.hi - marks[1].0.lo < tol.floor,
    };
    let negative = HalfEvidence {
        at_head_end: fixed(marks[0].1.lo),
        at_tail_start: fixed(marks[1].1.hi),
        at_horizon: fixed(neg.lo),
        escapes: marks[1].1.hi < marks[0].1.lo - margin.ceil,
        stagnates: marks[1].1.hi - neg.lo < tol.floor,
    };
    // a half that escaped and then stalled is bursty, not convergent
    let stalled = |h: &HalfEvidence| h.stagnates && !h.escapes;
    let truth = if stalled(&positive) || stalled(&negative) {
        Truth::Fails
    } else if positive.escapes && negative.escapes {
        Truth::Holds
    } else {
        Truth::Unknown
    };
    Ok(Conditionality {
        truth,
        positive,
        negative,
    })
}

/// Signed partial sums along `X` split by sign.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SignedEscape {
    /// certified lower bound on `Σ_{X∩P_a∩k} a` at `reached`
    pub positive: Rational,
    /// certified upper bound on `Σ_{X∩N_a∩k} a` at `reached`
    pub negative: Rational,
    /// index where both levels were passed, or the horizon
    pub reached: u64,
    pub escaped: bool,
}

/// Whether both `Σ_{X∩P_a∩k} a > level` and `Σ_{X∩N_a∩k} a < −level` for some
/// `k <= horizon`; stops at the first such `k`.
pub fn signed_escape(
    a: &Series,
    x: &IndexSet,
    horizon: u64,
    level: &Rational,
) -> Result<SignedEscape, ClassifyError> {
    let lv = Threshold::new(level)?;
    let (mut pos, mut neg) = (Bounds::ZERO, Bounds::ZERO);
    for (i, inside) in (0..horizon).zip(x.cursor(0)) {
        if !inside {
            continue;
        }
        let t = a.term(i);
        match t.signum() {
            1 => pos = pos.add(Bounds::of(&t)?),
            -1 => neg = neg.add(Bounds::of(&t)?),
            _ => continue,
        }
        if pos.lo > lv.ceil && neg.hi < -lv.ceil {
            return Ok(SignedEscape {
                positive: fixed(pos.lo),
                negative: fixed(neg.hi),
                reached: i + 1,
                escaped: true,
            });
        }
    }
    Ok(SignedEscape {
        positive: fixed(pos.lo),
        negative: fixed(neg.hi),
        reached: horizon,
        escaped: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Orientation {
    /// `Σ_{I∩X} a > c` and `Σ_{I∖X} a < −c`
    PosInX,
    /// `Σ_{I∩X} a < −c` and `Σ_{I∖X} a > c`
    NegInX,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ExtractionRule {
    /// close a block once both inequalities hold
    Direct,
    /// for divergent sums: start at the convergence modulus for `c/2` and close
    /// once the `X` side passes `2c`, then confirm the other side
    Proof,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractOptions {
    pub count: u64,
    /// overrides the default choice of `c`
    pub c: Option<Rational>,
    pub rule: ExtractionRule,
    /// scan limit; defaults to the configured horizon
    pub scan_bound: Option<u64>,
}

impl ExtractOptions {
    pub fn new(count: u64) -> Self {
        ExtractOptions {
            count,
            c: None,
            rule: ExtractionRule::Direct,
            scan_bound: None,
        }
    }

    pub fn with_c(mut self, c: Rational) -> Self {
        self.c = Some(c);
        self
    }

    pub fn with_rule(mut self, rule: ExtractionRule) -> Self {
        self.rule = rule;
        self
    }

    pub fn with_scan_bound(mut self, bound: u64) -> Self {
        self.scan_bound = Some(bound);
        self
    }
}

/// An interval sum, either exact (`lo = hi`) or enclosed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SumCheck {
    pub lo: Rational,
    pub hi: Rational,
    pub exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OscInterval {
    pub start: u64,
    pub end: u64,
    /// `Σ_{I∩X} a`
    pub inside: SumCheck,
    /// `Σ_{I∖X} a`
    pub outside: SumCheck,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Extraction {
    pub c: Rational,
    /// crossing midpoint, oscillation case only
    pub d: Option<Rational>,
    pub orientation: Orientation,
    pub rule: ExtractionRule,
    pub source: VerdictKind,
    /// first index scanned
    pub start: u64,
    /// whether `start` came from a convergence-modulus certificate
    pub start_certified: bool,
    pub intervals: Vec<OscInterval>,
    pub scanned_to: u64,
}

impl Extraction {
    /// Whether each interval's sums satisfy the oriented inequality pair.
    pub fn inequalities_hold(&self) -> bool {
        let c = &self.c;
        let neg_c = -c;
        self.intervals.iter().all(|iv| match self.orientation {
            Orientation::PosInX => iv.inside.lo > *c && iv.outside.hi < neg_c,
            Orientation::NegInX => iv.inside.hi < neg_c && iv.outside.lo > *c,
        })
    }
}

fn exact_sums(a: &Series, x: &IndexSet, start: u64, end: u64) -> (Rational, Rational) {
    let (mut inside, mut outside) = (ExactSum::new(), ExactSum::new());
    for i in start..end {
        if x.contains(i) {
            inside.add(&a.term(i));
        } else {
            outside.add(&a.term(i));
        }
    }
    (inside.value(), outside.value())
}

fn check_of(b: Bounds) -> SumCheck {
    SumCheck {
        lo: fixed(b.lo),
        hi: fixed(b.hi),
        exact: false,
    }
}

/// Disjoint intervals `I` with `Σ_{I∩X} a` and `Σ_{I∖X} a` beyond `±c` with
/// opposite signs.
///
/// For divergent sums `c` defaults to 1. For oscillating sums with tail band
/// `[l, L]`, `d = (L+l)/2` and `c` defaults to `(L−l)/4`; an interval runs from a
/// point where `Σ_{X∩m} a < d − c` to a later point where `Σ_{X∩k} a > d + c`.
pub fn extract_oscillation_intervals(
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
    opts: &ExtractOptions,
) -> Result<Extraction, ClassifyError> {
    let verdict = classify(a, x, cfg)?;
    let bound = opts.scan_bound.unwrap_or(cfg.horizon);
    let mut ex = match verdict.kind {
        VerdictKind::TendsPlusInf | VerdictKind::TendsMinusInf => {
            let orientation = if verdict.kind == VerdictKind::TendsPlusInf {
                Orientation::PosInX
            } else {
                Orientation::NegInX
            };
            let c = opts.c.clone().unwrap_or_else(Rational::one);
            scan_divergent(a, x, c, orientation, opts, bound, verdict.kind)?
        }
        VerdictKind::Oscillates => {
            let (l, u) = verdict.band.clone().expect("band present");
            let two = Rational::from_integer(2);
            let d = &(&u + &l) / &two;
            let c = opts
                .c
                .clone()
                .unwrap_or_else(|| &(&u - &l) / &Rational::from_integer(4));
            scan_oscillating(a, x, c, d, opts, bound)?
        }
        k => return Err(ClassifyError::Precondition(k)),
    };
    recheck_short(a, x, &mut ex);
    if (ex.intervals.len() as u64) < opts.count {
        return Err(ClassifyError::HorizonExhausted(Box::new(ex)));
    }
    Ok(ex)
}

fn recheck_short(a: &Series, x: &IndexSet, ex: &mut Extraction) {
    for iv in &mut ex.intervals {
        if iv.end - iv.start <= EXACT_RECHECK_LEN {
            let (inside, outside) = exact_sums(a, x, iv.start, iv.end);
            assert!(
                iv.inside.lo <= inside && inside <= iv.inside.hi,
                "enclosure unsound"
            );
            assert!(
                iv.outside.lo <= outside && outside <= iv.outside.hi,
                "enclosure unsound"
            );
            iv.inside = SumCheck {
                lo: inside.clone(),
                hi: inside,
                exact: true,
            };
            iv.outside = SumCheck {
                lo: outside.clone(),
                hi: outside,
                exact: true,
            };
        }
    }
    debug_assert!(ex.inequalities_hold());
}

fn scan_divergent(
    a: &Series,
    x: &IndexSet,
    c: Rational,
    orientation: Orientation,
    opts: &ExtractOptions,
    bound: u64,
    source: VerdictKind,
) -> Result<Extraction, ClassifyError> {
    let ct = Threshold::new(&c)?;
    let (in_need, start, start_certified) = match opts.rule {
        ExtractionRule::Direct => (ct, 0, false),
        ExtractionRule::Proof => {
            let twice = Threshold::new(&(&c * &Rational::from_integer(2)))?;
            let half = &c / &Rational::from_integer(2);
            match a.convergence_modulus(&half) {
                Some(m) => (twice, m, true),
                None => (twice, 0, false),
            }
        }
    };
    let (intervals, scanned_to) = if orientation == Orientation::NegInX {
        divergent_blocks::<true>(a, x, start, bound, opts.count, in_need, ct)?
    } else {
        divergent_blocks::<false>(a, x, start, bound, opts.count, in_need, ct)?
    };
    Ok(Extraction {
        c,
        d: None,
        orientation,
        rule: opts.rule,
        source,
        start,
        start_certified,
        intervals,
        scanned_to,
    })
}

/// Blocks `[m, n)` with `Σ_{X∩[m,n)} ±a > in_need` and `Σ_{[m,n)∖X} ±a < −c`,
/// the sign being `−` when `FLIP`.
///
/// Where the series encloses whole range sums, stretches in which no prefix can
/// close a block are skipped with doubling length; elsewhere terms are scanned.
fn divergent_blocks<const FLIP: bool>(
    a: &Series,
    x: &IndexSet,
    start: u64,
    bound: u64,
    count: u64,
    in_need: Threshold,
    ct: Threshold,
) -> Result<(Vec<OscInterval>, u64), ClassifyError> {
    let mut intervals = Vec::new();
    let (mut block, mut inside, mut outside) = (start, Bounds::ZERO, Bounds::ZERO);
    let mut buf = vec![Bounds::ZERO; CHUNK];
    let mut member = vec![false; CHUNK];
    let mut span = 2 * CHUNK as u64;
    let mut i = start;
    'scan: while i < bound && (intervals.len() as u64) < count {
        let len = span.min(bound - i);
        if len > CHUNK as u64 {
            if let Some((ins, outs)) = a.range_sums(i, len, x) {
                // can some prefix of the stretch reach both thresholds?
                let reach = if FLIP {
                    inside.lo + ins.fall < -in_need.floor && outside.hi + outs.rise > ct.floor
                } else {
                    inside.hi + ins.rise > in_need.floor && outside.lo + outs.fall < -ct.floor
                };
                if reach {
                    span /= 2;
                } else {
                    inside = inside.add(ins.total);
                    outside = outside.add(outs.total);
                    i += len;
                    span = span.saturating_mul(2);
                }
                continue;
            }
        }
        let len = (CHUNK as u64).min(bound - i) as usize;
        a.fill_bounds(i, &mut buf[..len])?;
        for (m, b) in member[..len].iter_mut().zip(x.cursor(i)) {
            *m = b;
        }
        for (&t, &m) in buf[..len].iter().zip(&member[..len]) {
            if m {
                inside = inside.add(t);
            } else {
                outside = outside.add(t);
            }
            i += 1;
            // oriented: inside > in_need and outside < −c
            let closes = if FLIP {
                inside.hi < -in_need.ceil && outside.lo > ct.floor
            } else {
                inside.lo > in_need.ceil && outside.hi < -ct.floor
            };
            if closes {
                intervals.push(OscInterval {
                    start: block,
                    end: i,
                    inside: check_of(inside),
                    outside: check_of(outside),
                });
                block = i;
                inside = Bounds::ZERO;
                outside = Bounds::ZERO;
                if intervals.len() as u64 == count {
                    break 'scan;
                }
            }
        }
        span = 2 * CHUNK as u64;
    }
    Ok((intervals, i))
}

fn scan_oscillating(
    a: &Series,
    x: &IndexSet,
    c: Rational,
    d: Rational,
    opts: &ExtractOptions,
    bound: u64,
) -> Result<Extraction, ClassifyError> {
    let low = Threshold::new(&(&d - &c))?;
    let high = Threshold::new(&(&d + &c))?;
    let ct = Threshold::new(&c)?;
    let neg_c = Threshold {
        floor: -ct.ceil,
        ceil: -ct.floor,
    };
    let mut intervals = Vec::new();
    let mut total = Bounds::ZERO;
    // candidate start with the sums accumulated since it
    let mut open: Option<(u64, Bounds, Bounds)> = None;
    let mut cursor = x.cursor(0);
    let mut terms = TermScan::new(a, 0, bound);
    let mut i = 0u64;
    while i < bound && (intervals.len() as u64) < opts.count {
        if total.lt(&low) {
            open = Some((i, Bounds::ZERO, Bounds::ZERO));
        }
        let t = terms.next()?;
        let member = cursor.next().expect("unbounded");
        if member {
            total = total.add(t);
        }
        i += 1;
        if let Some((m, inside, outside)) = open.as_mut() {
            if member {
                *inside = inside.add(t);
            } else {
                *outside = outside.add(t);
            }
            if total.gt(&high) && inside.gt(&ct) && outside.lt(&neg_c) {
                intervals.push(OscInterval {
                    start: *m,
                    end: i,
                    inside: check_of(*inside),
                    outside: check_of(*outside),
                });
                open = None;
            }
        }
    }
    Ok(Extraction {
        c,
        d: Some(d),
        orientation: Orientation::PosInX,
        rule: ExtractionRule::Direct,
        source: VerdictKind::Oscillates,
        start: 0,
        start_certified: false,
        intervals,
        scanned_to: i,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cfg(h: u64) -> DiagnosticsConfig {
        DiagnosticsConfig::default().with_horizon(h)
    }

    #[test]
    fn window_counts_members() {
        let c = cfg(100);
        assert_eq!(c.window(50), 5);
        assert_eq!(c.window(9), 0);
    }

    #[test]
    fn rejects_bad_config_and_sets() {
        let mut c = cfg(100);
        c.tail_fraction = Rational::one();
        assert!(matches!(
            classify(&Series::basel(), &IndexSet::omega(), &c),
            Err(ClassifyError::InvalidConfig(_))
        ));
        let fin = IndexSet::finite([1, 2, 3]);
        assert!(matches!(
            classify(&Series::basel(), &fin, &cfg(100)),
            Err(ClassifyError::Set(_))
        ));
        assert!(matches!(
            classify(&Series::basel(), &IndexSet::omega(), &cfg(5)),
            Err(ClassifyError::EmptyWindow(5))
        ));
    }

    #[test]
    fn telescoping_converges_near_one() {
        let v = classify(&Series::telescoping(), &IndexSet::omega(), &cfg(20_000)).unwrap();
        assert_eq!(v.kind, VerdictKind::Converged);
        let e = v.estimate.unwrap();
        assert!((e - Rational::one()).abs() < Rational::new(1, 10_000));
    }

    #[test]
    fn odds_tend_to_minus_infinity() {
        let v = classify(
            &Series::alternating_harmonic(),
            &IndexSet::odds(),
            &cfg(1_000_000),
        )
        .unwrap();
        assert_eq!(v.kind, VerdictKind::TendsMinusInf);
        assert!(v.escape.is_some());
    }

    #[test]
    fn short_horizon_is_inconclusive() {
        // ½·ln 9 exceeds the margin only at full scale; a wide margin blocks escape
        let mut c = cfg(1000);
        c.escape_margin = Rational::from_integer(5);
        let v = classify(&Series::alternating_harmonic(), &IndexSet::evens(), &c).unwrap();
        assert_eq!(v.kind, VerdictKind::Inconclusive);
    }

    #[test]
    fn conditionality_examples() {
        let ah = Series::alternating_harmonic();
        let c = cfg(1_000_000);
        assert_eq!(
            conditionality_check(&ah, &IndexSet::omega(), &c)
                .unwrap()
                .truth,
            Truth::Holds
        );
        assert_eq!(
            conditionality_check(&ah, &IndexSet::evens(), &c)
                .unwrap()
                .truth,
            Truth::Fails
        );
        let b = conditionality_check(&Series::basel(), &IndexSet::omega(), &c).unwrap();
        assert_eq!(b.truth, Truth::Fails);
        assert!(b.positive.at_horizon < Rational::from_integer(2));
    }

    #[test]
    fn extraction_direct_rule_on_evens() {
        let ah = Series::alternating_harmonic();
        let ex = extract_oscillation_intervals(
            &ah,
            &IndexSet::evens(),
            &cfg(1_000_000),
            &ExtractOptions::new(3),
        )
        .unwrap();
        assert_eq!(ex.orientation, Orientation::PosInX);
        assert_eq!(ex.intervals.len(), 3);
        assert!(ex.inequalities_hold());
        for w in ex.intervals.windows(2) {
            assert!(w[0].end <= w[1].start);
        }
        assert!(ex.intervals[0].inside.exact);
    }

    #[test]
    fn extraction_proof_rule_starts_at_modulus() {
        let ah = Series::alternating_harmonic();
        let opts = ExtractOptions::new(3).with_rule(ExtractionRule::Proof);
        let ex =
            extract_oscillation_intervals(&ah, &IndexSet::evens(), &cfg(1_000_000), &opts).unwrap();
        assert_eq!((ex.start, ex.start_certified), (2, true));
        let two = Rational::from_integer(2);
        assert!(ex
            .intervals
            .iter()
            .all(|iv| iv.inside.lo > two && iv.outside.hi < Rational::from_integer(-1)));
    }

    #[test]
    fn extraction_mirrors_on_odds() {
        let ah = Series::alternating_harmonic();
        let ex = extract_oscillation_intervals(
            &ah,
            &IndexSet::odds(),
            &cfg(1_000_000),
            &ExtractOptions::new(3),
        )
        .unwrap();
        assert_eq!(ex.orientation, Orientation::NegInX);
        assert!(ex.inequalities_hold());
    }

    #[test]
    fn extraction_rejects_convergent_input() {
        let r = extract_oscillation_intervals(
            &Series::basel(),
            &IndexSet::omega(),
            &cfg(10_000),
            &ExtractOptions::new(1),
        );
        assert_eq!(
            r.unwrap_err(),
            ClassifyError::Precondition(VerdictKind::Converged)
        );
    }

    #[test]
    fn exhausted_horizon_keeps_partial_results() {
        let ah = Series::alternating_harmonic();
        let opts = ExtractOptions::new(50).with_scan_bound(2_000_000);
        match extract_oscillation_intervals(&ah, &IndexSet::evens(), &cfg(1_000_000), &opts) {
            Err(ClassifyError::HorizonExhausted(p)) => {
                assert!(!p.intervals.is_empty());
                assert!(p.inequalities_hold());
            }
            other => panic!("unexpected {other:?}"),
        }
    }
}
