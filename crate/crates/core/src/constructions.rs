//! The explicit maps and series builders behind the subseries bounds.
//!
//! Builders that would be infinite take a block count or a horizon and are
//! zero-filled past it; the returned series records the truncation index.

use std::borrow::Cow;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{Bounds, ReciprocalWalk, FRAC_BITS};
use crate::classify::{
    extract_oscillation_intervals, signed_escape, ClassifyError, DiagnosticsConfig, ExtractOptions,
    Extraction, Orientation, SignedEscape,
};
use crate::combinatorics::{contains_some_interval, switching_points};
use crate::index_set::{IndexSet, SetError};
use crate::partition::{IntervalPartition, NatMap, PartitionError};
use crate::rational::{ExactSum, Rational};
use crate::series::{floor_recip, Series, SeriesClass};
use crate::truth::Truth;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ConstructionError {
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Classify(#[from] ClassifyError),
    #[error("block {n} has length {len}, expected {}", 2 * .n + 2)]
    BlockLength { n: usize, len: usize },
    #[error("cannot place block ({set},{k}) below horizon {horizon} after {} blocks", .trace.len())]
    Placement {
        set: usize,
        k: u64,
        horizon: u64,
        trace: Vec<PlacedBlock>,
    },
    #[error("{0} requires convergence modulus")]
    MissingConvergence(String),
    #[error("{0} requires decay modulus")]
    MissingDecay(String),
    #[error("absolute sums stagnate: interval {n} not closed below horizon {horizon}")]
    Stagnation { n: u64, horizon: u64 },
    #[error("map must start at 0 and increase strictly (failed at {0})")]
    NotIncreasing(u64),
    #[error("decay function decreases at {0}")]
    NotMonotone(u64),
    #[error("{found} switching points below horizon, {needed} needed")]
    SwitchingPoints { found: u64, needed: u64 },
    #[error("target interval is empty")]
    EmptyTarget,
    #[error("scan bound {bound} exhausted after {} picks with sum {sum}", .picks.len())]
    GreedyExhausted {
        bound: u64,
        picks: Vec<u64>,
        sum: Rational,
    },
    #[error("dichotomy not witnessed below {horizon}: |Z| = {z}, |Z0| = {z0}, |Z1| = {z1}")]
    Dichotomy {
        horizon: u64,
        z: u64,
        z0: u64,
        z1: u64,
    },
    #[error("sets overlap at {0}")]
    NotDisjoint(u64),
}

type Result<T> = std::result::Result<T, ConstructionError>;

fn check_blocks(blocks: &[Vec<u64>]) -> Result<()> {
    for (n, b) in blocks.iter().enumerate() {
        if b.len() != 2 * n + 2 {
            return Err(ConstructionError::BlockLength { n, len: b.len() });
        }
    }
    Ok(())
}

fn list<T: ToString>(v: &[T]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn nested(blocks: &[Vec<u64>]) -> String {
    format!(
        "[{}]",
        blocks
            .iter()
            .map(|b| format!("[{}]", list(b)))
            .collect::<Vec<_>>()
            .join(",")
    )
}

/// A finite stem `s_0, …, s_{k−1}` with `|s_n| = 2n+2`.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BaireStem {
    blocks: Vec<Vec<u64>>,
}

impl BaireStem {
    pub fn new(blocks: Vec<Vec<u64>>) -> Result<Self> {
        check_blocks(&blocks)?;
        Ok(BaireStem { blocks })
    }

    pub fn empty() -> Self {
        BaireStem::default()
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> &[Vec<u64>] {
        &self.blocks
    }

    /// Whether `s ⊆ self`.
    pub fn extends(&self, s: &BaireStem) -> bool {
        self.blocks.starts_with(&s.blocks)
    }

    pub fn spec(&self) -> String {
        nested(&self.blocks)
    }
}

/// A point of `∏_n ^{2n+2}ω`, listed for `n < listed()` and all-zero beyond.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct BairePoint {
    blocks: Vec<Vec<u64>>,
}

impl BairePoint {
    pub fn new(blocks: Vec<Vec<u64>>) -> Result<Self> {
        check_blocks(&blocks)?;
        Ok(BairePoint { blocks })
    }

    /// Blocks `n < count` with entries drawn from `0..=max_entry`.
    pub fn random(rng: &mut impl Rng, count: usize, max_entry: u64) -> Self {
        let blocks = (0..count)
            .map(|n| {
                (0..2 * n + 2)
                    .map(|_| rng.gen_range(0..=max_entry))
                    .collect()
            })
            .collect();
        BairePoint { blocks }
    }

    pub fn listed(&self) -> usize {
        self.blocks.len()
    }

    pub fn block(&self, n: usize) -> Cow<'_, [u64]> {
        match self.blocks.get(n) {
            Some(b) => Cow::Borrowed(b),
            None => Cow::Owned(vec![0; 2 * n + 2]),
        }
    }

    /// `x↾k`.
    pub fn restrict(&self, k: usize) -> BaireStem {
        BaireStem {
            blocks: (0..k).map(|n| self.block(n).into_owned()).collect(),
        }
    }

    pub fn nonzero_blocks(&self) -> usize {
        self.blocks
            .iter()
            .filter(|b| b.iter().any(|&v| v != 0))
            .count()
    }

    /// Finite evidence for infinitely many nonzero blocks: holds with at least
    /// `threshold` nonzero blocks, fails when `threshold` or more listed blocks
    /// are all zero.
    pub fn q_evidence(&self, threshold: usize) -> Truth {
        let nz = self.nonzero_blocks();
        if nz >= threshold {
            Truth::Holds
        } else if nz == 0 && self.blocks.len() >= threshold {
            Truth::Fails
        } else {
            Truth::Unknown
        }
    }

    pub fn spec(&self) -> String {
        nested(&self.blocks)
    }
}

fn block_sigma(b: &[u64]) -> u64 {
    b.iter()
        .fold(0u64, |acc, &v| acc.saturating_add(v.saturating_add(1)))
}

/// `σ(s) = Σ_n Σ_i (s_n(i) + 1)`.
pub fn covm_sigma(s: &BaireStem) -> u64 {
    s.blocks
        .iter()
        .fold(0u64, |acc, b| acc.saturating_add(block_sigma(b)))
}

/// The least `k` with `max(|s|, 1) <= k <= search_bound` and an extension `t ⊇ s`
/// of length `k` with `σ(t) = σ(x↾k)`.
///
/// A new block `n` adds at least `2n+2` to `σ` and any larger amount, so the
/// extension exists exactly when `σ(x↾k)` reaches `σ(s) + Σ_{|s|<=n<k} (2n+2)`.
/// The empty extension is excluded so the match is never the trivial one at 0.
pub fn covm_suitable_search(
    s: &BaireStem,
    x: &BairePoint,
    search_bound: u64,
) -> Option<(u64, BaireStem)> {
    let l = s.len() as u64;
    let base = covm_sigma(s);
    let mut target = covm_sigma(&x.restrict(l as usize));
    let mut least = base;
    for k in l..=search_bound {
        if k >= 1 {
            let hit = if k == l {
                target == base
            } else {
                target >= least
            };
            if hit {
                let mut t = s.clone();
                for n in l..k {
                    t.blocks.push(vec![0; 2 * n as usize + 2]);
                }
                if k > l {
                    t.blocks.last_mut().expect("k > l")[0] += target - least;
                }
                return Some((k, t));
            }
        }
        target = target.saturating_add(block_sigma(&x.block(k as usize)));
        least = least.saturating_add(2 * k + 2);
    }
    None
}

/// A series nonzero only at the listed sorted indices.
fn sparse_series(description: String, points: Vec<(u64, Rational)>, end: u64) -> Series {
    let pts = Arc::new(points);
    Series::new(description, move |i| {
        match pts.binary_search_by_key(&i, |p| p.0) {
            Ok(j) => pts[j].1.clone(),
            Err(_) => Rational::zero(),
        }
    })
    .with_truncation(end)
}

/// Block boundaries `χ_n = σ(y↾n)` for `n <= n_max`.
pub fn covm_chi(y: &BairePoint, n_max: usize) -> Vec<u64> {
    let mut chi = vec![0u64];
    for n in 0..n_max {
        chi.push(chi[n] + block_sigma(&y.block(n)));
    }
    chi
}

/// `a_i = (−1)^k/(n+1)` at `i = χ_n + j_k` with `j_k = Σ_{i<k} (y_n(i)+1)`, for
/// blocks `n < n_max`.
pub fn covm_series_from_y(y: &BairePoint, n_max: usize) -> Series {
    let chi = covm_chi(y, n_max);
    let mut points = Vec::new();
    for n in 0..n_max {
        let mut pos = chi[n];
        for (k, &v) in y.block(n).iter().enumerate() {
            points.push((pos, Rational::unit(k % 2 == 1, n as u64 + 1)));
            pos += v + 1;
        }
    }
    sparse_series(
        format!("covm_from_y({},{n_max})", y.spec()),
        points,
        chi[n_max],
    )
}

/// `x_n(k) = |I_{N_n+k}| − 1` for `n < n_max`, where `I_l` runs between
/// consecutive switching points and `N_n = n(n+1)`.
pub fn covm_point_from_set(x: &IndexSet, n_max: usize, horizon: u64) -> Result<BairePoint> {
    x.require_infinite_coinfinite()?;
    let sp = switching_points(x, horizon);
    let needed = (n_max * (n_max + 1)) as u64 + 1;
    if (sp.len() as u64) < needed {
        return Err(ConstructionError::SwitchingPoints {
            found: sp.len() as u64,
            needed,
        });
    }
    let mut blocks = Vec::with_capacity(n_max);
    for n in 0..n_max {
        let first = n * (n + 1);
        blocks.push(
            (first..first + 2 * n + 2)
                .map(|l| sp[l + 1] - sp[l] - 1)
                .collect(),
        );
    }
    Ok(BairePoint { blocks })
}

/// An eventually periodic set whose runs have lengths `y_n(k)+1` in order for
/// `n < n_max`, so its point is `y` there with `χ_n` at the run starts.
///
/// The first run is a member run when `start_in`; past the listed runs
/// membership alternates, keeping the set infinite and coinfinite and forcing a
/// switch at `χ_{n_max}`.
pub fn covm_matched_set(y: &BairePoint, n_max: usize, start_in: bool) -> IndexSet {
    let mut prefix = Vec::new();
    let mut cur = start_in;
    for n in 0..n_max {
        for &v in y.block(n).iter() {
            prefix.extend(std::iter::repeat(cur).take(v as usize + 1));
            cur = !cur;
        }
    }
    // `cur` is now the opposite of the last run, so the cycle switches at once
    let e =
        crate::index_set::EventuallyPeriodic::new(prefix, vec![cur, !cur]).expect("nonempty cycle");
    IndexSet::periodic(e)
}

/// A placed block `I_{n,k}` with its points `i^0 < … < i^{2k−1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PlacedBlock {
    pub set: usize,
    pub k: u64,
    pub start: u64,
    pub end: u64,
    pub points: Vec<u64>,
}

#[derive(Debug, Clone)]
pub struct DiagonalDefeat {
    pub series: Series,
    pub blocks: Vec<PlacedBlock>,
}

/// Blocks `I_{n,k}` for `k = 1..=blocks_per_set`, placed left to right in the
/// order `(k, n)`. Each holds points `i^m` with `i^m ∈ X_n` iff `m` is even, where
/// `a = (−1)^m/k`, so `Σ_{X_n∩I_{n,k}} a = k·(1/k) = 1`.
pub fn diagonal_defeat(
    family: &[IndexSet],
    blocks_per_set: u64,
    horizon: u64,
) -> Result<DiagonalDefeat> {
    for x in family {
        x.require_infinite_coinfinite()?;
    }
    let compl: Vec<IndexSet> = family.iter().map(|x| x.complement()).collect();
    let mut cursor = 0u64;
    let mut blocks = Vec::new();
    let mut points = Vec::new();
    for k in 1..=blocks_per_set {
        for (n, x) in family.iter().enumerate() {
            let mut pts = Vec::with_capacity(2 * k as usize);
            for m in 0..2 * k {
                let src = if m % 2 == 0 { x } else { &compl[n] };
                match src.next_member(cursor, horizon) {
                    Some(i) => {
                        pts.push(i);
                        cursor = i + 1;
                    }
                    None => {
                        return Err(ConstructionError::Placement {
                            set: n,
                            k,
                            horizon,
                            trace: blocks,
                        });
                    }
                }
            }
            for (m, &i) in pts.iter().enumerate() {
                points.push((i, Rational::unit(m % 2 == 1, k)));
            }
            blocks.push(PlacedBlock {
                set: n,
                k,
                start: pts[0],
                end: cursor,
                points: pts,
            });
        }
    }
    let names: Vec<&str> = family.iter().map(|x| x.description()).collect();
    let d = format!(
        "diagonal_defeat([{}],{blocks_per_set},{horizon})",
        names.join(",")
    );
    Ok(DiagonalDefeat {
        series: sparse_series(d, points, cursor),
        blocks,
    })
}

/// Switching points in closed form for eventually periodic sets.
struct PeriodicRuns {
    head: Vec<u64>,
    base: u64,
    period: u64,
    offsets: Vec<u64>,
}

impl PeriodicRuns {
    fn new(x: &IndexSet) -> Option<Self> {
        let e = x.as_periodic()?;
        let base = (e.prefix().len() + e.cycle().len()) as u64;
        let period = e.cycle().len() as u64;
        let head = switching_points(x, base);
        let offsets: Vec<u64> = (0..period)
            .filter(|&j| x.contains(base + j - 1) != x.contains(base + j))
            .collect();
        if offsets.is_empty() {
            return None;
        }
        Some(PeriodicRuns {
            head,
            base,
            period,
            offsets,
        })
    }

    fn point(&self, n: u64) -> u64 {
        if let Some(&p) = self.head.get(n as usize) {
            return p;
        }
        let m = n - self.head.len() as u64;
        let per = self.offsets.len() as u64;
        (m / per)
            .checked_mul(self.period)
            .and_then(|q| q.checked_add(self.base + self.offsets[(m % per) as usize]))
            .unwrap_or(u64::MAX)
    }
}

/// The maximal runs of `X` as an interval partition.
///
/// Eventually periodic sets get every run; other sets get the runs closed below
/// `horizon`, followed by filler.
pub fn run_partition(x: &IndexSet, horizon: u64) -> Result<IntervalPartition> {
    x.require_infinite_coinfinite()?;
    if let Some(runs) = PeriodicRuns::new(x) {
        let d = format!("runs({})", x.description());
        return Ok(IntervalPartition::from_rule(
            d,
            Arc::new(move |n| runs.point(n)),
            8,
        )?);
    }
    let sp = switching_points(x, horizon);
    if sp.len() < 2 {
        return Err(ConstructionError::SwitchingPoints {
            found: sp.len() as u64,
            needed: 2,
        });
    }
    Ok(IntervalPartition::from_boundaries(sp)?
        .with_description(format!("runs({})", x.description())))
}

/// `a_i = (−1)^n/(|I_n|·(n+1))` on the `n`-th maximal run `I_n` of `X`.
///
/// Block sums are `(−1)^n/(n+1)`. An interval sum from inside `I_n` is a partial
/// block of the sign of `I_n`, then an alternating stretch led by `1/(n+2)`, then a
/// partial block, so its magnitude stays below `2/(n+1)`.
pub fn split_witness_series(x: &IndexSet, horizon: u64) -> Result<Series> {
    let runs = run_partition(x, horizon)?;
    let closed = runs.genuine_len();
    let end = runs.genuine_end();
    let p = runs.clone();
    let mut s = Series::new(
        format!("split_witness({},{horizon})", x.description()),
        move |i| {
            let n = p.block_of(i);
            if closed.is_some_and(|l| n >= l) {
                return Rational::zero();
            }
            let (a, b) = p.interval(n);
            Rational::from_i128(
                if n % 2 == 0 { 1 } else { -1 },
                (b - a) as u128 * (n as u128 + 1),
            )
        },
    );
    let start_of = move |p: &IntervalPartition, n: u64| match closed {
        Some(l) if n >= l => p.boundary(l),
        _ => p.boundary(n),
    };
    let (p1, p2) = (runs.clone(), runs);
    s = s
        .with_convergence(move |eps| {
            // 2/(n+1) <= ε from n = ⌈2/ε⌉ − 1 on
            let n = floor_recip(&(eps / &Rational::from_integer(2)));
            let n = if (&Rational::from(n) * eps) == Rational::from_integer(2) {
                n - 1
            } else {
                n
            };
            start_of(&p1, n)
        })
        .with_decay(move |n| start_of(&p2, (n + 1).saturating_mul(n + 1) - 1))
        .with_class(SeriesClass::Cc);
    if closed.is_some() {
        s = s.with_truncation(end);
    }
    Ok(s)
}

fn abs_bounds(b: Bounds) -> Bounds {
    if b.lo >= 0 {
        b
    } else if b.hi <= 0 {
        b.neg()
    } else {
        Bounds {
            lo: 0,
            hi: b.hi.max(-b.lo),
        }
    }
}

/// Greedy intervals with `Σ_{I_n} |a_i| >= 1` and `min(I_n) >= f_a(1/(n+1)²)` for
/// `1 <= n <= n_max`, where `f_a` is the convergence modulus; `n_max` genuine
/// intervals followed by filler.
pub fn d_bound_partition(a: &Series, n_max: u64, horizon: u64) -> Result<IntervalPartition> {
    let bounds = d_bound_boundaries(a, Some(n_max), horizon)?;
    Ok(IntervalPartition::from_boundaries(bounds)?
        .with_description(format!("d_bound({},{n_max},{horizon})", a.description())))
}

/// As [`d_bound_partition`], keeping every interval that closes below `horizon`.
pub fn d_bound_partition_below(a: &Series, horizon: u64) -> Result<IntervalPartition> {
    let bounds = d_bound_boundaries(a, None, horizon)?;
    Ok(IntervalPartition::from_boundaries(bounds)?
        .with_description(format!("d_bound({},{horizon})", a.description())))
}

fn d_bound_boundaries(a: &Series, n_max: Option<u64>, horizon: u64) -> Result<Vec<u64>> {
    if a.certificates().convergence.is_none() {
        return Err(ConstructionError::MissingConvergence(
            a.description().to_string(),
        ));
    }
    let one: i128 = 1 << FRAC_BITS;
    const CHUNK: usize = 4096;
    let mut buf = vec![Bounds::ZERO; CHUNK];
    let mut bounds = vec![0u64];
    for n in 0..n_max.unwrap_or(u64::MAX) {
        let start = bounds[n as usize];
        let eps = Rational::from_i128(1, (n as u128 + 2) * (n as u128 + 2));
        let next_min = a
            .convergence_modulus(&eps)
            .expect("checked above")
            .max(start + 1);
        let mut acc = Bounds::ZERO;
        let mut i = start;
        let end = loop {
            if i >= horizon {
                if n_max.is_none() {
                    return Ok(bounds);
                }
                return Err(ConstructionError::Stagnation { n, horizon });
            }
            let len = CHUNK.min((horizon - i) as usize);
            a.fill_bounds(i, &mut buf[..len])
                .map_err(|_| ClassifyError::Range)?;
            let mut found = None;
            for (j, b) in buf[..len].iter().enumerate() {
                acc = acc.add(abs_bounds(*b));
                let e = i + j as u64 + 1;
                if e < next_min || acc.hi < one {
                    continue;
                }
                let reached = acc.lo >= one || {
                    let mut s = ExactSum::new();
                    for t in start..e {
                        s.add(&a.term(t).abs());
                    }
                    s.value() >= Rational::one()
                };
                if reached {
                    found = Some(e);
                    break;
                }
            }
            if let Some(e) = found {
                break e;
            }
            i += len as u64;
        };
        bounds.push(end);
    }
    Ok(bounds)
}

/// `g(n) = max(D(n), 2n)` rounded up to even, for the decay modulus `D`; the
/// range lies in the evens, so it is coinfinite.
///
/// Monotonicity is checked for `n <= n_max`.
pub fn ac_decay_function(a: &Series, n_max: u64) -> Result<NatMap> {
    let decay = a
        .certificates()
        .decay
        .clone()
        .ok_or_else(|| ConstructionError::MissingDecay(a.description().to_string()))?;
    let g = move |n: u64| {
        let v = decay(n).max(n.saturating_mul(2));
        v.saturating_add(v % 2)
    };
    for n in 1..=n_max {
        if g(n) < g(n - 1) {
            return Err(ConstructionError::NotMonotone(n));
        }
    }
    Ok(NatMap::monotone(
        format!("ac_decay({})", a.description()),
        g,
    ))
}

/// `a_i = (−1)^i/n` on `[f(n), f(n+1))` for `1 <= n < n_max`; block 0 and
/// everything from `f(n_max)` on are zero.
///
/// Magnitudes never increase along the indices and signs alternate inside blocks,
/// so an interval sum from block `n >= 1` is at most `1/n` in magnitude.
pub fn ac_series_from_f(f: &NatMap, n_max: u64) -> Result<Series> {
    let b: Vec<u64> = (0..=n_max).map(|n| f.apply(n)).collect();
    if b[0] != 0 {
        return Err(ConstructionError::NotIncreasing(0));
    }
    if let Some(n) = b.windows(2).position(|w| w[0] >= w[1]) {
        return Err(ConstructionError::NotIncreasing(n as u64 + 1));
    }
    let b = Arc::new(b);
    let last = n_max as usize;
    let end = b[last];
    let bt = b.clone();
    let s = Series::new(
        format!("ac_from_f({},{n_max})", f.description()),
        move |i| {
            if i >= end {
                return Rational::zero();
            }
            let n = bt.partition_point(|&x| x <= i) as u64 - 1;
            if n == 0 {
                Rational::zero()
            } else {
                Rational::unit(i % 2 == 1, n)
            }
        },
    );
    let (b1, b2) = (b.clone(), b);
    Ok(
        s.with_convergence(move |eps| b1[(floor_recip(eps).saturating_add(1) as usize).min(last)])
            .with_decay(move |n| b2[((n + 1).saturating_mul(n + 1) as usize).min(last)])
            .with_class(SeriesClass::Cc)
            .with_truncation(end),
    )
}

/// Crossing indices `k_0 < k_1 < …` with `g(k_n) <= f(k_n)` and `k_{n+1} > 2k_n`,
/// chosen greedily below `limit`, with `g(k_0) >= f(1)` so that every `g(i)` with
/// `i >= k_0` lies past the zero block.
pub fn ac_crossings(f: &NatMap, g: &NatMap, limit: u64) -> Vec<u64> {
    let f1 = f.apply(1);
    let mut out: Vec<u64> = Vec::new();
    let mut k = 1u64;
    while k < limit {
        let gk = g.apply(k);
        if gk <= f.apply(k) && (!out.is_empty() || gk >= f1) {
            out.push(k);
            k = 2 * k + 1;
        } else {
            k += 1;
        }
    }
    out
}

/// `Σ_{i∈[k_n,k_{n+1})} |a_{g(i)}|` for consecutive crossings.
pub fn ac_block_sums(a: &Series, g: &NatMap, crossings: &[u64]) -> Vec<Rational> {
    crossings
        .windows(2)
        .map(|w| {
            let mut s = ExactSum::new();
            for i in w[0]..w[1] {
                s.add(&a.term(g.apply(i)).abs());
            }
            s.value()
        })
        .collect()
}

pub fn range_set(f: &NatMap) -> Result<IndexSet> {
    Ok(IndexSet::range_of(f)?)
}

/// The increasing enumeration `n ↦ x_n` of a certified infinite set.
pub fn increasing_bijection(x: &IndexSet) -> Result<NatMap> {
    x.require_infinite()?;
    let xs = x.clone();
    Ok(NatMap::monotone(
        format!("enum({})", x.description()),
        move |n| xs.select(n).expect("certified infinite"),
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GreedyAdjustment {
    /// indices in the order they were added
    pub picks: Vec<u64>,
    pub sum: Rational,
}

/// A finite `x` with `Σ_x a ∈ (lo, hi)`, by the rearrangement greedy: unused
/// positive terms while the sum is `<= lo`, unused negative terms while it is
/// `>= hi`.
///
/// When no term of the opposite sign is left below `scan_bound`, a term that
/// would carry the sum across the whole target is skipped instead.
pub fn greedy_finite_adjust(
    a: &Series,
    lo: &Rational,
    hi: &Rational,
    scan_bound: u64,
) -> Result<GreedyAdjustment> {
    if lo >= hi {
        return Err(ConstructionError::EmptyTarget);
    }
    let mut used = std::collections::BTreeSet::new();
    let first_unused = |from: u64, want: i32, used: &std::collections::BTreeSet<u64>| {
        (from..scan_bound).find(|&i| !used.contains(&i) && a.term(i).signum() == want)
    };
    let mut sum = Rational::zero();
    let mut picks = Vec::new();
    // every term of sign [+, −] below ptr is used
    let mut ptr = [0u64; 2];
    loop {
        let (side, want) = if sum <= *lo {
            (0, 1)
        } else if sum >= *hi {
            (1, -1)
        } else {
            return Ok(GreedyAdjustment { picks, sum });
        };
        let other_left = first_unused(ptr[1 - side], -want, &used).is_some();
        let mut from = ptr[side];
        let chosen = loop {
            let Some(i) = first_unused(from, want, &used) else {
                return Err(ConstructionError::GreedyExhausted {
                    bound: scan_bound,
                    picks,
                    sum,
                });
            };
            let s = &sum + &a.term(i);
            let crosses = if want == 1 { s >= *hi } else { s <= *lo };
            if other_left || !crosses {
                sum = s;
                break i;
            }
            from = i + 1;
        };
        used.insert(chosen);
        picks.push(chosen);
        if chosen == ptr[side] || first_unused(ptr[side], want, &used).map_or(true, |f| f > chosen)
        {
            ptr[side] = chosen + 1;
        }
    }
}

/// `X_i = ω ∖ {3k+i}` for `i < 3`.
pub fn ssn_n_triple() -> [IndexSet; 3] {
    [0, 1, 2].map(|i| {
        IndexSet::modulo(3, i)
            .expect("valid")
            .complement()
            .with_description(format!("compl(mod(3,{i}))"))
    })
}

/// Signed escapes of `a` along each `X_j` of [`ssn_n_triple`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TripleReport {
    pub level: Rational,
    pub horizon: u64,
    pub escapes: Vec<SignedEscape>,
    /// the first `j` along which both signed sums passed the level
    pub surviving: Option<usize>,
}

pub fn ssn_triple_test(a: &Series, horizon: u64, level: &Rational) -> Result<TripleReport> {
    let mut escapes = Vec::with_capacity(3);
    for x in ssn_n_triple() {
        escapes.push(signed_escape(a, &x, horizon, level)?);
    }
    let surviving = escapes.iter().position(|e| e.escaped);
    Ok(TripleReport {
        level: level.clone(),
        horizon,
        escapes,
        surviving,
    })
}

/// `(−1)^m/(m+1)` at the `m`-th member of `A`, zero elsewhere.
///
/// Partial sums over ω stay in `[0, 1]`, and an interval sum starting at `N` is
/// at most `1/(rank(N)+1)` in magnitude.
pub fn alternating_on(a: &IndexSet) -> Result<Series> {
    a.require_infinite()?;
    let (x1, x2, x3, x4) = (a.clone(), a.clone(), a.clone(), a.clone());
    Ok(
        Series::new(format!("alternating_on({})", a.description()), move |i| {
            if x1.contains(i) {
                let m = x1.rank(i);
                Rational::unit(m % 2 == 1, m + 1)
            } else {
                Rational::zero()
            }
        })
        .with_enclosures(move |start, out| {
            let mut m = x2.rank(start);
            let mut w = ReciprocalWalk::new(m + 1);
            for (b, inside) in out.iter_mut().zip(x2.cursor(start)) {
                if inside {
                    *b = if m % 2 == 1 {
                        w.bounds().neg()
                    } else {
                        w.bounds()
                    };
                    m += 1;
                    w.advance();
                } else {
                    *b = Bounds::ZERO;
                }
            }
            Ok(())
        })
        .with_convergence(move |eps| x3.select(floor_recip(eps)).expect("certified infinite"))
        .with_decay(move |n| {
            x4.select((n + 1).saturating_mul(n + 1) - 1)
                .expect("certified infinite")
        })
        .with_class(SeriesClass::Cc),
    )
}

/// Interleaved picks `p_0 < q_0 < p_1 < q_1 < …` with `p_m ∈ A`, `q_m ∈ B`,
/// carrying `+1/(m+1)` and `−1/(m+1)`, listed below `horizon`.
pub fn alternating_on_two(a: &IndexSet, b: &IndexSet, horizon: u64) -> Result<Series> {
    a.require_infinite()?;
    b.require_infinite()?;
    if let Some(i) = (0..horizon).find(|&i| a.contains(i) && b.contains(i)) {
        return Err(ConstructionError::NotDisjoint(i));
    }
    let d = format!(
        "alternating_on_two({},{},{horizon})",
        a.description(),
        b.description()
    );
    Ok(interleaved(d, a, b, horizon))
}

fn interleaved(description: String, a: &IndexSet, b: &IndexSet, horizon: u64) -> Series {
    let mut points = Vec::new();
    let mut from = 0u64;
    let mut end = 0u64;
    'outer: for m in 0.. {
        for (set, neg) in [(a, false), (b, true)] {
            match set.next_member(from, horizon) {
                Some(i) => {
                    points.push((i, Rational::unit(neg, m + 1)));
                    from = i + 1;
                }
                None => break 'outer,
            }
        }
        // only completed pairs are kept
        end = from;
    }
    if points.len() % 2 == 1 {
        points.pop();
    }
    let pos: Arc<Vec<u64>> = Arc::new(points.iter().map(|p| p.0).collect());
    let (p1, p2) = (pos.clone(), pos);
    let at = move |p: &[u64], j: u64| p.get(j as usize).copied().unwrap_or(end);
    sparse_series(description, points, end)
        // the magnitude of pick j is 1/(⌊j/2⌋+1)
        .with_convergence(move |eps| at(&p1, floor_recip(eps).saturating_mul(2)))
        .with_decay(move |n| at(&p2, ((n + 1).saturating_mul(n + 1) - 1).saturating_mul(2)))
        .with_class(SeriesClass::Cc)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DefeatCase {
    /// `Z = ω ∖ (X_0 ∪ X_1)` is large
    Outside,
    /// `X_0 ∖ X_1` and `X_1 ∖ X_0` are both large
    Differences,
}

#[derive(Debug, Clone)]
pub struct TwoSetDefeat {
    pub case: DefeatCase,
    pub series: Series,
}

/// A convergent series neither of whose sign halves diverges along both `X_0` and
/// `X_1`.
///
/// With `Z` large the series alternates along `Z`, so `P_a ⊆ Z` misses both sets.
/// Otherwise it interleaves positive picks from `X_0 ∖ X_1` with negative picks
/// from `X_1 ∖ X_0`. Sets without certificates are used below `horizon` only.
pub fn two_set_defeat(
    x0: &IndexSet,
    x1: &IndexSet,
    horizon: u64,
    threshold: u64,
) -> Result<TwoSetDefeat> {
    let z = x0.union(x1).complement();
    let z0 = x0.difference(x1);
    let z1 = x1.difference(x0);
    let count = |s: &IndexSet| s.rank(horizon);
    let (nz, n0, n1) = (count(&z), count(&z0), count(&z1));
    let d = format!(
        "two_set_defeat({},{},{horizon})",
        x0.description(),
        x1.description()
    );
    if nz >= threshold {
        let series = if z.cert_infinite() {
            alternating_on(&z)?
        } else {
            let members: Vec<(u64, Rational)> = z
                .members_below(horizon)
                .enumerate()
                .map(|(m, i)| (i, Rational::unit(m % 2 == 1, m as u64 + 1)))
                .collect();
            sparse_series(String::new(), members, horizon)
        };
        return Ok(TwoSetDefeat {
            case: DefeatCase::Outside,
            series: series.with_description(d),
        });
    }
    if n0 >= threshold && n1 >= threshold {
        return Ok(TwoSetDefeat {
            case: DefeatCase::Differences,
            series: interleaved(d, &z0, &z1, horizon),
        });
    }
    Err(ConstructionError::Dichotomy {
        horizon,
        z: nz,
        z0: n0,
        z1: n1,
    })
}

/// The partition `J` of an oscillation extraction, with the extraction itself.
#[derive(Debug, Clone)]
pub struct OscPartition {
    pub partition: IntervalPartition,
    pub orientation: Orientation,
    pub extraction: Extraction,
}

/// `J_n = [min K_n, min K_{n+1})` for `count + 1` extracted intervals `K_n`, with
/// `[0, min K_0)` prepended when `K_0` starts later.
pub fn osc_f_map(
    a: &Series,
    x: &IndexSet,
    cfg: &DiagnosticsConfig,
    count: u64,
) -> Result<OscPartition> {
    let ex = extract_oscillation_intervals(a, x, cfg, &ExtractOptions::new(count + 1))?;
    let mut bounds = vec![0u64];
    bounds.extend(ex.intervals.iter().map(|k| k.start).filter(|&s| s > 0));
    let partition = IntervalPartition::from_boundaries(bounds)?.with_description(format!(
        "osc_f({},{},{count})",
        a.description(),
        x.description()
    ));
    Ok(OscPartition {
        partition,
        orientation: ex.orientation,
        extraction: ex,
    })
}

/// `{k : ∃n J_n ⊆ I_k}` over the genuine `I_k` ending by `horizon`.
pub fn osc_g_map(j: &IntervalPartition, i: &IntervalPartition, horizon: u64) -> IndexSet {
    let ks: Vec<u64> = i
        .genuine_intervals_below(horizon)
        .filter(|&(_, s, e)| contains_some_interval(j, s, e))
        .map(|(k, _, _)| k)
        .collect();
    IndexSet::finite(ks).with_description(format!(
        "osc_g({},{},{horizon})",
        j.description(),
        i.description()
    ))
}

/// `(∪_{k∈S} I_k ∩ X) ∪ (∪_{k∉S} I_k ∖ X)`: `i` is a member iff `X(i) = S(k)` for
/// the block `k` of `i`.
pub fn compose_response(x: &IndexSet, i: &IntervalPartition, s: &IndexSet) -> IndexSet {
    let d = format!(
        "compose({},{},{})",
        x.description(),
        i.description(),
        s.description()
    );
    let (xs, p, ss) = (x.clone(), i.clone(), s.clone());
    IndexSet::predicate(d, move |n| xs.contains(n) == ss.contains(p.block_of(n)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::classify::{classify, VerdictKind};
    use crate::series::SeriesClass;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    fn stem(blocks: &[&[u64]]) -> BaireStem {
        BaireStem::new(blocks.iter().map(|b| b.to_vec()).collect()).unwrap()
    }

    #[test]
    fn stems_check_block_lengths() {
        assert!(BaireStem::new(vec![vec![0, 0], vec![1]]).is_err());
        assert_eq!(
            BairePoint::new(vec![vec![0]]),
            Err(ConstructionError::BlockLength { n: 0, len: 1 })
        );
    }

    #[test]
    fn sigma_examples() {
        assert_eq!(covm_sigma(&BaireStem::empty()), 0);
        assert_eq!(covm_sigma(&stem(&[&[0, 0]])), 2);
        assert_eq!(covm_sigma(&stem(&[&[0, 0], &[1, 0, 2, 0]])), 9);
    }

    #[test]
    fn suitable_search_smallest_extension() {
        let x = BairePoint::new(vec![vec![0, 0]]).unwrap();
        let (k, t) = covm_suitable_search(&BaireStem::empty(), &x, 10).unwrap();
        assert_eq!((k, t.clone()), (1, stem(&[&[0, 0]])));
        assert_eq!(covm_sigma(&t), 2);
    }

    #[test]
    fn suitable_search_needs_nonzero_blocks() {
        let s = stem(&[&[5, 0]]);
        // all-zero x never catches up: σ(x↾k) = k(k+1) against at least k(k+1)+5
        assert_eq!(covm_suitable_search(&s, &BairePoint::default(), 200), None);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let x = BairePoint::random(&mut rng, 12, 4);
        let (k, t) = covm_suitable_search(&s, &x, 12).unwrap();
        assert!(t.extends(&s) && t.len() as u64 == k);
        assert_eq!(covm_sigma(&t), covm_sigma(&x.restrict(k as usize)));
    }

    #[test]
    fn suitable_search_on_own_prefix() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let x = BairePoint::random(&mut rng, 6, 3);
        let s = x.restrict(4);
        assert_eq!(covm_suitable_search(&s, &x, 10), Some((4, s)));
    }

    #[test]
    fn covm_series_examples() {
        let y = BairePoint::new(vec![vec![0, 0], vec![0, 0, 0, 0]]).unwrap();
        let a = covm_series_from_y(&y, 2);
        assert_eq!(a.term(0), r(1, 1));
        assert_eq!(a.term(1), r(-1, 1));
        let block1: Vec<Rational> = (2..6).map(|i| a.term(i)).collect();
        assert_eq!(block1, vec![r(1, 2), r(-1, 2), r(1, 2), r(-1, 2)]);
        assert_eq!(a.truncated_at(), Some(6));
        let y = BairePoint::new(vec![vec![2, 1]]).unwrap();
        let a = covm_series_from_y(&y, 1);
        let terms: Vec<Rational> = (0..6).map(|i| a.term(i)).collect();
        assert_eq!(
            terms,
            vec![r(1, 1), r(0, 1), r(0, 1), r(-1, 1), r(0, 1), r(0, 1)]
        );
    }

    #[test]
    fn covm_point_examples() {
        let x = covm_point_from_set(&IndexSet::evens(), 4, 100).unwrap();
        assert!((0..4).all(|n| x.block(n).iter().all(|&v| v == 0)));
        let x = covm_point_from_set(&IndexSet::periodic_bits("", "1100").unwrap(), 4, 100).unwrap();
        assert!((0..4).all(|n| x.block(n).iter().all(|&v| v == 1)));
        // block 3 reads I_12..I_19: N_3 = 12 and 2·3+2 = 8 intervals
        let p = IndexSet::periodic_bits("", "100").unwrap();
        let sp = switching_points(&p, 200);
        let x = covm_point_from_set(&p, 4, 200).unwrap();
        let want: Vec<u64> = (12..20).map(|l| sp[l + 1] - sp[l] - 1).collect();
        assert_eq!(x.block(3).to_vec(), want);
        assert!(matches!(
            covm_point_from_set(&IndexSet::evens(), 4, 10),
            Err(ConstructionError::SwitchingPoints { needed: 21, .. })
        ));
    }

    #[test]
    fn covm_matched_set_reproduces_point() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for seed_in in [true, false] {
            let y = BairePoint::random(&mut rng, 5, 3);
            let x = covm_matched_set(&y, 5, seed_in);
            let back = covm_point_from_set(&x, 5, 10_000).unwrap();
            assert_eq!(back.restrict(5), y.restrict(5));
            let a = covm_series_from_y(&y, 5);
            let chi = covm_chi(&y, 5);
            for n in 0..5 {
                let mut s = ExactSum::new();
                for i in x.members_below(chi[n + 1]).filter(|&i| i >= chi[n]) {
                    s.add(&a.term(i));
                }
                assert_eq!(s.value().abs(), Rational::one());
            }
        }
    }

    #[test]
    fn diagonal_defeat_examples() {
        let d = diagonal_defeat(&[IndexSet::evens()], 1, 100).unwrap();
        let b = &d.blocks[0];
        assert_eq!(b.points, vec![0, 1]);
        assert_eq!((d.series.term(0), d.series.term(1)), (r(1, 1), r(-1, 1)));
        let d = diagonal_defeat(&[IndexSet::evens(), IndexSet::odds()], 2, 1000).unwrap();
        assert_eq!(d.blocks.len(), 4);
        for w in d.blocks.windows(2) {
            assert!(w[0].end <= w[1].start);
        }
        let fam = [IndexSet::evens(), IndexSet::odds()];
        for b in &d.blocks {
            let mut s = ExactSum::new();
            for &i in &b.points {
                if fam[b.set].contains(i) {
                    s.add(&d.series.term(i));
                }
            }
            assert_eq!(s.value(), Rational::one());
        }
        let z = diagonal_defeat(&[], 5, 100).unwrap();
        assert!((0..100).all(|i| z.series.term(i).is_zero()));
    }

    #[test]
    fn diagonal_defeat_reports_placement() {
        let sparse = IndexSet::modulo(50, 0).unwrap();
        match diagonal_defeat(&[sparse], 3, 90) {
            Err(ConstructionError::Placement {
                set: 0,
                k: 2,
                trace,
                ..
            }) => assert_eq!(trace.len(), 1),
            other => panic!("unexpected {other:?}"),
        }
        let fin = IndexSet::finite([1, 2]);
        assert!(matches!(
            diagonal_defeat(&[fin], 1, 10),
            Err(ConstructionError::Set(_))
        ));
    }

    #[test]
    fn diagonal_defeat_oscillates_on_own_set() {
        let d = diagonal_defeat(&[IndexSet::evens(), IndexSet::odds()], 200, 1_000_000).unwrap();
        let cfg = DiagnosticsConfig::default().with_horizon(d.series.truncated_at().unwrap());
        let v = classify(&d.series, &IndexSet::evens(), &cfg).unwrap();
        assert_eq!(v.kind, VerdictKind::Oscillates);
        let (lo, hi) = (v.evidence.tail_min, v.evidence.tail_max);
        assert!(&hi - &lo >= Rational::one() - r(1, 1000));
    }

    #[test]
    fn split_witness_examples() {
        let x = IndexSet::periodic_bits("", "1100").unwrap();
        let a = split_witness_series(&x, 1000).unwrap();
        let t: Vec<Rational> = (0..4).map(|i| a.term(i)).collect();
        assert_eq!(t, vec![r(1, 2), r(1, 2), r(-1, 4), r(-1, 4)]);
        for n in 0..50u64 {
            assert_eq!(
                a.range_sum(2 * n, 2 * n + 2),
                Rational::unit(n % 2 == 1, n + 1)
            );
        }
        let e = split_witness_series(&IndexSet::evens(), 1000).unwrap();
        let ah = Series::alternating_harmonic();
        assert!((0..500).all(|i| e.term(i) == ah.term(i)));
        assert_eq!(e.truncated_at(), None);
        assert_eq!(e.declared_class(), SeriesClass::Cc);
    }

    #[test]
    fn split_witness_on_predicate_sets_is_truncated() {
        let x = IndexSet::predicate("squares_runs", |i| (i as f64).sqrt() as u64 % 2 == 0)
            .assert_certificates(true, true);
        let a = split_witness_series(&x, 100).unwrap();
        let end = a.truncated_at().unwrap();
        assert!(end <= 100 && (end..200).all(|i| a.term(i).is_zero()));
        let fin = IndexSet::finite([0, 1]);
        assert!(split_witness_series(&fin, 100).is_err());
    }

    #[test]
    fn split_witness_modulus_bounds_interval_sums() {
        let x = IndexSet::periodic_bits("1", "110100").unwrap();
        let a = split_witness_series(&x, 0).unwrap();
        for eps in [r(1, 2), r(1, 5), r(1, 10)] {
            let n = a.convergence_modulus(&eps).unwrap();
            for s in n..n + 40 {
                for e in s + 1..s + 60 {
                    assert!(a.range_sum(s, e).abs() < eps, "{eps} from {s} to {e}");
                }
            }
        }
        for n in 0..6u64 {
            let m = a.decay_modulus(n).unwrap();
            let bound = Rational::from_i128(1, (n as u128 + 1).pow(2));
            assert!((m..m + 300).all(|i| a.term(i).abs() <= bound));
        }
    }

    #[test]
    fn d_bound_greedy_trace() {
        let ah = Series::alternating_harmonic();
        let p = d_bound_partition(&ah, 3, 10_000).unwrap();
        assert_eq!(p.interval(0), (0, 4));
        // 1/5 + … + 1/12 already exceeds 1
        assert_eq!(p.interval(1), (4, 12));
        assert!(p.boundary(2) >= 9);
        for n in 0..3 {
            let (s, e) = p.interval(n);
            let abs: Rational = (s..e).map(|i| ah.term(i).abs()).sum();
            assert!(abs >= Rational::one());
        }
        // doubling the terms doubles the certified start constraint as well
        let scaled = d_bound_partition(&ah.scale(&r(2, 1)).unwrap(), 3, 10_000).unwrap();
        assert_eq!(scaled.interval(0), (0, 8));
    }

    #[test]
    fn d_bound_errors() {
        let bare = Series::new("bare", |_| Rational::one());
        let e = d_bound_partition(&bare, 2, 100).unwrap_err();
        assert!(e.to_string().contains("requires convergence modulus"));
        let fin = diagonal_defeat(&[IndexSet::evens()], 1, 10)
            .unwrap()
            .series
            .with_convergence(|_| 0);
        assert!(matches!(
            d_bound_partition(&fin, 3, 500),
            Err(ConstructionError::Stagnation { .. })
        ));
    }

    #[test]
    fn ac_decay_examples() {
        let g = ac_decay_function(&Series::alternating_harmonic(), 20).unwrap();
        assert_eq!(g.apply(1), 4);
        let b = ac_decay_function(&Series::basel(), 20).unwrap();
        assert_eq!(b.apply(5), 10);
        assert!((0..100).all(|n| g.apply(n) % 2 == 0 && g.apply(n) <= g.apply(n + 1)));
        let bare = Series::new("bare", |_| Rational::zero());
        assert!(matches!(
            ac_decay_function(&bare, 3),
            Err(ConstructionError::MissingDecay(_))
        ));
    }

    #[test]
    fn ac_series_examples() {
        let f = NatMap::monotone("pow2", |n| (1u64 << n) - 1);
        let a = ac_series_from_f(&f, 10).unwrap();
        assert!(a.term(0).is_zero());
        assert_eq!((a.term(1), a.term(2)), (r(-1, 1), r(1, 1)));
        let b: Vec<Rational> = (3..7).map(|i| a.term(i)).collect();
        assert_eq!(b, vec![r(-1, 2), r(1, 2), r(-1, 2), r(1, 2)]);
        let bad = NatMap::new("flat", |n| n / 2);
        assert!(matches!(
            ac_series_from_f(&bad, 4),
            Err(ConstructionError::NotIncreasing(_))
        ));
        for eps in [r(1, 1), r(1, 3), r(2, 7)] {
            let n = a.convergence_modulus(&eps).unwrap();
            for s in n..n + 30 {
                for e in s + 1..s + 40 {
                    assert!(a.range_sum(s, e).abs() < eps);
                }
            }
        }
    }

    #[test]
    fn ac_lower_bound_on_an_instance() {
        let f = NatMap::monotone("sq", |n| n * n);
        let a = ac_series_from_f(&f, 200).unwrap();
        let g = increasing_bijection(&IndexSet::modulo(3, 1).unwrap()).unwrap();
        let ks = ac_crossings(&f, &g, 200);
        assert!(ks.len() >= 3);
        for s in ac_block_sums(&a, &g, &ks) {
            assert!(s >= r(1, 2), "{s}");
        }
    }

    #[test]
    fn bijection_and_range() {
        let e = increasing_bijection(&IndexSet::evens()).unwrap();
        assert!((0..50).all(|n| e.apply(n) == 2 * n));
        assert_eq!(increasing_bijection(&IndexSet::odds()).unwrap().apply(3), 7);
        let r2 = range_set(&NatMap::linear(2, 0)).unwrap();
        assert!((0..100).all(|i| r2.contains(i) == (i % 2 == 0)));
        assert!(increasing_bijection(&IndexSet::finite([1, 5])).is_err());
    }

    #[test]
    fn greedy_examples() {
        let ah = Series::alternating_harmonic();
        let g = greedy_finite_adjust(&ah, &r(1, 3), &r(1, 2), 1000).unwrap();
        assert_eq!(g.picks, vec![0, 1, 3, 2, 5]);
        assert_eq!(g.sum, r(5, 12));
        let z = greedy_finite_adjust(&ah, &r(-1, 2), &r(1, 2), 1000).unwrap();
        assert!(z.picks.is_empty());
        let flipped = ah.flip_signs_on(&IndexSet::evens());
        let f = greedy_finite_adjust(&flipped, &r(-3, 2), &r(-1, 1), 1000).unwrap();
        assert!(f.sum > r(-3, 2) && f.sum < r(-1, 1));
        assert!(f.picks.iter().all(|&i| flipped.term(i).is_negative()));
        let exact: Rational = f.picks.iter().map(|&i| flipped.term(i)).sum();
        assert_eq!(exact, f.sum);
    }

    #[test]
    fn greedy_reports_exhaustion() {
        let ah = Series::alternating_harmonic();
        assert!(matches!(
            greedy_finite_adjust(&ah, &r(5, 1), &r(6, 1), 100),
            Err(ConstructionError::GreedyExhausted { bound: 100, .. })
        ));
        assert_eq!(
            greedy_finite_adjust(&ah, &r(1, 2), &r(1, 2), 100),
            Err(ConstructionError::EmptyTarget)
        );
    }

    #[test]
    fn ssn_triple_examples() {
        let [x0, x1, x2] = ssn_n_triple();
        assert!(!x0.contains(0) && !x0.contains(3) && x0.contains(1));
        assert!(!x1.contains(1) && !x1.contains(4) && x1.contains(0));
        for x in [&x0, &x1, &x2] {
            assert!(x.cert_infinite() && x.cert_coinfinite());
            assert_eq!(x.rank(300), 200);
        }
    }

    #[test]
    fn two_set_defeat_cases() {
        let d = two_set_defeat(&IndexSet::evens(), &IndexSet::odds(), 1000, 10).unwrap();
        assert_eq!(d.case, DefeatCase::Differences);
        assert_eq!(d.series.term(0), Rational::one());
        assert_eq!(d.series.term(1), -Rational::one());
        let negatives_in_x0 = IndexSet::evens()
            .members_below(1000)
            .filter(|&i| d.series.term(i).is_negative())
            .count();
        assert_eq!(negatives_in_x0, 0);
        let d = two_set_defeat(&IndexSet::evens(), &IndexSet::evens(), 1000, 10).unwrap();
        assert_eq!(d.case, DefeatCase::Outside);
        assert_eq!(
            (d.series.term(1), d.series.term(3), d.series.term(0)),
            (r(1, 1), r(-1, 2), r(0, 1))
        );
        let omega = IndexSet::omega();
        assert!(matches!(
            two_set_defeat(&omega, &omega, 1000, 10),
            Err(ConstructionError::Dichotomy { .. })
        ));
    }

    #[test]
    fn alternating_examples() {
        let a = alternating_on(&IndexSet::odds()).unwrap();
        assert_eq!(
            (a.term(1), a.term(3), a.term(5), a.term(2)),
            (r(1, 1), r(-1, 2), r(1, 3), r(0, 1))
        );
        let mut s = Rational::zero();
        for i in 0..200 {
            s += a.term(i);
            assert!(s >= Rational::zero() && s <= Rational::one());
        }
        let mut buf = vec![Bounds::ZERO; 300];
        a.fill_bounds(17, &mut buf).unwrap();
        for (j, b) in buf.iter().enumerate() {
            assert_eq!(*b, Bounds::of(&a.term(17 + j as u64)).unwrap());
        }
        let m3 = IndexSet::modulo(3, 0)
            .unwrap()
            .difference(&IndexSet::finite([0]))
            .assert_certificates(true, true);
        let ev = IndexSet::evens().difference(&IndexSet::modulo(3, 0).unwrap());
        let two = alternating_on_two(&m3, &ev, 100).unwrap();
        assert_eq!((two.term(3), two.term(4)), (r(1, 1), r(-1, 1)));
        assert!((0..3).all(|i| two.term(i).is_zero()));
        assert!(matches!(
            alternating_on_two(&IndexSet::evens(), &IndexSet::modulo(4, 0).unwrap(), 10),
            Err(ConstructionError::NotDisjoint(0))
        ));
    }

    #[test]
    fn osc_maps() {
        let ah = Series::alternating_harmonic();
        let cfg = DiagnosticsConfig::default().with_horizon(1_000_000);
        let f = osc_f_map(&ah, &IndexSet::evens(), &cfg, 2).unwrap();
        let starts: Vec<u64> = f.extraction.intervals.iter().map(|k| k.start).collect();
        assert_eq!(f.partition.boundary(0), 0);
        for (n, s) in starts.iter().enumerate().filter(|(_, &s)| s > 0) {
            assert!((0..=3).any(|m| f.partition.boundary(m) == *s), "start {n}");
        }
        assert_eq!(f.orientation, Orientation::PosInX);
        let one = osc_f_map(&ah, &IndexSet::evens(), &cfg, 1).unwrap();
        let shifted = one.extraction.intervals[0].start > 0;
        assert_eq!(one.partition.genuine_len(), Some(1 + shifted as u64));

        let u3 = IntervalPartition::uniform(3).unwrap();
        let g = osc_g_map(&u3, &u3, 30);
        assert!((0..10).all(|k| g.contains(k)) && !g.contains(10));
        let g = osc_g_map(&IntervalPartition::singletons(), &u3, 30);
        assert_eq!(g.rank(100), 10);
        let g = osc_g_map(&IntervalPartition::uniform(10).unwrap(), &u3, 300);
        assert_eq!(g.rank(1000), 0);
    }

    #[test]
    fn compose_examples() {
        let x = IndexSet::evens();
        let single = IntervalPartition::singletons();
        let all = compose_response(&x, &single, &IndexSet::omega());
        assert!((0..50).all(|i| all.contains(i) == x.contains(i)));
        let none = compose_response(&x, &single, &IndexSet::empty());
        assert!((0..50).all(|i| none.contains(i) != x.contains(i)));
        let pairs = compose_response(
            &x,
            &IntervalPartition::uniform(2).unwrap(),
            &IndexSet::evens(),
        );
        let got: Vec<u64> = (0..10).filter(|&i| pairs.contains(i)).collect();
        assert_eq!(got, vec![0, 3, 4, 7, 8]);
    }
}
