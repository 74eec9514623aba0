//! Lazy rational series with analytic certificates.

use std::fmt;
use std::sync::Arc;

use num_traits::ToPrimitive;
use serde::Serialize;

use crate::bounds::{Bounds, RangeError, ReciprocalWalk};
use crate::index_set::{IndexSet, SetError};
use crate::rational::{ExactSum, Rational};

pub type TermFn = Arc<dyn Fn(u64) -> Rational + Send + Sync>;
/// `ε ↦ N` such that every interval sum starting at or beyond `N` lies in `(−ε, ε)`.
pub type ConvergenceModulus = Arc<dyn Fn(&Rational) -> u64 + Send + Sync>;
/// `n ↦ N` such that `|a_i| <= 1/(n+1)²` for all `i >= N`.
pub type DecayModulus = Arc<dyn Fn(u64) -> u64 + Send + Sync>;
/// Fills `out[j]` with the grid enclosure of `a_{start+j}`; must agree with
/// [`Bounds::of`] applied to the term.
pub type EnclosureFn = Arc<dyn Fn(u64, &mut [Bounds]) -> Result<(), RangeError> + Send + Sync>;
/// `(start, len, X) ↦` enclosures of the sums over `X∩[start, start+len)` and
/// `[start, start+len)∖X`, or `None` when the routine cannot handle `X`.
pub type RangeSumFn =
    Arc<dyn Fn(u64, u64, &IndexSet) -> Option<(RangeSum, RangeSum)> + Send + Sync>;

/// A grid enclosure of a sum over a range, with every partial sum over a prefix of
/// the range lying in `[fall, rise]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RangeSum {
    pub total: Bounds,
    pub rise: i128,
    pub fall: i128,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SeriesClass {
    /// conditionally convergent
    Cc,
    /// absolutely convergent
    Ac,
    /// divergent to ±∞
    I,
    /// divergent by oscillation
    O,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Limit {
    Finite(Rational),
    PlusInf,
    MinusInf,
    Oscillates,
}

#[derive(Clone, Default)]
pub struct Certificates {
    pub convergence: Option<ConvergenceModulus>,
    pub decay: Option<DecayModulus>,
    pub class: Option<SeriesClass>,
    pub limit: Option<Limit>,
}

/// A total term map ω → ℚ plus certificates.
///
/// Term maps are pure. `truncated_at` records the index from which a finite
/// construction is zero-filled.
#[derive(Clone)]
pub struct Series {
    term: TermFn,
    certs: Certificates,
    description: Arc<str>,
    truncated_at: Option<u64>,
    enclosures: Option<EnclosureFn>,
    range_sums: Option<RangeSumFn>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SeriesError {
    #[error("degenerate scaling")]
    DegenerateScaling,
    #[error("restriction requires infinite index set")]
    RestrictionNeedsInfinite,
    #[error(transparent)]
    Set(#[from] SetError),
}

fn saturating_u64(x: num_bigint::BigInt) -> u64 {
    if x.sign() == num_bigint::Sign::Minus {
        0
    } else {
        x.to_u64().unwrap_or(u64::MAX)
    }
}

/// `⌊1/ε⌋`, saturating.
pub fn floor_recip(eps: &Rational) -> u64 {
    assert!(eps.is_positive(), "modulus argument must be positive");
    saturating_u64(eps.recip().expect("positive").floor())
}

/// `⌈1/ε⌉`, saturating.
pub fn ceil_recip(eps: &Rational) -> u64 {
    assert!(eps.is_positive(), "modulus argument must be positive");
    saturating_u64(eps.recip().expect("positive").ceil())
}

/// Range sums of `(−1)^i/(i+1)` for `X` periodic with even period from `start` on.
///
/// Each residue class mod the period then has one sign. Its denominators are cut
/// into progressions `a, a+p, …, b` of `n` terms with `b − a <= a/2^14`, and by
/// convexity of `1/x` each piece sums into `[2n/(a+b), n(a+b)/(2ab)]`, a relative
/// width below `2^-28`.
fn alternating_harmonic_range(start: u64, len: u64, x: &IndexSet) -> Option<(RangeSum, RangeSum)> {
    const SPREAD_BITS: u32 = 14;
    let e = x.as_periodic()?;
    let p = e.cycle().len() as u64;
    if p % 2 != 0 || p > 64 || (e.prefix().len() as u64) > start || len < p {
        return None;
    }
    let end = start.checked_add(len)?.checked_add(1)?;
    let (mut inside, mut outside) = (RangeSum::default(), RangeSum::default());
    for first in start..start + p {
        let (mut lo, mut hi) = (0i128, 0i128);
        // denominators first+1, first+1+p, … below end+1
        let mut a = first + 1;
        while a < end {
            let n = ((a >> SPREAD_BITS) / p + 1).min((end - a).div_ceil(p));
            let b = a + (n - 1) * p;
            let (n, wa, wb) = (n as i128, a as u128, b as u128);
            lo += Bounds::of(&Rational::from_i128(2 * n, wa + wb)).ok()?.lo;
            hi += Bounds::of(&Rational::from_i128(
                n * (wa + wb) as i128,
                (2 * wa).checked_mul(wb)?,
            ))
            .ok()?
            .hi;
            a = b + p;
        }
        let acc = if x.contains(first) {
            &mut inside
        } else {
            &mut outside
        };
        if first % 2 == 0 {
            acc.total = acc.total.add(Bounds { lo, hi });
            acc.rise += hi;
        } else {
            acc.total = acc.total.add(Bounds { lo: -hi, hi: -lo });
            acc.fall -= hi;
        }
    }
    Some((inside, outside))
}

impl Series {
    pub fn new(
        description: impl Into<String>,
        term: impl Fn(u64) -> Rational + Send + Sync + 'static,
    ) -> Self {
        Series {
            term: Arc::new(term),
            certs: Certificates::default(),
            description: description.into().into(),
            truncated_at: None,
            enclosures: None,
            range_sums: None,
        }
    }

    /// Attaches a routine enclosing whole range sums, letting scans skip
    /// stretches where nothing can happen.
    pub fn with_range_sums(
        mut self,
        f: impl Fn(u64, u64, &IndexSet) -> Option<(RangeSum, RangeSum)> + Send + Sync + 'static,
    ) -> Self {
        self.range_sums = Some(Arc::new(f));
        self
    }

    pub fn range_sums(&self, start: u64, len: u64, x: &IndexSet) -> Option<(RangeSum, RangeSum)> {
        self.range_sums.as_ref().and_then(|f| f(start, len, x))
    }

    /// Attaches a bulk enclosure routine for long scans.
    pub fn with_enclosures(
        mut self,
        f: impl Fn(u64, &mut [Bounds]) -> Result<(), RangeError> + Send + Sync + 'static,
    ) -> Self {
        self.enclosures = Some(Arc::new(f));
        self
    }

    /// Enclosures of `a_start, a_{start+1}, …` into `out`.
    pub fn fill_bounds(&self, start: u64, out: &mut [Bounds]) -> Result<(), RangeError> {
        match &self.enclosures {
            Some(f) => f(start, out),
            None => {
                for (j, b) in out.iter_mut().enumerate() {
                    *b = Bounds::of(&self.term(start + j as u64))?;
                }
                Ok(())
            }
        }
    }

    pub fn with_convergence(
        mut self,
        m: impl Fn(&Rational) -> u64 + Send + Sync + 'static,
    ) -> Self {
        self.certs.convergence = Some(Arc::new(m));
        self
    }

    pub fn with_decay(mut self, m: impl Fn(u64) -> u64 + Send + Sync + 'static) -> Self {
        self.certs.decay = Some(Arc::new(m));
        self
    }

    pub fn with_class(mut self, c: SeriesClass) -> Self {
        self.certs.class = Some(c);
        self
    }

    pub fn with_limit(mut self, l: Limit) -> Self {
        self.certs.limit = Some(l);
        self
    }

    pub fn with_truncation(mut self, at: u64) -> Self {
        self.truncated_at = Some(at);
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into().into();
        self
    }

    pub fn without_certificates(mut self) -> Self {
        self.certs = Certificates::default();
        self
    }

    #[inline]
    pub fn term(&self, i: u64) -> Rational {
        (self.term)(i)
    }

    pub fn term_fn(&self) -> &TermFn {
        &self.term
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn certificates(&self) -> &Certificates {
        &self.certs
    }

    pub fn declared_class(&self) -> SeriesClass {
        self.certs.class.unwrap_or(SeriesClass::Unknown)
    }

    pub fn known_limit(&self) -> Option<&Limit> {
        self.certs.limit.as_ref()
    }

    pub fn truncated_at(&self) -> Option<u64> {
        self.truncated_at
    }

    pub fn convergence_modulus(&self, eps: &Rational) -> Option<u64> {
        self.certs.convergence.as_ref().map(|m| m(eps))
    }

    pub fn decay_modulus(&self, n: u64) -> Option<u64> {
        self.certs.decay.as_ref().map(|m| m(n))
    }

    pub fn zero() -> Self {
        Series::new("zero", |_| Rational::zero())
            .with_convergence(|_| 0)
            .with_decay(|_| 0)
            .with_class(SeriesClass::Ac)
            .with_limit(Limit::Finite(Rational::zero()))
    }

    /// `(−1)^i / (i+1)`.
    pub fn alternating_harmonic() -> Self {
        Series::new("altharmonic", |i| Rational::unit(i % 2 == 1, i + 1))
            .with_enclosures(|start, out| {
                let mut w = ReciprocalWalk::new(start + 1);
                for b in out.iter_mut() {
                    *b = w.bounds();
                    w.advance();
                }
                for b in out.iter_mut().skip((start % 2 == 0) as usize).step_by(2) {
                    *b = b.neg();
                }
                Ok(())
            })
            .with_range_sums(alternating_harmonic_range)
            // an interval sum starting at N has magnitude at most 1/(N+1), attained
            .with_convergence(floor_recip)
            .with_decay(|n| (n + 1).saturating_mul(n + 1) - 1)
            .with_class(SeriesClass::Cc)
    }

    /// `1 / (i+1)²`.
    pub fn basel() -> Self {
        Series::new("basel", |i| {
            let d = i + 1;
            match d.checked_mul(d) {
                Some(dd) => Rational::unit(false, dd),
                None => Rational::from_i128(1, d as u128 * d as u128),
            }
        })
        // tail sums from N >= 1 are below 1/N
        .with_convergence(|e| ceil_recip(e).max(1))
        .with_decay(|n| n)
        .with_class(SeriesClass::Ac)
    }

    /// `1 / ((i+1)(i+2))`, summing to 1.
    pub fn telescoping() -> Self {
        Series::new("telescoping", |i| {
            Rational::from_i128(1, (i as u128 + 1) * (i as u128 + 2))
        })
        // interval sums from N stay below 1/(N+1)
        .with_convergence(|e| ceil_recip(e).saturating_sub(1))
        .with_decay(|n| n)
        .with_class(SeriesClass::Ac)
        .with_limit(Limit::Finite(Rational::one()))
    }

    /// `Σ_{i ∈ X, i < k} a_i`, exactly.
    pub fn partial_sum(&self, x: &IndexSet, k: u64) -> Rational {
        let mut acc = ExactSum::new();
        for i in x.members_below(k) {
            acc.add(&self.term(i));
        }
        acc.value()
    }

    /// `Σ_{i ∈ [start, end)} a_i`, exactly.
    pub fn range_sum(&self, start: u64, end: u64) -> Rational {
        let mut acc = ExactSum::new();
        for i in start..end {
            acc.add(&self.term(i));
        }
        acc.value()
    }

    /// `a↾X`: the `n`-th term is `a` at the `n`-th member of `X`.
    ///
    /// Convergence information is dropped; the decay modulus and an absolute
    /// convergence class survive because the `n`-th member is at least `n`.
    pub fn restrict(&self, x: &IndexSet) -> Result<Series, SeriesError> {
        if !x.cert_infinite() {
            return Err(SeriesError::RestrictionNeedsInfinite);
        }
        let a = self.clone();
        let xs = x.clone();
        let mut s = Series::new(
            format!("restrict({},{})", self.description, x.description()),
            move |n| a.term(xs.select(n).expect("certified infinite")),
        );
        s.certs.decay = self.certs.decay.clone();
        if self.certs.class == Some(SeriesClass::Ac) {
            s.certs.class = Some(SeriesClass::Ac);
        }
        Ok(s)
    }

    /// `q·a`.
    pub fn scale(&self, q: &Rational) -> Result<Series, SeriesError> {
        if q.is_zero() {
            return Err(SeriesError::DegenerateScaling);
        }
        let a = self.clone();
        let qq = q.clone();
        let mut s = Series::new(format!("scale({},{})", self.description, q), move |i| {
            &qq * &a.term(i)
        });
        let absq = q.abs();
        if let Some(m) = self.certs.convergence.clone() {
            let aq = absq.clone();
            s.certs.convergence = Some(Arc::new(move |e: &Rational| m(&(e / &aq))));
        }
        if let Some(m) = self.certs.decay.clone() {
            if absq <= Rational::one() {
                s.certs.decay = Some(m);
            } else {
                // ⌈|q|⌉ >= √|q|, so |q·a_i| <= 1/(n+1)² once |a_i| <= 1/(⌈|q|⌉(n+1))²
                let c = saturating_u64(absq.ceil());
                s.certs.decay = Some(Arc::new(move |n| m(c.saturating_mul(n + 1) - 1)));
            }
        }
        s.certs.class = self.certs.class;
        s.certs.limit = self.certs.limit.as_ref().map(|l| match l {
            Limit::Finite(r) => Limit::Finite(r * q),
            Limit::PlusInf if q.is_negative() => Limit::MinusInf,
            Limit::MinusInf if q.is_negative() => Limit::PlusInf,
            other => other.clone(),
        });
        s.truncated_at = self.truncated_at;
        Ok(s)
    }

    /// `a_i + b_i`.
    pub fn add_pointwise(&self, other: &Series) -> Series {
        let (a, b) = (self.clone(), other.clone());
        let mut s = Series::new(
            format!("add({},{})", self.description, other.description),
            move |i| a.term(i) + b.term(i),
        );
        if let (Some(ma), Some(mb)) = (
            self.certs.convergence.clone(),
            other.certs.convergence.clone(),
        ) {
            s.certs.convergence = Some(Arc::new(move |e: &Rational| {
                let half = e / &Rational::from_integer(2);
                ma(&half).max(mb(&half))
            }));
        }
        if let (Some(da), Some(db)) = (self.certs.decay.clone(), other.certs.decay.clone()) {
            // 1/(2n+2)² + 1/(2n+2)² <= 1/(n+1)²
            s.certs.decay = Some(Arc::new(move |n| da(2 * n + 1).max(db(2 * n + 1))));
        }
        use SeriesClass::*;
        s.certs.class = match (self.certs.class, other.certs.class) {
            (Some(Ac), Some(Ac)) => Some(Ac),
            (Some(Cc), Some(Ac)) | (Some(Ac), Some(Cc)) => Some(Cc),
            _ => None,
        };
        s.certs.limit = match (&self.certs.limit, &other.certs.limit) {
            (Some(Limit::Finite(x)), Some(Limit::Finite(y))) => Some(Limit::Finite(x + y)),
            (Some(Limit::Finite(_)), Some(l)) | (Some(l), Some(Limit::Finite(_))) => {
                Some(l.clone())
            }
            _ => None,
        };
        s.truncated_at = match (self.truncated_at, other.truncated_at) {
            (Some(x), Some(y)) => Some(x.max(y)),
            _ => None,
        };
        s
    }

    /// `a^t_i = a_i + t/(i+1)²`.
    pub fn perturb_quadratic(&self, t: &Rational) -> Series {
        let d = format!("perturb({},{})", self.description, t);
        if t.is_zero() {
            return self.clone().with_description(d);
        }
        let b = Series::basel().scale(t).expect("nonzero");
        self.add_pointwise(&b).with_description(d)
    }

    /// `a'_i = −a_i` on `X`, `a_i` elsewhere.
    pub fn flip_signs_on(&self, x: &IndexSet) -> Series {
        let a = self.clone();
        let xs = x.clone();
        let mut s = Series::new(
            format!("flip({},{})", self.description, x.description()),
            move |i| {
                let t = a.term(i);
                if xs.contains(i) {
                    -t
                } else {
                    t
                }
            },
        );
        s.certs.decay = self.certs.decay.clone();
        if self.certs.class == Some(SeriesClass::Ac) {
            s.certs.class = Some(SeriesClass::Ac);
        }
        s.truncated_at = self.truncated_at;
        if self.enclosures.is_some() {
            let (a, xs) = (self.clone(), x.clone());
            s.enclosures = Some(Arc::new(move |start, out: &mut [Bounds]| {
                a.fill_bounds(start, out)?;
                for (b, inside) in out.iter_mut().zip(xs.cursor(start)) {
                    if inside {
                        *b = b.neg();
                    }
                }
                Ok(())
            }));
        }
        s
    }

    /// `P_a`, `N_a`, `Z_a` as predicate sets, with a density flag per set.
    pub fn sign_sets(&self, horizon: u64) -> SignSets {
        let mk = |name: &str, want: i32| {
            let a = self.clone();
            IndexSet::predicate(format!("{name}({})", self.description), move |i| {
                a.term(i).signum() == want
            })
        };
        let sets = [mk("pos", 1), mk("neg", -1), mk("zeros", 0)];
        let need = horizon.div_ceil(10);
        let mut counts = [0u64; 3];
        for i in 0..horizon {
            counts[match self.term(i).signum() {
                1 => 0,
                -1 => 1,
                _ => 2,
            }] += 1;
        }
        let [p, n, z] = sets;
        SignSets {
            positive: p,
            negative: n,
            zero: z,
            probably_infinite: [
                counts[0] >= need && need > 0,
                counts[1] >= need && need > 0,
                counts[2] >= need && need > 0,
            ],
            counts,
        }
    }
}

/// Sign sets with their density heuristic.
///
/// `probably_infinite` is advisory only and never sets a certificate.
#[derive(Clone, Debug)]
pub struct SignSets {
    pub positive: IndexSet,
    pub negative: IndexSet,
    pub zero: IndexSet,
    /// members below the horizon, in the order positive, negative, zero
    pub counts: [u64; 3],
    pub probably_infinite: [bool; 3],
}

impl fmt::Debug for Series {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Series")
            .field("description", &self.description)
            .field("class", &self.certs.class)
            .field("limit", &self.certs.limit)
            .field("truncated_at", &self.truncated_at)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Rational {
        Rational::new(n, d)
    }

    #[test]
    fn term_examples() {
        let ah = Series::alternating_harmonic();
        assert_eq!(ah.term(0), r(1, 1));
        assert_eq!(ah.term(1), r(-1, 2));
        assert_eq!(Series::zero().term(12345), Rational::zero());
    }

    #[test]
    fn partial_sum_examples() {
        let ah = Series::alternating_harmonic();
        assert_eq!(ah.partial_sum(&IndexSet::evens(), 6), r(23, 15));
        assert_eq!(ah.partial_sum(&IndexSet::omega(), 2), r(1, 2));
        assert_eq!(ah.partial_sum(&IndexSet::odds(), 0), Rational::zero());
    }

    #[test]
    fn restrict_examples() {
        let ah = Series::alternating_harmonic();
        let e = ah.restrict(&IndexSet::evens()).unwrap();
        assert_eq!(
            (0..3).map(|n| e.term(n)).collect::<Vec<_>>(),
            vec![r(1, 1), r(1, 3), r(1, 5)]
        );
        let o = ah.restrict(&IndexSet::odds()).unwrap();
        assert_eq!(
            (0..3).map(|n| o.term(n)).collect::<Vec<_>>(),
            vec![r(-1, 2), r(-1, 4), r(-1, 6)]
        );
        let w = ah.restrict(&IndexSet::omega()).unwrap();
        assert!((0..50).all(|i| w.term(i) == ah.term(i)));
        assert_eq!(
            ah.restrict(&IndexSet::finite([1, 2])).unwrap_err(),
            SeriesError::RestrictionNeedsInfinite
        );
    }

    #[test]
    fn sign_set_examples() {
        let s = Series::alternating_harmonic().sign_sets(100);
        assert!((0..100).all(|i| s.positive.contains(i) == (i % 2 == 0)));
        assert!((0..100).all(|i| s.negative.contains(i) == (i % 2 == 1)));
        assert_eq!(s.counts, [50, 50, 0]);
        assert_eq!(s.probably_infinite, [true, true, false]);
        assert!(!s.positive.cert_infinite());
        let z = Series::zero().sign_sets(50);
        assert_eq!(z.counts, [0, 0, 50]);
    }

    #[test]
    fn scale_examples() {
        let ah = Series::alternating_harmonic();
        let one = ah.scale(&r(1, 1)).unwrap();
        assert!((0..20).all(|i| one.term(i) == ah.term(i)));
        assert_eq!(ah.scale(&r(1, 2)).unwrap().term(0), r(1, 2));
        assert_eq!(
            ah.scale(&r(3, 1))
                .unwrap()
                .partial_sum(&IndexSet::evens(), 6),
            r(23, 5)
        );
        assert_eq!(
            ah.scale(&Rational::zero()).unwrap_err(),
            SeriesError::DegenerateScaling
        );
    }

    #[test]
    fn perturb_examples() {
        let ah = Series::alternating_harmonic();
        let z = ah.perturb_quadratic(&Rational::zero());
        assert!((0..20).all(|i| z.term(i) == ah.term(i)));
        let p = ah.perturb_quadratic(&r(1, 1));
        assert_eq!(p.term(0), r(2, 1));
        assert_eq!(p.term(1), r(-1, 4));
        let viaadd = ah.add_pointwise(&Series::basel().scale(&r(1, 1)).unwrap());
        assert!((0..30).all(|i| viaadd.term(i) == p.term(i)));
        assert_eq!(p.declared_class(), SeriesClass::Cc);
    }

    #[test]
    fn flip_examples() {
        let ah = Series::alternating_harmonic();
        let none = ah.flip_signs_on(&IndexSet::empty());
        assert!((0..20).all(|i| none.term(i) == ah.term(i)));
        let f = ah.flip_signs_on(&IndexSet::evens());
        assert!((0..20).all(|i| f.term(i).is_negative()));
        let ff = f.flip_signs_on(&IndexSet::evens());
        assert!((0..20).all(|i| ff.term(i) == ah.term(i)));
    }

    #[test]
    fn add_examples() {
        let ah = Series::alternating_harmonic();
        let z = ah.add_pointwise(&Series::zero());
        assert!((0..20).all(|i| z.term(i) == ah.term(i)));
        let c = ah.add_pointwise(&ah.flip_signs_on(&IndexSet::omega()));
        assert!((0..20).all(|i| c.term(i).is_zero()));
    }

    #[test]
    fn moduli_are_valid_on_prefixes() {
        // every interval sum from N = f(ε) on a window stays inside (−ε, ε)
        let eps = [r(1, 2), r(1, 7), r(2, 9)];
        for s in [
            Series::alternating_harmonic(),
            Series::basel(),
            Series::telescoping(),
            Series::alternating_harmonic().scale(&r(-3, 2)).unwrap(),
            Series::alternating_harmonic().perturb_quadratic(&r(1, 3)),
        ] {
            for e in &eps {
                let n = s.convergence_modulus(e).unwrap();
                let mut run = Rational::zero();
                for i in n..n + 60 {
                    run += s.term(i);
                    assert!(run.abs() < *e, "{s:?} eps {e} start {n} at {i}");
                }
            }
            for n in 0..6 {
                let d = s.decay_modulus(n).unwrap();
                let bound = r(1, ((n + 1) * (n + 1)) as i64);
                assert!(
                    (d..d + 40).all(|i| s.term(i).abs() <= bound),
                    "{s:?} decay {n}"
                );
            }
        }
    }

    #[test]
    fn bulk_enclosures_match_termwise() {
        let ah = Series::alternating_harmonic();
        let f = ah.flip_signs_on(&IndexSet::modulo(3, 1).unwrap());
        for s in [&ah, &f, &Series::basel()] {
            for start in [0u64, 17, 4_194_290] {
                let mut out = vec![Bounds::ZERO; 64];
                s.fill_bounds(start, &mut out).unwrap();
                for (j, b) in out.iter().enumerate() {
                    assert_eq!(*b, Bounds::of(&s.term(start + j as u64)).unwrap());
                }
            }
        }
    }

    #[test]
    fn altharmonic_modulus_is_least() {
        let ah = Series::alternating_harmonic();
        assert_eq!(ah.convergence_modulus(&r(1, 4)), Some(4));
        assert_eq!(ah.convergence_modulus(&r(1, 9)), Some(9));
        assert_eq!(ah.decay_modulus(1), Some(3));
        assert_eq!(Series::basel().decay_modulus(5), Some(5));
    }
}

#[cfg(test)]
mod range_tests {
    use super::*;

    #[test]
    fn altharmonic_range_sums_enclose_termwise_sums() {
        let ah = Series::alternating_harmonic();
        let sets = [
            IndexSet::evens(),
            IndexSet::odds(),
            IndexSet::modulo(4, 1).unwrap(),
        ];
        for x in &sets {
            for (start, len) in [(0u64, 4u64), (10, 100), (3672, 5000), (1 << 20, 1 << 15)] {
                let (ins, outs) = ah.range_sums(start, len, x).unwrap();
                // termwise enclosures of the running sums, with their extremes
                let mut run = [(Bounds::ZERO, 0i128, 0i128); 2];
                for i in start..start + len {
                    let (sum, low, high) = &mut run[!x.contains(i) as usize];
                    *sum = sum.add(Bounds::of(&ah.term(i)).unwrap());
                    *low = (*low).min(sum.lo);
                    *high = (*high).max(sum.hi);
                }
                for (r, (sum, low, high)) in [ins, outs].into_iter().zip(run) {
                    assert!(
                        r.total.lo <= sum.lo && sum.hi <= r.total.hi,
                        "{x:?} {start} {len}"
                    );
                    assert!(r.fall <= low && high <= r.rise);
                    assert!(r.total.width() < 1 << 40, "{x:?} {start} {len} too loose");
                }
            }
        }
        assert!(ah
            .range_sums(0, 100, &IndexSet::modulo(3, 0).unwrap())
            .is_none());
    }
}
