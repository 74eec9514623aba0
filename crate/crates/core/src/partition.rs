//! Interval partitions of ω and maps between naturals.

use std::fmt;
use std::sync::Arc;

/// Boundary rule `n ↦ i_n`; must be strictly increasing with `i_0 = 0` and
/// saturate at `u64::MAX` instead of overflowing.
pub type BoundaryFn = Arc<dyn Fn(u64) -> u64 + Send + Sync>;

#[derive(Clone)]
enum Repr {
    /// `i_n = k·n`.
    Uniform(u64),
    /// Listed boundaries `0 = b_0 < … < b_L`, continued by singletons.
    Prefix(Arc<Vec<u64>>),
    Rule(BoundaryFn),
}

/// Consecutive intervals `I_n = [i_n, i_{n+1})` covering ω with `i_0 = 0`.
///
/// A partition built from finitely many computed boundaries is continued by
/// singleton intervals; [`IntervalPartition::genuine_len`] records how many
/// intervals are genuine so finite relations can ignore the filler.
#[derive(Clone)]
pub struct IntervalPartition {
    repr: Repr,
    genuine: Option<u64>,
    description: Arc<str>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PartitionError {
    #[error("boundaries must start at 0 and increase strictly (failed at position {0})")]
    NotIncreasing(usize),
    #[error("interval width must be positive")]
    ZeroWidth,
}

impl IntervalPartition {
    pub fn singletons() -> Self {
        Self::uniform(1).expect("positive width")
    }

    pub fn uniform(k: u64) -> Result<Self, PartitionError> {
        if k == 0 {
            return Err(PartitionError::ZeroWidth);
        }
        Ok(IntervalPartition {
            repr: Repr::Uniform(k),
            genuine: None,
            description: format!("uniform({k})").into(),
        })
    }

    /// Finitely many boundaries `0 = b_0 < b_1 < … < b_L`; intervals from `L` on are
    /// singleton filler.
    pub fn from_boundaries(bounds: Vec<u64>) -> Result<Self, PartitionError> {
        Self::validate(&bounds)?;
        let genuine = bounds.len().saturating_sub(1) as u64;
        let description = format!(
            "bounds([{}])",
            bounds
                .iter()
                .map(|b| b.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        Ok(IntervalPartition {
            repr: Repr::Prefix(Arc::new(bounds)),
            genuine: Some(genuine),
            description: description.into(),
        })
    }

    fn validate(bounds: &[u64]) -> Result<(), PartitionError> {
        if bounds.first() != Some(&0) {
            return Err(PartitionError::NotIncreasing(0));
        }
        for (i, w) in bounds.windows(2).enumerate() {
            if w[0] >= w[1] {
                return Err(PartitionError::NotIncreasing(i + 1));
            }
        }
        Ok(())
    }

    /// A boundary rule; the first `check` boundaries are validated eagerly.
    pub fn from_rule(
        description: impl Into<String>,
        rule: BoundaryFn,
        check: u64,
    ) -> Result<Self, PartitionError> {
        let head: Vec<u64> = (0..=check).map(|n| rule(n)).collect();
        Self::validate(&head)?;
        Ok(IntervalPartition {
            repr: Repr::Rule(rule),
            genuine: None,
            description: description.into().into(),
        })
    }

    /// `|I_n| = n + 1`, so `i_n = n(n+1)/2`.
    pub fn triangular() -> Self {
        Self::from_rule(
            "triangular",
            Arc::new(|n: u64| n.saturating_mul(n.saturating_add(1)) / 2),
            8,
        )
        .expect("valid rule")
    }

    /// `|I_n| = 2^n`, so `i_n = 2^n − 1`.
    pub fn geometric() -> Self {
        Self::from_rule(
            "geometric",
            Arc::new(|n: u64| if n >= 64 { u64::MAX } else { (1u64 << n) - 1 }),
            8,
        )
        .expect("valid rule")
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into().into();
        self
    }

    /// Number of genuine intervals, or `None` when every interval is genuine.
    pub fn genuine_len(&self) -> Option<u64> {
        self.genuine
    }

    pub fn is_truncated(&self) -> bool {
        self.genuine.is_some()
    }

    /// Index bound below which every position lies in a genuine interval.
    pub fn genuine_end(&self) -> u64 {
        match self.genuine {
            None => u64::MAX,
            Some(l) => self.boundary(l),
        }
    }

    /// `i_n`.
    pub fn boundary(&self, n: u64) -> u64 {
        match &self.repr {
            Repr::Uniform(k) => n.saturating_mul(*k),
            Repr::Prefix(b) => {
                let last = b.len() as u64 - 1;
                if n <= last {
                    b[n as usize]
                } else {
                    b[last as usize].saturating_add(n - last)
                }
            }
            Repr::Rule(f) => f(n),
        }
    }

    /// `I_n` as a half-open range.
    pub fn interval(&self, n: u64) -> (u64, u64) {
        (self.boundary(n), self.boundary(n + 1))
    }

    /// The `n` with `i ∈ I_n`.
    pub fn block_of(&self, i: u64) -> u64 {
        match &self.repr {
            Repr::Uniform(k) => i / k,
            Repr::Prefix(b) => {
                let last = *b.last().expect("nonempty");
                if i >= last {
                    (b.len() as u64 - 1) + (i - last)
                } else {
                    (b.partition_point(|&x| x <= i) - 1) as u64
                }
            }
            Repr::Rule(f) => {
                // largest n with f(n) <= i; f(n) >= n bounds the search
                let (mut lo, mut hi) = (0u64, i.saturating_add(1));
                let mut step = 1u64;
                while step < hi && f(step) <= i {
                    lo = step;
                    step = step.saturating_mul(2);
                }
                hi = hi.min(step);
                while hi - lo > 1 {
                    let mid = lo + (hi - lo) / 2;
                    if f(mid) <= i {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
        }
    }

    /// Intervals `(n, start, end)` with `end <= horizon`, in order.
    pub fn intervals_below(&self, horizon: u64) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        let mut n = 0u64;
        std::iter::from_fn(move || {
            let (s, e) = self.interval(n);
            if e > horizon || s == u64::MAX {
                return None;
            }
            n += 1;
            Some((n - 1, s, e))
        })
    }

    /// Genuine intervals `(n, start, end)` with `end <= horizon`.
    pub fn genuine_intervals_below(
        &self,
        horizon: u64,
    ) -> impl Iterator<Item = (u64, u64, u64)> + '_ {
        let cap = self.genuine.unwrap_or(u64::MAX);
        self.intervals_below(horizon)
            .take_while(move |(n, _, _)| *n < cap)
    }
}

impl fmt::Debug for IntervalPartition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let head: Vec<u64> = (0..6).map(|n| self.boundary(n)).collect();
        f.debug_struct("IntervalPartition")
            .field("description", &self.description)
            .field("boundaries", &head)
            .field("genuine", &self.genuine)
            .finish()
    }
}

/// A total map ω → ω.
#[derive(Clone)]
pub struct NatMap {
    f: Arc<dyn Fn(u64) -> u64 + Send + Sync>,
    monotone: bool,
    description: Arc<str>,
}

impl NatMap {
    pub fn new(
        description: impl Into<String>,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        NatMap {
            f: Arc::new(f),
            monotone: false,
            description: description.into().into(),
        }
    }

    /// A map the caller asserts to be nondecreasing and unbounded.
    pub fn monotone(
        description: impl Into<String>,
        f: impl Fn(u64) -> u64 + Send + Sync + 'static,
    ) -> Self {
        NatMap {
            f: Arc::new(f),
            monotone: true,
            description: description.into().into(),
        }
    }

    pub fn identity() -> Self {
        Self::monotone("identity", |x| x)
    }

    pub fn linear(slope: u64, offset: u64) -> Self {
        let f = move |x: u64| x.saturating_mul(slope).saturating_add(offset);
        if slope > 0 {
            Self::monotone(format!("linear({slope},{offset})"), f)
        } else {
            Self::new(format!("linear({slope},{offset})"), f)
        }
    }

    /// Listed values; arguments past the end continue linearly with step 1.
    pub fn table(values: Vec<u64>) -> Self {
        let mono = values.windows(2).all(|w| w[0] <= w[1]);
        let description = format!(
            "table([{}])",
            values
                .iter()
                .map(|v| v.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        let values = Arc::new(values);
        let f = move |x: u64| match values.get(x as usize) {
            Some(v) => *v,
            None => match values.last() {
                Some(last) => last.saturating_add(x - values.len() as u64 + 1),
                None => x,
            },
        };
        if mono {
            Self::monotone(description, f)
        } else {
            Self::new(description, f)
        }
    }

    #[inline]
    pub fn apply(&self, x: u64) -> u64 {
        (self.f)(x)
    }

    pub fn is_monotone(&self) -> bool {
        self.monotone
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into().into();
        self
    }

    /// Least `n` with `f(n) >= y`, for monotone unbounded maps.
    pub fn least_reaching(&self, y: u64) -> u64 {
        debug_assert!(self.monotone);
        let mut hi = 1u64;
        while self.apply(hi) < y {
            hi = hi.saturating_mul(2);
        }
        let mut lo = 0u64;
        if self.apply(0) >= y {
            return 0;
        }
        // f(lo) < y <= f(hi)
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            if self.apply(mid) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

impl fmt::Debug for NatMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "NatMap({})", self.description)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn block_lookup_matches_boundaries() {
        let parts = [
            IntervalPartition::singletons(),
            IntervalPartition::uniform(3).unwrap(),
            IntervalPartition::triangular(),
            IntervalPartition::geometric(),
            IntervalPartition::from_boundaries(vec![0, 2, 7, 9]).unwrap(),
        ];
        for p in &parts {
            for i in 0..200u64 {
                let n = p.block_of(i);
                let (s, e) = p.interval(n);
                assert!(s <= i && i < e, "{p:?} {i} -> {n}");
            }
        }
    }

    #[test]
    fn prefix_continues_with_singletons() {
        let p = IntervalPartition::from_boundaries(vec![0, 3, 5]).unwrap();
        assert_eq!(p.interval(1), (3, 5));
        assert_eq!(p.interval(2), (5, 6));
        assert_eq!(p.genuine_len(), Some(2));
        assert_eq!(p.genuine_end(), 5);
        assert_eq!(p.genuine_intervals_below(100).count(), 2);
    }

    #[test]
    fn invalid_boundaries_rejected() {
        assert!(IntervalPartition::from_boundaries(vec![1, 2]).is_err());
        assert!(IntervalPartition::from_boundaries(vec![0, 2, 2]).is_err());
        assert!(IntervalPartition::uniform(0).is_err());
    }

    #[test]
    fn least_reaching_on_monotone_maps() {
        let f = NatMap::linear(2, 0);
        assert_eq!(f.least_reaching(0), 0);
        assert_eq!(f.least_reaching(5), 3);
        assert_eq!(f.least_reaching(6), 3);
        let t = NatMap::table(vec![0, 0, 4, 4, 9]);
        assert_eq!(t.least_reaching(1), 2);
        assert_eq!(t.least_reaching(10), 5);
    }
}
