//! Subsets of ω with decidable membership, increasing enumeration and
//! infinitude certificates.
//!
//! Eventually periodic sets are kept in closed form, so boolean combinations of
//! them stay periodic and their certificates are decided exactly. Other sets are
//! predicates; their certificates come from builders or explicit assertions.

use std::fmt;
use std::sync::Arc;

use num_integer::Integer;

use crate::partition::{IntervalPartition, NatMap};

/// Periodic representations whose cycle would exceed this are kept symbolic.
const MAX_CYCLE: usize = 1 << 16;
/// Finite sets with all members below this are converted to periodic form.
const FINITE_AS_PERIODIC: u64 = 1 << 12;

/// `prefix` followed by `cycle` repeated forever.
#[derive(Clone, PartialEq, Eq)]
pub struct EventuallyPeriodic {
    prefix: Vec<bool>,
    cycle: Vec<bool>,
    // counts[j] = members among cycle[..j]
    cycle_counts: Vec<u64>,
    prefix_counts: Vec<u64>,
}

impl EventuallyPeriodic {
    pub fn new(prefix: Vec<bool>, cycle: Vec<bool>) -> Option<Self> {
        if cycle.is_empty() {
            return None;
        }
        let counts = |v: &[bool]| {
            let mut c = Vec::with_capacity(v.len() + 1);
            c.push(0u64);
            for &b in v {
                c.push(c.last().unwrap() + b as u64);
            }
            c
        };
        Some(EventuallyPeriodic {
            cycle_counts: counts(&cycle),
            prefix_counts: counts(&prefix),
            prefix,
            cycle,
        })
    }

    pub fn prefix(&self) -> &[bool] {
        &self.prefix
    }

    pub fn cycle(&self) -> &[bool] {
        &self.cycle
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        let p = self.prefix.len() as u64;
        if i < p {
            self.prefix[i as usize]
        } else {
            self.cycle[((i - p) % self.cycle.len() as u64) as usize]
        }
    }

    pub fn is_infinite(&self) -> bool {
        self.cycle.iter().any(|&b| b)
    }

    pub fn is_coinfinite(&self) -> bool {
        self.cycle.iter().any(|&b| !b)
    }

    /// `|X ∩ [0, k)|`.
    pub fn rank(&self, k: u64) -> u64 {
        let p = self.prefix.len() as u64;
        if k <= p {
            return self.prefix_counts[k as usize];
        }
        let c = self.cycle.len() as u64;
        let (q, r) = (k - p).div_rem(&c);
        self.prefix_counts[p as usize]
            + q * self.cycle_counts[c as usize]
            + self.cycle_counts[r as usize]
    }

    /// The `n`-th member, counting from zero.
    pub fn select(&self, n: u64) -> Option<u64> {
        let in_prefix = self.prefix_counts[self.prefix.len()];
        if n < in_prefix {
            let j = self.prefix_counts.partition_point(|&x| x <= n) - 1;
            return Some(j as u64);
        }
        let per = *self.cycle_counts.last().unwrap();
        if per == 0 {
            return None;
        }
        let m = n - in_prefix;
        let (q, r) = m.div_rem(&per);
        let j = self.cycle_counts.partition_point(|&x| x <= r) - 1;
        Some(self.prefix.len() as u64 + q * self.cycle.len() as u64 + j as u64)
    }

    fn combine(&self, other: &Self, op: impl Fn(bool, bool) -> bool) -> Option<Self> {
        let p = self.prefix.len().max(other.prefix.len());
        let c = self.cycle.len().lcm(&other.cycle.len());
        if c > MAX_CYCLE || p > MAX_CYCLE {
            return None;
        }
        let prefix = (0..p as u64)
            .map(|i| op(self.contains(i), other.contains(i)))
            .collect();
        let cycle = (p as u64..(p + c) as u64)
            .map(|i| op(self.contains(i), other.contains(i)))
            .collect();
        Self::new(prefix, cycle).map(|e| e.normalized())
    }

    fn map(&self, op: impl Fn(bool) -> bool) -> Self {
        Self::new(
            self.prefix.iter().map(|&b| op(b)).collect(),
            self.cycle.iter().map(|&b| op(b)).collect(),
        )
        .expect("nonempty cycle")
    }

    /// Shortest cycle, then shortest prefix.
    pub fn normalized(&self) -> Self {
        let c = self.cycle.len();
        let mut cycle = self.cycle.clone();
        for d in 1..=c {
            if c % d == 0 && (0..c).all(|j| self.cycle[j] == self.cycle[j % d]) {
                cycle.truncate(d);
                break;
            }
        }
        let mut prefix = self.prefix.clone();
        // rotate trailing prefix entries into the cycle while they match
        while let Some(&last) = prefix.last() {
            if last == *cycle.last().unwrap() {
                prefix.pop();
                cycle.rotate_right(1);
            } else {
                break;
            }
        }
        Self::new(prefix, cycle).expect("nonempty cycle")
    }

    /// Mini-language rendering `periodic(prefix,cycle)`.
    pub fn spec(&self) -> String {
        let bits = |v: &[bool]| {
            v.iter()
                .map(|&b| if b { '1' } else { '0' })
                .collect::<String>()
        };
        format!("periodic({},{})", bits(&self.prefix), bits(&self.cycle))
    }
}

impl fmt::Debug for EventuallyPeriodic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec())
    }
}

pub type Predicate = Arc<dyn Fn(u64) -> bool + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Periodic(Arc<EventuallyPeriodic>),
    // sorted, distinct
    Finite(Arc<Vec<u64>>),
    Predicate(Predicate),
    Complement(IndexSet),
    Union(IndexSet, IndexSet),
    Intersect(IndexSet, IndexSet),
    SymmDiff(IndexSet, IndexSet),
    Blocks(IntervalPartition, Predicate),
    Range(NatMap),
}

/// A subset of ω.
#[derive(Clone)]
pub struct IndexSet {
    kind: Arc<Kind>,
    cert_infinite: bool,
    cert_coinfinite: bool,
    description: Arc<str>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SetError {
    #[error("index set {0} is not certified infinite")]
    NotInfinite(String),
    #[error("index set {0} is not certified coinfinite")]
    NotCoinfinite(String),
    #[error("range membership needs a nondecreasing unbounded map")]
    NotMonotone,
    #[error("invalid periodic pattern: cycle must be nonempty")]
    EmptyCycle,
    #[error("modulus must be positive and exceed the residue")]
    BadModulus,
}

impl IndexSet {
    fn from_kind(kind: Kind, inf: bool, coinf: bool, description: impl Into<String>) -> Self {
        IndexSet {
            kind: Arc::new(kind),
            cert_infinite: inf,
            cert_coinfinite: coinf,
            description: description.into().into(),
        }
    }

    pub fn periodic(e: EventuallyPeriodic) -> Self {
        let (inf, coinf) = (e.is_infinite(), e.is_coinfinite());
        let d = e.spec();
        Self::from_kind(Kind::Periodic(Arc::new(e)), inf, coinf, d)
    }

    /// From bit strings such as `"1100"`; the cycle must be nonempty.
    pub fn periodic_bits(prefix: &str, cycle: &str) -> Result<Self, SetError> {
        let parse = |s: &str| -> Result<Vec<bool>, SetError> {
            s.chars()
                .map(|c| match c {
                    '0' => Ok(false),
                    '1' => Ok(true),
                    _ => Err(SetError::EmptyCycle),
                })
                .collect()
        };
        let e =
            EventuallyPeriodic::new(parse(prefix)?, parse(cycle)?).ok_or(SetError::EmptyCycle)?;
        Ok(Self::periodic(e).with_description(format!("periodic({prefix},{cycle})")))
    }

    /// `{i : i ≡ r mod p}`.
    pub fn modulo(p: u64, r: u64) -> Result<Self, SetError> {
        if p == 0 || r >= p || p as usize > MAX_CYCLE {
            return Err(SetError::BadModulus);
        }
        let cycle = (0..p).map(|j| j == r).collect();
        let e = EventuallyPeriodic::new(vec![], cycle).expect("nonempty");
        Ok(Self::periodic(e).with_description(format!("mod({p},{r})")))
    }

    pub fn evens() -> Self {
        Self::modulo(2, 0).expect("valid").with_description("evens")
    }

    pub fn odds() -> Self {
        Self::modulo(2, 1).expect("valid").with_description("odds")
    }

    pub fn omega() -> Self {
        Self::periodic(EventuallyPeriodic::new(vec![], vec![true]).unwrap())
            .with_description("omega")
    }

    pub fn empty() -> Self {
        Self::periodic(EventuallyPeriodic::new(vec![], vec![false]).unwrap())
            .with_description("empty")
    }

    pub fn finite(members: impl IntoIterator<Item = u64>) -> Self {
        let mut v: Vec<u64> = members.into_iter().collect();
        v.sort_unstable();
        v.dedup();
        let d = format!(
            "finite([{}])",
            v.iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(",")
        );
        if v.last().map_or(true, |&m| m < FINITE_AS_PERIODIC) {
            let len = v.last().map_or(0, |&m| m + 1) as usize;
            let mut prefix = vec![false; len];
            for &m in &v {
                prefix[m as usize] = true;
            }
            let e = EventuallyPeriodic::new(prefix, vec![false]).unwrap();
            return Self::periodic(e).with_description(d);
        }
        Self::from_kind(Kind::Finite(Arc::new(v)), false, true, d)
    }

    /// A predicate-defined set; certificates must be asserted separately.
    pub fn predicate(
        description: impl Into<String>,
        p: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::from_kind(Kind::Predicate(Arc::new(p)), false, false, description)
    }

    /// Union of the intervals `I_n` with `select(n)`.
    ///
    /// Not certified; use [`IndexSet::even_blocks`]/[`IndexSet::odd_blocks`] or
    /// [`IndexSet::assert_certificates`] when the selection is known.
    pub fn from_intervals(
        partition: &IntervalPartition,
        description: impl Into<String>,
        select: impl Fn(u64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self::from_kind(
            Kind::Blocks(partition.clone(), Arc::new(select)),
            false,
            false,
            description,
        )
    }

    pub fn even_blocks(partition: &IntervalPartition) -> Self {
        let d = format!("blocks({},even)", partition.description());
        let mut s = Self::from_intervals(partition, d, |n| n % 2 == 0);
        s.cert_infinite = true;
        s.cert_coinfinite = true;
        s
    }

    pub fn odd_blocks(partition: &IntervalPartition) -> Self {
        let d = format!("blocks({},odd)", partition.description());
        let mut s = Self::from_intervals(partition, d, |n| n % 2 == 1);
        s.cert_infinite = true;
        s.cert_coinfinite = true;
        s
    }

    /// `ran(f)` for a nondecreasing unbounded `f`; coinfiniteness is not certified.
    pub fn range_of(f: &NatMap) -> Result<Self, SetError> {
        if !f.is_monotone() {
            return Err(SetError::NotMonotone);
        }
        let d = format!("range({})", f.description());
        Ok(Self::from_kind(Kind::Range(f.clone()), true, false, d))
    }

    /// Explicit certificate override for sets known by outside reasoning.
    pub fn assert_certificates(mut self, infinite: bool, coinfinite: bool) -> Self {
        self.cert_infinite = infinite;
        self.cert_coinfinite = coinfinite;
        self
    }

    pub fn with_description(mut self, d: impl Into<String>) -> Self {
        self.description = d.into().into();
        self
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn cert_infinite(&self) -> bool {
        self.cert_infinite
    }

    pub fn cert_coinfinite(&self) -> bool {
        self.cert_coinfinite
    }

    pub fn require_infinite(&self) -> Result<(), SetError> {
        if self.cert_infinite {
            Ok(())
        } else {
            Err(SetError::NotInfinite(self.description.to_string()))
        }
    }

    pub fn require_infinite_coinfinite(&self) -> Result<(), SetError> {
        self.require_infinite()?;
        if self.cert_coinfinite {
            Ok(())
        } else {
            Err(SetError::NotCoinfinite(self.description.to_string()))
        }
    }

    /// The closed form when the set is eventually periodic.
    pub fn as_periodic(&self) -> Option<&EventuallyPeriodic> {
        match &*self.kind {
            Kind::Periodic(e) => Some(e),
            _ => None,
        }
    }

    #[inline]
    pub fn contains(&self, i: u64) -> bool {
        match &*self.kind {
            Kind::Periodic(e) => e.contains(i),
            Kind::Finite(v) => v.binary_search(&i).is_ok(),
            Kind::Predicate(p) => p(i),
            Kind::Complement(x) => !x.contains(i),
            Kind::Union(x, y) => x.contains(i) || y.contains(i),
            Kind::Intersect(x, y) => x.contains(i) && y.contains(i),
            Kind::SymmDiff(x, y) => x.contains(i) != y.contains(i),
            Kind::Blocks(p, sel) => sel(p.block_of(i)),
            Kind::Range(f) => {
                let n = f.least_reaching(i);
                f.apply(n) == i
            }
        }
    }

    /// `|X ∩ [0, k)|`.
    pub fn rank(&self, k: u64) -> u64 {
        match &*self.kind {
            Kind::Periodic(e) => e.rank(k),
            Kind::Finite(v) => v.partition_point(|&x| x < k) as u64,
            _ => (0..k).filter(|&i| self.contains(i)).count() as u64,
        }
    }

    /// The least member `>= from` and `< limit`.
    pub fn next_member(&self, from: u64, limit: u64) -> Option<u64> {
        match &*self.kind {
            Kind::Periodic(e) => {
                let n = e.rank(from);
                e.select(n).filter(|&m| m < limit)
            }
            Kind::Finite(v) => {
                let j = v.partition_point(|&x| x < from);
                v.get(j).copied().filter(|&m| m < limit)
            }
            _ => (from..limit).find(|&i| self.contains(i)),
        }
    }

    /// The `n`-th member (from zero) if it lies below `limit`.
    pub fn select_below(&self, n: u64, limit: u64) -> Option<u64> {
        match &*self.kind {
            Kind::Periodic(e) => e.select(n).filter(|&m| m < limit),
            Kind::Finite(v) => v.get(n as usize).copied().filter(|&m| m < limit),
            _ => self.members_below(limit).nth(n as usize),
        }
    }

    /// The `n`-th member of a certified infinite set.
    pub fn select(&self, n: u64) -> Result<u64, SetError> {
        self.require_infinite()?;
        Ok(self
            .select_below(n, u64::MAX)
            .expect("certified infinite set has an n-th member"))
    }

    /// Members below `limit`, increasing.
    pub fn members_below(&self, limit: u64) -> impl Iterator<Item = u64> + '_ {
        let mut next = 0u64;
        std::iter::from_fn(move || {
            let m = self.next_member(next, limit)?;
            next = m + 1;
            Some(m)
        })
    }

    pub fn complement(&self) -> IndexSet {
        let d = format!("compl({})", self.description);
        match &*self.kind {
            Kind::Periodic(e) => IndexSet::periodic(e.map(|b| !b)).with_description(d),
            Kind::Complement(x) => x.clone(),
            _ => Self::from_kind(
                Kind::Complement(self.clone()),
                self.cert_coinfinite,
                self.cert_infinite,
                d,
            ),
        }
    }

    fn combine(
        &self,
        other: &IndexSet,
        name: &str,
        op: fn(bool, bool) -> bool,
        kind: fn(IndexSet, IndexSet) -> Kind,
        flags: (bool, bool),
    ) -> IndexSet {
        let d = format!("{name}({},{})", self.description, other.description);
        if let (Kind::Periodic(a), Kind::Periodic(b)) = (&*self.kind, &*other.kind) {
            if let Some(e) = a.combine(b, op) {
                return IndexSet::periodic(e).with_description(d);
            }
        }
        Self::from_kind(kind(self.clone(), other.clone()), flags.0, flags.1, d)
    }

    pub fn union(&self, other: &IndexSet) -> IndexSet {
        let flags = (self.cert_infinite || other.cert_infinite, false);
        self.combine(other, "union", |a, b| a || b, Kind::Union, flags)
    }

    pub fn intersect(&self, other: &IndexSet) -> IndexSet {
        let flags = (false, self.cert_coinfinite || other.cert_coinfinite);
        self.combine(other, "inter", |a, b| a && b, Kind::Intersect, flags)
    }

    pub fn difference(&self, other: &IndexSet) -> IndexSet {
        self.intersect(&other.complement())
            .with_description(format!("diff({},{})", self.description, other.description))
    }

    pub fn symm_diff(&self, other: &IndexSet) -> IndexSet {
        self.combine(
            other,
            "sdiff",
            |a, b| a != b,
            Kind::SymmDiff,
            (false, false),
        )
    }
}

/// Membership of consecutive indices `start, start+1, …`, without per-index
/// division for periodic sets.
pub struct Cursor<'a> {
    set: &'a IndexSet,
    next: u64,
    // position in the cycle of `next` once past the prefix
    phase: usize,
}

impl Iterator for Cursor<'_> {
    type Item = bool;

    #[inline]
    fn next(&mut self) -> Option<bool> {
        let i = self.next;
        self.next += 1;
        Some(match &*self.set.kind {
            Kind::Periodic(e) => {
                let p = e.prefix.len() as u64;
                if i < p {
                    e.prefix[i as usize]
                } else {
                    let b = e.cycle[self.phase];
                    self.phase += 1;
                    if self.phase == e.cycle.len() {
                        self.phase = 0;
                    }
                    b
                }
            }
            _ => self.set.contains(i),
        })
    }
}

impl IndexSet {
    pub fn cursor(&self, start: u64) -> Cursor<'_> {
        let phase = match &*self.kind {
            Kind::Periodic(e) => {
                let p = e.prefix.len() as u64;
                if start <= p {
                    0
                } else {
                    ((start - p) % e.cycle.len() as u64) as usize
                }
            }
            _ => 0,
        };
        Cursor {
            set: self,
            next: start,
            phase,
        }
    }
}

impl fmt::Debug for IndexSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "IndexSet({}, inf={}, coinf={})",
            self.description, self.cert_infinite, self.cert_coinfinite
        )
    }
}
