//! Finite-horizon versions of splitting, switching points, interval-partition
//! domination and the translations between functions and interval partitions.

use serde::Serialize;

use crate::index_set::IndexSet;
use crate::partition::{IntervalPartition, NatMap};
use crate::truth::Truth;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SplitEvidence {
    pub truth: Truth,
    /// `|X ∩ Y ∩ horizon|`
    pub inside: u64,
    /// `|X ∖ Y ∩ horizon|`
    pub outside: u64,
}

/// Whether `Y` splits `X`, judged from members below `horizon`.
pub fn is_split_by(x: &IndexSet, y: &IndexSet, horizon: u64, threshold: u64) -> SplitEvidence {
    assert!(threshold >= 1, "threshold must be positive");
    let (mut inside, mut outside) = (0u64, 0u64);
    for i in x.members_below(horizon) {
        if y.contains(i) {
            inside += 1;
        } else {
            outside += 1;
        }
    }
    let truth = if inside >= threshold && outside >= threshold {
        Truth::Holds
    } else if (inside == 0 || outside == 0)
        && inside.max(outside) >= threshold
        && inside + outside >= 2 * threshold
    {
        Truth::Fails
    } else {
        Truth::Unknown
    };
    SplitEvidence {
        truth,
        inside,
        outside,
    }
}

/// All `k < horizon` with `k = 0` or `X(k) != X(k−1)`.
pub fn switching_points(x: &IndexSet, horizon: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut prev = false;
    for k in 0..horizon {
        let cur = x.contains(k);
        if k == 0 || cur != prev {
            out.push(k);
        }
        prev = cur;
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DominationMode {
    /// almost all `J_n` contain some `I_k`
    Star,
    /// infinitely many `J_n` contain some `I_k`
    Infty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DominationEvidence {
    pub truth: Truth,
    /// `J_n` examined: inside the horizon and inside the genuine part of `I`
    pub examined: u64,
    /// examined `J_n` that contain some `I_k`
    pub containing: u64,
}

/// Whether `J_n ⊇ I_k` for some genuine `I_k`.
pub fn contains_some_interval(i: &IntervalPartition, start: u64, end: u64) -> bool {
    let mut k = i.block_of(start);
    if i.boundary(k) < start {
        k += 1;
    }
    if let Some(g) = i.genuine_len() {
        if k >= g {
            return false;
        }
    }
    i.boundary(k + 1) <= end
}

/// Finite-horizon `I ⊑* J` / `I ⊑∞ J`.
///
/// `Infty` holds once `count` examined intervals contain some `I_k` and fails when
/// fewer do among at least `2·count` examined. `Star` holds when at most `count`
/// examined intervals miss, fails when more miss, and is unknown with at most
/// `count` examined.
pub fn ip_dominates(
    i: &IntervalPartition,
    j: &IntervalPartition,
    horizon: u64,
    mode: DominationMode,
    count: u64,
) -> DominationEvidence {
    assert!(count >= 1, "count must be positive");
    let limit = horizon.min(i.genuine_end());
    let (mut examined, mut containing) = (0u64, 0u64);
    for (_, s, e) in j.genuine_intervals_below(limit) {
        examined += 1;
        if contains_some_interval(i, s, e) {
            containing += 1;
        }
    }
    let missed = examined - containing;
    let truth = match mode {
        DominationMode::Infty => {
            if containing >= count {
                Truth::Holds
            } else if examined >= 2 * count {
                Truth::Fails
            } else {
                Truth::Unknown
            }
        }
        DominationMode::Star => {
            if examined <= count {
                Truth::Unknown
            } else if missed <= count {
                Truth::Holds
            } else {
                Truth::Fails
            }
        }
    };
    DominationEvidence {
        truth,
        examined,
        containing,
    }
}

/// The partition `J` with `j_0 = 0` and `j_{n+1}` least such that `j_n < j_{n+1}`
/// and `g(x) < j_{n+1}` for all `x <= j_n`, computed while `j_n < horizon`.
///
/// The result is truncated: intervals past the last computed boundary are filler.
pub fn phi_g_to_ip(g: &NatMap, horizon: u64) -> IntervalPartition {
    let mut bounds = vec![0u64];
    let mut running_max: Option<u64> = None;
    let mut seen = 0u64; // g evaluated on [0, seen)
    loop {
        let jn = *bounds.last().unwrap();
        if jn >= horizon {
            break;
        }
        while seen <= jn {
            let v = g.apply(seen);
            running_max = Some(running_max.map_or(v, |m| m.max(v)));
            seen += 1;
        }
        let next = (jn + 1).max(running_max.unwrap().saturating_add(1));
        if next == u64::MAX {
            break;
        }
        bounds.push(next);
    }
    IntervalPartition::from_boundaries(bounds)
        .expect("strictly increasing by construction")
        .with_description(format!("phi({})", g.description()))
}

/// `x ↦ i_{n+3}` where `x ∈ I_n`.
pub fn psi_ip_to_f(i: &IntervalPartition) -> NatMap {
    let p = i.clone();
    NatMap::monotone(format!("psi({})", i.description()), move |x| {
        p.boundary(p.block_of(x) + 3)
    })
}

/// A containment `I_{n'} ⊆ J_{k'}` promised when `ψ(I)(x) <= g(x)` for `x ∈ I_n`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhiPsiWitness {
    pub n_prime: u64,
    pub k_prime: u64,
}

/// Checks the candidates `(n, k)`, `(n+1, k)`, `(n+1, k+1)`, `(n+2, k+1)` where
/// `x ∈ J_k`, returning the first containment found.
pub fn phi_psi_witness(
    i: &IntervalPartition,
    j: &IntervalPartition,
    x: u64,
) -> Option<PhiPsiWitness> {
    let n = i.block_of(x);
    let k = j.block_of(x);
    let inside = |a: u64, b: u64| {
        let (s, e) = i.interval(a);
        let (t, u) = j.interval(b);
        t <= s && e <= u
    };
    [(n, k), (n + 1, k), (n + 1, k + 1), (n + 2, k + 1)]
        .into_iter()
        .find(|&(a, b)| inside(a, b))
        .map(|(n_prime, k_prime)| PhiPsiWitness { n_prime, k_prime })
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PhiPsiReport {
    /// points `x` where `ψ(I)(x) <= g(x)` with all boundaries below the horizon
    pub hypotheses: u64,
    pub witnessed: u64,
    /// first `x` without a witness, if any
    pub counterexample: Option<u64>,
}

/// Checks every `x` below `horizon` meeting the hypothesis with the boundaries
/// `i_{n+3}` and `j_{k+2}` below `horizon`.
pub fn check_phi_psi(g: &NatMap, i: &IntervalPartition, horizon: u64) -> PhiPsiReport {
    let j = phi_g_to_ip(g, horizon);
    let f = psi_ip_to_f(i);
    let mut rep = PhiPsiReport::default();
    let jcap = j.genuine_len().unwrap_or(u64::MAX);
    for x in 0..horizon {
        let n = i.block_of(x);
        if i.boundary(n + 3) >= horizon {
            break;
        }
        let k = j.block_of(x);
        if k + 2 > jcap || j.boundary(k + 2) >= horizon {
            break;
        }
        if f.apply(x) <= g.apply(x) {
            rep.hypotheses += 1;
            if phi_psi_witness(i, &j, x).is_some() {
                rep.witnessed += 1;
            } else if rep.counterexample.is_none() {
                rep.counterexample = Some(x);
            }
        }
    }
    rep
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn split_examples() {
        let evens = IndexSet::evens();
        let m4 = IndexSet::modulo(4, 0).unwrap();
        let e = is_split_by(&evens, &m4, 100, 10);
        assert_eq!((e.truth, e.inside, e.outside), (Truth::Holds, 25, 25));
        assert_eq!(is_split_by(&evens, &evens, 100, 10).truth, Truth::Fails);
        let zero = IndexSet::predicate("zero", |i| i == 0);
        assert_eq!(is_split_by(&evens, &zero, 4, 10).truth, Truth::Unknown);
    }

    #[test]
    fn switching_examples() {
        assert_eq!(
            switching_points(&IndexSet::evens(), 6),
            vec![0, 1, 2, 3, 4, 5]
        );
        let x = IndexSet::periodic_bits("", "1100").unwrap();
        assert_eq!(switching_points(&x, 10), vec![0, 2, 4, 6, 8]);
        assert_eq!(switching_points(&IndexSet::omega(), 50), vec![0]);
    }

    #[test]
    fn from_intervals_examples() {
        let s = IndexSet::even_blocks(&IntervalPartition::singletons());
        assert_eq!(s.members_below(10).collect::<Vec<_>>(), vec![0, 2, 4, 6, 8]);
        let t = IndexSet::even_blocks(&IntervalPartition::triangular());
        assert_eq!(
            t.members_below(15).collect::<Vec<_>>(),
            vec![0, 3, 4, 5, 10, 11, 12, 13, 14]
        );
        let all = IndexSet::from_intervals(&IntervalPartition::triangular(), "all", |_| true);
        assert_eq!(all.members_below(30).count(), 30);
    }

    #[test]
    fn domination_examples() {
        let single = IntervalPartition::singletons();
        let j = IntervalPartition::uniform(3).unwrap();
        for mode in [DominationMode::Star, DominationMode::Infty] {
            assert_eq!(ip_dominates(&single, &j, 100, mode, 5).truth, Truth::Holds);
            assert_eq!(ip_dominates(&j, &j, 100, mode, 5).truth, Truth::Holds);
        }
        let geo = IntervalPartition::geometric();
        let e = ip_dominates(&geo, &single, 100, DominationMode::Infty, 3);
        assert_eq!((e.truth, e.containing), (Truth::Fails, 1));
    }

    #[test]
    fn phi_examples() {
        let bounds = |g: NatMap| {
            let p = phi_g_to_ip(&g, 40);
            (0..6).map(|n| p.boundary(n)).collect::<Vec<_>>()
        };
        assert_eq!(bounds(NatMap::identity()), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(bounds(NatMap::new("zero", |_| 0)), vec![0, 1, 2, 3, 4, 5]);
        assert_eq!(bounds(NatMap::linear(2, 0)), vec![0, 1, 3, 7, 15, 31]);
    }

    #[test]
    fn phi_truncates_at_horizon() {
        let p = phi_g_to_ip(&NatMap::linear(2, 0), 10);
        assert!(p.is_truncated());
        assert_eq!(p.genuine_len(), Some(4));
        assert_eq!(p.genuine_end(), 15);
    }

    #[test]
    fn psi_examples() {
        assert_eq!(psi_ip_to_f(&IntervalPartition::singletons()).apply(4), 7);
        assert_eq!(
            psi_ip_to_f(&IntervalPartition::uniform(2).unwrap()).apply(0),
            6
        );
        assert_eq!(psi_ip_to_f(&IntervalPartition::geometric()).apply(0), 7);
    }

    #[test]
    fn phi_psi_on_a_fixed_pair() {
        let g = NatMap::new("spiky", |x| if x % 7 == 3 { 2 * x + 12 } else { x / 2 });
        let rep = check_phi_psi(&g, &IntervalPartition::uniform(3).unwrap(), 2000);
        assert!(rep.hypotheses > 0);
        assert_eq!(rep.counterexample, None);
    }
}
