//! Exact failure probabilities of reinforced designs under independent node
//! faults, and their inversion to the largest tolerable fault probability.
//!
//! A design is described by its region sizes `l_1..l_k` and the fault
//! parameter `f`. For a region of `l` nodes, one index `i` of its copy-sets
//! `{v_i | v in region}` is clean with probability `q = (1-p)^l`; write
//! `a = 1 - q` for the probability it is hit.
//!
//! * Omission (`f + 1` copy-sets): the region is fine unless all copy-sets are
//!   hit, so it fails with probability `a^(f+1)`.
//! * Byzantine (`2f + 1` copy-sets): the region needs at least `f + 1` clean
//!   copy-sets. The count of clean copy-sets is `Binomial(2f+1, q)`, so the
//!   region fails with probability `sum_{j=0}^{f} C(2f+1, j) q^j a^(2f+1-j)`.
//!
//! Copy-sets of different indices and different regions are disjoint sets of
//! nodes, so the network-level failure is `1 - prod_k (1 - fail_k)`. These are
//! the probabilities that the sufficient condition for a successful
//! simulation is violated; the true failure probability of a given program
//! can only be lower.
//!
//! Everything is evaluated through `ln_1p`/`exp_m1` so tiny `p` (where
//! `n p^(f+1)` is far below machine epsilon relative to 1) stays accurate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::reinforce::FaultKind;

/// Default network failure bound: 99% reliability.
pub const DEFAULT_TARGET: f64 = 0.01;

const BISECTION_MAX_ITERATIONS: usize = 200;
const BISECTION_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityQuery {
    pub region_sizes: Vec<usize>,
    pub f: usize,
    pub kind: FaultKind,
    pub p: f64,
}

impl ReliabilityQuery {
    pub fn new(region_sizes: Vec<usize>, f: usize, kind: FaultKind, p: f64) -> Result<Self> {
        if region_sizes.contains(&0) {
            return Err(Error::Argument("region sizes must be >= 1".into()));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Argument(format!("fault probability {p} outside [0, 1]")));
        }
        Ok(Self {
            region_sizes,
            f,
            kind,
            p,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReliabilityReport {
    pub failure_prob: f64,
    pub max_p: f64,
    /// Set when even `p = 1` meets the target.
    pub saturated: bool,
    pub target: f64,
}

pub fn analyze(query: &ReliabilityQuery, target: f64) -> Result<ReliabilityReport> {
    let max = max_tolerable_p(&query.region_sizes, query.f, query.kind, target)?;
    Ok(ReliabilityReport {
        failure_prob: failure(query.kind, &query.region_sizes, query.f, query.p),
        max_p: max.p,
        saturated: max.saturated,
        target,
    })
}

/// Result of inverting a failure curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct MaxP {
    pub p: f64,
    pub saturated: bool,
}

/// Probability that a region of `size` nodes has at least one faulty node in
/// a given copy-set.
#[inline]
fn copy_set_hit(size: usize, p: f64) -> f64 {
    -(size as f64 * (-p).ln_1p()).exp_m1()
}

pub fn region_failure_om(size: usize, f: usize, p: f64) -> f64 {
    copy_set_hit(size, p).powi(f as i32 + 1)
}

pub fn region_failure_byz(size: usize, f: usize, p: f64) -> f64 {
    let hit = copy_set_hit(size, p);
    let clean = 1.0 - hit;
    let ell = 2 * f + 1;
    (0..=f)
        .map(|j| binomial(ell, j) * clean.powi(j as i32) * hit.powi((ell - j) as i32))
        .sum::<f64>()
        .min(1.0)
}

fn combine(region_failures: impl Iterator<Item = f64>) -> f64 {
    let log_ok: f64 = region_failures.map(|x| (-x).ln_1p()).sum();
    -log_ok.exp_m1()
}

/// `1 - prod_i [1 - (1 - (1-p)^{l_i})^{f+1}]`.
pub fn failure_om(sizes: &[usize], f: usize, p: f64) -> f64 {
    combine(sizes.iter().map(|&l| region_failure_om(l, f, p)))
}

/// Probability that some region has at most `f` clean copy-sets out of `2f + 1`.
pub fn failure_byz(sizes: &[usize], f: usize, p: f64) -> f64 {
    combine(sizes.iter().map(|&l| region_failure_byz(l, f, p)))
}

pub fn failure(kind: FaultKind, sizes: &[usize], f: usize, p: f64) -> f64 {
    match kind {
        FaultKind::Omission => failure_om(sizes, f, p),
        FaultKind::Byzantine => failure_byz(sizes, f, p),
    }
}

/// Union-bound estimate from the asymptotic analysis, with `1-(1-p)^l`
/// relaxed to `l p`. Always at least the exact value.
pub fn union_bound(kind: FaultKind, sizes: &[usize], f: usize, p: f64) -> f64 {
    sizes
        .iter()
        .map(|&l| {
            let x = (l as f64 * p).min(1.0);
            match kind {
                FaultKind::Omission => x.powi(f as i32 + 1),
                FaultKind::Byzantine => {
                    let ell = 2 * f + 1;
                    (f + 1..=ell).map(|j| binomial(ell, j) * x.powi(j as i32)).sum()
                }
            }
        })
        .sum()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Largest `p` in `[0, 1]` with `curve(p) <= target`, for a nondecreasing curve.
///
/// Bisection stops after 200 halvings or once the bracket is below `1e-12`
/// relative to its upper end.
pub fn bisect_max_p(curve: impl Fn(f64) -> f64, target: f64) -> Result<MaxP> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::Argument(format!("target {target} must lie in (0, 1)")));
    }
    if curve(1.0) <= target {
        return Ok(MaxP {
            p: 1.0,
            saturated: true,
        });
    }
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..BISECTION_MAX_ITERATIONS {
        if hi - lo <= BISECTION_TOLERANCE * hi {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if curve(mid) <= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(MaxP {
        p: lo,
        saturated: false,
    })
}

pub fn max_tolerable_p(sizes: &[usize], f: usize, kind: FaultKind, target: f64) -> Result<MaxP> {
    bisect_max_p(|p| failure(kind, sizes, f, p), target)
}

/// `k` independent copies of an `n`-node network fail when every copy has a
/// faulty node: `(1 - (1-p)^n)^k`.
pub fn naive_replication_failure(n: usize, copies: usize, p: f64) -> f64 {
    copy_set_hit(n, p).powi(copies as i32)
}

pub fn naive_replication_p(n: usize, copies: usize, target: f64) -> Result<MaxP> {
    if copies < 1 {
        return Err(Error::Argument("need at least one copy".into()));
    }
    bisect_max_p(|p| naive_replication_failure(n, copies, p), target)
}

/// First-order estimate of `p_k / p_1` for naive replication: `(1/target)^(1-1/k)`.
pub fn naive_ratio_estimate(copies: usize, target: f64) -> f64 {
    (1.0 / target).powf(1.0 - 1.0 / copies as f64)
}

/// Survival of the duplicated `n`-path (two disjoint copies, no crossings).
pub fn toy_path_duplicated_survival(n: usize, p: f64) -> f64 {
    1.0 - naive_replication_failure(n, 2, p)
}

/// Lower bound `1 - n h p^2` on delivery along a duplicated path that crosses
/// between the copies every `h` hops.
pub fn toy_path_crossing_lower_bound(n: usize, h: usize, p: f64) -> f64 {
    1.0 - (n * h) as f64 * p * p
}

/// Factor by which the tolerable `p` of an `h`-subcube partition of a
/// `d`-dimensional grid trails the strong construction: `h^(d - 1/2)`.
pub fn threshold_degradation(h: usize, d: usize) -> f64 {
    (h as f64).powf(d as f64 - 0.5)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn zero_probability_never_fails() {
        assert_eq!(failure_om(&[3, 2, 7], 1, 0.0), 0.0);
        assert_eq!(failure_byz(&[3, 2, 7], 2, 0.0), 0.0);
    }

    #[test]
    fn certain_faults_always_fail() {
        assert_eq!(failure_om(&[3, 2], 1, 1.0), 1.0);
        assert_eq!(failure_byz(&[1], 1, 1.0), 1.0);
    }

    // enumerate the 8 fault patterns of three copies
    #[test]
    fn byz_singleton_enumeration() {
        for p in [0.01f64, 0.1, 0.37] {
            let mut fail = 0.0;
            for mask in 0u32..8 {
                let k = mask.count_ones() as i32;
                if k >= 2 {
                    fail += p.powi(k) * (1.0 - p).powi(3 - k);
                }
            }
            assert!((region_failure_byz(1, 1, p) - fail).abs() < 1e-15);
            assert!((fail - (3.0 * p * p * (1.0 - p) + p.powi(3))).abs() < 1e-15);
        }
    }

    // enumerate every fault pattern of a [2,1] design with 2f+1 = 3 copies
    #[test]
    fn byz_enumeration_two_regions() {
        let sizes = [2usize, 1];
        let ell = 3;
        let total: usize = sizes.iter().sum::<usize>() * ell;
        let p = 0.2f64;
        let mut fail = 0.0;
        for mask in 0u32..(1 << total) {
            // node slot = copy_index * 3 + node; region 0 = nodes {0,1}, region 1 = {2}
            let bad = |node: usize, i: usize| mask >> (i * 3 + node) & 1 == 1;
            let clean0 = (0..ell).filter(|&i| !bad(0, i) && !bad(1, i)).count();
            let clean1 = (0..ell).filter(|&i| !bad(2, i)).count();
            if clean0 <= 1 || clean1 <= 1 {
                let k = mask.count_ones() as i32;
                fail += p.powi(k) * (1.0 - p).powi(total as i32 - k);
            }
        }
        assert!((failure_byz(&sizes, 1, p) - fail).abs() < 1e-14);
    }

    #[test]
    fn byz_is_worse_than_om_at_equal_f() {
        let om = failure_om(&[3, 2], 1, 0.01);
        let byz = failure_byz(&[3, 2], 1, 0.01);
        assert!(byz > om);
        assert!((om - 0.00127781006101571).abs() < 1e-15);
        assert!((byz - 0.003763274646189101).abs() < 1e-15);
    }

    #[test]
    fn strong_specialisation() {
        for f in 1..4 {
            for p in [1e-9f64, 1e-4, 0.05, 0.3] {
                let n = 17;
                let x = p.powi(f as i32 + 1);
                // alternating binomial expansion keeps full precision for tiny x
                let exact = if x < 1e-3 {
                    (1..=n)
                        .map(|j| {
                            let c = (0..j).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64);
                            if j % 2 == 1 { c * x.powi(j) } else { -c * x.powi(j) }
                        })
                        .sum()
                } else {
                    1.0 - (1.0 - x).powi(n)
                };
                let got = failure_om(&vec![1; n as usize], f, p);
                assert!((got - exact).abs() <= 1e-12 * exact.max(1e-300), "{f} {p}");
            }
        }
    }

    #[test]
    fn tiny_p_stays_accurate() {
        // n p^2 with p = 1e-9: naive 1 - prod(1 - p^2) rounds to 0
        let got = failure_om(&[1; 100], 1, 1e-9);
        assert!((got / (100.0 * 1e-18) - 1.0).abs() < 1e-9);
    }

    // values frozen from a 40-digit bisection of the closed forms
    #[test]
    fn five_node_operating_points() {
        let a = max_tolerable_p(&[5], 0, FaultKind::Omission, 0.01).unwrap();
        assert!((a.p - 0.0020080483385742).abs() < 1e-12);
        let b = max_tolerable_p(&[5], 1, FaultKind::Omission, 0.01).unwrap();
        assert!((b.p - 0.02085163763902321).abs() < 1e-12);
        let c = max_tolerable_p(&[3, 2], 1, FaultKind::Omission, 0.01).unwrap();
        assert!((c.p - 0.028443641990406421).abs() < 1e-12);
        assert!((failure_om(&[3, 2], 1, 0.0277) - 0.009497010223358764).abs() < 1e-15);
    }

    #[test]
    fn naive_values() {
        let p = naive_replication_p(33, 1, 0.01).unwrap().p;
        assert!((p - 0.000304509259565592).abs() < 1e-12);
        let p1 = naive_replication_p(100, 1, 0.01).unwrap().p;
        let p2 = naive_replication_p(100, 2, 0.01).unwrap().p;
        let p3 = naive_replication_p(100, 3, 0.01).unwrap().p;
        assert!((p1 - 0.000100498308241668).abs() < 1e-12);
        assert!((p2 - 0.001053050309545618).abs() < 1e-12);
        assert!((p3 - 0.002423425247130672).abs() < 1e-12);
        assert!((naive_ratio_estimate(2, 0.01) - 10.0).abs() < 1e-9);
        assert!((naive_ratio_estimate(3, 0.01) - 21.544).abs() < 1e-3);
        assert!(naive_replication_p(10, 0, 0.01).is_err());
    }

    #[test]
    fn saturation_and_bad_target() {
        let r = max_tolerable_p(&[], 1, FaultKind::Omission, 0.01).unwrap();
        assert!(r.saturated && r.p == 1.0);
        assert!(max_tolerable_p(&[2], 1, FaultKind::Omission, 0.0).is_err());
        assert!(max_tolerable_p(&[2], 1, FaultKind::Omission, 1.0).is_err());
    }

    #[test]
    fn toy_path_bounds() {
        for p in [1e-4, 1e-3, 1e-2] {
            let n = 64;
            let h = 4;
            let sizes = vec![h; n / h];
            let exact = 1.0 - failure_om(&sizes, 1, p);
            assert!(exact >= toy_path_crossing_lower_bound(n, h, p));
            let relaxed = 1.0 - (1.0 - (-p * n as f64).exp()).powi(2);
            assert!(toy_path_duplicated_survival(n, p) <= relaxed + 1e-15);
            // crossings beat plain duplication
            assert!(exact >= toy_path_duplicated_survival(n, p));
        }
    }

    #[test]
    fn degradation_factors() {
        assert!((threshold_degradation(5, 2) - 11.18).abs() < 0.01);
        assert!((threshold_degradation(5, 3) - 55.90).abs() < 0.01);
    }

    #[test]
    fn analyze_report() {
        let q = ReliabilityQuery::new(vec![3, 2], 1, FaultKind::Omission, 0.0277).unwrap();
        let r = analyze(&q, 0.01).unwrap();
        assert!(r.failure_prob < 0.01 && r.max_p > 0.0277);
        assert!(ReliabilityQuery::new(vec![0], 1, FaultKind::Omission, 0.1).is_err());
    }

    fn sizes_strategy() -> impl Strategy<Value = Vec<usize>> {
        prop::collection::vec(1usize..12, 1..8)
    }

    proptest! {
        #[test]
        fn monotone_in_p(sizes in sizes_strategy(), f in 0usize..4, a in 0.0f64..1.0, b in 0.0f64..1.0) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            for kind in [FaultKind::Omission, FaultKind::Byzantine] {
                let (x, y) = (failure(kind, &sizes, f, lo), failure(kind, &sizes, f, hi));
                prop_assert!(x <= y + 1e-15);
                prop_assert!((0.0..=1.0).contains(&x));
            }
        }

        #[test]
        fn monotone_in_region_size(sizes in sizes_strategy(), idx in 0usize..8, f in 0usize..3, p in 0.0f64..0.5) {
            let mut bigger = sizes.clone();
            let i = idx % sizes.len();
            bigger[i] += 1;
            for kind in [FaultKind::Omission, FaultKind::Byzantine] {
                prop_assert!(failure(kind, &sizes, f, p) <= failure(kind, &bigger, f, p) + 1e-15);
            }
        }

        #[test]
        fn om_dominates_byz(sizes in sizes_strategy(), f in 0usize..4, p in 0.0f64..1.0) {
            prop_assert!(failure_om(&sizes, f, p) <= failure_byz(&sizes, f, p) + 1e-15);
        }

        #[test]
        fn union_bound_dominates(sizes in sizes_strategy(), f in 0usize..3, p in 0.0f64..0.2) {
            for kind in [FaultKind::Omission, FaultKind::Byzantine] {
                prop_assert!(failure(kind, &sizes, f, p) <= union_bound(kind, &sizes, f, p) + 1e-15);
            }
        }

        #[test]
        fn bisection_round_trip(sizes in sizes_strategy(), f in 0usize..3, target in 1e-4f64..0.5) {
            for kind in [FaultKind::Omission, FaultKind::Byzantine] {
                let m = max_tolerable_p(&sizes, f, kind, target).unwrap();
                prop_assert!(failure(kind, &sizes, f, m.p) <= target);
                if !m.saturated {
                    prop_assert!(failure(kind, &sizes, f, m.p * (1.0 + 1e-6)) > target);
                }
            }
        }
    }
}
