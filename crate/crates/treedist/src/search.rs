//! Candidate thresholds and the search drivers that turn the yes/no
//! decision procedure into an exact distance.
//!
//! The interleaving distance always equals one of finitely many candidate
//! values derived from node heights: cross-tree height gaps, plus half
//! gaps within each tree. The reference driver scans those candidates in
//! ascending order. The fast driver exploits that the decision cost is
//! exponential in a degree bound that grows with the threshold: it first
//! doubles a cap on that bound until the cheapest feasible class is
//! bracketed, then binary-searches the cap, then binary-searches the
//! threshold inside the winning class. No probe ever lands in a class
//! more than twice as expensive as the answer's.

use std::collections::BTreeMap;

use crate::decide::Engine;
use crate::rational::Rational;
use crate::tree::{merge_degree_bound, MergeTree};

/// Which source lists produced a candidate value.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Provenance {
    /// A cross-tree height gap `|f(u) - g(w)|`.
    pub cross: bool,
    /// Half a height gap within the first tree, `|f(u) - f(u')| / 2`.
    pub within_first: bool,
    /// Half a height gap within the second tree, `|g(w) - g(w')| / 2`.
    pub within_second: bool,
}

/// Strictly sorted candidate thresholds, each tagged with provenance.
///
/// Always contains 0 (the gap of a node with itself), so the set is
/// never empty.
#[derive(Clone, Debug)]
pub struct CandidateSet {
    /// Strictly increasing threshold values.
    pub values: Vec<Rational>,
    /// Parallel to `values`.
    pub provenance: Vec<Provenance>,
}

impl CandidateSet {
    /// Number of candidate values.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    /// Never true: 0 is always a candidate.
    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// All thresholds at which the answer to "is the interleaving distance
/// at most delta?" can flip: cross-tree height gaps and half gaps within
/// each tree, sorted and deduplicated.
pub fn candidate_set(t1: &MergeTree, t2: &MergeTree) -> CandidateSet {
    let mut merged: BTreeMap<Rational, Provenance> = BTreeMap::new();
    let h1: Vec<&Rational> = t1.node_ids().map(|v| t1.height(v)).collect();
    let h2: Vec<&Rational> = t2.node_ids().map(|w| t2.height(w)).collect();
    for &f in &h1 {
        for &g in &h2 {
            merged.entry((f - g).abs()).or_default().cross = true;
        }
    }
    for (i, &f) in h1.iter().enumerate() {
        for &f2 in &h1[i..] {
            merged.entry((f - f2).abs().half()).or_default().within_first = true;
        }
    }
    for (i, &g) in h2.iter().enumerate() {
        for &g2 in &h2[i..] {
            merged.entry((g - g2).abs().half()).or_default().within_second = true;
        }
    }
    let (values, provenance) = merged.into_iter().unzip();
    CandidateSet { values, provenance }
}

/// Counters from one search run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SearchStats {
    /// Decision-procedure invocations (cache hits not counted).
    pub decide_calls: u64,
    /// Degree-bound evaluations (cache hits not counted).
    pub tau_evaluations: u64,
    /// Largest degree bound among candidates that were actually decided.
    pub max_tau_probed: usize,
}

/// The interleaving distance, by ascending linear scan over the
/// candidate set. Reference implementation for the fast driver.
pub fn compute_interleaving_scan(t1: &MergeTree, t2: &MergeTree, engine: Engine) -> Rational {
    compute_interleaving_scan_report(t1, t2, engine).0
}

/// [`compute_interleaving_scan`] with search counters.
pub fn compute_interleaving_scan_report(
    t1: &MergeTree,
    t2: &MergeTree,
    engine: Engine,
) -> (Rational, SearchStats) {
    let candidates = candidate_set(t1, t2);
    let mut stats = SearchStats::default();
    for delta in &candidates.values {
        stats.decide_calls += 1;
        if engine.decide(t1, t2, delta) {
            return (delta.clone(), stats);
        }
    }
    panic!(
        "no candidate threshold was feasible, including the maximum {}; \
         the decision procedure violates its contract",
        candidates.values.last().expect("candidates are never empty")
    );
}

/// Probes the right end of `range` (inclusive index pair into
/// `candidates`); if infeasible there, no threshold in the range can be
/// feasible and the result is `None`. Otherwise binary-searches the
/// smallest feasible index and returns its value. `probe` must be
/// monotone over the range.
pub fn smallest_valid_delta(
    candidates: &CandidateSet,
    range: (usize, usize),
    probe: &mut dyn FnMut(usize) -> bool,
) -> Option<Rational> {
    let (lo, hi) = range;
    debug_assert!(lo <= hi && hi < candidates.len());
    if !probe(hi) {
        return None;
    }
    let index = smallest_true_in(lo, hi, probe);
    Some(candidates.values[index].clone())
}

// Smallest index in [lo, hi] where `probe` is true, given that `probe`
// is monotone and already known true at `hi` (which is not re-probed).
fn smallest_true_in(lo: usize, hi: usize, probe: &mut dyn FnMut(usize) -> bool) -> usize {
    let (mut lo, mut hi) = (lo, hi);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if probe(mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    lo
}

/// Smallest index with `feasible` true, probing cheap classes first.
///
/// `class_of` maps a candidate index to its cost class and must be
/// non-decreasing with values >= 1; `feasible` must be monotone and true
/// at the last index (violations panic). Caps on the class are doubled
/// from 1 until the right end of the covered prefix turns feasible, the
/// smallest feasible cap is then binary-searched, and the answer lies in
/// the index block that cap adds. Every index probed has class at most
/// twice the answer's class. Both closures should memoize; the driver
/// may revisit indices.
pub(crate) fn double_binary_smallest_true(
    len: usize,
    class_of: &mut dyn FnMut(usize) -> usize,
    feasible: &mut dyn FnMut(usize) -> bool,
) -> usize {
    assert!(len >= 1);
    // A lone candidate needs no probe: some candidate is feasible by
    // contract, so it is the one.
    if len == 1 {
        return 0;
    }
    if feasible(0) {
        return 0;
    }
    // Largest index whose class is within the cap, if any.
    let covered = |class_of: &mut dyn FnMut(usize) -> usize, cap: usize| -> Option<usize> {
        let mut lo = 0usize;
        let mut hi = len;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if class_of(mid) <= cap {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        lo.checked_sub(1)
    };
    let cap_feasible = |class_of: &mut dyn FnMut(usize) -> usize,
                            feasible: &mut dyn FnMut(usize) -> bool,
                            cap: usize|
     -> bool {
        match covered(class_of, cap) {
            None => false,
            Some(right) => {
                let ok = feasible(right);
                assert!(
                    ok || right + 1 < len,
                    "no candidate threshold was feasible; the decision \
                     procedure violates its contract"
                );
                ok
            }
        }
    };
    // Double the cap until the covered prefix turns feasible.
    let mut failed = 0usize;
    let mut cap = 1usize;
    while !cap_feasible(class_of, feasible, cap) {
        failed = cap;
        cap *= 2;
    }
    // Smallest feasible cap in (failed, cap]; caps below `failed + 1`
    // are known infeasible.
    let (mut lo, mut hi) = (failed + 1, cap);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if cap_feasible(class_of, feasible, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    let best_cap = lo;
    // Indices covered by best_cap - 1 are all infeasible; the answer is
    // in the block that best_cap adds, whose right end is feasible.
    let right = covered(class_of, best_cap).expect("feasible cap covers a prefix");
    let left = match covered(class_of, best_cap - 1) {
        None => 0,
        Some(prev) => prev + 1,
    };
    smallest_true_in(left, right, feasible)
}

/// The interleaving distance, by the capped double binary search.
/// Agrees with [`compute_interleaving_scan`] everywhere.
pub fn compute_interleaving(t1: &MergeTree, t2: &MergeTree, engine: Engine) -> Rational {
    compute_interleaving_report(t1, t2, engine).0
}

/// [`compute_interleaving`] with search counters.
pub fn compute_interleaving_report(
    t1: &MergeTree,
    t2: &MergeTree,
    engine: Engine,
) -> (Rational, SearchStats) {
    let candidates = candidate_set(t1, t2);
    let mut stats = SearchStats::default();
    let mut tau_cache: BTreeMap<usize, usize> = BTreeMap::new();
    let mut decide_cache: BTreeMap<usize, bool> = BTreeMap::new();
    let index = {
        let mut class_of = |i: usize| -> usize {
            if let Some(&tau) = tau_cache.get(&i) {
                return tau;
            }
            stats.tau_evaluations += 1;
            let tau = merge_degree_bound(t1, t2, &candidates.values[i]);
            tau_cache.insert(i, tau);
            tau
        };
        let mut stats_tau = SearchStats::default();
        let mut feasible = |i: usize| -> bool {
            if let Some(&known) = decide_cache.get(&i) {
                return known;
            }
            stats_tau.decide_calls += 1;
            let answer = engine.decide(t1, t2, &candidates.values[i]);
            decide_cache.insert(i, answer);
            answer
        };
        let index = double_binary_smallest_true(candidates.len(), &mut class_of, &mut feasible);
        stats.decide_calls = stats_tau.decide_calls;
        index
    };
    stats.max_tau_probed = decide_cache
        .keys()
        .map(|&i| merge_degree_bound(t1, t2, &candidates.values[i]))
        .max()
        .unwrap_or(0);
    (candidates.values[index].clone(), stats)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::validate_merge_tree;

    fn q(s: &str) -> Rational {
        Rational::parse(s).unwrap()
    }

    fn merge(nodes: &[(&str, &str)], edges: &[(&str, &str)]) -> MergeTree {
        let nodes: Vec<(String, Rational)> = nodes
            .iter()
            .map(|(name, h)| (name.to_string(), q(h)))
            .collect();
        let edges: Vec<(String, String)> = edges
            .iter()
            .map(|(c, p)| (c.to_string(), p.to_string()))
            .collect();
        validate_merge_tree(&nodes, &edges).unwrap()
    }

    #[test]
    fn candidates_merge_cross_and_within_gaps() {
        // Heights {0, 5} against {1, 7}: cross gaps {1, 7, 4, 2}, half
        // gaps {0, 5/2} and {0, 3}.
        let t1 = merge(&[("a", "0"), ("r", "5")], &[("a", "r")]);
        let t2 = merge(&[("b", "1"), ("s", "7")], &[("b", "s")]);
        let set = candidate_set(&t1, &t2);
        let expected: Vec<Rational> = ["0", "1", "2", "5/2", "3", "4", "7"]
            .iter()
            .map(|s| q(s))
            .collect();
        assert_eq!(set.values, expected);
        let tagged: Vec<(bool, bool, bool)> = set
            .provenance
            .iter()
            .map(|p| (p.cross, p.within_first, p.within_second))
            .collect();
        assert_eq!(
            tagged,
            vec![
                (false, true, true),  // 0
                (true, false, false), // 1
                (true, false, false), // 2
                (false, true, false), // 5/2
                (false, false, true), // 3
                (true, false, false), // 4
                (true, false, false), // 7
            ]
        );
    }

    #[test]
    fn candidates_contain_zero_and_are_sorted() {
        let t1 = merge(&[("a", "3")], &[]);
        let t2 = merge(&[("b", "10")], &[]);
        let set = candidate_set(&t1, &t2);
        assert_eq!(set.values, vec![q("0"), q("7")]);
        assert!(set.provenance[0].within_first && set.provenance[0].within_second);
        assert!(set.provenance[1].cross);
        let same = candidate_set(&t1, &t1);
        assert_eq!(same.values[0], q("0"));
        assert!(same.provenance[0].cross);
    }

    #[test]
    fn scan_pins_known_distances() {
        let t = merge(
            &[("x", "0"), ("y", "1"), ("m", "2"), ("r", "4")],
            &[("x", "m"), ("y", "m"), ("m", "r")],
        );
        assert_eq!(compute_interleaving_scan(&t, &t, Engine::Fast), q("0"));
        assert_eq!(compute_interleaving_scan(&t, &t, Engine::Slow), q("0"));

        let a = merge(&[("a", "0")], &[]);
        let b = merge(&[("b", "3")], &[]);
        assert_eq!(compute_interleaving_scan(&a, &b, Engine::Fast), q("3"));

        // Two leaves merging at 4 against a single point: the branch must
        // collapse, and 2 is a half gap within the first tree.
        let fork = merge(
            &[("x", "0"), ("y", "0"), ("r", "4")],
            &[("x", "r"), ("y", "r")],
        );
        let point = merge(&[("p", "0")], &[]);
        assert_eq!(compute_interleaving_scan(&fork, &point, Engine::Fast), q("2"));
        assert_eq!(compute_interleaving_scan(&point, &fork, Engine::Slow), q("2"));
    }

    #[test]
    fn smallest_valid_delta_binary_searches_the_range() {
        let t1 = merge(&[("a", "0"), ("r", "5")], &[("a", "r")]);
        let t2 = merge(&[("b", "1"), ("s", "7")], &[("b", "s")]);
        let candidates = candidate_set(&t1, &t2);

        // Single-index range, feasible: that value, one probe.
        let mut probes = 0u32;
        let got = smallest_valid_delta(&candidates, (2, 2), &mut |i| {
            probes += 1;
            i >= 2
        });
        assert_eq!(got, Some(q("2")));
        assert_eq!(probes, 1);

        // Infeasible right endpoint: none, one probe.
        probes = 0;
        let got = smallest_valid_delta(&candidates, (0, 3), &mut |_| {
            probes += 1;
            false
        });
        assert_eq!(got, None);
        assert_eq!(probes, 1);

        // Three candidates (false, true, true): the middle one, found
        // with two probes after the endpoint test.
        probes = 0;
        let got = smallest_valid_delta(&candidates, (1, 3), &mut |i| {
            probes += 1;
            i >= 2
        });
        assert_eq!(got, Some(q("2")));
        assert_eq!(probes, 3);
    }

    #[test]
    fn double_binary_matches_direct_scan_on_synthetic_predicates() {
        // Classes 1,1,2,2,4,7,7,8 with every possible flip point.
        let classes = [1usize, 1, 2, 2, 4, 7, 7, 8];
        for flip in 0..classes.len() {
            let mut class_of = |i: usize| classes[i];
            let mut feasible = |i: usize| i >= flip;
            let got =
                double_binary_smallest_true(classes.len(), &mut class_of, &mut feasible);
            assert_eq!(got, flip, "flip at {flip}");
        }
    }

    #[test]
    fn double_binary_single_candidate_probes_nothing() {
        let mut class_of = |_: usize| -> usize { panic!("no class query expected") };
        let mut feasible = |_: usize| -> bool { panic!("no probe expected") };
        assert_eq!(
            double_binary_smallest_true(1, &mut class_of, &mut feasible),
            0
        );
    }

    #[test]
    #[should_panic(expected = "violates its contract")]
    fn double_binary_rejects_all_false_predicates() {
        let mut class_of = |_: usize| 1usize;
        let mut feasible = |_: usize| false;
        double_binary_smallest_true(4, &mut class_of, &mut feasible);
    }

    #[test]
    fn fast_driver_agrees_with_scan_and_respects_the_probe_budget() {
        let pairs = [
            (
                merge(
                    &[("x", "0"), ("y", "1"), ("m", "2"), ("r", "4")],
                    &[("x", "m"), ("y", "m"), ("m", "r")],
                ),
                merge(&[("b", "2"), ("s", "6")], &[("b", "s")]),
            ),
            (
                merge(
                    &[("x", "0"), ("y", "0"), ("r", "4")],
                    &[("x", "r"), ("y", "r")],
                ),
                merge(&[("p", "0")], &[]),
            ),
            (merge(&[("a", "0")], &[]), merge(&[("b", "3")], &[])),
        ];
        for (t1, t2) in &pairs {
            let scanned = compute_interleaving_scan(t1, t2, Engine::Fast);
            let (fast, stats) = compute_interleaving_report(t1, t2, Engine::Fast);
            assert_eq!(fast, scanned);
            let tau_at_answer = merge_degree_bound(t1, t2, &fast);
            assert!(
                stats.max_tau_probed <= 2 * tau_at_answer,
                "probed class {} exceeds twice the answer's class {}",
                stats.max_tau_probed,
                tau_at_answer
            );
        }
    }

    #[test]
    fn identical_trees_need_no_probes_beyond_the_first() {
        let t = merge(&[("a", "0"), ("r", "5")], &[("a", "r")]);
        let (value, stats) = compute_interleaving_report(&t, &t, Engine::Fast);
        assert_eq!(value, q("0"));
        assert_eq!(stats.decide_calls, 1);
    }
}
