//! Decision procedures: is the interleaving distance at most delta?
//!
//! Both engines cut the two trees at aligned super-levels and fill a
//! feasibility table bottom-up. An entry F(S, w) says whether the
//! subtrees hanging below the set S (first tree) can be mapped into the
//! subtree below w (second tree) compatibly with a height shift of delta.
//! A pair is feasible iff the children of S can be partitioned among the
//! children of w so that every nonempty class is feasible one level down
//! and every empty class leaves at most `2*delta - gap` of tree hanging
//! below its child.
//!
//! The slow engine tabulates every valid pair. The fast engine tabulates
//! only sensible pairs (those near an original node) and resolves other
//! lookups through the supporting-edge index: the value of a valid but
//! not sensible pair equals the value of the highest indexed pair with
//! the same supporting edges strictly below it, or is infeasible if no
//! such pair exists.

use std::collections::BTreeMap;

use crate::augment::{
    augment, build_super_levels, edge_list_of, enumerate_sensible_pairs,
    enumerate_valid_pairs_level, AugId, AugmentedTree, EdgeListIndex, ValidPair,
};
use crate::rational::Rational;
use crate::tree::{MergePoint, MergeTree};

/// Selects which decision engine answers threshold queries.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Engine {
    /// Tabulate every valid pair.
    Slow,
    /// Tabulate sensible pairs only, resolving the rest through the
    /// supporting-edge index. The default.
    #[default]
    Fast,
}

impl Engine {
    /// Runs the selected engine.
    pub fn decide(self, t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> bool {
        match self {
            Engine::Slow => decide_slow(t1, t2, delta),
            Engine::Fast => decide_fast(t1, t2, delta),
        }
    }

    /// Runs the selected engine and returns its counters.
    pub fn decide_report(self, t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> DecideReport {
        match self {
            Engine::Slow => decide_slow_report(t1, t2, delta),
            Engine::Fast => decide_fast_report(t1, t2, delta),
        }
    }
}

/// Feasibility values keyed by (level, set, node).
#[derive(Default, Debug)]
pub struct FeasibilityTable {
    entries: BTreeMap<(usize, Vec<AugId>, AugId), bool>,
}

impl FeasibilityTable {
    /// Records the value of a pair.
    pub fn insert(&mut self, level: usize, s: Vec<AugId>, w: AugId, value: bool) {
        self.entries.insert((level, s, w), value);
    }

    /// Looks a pair up.
    pub fn get(&self, level: usize, s: &[AugId], w: AugId) -> Option<bool> {
        self.entries.get(&(level, s.to_vec(), w)).copied()
    }

    /// Number of entries currently held.
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    /// True iff no entries are held.
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Drops all entries below `level`; the slow engine calls this as
    /// levels complete since only the previous level is ever consulted.
    pub fn discard_below(&mut self, level: usize) {
        self.entries.retain(|key, _| key.0 >= level);
    }
}

/// Counters from one decision run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecideReport {
    /// The decision: true iff the interleaving distance is at most delta.
    pub answer: bool,
    /// Pairs whose feasibility was computed (valid pairs for the slow
    /// engine, sensible pairs for the fast one).
    pub pairs_inspected: u64,
    /// Largest set size |S| among inspected pairs.
    pub max_set_size: usize,
    /// Largest child-set size |C(S)| among inspected pairs.
    pub max_child_set_size: usize,
    /// Fullest supporting-edge bucket (fast engine only; 0 for slow).
    pub max_bucket_len: usize,
    /// Number of aligned levels.
    pub levels: usize,
}

/// Sorted union of the children of the set members. Distinct same-level
/// nodes have disjoint children, so this is duplicate-free.
pub fn child_set(a1: &AugmentedTree, s: &[AugId]) -> Vec<AugId> {
    let mut out: Vec<AugId> = s.iter().flat_map(|&id| a1.children(id)).copied().collect();
    out.sort_unstable();
    out
}

/// One feasibility step for `pair`, consulting `child_value` for the
/// values of nonempty classes one level down.
///
/// Children of `w` with no assigned child of S are allowed only if the
/// whole subtree below them fits in `2*delta` minus the level gap.
/// Assignment classes are grown in canonical child order and pruned as
/// soon as their lowest common ancestor rises past the shared-ancestor
/// bound, mirroring "an invalid class is infeasible outright".
pub fn feasibility_recurrence(
    a1: &AugmentedTree,
    a2: &AugmentedTree,
    two_delta: &Rational,
    pair: &ValidPair,
    child_value: &mut dyn FnMut(&[AugId], AugId) -> bool,
) -> bool {
    let cs = child_set(a1, &pair.s);
    let wc: Vec<AugId> = a2.children(pair.w).to_vec();
    if wc.is_empty() {
        return cs.is_empty();
    }
    // w has children, so a level exists below this one.
    debug_assert!(pair.level >= 1);
    let gap = a2.level_height(pair.level) - a2.level_height(pair.level - 1);
    let slack = two_delta - &gap;
    // A negative slack simply makes every empty class infeasible, since
    // depths are never negative.
    let empty_ok: Vec<bool> = wc.iter().map(|&wj| a2.depth_below(wj) <= slack).collect();
    if cs.is_empty() {
        return empty_ok.iter().all(|&ok| ok);
    }
    let limit = a1.level_height(pair.level - 1) + two_delta;
    let mut classes: Vec<Vec<AugId>> = vec![Vec::new(); wc.len()];
    let mut lcas: Vec<Option<MergePoint>> = vec![None; wc.len()];
    assign(
        a1,
        &cs,
        0,
        &mut classes,
        &mut lcas,
        &limit,
        &empty_ok,
        &wc,
        child_value,
    )
}

// Depth-first assignment of cs[idx..] to classes; true iff some complete
// assignment satisfies both feasibility rules.
#[allow(clippy::too_many_arguments)]
fn assign(
    a1: &AugmentedTree,
    cs: &[AugId],
    idx: usize,
    classes: &mut [Vec<AugId>],
    lcas: &mut [Option<MergePoint>],
    limit: &Rational,
    empty_ok: &[bool],
    wc: &[AugId],
    child_value: &mut dyn FnMut(&[AugId], AugId) -> bool,
) -> bool {
    if idx == cs.len() {
        return (0..wc.len()).all(|j| {
            if classes[j].is_empty() {
                empty_ok[j]
            } else {
                child_value(&classes[j], wc[j])
            }
        });
    }
    let point = a1.point_of(cs[idx]);
    for j in 0..wc.len() {
        let joined = match &lcas[j] {
            None => point.clone(),
            Some(current) => a1.base().lca(current, &point),
        };
        // Classes whose common ancestor has risen past the bound can
        // never become valid again: members only push the ancestor up.
        if joined.height > *limit {
            continue;
        }
        let saved = lcas[j].replace(joined);
        classes[j].push(cs[idx]);
        if assign(a1, cs, idx + 1, classes, lcas, limit, empty_ok, wc, child_value) {
            return true;
        }
        classes[j].pop();
        lcas[j] = saved;
    }
    false
}

/// True iff the interleaving distance between `t1` and `t2` is at most
/// `delta`, by the exhaustive valid-pair table. Requires `delta >= 0`.
pub fn decide_slow(t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> bool {
    decide_slow_report(t1, t2, delta).answer
}

/// [`decide_slow`] with counters.
pub fn decide_slow_report(t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> DecideReport {
    assert!(!delta.is_negative(), "decision threshold must be >= 0");
    let sl = build_super_levels(t1, t2, delta);
    let a1 = augment(t1, &sl.heights1).expect("levels cover every node height");
    let a2 = augment(t2, &sl.heights2).expect("levels cover every node height");
    let two_delta = delta + delta;
    let mut table = FeasibilityTable::default();
    let mut report = DecideReport {
        levels: sl.len(),
        ..DecideReport::default()
    };
    for level in 0..sl.len() {
        for pair in enumerate_valid_pairs_level(&a1, &a2, level, &two_delta) {
            let value = feasibility_recurrence(&a1, &a2, &two_delta, &pair, &mut |s, w| {
                table
                    .get(level - 1, s, w)
                    .expect("valid child pairs are tabulated")
            });
            note_pair(&mut report, &a1, &pair);
            table.insert(level, pair.s, pair.w, value);
        }
        if level >= 1 {
            table.discard_below(level);
        }
    }
    report.answer = root_answer(&table, &a1, &a2);
    report
}

/// True iff the interleaving distance between `t1` and `t2` is at most
/// `delta`, tabulating only sensible pairs and resolving other lookups
/// through the supporting-edge index. Requires `delta >= 0`.
pub fn decide_fast(t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> bool {
    decide_fast_report(t1, t2, delta).answer
}

/// [`decide_fast`] with counters.
pub fn decide_fast_report(t1: &MergeTree, t2: &MergeTree, delta: &Rational) -> DecideReport {
    assert!(!delta.is_negative(), "decision threshold must be >= 0");
    let sl = build_super_levels(t1, t2, delta);
    let a1 = augment(t1, &sl.heights1).expect("levels cover every node height");
    let a2 = augment(t2, &sl.heights2).expect("levels cover every node height");
    let two_delta = delta + delta;
    let (per_level, index) = enumerate_sensible_pairs(&a1, &a2, delta);
    let flags1 = a1.original_adjacent_flags();
    let flags2 = a2.original_adjacent_flags();
    let mut table = FeasibilityTable::default();
    let mut report = DecideReport {
        levels: sl.len(),
        max_bucket_len: index.max_bucket_len(),
        ..DecideReport::default()
    };
    for (level, row) in per_level.iter().enumerate() {
        for pair in row {
            let value = feasibility_recurrence(&a1, &a2, &two_delta, pair, &mut |s, w| {
                if s.iter().any(|&id| flags1[id]) || flags2[w] {
                    table
                        .get(level - 1, s, w)
                        .expect("sensible child pairs are tabulated")
                } else {
                    substitute_value(&a1, &a2, &index, &table, level - 1, s, w)
                }
            });
            note_pair(&mut report, &a1, pair);
            table.insert(level, pair.s.clone(), pair.w, value);
        }
    }
    report.answer = root_answer(&table, &a1, &a2);
    report
}

// Value of a valid but not sensible pair: the value of the highest
// indexed pair with the same supporting edges strictly below it;
// infeasible when no such pair exists.
fn substitute_value(
    a1: &AugmentedTree,
    a2: &AugmentedTree,
    index: &EdgeListIndex,
    table: &FeasibilityTable,
    level: usize,
    s: &[AugId],
    w: AugId,
) -> bool {
    let key = edge_list_of(a1, s, a2, w);
    match index.highest_below(&key, level) {
        None => false,
        Some(entry) => table
            .get(entry.level, &entry.s, entry.w)
            .expect("indexed pairs are tabulated before higher levels"),
    }
}

fn note_pair(report: &mut DecideReport, a1: &AugmentedTree, pair: &ValidPair) {
    report.pairs_inspected += 1;
    report.max_set_size = report.max_set_size.max(pair.s.len());
    report.max_child_set_size = report
        .max_child_set_size
        .max(child_set(a1, &pair.s).len());
}

// The top level holds exactly one node per tree and that pair is always
// tabulated (it is valid, and sensible: the level heights peak at one of
// the two root heights, making one of the two top nodes original).
fn root_answer(table: &FeasibilityTable, a1: &AugmentedTree, a2: &AugmentedTree) -> bool {
    let top = a1.level_count() - 1;
    table
        .get(top, &[a1.root()], a2.root())
        .expect("top pair is tabulated")
}
