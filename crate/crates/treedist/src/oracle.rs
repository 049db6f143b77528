//! Independent brute-force references for differential testing.
//!
//! These enumerate the relevant search spaces directly, with no pruning
//! tables, no memoization, and no sensible-pair restriction, so they
//! exercise none of the machinery they check. They are deliberately slow
//! and guarded by size and work caps.

use num::bigint::BigInt;
use num::{Integer, Signed};
use thiserror::Error;

use crate::augment::{augment, build_super_levels, AugId, AugmentedTree};
use crate::rational::Rational;
use crate::search::candidate_set;
use crate::tree::{MergePoint, MergeTree, MetricTree};

/// Enumeration guards. Fixed defaults, overridable per call.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleCaps {
    /// Upper bound on the instance size index (augmented node count
    /// times level count for decisions; node count for the metric
    /// oracle).
    pub size_cap: u64,
    /// Upper bound on enumeration states visited in one call.
    pub work_cap: u64,
}

impl Default for OracleCaps {
    fn default() -> Self {
        OracleCaps {
            size_cap: 4096,
            work_cap: 5_000_000,
        }
    }
}

/// Why a brute-force run refused to finish.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    /// The instance is too large to enumerate exhaustively.
    #[error("instance size index {size} exceeds the oracle cap {cap}")]
    SizeCap {
        /// Computed size index of the offending instance.
        size: u64,
        /// The configured bound.
        cap: u64,
    },
    /// Enumeration was cut off mid-run.
    #[error("exhaustive enumeration exceeded its work cap of {cap} states")]
    WorkCap {
        /// The configured bound.
        cap: u64,
    },
}

/// True iff the interleaving distance is at most `delta`, by exhaustive
/// enumeration of all level-aligned parent-consistent assignments
/// between the augmented trees, each checked against the ancestry and
/// coverage conditions. Requires `delta >= 0`.
pub fn brute_force_decide(
    t1: &MergeTree,
    t2: &MergeTree,
    delta: &Rational,
    caps: OracleCaps,
) -> Result<bool, OracleError> {
    assert!(!delta.is_negative(), "decision threshold must be >= 0");
    let sl = build_super_levels(t1, t2, delta);
    let a1 = augment(t1, &sl.heights1).expect("levels cover every node height");
    let a2 = augment(t2, &sl.heights2).expect("levels cover every node height");
    let size = (a1.node_count() as u64) * (sl.len() as u64);
    if size > caps.size_cap {
        return Err(OracleError::SizeCap {
            size,
            cap: caps.size_cap,
        });
    }
    let two_delta = delta + delta;
    // The image must sit exactly `2 * delta` below each node's lifted
    // ancestor; precompute the lifts once.
    let lifts: Vec<MergePoint> = (0..a1.node_count())
        .map(|id| t1.ancestor_at(&a1.point_of(id), &two_delta))
        .collect();
    let points2: Vec<MergePoint> = (0..a2.node_count()).map(|id| a2.point_of(id)).collect();
    let mut search = MapSearch {
        a1: &a1,
        a2: &a2,
        t1,
        t2,
        two_delta,
        lifts,
        points2,
        assignment: vec![0; a1.node_count()],
        work: 0,
        work_cap: caps.work_cap,
    };
    search.next_node(0)
}

struct MapSearch<'a> {
    a1: &'a AugmentedTree,
    a2: &'a AugmentedTree,
    t1: &'a MergeTree,
    t2: &'a MergeTree,
    two_delta: Rational,
    lifts: Vec<MergePoint>,
    points2: Vec<MergePoint>,
    // Image of each first-tree node; entries at indices >= the recursion
    // frontier are stale.
    assignment: Vec<AugId>,
    work: u64,
    work_cap: u64,
}

impl MapSearch<'_> {
    // Ids are assigned level by level from the bottom, so walking them in
    // order assigns each node after all its children.
    fn next_node(&mut self, v: AugId) -> Result<bool, OracleError> {
        if v == self.a1.node_count() {
            return Ok(self.covered_within_reach());
        }
        let children = self.a1.children(v);
        if children.is_empty() {
            let level = self.a1.node(v).level;
            for i in 0..self.a2.level_nodes(level).len() {
                let image = self.a2.level_nodes(level)[i];
                if self.try_image(v, image)? {
                    return Ok(true);
                }
            }
            return Ok(false);
        }
        // Parent-consistency forces the image: every child's image must
        // share one parent, which becomes the image of v.
        let forced = self.a2.parent(self.assignment[children[0]]);
        let image = match forced {
            Some(image) => image,
            None => return Ok(false),
        };
        if children[1..]
            .iter()
            .any(|&c| self.a2.parent(self.assignment[c]) != Some(image))
        {
            return Ok(false);
        }
        self.try_image(v, image)
    }

    fn try_image(&mut self, v: AugId, image: AugId) -> Result<bool, OracleError> {
        self.work += 1;
        if self.work > self.work_cap {
            return Err(OracleError::WorkCap { cap: self.work_cap });
        }
        self.assignment[v] = image;
        // Comparable images must come from nodes whose lifts are
        // comparable the same way; check v against everything assigned,
        // in both orders. A violated pair stays violated in every
        // extension, so pruning here is sound.
        for u in 0..v {
            let (pu, pv) = (&self.points2[self.assignment[u]], &self.points2[image]);
            if self.t2.is_ancestor(pu, pv) && !self.t1.is_ancestor(&self.lifts[u], &self.lifts[v]) {
                return Ok(false);
            }
            if self.t2.is_ancestor(pv, pu) && !self.t1.is_ancestor(&self.lifts[v], &self.lifts[u]) {
                return Ok(false);
            }
        }
        self.next_node(v + 1)
    }

    // Every second-tree node outside the image must have its lowest
    // image-ancestor within `2 * delta` above it.
    fn covered_within_reach(&self) -> bool {
        let mut in_image = vec![false; self.a2.node_count()];
        for &image in &self.assignment {
            in_image[image] = true;
        }
        for w in 0..self.a2.node_count() {
            if in_image[w] {
                continue;
            }
            let mut above = w;
            while !in_image[above] {
                above = self
                    .a2
                    .parent(above)
                    .expect("the top node is always in the image");
            }
            let gap = &self.a2.node(above).height - &self.a2.node(w).height;
            if gap > self.two_delta {
                return false;
            }
        }
        true
    }
}

/// The interleaving distance, as the smallest candidate threshold that
/// [`brute_force_decide`] accepts.
pub fn brute_force_interleaving(
    t1: &MergeTree,
    t2: &MergeTree,
    caps: OracleCaps,
) -> Result<Rational, OracleError> {
    let candidates = candidate_set(t1, t2);
    for delta in &candidates.values {
        if brute_force_decide(t1, t2, delta, caps)? {
            return Ok(delta.clone());
        }
    }
    panic!(
        "no candidate threshold was feasible, including the maximum {}; \
         the enumeration violates its contract",
        candidates.values.last().expect("candidates are never empty")
    );
}

/// Gromov-Hausdorff distance between the node sets: half the minimum,
/// over all function pairs `phi: V1 -> V2` and `psi: V2 -> V1`, of the
/// largest metric distortion within the union of their graphs. Every
/// correspondence contains such a union and distortion only grows with
/// more pairs, so the minimum over these unions is the true discrete
/// value. Instances with more than 5 nodes per side are refused.
pub fn brute_force_gh_discrete(m1: &MetricTree, m2: &MetricTree) -> Result<Rational, OracleError> {
    let (n1, n2) = (m1.node_count(), m2.node_count());
    let size = n1.max(n2) as u64;
    if size > 5 {
        return Err(OracleError::SizeCap { size, cap: 5 });
    }
    // Clear denominators once so the branch-and-bound compares plain big
    // integers.
    let d1: Vec<Vec<Rational>> = (0..n1).map(|u| m1.distances_from(u)).collect();
    let d2: Vec<Vec<Rational>> = (0..n2).map(|w| m2.distances_from(w)).collect();
    let mut scale = BigInt::from(1);
    for row in d1.iter().chain(d2.iter()) {
        for value in row {
            scale = scale.lcm(value.denom());
        }
    }
    let scaled = |d: &Rational| -> BigInt { d.numer() * (&scale / d.denom()) };
    let s1: Vec<Vec<BigInt>> = d1.iter().map(|row| row.iter().map(scaled).collect()).collect();
    let s2: Vec<Vec<BigInt>> = d2.iter().map(|row| row.iter().map(scaled).collect()).collect();

    let mut best: Option<BigInt> = None;
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(n1 + n2);
    distort(&s1, &s2, &mut pairs, &BigInt::from(0), &mut best);
    let best = best.expect("every function pair yields a finite distortion");
    Ok(Rational::from_big(best, BigInt::from(2) * scale))
}

// Branch and bound over the n1 + n2 assignment slots: first phi's values
// in node order, then psi's. The running maximum distortion only grows,
// so any branch at or past the incumbent is cut.
fn distort(
    s1: &[Vec<BigInt>],
    s2: &[Vec<BigInt>],
    pairs: &mut Vec<(usize, usize)>,
    so_far: &BigInt,
    best: &mut Option<BigInt>,
) {
    let (n1, n2) = (s1.len(), s2.len());
    let slot = pairs.len();
    if slot == n1 + n2 {
        // Pruning keeps only strictly improving branches alive, so a
        // completed assignment always beats the incumbent.
        *best = Some(so_far.clone());
        return;
    }
    let choices: Vec<(usize, usize)> = if slot < n1 {
        (0..n2).map(|y| (slot, y)).collect()
    } else {
        (0..n1).map(|x| (x, slot - n1)).collect()
    };
    for (x, y) in choices {
        let mut grown = so_far.clone();
        for &(px, py) in pairs.iter() {
            let gap = (&s1[x][px] - &s2[y][py]).abs();
            if gap > grown {
                grown = gap;
            }
        }
        if let Some(b) = best {
            if grown >= *b {
                continue;
            }
        }
        pairs.push((x, y));
        distort(s1, s2, pairs, &grown, best);
        pairs.pop();
    }
}
