//! Merge trees, metric trees, and the point-level queries the distance
//! algorithms are built on.
//!
//! A merge tree is a rooted tree whose height function strictly decreases
//! from parent to child, extended by an implicit vertical ray above the
//! root, so every point has ancestors at every greater height. A metric
//! tree is an unrooted tree with positive edge lengths carrying the
//! shortest-path metric over nodes and edge-interior points alike.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::rational::Rational;

/// Dense index of a node within one tree.
pub type NodeId = usize;

/// Rejections raised while validating tree input.
#[derive(Debug, Error)]
pub enum TreeError {
    /// The node list was empty.
    #[error("a tree needs at least one node")]
    Empty,
    /// Two nodes were declared with the same identifier.
    #[error("duplicate node id {0:?}")]
    DuplicateNode(String),
    /// An edge referred to an undeclared node.
    #[error("edge endpoint {0:?} is not a declared node")]
    UnknownNode(String),
    /// A merge-tree node appeared as the child of two edges.
    #[error("node {0:?} has more than one parent edge")]
    MultipleParents(String),
    /// A merge-tree edge did not strictly increase in height.
    #[error("edge {child:?} -> {parent:?} must strictly increase in height ({child_height} vs {parent_height})")]
    EdgeHeightOrder {
        child: String,
        parent: String,
        // Boxed to keep the error (and every validation result) small.
        child_height: Box<Rational>,
        parent_height: Box<Rational>,
    },
    /// More than one merge-tree node had no parent.
    #[error("multiple roots: {0:?} and {1:?} both lack a parent edge")]
    MultipleRoots(String, String),
    /// A node was not reachable from the root.
    #[error("node {0:?} is not connected to the rest of the tree")]
    Disconnected(String),
    /// A metric-tree edge connected a node to itself.
    #[error("self-loop at node {0:?}")]
    SelfLoop(String),
    /// The same metric-tree edge was declared twice.
    #[error("duplicate edge between {0:?} and {1:?}")]
    DuplicateEdge(String, String),
    /// A metric-tree edge had length <= 0.
    #[error("edge between {a:?} and {b:?} has non-positive length {length}")]
    NonPositiveLength {
        a: String,
        b: String,
        length: Rational,
    },
    /// The metric-tree edges formed a cycle.
    #[error("edges form a cycle through {0:?}")]
    Cycle(String),
}

/// The edge of a merge tree hosting a point: either a tree edge, named by
/// its lower endpoint and that endpoint's parent, or the ray above the
/// root. A point at height h is hosted by the unique edge whose lower
/// endpoint is at height <= h and whose upper endpoint is strictly above
/// h; the root itself and everything above it live on the ray. The
/// derived order puts tree edges first (by child, then parent id) and the
/// ray last.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum EdgeRef {
    /// The edge from `child` up to `parent`.
    Edge { child: NodeId, parent: NodeId },
    /// The vertical ray above the root.
    Ray,
}

/// A point of a merge tree in canonical form: the hosting edge plus the
/// exact height. Two `MergePoint`s are equal iff they are the same point.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Debug)]
pub struct MergePoint {
    /// Hosting edge, normalized as documented on [`EdgeRef`].
    pub edge: EdgeRef,
    /// Height of the point.
    pub height: Rational,
}

/// A rooted tree with strictly decreasing heights away from the root.
#[derive(Clone, Debug)]
pub struct MergeTree {
    names: Vec<String>,
    heights: Vec<Rational>,
    parents: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    root: NodeId,
    // Minimum height in the subtree rooted at each node; cached because
    // depth queries sit inside the innermost decision loops.
    min_below: Vec<Rational>,
    by_name: BTreeMap<String, NodeId>,
}

/// Validates `(id, height)` node declarations plus `(child, parent)` edges
/// into a [`MergeTree`].
///
/// Accepts exactly the trees with one root, a single parent per node,
/// strictly increasing heights along every child-to-parent edge, and all
/// nodes connected. Node ids are assigned in declaration order.
pub fn validate_merge_tree(
    nodes: &[(String, Rational)],
    edges: &[(String, String)],
) -> Result<MergeTree, TreeError> {
    if nodes.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut by_name = BTreeMap::new();
    for (id, (name, _)) in nodes.iter().enumerate() {
        if by_name.insert(name.clone(), id).is_some() {
            return Err(TreeError::DuplicateNode(name.clone()));
        }
    }
    let heights: Vec<Rational> = nodes.iter().map(|(_, h)| h.clone()).collect();
    let n = nodes.len();
    let mut parents: Vec<Option<NodeId>> = vec![None; n];
    for (child, parent) in edges {
        let c = *by_name
            .get(child)
            .ok_or_else(|| TreeError::UnknownNode(child.clone()))?;
        let p = *by_name
            .get(parent)
            .ok_or_else(|| TreeError::UnknownNode(parent.clone()))?;
        if heights[c] >= heights[p] {
            return Err(TreeError::EdgeHeightOrder {
                child: child.clone(),
                parent: parent.clone(),
                child_height: Box::new(heights[c].clone()),
                parent_height: Box::new(heights[p].clone()),
            });
        }
        if parents[c].is_some() {
            return Err(TreeError::MultipleParents(child.clone()));
        }
        parents[c] = Some(p);
    }
    let mut roots = (0..n).filter(|&v| parents[v].is_none());
    // Heights strictly increase along parent links, so parent chains are
    // acyclic and at least one node lacks a parent.
    let root = roots.next().expect("parent chains terminate");
    if let Some(other) = roots.next() {
        return Err(TreeError::MultipleRoots(
            nodes[root].0.clone(),
            nodes[other].0.clone(),
        ));
    }
    let mut children: Vec<Vec<NodeId>> = vec![Vec::new(); n];
    for (v, parent) in parents.iter().enumerate() {
        if let Some(p) = *parent {
            children[p].push(v);
        }
    }
    // With one root and one parent link everywhere else, every node's
    // parent chain ends at the root; nothing can be disconnected.
    let mut min_below = heights.clone();
    let mut order: Vec<NodeId> = (0..n).collect();
    order.sort_by(|&a, &b| heights[a].cmp(&heights[b]));
    for v in order {
        if let Some(p) = parents[v] {
            if min_below[v] < min_below[p] {
                min_below[p] = min_below[v].clone();
            }
        }
    }
    Ok(MergeTree {
        names: nodes.iter().map(|(name, _)| name.clone()).collect(),
        heights,
        parents,
        children,
        root,
        min_below,
        by_name,
    })
}

impl MergeTree {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// All node ids, in declaration order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.names.len()
    }

    /// Root node id.
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Declared identifier of a node.
    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    /// Height of a node.
    pub fn height(&self, v: NodeId) -> &Rational {
        &self.heights[v]
    }

    /// Parent of a node; `None` exactly at the root.
    pub fn parent(&self, v: NodeId) -> Option<NodeId> {
        self.parents[v]
    }

    /// Children of a node, ascending by id.
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    /// Looks a node up by its declared identifier.
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Degree of the node in the underlying undirected tree (children
    /// plus parent; the root ray does not count).
    pub fn full_degree(&self, v: NodeId) -> usize {
        self.children[v].len() + usize::from(self.parents[v].is_some())
    }

    /// The node as a canonical point.
    pub fn node_point(&self, v: NodeId) -> MergePoint {
        let edge = match self.parents[v] {
            Some(p) => EdgeRef::Edge { child: v, parent: p },
            None => EdgeRef::Ray,
        };
        MergePoint {
            edge,
            height: self.heights[v].clone(),
        }
    }

    /// Canonical point at `height` on the upward path starting at node
    /// `from`. Requires `height >= height(from)`.
    pub fn point_above(&self, from: NodeId, height: Rational) -> MergePoint {
        debug_assert!(height >= self.heights[from]);
        if height >= self.heights[self.root] {
            return MergePoint {
                edge: EdgeRef::Ray,
                height,
            };
        }
        let mut child = from;
        // height < root height, so the hosting edge exists strictly below
        // the ray and the climb stops before running out of parents.
        loop {
            let parent = self.parents[child].expect("below the root there is a parent");
            if self.heights[parent] <= height {
                child = parent;
            } else {
                return MergePoint {
                    edge: EdgeRef::Edge { child, parent },
                    height,
                };
            }
        }
    }

    /// The ancestor of `p` that sits `rise` higher. Total thanks to the
    /// root ray. Requires `rise >= 0`.
    pub fn ancestor_at(&self, p: &MergePoint, rise: &Rational) -> MergePoint {
        debug_assert!(!rise.is_negative());
        let height = &p.height + rise;
        match p.edge {
            EdgeRef::Ray => MergePoint {
                edge: EdgeRef::Ray,
                height,
            },
            EdgeRef::Edge { child, .. } => self.point_above(child, height),
        }
    }

    /// Largest height drop from `p` to any descendant leaf (0 at a leaf).
    pub fn depth_below(&self, p: &MergePoint) -> Rational {
        let anchor = match p.edge {
            EdgeRef::Ray => self.root,
            EdgeRef::Edge { child, .. } => child,
        };
        &p.height - &self.min_below[anchor]
    }

    /// True iff `p` is an ancestor of `q` (every point is an ancestor of
    /// itself).
    pub fn is_ancestor(&self, p: &MergePoint, q: &MergePoint) -> bool {
        if p.height < q.height {
            return false;
        }
        self.ancestor_at(q, &(&p.height - &q.height)) == *p
    }

    /// Lowest common ancestor of two points.
    pub fn lca(&self, p: &MergePoint, q: &MergePoint) -> MergePoint {
        match (&p.edge, &q.edge) {
            // Ray points are ancestors of everything at their height.
            (EdgeRef::Ray, _) | (_, EdgeRef::Ray) => MergePoint {
                edge: EdgeRef::Ray,
                height: p.height.clone().max(q.height.clone()),
            },
            (
                EdgeRef::Edge { child: cp, .. },
                EdgeRef::Edge { child: cq, .. },
            ) => {
                if cp == cq {
                    return if p.height >= q.height { p.clone() } else { q.clone() };
                }
                let l = self.lca_node(*cp, *cq);
                // If one hosting child is an ancestor node of the other's,
                // the higher point already sits on the joint upward path.
                if l == *cp {
                    p.clone()
                } else if l == *cq {
                    q.clone()
                } else {
                    self.node_point(l)
                }
            }
        }
    }

    fn lca_node(&self, mut a: NodeId, mut b: NodeId) -> NodeId {
        while a != b {
            if self.heights[a] < self.heights[b] {
                a = self.parents[a].expect("lower node is not the root");
            } else if self.heights[b] < self.heights[a] {
                b = self.parents[b].expect("lower node is not the root");
            } else {
                // Equal heights at distinct nodes: neither is the root.
                a = self.parents[a].expect("tied node is not the root");
                b = self.parents[b].expect("tied node is not the root");
            }
        }
        a
    }

    /// Minimum node height (the deepest leaf).
    pub fn min_height(&self) -> &Rational {
        &self.min_below[self.root]
    }

    /// Edges as `(child, parent)` pairs sorted by child id.
    pub fn edge_pairs(&self) -> Vec<(NodeId, NodeId)> {
        (0..self.names.len())
            .filter_map(|v| self.parents[v].map(|p| (v, p)))
            .collect()
    }
}

/// An unrooted tree with positive rational edge lengths, regarded as a
/// geodesic space.
#[derive(Clone, Debug)]
pub struct MetricTree {
    names: Vec<String>,
    adjacency: Vec<Vec<(NodeId, Rational)>>,
    edges: Vec<(NodeId, NodeId, Rational)>,
    by_name: BTreeMap<String, NodeId>,
}

/// Validates node identifiers plus `(a, b, length)` edges into a
/// [`MetricTree`]: connected, acyclic, all lengths positive.
pub fn validate_metric_tree(
    nodes: &[String],
    edges: &[(String, String, Rational)],
) -> Result<MetricTree, TreeError> {
    if nodes.is_empty() {
        return Err(TreeError::Empty);
    }
    let mut by_name = BTreeMap::new();
    for (id, name) in nodes.iter().enumerate() {
        if by_name.insert(name.clone(), id).is_some() {
            return Err(TreeError::DuplicateNode(name.clone()));
        }
    }
    let n = nodes.len();
    let mut adjacency: Vec<Vec<(NodeId, Rational)>> = vec![Vec::new(); n];
    let mut canonical = Vec::new();
    let mut seen = BTreeMap::new();
    for (a, b, length) in edges {
        let u = *by_name
            .get(a)
            .ok_or_else(|| TreeError::UnknownNode(a.clone()))?;
        let v = *by_name
            .get(b)
            .ok_or_else(|| TreeError::UnknownNode(b.clone()))?;
        if u == v {
            return Err(TreeError::SelfLoop(a.clone()));
        }
        if length <= &Rational::zero() {
            return Err(TreeError::NonPositiveLength {
                a: a.clone(),
                b: b.clone(),
                length: length.clone(),
            });
        }
        let key = (u.min(v), u.max(v));
        if seen.insert(key, ()).is_some() {
            return Err(TreeError::DuplicateEdge(a.clone(), b.clone()));
        }
        adjacency[u].push((v, length.clone()));
        adjacency[v].push((u, length.clone()));
        canonical.push((key.0, key.1, length.clone()));
    }
    for row in &mut adjacency {
        row.sort_by_key(|&(v, _)| v);
    }
    canonical.sort_by_key(|&(u, v, _)| (u, v));
    // Connectivity sweep from node 0; with no duplicate edges, a count
    // mismatch distinguishes disconnection from a cycle.
    let mut visited = vec![false; n];
    let mut stack = vec![0];
    visited[0] = true;
    let mut reached = 1;
    while let Some(u) = stack.pop() {
        for &(v, _) in &adjacency[u] {
            if !visited[v] {
                visited[v] = true;
                reached += 1;
                stack.push(v);
            }
        }
    }
    if reached < n {
        let missing = (0..n).find(|&v| !visited[v]).expect("some node unreached");
        return Err(TreeError::Disconnected(nodes[missing].clone()));
    }
    if canonical.len() != n - 1 {
        return Err(TreeError::Cycle(nodes[0].clone()));
    }
    Ok(MetricTree {
        names: nodes.to_vec(),
        adjacency,
        edges: canonical,
        by_name,
    })
}

impl MetricTree {
    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.names.len()
    }

    /// All node ids, in declaration order.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.names.len()
    }

    /// Declared identifier of a node.
    pub fn name(&self, v: NodeId) -> &str {
        &self.names[v]
    }

    /// Looks a node up by its declared identifier.
    pub fn node_id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    /// Neighbors of a node with edge lengths, ascending by neighbor id.
    pub fn neighbors(&self, v: NodeId) -> &[(NodeId, Rational)] {
        &self.adjacency[v]
    }

    /// Degree of a node.
    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v].len()
    }

    /// Edges as `(a, b, length)` with `a < b`, sorted.
    pub fn edges(&self) -> &[(NodeId, NodeId, Rational)] {
        &self.edges
    }

    /// Shortest-path distances from `u` to every node.
    pub fn distances_from(&self, u: NodeId) -> Vec<Rational> {
        let mut dist = vec![Rational::zero(); self.names.len()];
        let mut visited = vec![false; self.names.len()];
        visited[u] = true;
        let mut stack = vec![u];
        while let Some(a) = stack.pop() {
            for (b, length) in &self.adjacency[a] {
                if !visited[*b] {
                    visited[*b] = true;
                    dist[*b] = &dist[a] + length;
                    stack.push(*b);
                }
            }
        }
        dist
    }

    /// Shortest-path distance between two nodes.
    pub fn geodesic_distance(&self, x: NodeId, y: NodeId) -> Rational {
        self.distances_from(x).swap_remove(y)
    }

    /// Views the tree as a merge tree rooted at `u`: each node's height
    /// is the negated geodesic distance to `u`, so `u` becomes the root
    /// at height 0 and heights strictly decrease outward.
    pub fn merge_tree_from_root(&self, u: NodeId) -> MergeTree {
        let dist = self.distances_from(u);
        let nodes: Vec<(String, Rational)> = self
            .names
            .iter()
            .zip(&dist)
            .map(|(name, d)| (name.clone(), -d))
            .collect();
        // Orient every edge toward u: the endpoint farther from u is the
        // child. Distances along a tree edge always differ by its length.
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .map(|(a, b, _)| {
                if dist[*a] > dist[*b] {
                    (self.names[*a].clone(), self.names[*b].clone())
                } else {
                    (self.names[*b].clone(), self.names[*a].clone())
                }
            })
            .collect();
        validate_merge_tree(&nodes, &edges)
            .expect("positive lengths make heights strictly decrease outward")
    }
}

/// Degree-bound parameter for a merge-tree pair: the largest total degree
/// of original nodes inside any radius-`eps` slab-connected ball.
///
/// The ball around a point x consists of everything reachable from x
/// without leaving the height slab `[h(x)-eps, h(x)+eps]`; its content is
/// scored by summing the undirected degrees of the tree nodes inside.
/// Only finitely many centers can matter: every node, plus on each edge
/// the points at heights `h(v)+-eps` for every node v. Returns at least 1
/// and is non-decreasing in `eps`.
pub fn merge_degree_bound(t1: &MergeTree, t2: &MergeTree, eps: &Rational) -> usize {
    debug_assert!(!eps.is_negative());
    slab_ball_degree_max(t1, eps)
        .max(slab_ball_degree_max(t2, eps))
        .max(1)
}

fn slab_ball_degree_max(t: &MergeTree, eps: &Rational) -> usize {
    let mut best = 0;
    // Center at a node: the node anchors its own component.
    for v in t.node_ids() {
        let center = t.height(v).clone();
        best = best.max(slab_component_degree(t, &[v], &center, eps));
    }
    // Center inside an edge at the event heights h(v)+-eps. A center on
    // the root ray is dominated by centering at the root itself: its
    // slab meets the tree in a subset of the root-centered slab.
    for (child, parent) in t.edge_pairs() {
        let low = t.height(child);
        let high = t.height(parent);
        for v in t.node_ids() {
            for center in [t.height(v) - eps, t.height(v) + eps] {
                if &center <= low || &center >= high {
                    continue;
                }
                let mut anchors = Vec::new();
                if low >= &(&center - eps) {
                    anchors.push(child);
                }
                if high <= &(&center + eps) {
                    anchors.push(parent);
                }
                best = best.max(slab_component_degree(t, &anchors, &center, eps));
            }
        }
    }
    best
}

// Total undirected degree of the nodes connected to the anchors within
// the height slab [center-eps, center+eps]. Paths between adjacent nodes
// are height-monotone, so staying in the slab is a per-node condition.
fn slab_component_degree(
    t: &MergeTree,
    anchors: &[NodeId],
    center: &Rational,
    eps: &Rational,
) -> usize {
    let lo = center - eps;
    let hi = center + eps;
    let in_slab = |v: NodeId| t.height(v) >= &lo && t.height(v) <= &hi;
    let mut visited = vec![false; t.node_count()];
    let mut stack: Vec<NodeId> = Vec::new();
    for &a in anchors {
        debug_assert!(in_slab(a));
        if !visited[a] {
            visited[a] = true;
            stack.push(a);
        }
    }
    let mut total = 0;
    while let Some(v) = stack.pop() {
        total += t.full_degree(v);
        let mut push = |u: NodeId| {
            if !visited[u] && in_slab(u) {
                visited[u] = true;
                stack.push(u);
            }
        };
        if let Some(p) = t.parent(v) {
            push(p);
        }
        for &c in t.children(v) {
            push(c);
        }
    }
    total
}

/// Degree-bound parameter for a metric-tree pair: the largest total degree
/// of nodes inside any geodesic ball of radius `eps`.
///
/// Candidate centers are all nodes plus, on each edge, the points at
/// geodesic distance exactly `eps` from some node. Returns at least 1 and
/// is non-decreasing in `eps`.
pub fn metric_degree_bound(m1: &MetricTree, m2: &MetricTree, eps: &Rational) -> usize {
    debug_assert!(!eps.is_negative());
    geodesic_ball_degree_max(m1, eps)
        .max(geodesic_ball_degree_max(m2, eps))
        .max(1)
}

fn geodesic_ball_degree_max(m: &MetricTree, eps: &Rational) -> usize {
    let n = m.node_count();
    let dist: Vec<Vec<Rational>> = (0..n).map(|u| m.distances_from(u)).collect();
    let degree_sum = |inside: &dyn Fn(NodeId) -> bool| -> usize {
        (0..n).filter(|&v| inside(v)).map(|v| m.degree(v)).sum()
    };
    let mut best = 0;
    for row in &dist {
        best = best.max(degree_sum(&|v| row[v] <= *eps));
    }
    for (a, b, length) in m.edges() {
        for v in 0..n {
            // Points on edge (a, b) at parameter t from a whose distance
            // to v is exactly eps, for t strictly inside (0, length).
            for t in [eps - &dist[*a][v], length - &(eps - &dist[*b][v])] {
                if t <= Rational::zero() || t >= *length {
                    continue;
                }
                let inside = |w: NodeId| {
                    // Geodesics from an interior edge point exit via a or b.
                    let via_a = &t + &dist[*a][w];
                    let via_b = &(length - &t) + &dist[*b][w];
                    via_a.min(via_b) <= *eps
                };
                best = best.max(degree_sum(&inside));
            }
        }
    }
    best
}
