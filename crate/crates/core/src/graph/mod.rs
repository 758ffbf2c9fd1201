//! Finite undirected edge-weighted graphs of bounded degree.
//!
//! Vertices are dense ids `0..n`. Adjacency is stored in compressed rows with
//! every neighbor list sorted by id, so iteration order is canonical. Degree
//! and distance always refer to the underlying unweighted graph.

mod expansion;
mod generate;
mod io;

pub use expansion::{expander_spot_check, ExpansionMode, ExpansionVerdict, EXACT_EXPANSION_MAX};
pub use generate::{generate, Family, FamilySpec, RANDOM_REGULAR_RETRIES};
pub use io::{read_graph, write_graph};

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Distance value for vertices not reached by a search.
pub const UNREACHED: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    offsets: Vec<usize>,
    targets: Vec<usize>,
    weights: Vec<f64>,
    w_min: f64,
    w_max: f64,
    delta: usize,
}

impl WeightedGraph {
    /// Validates an edge list and builds the graph. Each undirected edge must
    /// appear once; listing both orientations is reported as a duplicate
    /// (equal weights) or as an asymmetric edge (different weights).
    pub fn build(n: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut seen: std::collections::HashMap<(usize, usize), (usize, usize, f64)> =
            std::collections::HashMap::with_capacity(edges.len());
        for &(u, v, w) in edges {
            if u >= n {
                return Err(Error::VertexOutOfRange { vertex: u, n });
            }
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
            if u == v {
                return Err(Error::SelfLoop(u));
            }
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::NonPositiveWeight { u, v, w });
            }
            let key = (u.min(v), u.max(v));
            if let Some(&(pu, pv, pw)) = seen.get(&key) {
                if pw != w {
                    return Err(Error::AsymmetricEdge {
                        u: pu,
                        v: pv,
                        forward: pw,
                        backward: w,
                    });
                }
                return Err(Error::DuplicateEdge { u: key.0, v: key.1 });
            }
            seen.insert(key, (u, v, w));
        }
        Ok(Self::from_unique_edges(n, edges.iter().copied()))
    }

    /// Assembles a graph from edges already known to be valid and unique.
    pub(crate) fn from_unique_edges(n: usize, edges: impl Iterator<Item = (usize, usize, f64)>) -> Self {
        let mut lists: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (u, v, w) in edges {
            lists[u].push((v, w));
            lists[v].push((u, w));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        let total: usize = lists.iter().map(Vec::len).sum();
        let mut targets = Vec::with_capacity(total);
        let mut weights = Vec::with_capacity(total);
        let mut w_min = f64::INFINITY;
        let mut w_max: f64 = 0.0;
        let mut delta = 0;
        for list in &mut lists {
            list.sort_by_key(|&(v, _)| v);
            delta = delta.max(list.len());
            for &(v, w) in list.iter() {
                targets.push(v);
                weights.push(w);
                w_min = w_min.min(w);
                w_max = w_max.max(w);
            }
            offsets.push(targets.len());
        }
        if targets.is_empty() {
            // Edgeless graphs carry the unit convention.
            w_min = 1.0;
            w_max = 1.0;
        }
        Self {
            n,
            offsets,
            targets,
            weights,
            w_min,
            w_max,
            delta,
        }
    }

    /// Widens the declared bounds; they must contain every edge weight and
    /// the actual maximum degree.
    pub fn with_declared_bounds(mut self, w_min: f64, w_max: f64, delta: usize) -> Result<Self> {
        if !(0.0 < w_min && w_min <= w_max) {
            return Err(Error::WeightBounds { w_min, w_max });
        }
        if self.num_edges() > 0 && (self.w_min < w_min || self.w_max > w_max) {
            return Err(Error::WeightBounds { w_min, w_max });
        }
        if delta < self.max_degree() {
            return Err(Error::DegreeBound {
                declared: delta,
                actual: self.max_degree(),
            });
        }
        self.w_min = w_min;
        self.w_max = w_max;
        self.delta = delta;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.targets.len() / 2
    }

    pub fn w_min(&self) -> f64 {
        self.w_min
    }

    pub fn w_max(&self) -> f64 {
        self.w_max
    }

    /// Declared maximum degree.
    pub fn delta(&self) -> usize {
        self.delta
    }

    pub fn max_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).max().unwrap_or(0)
    }

    pub fn degree(&self, v: usize) -> usize {
        self.offsets[v + 1] - self.offsets[v]
    }

    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let range = self.offsets[v]..self.offsets[v + 1];
        self.targets[range.clone()]
            .iter()
            .copied()
            .zip(self.weights[range].iter().copied())
    }

    pub fn neighbor_ids(&self, v: usize) -> &[usize] {
        &self.targets[self.offsets[v]..self.offsets[v + 1]]
    }

    pub fn weight(&self, u: usize, v: usize) -> Option<f64> {
        let ids = self.neighbor_ids(u);
        ids.binary_search(&v)
            .ok()
            .map(|i| self.weights[self.offsets[u] + i])
    }

    /// Edges with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |u| {
            self.neighbors(u)
                .filter(move |&(v, _)| u < v)
                .map(move |(v, w)| (u, v, w))
        })
    }

    /// Weighted degree `sum_v w(u, v)`; bounds every eigenvalue of the row.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).map(|(_, w)| w).sum()
    }

    pub fn max_weighted_degree(&self) -> f64 {
        (0..self.n)
            .map(|v| self.weighted_degree(v))
            .fold(0.0, f64::max)
    }

    /// `Δ̃ = Δ · w_max / w_min` from the declared bounds.
    pub fn delta_tilde(&self) -> f64 {
        self.delta as f64 * self.w_max / self.w_min
    }

    pub fn is_unit_weighted(&self) -> bool {
        self.weights.iter().all(|&w| w == 1.0)
    }

    /// Regularity degree, if every vertex has the same degree.
    pub fn regular_degree(&self) -> Option<usize> {
        let d = if self.n == 0 { 0 } else { self.degree(0) };
        (0..self.n).all(|v| self.degree(v) == d).then_some(d)
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (u, yu) in y.iter_mut().enumerate() {
            let range = self.offsets[u]..self.offsets[u + 1];
            *yu = self.targets[range.clone()]
                .iter()
                .zip(&self.weights[range])
                .map(|(&v, &w)| w * x[v])
                .sum();
        }
    }

    /// Dense row-major adjacency matrix.
    pub fn dense_adjacency(&self) -> Vec<f64> {
        let mut a = vec![0.0; self.n * self.n];
        for u in 0..self.n {
            for (v, w) in self.neighbors(u) {
                a[u * self.n + v] = w;
            }
        }
        a
    }

    /// Unweighted BFS distances from `sources`, stopping after `limit` layers.
    pub fn bfs(&self, sources: &[usize], limit: usize) -> Vec<usize> {
        let mut dist = vec![UNREACHED; self.n];
        let mut queue = VecDeque::new();
        for &s in sources {
            if dist[s] == UNREACHED {
                dist[s] = 0;
                queue.push_back(s);
            }
        }
        while let Some(u) = queue.pop_front() {
            let du = dist[u];
            if du >= limit {
                continue;
            }
            for &v in self.neighbor_ids(u) {
                if dist[v] == UNREACHED {
                    dist[v] = du + 1;
                    queue.push_back(v);
                }
            }
        }
        dist
    }

    pub fn distances_from(&self, v: usize) -> Vec<usize> {
        self.bfs(&[v], usize::MAX)
    }

    /// Vertices within distance `r` of `v`, ascending.
    pub fn ball_vertices(&self, v: usize, r: usize) -> Vec<usize> {
        let mut seen = Vec::new();
        let mut dist = std::collections::HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(v, 0usize);
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            seen.push(u);
            let du = dist[&u];
            if du == r {
                continue;
            }
            for &w in self.neighbor_ids(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(du + 1);
                    queue.push_back(w);
                }
            }
        }
        seen.sort_unstable();
        seen
    }

    /// Induced subgraph on `vertices` (sorted, distinct). Local id `i`
    /// corresponds to `vertices[i]`. Declared bounds are inherited.
    pub fn induced(&self, vertices: &[usize]) -> WeightedGraph {
        let mut local = vec![UNREACHED; self.n];
        for (i, &v) in vertices.iter().enumerate() {
            local[v] = i;
        }
        let edges = vertices.iter().enumerate().flat_map(|(i, &u)| {
            let local = &local;
            self.neighbors(u).filter_map(move |(v, w)| {
                let j = local[v];
                (j != UNREACHED && i < j).then_some((i, j, w))
            })
        });
        let mut g = WeightedGraph::from_unique_edges(vertices.len(), edges);
        g.w_min = self.w_min;
        g.w_max = self.w_max;
        g.delta = self.delta;
        g
    }

    /// `B_G(v, r)`: the subgraph induced by vertices within distance `r`.
    pub fn ball(&self, v: usize, r: usize) -> Ball {
        let vertices = self.ball_vertices(v, r);
        let center = vertices.binary_search(&v).expect("center lies in its ball");
        Ball {
            graph: self.induced(&vertices),
            vertices,
            center,
        }
    }

    /// `G - W`: delete the vertices of `removed` and their incident edges.
    /// Returns the remaining graph and its local-to-global vertex map.
    pub fn remove_vertices(&self, removed: &VertexSet) -> (WeightedGraph, Vec<usize>) {
        let keep: Vec<usize> = (0..self.n).filter(|&v| !removed.contains(v)).collect();
        (self.induced(&keep), keep)
    }

    /// Zero the rows and columns of `set`: drop every edge incident to it,
    /// keeping all `n` vertices.
    pub fn isolate_vertices(&self, set: &VertexSet) -> WeightedGraph {
        let edges = self
            .edges()
            .filter(|&(u, v, _)| !set.contains(u) && !set.contains(v));
        let mut g = WeightedGraph::from_unique_edges(self.n, edges);
        g.w_min = self.w_min;
        g.w_max = self.w_max;
        g.delta = self.delta;
        g
    }

    /// Connected components, each sorted ascending, ordered by smallest id.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut comp = vec![UNREACHED; self.n];
        let mut out = Vec::new();
        for s in 0..self.n {
            if comp[s] != UNREACHED {
                continue;
            }
            let id = out.len();
            let mut members = vec![s];
            comp[s] = id;
            let mut head = 0;
            while head < members.len() {
                let u = members[head];
                head += 1;
                for &v in self.neighbor_ids(u) {
                    if comp[v] == UNREACHED {
                        comp[v] = id;
                        members.push(v);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.n > 0 && self.components().len() == 1
    }

    pub fn require_connected(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::EmptyGraph);
        }
        let c = self.components().len();
        if c != 1 {
            return Err(Error::Disconnected { components: c });
        }
        Ok(())
    }

    /// Every vertex within distance `r` of `w`. False for empty `w` on a
    /// nonempty graph.
    pub fn is_r_net(&self, w: &VertexSet, r: usize) -> bool {
        if self.n == 0 {
            return true;
        }
        if w.is_empty() {
            return false;
        }
        self.bfs(w.as_slice(), r).iter().all(|&d| d <= r)
    }

    /// Every pair of distinct members at distance at least `s`.
    pub fn is_s_separated(&self, w: &VertexSet, s: usize) -> bool {
        if s <= 1 {
            return true;
        }
        let mut mark = vec![false; self.n];
        for &v in w.as_slice() {
            mark[v] = true;
        }
        w.as_slice().iter().all(|&v| {
            let ball = self.ball_vertices(v, s - 1);
            ball.iter().all(|&u| u == v || !mark[u])
        })
    }

    /// Reweights a unit-weight graph by `(deg u · deg v)^{-1/2}`, so the
    /// adjacency matrix becomes `D^{-1/2} A D^{-1/2}`.
    pub fn normalized_weighting(&self) -> Result<WeightedGraph> {
        if let Some((u, v, w)) = self.edges().find(|&(_, _, w)| w != 1.0) {
            return Err(Error::NotUnitWeighted { u, v, w });
        }
        if let Some(v) = (0..self.n).find(|&v| self.degree(v) == 0) {
            return Err(Error::IsolatedVertex(v));
        }
        let edges = self.edges().map(|(u, v, _)| {
            let w = 1.0 / ((self.degree(u) * self.degree(v)) as f64).sqrt();
            (u, v, w)
        });
        Ok(WeightedGraph::from_unique_edges(self.n, edges))
    }

    /// Same graph under the relabeling `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> WeightedGraph {
        let edges = self.edges().map(|(u, v, w)| (perm[u], perm[v], w));
        let mut g = WeightedGraph::from_unique_edges(self.n, edges);
        g.w_min = self.w_min;
        g.w_max = self.w_max;
        g.delta = self.delta;
        g
    }
}

/// Free-function form of [`WeightedGraph::build`].
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<WeightedGraph> {
    WeightedGraph::build(n, edges)
}

/// An induced ball together with its local-to-global vertex map.
#[derive(Debug, Clone)]
pub struct Ball {
    pub graph: WeightedGraph,
    /// Global ids, ascending; local id `i` is `vertices[i]`.
    pub vertices: Vec<usize>,
    /// Local id of the center.
    pub center: usize,
}

/// Sorted set of vertex ids of a graph with `n` vertices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct VertexSet {
    ids: Vec<usize>,
    n: usize,
}

impl VertexSet {
    pub fn new(n: usize, mut ids: Vec<usize>) -> Result<Self> {
        ids.sort_unstable();
        ids.dedup();
        if let Some(&bad) = ids.iter().find(|&&v| v >= n) {
            return Err(Error::VertexOutOfRange { vertex: bad, n });
        }
        Ok(Self { ids, n })
    }

    pub fn empty(n: usize) -> Self {
        Self { ids: Vec::new(), n }
    }

    pub fn full(n: usize) -> Self {
        Self {
            ids: (0..n).collect(),
            n,
        }
    }

    pub fn from_mask(mask: &[bool]) -> Self {
        Self {
            ids: (0..mask.len()).filter(|&v| mask[v]).collect(),
            n: mask.len(),
        }
    }

    pub fn contains(&self, v: usize) -> bool {
        self.ids.binary_search(&v).is_ok()
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.ids
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.ids.iter().copied()
    }

    pub fn mask(&self) -> Vec<bool> {
        let mut m = vec![false; self.n];
        for &v in &self.ids {
            m[v] = true;
        }
        m
    }

    pub fn union(&self, other: &VertexSet) -> VertexSet {
        let mut ids: Vec<usize> = self.ids.iter().chain(&other.ids).copied().collect();
        ids.sort_unstable();
        ids.dedup();
        VertexSet {
            ids,
            n: self.n.max(other.n),
        }
    }

    /// Image under the relabeling `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> VertexSet {
        let mut ids: Vec<usize> = self.ids.iter().map(|&v| perm[v]).collect();
        ids.sort_unstable();
        VertexSet { ids, n: self.n }
    }
}
