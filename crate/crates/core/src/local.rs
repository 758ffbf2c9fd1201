//! Randomized local rules executed exactly on finite graphs.
//!
//! Every vertex carries an i.i.d. uniform label. A rule is `R`-local when the
//! output at `v` depends only on the rooted ball `B(v, R)` and the labels in
//! it. On a finite graph with a uniformly random root, the density of a
//! selected set is exactly `|W| / n`, and the mass transport principle is a
//! double-counting identity.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph, UNREACHED};
use crate::nets::{greedy_tree_net, NetMethod, NetResult};
use crate::numeric::CompensatedSum;
use crate::rng;

/// Locality radius beyond which theory-mode parameters are flagged as
/// impractical to simulate.
pub const PRACTICAL_RADIUS: f64 = 1e5;

/// Per-vertex labels in `(0, 1)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalLabels {
    values: Vec<f64>,
    seed: Option<u64>,
}

impl LocalLabels {
    /// Label of `v` is the first draw of stream `(seed, v)`, so it does not
    /// depend on `n` or on any other vertex.
    pub fn from_seed(n: usize, seed: u64) -> Self {
        let values = (0..n)
            .map(|v| rng::open_unit(&mut rng::stream(seed, v as u64)))
            .collect();
        Self {
            values,
            seed: Some(seed),
        }
    }

    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        if let Some(bad) = values.iter().find(|x| !(0.0..=1.0).contains(*x)) {
            return Err(Error::Parameter(format!("label {bad} outside [0, 1]")));
        }
        Ok(Self { values, seed: None })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn get(&self, v: usize) -> f64 {
        self.values[v]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    /// Labels carried along the relabeling `v -> perm[v]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        let mut values = vec![0.0; self.values.len()];
        for (v, &x) in self.values.iter().enumerate() {
            values[perm[v]] = x;
        }
        Self {
            values,
            seed: self.seed,
        }
    }

    /// Fresh labels from `seed` at every vertex where `keep` is false.
    pub fn resampled_outside(&self, keep: &[bool], seed: u64) -> Self {
        let fresh = Self::from_seed(self.values.len(), seed);
        let values = self
            .values
            .iter()
            .zip(&fresh.values)
            .zip(keep)
            .map(|((&old, &new), &k)| if k { old } else { new })
            .collect();
        Self { values, seed: None }
    }

    /// Total order on vertices by label, ties broken by lower id.
    fn key(&self, v: usize) -> (f64, usize) {
        (self.values[v], v)
    }

    fn less(&self, a: usize, b: usize) -> bool {
        let (x, i) = self.key(a);
        let (y, j) = self.key(b);
        x < y || (x == y && i < j)
    }
}

fn check_labels(g: &WeightedGraph, labels: &LocalLabels) -> Result<()> {
    if labels.len() != g.n() {
        return Err(Error::Parameter(format!(
            "{} labels for a graph with {} vertices",
            labels.len(),
            g.n()
        )));
    }
    Ok(())
}

/// `v` is kept when `v ∈ u` and its label is larger than the label of every
/// other member of `u` within distance `r - 1`; vertices outside `u` count as
/// label 0. The result is `r`-separated and the rule is `r`-local.
pub fn local_separated(g: &WeightedGraph, u: &VertexSet, r: usize, labels: &LocalLabels) -> Result<VertexSet> {
    if r == 0 {
        return Err(Error::Parameter("separation needs r >= 1".into()));
    }
    check_labels(g, labels)?;
    let in_u = u.mask();
    let kept: Vec<usize> = u
        .as_slice()
        .par_iter()
        .copied()
        .filter(|&v| {
            g.ball_vertices(v, r - 1)
                .into_iter()
                .all(|x| x == v || !in_u[x] || labels.less(x, v))
        })
        .collect();
    VertexSet::new(g.n(), kept)
}

/// Captains are the vertices with label at most `p`.
pub fn elect_captains(g: &WeightedGraph, labels: &LocalLabels, p: f64) -> Result<VertexSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} outside [0, 1]")));
    }
    check_labels(g, labels)?;
    VertexSet::new(g.n(), (0..g.n()).filter(|&v| labels.get(v) <= p).collect())
}

/// Voronoi cells of the captains, truncated at distance `radius`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellAssignment {
    pub captains: VertexSet,
    /// Captain each vertex reports to; `None` when no captain is within
    /// `radius`.
    pub assignment: Vec<Option<usize>>,
    pub radius: usize,
}

impl CellAssignment {
    /// `(captain, members)` for every captain, ascending by captain; members
    /// ascending.
    pub fn cells(&self) -> Vec<(usize, Vec<usize>)> {
        let mut index = vec![UNREACHED; self.assignment.len()];
        let mut cells: Vec<(usize, Vec<usize>)> = Vec::with_capacity(self.captains.len());
        for c in self.captains.iter() {
            index[c] = cells.len();
            cells.push((c, Vec::new()));
        }
        for (v, a) in self.assignment.iter().enumerate() {
            if let Some(c) = a {
                cells[index[*c]].1.push(v);
            }
        }
        cells
    }

    pub fn unassigned(&self) -> VertexSet {
        VertexSet::from_mask(&self.assignment.iter().map(Option::is_none).collect::<Vec<_>>())
    }
}

/// Assigns every vertex to its nearest captain within distance `radius`,
/// breaking ties toward the captain with the lower label. The search runs
/// layer by layer from all captains at once; a vertex's best nearest captain
/// is the best among those of its neighbors one layer closer.
pub fn voronoi_assign(
    g: &WeightedGraph,
    captains: &VertexSet,
    labels: &LocalLabels,
    radius: usize,
) -> Result<CellAssignment> {
    check_labels(g, labels)?;
    let n = g.n();
    let mut dist = vec![UNREACHED; n];
    let mut owner: Vec<Option<usize>> = vec![None; n];
    let mut frontier: Vec<usize> = captains.iter().collect();
    for &c in &frontier {
        dist[c] = 0;
        owner[c] = Some(c);
    }
    let mut layer = 0;
    while !frontier.is_empty() && layer < radius {
        let mut next = Vec::new();
        for &x in &frontier {
            let cx = owner[x].expect("frontier vertices are owned");
            for &y in g.neighbor_ids(x) {
                if dist[y] == UNREACHED {
                    dist[y] = layer + 1;
                    owner[y] = Some(cx);
                    next.push(y);
                } else if dist[y] == layer + 1 {
                    let cy = owner[y].expect("reached vertices are owned");
                    if labels.less(cx, cy) {
                        owner[y] = Some(cx);
                    }
                }
            }
        }
        frontier = next;
        layer += 1;
    }
    let assignment = CellAssignment {
        captains: captains.clone(),
        assignment: owner,
        radius,
    };
    for (c, members) in assignment.cells() {
        if !induces_connected(g, &members) {
            return Err(Error::DisconnectedCell { captain: c });
        }
    }
    Ok(assignment)
}

fn induces_connected(g: &WeightedGraph, members: &[usize]) -> bool {
    if members.len() <= 1 {
        return true;
    }
    let inside = |v: usize| members.binary_search(&v).is_ok();
    let mut seen = std::collections::HashSet::from([members[0]]);
    let mut queue = VecDeque::from([members[0]]);
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbor_ids(u) {
            if inside(w) && seen.insert(w) {
                queue.push_back(w);
            }
        }
    }
    seen.len() == members.len()
}

/// A finished run of [`local_net`].
#[derive(Debug, Clone, PartialEq)]
pub struct LocalNetRun {
    pub net: NetResult,
    pub cells: CellAssignment,
}

/// Local `r`-net: elect captains with probability `p`, form Voronoi cells of
/// radius `radius`, take a greedy tree net inside every cell and add all
/// unassigned vertices.
///
/// Inside a cell, vertices are reindexed by increasing label so the captain is
/// the root and the choice does not depend on vertex ids. The output at `v`
/// depends only on `B(v, 4 * radius)`.
pub fn local_net(g: &WeightedGraph, labels: &LocalLabels, p: f64, radius: usize, r: usize) -> Result<LocalNetRun> {
    if r == 0 {
        return Err(Error::Parameter("local net needs r >= 1".into()));
    }
    let captains = elect_captains(g, labels, p)?;
    let cells = voronoi_assign(g, &captains, labels, radius)?;
    let per_cell: Vec<Vec<usize>> = cells
        .cells()
        .into_par_iter()
        .map(|(captain, members)| cell_net(g, labels, captain, &members, r))
        .collect::<Result<_>>()?;
    let mut ids: Vec<usize> = cells.unassigned().iter().collect();
    ids.extend(per_cell.into_iter().flatten());
    let net = NetResult::new(g, NetMethod::LocalCaptain, r, VertexSet::new(g.n(), ids)?);
    Ok(LocalNetRun { net, cells })
}

fn cell_net(g: &WeightedGraph, labels: &LocalLabels, captain: usize, members: &[usize], r: usize) -> Result<Vec<usize>> {
    let mut by_label = members.to_vec();
    by_label.sort_by(|&a, &b| {
        (a != captain)
            .cmp(&(b != captain))
            .then(labels.key(a).partial_cmp(&labels.key(b)).expect("labels are finite"))
    });
    // `induced` indexes by ascending id; move each vertex to its label rank.
    let mut rank = std::collections::HashMap::with_capacity(members.len());
    for (i, &v) in by_label.iter().enumerate() {
        rank.insert(v, i);
    }
    let perm: Vec<usize> = members.iter().map(|v| rank[v]).collect();
    let cell = g.induced(members).permuted(&perm);
    let net = greedy_tree_net(&cell, r).map_err(|e| match e {
        Error::Disconnected { .. } => Error::DisconnectedCell { captain },
        other => other,
    })?;
    Ok(net.vertices.iter().map(|i| by_label[i]).collect())
}

/// JSON summary of a local net run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalNetTranscript {
    pub seed: Option<u64>,
    pub p: f64,
    #[serde(rename = "R")]
    pub radius: usize,
    pub r: usize,
    pub captains: usize,
    pub unassigned_count: usize,
    pub net_size: usize,
    pub density: f64,
}

impl LocalNetTranscript {
    pub fn new(run: &LocalNetRun, labels: &LocalLabels, p: f64) -> Self {
        Self {
            seed: labels.seed(),
            p,
            radius: run.cells.radius,
            r: run.net.r,
            captains: run.cells.captains.len(),
            unassigned_count: run.cells.unassigned().len(),
            net_size: run.net.len(),
            density: run.net.density,
        }
    }
}

/// Parameters that make the captain construction provably reach density
/// `1/r` on graphs of maximum degree `delta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TheoryParams {
    pub delta: usize,
    pub r: usize,
    /// `1/r - 1/(r + 1/2)`.
    pub gap: f64,
    /// `sqrt(gap/2) · delta^{-6r²}`; may underflow to zero.
    pub p: f64,
    pub ln_p: f64,
    /// Least `R` with `(1 - p)^R <= gap/2`, as a real because it is often
    /// astronomically large; infinite when `p` underflows.
    pub radius: f64,
    /// `radius <= PRACTICAL_RADIUS`.
    pub practical: bool,
}

/// Worst-case choice: the density bound `1/(r+1/2) + delta^{12r²} p² +
/// (1-p)^R` is at most `1/r` once `delta^{12r²} p² <= gap/2` and
/// `(1-p)^R <= gap/2`.
pub fn theory_params(delta: usize, r: usize) -> Result<TheoryParams> {
    if delta < 2 || r == 0 {
        return Err(Error::Parameter("theory parameters need delta >= 2 and r >= 1".into()));
    }
    let rf = r as f64;
    let gap = 1.0 / rf - 1.0 / (rf + 0.5);
    let ln_p = 0.5 * (gap / 2.0).ln() - 6.0 * rf * rf * (delta as f64).ln();
    let p = ln_p.exp();
    let target = (gap / 2.0).ln();
    let radius = if p > 0.0 {
        (target / (-p).ln_1p()).ceil()
    } else {
        f64::INFINITY
    };
    Ok(TheoryParams {
        delta,
        r,
        gap,
        p,
        ln_p,
        radius,
        practical: radius <= PRACTICAL_RADIUS,
    })
}

/// Both sides of the mass transport identity for a transport given as
/// `(o, x, f(o, x))` triples (absent pairs are zero).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MtpReport {
    /// `(1/n) Σ_o Σ_x f(o, x)`, summed by source.
    pub lhs: f64,
    /// `(1/n) Σ_o Σ_x f(x, o)`, summed by target.
    pub rhs: f64,
    pub deviation: f64,
}

pub fn mtp_check(g: &WeightedGraph, transport: &[(usize, usize, f64)]) -> Result<MtpReport> {
    let n = g.n();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut out_mass = vec![CompensatedSum::new(); n];
    let mut in_mass = vec![CompensatedSum::new(); n];
    for &(o, x, f) in transport {
        for v in [o, x] {
            if v >= n {
                return Err(Error::VertexOutOfRange { vertex: v, n });
            }
        }
        if f < 0.0 || !f.is_finite() {
            return Err(Error::NegativeTransport { from: o, to: x, value: f });
        }
        out_mass[o].add(f);
        in_mass[x].add(f);
    }
    let total = |m: Vec<CompensatedSum>| m.iter().map(CompensatedSum::value).collect::<CompensatedSum>().value() / n as f64;
    let lhs = total(out_mass);
    let rhs = total(in_mass);
    Ok(MtpReport {
        lhs,
        rhs,
        deviation: (lhs - rhs).abs(),
    })
}

/// `f(o, x) = 1{x ∈ V_o}`: each captain sends unit mass to its cell members.
pub fn cell_transport(cells: &CellAssignment) -> Vec<(usize, usize, f64)> {
    cells
        .assignment
        .iter()
        .enumerate()
        .filter_map(|(x, c)| c.map(|c| (c, x, 1.0)))
        .collect()
}

/// `f(o, x) = 1{o ~ x}`.
pub fn adjacency_transport(g: &WeightedGraph) -> Vec<(usize, usize, f64)> {
    (0..g.n())
        .flat_map(|o| g.neighbor_ids(o).iter().map(move |&x| (o, x, 1.0)))
        .collect()
}
