use serde::{Deserialize, Serialize};

use super::WeightedGraph;
use crate::error::{Error, Result};
use crate::rng;

/// Attempts allowed before random regular generation gives up.
pub const RANDOM_REGULAR_RETRIES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    Path { n: usize },
    Cycle { n: usize },
    TorusGrid { rows: usize, cols: usize },
    Hypercube { dim: usize },
    Complete { n: usize },
    RandomRegular { n: usize, d: usize },
    /// `B(root, depth)` in the infinite `d`-regular tree.
    TreeBall { d: usize, depth: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilySpec {
    #[serde(flatten)]
    pub family: Family,
    #[serde(default)]
    pub seed: u64,
    /// Draw i.i.d. uniform edge weights from `[lo, hi]` instead of unit weights.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<(f64, f64)>,
}

impl FamilySpec {
    pub fn new(family: Family) -> Self {
        Self {
            family,
            seed: 0,
            weights: None,
        }
    }

    pub fn seeded(family: Family, seed: u64) -> Self {
        Self {
            family,
            seed,
            weights: None,
        }
    }

    pub fn with_weights(mut self, lo: f64, hi: f64) -> Self {
        self.weights = Some((lo, hi));
        self
    }
}

/// Builds a member of the family. Deterministic in the spec, seed included.
pub fn generate(spec: &FamilySpec) -> Result<WeightedGraph> {
    let (n, edges) = match spec.family {
        Family::Path { n } => {
            if n == 0 {
                return Err(inadmissible("path needs n >= 1"));
            }
            (n, (1..n).map(|i| (i - 1, i)).collect())
        }
        Family::Cycle { n } => {
            if n < 3 {
                return Err(inadmissible("cycle needs n >= 3"));
            }
            (n, (0..n).map(|i| (i.min((i + 1) % n), i.max((i + 1) % n))).collect())
        }
        Family::TorusGrid { rows, cols } => {
            if rows < 3 || cols < 3 {
                return Err(inadmissible("torus needs rows, cols >= 3"));
            }
            let mut e = Vec::with_capacity(2 * rows * cols);
            for i in 0..rows {
                for j in 0..cols {
                    let v = i * cols + j;
                    e.push((v, i * cols + (j + 1) % cols));
                    e.push((v, ((i + 1) % rows) * cols + j));
                }
            }
            (rows * cols, e)
        }
        Family::Hypercube { dim } => {
            if dim == 0 || dim > 20 {
                return Err(inadmissible("hypercube needs 1 <= dim <= 20"));
            }
            let n = 1usize << dim;
            let mut e = Vec::with_capacity(n * dim / 2);
            for v in 0..n {
                for k in 0..dim {
                    let u = v ^ (1 << k);
                    if v < u {
                        e.push((v, u));
                    }
                }
            }
            (n, e)
        }
        Family::Complete { n } => {
            if n == 0 {
                return Err(inadmissible("complete graph needs n >= 1"));
            }
            let e = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            (n, e)
        }
        Family::RandomRegular { n, d } => {
            if d == 0 || d >= n || (n * d) % 2 == 1 {
                return Err(inadmissible("random regular needs 1 <= d < n and n*d even"));
            }
            (n, random_regular_edges(n, d, spec.seed)?)
        }
        Family::TreeBall { d, depth } => {
            if d < 2 {
                return Err(inadmissible("tree ball needs d >= 2"));
            }
            tree_ball_edges(d, depth)?
        }
    };
    let mut rng = rng::stream(spec.seed, 1);
    let weighted: Vec<(usize, usize, f64)> = match spec.weights {
        None => edges.into_iter().map(|(u, v)| (u, v, 1.0)).collect(),
        Some((lo, hi)) => {
            if !(0.0 < lo && lo <= hi && hi.is_finite()) {
                return Err(inadmissible("weights need 0 < lo <= hi"));
            }
            edges
                .into_iter()
                .map(|(u, v)| (u, v, lo + (hi - lo) * rng::open_unit(&mut rng)))
                .collect()
        }
    };
    let g = WeightedGraph::from_unique_edges(n, weighted.into_iter());
    match spec.weights {
        Some((lo, hi)) => {
            let delta = g.max_degree();
            g.with_declared_bounds(lo, hi, delta)
        }
        None => Ok(g),
    }
}

fn inadmissible(msg: &str) -> Error {
    Error::InadmissibleFamily(msg.to_string())
}

fn tree_ball_edges(d: usize, depth: usize) -> Result<(usize, Vec<(usize, usize)>)> {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut next_id = 1usize;
    for level in 0..depth {
        let children = if level == 0 { d } else { d - 1 };
        let mut next = Vec::with_capacity(frontier.len() * children);
        for &parent in &frontier {
            for _ in 0..children {
                edges.push((parent, next_id));
                next.push(next_id);
                next_id += 1;
                if next_id > 50_000_000 {
                    return Err(inadmissible("tree ball too large"));
                }
            }
        }
        frontier = next;
    }
    Ok((next_id, edges))
}

/// Pairing model: points are matched one random pair at a time, rejecting
/// pairs that would create a loop or a multi-edge; if the remaining points
/// admit no legal pair the attempt restarts. The result is simple; it is also
/// required to be connected.
fn random_regular_edges(n: usize, d: usize, seed: u64) -> Result<Vec<(usize, usize)>> {
    for attempt in 0..RANDOM_REGULAR_RETRIES {
        let mut rng = rng::stream(seed, 1000 + attempt as u64);
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            let g = WeightedGraph::from_unique_edges(n, edges.iter().map(|&(u, v)| (u, v, 1.0)));
            if g.is_connected() {
                return Ok(edges);
            }
        }
    }
    Err(Error::RetryBudgetExhausted(RANDOM_REGULAR_RETRIES))
}

fn try_pairing(n: usize, d: usize, rng: &mut impl rand::Rng) -> Option<Vec<(usize, usize)>> {
    let mut points: Vec<usize> = (0..n * d).map(|p| p / d).collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::with_capacity(d); n];
    let mut edges = Vec::with_capacity(n * d / 2);
    while !points.is_empty() {
        let mut misses = 0usize;
        loop {
            let i = rng::index(rng, points.len());
            let j = rng::index(rng, points.len());
            let (u, v) = (points[i], points[j]);
            if i != j && u != v && !adj[u].contains(&v) {
                adj[u].push(v);
                adj[v].push(u);
                edges.push((u.min(v), u.max(v)));
                let (hi, lo) = (i.max(j), i.min(j));
                points.swap_remove(hi);
                points.swap_remove(lo);
                break;
            }
            misses += 1;
            if misses >= 64 && !has_legal_pair(&points, &adj) {
                return None;
            }
        }
    }
    edges.sort_unstable();
    Some(edges)
}

fn has_legal_pair(points: &[usize], adj: &[Vec<usize>]) -> bool {
    let mut verts: Vec<usize> = points.to_vec();
    verts.sort_unstable();
    verts.dedup();
    verts
        .iter()
        .enumerate()
        .any(|(i, &u)| verts[i + 1..].iter().any(|&v| !adj[u].contains(&v)))
}
