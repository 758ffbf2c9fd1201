//! Net and separated-set constructions, and the spectral-radius drop caused
//! by deleting a net.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph, UNREACHED};
use crate::rng;
use crate::spectral::{ball_lambdas, lambda1};

/// Margin by which `λ_1` of a ball must exceed the threshold in
/// [`high_radius_set`].
pub const HIGH_RADIUS_TOL: f64 = 1e-10;
/// Relative slack of the radius-drop inequality.
pub const RAD_DROP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NetMethod {
    GreedyTree,
    ExpanderRandom,
    LocalCaptain,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetResult {
    pub method: NetMethod,
    pub r: usize,
    pub vertices: VertexSet,
    /// `|W| / n`.
    pub density: f64,
    /// Result of re-checking the net property by BFS.
    pub verified: bool,
}

impl NetResult {
    pub fn new(g: &WeightedGraph, method: NetMethod, r: usize, vertices: VertexSet) -> Self {
        let density = if g.n() == 0 {
            0.0
        } else {
            vertices.len() as f64 / g.n() as f64
        };
        let verified = g.is_r_net(&vertices, r);
        Self {
            method,
            r,
            vertices,
            density,
            verified,
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

/// An `r`-net of a connected graph with at most `⌈n/(r+1)⌉` vertices.
///
/// Works on the BFS spanning tree rooted at vertex 0. The deepest remaining
/// vertex `v` (ties to the lowest id) selects its ancestor `u` at tree distance
/// `r`; `u` joins the net and its subtree, which lies within `r` of `u` and
/// has at least `r + 1` vertices, is removed. Once every remaining vertex is
/// within `r` of the root, the root is added unless the net already covers
/// what remains.
pub fn greedy_tree_net(g: &WeightedGraph, r: usize) -> Result<NetResult> {
    g.require_connected()?;
    let n = g.n();
    if r == 0 {
        return Ok(NetResult::new(g, NetMethod::GreedyTree, 0, VertexSet::full(n)));
    }
    let (parent, depth, children) = bfs_tree(g);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by_key(|&v| (std::cmp::Reverse(depth[v]), v));

    let mut deleted = vec![false; n];
    let mut net = Vec::new();
    for &v in &order {
        if deleted[v] {
            continue;
        }
        if depth[v] <= r {
            let remaining: Vec<usize> = (0..n).filter(|&x| !deleted[x]).collect();
            let covered = !net.is_empty() && {
                let dist = g.bfs(&net, r);
                remaining.iter().all(|&x| dist[x] <= r)
            };
            if !covered {
                net.push(0);
            }
            break;
        }
        let mut u = v;
        for _ in 0..r {
            u = parent[u];
        }
        net.push(u);
        let mut stack = vec![u];
        while let Some(x) = stack.pop() {
            if !deleted[x] {
                deleted[x] = true;
                stack.extend(children[x].iter().copied());
            }
        }
    }
    let set = VertexSet::new(n, net)?;
    Ok(NetResult::new(g, NetMethod::GreedyTree, r, set))
}

/// BFS spanning tree from vertex 0: parents, depths and child lists.
fn bfs_tree(g: &WeightedGraph) -> (Vec<usize>, Vec<usize>, Vec<Vec<usize>>) {
    let n = g.n();
    let mut parent = vec![UNREACHED; n];
    let mut depth = vec![UNREACHED; n];
    let mut children = vec![Vec::new(); n];
    let mut queue = std::collections::VecDeque::from([0usize]);
    depth[0] = 0;
    parent[0] = 0;
    while let Some(u) = queue.pop_front() {
        for &w in g.neighbor_ids(u) {
            if depth[w] == UNREACHED {
                depth[w] = depth[u] + 1;
                parent[w] = u;
                children[u].push(w);
                queue.push_back(w);
            }
        }
    }
    (parent, depth, children)
}

/// `W_0 ∪ W_1`, where `W_0` keeps each vertex independently with probability
/// `p` and `W_1` is everything farther than `r` from `W_0`. Always an `r`-net.
pub fn random_expander_net(g: &WeightedGraph, r: usize, p: f64, seed: u64) -> Result<NetResult> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("p = {p} outside [0, 1]")));
    }
    let mut stream = rng::stream(seed, 0);
    let sampled: Vec<usize> = (0..g.n()).filter(|_| rng::open_unit(&mut stream) < p).collect();
    let dist = g.bfs(&sampled, r);
    let ids = (0..g.n()).filter(|&v| dist[v] == 0 || dist[v] > r).collect();
    Ok(NetResult::new(g, NetMethod::ExpanderRandom, r, VertexSet::new(g.n(), ids)?))
}

/// Maximal `s`-separated subset of `u`, scanning `u` in ascending order.
/// Every member of `u` ends up within distance `s - 1` of the output.
pub fn separated_subset_greedy(g: &WeightedGraph, u: &VertexSet, s: usize) -> Result<VertexSet> {
    if s == 0 {
        return Err(Error::Parameter("separation needs s >= 1".into()));
    }
    let mut blocked = vec![false; g.n()];
    let mut chosen = Vec::new();
    for v in u.iter() {
        if blocked[v] {
            continue;
        }
        chosen.push(v);
        for x in g.ball_vertices(v, s - 1) {
            blocked[x] = true;
        }
    }
    VertexSet::new(g.n(), chosen)
}

/// `{v : λ_1(B(v, s+1)) > x}`, where exceeding means by more than
/// [`HIGH_RADIUS_TOL`].
pub fn high_radius_set(g: &WeightedGraph, x: f64, s: usize) -> Result<VertexSet> {
    let lambdas = ball_lambdas(g, s + 1)?;
    let ids = (0..g.n()).filter(|&v| lambdas[v] > x + HIGH_RADIUS_TOL).collect();
    VertexSet::new(g.n(), ids)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadDropReport {
    pub r: usize,
    /// `λ_1(G - W)^{2r}`.
    pub lhs: f64,
    /// `λ_1(G)^{2r} - w_min^{2r}`.
    pub rhs: f64,
    pub slack: f64,
    pub ok: bool,
}

/// Checks `λ_1(G - W)^{2r} <= λ_1(G)^{2r} - w_min^{2r}` for an `r`-net `W`.
/// The slack allowance is [`RAD_DROP_TOL`] relative to `max(1, λ_1(G)^{2r})`.
pub fn net_removal_drop_check(g: &WeightedGraph, w: &VertexSet, r: usize) -> Result<RadDropReport> {
    if g.num_edges() == 0 {
        return Err(Error::NoEdges);
    }
    if !g.is_r_net(w, r) {
        return Err(Error::NotANet { r });
    }
    let exponent = 2 * r as i32;
    let (h, _) = g.remove_vertices(w);
    let lhs = if h.n() == 0 { 0.0 } else { lambda1(&h)?.powi(exponent) };
    let top = lambda1(g)?.powi(exponent);
    let rhs = top - g.w_min().powi(exponent);
    let slack = rhs - lhs;
    Ok(RadDropReport {
        r,
        lhs,
        rhs,
        slack,
        ok: slack >= -RAD_DROP_TOL * top.max(1.0),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, FamilySpec};
    use proptest::prelude::*;

    fn family(f: Family) -> WeightedGraph {
        generate(&FamilySpec::new(f)).unwrap()
    }

    fn set(n: usize, ids: &[usize]) -> VertexSet {
        VertexSet::new(n, ids.to_vec()).unwrap()
    }

    #[test]
    fn greedy_examples() {
        let p3 = family(Family::Path { n: 3 });
        let net = greedy_tree_net(&p3, 1).unwrap();
        assert_eq!(net.vertices.as_slice(), &[1]);
        assert!(net.verified);
        let p7 = family(Family::Path { n: 7 });
        let net = greedy_tree_net(&p7, 1).unwrap();
        assert!(net.len() <= 4 && net.verified);
        let c9 = family(Family::Cycle { n: 9 });
        assert_eq!(greedy_tree_net(&c9, 0).unwrap().vertices, VertexSet::full(9));
    }

    #[test]
    fn greedy_rejects_disconnected() {
        let g = WeightedGraph::build(4, &[(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert_eq!(greedy_tree_net(&g, 1), Err(Error::Disconnected { components: 2 }));
    }

    #[test]
    fn random_net_extremes() {
        let g = family(Family::Cycle { n: 20 });
        for p in [0.0, 1.0] {
            let net = random_expander_net(&g, 2, p, 4).unwrap();
            assert_eq!(net.density, 1.0);
            assert!(net.verified);
        }
        assert!(random_expander_net(&g, 2, 1.5, 4).is_err());
    }

    #[test]
    fn random_net_mean_density_matches_exact_expectation() {
        // v lies in W exactly when it is sampled or nothing in its 5-vertex
        // ball is, so E|W|/n = p + (1-p)^5.
        let g = family(Family::Cycle { n: 100 });
        let p = 0.3;
        let trials = 2000;
        let densities: Vec<f64> = (0..trials)
            .map(|s| random_expander_net(&g, 2, p, s).unwrap().density)
            .collect();
        let mean = densities.iter().sum::<f64>() / trials as f64;
        let var = densities.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (trials - 1) as f64;
        let sigma = (var / trials as f64).sqrt();
        let exact = p + (1.0 - p).powi(5);
        assert!((mean - exact).abs() <= 3.0 * sigma, "{mean} vs {exact} (σ {sigma})");
        assert!(mean <= 0.468 + 3.0 * sigma);
    }

    #[test]
    fn separated_examples() {
        let c6 = family(Family::Cycle { n: 6 });
        let full = VertexSet::full(6);
        assert_eq!(separated_subset_greedy(&c6, &full, 3).unwrap().as_slice(), &[0, 3]);
        assert!(separated_subset_greedy(&c6, &VertexSet::empty(6), 3).unwrap().is_empty());
        assert_eq!(separated_subset_greedy(&c6, &full, 1).unwrap(), full);
        assert!(separated_subset_greedy(&c6, &full, 0).is_err());
    }

    #[test]
    fn high_radius_examples() {
        let c12 = family(Family::Cycle { n: 12 });
        assert!(high_radius_set(&c12, 1.9, 1).unwrap().is_empty());
        assert_eq!(high_radius_set(&c12, 1.7, 1).unwrap(), VertexSet::full(12));
        assert!(high_radius_set(&c12, 2.0, 5).unwrap().is_empty());
    }

    #[test]
    fn rad_drop_examples() {
        let c6 = family(Family::Cycle { n: 6 });
        let rep = net_removal_drop_check(&c6, &set(6, &[0, 3]), 1).unwrap();
        assert!((rep.lhs - 1.0).abs() < 1e-12 && (rep.rhs - 3.0).abs() < 1e-12 && rep.ok);
        let k2 = family(Family::Complete { n: 2 });
        let rep = net_removal_drop_check(&k2, &set(2, &[0]), 1).unwrap();
        assert_eq!(rep.lhs, 0.0);
        assert!(rep.ok);
        assert_eq!(net_removal_drop_check(&c6, &set(6, &[0]), 1), Err(Error::NotANet { r: 1 }));
        let c100 = family(Family::Cycle { n: 100 });
        for shift in 0..5 {
            let perm: Vec<usize> = (0..100).map(|v| (v + 7 * shift) % 100).collect();
            let g = c100.permuted(&perm);
            let net = greedy_tree_net(&g, 3).unwrap();
            assert!(net_removal_drop_check(&g, &net.vertices, 3).unwrap().ok);
        }
    }

    fn corpus_graph(kind: u8, seed: u64, size: usize) -> WeightedGraph {
        let family = match kind % 4 {
            0 => Family::Cycle { n: size.max(3) },
            1 => Family::TorusGrid { rows: 3 + size % 7, cols: 3 + size / 7 % 9 },
            2 => Family::RandomRegular { n: 2 * (size / 2).max(4), d: 4 },
            _ => Family::RandomRegular { n: 2 * (size / 2).max(4), d: 3 },
        };
        let spec = FamilySpec::seeded(family, seed);
        let spec = if seed % 2 == 0 { spec.with_weights(0.5, 2.0) } else { spec };
        generate(&spec).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn greedy_size_bound(kind in 0u8..4, seed in 0u64..1000, size in 6usize..120, r in 0usize..11) {
            let g = corpus_graph(kind, seed, size);
            let net = greedy_tree_net(&g, r).unwrap();
            prop_assert!(net.verified);
            prop_assert!(net.len() <= g.n().div_ceil(r + 1));
        }

        #[test]
        fn both_nets_drop_the_radius(kind in 0u8..4, seed in 0u64..1000, size in 6usize..80, r in 1usize..4, p in 0.0f64..0.6) {
            let g = corpus_graph(kind, seed, size);
            for net in [greedy_tree_net(&g, r).unwrap(), random_expander_net(&g, r, p, seed).unwrap()] {
                prop_assert!(net.verified);
                let rep = net_removal_drop_check(&g, &net.vertices, r).unwrap();
                prop_assert!(rep.ok, "{rep:?}");
            }
        }

        #[test]
        fn separated_is_separated_and_maximal(kind in 0u8..4, seed in 0u64..1000, size in 6usize..80, s in 1usize..6, keep in 0.1f64..1.0) {
            let g = corpus_graph(kind, seed, size);
            let mut r = rng::stream(seed, 9);
            let u = VertexSet::new(g.n(), (0..g.n()).filter(|_| rng::open_unit(&mut r) < keep).collect()).unwrap();
            let out = separated_subset_greedy(&g, &u, s).unwrap();
            prop_assert!(g.is_s_separated(&out, s));
            prop_assert!(out.iter().all(|v| u.contains(v)));
            if !u.is_empty() {
                let dist = g.bfs(out.as_slice(), s.saturating_sub(1));
                prop_assert!(u.iter().all(|v| dist[v] < s));
            }
        }
    }
}
