use serde::{Deserialize, Serialize};

use super::{VertexSet, WeightedGraph};
use crate::error::{Error, Result};
use crate::rng;

/// Largest `n` for which every subset is enumerated.
pub const EXACT_EXPANSION_MAX: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum ExpansionMode {
    /// Enumerate every `S` with `|S| <= n/2`.
    Exact,
    /// Examine up to `budget` connected subsets: balls first, then randomly
    /// grown connected sets.
    MonteCarlo { budget: usize, seed: u64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum ExpansionVerdict {
    Certified,
    /// A set with `|S| <= n/2` and fewer than `c|S|` outside neighbors; the
    /// reported set has the smallest ratio found.
    Falsified { witness: VertexSet, outside: usize },
    Inconclusive,
}

/// Tests the c-expander property: every nonempty `S` with `|S| <= n/2` has at
/// least `c|S|` vertices outside `S` adjacent to `S`. Certification is only
/// possible by exhaustive enumeration.
pub fn expander_spot_check(g: &WeightedGraph, c: f64, mode: ExpansionMode) -> Result<ExpansionVerdict> {
    match mode {
        ExpansionMode::Exact => exact(g, c),
        ExpansionMode::MonteCarlo { budget, seed } => Ok(sampled(g, c, budget, seed)),
    }
}

fn fails(outside: usize, size: usize, c: f64) -> bool {
    (outside as f64) < c * size as f64
}

fn exact(g: &WeightedGraph, c: f64) -> Result<ExpansionVerdict> {
    let n = g.n();
    if n > EXACT_EXPANSION_MAX {
        return Err(Error::ExactTooLarge {
            n,
            max: EXACT_EXPANSION_MAX,
        });
    }
    let nbr: Vec<u32> = (0..n)
        .map(|v| g.neighbor_ids(v).iter().fold(0u32, |m, &u| m | (1 << u)))
        .collect();
    let total = 1usize << n;
    let mut reach = vec![0u32; total];
    let mut best: Option<(usize, usize, u32)> = None;
    for s in 1..total {
        let low = s.trailing_zeros() as usize;
        reach[s] = reach[s & (s - 1)] | nbr[low];
        let size = s.count_ones() as usize;
        if 2 * size > n {
            continue;
        }
        let outside = (reach[s] & !(s as u32)).count_ones() as usize;
        if fails(outside, size, c) {
            let better = match best {
                None => true,
                Some((o, k, _)) => outside * k < o * size,
            };
            if better {
                best = Some((outside, size, s as u32));
            }
        }
    }
    Ok(match best {
        None => ExpansionVerdict::Certified,
        Some((outside, _, mask)) => ExpansionVerdict::Falsified {
            witness: VertexSet::new(n, (0..n).filter(|&v| mask >> v & 1 == 1).collect())
                .expect("ids < n"),
            outside,
        },
    })
}

/// Incrementally grown vertex set with its outer boundary size.
struct Growing {
    in_set: Vec<bool>,
    touch: Vec<u32>,
    members: Vec<usize>,
    outside: usize,
}

impl Growing {
    fn new(n: usize) -> Self {
        Self {
            in_set: vec![false; n],
            touch: vec![0; n],
            members: Vec::new(),
            outside: 0,
        }
    }

    fn add(&mut self, g: &WeightedGraph, x: usize) {
        if self.touch[x] > 0 {
            self.outside -= 1;
        }
        self.in_set[x] = true;
        self.members.push(x);
        for &y in g.neighbor_ids(x) {
            if !self.in_set[y] {
                if self.touch[y] == 0 {
                    self.outside += 1;
                }
                self.touch[y] += 1;
            }
        }
    }

    fn boundary(&self) -> Vec<usize> {
        (0..self.in_set.len())
            .filter(|&v| !self.in_set[v] && self.touch[v] > 0)
            .collect()
    }
}

fn sampled(g: &WeightedGraph, c: f64, budget: usize, seed: u64) -> ExpansionVerdict {
    let n = g.n();
    let half = n / 2;
    let mut best: Option<(usize, Vec<usize>)> = None;
    let mut used = 0usize;
    let consider = |outside: usize, members: &[usize], best: &mut Option<(usize, Vec<usize>)>| {
        let size = members.len();
        if size == 0 || size > half || !fails(outside, size, c) {
            return;
        }
        let better = match best {
            None => true,
            Some((o, m)) => outside * m.len() < *o * size,
        };
        if better {
            *best = Some((outside, members.to_vec()));
        }
    };

    // Balls in breadth-first order around each vertex.
    'balls: for v in 0..n {
        let dist = g.distances_from(v);
        let mut order: Vec<usize> = (0..n).filter(|&u| dist[u] != super::UNREACHED).collect();
        order.sort_by_key(|&u| (dist[u], u));
        let mut set = Growing::new(n);
        for (i, &u) in order.iter().enumerate() {
            if set.members.len() >= half {
                break;
            }
            set.add(g, u);
            let layer_done = order.get(i + 1).is_none_or(|&w| dist[w] != dist[u]);
            if layer_done {
                consider(set.outside, &set.members, &mut best);
                used += 1;
                if used >= budget {
                    break 'balls;
                }
            }
        }
    }

    let mut rng = rng::stream(seed, 0);
    while used < budget && n > 1 {
        let mut set = Growing::new(n);
        set.add(g, rng::index(&mut rng, n));
        consider(set.outside, &set.members, &mut best);
        used += 1;
        while set.members.len() < half && used < budget {
            let boundary = set.boundary();
            if boundary.is_empty() {
                break;
            }
            set.add(g, boundary[rng::index(&mut rng, boundary.len())]);
            consider(set.outside, &set.members, &mut best);
            used += 1;
        }
    }

    match best {
        None => ExpansionVerdict::Inconclusive,
        Some((outside, members)) => ExpansionVerdict::Falsified {
            witness: VertexSet::new(n, members).expect("ids < n"),
            outside,
        },
    }
}
