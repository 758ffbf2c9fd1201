//! Largest adjacency eigenvalue of whole graphs and of balls.
//!
//! Each connected component is handled separately. Small components go to the
//! dense solver; larger ones use power iteration on `A + cI`, which is
//! entrywise nonnegative and irreducible on a component, so the
//! Collatz–Wielandt quotients of a positive iterate bracket its Perron root.

use rayon::prelude::*;

use super::eigen::symmetric_eigen;
use crate::error::{Error, Result};
use crate::graph::WeightedGraph;

/// Components up to this size are solved densely.
const DENSE_MAX: usize = 48;
/// Power iterations before falling back to the dense solver.
const POWER_ITERATIONS: usize = 4000;
/// Target relative width of the Collatz–Wielandt bracket.
const BRACKET_TOL: f64 = 1e-13;
/// Largest component the dense fallback accepts.
const DENSE_FALLBACK_MAX: usize = 4000;

/// `λ_1(G)`; zero for an edgeless graph.
pub fn lambda1(g: &WeightedGraph) -> Result<f64> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    let mut best = 0.0f64;
    for comp in g.components() {
        if comp.len() > 1 {
            best = best.max(connected_lambda1(&g.induced(&comp))?);
        }
    }
    Ok(best)
}

/// `λ_1(B_G(v, r))`.
pub fn lambda1_ball(g: &WeightedGraph, v: usize, r: usize) -> Result<f64> {
    if v >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: v, n: g.n() });
    }
    let ball = g.ball(v, r);
    if ball.graph.n() == 1 {
        return Ok(0.0);
    }
    connected_lambda1(&ball.graph)
}

/// `λ_1(B_G(v, r))` for every vertex, in vertex order. A ball that exhausts
/// its component reuses that component's value.
pub fn ball_lambdas(g: &WeightedGraph, r: usize) -> Result<Vec<f64>> {
    let comps = g.components();
    let mut comp_of = vec![0usize; g.n()];
    for (i, c) in comps.iter().enumerate() {
        for &v in c {
            comp_of[v] = i;
        }
    }
    let comp_lambda: Vec<std::sync::OnceLock<Result<f64>>> =
        (0..comps.len()).map(|_| std::sync::OnceLock::new()).collect();
    (0..g.n())
        .into_par_iter()
        .map(|v| {
            let vertices = g.ball_vertices(v, r);
            if vertices.len() == 1 {
                return Ok(0.0);
            }
            let c = comp_of[v];
            if vertices.len() == comps[c].len() {
                return comp_lambda[c]
                    .get_or_init(|| connected_lambda1(&g.induced(&comps[c])))
                    .clone();
            }
            connected_lambda1(&g.induced(&vertices))
        })
        .collect()
}

/// Perron root of a connected graph with at least one edge.
fn connected_lambda1(g: &WeightedGraph) -> Result<f64> {
    let n = g.n();
    if n <= DENSE_MAX {
        return dense_top(g);
    }
    match power_top(g) {
        Some(l) => Ok(l),
        None if n <= DENSE_FALLBACK_MAX => dense_top(g),
        None => Err(Error::NonConvergence {
            index: n - 1,
            iterations: POWER_ITERATIONS,
        }),
    }
}

fn dense_top(g: &WeightedGraph) -> Result<f64> {
    let dec = symmetric_eigen(g.dense_adjacency(), g.n(), false)?;
    Ok(dec.values.last().copied().unwrap_or(0.0).max(0.0))
}

fn power_top(g: &WeightedGraph) -> Option<f64> {
    let n = g.n();
    let shift = g.max_weighted_degree();
    let mut x = vec![1.0; n];
    let mut y = vec![0.0; n];
    for _ in 0..POWER_ITERATIONS {
        g.matvec(&x, &mut y);
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        let mut norm = 0.0f64;
        for (yi, &xi) in y.iter_mut().zip(&x) {
            *yi += shift * xi;
            let q = *yi / xi;
            lo = lo.min(q);
            hi = hi.max(q);
            norm = norm.max(*yi);
        }
        if hi - lo <= BRACKET_TOL * hi {
            return Some(0.5 * (lo + hi) - shift);
        }
        for (xi, &yi) in x.iter_mut().zip(&y) {
            *xi = yi / norm;
        }
        if x.iter().any(|&v| v < 1e-250) {
            return None;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, FamilySpec};
    use std::f64::consts::PI;

    fn cycle(n: usize) -> WeightedGraph {
        generate(&FamilySpec::new(Family::Cycle { n })).unwrap()
    }

    #[test]
    fn closed_forms() {
        assert!((lambda1(&cycle(6)).unwrap() - 2.0).abs() < 1e-12);
        let p5 = generate(&FamilySpec::new(Family::Path { n: 5 })).unwrap();
        assert!((lambda1(&p5).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        let c12 = cycle(12);
        for v in 0..12 {
            assert!((lambda1_ball(&c12, v, 2).unwrap() - 3f64.sqrt()).abs() < 1e-12);
        }
    }

    #[test]
    fn power_route_matches_closed_form() {
        // Paths beyond the dense cutoff exercise power iteration.
        for n in [60usize, 120] {
            let p = generate(&FamilySpec::new(Family::Path { n })).unwrap();
            let want = 2.0 * (PI / (n as f64 + 1.0)).cos();
            let got = lambda1(&p).unwrap();
            assert!((got - want).abs() <= 1e-10 * want, "n={n}: {got} vs {want}");
        }
    }

    #[test]
    fn power_route_matches_dense_on_weighted_balls() {
        let spec = FamilySpec::seeded(Family::RandomRegular { n: 300, d: 4 }, 2).with_weights(0.5, 2.0);
        let g = generate(&spec).unwrap();
        for v in [0usize, 17, 123] {
            let ball = g.ball(v, 4);
            assert!(ball.graph.n() > DENSE_MAX);
            let a = power_top(&ball.graph).expect("converges");
            let b = dense_top(&ball.graph).unwrap();
            assert!((a - b).abs() <= 1e-10 * b);
        }
    }

    #[test]
    fn ball_lambdas_agree_with_single_queries() {
        let g = generate(&FamilySpec::seeded(Family::RandomRegular { n: 40, d: 3 }, 5)).unwrap();
        for r in 0..5 {
            let all = ball_lambdas(&g, r).unwrap();
            for v in 0..g.n() {
                assert!((all[v] - lambda1_ball(&g, v, r).unwrap()).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn disconnected_and_degenerate() {
        let g = WeightedGraph::build(5, &[(0, 1, 1.0), (2, 3, 1.0), (3, 4, 1.0)]).unwrap();
        assert!((lambda1(&g).unwrap() - 2f64.sqrt()).abs() < 1e-12);
        let empty = WeightedGraph::build(3, &[]).unwrap();
        assert_eq!(lambda1(&empty).unwrap(), 0.0);
        assert_eq!(lambda1(&WeightedGraph::build(0, &[]).unwrap()), Err(Error::EmptyGraph));
    }
}
