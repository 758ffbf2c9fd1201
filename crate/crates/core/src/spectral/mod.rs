//! Spectra of weighted adjacency matrices, eigenvalue counting over
//! intervals, closed-walk traces and the local-global comparison.

mod eigen;
mod lambda;

pub use eigen::{symmetric_eigen, Decomposition};
pub use lambda::{ball_lambdas, lambda1, lambda1_ball};

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numeric::{compensated_sum, CompensatedSum};

/// Endpoint tolerance for interval membership.
pub const TOL_EIG: f64 = 1e-8;
pub const DEFAULT_SOLVER_CAP: usize = 4000;
/// Largest even power accepted by [`trace_power`].
pub const MAX_TRACE_POWER: usize = 200;
/// Relative slack allowed in the local-global inequality.
pub const LOCAL_GLOBAL_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenOptions {
    pub cap: usize,
    /// Also compute eigenvectors to report `max_i |A v_i - λ_i v_i|`.
    pub residual: bool,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self {
            cap: DEFAULT_SOLVER_CAP,
            residual: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// Largest eigenpair residual, when eigenvectors were computed.
    pub residual_bound: Option<f64>,
}

impl Spectrum {
    pub fn from_eigenvalues(mut eigenvalues: Vec<f64>) -> Self {
        eigenvalues.sort_by(f64::total_cmp);
        Self {
            eigenvalues,
            residual_bound: None,
        }
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn largest(&self) -> Option<f64> {
        self.eigenvalues.last().copied()
    }

    pub fn second_largest(&self) -> Option<f64> {
        let n = self.eigenvalues.len();
        (n >= 2).then(|| self.eigenvalues[n - 2])
    }

    /// `m_G(I)`.
    pub fn count(&self, interval: &SpectralInterval) -> usize {
        self.eigenvalues.iter().filter(|&&l| interval.contains(l)).count()
    }

    /// `m_G(-∞, x]` by binary search, with the same tolerance as
    /// [`SpectralInterval::contains`].
    pub fn count_at_most(&self, x: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l <= x + TOL_EIG)
    }

    /// `m_G(-∞, x)` by binary search.
    pub fn count_below(&self, x: f64) -> usize {
        self.eigenvalues.partition_point(|&l| l < x - TOL_EIG)
    }

    /// `μ_G(I) = m_G(I) / n`; zero for an empty spectrum.
    pub fn mu(&self, interval: &SpectralInterval) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.count(interval) as f64 / self.len() as f64
    }

    /// `Σ λ_i^k`.
    pub fn power_sum(&self, k: usize) -> f64 {
        compensated_sum(self.eigenvalues.iter().map(|&l| l.powi(k as i32)))
    }

    pub fn interval_record(&self, interval: &SpectralInterval) -> IntervalRecord {
        let (a, closed_a) = interval.lower.parts();
        let (b, closed_b) = interval.upper.parts();
        IntervalRecord {
            a,
            b,
            closed_a,
            closed_b,
            count: self.count(interval),
            mu: self.mu(interval),
        }
    }

    /// CSV with columns `index,eigenvalue`, 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("index,eigenvalue\n");
        for (i, l) in self.eigenvalues.iter().enumerate() {
            writeln!(out, "{i},{l:.16e}").unwrap();
        }
        out
    }
}

/// Full spectrum with default options.
pub fn eigenvalues(g: &WeightedGraph) -> Result<Spectrum> {
    eigenvalues_with(g, EigenOptions::default())
}

pub fn eigenvalues_with(g: &WeightedGraph, opts: EigenOptions) -> Result<Spectrum> {
    let n = g.n();
    if n > opts.cap {
        return Err(Error::SolverCap { n, cap: opts.cap });
    }
    let dec = symmetric_eigen(g.dense_adjacency(), n, opts.residual)?;
    let residual_bound = dec.vectors.as_ref().map(|_| {
        let mut y = vec![0.0; n];
        let mut worst = 0.0f64;
        for (i, &l) in dec.values.iter().enumerate() {
            let v = dec.vector(i).expect("vectors present");
            g.matvec(v, &mut y);
            let r: f64 = y.iter().zip(v).map(|(a, b)| (a - l * b).powi(2)).sum();
            worst = worst.max(r.sqrt());
        }
        worst
    });
    Ok(Spectrum {
        eigenvalues: dec.values,
        residual_bound,
    })
}

pub fn mu(spectrum: &Spectrum, interval: &SpectralInterval) -> f64 {
    spectrum.mu(interval)
}

pub fn m_count(spectrum: &Spectrum, interval: &SpectralInterval) -> usize {
    spectrum.count(interval)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Endpoint {
    Closed(f64),
    Open(f64),
    Unbounded,
}

impl Endpoint {
    fn value(self) -> Option<f64> {
        match self {
            Endpoint::Closed(a) | Endpoint::Open(a) => Some(a),
            Endpoint::Unbounded => None,
        }
    }

    fn parts(self) -> (Option<f64>, bool) {
        match self {
            Endpoint::Closed(a) => (Some(a), true),
            Endpoint::Open(a) => (Some(a), false),
            Endpoint::Unbounded => (None, false),
        }
    }
}

/// A real interval with independently open, closed or infinite ends.
///
/// Membership uses [`TOL_EIG`]: a closed end admits values within the
/// tolerance outside it, an open end excludes values within the tolerance
/// inside it. With this rule `(-∞, a]` and `(a, ∞)` partition the line, as do
/// `[a, b)` and `[b, c]` of `[a, c]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralInterval {
    pub lower: Endpoint,
    pub upper: Endpoint,
}

impl SpectralInterval {
    pub fn new(lower: Endpoint, upper: Endpoint) -> Result<Self> {
        for e in [lower, upper] {
            if e.value().is_some_and(|x| !x.is_finite()) {
                return Err(Error::Parameter("interval endpoints must be finite; use Unbounded".into()));
            }
        }
        if let (Some(a), Some(b)) = (lower.value(), upper.value()) {
            if a > b {
                return Err(Error::Parameter(format!("interval endpoints out of order: {a} > {b}")));
            }
        }
        Ok(Self { lower, upper })
    }

    /// `[a, b]`.
    pub fn closed(a: f64, b: f64) -> Result<Self> {
        Self::new(Endpoint::Closed(a), Endpoint::Closed(b))
    }

    /// `(a, b)`.
    pub fn open(a: f64, b: f64) -> Result<Self> {
        Self::new(Endpoint::Open(a), Endpoint::Open(b))
    }

    /// `(a, ∞)`.
    pub fn above(a: f64) -> Result<Self> {
        Self::new(Endpoint::Open(a), Endpoint::Unbounded)
    }

    /// `[a, ∞)`.
    pub fn at_least(a: f64) -> Result<Self> {
        Self::new(Endpoint::Closed(a), Endpoint::Unbounded)
    }

    /// `(-∞, b]`.
    pub fn at_most(b: f64) -> Result<Self> {
        Self::new(Endpoint::Unbounded, Endpoint::Closed(b))
    }

    /// `(-∞, b)`.
    pub fn below(b: f64) -> Result<Self> {
        Self::new(Endpoint::Unbounded, Endpoint::Open(b))
    }

    /// The whole line.
    pub fn all() -> Self {
        Self {
            lower: Endpoint::Unbounded,
            upper: Endpoint::Unbounded,
        }
    }

    pub fn contains(&self, x: f64) -> bool {
        let lower_ok = match self.lower {
            Endpoint::Closed(a) => x >= a - TOL_EIG,
            Endpoint::Open(a) => x > a + TOL_EIG,
            Endpoint::Unbounded => true,
        };
        let upper_ok = match self.upper {
            Endpoint::Closed(b) => x <= b + TOL_EIG,
            Endpoint::Open(b) => x < b - TOL_EIG,
            Endpoint::Unbounded => true,
        };
        lower_ok && upper_ok
    }
}

/// JSON form of an interval query; infinite ends are `null`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub a: Option<f64>,
    pub b: Option<f64>,
    pub closed_a: bool,
    pub closed_b: bool,
    pub count: usize,
    pub mu: f64,
}

fn check_power(k: usize) -> Result<()> {
    if k % 2 == 1 || k > MAX_TRACE_POWER {
        return Err(Error::InvalidPower {
            k,
            max: MAX_TRACE_POWER,
        });
    }
    Ok(())
}

/// `tr A^k = Σ_v |A^{k/2} 1_v|^2`, by sparse matrix-vector products and
/// compensated summation in ascending vertex order.
pub fn trace_power(g: &WeightedGraph, k: usize) -> Result<f64> {
    check_power(k)?;
    let half = k / 2;
    let per_vertex: Vec<f64> = (0..g.n())
        .into_par_iter()
        .map_init(
            || (vec![0.0; g.n()], vec![0.0; g.n()]),
            |(x, y), v| {
                x.fill(0.0);
                x[v] = 1.0;
                for _ in 0..half {
                    g.matvec(x, y);
                    std::mem::swap(x, y);
                }
                x.iter().map(|t| t * t).collect::<CompensatedSum>().value()
            },
        )
        .collect();
    Ok(compensated_sum(per_vertex))
}

/// `tr A^k = Σ λ_i^k` from a computed spectrum.
pub fn trace_power_spectral(spectrum: &Spectrum, k: usize) -> Result<f64> {
    check_power(k)?;
    Ok(spectrum.power_sum(k))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceCheck {
    pub k: usize,
    pub matvec: f64,
    pub spectral: f64,
    pub relative_gap: f64,
}

/// Both routes to `tr A^k` side by side.
pub fn trace_power_checked(g: &WeightedGraph, spectrum: &Spectrum, k: usize) -> Result<TraceCheck> {
    let matvec = trace_power(g, k)?;
    let spectral = trace_power_spectral(spectrum, k)?;
    let scale = matvec.abs().max(spectral.abs());
    let relative_gap = if scale == 0.0 { 0.0 } else { (matvec - spectral).abs() / scale };
    Ok(TraceCheck {
        k,
        matvec,
        spectral,
        relative_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalGlobalReport {
    pub r: usize,
    /// `tr A^{2r}`.
    pub lhs: f64,
    /// `Σ_v λ_1(B(v, r))^{2r}`.
    pub rhs: f64,
    pub slack: f64,
    pub holds: bool,
}

/// Compares `tr A^{2r}` with `Σ_v λ_1(B(v, r))^{2r}`.
pub fn local_global_check(g: &WeightedGraph, r: usize) -> Result<LocalGlobalReport> {
    if r == 0 {
        return Err(Error::Parameter("local-global check needs r >= 1".into()));
    }
    let lhs = trace_power(g, 2 * r)?;
    let rhs = compensated_sum(ball_lambdas(g, r)?.into_iter().map(|l| l.powi(2 * r as i32)));
    let slack = rhs - lhs;
    Ok(LocalGlobalReport {
        r,
        lhs,
        rhs,
        slack,
        holds: slack >= -LOCAL_GLOBAL_TOL * rhs,
    })
}
