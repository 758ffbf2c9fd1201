//! Return probabilities and closed-walk moments on finite graphs and on the
//! infinite d-regular tree, the Kesten–McKay measure, and the exponent
//! correspondence between spectral mass at the top and return decay.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::graph::WeightedGraph;
use crate::numeric::{least_squares, CompensatedSum};

/// Longest finite series.
pub const MAX_FINITE_STEPS: usize = 500;
/// Longest tree series, in half-steps.
pub const MAX_TREE_HALF_STEPS: usize = 5000;
/// Minimum number of points in a decay fit.
pub const MIN_FIT_POINTS: usize = 5;
/// Target passed to the quadrature routine; the achieved error is well
/// under the required 1e-10.
const QUADRATURE_TARGET: f64 = 1e-14;
/// Rescale an iterate once its largest entry leaves this range.
const RESCALE_BELOW: f64 = 1e-150;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesKind {
    /// Simple random walk return probabilities `p_k = d^{-k} M_k`.
    SrwProbability,
    /// Raw moments `M_k = <1_o, A^k 1_o>`.
    AdjacencyMoment,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeriesSource {
    FiniteGraph,
    TreeDp,
    Synthetic,
}

/// A return series `k -> value_k`. Tree and synthetic series hold only even
/// steps; `values[i]` is then step `2i`. Values are also kept as natural
/// logs since long series underflow.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub kind: SeriesKind,
    pub source: SeriesSource,
    pub degree: Option<usize>,
    pub even_only: bool,
    /// Odd steps vanish.
    pub bipartite: bool,
    pub values: Vec<f64>,
    pub log_values: Vec<f64>,
}

impl ReturnSeries {
    /// Builds a series from natural logs of its values.
    pub fn from_logs(
        kind: SeriesKind,
        source: SeriesSource,
        degree: Option<usize>,
        even_only: bool,
        bipartite: bool,
        log_values: Vec<f64>,
    ) -> Self {
        ReturnSeries {
            kind,
            source,
            degree,
            even_only,
            bipartite,
            values: log_values.iter().map(|l| l.exp()).collect(),
            log_values,
        }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Largest step held.
    pub fn max_step(&self) -> usize {
        let last = self.len().saturating_sub(1);
        if self.even_only {
            2 * last
        } else {
            last
        }
    }

    /// `ln value_k`, or `None` when step `k` is not held.
    pub fn log_value(&self, k: usize) -> Option<f64> {
        if self.even_only {
            if k % 2 == 1 {
                return (k <= self.max_step()).then_some(f64::NEG_INFINITY);
            }
            self.log_values.get(k / 2).copied()
        } else {
            self.log_values.get(k).copied()
        }
    }

    /// `ln M_k`.
    pub fn ln_moment(&self, k: usize, d: f64) -> Option<f64> {
        let l = self.log_value(k)?;
        Some(match self.kind {
            SeriesKind::AdjacencyMoment => l,
            SeriesKind::SrwProbability => l + k as f64 * d.ln(),
        })
    }

    /// `ln p_k = ln M_k - k ln d`.
    pub fn ln_probability(&self, k: usize, d: f64) -> Option<f64> {
        let l = self.log_value(k)?;
        Some(match self.kind {
            SeriesKind::SrwProbability => l,
            SeriesKind::AdjacencyMoment => l - k as f64 * d.ln(),
        })
    }

    fn default_degree(&self) -> Result<f64> {
        self.degree
            .map(|d| d as f64)
            .ok_or_else(|| Error::Parameter("series carries no degree".into()))
    }

    /// The 2x2 Hankel minors `M_0 M_4 - M_2^2` and `M_2 M_6 - M_4^2`, each
    /// divided by its larger product so the result lies in `[-1, 1]`.
    pub fn hankel_minors(&self) -> Option<[f64; 2]> {
        let m = |k: usize| self.ln_moment(k, self.degree.unwrap_or(1) as f64);
        let (m0, m2, m4, m6) = (m(0)?, m(2)?, m(4)?, m(6)?);
        let minor = |a: f64, b: f64, c: f64| {
            let (p, q) = (a + b, 2.0 * c);
            let top = p.max(q);
            if top == f64::NEG_INFINITY {
                0.0
            } else {
                (p - top).exp() - (q - top).exp()
            }
        };
        Some([minor(m0, m4, m2), minor(m2, m6, m4)])
    }

    /// Checks the sequence invariants: `p_0 = 1`, `p_k` in `[0, 1]`, vanishing
    /// odd steps for bipartite sources and nonnegative Hankel minors.
    pub fn validate(&self) -> Result<()> {
        const TOL: f64 = 1e-12;
        if self.kind == SeriesKind::SrwProbability {
            if (self.values.first().copied().unwrap_or(1.0) - 1.0).abs() > TOL {
                return Err(Error::Hypothesis("p_0 != 1".into()));
            }
            if let Some(k) = self.values.iter().position(|&p| !(-TOL..=1.0 + TOL).contains(&p)) {
                return Err(Error::Hypothesis(format!("p_{k} outside [0, 1]")));
            }
        }
        if self.bipartite && !self.even_only {
            if let Some(k) = (1..self.len()).step_by(2).find(|&k| self.values[k] != 0.0) {
                return Err(Error::Hypothesis(format!("odd step {k} nonzero on a bipartite source")));
            }
        }
        if let Some(minors) = self.hankel_minors() {
            if minors.iter().any(|&m| m < -1e-10) {
                return Err(Error::Hypothesis(format!("negative Hankel minor {minors:?}")));
            }
        }
        Ok(())
    }

    /// Even steps as CSV `n,p_2n,scaled` with `scaled = p_2n (d/rho)^{2n}`.
    pub fn to_csv(&self, rho: f64) -> Result<String> {
        let d = self.default_degree()?;
        let mut out = String::from("n,p_2n,scaled\n");
        for n in 0..=self.max_step() / 2 {
            let lp = self.ln_probability(2 * n, d).expect("step within range");
            let p = match self.kind {
                SeriesKind::SrwProbability => self.values[if self.even_only { n } else { 2 * n }],
                SeriesKind::AdjacencyMoment => lp.exp(),
            };
            let scaled = lp + 2.0 * n as f64 * (d / rho).ln();
            writeln!(out, "{n},{p:.16e},{:.16e}", scaled.exp()).expect("write to string");
        }
        Ok(out)
    }

    /// `d p_{2n}^{1/(2n)}`.
    pub fn rho_estimate(&self, n: usize) -> Result<f64> {
        let d = self.default_degree()?;
        let lp = self
            .ln_probability(2 * n, d)
            .ok_or_else(|| Error::Parameter(format!("step {} not in series", 2 * n)))?;
        Ok(d * (lp / (2 * n) as f64).exp())
    }
}

fn is_bipartite(g: &WeightedGraph) -> bool {
    let mut color = vec![u8::MAX; g.n()];
    for s in 0..g.n() {
        if color[s] != u8::MAX {
            continue;
        }
        color[s] = 0;
        let mut stack = vec![s];
        while let Some(u) = stack.pop() {
            for &v in g.neighbor_ids(u) {
                if color[v] == u8::MAX {
                    color[v] = 1 - color[u];
                    stack.push(v);
                } else if color[v] == color[u] {
                    return false;
                }
            }
        }
    }
    true
}

/// `y = A x / scale` with compensated row sums.
fn scaled_matvec(g: &WeightedGraph, x: &[f64], y: &mut [f64], scale: f64) {
    for (u, yu) in y.iter_mut().enumerate() {
        let mut acc = CompensatedSum::new();
        for (v, w) in g.neighbors(u) {
            acc.add(w * x[v]);
        }
        *yu = acc.value() / scale;
    }
}

/// Logs of `<1_o, (A/scale)^k 1_o>` for `k = 0..=steps`, renormalizing the
/// iterate so that long runs do not underflow.
fn log_diagonal_walk(g: &WeightedGraph, o: usize, steps: usize, scale: f64) -> Vec<f64> {
    let n = g.n();
    let mut x = vec![0.0; n];
    x[o] = 1.0;
    let mut y = vec![0.0; n];
    let mut ln_scale = 0.0;
    let mut out = Vec::with_capacity(steps + 1);
    out.push(0.0);
    for _ in 0..steps {
        scaled_matvec(g, &x, &mut y, scale);
        std::mem::swap(&mut x, &mut y);
        let top = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if top > 0.0 && top < RESCALE_BELOW {
            x.iter_mut().for_each(|v| *v /= top);
            ln_scale += top.ln();
        }
        out.push(if x[o] > 0.0 { x[o].ln() + ln_scale } else { f64::NEG_INFINITY });
    }
    out
}

fn check_vertex(g: &WeightedGraph, o: usize) -> Result<()> {
    if o >= g.n() {
        return Err(Error::VertexOutOfRange { vertex: o, n: g.n() });
    }
    Ok(())
}

fn check_steps(steps: usize) -> Result<()> {
    if steps > MAX_FINITE_STEPS {
        return Err(Error::Parameter(format!("K = {steps} exceeds {MAX_FINITE_STEPS}")));
    }
    Ok(())
}

/// Simple random walk return probabilities `p_0..p_K` from `o` on a
/// unit-weighted regular graph.
pub fn return_probs_finite(g: &WeightedGraph, o: usize, steps: usize) -> Result<ReturnSeries> {
    check_vertex(g, o)?;
    check_steps(steps)?;
    if let Some((u, v, w)) = g.edges().find(|e| e.2 != 1.0) {
        return Err(Error::NotUnitWeighted { u, v, w });
    }
    let d = g.degree(0);
    if let Some(v) = (0..g.n()).find(|&v| g.degree(v) != d) {
        return Err(Error::NotRegular {
            vertex: v,
            degree: g.degree(v),
            expected: d,
        });
    }
    if d == 0 {
        return Err(Error::NoEdges);
    }
    Ok(ReturnSeries::from_logs(
        SeriesKind::SrwProbability,
        SeriesSource::FiniteGraph,
        Some(d),
        false,
        is_bipartite(g),
        log_diagonal_walk(g, o, steps, d as f64),
    ))
}

/// Raw moments `M_0..M_K` at `o` on any graph. Values beyond the `f64`
/// range read as infinity; the logs stay exact.
pub fn adjacency_moments(g: &WeightedGraph, o: usize, steps: usize) -> Result<ReturnSeries> {
    check_vertex(g, o)?;
    check_steps(steps)?;
    let scale = g.max_weighted_degree().max(f64::MIN_POSITIVE);
    let logs = log_diagonal_walk(g, o, steps, scale)
        .into_iter()
        .enumerate()
        .map(|(k, l)| l + k as f64 * scale.ln())
        .collect();
    Ok(ReturnSeries::from_logs(
        SeriesKind::AdjacencyMoment,
        SeriesSource::FiniteGraph,
        g.regular_degree(),
        false,
        is_bipartite(g),
        logs,
    ))
}

/// `(1/n) sum_o M_k(o)` for `k = 0..=K`, the moments of the spectral measure
/// with a uniform root.
pub fn mean_adjacency_moments(g: &WeightedGraph, steps: usize) -> Result<Vec<f64>> {
    if g.n() == 0 {
        return Err(Error::EmptyGraph);
    }
    check_steps(steps)?;
    let per_vertex: Vec<Vec<f64>> = (0..g.n())
        .into_par_iter()
        .map(|o| adjacency_moments(g, o, steps).map(|s| s.values))
        .collect::<Result<_>>()?;
    Ok((0..=steps)
        .map(|k| per_vertex.iter().map(|s| s[k]).collect::<CompensatedSum>().value() / g.n() as f64)
        .collect())
}

/// `p_{2n}` for `n = 0..=N` on the infinite d-regular tree.
///
/// The walk's distance from the root is a birth–death chain. Weighting
/// distance `j >= 1` by `(d-1)^{-(j-1)/2}` makes both links between `j` and
/// `j+1` equal `sqrt(d-1)/d`, which keeps the root entry within polynomial
/// range of the largest entry; the overall scale is tracked in logs. The
/// root links stay `1` and `1/d`, so `p_2 = 1/d` exactly. Truncating at
/// distance `N` is exact for walks of length `2N`.
pub fn tree_return_probs(d: usize, half_steps: usize) -> Result<ReturnSeries> {
    if d < 3 {
        return Err(Error::Parameter(format!("tree series needs d >= 3, got {d}")));
    }
    if half_steps > MAX_TREE_HALF_STEPS {
        return Err(Error::Parameter(format!("N = {half_steps} exceeds {MAX_TREE_HALF_STEPS}")));
    }
    let df = d as f64;
    let link = (df - 1.0).sqrt() / df;
    let width = half_steps + 2;
    let mut q = vec![0.0; width];
    let mut next = vec![0.0; width];
    q[0] = 1.0;
    let mut ln_scale = 0.0;
    let mut logs = Vec::with_capacity(half_steps + 1);
    let mut values = Vec::with_capacity(half_steps + 1);
    logs.push(0.0);
    values.push(1.0);
    for step in 1..=2 * half_steps {
        // Distances reachable now and still able to return in time.
        let reach = step.min(2 * half_steps - step).min(half_steps);
        next[0] = q[1] / df;
        if reach >= 1 {
            next[1] = q[0] + link * q[2];
        }
        for j in 2..=reach {
            next[j] = link * (q[j - 1] + q[j + 1]);
        }
        for v in next.iter_mut().skip(reach + 1) {
            *v = 0.0;
        }
        std::mem::swap(&mut q, &mut next);
        let top = q.iter().fold(0.0f64, |m, &v| m.max(v));
        if top < RESCALE_BELOW {
            q.iter_mut().for_each(|v| *v /= top);
            ln_scale += top.ln();
        }
        if step % 2 == 0 {
            // Unscaled values are kept as computed; exp(ln p) would cost an ulp.
            values.push(if ln_scale == 0.0 { q[0] } else { q[0] * ln_scale.exp() });
            logs.push(q[0].ln() + ln_scale);
        }
    }
    Ok(ReturnSeries {
        kind: SeriesKind::SrwProbability,
        source: SeriesSource::TreeDp,
        degree: Some(d),
        even_only: true,
        bipartite: true,
        values,
        log_values: logs,
    })
}

/// The Kesten–McKay law of the d-regular tree, density
/// `d sqrt(rho^2 - x^2) / (2 pi (d^2 - x^2))` on `[-rho, rho]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KestenRef {
    pub d: usize,
    /// `2 sqrt(d - 1)`.
    pub rho: f64,
}

impl KestenRef {
    pub fn new(d: usize) -> Result<Self> {
        if d < 3 {
            return Err(Error::Parameter(format!("Kesten–McKay law needs d >= 3, got {d}")));
        }
        Ok(KestenRef {
            d,
            rho: 2.0 * ((d - 1) as f64).sqrt(),
        })
    }

    pub fn density(&self, x: f64) -> f64 {
        if x.abs() >= self.rho {
            return 0.0;
        }
        let d = self.d as f64;
        d * (self.rho * self.rho - x * x).sqrt() / (2.0 * std::f64::consts::PI * (d * d - x * x))
    }

    /// `∫ g(x) dμ(x)` over `[lo, hi] ∩ [-rho, rho]`, via `x = rho cos φ`
    /// which removes the square-root edges. Returns the value and the
    /// quadrature error estimate.
    fn integrate(&self, lo: f64, hi: f64, g: impl Fn(f64) -> f64) -> (f64, f64) {
        let lo = lo.max(-self.rho);
        let hi = hi.min(self.rho);
        if lo >= hi {
            return (0.0, 0.0);
        }
        let d = self.d as f64;
        let phi_lo = (hi / self.rho).clamp(-1.0, 1.0).acos();
        let phi_hi = (lo / self.rho).clamp(-1.0, 1.0).acos();
        let rho = self.rho;
        let out = quadrature::double_exponential::integrate(
            |phi: f64| {
                let (s, c) = phi.sin_cos();
                let x = rho * c;
                g(x) * d * rho * rho * s * s / (2.0 * std::f64::consts::PI * (d * d - x * x))
            },
            phi_lo,
            phi_hi,
            QUADRATURE_TARGET,
        );
        (out.integral, out.error_estimate)
    }

    /// `μ[lo, hi]` with the quadrature error estimate.
    pub fn mass_with_error(&self, lo: f64, hi: f64) -> (f64, f64) {
        self.integrate(lo, hi, |_| 1.0)
    }

    pub fn mass(&self, lo: f64, hi: f64) -> f64 {
        self.mass_with_error(lo, hi).0
    }

    /// `∫ x^k dμ`.
    pub fn moment(&self, k: usize) -> f64 {
        self.integrate(-self.rho, self.rho, |x| x.powi(k as i32)).0
    }
}

/// `μ[(1-θ)ρ, ρ]` for the Kesten–McKay law.
pub fn kesten_mass(d: usize, theta: f64) -> Result<f64> {
    check_theta(theta)?;
    let k = KestenRef::new(d)?;
    Ok(k.mass((1.0 - theta) * k.rho, k.rho))
}

fn check_theta(theta: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&theta) {
        return Err(Error::Parameter(format!("theta = {theta} outside [0, 1]")));
    }
    Ok(())
}

/// Symmetric measures on `[-ρ, ρ]` with known moments, used to exercise the
/// mass/decay correspondence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "measure", rename_all = "kebab-case")]
pub enum SpectralMeasure {
    Kesten { d: usize },
    Uniform { rho: f64 },
    /// Unit mass at `at`; not symmetric, moments `at^k`.
    PointMass { at: f64 },
}

impl SpectralMeasure {
    /// Right end of the support.
    pub fn rho(&self) -> Result<f64> {
        Ok(match *self {
            SpectralMeasure::Kesten { d } => KestenRef::new(d)?.rho,
            SpectralMeasure::Uniform { rho } => rho,
            SpectralMeasure::PointMass { at } => at.abs(),
        })
    }

    /// `μ[lo, hi]`.
    pub fn mass(&self, lo: f64, hi: f64) -> Result<f64> {
        Ok(match *self {
            SpectralMeasure::Kesten { d } => KestenRef::new(d)?.mass(lo, hi),
            SpectralMeasure::Uniform { rho } => ((hi.min(rho) - lo.max(-rho)) / (2.0 * rho)).max(0.0),
            SpectralMeasure::PointMass { at } => f64::from(u8::from(lo <= at && at <= hi)),
        })
    }

    /// `μ[(1-θ)ρ, ρ]`.
    pub fn top_mass(&self, theta: f64) -> Result<f64> {
        check_theta(theta)?;
        let rho = self.rho()?;
        self.mass((1.0 - theta) * rho, rho)
    }

    /// `ln M_{2n}`.
    fn ln_even_moment(&self, n: usize) -> Result<f64> {
        let k = 2.0 * n as f64;
        Ok(match *self {
            SpectralMeasure::Kesten { d } => KestenRef::new(d)?.moment(2 * n).ln(),
            SpectralMeasure::Uniform { rho } => k * rho.ln() - (k + 1.0).ln(),
            SpectralMeasure::PointMass { at } => k * at.abs().ln(),
        })
    }

    /// Even return series `p_{2n} = M_{2n} / d^{2n}`, `n <= N`. The Kesten
    /// law uses the tree recursion.
    pub fn even_series(&self, d: usize, half_steps: usize) -> Result<ReturnSeries> {
        if let SpectralMeasure::Kesten { d: kd } = *self {
            if kd != d {
                return Err(Error::Parameter(format!("Kesten law of degree {kd} used with d = {d}")));
            }
            return tree_return_probs(d, half_steps);
        }
        if d == 0 {
            return Err(Error::Parameter("d must be positive".into()));
        }
        let logs = (0..=half_steps)
            .map(|n| Ok(self.ln_even_moment(n)? - 2.0 * n as f64 * (d as f64).ln()))
            .collect::<Result<Vec<_>>>()?;
        Ok(ReturnSeries::from_logs(
            SeriesKind::SrwProbability,
            SeriesSource::Synthetic,
            Some(d),
            true,
            false,
            logs,
        ))
    }
}

/// `min_n (1-θ)^{-2n} ρ^{-2n} M_{2n}` over the even moments the series holds,
/// clamped to 1: an upper bound on `μ[(1-θ)ρ, ρ]` for any measure on
/// `[-ρ, ρ]` with these moments.
pub fn moment_mass_upper(series: &ReturnSeries, rho: f64, theta: f64) -> Result<f64> {
    if !(rho > 0.0) {
        return Err(Error::Parameter(format!("rho = {rho} must be positive")));
    }
    check_theta(theta)?;
    let d = match series.kind {
        SeriesKind::SrwProbability => series.default_degree()?,
        SeriesKind::AdjacencyMoment => 1.0,
    };
    let per_step = -2.0 * ((-theta).ln_1p() + rho.ln());
    let mut best = 0.0f64;
    for n in 1..=series.max_step() / 2 {
        let lm = series.ln_moment(2 * n, d).expect("step within range");
        best = best.min(lm + n as f64 * per_step);
    }
    Ok(best.exp().min(1.0))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub d: f64,
    /// Inclusive window of `n` for `p_{2n}`.
    pub window: (usize, usize),
    pub points: usize,
    pub rho_hat: f64,
    pub alpha_hat: f64,
    pub c_hat: f64,
    pub residual_rms: f64,
    /// Decay at least as fast as `n^{-1}` on top of the exponential rate.
    pub alpha_at_least_one: bool,
}

/// Fits `ln p_{2n} = 2n ln(ρ/d) - α ln n + ln C` by least squares over
/// `n` in `window` where `p_{2n} > 0`.
pub fn decay_fit(series: &ReturnSeries, d: f64, window: (usize, usize)) -> Result<DecayFit> {
    if !(d > 0.0) {
        return Err(Error::Parameter(format!("d = {d} must be positive")));
    }
    let (lo, hi) = window;
    let hi = hi.min(series.max_step() / 2);
    let (mut ns, mut lns, mut ys) = (Vec::new(), Vec::new(), Vec::new());
    for n in lo.max(1)..=hi {
        let lp = series.ln_probability(2 * n, d).expect("step within range");
        if lp.is_finite() {
            ns.push(n as f64);
            lns.push((n as f64).ln());
            ys.push(lp);
        }
    }
    if ys.len() < MIN_FIT_POINTS {
        return Err(Error::WindowTooShort {
            points: ys.len(),
            min: MIN_FIT_POINTS,
        });
    }
    let (beta, intercept) = least_squares(&[ns.clone(), lns.clone()], &ys)
        .ok_or_else(|| Error::Parameter("degenerate fit window".into()))?;
    let ss: f64 = ns
        .iter()
        .zip(&lns)
        .zip(&ys)
        .map(|((n, l), y)| (y - beta[0] * n - beta[1] * l - intercept).powi(2))
        .sum();
    let alpha_hat = -beta[1];
    Ok(DecayFit {
        d,
        window: (lo, hi),
        points: ys.len(),
        rho_hat: d * (beta[0] / 2.0).exp(),
        alpha_hat,
        c_hat: intercept.exp(),
        residual_rms: (ss / ys.len() as f64).sqrt(),
        alpha_at_least_one: alpha_hat >= 1.0,
    })
}

/// Power law `mass ≈ prefactor θ^exponent` fitted on a θ grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub residual_rms: f64,
}

pub fn mass_exponent(measure: &SpectralMeasure, thetas: &[f64]) -> Result<PowerFit> {
    let mut xs = Vec::with_capacity(thetas.len());
    let mut ys = Vec::with_capacity(thetas.len());
    for &t in thetas {
        let m = measure.top_mass(t)?;
        if t > 0.0 && m > 0.0 {
            xs.push(t.ln());
            ys.push(m.ln());
        }
    }
    if xs.len() < 2 {
        return Err(Error::WindowTooShort { points: xs.len(), min: 2 });
    }
    let (beta, intercept) =
        least_squares(&[xs.clone()], &ys).ok_or_else(|| Error::Parameter("degenerate θ grid".into()))?;
    let ss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - beta[0] * x - intercept).powi(2)).sum();
    Ok(PowerFit {
        exponent: beta[0],
        prefactor: intercept.exp(),
        residual_rms: (ss / xs.len() as f64).sqrt(),
    })
}

/// Range of `mass(θ) / θ^exponent` over a grid: the best constants `k, K`
/// with `k θ^e <= mass <= K θ^e` there.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerEnvelope {
    pub exponent: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn power_envelope(measure: &SpectralMeasure, thetas: &[f64], exponent: f64) -> Result<PowerEnvelope> {
    let mut lower = f64::INFINITY;
    let mut upper = 0.0f64;
    for &t in thetas {
        if !(t > 0.0) {
            return Err(Error::Parameter(format!("theta = {t} must be positive")));
        }
        let ratio = measure.top_mass(t)? / t.powf(exponent);
        lower = lower.min(ratio);
        upper = upper.max(ratio);
    }
    Ok(PowerEnvelope { exponent, lower, upper })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RoundtripRow {
    pub theta: f64,
    pub mass: f64,
    pub moment_upper: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub measure: SpectralMeasure,
    pub d: usize,
    pub half_steps: usize,
    pub alpha_mass: f64,
    pub walk_fit: DecayFit,
    pub alpha_walk: f64,
    pub gap: f64,
    /// `gap <= 0.15`.
    pub exponents_agree: bool,
    /// `moment_mass_upper >= mass` on every grid point.
    pub upper_bound_holds: bool,
    pub rows: Vec<RoundtripRow>,
}

/// Largest exponent gap accepted by the roundtrip.
pub const ROUNDTRIP_TOL: f64 = 0.15;

/// Compares the exponent of the top mass with the exponent of return decay
/// for a measure, and checks the moment bound against the true mass. The
/// walk fit uses `n` in `[N/10, N]`.
pub fn measure_roundtrip(
    measure: &SpectralMeasure,
    d: usize,
    thetas: &[f64],
    half_steps: usize,
) -> Result<RoundtripReport> {
    let rho = measure.rho()?;
    let alpha_mass = mass_exponent(measure, thetas)?.exponent;
    let series = measure.even_series(d, half_steps)?;
    let walk_fit = decay_fit(&series, d as f64, ((half_steps / 10).max(1), half_steps))?;
    let rows = thetas
        .iter()
        .map(|&t| {
            Ok(RoundtripRow {
                theta: t,
                mass: measure.top_mass(t)?,
                moment_upper: moment_mass_upper(&series, rho, t)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let gap = (alpha_mass - walk_fit.alpha_hat).abs();
    Ok(RoundtripReport {
        measure: *measure,
        d,
        half_steps,
        alpha_mass,
        alpha_walk: walk_fit.alpha_hat,
        walk_fit,
        gap,
        exponents_agree: gap <= ROUNDTRIP_TOL,
        upper_bound_holds: rows.iter().all(|r| r.moment_upper >= r.mass * (1.0 - 1e-12)),
        rows,
    })
}

/// The roundtrip on the d-regular tree.
pub fn return_decay_roundtrip(d: usize, thetas: &[f64], half_steps: usize) -> Result<RoundtripReport> {
    measure_roundtrip(&SpectralMeasure::Kesten { d }, d, thetas, half_steps)
}

/// `θ = 2^{-k}` for `k` in `lo..=hi`.
pub fn dyadic_grid(lo: i32, hi: i32) -> Vec<f64> {
    (lo..=hi).map(|k| 2f64.powi(-k)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, FamilySpec};
    use crate::spectral::eigenvalues;
    use proptest::prelude::*;

    fn cycle(n: usize) -> WeightedGraph {
        generate(&FamilySpec::new(Family::Cycle { n })).unwrap()
    }

    /// Closed walks of length `k` at `o` by exhaustive enumeration.
    fn enumerate_closed(g: &WeightedGraph, o: usize, k: usize) -> u64 {
        fn go(g: &WeightedGraph, at: usize, o: usize, left: usize) -> u64 {
            if left == 0 {
                return u64::from(at == o);
            }
            g.neighbor_ids(at).iter().map(|&v| go(g, v, o, left - 1)).sum()
        }
        go(g, o, o, k)
    }

    #[test]
    fn finite_examples() {
        let k2 = WeightedGraph::build(2, &[(0, 1, 1.0)]).unwrap();
        let s = return_probs_finite(&k2, 0, 6).unwrap();
        assert_eq!(s.values, vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0, 1.0]);
        let c4 = return_probs_finite(&cycle(4), 0, 4).unwrap();
        assert_eq!(c4.values[2], 0.5);
        // Eight of the sixteen 4-step walks return: tr A^4 = 2^4 + 2^4.
        assert_eq!(c4.values[4], 0.5);
        assert_eq!(enumerate_closed(&cycle(4), 0, 4), 8);
        s.validate().unwrap();
        c4.validate().unwrap();
    }

    #[test]
    fn finite_errors() {
        let p3 = generate(&FamilySpec::new(Family::Path { n: 3 })).unwrap();
        assert!(matches!(return_probs_finite(&p3, 0, 4), Err(Error::NotRegular { .. })));
        let w = generate(&FamilySpec::new(Family::Cycle { n: 5 }).with_weights(0.5, 2.0)).unwrap();
        assert!(matches!(return_probs_finite(&w, 0, 4), Err(Error::NotUnitWeighted { .. })));
        assert!(return_probs_finite(&cycle(5), 0, 501).is_err());
        assert!(adjacency_moments(&p3, 1, 4).is_ok());
    }

    #[test]
    fn finite_matches_enumeration() {
        let g = generate(&FamilySpec::seeded(Family::RandomRegular { n: 12, d: 3 }, 4)).unwrap();
        let s = return_probs_finite(&g, 5, 8).unwrap();
        for k in 0..=8 {
            let want = enumerate_closed(&g, 5, k) as f64 / 3f64.powi(k as i32);
            assert!((s.values[k] - want).abs() < 1e-15);
        }
    }

    #[test]
    fn tree_examples() {
        for d in 3..8usize {
            let s = tree_return_probs(d, 50).unwrap();
            let df = d as f64;
            assert_eq!(s.values[1], 1.0 / df);
            assert!(s.to_csv(2.0 * (df - 1.0).sqrt()).unwrap().contains(&format!("\n1,{:.16e},", 1.0 / df)));
            assert!((s.values[2] - (2.0 * df - 1.0) / df.powi(3)).abs() < 1e-15);
            s.validate().unwrap();
        }
        assert!(tree_return_probs(2, 10).is_err());
        assert!(tree_return_probs(3, 5001).is_err());
    }

    #[test]
    fn tree_matches_truncated_ball() {
        // A walk of length 2k stays within distance k of the root.
        for d in [3usize, 4] {
            let depth = 5;
            let ball = generate(&FamilySpec::new(Family::TreeBall { d, depth })).unwrap();
            let m = adjacency_moments(&ball, 0, 2 * depth).unwrap();
            let t = tree_return_probs(d, depth).unwrap();
            for n in 0..=depth {
                let want = m.values[2 * n] / (d as f64).powi(2 * n as i32);
                assert!((t.values[n] - want).abs() <= 1e-14 * want);
            }
        }
    }

    #[test]
    fn tree_rho_limit() {
        let s = tree_return_probs(4, 2000).unwrap();
        let ratio = (s.log_values[2000] / 2000.0).exp();
        assert!((ratio - 0.75).abs() <= 0.02 * 0.75);
        let rho = s.rho_estimate(2000).unwrap();
        assert!((rho - 2.0 * 3f64.sqrt()).abs() <= 0.02 * rho);
    }

    #[test]
    fn tree_growth_invariants() {
        let d = 5usize;
        let s = tree_return_probs(d, 800).unwrap();
        let rho = 2.0 * 2.0;
        let mut prev = f64::NEG_INFINITY;
        for n in 0..=800 {
            let counts = s.log_values[n] + 2.0 * n as f64 * (d as f64).ln();
            assert!(counts >= prev - 1e-9);
            prev = counts;
            let scaled = s.log_values[n] + 2.0 * n as f64 * (d as f64 / rho).ln();
            assert!(scaled <= 1e-12);
        }
    }

    #[test]
    fn girth_agreement_with_tree() {
        let g = generate(&FamilySpec::seeded(Family::RandomRegular { n: 400, d: 3 }, 11)).unwrap();
        let girth = (0..g.n()).map(|v| shortest_cycle_through(&g, v)).min().unwrap();
        let t = tree_return_probs(3, 20).unwrap();
        for o in [0usize, 100, 399] {
            let s = return_probs_finite(&g, o, girth - 1).unwrap();
            for k in (0..girth).step_by(2) {
                assert!((s.values[k] - t.values[k / 2]).abs() <= 1e-14);
            }
        }
    }

    fn shortest_cycle_through(g: &WeightedGraph, v: usize) -> usize {
        let n = g.n();
        let mut dist = vec![usize::MAX; n];
        let mut parent = vec![usize::MAX; n];
        dist[v] = 0;
        let mut queue = std::collections::VecDeque::from([v]);
        let mut best = usize::MAX;
        while let Some(u) = queue.pop_front() {
            for &w in g.neighbor_ids(u) {
                if dist[w] == usize::MAX {
                    dist[w] = dist[u] + 1;
                    parent[w] = u;
                    queue.push_back(w);
                } else if parent[u] != w {
                    best = best.min(dist[u] + dist[w] + 1);
                }
            }
        }
        best
    }

    #[test]
    fn kesten_self_consistency() {
        for d in [3usize, 4, 6] {
            let k = KestenRef::new(d).unwrap();
            let (mass, err) = k.mass_with_error(-k.rho, k.rho);
            assert!((mass - 1.0).abs() < 1e-10 && err < 1e-10);
            let df = d as f64;
            assert!((k.moment(2) - df).abs() < 1e-8);
            assert!((k.moment(4) - df * (2.0 * df - 1.0)).abs() < 1e-8);
            assert!(k.moment(3).abs() < 1e-10);
            assert!((k.mass(-k.rho, -1.0) - k.mass(1.0, k.rho)).abs() < 1e-12);
            assert_eq!(kesten_mass(d, 0.0).unwrap(), 0.0);
            assert!((kesten_mass(d, 1.0).unwrap() - 0.5).abs() < 1e-10);
        }
        assert!(KestenRef::new(2).is_err());
        assert!(kesten_mass(4, 1.5).is_err());
    }

    #[test]
    fn kesten_edge_exponent() {
        let fit = mass_exponent(&SpectralMeasure::Kesten { d: 4 }, &dyadic_grid(4, 14)).unwrap();
        assert!((fit.exponent - 1.5).abs() <= 0.05, "{fit:?}");
    }

    #[test]
    fn moment_upper_examples() {
        let rho = 2.0 * 3f64.sqrt();
        let point = SpectralMeasure::PointMass { at: rho }.even_series(4, 50).unwrap();
        assert!((moment_mass_upper(&point, rho, 0.3).unwrap() - 1.0).abs() < 1e-12);
        let tree = tree_return_probs(4, 500).unwrap();
        let upper = moment_mass_upper(&tree, rho, 0.1).unwrap();
        assert!(upper >= kesten_mass(4, 0.1).unwrap());
        assert!(moment_mass_upper(&tree, rho, 1.0).unwrap() <= 1.0);
    }

    #[test]
    fn decay_fit_synthetic() {
        let q: f64 = 0.9;
        let make = |alpha: f64| {
            let logs = (0..=400)
                .map(|n| if n == 0 { 0.0 } else { 2.0 * n as f64 * q.ln() - alpha * (n as f64).ln() })
                .collect();
            ReturnSeries::from_logs(SeriesKind::SrwProbability, SeriesSource::Synthetic, Some(4), true, false, logs)
        };
        let fit = decay_fit(&make(1.5), 4.0, (10, 400)).unwrap();
        assert!((fit.alpha_hat - 1.5).abs() < 0.01);
        assert!((fit.rho_hat - 4.0 * q).abs() < 1e-9);
        let fit = decay_fit(&make(0.0), 4.0, (10, 400)).unwrap();
        assert!(fit.alpha_hat.abs() < 0.01 && !fit.alpha_at_least_one);
        assert!(matches!(
            decay_fit(&make(1.0), 4.0, (10, 13)),
            Err(Error::WindowTooShort { points: 4, .. })
        ));
    }

    #[test]
    fn tree_decay_exponent() {
        let fit = decay_fit(&tree_return_probs(4, 1000).unwrap(), 4.0, (100, 1000)).unwrap();
        assert!((fit.alpha_hat - 1.5).abs() <= 0.1, "{fit:?}");
        assert!(fit.alpha_at_least_one);
    }

    #[test]
    fn roundtrips() {
        let grid = dyadic_grid(4, 14);
        for d in [3usize, 4] {
            let rep = return_decay_roundtrip(d, &grid, 1000).unwrap();
            assert!(rep.exponents_agree && rep.upper_bound_holds, "{rep:?}");
        }
        let rho = 2.0 * 3f64.sqrt();
        let rep = measure_roundtrip(&SpectralMeasure::Uniform { rho }, 4, &grid, 1000).unwrap();
        assert!((rep.alpha_mass - 1.0).abs() < 1e-9);
        assert!((rep.alpha_walk - 1.0).abs() < 0.1);
        assert!(rep.upper_bound_holds);
    }

    #[test]
    fn csv_layout() {
        let csv = tree_return_probs(4, 3).unwrap().to_csv(2.0 * 3f64.sqrt()).unwrap();
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines[0], "n,p_2n,scaled");
        assert_eq!(lines.len(), 5);
        let p2: f64 = lines[2].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(p2, 0.25);
    }

    fn corpus_graph(seed: u64, half_n: usize, d: usize, weighted: bool) -> WeightedGraph {
        let spec = FamilySpec::seeded(Family::RandomRegular { n: 2 * half_n, d }, seed);
        generate(&if weighted { spec.with_weights(0.5, 2.0) } else { spec }).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn moments_match_spectrum(seed in 0u64..10_000, half_n in 3usize..30, d in 3usize..6, weighted: bool) {
            let g = corpus_graph(seed, half_n, d, weighted);
            let spec = eigenvalues(&g).unwrap();
            let mean = mean_adjacency_moments(&g, 100).unwrap();
            let top = spec.largest().unwrap().abs().max(spec.eigenvalues[0].abs());
            for k in 0..=100usize {
                let spectral = spec.power_sum(k) / g.n() as f64;
                let scale = top.powi(k as i32).max(1.0);
                prop_assert!((mean[k] - spectral).abs() <= 1e-8 * scale, "k={} {} vs {}", k, mean[k], spectral);
            }
        }

        #[test]
        fn srw_series_invariants(seed in 0u64..10_000, half_n in 3usize..40, d in 3usize..6, o in 0usize..6) {
            let g = corpus_graph(seed, half_n, d, false);
            let s = return_probs_finite(&g, o, 60).unwrap();
            s.validate().unwrap();
        }

        #[test]
        fn moment_bound_dominates_mass(theta in 0.0f64..=1.0, d in 3usize..7, at_frac in -1.0f64..=1.0) {
            let rho = 2.0 * ((d - 1) as f64).sqrt();
            for m in [SpectralMeasure::Kesten { d }, SpectralMeasure::Uniform { rho }, SpectralMeasure::PointMass { at: at_frac * rho }] {
                let series = m.even_series(d, 200).unwrap();
                let upper = moment_mass_upper(&series, rho, theta).unwrap();
                let mass = m.mass((1.0 - theta) * rho, rho).unwrap();
                prop_assert!(upper >= mass - 1e-12, "{:?}: {} < {}", m, upper, mass);
            }
        }
    }
}
