//! Evaluators and checkers for the quantitative bounds on spectral mass near
//! the top of the spectrum: the finite-parameter bound, the `(r, s)`
//! schedule, the headline theorem checks, interlacing, and the parameter
//! schedule for infinite regular expanders.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{VertexSet, WeightedGraph};
use crate::nets::{greedy_tree_net, NetResult};
use crate::spectral::{eigenvalues_with, EigenOptions, SpectralInterval, Spectrum};

/// Slack allowed in `lhs <= rhs`.
pub const BOUND_TOL: f64 = 1e-8;
/// Relative slack on the log scale for the top-mass hypothesis, which holds
/// with equality for the second-eigenvalue preset.
pub const HYPOTHESIS_REL_TOL: f64 = 1e-9;
/// Guard added before taking floors of computed reals.
const FLOOR_GUARD: f64 = 1e-9;

/// Inputs of the finite-parameter bound.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundParams {
    pub theta: f64,
    pub x: f64,
    pub r: usize,
    pub s: usize,
    /// `μ_G(x, ∞)`.
    pub delta_top: f64,
    pub eps_net: f64,
    /// Maximum degree bound `Δ >= 2`.
    pub max_degree: usize,
    pub w_min: f64,
    pub w_max: f64,
}

impl BoundParams {
    /// `Δ w_max / w_min`.
    pub fn delta_tilde(&self) -> f64 {
        self.max_degree as f64 * self.w_max / self.w_min
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.theta) {
            return Err(Error::Parameter(format!("theta = {} outside [0, 1)", self.theta)));
        }
        if self.r == 0 || self.s == 0 {
            return Err(Error::Parameter("r and s must be positive".into()));
        }
        if self.max_degree < 2 {
            return Err(Error::Parameter("maximum degree bound must be at least 2".into()));
        }
        if !(self.w_min > 0.0 && self.w_min <= self.w_max) {
            return Err(Error::Parameter("weights need 0 < w_min <= w_max".into()));
        }
        for (name, v) in [("delta_top", self.delta_top), ("eps_net", self.eps_net)] {
            if !(0.0..=1.0).contains(&v) {
                return Err(Error::Parameter(format!("{name} = {v} outside [0, 1]")));
            }
        }
        if !(self.x >= self.w_min) {
            return Err(Error::Hypothesis(format!("x = {} is below w_min = {}", self.x, self.w_min)));
        }
        Ok(())
    }
}

/// The three summands of the finite-parameter bound. Each is computed on the
/// log scale and saturates at `f64::MAX` instead of overflowing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RhsTerms {
    /// `(1-θ)^{-2s} (1 - (w_min/x)^{2r})^{s/r}`.
    pub radius_term: f64,
    /// `2 δ Δ^{2(s+2)}`.
    pub top_term: f64,
    /// `2 ε_net`.
    pub net_term: f64,
}

impl RhsTerms {
    pub fn total(&self) -> f64 {
        (self.radius_term + self.top_term + self.net_term).min(f64::MAX)
    }
}

fn saturating_exp(ln: f64) -> f64 {
    ln.exp().min(f64::MAX)
}

pub fn finite_param_rhs(params: &BoundParams) -> Result<RhsTerms> {
    params.validate()?;
    let (r, s) = (params.r as f64, params.s as f64);
    let ratio_pow = (params.w_min / params.x).powf(2.0 * r);
    let ln_radius = -2.0 * s * (-params.theta).ln_1p() + (s / r) * (-ratio_pow).ln_1p();
    let top_term = if params.delta_top == 0.0 {
        0.0
    } else {
        saturating_exp(
            std::f64::consts::LN_2 + params.delta_top.ln() + 2.0 * (s + 2.0) * (params.max_degree as f64).ln(),
        )
    };
    Ok(RhsTerms {
        radius_term: saturating_exp(ln_radius),
        top_term,
        net_term: 2.0 * params.eps_net,
    })
}

/// Measured spectral mass against the finite-parameter bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub params: BoundParams,
    /// `μ_G[(1-θ)x, x]`.
    pub lhs: f64,
    pub rhs: f64,
    pub terms: RhsTerms,
    pub holds: bool,
}

/// Checks `μ_G[(1-θ)x, x] <= rhs` with `δ = μ_G(x, ∞)` and `ε_net` the
/// density of `net`, which must be a verified `r`-net.
pub fn finite_param_check(
    g: &WeightedGraph,
    spectrum: &Spectrum,
    x: f64,
    theta: f64,
    s: usize,
    net: &NetResult,
) -> Result<BoundReport> {
    g.require_connected()?;
    if !net.verified || !g.is_r_net(&net.vertices, net.r) {
        return Err(Error::NotANet { r: net.r });
    }
    if spectrum.len() != g.n() {
        return Err(Error::Parameter("spectrum does not belong to the graph".into()));
    }
    let params = BoundParams {
        theta,
        x,
        r: net.r,
        s,
        delta_top: spectrum.mu(&SpectralInterval::above(x)?),
        eps_net: net.density,
        max_degree: g.delta().max(2),
        w_min: g.w_min(),
        w_max: g.w_max(),
    };
    let terms = finite_param_rhs(&params)?;
    let lhs = spectrum.mu(&SpectralInterval::closed((1.0 - theta) * x, x)?);
    let rhs = terms.total();
    Ok(BoundReport {
        params,
        lhs,
        rhs,
        terms,
        holds: lhs <= rhs + BOUND_TOL,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RsSelection {
    pub s: usize,
    pub r: usize,
    /// `r >= 1` and `θ <= 1/Δ̃`.
    pub regime_ok: bool,
    pub reason: Option<String>,
}

/// `s = ⌊1/θ⌋`, `r = ⌊log_Δ̃(s) / 10⌋`, flagged when outside the regime
/// where the schedule applies.
pub fn select_r_s(theta: f64, delta_tilde: f64) -> Result<RsSelection> {
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta = {theta} must be positive")));
    }
    if !(delta_tilde >= 2.0) {
        return Err(Error::Parameter(format!("delta_tilde = {delta_tilde} must be at least 2")));
    }
    let s = (1.0 / theta + FLOOR_GUARD).floor() as usize;
    let r = if s == 0 {
        0
    } else {
        ((s as f64).ln() / delta_tilde.ln() / 10.0 + FLOOR_GUARD).floor() as usize
    };
    let in_range = theta * delta_tilde <= 1.0 + FLOOR_GUARD;
    let reason = match (r >= 1, in_range) {
        (true, true) => None,
        (false, true) => Some(format!("r = floor(log_Δ̃(s)/10) = 0 for s = {s}")),
        (true, false) => Some(format!("theta = {theta} exceeds 1/Δ̃ = {}", 1.0 / delta_tilde)),
        (false, false) => Some(format!("r = 0 and theta = {theta} exceeds 1/Δ̃ = {}", 1.0 / delta_tilde)),
    };
    Ok(RsSelection {
        s,
        r,
        regime_ok: reason.is_none(),
        reason,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum TheoremVariant {
    /// Rate `1 / log_Δ̃(1/θ)`.
    Main,
    /// Rate `θ^{c / (40 ln Δ̃)}` for a `c`-expander.
    Expander { c: f64 },
    /// The main variant at `x = λ_2`, `θ = 10 / log_Δ̃ n`.
    SecondEig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub name: String,
    pub holds: bool,
    /// Only reported, never enforced.
    pub enforced: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Regime {
    /// `θ <= 1/Δ̃`: the rate is the theorem's.
    Asymptotic,
    /// `θ > 1/Δ̃`: the conclusion is implied by `μ <= 1`; the effective
    /// rate is 1.
    Trivial,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremReport {
    pub variant: TheoremVariant,
    pub n: usize,
    pub x: f64,
    pub theta: f64,
    pub delta_tilde: f64,
    /// `μ_G[(1-θ)x, x]`.
    pub lhs: f64,
    pub regime: Regime,
    pub rate: f64,
    /// `lhs / rate`.
    pub implied_constant: f64,
    pub hypotheses: Vec<HypothesisCheck>,
    /// The finite-parameter bound evaluated along the way, with `θ` clipped
    /// to at most 1/2 and `r, s >= 1`; `None` when `x < w_min`.
    pub en_route: Option<BoundReport>,
}

/// Checks the hypotheses of a headline theorem, measures the spectral mass it
/// bounds and reports the implied constant. A violated enforced hypothesis is
/// an error naming it.
pub fn thm_checker(
    g: &WeightedGraph,
    spectrum: &Spectrum,
    x: f64,
    theta: f64,
    variant: TheoremVariant,
) -> Result<TheoremReport> {
    g.require_connected()?;
    let n = g.n();
    if spectrum.len() != n {
        return Err(Error::Parameter("spectrum does not belong to the graph".into()));
    }
    let delta_tilde = g.delta().max(2) as f64 * g.w_max() / g.w_min();
    let ln_dt = delta_tilde.ln();
    let (x, theta) = match variant {
        TheoremVariant::SecondEig => {
            let l2 = spectrum
                .second_largest()
                .ok_or_else(|| Error::Hypothesis("second eigenvalue needs n >= 2".into()))?;
            (l2, 10.0 * ln_dt / (n as f64).ln())
        }
        _ => (x, theta),
    };
    if !(x > 0.0) {
        return Err(Error::Hypothesis(format!("x = {x} must be positive")));
    }
    if !(theta > 0.0 && theta.is_finite()) {
        return Err(Error::Parameter(format!("theta = {theta} must be positive")));
    }
    if let TheoremVariant::Expander { c } = variant {
        if !(c > 0.0 && c <= 1.0) {
            return Err(Error::Parameter(format!("expansion c = {c} outside (0, 1]")));
        }
    }

    let mut hypotheses = Vec::new();
    let delta_top = spectrum.mu(&SpectralInterval::above(x)?);
    let ln_allowed = -10.0 / theta * ln_dt;
    let top_ok = delta_top == 0.0 || delta_top.ln() <= ln_allowed + HYPOTHESIS_REL_TOL * ln_allowed.abs().max(1.0);
    hypotheses.push(HypothesisCheck {
        name: "top-mass".into(),
        holds: top_ok,
        enforced: true,
        detail: format!("mu(x, inf) = {delta_top:e} vs delta_tilde^(-10/theta) = {:e}", ln_allowed.exp()),
    });
    let log_inv_theta = -theta.ln() / ln_dt;
    let (size_name, size_needed) = match variant {
        TheoremVariant::Expander { c } => ("expander-size", 2.0 * theta.powf(-c / (10.0 * ln_dt))),
        _ => ("size", log_inv_theta),
    };
    hypotheses.push(HypothesisCheck {
        name: size_name.into(),
        holds: n as f64 >= size_needed,
        enforced: true,
        detail: format!("n = {n} vs required {size_needed}"),
    });
    let selection = select_r_s(theta, delta_tilde)?;
    hypotheses.push(HypothesisCheck {
        name: "schedule-size".into(),
        holds: n >= 10 * selection.r,
        enforced: false,
        detail: format!("n = {n} vs 10 r = {}", 10 * selection.r),
    });
    if let Some(h) = hypotheses.iter().find(|h| h.enforced && !h.holds) {
        return Err(Error::Hypothesis(format!("{}: {}", h.name, h.detail)));
    }

    let lhs = if theta >= 1.0 {
        spectrum.mu(&SpectralInterval::new(
            crate::spectral::Endpoint::Unbounded,
            crate::spectral::Endpoint::Closed(x),
        )?)
    } else {
        spectrum.mu(&SpectralInterval::closed((1.0 - theta) * x, x)?)
    };
    let regime = if theta * delta_tilde <= 1.0 {
        Regime::Asymptotic
    } else {
        Regime::Trivial
    };
    let rate = match (regime, variant) {
        (Regime::Trivial, _) => 1.0,
        (Regime::Asymptotic, TheoremVariant::Expander { c }) => theta.powf(c / (40.0 * ln_dt)),
        (Regime::Asymptotic, _) => 1.0 / log_inv_theta,
    };

    let en_route = if x >= g.w_min() {
        let clipped = theta.min(0.5);
        let (r, s) = if selection.regime_ok {
            (selection.r, selection.s)
        } else {
            let s = ((1.0 / clipped + FLOOR_GUARD).floor() as usize).max(1);
            let r = (((s as f64).ln() / ln_dt / 10.0 + FLOOR_GUARD).floor() as usize).max(1);
            (r, s)
        };
        let net = greedy_tree_net(g, r)?;
        Some(finite_param_check(g, spectrum, x, clipped, s, &net)?)
    } else {
        None
    };

    Ok(TheoremReport {
        variant,
        n,
        x,
        theta,
        delta_tilde,
        lhs,
        regime,
        rate,
        implied_constant: lhs / rate,
        hypotheses,
        en_route,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterlacingMode {
    /// `H = G - U`.
    Delete,
    /// `H` keeps all vertices; edges incident to `U` are removed.
    ZeroRowsCols,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlacingReport {
    pub mode: InterlacingMode,
    pub removed: usize,
    pub grid_points: usize,
    /// `max_x |m_G(-∞, x] - m_H(-∞, x]|`.
    pub max_half_line: usize,
    /// `max_{x <= y} |m_G[x, y] - m_H[x, y]|`.
    pub max_interval: usize,
    /// `max_half_line <= |U|` and `max_interval <= 2|U|`.
    pub ok: bool,
}

/// Compares eigenvalue counts of `G` and of `G` with `u` removed. The default
/// grid is every midpoint between consecutive distinct eigenvalues of both
/// spectra together with one point beyond each end.
pub fn interlacing_check(
    g: &WeightedGraph,
    u: &VertexSet,
    mode: InterlacingMode,
    grid: Option<&[f64]>,
) -> Result<InterlacingReport> {
    let opts = EigenOptions {
        residual: false,
        ..EigenOptions::default()
    };
    let h = match mode {
        InterlacingMode::Delete => g.remove_vertices(u).0,
        InterlacingMode::ZeroRowsCols => g.isolate_vertices(u),
    };
    let sg = eigenvalues_with(g, opts)?;
    let sh = eigenvalues_with(&h, opts)?;
    let points = match grid {
        Some(p) => {
            let mut p = p.to_vec();
            p.sort_by(f64::total_cmp);
            p
        }
        None => default_grid(&sg, &sh),
    };
    // m[x, y] = at_most(y) - below(x), so the interval deviation splits into
    // a term in y minus a term in x.
    let up: Vec<i64> = points
        .iter()
        .map(|&y| sg.count_at_most(y) as i64 - sh.count_at_most(y) as i64)
        .collect();
    let down: Vec<i64> = points
        .iter()
        .map(|&x| sg.count_below(x) as i64 - sh.count_below(x) as i64)
        .collect();
    let max_half_line = up.iter().map(|d| d.unsigned_abs() as usize).max().unwrap_or(0);
    let mut max_interval = 0usize;
    for (i, &dx) in down.iter().enumerate() {
        for &dy in &up[i..] {
            max_interval = max_interval.max((dy - dx).unsigned_abs() as usize);
        }
    }
    let k = u.len();
    Ok(InterlacingReport {
        mode,
        removed: k,
        grid_points: points.len(),
        max_half_line,
        max_interval,
        ok: max_half_line <= k && max_interval <= 2 * k,
    })
}

fn default_grid(a: &Spectrum, b: &Spectrum) -> Vec<f64> {
    let mut all: Vec<f64> = a.eigenvalues.iter().chain(&b.eigenvalues).copied().collect();
    all.sort_by(f64::total_cmp);
    all.dedup_by(|x, y| (*x - *y).abs() <= 1e-9);
    let mut grid = Vec::with_capacity(all.len() + 1);
    match (all.first(), all.last()) {
        (Some(&lo), Some(&hi)) => {
            grid.push(lo - 1.0);
            grid.extend(all.windows(2).map(|w| 0.5 * (w[0] + w[1])));
            grid.push(hi + 1.0);
        }
        _ => grid.push(0.0),
    }
    grid
}

/// `θ = 1 - (1 - ρ^{-2r})^{1/(2r)}`: deleting an `r`-net of density `δ`
/// leaves at most mass `δ` in `[(1-θ)ρ, ρ]`.
pub fn expander_net_rem_params(rho: f64, r: usize) -> Result<f64> {
    if !(rho > 1.0 && rho.is_finite()) || r == 0 {
        return Err(Error::Parameter("need rho > 1 and r >= 1".into()));
    }
    let two_r = 2.0 * r as f64;
    Ok(-((-rho.powf(-two_r)).ln_1p() / two_r).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegularExpSchedule {
    pub d: usize,
    pub rho: f64,
    pub theta: f64,
    pub eps: f64,
    /// `⌈(1-ε) ln(1/θ) / (2 ln ρ)⌉`.
    pub r: usize,
    /// `θ^{(1-2ε)(ln d / ln ρ - 1)}`.
    pub p: f64,
    /// `ln d / ln ρ - 1`.
    pub exponent: f64,
    /// `θ^{exponent - ε}`.
    pub predicted_bound: f64,
    /// Expansion constant `c = d²/ρ² - 1`.
    pub c: f64,
    /// `(1-p)^{(d/ρ)^{2r}} + p`.
    pub net_density_bound: f64,
    /// Window `1 - (1 - ρ^{-2r})^{1/(2r)}` certified by the net.
    pub theta_r: f64,
    /// `θ_r >= θ` and `(1-p)^{(d/ρ)^{2r}} <= p`, so the mass is at most
    /// `2p`. Fails unless `θ` is small enough.
    pub conditions_hold: bool,
}

pub fn regular_exp_schedule(d: usize, rho: f64, theta: f64, eps: f64) -> Result<RegularExpSchedule> {
    if d < 3 {
        return Err(Error::Parameter("regular expander schedule needs d >= 3".into()));
    }
    let df = d as f64;
    if !(rho > 1.0) {
        return Err(Error::Parameter(format!("rho = {rho} must exceed 1")));
    }
    if rho >= df {
        return Err(Error::Hypothesis(format!(
            "rho = {rho} >= d = {d}: amenable regime, theorem inapplicable"
        )));
    }
    if !(theta > 0.0 && theta < 1.0) {
        return Err(Error::Parameter(format!("theta = {theta} outside (0, 1)")));
    }
    if !(eps > 0.0 && eps < 0.5) {
        return Err(Error::Parameter(format!("eps = {eps} outside (0, 1/2)")));
    }
    let exponent = df.ln() / rho.ln() - 1.0;
    let r = (((1.0 - eps) * (1.0 / theta).ln() / (2.0 * rho.ln())).ceil() as usize).max(1);
    let p = theta.powf((1.0 - 2.0 * eps) * exponent);
    let growth = (df / rho).powf(2.0 * r as f64);
    let miss = growth * (-p).ln_1p();
    let net_density_bound = miss.exp() + p;
    let theta_r = expander_net_rem_params(rho, r)?;
    Ok(RegularExpSchedule {
        d,
        rho,
        theta,
        eps,
        r,
        p,
        exponent,
        predicted_bound: theta.powf(exponent - eps),
        c: df * df / (rho * rho) - 1.0,
        net_density_bound,
        theta_r,
        conditions_hold: theta_r >= theta && miss.exp() <= p,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family, FamilySpec};
    use crate::nets::random_expander_net;
    use crate::spectral::eigenvalues;
    use proptest::prelude::*;

    fn params(theta: f64, x: f64, r: usize, s: usize, delta_top: f64, eps_net: f64) -> BoundParams {
        BoundParams {
            theta,
            x,
            r,
            s,
            delta_top,
            eps_net,
            max_degree: 2,
            w_min: 1.0,
            w_max: 1.0,
        }
    }

    #[test]
    fn rhs_examples() {
        let t = finite_param_rhs(&params(0.0, 2.0, 1, 2, 0.0, 0.0)).unwrap();
        assert!((t.total() - 0.5625).abs() < 1e-15);
        let t = finite_param_rhs(&params(0.0, 1.0, 1, 2, 0.0, 0.0)).unwrap();
        assert_eq!(t.radius_term, 0.0);
        let t = finite_param_rhs(&params(0.0, 1.0, 1, 2, 0.0, 0.5)).unwrap();
        assert_eq!(t.net_term, 1.0);
        assert_eq!(t.total(), 1.0);
        assert!(matches!(
            finite_param_rhs(&params(0.0, 0.5, 1, 2, 0.0, 0.0)),
            Err(Error::Hypothesis(_))
        ));
        let huge = finite_param_rhs(&params(0.0, 2.0, 1, 5000, 0.5, 0.0)).unwrap();
        assert_eq!(huge.top_term, f64::MAX);
    }

    #[test]
    fn rhs_monotone_in_delta_and_eps() {
        let base = params(0.1, 1.8, 2, 4, 0.01, 0.1);
        let a = finite_param_rhs(&base).unwrap().total();
        let b = finite_param_rhs(&BoundParams { delta_top: 0.02, ..base }).unwrap().total();
        let c = finite_param_rhs(&BoundParams { eps_net: 0.2, ..base }).unwrap().total();
        assert!(a <= b && a <= c);
    }

    #[test]
    fn r_s_selection() {
        let sel = select_r_s(2f64.powi(-10), 2.0).unwrap();
        assert_eq!((sel.s, sel.r, sel.regime_ok), (1024, 1, true));
        let sel = select_r_s(0.1, 2.0).unwrap();
        assert_eq!((sel.s, sel.r, sel.regime_ok), (10, 0, false));
        let sel = select_r_s(0.5, 2.0).unwrap();
        assert_eq!(sel.r, 0);
        assert!(!sel.regime_ok);
        // At θ = 1/Δ̃ the θ test passes but r = 0.
        let sel = select_r_s(1.0 / 1024.0, 1024.0).unwrap();
        assert_eq!(sel.r, 0);
        assert!(sel.reason.unwrap().starts_with("r = floor"));
        assert!(select_r_s(0.0, 2.0).is_err());
        assert!(select_r_s(0.1, 1.5).is_err());
    }

    #[test]
    fn finite_param_on_cycle() {
        let g = generate(&FamilySpec::new(Family::Cycle { n: 60 })).unwrap();
        let s = eigenvalues(&g).unwrap();
        let x = s.second_largest().unwrap();
        let net = greedy_tree_net(&g, 2).unwrap();
        let rep = finite_param_check(&g, &s, x, 0.05, 4, &net).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.rhs - (rep.terms.radius_term + rep.terms.top_term + rep.terms.net_term)).abs() < 1e-15);
        let point = finite_param_check(&g, &s, x, 0.0, 4, &net).unwrap();
        assert!(point.holds && point.lhs <= rep.lhs);
    }

    #[test]
    fn finite_param_rejects_bad_nets() {
        let g = generate(&FamilySpec::new(Family::Cycle { n: 20 })).unwrap();
        let s = eigenvalues(&g).unwrap();
        let mut net = greedy_tree_net(&g, 2).unwrap();
        net.verified = false;
        assert!(matches!(finite_param_check(&g, &s, 1.5, 0.1, 2, &net), Err(Error::NotANet { .. })));
    }

    #[test]
    fn theorem_hypothesis_violation_is_named() {
        let g = generate(&FamilySpec::new(Family::Cycle { n: 64 })).unwrap();
        let s = eigenvalues(&g).unwrap();
        // Half the spectrum lies above 0, far above 2^{-10/θ}.
        let err = thm_checker(&g, &s, 0.01, 0.5, TheoremVariant::Main).unwrap_err();
        match err {
            Error::Hypothesis(msg) => assert!(msg.starts_with("top-mass"), "{msg}"),
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn second_eig_preset_on_cycle() {
        let g = generate(&FamilySpec::new(Family::Cycle { n: 256 })).unwrap();
        let s = eigenvalues(&g).unwrap();
        let rep = thm_checker(&g, &s, 0.0, 0.0, TheoremVariant::SecondEig).unwrap();
        assert_eq!(rep.x, s.second_largest().unwrap());
        assert!((rep.theta - 10.0 / 8.0).abs() < 1e-12);
        assert_eq!(rep.regime, Regime::Trivial);
        assert!(rep.implied_constant.is_finite());
        assert!(rep.en_route.unwrap().holds);
    }

    #[test]
    fn expander_variant_reports_rate() {
        let g = generate(&FamilySpec::seeded(Family::RandomRegular { n: 256, d: 4 }, 1)).unwrap();
        let s = eigenvalues(&g).unwrap();
        let x = s.largest().unwrap() + 1e-6;
        let rep = thm_checker(&g, &s, x, 0.01, TheoremVariant::Expander { c: 0.3 }).unwrap();
        assert_eq!(rep.regime, Regime::Asymptotic);
        assert!((rep.rate - 0.01f64.powf(0.3 / (40.0 * 4f64.ln()))).abs() < 1e-15);
        assert!(rep.en_route.unwrap().holds);
    }

    #[test]
    fn interlacing_hand_case() {
        let c4 = generate(&FamilySpec::new(Family::Cycle { n: 4 })).unwrap();
        let u = VertexSet::new(4, vec![0]).unwrap();
        let rep = interlacing_check(&c4, &u, InterlacingMode::ZeroRowsCols, Some(&[0.0])).unwrap();
        assert_eq!(rep.max_half_line, 0);
        for mode in [InterlacingMode::Delete, InterlacingMode::ZeroRowsCols] {
            let rep = interlacing_check(&c4, &VertexSet::empty(4), mode, None).unwrap();
            assert_eq!((rep.max_half_line, rep.max_interval), (0, 0));
        }
    }

    #[test]
    fn regular_exp_values() {
        let rho = 2.0 * 3f64.sqrt();
        let sch = regular_exp_schedule(4, rho, 1e-3, 0.1).unwrap();
        assert!((sch.c - 1.0 / 3.0).abs() < 1e-14);
        assert!((sch.exponent - (4f64.ln() / rho.ln() - 1.0)).abs() < 1e-15);
        assert!((sch.exponent - 0.115772).abs() < 1e-6);
        assert!(matches!(regular_exp_schedule(4, 4.0, 0.1, 0.1), Err(Error::Hypothesis(_))));
        let near = regular_exp_schedule(4, 4.0 - 1e-9, 0.1, 0.1).unwrap();
        assert!(near.exponent < 1e-9);
        let theta = expander_net_rem_params(rho, 3).unwrap();
        assert!((theta - (1.0 - (1.0 - rho.powi(-6)).powf(1.0 / 6.0))).abs() < 1e-15);
    }

    fn corpus_graph(seed: u64, half_n: usize, d: usize, weighted: bool) -> WeightedGraph {
        let spec = FamilySpec::seeded(Family::RandomRegular { n: 2 * half_n, d }, seed);
        let spec = if weighted { spec.with_weights(0.5, 2.0) } else { spec };
        generate(&spec).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn finite_param_never_fails(seed in 0u64..10_000, half_n in 5usize..50, d in 3usize..7,
                                    weighted: bool, r in 1usize..4, s in 1usize..8,
                                    theta in 0.0f64..0.9, pick in 0.0f64..1.0, p in 0.0f64..0.5) {
            let g = corpus_graph(seed, half_n, d, weighted);
            let spec = eigenvalues(&g).unwrap();
            let top = spec.largest().unwrap();
            let x = g.w_min() + pick * (top - g.w_min()).max(0.0);
            for net in [greedy_tree_net(&g, r).unwrap(), random_expander_net(&g, r, p, seed).unwrap()] {
                let rep = finite_param_check(&g, &spec, x, theta, s, &net).unwrap();
                prop_assert!(rep.holds, "{rep:?}");
            }
        }

        #[test]
        fn interlacing_bounds(seed in 0u64..10_000, half_n in 5usize..50, d in 3usize..7, k in 0usize..8) {
            let g = corpus_graph(seed, half_n, d, seed % 2 == 0);
            let mut r = crate::rng::stream(seed, 5);
            let ids = (0..k).map(|_| crate::rng::index(&mut r, g.n())).collect();
            let u = VertexSet::new(g.n(), ids).unwrap();
            for mode in [InterlacingMode::Delete, InterlacingMode::ZeroRowsCols] {
                let rep = interlacing_check(&g, &u, mode, None).unwrap();
                prop_assert!(rep.ok, "{rep:?}");
            }
        }

        #[test]
        fn regime_flag_is_consistent(theta in 1e-9f64..1.0, dt in 2.0f64..50.0) {
            let sel = select_r_s(theta, dt).unwrap();
            if sel.regime_ok {
                prop_assert!(sel.r >= 1);
                prop_assert!(theta <= 1.0 / dt * (1.0 + 1e-8));
            }
        }
    }
}
