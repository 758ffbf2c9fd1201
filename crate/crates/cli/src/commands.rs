//! `gen`, `spectrum`, `net`, `local-net` and `sweep`, plus helpers shared by
//! every command.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use spectop_core::bounds::{thm_checker, Regime, BOUND_TOL};
use spectop_core::graph::{generate, write_graph, Family, FamilySpec};
use spectop_core::local::{local_net, theory_params, LocalNetTranscript};
use spectop_core::nets::{greedy_tree_net, random_expander_net};
use spectop_core::rng::trial_seed;
use spectop_core::spectral::{eigenvalues_with, EigenOptions};
use spectop_core::{Error, LocalLabels, NetResult, SpectralInterval, Spectrum, TheoremVariant, WeightedGraph};

use crate::args::{Common, GenArgs, LocalNetArgs, NetArgs, NetChoice, SpectrumArgs, SweepArgs, XRule};
use crate::config::{emit, resolve, to_json, Manifest, Report, Resolved};
use crate::error::{CliError, CliResult};

/// Default largest n for the dense eigensolver.
pub const DEFAULT_CAP: usize = 4096;
pub const DEFAULT_P: f64 = 0.1;

/// Settings structs that carry the shared flags.
pub trait HasCommon {
    fn common(&self) -> &Common;
}

macro_rules! has_common {
    ($($t:ty),* $(,)?) => {
        $(impl HasCommon for $t {
            fn common(&self) -> &Common {
                &self.common
            }
        })*
    };
}

has_common!(
    GenArgs,
    SpectrumArgs,
    NetArgs,
    LocalNetArgs,
    SweepArgs,
    crate::args::RadDropArgs,
    crate::args::LocalGlobalArgs,
    crate::args::InterlaceArgs,
    crate::args::FiniteParamArgs,
    crate::args::ThmArgs,
    crate::args::TreeArgs,
    crate::args::FiniteArgs,
    crate::args::FitArgs,
    crate::args::RoundtripArgs,
);

/// Resolves flags against the config file, runs `body` on the settings and
/// writes the report with its manifest.
pub fn run<T, F>(command: &str, flags: &T, body: F) -> CliResult<bool>
where
    T: Serialize + DeserializeOwned + Default + HasCommon,
    F: FnOnce(&T, u64) -> CliResult<Report>,
{
    let Resolved {
        settings,
        canonical,
        seed,
    } = resolve(flags, flags.common().config.as_deref())?;
    let report = body(&settings, seed)?;
    emit(report, Manifest::new(command, &canonical, seed), settings.common().out.as_deref())
}

/// Runs trials in parallel; results and the first error come back in trial
/// order whatever the thread count.
pub fn run_trials<R: Send>(trials: usize, f: impl Fn(usize) -> CliResult<R> + Sync) -> CliResult<Vec<R>> {
    let results: Vec<CliResult<R>> = (0..trials).into_par_iter().map(&f).collect();
    results.into_iter().collect()
}

/// Fixed-width scientific notation: 17 significant digits, `.` decimal.
pub fn num(x: f64) -> String {
    format!("{x:.16e}")
}

/// A replayable record of a violating instance.
pub fn violation(command: &str, trial: usize, graph_seed: u64, g: &WeightedGraph, detail: impl Serialize) -> Value {
    json!({
        "command": command,
        "trial": trial,
        "graph_seed": graph_seed,
        "graph": write_graph(g),
        "detail": detail,
    })
}

pub fn spectrum_of(g: &WeightedGraph, cap: Option<usize>) -> CliResult<Spectrum> {
    let opts = EigenOptions {
        cap: cap.unwrap_or(DEFAULT_CAP),
        residual: false,
    };
    Ok(eigenvalues_with(g, opts)?)
}

pub fn select_x(rule: XRule, spectrum: &Spectrum) -> CliResult<f64> {
    let missing = || CliError::Usage("graph has too few vertices for the chosen x".into());
    match rule {
        XRule::Lambda1 => spectrum.largest().ok_or_else(missing),
        XRule::Lambda2 => spectrum.second_largest().ok_or_else(missing),
        XRule::Value(x) => Ok(x),
    }
}

pub fn build_net(g: &WeightedGraph, method: NetChoice, r: usize, p: f64, seed: u64) -> CliResult<NetResult> {
    Ok(match method {
        NetChoice::Greedy => greedy_tree_net(g, r)?,
        NetChoice::Expander => random_expander_net(g, r, p, seed)?,
        NetChoice::Both => return Err(CliError::Usage("choose one net method".into())),
    })
}

pub fn gen(flags: &GenArgs) -> CliResult<bool> {
    run("gen", flags, |a, seed| {
        let (_, g) = a.graph.source()?.instance(seed, 0)?;
        Ok(Report::pass(write_graph(&g)))
    })
}

pub fn spectrum(flags: &SpectrumArgs) -> CliResult<bool> {
    run("spectrum", flags, |a, seed| {
        let (_, g) = a.graph.source()?.instance(seed, 0)?;
        let opts = EigenOptions {
            cap: a.cap.unwrap_or(DEFAULT_CAP),
            residual: a.residual.unwrap_or(false),
        };
        let spectrum = eigenvalues_with(&g, opts)?;
        let body = match (a.lo, a.hi) {
            (Some(lo), Some(hi)) => to_json(&json!({
                "n": g.n(),
                "largest": spectrum.largest(),
                "second_largest": spectrum.second_largest(),
                "residual_bound": spectrum.residual_bound,
                "interval": spectrum.interval_record(&SpectralInterval::closed(lo, hi)?),
            })),
            _ => spectrum.to_csv(),
        };
        Ok(Report::pass(body))
    })
}

pub fn net(flags: &NetArgs) -> CliResult<bool> {
    run("net", flags, |a, seed| {
        let (graph_seed, g) = a.graph.source()?.instance(seed, 0)?;
        let r = a.r.unwrap_or(1);
        let net = build_net(&g, a.method.unwrap_or(NetChoice::Greedy), r, a.p.unwrap_or(DEFAULT_P), graph_seed)?;
        let bad = (!net.verified).then(|| violation("net", 0, graph_seed, &g, &net));
        Ok(Report {
            body: to_json(&net),
            violation: bad,
        })
    })
}

pub fn local_net_cmd(flags: &LocalNetArgs) -> CliResult<bool> {
    run("local-net", flags, |a, seed| {
        let (graph_seed, g) = a.graph.source()?.instance(seed, 0)?;
        let r = a.r.unwrap_or(1);
        let (p, radius, theory) = if a.theory.unwrap_or(false) {
            let t = theory_params(g.delta(), r)?;
            if !t.practical {
                return Err(Error::Parameter(format!(
                    "theory radius {} for delta = {} and r = {r} is beyond the practical limit",
                    t.radius, t.delta
                ))
                .into());
            }
            (t.p, t.radius as usize, Some(t))
        } else {
            (a.p.unwrap_or(DEFAULT_P), a.radius.unwrap_or(3), None)
        };
        let labels = LocalLabels::from_seed(g.n(), trial_seed(graph_seed, 1));
        let run = local_net(&g, &labels, p, radius, r)?;
        let transcript = LocalNetTranscript::new(&run, &labels, p);
        let body = json!({
            "transcript": transcript,
            "theory": theory,
            "verified": run.net.verified,
        });
        let bad = (!run.net.verified).then(|| violation("local-net", 0, graph_seed, &g, &transcript));
        Ok(Report {
            body: to_json(&body),
            violation: bad,
        })
    })
}

fn sweep_family(name: &str, n: usize, d: usize) -> CliResult<Family> {
    Ok(match name {
        "path" => Family::Path { n },
        "cycle" => Family::Cycle { n },
        "complete" => Family::Complete { n },
        "random-regular" => Family::RandomRegular { n, d },
        other => {
            return Err(CliError::Usage(format!(
                "sweep family `{other}` is not one of path, cycle, complete, random-regular"
            )))
        }
    })
}

pub fn sweep(flags: &SweepArgs) -> CliResult<bool> {
    run("sweep", flags, |a, seed| {
        let families = a
            .families
            .clone()
            .unwrap_or_else(|| vec!["cycle".into(), "random-regular".into()]);
        let d = a.d.unwrap_or(4);
        let (lo, hi) = (a.min_exp.unwrap_or(8), a.max_exp.unwrap_or(12));
        if lo > hi || hi >= usize::BITS {
            return Err(CliError::Usage(format!("bad exponent range {lo}..={hi}")));
        }
        let tol = a.tol.unwrap_or(BOUND_TOL);
        let mut jobs = Vec::new();
        for name in &families {
            for e in lo..=hi {
                let n = 1usize << e;
                jobs.push((name.clone(), n, sweep_family(name, n, d)?));
            }
        }
        let rows = run_trials(jobs.len(), |j| {
            let (name, n, family) = &jobs[j];
            let graph_seed = trial_seed(seed, *n as u64);
            let g = generate(&FamilySpec::seeded(*family, graph_seed))?;
            let spectrum = spectrum_of(&g, a.cap)?;
            let top = spectrum.largest().unwrap_or(0.0);
            let mut lines = Vec::new();
            let mut bad = None;
            for (variant, x, theta) in [
                (TheoremVariant::SecondEig, 0.0, 0.0),
                (TheoremVariant::Main, top * (1.0 + 1e-9), 0.5 / g.delta_tilde()),
            ] {
                let rep = thm_checker(&g, &spectrum, x, theta, variant)?;
                let (el, er) = rep.en_route.as_ref().map_or((f64::NAN, f64::NAN), |b| (b.lhs, b.rhs));
                // NaN means no en-route bound was evaluated.
                let holds = el.is_nan() || el <= er + tol;
                if !holds && bad.is_none() {
                    bad = Some(violation("sweep", j, graph_seed, &g, &rep));
                }
                let regime = if rep.regime == Regime::Trivial { "trivial" } else { "asymptotic" };
                let tag = match variant {
                    TheoremVariant::SecondEig => "second-eig",
                    _ => "main",
                };
                lines.push(format!(
                    "{name},{n},{tag},{regime},{},{},{},{},{},{},{},{}",
                    num(rep.x),
                    num(rep.theta),
                    num(rep.lhs),
                    num(rep.rate),
                    num(rep.implied_constant),
                    num(el),
                    num(er),
                    holds
                ));
            }
            Ok((lines, bad))
        })?;
        let mut body = String::from("family,n,variant,regime,x,theta,lhs,rate,implied_constant,en_route_lhs,en_route_rhs,holds\n");
        let mut first_bad = None;
        for (lines, bad) in rows {
            for l in lines {
                writeln!(body, "{l}").expect("write to string");
            }
            first_bad = first_bad.or(bad);
        }
        Ok(Report {
            body,
            violation: first_bad,
        })
    })
}
