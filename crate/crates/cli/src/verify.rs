//! `verify` subcommands. Each trial regenerates its graph from
//! `(seed, trial)`, so a CSV row can be replayed on its own.

use std::fmt::Write as _;

use serde_json::json;
use spectop_core::bounds::{finite_param_check, interlacing_check, thm_checker, InterlacingMode, BOUND_TOL};
use spectop_core::nets::{net_removal_drop_check, RAD_DROP_TOL};
use spectop_core::rng::{index, stream};
use spectop_core::spectral::{local_global_check, LOCAL_GLOBAL_TOL};
use spectop_core::{TheoremVariant, VertexSet};

use crate::args::{
    FiniteParamArgs, InterlaceArgs, LocalGlobalArgs, ModeChoice, NetChoice, RadDropArgs, ThmArgs, VariantChoice, XRule,
};
use crate::commands::{build_net, num, run, run_trials, select_x, spectrum_of, violation, DEFAULT_P};
use crate::config::{to_json, Report};
use crate::error::CliResult;

/// Joins per-trial CSV lines under `header` and keeps the first violation.
fn collect(header: &str, rows: Vec<(Vec<String>, Option<serde_json::Value>)>) -> Report {
    let mut body = format!("{header}\n");
    let mut first = None;
    for (lines, bad) in rows {
        for l in lines {
            writeln!(body, "{l}").expect("write to string");
        }
        first = first.or(bad);
    }
    Report { body, violation: first }
}

pub fn rad_drop(flags: &RadDropArgs) -> CliResult<bool> {
    run("verify rad-drop", flags, |a, seed| {
        let source = a.graph.source()?;
        let r = a.r.unwrap_or(1);
        let p = a.p.unwrap_or(DEFAULT_P);
        let tol = a.tol.unwrap_or(RAD_DROP_TOL);
        let methods: &[NetChoice] = match a.method.unwrap_or(NetChoice::Greedy) {
            NetChoice::Both => &[NetChoice::Greedy, NetChoice::Expander],
            NetChoice::Greedy => &[NetChoice::Greedy],
            NetChoice::Expander => &[NetChoice::Expander],
        };
        let rows = run_trials(a.trials.unwrap_or(1), |t| {
            let (graph_seed, g) = source.instance(seed, t)?;
            let mut lines = Vec::new();
            let mut bad = None;
            for &m in methods {
                let net = build_net(&g, m, r, p, graph_seed)?;
                let rep = net_removal_drop_check(&g, &net.vertices, r)?;
                let top = rep.rhs + g.w_min().powi(2 * r as i32);
                let ok = rep.slack >= -tol * top.max(1.0);
                if !ok && bad.is_none() {
                    bad = Some(violation("verify rad-drop", t, graph_seed, &g, json!({"net": net, "report": rep})));
                }
                let method = if m == NetChoice::Greedy { "greedy" } else { "expander" };
                lines.push(format!(
                    "{t},{graph_seed},{},{method},{r},{},{},{},{ok}",
                    g.n(),
                    num(rep.lhs),
                    num(rep.rhs),
                    num(rep.slack)
                ));
            }
            Ok((lines, bad))
        })?;
        Ok(collect("trial,seed,n,method,r,lhs,rhs,slack,ok", rows))
    })
}

pub fn local_global(flags: &LocalGlobalArgs) -> CliResult<bool> {
    run("verify local-global", flags, |a, seed| {
        let source = a.graph.source()?;
        let r = a.r.unwrap_or(1);
        let tol = a.tol.unwrap_or(LOCAL_GLOBAL_TOL);
        let rows = run_trials(a.trials.unwrap_or(1), |t| {
            let (graph_seed, g) = source.instance(seed, t)?;
            let rep = local_global_check(&g, r)?;
            let ok = rep.slack >= -tol * rep.rhs;
            let bad = (!ok).then(|| violation("verify local-global", t, graph_seed, &g, rep));
            let line = format!(
                "{t},{graph_seed},{},{r},{},{},{},{ok}",
                g.n(),
                num(rep.lhs),
                num(rep.rhs),
                num(rep.slack)
            );
            Ok((vec![line], bad))
        })?;
        Ok(collect("trial,seed,n,r,lhs,rhs,slack,ok", rows))
    })
}

pub fn interlace(flags: &InterlaceArgs) -> CliResult<bool> {
    run("verify interlace", flags, |a, seed| {
        let source = a.graph.source()?;
        let size = a.size.unwrap_or(3);
        let modes: &[InterlacingMode] = match a.mode.unwrap_or(ModeChoice::Both) {
            ModeChoice::Both => &[InterlacingMode::Delete, InterlacingMode::ZeroRowsCols],
            ModeChoice::Delete => &[InterlacingMode::Delete],
            ModeChoice::ZeroRowsCols => &[InterlacingMode::ZeroRowsCols],
        };
        let rows = run_trials(a.trials.unwrap_or(1), |t| {
            let (graph_seed, g) = source.instance(seed, t)?;
            spectrum_of(&g, a.cap)?; // enforce the solver cap up front
            let mut rng = stream(graph_seed, 2);
            let picks = (0..size).map(|_| index(&mut rng, g.n())).collect();
            let u = VertexSet::new(g.n(), picks)?;
            let mut lines = Vec::new();
            let mut bad = None;
            for &mode in modes {
                let rep = interlacing_check(&g, &u, mode, None)?;
                if !rep.ok && bad.is_none() {
                    bad = Some(violation(
                        "verify interlace",
                        t,
                        graph_seed,
                        &g,
                        json!({"removed": u, "report": rep}),
                    ));
                }
                let tag = match mode {
                    InterlacingMode::Delete => "delete",
                    InterlacingMode::ZeroRowsCols => "zero-rows-cols",
                };
                lines.push(format!(
                    "{t},{graph_seed},{},{tag},{},{},{},{}",
                    g.n(),
                    rep.removed,
                    rep.max_half_line,
                    rep.max_interval,
                    rep.ok
                ));
            }
            Ok((lines, bad))
        })?;
        Ok(collect("trial,seed,n,mode,removed,max_half_line,max_interval,ok", rows))
    })
}

pub fn finite_param(flags: &FiniteParamArgs) -> CliResult<bool> {
    run("verify finite-param", flags, |a, seed| {
        let source = a.graph.source()?;
        let rule = XRule::parse(a.x.as_deref().unwrap_or("lambda2"))?;
        let theta = a.theta.unwrap_or(0.1);
        let (r, s) = (a.r.unwrap_or(1), a.s.unwrap_or(2));
        let p = a.p.unwrap_or(DEFAULT_P);
        let tol = a.tol.unwrap_or(BOUND_TOL);
        let method = a.method.unwrap_or(NetChoice::Greedy);
        let rows = run_trials(a.trials.unwrap_or(1), |t| {
            let (graph_seed, g) = source.instance(seed, t)?;
            let spectrum = spectrum_of(&g, a.cap)?;
            let x = select_x(rule, &spectrum)?;
            let net = build_net(&g, method, r, p, graph_seed)?;
            let rep = finite_param_check(&g, &spectrum, x, theta, s, &net)?;
            let ok = rep.lhs <= rep.rhs + tol;
            let bad = (!ok).then(|| violation("verify finite-param", t, graph_seed, &g, &rep));
            let line = format!(
                "{t},{graph_seed},{},{},{},{r},{s},{},{},{},{},{ok}",
                g.n(),
                num(x),
                num(theta),
                num(rep.params.delta_top),
                num(rep.params.eps_net),
                num(rep.lhs),
                num(rep.rhs)
            );
            Ok((vec![line], bad))
        })?;
        Ok(collect("trial,seed,n,x,theta,r,s,delta_top,eps_net,lhs,rhs,ok", rows))
    })
}

pub fn thm(flags: &ThmArgs) -> CliResult<bool> {
    run("verify thm", flags, |a, seed| {
        let (graph_seed, g) = a.graph.source()?.instance(seed, 0)?;
        let spectrum = spectrum_of(&g, a.cap)?;
        let variant = match a.variant.unwrap_or(VariantChoice::Main) {
            VariantChoice::Main => TheoremVariant::Main,
            VariantChoice::Expander => TheoremVariant::Expander { c: a.c.unwrap_or(0.1) },
            VariantChoice::SecondEig => TheoremVariant::SecondEig,
        };
        let (x, theta) = match variant {
            TheoremVariant::SecondEig => (0.0, 0.0),
            _ => (
                select_x(XRule::parse(a.x.as_deref().unwrap_or("lambda2"))?, &spectrum)?,
                a.theta.unwrap_or(0.1),
            ),
        };
        let rep = thm_checker(&g, &spectrum, x, theta, variant)?;
        let bad = rep
            .en_route
            .as_ref()
            .filter(|b| !b.holds)
            .map(|_| violation("verify thm", 0, graph_seed, &g, &rep));
        Ok(Report {
            body: to_json(&rep),
            violation: bad,
        })
    })
}
