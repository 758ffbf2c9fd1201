//! `walks` subcommands.

use std::fmt::Write as _;
use std::path::Path;

use spectop_core::walks::{
    adjacency_moments, decay_fit, dyadic_grid, return_decay_roundtrip, return_probs_finite, tree_return_probs,
    SeriesKind, SeriesSource, ROUNDTRIP_TOL,
};
use spectop_core::{KestenRef, ReturnSeries};

use crate::args::{FitArgs, FiniteArgs, RoundtripArgs, SeriesChoice, TreeArgs};
use crate::commands::{num, run};
use crate::config::{to_json, Report};
use crate::error::{CliError, CliResult};

const DEFAULT_D: usize = 4;
const DEFAULT_HALF_STEPS: usize = 1000;

pub fn tree(flags: &TreeArgs) -> CliResult<bool> {
    run("walks tree", flags, |a, _| {
        let d = a.d.unwrap_or(DEFAULT_D);
        let series = tree_return_probs(d, a.half_steps.unwrap_or(DEFAULT_HALF_STEPS))?;
        Ok(Report::pass(series.to_csv(KestenRef::new(d)?.rho)?))
    })
}

pub fn finite(flags: &FiniteArgs) -> CliResult<bool> {
    run("walks finite", flags, |a, seed| {
        let (_, g) = a.graph.source()?.instance(seed, 0)?;
        let (o, steps) = (a.o.unwrap_or(0), a.steps.unwrap_or(20));
        let series = match a.kind.unwrap_or(SeriesChoice::Srw) {
            SeriesChoice::Srw => return_probs_finite(&g, o, steps)?,
            SeriesChoice::Moment => adjacency_moments(&g, o, steps)?,
        };
        let mut body = String::from("k,value,log_value\n");
        for (k, (v, l)) in series.values.iter().zip(&series.log_values).enumerate() {
            writeln!(body, "{k},{},{}", num(*v), num(*l)).expect("write to string");
        }
        Ok(Report::pass(body))
    })
}

/// Reads `n,p_2n[,...]` rows with `n = 0, 1, 2, ...`.
fn read_series_csv(path: &Path, d: usize) -> CliResult<ReturnSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |line: usize, what: &str| CliError::Usage(format!("{}:{line}: {what}", path.display()));
    let mut logs = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let n: usize = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| bad(i + 1, "first column must be n"))?;
        if n != logs.len() {
            return Err(bad(i + 1, "rows must list n = 0, 1, 2, ... in order"));
        }
        let p: f64 = fields
            .next()
            .and_then(|f| f.trim().parse().ok())
            .ok_or_else(|| bad(i + 1, "second column must be p_2n"))?;
        logs.push(p.ln());
    }
    Ok(ReturnSeries::from_logs(
        SeriesKind::SrwProbability,
        SeriesSource::Synthetic,
        Some(d),
        true,
        false,
        logs,
    ))
}

pub fn fit(flags: &FitArgs) -> CliResult<bool> {
    run("walks fit", flags, |a, _| {
        let d = a.d.unwrap_or(DEFAULT_D);
        let series = match &a.input {
            Some(path) => read_series_csv(path, d)?,
            None => tree_return_probs(d, a.half_steps.unwrap_or(DEFAULT_HALF_STEPS))?,
        };
        let top = series.max_step() / 2;
        let window = (a.from.unwrap_or(top / 10), a.to.unwrap_or(top));
        Ok(Report::pass(to_json(&decay_fit(&series, d as f64, window)?)))
    })
}

pub fn roundtrip(flags: &RoundtripArgs) -> CliResult<bool> {
    run("walks roundtrip", flags, |a, _| {
        let d = a.d.unwrap_or(DEFAULT_D);
        let thetas = dyadic_grid(a.min_exp.unwrap_or(4), a.max_exp.unwrap_or(14));
        let rep = return_decay_roundtrip(d, &thetas, a.half_steps.unwrap_or(DEFAULT_HALF_STEPS))?;
        let ok = rep.gap <= a.tol.unwrap_or(ROUNDTRIP_TOL) && rep.upper_bound_holds;
        let violation = (!ok).then(|| serde_json::to_value(&rep)).transpose()?;
        Ok(Report {
            body: to_json(&rep),
            violation,
        })
    })
}
