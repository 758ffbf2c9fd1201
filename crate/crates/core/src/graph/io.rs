//! Plain-text graph format: a header line `n m`, then `m` lines `u v w`.
//! Anything after `#` on a line is a comment. Weights are written with 17
//! significant digits, which round-trips every `f64` exactly.

use std::fmt::Write as _;

use super::WeightedGraph;
use crate::error::{Error, Result};

pub fn write_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    writeln!(out, "{} {}", g.n(), g.num_edges()).unwrap();
    for (u, v, w) in g.edges() {
        writeln!(out, "{u} {v} {w:.16e}").unwrap();
    }
    out
}

pub fn read_graph(text: &str) -> Result<WeightedGraph> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    let (hline, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing header".into(),
    })?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 2 {
        return Err(Error::Parse {
            line: hline,
            msg: "header must be `n m`".into(),
        });
    }
    let n: usize = parse(hline, head[0])?;
    let m: usize = parse(hline, head[1])?;
    let mut edges = Vec::with_capacity(m);
    for (line, body) in lines {
        let f: Vec<&str> = body.split_whitespace().collect();
        if f.len() != 3 {
            return Err(Error::Parse {
                line,
                msg: "edge line must be `u v w`".into(),
            });
        }
        edges.push((parse(line, f[0])?, parse(line, f[1])?, parse::<f64>(line, f[2])?));
    }
    if edges.len() != m {
        return Err(Error::Parse {
            line: hline,
            msg: format!("header declares {m} edges, found {}", edges.len()),
        });
    }
    WeightedGraph::build(n, &edges)
}

fn parse<T: std::str::FromStr>(line: usize, s: &str) -> Result<T> {
    s.parse().map_err(|_| Error::Parse {
        line,
        msg: format!("cannot parse `{s}`"),
    })
}
