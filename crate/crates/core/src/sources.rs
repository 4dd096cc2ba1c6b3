//! Named source terms and initial conditions, plus sampled ones read from
//! CSV.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::MetricNetwork;
use crate::{EdgeFunction, EdgeProfile, NetworkFunction};

pub const NAMES: [&str; 3] = ["zero", "cos2pi", "cos2pi-scaled"];

/// `cos(2 pi x)` on every edge.
pub fn cos2pi(net: &MetricNetwork) -> NetworkFunction {
    NetworkFunction::from_fn(net, |_, _| EdgeProfile::Sinusoid {
        a: 0.0,
        b: 1.0,
        k: 2.0 * PI,
    })
}

/// `cos(2 pi x / l_i) / l_i^2`: one full period on each edge whatever its
/// length.
pub fn cos2pi_scaled(net: &MetricNetwork) -> NetworkFunction {
    NetworkFunction::from_fn(net, |_, e| EdgeProfile::Sinusoid {
        a: 0.0,
        b: 1.0 / (e.length * e.length),
        k: 2.0 * PI / e.length,
    })
}

/// Closed-form solution of `Delta phi = rho` for the named sources that
/// have one (both cos sources give `-cos(...)/(4 pi^2)`).
pub fn poisson_solution(name: &str, net: &MetricNetwork) -> Option<NetworkFunction> {
    let c = -1.0 / (4.0 * PI * PI);
    match name {
        "zero" => Some(NetworkFunction::zero(net)),
        "cos2pi" => Some(cos2pi(net).scaled(c)),
        "cos2pi-scaled" => Some(NetworkFunction::from_fn(net, |_, e| EdgeProfile::Sinusoid {
            a: 0.0,
            b: c,
            k: 2.0 * PI / e.length,
        })),
        _ => None,
    }
}

pub fn named(name: &str, net: &MetricNetwork) -> Option<NetworkFunction> {
    match name {
        "zero" => Some(NetworkFunction::zero(net)),
        "cos2pi" => Some(cos2pi(net)),
        "cos2pi-scaled" => Some(cos2pi_scaled(net)),
        _ => None,
    }
}

/// A named source, or otherwise a path to a CSV file.
pub fn resolve(spec: &str, net: &MetricNetwork) -> Result<NetworkFunction> {
    match named(spec, net) {
        Some(f) => Ok(f),
        None => {
            let path = Path::new(spec);
            if !path.exists() {
                return Err(Error::InvalidParameter(format!(
                    "`{spec}` is neither a named source ({}) nor an existing file",
                    NAMES.join(", ")
                )));
            }
            read_csv(path, net)
        }
    }
}

pub fn read_csv(path: &Path, net: &MetricNetwork) -> Result<NetworkFunction> {
    parse_csv(&std::fs::read_to_string(path)?, net)
}

/// Reads `edge_id,x,value` rows (header optional, node rows with edge id
/// `-1` ignored). Each edge needs samples on a uniform grid from `0` to its
/// length, in any row order.
pub fn parse_csv(text: &str, net: &MetricNetwork) -> Result<NetworkFunction> {
    let mut rows: BTreeMap<usize, Vec<(f64, f64)>> = BTreeMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("edge_id") {
            continue;
        }
        let bad = |what: &str| Error::Parse(format!("line {}: {what}: `{line}`", lineno + 1));
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        if fields.len() != 3 {
            return Err(bad("expected edge_id,x,value"));
        }
        let edge: i64 = fields[0].parse().map_err(|_| bad("bad edge id"))?;
        if edge == -1 {
            continue;
        }
        let x: f64 = fields[1].parse().map_err(|_| bad("bad x"))?;
        let v: f64 = fields[2].parse().map_err(|_| bad("bad value"))?;
        if edge < 0 || !x.is_finite() || !v.is_finite() {
            return Err(bad("negative edge id or non-finite number"));
        }
        rows.entry(edge as usize).or_default().push((x, v));
    }
    let mut edges = Vec::with_capacity(net.edge_count());
    for edge in net.edges() {
        let mut pts = rows
            .remove(&edge.id)
            .ok_or_else(|| Error::Parse(format!("no samples for edge {}", edge.id)))?;
        pts.sort_by(|a, b| a.0.total_cmp(&b.0));
        let n = pts.len().saturating_sub(1);
        if n == 0 {
            return Err(Error::Parse(format!("edge {} needs at least two samples", edge.id)));
        }
        let h = edge.length / n as f64;
        for (j, (x, _)) in pts.iter().enumerate() {
            if (x - j as f64 * h).abs() > 1e-9 * edge.length {
                return Err(Error::Parse(format!(
                    "edge {}: samples must sit on a uniform grid from 0 to {}",
                    edge.id, edge.length
                )));
            }
        }
        edges.push(EdgeFunction::samples(
            edge.id,
            edge.length,
            pts.into_iter().map(|(_, v)| v).collect(),
        )?);
    }
    if let Some(id) = rows.keys().next() {
        return Err(Error::Parse(format!("samples for unknown edge {id}")));
    }
    NetworkFunction::new(net, edges)
}
