//! Solution CSV export.
//!
//! Static solutions: `edge_id,x,value`, one row per grid point of each
//! edge including both ends. Time series add a `t` column:
//! `edge_id,x,t,value`. After the edge rows, each node appears once as
//! `-1,<node_id>,value` (`-1,<node_id>,t,value` for time series): the
//! reserved edge id `-1` marks a node row and the `x` column then holds the
//! node id.

use std::fmt::Write as _;
use std::io::Write;

use super::time::TimeSeries;
use crate::error::Result;
use crate::graph::{End, MetricNetwork};
use crate::NetworkFunction;

/// Samples used per edge: the stored grid for sampled profiles, `fallback`
/// intervals otherwise.
fn edge_samples(f: &NetworkFunction, fallback: usize) -> Vec<Vec<f64>> {
    f.edges()
        .iter()
        .map(|e| e.sample(e.intervals().unwrap_or(fallback)))
        .collect()
}

/// Node values as the mean of the incident end values (equal for
/// continuous functions); Dirichlet nodes read 0 from their ends.
fn node_values(net: &MetricNetwork, samples: &[Vec<f64>]) -> Vec<f64> {
    net.incident_ends()
        .iter()
        .map(|ends| {
            let s: f64 = ends
                .iter()
                .map(|ee| {
                    let v = &samples[ee.edge];
                    match ee.end {
                        End::Tail => v[0],
                        End::Head => v[v.len() - 1],
                    }
                })
                .sum();
            s / ends.len() as f64
        })
        .collect()
}

fn write_rows(out: &mut String, net: &MetricNetwork, f: &NetworkFunction, fallback: usize, t: Option<f64>) {
    let samples = edge_samples(f, fallback);
    let time = t.map(|t| format!(",{t}")).unwrap_or_default();
    for (edge, s) in net.edges().iter().zip(&samples) {
        let n = s.len() - 1;
        for (j, v) in s.iter().enumerate() {
            let x = j as f64 * edge.length / n as f64;
            let _ = writeln!(out, "{},{x}{time},{v}", edge.id);
        }
    }
    for (node, v) in net.nodes().iter().zip(node_values(net, &samples)) {
        let _ = writeln!(out, "-1,{}{time},{v}", node.id);
    }
}

pub fn solution_csv(net: &MetricNetwork, f: &NetworkFunction, fallback_intervals: usize) -> String {
    let mut out = String::from("edge_id,x,value\n");
    write_rows(&mut out, net, f, fallback_intervals, None);
    out
}

pub fn time_series_csv(net: &MetricNetwork, series: &TimeSeries, fallback_intervals: usize) -> String {
    let mut out = String::from("edge_id,x,t,value\n");
    for (t, f) in series.times.iter().zip(&series.snapshots) {
        write_rows(&mut out, net, f, fallback_intervals, Some(*t));
    }
    out
}

pub fn write_text(path: impl AsRef<std::path::Path>, text: &str) -> Result<()> {
    let mut file = std::io::BufWriter::new(std::fs::File::create(path)?);
    file.write_all(text.as_bytes())?;
    file.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::build_star;
    use crate::EdgeProfile;

    #[test]
    fn static_layout() {
        let net = build_star(3, 1.0).unwrap();
        let f = NetworkFunction::from_fn(&net, |i, _| EdgeProfile::Samples(vec![1.0, 2.0, i as f64]));
        let text = solution_csv(&net, &f, 10);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "edge_id,x,value");
        assert_eq!(lines[1], "0,0,1");
        assert_eq!(lines[2], "0,0.5,2");
        assert_eq!(lines.len(), 1 + 9 + 4);
        // hub is the head of all three edges: mean of 0, 1, 2
        assert_eq!(lines[13], "-1,3,1");
    }

    #[test]
    fn time_series_layout() {
        let net = build_star(3, 1.0).unwrap();
        let z = NetworkFunction::zero(&net);
        let series = TimeSeries {
            times: vec![0.0, 0.5],
            snapshots: vec![z.clone(), z],
        };
        let text = time_series_csv(&net, &series, 2);
        assert!(text.starts_with("edge_id,x,t,value\n0,0,0,0\n"));
        assert!(text.contains("\n-1,3,0.5,0\n"));
        assert_eq!(text.lines().count(), 1 + 2 * (9 + 4));
    }
}
