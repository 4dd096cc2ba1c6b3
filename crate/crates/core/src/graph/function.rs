//! Scalar fields on a metric network and the graph L2 inner product.

use super::MetricNetwork;
use crate::error::{Error, Result};

/// How one edge's function is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum EdgeProfile {
    /// `a sin(k x) + b cos(k x)`.
    Sinusoid { a: f64, b: f64, k: f64 },
    /// Values at `x_j = j l / n`, `j = 0..=n`, with `n = samples.len() - 1`.
    Samples(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EdgeFunction {
    pub edge_id: usize,
    pub length: f64,
    pub profile: EdgeProfile,
}

impl EdgeFunction {
    pub fn sinusoid(edge_id: usize, length: f64, a: f64, b: f64, k: f64) -> Self {
        Self {
            edge_id,
            length,
            profile: EdgeProfile::Sinusoid { a, b, k },
        }
    }

    pub fn samples(edge_id: usize, length: f64, samples: Vec<f64>) -> Result<Self> {
        if samples.len() < 2 {
            return Err(Error::InvalidParameter(format!(
                "edge {edge_id}: a sampled function needs at least two samples"
            )));
        }
        Ok(Self {
            edge_id,
            length,
            profile: EdgeProfile::Samples(samples),
        })
    }

    /// Number of grid intervals for sampled profiles.
    pub fn intervals(&self) -> Option<usize> {
        match &self.profile {
            EdgeProfile::Samples(s) => Some(s.len() - 1),
            EdgeProfile::Sinusoid { .. } => None,
        }
    }

    /// Value at `x in [0, length]`; sampled profiles interpolate linearly.
    pub fn eval(&self, x: f64) -> f64 {
        match &self.profile {
            EdgeProfile::Sinusoid { a, b, k } => a * (k * x).sin() + b * (k * x).cos(),
            EdgeProfile::Samples(s) => {
                let n = s.len() - 1;
                let pos = (x / self.length * n as f64).clamp(0.0, n as f64);
                let j = (pos.floor() as usize).min(n - 1);
                let frac = pos - j as f64;
                s[j] * (1.0 - frac) + s[j + 1] * frac
            }
        }
    }

    /// Values at the `n + 1` uniform grid points of this edge.
    pub fn sample(&self, n: usize) -> Vec<f64> {
        match &self.profile {
            EdgeProfile::Samples(s) if s.len() == n + 1 => s.clone(),
            _ => {
                let h = self.length / n as f64;
                (0..=n).map(|j| self.eval(j as f64 * h)).collect()
            }
        }
    }

    /// `(value at x = 0, value at x = length)`.
    pub fn end_values(&self) -> (f64, f64) {
        match &self.profile {
            EdgeProfile::Samples(s) => (s[0], s[s.len() - 1]),
            EdgeProfile::Sinusoid { .. } => (self.eval(0.0), self.eval(self.length)),
        }
    }
}

/// One [`EdgeFunction`] per network edge, in network edge order.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkFunction {
    edges: Vec<EdgeFunction>,
}

impl NetworkFunction {
    pub fn new(net: &MetricNetwork, edges: Vec<EdgeFunction>) -> Result<Self> {
        if edges.len() != net.edge_count() {
            return Err(Error::IncompatibleOperands(format!(
                "{} edge functions for {} edges",
                edges.len(),
                net.edge_count()
            )));
        }
        for (f, e) in edges.iter().zip(net.edges()) {
            if f.edge_id != e.id || f.length != e.length {
                return Err(Error::IncompatibleOperands(format!(
                    "edge function for edge {} (length {}) does not match edge {} (length {})",
                    f.edge_id, f.length, e.id, e.length
                )));
            }
        }
        Ok(Self { edges })
    }

    /// Builds a function edge by edge from `f(edge_index, edge) -> profile`.
    pub fn from_fn(net: &MetricNetwork, mut f: impl FnMut(usize, &super::Edge) -> EdgeProfile) -> Self {
        let edges = net
            .edges()
            .iter()
            .enumerate()
            .map(|(i, e)| EdgeFunction {
                edge_id: e.id,
                length: e.length,
                profile: f(i, e),
            })
            .collect();
        Self { edges }
    }

    pub fn zero(net: &MetricNetwork) -> Self {
        Self::from_fn(net, |_, _| EdgeProfile::Sinusoid { a: 0.0, b: 0.0, k: 0.0 })
    }

    pub fn edges(&self) -> &[EdgeFunction] {
        &self.edges
    }

    pub fn edge(&self, index: usize) -> &EdgeFunction {
        &self.edges[index]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let edges = self
            .edges
            .iter()
            .map(|f| EdgeFunction {
                profile: match &f.profile {
                    EdgeProfile::Sinusoid { a, b, k } => EdgeProfile::Sinusoid {
                        a: a * factor,
                        b: b * factor,
                        k: *k,
                    },
                    EdgeProfile::Samples(s) => EdgeProfile::Samples(s.iter().map(|v| v * factor).collect()),
                },
                ..f.clone()
            })
            .collect();
        Self { edges }
    }

    /// Largest mismatch between the values incident edges report at each
    /// node; zero for continuous functions.
    pub fn continuity_defect(&self, net: &MetricNetwork) -> f64 {
        let mut worst: f64 = 0.0;
        for ends in net.incident_ends() {
            let values: Vec<f64> = ends
                .iter()
                .map(|ee| {
                    let (v0, v1) = self.edges[ee.edge].end_values();
                    match ee.end {
                        super::End::Tail => v0,
                        super::End::Head => v1,
                    }
                })
                .collect();
            for v in &values {
                worst = worst.max((v - values[0]).abs());
            }
        }
        worst
    }

    /// Largest absolute value over each edge's grid (`n` intervals per edge
    /// for sinusoids).
    pub fn max_abs(&self, n: usize) -> f64 {
        self.edges
            .iter()
            .flat_map(|f| f.sample(f.intervals().unwrap_or(n)))
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// `sum over edges of int_0^l f g dx`.
pub fn inner_product(f: &NetworkFunction, g: &NetworkFunction) -> Result<f64> {
    if f.edges.len() != g.edges.len() {
        return Err(Error::IncompatibleOperands(format!(
            "functions live on {} and {} edges",
            f.edges.len(),
            g.edges.len()
        )));
    }
    f.edges
        .iter()
        .zip(&g.edges)
        .map(|(a, b)| edge_inner_product(a, b))
        .sum()
}

pub fn edge_inner_product(f: &EdgeFunction, g: &EdgeFunction) -> Result<f64> {
    if f.edge_id != g.edge_id || f.length != g.length {
        return Err(Error::IncompatibleOperands(format!(
            "edge {} (length {}) vs edge {} (length {})",
            f.edge_id, f.length, g.edge_id, g.length
        )));
    }
    let l = f.length;
    match (&f.profile, &g.profile) {
        (
            EdgeProfile::Sinusoid { a, b, k },
            EdgeProfile::Sinusoid {
                a: c,
                b: d,
                k: q,
            },
        ) => Ok(sinusoid_product_integral(*a, *b, *k, *c, *d, *q, l)),
        (EdgeProfile::Samples(s), EdgeProfile::Samples(t)) => {
            if s.len() != t.len() {
                return Err(Error::IncompatibleOperands(format!(
                    "edge {}: grids with {} and {} samples",
                    f.edge_id,
                    s.len(),
                    t.len()
                )));
            }
            let prod: Vec<f64> = s.iter().zip(t).map(|(x, y)| x * y).collect();
            Ok(simpson(&prod, l))
        }
        (EdgeProfile::Samples(s), EdgeProfile::Sinusoid { .. }) => {
            let t = g.sample(s.len() - 1);
            let prod: Vec<f64> = s.iter().zip(&t).map(|(x, y)| x * y).collect();
            Ok(simpson(&prod, l))
        }
        (EdgeProfile::Sinusoid { .. }, EdgeProfile::Samples(_)) => edge_inner_product(g, f),
    }
}

/// `int_0^l cos(w x) dx`, continuous in `w` through `w = 0`.
fn int_cos(w: f64, l: f64) -> f64 {
    if w == 0.0 {
        l
    } else {
        (w * l).sin() / w
    }
}

/// `int_0^l sin(w x) dx = 2 sin^2(w l / 2) / w`.
fn int_sin(w: f64, l: f64) -> f64 {
    if w == 0.0 {
        0.0
    } else {
        let s = (0.5 * w * l).sin();
        2.0 * s * s / w
    }
}

/// Closed-form `int_0^l (a sin kx + b cos kx)(c sin qx + d cos qx) dx`.
pub fn sinusoid_product_integral(a: f64, b: f64, k: f64, c: f64, d: f64, q: f64, l: f64) -> f64 {
    let (m, p) = (k - q, k + q);
    // sin kx sin qx = (cos mx - cos px)/2, cos cos = (cos mx + cos px)/2,
    // sin kx cos qx = (sin px + sin mx)/2, cos kx sin qx = (sin px - sin mx)/2
    let ss = 0.5 * (int_cos(m, l) - int_cos(p, l));
    let cc = 0.5 * (int_cos(m, l) + int_cos(p, l));
    let sc = 0.5 * (int_sin(p, l) + int_sin(m, l));
    let cs = 0.5 * (int_sin(p, l) - int_sin(m, l));
    a * c * ss + b * d * cc + a * d * sc + b * c * cs
}

/// Composite Simpson over uniform samples on `[0, l]`. Odd interval counts
/// close with a 3/8 panel; a single interval falls back to the trapezoid.
pub fn simpson(values: &[f64], l: f64) -> f64 {
    let n = values.len() - 1;
    let h = l / n as f64;
    match n {
        0 => 0.0,
        1 => 0.5 * h * (values[0] + values[1]),
        _ => {
            let simpson_span = if n % 2 == 0 { n } else { n - 3 };
            let mut sum = 0.0;
            if simpson_span > 0 {
                let mut acc = values[0] + values[simpson_span];
                for (j, v) in values.iter().enumerate().take(simpson_span).skip(1) {
                    acc += if j % 2 == 1 { 4.0 * v } else { 2.0 * v };
                }
                sum += acc * h / 3.0;
            }
            if n % 2 == 1 {
                let v = &values[simpson_span..];
                sum += 3.0 * h / 8.0 * (v[0] + 3.0 * v[1] + 3.0 * v[2] + v[3]);
            }
            sum
        }
    }
}
