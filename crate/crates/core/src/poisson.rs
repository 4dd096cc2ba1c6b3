//! Poisson's equation `Delta phi = rho`, by finite differences or by
//! expansion in eigenmodes.

use crate::error::{Error, Result};
use crate::fd::solve::solve_refined;
use crate::fd::{sample_edge, DiscreteOperator, Resolution};
use crate::graph::MetricNetwork;
use crate::linalg::max_abs;
use crate::registry;
use crate::spectral::{compute_spectrum, zero_mode, SpectralConfig, Spectrum};
use crate::{inner_product, EdgeFunction, EdgeProfile, NetworkFunction};

/// Bound on `|<1, rho>|` (discrete or continuous) for all-Kirchhoff networks.
pub const COMPATIBILITY_TOL: f64 = 1e-8;
/// Bound on `||Delta phi - rho||_inf / ||rho||_inf` after an FD solve.
pub const RESIDUAL_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct PoissonRequest<'a> {
    pub net: &'a MetricNetwork,
    pub rho: &'a NetworkFunction,
    /// Output grid, and the FD grid.
    pub resolution: Resolution,
    pub linear_solver: String,
    /// Reused by the spectral solver when given; computed from `spectral`
    /// otherwise.
    pub spectrum: Option<&'a Spectrum>,
    pub spectral: SpectralConfig,
}

impl<'a> PoissonRequest<'a> {
    pub fn new(net: &'a MetricNetwork, rho: &'a NetworkFunction, resolution: Resolution) -> Self {
        Self {
            net,
            rho,
            resolution,
            linear_solver: "condensed".into(),
            spectrum: None,
            spectral: SpectralConfig::default(),
        }
    }
}

pub trait PoissonSolver: Send + Sync {
    fn name(&self) -> &'static str;
    fn solve(&self, req: &PoissonRequest) -> Result<NetworkFunction>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct FdPoisson;

impl PoissonSolver for FdPoisson {
    fn name(&self) -> &'static str {
        "fd"
    }

    fn solve(&self, req: &PoissonRequest) -> Result<NetworkFunction> {
        Ok(solve_poisson_fd_detailed(req.net, req.rho, &req.resolution, &req.linear_solver)?.solution)
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SpectralPoisson;

impl PoissonSolver for SpectralPoisson {
    fn name(&self) -> &'static str {
        "spectral"
    }

    fn solve(&self, req: &PoissonRequest) -> Result<NetworkFunction> {
        match req.spectrum {
            Some(spec) => solve_poisson_spectral(req.net, spec, req.rho, &req.resolution),
            None => {
                let spec = compute_spectrum(req.net, &req.spectral)?;
                solve_poisson_spectral(req.net, &spec, req.rho, &req.resolution)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct FdPoissonSolution {
    pub solution: NetworkFunction,
    /// `||Delta phi - rho||_inf / ||rho||_inf` with `rho` as solved for.
    pub relative_residual: f64,
    /// `<1, rho>_D` before projection (0 when Dirichlet nodes exist).
    pub compatibility: f64,
}

pub fn solve_poisson_fd(net: &MetricNetwork, rho: &NetworkFunction, resolution: &Resolution) -> Result<NetworkFunction> {
    Ok(solve_poisson_fd_detailed(net, rho, resolution, "condensed")?.solution)
}

/// Solves `K phi = D rho`. On an all-Kirchhoff network the source is
/// checked for compatibility, projected onto zero mean, and the solution
/// returned is the zero-mean one.
pub fn solve_poisson_fd_detailed(
    net: &MetricNetwork,
    rho: &NetworkFunction,
    resolution: &Resolution,
    solver: &str,
) -> Result<FdPoissonSolution> {
    let op = DiscreteOperator::new(net, resolution)?;
    let mut r = op.sample(rho)?;
    let singular = !op.has_dirichlet();
    let total_volume: f64 = op.volumes().iter().sum();
    let mut compatibility = 0.0;
    if singular {
        compatibility = op.inner(&vec![1.0; op.dim()], &r);
        if compatibility.abs() >= COMPATIBILITY_TOL {
            return Err(Error::IncompatibleSource {
                overlap: compatibility.abs(),
                tolerance: COMPATIBILITY_TOL,
            });
        }
        let mean = compatibility / total_volume;
        r.iter_mut().for_each(|v| *v -= mean);
    }
    let b: Vec<f64> = r.iter().zip(op.volumes()).map(|(r, d)| -d * r).collect();
    let system = registry::linear_solvers().create(solver)?;
    let factored = system.factor(&op, 0.0, 1.0)?;
    let mut phi = solve_refined(factored.as_ref(), &op, 0.0, 1.0, &b)?;
    if singular {
        let mean = op.inner(&vec![1.0; op.dim()], &phi) / total_volume;
        phi.iter_mut().for_each(|v| *v -= mean);
    }
    let lap = op.apply(&phi);
    let scale = max_abs(&r);
    let defect = lap.iter().zip(&r).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let relative_residual = if scale > 0.0 { defect / scale } else { defect };
    if relative_residual >= RESIDUAL_TOL {
        return Err(Error::NumericalFailure(format!(
            "Poisson residual {relative_residual:.3e} above {RESIDUAL_TOL:e}"
        )));
    }
    Ok(FdPoissonSolution {
        solution: op.to_function(net, &phi)?,
        relative_residual,
        compatibility,
    })
}

/// Expansion coefficients `a_mn = -<f_mn, rho> / k_m^2` for every positive
/// wavenumber, in entry order.
pub fn spectral_coefficients(spec: &Spectrum, rho: &NetworkFunction) -> Result<Vec<Vec<f64>>> {
    spec.positive()
        .map(|e| {
            e.modes
                .iter()
                .map(|f| Ok(-inner_product(f, rho)? / (e.k * e.k)))
                .collect()
        })
        .collect()
}

/// `phi = sum_{k_m > 0} a_mn f_mn`, sampled on `resolution`.
pub fn solve_poisson_spectral(
    net: &MetricNetwork,
    spec: &Spectrum,
    rho: &NetworkFunction,
    resolution: &Resolution,
) -> Result<NetworkFunction> {
    if spec.entries.iter().any(|e| e.modes.iter().any(|m| m.edges().len() != net.edge_count())) {
        return Err(Error::IncompatibleOperands("spectrum was computed on another network".into()));
    }
    if net.is_all_kirchhoff() {
        let overlap = inner_product(&zero_mode(net), rho)?;
        if overlap.abs() >= COMPATIBILITY_TOL {
            return Err(Error::IncompatibleSource {
                overlap: overlap.abs(),
                tolerance: COMPATIBILITY_TOL,
            });
        }
    }
    let intervals = resolution.intervals(net)?;
    let coefficients = spectral_coefficients(spec, rho)?;
    let mut values: Vec<Vec<f64>> = intervals.iter().map(|&n| vec![0.0; n + 1]).collect();
    for (entry, a) in spec.positive().zip(&coefficients) {
        for (e, edge) in net.edges().iter().enumerate() {
            let (mut sa, mut sb) = (0.0, 0.0);
            for (mode, &c) in entry.modes.iter().zip(a) {
                if let EdgeProfile::Sinusoid { a, b, .. } = mode.edge(e).profile {
                    sa += c * a;
                    sb += c * b;
                }
            }
            if sa != 0.0 || sb != 0.0 {
                accumulate_sinusoid(&mut values[e], edge.length, entry.k, sa, sb);
            }
        }
    }
    let edges = net
        .edges()
        .iter()
        .zip(values)
        .map(|(edge, v)| EdgeFunction::samples(edge.id, edge.length, v))
        .collect::<Result<Vec<_>>>()?;
    NetworkFunction::new(net, edges)
}

/// Adds `a sin(k x_j) + b cos(k x_j)` on `x_j = j l / n` using the angle
/// addition recurrence, re-anchored every 64 points.
fn accumulate_sinusoid(out: &mut [f64], l: f64, k: f64, a: f64, b: f64) {
    let n = out.len() - 1;
    let step = k * l / n as f64;
    let (ds, dc) = step.sin_cos();
    let (mut s, mut c) = (0.0, 1.0);
    for (j, v) in out.iter_mut().enumerate() {
        if j % 64 == 0 {
            (s, c) = (j as f64 * step).sin_cos();
        }
        *v += a * s + b * c;
        (s, c) = (s * dc + c * ds, c * dc - s * ds);
    }
}

/// Mean-squared difference between `f` and `g` over all grid points of `f`
/// (sampled edges use their own grid, analytic ones `n` intervals).
pub fn mean_squared_error(f: &NetworkFunction, g: &NetworkFunction, n: usize) -> f64 {
    let (mut sum, mut count) = (0.0, 0usize);
    for (a, b) in f.edges().iter().zip(g.edges()) {
        let m = a.intervals().unwrap_or(n);
        let va = sample_edge(a, m);
        let vb = sample_edge(b, m);
        sum += va.iter().zip(&vb).map(|(x, y)| (x - y) * (x - y)).sum::<f64>();
        count += va.len();
    }
    sum / count as f64
}

/// `max |f - g|` over the same points as [`mean_squared_error`].
pub fn max_error(f: &NetworkFunction, g: &NetworkFunction, n: usize) -> f64 {
    let mut worst: f64 = 0.0;
    for (a, b) in f.edges().iter().zip(g.edges()) {
        let m = a.intervals().unwrap_or(n);
        for (x, y) in sample_edge(a, m).iter().zip(&sample_edge(b, m)) {
            worst = worst.max((x - y).abs());
        }
    }
    worst
}
