//! Time stepping: Crank-Nicolson for the heat equation, leapfrog for the
//! wave equation.

use super::solve::{apply_shifted, solve_refined};
use super::{DiscreteOperator, Resolution};
use crate::error::{invalid, Error, Result};
use crate::graph::MetricNetwork;
use crate::registry;
use crate::NetworkFunction;

#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries {
    pub times: Vec<f64>,
    pub snapshots: Vec<NetworkFunction>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepConfig {
    pub t_end: f64,
    pub dt: f64,
    /// Keep every `stride`-th step; the final state is always kept.
    pub stride: usize,
}

impl StepConfig {
    fn steps(&self) -> Result<usize> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(invalid(format!("time step must be positive, got {}", self.dt)));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(invalid(format!("end time must be non-negative, got {}", self.t_end)));
        }
        if self.stride == 0 {
            return Err(invalid("snapshot stride must be at least 1"));
        }
        Ok((self.t_end / self.dt).round() as usize)
    }
}

struct Recorder<'a> {
    op: &'a DiscreteOperator,
    net: &'a MetricNetwork,
    stride: usize,
    steps: usize,
    series: TimeSeries,
}

impl Recorder<'_> {
    fn offer(&mut self, step: usize, dt: f64, x: &[f64]) -> Result<()> {
        if step % self.stride == 0 || step == self.steps {
            self.series.times.push(step as f64 * dt);
            self.series.snapshots.push(self.op.to_function(self.net, x)?);
        }
        Ok(())
    }
}

/// Vector-level Crank-Nicolson:
/// `(D - dt/2 K) x_{n+1} = (D + dt/2 K) x_n - dt D rho`.
pub fn heat_steps(
    op: &DiscreteOperator,
    solver: &str,
    phi0: &[f64],
    rho: &[f64],
    dt: f64,
    steps: usize,
    mut visit: impl FnMut(usize, &[f64]) -> Result<()>,
) -> Result<Vec<f64>> {
    let system = registry::linear_solvers().create(solver)?;
    let factored = system.factor(op, 1.0, 0.5 * dt)?;
    let d_rho: Vec<f64> = rho.iter().zip(op.volumes()).map(|(r, d)| dt * d * r).collect();
    let mut x = phi0.to_vec();
    visit(0, &x)?;
    for step in 1..=steps {
        let kx = op.apply_k(&x);
        let b: Vec<f64> = x
            .iter()
            .zip(op.volumes())
            .zip(&kx)
            .zip(&d_rho)
            .map(|(((x, d), k), r)| d * x + 0.5 * dt * k - r)
            .collect();
        x = solve_refined(factored.as_ref(), op, 1.0, 0.5 * dt, &b)?;
        visit(step, &x)?;
    }
    Ok(x)
}

pub fn solve_heat_fd(
    net: &MetricNetwork,
    phi0: &NetworkFunction,
    rho: &NetworkFunction,
    cfg: &StepConfig,
    resolution: &Resolution,
    solver: &str,
) -> Result<TimeSeries> {
    let steps = cfg.steps()?;
    let op = DiscreteOperator::new(net, resolution)?;
    let x0 = op.sample(phi0)?;
    let r = op.sample(rho)?;
    let mut rec = Recorder {
        op: &op,
        net,
        stride: cfg.stride,
        steps,
        series: TimeSeries {
            times: Vec::new(),
            snapshots: Vec::new(),
        },
    };
    heat_steps(&op, solver, &x0, &r, cfg.dt, steps, |s, x| rec.offer(s, cfg.dt, x))?;
    Ok(rec.series)
}

/// Largest stable leapfrog step relative to the smallest grid spacing.
pub const CFL_SAFETY: f64 = 0.5;
/// Bound on `dt^2 rho(-Delta)`; the sharp limit is 4.
pub const SPECTRAL_RADIUS_LIMIT: f64 = 4.0 * 0.95;

pub fn check_cfl(op: &DiscreteOperator, dt: f64) -> Result<()> {
    let h_min = op.layout.spacing.iter().copied().fold(f64::INFINITY, f64::min);
    if dt > CFL_SAFETY * h_min {
        return Err(Error::Stability(format!(
            "dt = {dt} exceeds {CFL_SAFETY} * min h = {}",
            CFL_SAFETY * h_min
        )));
    }
    let radius = op.spectral_radius_bound();
    if dt * dt * radius > SPECTRAL_RADIUS_LIMIT {
        return Err(Error::Stability(format!(
            "dt^2 * rho(-Delta) = {} exceeds {SPECTRAL_RADIUS_LIMIT}",
            dt * dt * radius
        )));
    }
    Ok(())
}

/// `1/2 ||(x1 - x0)/dt||_D^2 + 1/2 <-K m, m>` with `m` the midpoint.
pub fn midpoint_energy(op: &DiscreteOperator, x0: &[f64], x1: &[f64], dt: f64) -> f64 {
    let v: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| (b - a) / dt).collect();
    let m: Vec<f64> = x0.iter().zip(x1).map(|(a, b)| 0.5 * (a + b)).collect();
    let km = op.apply_k(&m);
    0.5 * op.inner(&v, &v) - 0.5 * crate::linalg::dot(&km, &m)
}

/// Vector-level leapfrog. `visit` sees every state; `energy` gets the
/// midpoint energy of every step.
pub fn wave_steps(
    op: &DiscreteOperator,
    phi0: &[f64],
    phidot0: &[f64],
    dt: f64,
    steps: usize,
    mut visit: impl FnMut(usize, &[f64]) -> Result<()>,
    mut energy: impl FnMut(usize, f64),
) -> Result<Vec<f64>> {
    check_cfl(op, dt)?;
    let lap = |x: &[f64]| op.apply(x);
    let mut prev = phi0.to_vec();
    visit(0, &prev)?;
    if steps == 0 {
        return Ok(prev);
    }
    let l0 = lap(&prev);
    let mut cur: Vec<f64> = prev
        .iter()
        .zip(phidot0)
        .zip(&l0)
        .map(|((x, v), l)| x + dt * v + 0.5 * dt * dt * l)
        .collect();
    energy(1, midpoint_energy(op, &prev, &cur, dt));
    visit(1, &cur)?;
    for step in 2..=steps {
        let l = lap(&cur);
        let next: Vec<f64> = cur
            .iter()
            .zip(&prev)
            .zip(&l)
            .map(|((c, p), l)| 2.0 * c - p + dt * dt * l)
            .collect();
        energy(step, midpoint_energy(op, &cur, &next, dt));
        prev = std::mem::replace(&mut cur, next);
        visit(step, &cur)?;
    }
    Ok(cur)
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveRun {
    pub series: TimeSeries,
    /// Midpoint energy of each step `n -> n + 1`.
    pub energy: Vec<f64>,
}

impl WaveRun {
    /// `max |E - E_0| / |E_0|`.
    pub fn relative_energy_drift(&self) -> f64 {
        let e0 = match self.energy.first() {
            Some(e) if *e != 0.0 => *e,
            _ => return 0.0,
        };
        self.energy.iter().fold(0.0, |m, e| m.max(((e - e0) / e0).abs()))
    }
}

pub fn solve_wave_fd(
    net: &MetricNetwork,
    phi0: &NetworkFunction,
    phidot0: &NetworkFunction,
    cfg: &StepConfig,
    resolution: &Resolution,
) -> Result<WaveRun> {
    let steps = cfg.steps()?;
    let op = DiscreteOperator::new(net, resolution)?;
    let x0 = op.sample(phi0)?;
    let v0 = op.sample(phidot0)?;
    let mut rec = Recorder {
        op: &op,
        net,
        stride: cfg.stride,
        steps,
        series: TimeSeries {
            times: Vec::new(),
            snapshots: Vec::new(),
        },
    };
    let mut energy = Vec::with_capacity(steps);
    wave_steps(&op, &x0, &v0, cfg.dt, steps, |s, x| rec.offer(s, cfg.dt, x), |_, e| energy.push(e))?;
    Ok(WaveRun {
        series: rec.series,
        energy,
    })
}

/// Residual of a heat step, exposed for tests of custom solvers.
pub fn crank_nicolson_residual(op: &DiscreteOperator, dt: f64, x0: &[f64], x1: &[f64], rho: &[f64]) -> f64 {
    let lhs = apply_shifted(op, 1.0, 0.5 * dt, x1);
    let kx = op.apply_k(x0);
    lhs.iter()
        .enumerate()
        .map(|(i, l)| {
            let d = op.volumes()[i];
            (l - (d * x0[i] + 0.5 * dt * kx[i] - dt * d * rho[i])).abs()
        })
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fd::build_generalized_laplacian;
    use crate::graph::build_star;
    use crate::spectral::zero_mode;
    use crate::EdgeProfile;
    use std::f64::consts::PI;

    fn cfg(t_end: f64, dt: f64) -> StepConfig {
        StepConfig { t_end, dt, stride: 1 }
    }

    #[test]
    fn constant_is_stationary_for_heat() {
        let net = build_star(3, 1.0).unwrap();
        let z = zero_mode(&net);
        let run = solve_heat_fd(&net, &z, &NetworkFunction::zero(&net), &cfg(0.05, 0.01), &20.into(), "condensed").unwrap();
        assert_eq!(run.times.len(), 6);
        let c = 1.0 / 3f64.sqrt();
        for snap in &run.snapshots {
            for e in snap.edges() {
                assert!(e.sample(20).iter().all(|v| (v - c).abs() < 1e-13));
            }
        }
    }

    #[test]
    fn crank_nicolson_steps_satisfy_their_equation() {
        let net = build_star(3, 1.0).unwrap();
        let op = build_generalized_laplacian(&net, &10.into()).unwrap();
        let x0: Vec<f64> = (0..op.dim()).map(|i| (i as f64).sin()).collect();
        let rho = vec![0.3; op.dim()];
        let mut states = Vec::new();
        heat_steps(&op, "condensed", &x0, &rho, 0.01, 2, |_, x| {
            states.push(x.to_vec());
            Ok(())
        })
        .unwrap();
        assert!(crank_nicolson_residual(&op, 0.01, &states[0], &states[1], &rho) < 1e-12);
        assert!(crank_nicolson_residual(&op, 0.01, &states[1], &states[2], &rho) < 1e-12);
    }

    #[test]
    fn zero_wave_stays_zero() {
        let net = build_star(3, 1.0).unwrap();
        let z = NetworkFunction::zero(&net);
        let run = solve_wave_fd(&net, &z, &z, &cfg(0.1, 0.01), &10.into()).unwrap();
        for s in &run.series.snapshots {
            assert_eq!(s.max_abs(10), 0.0);
        }
        assert_eq!(run.relative_energy_drift(), 0.0);
    }

    #[test]
    fn cfl_violation_is_reported_before_stepping() {
        let net = build_star(3, 1.0).unwrap();
        let z = NetworkFunction::zero(&net);
        let err = solve_wave_fd(&net, &z, &z, &cfg(1.0, 0.06), &10.into()).unwrap_err();
        assert!(matches!(err, Error::Stability(_)));
    }

    #[test]
    fn short_wave_run_tracks_the_standing_wave() {
        let net = build_star(3, 1.0).unwrap();
        let amp = -1.0 / (4.0 * PI * PI);
        let phi0 = NetworkFunction::from_fn(&net, |_, _| EdgeProfile::Sinusoid { a: 0.0, b: amp, k: 2.0 * PI });
        let z = NetworkFunction::zero(&net);
        let run = solve_wave_fd(&net, &phi0, &z, &StepConfig { t_end: 0.25, dt: 1e-3, stride: 50 }, &100.into()).unwrap();
        let last = run.series.snapshots.last().unwrap();
        let t = *run.series.times.last().unwrap();
        assert!((t - 0.25).abs() < 1e-12);
        let expected = amp * (2.0 * PI * t).cos();
        for e in last.edges() {
            for (j, v) in e.sample(100).iter().enumerate() {
                let x = j as f64 / 100.0;
                assert!((v - expected * (2.0 * PI * x).cos()).abs() < 1e-4);
            }
        }
        assert!(run.relative_energy_drift() < 1e-4);
    }

    #[test]
    fn bad_configs() {
        let net = build_star(3, 1.0).unwrap();
        let z = NetworkFunction::zero(&net);
        for c in [cfg(1.0, 0.0), cfg(-1.0, 0.1), StepConfig { t_end: 1.0, dt: 0.1, stride: 0 }] {
            assert!(matches!(
                solve_heat_fd(&net, &z, &z, &c, &4.into(), "condensed"),
                Err(Error::InvalidParameter(_))
            ));
        }
    }
}
