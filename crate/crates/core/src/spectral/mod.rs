//! Characteristic wavenumbers and eigenmodes of the Kirchhoff/Dirichlet
//! Laplacian, found as the values of `k` where `T(k)` loses rank.

pub mod io;
pub mod minimize;
pub mod nullspace;

use rayon::prelude::*;

use crate::coupling::{default_estimator, CouplingMatrix, SingularValueEstimator, DENSE_SVD_LIMIT};
use crate::error::{invalid, Error, Result};
use crate::graph::function::sinusoid_product_integral;
use crate::graph::MetricNetwork;
use crate::NetworkFunction;
use crate::registry;

use minimize::ScalarMinimizer;
use nullspace::NullspaceMethod;

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralConfig {
    pub k_max: f64,
    pub n_grid: usize,
    pub cutoff: f64,
    pub bracket_halfwidth: f64,
    /// Decimal digits kept when merging refined wavenumbers.
    pub round_precision: u32,
    /// Singular values below `rank_tol * sigma_max` count as zero. Also the
    /// bar a refined minimum has to clear to be accepted as a root.
    pub rank_tol: f64,
    pub convergence_tol: f64,
    /// `None` picks by matrix size.
    pub estimator: Option<String>,
    pub minimizer: String,
    /// `None` picks by matrix size.
    pub nullspace: Option<String>,
}

impl Default for SpectralConfig {
    fn default() -> Self {
        Self {
            k_max: 100.0,
            n_grid: 2000,
            cutoff: 1e-2,
            bracket_halfwidth: 0.1,
            round_precision: 8,
            rank_tol: 1e-8,
            convergence_tol: 1e-14,
            estimator: None,
            minimizer: "brent".into(),
            nullspace: None,
        }
    }
}

impl SpectralConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.k_max.is_finite() && self.k_max > 0.0) {
            return Err(invalid(format!("k_max must be positive, got {}", self.k_max)));
        }
        if self.n_grid < 2 {
            return Err(invalid(format!("n_grid must be at least 2, got {}", self.n_grid)));
        }
        if !(self.cutoff > 0.0 && self.cutoff < 1.0) {
            return Err(invalid(format!("cutoff must lie in (0, 1), got {}", self.cutoff)));
        }
        if !(self.bracket_halfwidth.is_finite() && self.bracket_halfwidth > 0.0) {
            return Err(invalid(format!(
                "bracket half-width must be positive, got {}",
                self.bracket_halfwidth
            )));
        }
        if !(self.rank_tol > 0.0 && self.rank_tol < 1.0) {
            return Err(invalid(format!("rank_tol must lie in (0, 1), got {}", self.rank_tol)));
        }
        if !(self.convergence_tol > 0.0) {
            return Err(invalid("convergence_tol must be positive"));
        }
        if self.round_precision > 15 {
            return Err(invalid("round_precision above 15 digits is meaningless for f64"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumEntry {
    pub k: f64,
    /// L2-orthonormal, each in sinusoid form with wavenumber `k`.
    pub modes: Vec<NetworkFunction>,
}

impl SpectrumEntry {
    pub fn multiplicity(&self) -> usize {
        self.modes.len()
    }

    /// Per-edge `(A, B)` of mode `n`.
    pub fn coefficients(&self, n: usize) -> Vec<(f64, f64)> {
        self.modes[n]
            .edges()
            .iter()
            .map(|e| match e.profile {
                crate::EdgeProfile::Sinusoid { a, b, .. } => (a, b),
                crate::EdgeProfile::Samples(_) => unreachable!("spectral modes are sinusoids"),
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    /// Ascending in `k`; the zero mode, when present, is the `k = 0` entry.
    pub entries: Vec<SpectrumEntry>,
    pub includes_zero_mode: bool,
    pub k_max: f64,
}

impl Spectrum {
    pub fn positive(&self) -> impl Iterator<Item = &SpectrumEntry> {
        self.entries.iter().filter(|e| e.k > 0.0)
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.k).collect()
    }

    pub fn mode_count(&self) -> usize {
        self.entries.iter().map(SpectrumEntry::multiplicity).sum()
    }
}

/// The normalized constant, `1/sqrt(L)` on every edge.
pub fn zero_mode(net: &MetricNetwork) -> NetworkFunction {
    let c = 1.0 / net.total_length().sqrt();
    NetworkFunction::from_fn(net, |_, _| crate::EdgeProfile::Sinusoid { a: 0.0, b: c, k: 0.0 })
}

fn l2_coefficients(lengths: &[f64], k: f64, x: &[f64], y: &[f64]) -> f64 {
    lengths
        .iter()
        .enumerate()
        .map(|(e, &l)| sinusoid_product_integral(x[2 * e], x[2 * e + 1], k, y[2 * e], y[2 * e + 1], k, l))
        .sum()
}

/// Modified Gram-Schmidt under the graph L2 inner product, run twice for
/// stability, followed by the sign gauge.
fn orthonormalize_modes(lengths: &[f64], k: f64, vectors: Vec<Vec<f64>>) -> Result<Vec<Vec<f64>>> {
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(vectors.len());
    for mut v in vectors {
        for _ in 0..2 {
            for q in &basis {
                let c = l2_coefficients(lengths, k, q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let n2 = l2_coefficients(lengths, k, &v, &v);
        if !(n2 > 0.0 && n2.is_finite()) {
            return Err(Error::Inconsistency(format!(
                "nullspace vector at k = {k} has no L2 mass after orthogonalization"
            )));
        }
        let s = n2.sqrt();
        v.iter_mut().for_each(|a| *a /= s);
        basis.push(v);
    }
    for v in &mut basis {
        fix_sign(v);
    }
    Ok(basis)
}

/// Makes the first coefficient that is not negligible positive.
fn fix_sign(v: &mut [f64]) {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if let Some(first) = v.iter().find(|x| x.abs() > 1e-10 * scale) {
        if *first < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

fn to_function(net: &MetricNetwork, k: f64, x: &[f64]) -> NetworkFunction {
    NetworkFunction::from_fn(net, |i, _| crate::EdgeProfile::Sinusoid {
        a: x[2 * i],
        b: x[2 * i + 1],
        k,
    })
}

struct Strategies {
    estimator: Box<dyn SingularValueEstimator>,
    minimizer: Box<dyn ScalarMinimizer>,
    nullspace: Box<dyn NullspaceMethod>,
}

impl Strategies {
    fn resolve(cfg: &SpectralConfig, dim: usize) -> Result<Self> {
        let estimator = cfg.estimator.as_deref().unwrap_or(default_estimator(dim));
        let nullspace = cfg.nullspace.as_deref().unwrap_or(if dim <= DENSE_SVD_LIMIT {
            "svd"
        } else {
            "inverse-iteration"
        });
        let mut minimizer = registry::scalar_minimizers().create(&cfg.minimizer)?;
        minimizer.set_tolerance(cfg.convergence_tol);
        Ok(Self {
            estimator: registry::singular_value_estimators().create(estimator)?,
            minimizer,
            nullspace: registry::nullspace_methods().create(nullspace)?,
        })
    }
}

fn grid_step(cfg: &SpectralConfig) -> f64 {
    cfg.k_max / (cfg.n_grid - 1) as f64
}

fn inverse_condition(net: &MetricNetwork, k: f64, est: &dyn SingularValueEstimator) -> Result<f64> {
    est.extremes(&CouplingMatrix::assemble(net, k)?)?.inverse_condition()
}

/// Scan values on `n_grid` equidistant points spanning `[0, k_max]`.
/// `k = 0` itself is skipped since `T(0)` is not defined.
pub fn scan(net: &MetricNetwork, cfg: &SpectralConfig) -> Result<Vec<(f64, f64)>> {
    cfg.validate()?;
    let strategies = Strategies::resolve(cfg, 2 * net.edge_count())?;
    scan_with(net, cfg, strategies.estimator.as_ref())
}

fn scan_with(net: &MetricNetwork, cfg: &SpectralConfig, est: &dyn SingularValueEstimator) -> Result<Vec<(f64, f64)>> {
    let step = grid_step(cfg);
    (1..cfg.n_grid)
        .into_par_iter()
        .map(|j| {
            let k = j as f64 * step;
            Ok((k, inverse_condition(net, k, est)?))
        })
        .collect()
}

/// Grid points below the cutoff that are also discrete local minima of the
/// scan. Refining every point of a run below the cutoff lands on the same
/// minimum, so only the bottom of each dip is kept.
fn candidates(scan: &[(f64, f64)], cutoff: f64) -> Vec<f64> {
    let n = scan.len();
    (0..n)
        .filter(|&j| {
            let v = scan[j].1;
            v < cutoff && (j == 0 || v <= scan[j - 1].1) && (j + 1 == n || v <= scan[j + 1].1)
        })
        .map(|j| scan[j].0)
        .collect()
}

/// Sorted refined roots with duplicates removed: two roots are the same if
/// they agree after rounding to `digits` decimals or lie closer than
/// `10^-digits` (which catches pairs straddling a rounding boundary).
fn deduplicate(mut roots: Vec<(f64, f64)>, digits: u32) -> Vec<(f64, f64)> {
    roots.sort_by(|a, b| a.0.total_cmp(&b.0));
    let scale = 10f64.powi(digits as i32);
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(roots.len());
    for (k, v) in roots {
        match out.last_mut() {
            Some(last) if (last.0 * scale).round() == (k * scale).round() || k - last.0 < 1.0 / scale => {
                if v < last.1 {
                    *last = (k, v);
                }
            }
            _ => out.push((k, v)),
        }
    }
    out
}

pub fn compute_spectrum(net: &MetricNetwork, cfg: &SpectralConfig) -> Result<Spectrum> {
    cfg.validate()?;
    let strategies = Strategies::resolve(cfg, 2 * net.edge_count())?;
    let est = strategies.estimator.as_ref();
    let grid = scan_with(net, cfg, est)?;
    let starts = candidates(&grid, cfg.cutoff);
    log::debug!("{} candidates from {} grid points", starts.len(), grid.len());

    let floor = 0.5 * grid_step(cfg);
    let refined: Vec<Option<(f64, f64)>> = starts
        .par_iter()
        .map(|&k0| {
            let lo = (k0 - cfg.bracket_halfwidth).max(floor);
            let hi = k0 + cfg.bracket_halfwidth;
            let mut f = |k: f64| inverse_condition(net, k, est);
            let m = strategies.minimizer.minimize(&mut f, lo, hi)?;
            if m.value < cfg.rank_tol && m.x <= cfg.k_max {
                Ok(Some((m.x, m.value)))
            } else {
                if m.value >= cfg.rank_tol {
                    log::warn!(
                        "candidate k0 = {k0}: minimum {} at k = {} is not a root, discarded",
                        m.value,
                        m.x
                    );
                }
                Ok(None)
            }
        })
        .collect::<Result<_>>()?;
    let roots = deduplicate(refined.into_iter().flatten().collect(), cfg.round_precision);

    let lengths: Vec<f64> = net.edges().iter().map(|e| e.length).collect();
    let mut entries: Vec<SpectrumEntry> = roots
        .par_iter()
        .map(|&(k, _)| {
            let t = CouplingMatrix::assemble(net, k)?;
            let null = strategies.nullspace.nullspace(&t, cfg.rank_tol)?;
            if null.is_empty() {
                return Err(Error::Inconsistency(format!("empty nullspace at accepted root k = {k}")));
            }
            let modes = orthonormalize_modes(&lengths, k, null)?;
            Ok(SpectrumEntry {
                k,
                modes: modes.iter().map(|x| to_function(net, k, x)).collect(),
            })
        })
        .collect::<Result<_>>()?;

    let includes_zero_mode = net.is_all_kirchhoff();
    if includes_zero_mode {
        entries.insert(
            0,
            SpectrumEntry {
                k: 0.0,
                modes: vec![zero_mode(net)],
            },
        );
    }
    Ok(Spectrum {
        entries,
        includes_zero_mode,
        k_max: cfg.k_max,
    })
}

/// Number of modes with `k_m <= k`, zero mode included.
pub fn counting_function(spec: &Spectrum, k: f64) -> usize {
    spec.entries.iter().filter(|e| e.k <= k).map(SpectrumEntry::multiplicity).sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeylReport {
    pub k: f64,
    pub counted: usize,
    pub estimate: f64,
    pub lower: f64,
    pub upper: f64,
    pub within_bounds: bool,
}

/// Compares the counting function with `L k / pi` and its bounds
/// `[L k / pi - M, L k / pi + N]`.
pub fn weyl_check(spec: &Spectrum, net: &MetricNetwork, k: f64) -> WeylReport {
    let counted = counting_function(spec, k);
    let estimate = net.total_length() * k / std::f64::consts::PI;
    let lower = estimate - net.edge_count() as f64;
    let upper = estimate + net.node_count() as f64;
    WeylReport {
        k,
        counted,
        estimate,
        lower,
        upper,
        within_bounds: lower <= counted as f64 && counted as f64 <= upper,
    }
}

/// Modes of an explicit wavenumber as network functions, for callers that
/// know `k` in advance (tests, oracles).
pub fn modes_at(net: &MetricNetwork, k: f64, cfg: &SpectralConfig) -> Result<Vec<NetworkFunction>> {
    let strategies = Strategies::resolve(cfg, 2 * net.edge_count())?;
    let t = CouplingMatrix::assemble(net, k)?;
    let lengths: Vec<f64> = net.edges().iter().map(|e| e.length).collect();
    let null = strategies.nullspace.nullspace(&t, cfg.rank_tol)?;
    Ok(orthonormalize_modes(&lengths, k, null)?
        .iter()
        .map(|x| to_function(net, k, x))
        .collect())
}
