//! Smallest eigenvalues of `-Delta`, i.e. of the pencil `(-K, D)`.

use nalgebra::{DMatrix, SymmetricEigen};

use super::solve::{ChainCondensation, LinearSolver};
use super::DiscreteOperator;
use crate::error::{invalid, Error, Result};

pub trait FdEigenSolver: Send + Sync {
    fn name(&self) -> &'static str;
    /// The `count` smallest eigenvalues of `-Delta`, ascending.
    fn eigenvalues(&self, op: &DiscreteOperator, count: usize) -> Result<Vec<f64>>;
}

fn check_count(op: &DiscreteOperator, count: usize) -> Result<()> {
    if count == 0 || count > op.dim() {
        return Err(invalid(format!("asked for {count} eigenvalues of a {}-dimensional operator", op.dim())));
    }
    Ok(())
}

/// `D^{-1/2} (-K) D^{-1/2}` as a dense symmetric matrix.
fn symmetrized(op: &DiscreteOperator) -> DMatrix<f64> {
    let s: Vec<f64> = op.volumes().iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut m = DMatrix::zeros(op.dim(), op.dim());
    for (i, j, v) in op.k_triplets() {
        m[(i, j)] -= v * s[i] * s[j];
    }
    m
}

/// Full dense symmetric eigendecomposition. Fine up to a few thousand
/// unknowns.
#[derive(Debug, Clone, Copy)]
pub struct DenseSymmetric {
    pub max_dim: usize,
}

impl Default for DenseSymmetric {
    fn default() -> Self {
        Self { max_dim: 4000 }
    }
}

impl FdEigenSolver for DenseSymmetric {
    fn name(&self) -> &'static str {
        "dense"
    }

    fn eigenvalues(&self, op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
        check_count(op, count)?;
        if op.dim() > self.max_dim {
            return Err(invalid(format!(
                "dense eigensolver limited to {} unknowns, operator has {}",
                self.max_dim,
                op.dim()
            )));
        }
        let eig = SymmetricEigen::try_new(symmetrized(op), f64::EPSILON, 0)
            .ok_or_else(|| Error::NumericalFailure("symmetric eigensolver did not converge".into()))?;
        let mut values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        values.sort_by(f64::total_cmp);
        values.truncate(count);
        Ok(values)
    }
}

/// Subspace iteration with `(sigma D - K)^{-1} D`, `sigma > 0`, and a
/// Rayleigh-Ritz step on the pencil each sweep.
#[derive(Debug, Clone, Copy)]
pub struct ShiftInvertSubspace {
    pub shift: f64,
    pub rel_tol: f64,
    pub max_sweeps: usize,
}

impl Default for ShiftInvertSubspace {
    fn default() -> Self {
        Self {
            shift: 1.0,
            rel_tol: 1e-10,
            max_sweeps: 1000,
        }
    }
}

fn d_orthonormalize(op: &DiscreteOperator, block: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for mut v in block.drain(..) {
        for _ in 0..2 {
            for q in &kept {
                let c = op.inner(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let s = op.inner(&v, &v).sqrt();
        if s > 0.0 && s.is_finite() {
            v.iter_mut().for_each(|a| *a /= s);
            kept.push(v);
        }
    }
    *block = kept;
}

impl FdEigenSolver for ShiftInvertSubspace {
    fn name(&self) -> &'static str {
        "shift-invert"
    }

    fn eigenvalues(&self, op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
        check_count(op, count)?;
        let n = op.dim();
        let width = (count + count.min(10) + 2).min(n);
        let system = ChainCondensation.factor(op, self.shift, 1.0)?;
        let mut block: Vec<Vec<f64>> = (0..width)
            .map(|s| (0..n).map(|i| (((i + 1) * (s + 1)) as f64 * 0.754_877_666).sin() + 0.1).collect())
            .collect();
        d_orthonormalize(op, &mut block);
        let mut previous: Option<Vec<f64>> = None;
        for _ in 0..self.max_sweeps {
            for v in block.iter_mut() {
                let dv: Vec<f64> = v.iter().zip(op.volumes()).map(|(a, d)| a * d).collect();
                *v = system.solve(&dv)?;
            }
            d_orthonormalize(op, &mut block);
            let w = block.len();
            // Rayleigh-Ritz: the block is D-orthonormal, so the projected pencil is standard
            let kv: Vec<Vec<f64>> = block.iter().map(|v| op.apply_k(v)).collect();
            let small = DMatrix::from_fn(w, w, |i, j| -crate::linalg::dot(&block[i], &kv[j]));
            let small = 0.5 * (&small + small.transpose());
            let eig = SymmetricEigen::try_new(small, f64::EPSILON, 0)
                .ok_or_else(|| Error::NumericalFailure("Ritz eigensolver did not converge".into()))?;
            let mut order: Vec<usize> = (0..w).collect();
            order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
            let rotated: Vec<Vec<f64>> = order
                .iter()
                .map(|&c| {
                    let mut v = vec![0.0; n];
                    for (r, q) in block.iter().enumerate() {
                        let coef = eig.eigenvectors[(r, c)];
                        v.iter_mut().zip(q).for_each(|(a, b)| *a += coef * b);
                    }
                    v
                })
                .collect();
            block = rotated;
            let values: Vec<f64> = order.iter().map(|&c| eig.eigenvalues[c]).take(count).collect();
            if let Some(prev) = &previous {
                let scale = values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
                let converged = values
                    .iter()
                    .zip(prev)
                    .all(|(a, b)| (a - b).abs() <= self.rel_tol * a.abs().max(1e-3 * scale));
                if converged {
                    return Ok(values);
                }
            }
            previous = Some(values);
        }
        Err(Error::NumericalFailure(format!(
            "subspace iteration did not converge in {} sweeps",
            self.max_sweeps
        )))
    }
}

/// Smallest `count` eigenvalues of `-Delta` with the dense solver when it
/// fits, otherwise shift-invert subspace iteration.
pub fn fd_eigenvalues(op: &DiscreteOperator, count: usize) -> Result<Vec<f64>> {
    let dense = DenseSymmetric::default();
    if op.dim() <= dense.max_dim {
        dense.eigenvalues(op, count)
    } else {
        ShiftInvertSubspace::default().eigenvalues(op, count)
    }
}
