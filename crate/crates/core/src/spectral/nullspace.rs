use nalgebra::DMatrix;

use crate::coupling::svd::{start_vector, BandedCoupling, InverseIteration};
use crate::coupling::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm};

/// Extracts an orthonormal basis (Euclidean, in coefficient space) of the
/// numerical nullspace of `T(k)`: directions whose singular value is below
/// `rank_tol * sigma_max`.
pub trait NullspaceMethod: Send + Sync {
    fn name(&self) -> &'static str;
    fn nullspace(&self, t: &CouplingMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>>;
}

fn columns(m: &DMatrix<f64>, which: impl Iterator<Item = usize>) -> Vec<Vec<f64>> {
    which.map(|j| m.column(j).iter().copied().collect()).collect()
}

#[derive(Debug, Clone, Copy, Default)]
pub struct SvdNullspace;

impl NullspaceMethod for SvdNullspace {
    fn name(&self) -> &'static str {
        "svd"
    }

    fn nullspace(&self, t: &CouplingMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
        let svd = t.to_dense().svd(false, true);
        let v_t = svd
            .v_t
            .ok_or_else(|| Error::NumericalFailure("SVD did not return right vectors".into()))?;
        let sv = &svd.singular_values;
        if sv.iter().any(|s| !s.is_finite()) {
            return Err(Error::NumericalFailure("SVD produced non-finite singular values".into()));
        }
        let cutoff = rank_tol * sv.max();
        let v = v_t.transpose();
        Ok(columns(&v, (0..sv.len()).filter(|&i| sv[i] < cutoff)))
    }
}

/// Column-pivoted QR of `T^T`: the trailing columns of `Q` past the
/// numerical rank span the nullspace of `T`.
#[derive(Debug, Clone, Copy, Default)]
pub struct PivotedQr;

impl NullspaceMethod for PivotedQr {
    fn name(&self) -> &'static str {
        "qr"
    }

    fn nullspace(&self, t: &CouplingMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
        let n = t.dim();
        let qr = t.to_dense().transpose().col_piv_qr();
        let r = qr.r();
        let r00 = r[(0, 0)].abs();
        if !r00.is_finite() {
            return Err(Error::NumericalFailure("QR produced non-finite entries".into()));
        }
        let rank = (0..n).take_while(|&i| r[(i, i)].abs() >= rank_tol * r00).count();
        Ok(columns(&qr.q(), rank..n))
    }
}

/// Block inverse iteration on `T^T T` through a banded LU, followed by an
/// SVD of `T X` on the block. The block doubles until it holds at least one
/// direction outside the nullspace, so any multiplicity is found.
#[derive(Debug, Clone, Copy)]
pub struct BlockInverseIteration {
    pub initial_block: usize,
    pub sweeps: usize,
}

impl Default for BlockInverseIteration {
    fn default() -> Self {
        Self {
            initial_block: 4,
            sweeps: 4,
        }
    }
}

/// Gram-Schmidt with reorthogonalization. Vectors that lose more than
/// eight digits to the ones before them are dependent and get dropped.
fn orthonormalize(block: &mut Vec<Vec<f64>>) {
    let mut kept: Vec<Vec<f64>> = Vec::with_capacity(block.len());
    for mut v in block.drain(..) {
        let before = norm(&v);
        for _ in 0..2 {
            for q in &kept {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(a, b)| *a -= c * b);
            }
        }
        let s = norm(&v);
        if s > 1e-8 * before && s.is_finite() {
            v.iter_mut().for_each(|a| *a /= s);
            kept.push(v);
        }
    }
    *block = kept;
}

fn fresh_vector(n: usize, salt: usize) -> Vec<f64> {
    let mut v = start_vector(n, salt);
    for (i, x) in v.iter_mut().enumerate() {
        *x *= 1.0 + ((i * (salt + 3)) as f64).sin();
    }
    v
}

/// Tops the block back up to `size` orthonormal vectors. Inverse
/// iteration at an exact root collapses every vector onto the nullspace;
/// the dropped ones are replaced so the block keeps its rank.
fn refill(block: &mut Vec<Vec<f64>>, size: usize, n: usize, salt: &mut usize) {
    let mut attempts = 0;
    while block.len() < size && attempts < 4 * size + 8 {
        block.push(fresh_vector(n, *salt));
        *salt += 1;
        attempts += 1;
        orthonormalize(block);
    }
}

impl NullspaceMethod for BlockInverseIteration {
    fn name(&self) -> &'static str {
        "inverse-iteration"
    }

    fn nullspace(&self, t: &CouplingMatrix, rank_tol: f64) -> Result<Vec<Vec<f64>>> {
        let n = t.dim();
        let sigma_max = InverseIteration::default().extremes_max(t)?;
        let lu = BandedCoupling::factor(t)?;
        let mut size = self.initial_block.clamp(1, n);
        let mut salt = 2;
        loop {
            let mut block = Vec::with_capacity(size);
            refill(&mut block, size, n, &mut salt);
            for _ in 0..self.sweeps {
                for v in block.iter_mut() {
                    *v = lu.solve_transpose(v);
                }
                orthonormalize(&mut block);
                refill(&mut block, size, n, &mut salt);
                for v in block.iter_mut() {
                    *v = lu.solve(v);
                }
                orthonormalize(&mut block);
                refill(&mut block, size, n, &mut salt);
            }
            let b = block.len();
            let x = DMatrix::from_fn(n, b, |i, j| block[j][i]);
            let products: Vec<Vec<f64>> = block.iter().map(|v| t.mul(v)).collect();
            let tx = DMatrix::from_fn(n, b, |i, j| products[j][i]);
            let svd = tx.svd(false, true);
            let v_t = svd
                .v_t
                .ok_or_else(|| Error::NumericalFailure("SVD did not return right vectors".into()))?;
            let null: Vec<usize> = (0..b)
                .filter(|&i| svd.singular_values[i] < rank_tol * sigma_max)
                .collect();
            if null.len() < b || size >= n {
                let ritz = x * v_t.transpose();
                let mut basis = columns(&ritz, null.into_iter());
                orthonormalize(&mut basis);
                return Ok(basis);
            }
            size = (2 * size).min(n);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_hexagonal_lattice, build_star};
    use std::f64::consts::PI;

    fn methods() -> Vec<Box<dyn NullspaceMethod>> {
        vec![
            Box::new(SvdNullspace),
            Box::new(PivotedQr),
            Box::new(BlockInverseIteration::default()),
        ]
    }

    fn check(t: &CouplingMatrix, expected_dim: usize) {
        for m in methods() {
            let basis = m.nullspace(t, 1e-8).unwrap();
            assert_eq!(basis.len(), expected_dim, "{}", m.name());
            for (i, v) in basis.iter().enumerate() {
                assert!(norm(&t.mul(v)) < 1e-12, "{}", m.name());
                for w in &basis[..i] {
                    assert!(dot(v, w).abs() < 1e-12);
                }
                assert!((norm(v) - 1.0).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn star_multiplicities() {
        let net = build_star(3, 1.0).unwrap();
        check(&CouplingMatrix::assemble(&net, PI / 2.0).unwrap(), 2);
        check(&CouplingMatrix::assemble(&net, PI).unwrap(), 1);
        check(&CouplingMatrix::assemble(&net, 1.0).unwrap(), 0);
    }

    #[test]
    fn hexagon_eigenspace_at_two_pi_is_large() {
        // independent cycles + 1 = M - N + 2 on a bipartite network with unit edges
        let net = build_hexagonal_lattice(2, 2).unwrap();
        let expected = net.edge_count() - net.node_count() + 2;
        check(&CouplingMatrix::assemble(&net, 2.0 * PI).unwrap(), expected);
    }
}
