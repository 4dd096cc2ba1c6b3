use nalgebra::DMatrix;

use super::CouplingMatrix;
use crate::error::{Error, Result};
use crate::linalg::{dot, norm, reverse_cuthill_mckee, BandedLu};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SingularValueSummary {
    pub sigma_max: f64,
    pub sigma_min: f64,
}

impl SingularValueSummary {
    pub fn inverse_condition(&self) -> Result<f64> {
        if !(self.sigma_max > 0.0) || !self.sigma_min.is_finite() {
            return Err(Error::DegenerateMatrix(format!(
                "sigma_max = {}, sigma_min = {}",
                self.sigma_max, self.sigma_min
            )));
        }
        Ok((self.sigma_min / self.sigma_max).max(0.0))
    }
}

/// Estimates the extreme singular values of `T(k)`.
pub trait SingularValueEstimator: Send + Sync {
    fn name(&self) -> &'static str;
    fn extremes(&self, t: &CouplingMatrix) -> Result<SingularValueSummary>;
}

#[derive(Debug, Clone, Copy, Default)]
pub struct DenseSvd;

impl SingularValueEstimator for DenseSvd {
    fn name(&self) -> &'static str {
        "dense-svd"
    }

    fn extremes(&self, t: &CouplingMatrix) -> Result<SingularValueSummary> {
        let sv = dense_singular_values(&t.to_dense())?;
        Ok(SingularValueSummary {
            sigma_max: sv.iter().copied().fold(0.0, f64::max),
            sigma_min: sv.iter().copied().fold(f64::INFINITY, f64::min),
        })
    }
}

pub(crate) fn dense_singular_values(m: &DMatrix<f64>) -> Result<Vec<f64>> {
    let sv = m.clone().singular_values();
    if sv.iter().any(|v| !v.is_finite()) {
        return Err(Error::NumericalFailure("SVD produced non-finite singular values".into()));
    }
    Ok(sv.iter().copied().collect())
}

/// `T` with rows and columns reordered for a narrow band, then LU-factored
/// in band form. The ordering runs reverse Cuthill-McKee on the bipartite
/// row/column graph of the nonzeros and reads off rows and columns in the
/// order they appear. Solves take and return vectors in the original
/// numbering.
pub(crate) struct BandedCoupling {
    row_order: Vec<usize>,
    col_order: Vec<usize>,
    lu: BandedLu,
}

impl BandedCoupling {
    pub(crate) fn factor(t: &CouplingMatrix) -> Result<Self> {
        let n = t.dim();
        let mut adjacency = vec![Vec::new(); 2 * n];
        for &(i, j, _) in t.triplets() {
            adjacency[i].push(n + j);
            adjacency[n + j].push(i);
        }
        let order = reverse_cuthill_mckee(&adjacency);
        let row_order: Vec<usize> = order.iter().copied().filter(|&v| v < n).collect();
        let col_order: Vec<usize> = order.iter().filter(|&&v| v >= n).map(|&v| v - n).collect();
        let (mut row_pos, mut col_pos) = (vec![0; n], vec![0; n]);
        for (new, &old) in row_order.iter().enumerate() {
            row_pos[old] = new;
        }
        for (new, &old) in col_order.iter().enumerate() {
            col_pos[old] = new;
        }
        let permuted: Vec<_> = t
            .triplets()
            .iter()
            .map(|&(i, j, v)| (row_pos[i], col_pos[j], v))
            .collect();
        Ok(Self {
            lu: BandedLu::factor(n, &permuted)?,
            row_order,
            col_order,
        })
    }

    /// `T^{-1} b`
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.row_order.iter().map(|&r| b[r]).collect();
        self.lu.solve_in_place(&mut y);
        let mut x = vec![0.0; y.len()];
        for (new, &c) in self.col_order.iter().enumerate() {
            x[c] = y[new];
        }
        x
    }

    /// `T^{-T} b`
    pub(crate) fn solve_transpose(&self, b: &[f64]) -> Vec<f64> {
        let mut y: Vec<f64> = self.col_order.iter().map(|&c| b[c]).collect();
        self.lu.solve_transpose_in_place(&mut y);
        let mut x = vec![0.0; y.len()];
        for (new, &r) in self.row_order.iter().enumerate() {
            x[r] = y[new];
        }
        x
    }

    #[cfg(test)]
    pub(crate) fn bandwidths(&self) -> (usize, usize) {
        self.lu.bandwidths()
    }
}

pub(crate) fn start_vector(n: usize, salt: usize) -> Vec<f64> {
    let v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i * 7 + salt * 13 + 1) as f64 * 0.618_033_988_749_895).fract())
        .collect();
    let s = norm(&v);
    v.into_iter().map(|x| x / s).collect()
}

/// Largest eigenvalue of a symmetric tridiagonal matrix by Sturm bisection.
fn tridiagonal_largest(alpha: &[f64], beta: &[f64]) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (i, &a) in alpha.iter().enumerate() {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 } + beta.get(i).map_or(0.0, |b| b.abs());
        lo = lo.min(a - r);
        hi = hi.max(a + r);
    }
    // number of eigenvalues strictly above x
    let above = |x: f64| {
        let mut count = 0;
        let mut d = 1.0;
        for (i, &a) in alpha.iter().enumerate() {
            let b2 = if i > 0 { beta[i - 1] * beta[i - 1] } else { 0.0 };
            d = a - x - b2 / d;
            if d == 0.0 {
                d = -f64::EPSILON * (x.abs() + 1.0);
            }
            if d > 0.0 {
                count += 1;
            }
        }
        count
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if above(mid) > 0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by plain
/// Lanczos. Without reorthogonalization converged Ritz values get duplicated
/// but the extreme one stays accurate. Stops once it moves by less than
/// `rel_tol` over three steps.
pub(crate) fn lanczos_largest(
    n: usize,
    start: Vec<f64>,
    max_steps: usize,
    rel_tol: f64,
    mut apply: impl FnMut(&[f64]) -> Result<Vec<f64>>,
) -> Result<f64> {
    let mut q = start;
    let mut q_prev = vec![0.0; n];
    let (mut alpha, mut beta) = (Vec::new(), Vec::<f64>::new());
    let mut theta = f64::NAN;
    for j in 0..max_steps.max(1) {
        let mut w = apply(&q)?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NumericalFailure("Lanczos produced non-finite values".into()));
        }
        let b_prev = beta.last().copied().unwrap_or(0.0);
        w.iter_mut().zip(&q_prev).for_each(|(a, p)| *a -= b_prev * p);
        let a = dot(&w, &q);
        w.iter_mut().zip(&q).for_each(|(x, qi)| *x -= a * qi);
        // one local pass keeps the three-term recurrence honest
        let c = dot(&w, &q);
        w.iter_mut().zip(&q).for_each(|(x, qi)| *x -= c * qi);
        alpha.push(a + c);
        let b = norm(&w);
        let exhausted = j + 1 >= max_steps || b <= f64::EPSILON * alpha[j].abs();
        if j % 3 == 2 || exhausted {
            let next = tridiagonal_largest(&alpha, &beta);
            if exhausted || (next - theta).abs() <= rel_tol * next.abs() {
                return Ok(next);
            }
            theta = next;
        }
        beta.push(b);
        q_prev = std::mem::replace(&mut q, w.into_iter().map(|x| x / b).collect());
    }
    Ok(theta)
}

/// Lanczos on `T^T T` for `sigma_max` and on `(T^T T)^{-1}` through a banded
/// LU for `sigma_min`. Ritz values bound the extremes from inside, so
/// `sigma_max` is approached from below and `sigma_min` from above.
/// `sigma_max` only scales the ratio, so it gets a looser tolerance: the top
/// of the spectrum is clustered on lattices and converges slowly.
#[derive(Debug, Clone, Copy)]
pub struct InverseIteration {
    pub rel_tol: f64,
    pub sigma_max_rel_tol: f64,
    pub max_steps: usize,
}

impl Default for InverseIteration {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            sigma_max_rel_tol: 1e-13,
            max_steps: 400,
        }
    }
}

impl InverseIteration {
    pub(crate) fn extremes_max(&self, t: &CouplingMatrix) -> Result<f64> {
        self.sigma_max(t)
    }

    fn sigma_max(&self, t: &CouplingMatrix) -> Result<f64> {
        let lambda = lanczos_largest(t.dim(), start_vector(t.dim(), 0), self.max_steps, self.sigma_max_rel_tol, |x| {
            Ok(t.mul_transpose(&t.mul(x)))
        })?;
        Ok(lambda.max(0.0).sqrt())
    }

    fn sigma_min(&self, t: &CouplingMatrix) -> Result<f64> {
        let lu = BandedCoupling::factor(t)?;
        let lambda = lanczos_largest(t.dim(), start_vector(t.dim(), 1), self.max_steps, self.rel_tol, |x| {
            Ok(lu.solve(&lu.solve_transpose(x)))
        })
        .map_err(|_| Error::NumericalFailure(format!("inverse iteration broke down at k = {}", t.k)))?;
        if !(lambda > 0.0) {
            return Err(Error::NumericalFailure(format!("inverse iteration broke down at k = {}", t.k)));
        }
        Ok(1.0 / lambda.sqrt())
    }
}

impl SingularValueEstimator for InverseIteration {
    fn name(&self) -> &'static str {
        "inverse-iteration"
    }

    fn extremes(&self, t: &CouplingMatrix) -> Result<SingularValueSummary> {
        let sigma_max = self.sigma_max(t)?;
        let sigma_min = self.sigma_min(t)?;
        Ok(SingularValueSummary { sigma_max, sigma_min })
    }
}

/// Residual `||T x|| / ||x||`, handy for checking candidate null vectors.
pub fn relative_residual(t: &CouplingMatrix, x: &[f64]) -> f64 {
    norm(&t.mul(x)) / dot(x, x).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_hexagonal_lattice, build_star};

    #[test]
    fn strategies_agree_away_from_roots() {
        let net = build_hexagonal_lattice(2, 2).unwrap();
        for k in [0.4, 1.7, 3.3] {
            let t = CouplingMatrix::assemble(&net, k).unwrap();
            let d = DenseSvd.extremes(&t).unwrap();
            let i = InverseIteration::default().extremes(&t).unwrap();
            assert!((d.sigma_max - i.sigma_max).abs() < 1e-6 * d.sigma_max, "{d:?} {i:?}");
            assert!((d.sigma_min - i.sigma_min).abs() < 1e-8 * d.sigma_max, "{d:?} {i:?}");
        }
    }

    #[test]
    fn both_see_the_star_root() {
        let net = build_star(3, 1.0).unwrap();
        let t = CouplingMatrix::assemble(&net, std::f64::consts::FRAC_PI_2).unwrap();
        for est in [&DenseSvd as &dyn SingularValueEstimator, &InverseIteration::default()] {
            let s = est.extremes(&t).unwrap();
            assert!(s.inverse_condition().unwrap() < 1e-14, "{}: {s:?}", est.name());
        }
    }

    #[test]
    fn banded_solves_invert_t() {
        let net = build_hexagonal_lattice(1, 2).unwrap();
        let t = CouplingMatrix::assemble(&net, 0.9).unwrap();
        let lu = BandedCoupling::factor(&t).unwrap();
        let b = start_vector(t.dim(), 3);
        let x = lu.solve(&b);
        let r: Vec<f64> = t.mul(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) < 1e-12);
        let y = lu.solve_transpose(&b);
        let r: Vec<f64> = t.mul_transpose(&y).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm(&r) < 1e-12);
    }

    #[test]
    fn lattice_ordering_keeps_the_band_narrow() {
        let net = build_hexagonal_lattice(5, 12).unwrap();
        let t = CouplingMatrix::assemble(&net, 1.1).unwrap();
        let (kl, ku) = BandedCoupling::factor(&t).unwrap().bandwidths();
        assert!(kl + ku < t.dim() / 4, "{kl} {ku} of {}", t.dim());
    }

    #[test]
    fn zero_matrix_is_degenerate() {
        let s = SingularValueSummary {
            sigma_max: 0.0,
            sigma_min: 0.0,
        };
        assert!(matches!(s.inverse_condition(), Err(Error::DegenerateMatrix(_))));
    }
}
