//! Small sparse kernels the solvers share: a banded LU with partial
//! pivoting, an envelope Cholesky, reverse Cuthill-McKee ordering and a
//! symmetric tridiagonal factorization.

pub mod banded;
pub mod envelope;
pub mod ordering;
pub mod tridiag;

pub use banded::BandedLu;
pub use envelope::EnvelopeCholesky;
pub use ordering::reverse_cuthill_mckee;
pub use tridiag::SymTridiagonal;

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Neumaier-compensated sum.
pub fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let (mut sum, mut carry) = (0.0f64, 0.0f64);
    for v in values {
        let t = sum + v;
        carry += if sum.abs() >= v.abs() { (sum - t) + v } else { (v - t) + sum };
        sum = t;
    }
    sum + carry
}
