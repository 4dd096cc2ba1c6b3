/// LDL^T factorization of an SPD tridiagonal matrix with constant diagonal
/// `diag` and constant off-diagonal `off`, as produced by a uniform edge grid.
#[derive(Debug, Clone)]
pub struct SymTridiagonal {
    off: f64,
    pivots: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(n: usize, diag: f64, off: f64) -> Self {
        let mut pivots = Vec::with_capacity(n);
        let mut prev = f64::NAN;
        for i in 0..n {
            let p = if i == 0 { diag } else { diag - off * off / prev };
            pivots.push(p);
            prev = p;
        }
        Self { off, pivots }
    }

    pub fn len(&self) -> usize {
        self.pivots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pivots.is_empty()
    }

    pub fn is_positive_definite(&self) -> bool {
        self.pivots.iter().all(|&p| p > 0.0 && p.is_finite())
    }

    /// Overwrites `b` with the solution.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.pivots.len();
        debug_assert_eq!(b.len(), n);
        for i in 1..n {
            b[i] -= self.off / self.pivots[i - 1] * b[i - 1];
        }
        b[n - 1] /= self.pivots[n - 1];
        for i in (0..n - 1).rev() {
            b[i] = (b[i] - self.off * b[i + 1]) / self.pivots[i];
        }
    }

    /// `(A^{-1})_{11}` and `(A^{-1})_{n1}`; by persymmetry `(A^{-1})_{nn}`
    /// equals the first.
    pub fn inverse_corners(&self) -> (f64, f64) {
        let n = self.pivots.len();
        let mut e = vec![0.0; n];
        e[0] = 1.0;
        self.solve_in_place(&mut e);
        (e[0], e[n - 1])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_discrete_dirichlet_problem() {
        // tridiag(-1, 2, -1) x = h^2 * 2 has solution x = x(1-x) on a grid
        let n = 9;
        let h = 1.0 / (n + 1) as f64;
        let t = SymTridiagonal::new(n, 2.0, -1.0);
        let mut b = vec![2.0 * h * h; n];
        t.solve_in_place(&mut b);
        for (i, v) in b.iter().enumerate() {
            let x = (i + 1) as f64 * h;
            assert!((v - x * (1.0 - x)).abs() < 1e-14);
        }
        let (c11, cn1) = t.inverse_corners();
        // (A^{-1})_{ij} = i (n+1-j) / (n+1) for i <= j
        assert!((c11 - n as f64 / (n + 1) as f64).abs() < 1e-14);
        assert!((cn1 - 1.0 / (n + 1) as f64).abs() < 1e-14);
    }
}
