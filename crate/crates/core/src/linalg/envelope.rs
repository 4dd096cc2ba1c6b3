use super::ordering::reverse_cuthill_mckee;
use crate::error::{Error, Result};

/// Cholesky factorization of a sparse SPD matrix in envelope (profile)
/// storage after a reverse Cuthill-McKee permutation. Fill stays inside
/// the envelope, so memory is `sum_i (i - first_nonzero(i) + 1)`.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    /// `perm[new] = old`
    perm: Vec<usize>,
    first: Vec<usize>,
    start: Vec<usize>,
    values: Vec<f64>,
}

impl EnvelopeCholesky {
    /// Factors the symmetric matrix whose lower *and* upper entries are given
    /// as triplets (each off-diagonal pair listed in both orientations, or
    /// only one of them; entries are symmetrized by taking the lower one).
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let mut adjacency = vec![Vec::new(); n];
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("entry ({i}, {j}) outside {n} x {n}")));
            }
            if i != j {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
        let perm = reverse_cuthill_mckee(&adjacency);
        let mut inv = vec![0; n];
        for (new, &old) in perm.iter().enumerate() {
            inv[old] = new;
        }
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in triplets {
            let (a, b) = (inv[i], inv[j]);
            let (r, c) = if a >= b { (a, b) } else { (b, a) };
            first[r] = first[r].min(c);
        }
        let mut start = Vec::with_capacity(n + 1);
        let mut total = 0;
        for (i, &f) in first.iter().enumerate() {
            start.push(total);
            total += i - f + 1;
        }
        start.push(total);
        let mut values = vec![0.0; total];
        // Use each unordered pair once: take entries from the lower triangle
        // of the original matrix plus the diagonal.
        let mut has_lower = std::collections::HashSet::new();
        for &(i, j, _) in triplets {
            if i > j {
                has_lower.insert((i, j));
            }
        }
        for &(i, j, v) in triplets {
            if i < j && has_lower.contains(&(j, i)) {
                continue;
            }
            let (a, b) = (inv[i], inv[j]);
            let (r, c) = if a >= b { (a, b) } else { (b, a) };
            values[start[r] + c - first[r]] += v;
        }
        let mut chol = Self {
            perm,
            first,
            start,
            values,
        };
        chol.decompose()?;
        Ok(chol)
    }

    fn decompose(&mut self) -> Result<()> {
        let n = self.first.len();
        for i in 0..n {
            let fi = self.first[i];
            for j in fi..=i {
                let fj = self.first[j];
                let lo = fi.max(fj);
                let mut s = self.values[self.start[i] + j - fi];
                let ri = self.start[i] - fi;
                let rj = self.start[j] - fj;
                for k in lo..j {
                    s -= self.values[ri + k] * self.values[rj + k];
                }
                if j == i {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::NumericalFailure(format!(
                            "matrix is not positive definite (pivot {s:e} at row {i})"
                        )));
                    }
                    self.values[self.start[i] + i - fi] = s.sqrt();
                } else {
                    self.values[self.start[i] + j - fi] = s / self.values[self.start[j + 1] - 1];
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.first.len()
    }

    pub fn envelope_size(&self) -> usize {
        self.values.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.first.len();
        let mut y: Vec<f64> = self.perm.iter().map(|&old| b[old]).collect();
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            let mut s = y[i];
            for (k, l) in (fi..i).zip(row) {
                s -= l * y[k];
            }
            y[i] = s / row[row.len() - 1];
        }
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.values[self.start[i]..self.start[i + 1]];
            y[i] /= row[row.len() - 1];
            let yi = y[i];
            for (k, l) in (fi..i).zip(row) {
                y[k] -= l * yi;
            }
        }
        let mut x = vec![0.0; n];
        for (new, &old) in self.perm.iter().enumerate() {
            x[old] = y[new];
        }
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_graph_laplacian_plus_identity() {
        // cycle of 7 nodes: L + I
        let n = 7;
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.push((i, j, -1.0));
            t.push((j, i, -1.0));
            t.push((i, i, 3.0));
        }
        let chol = EnvelopeCholesky::factor(n, &t).unwrap();
        let b: Vec<f64> = (0..n).map(|i| i as f64 - 2.0).collect();
        let x = chol.solve(&b);
        for i in 0..n {
            let ax = 3.0 * x[i] - x[(i + 1) % n] - x[(i + n - 1) % n];
            assert!((ax - b[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn upper_only_input_is_accepted() {
        let t = [(0, 0, 4.0), (0, 1, 1.0), (1, 1, 3.0)];
        let chol = EnvelopeCholesky::factor(2, &t).unwrap();
        let x = chol.solve(&[1.0, 2.0]);
        assert!((4.0 * x[0] + x[1] - 1.0).abs() < 1e-15);
        assert!((x[0] + 3.0 * x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn indefinite_matrix_is_reported() {
        let t = [(0, 0, 1.0), (0, 1, 2.0), (1, 0, 2.0), (1, 1, 1.0)];
        assert!(matches!(
            EnvelopeCholesky::factor(2, &t),
            Err(Error::NumericalFailure(_))
        ));
    }
}
