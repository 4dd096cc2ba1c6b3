use crate::error::{Error, Result};

/// LU factorization with partial pivoting of a square band matrix, in the
/// column-oriented layout LAPACK's `gbtrf` uses: column `j` keeps rows
/// `j - ku - kl ..= j + kl`, leaving `kl` extra superdiagonals for the
/// fill that row interchanges create.
#[derive(Debug, Clone)]
pub struct BandedLu {
    n: usize,
    kl: usize,
    ku: usize,
    ab: Vec<f64>,
    pivots: Vec<usize>,
    /// Pivots that came out exactly zero and were nudged to keep solves finite.
    pub perturbed_pivots: usize,
}

impl BandedLu {
    fn width(kl: usize, ku: usize) -> usize {
        2 * kl + ku + 1
    }

    #[inline]
    fn at(&self, i: usize, j: usize) -> usize {
        j * Self::width(self.kl, self.ku) + (i + self.ku + self.kl - j)
    }

    /// Factors the matrix given by `(row, col, value)` triplets; duplicate
    /// triplets are summed.
    pub fn factor(n: usize, triplets: &[(usize, usize, f64)]) -> Result<Self> {
        let (mut kl, mut ku) = (0, 0);
        for &(i, j, _) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidParameter(format!("entry ({i}, {j}) outside {n} x {n}")));
            }
            kl = kl.max(i.saturating_sub(j));
            ku = ku.max(j.saturating_sub(i));
        }
        let w = Self::width(kl, ku);
        let mut lu = Self {
            n,
            kl,
            ku,
            ab: vec![0.0; w * n],
            pivots: vec![0; n],
            perturbed_pivots: 0,
        };
        let mut scale: f64 = 0.0;
        for &(i, j, v) in triplets {
            let idx = lu.at(i, j);
            lu.ab[idx] += v;
            scale = scale.max(v.abs());
        }
        lu.eliminate(scale);
        Ok(lu)
    }

    fn eliminate(&mut self, scale: f64) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);
        for j in 0..n {
            let last_row = (j + kl).min(n - 1);
            let mut p = j;
            let mut best = self.ab[self.at(j, j)].abs();
            for i in j + 1..=last_row {
                let v = self.ab[self.at(i, j)].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            self.pivots[j] = p;
            let last_col = (j + ku + kl).min(n - 1);
            if p != j {
                for c in j..=last_col {
                    let (a, b) = (self.at(j, c), self.at(p, c));
                    self.ab.swap(a, b);
                }
            }
            let d = self.at(j, j);
            if self.ab[d] == 0.0 {
                self.ab[d] = tiny;
                self.perturbed_pivots += 1;
            }
            let pivot = self.ab[d];
            for i in j + 1..=last_row {
                let idx = self.at(i, j);
                let l = self.ab[idx] / pivot;
                self.ab[idx] = l;
                if l != 0.0 {
                    for c in j + 1..=last_col {
                        let (src, dst) = (self.at(j, c), self.at(i, c));
                        self.ab[dst] -= l * self.ab[src];
                    }
                }
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn bandwidths(&self) -> (usize, usize) {
        (self.kl, self.ku)
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            b.swap(j, self.pivots[j]);
            let bj = b[j];
            if bj != 0.0 {
                for i in j + 1..=(j + kl).min(n - 1) {
                    b[i] -= self.ab[self.at(i, j)] * bj;
                }
            }
        }
        for j in (0..n).rev() {
            b[j] /= self.ab[self.at(j, j)];
            let bj = b[j];
            for i in j.saturating_sub(kl + ku)..j {
                b[i] -= self.ab[self.at(i, j)] * bj;
            }
        }
    }

    /// Solves `A^T x = b` in place.
    pub fn solve_transpose_in_place(&self, b: &mut [f64]) {
        let (n, kl, ku) = (self.n, self.kl, self.ku);
        for j in 0..n {
            let mut s = b[j];
            for i in j.saturating_sub(kl + ku)..j {
                s -= self.ab[self.at(i, j)] * b[i];
            }
            b[j] = s / self.ab[self.at(j, j)];
        }
        for j in (0..n).rev() {
            let mut s = b[j];
            for i in j + 1..=(j + kl).min(n - 1) {
                s -= self.ab[self.at(i, j)] * b[i];
            }
            b[j] = s;
            b.swap(j, self.pivots[j]);
        }
    }
}
