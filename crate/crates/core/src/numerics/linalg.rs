use crate::error::{QmError, Result};

/// LU factorization `P A = L U` with scaled partial pivoting.
///
/// Pivots are chosen by magnitude relative to the largest entry of their
/// original row, which keeps badly scaled systems (entries spanning many
/// orders of magnitude, as happens for large constants) well behaved.
#[derive(Debug, Clone)]
pub struct LuDecomposition {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    original: Vec<f64>,
}

impl LuDecomposition {
    pub fn new(a: &[Vec<f64>]) -> Result<Self> {
        let n = a.len();
        if n == 0 {
            return Err(QmError::param("empty matrix"));
        }
        if a.iter().any(|row| row.len() != n) {
            return Err(QmError::param("matrix is not square"));
        }
        if a.iter().flatten().any(|v| !v.is_finite()) {
            return Err(QmError::param("matrix has non-finite entries"));
        }
        let mut lu: Vec<f64> = a.iter().flatten().copied().collect();
        let original = lu.clone();
        let scale: Vec<f64> = a
            .iter()
            .map(|row| row.iter().fold(0.0_f64, |m, v| m.max(v.abs())))
            .collect();
        if scale.iter().any(|&s| s == 0.0) {
            return Err(QmError::SingularMatrix);
        }
        let mut perm: Vec<usize> = (0..n).collect();
        for col in 0..n {
            let mut best = col;
            let mut best_rel = -1.0;
            for r in col..n {
                let rel = lu[r * n + col].abs() / scale[perm[r]];
                if rel > best_rel {
                    best_rel = rel;
                    best = r;
                }
            }
            if best_rel < 1e-14 {
                return Err(QmError::SingularMatrix);
            }
            if best != col {
                for c in 0..n {
                    lu.swap(best * n + c, col * n + c);
                }
                perm.swap(best, col);
            }
            let pivot = lu[col * n + col];
            for r in col + 1..n {
                let m = lu[r * n + col] / pivot;
                lu[r * n + col] = m;
                if m != 0.0 {
                    for c in col + 1..n {
                        lu[r * n + c] -= m * lu[col * n + c];
                    }
                }
            }
        }
        Ok(LuDecomposition { n, lu, perm, original })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    fn substitute(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut y: Vec<f64> = self.perm.iter().map(|&i| b[i]).collect();
        for r in 0..n {
            let mut s = y[r];
            for c in 0..r {
                s -= self.lu[r * n + c] * y[c];
            }
            y[r] = s;
        }
        for r in (0..n).rev() {
            let mut s = y[r];
            for c in r + 1..n {
                s -= self.lu[r * n + c] * y[c];
            }
            y[r] = s / self.lu[r * n + r];
        }
        y
    }

    /// Solves `A x = b`, with one step of iterative refinement.
    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(QmError::param(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = self.substitute(b);
        let resid: Vec<f64> = (0..n)
            .map(|r| {
                let ax: f64 = (0..n).map(|c| self.original[r * n + c] * x[c]).sum();
                b[r] - ax
            })
            .collect();
        let dx = self.substitute(&resid);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(QmError::SingularMatrix);
        }
        Ok(x)
    }
}

impl LuDecomposition {
    fn substitute_transpose(&self, b: &[f64]) -> Vec<f64> {
        // Aᵀ = Uᵀ Lᵀ P: solve Uᵀ z = b, then Lᵀ w = z, then x = Pᵀ w.
        let n = self.n;
        let mut z = b.to_vec();
        for r in 0..n {
            let mut s = z[r];
            for c in 0..r {
                s -= self.lu[c * n + r] * z[c];
            }
            z[r] = s / self.lu[r * n + r];
        }
        for r in (0..n).rev() {
            let mut s = z[r];
            for c in r + 1..n {
                s -= self.lu[c * n + r] * z[c];
            }
            z[r] = s;
        }
        let mut x = vec![0.0; n];
        for (i, &pi) in self.perm.iter().enumerate() {
            x[pi] = z[i];
        }
        x
    }

    /// Solves `Aᵀ x = b`, with one step of iterative refinement.
    pub fn solve_transpose(&self, b: &[f64]) -> Result<Vec<f64>> {
        if b.len() != self.n {
            return Err(QmError::param(format!(
                "right-hand side has length {}, expected {}",
                b.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut x = self.substitute_transpose(b);
        let resid: Vec<f64> = (0..n)
            .map(|c| {
                let atx: f64 = (0..n).map(|r| self.original[r * n + c] * x[r]).sum();
                b[c] - atx
            })
            .collect();
        let dx = self.substitute_transpose(&resid);
        for (xi, di) in x.iter_mut().zip(dx) {
            *xi += di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(QmError::SingularMatrix);
        }
        Ok(x)
    }
}

/// Solves the square system `A x = b`; `a` is given row by row.
pub fn solve_dense_linear(a: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>> {
    LuDecomposition::new(a)?.solve(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn residual(a: &[Vec<f64>], x: &[f64], b: &[f64]) -> f64 {
        a.iter()
            .zip(b)
            .map(|(row, bi)| (row.iter().zip(x).map(|(r, v)| r * v).sum::<f64>() - bi).abs())
            .fold(0.0, f64::max)
    }

    #[test]
    fn identity() {
        let a = vec![vec![1.0, 0.0, 0.0], vec![0.0, 1.0, 0.0], vec![0.0, 0.0, 1.0]];
        assert_eq!(solve_dense_linear(&a, &[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn singular_rows() {
        let a = vec![vec![1.0, 2.0, 3.0], vec![1.0, 2.0, 3.0], vec![0.0, 1.0, 5.0]];
        assert_eq!(solve_dense_linear(&a, &[1.0, 1.0, 1.0]), Err(QmError::SingularMatrix));
    }

    #[test]
    fn needs_pivoting() {
        let a = vec![vec![0.0, 1.0], vec![1.0, 1.0]];
        let x = solve_dense_linear(&a, &[2.0, 3.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn triple_system_closed_form() {
        // The transposed three-function system L z = (1,1,1), where
        // L[r][c] = L_c, divided by Q_c on the diagonal.
        let q = [2.0_f64, 2.0, 2.0];
        let s: Vec<f64> = q.iter().map(|v| v / (v - 1.0)).collect();
        let big_l: Vec<f64> = (0..3).map(|i| s[(i + 1) % 3] + s[(i + 2) % 3] - 1.0).collect();
        let p = 2.0 * q[0] * q[1] * q[2] - q[0] * q[1] - q[1] * q[2] - q[2] * q[0] + 1.0;
        let l: Vec<Vec<f64>> = (0..3)
            .map(|r| (0..3).map(|c| if r == c { big_l[c] / q[c] } else { big_l[c] }).collect())
            .collect();
        let z = solve_dense_linear(&l, &[1.0, 1.0, 1.0]).unwrap();
        for i in 0..3 {
            let (j, k) = ((i + 1) % 3, (i + 2) % 3);
            let closed = q[i] * (q[j] - 1.0) * (q[k] - 1.0) / (big_l[i] * p);
            assert!((z[i] - closed).abs() <= 1e-14 * closed.abs(), "{} vs {closed}", z[i]);
        }
    }

    #[test]
    fn random_well_conditioned_12x12() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..50 {
            let n = 12;
            let mut a = vec![vec![0.0; n]; n];
            for (i, row) in a.iter_mut().enumerate() {
                for v in row.iter_mut() {
                    *v = rng.gen_range(-1.0..1.0);
                }
                row[i] += n as f64;
            }
            let b: Vec<f64> = (0..n).map(|_| rng.gen_range(-10.0..10.0)).collect();
            let x = solve_dense_linear(&a, &b).unwrap();
            let bmax = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            assert!(residual(&a, &x, &b) <= 1e-10 * (1.0 + bmax));
        }
    }

    #[test]
    fn transpose_solve() {
        let a = vec![vec![2.0, 1.0, 0.0], vec![0.0, 3.0, 1.0], vec![4.0, 0.0, 5.0]];
        let lu = LuDecomposition::new(&a).unwrap();
        let b = [1.0, -2.0, 0.5];
        let x = lu.solve_transpose(&b).unwrap();
        for c in 0..3 {
            let atx: f64 = (0..3).map(|r| a[r][c] * x[r]).sum();
            assert!((atx - b[c]).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_square() {
        let a = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(matches!(solve_dense_linear(&a, &[1.0, 2.0]), Err(QmError::InvalidParam(_))));
    }
}
