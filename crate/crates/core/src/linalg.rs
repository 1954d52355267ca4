//! Dense LU with partial pivoting for the small class-level systems.

/// LU factorization `PA = LU` of a square matrix, stored packed.
#[derive(Debug, Clone)]
pub(crate) struct Lu {
    n: usize,
    lu: Vec<f64>,
    perm: Vec<usize>,
    sign: f64,
    /// Largest absolute entry of the input, for relative pivot thresholds.
    scale: f64,
}

pub(crate) const SINGULAR_RTOL: f64 = 1e-14;

impl Lu {
    /// Factor a row-major n x n matrix. Never fails; singularity is
    /// interrogated afterwards via [`Lu::is_singular`].
    pub fn factor(a: &[f64], n: usize) -> Lu {
        debug_assert_eq!(a.len(), n * n);
        let mut lu = a.to_vec();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for col in 0..n {
            let mut piv = col;
            let mut best = lu[col * n + col].abs();
            for row in col + 1..n {
                let v = lu[row * n + col].abs();
                if v > best {
                    best = v;
                    piv = row;
                }
            }
            if piv != col {
                for j in 0..n {
                    lu.swap(col * n + j, piv * n + j);
                }
                perm.swap(col, piv);
                sign = -sign;
            }
            let d = lu[col * n + col];
            if d == 0.0 {
                continue;
            }
            for row in col + 1..n {
                let f = lu[row * n + col] / d;
                lu[row * n + col] = f;
                for j in col + 1..n {
                    lu[row * n + j] -= f * lu[col * n + j];
                }
            }
        }
        Lu {
            n,
            lu,
            perm,
            sign,
            scale,
        }
    }

    pub fn det(&self) -> f64 {
        let mut d = self.sign;
        for i in 0..self.n {
            d *= self.lu[i * self.n + i];
        }
        if self.n == 0 {
            1.0
        } else {
            d
        }
    }

    pub fn is_singular(&self) -> bool {
        (0..self.n).any(|i| self.lu[i * self.n + i].abs() < SINGULAR_RTOL * self.scale)
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 1..n {
            for j in 0..i {
                x[i] -= self.lu[i * n + j] * x[j];
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                x[i] -= self.lu[i * n + j] * x[j];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }

    /// Row `i` of the inverse matrix.
    pub fn inverse_rows(&self) -> Vec<Vec<f64>> {
        let n = self.n;
        let mut rows = vec![vec![0.0; n]; n];
        for j in 0..n {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            let col = self.solve(&e);
            for i in 0..n {
                rows[i][j] = col[i];
            }
        }
        rows
    }
}
