//! Symmetric tridiagonal matrices and their factorizations.

use crate::error::{Error, Result};

/// `A[i][i] = diag[i]`, `A[i][i+1] = A[i+1][i] = off[i]`.
#[derive(Clone, Debug, PartialEq)]
pub struct SymTridiag {
    pub diag: Vec<f64>,
    pub off: Vec<f64>,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Self {
        assert_eq!(off.len() + 1, diag.len().max(1));
        SymTridiag { diag, off }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n {
            let mut v = self.diag[i] * x[i];
            if i > 0 {
                v += self.off[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                v += self.off[i] * x[i + 1];
            }
            y[i] = v;
        }
    }

    /// `a·diag(mass) + b·self`.
    pub fn shifted(&self, a: f64, mass: &[f64], b: f64) -> SymTridiag {
        SymTridiag {
            diag: self.diag.iter().zip(mass).map(|(s, m)| a * m + b * s).collect(),
            off: self.off.iter().map(|o| b * o).collect(),
        }
    }

    /// Thomas elimination without pivoting; the callers' matrices are
    /// symmetric positive definite.
    pub fn factor(&self) -> Result<TriFactor> {
        let n = self.diag.len();
        let mut inv_denom = vec![0.0; n];
        let mut cp = vec![0.0; n.saturating_sub(1)];
        let mut prev_cp = 0.0;
        for i in 0..n {
            let denom = self.diag[i] - if i > 0 { self.off[i - 1] * prev_cp } else { 0.0 };
            if denom.abs() <= 1e-300 || !denom.is_finite() {
                return Err(Error::Solver(format!("zero pivot at row {i}")));
            }
            inv_denom[i] = 1.0 / denom;
            if i + 1 < n {
                prev_cp = self.off[i] * inv_denom[i];
                cp[i] = prev_cp;
            }
        }
        Ok(TriFactor {
            inv_denom,
            cp,
            off: self.off.clone(),
        })
    }

    /// Number of negative eigenvalues (Sylvester inertia of `LDLᵀ`).
    pub fn negative_count(&self) -> usize {
        let mut count = 0;
        let mut prev = 1.0;
        for i in 0..self.diag.len() {
            let mut d = self.diag[i];
            if i > 0 {
                d -= self.off[i - 1] * self.off[i - 1] / prev;
            }
            if d == 0.0 {
                d = 1e-300;
            }
            if d < 0.0 {
                count += 1;
            }
            prev = d;
        }
        count
    }
}

#[derive(Clone, Debug)]
pub struct TriFactor {
    inv_denom: Vec<f64>,
    cp: Vec<f64>,
    off: Vec<f64>,
}

impl TriFactor {
    pub fn len(&self) -> usize {
        self.inv_denom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.inv_denom.is_empty()
    }

    pub fn solve(&self, b: &mut [f64]) {
        let n = self.inv_denom.len();
        debug_assert_eq!(b.len(), n);
        b[0] *= self.inv_denom[0];
        for i in 1..n {
            b[i] = (b[i] - self.off[i - 1] * b[i - 1]) * self.inv_denom[i];
        }
        for i in (0..n - 1).rev() {
            b[i] -= self.cp[i] * b[i + 1];
        }
    }

    /// Solves for every column of a column-major `n × m` block.
    pub fn solve_block(&self, b: &mut [f64]) {
        for col in b.chunks_exact_mut(self.inv_denom.len()) {
            self.solve(col);
        }
    }
}

/// Solves the small dense system `A x = b` (row-major `A`) by Gaussian
/// elimination with partial pivoting.
pub fn solve_dense(mut a: Vec<f64>, mut b: Vec<f64>) -> Result<Vec<f64>> {
    let n = b.len();
    assert_eq!(a.len(), n * n);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&i, &j| a[i * n + col].abs().total_cmp(&a[j * n + col].abs()))
            .unwrap();
        if a[piv * n + col] == 0.0 || !a[piv * n + col].is_finite() {
            return Err(Error::Solver(format!("singular dense system at column {col}")));
        }
        if piv != col {
            for k in 0..n {
                a.swap(piv * n + k, col * n + k);
            }
            b.swap(piv, col);
        }
        for i in col + 1..n {
            let f = a[i * n + col] / a[col * n + col];
            for k in col..n {
                a[i * n + k] -= f * a[col * n + k];
            }
            b[i] -= f * b[col];
        }
    }
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|k| a[i * n + k] * b[k]).sum();
        b[i] = (b[i] - s) / a[i * n + i];
    }
    Ok(b)
}
