//! Dense real symmetric eigenproblems via Householder tridiagonalisation.

use serde::{Deserialize, Serialize};

use super::tridiag::{tridiag_eigs_with, EigenSystem, SymTridiag, TridiagOptions};
use crate::error::{Error, Result};

/// Dense real symmetric matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseSym {
    n: usize,
    entries: Vec<f64>,
}

impl DenseSym {
    /// Relative symmetry tolerance accepted by [`DenseSym::new`].
    pub const SYMMETRY_TOL: f64 = 1e-12;

    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if entries.len() != n * n {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                entries.len()
            )));
        }
        if entries.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let scale = entries.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                asym = asym.max((entries[i * n + j] - entries[j * n + i]).abs());
            }
        }
        let tolerance = Self::SYMMETRY_TOL * scale;
        if asym > tolerance {
            return Err(Error::Asymmetric {
                asymmetry: asym,
                tolerance,
            });
        }
        Ok(Self { n, entries })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                entries.push(f(i, j));
            }
        }
        Self::new(n, entries)
    }

    pub fn identity(n: usize) -> Self {
        let mut entries = vec![0.0; n * n];
        for i in 0..n {
            entries[i * n + i] = 1.0;
        }
        Self { n, entries }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    /// Largest |a_ij − a_ji|.
    pub fn asymmetry(&self) -> f64 {
        let n = self.n;
        let mut asym = 0.0f64;
        for i in 0..n {
            for j in i + 1..n {
                asym = asym.max((self.get(i, j) - self.get(j, i)).abs());
            }
        }
        asym
    }

    pub fn norm(&self) -> f64 {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// Householder reduction `A = Q T Qᵀ`. Returns `T` and `Q` (row-major).
    pub fn tridiagonalize(&self) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let n = self.n;
        let mut a = self.entries.clone();
        let mut q = DenseSym::identity(n).entries;
        for k in 0..n.saturating_sub(2) {
            let m = n - k - 1;
            let mut v: Vec<f64> = (0..m).map(|i| a[(k + 1 + i) * n + k]).collect();
            let alpha = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            if alpha == 0.0 {
                continue;
            }
            let sign = if v[0] >= 0.0 { 1.0 } else { -1.0 };
            v[0] += sign * alpha;
            let vnorm2: f64 = v.iter().map(|x| x * x).sum();
            if vnorm2 == 0.0 {
                continue;
            }
            let beta = 2.0 / vnorm2;
            // Two-sided update of the trailing block (rows/cols k+1..n) and
            // of column/row k.
            let mut p = vec![0.0; m];
            for i in 0..m {
                let row = (k + 1 + i) * n;
                p[i] = beta * (0..m).map(|j| a[row + k + 1 + j] * v[j]).sum::<f64>();
            }
            let kappa = 0.5 * beta * p.iter().zip(&v).map(|(x, y)| x * y).sum::<f64>();
            let w: Vec<f64> = p.iter().zip(&v).map(|(pi, vi)| pi - kappa * vi).collect();
            for i in 0..m {
                for j in 0..m {
                    a[(k + 1 + i) * n + k + 1 + j] -= v[i] * w[j] + w[i] * v[j];
                }
            }
            a[(k + 1) * n + k] = -sign * alpha;
            a[k * n + k + 1] = -sign * alpha;
            for i in 1..m {
                a[(k + 1 + i) * n + k] = 0.0;
                a[k * n + k + 1 + i] = 0.0;
            }
            // Q <- Q H
            for r in 0..n {
                let s = beta * (0..m).map(|j| q[r * n + k + 1 + j] * v[j]).sum::<f64>();
                for j in 0..m {
                    q[r * n + k + 1 + j] -= s * v[j];
                }
            }
        }
        let diag = (0..n).map(|i| a[i * n + i]).collect();
        let off = (0..n.saturating_sub(1)).map(|i| a[(i + 1) * n + i]).collect();
        (diag, off, q)
    }
}

/// Full ascending spectrum with orthonormal eigenvectors.
pub fn dense_sym_eigs(m: &DenseSym) -> Result<EigenSystem> {
    let n = m.len();
    match n {
        0 => {
            return Ok(EigenSystem {
                values: vec![],
                vectors: vec![],
            })
        }
        1 => {
            return Ok(EigenSystem {
                values: vec![m.get(0, 0)],
                vectors: vec![vec![1.0]],
            })
        }
        _ => {}
    }
    let (diag, off, q) = m.tridiagonalize();
    let t = SymTridiag::new(diag, off)?;
    let sys = tridiag_eigs_with(&t, 1, n, &TridiagOptions::default())?;
    let vectors = sys
        .vectors
        .iter()
        .map(|y| {
            (0..n)
                .map(|r| (0..n).map(|c| q[r * n + c] * y[c]).sum())
                .collect()
        })
        .collect();
    Ok(EigenSystem {
        values: sys.values,
        vectors,
    })
}

/// Eigenvalues only.
pub fn dense_sym_eigenvalues(m: &DenseSym) -> Result<Vec<f64>> {
    let n = m.len();
    if n < 2 {
        return Ok((0..n).map(|i| m.get(i, i)).collect());
    }
    let (diag, off, _) = m.tridiagonalize();
    SymTridiag::new(diag, off)?.eigenvalues(1, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_spectrum() {
        let sys = dense_sym_eigs(&DenseSym::identity(4)).unwrap();
        assert_eq!(sys.values.len(), 4);
        for v in &sys.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn swap_matrix() {
        let m = DenseSym::new(2, vec![0.0, 1.0, 1.0, 0.0]).unwrap();
        let sys = dense_sym_eigs(&m).unwrap();
        assert!((sys.values[0] + 1.0).abs() < 1e-14);
        assert!((sys.values[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_asymmetric_input() {
        let err = DenseSym::new(2, vec![0.0, 1.0, 1.0 + 1e-6, 0.0]).unwrap_err();
        assert!(matches!(err, Error::Asymmetric { .. }));
        assert!(DenseSym::new(2, vec![0.0; 3]).is_err());
    }
}
