//! Symmetric tridiagonal eigenproblems: Sturm-sequence bisection for the
//! eigenvalues, inverse iteration for the eigenvectors.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Real symmetric tridiagonal matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SymTridiag {
    diag: Vec<f64>,
    offdiag: Vec<f64>,
    /// Squared off-diagonal, cached for the Sturm counts.
    e2: Vec<f64>,
    pivmin: f64,
}

impl SymTridiag {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        let n = diag.len();
        if n < 2 {
            return Err(Error::InvalidInput(format!(
                "tridiagonal matrix needs N >= 2, got {n}"
            )));
        }
        if offdiag.len() != n - 1 {
            return Err(Error::InvalidInput(format!(
                "off-diagonal has length {}, expected {}",
                offdiag.len(),
                n - 1
            )));
        }
        if diag.iter().chain(offdiag.iter()).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("non-finite matrix entry".into()));
        }
        let e2: Vec<f64> = offdiag.iter().map(|e| e * e).collect();
        let pivmin = f64::MIN_POSITIVE * e2.iter().copied().fold(1.0, f64::max);
        Ok(Self {
            diag,
            offdiag,
            e2,
            pivmin,
        })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }

    pub fn trace(&self) -> f64 {
        self.diag.iter().sum()
    }

    /// Infinity norm (max absolute row sum).
    pub fn norm(&self) -> f64 {
        let n = self.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
                let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiag[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiag[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        (lo, hi)
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        let mut y = vec![0.0; n];
        for i in 0..n {
            let mut acc = self.diag[i] * x[i];
            if i > 0 {
                acc += self.offdiag[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                acc += self.offdiag[i] * x[i + 1];
            }
            y[i] = acc;
        }
        y
    }

    fn pivmin(&self) -> f64 {
        self.pivmin
    }

    /// Number of eigenvalues strictly below `x` (negative LDLᵀ pivots).
    pub fn count_below(&self, x: f64) -> usize {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for (d, e2) in self.diag[1..].iter().zip(&self.e2) {
            q = d - x - e2 / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// Count below `x` together with the Newton step `det/det′` for the
    /// characteristic polynomial, from the same pivot recursion.
    fn count_and_newton(&self, x: f64) -> (usize, f64) {
        let pivmin = self.pivmin();
        let mut count = 0;
        let mut q = self.diag[0] - x;
        let mut dq = -1.0;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        let mut logd = dq / q;
        if q < 0.0 {
            count += 1;
        }
        for (d, &e2) in self.diag[1..].iter().zip(&self.e2) {
            let qn = d - x - e2 / q;
            dq = -1.0 + e2 * dq / (q * q);
            q = if qn.abs() < pivmin { -pivmin } else { qn };
            logd += dq / q;
            if q < 0.0 {
                count += 1;
            }
        }
        let step = if logd.is_finite() && logd != 0.0 { 1.0 / logd } else { f64::NAN };
        (count, step)
    }

    /// The `k`-th eigenvalue (1-based, ascending) inside `[lo, hi]`:
    /// bisection until the eigenvalue is isolated, then Newton steps on
    /// the characteristic polynomial while they keep shrinking, then
    /// bisection again on a small bracket around the Newton iterate.
    fn bisect(&self, k: usize, mut lo: f64, mut hi: f64) -> f64 {
        let mut c_lo = self.count_below(lo);
        let mut c_hi = self.count_below(hi);
        let mut x = f64::NAN;
        let mut prev_step = f64::INFINITY;
        let mut newton = true;
        for _ in 0..400 {
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs());
            if hi - lo <= tol {
                break;
            }
            let isolated = c_lo + 1 == k && c_hi == k;
            if !(newton && isolated && x > lo && x < hi) {
                x = 0.5 * (lo + hi);
                if x <= lo || x >= hi {
                    break;
                }
            }
            let (c, step) = self.count_and_newton(x);
            if c >= k {
                hi = x;
                c_hi = c;
            } else {
                lo = x;
                c_lo = c;
            }
            if !(newton && isolated && step.is_finite()) {
                x = f64::NAN;
                continue;
            }
            if step.abs() > 0.5 * prev_step.abs() {
                // Newton is at its rounding floor; trap the root near x,
                // which usually takes a single pair of counts.
                newton = false;
                let mut w = 4.0 * step.abs().max(tol);
                let (a, b) = (x - w, x + w);
                if a > lo && b < hi && self.count_below(a) < k && self.count_below(b) >= k {
                    return x;
                }
                while hi - lo > 2.0 * w {
                    for p in [x - w, x + w] {
                        if p <= lo || p >= hi {
                            continue;
                        }
                        let cp = self.count_below(p);
                        if cp >= k {
                            hi = p;
                            c_hi = cp;
                        } else {
                            lo = p;
                            c_lo = cp;
                        }
                    }
                    w *= 4.0;
                }
                x = f64::NAN;
                continue;
            }
            prev_step = step;
            x -= step;
        }
        0.5 * (lo + hi)
    }

    /// Eigenvalues `k_lo..=k_hi` (1-based, ascending) without eigenvectors.
    pub fn eigenvalues(&self, k_lo: usize, k_hi: usize) -> Result<Vec<f64>> {
        self.check_range(k_lo, k_hi)?;
        let (g_lo, g_hi) = self.gershgorin();
        let pad = 1e-12 * (g_hi - g_lo).abs().max(1.0);
        let (g_lo, g_hi) = (g_lo - pad, g_hi + pad);
        let mut out = Vec::with_capacity(k_hi - k_lo + 1);
        let mut floor = g_lo;
        for k in k_lo..=k_hi {
            // A cheap upper bound beats starting from the Gershgorin edge,
            // which sits far above the low end of a stiff spectrum.
            let mut reach = 1.0f64.max(floor.abs());
            let mut top = g_hi;
            while floor + reach < g_hi {
                if self.count_below(floor + reach) >= k {
                    top = floor + reach;
                    break;
                }
                reach *= 4.0;
            }
            // clusters resolve to within an ulp in either order
            let lam = self.bisect(k, floor, top).max(out.last().copied().unwrap_or(f64::NEG_INFINITY));
            out.push(lam);
            // The next eigenvalue cannot lie below this one; keep a hair of
            // slack so rounding in the count cannot strand the bracket.
            floor = lam - 4.0 * f64::EPSILON * lam.abs().max(1.0);
        }
        Ok(out)
    }

    /// Eigenvalues lying in `[lo, hi)`.
    pub fn eigenvalues_in(&self, lo: f64, hi: f64) -> Vec<f64> {
        let k_lo = self.count_below(lo) + 1;
        let k_hi = self.count_below(hi);
        if k_hi < k_lo {
            return Vec::new();
        }
        self.eigenvalues(k_lo, k_hi).unwrap_or_default()
    }

    fn check_range(&self, k_lo: usize, k_hi: usize) -> Result<()> {
        if k_lo < 1 || k_lo > k_hi || k_hi > self.len() {
            return Err(Error::InvalidInput(format!(
                "eigenvalue range {k_lo}..={k_hi} outside 1..={}",
                self.len()
            )));
        }
        Ok(())
    }
}

/// Eigenvalues with their unit-norm eigenvectors.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenSystem {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<f64>>,
}

/// Knobs for [`tridiag_eigs_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TridiagOptions {
    /// Eigenvalues closer than `cluster_gap * ‖M‖` are treated as one
    /// cluster and their vectors re-orthogonalised against each other.
    pub cluster_gap: f64,
    /// Accepted residual ‖Mv − λv‖ relative to ‖M‖.
    pub residual_tol: f64,
    /// Fresh random starts allowed per eigenvalue.
    pub max_restarts: usize,
    /// Seed for the starting vectors.
    pub seed: u64,
}

impl Default for TridiagOptions {
    fn default() -> Self {
        Self {
            cluster_gap: 1e-3,
            residual_tol: 1e-10,
            max_restarts: 3,
            seed: 0x5eed,
        }
    }
}

/// Eigenpairs `k_lo..=k_hi` (1-based, ascending) with default options.
pub fn tridiag_eigs(m: &SymTridiag, k_lo: usize, k_hi: usize) -> Result<EigenSystem> {
    tridiag_eigs_with(m, k_lo, k_hi, &TridiagOptions::default())
}

pub fn tridiag_eigs_with(
    m: &SymTridiag,
    k_lo: usize,
    k_hi: usize,
    opts: &TridiagOptions,
) -> Result<EigenSystem> {
    let values = m.eigenvalues(k_lo, k_hi)?;
    let vectors = eigenvectors_for(m, &values, k_lo, opts)?;
    Ok(EigenSystem { values, vectors })
}

/// Inverse iteration for already computed (ascending) eigenvalues.
/// `first_index` is the 1-based index of `values[0]`, used for error
/// reporting and for seeding.
pub fn eigenvectors_for(
    m: &SymTridiag,
    values: &[f64],
    first_index: usize,
    opts: &TridiagOptions,
) -> Result<Vec<Vec<f64>>> {
    let n = m.len();
    let norm = m.norm().max(f64::MIN_POSITIVE);
    let mut vectors: Vec<Vec<f64>> = Vec::with_capacity(values.len());
    let mut cluster_start = 0;
    let mut prev_shift = f64::NEG_INFINITY;

    for (j, &lam) in values.iter().enumerate() {
        let index = first_index + j;
        if j > 0 && lam - values[j - 1] > opts.cluster_gap * norm {
            cluster_start = j;
        }
        // Nudge coincident shifts apart so each solve sees a distinct matrix.
        let pertol = 10.0 * f64::EPSILON * lam.abs().max(1e-3 * norm);
        let shift = if j > cluster_start && lam - prev_shift < pertol {
            prev_shift + pertol
        } else {
            lam
        };
        prev_shift = shift;

        let lu = ShiftedLu::factor(m, shift, norm);
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (index as u64).wrapping_mul(0x9e37));
        let mut accepted = None;

        'restart: for _ in 0..=opts.max_restarts {
            let mut x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            normalize(&mut x);
            for iter in 0..6 {
                let mut y = lu.solve(&x);
                for v in &vectors[cluster_start..j] {
                    let d = dot(&y, v);
                    axpy(-d, v, &mut y);
                }
                let ny = norm2(&y);
                if !ny.is_finite() || ny == 0.0 {
                    continue 'restart;
                }
                y.iter_mut().for_each(|v| *v /= ny);
                x = y;
                if iter >= 1 {
                    let mx = m.matvec(&x);
                    let res = mx
                        .iter()
                        .zip(&x)
                        .map(|(a, b)| (a - lam * b).powi(2))
                        .sum::<f64>()
                        .sqrt();
                    if res <= opts.residual_tol * norm {
                        accepted = Some(x.clone());
                        break 'restart;
                    }
                }
            }
        }
        match accepted {
            Some(v) => vectors.push(v),
            None => return Err(Error::InverseIteration { index }),
        }
    }
    Ok(vectors)
}

/// LU factorisation with partial pivoting of `M - shift·I`
/// (the LAPACK `gttrf` layout).
struct ShiftedLu {
    d: Vec<f64>,
    dl: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(m: &SymTridiag, shift: f64, norm: f64) -> Self {
        let n = m.len();
        let tiny = f64::EPSILON * norm;
        let mut d: Vec<f64> = m.diag.iter().map(|v| v - shift).collect();
        let mut dl = m.offdiag.clone();
        let mut du = m.offdiag.clone();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n - 1];
        for i in 0..n - 1 {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if d[n - 1] == 0.0 {
            d[n - 1] = tiny;
        }
        Self {
            d,
            dl,
            du,
            du2,
            swapped,
        }
    }

    fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        let mut b = rhs.to_vec();
        for i in 0..n - 1 {
            if self.swapped[i] {
                let t = b[i];
                b[i] = b[i + 1];
                b[i + 1] = t - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
        b
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn normalize(x: &mut [f64]) {
    let n = norm2(x);
    x.iter_mut().for_each(|v| *v /= n);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplacian(n: usize) -> SymTridiag {
        SymTridiag::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap()
    }

    #[test]
    fn discrete_laplacian_closed_form() {
        let sys = tridiag_eigs(&laplacian(3), 1, 3).unwrap();
        let s2 = 2f64.sqrt();
        let expected = [2.0 - s2, 2.0, 2.0 + s2];
        for (got, want) in sys.values.iter().zip(expected) {
            assert!((got - want).abs() < 1e-14, "{got} vs {want}");
        }
    }

    #[test]
    fn diagonal_double_eigenvalue() {
        let m = SymTridiag::new(vec![5.0, 5.0], vec![0.0]).unwrap();
        let sys = tridiag_eigs(&m, 1, 2).unwrap();
        assert!(sys.values.iter().all(|v| (v - 5.0).abs() < 1e-14));
        let overlap = dot(&sys.vectors[0], &sys.vectors[1]);
        assert!(overlap.abs() < 1e-12);
    }

    #[test]
    fn large_laplacian_matches_cosine_formula() {
        let n = 500;
        let sys = tridiag_eigs(&laplacian(n), 1, 5).unwrap();
        for (k, lam) in sys.values.iter().enumerate() {
            let theta = (k + 1) as f64 * std::f64::consts::PI / (n as f64 + 1.0);
            let exact = 2.0 - 2.0 * theta.cos();
            assert!((lam - exact).abs() < 1e-12, "k={k}: {lam} vs {exact}");
        }
    }

    #[test]
    fn rejects_bad_shapes_and_ranges() {
        assert!(SymTridiag::new(vec![1.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiag::new(vec![1.0, f64::NAN], vec![0.0]).is_err());
        let m = laplacian(4);
        assert!(tridiag_eigs(&m, 0, 2).is_err());
        assert!(tridiag_eigs(&m, 3, 2).is_err());
        assert!(tridiag_eigs(&m, 1, 5).is_err());
    }

    #[test]
    fn count_below_brackets_eigenvalues() {
        let m = laplacian(10);
        let vals = m.eigenvalues(1, 10).unwrap();
        for (k, v) in vals.iter().enumerate() {
            assert_eq!(m.count_below(v - 1e-9), k);
            assert_eq!(m.count_below(v + 1e-9), k + 1);
        }
        assert_eq!(m.eigenvalues_in(vals[2] - 1e-9, vals[5] - 1e-9).len(), 3);
    }
}
