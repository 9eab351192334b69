//! Branch minima `Θ^[n−1](γ)`, the identities that hold there, and the
//! threshold `γ₀` where the curvature coupling changes sign.

use std::cell::RefCell;

use serde::{Deserialize, Serialize};

use super::{DeGennes, EigenPair, RobinParameter};
use crate::error::{Error, Result};
use crate::numerics::{brent_root, minimize_1d, second_derivative};

/// Minimum of `σ ↦ μ_n(γ, σ)` with the data attached to it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BranchExtremum {
    pub n: usize,
    pub gamma: f64,
    pub xi: f64,
    pub theta: f64,
    /// `μ_n″(ξ)`.
    pub mu2: f64,
    /// `u(0)²` at `ξ`.
    pub boundary_sq: f64,
    /// `C_n(ξ)` by quadrature.
    pub c: f64,
    /// `|Θ − (ξ² − γ²)|`.
    pub identity_residual: f64,
}

impl BranchExtremum {
    /// Relative residual of `μ″(ξ) = 2ξ u(0)²`.
    pub fn dauge_helffer_residual(&self) -> f64 {
        (self.mu2 - 2.0 * self.xi * self.boundary_sq).abs() / self.mu2.abs()
    }

    /// `(1/3)(1 − γξ) u(0)²`, the closed form of `C_n(ξ)`.
    pub fn c_closed_form(&self) -> f64 {
        (1.0 - self.gamma * self.xi) * self.boundary_sq / 3.0
    }
}

/// First and third moments of `u²` about `ξ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentCheck {
    pub m1: f64,
    pub m3: f64,
    /// `(1/6)(1 + 2γξ) u(0)²`.
    pub m3_expected: f64,
    pub m3_residual: f64,
}

/// The threshold `γ₀` found two ways: as the root of `1 − γξ(γ)` and as
/// the sign change of `γ ↦ C_k(ξ(γ))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gamma0 {
    pub k: usize,
    pub gamma0: f64,
    pub gamma0_from_c: f64,
}

impl Gamma0 {
    pub fn agreement(&self) -> f64 {
        (self.gamma0 - self.gamma0_from_c).abs()
    }
}

/// Runs `f` with a fallible evaluator whose first error is kept aside, so
/// that scalar solvers can drive it.
fn guarded<T>(
    eval: impl Fn(f64) -> Result<f64>,
    f: impl FnOnce(&dyn Fn(f64) -> f64) -> Result<T>,
) -> Result<T> {
    let err: RefCell<Option<Error>> = RefCell::new(None);
    let g = |x: f64| match eval(x) {
        Ok(v) => v,
        Err(e) => {
            err.borrow_mut().get_or_insert(e);
            f64::NAN
        }
    };
    let out = f(&g);
    match err.into_inner() {
        Some(e) => Err(e),
        None => out,
    }
}

impl DeGennes {
    /// Locates `ξ_{n−1}(γ)` and `Θ^[n−1](γ)`, then checks the band
    /// inequalities, `μ″ > 0` and `Θ = ξ² − γ²`.
    pub fn find_minimum(&self, gamma: f64, n: usize) -> Result<BranchExtremum> {
        if !gamma.is_finite() || n == 0 {
            return Err(Error::InvalidInput(format!("find_minimum(gamma = {gamma}, n = {n})")));
        }
        let g = RobinParameter::Robin(gamma);
        let mu = |s: f64| self.mu(g, s, n);
        let dmu = |s: f64| self.observe(g, s, n, EigenPair::dmu_dsigma);

        let mut cap = 1.0f64.max(gamma + 1.0);
        while mu(cap)? <= mu(cap - 1.0)? {
            cap += 1.0;
            if cap > 60.0 {
                return Err(Error::Hypothesis(format!(
                    "branch {n} at gamma = {gamma} keeps decreasing"
                )));
            }
        }
        let (x0, _) = guarded(mu, |f| minimize_1d(f, -2.0, cap, 1e-7))?;
        let xi = guarded(dmu, |f| {
            let mut w = 1e-3;
            loop {
                match brent_root(f, x0 - w, x0 + w, 1e-13) {
                    Err(Error::NoSignChange { .. }) if w < 0.5 => w *= 4.0,
                    other => return other,
                }
            }
        })?;
        let modes = self.modes(g, xi, n)?;
        let m = modes[n - 1];
        let theta = m.mu;
        let mu2 = guarded(mu, |f| Ok(second_derivative(f, xi, 0.05)))?;
        let ext = BranchExtremum {
            n,
            gamma,
            xi,
            theta,
            mu2,
            boundary_sq: m.boundary_sq,
            c: m.c,
            identity_residual: (theta - (xi * xi - gamma * gamma)).abs(),
        };
        let upper = (2 * n - 1) as f64;
        let lower = (2 * n) as f64 - 3.0;
        if theta >= upper || (n >= 2 && theta <= lower) {
            return Err(Error::Hypothesis(format!(
                "Theta^[{}]({gamma}) = {theta} outside ({lower}, {upper})",
                n - 1
            )));
        }
        if mu2 <= 0.0 {
            return Err(Error::Hypothesis(format!(
                "non-positive curvature {mu2} at the minimum of branch {n}"
            )));
        }
        // μ′ = (ξ² − γ² − μ) u(0)², so the identity inherits the error in μ′ divided by u(0)²
        if ext.identity_residual * ext.boundary_sq.min(1.0) > 1e-6 {
            return Err(Error::Hypothesis(format!(
                "Theta = xi^2 - gamma^2 fails by {} on branch {n}",
                ext.identity_residual
            )));
        }
        Ok(ext)
    }

    /// Relative residual of `μ″(ξ) = 2ξ u(0)²` on branch `n`.
    pub fn dauge_helffer_residual(&self, gamma: f64, n: usize) -> Result<f64> {
        Ok(self.find_minimum(gamma, n)?.dauge_helffer_residual())
    }

    /// Moments of `u_n(·; ξ)²` about `ξ`.
    pub fn moment_check(&self, gamma: f64, n: usize) -> Result<MomentCheck> {
        let ext = self.find_minimum(gamma, n)?;
        let g = RobinParameter::Robin(gamma);
        let xi = ext.xi;
        let m1 = self.observe(g, xi, n, |p| p.moment(xi, 1))?;
        let m3 = self.observe(g, xi, n, |p| p.moment(xi, 3))?;
        let m3_expected = (1.0 + 2.0 * gamma * xi) * ext.boundary_sq / 6.0;
        Ok(MomentCheck {
            m1,
            m3,
            m3_expected,
            m3_residual: (m3 - m3_expected).abs(),
        })
    }

    /// Threshold `γ₀` for branch `k`.
    pub fn find_gamma0(&self, k: usize) -> Result<Gamma0> {
        let f = |gamma: f64| -> Result<f64> {
            let ext = self.find_minimum(gamma, k)?;
            Ok(1.0 - gamma * ext.xi)
        };
        let c = |gamma: f64| -> Result<f64> { Ok(self.find_minimum(gamma, k)?.c) };
        // 1 − γξ = 1 at γ = 0 and tends to −∞; C has the same sign pattern.
        let mut hi = 0.5;
        while f(hi)? > 0.0 {
            hi *= 2.0;
            if hi > 64.0 {
                return Err(Error::Hypothesis(format!("no threshold found for branch {k}")));
            }
        }
        let lo = 0.0;
        let gamma0 = guarded(f, |h| brent_root(h, lo, hi, 1e-11))?;
        let gamma0_from_c = guarded(c, |h| brent_root(h, lo, hi, 1e-11))?;
        Ok(Gamma0 {
            k,
            gamma0,
            gamma0_from_c,
        })
    }
}
