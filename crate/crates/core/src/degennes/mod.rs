//! The de Gennes operator `−d²/dt² + (t−σ)²` on the half-line with the
//! Robin condition `u′(0) = γ u(0)` (or Dirichlet, `γ = +∞`).
//!
//! The operator is discretised by second-order finite differences on a
//! vertex-centred grid `t_i = iδ`, with the Robin condition folded into the
//! first row through a ghost node. The resulting generalised problem has
//! mass matrix `diag(1/2, 1, 1, …)` (trapezoid weights); rescaling the first
//! unknown by `√2` makes it a standard symmetric tridiagonal eigenproblem.
//!
//! [`DeGennes`] layers Richardson extrapolation over the grids `δ` and `δ/2`
//! on top of the raw discretisation, which brings scalar observables
//! (eigenvalues, boundary values, moments, `C_k`) to fourth order.

mod branch;
mod extremum;
mod window;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{
    richardson,
    tridiag::{eigenvectors_for, SymTridiag, TridiagOptions},
};

pub use branch::{DispersionBranch, Monotonicity};
pub use extremum::{BranchExtremum, MomentCheck};
pub use window::{band_index, Component, Shape, WindowDecomposition, THRESHOLD_GAP};

/// Robin parameter `γ`, or the Dirichlet condition (`γ = +∞`).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum RobinParameter {
    Robin(f64),
    #[serde(with = "dirichlet_tag")]
    Dirichlet,
}

mod dirichlet_tag {
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str("dirichlet")
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<(), D::Error> {
        let s = String::deserialize(d)?;
        if s.eq_ignore_ascii_case("dirichlet") {
            Ok(())
        } else {
            Err(D::Error::custom(format!("expected \"dirichlet\", got {s:?}")))
        }
    }
}

impl RobinParameter {
    pub fn is_dirichlet(&self) -> bool {
        matches!(self, Self::Dirichlet)
    }

    /// The real value, or `None` for Dirichlet.
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Robin(g) => Some(*g),
            Self::Dirichlet => None,
        }
    }

    pub fn real(&self) -> Result<f64> {
        self.value().ok_or_else(|| {
            Error::InvalidInput("operation requires a real Robin parameter, got Dirichlet".into())
        })
    }
}

impl fmt::Display for RobinParameter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Robin(g) => write!(f, "{g}"),
            Self::Dirichlet => f.write_str("dirichlet"),
        }
    }
}

impl FromStr for RobinParameter {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        match t.to_ascii_lowercase().as_str() {
            "dirichlet" | "inf" | "+inf" | "infinity" => Ok(Self::Dirichlet),
            _ => {
                let g: f64 = t
                    .parse()
                    .map_err(|_| Error::InvalidInput(format!("invalid Robin parameter {s:?}")))?;
                if !g.is_finite() {
                    return Err(Error::InvalidInput(format!("invalid Robin parameter {s:?}")));
                }
                Ok(Self::Robin(g))
            }
        }
    }
}

impl From<f64> for RobinParameter {
    fn from(g: f64) -> Self {
        Self::Robin(g)
    }
}

/// Uniform grid on `[0, T]` with `N` intervals; Dirichlet cap at `t = T`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HalfLineGrid {
    pub truncation: f64,
    pub points: usize,
}

impl HalfLineGrid {
    pub const MIN_POINTS: usize = 1000;

    pub fn new(truncation: f64, points: usize) -> Result<Self> {
        if !(truncation.is_finite() && truncation > 0.0) {
            return Err(Error::InvalidInput(format!("bad truncation {truncation}")));
        }
        if points < Self::MIN_POINTS {
            return Err(Error::InvalidInput(format!(
                "half-line grid needs at least {} points, got {points}",
                Self::MIN_POINTS
            )));
        }
        Ok(Self { truncation, points })
    }

    pub fn spacing(&self) -> f64 {
        self.truncation / self.points as f64
    }

    pub fn refined(&self) -> Self {
        Self {
            truncation: self.truncation,
            points: 2 * self.points,
        }
    }

    fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }
}

/// One discrete eigenpair of `H[γ, σ]`.
///
/// `u` holds the eigenfunction at the nodes `t_0 = 0, …, t_N = T`
/// (with `u_N = 0`), normalised for the trapezoid rule. The sign is fixed
/// by `u(0) > 0`, or `u′(0) > 0` in the Dirichlet case.
#[derive(Debug, Clone, PartialEq)]
pub struct EigenPair {
    pub n: usize,
    pub mu: f64,
    pub u: Vec<f64>,
    pub gamma: RobinParameter,
    pub sigma: f64,
    pub grid: HalfLineGrid,
}

impl EigenPair {
    fn weight(&self, i: usize) -> f64 {
        let d = self.grid.spacing();
        if i == 0 || i == self.u.len() - 1 {
            0.5 * d
        } else {
            d
        }
    }

    pub fn node(&self, i: usize) -> f64 {
        self.grid.node(i)
    }

    /// `∫ w(t) u(t)² dt` with the trapezoid weights the discretisation is
    /// built on.
    pub fn integrate_density(&self, w: impl Fn(f64) -> f64) -> f64 {
        self.u
            .iter()
            .enumerate()
            .map(|(i, u)| self.weight(i) * w(self.node(i)) * u * u)
            .sum()
    }

    /// `∫ (t − c)^p u² dt`.
    pub fn moment(&self, center: f64, power: i32) -> f64 {
        self.integrate_density(|t| (t - center).powi(power))
    }

    pub fn boundary_value(&self) -> f64 {
        self.u[0]
    }

    /// `u′(0)` by a second-order one-sided difference.
    pub fn boundary_slope(&self) -> f64 {
        let d = self.grid.spacing();
        (-3.0 * self.u[0] + 4.0 * self.u[1] - self.u[2]) / (2.0 * d)
    }

    /// `∂μ/∂σ` from the Hellmann–Feynman identity, exact for the discrete
    /// problem: `−2 ∫ (t − σ) u² dt`.
    pub fn dmu_dsigma(&self) -> f64 {
        -2.0 * self.moment(self.sigma, 1)
    }

    /// The curvature coupling
    /// `C(σ) = ∫ [(τ−σ)τ² − 2τ(σ−τ)²] u² dτ + u(0)²/2`.
    pub fn curvature_coefficient(&self) -> f64 {
        let s = self.sigma;
        let bulk = self.integrate_density(|t| (t - s) * t * t - 2.0 * t * (s - t) * (s - t));
        let boundary = match self.gamma {
            RobinParameter::Robin(_) => 0.5 * self.u[0] * self.u[0],
            RobinParameter::Dirichlet => 0.0,
        };
        bulk + boundary
    }
}

/// Finite-difference eigenpairs `1..=n_max` of `H[γ, σ]` on `grid`.
pub fn solve(
    gamma: RobinParameter,
    sigma: f64,
    n_max: usize,
    grid: &HalfLineGrid,
) -> Result<Vec<EigenPair>> {
    let (matrix, _) = assemble(gamma, sigma, n_max, grid)?;
    let values = matrix.eigenvalues(1, n_max)?;
    let vectors = eigenvectors_for(&matrix, &values, 1, &TridiagOptions::default())?;
    let d = grid.spacing();
    let scale = 1.0 / d.sqrt();
    let pairs = values
        .into_iter()
        .zip(vectors)
        .enumerate()
        .map(|(j, (mu, w))| {
            let mut u = Vec::with_capacity(grid.points + 1);
            match gamma {
                RobinParameter::Robin(_) => {
                    u.push(w[0] * std::f64::consts::SQRT_2 * scale);
                    u.extend(w[1..].iter().map(|v| v * scale));
                }
                RobinParameter::Dirichlet => {
                    u.push(0.0);
                    u.extend(w.iter().map(|v| v * scale));
                }
            }
            u.push(0.0);
            let lead = if gamma.is_dirichlet() { u[1] } else { u[0] };
            if lead < 0.0 {
                u.iter_mut().for_each(|v| *v = -*v);
            }
            EigenPair {
                n: j + 1,
                mu,
                u,
                gamma,
                sigma,
                grid: *grid,
            }
        })
        .collect();
    Ok(pairs)
}

/// Eigenvalues only (no inverse iteration).
pub fn solve_values(
    gamma: RobinParameter,
    sigma: f64,
    n_max: usize,
    grid: &HalfLineGrid,
) -> Result<Vec<f64>> {
    let (matrix, _) = assemble(gamma, sigma, n_max, grid)?;
    matrix.eigenvalues(1, n_max)
}

fn assemble(
    gamma: RobinParameter,
    sigma: f64,
    n_max: usize,
    grid: &HalfLineGrid,
) -> Result<(SymTridiag, f64)> {
    if !sigma.is_finite() {
        return Err(Error::InvalidInput(format!("non-finite sigma {sigma}")));
    }
    if n_max == 0 || n_max > grid.points / 10 {
        return Err(Error::InvalidInput(format!(
            "n_max = {n_max} exceeds the resolution of a {}-point grid",
            grid.points
        )));
    }
    let d = grid.spacing();
    let inv = 1.0 / (d * d);
    let pot = |i: usize| {
        let t = grid.node(i) - sigma;
        t * t
    };
    let n = grid.points;
    let (diag, off) = match gamma {
        RobinParameter::Robin(g) => {
            // unknowns u_0..u_{N-1}
            let mut diag: Vec<f64> = (0..n).map(|i| 2.0 * inv + pot(i)).collect();
            diag[0] += 2.0 * g / d;
            let mut off = vec![-inv; n - 1];
            off[0] = -std::f64::consts::SQRT_2 * inv;
            (diag, off)
        }
        RobinParameter::Dirichlet => {
            // unknowns u_1..u_{N-1}
            let diag = (1..n).map(|i| 2.0 * inv + pot(i)).collect();
            (diag, vec![-inv; n - 2])
        }
    };
    Ok((SymTridiag::new(diag, off)?, d))
}

/// Scalar observables of one mode, Richardson-refined when enabled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeSample {
    pub n: usize,
    pub sigma: f64,
    pub mu: f64,
    /// `∂μ/∂σ`.
    pub dmu: f64,
    /// `u(0)²`, or `u′(0)²` under Dirichlet.
    pub boundary_sq: f64,
    /// `C_n(σ)`.
    pub c: f64,
}

/// Configuration of the refined half-line solver.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeGennesConfig {
    /// Coarse grid spacing `δ`.
    pub spacing: f64,
    /// Minimum truncation length.
    pub min_truncation: f64,
    /// Distance kept between `σ` and the truncation point.
    pub decay_margin: f64,
    /// Combine grids `δ` and `δ/2` by Richardson extrapolation.
    pub richardson: bool,
}

impl Default for DeGennesConfig {
    fn default() -> Self {
        Self {
            spacing: 20.0 / 8000.0,
            min_truncation: 20.0,
            decay_margin: 12.0,
            richardson: true,
        }
    }
}

/// Refined evaluator for dispersion data.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DeGennes {
    pub config: DeGennesConfig,
}

impl DeGennes {
    pub fn new(config: DeGennesConfig) -> Self {
        Self { config }
    }

    /// The coarse grid used at `σ`: `T = max(T_min, σ + margin)`, rounded
    /// up to a whole number of cells so that `δ` never changes.
    pub fn grid_for(&self, sigma: f64) -> HalfLineGrid {
        let c = &self.config;
        let t = c.min_truncation.max(sigma + c.decay_margin);
        let points = (t / c.spacing).ceil() as usize;
        HalfLineGrid {
            truncation: points as f64 * c.spacing,
            points,
        }
    }

    /// Raw eigenpairs on the coarse grid and, if refining, on the fine one.
    pub fn pairs(
        &self,
        gamma: RobinParameter,
        sigma: f64,
        n_max: usize,
    ) -> Result<(Vec<EigenPair>, Option<Vec<EigenPair>>)> {
        let grid = self.grid_for(sigma);
        let coarse = solve(gamma, sigma, n_max, &grid)?;
        let fine = if self.config.richardson {
            Some(solve(gamma, sigma, n_max, &grid.refined())?)
        } else {
            None
        };
        Ok((coarse, fine))
    }

    /// Refined scalar functional of the `n`-th eigenpair.
    pub fn observe(
        &self,
        gamma: RobinParameter,
        sigma: f64,
        n: usize,
        f: impl Fn(&EigenPair) -> f64,
    ) -> Result<f64> {
        let (coarse, fine) = self.pairs(gamma, sigma, n)?;
        Ok(combine(&coarse[n - 1], fine.as_ref().map(|v| &v[n - 1]), &f))
    }

    /// Refined `μ_n(γ, σ)`.
    pub fn mu(&self, gamma: RobinParameter, sigma: f64, n: usize) -> Result<f64> {
        Ok(self.mus(gamma, sigma, n)?[n - 1])
    }

    /// Refined `μ_1..μ_{n_max}` (eigenvalues only, fast path).
    pub fn mus(&self, gamma: RobinParameter, sigma: f64, n_max: usize) -> Result<Vec<f64>> {
        let grid = self.grid_for(sigma);
        let coarse = solve_values(gamma, sigma, n_max, &grid)?;
        if !self.config.richardson {
            return Ok(coarse);
        }
        let fine = solve_values(gamma, sigma, n_max, &grid.refined())?;
        Ok(coarse
            .iter()
            .zip(&fine)
            .map(|(c, f)| richardson(*c, *f, 2))
            .collect())
    }

    /// Refined observables of modes `1..=n_max` at `σ`.
    pub fn modes(&self, gamma: RobinParameter, sigma: f64, n_max: usize) -> Result<Vec<ModeSample>> {
        let (coarse, fine) = self.pairs(gamma, sigma, n_max)?;
        Ok((0..n_max)
            .map(|j| {
                let c = &coarse[j];
                let f = fine.as_ref().map(|v| &v[j]);
                let bsq = |p: &EigenPair| match p.gamma {
                    RobinParameter::Robin(_) => p.boundary_value().powi(2),
                    RobinParameter::Dirichlet => p.boundary_slope().powi(2),
                };
                ModeSample {
                    n: j + 1,
                    sigma,
                    mu: combine(c, f, |p| p.mu),
                    dmu: combine(c, f, EigenPair::dmu_dsigma),
                    boundary_sq: combine(c, f, bsq),
                    c: combine(c, f, EigenPair::curvature_coefficient),
                }
            })
            .collect())
    }

    pub fn mode(&self, gamma: RobinParameter, sigma: f64, n: usize) -> Result<ModeSample> {
        Ok(self.modes(gamma, sigma, n)?[n - 1])
    }

    /// Refined `C_n(σ)`.
    pub fn compute_c(&self, gamma: RobinParameter, sigma: f64, n: usize) -> Result<f64> {
        self.observe(gamma, sigma, n, EigenPair::curvature_coefficient)
    }
}

fn combine(coarse: &EigenPair, fine: Option<&EigenPair>, f: impl Fn(&EigenPair) -> f64) -> f64 {
    match fine {
        Some(p) => richardson(f(coarse), f(p), 2),
        None => f(coarse),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> HalfLineGrid {
        HalfLineGrid::new(20.0, 8000).unwrap()
    }

    #[test]
    fn parses_robin_parameters() {
        assert_eq!("dirichlet".parse::<RobinParameter>().unwrap(), RobinParameter::Dirichlet);
        assert_eq!("-1".parse::<RobinParameter>().unwrap(), RobinParameter::Robin(-1.0));
        assert!("abc".parse::<RobinParameter>().is_err());
        assert!("nan".parse::<RobinParameter>().is_err());
        let json = serde_json::to_string(&RobinParameter::Dirichlet).unwrap();
        assert_eq!(json, "\"dirichlet\"");
        let back: RobinParameter = serde_json::from_str(&json).unwrap();
        assert_eq!(back, RobinParameter::Dirichlet);
        let back: RobinParameter = serde_json::from_str("0.5").unwrap();
        assert_eq!(back, RobinParameter::Robin(0.5));
    }

    #[test]
    fn rejects_bad_requests() {
        let g = grid();
        assert!(solve(RobinParameter::Robin(0.0), f64::NAN, 2, &g).is_err());
        assert!(solve(RobinParameter::Robin(0.0), 0.0, 801, &g).is_err());
        assert!(HalfLineGrid::new(20.0, 999).is_err());
    }

    #[test]
    fn eigenfunctions_are_normalised_and_signed() {
        let pairs = solve(RobinParameter::Robin(0.3), 1.0, 3, &grid()).unwrap();
        for p in &pairs {
            assert!((p.integrate_density(|_| 1.0) - 1.0).abs() < 1e-10);
            assert!(p.boundary_value() > 0.0);
        }
        let d = solve(RobinParameter::Dirichlet, 1.0, 2, &grid()).unwrap();
        assert_eq!(d[0].u[0], 0.0);
        assert!(d[0].boundary_slope() > 0.0);
    }

    #[test]
    fn hellmann_feynman_matches_difference_quotient() {
        let g = grid();
        let gamma = RobinParameter::Robin(-0.5);
        let p = &solve(gamma, 0.4, 1, &g).unwrap()[0];
        let h = 1e-4;
        let up = solve_values(gamma, 0.4 + h, 1, &g).unwrap()[0];
        let dn = solve_values(gamma, 0.4 - h, 1, &g).unwrap()[0];
        assert!((p.dmu_dsigma() - (up - dn) / (2.0 * h)).abs() < 1e-6);
    }

    #[test]
    fn grid_keeps_spacing() {
        let model = DeGennes::default();
        let g1 = model.grid_for(0.0);
        let g2 = model.grid_for(15.0);
        assert_eq!(g1.points, 8000);
        assert!((g1.spacing() - g2.spacing()).abs() < 1e-15);
        assert!(g2.truncation >= 27.0);
    }
}
