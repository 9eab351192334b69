//! Low-lying eigenvalues from the harmonic approximation at the curvature
//! well, and their comparison with the boundary matrix.

use serde::{Deserialize, Serialize};

use super::{pdo_spectrum, BoundaryModel, SemiclassicalConfig};
use crate::degennes::{DeGennes, RobinParameter};
use crate::error::{Error, Result};
use crate::geometry::{symmetric_extremum, CurvatureExtremum, Direction, DomainGeometry};

/// Distance to the threshold `γ₀^[0]` below which the ladder is refused.
pub const GAMMA0_EXCLUSION: f64 = 1e-4;

/// `λ_j = Θh − (εκ)_max|C₁|h^{3/2} + h^{7/4}(2j−1)/2·√(k₂|C₁|μ₁″)`, each
/// level repeated by the number of congruent wells.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowLying {
    pub h: f64,
    pub gamma: f64,
    /// `ε = sign(γ₀^[0] − γ) = sign C₁(ξ₀)`.
    pub epsilon: f64,
    pub theta: f64,
    pub xi: f64,
    /// `C₁(ξ₀)`.
    pub c1: f64,
    /// `μ₁″(ξ₀)`.
    pub mu2: f64,
    pub well: CurvatureExtremum,
    /// Distinct levels `j = 1..=j_max`.
    pub levels: Vec<f64>,
    /// Levels repeated by multiplicity, ascending.
    pub ladder: Vec<f64>,
}

impl LowLying {
    /// `h^{7/4}√(k₂|C₁|μ₁″)`, the ladder spacing.
    pub fn spacing(&self) -> f64 {
        self.h.powf(1.75) * (self.well.k2 * self.c1.abs() * self.mu2).sqrt()
    }
}

pub fn lowlying_spectrum(
    degennes: &DeGennes,
    h: f64,
    gamma: RobinParameter,
    geometry: &DomainGeometry,
    j_max: usize,
) -> Result<LowLying> {
    let g = match gamma {
        RobinParameter::Robin(g) => g,
        RobinParameter::Dirichlet => {
            return Err(Error::Hypothesis("the low-lying ladder needs a real Robin parameter".into()))
        }
    };
    if j_max == 0 || !(h > 0.0) {
        return Err(Error::InvalidInput(format!("need h > 0 and j_max >= 1, got {h}, {j_max}")));
    }
    let ext = degennes.find_minimum(g, 1)?;
    let sign_factor = 1.0 - g * ext.xi;
    if sign_factor.abs() < 1e-2 {
        let g0 = degennes.find_gamma0(1)?.gamma0;
        if (g - g0).abs() < GAMMA0_EXCLUSION {
            return Err(Error::Hypothesis(format!(
                "gamma = {g} is within {GAMMA0_EXCLUSION} of the threshold {g0}"
            )));
        }
    }
    let epsilon = sign_factor.signum();
    let well = symmetric_extremum(geometry, Direction::from_sign(epsilon))?;
    let c = ext.c.abs();
    let base = ext.theta * h - well.kappa_max * c * h.powf(1.5);
    let omega = h.powf(1.75) * (well.k2 * c * ext.mu2).sqrt();
    let levels: Vec<f64> = (1..=j_max)
        .map(|j| base + omega * (2 * j - 1) as f64 / 2.0)
        .collect();
    let ladder = levels
        .iter()
        .flat_map(|v| std::iter::repeat_n(*v, well.multiplicity))
        .collect();
    Ok(LowLying {
        h,
        gamma: g,
        epsilon,
        theta: ext.theta,
        xi: ext.xi,
        c1: ext.c,
        mu2: ext.mu2,
        well,
        levels,
        ladder,
    })
}

/// Boundary-matrix eigenvalues against the ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HarmonicReport {
    pub h: f64,
    pub j_max: usize,
    pub ladder: Vec<f64>,
    /// Lowest matrix eigenvalues times `h`, as many as the ladder has.
    pub matrix: Vec<f64>,
    pub residuals: Vec<f64>,
    /// `max |residual| / h^{7/4}`.
    pub scaled_max: f64,
}

/// Compares the lowest eigenvalues of `m_1^W` (window `cfg`, whose upper
/// end should sit a few ladder steps above the bottom) with the ladder.
pub fn harmonic_crosscheck(
    model: &BoundaryModel,
    cfg: &SemiclassicalConfig,
    lowlying: &LowLying,
) -> Result<HarmonicReport> {
    let spec = pdo_spectrum(model, cfg, 1)?;
    let matrix: Vec<f64> = spec
        .values
        .iter()
        .take(lowlying.ladder.len())
        .map(|v| v * cfg.h)
        .collect();
    if matrix.len() < lowlying.ladder.len() {
        return Err(Error::Truncation("matrix has fewer eigenvalues than the ladder".into()));
    }
    let residuals: Vec<f64> = matrix
        .iter()
        .zip(&lowlying.ladder)
        .map(|(m, l)| m - l)
        .collect();
    let scaled_max = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs())) / cfg.h.powf(1.75);
    Ok(HarmonicReport {
        h: cfg.h,
        j_max: lowlying.levels.len(),
        ladder: lowlying.ladder.clone(),
        matrix,
        residuals,
        scaled_max,
    })
}

/// Upper end `Θ + ħ·½·|κ|_∞|C₁|` (units of `h`) of the low-lying window.
pub fn lowlying_window_top(lowlying: &LowLying, geometry: &DomainGeometry) -> f64 {
    let kmax = geometry.kappa.iter().fold(0.0f64, |m, k| m.max(k.abs()));
    lowlying.theta + lowlying.h.sqrt() * 0.5 * kmax * lowlying.c1.abs()
}
