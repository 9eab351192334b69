//! The effective boundary model: quantized flux grid, the `O(h²)` spectrum
//! built from the dispersion curves, Weyl-quantized boundary matrices,
//! Bohr–Sommerfeld series, the Weyl count, semiclassical branches and the
//! low-lying ladder.

mod branches;
mod count;
mod lowlying;
mod weyl;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degennes::{band_index, Component, DeGennes, DispersionBranch, RobinParameter, WindowDecomposition};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;

pub use branches::{model_level, trace_branches, BranchCurve, BranchDiagram, Crossing, OscillationTriple};
pub use count::{weyl_count, WeylCount, MIN_SLOPE};
pub use lowlying::{harmonic_crosscheck, lowlying_spectrum, lowlying_window_top, HarmonicReport, LowLying};
pub use weyl::{
    bohr_sommerfeld, embed_hermitian, pdo_matrix, pdo_spectrum, weyl_matrix, BSLevel, BSSeries,
    PdoMatrix, PdoSpectrum, EDGE_MASS_TOL,
};

/// Largest semiclassical parameter accepted.
pub const MAX_H: f64 = 0.25;

/// Spacing of the dispersion tables in `σ`.
pub const TABLE_SPACING: f64 = 0.02;

/// Grid steps added on each side of a window preimage.
pub const ENLARGE_STEPS: f64 = 2.0;

/// Inputs of one semiclassical computation. The window is in units of `h`:
/// the spectrum is sought in `[ha, hb]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiclassicalConfig {
    pub h: f64,
    pub gamma: RobinParameter,
    pub a: f64,
    pub b: f64,
    pub geometry: DomainGeometry,
    /// Replaces the flux `θ = |Ω|/(|∂Ω|h)` of the grid when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub theta: Option<f64>,
}

impl SemiclassicalConfig {
    pub fn new(h: f64, gamma: RobinParameter, a: f64, b: f64, geometry: DomainGeometry) -> Result<Self> {
        if !(h > 0.0 && h <= MAX_H) {
            return Err(Error::InvalidInput(format!("h must lie in (0, {MAX_H}], got {h}")));
        }
        band_index(a, b)?;
        Ok(Self { h, gamma, a, b, geometry, theta: None })
    }

    /// `ħ = h^{1/2}`.
    pub fn hbar(&self) -> f64 {
        self.h.sqrt()
    }

    pub fn with_h(&self, h: f64) -> Result<Self> {
        Self::new(h, self.gamma, self.a, self.b, self.geometry.clone())
    }

    pub fn with_theta(&self, theta: f64) -> Self {
        Self { theta: Some(theta), ..self.clone() }
    }

    pub fn flux_grid_params(&self) -> FluxParams {
        let p = FluxParams::new(self.h, &self.geometry);
        self.theta.map_or(p, |t| p.with_theta(t))
    }
}

/// `σ_ℓ = h^{1/2}(πℓ/L + θ)` without a chosen range of `ℓ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FluxParams {
    pub h: f64,
    pub half_length: f64,
    /// `θ = |Ω|/(|∂Ω| h)`.
    pub theta: f64,
}

impl FluxParams {
    pub fn new(h: f64, g: &DomainGeometry) -> Self {
        Self {
            h,
            half_length: g.half_length,
            theta: g.area / (g.perimeter() * h),
        }
    }

    /// Same grid with a different flux, e.g. `θ + π/L`.
    pub fn with_theta(self, theta: f64) -> Self {
        Self { theta, ..self }
    }

    pub fn step(&self) -> f64 {
        self.h.sqrt() * std::f64::consts::PI / self.half_length
    }

    pub fn sigma(&self, ell: i64) -> f64 {
        self.h.sqrt() * (std::f64::consts::PI * ell as f64 / self.half_length + self.theta)
    }

    /// All `ℓ` with `σ_ℓ ∈ [lo, hi]`.
    pub fn ells_in(&self, lo: f64, hi: f64) -> std::ops::RangeInclusive<i64> {
        let scale = self.half_length / std::f64::consts::PI;
        let first = ((lo / self.h.sqrt() - self.theta) * scale).ceil() as i64;
        let last = ((hi / self.h.sqrt() - self.theta) * scale).floor() as i64;
        first..=last
    }
}

/// The grid points `σ_ℓ` covering a set of `σ` intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FluxGrid {
    pub theta: f64,
    pub step: f64,
    pub ells: Vec<i64>,
    pub sigmas: Vec<f64>,
}

/// Grid points covering the enlarged preimages of the window, with one
/// spare point on each side. Empty when the preimage is empty.
pub fn flux_grid(cfg: &SemiclassicalConfig, decomposition: &WindowDecomposition) -> FluxGrid {
    let p = cfg.flux_grid_params();
    let mut ells: Vec<i64> = Vec::new();
    if let Some((lo, hi)) = decomposition.hull() {
        let pad = (ENLARGE_STEPS + 1.0) * p.step();
        ells = p.ells_in(lo - pad, hi + pad).collect();
    }
    FluxGrid {
        theta: p.theta,
        step: p.step(),
        sigmas: ells.iter().map(|l| p.sigma(*l)).collect(),
        ells,
    }
}

/// How a spectral value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Order {
    /// `hμ_k(σ_ℓ) − h^{3/2}⟨κ⟩C_k(σ_ℓ)`.
    Leading2,
    /// Eigenvalue of a Weyl-quantized boundary matrix, times `h`.
    Matrix,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumEntry {
    pub k: usize,
    /// Component label; `0` for matrix eigenvalues.
    pub q: usize,
    pub ell: i64,
    pub sigma: f64,
    pub lambda: f64,
    pub order: Order,
}

/// A multiset of approximate eigenvalues in `[ha, hb]`, sorted.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EffectiveSpectrum {
    pub h: f64,
    pub window_hull: (f64, f64),
    pub entries: Vec<SpectrumEntry>,
}

impl EffectiveSpectrum {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

/// Dispersion data for one `γ`, tabulated around the preimage of a window
/// and evaluated directly outside the tables.
#[derive(Debug, Clone)]
pub struct BoundaryModel {
    pub degennes: DeGennes,
    pub gamma: RobinParameter,
    pub decomposition: WindowDecomposition,
    /// Table for branch `k` at index `k − 1`.
    tables: Vec<Option<DispersionBranch>>,
}

impl BoundaryModel {
    /// Tables on the preimage of `[a, b]` widened by `pad` on both sides.
    pub fn new(degennes: DeGennes, gamma: RobinParameter, a: f64, b: f64, pad: f64) -> Result<Self> {
        let decomposition = degennes.window_decomposition(gamma, a, b)?;
        let mut tables = Vec::new();
        for k in 1..=decomposition.n {
            let comps: Vec<&Component> = decomposition.components_of(k).collect();
            if comps.is_empty() {
                tables.push(None);
                continue;
            }
            let lo = comps.iter().map(|c| c.lo).fold(f64::INFINITY, f64::min) - pad;
            let hi = comps.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max) + pad;
            let samples = (((hi - lo) / TABLE_SPACING).ceil() as usize + 1).max(DispersionBranch::MIN_SAMPLES);
            tables.push(Some(degennes.dispersion_branch(gamma, k, lo, hi, samples)?));
        }
        Ok(Self {
            degennes,
            gamma,
            decomposition,
            tables,
        })
    }

    /// Tables wide enough for the matrices of `cfg` and of every smaller `h`.
    pub fn for_config(cfg: &SemiclassicalConfig) -> Result<Self> {
        Self::new(DeGennes::default(), cfg.gamma, cfg.a, cfg.b, default_pad(cfg.h, &cfg.geometry))
    }

    pub fn window(&self) -> (f64, f64) {
        (self.decomposition.a, self.decomposition.b)
    }

    /// Decomposition of `[a, b]`, reusing the stored one when it matches.
    pub fn decomposition_for(&self, a: f64, b: f64) -> Result<WindowDecomposition> {
        if (a, b) == self.window() {
            return Ok(self.decomposition.clone());
        }
        self.degennes.window_decomposition(self.gamma, a, b)
    }

    pub fn table(&self, k: usize) -> Option<&DispersionBranch> {
        self.tables.get(k.wrapping_sub(1)).and_then(Option::as_ref)
    }

    /// `(μ_k(σ), C_k(σ))`.
    pub fn mu_c(&self, k: usize, sigma: f64) -> Result<(f64, f64)> {
        match self.table(k) {
            Some(t) if t.contains(sigma) => Ok((t.mu(sigma), t.c(sigma))),
            _ => {
                let m = self.degennes.mode(self.gamma, sigma, k)?;
                Ok((m.mu, m.c))
            }
        }
    }

    /// `(μ_k, C_k)` at many points, in parallel.
    pub fn mu_c_many(&self, k: usize, sigmas: &[f64]) -> Result<Vec<(f64, f64)>> {
        sigmas.par_iter().map(|s| self.mu_c(k, *s)).collect()
    }

    /// `μ_k′(σ)`.
    pub fn dmu(&self, k: usize, sigma: f64) -> Result<f64> {
        match self.table(k) {
            Some(t) if t.contains(sigma) => Ok(t.dmu(sigma)),
            _ => Ok(self.degennes.mode(self.gamma, sigma, k)?.dmu),
        }
    }
}

/// Padding used by [`BoundaryModel::for_config`]: the matrix truncation
/// margin `5ħ^{1/2}` plus a few grid steps.
pub fn default_pad(h: f64, g: &DomainGeometry) -> f64 {
    5.0 * h.powf(0.25) + 4.0 * FluxParams::new(h, g).step() + 0.25
}

/// `f₀ + ħf₁ = μ − ħ⟨κ⟩C`, the two-term symbol on the grid.
pub fn two_term(mu: f64, c: f64, hbar: f64, mean_kappa: f64) -> f64 {
    mu + hbar * (-mean_kappa * c)
}

fn enlarged(c: &Component, step: f64) -> (f64, f64) {
    (c.lo - ENLARGE_STEPS * step, c.hi + ENLARGE_STEPS * step)
}

/// Every grid value `hμ_k(σ_ℓ) − h^{3/2}⟨κ⟩C_k(σ_ℓ)` with `σ_ℓ` in an
/// enlarged component, unfiltered. Each `(k, ℓ)` appears once.
pub fn grid_levels(
    model: &BoundaryModel,
    cfg: &SemiclassicalConfig,
    decomposition: &WindowDecomposition,
) -> Result<Vec<SpectrumEntry>> {
    let p = cfg.flux_grid_params();
    let hbar = cfg.hbar();
    let mean = cfg.geometry.mean_curvature();
    let mut points: BTreeMap<(usize, i64), usize> = BTreeMap::new();
    for c in &decomposition.components {
        let (lo, hi) = enlarged(c, p.step());
        for ell in p.ells_in(lo, hi) {
            points.entry((c.k, ell)).or_insert(c.q);
        }
    }
    // Points in the overlap of two enlargements go to the component that
    // actually contains them, or else the nearer one.
    let label = |k: usize, s: f64, q0: usize| {
        decomposition
            .components_of(k)
            .min_by(|x, y| dist(x, s).total_cmp(&dist(y, s)))
            .map_or(q0, |c| c.q)
    };
    let keys: Vec<(usize, i64, usize)> = points.into_iter().map(|((k, l), q)| (k, l, q)).collect();
    keys.par_iter()
        .map(|&(k, ell, q0)| {
            let sigma = p.sigma(ell);
            let (mu, c) = model.mu_c(k, sigma)?;
            Ok(SpectrumEntry {
                k,
                q: label(k, sigma, q0),
                ell,
                sigma,
                lambda: cfg.h * two_term(mu, c, hbar, mean),
                order: Order::Leading2,
            })
        })
        .collect()
}

fn dist(c: &Component, s: f64) -> f64 {
    if c.contains(s) {
        0.0
    } else {
        (c.lo - s).abs().min((c.hi - s).abs())
    }
}

/// The `O(h²)` spectrum: grid values from every enlarged component of
/// `μ_k^{-1}([a, b])` that land in `[ha, hb]`.
pub fn leading_spectrum(model: &BoundaryModel, cfg: &SemiclassicalConfig) -> Result<EffectiveSpectrum> {
    let dec = model.decomposition_for(cfg.a, cfg.b)?;
    let (ha, hb) = (cfg.h * cfg.a, cfg.h * cfg.b);
    let mut entries: Vec<SpectrumEntry> = grid_levels(model, cfg, &dec)?
        .into_iter()
        .filter(|e| e.lambda >= ha && e.lambda <= hb)
        .collect();
    entries.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
    Ok(EffectiveSpectrum {
        h: cfg.h,
        window_hull: (ha, hb),
        entries,
    })
}

/// Hausdorff distance between two finite sets; `∞` if exactly one is empty.
pub fn hausdorff(x: &[f64], y: &[f64]) -> f64 {
    windowed_hausdorff(x, y, f64::NEG_INFINITY, f64::INFINITY)
}

/// Hausdorff distance seen from the window: points of either set inside
/// `[lo, hi]` are matched against all points of the other set.
pub fn windowed_hausdorff(x: &[f64], y: &[f64], lo: f64, hi: f64) -> f64 {
    let one_sided = |p: &[f64], q: &[f64]| {
        p.iter()
            .filter(|v| (lo..=hi).contains(*v))
            .map(|v| q.iter().map(|w| (v - w).abs()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(x, y).max(one_sided(y, x))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flux_examples() {
        let g = DomainGeometry::disk(1.0).unwrap();
        let p = FluxParams::new(0.1, &g);
        assert!((p.theta - 5.0).abs() < 1e-12);
        assert!((p.sigma(-5)).abs() < 1e-12);
        assert!((p.step() - 0.1f64.sqrt()).abs() < 1e-15);
        let q = FluxParams::new(0.05, &g);
        assert!((q.theta - 2.0 * p.theta).abs() < 1e-12);
        assert!((p.step() / q.step() - 2f64.sqrt()).abs() < 1e-12);
        let r = p.ells_in(0.0, 1.0);
        assert_eq!(*r.start(), -5);
        assert!(p.sigma(*r.end()) <= 1.0 && p.sigma(r.end() + 1) > 1.0);
    }

    #[test]
    fn hausdorff_basics() {
        assert_eq!(hausdorff(&[1.0, 2.0], &[1.0, 2.5]), 0.5);
        assert_eq!(hausdorff(&[], &[]), 0.0);
        assert_eq!(hausdorff(&[1.0], &[]), f64::INFINITY);
        assert_eq!(windowed_hausdorff(&[0.0, 1.0], &[1.1, 5.0], 0.5, 2.0), 0.10000000000000009);
    }

    #[test]
    fn config_validation() {
        let g = DomainGeometry::disk(1.0).unwrap();
        assert!(SemiclassicalConfig::new(0.3, RobinParameter::Robin(0.0), 0.7, 0.9, g.clone()).is_err());
        assert!(SemiclassicalConfig::new(0.1, RobinParameter::Robin(0.0), 0.7, 1.2, g.clone()).is_err());
        assert!(SemiclassicalConfig::new(0.1, RobinParameter::Robin(0.0), 0.7, 0.9, g).is_ok());
    }
}
