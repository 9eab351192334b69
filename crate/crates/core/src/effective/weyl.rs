//! Weyl-quantized boundary matrices in the Floquet–Fourier basis and the
//! Bohr–Sommerfeld series on monotone components.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{enlarged, two_term, BoundaryModel, SemiclassicalConfig};
use crate::degennes::{Component, Shape};
use crate::error::{Error, Result};
use crate::numerics::{dense_sym_eigs, DenseSym};

/// Hermitian matrix `H_{ij} = f(σ_i)δ_{ij} − ħ ĝ_{i−j} c((σ_i + σ_j)/2)` on
/// consecutive grid points, returned as real and imaginary parts
/// (row-major). This is the Weyl quantization of `f(σ) − ħ g(s)c(σ)`.
pub fn weyl_matrix(
    sigmas: &[f64],
    hbar: f64,
    f: impl Fn(f64) -> f64,
    c: impl Fn(f64) -> f64,
    g_hat: impl Fn(i64) -> Complex64,
) -> (Vec<f64>, Vec<f64>) {
    let n = sigmas.len();
    let mut re = vec![0.0; n * n];
    let mut im = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            let mid = 0.5 * (sigmas[i] + sigmas[j]);
            let v = -hbar * g_hat(i as i64 - j as i64) * c(mid);
            re[i * n + j] = v.re;
            im[i * n + j] = v.im;
        }
        re[i * n + i] += f(sigmas[i]);
    }
    (re, im)
}

/// Real symmetric form of `A + iB`: `A` alone when `B` vanishes, else the
/// `2n × 2n` block matrix `[[A, −B], [B, A]]`, whose spectrum is that of
/// `A + iB` with every eigenvalue doubled.
pub fn embed_hermitian(n: usize, re: &[f64], im: &[f64]) -> Result<(DenseSym, bool)> {
    let scale = re.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1.0);
    if im.iter().all(|v| v.abs() <= 1e-15 * scale) {
        return Ok((DenseSym::new(n, re.to_vec())?, false));
    }
    let m = DenseSym::from_fn(2 * n, |r, c| {
        let (bi, i) = (r / n, r % n);
        let (bj, j) = (c / n, c % n);
        match (bi, bj) {
            (0, 0) | (1, 1) => re[i * n + j],
            (0, 1) => -im[i * n + j],
            _ => im[i * n + j],
        }
    })?;
    Ok((m, true))
}

/// The matrix of `m_k^W` on the grid points `ℓ ∈ ells` (consecutive).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdoMatrix {
    pub k: usize,
    pub hbar: f64,
    pub ells: Vec<i64>,
    pub sigmas: Vec<f64>,
    /// Real symmetric form; `2n × 2n` when `complex`.
    pub matrix: DenseSym,
    pub complex: bool,
}

impl PdoMatrix {
    pub fn symmetry_residual(&self) -> f64 {
        self.matrix.asymmetry()
    }
}

/// Assembles `m_k^W` on `ells`.
pub fn pdo_matrix(
    model: &BoundaryModel,
    cfg: &SemiclassicalConfig,
    k: usize,
    ells: &[i64],
) -> Result<PdoMatrix> {
    if ells.is_empty() || ells.windows(2).any(|w| w[1] != w[0] + 1) {
        return Err(Error::InvalidInput("grid indices must be consecutive and non-empty".into()));
    }
    let p = cfg.flux_grid_params();
    let hbar = cfg.hbar();
    let sigmas: Vec<f64> = ells.iter().map(|l| p.sigma(*l)).collect();
    // Values on the grid and at the half-grid midpoints.
    let n = sigmas.len();
    let half: Vec<f64> = (0..2 * n - 1)
        .map(|i| 0.5 * (sigmas[i / 2] + sigmas[i.div_ceil(2)]))
        .collect();
    let vals = model.mu_c_many(k, &half)?;
    let index = |s: f64| {
        let i = ((s - half[0]) / (0.5 * p.step())).round();
        (i.max(0.0) as usize).min(half.len() - 1)
    };
    let g = &cfg.geometry;
    let (re, im) = weyl_matrix(
        &sigmas,
        hbar,
        |s| vals[index(s)].0,
        |s| vals[index(s)].1,
        |j| g.kappa_hat(j),
    );
    let (matrix, complex) = embed_hermitian(n, &re, &im)?;
    Ok(PdoMatrix {
        k,
        hbar,
        ells: ells.to_vec(),
        sigmas,
        matrix,
        complex,
    })
}

/// Eigenvalues of `m_k^W` (in units of `h`) after the truncation check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PdoSpectrum {
    pub k: usize,
    pub ells: Vec<i64>,
    /// All eigenvalues, ascending.
    pub values: Vec<f64>,
    /// Grid index carrying most of each eigenvector's mass.
    pub peak_ells: Vec<i64>,
    /// Largest mass on the two outermost indices at each end, over
    /// eigenvalues in the window.
    pub edge_mass: f64,
    pub doublings: usize,
}

impl PdoSpectrum {
    /// Eigenvalues in `[lo, hi]`.
    pub fn in_window(&self, lo: f64, hi: f64) -> Vec<f64> {
        self.values.iter().copied().filter(|v| (lo..=hi).contains(v)).collect()
    }
}

/// Largest edge mass tolerated for in-window eigenvectors.
pub const EDGE_MASS_TOL: f64 = 1e-8;

/// Diagonalizes `m_k^W` on grid points within `5ħ^{1/2}` of the preimage
/// hull of the window, enlarging the margin up to three times until the
/// in-window eigenvectors vanish at the truncation edges.
pub fn pdo_spectrum(model: &BoundaryModel, cfg: &SemiclassicalConfig, k: usize) -> Result<PdoSpectrum> {
    let dec = model.decomposition_for(cfg.a, cfg.b)?;
    let comps: Vec<&Component> = dec.components_of(k).collect();
    if comps.is_empty() {
        return Ok(PdoSpectrum {
            k,
            ells: vec![],
            values: vec![],
            peak_ells: vec![],
            edge_mass: 0.0,
            doublings: 0,
        });
    }
    let lo = comps.iter().map(|c| c.lo).fold(f64::INFINITY, f64::min);
    let hi = comps.iter().map(|c| c.hi).fold(f64::NEG_INFINITY, f64::max);
    let p = cfg.flux_grid_params();
    let mut margin = 5.0 * cfg.h.powf(0.25);
    for doublings in 0..=3 {
        let ells: Vec<i64> = p.ells_in(lo - margin, hi + margin).collect();
        let m = pdo_matrix(model, cfg, k, &ells)?;
        let sys = dense_sym_eigs(&m.matrix)?;
        let n = ells.len();
        let stride = if m.complex { 2 } else { 1 };
        let mut values = Vec::with_capacity(n);
        let mut peak_ells = Vec::with_capacity(n);
        let mut edge_mass = 0.0f64;
        for (v, vec) in sys.values.iter().zip(&sys.vectors).step_by(stride) {
            let mass: Vec<f64> = (0..n)
                .map(|i| {
                    let x = vec[i];
                    let y = if m.complex { vec[n + i] } else { 0.0 };
                    x * x + y * y
                })
                .collect();
            let total: f64 = mass.iter().sum();
            let peak = (0..n).max_by(|a, b| mass[*a].total_cmp(&mass[*b])).unwrap_or(0);
            values.push(*v);
            peak_ells.push(ells[peak]);
            if *v >= cfg.a && *v <= cfg.b {
                let edge: f64 = mass.iter().take(2).chain(mass.iter().rev().take(2)).sum();
                edge_mass = edge_mass.max(edge / total);
            }
        }
        if edge_mass <= EDGE_MASS_TOL {
            return Ok(PdoSpectrum {
                k,
                ells,
                values,
                peak_ells,
                edge_mass,
                doublings,
            });
        }
        margin *= 2.0;
    }
    Err(Error::Truncation(format!(
        "branch {k}: in-window eigenvectors still reach the truncation edge after 3 doublings"
    )))
}

/// One quantized level `E_ℓ = f₀(σ_ℓ) + ħf₁(σ_ℓ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BSLevel {
    pub ell: i64,
    pub sigma: f64,
    pub energy: f64,
}

/// Bohr–Sommerfeld data on one monotone component, `f₀ = μ_k` and
/// `f₁ = −⟨κ⟩C_k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BSSeries {
    pub k: usize,
    pub q: usize,
    pub hbar: f64,
    /// Enlarged component.
    pub lo: f64,
    pub hi: f64,
    /// `(σ, f₀, f₁)` samples.
    pub samples: Vec<(f64, f64, f64)>,
    pub levels: Vec<BSLevel>,
    /// `∫κ ds`.
    pub total_curvature: f64,
}

impl BSSeries {
    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.energy).collect()
    }
}

impl BoundaryModel {
    /// Subprincipal action `𝒦 = C(σ)/μ′(σ) · ∫κ ds`.
    pub fn action_correction(&self, k: usize, sigma: f64, total_curvature: f64) -> Result<f64> {
        let (_, c) = self.mu_c(k, sigma)?;
        Ok(c / self.dmu(k, sigma)? * total_curvature)
    }
}

/// Bohr–Sommerfeld series of component `(k, q)`.
pub fn bohr_sommerfeld(
    model: &BoundaryModel,
    cfg: &SemiclassicalConfig,
    k: usize,
    q: usize,
) -> Result<BSSeries> {
    let dec = model.decomposition_for(cfg.a, cfg.b)?;
    let comp = dec
        .components_of(k)
        .find(|c| c.q == q)
        .ok_or_else(|| Error::InvalidInput(format!("no component (k, q) = ({k}, {q})")))?;
    if comp.shape == Shape::ContainsMinimum {
        return Err(Error::Hypothesis(format!(
            "component ({k}, {q}) contains the branch minimum: f0 is not monotone"
        )));
    }
    let p = cfg.flux_grid_params();
    let (lo, hi) = enlarged(comp, p.step());
    let hbar = cfg.hbar();
    let mean = cfg.geometry.mean_curvature();
    let grid: Vec<f64> = (0..200).map(|i| lo + (hi - lo) * i as f64 / 199.0).collect();
    let vals = model.mu_c_many(k, &grid)?;
    let samples: Vec<(f64, f64, f64)> = grid
        .iter()
        .zip(&vals)
        .map(|(s, (mu, c))| (*s, *mu, -mean * c))
        .collect();
    let sign = (samples[1].1 - samples[0].1).signum();
    if samples.windows(2).any(|w| (w[1].1 - w[0].1).signum() != sign) {
        return Err(Error::Hypothesis(format!(
            "f0 is not strictly monotone on component ({k}, {q})"
        )));
    }
    let ells: Vec<i64> = p.ells_in(lo, hi).collect();
    let sig: Vec<f64> = ells.iter().map(|l| p.sigma(*l)).collect();
    let levels = model
        .mu_c_many(k, &sig)?
        .into_iter()
        .zip(ells.iter().zip(&sig))
        .map(|((mu, c), (ell, sigma))| BSLevel {
            ell: *ell,
            sigma: *sigma,
            energy: two_term(mu, c, hbar, mean),
        })
        .collect();
    Ok(BSSeries {
        k,
        q,
        hbar,
        lo,
        hi,
        samples,
        levels,
        total_curvature: cfg.geometry.total_curvature(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedding_doubles_spectrum() {
        // A + iB with A = [[2, 1], [1, 3]], B = [[0, 0.5], [−0.5, 0]]
        let re = [2.0, 1.0, 1.0, 3.0];
        let im = [0.0, 0.5, -0.5, 0.0];
        let (m, complex) = embed_hermitian(2, &re, &im).unwrap();
        assert!(complex);
        let v = crate::numerics::dense_sym_eigenvalues(&m).unwrap();
        // eigenvalues of [[2, 1+0.5i], [1−0.5i, 3]]: 2.5 ± sqrt(0.25 + 1.25)
        let r = (0.25f64 + 1.25).sqrt();
        for (got, want) in v.iter().zip([2.5 - r, 2.5 - r, 2.5 + r, 2.5 + r]) {
            assert!((got - want).abs() < 1e-12);
        }
        let (m, complex) = embed_hermitian(2, &re, &[0.0; 4]).unwrap();
        assert!(!complex);
        assert_eq!(m.len(), 2);
    }
}
