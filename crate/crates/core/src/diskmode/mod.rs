//! Exact reference spectra on the disk of radius `R` with unit field.
//!
//! In the gauge `A = ½(−x₂, x₁)` the mode `ψ = e^{imφ} f(r)` gives the
//! radial operator `−h²(f″ + f′/r) + (hm/r − r/2)² f` with weight `r dr`.
//! With `g = √r f` it becomes `−h²g″ + [(hm/r − r/2)² − h²/(4r²)] g`
//! with `g(0) = 0`. The matrix is a finite-volume version of the same
//! symmetrization (node values scaled by the root of their cell weight),
//! which keeps the `m = 0` sector regular at the origin. The Robin condition `f′(R) = −γh^{−1/2} f(R)` turns
//! into `g′(R) = (1/(2R) − γh^{−1/2}) g(R)`.
//!
//! Near the boundary, with `t = (R − r)/√h`, the potential is
//! `h(t − σ)²` to leading order, where `σ = √h(R/(2h) − m/R)`. On the
//! flux grid of the disk this is `σ_ℓ` with `ℓ = −m`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::degennes::{DeGennes, RobinParameter};
use crate::error::{Error, Result};
use crate::numerics::tridiag::eigenvectors_for;
use crate::numerics::{SymTridiag, TridiagOptions};

/// Default number of radial mesh points.
pub const DEFAULT_POINTS: usize = 20_000;

/// Mesh points required across one boundary-layer width `√h`.
pub const LAYER_POINTS: f64 = 50.0;

/// Largest eigenvalue change under mesh doubling, relative to `h`.
pub const REFINEMENT_TOL: f64 = 1e-4;

/// One angular-momentum sector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub radius: f64,
    pub h: f64,
    pub gamma: RobinParameter,
    pub m: i64,
    /// Mesh `r_i = iR/N`, `i = 1..=N`.
    pub points: usize,
}

impl RadialProblem {
    pub fn new(radius: f64, h: f64, gamma: RobinParameter, m: i64, points: usize) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite() && h > 0.0 && h.is_finite()) {
            return Err(Error::InvalidInput(format!("need R > 0 and h > 0, got {radius}, {h}")));
        }
        let p = Self { radius, h, gamma, m, points };
        if points < 2000 || p.spacing() * LAYER_POINTS > h.sqrt() {
            return Err(Error::InvalidInput(format!(
                "{points} radial points do not resolve the boundary layer (need >= 2000 and {LAYER_POINTS} per sqrt(h))"
            )));
        }
        Ok(p)
    }

    pub fn spacing(&self) -> f64 {
        self.radius / self.points as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Effective potential of the `g = √r f` form.
    pub fn potential(&self, r: f64) -> f64 {
        let h = self.h;
        (h * self.m as f64 / r - 0.5 * r).powi(2) - h * h / (4.0 * r * r)
    }

    /// Boundary momentum `σ = √h(R/(2h) − m/R)`.
    pub fn sigma(&self) -> f64 {
        self.h.sqrt() * (self.radius / (2.0 * self.h) - self.m as f64 / self.radius)
    }

    /// Nodes kept by the scheme: `r_0 = 0` only for `m = 0`, `r_N = R`
    /// only for Robin.
    pub fn node_range(&self) -> (usize, usize) {
        let first = usize::from(self.m != 0);
        let last = match self.gamma {
            RobinParameter::Robin(_) => self.points,
            RobinParameter::Dirichlet => self.points - 1,
        };
        (first, last)
    }

    /// `∫ r dr` over the control cell of node `i`.
    pub fn cell_weight(&self, i: usize) -> f64 {
        let d = self.spacing();
        if i == 0 {
            d * d / 8.0
        } else if i == self.points {
            d * (0.5 * self.radius - d / 8.0)
        } else {
            self.node(i) * d
        }
    }

    /// Finite-volume discretization of the form
    /// `h²∫|f′|² r dr + ∫ V₀|f|² r dr + γh^{3/2}R|f(R)|²`, where
    /// `V₀ = (hm/r − r/2)²`, symmetrized by `w_i = √c_i f_i` with cell
    /// weights `c_i`. Since `c_i ≈ r_i δ` this is `w ≈ √δ g`.
    pub fn matrix(&self) -> Result<SymTridiag> {
        let d = self.spacing();
        let h2 = self.h * self.h;
        let (first, last) = self.node_range();
        let face = |i: usize| (i as f64 + 0.5) * d;
        let v0 = |i: usize| {
            if i == 0 {
                0.0
            } else {
                let r = self.node(i);
                (self.h * self.m as f64 / r - 0.5 * r).powi(2)
            }
        };
        let mut diag = Vec::with_capacity(last - first + 1);
        let mut off = Vec::with_capacity(last - first);
        for i in first..=last {
            let mut k = v0(i) * self.cell_weight(i);
            if i > 0 {
                k += h2 * face(i - 1) / d;
            }
            if i < self.points {
                k += h2 * face(i) / d;
            }
            if i == self.points {
                if let RobinParameter::Robin(g) = self.gamma {
                    k += g * self.h.powf(1.5) * self.radius;
                }
            }
            diag.push(k / self.cell_weight(i));
            if i < last {
                let c = (self.cell_weight(i) * self.cell_weight(i + 1)).sqrt();
                off.push(-h2 * face(i) / d / c);
            }
        }
        SymTridiag::new(diag, off)
    }

    /// Maps a unit eigenvector of [`Self::matrix`] to `f` at `r_0..=r_N`
    /// (zero at dropped nodes), normalized by `Σ c_i f_i² = 1`.
    fn unscale(&self, w: &[f64]) -> Vec<f64> {
        let (first, _) = self.node_range();
        let mut f = vec![0.0; self.points + 1];
        for (k, v) in w.iter().enumerate() {
            let i = first + k;
            f[i] = v / self.cell_weight(i).sqrt();
        }
        f
    }
}

/// Eigenpairs of one sector in an energy interval.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialEigs {
    pub m: i64,
    /// 1-based radial indices.
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
    /// `f` at `r_0..=r_N`, unit norm in `L²(r dr)`.
    pub functions: Vec<Vec<f64>>,
}

/// Eigenvalues in `[lo, hi]` with their radial functions.
pub fn radial_eigs(p: &RadialProblem, lo: f64, hi: f64, vectors: bool) -> Result<RadialEigs> {
    let t = p.matrix()?;
    let k_lo = t.count_below(lo) + 1;
    let k_hi = t.count_below(hi.next_up());
    if k_hi < k_lo {
        return Ok(RadialEigs { m: p.m, indices: vec![], values: vec![], functions: vec![] });
    }
    let values = t.eigenvalues(k_lo, k_hi)?;
    let functions = if vectors {
        eigenvectors_for(&t, &values, k_lo, &TridiagOptions::default())?
            .iter()
            .map(|w| p.unscale(w))
            .collect()
    } else {
        Vec::new()
    };
    Ok(RadialEigs {
        m: p.m,
        indices: (k_lo..=k_hi).collect(),
        values,
        functions,
    })
}

/// Largest change of the eigenvalues in `[lo, hi]` when the mesh is
/// doubled; fails above `REFINEMENT_TOL·h`.
pub fn refinement_check(p: &RadialProblem, lo: f64, hi: f64) -> Result<f64> {
    let coarse = radial_eigs(p, lo, hi, false)?;
    let fine_p = RadialProblem { points: 2 * p.points, ..*p };
    let fine = fine_p.matrix()?;
    let mut worst = 0.0f64;
    if let (Some(&k_lo), Some(&k_hi)) = (coarse.indices.first(), coarse.indices.last()) {
        let refined = fine.eigenvalues(k_lo, k_hi)?;
        for (a, b) in coarse.values.iter().zip(&refined) {
            worst = worst.max((a - b).abs());
        }
    }
    if worst > REFINEMENT_TOL * p.h {
        return Err(Error::Truncation(format!(
            "radial mesh under-resolved: doubling {} points moves eigenvalues by {worst:e}",
            p.points
        )));
    }
    Ok(worst)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialEntry {
    pub m: i64,
    pub j: usize,
    pub lambda: f64,
}

/// Exact eigenvalues collected over a range of `m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialSpectrum {
    pub radius: f64,
    pub h: f64,
    pub gamma: RobinParameter,
    pub a: f64,
    pub b: f64,
    /// Entries in `[h(a − margin), h(b + margin)]`, sorted by `λ`.
    pub entries: Vec<RadialEntry>,
    pub margin: f64,
    pub m_range: (i64, i64),
    pub doublings: usize,
}

impl RadialSpectrum {
    /// Entries in `[ha, hb]`.
    pub fn in_window(&self) -> Vec<RadialEntry> {
        let (lo, hi) = (self.h * self.a, self.h * self.b);
        self.entries.iter().copied().filter(|e| e.lambda >= lo && e.lambda <= hi).collect()
    }

    pub fn count(&self) -> usize {
        self.in_window().len()
    }

    pub fn lambdas(&self) -> Vec<f64> {
        self.entries.iter().map(|e| e.lambda).collect()
    }
}

/// Disk parameters shared by a window computation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Disk {
    pub radius: f64,
    pub h: f64,
    pub gamma: RobinParameter,
    pub points: usize,
}

impl Disk {
    pub fn new(radius: f64, h: f64, gamma: RobinParameter) -> Self {
        let points = DEFAULT_POINTS.max((LAYER_POINTS * radius / h.sqrt()).ceil() as usize);
        Self { radius, h, gamma, points }
    }

    pub fn problem(&self, m: i64) -> Result<RadialProblem> {
        RadialProblem::new(self.radius, self.h, self.gamma, m, self.points)
    }

    /// `m` with boundary momentum `σ`, i.e. `R²/(2h) − Rσ/√h`.
    pub fn m_of_sigma(&self, sigma: f64) -> f64 {
        self.radius * self.radius / (2.0 * self.h) - self.radius * sigma / self.h.sqrt()
    }
}

/// `sp(𝓛_h) ∩ [h(a − margin), h(b + margin)]` on the disk. The sweep over
/// `m` covers the window preimage predicted by the dispersion curves,
/// widened by five grid steps, and is doubled (at most three times) while
/// an end sector still has eigenvalues in the window.
pub fn window_spectrum(
    degennes: &DeGennes,
    disk: &Disk,
    a: f64,
    b: f64,
    margin: f64,
) -> Result<RadialSpectrum> {
    let dec = degennes.window_decomposition(disk.gamma, a, b)?;
    // Dirichlet below the first level has no preimage; probe a default span.
    let (s_lo, s_hi) = dec.hull().unwrap_or((0.0, 3.0));
    let step = disk.h.sqrt() / disk.radius;
    let mut m_lo = disk.m_of_sigma(s_hi + 5.0 * step).floor() as i64;
    let mut m_hi = disk.m_of_sigma(s_lo - 5.0 * step).ceil() as i64;
    let (lo, hi) = (disk.h * (a - margin), disk.h * (b + margin));
    let sector = |m: i64| -> Result<Vec<RadialEntry>> {
        let r = radial_eigs(&disk.problem(m)?, lo, hi, false)?;
        Ok(r.indices
            .iter()
            .zip(&r.values)
            .map(|(j, v)| RadialEntry { m, j: *j, lambda: *v })
            .collect())
    };
    for doublings in 0..=3 {
        let per: Result<Vec<Vec<RadialEntry>>> = (m_lo..=m_hi).into_par_iter().map(sector).collect();
        let per = per?;
        let ends_empty = per.first().is_none_or(Vec::is_empty) && per.last().is_none_or(Vec::is_empty);
        if ends_empty {
            let mut entries: Vec<RadialEntry> = per.into_iter().flatten().collect();
            entries.sort_by(|x, y| x.lambda.total_cmp(&y.lambda));
            return Ok(RadialSpectrum {
                radius: disk.radius,
                h: disk.h,
                gamma: disk.gamma,
                a,
                b,
                entries,
                margin,
                m_range: (m_lo, m_hi),
                doublings,
            });
        }
        let half = (m_hi - m_lo + 1) / 2 + 1;
        m_lo -= half;
        m_hi += half;
    }
    Err(Error::Truncation(format!(
        "m sweep still meets the window at its ends after 3 doublings (m in [{m_lo}, {m_hi}])"
    )))
}

/// Cumulative `L²` mass near the boundary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Localization {
    /// Distances `d = k√h`, `k = 1, 2, …`.
    pub distances: Vec<f64>,
    /// Mass within distance `d` of `r = R`.
    pub fractions: Vec<f64>,
    /// Decay rate `α̂` of the interior tail `1 − fraction` per unit of
    /// `d/√h`, fitted on `d/√h ∈ [2, 6]`.
    pub rate: f64,
}

impl Localization {
    /// Mass within `d`, interpolated linearly between samples.
    pub fn fraction_within(&self, d: f64) -> f64 {
        match self.distances.iter().position(|x| *x >= d) {
            None => 1.0,
            Some(0) => self.fractions[0] * d / self.distances[0],
            Some(i) => {
                let t = (d - self.distances[i - 1]) / (self.distances[i] - self.distances[i - 1]);
                self.fractions[i - 1] + t * (self.fractions[i] - self.fractions[i - 1])
            }
        }
    }
}

/// Mass profile of a radial function `f` from [`radial_eigs`], using the
/// cell weights of the scheme.
pub fn localization_profile(p: &RadialProblem, f: &[f64]) -> Localization {
    let n = p.points;
    let sh = p.h.sqrt();
    // inward[i]: mass of nodes i..=N
    let mut inward = vec![0.0; n + 2];
    for i in (0..=n).rev() {
        let fi = f.get(i).copied().unwrap_or(0.0);
        inward[i] = inward[i + 1] + p.cell_weight(i) * fi * fi;
    }
    let total = inward[0];
    let mass_within = |dist: f64| {
        let i = ((p.radius - dist) / p.spacing()).ceil().clamp(0.0, n as f64) as usize;
        inward[i] / total
    };
    let kmax = (p.radius / sh).floor() as usize;
    let distances: Vec<f64> = (1..=kmax.max(1)).map(|k| k as f64 * sh).collect();
    let fractions: Vec<f64> = distances.iter().map(|x| mass_within(*x)).collect();
    let pts: Vec<(f64, f64)> = (0..=40)
        .map(|i| 2.0 + 4.0 * i as f64 / 40.0)
        .filter(|t| t * sh < p.radius)
        .map(|t| (t, 1.0 - mass_within(t * sh)))
        .filter(|(_, tail)| *tail > 1e-13)
        .map(|(t, tail)| (t, tail.ln()))
        .collect();
    let rate = if pts.len() >= 2 {
        let mx = pts.iter().map(|q| q.0).sum::<f64>() / pts.len() as f64;
        let my = pts.iter().map(|q| q.1).sum::<f64>() / pts.len() as f64;
        let sxy: f64 = pts.iter().map(|q| (q.0 - mx) * (q.1 - my)).sum();
        let sxx: f64 = pts.iter().map(|q| (q.0 - mx).powi(2)).sum();
        -sxy / sxx
    } else {
        f64::NAN
    };
    Localization { distances, fractions, rate }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sigma_mapping() {
        let p = RadialProblem::new(1.0, 0.02, RobinParameter::Robin(0.0), 20, 20_000).unwrap();
        assert!((p.sigma() - 0.02f64.sqrt() * (25.0 - 20.0)).abs() < 1e-14);
        let d = Disk::new(1.0, 0.02, RobinParameter::Robin(0.0));
        assert!((d.m_of_sigma(p.sigma()) - 20.0).abs() < 1e-9);
    }

    #[test]
    fn mesh_requirements() {
        assert!(RadialProblem::new(1.0, 0.02, RobinParameter::Robin(0.0), 0, 1000).is_err());
        assert!(RadialProblem::new(1.0, 1e-6, RobinParameter::Robin(0.0), 0, 2000).is_err());
    }
}
