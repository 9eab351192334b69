//! Semiclassical branches `h ↦ h f_{1,q}(σ_ℓ(h), h^{1/2})` below the first
//! Landau level, their crossings, and the oscillation of a tracked level.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{enlarged, two_term, BoundaryModel, FluxParams};
use crate::degennes::{Component, RobinParameter};
use crate::error::{Error, Result};
use crate::geometry::DomainGeometry;
use crate::numerics::brent_root;

/// One branch, sampled where `σ_ℓ(h)` lies in the enlarged `Σ_{1,q}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchCurve {
    pub q: usize,
    pub ell: i64,
    /// `λ` at each sample of [`BranchDiagram::hs`].
    pub values: Vec<Option<f64>>,
    /// Observed direction in `h`, if the branch has two or more samples.
    pub increasing: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Crossing {
    pub h: f64,
    /// Branch from `Σ_{1,1}`.
    pub ell1: i64,
    /// Branch from `Σ_{1,2}`.
    pub ell2: i64,
    pub lambda: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchDiagram {
    pub gamma: f64,
    pub a: f64,
    pub b: f64,
    pub hs: Vec<f64>,
    /// Empirical `min |f′|` over the components of the window preimage.
    pub c_hat: f64,
    pub curves: Vec<BranchCurve>,
    pub crossings: Vec<Crossing>,
    /// Smallest `|Δλ| / (h^{3/2}πĉ/L)` between neighbouring branches of one
    /// family.
    pub min_separation_ratio: f64,
}

impl BranchDiagram {
    /// Curves whose observed direction contradicts their family
    /// (`q = 1` increasing, `q = 2` decreasing).
    pub fn orientation_violations(&self) -> usize {
        self.curves
            .iter()
            .filter(|c| matches!(c.increasing, Some(inc) if inc != (c.q == 1)))
            .count()
    }

    /// Consecutive crossing abscissae along the `q = 1` branch `ell`.
    pub fn crossings_along(&self, ell: i64) -> Vec<f64> {
        let mut h: Vec<f64> = self.crossings.iter().filter(|c| c.ell1 == ell).map(|c| c.h).collect();
        h.sort_by(f64::total_cmp);
        h
    }
}

/// Evaluates the two-term branch model on the first dispersion curve.
struct Levels<'a> {
    model: &'a BoundaryModel,
    geometry: &'a DomainGeometry,
}

impl Levels<'_> {
    fn params(&self, h: f64) -> FluxParams {
        FluxParams::new(h, self.geometry)
    }

    fn f(&self, sigma: f64, hbar: f64) -> f64 {
        let t = self.model.table(1).expect("branch 1 is tabulated");
        two_term(t.mu(sigma), t.c(sigma), hbar, self.geometry.mean_curvature())
    }

    fn branch(&self, ell: i64, h: f64) -> f64 {
        h * self.f(self.params(h).sigma(ell), h.sqrt())
    }

    /// All model levels `(ℓ, λ)` with `σ_ℓ` inside the table, ascending.
    fn all(&self, h: f64) -> Vec<(i64, f64)> {
        let (lo, hi) = self.model.table(1).expect("branch 1 is tabulated").domain();
        let mut v: Vec<(i64, f64)> = self
            .params(h)
            .ells_in(lo, hi)
            .map(|l| (l, self.branch(l, h)))
            .collect();
        v.sort_by(|x, y| x.1.total_cmp(&y.1));
        v
    }
}

fn check_hypothesis(model: &BoundaryModel, a: f64, b: f64) -> Result<f64> {
    let gamma = match model.gamma {
        RobinParameter::Robin(g) => g,
        RobinParameter::Dirichlet => {
            return Err(Error::Hypothesis("oscillation branches need a real Robin parameter".into()))
        }
    };
    let theta = model.degennes.find_minimum(gamma, 1)?.theta;
    if !(a > theta && b < 1.0 && a < b) {
        return Err(Error::Hypothesis(format!(
            "need Theta = {theta} < a < b < 1, got [{a}, {b}]"
        )));
    }
    let table = model
        .table(1)
        .ok_or_else(|| Error::InvalidInput("model has no table for branch 1".into()))?;
    let (lo, hi) = table.domain();
    if table.mu(lo) <= b || table.mu(hi) <= b {
        return Err(Error::InvalidInput(format!(
            "model tables [{lo}, {hi}] do not cover mu_1^-1((-inf, {b}])"
        )));
    }
    Ok(gamma)
}

/// Branch diagram over `h ∈ [h_lo, h_hi]` for the window `[a, b]` with
/// `Θ^[0](γ) < a < b < 1`. `model` must tabulate branch 1 over the whole
/// sublevel set `μ₁ ≤ b` (build it for a window `(−∞, b′]`, `b < b′ < 1`).
pub fn trace_branches(
    model: &BoundaryModel,
    geometry: &DomainGeometry,
    (h_lo, h_hi): (f64, f64),
    (a, b): (f64, f64),
    samples: usize,
) -> Result<BranchDiagram> {
    let gamma = check_hypothesis(model, a, b)?;
    if !(0.0 < h_lo && h_lo < h_hi && samples >= 2) {
        return Err(Error::InvalidInput(format!("bad h range [{h_lo}, {h_hi}]")));
    }
    let dec = model.degennes.window_decomposition(model.gamma, a, b)?;
    let comps: Vec<Component> = dec.components_of(1).copied().collect();
    let lv = Levels { model, geometry };
    let hs: Vec<f64> = (0..samples)
        .map(|i| h_lo + (h_hi - h_lo) * i as f64 / (samples - 1) as f64)
        .collect();

    // ĉ over the window preimage at the middle of the h range
    let h_mid = 0.5 * (h_lo + h_hi);
    let mut c_hat = f64::INFINITY;
    for c in &comps {
        let (lo, hi) = (c.lo, c.hi);
        for i in 0..=200 {
            let s = lo + (hi - lo) * i as f64 / 200.0;
            let d = 1e-4;
            let fp = (lv.f(s + d, h_mid.sqrt()) - lv.f(s - d, h_mid.sqrt())) / (2.0 * d);
            c_hat = c_hat.min(fp.abs());
        }
    }

    let mut curves = Vec::new();
    for c in &comps {
        let mut ells: Vec<i64> = Vec::new();
        for &h in &hs {
            let (lo, hi) = enlarged(c, lv.params(h).step());
            ells.extend(lv.params(h).ells_in(lo, hi));
        }
        ells.sort_unstable();
        ells.dedup();
        for ell in ells {
            let values: Vec<Option<f64>> = hs
                .iter()
                .map(|&h| {
                    let p = lv.params(h);
                    let (lo, hi) = enlarged(c, p.step());
                    let s = p.sigma(ell);
                    (lo..=hi).contains(&s).then(|| lv.branch(ell, h))
                })
                .collect();
            let defined: Vec<f64> = values.iter().flatten().copied().collect();
            let increasing = (defined.len() >= 2).then(|| {
                let ups = defined.windows(2).filter(|w| w[1] > w[0]).count();
                ups * 2 >= defined.len() - 1
            });
            curves.push(BranchCurve { q: c.q, ell, values, increasing });
        }
    }

    let mut crossings = Vec::new();
    for c1 in curves.iter().filter(|c| c.q == 1) {
        for c2 in curves.iter().filter(|c| c.q == 2) {
            for i in 0..samples - 1 {
                let (Some(x0), Some(y0), Some(x1), Some(y1)) =
                    (c1.values[i], c2.values[i], c1.values[i + 1], c2.values[i + 1])
                else {
                    continue;
                };
                if (x0 - y0).signum() == (x1 - y1).signum() {
                    continue;
                }
                let d = |h: f64| lv.branch(c1.ell, h) - lv.branch(c2.ell, h);
                let h = brent_root(d, hs[i], hs[i + 1], 1e-14)?;
                let lambda = lv.branch(c1.ell, h);
                if lambda >= h * a && lambda <= h * b {
                    crossings.push(Crossing { h, ell1: c1.ell, ell2: c2.ell, lambda });
                }
            }
        }
    }
    crossings.sort_by(|x, y| x.h.total_cmp(&y.h));

    let l = geometry.half_length;
    let mut min_separation_ratio = f64::INFINITY;
    for (i, &h) in hs.iter().enumerate() {
        let unit = h.powf(1.5) * PI * c_hat / l;
        for q in [1, 2] {
            let fam: Vec<(i64, f64)> = curves
                .iter()
                .filter(|c| c.q == q)
                .filter_map(|c| c.values[i].map(|v| (c.ell, v)))
                .collect();
            for w in fam.windows(2) {
                if w[1].0 == w[0].0 + 1 {
                    min_separation_ratio = min_separation_ratio.min((w[1].1 - w[0].1).abs() / unit);
                }
            }
        }
    }

    Ok(BranchDiagram {
        gamma,
        a,
        b,
        hs,
        c_hat,
        curves,
        crossings,
        min_separation_ratio,
    })
}

/// A rise followed by a fall of the tracked level `λ_j` over
/// `h₁ < h₂ < h₃` in `[h₀, h₀ + M h₀²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OscillationTriple {
    /// Index of the tracked level counted from the bottom of the model
    /// spectrum.
    pub j: usize,
    pub h0: f64,
    pub h1: f64,
    pub h2: f64,
    pub h3: f64,
    /// `λ_j(h₂) − λ_j(h₁)`.
    pub rise: f64,
    /// `λ_j(h₂) − λ_j(h₃)`.
    pub fall: f64,
}

impl OscillationTriple {
    pub fn min_swing(&self) -> f64 {
        self.rise.min(self.fall)
    }
}

/// `λ_j(h)`: the `j`-th smallest model level (1-based).
pub fn model_level(model: &BoundaryModel, geometry: &DomainGeometry, h: f64, j: usize) -> Option<f64> {
    Levels { model, geometry }.all(h).get(j.checked_sub(1)?).map(|x| x.1)
}

impl BranchDiagram {
    /// Tracks the model level closest to the middle of the window at `h0`
    /// over `[h0, h0 + m·h0²]` and returns its largest rise-then-fall.
    pub fn oscillation(
        &self,
        model: &BoundaryModel,
        geometry: &DomainGeometry,
        h0: f64,
        m: f64,
        samples: usize,
    ) -> Result<OscillationTriple> {
        let lv = Levels { model, geometry };
        let target = h0 * 0.5 * (self.a + self.b);
        let levels = lv.all(h0);
        let j = levels
            .iter()
            .enumerate()
            .min_by(|x, y| (x.1 .1 - target).abs().total_cmp(&(y.1 .1 - target).abs()))
            .map(|(i, _)| i + 1)
            .ok_or_else(|| Error::Hypothesis("no model level near the window".into()))?;
        let hs: Vec<f64> = (0..samples)
            .map(|i| h0 + m * h0 * h0 * i as f64 / (samples - 1) as f64)
            .collect();
        let vals: Vec<f64> = hs
            .iter()
            .map(|&h| lv.all(h).get(j - 1).map(|x| x.1).unwrap_or(f64::NAN))
            .collect();
        let n = vals.len();
        // running minima from the left and from the right
        let mut left = vec![0usize; n];
        let mut right = vec![n - 1; n];
        for i in 1..n {
            left[i] = if vals[i] < vals[left[i - 1]] { i } else { left[i - 1] };
        }
        for i in (0..n - 1).rev() {
            right[i] = if vals[i] < vals[right[i + 1]] { i } else { right[i + 1] };
        }
        let best = (0..n)
            .max_by(|&x, &y| {
                let sx = (vals[x] - vals[left[x]]).min(vals[x] - vals[right[x]]);
                let sy = (vals[y] - vals[left[y]]).min(vals[y] - vals[right[y]]);
                sx.total_cmp(&sy)
            })
            .unwrap_or(0);
        Ok(OscillationTriple {
            j,
            h0,
            h1: hs[left[best]],
            h2: hs[best],
            h3: hs[right[best]],
            rise: vals[best] - vals[left[best]],
            fall: vals[best] - vals[right[best]],
        })
    }
}
