//! Two-term eigenvalue count in a window.

use serde::{Deserialize, Serialize};

use super::{BoundaryModel, SemiclassicalConfig};
use crate::degennes::Shape;
use crate::error::{Error, Result};

/// Smallest `|μ′|` accepted at a preimage endpoint.
pub const MIN_SLOPE: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeylCount {
    pub count: i64,
    /// `(L/(πh^{1/2})) Σ |α − β|`.
    pub first_term: f64,
    /// `(L⟨κ⟩/π) Σ [C/|μ′|(β) − C/|μ′|(α)]`.
    pub second_term: f64,
}

/// `floor` of the two-term count over all components of the window
/// preimage, with `α = μ^{-1}(a)` and `β = μ^{-1}(b)` on each.
pub fn weyl_count(model: &BoundaryModel, cfg: &SemiclassicalConfig) -> Result<WeylCount> {
    let dec = model.decomposition_for(cfg.a, cfg.b)?;
    let mut delta0 = 0.0;
    let mut delta1 = 0.0;
    for comp in &dec.components {
        if comp.shape == Shape::ContainsMinimum {
            return Err(Error::Hypothesis(format!(
                "window reaches below the minimum of branch {}: a is not a regular value",
                comp.k
            )));
        }
        let (alpha, beta) = match comp.shape {
            Shape::Decreasing => (comp.hi, comp.lo),
            _ => (comp.lo, comp.hi),
        };
        let weight = |s: f64| -> Result<f64> {
            let m = model.degennes.mode(model.gamma, s, comp.k)?;
            if m.dmu.abs() < MIN_SLOPE {
                return Err(Error::Hypothesis(format!(
                    "|mu'| = {:e} at sigma = {s}: endpoint too close to a critical value",
                    m.dmu.abs()
                )));
            }
            Ok(m.c / m.dmu.abs())
        };
        delta0 += (alpha - beta).abs();
        delta1 += weight(beta)? - weight(alpha)?;
    }
    let l = cfg.geometry.half_length;
    let pi = std::f64::consts::PI;
    let first_term = l / (pi * cfg.hbar()) * delta0;
    let second_term = l * cfg.geometry.mean_curvature() / pi * delta1;
    Ok(WeylCount {
        count: (first_term + second_term).floor() as i64,
        first_term,
        second_term,
    })
}
