//! Non-degenerate maxima of the signed curvature `εκ`.

use serde::{Deserialize, Serialize};

use super::DomainGeometry;
use crate::error::{Error, Result};

/// Which signed curvature to maximise.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    /// Maximum of `κ`.
    Max,
    /// Maximum of `−κ`.
    Min,
}

impl Direction {
    pub fn sign(self) -> f64 {
        match self {
            Self::Max => 1.0,
            Self::Min => -1.0,
        }
    }

    /// `ε = +1 ↦ Max`, `ε = −1 ↦ Min`.
    pub fn from_sign(eps: f64) -> Self {
        if eps >= 0.0 {
            Self::Max
        } else {
            Self::Min
        }
    }
}

/// A maximum of `εκ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureExtremum {
    pub direction: Direction,
    pub s_max: f64,
    /// `max εκ` (so `−κ_min` for [`Direction::Min`]).
    pub kappa_max: f64,
    /// `−(εκ)″(s_max)`.
    pub k2: f64,
    /// Number of congruent copies of the maximum (1 unless accepted by
    /// [`symmetric_extremum`]).
    pub multiplicity: usize,
    /// Arclengths of all copies.
    pub locations: Vec<f64>,
}

/// Relative gap below which two maxima count as tied.
pub const TIE_MARGIN: f64 = 1e-9;

/// The unique global maximum of `εκ`, refined by Newton's method on the
/// trigonometric interpolant of the samples. Ties are rejected.
pub fn curvature_extremum(g: &DomainGeometry, dir: Direction) -> Result<CurvatureExtremum> {
    let found = maxima(g, dir)?;
    if found.len() > 1 {
        let at: Vec<String> = found.iter().map(|(s, ..)| format!("{s:.12}")).collect();
        return Err(Error::Geometry(format!(
            "curvature maximum is not unique: tied at s = [{}]",
            at.join(", ")
        )));
    }
    let (s, v, k2) = found[0];
    Ok(CurvatureExtremum {
        direction: dir,
        s_max: s,
        kappa_max: v,
        k2,
        multiplicity: 1,
        locations: vec![s],
    })
}

/// Like [`curvature_extremum`], but tied maxima are accepted when they are
/// congruent (equal value and equal `k2`), as for a domain with a symmetry.
pub fn symmetric_extremum(g: &DomainGeometry, dir: Direction) -> Result<CurvatureExtremum> {
    let found = maxima(g, dir)?;
    let (s, v, k2) = found[0];
    if found.iter().any(|(_, _, k)| (k - k2).abs() > 1e-6 * k2.abs().max(1.0)) {
        return Err(Error::Geometry(
            "tied curvature maxima with different second derivatives".into(),
        ));
    }
    Ok(CurvatureExtremum {
        direction: dir,
        s_max: s,
        kappa_max: v,
        k2,
        multiplicity: found.len(),
        locations: found.iter().map(|f| f.0).collect(),
    })
}

/// Refined global maxima `(s, εκ, −(εκ)″)`, ties included, best first.
fn maxima(g: &DomainGeometry, dir: Direction) -> Result<Vec<(f64, f64, f64)>> {
    let eps = dir.sign();
    let f: Vec<f64> = g.kappa.iter().map(|k| eps * k).collect();
    let m = f.len();
    let (lo, hi) = f
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let scale = hi.abs().max(1.0);
    if hi - lo < TIE_MARGIN * scale {
        return Err(Error::Geometry(
            "constant curvature: no isolated curvature maximum".into(),
        ));
    }
    let mut cands: Vec<(f64, f64, f64)> = Vec::new();
    for i in 0..m {
        let (prev, next) = (f[(i + m - 1) % m], f[(i + 1) % m]);
        // Only grid maxima that could compete with the top after refinement.
        if f[i] > prev && f[i] >= next && f[i] > hi - 0.1 * (hi - lo) {
            cands.push(refine(g, eps, g.arclength(i))?);
        }
    }
    cands.sort_by(|a, b| b.1.total_cmp(&a.1));
    let top = cands[0].1;
    let tied: Vec<(f64, f64, f64)> = cands
        .into_iter()
        .filter(|c| top - c.1 <= TIE_MARGIN * scale)
        .collect();
    Ok(tied)
}

fn refine(g: &DomainGeometry, eps: f64, s0: f64) -> Result<(f64, f64, f64)> {
    let h = g.spacing();
    let mut s = s0;
    for _ in 0..50 {
        let (_, d, dd) = g.kappa_derivs(s);
        let (d, dd) = (eps * d, eps * dd);
        if dd >= 0.0 {
            return Err(Error::Geometry(format!(
                "degenerate curvature maximum near s = {s0}"
            )));
        }
        let step = (d / dd).clamp(-h, h);
        s -= step;
        if step.abs() < 1e-14 * g.half_length {
            break;
        }
    }
    let (v, _, dd) = g.kappa_derivs(s);
    let per = g.perimeter();
    Ok((s.rem_euclid(per), eps * v, -eps * dd))
}
