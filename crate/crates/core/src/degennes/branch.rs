//! Tabulated dispersion curves `σ ↦ μ_n(γ, σ)` with their `C_n(σ)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DeGennes, ModeSample, RobinParameter};
use crate::error::{Error, Result};
use crate::numerics::{CubicHermite, CubicSpline};

/// Shape of a sampled branch, read off the signs of `∂μ/∂σ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Monotonicity {
    Decreasing,
    Increasing,
    /// Decreasing then increasing; `near` is the sample closest to the turn.
    SingleMinimum { near: f64 },
    Irregular { sign_changes: usize },
}

/// A dispersion curve sampled on `[lo, hi]`.
///
/// `μ` is interpolated by cubic Hermite using the Hellmann–Feynman slopes,
/// `C` and the boundary value by a not-a-knot spline.
#[derive(Debug, Clone, Serialize)]
pub struct DispersionBranch {
    pub gamma: RobinParameter,
    pub n: usize,
    pub samples: Vec<ModeSample>,
    pub monotonicity: Monotonicity,
    pub warnings: Vec<String>,
    #[serde(skip)]
    mu: CubicHermite,
    #[serde(skip)]
    c: CubicSpline,
    #[serde(skip)]
    boundary: CubicSpline,
}

impl DispersionBranch {
    pub const MIN_SAMPLES: usize = 400;

    /// Rebuilds the interpolants from refined samples (sorted by `σ`).
    pub fn from_samples(gamma: RobinParameter, n: usize, samples: Vec<ModeSample>) -> Result<Self> {
        if samples.len() < 4 {
            return Err(Error::InvalidInput("a branch needs at least 4 samples".into()));
        }
        let x: Vec<f64> = samples.iter().map(|s| s.sigma).collect();
        let mu = CubicHermite::new(
            x.clone(),
            samples.iter().map(|s| s.mu).collect(),
            samples.iter().map(|s| s.dmu).collect(),
        )?;
        let c = CubicSpline::new(x.clone(), samples.iter().map(|s| s.c).collect())?;
        let boundary = CubicSpline::new(x, samples.iter().map(|s| s.boundary_sq).collect())?;
        let monotonicity = classify(&samples);
        let mut warnings = Vec::new();
        let expected_ok = match (gamma, monotonicity) {
            (RobinParameter::Dirichlet, Monotonicity::Decreasing) => true,
            (RobinParameter::Dirichlet, _) => false,
            (_, Monotonicity::Irregular { .. }) => false,
            _ => true,
        };
        if !expected_ok {
            warnings.push(format!(
                "branch n = {n}, gamma = {gamma}: unexpected shape {monotonicity:?}"
            ));
        }
        Ok(Self {
            gamma,
            n,
            samples,
            monotonicity,
            warnings,
            mu,
            c,
            boundary,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        self.mu.domain()
    }

    pub fn contains(&self, sigma: f64) -> bool {
        let (lo, hi) = self.domain();
        (lo..=hi).contains(&sigma)
    }

    /// `μ_n(σ)`; the end cubics extrapolate outside the domain.
    pub fn mu(&self, sigma: f64) -> f64 {
        self.mu.eval(sigma)
    }

    pub fn dmu(&self, sigma: f64) -> f64 {
        self.mu.deriv(sigma)
    }

    pub fn c(&self, sigma: f64) -> f64 {
        self.c.eval(sigma)
    }

    pub fn boundary_sq(&self, sigma: f64) -> f64 {
        self.boundary.eval(sigma)
    }

    /// Largest deviation of the interpolated `μ` from direct refined solves
    /// at `checks` cell midpoints spread over the table.
    pub fn interpolation_error(&self, model: &DeGennes, checks: usize) -> Result<f64> {
        let m = self.samples.len() - 1;
        let checks = checks.clamp(1, m);
        let errs: Result<Vec<f64>> = (0..checks)
            .into_par_iter()
            .map(|j| {
                let i = (j * m) / checks;
                let s = 0.5 * (self.samples[i].sigma + self.samples[i + 1].sigma);
                Ok((model.mu(self.gamma, s, self.n)? - self.mu(s)).abs())
            })
            .collect();
        Ok(errs?.into_iter().fold(0.0, f64::max))
    }
}

/// Slopes below this are solver noise on the flat tails and carry no sign.
const SLOPE_FLOOR: f64 = 1e-8;

fn classify(samples: &[ModeSample]) -> Monotonicity {
    let signs: Vec<f64> = samples
        .iter()
        .filter(|s| s.dmu.abs() > SLOPE_FLOOR)
        .map(|s| s.dmu.signum())
        .collect();
    let changes: Vec<usize> = signs
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, _)| i)
        .collect();
    match changes.as_slice() {
        [] if signs.first() == Some(&1.0) => Monotonicity::Increasing,
        [] => Monotonicity::Decreasing,
        [i] if signs[*i] < 0.0 => {
            let near = samples
                .iter()
                .min_by(|a, b| a.mu.total_cmp(&b.mu))
                .map(|s| s.sigma)
                .unwrap_or(f64::NAN);
            Monotonicity::SingleMinimum { near }
        }
        _ => Monotonicity::Irregular {
            sign_changes: changes.len(),
        },
    }
}

impl DeGennes {
    /// Samples branch `n` at `samples` equispaced points of `[lo, hi]`.
    pub fn dispersion_branch(
        &self,
        gamma: RobinParameter,
        n: usize,
        lo: f64,
        hi: f64,
        samples: usize,
    ) -> Result<DispersionBranch> {
        if n == 0 {
            return Err(Error::InvalidInput("branch index starts at 1".into()));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidInput(format!("bad sigma range [{lo}, {hi}]")));
        }
        if samples < DispersionBranch::MIN_SAMPLES {
            return Err(Error::InvalidInput(format!(
                "a branch table needs at least {} samples",
                DispersionBranch::MIN_SAMPLES
            )));
        }
        let step = (hi - lo) / (samples - 1) as f64;
        let rows: Result<Vec<ModeSample>> = (0..samples)
            .into_par_iter()
            .map(|i| {
                let s = if i + 1 == samples { hi } else { lo + step * i as f64 };
                self.mode(gamma, s, n)
            })
            .collect();
        DispersionBranch::from_samples(gamma, n, rows?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(sigma: f64, dmu: f64) -> ModeSample {
        ModeSample {
            n: 1,
            sigma,
            mu: 0.0,
            dmu,
            boundary_sq: 0.0,
            c: 0.0,
        }
    }

    #[test]
    fn classifies_shapes() {
        let dec: Vec<_> = (0..5).map(|i| sample(i as f64, -1.0)).collect();
        assert_eq!(classify(&dec), Monotonicity::Decreasing);
        let valley: Vec<_> = (0..5).map(|i| sample(i as f64, i as f64 - 2.5)).collect();
        assert!(matches!(classify(&valley), Monotonicity::SingleMinimum { .. }));
        let zig: Vec<_> = [1.0, -1.0, 1.0, -1.0]
            .iter()
            .enumerate()
            .map(|(i, d)| sample(i as f64, *d))
            .collect();
        assert_eq!(classify(&zig), Monotonicity::Irregular { sign_changes: 3 });
        let noisy_tail: Vec<_> = [-1.0, -0.5, 0.5, 1e-10, -1e-11, 2e-11]
            .iter()
            .enumerate()
            .map(|(i, d)| sample(i as f64, *d))
            .collect();
        assert!(matches!(classify(&noisy_tail), Monotonicity::SingleMinimum { .. }));
    }
}
