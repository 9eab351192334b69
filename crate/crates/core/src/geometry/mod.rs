//! Boundary data of smooth simply connected planar domains: half-length
//! `L`, area, curvature sampled uniformly in arclength, and the Fourier
//! coefficients of the curvature.
//!
//! Curves are given by a smooth `2π`-periodic parametrisation. The speed
//! `|γ′(φ)|` is expanded in a Fourier series, so `s(φ)` is available in
//! closed form to spectral accuracy and is inverted by Newton's method at
//! the uniform arclength nodes.

mod extremum;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use extremum::{curvature_extremum, symmetric_extremum, CurvatureExtremum, Direction};

pub const DEFAULT_SAMPLES: usize = 1024;

/// Largest accepted Gauss–Bonnet residual for constructed curves.
pub const GAUSS_BONNET_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeometryKind {
    Disk { radius: f64 },
    Ellipse { a: f64, b: f64 },
    Custom,
}

/// A radial function `r(φ) = c₀ + Σ_{j≥1} (c_j cos jφ + s_j sin jφ)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RadialFourier {
    /// `c₀, c₁, …`
    pub cos: Vec<f64>,
    /// `s₁, s₂, …`
    pub sin: Vec<f64>,
}

impl RadialFourier {
    /// `[r, r′, r″]` at `φ`.
    pub fn eval(&self, phi: f64) -> [f64; 3] {
        let mut out = [self.cos.first().copied().unwrap_or(0.0), 0.0, 0.0];
        let terms = self
            .cos
            .iter()
            .enumerate()
            .skip(1)
            .map(|(j, c)| (j, *c, 0.0))
            .chain(self.sin.iter().enumerate().map(|(j, s)| (j + 1, 0.0, *s)));
        for (j, c, s) in terms {
            let w = j as f64;
            let (sn, cs) = (w * phi).sin_cos();
            out[0] += c * cs + s * sn;
            out[1] += w * (-c * sn + s * cs);
            out[2] -= w * w * (c * cs + s * sn);
        }
        out
    }
}

/// Boundary of a domain, traversed counterclockwise from `s = 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DomainGeometry {
    pub kind: GeometryKind,
    /// Half the perimeter: `|∂Ω| = 2L`.
    pub half_length: f64,
    pub area: f64,
    /// `κ(s_i)` at `s_i = 2L·i/M`.
    pub kappa: Vec<f64>,
    /// `κ̂_j = (1/M) Σ_i κ(s_i) e^{−2πi ij/M}`, index `j mod M`, so that
    /// `κ(s) = Σ_j κ̂_j e^{iπjs/L}`.
    pub kappa_fourier: Vec<Complex64>,
}

/// Position and first two derivatives `[x, y, x′, y′, x″, y″]` at `φ`.
type Parametrisation<'a> = dyn Fn(f64) -> [f64; 6] + 'a;

impl DomainGeometry {
    pub fn disk(radius: f64) -> Result<Self> {
        Self::disk_with(radius, DEFAULT_SAMPLES)
    }

    pub fn disk_with(radius: f64, samples: usize) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::Geometry(format!("disk radius must be positive, got {radius}")));
        }
        check_samples(samples)?;
        let mut kappa_fourier = vec![Complex64::new(0.0, 0.0); samples];
        kappa_fourier[0] = Complex64::new(1.0 / radius, 0.0);
        Ok(Self {
            kind: GeometryKind::Disk { radius },
            half_length: PI * radius,
            area: PI * radius * radius,
            kappa: vec![1.0 / radius; samples],
            kappa_fourier,
        })
    }

    /// Ellipse with semi-axes `a ≥ b > 0`, the major axis along `x`; `s = 0`
    /// sits at `(a, 0)`.
    pub fn ellipse(a: f64, b: f64, samples: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite() && b > 0.0 && a >= b) {
            return Err(Error::Geometry(format!("ellipse needs a >= b > 0, got a = {a}, b = {b}")));
        }
        let curve = move |p: f64| {
            let (sn, cs) = p.sin_cos();
            [a * cs, b * sn, -a * sn, b * cs, -a * cs, -b * sn]
        };
        Self::from_parametrisation(GeometryKind::Ellipse { a, b }, samples, &curve)
    }

    /// Star-shaped domain `{ρ < r(φ)}` in polar coordinates.
    pub fn custom_from_radius(r: &RadialFourier, samples: usize) -> Result<Self> {
        let probe = 4 * samples.max(256);
        if (0..probe).any(|i| r.eval(TAU * i as f64 / probe as f64)[0] <= 0.0) {
            return Err(Error::Geometry("radial function must stay positive".into()));
        }
        let curve = |p: f64| {
            let [rho, d1, d2] = r.eval(p);
            let (sn, cs) = p.sin_cos();
            [
                rho * cs,
                rho * sn,
                d1 * cs - rho * sn,
                d1 * sn + rho * cs,
                d2 * cs - 2.0 * d1 * sn - rho * cs,
                d2 * sn + 2.0 * d1 * cs - rho * sn,
            ]
        };
        let g = Self::from_parametrisation(GeometryKind::Custom, samples, &curve)?;
        let residual = g.gauss_bonnet_residual();
        if residual > 1e-6 {
            return Err(Error::Geometry(format!(
                "Gauss-Bonnet residual {residual:e}: curve is not a simple closed curve"
            )));
        }
        Ok(g)
    }

    fn from_parametrisation(
        kind: GeometryKind,
        samples: usize,
        curve: &Parametrisation<'_>,
    ) -> Result<Self> {
        check_samples(samples)?;
        let fine = (4 * samples).max(4096);
        let nodes: Vec<f64> = (0..fine).map(|i| TAU * i as f64 / fine as f64).collect();
        let signed_area = 0.5 * TAU / fine as f64
            * nodes
                .iter()
                .map(|&p| {
                    let [x, y, dx, dy, ..] = curve(p);
                    x * dy - y * dx
                })
                .sum::<f64>();
        if signed_area == 0.0 || !signed_area.is_finite() {
            return Err(Error::Geometry("curve encloses no area".into()));
        }
        // Clockwise input: run the parameter backwards.
        let flipped = |p: f64| {
            let [x, y, dx, dy, ddx, ddy] = curve(-p);
            [x, y, -dx, -dy, ddx, ddy]
        };
        let curve: &Parametrisation<'_> = if signed_area < 0.0 { &flipped } else { curve };

        let speed = |p: f64| {
            let [_, _, dx, dy, ..] = curve(p);
            dx.hypot(dy)
        };
        let mut v: Vec<Complex64> = nodes.iter().map(|&p| Complex64::new(speed(p), 0.0)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(fine).process(&mut v);
        v.iter_mut().for_each(|c| *c /= fine as f64);
        let v0 = v[0].re;
        let tail = v[fine / 2 - 8..=fine / 2].iter().map(|c| c.norm()).fold(0.0, f64::max);
        if tail > 1e-13 * v0 {
            return Err(Error::Geometry(format!(
                "parametrisation not resolved by {fine} nodes (tail {tail:e})"
            )));
        }
        let modes: Vec<(f64, Complex64)> = (1..fine / 2)
            .filter(|&j| v[j].norm() > 1e-17 * v0)
            .map(|j| (j as f64, v[j]))
            .collect();
        let arclength = |p: f64| {
            let mut s = v0 * p;
            for &(j, c) in &modes {
                // 2 Re[c (e^{ijφ} − 1)/(ij)]
                let (sn, cs) = (j * p).sin_cos();
                s += 2.0 * (c.re * sn + c.im * (cs - 1.0)) / j;
            }
            s
        };
        let perimeter = TAU * v0;
        let half_length = 0.5 * perimeter;

        let mut kappa = Vec::with_capacity(samples);
        for i in 0..samples {
            let target = perimeter * i as f64 / samples as f64;
            let mut p = TAU * i as f64 / samples as f64;
            for _ in 0..60 {
                let dp = (arclength(p) - target) / speed(p);
                p -= dp;
                if dp.abs() < 1e-15 {
                    break;
                }
            }
            let [_, _, dx, dy, ddx, ddy] = curve(p);
            kappa.push((dx * ddy - dy * ddx) / dx.hypot(dy).powi(3));
        }
        let kappa_fourier = fourier(&kappa);
        let g = Self {
            kind,
            half_length,
            area: signed_area.abs(),
            kappa,
            kappa_fourier,
        };
        let residual = g.gauss_bonnet_residual();
        if residual > GAUSS_BONNET_TOL {
            return Err(Error::Geometry(format!("Gauss-Bonnet residual {residual:e}")));
        }
        Ok(g)
    }

    pub fn samples(&self) -> usize {
        self.kappa.len()
    }

    pub fn perimeter(&self) -> f64 {
        2.0 * self.half_length
    }

    /// Arclength spacing of the curvature samples.
    pub fn spacing(&self) -> f64 {
        self.perimeter() / self.samples() as f64
    }

    pub fn arclength(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// `⟨κ⟩ = (1/2L) ∫ κ ds`, which equals `π/L`.
    pub fn mean_curvature(&self) -> f64 {
        self.kappa_fourier[0].re
    }

    /// `∫ κ ds`.
    pub fn total_curvature(&self) -> f64 {
        self.perimeter() * self.mean_curvature()
    }

    /// `|∫ κ ds − 2π|`.
    pub fn gauss_bonnet_residual(&self) -> f64 {
        (self.total_curvature() - TAU).abs()
    }

    /// `κ̂_j`, zero beyond the resolved band `|j| ≤ M/2 − 1`.
    pub fn kappa_hat(&self, j: i64) -> Complex64 {
        let m = self.samples() as i64;
        if j.abs() >= m / 2 {
            return Complex64::new(0.0, 0.0);
        }
        self.kappa_fourier[j.rem_euclid(m) as usize]
    }

    /// True if every `κ̂_j` is real to `tol`.
    pub fn has_real_fourier(&self, tol: f64) -> bool {
        self.kappa_fourier.iter().all(|c| c.im.abs() <= tol)
    }

    /// `(κ, κ′, κ″)` of the trigonometric interpolant at `s`.
    pub fn kappa_derivs(&self, s: f64) -> (f64, f64, f64) {
        let j_max = self.samples() as i64 / 2 - 1;
        let w = PI / self.half_length;
        let (mut v, mut d, mut dd) = (self.kappa_fourier[0].re, 0.0, 0.0);
        for j in 1..=j_max {
            let c = self.kappa_hat(j);
            let k = w * j as f64;
            let (sn, cs) = (k * s).sin_cos();
            // 2 Re[c e^{iks}] and its derivatives
            let re = c.re * cs - c.im * sn;
            let im = c.re * sn + c.im * cs;
            v += 2.0 * re;
            d -= 2.0 * k * im;
            dd -= 2.0 * k * k * re;
        }
        (v, d, dd)
    }

    pub fn kappa_at(&self, s: f64) -> f64 {
        self.kappa_derivs(s).0
    }

    /// The same domain with the arclength origin moved to `s0`.
    pub fn shifted(&self, s0: f64) -> Self {
        let m = self.samples();
        let w = PI / self.half_length;
        let kappa_fourier: Vec<Complex64> = (0..m)
            .map(|idx| {
                let j = if idx < m / 2 { idx as f64 } else { idx as f64 - m as f64 };
                self.kappa_fourier[idx] * Complex64::from_polar(1.0, w * j * s0)
            })
            .collect();
        let kappa = (0..m).map(|i| self.kappa_at(self.arclength(i) + s0)).collect();
        Self {
            kind: GeometryKind::Custom,
            half_length: self.half_length,
            area: self.area,
            kappa,
            kappa_fourier,
        }
    }

    pub fn summary(&self) -> GeometrySummary {
        let (kmin, kmax) = self
            .kappa
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), k| (lo.min(*k), hi.max(*k)));
        GeometrySummary {
            kind: self.kind,
            half_length: self.half_length,
            area: self.area,
            mean_curvature: self.mean_curvature(),
            kappa_min: kmin,
            kappa_max: kmax,
            gauss_bonnet_residual: self.gauss_bonnet_residual(),
            samples: self.samples(),
        }
    }
}

/// Scalar summary for reports.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometrySummary {
    pub kind: GeometryKind,
    pub half_length: f64,
    pub area: f64,
    pub mean_curvature: f64,
    pub kappa_min: f64,
    pub kappa_max: f64,
    pub gauss_bonnet_residual: f64,
    pub samples: usize,
}

fn check_samples(m: usize) -> Result<()> {
    if m < 16 || !m.is_power_of_two() {
        return Err(Error::Geometry(format!(
            "sample count must be a power of two >= 16, got {m}"
        )));
    }
    Ok(())
}

/// `(1/M) Σ_i x_i e^{−2πi ij/M}`.
fn fourier(x: &[f64]) -> Vec<Complex64> {
    let m = x.len();
    let mut buf: Vec<Complex64> = x.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(m).process(&mut buf);
    buf.iter_mut().for_each(|c| *c /= m as f64);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_fields() {
        let g = DomainGeometry::disk(2.0).unwrap();
        assert!((g.half_length - TAU).abs() < 1e-15);
        assert!((g.area - 4.0 * PI).abs() < 1e-14);
        assert!(g.kappa.iter().all(|k| *k == 0.5));
        assert!(g.gauss_bonnet_residual() < 1e-14);
        assert!(DomainGeometry::disk(0.0).is_err());
        assert!(DomainGeometry::disk_with(1.0, 100).is_err());
    }

    #[test]
    fn circle_limit_of_ellipse() {
        let e = DomainGeometry::ellipse(1.5, 1.5, 256).unwrap();
        let d = DomainGeometry::disk_with(1.5, 256).unwrap();
        assert!((e.half_length - d.half_length).abs() < 1e-10);
        assert!((e.area - d.area).abs() < 1e-10);
        for (a, b) in e.kappa.iter().zip(&d.kappa) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn clockwise_input_is_reversed() {
        let cw = |p: f64| {
            let (sn, cs) = (-p).sin_cos();
            [2.0 * cs, sn, 2.0 * sn, -cs, -2.0 * cs, -sn]
        };
        let g = DomainGeometry::from_parametrisation(GeometryKind::Custom, 256, &cw).unwrap();
        assert!(g.area > 0.0);
        assert!(g.kappa.iter().all(|k| *k > 0.0));
    }

    #[test]
    fn radial_fourier_derivatives() {
        let r = RadialFourier {
            cos: vec![1.0, 0.0, 0.1],
            sin: vec![0.0, 0.0, 0.05],
        };
        let p = 0.3;
        let h = 1e-5;
        let [v, d, dd] = r.eval(p);
        let fd = (r.eval(p + h)[0] - r.eval(p - h)[0]) / (2.0 * h);
        let fdd = (r.eval(p + h)[1] - r.eval(p - h)[1]) / (2.0 * h);
        assert!((d - fd).abs() < 1e-8);
        assert!((dd - fdd).abs() < 1e-8);
        assert!((v - (1.0 + 0.1 * (2.0 * p).cos() + 0.05 * (3.0 * p).sin())).abs() < 1e-15);
    }

    #[test]
    fn non_positive_radius_rejected() {
        let r = RadialFourier {
            cos: vec![0.5, 1.0],
            sin: vec![],
        };
        assert!(DomainGeometry::custom_from_radius(&r, 256).is_err());
    }
}
