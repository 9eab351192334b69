//! Piecewise-cubic interpolation on strictly increasing abscissae.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Piecewise cubic Hermite interpolant from values and slopes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicHermite {
    x: Vec<f64>,
    y: Vec<f64>,
    dy: Vec<f64>,
}

impl CubicHermite {
    pub fn new(x: Vec<f64>, y: Vec<f64>, dy: Vec<f64>) -> Result<Self> {
        if x.len() < 2 || y.len() != x.len() || dy.len() != x.len() {
            return Err(Error::InvalidInput(
                "Hermite interpolant needs >= 2 nodes and matching lengths".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        Ok(Self { x, y, dy })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn values(&self) -> &[f64] {
        &self.y
    }

    pub fn slopes(&self) -> &[f64] {
        &self.dy
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }

    fn locate(&self, t: f64) -> usize {
        let i = self.x.partition_point(|&v| v <= t);
        i.saturating_sub(1).min(self.x.len() - 2)
    }

    /// Value, first and second derivative at `t` (end cubics extrapolate).
    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        let i = self.locate(t);
        let h = self.x[i + 1] - self.x[i];
        let s = (t - self.x[i]) / h;
        let (y0, y1) = (self.y[i], self.y[i + 1]);
        let (m0, m1) = (self.dy[i] * h, self.dy[i + 1] * h);
        let s2 = s * s;
        let s3 = s2 * s;
        let v = (2.0 * s3 - 3.0 * s2 + 1.0) * y0
            + (s3 - 2.0 * s2 + s) * m0
            + (-2.0 * s3 + 3.0 * s2) * y1
            + (s3 - s2) * m1;
        let d = ((6.0 * s2 - 6.0 * s) * y0
            + (3.0 * s2 - 4.0 * s + 1.0) * m0
            + (-6.0 * s2 + 6.0 * s) * y1
            + (3.0 * s2 - 2.0 * s) * m1)
            / h;
        let dd = ((12.0 * s - 6.0) * y0
            + (6.0 * s - 4.0) * m0
            + (-12.0 * s + 6.0) * y1
            + (6.0 * s - 2.0) * m1)
            / (h * h);
        (v, d, dd)
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.eval_all(t).0
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.eval_all(t).1
    }
}

/// Not-a-knot cubic spline through `(x, y)`; stored in Hermite form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicSpline(CubicHermite);

impl CubicSpline {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        let n = x.len();
        if n < 4 || y.len() != n {
            return Err(Error::InvalidInput(
                "not-a-knot spline needs >= 4 nodes and matching lengths".into(),
            ));
        }
        if x.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidInput("abscissae must be strictly increasing".into()));
        }
        let dx: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / dx[i]).collect();

        // Tridiagonal system for the slopes.
        let mut sub = vec![0.0; n];
        let mut dia = vec![0.0; n];
        let mut sup = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        dia[0] = dx[1];
        sup[0] = dx[0] + dx[1];
        rhs[0] = ((dx[0] + 2.0 * sup[0]) * dx[1] * del[0] + dx[0] * dx[0] * del[1]) / sup[0];
        for i in 1..n - 1 {
            sub[i] = dx[i];
            dia[i] = 2.0 * (dx[i - 1] + dx[i]);
            sup[i] = dx[i - 1];
            rhs[i] = 3.0 * (dx[i] * del[i - 1] + dx[i - 1] * del[i]);
        }
        let (a, b) = (dx[n - 2], dx[n - 3]);
        sub[n - 1] = a + b;
        dia[n - 1] = b;
        rhs[n - 1] = (a * a * del[n - 3] + (2.0 * (a + b) + a) * b * del[n - 2]) / (a + b);

        let slopes = solve_tridiagonal(&sub, &dia, &sup, &rhs)?;
        Ok(Self(CubicHermite::new(x, y, slopes)?))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.0.eval(t)
    }

    pub fn deriv(&self, t: f64) -> f64 {
        self.0.deriv(t)
    }

    pub fn eval_all(&self, t: f64) -> (f64, f64, f64) {
        self.0.eval_all(t)
    }

    pub fn domain(&self) -> (f64, f64) {
        self.0.domain()
    }

    pub fn as_hermite(&self) -> &CubicHermite {
        &self.0
    }
}

/// Gaussian elimination with partial pivoting on a general tridiagonal
/// system (`sub[0]` and `sup[n-1]` unused).
fn solve_tridiagonal(sub: &[f64], dia: &[f64], sup: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = dia.len();
    // Dense banded copy: rows hold (diag, sup, sup2) after pivoting.
    let mut d = dia.to_vec();
    let mut u = sup.to_vec();
    let mut u2 = vec![0.0; n];
    let mut l = sub.to_vec();
    let mut b = rhs.to_vec();
    for i in 0..n - 1 {
        let below = l[i + 1];
        if below.abs() > d[i].abs() {
            // swap rows i and i+1
            let (di, ui, u2i, bi) = (d[i], u[i], u2[i], b[i]);
            d[i] = below;
            u[i] = d[i + 1];
            u2[i] = u[i + 1];
            b[i] = b[i + 1];
            l[i + 1] = di;
            d[i + 1] = ui;
            u[i + 1] = u2i;
            b[i + 1] = bi;
        }
        if d[i] == 0.0 {
            return Err(Error::InvalidInput("singular spline system".into()));
        }
        let f = l[i + 1] / d[i];
        d[i + 1] -= f * u[i];
        u[i + 1] -= f * u2[i];
        b[i + 1] -= f * b[i];
    }
    if d[n - 1] == 0.0 {
        return Err(Error::InvalidInput("singular spline system".into()));
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut acc = b[i];
        if i + 1 < n {
            acc -= u[i] * x[i + 1];
        }
        if i + 2 < n {
            acc -= u2[i] * x[i + 2];
        }
        x[i] = acc / d[i];
    }
    Ok(x)
}
