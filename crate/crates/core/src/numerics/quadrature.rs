//! Composite Newton–Cotes quadrature on uniform nodes, plus an adaptive
//! Simpson integrator for smooth callables.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RuleKind {
    Trapezoid,
    Simpson,
}

/// Nodes and positive weights of a composite rule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub kind: RuleKind,
}

impl QuadratureRule {
    /// Composite trapezoid rule with `n >= 2` nodes on `[a, b]`.
    pub fn trapezoid(a: f64, b: f64, n: usize) -> Result<Self> {
        check_interval(a, b, n)?;
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + h * i as f64).collect();
        let mut weights = vec![h; n];
        weights[0] = 0.5 * h;
        weights[n - 1] = 0.5 * h;
        Ok(Self {
            nodes,
            weights,
            kind: RuleKind::Trapezoid,
        })
    }

    /// Composite Simpson rule; `n` must be odd and at least 3.
    pub fn simpson(a: f64, b: f64, n: usize) -> Result<Self> {
        check_interval(a, b, n)?;
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidInput(format!(
                "Simpson rule needs an odd node count >= 3, got {n}"
            )));
        }
        let h = (b - a) / (n - 1) as f64;
        let nodes = (0..n).map(|i| a + h * i as f64).collect();
        let weights = (0..n)
            .map(|i| {
                let c = if i == 0 || i == n - 1 {
                    1.0
                } else if i % 2 == 1 {
                    4.0
                } else {
                    2.0
                };
                c * h / 3.0
            })
            .collect();
        Ok(Self {
            nodes,
            weights,
            kind: RuleKind::Simpson,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Applies the rule to pre-sampled values.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.weights.len() {
            return Err(Error::InvalidInput(format!(
                "{} samples for a {}-node rule",
                values.len(),
                self.weights.len()
            )));
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }

    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(x, w)| w * f(*x)).sum()
    }
}

fn check_interval(a: f64, b: f64, n: usize) -> Result<()> {
    if !(a.is_finite() && b.is_finite()) || b <= a {
        return Err(Error::InvalidInput(format!("bad interval [{a}, {b}]")));
    }
    if n < 2 {
        return Err(Error::InvalidInput("quadrature needs at least 2 nodes".into()));
    }
    Ok(())
}

/// Adaptive Simpson quadrature with Richardson correction.
pub fn adaptive_simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn step(
        f: &dyn Fn(f64) -> f64,
        a: f64,
        b: f64,
        fa: f64,
        fm: f64,
        fb: f64,
        whole: f64,
        tol: f64,
        depth: u32,
    ) -> f64 {
        let m = 0.5 * (a + b);
        let lm = 0.5 * (a + m);
        let rm = 0.5 * (m + b);
        let flm = f(lm);
        let frm = f(rm);
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1)
            + step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let fa = f(a);
    let fb = f(b);
    let fm = f(0.5 * (a + b));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    step(&f, a, b, fa, fm, fb, whole, tol, 50)
}
