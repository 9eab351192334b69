//! Preimages of an energy window `[a, b]` under the dispersion curves.

use serde::{Deserialize, Serialize};

use super::{BranchExtremum, DeGennes, RobinParameter};
use crate::error::{Error, Result};
use crate::numerics::brent_root;

/// Distance below which a window endpoint counts as sitting on a threshold.
pub const THRESHOLD_GAP: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Decreasing,
    Increasing,
    /// The window reaches below the branch minimum.
    ContainsMinimum,
}

/// One connected piece `[lo, hi]` of `μ_k^{-1}([a, b])`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub k: usize,
    /// 1 left of the minimum, 2 right of it.
    pub q: usize,
    pub shape: Shape,
    pub lo: f64,
    pub hi: f64,
}

impl Component {
    pub fn contains(&self, sigma: f64) -> bool {
        (self.lo..=self.hi).contains(&sigma)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WindowDecomposition {
    pub gamma: RobinParameter,
    pub a: f64,
    pub b: f64,
    /// Landau band index: `2n − 3 < a < b < 2n − 1`.
    pub n: usize,
    /// Number of branches meeting the window.
    pub curve_count: usize,
    /// Minima of branches `1..=n` (empty under Dirichlet).
    pub extrema: Vec<BranchExtremum>,
    pub components: Vec<Component>,
}

impl WindowDecomposition {
    pub fn components_of(&self, k: usize) -> impl Iterator<Item = &Component> {
        self.components.iter().filter(move |c| c.k == k)
    }

    /// True if branch `k` has no piece in the window.
    pub fn window_is_empty_for(&self, k: usize) -> bool {
        self.components_of(k).next().is_none()
    }

    /// Smallest interval containing every component.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let lo = self.components.iter().map(|c| c.lo).reduce(f64::min)?;
        let hi = self.components.iter().map(|c| c.hi).reduce(f64::max)?;
        Some((lo, hi))
    }
}

/// Band index of a window, or why it is not admissible.
pub fn band_index(a: f64, b: f64) -> Result<usize> {
    let irregular = |reason: String| Error::IrregularWindow { a, b, reason };
    if a.is_nan() || !b.is_finite() || a >= b {
        return Err(irregular("need a < b with b finite".into()));
    }
    if a == f64::NEG_INFINITY || a < 1.0 {
        if b >= 1.0 - THRESHOLD_GAP {
            return Err(irregular("window meets the Landau level 1".into()));
        }
        return Ok(1);
    }
    let n = ((a + 3.0) / 2.0).floor() as usize;
    let lower = (2 * n) as f64 - 3.0;
    let upper = (2 * n) as f64 - 1.0;
    if a - lower < THRESHOLD_GAP || upper - b < THRESHOLD_GAP {
        return Err(irregular(format!(
            "window must sit strictly between the Landau levels {lower} and {upper}"
        )));
    }
    Ok(n)
}

impl DeGennes {
    /// Splits `μ_k^{-1}([a, b])`, `k = 1..=n`, into monotone pieces.
    /// `a = −∞` is accepted in the lowest band.
    pub fn window_decomposition(
        &self,
        gamma: RobinParameter,
        a: f64,
        b: f64,
    ) -> Result<WindowDecomposition> {
        let n = band_index(a, b)?;
        let mut components = Vec::new();
        let mut extrema = Vec::new();
        let level = |k: usize, e: f64, ends: (f64, f64), sign: f64| {
            self.level_crossing(gamma, k, e, ends, sign)
        };

        for k in 1..=n {
            match gamma {
                RobinParameter::Dirichlet => {
                    if k == n {
                        continue;
                    }
                    let lo = level(k, b, (0.0, 0.0), 1.0)?;
                    let hi = level(k, a, (0.0, 0.0), 1.0)?;
                    components.push(Component { k, q: 1, shape: Shape::Decreasing, lo, hi });
                }
                RobinParameter::Robin(g) => {
                    let ext = self.find_minimum(g, k)?;
                    extrema.push(ext);
                    let theta = ext.theta;
                    for e in [a, b] {
                        if (e - theta).abs() < THRESHOLD_GAP {
                            return Err(Error::IrregularWindow {
                                a,
                                b,
                                reason: format!("endpoint {e} sits on the branch minimum {theta}"),
                            });
                        }
                    }
                    if k < n {
                        // the whole window lies above Θ^[k−1] and below the
                        // limit 2k − 1 < a is never reached on the right
                        let lo = level(k, b, (ext.xi, ext.xi), 1.0)?;
                        let hi = level(k, a, (ext.xi, ext.xi), 1.0)?;
                        components.push(Component { k, q: 1, shape: Shape::Decreasing, lo, hi });
                        continue;
                    }
                    if b < theta {
                        continue;
                    }
                    let left_b = level(k, b, (ext.xi, ext.xi), 1.0)?;
                    let right_b = level(k, b, (ext.xi, ext.xi), -1.0)?;
                    if a < theta {
                        components.push(Component {
                            k,
                            q: 1,
                            shape: Shape::ContainsMinimum,
                            lo: left_b,
                            hi: right_b,
                        });
                    } else {
                        let left_a = level(k, a, (ext.xi, ext.xi), 1.0)?;
                        let right_a = level(k, a, (ext.xi, ext.xi), -1.0)?;
                        components.push(Component {
                            k,
                            q: 1,
                            shape: Shape::Decreasing,
                            lo: left_b,
                            hi: left_a,
                        });
                        components.push(Component {
                            k,
                            q: 2,
                            shape: Shape::Increasing,
                            lo: right_a,
                            hi: right_b,
                        });
                    }
                }
            }
        }
        let mut ks: Vec<usize> = components.iter().map(|c| c.k).collect();
        ks.dedup();
        Ok(WindowDecomposition {
            gamma,
            a,
            b,
            n,
            curve_count: ks.len(),
            extrema,
            components,
        })
    }

    /// The `σ` with `μ_k(σ) = e` on a monotone stretch of the branch.
    /// `left` and `right` are starting points on either side of the root;
    /// each is pushed outward (leftward for `left`) until the sign of
    /// `μ_k − e` there is `left_sign`, respectively its opposite.
    fn level_crossing(
        &self,
        gamma: RobinParameter,
        k: usize,
        e: f64,
        (left, right): (f64, f64),
        left_sign: f64,
    ) -> Result<f64> {
        let f = |s: f64| self.mu(gamma, s, k).map(|m| m - e);
        let push = |start: f64, dir: f64, sign: f64| -> Result<f64> {
            let mut s = start;
            let mut step = 0.5;
            while f(s)?.signum() != sign {
                if step > 64.0 {
                    return Err(Error::Hypothesis(format!(
                        "branch {k} does not cross {e} near sigma = {start}"
                    )));
                }
                s = start + dir * step;
                step *= 2.0;
            }
            Ok(s)
        };
        let lo = push(left, -1.0, left_sign)?;
        let hi = push(right, 1.0, -left_sign)?;
        let err = std::cell::RefCell::new(None);
        let root = brent_root(
            |s| match f(s) {
                Ok(v) => v,
                Err(x) => {
                    err.borrow_mut().get_or_insert(x);
                    f64::NAN
                }
            },
            lo,
            hi,
            1e-12,
        );
        match err.into_inner() {
            Some(x) => Err(x),
            None => root,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_indices() {
        assert_eq!(band_index(0.7, 0.9).unwrap(), 1);
        assert_eq!(band_index(f64::NEG_INFINITY, 0.9).unwrap(), 1);
        assert_eq!(band_index(1.5, 2.5).unwrap(), 2);
        assert_eq!(band_index(3.2, 4.9).unwrap(), 3);
        assert!(band_index(0.5, 1.5).is_err());
        assert!(band_index(0.9, 0.7).is_err());
        assert!(band_index(1.0, 2.0).is_err());
    }
}
