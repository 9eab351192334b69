//! Finite differences and Richardson extrapolation.

/// Combines results at step `h` (`coarse`) and `h/2` (`fine`) of a method
/// with leading error `O(h^order)`.
pub fn richardson(coarse: f64, fine: f64, order: i32) -> f64 {
    let r = 2f64.powi(order);
    (r * fine - coarse) / (r - 1.0)
}

/// Central second difference at steps `h0` and `h0/2`, Richardson-combined
/// to fourth order.
pub fn second_derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    let f0 = f(x);
    let d2 = |h: f64| (f(x + h) - 2.0 * f0 + f(x - h)) / (h * h);
    richardson(d2(h0), d2(0.5 * h0), 2)
}

/// Central first difference, Richardson-combined to fourth order.
pub fn first_derivative(f: impl Fn(f64) -> f64, x: f64, h0: f64) -> f64 {
    let d1 = |h: f64| (f(x + h) - f(x - h)) / (2.0 * h);
    richardson(d1(h0), d1(0.5 * h0), 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sine_at_zero() {
        assert!(second_derivative(f64::sin, 0.0, 1e-2).abs() < 1e-8);
    }

    #[test]
    fn quartic() {
        let v = second_derivative(|x| x.powi(4), 1.0, 1e-2);
        assert!((v - 12.0).abs() < 1e-6, "{v}");
    }

    #[test]
    fn first_derivative_exp() {
        let v = first_derivative(f64::exp, 0.5, 1e-2);
        assert!((v - 0.5f64.exp()).abs() < 1e-9);
    }
}
