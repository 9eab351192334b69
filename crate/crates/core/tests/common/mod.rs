//! Independent oracles shared by the integration tests.
#![allow(dead_code)]

/// `u″ = ((t − σ)² − μ) u` integrated by RK4 from `u(0) = 1, u′(0) = γ`;
/// returns `u(T)`.
pub fn shoot(gamma: f64, sigma: f64, mu: f64) -> f64 {
    let t_end = 9.0 + sigma.max(0.0);
    let steps = 12_000;
    let h = t_end / steps as f64;
    let rhs = |t: f64, y: [f64; 2]| [y[1], ((t - sigma).powi(2) - mu) * y[0]];
    let mut y = [1.0, gamma];
    let mut t = 0.0;
    for _ in 0..steps {
        let k1 = rhs(t, y);
        let k2 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]]);
        let k3 = rhs(t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]]);
        let k4 = rhs(t + h, [y[0] + h * k3[0], y[1] + h * k3[1]]);
        for i in 0..2 {
            y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        }
        t += h;
        // rescale to keep the blow-up finite; only the sign matters
        let s = y[0].abs().max(y[1].abs());
        if s > 1e100 {
            y = [y[0] / s, y[1] / s];
        }
    }
    y[0]
}

/// Ground state by bisection on the sign of `u(T)` in `[lo, hi]`.
pub fn shoot_ground(gamma: f64, sigma: f64, mut lo: f64, mut hi: f64) -> f64 {
    assert!(shoot(gamma, sigma, lo) > 0.0 && shoot(gamma, sigma, hi) < 0.0);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if shoot(gamma, sigma, mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Golden-section search of the shooting ground state over `σ`.
pub fn shoot_theta(gamma: f64) -> (f64, f64) {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let f = |s: f64| shoot_ground(gamma, s, -3.0, 1.5);
    let (mut a, mut b) = (0.2, 1.4);
    let mut c = b - g * (b - a);
    let mut d = a + g * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    while b - a > 1e-7 {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - g * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + g * (b - a);
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}
