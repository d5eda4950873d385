//! Independent reference values computed on the Fourier side.
#![allow(dead_code)]

use std::f64::consts::PI;

use fraclap::quadrature::{integrate_power_weighted, integrate_with_breaks, QuadratureSpec};
use fraclap::testfn::Func1;
use num_complex::Complex64;

const ORDERS: usize = 40;

fn spec() -> QuadratureSpec {
    QuadratureSpec::new(1e-12, 1e-11, 200_000).unwrap()
}

/// `(2 pi)^{-1/2} int |xi|^p Fu(xi) e^{i xi x} dxi`, the multiplier `|xi|^p` applied
/// to `u` at `x`. The frequency integral is cut at `X`; beyond it `int u e^{-i xi y}`
/// is replaced by its endpoint expansion and each exponential term is integrated
/// along a ray rotated into the half plane where it decays.
pub fn multiplier(u: &Func1, p: f64, x: f64) -> f64 {
    let (lo, hi) = u.hull().expect("nonzero function");
    let width = hi - lo;
    let panel = PI / width;
    let cut = (40.0 * u.max_frequency()).max(200.0 * panel);
    let sp = spec();
    let body = |xi: f64| (u.fourier_integral(xi) * Complex64::from_polar(1.0, xi * x)).re;
    let head = if p > -1.0 && p < 0.0 {
        integrate_power_weighted(body, panel, p, &sp).unwrap().value
    } else {
        integrate_with_breaks(|xi| xi.powf(p) * body(xi), 0.0, panel, &[], &sp).unwrap().value
    };
    let count = ((cut - panel) / panel).ceil() as usize;
    let breaks: Vec<f64> = (1..count).map(|i| panel + i as f64 * panel).collect();
    let mid = integrate_with_breaks(|xi| xi.powf(p) * body(xi), panel, cut, &breaks, &sp).unwrap().value;
    let mut tail = 0.0;
    for e in u.breakpoints() {
        let jumps = u.jumps(e, ORDERS);
        let d = x - e;
        assert!(d != 0.0, "oracle point on a breakpoint");
        let dir = Complex64::new(0.0, d.signum());
        let term = |t: f64| -> f64 {
            let xi = Complex64::new(cut, 0.0) + dir * t;
            let mut a = Complex64::new(0.0, 0.0);
            let mut w = Complex64::new(0.0, 1.0) * xi;
            for j in jumps.iter() {
                a += *j / w;
                w *= Complex64::new(0.0, 1.0) * xi;
            }
            (dir * xi.powf(p) * (Complex64::new(0.0, 1.0) * xi * d).exp() * a).re
        };
        let end = 60.0 / d.abs();
        let marks: Vec<f64> = (1..60).map(|i| i as f64 / d.abs()).collect();
        tail += integrate_with_breaks(term, 0.0, end, &marks, &sp).unwrap().value;
    }
    (head + mid + tail) / PI
}

/// Restricted Dirichlet operator of order `s` at `x` from the multiplier.
pub fn dr_oracle(u: &Func1, s: f64, x: f64) -> f64 {
    multiplier(u, 2.0 * s, x)
}

/// Riesz potential of order `sigma` at `x` from the multiplier.
pub fn riesz_oracle(u: &Func1, sigma: f64, x: f64) -> f64 {
    multiplier(u, -2.0 * sigma, x)
}

/// Closed form of `(-D^2)^s` applied to a polynomial `sum c_m x^m` on `[a, b]`,
/// extended by zero, at an interior `x`, from
/// `int_a^b (y - x)^m |x-y|^{-1-2s} dy` in finite-part form.
pub fn polynomial_dr(coeffs: &[f64], a: f64, b: f64, s: f64, x: f64) -> f64 {
    // expand u around x: u(y) = sum d_m (y - x)^m
    let n = coeffs.len();
    let mut d = vec![0.0; n];
    for (m, &c) in coeffs.iter().enumerate() {
        // x^m at y = x + h: sum_k C(m,k) x^{m-k} h^k
        let mut binom = 1.0;
        for k in 0..=m {
            d[k] += c * binom * x.powi((m - k) as i32);
            binom = binom * (m - k) as f64 / (k + 1) as f64;
        }
    }
    // (-D^2)^s u(x) = C PV int (u(x) - u(y)) |x - y|^{-1-2s} dy
    //   = C [ u(x) int_R\[a,b] |h|^{-1-2s} - sum_{m>=1} d_m FP int_{a-x}^{b-x} h^m |h|^{-1-2s} dh ]
    let c = 4f64.powf(s) * gamma(0.5 + s) / (PI.sqrt() * gamma(-s).abs());
    let l = x - a;
    let r = b - x;
    let exterior = (l.powf(-2.0 * s) + r.powf(-2.0 * s)) / (2.0 * s);
    let mut acc = d[0] * exterior;
    for m in 1..n {
        let e = m as f64 - 2.0 * s;
        // int_0^r h^{m-1-2s} + (-1)^m int_0^l h^{m-1-2s}; the m = 1 term is a principal value
        let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
        let part = if e.abs() < 1e-12 && sign < 0.0 { (r / l).ln() } else { (r.powf(e) + sign * l.powf(e)) / e };
        acc -= d[m] * part;
    }
    c * acc
}

/// Gamma function by the reflection formula and a Stirling series; independent of
/// the library implementation.
pub fn gamma(x: f64) -> f64 {
    if x < 0.5 {
        return PI / ((PI * x).sin() * gamma(1.0 - x));
    }
    let mut y = x;
    let mut shift = 1.0;
    while y < 20.0 {
        shift *= y;
        y += 1.0;
    }
    let series = 1.0 + 1.0 / (12.0 * y) + 1.0 / (288.0 * y * y) - 139.0 / (51840.0 * y.powi(3))
        - 571.0 / (2488320.0 * y.powi(4))
        + 163879.0 / (209018880.0 * y.powi(5));
    (2.0 * PI / y).sqrt() * (y / std::f64::consts::E).powf(y) * series / shift
}
