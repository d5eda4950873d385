//! Special functions and normalising constants.
//!
//! Everything here is a pure function of its arguments. The modified Bessel
//! function is evaluated from `K_nu(tau) = int_0^inf exp(-tau cosh t) cosh(nu t) dt`
//! with a truncated trapezoidal rule; the integrand is analytic in a strip of
//! half-width pi/2, so the rule converges geometrically and halving the step
//! gives a cheap error estimate.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A numerically estimated scalar together with an absolute error estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub value: f64,
    pub abs_error: f64,
}

impl EvalResult {
    pub fn new(value: f64, abs_error: f64) -> Self {
        debug_assert!(abs_error >= 0.0);
        Self { value, abs_error }
    }

    pub fn exact(value: f64) -> Self {
        Self { value, abs_error: 0.0 }
    }

    pub fn scale(self, c: f64) -> Self {
        Self { value: c * self.value, abs_error: c.abs() * self.abs_error }
    }
}

/// Order of the modified Bessel function `K_nu`. Only `nu >= 0` is stored;
/// negative orders are folded with `K_{-nu} = K_nu`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !nu.is_finite() {
            return Err(Error::domain("BesselOrder", format!("order {nu} is not finite")));
        }
        Ok(Self(nu.abs()))
    }

    pub fn nu(self) -> f64 {
        self.0
    }
}

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

fn lanczos_sum(x: f64) -> f64 {
    // x is the shifted argument (Gamma(x + 1))
    let mut acc = LANCZOS[0];
    for (i, c) in LANCZOS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    acc
}

/// Gamma function for real arguments away from the poles.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("gamma_fn", format!("argument {x} is not finite")));
    }
    if x <= 0.0 && x == x.round() {
        return Err(Error::GammaPole(x));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // reflection
        PI / ((PI * x).sin() * gamma_unchecked(1.0 - x))
    } else if x > 20.0 {
        ln_gamma_positive(x).exp()
    } else {
        // argument reduction keeps the Lanczos sum in its most accurate range
        let mut y = x;
        let mut scale = 1.0;
        while y > 2.5 {
            y -= 1.0;
            scale *= y;
        }
        let z = y - 1.0;
        let t = z + LANCZOS_G + 0.5;
        scale * (2.0 * PI).sqrt() * t.powf(z + 0.5) * (-t).exp() * lanczos_sum(z)
    }
}

fn ln_gamma_positive(x: f64) -> f64 {
    let z = x - 1.0;
    let t = z + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + lanczos_sum(z).ln()
}

/// `ln Gamma(x)` for `x > 0`.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("ln_gamma", format!("argument {x} must be positive")));
    }
    if x < 20.0 {
        Ok(gamma_unchecked(x).ln())
    } else {
        Ok(ln_gamma_positive(x))
    }
}

fn k_integrand_log_peak(nu: f64, tau: f64) -> (f64, f64) {
    // maximiser of -tau cosh t + nu t
    let t_star = (nu / tau).asinh();
    (t_star, -tau * t_star.cosh() + nu * t_star)
}

fn k_trapezoid(nu: f64, tau: f64, h: f64, t_max: f64, shift: f64) -> f64 {
    // integrand scaled by exp(-shift)
    let f = |t: f64| (-tau * t.cosh() - shift).exp() * (nu * t).cosh();
    let n = (t_max / h).ceil() as usize;
    let mut sum = 0.5 * f(0.0);
    for i in 1..=n {
        sum += f(i as f64 * h);
    }
    sum * h
}

/// Modified Bessel function of the second kind `K_nu(tau)`, `tau > 0`.
pub fn bessel_k(order: BesselOrder, tau: f64) -> Result<EvalResult> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain("bessel_k", format!("tau = {tau} must be positive and finite")));
    }
    let nu = order.nu();
    if tau > 700.0 {
        return Ok(EvalResult::exact(0.0));
    }
    let (t_star, log_peak) = k_integrand_log_peak(nu, tau);
    let mut t_max = t_star + 0.5;
    while -tau * t_max.cosh() + nu * t_max > log_peak - 46.0 {
        t_max += 0.5;
    }
    // work with exp(-tau cosh t - shift) so that huge or tiny values stay representable
    let shift = log_peak;
    let coarse = k_trapezoid(nu, tau, 0.25, t_max, shift);
    let fine = k_trapezoid(nu, tau, 0.125, t_max, shift);
    let scale = log_peak.exp();
    let value = fine * scale;
    let err = ((fine - coarse).abs() * scale).max(8.0 * f64::EPSILON * value.abs());
    Ok(EvalResult::new(value, err))
}

fn check_sigma(what: &'static str, sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::domain(what, format!("sigma = {sigma} must lie in (0,1)")));
    }
    Ok(())
}

/// The half-cylinder profile `Q_sigma(tau) = 2^{1-sigma} tau^sigma K_sigma(tau) / Gamma(sigma)`.
///
/// `Q_sigma(0) = 1` is returned exactly.
pub fn q_kernel(sigma: f64, tau: f64) -> Result<EvalResult> {
    check_sigma("q_kernel", sigma)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::domain("q_kernel", format!("tau = {tau} must be non-negative")));
    }
    if tau == 0.0 {
        return Ok(EvalResult::exact(1.0));
    }
    if tau > 700.0 {
        return Ok(EvalResult::exact(0.0));
    }
    let k = bessel_k(BesselOrder(sigma), tau)?;
    let c = 2f64.powf(1.0 - sigma) * tau.powf(sigma) / gamma_unchecked(sigma);
    Ok(k.scale(c))
}

/// Derivative `Q_sigma'(tau) = -2^{1-sigma} tau^sigma K_{1-sigma}(tau) / Gamma(sigma)`,
/// which is `d/dtau [tau^nu K_nu] = -tau^nu K_{nu-1}` together with `K_{-nu} = K_nu`.
pub fn q_kernel_derivative(sigma: f64, tau: f64) -> Result<EvalResult> {
    check_sigma("q_kernel_derivative", sigma)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::domain("q_kernel_derivative", format!("tau = {tau} must be positive")));
    }
    if tau > 700.0 {
        return Ok(EvalResult::exact(0.0));
    }
    let k = bessel_k(BesselOrder(1.0 - sigma), tau)?;
    let c = -2f64.powf(1.0 - sigma) * tau.powf(sigma) / gamma_unchecked(sigma);
    Ok(k.scale(c))
}

/// `c_{n,s} = 2^{2s-1} pi^{-n/2} Gamma((n+2s)/2) / |Gamma(-s)|`, the constant in front
/// of the double-integral form.
pub fn gagliardo_constant(n: u32, s: f64) -> Result<f64> {
    if n == 0 {
        return Err(Error::domain("gagliardo_constant", "dimension must be positive"));
    }
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::domain("gagliardo_constant", format!("s = {s} must lie in (0,1)")));
    }
    let nf = n as f64;
    Ok(2f64.powf(2.0 * s - 1.0) * PI.powf(-nf / 2.0) * gamma_unchecked((nf + 2.0 * s) / 2.0)
        / gamma_unchecked(-s).abs())
}

/// Constant of the pointwise singular integral,
/// `(-Delta)^s u(x) = C PV int (u(x) - u(y)) |x-y|^{-n-2s} dy`, equal to `2 c_{n,s}`.
pub fn pointwise_constant(n: u32, s: f64) -> Result<f64> {
    Ok(2.0 * gagliardo_constant(n, s)?)
}

/// `C_sigma = 4^sigma Gamma(1+sigma) / Gamma(1-sigma)`.
pub fn extension_constant(sigma: f64) -> Result<f64> {
    check_sigma("extension_constant", sigma)?;
    Ok(4f64.powf(sigma) * gamma_unchecked(1.0 + sigma) / gamma_unchecked(1.0 - sigma))
}

/// Normalisation of the Riesz potential: `kappa int u(y) |x-y|^{2 sigma - n} dy` has
/// Fourier symbol `|xi|^{-2 sigma}`.
pub fn riesz_constant(n: u32, sigma: f64) -> Result<f64> {
    let nf = n as f64;
    if n == 0 || !(sigma > 0.0) || 2.0 * sigma >= nf {
        return Err(Error::domain(
            "riesz_constant",
            format!("need 0 < 2 sigma < n, got sigma = {sigma}, n = {n}"),
        ));
    }
    Ok(gamma_unchecked(nf / 2.0 - sigma)
        / (4f64.powf(sigma) * PI.powf(nf / 2.0) * gamma_unchecked(sigma)))
}

/// Unit-mass normalisation of the half-space Poisson kernel
/// `p y^{2 sigma} (|x|^2 + y^2)^{-(n + 2 sigma)/2}`.
pub fn poisson_constant(n: u32, sigma: f64) -> Result<f64> {
    check_sigma("poisson_constant", sigma)?;
    if n == 0 {
        return Err(Error::domain("poisson_constant", "dimension must be positive"));
    }
    let nf = n as f64;
    Ok(gamma_unchecked((nf + 2.0 * sigma) / 2.0) / (PI.powf(nf / 2.0) * gamma_unchecked(sigma)))
}

const BERNOULLI_OVER_FACTORIAL: [f64; 9] = [
    1.0 / 6.0 / 2.0,
    -1.0 / 30.0 / 24.0,
    1.0 / 42.0 / 720.0,
    -1.0 / 30.0 / 40_320.0,
    5.0 / 66.0 / 3_628_800.0,
    -691.0 / 2730.0 / 479_001_600.0,
    7.0 / 6.0 / 87_178_291_200.0,
    -3617.0 / 510.0 / 20_922_789_888_000.0,
    43_867.0 / 798.0 / 6_402_373_705_728_000.0,
];

/// Hurwitz zeta `zeta(alpha, q) = sum_{k>=0} (q + k)^{-alpha}` for `alpha > 1`, `q > 0`,
/// by Euler-Maclaurin summation.
pub fn hurwitz_zeta(alpha: f64, q: f64) -> Result<f64> {
    if !(alpha > 1.0) || !(q > 0.0) || !alpha.is_finite() || !q.is_finite() {
        return Err(Error::domain("hurwitz_zeta", format!("need alpha > 1, q > 0; got ({alpha}, {q})")));
    }
    const M: usize = 12;
    let mut sum = 0.0;
    for k in 0..M {
        sum += (q + k as f64).powf(-alpha);
    }
    let x = q + M as f64;
    sum += x.powf(1.0 - alpha) / (alpha - 1.0) + 0.5 * x.powf(-alpha);
    // rising factorial alpha (alpha+1) ... (alpha + 2j - 2)
    let mut rising = alpha;
    let mut xp = x.powf(-alpha - 1.0);
    for (j, b) in BERNOULLI_OVER_FACTORIAL.iter().enumerate() {
        sum += b * rising * xp;
        let m = 2 * j as u32 + 1;
        rising *= (alpha + m as f64) * (alpha + m as f64 + 1.0);
        xp /= x * x;
    }
    Ok(sum)
}
