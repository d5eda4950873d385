//! Extension problems in one extra variable `y > 0`: the half-space field whose
//! weighted flux gives the restricted operator, the half-cylinder field for the
//! spectral Neumann operator, the dual field for negative Neumann orders, their
//! weighted energies and traces.

use std::cell::{Cell, RefCell};
use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::forms::{evaluate_form, FormKind, FormValue, FormsConfig, FractionalOrder};
use crate::pointwise::{break_distance, second_difference_quotient, taylor_radius, TAYLOR_ORDER};
use crate::quadrature::{
    integrate_adaptive, integrate_power_weighted, integrate_with_breaks, IntegralResult, QuadratureSpec,
};
use crate::specfun::{extension_constant, poisson_constant, q_kernel, q_kernel_derivative, EvalResult};
use crate::spectral::{check_mean_zero_components, component_coefficients, ComponentCoefs, Kind};
use crate::testfn::{Func1, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FieldKind {
    HalfSpaceDr,
    HalfCylinderNsp,
    DualNsp,
}

impl FieldKind {
    pub fn label(&self) -> &'static str {
        match self {
            FieldKind::HalfSpaceDr => "half_space_DR",
            FieldKind::HalfCylinderNsp => "half_cylinder_NSp",
            FieldKind::DualNsp => "dual_NSp",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtensionConfig {
    /// initial number of modes per interval for the modal fields
    pub n: usize,
    pub n_max: usize,
    /// truncation tails of the modal energies are driven below this fraction
    pub target_rel: f64,
    /// integrals over the source variable at one field point
    pub field_spec: QuadratureSpec,
    /// inner (height) and outer (horizontal) energy integrals
    pub inner_spec: QuadratureSpec,
    pub outer_spec: QuadratureSpec,
    pub trace_levels: usize,
    /// relative disagreement tolerated between the last extrapolation levels
    pub trace_tol: f64,
    pub mean_tol: f64,
    /// relative tolerance of the form-energy identities
    pub identity_rel: f64,
}

impl Default for ExtensionConfig {
    fn default() -> Self {
        Self {
            n: 200,
            n_max: 819_200,
            target_rel: 1e-8,
            field_spec: QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-300, max_subdivisions: 20_000 },
            inner_spec: QuadratureSpec { rel_tol: 1e-6, abs_tol: 1e-300, max_subdivisions: 20_000 },
            outer_spec: QuadratureSpec { rel_tol: 1e-5, abs_tol: 1e-300, max_subdivisions: 20_000 },
            trace_levels: 6,
            trace_tol: 1e-4,
            mean_tol: 1e-10,
            identity_rel: 1e-3,
        }
    }
}

/// `C_sigma / (2 sigma)`: forms equal this multiple of the energies, and the
/// operators equal minus this multiple of the weighted flux.
pub fn flux_constant(sigma: f64) -> Result<f64> {
    Ok(extension_constant(sigma)? / (2.0 * sigma))
}

/// Total mass of the unit-normalised half-line Poisson kernel, `1` up to quadrature error.
/// With `xi = y tan(phi)` the mass is `2 p int_0^{pi/2} sin(t)^{2 sigma - 1} dt`.
pub fn poisson_unit_mass(sigma: f64) -> Result<EvalResult> {
    let p = poisson_constant(1, sigma)?;
    let spec = QuadratureSpec { rel_tol: 1e-13, abs_tol: 1e-300, max_subdivisions: 2000 };
    let g = 2.0 * sigma - 1.0;
    let r = integrate_power_weighted(|t: f64| if t == 0.0 { 1.0 } else { (t.sin() / t).powf(g) }, PI / 2.0, g, &spec)?;
    Ok(EvalResult::new(2.0 * p * r.value, 2.0 * p * r.error_estimate))
}

/// `int_0^inf tau^{1-2 sigma} (Q_sigma^2 + Q_sigma'^2) dtau`, the energy of one mode per
/// unit `mu^sigma`; equals `2 sigma / C_sigma`.
pub fn profile_energy(sigma: f64) -> Result<EvalResult> {
    let spec = QuadratureSpec { rel_tol: 1e-11, abs_tol: 1e-300, max_subdivisions: 2000 };
    let failed = RefCell::new(None);
    let q = |t: f64| keep(&failed, q_kernel(sigma, t).map(|r| r.value));
    let dq = |t: f64| keep(&failed, q_kernel_derivative(sigma, t).map(|r| r.value));
    let a = integrate_power_weighted(|t| q(t).powi(2), 1.0, 1.0 - 2.0 * sigma, &spec)?;
    let b = integrate_power_weighted(|t: f64| (t.powf(1.0 - 2.0 * sigma) * dq(t)).powi(2), 1.0, 2.0 * sigma - 1.0, &spec)?;
    let c = integrate_adaptive(
        |t: f64| {
            let tau = 1.0 - t.ln() / 2.0;
            tau.powf(1.0 - 2.0 * sigma) * (q(tau).powi(2) + dq(tau).powi(2)) / (2.0 * t)
        },
        0.0,
        1.0,
        &spec,
    )?;
    if let Some(e) = failed.into_inner() {
        return Err(e);
    }
    let r = a.add(b).add(c);
    Ok(EvalResult::new(r.value, r.error_estimate))
}

fn keep(slot: &RefCell<Option<Error>>, r: Result<f64>) -> f64 {
    match r {
        Ok(v) => v,
        Err(e) => {
            slot.borrow_mut().get_or_insert(e);
            0.0
        }
    }
}

#[derive(Debug, Clone)]
struct PoissonField {
    p: f64,
    u: Func1,
    du: Func1,
    lo: f64,
    hi: f64,
    bps: Vec<f64>,
    umax: f64,
    dumax: f64,
}

#[derive(Debug, Clone)]
struct ModalComponent {
    source: Func1,
    coefs: ComponentCoefs,
}

#[derive(Debug, Clone)]
enum Repr {
    Poisson(PoissonField),
    Modal { domain: Vec<(f64, f64)>, comps: Vec<ModalComponent>, n_max: usize },
}

/// `w(x, y)` on the half-space or the half-cylinder over a 1D domain.
#[derive(Debug, Clone)]
pub struct ExtensionField {
    pub kind: FieldKind,
    pub sigma: f64,
    pub source: TestFunction,
    repr: Repr,
}

fn check_sigma(sigma: f64) -> Result<()> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidOrder(format!("extension order {sigma} must lie in (0,1)")));
    }
    Ok(())
}

fn interval_parts(domain: &Domain) -> Result<&[(f64, f64)]> {
    match domain {
        Domain::Intervals(p) => Ok(p),
        Domain::Rectangle { .. } => {
            Err(Error::UnsupportedDomain("extension fields are implemented on intervals only".into()))
        }
    }
}

// y^{2 sigma} (t^2 + y^2)^{-(1 + 2 sigma)/2}
fn poisson_kernel(t: f64, y: f64, sigma: f64) -> f64 {
    let r2 = t * t + y * y;
    (y * y / r2).powf(sigma) / r2.sqrt()
}

// y^{1-2 sigma} d/dy of the kernel; equals -d/dt [t (t^2 + y^2)^{-(1+2 sigma)/2}]
fn flux_kernel(t: f64, y: f64, sigma: f64) -> f64 {
    let r2 = t * t + y * y;
    (2.0 * sigma * t * t - y * y) * r2.powf(-1.5 - sigma)
}

fn flux_antiderivative(d: f64, y: f64, sigma: f64) -> f64 {
    d * (d * d + y * y).powf(-0.5 - sigma)
}

impl PoissonField {
    fn new(u: &Func1) -> Result<Self> {
        if u.has_diracs() {
            return Err(Error::InsufficientSmoothness("point masses have no Poisson extension here".into()));
        }
        let (lo, hi) = u.hull().ok_or_else(|| Error::UnsupportedDomain("source has empty support".into()))?;
        let du = u.derivative()?;
        let mut bps = u.breakpoints();
        bps.extend([lo, hi]);
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        let sup = |g: &Func1| {
            bps.windows(2)
                .flat_map(|w| (1..16).map(move |i| w[0] + (w[1] - w[0]) * i as f64 / 16.0))
                .fold(f64::MIN_POSITIVE, |m, x| m.max(g.eval(x).abs()))
        };
        let (umax, dumax) = (sup(u), sup(&du));
        Ok(Self { p: 0.0, u: u.clone(), du, lo, hi, bps, umax, dumax })
    }

    fn width(&self) -> f64 {
        self.hi - self.lo
    }

    fn dist_hull(&self, x: f64) -> f64 {
        (self.lo - x).max(x - self.hi).max(0.0)
    }

    // kernel mass seen from (x, y): all of it near the support, width times the kernel far away
    fn mass_scale(&self, x: f64, y: f64, sigma: f64) -> f64 {
        (1.0 / self.p).min(self.width() * poisson_kernel(self.dist_hull(x), y, sigma))
    }

    fn dist_breaks(&self, x: f64) -> f64 {
        self.bps.iter().fold(f64::INFINITY, |m, &e| m.min((x - e).abs()))
    }

    /// `int g(t) dt` over offsets `t` in `[a, b]`, refined geometrically away from `t = 0`
    /// starting at scale `y`; offsets keep the kernels exact when `y` is tiny. `scale` is
    /// the size of `int |g|`, which sets the absolute target.
    #[allow(clippy::too_many_arguments)]
    fn integrate_offsets(
        &self,
        g: impl Fn(f64) -> f64,
        (a, b): (f64, f64),
        x: f64,
        mirrored: bool,
        y: f64,
        scale: f64,
        spec: &QuadratureSpec,
    ) -> Result<f64> {
        let mut breaks: Vec<f64> = self.bps.iter().map(|e| if mirrored { (e - x).abs() } else { e - x }).collect();
        if mirrored {
            let db = break_distance(&self.u, x);
            breaks.push(taylor_radius((0.5 * db).min(0.1), self.u.max_frequency(), self.u.is_polynomial()));
        }
        breaks.push(0.0);
        let mut h = y;
        while h < self.width() {
            breaks.extend([-h, h]);
            h *= 16.0;
        }
        let spec = spec.with_abs_tol(spec.abs_tol.max(spec.rel_tol * scale));
        match integrate_with_breaks(g, a, b, &breaks, &spec) {
            Ok(r) => Ok(r.value),
            Err(Error::ToleranceNotReached { value, error_estimate }) if error_estimate <= 1e-6 * scale => Ok(value),
            Err(e) => Err(e),
        }
    }

    fn convolve(&self, f: &Func1, kernel: impl Fn(f64) -> f64, x: f64, y: f64, scale: f64, spec: &QuadratureSpec) -> Result<f64> {
        self.integrate_offsets(|t| f.eval(x + t) * kernel(t), (self.lo - x, self.hi - x), x, false, y, scale, spec)
    }

    fn value(&self, sigma: f64, x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
        if y == 0.0 {
            return Ok(self.u.eval(x));
        }
        let mag = self.umax * self.mass_scale(x, y, sigma);
        let v = self.convolve(&self.u, |t| poisson_kernel(t, y, sigma), x, y, mag, spec)?;
        Ok(self.p * v)
    }

    fn grad_x(&self, sigma: f64, x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
        // integration by parts moves the derivative onto u; jumps of u become point masses
        let mag = self.dumax * self.mass_scale(x, y, sigma);
        let smooth = self.convolve(&self.du, |t| poisson_kernel(t, y, sigma), x, y, mag, spec)?;
        let masses: f64 = self.du.diracs.iter().map(|d| d.weight * poisson_kernel(x - d.at, y, sigma)).sum();
        Ok(self.p * (smooth + masses))
    }

    /// `y^{1-2 sigma} dw/dy`, with `u(x)` subtracted so that small `y` stays well conditioned.
    fn flux(&self, sigma: f64, x: f64, y: f64, spec: &QuadratureSpec) -> Result<f64> {
        let ux = self.u.eval(x);
        let d = self.dist_hull(x);
        let near = (self.umax + self.dumax * self.width()) * (0.5 * self.width()).powf(-2.0 * sigma);
        let mag = near.min(self.umax * self.width() * (d * d + y * y).powf(-0.5 - sigma));
        // fold the part symmetric about x so that the odd first-order term cancels exactly
        let r = (x - self.lo).min(self.hi - x).max(0.0);
        let db = break_distance(&self.u, x);
        let (taylor, t0) = if r > 0.0 && self.dist_breaks(x) > 0.0 {
            let t0 = taylor_radius((0.5 * db).min(0.1), self.u.max_frequency(), self.u.is_polynomial());
            (self.u.taylor(x, TAYLOR_ORDER), t0)
        } else {
            (vec![], 0.0)
        };
        let folded = if r > 0.0 {
            self.integrate_offsets(
                |t| {
                    let second = if t < t0 {
                        -t * t * second_difference_quotient(&taylor, t)
                    } else {
                        self.u.eval(x + t) + self.u.eval(x - t) - 2.0 * ux
                    };
                    second * flux_kernel(t, y, sigma)
                },
                (0.0, r),
                x,
                true,
                y,
                mag,
                spec,
            )?
        } else {
            0.0
        };
        let (a, b) = if x - self.lo > self.hi - x { (self.lo - x, -r) } else { (r, self.hi - x) };
        let rest = self.integrate_offsets(
            |t| (self.u.eval(x + t) - ux) * flux_kernel(t, y, sigma),
            (a, b),
            x,
            false,
            y,
            mag,
            spec,
        )?;
        let outside = flux_antiderivative(x - self.lo, y, sigma) + flux_antiderivative(self.hi - x, y, sigma);
        Ok(self.p * (folded + rest - ux * outside))
    }
}

impl ModalComponent {
    fn len(&self) -> f64 {
        self.coefs.b - self.coefs.a
    }

    fn coef(&self, j: usize) -> f64 {
        if j < self.coefs.values.len() {
            return self.coefs.values[j];
        }
        let (a, l) = (self.coefs.a, self.len());
        let w = j as f64 * PI / l;
        let z = Complex64::from_polar(1.0, -w * a) * self.source.fourier_integral(-w);
        (2.0 / l).sqrt() * z.re
    }
}

fn neumann_mode(a: f64, l: f64, j: usize, x: f64) -> (f64, f64) {
    if j == 0 {
        return (1.0 / l.sqrt(), 0.0);
    }
    let w = j as f64 * PI / l;
    let c = (2.0 / l).sqrt();
    let t = w * (x - a);
    (c * t.cos(), -c * w * t.sin())
}

/// Values, derivatives and weighted fluxes of a modal field at one point.
struct ModalSums {
    value: f64,
    dx: f64,
    dy: f64,
    flux: f64,
    error: f64,
}

impl ExtensionField {
    /// Poisson-integral extension of the zero extension of `u` to the half-plane.
    pub fn half_space(u: &TestFunction, sigma: f64) -> Result<Self> {
        check_sigma(sigma)?;
        let mut f = PoissonField::new(u.line()?)?;
        f.p = poisson_constant(1, sigma)?;
        Ok(Self { kind: FieldKind::HalfSpaceDr, sigma, source: u.clone(), repr: Repr::Poisson(f) })
    }

    /// Bessel-series extension of `u` to the half-cylinder over `domain`.
    pub fn half_cylinder(u: &TestFunction, domain: &Domain, sigma: f64, cfg: &ExtensionConfig) -> Result<Self> {
        check_sigma(sigma)?;
        Self::modal(u, domain, sigma, FieldKind::HalfCylinderNsp, cfg)
    }

    fn modal(u: &TestFunction, domain: &Domain, sigma: f64, kind: FieldKind, cfg: &ExtensionConfig) -> Result<Self> {
        let f = u.line()?;
        let parts = interval_parts(domain)?;
        let s_tail = match kind {
            FieldKind::DualNsp => -sigma,
            _ => sigma,
        };
        let mut comps = Vec::with_capacity(parts.len());
        for &(a, b) in parts {
            let mut n = cfg.n.max(16);
            let coefs = loop {
                let cc = component_coefficients(f, a, b, Kind::Neumann, n);
                let v = cc.partial_form(s_tail);
                let tail = cc.tail.form(s_tail)?;
                if tail <= cfg.target_rel * v.abs() || n >= cfg.n_max {
                    break cc;
                }
                n = (n * 4).min(cfg.n_max);
            };
            comps.push(ModalComponent { source: f.restrict(a, b), coefs });
        }
        Ok(Self {
            kind,
            sigma,
            source: u.clone(),
            repr: Repr::Modal { domain: parts.to_vec(), comps, n_max: cfg.n_max },
        })
    }

    fn amplitude_scale(&self, k: f64, mu: f64) -> f64 {
        match self.kind {
            FieldKind::DualNsp if mu == 0.0 => 0.0,
            FieldKind::DualNsp => k * mu.powf(-self.sigma),
            _ => 1.0,
        }
    }

    fn modal_sums(&self, comp: &ModalComponent, n_max: usize, x: f64, y: f64, want_flux: bool) -> Result<ModalSums> {
        let sigma = self.sigma;
        let k = flux_constant(sigma)?;
        let (a, l) = (comp.coefs.a, comp.len());
        let stored = comp.coefs.values.len() - 1;
        // beyond tau = 45 the profile is below 1e-18 relative to its start
        let n = if y > 0.0 { ((45.0 * l / (PI * y)).ceil() as usize).min(n_max) } else { stored };
        let mut out = ModalSums { value: 0.0, dx: 0.0, dy: 0.0, flux: 0.0, error: 0.0 };
        let mut abs_sum = 0.0;
        for j in 0..=n {
            let c = comp.coef(j);
            if c == 0.0 {
                continue;
            }
            let m = j as f64 * PI / l;
            let mu = m * m;
            let amp = self.amplitude_scale(k, mu) * c;
            let (psi, dpsi) = neumann_mode(a, l, j, x);
            let tau = y * m;
            let q = q_kernel(sigma, tau)?.value;
            out.value += amp * q * psi;
            out.dx += amp * q * dpsi;
            abs_sum += amp.abs() * (2.0 / l).sqrt();
            if want_flux && j > 0 {
                let dq = q_kernel_derivative(sigma, tau)?.value;
                out.dy += amp * m * dq * psi;
                out.flux += amp * mu.powf(sigma) * tau.powf(1.0 - 2.0 * sigma) * dq * psi;
            }
        }
        // terms past the cut: amplitudes bounded by the coefficient tail model, times the profile there
        let m_cut = (n + 1) as f64 * PI / l;
        let q_cut = if y > 0.0 { q_kernel(sigma, y * m_cut)?.value } else { 1.0 };
        if q_cut > 0.0 {
            let s_tail = match self.kind {
                FieldKind::DualNsp => -sigma,
                _ => 0.0,
            };
            let scale = match self.kind {
                FieldKind::DualNsp => k,
                _ => 1.0,
            };
            let tail = comp.coefs.tail.pointwise(s_tail).map(|t| scale * t).unwrap_or(f64::INFINITY);
            out.error += q_cut * tail;
        }
        out.error += 64.0 * f64::EPSILON * abs_sum;
        Ok(out)
    }

    fn locate<'a>(comps: &'a [ModalComponent], x: f64) -> Option<&'a ModalComponent> {
        comps.iter().find(|c| x >= c.coefs.a && x <= c.coefs.b)
    }

    pub fn value(&self, x: f64, y: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
        check_height(y)?;
        match &self.repr {
            Repr::Poisson(f) => Ok(EvalResult::new(f.value(self.sigma, x, y, spec)?, 0.0)),
            Repr::Modal { comps, n_max, .. } => match Self::locate(comps, x) {
                None => Ok(EvalResult::exact(0.0)),
                Some(c) => {
                    let s = self.modal_sums(c, *n_max, x, y, false)?;
                    Ok(EvalResult::new(s.value, s.error))
                }
            },
        }
    }

    /// `(dw/dx, dw/dy)` at `y > 0`.
    pub fn gradient(&self, x: f64, y: f64, spec: &QuadratureSpec) -> Result<(f64, f64)> {
        check_positive_height(y)?;
        match &self.repr {
            Repr::Poisson(f) => {
                let gx = f.grad_x(self.sigma, x, y, spec)?;
                let t = f.flux(self.sigma, x, y, spec)?;
                Ok((gx, t * y.powf(2.0 * self.sigma - 1.0)))
            }
            Repr::Modal { comps, n_max, .. } => match Self::locate(comps, x) {
                None => Ok((0.0, 0.0)),
                Some(c) => {
                    let s = self.modal_sums(c, *n_max, x, y, true)?;
                    Ok((s.dx, s.dy))
                }
            },
        }
    }

    /// `y^{1-2 sigma} dw/dy` at `y > 0`.
    pub fn weighted_flux(&self, x: f64, y: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
        check_positive_height(y)?;
        match &self.repr {
            Repr::Poisson(f) => Ok(EvalResult::new(f.flux(self.sigma, x, y, spec)?, 0.0)),
            Repr::Modal { comps, n_max, .. } => match Self::locate(comps, x) {
                None => Ok(EvalResult::exact(0.0)),
                Some(c) => {
                    let s = self.modal_sums(c, *n_max, x, y, true)?;
                    Ok(EvalResult::new(s.flux, s.error))
                }
            },
        }
    }

    fn domain_parts(&self) -> Option<&[(f64, f64)]> {
        match &self.repr {
            Repr::Modal { domain, .. } => Some(domain),
            Repr::Poisson(_) => None,
        }
    }
}

fn check_height(y: f64) -> Result<()> {
    if !(y >= 0.0) || !y.is_finite() {
        return Err(Error::domain("extension field", format!("height y = {y} must be non-negative")));
    }
    Ok(())
}

fn check_positive_height(y: f64) -> Result<()> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::domain("extension field", format!("height y = {y} must be positive")));
    }
    Ok(())
}

/// `w(x, y)` of the half-space extension.
pub fn cs_extension(u: &TestFunction, sigma: f64, x: f64, y: f64) -> Result<f64> {
    let field = ExtensionField::half_space(u, sigma)?;
    Ok(field.value(x, y, &ExtensionConfig::default().field_spec)?.value)
}

/// `w(x, y)` of the half-cylinder extension over `domain`.
pub fn st_extension(u: &TestFunction, domain: &Domain, sigma: f64, x: f64, y: f64, cfg: &ExtensionConfig) -> Result<EvalResult> {
    ExtensionField::half_cylinder(u, domain, sigma, cfg)?.value(x, y, &cfg.field_spec)
}

/// Modal field with flux `-u` and `w(x, 0) = (C_sigma / 2 sigma) (-Delta)^{-sigma} u`.
pub fn dual_nsp_extension(u: &TestFunction, domain: &Domain, sigma: f64, cfg: &ExtensionConfig) -> Result<ExtensionField> {
    check_sigma(sigma)?;
    check_mean_zero_components(u, domain, cfg.mean_tol)?;
    ExtensionField::modal(u, domain, sigma, FieldKind::DualNsp, cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Region {
    /// the whole half-plane; tails beyond the split box are mapped, not cut
    HalfSpace,
    /// `Omega x (0, inf)`
    Cylinder(Domain),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub value: f64,
    pub error: f64,
    /// box integrated directly; the rest is covered by mapped tail integrals
    pub x_max: f64,
    pub y_max: f64,
}

/// Weighted Dirichlet integral `int int y^{1-2 sigma} |grad w|^2` over `region`.
pub fn energy(field: &ExtensionField, region: &Region, cfg: &ExtensionConfig) -> Result<EnergyValue> {
    match &field.repr {
        Repr::Poisson(f) => poisson_energy(f, field.sigma, region, cfg),
        Repr::Modal { domain, comps, .. } => {
            match region {
                Region::Cylinder(Domain::Intervals(p)) if p == domain => {}
                _ => {
                    return Err(Error::UnsupportedDomain(
                        "modal fields live on the cylinder over their own domain".into(),
                    ))
                }
            }
            modal_energy(field, comps)
        }
    }
}

fn modal_energy(field: &ExtensionField, comps: &[ModalComponent]) -> Result<EnergyValue> {
    let sigma = field.sigma;
    let k = flux_constant(sigma)?;
    let profile = profile_energy(sigma)?;
    let (mut sum, mut tail) = (0.0, 0.0);
    for c in comps {
        let l = c.len();
        for j in 1..c.coefs.values.len() {
            let m = j as f64 * PI / l;
            let amp = field.amplitude_scale(k, m * m) * c.coefs.values[j];
            sum += (m * m).powf(sigma) * amp * amp;
        }
        tail += match field.kind {
            FieldKind::DualNsp => k * k * c.coefs.tail.form(-sigma)?,
            _ => c.coefs.tail.form(sigma)?,
        };
    }
    let value = profile.value * sum;
    let error = profile.abs_error * sum + profile.value * tail + 1e-14 * value;
    Ok(EnergyValue { value, error, x_max: f64::NAN, y_max: f64::INFINITY })
}

fn poisson_energy(f: &PoissonField, sigma: f64, region: &Region, cfg: &ExtensionConfig) -> Result<EnergyValue> {
    let fspec = cfg.field_spec;
    let failed = RefCell::new(None);
    let inner_rel = Cell::new(0.0f64);
    let w = f.width();
    let gx = |x: f64, y: f64| keep(&failed, f.grad_x(sigma, x, y, &fspec));
    let tf = |x: f64, y: f64| keep(&failed, f.flux(sigma, x, y, &fspec));
    let density = |x: f64, y: f64| {
        if y == 0.0 {
            return 0.0;
        }
        y.powf(1.0 - 2.0 * sigma) * gx(x, y).powi(2) + y.powf(2.0 * sigma - 1.0) * tf(x, y).powi(2)
    };
    let settle = |r: Result<IntegralResult>| -> (f64, f64) {
        match r {
            Ok(r) => (r.value, r.error_estimate),
            Err(Error::ToleranceNotReached { value, error_estimate }) => (value, error_estimate),
            Err(e) => {
                failed.borrow_mut().get_or_insert(e);
                (0.0, 0.0)
            }
        }
    };
    // int_0^inf density(x, y) dy
    let column = |x: f64| -> f64 {
        let db = f.dist_breaks(x);
        let dh = f.dist_hull(x);
        let ya = if db > 0.0 { (0.25 * db).min(w) } else { w };
        let y1 = w.max(4.0 * db.max(dh));
        let ispec = &cfg.inner_spec;
        let parts = [
            settle(integrate_power_weighted(|y| gx(x, y).powi(2), ya, 1.0 - 2.0 * sigma, ispec)),
            settle(integrate_power_weighted(|y| tf(x, y).powi(2), ya, 2.0 * sigma - 1.0, ispec)),
            settle(integrate_with_breaks(|y| density(x, y), ya, y1, &[db, 2.0 * db, dh], ispec)),
            settle(integrate_adaptive(|t: f64| density(x, y1 / t) * y1 / (t * t), 0.0, 1.0, ispec)),
        ];
        let value: f64 = parts.iter().map(|p| p.0).sum();
        let error: f64 = parts.iter().map(|p| p.1).sum();
        if value > 0.0 {
            inner_rel.set(inner_rel.get().max(error / value));
        }
        value
    };
    let ospec = &cfg.outer_spec;
    let (total, x_max) = match region {
        Region::HalfSpace => {
            let (l, r) = (f.lo - w, f.hi + w);
            let mid = 0.5 * (f.lo + f.hi);
            let reach = 0.5 * w + w;
            let near = integrate_with_breaks(column, l, r, &f.bps, ospec)?;
            let right = integrate_adaptive(|t: f64| column(mid + reach / t) * reach / (t * t), 0.0, 1.0, ospec)?;
            let left = integrate_adaptive(|t: f64| column(mid - reach / t) * reach / (t * t), 0.0, 1.0, ospec)?;
            (near.add(right).add(left), reach)
        }
        Region::Cylinder(domain) => {
            let parts = interval_parts(domain)?;
            let mut acc = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
            for &(a, b) in parts {
                acc = acc.add(integrate_with_breaks(column, a, b, &f.bps, ospec)?);
            }
            let x_max = parts.iter().fold(0.0f64, |m, &(a, b)| m.max(a.abs()).max(b.abs()));
            (acc, x_max)
        }
    };
    if let Some(e) = failed.into_inner() {
        return Err(e);
    }
    let error = total.error_estimate + 4.0 * inner_rel.get() * total.value.abs();
    Ok(EnergyValue { value: total.value, error, x_max, y_max: f64::INFINITY })
}

/// `E(w) - 2 (u, w(., 0))` for the dual field, the pairing taken by quadrature over the domain.
pub fn dual_functional(field: &ExtensionField, cfg: &ExtensionConfig) -> Result<EnergyValue> {
    if field.kind != FieldKind::DualNsp {
        return Err(Error::domain("dual_functional", "needs a dual field"));
    }
    let parts = field.domain_parts().unwrap_or(&[]).to_vec();
    let e = energy(field, &Region::Cylinder(Domain::Intervals(parts.clone())), cfg)?;
    let u = field.source.line()?;
    let failed = RefCell::new(None);
    let trace_err = Cell::new(0.0f64);
    let mut pairing = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    let bps = u.breakpoints();
    for &(a, b) in &parts {
        let r = integrate_with_breaks(
            |x| {
                let w0 = field.value(x, 0.0, &cfg.field_spec);
                let w0 = match w0 {
                    Ok(v) => {
                        trace_err.set(trace_err.get().max(v.abs_error));
                        v.value
                    }
                    Err(e) => keep(&failed, Err(e)),
                };
                u.eval(x) * w0
            },
            a,
            b,
            &bps,
            &cfg.inner_spec,
        )?;
        pairing = pairing.add(r);
    }
    if let Some(e) = failed.into_inner() {
        return Err(e);
    }
    let l1: f64 = parts.iter().map(|&(a, b)| b - a).sum::<f64>().sqrt() * u.l2_norm_sq().sqrt();
    let error = e.error + 2.0 * (pairing.error_estimate + trace_err.get() * l1);
    Ok(EnergyValue { value: e.value - 2.0 * pairing.value, error, ..e })
}

/// `-(C_sigma / 2 sigma) lim_{y -> 0} y^{1-2 sigma} dw/dy` by Richardson extrapolation
/// over heights `y0 2^{-m}`; `y0 = None` picks a height from the local geometry.
pub fn neumann_trace(field: &ExtensionField, x: f64, y0: Option<f64>, cfg: &ExtensionConfig) -> Result<EvalResult> {
    let sigma = field.sigma;
    let k = flux_constant(sigma)?;
    let y0 = match y0 {
        Some(y) => y,
        None => match &field.repr {
            Repr::Poisson(f) => (0.1 * f.width()).min(0.25 * f.dist_breaks(x)),
            Repr::Modal { comps, .. } => {
                let c = ExtensionField::locate(comps, x)
                    .ok_or_else(|| Error::domain("neumann_trace", format!("x = {x} is outside the domain")))?;
                0.05 * c.len()
            }
        },
    };
    check_positive_height(y0)?;
    let levels = cfg.trace_levels.max(2);
    // expansion of tau^{1-2 sigma} Q'(tau) in powers tau^{2-2 sigma}, tau^2, tau^{4-2 sigma}, ...
    let mut powers: Vec<f64> = (0..levels).flat_map(|i| [2.0 * i as f64 + 2.0 - 2.0 * sigma, 2.0 * i as f64 + 2.0]).collect();
    powers.sort_by(f64::total_cmp);
    let mut table: Vec<Vec<f64>> = Vec::with_capacity(levels);
    let mut noise = 0.0f64;
    for m in 0..levels {
        let y = y0 * 0.5f64.powi(m as i32);
        let r = field.weighted_flux(x, y, &cfg.field_spec)?;
        noise = noise.max(r.abs_error);
        let mut row = vec![-k * r.value];
        for i in 1..=m {
            let f = 2f64.powf(powers[i - 1]);
            let prev = &table[m - 1];
            row.push((f * row[i - 1] - prev[i - 1]) / (f - 1.0));
        }
        table.push(row);
    }
    let last = table[levels - 1][levels - 1];
    let before = table[levels - 2][levels - 2];
    let spread = (last - before).abs();
    let scale = table.iter().map(|r| r[0].abs()).fold(0.0, f64::max);
    if spread > cfg.trace_tol * last.abs().max(1e-6 * scale) {
        return Err(Error::NonconvergentExtrapolation(spread));
    }
    Ok(EvalResult::new(last, spread + k * noise * 8.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub sigma: f64,
    pub which: FormKind,
    pub form: FormValue,
    pub energy: EnergyValue,
    /// `(C_sigma / 2 sigma) E`
    pub scaled_energy: f64,
    pub scaled_error: f64,
    pub gap: f64,
    pub holds: bool,
}

fn forms_config(cfg: &ExtensionConfig) -> FormsConfig {
    FormsConfig { mean_tol: cfg.mean_tol, ..FormsConfig::default() }
}

/// Checks `Q_sigma[u] = (C_sigma / 2 sigma) E_sigma(w)` for the DR or NSp extension of `u`.
pub fn verify_form_energy_identity(
    u: &TestFunction,
    domain: &Domain,
    sigma: f64,
    which: FormKind,
    cfg: &ExtensionConfig,
) -> Result<IdentityReport> {
    check_sigma(sigma)?;
    let order = FractionalOrder::new(sigma)?;
    let (field, region) = match which {
        FormKind::DR => (ExtensionField::half_space(u, sigma)?, Region::HalfSpace),
        FormKind::NSp => (ExtensionField::half_cylinder(u, domain, sigma, cfg)?, Region::Cylinder(domain.clone())),
        _ => return Err(Error::domain("verify_form_energy_identity", "only the DR and NSp forms have extensions here")),
    };
    let form = evaluate_form(u, domain, &order, which, &forms_config(cfg))?;
    let e = energy(&field, &region, cfg)?;
    let k = flux_constant(sigma)?;
    let scaled = k * e.value;
    let gap = (form.value - scaled).abs();
    let holds = gap <= cfg.identity_rel * form.value.abs() + form.error + k * e.error;
    Ok(IdentityReport { sigma, which, form, energy: e, scaled_energy: scaled, scaled_error: k * e.error, gap, holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChainReport {
    pub sigma: f64,
    pub q_nsp: FormValue,
    pub q_dr: FormValue,
    /// `(C_sigma / 2 sigma) E^{NSp}` of the half-space field restricted to the cylinder
    pub restricted: f64,
    pub restricted_error: f64,
    pub holds: bool,
}

/// `Q^{NSp}[u] <= (C_sigma / 2 sigma) E^{NSp}(w^{DR}) <= Q^{DR}[u]` up to error bars.
pub fn energy_chain(u: &TestFunction, domain: &Domain, sigma: f64, cfg: &ExtensionConfig) -> Result<ChainReport> {
    check_sigma(sigma)?;
    let order = FractionalOrder::new(sigma)?;
    let fc = forms_config(cfg);
    let q_nsp = evaluate_form(u, domain, &order, FormKind::NSp, &fc)?;
    let q_dr = evaluate_form(u, domain, &order, FormKind::DR, &fc)?;
    let field = ExtensionField::half_space(u, sigma)?;
    let e = energy(&field, &Region::Cylinder(domain.clone()), cfg)?;
    let k = flux_constant(sigma)?;
    let (restricted, err) = (k * e.value, k * e.error);
    let holds = restricted >= q_nsp.value - q_nsp.error - err && restricted <= q_dr.value + q_dr.error + err;
    Ok(ChainReport { sigma, q_nsp, q_dr, restricted, restricted_error: err, holds })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DifferenceSample {
    pub x: f64,
    pub y: f64,
    pub nsp: f64,
    pub dr: f64,
    pub error: f64,
}

impl DifferenceSample {
    pub fn difference(&self) -> f64 {
        self.nsp - self.dr
    }
}

/// `W = w^{NSp} - w^{DR}` sampled on a grid of points of the cylinder.
pub fn difference_field(
    u: &TestFunction,
    domain: &Domain,
    sigma: f64,
    points: &[(f64, f64)],
    cfg: &ExtensionConfig,
) -> Result<Vec<DifferenceSample>> {
    let nsp = ExtensionField::half_cylinder(u, domain, sigma, cfg)?;
    let dr = ExtensionField::half_space(u, sigma)?;
    points
        .iter()
        .map(|&(x, y)| {
            let a = nsp.value(x, y, &cfg.field_spec)?;
            let b = dr.value(x, y, &cfg.field_spec)?;
            let error = a.abs_error + cfg.field_spec.rel_tol * 10.0 * b.value.abs();
            Ok(DifferenceSample { x, y, nsp: a.value, dr: b.value, error })
        })
        .collect()
}

/// Outward normal derivative of the half-space field on the lateral boundary
/// `{a, b} x (0, inf)` of each interval, at height `y`.
pub fn lateral_normal_derivatives(
    field: &ExtensionField,
    domain: &Domain,
    y: f64,
    cfg: &ExtensionConfig,
) -> Result<Vec<(f64, f64)>> {
    let mut out = Vec::new();
    for &(a, b) in interval_parts(domain)? {
        out.push((a, -field.gradient(a, y, &cfg.field_spec)?.0));
        out.push((b, field.gradient(b, y, &cfg.field_spec)?.0));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line(f: Func1) -> TestFunction {
        TestFunction::Line(f)
    }

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn cos_mode() -> TestFunction {
        line(Func1::cosine(0.0, 1.0, 1).unwrap().scale(2f64.sqrt()))
    }

    #[test]
    fn unit_mass() {
        for sigma in [0.1, 0.25, 0.5, 0.75, 0.9] {
            let m = poisson_unit_mass(sigma).unwrap();
            assert!((m.value - 1.0).abs() < 1e-10, "{sigma}: {}", m.value);
        }
    }

    #[test]
    fn profile_energy_is_inverse_flux_constant() {
        for sigma in [0.25, 0.5, 0.75] {
            let i = profile_energy(sigma).unwrap();
            let expect = 1.0 / flux_constant(sigma).unwrap();
            assert!((i.value - expect).abs() < 1e-9 * expect, "{sigma}: {} vs {expect}", i.value);
        }
    }

    #[test]
    fn single_mode_field_and_energy() {
        let cfg = ExtensionConfig::default();
        let u = cos_mode();
        let w = ExtensionField::half_cylinder(&u, &unit(), 0.5, &cfg).unwrap();
        for (x, y) in [(0.2, 0.1), (0.7, 0.5), (0.4, 1.3)] {
            let v = w.value(x, y, &cfg.field_spec).unwrap().value;
            let expect = 2f64.sqrt() * (PI * x).cos() * (-PI * y).exp();
            assert!((v - expect).abs() < 1e-9, "{v} vs {expect}");
        }
        let e = energy(&w, &Region::Cylinder(unit()), &cfg).unwrap();
        assert!((e.value - PI).abs() < 1e-8, "{}", e.value);
        let t = neumann_trace(&w, 0.3, None, &cfg).unwrap();
        let expect = PI * 2f64.sqrt() * (0.3 * PI).cos();
        assert!((t.value - expect).abs() < 1e-6 * expect.abs(), "{} vs {expect}", t.value);
    }

    #[test]
    fn constant_field() {
        let cfg = ExtensionConfig::default();
        let u = line(Func1::constant(0.0, 1.0, 1.0).unwrap());
        let w = ExtensionField::half_cylinder(&u, &unit(), 0.4, &cfg).unwrap();
        assert!((w.value(0.3, 2.0, &cfg.field_spec).unwrap().value - 1.0).abs() < 1e-12);
        assert!(energy(&w, &Region::Cylinder(unit()), &cfg).unwrap().value.abs() < 1e-20);
    }

    #[test]
    fn sine_tends_to_its_mean() {
        let cfg = ExtensionConfig::default();
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        let v = st_extension(&u, &unit(), 0.5, 0.3, 12.0, &cfg).unwrap().value;
        assert!((v - 2.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn half_space_trace_and_decay() {
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        for sigma in [0.25, 0.75] {
            let near = cs_extension(&u, sigma, 0.3, 1e-4).unwrap();
            let gap = (near - (0.3 * PI).sin()).abs();
            if sigma >= 0.5 {
                assert!(gap < 1e-3);
            } else {
                // the approach is like y^{2 sigma}
                let closer = (cs_extension(&u, sigma, 0.3, 1e-6).unwrap() - (0.3 * PI).sin()).abs();
                assert!((gap / closer / 10.0 - 1.0).abs() < 0.05, "{gap} {closer}");
            }
            let far = cs_extension(&u, sigma, 0.3, 1e4).unwrap();
            assert!(far > 0.0 && far < 1e-3);
        }
    }

    #[test]
    fn half_space_half_order_is_classical_poisson() {
        // sigma = 1/2: (1/pi) int_0^1 y sin(pi xi) / ((x - xi)^2 + y^2) dxi, summed on a fine midpoint grid
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        let (x, y) = (0.5, 0.1);
        let n = 400_000;
        let h = 1.0 / n as f64;
        let oracle: f64 = (0..n)
            .map(|i| {
                let xi = (i as f64 + 0.5) * h;
                y * (PI * xi).sin() / ((x - xi).powi(2) + y * y)
            })
            .sum::<f64>()
            * h
            / PI;
        let v = cs_extension(&u, 0.5, x, y).unwrap();
        assert!((v - oracle).abs() < 1e-6, "{v} vs {oracle}");
    }

    #[test]
    fn dual_single_mode() {
        let cfg = ExtensionConfig::default();
        let u = cos_mode();
        let w = dual_nsp_extension(&u, &unit(), 0.5, &cfg).unwrap();
        let v = w.value(0.2, 0.0, &cfg.field_spec).unwrap().value;
        let expect = 2f64.sqrt() * (0.2 * PI).cos() / PI;
        assert!((v - expect).abs() < 1e-12);
        let f = w.weighted_flux(0.2, 1e-4, &cfg.field_spec).unwrap().value;
        assert!((-f - u.line().unwrap().eval(0.2)).abs() < 1e-2);
        let dual = dual_functional(&w, &cfg).unwrap();
        // Q_{-1/2} = 1/pi, and Q = -(2 sigma / C_sigma) E~
        assert!((-dual.value - 1.0 / PI).abs() < 1e-8, "{}", dual.value);
        assert!(dual_nsp_extension(&line(Func1::sine(0.0, 1.0, 1).unwrap()), &unit(), 0.5, &cfg).is_err());
    }
}
