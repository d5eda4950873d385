//! The quadratic forms `DSp`, `NSp`, `DR` and `NR`, and comparisons between them.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::quadrature::{
    gauss_legendre, integrate_power_weighted, integrate_singular_symmetric,
    integrate_with_breaks, IntegralResult, QuadratureSpec,
};
use crate::specfun::{gagliardo_constant, EvalResult};
use crate::spectral::{
    check_mean_zero_components, component_coefficients, eig_pow, CoefData, Coefficients, ComponentCoefs, Kind,
    SpectralBasis,
};
use crate::testfn::{Func1, Func2, TestFunction};

/// `s = 2k + residual` with `k = floor((s+1)/2)` and `residual` in `(-1,0) U (0,1)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FractionalOrder {
    pub s: f64,
    pub k: u32,
    pub residual: f64,
}

impl FractionalOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !s.is_finite() || s <= -1.0 {
            return Err(Error::InvalidOrder(format!("s = {s} must be finite and greater than -1")));
        }
        if s >= 0.0 && s.fract() == 0.0 {
            return Err(Error::InvalidOrder(format!("s = {s} is a nonnegative integer")));
        }
        let k = ((s + 1.0) / 2.0).floor() as u32;
        Ok(Self { s, k, residual: s - 2.0 * k as f64 })
    }

    /// `s` lies in some `(2k, 2k+1)`.
    pub fn even_parity(&self) -> bool {
        self.residual > 0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    SpectralSeries,
    Fourier,
    Gagliardo,
    Reduced(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FormKind {
    DSp,
    NSp,
    DR,
    NR,
}

impl FormKind {
    pub fn label(&self) -> &'static str {
        match self {
            FormKind::DSp => "DSp",
            FormKind::NSp => "NSp",
            FormKind::DR => "DR",
            FormKind::NR => "NR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormValue {
    pub value: f64,
    pub error: f64,
    pub method: Method,
    pub order: FractionalOrder,
}

impl FormValue {
    fn from_eval(r: EvalResult, method: Method, order: FractionalOrder) -> Self {
        Self { value: r.value, error: r.abs_error, method, order }
    }
}

/// Numerical settings shared by the form evaluators.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FormsConfig {
    /// initial number of modes per interval
    pub n: usize,
    /// cap for the adaptive mode count per interval
    pub n_max: usize,
    /// cap for the mode count per axis on rectangles
    pub n_rect_max: usize,
    /// truncation tails are driven below this fraction of the value
    pub target_rel: f64,
    pub spec: QuadratureSpec,
    pub mean_tol: f64,
    /// largest frequency cutoff for the Fourier route in 1D
    pub xi_max: f64,
}

impl Default for FormsConfig {
    fn default() -> Self {
        Self {
            n: 200,
            n_max: 819_200,
            n_rect_max: 1024,
            target_rel: 1e-8,
            spec: QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-15, max_subdivisions: 200_000 },
            mean_tol: 1e-10,
            xi_max: 4e5,
        }
    }
}

fn interval_eig(len: f64, j: usize) -> f64 {
    let w = j as f64 * PI / len;
    w * w
}

fn series_line(f: &Func1, parts: &[(f64, f64)], kind: Kind, s: f64, cfg: &FormsConfig) -> Result<EvalResult> {
    let mut value = 0.0;
    let mut error = 0.0;
    for &(a, b) in parts {
        let mut n = cfg.n.max(16);
        loop {
            let cc = component_coefficients(f, a, b, kind, n);
            let v = cc.partial_form(s);
            let tail = cc.tail.form(s)?;
            if tail <= cfg.target_rel * v.abs() || n >= cfg.n_max {
                value += v;
                error += tail + n as f64 * f64::EPSILON * v.abs();
                break;
            }
            n = (n * 4).min(cfg.n_max);
        }
    }
    Ok(EvalResult::new(value, error))
}

fn series_rect(g: &Func2, x: (f64, f64), y: (f64, f64), kind: Kind, s: f64, cfg: &FormsConfig) -> Result<EvalResult> {
    if s < 0.0 {
        return Err(Error::UnsupportedDomain("negative orders are not supported on rectangles".into()));
    }
    let (lx, ly) = (x.1 - x.0, y.1 - y.0);
    let first = match kind {
        Kind::Dirichlet => 1,
        Kind::Neumann => 0,
    };
    let mut n = cfg.n.clamp(16, cfg.n_rect_max);
    loop {
        let terms: Vec<(f64, ComponentCoefs, ComponentCoefs)> = g
            .terms
            .iter()
            .map(|(c, f, h)| (*c, component_coefficients(f, x.0, x.1, kind, n), component_coefficients(h, y.0, y.1, kind, n)))
            .collect();
        let mut value = 0.0;
        for j in first..=n {
            let lj = interval_eig(lx, j);
            for k in first..=n {
                let c: f64 = terms.iter().map(|(a, f, h)| a * f.values[j] * h.values[k]).sum();
                value += eig_pow(lj + interval_eig(ly, k), s) * c * c;
            }
        }
        let coefs = Coefficients { values: vec![], tail_estimate: 0.0, data: CoefData::Rect(terms) };
        let tail = coefs.rect_form_tail(s)?;
        if tail <= cfg.target_rel * value.abs() || n >= cfg.n_rect_max {
            let m = (n * n) as f64;
            return Ok(EvalResult::new(value, tail + m.sqrt() * f64::EPSILON * value.abs()));
        }
        n = (n * 2).min(cfg.n_rect_max);
    }
}

fn spectral_form(u: &TestFunction, s: f64, basis: &SpectralBasis, kind: Kind, cfg: &FormsConfig) -> Result<EvalResult> {
    if basis.kind != kind {
        return Err(Error::domain("spectral form", format!("basis has {:?} data, expected {:?}", basis.kind, kind)));
    }
    // validates the support
    let _ = crate::spectral::coefficients(u, &SpectralBasis::build(&basis.domain, kind, 1)?)?;
    let cfg = FormsConfig { n: basis.n.max(1), ..*cfg };
    match (u, &basis.domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            if kind == Kind::Neumann && s < 0.0 {
                check_mean_zero_components(u, &basis.domain, cfg.mean_tol)?;
            }
            series_line(f, parts, kind, s, &cfg)
        }
        (TestFunction::Plane(g), Domain::Rectangle { x, y }) => {
            if kind == Kind::Neumann && s < 0.0 {
                return Err(Error::UnsupportedDomain("negative orders are not supported on rectangles".into()));
            }
            series_rect(g, *x, *y, kind, s, &cfg)
        }
        _ => Err(Error::UnsupportedDomain("function and domain dimensions differ".into())),
    }
}

/// `sum_j lambda_j^s (u, phi_j)^2` over Dirichlet modes. The basis fixes the domain
/// and the initial truncation, which is raised until the tail bound is small.
pub fn q_dsp(u: &TestFunction, order: &FractionalOrder, basis: &SpectralBasis, cfg: &FormsConfig) -> Result<FormValue> {
    let r = spectral_form(u, order.s, basis, Kind::Dirichlet, cfg)?;
    Ok(FormValue::from_eval(r, Method::SpectralSeries, *order))
}

/// Neumann analogue of [`q_dsp`]; for `s < 0` the function must have zero mean on
/// every interval and the zero modes are skipped.
pub fn q_nsp(u: &TestFunction, order: &FractionalOrder, basis: &SpectralBasis, cfg: &FormsConfig) -> Result<FormValue> {
    let r = spectral_form(u, order.s, basis, Kind::Neumann, cfg)?;
    Ok(FormValue::from_eval(r, Method::SpectralSeries, *order))
}

/// `sum_{k,l} a_k a_l X^{2s-k-l+1}/(k+l-2s-1) / pi`, bounding
/// `int_{|xi|>X} |xi|^{2s} |Fu|^2`.
fn envelope_tail(a: &[f64], x: f64, s: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (k, &ak) in a.iter().enumerate() {
        for (l, &al) in a.iter().enumerate() {
            if ak == 0.0 || al == 0.0 {
                continue;
            }
            let e = (k + l) as f64 - 2.0 * s - 1.0;
            if e <= 0.0 {
                return Err(Error::TailUnbounded(format!(
                    "transform decays like |xi|^-{} which is too slow for order {s}",
                    (k + l) as f64 / 2.0
                )));
            }
            acc += ak * al * x.powf(-e) / e;
        }
    }
    Ok(acc / PI)
}

fn check_origin(f: &Func1, s: f64, tol: f64) -> Result<()> {
    if s > -0.5 {
        return Ok(());
    }
    let width = f.hull().map_or(1.0, |(a, b)| (b - a).max(f64::MIN_POSITIVE));
    let mean = f.integral();
    let bound = tol * f.size(width) * width.sqrt();
    if mean.abs() > bound {
        return Err(Error::NonIntegrableOrigin(format!(
            "|xi|^{} |Fu|^2 needs a mean-zero u, but (u,1) = {mean:e}",
            2.0 * s
        )));
    }
    Ok(())
}

/// `int_R |xi|^{2s} |Fu|^2` for a function on the line.
pub(crate) fn dr_fourier_line(f: &Func1, s: f64, cfg: &FormsConfig) -> Result<EvalResult> {
    let Some((lo, hi)) = f.hull() else { return Ok(EvalResult::exact(0.0)) };
    check_origin(f, s, cfg.mean_tol)?;
    let env = f.fourier_envelope();
    let width = (hi - lo).max(1e-3);
    let panel = PI / width;
    let spec = cfg.spec;
    let sq = |xi: f64| f.fourier_integral(xi).norm_sqr() / PI;
    let head = if s > -0.5 {
        integrate_power_weighted(sq, panel, 2.0 * s, &spec)?
    } else {
        integrate_power_weighted(|xi| sq(xi) / (xi * xi), panel, 2.0 * s + 2.0, &spec)?
    };
    let mut total = head;
    let mut a = panel;
    let mut b = (2.0 * f.max_frequency()).max(64.0 * panel).min(cfg.xi_max.max(2.0 * panel));
    loop {
        let count = ((b - a) / panel).ceil() as usize;
        let breaks: Vec<f64> = (1..count).map(|i| a + i as f64 * panel).collect();
        let seg_spec = spec.with_abs_tol(spec.abs_tol.max(0.1 * spec.rel_tol * total.value.abs()));
        let seg = integrate_with_breaks(|xi| xi.powf(2.0 * s) * sq(xi), a, b, &breaks, &seg_spec)?;
        total = total.add(seg);
        let tail = envelope_tail(&env, b, s)?;
        if tail <= cfg.target_rel * total.value.abs() || b >= cfg.xi_max {
            return Ok(EvalResult::new(total.value, total.error_estimate + tail));
        }
        a = b;
        b = (4.0 * b).min(cfg.xi_max);
    }
}

/// Nodes and weights on `[0, panels h]` with the first panel graded towards 0.
fn graded_axis(h: f64, panels: usize, levels: usize, n: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(n);
    let mut cells = vec![(0.0, h * 0.5f64.powi(levels as i32))];
    for l in (0..levels).rev() {
        cells.push((h * 0.5f64.powi(l as i32 + 1), h * 0.5f64.powi(l as i32)));
    }
    for p in 1..panels {
        cells.push((p as f64 * h, (p + 1) as f64 * h));
    }
    let mut xs = Vec::with_capacity(cells.len() * n);
    let mut ws = Vec::with_capacity(cells.len() * n);
    for (a, b) in cells {
        let (c, r) = (0.5 * (a + b), 0.5 * (b - a));
        for (t, w) in gx.iter().zip(&gw) {
            xs.push(c + r * t);
            ws.push(r * w);
        }
    }
    (xs, ws)
}

fn plane_sum(g: &Func2, s: f64, radius: f64, widths: (f64, f64), n: usize) -> f64 {
    let hx = PI / widths.0;
    let hy = PI / widths.1;
    let (xs, wx) = graded_axis(hx, (radius / hx).ceil() as usize, 12, n);
    let (ys_half, wy_half) = graded_axis(hy, (radius / hy).ceil() as usize, 12, n);
    let ys: Vec<f64> = ys_half.iter().map(|y| -y).chain(ys_half.iter().copied()).collect();
    let wy: Vec<f64> = wy_half.iter().chain(wy_half.iter()).copied().collect();
    let fx: Vec<Vec<_>> = g.terms.iter().map(|(c, f, _)| xs.iter().map(|&x| f.fourier_transform(x) * *c).collect()).collect();
    let gy: Vec<Vec<_>> = g.terms.iter().map(|(_, _, h)| ys.iter().map(|&y| h.fourier_transform(y)).collect()).collect();
    let mut acc = 0.0;
    for i in 0..xs.len() {
        let mut row = 0.0;
        for j in 0..ys.len() {
            let z: num_complex::Complex64 = (0..g.terms.len()).map(|t| fx[t][i] * gy[t][j]).sum();
            row += wy[j] * (xs[i] * xs[i] + ys[j] * ys[j]).powf(s) * z.norm_sqr();
        }
        acc += wx[i] * row;
    }
    2.0 * acc
}

/// `int_{R^2} |xi|^{2s} |Fu|^2` on a tensor grid, `0 < s < 1`.
fn dr_fourier_plane(g: &Func2, s: f64, cfg: &FormsConfig) -> Result<EvalResult> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::UnsupportedDomain(format!("order {s} outside (0,1) in two dimensions")));
    }
    if g.has_diracs() {
        return Err(Error::InsufficientSmoothness("point masses in a two-dimensional function".into()));
    }
    let hull_width = |f: &Func1| f.hull().map_or(1.0, |(a, b)| (b - a).max(1e-3));
    let dx = g.terms.iter().map(|(_, f, _)| hull_width(f)).fold(0.0, f64::max);
    let dy = g.terms.iter().map(|(_, _, h)| hull_width(h)).fold(0.0, f64::max);
    if g.terms.is_empty() {
        return Ok(EvalResult::exact(0.0));
    }
    let (wx, wy) = g.max_frequency();
    let radius = (4.0 * wx.max(wy)).max(100.0 * PI / dx.min(dy));
    let fine = plane_sum(g, s, radius, (dx, dy), 20);
    let coarse = plane_sum(g, s, radius, (dx, dy), 12);
    let mut root = 0.0;
    for (c, f, h) in &g.terms {
        let mut b = 0.0;
        for (p, q) in [(f, h), (h, f)] {
            let env = p.fourier_envelope();
            let qs = dr_fourier_line(q, s, cfg)?;
            b += envelope_tail(&env, radius, s)? * q.l2_norm_sq() + envelope_tail(&env, radius, 0.0)? * (qs.value + qs.abs_error);
        }
        root += c.abs() * b.sqrt();
    }
    Ok(EvalResult::new(fine, (fine - coarse).abs() + root * root))
}

/// `int |xi|^{2s} |Fu|^2` with `u` extended by zero.
pub fn q_dr_fourier(u: &TestFunction, order: &FractionalOrder, cfg: &FormsConfig) -> Result<FormValue> {
    let r = match u {
        TestFunction::Line(f) => dr_fourier_line(f, order.s, cfg)?,
        TestFunction::Plane(g) => dr_fourier_plane(g, order.s, cfg)?,
    };
    Ok(FormValue::from_eval(r, Method::Fourier, *order))
}

fn check_gagliardo_order(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidOrder(format!("double-integral forms need s in (0,1), got {s}")));
    }
    Ok(())
}

fn positive_differences(pts: &[f64], below: f64) -> Vec<f64> {
    let mut d: Vec<f64> = pts
        .iter()
        .flat_map(|&p| pts.iter().map(move |&q| p - q))
        .filter(|&x| x > 0.0 && x < below)
        .collect();
    d.sort_by(f64::total_cmp);
    d.dedup();
    d
}

const TAYLOR_BELOW: f64 = 1e-2;
const TAYLOR_ORDER: usize = 12;

/// `(u(x+z) - u(x)) / z`, from the Taylor expansion at `x` when no breakpoint
/// lies in `[x, x+z]`.
fn difference_quotient(f: &Func1, bps: &[f64], x: f64, z: f64) -> f64 {
    if bps.iter().any(|&e| e >= x && e <= x + z) {
        return (f.eval(x + z) - f.eval(x)) / z;
    }
    let c = f.taylor(x, TAYLOR_ORDER);
    c[1..].iter().rev().fold(0.0, |acc, &ck| acc * z + ck)
}

/// `int_{Omega x Omega} |u(x)-u(y)|^2 |x-y|^{-1-2s}` for `Omega` a finite union of intervals.
pub fn gagliardo_double(f: &Func1, parts: &[(f64, f64)], s: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    check_gagliardo_order(s)?;
    if f.has_diracs() {
        return Err(Error::InsufficientSmoothness("point masses in a double-integral form".into()));
    }
    let norm = f.l2_norm_sq().max(f64::MIN_POSITIVE);
    let inner_spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15 * norm, ..*spec };
    let inner_rel = Cell::new(0.0f64);
    let inner = |g: &dyn Fn(f64) -> f64, a: f64, b: f64, breaks: &[f64]| -> f64 {
        match integrate_with_breaks(g, a, b, breaks, &inner_spec) {
            Ok(r) => {
                inner_rel.set(inner_rel.get().max(r.error_estimate / r.value.abs().max(norm)));
                r.value
            }
            Err(Error::ToleranceNotReached { value, error_estimate }) => {
                inner_rel.set(inner_rel.get().max(error_estimate / value.abs().max(norm)));
                value
            }
            Err(_) => f64::NAN,
        }
    };
    let bps = f.breakpoints();
    let mut total = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for (i, &(a, b)) in parts.iter().enumerate() {
        let len = b - a;
        let local: Vec<f64> = bps.iter().copied().filter(|&e| e >= a && e <= b).chain([a, b]).collect();
        let g = |z: f64| -> f64 {
            if z >= len {
                return 0.0;
            }
            let breaks: Vec<f64> = local.iter().flat_map(|&e| [e, e - z]).collect();
            if z > TAYLOR_BELOW * len {
                return inner(&|x: f64| (f.eval(x + z) - f.eval(x)).powi(2), a, b - z, &breaks);
            }
            z * z * inner(&|x: f64| difference_quotient(f, &bps, x, z).powi(2), a, b - z, &breaks)
        };
        let diffs = positive_differences(&local, len);
        let delta = diffs.iter().fold(0.1 * len, |m, &d| m.min(0.5 * d));
        let near = integrate_singular_symmetric(g, delta, s, spec)?;
        let far = integrate_with_breaks(|z| g(z) * z.powf(-1.0 - 2.0 * s), delta, len, &diffs, spec)?;
        total = total.add(near.add(far).scale(2.0));
        for &(c, d) in &parts[i + 1..] {
            let other: Vec<f64> = bps.iter().copied().filter(|&e| e > c && e < d).collect();
            let mine: Vec<f64> = local.clone();
            let cross = integrate_with_breaks(
                |x| {
                    let ux = f.eval(x);
                    inner(&|y: f64| (ux - f.eval(y)).powi(2) * (y - x).abs().powf(-1.0 - 2.0 * s), c, d, &other)
                },
                a,
                b,
                &mine,
                spec,
            )?;
            total = total.add(cross.scale(2.0));
        }
    }
    total.error_estimate += 4.0 * inner_rel.get() * total.value.abs();
    if !total.value.is_finite() {
        return Err(Error::ToleranceNotReached { value: total.value, error_estimate: f64::INFINITY });
    }
    Ok(total)
}

/// `int_{R \ Omega} |x-y|^{-1-2s} dy` for `x` inside a union of sorted intervals.
pub fn exterior_density(x: f64, parts: &[(f64, f64)], s: f64) -> f64 {
    let p = |d: f64| if d.is_infinite() { 0.0 } else { d.powf(-2.0 * s) };
    let mut gaps = vec![(f64::NEG_INFINITY, parts[0].0)];
    gaps.extend(parts.windows(2).map(|w| (w[0].1, w[1].0)));
    gaps.push((parts[parts.len() - 1].1, f64::INFINITY));
    gaps.iter()
        .map(|&(c, d)| if d <= x { p(x - d) - p(x - c) } else { p(c - x) - p(d - x) })
        .sum::<f64>()
        / (2.0 * s)
}

fn line_parts<'a>(u: &'a TestFunction, domain: &'a Domain) -> Result<(&'a Func1, &'a [(f64, f64)])> {
    match (u, domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            for p in &f.pieces {
                if !parts.iter().any(|&(a, b)| p.a >= a && p.b <= b) {
                    return Err(Error::domain("double-integral form", format!("piece [{}, {}] leaves the domain", p.a, p.b)));
                }
            }
            Ok((f, parts))
        }
        _ => Err(Error::UnsupportedDomain("double-integral forms are implemented on intervals only".into())),
    }
}

/// `c_{1,s} [ int_{Omega x Omega} + 2 int_Omega u^2 rho_s ]`.
pub fn q_dr_gagliardo(u: &TestFunction, domain: &Domain, s: f64, cfg: &FormsConfig) -> Result<FormValue> {
    check_gagliardo_order(s)?;
    let order = FractionalOrder::new(s)?;
    let (f, parts) = line_parts(u, domain)?;
    let double = gagliardo_double(f, parts, s, &cfg.spec)?;
    let bps = f.breakpoints();
    let mut ext = IntegralResult { value: 0.0, error_estimate: 0.0, evaluations: 0 };
    for &(a, b) in parts {
        let r = integrate_with_breaks(|x| f.eval(x).powi(2) * exterior_density(x, parts, s), a, b, &bps, &cfg.spec)?;
        ext = ext.add(r);
    }
    let c = gagliardo_constant(1, s)?;
    let total = double.add(ext.scale(2.0)).scale(c);
    Ok(FormValue { value: total.value, error: total.error_estimate, method: Method::Gagliardo, order })
}

/// `c_{1,s} int_{Omega x Omega} |u(x)-u(y)|^2 |x-y|^{-1-2s}`.
pub fn q_nr(u: &TestFunction, domain: &Domain, s: f64, cfg: &FormsConfig) -> Result<FormValue> {
    check_gagliardo_order(s)?;
    let order = FractionalOrder::new(s)?;
    let (f, parts) = line_parts(u, domain)?;
    let total = gagliardo_double(f, parts, s, &cfg.spec)?.scale(gagliardo_constant(1, s)?);
    Ok(FormValue { value: total.value, error: total.error_estimate, method: Method::Gagliardo, order })
}

/// The form of order `s` evaluated as the form of order `s - 2k` of `(-Laplacian)^k u`.
pub fn q_higher(
    u: &TestFunction,
    order: &FractionalOrder,
    which: FormKind,
    domain: &Domain,
    cfg: &FormsConfig,
) -> Result<FormValue> {
    if order.k == 0 {
        return Err(Error::InvalidOrder(format!("s = {} needs no reduction", order.s)));
    }
    let v = u.laplacian_power(order.k)?;
    let low = FractionalOrder::new(order.residual)?;
    let r = match which {
        FormKind::DR => q_dr_fourier(&v, &low, cfg)?,
        FormKind::DSp => q_dsp(&v, &low, &SpectralBasis::build(domain, Kind::Dirichlet, cfg.n)?, cfg)?,
        FormKind::NSp => q_nsp(&v, &low, &SpectralBasis::build(domain, Kind::Neumann, cfg.n)?, cfg)?,
        FormKind::NR => return Err(Error::InvalidOrder("no reduction is defined for the regional form".into())),
    };
    Ok(FormValue { method: Method::Reduced(order.k), order: *order, ..r })
}

/// Evaluate one form directly at order `s`.
pub fn evaluate_form(u: &TestFunction, domain: &Domain, order: &FractionalOrder, which: FormKind, cfg: &FormsConfig) -> Result<FormValue> {
    match which {
        FormKind::DSp => q_dsp(u, order, &SpectralBasis::build(domain, Kind::Dirichlet, cfg.n)?, cfg),
        FormKind::NSp => q_nsp(u, order, &SpectralBasis::build(domain, Kind::Neumann, cfg.n)?, cfg),
        FormKind::DR => q_dr_fourier(u, order, cfg),
        FormKind::NR => q_nr(u, domain, order.s, cfg),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pair {
    DrVsNsp,
    DspVsDr,
    DspVsNsp,
    DrVsNr,
}

impl Pair {
    pub fn forms(&self) -> (FormKind, FormKind) {
        match self {
            Pair::DrVsNsp => (FormKind::DR, FormKind::NSp),
            Pair::DspVsDr => (FormKind::DSp, FormKind::DR),
            Pair::DspVsNsp => (FormKind::DSp, FormKind::NSp),
            Pair::DrVsNr => (FormKind::DR, FormKind::NR),
        }
    }

    /// Strict pairs compare with a strict sign; the others are non-strict inequalities.
    pub fn strict(&self) -> bool {
        matches!(self, Pair::DrVsNsp | Pair::DspVsDr)
    }

    pub fn predicted(&self, order: &FractionalOrder) -> Result<Sign> {
        match self {
            Pair::DrVsNsp | Pair::DspVsDr => Ok(if order.even_parity() { Sign::LeftGreater } else { Sign::RightGreater }),
            Pair::DspVsNsp | Pair::DrVsNr => {
                if order.s > 0.0 && order.s < 1.0 {
                    Ok(Sign::LeftGreater)
                } else {
                    Err(Error::InvalidOrder(format!("{self:?} is only compared for s in (0,1)")))
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sign {
    LeftGreater,
    RightGreater,
}

impl Sign {
    pub fn label(&self) -> &'static str {
        match self {
            Sign::LeftGreater => "left_greater",
            Sign::RightGreater => "right_greater",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Confirmed,
    Inconclusive,
    Contradicted,
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Confirmed => "confirmed",
            Verdict::Inconclusive => "inconclusive",
            Verdict::Contradicted => "contradicted",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRecord {
    pub s: f64,
    pub pair: Pair,
    pub left_form: FormValue,
    pub right_form: FormValue,
    pub predicted_sign: Sign,
    pub margin: f64,
    pub conclusive: bool,
}

impl ComparisonRecord {
    pub fn new(pair: Pair, left: FormValue, right: FormValue) -> Result<Self> {
        let predicted_sign = pair.predicted(&left.order)?;
        let margin = left.value - right.value;
        let conclusive = margin.abs() > 3.0 * (left.error + right.error);
        Ok(Self { s: left.order.s, pair, left_form: left, right_form: right, predicted_sign, margin, conclusive })
    }

    pub fn verdict(&self) -> Verdict {
        let agrees = match self.predicted_sign {
            Sign::LeftGreater => self.margin > 0.0,
            Sign::RightGreater => self.margin < 0.0,
        };
        match (self.conclusive, agrees) {
            (true, true) => Verdict::Confirmed,
            (true, false) => Verdict::Contradicted,
            (false, _) => Verdict::Inconclusive,
        }
    }

    /// No conclusive violation; the acceptance notion for non-strict pairs.
    pub fn consistent(&self) -> bool {
        self.verdict() != Verdict::Contradicted
    }
}

pub fn compare_forms(u: &TestFunction, domain: &Domain, s: f64, pair: Pair, cfg: &FormsConfig) -> Result<ComparisonRecord> {
    let order = FractionalOrder::new(s)?;
    pair.predicted(&order)?;
    let (l, r) = pair.forms();
    let left = evaluate_form(u, domain, &order, l, cfg)?;
    let right = evaluate_form(u, domain, &order, r, cfg)?;
    ComparisonRecord::new(pair, left, right)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    fn line(f: Func1) -> TestFunction {
        TestFunction::Line(f)
    }

    fn order(s: f64) -> FractionalOrder {
        FractionalOrder::new(s).unwrap()
    }

    #[test]
    fn order_split() {
        let o = order(2.75);
        assert_eq!(o.k, 1);
        assert_relative_eq!(o.residual, 0.75);
        let o = order(1.5);
        assert_eq!(o.k, 1);
        assert_relative_eq!(o.residual, -0.5);
        assert_eq!(order(-0.5).k, 0);
        assert!(FractionalOrder::new(1.0).is_err());
        assert!(FractionalOrder::new(-1.0).is_err());
        assert!(FractionalOrder::new(0.0).is_err());
    }

    #[test]
    fn dsp_single_mode() {
        let cfg = FormsConfig::default();
        let b = SpectralBasis::build(&unit(), Kind::Dirichlet, 200).unwrap();
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        let v = q_dsp(&u, &order(0.5), &b, &cfg).unwrap();
        assert_relative_eq!(v.value, PI / 2.0, max_relative = 1e-12);
        let v = q_dsp(&u, &order(-0.5), &b, &cfg).unwrap();
        assert_relative_eq!(v.value, 1.0 / (2.0 * PI), max_relative = 1e-12);
    }

    #[test]
    fn nsp_single_mode_and_mean() {
        let cfg = FormsConfig::default();
        let b = SpectralBasis::build(&unit(), Kind::Neumann, 200).unwrap();
        let u = line(Func1::cosine(0.0, 1.0, 1).unwrap().scale(2f64.sqrt()));
        let v = q_nsp(&u, &order(0.5), &b, &cfg).unwrap();
        assert_relative_eq!(v.value, PI, max_relative = 1e-12);
        let w = line(Func1::sine(0.0, 1.0, 1).unwrap());
        assert!(matches!(q_nsp(&w, &order(-0.5), &b, &cfg), Err(Error::MeanNotZero { .. })));
    }

    #[test]
    fn nsp_of_sine_matches_closed_coefficients() {
        // (sin pi x, sqrt2 cos j pi x) = sqrt2 * 2/(pi (1-j^2)) for even j, 0 for odd j
        let mut oracle = 0.0;
        for j in (2..200_000).step_by(2) {
            let jf = j as f64;
            let c = 2f64.sqrt() * 2.0 / (PI * (1.0 - jf * jf));
            oracle += jf * PI * c * c;
        }
        let cfg = FormsConfig::default();
        let b = SpectralBasis::build(&unit(), Kind::Neumann, 200).unwrap();
        let v = q_nsp(&line(Func1::sine(0.0, 1.0, 1).unwrap()), &order(0.5), &b, &cfg).unwrap();
        assert!((v.value - oracle).abs() < 1e-8, "{} vs {oracle}", v.value);
    }

    #[test]
    fn higher_order_reduction() {
        let cfg = FormsConfig::default();
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        let v = q_higher(&u, &order(2.5), FormKind::DSp, &unit(), &cfg).unwrap();
        assert_relative_eq!(v.value, PI.powi(5) / 2.0, max_relative = 1e-10);
        assert_eq!(v.method, Method::Reduced(1));
        let v = q_higher(&u, &order(1.5), FormKind::DSp, &unit(), &cfg).unwrap();
        assert_relative_eq!(v.value, PI.powi(3) / 2.0, max_relative = 1e-10);
        assert!(q_higher(&u, &order(0.5), FormKind::DSp, &unit(), &cfg).is_err());
    }

    #[test]
    fn regional_of_linear_function() {
        // int int (x-y)^2 |x-y|^{-3/2} over the unit square is 8/15
        let u = Func1::poly(0.0, 1.0, vec![0.5, 0.5]).unwrap();
        let r = gagliardo_double(&u, &[(0.0, 1.0)], 0.25, &FormsConfig::default().spec).unwrap();
        assert_relative_eq!(r.value, 8.0 / 15.0, max_relative = 1e-9);
        let c = gagliardo_constant(1, 0.25).unwrap();
        let q = q_nr(&line(u), &unit(), 0.25, &FormsConfig::default()).unwrap();
        assert_relative_eq!(q.value, c * 8.0 / 15.0, max_relative = 1e-9);
    }

    #[test]
    fn regional_of_constant_vanishes() {
        let u = line(Func1::constant(0.0, 1.0, 2.0).unwrap());
        let q = q_nr(&u, &unit(), 0.5, &FormsConfig::default()).unwrap();
        assert!(q.value.abs() < 1e-14);
    }

    #[test]
    fn constant_has_no_restricted_form_past_half() {
        let u = line(Func1::constant(0.0, 1.0, 1.0).unwrap());
        assert!(q_dr_gagliardo(&u, &unit(), 0.75, &FormsConfig::default()).is_err());
    }

    #[test]
    fn exterior_density_interval() {
        let s = 0.3;
        let x: f64 = 0.2;
        let want = (x.powf(-2.0 * s) + (1.0 - x).powf(-2.0 * s)) / (2.0 * s);
        assert_relative_eq!(exterior_density(x, &[(0.0, 1.0)], s), want, max_relative = 1e-14);
    }

    #[test]
    fn routes_agree_on_sine() {
        let cfg = FormsConfig::default();
        let u = line(Func1::sine(0.0, 1.0, 1).unwrap());
        let f = q_dr_fourier(&u, &order(0.25), &cfg).unwrap();
        let g = q_dr_gagliardo(&u, &unit(), 0.25, &cfg).unwrap();
        assert!((f.value - g.value).abs() <= 1e-5 * f.value, "{f:?} {g:?}");
    }

    #[test]
    fn near_zero_order_is_l2_norm() {
        let cfg = FormsConfig::default();
        let u = line(Func1::bump(0.0, 1.0, 2).unwrap());
        let norm = u.l2_norm_sq();
        for s in [1e-6, -1e-6] {
            let v = q_dr_fourier(&u, &order(s), &cfg).unwrap();
            assert!((v.value - norm).abs() < 1e-4 * norm);
        }
    }

    #[test]
    fn origin_check() {
        let cfg = FormsConfig::default();
        let u = line(Func1::bump(0.0, 1.0, 2).unwrap());
        assert!(matches!(q_dr_fourier(&u, &order(-0.75), &cfg), Err(Error::NonIntegrableOrigin(_))));
        let w = line(Func1::sine(0.0, 1.0, 2).unwrap());
        assert!(q_dr_fourier(&w, &order(-0.75), &cfg).is_ok());
    }

    #[test]
    fn comparison_examples() {
        let cfg = FormsConfig::default();
        let d = unit();
        let u = line(Func1::sine(0.0, 1.0, 2).unwrap());
        let r = compare_forms(&u, &d, 0.5, Pair::DrVsNsp, &cfg).unwrap();
        assert_eq!(r.predicted_sign, Sign::LeftGreater);
        assert_eq!(r.verdict(), Verdict::Confirmed);
        let r = compare_forms(&u, &d, -0.5, Pair::DrVsNsp, &cfg).unwrap();
        assert_eq!(r.predicted_sign, Sign::RightGreater);
        assert_eq!(r.verdict(), Verdict::Confirmed);
        let b = line(Func1::bump(0.0, 1.0, 3).unwrap());
        let r = compare_forms(&b, &d, 1.5, Pair::DrVsNsp, &cfg).unwrap();
        assert_eq!(r.predicted_sign, Sign::RightGreater);
        assert_eq!(r.verdict(), Verdict::Confirmed);
    }

    #[test]
    fn rectangle_forms() {
        let cfg = FormsConfig::default();
        let d = Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let g = Func2::product(Func1::sine(0.0, 1.0, 1).unwrap(), Func1::sine(0.0, 1.0, 1).unwrap());
        let u = TestFunction::Plane(g);
        let b = SpectralBasis::build(&d, Kind::Dirichlet, 32).unwrap();
        let v = q_dsp(&u, &order(0.5), &b, &cfg).unwrap();
        assert_relative_eq!(v.value, (2.0 * PI * PI).sqrt() / 4.0, max_relative = 1e-10);
        let bump = Func2::product(Func1::bump(0.0, 1.0, 3).unwrap(), Func1::bump(0.0, 1.0, 3).unwrap());
        let dr = q_dr_fourier(&TestFunction::Plane(bump), &order(0.5), &cfg).unwrap();
        assert!(dr.value > 0.0 && dr.error < 1e-6 * dr.value, "{dr:?}");
    }
}
