//! Pointwise values of the operators: singular integrals for the restricted
//! Dirichlet operator and the Riesz potential, image sums and eigenfunction
//! series for the spectral operators.

use std::cell::Cell;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::forms::Sign;
use crate::par;
use crate::quadrature::{integrate_power_weighted, integrate_with_breaks, IntegralResult, QuadratureSpec};
use crate::specfun::{hurwitz_zeta, pointwise_constant, riesz_constant, EvalResult};
use crate::spectral::{check_mean_zero_components, component_coefficients, eig_pow, interval_mode, Kind};
use crate::testfn::{Func1, Func2, TestFunction};

pub(crate) const TAYLOR_ORDER: usize = 36;
/// relative floor on reported errors for accumulated rounding
const ROUNDING: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Operator {
    DR,
    DSp,
    NSp,
}

impl Operator {
    pub fn label(&self) -> &'static str {
        match self {
            Operator::DR => "DR",
            Operator::DSp => "DSp",
            Operator::NSp => "NSp",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseRecord {
    pub x: Vec<f64>,
    pub value: f64,
    pub error: f64,
    pub operator: Operator,
    pub s: f64,
}

impl PointwiseRecord {
    fn new(x: &[f64], r: EvalResult, operator: Operator, s: f64) -> Self {
        Self { x: x.to_vec(), value: r.value, error: r.abs_error, operator, s }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PointwiseConfig {
    pub spec: QuadratureSpec,
    /// initial modes per interval for series evaluation
    pub n: usize,
    pub n_max: usize,
    /// initial modes per axis on rectangles
    pub n_rect: usize,
    pub n_rect_max: usize,
    pub target_rel: f64,
    pub mean_tol: f64,
}

impl Default for PointwiseConfig {
    fn default() -> Self {
        Self {
            spec: QuadratureSpec { rel_tol: 1e-10, abs_tol: 1e-14, max_subdivisions: 20_000 },
            n: 200,
            n_max: 819_200,
            n_rect: 64,
            n_rect_max: 512,
            target_rel: 1e-8,
            mean_tol: 1e-10,
        }
    }
}

fn interior(domain: &Domain, x: &[f64]) -> Result<f64> {
    match domain.interior_distance(x) {
        Some(d) if d > 0.0 => Ok(d),
        _ => Err(Error::domain("pointwise", format!("{x:?} is not an interior point"))),
    }
}

fn no_masses(u: &TestFunction) -> Result<()> {
    if u.has_diracs() {
        return Err(Error::InsufficientSmoothness("pointwise values of point masses".into()));
    }
    Ok(())
}

/// Distance from `x` to the nearest breakpoint other than `x` itself.
pub(crate) fn break_distance(f: &Func1, x: f64) -> f64 {
    f.breakpoints().iter().map(|e| (e - x).abs()).filter(|&d| d > 0.0).fold(f64::INFINITY, f64::min)
}

/// `(2u(x) - u(x+z) - u(x-z))/z^2` from the Taylor expansion at `x`.
pub(crate) fn second_difference_quotient(taylor: &[f64], z: f64) -> f64 {
    let mut acc = 0.0;
    let mut zp = 1.0;
    for m in (2..taylor.len()).step_by(2) {
        acc += taylor[m] * zp;
        zp *= z * z;
    }
    -2.0 * acc
}

/// Radius below which the Taylor expansion is used.
pub(crate) fn taylor_radius(delta: f64, omega: f64, polynomial: bool) -> f64 {
    if polynomial || omega == 0.0 {
        delta
    } else {
        delta.min(1.0 / omega)
    }
}

/// `int_0^R (2u(x) - u(x+z) - u(x-z)) z^{-1-2s} dz` with `x` at distance at least
/// `delta` from every breakpoint of `f` other than itself.
fn symmetric_hypersingular(f: &Func1, x: f64, s: f64, delta: f64, end: f64, spec: &QuadratureSpec) -> Result<IntegralResult> {
    let taylor = f.taylor(x, TAYLOR_ORDER);
    let d1 = taylor_radius(delta, f.max_frequency(), f.is_polynomial()).min(end);
    let near = integrate_power_weighted(|z| second_difference_quotient(&taylor, z), d1, 1.0 - 2.0 * s, spec)?;
    let ux = f.eval(x);
    let breaks: Vec<f64> = f.breakpoints().iter().map(|e| (e - x).abs()).collect();
    let far = integrate_with_breaks(
        |z| (2.0 * ux - f.eval(x + z) - f.eval(x - z)) * z.powf(-1.0 - 2.0 * s),
        d1,
        end,
        &breaks,
        spec,
    )?;
    Ok(near.add(far))
}

fn dr_line(f: &Func1, parts: &[(f64, f64)], s: f64, x: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    let boundary = parts.iter().flat_map(|&(a, b)| [a, b]).map(|e| (e - x).abs()).fold(f64::INFINITY, f64::min);
    let delta = 0.1f64.min(0.5 * boundary.min(break_distance(f, x)));
    let reach = f.hull().map_or(delta, |(lo, hi)| (x - lo).abs().max((hi - x).abs()).max(delta));
    let body = symmetric_hypersingular(f, x, s, delta, reach, spec)?;
    let c = pointwise_constant(1, s)?;
    let ux = f.eval(x);
    let outer = 2.0 * ux * reach.powf(-2.0 * s) / (2.0 * s);
    let rounding = ROUNDING * c * (body.value.abs() + outer.abs());
    Ok(EvalResult::new(c * (body.value + outer), c * body.error_estimate + rounding))
}

/// Taylor coefficients of `r -> u(p + r (cos t, sin t))` for a sum of products,
/// grouped by total degree.
struct PlaneTaylor {
    terms: Vec<(f64, Vec<f64>, Vec<f64>)>,
}

impl PlaneTaylor {
    fn new(g: &Func2, p: (f64, f64)) -> Self {
        Self {
            terms: g.terms.iter().map(|(c, f, h)| (*c, f.taylor(p.0, TAYLOR_ORDER), h.taylor(p.1, TAYLOR_ORDER))).collect(),
        }
    }

    /// Coefficient of `r^m` along direction `t`.
    fn coefficient(&self, m: usize, ct: f64, st: f64) -> f64 {
        let mut acc = 0.0;
        for (c, a, b) in &self.terms {
            let mut part = 0.0;
            for i in 0..=m {
                part += a[i] * b[m - i] * ct.powi(i as i32) * st.powi((m - i) as i32);
            }
            acc += c * part;
        }
        acc
    }

    fn second_difference_quotient(&self, r: f64, ct: f64, st: f64) -> f64 {
        let mut acc = 0.0;
        let mut rp = 1.0;
        for m in (2..=TAYLOR_ORDER).step_by(2) {
            acc += self.coefficient(m, ct, st) * rp;
            rp *= r * r;
        }
        -2.0 * acc
    }
}

struct Ray<'a> {
    g: &'a Func2,
    p: (f64, f64),
    xs: Vec<f64>,
    ys: Vec<f64>,
    bx: (f64, f64),
    by: (f64, f64),
}

impl<'a> Ray<'a> {
    fn new(g: &'a Func2, p: (f64, f64)) -> Option<Self> {
        let mut xs: Vec<f64> = g.terms.iter().flat_map(|(_, f, _)| f.breakpoints()).collect();
        let mut ys: Vec<f64> = g.terms.iter().flat_map(|(_, _, h)| h.breakpoints()).collect();
        for v in [&mut xs, &mut ys] {
            v.sort_by(f64::total_cmp);
            v.dedup();
        }
        let bx = (*xs.first()?, *xs.last()?);
        let by = (*ys.first()?, *ys.last()?);
        Some(Self { g, p, xs, ys, bx, by })
    }

    /// Radii where the rays `p +- r (c, s)` cross a breakpoint line, and the radius
    /// beyond which both rays have left the support box.
    fn breaks(&self, ct: f64, st: f64) -> (Vec<f64>, f64) {
        let mut out = Vec::new();
        for (lines, p0, d) in [(&self.xs, self.p.0, ct), (&self.ys, self.p.1, st)] {
            if d.abs() > 1e-300 {
                for &e in lines.iter() {
                    out.push(((e - p0) / d).abs());
                }
            }
        }
        let exit = |lo: f64, hi: f64, p0: f64, d: f64| -> f64 {
            if d.abs() <= 1e-300 {
                return f64::INFINITY;
            }
            ((lo - p0) / d).abs().max(((hi - p0) / d).abs())
        };
        let reach = exit(self.bx.0, self.bx.1, self.p.0, ct).min(exit(self.by.0, self.by.1, self.p.1, st));
        (out, reach)
    }

    /// Directions towards the corners of the breakpoint grid, folded into `[0, pi]`.
    fn corner_angles(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self
            .xs
            .iter()
            .flat_map(|&ex| self.ys.iter().map(move |&ey| (ex, ey)))
            .map(|(ex, ey)| (ey - self.p.1).atan2(ex - self.p.0).rem_euclid(PI))
            .collect();
        out.sort_by(f64::total_cmp);
        out.dedup();
        out
    }

    fn sum(&self, r: f64, ct: f64, st: f64) -> f64 {
        self.g.eval(self.p.0 + r * ct, self.p.1 + r * st) + self.g.eval(self.p.0 - r * ct, self.p.1 - r * st)
    }
}

fn record_inner(cell: &Cell<f64>, r: &Result<IntegralResult>) {
    if let Ok(v) = r {
        cell.set(cell.get() + v.error_estimate);
    }
}

fn line_distance(g: &Func2, p: (f64, f64)) -> f64 {
    let mut d = f64::INFINITY;
    for (_, f, h) in &g.terms {
        d = d.min(break_distance(f, p.0)).min(break_distance(h, p.1));
    }
    d
}

fn dr_plane(g: &Func2, domain_distance: f64, s: f64, p: (f64, f64), spec: &QuadratureSpec) -> Result<EvalResult> {
    let Some(ray) = Ray::new(g, p) else { return Ok(EvalResult::exact(0.0)) };
    let delta = 0.1f64.min(0.5 * domain_distance.min(line_distance(g, p)));
    let (wx, wy) = g.max_frequency();
    let polynomial = g.terms.iter().all(|(_, f, h)| f.is_polynomial() && h.is_polynomial());
    let d1 = taylor_radius(delta, 2.0 * wx.max(wy), polynomial);
    let taylor = PlaneTaylor::new(g, p);
    let up = g.eval(p.0, p.1);
    let inner_spec = spec.with_rel_tol(0.1 * spec.rel_tol);
    let inner_err = Cell::new(0.0);
    let radial = |t: f64| -> f64 {
        let (st, ct) = t.sin_cos();
        let (breaks, reach) = ray.breaks(ct, st);
        let reach = reach.max(d1);
        let near = integrate_power_weighted(|r| taylor.second_difference_quotient(r, ct, st), d1, 1.0 - 2.0 * s, &inner_spec);
        record_inner(&inner_err, &near);
        let far = integrate_with_breaks(|r| (2.0 * up - ray.sum(r, ct, st)) * r.powf(-1.0 - 2.0 * s), d1, reach, &breaks, &inner_spec);
        record_inner(&inner_err, &far);
        match (near, far) {
            (Ok(a), Ok(b)) => a.value + b.value + 2.0 * up * reach.powf(-2.0 * s) / (2.0 * s),
            _ => f64::NAN,
        }
    };
    let outer = integrate_with_breaks(radial, 0.0, PI, &ray.corner_angles(), spec)?;
    let c = pointwise_constant(2, s)? / 2.0;
    // 2 c int_0^pi with c the form constant
    let err = outer.error_estimate + inner_err.get() * PI / outer.evaluations.max(1) as f64;
    Ok(EvalResult::new(2.0 * c * outer.value, 2.0 * c * err))
}

/// `(-Laplacian)^s u(x)` for `u` extended by zero, `0 < s < 1`.
pub fn dr_pointwise(u: &TestFunction, domain: &Domain, s: f64, x: &[f64], cfg: &PointwiseConfig) -> Result<PointwiseRecord> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidOrder(format!("pointwise restricted operator needs s in (0,1), got {s}")));
    }
    no_masses(u)?;
    let dist = interior(domain, x)?;
    let r = match (u, domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => dr_line(f, parts, s, x[0], &cfg.spec)?,
        (TestFunction::Plane(g), Domain::Rectangle { .. }) => dr_plane(g, dist, s, (x[0], x[1]), &cfg.spec)?,
        _ => return Err(Error::UnsupportedDomain("function and domain dimensions differ".into())),
    };
    Ok(PointwiseRecord::new(x, r, Operator::DR, s))
}

/// Sum over the nonzero periodic images `sum_{m != 0} |d - 2Lm|^{-alpha}`.
fn direct_images(d: f64, len: f64, alpha: f64) -> Result<f64> {
    let p = 2.0 * len;
    let t = d / p;
    Ok(p.powf(-alpha) * (hurwitz_zeta(alpha, 1.0 - t)? + hurwitz_zeta(alpha, 1.0 + t)?))
}

/// Sum over the reflected images `sum_m |e - 2Lm|^{-alpha}` for `0 < e < 2L`.
fn reflected_images(e: f64, len: f64, alpha: f64) -> Result<f64> {
    let p = 2.0 * len;
    let t = e / p;
    Ok(p.powf(-alpha) * (hurwitz_zeta(alpha, t)? + hurwitz_zeta(alpha, 1.0 - t)?))
}

/// Spectral operator of order `0 < s < 1` on one interval through the singular
/// integral of the periodic even (Neumann) or odd (Dirichlet) extension.
fn spectral_images(f: &Func1, (a, b): (f64, f64), kind: Kind, s: f64, x: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    let fc = f.restrict(a, b);
    if fc.pieces.is_empty() {
        return Ok(EvalResult::exact(0.0));
    }
    let len = b - a;
    let alpha = 1.0 + 2.0 * s;
    let ux = fc.eval(x);
    let mut breaks = fc.breakpoints();
    breaks.extend([a, b]);
    let rho = (0.1 * len).min(0.5 * (x - a).min(b - x).min(break_distance(&fc, x)));
    let pv_near = symmetric_hypersingular(&fc, x, s, rho, rho, spec)?;
    let direct = |y: f64| (ux - fc.eval(y)) * (x - y).abs().powf(-alpha);
    let left = integrate_with_breaks(direct, a, x - rho, &breaks, spec)?;
    let right = integrate_with_breaks(direct, x + rho, b, &breaks, spec)?;
    let sign = match kind {
        Kind::Neumann => -1.0,
        Kind::Dirichlet => 1.0,
    };
    let zeta_failed = Cell::new(false);
    let images = integrate_with_breaks(
        |y| {
            let uy = fc.eval(y);
            let r = direct_images(x - y, len, alpha).and_then(|d| Ok((d, reflected_images(x - a + (y - a), len, alpha)?)));
            match r {
                Ok((d, e)) => (ux - uy) * d + (ux + sign * uy) * e,
                Err(_) => {
                    zeta_failed.set(true);
                    0.0
                }
            }
        },
        a,
        b,
        &breaks,
        spec,
    )?;
    if zeta_failed.get() {
        return Err(Error::domain("spectral_pointwise", "image sum outside the zeta domain"));
    }
    let total = pv_near.add(left).add(right).add(images);
    let c = pointwise_constant(1, s)?;
    Ok(EvalResult::new(c * total.value, c * total.error_estimate + ROUNDING * c * total.value.abs()))
}

fn series_line(f: &Func1, (a, b): (f64, f64), kind: Kind, s: f64, x: f64, cfg: &PointwiseConfig) -> Result<EvalResult> {
    let mut n = cfg.n.max(16);
    loop {
        let cc = component_coefficients(f, a, b, kind, n);
        let v = cc.partial_pointwise(s, x);
        let tail = cc.tail.pointwise(s)?;
        if tail <= cfg.target_rel * v.abs() || n >= cfg.n_max {
            return Ok(EvalResult::new(v, tail + n as f64 * f64::EPSILON * v.abs().max(tail)));
        }
        n = (n * 4).min(cfg.n_max);
    }
}

fn series_rect(g: &Func2, x: (f64, f64), y: (f64, f64), kind: Kind, s: f64, p: (f64, f64), cfg: &PointwiseConfig) -> Result<EvalResult> {
    if s < 0.0 {
        return Err(Error::UnsupportedDomain("negative orders are not supported on rectangles".into()));
    }
    let first = match kind {
        Kind::Dirichlet => 1,
        Kind::Neumann => 0,
    };
    let (lx, ly) = (x.1 - x.0, y.1 - y.0);
    let mut n = cfg.n_rect.clamp(8, cfg.n_rect_max);
    loop {
        let terms: Vec<_> = g
            .terms
            .iter()
            .map(|(c, f, h)| (*c, component_coefficients(f, x.0, x.1, kind, n), component_coefficients(h, y.0, y.1, kind, n)))
            .collect();
        let phx: Vec<f64> = (0..=n).map(|j| interval_mode(kind, x.0, x.1, j as u32, p.0)).collect();
        let phy: Vec<f64> = (0..=n).map(|k| interval_mode(kind, y.0, y.1, k as u32, p.1)).collect();
        let mut value = 0.0;
        let mut scale = 0.0;
        for j in first..=n {
            let lj = (j as f64 * PI / lx).powi(2);
            for k in first..=n {
                let c: f64 = terms.iter().map(|(a, f, h)| a * f.values[j] * h.values[k]).sum();
                let t = eig_pow(lj + (k as f64 * PI / ly).powi(2), s) * c * phx[j] * phy[k];
                value += t;
                scale += t.abs();
            }
        }
        let data = crate::spectral::Coefficients {
            values: vec![],
            tail_estimate: 0.0,
            data: crate::spectral::CoefData::Rect(terms),
        };
        let tail = data.rect_pointwise_tail(s)?;
        if tail <= cfg.target_rel * value.abs() || n >= cfg.n_rect_max {
            return Ok(EvalResult::new(value, tail + 64.0 * f64::EPSILON * scale));
        }
        n = (n * 2).min(cfg.n_rect_max);
    }
}

/// `sum_j eig_j^s (u, phi_j) phi_j(x)` for Dirichlet or Neumann data. Orders in
/// `(0,1)` on intervals use the image representation, the rest the series.
pub fn spectral_pointwise(
    u: &TestFunction,
    domain: &Domain,
    s: f64,
    kind: Kind,
    x: &[f64],
    cfg: &PointwiseConfig,
) -> Result<PointwiseRecord> {
    if !s.is_finite() || s == 0.0 || s <= -1.0 {
        return Err(Error::InvalidOrder(format!("s = {s}")));
    }
    no_masses(u)?;
    interior(domain, x)?;
    let op = match kind {
        Kind::Dirichlet => Operator::DSp,
        Kind::Neumann => Operator::NSp,
    };
    if kind == Kind::Neumann && s < 0.0 {
        check_mean_zero_components(u, domain, cfg.mean_tol)?;
    }
    let r = match (u, domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            let comp = parts[domain.component_of(x[0]).expect("interior point")];
            if s > 0.0 && s < 1.0 {
                spectral_images(f, comp, kind, s, x[0], &cfg.spec)?
            } else {
                series_line(f, comp, kind, s, x[0], cfg)?
            }
        }
        (TestFunction::Plane(g), Domain::Rectangle { x: rx, y: ry }) => series_rect(g, *rx, *ry, kind, s, (x[0], x[1]), cfg)?,
        _ => return Err(Error::UnsupportedDomain("function and domain dimensions differ".into())),
    };
    Ok(PointwiseRecord::new(x, r, op, s))
}

fn riesz_line(f: &Func1, sigma: f64, x: f64, spec: &QuadratureSpec) -> Result<EvalResult> {
    let Some((lo, hi)) = f.hull() else { return Ok(EvalResult::exact(0.0)) };
    let delta = 0.1f64.min(0.5 * break_distance(f, x));
    let reach = (x - lo).abs().max((hi - x).abs());
    let gamma = 2.0 * sigma - 1.0;
    let pair = |z: f64| f.eval(x + z) + f.eval(x - z);
    let d = delta.min(reach);
    let near = integrate_power_weighted(pair, d, gamma, spec)?;
    let breaks: Vec<f64> = f.breakpoints().iter().map(|e| (e - x).abs()).collect();
    let far = integrate_with_breaks(|z| pair(z) * z.powf(gamma), d, reach, &breaks, spec)?;
    let k = riesz_constant(1, sigma)?;
    let total = near.add(far);
    Ok(EvalResult::new(k * total.value, k * total.error_estimate))
}

fn riesz_plane(g: &Func2, sigma: f64, p: (f64, f64), spec: &QuadratureSpec) -> Result<EvalResult> {
    let Some(ray) = Ray::new(g, p) else { return Ok(EvalResult::exact(0.0)) };
    let delta = 0.1f64.min(0.5 * line_distance(g, p));
    let gamma = 2.0 * sigma - 1.0;
    let inner_spec = spec.with_rel_tol(0.1 * spec.rel_tol);
    let inner_err = Cell::new(0.0);
    let radial = |t: f64| -> f64 {
        let (st, ct) = t.sin_cos();
        let (breaks, reach) = ray.breaks(ct, st);
        let d = delta.min(reach);
        let near = integrate_power_weighted(|r| ray.sum(r, ct, st), d, gamma, &inner_spec);
        record_inner(&inner_err, &near);
        let far = integrate_with_breaks(|r| ray.sum(r, ct, st) * r.powf(gamma), d, reach, &breaks, &inner_spec);
        record_inner(&inner_err, &far);
        match (near, far) {
            (Ok(a), Ok(b)) => a.value + b.value,
            _ => f64::NAN,
        }
    };
    let outer = integrate_with_breaks(radial, 0.0, PI, &ray.corner_angles(), spec)?;
    let k = riesz_constant(2, sigma)?;
    let err = outer.error_estimate + inner_err.get() * PI / outer.evaluations.max(1) as f64;
    Ok(EvalResult::new(k * outer.value, k * err))
}

/// `kappa int u(y) |x-y|^{2 sigma - n} dy`, the restricted Dirichlet operator of
/// order `-sigma`; requires `2 sigma < n`.
pub fn riesz_pointwise(u: &TestFunction, sigma: f64, x: &[f64], cfg: &PointwiseConfig) -> Result<PointwiseRecord> {
    no_masses(u)?;
    let n = u.dimension();
    riesz_constant(n, sigma)?;
    let r = match (u, x) {
        (TestFunction::Line(f), [px]) => riesz_line(f, sigma, *px, &cfg.spec)?,
        (TestFunction::Plane(g), [px, py]) => riesz_plane(g, sigma, (*px, *py), &cfg.spec)?,
        _ => return Err(Error::domain("riesz_pointwise", "point and function dimensions differ")),
    };
    Ok(PointwiseRecord::new(x, r, Operator::DR, -sigma))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PointwisePair {
    DrVsNsp,
    DspVsDr,
}

impl PointwisePair {
    pub fn operators(&self) -> (Operator, Operator) {
        match self {
            PointwisePair::DrVsNsp => (Operator::DR, Operator::NSp),
            PointwisePair::DspVsDr => (Operator::DSp, Operator::DR),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseComparison {
    pub x: Vec<f64>,
    pub left: PointwiseRecord,
    pub right: PointwiseRecord,
    pub margin: f64,
    pub conclusive: bool,
    /// `None` when no sign is predicted, e.g. on non-convex domains
    pub predicted: Option<Sign>,
}

impl PointwiseComparison {
    fn new(left: PointwiseRecord, right: PointwiseRecord, predicted: Option<Sign>) -> Self {
        let margin = left.value - right.value;
        let conclusive = margin.abs() > 3.0 * (left.error + right.error);
        Self { x: left.x.clone(), left, right, margin, conclusive, predicted }
    }

    /// Conclusive and on the predicted side.
    pub fn confirmed(&self) -> bool {
        match self.predicted {
            Some(Sign::LeftGreater) => self.conclusive && self.margin > 0.0,
            Some(Sign::RightGreater) => self.conclusive && self.margin < 0.0,
            None => false,
        }
    }
}

pub fn evaluate_operator(
    u: &TestFunction,
    domain: &Domain,
    s: f64,
    op: Operator,
    x: &[f64],
    cfg: &PointwiseConfig,
) -> Result<PointwiseRecord> {
    match op {
        Operator::DR if s < 0.0 => riesz_pointwise(u, -s, x, cfg),
        Operator::DR => dr_pointwise(u, domain, s, x, cfg),
        Operator::DSp => spectral_pointwise(u, domain, s, Kind::Dirichlet, x, cfg),
        Operator::NSp => spectral_pointwise(u, domain, s, Kind::Neumann, x, cfg),
    }
}

fn check_nonnegative(u: &TestFunction, domain: &Domain) -> Result<()> {
    let min = match (u, domain) {
        (TestFunction::Line(f), _) => f.sampled_min(),
        (TestFunction::Plane(g), Domain::Rectangle { x, y }) => g.sampled_min(*x, *y),
        _ => return Err(Error::UnsupportedDomain("function and domain dimensions differ".into())),
    };
    if min < -1e-12 {
        return Err(Error::domain("compare_pointwise", format!("u takes the negative value {min:e}")));
    }
    Ok(())
}

/// Both operators of the pair at every grid point, grid points in parallel.
pub fn compare_pointwise(
    u: &TestFunction,
    domain: &Domain,
    s: f64,
    grid: &[Vec<f64>],
    pair: PointwisePair,
    cfg: &PointwiseConfig,
) -> Result<Vec<PointwiseComparison>> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::InvalidOrder(format!("pointwise comparisons need s in (0,1), got {s}")));
    }
    check_nonnegative(u, domain)?;
    let predicted = match pair {
        PointwisePair::DrVsNsp if !domain.is_convex() => None,
        _ => Some(Sign::LeftGreater),
    };
    let (l, r) = pair.operators();
    par::map(grid, |x| {
        let left = evaluate_operator(u, domain, s, l, x, cfg)?;
        let right = evaluate_operator(u, domain, s, r, x, cfg)?;
        Ok(PointwiseComparison::new(left, right, predicted))
    })
    .into_iter()
    .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleRow {
    pub nsp: PointwiseRecord,
    pub dr: PointwiseRecord,
    pub nsp_vanishes: bool,
    pub dr_negative: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    pub s: f64,
    pub rows: Vec<CounterexampleRow>,
}

impl CounterexampleReport {
    pub fn reproduced(&self) -> bool {
        !self.rows.is_empty() && self.rows.iter().all(|r| r.nsp_vanishes && r.dr_negative)
    }
}

/// On a disconnected domain with `u` supported in one component, the Neumann
/// operator vanishes on the others while the restricted Dirichlet one is negative.
pub fn counterexample_disconnected(
    u: &TestFunction,
    domain: &Domain,
    s: f64,
    grid: &[Vec<f64>],
    cfg: &PointwiseConfig,
) -> Result<CounterexampleReport> {
    let parts = domain.components()?;
    if parts.len() < 2 {
        return Err(Error::UnsupportedDomain("the domain must have several components".into()));
    }
    check_nonnegative(u, domain)?;
    let f = u.line()?;
    for x in grid {
        let comp = domain.component_of(x[0]).ok_or_else(|| Error::domain("counterexample", "grid point outside"))?;
        let (a, b) = parts[comp];
        if f.pieces.iter().any(|p| p.b > a && p.a < b) {
            return Err(Error::domain("counterexample", format!("u does not vanish on ({a}, {b})")));
        }
    }
    let rows: Result<Vec<_>> = par::map(grid, |x| {
        let nsp = spectral_pointwise(u, domain, s, Kind::Neumann, x, cfg)?;
        let dr = dr_pointwise(u, domain, s, x, cfg)?;
        let nsp_vanishes = nsp.value.abs() <= nsp.error.max(1e-8);
        let dr_negative = dr.value < -3.0 * dr.error;
        Ok(CounterexampleRow { nsp, dr, nsp_vanishes, dr_negative })
    })
    .into_iter()
    .collect();
    Ok(CounterexampleReport { s, rows: rows? })
}
