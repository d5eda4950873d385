//! Dirichlet and Neumann eigenbases in closed form, spectral coefficients of test
//! functions, and truncation-tail bounds derived from coefficient decay.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::domain::Domain;
use crate::error::{Error, Result};
use crate::specfun::EvalResult;
use crate::testfn::{Func1, TestFunction};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Kind {
    Dirichlet,
    Neumann,
}

impl Kind {
    fn first(self) -> u32 {
        match self {
            Kind::Dirichlet => 1,
            Kind::Neumann => 0,
        }
    }
}

/// One eigenpair. For intervals `component` names the interval and `k` is 0; for
/// rectangles `(j, k)` are the two mode numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Mode {
    pub index: usize,
    pub eigenvalue: f64,
    pub kind: Kind,
    pub component: usize,
    pub j: u32,
    pub k: u32,
}

/// Normalised eigenfunction of an interval `[a, b]`, zero outside.
pub fn interval_mode(kind: Kind, a: f64, b: f64, j: u32, x: f64) -> f64 {
    if x < a || x > b {
        return 0.0;
    }
    let l = b - a;
    let w = j as f64 * PI / l;
    match (kind, j) {
        (Kind::Neumann, 0) => 1.0 / l.sqrt(),
        (Kind::Neumann, _) => (2.0 / l).sqrt() * (w * (x - a)).cos(),
        (Kind::Dirichlet, _) => (2.0 / l).sqrt() * (w * (x - a)).sin(),
    }
}

fn mode_sup(kind: Kind, l: f64, j: u32) -> f64 {
    if kind == Kind::Neumann && j == 0 {
        1.0 / l.sqrt()
    } else {
        (2.0 / l).sqrt()
    }
}

fn interval_eigenvalue(l: f64, j: u32) -> f64 {
    let w = j as f64 * PI / l;
    w * w
}

/// `lambda^s` with `0^s = 0` for `s > 0` and `0^0 = 1`.
pub(crate) fn eig_pow(lambda: f64, s: f64) -> f64 {
    if lambda == 0.0 {
        if s == 0.0 {
            1.0
        } else if s > 0.0 {
            0.0
        } else {
            f64::INFINITY
        }
    } else {
        lambda.powf(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralBasis {
    pub domain: Domain,
    pub kind: Kind,
    /// Modes per interval, or per axis for rectangles (excluding the zero mode).
    pub n: usize,
    pub modes: Vec<Mode>,
}

impl SpectralBasis {
    pub fn build(domain: &Domain, kind: Kind, n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::domain("build_basis", "truncation must be positive"));
        }
        let first = kind.first();
        let mut modes = Vec::new();
        match domain {
            Domain::Intervals(parts) => {
                for (c, &(a, b)) in parts.iter().enumerate() {
                    for j in first..=n as u32 {
                        modes.push(Mode {
                            index: 0,
                            eigenvalue: interval_eigenvalue(b - a, j),
                            kind,
                            component: c,
                            j,
                            k: 0,
                        });
                    }
                }
            }
            Domain::Rectangle { x, y } => {
                for j in first..=n as u32 {
                    for k in first..=n as u32 {
                        modes.push(Mode {
                            index: 0,
                            eigenvalue: interval_eigenvalue(x.1 - x.0, j) + interval_eigenvalue(y.1 - y.0, k),
                            kind,
                            component: 0,
                            j,
                            k,
                        });
                    }
                }
            }
        }
        modes.sort_by(|p, q| {
            p.eigenvalue
                .total_cmp(&q.eigenvalue)
                .then(p.component.cmp(&q.component))
                .then(p.j.cmp(&q.j))
                .then(p.k.cmp(&q.k))
        });
        for (i, m) in modes.iter_mut().enumerate() {
            m.index = i;
        }
        Ok(Self { domain: domain.clone(), kind, n, modes })
    }

    pub fn eval_mode(&self, mode: &Mode, x: &[f64]) -> f64 {
        match (&self.domain, x) {
            (Domain::Intervals(parts), [px]) => {
                let (a, b) = parts[mode.component];
                interval_mode(self.kind, a, b, mode.j, *px)
            }
            (Domain::Rectangle { x, y }, [px, py]) => {
                interval_mode(self.kind, x.0, x.1, mode.j, *px) * interval_mode(self.kind, y.0, y.1, mode.k, *py)
            }
            _ => 0.0,
        }
    }
}

/// Decay model `|c_j| <= C j^{-q}` for the coefficients beyond the truncation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeqTail {
    pub len: f64,
    pub kind: Kind,
    pub n: usize,
    /// decay exponent, infinite when the reflected extension is smooth
    pub q: f64,
    pub c: f64,
    /// largest of the last computed coefficients, used when `q` is infinite
    pub noise: f64,
    /// `||u||^2 - sum c_j^2` when `u` is square integrable
    pub rest_l2: Option<f64>,
}

impl SeqTail {
    fn growth(&self, s: f64) -> f64 {
        // largest lambda^s over the first N modes, for the degenerate bound
        let lo = PI / self.len;
        let hi = self.n as f64 * PI / self.len;
        if s >= 0.0 {
            hi.powf(2.0 * s)
        } else {
            lo.powf(2.0 * s)
        }
    }

    /// Bound on `sum_{j>N} lambda_j^s c_j^2`.
    pub fn form(&self, s: f64) -> Result<f64> {
        if self.q.is_infinite() {
            return Ok(self.noise * self.noise * self.n as f64 * self.growth(s));
        }
        let parseval = match (self.rest_l2, s <= 0.0) {
            (Some(r), true) => Some(interval_eigenvalue(self.len, self.n as u32 + 1).powf(s) * r),
            _ => None,
        };
        let e = 2.0 * self.q - 2.0 * s - 1.0;
        if e <= 0.0 {
            return parseval.ok_or_else(|| {
                Error::TailUnbounded(format!("coefficients decay like j^-{} which is too slow for order {s}", self.q))
            });
        }
        let n = self.n as f64;
        let bound = self.c * self.c * (PI / self.len).powf(2.0 * s) * n.powf(-e) / e;
        Ok(parseval.map_or(bound, |p| p.min(bound)))
    }

    /// Bound on `sum_{j>N} lambda_j^s |c_j| sup|phi_j|`.
    pub fn pointwise(&self, s: f64) -> Result<f64> {
        let sup = (2.0 / self.len).sqrt();
        if self.q.is_infinite() {
            return Ok(self.noise * sup * self.n as f64 * self.growth(s));
        }
        let e = self.q - 2.0 * s - 1.0;
        if e <= 0.0 {
            return Err(Error::TailUnbounded(format!(
                "series for order {s} does not converge absolutely (coefficients decay like j^-{})",
                self.q
            )));
        }
        let n = self.n as f64;
        Ok(sup * self.c * (PI / self.len).powf(2.0 * s) * n.powf(-e) / e)
    }
}

/// Coefficients of a function on one interval, indexed by mode number `j`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComponentCoefs {
    pub a: f64,
    pub b: f64,
    pub kind: Kind,
    pub values: Vec<f64>,
    pub tail: SeqTail,
}

impl ComponentCoefs {
    fn first(&self) -> usize {
        self.kind.first() as usize
    }

    fn eig(&self, j: usize) -> f64 {
        interval_eigenvalue(self.b - self.a, j as u32)
    }

    /// `sum_{j<=N} lambda_j^s c_j^2`; the zero mode is skipped for `s < 0`.
    pub fn partial_form(&self, s: f64) -> f64 {
        (self.first()..self.values.len())
            .filter(|&j| !(s < 0.0 && j == 0))
            .map(|j| eig_pow(self.eig(j), s) * self.values[j] * self.values[j])
            .sum()
    }

    fn partial_abs(&self, s: f64) -> f64 {
        let l = self.b - self.a;
        (self.first()..self.values.len())
            .filter(|&j| !(s < 0.0 && j == 0))
            .map(|j| eig_pow(self.eig(j), s) * self.values[j].abs() * mode_sup(self.kind, l, j as u32))
            .sum()
    }

    pub fn partial_pointwise(&self, s: f64, x: f64) -> f64 {
        (self.first()..self.values.len())
            .filter(|&j| !(s < 0.0 && j == 0))
            .map(|j| eig_pow(self.eig(j), s) * self.values[j] * interval_mode(self.kind, self.a, self.b, j as u32, x))
            .sum()
    }
}

/// First order at which the reflected extension of `f` across `[a, b]` has a jump;
/// the coefficients then decay like `j^{-(order+1)}`. Point masses count as order -1.
pub fn decay_exponent(f: &Func1, a: f64, b: f64, kind: Kind) -> f64 {
    const ORDERS: usize = 40;
    let mut q = f64::INFINITY;
    for e in f.breakpoints() {
        if e < a || e > b {
            continue;
        }
        let boundary = e == a || e == b;
        let mass: f64 = f.diracs.iter().filter(|d| d.at == e).map(|d| d.weight).sum();
        if mass != 0.0 && !(boundary && kind == Kind::Dirichlet) {
            q = q.min(0.0);
        }
        if boundary {
            let d = f.inner_endpoint_derivs(e, e == b, ORDERS);
            let parity = match kind {
                Kind::Dirichlet => 0,
                Kind::Neumann => 1,
            };
            if let Some(r) = (0..ORDERS).find(|&r| r % 2 == parity && d[r].abs() > f.jump_threshold(r)) {
                q = q.min(r as f64 + 1.0);
            }
        } else {
            let jumps = f.jumps(e, ORDERS);
            if let Some(r) = (0..ORDERS).find(|&r| jumps[r].abs() > f.jump_threshold(r)) {
                q = q.min(r as f64 + 1.0);
            }
        }
    }
    q
}

/// Coefficients of `f` restricted to `[a, b]` against the first `n` modes.
pub fn component_coefficients(f: &Func1, a: f64, b: f64, kind: Kind, n: usize) -> ComponentCoefs {
    let fc = f.restrict(a, b);
    let l = b - a;
    let norm = (2.0 / l).sqrt();
    let values: Vec<f64> = (0..=n)
        .map(|j| {
            let w = j as f64 * PI / l;
            // int f(x) exp(i w (x - a)) dx
            let z = Complex64::from_polar(1.0, -w * a) * fc.fourier_integral(-w);
            match (kind, j) {
                (Kind::Dirichlet, 0) => 0.0,
                (Kind::Dirichlet, _) => norm * z.im,
                (Kind::Neumann, 0) => z.re / l.sqrt(),
                (Kind::Neumann, _) => norm * z.re,
            }
        })
        .collect();
    let q = decay_exponent(&fc, a, b, kind);
    let lo = n.saturating_sub(9).max(1);
    let noise = values[lo..=n].iter().fold(0.0f64, |m, c| m.max(c.abs()));
    let c = if q.is_finite() {
        2.0 * (lo..=n).map(|j| values[j].abs() * (j as f64).powf(q)).fold(0.0, f64::max)
    } else {
        0.0
    };
    let rest_l2 = if fc.has_diracs() {
        None
    } else {
        let captured: f64 = values.iter().map(|c| c * c).sum();
        Some((fc.l2_norm_sq() - captured).max(0.0))
    };
    ComponentCoefs { a, b, kind, values, tail: SeqTail { len: l, kind, n, q, c, noise, rest_l2 } }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CoefData {
    Line(Vec<ComponentCoefs>),
    Rect(Vec<(f64, ComponentCoefs, ComponentCoefs)>),
}

/// Spectral coefficients aligned with `basis.modes`, plus the data needed for tails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    pub values: Vec<f64>,
    /// bound on the squared coefficients beyond the truncation, infinite when the
    /// function is not square integrable
    pub tail_estimate: f64,
    pub data: CoefData,
}

fn check_support(u: &TestFunction, domain: &Domain) -> Result<()> {
    match (u, domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            let inside = |lo: f64, hi: f64| parts.iter().any(|&(a, b)| lo >= a && hi <= b);
            for p in &f.pieces {
                if !inside(p.a, p.b) {
                    return Err(Error::domain("coefficients", format!("piece [{}, {}] leaves the domain", p.a, p.b)));
                }
            }
            for d in &f.diracs {
                if !inside(d.at, d.at) {
                    return Err(Error::domain("coefficients", format!("point mass at {} outside the domain", d.at)));
                }
            }
            Ok(())
        }
        (TestFunction::Plane(g), Domain::Rectangle { x, y }) => {
            for (_, f, h) in &g.terms {
                for (fun, (a, b)) in [(f, x), (h, y)] {
                    if let Some((lo, hi)) = fun.hull() {
                        if lo < *a || hi > *b {
                            return Err(Error::domain("coefficients", "factor leaves the rectangle"));
                        }
                    }
                }
            }
            Ok(())
        }
        _ => Err(Error::UnsupportedDomain("function and domain dimensions differ".into())),
    }
}

pub fn coefficients(u: &TestFunction, basis: &SpectralBasis) -> Result<Coefficients> {
    check_support(u, &basis.domain)?;
    let kind = basis.kind;
    let n = basis.n;
    match (u, &basis.domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            let comps: Vec<ComponentCoefs> =
                parts.iter().map(|&(a, b)| component_coefficients(f, a, b, kind, n)).collect();
            let values = basis.modes.iter().map(|m| comps[m.component].values[m.j as usize]).collect();
            // infinite when point masses keep the coefficients from decaying
            let tail = comps.iter().map(|c| c.tail.form(0.0).unwrap_or(f64::INFINITY)).sum();
            Ok(Coefficients { values, tail_estimate: tail, data: CoefData::Line(comps) })
        }
        (TestFunction::Plane(g), Domain::Rectangle { x, y }) => {
            let terms: Vec<(f64, ComponentCoefs, ComponentCoefs)> = g
                .terms
                .iter()
                .map(|(c, f, h)| {
                    (*c, component_coefficients(f, x.0, x.1, kind, n), component_coefficients(h, y.0, y.1, kind, n))
                })
                .collect();
            let values = basis
                .modes
                .iter()
                .map(|m| terms.iter().map(|(c, f, h)| c * f.values[m.j as usize] * h.values[m.k as usize]).sum())
                .collect();
            let data = CoefData::Rect(terms);
            let mut out = Coefficients { values, tail_estimate: 0.0, data };
            out.tail_estimate = out.rect_form_tail(0.0).unwrap_or(f64::INFINITY);
            Ok(out)
        }
        _ => unreachable!("checked by check_support"),
    }
}

impl Coefficients {
    pub(crate) fn rect_form_tail(&self, s: f64) -> Result<f64> {
        let CoefData::Rect(terms) = &self.data else { return Ok(0.0) };
        let mut root = 0.0;
        for (a, f, g) in terms {
            let (tf0, tfs, tg0, tgs) = (f.tail.form(0.0)?, f.tail.form(s)?, g.tail.form(0.0)?, g.tail.form(s)?);
            let (af0, afs, ag0, ags) = (f.partial_form(0.0), f.partial_form(s), g.partial_form(0.0), g.partial_form(s));
            let t = tfs * (ag0 + tg0) + tf0 * (ags + tgs) + (afs + tfs) * tg0 + (af0 + tf0) * tgs;
            root += a.abs() * t.sqrt();
        }
        Ok(root * root)
    }

    pub(crate) fn rect_pointwise_tail(&self, s: f64) -> Result<f64> {
        let CoefData::Rect(terms) = &self.data else { return Ok(0.0) };
        let mut acc = 0.0;
        for (a, f, g) in terms {
            let (pf0, pfs, pg0, pgs) =
                (f.tail.pointwise(0.0)?, f.tail.pointwise(s)?, g.tail.pointwise(0.0)?, g.tail.pointwise(s)?);
            let (bf0, bfs, bg0, bgs) = (f.partial_abs(0.0), f.partial_abs(s), g.partial_abs(0.0), g.partial_abs(s));
            acc += a.abs() * (pfs * (bg0 + pg0) + pf0 * (bgs + pgs) + (bfs + pfs) * pg0 + (bf0 + pf0) * pgs);
        }
        Ok(acc)
    }

    /// `sum_j lambda_j^s c_j^2` with the truncation tail as error. Zero modes are
    /// dropped for `s < 0`.
    pub fn form_series(&self, basis: &SpectralBasis, s: f64) -> Result<EvalResult> {
        if basis.domain.dimension() == 2 && s < 0.0 {
            return Err(Error::UnsupportedDomain("negative orders are not supported on rectangles".into()));
        }
        let value: f64 = basis
            .modes
            .iter()
            .zip(&self.values)
            .filter(|(m, _)| !(s < 0.0 && m.eigenvalue == 0.0))
            .map(|(m, c)| eig_pow(m.eigenvalue, s) * c * c)
            .sum();
        let tail = match &self.data {
            CoefData::Line(comps) => {
                let mut t = 0.0;
                for c in comps {
                    t += c.tail.form(s)?;
                }
                t
            }
            CoefData::Rect(_) => self.rect_form_tail(s)?,
        };
        Ok(EvalResult::new(value, tail + 64.0 * f64::EPSILON * value.abs()))
    }

    /// `sum_j lambda_j^s c_j phi_j(x)`, requiring absolute convergence of the tail.
    pub fn pointwise_series(&self, basis: &SpectralBasis, s: f64, x: &[f64]) -> Result<EvalResult> {
        if basis.domain.dimension() == 2 && s < 0.0 {
            return Err(Error::UnsupportedDomain("negative orders are not supported on rectangles".into()));
        }
        let mut value = 0.0;
        let mut scale = 0.0;
        for (m, c) in basis.modes.iter().zip(&self.values) {
            if s < 0.0 && m.eigenvalue == 0.0 {
                continue;
            }
            let t = eig_pow(m.eigenvalue, s) * c * basis.eval_mode(m, x);
            value += t;
            scale += t.abs();
        }
        let tail = match &self.data {
            CoefData::Line(comps) => {
                let comp = basis.domain.component_of(x[0]);
                match comp {
                    Some(i) => comps[i].tail.pointwise(s)?,
                    None => 0.0,
                }
            }
            CoefData::Rect(_) => self.rect_pointwise_tail(s)?,
        };
        Ok(EvalResult::new(value, tail + 64.0 * f64::EPSILON * scale))
    }
}

/// `|int u| <= tol ||u|| |Omega|^{1/2}`.
pub fn check_mean_zero(u: &TestFunction, domain: &Domain, tol: f64) -> bool {
    let measure = domain.measure();
    let size = match u {
        TestFunction::Line(f) => f.size(measure),
        TestFunction::Plane(g) => g.l2_norm_sq().sqrt(),
    };
    u.integral().abs() <= tol * size * measure.sqrt()
}

/// Mean-zero test on every interval of a 1D domain separately, which is what
/// dropping all Neumann zero modes requires.
pub fn check_mean_zero_components(u: &TestFunction, domain: &Domain, tol: f64) -> Result<()> {
    let measure = domain.measure();
    match (u, domain) {
        (TestFunction::Line(f), Domain::Intervals(parts)) => {
            let size = f.size(measure);
            for &(a, b) in parts {
                let mean = f.restrict(a, b).integral();
                let bound = tol * size * measure.sqrt();
                if mean.abs() > bound {
                    return Err(Error::MeanNotZero { mean: mean.abs(), tol: bound });
                }
            }
            Ok(())
        }
        _ => {
            let mean = u.integral();
            if check_mean_zero(u, domain, tol) {
                Ok(())
            } else {
                Err(Error::MeanNotZero { mean: mean.abs(), tol })
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testfn::Func2;
    use approx::assert_relative_eq;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn interval_spectra() {
        let b = SpectralBasis::build(&unit(), Kind::Dirichlet, 3).unwrap();
        let eig: Vec<f64> = b.modes.iter().map(|m| m.eigenvalue).collect();
        assert_eq!(eig, vec![PI * PI, 4.0 * PI * PI, 9.0 * PI * PI]);
        assert_relative_eq!(b.eval_mode(&b.modes[0], &[0.25]), 2f64.sqrt() * (PI / 4.0).sin());
        let b = SpectralBasis::build(&unit(), Kind::Neumann, 2).unwrap();
        let eig: Vec<f64> = b.modes.iter().map(|m| m.eigenvalue).collect();
        assert_eq!(eig, vec![0.0, PI * PI, 4.0 * PI * PI]);
        assert_eq!(b.eval_mode(&b.modes[0], &[0.3]), 1.0);
    }

    #[test]
    fn union_spectrum_merges() {
        let d = Domain::union(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let b = SpectralBasis::build(&d, Kind::Neumann, 4).unwrap();
        let eig: Vec<f64> = b.modes.iter().take(4).map(|m| m.eigenvalue).collect();
        assert_eq!(eig, vec![0.0, 0.0, PI * PI, PI * PI]);
        for m in &b.modes {
            let other = if m.component == 0 { 2.5 } else { 0.5 };
            assert_eq!(b.eval_mode(m, &[other]), 0.0);
        }
    }

    #[test]
    fn sine_coefficients() {
        let u = TestFunction::Line(Func1::sine(0.0, 1.0, 1).unwrap());
        let b = SpectralBasis::build(&unit(), Kind::Dirichlet, 50).unwrap();
        let c = coefficients(&u, &b).unwrap();
        assert_relative_eq!(c.values[0], 0.5f64.sqrt(), max_relative = 1e-14);
        assert!(c.values[1..].iter().all(|v| v.abs() < 1e-15));
        let b = SpectralBasis::build(&unit(), Kind::Neumann, 50).unwrap();
        let c = coefficients(&u, &b).unwrap();
        assert_relative_eq!(c.values[0], 2.0 / PI, max_relative = 1e-14);
        for (m, v) in b.modes.iter().zip(&c.values).skip(1) {
            let j = m.j as f64;
            let want = if m.j % 2 == 1 { 0.0 } else { -2.0 * 2f64.sqrt() / (PI * (j * j - 1.0)) };
            assert!((v - want).abs() < 1e-14, "j={j}");
        }
        // Parseval on the captured part plus the tail
        let captured: f64 = c.values.iter().map(|v| v * v).sum();
        assert!(captured <= 0.5 + 1e-14 && captured + c.tail_estimate >= 0.5 - 1e-14);
    }

    #[test]
    fn orthonormality() {
        let d = unit();
        for kind in [Kind::Dirichlet, Kind::Neumann] {
            let b = SpectralBasis::build(&d, kind, 8).unwrap();
            for m in &b.modes {
                let f = match (kind, m.j) {
                    (Kind::Neumann, 0) => Func1::constant(0.0, 1.0, 1.0).unwrap(),
                    (Kind::Neumann, j) => Func1::cosine(0.0, 1.0, j).unwrap().scale(2f64.sqrt()),
                    (Kind::Dirichlet, j) => Func1::sine(0.0, 1.0, j).unwrap().scale(2f64.sqrt()),
                };
                let c = coefficients(&TestFunction::Line(f), &b).unwrap();
                for (i, v) in c.values.iter().enumerate() {
                    let want = if i == m.index { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn decay_exponents() {
        let s = Func1::sine(0.0, 1.0, 1).unwrap();
        assert_eq!(decay_exponent(&s, 0.0, 1.0, Kind::Dirichlet), f64::INFINITY);
        assert_eq!(decay_exponent(&s, 0.0, 1.0, Kind::Neumann), 2.0);
        let b3 = Func1::bump(0.0, 1.0, 3).unwrap();
        assert_eq!(decay_exponent(&b3, 0.0, 1.0, Kind::Neumann), 4.0);
        assert_eq!(decay_exponent(&b3, 0.0, 1.0, Kind::Dirichlet), 5.0);
        let lap = s.laplacian_power(1).unwrap();
        assert_eq!(decay_exponent(&lap, 0.0, 1.0, Kind::Neumann), 0.0);
        assert_eq!(decay_exponent(&lap, 0.0, 1.0, Kind::Dirichlet), f64::INFINITY);
    }

    #[test]
    fn reduction_identity_on_coefficients() {
        // (-D^2 u, psi_j) = mu_j (u, psi_j) in both bases
        let u = Func1::bump(0.0, 1.0, 2).unwrap().add(Func1::sine(0.0, 1.0, 3).unwrap().scale(0.3));
        let v = u.laplacian_power(1).unwrap();
        for kind in [Kind::Dirichlet, Kind::Neumann] {
            let b = SpectralBasis::build(&unit(), kind, 30).unwrap();
            let cu = coefficients(&TestFunction::Line(u.clone()), &b).unwrap();
            let cv = coefficients(&TestFunction::Line(v.clone()), &b).unwrap();
            for (m, (x, y)) in b.modes.iter().zip(cu.values.iter().zip(&cv.values)) {
                assert!((m.eigenvalue * x - y).abs() < 1e-10 * (1.0 + m.eigenvalue), "{kind:?} j={}", m.j);
            }
        }
    }

    #[test]
    fn mean_zero() {
        let d = unit();
        assert!(!check_mean_zero(&TestFunction::Line(Func1::sine(0.0, 1.0, 1).unwrap()), &d, 1e-10));
        assert!(check_mean_zero(&TestFunction::Line(Func1::sine(0.0, 1.0, 2).unwrap()), &d, 1e-10));
        let v = Func1::bump(0.0, 1.0, 3).unwrap().laplacian_power(1).unwrap();
        assert!(check_mean_zero(&TestFunction::Line(v), &d, 1e-10));
        let v = Func1::sine(0.0, 1.0, 1).unwrap().laplacian_power(1).unwrap();
        assert!(check_mean_zero(&TestFunction::Line(v), &d, 1e-10));
    }

    #[test]
    fn rectangle_coefficients() {
        let d = Domain::rectangle((0.0, 1.0), (0.0, 1.0)).unwrap();
        let b = SpectralBasis::build(&d, Kind::Dirichlet, 4).unwrap();
        let u = TestFunction::Plane(Func2::product(
            Func1::sine(0.0, 1.0, 1).unwrap(),
            Func1::sine(0.0, 1.0, 2).unwrap(),
        ));
        let c = coefficients(&u, &b).unwrap();
        for (m, v) in b.modes.iter().zip(&c.values) {
            let want = if (m.j, m.k) == (1, 2) { 0.5 } else { 0.0 };
            assert!((v - want).abs() < 1e-14);
        }
    }
}
