//! Closed-form test functions: sums of sine, cosine and polynomial pieces on
//! intervals, point masses, and sums of tensor products of those in 2D.
//!
//! Functions are extended by zero outside their pieces. Derivatives are taken in
//! the sense of distributions, so jumps at piece endpoints turn into point masses
//! when a Laplacian is applied.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// Shape of a piece on `[a, b]`, with `L = b - a`, `X = x - a`, `t = (x - mid) / (L/2)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Shape {
    /// `sin(j pi X / L)`
    Sine(u32),
    /// `cos(j pi X / L)`
    Cosine(u32),
    /// `sum_k c_k t^k`
    Poly(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Piece {
    pub a: f64,
    pub b: f64,
    pub weight: f64,
    pub shape: Shape,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Dirac {
    pub at: f64,
    pub weight: f64,
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn poly_eval(c: &[f64], t: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ck| acc * t + ck)
}

fn poly_deriv(c: &[f64]) -> Vec<f64> {
    if c.len() <= 1 {
        return vec![0.0];
    }
    c.iter().enumerate().skip(1).map(|(k, &ck)| k as f64 * ck).collect()
}

fn gl64() -> &'static (Vec<f64>, Vec<f64>) {
    static NODES: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    NODES.get_or_init(|| gauss_legendre(64))
}

/// `sin(q pi / 2)` for integer `q`, exactly.
fn sin_quarter(q: i64) -> f64 {
    [0.0, 1.0, 0.0, -1.0][q.rem_euclid(4) as usize]
}

fn sinc(x: f64) -> f64 {
    if x.abs() < 1e-4 {
        1.0 - x * x / 6.0
    } else {
        x.sin() / x
    }
}

/// `int_0^L exp(i beta X) dX`
fn exp_integral(beta: f64, l: f64) -> Complex64 {
    let half = 0.5 * beta * l;
    Complex64::from_polar(l * sinc(half), half)
}

impl Piece {
    pub fn new(a: f64, b: f64, weight: f64, shape: Shape) -> Result<Self> {
        if !(a < b) || !a.is_finite() || !b.is_finite() {
            return Err(Error::domain("Piece", format!("need a < b, got [{a}, {b}]")));
        }
        Ok(Self { a, b, weight, shape })
    }

    pub fn len(&self) -> f64 {
        self.b - self.a
    }

    fn half(&self) -> f64 {
        0.5 * (self.b - self.a)
    }

    fn mid(&self) -> f64 {
        0.5 * (self.a + self.b)
    }

    fn omega(&self, j: u32) -> f64 {
        j as f64 * PI / self.len()
    }

    /// Largest angular frequency present, zero for polynomials.
    pub fn frequency(&self) -> f64 {
        match self.shape {
            Shape::Sine(j) | Shape::Cosine(j) => self.omega(j),
            Shape::Poly(_) => 0.0,
        }
    }

    pub fn degree(&self) -> usize {
        match &self.shape {
            Shape::Poly(c) => c.len().saturating_sub(1),
            _ => 0,
        }
    }

    /// Derivative of the piece as a function on `[a, b]`, ignoring the endpoints.
    pub fn derivative(&self) -> Piece {
        let (weight, shape) = match &self.shape {
            Shape::Sine(j) => (self.weight * self.omega(*j), Shape::Cosine(*j)),
            Shape::Cosine(j) => (-self.weight * self.omega(*j), Shape::Sine(*j)),
            Shape::Poly(c) => (self.weight / self.half(), Shape::Poly(poly_deriv(c))),
        };
        Piece { a: self.a, b: self.b, weight, shape }
    }

    /// m-th derivative of the smooth formula at `x` (no support test).
    pub fn formula_deriv(&self, x: f64, m: u32) -> f64 {
        match &self.shape {
            Shape::Sine(j) | Shape::Cosine(j) => {
                let w = self.omega(*j);
                let phase = if matches!(self.shape, Shape::Cosine(_)) { 1 } else { 0 };
                let theta = w * (x - self.a);
                // sin(theta + (m + phase) pi / 2)
                let q = (m as i64 + phase) % 4;
                let (s, c) = theta.sin_cos();
                let v = match q {
                    0 => s,
                    1 => c,
                    2 => -s,
                    _ => -c,
                };
                self.weight * w.powi(m as i32) * v
            }
            Shape::Poly(c) => {
                let mut d = c.clone();
                for _ in 0..m {
                    d = poly_deriv(&d);
                }
                self.weight * poly_eval(&d, (x - self.mid()) / self.half()) / self.half().powi(m as i32)
            }
        }
    }

    /// m-th derivative of the formula at an endpoint, computed exactly where possible.
    pub fn endpoint_deriv(&self, right_end: bool, m: u32) -> f64 {
        match &self.shape {
            Shape::Sine(j) | Shape::Cosine(j) => {
                let w = self.omega(*j);
                let phase = if matches!(self.shape, Shape::Cosine(_)) { 1 } else { 0 };
                let turn = if right_end { 2 * *j as i64 } else { 0 };
                self.weight * w.powi(m as i32) * sin_quarter(turn + m as i64 + phase)
            }
            Shape::Poly(c) => {
                let mut d = c.clone();
                for _ in 0..m {
                    d = poly_deriv(&d);
                }
                let t = if right_end { 1.0 } else { -1.0 };
                self.weight * poly_eval(&d, t) / self.half().powi(m as i32)
            }
        }
    }

    /// `int_a^b piece(x) exp(-i xi x) dx`
    pub fn fourier_integral(&self, xi: f64) -> Complex64 {
        match &self.shape {
            Shape::Sine(j) | Shape::Cosine(j) => {
                let w = self.omega(*j);
                let l = self.len();
                let ep = exp_integral(w - xi, l);
                let em = exp_integral(-w - xi, l);
                let phase = Complex64::from_polar(self.weight, -xi * self.a);
                if matches!(self.shape, Shape::Sine(_)) {
                    phase * (ep - em) / Complex64::new(0.0, 2.0)
                } else {
                    phase * (ep + em) * 0.5
                }
            }
            Shape::Poly(c) => {
                let h = self.half();
                let kappa = xi * h;
                let deg = c.len().saturating_sub(1);
                let inner = if kappa.abs() <= 24f64.max(deg as f64 + 4.0) {
                    let (x, w) = gl64();
                    x.iter()
                        .zip(w)
                        .map(|(&t, &wt)| Complex64::from_polar(wt * poly_eval(c, t), -kappa * t))
                        .sum::<Complex64>()
                } else {
                    // finite integration by parts
                    let ik = Complex64::new(0.0, kappa);
                    let em = Complex64::from_polar(1.0, kappa);
                    let ep = Complex64::from_polar(1.0, -kappa);
                    let mut d = c.to_vec();
                    let mut pow = ik;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for _ in 0..=deg {
                        acc += (em * poly_eval(&d, -1.0) - ep * poly_eval(&d, 1.0)) / pow;
                        d = poly_deriv(&d);
                        pow *= ik;
                    }
                    acc
                };
                Complex64::from_polar(self.weight * h, -xi * self.mid()) * inner
            }
        }
    }

    /// Taylor coefficients `f^{(m)}(x)/m!`, `m = 0..=order`.
    pub fn taylor(&self, x: f64, order: usize) -> Vec<f64> {
        match &self.shape {
            Shape::Poly(c) => {
                // re-expand around t0 = t(x)
                let h = self.half();
                let t0 = (x - self.mid()) / h;
                let mut d = c.clone();
                let mut out = Vec::with_capacity(order + 1);
                let mut fact = 1.0;
                for m in 0..=order {
                    if m > 0 {
                        fact *= m as f64;
                    }
                    out.push(self.weight * poly_eval(&d, t0) / (fact * h.powi(m as i32)));
                    d = poly_deriv(&d);
                }
                out
            }
            _ => {
                let mut out = Vec::with_capacity(order + 1);
                let mut fact = 1.0;
                for m in 0..=order {
                    if m > 0 {
                        fact *= m as f64;
                    }
                    out.push(self.formula_deriv(x, m as u32) / fact);
                }
                out
            }
        }
    }
}

/// A function of one variable: a sum of pieces plus point masses.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Func1 {
    pub pieces: Vec<Piece>,
    pub diracs: Vec<Dirac>,
}

impl Func1 {
    pub fn from_piece(piece: Piece) -> Self {
        Self { pieces: vec![piece], diracs: vec![] }
    }

    pub fn sine(a: f64, b: f64, j: u32) -> Result<Self> {
        Ok(Self::from_piece(Piece::new(a, b, 1.0, Shape::Sine(j))?))
    }

    pub fn cosine(a: f64, b: f64, j: u32) -> Result<Self> {
        Ok(Self::from_piece(Piece::new(a, b, 1.0, Shape::Cosine(j))?))
    }

    /// `(1 - t^2)^p` on `[a, b]`, i.e. `((x-a)(b-x) / ((b-a)/2)^2)^p`.
    pub fn bump(a: f64, b: f64, p: u32) -> Result<Self> {
        let mut c = vec![0.0; 2 * p as usize + 1];
        for k in 0..=p {
            c[2 * k as usize] = binomial(p, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        Ok(Self::from_piece(Piece::new(a, b, 1.0, Shape::Poly(c))?))
    }

    /// `t (1 - t^2)^p` on `[a, b]`, odd about the midpoint and hence mean-zero.
    pub fn oddbump(a: f64, b: f64, p: u32) -> Result<Self> {
        let mut c = vec![0.0; 2 * p as usize + 2];
        for k in 0..=p {
            c[2 * k as usize + 1] = binomial(p, k) * if k % 2 == 0 { 1.0 } else { -1.0 };
        }
        Ok(Self::from_piece(Piece::new(a, b, 1.0, Shape::Poly(c))?))
    }

    /// Polynomial in `t = (x - mid)/(L/2)` with the given coefficients.
    pub fn poly(a: f64, b: f64, coeffs: Vec<f64>) -> Result<Self> {
        Ok(Self::from_piece(Piece::new(a, b, 1.0, Shape::Poly(coeffs))?))
    }

    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::poly(a, b, vec![c])
    }

    pub fn dirac(at: f64, weight: f64) -> Self {
        Self { pieces: vec![], diracs: vec![Dirac { at, weight }] }
    }

    pub fn scale(mut self, c: f64) -> Self {
        for p in &mut self.pieces {
            p.weight *= c;
        }
        for d in &mut self.diracs {
            d.weight *= c;
        }
        self
    }

    pub fn add(mut self, other: Func1) -> Self {
        self.pieces.extend(other.pieces);
        self.diracs.extend(other.diracs);
        self
    }

    pub fn has_diracs(&self) -> bool {
        self.diracs.iter().any(|d| d.weight != 0.0)
    }

    /// Sorted distinct piece endpoints and Dirac locations.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self
            .pieces
            .iter()
            .flat_map(|p| [p.a, p.b])
            .chain(self.diracs.iter().map(|d| d.at))
            .collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts
    }

    /// Smallest closed interval containing the support.
    pub fn hull(&self) -> Option<(f64, f64)> {
        let pts = self.breakpoints();
        Some((*pts.first()?, *pts.last()?))
    }

    /// Pointwise value of the regular part. At a piece endpoint each piece
    /// contributes half its one-sided limit.
    pub fn eval(&self, x: f64) -> f64 {
        self.deriv(x, 0)
    }

    pub fn deriv(&self, x: f64, m: u32) -> f64 {
        let mut acc = 0.0;
        for p in &self.pieces {
            if x > p.a && x < p.b {
                acc += p.formula_deriv(x, m);
            } else if x == p.a || x == p.b {
                acc += 0.5 * p.endpoint_deriv(x == p.b, m);
            }
        }
        acc
    }

    /// `u^{(i)}(e+) - u^{(i)}(e-)` for `i = 0..orders`.
    pub fn jumps(&self, e: f64, orders: usize) -> Vec<f64> {
        let mut out = vec![0.0; orders];
        for p in &self.pieces {
            let side = if p.a == e {
                1.0
            } else if p.b == e {
                -1.0
            } else {
                continue;
            };
            for (i, o) in out.iter_mut().enumerate() {
                *o += side * p.endpoint_deriv(p.b == e, i as u32);
            }
        }
        out
    }

    /// One-sided derivatives from inside a component at its endpoint.
    pub fn inner_endpoint_derivs(&self, e: f64, right_end: bool, orders: usize) -> Vec<f64> {
        let mut out = vec![0.0; orders];
        for p in &self.pieces {
            let hit = if right_end { p.b == e } else { p.a == e };
            if hit {
                for (i, o) in out.iter_mut().enumerate() {
                    *o += p.endpoint_deriv(right_end, i as u32);
                }
            }
        }
        out
    }

    pub(crate) fn jump_threshold(&self, order: usize) -> f64 {
        let scale: f64 = self
            .pieces
            .iter()
            .map(|p| {
                let f = p.frequency().max(p.degree() as f64 / p.half()).max(1.0 / p.half());
                p.weight.abs() * f.powi(order as i32)
            })
            .sum();
        1e-12 * scale.max(f64::MIN_POSITIVE)
    }

    /// Distributional derivative restricted to jump terms that are plain point
    /// masses; fails if a derivative of a point mass would be needed.
    pub fn derivative(&self) -> Result<Func1> {
        if self.has_diracs() {
            return Err(Error::InsufficientSmoothness(
                "derivative of a point mass is not representable".into(),
            ));
        }
        let mut out = Func1 { pieces: self.pieces.iter().map(Piece::derivative).collect(), diracs: vec![] };
        let tol = self.jump_threshold(0);
        for e in self.breakpoints() {
            let j0 = self.jumps(e, 1)[0];
            if j0.abs() > tol {
                out.diracs.push(Dirac { at: e, weight: j0 });
            }
        }
        Ok(out)
    }

    /// `(-D^2)^k u` in the sense of distributions.
    pub fn laplacian_power(&self, k: u32) -> Result<Func1> {
        let mut v = self.clone();
        for step in 0..k {
            let d1 = v.derivative().map_err(|_| {
                Error::InsufficientSmoothness(format!("Laplacian power {} needs more derivatives than available", step + 1))
            })?;
            if d1.has_diracs() {
                return Err(Error::InsufficientSmoothness(format!(
                    "function jumps, so Laplacian power {} contains a dipole",
                    step + 1
                )));
            }
            let d2 = d1.derivative()?;
            v = d2.scale(-1.0);
        }
        Ok(v)
    }

    /// `int u e^{-i xi x} dx` over the line (unnormalised), point masses included.
    pub fn fourier_integral(&self, xi: f64) -> Complex64 {
        let mut acc: Complex64 = self.pieces.iter().map(|p| p.fourier_integral(xi)).sum();
        for d in &self.diracs {
            acc += Complex64::from_polar(d.weight, -xi * d.at);
        }
        acc
    }

    /// Unitary Fourier transform `(2 pi)^{-1/2} int u e^{-i xi x} dx`.
    pub fn fourier_transform(&self, xi: f64) -> Complex64 {
        self.fourier_integral(xi) * INV_SQRT_2PI
    }

    /// Coefficients `a_k` with `|int u e^{-i xi x} dx| <= sum_k a_k |xi|^{-k}`, from
    /// integrating by parts on each smooth cell: jump terms up to a few orders past
    /// the first non-vanishing one, then the L1 norm of the next derivative.
    pub fn fourier_envelope(&self) -> Vec<f64> {
        const MAX: usize = 40;
        let pts = self.breakpoints();
        let first = pts
            .iter()
            .filter_map(|&e| {
                let j = self.jumps(e, MAX);
                (0..MAX).find(|&r| j[r].abs() > self.jump_threshold(r))
            })
            .min()
            .unwrap_or(MAX - 3);
        let r = (first + 3).min(MAX);
        let mut a = vec![0.0; r + 1];
        a[0] = self.diracs.iter().map(|d| d.weight.abs()).sum();
        for &e in &pts {
            let j = self.jumps(e, r);
            for i in 0..r {
                if j[i].abs() > self.jump_threshold(i) {
                    a[i + 1] += j[i].abs();
                }
            }
        }
        for p in &self.pieces {
            a[r] += match &p.shape {
                Shape::Sine(_) | Shape::Cosine(_) => p.weight.abs() * p.frequency().powi(r as i32) * p.len(),
                Shape::Poly(c) => {
                    let mut d = c.clone();
                    for _ in 0..r {
                        d = poly_deriv(&d);
                    }
                    let sup: f64 = d.iter().map(|x| x.abs()).sum();
                    p.weight.abs() * 2.0 * sup * p.half().powi(1 - r as i32)
                }
            };
        }
        a
    }

    /// `int u`, including point masses.
    pub fn integral(&self) -> f64 {
        self.fourier_integral(0.0).re
    }

    /// Restriction to `[a, b]`, pieces and point masses in the closed interval.
    pub fn restrict(&self, a: f64, b: f64) -> Func1 {
        Func1 {
            pieces: self.pieces.iter().filter(|p| p.a >= a && p.b <= b).cloned().collect(),
            diracs: self.diracs.iter().filter(|d| d.at >= a && d.at <= b).copied().collect(),
        }
    }

    /// Highest trigonometric frequency of any piece.
    pub fn max_frequency(&self) -> f64 {
        self.pieces.iter().map(Piece::frequency).fold(0.0, f64::max)
    }

    pub fn is_polynomial(&self) -> bool {
        self.pieces.iter().all(|p| matches!(p.shape, Shape::Poly(_)))
    }

    /// Taylor coefficients of the regular part around a point that is not a breakpoint.
    pub fn taylor(&self, x: f64, order: usize) -> Vec<f64> {
        let mut out = vec![0.0; order + 1];
        for p in &self.pieces {
            if x > p.a && x < p.b {
                for (o, c) in out.iter_mut().zip(p.taylor(x, order)) {
                    *o += c;
                }
            }
        }
        out
    }

    /// `int u^2` of the regular part, exact up to rounding (Gauss-Legendre on each
    /// smooth cell).
    pub fn l2_norm_sq(&self) -> f64 {
        let pts = self.breakpoints();
        let (x, w) = gl64();
        let mut acc = 0.0;
        for cell in pts.windows(2) {
            let (a, b) = (cell[0], cell[1]);
            let freq = self
                .pieces
                .iter()
                .filter(|p| p.a < b && p.b > a)
                .map(Piece::frequency)
                .fold(0.0, f64::max);
            // split so that each sub-cell holds a bounded number of oscillations
            let parts = ((freq * (b - a) / 20.0).ceil() as usize).max(1);
            let h = (b - a) / parts as f64;
            for k in 0..parts {
                let lo = a + k as f64 * h;
                let c = lo + 0.5 * h;
                for (&t, &wt) in x.iter().zip(w) {
                    let v = self.eval(c + 0.5 * h * t);
                    acc += 0.5 * h * wt * v * v;
                }
            }
        }
        acc
    }

    /// Size used by the mean-zero test: L2 norm of the regular part plus the
    /// point-mass weights scaled by `|Omega|^{-1/2}`.
    pub fn size(&self, measure: f64) -> f64 {
        self.l2_norm_sq().sqrt() + self.diracs.iter().map(|d| d.weight.abs()).sum::<f64>() / measure.sqrt()
    }

    /// Lower bound of the regular part sampled on a grid, `-inf` with negative masses.
    pub fn sampled_min(&self) -> f64 {
        if self.diracs.iter().any(|d| d.weight < 0.0) {
            return f64::NEG_INFINITY;
        }
        let Some((a, b)) = self.hull() else { return 0.0 };
        let n = 2000;
        (0..=n)
            .map(|i| self.eval(a + (b - a) * i as f64 / n as f64))
            .fold(f64::INFINITY, f64::min)
    }
}

/// A sum of tensor products `sum_t c_t f_t(x) g_t(y)`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Func2 {
    pub terms: Vec<(f64, Func1, Func1)>,
}

impl Func2 {
    pub fn product(f: Func1, g: Func1) -> Self {
        Self { terms: vec![(1.0, f, g)] }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.terms.iter().map(|(c, f, g)| c * f.eval(x) * g.eval(y)).sum()
    }

    pub fn fourier_transform(&self, xi: f64, eta: f64) -> Complex64 {
        self.terms
            .iter()
            .map(|(c, f, g)| f.fourier_transform(xi) * g.fourier_transform(eta) * *c)
            .sum()
    }

    pub fn scale(mut self, k: f64) -> Self {
        for t in &mut self.terms {
            t.0 *= k;
        }
        self
    }

    pub fn add(mut self, other: Func2) -> Self {
        self.terms.extend(other.terms);
        self
    }

    pub fn laplacian(&self) -> Result<Func2> {
        let mut terms = Vec::new();
        for (c, f, g) in &self.terms {
            terms.push((*c, f.laplacian_power(1)?, g.clone()));
            terms.push((*c, f.clone(), g.laplacian_power(1)?));
        }
        Ok(Func2 { terms })
    }

    pub fn integral(&self) -> f64 {
        self.terms.iter().map(|(c, f, g)| c * f.integral() * g.integral()).sum()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        // Gram of the factors
        let mut acc = 0.0;
        for (ci, fi, gi) in &self.terms {
            for (cj, fj, gj) in &self.terms {
                acc += ci * cj * inner(fi, fj) * inner(gi, gj);
            }
        }
        acc
    }

    pub fn max_frequency(&self) -> (f64, f64) {
        self.terms.iter().fold((0.0, 0.0), |(a, b), (_, f, g)| {
            (f64::max(a, f.max_frequency()), f64::max(b, g.max_frequency()))
        })
    }

    pub fn has_diracs(&self) -> bool {
        self.terms.iter().any(|(_, f, g)| f.has_diracs() || g.has_diracs())
    }

    pub fn sampled_min(&self, x: (f64, f64), y: (f64, f64)) -> f64 {
        if self.has_diracs() {
            return f64::NEG_INFINITY;
        }
        let n = 120;
        let mut m = f64::INFINITY;
        for i in 0..=n {
            for j in 0..=n {
                let px = x.0 + (x.1 - x.0) * i as f64 / n as f64;
                let py = y.0 + (y.1 - y.0) * j as f64 / n as f64;
                m = m.min(self.eval(px, py));
            }
        }
        m
    }
}

/// `int f g` for regular parts.
pub fn inner(f: &Func1, g: &Func1) -> f64 {
    let sum = f.clone().add(g.clone());
    let diff = f.clone().add(g.clone().scale(-1.0));
    0.25 * (sum.l2_norm_sq() - diff.l2_norm_sq())
}

/// A test function on a line or on a rectangle.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum TestFunction {
    Line(Func1),
    Plane(Func2),
}

impl TestFunction {
    pub fn dimension(&self) -> u32 {
        match self {
            TestFunction::Line(_) => 1,
            TestFunction::Plane(_) => 2,
        }
    }

    pub fn line(&self) -> Result<&Func1> {
        match self {
            TestFunction::Line(f) => Ok(f),
            TestFunction::Plane(_) => Err(Error::UnsupportedDomain("operation needs a 1D function".into())),
        }
    }

    pub fn plane(&self) -> Result<&Func2> {
        match self {
            TestFunction::Plane(f) => Ok(f),
            TestFunction::Line(_) => Err(Error::UnsupportedDomain("operation needs a 2D function".into())),
        }
    }

    pub fn scale(self, c: f64) -> Self {
        match self {
            TestFunction::Line(f) => TestFunction::Line(f.scale(c)),
            TestFunction::Plane(f) => TestFunction::Plane(f.scale(c)),
        }
    }

    pub fn integral(&self) -> f64 {
        match self {
            TestFunction::Line(f) => f.integral(),
            TestFunction::Plane(f) => f.integral(),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            TestFunction::Line(f) => f.l2_norm_sq(),
            TestFunction::Plane(f) => f.l2_norm_sq(),
        }
    }

    pub fn has_diracs(&self) -> bool {
        match self {
            TestFunction::Line(f) => f.has_diracs(),
            TestFunction::Plane(f) => f.has_diracs(),
        }
    }

    /// `(-Delta)^k u`, distributional.
    pub fn laplacian_power(&self, k: u32) -> Result<TestFunction> {
        match self {
            TestFunction::Line(f) => Ok(TestFunction::Line(f.laplacian_power(k)?)),
            TestFunction::Plane(f) => {
                let mut v = f.clone();
                for _ in 0..k {
                    v = v.laplacian()?;
                }
                Ok(TestFunction::Plane(v))
            }
        }
    }

    /// Unitary Fourier transform at a point of the frequency space.
    pub fn fourier_transform(&self, xi: &[f64]) -> Result<Complex64> {
        match (self, xi) {
            (TestFunction::Line(f), [x]) => Ok(f.fourier_transform(*x)),
            (TestFunction::Plane(f), [x, y]) => Ok(f.fourier_transform(*x, *y)),
            _ => Err(Error::domain("fourier_transform", "frequency dimension does not match")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn quad_ft(f: &Func1, xi: f64) -> Complex64 {
        // dense reference
        let (a, b) = f.hull().unwrap();
        let n = 200_000;
        let h = (b - a) / n as f64;
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            let x = a + (i as f64 + 0.5) * h;
            acc += Complex64::from_polar(f.eval(x) * h, -xi * x);
        }
        acc
    }

    #[test]
    fn fourier_at_zero() {
        let s = Func1::sine(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(s.fourier_transform(0.0).re, INV_SQRT_2PI * 2.0 / PI, max_relative = 1e-14);
        let b = Func1::bump(-1.0, 1.0, 1).unwrap();
        assert_relative_eq!(b.fourier_transform(0.0).re, INV_SQRT_2PI * 4.0 / 3.0, max_relative = 1e-14);
    }

    #[test]
    fn fourier_matches_midpoint_rule() {
        let fs = [
            Func1::sine(0.0, 1.0, 1).unwrap(),
            Func1::cosine(0.2, 0.9, 3).unwrap(),
            Func1::bump(0.0, 1.0, 3).unwrap(),
            Func1::oddbump(0.0, 2.0, 2).unwrap(),
        ];
        for f in &fs {
            for xi in [0.3, -2.0, 7.5, 40.0, 130.0] {
                let a = f.fourier_integral(xi);
                let b = quad_ft(f, xi);
                assert!((a - b).norm() < 1e-8, "xi={xi} {a} {b}");
            }
        }
    }

    #[test]
    fn hermitian_symmetry() {
        let f = Func1::bump(0.0, 1.0, 2).unwrap().add(Func1::sine(0.0, 1.0, 2).unwrap());
        for xi in [0.5, 3.0, 50.0, 400.0] {
            let p = f.fourier_transform(xi);
            let m = f.fourier_transform(-xi);
            assert!((p - m.conj()).norm() < 1e-15);
        }
    }

    #[test]
    fn ibp_branch_continuous() {
        let f = Func1::bump(0.0, 1.0, 3).unwrap();
        // kappa = xi / 2 crosses the switch at 24
        let lo = f.fourier_integral(47.999_999);
        let hi = f.fourier_integral(48.000_001);
        assert!((lo - hi).norm() < 1e-9);
    }

    #[test]
    fn laplacian_of_sine_has_boundary_masses() {
        let f = Func1::sine(0.0, 1.0, 1).unwrap();
        let v = f.laplacian_power(1).unwrap();
        assert_relative_eq!(v.eval(0.3), PI * PI * (0.3 * PI).sin(), max_relative = 1e-14);
        assert_eq!(v.diracs.len(), 2);
        for d in &v.diracs {
            assert_relative_eq!(d.weight, -PI, max_relative = 1e-14);
        }
        assert!(v.integral().abs() < 1e-13);
        assert!(f.laplacian_power(2).is_err());
    }

    #[test]
    fn laplacian_of_bump3_is_polynomial() {
        let f = Func1::bump(-1.0, 1.0, 3).unwrap();
        let v = f.laplacian_power(1).unwrap();
        assert!(v.diracs.is_empty());
        // -d^2/dx^2 (1-x^2)^3 = 6 - 36 x^2 + 30 x^4
        for x in [-0.7f64, 0.0, 0.4] {
            let want = 6.0 - 36.0 * x * x + 30.0 * x.powi(4);
            assert_relative_eq!(v.eval(x), want, max_relative = 1e-13, epsilon = 1e-13);
        }
        assert!(v.integral().abs() < 1e-13);
        let w = f.laplacian_power(2).unwrap();
        assert_eq!(w.diracs.len(), 2);
        assert!(w.integral().abs() < 1e-12);
    }

    #[test]
    fn jumps_and_taylor() {
        let f = Func1::sine(0.0, 1.0, 1).unwrap();
        let j = f.jumps(0.0, 3);
        assert_eq!(j, vec![0.0, PI, 0.0]);
        let j = f.jumps(1.0, 2);
        assert_relative_eq!(j[1], PI, max_relative = 1e-15);
        let t = f.taylor(0.3, 4);
        assert_relative_eq!(t[2], -PI * PI * (0.3 * PI).sin() / 2.0, max_relative = 1e-14);
        let b = Func1::bump(0.0, 2.0, 2).unwrap();
        let t = b.taylor(1.5, 4);
        // (1-t^2)^2 with t = x - 1 around t0 = 0.5
        assert_relative_eq!(t[0], 0.5625, max_relative = 1e-14);
        assert_relative_eq!(t[4], 1.0, max_relative = 1e-14);
    }

    #[test]
    fn envelope_bounds_transform() {
        let fs = [
            Func1::sine(0.0, 1.0, 1).unwrap(),
            Func1::bump(0.0, 1.0, 3).unwrap().add(Func1::constant(0.0, 1.0, -0.3).unwrap()),
            Func1::sine(0.0, 1.0, 1).unwrap().laplacian_power(1).unwrap(),
        ];
        for f in &fs {
            let a = f.fourier_envelope();
            for xi in [0.5f64, 3.0, 17.0, 200.0, 5000.0] {
                let env: f64 = a.iter().enumerate().map(|(k, c)| c * xi.powi(-(k as i32))).sum();
                assert!(f.fourier_integral(xi).norm() <= env * (1.0 + 1e-12));
            }
        }
    }

    #[test]
    fn norms() {
        let f = Func1::sine(0.0, 1.0, 1).unwrap();
        assert_relative_eq!(f.l2_norm_sq(), 0.5, max_relative = 1e-14);
        let b = Func1::bump(-1.0, 1.0, 1).unwrap();
        assert_relative_eq!(b.l2_norm_sq(), 16.0 / 15.0, max_relative = 1e-14);
        let g = Func2::product(Func1::sine(0.0, 1.0, 1).unwrap(), Func1::sine(0.0, 1.0, 2).unwrap());
        assert_relative_eq!(g.l2_norm_sq(), 0.25, max_relative = 1e-13);
    }
}
