//! Test-function expressions used in scenario configs.
//!
//! ```text
//! expr  := ['-'] term (('+' | '-') term)*
//! term  := [number '*'] atom ['@' '[' number ',' number ']']
//!        | 'mean'
//! atom  := 'sin(' int ')' | 'cos(' int ')' | 'bump(' int ')' | 'oddbump(' int ')'
//!        | 'poly(' number (',' number)* ')' | 'const(' number ')'
//!        | 'prod(' expr ';' expr ')'
//! ```
//!
//! Atoms live on the first component of the domain unless an `@[a,b]` support is
//! given. `- mean` subtracts, on every component, the mean of the preceding terms
//! over that component. `prod(f; g)` is the tensor product `f(x) g(y)` on a
//! rectangle, with `f` on the x side and `g` on the y side.

use crate::domain::Domain;
use crate::testfn::{Func1, Func2, TestFunction};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
enum Atom {
    Sin(u32),
    Cos(u32),
    Bump(u32),
    OddBump(u32),
    Poly(Vec<f64>),
    Const(f64),
    Prod(Box<Expr>, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
enum Term {
    Scaled { coef: f64, atom: Atom, support: Option<(f64, f64)> },
    Mean,
}

#[derive(Debug, Clone, PartialEq)]
struct Expr(Vec<(f64, Term)>);

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> Error {
        Error::domain("function expression", format!("{} at column {} of '{}'", msg.into(), self.pos + 1, self.src))
    }

    fn skip_ws(&mut self) {
        while self.src[self.pos..].starts_with(char::is_whitespace) {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<char> {
        self.skip_ws();
        self.src[self.pos..].chars().next()
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> String {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let n = rest.find(|c: char| !c.is_ascii_alphabetic()).unwrap_or(rest.len());
        self.pos += n;
        rest[..n].to_string()
    }

    fn number(&mut self) -> Result<f64> {
        self.skip_ws();
        let rest = &self.src[self.pos..];
        let mut n = 0;
        for (i, c) in rest.char_indices() {
            let sign_ok = (c == '-' || c == '+') && (i == 0 || matches!(rest.as_bytes()[i - 1], b'e' | b'E'));
            if c.is_ascii_digit() || c == '.' || c == 'e' || c == 'E' || sign_ok {
                n = i + 1;
            } else {
                break;
            }
        }
        let v = rest[..n].parse::<f64>().map_err(|_| self.err("expected a number"))?;
        self.pos += n;
        Ok(v)
    }

    fn int(&mut self) -> Result<u32> {
        let v = self.number()?;
        if v < 0.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(self.err(format!("expected a nonnegative integer, got {v}")));
        }
        Ok(v as u32)
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut terms = Vec::new();
        let mut sign = if self.eat('-') { -1.0 } else { 1.0 };
        loop {
            terms.push((sign, self.term()?));
            if self.eat('+') {
                sign = 1.0;
            } else if self.eat('-') {
                sign = -1.0;
            } else {
                break;
            }
        }
        Ok(Expr(terms))
    }

    fn term(&mut self) -> Result<Term> {
        let coef = match self.peek() {
            Some(c) if c.is_ascii_digit() || c == '.' => {
                let v = self.number()?;
                self.expect('*')?;
                v
            }
            _ => 1.0,
        };
        let name = self.ident();
        if name == "mean" {
            if coef != 1.0 {
                return Err(self.err("'mean' takes no coefficient"));
            }
            return Ok(Term::Mean);
        }
        self.expect('(')?;
        let atom = match name.as_str() {
            "sin" => Atom::Sin(self.int()?),
            "cos" => Atom::Cos(self.int()?),
            "bump" => Atom::Bump(self.int()?),
            "oddbump" => Atom::OddBump(self.int()?),
            "const" => Atom::Const(self.number()?),
            "poly" => {
                let mut c = vec![self.number()?];
                while self.eat(',') {
                    c.push(self.number()?);
                }
                Atom::Poly(c)
            }
            "prod" => {
                let f = self.expr()?;
                self.expect(';')?;
                let g = self.expr()?;
                Atom::Prod(Box::new(f), Box::new(g))
            }
            "" => return Err(self.err("expected a function name")),
            other => return Err(self.err(format!("unknown function '{other}'"))),
        };
        self.expect(')')?;
        let support = if self.eat('@') {
            self.expect('[')?;
            let a = self.number()?;
            self.expect(',')?;
            let b = self.number()?;
            self.expect(']')?;
            Some((a, b))
        } else {
            None
        };
        Ok(Term::Scaled { coef, atom, support })
    }
}

fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src, pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

fn atom_line(atom: &Atom, (a, b): (f64, f64)) -> Result<Func1> {
    match atom {
        Atom::Sin(k) => Func1::sine(a, b, *k),
        Atom::Cos(k) => Func1::cosine(a, b, *k),
        Atom::Bump(p) => Func1::bump(a, b, *p),
        Atom::OddBump(p) => Func1::oddbump(a, b, *p),
        Atom::Poly(c) => Func1::poly(a, b, c.clone()),
        Atom::Const(c) => Func1::constant(a, b, *c),
        Atom::Prod(..) => Err(Error::domain("function expression", "prod(...) needs a rectangle")),
    }
}

fn build_line(e: &Expr, parts: &[(f64, f64)]) -> Result<Func1> {
    let mut acc: Option<Func1> = None;
    for (sign, term) in &e.0 {
        let next = match term {
            Term::Scaled { coef, atom, support } => atom_line(atom, support.unwrap_or(parts[0]))?.scale(sign * coef),
            Term::Mean => {
                if *sign > 0.0 {
                    return Err(Error::domain("function expression", "'mean' can only be subtracted"));
                }
                let f = acc.clone().ok_or_else(|| Error::domain("function expression", "'mean' needs a preceding term"))?;
                let mut m: Option<Func1> = None;
                for &(a, b) in parts {
                    let c = Func1::constant(a, b, -f.restrict(a, b).integral() / (b - a))?;
                    m = Some(match m {
                        Some(m) => m.add(c),
                        None => c,
                    });
                }
                m.expect("at least one component")
            }
        };
        acc = Some(match acc {
            Some(f) => f.add(next),
            None => next,
        });
    }
    acc.ok_or_else(|| Error::domain("function expression", "empty expression"))
}

/// Builds the test function named by `src` on `domain`.
pub fn build(src: &str, domain: &Domain) -> Result<TestFunction> {
    let e = parse(src)?;
    match domain {
        Domain::Intervals(parts) => Ok(TestFunction::Line(build_line(&e, parts)?)),
        Domain::Rectangle { x, y } => {
            let mut acc: Option<Func2> = None;
            for (sign, term) in &e.0 {
                let g = match term {
                    Term::Scaled { coef, atom: Atom::Prod(f, g), support: None } => {
                        Func2::product(build_line(f, &[*x])?, build_line(g, &[*y])?).scale(sign * coef)
                    }
                    _ => {
                        return Err(Error::domain(
                            "function expression",
                            format!("on a rectangle every term must be prod(f; g) without a support: '{src}'"),
                        ))
                    }
                };
                acc = Some(match acc {
                    Some(f) => f.add(g),
                    None => g,
                });
            }
            Ok(TestFunction::Plane(acc.expect("parser yields at least one term")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn unit() -> Domain {
        Domain::interval(0.0, 1.0).unwrap()
    }

    #[test]
    fn atoms_and_sums() {
        let u = build("sin(2) + 0.5*bump(3)", &unit()).unwrap();
        let want = Func1::sine(0.0, 1.0, 2).unwrap().add(Func1::bump(0.0, 1.0, 3).unwrap().scale(0.5));
        for x in [0.1, 0.37, 0.8] {
            assert_relative_eq!(u.line().unwrap().eval(x), want.eval(x), max_relative = 1e-15);
        }
    }

    #[test]
    fn mean_removal_per_component() {
        let d = Domain::union(vec![(0.0, 1.0), (2.0, 3.0)]).unwrap();
        let u = build("bump(2) + bump(3)@[2,3] - mean", &d).unwrap();
        let f = u.line().unwrap();
        assert!(f.restrict(0.0, 1.0).integral().abs() < 1e-14);
        assert!(f.restrict(2.0, 3.0).integral().abs() < 1e-14);
    }

    #[test]
    fn product_on_rectangle() {
        let d = Domain::rectangle((0.0, 1.0), (0.0, 2.0)).unwrap();
        let u = build("prod(bump(3); sin(1))", &d).unwrap();
        let g = u.plane().unwrap();
        let want = Func1::bump(0.0, 1.0, 3).unwrap().eval(0.3) * Func1::sine(0.0, 2.0, 1).unwrap().eval(0.5);
        assert_relative_eq!(g.eval(0.3, 0.5), want, max_relative = 1e-15);
        assert!(build("sin(1)", &d).is_err());
    }

    #[test]
    fn rejects_bad_input() {
        for bad in ["", "sine(1)", "sin(1", "sin(1.5)", "2*mean", "mean", "sin(1) + mean", "sin(1) cos(2)", "sin(1)@[0,1"] {
            assert!(build(bad, &unit()).is_err(), "{bad}");
        }
    }

    #[test]
    fn exponent_numbers() {
        let u = build("1e-1*const(2)", &unit()).unwrap();
        assert_relative_eq!(u.line().unwrap().eval(0.5), 0.2, max_relative = 1e-15);
    }
}
