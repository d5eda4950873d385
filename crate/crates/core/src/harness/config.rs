//! Scenario configs: TOML documents with a fixed set of keys.
//!
//! ```toml
//! suite = "forms-T13"            # required
//! s = [0.25, 0.5]                # optional, suite default otherwise
//! functions = ["sin(2)", "bump(3)"]
//! functions_negative = ["bump(3) - mean"]   # used for s < 0
//! functions_higher = ["bump(3)"]            # used for s > 1
//! n = 200                        # initial truncation per interval
//! format = "csv"                 # csv | json
//! out = "report.csv"
//! inconclusive_allowed = 0.0     # fraction of inconclusive rows tolerated
//!
//! [domain]
//! intervals = [[0.0, 1.0], [2.0, 3.0]]   # or
//! rectangle = [[0.0, 1.0], [0.0, 1.0]]
//!
//! [grid]
//! per_axis = 9                   # or
//! points = [[2.25], [2.5]]
//!
//! [quadrature]
//! rel_tol = 1e-10
//! abs_tol = 1e-14
//! max_subdivisions = 2000
//!
//! [tolerances]
//! forms = 1e-7
//! pointwise = 1e-5
//! identity = 1e-3
//! ```

use std::path::PathBuf;

use serde::Deserialize;

use super::funcspec;
use super::report::Format;
use crate::domain::Domain;
use crate::quadrature::QuadratureSpec;
use crate::testfn::TestFunction;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Suite {
    FormsT11,
    FormsT13,
    PointwiseT12,
    PointwiseT14,
    CounterexampleR31,
    IdentitiesS2,
    SpecfunSelftest,
}

impl Suite {
    pub const ALL: [Suite; 7] = [
        Suite::FormsT11,
        Suite::FormsT13,
        Suite::PointwiseT12,
        Suite::PointwiseT14,
        Suite::CounterexampleR31,
        Suite::IdentitiesS2,
        Suite::SpecfunSelftest,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::FormsT11 => "forms-T11",
            Suite::FormsT13 => "forms-T13",
            Suite::PointwiseT12 => "pointwise-T12",
            Suite::PointwiseT14 => "pointwise-T14",
            Suite::CounterexampleR31 => "counterexample-R31",
            Suite::IdentitiesS2 => "identities-S2",
            Suite::SpecfunSelftest => "specfun-selftest",
        }
    }
}

impl std::str::FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::domain("suite", format!("unknown suite '{s}'")))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDomain {
    intervals: Option<Vec<[f64; 2]>>,
    rectangle: Option<[[f64; 2]; 2]>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    per_axis: Option<usize>,
    points: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQuadrature {
    rel_tol: Option<f64>,
    abs_tol: Option<f64>,
    max_subdivisions: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawTolerances {
    forms: Option<f64>,
    pointwise: Option<f64>,
    identity: Option<f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    suite: String,
    s: Option<Vec<f64>>,
    functions: Option<Vec<String>>,
    functions_negative: Option<Vec<String>>,
    functions_higher: Option<Vec<String>>,
    n: Option<usize>,
    format: Option<String>,
    out: Option<PathBuf>,
    inconclusive_allowed: Option<f64>,
    domain: Option<RawDomain>,
    grid: Option<RawGrid>,
    quadrature: Option<RawQuadrature>,
    tolerances: Option<RawTolerances>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    PerAxis(usize),
    Points(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub forms: f64,
    pub pointwise: f64,
    pub identity: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { forms: 1e-7, pointwise: 1e-5, identity: 1e-3 }
    }
}

/// Test-function lists by order range. `None` selects the suite defaults.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FunctionLists {
    pub any: Option<Vec<String>>,
    pub negative: Option<Vec<String>>,
    pub higher: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub suite: Suite,
    pub domain: Domain,
    pub functions: FunctionLists,
    pub s_grid: Option<Vec<f64>>,
    pub grid: Option<Grid>,
    /// replaces the quadrature settings of the form and pointwise engines
    pub quadrature: Option<QuadratureSpec>,
    pub n: usize,
    pub tolerances: Tolerances,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub inconclusive_allowed: f64,
}

impl ScenarioConfig {
    /// Suite defaults on the unit interval.
    pub fn new(suite: Suite) -> Self {
        let domain = match suite {
            Suite::CounterexampleR31 => Domain::union(vec![(0.0, 1.0), (2.0, 3.0)]),
            _ => Domain::interval(0.0, 1.0),
        }
        .expect("valid default domain");
        Self {
            suite,
            domain,
            functions: FunctionLists::default(),
            s_grid: None,
            grid: None,
            quadrature: None,
            n: 200,
            tolerances: Tolerances::default(),
            format: Format::Csv,
            out: None,
            inconclusive_allowed: 0.0,
        }
    }

    /// Parses and validates a config; errors carry the offending line.
    pub fn parse(text: &str) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| Error::Config {
            line: e.span().map(|r| line_at(text, r.start)).unwrap_or(0),
            message: e.message().to_string(),
        })?;
        let at = |key: &str, message: String| {
            let line = match line_of(text, key) {
                0 => line_of(text, "suite"),
                l => l,
            };
            Error::Config { line, message }
        };
        let suite: Suite = raw.suite.parse().map_err(|e: Error| at("suite", e.to_string()))?;
        let mut cfg = ScenarioConfig::new(suite);
        if let Some(d) = raw.domain {
            cfg.domain = match (d.intervals, d.rectangle) {
                (Some(iv), None) => Domain::union(iv.into_iter().map(|[a, b]| (a, b)).collect()),
                (None, Some([x, y])) => Domain::rectangle((x[0], x[1]), (y[0], y[1])),
                _ => Err(Error::domain("domain", "give exactly one of intervals or rectangle")),
            }
            .map_err(|e| at("[domain]", e.to_string()))?;
        }
        cfg.functions = FunctionLists { any: raw.functions, negative: raw.functions_negative, higher: raw.functions_higher };
        if let Some(s) = raw.s {
            if s.is_empty() {
                return Err(at("s", "the s-grid is empty".into()));
            }
            cfg.s_grid = Some(s);
        }
        if let Some(g) = raw.grid {
            cfg.grid = Some(match (g.per_axis, g.points) {
                (Some(k), None) if k > 0 => Grid::PerAxis(k),
                (None, Some(p)) if !p.is_empty() => Grid::Points(p),
                _ => return Err(at("[grid]", "give exactly one of a positive per_axis or a nonempty points list".into())),
            });
        }
        if let Some(q) = raw.quadrature {
            let d = QuadratureSpec::default();
            cfg.quadrature = Some(QuadratureSpec::new(
                q.rel_tol.unwrap_or(d.rel_tol),
                q.abs_tol.unwrap_or(d.abs_tol),
                q.max_subdivisions.unwrap_or(d.max_subdivisions),
            )
            .map_err(|e| at("[quadrature]", e.to_string()))?);
        }
        if let Some(t) = raw.tolerances {
            let d = Tolerances::default();
            cfg.tolerances = Tolerances {
                forms: t.forms.unwrap_or(d.forms),
                pointwise: t.pointwise.unwrap_or(d.pointwise),
                identity: t.identity.unwrap_or(d.identity),
            };
            for (k, v) in [("forms", cfg.tolerances.forms), ("pointwise", cfg.tolerances.pointwise), ("identity", cfg.tolerances.identity)] {
                if !(v > 0.0 && v < 1.0) {
                    return Err(at(k, format!("tolerance {k} = {v} must lie in (0,1)")));
                }
            }
        }
        if let Some(n) = raw.n {
            if n == 0 {
                return Err(at("n", "n must be positive".into()));
            }
            cfg.n = n;
        }
        if let Some(f) = raw.format {
            cfg.format = f.parse().map_err(|e: Error| at("format", e.to_string()))?;
        }
        cfg.out = raw.out;
        if let Some(a) = raw.inconclusive_allowed {
            if !(0.0..=1.0).contains(&a) {
                return Err(at("inconclusive_allowed", format!("{a} must lie in [0,1]")));
            }
            cfg.inconclusive_allowed = a;
        }
        cfg.validate().map_err(|e| match e {
            Error::Config { .. } => e,
            Error::UnsupportedDomain(_) => at("[domain]", e.to_string()),
            Error::InvalidOrder(_) => at("s", e.to_string()),
            Error::Domain { what: "grid", .. } => at("[grid]", e.to_string()),
            other => at("functions", other.to_string()),
        })?;
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.display().to_string(), message: e.to_string() })?;
        Self::parse(&text)
    }

    /// The s-grid, the given one or the suite default.
    pub fn orders(&self) -> Vec<f64> {
        if let Some(s) = &self.s_grid {
            return s.clone();
        }
        match self.suite {
            Suite::FormsT11 | Suite::FormsT13 => {
                vec![-0.75, -0.5, -0.25, 0.25, 0.5, 0.75, 1.25, 1.5, 1.75, 2.25, 2.5, 2.75]
            }
            Suite::PointwiseT12 | Suite::PointwiseT14 if self.domain.dimension() == 2 => vec![0.5],
            _ => vec![0.25, 0.5, 0.75],
        }
    }

    /// Function expressions tried at order `s`.
    pub fn functions_for(&self, s: f64) -> Vec<String> {
        let pick = |l: &Option<Vec<String>>| l.clone().or_else(|| self.functions.any.clone());
        let chosen = if s < 0.0 {
            pick(&self.functions.negative)
        } else if s > 1.0 {
            pick(&self.functions.higher)
        } else {
            self.functions.any.clone()
        };
        chosen.unwrap_or_else(|| default_functions(self.suite, &self.domain, s))
    }

    /// Evaluation points of the pointwise suites.
    pub fn points(&self) -> Vec<Vec<f64>> {
        match &self.grid {
            Some(Grid::Points(p)) => p.clone(),
            Some(Grid::PerAxis(k)) => self.domain.interior_grid(*k),
            None => match self.suite {
                Suite::CounterexampleR31 => {
                    let parts = self.domain.components().unwrap_or(&[]).to_vec();
                    let supports: Vec<(f64, f64)> = self
                        .orders()
                        .iter()
                        .flat_map(|&s| self.functions_for(s))
                        .filter_map(|id| funcspec::build(&id, &self.domain).ok())
                        .filter_map(|u| u.line().ok().and_then(|f| f.hull()))
                        .collect();
                    self.domain
                        .interior_grid(3)
                        .into_iter()
                        .filter(|x| {
                            let Some(c) = self.domain.component_of(x[0]) else { return false };
                            let (a, b) = parts[c];
                            supports.iter().all(|&(lo, hi)| hi <= a || lo >= b)
                        })
                        .collect()
                }
                _ if self.domain.dimension() == 2 => self.domain.interior_grid(3),
                _ => self.domain.interior_grid(9),
            },
        }
    }

    /// Suite preconditions that can be decided before any evaluation.
    pub fn validate(&self) -> Result<()> {
        let orders = self.orders();
        for &s in &orders {
            if !s.is_finite() || s <= -1.0 {
                return Err(Error::InvalidOrder(format!("s = {s} must be finite and greater than -1")));
            }
        }
        let unit_order = |what: &str| -> Result<()> {
            match orders.iter().find(|&&s| !(s > 0.0 && s < 1.0)) {
                Some(s) => Err(Error::InvalidOrder(format!("{what} needs every s in (0,1), got {s}"))),
                None => Ok(()),
            }
        };
        match self.suite {
            Suite::FormsT11 | Suite::FormsT13 => {
                if let Some(s) = orders.iter().find(|&&s| s >= 0.0 && s.fract() == 0.0) {
                    return Err(Error::InvalidOrder(format!("s = {s} is a nonnegative integer")));
                }
            }
            Suite::PointwiseT12 | Suite::PointwiseT14 => {
                unit_order(self.suite.name())?;
                if self.suite == Suite::PointwiseT14 && !self.domain.is_convex() {
                    return Err(Error::UnsupportedDomain("pointwise-T14 needs a convex domain".into()));
                }
            }
            Suite::CounterexampleR31 => {
                unit_order("counterexample-R31")?;
                if self.domain.components().map(|c| c.len()).unwrap_or(1) < 2 {
                    return Err(Error::UnsupportedDomain("counterexample-R31 needs a disconnected domain".into()));
                }
            }
            Suite::IdentitiesS2 => {
                unit_order("identities-S2")?;
                if self.domain.dimension() != 1 {
                    return Err(Error::UnsupportedDomain("identities-S2 runs on intervals".into()));
                }
            }
            Suite::SpecfunSelftest => {}
        }
        for &s in &orders {
            for id in self.functions_for(s) {
                let u = funcspec::build(&id, &self.domain)?;
                let nonnegative = matches!(
                    self.suite,
                    Suite::PointwiseT12 | Suite::PointwiseT14 | Suite::CounterexampleR31
                );
                if nonnegative && min_value(&u, &self.domain) < -1e-12 {
                    return Err(Error::domain("functions", format!("{} needs u >= 0, '{id}' is negative somewhere", self.suite.name())));
                }
            }
        }
        if self.suite == Suite::CounterexampleR31 {
            let parts = self.domain.components()?;
            let points = self.points();
            if points.is_empty() {
                return Err(Error::domain("functions", "no evaluation point lies on a component where every function vanishes"));
            }
            for x in points {
                let Some(c) = self.domain.component_of(x[0]) else {
                    return Err(Error::domain("grid", format!("point {x:?} lies outside the domain")));
                };
                let (a, b) = parts[c];
                for &s in &orders {
                    for id in self.functions_for(s) {
                        let u = funcspec::build(&id, &self.domain)?;
                        if u.line()?.pieces.iter().any(|p| p.b > a && p.a < b && p.weight != 0.0) {
                            return Err(Error::domain(
                                "functions",
                                format!("'{id}' does not vanish on ({a}, {b}), which holds the point {x:?}"),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn min_value(u: &TestFunction, domain: &Domain) -> f64 {
    match (u, domain) {
        (TestFunction::Line(f), _) => f.sampled_min(),
        (TestFunction::Plane(g), Domain::Rectangle { x, y }) => g.sampled_min(*x, *y),
        _ => f64::NEG_INFINITY,
    }
}

fn default_functions(suite: Suite, domain: &Domain, s: f64) -> Vec<String> {
    let strs = |v: &[&str]| v.iter().map(|s| s.to_string()).collect();
    if domain.dimension() == 2 {
        return strs(&["prod(bump(3); bump(3))"]);
    }
    match suite {
        Suite::FormsT11 | Suite::FormsT13 => {
            if s < 0.0 {
                strs(&["sin(2)", "oddbump(2)", "bump(3) - mean"])
            } else if s < 1.0 {
                strs(&["sin(1)", "sin(2)", "bump(2)", "bump(3)"])
            } else {
                let p = s.floor() as u32 + 1;
                vec![format!("bump({p})"), format!("bump({})", p + 1), format!("oddbump({p})")]
            }
        }
        Suite::PointwiseT12 | Suite::PointwiseT14 | Suite::CounterexampleR31 => {
            if domain.components().map(|c| c.len()).unwrap_or(1) > 1 {
                strs(&["bump(2)"])
            } else {
                strs(&["sin(1)", "bump(2)"])
            }
        }
        Suite::IdentitiesS2 => strs(&["sin(1)", "1.4142135623730951*cos(1)", "bump(2)"]),
        Suite::SpecfunSelftest => Vec::new(),
    }
}

fn line_at(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

/// First line whose content starts with `key`, or 0 when it is absent.
fn line_of(text: &str, key: &str) -> usize {
    text.lines()
        .position(|l| {
            let l = l.trim_start();
            l.starts_with(key) && (key.starts_with('[') || l[key.len()..].trim_start().starts_with('='))
        })
        .map(|i| i + 1)
        .unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_config_uses_defaults() {
        let c = ScenarioConfig::parse("suite = \"forms-T13\"\n").unwrap();
        assert_eq!(c.suite, Suite::FormsT13);
        assert_eq!(c.orders().len(), 12);
        assert_eq!(c.functions_for(-0.5).len(), 3);
        assert_eq!(c.functions_for(2.5), vec!["bump(3)", "bump(4)", "oddbump(3)"]);
        assert_eq!(c.tolerances, Tolerances::default());
    }

    #[test]
    fn full_config() {
        let text = r#"
suite = "pointwise-T14"
s = [0.5]
functions = ["prod(bump(3); bump(3))"]
format = "json"
out = "r.json"

[domain]
rectangle = [[0.0, 1.0], [0.0, 1.0]]

[grid]
per_axis = 3

[tolerances]
pointwise = 1e-6
"#;
        let c = ScenarioConfig::parse(text).unwrap();
        assert_eq!(c.format, Format::Json);
        assert_eq!(c.points().len(), 9);
        assert_eq!(c.tolerances.pointwise, 1e-6);
        assert_eq!(c.tolerances.forms, 1e-7);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = ScenarioConfig::parse("suite = \"forms-T13\"\n\nbogus = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 3, .. }), "{err:?}");
    }

    #[test]
    fn unknown_suite_reports_line() {
        let err = ScenarioConfig::parse("# c\nsuite = \"forms-T99\"\n").unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn counterexample_needs_disconnected_domain() {
        let text = "suite = \"counterexample-R31\"\n[domain]\nintervals = [[0.0, 1.0]]\n";
        let err = ScenarioConfig::parse(text).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
        let text = "suite = \"counterexample-R31\"\nfunctions = [\"bump(2) + bump(2)@[2,3]\"]\n";
        assert!(ScenarioConfig::parse(text).is_err());
    }

    #[test]
    fn convexity_and_sign_preconditions() {
        let text = "suite = \"pointwise-T14\"\n[domain]\nintervals = [[0.0, 1.0], [2.0, 3.0]]\n";
        assert!(ScenarioConfig::parse(text).is_err());
        let text = "suite = \"pointwise-T14\"\nfunctions = [\"sin(2)\"]\n";
        let err = ScenarioConfig::parse(text).unwrap_err();
        assert!(matches!(err, Error::Config { line: 2, .. }), "{err:?}");
    }

    #[test]
    fn bad_values_are_rejected() {
        for text in [
            "suite = \"forms-T13\"\ns = [1.0]\n",
            "suite = \"forms-T13\"\nformat = \"xml\"\n",
            "suite = \"forms-T13\"\nfunctions = [\"sin(\"]\n",
            "suite = \"forms-T13\"\n[grid]\nper_axis = 0\n",
            "suite = \"pointwise-T12\"\ns = [1.5]\n",
            "suite = \"forms-T13\"\nn = 0\n",
            "s = [0.5]\n",
        ] {
            assert!(ScenarioConfig::parse(text).is_err(), "{text}");
        }
    }
}
