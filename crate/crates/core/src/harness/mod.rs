//! Comparison suites over scenario configs, with CSV/JSON reports.

mod config;
pub mod funcspec;
mod report;

use std::f64::consts::PI;

pub use config::{FunctionLists, Grid, ScenarioConfig, Suite, Tolerances};
pub use report::{emit_report, from_json, render, summary, to_csv, to_json, Format, ReportRow, RowVerdict, CSV_HEADER};

use crate::domain::Domain;
use crate::extension::{
    dual_functional, dual_nsp_extension, energy_chain, flux_constant, poisson_unit_mass, profile_energy,
    verify_form_energy_identity, ExtensionConfig,
};
use crate::forms::{compare_forms, evaluate_form, FormKind, FormsConfig, FractionalOrder, Pair, Verdict};
use crate::pointwise::{compare_pointwise, counterexample_disconnected, PointwiseConfig, PointwisePair};
use crate::quadrature::{integrate_adaptive, integrate_power_weighted, integrate_semi_infinite, Decay, QuadratureSpec};
use crate::specfun::{bessel_k, gagliardo_constant, extension_constant, gamma_fn, BesselOrder};
use crate::testfn::TestFunction;
use crate::{par, Error, Result};

#[derive(Debug, Clone)]
enum Task {
    Form { s: f64, id: String, pair: Pair },
    Point { s: f64, id: String, x: Vec<f64>, pair: PointwisePair },
    Counter { s: f64, id: String, x: Vec<f64> },
    Identity { s: f64, id: String, which: FormKind },
    Chain { s: f64, id: String },
    Dual { s: f64, id: String },
    ClosedForm,
    Check(Check),
}

#[derive(Debug, Clone, Copy)]
enum Check {
    BesselHalf(f64),
    ExtensionConstantHalf,
    GagliardoConstantHalf,
    SmallTau(f64),
    GammaRecurrence(f64),
    PoissonMass(f64),
    ProfileEnergy(f64),
    PowerWeighted,
    SemiInfinite,
    Oscillatory,
}

struct Engines {
    forms: FormsConfig,
    pointwise: PointwiseConfig,
    extension: ExtensionConfig,
}

impl Engines {
    fn new(cfg: &ScenarioConfig) -> Self {
        let mut forms = FormsConfig { n: cfg.n, target_rel: cfg.tolerances.forms, ..FormsConfig::default() };
        let mut pointwise = PointwiseConfig { n: cfg.n, target_rel: cfg.tolerances.pointwise, ..PointwiseConfig::default() };
        if let Some(q) = cfg.quadrature {
            forms.spec = q;
            pointwise.spec = q;
        }
        let extension = ExtensionConfig { n: cfg.n, identity_rel: cfg.tolerances.identity, ..ExtensionConfig::default() };
        Self { forms, pointwise, extension }
    }
}

fn point_label(x: &[f64]) -> String {
    match x {
        [a] => format!("x={a}"),
        _ => format!("x=({})", x.iter().map(|v| v.to_string()).collect::<Vec<_>>().join(",")),
    }
}

fn vanishes_on_boundary(u: &TestFunction, domain: &Domain) -> bool {
    let (Ok(f), Ok(parts)) = (u.line(), domain.components()) else { return false };
    let scale = f.pieces.iter().map(|p| p.weight.abs()).fold(0.0, f64::max).max(1e-300);
    parts.iter().all(|&(a, b)| f.eval(a).abs() <= 1e-12 * scale && f.eval(b).abs() <= 1e-12 * scale)
}

fn is_mean_zero(u: &TestFunction, domain: &Domain) -> bool {
    let (Ok(f), Ok(parts)) = (u.line(), domain.components()) else { return false };
    parts.iter().all(|&(a, b)| f.restrict(a, b).integral().abs() <= 1e-12)
}

fn tasks(cfg: &ScenarioConfig) -> Result<Vec<Task>> {
    let mut out = Vec::new();
    let orders = cfg.orders();
    match cfg.suite {
        Suite::FormsT13 | Suite::FormsT11 => {
            for &s in &orders {
                for id in cfg.functions_for(s) {
                    if cfg.suite == Suite::FormsT13 {
                        out.push(Task::Form { s, id, pair: Pair::DrVsNsp });
                        continue;
                    }
                    out.push(Task::Form { s, id: id.clone(), pair: Pair::DspVsDr });
                    if s > 0.0 && s < 1.0 {
                        out.push(Task::Form { s, id: id.clone(), pair: Pair::DspVsNsp });
                        out.push(Task::Form { s, id, pair: Pair::DrVsNr });
                    }
                }
            }
        }
        Suite::PointwiseT12 | Suite::PointwiseT14 => {
            let pair = if cfg.suite == Suite::PointwiseT12 { PointwisePair::DspVsDr } else { PointwisePair::DrVsNsp };
            for &s in &orders {
                for id in cfg.functions_for(s) {
                    for x in cfg.points() {
                        out.push(Task::Point { s, id: id.clone(), x, pair });
                    }
                }
            }
        }
        Suite::CounterexampleR31 => {
            for &s in &orders {
                for id in cfg.functions_for(s) {
                    for x in cfg.points() {
                        out.push(Task::Counter { s, id: id.clone(), x });
                    }
                }
            }
        }
        Suite::IdentitiesS2 => {
            for &s in &orders {
                for id in cfg.functions_for(s) {
                    let u = funcspec::build(&id, &cfg.domain)?;
                    out.push(Task::Identity { s, id: id.clone(), which: FormKind::NSp });
                    if vanishes_on_boundary(&u, &cfg.domain) {
                        out.push(Task::Identity { s, id: id.clone(), which: FormKind::DR });
                        out.push(Task::Chain { s, id: id.clone() });
                    }
                    let dual = if is_mean_zero(&u, &cfg.domain) { id } else { format!("{id} - mean") };
                    out.push(Task::Dual { s, id: dual });
                }
            }
            out.push(Task::ClosedForm);
        }
        Suite::SpecfunSelftest => {
            for t in [0.01, 0.1, 1.0, 10.0, 30.0] {
                out.push(Task::Check(Check::BesselHalf(t)));
            }
            out.push(Task::Check(Check::ExtensionConstantHalf));
            out.push(Task::Check(Check::GagliardoConstantHalf));
            for s in [0.25, 0.5, 0.75] {
                out.push(Task::Check(Check::SmallTau(s)));
            }
            for x in [0.3, 2.5, 7.25] {
                out.push(Task::Check(Check::GammaRecurrence(x)));
            }
            for s in [0.25, 0.5, 0.75] {
                out.push(Task::Check(Check::PoissonMass(s)));
                out.push(Task::Check(Check::ProfileEnergy(s)));
            }
            out.push(Task::Check(Check::PowerWeighted));
            out.push(Task::Check(Check::SemiInfinite));
            out.push(Task::Check(Check::Oscillatory));
        }
    }
    Ok(out)
}

struct Builder<'a> {
    suite: &'a str,
    s: f64,
    function: String,
}

impl Builder<'_> {
    #[allow(clippy::too_many_arguments)]
    fn row(
        &self,
        left_label: &str,
        left: Option<(f64, f64)>,
        right_label: &str,
        right: Option<(f64, f64)>,
        predicted: &str,
        verdict: RowVerdict,
    ) -> ReportRow {
        ReportRow {
            suite: self.suite.to_string(),
            s: self.s,
            function: self.function.clone(),
            left_label: left_label.to_string(),
            left_value: left.map(|l| l.0),
            left_error: left.map(|l| l.1),
            right_label: right_label.to_string(),
            right_value: right.map(|r| r.0),
            right_error: right.map(|r| r.1),
            margin: left.zip(right).map(|(l, r)| l.0 - r.0),
            predicted: predicted.to_string(),
            verdict,
        }
    }

    fn failed(&self, left_label: &str, right_label: &str, predicted: &str) -> ReportRow {
        self.row(left_label, None, right_label, None, predicted, RowVerdict::Inconclusive)
    }
}

fn form_label(k: FormKind) -> &'static str {
    match k {
        FormKind::DSp => "DSp",
        FormKind::NSp => "NSp",
        FormKind::DR => "DR",
        FormKind::NR => "NR",
    }
}

/// Equality within `tol * |reference|`; the error bars decide between fail and inconclusive.
fn equality_verdict(left: (f64, f64), right: (f64, f64), tol: f64) -> RowVerdict {
    let gap = (left.0 - right.0).abs();
    let allowed = tol * right.0.abs().max(left.0.abs());
    if gap <= allowed && left.1 + right.1 <= allowed {
        RowVerdict::Pass
    } else if gap > allowed + left.1 + right.1 {
        RowVerdict::Fail
    } else {
        RowVerdict::Inconclusive
    }
}

/// `left >= right` up to error bars.
fn geq_verdict(left: (f64, f64), right: (f64, f64)) -> RowVerdict {
    if left.0 - right.0 >= -(left.1 + right.1) {
        RowVerdict::Pass
    } else {
        RowVerdict::Fail
    }
}

fn run_task(task: &Task, cfg: &ScenarioConfig, eng: &Engines) -> Vec<ReportRow> {
    let suite = cfg.suite.name();
    let domain = &cfg.domain;
    let build = |id: &str| funcspec::build(id, domain);
    match task {
        Task::Form { s, id, pair } => {
            let b = Builder { suite, s: *s, function: id.clone() };
            let (l, r) = pair.forms();
            let strict = pair.strict();
            let predicted = FractionalOrder::new(*s)
                .and_then(|o| pair.predicted(&o))
                .map(|p| match (p.label(), strict) {
                    ("left_greater", false) => "left_geq",
                    ("right_greater", false) => "right_geq",
                    (lab, _) => lab,
                })
                .unwrap_or("none");
            match build(id).and_then(|u| compare_forms(&u, domain, *s, *pair, &eng.forms)) {
                Ok(rec) => {
                    let verdict = match (rec.verdict(), strict) {
                        (Verdict::Contradicted, _) => RowVerdict::Fail,
                        (Verdict::Confirmed, _) | (Verdict::Inconclusive, false) => RowVerdict::Pass,
                        (Verdict::Inconclusive, true) => RowVerdict::Inconclusive,
                    };
                    vec![b.row(
                        form_label(l),
                        Some((rec.left_form.value, rec.left_form.error)),
                        form_label(r),
                        Some((rec.right_form.value, rec.right_form.error)),
                        predicted,
                        verdict,
                    )]
                }
                Err(_) => vec![b.failed(form_label(l), form_label(r), predicted)],
            }
        }
        Task::Point { s, id, x, pair } => {
            let b = Builder { suite, s: *s, function: format!("{id}@{}", point_label(x)) };
            let (l, r) = match pair {
                PointwisePair::DspVsDr => ("DSp", "DR"),
                PointwisePair::DrVsNsp => ("DR", "NSp"),
            };
            let res = build(id).and_then(|u| compare_pointwise(&u, domain, *s, std::slice::from_ref(x), *pair, &eng.pointwise));
            match res {
                Ok(c) => {
                    let c = &c[0];
                    let verdict = if c.confirmed() {
                        RowVerdict::Pass
                    } else if c.conclusive && c.predicted.is_some() {
                        RowVerdict::Fail
                    } else {
                        RowVerdict::Inconclusive
                    };
                    let predicted = c.predicted.map(|p| p.label()).unwrap_or("none");
                    vec![b.row(l, Some((c.left.value, c.left.error)), r, Some((c.right.value, c.right.error)), predicted, verdict)]
                }
                Err(_) => vec![b.failed(l, r, "left_greater")],
            }
        }
        Task::Counter { s, id, x } => {
            let b = Builder { suite, s: *s, function: format!("{id}@{}", point_label(x)) };
            let res = build(id).and_then(|u| counterexample_disconnected(&u, domain, *s, std::slice::from_ref(x), &eng.pointwise));
            match res {
                Ok(rep) => {
                    let r = &rep.rows[0];
                    let verdict = if r.nsp_vanishes && r.dr_negative {
                        RowVerdict::Pass
                    } else if r.dr.value > 3.0 * r.dr.error {
                        RowVerdict::Fail
                    } else {
                        RowVerdict::Inconclusive
                    };
                    vec![b.row("DR", Some((r.dr.value, r.dr.error)), "NSp", Some((r.nsp.value, r.nsp.error)), "right_greater", verdict)]
                }
                Err(_) => vec![b.failed("DR", "NSp", "right_greater")],
            }
        }
        Task::Identity { s, id, which } => {
            let b = Builder { suite, s: *s, function: id.clone() };
            let (l, r) = match which {
                FormKind::DR => ("Q_DR", "K*E_DR"),
                _ => ("Q_NSp", "K*E_NSp"),
            };
            match build(id).and_then(|u| verify_form_energy_identity(&u, domain, *s, *which, &eng.extension)) {
                Ok(rep) => {
                    let left = (rep.form.value, rep.form.error);
                    let right = (rep.scaled_energy, rep.scaled_error);
                    vec![b.row(l, Some(left), r, Some(right), "equal", equality_verdict(left, right, cfg.tolerances.identity))]
                }
                Err(_) => vec![b.failed(l, r, "equal")],
            }
        }
        Task::Chain { s, id } => {
            let b = Builder { suite, s: *s, function: id.clone() };
            let mid = "K*E_NSp(w_DR)";
            match build(id).and_then(|u| energy_chain(&u, domain, *s, &eng.extension)) {
                Ok(rep) => {
                    let restricted = (rep.restricted, rep.restricted_error);
                    let nsp = (rep.q_nsp.value, rep.q_nsp.error);
                    let dr = (rep.q_dr.value, rep.q_dr.error);
                    vec![
                        b.row("Q_NSp", Some(nsp), mid, Some(restricted), "right_geq", geq_verdict(restricted, nsp)),
                        b.row("Q_DR", Some(dr), mid, Some(restricted), "left_geq", geq_verdict(dr, restricted)),
                    ]
                }
                Err(_) => vec![b.failed("Q_NSp", mid, "right_geq"), b.failed("Q_DR", mid, "left_geq")],
            }
        }
        Task::Dual { s, id } => {
            let b = Builder { suite, s: -*s, function: id.clone() };
            let res = build(id).and_then(|u| {
                let q = evaluate_form(&u, domain, &FractionalOrder::new(-*s)?, FormKind::NSp, &eng.forms)?;
                let field = dual_nsp_extension(&u, domain, *s, &eng.extension)?;
                let e = dual_functional(&field, &eng.extension)?;
                let k = flux_constant(*s)?;
                Ok(((q.value, q.error), (-e.value / k, e.error / k)))
            });
            match res {
                Ok((left, right)) => vec![b.row(
                    "Q_NSp",
                    Some(left),
                    "-E_dual/K",
                    Some(right),
                    "equal",
                    equality_verdict(left, right, cfg.tolerances.identity),
                )],
                Err(_) => vec![b.failed("Q_NSp", "-E_dual/K", "equal")],
            }
        }
        Task::ClosedForm => {
            let id = "1.4142135623730951*cos(1)";
            let b = Builder { suite, s: 0.5, function: id.to_string() };
            let res = Domain::interval(0.0, 1.0)
                .and_then(|d| Ok((funcspec::build(id, &d)?, d)))
                .and_then(|(u, d)| evaluate_form(&u, &d, &FractionalOrder::new(0.5)?, FormKind::NSp, &eng.forms));
            match res {
                Ok(q) => vec![b.row("Q_NSp", Some((q.value, q.error)), "pi", Some((PI, 0.0)), "equal", equality_verdict((q.value, q.error), (PI, 0.0), 1e-8))],
                Err(_) => vec![b.failed("Q_NSp", "pi", "equal")],
            }
        }
        Task::Check(c) => vec![run_check(suite, *c)],
    }
}

fn run_check(suite: &str, c: Check) -> ReportRow {
    let spec = QuadratureSpec { rel_tol: 1e-12, abs_tol: 1e-15, max_subdivisions: 2000 };
    let (s, name, tol, computed, reference): (f64, String, f64, Result<(f64, f64)>, f64) = match c {
        Check::BesselHalf(t) => (
            0.5,
            format!("K_nu(tau={t})"),
            1e-10,
            BesselOrder::new(0.5).and_then(|o| bessel_k(o, t)).map(|r| (r.value, r.abs_error)),
            (PI / (2.0 * t)).sqrt() * (-t).exp(),
        ),
        Check::ExtensionConstantHalf => (0.5, "C_sigma".into(), 1e-12, extension_constant(0.5).map(|v| (v, 0.0)), 1.0),
        Check::GagliardoConstantHalf => {
            (0.5, "c_1s".into(), 1e-12, gagliardo_constant(1, 0.5).map(|v| (v, 0.0)), 1.0 / (2.0 * PI))
        }
        Check::SmallTau(sg) => {
            let t = 1e-4;
            let v = BesselOrder::new(sg).and_then(|o| bessel_k(o, t)).and_then(|k| {
                let g = gamma_fn(sg)?;
                let c = t.powf(sg) / (g * 2f64.powf(sg - 1.0));
                Ok((c * k.value, c * k.abs_error))
            });
            (sg, "small_tau_law(tau=1e-4)".into(), 1e-2, v, 1.0)
        }
        Check::GammaRecurrence(x) => {
            let v = gamma_fn(x + 1.0).map(|g| (g, 0.0));
            let r = gamma_fn(x).map(|g| x * g).unwrap_or(f64::NAN);
            (0.0, format!("gamma_recurrence(x={x})"), 1e-13, v, r)
        }
        Check::PoissonMass(sg) => {
            (sg, "poisson_unit_mass".into(), 1e-9, poisson_unit_mass(sg).map(|r| (r.value, r.abs_error)), 1.0)
        }
        Check::ProfileEnergy(sg) => (
            sg,
            "profile_energy".into(),
            1e-8,
            profile_energy(sg).map(|r| (r.value, r.abs_error)),
            flux_constant(sg).map(|k| 1.0 / k).unwrap_or(f64::NAN),
        ),
        Check::PowerWeighted => (
            0.0,
            "quad_power_weighted".into(),
            1e-10,
            integrate_power_weighted(|x: f64| (1.0 + x).recip(), 1.0, -0.5, &spec).map(|r| (r.value, r.error_estimate)),
            PI / 2.0,
        ),
        Check::SemiInfinite => (
            0.0,
            "quad_semi_infinite".into(),
            1e-10,
            integrate_semi_infinite(|x: f64| (1.0 + x * x).recip(), Decay::Algebraic(2.0), &spec)
                .map(|r| (r.value, r.error_estimate)),
            PI / 2.0,
        ),
        Check::Oscillatory => (
            0.0,
            "quad_oscillatory".into(),
            1e-10,
            integrate_adaptive(|x: f64| (40.0 * x).sin() * x, 0.0, PI, &spec).map(|r| (r.value, r.error_estimate)),
            -PI / 40.0,
        ),
    };
    let b = Builder { suite, s, function: name };
    match computed {
        Ok(v) => {
            let verdict = if (v.0 - reference).abs() <= tol * reference.abs() { RowVerdict::Pass } else { RowVerdict::Fail };
            b.row("computed", Some(v), "reference", Some((reference, 0.0)), "equal", verdict)
        }
        Err(_) => b.row("computed", None, "reference", Some((reference, 0.0)), "equal", RowVerdict::Fail),
    }
}

/// All rows of the configured suite, in config order.
pub fn run_suite(cfg: &ScenarioConfig) -> Result<Vec<ReportRow>> {
    cfg.validate()?;
    let eng = Engines::new(cfg);
    let list = tasks(cfg)?;
    let rows: Vec<ReportRow> = par::map(&list, |t| run_task(t, cfg, &eng)).into_iter().flatten().collect();
    if rows.is_empty() {
        return Err(Error::domain("run_suite", "the suite produced no rows"));
    }
    Ok(rows)
}

/// 0 when nothing fails and the inconclusive fraction is within `allowed`,
/// 1 on any failure, 2 when only inconclusive rows block.
pub fn exit_status(rows: &[ReportRow], allowed: f64) -> i32 {
    if rows.iter().any(|r| r.verdict == RowVerdict::Fail) {
        return 1;
    }
    let inconclusive = rows.iter().filter(|r| r.verdict == RowVerdict::Inconclusive).count();
    if inconclusive as f64 > allowed * rows.len() as f64 {
        2
    } else {
        0
    }
}

/// Sets the width of the global work pool. Only the first call has an effect.
#[cfg(feature = "parallel")]
pub fn set_threads(n: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::domain("set_threads", e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(v: RowVerdict) -> ReportRow {
        Builder { suite: "x", s: 0.5, function: "f".into() }.row("a", Some((1.0, 0.0)), "b", Some((0.0, 0.0)), "left_greater", v)
    }

    #[test]
    fn exit_codes() {
        use RowVerdict::*;
        assert_eq!(exit_status(&[row(Pass), row(Pass)], 0.0), 0);
        assert_eq!(exit_status(&[row(Pass), row(Inconclusive)], 0.0), 2);
        assert_eq!(exit_status(&[row(Pass), row(Inconclusive)], 0.5), 0);
        assert_eq!(exit_status(&[row(Fail), row(Inconclusive)], 1.0), 1);
    }

    #[test]
    fn equality_verdicts() {
        assert_eq!(equality_verdict((1.0, 1e-6), (1.0 + 1e-5, 0.0), 1e-3), RowVerdict::Pass);
        assert_eq!(equality_verdict((1.0, 1e-6), (1.1, 0.0), 1e-3), RowVerdict::Fail);
        assert_eq!(equality_verdict((1.0, 1e-2), (1.0, 0.0), 1e-3), RowVerdict::Inconclusive);
    }

    #[test]
    fn selftest_passes() {
        let rows = run_suite(&ScenarioConfig::new(Suite::SpecfunSelftest)).unwrap();
        for r in &rows {
            assert_eq!(r.verdict, RowVerdict::Pass, "{r:?}");
        }
    }

    #[test]
    fn task_lists_follow_config_order() {
        let mut cfg = ScenarioConfig::new(Suite::FormsT11);
        cfg.s_grid = Some(vec![0.5, -0.5]);
        let t = tasks(&cfg).unwrap();
        assert_eq!(t.len(), 4 * 3 + 3);
        assert!(matches!(&t[0], Task::Form { s, pair: Pair::DspVsDr, .. } if *s == 0.5));
        assert!(matches!(t.last().unwrap(), Task::Form { s, .. } if *s == -0.5));
    }
}
