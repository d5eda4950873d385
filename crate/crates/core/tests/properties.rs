use std::f64::consts::PI;

use fraclap::domain::Domain;
use fraclap::forms::{evaluate_form, q_nr, q_dr_gagliardo, FormKind, FormsConfig, FractionalOrder};
use fraclap::harness::{from_json, funcspec, to_csv, to_json, ReportRow, RowVerdict};
use fraclap::quadrature::{integrate_power_weighted, QuadratureSpec};
use fraclap::specfun::{bessel_k, gamma_fn, q_kernel, BesselOrder};
use fraclap::spectral::{component_coefficients, Kind};
use fraclap::testfn::{Func1, TestFunction};
use proptest::prelude::*;

fn family() -> impl Strategy<Value = Func1> {
    prop_oneof![
        (1u32..4).prop_map(|k| Func1::sine(0.0, 1.0, k).unwrap()),
        (2u32..5).prop_map(|p| Func1::bump(0.0, 1.0, p).unwrap()),
        (2u32..4).prop_map(|p| Func1::oddbump(0.0, 1.0, p).unwrap()),
    ]
}

fn unit() -> Domain {
    Domain::interval(0.0, 1.0).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, ..ProptestConfig::default() })]

    #[test]
    fn gamma_recurrence(x in 0.1f64..20.0) {
        let a = gamma_fn(x + 1.0).unwrap();
        let b = x * gamma_fn(x).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.abs(), "{x}: {a} vs {b}");
    }

    #[test]
    fn bessel_half_order_is_elementary(tau in 1e-3f64..50.0) {
        let k = bessel_k(BesselOrder::new(0.5).unwrap(), tau).unwrap().value;
        let want = (PI / (2.0 * tau)).sqrt() * (-tau).exp();
        prop_assert!((k / want - 1.0).abs() <= 1e-10);
    }

    #[test]
    fn bessel_order_sign_symmetry(nu in 0.01f64..0.99, tau in 1e-2f64..20.0) {
        let a = bessel_k(BesselOrder::new(nu).unwrap(), tau).unwrap().value;
        let b = bessel_k(BesselOrder::new(-nu).unwrap(), tau).unwrap().value;
        prop_assert_eq!(a, b);
    }

    #[test]
    fn q_kernel_is_a_decreasing_profile(sigma in 0.05f64..0.95, t in 1e-3f64..20.0, dt in 1e-2f64..2.0) {
        let a = q_kernel(sigma, t).unwrap().value;
        let b = q_kernel(sigma, t + dt).unwrap().value;
        prop_assert!(a > 0.0 && a <= 1.0);
        prop_assert!(b < a, "{sigma}: Q({t}) = {a}, Q({}) = {b}", t + dt);
    }

    #[test]
    fn power_weighted_monomials(gamma in -0.95f64..2.0, delta in 0.1f64..5.0, m in 0u32..4) {
        let spec = QuadratureSpec::new(1e-12, 1e-300, 2000).unwrap();
        let r = integrate_power_weighted(|x| x.powi(m as i32), delta, gamma, &spec).unwrap();
        let e = gamma + m as f64 + 1.0;
        let want = delta.powf(e) / e;
        prop_assert!((r.value - want).abs() <= r.error_estimate.max(1e-13 * want), "{r:?} vs {want}");
    }

    #[test]
    fn parseval_brackets_the_norm(f in family(), kind in prop_oneof![Just(Kind::Dirichlet), Just(Kind::Neumann)]) {
        let c = component_coefficients(&f, 0.0, 1.0, kind, 64);
        let partial: f64 = c.values.iter().map(|v| v * v).sum();
        let norm = f.l2_norm_sq();
        let tail = c.tail.form(0.0).unwrap();
        prop_assert!(partial <= norm * (1.0 + 1e-12));
        prop_assert!(norm <= (partial + tail) * (1.0 + 1e-12) + 1e-14, "{partial} + {tail} < {norm}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, ..ProptestConfig::default() })]

    #[test]
    fn forms_are_quadratic(
        f in family(),
        c in prop_oneof![-3.0f64..-0.1, 0.1f64..3.0],
        s in prop_oneof![Just(0.25), Just(0.5), Just(0.75), Just(1.5)],
        which in prop_oneof![Just(FormKind::DSp), Just(FormKind::NSp), Just(FormKind::DR)],
    ) {
        let cfg = FormsConfig::default();
        let order = FractionalOrder::new(s).unwrap();
        let u = TestFunction::Line(f.clone());
        let base = evaluate_form(&u, &unit(), &order, which, &cfg);
        prop_assume!(base.is_ok());
        let base = base.unwrap().value;
        let scaled = evaluate_form(&TestFunction::Line(f.scale(c)), &unit(), &order, which, &cfg).unwrap().value;
        prop_assert!((scaled - c * c * base).abs() <= 1e-12 * c * c * base.abs(), "{scaled} vs {}", c * c * base);
    }

    #[test]
    fn regional_form_below_restricted(f in family(), s in 0.05f64..0.95) {
        let cfg = FormsConfig::default();
        let u = TestFunction::Line(f);
        let nr = q_nr(&u, &unit(), s, &cfg).unwrap();
        let dr = q_dr_gagliardo(&u, &unit(), s, &cfg).unwrap();
        prop_assert!(nr.value <= dr.value + nr.error + dr.error, "{nr:?} {dr:?}");
    }

    #[test]
    fn sums_build_as_sums(a in -2.0f64..2.0, b in -2.0f64..2.0, k in 1u32..4, p in 2u32..5) {
        let d = unit();
        let op = if b < 0.0 { '-' } else { '+' };
        let u = funcspec::build(&format!("{a}*sin({k}) {op} {}*bump({p})", b.abs()), &d).unwrap();
        let want = Func1::sine(0.0, 1.0, k).unwrap().scale(a).add(Func1::bump(0.0, 1.0, p).unwrap().scale(b));
        for x in [0.13, 0.5, 0.77] {
            let v = u.line().unwrap().eval(x);
            prop_assert!((v - want.eval(x)).abs() <= 1e-14 * (1.0 + v.abs()));
        }
    }
}

fn row() -> impl Strategy<Value = ReportRow> {
    let num = prop_oneof![Just(None), any::<f64>().prop_filter("finite", |v| v.is_finite()).prop_map(Some)];
    (
        "[a-zA-Z0-9(),@=. *+-]{1,20}",
        any::<f64>().prop_filter("finite", |v| v.is_finite()),
        (num.clone(), num.clone(), num.clone(), num.clone(), num),
        prop_oneof![Just(RowVerdict::Pass), Just(RowVerdict::Fail), Just(RowVerdict::Inconclusive)],
    )
        .prop_map(|(function, s, (lv, le, rv, re, m), verdict)| ReportRow {
            suite: "forms-T13".into(),
            s,
            function,
            left_label: "DR".into(),
            left_value: lv,
            left_error: le,
            right_label: "NSp".into(),
            right_value: rv,
            right_error: re,
            margin: m,
            predicted: "left_greater".into(),
            verdict,
        })
}

proptest! {
    #[test]
    fn json_reports_round_trip(rows in prop::collection::vec(row(), 1..8)) {
        prop_assert_eq!(from_json(&to_json(&rows).unwrap()).unwrap(), rows);
    }

    #[test]
    fn csv_values_are_bit_faithful(rows in prop::collection::vec(row(), 1..8)) {
        let text = to_csv(&rows).unwrap();
        let mut reader = csv::Reader::from_reader(text.as_bytes());
        for (rec, r) in reader.records().zip(&rows) {
            let rec = rec.unwrap();
            prop_assert_eq!(rec[1].parse::<f64>().unwrap(), r.s);
            prop_assert_eq!(&rec[2], r.function.as_str());
            let cell = |v: Option<f64>| v.map(|v| format!("{v:.16e}")).unwrap_or_default();
            let want = cell(r.left_value);
            prop_assert_eq!(&rec[4], want.as_str());
            if let Some(v) = r.left_value {
                prop_assert_eq!(rec[4].parse::<f64>().unwrap(), v);
            }
        }
    }
}
