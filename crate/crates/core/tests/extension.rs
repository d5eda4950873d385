use fraclap::domain::Domain;
use fraclap::extension::*;
use fraclap::forms::FormKind;
use fraclap::pointwise::{dr_pointwise, PointwiseConfig};
use fraclap::testfn::{Func1, TestFunction};

fn unit() -> Domain {
    Domain::interval(0.0, 1.0).unwrap()
}

fn sine() -> TestFunction {
    TestFunction::Line(Func1::sine(0.0, 1.0, 1).unwrap())
}

fn bump2() -> TestFunction {
    TestFunction::Line(Func1::bump(0.0, 1.0, 2).unwrap())
}

#[test]
fn half_space_trace_matches_pointwise_operator() {
    let cfg = ExtensionConfig::default();
    for u in [sine(), bump2()] {
        for sigma in [0.25, 0.5, 0.75] {
            let field = ExtensionField::half_space(&u, sigma).unwrap();
            for x in [0.3, 0.5] {
                let t = neumann_trace(&field, x, None, &cfg).unwrap();
                let p = dr_pointwise(&u, &unit(), sigma, &[x], &PointwiseConfig::default()).unwrap();
                assert!((t.value - p.value).abs() <= 1e-6 * p.value.abs(), "{sigma} {x}: {} vs {}", t.value, p.value);
            }
        }
    }
}

#[test]
fn half_cylinder_trace_is_spectral_operator() {
    // sin(pi x) has Neumann coefficients 4/((1 - 4k^2) pi) * sqrt 2 on cos(2k pi x)
    let cfg = ExtensionConfig::default();
    let sigma = 0.25;
    let field = ExtensionField::half_cylinder(&sine(), &unit(), sigma, &cfg).unwrap();
    let x: f64 = 0.4;
    let series: f64 = (1..200_000)
        .map(|k| {
            let k = k as f64;
            let c = 4.0 / ((1.0 - 4.0 * k * k) * std::f64::consts::PI);
            c * (2.0 * k * std::f64::consts::PI).powf(2.0 * sigma) * (2.0 * k * std::f64::consts::PI * x).cos()
        })
        .sum();
    let t = neumann_trace(&field, x, None, &cfg).unwrap();
    assert!((t.value - series).abs() < 1e-5 * series.abs(), "{} vs {series}", t.value);
}

#[test]
fn difference_field_is_positive_and_vanishes_on_the_base() {
    let cfg = ExtensionConfig::default();
    for u in [sine(), bump2()] {
        for sigma in [0.25, 0.75] {
            let pts: Vec<(f64, f64)> = [0.1, 0.5, 0.9]
                .iter()
                .flat_map(|&x| [0.05, 0.3, 1.0, 3.0].map(|y| (x, y)))
                .collect();
            for s in difference_field(&u, &unit(), sigma, &pts, &cfg).unwrap() {
                assert!(s.difference() > 3.0 * s.error, "{s:?}");
            }
            let base: Vec<(f64, f64)> = [0.2, 0.6].iter().map(|&x| (x, 0.0)).collect();
            for s in difference_field(&u, &unit(), sigma, &base, &cfg).unwrap() {
                assert!(s.difference().abs() <= 1e-8 + s.error, "{s:?}");
            }
        }
    }
}

#[test]
fn lateral_normal_derivative_is_negative() {
    let cfg = ExtensionConfig::default();
    for sigma in [0.25, 0.5, 0.75] {
        let field = ExtensionField::half_space(&bump2(), sigma).unwrap();
        for y in [0.01, 0.1, 1.0] {
            for (_, d) in lateral_normal_derivatives(&field, &unit(), y, &cfg).unwrap() {
                assert!(d < 0.0);
            }
        }
    }
}

#[test]
fn dual_flux_recovers_source() {
    let cfg = ExtensionConfig::default();
    let u = TestFunction::Line(Func1::cosine(0.0, 1.0, 2).unwrap().add(Func1::oddbump(0.0, 1.0, 2).unwrap()));
    let f = u.line().unwrap().clone();
    for sigma in [0.25, 0.5, 0.75] {
        let w = dual_nsp_extension(&u, &unit(), sigma, &cfg).unwrap();
        for x in [0.2, 0.45, 0.8] {
            let gap = |y: f64| (-w.weighted_flux(x, y, &cfg.field_spec).unwrap().value - f.eval(x)).abs();
            if sigma <= 0.5 {
                assert!(gap(1e-4) < 1e-2, "{sigma} {x}: {}", gap(1e-4));
            } else {
                // the flux approaches -u like y^{2 - 2 sigma}
                let ratio = gap(1e-4) / gap(1e-6);
                assert!((ratio / 10.0 - 1.0).abs() < 0.05, "{sigma} {x}: {ratio}");
            }
        }
    }
}

#[test]
fn cylinder_minimiser_has_least_energy() {
    let cfg = ExtensionConfig::default();
    let sigma = 0.5;
    let u = sine();
    let st = ExtensionField::half_cylinder(&u, &unit(), sigma, &cfg).unwrap();
    let cs = ExtensionField::half_space(&u, sigma).unwrap();
    let region = Region::Cylinder(unit());
    let a = energy(&st, &region, &cfg).unwrap();
    let b = energy(&cs, &region, &cfg).unwrap();
    assert!(a.value + a.error < b.value - b.error, "{a:?} {b:?}");
    let whole = energy(&cs, &Region::HalfSpace, &cfg).unwrap();
    assert!(b.value < whole.value);
}

#[test]
fn identity_for_sine_at_half_order() {
    let cfg = ExtensionConfig::default();
    for which in [FormKind::DR, FormKind::NSp] {
        let r = verify_form_energy_identity(&sine(), &unit(), 0.5, which, &cfg).unwrap();
        assert!(r.holds, "{r:?}");
        assert!(r.gap < 1e-6 * r.form.value);
    }
}
