//! Browser bindings: form comparison, pointwise profiles and the disconnected
//! counterexample. Every export returns a JSON string.

use fraclap::domain::Domain;
use fraclap::forms::{evaluate_form, FormKind, FormsConfig, FractionalOrder};
use fraclap::harness::funcspec;
use fraclap::pointwise::{dr_pointwise, spectral_pointwise, PointwiseConfig};
use fraclap::spectral::Kind;
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn js(e: impl std::fmt::Display) -> JsValue {
    JsValue::from_str(&e.to_string())
}

fn pair(v: fraclap::Result<(f64, f64)>) -> Value {
    match v {
        Ok((value, error)) => json!({ "value": value, "error": error }),
        Err(e) => json!({ "failed": e.to_string() }),
    }
}

/// The four quadratic forms of `function` on (0,1). The regional form only
/// exists for `0 < s < 1`.
pub fn forms_json(function: &str, s: f64) -> fraclap::Result<String> {
    let domain = Domain::interval(0.0, 1.0)?;
    let u = funcspec::build(function, &domain)?;
    let order = FractionalOrder::new(s)?;
    let cfg = FormsConfig::default();
    let mut out = serde_json::Map::new();
    for k in [FormKind::DSp, FormKind::NSp, FormKind::DR, FormKind::NR] {
        if k == FormKind::NR && !(s > 0.0 && s < 1.0) {
            continue;
        }
        let v = evaluate_form(&u, &domain, &order, k, &cfg).map(|f| (f.value, f.error));
        out.insert(format!("{k:?}"), pair(v));
    }
    Ok(Value::Object(out).to_string())
}

/// DSp, DR and NSp applied to `function` at `points` equispaced interior points of (0,1).
pub fn profile_json(function: &str, s: f64, points: usize) -> fraclap::Result<String> {
    let domain = Domain::interval(0.0, 1.0)?;
    let u = funcspec::build(function, &domain)?;
    let cfg = PointwiseConfig::default();
    let xs: Vec<f64> = (1..=points).map(|i| i as f64 / (points + 1) as f64).collect();
    let mut dsp = Vec::new();
    let mut dr = Vec::new();
    let mut nsp = Vec::new();
    for &x in &xs {
        dsp.push(spectral_pointwise(&u, &domain, s, Kind::Dirichlet, &[x], &cfg)?.value);
        dr.push(dr_pointwise(&u, &domain, s, &[x], &cfg)?.value);
        nsp.push(spectral_pointwise(&u, &domain, s, Kind::Neumann, &[x], &cfg)?.value);
    }
    Ok(json!({ "x": xs, "DSp": dsp, "DR": dr, "NSp": nsp }).to_string())
}

/// `bump(2)` on (0,1) inside (0,1) U (2,3): DR and NSp on the empty component.
pub fn counterexample_json(s: f64, points: usize) -> fraclap::Result<String> {
    let domain = Domain::union(vec![(0.0, 1.0), (2.0, 3.0)])?;
    let u = funcspec::build("bump(2)", &domain)?;
    let cfg = PointwiseConfig::default();
    let xs: Vec<f64> = (1..=points).map(|i| 2.0 + i as f64 / (points + 1) as f64).collect();
    let mut dr = Vec::new();
    let mut nsp = Vec::new();
    for &x in &xs {
        dr.push(dr_pointwise(&u, &domain, s, &[x], &cfg)?.value);
        nsp.push(spectral_pointwise(&u, &domain, s, Kind::Neumann, &[x], &cfg)?.value);
    }
    Ok(json!({ "x": xs, "DR": dr, "NSp": nsp }).to_string())
}

#[wasm_bindgen]
pub fn forms(function: &str, s: f64) -> Result<String, JsValue> {
    forms_json(function, s).map_err(js)
}

#[wasm_bindgen]
pub fn profile(function: &str, s: f64, points: usize) -> Result<String, JsValue> {
    profile_json(function, s, points).map_err(js)
}

#[wasm_bindgen]
pub fn counterexample(s: f64, points: usize) -> Result<String, JsValue> {
    counterexample_json(s, points).map_err(js)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn forms_report_all_four() {
        let v: Value = serde_json::from_str(&forms_json("sin(1)", 0.5).unwrap()).unwrap();
        for k in ["DSp", "NSp", "DR", "NR"] {
            assert!(v[k]["value"].as_f64().unwrap() > 0.0, "{k}");
        }
        let v: Value = serde_json::from_str(&forms_json("bump(3)", 1.5).unwrap()).unwrap();
        assert!(v.get("NR").is_none());
    }

    #[test]
    fn profile_is_ordered() {
        let v: Value = serde_json::from_str(&profile_json("bump(2)", 0.5, 5).unwrap()).unwrap();
        let get = |k: &str| -> Vec<f64> { v[k].as_array().unwrap().iter().map(|x| x.as_f64().unwrap()).collect() };
        let (dsp, dr, nsp) = (get("DSp"), get("DR"), get("NSp"));
        for i in 0..5 {
            assert!(dsp[i] > dr[i] && dr[i] > nsp[i]);
        }
    }

    #[test]
    fn counterexample_sign() {
        let v: Value = serde_json::from_str(&counterexample_json(0.5, 3).unwrap()).unwrap();
        for (d, n) in v["DR"].as_array().unwrap().iter().zip(v["NSp"].as_array().unwrap()) {
            assert!(d.as_f64().unwrap() < 0.0);
            assert!(n.as_f64().unwrap().abs() < 1e-8);
        }
    }

    #[test]
    fn bad_function_is_an_error() {
        assert!(forms_json("sine(1)", 0.5).is_err());
    }
}
