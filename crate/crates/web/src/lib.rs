//! WebAssembly bindings for the demo page in `www/`.
//!
//! Every export takes the spec as JSON text and returns plain strings or
//! numbers, so the page needs no glue beyond what wasm-bindgen generates.
//! The `*_impl` functions carry the logic and are tested natively.

use steinprod::dist::DensityEvaluator;
use steinprod::steinops::{build_stein, reduce_order, ProductSpec};
use steinprod::steinsolve::{solve_stein_pg, TestFunction};
use wasm_bindgen::prelude::*;

fn spec(json: &str) -> Result<ProductSpec, String> {
    ProductSpec::from_json_str(json).map_err(|e| e.to_string())
}

/// JSON `{order, expectedOrder, substitution, text, terms}`.
pub fn operator_impl(spec_json: &str, reduce: bool) -> Result<String, String> {
    let spec = spec(spec_json)?;
    let b = if reduce { reduce_order(&spec) } else { build_stein(&spec) }.map_err(|e| e.to_string())?;
    let doc = serde_json::json!({
        "order": b.reduced_order,
        "expectedOrder": b.expected_order,
        "substitution": b.substitution.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "text": b.operator.to_string(),
        "terms": b.operator.to_json().terms,
    });
    Ok(doc.to_string())
}

/// Density at `count` evenly spaced points of `[start, end]`, interleaved as
/// `x0, p0, x1, p1, ...`; infinite values at the origin are reported as NaN.
pub fn density_impl(spec_json: &str, start: f64, end: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(start < end) || count < 2 || count > 20_000 {
        return Err("need start < end and 2 <= count <= 20000".into());
    }
    let d = DensityEvaluator::new(&spec(spec_json)?).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(2 * count);
    for i in 0..count {
        let x = start + (end - start) * i as f64 / (count - 1) as f64;
        let p = d.pdf(x).map_err(|e| e.to_string())?;
        out.push(x);
        out.push(if p.is_finite() { p } else { f64::NAN });
    }
    Ok(out)
}

/// `x, f, residual` triples for the PG(r1, r2, λ) Stein equation.
pub fn stein_solve_impl(r1: f64, r2: f64, lambda: f64, h: &str, start: f64, end: f64, count: usize) -> Result<Vec<f64>, String> {
    if !(start > 0.0 && start < end) || count < 2 || count > 2_000 {
        return Err("need 0 < start < end and 2 <= count <= 2000".into());
    }
    let h = TestFunction::builtin(h).map_err(|e| e.to_string())?;
    let sol = solve_stein_pg(r1, r2, lambda, &h).map_err(|e| e.to_string())?;
    let mut out = Vec::with_capacity(3 * count);
    for i in 0..count {
        // log spacing shows the behaviour near the origin
        let x = start * (end / start).powf(i as f64 / (count - 1) as f64);
        out.push(x);
        out.push(sol.f(x).map_err(|e| e.to_string())?);
        out.push(sol.residual(x).map_err(|e| e.to_string())?);
    }
    Ok(out)
}

#[wasm_bindgen]
pub fn stein_operator(spec_json: &str, reduce: bool) -> Result<String, JsValue> {
    operator_impl(spec_json, reduce).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn density(spec_json: &str, start: f64, end: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    density_impl(spec_json, start, end, count).map_err(JsValue::from)
}

#[wasm_bindgen]
pub fn stein_solve(r1: f64, r2: f64, lambda: f64, h: &str, start: f64, end: f64, count: usize) -> Result<Vec<f64>, JsValue> {
    stein_solve_impl(r1, r2, lambda, h, start, end, count).map_err(JsValue::from)
}
