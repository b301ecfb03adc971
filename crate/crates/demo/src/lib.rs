//! wasm-bindgen wrappers for the static page in `www/`. Each export returns a
//! JSON string; errors come back as a thrown string.

use std::fmt::Write as _;

use cqt::convex::{compile_constraints, icc, random_witness, DataConstraint, FeasibleSetSpec, InteriorPoint, ObjectKind};
use cqt::inference::Copies;
use cqt::qcore::linalg::{c, identity, trace_distance, CMatrix};
use cqt::qcore::{bkd_projective_mic, k0_bound, kw_bound, phase_retrieval_lic, rank_r_parameter_count, rng_from_seed};
use cqt::schemes::{run_scheme, SchemeConfig, SchemeKind};
use wasm_bindgen::prelude::*;

fn num(x: f64) -> String {
    if x.is_finite() {
        format!("{x:e}")
    } else {
        "null".into()
    }
}

/// Run one scheme and report its per-iteration spreads and fidelities.
pub fn scheme_summary(scheme: &str, d: usize, r: usize, seed: u64, copies: &str) -> Result<String, String> {
    let kind: SchemeKind = scheme.parse().map_err(|e: cqt::error::Error| e.to_string())?;
    let copies: Copies = copies.parse().map_err(|e: cqt::error::Error| e.to_string())?;
    let mut cfg = SchemeConfig::new(kind, d, r).with_seed(seed).with_copies(copies);
    if kind.is_product() {
        if !d.is_power_of_two() || d < 2 {
            return Err(format!("{kind} needs d to be a power of two here"));
        }
        cfg = cfg.with_local_dims(vec![2; d.trailing_zeros() as usize]);
    }
    let t = run_scheme(&cfg).map_err(|e| e.to_string())?;
    let mut s = String::new();
    let _ = write!(
        s,
        "{{\"scheme\":\"{}\",\"certified\":{},\"terminal_count\":{},\"total_outcomes\":{},\"fidelity\":{},\"iterations\":[",
        kind,
        t.certified(),
        t.terminal_count,
        t.total_outcomes,
        num(t.fidelity.unwrap_or(f64::NAN))
    );
    for (i, it) in t.iterations.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        let _ = write!(
            s,
            "{{\"index\":{},\"setting\":\"{}\",\"outcomes\":{},\"s_raw\":{},\"s_norm\":{},\"fidelity\":{}}}",
            it.index,
            it.setting,
            it.outcomes,
            num(it.s_raw),
            num(it.s_norm),
            num(it.fidelity.unwrap_or(f64::NAN))
        );
    }
    s.push_str("]}");
    Ok(s)
}

fn bloch_operator(n: &[f64]) -> CMatrix {
    let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
    let (x, y, z) = (n[0] / len, n[1] / len, n[2] / len);
    let sigma = CMatrix::from_row_slice(2, 2, &[c(z, 0.0), c(x, -y), c(x, y), c(-z, 0.0)]);
    (identity(2) + sigma) * c(0.5, 0.0)
}

/// Qubit feasible set from projectors onto the Bloch directions in `dirs`
/// (flattened triples), with data generated by the Bloch vector `truth`.
pub fn certify_qubit(truth: &[f64], dirs: &[f64], seed: u64) -> Result<String, String> {
    if truth.len() != 3 || !dirs.len().is_multiple_of(3) {
        return Err("expected a Bloch vector and a list of direction triples".into());
    }
    let norm = truth.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 1.0 + 1e-12 {
        return Err(format!("|r| = {norm:.4} lies outside the Bloch ball"));
    }
    let rho = (identity(2)
        + CMatrix::from_row_slice(
            2,
            2,
            &[c(truth[2], 0.0), c(truth[0], -truth[1]), c(truth[0], truth[1]), c(-truth[2], 0.0)],
        ))
        * c(0.5, 0.0);
    let mut spec = FeasibleSetSpec::new(ObjectKind::State { d: 2 }).map_err(|e| e.to_string())?;
    for n in dirs.chunks(3) {
        if n.iter().all(|v| *v == 0.0) {
            return Err("zero direction".into());
        }
        let p = bloch_operator(n);
        let prob = (&p * &rho).trace().re;
        spec.push(DataConstraint::single(p, prob)).map_err(|e| e.to_string())?;
    }
    let set = compile_constraints(&spec).map_err(|e| e.to_string())?;
    let w = random_witness(ObjectKind::State { d: 2 }, &mut rng_from_seed(seed)).map_err(|e| e.to_string())?;
    let res = icc(&set, &w, &InteriorPoint::default(), None).map_err(|e| e.to_string())?;
    let gap = trace_distance(&res.witness_max[0], &res.witness_min[0]);
    Ok(format!(
        "{{\"f_min\":{},\"f_max\":{},\"s_raw\":{},\"witness_distance\":{},\"singleton\":{}}}",
        num(res.f_min),
        num(res.f_max),
        num(res.s_raw),
        num(gap),
        res.s_raw < 1e-6
    ))
}

/// Closed-form benchmarks for every rank at dimension d.
pub fn bounds_rows(d: usize) -> Result<String, String> {
    if !(2..=64).contains(&d) {
        return Err("d must lie in 2..=64".into());
    }
    let mut s = String::from("[");
    for r in 1..=d {
        if r > 1 {
            s.push(',');
        }
        let kw = kw_bound(d, r).map(num).unwrap_or_else(|_| "null".into());
        let _ = write!(
            s,
            "{{\"r\":{r},\"params\":{},\"kw\":{kw},\"k0\":{},\"phase_retrieval\":{}}}",
            rank_r_parameter_count(d, r).map_err(|e| e.to_string())?,
            k0_bound(d, r).map_err(|e| e.to_string())?,
            phase_retrieval_lic(d, r).map_err(|e| e.to_string())?
        );
    }
    let _ = write!(s, "],\"bkd_projective_mic\":{}", bkd_projective_mic(d).map_err(|e| e.to_string())?);
    Ok(format!("{{\"rows\":{s}}}"))
}

#[wasm_bindgen]
pub fn run(scheme: &str, d: usize, r: usize, seed: u64, copies: &str) -> Result<String, JsValue> {
    scheme_summary(scheme, d, r, seed, copies).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn certify(truth: Vec<f64>, dirs: Vec<f64>, seed: u64) -> Result<String, JsValue> {
    certify_qubit(&truth, &dirs, seed).map_err(|e| JsValue::from_str(&e))
}

#[wasm_bindgen]
pub fn bounds(d: usize) -> Result<String, JsValue> {
    bounds_rows(d).map_err(|e| JsValue::from_str(&e))
}
