//! WebAssembly bindings for the demo page in `www/`.
//!
//! Each exported function has a plain Rust twin returning `htype_core::Result`, so the
//! logic is testable on the host.

use htype_core::kernels::{self, KernelSpec};
use htype_core::lab::{make_counterexample, Variant};
use htype_core::special::{find_zero, ZeroFamily};
use htype_core::{build_htype, GroupPoint, Result};
use serde::Serialize;
use wasm_bindgen::prelude::*;

/// `samples` evenly spaced `|t|` values in `[0, rt_max]` with the kernel, interleaved `rt, re, im`.
pub fn kernel_profile_values(spec_json: &str, rz: f64, rt_max: f64, samples: usize) -> Result<Vec<f64>> {
    let spec: KernelSpec =
        serde_json::from_str(spec_json).map_err(|e| htype_core::Error::InvalidArgument(e.to_string()))?;
    spec.validate()?;
    if samples < 2 || !(rt_max > 0.0 && rt_max.is_finite()) || !(rz >= 0.0 && rz.is_finite()) {
        return Err(htype_core::Error::InvalidArgument("need samples >= 2, rt_max > 0 and rz >= 0".into()));
    }
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let rt = rt_max * i as f64 / (samples - 1) as f64;
        let v = kernels::evaluate_radial(&spec, rz, rt)?;
        out.extend([rt, v.re, v.im]);
    }
    Ok(out)
}

#[derive(Debug, Serialize)]
pub struct CounterexampleSummary {
    pub lambda: f64,
    pub predicted_eigenvalue: f64,
    pub normalization: f64,
    /// Central radii where the field vanishes along `z = 0`.
    pub zero_radii: Vec<f64>,
    /// `(|t|, value)` along `z = 0`.
    pub profile: Vec<(f64, f64)>,
}

/// One-sphere counterexample on the H-type group of dimensions `(n, m)`.
pub fn counterexample_summary(n: usize, m: usize, k: usize, r: f64, rt_max: f64, samples: usize) -> Result<CounterexampleSummary> {
    let g = build_htype(n, m)?;
    let c = make_counterexample(&g, Variant::VSphere { k, r })?;
    if samples < 2 || !(rt_max > 0.0 && rt_max.is_finite()) {
        return Err(htype_core::Error::InvalidArgument("need samples >= 2 and rt_max > 0".into()));
    }
    let order = 0.5 * m as f64 - 1.0;
    let mut zero_radii = Vec::new();
    for i in 1.. {
        let x = find_zero(ZeroFamily::Bessel { order }, i)? / c.lambda;
        if x > rt_max {
            break;
        }
        zero_radii.push(x);
    }
    let mut p = GroupPoint::identity(n, m);
    let profile = (0..samples)
        .map(|i| {
            let rt = rt_max * i as f64 / (samples - 1) as f64;
            p.t[0] = rt;
            (rt, c.field.evaluate(&p).re)
        })
        .collect();
    Ok(CounterexampleSummary {
        lambda: c.lambda,
        predicted_eigenvalue: c.predicted_eigenvalue,
        normalization: c.normalization,
        zero_radii,
        profile,
    })
}

pub fn structure_report_json(n: usize, m: usize) -> Result<String> {
    let report = build_htype(n, m)?.verify_structure(1e-12);
    serde_json::to_string(&report).map_err(|e| htype_core::Error::InvalidArgument(e.to_string()))
}

fn js_err(e: htype_core::Error) -> JsValue {
    JsValue::from_str(&e.to_string())
}

#[wasm_bindgen]
pub fn kernel_profile(spec_json: &str, rz: f64, rt_max: f64, samples: usize) -> std::result::Result<Vec<f64>, JsValue> {
    kernel_profile_values(spec_json, rz, rt_max, samples).map_err(js_err)
}

#[wasm_bindgen]
pub fn counterexample(n: usize, m: usize, k: usize, r: f64, rt_max: f64, samples: usize) -> std::result::Result<String, JsValue> {
    let s = counterexample_summary(n, m, k, r, rt_max, samples).map_err(js_err)?;
    serde_json::to_string(&s).map_err(|e| JsValue::from_str(&e.to_string()))
}

#[wasm_bindgen]
pub fn structure_check(n: usize, m: usize) -> std::result::Result<String, JsValue> {
    structure_report_json(n, m).map_err(js_err)
}
