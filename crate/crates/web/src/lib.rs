//! WebAssembly bindings for the demo page in `www/`.

// NaN-rejecting comparisons are written as `!(x > 0.0)` on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use polymax::curve::{shell_decay_bound, sigma_hat_with};
use polymax::multiplier::{g_profile_with, ProfileOptions, SEARCH_PANEL_CAP};
use polymax::parabolic::{dilate, polar_decompose};
use serde::Serialize;
use wasm_bindgen::prelude::*;

fn js_err(e: polymax::Error) -> JsError {
    JsError::new(&e.to_string())
}

/// Points of the planar sphere `{rho = r}` as interleaved `x, y` pairs.
#[wasm_bindgen]
pub fn rho_sphere(r: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    if samples < 3 {
        return Err(JsError::new("need at least 3 samples"));
    }
    let mut out = Vec::with_capacity(2 * samples + 2);
    for i in 0..=samples {
        let th = 2.0 * std::f64::consts::PI * i as f64 / samples as f64;
        let dir = polar_decompose(&[th.cos(), th.sin()]).map_err(js_err)?.direction;
        out.extend(dilate(&dir, r).map_err(js_err)?);
    }
    Ok(out)
}

/// `|sigma^(t, xi2)|` and its decay bound for `t` on a uniform grid of
/// `[lo, hi]`, as interleaved `t, value, bound` triples. Points beyond the
/// quadrature cap report `NaN` as the value.
#[wasm_bindgen]
pub fn sigma_hat_slice(xi2: f64, lo: f64, hi: f64, samples: usize) -> Result<Vec<f64>, JsError> {
    if samples < 2 || !(lo < hi) {
        return Err(JsError::new("need lo < hi and at least 2 samples"));
    }
    let mut out = Vec::with_capacity(3 * samples);
    for i in 0..samples {
        let t = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
        let xi = [t, xi2];
        let s = sigma_hat_with(&xi, 1e-8, SEARCH_PANEL_CAP).map_err(js_err)?;
        out.extend([t, s.value().map_or(f64::NAN, |v| v.norm()), shell_decay_bound(&xi)]);
    }
    Ok(out)
}

#[derive(Serialize)]
struct Profile {
    k_min: i32,
    k_max: i32,
    values: Vec<f64>,
    g: f64,
    tail: f64,
}

/// The dyadic profile `|nu^(delta_{2^k} xi)|` of a planar frequency, as JSON.
#[wasm_bindgen]
pub fn g_profile_json(xi1: f64, xi2: f64, tol: f64) -> Result<String, JsError> {
    let opts = ProfileOptions { tol, cap: SEARCH_PANEL_CAP };
    let p = g_profile_with(&[xi1, xi2], &opts).map_err(js_err)?;
    let out = Profile { k_min: p.window.k_min, k_max: p.window.k_max, values: p.values, g: p.g_value, tail: p.tail_bound };
    serde_json::to_string(&out).map_err(|e| JsError::new(&e.to_string()))
}
