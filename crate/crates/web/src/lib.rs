//! WebAssembly bindings for the static demo page in `www/`.

use mixdetect::analytics::{arl, calibrate_threshold, edd_glr};
use mixdetect::profile::{amplitude_field, SensorGrid};
use mixdetect::scenario::Scenario;
use mixdetect::score::GSpec;
use wasm_bindgen::prelude::*;

fn score(kind: &str, p0: f64) -> Result<GSpec, String> {
    match kind {
        "mixture" => GSpec::mixture(p0).map_err(|e| e.to_string()),
        "hard" => GSpec::hard(p0).map_err(|e| e.to_string()),
        other => Err(format!("unknown score {other:?}; use mixture or hard")),
    }
}

/// Threshold for a target ARL, and the ARL it actually gives.
pub fn threshold_for(kind: &str, p0: f64, n: usize, target: f64, m1: usize) -> Result<[f64; 2], String> {
    let g = score(kind, p0)?;
    let b = calibrate_threshold(&g, n, target, 1, m1).map_err(|e| e.to_string())?;
    let a = arl(&g, n, b, 1, m1).map_err(|e| e.to_string())?;
    Ok([b, a])
}

/// Approximate detection delay when `round(p N)` streams shift by `mu`.
pub fn delay_for(kind: &str, p0: f64, n: usize, b: f64, p: f64, mu: f64, m1: usize) -> Result<f64, String> {
    let g = score(kind, p0)?;
    let s = Scenario::immediate_fraction(n, p, mu).map_err(|e| e.to_string())?;
    if s.is_null() {
        return Err("no stream is affected; raise p or mu".into());
    }
    Ok(edd_glr(&g, b, &s, Some(m1)).map_err(|e| e.to_string())?.value)
}

/// Mean shift at each sensor of a `side x side` unit grid, row by row.
pub fn field_for(side: usize, beta: f64, r: f64, x: f64, y: f64) -> Result<Vec<f64>, String> {
    let grid = SensorGrid::centered_square(side, 1.0).map_err(|e| e.to_string())?;
    amplitude_field(&[(r, [x, y])], &grid, beta).map_err(|e| e.to_string())
}

#[wasm_bindgen]
pub fn calibrate(kind: &str, p0: f64, n: usize, target_arl: f64, m1: usize) -> Result<Vec<f64>, JsError> {
    threshold_for(kind, p0, n, target_arl, m1).map(Vec::from).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn detection_delay(kind: &str, p0: f64, n: usize, b: f64, p: f64, mu: f64, m1: usize) -> Result<f64, JsError> {
    delay_for(kind, p0, n, b, p, mu, m1).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn sensor_field(side: usize, beta: f64, r: f64, x: f64, y: f64) -> Result<Vec<f64>, JsError> {
    field_for(side, beta, r, x, y).map_err(|e| JsError::new(&e))
}
