//! Browser bindings: pressure curves, entropy spectra and typicality reports
//! for a cocycle given as a JSON spec. Every function returns JSON text.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use cocycle_core::cocycle::TableOptions;
use cocycle_core::pressure::WeightVector;
use cocycle_core::spectrum::{spectrum_curve, PressureCurve, SpectrumPoint};
use cocycle_core::subshift::topological_entropy;
use cocycle_core::typicality::{typicality_report, HomoclinicSpec, Tolerances};
use cocycle_core::{presets, CocycleSpec, TransitionMatrix};

/// Largest depth accepted from the page, to keep it responsive.
pub const MAX_DEPTH: usize = 16;
const MAX_POINTS: usize = 401;

fn grid(t_min: f64, t_max: f64, step: f64) -> Result<Vec<f64>, String> {
    if !(t_min.is_finite() && t_max.is_finite() && step > 0.0 && t_max >= t_min) {
        return Err("the grid needs finite t_min <= t_max and step > 0".into());
    }
    let count = ((t_max - t_min) / step + 1e-9).floor() as usize;
    if count + 1 > MAX_POINTS {
        return Err(format!("at most {MAX_POINTS} grid points"));
    }
    Ok((0..=count).map(|i| t_min + i as f64 * step).collect())
}

fn load(spec_json: &str, n: usize) -> Result<CocycleSpec, String> {
    if n == 0 || n > MAX_DEPTH {
        return Err(format!("depth must lie in 1..={MAX_DEPTH}"));
    }
    CocycleSpec::from_json(spec_json).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(v: &T) -> Result<String, String> {
    serde_json::to_string(v).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct Curve {
    entropy: f64,
    points: Vec<CurvePoint>,
}

#[derive(Serialize)]
struct CurvePoint {
    t: f64,
    lower: f64,
    upper: f64,
    estimate: f64,
}

pub fn pressure_json(spec_json: &str, t_min: f64, t_max: f64, step: f64, n: usize) -> Result<String, String> {
    let spec = load(spec_json, n)?;
    let ts = grid(t_min, t_max, step)?;
    let dir = WeightVector::scalar(1.0, spec.dim()).map_err(|e| e.to_string())?;
    let curve = PressureCurve::compute(&spec, dir.components(), &ts, n, None, TableOptions::default())
        .map_err(|e| e.to_string())?;
    let points = curve
        .points
        .iter()
        .map(|(t, b)| CurvePoint { t: *t, lower: b.lower, upper: b.upper, estimate: b.estimate })
        .collect();
    let entropy = topological_entropy(spec.shift()).map_err(|e| e.to_string())?;
    to_json(&Curve { entropy, points })
}

pub fn spectrum_json(spec_json: &str, t_min: f64, t_max: f64, step: f64, n: usize) -> Result<String, String> {
    let spec = load(spec_json, n)?;
    let ts = grid(t_min, t_max, step)?;
    let pts: Vec<SpectrumPoint> = spectrum_curve(&spec, &ts, n, TableOptions::default()).map_err(|e| e.to_string())?;
    to_json(&pts)
}

pub fn typicality_json(spec_json: &str, p_word: &str, insert: &str, offset: i32) -> Result<String, String> {
    let spec = CocycleSpec::from_json(spec_json).map_err(|e| e.to_string())?;
    let h = HomoclinicSpec::parse(spec.shift(), p_word, insert, offset as i64).map_err(|e| e.to_string())?;
    let report = typicality_report(&spec, &h, Tolerances::default()).map_err(|e| e.to_string())?;
    to_json(&report)
}

/// Spec JSON for one of the built-in examples.
pub fn preset_json(name: &str) -> Result<String, String> {
    let spec = match name {
        "butler" => presets::butler(2.0),
        "positive_pair" => presets::positive_pair(),
        "diag_rotation" => presets::diag_rotation(1.0),
        "golden_mean_identity" => presets::identity(TransitionMatrix::golden_mean(), 2),
        other => return Err(format!("unknown preset {other:?}")),
    };
    Ok(spec.to_json())
}

#[wasm_bindgen]
pub fn pressure(spec_json: &str, t_min: f64, t_max: f64, step: f64, n: usize) -> Result<String, JsError> {
    pressure_json(spec_json, t_min, t_max, step, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn spectrum(spec_json: &str, t_min: f64, t_max: f64, step: f64, n: usize) -> Result<String, JsError> {
    spectrum_json(spec_json, t_min, t_max, step, n).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn typicality(spec_json: &str, p_word: &str, insert: &str, offset: i32) -> Result<String, JsError> {
    typicality_json(spec_json, p_word, insert, offset).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn preset(name: &str) -> Result<String, JsError> {
    preset_json(name).map_err(|e| JsError::new(&e))
}
