use cocycle_wasm::{preset_json, pressure_json, spectrum_json, typicality_json, MAX_DEPTH};
use serde_json::Value;

fn parse(s: &str) -> Value {
    serde_json::from_str(s).unwrap()
}

#[test]
fn butler_pressure_brackets_closed_form() {
    let spec = preset_json("butler").unwrap();
    let v = parse(&pressure_json(&spec, 0.0, 2.0, 1.0, 12).unwrap());
    let pts = v["points"].as_array().unwrap();
    assert_eq!(pts.len(), 3);
    let p1 = &pts[1];
    assert_eq!(p1["t"], 1.0);
    let exact = 2.5f64.ln();
    assert!(p1["lower"].as_f64().unwrap() <= exact + 1e-12 && exact <= p1["upper"].as_f64().unwrap() + 1e-12);
    assert!((v["entropy"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn identity_spectrum_collapses() {
    let spec = preset_json("golden_mean_identity").unwrap();
    let v = parse(&spectrum_json(&spec, -1.0, 1.0, 0.5, 8).unwrap());
    let pts = v.as_array().unwrap();
    assert!(!pts.is_empty());
    for p in pts {
        assert!(p["alpha"].as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn rotation_example_is_typical() {
    let spec = preset_json("diag_rotation").unwrap();
    let v = parse(&typicality_json(&spec, "0", "1", 0).unwrap());
    assert_eq!(v["typical"], "true");
}

#[test]
fn bad_input_is_reported() {
    let spec = preset_json("butler").unwrap();
    assert!(pressure_json(&spec, 1.0, 0.0, 0.5, 8).is_err());
    assert!(pressure_json(&spec, 0.0, 1.0, 0.5, MAX_DEPTH + 1).is_err());
    assert!(spectrum_json("{", 0.0, 1.0, 0.5, 8).is_err());
    assert!(typicality_json(&spec, "0", "0", 0).is_err());
    assert!(preset_json("nope").is_err());
}
