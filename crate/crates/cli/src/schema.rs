//! JSON Schema of the run configuration.

use serde_json::{json, Value};

fn number() -> Value {
    json!({"type": "number"})
}

fn coords() -> Value {
    json!({"type": "array", "items": {"type": "number"}, "minItems": 1, "maxItems": 3})
}

fn object(kind_key: &str, kind: &str, required: &[&str], props: Value) -> Value {
    let mut props = props;
    props[kind_key] = json!({"const": kind});
    let mut req = vec![kind_key.to_string()];
    req.extend(required.iter().map(|s| s.to_string()));
    json!({"type": "object", "required": req, "properties": props, "additionalProperties": false})
}

fn corpus() -> Value {
    json!({
        "type": "object",
        "required": ["family", "count", "lattice"],
        "additionalProperties": false,
        "properties": {
            "family": {"oneOf": [
                object("name", "random_smooth", &[], json!({"modes": {"type": "integer", "minimum": 0}, "amplitude": number()})),
                object("name", "power_cusp", &["center"], json!({"center": coords(), "gamma": {"type": "number", "exclusiveMinimum": 0}})),
                object("name", "two_level", &["low", "high"], json!({"low": number(), "high": number()})),
            ]},
            "count": {"type": "integer", "minimum": 0},
            "lattice": {
                "type": "object",
                "required": ["dim", "h", "lo", "hi"],
                "additionalProperties": false,
                "properties": {"dim": {"type": "integer", "minimum": 1, "maximum": 3}, "h": {"type": "number", "exclusiveMinimum": 0}, "lo": coords(), "hi": coords()}
            }
        }
    })
}

fn estimate() -> Value {
    let pos = json!({"type": "number", "exclusiveMinimum": 0});
    json!({"oneOf": [
        object("kind", "boundedness", &["center", "radius"], json!({"center": coords(), "radius": pos})),
        object("kind", "caccioppoli", &["center", "radius", "level", "inner", "outer"], json!({
            "center": coords(), "radius": pos, "level": number(), "inner": number(), "outer": number(),
            "profile": {"enum": ["hat", "smoothstep"]}, "sign": {"enum": ["plus", "minus"]}
        })),
        object("kind", "logarithmic", &["center", "r", "big_r", "d"], json!({
            "center": coords(), "r": pos, "big_r": pos, "d": pos,
            "truncation": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}
        })),
        object("kind", "sobolev_poincare", &["center", "radius", "theta"], json!({
            "center": coords(), "radius": pos, "theta": {"type": "number", "minimum": 1}, "corpus": corpus()
        })),
        object("kind", "holder", &["center", "r0"], json!({
            "center": coords(), "r0": pos, "sigma": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "levels": {"type": "integer", "minimum": 3}, "c_b": pos
        })),
        object("kind", "de_giorgi", &[], json!({"cases": {"type": "integer", "minimum": 0}, "steps": {"type": "integer", "minimum": 0}})),
        object("kind", "nfunction", &[], json!({"samples": {"type": "integer", "minimum": 1}, "eps": {"type": "number", "exclusiveMinimum": 0, "maximum": 1}})),
        object("kind", "luxemburg", &["corpus"], json!({"corpus": corpus()})),
    ]})
}

fn problem() -> Value {
    let pos = json!({"type": "number", "exclusiveMinimum": 0});
    let exponent = json!({"type": "number", "exclusiveMinimum": 1});
    json!({
        "type": "object",
        "required": ["dim", "h", "omega", "s", "g"],
        "additionalProperties": false,
        "properties": {
            "dim": {"type": "integer", "minimum": 1, "maximum": 3},
            "h": pos,
            "omega": {"oneOf": [
                object("shape", "box", &["lo", "hi"], json!({"lo": coords(), "hi": coords()})),
                object("shape", "ball", &["center", "radius"], json!({"center": coords(), "radius": pos})),
            ]},
            "s": {"type": "number", "exclusiveMinimum": 0, "exclusiveMaximum": 1},
            "g": {"oneOf": [
                object("family", "power", &["p"], json!({"p": exponent, "scale": pos})),
                object("family", "power_log", &["p"], json!({"p": exponent, "scale": pos})),
                object("family", "table", &["points"], json!({
                    "points": {"type": "array", "items": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2}},
                    "p": exponent, "q": exponent
                })),
            ]},
            "kernel": {"oneOf": [
                object("form", "pure", &[], json!({})),
                object("form", "cosine", &["mean", "amplitude", "wavelength"], json!({"mean": pos, "amplitude": number(), "wavelength": pos})),
            ]},
            "exterior": {"oneOf": [
                object("kind", "zero", &[], json!({})),
                object("kind", "constant", &["value"], json!({"value": number()})),
                object("kind", "radial_power", &["center", "amplitude", "exponent"], json!({
                    "center": coords(), "amplitude": number(), "exponent": {"type": "number", "minimum": 0}, "offset": number()
                })),
            ]},
            "data": {"oneOf": [
                object("kind", "model", &[], json!({})),
                object("kind", "step", &["axis", "at", "below", "above"], json!({
                    "axis": {"type": "integer", "minimum": 0, "maximum": 2}, "at": number(), "below": number(), "above": number()
                })),
                object("kind", "wave", &["amplitude", "frequency", "envelope", "offset"], json!({
                    "amplitude": number(), "frequency": number(), "envelope": pos, "offset": number()
                })),
                object("kind", "random_smooth", &[], json!({"modes": {"type": "integer", "minimum": 0}, "amplitude": number()})),
            ]},
            "truncation_radius": pos
        }
    })
}

/// The schema printed by `fracg schema`.
pub fn schema() -> Value {
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "fracg run configuration",
        "type": "object",
        "required": ["problem", "pipeline"],
        "additionalProperties": false,
        "properties": {
            "problem": problem(),
            "solver": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "tol": {"type": "number", "exclusiveMinimum": 0},
                    "max_iter": {"type": "integer", "minimum": 1},
                    "initial": {"enum": ["zero_extension", "halo_harmonic"]},
                    "method": {"enum": ["variable_metric", "diagonal"]}
                }
            },
            "pipeline": {
                "type": "array",
                "minItems": 1,
                "items": {"type": "string", "pattern": "^(solve|oracle|verify:.+|sweep:.+)$"}
            },
            "estimates": {"type": "object", "additionalProperties": estimate()},
            "sweeps": {
                "type": "object",
                "additionalProperties": {
                    "type": "object",
                    "required": ["estimate", "grid"],
                    "additionalProperties": false,
                    "properties": {
                        "estimate": {"type": "string"},
                        "grid": {"type": "object", "additionalProperties": {"type": "array", "minItems": 1}}
                    }
                }
            },
            "seed": {"type": "integer", "minimum": 0},
            "output_dir": {"type": "string"},
            "tolerances": {"type": "object", "additionalProperties": {"type": "number", "exclusiveMinimum": 0}},
            "bounds": {
                "type": "object",
                "additionalProperties": false,
                "properties": {
                    "sobolev_poincare": number(), "boundedness": number(), "caccioppoli": number(),
                    "logarithmic": number(), "holder": number()
                }
            }
        }
    })
}
