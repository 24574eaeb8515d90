//! Component-list JSON for curvature tensors.
//!
//! `{"kind":"components","entries":[[i,j,k,l,value],...]}` with indices in
//! `1..=4`. Each entry also fixes its images under `R_ijkl = −R_jikl = R_klij`;
//! entries that disagree with an earlier one are rejected.

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::tensor::{AlgCurvature4, Tensor4};

const CONFLICT_TOL: f64 = 1e-12;

fn images(i: usize, j: usize, k: usize, l: usize, v: f64) -> [([usize; 4], f64); 8] {
    [
        ([i, j, k, l], v),
        ([j, i, k, l], -v),
        ([i, j, l, k], -v),
        ([j, i, l, k], v),
        ([k, l, i, j], v),
        ([l, k, i, j], -v),
        ([k, l, j, i], -v),
        ([l, k, j, i], v),
    ]
}

/// Parses the component list into a raw tensor (no curvature validation).
pub fn tensor_from_json(v: &Value) -> Result<Tensor4> {
    let kind = v.get("kind").and_then(Value::as_str);
    if kind != Some("components") {
        return Err(Error::Input("expected \"kind\": \"components\"".into()));
    }
    let entries = v
        .get("entries")
        .and_then(Value::as_array)
        .ok_or_else(|| Error::Input("missing \"entries\" array".into()))?;
    let mut t = Tensor4::zeros();
    let mut set = [false; 256];
    for (n, e) in entries.iter().enumerate() {
        let row = e
            .as_array()
            .filter(|r| r.len() == 5)
            .ok_or_else(|| Error::Input(format!("entry {n} must be [i,j,k,l,value]")))?;
        let mut idx = [0usize; 4];
        for (slot, x) in row[..4].iter().enumerate() {
            let i = x
                .as_u64()
                .filter(|i| (1..=4).contains(i))
                .ok_or_else(|| Error::Input(format!("entry {n}: index must be an integer in 1..=4")))?;
            idx[slot] = i as usize - 1;
        }
        let val = row[4]
            .as_f64()
            .filter(|x| x.is_finite())
            .ok_or_else(|| Error::Input(format!("entry {n}: value must be a finite number")))?;
        let [i, j, k, l] = idx;
        if (i == j || k == l) && val != 0.0 {
            return Err(Error::Input(format!(
                "entry {n}: R_{}{}{}{} must vanish by antisymmetry",
                i + 1,
                j + 1,
                k + 1,
                l + 1
            )));
        }
        for (p, w) in images(i, j, k, l, val) {
            let flat = ((p[0] * 4 + p[1]) * 4 + p[2]) * 4 + p[3];
            if set[flat] {
                let old = t.0[flat];
                if (old - w).abs() > CONFLICT_TOL * old.abs().max(w.abs()).max(1.0) {
                    return Err(Error::Input(format!(
                        "entry {n} conflicts with an earlier value at ({},{},{},{}): {old} vs {w}",
                        p[0] + 1,
                        p[1] + 1,
                        p[2] + 1,
                        p[3] + 1
                    )));
                }
            }
            t.0[flat] = w;
            set[flat] = true;
        }
    }
    Ok(t)
}

pub fn curvature_from_json(v: &Value) -> Result<AlgCurvature4> {
    AlgCurvature4::validate(tensor_from_json(v)?)
}

pub fn curvature_from_str(s: &str) -> Result<AlgCurvature4> {
    let v: Value = serde_json::from_str(s).map_err(|e| Error::Input(e.to_string()))?;
    curvature_from_json(&v)
}

/// Nonzero components with `i < j`, `k < l` and `(i,j) ≤ (k,l)`.
pub fn curvature_to_json(t: &AlgCurvature4) -> Value {
    let mut entries = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            for k in 0..4 {
                for l in k + 1..4 {
                    if (i, j) > (k, l) {
                        continue;
                    }
                    let v = t.get(i, j, k, l);
                    if v != 0.0 {
                        entries.push(json!([i + 1, j + 1, k + 1, l + 1, v]));
                    }
                }
            }
        }
    }
    json!({"kind": "components", "entries": entries})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{model_tensor, ModelSpec};

    #[test]
    fn sphere_from_six_entries() {
        let entries: Vec<Value> = [(1, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 4)]
            .iter()
            .map(|(i, j)| json!([i, j, i, j, 1.0]))
            .collect();
        let t = curvature_from_json(&json!({"kind": "components", "entries": entries})).unwrap();
        let s4 = model_tensor(&ModelSpec::S4 { r: 1.0 }).unwrap();
        assert_eq!(t.tensor().max_abs_diff(s4.tensor()), 0.0);
    }

    #[test]
    fn round_trip() {
        let cp2 = model_tensor(&ModelSpec::CP2 { scalar: 24.0 }).unwrap();
        let back = curvature_from_json(&curvature_to_json(&cp2)).unwrap();
        assert!(back.tensor().max_abs_diff(cp2.tensor()) < 1e-15);
    }

    #[test]
    fn rejects_bad_input() {
        let bad = [
            json!({"kind": "components", "entries": [[1, 2, 1, 2, 1.0], [2, 1, 1, 2, 1.0]]}),
            json!({"kind": "components", "entries": [[1, 1, 1, 2, 1.0]]}),
            json!({"kind": "components", "entries": [[0, 1, 1, 2, 1.0]]}),
            json!({"kind": "components", "entries": [[1, 2, 1]]}),
            json!({"kind": "tensor", "entries": []}),
        ];
        for b in bad {
            assert!(matches!(tensor_from_json(&b), Err(Error::Input(_))), "{b}");
        }
        // consistent duplicate is fine
        let ok = json!({"kind": "components", "entries": [[1, 2, 1, 2, 1.0], [2, 1, 2, 1, 1.0]]});
        assert!(tensor_from_json(&ok).is_ok());
        // Bianchi violation is caught by validation
        let b = json!({"kind": "components", "entries": [[1, 2, 3, 4, 1.0]]});
        assert!(matches!(curvature_from_json(&b), Err(Error::SymmetryViolation { .. })));
    }
}
