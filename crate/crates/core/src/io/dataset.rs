//! JSON-lines crystal datasets.
//!
//! One record per line:
//!
//! ```text
//! {"frac_coords":[[0,0,0],[0.5,0.5,0.5]],"id":"NaCl","lattice":[[5.64,0,0],[0,5.64,0],[0,0,5.64]],"properties":{"energy":-3.2},"species":["Na","Cl"]}
//! ```
//!
//! `lattice` is either a 3×3 row-vector matrix in Å or an object with keys
//! `a, b, c, alpha, beta, gamma` (Å, degrees). `properties` is optional.
//! Written files use the matrix form, sorted keys and floats rounded to 12
//! significant digits, so re-saving a loaded file reproduces it byte for byte.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;
use std::path::Path;

use serde_json::{Map, Value};

use super::write_atomic;
use crate::crystal::{Crystal, Lattice, LatticeParams, Vec3};
use crate::elements;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CrystalRecord {
    pub id: String,
    pub crystal: Crystal,
    pub properties: BTreeMap<String, f64>,
}

impl CrystalRecord {
    pub fn new(id: impl Into<String>, crystal: Crystal) -> Self {
        CrystalRecord {
            id: id.into(),
            crystal,
            properties: BTreeMap::new(),
        }
    }
}

const FIELDS: [&str; 5] = ["frac_coords", "id", "lattice", "properties", "species"];

/// Round to 12 significant digits; `-0.0` becomes `0.0`.
pub fn canonical_float(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return if x == 0.0 { 0.0 } else { x };
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

fn push_float(out: &mut String, x: f64) -> Result<()> {
    if !x.is_finite() {
        return Err(Error::InvalidConfig(format!(
            "cannot serialize non-finite value {x}"
        )));
    }
    out.push_str(&serde_json::to_string(&canonical_float(x)).expect("finite float"));
    Ok(())
}

/// Canonical coordinate: rounded, and folded back to 0 if rounding reached 1.
fn canonical_coord(x: f64) -> f64 {
    let r = canonical_float(x);
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}

/// Serialize one record as a single JSON line (no trailing newline).
pub fn record_to_line(record: &CrystalRecord) -> Result<String> {
    let mut s = String::from("{\"frac_coords\":[");
    for (i, f) in record.crystal.frac_coords().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for k in 0..3 {
            if k > 0 {
                s.push(',');
            }
            push_float(&mut s, canonical_coord(f[k]))?;
        }
        s.push(']');
    }
    s.push_str("],\"id\":");
    s.push_str(&serde_json::to_string(&record.id).expect("string"));
    s.push_str(",\"lattice\":[");
    for (i, row) in record.crystal.lattice().to_rows().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push('[');
        for (k, v) in row.iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            push_float(&mut s, *v)?;
        }
        s.push(']');
    }
    s.push(']');
    if !record.properties.is_empty() {
        s.push_str(",\"properties\":{");
        for (i, (k, v)) in record.properties.iter().enumerate() {
            if i > 0 {
                s.push(',');
            }
            write!(s, "{}:", serde_json::to_string(k).expect("string")).expect("string write");
            push_float(&mut s, *v)?;
        }
        s.push('}');
    }
    s.push_str(",\"species\":[");
    for (i, &z) in record.crystal.types().iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(&serde_json::to_string(elements::symbol(z)?).expect("string"));
    }
    s.push_str("]}");
    Ok(s)
}

pub fn write_dataset(records: &[CrystalRecord]) -> Result<String> {
    let mut out = String::new();
    for r in records {
        out.push_str(&record_to_line(r)?);
        out.push('\n');
    }
    Ok(out)
}

/// Write `records` atomically. An empty slice produces an empty file.
pub fn save_dataset(records: &[CrystalRecord], path: &Path) -> Result<()> {
    write_atomic(path, write_dataset(records)?.as_bytes())
}

pub fn load_dataset(path: &Path) -> Result<Vec<CrystalRecord>> {
    let text = std::fs::read_to_string(path)?;
    parse_dataset(&text, &path.display().to_string())
}

/// Parse JSON-lines text; `origin` names the source in errors and warnings.
pub fn parse_dataset(text: &str, origin: &str) -> Result<Vec<CrystalRecord>> {
    let mut records = Vec::new();
    let mut seen = HashSet::new();
    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: origin.to_string(),
            line: line_no,
            message,
        };
        let record = parse_line(line, origin, line_no).map_err(err)?;
        if !seen.insert(record.id.clone()) {
            return Err(Error::Parse {
                path: origin.to_string(),
                line: line_no,
                message: format!("duplicate id {:?}", record.id),
            });
        }
        records.push(record);
    }
    Ok(records)
}

fn number(v: &Value, field: &str) -> std::result::Result<f64, String> {
    v.as_f64()
        .ok_or_else(|| format!("field `{field}`: expected a number, got {v}"))
}

fn vec3(v: &Value, field: &str) -> std::result::Result<[f64; 3], String> {
    let arr = v
        .as_array()
        .filter(|a| a.len() == 3)
        .ok_or_else(|| format!("field `{field}`: expected an array of 3 numbers"))?;
    Ok([
        number(&arr[0], field)?,
        number(&arr[1], field)?,
        number(&arr[2], field)?,
    ])
}

fn parse_lattice(v: &Value) -> std::result::Result<Lattice, String> {
    match v {
        Value::Array(rows) if rows.len() == 3 => {
            let rows = [
                vec3(&rows[0], "lattice")?,
                vec3(&rows[1], "lattice")?,
                vec3(&rows[2], "lattice")?,
            ];
            Lattice::new(rows).map_err(|e| format!("field `lattice`: {e}"))
        }
        Value::Object(map) => {
            let get = |k: &str| {
                map.get(k)
                    .ok_or_else(|| format!("field `lattice`: missing `{k}`"))
                    .and_then(|x| number(x, "lattice"))
            };
            for k in map.keys() {
                if !["a", "b", "c", "alpha", "beta", "gamma"].contains(&k.as_str()) {
                    return Err(format!("field `lattice`: unknown key `{k}`"));
                }
            }
            let p = LatticeParams::new(
                get("a")?,
                get("b")?,
                get("c")?,
                get("alpha")?,
                get("beta")?,
                get("gamma")?,
            )
            .map_err(|e| format!("field `lattice`: {e}"))?;
            Lattice::from_params(&p).map_err(|e| format!("field `lattice`: {e}"))
        }
        _ => Err("field `lattice`: expected a 3x3 matrix or a parameter object".into()),
    }
}

fn parse_line(line: &str, origin: &str, line_no: usize) -> std::result::Result<CrystalRecord, String> {
    let value: Value = serde_json::from_str(line).map_err(|e| format!("malformed JSON: {e}"))?;
    let obj: &Map<String, Value> = value.as_object().ok_or("expected a JSON object")?;
    for k in obj.keys() {
        if !FIELDS.contains(&k.as_str()) {
            return Err(format!("unknown field `{k}`"));
        }
    }
    let field = |k: &str| obj.get(k).ok_or_else(|| format!("missing field `{k}`"));
    let id = field("id")?
        .as_str()
        .ok_or("field `id`: expected a string")?
        .to_string();
    let lattice = parse_lattice(field("lattice")?)?;
    let species = field("species")?
        .as_array()
        .ok_or("field `species`: expected an array of element symbols")?;
    let types = species
        .iter()
        .map(|s| {
            let sym = s.as_str().ok_or("field `species`: expected strings")?;
            elements::z_of(sym).map_err(|_| format!("field `species`: unknown element {sym:?}"))
        })
        .collect::<std::result::Result<Vec<u8>, String>>()?;
    let coords = field("frac_coords")?
        .as_array()
        .ok_or("field `frac_coords`: expected an array")?;
    if coords.len() != types.len() {
        return Err(format!(
            "field `frac_coords`: {} rows for {} species",
            coords.len(),
            types.len()
        ));
    }
    let mut frac = Vec::with_capacity(coords.len());
    let mut wrapped = 0;
    for c in coords {
        let f = Vec3::from(vec3(c, "frac_coords")?);
        if f.iter().any(|v| !v.is_finite()) {
            return Err("field `frac_coords`: non-finite coordinate".into());
        }
        if f.iter().any(|v| !(0.0..1.0).contains(v)) {
            wrapped += 1;
        }
        frac.push(f);
    }
    if wrapped > 0 {
        log::warn!("{origin}:{line_no}: wrapped {wrapped} atom(s) into [0, 1)");
    }
    let mut properties = BTreeMap::new();
    if let Some(p) = obj.get("properties") {
        let map = p.as_object().ok_or("field `properties`: expected an object")?;
        for (k, v) in map {
            properties.insert(k.clone(), number(v, &format!("properties.{k}"))?);
        }
    }
    let crystal = Crystal::new(types, frac, lattice).map_err(|e| e.to_string())?;
    Ok(CrystalRecord {
        id,
        crystal,
        properties,
    })
}
