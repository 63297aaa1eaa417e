//! Embedded periodic table.
//!
//! Values come from `data/elements.csv`, generated from pymatgen's
//! `periodic_table.json` (atomic mass, empirical atomic radius, Pauling
//! electronegativity, known oxidation states). Row, group and the metal flag
//! follow the standard IUPAC layout; metals are the alkali, alkaline-earth,
//! transition, post-transition, lanthanide and actinide elements.
//!
//! Setting `CRYSGEN_DATA_DIR` to a directory containing an `elements.csv`
//! with the same columns replaces the embedded table.

use std::collections::HashMap;
use std::path::Path;
use std::sync::OnceLock;

use crate::error::{Error, Result};

const EMBEDDED: &str = include_str!("../data/elements.csv");

pub const DATA_DIR_ENV: &str = "CRYSGEN_DATA_DIR";

#[derive(Debug, Clone, PartialEq)]
pub struct Element {
    pub z: u8,
    pub symbol: String,
    pub mass: f64,
    /// Empirical atomic radius in Å; `None` where no value is tabulated.
    pub radius: Option<f64>,
    /// Pauling electronegativity; `None` for most noble gases.
    pub electronegativity: Option<f64>,
    pub row: u8,
    pub group: u8,
    pub metal: bool,
    pub oxidation_states: Vec<i32>,
}

#[derive(Debug)]
pub struct PeriodicTable {
    by_z: Vec<Option<Element>>,
    by_symbol: HashMap<String, u8>,
}

impl PeriodicTable {
    pub fn parse(text: &str, origin: &str) -> Result<Self> {
        let mut by_z: Vec<Option<Element>> = vec![None; 119];
        let mut by_symbol = HashMap::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |message: String| Error::Parse {
                path: origin.to_string(),
                line: idx + 1,
                message,
            };
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 9 {
                return Err(err(format!("expected 9 columns, found {}", cols.len())));
            }
            let num = |s: &str, name: &str| -> Result<f64> {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| err(format!("bad {name}: {s:?}")))
            };
            let opt = |s: &str, name: &str| -> Result<Option<f64>> {
                if s.trim().is_empty() {
                    Ok(None)
                } else {
                    num(s, name).map(Some)
                }
            };
            let z = num(cols[0], "z")? as u8;
            if z == 0 || z > 118 {
                return Err(err(format!("atomic number {z} out of range")));
            }
            let oxidation_states = cols[8]
                .split_whitespace()
                .map(|s| {
                    s.parse::<i32>()
                        .map_err(|_| err(format!("bad oxidation state {s:?}")))
                })
                .collect::<Result<Vec<_>>>()?;
            let el = Element {
                z,
                symbol: cols[1].trim().to_string(),
                mass: num(cols[2], "mass")?,
                radius: opt(cols[3], "radius")?,
                electronegativity: opt(cols[4], "electronegativity")?,
                row: num(cols[5], "row")? as u8,
                group: num(cols[6], "group")? as u8,
                metal: cols[7].trim() == "1",
                oxidation_states,
            };
            by_symbol.insert(el.symbol.clone(), z);
            by_z[z as usize] = Some(el);
        }
        Ok(PeriodicTable { by_z, by_symbol })
    }

    pub fn get(&self, z: u8) -> Option<&Element> {
        self.by_z.get(z as usize).and_then(Option::as_ref)
    }

    pub fn element(&self, z: u8) -> Result<&Element> {
        self.get(z).ok_or_else(|| Error::UnknownElement(format!("Z={z}")))
    }

    pub fn z_of(&self, symbol: &str) -> Result<u8> {
        self.by_symbol
            .get(symbol)
            .copied()
            .ok_or_else(|| Error::UnknownElement(symbol.to_string()))
    }

    pub fn symbol(&self, z: u8) -> Result<&str> {
        self.element(z).map(|e| e.symbol.as_str())
    }

    pub fn iter(&self) -> impl Iterator<Item = &Element> {
        self.by_z.iter().flatten()
    }
}

static TABLE: OnceLock<PeriodicTable> = OnceLock::new();

/// The process-wide element table.
pub fn table() -> &'static PeriodicTable {
    TABLE.get_or_init(|| {
        if let Some(dir) = std::env::var_os(DATA_DIR_ENV) {
            let path = Path::new(&dir).join("elements.csv");
            match std::fs::read_to_string(&path) {
                Ok(text) => match PeriodicTable::parse(&text, &path.display().to_string()) {
                    Ok(t) => return t,
                    Err(e) => log::warn!("ignoring {}: {e}", path.display()),
                },
                Err(e) => log::warn!("ignoring {}: {e}", path.display()),
            }
        }
        PeriodicTable::parse(EMBEDDED, "embedded elements.csv").expect("embedded table is valid")
    })
}

pub fn z_of(symbol: &str) -> Result<u8> {
    table().z_of(symbol)
}

pub fn symbol(z: u8) -> Result<&'static str> {
    table().symbol(z)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_covers_first_103() {
        let t = table();
        for z in 1..=103u8 {
            let e = t.element(z).unwrap();
            assert_eq!(e.z, z);
            assert!(e.mass > 0.0);
        }
        assert!(t.get(104).is_none());
    }

    #[test]
    fn lookup_by_symbol() {
        assert_eq!(z_of("Na").unwrap(), 11);
        assert_eq!(symbol(17).unwrap(), "Cl");
        assert!(matches!(z_of("Xx"), Err(Error::UnknownElement(_))));
    }

    #[test]
    fn layout_spot_checks() {
        let t = table();
        let fe = t.element(26).unwrap();
        assert_eq!((fe.row, fe.group, fe.metal), (4, 8, true));
        let hg = t.element(80).unwrap();
        assert_eq!((hg.row, hg.group), (6, 12));
        let o = t.element(8).unwrap();
        assert!(!o.metal);
        assert!(o.oxidation_states.contains(&-2));
        assert!(t.element(2).unwrap().oxidation_states.is_empty());
    }

    #[test]
    fn malformed_line_reports_position() {
        let err = PeriodicTable::parse("1,H,1.0\n", "x.csv").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 1, .. }));
    }
}
