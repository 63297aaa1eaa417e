use std::collections::BTreeMap;

use serde::Serialize;

use super::oxidation::{composition_validity, CompositionValidity};
use crate::crystal::Crystal;
use crate::error::Result;

/// Structures whose closest pair of atoms is at most this far apart (Å) are
/// structurally invalid.
pub const MIN_PAIR_DISTANCE: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidityReport {
    pub struct_valid: bool,
    pub min_pair_distance: f64,
    pub comp_valid: bool,
    /// Oxidation state per atomic number, when found by enumeration.
    pub neutral_assignment: Option<BTreeMap<u8, i32>>,
    pub composition: CompositionValidity,
}

/// Shortest distance between any two atoms, over all periodic images,
/// including each atom's own images.
pub fn min_pair_distance(crystal: &Crystal) -> Result<f64> {
    let reduced = crystal.niggli_reduced()?;
    let lattice = reduced.lattice();
    let frac = reduced.frac_coords();
    let mut best = f64::INFINITY;
    for k1 in -1i32..=1 {
        for k2 in -1i32..=1 {
            for k3 in -1i32..=1 {
                if (k1, k2, k3) != (0, 0, 0) {
                    best = best.min(lattice.image_shift([k1, k2, k3]).norm());
                }
            }
        }
    }
    for i in 0..frac.len() {
        for j in (i + 1)..frac.len() {
            best = best.min(lattice.min_image(&frac[i], &frac[j]).norm());
        }
    }
    Ok(best)
}

pub fn structure_validity(crystal: &Crystal) -> Result<(bool, f64)> {
    let d = min_pair_distance(crystal)?;
    Ok((d > MIN_PAIR_DISTANCE, d))
}

pub fn validity(crystal: &Crystal) -> Result<ValidityReport> {
    let (struct_valid, min_pair_distance) = structure_validity(crystal)?;
    let composition = composition_validity(&crystal.element_counts())?;
    Ok(ValidityReport {
        struct_valid,
        min_pair_distance,
        comp_valid: composition.is_valid(),
        neutral_assignment: composition.assignment().cloned(),
        composition,
    })
}
