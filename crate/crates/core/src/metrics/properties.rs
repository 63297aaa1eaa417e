use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use super::emd::emd_1d;
use crate::crystal::Crystal;
use crate::elements;
use crate::error::Result;

/// Grams per mole per atomic mass unit over Å³ → g/cm³ (amu·10²⁴/N_A).
pub const AMU_PER_A3_TO_G_PER_CM3: f64 = 1.660_539_066_60;

/// Mass density in g/cm³.
pub fn density(crystal: &Crystal) -> Result<f64> {
    let table = elements::table();
    let mass = crystal
        .types()
        .iter()
        .map(|&z| table.element(z).map(|e| e.mass))
        .sum::<Result<f64>>()?;
    Ok(mass * AMU_PER_A3_TO_G_PER_CM3 / crystal.volume())
}

/// Number of distinct elements.
pub fn num_elements(crystal: &Crystal) -> usize {
    crystal.element_counts().len()
}

/// A user-supplied per-crystal scalar, given as precomputed columns.
#[derive(Debug, Clone, PartialEq)]
pub struct CustomProperty {
    pub name: String,
    pub generated: Vec<f64>,
    pub reference: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PropertyStats {
    pub emd_density: f64,
    pub emd_num_elems: f64,
    /// Keyed by property name.
    pub emd_custom: BTreeMap<String, f64>,
}

/// EMD between the distributions of `property` over two sets.
pub fn emd_property<F>(generated: &[Crystal], reference: &[Crystal], property: F) -> Result<f64>
where
    F: Fn(&Crystal) -> Result<f64> + Sync,
{
    let a: Vec<f64> = generated.par_iter().map(&property).collect::<Result<_>>()?;
    let b: Vec<f64> = reference.par_iter().map(&property).collect::<Result<_>>()?;
    emd_1d(&a, &b)
}

pub fn property_stats(
    generated: &[Crystal],
    reference: &[Crystal],
    custom: &[CustomProperty],
) -> Result<PropertyStats> {
    let emd_density = emd_property(generated, reference, density)?;
    let emd_num_elems = emd_property(generated, reference, |c| Ok(num_elements(c) as f64))?;
    let emd_custom = custom
        .iter()
        .map(|p| Ok((p.name.clone(), emd_1d(&p.generated, &p.reference)?)))
        .collect::<Result<_>>()?;
    Ok(PropertyStats {
        emd_density,
        emd_num_elems,
        emd_custom,
    })
}
