//! Structure and composition fingerprints for coverage metrics.
//!
//! The structure fingerprint is a Gaussian-smeared radial distribution
//! function; the composition fingerprint summarizes standardized element
//! properties. Both are invariant to rotation, translation, atom order and
//! choice of periodic image.

use std::sync::OnceLock;

use serde::Serialize;

use crate::crystal::{Composition, Crystal};
use crate::elements::{self, Element};
use crate::error::Result;

pub const RDF_CUTOFF: f64 = 8.0;
pub const RDF_BIN_WIDTH: f64 = 0.1;
pub const RDF_SMEARING: f64 = 0.15;
pub const RDF_BINS: usize = 80;

/// Element features, in fingerprint order.
pub const ELEMENT_FEATURES: [&str; 6] = [
    "atomic_number",
    "atomic_mass",
    "atomic_radius",
    "electronegativity",
    "row",
    "group",
];

/// Both fingerprints of one crystal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Fingerprints {
    pub structure: Vec<f64>,
    pub composition: Vec<f64>,
}

impl Fingerprints {
    pub fn of(crystal: &Crystal) -> Result<Self> {
        Ok(Fingerprints {
            structure: fingerprint_structure(crystal),
            composition: fingerprint_composition(&crystal.composition())?,
        })
    }
}

pub fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len(), "fingerprint lengths differ");
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Bin centers of the RDF, in Å.
pub fn rdf_bin_centers() -> Vec<f64> {
    (0..RDF_BINS).map(|b| (b as f64 + 0.5) * RDF_BIN_WIDTH).collect()
}

/// Smeared radial distribution function `g(r)` at the bin centers:
/// `g(r) = (1/N) Σ_i Σ_(j,image) G_w(r − d) / (ρ·4πr²)` with `ρ = N/V`,
/// over all pairs (including self-images) with `0 < d ≤ cutoff`.
pub fn fingerprint_structure(crystal: &Crystal) -> Vec<f64> {
    let lattice = crystal.lattice();
    let frac = crystal.frac_coords();
    let n = frac.len();
    let shells = lattice
        .plane_spacings()
        .map(|h| (RDF_CUTOFF / h).ceil() as i32 + 1);
    let mut distances = Vec::new();
    for i in 0..n {
        for j in 0..n {
            let base = lattice.to_cart(&(frac[j] - frac[i]));
            for k1 in -shells[0]..=shells[0] {
                for k2 in -shells[1]..=shells[1] {
                    for k3 in -shells[2]..=shells[2] {
                        let d = (base + lattice.image_shift([k1, k2, k3])).norm();
                        if d > 1e-8 && d <= RDF_CUTOFF {
                            distances.push(d);
                        }
                    }
                }
            }
        }
    }
    // summing in sorted order keeps the result independent of atom order
    distances.sort_by(f64::total_cmp);
    let rho = n as f64 / lattice.volume();
    let norm = 1.0 / (RDF_SMEARING * (2.0 * std::f64::consts::PI).sqrt());
    rdf_bin_centers()
        .into_iter()
        .map(|r| {
            let s: f64 = distances
                .iter()
                .map(|d| {
                    let z = (r - d) / RDF_SMEARING;
                    norm * (-0.5 * z * z).exp()
                })
                .sum();
            s / (n as f64 * rho * 4.0 * std::f64::consts::PI * r * r)
        })
        .collect()
}

struct FeatureScaling {
    mean: [f64; 6],
    std: [f64; 6],
}

fn raw_features(e: &Element) -> [Option<f64>; 6] {
    [
        Some(e.z as f64),
        Some(e.mass),
        e.radius,
        e.electronegativity,
        Some(e.row as f64),
        Some(e.group as f64),
    ]
}

/// Table-wide mean and standard deviation of each feature, over the
/// elements where it is defined.
fn scaling() -> &'static FeatureScaling {
    static SCALING: OnceLock<FeatureScaling> = OnceLock::new();
    SCALING.get_or_init(|| {
        let mut mean = [0.0; 6];
        let mut std = [0.0; 6];
        for f in 0..6 {
            let vals: Vec<f64> = elements::table()
                .iter()
                .filter_map(|e| raw_features(e)[f])
                .collect();
            let m = vals.iter().sum::<f64>() / vals.len() as f64;
            let var = vals.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / vals.len() as f64;
            mean[f] = m;
            std[f] = var.sqrt();
        }
        FeatureScaling { mean, std }
    })
}

/// Standardized features of one element; undefined features map to 0.
pub fn element_features(z: u8) -> Result<[f64; 6]> {
    let e = elements::table().element(z)?;
    let s = scaling();
    let raw = raw_features(e);
    Ok(std::array::from_fn(|f| {
        raw[f].map_or(0.0, |v| (v - s.mean[f]) / s.std[f])
    }))
}

/// Fraction-weighted mean (6 values) followed by fraction-weighted
/// standard deviation (6 values) of the standardized element features.
pub fn fingerprint_composition(composition: &Composition) -> Result<Vec<f64>> {
    let rows: Vec<(f64, [f64; 6])> = composition
        .fractions()
        .iter()
        .map(|(&z, &w)| element_features(z).map(|f| (w, f)))
        .collect::<Result<_>>()?;
    let mean: [f64; 6] = std::array::from_fn(|f| rows.iter().map(|(w, x)| w * x[f]).sum());
    let std: [f64; 6] = std::array::from_fn(|f| {
        rows.iter()
            .map(|(w, x)| w * (x[f] - mean[f]).powi(2))
            .sum::<f64>()
            .sqrt()
    });
    Ok(mean.into_iter().chain(std).collect())
}
