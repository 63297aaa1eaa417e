use std::collections::BTreeMap;

use super::{FieldOutput, NoiseLevel, ScoreField};
use crate::crystal::{Crystal, Vec3};
use crate::elements;
use crate::error::Result;
use crate::noise::TypeDistribution;

const FALLBACK_RADIUS: f64 = 1.5;

/// Purely repulsive pair potential
/// `U = Σ_{i<j, d_ij < cutoff} stiffness · max(0, r_i + r_j − d_ij)³`
/// over minimum-image pairs. It has no opinion on atom types.
#[derive(Debug, Clone)]
pub struct SoftSphereField {
    /// Per-species radius in Å.
    pub radii: BTreeMap<u8, f64>,
    /// Radius for species missing from `radii`.
    pub default_radius: f64,
    pub stiffness: f64,
    pub cutoff: f64,
    /// Species the uniform type distribution ranges over; the species
    /// present in the structure when `None`.
    pub support: Option<Vec<u8>>,
}

impl Default for SoftSphereField {
    fn default() -> Self {
        SoftSphereField {
            radii: BTreeMap::new(),
            default_radius: 0.8,
            stiffness: 1.0,
            cutoff: 6.0,
            support: None,
        }
    }
}

impl SoftSphereField {
    /// Radii taken from the element table, scaled by `scale`.
    pub fn from_atomic_radii(scale: f64, stiffness: f64) -> Self {
        let radii: BTreeMap<u8, f64> = elements::table()
            .iter()
            .map(|e| (e.z, scale * e.radius.unwrap_or(FALLBACK_RADIUS)))
            .collect();
        let max_r = radii.values().copied().fold(0.0, f64::max);
        SoftSphereField {
            radii,
            default_radius: scale * FALLBACK_RADIUS,
            stiffness,
            cutoff: 2.0 * max_r,
            support: None,
        }
    }

    pub fn radius(&self, z: u8) -> f64 {
        self.radii.get(&z).copied().unwrap_or(self.default_radius)
    }

    /// Overlapping minimum-image pairs as `(i, j, d_ij, overlap)`.
    fn pairs(&self, crystal: &Crystal) -> Vec<(usize, usize, Vec3, f64)> {
        let n = crystal.num_atoms();
        (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let d = crystal.min_image(i, j);
                let r = d.norm();
                let contact = self.radius(crystal.types()[i]) + self.radius(crystal.types()[j]);
                (r < self.cutoff && r < contact && r > 0.0).then_some((i, j, d, contact - r))
            })
            .collect()
    }

    pub fn energy(&self, crystal: &Crystal) -> f64 {
        self.pairs(crystal)
            .into_iter()
            .map(|(_, _, _, overlap)| self.stiffness * overlap.powi(3))
            .sum()
    }

    /// `−∇U` per atom (Cartesian).
    pub fn forces(&self, crystal: &Crystal) -> Vec<Vec3> {
        let mut f = vec![Vec3::zeros(); crystal.num_atoms()];
        for (i, j, d, overlap) in self.pairs(crystal) {
            // dU/dr = −3·k·overlap², pushing i away from j along −d
            let push = d * (3.0 * self.stiffness * overlap * overlap / d.norm());
            f[i] -= push;
            f[j] += push;
        }
        f
    }
}

/// Repulsive forces `−∇U` for `crystal`.
pub fn soft_sphere_scores(crystal: &Crystal, field: &SoftSphereField) -> Vec<Vec3> {
    field.forces(crystal)
}

impl ScoreField for SoftSphereField {
    /// Returns `F/σ_X`, so the sampler's drift `α_j·F/σ²_X,j` reduces to
    /// `(ε/σ²_X,L)·F` at every level, matching the harmonic oracle's scaling.
    fn evaluate(&self, noisy: &Crystal, level: &NoiseLevel) -> Result<FieldOutput> {
        let scores = self
            .forces(noisy)
            .into_iter()
            .map(|f| f / level.sigma_x)
            .collect();
        let support = match &self.support {
            Some(s) => s.clone(),
            None => {
                let mut s = noisy.types().to_vec();
                s.sort_unstable();
                s.dedup();
                s
            }
        };
        Ok(FieldOutput {
            scores,
            types: TypeDistribution::uniform_rows(support, noisy.num_atoms()),
        })
    }
}
