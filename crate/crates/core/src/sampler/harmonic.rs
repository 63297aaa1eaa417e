use serde::Serialize;

use super::{FieldOutput, NoiseLevel, ScoreField};
use crate::crystal::{Crystal, Lattice, Vec3};
use crate::error::{Error, Result};
use crate::noise::{perturb_coords, NoiseSchedule, TypeDistribution};
use crate::rng;

/// The score field that drives the denoising loss to zero: it points every
/// atom along the minimum-image displacement back to a fixed reference,
/// `d_min(x̃_i → x_i)/σ_X`, and predicts the reference types with certainty.
///
/// Under the sampler's noise scaling, `α_j·s_X/σ_X,j = (ε/σ²_X,L)·d_min`,
/// a harmonic restoring force with spring constant `k = ε/σ²_X,L`.
#[derive(Debug, Clone)]
pub struct HarmonicOracle {
    reference: Crystal,
}

impl HarmonicOracle {
    pub fn new(reference: Crystal) -> Self {
        HarmonicOracle { reference }
    }

    pub fn reference(&self) -> &Crystal {
        &self.reference
    }
}

impl ScoreField for HarmonicOracle {
    fn evaluate(&self, noisy: &Crystal, level: &NoiseLevel) -> Result<FieldOutput> {
        if noisy.num_atoms() != self.reference.num_atoms() {
            return Err(Error::LengthMismatch {
                what: "noisy vs reference atoms",
                left: noisy.num_atoms(),
                right: self.reference.num_atoms(),
            });
        }
        // the noisy cell's orientation, so rotating the input rotates the scores
        let lattice = noisy.lattice();
        let scores = noisy
            .frac_coords()
            .iter()
            .zip(self.reference.frac_coords())
            .map(|(xt, x)| lattice.min_image(xt, x) / level.sigma_x)
            .collect();
        Ok(FieldOutput {
            scores,
            types: TypeDistribution::one_hot(self.reference.types()),
        })
    }
}

/// Whether displacing fractional position `x` by Cartesian `displacement`
/// lands on a point whose minimum-image offset from `x` is not
/// `displacement` itself.
pub fn displacement_crosses_boundary(lattice: &Lattice, x: &Vec3, displacement: &Vec3) -> bool {
    let moved = (x + lattice.to_frac(displacement)).map(crate::crystal::wrap_unit);
    let d = lattice.min_image(x, &moved);
    (d - displacement).norm() > 1e-9 * displacement.norm().max(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceLevel {
    pub index: usize,
    pub sigma_x: f64,
    pub alpha: f64,
    /// `max |α_j·s_X/σ_X,j + k·d_min(x → x̃)|` over sampled atoms.
    pub max_residual: f64,
    pub samples: usize,
    /// Atoms whose drawn noise moved them past half a cell, so that
    /// `d_min(x → x̃)` differs from `x̃ − x`.
    pub boundary_crossings: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EquivalenceReport {
    /// Spring constant `ε/σ²_X,L`.
    pub k: f64,
    pub levels: Vec<EquivalenceLevel>,
    /// First level from which no later level saw a boundary crossing; the
    /// observed start of the small-noise regime.
    pub small_noise_from: Option<usize>,
}

impl EquivalenceReport {
    pub fn max_residual(&self) -> f64 {
        self.levels.iter().map(|l| l.max_residual).fold(0.0, f64::max)
    }
}

/// Check, level by level, that the harmonic oracle's Langevin drift equals
/// the harmonic force `−k·d_min(x̃, x)` on noisy copies of `reference`.
pub fn harmonic_equivalence_check(
    reference: &Crystal,
    schedule: &NoiseSchedule,
    step_size: f64,
    samples_per_level: usize,
    seed: u64,
) -> Result<EquivalenceReport> {
    let oracle = HarmonicOracle::new(reference.clone());
    let sigma_last = schedule.sigma_x_min();
    let k = step_size / (sigma_last * sigma_last);
    let mut levels = Vec::with_capacity(schedule.len());
    for level in schedule.levels() {
        let alpha = step_size * level.sigma_x * level.sigma_x / (sigma_last * sigma_last);
        let mut r = rng::stream(seed, level.index as u64);
        let mut max_residual: f64 = 0.0;
        let mut crossings = 0;
        for _ in 0..samples_per_level {
            let noisy = perturb_coords(reference, level.sigma_x, &mut r);
            let out = oracle.evaluate(&noisy.crystal, &level)?;
            let lattice = noisy.crystal.lattice();
            for (i, s) in out.scores.iter().enumerate() {
                let drift = s / level.sigma_x * alpha;
                let d = lattice.min_image(&reference.frac_coords()[i], &noisy.crystal.frac_coords()[i]);
                max_residual = max_residual.max((drift + d * k).norm());
            }
            crossings += noisy.boundary_crossings();
        }
        levels.push(EquivalenceLevel {
            index: level.index,
            sigma_x: level.sigma_x,
            alpha,
            max_residual,
            samples: samples_per_level,
            boundary_crossings: crossings,
        });
    }
    let small_noise_from = levels
        .iter()
        .rposition(|l| l.boundary_crossings > 0)
        .map_or(Some(0), |last| (last + 1 < levels.len()).then_some(last + 1));
    Ok(EquivalenceReport {
        k,
        levels,
        small_noise_from,
    })
}
