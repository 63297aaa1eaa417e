//! Noise model: geometric noise schedules, coordinate and type corruption of
//! clean structures, minimum-image score targets, and a Monte-Carlo estimate
//! of the denoising loss for any score field.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crystal::{Composition, Crystal, Vec3};
use crate::error::{Error, Result};
use crate::rng::{self, SimRng};
use crate::sampler::{NoiseLevel, ScoreField};

/// Geometric sequence `σ_j = max·(min/max)^((j−1)/(L−1))`, `j = 1..L`.
pub fn geometric_levels(sigma_max: f64, sigma_min: f64, levels: usize) -> Result<Vec<f64>> {
    if !(sigma_min.is_finite() && sigma_max.is_finite()) || sigma_min <= 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "sigma_min must be positive and finite, got {sigma_min}"
        )));
    }
    if sigma_max <= sigma_min {
        return Err(Error::InvalidSchedule(format!(
            "sigma_max ({sigma_max}) must exceed sigma_min ({sigma_min})"
        )));
    }
    if levels < 2 {
        return Err(Error::InvalidSchedule(format!(
            "need at least 2 levels, got {levels}"
        )));
    }
    let ratio = sigma_min / sigma_max;
    let last = (levels - 1) as f64;
    let mut out: Vec<f64> = (0..levels)
        .map(|j| sigma_max * ratio.powf(j as f64 / last))
        .collect();
    out[0] = sigma_max;
    out[levels - 1] = sigma_min;
    Ok(out)
}

/// Endpoints of one geometric channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    pub sigma_max: f64,
    pub sigma_min: f64,
}

/// Plain-text (TOML) form of a schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScheduleSpec {
    pub levels: usize,
    pub coords: ChannelSpec,
    pub types: ChannelSpec,
}

impl Default for ScheduleSpec {
    /// 50 levels; coordinates 10 → 0.01 Å, types 5 → 0.01.
    fn default() -> Self {
        ScheduleSpec {
            levels: 50,
            coords: ChannelSpec {
                sigma_max: 10.0,
                sigma_min: 0.01,
            },
            types: ChannelSpec {
                sigma_max: 5.0,
                sigma_min: 0.01,
            },
        }
    }
}

/// Paired coordinate (Å) and type noise levels, largest first.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseSchedule {
    sigma_x: Vec<f64>,
    sigma_a: Vec<f64>,
    spec: ScheduleSpec,
}

impl NoiseSchedule {
    pub fn new(spec: ScheduleSpec) -> Result<Self> {
        Ok(NoiseSchedule {
            sigma_x: geometric_levels(spec.coords.sigma_max, spec.coords.sigma_min, spec.levels)?,
            sigma_a: geometric_levels(spec.types.sigma_max, spec.types.sigma_min, spec.levels)?,
            spec,
        })
    }

    /// Coordinate levels only; type levels copy the default type channel.
    pub fn coords_only(sigma_max: f64, sigma_min: f64, levels: usize) -> Result<Self> {
        Self::new(ScheduleSpec {
            levels,
            coords: ChannelSpec { sigma_max, sigma_min },
            ..ScheduleSpec::default()
        })
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let spec: ScheduleSpec = toml::from_str(text).map_err(|e| Error::InvalidSchedule(e.to_string()))?;
        Self::new(spec)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(&self.spec).expect("schedule spec serializes")
    }

    pub fn spec(&self) -> &ScheduleSpec {
        &self.spec
    }

    pub fn len(&self) -> usize {
        self.sigma_x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma_x.is_empty()
    }

    pub fn sigma_x(&self) -> &[f64] {
        &self.sigma_x
    }

    pub fn sigma_a(&self) -> &[f64] {
        &self.sigma_a
    }

    pub fn sigma_x_min(&self) -> f64 {
        self.sigma_x[self.len() - 1]
    }

    pub fn level(&self, index: usize) -> NoiseLevel {
        NoiseLevel {
            index,
            sigma_a: self.sigma_a[index],
            sigma_x: self.sigma_x[index],
        }
    }

    pub fn levels(&self) -> impl Iterator<Item = NoiseLevel> + '_ {
        (0..self.len()).map(|j| self.level(j))
    }
}

impl Default for NoiseSchedule {
    fn default() -> Self {
        NoiseSchedule::new(ScheduleSpec::default()).expect("default schedule is valid")
    }
}

/// Row-stochastic `N × |species|` matrix of per-atom type probabilities.
#[derive(Debug, Clone, PartialEq)]
pub struct TypeDistribution {
    species: Vec<u8>,
    probs: Vec<Vec<f64>>,
}

impl TypeDistribution {
    pub fn new(species: Vec<u8>, probs: Vec<Vec<f64>>) -> Result<Self> {
        for (i, row) in probs.iter().enumerate() {
            if row.len() != species.len() {
                return Err(Error::LengthMismatch {
                    what: "type distribution row vs species",
                    left: row.len(),
                    right: species.len(),
                });
            }
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(p.is_finite() && *p >= 0.0)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidComposition(format!(
                    "row {i} of type distribution is not a probability vector"
                )));
            }
        }
        Ok(TypeDistribution { species, probs })
    }

    /// One-hot rows for the given types.
    pub fn one_hot(types: &[u8]) -> Self {
        let mut species: Vec<u8> = types.to_vec();
        species.sort_unstable();
        species.dedup();
        let probs = types
            .iter()
            .map(|t| species.iter().map(|s| if s == t { 1.0 } else { 0.0 }).collect())
            .collect();
        TypeDistribution { species, probs }
    }

    /// Uniform rows over `species`.
    pub fn uniform_rows(species: Vec<u8>, n: usize) -> Self {
        let w = 1.0 / species.len() as f64;
        let probs = vec![vec![w; species.len()]; n];
        TypeDistribution { species, probs }
    }

    pub fn species(&self) -> &[u8] {
        &self.species
    }

    pub fn rows(&self) -> &[Vec<f64>] {
        &self.probs
    }

    pub fn num_atoms(&self) -> usize {
        self.probs.len()
    }

    pub fn prob(&self, atom: usize, z: u8) -> f64 {
        self.species
            .iter()
            .position(|&s| s == z)
            .map_or(0.0, |col| self.probs[atom][col])
    }

    /// Most probable type for `atom`; ties resolve to `current` when it is
    /// among the maxima, otherwise to the smallest atomic number.
    pub fn argmax(&self, atom: usize, current: u8) -> u8 {
        let row = &self.probs[atom];
        let best = row.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if self.prob(atom, current) == best {
            return current;
        }
        let col = row.iter().position(|&p| p == best).unwrap_or(0);
        self.species[col]
    }

    /// Mean over atoms of `−ln p(true type)`.
    pub fn cross_entropy(&self, true_types: &[u8]) -> f64 {
        let total: f64 = true_types
            .iter()
            .enumerate()
            .map(|(i, &z)| -self.prob(i, z).max(f64::MIN_POSITIVE).ln())
            .sum();
        total / true_types.len() as f64
    }
}

/// A corrupted copy of a clean structure.
#[derive(Debug, Clone)]
pub struct NoisyCrystal<'a> {
    pub reference: &'a Crystal,
    pub crystal: Crystal,
    /// Cartesian displacement actually drawn for each atom (before wrapping).
    pub noise: Vec<Vec3>,
    pub level: Option<usize>,
}

impl NoisyCrystal<'_> {
    /// Whether atom `i`'s minimum-image displacement back to the reference
    /// differs from the negated drawn noise, i.e. the noise carried it past
    /// half a cell.
    pub fn crossed_boundary(&self, i: usize) -> bool {
        let d = self
            .reference
            .lattice()
            .min_image(&self.crystal.frac_coords()[i], &self.reference.frac_coords()[i]);
        let scale = self.noise[i].norm().max(1.0);
        (d + self.noise[i]).norm() > 1e-9 * scale
    }

    pub fn boundary_crossings(&self) -> usize {
        (0..self.crystal.num_atoms())
            .filter(|&i| self.crossed_boundary(i))
            .count()
    }
}

/// Isotropic Gaussian Cartesian vector with per-component std `sigma`, drawn
/// in the frame attached to `lattice`.
pub(crate) fn gaussian_in_frame(lattice: &crate::Lattice, sigma: f64, rng: &mut SimRng) -> Vec3 {
    let z = Vec3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
    lattice.from_frame(&z) * sigma
}

/// `X̃ ~ N(X, σ²I)` in Cartesian space, wrapped back into the cell.
pub fn perturb_coords<'a>(crystal: &'a Crystal, sigma_x: f64, rng: &mut SimRng) -> NoisyCrystal<'a> {
    let lattice = crystal.lattice();
    let n = crystal.num_atoms();
    if sigma_x == 0.0 {
        return NoisyCrystal {
            reference: crystal,
            crystal: crystal.clone(),
            noise: vec![Vec3::zeros(); n],
            level: None,
        };
    }
    let noise: Vec<Vec3> = (0..n).map(|_| gaussian_in_frame(lattice, sigma_x, rng)).collect();
    let frac = crystal
        .frac_coords()
        .iter()
        .zip(&noise)
        .map(|(f, d)| f + lattice.to_frac(d))
        .collect();
    NoisyCrystal {
        reference: crystal,
        crystal: crystal.with_frac_coords(frac).expect("finite perturbation"),
        noise,
        level: None,
    }
}

fn sample_composition(composition: &Composition, rng: &mut SimRng) -> u8 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    let mut last = 0;
    for (&z, &w) in composition.fractions() {
        acc += w;
        last = z;
        if u < acc {
            return z;
        }
    }
    last
}

/// Draw each atom's type from `(1/(1+σ))·onehot(true) + (σ/(1+σ))·c`.
pub fn perturb_types(
    true_types: &[u8],
    composition: &Composition,
    sigma_a: f64,
    rng: &mut SimRng,
) -> Result<Vec<u8>> {
    if composition.is_empty() {
        return Err(Error::InvalidComposition("empty support".into()));
    }
    if sigma_a.is_nan() || sigma_a < 0.0 {
        return Err(Error::InvalidSchedule(format!(
            "sigma_a = {sigma_a} must be >= 0"
        )));
    }
    let keep = 1.0 / (1.0 + sigma_a);
    Ok(true_types
        .iter()
        .map(|&z| {
            let u: f64 = rng.random();
            if u < keep {
                z
            } else {
                sample_composition(composition, rng)
            }
        })
        .collect())
}

/// Draw `i.i.d.` types from a composition.
pub fn sample_types(composition: &Composition, n: usize, rng: &mut SimRng) -> Vec<u8> {
    (0..n).map(|_| sample_composition(composition, rng)).collect()
}

/// Corrupt both coordinates and types at one schedule level, using the
/// structure's own composition for the type mixture.
pub fn perturb<'a>(
    crystal: &'a Crystal,
    schedule: &NoiseSchedule,
    level: usize,
    rng: &mut SimRng,
) -> NoisyCrystal<'a> {
    let lvl = schedule.level(level);
    let mut noisy = perturb_coords(crystal, lvl.sigma_x, rng);
    let types = perturb_types(crystal.types(), &crystal.composition(), lvl.sigma_a, rng)
        .expect("crystal composition is non-empty");
    noisy.crystal = noisy.crystal.with_types(types).expect("valid types");
    noisy.level = Some(level);
    noisy
}

/// Denoising target `d_min(x̃_i → x_i) / σ_X` for every atom.
pub fn score_target(reference: &Crystal, noisy: &Crystal, sigma_x: f64) -> Result<Vec<Vec3>> {
    if reference.num_atoms() != noisy.num_atoms() {
        return Err(Error::LengthMismatch {
            what: "reference vs noisy atoms",
            left: reference.num_atoms(),
            right: noisy.num_atoms(),
        });
    }
    let lattice = noisy.lattice();
    Ok(noisy
        .frac_coords()
        .iter()
        .zip(reference.frac_coords())
        .map(|(xt, x)| lattice.min_image(xt, x) / sigma_x)
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossOptions {
    pub lambda_a: f64,
    pub samples_per_level: usize,
    pub seed: u64,
}

impl Default for LossOptions {
    fn default() -> Self {
        LossOptions {
            lambda_a: 1.0,
            samples_per_level: 32,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LevelLoss {
    pub index: usize,
    pub sigma_x: f64,
    pub sigma_a: f64,
    /// Mean of `‖s_X − d_min/σ_X‖²` summed over atoms.
    pub coord_mean: f64,
    /// Standard error of `coord_mean`.
    pub coord_sem: f64,
    /// Mean per-atom cross entropy of the predicted types.
    pub type_mean: f64,
    pub samples: usize,
    /// Atoms (over all samples) whose noise crossed half a cell.
    pub boundary_crossings: usize,
}

impl LevelLoss {
    pub fn weighted(&self, lambda_a: f64) -> f64 {
        self.coord_mean + lambda_a / self.sigma_a * self.type_mean
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossReport {
    pub total: f64,
    pub lambda_a: f64,
    pub levels: Vec<LevelLoss>,
}

impl LossReport {
    /// `(1/2L)·Σ_j` restricted to the selected levels, still normalized by
    /// the full schedule length.
    pub fn total_over<F: Fn(&LevelLoss) -> bool>(&self, keep: F) -> f64 {
        let sum: f64 = self
            .levels
            .iter()
            .filter(|l| keep(l))
            .map(|l| l.weighted(self.lambda_a))
            .sum();
        sum / (2.0 * self.levels.len() as f64)
    }
}

fn level_loss(
    field: &dyn ScoreField,
    dataset: &[Crystal],
    schedule: &NoiseSchedule,
    j: usize,
    opts: &LossOptions,
) -> Result<LevelLoss> {
    let mut rng = rng::stream(opts.seed, j as u64);
    let level = schedule.level(j);
    let mut coord = Vec::with_capacity(opts.samples_per_level);
    let mut type_sum = 0.0;
    let mut crossings = 0;
    for _ in 0..opts.samples_per_level {
        let idx = rng.random_range(0..dataset.len());
        let clean = &dataset[idx];
        let noisy = perturb(clean, schedule, j, &mut rng);
        crossings += noisy.boundary_crossings();
        let target = score_target(clean, &noisy.crystal, level.sigma_x)?;
        let out = field.evaluate(&noisy.crystal, &level)?;
        if out.scores.len() != target.len() {
            return Err(Error::LengthMismatch {
                what: "field scores vs atoms",
                left: out.scores.len(),
                right: target.len(),
            });
        }
        let c: f64 = out
            .scores
            .iter()
            .zip(&target)
            .map(|(s, t)| (s - t).norm_squared())
            .sum();
        coord.push(c);
        type_sum += out.types.cross_entropy(clean.types());
    }
    let m = coord.len() as f64;
    let mean = coord.iter().sum::<f64>() / m;
    let var = if coord.len() > 1 {
        coord.iter().map(|c| (c - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(LevelLoss {
        index: j,
        sigma_x: level.sigma_x,
        sigma_a: level.sigma_a,
        coord_mean: mean,
        coord_sem: (var / m).sqrt(),
        type_mean: type_sum / m,
        samples: coord.len(),
        boundary_crossings: crossings,
    })
}

/// Monte-Carlo estimate of
/// `(1/2L) Σ_j E[‖s_X − d_min/σ_X,j‖² + (λ_a/σ_A,j)·CE(p_A, A)]`,
/// pairing coordinate and type levels by index. Deterministic given the seed.
pub fn denoising_loss(
    field: &dyn ScoreField,
    dataset: &[Crystal],
    schedule: &NoiseSchedule,
    opts: &LossOptions,
) -> Result<LossReport> {
    if dataset.is_empty() {
        return Err(Error::EmptyInput("dataset"));
    }
    if opts.lambda_a.is_nan() || opts.lambda_a < 0.0 {
        return Err(Error::InvalidConfig(format!(
            "lambda_a = {} must be >= 0",
            opts.lambda_a
        )));
    }
    if opts.samples_per_level == 0 {
        return Err(Error::InvalidConfig("samples_per_level must be >= 1".into()));
    }
    let levels = (0..schedule.len())
        .into_par_iter()
        .map(|j| level_loss(field, dataset, schedule, j, opts))
        .collect::<Result<Vec<_>>>()?;
    let mut report = LossReport {
        total: 0.0,
        lambda_a: opts.lambda_a,
        levels,
    };
    report.total = report.total_over(|_| true);
    Ok(report)
}
