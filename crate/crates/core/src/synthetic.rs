//! Random test crystals: near-reduced triclinic cells holding well-separated
//! atoms of a few common species.

use rand::seq::index;
use rand::Rng;

use crate::crystal::{niggli_reduce, Crystal, Lattice, LatticeParams, Vec3};
use crate::error::{Error, Result};
use crate::io::CrystalRecord;
use crate::rng::{self, SimRng};

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticSpec {
    pub min_atoms: usize,
    pub max_atoms: usize,
    /// Range of cell volume per atom, Å³.
    pub volume_per_atom: (f64, f64),
    /// Range of cell angles, degrees.
    pub angles: (f64, f64),
    /// Range of `b/a` and `c/a`.
    pub aspect: (f64, f64),
    pub species: Vec<u8>,
    pub max_species: usize,
    /// Minimum interatomic distance, Å.
    pub min_distance: f64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            min_atoms: 5,
            max_atoms: 20,
            volume_per_atom: (12.0, 20.0),
            angles: (70.0, 110.0),
            aspect: (0.8, 1.25),
            // Li Na Mg Al Si O S Cl K Ca Ti Fe
            species: vec![3, 11, 12, 13, 14, 8, 16, 17, 19, 20, 22, 26],
            max_species: 3,
            min_distance: 1.2,
        }
    }
}

const MAX_ATTEMPTS: usize = 1000;

fn random_lattice(spec: &SyntheticSpec, n: usize, rng: &mut SimRng) -> Result<Lattice> {
    for _ in 0..MAX_ATTEMPTS {
        let mut angle = || rng.random_range(spec.angles.0..=spec.angles.1);
        let (alpha, beta, gamma) = (angle(), angle(), angle());
        let rb = rng.random_range(spec.aspect.0..=spec.aspect.1);
        let rc = rng.random_range(spec.aspect.0..=spec.aspect.1);
        let Ok(unit) = LatticeParams::new(1.0, rb, rc, alpha, beta, gamma) else {
            continue;
        };
        let l = Lattice::from_params(&unit)?;
        let target = n as f64 * rng.random_range(spec.volume_per_atom.0..=spec.volume_per_atom.1);
        return niggli_reduce(&l.scaled((target / l.volume()).cbrt())?);
    }
    Err(Error::InvalidConfig(
        "could not draw a valid random lattice".into(),
    ))
}

/// One random crystal; atoms are placed by rejection so every pair is at
/// least `min_distance` apart.
pub fn random_crystal(spec: &SyntheticSpec, rng: &mut SimRng) -> Result<Crystal> {
    if spec.min_atoms == 0 || spec.min_atoms > spec.max_atoms || spec.species.is_empty() {
        return Err(Error::InvalidConfig("invalid synthetic crystal spec".into()));
    }
    'retry: for _ in 0..MAX_ATTEMPTS {
        let n = rng.random_range(spec.min_atoms..=spec.max_atoms);
        let lattice = random_lattice(spec, n, rng)?;
        let k = rng.random_range(1..=spec.max_species.min(spec.species.len()).min(n));
        let chosen: Vec<u8> = index::sample(rng, spec.species.len(), k)
            .into_iter()
            .map(|i| spec.species[i])
            .collect();
        // every chosen species appears at least once
        let mut types: Vec<u8> = chosen.clone();
        types.extend((k..n).map(|_| chosen[rng.random_range(0..k)]));
        let mut frac: Vec<Vec3> = Vec::with_capacity(n);
        for _ in 0..n {
            let mut placed = false;
            for _ in 0..MAX_ATTEMPTS {
                let p = Vec3::new(rng.random(), rng.random(), rng.random());
                if frac
                    .iter()
                    .all(|q| lattice.min_image(q, &p).norm() >= spec.min_distance)
                {
                    frac.push(p);
                    placed = true;
                    break;
                }
            }
            if !placed {
                continue 'retry;
            }
        }
        return Crystal::new(types, frac, lattice);
    }
    Err(Error::InvalidConfig(
        "could not place atoms at the requested separation".into(),
    ))
}

/// `count` records with ids `synth-00000`, …; record `i` depends only on
/// `(seed, i)`.
pub fn synthetic_dataset(spec: &SyntheticSpec, count: usize, seed: u64) -> Result<Vec<CrystalRecord>> {
    (0..count)
        .map(|i| {
            let mut r = rng::stream(rng::child_seed(seed, i as u64), 0);
            Ok(CrystalRecord::new(
                format!("synth-{i:05}"),
                random_crystal(spec, &mut r)?,
            ))
        })
        .collect()
}
