#![allow(dead_code)]

use crysgen_core::crystal::niggli_reduce;
use crysgen_core::rng::{self, SimRng};
use crysgen_core::synthetic::{random_crystal, SyntheticSpec};
use crysgen_core::{Crystal, Lattice, LatticeParams, Vec3};
use nalgebra::{Quaternion, Rotation3, UnitQuaternion};
use proptest::prelude::*;
use rand::Rng;

pub fn rng(seed: u64) -> SimRng {
    rng::seeded(seed)
}

pub fn random_params(r: &mut SimRng) -> LatticeParams {
    loop {
        let mut len = || r.random_range(2.0..8.0);
        let (a, b, c) = (len(), len(), len());
        let mut ang = || r.random_range(60.0..120.0);
        if let Ok(p) = LatticeParams::new(a, b, c, ang(), ang(), ang()) {
            return p;
        }
    }
}

/// Niggli-reduced lattice whose angles stay within [60°, 120°].
pub fn random_reduced_lattice(r: &mut SimRng) -> Lattice {
    loop {
        let l = niggli_reduce(&Lattice::from_params(&random_params(r)).unwrap()).unwrap();
        let p = l.params();
        if p.angles().iter().all(|a| (60.0..=120.0).contains(a)) {
            return l;
        }
    }
}

pub fn random_rotation(r: &mut SimRng) -> Rotation3<f64> {
    loop {
        let q = Quaternion::new(
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
            r.random_range(-1.0..1.0),
        );
        if q.norm() > 0.1 {
            return UnitQuaternion::from_quaternion(q).to_rotation_matrix();
        }
    }
}

pub fn crystal_with_atoms(r: &mut SimRng, min: usize, max: usize) -> Crystal {
    let spec = SyntheticSpec {
        min_atoms: min,
        max_atoms: max,
        ..Default::default()
    };
    random_crystal(&spec, r).unwrap()
}

pub fn random_frac(r: &mut SimRng) -> Vec3 {
    Vec3::new(r.random(), r.random(), r.random())
}

pub fn random_permutation(r: &mut SimRng, n: usize) -> Vec<usize> {
    let mut p: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        p.swap(i, r.random_range(0..=i));
    }
    p
}

/// Per-atom integer image shift: same structure, different stored images.
pub fn image_shifted(c: &Crystal, r: &mut SimRng) -> Crystal {
    let frac: Vec<Vec3> = c
        .frac_coords()
        .iter()
        .map(|f| {
            f + Vec3::new(
                r.random_range(-3..=3) as f64,
                r.random_range(-3..=3) as f64,
                r.random_range(-3..=3) as f64,
            )
        })
        .collect();
    c.with_frac_coords(frac).unwrap()
}

pub fn arb_seed() -> impl Strategy<Value = u64> {
    any::<u64>()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
