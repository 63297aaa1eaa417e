//! Periodic structures: lattice, atoms in fractional coordinates, composition.

mod lattice;
pub mod niggli;

use std::collections::BTreeMap;

use nalgebra::{Rotation3, Vector3};

pub use lattice::{wrap_to_cell, wrap_unit, Lattice, LatticeParams};
pub use niggli::{niggli_reduce, niggli_reduce_with_transform, IntMatrix};

use crate::error::{Error, Result};

pub type Vec3 = Vector3<f64>;

/// Element fractions; the composition vector `c` of a structure.
#[derive(Debug, Clone, PartialEq)]
pub struct Composition {
    fractions: BTreeMap<u8, f64>,
}

impl Composition {
    /// Normalize non-negative weights (counts, fractions) into a composition.
    /// Zero weights are dropped.
    pub fn from_weights<I>(weights: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u8, f64)>,
    {
        let mut acc: BTreeMap<u8, f64> = BTreeMap::new();
        for (z, w) in weights {
            if !(w.is_finite() && w >= 0.0) {
                return Err(Error::InvalidComposition(format!("weight {w} for Z={z}")));
            }
            if z == 0 || z > 118 {
                return Err(Error::InvalidComposition(format!("atomic number {z}")));
            }
            if w > 0.0 {
                *acc.entry(z).or_default() += w;
            }
        }
        let total: f64 = acc.values().sum();
        if acc.is_empty() || total <= 0.0 {
            return Err(Error::InvalidComposition("empty support".into()));
        }
        for w in acc.values_mut() {
            *w /= total;
        }
        Ok(Composition { fractions: acc })
    }

    pub fn from_types(types: &[u8]) -> Result<Self> {
        Self::from_weights(types.iter().map(|&z| (z, 1.0)))
    }

    pub fn fractions(&self) -> &BTreeMap<u8, f64> {
        &self.fractions
    }

    pub fn fraction(&self, z: u8) -> f64 {
        self.fractions.get(&z).copied().unwrap_or(0.0)
    }

    pub fn species(&self) -> Vec<u8> {
        self.fractions.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.fractions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fractions.is_empty()
    }
}

/// One periodic structure `(A, X, L)` with `X` held fractionally.
#[derive(Debug, Clone, PartialEq)]
pub struct Crystal {
    types: Vec<u8>,
    frac: Vec<Vec3>,
    lattice: Lattice,
}

impl Crystal {
    /// Build a crystal, wrapping every coordinate into `[0, 1)`.
    pub fn new(types: Vec<u8>, frac: Vec<Vec3>, lattice: Lattice) -> Result<Self> {
        if types.is_empty() {
            return Err(Error::EmptyCrystal);
        }
        if types.len() != frac.len() {
            return Err(Error::LengthMismatch {
                what: "types vs coordinates",
                left: types.len(),
                right: frac.len(),
            });
        }
        if let Some(&z) = types.iter().find(|&&z| z == 0 || z > 118) {
            return Err(Error::UnknownElement(format!("Z={z}")));
        }
        let mut wrapped = Vec::with_capacity(frac.len());
        for (atom, f) in frac.iter().enumerate() {
            if let Some(axis) = f.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFiniteCoordinate { atom, axis });
            }
            wrapped.push(f.map(wrap_unit));
        }
        Ok(Crystal {
            types,
            frac: wrapped,
            lattice,
        })
    }

    /// Build from Cartesian positions (Å).
    pub fn from_cartesian(types: Vec<u8>, cart: &[Vec3], lattice: Lattice) -> Result<Self> {
        let frac = cart.iter().map(|c| lattice.to_frac(c)).collect();
        Self::new(types, frac, lattice)
    }

    pub fn types(&self) -> &[u8] {
        &self.types
    }

    pub fn frac_coords(&self) -> &[Vec3] {
        &self.frac
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn num_atoms(&self) -> usize {
        self.types.len()
    }

    pub fn volume(&self) -> f64 {
        self.lattice.volume()
    }

    pub fn cart_coords(&self) -> Vec<Vec3> {
        self.frac.iter().map(|f| self.lattice.to_cart(f)).collect()
    }

    pub fn composition(&self) -> Composition {
        Composition::from_types(&self.types).expect("crystal has at least one valid atom")
    }

    /// Integer atom count per element.
    pub fn element_counts(&self) -> BTreeMap<u8, usize> {
        let mut counts = BTreeMap::new();
        for &z in &self.types {
            *counts.entry(z).or_default() += 1;
        }
        counts
    }

    /// `∛(V/N)`, the length scale used to normalize site displacements.
    pub fn normalized_length_scale(&self) -> f64 {
        (self.volume() / self.num_atoms() as f64).cbrt()
    }

    /// Shortest displacement from atom `i` to any periodic image of atom `j`.
    pub fn min_image(&self, i: usize, j: usize) -> Vec3 {
        self.lattice.min_image(&self.frac[i], &self.frac[j])
    }

    pub fn with_types(&self, types: Vec<u8>) -> Result<Self> {
        Self::new(types, self.frac.clone(), self.lattice)
    }

    pub fn with_frac_coords(&self, frac: Vec<Vec3>) -> Result<Self> {
        Self::new(self.types.clone(), frac, self.lattice)
    }

    /// Same fractional coordinates in a different cell.
    pub fn with_lattice(&self, lattice: Lattice) -> Self {
        Crystal {
            lattice,
            ..self.clone()
        }
    }

    /// Rigid fractional translation, wrapped back into the cell.
    pub fn translated(&self, shift: &Vec3) -> Self {
        let frac = self.frac.iter().map(|f| (f + shift).map(wrap_unit)).collect();
        Crystal { frac, ..self.clone() }
    }

    /// Rotate the cell while keeping fractional coordinates, which rotates
    /// every Cartesian position rigidly.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Result<Self> {
        Ok(self.with_lattice(self.lattice.rotated(rotation)?))
    }

    /// Reorder atoms: atom `i` of the result is atom `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Self {
        Crystal {
            types: order.iter().map(|&i| self.types[i]).collect(),
            frac: order.iter().map(|&i| self.frac[i]).collect(),
            lattice: self.lattice,
        }
    }

    /// Express the same structure in its Niggli-reduced cell.
    pub fn niggli_reduced(&self) -> Result<Self> {
        let (reduced, t) = niggli_reduce_with_transform(&self.lattice)?;
        let inv = niggli::int_inverse(&t).expect("Niggli transform is unimodular");
        // cart = f·L = f'·T·L  =>  f' = f·T⁻¹
        let frac = self
            .frac
            .iter()
            .map(|f| {
                Vec3::from_fn(|j, _| (0..3).map(|k| f[k] * inv[k][j] as f64).sum::<f64>()).map(wrap_unit)
            })
            .collect();
        Ok(Crystal {
            types: self.types.clone(),
            frac,
            lattice: reduced,
        })
    }
}
