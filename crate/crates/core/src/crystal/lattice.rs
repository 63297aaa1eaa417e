use nalgebra::{Matrix3, Rotation3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Volumes below this fraction of `|l1||l2||l3|` are treated as degenerate.
const MIN_RELATIVE_VOLUME: f64 = 1e-8;

/// Lengths (Å) and inter-axial angles (degrees) of a cell.
///
/// `alpha` is the angle between `l2` and `l3`, `beta` between `l1` and `l3`,
/// `gamma` between `l1` and `l2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatticeParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl LatticeParams {
    pub fn new(a: f64, b: f64, c: f64, alpha: f64, beta: f64, gamma: f64) -> Result<Self> {
        let p = LatticeParams {
            a,
            b,
            c,
            alpha,
            beta,
            gamma,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn lengths(&self) -> [f64; 3] {
        [self.a, self.b, self.c]
    }

    pub fn angles(&self) -> [f64; 3] {
        [self.alpha, self.beta, self.gamma]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("a", self.a), ("b", self.b), ("c", self.c)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidLatticeParams(format!("{name} = {v} must be > 0")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta), ("gamma", self.gamma)] {
            if !(v.is_finite() && v > 0.0 && v < 180.0) {
                return Err(Error::InvalidLatticeParams(format!(
                    "{name} = {v} must lie in (0, 180)"
                )));
            }
        }
        let (ca, cb, cg) = self.cosines();
        let det = 1.0 - ca * ca - cb * cb - cg * cg + 2.0 * ca * cb * cg;
        if det <= 1e-12 {
            return Err(Error::InvalidLatticeParams(format!(
                "angles ({}, {}, {}) do not form a valid cell",
                self.alpha, self.beta, self.gamma
            )));
        }
        Ok(())
    }

    fn cosines(&self) -> (f64, f64, f64) {
        (
            self.alpha.to_radians().cos(),
            self.beta.to_radians().cos(),
            self.gamma.to_radians().cos(),
        )
    }

    /// Lengths divided by `∛n`, putting cells of different sizes on one scale.
    pub fn normalized_by_atoms(&self, n_atoms: usize) -> LatticeParams {
        let s = (n_atoms as f64).cbrt();
        LatticeParams {
            a: self.a / s,
            b: self.b / s,
            c: self.c / s,
            ..*self
        }
    }
}

/// Periodic lattice stored as a row-vector matrix: row `i` is lattice vector
/// `l_{i+1}` in Å, and Cartesian coordinates are `frac · L`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lattice {
    rows: Matrix3<f64>,
    inverse: Matrix3<f64>,
}

impl Lattice {
    pub fn new(rows: [[f64; 3]; 3]) -> Result<Self> {
        Self::from_matrix(Matrix3::from_fn(|i, j| rows[i][j]))
    }

    pub fn from_matrix(rows: Matrix3<f64>) -> Result<Self> {
        if rows.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidLatticeParams("non-finite lattice entry".into()));
        }
        let det = rows.determinant();
        let scale: f64 = (0..3).map(|i| rows.row(i).norm()).product();
        if det.is_nan() || det <= MIN_RELATIVE_VOLUME * scale || scale == 0.0 {
            return Err(Error::DegenerateLattice(det));
        }
        let inverse = rows.try_inverse().ok_or(Error::DegenerateLattice(det))?;
        Ok(Lattice { rows, inverse })
    }

    pub fn cubic(a: f64) -> Result<Self> {
        Self::new([[a, 0.0, 0.0], [0.0, a, 0.0], [0.0, 0.0, a]])
    }

    /// Build the canonical orientation: `l1` along x, `l2` in the xy-plane.
    pub fn from_params(p: &LatticeParams) -> Result<Self> {
        p.validate()?;
        let (ca, cb, cg) = p.cosines();
        let sg = p.gamma.to_radians().sin();
        let cy = (ca - cb * cg) / sg;
        let cz2 = 1.0 - cb * cb - cy * cy;
        if cz2 <= 0.0 {
            return Err(Error::InvalidLatticeParams(
                "angles do not form a valid cell".into(),
            ));
        }
        Self::new([
            [p.a, 0.0, 0.0],
            [p.b * cg, p.b * sg, 0.0],
            [p.c * cb, p.c * cy, p.c * cz2.sqrt()],
        ])
    }

    pub fn matrix(&self) -> &Matrix3<f64> {
        &self.rows
    }

    pub fn inverse(&self) -> &Matrix3<f64> {
        &self.inverse
    }

    pub fn vector(&self, i: usize) -> Vector3<f64> {
        self.rows.row(i).transpose()
    }

    pub fn to_rows(&self) -> [[f64; 3]; 3] {
        let m = &self.rows;
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    }

    pub fn volume(&self) -> f64 {
        self.rows.determinant()
    }

    pub fn lengths(&self) -> [f64; 3] {
        [0, 1, 2].map(|i| self.rows.row(i).norm())
    }

    pub fn params(&self) -> LatticeParams {
        let [a, b, c] = self.lengths();
        let v = [0, 1, 2].map(|i| self.vector(i));
        let angle = |x: &Vector3<f64>, y: &Vector3<f64>, lx: f64, ly: f64| {
            (x.dot(y) / (lx * ly)).clamp(-1.0, 1.0).acos().to_degrees()
        };
        LatticeParams {
            a,
            b,
            c,
            alpha: angle(&v[1], &v[2], b, c),
            beta: angle(&v[0], &v[2], a, c),
            gamma: angle(&v[0], &v[1], a, b),
        }
    }

    /// Distances between opposite faces of the cell, one per lattice direction.
    pub fn plane_spacings(&self) -> [f64; 3] {
        let v = [0, 1, 2].map(|i| self.vector(i));
        let vol = self.volume();
        [
            vol / v[1].cross(&v[2]).norm(),
            vol / v[2].cross(&v[0]).norm(),
            vol / v[0].cross(&v[1]).norm(),
        ]
    }

    pub fn to_cart(&self, frac: &Vector3<f64>) -> Vector3<f64> {
        self.rows.tr_mul(frac)
    }

    pub fn to_frac(&self, cart: &Vector3<f64>) -> Vector3<f64> {
        self.inverse.tr_mul(cart)
    }

    /// Cartesian translation `k1 l1 + k2 l2 + k3 l3`.
    pub fn image_shift(&self, k: [i32; 3]) -> Vector3<f64> {
        self.to_cart(&Vector3::new(k[0] as f64, k[1] as f64, k[2] as f64))
    }

    /// Rigidly rotate the cell: every lattice vector `l` becomes `R l`.
    pub fn rotated(&self, rotation: &Rotation3<f64>) -> Result<Self> {
        Self::from_matrix(self.rows * rotation.matrix().transpose())
    }

    /// Orthonormal frame attached to the cell: `e1` along `l1`, `e2` in the
    /// `l1`–`l2` plane, `e3 = e1 × e2`. Rotating the cell rotates the frame,
    /// so vectors drawn in this frame transform equivariantly.
    pub fn frame(&self) -> [Vector3<f64>; 3] {
        let l1 = self.vector(0);
        let l2 = self.vector(1);
        let e1 = l1.normalize();
        let e2 = (l2 - e1 * l2.dot(&e1)).normalize();
        [e1, e2, e1.cross(&e2)]
    }

    /// Map components expressed in [`Lattice::frame`] to Cartesian.
    pub fn from_frame(&self, components: &Vector3<f64>) -> Vector3<f64> {
        let [e1, e2, e3] = self.frame();
        e1 * components[0] + e2 * components[1] + e3 * components[2]
    }

    pub fn scaled(&self, factor: f64) -> Result<Self> {
        Self::from_matrix(self.rows * factor)
    }

    /// Shortest Cartesian vector from `from` to any periodic image of `to`.
    ///
    /// The fractional difference is wrapped into `[-0.5, 0.5)^3` and the 27
    /// neighbouring images are searched. This is exact for Niggli-reduced
    /// cells; strongly skewed cells must be reduced first.
    pub fn min_image(&self, from: &Vector3<f64>, to: &Vector3<f64>) -> Vector3<f64> {
        self.min_image_with_shift(from, to).0
    }

    /// Like [`Lattice::min_image`], also returning the integer image `k` such
    /// that the result equals `(to + k - from) · L`.
    pub fn min_image_with_shift(&self, from: &Vector3<f64>, to: &Vector3<f64>) -> (Vector3<f64>, [i32; 3]) {
        let raw = to - from;
        let base = raw.map(|d| -(d + 0.5).floor());
        let centered = raw + base;
        let cart = self.to_cart(&centered);
        let mut best = cart;
        let mut best_norm = cart.norm_squared();
        let mut best_k = [0i32; 3];
        for k1 in -1..=1 {
            for k2 in -1..=1 {
                for k3 in -1..=1 {
                    if k1 == 0 && k2 == 0 && k3 == 0 {
                        continue;
                    }
                    let v = cart + self.image_shift([k1, k2, k3]);
                    let n = v.norm_squared();
                    if n < best_norm {
                        best = v;
                        best_norm = n;
                        best_k = [k1, k2, k3];
                    }
                }
            }
        }
        let shift = [
            best_k[0] + base[0] as i32,
            best_k[1] + base[1] as i32,
            best_k[2] + base[2] as i32,
        ];
        (best, shift)
    }
}

/// Wrap one fractional coordinate into `[0, 1)`.
pub fn wrap_unit(x: f64) -> f64 {
    let w = x - x.floor();
    // x slightly below an integer can round up to exactly 1.0
    if w >= 1.0 {
        0.0
    } else {
        w
    }
}

/// Wrap fractional coordinates into the unit cell `[0, 1)^3`.
pub fn wrap_to_cell(frac: &Vector3<f64>) -> Result<Vector3<f64>> {
    if let Some(axis) = frac.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFiniteCoordinate { atom: 0, axis });
    }
    Ok(frac.map(wrap_unit))
}
