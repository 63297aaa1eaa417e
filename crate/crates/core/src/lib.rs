//! Periodic crystal generation by annealed Langevin dynamics over analytic
//! score fields, together with the noise model and evaluation metrics used to
//! score generated structures.

pub mod crystal;
pub mod elements;
pub mod error;

pub use crystal::{Composition, Crystal, Lattice, LatticeParams, Vec3};
pub use error::{Error, Result};
pub mod graph;
pub mod io;
pub mod metrics;
pub mod noise;
pub mod rng;
pub mod sampler;
pub mod synthetic;
pub mod tasks;
