//! Axisymmetric magnetoquasistatic finite elements for homogenized foil
//! windings, coupled to lumped circuits through modified nodal analysis.
//!
//! The crate is organised bottom-up:
//!
//! - [`linalg`]: CSR matrices, a sparse LU with fill-reducing ordering,
//!   restricted SPD solves (pseudo-inverse application) and dense
//!   rank/nullspace helpers.
//! - [`mesh`]: structured triangulation of the transformer cross-section,
//!   uniform refinement and a plain-text mesh format.
//! - [`assembly`]: P1 assembly of stiffness and (modified) mass matrices for
//!   the azimuthal potential in `r·A_phi` form.
//! - [`winding`]: foil homogenization, voltage basis, coupling blocks and
//!   both turn-by-turn conductance matrices.
//! - [`circuit`]: netlists, topological index prediction and MNA stamping.
//! - [`dae_analysis`]: Schur reduction, projectors and element classification.
//! - [`timestepper`]: constant-step implicit Euler.

pub mod assembly;
pub mod circuit;
pub mod dae_analysis;
mod error;
pub mod linalg;
pub mod mesh;
pub mod timestepper;
pub mod winding;

pub use error::{Error, Result};

/// Vacuum permeability in H/m.
pub const MU_0: f64 = 4.0e-7 * std::f64::consts::PI;
