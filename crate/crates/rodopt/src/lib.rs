//! Phase-field shape optimization of the bending and torsional rigidities
//! of a two-material elastic rod cross-section.
//!
//! The design variable is a nodal phase field `phi` on a P1 triangulation
//! of the cross-section (a disk). A semi-implicit `L2` gradient flow of a
//! weighted objective (mean bending rigidity, deviatoric part, torsional
//! rigidity via the Prandtl stress function, Ginzburg-Landau perimeter
//! energy) is iterated under a mass constraint until stationarity.

pub mod cli_io;
pub mod error;
pub mod flow;
pub mod linalg;
pub mod mesh;
pub mod phase_field;
pub mod rigidity;
pub mod sensitivity;

pub use error::{Error, Result};
