//! Phase-field brittle fracture on structured meshes with standard and
//! fixed-stress staggered solution schemes.

pub mod assembly;
pub mod bench;
pub mod constitutive;
pub mod element;
pub mod error;
pub mod linsolve;
pub mod mesh;
pub mod oned;
pub mod schemes;
pub mod vtk;

pub use error::{Error, Result};
