//! Spectral representations of isotropic functions of symmetric tensors,
//! non-symmetric tensors and vectors.

pub mod analysis;
pub mod classical_bases;
pub mod error;
pub mod fd;
pub mod lin3;
pub mod potentials;
pub mod representation;
pub mod spectral_frame;
pub mod system;

pub use error::{Error, Result};
pub use lin3::{Mat3, Rotation, SkewMat3, SymMat3, Vec3};
pub use spectral_frame::{SpectralFrame, SpectralInvariants};
pub use system::{ArgRef, NonSym, SysVector, TensorSystem};
