//! Phase-space (Wigner-Moyal) simulation of Klein-Gordon fields in
//! variable-mass media, with a direct field-space reference integrator.

#![allow(clippy::needless_range_loop)]

pub mod analytic;
pub mod error;
pub mod fv;
pub mod grid;
pub mod kg;
pub mod medium;
pub mod moyal;
pub mod pauli;
pub mod spectral;
pub mod swl;
pub mod transport;
pub mod wigner;

pub use error::{Error, Result};
pub use fv::{apply_hamiltonian, fv_recombine, fv_split, Hamiltonian, TwoComponentField};
pub use grid::{build_grid, Grid, SimParams, SplitNorm};
pub use medium::{MediumKind, MediumProfile, TimeModulation};
pub use spectral::C64;
pub use wigner::{
    decompose_real, reconstruct_field, w_phiphi, wigner_cross, wigner_matrix, wigner_scalar, PhaseSpaceDensities,
    WignerMatrixField,
};
