//! Active-array imaging of point scatterers with full multiple scattering.
//!
//! The forward model couples scatterers through the self-consistent
//! Foldy-Lax system, making the map from reflectivities to array data
//! nonlinear. Imaging nevertheless proceeds non-iteratively in two steps:
//!
//! 1. recover the *effective sources* — reflectivities times exciting
//!    fields — by ℓ1 (single illumination) or row-sparse J₂,₁ (multiple
//!    illuminations) minimization with a shrinkage-thresholding solver;
//! 2. convert sources to true reflectivities through an explicit
//!    exciting-field formula on the recovered support, averaging over
//!    illuminations.
//!
//! Supporting machinery: SVD-optimal illuminations, a MUSIC baseline,
//! coherence-based stability constants, and numerical validation of the
//! spherical/planar array coherence asymptotics. The `experiment` module
//! drives the end-to-end studies behind a config file, and the binary of
//! the same name exposes them as CLI subcommands.
//!
//! Runnable walk-throughs for each capability live in `examples/`.

pub mod coherence;
pub mod error;
pub mod experiment;
pub mod forward;
pub mod geometry;
pub mod illumination;
pub mod io;
pub mod music;
pub mod reflectivity;
pub mod solver;

pub use error::{Error, Result};
