//! Spectrally resolved Hong-Ou-Mandel interference of SPDC photon pairs.
//!
//! The crate models the full chain of a frequency-resolved HOM experiment
//! with a pulsed type-II pp-KTP downconversion source:
//!
//! 1. [`source`] builds the complex joint spectral amplitude (JSA) from
//!    first principles: pump envelope × quasi-phase-matching sinc, with an
//!    optional misaligned-collection amplitude.
//! 2. [`hom`] evaluates the frequency-resolved interference behind a
//!    beamsplitter — coincidence and bunching spectra, integrated dip
//!    scans, visibility, and virtual top-hat filtering.
//! 3. [`spectrometer`] is the forward Monte Carlo of the dispersive-fiber
//!    single-photon spectrometer: frequency→arrival-time encoding, detector
//!    efficiency/jitter/background, time tags, coincidence histograms.
//! 4. [`analysis`] inverts the chain: dispersion-corrected JSI
//!    reconstruction, rate and counting-statistics estimators, Klyshko
//!    efficiency, and scan assembly from histograms.
//!
//! Everything is deterministic given (config, seed); all types are
//! immutable after construction and every operation is a pure function.

// validations are written `!(x > 0.0)` so NaN fails them too
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// indexed loops over matched matrix dimensions read better than zipped
// iterator chains in the numeric kernels
#![allow(clippy::needless_range_loop)]

pub mod analysis;
pub mod error;
pub mod fwhm;
pub mod grid;
pub mod hom;
pub mod jsa;
pub mod matrix_io;
pub mod rng;
pub mod schmidt;
pub mod sellmeier;
pub mod source;
pub mod spectrometer;
pub mod svd;
pub mod tags;
pub mod units;

pub use error::{Error, Result};
pub use grid::{make_grid, FrequencyGrid};
pub use jsa::{
    intensity_of, magnitude_jsa_from_jsi, marginal, JointSpectralAmplitude, JointSpectralIntensity,
};
pub use schmidt::{schmidt_decompose, SchmidtResult};
