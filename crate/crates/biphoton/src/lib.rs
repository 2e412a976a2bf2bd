//! Two-photon emission from a pair of dipole-coupled two-level emitters.
//!
//! The crate evaluates the closed-form steady-state two-photon probability
//! amplitudes of two initially inverted emitters radiating into a homogeneous
//! medium, together with everything built on top of them: joint spectral
//! densities, angular emission densities, spectrally filtered polarization
//! tomography, and two-qubit entanglement metrics (concurrence, Bell-state
//! fidelity, purity). A time-domain integrator of the underlying coupled
//! amplitude equations serves as an independent numerical check of the
//! closed forms.
//!
//! Reduced units are used throughout:
//! * rates and frequencies in units of the single-emitter spontaneous
//!   emission rate `gamma0`,
//! * spectral variables as detunings from the bare transition frequency,
//! * lengths in units of the vacuum transition wavelength,
//! * wavenumbers in units of `gamma0 / c_medium` (a vacuum-wavenumber
//!   convention is available where spectral densities are reported).

pub mod amplitudes;
pub mod emitters;
mod error;
pub mod integration;
pub mod modes;
pub mod postselection;
pub mod timedomain;

pub use error::{Error, Result};

/// Complex scalar used for all probability amplitudes.
pub type C64 = num_complex::Complex64;
