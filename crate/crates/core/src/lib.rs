//! Simulation of Rydberg EIT/Autler-Townes spectra under band-limited white
//! Gaussian noise.
//!
//! The numerical core is generic over `f32`/`f64` through [`num::Real`]; the
//! aliases below fix it to `f64`, which is what the configuration layer and
//! the CLI use.

// Negated comparisons are how NaN inputs get rejected.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod analysis;
pub mod bundle;
pub mod config;
pub mod constants;
pub mod error;
pub mod lindblad;
pub mod noise;
pub mod num;
pub mod quad;
pub mod rydberg;
pub mod scenario;
pub mod spectroscopy;
pub(crate) mod textcfg;

pub use error::{Error, Result};

pub type Atom = rydberg::Atom<f64>;
pub type QuantumDefectTable = rydberg::QuantumDefectTable<f64>;
pub type NoiseSpectrum = noise::NoiseSpectrum<f64>;
pub type NoiseCouplings = noise::NoiseCouplings<f64>;
pub type FieldGeometry = noise::FieldGeometry<f64>;
pub type DriveParameters = lindblad::DriveParameters<f64>;
pub type DecayParameters = lindblad::DecayParameters<f64>;
pub type DensityMatrix = lindblad::DensityMatrix<f64>;
pub type CellParameters = spectroscopy::CellParameters<f64>;
pub type SystemConfig = spectroscopy::SystemConfig<f64>;
pub type TransmissionSpectrum = spectroscopy::TransmissionSpectrum<f64>;
pub type PeakSet = analysis::PeakSet<f64>;
pub type FieldEstimate = analysis::FieldEstimate<f64>;
pub type Scenario = scenario::Scenario<f64>;
