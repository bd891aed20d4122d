//! One-photon wavepacket scattering by two two-level atoms in a 1-d waveguide.
//!
//! The library is generic over the scalar type ([`scalar::Real`], `f32` or
//! `f64`); the aliases below fix it to `f64`, which every quoted tolerance
//! assumes.

pub mod coupling;
pub mod dynamics;
pub mod error;
pub mod farfield;
pub mod fields;
pub mod output;
pub mod params;
pub mod quadrature;
pub mod scalar;
pub mod specfun;
pub mod sweep;
pub mod validation;

pub use error::{Error, Result};

pub type SimParams = params::SimParams<f64>;
pub type CouplingModel = coupling::CouplingModel<f64>;
pub type CouplingResult = coupling::CouplingResult<f64>;
pub type IncidentWavepacket = dynamics::IncidentWavepacket<f64>;
pub type TimeGrid = dynamics::TimeGrid<f64>;
pub type SourceTerm = dynamics::SourceTerm<f64>;
pub type AmplitudeTrajectory = dynamics::AmplitudeTrajectory<f64>;
pub type FieldEnvelope = fields::FieldEnvelope<f64>;
pub type Fields = fields::Fields<f64>;
pub type Spectrum = fields::Spectrum<f64>;
pub type DetectorSpec = farfield::DetectorSpec<f64>;
pub type CellSpec = sweep::CellSpec<f64>;
pub type SweepSpec = sweep::SweepSpec<f64>;
pub type Simulation = sweep::Simulation<f64>;
