//! Non-Hermitian SSH lattices with staggered gain and loss.
//!
//! * [`bloch`]: two-band Bloch field in complex polar form with its biorthogonal eigenvectors.
//! * [`zak`]: complex Zak phase by three independent routes, plus the adiabatic phase.
//! * [`lattice`]: real-space rings and chains; the interferometer and its virtual chains.
//! * [`dynamics`]: wavepackets under flux ramps, integrated with RK4.
//! * [`scatter`]: transmission and confinement experiments on the interferometer.
//!
//! Everything is generic over [`Real`] (`f32` or `f64`); the `*64` aliases
//! below fix the double-precision instantiation.

pub mod bloch;
pub mod dynamics;
pub mod eigen;
pub mod error;
pub mod io;
pub mod lattice;
pub mod real;
pub mod scatter;
pub mod zak;

pub use bloch::{Band, BiorthEigenpair, BlochField, PolarDecomposition, SshModel};
pub use error::{Error, Result};
pub use real::Real;

pub type SshModel64 = bloch::SshModel<f64>;
pub type BlochField64 = bloch::BlochField<f64>;
pub type PolarDecomposition64 = bloch::PolarDecomposition<f64>;
pub type BiorthEigenpair64 = bloch::BiorthEigenpair<f64>;
pub type ZakResult64 = zak::ZakResult<f64>;
pub type AdiabaticPhase64 = zak::AdiabaticPhase<f64>;
pub type SshRingSpec64 = lattice::SshRingSpec<f64>;
pub type NetworkSpec64 = lattice::NetworkSpec<f64>;
pub type HamiltonianMatrix64 = lattice::HamiltonianMatrix<f64>;
pub type FluxOperator64 = lattice::FluxOperator<f64>;
pub type WavepacketSpec64 = dynamics::WavepacketSpec<f64>;
pub type FluxProtocol64 = dynamics::FluxProtocol<f64>;
pub type EvolutionResult64 = dynamics::EvolutionResult<f64>;
pub type ScatterScenario64 = scatter::ScatterScenario<f64>;
pub type ScatterReport64 = scatter::ScatterReport<f64>;

pub type SshModel32 = bloch::SshModel<f32>;
pub type SshRingSpec32 = lattice::SshRingSpec<f32>;
