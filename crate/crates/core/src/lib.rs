//! Wigner functions of one-dimensional quantum states through the universal
//! density matrix 𝒲 of the harmonic-oscillator basis: W = Sp[ρ𝒲].

pub mod config;
pub mod energy;
pub mod error;
pub mod fd;
pub mod grid;
pub mod oracles;
pub mod output;
pub mod polynomials;
pub mod special;
pub mod state;
pub mod udm;
pub mod verify;
pub mod vlasov;

pub use error::{Result, UdmError};
pub use polynomials::PolyIndexPair;
pub use special::OscillatorParams;
pub use state::{CoefficientVector, DensityMatrix};
pub use udm::PhasePoint;
