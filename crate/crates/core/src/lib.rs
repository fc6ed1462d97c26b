//! Decoding laboratory for short binary linear codes.
//!
//! * [`gf2`]: parity-check codes, syndromes, bundled matrices, alist I/O.
//! * [`channel`]: BSC and hard-decision AWGN/BPSK channels.
//! * [`qaoa`]: exact statevector simulation of QAOA syndrome decoding.
//! * [`optimize`]: multistart BFGS over the QAOA angles, plus a grid oracle.
//! * [`minsum`]: flooding min-sum belief propagation in the LLR domain.
//! * [`qebp`]: QAOA warm start for belief propagation.
//! * [`repetition`]: transfer-matrix analytics for the repetition code.
//! * [`oracle`]: brute-force maximum-likelihood and minimum-weight decoders.
//! * [`harness`]: seeded Monte Carlo block-error-rate sweeps and reports.
//!
//! The numeric kernels are generic over [`Real`]; the aliases below fix them
//! to `f64`, which is what the harness uses.

pub mod channel;
pub mod error;
pub mod gf2;
pub mod harness;
pub mod minsum;
pub mod optimize;
pub mod oracle;
pub mod qaoa;
pub mod qebp;
pub mod repetition;
pub mod scalar;

pub use error::{Error, Result};
pub use gf2::{LinearCode, Syndrome, Word};
pub use scalar::Real;

pub type Statevector = qaoa::Statevector<f64>;
pub type OutcomeDistribution = qaoa::OutcomeDistribution<f64>;
pub type QaoaConfig = qaoa::QaoaConfig<f64>;
pub type CostHamiltonian = qaoa::CostHamiltonian<f64>;
pub type LlrVector = minsum::LlrVector<f64>;
pub type DecodeResult = minsum::DecodeResult<f64>;
pub type RepParams = repetition::RepParams<f64>;
pub type TransferMatrix = repetition::TransferMatrix<f64>;
