//! Work extraction from finite-level quantum batteries.
//!
//! * [`battery`]: passive states and single-copy ergotropy.
//! * [`gibbs`]: von Neumann entropy, Gibbs states and the entropy-matched
//!   inverse temperature that bounds extractable work.
//! * [`ensemble`]: exact per-copy passive energies of `n` product copies.
//! * [`protocol`]: controlled unitary evolution and entangling advantage.
//! * [`numkernel`]: the small dense complex linear algebra underneath.
//!
//! All numerics are generic over [`Real`] (`f32` or `f64`). The aliases below
//! fix the scalar to `f64`, which is what the command-line tool uses.

// NaN must fail validation checks, so `!(x <= tol)` is deliberate.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod battery;
pub mod ensemble;
pub mod error;
pub mod gibbs;
pub mod numkernel;
pub mod protocol;
pub mod random;
pub mod scalar;

pub use error::Error;
pub use scalar::Real;

pub type ComplexMatrix = numkernel::ComplexMatrix<f64>;
pub type HermitianEig = numkernel::HermitianEig<f64>;
pub type BatterySpec = battery::BatterySpec<f64>;
pub type QuantumState = battery::QuantumState<f64>;
pub type ErgotropyReport = battery::ErgotropyReport<f64>;
pub type GibbsState = gibbs::GibbsState<f64>;
pub type GibbsMatch = gibbs::GibbsMatch<f64>;
pub type WeightedLevelTable = ensemble::WeightedLevelTable<f64>;
pub type EnsembleCurve = ensemble::EnsembleCurve<f64>;
pub type ControlSchedule = protocol::ControlSchedule<f64>;
pub type ProtocolResult = protocol::ProtocolResult<f64>;
pub type Register = protocol::Register<f64>;

pub type BatterySpec32 = battery::BatterySpec<f32>;
pub type QuantumState32 = battery::QuantumState<f32>;
pub type ComplexMatrix32 = numkernel::ComplexMatrix<f32>;
