use thiserror::Error;

/// Failure modes of the toolkit.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not Hermitian: max |M_ij - conj(M_ji)| = {deviation:e} exceeds {tol:e}")]
    NotHermitian { deviation: f64, tol: f64 },

    #[error("Jacobi eigensolver did not converge within {sweeps} sweeps (off-diagonal norm {off_norm:e})")]
    NoConvergence { sweeps: usize, off_norm: f64 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not unitary: max |U^dagger U - I| = {deviation:e} exceeds {tol:e}")]
    NotUnitary { deviation: f64, tol: f64 },

    #[error("invalid battery: {0}")]
    InvalidBattery(String),

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("target entropy {target} outside [0, ln d = {max}]")]
    TargetOutOfRange { target: f64, max: f64 },

    #[error("enumeration cap exceeded at n = {n}: {count} > {cap} (largest feasible n: {largest_feasible})")]
    CapExceeded {
        n: usize,
        count: u128,
        cap: u128,
        largest_feasible: usize,
    },

    #[error("state is not diagonal in the energy basis (off-diagonal magnitude {off_diagonal:e})")]
    NotDiagonal { off_diagonal: f64 },

    #[error("invalid schedule: {0}")]
    InvalidSchedule(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}

impl Error {
    /// True for errors caused by malformed input rather than numerical failure.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::NotHermitian { .. }
                | Error::InvalidBattery(_)
                | Error::InvalidState(_)
                | Error::InvalidSchedule(_)
                | Error::InvalidArgument(_)
                | Error::TargetOutOfRange { .. }
                | Error::NotUnitary { .. }
        )
    }
}
