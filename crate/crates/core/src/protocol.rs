//! Work extraction by controlled unitary evolution.
//!
//! Controls are piecewise constant, so the time-ordered exponential is the
//! ordered product of segment exponentials and carries no integration error.

use crate::battery::{energy_on_levels, ergotropy, BatterySpec, QuantumState};
use crate::ensemble::{build_level_table, passive_energy_per_copy, EnsembleConfig};
use crate::error::Error;
use crate::numkernel::{expm_hermitian_generator, ComplexMatrix};
use crate::scalar::Real;

/// Unitarity tolerance accepted by [`apply_unitary`].
pub const DEFAULT_UNITARY_TOL: f64 = 1e-8;

/// `n` copies of one battery, evolving under the sum Hamiltonian.
#[derive(Debug, Clone, PartialEq)]
pub struct Register<T> {
    battery: BatterySpec<T>,
    copies: usize,
    levels: Vec<T>,
}

impl<T: Real> Register<T> {
    pub fn single(battery: &BatterySpec<T>) -> Self {
        Self::copies(battery, 1).expect("one copy is always valid")
    }

    pub fn copies(battery: &BatterySpec<T>, copies: usize) -> Result<Self, Error> {
        if copies == 0 {
            return Err(Error::InvalidArgument("register needs at least one copy".into()));
        }
        Ok(Self {
            battery: battery.clone(),
            copies,
            levels: battery.sum_levels(copies),
        })
    }

    pub fn battery(&self) -> &BatterySpec<T> {
        &self.battery
    }

    pub fn n_copies(&self) -> usize {
        self.copies
    }

    pub fn dim(&self) -> usize {
        self.levels.len()
    }

    /// Diagonal of `H^{(n)}`.
    pub fn levels(&self) -> &[T] {
        &self.levels
    }

    pub fn hamiltonian(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diagonal(&self.levels)
    }

    pub fn energy(&self, state: &QuantumState<T>) -> Result<T, Error> {
        energy_on_levels(state, &self.levels)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlSegment<T> {
    pub duration: T,
    pub control: ComplexMatrix<T>,
}

/// Ordered list of constant control fields.
#[derive(Debug, Clone, PartialEq)]
pub struct ControlSchedule<T> {
    segments: Vec<ControlSegment<T>>,
}

impl<T: Real> ControlSchedule<T> {
    pub fn empty() -> Self {
        Self { segments: Vec::new() }
    }

    pub fn new(segments: Vec<ControlSegment<T>>) -> Result<Self, Error> {
        let tol = T::resolvable(1e-10);
        for (k, seg) in segments.iter().enumerate() {
            if !(seg.duration > T::zero()) || !seg.duration.is_finite() {
                return Err(Error::InvalidSchedule(format!(
                    "segment {k}: duration must be positive and finite, got {}",
                    seg.duration
                )));
            }
            let deviation = seg.control.hermitian_deviation();
            if !(deviation <= tol) {
                return Err(Error::NotHermitian {
                    deviation: deviation.as_f64(),
                    tol: tol.as_f64(),
                });
            }
            if seg.control.dim() != segments[0].control.dim() {
                return Err(Error::DimensionMismatch {
                    expected: segments[0].control.dim(),
                    found: seg.control.dim(),
                });
            }
        }
        Ok(Self { segments })
    }

    pub fn segments(&self) -> &[ControlSegment<T>] {
        &self.segments
    }

    pub fn total_duration(&self) -> T {
        self.segments.iter().map(|s| s.duration).sum()
    }

    pub fn dim(&self) -> Option<usize> {
        self.segments.first().map(|s| s.control.dim())
    }
}

#[derive(Debug, Clone)]
pub struct ProtocolResult<T> {
    pub final_state: QuantumState<T>,
    pub total_unitary: ComplexMatrix<T>,
    /// `tr(rho H) - tr(rho(tau) H)`.
    pub work: T,
}

fn finish<T: Real>(
    state: &QuantumState<T>,
    register: &Register<T>,
    u: ComplexMatrix<T>,
) -> Result<ProtocolResult<T>, Error> {
    let before = register.energy(state)?;
    let final_state = QuantumState::full(u.conjugate(&state.to_matrix()))?;
    let after = register.energy(&final_state)?;
    Ok(ProtocolResult {
        final_state,
        total_unitary: u,
        work: before - after,
    })
}

/// Runs `rho -> U rho U^dagger` with `U = prod_k exp(-i dt_k (H + V_k))`,
/// later segments multiplying from the left.
pub fn evolve<T: Real>(
    state: &QuantumState<T>,
    register: &Register<T>,
    schedule: &ControlSchedule<T>,
) -> Result<ProtocolResult<T>, Error> {
    let dim = register.dim();
    if state.dim() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: state.dim(),
        });
    }
    if let Some(found) = schedule.dim().filter(|&d| d != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found });
    }
    let h = register.hamiltonian();
    let mut u = ComplexMatrix::identity(dim);
    for seg in schedule.segments() {
        let step = expm_hermitian_generator(&(&h + &seg.control), seg.duration)?;
        u = &step * &u;
    }
    finish(state, register, u)
}

/// Idealized quench by an arbitrary unitary.
pub fn apply_unitary<T: Real>(
    state: &QuantumState<T>,
    register: &Register<T>,
    u: &ComplexMatrix<T>,
) -> Result<ProtocolResult<T>, Error> {
    if state.dim() != register.dim() || u.dim() != register.dim() {
        return Err(Error::DimensionMismatch {
            expected: register.dim(),
            found: if u.dim() != register.dim() {
                u.dim()
            } else {
                state.dim()
            },
        });
    }
    let tol = T::resolvable(DEFAULT_UNITARY_TOL);
    let deviation = u.unitarity_residual();
    if !(deviation <= tol) {
        return Err(Error::NotUnitary {
            deviation: deviation.as_f64(),
            tol: tol.as_f64(),
        });
    }
    finish(state, register, u.clone())
}

/// Best work from product unitaries `U_1 (x) ... (x) U_n` on `rho^{(x) n}`.
///
/// The sum Hamiltonian has no cross terms, so each factor is optimized on its
/// own and the optimum is `n` times the single-copy ergotropy.
pub fn best_product_work<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>, n: usize) -> Result<T, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of copies must be at least 1".into()));
    }
    Ok(T::from_usize_lossy(n) * ergotropy(state, battery)?)
}

/// `n w_max^n - best_product_work`: extra work available to entangling unitaries.
pub fn entangling_advantage<T: Real>(
    state: &QuantumState<T>,
    battery: &BatterySpec<T>,
    n: usize,
    config: &EnsembleConfig,
) -> Result<T, Error> {
    if n < 2 {
        return Err(Error::InvalidArgument("entangling advantage needs n >= 2".into()));
    }
    let table = build_level_table(state.spectrum(), battery, n, config)?;
    let per_copy_work = energy_on_levels(state, battery.energies())? - passive_energy_per_copy(&table);
    Ok(T::from_usize_lossy(n) * per_copy_work - best_product_work(state, battery, n)?)
}
