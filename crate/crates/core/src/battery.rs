//! Battery model, passivity, passive states and single-copy ergotropy.

use num_complex::Complex;

use crate::error::Error;
use crate::numkernel::{eig_hermitian, ComplexMatrix};
use crate::scalar::Real;

/// Tolerances applied when a [`QuantumState`] is validated.
#[derive(Debug, Clone, Copy)]
pub struct StateTolerances<T> {
    pub hermitian: T,
    /// Eigenvalues down to `-negativity` are clamped to zero.
    pub negativity: T,
    pub trace: T,
}

impl<T: Real> Default for StateTolerances<T> {
    fn default() -> Self {
        Self {
            hermitian: T::resolvable(1e-10),
            negativity: T::resolvable(1e-12),
            trace: T::resolvable(1e-10),
        }
    }
}

/// Non-degenerate Hamiltonian spectrum `eps_1 < eps_2 < ... < eps_d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BatterySpec<T> {
    energies: Vec<T>,
}

impl<T: Real> BatterySpec<T> {
    pub fn new(energies: Vec<T>) -> Result<Self, Error> {
        if energies.len() < 2 {
            return Err(Error::InvalidBattery(format!(
                "need at least 2 energy levels, got {}",
                energies.len()
            )));
        }
        if let Some(j) = energies.iter().position(|e| !e.is_finite()) {
            return Err(Error::InvalidBattery(format!("energy level {j} is not finite")));
        }
        for (j, pair) in energies.windows(2).enumerate() {
            if !(pair[1] > pair[0]) {
                return Err(Error::InvalidBattery(format!(
                    "energies must be strictly increasing: level {} ({}) <= level {} ({})",
                    j + 1,
                    pair[1],
                    j,
                    pair[0]
                )));
            }
        }
        Ok(Self { energies })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.energies.len()
    }

    pub fn energies(&self) -> &[T] {
        &self.energies
    }

    pub fn ground_energy(&self) -> T {
        self.energies[0]
    }

    /// Smallest excitation gap `eps_2 - eps_1`.
    pub fn first_gap(&self) -> T {
        self.energies[1] - self.energies[0]
    }

    pub fn hamiltonian(&self) -> ComplexMatrix<T> {
        ComplexMatrix::from_real_diagonal(&self.energies)
    }

    /// Diagonal of the n-copy sum Hamiltonian, in Kronecker index order
    /// (first copy is the most significant digit).
    pub fn sum_levels(&self, copies: usize) -> Vec<T> {
        let mut levels = vec![T::zero()];
        for _ in 0..copies {
            levels = levels
                .iter()
                .flat_map(|&base| self.energies.iter().map(move |&e| base + e))
                .collect();
        }
        levels
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StateForm<T> {
    /// Populations in the energy eigenbasis.
    Diagonal(Vec<T>),
    Full(ComplexMatrix<T>),
}

/// Validated density matrix.
///
/// The spectrum is computed once at construction and sorted non-increasing
/// (stable for ties). Slightly negative eigenvalues are clamped to zero and
/// the spectrum renormalized.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState<T> {
    form: StateForm<T>,
    spectrum: Vec<T>,
}

impl<T: Real> QuantumState<T> {
    pub fn diagonal(populations: Vec<T>) -> Result<Self, Error> {
        Self::diagonal_with(populations, &StateTolerances::default())
    }

    pub fn diagonal_with(populations: Vec<T>, tol: &StateTolerances<T>) -> Result<Self, Error> {
        if populations.is_empty() {
            return Err(Error::InvalidState("no populations given".into()));
        }
        if let Some(j) = populations.iter().position(|p| !p.is_finite()) {
            return Err(Error::InvalidState(format!("population {j} is not finite")));
        }
        let spectrum = normalized_spectrum(populations.clone(), tol)?;
        Ok(Self {
            form: StateForm::Diagonal(populations),
            spectrum,
        })
    }

    pub fn full(matrix: ComplexMatrix<T>) -> Result<Self, Error> {
        Self::full_with(matrix, &StateTolerances::default())
    }

    pub fn full_with(matrix: ComplexMatrix<T>, tol: &StateTolerances<T>) -> Result<Self, Error> {
        let deviation = matrix.hermitian_deviation();
        if !(deviation <= tol.hermitian) {
            return Err(Error::InvalidState(format!(
                "density matrix is not Hermitian (deviation {:e})",
                deviation.as_f64()
            )));
        }
        let eig = eig_hermitian(&matrix)?;
        let spectrum = normalized_spectrum(eig.eigenvalues, tol)?;
        Ok(Self {
            form: StateForm::Full(matrix),
            spectrum,
        })
    }

    /// Maximally mixed state on `dim` levels.
    pub fn maximally_mixed(dim: usize) -> Result<Self, Error> {
        Self::diagonal(vec![T::one() / T::from_usize_lossy(dim); dim])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        match &self.form {
            StateForm::Diagonal(p) => p.len(),
            StateForm::Full(m) => m.dim(),
        }
    }

    pub fn form(&self) -> &StateForm<T> {
        &self.form
    }

    /// Eigenvalues, non-increasing.
    pub fn spectrum(&self) -> &[T] {
        &self.spectrum
    }

    /// `<j|rho|j>` in the energy eigenbasis.
    pub fn populations(&self) -> Vec<T> {
        match &self.form {
            StateForm::Diagonal(p) => p.clone(),
            StateForm::Full(m) => m.real_diagonal(),
        }
    }

    pub fn to_matrix(&self) -> ComplexMatrix<T> {
        match &self.form {
            StateForm::Diagonal(p) => ComplexMatrix::from_real_diagonal(p),
            StateForm::Full(m) => m.clone(),
        }
    }

    /// Largest off-diagonal modulus in the energy basis.
    pub fn coherence(&self) -> T {
        match &self.form {
            StateForm::Diagonal(_) => T::zero(),
            StateForm::Full(m) => m.max_off_diagonal(),
        }
    }

    /// `self (x) other`, staying diagonal when both factors are.
    pub fn kron(&self, other: &Self) -> Result<Self, Error> {
        match (&self.form, &other.form) {
            (StateForm::Diagonal(a), StateForm::Diagonal(b)) => {
                Self::diagonal(a.iter().flat_map(|&x| b.iter().map(move |&y| x * y)).collect())
            }
            _ => Self::full(self.to_matrix().kron(&other.to_matrix())),
        }
    }

    /// `rho^{(x) n}` for `n >= 1`.
    pub fn tensor_power(&self, n: usize) -> Result<Self, Error> {
        if n == 0 {
            return Err(Error::InvalidArgument("tensor power needs n >= 1".into()));
        }
        let mut out = self.clone();
        for _ in 1..n {
            out = out.kron(self)?;
        }
        Ok(out)
    }
}

fn normalized_spectrum<T: Real>(mut values: Vec<T>, tol: &StateTolerances<T>) -> Result<Vec<T>, Error> {
    let trace: T = values.iter().copied().sum();
    if !((trace - T::one()).abs() <= tol.trace) {
        return Err(Error::InvalidState(format!(
            "trace must be 1 within {:e}, got {}",
            tol.trace.as_f64(),
            trace
        )));
    }
    if let Some(worst) = values.iter().copied().reduce(T::min) {
        if worst < -tol.negativity {
            return Err(Error::InvalidState(format!(
                "eigenvalue {} is negative beyond {:e}",
                worst,
                tol.negativity.as_f64()
            )));
        }
    }
    if values.iter().any(|&v| v < T::zero()) {
        for v in values.iter_mut() {
            *v = v.max(T::zero());
        }
        let total: T = values.iter().copied().sum();
        for v in values.iter_mut() {
            *v /= total;
        }
    }
    sort_descending(&mut values);
    Ok(values)
}

pub(crate) fn sort_descending<T: Real>(values: &mut [T]) {
    values.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
}

fn check_dims<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<(), Error> {
    if state.dim() != battery.dim() {
        return Err(Error::DimensionMismatch {
            expected: battery.dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

/// `tr(rho H)` for a Hamiltonian diagonal in the computational basis.
pub(crate) fn energy_on_levels<T: Real>(state: &QuantumState<T>, levels: &[T]) -> Result<T, Error> {
    if state.dim() != levels.len() {
        return Err(Error::DimensionMismatch {
            expected: levels.len(),
            found: state.dim(),
        });
    }
    Ok(state.populations().iter().zip(levels).map(|(&p, &e)| p * e).sum())
}

/// `tr(rho H)`.
pub fn energy<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<T, Error> {
    check_dims(state, battery)?;
    energy_on_levels(state, battery.energies())
}

/// True iff the state commutes with `H` and its populations do not increase
/// with energy, both up to `tol`.
pub fn is_passive<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>, tol: T) -> Result<bool, Error> {
    check_dims(state, battery)?;
    if state.coherence() > tol {
        return Ok(false);
    }
    Ok(state.populations().windows(2).all(|p| p[1] <= p[0] + tol))
}

/// Single-copy ergotropy and the passive state reached by the optimal unitary.
#[derive(Debug, Clone, PartialEq)]
pub struct ErgotropyReport<T> {
    pub initial_energy: T,
    pub passive_energy: T,
    pub ergotropy: T,
    /// `r_1 >= r_2 >= ... >= r_d`.
    pub passive_populations: Vec<T>,
}

pub fn passive_state<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<ErgotropyReport<T>, Error> {
    let initial_energy = energy(state, battery)?;
    let passive_populations = state.spectrum().to_vec();
    let passive_energy = passive_populations
        .iter()
        .zip(battery.energies())
        .map(|(&r, &e)| r * e)
        .sum();
    Ok(ErgotropyReport {
        initial_energy,
        passive_energy,
        ergotropy: initial_energy - passive_energy,
        passive_populations,
    })
}

/// Shorthand for `passive_state(..).ergotropy`.
pub fn ergotropy<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<T, Error> {
    Ok(passive_state(state, battery)?.ergotropy)
}

/// Unitary `U = sum_j |j><psi_j|` sending the eigenvector of the j-th largest
/// eigenvalue of `rho` to the j-th energy level.
pub fn optimal_unitary<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<ComplexMatrix<T>, Error> {
    check_dims(state, battery)?;
    let d = state.dim();
    let zero = Complex::new(T::zero(), T::zero());
    match state.form() {
        StateForm::Diagonal(p) => {
            let order = descending_order(p);
            let mut u = ComplexMatrix::zeros(d);
            for (j, &k) in order.iter().enumerate() {
                u[(j, k)] = Complex::new(T::one(), T::zero());
            }
            Ok(u)
        }
        StateForm::Full(m) => {
            let eig = eig_hermitian(m)?;
            let order = descending_order(&eig.eigenvalues);
            let q = &eig.eigenvectors;
            let mut u = ComplexMatrix::from_fn(d, |_, _| zero);
            for (j, &k) in order.iter().enumerate() {
                for col in 0..d {
                    u[(j, col)] = q[(col, k)].conj();
                }
            }
            Ok(u)
        }
    }
}

/// Indices sorted by value, largest first; ties keep their original order.
fn descending_order<T: Real>(values: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[b].partial_cmp(&values[a]).unwrap_or(std::cmp::Ordering::Equal));
    order
}
