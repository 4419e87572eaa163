//! Gibbs states, von Neumann entropy and the entropy-matched inverse temperature.
//!
//! Units: `k_B = 1`, entropies in nats, `beta` in inverse energy units.
//! Boltzmann weights are always taken relative to the ground level, so
//! `partition_function` is `sum_j exp(-beta (eps_j - eps_1))` and the
//! physical partition function is `partition_function * exp(-beta * shift)`.

use crate::battery::{energy, BatterySpec, QuantumState};
use crate::error::Error;
use crate::scalar::Real;

/// Default entropy-matching tolerance (nats).
pub const DEFAULT_ENTROPY_TOL: f64 = 1e-10;
/// Excited populations below this are treated as zero when capping `beta`.
pub const SATURATION_POPULATION: f64 = 1e-15;
/// Tolerance on `target_entropy` outside `[0, ln d]` before it is rejected.
pub const TARGET_SLACK: f64 = 1e-12;

/// `-sum p ln p` with `0 ln 0 = 0`.
pub fn shannon_entropy<T: Real>(probabilities: &[T]) -> T {
    probabilities
        .iter()
        .filter(|&&p| p > T::zero())
        .map(|&p| -p * p.ln())
        .sum()
}

/// Von Neumann entropy `S(rho) = -tr rho ln rho` in nats.
pub fn entropy<T: Real>(state: &QuantumState<T>) -> T {
    shannon_entropy(state.spectrum())
}

/// Canonical state `exp(-beta H) / Z`.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsState<T> {
    pub beta: T,
    pub populations: Vec<T>,
    /// Ground-shifted partition function.
    pub partition_function: T,
    /// Energy shift (`eps_1`) used for the weights.
    pub shift: T,
}

impl<T: Real> GibbsState<T> {
    pub fn energy(&self, battery: &BatterySpec<T>) -> T {
        self.populations
            .iter()
            .zip(battery.energies())
            .map(|(&p, &e)| p * e)
            .sum()
    }

    /// `ln p_j = -beta (eps_j - eps_1) - ln Z`, so no logarithm of an
    /// underflowed population is ever taken.
    pub fn entropy(&self, battery: &BatterySpec<T>) -> T {
        let ln_z = self.partition_function.ln();
        let s: T = self
            .populations
            .iter()
            .zip(battery.energies())
            .filter(|(&p, _)| p > T::zero())
            .map(|(&p, &e)| p * (self.beta * (e - self.shift) + ln_z))
            .sum();
        s.max(T::zero())
    }

    pub fn to_state(&self) -> Result<QuantumState<T>, Error> {
        QuantumState::diagonal(self.populations.clone())
    }
}

pub fn gibbs_state<T: Real>(battery: &BatterySpec<T>, beta: T) -> Result<GibbsState<T>, Error> {
    if !beta.is_finite() || beta < T::zero() {
        return Err(Error::InvalidArgument(format!(
            "beta must be finite and >= 0, got {beta}"
        )));
    }
    let shift = battery.ground_energy();
    let weights: Vec<T> = battery
        .energies()
        .iter()
        .map(|&e| (-beta * (e - shift)).exp())
        .collect();
    let partition_function: T = weights.iter().copied().sum();
    Ok(GibbsState {
        beta,
        populations: weights.iter().map(|&w| w / partition_function).collect(),
        partition_function,
        shift,
    })
}

/// Gibbs state whose entropy equals a prescribed value.
#[derive(Debug, Clone, PartialEq)]
pub struct GibbsMatch<T> {
    pub beta: T,
    pub populations: Vec<T>,
    pub partition_function: T,
    pub gibbs_energy: T,
    pub gibbs_entropy: T,
    pub target_entropy: T,
    /// Set when the target is (numerically) zero and `beta` was capped.
    pub saturated: bool,
}

/// Largest `beta` ever reported: excited populations are then below
/// [`SATURATION_POPULATION`].
pub fn beta_cap<T: Real>(battery: &BatterySpec<T>) -> T {
    (T::one() / T::lit(SATURATION_POPULATION)).ln() / battery.first_gap()
}

/// Solves `S(omega_beta) = target_entropy` for `beta >= 0`.
///
/// `beta -> S(omega_beta)` is strictly decreasing from `ln d` to 0, so the
/// root is bracketed on `[0, beta_hi]` with `beta_hi` doubled until the
/// entropy drops below the target, then bisected to the resolution of the
/// scalar type.
pub fn match_entropy<T: Real>(battery: &BatterySpec<T>, target_entropy: T, tol: T) -> Result<GibbsMatch<T>, Error> {
    if !(tol > T::zero()) {
        return Err(Error::InvalidArgument(format!("tolerance must be positive, got {tol}")));
    }
    let max_entropy = T::from_usize_lossy(battery.dim()).ln();
    let slack = T::resolvable(TARGET_SLACK);
    if !(target_entropy >= -slack && target_entropy <= max_entropy + slack) {
        return Err(Error::TargetOutOfRange {
            target: target_entropy.as_f64(),
            max: max_entropy.as_f64(),
        });
    }
    let target = target_entropy.max(T::zero()).min(max_entropy);
    let entropy_at = |beta: T| gibbs_state(battery, beta).map(|g| g.entropy(battery));

    let (beta, saturated) = if target >= max_entropy - T::lit(4.0) * T::epsilon() * max_entropy {
        (T::zero(), false)
    } else if target <= tol {
        (beta_cap(battery), true)
    } else {
        let mut hi = T::one() / (battery.energies()[battery.dim() - 1] - battery.ground_energy());
        let mut doublings = 0;
        while entropy_at(hi)? > target {
            hi = hi + hi;
            doublings += 1;
            if doublings > 4096 || !hi.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "could not bracket entropy target {target}"
                )));
            }
        }
        (bisect_decreasing(&entropy_at, target, T::zero(), hi)?, false)
    };

    let gibbs = gibbs_state(battery, beta)?;
    Ok(GibbsMatch {
        beta,
        gibbs_energy: gibbs.energy(battery),
        gibbs_entropy: gibbs.entropy(battery),
        populations: gibbs.populations,
        partition_function: gibbs.partition_function,
        target_entropy,
        saturated,
    })
}

/// Bisection for a decreasing `f` with `f(lo) > target >= f(hi)`; runs until
/// the bracket cannot be split any further.
fn bisect_decreasing<T: Real>(f: &impl Fn(T) -> Result<T, Error>, target: T, mut lo: T, mut hi: T) -> Result<T, Error> {
    let mut f_lo = f(lo)?;
    let mut f_hi = f(hi)?;
    for _ in 0..4096 {
        let mid = lo + (hi - lo) * T::lit(0.5);
        if mid <= lo || mid >= hi {
            break;
        }
        let f_mid = f(mid)?;
        if f_mid == target {
            return Ok(mid);
        }
        if f_mid > target {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
            f_hi = f_mid;
        }
    }
    Ok(if (f_lo - target).abs() <= (f_hi - target).abs() {
        lo
    } else {
        hi
    })
}

/// Thermodynamic bound together with the Gibbs state it was computed from.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermodynamicBound<T> {
    pub initial_energy: T,
    pub gibbs: GibbsMatch<T>,
    /// `tr(rho H) - tr(omega_beta_bar H)`.
    pub bound: T,
}

pub fn thermodynamic_bound_report<T: Real>(
    state: &QuantumState<T>,
    battery: &BatterySpec<T>,
    tol: T,
) -> Result<ThermodynamicBound<T>, Error> {
    let initial_energy = energy(state, battery)?;
    let gibbs = match_entropy(battery, entropy(state), tol)?;
    Ok(ThermodynamicBound {
        initial_energy,
        bound: initial_energy - gibbs.gibbs_energy,
        gibbs,
    })
}

/// Upper bound `tr(rho H) - tr(omega_beta_bar H)` on the ergotropy.
pub fn thermodynamic_bound<T: Real>(state: &QuantumState<T>, battery: &BatterySpec<T>) -> Result<T, Error> {
    Ok(thermodynamic_bound_report(state, battery, T::resolvable(DEFAULT_ENTROPY_TOL))?.bound)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::battery::ergotropy;
    use approx::assert_abs_diff_eq;

    fn three_level_battery() -> BatterySpec<f64> {
        BatterySpec::new(vec![0.0, 0.579, 1.0]).unwrap()
    }

    #[test]
    fn entropy_examples() {
        let pure = QuantumState::diagonal(vec![1.0, 0.0, 0.0]).unwrap();
        assert_eq!(entropy(&pure), 0.0);
        let mixed = QuantumState::<f64>::maximally_mixed(3).unwrap();
        assert_abs_diff_eq!(entropy(&mixed), 3f64.ln(), epsilon = 1e-15);
        // high-precision value, 50-digit evaluation
        let three_level = QuantumState::diagonal(vec![0.539, 0.237, 0.224]).unwrap();
        assert_abs_diff_eq!(entropy(&three_level), 1.0094596171976326, epsilon = 1e-14);
    }

    #[test]
    fn gibbs_state_limits() {
        let b = three_level_battery();
        let hot = gibbs_state(&b, 0.0).unwrap();
        for p in &hot.populations {
            assert_abs_diff_eq!(*p, 1.0 / 3.0, epsilon = 1e-15);
        }
        let cold = gibbs_state(&b, 1e6).unwrap();
        assert_eq!(cold.populations[0], 1.0);
        assert!(cold.populations[1] < 1e-100 && cold.populations[2] < 1e-100);
        assert!(gibbs_state(&b, -1.0).is_err());
        assert!(gibbs_state(&b, f64::NAN).is_err());
    }

    #[test]
    fn gibbs_at_unit_beta() {
        let b = three_level_battery();
        let g = gibbs_state(&b, 1.0).unwrap();
        let z = 1.0 + (-0.579f64).exp() + (-1.0f64).exp();
        assert_abs_diff_eq!(g.partition_function, z, epsilon = 1e-15);
        assert_abs_diff_eq!(g.populations[1], (-0.579f64).exp() / z, epsilon = 1e-15);
        assert_abs_diff_eq!(g.entropy(&b), 1.0157163593878962, epsilon = 1e-14);
        assert_abs_diff_eq!(shannon_entropy(&g.populations), 1.0157163593878962, epsilon = 1e-14);
    }

    #[test]
    fn shifted_levels_give_same_populations() {
        let a = gibbs_state(&BatterySpec::new(vec![0.0, 1.0, 3.0]).unwrap(), 2.0).unwrap();
        let b = gibbs_state(&BatterySpec::new(vec![1000.0, 1001.0, 1003.0]).unwrap(), 2.0).unwrap();
        for (x, y) in a.populations.iter().zip(&b.populations) {
            assert_abs_diff_eq!(*x, *y, epsilon = 1e-12);
        }
        assert_eq!(b.shift, 1000.0);
    }

    #[test]
    fn maximal_entropy_gives_infinite_temperature() {
        let b = three_level_battery();
        let m = match_entropy(&b, 3f64.ln(), 1e-10).unwrap();
        assert_eq!(m.beta, 0.0);
        assert_abs_diff_eq!(m.gibbs_energy, 1.579 / 3.0, epsilon = 1e-15);
    }

    #[test]
    fn three_level_entropy_match() {
        let b = three_level_battery();
        let m = match_entropy(&b, 1.0094596171976326, 1e-10).unwrap();
        assert!((m.gibbs_entropy - m.target_entropy).abs() <= 1e-10);
        assert_abs_diff_eq!(m.beta, 1.0386748059917891, epsilon = 1e-9);
        assert_abs_diff_eq!(m.gibbs_energy, 0.3529196844804642, epsilon = 1e-10);
        assert!(!m.saturated);
    }

    #[test]
    fn qubit_match_recovers_populations() {
        let b = BatterySpec::new(vec![0.0, 1.0]).unwrap();
        let m = match_entropy(&b, shannon_entropy(&[0.7, 0.3]), 1e-10).unwrap();
        assert_abs_diff_eq!(m.populations[0], 0.7, epsilon = 1e-12);
        assert_abs_diff_eq!(m.gibbs_energy, 0.3, epsilon = 1e-12);
    }

    #[test]
    fn zero_entropy_saturates() {
        let b = three_level_battery();
        let m = match_entropy(&b, 0.0, 1e-10).unwrap();
        assert!(m.saturated);
        assert_abs_diff_eq!(m.beta, beta_cap(&b), epsilon = 0.0);
        assert_abs_diff_eq!(m.gibbs_energy, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn out_of_range_targets_are_rejected() {
        let b = three_level_battery();
        assert!(matches!(
            match_entropy(&b, -0.1, 1e-10),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(matches!(
            match_entropy(&b, 1.2, 1e-10),
            Err(Error::TargetOutOfRange { .. })
        ));
        assert!(match_entropy(&b, 3f64.ln() + 1e-13, 1e-10).is_ok());
        assert!(match_entropy(&b, 0.5, 0.0).is_err());
    }

    #[test]
    fn bound_examples() {
        let qubit = BatterySpec::new(vec![0.0, 1.0]).unwrap();
        let passive = QuantumState::diagonal(vec![0.7, 0.3]).unwrap();
        assert_abs_diff_eq!(thermodynamic_bound(&passive, &qubit).unwrap(), 0.0, epsilon = 1e-9);

        let b = three_level_battery();
        let mixed = QuantumState::<f64>::maximally_mixed(3).unwrap();
        assert_abs_diff_eq!(thermodynamic_bound(&mixed, &b).unwrap(), 0.0, epsilon = 1e-15);

        let anti = QuantumState::diagonal(vec![0.224, 0.237, 0.539]).unwrap();
        let bound = thermodynamic_bound(&anti, &b).unwrap();
        assert_abs_diff_eq!(bound, 0.676223 - 0.3529196844804642, epsilon = 1e-10);
        assert!(bound > ergotropy(&anti, &b).unwrap());
    }

    #[test]
    fn round_trip_in_single_precision() {
        let b = BatterySpec::<f32>::new(vec![0.0, 0.5, 1.0]).unwrap();
        let g = gibbs_state(&b, 1.5).unwrap();
        let m = match_entropy(&b, g.entropy(&b), 1e-6).unwrap();
        assert!((m.beta - 1.5).abs() < 1e-3);
    }
}
