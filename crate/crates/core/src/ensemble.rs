//! Exact per-copy passive energies of `n` independent battery copies.
//!
//! The `d^n` eigenvalues of `rho^{(x) n}` and the `d^n` levels of the sum
//! Hamiltonian are both constant on composition classes: a configuration
//! `(i_1, ..., i_n)` only matters through how often each level occurs. The
//! passive energy is therefore computed on the `C(n + d - 1, d - 1)` classes,
//! each weighted by its multinomial multiplicity, with a greedy two-pointer
//! match between the descending probability list and the ascending energy
//! list. [`brute_force_oracle`] expands everything and is kept as an
//! independent check.

use rayon::prelude::*;

use crate::battery::{energy, BatterySpec, QuantumState};
use crate::error::Error;
use crate::gibbs::{entropy, match_entropy, GibbsMatch, DEFAULT_ENTROPY_TOL};
use crate::scalar::Real;

pub const DEFAULT_MAX_COMPOSITIONS: u128 = 50_000_000;
pub const DEFAULT_MAX_ORACLE_LEVELS: u128 = 10_000_000;
/// Overrides [`EnsembleConfig::max_compositions`] in [`EnsembleConfig::from_env`].
pub const MAX_COMPOSITIONS_ENV: &str = "ERGOKIT_MAX_COMPOSITIONS";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EnsembleConfig {
    pub max_compositions: u128,
    pub max_oracle_levels: u128,
}

impl Default for EnsembleConfig {
    fn default() -> Self {
        Self {
            max_compositions: DEFAULT_MAX_COMPOSITIONS,
            max_oracle_levels: DEFAULT_MAX_ORACLE_LEVELS,
        }
    }
}

impl EnsembleConfig {
    /// Defaults, with the composition cap taken from `ERGOKIT_MAX_COMPOSITIONS` when set.
    pub fn from_env() -> Result<Self, Error> {
        let mut config = Self::default();
        if let Ok(raw) = std::env::var(MAX_COMPOSITIONS_ENV) {
            config.max_compositions = raw.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!(
                    "{MAX_COMPOSITIONS_ENV} must be a non-negative integer, got {raw:?}"
                ))
            })?;
        }
        Ok(config)
    }
}

/// Occupation counts `(k_1, ..., k_d)` of an `n`-copy configuration.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Composition {
    counts: Vec<usize>,
}

impl Composition {
    pub fn new(counts: Vec<usize>) -> Self {
        Self { counts }
    }

    pub fn counts(&self) -> &[usize] {
        &self.counts
    }

    pub fn n(&self) -> usize {
        self.counts.iter().sum()
    }

    /// `ln(n! / (k_1! ... k_d!))`.
    pub fn log_multiplicity<T: Real>(&self) -> T {
        let table = log_factorials::<T>(self.n());
        log_multinomial(&table, &self.counts)
    }
}

/// All compositions of `n` into `parts` non-negative parts, starting at
/// `(n, 0, ..., 0)` and ending at `(0, ..., 0, n)`.
pub fn compositions(n: usize, parts: usize) -> Compositions {
    let current = if parts == 0 {
        None
    } else {
        let mut counts = vec![0; parts];
        counts[0] = n;
        Some(counts)
    };
    Compositions { current }
}

pub struct Compositions {
    current: Option<Vec<usize>>,
}

impl Iterator for Compositions {
    type Item = Composition;

    fn next(&mut self) -> Option<Composition> {
        let out = self.current.clone()?;
        if !advance_composition(self.current.as_mut().unwrap()) {
            self.current = None;
        }
        Some(Composition::new(out))
    }
}

/// Steps to the next composition in place; false once the last one is passed.
fn advance_composition(counts: &mut [usize]) -> bool {
    let d = counts.len();
    let last = counts[d - 1];
    counts[d - 1] = 0;
    match (0..d - 1).rev().find(|&i| counts[i] > 0) {
        Some(i) => {
            counts[i] -= 1;
            counts[i + 1] = last + 1;
            true
        }
        None => {
            counts[d - 1] = last;
            false
        }
    }
}

/// `C(n + d - 1, d - 1)`, saturating at `u128::MAX`.
pub fn composition_count(n: usize, parts: usize) -> u128 {
    if parts == 0 {
        return 0;
    }
    let mut count: u128 = 1;
    for k in 1..parts as u128 {
        // count * (n + k) / k stays integral at every step
        match count.checked_mul(n as u128 + k) {
            Some(v) => count = v / k,
            None => return u128::MAX,
        }
    }
    count
}

/// Largest `n` whose composition count fits under `cap` (0 if none does).
pub fn largest_feasible_n(parts: usize, cap: u128) -> usize {
    if composition_count(1, parts) > cap {
        return 0;
    }
    let mut lo = 1usize;
    let mut hi = 2usize;
    while composition_count(hi, parts) <= cap {
        lo = hi;
        match hi.checked_mul(2) {
            Some(v) => hi = v,
            None => return lo,
        }
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if composition_count(mid, parts) <= cap {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

fn log_factorials<T: Real>(n: usize) -> Vec<T> {
    let mut table = Vec::with_capacity(n + 1);
    table.push(T::zero());
    let mut acc = T::zero();
    for k in 1..=n {
        acc += T::from_usize_lossy(k).ln();
        table.push(acc);
    }
    table
}

fn log_multinomial<T: Real>(log_fact: &[T], counts: &[usize]) -> T {
    let n: usize = counts.iter().sum();
    counts.iter().fold(log_fact[n], |acc, &k| acc - log_fact[k])
}

/// One composition class of the n-copy problem.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelEntry<T> {
    /// `sum_j k_j ln r_j`; `-inf` when an occupied level has `r_j = 0`.
    pub log_prob: T,
    /// `prod_j r_j^{k_j}`, possibly underflowed to zero.
    pub probability: T,
    /// Total (not per-copy) energy `sum_j k_j eps_j`.
    pub energy: T,
    /// `ln` of the number of configurations in the class.
    pub log_mult: T,
}

/// Multiplicity-compressed joint spectrum of `rho^{(x) n}` and `H^{(n)}`.
#[derive(Debug, Clone)]
pub struct WeightedLevelTable<T> {
    pub n: usize,
    pub dim: usize,
    pub entries: Vec<LevelEntry<T>>,
}

impl<T: Real> WeightedLevelTable<T> {
    /// `sum exp(log_mult + log_prob)`; 1 for a normalized spectrum.
    pub fn total_mass(&self) -> T {
        self.entries
            .iter()
            .filter(|e| e.log_prob > T::neg_infinity())
            .map(|e| (e.log_mult + e.log_prob).exp())
            .sum()
    }

    /// `sum exp(log_mult)`; `d^n`.
    pub fn level_count(&self) -> T {
        self.entries.iter().map(|e| e.log_mult.exp()).sum()
    }
}

fn validate_spectrum<T: Real>(spectrum: &[T], battery: &BatterySpec<T>) -> Result<(), Error> {
    if spectrum.len() != battery.dim() {
        return Err(Error::DimensionMismatch {
            expected: battery.dim(),
            found: spectrum.len(),
        });
    }
    if let Some(j) = spectrum.iter().position(|&r| !(r >= T::zero()) || !r.is_finite()) {
        return Err(Error::InvalidState(format!(
            "spectrum entry {j} is negative or not finite"
        )));
    }
    let total: T = spectrum.iter().copied().sum();
    if !((total - T::one()).abs() <= T::resolvable(1e-10)) {
        return Err(Error::InvalidState(format!("spectrum must sum to 1, got {total}")));
    }
    Ok(())
}

fn check_cap(n: usize, parts: usize, cap: u128) -> Result<(), Error> {
    let count = composition_count(n, parts);
    if count > cap {
        return Err(Error::CapExceeded {
            n,
            count,
            cap,
            largest_feasible: largest_feasible_n(parts, cap),
        });
    }
    Ok(())
}

pub fn build_level_table<T: Real>(
    spectrum: &[T],
    battery: &BatterySpec<T>,
    n: usize,
    config: &EnsembleConfig,
) -> Result<WeightedLevelTable<T>, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of copies must be at least 1".into()));
    }
    validate_spectrum(spectrum, battery)?;
    let d = battery.dim();
    check_cap(n, d, config.max_compositions)?;

    let log_fact = log_factorials::<T>(n);
    let log_r: Vec<T> = spectrum
        .iter()
        .map(|&r| if r > T::zero() { r.ln() } else { T::neg_infinity() })
        .collect();
    let levels = battery.energies();

    let capacity = usize::try_from(composition_count(n, d)).unwrap_or(0);
    let mut entries = Vec::with_capacity(capacity);
    let mut counts = vec![0usize; d];
    counts[0] = n;
    loop {
        let mut log_prob = T::zero();
        let mut probability = T::one();
        let mut total_energy = T::zero();
        for j in 0..d {
            let k = counts[j];
            if k == 0 {
                continue;
            }
            let kf = T::from_usize_lossy(k);
            log_prob += kf * log_r[j];
            probability *= spectrum[j].powi(k.min(i32::MAX as usize) as i32);
            total_energy += kf * levels[j];
        }
        entries.push(LevelEntry {
            log_prob,
            probability,
            energy: total_energy,
            log_mult: log_multinomial(&log_fact, &counts),
        });
        if !advance_composition(&mut counts) {
            break;
        }
    }
    Ok(WeightedLevelTable { n, dim: d, entries })
}

/// `ln(exp(a) - exp(b))` for `a >= b`.
fn log_sub<T: Real>(a: T, b: T) -> T {
    if b >= a {
        return T::neg_infinity();
    }
    a + (-(b - a).exp()).ln_1p()
}

/// `exp(log_count) * probability`, using the linear probability while it is
/// a normal number so single-state groups reproduce `r_j` bit for bit.
fn group_mass<T: Real>(log_count: T, entry: &LevelEntry<T>) -> T {
    if entry.probability.is_normal() {
        log_count.exp() * entry.probability
    } else {
        (log_count + entry.log_prob).exp()
    }
}

/// `(1/n) tr(sigma_{rho^{(x) n}} H^{(n)})` from the compressed table.
///
/// Group sizes are tracked as logarithms, so `n` is limited only by the
/// enumeration cap. Classes of zero probability would be matched with the
/// highest energies and contribute nothing; they are dropped.
pub fn passive_energy_per_copy<T: Real>(table: &WeightedLevelTable<T>) -> T {
    let mut by_prob: Vec<&LevelEntry<T>> = table
        .entries
        .iter()
        .filter(|e| e.log_prob > T::neg_infinity())
        .collect();
    by_prob.sort_by(|a, b| {
        b.log_prob
            .partial_cmp(&a.log_prob)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal))
    });
    let mut by_energy: Vec<&LevelEntry<T>> = table.entries.iter().collect();
    by_energy.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal));

    let (mut i, mut j) = (0, 0);
    let mut rem_p = match by_prob.first() {
        Some(e) => e.log_mult,
        None => return T::zero(),
    };
    let mut rem_e = by_energy[0].log_mult;
    let mut acc = T::zero();
    while i < by_prob.len() && j < by_energy.len() {
        let p = by_prob[i];
        let level = by_energy[j].energy;
        if rem_p <= rem_e {
            acc += group_mass(rem_p, p) * level;
            rem_e = log_sub(rem_e, rem_p);
            i += 1;
            if let Some(next) = by_prob.get(i) {
                rem_p = next.log_mult;
            }
            if rem_e == T::neg_infinity() {
                j += 1;
                if let Some(next) = by_energy.get(j) {
                    rem_e = next.log_mult;
                }
            }
        } else {
            acc += group_mass(rem_e, p) * level;
            rem_p = log_sub(rem_p, rem_e);
            j += 1;
            if let Some(next) = by_energy.get(j) {
                rem_e = next.log_mult;
            }
        }
    }
    acc / T::from_usize_lossy(table.n)
}

/// Expands all `d^n` product probabilities and sum energies, sorts both and
/// returns the per-copy dot product.
pub fn brute_force_oracle<T: Real>(
    spectrum: &[T],
    battery: &BatterySpec<T>,
    n: usize,
    config: &EnsembleConfig,
) -> Result<T, Error> {
    if n == 0 {
        return Err(Error::InvalidArgument("number of copies must be at least 1".into()));
    }
    validate_spectrum(spectrum, battery)?;
    let d = battery.dim();
    let levels = (d as u128).checked_pow(n as u32).filter(|_| n <= u32::MAX as usize);
    match levels {
        Some(count) if count <= config.max_oracle_levels => {}
        other => {
            let count = other.unwrap_or(u128::MAX);
            let mut largest = 0;
            while (d as u128)
                .checked_pow(largest as u32 + 1)
                .is_some_and(|c| c <= config.max_oracle_levels)
            {
                largest += 1;
            }
            return Err(Error::CapExceeded {
                n,
                count,
                cap: config.max_oracle_levels,
                largest_feasible: largest,
            });
        }
    }

    let mut probs = vec![T::one()];
    for _ in 0..n {
        probs = probs
            .iter()
            .flat_map(|&base| spectrum.iter().map(move |&r| base * r))
            .collect();
    }
    let mut energies = battery.sum_levels(n);
    probs.sort_by(|a, b| b.partial_cmp(a).unwrap_or(std::cmp::Ordering::Equal));
    energies.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    let total: T = probs.iter().zip(&energies).map(|(&p, &e)| p * e).sum();
    Ok(total / T::from_usize_lossy(n))
}

/// Per-copy passive energies `e(n)` and extractable work `w(n)` for
/// `n = 1..=n_max`.
#[derive(Debug, Clone)]
pub struct EnsembleCurve<T> {
    /// `e(n)` at index `n - 1`.
    pub per_copy_energy: Vec<T>,
    /// `w(n) = tr(rho H) - e(n)` at index `n - 1`.
    pub per_copy_work: Vec<T>,
    /// `tr(omega_beta_bar H)`.
    pub asymptote: T,
    pub initial_per_copy_energy: T,
    pub gibbs: GibbsMatch<T>,
}

impl<T: Real> EnsembleCurve<T> {
    pub fn n_max(&self) -> usize {
        self.per_copy_energy.len()
    }

    pub fn e(&self, n: usize) -> T {
        self.per_copy_energy[n - 1]
    }

    pub fn w(&self, n: usize) -> T {
        self.per_copy_work[n - 1]
    }

    /// `e(n) - asymptote`.
    pub fn gap(&self, n: usize) -> T {
        self.e(n) - self.asymptote
    }
}

pub fn curve<T: Real>(
    state: &QuantumState<T>,
    battery: &BatterySpec<T>,
    n_max: usize,
) -> Result<EnsembleCurve<T>, Error> {
    curve_with(
        state,
        battery,
        n_max,
        &EnsembleConfig::default(),
        T::resolvable(DEFAULT_ENTROPY_TOL),
    )
}

/// Points are computed in parallel; each is a pure function of `n`, so the
/// result is identical to a sequential run.
pub fn curve_with<T: Real>(
    state: &QuantumState<T>,
    battery: &BatterySpec<T>,
    n_max: usize,
    config: &EnsembleConfig,
    entropy_tol: T,
) -> Result<EnsembleCurve<T>, Error> {
    if n_max == 0 {
        return Err(Error::InvalidArgument("n_max must be at least 1".into()));
    }
    let initial = energy(state, battery)?;
    check_cap(n_max, battery.dim(), config.max_compositions)?;
    let spectrum = state.spectrum();
    let per_copy_energy = (1..=n_max)
        .into_par_iter()
        .map(|n| build_level_table(spectrum, battery, n, config).map(|t| passive_energy_per_copy(&t)))
        .collect::<Result<Vec<T>, Error>>()?;
    let gibbs = match_entropy(battery, entropy(state), entropy_tol)?;
    Ok(EnsembleCurve {
        per_copy_work: per_copy_energy.iter().map(|&e| initial - e).collect(),
        per_copy_energy,
        asymptote: gibbs.gibbs_energy,
        initial_per_copy_energy: initial,
        gibbs,
    })
}

/// Finite-n diagnostic for complete passivity.
#[derive(Debug, Clone)]
pub struct CompletePassivityReport<T> {
    /// No per-copy work above `tol` for any `n <= n_max`.
    pub is_gibbs_like: bool,
    pub first_active_n: Option<usize>,
    /// Least-squares `beta` of `ln p_j = -beta eps_j - ln Z` over the
    /// populated levels; `+inf` when only the ground level is populated.
    pub fit_beta: T,
    /// RMS residual of that fit.
    pub fit_residual: T,
    /// Levels left out of the fit because their population is zero.
    pub empty_levels: usize,
}

pub fn complete_passivity_check<T: Real>(
    state: &QuantumState<T>,
    battery: &BatterySpec<T>,
    n_max: usize,
    tol: T,
    config: &EnsembleConfig,
) -> Result<CompletePassivityReport<T>, Error> {
    if n_max < 2 {
        return Err(Error::InvalidArgument(
            "complete passivity check needs n_max >= 2".into(),
        ));
    }
    let off_diagonal = state.coherence();
    if off_diagonal > T::resolvable(1e-10) {
        return Err(Error::NotDiagonal {
            off_diagonal: off_diagonal.as_f64(),
        });
    }
    let c = curve_with(state, battery, n_max, config, T::resolvable(DEFAULT_ENTROPY_TOL))?;
    let first_active_n = (1..=n_max).find(|&n| c.w(n) > tol);
    let (fit_beta, fit_residual, empty_levels) = fit_gibbs_form(&state.populations(), battery.energies());
    Ok(CompletePassivityReport {
        is_gibbs_like: first_active_n.is_none(),
        first_active_n,
        fit_beta,
        fit_residual,
        empty_levels,
    })
}

fn fit_gibbs_form<T: Real>(populations: &[T], energies: &[T]) -> (T, T, usize) {
    let points: Vec<(T, T)> = populations
        .iter()
        .zip(energies)
        .filter(|(&p, _)| p > T::zero())
        .map(|(&p, &e)| (e, p.ln()))
        .collect();
    let empty = populations.len() - points.len();
    if points.len() < 2 {
        return (T::infinity(), T::zero(), empty);
    }
    let m = T::from_usize_lossy(points.len());
    let mean_e = points.iter().map(|p| p.0).sum::<T>() / m;
    let mean_l = points.iter().map(|p| p.1).sum::<T>() / m;
    let sxx: T = points.iter().map(|p| (p.0 - mean_e) * (p.0 - mean_e)).sum();
    let sxy: T = points.iter().map(|p| (p.0 - mean_e) * (p.1 - mean_l)).sum();
    let slope = sxy / sxx;
    let rss: T = points
        .iter()
        .map(|p| {
            let r = p.1 - (mean_l + slope * (p.0 - mean_e));
            r * r
        })
        .sum();
    (-slope, (rss / m).sqrt(), empty)
}
