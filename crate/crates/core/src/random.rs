//! Seeded random instances for property tests and sampling experiments.

use num_complex::Complex;
use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};

use crate::battery::{BatterySpec, QuantumState};
use crate::numkernel::ComplexMatrix;
use crate::scalar::Real;

fn gaussian<T: Real, R: Rng + ?Sized>(rng: &mut R) -> Complex<T> {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex::new(T::lit(re), T::lit(im))
}

/// Haar-distributed unitary: Gram-Schmidt on the columns of a complex
/// Gaussian matrix.
pub fn haar_unitary<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix<T> {
    let mut columns: Vec<Vec<Complex<T>>> = Vec::with_capacity(dim);
    while columns.len() < dim {
        let mut v: Vec<Complex<T>> = (0..dim).map(|_| gaussian(rng)).collect();
        // Two passes keep the basis orthonormal to working precision.
        for _ in 0..2 {
            for q in &columns {
                let overlap = q
                    .iter()
                    .zip(&v)
                    .fold(Complex::new(T::zero(), T::zero()), |acc, (a, b)| acc + a.conj() * b);
                for (vi, qi) in v.iter_mut().zip(q) {
                    *vi -= *qi * overlap;
                }
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt();
        if norm <= T::epsilon() {
            continue;
        }
        for vi in v.iter_mut() {
            *vi = vi.unscale(norm);
        }
        columns.push(v);
    }
    ComplexMatrix::from_fn(dim, |i, j| columns[j][i])
}

/// Hermitian matrix with i.i.d. Gaussian entries scaled by `scale`.
pub fn random_hermitian<T: Real, R: Rng + ?Sized>(dim: usize, scale: T, rng: &mut R) -> ComplexMatrix<T> {
    let g = ComplexMatrix::from_fn(dim, |_, _| gaussian::<T, _>(rng));
    (&g + &g.adjoint()).scale_real(scale * T::lit(0.5))
}

/// Probability vector drawn uniformly from the simplex.
pub fn random_spectrum<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Vec<T> {
    let raw: Vec<f64> = (0..dim).map(|_| Exp1.sample(rng)).collect();
    let total: f64 = raw.iter().sum();
    let mut p: Vec<T> = raw.iter().map(|&x| T::lit(x / total)).collect();
    // Put the rounding residue on the largest entry so the trace is 1 to the last bit.
    let residue = T::one() - p.iter().copied().sum::<T>();
    if let Some(max) = p
        .iter_mut()
        .max_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal))
    {
        *max += residue;
    }
    p
}

pub fn random_diagonal_state<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuantumState<T> {
    QuantumState::diagonal(random_spectrum(dim, rng)).expect("simplex sample is a valid state")
}

/// `U diag(p) U^dagger` with Haar `U` and simplex-uniform `p`.
pub fn random_state<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> QuantumState<T> {
    let p = random_spectrum::<T, _>(dim, rng);
    let u = haar_unitary(dim, rng);
    let rho = u.conjugate(&ComplexMatrix::from_real_diagonal(&p));
    QuantumState::full(rho).expect("rotated simplex sample is a valid state")
}

/// Battery with ground level 0 and gaps drawn from `[0.05, 1.05)`.
pub fn random_battery<T: Real, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> BatterySpec<T> {
    let mut level = 0.0;
    let mut energies = Vec::with_capacity(dim);
    for j in 0..dim {
        if j > 0 {
            level += 0.05 + rng.gen::<f64>();
        }
        energies.push(T::lit(level));
    }
    BatterySpec::new(energies).expect("positive gaps give a valid battery")
}
