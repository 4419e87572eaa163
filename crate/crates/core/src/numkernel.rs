//! Dense complex linear algebra for small Hermitian problems.
//!
//! Matrices are square and stored row-major. The eigensolver is a cyclic
//! complex Jacobi iteration, which is accurate to working precision for the
//! dimensions this crate deals with (a few hundred at most).

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;

use crate::error::Error;
use crate::scalar::Real;

/// Hermiticity tolerance applied by [`eig_hermitian`] and friends.
pub const DEFAULT_HERMITIAN_TOL: f64 = 1e-10;
/// Sweep budget of the Jacobi iteration.
pub const DEFAULT_MAX_SWEEPS: usize = 100;

/// Square matrix of complex entries.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix<T> {
    dim: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> ComplexMatrix<T> {
    /// Builds a `dim x dim` matrix from row-major entries.
    pub fn new(dim: usize, data: Vec<Complex<T>>) -> Result<Self, Error> {
        if dim == 0 {
            return Err(Error::InvalidArgument("matrix dimension must be at least 1".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: data.len(),
            });
        }
        Ok(Self { dim, data })
    }

    /// Builds a matrix from separate real and imaginary row arrays.
    pub fn from_parts(re: &[Vec<T>], im: &[Vec<T>]) -> Result<Self, Error> {
        let dim = re.len();
        if im.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: im.len(),
            });
        }
        let mut data = Vec::with_capacity(dim * dim);
        for (row_re, row_im) in re.iter().zip(im) {
            for row in [row_re, row_im] {
                if row.len() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: row.len(),
                    });
                }
            }
            data.extend(row_re.iter().zip(row_im).map(|(&a, &b)| Complex::new(a, b)));
        }
        Self::new(dim, data)
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        assert!(dim > 0, "matrix dimension must be at least 1");
        let data = (0..dim * dim).map(|k| f(k / dim, k % dim)).collect();
        Self { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_fn(dim, |_, _| Complex::new(T::zero(), T::zero()))
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_fn(dim, |i, j| {
            if i == j {
                Complex::new(T::one(), T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_real_diagonal(diagonal: &[T]) -> Self {
        Self::from_fn(diagonal.len(), |i, j| {
            if i == j {
                Complex::new(diagonal[i], T::zero())
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    pub fn from_diagonal(diagonal: &[Complex<T>]) -> Self {
        Self::from_fn(diagonal.len(), |i, j| {
            if i == j {
                diagonal[i]
            } else {
                Complex::new(T::zero(), T::zero())
            }
        })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    /// Real parts of the diagonal.
    pub fn real_diagonal(&self) -> Vec<T> {
        (0..self.dim).map(|i| self[(i, i)].re).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.dim).fold(Complex::new(T::zero(), T::zero()), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, factor: Complex<T>) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * factor).collect(),
        }
    }

    pub fn scale_real(&self, factor: T) -> Self {
        self.scale(Complex::new(factor, T::zero()))
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> T {
        self.data.iter().map(|z| z.norm()).fold(T::zero(), T::max)
    }

    /// Largest entry modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &Self) -> T {
        assert_eq!(self.dim, other.dim, "dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (*a - *b).norm())
            .fold(T::zero(), T::max)
    }

    /// Largest off-diagonal entry modulus.
    pub fn max_off_diagonal(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in 0..self.dim {
                if i != j {
                    worst = worst.max(self[(i, j)].norm());
                }
            }
        }
        worst
    }

    /// `max_ij |M_ij - conj(M_ji)|`.
    pub fn hermitian_deviation(&self) -> T {
        let mut worst = T::zero();
        for i in 0..self.dim {
            for j in i..self.dim {
                let d = (self[(i, j)] - self[(j, i)].conj()).norm();
                if d.is_nan() {
                    return d;
                }
                worst = worst.max(d);
            }
        }
        worst
    }

    /// `max |U^dagger U - I|`.
    pub fn unitarity_residual(&self) -> T {
        (&self.adjoint() * self).max_abs_diff(&Self::identity(self.dim))
    }

    /// `self * other * self^dagger`.
    pub fn conjugate(&self, other: &Self) -> Self {
        &(self * other) * &self.adjoint()
    }

    /// Kronecker product, with `self` as the slow (left) factor.
    pub fn kron(&self, other: &Self) -> Self {
        let (a, b) = (self.dim, other.dim);
        Self::from_fn(a * b, |i, j| self[(i / b, j / b)] * other[(i % b, j % b)])
    }
}

impl<T> Index<(usize, usize)> for ComplexMatrix<T> {
    type Output = Complex<T>;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        &self.data[i * self.dim + j]
    }
}

impl<T> IndexMut<(usize, usize)> for ComplexMatrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        &mut self.data[i * self.dim + j]
    }
}

impl<T: Real> Mul for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn mul(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        let n = self.dim;
        let mut out = ComplexMatrix::zeros(n);
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a.re == T::zero() && a.im == T::zero() {
                    continue;
                }
                for j in 0..n {
                    out.data[i * n + j] += a * rhs.data[k * n + j];
                }
            }
        }
        out
    }
}

impl<T: Real> Add for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn add(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a + *b).collect(),
        }
    }
}

impl<T: Real> Sub for &ComplexMatrix<T> {
    type Output = ComplexMatrix<T>;

    fn sub(self, rhs: &ComplexMatrix<T>) -> ComplexMatrix<T> {
        assert_eq!(self.dim, rhs.dim, "dimension mismatch");
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| *a - *b).collect(),
        }
    }
}

impl<T: fmt::Debug> fmt::Debug for ComplexMatrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{})", self.dim, self.dim)?;
        for row in self.data.chunks(self.dim.max(1)) {
            let row: Vec<String> = row.iter().map(|z| format!("{z:?}")).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

/// True iff `max_ij |M_ij - conj(M_ji)| <= tol`.
pub fn is_hermitian<T: Real>(m: &ComplexMatrix<T>, tol: T) -> bool {
    m.hermitian_deviation() <= tol
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct HermitianEig<T> {
    /// Ascending.
    pub eigenvalues: Vec<T>,
    /// Unitary; column `j` pairs with `eigenvalues[j]`.
    pub eigenvectors: ComplexMatrix<T>,
}

impl<T: Real> HermitianEig<T> {
    /// `Q diag(f(lambda)) Q^dagger`.
    pub fn map_spectrum(&self, f: impl Fn(T) -> Complex<T>) -> ComplexMatrix<T> {
        let q = &self.eigenvectors;
        let values: Vec<Complex<T>> = self.eigenvalues.iter().map(|&l| f(l)).collect();
        let n = q.dim();
        ComplexMatrix::from_fn(n, |i, j| {
            (0..n).fold(Complex::new(T::zero(), T::zero()), |acc, k| {
                acc + q[(i, k)] * values[k] * q[(j, k)].conj()
            })
        })
    }

    /// `Q diag(lambda) Q^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix<T> {
        self.map_spectrum(|l| Complex::new(l, T::zero()))
    }
}

/// Tolerances for the Hermitian eigensolver.
#[derive(Debug, Clone, Copy)]
pub struct EigConfig<T> {
    pub hermitian_tol: T,
    pub max_sweeps: usize,
}

impl<T: Real> Default for EigConfig<T> {
    fn default() -> Self {
        Self {
            hermitian_tol: T::resolvable(DEFAULT_HERMITIAN_TOL),
            max_sweeps: DEFAULT_MAX_SWEEPS,
        }
    }
}

pub fn eig_hermitian<T: Real>(m: &ComplexMatrix<T>) -> Result<HermitianEig<T>, Error> {
    eig_hermitian_with(m, &EigConfig::default())
}

/// Cyclic complex Jacobi diagonalization.
///
/// Each rotation first removes the phase of `a_pq` with a diagonal unitary and
/// then applies the real symmetric Jacobi rotation to the resulting real 2x2
/// block. Eigenvalues are returned in ascending order.
pub fn eig_hermitian_with<T: Real>(m: &ComplexMatrix<T>, config: &EigConfig<T>) -> Result<HermitianEig<T>, Error> {
    let deviation = m.hermitian_deviation();
    if !(deviation <= config.hermitian_tol) {
        return Err(Error::NotHermitian {
            deviation: deviation.as_f64(),
            tol: config.hermitian_tol.as_f64(),
        });
    }

    let n = m.dim();
    // Symmetrize so that rounding in the input cannot bias the diagonal.
    let half = T::lit(0.5);
    let mut a = ComplexMatrix::from_fn(n, |i, j| {
        if i == j {
            Complex::new(m[(i, i)].re, T::zero())
        } else {
            (m[(i, j)] + m[(j, i)].conj()).scale(half)
        }
    });
    let mut v = ComplexMatrix::<T>::identity(n);

    let scale = frobenius(&a);
    let target = T::epsilon() * scale;
    let mut converged = n == 1 || off_norm(&a) <= target;
    let mut sweeps = 0;
    while !converged {
        if sweeps == config.max_sweeps {
            return Err(Error::NoConvergence {
                sweeps,
                off_norm: off_norm(&a).as_f64(),
            });
        }
        sweeps += 1;
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        converged = off_norm(&a) <= target;
    }

    let mut order: Vec<usize> = (0..n).collect();
    let diag = a.real_diagonal();
    order.sort_by(|&i, &j| diag[i].partial_cmp(&diag[j]).unwrap_or(std::cmp::Ordering::Equal));
    let eigenvalues = order.iter().map(|&k| diag[k]).collect();
    let eigenvectors = ComplexMatrix::from_fn(n, |i, j| v[(i, order[j])]);
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors,
    })
}

fn frobenius<T: Real>(a: &ComplexMatrix<T>) -> T {
    a.as_slice().iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
}

fn off_norm<T: Real>(a: &ComplexMatrix<T>) -> T {
    let n = a.dim();
    let mut acc = T::zero();
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate<T: Real>(a: &mut ComplexMatrix<T>, v: &mut ComplexMatrix<T>, p: usize, q: usize) {
    let apq = a[(p, q)];
    let b = apq.norm();
    if b == T::zero() {
        return;
    }
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    // Skip rotations that cannot change the diagonal at working precision.
    let tiny = T::epsilon() * T::epsilon();
    if b <= tiny * (app.abs() + aqq.abs()) {
        a[(p, q)] = Complex::new(T::zero(), T::zero());
        a[(q, p)] = Complex::new(T::zero(), T::zero());
        return;
    }

    // phase = a_pq / |a_pq| = e^{i phi}
    let phase = apq.unscale(b);
    let theta = (aqq - app) / (T::lit(2.0) * b);
    let t = {
        let mag = T::one() / (theta.abs() + (theta * theta + T::one()).sqrt());
        if theta < T::zero() {
            -mag
        } else {
            mag
        }
    };
    let c = T::one() / (t * t + T::one()).sqrt();
    let s = t * c;

    // G = D R with D = diag(.., 1_p, .., e^{-i phi}_q, ..), R the real rotation
    // [[c, s], [-s, c]] on (p, q). A <- G^dagger A G, V <- V G.
    let g_pp = Complex::new(c, T::zero());
    let g_pq = Complex::new(s, T::zero());
    let g_qp = phase.conj().scale(-s);
    let g_qq = phase.conj().scale(c);

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * g_pp + akq * g_qp;
        a[(k, q)] = akp * g_pq + akq * g_qq;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = g_pp.conj() * apk + g_qp.conj() * aqk;
        a[(q, k)] = g_pq.conj() * apk + g_qq.conj() * aqk;
    }
    a[(p, q)] = Complex::new(T::zero(), T::zero());
    a[(q, p)] = Complex::new(T::zero(), T::zero());
    a[(p, p)] = Complex::new(a[(p, p)].re, T::zero());
    a[(q, q)] = Complex::new(a[(q, q)].re, T::zero());

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * g_pp + vkq * g_qp;
        v[(k, q)] = vkp * g_pq + vkq * g_qq;
    }
}

/// `exp(-i t A)` for Hermitian `A`, via `Q diag(exp(-i t lambda)) Q^dagger`.
pub fn expm_hermitian_generator<T: Real>(a: &ComplexMatrix<T>, t: T) -> Result<ComplexMatrix<T>, Error> {
    let eig = eig_hermitian(a)?;
    Ok(eig.map_spectrum(|lambda| {
        let phase = -t * lambda;
        Complex::new(phase.cos(), phase.sin())
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    fn pauli_x() -> ComplexMatrix<f64> {
        ComplexMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)]).unwrap()
    }

    #[test]
    fn hermiticity_checks() {
        assert!(is_hermitian(&ComplexMatrix::<f64>::identity(3), 0.0));
        let anti = ComplexMatrix::new(2, vec![c(0., 0.), c(0., 1.), c(0., 1.), c(0., 0.)]).unwrap();
        assert!(!is_hermitian(&anti, 1e-12));
        let pauli_y = ComplexMatrix::new(2, vec![c(0., 0.), c(0., 1.), c(0., -1.), c(0., 0.)]).unwrap();
        assert!(is_hermitian(&pauli_y, 0.0));
    }

    #[test]
    fn constructor_rejects_bad_shapes() {
        assert!(matches!(
            ComplexMatrix::<f64>::new(2, vec![c(0., 0.); 3]),
            Err(Error::DimensionMismatch { expected: 4, found: 3 })
        ));
        assert!(ComplexMatrix::<f64>::new(0, vec![]).is_err());
        let ragged = ComplexMatrix::<f64>::from_parts(&[vec![1.0, 0.0], vec![0.0]], &[vec![0.0; 2], vec![0.0; 2]]);
        assert!(ragged.is_err());
    }

    #[test]
    fn diagonal_input_sorts_eigenvalues() {
        let eig = eig_hermitian(&ComplexMatrix::<f64>::from_real_diagonal(&[3.0, 1.0, 2.0])).unwrap();
        assert_eq!(eig.eigenvalues, vec![1.0, 2.0, 3.0]);
        assert_abs_diff_eq!(eig.eigenvectors[(1, 0)].re.abs(), 1.0);
    }

    #[test]
    fn pauli_x_spectrum() {
        let eig = eig_hermitian(&pauli_x()).unwrap();
        assert_abs_diff_eq!(eig.eigenvalues[0], -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.0, epsilon = 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&pauli_x()) < 1e-14);
    }

    #[test]
    fn rejects_non_hermitian_input() {
        let m = ComplexMatrix::new(2, vec![c(0., 0.), c(1., 0.), c(0., 0.), c(0., 0.)]).unwrap();
        assert!(matches!(eig_hermitian(&m), Err(Error::NotHermitian { .. })));
        let nan = ComplexMatrix::from_real_diagonal(&[f64::NAN, 1.0]);
        assert!(matches!(eig_hermitian(&nan), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn sweep_budget_is_enforced() {
        let m = ComplexMatrix::new(2, vec![c(1., 0.), c(0.3, 0.4), c(0.3, -0.4), c(2., 0.)]).unwrap();
        let config = EigConfig {
            hermitian_tol: 1e-10,
            max_sweeps: 0,
        };
        assert!(matches!(
            eig_hermitian_with(&m, &config),
            Err(Error::NoConvergence { sweeps: 0, .. })
        ));
    }

    #[test]
    fn complex_two_by_two_closed_form() {
        // [[1, 0.3+0.4i], [0.3-0.4i, 2]]: eigenvalues 1.5 -/+ sqrt(0.25 + 0.25)
        let m = ComplexMatrix::new(2, vec![c(1., 0.), c(0.3, 0.4), c(0.3, -0.4), c(2., 0.)]).unwrap();
        let eig = eig_hermitian(&m).unwrap();
        let r = 0.5f64.sqrt();
        assert_abs_diff_eq!(eig.eigenvalues[0], 1.5 - r, epsilon = 1e-14);
        assert_abs_diff_eq!(eig.eigenvalues[1], 1.5 + r, epsilon = 1e-14);
        assert!(eig.eigenvectors.unitarity_residual() < 1e-14);
        assert!(eig.reconstruct().max_abs_diff(&m) < 1e-14);
    }

    #[test]
    fn degenerate_spectrum_is_accepted() {
        let m = ComplexMatrix::from_real_diagonal(&[2.0, 2.0, 5.0]);
        let eig = eig_hermitian(&m).unwrap();
        assert_eq!(eig.eigenvalues, vec![2.0, 2.0, 5.0]);
    }

    #[test]
    fn expm_of_zero_and_periodic_generators() {
        let z = expm_hermitian_generator(&ComplexMatrix::<f64>::zeros(3), 7.5).unwrap();
        assert!(z.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);

        let h = ComplexMatrix::from_real_diagonal(&[0.0, 1.0, 3.0]);
        let u = expm_hermitian_generator(&h, 2.0 * std::f64::consts::PI).unwrap();
        assert!(u.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);
    }

    #[test]
    fn expm_pauli_x_quarter_turn() {
        // exp(-i theta X) = cos(theta) I - i sin(theta) X at theta = pi/2
        let u = expm_hermitian_generator(&pauli_x(), std::f64::consts::FRAC_PI_2).unwrap();
        let expected = pauli_x().scale(c(0., -1.));
        assert!(u.max_abs_diff(&expected) < 1e-10);
    }

    #[test]
    fn kron_of_identities() {
        let a = ComplexMatrix::<f64>::identity(2);
        let b = ComplexMatrix::<f64>::identity(3);
        assert_eq!(a.kron(&b), ComplexMatrix::identity(6));
        let x = pauli_x().kron(&ComplexMatrix::identity(2));
        assert_eq!(x[(0, 2)], c(1., 0.));
        assert_eq!(x[(1, 3)], c(1., 0.));
        assert_eq!(x[(0, 1)], c(0., 0.));
    }

    #[test]
    fn single_precision_decomposition() {
        let m = ComplexMatrix::<f32>::new(
            2,
            vec![
                Complex::new(1., 0.),
                Complex::new(0.3, 0.4),
                Complex::new(0.3, -0.4),
                Complex::new(2., 0.),
            ],
        )
        .unwrap();
        let eig = eig_hermitian(&m).unwrap();
        assert!((eig.eigenvalues[1] - (1.5 + 0.5f32.sqrt())).abs() < 1e-5);
    }
}
