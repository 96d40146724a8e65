//! Dense complex-matrix foundation: Hermitian and special unitary wrappers,
//! the trace inner product, spectral exponential and logarithm, and an
//! orthonormal traceless basis of su(N).

use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::linalg::{Schur, SymmetricEigen};
use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::tolerances::Tolerances;

pub type ComplexMatrix = DMatrix<Complex64>;

const I: Complex64 = Complex64::new(0.0, 1.0);

fn real(x: f64) -> Complex64 {
    Complex64::new(x, 0.0)
}

pub(crate) fn check_square_finite(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare {
            rows: m.nrows(),
            cols: m.ncols(),
        });
    }
    if m.nrows() == 0 {
        return Err(Error::InvalidArgument("empty matrix".into()));
    }
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(())
}

/// Frobenius distance between two matrices of equal shape.
pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> f64 {
    (a - b).norm()
}

/// N×N Hermitian matrix. The stored matrix is exactly Hermitian.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    matrix: ComplexMatrix,
    trace: f64,
}

/// Checks hermiticity within `tol` (relative to max(1, ‖M‖_F)) and
/// returns the symmetrized operator (M + M†)/2.
pub fn make_hermitian(m: &ComplexMatrix, tol: f64) -> Result<HermitianOperator> {
    check_square_finite(m)?;
    let deviation = (m - m.adjoint()).norm() / m.norm().max(1.0);
    if deviation > tol {
        return Err(Error::NotHermitian { deviation });
    }
    Ok(HermitianOperator::symmetrize(m.clone()))
}

/// tr(AB) for Hermitian A, B; always real.
pub fn trace_inner(a: &HermitianOperator, b: &HermitianOperator) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    Ok(a.inner(b))
}

// The cached trace is derived data and does not take part in equality.
impl PartialEq for HermitianOperator {
    fn eq(&self, other: &Self) -> bool {
        self.matrix == other.matrix
    }
}

impl HermitianOperator {
    /// Wraps (M + M†)/2 without a tolerance check.
    pub(crate) fn symmetrize(m: ComplexMatrix) -> Self {
        let adj = m.adjoint();
        let matrix = (m + adj) * real(0.5);
        let trace = matrix.diagonal().iter().map(|z| z.re).sum();
        Self { matrix, trace }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::zeros(dim, dim),
            trace: 0.0,
        }
    }

    /// Real diagonal operator.
    pub fn diagonal(values: &[f64]) -> Self {
        let n = values.len();
        Self::symmetrize(ComplexMatrix::from_fn(n, n, |r, c| {
            if r == c {
                real(values[r])
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Pauli matrices σx, σy, σz.
    pub fn pauli_x() -> Self {
        Self::symmetrize(ComplexMatrix::from_row_slice(
            2,
            2,
            &[real(0.0), real(1.0), real(1.0), real(0.0)],
        ))
    }

    pub fn pauli_y() -> Self {
        Self::symmetrize(ComplexMatrix::from_row_slice(2, 2, &[real(0.0), -I, I, real(0.0)]))
    }

    pub fn pauli_z() -> Self {
        Self::diagonal(&[1.0, -1.0])
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.trace
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.matrix.norm()
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().all(|z| z.re == 0.0 && z.im == 0.0)
    }

    /// tr(self · other). Panics on dimension mismatch; see [`trace_inner`]
    /// for the checked form.
    pub fn inner(&self, other: &Self) -> f64 {
        assert_eq!(self.dim(), other.dim(), "trace_inner dimension mismatch");
        // tr(AB) = Σ A_jk B_kj = Σ A_jk conj(B_jk) for Hermitian B.
        self.matrix
            .iter()
            .zip(other.matrix.iter())
            .map(|(a, b)| (a * b.conj()).re)
            .sum()
    }

    /// i[A, B], which is Hermitian whenever A and B are.
    pub fn i_commutator(&self, other: &Self) -> Self {
        let c = &self.matrix * &other.matrix - &other.matrix * &self.matrix;
        Self::symmetrize(c * I)
    }

    /// Subtracts (tr/N)·1.
    pub fn traceless_part(&self) -> Self {
        let n = self.dim();
        let shift = self.trace / n as f64;
        let mut m = self.matrix.clone();
        for k in 0..n {
            m[(k, k)] -= real(shift);
        }
        Self::symmetrize(m)
    }

    /// Rescales to unit Frobenius norm. Panics on the zero operator.
    pub fn normalized(&self) -> Self {
        let norm = self.frobenius_norm();
        assert!(norm > 0.0, "cannot normalize the zero operator");
        self * (1.0 / norm)
    }

    /// Conjugation V·self·V† by a unitary V.
    pub fn conjugate_by(&self, v: &ComplexMatrix) -> Self {
        Self::symmetrize(v * &self.matrix * v.adjoint())
    }

    /// Spectral decomposition by the Hermitian eigensolver.
    pub fn eigh(&self) -> Result<Eigh> {
        let n = self.dim();
        let eig = SymmetricEigen::try_new(self.matrix.clone(), f64::EPSILON, 1000 * n.max(1))
            .ok_or(Error::EigensolverFailure)?;
        Ok(Eigh {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        })
    }

    /// Spectral decomposition for operators known to be finite and Hermitian.
    pub(crate) fn eigh_unchecked(&self) -> Eigh {
        if self.is_zero() {
            return Eigh {
                values: DVector::zeros(self.dim()),
                vectors: ComplexMatrix::identity(self.dim(), self.dim()),
            };
        }
        let eig = self.matrix.clone().symmetric_eigen();
        Eigh {
            values: eig.eigenvalues,
            vectors: eig.eigenvectors,
        }
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.eigh_unchecked().values.iter().copied().collect();
        v.sort_by(f64::total_cmp);
        v
    }
}

impl Add for &HermitianOperator {
    type Output = HermitianOperator;
    fn add(self, rhs: Self) -> HermitianOperator {
        HermitianOperator::symmetrize(&self.matrix + &rhs.matrix)
    }
}

impl Sub for &HermitianOperator {
    type Output = HermitianOperator;
    fn sub(self, rhs: Self) -> HermitianOperator {
        HermitianOperator::symmetrize(&self.matrix - &rhs.matrix)
    }
}

impl Mul<f64> for &HermitianOperator {
    type Output = HermitianOperator;
    fn mul(self, rhs: f64) -> HermitianOperator {
        HermitianOperator {
            matrix: &self.matrix * real(rhs),
            trace: self.trace * rhs,
        }
    }
}

impl Neg for &HermitianOperator {
    type Output = HermitianOperator;
    fn neg(self) -> HermitianOperator {
        self * -1.0
    }
}

/// Eigendecomposition H = V diag(values) V†.
#[derive(Debug, Clone)]
pub struct Eigh {
    pub values: DVector<f64>,
    pub vectors: ComplexMatrix,
}

impl Eigh {
    /// e^{−iHt}.
    pub fn propagator(&self, t: f64) -> ComplexMatrix {
        let phases = self.values.map(|e| Complex64::from_polar(1.0, -e * t));
        let mut scaled = self.vectors.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= phases[k];
        }
        scaled * self.vectors.adjoint()
    }
}

/// N×N unitary with unit determinant.
#[derive(Debug, Clone, PartialEq)]
pub struct SpecialUnitary {
    matrix: ComplexMatrix,
}

impl SpecialUnitary {
    /// Validates unitarity and unit determinant against `tol`.
    pub fn new(m: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        check_square_finite(&m)?;
        let n = m.nrows();
        let deviation = (m.adjoint() * &m - ComplexMatrix::identity(n, n)).norm();
        if deviation > tol.unitarity {
            return Err(Error::NotUnitary { deviation });
        }
        let det = m.determinant();
        let deviation = (det - real(1.0)).norm();
        if deviation > tol.determinant {
            return Err(Error::NotSpecial { deviation });
        }
        Ok(Self { matrix: m })
    }

    pub(crate) fn from_matrix_unchecked(matrix: ComplexMatrix) -> Self {
        Self { matrix }
    }

    pub fn identity(dim: usize) -> Self {
        Self {
            matrix: ComplexMatrix::identity(dim, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
        }
    }

    /// Frobenius distance ‖self − other‖_F.
    pub fn distance(&self, other: &Self) -> f64 {
        frobenius_distance(&self.matrix, &other.matrix)
    }
}

impl Mul for &SpecialUnitary {
    type Output = SpecialUnitary;
    fn mul(self, rhs: Self) -> SpecialUnitary {
        SpecialUnitary {
            matrix: &self.matrix * &rhs.matrix,
        }
    }
}

/// e^{−iHt} for an arbitrary Hermitian H, without determinant bookkeeping.
pub fn exp_i(h: &HermitianOperator, t: f64) -> Result<ComplexMatrix> {
    if h.is_zero() {
        return Ok(ComplexMatrix::identity(h.dim(), h.dim()));
    }
    Ok(h.eigh()?.propagator(t))
}

/// e^{−iHt} by Hermitian eigendecomposition. A trace component would give
/// the result determinant e^{−it·tr H}; that phase is reported as
/// [`Error::DeterminantPhase`] instead of being dropped.
pub fn unitary_exp(h: &HermitianOperator, t: f64) -> Result<SpecialUnitary> {
    let phase = wrap_phase(-t * h.trace());
    if phase.abs() > Tolerances::DEFAULT.determinant {
        return Err(Error::DeterminantPhase { phase });
    }
    Ok(SpecialUnitary::from_matrix_unchecked(exp_i(h, t)?))
}

/// Maps an angle to (−π, π].
fn wrap_phase(x: f64) -> f64 {
    let mut y = x.rem_euclid(2.0 * PI);
    if y > PI {
        y -= 2.0 * PI;
    }
    y
}

/// Eigenvectors and eigenvalues of a unitary matrix.
///
/// The Hermitian matrices (e^{−iβ}U − e^{iβ}U†)/2i share U's eigenvectors
/// and are diagonalized accurately even for tightly clustered spectra, where
/// complex Schur loses digits. A rotation β is accepted when Q†UQ comes out
/// diagonal; Schur is the last resort.
fn unitary_eigen(u: &ComplexMatrix) -> Result<(ComplexMatrix, Vec<Complex64>)> {
    let n = u.nrows();
    let mut best: Option<(f64, ComplexMatrix, ComplexMatrix)> = None;
    for beta in [0.0, 0.5 * PI, 0.3, 1.1, 2.0, 2.7] {
        let rot = Complex64::from_polar(1.0, -beta);
        let h = (u * rot - u.adjoint() * rot.conj()) * Complex64::new(0.0, -0.5);
        let Some(eig) = SymmetricEigen::try_new(h, f64::EPSILON, 1000 * n.max(1)) else {
            continue;
        };
        let q = eig.eigenvectors;
        let d = q.adjoint() * u * &q;
        let off = (0..n)
            .flat_map(|j| (0..n).filter(move |&k| k != j).map(move |k| (j, k)))
            .map(|jk| d[jk].norm_sqr())
            .sum::<f64>()
            .sqrt();
        if off <= 1e-14 * n as f64 {
            return Ok((q, d.diagonal().iter().copied().collect()));
        }
        if best.as_ref().is_none_or(|(b, _, _)| off < *b) {
            best = Some((off, q, d));
        }
    }
    if let Some((off, q, d)) = best {
        if off <= 1e-12 {
            return Ok((q, d.diagonal().iter().copied().collect()));
        }
    }
    let (q, t) = Schur::try_new(u.clone(), f64::EPSILON, 1000 * n.max(1))
        .ok_or(Error::EigensolverFailure)?
        .unpack();
    Ok((q, t.diagonal().iter().copied().collect()))
}

/// Traceless Hermitian L with e^{−iL} = U and minimal Frobenius norm among
/// the principal-branch shifts that restore tr L = 0.
pub fn traceless_log(u: &SpecialUnitary) -> Result<HermitianOperator> {
    traceless_log_with(u, &Tolerances::DEFAULT)
}

pub fn traceless_log_with(u: &SpecialUnitary, tol: &Tolerances) -> Result<HermitianOperator> {
    let n = u.dim();
    let (q, eigenvalues) = unitary_eigen(&u.matrix)?;

    // U eigenvalue e^{iφ} ↔ L eigenvalue θ = −φ, principal θ ∈ (−π, π].
    let mut theta: Vec<f64> = eigenvalues
        .iter()
        .map(|z| {
            let th = -z.arg();
            if th <= -PI {
                th + 2.0 * PI
            } else {
                th
            }
        })
        .collect();

    let sum: f64 = theta.iter().sum();
    let m = (sum / (2.0 * PI)).round() as i64;
    if m != 0 {
        let shift = -2.0 * PI * m.signum() as f64;
        let mut order: Vec<usize> = (0..n).collect();
        // m > 0: lower the largest phases; m < 0: raise the smallest.
        if m > 0 {
            order.sort_by(|&a, &b| theta[b].total_cmp(&theta[a]));
        } else {
            order.sort_by(|&a, &b| theta[a].total_cmp(&theta[b]));
        }
        let count = m.unsigned_abs() as usize;
        if count < n {
            let last = theta[order[count - 1]];
            let next = theta[order[count]];
            if (last - next).abs() <= tol.branch {
                // Minimal-norm choice is not unique inside a degenerate eigenspace.
                return Err(Error::BranchAmbiguity {
                    phase: last,
                    time: None,
                });
            }
        }
        for &k in order.iter().take(count) {
            theta[k] += shift;
        }
    }

    if let Some(&phase) = theta.iter().find(|th| (th.abs() - PI).abs() <= tol.branch) {
        return Err(Error::BranchAmbiguity { phase, time: None });
    }

    let diag = DVector::from_iterator(n, theta.iter().map(|&x| real(x)));
    let l = &q * ComplexMatrix::from_diagonal(&diag) * q.adjoint();
    Ok(HermitianOperator::symmetrize(l).traceless_part())
}

/// Orthonormal traceless Hermitian basis of su(N) (generalized Gell-Mann
/// matrices scaled to unit trace norm).
#[derive(Debug, Clone)]
pub struct AlgebraBasis {
    dim: usize,
    elements: Vec<HermitianOperator>,
}

impl AlgebraBasis {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[HermitianOperator] {
        &self.elements
    }

    /// Coordinates tr(H B_k).
    pub fn coordinates(&self, h: &HermitianOperator) -> Vec<f64> {
        self.elements.iter().map(|b| h.inner(b)).collect()
    }

    /// Σ c_k B_k.
    pub fn combine(&self, coefficients: &[f64]) -> HermitianOperator {
        assert_eq!(coefficients.len(), self.len());
        let mut m = ComplexMatrix::zeros(self.dim, self.dim);
        for (c, b) in coefficients.iter().zip(&self.elements) {
            m += b.matrix() * real(*c);
        }
        HermitianOperator::symmetrize(m)
    }
}

pub fn orthonormal_basis(n: usize) -> AlgebraBasis {
    assert!(n >= 2, "su(N) basis requires N >= 2");
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let mut elements = Vec::with_capacity(n * n - 1);
    for j in 0..n {
        for k in (j + 1)..n {
            let mut sym = ComplexMatrix::zeros(n, n);
            sym[(j, k)] = real(s);
            sym[(k, j)] = real(s);
            elements.push(HermitianOperator::symmetrize(sym));

            let mut asym = ComplexMatrix::zeros(n, n);
            asym[(j, k)] = -I * s;
            asym[(k, j)] = I * s;
            elements.push(HermitianOperator::symmetrize(asym));
        }
    }
    for l in 1..n {
        let norm = ((l * (l + 1)) as f64).sqrt();
        let mut values = vec![0.0; n];
        for v in values.iter_mut().take(l) {
            *v = 1.0 / norm;
        }
        values[l] = -(l as f64) / norm;
        elements.push(HermitianOperator::diagonal(&values));
    }
    AlgebraBasis { dim: n, elements }
}

/// Deterministic random traceless Hermitian operator with unit trace norm.
pub fn random_unit_hermitian(n: usize, seed: u64) -> HermitianOperator {
    assert!(n >= 2, "random_unit_hermitian requires N >= 2");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = ComplexMatrix::from_fn(n, n, |_, _| {
        let re: f64 = StandardNormal.sample(&mut rng);
        let im: f64 = StandardNormal.sample(&mut rng);
        Complex64::new(re, im)
    });
    HermitianOperator::symmetrize(m).traceless_part().normalized()
}

/// Deterministic random special unitary e^{−iA} with ‖A‖_F = `radius`.
pub fn random_special_unitary(n: usize, radius: f64, seed: u64) -> SpecialUnitary {
    let a = &random_unit_hermitian(n, seed) * radius;
    unitary_exp(&a, 1.0).expect("traceless generator")
}
