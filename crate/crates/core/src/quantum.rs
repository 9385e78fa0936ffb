//! Dense complex linear algebra for small environments.
//!
//! Hamiltonians are in rad·μs⁻¹ with ħ = 1 and times are in μs, so every
//! exponent `H·t` is a plain dimensionless phase.

use std::ops::{Add, Mul, Sub};

use nalgebra::{linalg::SymmetricEigen, DMatrix};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Relative Frobenius tolerance for accepting a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Absolute Frobenius tolerance on `U U† − 1`.
pub const UNITARY_TOL: f64 = 1e-10;
/// Largest matrix dimension produced by [`kron`] unless a cap is given.
pub const DEFAULT_DIM_CAP: usize = 4096;

#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix(DMatrix<Complex64>);

impl ComplexMatrix {
    pub fn new(m: DMatrix<Complex64>) -> Result<Self> {
        if m.nrows() == 0 || m.nrows() != m.ncols() {
            return Err(Error::validation(format!(
                "matrix must be square and non-empty, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("matrix has non-finite entries"));
        }
        Ok(ComplexMatrix(m))
    }

    /// Row-major construction; panics on a ragged or empty input.
    pub fn from_rows(rows: &[&[Complex64]]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::validation("rows must all have the matrix dimension"));
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Result<Self> {
        let n = diag.len();
        Self::new(DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    pub fn identity(dim: usize) -> Self {
        assert!(dim >= 1);
        ComplexMatrix(DMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1);
        ComplexMatrix(DMatrix::zeros(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &DMatrix<Complex64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.0[(i, j)]
    }

    pub fn adjoint(&self) -> Self {
        ComplexMatrix(self.0.adjoint())
    }

    pub fn trace(&self) -> Complex64 {
        self.0.trace()
    }

    pub fn scale(&self, s: Complex64) -> Self {
        ComplexMatrix(&self.0 * s)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `self · other · self†`
    pub fn conjugate(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &other.0 * self.0.adjoint())
    }

    pub fn commutator(&self, other: &ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &other.0 - &other.0 * &self.0)
    }

    fn check_same_dim(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::validation(format!(
                "dimension mismatch: {} vs {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(())
    }

    /// Eigenvalues of the Hermitian part `(A + A†)/2`, ascending.
    pub fn hermitian_eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = hermitian_eigen(&self.0)?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(f64::total_cmp);
        Ok(vals)
    }
}

impl<'a> Mul<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 * &rhs.0)
    }
}

impl<'a> Add<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 + &rhs.0)
    }
}

impl<'a> Sub<&'a ComplexMatrix> for &'a ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &'a ComplexMatrix) -> ComplexMatrix {
        ComplexMatrix(&self.0 - &rhs.0)
    }
}

fn hermitian_eigen(m: &DMatrix<Complex64>) -> Result<SymmetricEigen<Complex64, nalgebra::Dyn>> {
    let sym = (m + m.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::numerical("Hermitian eigendecomposition did not converge"))
}

/// A Hermitian generator, rad·μs⁻¹.
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianOperator(ComplexMatrix);

impl HermitianOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        let scale = matrix.frobenius_norm();
        let defect = (&matrix - &matrix.adjoint()).frobenius_norm();
        if defect > HERMITIAN_TOL * scale {
            return Err(Error::validation(format!(
                "operator is not Hermitian: ‖A − A†‖_F = {defect:e} (‖A‖_F = {scale:e})"
            )));
        }
        Ok(HermitianOperator(matrix))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianOperator(ComplexMatrix::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn plus(&self, other: &HermitianOperator) -> Result<HermitianOperator> {
        self.0.check_same_dim(&other.0)?;
        Ok(HermitianOperator(&self.0 + &other.0))
    }

    pub fn scaled(&self, s: f64) -> HermitianOperator {
        HermitianOperator(self.0.scale(Complex64::new(s, 0.0)))
    }
}

#[derive(Debug, Clone)]
pub struct UnitaryPropagator {
    matrix: ComplexMatrix,
    generator: Option<HermitianOperator>,
    time: f64,
}

impl UnitaryPropagator {
    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn generator(&self) -> Option<&HermitianOperator> {
        self.generator.as_ref()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn adjoint(&self) -> ComplexMatrix {
        self.matrix.adjoint()
    }
}

/// `exp(−iHt)` through the spectral decomposition of `H`.
pub fn propagator(h: &HermitianOperator, t: f64) -> Result<UnitaryPropagator> {
    if !t.is_finite() {
        return Err(Error::validation(format!("propagation time must be finite, got {t}")));
    }
    let eig = hermitian_eigen(h.matrix().as_matrix())?;
    let v = &eig.eigenvectors;
    let phases = DMatrix::from_diagonal(&eig.eigenvalues.map(|e| Complex64::from_polar(1.0, -e * t)));
    let u = ComplexMatrix::new(v * phases * v.adjoint())?;

    let defect = (&(&u * &u.adjoint()) - &ComplexMatrix::identity(u.dim())).frobenius_norm();
    if defect > UNITARY_TOL {
        return Err(Error::numerical(format!("propagator lost unitarity: {defect:e}")));
    }
    Ok(UnitaryPropagator { matrix: u, generator: Some(h.clone()), time: t })
}

pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    kron_with_cap(a, b, DEFAULT_DIM_CAP)
}

pub fn kron_with_cap(a: &ComplexMatrix, b: &ComplexMatrix, cap: usize) -> Result<ComplexMatrix> {
    let dim = a
        .dim()
        .checked_mul(b.dim())
        .ok_or(Error::Capacity { dim: usize::MAX, cap })?;
    if dim > cap {
        return Err(Error::Capacity { dim, cap });
    }
    Ok(ComplexMatrix(a.0.kronecker(&b.0)))
}

pub fn frobenius_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    Ok((a - b).frobenius_norm())
}

/// Trace norm `‖A − B‖₁` of a Hermitian difference (sum of |eigenvalues|).
pub fn trace_norm_distance(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<f64> {
    a.check_same_dim(b)?;
    let eig = hermitian_eigen((a - b).as_matrix())?;
    Ok(eig.eigenvalues.iter().map(|e| e.abs()).sum())
}

/// Spin-1/2 operators `I_j = σ_j / 2`.
pub mod spin_half {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn ix() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(0.5, 0.0)], &[c(0.5, 0.0), c(0.0, 0.0)]]).unwrap()
    }

    pub fn iy() -> ComplexMatrix {
        ComplexMatrix::from_rows(&[&[c(0.0, 0.0), c(0.0, -0.5)], &[c(0.0, 0.5), c(0.0, 0.0)]]).unwrap()
    }

    pub fn iz() -> ComplexMatrix {
        ComplexMatrix::from_real_diagonal(&[0.5, -0.5]).unwrap()
    }

    /// `h_x I_x + h_y I_y + h_z I_z`
    pub fn field(h: [f64; 3]) -> HermitianOperator {
        let m = &(&ix().scale(c(h[0], 0.0)) + &iy().scale(c(h[1], 0.0))) + &iz().scale(c(h[2], 0.0));
        HermitianOperator::new(m).unwrap()
    }

    /// `I_j` acting on spin `k` of an `n`-spin register (spin 0 is the leftmost factor).
    pub fn embed(op: &ComplexMatrix, k: usize, n: usize) -> Result<ComplexMatrix> {
        let mut out = if k == 0 { op.clone() } else { ComplexMatrix::identity(2) };
        for i in 1..n {
            let factor = if i == k { op.clone() } else { ComplexMatrix::identity(2) };
            out = kron(&out, &factor)?;
        }
        Ok(out)
    }
}

#[cfg(test)]
pub(crate) use tests::random_hermitian;
