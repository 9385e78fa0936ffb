#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;
use qee::{ComplexMatrix, EnvState, HermitianOperator, PureDephasingModel};
use rand::Rng;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn random_complex(rng: &mut impl Rng, dim: usize) -> DMatrix<Complex64> {
    DMatrix::from_fn(dim, dim, |_, _| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
}

pub fn random_hermitian(rng: &mut impl Rng, dim: usize) -> HermitianOperator {
    let a = random_complex(rng, dim);
    let h = (&a + a.adjoint()) * c(0.5, 0.0);
    HermitianOperator::new(ComplexMatrix::new(h).unwrap()).unwrap()
}

/// Full-rank random density matrix `B B† / Tr(B B†)`.
pub fn random_state(rng: &mut impl Rng, dim: usize) -> EnvState {
    let b = random_complex(rng, dim);
    let m = &b * b.adjoint();
    let tr = m.trace();
    EnvState::new(ComplexMatrix::new(m / tr).unwrap()).unwrap()
}

pub fn random_model(rng: &mut impl Rng, dim: usize) -> PureDephasingModel {
    PureDephasingModel::rotating(random_hermitian(rng, dim), random_hermitian(rng, dim), random_hermitian(rng, dim)).unwrap()
}

/// Model whose conditional Hamiltonians commute: everything diagonal in one random basis.
pub fn random_commuting_model(rng: &mut impl Rng, dim: usize) -> PureDephasingModel {
    let basis = qee::propagator(&random_hermitian(rng, dim), 1.0).unwrap().matrix().clone();
    let diag = |rng: &mut dyn rand::RngCore| {
        let d: Vec<f64> = (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect();
        let m = ComplexMatrix::from_real_diagonal(&d).unwrap();
        HermitianOperator::new(basis.conjugate(&m)).unwrap()
    };
    PureDephasingModel::rotating(diag(rng), diag(rng), diag(rng)).unwrap()
}
