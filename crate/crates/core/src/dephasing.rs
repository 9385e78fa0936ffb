//! Generic pure-dephasing qubit–environment models.
//!
//! The joint Hamiltonian is `Σ ε_i |i⟩⟨i| + H_E + Σ |i⟩⟨i| ⊗ V_i`. The qubit
//! pointer states never mix, so the joint evolution splits into the two
//! conditional environment propagators `w_i(t) = exp(−i(H_E + V_i)t)`.
//!
//! All coherences are reported in the rotating frame: the deterministic
//! phase `e^{−i(ε₀−ε₁)t}` is removed, so `ε₀`, `ε₁` never change a result.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quantum::{
    frobenius_distance, kron_with_cap, propagator, trace_norm_distance, ComplexMatrix, HermitianOperator,
    UnitaryPropagator, DEFAULT_DIM_CAP,
};

/// Frobenius-distance threshold above which the conditional environment
/// states are declared different.
pub const DEFAULT_QEE_TOLERANCE: f64 = 1e-9;
const STATE_TOL: f64 = 1e-12;

/// Which pointer state the qubit sits in during the delay `τ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Prep {
    Zero,
    One,
}

impl Prep {
    pub const BOTH: [Prep; 2] = [Prep::Zero, Prep::One];

    pub fn index(self) -> usize {
        match self {
            Prep::Zero => 0,
            Prep::One => 1,
        }
    }
}

impl TryFrom<u8> for Prep {
    type Error = Error;
    fn try_from(v: u8) -> Result<Prep> {
        match v {
            0 => Ok(Prep::Zero),
            1 => Ok(Prep::One),
            _ => Err(Error::validation(format!("preparation must be 0 or 1, got {v}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistanceMetric {
    #[default]
    Frobenius,
    TraceNorm,
}

#[derive(Debug, Clone)]
pub struct PureDephasingModel {
    pub eps0: f64,
    pub eps1: f64,
    h_env: HermitianOperator,
    v0: HermitianOperator,
    v1: HermitianOperator,
    h0: HermitianOperator,
    h1: HermitianOperator,
}

impl PureDephasingModel {
    pub fn new(
        eps0: f64,
        eps1: f64,
        h_env: HermitianOperator,
        v0: HermitianOperator,
        v1: HermitianOperator,
    ) -> Result<Self> {
        if !(eps0.is_finite() && eps1.is_finite()) {
            return Err(Error::validation("qubit level energies must be finite"));
        }
        let h0 = h_env.plus(&v0)?;
        let h1 = h_env.plus(&v1)?;
        Ok(PureDephasingModel { eps0, eps1, h_env, v0, v1, h0, h1 })
    }

    /// Model with `ε₀ = ε₁ = 0`.
    pub fn rotating(h_env: HermitianOperator, v0: HermitianOperator, v1: HermitianOperator) -> Result<Self> {
        Self::new(0.0, 0.0, h_env, v0, v1)
    }

    pub fn env_dim(&self) -> usize {
        self.h_env.dim()
    }

    pub fn h_env(&self) -> &HermitianOperator {
        &self.h_env
    }

    pub fn v(&self, prep: Prep) -> &HermitianOperator {
        match prep {
            Prep::Zero => &self.v0,
            Prep::One => &self.v1,
        }
    }

    /// Conditional Hamiltonian `H_i = H_E + V_i`.
    pub fn conditional_hamiltonian(&self, prep: Prep) -> &HermitianOperator {
        match prep {
            Prep::Zero => &self.h0,
            Prep::One => &self.h1,
        }
    }

    fn check_state(&self, r0: &EnvState) -> Result<()> {
        if r0.dim() != self.env_dim() {
            return Err(Error::validation(format!(
                "environment state has dimension {}, model expects {}",
                r0.dim(),
                self.env_dim()
            )));
        }
        Ok(())
    }
}

/// Environment density matrix `R(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct EnvState(ComplexMatrix);

impl EnvState {
    pub fn new(rho: ComplexMatrix) -> Result<Self> {
        let herm = (&rho - &rho.adjoint()).frobenius_norm();
        if herm > STATE_TOL {
            return Err(Error::validation(format!("density matrix not Hermitian ({herm:e})")));
        }
        let tr = rho.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > STATE_TOL {
            return Err(Error::validation(format!("density matrix trace is {tr}, expected 1")));
        }
        let min_eig = rho.hermitian_eigenvalues()?.first().copied().unwrap_or(0.0);
        if min_eig < -STATE_TOL {
            return Err(Error::validation(format!("density matrix has eigenvalue {min_eig:e}")));
        }
        Ok(EnvState(rho))
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        EnvState(ComplexMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)))
    }

    /// Spin-1/2 state `½(1 + p σ_z)`.
    pub fn spin_half(p: f64) -> Result<Self> {
        if !(-1.0..=1.0).contains(&p) {
            return Err(Error::validation(format!("polarization must lie in [-1, 1], got {p}")));
        }
        EnvState::new(ComplexMatrix::from_real_diagonal(&[0.5 * (1.0 + p), 0.5 * (1.0 - p)])?)
    }

    /// Uncorrelated product `⊗_k ρ_k`, first factor leftmost.
    pub fn product(factors: &[EnvState]) -> Result<Self> {
        let (first, rest) = factors
            .split_first()
            .ok_or_else(|| Error::validation("product state needs at least one factor"))?;
        let mut out = first.0.clone();
        for f in rest {
            out = kron_with_cap(&out, &f.0, DEFAULT_DIM_CAP)?;
        }
        Ok(EnvState(out))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntanglementReport {
    pub tau: f64,
    pub distance: f64,
    pub qee_detected: bool,
    pub tolerance_used: f64,
}

impl EntanglementReport {
    pub fn new(tau: f64, distance: f64, tolerance: f64) -> Self {
        EntanglementReport { tau, distance, qee_detected: distance > tolerance, tolerance_used: tolerance }
    }
}

fn check_time(name: &str, v: f64) -> Result<()> {
    if !(v.is_finite() && v >= 0.0) {
        return Err(Error::validation(format!("{name} must be finite and non-negative, got {v}")));
    }
    Ok(())
}

pub fn conditional_propagators(model: &PureDephasingModel, t: f64) -> Result<(UnitaryPropagator, UnitaryPropagator)> {
    Ok((propagator(&model.h0, t)?, propagator(&model.h1, t)?))
}

/// Environment state at `τ` conditional on the qubit resting in `prep`.
pub fn conditional_state(model: &PureDephasingModel, r0: &EnvState, prep: Prep, tau: f64) -> Result<ComplexMatrix> {
    model.check_state(r0)?;
    let w = propagator(model.conditional_hamiltonian(prep), tau)?;
    Ok(w.matrix().conjugate(r0.matrix()))
}

/// Compares `w₀(τ) R w₀†(τ)` with `w₁(τ) R w₁†(τ)`; QEE is generated at `τ`
/// for any pure superposition exactly when they differ.
pub fn qee_criterion(model: &PureDephasingModel, r0: &EnvState, tau: f64, tol: f64) -> Result<EntanglementReport> {
    qee_criterion_with(model, r0, tau, tol, DistanceMetric::Frobenius)
}

pub fn qee_criterion_with(
    model: &PureDephasingModel,
    r0: &EnvState,
    tau: f64,
    tol: f64,
    metric: DistanceMetric,
) -> Result<EntanglementReport> {
    check_time("tau", tau)?;
    let s0 = conditional_state(model, r0, Prep::Zero, tau)?;
    let s1 = conditional_state(model, r0, Prep::One, tau)?;
    let distance = match metric {
        DistanceMetric::Frobenius => frobenius_distance(&s0, &s1)?,
        DistanceMetric::TraceNorm => trace_norm_distance(&s0, &s1)?,
    };
    Ok(EntanglementReport::new(tau, distance, tol))
}

/// `ρ₀₁^{(prep)}(τ, t) = ½ Tr(w₀(t) w_p(τ) R w_p†(τ) w₁†(t))`.
pub fn protocol_coherence(model: &PureDephasingModel, r0: &EnvState, prep: Prep, tau: f64, t: f64) -> Result<Complex64> {
    check_time("tau", tau)?;
    check_time("t", t)?;
    let r_tau = conditional_state(model, r0, prep, tau)?;
    let (w0, w1) = conditional_propagators(model, t)?;
    let m = &(w0.matrix() * &r_tau) * &w1.adjoint();
    Ok(m.trace() * 0.5)
}

/// Spin-echo coherence `½ Tr(w₁(τ) w₀(τ) R w₁†(τ) w₀†(τ))`.
pub fn echo_coherence(model: &PureDephasingModel, r0: &EnvState, tau: f64) -> Result<Complex64> {
    check_time("tau", tau)?;
    model.check_state(r0)?;
    let (w0, w1) = conditional_propagators(model, tau)?;
    let left = w1.matrix() * w0.matrix();
    let right = &w1.adjoint() * &w0.adjoint();
    Ok((&(&left * r0.matrix()) * &right).trace() * 0.5)
}

/// `‖H₀H₁ − H₁H₀‖_F`; zero is the echo-blind (commuting) case.
pub fn commutator_norm(model: &PureDephasingModel) -> f64 {
    model.h0.matrix().commutator(model.h1.matrix()).frobenius_norm()
}

/// Brute-force evaluation of the two-preparation protocol on the full
/// qubit ⊗ environment space, reading the coherence off the joint density
/// matrix. Shares no code with [`protocol_coherence`] beyond the matrix
/// exponential.
pub fn joint_oracle(model: &PureDephasingModel, r0: &EnvState, prep: Prep, tau: f64, t: f64) -> Result<Complex64> {
    joint_oracle_with_cap(model, r0, prep, tau, t, DEFAULT_DIM_CAP)
}

pub fn joint_oracle_with_cap(
    model: &PureDephasingModel,
    r0: &EnvState,
    prep: Prep,
    tau: f64,
    t: f64,
    cap: usize,
) -> Result<Complex64> {
    check_time("tau", tau)?;
    check_time("t", t)?;
    model.check_state(r0)?;
    let d = model.env_dim();
    let joint = 2 * d;
    if joint > cap {
        return Err(Error::Capacity { dim: joint, cap });
    }

    let c = |re: f64| Complex64::new(re, 0.0);
    let proj = |i: usize| ComplexMatrix::from_real_diagonal(if i == 0 { &[1.0, 0.0] } else { &[0.0, 1.0] }).unwrap();
    let id_env = ComplexMatrix::identity(d);

    // Full Hamiltonian including the qubit splitting.
    let mut h = ComplexMatrix::zeros(joint);
    for (i, eps) in [model.eps0, model.eps1].into_iter().enumerate() {
        h = &h + &kron_with_cap(&proj(i), &id_env, cap)?.scale(c(eps));
        h = &h + &kron_with_cap(&proj(i), model.v(if i == 0 { Prep::Zero } else { Prep::One }).matrix(), cap)?;
    }
    h = &h + &kron_with_cap(&ComplexMatrix::identity(2), model.h_env().matrix(), cap)?;
    let h = HermitianOperator::new(h)?;

    let evolve = |rho: &ComplexMatrix, time: f64| -> Result<ComplexMatrix> {
        Ok(propagator(&h, time)?.matrix().conjugate(rho))
    };

    let rho = kron_with_cap(&proj(prep.index()), r0.matrix(), cap)?;
    let rho = evolve(&rho, tau)?;

    // Gate taking |prep⟩ to (|0⟩ + |1⟩)/√2.
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let gate = match prep {
        Prep::Zero => ComplexMatrix::from_rows(&[&[c(s), c(s)], &[c(s), c(-s)]])?,
        Prep::One => ComplexMatrix::from_rows(&[&[c(s), c(s)], &[c(-s), c(s)]])?,
    };
    let rho = kron_with_cap(&gate, &id_env, cap)?.conjugate(&rho);
    let rho = evolve(&rho, t)?;

    // Partial trace over the environment, element (0, 1).
    let m: &DMatrix<Complex64> = rho.as_matrix();
    let coherence: Complex64 = (0..d).map(|k| m[(k, d + k)]).sum();
    let frame = Complex64::from_polar(1.0, (model.eps0 - model.eps1) * t);
    Ok(coherence * frame)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quantum::spin_half::field;
    use crate::quantum::random_hermitian;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const OMEGA: f64 = 1.346;

    fn spin_model(omega: f64, a: [f64; 3]) -> PureDephasingModel {
        PureDephasingModel::rotating(field([0.0, 0.0, omega]), HermitianOperator::zeros(2), field(a)).unwrap()
    }

    /// `exp(−i t h·σ/2)` written out entrywise.
    fn su2_closed_form(h: [f64; 3], t: f64) -> [[Complex64; 2]; 2] {
        let norm = (h[0] * h[0] + h[1] * h[1] + h[2] * h[2]).sqrt();
        let (c, s) = ((norm * t / 2.0).cos(), (norm * t / 2.0).sin());
        let n = [h[0] / norm, h[1] / norm, h[2] / norm];
        [
            [Complex64::new(c, -s * n[2]), Complex64::new(-s * n[1], -s * n[0])],
            [Complex64::new(s * n[1], -s * n[0]), Complex64::new(c, s * n[2])],
        ]
    }

    fn assert_matches(m: &ComplexMatrix, expect: [[Complex64; 2]; 2], tol: f64) {
        for i in 0..2 {
            for j in 0..2 {
                assert!((m.get(i, j) - expect[i][j]).norm() < tol, "({i},{j}): {} vs {}", m.get(i, j), expect[i][j]);
            }
        }
    }

    fn random_model(rng: &mut impl Rng, d: usize) -> PureDephasingModel {
        PureDephasingModel::new(
            rng.random_range(-1.0..1.0),
            rng.random_range(-1.0..1.0),
            random_hermitian(rng, d),
            random_hermitian(rng, d),
            random_hermitian(rng, d),
        )
        .unwrap()
    }

    fn random_state(rng: &mut impl Rng, d: usize) -> EnvState {
        let a = random_hermitian(rng, d);
        let sq = a.matrix() * a.matrix();
        let tr = sq.trace().re;
        EnvState::new(sq.scale(Complex64::new(1.0 / tr, 0.0))).unwrap()
    }

    #[test]
    fn identical_couplings_give_identical_propagators() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_hermitian(&mut rng, 3);
        let m = PureDephasingModel::rotating(random_hermitian(&mut rng, 3), v.clone(), v).unwrap();
        for t in [0.0, 0.4, 3.1] {
            let (w0, w1) = conditional_propagators(&m, t).unwrap();
            assert_eq!(frobenius_distance(w0.matrix(), w1.matrix()).unwrap(), 0.0);
        }
        let (w0, w1) = conditional_propagators(&m, 0.0).unwrap();
        assert!(frobenius_distance(w0.matrix(), &ComplexMatrix::identity(3)).unwrap() < 1e-14);
        assert!(frobenius_distance(w1.matrix(), &ComplexMatrix::identity(3)).unwrap() < 1e-14);
    }

    #[test]
    fn single_spin_propagators_match_axis_angle_formula() {
        let m = spin_model(OMEGA, [0.8, 0.0, 0.5]);
        let (w0, w1) = conditional_propagators(&m, 1.0).unwrap();
        assert_matches(w0.matrix(), su2_closed_form([0.0, 0.0, OMEGA], 1.0), 1e-12);
        assert_matches(w1.matrix(), su2_closed_form([0.8, 0.0, OMEGA + 0.5], 1.0), 1e-12);
    }

    #[test]
    fn maximally_mixed_environment_never_entangles() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let m = random_model(&mut rng, 4);
        let r = EnvState::maximally_mixed(4);
        for tau in [0.0, 0.3, 2.0, 17.0] {
            let rep = qee_criterion(&m, &r, tau, DEFAULT_QEE_TOLERANCE).unwrap();
            assert!(rep.distance < 1e-12);
            assert!(!rep.qee_detected);
        }
    }

    #[test]
    fn zero_delay_has_zero_distance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = random_model(&mut rng, 3);
        let r = random_state(&mut rng, 3);
        let rep = qee_criterion(&m, &r, 0.0, DEFAULT_QEE_TOLERANCE).unwrap();
        assert!(rep.distance < 1e-14);
    }

    #[test]
    fn polarized_spin_with_transverse_coupling_is_detected() {
        let ax = 0.8;
        let m = spin_model(0.0, [ax, 0.0, 0.0]);
        let r = EnvState::spin_half(1.0).unwrap();
        let tau = std::f64::consts::PI / ax;
        let rep = qee_criterion(&m, &r, tau, DEFAULT_QEE_TOLERANCE).unwrap();

        // Direct 2x2 evaluation: w₀ = 1 and w₁ rotates the Bloch vector by π about x,
        // so diag(1,0) becomes diag(0,1).
        let u = su2_closed_form([ax, 0.0, 0.0], tau);
        let rho1 = [
            [u[0][0] * u[0][0].conj(), u[0][0] * u[1][0].conj()],
            [u[1][0] * u[0][0].conj(), u[1][0] * u[1][0].conj()],
        ];
        let rho0 = [[1.0, 0.0], [0.0, 0.0]];
        let mut d2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                d2 += (rho1[i][j] - rho0[i][j]).norm_sqr();
            }
        }
        assert_abs_diff_eq!(rep.distance, d2.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(rep.distance, 2f64.sqrt(), epsilon = 1e-12);
        assert!(rep.qee_detected);
        assert!(rep.tolerance_used == DEFAULT_QEE_TOLERANCE);
    }

    #[test]
    fn criterion_rejects_mismatched_state_and_negative_delay() {
        let m = spin_model(OMEGA, [0.8, 0.0, 0.5]);
        let r = EnvState::maximally_mixed(3);
        assert!(matches!(qee_criterion(&m, &r, 1.0, 1e-9), Err(Error::Validation(_))));
        let r = EnvState::maximally_mixed(2);
        assert!(qee_criterion(&m, &r, -1.0, 1e-9).is_err());
    }

    #[test]
    fn trace_norm_metric_agrees_on_verdict() {
        let m = spin_model(0.0, [0.8, 0.0, 0.0]);
        let r = EnvState::spin_half(1.0).unwrap();
        let tau = std::f64::consts::PI / 0.8;
        let rep = qee_criterion_with(&m, &r, tau, 1e-9, DistanceMetric::TraceNorm).unwrap();
        // Orthogonal pure states.
        assert_abs_diff_eq!(rep.distance, 2.0, epsilon = 1e-12);
        assert!(rep.qee_detected);
    }

    #[test]
    fn coherence_at_zero_evolution_is_one_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let m = random_model(&mut rng, 4);
        let r = random_state(&mut rng, 4);
        for prep in Prep::BOTH {
            for tau in [0.0, 1.3] {
                let c = protocol_coherence(&m, &r, prep, tau, 0.0).unwrap();
                assert_abs_diff_eq!(c.re, 0.5, epsilon = 1e-14);
                assert_abs_diff_eq!(c.im, 0.0, epsilon = 1e-14);
            }
        }
    }

    #[test]
    fn equal_couplings_make_preparations_identical() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let v = random_hermitian(&mut rng, 3);
        let m = PureDephasingModel::rotating(random_hermitian(&mut rng, 3), v.clone(), v).unwrap();
        let r = random_state(&mut rng, 3);
        for (tau, t) in [(0.5, 0.7), (2.0, 3.0)] {
            let a = protocol_coherence(&m, &r, Prep::Zero, tau, t).unwrap();
            let b = protocol_coherence(&m, &r, Prep::One, tau, t).unwrap();
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn commuting_hamiltonians_echo_perfectly() {
        let m = spin_model(OMEGA, [0.0, 0.0, 0.5]);
        assert_eq!(commutator_norm(&m), 0.0);
        let r = EnvState::spin_half(0.6).unwrap();
        for tau in [0.0, 0.5, 3.0, 27.0] {
            assert_abs_diff_eq!(echo_coherence(&m, &r, tau).unwrap().norm(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn echo_matches_direct_two_by_two_product() {
        let (a, tau) = ([0.8, 0.0, 0.5], 1.0);
        let m = spin_model(OMEGA, a);
        let r = EnvState::spin_half(1.0).unwrap();
        let w0 = su2_closed_form([0.0, 0.0, OMEGA], tau);
        let w1 = su2_closed_form([a[0], a[1], OMEGA + a[2]], tau);
        let mul = |x: [[Complex64; 2]; 2], y: [[Complex64; 2]; 2]| {
            let mut z = [[Complex64::new(0.0, 0.0); 2]; 2];
            for i in 0..2 {
                for j in 0..2 {
                    for k in 0..2 {
                        z[i][j] += x[i][k] * y[k][j];
                    }
                }
            }
            z
        };
        let dag = |x: [[Complex64; 2]; 2]| [[x[0][0].conj(), x[1][0].conj()], [x[0][1].conj(), x[1][1].conj()]];
        let left = mul(w1, w0);
        let right = mul(dag(w1), dag(w0));
        // R = diag(1, 0): the trace picks (right · left)_{00}.
        let expect = mul(right, left)[0][0] * 0.5;
        let got = echo_coherence(&m, &r, tau).unwrap();
        assert!((got - expect).norm() < 1e-12);
        assert!(got.norm() < 0.5 - 1e-3);
    }

    #[test]
    fn commutator_norm_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let v = random_hermitian(&mut rng, 3);
        let m = PureDephasingModel::rotating(random_hermitian(&mut rng, 3), v.clone(), v).unwrap();
        assert!(commutator_norm(&m) < 1e-14);
        assert_eq!(commutator_norm(&spin_model(1.0, [0.0, 0.0, 0.5])), 0.0);
        assert_abs_diff_eq!(commutator_norm(&spin_model(1.0, [1.0, 0.0, 0.0])), std::f64::consts::FRAC_1_SQRT_2, epsilon = 1e-15);
    }

    #[test]
    fn joint_oracle_agrees_on_single_spin() {
        let m = spin_model(OMEGA, [0.8, 0.0, 0.5]);
        let r = EnvState::spin_half(1.0).unwrap();
        for prep in Prep::BOTH {
            for (tau, t) in [(0.0, 0.0), (1.0, 2.0), (7.3, 11.9)] {
                let a = protocol_coherence(&m, &r, prep, tau, t).unwrap();
                let b = joint_oracle(&m, &r, prep, tau, t).unwrap();
                assert!((a - b).norm() < 1e-10, "{prep:?} {tau} {t}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn joint_oracle_removes_qubit_splitting() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let m = random_model(&mut rng, 3);
        let r = random_state(&mut rng, 3);
        assert!(m.eps0 != m.eps1);
        let a = protocol_coherence(&m, &r, Prep::One, 0.9, 1.7).unwrap();
        let b = joint_oracle(&m, &r, Prep::One, 0.9, 1.7).unwrap();
        assert!((a - b).norm() < 1e-10);
    }

    #[test]
    fn joint_oracle_degenerate_couplings_are_pure_phase() {
        // V₀ = V₁ = c·1: a constant classical offset, coherence ½·e^{...} with unit modulus factor.
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let v0 = HermitianOperator::new(ComplexMatrix::identity(2).scale(Complex64::new(0.3, 0.0))).unwrap();
        let v1 = HermitianOperator::new(ComplexMatrix::identity(2).scale(Complex64::new(-0.4, 0.0))).unwrap();
        let m = PureDephasingModel::rotating(random_hermitian(&mut rng, 2), v0, v1).unwrap();
        let r = random_state(&mut rng, 2);
        let t = 2.5;
        let got = joint_oracle(&m, &r, Prep::Zero, 1.0, t).unwrap();
        let expect = Complex64::from_polar(0.5, -(0.3 + 0.4) * t);
        assert!((got - expect).norm() < 1e-12);
    }

    #[test]
    fn joint_oracle_capacity_guard() {
        let m = spin_model(OMEGA, [0.8, 0.0, 0.5]);
        let r = EnvState::spin_half(0.0).unwrap();
        assert!(matches!(joint_oracle_with_cap(&m, &r, Prep::Zero, 1.0, 1.0, 3), Err(Error::Capacity { dim: 4, cap: 3 })));
    }

    #[test]
    fn spin_half_state_validation() {
        assert!(EnvState::spin_half(1.2).is_err());
        let bad = ComplexMatrix::from_real_diagonal(&[0.7, 0.7]).unwrap();
        assert!(EnvState::new(bad).is_err());
        let neg = ComplexMatrix::from_real_diagonal(&[1.5, -0.5]).unwrap();
        assert!(EnvState::new(neg).is_err());
        let prod = EnvState::product(&[EnvState::spin_half(1.0).unwrap(), EnvState::spin_half(0.0).unwrap()]).unwrap();
        assert_eq!(prod.dim(), 4);
        assert_abs_diff_eq!(prod.matrix().get(0, 0).re, 0.5);
    }

    #[test]
    fn prep_from_integer() {
        assert_eq!(Prep::try_from(0).unwrap(), Prep::Zero);
        assert_eq!(Prep::try_from(1).unwrap(), Prep::One);
        assert!(Prep::try_from(2).is_err());
    }
}
