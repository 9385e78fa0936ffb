//! Factorized two-preparation protocol for non-interacting spin-1/2 baths.
//!
//! With `V₀ = 0` and an uncorrelated initial bath, the coherence after the
//! delay `τ` and evolution `t` is `ρ₀₁^{(p)}(τ,t) = ½ ∏_k L_k^{(p)}(τ,t)`, where
//! `L_k^{(p)} = Tr(u₀(t) u_p(τ) ρ_k u_p†(τ) u₁†(t))` for a single nucleus.
//!
//! Writing `M(t) = u₁†(t)u₀(t) = w − i v·σ` and letting `n_p(τ)` be the Bloch
//! vector of `u_p(τ) ρ_k u_p†(τ)` (up to the polarization), each factor is
//! `L = w − i p v·n_p`. The engine tabulates `M` over `t` and `n₁` over `τ`
//! once per spin, so each grid point costs one dot product per spin.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::{EntanglementReport, EnvState, Prep, PureDephasingModel};
use crate::error::{Error, Result};
use crate::nv::BathSpin;
use crate::quantum::{spin_half, ComplexMatrix, HermitianOperator};
use crate::su2::{dot, Su2, Vec3};

const Z: Vec3 = [0.0, 0.0, 1.0];

/// `(L⁽⁰⁾, L⁽¹⁾)` for one nucleus.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinFactor {
    pub l0: Complex64,
    pub l1: Complex64,
}

impl SpinFactor {
    pub fn evaluate(spin: &BathSpin, tau: f64, t: f64) -> SpinFactor {
        SpinFactor { l0: spin_factor(spin, Prep::Zero, tau, t), l1: spin_factor(spin, Prep::One, tau, t) }
    }

    pub fn difference(&self) -> Complex64 {
        self.l0 - self.l1
    }
}

fn conditional_field(spin: &BathSpin, prep: Prep) -> Vec3 {
    match prep {
        Prep::Zero => spin.field0(),
        Prep::One => spin.field1(),
    }
}

/// Single-nucleus factor `L^{(prep)}(τ, t)`.
pub fn spin_factor(spin: &BathSpin, prep: Prep, tau: f64, t: f64) -> Complex64 {
    let u0 = Su2::evolution(spin.field0(), t);
    let u1 = Su2::evolution(spin.field1(), t);
    let up = Su2::evolution(conditional_field(spin, prep), tau);
    // Tr(u₀ u_p ρ u_p† u₁†) = Tr(u_p† u₁† u₀ u_p ρ)
    let m = up.adjoint().compose(u1.adjoint()).compose(u0).compose(up);
    m.trace_with_state(spin.polarization, Z)
}

/// Closed form of `L⁽⁰⁾ − L⁽¹⁾` for a nucleus with `A_zy = 0`:
///
/// `−2i p (A_x/ω_xz)² sin(ωt/2) sin(ω_xz τ/2) sin(ω_xz (τ+t)/2)`,
/// `ω_xz = √(A_x² + (A_z + ω)²)`.
///
/// Purely imaginary; vanishes for `p = 0`, `A_x = 0` or `τ = 0`.
pub fn delta_l_analytic(p: f64, a_x: f64, a_z: f64, omega: f64, tau: f64, t: f64) -> Result<Complex64> {
    let w_xz = a_x.hypot(a_z + omega);
    if w_xz == 0.0 {
        return Err(Error::validation("ω_xz = 0: the closed form is 0/0 (A_x = 0 and A_z = −ω)"));
    }
    let s = (a_x / w_xz).powi(2);
    let im = -2.0 * p * s * (0.5 * omega * t).sin() * (0.5 * w_xz * tau).sin() * (0.5 * w_xz * (tau + t)).sin();
    Ok(Complex64::new(0.0, im))
}

/// Inclusive uniform grid of `steps` points on `[min, max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub min: f64,
    pub max: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(min: f64, max: f64, steps: usize) -> Result<TimeGrid> {
        let g = TimeGrid { min, max, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.steps == 0 {
            return Err(Error::validation("time grid needs at least one point"));
        }
        if !(self.min >= 0.0 && self.max >= self.min && self.max.is_finite()) {
            return Err(Error::validation(format!("time grid needs 0 <= min <= max, got [{}, {}]", self.min, self.max)));
        }
        if self.steps == 1 && self.max != self.min {
            return Err(Error::validation("a single-point grid needs min == max"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        if self.steps == 1 {
            return vec![self.min];
        }
        let h = (self.max - self.min) / (self.steps - 1) as f64;
        (0..self.steps)
            .map(|i| if i + 1 == self.steps { self.max } else { self.min + i as f64 * h })
            .collect()
    }
}

/// Evaluation points: either the full `τ × t` mesh (row-major in `τ`) or
/// the `t = τ` diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolGrid {
    pub tau: Vec<f64>,
    pub t: Vec<f64>,
    pub diagonal: bool,
}

impl ProtocolGrid {
    pub fn full(tau: Vec<f64>, t: Vec<f64>) -> Result<Self> {
        let g = ProtocolGrid { tau, t, diagonal: false };
        g.validate()?;
        Ok(g)
    }

    pub fn diagonal(tau: Vec<f64>) -> Result<Self> {
        let g = ProtocolGrid { t: tau.clone(), tau, diagonal: true };
        g.validate()?;
        Ok(g)
    }

    fn validate(&self) -> Result<()> {
        if self.tau.is_empty() || self.t.is_empty() {
            return Err(Error::validation("protocol grid is empty"));
        }
        for axis in [&self.tau, &self.t] {
            if axis.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                return Err(Error::validation("grid times must be finite and non-negative"));
            }
            if axis.windows(2).any(|w| w[1] < w[0]) {
                return Err(Error::validation("grid times must be sorted"));
            }
        }
        if self.diagonal && self.tau != self.t {
            return Err(Error::validation("diagonal grid needs t = τ"));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        if self.diagonal {
            self.tau.len()
        } else {
            self.tau.len() * self.t.len()
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `(τ, t)` of the flat index used by [`ProtocolTrace`].
    pub fn point(&self, idx: usize) -> (f64, f64) {
        if self.diagonal {
            (self.tau[idx], self.tau[idx])
        } else {
            (self.tau[idx / self.t.len()], self.t[idx % self.t.len()])
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMetadata {
    pub spins: usize,
    pub polarized: usize,
    pub b_tesla: Option<f64>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TraceOptions {
    /// Worker count; `None` uses the global pool.
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProtocolTrace {
    pub grid: ProtocolGrid,
    pub rho0: Vec<Complex64>,
    pub rho1: Vec<Complex64>,
    /// `(ρ⁽⁰⁾ − ρ⁽¹⁾) / ρ₀₁(τ, 0)` with `ρ₀₁(τ, 0) = ½`.
    pub delta_norm: Vec<Complex64>,
    pub metadata: TraceMetadata,
}

impl ProtocolTrace {
    pub fn point(&self, idx: usize) -> (f64, f64) {
        self.grid.point(idx)
    }

    pub fn max_abs_delta_im(&self) -> f64 {
        self.delta_norm.iter().map(|d| d.im.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_delta_re(&self) -> f64 {
        self.delta_norm.iter().map(|d| d.re.abs()).fold(0.0, f64::max)
    }

    pub fn max_abs_delta(&self) -> f64 {
        self.delta_norm.iter().map(|d| d.norm()).fold(0.0, f64::max)
    }
}

/// Per-spin lookup tables.
struct Tables {
    /// `[t][spin]`: `u₁†(t) u₀(t)`.
    m: Vec<Su2>,
    /// `[τ][spin]`: Bloch direction of `u₁(τ) ẑ`.
    n1: Vec<Vec3>,
    p: Vec<f64>,
    spins: usize,
}

impl Tables {
    fn build(spins: &[BathSpin], tau: &[f64], t: &[f64]) -> Tables {
        let n = spins.len();
        let mut m = Vec::with_capacity(t.len() * n);
        for &ti in t {
            m.extend(spins.iter().map(|s| {
                Su2::evolution(s.field1(), ti).adjoint().compose(Su2::evolution(s.field0(), ti))
            }));
        }
        let mut n1 = Vec::with_capacity(tau.len() * n);
        for &tj in tau {
            n1.extend(spins.iter().map(|s| Su2::evolution(s.field1(), tj).rotate(Z)));
        }
        Tables { m, n1, p: spins.iter().map(|s| s.polarization).collect(), spins: n }
    }

    /// `(∏ L⁽⁰⁾, ∏ L⁽¹⁾)` in ascending spin order.
    #[inline]
    fn products(&self, tau_idx: usize, t_idx: usize) -> (Complex64, Complex64) {
        let m = &self.m[t_idx * self.spins..(t_idx + 1) * self.spins];
        let n1 = &self.n1[tau_idx * self.spins..(tau_idx + 1) * self.spins];
        let mut acc0 = Complex64::new(1.0, 0.0);
        let mut acc1 = Complex64::new(1.0, 0.0);
        for k in 0..self.spins {
            let (mk, p) = (m[k], self.p[k]);
            acc0 *= Complex64::new(mk.w, -p * mk.v[2]);
            acc1 *= Complex64::new(mk.w, -p * dot(mk.v, n1[k]));
        }
        (acc0, acc1)
    }
}

fn with_pool<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match threads {
        None => Ok(f()),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build()
                .map_err(|e| Error::numerical(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// Coherences of both preparations over `grid`. Every grid point is
/// computed in isolation with a fixed spin order, so the output does not
/// depend on the worker count.
pub fn protocol_trace(spins: &[BathSpin], grid: &ProtocolGrid, options: &TraceOptions) -> Result<ProtocolTrace> {
    if spins.is_empty() {
        return Err(Error::validation("protocol trace needs a non-empty bath"));
    }
    grid.validate()?;
    for s in spins {
        s.validate()?;
    }
    let tables = Tables::build(spins, &grid.tau, &grid.t);

    let rows: Vec<Vec<(Complex64, Complex64)>> = with_pool(options.threads, || {
        if grid.diagonal {
            (0..grid.tau.len()).into_par_iter().map(|j| vec![tables.products(j, j)]).collect()
        } else {
            (0..grid.tau.len())
                .into_par_iter()
                .map(|j| (0..grid.t.len()).map(|i| tables.products(j, i)).collect())
                .collect()
        }
    })?;

    let n = grid.len();
    let (mut rho0, mut rho1, mut delta) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for (a, b) in rows.into_iter().flatten() {
        let (r0, r1) = (a * 0.5, b * 0.5);
        rho0.push(r0);
        rho1.push(r1);
        delta.push((r0 - r1) * 2.0);
    }
    let metadata = TraceMetadata {
        spins: spins.len(),
        polarized: spins.iter().filter(|s| s.polarization != 0.0).count(),
        ..Default::default()
    };
    Ok(ProtocolTrace { grid: grid.clone(), rho0, rho1, delta_norm: delta, metadata })
}

/// Spin-echo coherence `½ ∏_k Tr(u₁†u₀†u₁u₀ ρ_k)` at each `τ`.
pub fn echo_trace(spins: &[BathSpin], tau: &[f64]) -> Result<Vec<Complex64>> {
    if spins.is_empty() || tau.is_empty() {
        return Err(Error::validation("echo trace needs a non-empty bath and τ grid"));
    }
    if tau.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
        return Err(Error::validation("τ values must be finite and non-negative"));
    }
    Ok(tau
        .par_iter()
        .map(|&tj| {
            spins.iter().fold(Complex64::new(0.5, 0.0), |acc, s| {
                let u0 = Su2::evolution(s.field0(), tj);
                let u1 = Su2::evolution(s.field1(), tj);
                let m = u1.adjoint().compose(u0.adjoint()).compose(u1).compose(u0);
                acc * m.trace_with_state(s.polarization, Z)
            })
        })
        .collect())
}

/// Frobenius distance between the two conditional bath states at `τ`,
/// restricted to the spins that are not maximally mixed.
///
/// Unpolarized spins enter both branches as the same `1/2` factor and only
/// rescale the full-space distance by `2^{−N₀/2}`; leaving them out keeps the
/// number meaningful for baths of hundreds of spins without changing the
/// verdict. For a fully polarized bath this is the full-space distance.
pub fn factorized_qee_report(spins: &[BathSpin], tau: f64, tol: f64) -> Result<EntanglementReport> {
    if !(tau.is_finite() && tau >= 0.0) {
        return Err(Error::validation(format!("τ must be finite and non-negative, got {tau}")));
    }
    // d² = 2 ∏a_k · (1 − ∏(1 − δ_k/a_k)),  a_k = ½(1 + p²),  δ_k = ¼p²|ẑ − n₁(τ)|².
    let mut log_purity = 0.0;
    let mut log_overlap = 0.0;
    for s in spins.iter().filter(|s| s.polarization != 0.0) {
        let p2 = s.polarization * s.polarization;
        let a = 0.5 * (1.0 + p2);
        let n1 = Su2::evolution(s.field1(), tau).rotate(Z);
        let diff = [n1[0], n1[1], n1[2] - 1.0];
        let delta = 0.25 * p2 * dot(diff, diff);
        log_purity += a.ln();
        log_overlap += (-(delta / a)).ln_1p();
    }
    let d2 = 2.0 * log_purity.exp() * -log_overlap.exp_m1();
    Ok(EntanglementReport::new(tau, d2.max(0.0).sqrt(), tol))
}

/// `‖[H₀, H₁]‖_F` of each single-nucleus model: `|ω| A_⊥ / √2`.
pub fn spin_commutator_norms(spins: &[BathSpin]) -> Vec<f64> {
    spins
        .iter()
        .map(|s| s.larmor.abs() * s.transverse_coupling() * std::f64::consts::FRAC_1_SQRT_2)
        .collect()
}

/// Dense `H_E = Σ ω I_z`, `V₀ = 0`, `V₁ = Σ A·I` and `R = ⊗ ½(1 + p σ_z)`
/// on the full `2^N`-dimensional bath space (spin 0 leftmost).
pub fn dense_equivalent(spins: &[BathSpin]) -> Result<(PureDephasingModel, EnvState)> {
    let n = spins.len();
    if n == 0 {
        return Err(Error::validation("dense equivalent needs at least one spin"));
    }
    let dim = 1usize << n;
    let ops = [spin_half::ix(), spin_half::iy(), spin_half::iz()];
    let mut h_env = ComplexMatrix::zeros(dim);
    let mut v1 = ComplexMatrix::zeros(dim);
    let c = |x: f64| Complex64::new(x, 0.0);
    for (k, s) in spins.iter().enumerate() {
        let embedded: Vec<ComplexMatrix> = ops.iter().map(|op| spin_half::embed(op, k, n)).collect::<Result<_>>()?;
        h_env = &h_env + &embedded[2].scale(c(s.larmor));
        for j in 0..3 {
            v1 = &v1 + &embedded[j].scale(c(s.coupling[j]));
        }
    }
    let model = PureDephasingModel::rotating(
        HermitianOperator::new(h_env)?,
        HermitianOperator::zeros(dim),
        HermitianOperator::new(v1)?,
    )?;
    let state = EnvState::product(&spins.iter().map(|s| EnvState::spin_half(s.polarization)).collect::<Result<Vec<_>>>()?)?;
    Ok((model, state))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dephasing::{echo_coherence, protocol_coherence, qee_criterion};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    const OMEGA: f64 = 1.346;

    fn spin(coupling: Vec3, p: f64) -> BathSpin {
        BathSpin { position: [0.5, 0.0, 0.5], coupling, larmor: OMEGA, polarization: p }
    }

    #[test]
    fn factor_is_one_at_zero_evolution() {
        let s = spin([0.8, -0.3, 0.5], 0.7);
        for tau in [0.0, 1.0, 13.0] {
            let f = SpinFactor::evaluate(&s, tau, 0.0);
            assert!((f.l0 - 1.0).norm() < 1e-12);
            assert!((f.l1 - 1.0).norm() < 1e-12);
        }
    }

    #[test]
    fn longitudinal_coupling_factor_closed_form() {
        // M = exp(+i A_zz t σ_z / 2), so L = cos(A t/2) + i p sin(A t/2) for both preparations.
        let (a, p) = (0.5, 0.6);
        let s = spin([0.0, 0.0, a], p);
        for (tau, t) in [(0.0, 1.0), (3.0, 2.0), (11.0, 17.0)] {
            let f = SpinFactor::evaluate(&s, tau, t);
            let expect = Complex64::new((a * t / 2.0).cos(), p * (a * t / 2.0).sin());
            assert!((f.l0 - expect).norm() < 1e-12);
            assert!((f.l1 - expect).norm() < 1e-12);
        }
    }

    #[test]
    fn generic_factor_matches_dense_model() {
        let s = spin([0.8, 0.0, 0.5], 1.0);
        let (model, state) = dense_equivalent(&[s]).unwrap();
        for prep in Prep::BOTH {
            for (tau, t) in [(0.3, 0.9), (4.0, 1.0), (20.0, 33.0)] {
                let dense = protocol_coherence(&model, &state, prep, tau, t).unwrap() * 2.0;
                assert!((spin_factor(&s, prep, tau, t) - dense).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn analytic_difference_vanishing_cases() {
        assert_eq!(delta_l_analytic(0.0, 0.8, 0.5, OMEGA, 3.0, 4.0).unwrap().norm(), 0.0);
        assert_eq!(delta_l_analytic(1.0, 0.8, 0.5, OMEGA, 0.0, 4.0).unwrap().norm(), 0.0);
        assert_eq!(delta_l_analytic(1.0, 0.0, 0.5, OMEGA, 3.0, 4.0).unwrap().norm(), 0.0);
        assert!(delta_l_analytic(1.0, 0.0, -OMEGA, OMEGA, 3.0, 4.0).is_err());
        assert_eq!(delta_l_analytic(0.3, 0.8, 0.5, OMEGA, 3.0, 4.0).unwrap().re, 0.0);
    }

    #[test]
    fn degenerate_numeric_path_returns_limit() {
        // A_x = 0, A_z = −ω: u₁ = 1, and both factors coincide.
        let s = spin([0.0, 0.0, -OMEGA], 1.0);
        let f = SpinFactor::evaluate(&s, 2.0, 3.0);
        assert!(f.difference().norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn numeric_difference_matches_closed_form(
            p in -1.0f64..1.0,
            ax in -3.2f64..3.2,
            az in -3.2f64..3.2,
            tau in 0.0f64..40.0,
            t in 0.0f64..40.0,
        ) {
            let s = spin([ax, 0.0, az], p);
            let d = SpinFactor::evaluate(&s, tau, t).difference();
            prop_assert!(d.re.abs() < 1e-12);
            let exact = delta_l_analytic(p, ax, az, OMEGA, tau, t).unwrap();
            prop_assert!((d - exact).norm() < 1e-10);
        }

        #[test]
        fn unpolarized_factor_is_real_and_preparation_free(
            a in prop::array::uniform3(-3.0f64..3.0),
            tau in 0.0f64..40.0,
            t in 0.0f64..40.0,
        ) {
            let f = SpinFactor::evaluate(&spin(a, 0.0), tau, t);
            prop_assert!((f.l0 - f.l1).norm() < 1e-12);
            prop_assert!(f.l0.im.abs() < 1e-12);
            prop_assert!(f.l0.norm() <= 1.0 + 1e-12);
        }
    }

    #[test]
    fn grid_values_are_inclusive() {
        let g = TimeGrid::new(0.0, 40.0, 201).unwrap();
        let v = g.values();
        assert_eq!(v.len(), 201);
        assert_eq!(v[0], 0.0);
        assert_eq!(v[200], 40.0);
        assert_abs_diff_eq!(v[1], 0.2, epsilon = 1e-15);
        assert_eq!(TimeGrid::new(2.0, 2.0, 1).unwrap().values(), vec![2.0]);
        assert!(TimeGrid::new(0.0, 1.0, 0).is_err());
        assert!(TimeGrid::new(2.0, 1.0, 5).is_err());
        assert!(TimeGrid::new(-1.0, 1.0, 5).is_err());
    }

    #[test]
    fn grid_indexing() {
        let g = ProtocolGrid::full(vec![0.0, 1.0], vec![0.0, 2.0, 4.0]).unwrap();
        assert_eq!(g.len(), 6);
        assert_eq!(g.point(4), (1.0, 2.0));
        let d = ProtocolGrid::diagonal(vec![0.0, 1.0, 2.0]).unwrap();
        assert_eq!(d.len(), 3);
        assert_eq!(d.point(2), (2.0, 2.0));
        assert!(ProtocolGrid::full(vec![], vec![1.0]).is_err());
        assert!(ProtocolGrid::full(vec![2.0, 1.0], vec![1.0]).is_err());
    }

    #[test]
    fn unpolarized_bath_has_no_preparation_dependence() {
        let spins = vec![spin([0.8, 0.1, 0.5], 0.0), spin([-0.3, 0.2, 0.1], 0.0)];
        let grid = ProtocolGrid::full(TimeGrid::new(0.0, 10.0, 11).unwrap().values(), TimeGrid::new(0.0, 10.0, 7).unwrap().values()).unwrap();
        let tr = protocol_trace(&spins, &grid, &TraceOptions::default()).unwrap();
        assert!(tr.delta_norm.iter().all(|d| d.norm() < 1e-15));
    }

    #[test]
    fn single_spin_trace_matches_closed_form() {
        let s = spin([0.8, 0.0, 0.5], 1.0);
        let grid = ProtocolGrid::full(TimeGrid::new(0.0, 20.0, 9).unwrap().values(), TimeGrid::new(0.0, 20.0, 13).unwrap().values()).unwrap();
        let tr = protocol_trace(&[s], &grid, &TraceOptions::default()).unwrap();
        for i in 0..grid.len() {
            let (tau, t) = grid.point(i);
            let exact = delta_l_analytic(1.0, 0.8, 0.5, OMEGA, tau, t).unwrap();
            assert!((tr.delta_norm[i] - exact).norm() < 1e-10);
            assert!((tr.delta_norm[i] - (tr.rho0[i] - tr.rho1[i]) * 2.0).norm() < 1e-12);
            assert!(tr.rho0[i].norm() <= 0.5 + 1e-10 && tr.rho1[i].norm() <= 0.5 + 1e-10);
        }
        // τ = 0 row.
        assert!(tr.delta_norm[..13].iter().all(|d| d.norm() < 1e-15));
    }

    #[test]
    fn engine_matches_direct_factor_products() {
        let spins = vec![spin([0.8, 0.2, 0.5], 1.0), spin([-0.4, 0.3, -0.2], 0.5), spin([0.1, -0.6, 0.9], -0.3)];
        let grid = ProtocolGrid::full(vec![0.0, 0.7, 5.5], vec![0.0, 1.1, 9.3]).unwrap();
        let tr = protocol_trace(&spins, &grid, &TraceOptions::default()).unwrap();
        for i in 0..grid.len() {
            let (tau, t) = grid.point(i);
            let mut p0 = Complex64::new(0.5, 0.0);
            let mut p1 = Complex64::new(0.5, 0.0);
            for s in &spins {
                p0 *= spin_factor(s, Prep::Zero, tau, t);
                p1 *= spin_factor(s, Prep::One, tau, t);
            }
            assert!((tr.rho0[i] - p0).norm() < 1e-13);
            assert!((tr.rho1[i] - p1).norm() < 1e-13);
        }
    }

    #[test]
    fn trace_is_independent_of_worker_count() {
        let spins: Vec<BathSpin> = (0..40)
            .map(|k| {
                let x = k as f64;
                spin([0.3 * (x * 0.7).sin(), 0.2 * (x * 1.3).cos(), 0.4 * (x * 0.4).sin()], if k < 5 { 1.0 } else { 0.0 })
            })
            .collect();
        let grid = ProtocolGrid::full(TimeGrid::new(0.0, 30.0, 17).unwrap().values(), TimeGrid::new(0.0, 30.0, 19).unwrap().values()).unwrap();
        let one = protocol_trace(&spins, &grid, &TraceOptions { threads: Some(1) }).unwrap();
        let four = protocol_trace(&spins, &grid, &TraceOptions { threads: Some(4) }).unwrap();
        assert_eq!(one, four);
    }

    #[test]
    fn diagonal_trace_matches_full_grid_diagonal() {
        let spins = vec![spin([0.8, 0.2, 0.5], 1.0), spin([-0.4, 0.0, -0.2], 0.0)];
        let taus = TimeGrid::new(0.0, 10.0, 6).unwrap().values();
        let diag = protocol_trace(&spins, &ProtocolGrid::diagonal(taus.clone()).unwrap(), &TraceOptions::default()).unwrap();
        let full = protocol_trace(&spins, &ProtocolGrid::full(taus.clone(), taus.clone()).unwrap(), &TraceOptions::default()).unwrap();
        for j in 0..taus.len() {
            assert_eq!(diag.rho0[j], full.rho0[j * taus.len() + j]);
            assert_eq!(diag.rho1[j], full.rho1[j * taus.len() + j]);
        }
    }

    #[test]
    fn empty_inputs_rejected() {
        let grid = ProtocolGrid::diagonal(vec![0.0, 1.0]).unwrap();
        assert!(protocol_trace(&[], &grid, &TraceOptions::default()).is_err());
        assert!(echo_trace(&[], &[1.0]).is_err());
        assert!(echo_trace(&[spin([0.0; 3], 0.0)], &[]).is_err());
    }

    #[test]
    fn echo_of_longitudinal_bath_is_perfect() {
        let spins = vec![spin([0.0, 0.0, 0.5], 1.0), spin([0.0, 0.0, -0.2], 0.3)];
        let taus = TimeGrid::new(0.0, 40.0, 41).unwrap().values();
        for e in echo_trace(&spins, &taus).unwrap() {
            assert_abs_diff_eq!(e.norm(), 0.5, epsilon = 1e-12);
        }
    }

    #[test]
    fn echo_matches_dense_model() {
        let s = spin([0.8, 0.0, 0.5], 1.0);
        let (model, state) = dense_equivalent(&[s]).unwrap();
        let taus = [0.0, 1.0, 7.7];
        let fast = echo_trace(&[s], &taus).unwrap();
        assert_abs_diff_eq!(fast[0].re, 0.5, epsilon = 1e-15);
        for (tau, f) in taus.iter().zip(&fast) {
            let dense = echo_coherence(&model, &state, *tau).unwrap();
            assert!((dense - f).norm() < 1e-10);
        }
    }

    #[test]
    fn factorized_distance_matches_dense_criterion() {
        let polarized = vec![spin([0.8, 0.2, 0.5], 1.0), spin([-0.4, 0.3, -0.2], 0.5), spin([0.1, -0.6, 0.9], -0.3)];
        let (model, state) = dense_equivalent(&polarized).unwrap();
        for tau in [0.0, 0.4, 3.3, 12.0] {
            let dense = qee_criterion(&model, &state, tau, 1e-9).unwrap();
            let fast = factorized_qee_report(&polarized, tau, 1e-9).unwrap();
            assert!((dense.distance - fast.distance).abs() < 1e-10, "{tau}: {} vs {}", dense.distance, fast.distance);
            assert_eq!(dense.qee_detected, fast.qee_detected);
        }

        // Adding unpolarized spins scales the dense distance by 2^{−N₀/2} only.
        let mut mixed = polarized.clone();
        mixed.push(spin([0.5, 0.5, 0.5], 0.0));
        let (model, state) = dense_equivalent(&mixed).unwrap();
        let dense = qee_criterion(&model, &state, 3.3, 1e-9).unwrap();
        let fast = factorized_qee_report(&mixed, 3.3, 1e-9).unwrap();
        assert!((dense.distance * 2f64.sqrt() - fast.distance).abs() < 1e-10);
    }

    #[test]
    fn commutator_norms_match_dense() {
        let s = spin([1.0, 0.0, 0.3], 0.0);
        let s = BathSpin { larmor: 1.0, ..s };
        let (model, _) = dense_equivalent(&[s]).unwrap();
        assert_abs_diff_eq!(spin_commutator_norms(&[s])[0], crate::dephasing::commutator_norm(&model), epsilon = 1e-14);
    }
}
