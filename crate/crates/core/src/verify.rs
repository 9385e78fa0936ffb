//! Self-check suite run by `qee verify`.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::VerifyConfig;
use crate::dephasing::{joint_oracle, protocol_coherence, qee_criterion, EnvState, Prep};
use crate::error::{Error, Result};
use crate::nv::BathSpin;
use crate::protocol::{delta_l_analytic, dense_equivalent, protocol_trace, ProtocolGrid, SpinFactor, TraceOptions};

pub const OMEGA: f64 = 1.346;
const T_MAX: f64 = 40.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    pub cases: usize,
    pub max_error: f64,
    pub tolerance: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifySummary {
    pub passed: bool,
    pub seed: u64,
    pub checks: Vec<CheckResult>,
}

impl VerifySummary {
    pub fn failing(&self) -> Vec<&str> {
        self.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect()
    }

    /// `Err(Oracle)` naming each failed check.
    pub fn into_result(self) -> Result<VerifySummary> {
        if self.passed {
            Ok(self)
        } else {
            Err(Error::Oracle(format!("failing checks: {}", self.failing().join(", "))))
        }
    }
}

fn coupling(rng: &mut ChaCha8Rng) -> f64 {
    rng.random_range(-PI..PI)
}

/// Random nucleus with all three coupling components and random polarization.
pub fn random_spin(rng: &mut ChaCha8Rng) -> BathSpin {
    BathSpin {
        position: [0.0, 0.0, 1.0],
        coupling: [coupling(rng), coupling(rng), coupling(rng)],
        larmor: OMEGA,
        polarization: rng.random_range(-1.0..=1.0),
    }
}

pub fn check_closed_form(cfg: &VerifyConfig, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sign = if cfg.inject_fault { -1.0 } else { 1.0 };
    let mut worst = 0.0f64;
    for _ in 0..cfg.draws {
        let p = rng.random_range(-1.0..=1.0);
        let (a_x, a_z) = (coupling(&mut rng), coupling(&mut rng));
        let (tau, t) = (rng.random_range(0.0..=T_MAX), rng.random_range(0.0..=T_MAX));
        let spin = BathSpin { position: [0.0, 0.0, 1.0], coupling: [a_x, 0.0, a_z], larmor: OMEGA, polarization: p };
        let numeric = SpinFactor::evaluate(&spin, tau, t).difference();
        let analytic = delta_l_analytic(p, a_x, a_z, OMEGA, tau, t)? * sign;
        worst = worst.max((numeric - analytic).norm());
    }
    Ok(CheckResult {
        name: "closed-form-single-spin".into(),
        passed: worst < cfg.tolerance,
        cases: cfg.draws,
        max_error: worst,
        tolerance: cfg.tolerance,
        detail: "numeric L0 - L1 against the closed form".into(),
    })
}

pub fn check_factorization(cfg: &VerifyConfig, seed: u64) -> Result<CheckResult> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9_7f4a_7c15);
    let mut worst = 0.0f64;
    for _ in 0..cfg.baths {
        let n = rng.random_range(1..=cfg.max_spins.max(1));
        let spins: Vec<BathSpin> = (0..n).map(|_| random_spin(&mut rng)).collect();
        let (model, state) = dense_equivalent(&spins)?;
        for _ in 0..cfg.points {
            let (tau, t) = (rng.random_range(0.0..=T_MAX), rng.random_range(0.0..=T_MAX));
            let grid = ProtocolGrid::full(vec![tau], vec![t])?;
            let trace = protocol_trace(&spins, &grid, &TraceOptions::default())?;
            let j0 = joint_oracle(&model, &state, Prep::Zero, tau, t)?;
            let j1 = joint_oracle(&model, &state, Prep::One, tau, t)?;
            worst = worst.max((trace.rho0[0] - j0).norm()).max((trace.rho1[0] - j1).norm());
        }
    }
    Ok(CheckResult {
        name: "factorization-vs-joint-oracle".into(),
        passed: worst < cfg.tolerance,
        cases: cfg.baths * cfg.points,
        max_error: worst,
        tolerance: cfg.tolerance,
        detail: format!("product formula against full qubit+bath evolution, up to {} spins", cfg.max_spins),
    })
}

/// Any preparation dependence of the coherence must come with a nonzero
/// distance between the conditional bath states; a maximally mixed bath
/// must show neither.
pub fn check_witness_consistency(seed: u64) -> Result<CheckResult> {
    const MODELS: usize = 100;
    const T_POINTS: usize = 41;
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5851_f42d_4c95_7f2d);
    let mut violations = 0usize;
    let mut mixed_worst = 0.0f64;
    for _ in 0..MODELS {
        let n = rng.random_range(1..=3usize);
        let spins: Vec<BathSpin> = (0..n).map(|_| random_spin(&mut rng)).collect();
        let (model, state) = dense_equivalent(&spins)?;
        let mixed = EnvState::maximally_mixed(model.env_dim());
        let tau = rng.random_range(0.0..=T_MAX);
        let mut witness = 0.0f64;
        let mut witness_mixed = 0.0f64;
        for k in 0..T_POINTS {
            let t = T_MAX * k as f64 / (T_POINTS - 1) as f64;
            let d = protocol_coherence(&model, &state, Prep::Zero, tau, t)? - protocol_coherence(&model, &state, Prep::One, tau, t)?;
            witness = witness.max(d.norm());
            let dm = protocol_coherence(&model, &mixed, Prep::Zero, tau, t)? - protocol_coherence(&model, &mixed, Prep::One, tau, t)?;
            witness_mixed = witness_mixed.max(dm.norm());
        }
        let distance = qee_criterion(&model, &state, tau, 0.0)?.distance;
        if witness > 1e-8 && distance <= 1e-10 {
            violations += 1;
        }
        let distance_mixed = qee_criterion(&model, &mixed, tau, 0.0)?.distance;
        mixed_worst = mixed_worst.max(witness_mixed).max(distance_mixed);
    }
    Ok(CheckResult {
        name: "witness-criterion-consistency".into(),
        passed: violations == 0 && mixed_worst < 1e-12,
        cases: MODELS,
        max_error: mixed_worst,
        tolerance: 1e-12,
        detail: format!("{violations} models with a witness signal but no criterion distance"),
    })
}

pub fn run(cfg: &VerifyConfig, seed: u64) -> Result<VerifySummary> {
    let checks = vec![check_closed_form(cfg, seed)?, check_factorization(cfg, seed)?, check_witness_consistency(seed)?];
    for c in &checks {
        log::info!("{}: {} (max error {:.3e}, tolerance {:.1e})", c.name, if c.passed { "pass" } else { "FAIL" }, c.max_error, c.tolerance);
    }
    Ok(VerifySummary { passed: checks.iter().all(|c| c.passed), seed, checks })
}
