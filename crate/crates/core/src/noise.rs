//! Qubit dephasing by an external classical field.
//!
//! When the environment acts only through a stochastic field `Δξ(t)` that does
//! not depend on the qubit, the qubit state during the delay `τ` is frozen and
//! the coherence is `½ ⟨exp(−i ∫₀ᵗ Δξ)⟩` for either preparation. The mean
//! field `ξ̄` and `ε̄` drop out and are not simulated; the deterministic phase
//! `e^{−iΔε t}` is removed as in the rest of the crate.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dephasing::Prep;
use crate::error::{Error, Result};

/// Trajectories reduced together; fixed so that sums do not depend on the
/// worker count.
const CHUNK: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NoiseKind {
    OrnsteinUhlenbeck,
    RandomTelegraph,
}

/// Stationary process with standard deviation `sigma` (rad·μs⁻¹) and
/// correlation `e^{−|s|/corr_time}`. `corr_time = ∞` is a static random
/// offset per trajectory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseProcess {
    pub kind: NoiseKind,
    pub sigma: f64,
    pub corr_time: f64,
    pub mean: f64,
    pub seed: u64,
}

impl NoiseProcess {
    pub fn validate(&self) -> Result<()> {
        if !(self.sigma >= 0.0 && self.sigma.is_finite()) {
            return Err(Error::validation(format!("sigma must be finite and >= 0, got {}", self.sigma)));
        }
        if !(self.corr_time > 0.0) {
            return Err(Error::validation(format!("corr_time must be > 0, got {}", self.corr_time)));
        }
        if !self.mean.is_finite() {
            return Err(Error::validation("mean must be finite"));
        }
        Ok(())
    }

    fn rng(&self, trajectory: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(trajectory);
        rng
    }

    /// Writes one stationary trajectory of `len` samples into `out`.
    fn fill(&self, trajectory: u64, dt: f64, out: &mut Vec<f64>, len: usize) {
        out.clear();
        let mut rng = self.rng(trajectory);
        let decay = (-dt / self.corr_time).exp();
        match self.kind {
            NoiseKind::OrnsteinUhlenbeck => {
                let kick = self.sigma * (1.0 - decay * decay).sqrt();
                let mut x: f64 = self.sigma * rng.sample::<f64, _>(StandardNormal);
                out.push(self.mean + x);
                for _ in 1..len {
                    x = decay * x + kick * rng.sample::<f64, _>(StandardNormal);
                    out.push(self.mean + x);
                }
            }
            NoiseKind::RandomTelegraph => {
                // Symmetric two-state process; flip probability per step ½(1 − e^{−dt/τc}).
                let flip = 0.5 * (1.0 - decay);
                let mut up = rng.random_bool(0.5);
                for i in 0..len {
                    if i > 0 && rng.random_bool(flip) {
                        up = !up;
                    }
                    out.push(self.mean + if up { self.sigma } else { -self.sigma });
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoiseTrajectory {
    pub dt: f64,
    pub samples: Vec<f64>,
}

fn samples_for(dt: f64, horizon: f64) -> Result<usize> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::validation(format!("dt must be > 0, got {dt}")));
    }
    if !(horizon >= dt && horizon.is_finite()) {
        return Err(Error::validation(format!("horizon must be >= dt, got {horizon}")));
    }
    Ok((horizon / dt).round() as usize + 1)
}

fn warn_on_coarse_step(proc: &NoiseProcess, dt: f64) {
    if dt > proc.corr_time / 20.0 {
        log::warn!("dt = {dt} exceeds corr_time/20 = {}; trapezoidal phase will be biased", proc.corr_time / 20.0);
    }
}

/// `count` independent trajectories on `[0, horizon]` with step `dt`.
/// Trajectory `i` uses stream `i` of the seeded generator.
pub fn sample_trajectories(proc: &NoiseProcess, dt: f64, horizon: f64, count: usize) -> Result<Vec<NoiseTrajectory>> {
    proc.validate()?;
    let len = samples_for(dt, horizon)?;
    if count == 0 {
        return Err(Error::validation("need at least one trajectory"));
    }
    warn_on_coarse_step(proc, dt);
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut samples = Vec::with_capacity(len);
            proc.fill(i, dt, &mut samples, len);
            NoiseTrajectory { dt, samples }
        })
        .collect())
}

/// Running sums of `cos φ`, `sin φ` and their second moments per time step.
#[derive(Debug, Clone, PartialEq)]
struct Moments {
    n: usize,
    c: Vec<f64>,
    s: Vec<f64>,
    cc: Vec<f64>,
    ss: Vec<f64>,
    cs: Vec<f64>,
}

impl Moments {
    fn zeros(len: usize) -> Moments {
        Moments { n: 0, c: vec![0.0; len], s: vec![0.0; len], cc: vec![0.0; len], ss: vec![0.0; len], cs: vec![0.0; len] }
    }

    /// Trapezoidal phase `φ(t_i) = ∫₀^{t_i} Δξ`, accumulated from the first sample.
    fn add_trajectory(&mut self, dt: f64, samples: &[f64]) {
        let mut phase = 0.0;
        for i in 0..self.c.len() {
            if i > 0 {
                phase += 0.5 * dt * (samples[i - 1] + samples[i]);
            }
            let (s, c) = (-phase).sin_cos();
            self.c[i] += c;
            self.s[i] += s;
            self.cc[i] += c * c;
            self.ss[i] += s * s;
            self.cs[i] += c * s;
        }
        self.n += 1;
    }

    fn merge(mut self, other: &Moments) -> Moments {
        for i in 0..self.c.len() {
            self.c[i] += other.c[i];
            self.s[i] += other.s[i];
            self.cc[i] += other.cc[i];
            self.ss[i] += other.ss[i];
            self.cs[i] += other.cs[i];
        }
        self.n += other.n;
        self
    }
}

/// Monte Carlo coherence `½⟨e^{−iφ(t)}⟩` with its standard errors.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseCoherence {
    pub t: Vec<f64>,
    pub value: Vec<Complex64>,
    /// Standard error of `|value|`, i.e. of the component along the mean.
    pub std_err_abs: Vec<f64>,
    pub trajectories: usize,
}

impl NoiseCoherence {
    fn from_moments(dt: f64, m: &Moments) -> NoiseCoherence {
        let n = m.n as f64;
        let len = m.c.len();
        let mut value = Vec::with_capacity(len);
        let mut std_err_abs = Vec::with_capacity(len);
        for i in 0..len {
            let (mc, ms) = (m.c[i] / n, m.s[i] / n);
            let (vcc, vss, vcs) = (m.cc[i] / n - mc * mc, m.ss[i] / n - ms * ms, m.cs[i] / n - mc * ms);
            let r = mc.hypot(ms);
            // Variance of the projection onto the mean direction.
            let var = if r > 0.0 {
                let (ux, uy) = (mc / r, ms / r);
                ux * ux * vcc + uy * uy * vss + 2.0 * ux * uy * vcs
            } else {
                0.5 * (vcc + vss)
            };
            let corrected = var.max(0.0) * n / (n - 1.0).max(1.0);
            value.push(Complex64::new(0.5 * mc, 0.5 * ms));
            std_err_abs.push(0.5 * (corrected / n).sqrt());
        }
        NoiseCoherence { t: (0..len).map(|i| i as f64 * dt).collect(), value, std_err_abs, trajectories: m.n }
    }
}

fn check_horizon(trajs: &[NoiseTrajectory], t_max: f64) -> Result<(f64, usize)> {
    let first = trajs.first().ok_or_else(|| Error::validation("no trajectories"))?;
    let dt = first.dt;
    let len = samples_for(dt, t_max.max(dt))?;
    let len = if t_max < dt { 1 } else { len };
    for tr in trajs {
        if tr.dt != dt {
            return Err(Error::validation("trajectories must share dt"));
        }
        if tr.samples.len() < len {
            return Err(Error::validation(format!(
                "horizon {t_max} needs {len} samples, trajectory has {}",
                tr.samples.len()
            )));
        }
    }
    Ok((dt, len))
}

/// Coherence on `t = 0, dt, …, t_max` for preparation `prep` and delay `tau`.
///
/// `prep` and `tau` are accepted for interface parity with the quantum
/// protocol and do not enter the computation: a qubit-independent field
/// cannot distinguish the preparations.
pub fn noise_coherence(trajs: &[NoiseTrajectory], prep: Prep, tau: f64, t_max: f64) -> Result<NoiseCoherence> {
    let _ = (prep, tau);
    let (dt, len) = check_horizon(trajs, t_max)?;
    let moments = trajs
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut m = Moments::zeros(len);
            for tr in chunk {
                m.add_trajectory(dt, &tr.samples[..len]);
            }
            m
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(Moments::zeros(len), |acc, m| acc.merge(m));
    Ok(NoiseCoherence::from_moments(dt, &moments))
}

/// Same estimator as [`noise_coherence`] without materializing all
/// trajectories: each chunk is generated, integrated and dropped.
pub fn streamed_noise_coherence(
    proc: &NoiseProcess,
    dt: f64,
    t_max: f64,
    count: usize,
    prep: Prep,
    tau: f64,
) -> Result<NoiseCoherence> {
    let _ = (prep, tau);
    proc.validate()?;
    let len = samples_for(dt, t_max)?;
    if count == 0 {
        return Err(Error::validation("need at least one trajectory"));
    }
    warn_on_coarse_step(proc, dt);
    let chunks = count.div_ceil(CHUNK);
    let moments = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut m = Moments::zeros(len);
            let mut buf = Vec::with_capacity(len);
            for i in c * CHUNK..((c + 1) * CHUNK).min(count) {
                proc.fill(i as u64, dt, &mut buf, len);
                m.add_trajectory(dt, &buf);
            }
            m
        })
        .collect::<Vec<_>>()
        .iter()
        .fold(Moments::zeros(len), |acc, m| acc.merge(m));
    Ok(NoiseCoherence::from_moments(dt, &moments))
}

/// `½ e^{−σ²t²/2}`: Gaussian static offset.
pub fn static_gaussian_coherence(sigma: f64, t: f64) -> f64 {
    0.5 * (-0.5 * sigma * sigma * t * t).exp()
}

/// `½ exp(−σ²τ_c² (t/τ_c − 1 + e^{−t/τ_c}))`: exact OU (Gaussian) dephasing.
pub fn ou_coherence(sigma: f64, corr_time: f64, t: f64) -> f64 {
    let x = t / corr_time;
    0.5 * (-sigma * sigma * corr_time * corr_time * (x - 1.0 + (-x).exp())).exp()
}
