//! A classical fluctuating field dephases both preparations identically.

use qee::noise::{ou_coherence, static_gaussian_coherence};
use qee::{streamed_noise_coherence, NoiseKind, NoiseProcess, Prep};

fn main() -> qee::Result<()> {
    for (kind, corr_time) in [(NoiseKind::OrnsteinUhlenbeck, 0.5), (NoiseKind::OrnsteinUhlenbeck, f64::INFINITY), (NoiseKind::RandomTelegraph, 0.5)] {
        let proc = NoiseProcess { kind, sigma: 1.0, corr_time, mean: 0.0, seed: 1 };
        let dt = if corr_time.is_finite() { corr_time / 20.0 } else { 0.05 };
        let c0 = streamed_noise_coherence(&proc, dt, 3.0, 20_000, Prep::Zero, 0.0)?;
        let c1 = streamed_noise_coherence(&proc, dt, 3.0, 20_000, Prep::One, 7.0)?;
        println!("{kind:?}, corr_time {corr_time}: preparations identical = {}", c0 == c1);
        for i in (0..c0.t.len()).step_by(c0.t.len() / 4) {
            let t = c0.t[i];
            let exact = if corr_time.is_finite() { ou_coherence(1.0, corr_time, t) } else { static_gaussian_coherence(1.0, t) };
            let shown = if kind == NoiseKind::OrnsteinUhlenbeck { format!("{exact:.4}") } else { "-".into() };
            println!("  t = {t:.2}: |rho| = {:.4} +- {:.4}   gaussian {shown}", c0.value[i].norm(), c0.std_err_abs[i]);
        }
    }
    Ok(())
}
