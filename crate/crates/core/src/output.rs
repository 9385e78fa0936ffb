//! Plot-ready CSV traces. Floats carry 17 significant digits.

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::noise::NoiseCoherence;
use crate::protocol::ProtocolTrace;

pub const TRACE_HEADER: &str = "tau_us,t_us,re_rho0,im_rho0,re_rho1,im_rho1,re_dnorm,im_dnorm,abs_rho0,abs_rho1";
pub const ECHO_HEADER: &str = "tau_us,re_echo,im_echo,abs_echo";

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn row(out: &mut String, tau: f64, t: f64, r0: Complex64, r1: Complex64, d: Complex64) {
    let _ = writeln!(
        out,
        "{},{},{},{},{},{},{},{},{},{}",
        f(tau),
        f(t),
        f(r0.re),
        f(r0.im),
        f(r1.re),
        f(r1.im),
        f(d.re),
        f(d.im),
        f(r0.norm()),
        f(r1.norm())
    );
}

pub fn trace_csv(trace: &ProtocolTrace) -> String {
    let mut out = String::with_capacity(200 * (trace.rho0.len() + 1));
    out.push_str(TRACE_HEADER);
    out.push('\n');
    for i in 0..trace.rho0.len() {
        let (tau, t) = trace.point(i);
        row(&mut out, tau, t, trace.rho0[i], trace.rho1[i], trace.delta_norm[i]);
    }
    out
}

pub fn echo_csv(tau: &[f64], echo: &[Complex64]) -> String {
    let mut out = String::from(ECHO_HEADER);
    out.push('\n');
    for (t, e) in tau.iter().zip(echo) {
        let _ = writeln!(out, "{},{},{},{}", f(*t), f(e.re), f(e.im), f(e.norm()));
    }
    out
}

/// One block of rows per delay; both preparations are taken from their own runs.
pub fn noise_csv(tau: &[f64], prep0: &NoiseCoherence, prep1: &NoiseCoherence) -> String {
    let mut out = String::from(TRACE_HEADER);
    out.push('\n');
    for &tj in tau {
        for i in 0..prep0.t.len() {
            let (r0, r1) = (prep0.value[i], prep1.value[i]);
            row(&mut out, tj, prep0.t[i], r0, r1, (r0 - r1) * 2.0);
        }
    }
    out
}
