//! Command-line driver behind the `qee` binary.
//!
//! Every command writes its primary output to `--out` (or a default name) and
//! an `<out>.config.toml` next to it holding the effective configuration.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::config::{Overrides, RunConfig};
use crate::dephasing::{qee_criterion_with, DistanceMetric, EntanglementReport, Prep};
use crate::error::{Error, Result};
use crate::noise::streamed_noise_coherence;
use crate::nv::{format, Bath, BathSpin, BathSummary};
use crate::output::{echo_csv, noise_csv, trace_csv};
use crate::protocol::{
    dense_equivalent, echo_trace, factorized_qee_report, protocol_trace, spin_commutator_norms, TraceMetadata,
    TraceOptions,
};
use crate::verify;

/// Largest polarized sub-bath for which the trace-norm report is computed densely.
const MAX_DENSE_POLARIZED: usize = 10;

#[derive(Debug, Parser)]
#[command(name = "qee", version, about = "Qubit-only witness of qubit-environment entanglement")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub flags: Flags,
}

#[derive(Debug, Args)]
pub struct Flags {
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed for the lattice, noise and verify streams.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Primary output file.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads (defaults to all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Evaluate only the t = τ slice.
    #[arg(long, global = true)]
    pub diagonal: bool,
    /// Bath file written by `gen-bath`.
    #[arg(long, global = true)]
    pub bath: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate, polarize and save a nuclear-spin bath.
    GenBath,
    /// Two-preparation coherence trace and per-τ entanglement report.
    RunProtocol,
    /// Spin-echo coherence per τ.
    Echo,
    /// Classical-noise dephasing for both preparations.
    Noise,
    /// Run the oracle self-checks.
    Verify {
        /// Flip the sign of the closed-form single-spin difference.
        #[arg(long)]
        inject_fault: bool,
    },
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.flags.seed,
            out: self.flags.out.clone(),
            threads: self.flags.threads,
            diagonal: self.flags.diagonal,
            bath_file: self.flags.bath.clone(),
            inject_fault: matches!(self.command, Command::Verify { inject_fault: true }),
        }
    }

    pub fn effective_config(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::load(self.flags.config.as_deref())?;
        cfg.apply(&self.overrides());
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn run(cli: &Cli) -> Result<()> {
    let cfg = cli.effective_config()?;
    let exec = || match cli.command {
        Command::GenBath => gen_bath(&cfg).map(|_| ()),
        Command::RunProtocol => run_protocol(&cfg).map(|_| ()),
        Command::Echo => echo(&cfg).map(|_| ()),
        Command::Noise => noise(&cfg).map(|_| ()),
        Command::Verify { .. } => verify(&cfg).map(|_| ()),
    };
    match cfg.threads {
        None => exec(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::numerical(format!("thread pool: {e}")))?
            .install(exec),
    }
}

fn out_path(cfg: &RunConfig, default: &str) -> PathBuf {
    cfg.out.clone().unwrap_or_else(|| PathBuf::from(default))
}

fn sidecar(out: &Path, suffix: &str) -> PathBuf {
    out.with_extension(suffix)
}

fn write_outputs(cfg: &RunConfig, out: &Path, primary: &str) -> Result<()> {
    std::fs::write(out, primary)?;
    std::fs::write(sidecar(out, "config.toml"), cfg.to_toml()?)?;
    Ok(())
}

fn load_bath(cfg: &RunConfig) -> Result<Bath> {
    let path = cfg
        .bath_file
        .as_ref()
        .ok_or_else(|| Error::validation("no bath file: pass --bath or set bath_file in the config"))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::validation(format!("cannot read bath file {}: {e}", path.display())))?;
    format::read_bath(&text)
}

pub fn gen_bath(cfg: &RunConfig) -> Result<BathSummary> {
    let bath = Bath::generate(&cfg.bath_spec())?;
    let out = out_path(cfg, "bath.txt");
    write_outputs(cfg, &out, &format::write_bath(&bath)?)?;
    let summary = BathSummary::of(&bath);
    println!("{summary}");
    println!("wrote {}", out.display());
    Ok(summary)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProtocolReport {
    pub metric: DistanceMetric,
    /// Distances are taken over the polarized spins only.
    pub subsystem: &'static str,
    pub spins: usize,
    pub polarized: usize,
    /// Every nucleus commutes with its conditional partner: the witness is blind.
    pub commuting: bool,
    pub max_commutator_norm: f64,
    pub max_abs_dnorm_re: f64,
    pub max_abs_dnorm_im: f64,
    pub reports: Vec<EntanglementReport>,
}

fn reports(cfg: &RunConfig, spins: &[BathSpin], tau: &[f64]) -> Result<Vec<EntanglementReport>> {
    let tol = cfg.tolerance.qee;
    match cfg.tolerance.metric {
        DistanceMetric::Frobenius => tau.iter().map(|&t| factorized_qee_report(spins, t, tol)).collect(),
        DistanceMetric::TraceNorm => {
            let polarized: Vec<BathSpin> = spins.iter().filter(|s| s.polarization != 0.0).cloned().collect();
            if polarized.is_empty() {
                return Ok(tau.iter().map(|&t| EntanglementReport::new(t, 0.0, tol)).collect());
            }
            if polarized.len() > MAX_DENSE_POLARIZED {
                return Err(Error::validation(format!(
                    "trace-norm report supports at most {MAX_DENSE_POLARIZED} polarized spins, bath has {}",
                    polarized.len()
                )));
            }
            let (model, state) = dense_equivalent(&polarized)?;
            tau.iter().map(|&t| qee_criterion_with(&model, &state, t, tol, DistanceMetric::TraceNorm)).collect()
        }
    }
}

pub fn run_protocol(cfg: &RunConfig) -> Result<ProtocolReport> {
    let bath = load_bath(cfg)?;
    let grid = cfg.grid.protocol_grid()?;
    let mut trace = protocol_trace(&bath.spins, &grid, &TraceOptions::default())?;
    trace.metadata = TraceMetadata {
        b_tesla: Some(bath.spec.b_tesla),
        seed: Some(bath.spec.lattice.seed),
        ..trace.metadata
    };
    let norms = spin_commutator_norms(&bath.spins);
    let max_commutator_norm = norms.iter().copied().fold(0.0, f64::max);
    let report = ProtocolReport {
        metric: cfg.tolerance.metric,
        subsystem: "polarized",
        spins: trace.metadata.spins,
        polarized: trace.metadata.polarized,
        commuting: max_commutator_norm == 0.0,
        max_commutator_norm,
        max_abs_dnorm_re: trace.max_abs_delta_re(),
        max_abs_dnorm_im: trace.max_abs_delta_im(),
        reports: reports(cfg, &bath.spins, &grid.tau)?,
    };
    let out = out_path(cfg, "trace.csv");
    write_outputs(cfg, &out, &trace_csv(&trace))?;
    let json = serde_json::to_string_pretty(&report).map_err(|e| Error::Parse(e.to_string()))?;
    std::fs::write(sidecar(&out, "report.json"), json + "\n")?;

    let detected = report.reports.iter().filter(|r| r.qee_detected).count();
    println!(
        "{} points, max |Re dnorm| {:.6e}, max |Im dnorm| {:.6e}, QEE at {detected} of {} delays",
        trace.rho0.len(),
        report.max_abs_dnorm_re,
        report.max_abs_dnorm_im,
        report.reports.len()
    );
    if report.commuting {
        println!("commuting environment — witness blind spot possible");
    }
    println!("wrote {}", out.display());
    Ok(report)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EchoOutcome {
    pub tau: Vec<f64>,
    pub echo: Vec<num_complex::Complex64>,
    pub blind_spot: bool,
}

pub fn echo(cfg: &RunConfig) -> Result<EchoOutcome> {
    let bath = load_bath(cfg)?;
    let tau = cfg.grid.tau_grid()?.values();
    let echo = echo_trace(&bath.spins, &tau)?;
    let blind_spot = echo.iter().all(|e| (e.norm() - 0.5).abs() <= cfg.tolerance.echo);
    let out = out_path(cfg, "echo.csv");
    write_outputs(cfg, &out, &echo_csv(&tau, &echo))?;
    let min = echo.iter().map(|e| e.norm()).fold(f64::INFINITY, f64::min);
    println!("{} delays, min |echo| {:.6e}", tau.len(), min);
    if blind_spot {
        println!("commuting environment — witness blind spot possible");
    }
    println!("wrote {}", out.display());
    Ok(EchoOutcome { tau, echo, blind_spot })
}

pub fn noise(cfg: &RunConfig) -> Result<()> {
    let proc = cfg.noise_process();
    let n = &cfg.noise;
    if n.tau.is_empty() || n.tau.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
        return Err(Error::validation("noise.tau must be a non-empty list of non-negative delays"));
    }
    let c0 = streamed_noise_coherence(&proc, n.dt, n.t_max, n.count, Prep::Zero, n.tau[0])?;
    let c1 = streamed_noise_coherence(&proc, n.dt, n.t_max, n.count, Prep::One, n.tau[0])?;
    if c0 != c1 {
        return Err(Error::numerical("classical noise produced preparation-dependent coherence"));
    }
    let out = out_path(cfg, "noise.csv");
    write_outputs(cfg, &out, &noise_csv(&n.tau, &c0, &c1))?;
    let last = c0.value.last().map(|v| v.norm()).unwrap_or(0.5);
    println!("{} trajectories, |coherence| at t_max {:.6e}, preparations identical", n.count, last);
    println!("wrote {}", out.display());
    Ok(())
}

pub fn verify(cfg: &RunConfig) -> Result<verify::VerifySummary> {
    let summary = verify::run(&cfg.verify, cfg.seed)?;
    let json = serde_json::to_string_pretty(&summary).map_err(|e| Error::Parse(e.to_string()))? + "\n";
    print!("{json}");
    if let Some(out) = &cfg.out {
        write_outputs(cfg, out, &json)?;
    }
    summary.into_result()
}
