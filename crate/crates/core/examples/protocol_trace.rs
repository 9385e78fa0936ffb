//! Two-preparation coherence on the t = τ diagonal for a default NV bath.

use qee::protocol::factorized_qee_report;
use qee::{protocol_trace, Bath, BathSpec, ProtocolGrid, TimeGrid, TraceOptions};

fn main() -> qee::Result<()> {
    let bath = Bath::generate(&BathSpec::default())?;
    let grid = ProtocolGrid::diagonal(TimeGrid::new(0.0, 40.0, 41)?.values())?;
    let trace = protocol_trace(&bath.spins, &grid, &TraceOptions::default())?;

    println!("{} spins, {} polarized", trace.metadata.spins, trace.metadata.polarized);
    println!("{:>6} {:>12} {:>12} {:>12} {:>12}", "tau", "|rho0|", "|rho1|", "Im dnorm", "distance");
    for (i, &tau) in grid.tau.iter().enumerate().step_by(4) {
        let report = factorized_qee_report(&bath.spins, tau, qee::DEFAULT_QEE_TOLERANCE)?;
        println!(
            "{tau:>6.1} {:>12.6} {:>12.6} {:>12.6} {:>12.4e}",
            trace.rho0[i].norm(),
            trace.rho1[i].norm(),
            trace.delta_norm[i].im,
            report.distance
        );
    }
    println!("max |Im dnorm| = {:.4}", trace.max_abs_delta_im());
    Ok(())
}
