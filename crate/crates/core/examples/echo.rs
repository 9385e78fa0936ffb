//! Spin echo as a test for the witness blind spot: only a bath whose
//! conditional Hamiltonians commute recovers the full coherence.

use qee::{echo_trace, Bath, BathSpec, TimeGrid};

fn main() -> qee::Result<()> {
    let bath = Bath::generate(&BathSpec::default())?;
    let mut longitudinal = bath.spins.clone();
    for s in &mut longitudinal {
        s.coupling[0] = 0.0;
        s.coupling[1] = 0.0;
    }
    let tau = TimeGrid::new(0.0, 20.0, 11)?.values();
    let full = echo_trace(&bath.spins, &tau)?;
    let commuting = echo_trace(&longitudinal, &tau)?;
    println!("{:>6} {:>12} {:>14}", "tau", "|echo|", "|echo| A_zz only");
    for i in 0..tau.len() {
        println!("{:>6.1} {:>12.6} {:>14.6}", tau[i], full[i].norm(), commuting[i].norm());
    }
    Ok(())
}
