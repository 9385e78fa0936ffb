//! Conditional bath states and the entanglement criterion for a single
//! nucleus, with and without polarization.

use qee::quantum::spin_half::{ix, iz};
use qee::{qee_criterion, EnvState, HermitianOperator, PureDephasingModel};

fn main() -> qee::Result<()> {
    let omega = 1.346;
    let h_env = HermitianOperator::new(iz().scale(omega.into()))?;
    let coupling = HermitianOperator::new(&iz().scale((-0.25).into()) + &ix().scale(0.4.into()))?;
    let model = PureDephasingModel::rotating(h_env, HermitianOperator::zeros(2), coupling)?;

    println!("{:>6} {:>14} {:>14}", "tau", "d (p = 1)", "d (p = 0)");
    for k in 0..=8 {
        let tau = 0.5 * k as f64;
        let polarized = qee_criterion(&model, &EnvState::spin_half(1.0)?, tau, qee::DEFAULT_QEE_TOLERANCE)?;
        let mixed = qee_criterion(&model, &EnvState::maximally_mixed(2), tau, qee::DEFAULT_QEE_TOLERANCE)?;
        println!("{tau:>6.2} {:>14.6e} {:>14.6e}", polarized.distance, mixed.distance);
    }
    println!("a maximally mixed nucleus never entangles with the qubit");
    Ok(())
}
