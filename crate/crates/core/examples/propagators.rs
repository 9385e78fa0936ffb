//! Unitary propagators from the spectral decomposition, checked against the
//! closed-form spin-1/2 rotation.

use qee::quantum::spin_half::field;
use qee::su2::Su2;
use qee::propagator;

fn main() -> qee::Result<()> {
    let h = [0.4, -0.2, 1.3];
    let t = 2.5;
    let dense = propagator(&field(h), t)?;
    let closed = Su2::evolution(h, t).to_matrix();

    let m = dense.matrix();
    let worst = (0..4).map(|k| (m.get(k / 2, k % 2) - closed[k / 2][k % 2]).norm()).fold(0.0, f64::max);
    let unitarity = (&(m * &m.adjoint()) - &qee::ComplexMatrix::identity(2)).frobenius_norm();
    println!("U(t={t}) for h = {h:?}");
    for row in closed {
        println!("  {:+.6} {:+.6}", row[0], row[1]);
    }
    println!("spectral vs closed form: {worst:.2e}, |UU^dag - 1| = {unitarity:.2e}");
    Ok(())
}
