//! Build a ¹³C bath around an NV center, save it and read it back.

use qee::nv::format;
use qee::{Bath, BathSpec, BathSummary};

fn main() -> qee::Result<()> {
    let seed = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(0);
    let mut spec = BathSpec::default();
    spec.lattice.seed = seed;
    let bath = Bath::generate(&spec)?;
    println!("seed {seed}: {}", BathSummary::of(&bath));
    println!("larmor frequency {:.4} rad/us", bath.larmor());

    let mut near: Vec<_> = bath.spins.iter().filter(|s| s.polarization != 0.0).collect();
    near.sort_by(|a, b| a.radius().total_cmp(&b.radius()));
    println!("{:>8} {:>10} {:>10} {:>10}", "r (nm)", "A_zx", "A_zy", "A_zz");
    for s in near {
        let [x, y, z] = s.coupling;
        println!("{:>8.3} {x:>10.4} {y:>10.4} {z:>10.4}", s.radius());
    }

    let text = format::write_bath(&bath)?;
    assert_eq!(format::read_bath(&text)?, bath);
    println!("bath file: {} bytes, round trip exact", text.len());
    Ok(())
}
