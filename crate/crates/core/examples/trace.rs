//! Following the admissible curve by arc length from the origin.

use cornerflow::shooting::{trace_admissible_arc, InitialPair, ShootingOptions};

fn main() -> cornerflow::Result<()> {
    let opts = ShootingOptions {
        dx: 1e-4,
        ..Default::default()
    };
    let start = InitialPair { u0: 0.0, v0: 0.0 };
    let pairs = trace_admissible_arc(start, (1.0, -0.725), 0.1, 20, 0.0, &opts)?;
    for p in &pairs {
        println!("{:>10.6} {:>10.6}", p.u0, p.v0);
    }
    Ok(())
}
