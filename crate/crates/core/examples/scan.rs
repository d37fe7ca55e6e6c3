//! Total curvature `theta^+ - theta^-` along the admissible curve.

use cornerflow::diagnostics::{scan_curvature_integral, ScanOptions};
use cornerflow::shooting::{trace_admissible_arc, InitialPair, ShootingOptions};

fn main() -> cornerflow::Result<()> {
    let opts = ShootingOptions {
        dx: 1e-4,
        ..Default::default()
    };
    let pairs = trace_admissible_arc(InitialPair { u0: 0.0, v0: 0.0 }, (1.0, -0.725), 0.1, 36, 0.0, &opts)?;
    let scan = ScanOptions {
        dx: 1e-4,
        ..Default::default()
    };
    for row in scan_curvature_integral(&pairs, &scan).into_iter().step_by(3) {
        match row.integral {
            Some(v) => println!("({:>9.5}, {:>9.5})  {v:.6}", row.pair.u0, row.pair.v0),
            None => println!(
                "({:>9.5}, {:>9.5})  {}",
                row.pair.u0,
                row.pair.v0,
                row.failure.unwrap_or_default()
            ),
        }
    }
    println!("pi = {:.6}", std::f64::consts::PI);
    Ok(())
}
