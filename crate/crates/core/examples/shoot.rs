//! Admissible slopes by bisection on the escape direction.

use cornerflow::shooting::{find_admissible_v0, integrate_profile, InitialPair, DEFAULT_DX};

fn main() -> cornerflow::Result<()> {
    for (u0, lo, hi) in [(0.024, -0.018, -0.017), (0.72, 1.16, 1.1602)] {
        let v0 = find_admissible_v0(u0, lo, hi, 0.0, 20.0, DEFAULT_DX)?;
        println!("u(0) = {u0}: u_x(0) = {v0:.16}");
    }
    let sol = integrate_profile(InitialPair::reference(), -10.0, 20.0, DEFAULT_DX)?;
    println!(
        "reference profile decays to |u| = {:.2e} at x = {:.4}",
        sol.floor.u.abs(),
        sol.floor.x
    );
    Ok(())
}
