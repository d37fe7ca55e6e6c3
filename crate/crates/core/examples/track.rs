//! Following the material point `s = 0` towards the corner.

use cornerflow::curve::{anchor_z0, track_point};
use cornerflow::evolve::EvolutionConfig;
use cornerflow::profile::{build_profile, Experiment};
use num_complex::Complex64;

fn main() -> cornerflow::Result<()> {
    let cfg = Experiment::Short.config();
    let p = build_profile(&cfg)?.profile;
    let j0 = p.origin_index().expect("s = 0 is a node");
    let z0 = anchor_z0(1.0, cfg.pair, Complex64::from_polar(1.0, p.theta[j0]));
    let run = EvolutionConfig {
        dt: -1e-4,
        t_end: 0.3,
        cadence: 1000,
        ..Default::default()
    };
    for pt in track_point(&p, &run, 0.0, z0)? {
        // the self-similar prediction scales z(0, t) with (3t)^(1/3)
        let exact = anchor_z0(pt.t, cfg.pair, Complex64::from_polar(1.0, pt.theta));
        println!("t = {:.2}  z = {:.6}  self-similar {:.6}", pt.t, pt.z, exact);
    }
    Ok(())
}
