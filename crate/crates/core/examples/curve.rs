//! Reconstructing `z(s)` from the angle and checking the corner geometry.

use cornerflow::curve::{anchor_z0, enclosed_area, reconstruct_curve, Anchor};
use cornerflow::profile::{build_profile, Experiment};
use num_complex::Complex64;

fn main() -> cornerflow::Result<()> {
    let cfg = Experiment::Short.config();
    let p = build_profile(&cfg)?.profile;
    let curve = reconstruct_curve(&p, Anchor::corner_right(&p));
    let j0 = p.origin_index().expect("s = 0 is a node");
    let z0 = anchor_z0(1.0, cfg.pair, Complex64::from_polar(1.0, p.theta[j0]));
    println!("z(0) reconstructed {:.6}, self-similar {:.6}", curve.z[j0], z0);
    println!("largest chord deviation {:.1e}", curve.max_chord_deviation());
    let left = Complex64::from_polar(p.s_a, p.theta_minus);
    println!("z(s_a) {:.4}, corner ray {:.4}", curve.z[0], left);
    println!("signed area swept about the origin {:.3}", enclosed_area(&curve));
    Ok(())
}
