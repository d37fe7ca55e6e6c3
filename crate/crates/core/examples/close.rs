//! Closing the open profile with a smooth loop.

use cornerflow::curve::{
    close_curve, enclosed_area, extend_theta_with_loop, has_self_intersection, reconstruct_curve, Anchor,
    ClosureOptions,
};
use cornerflow::profile::{build_profile, Experiment};

fn main() -> cornerflow::Result<()> {
    let p = build_profile(&Experiment::Short.config())?.profile;
    let res = close_curve(&p, &ClosureOptions::default())?;
    println!(
        "alpha = {:.15}, beta = {:.15}, residual {:.1e}",
        res.params.alpha,
        res.params.beta,
        res.residual.norm()
    );
    let closed = extend_theta_with_loop(&p, res.params)?;
    let curve = reconstruct_curve(&closed, Anchor::origin_at(closed.s_a));
    println!("{} nodes on [{:.2}, {:.2}]", closed.n + 1, closed.s_a, closed.s_b);
    println!("gap {:.1e}, area {:.3}", curve.gap().norm(), enclosed_area(&curve));
    println!("self-intersecting: {}", has_self_intersection(&curve, 16));
    Ok(())
}
