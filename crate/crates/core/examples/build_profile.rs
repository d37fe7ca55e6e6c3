//! Initial angle `theta(s, 1)` for the shortest reference experiment.

use cornerflow::profile::{build_profile, theta_s_from_theta, Experiment};

fn main() -> cornerflow::Result<()> {
    let built = build_profile(&Experiment::Short.config())?;
    let p = &built.profile;
    let est = &built.estimate;
    println!(
        "domain [{:.4}, {:.4}], N = {}, ds = {:.8}",
        p.s_a, p.s_b, p.n, p.delta_s
    );
    println!(
        "first max   s = {:.5} theta = {:.6}",
        est.first_max.s, est.first_max.theta
    );
    println!(
        "first min   s = {:.5} theta = {:.6}",
        est.first_min.s, est.first_min.theta
    );
    println!("theta^-     {:.7}", p.theta_minus);
    println!(
        "joint       s = {:.4} theta = {:.6} k = {:.6}",
        built.joint.s_joint, built.joint.theta_at_joint, built.joint.k_at_joint
    );

    // spectral derivative against the ODE curvature, right of a cut
    let k = theta_s_from_theta(p);
    let ode = built.ode_curvature_on_grid();
    for cut in [-113.3, -110.6, -108.6] {
        let err = (0..=p.n)
            .filter(|&j| p.s(j) >= cut)
            .filter_map(|j| ode[j].map(|kk| (k[j] - kk).abs()))
            .fold(0.0, f64::max);
        println!("max |theta_s - k| on [{cut}, s_b] = {err:.2e}");
    }
    Ok(())
}
