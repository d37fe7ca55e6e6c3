//! Backward evolution of the reference profile with running diagnostics.

use cornerflow::diagnostics::DiagnosticsRecorder;
use cornerflow::evolve::{evolve, EvolutionConfig};
use cornerflow::profile::{build_profile, Experiment};

fn main() -> cornerflow::Result<()> {
    let cfg = Experiment::Short.config();
    let built = build_profile(&cfg)?;
    let run = EvolutionConfig {
        dt: -1e-4,
        t_end: 0.5,
        cadence: 500,
        ..Default::default()
    };
    let mut recorder = DiagnosticsRecorder::new(cfg.pair.u0, false);
    let out = evolve(&built.profile, &run, &mut [&mut recorder])?;
    println!(
        "{:>6} {:>12} {:>10} {:>10} {:>10}",
        "t", "energy", "k(0,t)", "exact", "support"
    );
    for r in &recorder.records {
        println!(
            "{:>6.3} {:>12.6} {:>10.6} {:>10.6} {:>10.3}",
            r.t, r.energy, r.k0, r.k0_exact, r.support_width
        );
    }
    println!("{} steps, max pin residual {:.1e}", out.steps, out.max_pin_residual);
    Ok(())
}
