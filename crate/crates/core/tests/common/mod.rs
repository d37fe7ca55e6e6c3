//! Measurements shared by the property suite and the acceptance run.
#![allow(dead_code)]

use std::f64::consts::PI;

use cornerflow::curve::{enclosed_area, reconstruct_curve, Anchor};
use cornerflow::evolve::{evolve, EvolutionConfig, SpectralState, Stepper};
use cornerflow::fourier::Fourier;
use cornerflow::profile::{theta_s_from_theta, AngleProfile};
use cornerflow::shooting::{integrate_profile, InitialPair};

pub fn profile_from(s_a: f64, s_b: f64, n: usize, f: impl Fn(f64) -> f64) -> AngleProfile {
    let ds = (s_b - s_a) / n as f64;
    let theta: Vec<f64> = (0..=n).map(|j| f(s_a + j as f64 * ds)).collect();
    AngleProfile {
        s_a,
        s_b,
        n,
        theta_minus: theta[0],
        theta_plus: theta[n],
        theta,
        delta_s: ds,
        t: 1.0,
    }
}

pub fn gaussian(amplitude: f64) -> AngleProfile {
    // exp(-400) at the ends is zero to working precision
    let mut p = profile_from(-20.0, 20.0, 256, |s| amplitude * (-s * s).exp());
    p.theta[0] = 0.0;
    p.theta[256] = 0.0;
    p.theta_minus = 0.0;
    p.theta_plus = 0.0;
    p
}

// Node pinning zeroes a single node after each step; on these test states the
// mean of the cubic term is nonzero, so the pin would inject a spike every
// step that is not smooth in dt. The time integrator is measured alone.
pub fn run(profile: &AngleProfile, dt: f64, steps: usize) -> Vec<f64> {
    let mut fourier = Fourier::new(profile.n);
    let mut state = SpectralState::from_profile(profile, &mut fourier);
    let mut stepper = Stepper::new(&state, dt).with_pinning(false);
    for _ in 0..steps {
        stepper.step(&mut state, None).unwrap();
    }
    state.periodic_values(&mut fourier)
}

pub fn max_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Observed order of the shooting integrator from `u(-3)` at `dx = 0.04, 0.02, 0.01`.
pub fn ode_order() -> f64 {
    // backward sweeps run without escape checks
    let pair = InitialPair { u0: 0.72, v0: 1.16 };
    let left = |dx: f64| {
        let sol = integrate_profile(pair, -3.0, 0.0, dx).unwrap();
        assert_eq!(sol.x[0], -3.0);
        sol.u[0]
    };
    let e = [left(0.04), left(0.02), left(0.01)];
    ((e[0] - e[1]).abs() / (e[1] - e[2]).abs()).log2()
}

/// Observed global order of the IF-RK4 stepper over `t = 0.2`.
pub fn pde_order() -> f64 {
    let p0 = gaussian(1.0);
    let a = run(&p0, -0.01, 20);
    let b = run(&p0, -0.005, 40);
    let c = run(&p0, -0.0025, 80);
    (max_diff(&a, &b) / max_diff(&b, &c)).log2()
}

/// Slope of log(one step vs two half steps) against log dt.
pub fn pde_local_order() -> f64 {
    let p0 = gaussian(0.5);
    let dts = [4e-3, 2e-3, 1e-3, 5e-4];
    let xs: Vec<f64> = dts.iter().map(|d: &f64| d.ln()).collect();
    let ys: Vec<f64> = dts
        .iter()
        .map(|&dt| max_diff(&run(&p0, -dt, 1), &run(&p0, -0.5 * dt, 2)).ln())
        .collect();
    cornerflow::diagnostics::linear_fit(&xs, &ys).unwrap().slope
}

/// Max deviation after `steps` steps out and as many back, for `dt` and `dt/2`.
pub fn round_trip_errors() -> [(f64, f64); 2] {
    let p0 = gaussian(1.0);
    let theta0 = p0.periodized();
    let round_trip = |dt: f64, steps: usize| {
        let mut fourier = Fourier::new(p0.n);
        let mut state = SpectralState::from_profile(&p0, &mut fourier);
        let mut fwd = Stepper::new(&state, dt).with_pinning(false);
        let mut back = Stepper::new(&state, -dt).with_pinning(false);
        for _ in 0..steps {
            fwd.step(&mut state, None).unwrap();
        }
        for _ in 0..steps {
            back.step(&mut state, None).unwrap();
        }
        max_diff(&state.periodic_values(&mut fourier), &theta0)
    };
    [(0.0025, round_trip(0.0025, 80)), (0.00125, round_trip(0.00125, 160))]
}

/// Linear-only stepper against `sum a_m cos(m s + m^3 t + phi_m)` on `[0, 2 pi)`.
pub fn linear_flow_error(amps: &[f64], phases: &[f64], dt: f64, steps: usize) -> f64 {
    let n = 64;
    let l = 2.0 * PI;
    let field = |s: f64, t: f64| -> f64 {
        amps.iter()
            .zip(phases)
            .enumerate()
            .map(|(i, (a, ph))| {
                let m = (i + 1) as f64;
                a * (m * s + m * m * m * t + ph).cos()
            })
            .sum()
    };
    let mut fourier = Fourier::new(n);
    let values: Vec<f64> = (0..n).map(|j| field(j as f64 * l / n as f64, 0.0)).collect();
    let mut state = SpectralState {
        modes: fourier.forward_real(&values),
        t: 0.0,
        s_a: 0.0,
        length: l,
        theta_minus: 0.0,
        theta_plus: 0.0,
    };
    let mut stepper = Stepper::new(&state, dt).linear_only().with_pinning(false);
    for _ in 0..steps {
        stepper.step(&mut state, None).unwrap();
    }
    let got = state.periodic_values(&mut fourier);
    let t = steps as f64 * dt;
    got.iter()
        .enumerate()
        .map(|(j, g)| (g - field(j as f64 * l / n as f64, t)).abs())
        .fold(0.0, f64::max)
}

/// `(gap, |area| - pi)` for the unit circle `theta = phase + s` on `N` intervals.
pub fn unit_circle(n: usize, phase: f64) -> (f64, f64) {
    let p = profile_from(0.0, 2.0 * PI, n, |s| phase + s);
    let curve = reconstruct_curve(&p, Anchor::origin_at(0.0));
    (curve.gap().norm(), enclosed_area(&curve).abs() - PI)
}

/// Largest `|f(p) + f(-p)|` over `u`, `v`, `gamma` of a backward sweep.
pub fn ode_oddness(pair: InitialPair) -> f64 {
    let a = integrate_profile(pair, -4.0, 0.0, 1e-3).unwrap();
    let b = integrate_profile(pair.negated(), -4.0, 0.0, 1e-3).unwrap();
    (0..a.len())
        .map(|i| {
            (a.u[i] + b.u[i])
                .abs()
                .max((a.v[i] + b.v[i]).abs())
                .max((a.gamma[i] + b.gamma[i]).abs())
        })
        .fold(0.0, f64::max)
}

/// Evolves a kink with a bump; returns whether the end values and the
/// turning stayed bit-identical, and the largest `|sum k ds - turning|`.
pub fn turning_conservation() -> (bool, f64) {
    let mut p0 = profile_from(-20.0, 20.0, 512, |s| {
        -2.0 + 1.5 * (1.0 + s.tanh()) + 0.3 * (-s * s).exp()
    });
    p0.theta_minus = -2.0;
    p0.theta_plus = -0.5;
    p0.theta[0] = -2.0;
    p0.theta[512] = -0.5;
    let cfg = EvolutionConfig {
        dt: -1e-3,
        t_end: 0.8,
        cadence: 50,
        ..Default::default()
    };
    let mut seen = Vec::new();
    let mut obs = |p: &AngleProfile| {
        seen.push(p.clone());
        Ok(())
    };
    let out = evolve(&p0, &cfg, &mut [&mut obs]).unwrap();
    seen.push(out.last);
    let mut exact = seen.len() > 3;
    let mut worst: f64 = 0.0;
    for p in &seen {
        exact &= p.theta[0] == -2.0 && p.theta[p.n] == -0.5 && p.turning() == p0.turning();
        let k = theta_s_from_theta(p);
        let sum: f64 = k[..p.n].iter().sum::<f64>() * p.delta_s;
        worst = worst.max((sum - p.turning()).abs());
    }
    (exact, worst)
}
