//! Following one material point `s0` through an evolution.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolve::{evaluate_node, evolve, EvolutionConfig, Observer, StageStates};
use crate::profile::AngleProfile;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackedPoint {
    pub t: f64,
    pub theta: f64,
    pub z: Complex64,
}

/// RK4 integration of `theta_t = -theta_sss - theta_s^3 / 2` and
/// `z_t = exp(i theta) (-i theta_ss - theta_s^2 / 2)` at node `s0`, driven by
/// the stage states of the field stepper.
#[derive(Debug, Clone)]
pub struct PointTracker {
    node: usize,
    theta: f64,
    z: Complex64,
    pub history: Vec<TrackedPoint>,
}

impl PointTracker {
    pub fn new(profile: &AngleProfile, s0: f64, z0: Complex64) -> Result<Self> {
        let node = profile.node_index(s0).ok_or(Error::NodeMissing { s: s0 })?;
        Ok(PointTracker {
            node,
            theta: profile.theta[node],
            z: z0,
            history: Vec::new(),
        })
    }

    pub fn node(&self) -> usize {
        // the periodic grid identifies s_b with s_a
        self.node
    }

    pub fn current(&self) -> (f64, Complex64) {
        (self.theta, self.z)
    }
}

/// `(theta_t, z_t)` from `theta` and its first three derivatives.
pub fn point_rates(d: [f64; 4]) -> (f64, Complex64) {
    let [theta, ts, tss, tsss] = d;
    let theta_t = -tsss - 0.5 * ts * ts * ts;
    let z_t = Complex64::from_polar(1.0, theta) * Complex64::new(-0.5 * ts * ts, -tss);
    (theta_t, z_t)
}

impl Observer for PointTracker {
    fn observe(&mut self, profile: &AngleProfile) -> Result<()> {
        self.history.push(TrackedPoint {
            t: profile.t,
            theta: self.theta,
            z: self.z,
        });
        Ok(())
    }

    fn wants_stages(&self) -> bool {
        true
    }

    fn stages(&mut self, st: &StageStates) {
        let n = st.states[0].len();
        let node = self.node % n;
        let rates: Vec<(f64, Complex64)> = st
            .states
            .iter()
            .map(|m| point_rates(evaluate_node(m, node, st.length, st.slope, st.theta_minus)))
            .collect();
        let w = [1.0, 2.0, 2.0, 1.0];
        let mut dtheta = 0.0;
        let mut dz = Complex64::default();
        for (r, wi) in rates.iter().zip(w) {
            dtheta += wi * r.0;
            dz += wi * r.1;
        }
        self.theta += st.dt / 6.0 * dtheta;
        self.z += st.dt / 6.0 * dz;
    }
}

/// Evolves `profile` and returns the track of `s0`, starting at `z0`.
pub fn track_point(
    profile: &AngleProfile,
    config: &EvolutionConfig,
    s0: f64,
    z0: Complex64,
) -> Result<Vec<TrackedPoint>> {
    let mut tracker = PointTracker::new(profile, s0, z0)?;
    evolve(profile, config, &mut [&mut tracker])?;
    Ok(tracker.history)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_match_curve_identity() {
        // z_t = -z_sss + 3/2 conj(z_s) z_ss^2 with z_s = exp(i theta)
        let d = [0.4, 1.3, -0.7, 2.1];
        let (_, zt) = point_rates(d);
        let e = Complex64::from_polar(1.0, d[0]);
        let i = Complex64::i();
        let z_ss = i * d[1] * e;
        let z_sss = (i * d[2] - d[1] * d[1]) * e;
        let expect = -z_sss + 1.5 * e.conj() * z_ss * z_ss;
        assert!((zt - expect).norm() < 1e-14);
    }

    #[test]
    fn constant_state_stays_put() {
        let n = 32;
        let profile = AngleProfile {
            s_a: -1.0,
            s_b: 1.0,
            n,
            theta: vec![0.5; n + 1],
            theta_minus: 0.5,
            theta_plus: 0.5,
            delta_s: 2.0 / n as f64,
            t: 1.0,
        };
        let cfg = EvolutionConfig {
            dt: -1e-3,
            t_end: 0.9,
            cadence: 10,
            ..Default::default()
        };
        let z0 = Complex64::new(0.3, -0.2);
        let track = track_point(&profile, &cfg, 0.0, z0).unwrap();
        for p in track {
            assert!((p.theta - 0.5).abs() < 1e-15);
            assert!((p.z - z0).norm() < 1e-15);
        }
    }
}
