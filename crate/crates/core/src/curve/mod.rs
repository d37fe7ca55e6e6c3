//! Plane curves `z(s)` with `z_s = exp(i theta)`.

mod closure;
mod quadrature;
mod track;

pub use closure::{
    bump, bump_primitive, bump_primitive_nodes, close_curve, closure_gap, extend_theta_with_loop, loop_amplitude,
    solve_beta, ClosureLogRow, ClosureOptions, ClosureParams, ClosureResult, LoopBase,
};
pub use quadrature::{gauss_kronrod, integrate_adaptive};
pub use track::{point_rates, track_point, PointTracker, TrackedPoint};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fourier::{angular_wavenumber, Fourier};
use crate::profile::AngleProfile;
use crate::shooting::InitialPair;

/// Arc-length sampled curve with tangents, on the grid of its angle profile.
#[derive(Debug, Clone, PartialEq)]
pub struct CurveSamples {
    pub s_a: f64,
    pub delta_s: f64,
    pub z: Vec<Complex64>,
    pub z_s: Vec<Complex64>,
    pub t: f64,
}

impl CurveSamples {
    pub fn len(&self) -> usize {
        self.z.len()
    }

    pub fn is_empty(&self) -> bool {
        self.z.is_empty()
    }

    pub fn s(&self, j: usize) -> f64 {
        self.s_a + j as f64 * self.delta_s
    }

    pub fn length(&self) -> f64 {
        (self.len() - 1) as f64 * self.delta_s
    }

    /// `z(s_b) - z(s_a)`.
    pub fn gap(&self) -> Complex64 {
        self.z[self.len() - 1] - self.z[0]
    }

    /// Builds a curve from positions only; tangents come from the spectral
    /// derivative of `z` minus its linear end-to-end ramp.
    pub fn from_points(s_a: f64, delta_s: f64, z: Vec<Complex64>, t: f64) -> Self {
        let n = z.len() - 1;
        let length = n as f64 * delta_s;
        let gap = z[n] - z[0];
        let mut buf: Vec<Complex64> = (0..n).map(|j| z[j] - gap * (j as f64 / n as f64)).collect();
        let mut fourier = Fourier::new(n);
        fourier.forward(&mut buf);
        for (j, c) in buf.iter_mut().enumerate() {
            if 2 * j == n {
                *c = Complex64::default();
            } else {
                *c *= Complex64::new(0.0, angular_wavenumber(j, n, length));
            }
        }
        fourier.inverse(&mut buf);
        let slope = gap / length;
        let mut z_s: Vec<Complex64> = buf.into_iter().map(|c| c + slope).collect();
        z_s.push(z_s[0]);
        CurveSamples {
            s_a,
            delta_s,
            z,
            z_s,
            t,
        }
    }

    /// `max_j | |z_{j+1} - z_j| / ds - 1 |`.
    pub fn max_chord_deviation(&self) -> f64 {
        self.z
            .windows(2)
            .map(|w| ((w[1] - w[0]).norm() / self.delta_s - 1.0).abs())
            .fold(0.0, f64::max)
    }

    pub fn rotated(&self, rotation: Complex64, center: Complex64) -> CurveSamples {
        let mut out = self.clone();
        for z in out.z.iter_mut() {
            *z = center + rotation * (*z - center);
        }
        for v in out.z_s.iter_mut() {
            *v *= rotation;
        }
        out
    }
}

/// Point `s` that the reconstructed curve is pinned to.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub s: f64,
    pub z: Complex64,
}

impl Anchor {
    pub fn origin_at(s: f64) -> Self {
        Anchor {
            s,
            z: Complex64::default(),
        }
    }

    /// `z(s_b, t) = s_b exp(i theta^+)`, the position of the limiting corner
    /// with vertex at the origin.
    pub fn corner_right(profile: &AngleProfile) -> Self {
        Anchor {
            s: profile.s_b,
            z: Complex64::from_polar(profile.s_b, profile.theta_plus),
        }
    }
}

/// Spectral antiderivative of `exp(i theta)`.
///
/// With `sigma = s - s_a`, `c = (theta^+ - theta^-)/L`, `m = round(cL / 2 pi)`
/// and `c' = c - 2 pi m / L`:
/// `exp(i theta) = exp(i theta^-) exp(i c' sigma) P(sigma)` where
/// `P = exp(i 2 pi m sigma / L) exp(i theta~)` is periodic. `P` is expanded
/// in Fourier modes and each term is integrated exactly.
struct Antiderivative {
    rotation: Complex64,
    shift: f64,
    length: f64,
    n: usize,
    /// `p_xi / (i (c' + kappa))` for `xi != 0`, zero at `xi = 0`.
    q: Vec<Complex64>,
    p0: Complex64,
    q_sum: Complex64,
}

impl Antiderivative {
    fn new(profile: &AngleProfile) -> Self {
        let n = profile.n;
        let length = profile.length();
        let c = profile.ramp_slope();
        let m = (c * length / (2.0 * std::f64::consts::PI)).round();
        let shift = c - 2.0 * std::f64::consts::PI * m / length;
        let periodic = profile.periodized();
        let mut p: Vec<Complex64> = periodic
            .iter()
            .enumerate()
            .map(|(j, th)| {
                let wind = 2.0 * std::f64::consts::PI * ((m as i64 * j as i64).rem_euclid(n as i64)) as f64 / n as f64;
                Complex64::from_polar(1.0, wind + th)
            })
            .collect();
        let mut fourier = Fourier::new(n);
        fourier.forward(&mut p);
        let p0 = p[0];
        let mut q = p;
        q[0] = Complex64::default();
        let mut q_sum = Complex64::default();
        for (j, v) in q.iter_mut().enumerate().skip(1) {
            *v /= Complex64::new(0.0, shift + angular_wavenumber(j, n, length));
            q_sum += *v;
        }
        Antiderivative {
            rotation: Complex64::from_polar(1.0, profile.theta_minus),
            shift,
            length,
            n,
            q,
            p0,
            q_sum,
        }
    }

    /// `p0 (exp(i c' sigma) - 1) / (i c')` without cancellation.
    fn zero_mode(&self, sigma: f64) -> Complex64 {
        let h = 0.5 * self.shift * sigma;
        let sinc = if h.abs() < 1e-8 { 1.0 - h * h / 6.0 } else { h.sin() / h };
        self.p0 * sigma * sinc * Complex64::from_polar(1.0, h)
    }

    /// `int_0^sigma exp(i theta)` at every node.
    fn at_nodes(&self) -> Vec<Complex64> {
        let mut buf = self.q.clone();
        Fourier::new(self.n).inverse(&mut buf);
        let ds = self.length / self.n as f64;
        let mut out: Vec<Complex64> = (0..self.n)
            .map(|j| {
                let sigma = j as f64 * ds;
                let series = Complex64::from_polar(1.0, self.shift * sigma) * buf[j] - self.q_sum;
                self.rotation * (series + self.zero_mode(sigma))
            })
            .collect();
        // sigma = L: all periodic factors return to their j = 0 values
        let series = Complex64::from_polar(1.0, self.shift * self.length) * buf[0] - self.q_sum;
        out.push(self.rotation * (series + self.zero_mode(self.length)));
        out
    }

    /// `int_0^sigma exp(i theta)` at an arbitrary `sigma`.
    fn at(&self, sigma: f64) -> Complex64 {
        let mut sum = Complex64::default();
        for (j, v) in self.q.iter().enumerate().skip(1) {
            sum += v * Complex64::from_polar(1.0, angular_wavenumber(j, self.n, self.length) * sigma);
        }
        let series = Complex64::from_polar(1.0, self.shift * sigma) * sum - self.q_sum;
        self.rotation * (series + self.zero_mode(sigma))
    }
}

/// Reconstructs `z(s)` from `theta(s)` and translates it so that
/// `z(anchor.s) = anchor.z`. The anchor does not need to be a node.
pub fn reconstruct_curve(profile: &AngleProfile, anchor: Anchor) -> CurveSamples {
    let anti = Antiderivative::new(profile);
    let mut z = anti.at_nodes();
    let sigma = anchor.s - profile.s_a;
    let offset = match profile.node_index(anchor.s) {
        Some(j) => anchor.z - z[j],
        None => anchor.z - anti.at(sigma),
    };
    for v in z.iter_mut() {
        *v += offset;
    }
    let z_s = profile.theta.iter().map(|th| Complex64::from_polar(1.0, *th)).collect();
    CurveSamples {
        s_a: profile.s_a,
        delta_s: profile.delta_s,
        z,
        z_s,
        t: profile.t,
    }
}

/// `z(0, t) = -2 (3t)^(1/3) (i u'(0) + u(0)^2) z_s(0, t)` of the self-similar
/// solution whose corner sits at the origin.
pub fn anchor_z0(t: f64, pair: InitialPair, z_s_at_0: Complex64) -> Complex64 {
    -2.0 * (3.0 * t).cbrt() * Complex64::new(pair.u0 * pair.u0, pair.v0) * z_s_at_0
}

/// `1/2 oint (x dy - y dx)` by the trapezoid rule, using the stored tangents.
pub fn enclosed_area(curve: &CurveSamples) -> f64 {
    let n = curve.len() - 1;
    let term = |j: usize| (curve.z[j].conj() * curve.z_s[j]).im;
    let mut sum = 0.5 * (term(0) + term(n));
    for j in 1..n {
        sum += term(j);
    }
    0.5 * sum * curve.delta_s
}

/// Brute-force check for crossings between non-adjacent segments of the
/// polyline through every `stride`-th node.
pub fn has_self_intersection(curve: &CurveSamples, stride: usize) -> bool {
    let stride = stride.max(1);
    let mut pts: Vec<Complex64> = curve.z.iter().step_by(stride).copied().collect();
    if !(curve.len() - 1).is_multiple_of(stride) {
        pts.push(curve.z[curve.len() - 1]);
    }
    let closed = curve.gap().norm() < 1e-6 * curve.length();
    let m = pts.len() - 1;
    let cross = |a: Complex64, b: Complex64, c: Complex64| (b - a).im * (c - a).re - (b - a).re * (c - a).im;
    for i in 0..m {
        for j in i + 2..m {
            if closed && i == 0 && j == m - 1 {
                continue;
            }
            let (p, q, r, s) = (pts[i], pts[i + 1], pts[j], pts[j + 1]);
            let d1 = cross(p, q, r);
            let d2 = cross(p, q, s);
            let d3 = cross(r, s, p);
            let d4 = cross(r, s, q);
            if d1 * d2 < 0.0 && d3 * d4 < 0.0 {
                return true;
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn uniform(n: usize, s_a: f64, s_b: f64, f: impl Fn(f64) -> f64) -> AngleProfile {
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

    #[test]
    fn straight_segment() {
        let p = uniform(64, -3.0, 5.0, |_| 0.0);
        let c = reconstruct_curve(&p, Anchor::origin_at(0.0));
        for j in 0..=64 {
            assert!((c.z[j] - Complex64::new(p.s(j), 0.0)).norm() < 1e-13);
        }
        let v = uniform(64, -3.0, 5.0, |_| PI / 2.0);
        let c = reconstruct_curve(&v, Anchor::origin_at(-3.0));
        for j in 0..=64 {
            assert!((c.z[j] - Complex64::new(0.0, p.s(j) + 3.0)).norm() < 1e-13);
        }
    }

    #[test]
    fn full_turn_is_a_circle() {
        let (s_a, s_b) = (-2.0, 9.0);
        let l = s_b - s_a;
        let p = uniform(256, s_a, s_b, |s| 2.0 * PI * (s - s_a) / l);
        let c = reconstruct_curve(&p, Anchor::origin_at(s_a));
        assert!(c.gap().norm() < 1e-10 * l);
        let r = l / (2.0 * PI);
        let center = Complex64::new(0.0, r);
        for z in &c.z {
            assert!(((z - center).norm() - r).abs() < 1e-12 * l);
        }
        assert!((enclosed_area(&c) - PI * r * r).abs() < 1e-10 * r * r);
    }

    #[test]
    fn anchor_off_grid() {
        let p = uniform(128, -4.0, 4.0, |s| 0.3 * (-s * s).exp());
        let on = reconstruct_curve(&p, Anchor::origin_at(0.0));
        let off = reconstruct_curve(&p, Anchor::origin_at(0.01));
        // z(0) relative to z(0.01) is approximately -0.01 exp(i theta(0))
        let d = on.z[64] - off.z[64];
        let expect = Complex64::from_polar(0.01, 0.3);
        assert!((d - expect).norm() < 1e-6);
    }

    #[test]
    fn anchor_formula() {
        assert_eq!(
            anchor_z0(0.3, InitialPair { u0: 0.0, v0: 0.0 }, Complex64::new(1.0, 0.0)),
            Complex64::default()
        );
        let pair = InitialPair { u0: 0.72, v0: 1.2 };
        let zs = Complex64::from_polar(1.0, 0.7);
        let z = anchor_z0(0.4, pair, zs);
        let expect = 2.0 * (1.2f64).cbrt() * (1.2f64 * 1.2 + 0.72f64.powi(4)).sqrt();
        assert!((z.norm() - expect).abs() < 1e-14);
    }

    #[test]
    fn circle_area_from_points() {
        let n = 4096;
        let ds = 2.0 * PI / n as f64;
        let z: Vec<Complex64> = (0..=n).map(|j| Complex64::from_polar(1.0, j as f64 * ds)).collect();
        let c = CurveSamples::from_points(0.0, ds, z.clone(), 1.0);
        assert!((enclosed_area(&c) - PI).abs() < 1e-12);
        let zr: Vec<Complex64> = z.iter().map(|v| v.conj()).collect();
        let cr = CurveSamples::from_points(0.0, ds, zr, 1.0);
        assert!((enclosed_area(&cr) + PI).abs() < 1e-12);
    }

    #[test]
    fn intersections() {
        let n = 512;
        let ds = 2.0 * PI / n as f64;
        let circle: Vec<Complex64> = (0..=n).map(|j| Complex64::from_polar(1.0, j as f64 * ds)).collect();
        assert!(!has_self_intersection(
            &CurveSamples::from_points(0.0, ds, circle, 1.0),
            4
        ));
        let eight: Vec<Complex64> = (0..=n)
            .map(|j| {
                // phase offset keeps the crossings off the polyline nodes
                let a = j as f64 * ds + 0.1;
                Complex64::new(a.sin(), (2.0 * a).sin() / 2.0)
            })
            .collect();
        assert!(has_self_intersection(
            &CurveSamples::from_points(0.0, ds, eight, 1.0),
            4
        ));
    }
}
