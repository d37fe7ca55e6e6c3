//! Construction of the initial angle `theta(s, 1)` from an admissible profile.
//!
//! The pipeline is: ODE samples -> `theta = 2 gamma(s / 3^(1/3))` on a
//! uniform working grid -> estimate of `theta^-` from the first extrema ->
//! exponential left tail spliced at the joint -> constant padding to `2^n + 1`
//! nodes -> smooth spectral filter of the periodized angle.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{mode_index, Fourier};
use crate::shooting::{integrate_profile_sampled, InitialPair, ProfileSolution, DEFAULT_DX};

/// Largest `|u|` at the decay floor accepted as decayed. Pairs bisected to
/// `f64` resolution bottom out between 1e-10 and 1e-6.
pub const ADMISSIBLE_RESIDUAL: f64 = 1e-6;

pub fn cbrt3() -> f64 {
    3f64.cbrt()
}

/// Angle field on `N + 1` equidistant nodes of `[s_a, s_b]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AngleProfile {
    pub s_a: f64,
    pub s_b: f64,
    /// Number of intervals `N`; `theta` holds `N + 1` values.
    pub n: usize,
    pub theta: Vec<f64>,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub delta_s: f64,
    pub t: f64,
}

impl AngleProfile {
    pub fn length(&self) -> f64 {
        self.s_b - self.s_a
    }

    pub fn s(&self, j: usize) -> f64 {
        self.s_a + j as f64 * self.delta_s
    }

    pub fn s_grid(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.s(j)).collect()
    }

    /// `theta^+ - theta^-`.
    pub fn turning(&self) -> f64 {
        self.theta_plus - self.theta_minus
    }

    pub fn ramp_slope(&self) -> f64 {
        self.turning() / self.length()
    }

    /// Index of the node closest to `s`, if it lies on the grid.
    pub fn node_index(&self, s: f64) -> Option<usize> {
        let r = (s - self.s_a) / self.delta_s;
        let j = r.round();
        if j < 0.0 || j > self.n as f64 || (r - j).abs() > 1e-6 {
            return None;
        }
        Some(j as usize)
    }

    pub fn origin_index(&self) -> Option<usize> {
        self.node_index(0.0)
    }

    /// `theta~ = theta - (s - s_a)/L (theta^+ - theta^-) - theta^-` on the
    /// `N` periodic nodes `j = 0 .. N-1`.
    pub fn periodized(&self) -> Vec<f64> {
        let turn = self.turning();
        let n = self.n as f64;
        self.theta[..self.n]
            .iter()
            .enumerate()
            .map(|(j, th)| th - turn * (j as f64 / n) - self.theta_minus)
            .collect()
    }

    /// Inverse of [`AngleProfile::periodized`]; endpoint values are set to
    /// `theta^-` and `theta^+` exactly.
    pub fn set_from_periodized(&mut self, periodic: &[f64]) {
        assert_eq!(periodic.len(), self.n);
        let turn = self.turning();
        let n = self.n as f64;
        for (j, p) in periodic.iter().enumerate() {
            self.theta[j] = p + turn * (j as f64 / n) + self.theta_minus;
        }
        self.theta[0] = self.theta_minus;
        self.theta[self.n] = self.theta_plus;
    }

    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::BadCount(self.n));
        }
        if self.theta.len() != self.n + 1 {
            return Err(Error::BadProfile(format!(
                "expected {} samples, found {}",
                self.n + 1,
                self.theta.len()
            )));
        }
        if self.theta[0] != self.theta_minus || self.theta[self.n] != self.theta_plus {
            return Err(Error::BadProfile("endpoint values differ from theta^-/theta^+".into()));
        }
        Ok(())
    }
}

/// Angle and curvature samples on a uniform grid whose node `origin` is `s = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct AngleSamples {
    pub ds: f64,
    pub origin: usize,
    pub theta: Vec<f64>,
    /// `k = theta_s`.
    pub k: Vec<f64>,
    /// `k_s`, kept for Hermite resampling.
    pub dk: Vec<f64>,
}

impl AngleSamples {
    pub fn len(&self) -> usize {
        self.theta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.theta.is_empty()
    }

    pub fn s(&self, j: usize) -> f64 {
        (j as f64 - self.origin as f64) * self.ds
    }

    pub fn s_first(&self) -> f64 {
        self.s(0)
    }

    pub fn s_last(&self) -> f64 {
        self.s(self.len() - 1)
    }

    /// Cubic Hermite resampling onto `intervals` equal intervals of the same
    /// span. Zero has to land on a node of the new grid.
    pub fn resample(&self, intervals: usize) -> Result<AngleSamples> {
        let span = self.s_last() - self.s_first();
        let ds = span / intervals as f64;
        let origin_f = -self.s_first() / ds;
        let origin = origin_f.round();
        if (origin_f - origin).abs() > 1e-6 || origin < 0.0 {
            return Err(Error::InvalidConfig(format!(
                "s = 0 is not a node of the {intervals}-interval working grid"
            )));
        }
        let origin = origin as usize;
        let mut out = AngleSamples {
            ds,
            origin,
            theta: Vec::with_capacity(intervals + 1),
            k: Vec::with_capacity(intervals + 1),
            dk: Vec::with_capacity(intervals + 1),
        };
        let last = self.len() - 1;
        for j in 0..=intervals {
            let s = (j as f64 - origin as f64) * ds;
            let r = (s - self.s_first()) / self.ds;
            let mut i = r.floor().max(0.0) as usize;
            if i >= last {
                i = last - 1;
            }
            let t = (r - i as f64).clamp(0.0, 1.0);
            out.theta.push(hermite(
                self.theta[i],
                self.k[i],
                self.theta[i + 1],
                self.k[i + 1],
                self.ds,
                t,
            ));
            out.k.push(hermite(
                self.k[i],
                self.dk[i],
                self.k[i + 1],
                self.dk[i + 1],
                self.ds,
                t,
            ));
            out.dk.push(hermite_slope(
                self.k[i],
                self.dk[i],
                self.k[i + 1],
                self.dk[i + 1],
                self.ds,
                t,
            ));
        }
        Ok(out)
    }
}

fn hermite(p0: f64, m0: f64, p1: f64, m1: f64, h: f64, t: f64) -> f64 {
    if t == 0.0 {
        return p0;
    }
    if t == 1.0 {
        return p1;
    }
    let t2 = t * t;
    let t3 = t2 * t;
    (2.0 * t3 - 3.0 * t2 + 1.0) * p0 + (t3 - 2.0 * t2 + t) * h * m0 + (-2.0 * t3 + 3.0 * t2) * p1 + (t3 - t2) * h * m1
}

fn hermite_slope(p0: f64, m0: f64, p1: f64, m1: f64, h: f64, t: f64) -> f64 {
    let t2 = t * t;
    ((6.0 * t2 - 6.0 * t) * p0 + (-6.0 * t2 + 6.0 * t) * p1) / h
        + (3.0 * t2 - 4.0 * t + 1.0) * m0
        + (3.0 * t2 - 2.0 * t) * m1
}

/// `theta(s, 1)` on the profile's own sample grid, `s = 3^(1/3) x`.
///
/// Beyond the decay floor the profile is taken as identically zero and the
/// free constant is fixed by `theta(s_b, 1) = 0`. The grid extends to the
/// requested `x_max` even when the forward sweep stopped earlier.
pub fn theta_from_profile(prof: &ProfileSolution) -> Result<AngleSamples> {
    let floor = prof.floor;
    if floor.u.abs() > ADMISSIBLE_RESIDUAL {
        return Err(Error::NotAdmissible {
            residual: floor.u.abs(),
        });
    }
    let c = cbrt3();
    let h = prof.step;
    let n_right = (prof.x_max / h).round() as usize;
    let total = prof.origin_index + n_right + 1;
    let mut out = AngleSamples {
        ds: c * h,
        origin: prof.origin_index,
        theta: Vec::with_capacity(total),
        k: Vec::with_capacity(total),
        dk: Vec::with_capacity(total),
    };
    let gamma_end = floor.gamma;
    for i in 0..total {
        let x = (i as f64 - prof.origin_index as f64) * h;
        let (g, u, v) = if i < prof.len() && x < floor.x {
            (prof.gamma[i], prof.u[i], prof.v[i])
        } else {
            (gamma_end, 0.0, 0.0)
        };
        out.theta.push(2.0 * (g - gamma_end));
        out.k.push(2.0 / c * u);
        out.dk.push(2.0 / (c * c) * v);
    }
    Ok(out)
}

/// Location and value of one extremum of `theta`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Extremum {
    pub index: usize,
    pub s: f64,
    pub theta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThetaMinusEstimate {
    pub theta_minus: f64,
    pub first_max: Extremum,
    pub first_min: Extremum,
}

/// Mean of the first local maximum and the first local minimum of `theta`
/// past the left end, detected by a sign change of the discrete slope.
pub fn estimate_theta_minus(samples: &AngleSamples) -> Result<ThetaMinusEstimate> {
    let th = &samples.theta;
    let mut first_max = None;
    let mut first_min = None;
    for j in 1..th.len().saturating_sub(1) {
        if first_max.is_none() && th[j] > th[j - 1] && th[j] >= th[j + 1] {
            first_max = Some(j);
        }
        if first_min.is_none() && th[j] < th[j - 1] && th[j] <= th[j + 1] {
            first_min = Some(j);
        }
        if first_max.is_some() && first_min.is_some() {
            break;
        }
    }
    let (Some(imax), Some(imin)) = (first_max, first_min) else {
        return Err(Error::NoExtrema);
    };
    let ext = |j: usize| Extremum {
        index: j,
        s: samples.s(j),
        theta: th[j],
    };
    Ok(ThetaMinusEstimate {
        theta_minus: 0.5 * (th[imax] + th[imin]),
        first_max: ext(imax),
        first_min: ext(imin),
    })
}

/// Splice point of the exponential tail. `index` is zero-based.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JointInfo {
    pub s_joint: f64,
    pub theta_at_joint: f64,
    pub k_at_joint: f64,
    pub index: usize,
}

/// First node after the first minimum with `theta > theta^-` and `k > 0`.
pub fn find_joint(samples: &AngleSamples, estimate: &ThetaMinusEstimate) -> Result<JointInfo> {
    let tm = estimate.theta_minus;
    (estimate.first_min.index + 1..samples.len())
        .find(|&j| samples.theta[j] > tm && samples.k[j] > 0.0)
        .map(|j| JointInfo {
            s_joint: samples.s(j),
            theta_at_joint: samples.theta[j],
            k_at_joint: samples.k[j],
            index: j,
        })
        .ok_or(Error::NoJoint)
}

/// `theta^- + d exp(k_J (s - s_J) / d)` with `d = theta_J - theta^-`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialTail {
    pub theta_minus: f64,
    pub joint: JointInfo,
}

impl ExponentialTail {
    fn gap(&self) -> f64 {
        self.joint.theta_at_joint - self.theta_minus
    }

    pub fn rate(&self) -> f64 {
        self.joint.k_at_joint / self.gap()
    }

    pub fn value(&self, s: f64) -> f64 {
        self.theta_minus + self.gap() * (self.rate() * (s - self.joint.s_joint)).exp()
    }

    pub fn slope(&self, s: f64) -> f64 {
        self.joint.k_at_joint * (self.rate() * (s - self.joint.s_joint)).exp()
    }
}

/// Replaces `theta` (and `k`) at and left of the joint by the exponential tail.
pub fn append_exponential_tail(samples: &AngleSamples, joint: &JointInfo, theta_minus: f64) -> AngleSamples {
    let tail = ExponentialTail {
        theta_minus,
        joint: *joint,
    };
    let mut out = samples.clone();
    for j in 0..=joint.index {
        let s = samples.s(j);
        out.theta[j] = tail.value(s);
        out.k[j] = tail.slope(s);
        out.dk[j] = tail.rate() * tail.slope(s);
    }
    out
}

/// Pads the working grid with constant `theta^-` on the left and its right
/// end value `theta^+` on the right, keeping the node spacing.
pub fn assemble_grid(
    working: &AngleSamples,
    target_n: usize,
    pad_left: usize,
    pad_right: usize,
    theta_minus: f64,
) -> Result<AngleProfile> {
    let m = working.len() - 1;
    if !target_n.is_power_of_two() || m + pad_left + pad_right != target_n {
        return Err(Error::BadCount(target_n));
    }
    let theta_plus = working.theta[m];
    let origin = working.origin + pad_left;
    let ds = working.ds;
    let mut theta = Vec::with_capacity(target_n + 1);
    theta.extend(std::iter::repeat_n(theta_minus, pad_left));
    theta.extend_from_slice(&working.theta);
    theta.extend(std::iter::repeat_n(theta_plus, pad_right));
    theta[0] = theta_minus;
    Ok(AngleProfile {
        s_a: -(origin as f64) * ds,
        s_b: (target_n - origin) as f64 * ds,
        n: target_n,
        theta,
        theta_minus,
        theta_plus,
        delta_s: ds,
        t: 1.0,
    })
}

/// Multiplier `exp(-10 (2.5 |xi| / N)^25)` of the smoothing filter.
pub fn filter_multiplier(xi: i64, n: usize) -> f64 {
    let r = 2.5 * xi.unsigned_abs() as f64 / n as f64;
    (-10.0 * r.powi(25)).exp()
}

/// Applies the smoothing filter to the periodized angle and re-pins the ends.
pub fn spectral_filter(profile: &AngleProfile) -> AngleProfile {
    let n = profile.n;
    let mut fourier = Fourier::new(n);
    let mut modes = fourier.forward_real(&profile.periodized());
    for (j, c) in modes.iter_mut().enumerate() {
        *c *= filter_multiplier(mode_index(j, n), n);
    }
    fourier.inverse(&mut modes);
    let mut periodic: Vec<f64> = modes.iter().map(|c| c.re).collect();
    periodic[0] = 0.0;
    let mut out = profile.clone();
    out.set_from_periodized(&periodic);
    out
}

/// `theta_s` at all `N + 1` nodes: spectral derivative of the periodized
/// angle plus the ramp slope.
pub fn theta_s_from_theta(profile: &AngleProfile) -> Vec<f64> {
    let mut fourier = Fourier::new(profile.n);
    theta_s_with(profile, &mut fourier)
}

pub(crate) fn theta_s_with(profile: &AngleProfile, fourier: &mut Fourier) -> Vec<f64> {
    let mut k = fourier.derivative(&profile.periodized(), profile.length());
    let slope = profile.ramp_slope();
    for v in k.iter_mut() {
        *v += slope;
    }
    k.push(k[0]);
    k
}

/// Parameters of the initial-datum construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BuildConfig {
    pub pair: InitialPair,
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    /// Intervals of the working grid over `[3^(1/3) x_min, 3^(1/3) x_max]`.
    pub working_intervals: usize,
    pub n: usize,
    pub pad_left: usize,
    pub pad_right: usize,
    pub filter: bool,
}

/// The three open-curve reference experiments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Experiment {
    /// `x in [-80, 20]`, `N = 4096`, `s in [-226.14, 69.23]`.
    Short,
    /// `x in [-400, 20]`, `N = 16384`, `s in [-872.27, 309.22]`.
    Medium,
    /// `x in [-800, 20]`, `N = 32768`, `s in [-1744.62, 618.36]`.
    Long,
}

impl Experiment {
    pub fn from_number(k: u32) -> Option<Self> {
        match k {
            1 => Some(Experiment::Short),
            2 => Some(Experiment::Medium),
            3 => Some(Experiment::Long),
            _ => None,
        }
    }

    pub fn number(self) -> u32 {
        match self {
            Experiment::Short => 1,
            Experiment::Medium => 2,
            Experiment::Long => 3,
        }
    }

    pub fn config(self) -> BuildConfig {
        // working grids keep dx_node = 0.05, i.e. delta_s = 3^(1/3) / 20
        let (x_min, working_intervals, n, pad_left, pad_right) = match self {
            Experiment::Short => (-80.0, 2000, 4096, 1536, 560),
            Experiment::Medium => (-400.0, 8400, 16384, 4096, 3888),
            Experiment::Long => (-800.0, 16400, 32768, 8193, 8175),
        };
        BuildConfig {
            pair: InitialPair::reference(),
            x_min,
            x_max: 20.0,
            dx: DEFAULT_DX,
            working_intervals,
            n,
            pad_left,
            pad_right,
            filter: true,
        }
    }
}

impl Default for BuildConfig {
    fn default() -> Self {
        Experiment::Short.config()
    }
}

impl BuildConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.n.is_power_of_two() {
            return Err(Error::InvalidConfig(format!("N = {} is not a power of two", self.n)));
        }
        if self.working_intervals + self.pad_left + self.pad_right != self.n {
            return Err(Error::InvalidConfig(format!(
                "working intervals {} + pads {} + {} != N = {}",
                self.working_intervals, self.pad_left, self.pad_right, self.n
            )));
        }
        if !(self.x_min < 0.0 && self.x_max > 0.0 && self.dx > 0.0) {
            return Err(Error::InvalidConfig("need x_min < 0 < x_max and dx > 0".into()));
        }
        let node_dx = (self.x_max - self.x_min) / self.working_intervals as f64;
        let origin = -self.x_min / node_dx;
        if (origin - origin.round()).abs() > 1e-6 {
            return Err(Error::InvalidConfig("x = 0 is not a working-grid node".into()));
        }
        Ok(())
    }

    /// Storage stride of the ODE samples: the working-node spacing when it is
    /// a whole number of integration steps.
    fn sample_stride(&self) -> usize {
        let node_dx = (self.x_max - self.x_min) / self.working_intervals as f64;
        let r = node_dx / self.dx;
        if (r - r.round()).abs() < 1e-6 && r.round() >= 1.0 {
            r.round() as usize
        } else {
            ((r / 4.0).floor() as usize).max(1)
        }
    }
}

/// Every intermediate of the construction, kept for diagnostics.
#[derive(Debug, Clone)]
pub struct BuiltProfile {
    pub config: BuildConfig,
    /// Original `theta(s, 1)` and ODE curvature on the working grid.
    pub working: AngleSamples,
    pub estimate: ThetaMinusEstimate,
    pub joint: JointInfo,
    pub corrected: AngleSamples,
    pub unfiltered: AngleProfile,
    /// Final (filtered, if requested) initial datum.
    pub profile: AngleProfile,
}

impl BuiltProfile {
    /// ODE curvature `k(s_j, 1)` at the final nodes; `None` left of the
    /// working grid, zero right of it.
    pub fn ode_curvature_on_grid(&self) -> Vec<Option<f64>> {
        let pad_left = self.config.pad_left;
        let m = self.working.len();
        (0..=self.profile.n)
            .map(|j| {
                if j < pad_left {
                    None
                } else if j - pad_left < m {
                    Some(self.working.k[j - pad_left])
                } else {
                    Some(0.0)
                }
            })
            .collect()
    }
}

pub fn build_profile_from_solution(config: &BuildConfig, sol: &ProfileSolution) -> Result<BuiltProfile> {
    let raw = theta_from_profile(sol)?;
    let working = raw.resample(config.working_intervals)?;
    let estimate = estimate_theta_minus(&working)?;
    let joint = find_joint(&working, &estimate)?;
    let corrected = append_exponential_tail(&working, &joint, estimate.theta_minus);
    let unfiltered = assemble_grid(
        &corrected,
        config.n,
        config.pad_left,
        config.pad_right,
        estimate.theta_minus,
    )?;
    let profile = if config.filter {
        spectral_filter(&unfiltered)
    } else {
        unfiltered.clone()
    };
    Ok(BuiltProfile {
        config: config.clone(),
        working,
        estimate,
        joint,
        corrected,
        unfiltered,
        profile,
    })
}

/// Runs the full construction from the admissible pair.
pub fn build_profile(config: &BuildConfig) -> Result<BuiltProfile> {
    config.validate()?;
    let sol = integrate_profile_sampled(
        config.pair,
        config.x_min,
        config.x_max,
        config.dx,
        config.sample_stride(),
    )?;
    build_profile_from_solution(config, &sol)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn samples_from(theta: Vec<f64>, ds: f64, origin: usize) -> AngleSamples {
        let n = theta.len();
        let mut k = vec![0.0; n];
        for j in 1..n - 1 {
            k[j] = (theta[j + 1] - theta[j - 1]) / (2.0 * ds);
        }
        AngleSamples {
            ds,
            origin,
            theta,
            k,
            dk: vec![0.0; n],
        }
    }

    #[test]
    fn sine_estimate_recovers_offset() {
        let ds = PI / 50.0;
        let c = -1.25;
        let theta: Vec<f64> = (0..2000).map(|j| c + (j as f64 * ds).sin()).collect();
        let est = estimate_theta_minus(&samples_from(theta, ds, 0)).unwrap();
        assert!((est.theta_minus - c).abs() < 1e-12);
        assert_eq!(est.first_max.index, 25);
        assert_eq!(est.first_min.index, 75);
    }

    #[test]
    fn monotone_theta_has_no_extrema() {
        let theta: Vec<f64> = (0..100).map(|j| j as f64).collect();
        assert!(matches!(
            estimate_theta_minus(&samples_from(theta, 1.0, 0)),
            Err(Error::NoExtrema)
        ));
    }

    #[test]
    fn joint_is_first_node_after_minimum_when_already_above() {
        let ds = PI / 50.0;
        let theta: Vec<f64> = (0..400).map(|j| (j as f64 * ds).sin() + 0.001 * j as f64).collect();
        let s = samples_from(theta, ds, 0);
        let est = ThetaMinusEstimate {
            theta_minus: -10.0,
            first_max: Extremum {
                index: 0,
                s: 0.0,
                theta: 0.0,
            },
            first_min: Extremum {
                index: 74,
                s: 0.0,
                theta: 0.0,
            },
        };
        // theta > -10 everywhere; the drift makes k > 0 already at node 75
        let joint = find_joint(&s, &est).unwrap();
        assert_eq!(joint.index, 75);
    }

    #[test]
    fn tail_has_first_order_contact() {
        let joint = JointInfo {
            s_joint: -3.0,
            theta_at_joint: 0.4,
            k_at_joint: 0.7,
            index: 0,
        };
        let tail = ExponentialTail {
            theta_minus: 0.1,
            joint,
        };
        assert!((tail.value(-3.0) - 0.4).abs() < 1e-15);
        assert!((tail.slope(-3.0) - 0.7).abs() < 1e-15);
        let h = 1e-5;
        let fd = (tail.value(-3.0) - tail.value(-3.0 - h)) / h;
        assert!((fd - 0.7).abs() < 1e-4);
        let mut prev = tail.value(-3.0);
        for i in 1..100 {
            let v = tail.value(-3.0 - 0.1 * i as f64);
            assert!(v < prev && v > 0.1);
            prev = v;
        }
    }

    #[test]
    fn padding_constant_is_constant() {
        let s = AngleSamples {
            ds: 0.5,
            origin: 3,
            theta: vec![0.0; 9],
            k: vec![0.0; 9],
            dk: vec![0.0; 9],
        };
        let p = assemble_grid(&s, 16, 4, 4, 0.0).unwrap();
        assert!(p.theta.iter().all(|&v| v == 0.0));
        assert_eq!(p.origin_index(), Some(7));
        assert!(matches!(assemble_grid(&s, 16, 4, 3, 0.0), Err(Error::BadCount(16))));
        assert!(matches!(assemble_grid(&s, 12, 2, 2, 0.0), Err(Error::BadCount(12))));
    }

    #[test]
    fn filter_multiplier_limits() {
        assert_eq!(filter_multiplier(0, 4096), 1.0);
        // 10 * 1.25^25 evaluated independently by repeated multiplication
        let mut p = 1.0f64;
        for _ in 0..25 {
            p *= 1.25;
        }
        let expo = 10.0 * p;
        assert!((expo - 2646.977960169689).abs() < 1e-9);
        assert_eq!(filter_multiplier(-2048, 4096), (-expo).exp());
        assert!(filter_multiplier(2048, 4096) < 1e-300);
    }

    #[test]
    fn ramp_derivative_is_slope() {
        let n = 64;
        let profile = AngleProfile {
            s_a: -3.0,
            s_b: 5.0,
            n,
            theta: (0..=n).map(|j| 0.2 + 1.1 * j as f64 / n as f64).collect(),
            theta_minus: 0.2,
            theta_plus: 1.3,
            delta_s: 8.0 / n as f64,
            t: 1.0,
        };
        let k = theta_s_from_theta(&profile);
        assert_eq!(k.len(), n + 1);
        for v in k {
            assert!((v - 1.1 / 8.0).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_profile_gives_zero_theta() {
        let sol = integrate_profile_sampled(InitialPair { u0: 0.0, v0: 0.0 }, -10.0, 5.0, 1e-3, 50).unwrap();
        let th = theta_from_profile(&sol).unwrap();
        assert!(th.theta.iter().all(|&v| v == 0.0));
        assert!(th.k.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn undecayed_profile_is_rejected() {
        let sol = integrate_profile_sampled(InitialPair { u0: 0.5, v0: 0.0 }, -10.0, 20.0, 1e-3, 100).unwrap();
        assert!(matches!(theta_from_profile(&sol), Err(Error::NotAdmissible { .. })));
    }
}
