//! Integrating-factor RK4 for the periodized angle
//! `theta~_t = -theta~_sss - 1/2 (theta~_s + c)^3`, `c = (theta^+ - theta^-) / L`.
//!
//! The dispersive term is absorbed exactly through `exp(-dt (i kappa)^3)`;
//! after each step the state is projected onto real fields and the periodic
//! node `s_a ~ s_b` is pinned to zero.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fourier::{angular_wavenumber, mode_index, Fourier};
use crate::profile::AngleProfile;

/// Default growth factor of the largest mode that triggers `Instability`.
pub const DEFAULT_OVERFLOW_FACTOR: f64 = 1e6;

/// Fourier coefficients of `theta~` in FFT buffer order plus domain metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState {
    pub modes: Vec<Complex64>,
    pub t: f64,
    pub s_a: f64,
    pub length: f64,
    pub theta_minus: f64,
    pub theta_plus: f64,
}

impl SpectralState {
    pub fn n(&self) -> usize {
        self.modes.len()
    }

    pub fn ramp_slope(&self) -> f64 {
        (self.theta_plus - self.theta_minus) / self.length
    }

    pub fn from_profile(profile: &AngleProfile, fourier: &mut Fourier) -> Self {
        SpectralState {
            modes: fourier.forward_real(&profile.periodized()),
            t: profile.t,
            s_a: profile.s_a,
            length: profile.length(),
            theta_minus: profile.theta_minus,
            theta_plus: profile.theta_plus,
        }
    }

    /// Periodic samples `theta~(s_j)`, `j = 0 .. N-1` (real part).
    pub fn periodic_values(&self, fourier: &mut Fourier) -> Vec<f64> {
        let mut buf = self.modes.clone();
        fourier.inverse(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn to_profile(&self, fourier: &mut Fourier) -> AngleProfile {
        let n = self.n();
        let mut profile = AngleProfile {
            s_a: self.s_a,
            s_b: self.s_a + self.length,
            n,
            theta: vec![0.0; n + 1],
            theta_minus: self.theta_minus,
            theta_plus: self.theta_plus,
            delta_s: self.length / n as f64,
            t: self.t,
        };
        profile.set_from_periodized(&self.periodic_values(fourier));
        profile
    }

    pub fn max_mode(&self) -> f64 {
        self.modes.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// `theta` and its first three `s`-derivatives at node `j` by direct
    /// summation of the series.
    pub fn node_derivatives(&self, j: usize) -> [f64; 4] {
        evaluate_node(&self.modes, j, self.length, self.ramp_slope(), self.theta_minus)
    }
}

pub(crate) fn evaluate_node(modes: &[Complex64], j: usize, length: f64, slope: f64, theta_minus: f64) -> [f64; 4] {
    let n = modes.len();
    let mut out = [0.0; 4];
    for (m, c) in modes.iter().enumerate() {
        let xi = mode_index(m, n);
        let kappa = angular_wavenumber(m, n, length);
        // exp(2 pi i xi j / N) with the product reduced mod N for accuracy
        let phase = 2.0 * std::f64::consts::PI * ((xi * j as i64).rem_euclid(n as i64)) as f64 / n as f64;
        let w = c * Complex64::from_polar(1.0, phase);
        let ik = Complex64::new(0.0, kappa);
        let mut term = w;
        out[0] += term.re;
        for slot in out.iter_mut().skip(1) {
            term *= ik;
            *slot += term.re;
        }
    }
    let s_rel = j as f64 * length / n as f64;
    out[0] += theta_minus + slope * s_rel;
    out[1] += slope;
    out
}

/// `-1/2 [(theta~_s + c)^3]^` for coefficients `modes` (FFT order).
pub fn nonlinear_rhs(modes: &[Complex64], length: f64, theta_plus: f64, theta_minus: f64) -> Vec<Complex64> {
    let n = modes.len();
    let mut fourier = Fourier::new(n);
    let ik: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(0.0, angular_wavenumber(j, n, length)))
        .collect();
    let mut out = vec![Complex64::default(); n];
    cubic_term(modes, &ik, (theta_plus - theta_minus) / length, &mut fourier, &mut out);
    out
}

fn cubic_term(modes: &[Complex64], ik: &[Complex64], slope: f64, fourier: &mut Fourier, out: &mut [Complex64]) {
    for ((o, m), k) in out.iter_mut().zip(modes).zip(ik) {
        *o = m * k;
    }
    fourier.inverse(out);
    for o in out.iter_mut() {
        let v = o.re + slope;
        *o = Complex64::new(v * v * v, 0.0);
    }
    fourier.forward(out);
    for o in out.iter_mut() {
        *o *= -0.5;
    }
}

/// The four stage states `Theta^n, Theta^A, Theta^B, Theta^C` of one step, at
/// times `t, t + dt/2, t + dt/2, t + dt`.
pub struct StageStates<'a> {
    pub t: f64,
    pub dt: f64,
    pub states: [&'a [Complex64]; 4],
    pub length: f64,
    pub slope: f64,
    pub theta_minus: f64,
}

/// Reusable IF-RK4 stepper for one grid and one `dt`.
pub struct Stepper {
    n: usize,
    length: f64,
    slope: f64,
    dt: f64,
    fourier: Fourier,
    ik: Vec<Complex64>,
    e_full: Vec<Complex64>,
    e_half: Vec<Complex64>,
    dealias: Option<(Fourier, usize)>,
    nonlinear: bool,
    pin: bool,
    work: [Vec<Complex64>; 8],
    /// Largest `|theta~(s_a)|` removed by pinning so far.
    pub max_pin_residual: f64,
    /// Largest imaginary part discarded by the real projection so far.
    pub max_imag_residual: f64,
}

impl std::fmt::Debug for Stepper {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Stepper")
            .field("n", &self.n)
            .field("dt", &self.dt)
            .field("dealias", &self.dealias.is_some())
            .finish()
    }
}

impl Stepper {
    pub fn new(state: &SpectralState, dt: f64) -> Self {
        let n = state.n();
        let length = state.length;
        let ik: Vec<Complex64> = (0..n)
            .map(|j| Complex64::new(0.0, angular_wavenumber(j, n, length)))
            .collect();
        let factor = |h: f64| -> Vec<Complex64> { ik.iter().map(|k| (-h * k * k * k).exp()).collect() };
        let e_full = factor(dt);
        let e_half = factor(0.5 * dt);
        Stepper {
            n,
            length,
            slope: state.ramp_slope(),
            dt,
            fourier: Fourier::new(n),
            ik,
            e_full,
            e_half,
            dealias: None,
            nonlinear: true,
            pin: true,
            work: Default::default(),
            max_pin_residual: 0.0,
            max_imag_residual: 0.0,
        }
        .with_buffers()
    }

    fn with_buffers(mut self) -> Self {
        for w in self.work.iter_mut() {
            *w = vec![Complex64::default(); self.n];
        }
        self
    }

    /// Evaluates the cubic term on a `3N/2` grid (zero padding).
    pub fn with_dealiasing(mut self, on: bool) -> Self {
        self.dealias = if on {
            let m = 3 * self.n / 2;
            Some((Fourier::new(m), m))
        } else {
            None
        };
        self
    }

    /// Test hook: drop the nonlinear term, leaving the exact linear flow.
    pub fn linear_only(mut self) -> Self {
        self.nonlinear = false;
        self
    }

    /// Keeps the real projection but skips zeroing the node at `s_a`.
    pub fn with_pinning(mut self, on: bool) -> Self {
        self.pin = on;
        self
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn rhs(&mut self, src: usize, dst: usize) {
        let (a, b) = borrow_two(&mut self.work, src, dst);
        if !self.nonlinear {
            b.iter_mut().for_each(|v| *v = Complex64::default());
            return;
        }
        match &mut self.dealias {
            None => cubic_term(a, &self.ik, self.slope, &mut self.fourier, b),
            Some((fine, m)) => {
                let n = self.n;
                let m = *m;
                let mut pad = vec![Complex64::default(); m];
                for j in 0..n {
                    let xi = mode_index(j, n);
                    if xi == -(n as i64) / 2 {
                        continue;
                    }
                    let pos = if xi >= 0 { xi as usize } else { (m as i64 + xi) as usize };
                    pad[pos] = a[j] * self.ik[j];
                }
                fine.inverse(&mut pad);
                for p in pad.iter_mut() {
                    let v = p.re + self.slope;
                    *p = Complex64::new(v * v * v, 0.0);
                }
                fine.forward(&mut pad);
                for j in 0..n {
                    let xi = mode_index(j, n);
                    let pos = if xi >= 0 { xi as usize } else { (m as i64 + xi) as usize };
                    b[j] = if xi == -(n as i64) / 2 {
                        Complex64::default()
                    } else {
                        -0.5 * pad[pos]
                    };
                }
            }
        }
    }

    /// One step of the integrating-factor RK4 scheme followed by
    /// [`enforce_real_and_pin`]. `stages`, when given, receives the four
    /// stage states before the update.
    pub fn step(&mut self, state: &mut SpectralState, mut stages: Option<&mut dyn FnMut(&StageStates)>) -> Result<()> {
        const THETA: usize = 0;
        const A: usize = 1;
        const B: usize = 2;
        const C: usize = 3;
        const D: usize = 4;
        const SA: usize = 5;
        const SB: usize = 6;
        const SC: usize = 7;
        let dt = self.dt;
        let h = 0.5 * dt;
        self.work[THETA].copy_from_slice(&state.modes);
        self.rhs(THETA, A);
        for j in 0..self.n {
            self.work[SA][j] = self.e_half[j] * (self.work[THETA][j] + h * self.work[A][j]);
        }
        self.rhs(SA, B);
        for j in 0..self.n {
            self.work[SB][j] = self.e_half[j] * self.work[THETA][j] + h * self.work[B][j];
        }
        self.rhs(SB, C);
        for j in 0..self.n {
            self.work[SC][j] = self.e_full[j] * self.work[THETA][j] + dt * self.e_half[j] * self.work[C][j];
        }
        self.rhs(SC, D);
        if let Some(cb) = stages.as_mut() {
            cb(&StageStates {
                t: state.t,
                dt,
                states: [&self.work[THETA], &self.work[SA], &self.work[SB], &self.work[SC]],
                length: self.length,
                slope: self.slope,
                theta_minus: state.theta_minus,
            });
        }
        let w = &self.work;
        for j in 0..self.n {
            let e = self.e_full[j];
            state.modes[j] =
                e * w[THETA][j] + dt / 6.0 * (e * w[A][j] + 2.0 * self.e_half[j] * (w[B][j] + w[C][j]) + w[D][j]);
        }
        state.t += dt;
        let (pin, imag) = project(&mut state.modes, &mut self.fourier, self.pin);
        self.max_pin_residual = self.max_pin_residual.max(pin);
        self.max_imag_residual = self.max_imag_residual.max(imag);
        Ok(())
    }
}

fn borrow_two<T>(v: &mut [T], a: usize, b: usize) -> (&T, &mut T) {
    assert_ne!(a, b);
    if a < b {
        let (lo, hi) = v.split_at_mut(b);
        (&lo[a], &mut hi[0])
    } else {
        let (lo, hi) = v.split_at_mut(a);
        (&hi[0], &mut lo[b])
    }
}

/// Returns (|theta~(s_a)| before pinning, max discarded imaginary part).
fn project(modes: &mut [Complex64], fourier: &mut Fourier, pin_node: bool) -> (f64, f64) {
    fourier.inverse(modes);
    let mut imag: f64 = 0.0;
    for m in modes.iter_mut() {
        imag = imag.max(m.im.abs());
        m.im = 0.0;
    }
    let pin = modes[0].re.abs();
    if pin_node {
        modes[0] = Complex64::default();
    }
    fourier.forward(modes);
    (pin, imag)
}

/// Real projection plus zero pinning at `s_a` (equivalently `s_b`).
pub fn enforce_real_and_pin(state: &mut SpectralState) {
    let mut fourier = Fourier::new(state.n());
    project(&mut state.modes, &mut fourier, true);
}

/// One step with a freshly built stepper; see [`Stepper::step`].
pub fn step_rk4_if(state: &SpectralState, dt: f64) -> Result<SpectralState> {
    let mut out = state.clone();
    Stepper::new(state, dt).step(&mut out, None)?;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvolutionConfig {
    /// Negative for evolution towards `t = 0`.
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub snapshot_times: Vec<f64>,
    /// Observers run every `cadence` steps (and at the final step).
    #[serde(default = "default_cadence")]
    pub cadence: usize,
    #[serde(default)]
    pub dealias: bool,
    #[serde(default = "default_overflow")]
    pub overflow_factor: f64,
}

fn default_cadence() -> usize {
    100
}

fn default_overflow() -> f64 {
    DEFAULT_OVERFLOW_FACTOR
}

impl Default for EvolutionConfig {
    fn default() -> Self {
        EvolutionConfig {
            dt: -5e-5,
            t_end: 0.01,
            snapshot_times: Vec::new(),
            cadence: default_cadence(),
            dealias: false,
            overflow_factor: DEFAULT_OVERFLOW_FACTOR,
        }
    }
}

impl EvolutionConfig {
    pub fn validate(&self, t_start: f64) -> Result<()> {
        if !(self.dt.is_finite() && self.dt != 0.0) {
            return Err(Error::InvalidConfig("dt must be finite and nonzero".into()));
        }
        if !(self.t_end > 0.0) {
            return Err(Error::InvalidConfig("t_end must be positive".into()));
        }
        if self.t_end != t_start && self.dt.signum() != (self.t_end - t_start).signum() {
            return Err(Error::InvalidConfig(format!(
                "dt = {} points away from t_end = {}",
                self.dt, self.t_end
            )));
        }
        if self.cadence == 0 {
            return Err(Error::InvalidConfig("cadence must be at least 1".into()));
        }
        if self.snapshot_times.iter().any(|t| !(*t > 0.0)) {
            return Err(Error::InvalidConfig("snapshot times must be positive".into()));
        }
        Ok(())
    }

    /// Number of steps from `t_start`, rounding to the nearest step time.
    pub fn step_count(&self, t_start: f64) -> usize {
        ((self.t_end - t_start) / self.dt).round().max(0.0) as usize
    }
}

/// Receives the de-periodized field at the configured cadence and, if it
/// asks for them, the stage states of every step.
pub trait Observer {
    fn observe(&mut self, profile: &AngleProfile) -> Result<()>;

    fn wants_stages(&self) -> bool {
        false
    }

    fn stages(&mut self, _stages: &StageStates) {}
}

impl<F: FnMut(&AngleProfile) -> Result<()>> Observer for F {
    fn observe(&mut self, profile: &AngleProfile) -> Result<()> {
        self(profile)
    }
}

#[derive(Debug, Clone)]
pub struct EvolutionOutput {
    /// `(requested t, profile at the nearest step time)`.
    pub snapshots: Vec<(f64, AngleProfile)>,
    pub last: AngleProfile,
    pub steps: usize,
    pub max_pin_residual: f64,
    pub max_imag_residual: f64,
}

/// Evolves `profile` from its time to `config.t_end` with fixed `dt`.
pub fn evolve(
    profile: &AngleProfile,
    config: &EvolutionConfig,
    observers: &mut [&mut dyn Observer],
) -> Result<EvolutionOutput> {
    profile.validate()?;
    config.validate(profile.t)?;
    let n = profile.n;
    let mut fourier = Fourier::new(n);
    let mut state = SpectralState::from_profile(profile, &mut fourier);
    let t0 = profile.t;
    let steps = config.step_count(t0);
    let bound = config.overflow_factor * state.max_mode();

    let mut snap_steps: Vec<(usize, f64)> = config
        .snapshot_times
        .iter()
        .map(|&ts| ((((ts - t0) / config.dt).round().max(0.0) as usize).min(steps), ts))
        .collect();
    snap_steps.sort_by_key(|p| p.0);
    let mut snapshots = Vec::with_capacity(snap_steps.len());
    let mut next_snap = 0;

    let mut stepper = Stepper::new(&state, config.dt).with_dealiasing(config.dealias);
    let want_stages = observers.iter().any(|o| o.wants_stages());

    let mut emit = |i: usize,
                    state: &SpectralState,
                    fourier: &mut Fourier,
                    observers: &mut [&mut dyn Observer]|
     -> Result<Option<AngleProfile>> {
        let observe = i.is_multiple_of(config.cadence) || i == steps;
        let snap = next_snap < snap_steps.len() && snap_steps[next_snap].0 == i;
        if !(observe || snap) {
            return Ok(None);
        }
        let p = state.to_profile(fourier);
        if observe {
            for o in observers.iter_mut() {
                o.observe(&p)?;
            }
        }
        while next_snap < snap_steps.len() && snap_steps[next_snap].0 == i {
            snapshots.push((snap_steps[next_snap].1, p.clone()));
            next_snap += 1;
        }
        Ok(Some(p))
    };

    let mut last = emit(0, &state, &mut fourier, observers)?;
    for i in 1..=steps {
        if want_stages {
            let mut cb = |st: &StageStates| {
                for o in observers.iter_mut() {
                    if o.wants_stages() {
                        o.stages(st);
                    }
                }
            };
            stepper.step(&mut state, Some(&mut cb))?;
        } else {
            stepper.step(&mut state, None)?;
        }
        // exact time labels, free of accumulated rounding
        state.t = t0 + i as f64 * config.dt;
        let peak = state.max_mode();
        if !peak.is_finite() || peak > bound && bound > 0.0 {
            return Err(Error::Instability { t: state.t });
        }
        last = emit(i, &state, &mut fourier, observers)?;
    }
    let last = last.unwrap_or_else(|| state.to_profile(&mut fourier));
    Ok(EvolutionOutput {
        snapshots,
        last,
        steps,
        max_pin_residual: stepper.max_pin_residual,
        max_imag_residual: stepper.max_imag_residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn smooth_profile(n: usize, length: f64, theta_minus: f64, theta_plus: f64) -> AngleProfile {
        let ds = length / n as f64;
        let s_a = -length / 2.0;
        let theta = (0..=n)
            .map(|j| {
                let s = s_a + j as f64 * ds;
                let x = 2.0 * PI * (j as f64) / n as f64;
                theta_minus + (theta_plus - theta_minus) * j as f64 / n as f64 + 0.3 * x.sin() * (-(s * s) / 20.0).exp()
            })
            .collect::<Vec<_>>();
        let mut p = AngleProfile {
            s_a,
            s_b: s_a + length,
            n,
            theta,
            theta_minus,
            theta_plus,
            delta_s: ds,
            t: 1.0,
        };
        p.theta[0] = theta_minus;
        p.theta[n] = theta_plus;
        p
    }

    #[test]
    fn constant_ramp_cube() {
        let n = 32;
        let out = nonlinear_rhs(&vec![Complex64::default(); n], 4.0, 1.0, -1.0);
        let c: f64 = 2.0 / 4.0;
        assert!((out[0].re + 0.5 * c.powi(3)).abs() < 1e-15);
        assert!(out[1..].iter().all(|v| v.norm() < 1e-15));
        let zero = nonlinear_rhs(&vec![Complex64::default(); n], 4.0, 0.5, 0.5);
        assert!(zero.iter().all(|v| v.norm() == 0.0));
    }

    #[test]
    fn single_mode_cube_matches_pointwise() {
        let n = 64;
        let length = 10.0;
        let eps = 0.2;
        let mut fourier = Fourier::new(n);
        let vals: Vec<f64> = (0..n).map(|j| eps * (2.0 * PI * j as f64 / n as f64).sin()).collect();
        let modes = fourier.forward_real(&vals);
        let out = nonlinear_rhs(&modes, length, 0.0, 0.0);
        let w = 2.0 * PI / length;
        let oracle: Vec<f64> = (0..n)
            .map(|j| -0.5 * (eps * w * (2.0 * PI * j as f64 / n as f64).cos()).powi(3))
            .collect();
        let expect = fourier.forward_real(&oracle);
        for j in 0..n {
            assert!((out[j] - expect[j]).norm() < 1e-15);
            let xi = mode_index(j, n).abs();
            if xi != 1 && xi != 3 {
                assert!(out[j].norm() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_state_is_fixed_point() {
        let profile = smooth_profile(64, 20.0, 0.0, 0.0);
        let mut flat = profile.clone();
        flat.theta.iter_mut().for_each(|v| *v = 0.0);
        let mut f = Fourier::new(64);
        let st = SpectralState::from_profile(&flat, &mut f);
        let next = step_rk4_if(&st, -1e-3).unwrap();
        assert!(next.modes.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn linear_step_is_exact() {
        let profile = smooth_profile(128, 30.0, -0.5, 0.5);
        let mut f = Fourier::new(128);
        let st = SpectralState::from_profile(&profile, &mut f);
        let dt = -0.01;
        let mut stepper = Stepper::new(&st, dt).linear_only();
        let mut next = st.clone();
        stepper.step(&mut next, None).unwrap();
        let mut expect = st.clone();
        for (j, c) in expect.modes.iter_mut().enumerate() {
            let k = Complex64::new(0.0, angular_wavenumber(j, 128, st.length));
            *c *= (-dt * k * k * k).exp();
        }
        enforce_real_and_pin(&mut expect);
        for (a, b) in next.modes.iter().zip(&expect.modes) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn pinning_zeroes_endpoint() {
        let profile = smooth_profile(64, 20.0, 0.0, 1.0);
        let mut f = Fourier::new(64);
        let mut st = SpectralState::from_profile(&profile, &mut f);
        st.modes[3] += Complex64::new(0.1, 0.2);
        st.modes[5] += Complex64::new(0.0, 1e-9);
        enforce_real_and_pin(&mut st);
        let mut buf = st.modes.clone();
        f.inverse(&mut buf);
        assert!(buf[0].norm() < 1e-16);
        assert!(buf.iter().all(|c| c.im.abs() < 1e-16));
    }

    #[test]
    fn zero_steps_returns_input() {
        let profile = smooth_profile(64, 20.0, 0.0, 1.0);
        let cfg = EvolutionConfig {
            dt: -1e-3,
            t_end: 1.0,
            ..Default::default()
        };
        let out = evolve(&profile, &cfg, &mut []).unwrap();
        assert_eq!(out.steps, 0);
        for (a, b) in out.last.theta.iter().zip(&profile.theta) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn config_validation() {
        let ok = EvolutionConfig::default();
        assert!(ok.validate(1.0).is_ok());
        let wrong_sign = EvolutionConfig { dt: 1e-3, ..ok.clone() };
        assert!(wrong_sign.validate(1.0).is_err());
        let bad_end = EvolutionConfig {
            t_end: 0.0,
            ..ok.clone()
        };
        assert!(bad_end.validate(1.0).is_err());
        let zero_dt = EvolutionConfig { dt: 0.0, ..ok };
        assert!(zero_dt.validate(1.0).is_err());
    }

    #[test]
    fn node_derivatives_match_fft() {
        let profile = smooth_profile(128, 30.0, -0.5, 0.5);
        let mut f = Fourier::new(128);
        let st = SpectralState::from_profile(&profile, &mut f);
        let k = crate::profile::theta_s_from_theta(&profile);
        for j in [0, 17, 64, 100] {
            let d = st.node_derivatives(j);
            assert!((d[0] - profile.theta[j]).abs() < 1e-12);
            assert!((d[1] - k[j]).abs() < 1e-12);
        }
    }
}
