//! Closing an open profile with a smooth loop of total turning `2 pi`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::quadrature::integrate_adaptive;
use crate::error::{Error, Result};
use crate::profile::AngleProfile;

const PSI_REL_TOL: f64 = 1e-15;

/// Absolute tolerance for `psi` integrals over `width`, relative to the peak
/// `psi((alpha + 1) / 2)`.
fn psi_abs_tol(p: ClosureParams, width: f64) -> f64 {
    let peak = bump(0.5 * (p.alpha + 1.0), p);
    (1e-17 * peak * width).max(f64::MIN_POSITIVE)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureParams {
    pub alpha: f64,
    pub beta: f64,
}

impl ClosureParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) || !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "closure parameters need 0 < alpha < 1 and beta > 0, got ({alpha}, {beta})"
            )));
        }
        Ok(ClosureParams { alpha, beta })
    }
}

/// `psi(x) = exp(-beta / ((x - alpha)(1 - x)))` on `(alpha, 1)`, zero elsewhere.
pub fn bump(x: f64, p: ClosureParams) -> f64 {
    if x <= p.alpha || x >= 1.0 {
        0.0
    } else {
        (-p.beta / ((x - p.alpha) * (1.0 - x))).exp()
    }
}

/// `Psi(s) = int_0^s psi`.
pub fn bump_primitive(s: f64, p: ClosureParams) -> f64 {
    let hi = s.min(1.0);
    if hi <= p.alpha {
        return 0.0;
    }
    integrate_adaptive(&|x| bump(x, p), p.alpha, hi, psi_abs_tol(p, hi - p.alpha), PSI_REL_TOL)
}

/// `Psi(j / intervals)` for `j = 0 ..= intervals`, accumulated panel by panel.
pub fn bump_primitive_nodes(intervals: usize, p: ClosureParams) -> Vec<f64> {
    let h = 1.0 / intervals as f64;
    let tol = psi_abs_tol(p, h);
    let panels: Vec<f64> = (0..intervals)
        .into_par_iter()
        .map(|j| {
            let a = (j as f64 * h).max(p.alpha);
            let b = ((j + 1) as f64 * h).min(1.0);
            if b <= a {
                0.0
            } else {
                integrate_adaptive(&|x| bump(x, p), a, b, tol, PSI_REL_TOL)
            }
        })
        .collect();
    let mut out = Vec::with_capacity(intervals + 1);
    let mut acc = Neumaier::default();
    out.push(0.0);
    for v in panels {
        acc.add(v);
        out.push(acc.value());
    }
    out
}

/// Height of the loop: `theta` rises from `0` at the old `s_b` to
/// `theta^- + 2 pi`, so the extended turning is exactly `2 pi`.
pub fn loop_amplitude(theta_minus: f64) -> f64 {
    2.0 * PI + theta_minus
}

/// Appends the loop on `[s_b, s_b + 3L]`, giving `4N + 1` nodes with the
/// same spacing.
pub fn extend_theta_with_loop(profile: &AngleProfile, p: ClosureParams) -> Result<AngleProfile> {
    if profile.theta[profile.n] != 0.0 {
        return Err(Error::BadProfile(format!(
            "loop extension needs theta(s_b) = 0, found {}",
            profile.theta[profile.n]
        )));
    }
    let n = profile.n;
    let psi = bump_primitive_nodes(3 * n, p);
    let amp = loop_amplitude(profile.theta_minus);
    let scale = amp / psi[3 * n];
    let mut theta = profile.theta.clone();
    theta.extend(psi[1..].iter().map(|v| scale * v));
    theta[4 * n] = amp;
    Ok(AngleProfile {
        s_a: profile.s_a,
        s_b: profile.s_b + 3.0 * profile.length(),
        n: 4 * n,
        theta,
        theta_minus: profile.theta_minus,
        theta_plus: amp,
        delta_s: profile.delta_s,
        t: profile.t,
    })
}

#[derive(Default, Clone, Copy)]
struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    fn add(&mut self, v: f64) {
        let t = self.sum + v;
        if self.sum.abs() >= v.abs() {
            self.comp += (self.sum - t) + v;
        } else {
            self.comp += (v - t) + self.sum;
        }
        self.sum = t;
    }

    fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

#[derive(Default, Clone, Copy)]
struct ComplexSum {
    re: Neumaier,
    im: Neumaier,
}

impl ComplexSum {
    fn add(&mut self, z: Complex64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    fn value(&self) -> Complex64 {
        Complex64::new(self.re.value(), self.im.value())
    }
}

/// The parameter-independent part of the closure residual.
#[derive(Debug, Clone)]
pub struct LoopBase {
    pub n: usize,
    pub delta_s: f64,
    pub theta_minus: f64,
    pub amplitude: f64,
    /// `sum_{j<N} exp(i (theta_j - theta^-))`.
    base_sum: Complex64,
}

impl LoopBase {
    pub fn new(profile: &AngleProfile) -> Result<Self> {
        if profile.theta[profile.n] != 0.0 {
            return Err(Error::BadProfile("loop extension needs theta(s_b) = 0".into()));
        }
        let mut acc = ComplexSum::default();
        for th in &profile.theta[..profile.n] {
            acc.add(Complex64::from_polar(1.0, th - profile.theta_minus));
        }
        Ok(LoopBase {
            n: profile.n,
            delta_s: profile.delta_s,
            theta_minus: profile.theta_minus,
            amplitude: loop_amplitude(profile.theta_minus),
            base_sum: acc.value(),
        })
    }

    pub fn total_length(&self) -> f64 {
        4.0 * self.n as f64 * self.delta_s
    }

    /// `z(s_b) - z(s_a)` of the extended curve rotated to `z_s(s_a) = 1`.
    pub fn gap(&self, p: ClosureParams) -> Complex64 {
        let m = 3 * self.n;
        let psi = bump_primitive_nodes(m, p);
        let scale = self.amplitude / psi[m];
        let mut acc = ComplexSum::default();
        acc.add(self.base_sum);
        for v in &psi[..m] {
            acc.add(Complex64::from_polar(1.0, scale * v - self.theta_minus));
        }
        acc.value() * self.delta_s
    }
}

/// Residual `z(s_b, 1)` of the closed-curve candidate with `z(s_a) = 0` and
/// `z_s(s_a) = 1`.
pub fn closure_gap(profile: &AngleProfile, p: ClosureParams) -> Result<Complex64> {
    Ok(LoopBase::new(profile)?.gap(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClosureLogRow {
    pub alpha: f64,
    pub beta: f64,
    pub re_end: f64,
    pub im_end: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureOptions {
    pub alpha_bracket: (f64, f64),
    pub beta_bracket: (f64, f64),
    /// Stop the inner search once `|Im| <= inner_tol * length`; zero bisects
    /// to the resolution of `f64`.
    pub inner_tol: f64,
    pub outer_tol: f64,
    pub max_iterations: usize,
}

impl Default for ClosureOptions {
    fn default() -> Self {
        ClosureOptions {
            alpha_bracket: (0.1, 0.2),
            beta_bracket: (0.5, 20.0),
            inner_tol: 0.0,
            outer_tol: 0.0,
            max_iterations: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosureResult {
    pub params: ClosureParams,
    pub residual: Complex64,
    pub outer_iterations: usize,
    pub log: Vec<ClosureLogRow>,
}

struct Bisection {
    lo: f64,
    hi: f64,
    f_lo: f64,
}

/// Bisects `f` on `[lo, hi]`; returns the better endpoint, its value, and
/// the number of iterations.
fn bisect<T>(
    mut f: impl FnMut(f64) -> Result<(f64, T)>,
    lo: f64,
    hi: f64,
    tol: f64,
    max_iterations: usize,
    level: &str,
) -> Result<(f64, T, usize)> {
    let (f_lo, t_lo) = f(lo)?;
    let (f_hi, t_hi) = f(hi)?;
    if f_lo == 0.0 {
        return Ok((lo, t_lo, 0));
    }
    if f_hi == 0.0 {
        return Ok((hi, t_hi, 0));
    }
    if f_lo.signum() == f_hi.signum() {
        return Err(Error::BadBracket(format!(
            "{level}: no sign change on [{lo}, {hi}] (values {f_lo:e}, {f_hi:e})"
        )));
    }
    let mut b = Bisection { lo, hi, f_lo };
    let mut best = if f_lo.abs() <= f_hi.abs() {
        (lo, f_lo, t_lo)
    } else {
        (hi, f_hi, t_hi)
    };
    for it in 1..=max_iterations {
        let mid = 0.5 * (b.lo + b.hi);
        if mid <= b.lo.min(b.hi) || mid >= b.lo.max(b.hi) {
            return Ok((best.0, best.2, it));
        }
        let (fm, tm) = f(mid)?;
        let done = fm == 0.0 || fm.abs() <= tol;
        if fm.abs() <= best.1.abs() {
            best = (mid, fm, tm);
        }
        if done {
            return Ok((best.0, best.2, it));
        }
        if fm.signum() == b.f_lo.signum() {
            b.lo = mid;
            b.f_lo = fm;
        } else {
            b.hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: max_iterations,
    })
}

/// Finds `beta` with `Im z(s_b) = 0` at fixed `alpha`.
pub fn solve_beta(
    base: &LoopBase,
    alpha: f64,
    beta_bracket: (f64, f64),
    tol: f64,
    max_iterations: usize,
    log: &mut Vec<ClosureLogRow>,
) -> Result<(f64, Complex64)> {
    let (beta, gap, _) = bisect(
        |beta| {
            let g = base.gap(ClosureParams::new(alpha, beta)?);
            log.push(ClosureLogRow {
                alpha,
                beta,
                re_end: g.re,
                im_end: g.im,
            });
            Ok((g.im, g))
        },
        beta_bracket.0,
        beta_bracket.1,
        tol * base.total_length(),
        max_iterations,
        &format!("inner (alpha = {alpha})"),
    )?;
    Ok((beta, gap))
}

/// Double bisection: the inner level zeroes `Im z(s_b)` in `beta`, the
/// outer level zeroes `Re z(s_b)` in `alpha`.
pub fn close_curve(profile: &AngleProfile, opts: &ClosureOptions) -> Result<ClosureResult> {
    let base = LoopBase::new(profile)?;
    let mut log = Vec::new();
    let (alpha, (beta, residual), outer_iterations) = bisect(
        |alpha| {
            let (beta, g) = solve_beta(
                &base,
                alpha,
                opts.beta_bracket,
                opts.inner_tol,
                opts.max_iterations,
                &mut log,
            )?;
            Ok((g.re, (beta, g)))
        },
        opts.alpha_bracket.0,
        opts.alpha_bracket.1,
        opts.outer_tol * base.total_length(),
        opts.max_iterations,
        "outer",
    )?;
    Ok(ClosureResult {
        params: ClosureParams { alpha, beta },
        residual,
        outer_iterations,
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_values() {
        let p = ClosureParams::new(0.2, 3.0).unwrap();
        assert_eq!(bump(0.2, p), 0.0);
        assert_eq!(bump(1.0, p), 0.0);
        assert_eq!(bump_primitive(0.2, p), 0.0);
        assert_eq!(bump_primitive(0.1, p), 0.0);
        let m = 0.6;
        let expect = (-3.0 / (0.4f64 * 0.4)).exp();
        assert!((bump(m, p) - expect).abs() < 1e-14 * expect);
    }

    #[test]
    fn primitive_is_monotone() {
        let p = ClosureParams::new(0.1, 5.0).unwrap();
        let nodes = bump_primitive_nodes(300, p);
        assert!(nodes.windows(2).all(|w| w[1] >= w[0]));
        let whole = bump_primitive(1.0, p);
        assert!((nodes[300] - whole).abs() < 1e-13 * whole);
    }

    #[test]
    fn params_validated() {
        assert!(ClosureParams::new(1.0, 1.0).is_err());
        assert!(ClosureParams::new(0.5, 0.0).is_err());
        assert!(ClosureParams::new(0.5, f64::INFINITY).is_err());
    }

    #[test]
    fn bisect_reports_level() {
        let r = bisect(|x| Ok((x * x + 1.0, ())), -1.0, 1.0, 0.0, 100, "inner");
        match r {
            Err(Error::BadBracket(msg)) => assert!(msg.starts_with("inner")),
            other => panic!("unexpected {other:?}"),
        }
        let (root, _, _) = bisect(|x| Ok((x - 0.3, ())), 0.0, 1.0, 0.0, 200, "outer").unwrap();
        assert!((root - 0.3).abs() < 1e-15);
    }
}
