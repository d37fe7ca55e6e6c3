//! Observables of an evolution and the curvature-integral scan.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::curve::{enclosed_area, reconstruct_curve, Anchor, CurveSamples};
use crate::error::{Error, Result};
use crate::evolve::Observer;
use crate::fourier::Fourier;
use crate::profile::{estimate_theta_minus, theta_from_profile, theta_s_with, AngleProfile};
use crate::shooting::{integrate_profile_sampled, InitialPair, DEFAULT_DX};

pub const DEFAULT_SUPPORT_THRESHOLD: f64 = 1e-3;

/// `int k^2 ds` by the trapezoid rule, with `k` the spectral derivative of
/// `theta`.
pub fn energy(profile: &AngleProfile) -> f64 {
    let mut fourier = Fourier::new(profile.n);
    let k = theta_s_with(profile, &mut fourier);
    energy_of(&k, profile.delta_s)
}

fn energy_of(k: &[f64], ds: f64) -> f64 {
    let n = k.len() - 1;
    let inner: f64 = k[1..n].iter().map(|v| v * v).sum();
    (inner + 0.5 * (k[0] * k[0] + k[n] * k[n])) * ds
}

/// `k(0, t) = 2 u(0) / (3t)^(1/3)` of the self-similar solution.
pub fn k0_exact(t: f64, u0: f64) -> f64 {
    2.0 * u0 / (3.0 * t).cbrt()
}

/// Measured `k(0, t)` and its self-similar value.
pub fn curvature_origin(profile: &AngleProfile, u0: f64) -> Result<(f64, f64)> {
    let j = profile.origin_index().ok_or(Error::NodeMissing { s: 0.0 })?;
    let mut fourier = Fourier::new(profile.n);
    let k = theta_s_with(profile, &mut fourier);
    Ok((k[j], k0_exact(profile.t, u0)))
}

/// Total length of the nodes where `|k| > threshold`, each node counting `ds`.
pub fn support_width(profile: &AngleProfile, threshold: f64) -> Result<f64> {
    if !(threshold > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "support threshold must be positive, got {threshold}"
        )));
    }
    let mut fourier = Fourier::new(profile.n);
    let k = theta_s_with(profile, &mut fourier);
    Ok(support_of(&k, profile.delta_s, threshold))
}

fn support_of(k: &[f64], ds: f64, threshold: f64) -> f64 {
    // node n duplicates node 0 on the periodic grid
    k[..k.len() - 1].iter().filter(|v| v.abs() > threshold).count() as f64 * ds
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub energy: f64,
    pub k0: f64,
    pub k0_exact: f64,
    pub closure_error: Option<f64>,
    pub area: Option<f64>,
    pub support_width: f64,
}

/// Evaluates every observable on one snapshot. Closure error and area are
/// filled in when `closed` is set.
pub fn record(profile: &AngleProfile, u0: f64, threshold: f64, closed: bool) -> Result<DiagnosticsRecord> {
    let j0 = profile.origin_index().ok_or(Error::NodeMissing { s: 0.0 })?;
    let mut fourier = Fourier::new(profile.n);
    let k = theta_s_with(profile, &mut fourier);
    let (closure_error, area) = if closed {
        let curve = reconstruct_curve(profile, Anchor::origin_at(profile.s_a));
        (Some(curve.gap().norm()), Some(enclosed_area(&curve)))
    } else {
        (None, None)
    };
    Ok(DiagnosticsRecord {
        t: profile.t,
        energy: energy_of(&k, profile.delta_s),
        k0: k[j0],
        k0_exact: k0_exact(profile.t, u0),
        closure_error,
        area,
        support_width: support_of(&k, profile.delta_s, threshold),
    })
}

/// Observer collecting a [`DiagnosticsRecord`] per observed snapshot.
#[derive(Debug, Clone)]
pub struct DiagnosticsRecorder {
    pub u0: f64,
    pub threshold: f64,
    pub closed: bool,
    pub records: Vec<DiagnosticsRecord>,
}

impl DiagnosticsRecorder {
    pub fn new(u0: f64, closed: bool) -> Self {
        DiagnosticsRecorder {
            u0,
            threshold: DEFAULT_SUPPORT_THRESHOLD,
            closed,
            records: Vec::new(),
        }
    }

    pub fn with_threshold(mut self, threshold: f64) -> Self {
        self.threshold = threshold;
        self
    }
}

impl Observer for DiagnosticsRecorder {
    fn observe(&mut self, profile: &AngleProfile) -> Result<()> {
        self.records
            .push(record(profile, self.u0, self.threshold, self.closed)?);
        Ok(())
    }
}

/// Range and drift of one observable over a run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSummary {
    pub min: f64,
    pub max: f64,
    pub first: f64,
    pub last: f64,
    /// `max |x / x_first - 1|`, or the absolute deviation when `x_first = 0`.
    pub drift: f64,
}

impl SeriesSummary {
    pub fn of(values: &[f64]) -> Option<Self> {
        let first = *values.first()?;
        let last = *values.last()?;
        let scale = if first != 0.0 { first.abs() } else { 1.0 };
        Some(SeriesSummary {
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            first,
            last,
            drift: values.iter().map(|v| (v - first).abs() / scale).fold(0.0, f64::max),
        })
    }
}

/// Per-observable summaries, keyed by the CSV column name.
pub fn summarize(records: &[DiagnosticsRecord]) -> BTreeMap<String, SeriesSummary> {
    let mut out = BTreeMap::new();
    type Column = (&'static str, fn(&DiagnosticsRecord) -> Option<f64>);
    let columns: [Column; 6] = [
        ("energy", |r| Some(r.energy)),
        ("k0", |r| Some(r.k0)),
        ("k0_exact", |r| Some(r.k0_exact)),
        ("closure_error", |r| r.closure_error),
        ("area", |r| r.area),
        ("support_width", |r| Some(r.support_width)),
    ];
    for (name, get) in columns {
        let values: Vec<f64> = records.iter().filter_map(get).collect();
        if let Some(s) = SeriesSummary::of(&values) {
            out.insert(name.to_string(), s);
        }
    }
    out
}

/// `max |E(t) / E(t_ref) - 1|` over records with `t` in `[t_lo, t_hi]`,
/// where `t_ref` is the record closest to `t_hi`.
pub fn energy_drift(records: &[DiagnosticsRecord], t_lo: f64, t_hi: f64) -> Option<f64> {
    let window: Vec<&DiagnosticsRecord> = records
        .iter()
        .filter(|r| r.t >= t_lo - 1e-12 && r.t <= t_hi + 1e-12)
        .collect();
    let reference = window
        .iter()
        .min_by(|a, b| (a.t - t_hi).abs().total_cmp(&(b.t - t_hi).abs()))?
        .energy;
    Some(
        window
            .iter()
            .map(|r| (r.energy / reference - 1.0).abs())
            .fold(0.0, f64::max),
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Ordinary least squares `y = slope x + intercept`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> Result<LinearFit> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidConfig(
            "linear fit needs two or more paired samples".into(),
        ));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let syy: f64 = y.iter().map(|b| (b - my) * (b - my)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidConfig("linear fit needs distinct abscissae".into()));
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(LinearFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// `t^(-1/3) z(t^(1/3) sigma, t)`, interpolated by cubic Hermite in `(z, z_s)`.
pub fn rescaled_point(curve: &CurveSamples, sigma: f64) -> Result<Complex64> {
    let c = curve.t.cbrt();
    let s = c * sigma;
    let r = (s - curve.s_a) / curve.delta_s;
    let last = curve.len() - 1;
    if !(r >= 0.0 && r <= last as f64) {
        return Err(Error::InvalidConfig(format!(
            "sigma = {sigma} is outside the curve at t = {}",
            curve.t
        )));
    }
    let j = (r.floor() as usize).min(last - 1);
    let u = r - j as f64;
    let h = curve.delta_s;
    let (u2, u3) = (u * u, u * u * u);
    let z = curve.z[j] * (2.0 * u3 - 3.0 * u2 + 1.0)
        + curve.z_s[j] * (h * (u3 - 2.0 * u2 + u))
        + curve.z[j + 1] * (-2.0 * u3 + 3.0 * u2)
        + curve.z_s[j + 1] * (h * (u3 - u2));
    Ok(z / c)
}

/// Largest distance between two rescaled curves over `samples` equidistant
/// points of `[-half_width, half_width]`.
pub fn collapse_deviation(a: &CurveSamples, b: &CurveSamples, half_width: f64, samples: usize) -> Result<f64> {
    if samples < 2 || !(half_width > 0.0) {
        return Err(Error::InvalidConfig(
            "collapse window needs a positive width and two samples".into(),
        ));
    }
    let mut worst: f64 = 0.0;
    for i in 0..samples {
        let sigma = -half_width + 2.0 * half_width * i as f64 / (samples - 1) as f64;
        worst = worst.max((rescaled_point(a, sigma)? - rescaled_point(b, sigma)?).norm());
    }
    Ok(worst)
}

/// One row of [`scan_curvature_integral`]; `integral` is absent when the
/// pair could not be processed, with the reason in `failure`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntegralScanRow {
    pub pair: InitialPair,
    pub integral: Option<f64>,
    pub failure: Option<String>,
}

/// Integration window and sampling of the scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanOptions {
    pub x_min: f64,
    pub x_max: f64,
    pub dx: f64,
    /// Spacing in `x` of the samples used for the extrema search.
    pub node_dx: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            x_min: -80.0,
            x_max: 20.0,
            dx: DEFAULT_DX,
            node_dx: 0.05,
        }
    }
}

/// `theta^+ - theta^-` for one admissible pair.
pub fn curvature_integral(pair: InitialPair, opts: &ScanOptions) -> Result<f64> {
    let stride = ((opts.node_dx / opts.dx).round() as usize).max(1);
    let sol = integrate_profile_sampled(pair, opts.x_min, opts.x_max, opts.dx, stride)?;
    let samples = theta_from_profile(&sol)?;
    if samples.theta.iter().all(|&v| v == 0.0) {
        return Ok(0.0);
    }
    let est = estimate_theta_minus(&samples)?;
    Ok(samples.theta[samples.len() - 1] - est.theta_minus)
}

/// [`curvature_integral`] over `pairs` in parallel; failures are recorded per
/// row and do not stop the scan.
pub fn scan_curvature_integral(pairs: &[InitialPair], opts: &ScanOptions) -> Vec<IntegralScanRow> {
    pairs
        .par_iter()
        .map(|&pair| match curvature_integral(pair, opts) {
            Ok(v) => IntegralScanRow {
                pair,
                integral: Some(v),
                failure: None,
            },
            Err(e) => IntegralScanRow {
                pair,
                integral: None,
                failure: Some(e.to_string()),
            },
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize, s_a: f64, s_b: f64, c: f64) -> AngleProfile {
        let ds = (s_b - s_a) / n as f64;
        let theta: Vec<f64> = (0..=n).map(|j| c * j as f64 * ds).collect();
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
    fn ramp_energy_and_support() {
        let p = ramp(64, -4.0, 4.0, 0.3);
        assert!((energy(&p) - 0.09 * 8.0).abs() < 1e-13);
        assert!((support_width(&p, 0.1).unwrap() - 8.0).abs() < 1e-13);
        let flat = ramp(64, -4.0, 4.0, 0.0);
        assert_eq!(energy(&flat), 0.0);
        assert_eq!(support_width(&flat, 1e-3).unwrap(), 0.0);
        assert!(support_width(&p, 0.0).is_err());
    }

    #[test]
    fn k0_exact_values() {
        assert!((k0_exact(1.0, 0.72) - 1.44 / 1.442_249_570_307_408_3).abs() < 1e-15);
        assert_eq!(k0_exact(0.3, 0.0), 0.0);
        for t in [1e-3, 0.1, 1.0] {
            assert!((k0_exact(t, 0.72) * (3.0 * t).cbrt() / 2.0 - 0.72).abs() < 1e-15);
        }
    }

    #[test]
    fn origin_must_be_a_node() {
        let p = ramp(64, -4.05, 3.95, 0.1);
        assert!(matches!(curvature_origin(&p, 0.1), Err(Error::NodeMissing { .. })));
        let q = ramp(64, -4.0, 4.0, 0.1);
        let (k0, _) = curvature_origin(&q, 0.1).unwrap();
        assert!((k0 - 0.1).abs() < 1e-13);
    }

    #[test]
    fn fit_of_exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y: Vec<f64> = x.iter().map(|v| 2.0 - 0.5 * v).collect();
        let f = linear_fit(&x, &y).unwrap();
        assert!((f.slope + 0.5).abs() < 1e-15 && (f.intercept - 2.0).abs() < 1e-15);
        assert!((f.r_squared - 1.0).abs() < 1e-15);
        assert!(linear_fit(&[1.0, 1.0], &[0.0, 1.0]).is_err());
    }

    #[test]
    fn summary_drift() {
        let s = SeriesSummary::of(&[2.0, 2.2, 1.9]).unwrap();
        assert_eq!((s.min, s.max, s.first, s.last), (1.9, 2.2, 2.0, 1.9));
        assert!((s.drift - 0.1).abs() < 1e-15);
        assert!(SeriesSummary::of(&[]).is_none());
    }

    #[test]
    fn zero_pair_scans_to_zero() {
        let opts = ScanOptions {
            dx: 1e-3,
            ..Default::default()
        };
        assert_eq!(
            curvature_integral(InitialPair { u0: 0.0, v0: 0.0 }, &opts).unwrap(),
            0.0
        );
        let rows = scan_curvature_integral(&[InitialPair { u0: 0.5, v0: 0.0 }], &opts);
        assert!(rows[0].integral.is_none() && rows[0].failure.is_some());
    }
}
