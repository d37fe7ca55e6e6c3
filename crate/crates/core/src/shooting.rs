//! Shooting for the self-similar profile equation `u'' = x u - 2 u^3`.
//!
//! The system is integrated as `(gamma, u, v)` with `gamma' = u`, `u' = v`,
//! `v' = x u - 2 u^3` by classical RK4, outward from `x = 0` in both
//! directions. For `x > 0` almost every datum escapes towards `+inf` or
//! `-inf` (it settles into the well around `u = +-sqrt(x/2)`); the data whose solutions decay form the admissible curve, the common
//! boundary of the two escape basins, and are located by bisection.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_DX: f64 = 1e-5;
pub const MAX_BISECTION_ITERATIONS: usize = 200;
/// Cap on bracket doublings when continuing along the admissible curve.
pub const MAX_BRACKET_EXPANSIONS: usize = 40;

/// A point `(u(0), u_x(0))` of the shooting plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialPair {
    pub u0: f64,
    pub v0: f64,
}

impl InitialPair {
    pub fn new(u0: f64, v0: f64) -> Result<Self> {
        if !(u0.is_finite() && v0.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "initial pair must be finite, got ({u0}, {v0})"
            )));
        }
        Ok(InitialPair { u0, v0 })
    }

    /// The pair used by all reference experiments.
    pub fn reference() -> Self {
        InitialPair {
            u0: 0.72,
            v0: 1.1601860809647328,
        }
    }

    pub fn negated(self) -> Self {
        InitialPair {
            u0: -self.u0,
            v0: -self.v0,
        }
    }
}

/// Outcome of a forward sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BlowupVerdict {
    PlusInfinity { x_escape: f64 },
    MinusInfinity { x_escape: f64 },
    Undecided,
}

impl BlowupVerdict {
    pub fn sign(&self) -> i8 {
        match self {
            BlowupVerdict::PlusInfinity { .. } => 1,
            BlowupVerdict::MinusInfinity { .. } => -1,
            BlowupVerdict::Undecided => 0,
        }
    }

    pub fn x_escape(&self) -> Option<f64> {
        match *self {
            BlowupVerdict::PlusInfinity { x_escape } | BlowupVerdict::MinusInfinity { x_escape } => Some(x_escape),
            BlowupVerdict::Undecided => None,
        }
    }

    pub fn is_decided(&self) -> bool {
        self.sign() != 0
    }

    pub fn label(&self) -> &'static str {
        match self {
            BlowupVerdict::PlusInfinity { .. } => "+inf",
            BlowupVerdict::MinusInfinity { .. } => "-inf",
            BlowupVerdict::Undecided => "undecided",
        }
    }
}

/// Point of the forward sweep closest to the origin of the phase plane.
///
/// For an admissible datum this is where the decaying solution bottoms out
/// before the round-off driven growing mode takes over.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFloor {
    pub x: f64,
    pub u: f64,
    pub v: f64,
    pub gamma: f64,
}

/// Sampled trajectory of `(gamma, u, v)` on an ascending uniform grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ProfileSolution {
    pub pair: InitialPair,
    pub x: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub gamma: Vec<f64>,
    /// Spacing of the stored samples.
    pub step: f64,
    /// Integration step.
    pub dx: f64,
    pub origin_index: usize,
    /// Requested integration window.
    pub x_min: f64,
    pub x_max: f64,
    pub forward_verdict: BlowupVerdict,
    pub floor: DecayFloor,
}

impl ProfileSolution {
    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

type State = [f64; 3];

/// `v^2/2 - x u^2/2 + u^4/2`, non-increasing in `x` along solutions since its
/// derivative is `-u^2/2`. It vanishes at the saddle `u = v = 0`, so once it
/// turns negative for `x > 0` the solution can never again reach `u = 0`:
/// it is trapped in the well of one sign and heads to that infinity.
#[inline]
pub fn phase_energy(x: f64, y: &[f64; 3]) -> f64 {
    let (u, v) = (y[1], y[2]);
    0.5 * v * v - 0.5 * x * u * u + 0.5 * u * u * u * u
}

#[inline]
fn rhs(x: f64, y: &State, cubic: bool) -> State {
    let u = y[1];
    let nl = if cubic { 2.0 * u * u * u } else { 0.0 };
    [u, y[2], x * u - nl]
}

/// One classical RK4 step for `(gamma, u, v)`.
#[inline]
pub(crate) fn rk4_step(x: f64, y: &State, h: f64, cubic: bool) -> State {
    let k1 = rhs(x, y, cubic);
    let y2 = [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1], y[2] + 0.5 * h * k1[2]];
    let k2 = rhs(x + 0.5 * h, &y2, cubic);
    let y3 = [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1], y[2] + 0.5 * h * k2[2]];
    let k3 = rhs(x + 0.5 * h, &y3, cubic);
    let y4 = [y[0] + h * k3[0], y[1] + h * k3[1], y[2] + h * k3[2]];
    let k4 = rhs(x + h, &y4, cubic);
    let w = h / 6.0;
    [
        y[0] + w * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        y[1] + w * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
        y[2] + w * (k1[2] + 2.0 * k2[2] + 2.0 * k3[2] + k4[2]),
    ]
}

/// Integrates from `x = 0` over `steps` steps of signed size `h`.
///
/// Returns the verdict (always `Undecided` without escape checks), the decay
/// floor and the stored samples (every `stride` steps, starting at `x = 0`).
pub(crate) struct Sweep {
    pub verdict: BlowupVerdict,
    pub floor: DecayFloor,
    pub samples: Vec<(f64, State)>,
}

pub(crate) fn sweep(
    pair: InitialPair,
    h: f64,
    steps: usize,
    stride: Option<usize>,
    escape: bool,
    cubic: bool,
) -> Result<Sweep> {
    let mut y: State = [0.0, pair.u0, pair.v0];
    let mut samples = Vec::new();
    if let Some(stride) = stride {
        samples.reserve(steps / stride + 1);
        samples.push((0.0, y));
    }
    let mut floor = DecayFloor {
        x: 0.0,
        u: y[1],
        v: y[2],
        gamma: 0.0,
    };
    let mut floor_norm = y[1] * y[1] + y[2] * y[2];
    for i in 0..steps {
        let xi = i as f64 * h;
        y = rk4_step(xi, &y, h, cubic);
        let x = (i + 1) as f64 * h;
        if !(y[0].is_finite() && y[1].is_finite() && y[2].is_finite()) {
            return Err(Error::NonFinite { x });
        }
        if escape && phase_energy(x, &y) < 0.0 {
            let verdict = if y[1] > 0.0 {
                BlowupVerdict::PlusInfinity { x_escape: x }
            } else {
                BlowupVerdict::MinusInfinity { x_escape: x }
            };
            return Ok(Sweep {
                verdict,
                floor,
                samples,
            });
        }
        let norm = y[1] * y[1] + y[2] * y[2];
        if norm < floor_norm {
            floor_norm = norm;
            floor = DecayFloor {
                x,
                u: y[1],
                v: y[2],
                gamma: y[0],
            };
        }
        if let Some(stride) = stride {
            if (i + 1) % stride == 0 {
                samples.push((x, y));
            }
        }
    }
    Ok(Sweep {
        verdict: BlowupVerdict::Undecided,
        floor,
        samples,
    })
}

fn step_count(extent: f64, dx: f64) -> usize {
    (extent.abs() / dx).round() as usize
}

fn check_step(dx: f64) -> Result<()> {
    if !(dx > 0.0 && dx.is_finite()) {
        return Err(Error::InvalidConfig(format!("dx must be positive, got {dx}")));
    }
    Ok(())
}

/// [`integrate_profile_sampled`] keeping every integration step.
pub fn integrate_profile(pair: InitialPair, x_min: f64, x_max: f64, dx: f64) -> Result<ProfileSolution> {
    integrate_profile_sampled(pair, x_min, x_max, dx, 1)
}

/// Integrates on `[x_min, x_max]`, storing every `stride`-th step.
///
/// The forward sweep stops once [`phase_energy`] turns negative; the
/// returned grid then ends at the last stored sample before escape. The
/// backward sweep runs without escape checks.
pub fn integrate_profile_sampled(
    pair: InitialPair,
    x_min: f64,
    x_max: f64,
    dx: f64,
    stride: usize,
) -> Result<ProfileSolution> {
    check_step(dx)?;
    if !(x_min <= 0.0 && 0.0 <= x_max) {
        return Err(Error::InvalidConfig(format!(
            "integration window [{x_min}, {x_max}] must contain 0"
        )));
    }
    if stride == 0 {
        return Err(Error::InvalidConfig("stride must be positive".into()));
    }
    let forward = sweep(pair, dx, step_count(x_max, dx), Some(stride), true, true)?;
    let backward = sweep(pair, -dx, step_count(x_min, dx), Some(stride), false, true)?;

    let n_back = backward.samples.len() - 1;
    let total = n_back + forward.samples.len();
    let mut sol = ProfileSolution {
        pair,
        x: Vec::with_capacity(total),
        u: Vec::with_capacity(total),
        v: Vec::with_capacity(total),
        gamma: Vec::with_capacity(total),
        step: dx * stride as f64,
        dx,
        origin_index: n_back,
        x_min,
        x_max,
        forward_verdict: forward.verdict,
        floor: forward.floor,
    };
    let ordered = backward.samples.iter().skip(1).rev().chain(forward.samples.iter());
    for (x, y) in ordered {
        sol.x.push(*x);
        sol.gamma.push(y[0]);
        sol.u.push(y[1]);
        sol.v.push(y[2]);
    }
    Ok(sol)
}

/// Forward-only sweep to `x_max` returning the escape verdict.
pub fn classify_blowup(pair: InitialPair, x_max: f64, dx: f64) -> Result<BlowupVerdict> {
    check_step(dx)?;
    if !(x_max > 0.0) {
        return Err(Error::InvalidConfig(format!("x_max must be positive, got {x_max}")));
    }
    Ok(sweep(pair, dx, step_count(x_max, dx), None, true, true)?.verdict)
}

/// Forward-sweep settings shared by the bisection routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShootingOptions {
    pub x_max: f64,
    pub dx: f64,
    pub max_iterations: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        ShootingOptions {
            x_max: 20.0,
            dx: DEFAULT_DX,
            max_iterations: MAX_BISECTION_ITERATIONS,
        }
    }
}

/// Result of a bisection along a line `origin + tau * direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineBisection {
    pub pair: InitialPair,
    pub tau_lo: f64,
    pub tau_hi: f64,
    pub iterations: usize,
}

fn point_on_line(origin: InitialPair, direction: (f64, f64), tau: f64) -> InitialPair {
    InitialPair {
        u0: origin.u0 + tau * direction.0,
        v0: origin.v0 + tau * direction.1,
    }
}

/// Bisects the escape sign along `origin + tau * direction`, `tau` in
/// `[tau_lo, tau_hi]`, until the bracket is narrower than `tol` (or cannot
/// be split further in double precision).
pub fn bisect_line(
    origin: InitialPair,
    direction: (f64, f64),
    tau_lo: f64,
    tau_hi: f64,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<LineBisection> {
    let (mut lo, mut hi) = if tau_lo <= tau_hi {
        (tau_lo, tau_hi)
    } else {
        (tau_hi, tau_lo)
    };
    let at = |tau: f64| classify_blowup(point_on_line(origin, direction, tau), opts.x_max, opts.dx);
    let s_lo = at(lo)?.sign();
    let s_hi = at(hi)?.sign();
    if s_lo == 0 || s_hi == 0 || s_lo == s_hi {
        return Err(Error::BadBracket(format!(
            "endpoint verdicts {s_lo} / {s_hi} at {:?} and {:?}",
            point_on_line(origin, direction, lo),
            point_on_line(origin, direction, hi)
        )));
    }
    for iterations in 0..opts.max_iterations {
        let mid = 0.5 * (lo + hi);
        let done = |mid: f64| LineBisection {
            pair: point_on_line(origin, direction, mid),
            tau_lo: lo,
            tau_hi: hi,
            iterations,
        };
        if hi - lo <= tol || mid <= lo || mid >= hi {
            return Ok(done(mid));
        }
        let s = at(mid)?.sign();
        if s == 0 {
            return Ok(done(mid));
        }
        if s == s_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence {
        iterations: opts.max_iterations,
    })
}

/// Admissible `u_x(0)` for fixed `u(0)` inside `[v_lo, v_hi]`.
pub fn find_admissible_v0(u0: f64, v_lo: f64, v_hi: f64, tol: f64, x_max: f64, dx: f64) -> Result<f64> {
    let opts = ShootingOptions {
        x_max,
        dx,
        ..ShootingOptions::default()
    };
    let origin = InitialPair::new(u0, 0.0)?;
    Ok(bisect_line(origin, (0.0, 1.0), v_lo, v_hi, tol, &opts)?.pair.v0)
}

/// Expands `[center - w, center + w]` geometrically until the endpoint
/// verdicts differ.
fn expand_bracket(
    origin: InitialPair,
    direction: (f64, f64),
    center: f64,
    half_width: f64,
    opts: &ShootingOptions,
) -> Result<Option<(f64, f64)>> {
    let mut w = half_width;
    for _ in 0..=MAX_BRACKET_EXPANSIONS {
        let lo = classify_blowup(point_on_line(origin, direction, center - w), opts.x_max, opts.dx)?;
        let hi = classify_blowup(point_on_line(origin, direction, center + w), opts.x_max, opts.dx)?;
        if lo.is_decided() && hi.is_decided() && lo.sign() != hi.sign() {
            return Ok(Some((center - w, center + w)));
        }
        w *= 2.0;
    }
    Ok(None)
}

/// Follows the admissible curve over a sequence of `u(0)` values by
/// continuation in `u_x(0)`.
///
/// The first sample uses `seed_bracket`; later ones center a bracket of
/// half-width `10 * tol` on a linear predictor from the previous two
/// solutions and widen it until the verdicts differ.
pub fn trace_admissible_curve(
    u0_samples: &[f64],
    seed_bracket: (f64, f64),
    tol: f64,
    opts: &ShootingOptions,
) -> Result<Vec<InitialPair>> {
    let mut out: Vec<InitialPair> = Vec::with_capacity(u0_samples.len());
    let seed_half = 10.0 * tol.max(f64::EPSILON);
    for (i, &u0) in u0_samples.iter().enumerate() {
        let origin = InitialPair::new(u0, 0.0)?;
        let bracket = if i == 0 {
            seed_bracket
        } else {
            let center = match out.len() {
                1 => out[0].v0,
                n => {
                    let (a, b) = (out[n - 2], out[n - 1]);
                    if b.u0 != a.u0 {
                        b.v0 + (u0 - b.u0) * (b.v0 - a.v0) / (b.u0 - a.u0)
                    } else {
                        b.v0
                    }
                }
            };
            expand_bracket(origin, (0.0, 1.0), center, seed_half, opts)?
                .ok_or_else(|| Error::BadBracket(format!("no sign change found near u0 = {u0}")))?
        };
        let res = bisect_line(origin, (0.0, 1.0), bracket.0, bracket.1, tol, opts).map_err(|e| match e {
            Error::BadBracket(msg) => Error::BadBracket(format!("u0 = {u0}: {msg}")),
            other => other,
        })?;
        out.push(res.pair);
    }
    Ok(out)
}

/// Follows the admissible curve by arc length.
///
/// Starting from the admissible `start`, each new point is predicted one
/// `step` along the current secant direction and then corrected by
/// bisection along the normal line through the prediction. This follows the
/// curve through turning points in `u(0)`, where `u(0)`-continuation fails.
pub fn trace_admissible_arc(
    start: InitialPair,
    direction: (f64, f64),
    step: f64,
    count: usize,
    tol: f64,
    opts: &ShootingOptions,
) -> Result<Vec<InitialPair>> {
    let mut out = Vec::with_capacity(count);
    let mut prev = start;
    let mut dir = normalize(direction)?;
    for _ in 0..count {
        let predicted = point_on_line(prev, dir, step);
        let normal = (-dir.1, dir.0);
        let bracket = expand_bracket(predicted, normal, 0.0, 0.25 * step, opts)?
            .filter(|(lo, hi)| hi - lo <= 4.0 * step)
            .ok_or_else(|| Error::BadBracket(format!("lost the admissible curve near {predicted:?}")))?;
        let res = bisect_line(predicted, normal, bracket.0, bracket.1, tol, opts)?;
        dir = normalize((res.pair.u0 - prev.u0, res.pair.v0 - prev.v0))?;
        prev = res.pair;
        out.push(res.pair);
    }
    Ok(out)
}

fn normalize(d: (f64, f64)) -> Result<(f64, f64)> {
    let n = d.0.hypot(d.1);
    if !(n > 0.0 && n.is_finite()) {
        return Err(Error::InvalidConfig("direction must be a nonzero vector".into()));
    }
    Ok((d.0 / n, d.1 / n))
}

/// One raster cell of [`classify_region`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionCell {
    pub pair: InitialPair,
    pub verdict: BlowupVerdict,
    /// Set when the sweep hit a non-finite state; the verdict is then `Undecided`.
    pub non_finite: bool,
}

/// Escape verdicts on a node grid: `counts.0` values of `u(0)` spanning
/// `u0_range` (endpoints included) times `counts.1` values of `u_x(0)`.
/// Cells are stored row-major with `u(0)` varying slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct RegionRaster {
    pub u0_values: Vec<f64>,
    pub v0_values: Vec<f64>,
    pub cells: Vec<RegionCell>,
}

impl RegionRaster {
    pub fn cell(&self, i: usize, j: usize) -> &RegionCell {
        &self.cells[i * self.v0_values.len() + j]
    }
}

fn node_values(range: (f64, f64), count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![range.0];
    }
    let h = (range.1 - range.0) / (count - 1) as f64;
    (0..count)
        .map(|i| {
            // mirror-exact nodes so that symmetric ranges give symmetric grids
            let from_lo = range.0 + i as f64 * h;
            let from_hi = range.1 - (count - 1 - i) as f64 * h;
            if 2 * i < count - 1 {
                from_lo
            } else if 2 * i > count - 1 {
                from_hi
            } else {
                0.5 * (range.0 + range.1)
            }
        })
        .collect()
}

pub fn classify_region(
    u0_range: (f64, f64),
    v0_range: (f64, f64),
    counts: (usize, usize),
    x_max: f64,
    dx: f64,
) -> Result<RegionRaster> {
    if counts.0 == 0 || counts.1 == 0 {
        return Err(Error::InvalidConfig("raster counts must be positive".into()));
    }
    check_step(dx)?;
    let u0_values = node_values(u0_range, counts.0);
    let v0_values = node_values(v0_range, counts.1);
    let pairs: Vec<InitialPair> = u0_values
        .iter()
        .flat_map(|&u0| v0_values.iter().map(move |&v0| InitialPair { u0, v0 }))
        .collect();
    let cells = pairs
        .into_par_iter()
        .map(|pair| match classify_blowup(pair, x_max, dx) {
            Ok(verdict) => Ok(RegionCell {
                pair,
                verdict,
                non_finite: false,
            }),
            Err(Error::NonFinite { .. }) => Ok(RegionCell {
                pair,
                verdict: BlowupVerdict::Undecided,
                non_finite: true,
            }),
            Err(e) => Err(e),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RegionRaster {
        u0_values,
        v0_values,
        cells,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_pair_is_exact_zero_solution() {
        let p = integrate_profile_sampled(InitialPair { u0: 0.0, v0: 0.0 }, -80.0, 20.0, 1e-5, 1000).unwrap();
        assert!(p.u.iter().all(|&u| u == 0.0));
        assert!(p.gamma.iter().all(|&g| g == 0.0));
        assert_eq!(p.forward_verdict, BlowupVerdict::Undecided);
        assert_eq!(p.x.len(), 10001);
        assert_eq!(p.x[p.origin_index], 0.0);
    }

    #[test]
    fn verdicts_straddle_the_admissible_value() {
        let plus = classify_blowup(InitialPair { u0: 0.024, v0: -0.017 }, 20.0, 1e-4).unwrap();
        let minus = classify_blowup(InitialPair { u0: 0.024, v0: -0.018 }, 20.0, 1e-4).unwrap();
        assert_eq!(plus.sign(), 1);
        assert_eq!(minus.sign(), -1);
        assert!(plus.x_escape().unwrap() < 20.0);
        let zero = classify_blowup(InitialPair { u0: 0.0, v0: 0.0 }, 20.0, 1e-4).unwrap();
        assert_eq!(zero, BlowupVerdict::Undecided);
        assert_eq!(zero.x_escape(), None);
    }

    #[test]
    fn bad_bracket_is_reported() {
        let err = find_admissible_v0(0.024, -0.019, -0.018, 1e-10, 20.0, 1e-4).unwrap_err();
        assert!(matches!(err, Error::BadBracket(_)));
        let err = find_admissible_v0(0.0, 0.0, 1.0, 1e-10, 20.0, 1e-4).unwrap_err();
        assert!(matches!(err, Error::BadBracket(_)));
    }

    #[test]
    fn zero_is_admissible_for_zero_u0() {
        let v = find_admissible_v0(0.0, -1.0, 1.0, 1e-12, 20.0, 1e-4).unwrap();
        assert_eq!(v, 0.0);
    }

    #[test]
    fn non_finite_state_is_detected() {
        // a step this large overflows the backward sweep without escape checks
        let err = integrate_profile_sampled(InitialPair { u0: 1.0, v0: 0.0 }, -200.0, 0.0, 2.0, 1).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn raster_node_grid_is_mirror_symmetric() {
        let v = node_values((-1.0, 1.0), 10);
        for i in 0..10 {
            assert_eq!(v[i], -v[9 - i]);
        }
        assert_eq!(node_values((-1.0, 1.0), 5)[2], 0.0);
    }

    #[test]
    fn invalid_inputs_rejected() {
        assert!(InitialPair::new(f64::NAN, 0.0).is_err());
        assert!(integrate_profile(InitialPair { u0: 0.1, v0: 0.0 }, 1.0, 2.0, 1e-3).is_err());
        assert!(classify_blowup(InitialPair { u0: 0.1, v0: 0.0 }, 1.0, 0.0).is_err());
    }
}
