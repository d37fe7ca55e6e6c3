//! CSV and JSON artifacts. Floats are written as `{:.16e}`, which round-trips
//! every `f64` exactly.

use std::fs::File;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::curve::{ClosureLogRow, CurveSamples, TrackedPoint};
use crate::diagnostics::{DiagnosticsRecord, IntegralScanRow};
use crate::error::{Error, Result};
use crate::profile::AngleProfile;
use crate::shooting::{InitialPair, ProfileSolution, RegionRaster};

pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

/// Writes a header and rows of already formatted fields.
pub fn write_rows<I>(path: &Path, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `x,u,v,gamma`.
pub fn write_profile_solution(path: &Path, sol: &ProfileSolution) -> Result<()> {
    write_rows(
        path,
        &["x", "u", "v", "gamma"],
        (0..sol.len()).map(|i| {
            vec![
                fmt_f64(sol.x[i]),
                fmt_f64(sol.u[i]),
                fmt_f64(sol.v[i]),
                fmt_f64(sol.gamma[i]),
            ]
        }),
    )
}

/// `u0,v0`.
pub fn write_pairs(path: &Path, pairs: &[InitialPair]) -> Result<()> {
    write_rows(
        path,
        &["u0", "v0"],
        pairs.iter().map(|p| vec![fmt_f64(p.u0), fmt_f64(p.v0)]),
    )
}

/// Reads the first two columns of a `u0,v0[,...]` file.
pub fn read_pairs(path: &Path) -> Result<Vec<InitialPair>> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    if headers.get(0) != Some("u0") || headers.get(1) != Some("v0") {
        return Err(Error::Format(format!("{}: expected columns u0,v0", path.display())));
    }
    let mut out = Vec::new();
    for (line, rec) in r.records().enumerate() {
        let rec = rec?;
        let field = |i: usize| -> Result<f64> {
            rec.get(i)
                .and_then(|v| v.trim().parse().ok())
                .ok_or_else(|| Error::Format(format!("{}: bad number in row {}", path.display(), line + 1)))
        };
        out.push(InitialPair::new(field(0)?, field(1)?)?);
    }
    Ok(out)
}

/// `u0,v0,verdict` with the verdict as its sign (`1`, `-1`, `0` undecided).
pub fn write_raster(path: &Path, raster: &RegionRaster) -> Result<()> {
    write_rows(
        path,
        &["u0", "v0", "verdict"],
        raster
            .cells
            .iter()
            .map(|c| vec![fmt_f64(c.pair.u0), fmt_f64(c.pair.v0), c.verdict.sign().to_string()]),
    )
}

/// `s,re_z,im_z`.
pub fn write_curve(path: &Path, curve: &CurveSamples) -> Result<()> {
    write_rows(
        path,
        &["s", "re_z", "im_z"],
        curve
            .z
            .iter()
            .enumerate()
            .map(|(j, z)| vec![fmt_f64(curve.s(j)), fmt_f64(z.re), fmt_f64(z.im)]),
    )
}

pub fn write_closure_log(path: &Path, log: &[ClosureLogRow]) -> Result<()> {
    write_rows(
        path,
        &["alpha", "beta", "re_end", "im_end"],
        log.iter()
            .map(|r| vec![fmt_f64(r.alpha), fmt_f64(r.beta), fmt_f64(r.re_end), fmt_f64(r.im_end)]),
    )
}

/// `u0,v0,integral`; the integral is empty for failed rows.
pub fn write_scan(path: &Path, rows: &[IntegralScanRow]) -> Result<()> {
    write_rows(
        path,
        &["u0", "v0", "integral"],
        rows.iter()
            .map(|r| vec![fmt_f64(r.pair.u0), fmt_f64(r.pair.v0), fmt_opt(r.integral)]),
    )
}

pub fn write_diagnostics(path: &Path, records: &[DiagnosticsRecord]) -> Result<()> {
    write_rows(
        path,
        &[
            "t",
            "energy",
            "k0",
            "k0_exact",
            "closure_error",
            "area",
            "support_width",
        ],
        records.iter().map(|r| {
            vec![
                fmt_f64(r.t),
                fmt_f64(r.energy),
                fmt_f64(r.k0),
                fmt_f64(r.k0_exact),
                fmt_opt(r.closure_error),
                fmt_opt(r.area),
                fmt_f64(r.support_width),
            ]
        }),
    )
}

/// `t,theta,re_z,im_z`.
pub fn write_track(path: &Path, track: &[TrackedPoint]) -> Result<()> {
    write_rows(
        path,
        &["t", "theta", "re_z", "im_z"],
        track
            .iter()
            .map(|p| vec![fmt_f64(p.t), fmt_f64(p.theta), fmt_f64(p.z.re), fmt_f64(p.z.im)]),
    )
}

/// JSON side of a stored [`AngleProfile`]; the samples live in `data`
/// (`s,theta`), relative to the header's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileHeader {
    pub s_a: f64,
    pub s_b: f64,
    pub n: usize,
    pub theta_minus: f64,
    pub theta_plus: f64,
    pub delta_s: f64,
    pub t: f64,
    /// Admissible pair the profile was built from.
    pub pair: Option<InitialPair>,
    /// Set for profiles carrying the closure loop.
    #[serde(default)]
    pub closed: bool,
    pub data: String,
    /// Free-form record of how the profile was produced.
    #[serde(default)]
    pub provenance: serde_json::Value,
}

/// A profile together with what is known about its origin.
#[derive(Debug, Clone, PartialEq)]
pub struct StoredProfile {
    pub profile: AngleProfile,
    pub pair: Option<InitialPair>,
    pub closed: bool,
    pub provenance: serde_json::Value,
}

/// Writes `<stem>.json` and `<stem>.csv` into `dir`; returns the JSON path.
pub fn write_profile(dir: &Path, stem: &str, stored: &StoredProfile) -> Result<PathBuf> {
    let p = &stored.profile;
    let data = format!("{stem}.csv");
    write_rows(
        &dir.join(&data),
        &["s", "theta"],
        p.theta
            .iter()
            .enumerate()
            .map(|(j, th)| vec![fmt_f64(p.s(j)), fmt_f64(*th)]),
    )?;
    let header = ProfileHeader {
        s_a: p.s_a,
        s_b: p.s_b,
        n: p.n,
        theta_minus: p.theta_minus,
        theta_plus: p.theta_plus,
        delta_s: p.delta_s,
        t: p.t,
        pair: stored.pair,
        closed: stored.closed,
        data,
        provenance: stored.provenance.clone(),
    };
    let path = dir.join(format!("{stem}.json"));
    write_json(&path, &header)?;
    Ok(path)
}

pub fn read_profile(header_path: &Path) -> Result<StoredProfile> {
    let header: ProfileHeader = serde_json::from_reader(BufReader::new(File::open(header_path)?))?;
    let dir = header_path.parent().unwrap_or(Path::new("."));
    let data = dir.join(&header.data);
    let mut r = csv::Reader::from_path(&data)?;
    let mut theta = Vec::with_capacity(header.n + 1);
    for rec in r.records() {
        let rec = rec?;
        let v: f64 = rec
            .get(1)
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| Error::Format(format!("{}: bad theta in row {}", data.display(), theta.len() + 1)))?;
        theta.push(v);
    }
    let profile = AngleProfile {
        s_a: header.s_a,
        s_b: header.s_b,
        n: header.n,
        theta,
        theta_minus: header.theta_minus,
        theta_plus: header.theta_plus,
        delta_s: header.delta_s,
        t: header.t,
    };
    profile.validate()?;
    Ok(StoredProfile {
        profile,
        pair: header.pair,
        closed: header.closed,
        provenance: header.provenance,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut f = File::create(path)?;
    serde_json::to_writer_pretty(&mut f, value)?;
    writeln!(f)?;
    Ok(())
}
