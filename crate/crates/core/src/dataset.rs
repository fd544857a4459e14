//! Dataset emission and ingestion: CSV tables with embedded manifests, the
//! JSON run manifest itself, and fit reports.
//!
//! Every data file starts with a `#`-prefixed header that carries the column
//! units, the run id, and the full manifest as one JSON line, so a file never
//! detaches from the parameters that produced it. Floats are printed with the
//! shortest round-trip representation; `parse(emit(x)) == x` exactly.

use crate::ensemble::EnsembleResult;
use crate::error::{Error, Result};
use crate::field::TrapPlacement;
use crate::sde::Trajectory;
use crate::units::Scales;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

/// SI snapshot of the physical parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub mass_kg: f64,
    pub wavelength_m: f64,
    pub half_linewidth_rad_per_s: f64,
    pub detuning_rad_per_s: f64,
    pub beam_waist_m: f64,
    pub delay_s: f64,
    pub saturation: f64,
    pub pump_wavenumber_rad_per_m: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRecord {
    pub mode_count: usize,
    pub spacing_rad_per_s: f64,
    pub placement: TrapPlacement,
    pub pump_phase_rad: f64,
    pub mirror_distance_m: f64,
    pub actual_delay_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrapRecord {
    pub enabled: bool,
    pub spring_n_per_m: f64,
    pub frequency_rad_per_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    /// Time step in units of 1/Gamma.
    pub dt: f64,
    /// Duration in units of 1/Gamma.
    pub duration: f64,
    pub record_stride: usize,
    pub trajectory_count: usize,
    pub noise: bool,
    pub antithetic: bool,
    pub sub_ensembles: usize,
    pub initial_temperature_k: f64,
}

/// Quantities computed from the inputs, recorded for traceability.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct DerivedRecord {
    pub coupling_g2_rad_per_s: f64,
    pub light_shift_over_gamma: f64,
    pub scattering_rate_over_gamma: f64,
    pub pump_photon_number: f64,
    pub mass_normalized: f64,
    pub max_friction_per_s: f64,
    pub diffusion_si: f64,
    pub analytic_temperature_k: Option<f64>,
}

/// Everything needed to reproduce a run. Written before any long computation
/// starts; every dataset embeds a copy.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub code_version: String,
    /// Creation timestamp; excluded from the run id so reruns match.
    pub created: String,
    pub master_seed: u64,
    pub params: ParamsRecord,
    pub grid: GridRecord,
    pub trap: TrapRecord,
    pub run: RunRecord,
    pub derived: DerivedRecord,
    pub outputs: Vec<String>,
}

fn fnv64(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

impl RunManifest {
    /// Stable identifier of the run: everything except timestamps and output
    /// paths. Reruns with the same seed and configuration share it.
    pub fn run_id(&self) -> String {
        let key = serde_json::json!({
            "seed": self.master_seed,
            "params": self.params,
            "grid": self.grid,
            "trap": self.trap,
            "run": self.run,
        });
        format!("{:016x}", fnv64(key.to_string().as_bytes()))
    }

    /// Identifier of the physics configuration, ignoring seed, ensemble size
    /// and initial temperature; runs may only be analyzed together when it
    /// matches.
    pub fn compat_key(&self) -> String {
        let key = serde_json::json!({
            "params": self.params,
            "grid": self.grid,
            "trap": self.trap,
            "dt": self.run.dt,
            "duration": self.run.duration,
            "stride": self.run.record_stride,
            "noise": self.run.noise,
        });
        format!("{:016x}", fnv64(key.to_string().as_bytes()))
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        let json = serde_json::to_string_pretty(self)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path)?;
        serde_json::from_str(&text)
            .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
    }
}

/// A parsed dataset: embedded manifest plus named numeric columns.
#[derive(Debug, Clone)]
pub struct Table {
    pub manifest: Option<RunManifest>,
    pub run_id: Option<String>,
    pub columns: Vec<String>,
    /// Row-major values, `rows x columns`.
    pub rows: Vec<Vec<f64>>,
}

impl Table {
    pub fn column(&self, name: &str) -> Result<Vec<f64>> {
        let idx = self
            .columns
            .iter()
            .position(|c| c == name)
            .ok_or_else(|| Error::Parse(format!("dataset has no column `{name}`")))?;
        Ok(self.rows.iter().map(|r| r[idx]).collect())
    }
}

/// Writes a CSV with `#` header lines, an optional embedded manifest, and
/// shortest-round-trip floats.
pub fn write_table(
    path: &Path,
    description: &[&str],
    manifest: Option<&RunManifest>,
    columns: &[&str],
    rows: impl Iterator<Item = Vec<f64>>,
) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::new();
    for line in description {
        writeln!(out, "# {line}").unwrap();
    }
    if let Some(m) = manifest {
        writeln!(out, "# run_id = {}", m.run_id()).unwrap();
        let json = serde_json::to_string(m)
            .map_err(|e| Error::Parse(format!("manifest serialization: {e}")))?;
        writeln!(out, "# manifest = {json}").unwrap();
    }
    writeln!(out, "{}", columns.join(",")).unwrap();
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").unwrap();
            first = false;
        }
        out.push('\n');
    }
    fs::write(path, out)?;
    Ok(())
}

/// Parses a CSV written by [`write_table`].
pub fn read_table(path: &Path) -> Result<Table> {
    let text = fs::read_to_string(path)?;
    let mut manifest = None;
    let mut run_id = None;
    let mut columns: Vec<String> = Vec::new();
    let mut rows = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim_end();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix('#') {
            let rest = rest.trim();
            if let Some(json) = rest.strip_prefix("manifest = ") {
                manifest = Some(
                    serde_json::from_str(json)
                        .map_err(|e| Error::Parse(format!("{}: embedded manifest: {e}", path.display())))?,
                );
            } else if let Some(id) = rest.strip_prefix("run_id = ") {
                run_id = Some(id.to_string());
            }
            continue;
        }
        if columns.is_empty() {
            columns = line.split(',').map(|s| s.trim().to_string()).collect();
            continue;
        }
        let row: std::result::Result<Vec<f64>, _> =
            line.split(',').map(|s| s.trim().parse::<f64>()).collect();
        rows.push(row.map_err(|e| {
            Error::Parse(format!("{}:{}: {e}", path.display(), lineno + 1))
        })?);
    }
    if columns.is_empty() {
        return Err(Error::Parse(format!("{}: no header row", path.display())));
    }
    for (i, r) in rows.iter().enumerate() {
        if r.len() != columns.len() {
            return Err(Error::Parse(format!(
                "{}: row {i} has {} fields, expected {}",
                path.display(),
                r.len(),
                columns.len()
            )));
        }
    }
    Ok(Table {
        manifest,
        run_id,
        columns,
        rows,
    })
}

/// Reads only the run id from a dataset header, for resume checks.
pub fn peek_run_id(path: &Path) -> Option<String> {
    let text = fs::read_to_string(path).ok()?;
    for line in text.lines().take(32) {
        if let Some(id) = line.trim().strip_prefix("# run_id = ") {
            return Some(id.to_string());
        }
    }
    None
}

/// Writes a single-trajectory dataset in SI units with the pinned column set
/// `t, x, p, p2, photon_number`.
pub fn write_trajectory_csv(
    path: &Path,
    manifest: &RunManifest,
    traj: &Trajectory<f64>,
    scales: Scales<f64>,
    mirror_distance_m: f64,
) -> Result<()> {
    let rows = (0..traj.times.len()).map(|i| {
        let p = scales.momentum_to_si(traj.momenta[i]);
        vec![
            scales.time_to_si(traj.times[i]),
            mirror_distance_m + scales.length_to_si(traj.positions[i]),
            p,
            scales.momentum_to_si(scales.momentum_to_si(traj.momenta_sq[i])),
            traj.photon_numbers[i],
        ]
    });
    write_table(
        path,
        &[
            "single-trajectory dataset",
            "columns: t [s], x [m], p [kg m/s], p2 [(kg m/s)^2], photon_number [1]",
        ],
        Some(manifest),
        &["t", "x", "p", "p2", "photon_number"],
        rows,
    )
}

/// Writes an ensemble dataset: time, <p^2>, its error, temperature, its
/// error, plus one column per sub-ensemble mean of p^2 (all SI).
pub fn write_ensemble_csv(
    path: &Path,
    manifest: &RunManifest,
    ens: &EnsembleResult<f64>,
    scales: Scales<f64>,
    mass_norm: f64,
) -> Result<()> {
    let p2_si = |v: f64| scales.momentum_to_si(scales.momentum_to_si(v));
    let temp_si = |p2: f64| scales.temperature_to_si(p2 / mass_norm);
    let n_sub = ens.sub_mean_p2.len();
    let mut columns: Vec<String> = vec![
        "t".into(),
        "p2_mean".into(),
        "p2_err".into(),
        "temperature".into(),
        "temperature_err".into(),
    ];
    for s in 0..n_sub {
        columns.push(format!("p2_sub{s}"));
    }
    let col_refs: Vec<&str> = columns.iter().map(|s| s.as_str()).collect();
    let rows = (0..ens.times.len()).map(|i| {
        let mut row = vec![
            scales.time_to_si(ens.times[i]),
            p2_si(ens.mean_p2[i]),
            p2_si(ens.stderr_p2[i]),
            temp_si(ens.mean_p2[i]),
            temp_si(ens.stderr_p2[i]),
        ];
        for sub in &ens.sub_mean_p2 {
            row.push(p2_si(sub[i]));
        }
        row
    });
    write_table(
        path,
        &[
            "ensemble dataset",
            "columns: t [s], p2 [(kg m/s)^2], temperature [K], per-sub-ensemble p2 [(kg m/s)^2]",
            &format!(
                "trajectories = {}, aborted = {}",
                ens.trajectory_count, ens.aborted
            ),
        ],
        Some(manifest),
        &col_refs,
        rows,
    )
}

/// Reconstructs an `EnsembleResult` (normalized units) from a dataset written
/// by [`write_ensemble_csv`].
pub fn read_ensemble_csv(path: &Path) -> Result<(RunManifest, EnsembleResult<f64>)> {
    let table = read_table(path)?;
    let manifest = table
        .manifest
        .clone()
        .ok_or_else(|| Error::Parse(format!("{}: missing embedded manifest", path.display())))?;
    let scales = Scales::new(
        manifest.params.half_linewidth_rad_per_s,
        manifest.params.pump_wavenumber_rad_per_m,
    );
    let p2_norm = |v: f64| scales.momentum_to_norm(scales.momentum_to_norm(v));
    let times: Vec<f64> = table
        .column("t")?
        .into_iter()
        .map(|t| scales.time_to_norm(t))
        .collect();
    let mean_p2: Vec<f64> = table.column("p2_mean")?.into_iter().map(p2_norm).collect();
    let stderr_p2: Vec<f64> = table.column("p2_err")?.into_iter().map(p2_norm).collect();
    let mut sub_mean_p2 = Vec::new();
    let mut s = 0;
    while let Ok(col) = table.column(&format!("p2_sub{s}")) {
        sub_mean_p2.push(col.into_iter().map(p2_norm).collect());
        s += 1;
    }
    let mass_norm = manifest.derived.mass_normalized;
    let measured_initial_temperature = if mass_norm > 0.0 {
        mean_p2[0] / mass_norm
    } else {
        0.0
    };
    Ok((
        manifest.clone(),
        EnsembleResult {
            times,
            mean_p2,
            stderr_p2,
            sub_mean_p2,
            measured_initial_temperature,
            trajectory_count: manifest.run.trajectory_count,
            aborted: 0,
        },
    ))
}

/// One row of the fit report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RateRow {
    /// Initial temperature, K.
    pub t0: f64,
    /// Cooling rate dT/dt, K/s.
    pub dtdt: f64,
    pub dtdt_err: f64,
    pub method: String,
    pub n_traj: usize,
}

/// Fit-report CSV with the pinned columns `T0, dTdt, dTdt_err, method, n_traj`.
pub fn write_rate_report_csv(path: &Path, rows: &[RateRow]) -> Result<()> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent)?;
    }
    let mut out = String::from("# cooling-rate fit report\nT0,dTdt,dTdt_err,method,n_traj\n");
    for r in rows {
        writeln!(out, "{},{},{},{},{}", r.t0, r.dtdt, r.dtdt_err, r.method, r.n_traj).unwrap();
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_rate_report_csv(path: &Path) -> Result<Vec<RateRow>> {
    let text = fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for line in text.lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("T0") {
            continue;
        }
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 5 {
            return Err(Error::Parse(format!("bad fit-report row: {line}")));
        }
        let parse = |s: &str| -> Result<f64> {
            s.parse().map_err(|e| Error::Parse(format!("{line}: {e}")))
        };
        rows.push(RateRow {
            t0: parse(f[0])?,
            dtdt: parse(f[1])?,
            dtdt_err: parse(f[2])?,
            method: f[3].to_string(),
            n_traj: f[4]
                .parse()
                .map_err(|e| Error::Parse(format!("{line}: {e}")))?,
        });
    }
    Ok(rows)
}
