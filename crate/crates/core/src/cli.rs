//! Command implementations behind the `qiup` binary.
//!
//! Exit codes: 0 success, 2 unreadable input, 3 invalid scenario or
//! arguments, 4 write failure. Human-readable diagnostics go to standard
//! error; artifacts go to files and machine-readable results to standard out.

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::time::Instant;

use crate::camera::{combine_frames, CombineMode, ImageFrame};
use crate::error::{Error, Result};
use crate::fit::{self, VisibilityFit};
use crate::grid::Grid;
use crate::optics::{self, IndexTable};
use crate::pgm;
use crate::pipeline::{self, EmissionCheck, Experiment, ObjectDoc, Roi, Scenario};
use crate::qcore;
use crate::scenarios::{build_scenario, Preset};

pub const EXIT_INPUT: i32 = 2;
pub const EXIT_SCENARIO: i32 = 3;
pub const EXIT_WRITE: i32 = 4;

/// Maps an error onto the documented exit codes.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Read { .. } | Error::Json { .. } | Error::Pgm(_) => EXIT_INPUT,
        Error::Write { .. } => EXIT_WRITE,
        _ => EXIT_SCENARIO,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Preset(String),
    File(PathBuf),
}

/// Scenario selection plus the command-line overrides shared by all commands.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioArgs {
    pub source: ScenarioSource,
    pub object: Option<PathBuf>,
    pub seed: u64,
    pub noiseless: bool,
    pub setup_visibility: Option<f64>,
    pub blocked: bool,
    pub pump_phase_rad: Option<f64>,
    pub pump_power_mw: Option<f64>,
    pub path_mismatch_mm: Option<f64>,
    pub idler_efficiency: Option<f64>,
    pub peak_photons: Option<f64>,
    /// Worker threads; 0 lets the pool decide.
    pub threads: usize,
}

impl ScenarioArgs {
    pub fn preset(name: &str) -> Self {
        Self {
            source: ScenarioSource::Preset(name.to_string()),
            object: None,
            seed: 0,
            noiseless: false,
            setup_visibility: None,
            blocked: false,
            pump_phase_rad: None,
            pump_power_mw: None,
            path_mismatch_mm: None,
            idler_efficiency: None,
            peak_photons: None,
            threads: 0,
        }
    }

    pub fn load(&self) -> Result<Scenario> {
        let mut s = match &self.source {
            ScenarioSource::Preset(name) => build_scenario(name.parse::<Preset>()?),
            ScenarioSource::File(path) => Scenario::from_json_file(path)?,
        };
        if let Some(path) = &self.object {
            s.object = Some(ObjectDoc::from_json_file(path)?);
        }
        s.camera.rng_seed = self.seed;
        s.camera.noiseless |= self.noiseless;
        s.idler_blocked |= self.blocked;
        if let Some(v) = self.setup_visibility {
            s.setup_visibility = v;
        }
        if let Some(v) = self.pump_phase_rad {
            s.pump_phase_rad = v;
        }
        if let Some(v) = self.pump_power_mw {
            s.pump_power_mw = v;
        }
        if let Some(v) = self.path_mismatch_mm {
            s.path_mismatch_mm = v;
        }
        if let Some(v) = self.idler_efficiency {
            s.idler_detector_efficiency = v;
        }
        if let Some(v) = self.peak_photons {
            s.peak_photons_per_pixel = v;
        }
        s.validate()?;
        Ok(s)
    }
}

/// Parses an angle: plain numbers are radians, `deg`/`°` marks degrees and a
/// `pi` suffix multiplies by π (`2pi`, `0.5pi`, `pi`).
pub fn parse_angle(text: &str) -> Result<f64> {
    let t = text.trim().to_ascii_lowercase();
    let bad = || Error::range(format!("cannot parse angle '{text}'"));
    let number = |s: &str| -> Result<f64> {
        let s = s.trim();
        if s.is_empty() {
            return Ok(1.0);
        }
        s.parse::<f64>().map_err(|_| bad())
    };
    let value = if let Some(v) = t.strip_suffix("deg").or_else(|| t.strip_suffix('°')) {
        v.trim().parse::<f64>().map_err(|_| bad())?.to_radians()
    } else if let Some(v) = t.strip_suffix("pi").or_else(|| t.strip_suffix('π')) {
        number(v.trim_end_matches('*'))? * PI
    } else {
        t.parse::<f64>().map_err(|_| bad())?
    };
    if !value.is_finite() {
        return Err(bad());
    }
    Ok(value)
}

/// Runs `f` on a pool with `threads` workers (0 = default sizing).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::range(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub command: String,
    pub scenario: Scenario,
    pub files: Vec<PathBuf>,
    pub summary: serde_json::Value,
    pub seed: u64,
    pub wall_time_s: f64,
}

fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    std::fs::write(path, bytes).map_err(|source| Error::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn prepare_out_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Write {
        path: dir.to_path_buf(),
        source,
    })
}

fn finish(command: &str, scenario: Scenario, out: &Path, mut files: Vec<PathBuf>, summary: serde_json::Value, start: Instant) -> Result<RunReport> {
    let report_path = out.join("report.json");
    files.push(report_path.clone());
    let report = RunReport {
        command: command.to_string(),
        seed: scenario.camera.rng_seed,
        scenario,
        files,
        summary,
        wall_time_s: start.elapsed().as_secs_f64(),
    };
    let text = serde_json::to_string_pretty(&report).expect("report serializes");
    write_bytes(&report_path, text.as_bytes())?;
    Ok(report)
}

fn frame_comment(frame: &ImageFrame) -> String {
    frame.pgm_comment()
}

/// `run`: G, H, SUM and DIFF frames plus a report.
pub fn cmd_run(args: &ScenarioArgs, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let scenario = args.load()?;
    let (g, h, sum, diff, v_eff) = with_threads(args.threads, || -> Result<_> {
        let exp = Experiment::new(&scenario)?;
        let (g, h) = exp.frames(scenario.pump_phase_rad, 0)?;
        let sum = combine_frames(&g, &h, CombineMode::Sum)?;
        let diff = combine_frames(&g, &h, CombineMode::Diff)?;
        Ok((g, h, sum, diff, exp.effective_visibility()))
    })??;

    prepare_out_dir(out)?;
    let base = format!(
        "qiup scenario={} seed={}",
        scenario.name, scenario.camera.rng_seed
    );
    let outputs: [(&str, Grid<u16>, Vec<String>); 4] = [
        ("G.pgm", pgm::clamp_counts(&g.counts), vec![frame_comment(&g)]),
        ("H.pgm", pgm::clamp_counts(&h.counts), vec![frame_comment(&h)]),
        (
            "SUM.pgm",
            sum.map(|&v| v.clamp(0, i64::from(pgm::MAXVAL_16)) as u16),
            vec![format!("{base} output=SUM")],
        ),
        (
            "DIFF.pgm",
            pgm::offset_signed(&diff),
            vec![format!("{base} output=DIFF offset={}", pgm::SIGNED_OFFSET)],
        ),
    ];
    let mut files = Vec::new();
    for (name, pixels, comments) in &outputs {
        let path = out.join(name);
        pgm::write(&path, pixels, comments)?;
        files.push(path);
    }
    let summary = serde_json::json!({
        "total_g": g.total(),
        "total_h": h.total(),
        "total_sum": sum.iter().sum::<i64>(),
        "total_diff": diff.iter().sum::<i64>(),
        "effective_visibility": v_eff,
    });
    finish("run", scenario, out, files, summary, start)
}

/// `scan`: pump-phase scan at output G, `fringe.csv` and `fit.json`.
pub fn cmd_scan(args: &ScenarioArgs, steps: usize, cycles: f64, roi: Option<Roi>, out: &Path) -> Result<(RunReport, VisibilityFit)> {
    let start = Instant::now();
    let scenario = args.load()?;
    let roi = roi.unwrap_or_else(|| Roi::default_for(&scenario));
    let (data, fit) = with_threads(args.threads, || -> Result<_> {
        let exp = Experiment::new(&scenario)?;
        let data = pipeline::phase_scan(&exp, steps, cycles, &roi)?;
        let fit = fit::fit_fringe(&data)?;
        Ok((data, fit))
    })??;

    prepare_out_dir(out)?;
    let csv = out.join("fringe.csv");
    write_bytes(&csv, data.to_csv().as_bytes())?;
    let fit_path = out.join("fit.json");
    write_bytes(&fit_path, serde_json::to_string_pretty(&fit).expect("fit serializes").as_bytes())?;
    let summary = serde_json::json!({
        "steps": steps,
        "cycles": cycles,
        "roi": roi,
        "visibility": fit.visibility,
        "visibility_se": fit.visibility_se,
        "phase": fit.phase,
    });
    let report = finish("scan", scenario, out, vec![csv, fit_path], summary, start)?;
    Ok((report, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoincidenceClass {
    pub pixels: usize,
    pub expected: f64,
    pub shots: u64,
    pub observed: f64,
    pub sigma: f64,
}

/// `ifm`: coincidence map `P(H ∧ idler click)`, stored as a greymap scaled by
/// 65535, with optional Monte Carlo verification on opaque and open pixels.
pub fn cmd_ifm(args: &ScenarioArgs, shots: u64, out: &Path) -> Result<RunReport> {
    let start = Instant::now();
    let scenario = args.load()?;
    let (map, opaque, open) = with_threads(args.threads, || -> Result<_> {
        let exp = Experiment::new(&scenario)?;
        let map = pipeline::interaction_free_map(&exp)?;
        let eta = scenario.idler_detector_efficiency;
        let classify = |pred: &dyn Fn(f64) -> bool, t: f64, seed_index: u64| -> Result<Option<CoincidenceClass>> {
            let pixels = exp.transmittance().iter().filter(|&&v| pred(v)).count();
            if pixels == 0 {
                return Ok(None);
            }
            let obj = qcore::ObjectResponse::new(t, 0.0)?;
            let table = qcore::coincidence_table(&qcore::build_joint_state(obj, 0.0), eta)?;
            let p = table.h_click;
            let (observed, sigma) = if shots > 0 {
                let counts = pipeline::sample_coincidences(&table, shots, scenario.camera.rng_seed, seed_index);
                (counts[2] as f64 / shots as f64, (p * (1.0 - p) / shots as f64).sqrt())
            } else {
                (f64::NAN, f64::NAN)
            };
            Ok(Some(CoincidenceClass {
                pixels,
                expected: p,
                shots,
                observed,
                sigma,
            }))
        };
        let opaque = classify(&|t| t == 0.0, 0.0, 0)?;
        let open = classify(&|t| t == 1.0, 1.0, 1)?;
        Ok((map, opaque, open))
    })??;

    prepare_out_dir(out)?;
    let path = out.join("ifm.pgm");
    let levels = map.map(|&p| (p * f64::from(pgm::MAXVAL_16)).round() as u16);
    pgm::write(
        &path,
        &levels,
        &[format!(
            "qiup scenario={} coincidence probability scale=1/65535",
            scenario.name
        )],
    )?;
    let summary = serde_json::json!({
        "max_probability": map.iter().cloned().fold(0.0, f64::max),
        "opaque": opaque,
        "open": open,
    });
    finish("ifm", scenario, out, vec![path], summary, start)
}

/// `emission-check`: blocked/unblocked NL2 rates against pump power.
pub fn cmd_emission_check(args: &ScenarioArgs, powers: &[f64], repetitions: u32, out: &Path) -> Result<(RunReport, EmissionCheck)> {
    let start = Instant::now();
    let scenario = args.load()?;
    let check = with_threads(args.threads, || pipeline::induced_emission_check(&scenario, powers, repetitions))??;
    prepare_out_dir(out)?;
    let csv = out.join("emission.csv");
    write_bytes(&csv, check.to_csv().as_bytes())?;
    let summary = serde_json::json!({
        "repetitions": repetitions,
        "fit": check.fit,
    });
    let report = finish("emission-check", scenario, out, vec![csv], summary, start)?;
    Ok((report, check))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtchDesign {
    pub wavelength_nm: f64,
    pub refractive_index: f64,
    pub target_phase_rad: f64,
    pub depth_nm: f64,
    /// Phase of the designed depth, wrapped to `[0, 2π)`.
    pub check_phase_rad: f64,
}

/// Loads a built-in table by name, or a `[[λ, n], …]` JSON file.
pub fn load_material(material: &str) -> Result<IndexTable> {
    match IndexTable::builtin(material) {
        Ok(t) => Ok(t),
        Err(unknown) => {
            let path = Path::new(material);
            if !path.exists() {
                return Err(unknown);
            }
            let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
                path: path.to_path_buf(),
                source,
            })?;
            let points: Vec<(f64, f64)> = serde_json::from_str(&text).map_err(|source| Error::Json {
                path: path.to_path_buf(),
                source,
            })?;
            IndexTable::new(points)
        }
    }
}

/// `design-etch`: depth giving `target_phase` at `wavelength_nm`.
pub fn cmd_design_etch(material: &str, target_phase: f64, wavelength_nm: f64) -> Result<EtchDesign> {
    if !(target_phase >= 0.0) {
        return Err(Error::range("target phase must be non-negative"));
    }
    let table = load_material(material)?;
    let n = table.index_at(wavelength_nm)?;
    let depth = optics::etch_depth_for_phase(target_phase, n, wavelength_nm);
    Ok(EtchDesign {
        wavelength_nm,
        refractive_index: n,
        target_phase_rad: target_phase,
        depth_nm: depth,
        check_phase_rad: optics::etch_phase(depth, n, wavelength_nm),
    })
}

/// `validate`: full check including object rasters; returns the expanded
/// scenario as JSON.
pub fn cmd_validate(args: &ScenarioArgs) -> Result<String> {
    let scenario = args.load()?;
    Experiment::new(&scenario)?;
    Ok(scenario.to_json())
}
