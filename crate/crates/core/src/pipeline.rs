//! End-to-end experiment runner.
//!
//! A [`Scenario`] is the serialisable description of one configuration of the
//! interferometer. [`Experiment::new`] resolves it once (loads and rasterizes
//! the object, remaps it onto the camera, builds the illumination envelope)
//! and the resulting per-pixel maps are then reused for frames, phase scans,
//! coincidence maps and the emission check.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use crate::camera::{self, CameraConfig, ImageFrame, OutputPort};
use crate::error::{Error, Result};
use crate::fit::{self, FringeData, FringePoint, LineFit};
use crate::grid::Grid;
use crate::optics::{
    self, CoherenceModel, ImagingGeometry, IndexTable, ObjectMap, PhaseObjectSpec, Placement,
    WavelengthTriple, DEFAULT_ENERGY_TOLERANCE,
};
use crate::pgm;
use crate::qcore::{self, ObjectResponse, ProbPair};
use crate::rng::StreamKey;
use crate::scenarios::BuiltinRaster;

/// Pump power the default photon rate refers to.
pub const REFERENCE_PUMP_POWER_MW: f64 = 150.0;

// Random-stream namespaces. Frames use small ids; the rest live far above.
const SCAN_STREAM_BASE: u64 = 1 << 32;
const ORACLE_STREAM: u64 = 1 << 40;
const EMISSION_STREAM: u64 = (1 << 40) + 1;
const CLICK_STREAM: u64 = (1 << 40) + 2;
const COINCIDENCE_STREAM: u64 = (1 << 40) + 3;

/// Phase-object document as stored on disk. Either `builtin` or
/// `depth_map_pgm` supplies the depth raster; relative paths are resolved
/// against the directory of the enclosing document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectDoc {
    pub pitch_um: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<BuiltinRaster>,
    #[serde(default)]
    pub depth_map_pgm: Option<PathBuf>,
    #[serde(default)]
    pub depth_scale_nm_per_level: f64,
    #[serde(default)]
    pub index_table: Option<IndexTable>,
    #[serde(default)]
    pub amplitude_mask_pgm: Option<PathBuf>,
    pub placement: Placement,
}

impl ObjectDoc {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut doc: ObjectDoc = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if let Some(dir) = path.parent() {
            doc.resolve_paths(dir);
        }
        Ok(doc)
    }

    /// Makes relative raster paths relative to `dir`.
    pub fn resolve_paths(&mut self, dir: &Path) {
        for p in [&mut self.depth_map_pgm, &mut self.amplitude_mask_pgm].into_iter().flatten() {
            if p.is_relative() {
                *p = dir.join(&*p);
            }
        }
    }

    /// Loads the rasters and builds the in-memory object.
    pub fn load(&self) -> Result<PhaseObjectSpec> {
        let (levels, mask) = match (&self.builtin, &self.depth_map_pgm) {
            (Some(_), Some(_)) => {
                return Err(Error::scenario("object has both a builtin raster and a depth map"))
            }
            (Some(b), None) => {
                let r = b.rasters();
                (r.depth_levels, r.mask)
            }
            (None, Some(path)) => (pgm::read(path)?.pixels, None),
            (None, None) => return Err(Error::scenario("object needs a builtin raster or a depth map")),
        };
        let mask = match (&self.amplitude_mask_pgm, mask) {
            (Some(path), _) => {
                let p = pgm::read(path)?;
                let max = f64::from(p.maxval);
                Some(p.pixels.map(|&v| (f64::from(v) / max).min(1.0)))
            }
            (None, builtin) => builtin,
        };
        let amplitude = mask.unwrap_or_else(|| Grid::filled(levels.rows(), levels.cols(), 1.0));
        let scale = self.depth_scale_nm_per_level;
        let depth_nm = levels.map(|&v| f64::from(v) * scale);
        let index = match &self.index_table {
            Some(t) => t.clone(),
            None if depth_nm.iter().all(|&d| d == 0.0) => IndexTable::fused_silica(),
            None => return Err(Error::scenario("etched object needs an index table")),
        };
        let spec = PhaseObjectSpec {
            depth_nm,
            amplitude,
            pitch_um: self.pitch_um,
            index,
            placement: self.placement,
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// Full description of one run of the interferometer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub wavelengths: WavelengthTriple,
    pub geometry: ImagingGeometry,
    pub object: Option<ObjectDoc>,
    pub idler_blocked: bool,
    pub pump_phase_rad: f64,
    pub setup_visibility: f64,
    pub path_mismatch_mm: f64,
    pub filter_bandwidth_nm: f64,
    /// 1/e² intensity radius at the camera.
    pub beam_waist_mm: f64,
    pub pump_power_mw: f64,
    /// Peak photons per pixel per exposure at [`REFERENCE_PUMP_POWER_MW`].
    pub peak_photons_per_pixel: f64,
    pub camera: CameraConfig,
    pub idler_detector_efficiency: f64,
}

impl Scenario {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Read {
            path: path.to_path_buf(),
            source,
        })?;
        let mut s: Scenario = serde_json::from_str(&text).map_err(|source| Error::Json {
            path: path.to_path_buf(),
            source,
        })?;
        if let (Some(obj), Some(dir)) = (s.object.as_mut(), path.parent()) {
            obj.resolve_paths(dir);
        }
        Ok(s)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn coherence(&self) -> CoherenceModel {
        CoherenceModel {
            filter_bandwidth_nm: self.filter_bandwidth_nm,
            center_nm: self.wavelengths.signal_nm,
            path_mismatch_mm: self.path_mismatch_mm,
        }
    }

    /// `v0 × mismatch envelope`.
    pub fn effective_visibility(&self) -> f64 {
        self.setup_visibility * self.coherence().visibility_factor()
    }

    /// Peak photons per pixel per exposure at the configured pump power.
    pub fn peak_rate(&self) -> f64 {
        self.peak_photons_per_pixel * self.pump_power_mw / REFERENCE_PUMP_POWER_MW
    }

    /// Checks every invariant that does not need the object rasters.
    pub fn validate(&self) -> Result<()> {
        let ctx = |e: Error| Error::scenario(e.to_string());
        self.wavelengths.validate(DEFAULT_ENERGY_TOLERANCE).map_err(ctx)?;
        self.geometry.validate().map_err(ctx)?;
        self.camera.validate().map_err(ctx)?;
        self.coherence().validate().map_err(ctx)?;
        if self.camera.pixel_pitch_um != self.geometry.pixel_pitch_um {
            return Err(Error::scenario("camera and geometry pixel pitch disagree"));
        }
        if !(0.0..=1.0).contains(&self.setup_visibility) {
            return Err(Error::scenario(format!(
                "setup visibility {} not in [0, 1]",
                self.setup_visibility
            )));
        }
        if !(0.0..=1.0).contains(&self.idler_detector_efficiency) {
            return Err(Error::scenario("idler detector efficiency not in [0, 1]"));
        }
        if !self.pump_phase_rad.is_finite() {
            return Err(Error::scenario("pump phase must be finite"));
        }
        if !(self.beam_waist_mm > 0.0) {
            return Err(Error::scenario("beam waist must be positive"));
        }
        if !(self.pump_power_mw > 0.0 && self.pump_power_mw.is_finite()) {
            return Err(Error::scenario("pump power must be positive"));
        }
        if !(self.peak_photons_per_pixel >= 0.0 && self.peak_photons_per_pixel.is_finite()) {
            return Err(Error::scenario("peak photon rate must be non-negative"));
        }
        Ok(())
    }
}

/// Region of interest on the camera grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Roi {
    Rect {
        row: usize,
        col: usize,
        rows: usize,
        cols: usize,
    },
    /// Disk around the sensor centre, radius in pixels.
    CentralDisk { radius_px: f64 },
}

impl Roi {
    /// Central disk of half the beam waist.
    pub fn default_for(s: &Scenario) -> Self {
        Roi::CentralDisk {
            radius_px: 0.5 * s.beam_waist_mm * 1e3 / s.geometry.pixel_pitch_um,
        }
    }

    pub fn indices(&self, shape: (usize, usize)) -> Result<Vec<usize>> {
        let (rows, cols) = shape;
        let idx: Vec<usize> = match *self {
            Roi::Rect {
                row,
                col,
                rows: h,
                cols: w,
            } => (row..(row + h).min(rows))
                .flat_map(|r| (col..(col + w).min(cols)).map(move |c| r * cols + c))
                .collect(),
            Roi::CentralDisk { radius_px } => (0..rows * cols)
                .filter(|i| {
                    let y = (i / cols) as f64 + 0.5 - rows as f64 / 2.0;
                    let x = (i % cols) as f64 + 0.5 - cols as f64 / 2.0;
                    x * x + y * y <= radius_px * radius_px
                })
                .collect(),
        };
        if idx.is_empty() {
            return Err(Error::range("region of interest is empty"));
        }
        Ok(idx)
    }
}

/// A scenario resolved onto the camera grid.
#[derive(Debug, Clone)]
pub struct Experiment {
    scenario: Scenario,
    v_eff: f64,
    transmittance: Grid<f64>,
    idler_phase: Grid<f64>,
    signal_phase: Grid<f64>,
    flux: Grid<f64>,
}

impl Experiment {
    pub fn new(s: &Scenario) -> Result<Self> {
        s.validate()?;
        let g = &s.geometry;
        let shape = g.shape();
        let mut transmittance = Grid::filled(shape.0, shape.1, 1.0);
        let mut idler_phase = Grid::filled(shape.0, shape.1, 0.0);
        let mut signal_phase = Grid::filled(shape.0, shape.1, 0.0);

        if let Some(doc) = &s.object {
            let spec = doc.load()?;
            match spec.placement {
                Placement::None => {}
                Placement::Idler => {
                    let m = optics::magnification(g, &s.wavelengths);
                    let map = remap(&spec, s.wavelengths.idler_nm, m, g)?;
                    transmittance = map.transmittance;
                    idler_phase = map.phase;
                }
                Placement::Signal => {
                    // imaged directly by the signal relay, no wavelength ratio
                    let m = g.output_focal_mm / g.relay_focal_mm;
                    let map = remap(&spec, s.wavelengths.signal_nm, m, g)?;
                    if map.transmittance.iter().any(|&t| t < 1.0) {
                        return Err(Error::scenario(
                            "signal-path objects must be pure phase objects (T = 1)",
                        ));
                    }
                    signal_phase = map.phase;
                }
            }
        }

        let flux = optics::gaussian_envelope(g, s.beam_waist_mm, s.peak_rate())?;
        let exp = Self {
            scenario: s.clone(),
            v_eff: s.effective_visibility(),
            transmittance,
            idler_phase,
            signal_phase,
            flux,
        };
        debug_assert!(
            exp.oracle_deviation(s.pump_phase_rad, 0.01) < 1e-9,
            "closed form disagrees with the trace-out oracle"
        );
        Ok(exp)
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn effective_visibility(&self) -> f64 {
        self.v_eff
    }

    pub fn shape(&self) -> (usize, usize) {
        self.flux.shape()
    }

    pub fn transmittance(&self) -> &Grid<f64> {
        &self.transmittance
    }

    pub fn idler_phase(&self) -> &Grid<f64> {
        &self.idler_phase
    }

    pub fn signal_phase(&self) -> &Grid<f64> {
        &self.signal_phase
    }

    pub fn flux(&self) -> &Grid<f64> {
        &self.flux
    }

    #[inline]
    pub fn pixel_probabilities(&self, index: usize, pump_phase: f64) -> ProbPair {
        if self.scenario.idler_blocked {
            return qcore::closed_form_unchecked(0.0, 0.0);
        }
        let t = self.transmittance.as_slice()[index];
        let phase = self.idler_phase.as_slice()[index] - self.signal_phase.as_slice()[index] + pump_phase;
        qcore::closed_form_unchecked(self.v_eff * t, phase)
    }

    /// Same probability through the exact state and trace-out, with the
    /// setup visibility applied to the interference term afterwards.
    pub fn pixel_probabilities_oracle(&self, index: usize, pump_phase: f64) -> Result<ProbPair> {
        let t = self.transmittance.as_slice()[index];
        let phase = self.idler_phase.as_slice()[index] - self.signal_phase.as_slice()[index];
        let obj = ObjectResponse::new(t, phase)?;
        let state = if self.scenario.idler_blocked {
            qcore::build_blocked_state(obj, pump_phase)
        } else {
            qcore::build_joint_state(obj, pump_phase)
        };
        let ideal = qcore::detection_probabilities(&state)?;
        let fringe = self.v_eff * (ideal.p_g - 0.5);
        Ok(ProbPair {
            p_g: 0.5 + fringe,
            p_h: 0.5 - fringe,
        })
    }

    /// Largest closed-form vs oracle gap over a random `fraction` of pixels.
    pub fn oracle_deviation(&self, pump_phase: f64, fraction: f64) -> f64 {
        let n = self.flux.len();
        let picks = ((n as f64 * fraction).ceil() as usize).clamp(1, n);
        let mut rng = StreamKey::new(self.scenario.camera.rng_seed).at(ORACLE_STREAM, 0);
        (0..picks)
            .map(|_| {
                let i = rng.random_range(0..n);
                let fast = self.pixel_probabilities(i, pump_phase);
                match self.pixel_probabilities_oracle(i, pump_phase) {
                    Ok(slow) => (fast.p_g - slow.p_g).abs().max((fast.p_h - slow.p_h).abs()),
                    Err(_) => f64::INFINITY,
                }
            })
            .fold(0.0, f64::max)
    }

    pub fn probability_maps(&self, pump_phase: f64) -> (Grid<f64>, Grid<f64>) {
        let (rows, cols) = self.shape();
        let pairs: Vec<ProbPair> = (0..rows * cols)
            .into_par_iter()
            .map(|i| self.pixel_probabilities(i, pump_phase))
            .collect();
        (
            Grid::from_fn(rows, cols, |r, c| pairs[r * cols + c].p_g),
            Grid::from_fn(rows, cols, |r, c| pairs[r * cols + c].p_h),
        )
    }

    /// Mean counts at G and H.
    pub fn expected_frames(&self, pump_phase: f64) -> Result<(Grid<f64>, Grid<f64>)> {
        let (pg, ph) = self.probability_maps(pump_phase);
        let cfg = &self.scenario.camera;
        Ok((
            camera::expected_counts(&pg, &self.flux, cfg)?,
            camera::expected_counts(&ph, &self.flux, cfg)?,
        ))
    }

    /// Frames at G and H drawn from streams `stream_base` and `stream_base + 1`.
    pub fn frames(&self, pump_phase: f64, stream_base: u64) -> Result<(ImageFrame, ImageFrame)> {
        let (mg, mh) = self.expected_frames(pump_phase)?;
        let cfg = &self.scenario.camera;
        let mut g = camera::sample_frame(&mg, cfg, stream_base)?;
        let mut h = camera::sample_frame(&mh, cfg, stream_base + 1)?;
        g.meta.scenario_id = self.scenario.name.clone();
        g.meta.output = OutputPort::G;
        h.meta.scenario_id = self.scenario.name.clone();
        h.meta.output = OutputPort::H;
        Ok((g, h))
    }

    /// Total G counts in `roi`, sampled from `stream`. Noiseless cameras
    /// return the exact expectation rather than a sum of rounded pixels.
    pub fn roi_counts(&self, pump_phase: f64, roi: &[usize], stream: u64) -> f64 {
        let cfg = &self.scenario.camera;
        let dark = cfg.dark_rate * cfg.exposure_s;
        let scale = cfg.em_gain * cfg.quantum_efficiency;
        let key = StreamKey::new(cfg.rng_seed);
        let mean = |i: usize| scale * (self.flux.as_slice()[i] * self.pixel_probabilities(i, pump_phase).p_g + dark);
        if cfg.noiseless {
            roi.iter().map(|&i| mean(i)).sum()
        } else {
            roi.iter()
                .map(|&i| camera::sample_pixel(mean(i), cfg, &key, stream, i as u64) as u64)
                .sum::<u64>() as f64
        }
    }
}

fn remap(spec: &PhaseObjectSpec, probe_nm: f64, m: f64, g: &ImagingGeometry) -> Result<ObjectMap> {
    let object_plane = optics::rasterize_phase_object(spec, probe_nm)?;
    optics::remap_object_to_camera(&object_plane, m, g)
}

/// G and H frames for the scenario's own pump phase.
pub fn simulate_outputs(s: &Scenario) -> Result<(ImageFrame, ImageFrame)> {
    Experiment::new(s)?.frames(s.pump_phase_rad, 0)
}

/// Records ROI totals at G while the pump phase steps through
/// `cycles` periods in `steps` equal increments.
pub fn phase_scan(exp: &Experiment, steps: usize, cycles: f64, roi: &Roi) -> Result<FringeData> {
    if !(cycles > 0.0) || (steps as f64) < 8.0 * cycles {
        return Err(Error::range(format!(
            "need at least 8 steps per cycle (steps = {steps}, cycles = {cycles})"
        )));
    }
    let idx = roi.indices(exp.shape())?;
    let points = (0..steps)
        .into_par_iter()
        .map(|k| {
            let phi = TAU * cycles * k as f64 / steps as f64;
            FringePoint {
                phi_rad: phi,
                counts: exp.roi_counts(phi, &idx, SCAN_STREAM_BASE + k as u64),
            }
        })
        .collect();
    Ok(FringeData {
        points,
        shots_per_step: 1,
    })
}

/// `P(H ∧ idler click)` per pixel, evaluated on the exact state.
pub fn interaction_free_map(exp: &Experiment) -> Result<Grid<f64>> {
    let s = exp.scenario();
    if s.idler_detector_efficiency == 0.0 {
        return Err(Error::scenario("idler detector efficiency is 0; the map would be empty"));
    }
    if s.pump_phase_rad != 0.0 || s.setup_visibility != 1.0 {
        return Err(Error::scenario("interaction-free map assumes φ = 0 and v0 = 1"));
    }
    if matches!(&s.object, Some(o) if o.placement == Placement::Signal) {
        return Err(Error::scenario("interaction-free map needs the object in the idler path"));
    }
    let (rows, cols) = exp.shape();
    let values: Result<Vec<f64>> = (0..rows * cols)
        .into_par_iter()
        .map(|i| Ok(coincidences_at(exp, i)?.h_click))
        .collect();
    Grid::from_vec(rows, cols, values?)
}

fn coincidences_at(exp: &Experiment, index: usize) -> Result<qcore::CoincidenceTable> {
    let s = exp.scenario();
    let obj = ObjectResponse::new(exp.transmittance().as_slice()[index], exp.idler_phase().as_slice()[index])?;
    let state = if s.idler_blocked {
        qcore::build_blocked_state(obj, s.pump_phase_rad)
    } else {
        qcore::build_joint_state(obj, s.pump_phase_rad)
    };
    qcore::coincidence_table(&state, s.idler_detector_efficiency)
}

/// Multinomial draw of `shots` pairs over the four coincidence outcomes
/// (g-click, g-no-click, h-click, h-no-click).
pub fn sample_coincidences(table: &qcore::CoincidenceTable, shots: u64, seed: u64, index: u64) -> [u64; 4] {
    let mut rng = StreamKey::new(seed).at(COINCIDENCE_STREAM, index);
    let probs = table.as_array();
    let mut out = [0u64; 4];
    let mut left = shots;
    let mut mass = 1.0;
    for k in 0..3 {
        let p = if mass > 0.0 { (probs[k] / mass).clamp(0.0, 1.0) } else { 0.0 };
        out[k] = Binomial::new(left, p).map(|d| d.sample(&mut rng)).unwrap_or(0);
        left -= out[k];
        mass -= probs[k];
    }
    out[3] = left;
    out
}

/// Per-pixel G clicks out of `shots` single-pair trials.
pub fn monte_carlo_clicks(prob_g: &Grid<f64>, shots: u64, seed: u64) -> Result<Grid<u64>> {
    let key = StreamKey::new(seed);
    let clicks: Result<Vec<u64>> = prob_g
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(i, &p)| {
            let d = Binomial::new(shots, p).map_err(|e| Error::range(e.to_string()))?;
            Ok(d.sample(&mut key.at(CLICK_STREAM, i as u64)))
        })
        .collect();
    Grid::from_vec(prob_g.rows(), prob_g.cols(), clicks?)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EmissionRow {
    pub power_mw: f64,
    pub blocked: f64,
    pub unblocked: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmissionCheck {
    pub rows: Vec<EmissionRow>,
    pub repetitions: u32,
    /// Straight-line fit of ratio against power.
    pub fit: Option<LineFit>,
}

impl EmissionCheck {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("power_mw,blocked,unblocked,ratio\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.power_mw, r.blocked, r.unblocked, r.ratio));
        }
        out
    }
}

/// Expected NL2 signal photoelectrons per exposure over the whole sensor.
///
/// Down-conversion here is purely spontaneous: NL2's pair rate depends on its
/// own pump share only, so whether the NL1 idler reaches NL2 does not enter.
pub fn nl2_photoelectron_rate(s: &Scenario, pump_power_mw: f64, _idler_blocked: bool) -> f64 {
    let per_mw = s.peak_photons_per_pixel / REFERENCE_PUMP_POWER_MW;
    let envelope: f64 = optics::gaussian_envelope(&s.geometry, s.beam_waist_mm, 1.0)
        .map(|g| g.iter().sum())
        .unwrap_or(0.0);
    // half the pairs come from NL2
    0.5 * s.camera.quantum_efficiency * per_mw * pump_power_mw * envelope
}

/// Compares NL2 count rates with the NL1 idler path blocked and open, at each
/// pump power. Noiseless cameras report expectations; otherwise each entry is
/// the mean of `repetitions` Poisson draws.
pub fn induced_emission_check(s: &Scenario, powers: &[f64], repetitions: u32) -> Result<EmissionCheck> {
    s.validate()?;
    if powers.is_empty() || powers.iter().any(|p| !(*p > 0.0 && p.is_finite())) {
        return Err(Error::range("pump powers must be a non-empty list of positive values"));
    }
    if repetitions == 0 {
        return Err(Error::range("repetitions must be at least 1"));
    }
    let key = StreamKey::new(s.camera.rng_seed);
    let reps = u64::from(repetitions);
    let rows: Vec<EmissionRow> = powers
        .iter()
        .enumerate()
        .map(|(pi, &power)| {
            let measure = |blocked: bool| {
                let rate = nl2_photoelectron_rate(s, power, blocked);
                if s.camera.noiseless || rate == 0.0 {
                    return rate;
                }
                let d = Poisson::new(rate).expect("positive rate");
                let total: f64 = (0..reps)
                    .map(|r| {
                        let index = ((pi as u64 * reps) + r) * 2 + u64::from(blocked);
                        d.sample(&mut key.at(EMISSION_STREAM, index))
                    })
                    .sum();
                total / reps as f64
            };
            let blocked = measure(true);
            let unblocked = measure(false);
            EmissionRow {
                power_mw: power,
                blocked,
                unblocked,
                ratio: blocked / unblocked,
            }
        })
        .collect();
    let fit = if rows.len() >= 3 {
        let xs: Vec<f64> = rows.iter().map(|r| r.power_mw).collect();
        let ys: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
        fit::fit_line(&xs, &ys).ok()
    } else {
        None
    };
    Ok(EmissionCheck {
        rows,
        repetitions,
        fit,
    })
}
