//! Physical-parameter layer: wavelengths, phase objects, imaging geometry and
//! coherence budgets.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::qcore::canonical_phase;

/// Default tolerance on `1/λp − 1/λs − 1/λi`, in nm⁻¹.
pub const DEFAULT_ENERGY_TOLERANCE: f64 = 1e-5;

/// Default object-plane sampling, half the camera pitch.
pub const DEFAULT_OBJECT_PITCH_UM: f64 = 8.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WavelengthTriple {
    pub pump_nm: f64,
    pub signal_nm: f64,
    pub idler_nm: f64,
}

impl WavelengthTriple {
    pub fn new(pump_nm: f64, signal_nm: f64, idler_nm: f64) -> Self {
        Self {
            pump_nm,
            signal_nm,
            idler_nm,
        }
    }

    pub fn validate(&self, tolerance: f64) -> Result<()> {
        if [self.pump_nm, self.signal_nm, self.idler_nm]
            .iter()
            .any(|l| !(l.is_finite() && *l > 0.0))
        {
            return Err(Error::range("wavelengths must be positive"));
        }
        if self.signal_nm >= self.idler_nm {
            return Err(Error::range(format!(
                "signal wavelength {} nm must be shorter than idler {} nm",
                self.signal_nm, self.idler_nm
            )));
        }
        let residual = energy_conservation_residual(self);
        if residual.abs() > tolerance {
            return Err(Error::range(format!(
                "energy conservation residual {residual:e} nm^-1 exceeds {tolerance:e}"
            )));
        }
        Ok(())
    }
}

/// `1/λp − 1/λs − 1/λi` in nm⁻¹.
pub fn energy_conservation_residual(w: &WavelengthTriple) -> f64 {
    1.0 / w.pump_nm - 1.0 / w.signal_nm - 1.0 / w.idler_nm
}

/// Phase from an etch step of `depth_nm` in a material of index `n`, wrapped
/// to `[0, 2π)`.
pub fn etch_phase(depth_nm: f64, n: f64, wavelength_nm: f64) -> f64 {
    canonical_phase(TAU * (n - 1.0) * depth_nm / wavelength_nm)
}

/// Depth producing `target` radians; inverse of [`etch_phase`] below 2π.
pub fn etch_depth_for_phase(target: f64, n: f64, wavelength_nm: f64) -> f64 {
    target * wavelength_nm / (TAU * (n - 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImagingGeometry {
    /// Relay lens focal length F1.
    pub relay_focal_mm: f64,
    /// Output lens focal length F2.
    pub output_focal_mm: f64,
    pub pixel_pitch_um: f64,
    pub rows: usize,
    pub cols: usize,
}

impl ImagingGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.relay_focal_mm > 0.0 && self.output_focal_mm > 0.0 && self.pixel_pitch_um > 0.0) {
            return Err(Error::range("focal lengths and pixel pitch must be positive"));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(Error::range("camera grid must be at least 1x1"));
        }
        Ok(())
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }
}

/// Object-to-camera magnification `F2·λs / (F1·λi)` for an object in the idler arm.
pub fn magnification(g: &ImagingGeometry, w: &WavelengthTriple) -> f64 {
    g.output_focal_mm * w.signal_nm / (g.relay_focal_mm * w.idler_nm)
}

/// `λ²/Δλ`, returned in mm.
pub fn coherence_length(wavelength_nm: f64, bandwidth_nm: f64) -> f64 {
    wavelength_nm * wavelength_nm / bandwidth_nm * 1e-6
}

/// Gaussian envelope `exp(−(ΔL/l_c)²)` on the interference term.
pub fn mismatch_visibility_factor(mismatch_mm: f64, coherence_length_mm: f64) -> f64 {
    let x = mismatch_mm / coherence_length_mm;
    (-x * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoherenceModel {
    pub filter_bandwidth_nm: f64,
    pub center_nm: f64,
    pub path_mismatch_mm: f64,
}

impl CoherenceModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.filter_bandwidth_nm > 0.0 && self.center_nm > 0.0) {
            return Err(Error::range("filter bandwidth and center wavelength must be positive"));
        }
        if !(self.path_mismatch_mm >= 0.0) {
            return Err(Error::range("path mismatch must be non-negative"));
        }
        Ok(())
    }

    pub fn coherence_length_mm(&self) -> f64 {
        coherence_length(self.center_nm, self.filter_bandwidth_nm)
    }

    pub fn visibility_factor(&self) -> f64 {
        mismatch_visibility_factor(self.path_mismatch_mm, self.coherence_length_mm())
    }
}

/// `(λ nm, n)` pairs, linearly interpolated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct IndexTable(Vec<(f64, f64)>);

// Malitson's Sellmeier fit for fused silica, sampled.
const FUSED_SILICA: &[(f64, f64)] = &[
    (400.0, 1.470116),
    (500.0, 1.462326),
    (532.0, 1.460706),
    (600.0, 1.458038),
    (700.0, 1.455292),
    (800.0, 1.453317),
    (810.0, 1.453146),
    (820.0, 1.452979),
    (900.0, 1.451754),
    (1000.0, 1.450417),
    (1100.0, 1.449204),
    (1200.0, 1.448050),
    (1300.0, 1.446918),
    (1400.0, 1.445779),
    (1500.0, 1.444618),
    (1515.0, 1.444440),
    (1550.0, 1.444024),
    (1600.0, 1.443419),
    (1700.0, 1.442174),
    (1800.0, 1.440874),
    (1900.0, 1.439513),
    (2000.0, 1.438085),
];

const SILICON: &[(f64, f64)] = &[(1550.0, 3.48)];

impl IndexTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::range("index table is empty"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::range("index table has duplicate wavelengths"));
        }
        let table = Self(points);
        table.validate()?;
        Ok(table)
    }

    pub fn fused_silica() -> Self {
        Self(FUSED_SILICA.to_vec())
    }

    pub fn silicon() -> Self {
        Self(SILICON.to_vec())
    }

    /// Built-in table by material name.
    pub fn builtin(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "silica" | "fused_silica" | "fused-silica" | "sio2" => Ok(Self::fused_silica()),
            "silicon" | "si" => Ok(Self::silicon()),
            _ => Err(Error::UnknownMaterial(name.to_string())),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.0.is_empty() {
            return Err(Error::range("index table is empty"));
        }
        for &(l, n) in &self.0 {
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::range(format!("index table wavelength {l} must be positive")));
            }
            if !(n.is_finite() && n > 1.0) {
                return Err(Error::range(format!("refractive index {n} at {l} nm must exceed 1")));
            }
        }
        if self.0.windows(2).any(|w| w[0].0 >= w[1].0) {
            return Err(Error::range("index table wavelengths must be strictly increasing"));
        }
        Ok(())
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.0
    }

    pub fn range(&self) -> (f64, f64) {
        (self.0[0].0, self.0[self.0.len() - 1].0)
    }

    /// Refractive index at `wavelength_nm`.
    pub fn index_at(&self, wavelength_nm: f64) -> Result<f64> {
        let (min, max) = self.range();
        // a single-entry table answers only at its own wavelength
        let slack = 1e-9 * max;
        if !(wavelength_nm >= min - slack && wavelength_nm <= max + slack) {
            return Err(Error::WavelengthOutOfTable {
                wavelength: wavelength_nm,
                min,
                max,
            });
        }
        let upper = self.0.partition_point(|&(l, _)| l < wavelength_nm);
        if upper == 0 {
            return Ok(self.0[0].1);
        }
        if upper == self.0.len() {
            return Ok(self.0[upper - 1].1);
        }
        let (l0, n0) = self.0[upper - 1];
        let (l1, n1) = self.0[upper];
        Ok(n0 + (n1 - n0) * (wavelength_nm - l0) / (l1 - l0))
    }
}

/// Which beam carries the object.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Placement {
    #[default]
    Idler,
    Signal,
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseObjectSpec {
    pub depth_nm: Grid<f64>,
    pub amplitude: Grid<f64>,
    pub pitch_um: f64,
    pub index: IndexTable,
    pub placement: Placement,
}

impl PhaseObjectSpec {
    pub fn validate(&self) -> Result<()> {
        self.amplitude.ensure_shape(self.depth_nm.shape())?;
        if self.depth_nm.is_empty() {
            return Err(Error::range("object grid is empty"));
        }
        if !(self.pitch_um > 0.0) {
            return Err(Error::range("object pitch must be positive"));
        }
        if self.depth_nm.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::range("etch depths must be finite and non-negative"));
        }
        if self.amplitude.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::range("amplitude mask values must lie in [0, 1]"));
        }
        self.index.validate()
    }
}

/// Per-pixel transmittance and phase, with the physical pitch of its grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ObjectMap {
    pub transmittance: Grid<f64>,
    pub phase: Grid<f64>,
    pub pitch_um: f64,
    pub placement: Placement,
}

impl ObjectMap {
    pub fn uniform(rows: usize, cols: usize, t: f64, phase: f64, pitch_um: f64) -> Self {
        Self {
            transmittance: Grid::filled(rows, cols, t),
            phase: Grid::filled(rows, cols, canonical_phase(phase)),
            pitch_um,
            placement: Placement::Idler,
        }
    }

    pub fn shape(&self) -> (usize, usize) {
        self.transmittance.shape()
    }
}

/// Evaluates the etch phase of every object pixel at `probe_nm`.
pub fn rasterize_phase_object(spec: &PhaseObjectSpec, probe_nm: f64) -> Result<ObjectMap> {
    spec.validate()?;
    let n = spec.index.index_at(probe_nm)?;
    Ok(ObjectMap {
        transmittance: spec.amplitude.clone(),
        phase: spec.depth_nm.map(|&d| etch_phase(d, n, probe_nm)),
        pitch_um: spec.pitch_um,
        placement: spec.placement,
    })
}

/// Resamples an object-plane map onto the camera grid. Each camera pixel
/// centre is projected back through magnification `m` and sampled bilinearly
/// in `T` and in the unit phasor `e^{iγ}`. Samples falling off the object grid
/// see an empty path (`T = 1`, `γ = 0`).
pub fn remap_object_to_camera(map: &ObjectMap, m: f64, g: &ImagingGeometry) -> Result<ObjectMap> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::range(format!("magnification {m} must be positive")));
    }
    g.validate()?;
    let (obj_rows, obj_cols) = map.shape();
    if obj_rows == 0 || obj_cols == 0 || !(map.pitch_um > 0.0) {
        return Err(Error::range("degenerate object grid"));
    }
    map.phase.ensure_shape(map.shape())?;

    let phasors: Vec<Complex64> = map
        .phase
        .iter()
        .map(|&p| Complex64::from_polar(1.0, p))
        .collect();
    let sample = |r: isize, c: isize| -> (f64, Complex64) {
        if r < 0 || c < 0 || r >= obj_rows as isize || c >= obj_cols as isize {
            return (1.0, Complex64::ONE);
        }
        let idx = r as usize * obj_cols + c as usize;
        (map.transmittance.as_slice()[idx], phasors[idx])
    };
    // camera pixel -> fractional object index
    let scale = g.pixel_pitch_um / (m * map.pitch_um);
    let to_object = |cam: usize, cam_n: usize, obj_n: usize| {
        (cam as f64 + 0.5 - cam_n as f64 / 2.0) * scale + obj_n as f64 / 2.0 - 0.5
    };

    let pixels: Vec<(f64, f64)> = (0..g.rows * g.cols)
        .into_par_iter()
        .map(|i| {
            let y = to_object(i / g.cols, g.rows, obj_rows);
            let x = to_object(i % g.cols, g.cols, obj_cols);
            let (y0, x0) = (y.floor(), x.floor());
            let (fy, fx) = (y - y0, x - x0);
            let (r0, c0) = (y0 as isize, x0 as isize);
            let mut t = 0.0;
            let mut z = Complex64::ZERO;
            for (dr, wy) in [(0, 1.0 - fy), (1, fy)] {
                for (dc, wx) in [(0, 1.0 - fx), (1, fx)] {
                    let w = wy * wx;
                    if w == 0.0 {
                        continue;
                    }
                    let (ts, zs) = sample(r0 + dr, c0 + dc);
                    t += w * ts;
                    z += zs * w;
                }
            }
            let phase = if z.norm() > 1e-12 {
                canonical_phase(z.arg())
            } else {
                0.0
            };
            (t.clamp(0.0, 1.0), phase)
        })
        .collect();

    let (t, p): (Vec<f64>, Vec<f64>) = pixels.into_iter().unzip();
    Ok(ObjectMap {
        transmittance: Grid::from_vec(g.rows, g.cols, t)?,
        phase: Grid::from_vec(g.rows, g.cols, p)?,
        pitch_um: g.pixel_pitch_um,
        placement: map.placement,
    })
}

/// Centred Gaussian intensity `peak·exp(−2r²/w²)` over the camera grid, with
/// `r` measured between pixel centres and the sensor centre.
pub fn gaussian_envelope(g: &ImagingGeometry, waist_mm: f64, peak_rate: f64) -> Result<Grid<f64>> {
    if !(waist_mm > 0.0) || !(peak_rate >= 0.0) {
        return Err(Error::range("waist must be positive and peak rate non-negative"));
    }
    g.validate()?;
    let pitch_mm = g.pixel_pitch_um * 1e-3;
    let w2 = waist_mm * waist_mm;
    Ok(Grid::from_fn(g.rows, g.cols, |r, c| {
        let y = (r as f64 + 0.5 - g.rows as f64 / 2.0) * pitch_mm;
        let x = (c as f64 + 0.5 - g.cols as f64 / 2.0) * pitch_mm;
        peak_rate * (-2.0 * (x * x + y * y) / w2).exp()
    }))
}
