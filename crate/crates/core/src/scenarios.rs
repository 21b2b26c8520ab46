//! Canned scenarios for the canonical experiments and the stand-in artwork
//! they image.

use serde::{Deserialize, Serialize};
use std::str::FromStr;

use crate::camera::CameraConfig;
use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::optics::{ImagingGeometry, IndexTable, Placement, WavelengthTriple, DEFAULT_OBJECT_PITCH_UM};
use crate::pipeline::{ObjectDoc, Scenario};

/// Etch depth of the silicon target, nm.
pub const SILICON_ETCH_NM: f64 = 310.0;
/// Average etch depth of the fused-silica target, nm.
pub const SILICA_ETCH_NM: f64 = 1803.0;
/// Height of every stand-in feature, mm.
pub const FEATURE_HEIGHT_MM: f64 = 3.0;
/// Side of the square object grid, in object pixels (3.84 mm at 8 µm).
pub const OBJECT_GRID: usize = 480;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Preset {
    NoObject,
    CardboardCutout,
    SiliconCat,
    SilicaPsiIdler,
    SilicaPsiSignal,
    BlockedControl,
    InteractionFree,
    InducedEmissionCheck,
}

impl Preset {
    pub const ALL: [Preset; 8] = [
        Preset::NoObject,
        Preset::CardboardCutout,
        Preset::SiliconCat,
        Preset::SilicaPsiIdler,
        Preset::SilicaPsiSignal,
        Preset::BlockedControl,
        Preset::InteractionFree,
        Preset::InducedEmissionCheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::NoObject => "no_object",
            Preset::CardboardCutout => "cardboard_cutout",
            Preset::SiliconCat => "silicon_cat",
            Preset::SilicaPsiIdler => "silica_psi_idler",
            Preset::SilicaPsiSignal => "silica_psi_signal",
            Preset::BlockedControl => "blocked_control",
            Preset::InteractionFree => "interaction_free",
            Preset::InducedEmissionCheck => "induced_emission_check",
        }
    }
}

impl FromStr for Preset {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_lowercase().replace('-', "_");
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == norm)
            .ok_or_else(|| Error::UnknownPreset(s.to_string()))
    }
}

/// Procedurally generated stand-ins for the imaged artwork.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BuiltinRaster {
    /// Head-and-ears silhouette, etched.
    Cat,
    /// Stroked ψ glyph, etched.
    Psi,
    /// Block letters cut out of an opaque card.
    Cardboard,
}

/// Depth levels (0 = unetched, 1 = etched) and an optional transmittance mask.
#[derive(Debug, Clone, PartialEq)]
pub struct Rasters {
    pub depth_levels: Grid<u16>,
    pub mask: Option<Grid<f64>>,
}

impl BuiltinRaster {
    pub fn rasters(self) -> Rasters {
        match self {
            BuiltinRaster::Cat => Rasters {
                depth_levels: cat(),
                mask: None,
            },
            BuiltinRaster::Psi => Rasters {
                depth_levels: psi(),
                mask: None,
            },
            BuiltinRaster::Cardboard => Rasters {
                depth_levels: Grid::filled(OBJECT_GRID, OBJECT_GRID, 0),
                mask: Some(cardboard().map(|&open| if open { 1.0 } else { 0.0 })),
            },
        }
    }
}

fn feature_px() -> f64 {
    FEATURE_HEIGHT_MM * 1e3 / DEFAULT_OBJECT_PITCH_UM
}

/// Pixel-centre coordinates relative to the grid centre.
fn centred(r: usize, c: usize) -> (f64, f64) {
    let half = OBJECT_GRID as f64 / 2.0;
    (c as f64 + 0.5 - half, r as f64 + 0.5 - half)
}

fn in_triangle(p: (f64, f64), a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> bool {
    let cross = |o: (f64, f64), u: (f64, f64), v: (f64, f64)| (u.0 - o.0) * (v.1 - o.1) - (u.1 - o.1) * (v.0 - o.0);
    let d1 = cross(a, b, p);
    let d2 = cross(b, c, p);
    let d3 = cross(c, a, p);
    let neg = d1 < 0.0 || d2 < 0.0 || d3 < 0.0;
    let pos = d1 > 0.0 || d2 > 0.0 || d3 > 0.0;
    !(neg && pos)
}

fn cat() -> Grid<u16> {
    // head radius + ear height = full feature height
    let h = feature_px();
    let radius = 0.37 * h;
    let ear = h - 2.0 * radius;
    let cy = h / 2.0 - radius;
    let left = [(-0.95 * radius, cy - 0.25 * radius), (-0.2 * radius, cy - 0.9 * radius), (-0.75 * radius, cy - radius - ear)];
    let right = left.map(|(x, y)| (-x, y));
    Grid::from_fn(OBJECT_GRID, OBJECT_GRID, |r, c| {
        let p = centred(r, c);
        let head = p.0 * p.0 + (p.1 - cy).powi(2) <= radius * radius;
        u16::from(head || in_triangle(p, left[0], left[1], left[2]) || in_triangle(p, right[0], right[1], right[2]))
    })
}

fn segment_distance(p: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    let (dx, dy) = (b.0 - a.0, b.1 - a.1);
    let t = (((p.0 - a.0) * dx + (p.1 - a.1) * dy) / (dx * dx + dy * dy)).clamp(0.0, 1.0);
    ((p.0 - a.0 - t * dx).powi(2) + (p.1 - a.1 - t * dy).powi(2)).sqrt()
}

fn psi() -> Grid<u16> {
    let h = feature_px();
    let half_stroke = 0.05 * h;
    let (top, bottom) = (-h / 2.0 + half_stroke, h / 2.0 - half_stroke);
    let bowl_r = 0.32 * h;
    let bowl_cy = 0.05 * h;
    let mut path: Vec<[(f64, f64); 2]> = vec![
        // stem
        [(0.0, top), (0.0, bottom)],
        // arms of the cup
        [(-bowl_r, top + 0.12 * h), (-bowl_r, bowl_cy)],
        [(bowl_r, top + 0.12 * h), (bowl_r, bowl_cy)],
    ];
    let steps = 24;
    for k in 0..steps {
        let a0 = std::f64::consts::PI * k as f64 / steps as f64;
        let a1 = std::f64::consts::PI * (k + 1) as f64 / steps as f64;
        path.push([
            (bowl_r * a0.cos(), bowl_cy + bowl_r * a0.sin()),
            (bowl_r * a1.cos(), bowl_cy + bowl_r * a1.sin()),
        ]);
    }
    Grid::from_fn(OBJECT_GRID, OBJECT_GRID, |r, c| {
        let p = centred(r, c);
        u16::from(path.iter().any(|s| segment_distance(p, s[0], s[1]) <= half_stroke))
    })
}

// 3x5 block glyphs, top row first
const GLYPH_U: [&str; 5] = ["#.#", "#.#", "#.#", "#.#", "###"];
const GLYPH_P: [&str; 5] = ["###", "#.#", "###", "#..", "#.."];

fn cardboard() -> Grid<bool> {
    let h = feature_px();
    let cell_h = h / 5.0;
    let cell_w = 0.8 * cell_h;
    let glyphs = [GLYPH_U, GLYPH_P];
    // two 3-cell glyphs with a one-cell gap
    let width = 7.0 * cell_w;
    Grid::from_fn(OBJECT_GRID, OBJECT_GRID, |r, c| {
        let (x, y) = centred(r, c);
        let (u, v) = ((x + width / 2.0) / cell_w, (y + h / 2.0) / cell_h);
        if u < 0.0 || v < 0.0 || u >= 7.0 || v >= 5.0 {
            return false;
        }
        let (col, row) = (u as usize, v as usize);
        let (glyph, gx) = match col {
            0..=2 => (glyphs[0], col),
            4..=6 => (glyphs[1], col - 4),
            _ => return false,
        };
        glyph[row].as_bytes()[gx] == b'#'
    })
}

fn base(name: &str) -> Scenario {
    let geometry = ImagingGeometry {
        relay_focal_mm: 75.0,
        output_focal_mm: 150.0,
        pixel_pitch_um: 16.0,
        rows: 256,
        cols: 256,
    };
    Scenario {
        name: name.to_string(),
        wavelengths: WavelengthTriple::new(532.0, 810.0, 1550.0),
        geometry,
        object: None,
        idler_blocked: false,
        pump_phase_rad: 0.0,
        setup_visibility: 0.77,
        path_mismatch_mm: 0.0,
        filter_bandwidth_nm: 3.0,
        beam_waist_mm: 2.0,
        pump_power_mw: 150.0,
        peak_photons_per_pixel: 1000.0,
        camera: CameraConfig {
            pixel_pitch_um: geometry.pixel_pitch_um,
            ..CameraConfig::default()
        },
        idler_detector_efficiency: 1.0,
    }
}

fn object(raster: BuiltinRaster, depth_nm: f64, index: Option<IndexTable>, placement: Placement) -> ObjectDoc {
    ObjectDoc {
        pitch_um: DEFAULT_OBJECT_PITCH_UM,
        builtin: Some(raster),
        depth_map_pgm: None,
        depth_scale_nm_per_level: depth_nm,
        index_table: index,
        amplitude_mask_pgm: None,
        placement,
    }
}

/// Expands a preset into a complete scenario.
pub fn build_scenario(p: Preset) -> Scenario {
    let mut s = base(p.name());
    match p {
        Preset::NoObject | Preset::InducedEmissionCheck => {}
        Preset::CardboardCutout => {
            s.object = Some(object(BuiltinRaster::Cardboard, 0.0, None, Placement::Idler));
        }
        Preset::SiliconCat => {
            s.object = Some(object(
                BuiltinRaster::Cat,
                SILICON_ETCH_NM,
                Some(IndexTable::silicon()),
                Placement::Idler,
            ));
        }
        Preset::SilicaPsiIdler | Preset::SilicaPsiSignal => {
            s.wavelengths = WavelengthTriple::new(532.0, 820.0, 1515.0);
            let placement = if p == Preset::SilicaPsiIdler {
                Placement::Idler
            } else {
                Placement::Signal
            };
            s.object = Some(object(
                BuiltinRaster::Psi,
                SILICA_ETCH_NM,
                Some(IndexTable::fused_silica()),
                placement,
            ));
        }
        Preset::BlockedControl => s.idler_blocked = true,
        Preset::InteractionFree => {
            s.object = Some(object(BuiltinRaster::Cardboard, 0.0, None, Placement::Idler));
            s.idler_detector_efficiency = 1.0;
            s.setup_visibility = 1.0;
        }
    }
    s
}

/// Expands a preset and applies a JSON merge patch on top.
pub fn build_scenario_with(p: Preset, overrides: &serde_json::Value) -> Result<Scenario> {
    let mut doc = serde_json::to_value(build_scenario(p)).expect("scenario serializes");
    merge(&mut doc, overrides);
    let s: Scenario = serde_json::from_value(doc).map_err(|e| Error::scenario(e.to_string()))?;
    s.validate()?;
    Ok(s)
}

fn merge(target: &mut serde_json::Value, patch: &serde_json::Value) {
    match (target, patch) {
        (serde_json::Value::Object(t), serde_json::Value::Object(p)) => {
            for (k, v) in p {
                if v.is_null() {
                    t.remove(k);
                } else {
                    merge(t.entry(k.clone()).or_insert(serde_json::Value::Null), v);
                }
            }
        }
        (t, p) => *t = p.clone(),
    }
}
