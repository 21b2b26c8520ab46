//! EMCCD detection model.
//!
//! Photoelectrons are Poisson, the electron-multiplying register applies a
//! fixed gain, and the readout adds Gaussian noise. The stochastic excess
//! noise of a real EM register is not modelled.

use rand_distr::{Distribution, Normal, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::rng::StreamKey;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CameraConfig {
    pub pixel_pitch_um: f64,
    pub exposure_s: f64,
    pub em_gain: f64,
    pub quantum_efficiency: f64,
    /// Readout noise in output counts.
    pub read_noise_sigma: f64,
    /// Dark photons per pixel per second.
    pub dark_rate: f64,
    pub rng_seed: u64,
    /// Report exact expectations instead of random draws.
    pub noiseless: bool,
}

impl Default for CameraConfig {
    fn default() -> Self {
        Self {
            pixel_pitch_um: 16.0,
            exposure_s: 0.5,
            em_gain: 20.0,
            quantum_efficiency: 0.7,
            read_noise_sigma: 40.0,
            dark_rate: 0.0,
            rng_seed: 0,
            noiseless: false,
        }
    }
}

impl CameraConfig {
    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("pixel pitch", self.pixel_pitch_um),
            ("exposure", self.exposure_s),
            ("EM gain", self.em_gain),
            ("read noise", self.read_noise_sigma),
            ("dark rate", self.dark_rate),
        ];
        for (name, v) in non_negative {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::range(format!("{name} {v} must be finite and non-negative")));
            }
        }
        if !(self.pixel_pitch_um > 0.0) {
            return Err(Error::range("pixel pitch must be positive"));
        }
        if !(0.0..=1.0).contains(&self.quantum_efficiency) {
            return Err(Error::range(format!(
                "quantum efficiency {} not in [0, 1]",
                self.quantum_efficiency
            )));
        }
        Ok(())
    }
}

/// Beam-splitter output a frame was recorded at.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputPort {
    G,
    H,
}

impl OutputPort {
    pub fn label(self) -> &'static str {
        match self {
            OutputPort::G => "G",
            OutputPort::H => "H",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameMeta {
    pub config: CameraConfig,
    pub scenario_id: String,
    pub output: OutputPort,
    pub stream_id: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ImageFrame {
    pub counts: Grid<u32>,
    pub meta: FrameMeta,
}

impl ImageFrame {
    pub fn total(&self) -> u64 {
        self.counts.iter().map(|&c| u64::from(c)).sum()
    }

    /// Header comment used when the frame is stored as a greymap.
    pub fn pgm_comment(&self) -> String {
        format!(
            "qiup scenario={} seed={} output={} stream={}",
            self.meta.scenario_id,
            self.meta.config.rng_seed,
            self.meta.output.label(),
            self.meta.stream_id
        )
    }
}

/// Mean output counts: `gain·QE·(flux·p + dark·exposure)`.
pub fn expected_counts(prob: &Grid<f64>, flux: &Grid<f64>, cfg: &CameraConfig) -> Result<Grid<f64>> {
    flux.ensure_shape(prob.shape())?;
    if prob.iter().any(|p| !(0.0..=1.0).contains(p)) {
        return Err(Error::range("detection probabilities must lie in [0, 1]"));
    }
    let dark = cfg.dark_rate * cfg.exposure_s;
    let scale = cfg.em_gain * cfg.quantum_efficiency;
    let data = prob
        .iter()
        .zip(flux.iter())
        .map(|(p, f)| scale * (f * p + dark))
        .collect();
    Grid::from_vec(prob.rows(), prob.cols(), data)
}

/// One pixel's reading. `index` addresses the pixel's private random window.
pub fn sample_pixel(mean: f64, cfg: &CameraConfig, key: &StreamKey, stream_id: u64, index: u64) -> u32 {
    if cfg.noiseless {
        return mean.max(0.0).round() as u32;
    }
    let mut rng = key.at(stream_id, index);
    let photoelectrons = if mean > 0.0 && cfg.em_gain > 0.0 {
        Poisson::new(mean / cfg.em_gain)
            .map(|d| d.sample(&mut rng))
            .unwrap_or(0.0)
    } else {
        0.0
    };
    let read = if cfg.read_noise_sigma > 0.0 {
        Normal::new(0.0, cfg.read_noise_sigma)
            .map(|d| d.sample(&mut rng))
            .unwrap_or(0.0)
    } else {
        0.0
    };
    (photoelectrons * cfg.em_gain + read).round().max(0.0) as u32
}

/// Draws a frame from a map of mean counts.
pub fn sample_frame(mean: &Grid<f64>, cfg: &CameraConfig, stream_id: u64) -> Result<ImageFrame> {
    if mean.iter().any(|m| !(m.is_finite() && *m >= 0.0)) {
        return Err(Error::range("mean counts must be finite and non-negative"));
    }
    let key = StreamKey::new(cfg.rng_seed);
    let counts: Vec<u32> = mean
        .as_slice()
        .par_iter()
        .enumerate()
        .map(|(i, &m)| sample_pixel(m, cfg, &key, stream_id, i as u64))
        .collect();
    Ok(ImageFrame {
        counts: Grid::from_vec(mean.rows(), mean.cols(), counts)?,
        meta: FrameMeta {
            config: *cfg,
            scenario_id: String::new(),
            output: OutputPort::G,
            stream_id,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombineMode {
    Sum,
    Diff,
}

pub fn combine_frames(a: &ImageFrame, b: &ImageFrame, mode: CombineMode) -> Result<Grid<i64>> {
    b.counts.ensure_shape(a.counts.shape())?;
    let data = a
        .counts
        .iter()
        .zip(b.counts.iter())
        .map(|(&x, &y)| match mode {
            CombineMode::Sum => i64::from(x) + i64::from(y),
            CombineMode::Diff => i64::from(x) - i64::from(y),
        })
        .collect();
    Grid::from_vec(a.counts.rows(), a.counts.cols(), data)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn quiet() -> CameraConfig {
        CameraConfig {
            read_noise_sigma: 0.0,
            ..CameraConfig::default()
        }
    }

    #[test]
    fn expected_count_arithmetic() {
        let cfg = CameraConfig::default();
        let prob = Grid::filled(2, 2, 1.0);
        let flux = Grid::filled(2, 2, 1000.0);
        let m = expected_counts(&prob, &flux, &cfg).unwrap();
        assert!(m.iter().all(|&v| (v - 14000.0).abs() < 1e-9));
        let zero = expected_counts(&Grid::filled(2, 2, 0.0), &flux, &cfg).unwrap();
        assert!(zero.iter().all(|&v| v == 0.0));
        let half = expected_counts(&Grid::filled(2, 2, 0.5), &flux, &cfg).unwrap();
        assert!(half.iter().zip(m.iter()).all(|(h, f)| 2.0 * h == *f));
    }

    #[test]
    fn expected_count_errors() {
        let cfg = CameraConfig::default();
        assert!(matches!(
            expected_counts(&Grid::filled(2, 2, 1.0), &Grid::filled(2, 3, 1.0), &cfg),
            Err(Error::ShapeMismatch { .. })
        ));
        assert!(expected_counts(&Grid::filled(1, 1, 1.5), &Grid::filled(1, 1, 1.0), &cfg).is_err());
    }

    #[test]
    fn dark_counts_add() {
        let cfg = CameraConfig {
            dark_rate: 10.0,
            ..CameraConfig::default()
        };
        let m = expected_counts(&Grid::filled(1, 1, 0.0), &Grid::filled(1, 1, 1.0), &cfg).unwrap();
        assert!((m.get(0, 0) - 20.0 * 0.7 * 5.0).abs() < 1e-12);
    }

    #[test]
    fn dark_frame_is_zero() {
        let f = sample_frame(&Grid::filled(8, 8, 0.0), &quiet(), 0).unwrap();
        assert!(f.counts.iter().all(|&c| c == 0));
    }

    #[test]
    fn noiseless_rounds_mean() {
        let cfg = CameraConfig {
            noiseless: true,
            ..CameraConfig::default()
        };
        let mean = Grid::from_vec(1, 3, vec![0.4, 10.5, 1234.49]).unwrap();
        let f = sample_frame(&mean, &cfg, 9).unwrap();
        assert_eq!(f.counts.as_slice(), &[0, 11, 1234]);
    }

    #[test]
    fn same_stream_same_frame() {
        let cfg = CameraConfig {
            rng_seed: 99,
            ..CameraConfig::default()
        };
        let mean = Grid::filled(16, 16, 5000.0);
        let a = sample_frame(&mean, &cfg, 3).unwrap();
        let b = sample_frame(&mean, &cfg, 3).unwrap();
        let c = sample_frame(&mean, &cfg, 4).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn rejects_negative_mean() {
        assert!(sample_frame(&Grid::filled(1, 1, -1.0), &quiet(), 0).is_err());
    }

    #[test]
    fn difference_of_equal_frames_vanishes() {
        let f = sample_frame(&Grid::filled(4, 4, 300.0), &CameraConfig::default(), 0).unwrap();
        let d = combine_frames(&f, &f, CombineMode::Diff).unwrap();
        assert!(d.iter().all(|&v| v == 0));
        let s = combine_frames(&f, &f, CombineMode::Sum).unwrap();
        assert!(s.iter().zip(f.counts.iter()).all(|(&s, &c)| s == 2 * i64::from(c)));
    }

    #[test]
    fn combine_shape_mismatch() {
        let a = sample_frame(&Grid::filled(2, 2, 1.0), &quiet(), 0).unwrap();
        let b = sample_frame(&Grid::filled(2, 3, 1.0), &quiet(), 0).unwrap();
        assert!(combine_frames(&a, &b, CombineMode::Sum).is_err());
    }

    #[test]
    fn validation() {
        assert!(CameraConfig::default().validate().is_ok());
        let bad = CameraConfig {
            quantum_efficiency: 1.2,
            ..CameraConfig::default()
        };
        assert!(bad.validate().is_err());
        let bad = CameraConfig {
            em_gain: -1.0,
            ..CameraConfig::default()
        };
        assert!(bad.validate().is_err());
    }
}
