//! Linear least-squares fits: sinusoidal fringes and straight lines.
//!
//! Fringes are modelled as `A + B·cos(φ − φ₀)`, which is linear in the basis
//! `{1, cos φ, sin φ}`: with coefficients `(c₀, c₁, c₂)` we get `A = c₀`,
//! `B = √(c₁² + c₂²)` and `φ₀ = atan2(c₂, c₁)`.

use nalgebra::{Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FringePoint {
    pub phi_rad: f64,
    pub counts: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeData {
    pub points: Vec<FringePoint>,
    pub shots_per_step: u32,
}

impl FringeData {
    pub fn validate(&self) -> Result<()> {
        if self.points.windows(2).any(|w| w[1].phi_rad <= w[0].phi_rad) {
            return Err(Error::range("fringe phases must be strictly increasing"));
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("phi_rad,counts\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.phi_rad, p.counts));
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VisibilityFit {
    pub offset: f64,
    pub amplitude: f64,
    /// Fringe phase `φ₀` in `(−π, π]`.
    pub phase: f64,
    pub visibility: f64,
    pub offset_se: f64,
    pub amplitude_se: f64,
    pub phase_se: f64,
    pub visibility_se: f64,
    /// Set when `V > 1`, which no physical fringe can produce.
    pub unphysical: bool,
}

/// Fits `A + B·cos(φ − φ₀)` to `(φ, y)` samples.
pub fn fit_sinusoid(phis: &[f64], values: &[f64]) -> Result<VisibilityFit> {
    if phis.len() != values.len() {
        return Err(Error::ShapeMismatch {
            expected: (phis.len(), 1),
            got: (values.len(), 1),
        });
    }
    let n = phis.len();
    if n < 4 {
        return Err(Error::range(format!("need at least 4 fringe points, got {n}")));
    }

    let mut normal = Matrix3::<f64>::zeros();
    let mut rhs = Vector3::<f64>::zeros();
    for (&phi, &y) in phis.iter().zip(values) {
        let x = Vector3::new(1.0, phi.cos(), phi.sin());
        normal += x * x.transpose();
        rhs += x * y;
    }
    // scale-free singularity test: det of the normalised Gram matrix
    if (normal / n as f64).determinant().abs() < 1e-12 {
        return Err(Error::RankDeficient);
    }
    let inverse = normal.try_inverse().ok_or(Error::RankDeficient)?;
    let c = inverse * rhs;

    let rss: f64 = phis
        .iter()
        .zip(values)
        .map(|(&phi, &y)| {
            let r = y - (c[0] + c[1] * phi.cos() + c[2] * phi.sin());
            r * r
        })
        .sum();
    let sigma2 = rss / (n - 3) as f64;
    let cov = inverse * sigma2;

    let offset = c[0];
    let (mut c1, mut c2) = (c[1], c[2]);
    let mut amplitude = c1.hypot(c2);
    if amplitude <= 1e-12 * offset.abs().max(1.0) {
        // flat fringe: phase undefined, report zero
        amplitude = 0.0;
        c1 = 0.0;
        c2 = 0.0;
    }
    let phase = if amplitude > 0.0 { c2.atan2(c1) } else { 0.0 };
    let visibility = amplitude / offset;

    let var_a = cov[(0, 0)];
    let (amplitude_se, phase_se, cov_ab) = if amplitude > 0.0 {
        let b2 = amplitude * amplitude;
        let var_b = (c1 * c1 * cov[(1, 1)] + c2 * c2 * cov[(2, 2)] + 2.0 * c1 * c2 * cov[(1, 2)]) / b2;
        let var_phi = (c2 * c2 * cov[(1, 1)] + c1 * c1 * cov[(2, 2)] - 2.0 * c1 * c2 * cov[(1, 2)]) / (b2 * b2);
        let cov_ab = (c1 * cov[(0, 1)] + c2 * cov[(0, 2)]) / amplitude;
        (var_b.max(0.0).sqrt(), var_phi.max(0.0).sqrt(), cov_ab)
    } else {
        // at B = 0 the amplitude error is the radial spread of (c₁, c₂)
        ((0.5 * (cov[(1, 1)] + cov[(2, 2)])).max(0.0).sqrt(), f64::INFINITY, 0.0)
    };
    let var_v = if offset != 0.0 {
        let rel = amplitude_se.powi(2) / (offset * offset)
            + visibility * visibility * var_a / (offset * offset)
            - 2.0 * visibility * cov_ab / (offset * offset);
        rel.max(0.0)
    } else {
        f64::INFINITY
    };

    Ok(VisibilityFit {
        offset,
        amplitude,
        phase,
        visibility,
        offset_se: var_a.max(0.0).sqrt(),
        amplitude_se,
        phase_se,
        visibility_se: var_v.sqrt(),
        unphysical: visibility > 1.0,
    })
}

pub fn fit_fringe(d: &FringeData) -> Result<VisibilityFit> {
    d.validate()?;
    let phis: Vec<f64> = d.points.iter().map(|p| p.phi_rad).collect();
    let counts: Vec<f64> = d.points.iter().map(|p| p.counts).collect();
    fit_sinusoid(&phis, &counts)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub intercept: f64,
    pub slope: f64,
    pub slope_se: f64,
}

/// Ordinary least-squares line through `(x, y)`.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::range("line fit needs at least 3 paired samples"));
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::RankDeficient);
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    Ok(LineFit {
        intercept,
        slope,
        slope_se: (rss / (n - 2.0) / sxx).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::TAU;

    fn grid(n: usize) -> Vec<f64> {
        (0..n).map(|k| TAU * k as f64 / n as f64).collect()
    }

    #[test]
    fn recovers_exact_fringe() {
        let phis = grid(24);
        let ys: Vec<f64> = phis.iter().map(|p| 1000.0 * (1.0 + 0.5 * (p - 0.3).cos())).collect();
        let f = fit_sinusoid(&phis, &ys).unwrap();
        assert!((f.offset - 1000.0).abs() < 1e-9);
        assert!((f.amplitude - 500.0).abs() < 1e-9);
        assert!((f.phase - 0.3).abs() < 1e-9);
        assert!((f.visibility - 0.5).abs() < 1e-9);
        assert!(!f.unphysical);
    }

    #[test]
    fn flat_fringe() {
        let phis = grid(12);
        let f = fit_sinusoid(&phis, &[42.0; 12]).unwrap();
        assert_eq!((f.amplitude, f.visibility, f.phase), (0.0, 0.0, 0.0));
    }

    #[test]
    fn degenerate_inputs() {
        assert!(matches!(fit_sinusoid(&[1.0; 6], &[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), Err(Error::RankDeficient)));
        assert!(fit_sinusoid(&[0.0, 1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_sinusoid(&[0.0, 1.0, 2.0, 3.0], &[1.0, 2.0]).is_err());
        let d = FringeData {
            points: vec![
                FringePoint { phi_rad: 1.0, counts: 0.0 },
                FringePoint { phi_rad: 0.5, counts: 0.0 },
            ],
            shots_per_step: 1,
        };
        assert!(fit_fringe(&d).is_err());
    }

    #[test]
    fn flags_overmodulated() {
        let phis = grid(16);
        let ys: Vec<f64> = phis.iter().map(|p| 10.0 + 15.0 * p.cos()).collect();
        assert!(fit_sinusoid(&phis, &ys).unwrap().unphysical);
    }

    #[test]
    fn standard_errors_track_noise() {
        // deterministic ±1 alternating residual on top of an exact fringe
        let phis = grid(48);
        let ys: Vec<f64> = phis
            .iter()
            .enumerate()
            .map(|(k, p)| 100.0 + 50.0 * p.cos() + if k % 3 == 0 { 1.0 } else { -0.5 })
            .collect();
        let f = fit_sinusoid(&phis, &ys).unwrap();
        assert!(f.visibility_se > 0.0 && f.visibility_se < 0.01);
        assert!(f.offset_se > 0.0);
    }

    #[test]
    fn line() {
        let xs = [50.0, 100.0, 150.0, 200.0];
        let ys: Vec<f64> = xs.iter().map(|x| 1.0 + 2e-5 * x).collect();
        let l = fit_line(&xs, &ys).unwrap();
        assert!((l.slope - 2e-5).abs() < 1e-15);
        assert!((l.intercept - 1.0).abs() < 1e-12);
        assert!(fit_line(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
    }

    #[test]
    fn csv_header() {
        let d = FringeData {
            points: vec![FringePoint { phi_rad: 0.0, counts: 5.0 }],
            shots_per_step: 1,
        };
        assert_eq!(d.to_csv(), "phi_rad,counts\n0,5\n");
    }
}
