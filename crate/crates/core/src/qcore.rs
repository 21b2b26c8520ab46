//! Exact few-mode model of the two-crystal interferometer.
//!
//! One pair is emitted either in NL1 (signal `C`, idler `D`) or in NL2
//! (signal `E`, idler `F`). The NL1 idler crosses the object and is aligned
//! onto `F`; whatever the object does not transmit ends up in the sink mode
//! `W`. The signal modes `C` and `E` are combined on a 50:50 beam splitter
//! with outputs `G` and `H`.
//!
//! Conventions used throughout the crate:
//!
//! * the beam splitter maps `C -> (G + H)/√2` and `E -> (G - H)/√2`;
//! * the pump phase `φ` enters the NL2 branch as `e^{-iφ}`.
//!
//! Together these give `P_{g/h} = ½[1 ± T cos(γ + φ)]`.

use num_complex::Complex64;
use std::f64::consts::{FRAC_1_SQRT_2, TAU};

use crate::error::{Error, Result};

const NORM_TOLERANCE: f64 = 1e-9;

/// Wraps a phase into `[0, 2π)`.
pub fn canonical_phase(phase: f64) -> f64 {
    let wrapped = phase.rem_euclid(TAU);
    // rem_euclid can round up to exactly 2π for tiny negative inputs
    if wrapped >= TAU {
        0.0
    } else {
        wrapped
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeLabel {
    /// NL1 signal, before the beam splitter.
    CS,
    /// NL2 signal, before the beam splitter.
    ES,
    /// Beam-splitter output `g`.
    GS,
    /// Beam-splitter output `h`.
    HS,
    /// NL1 idler before alignment.
    DI,
    /// Common idler mode after alignment.
    FI,
    /// Sink for idler amplitude the object does not transmit.
    WI,
}

impl ModeLabel {
    pub const SIGNAL: [ModeLabel; 4] = [ModeLabel::CS, ModeLabel::ES, ModeLabel::GS, ModeLabel::HS];
    pub const IDLER: [ModeLabel; 3] = [ModeLabel::DI, ModeLabel::FI, ModeLabel::WI];

    pub fn is_signal(self) -> bool {
        self.signal_index().is_some()
    }

    pub fn is_idler(self) -> bool {
        self.idler_index().is_some()
    }

    fn signal_index(self) -> Option<usize> {
        match self {
            ModeLabel::CS => Some(0),
            ModeLabel::ES => Some(1),
            ModeLabel::GS => Some(2),
            ModeLabel::HS => Some(3),
            _ => None,
        }
    }

    fn idler_index(self) -> Option<usize> {
        match self {
            ModeLabel::DI => Some(0),
            ModeLabel::FI => Some(1),
            ModeLabel::WI => Some(2),
            _ => None,
        }
    }
}

const C: usize = 0;
const E: usize = 1;
const G: usize = 2;
const H: usize = 3;
const IDLER_F: usize = 1;
const IDLER_W: usize = 2;

/// Transmittance and phase the object imparts on one pixel's beam.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObjectResponse {
    transmittance: f64,
    phase: f64,
}

impl ObjectResponse {
    pub fn new(transmittance: f64, phase: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&transmittance) {
            return Err(Error::range(format!("transmittance {transmittance} not in [0, 1]")));
        }
        if !phase.is_finite() {
            return Err(Error::range(format!("phase {phase} is not finite")));
        }
        Ok(Self {
            transmittance,
            phase: canonical_phase(phase),
        })
    }

    /// Empty path: full transmission, no phase.
    pub const fn transparent() -> Self {
        Self {
            transmittance: 1.0,
            phase: 0.0,
        }
    }

    pub fn transmittance(&self) -> f64 {
        self.transmittance
    }

    /// Phase in `[0, 2π)`.
    pub fn phase(&self) -> f64 {
        self.phase
    }
}

/// Amplitude table over (signal, idler) mode pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    amplitudes: [[Complex64; 3]; 4],
    pump_phase: f64,
    blocked: bool,
}

impl JointState {
    /// Panics if `signal` is not a signal label or `idler` not an idler label.
    pub fn amplitude(&self, signal: ModeLabel, idler: ModeLabel) -> Complex64 {
        let s = signal.signal_index().expect("not a signal mode");
        let i = idler.idler_index().expect("not an idler mode");
        self.amplitudes[s][i]
    }

    pub fn pump_phase(&self) -> f64 {
        self.pump_phase
    }

    pub fn is_blocked(&self) -> bool {
        self.blocked
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().flatten().map(|a| a.norm_sqr()).sum()
    }

    fn check_normalized(&self) -> Result<()> {
        let norm = self.norm_sqr();
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::NotNormalized(norm));
        }
        Ok(())
    }

    /// Sends `C` and `E` through the output beam splitter. Amplitude already
    /// sitting in `G`/`H` passes through unchanged.
    pub fn after_beam_splitter(&self) -> JointState {
        let mut out = self.clone();
        for k in 0..3 {
            let c = self.amplitudes[C][k];
            let e = self.amplitudes[E][k];
            out.amplitudes[C][k] = Complex64::ZERO;
            out.amplitudes[E][k] = Complex64::ZERO;
            out.amplitudes[G][k] += (c + e) * FRAC_1_SQRT_2;
            out.amplitudes[H][k] += (c - e) * FRAC_1_SQRT_2;
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbPair {
    pub p_g: f64,
    pub p_h: f64,
}

/// Joint outcome probabilities of (signal output) x (idler detector click).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoincidenceTable {
    pub g_click: f64,
    pub g_no_click: f64,
    pub h_click: f64,
    pub h_no_click: f64,
}

impl CoincidenceTable {
    pub fn total(&self) -> f64 {
        self.g_click + self.g_no_click + self.h_click + self.h_no_click
    }

    pub fn signal_marginals(&self) -> ProbPair {
        ProbPair {
            p_g: self.g_click + self.g_no_click,
            p_h: self.h_click + self.h_no_click,
        }
    }

    /// Outcome probabilities in the order g-click, g-no-click, h-click, h-no-click.
    pub fn as_array(&self) -> [f64; 4] {
        [self.g_click, self.g_no_click, self.h_click, self.h_no_click]
    }
}

/// State just before the output beam splitter:
/// `(1/√2)[T e^{iγ}|C,F> + e^{-iφ}|E,F> + √(1-T²)|C,W>]`.
pub fn build_joint_state(obj: ObjectResponse, pump_phase: f64) -> JointState {
    let t = obj.transmittance();
    let mut amplitudes = [[Complex64::ZERO; 3]; 4];
    amplitudes[C][IDLER_F] = Complex64::from_polar(t * FRAC_1_SQRT_2, obj.phase());
    amplitudes[E][IDLER_F] = Complex64::from_polar(FRAC_1_SQRT_2, -pump_phase);
    amplitudes[C][IDLER_W] = Complex64::new((1.0 - t * t).max(0.0).sqrt() * FRAC_1_SQRT_2, 0.0);
    JointState {
        amplitudes,
        pump_phase,
        blocked: false,
    }
}

/// State with the NL1 idler path blocked: the whole NL1 idler goes to the
/// sink, so the two source branches never share an idler mode.
pub fn build_blocked_state(_obj: ObjectResponse, pump_phase: f64) -> JointState {
    let mut amplitudes = [[Complex64::ZERO; 3]; 4];
    amplitudes[E][IDLER_F] = Complex64::from_polar(FRAC_1_SQRT_2, -pump_phase);
    amplitudes[C][IDLER_W] = Complex64::new(FRAC_1_SQRT_2, 0.0);
    JointState {
        amplitudes,
        pump_phase,
        blocked: true,
    }
}

/// Output-port probabilities with the idler traced out.
pub fn detection_probabilities(state: &JointState) -> Result<ProbPair> {
    state.check_normalized()?;
    let out = state.after_beam_splitter();
    let port = |s: usize| out.amplitudes[s].iter().map(|a| a.norm_sqr()).sum::<f64>();
    Ok(ProbPair {
        p_g: port(G),
        p_h: port(H),
    })
}

/// `P_{g/h} = ½[1 ± v0·T·cos(γ_idler − γ_signal + φ)]`.
pub fn closed_form_probabilities(
    transmittance: f64,
    idler_phase: f64,
    signal_phase: f64,
    pump_phase: f64,
    setup_visibility: f64,
) -> Result<ProbPair> {
    if !(0.0..=1.0).contains(&transmittance) {
        return Err(Error::range(format!("transmittance {transmittance} not in [0, 1]")));
    }
    if !(0.0..=1.0).contains(&setup_visibility) {
        return Err(Error::range(format!("setup visibility {setup_visibility} not in [0, 1]")));
    }
    Ok(closed_form_unchecked(
        setup_visibility * transmittance,
        idler_phase - signal_phase + pump_phase,
    ))
}

/// Hot-path variant for callers that already validated their inputs.
#[inline]
pub(crate) fn closed_form_unchecked(visibility: f64, phase: f64) -> ProbPair {
    let fringe = 0.5 * visibility * phase.cos();
    ProbPair {
        p_g: 0.5 + fringe,
        p_h: 0.5 - fringe,
    }
}

/// Coincidences with an idler detector on mode `F` of efficiency `η`.
/// Photons in `D` or `W` never reach the detector.
pub fn coincidence_table(state: &JointState, idler_efficiency: f64) -> Result<CoincidenceTable> {
    if !(0.0..=1.0).contains(&idler_efficiency) {
        return Err(Error::range(format!(
            "idler efficiency {idler_efficiency} not in [0, 1]"
        )));
    }
    state.check_normalized()?;
    let out = state.after_beam_splitter();
    let split = |s: usize| {
        let on_detector = out.amplitudes[s][IDLER_F].norm_sqr();
        let elsewhere: f64 = out.amplitudes[s].iter().map(|a| a.norm_sqr()).sum::<f64>() - on_detector;
        let click = idler_efficiency * on_detector;
        (click, elsewhere + (on_detector - click))
    };
    let (g_click, g_no_click) = split(G);
    let (h_click, h_no_click) = split(H);
    Ok(CoincidenceTable {
        g_click,
        g_no_click,
        h_click,
        h_no_click,
    })
}

/// Twice the `<C|ρ_s|E>` element of the reduced signal state. Its modulus is
/// the fringe visibility an ideal beam splitter would show.
pub fn signal_coherence(state: &JointState) -> Complex64 {
    let rho_ce: Complex64 = (0..3)
        .map(|k| state.amplitudes[C][k] * state.amplitudes[E][k].conj())
        .sum();
    2.0 * rho_ce
}
