//! Simulator for imaging with undetected photons.
//!
//! Two down-conversion crystals share a pump; the idler from the first one
//! passes an object and is aligned onto the idler mode of the second. The
//! signal photons from both crystals meet at a beam splitter, and the
//! object's transmittance and phase show up in signal-only counts even though
//! no idler is ever detected.
//!
//! Layers, bottom-up:
//!
//! * [`qcore`]: exact few-mode state, beam splitter, idler trace-out.
//! * [`optics`]: wavelengths, phase objects, magnification, coherence budget.
//! * [`camera`]: EMCCD count model with counter-based random streams.
//! * [`pipeline`]: per-pixel experiment runner, phase scans, fringe fits.
//! * [`scenarios`]: presets for the canonical experiments.
//! * [`cli`]: command implementations behind the `qiup` binary.

// NaN must fail range checks, hence `!(x > 0.0)` style comparisons.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod camera;
pub mod cli;
pub mod error;
pub mod fit;
pub mod grid;
pub mod optics;
pub mod pgm;
pub mod pipeline;
pub mod qcore;
pub mod rng;
pub mod scenarios;

pub use error::{Error, Result};
