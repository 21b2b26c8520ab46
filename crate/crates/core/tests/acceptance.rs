//! Acceptance suite. Every test prints one `PASS`/`FAIL` line for its
//! criterion before asserting, so a plain `cargo test --test acceptance --
//! --nocapture` gives a readable summary.

use std::collections::BTreeMap;
use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use qiup::cli::{self, ScenarioArgs};
use qiup::fit::fit_fringe;
use qiup::grid::Grid;
use qiup::optics::{self, ImagingGeometry, IndexTable, WavelengthTriple};
use qiup::pipeline::{self, Experiment, Roi, Scenario};
use qiup::qcore::{self, build_joint_state, detection_probabilities, ObjectResponse};
use qiup::scenarios::{build_scenario, Preset, SILICA_ETCH_NM, SILICON_ETCH_NM};

fn verdict(n: &str, what: &str, pass: bool, detail: String) {
    let tag = if pass { "PASS" } else { "FAIL" };
    println!("criterion {n:>2} {tag} {what}: {detail}");
    assert!(pass, "criterion {n} ({what}) failed: {detail}");
}

fn noiseless(p: Preset) -> Scenario {
    let mut s = build_scenario(p);
    s.camera.noiseless = true;
    s
}

/// Σ DIFF / Σ SUM over the selected pixels of the expected frames.
fn contrast(g: &Grid<f64>, h: &Grid<f64>, pick: &[usize]) -> f64 {
    let (d, s) = pick.iter().fold((0.0, 0.0), |(d, s), &i| {
        let (a, b) = (g.as_slice()[i], h.as_slice()[i]);
        (d + a - b, s + a + b)
    });
    d / s
}

fn pixels_where(grid: &Grid<f64>, pred: impl Fn(f64) -> bool) -> Vec<usize> {
    grid.iter().enumerate().filter(|(_, &v)| pred(v)).map(|(i, _)| i).collect()
}

#[test]
fn criterion_01_trace_out_matches_closed_form() {
    let start = Instant::now();
    let mut worst = 0.0f64;
    for ti in 0..=10 {
        for gi in 0..8 {
            for pi in 0..8 {
                let (t, g, p) = (ti as f64 / 10.0, gi as f64 * PI / 4.0, pi as f64 * PI / 4.0);
                let probs = detection_probabilities(&build_joint_state(ObjectResponse::new(t, g).unwrap(), p)).unwrap();
                let expect_g = 0.5 * (1.0 + t * (g + p).cos());
                let expect_h = 0.5 * (1.0 - t * (g + p).cos());
                worst = worst.max((probs.p_g - expect_g).abs()).max((probs.p_h - expect_h).abs());
            }
        }
    }
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "1",
        "trace-out equals closed form on 11x8x8 grid",
        worst < 1e-12 && elapsed < 1.0,
        format!("max deviation {worst:.2e}, {elapsed:.3} s"),
    );
}

/// 8×8 block at the sensor centre: small enough that read noise stays far
/// from the zero clamp once the photon level is lowered.
fn centre_block(s: &Scenario) -> Roi {
    Roi::Rect {
        row: s.geometry.rows / 2 - 4,
        col: s.geometry.cols / 2 - 4,
        rows: 8,
        cols: 8,
    }
}

/// Peak photon rate giving a visibility standard error of `target` for an
/// `steps`-point scan over `roi`, from var(V) = σ²(2 + V²)/(n A²) with
/// σ² = g²·N_pe + N_pix·σ_read² and A = g·N_pe.
fn calibrated_peak(s: &Scenario, roi: &Roi, steps: usize, target: f64) -> f64 {
    let exp = Experiment::new(s).unwrap();
    let idx = roi.indices(exp.shape()).unwrap();
    let cam = &s.camera;
    let pe_now: f64 = idx.iter().map(|&i| exp.flux().as_slice()[i]).sum::<f64>() * cam.quantum_efficiency * 0.5;
    let v = s.effective_visibility();
    let k = target * target * steps as f64 / (2.0 + v * v);
    let g2 = cam.em_gain * cam.em_gain;
    let read = idx.len() as f64 * cam.read_noise_sigma * cam.read_noise_sigma;
    // k·g²·N² − g²·N − read = 0
    let (a, b, c) = (k * g2, -g2, -read);
    let pe = (-b + (b * b - 4.0 * a * c).sqrt()) / (2.0 * a);
    s.peak_photons_per_pixel * pe / pe_now
}

#[test]
fn criterion_02_default_fringe_visibility() {
    let start = Instant::now();
    let s = noiseless(Preset::NoObject);
    let exact = fit_fringe(&pipeline::phase_scan(&Experiment::new(&s).unwrap(), 24, 1.0, &Roi::default_for(&s)).unwrap())
        .unwrap()
        .visibility;

    let mut noisy = build_scenario(Preset::NoObject);
    let roi = centre_block(&noisy);
    noisy.peak_photons_per_pixel = calibrated_peak(&noisy, &roi, 24, 0.01);
    let vs: Vec<f64> = (0..100u64)
        .map(|seed| {
            let mut s = noisy.clone();
            s.camera.rng_seed = seed;
            let exp = Experiment::new(&s).unwrap();
            fit_fringe(&pipeline::phase_scan(&exp, 24, 1.0, &roi).unwrap()).unwrap().visibility
        })
        .collect();
    let inside = vs.iter().filter(|v| (0.74..=0.80).contains(*v)).count();
    let mean = vs.iter().sum::<f64>() / vs.len() as f64;
    let sd = (vs.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (vs.len() - 1) as f64).sqrt();
    let elapsed = start.elapsed().as_secs_f64();
    verdict(
        "2",
        "default fringe visibility",
        (exact - 0.77).abs() < 1e-4 && inside >= 95 && (0.007..0.013).contains(&sd) && elapsed < 30.0,
        format!(
            "noiseless V = {exact:.6}; noisy {inside}/100 in [0.74, 0.80], mean {mean:.4}, sd {sd:.4} \
             (peak {:.3} photons/px); {elapsed:.2} s",
            noisy.peak_photons_per_pixel
        ),
    );
}

#[test]
fn criterion_03_blocked_control_has_no_fringe() {
    let s = noiseless(Preset::BlockedControl);
    let roi = Roi::default_for(&s);
    let exact = fit_fringe(&pipeline::phase_scan(&Experiment::new(&s).unwrap(), 24, 1.0, &roi).unwrap())
        .unwrap()
        .visibility;
    let worst_noisy = (0..10u64)
        .map(|seed| {
            let mut s = build_scenario(Preset::BlockedControl);
            s.camera.rng_seed = seed;
            let exp = Experiment::new(&s).unwrap();
            fit_fringe(&pipeline::phase_scan(&exp, 24, 1.0, &roi).unwrap()).unwrap().visibility
        })
        .fold(0.0, f64::max);
    verdict(
        "3",
        "blocked idler gives zero visibility",
        exact < 1e-9 && worst_noisy < 0.02,
        format!("noiseless V = {exact:.2e}; noisy max V over 10 seeds = {worst_noisy:.2e}"),
    );
}

#[test]
fn criterion_04_cardboard_mask_structure() {
    let cut = Experiment::new(&noiseless(Preset::CardboardCutout)).unwrap();
    let plain = Experiment::new(&noiseless(Preset::NoObject)).unwrap();
    let v_eff = cut.effective_visibility();
    let (g, h) = cut.expected_frames(0.0).unwrap();
    let (g0, h0) = plain.expected_frames(0.0).unwrap();

    let opaque = pixels_where(cut.transmittance(), |t| t == 0.0);
    let open = pixels_where(cut.transmittance(), |t| t == 1.0);
    let diff = |i: usize| g.as_slice()[i] - h.as_slice()[i];
    let sum = |i: usize| g.as_slice()[i] + h.as_slice()[i];
    let opaque_max = opaque.iter().map(|&i| diff(i).abs()).fold(0.0, f64::max);
    let open_rel = open
        .iter()
        .filter(|&&i| sum(i) > 0.0)
        .map(|&i| (diff(i) - v_eff * sum(i)).abs() / sum(i))
        .fold(0.0, f64::max);
    let sum_rel = (0..g.len())
        .filter(|&i| g0.as_slice()[i] + h0.as_slice()[i] > 0.0)
        .map(|i| (sum(i) - (g0.as_slice()[i] + h0.as_slice()[i])).abs() / (g0.as_slice()[i] + h0.as_slice()[i]))
        .fold(0.0, f64::max);

    // the written integer frames agree on the opaque pixels too
    let (fg, fh) = cut.frames(0.0, 0).unwrap();
    let frame_opaque_zero = opaque.iter().all(|&i| fg.counts.as_slice()[i] == fh.counts.as_slice()[i]);

    verdict(
        "4",
        "cardboard DIFF/SUM structure",
        !opaque.is_empty()
            && !open.is_empty()
            && opaque_max == 0.0
            && frame_opaque_zero
            && open_rel < 1e-9
            && sum_rel < 1e-9,
        format!(
            "{} opaque px max |DIFF| = {opaque_max:e}; {} open px max rel |DIFF - v_eff SUM| = {open_rel:.1e}; \
             SUM vs no object max rel = {sum_rel:.1e}",
            opaque.len(),
            open.len()
        ),
    );
}

#[test]
fn criterion_05_silicon_cat_contrast_flip() {
    let exp = Experiment::new(&noiseless(Preset::SiliconCat)).unwrap();
    let v_eff = exp.effective_visibility();
    let step = qcore::canonical_phase(optics::etch_phase(SILICON_ETCH_NM, 3.48, 1550.0));
    let etched = pixels_where(exp.idler_phase(), |p| (p - step).abs() < 1e-9);
    let plain = pixels_where(exp.idler_phase(), |p| p == 0.0);
    let (g, h) = exp.expected_frames(0.0).unwrap();
    let (ce, cu) = (contrast(&g, &h, &etched), contrast(&g, &h, &plain));
    verdict(
        "5",
        "silicon cat etched/unetched contrast",
        !etched.is_empty() && ce * cu < 0.0 && ce.abs() >= 0.95 * v_eff && cu.abs() >= 0.95 * v_eff,
        format!(
            "step {:.4}π; contrast etched {ce:.5}, unetched {cu:.5}, v_eff {v_eff}",
            step / PI
        ),
    );
}

#[test]
fn criterion_06_silica_psi_visibility_by_placement() {
    // signal path: the etch should be invisible
    let hidden = Experiment::new(&noiseless(Preset::SilicaPsiSignal)).unwrap();
    let reference = Experiment::new(&noiseless(Preset::NoObject)).unwrap();
    let (g1, h1) = hidden.expected_frames(0.0).unwrap();
    let (g0, h0) = reference.expected_frames(0.0).unwrap();
    let worst = g1
        .iter()
        .zip(g0.iter())
        .chain(h1.iter().zip(h0.iter()))
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let signal_step = hidden.signal_phase().iter().cloned().fold(0.0, f64::max);

    // idler path: contrast flips with |cos(1.058π)| magnitude
    let exp = Experiment::new(&noiseless(Preset::SilicaPsiIdler)).unwrap();
    let v_eff = exp.effective_visibility();
    let n = IndexTable::fused_silica().index_at(1515.0).unwrap();
    let step = qcore::canonical_phase(optics::etch_phase(SILICA_ETCH_NM, n, 1515.0));
    let etched = pixels_where(exp.idler_phase(), |p| (p - step).abs() < 1e-9);
    let plain = pixels_where(exp.idler_phase(), |p| p == 0.0);
    let (g, h) = exp.expected_frames(0.0).unwrap();
    let (ce, cu) = (contrast(&g, &h, &etched), contrast(&g, &h, &plain));
    let target = (1.058 * PI).cos().abs() * v_eff;
    let idler_ok = !etched.is_empty() && ce * cu < 0.0 && (ce.abs() - target).abs() <= 0.02 * target;

    verdict(
        "6",
        "silica psi invisible in signal path, flipped in idler path",
        worst < 1e-9 && idler_ok,
        format!(
            "signal path: step {:.4}π, max |frame - NO_OBJECT| = {worst:.3} counts; \
             idler path: step {:.4}π, contrast etched {ce:.5}, unetched {cu:.5}, target |{target:.5}|",
            signal_step / PI,
            step / PI
        ),
    );
}

#[test]
fn criterion_07_interaction_free_coincidences() {
    let shots = 100_000u64;
    let mut lines = Vec::new();
    let mut pass = true;
    for eta in [1.0, 0.6] {
        let mut s = build_scenario(Preset::InteractionFree);
        s.idler_detector_efficiency = eta;
        let exp = Experiment::new(&s).unwrap();
        let map = pipeline::interaction_free_map(&exp).unwrap();
        let opaque = pixels_where(exp.transmittance(), |t| t == 0.0);
        let open = pixels_where(exp.transmittance(), |t| t == 1.0);
        let opaque_err = opaque.iter().map(|&i| (map.as_slice()[i] - eta / 4.0).abs()).fold(0.0, f64::max);
        let open_max = open.iter().map(|&i| map.as_slice()[i]).fold(0.0, f64::max);
        pass &= !opaque.is_empty() && opaque_err < 1e-15 && open_max == 0.0;

        for (label, t, index) in [("opaque", 0.0, 0u64), ("open", 1.0, 1)] {
            let table = qcore::coincidence_table(&build_joint_state(ObjectResponse::new(t, 0.0).unwrap(), 0.0), eta).unwrap();
            let p = table.h_click;
            let hits = pipeline::sample_coincidences(&table, shots, 7, index)[2] as f64;
            let freq = hits / shots as f64;
            let sigma = (p * (1.0 - p) / shots as f64).sqrt();
            let ok = if p == 0.0 { hits == 0.0 } else { (freq - p).abs() <= 3.0 * sigma };
            pass &= ok;
            lines.push(format!("η={eta} {label}: MC {freq:.5} vs {p:.5} (σ {sigma:.1e})"));
        }
        lines.push(format!("η={eta} closed form: opaque err {opaque_err:.1e}, open max {open_max:e}"));
    }
    verdict("7", "interaction-free coincidence map", pass, lines.join("; "));
}

#[test]
fn criterion_08_geometry_and_coherence_numerics() {
    let g = ImagingGeometry {
        relay_focal_mm: 75.0,
        output_focal_mm: 150.0,
        pixel_pitch_um: 16.0,
        rows: 256,
        cols: 256,
    };
    let m = optics::magnification(&g, &WavelengthTriple::new(532.0, 810.0, 1550.0));
    let lc = optics::coherence_length(810.0, 3.0);
    let r1 = optics::energy_conservation_residual(&WavelengthTriple::new(532.0, 810.0, 1550.0));
    let r2 = optics::energy_conservation_residual(&WavelengthTriple::new(532.0, 820.0, 1515.0));
    verdict(
        "8",
        "magnification, coherence length, energy conservation",
        (m - 1.0452).abs() <= 1e-4 && (lc - 0.2187).abs() < 5e-5 && r1.abs() < 2e-6 && r2.abs() < 2e-6,
        format!("M = {m:.5}, l_c = {lc:.5} mm, residuals {r1:.2e} and {r2:.2e} nm^-1"),
    );
}

#[test]
fn criterion_09_silica_two_pi_etch_depth() {
    let d = cli::cmd_design_etch("silica", TAU, 820.0).unwrap();
    verdict(
        "9",
        "silica 2π etch depth at 820 nm",
        (1805.0..=1815.0).contains(&d.depth_nm),
        format!("depth {:.2} nm (n = {:.6})", d.depth_nm, d.refractive_index),
    );
}

#[test]
fn criterion_10_no_induced_emission() {
    let powers = [50.0, 100.0, 150.0, 200.0, 250.0, 300.0];
    let exact = pipeline::induced_emission_check(&noiseless(Preset::InducedEmissionCheck), &powers, 1).unwrap();
    let exact_ok = exact.rows.iter().all(|r| r.ratio == 1.0);
    let noisy = pipeline::induced_emission_check(&build_scenario(Preset::InducedEmissionCheck), &powers, 40).unwrap();
    let fit = noisy.fit.expect("six powers give a line fit");
    verdict(
        "10",
        "blocked/unblocked NL2 rate ratio independent of power",
        exact_ok && fit.slope.abs() <= 3.0 * fit.slope_se,
        format!(
            "noiseless ratios all 1.0: {exact_ok}; noisy slope ({:.2e} ± {:.2e}) per mW",
            fit.slope, fit.slope_se
        ),
    );
}

fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut files = BTreeMap::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_string_lossy().into_owned();
        let mut bytes = std::fs::read(&path).unwrap();
        if name == "report.json" {
            // wall time is the one field expected to vary
            let mut v: serde_json::Value = serde_json::from_slice(&bytes).unwrap();
            v.as_object_mut().unwrap().remove("wall_time_s");
            bytes = serde_json::to_vec(&v).unwrap();
        }
        files.insert(name, bytes);
    }
    files
}

fn run_all(threads: usize, out: &Path) -> BTreeMap<String, Vec<u8>> {
    if out.exists() {
        std::fs::remove_dir_all(out).unwrap();
    }
    let with = |preset: &str| ScenarioArgs {
        seed: 1234,
        threads,
        ..ScenarioArgs::preset(preset)
    };
    let mut all = BTreeMap::new();
    let mut collect = |tag: &str, sub: &Path| {
        for (k, v) in snapshot(sub) {
            all.insert(format!("{tag}/{k}"), v);
        }
    };
    cli::cmd_run(&with("silicon_cat"), &out.join("run")).unwrap();
    collect("run", &out.join("run"));
    cli::cmd_scan(&with("no_object"), 24, 1.0, None, &out.join("scan")).unwrap();
    collect("scan", &out.join("scan"));
    cli::cmd_ifm(&with("interaction_free"), 10_000, &out.join("ifm")).unwrap();
    collect("ifm", &out.join("ifm"));
    cli::cmd_emission_check(&with("induced_emission_check"), &[50.0, 150.0, 300.0], 10, &out.join("emission")).unwrap();
    collect("emission", &out.join("emission"));
    let etch = cli::cmd_design_etch("silica", TAU, 820.0).unwrap();
    all.insert("design-etch".into(), serde_json::to_vec(&etch).unwrap());
    all.insert("validate".into(), cli::cmd_validate(&with("silica_psi_idler")).unwrap().into_bytes());
    all
}

#[test]
fn criterion_11_determinism_across_repeats_and_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let mut runs = Vec::new();
    for threads in [1, 4] {
        runs.push((threads, run_all(threads, &out)));
        runs.push((threads, run_all(threads, &out)));
    }
    let first = &runs[0].1;
    let mismatches: Vec<String> = runs
        .iter()
        .flat_map(|(t, files)| {
            files
                .iter()
                .filter(|(k, v)| first.get(*k) != Some(v))
                .map(move |(k, _)| format!("{k} (threads {t})"))
        })
        .collect();
    verdict(
        "11",
        "byte-identical outputs for fixed seed",
        mismatches.is_empty() && first.len() >= 10,
        format!(
            "{} artifacts compared over 4 runs (threads 1 and 4); mismatches: {:?}",
            first.len(),
            mismatches
        ),
    );
}
