use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use std::process::ExitCode;

use qiup::cli::{self, ScenarioArgs, ScenarioSource};
use qiup::pipeline::Roi;
use qiup::Error;

#[derive(Parser)]
#[command(name = "qiup", version, about = "Imaging with undetected photons: interferometer simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate both beam-splitter outputs and write G/H/SUM/DIFF frames.
    Run {
        #[command(flatten)]
        scenario: ScenarioOpts,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Scan the pump phase, record ROI totals at G and fit the fringe.
    Scan {
        #[command(flatten)]
        scenario: ScenarioOpts,
        #[arg(long, default_value_t = 24)]
        steps: usize,
        #[arg(long, default_value_t = 1.0)]
        cycles: f64,
        /// Rectangle `row,col,rows,cols`; default is the central disk of half the waist.
        #[arg(long)]
        roi: Option<String>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Interaction-free coincidence map P(H and idler click).
    Ifm {
        #[command(flatten)]
        scenario: ScenarioOpts,
        /// Monte Carlo pairs per pixel class (0 disables).
        #[arg(long, default_value_t = 100_000)]
        shots: u64,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Compare NL2 rates with the idler path blocked and open across pump powers.
    EmissionCheck {
        #[command(flatten)]
        scenario: ScenarioOpts,
        /// Comma-separated pump powers in mW.
        #[arg(long, default_value = "50,100,150,200,250,300")]
        powers: String,
        #[arg(long, default_value_t = 40)]
        repetitions: u32,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Etch depth that produces a target phase.
    DesignEtch {
        /// Built-in material (silica, silicon) or a JSON file of [λ_nm, n] pairs.
        #[arg(long)]
        material: String,
        /// Target phase: radians, or with a `deg` or `pi` suffix.
        #[arg(long, allow_hyphen_values = true)]
        phase: String,
        #[arg(long)]
        wavelength: f64,
    },
    /// Check a scenario and print its expanded JSON.
    Validate {
        #[command(flatten)]
        scenario: ScenarioOpts,
    },
}

#[derive(Args)]
struct ScenarioOpts {
    /// Built-in preset name.
    #[arg(long, conflicts_with = "scenario")]
    preset: Option<String>,
    /// Scenario JSON file.
    #[arg(long)]
    scenario: Option<PathBuf>,
    /// Phase-object JSON document replacing the scenario's object.
    #[arg(long)]
    object: Option<PathBuf>,
    #[arg(long, env = "QIUP_SEED", default_value_t = 0)]
    seed: u64,
    /// Exact expectations instead of random draws.
    #[arg(long)]
    noiseless: bool,
    /// Setup visibility v0.
    #[arg(long)]
    v0: Option<f64>,
    /// Block the NL1 idler path.
    #[arg(long)]
    blocked: bool,
    /// Pump phase: radians, or with a `deg` or `pi` suffix.
    #[arg(long, allow_hyphen_values = true)]
    phi: Option<String>,
    #[arg(long)]
    pump_power: Option<f64>,
    /// Path-length mismatch in mm.
    #[arg(long)]
    mismatch: Option<f64>,
    /// Idler detector efficiency.
    #[arg(long)]
    eta: Option<f64>,
    /// Peak photons per pixel per exposure at 150 mW.
    #[arg(long)]
    peak_photons: Option<f64>,
    /// Worker threads (0 = automatic); never changes results.
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

impl ScenarioOpts {
    fn resolve(&self, default_preset: &str) -> Result<ScenarioArgs, Error> {
        let source = match (&self.preset, &self.scenario) {
            (_, Some(path)) => ScenarioSource::File(path.clone()),
            (Some(name), None) => ScenarioSource::Preset(name.clone()),
            (None, None) => ScenarioSource::Preset(default_preset.to_string()),
        };
        Ok(ScenarioArgs {
            source,
            object: self.object.clone(),
            seed: self.seed,
            noiseless: self.noiseless,
            setup_visibility: self.v0,
            blocked: self.blocked,
            pump_phase_rad: self.phi.as_deref().map(cli::parse_angle).transpose()?,
            pump_power_mw: self.pump_power,
            path_mismatch_mm: self.mismatch,
            idler_efficiency: self.eta,
            peak_photons: self.peak_photons,
            threads: self.threads,
        })
    }
}

fn parse_roi(text: &str) -> Result<Roi, Error> {
    let parts: Vec<usize> = text
        .split(',')
        .map(|p| p.trim().parse::<usize>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::OutOfRange(format!("bad ROI '{text}', expected row,col,rows,cols")))?;
    match parts[..] {
        [row, col, rows, cols] => Ok(Roi::Rect { row, col, rows, cols }),
        _ => Err(Error::OutOfRange(format!("bad ROI '{text}', expected row,col,rows,cols"))),
    }
}

fn parse_powers(text: &str) -> Result<Vec<f64>, Error> {
    text.split(',')
        .map(|p| p.trim().parse::<f64>())
        .collect::<Result<_, _>>()
        .map_err(|_| Error::OutOfRange(format!("bad power list '{text}'")))
}

fn report_paths(report: &cli::RunReport) {
    for f in &report.files {
        eprintln!("wrote {}", f.display());
    }
}

fn execute(cmd: Command) -> Result<(), Error> {
    match cmd {
        Command::Run { scenario, out } => {
            let report = cli::cmd_run(&scenario.resolve("no_object")?, &out)?;
            report_paths(&report);
        }
        Command::Scan {
            scenario,
            steps,
            cycles,
            roi,
            out,
        } => {
            let roi = roi.as_deref().map(parse_roi).transpose()?;
            let (report, fit) = cli::cmd_scan(&scenario.resolve("no_object")?, steps, cycles, roi, &out)?;
            report_paths(&report);
            eprintln!("visibility {:.6} ± {:.6}", fit.visibility, fit.visibility_se);
        }
        Command::Ifm { scenario, shots, out } => {
            let report = cli::cmd_ifm(&scenario.resolve("interaction_free")?, shots, &out)?;
            report_paths(&report);
        }
        Command::EmissionCheck {
            scenario,
            powers,
            repetitions,
            out,
        } => {
            let powers = parse_powers(&powers)?;
            let (report, check) =
                cli::cmd_emission_check(&scenario.resolve("induced_emission_check")?, &powers, repetitions, &out)?;
            report_paths(&report);
            if let Some(fit) = check.fit {
                eprintln!("ratio slope {:.3e} ± {:.3e} per mW", fit.slope, fit.slope_se);
            }
        }
        Command::DesignEtch {
            material,
            phase,
            wavelength,
        } => {
            let design = cli::cmd_design_etch(&material, cli::parse_angle(&phase)?, wavelength)?;
            println!("{:.4}", design.depth_nm);
            eprintln!(
                "n = {:.6} at {} nm; depth {:.4} nm gives {:.9} rad (wrapped to [0, 2π))",
                design.refractive_index, design.wavelength_nm, design.depth_nm, design.check_phase_rad
            );
        }
        Command::Validate { scenario } => {
            println!("{}", cli::cmd_validate(&scenario.resolve("no_object")?)?);
            eprintln!("scenario is valid");
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(cli::exit_code(&e) as u8)
        }
    }
}
