use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rydnoise::bundle::{compute_bundle, csnr_csv, run_scenario, thread_pool};
use rydnoise::config::{validate_config, Provenance, ScenarioConfig};
use rydnoise::Error;

const EXIT_CONFIG: u8 = 1;
const EXIT_NUMERICAL: u8 = 2;
const EXIT_SUPPRESSED: u8 = 3;

#[derive(Parser)]
#[command(name = "rydnoise", version, about = "Rydberg EIT/Autler-Townes spectra under band-limited RF noise")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a configuration and list where each value came from.
    Validate { config: PathBuf },
    /// Run the full sweep and write spectra, tables and plot data.
    Run {
        config: PathBuf,
        /// Output directory (default: `run.output_dir` from the config).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: `run.threads`, 0 = all cores).
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Print one spectrum as CSV.
    Spectrum {
        config: PathBuf,
        /// CW power at the horn input, W.
        #[arg(long)]
        power: f64,
        /// Noise attenuation in dB, or `none` for no noise.
        #[arg(long, allow_hyphen_values = true)]
        atten: String,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Ω_RF = 0 line offsets for every configured attenuation.
    Table1 {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Field error versus CSNR over the configured powers and attenuations.
    Csnr {
        config: PathBuf,
        #[arg(long)]
        threads: Option<usize>,
    },
}

fn load(path: &PathBuf) -> Result<ScenarioConfig, ExitCode> {
    validate_config(path).map_err(|diags| {
        for d in diags {
            eprintln!("{}: {d}", path.display());
        }
        ExitCode::from(EXIT_CONFIG)
    })
}

fn fail(e: Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(match e.root() {
        Error::InvalidParameter { .. }
        | Error::Parse { .. }
        | Error::InvalidState(_)
        | Error::MissingSeries { .. }
        | Error::SelectionRule { .. }
        | Error::Io(_) => EXIT_CONFIG,
        Error::SuppressedPeak => EXIT_SUPPRESSED,
        _ => EXIT_NUMERICAL,
    })
}

fn in_pool<R: Send>(threads: usize, f: impl FnOnce() -> R + Send) -> Result<R, Error> {
    if threads == 0 {
        return Ok(f());
    }
    Ok(thread_pool(threads)?.install(f))
}

fn parse_atten(s: &str) -> Result<Option<f64>, ExitCode> {
    if s == "none" {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| {
        eprintln!("error: --atten expects a number of dB or `none`, got `{s}`");
        ExitCode::from(EXIT_CONFIG)
    })
}

fn run(cli: Cli) -> Result<ExitCode, ExitCode> {
    let mut stdout = std::io::stdout().lock();
    match cli.command {
        Command::Validate { config } => {
            let cfg = load(&config)?;
            let user = cfg.provenance.iter().filter(|r| r.source == Provenance::User).count();
            writeln!(stdout, "{}: ok ({} keys from file, {} defaults)", config.display(), user, cfg.provenance.len() - user)
                .ok();
            write!(stdout, "{}", cfg.describe()).ok();
        }
        Command::Run { config, out, threads } => {
            let cfg = load(&config)?;
            let dir = out.unwrap_or_else(|| cfg.run.output_dir.clone());
            let threads = threads.unwrap_or(cfg.run.threads);
            let report = run_scenario(&cfg, &dir, threads).map_err(fail)?;
            writeln!(
                stdout,
                "{} spectra written to {} (outputs sha256 {})",
                report.bundle.entries.len(),
                dir.display(),
                report.outputs_hash
            )
            .ok();
            let suppressed = report.bundle.suppressed();
            if suppressed > 0 {
                eprintln!("warning: {suppressed} spectra without any EIT peak above threshold");
                return Ok(ExitCode::from(EXIT_SUPPRESSED));
            }
        }
        Command::Spectrum { config, power, atten, threads } => {
            let cfg = load(&config)?;
            let att = parse_atten(&atten)?;
            let scenario = cfg.scenario::<f64>().map_err(fail)?;
            let threads = threads.unwrap_or(cfg.run.threads);
            let s = in_pool(threads, || scenario.spectrum(power, att)).map_err(fail)?.map_err(fail)?;
            s.write_csv(&mut stdout).map_err(fail)?;
        }
        Command::Table1 { config, threads } => {
            let cfg = load(&config)?;
            let scenario = cfg.scenario::<f64>().map_err(fail)?;
            let threads = threads.unwrap_or(cfg.run.threads);
            writeln!(stdout, "# descriptor={}", cfg.noise.descriptor).ok();
            writeln!(stdout, "attenuation_dB,noise_power_W,offset_Hz,status").ok();
            let mut suppressed = false;
            for &a in &cfg.noise.attenuations_db {
                let r = in_pool(threads, || scenario.zero_rf_offset(Some(a))).map_err(fail)?;
                let p = scenario.noise_power(a);
                match r {
                    Ok(off) => writeln!(stdout, "{a},{p},{off},ok").ok(),
                    Err(e) if matches!(e.root(), Error::SuppressedPeak) => {
                        suppressed = true;
                        writeln!(stdout, "{a},{p},,suppressed").ok()
                    }
                    Err(e) => return Err(fail(e)),
                };
            }
            if suppressed {
                return Ok(ExitCode::from(EXIT_SUPPRESSED));
            }
        }
        Command::Csnr { config, threads } => {
            let cfg = load(&config)?;
            let bundle = compute_bundle(&cfg, threads.unwrap_or(cfg.run.threads)).map_err(fail)?;
            write!(stdout, "{}", csnr_csv(&bundle)).ok();
            if bundle.suppressed() > 0 {
                return Ok(ExitCode::from(EXIT_SUPPRESSED));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(c) | Err(c) => c,
    }
}
