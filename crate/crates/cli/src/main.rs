use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand};
use fronthaul::codec::{self, codebook, CodecError, CompressedFrame, MantissaProfile};
use fronthaul::harness::{self, read_grid, write_grid, HarnessError, ReportRecord, ScenarioConfig};
use fronthaul::optimizer::TrainingMode;

/// Beamspace fronthaul compression simulator.
#[derive(Parser)]
#[command(name = "fronthaul", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run every scenario and noise draw of a config.
    Simulate {
        config: PathBuf,
        #[command(flatten)]
        out: Output,
    },
    /// Sweep randsvd condition numbers against uniform mantissa widths.
    SweepCond {
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        conds: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        bits: Vec<u8>,
        #[arg(long, default_value_t = 50)]
        seeds: usize,
        #[command(flatten)]
        out: Output,
    },
    /// Train a mantissa profile and write it as `beam_index,bits` CSV.
    Train {
        config: PathBuf,
        #[arg(long, value_parser = parse_mode)]
        mode: TrainingMode,
        #[command(flatten)]
        out: Output,
    },
    /// Single-user compression tables for 16 and 32 beams, DFT and SVD.
    ReproduceTables {
        config: PathBuf,
        /// Directory for `tables.csv` and `profiles.csv`.
        #[arg(long, short = 'o', default_value = ".")]
        out_dir: PathBuf,
    },
    /// Encode or decode grid files.
    #[command(subcommand)]
    Codec(CodecCommand),
    /// Print a Lloyd-Max codebook as `index,level,threshold` CSV.
    Codebook {
        #[arg(long)]
        bits: u32,
        #[command(flatten)]
        out: Output,
    },
}

#[derive(Subcommand)]
enum CodecCommand {
    /// FHGR grid to FHC1 frame.
    Encode {
        input: PathBuf,
        output: PathBuf,
        /// Uniform mantissa width for every beam.
        #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
        bits: Option<u8>,
        /// Per-beam widths as `beam_index,bits` CSV.
        #[arg(long)]
        profile: Option<PathBuf>,
        #[arg(long, default_value_t = 4)]
        b_exp: u8,
        #[arg(long, default_value_t = 12)]
        n12: usize,
    },
    /// FHC1 frame to FHGR grid.
    Decode { input: PathBuf, output: PathBuf },
}

#[derive(Args)]
struct Output {
    /// CSV destination; stdout when omitted.
    #[arg(long, short = 'o')]
    output: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<TrainingMode, String> {
    s.parse()
}

fn load_config(path: &Path) -> Result<ScenarioConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    let cfg = ScenarioConfig::from_toml(&text).with_context(|| format!("in {}", path.display()))?;
    eprintln!("# resolved config\n{}", cfg.to_toml());
    Ok(cfg)
}

fn emit<R: ReportRecord>(rows: &[R], out: &Output) -> Result<()> {
    match &out.output {
        Some(path) => harness::emit_report(rows, path).with_context(|| format!("writing {}", path.display())),
        None => write_stdout(&harness::to_csv_string(rows)),
    }
}

fn write_stdout(text: &str) -> Result<()> {
    std::io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { config, out } => {
            let cfg = load_config(&config)?;
            emit(&harness::simulate(&cfg)?.rows, &out)
        }
        Command::SweepCond {
            config,
            conds,
            bits,
            seeds,
            out,
        } => {
            let cfg = load_config(&config)?;
            emit(&harness::sweep_cond(&cfg, &conds, &bits, seeds)?.rows, &out)
        }
        Command::Train { config, mode, out } => {
            let cfg = load_config(&config)?;
            let t = harness::train(&cfg, mode)?;
            eprintln!(
                "trained {} on {} scenarios: mean bits {:.3}, CR {:.4} (6-bit {:.4}), EVM {:.4}% (6-bit {:.4}%)",
                t.profile,
                t.scenarios,
                t.profile.mean_bits(),
                t.cr,
                t.baseline_cr,
                t.compression_evm_percent,
                t.baseline_evm_percent
            );
            let csv = t.profile.to_csv();
            match &out.output {
                Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display())),
                None => write_stdout(&csv),
            }
        }
        Command::ReproduceTables { config, out_dir } => {
            let cfg = load_config(&config)?;
            let report = harness::reproduce_tables(&cfg)?;
            fs::create_dir_all(&out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
            harness::emit_report(&report.tables, &out_dir.join("tables.csv"))?;
            harness::emit_report(&report.profiles, &out_dir.join("profiles.csv"))?;
            Ok(())
        }
        Command::Codec(CodecCommand::Encode {
            input,
            output,
            bits,
            profile,
            b_exp,
            n12,
        }) => {
            let bytes = fs::read(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let grid = read_grid(&bytes).with_context(|| format!("in {}", input.display()))?;
            let profile = match (bits, profile) {
                (Some(b), _) => MantissaProfile::uniform(grid.n_streams(), b)?,
                (None, Some(path)) => {
                    let text = fs::read_to_string(&path).with_context(|| format!("cannot read {}", path.display()))?;
                    MantissaProfile::from_csv(&text)?
                }
                (None, None) => unreachable!("clap requires one of --bits and --profile"),
            };
            let frame = codec::encode(&grid, &profile, b_exp, n12)?;
            fs::write(&output, frame.to_bytes()).with_context(|| format!("writing {}", output.display()))?;
            eprintln!(
                "{} beams x {} RBs, {} payload bits, {} saturated blocks",
                frame.n_beam,
                frame.n_rb,
                frame.payload_bits(),
                frame.saturation_count
            );
            Ok(())
        }
        Command::Codec(CodecCommand::Decode { input, output }) => {
            let bytes = fs::read(&input).with_context(|| format!("cannot read {}", input.display()))?;
            let frame = CompressedFrame::from_bytes(&bytes).with_context(|| format!("in {}", input.display()))?;
            let grid = codec::decode(&frame)?;
            fs::write(&output, write_grid(&grid)).with_context(|| format!("writing {}", output.display()))?;
            Ok(())
        }
        Command::Codebook { bits, out } => {
            if !(1..=codec::MAX_CODEBOOK_BITS).contains(&bits) {
                return Err(CodecError::InvalidParameters(format!(
                    "codebook bits must be in 1..={}, got {bits}",
                    codec::MAX_CODEBOOK_BITS
                ))
                .into());
            }
            let cb = codebook(bits);
            let mut csv = String::from("index,level,threshold\n");
            for (i, level) in cb.levels.iter().enumerate() {
                let t = cb.thresholds.get(i).map(|t| format!("{t:e}")).unwrap_or_default();
                csv.push_str(&format!("{i},{level:e},{t}\n"));
            }
            eprintln!("distortion {:e}", cb.distortion());
            match &out.output {
                Some(path) => fs::write(path, csv).with_context(|| format!("writing {}", path.display())),
                None => write_stdout(&csv),
            }
        }
    }
}

/// 2 for bad configuration or arguments, 3 for numerical failures, 1 for
/// everything else (I/O, malformed input files).
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<HarnessError>() {
            return match e {
                HarnessError::Config(_) => 2,
                HarnessError::Stage { .. } => 3,
                _ => 1,
            };
        }
        if let Some(e) = cause.downcast_ref::<CodecError>() {
            return match e {
                CodecError::InvalidProfile(_) | CodecError::InvalidParameters(_) => 2,
                CodecError::ShapeMismatch | CodecError::ZeroReference => 3,
                _ => 1,
            };
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
