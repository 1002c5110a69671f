use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use selfmad_cli::commands::{cmd_eval, cmd_inspect, cmd_synth, cmd_train, SynthArgs};
use selfmad_cli::{CliError, PipelineConfig};

#[derive(Parser)]
#[command(
    name = "selfmad",
    version,
    about = "Deterministic morphing-artifact synthesis, detection and evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize the {OS, AS, MS, FMS} quadruple per input image.
    Synth {
        /// Directory of bona fide input images (ppm/pnm/pgm/png).
        #[arg(long)]
        input: PathBuf,
        /// Directory of <stem>.seg.png segmentation maps.
        #[arg(long)]
        seg: Option<PathBuf>,
        /// JSONL bounding-box sidecar file.
        #[arg(long)]
        bbox: Option<PathBuf>,
        /// Output directory (images/ and manifest.jsonl).
        #[arg(long)]
        out: PathBuf,
        /// Pipeline config JSON; defaults apply when omitted.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Overrides the config seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Fraction of source images held out as the test split.
        #[arg(long, default_value_t = 0.2)]
        holdout: f64,
    },
    /// Train the detector on the manifest's training split.
    Train {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        /// Model output path; loss trace and digest sidecar are written
        /// next to it.
        #[arg(long)]
        model_out: PathBuf,
    },
    /// Score a manifest and write JSONL scores plus the metrics report.
    Eval {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        scores_out: PathBuf,
        #[arg(long)]
        report_out: PathBuf,
        /// Restrict to one split ("train" or "test").
        #[arg(long)]
        split: Option<String>,
    },
    /// Write spectrum and residual debug rasters for one image.
    Inspect {
        #[arg(long)]
        image: PathBuf,
        /// Output prefix; writes <prefix>.spectrum.pgm and
        /// <prefix>.residual.pgm.
        #[arg(long)]
        out_prefix: PathBuf,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth { input, seg, bbox, out, config, seed, holdout } => {
            let config = PipelineConfig::load(config.as_deref(), seed)?;
            let records = cmd_synth(&SynthArgs {
                input_dir: input,
                seg_dir: seg,
                bbox_file: bbox,
                out_dir: out,
                config,
                holdout,
            })?;
            println!("synthesized {} samples", records.len());
        }
        Command::Train { manifest, config, seed, model_out } => {
            let config = PipelineConfig::load(config.as_deref(), seed)?;
            let trace = cmd_train(&manifest, &config, &model_out)?;
            println!(
                "trained {} epochs, final mean loss {:.6}",
                trace.len(),
                trace.last().copied().unwrap_or(f64::NAN)
            );
        }
        Command::Eval { manifest, model, scores_out, report_out, split } => {
            let report = cmd_eval(&manifest, &model, &scores_out, &report_out, split.as_deref())?;
            println!("eer {:.6}", report.eer);
        }
        Command::Inspect { image, out_prefix } => {
            cmd_inspect(&image, &out_prefix)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
