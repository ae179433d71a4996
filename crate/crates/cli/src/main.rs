use clap::Parser;
use std::path::PathBuf;
use std::process::ExitCode;
use twodcs_cli::config::{parse_config, Format, Mode};
use twodcs_cli::exit;
use twodcs_cli::run::{run, RunError};

/// Two-dimensional coherent spectra of a driven three-level ladder and a
/// six-level vibrational model.
#[derive(Debug, Parser)]
#[command(name = "twodcs", version)]
struct Args {
    /// rf2d, nhh2d, rf-nhhpaths-2d, popdyn, trace, greens, rdc or compare
    mode: Mode,
    /// TOML configuration; an empty file runs the defaults
    #[arg(long)]
    config: PathBuf,
    /// Output directory, overriding `output.dir`
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma-separated subset of csv, bin, plot, overriding `output.formats`
    #[arg(long, value_delimiter = ',')]
    format: Option<Vec<Format>>,
}

fn main() -> ExitCode {
    let args = Args::parse();
    let mut cfg = match parse_config(&args.config, args.mode) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {}: {e}", args.config.display());
            return ExitCode::from(exit::CONFIG as u8);
        }
    };
    if let Some(dir) = args.out {
        cfg.output.dir = dir;
    }
    if let Some(formats) = args.format {
        cfg.output.formats = formats.into_iter().collect();
    }
    match run(&cfg) {
        Ok(m) => {
            let files: usize = m.artifacts.iter().map(|a| a.files.len()).sum();
            println!("{}: wrote {} files and manifest.json to {}", cfg.mode, files, cfg.output.dir.display());
            ExitCode::from(exit::SUCCESS as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            let code = match e {
                RunError::Numeric(_) => exit::NUMERIC,
                RunError::Output { .. } => exit::OUTPUT,
            };
            ExitCode::from(code as u8)
        }
    }
}
