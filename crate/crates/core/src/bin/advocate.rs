use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::Parser;

use advocate_core::experiment::{run_matrix, ExperimentMatrix};
use advocate_core::sim::Variant;

/// Run a checkpointing experiment matrix and write CSV reports.
#[derive(Debug, Parser)]
#[command(name = "advocate", version)]
struct Cli {
    /// Matrix file (TOML).
    config: PathBuf,
    /// Report directory; overrides `output` in the file.
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Run every cell with this single seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Keep only these variants (repeatable).
    #[arg(long = "variant", value_name = "VARIANT")]
    variants: Vec<Variant>,
    /// Run trials one at a time instead of on the worker pool.
    #[arg(long)]
    serial: bool,
    /// -v prints the summary table, -vv also the file list and timing.
    #[arg(short, long, action = clap::ArgAction::Count)]
    verbose: u8,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(0) => ExitCode::SUCCESS,
        Ok(violations) => {
            eprintln!("{violations} cell(s) aborted on a safety violation");
            ExitCode::from(2)
        }
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> advocate_core::Result<usize> {
    let mut matrix = ExperimentMatrix::load(&cli.config)?;
    if let Some(dir) = &cli.output {
        matrix.output = dir.clone();
    }
    if let Some(seed) = cli.seed {
        matrix.seeds = vec![seed];
    }
    if !cli.variants.is_empty() {
        matrix.grid.variant.retain(|v| cli.variants.contains(v));
        if matrix.grid.variant.is_empty() {
            return Err(advocate_core::Error::Config("variant filter matches no grid variant".into()));
        }
    }
    let started = Instant::now();
    let report = run_matrix(&matrix, !cli.serial)?;
    let hook_t = matrix.base.hook_t.unwrap_or(2);
    let files = report.write(&matrix.output, hook_t)?;
    if cli.verbose >= 1 {
        print!("{}", report.summary());
    }
    if cli.verbose >= 2 {
        for f in &files {
            println!("wrote {}", f.display());
        }
        println!("{} cells in {:.1?}", report.cells.len(), started.elapsed());
    }
    Ok(report.safety_violations())
}
