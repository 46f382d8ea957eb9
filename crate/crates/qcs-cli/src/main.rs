use clap::{Parser, Subcommand};
use qcs_cli::commands::{self, BestArgs, PlotArgs, RunArgs, SweepArgs};

#[derive(Parser)]
#[command(
    name = "qcs",
    version,
    about = "Sparse reconstruction from quantized measurements: single trials, sweeps, catalogs, plots"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one trial and print its record
    Run(RunArgs),
    /// Run a full parameter sweep from a config file
    Sweep(SweepArgs),
    /// Pick the best (algorithm, bit depth) per condition from records.csv
    Best(BestArgs),
    /// Render mean RSNR vs total bits from summary.csv as SVG
    Plot(PlotArgs),
}

fn main() {
    // QCS_THREADS caps sweep parallelism; unset leaves rayon's default
    if let Ok(v) = std::env::var("QCS_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n >= 1 => {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global()
                    .expect("rayon pool is configured once, before first use");
            }
            _ => {
                eprintln!("error: QCS_THREADS must be a positive integer, got '{v}'");
                std::process::exit(2);
            }
        }
    }

    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run(args) => commands::cmd_run(args, &mut std::io::stdout()),
        Command::Sweep(args) => commands::cmd_sweep(args),
        Command::Best(args) => commands::cmd_best(args, &mut std::io::stdout()),
        Command::Plot(args) => commands::cmd_plot(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.exit_code());
    }
}
