use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use floquet_scan::engine::Quantity;
use floquet_scan::{run, Command, Format, RunOptions};

#[derive(Parser)]
#[command(name = "floquet-scan", version, about = "Coherence traces, decoherence maps, Floquet spectra and dip reports")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Coherence and envelope along τ.
    Trace(Args),
    /// Coherence or envelope over the (field, τ) plane.
    Map(Args),
    /// Floquet phases along τ.
    Spectrum(Args),
    /// Dip positions, level repulsion and depth.
    Dips(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    output: PathBuf,
    #[arg(long, value_enum, default_value = "csv")]
    format: FormatArg,
    #[arg(long, value_enum, default_value = "coherence")]
    quantity: QuantityArg,
    /// Worker threads (0 = one per CPU).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Pgm,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum QuantityArg {
    Coherence,
    Envelope,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (command, args) = match cli.command {
        Cmd::Trace(a) => (Command::Trace, a),
        Cmd::Map(a) => (Command::Map, a),
        Cmd::Spectrum(a) => (Command::Spectrum, a),
        Cmd::Dips(a) => (Command::Dips, a),
    };
    let opts = RunOptions {
        output: args.output,
        format: match args.format {
            FormatArg::Csv => Format::Csv,
            FormatArg::Pgm => Format::Pgm,
            FormatArg::Both => Format::Both,
        },
        quantity: match args.quantity {
            QuantityArg::Coherence => Quantity::Coherence,
            QuantityArg::Envelope => Quantity::Envelope,
        },
        threads: args.threads,
    };
    match run(command, &args.config, &opts) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("floquet-scan: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
