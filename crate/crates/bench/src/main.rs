use std::fs::File;
use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pactree_bench::{
    check_size_decreasing, graph_bench, run_micro, sweep_blocksize, write_graph, write_micro,
    BenchConfig, BenchError, Encoding, Op,
};

#[derive(Parser)]
#[command(
    name = "bench",
    about = "pactree microbenchmarks; CSV on stdout or --out"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time one operation.
    Micro {
        #[command(flatten)]
        common: Common,
        /// Block size.
        #[arg(long = "B", default_value_t = 128)]
        block: usize,
    },
    /// Time one operation for several block sizes.
    #[command(name = "sweep-B")]
    SweepB {
        #[command(flatten)]
        common: Common,
        /// Comma-separated block sizes.
        #[arg(long = "Bs", value_delimiter = ',', default_values_t = [8usize, 16, 32, 64, 128, 256, 512, 1024])]
        blocks: Vec<usize>,
        /// Fail unless bytes decrease as B grows.
        #[arg(long)]
        check_size: bool,
    },
    /// Batch insert/delete throughput on an edge-list graph.
    Graph {
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated batch sizes.
        #[arg(long, value_delimiter = ',')]
        batches: Vec<usize>,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        trials: usize,
        #[arg(long, default_value_t = default_threads())]
        threads: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long, value_enum)]
    op: Op,
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    #[arg(long, default_value_t = 100_000)]
    m: usize,
    #[arg(long, value_enum, default_value_t = Encoding::Identity)]
    encoding: Encoding,
    #[arg(long, default_value_t = default_threads())]
    threads: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value_t = 5)]
    trials: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl Common {
    fn config(&self, block: usize) -> BenchConfig {
        BenchConfig {
            op: self.op,
            n: self.n,
            m: self.m,
            block,
            encoding: self.encoding,
            threads: self.threads,
            seed: self.seed,
            trials: self.trials,
        }
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn output(path: &Option<PathBuf>) -> Result<Box<dyn Write>, BenchError> {
    match path {
        None => Ok(Box::new(io::stdout().lock())),
        Some(p) => {
            let f = File::create(p).map_err(|source| BenchError::Io {
                path: p.clone(),
                source,
            })?;
            Ok(Box::new(f))
        }
    }
}

fn run(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Micro { common, block } => {
            let row = run_micro(&common.config(block))?;
            write_micro(output(&common.out)?, &[row])
        }
        Command::SweepB {
            common,
            blocks,
            check_size,
        } => {
            let rows = sweep_blocksize(
                &common.config(blocks.first().copied().unwrap_or(128)),
                &blocks,
            )?;
            write_micro(output(&common.out)?, &rows)?;
            if check_size {
                check_size_decreasing(&rows)?;
            }
            Ok(())
        }
        Command::Graph {
            input,
            batches,
            seed,
            trials,
            threads,
            out,
        } => {
            let rows = graph_bench(&input, &batches, seed, trials, threads)?;
            write_graph(output(&out)?, &rows)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("bench: {e}");
            ExitCode::FAILURE
        }
    }
}
