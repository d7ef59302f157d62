use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use sdr_cli::commands::{self, exit, Invocation, DEFAULT_OUT_DIR};
use sdr_cli::config::{GraphSpec, Overrides, RunConfig};
use sdr_cli::sweep::parse_seeds;
use sdr_core::graph::GraphKind;

#[derive(Parser)]
#[command(name = "sdrlab", version, about = "Run, sweep and certify self-stabilizing reset experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// One run: trace, report and summary line.
    Run(Common),
    /// One run per seed, aggregated into sweep.csv.
    Sweep {
        #[command(flatten)]
        common: Common,
        /// `a..b` or `a..=b`.
        #[arg(long)]
        seeds: String,
    },
    /// Exhaustive exploration of a composed instance.
    Certify(Common),
    /// Print a generated graph as an edge list.
    GraphGen(GraphGen),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Clock period (unison).
    #[arg(long = "K")]
    k: Option<u32>,
    #[arg(long)]
    daemon: Option<String>,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    max_rounds: Option<usize>,
    #[arg(long, value_enum)]
    monitors: Option<OnOff>,
    #[arg(long, default_value = DEFAULT_OUT_DIR)]
    out_dir: PathBuf,
}

impl Common {
    fn invocation(self) -> Invocation {
        Invocation {
            config: self.config,
            overrides: Overrides {
                seed: self.seed,
                k: self.k,
                daemon: self.daemon,
                max_steps: self.max_steps,
                max_rounds: self.max_rounds,
                monitors: self.monitors.map(|m| matches!(m, OnOff::On)),
            },
            out_dir: self.out_dir,
        }
    }
}

#[derive(Args)]
struct GraphGen {
    /// Take the graph section of this config instead of --kind/--n.
    #[arg(long, conflicts_with_all = ["kind", "n"])]
    config: Option<PathBuf>,
    #[arg(long, required_unless_present = "config")]
    kind: Option<GraphKind>,
    #[arg(long, required_unless_present = "config")]
    n: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra-edge probability for random_connected.
    #[arg(long)]
    p: Option<f64>,
    /// Write here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn graph_gen(args: GraphGen) -> u8 {
    let spec = match &args.config {
        Some(path) => RunConfig::load(path).map(|c| c.graph),
        None => Ok(GraphSpec {
            kind: args.kind,
            n: args.n,
            seed: None,
            p: args.p,
            file: None,
        }),
    };
    let text = match spec.and_then(|s| s.build(args.seed)) {
        Ok(g) => g.to_edge_list(),
        Err(e) => {
            eprintln!("error: {e}");
            return exit::INVALID;
        }
    };
    match args.out {
        Some(path) => match std::fs::write(&path, text) {
            Ok(()) => exit::OK,
            Err(e) => {
                eprintln!("error: cannot write {}: {e}", path.display());
                exit::FAILURE
            }
        },
        None => {
            print!("{text}");
            exit::OK
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (mut out, mut err) = (io::stdout().lock(), io::stderr().lock());
    let code = match cli.cmd {
        Cmd::Run(c) => commands::run(&c.invocation(), &mut out, &mut err),
        Cmd::Sweep { common, seeds } => match parse_seeds(&seeds) {
            Ok(range) => commands::sweep_cmd(&common.invocation(), range, &mut out, &mut err),
            Err(e) => {
                eprintln!("error: {e}");
                exit::INVALID
            }
        },
        Cmd::Certify(c) => commands::certify_cmd(&c.invocation(), &mut out, &mut err),
        Cmd::GraphGen(g) => graph_gen(g),
    };
    ExitCode::from(code)
}
