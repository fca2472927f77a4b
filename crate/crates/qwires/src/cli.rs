use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use crate::commands;
use crate::config::{Format, Output, RunConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "qwires",
    version,
    about = "Classify, compile and verify qubit computational wires"
)]
pub struct Cli {
    /// Seed for every random choice; equal seeds give identical output.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Numerical tolerance for equality checks and compilation.
    #[arg(long, global = true, default_value_t = 1e-9)]
    pub tol: f64,
    /// Largest number of qubits (or Fock sites) simulated exactly.
    #[arg(long, global = true, env = "QWIRES_CAP", default_value_t = qwires_core::oracle::DEFAULT_CAP)]
    pub cap: usize,
    /// Write output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Output format; `simulate` defaults to jsonl, everything else to json.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Classify a wire tensor into normal form.
    Classify { wire: PathBuf },
    /// Compile a single-qubit unitary into measurement angles.
    Compile {
        wire: PathBuf,
        /// JSON file or one of I, H, X, Y, Z, S:<angle>, WS:<angle>, haar.
        target: String,
        #[arg(long, default_value_t = 12)]
        max_len: usize,
    },
    /// Replay a plan adaptively on an exact chain simulation.
    Simulate {
        wire: PathBuf,
        plan: PathBuf,
        /// Chain length, including the final read-out site.
        #[arg(long, default_value_t = 12)]
        sites: usize,
        /// Initial correlation state: 0, 1, + or -.
        #[arg(long, default_value = "0")]
        initial: String,
        /// Impose the first measurement outcomes, e.g. `--force 1,0`.
        #[arg(long, value_delimiter = ',', value_parser = clap::value_parser!(u8).range(0..=1))]
        force: Vec<u8>,
    },
    /// Sample the curve of single-step phase gates.
    Locus {
        wire: PathBuf,
        #[arg(long, default_value_t = 64)]
        samples: usize,
    },
    /// Report on the two-wire coupling gadget.
    Couple {
        wire: PathBuf,
        /// Even outcome pair (x₄, z₆) whose branch is compared with the gate.
        #[arg(long, default_value = "0,0", value_parser = parse_pair)]
        branch: [u8; 2],
        /// Also analyse the exchange coupling (cluster wires only).
        #[arg(long)]
        exchange: bool,
    },
    /// Entropy table of the bosonic double-well protocol.
    Bose {
        #[arg(long, default_value_t = 3)]
        pairs: usize,
        #[arg(long, default_value_t = qwires_core::bose::DEFAULT_CUTOFF)]
        cutoff: usize,
        #[arg(long, default_value_t = qwires_core::bose::PROTOCOL_ROUNDS)]
        rounds: usize,
    },
    /// Randomised invariant checks.
    Props {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

fn parse_pair(s: &str) -> Result<[u8; 2], String> {
    let bit = |t: &str| match t.trim() {
        "0" => Ok(0),
        "1" => Ok(1),
        other => Err(format!("expected 0 or 1, got {other:?}")),
    };
    match s.split_once(',') {
        Some((a, b)) => Ok([bit(a)?, bit(b)?]),
        None => Err("expected two outcomes such as 1,1".into()),
    }
}

impl Cli {
    pub fn config(&self) -> RunConfig {
        let default = match self.command {
            Command::Simulate { .. } => Format::Jsonl,
            _ => Format::Json,
        };
        RunConfig {
            seed: self.seed,
            tol: self.tol,
            cap: self.cap,
            out: self.out.clone(),
            format: self.format.unwrap_or(default),
        }
    }

    pub fn execute(&self, out: &mut Output) -> Result<(), CliError> {
        let cfg = self.config();
        if !(cfg.tol > 0.0 && cfg.tol < 1.0) {
            return Err(CliError::Input("--tol must lie in (0, 1)".into()));
        }
        match &self.command {
            Command::Classify { wire } => commands::cmd_classify(&cfg, out, wire),
            Command::Compile {
                wire,
                target,
                max_len,
            } => commands::cmd_compile(&cfg, out, wire, target, *max_len),
            Command::Simulate {
                wire,
                plan,
                sites,
                initial,
                force,
            } => commands::cmd_simulate(&cfg, out, wire, plan, *sites, initial, force),
            Command::Locus { wire, samples } => commands::cmd_locus(&cfg, out, wire, *samples),
            Command::Couple {
                wire,
                branch,
                exchange,
            } => commands::cmd_couple(&cfg, out, wire, *branch, *exchange),
            Command::Bose {
                pairs,
                cutoff,
                rounds,
            } => commands::cmd_bose(&cfg, out, *pairs, *cutoff, *rounds),
            Command::Props { cases } => commands::cmd_props(&cfg, out, *cases),
        }
    }
}

pub fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    let mut out = Output::default();
    let result = cli.execute(&mut out);
    let written = out.write(&cli.config());
    match result.and(written) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("qwires: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
