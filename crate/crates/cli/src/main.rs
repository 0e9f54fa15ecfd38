//! `cplab`: configuration-driven runs of the contact-process laboratory.
//!
//! Exit codes: 0 success, 1 configuration or usage errors (the message names
//! the offending key), 2 runtime failures (budget exhausted, all samples
//! censored, hash mismatches).

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use cplab_cli::{config, manifest, pipelines};

use cplab_core::graph::{diameter, generate_random_regular, io as graph_io, GraphError};

#[derive(Parser)]
#[command(name = "cplab", version, about = "Contact-process laboratory on random regular graphs")]
enum Cli {
    /// Run a pipeline described by a flat key-value config file.
    Run { config: PathBuf },
    /// Re-hash the outputs of a finished run against its manifest.
    Verify { dir: PathBuf },
    /// Graph-file utilities.
    #[command(subcommand)]
    Graph(GraphCmd),
}

#[derive(Subcommand)]
enum GraphCmd {
    /// Generate a uniform random d-regular graph and write its edge list.
    Gen {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        d: u32,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print structural facts about a graph file.
    Info { file: PathBuf },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // clap's help/version output is a success, not a usage error.
            if e.use_stderr() {
                eprint!("{e}");
                return ExitCode::from(1);
            }
            print!("{e}");
            return ExitCode::SUCCESS;
        }
    };
    match cli {
        Cli::Run { config } => {
            let rc = match config::parse_file(&config).and_then(config::build) {
                Ok(rc) => rc,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            match pipelines::execute(&rc) {
                Ok(()) => {
                    println!("{} -> {}", rc.pipeline.name(), rc.out_dir.display());
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(2)
                }
            }
        }
        Cli::Verify { dir } => match manifest::verify_dir(&dir) {
            Ok(()) => {
                println!("ok: all outputs match the manifest");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e:#}");
                ExitCode::from(2)
            }
        },
        Cli::Graph(GraphCmd::Gen { n, d, seed, out }) => {
            match generate_random_regular(n, d, seed) {
                Ok(g) => {
                    if let Err(e) = graph_io::write_edge_list(&out, &g) {
                        eprintln!("error: {e}");
                        return ExitCode::from(2);
                    }
                    println!(
                        "wrote {} ({} vertices, degree {}, {} attempts)",
                        out.display(),
                        g.n(),
                        g.d(),
                        g.generator_attempts()
                    );
                    ExitCode::SUCCESS
                }
                Err(e @ (GraphError::ParityViolation { .. } | GraphError::InvalidParameters { .. })) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(2)
                }
            }
        }
        Cli::Graph(GraphCmd::Info { file }) => match graph_io::read_edge_list(&file) {
            Ok(g) => {
                let diam = diameter(&g).map(|d| d.to_string()).unwrap_or_else(|_| "inf".into());
                println!(
                    "n = {}, d = {}, edges = {}, connected = {}, diameter = {}",
                    g.n(),
                    g.d(),
                    g.edge_count(),
                    g.connected(),
                    diam
                );
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("error: {e}");
                ExitCode::from(2)
            }
        },
    }
}
