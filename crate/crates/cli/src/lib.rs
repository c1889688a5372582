//! Subcommands of the `forumsim` tool. Every command reads and writes plain
//! files, so each stage can be rerun on its own.

pub mod args;
pub mod commands;
pub mod error;
mod svg;

use std::io::Write;

use args::{Cli, Command};
pub use commands::cmd_pipeline;
pub use error::{CliError, CliResult};

pub fn run(cli: &Cli, out: &mut dyn Write) -> CliResult<()> {
    use commands::*;
    match &cli.command {
        Command::Ingest(a) => cmd_ingest(a, out),
        Command::Stats(a) => cmd_stats(a, out),
        Command::Similarity(a) => cmd_similarity(a, out),
        Command::Embed(a) => cmd_embed(a),
        Command::Users(a) => cmd_users(a),
        Command::Cluster(a) => cmd_cluster(a, out),
        Command::Mst(a) => cmd_mst(a, out),
        Command::Scatter(a) => cmd_scatter(a),
        Command::Pipeline(a) => cmd_pipeline(a),
        Command::Synth(c) => cmd_synth(c, out),
    }
}
