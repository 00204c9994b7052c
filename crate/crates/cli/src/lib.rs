pub mod args;
pub mod commands;
pub mod error;
pub mod figures;
pub mod output;
pub mod schema;
pub mod state;

use std::io::Write;

use args::{Cli, Command};
use commands::*;
use error::{CliError, CliResult};

/// Runs one command; written file paths go to `w`.
pub fn run(cli: &Cli, w: &mut dyn Write) -> CliResult<()> {
    if let Some(threads) = cli.threads {
        if threads == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        // Fails only when a pool already exists, e.g. in a test harness.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    let seed = cli.seed;
    let dir = &cli.output_dir;
    let name = cli.command.name();
    macro_rules! with_output {
        ($a:expr, |$out:ident| $body:expr) => {{
            let $out = open(dir, name, $a, seed)?;
            let result = $body;
            list_artifacts(&$out, w)?;
            result
        }};
    }
    match &cli.command {
        Command::Basis(a) => basis(a, w),
        Command::Branches(a) => with_output!(a, |out| branches(a, &out)),
        Command::Yrast(a) => with_output!(a, |out| yrast(a, seed, &out, w)),
        Command::FidelitySweep(a) => with_output!(a, |out| fidelity_sweep_cmd(a, &out)),
        Command::Conditional(a) => with_output!(a, |out| conditional_cmd(a, seed, &out)),
        Command::Sample(a) => with_output!(a, |out| sample_cmd(a, seed, &out)),
        Command::NotchHist(a) => with_output!(a, |out| notch_hist_cmd(a, seed, &out)),
        Command::Bohmian(a) => with_output!(a, |out| bohmian_cmd(a, seed, &out)),
        Command::Gpe(a) => with_output!(a, |out| gpe_cmd(a, &out)),
        Command::Fig(a) => with_output!(a, |out| figures::run(a, seed, &out)),
    }
}
