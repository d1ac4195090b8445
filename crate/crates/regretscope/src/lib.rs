//! Command-line front end for `regretscope-core`: JSON inputs, report
//! rendering, run manifests and parallel orchestration of maze seeds.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod manifest;

use std::io::Write;
use std::path::Path;

use cli::{Cli, Command, Format};
use commands::{execute, Outcome};
use error::{CliError, CliResult};
use manifest::{hash_file, sha256_hex, FileHash, RunManifest, MANIFEST_FILE};

/// Runs a parsed command: prints the report and, with `--out`, writes the
/// artifacts and a manifest. Returns the text printed to stdout.
pub fn run(cli: &Cli) -> CliResult<String> {
    if let Command::Replay(a) = &cli.command {
        return replay(&a.manifest);
    }
    let outcome = execute(&cli.command, cli.seed_base, cli.jobs)?;
    if let Some(dir) = &cli.out {
        write_outputs(cli, dir, &outcome)?;
    }
    Ok(match cli.format {
        Format::Text => outcome.text,
        Format::Json => outcome.json,
    })
}

fn write_outputs(cli: &Cli, dir: &Path, outcome: &Outcome) -> CliResult<()> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let mut outputs = Vec::new();
    for a in &outcome.artifacts {
        std::fs::write(dir.join(&a.name), &a.bytes)?;
        outputs.push(FileHash { path: a.name.clone(), sha256: sha256_hex(&a.bytes) });
    }
    let manifest = RunManifest {
        tool: env!("CARGO_PKG_NAME").into(),
        version: env!("CARGO_PKG_VERSION").into(),
        subcommand: outcome.subcommand.clone(),
        command: absolute_inputs(cli),
        seeds: outcome.seeds.clone(),
        inputs: outcome.inputs.clone(),
        outputs,
    };
    std::fs::write(dir.join(MANIFEST_FILE), io::to_json(&manifest))?;
    log::info!("wrote {} files to {}", outcome.artifacts.len() + 1, dir.display());
    Ok(())
}

/// Copy of `cli` with input paths made absolute so a manifest can be
/// replayed from any directory.
fn absolute_inputs(cli: &Cli) -> Cli {
    let mut cli = cli.clone();
    if let Command::Solve(a) = &mut cli.command {
        for p in [&mut a.env, &mut a.rho, &mut a.pi] {
            if let Ok(abs) = std::fs::canonicalize(&*p) {
                *p = abs;
            }
        }
    }
    cli
}

/// Re-executes the command recorded in a manifest and compares every
/// output hash. Inputs must still hash to their recorded values.
pub fn replay(path: &Path) -> CliResult<String> {
    let manifest: RunManifest = io::read_json(path)?;
    for input in &manifest.inputs {
        let now = hash_file(Path::new(&input.path)).map_err(|e| CliError::Input(format!("{}: {e}", input.path)))?;
        if now.sha256 != input.sha256 {
            return Err(CliError::Input(format!("input {} changed since the recorded run", input.path)));
        }
    }
    let cmd = &manifest.command;
    let outcome = execute(&cmd.command, cmd.seed_base, cmd.jobs)?;
    let mut report = String::new();
    let mut mismatches = 0;
    for recorded in &manifest.outputs {
        let now = outcome.artifacts.iter().find(|a| a.name == recorded.path).map(|a| sha256_hex(&a.bytes));
        let ok = now.as_deref() == Some(recorded.sha256.as_str());
        mismatches += usize::from(!ok);
        report.push_str(&format!("{} {}\n", if ok { "match   " } else { "MISMATCH" }, recorded.path));
    }
    if outcome.artifacts.len() != manifest.outputs.len() {
        mismatches += 1;
        report.push_str("MISMATCH output file set differs\n");
    }
    if mismatches > 0 {
        let _ = std::io::stdout().write_all(report.as_bytes());
        return Err(CliError::Internal(format!("{mismatches} output(s) differ from the manifest")));
    }
    report.push_str(&format!("all {} outputs reproduced\n", manifest.outputs.len()));
    Ok(report)
}
