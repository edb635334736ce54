use std::fs::OpenOptions;
use std::io::{self, Read, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use qhm_cli::{run, run_batch, RunConfig, Verb};
use qhm_core::upsilon::DEFAULT_SEED;

/// Quasi-homogeneous germs: types, invariants and fibers.
#[derive(Parser, Debug)]
#[command(name = "qhm", version)]
struct Args {
    /// classify | invariant | fiber | classes | count | equiv | generic |
    /// family | verify-paper | batch
    verb: Verb,
    /// JSON payload file (JSONL for batch); stdin when omitted or `-`.
    input: Option<PathBuf>,
    #[arg(long, env = "QHM_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Comparison tolerance for equivalence, invariants and bifurcation tests.
    #[arg(long)]
    tol: Option<f64>,
    /// Write the document here instead of stdout (batch: append JSONL).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Treat fiber targets as unordered.
    #[arg(long)]
    permute_targets: bool,
}

fn read_input(path: Option<&PathBuf>) -> Result<String> {
    let mut s = String::new();
    match path {
        Some(p) if p.as_os_str() != "-" => {
            s = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        }
        _ => {
            io::stdin().read_to_string(&mut s).context("reading stdin")?;
        }
    }
    Ok(s)
}

fn emit(out: Option<&PathBuf>, text: &str, append: bool) -> Result<()> {
    match out {
        Some(p) => {
            let mut f = OpenOptions::new()
                .create(true)
                .write(true)
                .append(append)
                .truncate(!append)
                .open(p)
                .with_context(|| format!("opening {}", p.display()))?;
            f.write_all(text.as_bytes())?;
        }
        None => io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

fn main() -> Result<ExitCode> {
    let args = Args::parse();
    let cfg = RunConfig { seed: args.seed, tol: args.tol, permute_targets: args.permute_targets };
    let payload = if args.verb.takes_payload() { read_input(args.input.as_ref())? } else { String::new() };

    if args.verb == Verb::Batch {
        let batch = run_batch(&payload, &cfg);
        let mut lines = String::new();
        for (doc, out) in batch.documents.iter().zip(&batch.outputs) {
            let line = serde_json::to_string(doc)?;
            if let Some(path) = out {
                emit(Some(&PathBuf::from(path)), &format!("{}\n", serde_json::to_string_pretty(doc)?), false)?;
            }
            lines.push_str(&line);
            lines.push('\n');
        }
        emit(args.out.as_ref(), &lines, true)?;
        return Ok(ExitCode::from(batch.code as u8));
    }

    let outcome = run(args.verb, &payload, &cfg);
    emit(args.out.as_ref(), &outcome.render(), false)?;
    Ok(ExitCode::from(outcome.code as u8))
}
