//! Command-line front end for link-homotopy decisions on canonical forms.
//!
//! Exit codes: 0 when a command ran and answered, 2 on input errors, 3 on
//! internal invariant violations.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use linkhom::decide::{self, Certificate, DecideError, Verdict};
use linkhom::indexing::{self, CanonicalForm};
use linkhom::milnor;
use linkhom::stringlink;

#[derive(Parser)]
#[command(name = "linkhom", version, about = "Link-homotopy classification of 4- and 5-component links")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether two links are link-homotopic.
    Decide {
        left: PathBuf,
        right: PathBuf,
        /// Include the sequence of partial conjugations in the output.
        #[arg(long)]
        certificate: bool,
        /// Check the certificate again before printing.
        #[arg(long)]
        verify: bool,
    },
    /// Print the μ̄-invariants over the distinguishing index set.
    Mu { link: PathBuf },
    /// Echo a canonical form in normalized layout.
    Canonical {
        link: PathBuf,
        /// Realize the form as a string link and read its coordinates back.
        #[arg(long)]
        roundtrip: bool,
    },
    /// Check a certificate produced by `decide --certificate`.
    Verify {
        left: PathBuf,
        right: PathBuf,
        /// A JSON move list, or a verdict object containing one.
        certificate: PathBuf,
        /// Replay the moves on string links instead of coordinates.
        #[arg(long)]
        string_links: bool,
    },
    /// Decide a list of pairs `[{"left": .., "right": ..}, ..]`; each side is
    /// a canonical form or a path relative to the batch file.
    Batch {
        pairs: PathBuf,
        /// Number of worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        certificate: bool,
    },
}

enum Failure {
    Input(String),
    Internal(String),
}

impl From<DecideError> for Failure {
    fn from(e: DecideError) -> Self {
        match e {
            DecideError::MismatchedN(..) | DecideError::UnsupportedN(_) => Failure::Input(e.to_string()),
            other => Failure::Internal(other.to_string()),
        }
    }
}

type Outcome = Result<Value, Failure>;

fn read_json(path: &Path) -> Result<Value, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse_form(value: Value, origin: &str) -> Result<CanonicalForm, Failure> {
    serde_json::from_value(value).map_err(|e| Failure::Input(format!("{origin}: {e}")))
}

fn load(path: &Path) -> Result<CanonicalForm, Failure> {
    parse_form(read_json(path)?, &path.display().to_string())
}

fn verdict_json(v: &Verdict, with_certificate: bool) -> Value {
    let mut out = serde_json::to_value(v).expect("verdicts serialize");
    if !with_certificate {
        if let Some(map) = out.as_object_mut() {
            map.remove("certificate");
        }
    }
    out
}

fn cmd_decide(left: &Path, right: &Path, certificate: bool, verify: bool) -> Outcome {
    let (a, b) = (load(left)?, load(right)?);
    if a.n() != b.n() {
        return Err(Failure::Input(format!(
            "{} has {} components but {} has {}",
            left.display(),
            a.n(),
            right.display(),
            b.n()
        )));
    }
    let v = decide::decide(&a, &b)?;
    let mut out = verdict_json(&v, certificate);
    if verify {
        if let Some(c) = v.certificate() {
            if !decide::verify_certificate(&a, &b, c) {
                return Err(Failure::Internal("certificate failed verification".into()));
            }
            out["verified"] = json!(true);
        }
    }
    Ok(out)
}

fn cmd_mu(link: &Path) -> Outcome {
    let y = load(link)?;
    let indices = indexing::distinguishing_indices(y.n()).map_err(|e| Failure::Input(format!("{}: {e}", link.display())))?;
    let closure = milnor::Closure::from_canonical(&y).map_err(|e| Failure::Internal(e.to_string()))?;
    let rows = indices
        .iter()
        .map(|i| closure.residue(i).map_err(|e| Failure::Internal(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(json!({ "components": y.n(), "mu": rows }))
}

fn cmd_canonical(link: &Path, roundtrip: bool) -> Outcome {
    let y = load(link)?;
    let mut out = json!({
        "components": y.n(),
        "Y": y.blocks(),
        "coordinates": indexing::coordinate_count(y.n()),
    });
    if roundtrip {
        let back = stringlink::from_canonical(&y)
            .and_then(|sl| stringlink::to_canonical(&sl))
            .map_err(|e| Failure::Internal(e.to_string()))?;
        if back != y {
            return Err(Failure::Internal(format!(
                "roundtrip changed the form to {}",
                serde_json::to_string(&back).expect("forms serialize")
            )));
        }
        out["roundtrip"] = json!("ok");
    }
    Ok(out)
}

fn cmd_verify(left: &Path, right: &Path, cert: &Path, string_links: bool) -> Outcome {
    let (a, b) = (load(left)?, load(right)?);
    let value = read_json(cert)?;
    let list = match value.get("certificate") {
        Some(inner) => inner.clone(),
        None => value,
    };
    let c = Certificate::from_json(&list, a.n()).map_err(|e| Failure::Input(format!("{}: {e}", cert.display())))?;
    let valid = if string_links {
        decide::verify_certificate_on_string_links(&a, &b, &c)
    } else {
        decide::verify_certificate(&a, &b, &c)
    };
    Ok(json!({ "valid": valid, "moves": c.len() }))
}

fn batch_side(item: &Value, key: &str, k: usize, base: &Path) -> Result<CanonicalForm, Failure> {
    match item.get(key) {
        Some(Value::String(p)) => load(&base.join(p)),
        Some(v) => parse_form(v.clone(), &format!("pair {k} {key}")),
        None => Err(Failure::Input(format!("pair {k}: missing \"{key}\""))),
    }
}

fn cmd_batch(file: &Path, jobs: Option<usize>, certificate: bool) -> Outcome {
    let value = read_json(file)?;
    let items = value
        .as_array()
        .ok_or_else(|| Failure::Input(format!("{}: expected a JSON list of pairs", file.display())))?;
    let base = file.parent().unwrap_or(Path::new("."));
    let pairs = items
        .iter()
        .enumerate()
        .map(|(k, item)| Ok((batch_side(item, "left", k, base)?, batch_side(item, "right", k, base)?)))
        .collect::<Result<Vec<_>, Failure>>()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(j) = jobs {
        builder = builder.num_threads(j.max(1));
    }
    let pool = builder.build().map_err(|e| Failure::Internal(e.to_string()))?;
    let verdicts = pool.install(|| decide::decide_batch(&pairs));
    let rows = verdicts
        .into_iter()
        .map(|v| v.map(|v| verdict_json(&v, certificate)).map_err(Failure::from))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Value::Array(rows))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Decide {
            left,
            right,
            certificate,
            verify,
        } => cmd_decide(left, right, *certificate, *verify),
        Command::Mu { link } => cmd_mu(link),
        Command::Canonical { link, roundtrip } => cmd_canonical(link, *roundtrip),
        Command::Verify {
            left,
            right,
            certificate,
            string_links,
        } => cmd_verify(left, right, certificate, *string_links),
        Command::Batch {
            pairs,
            jobs,
            certificate,
        } => cmd_batch(pairs, *jobs, *certificate),
    };
    match outcome {
        Ok(v) => {
            println!("{}", serde_json::to_string_pretty(&v).expect("values serialize"));
            ExitCode::SUCCESS
        }
        Err(Failure::Input(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Internal(msg)) => {
            eprintln!("internal error: {msg}");
            ExitCode::from(3)
        }
    }
}
