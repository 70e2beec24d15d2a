//! `qsac`: command-line driver for encoding, verification, attack
//! experiments, parameter sweeps and direct-communication sessions.
//!
//! Exit status: 0 success, 1 verification failure, 2 usage or config error,
//! 3 I/O or parse error.

use clap::{Parser, Subcommand};
use qsac::analysis::{mc_detection, write_detection_csv, DetectionRow};
use qsac::codec::{encode_with_schedule, exact_pass_probability, verify};
use qsac::keysched::{derive_check_string, derive_subkeys, derive_transform_string};
use qsac::qsdc::{run_session, QsdcMessage};
use qsac::{
    AttackKind, AttackSpec, BasisSymbol, Codeword, DetectionStats, Error, Key, MeasurementRecord,
    Positions, QsacParams, Schedule, State,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

#[derive(Parser)]
#[command(
    name = "qsac",
    version,
    about = "Quantum secret authentication code simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Key schedule utilities.
    Keys {
        #[command(subcommand)]
        command: KeysCommand,
    },
    /// Encode a message register into a codeword file.
    Encode {
        #[arg(long)]
        key_file: PathBuf,
        /// Number of check qubits.
        #[arg(long)]
        n: usize,
        /// Basis string over `0 1 + -`, or one of `plus`, `minus`, `bell`.
        #[arg(long, allow_hyphen_values = true)]
        message: String,
        /// Codeword destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Verify a codeword file; exits 1 when authentication fails.
    Verify {
        #[arg(long)]
        key_file: PathBuf,
        codeword: PathBuf,
        #[arg(long)]
        seed: u64,
        /// JSON report destination; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Monte-Carlo detection rate of one attack, as a one-row CSV.
    Attack {
        #[arg(long)]
        key_file: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, allow_hyphen_values = true)]
        message: String,
        /// Attack description (JSON).
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        trials: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment sweep described by a JSON config.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the key stored in the config.
        #[arg(long)]
        key_file: Option<PathBuf>,
        /// Overrides `output_path` from the config.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// One-way secure direct communication session.
    Qsdc {
        #[arg(long)]
        key_file: PathBuf,
        /// Even-length bit string.
        #[arg(long)]
        message: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        /// Channel attack (JSON); honest channel when absent.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Run this many sessions with seeds `seed, seed+1, ...` and report the abort rate.
        #[arg(long)]
        repeat: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the first session's transcript here (JSON lines).
        #[arg(long)]
        transcript: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum KeysCommand {
    /// Print the sub-key seeds and the derived strings.
    Derive {
        #[arg(long)]
        key_file: PathBuf,
        #[arg(long)]
        n: usize,
        /// Message qubits; only the check string is printed when absent.
        #[arg(long)]
        m: Option<usize>,
    },
}

enum Failure {
    Rejected,
    Usage(String),
    Io(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Self {
        Failure::Usage(e.to_string())
    }

    fn io(e: impl std::fmt::Display) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse { .. } | Error::Io(_) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read_text(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_key(path: &Path) -> CliResult<Key> {
    let text = read_text(path)?;
    Key::from_hex(&text).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
}

fn read_attack(path: &Path) -> CliResult<AttackSpec> {
    serde_json::from_str(&read_text(path)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> CliResult {
    match out {
        Some(path) => {
            fs::write(path, bytes).map_err(|e| Failure::Io(format!("{}: {e}", path.display())))
        }
        None => std::io::stdout().write_all(bytes).map_err(Failure::io),
    }
}

fn to_json<S: Serialize>(value: &S) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("report serializes");
    bytes.push(b'\n');
    bytes
}

fn parse_message(spec: &str) -> CliResult<State> {
    let state = match spec {
        "" => return Err(Failure::usage("message must not be empty")),
        "plus" => State::prepare_product(&[BasisSymbol::PLUS]),
        "minus" => State::prepare_product(&[BasisSymbol::MINUS]),
        "bell" => {
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let z = qsac::Complex::new(0.0, 0.0);
            let a = qsac::Complex::new(h, 0.0);
            State::from_amplitudes(vec![a, z, z, a])
        }
        basis => {
            let symbols = basis
                .chars()
                .map(|c| {
                    BasisSymbol::from_char(c).ok_or_else(|| {
                        Failure::Usage(format!(
                            "message {basis:?}: expected characters 0 1 + - or a named state (plus, minus, bell)"
                        ))
                    })
                })
                .collect::<CliResult<Vec<_>>>()?;
            State::prepare_product(&symbols)
        }
    };
    Ok(state?)
}

#[derive(Serialize)]
struct KeysReport {
    key_bits: usize,
    kq_seed: String,
    kt_seed: String,
    check_string: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    transform_string: Option<Vec<usize>>,
}

fn cmd_keys_derive(key_file: &Path, n: usize, m: Option<usize>) -> CliResult {
    let key = read_key(key_file)?;
    let sub = derive_subkeys(&key);
    let check = derive_check_string(&sub, n)?;
    let transform = m
        .map(|m| derive_transform_string(&sub, n, m).map(|t| t.targets().to_vec()))
        .transpose()?;
    emit(
        None,
        &to_json(&KeysReport {
            key_bits: key.bit_len(),
            kq_seed: format!("{:#018x}", sub.kq_seed),
            kt_seed: format!("{:#018x}", sub.kt_seed),
            check_string: check.to_string(),
            transform_string: transform,
        }),
    )
}

fn cmd_encode(key_file: &Path, n: usize, message: &str, out: Option<&Path>) -> CliResult {
    let key = read_key(key_file)?;
    let message = parse_message(message)?;
    let params = QsacParams::new(n, message.num_qubits())?;
    let schedule = Schedule::derive(&key, params)?;
    let codeword = encode_with_schedule(&message, &schedule)?;
    emit(out, codeword.to_text().as_bytes())?;
    let summary = format!(
        "n {} m {} S_Q length {} S_T length {}",
        params.n,
        params.m,
        schedule.check().len(),
        schedule.transform().targets().len()
    );
    if out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

#[derive(Serialize)]
struct VerifyReport {
    authenticated: bool,
    mismatched_check_indices: Vec<usize>,
    records: Vec<MeasurementRecord>,
    exact_pass_probability: f64,
    seed: u64,
    message_state: String,
}

fn cmd_verify(key_file: &Path, codeword: &Path, seed: u64, out: Option<&Path>) -> CliResult {
    let key = read_key(key_file)?;
    let codeword = Codeword::from_text(&read_text(codeword)?)
        .map_err(|e| Failure::Io(format!("{}: {e}", codeword.display())))?;
    let exact = exact_pass_probability(&codeword, &key)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let outcome = verify(&codeword, &key, &mut rng)?;
    emit(
        out,
        &to_json(&VerifyReport {
            authenticated: outcome.authenticated,
            mismatched_check_indices: outcome.mismatched_check_indices,
            records: outcome.records,
            exact_pass_probability: exact,
            seed,
            message_state: outcome.message_state.dump(),
        }),
    )?;
    if outcome.authenticated {
        Ok(())
    } else {
        Err(Failure::Rejected)
    }
}

fn csv_bytes(rows: &[DetectionRow]) -> CliResult<Vec<u8>> {
    let mut bytes = Vec::new();
    write_detection_csv(rows, &mut bytes)?;
    Ok(bytes)
}

#[allow(clippy::too_many_arguments)]
fn cmd_attack(
    key_file: &Path,
    n: usize,
    message: &str,
    config: &Path,
    trials: u64,
    seed: u64,
    out: Option<&Path>,
) -> CliResult {
    let key = read_key(key_file)?;
    let message = parse_message(message)?;
    let attack = read_attack(config)?;
    let params = QsacParams::new(n, message.num_qubits())?;
    let stats = mc_detection(&attack, params, &key, &message, trials, seed)?;
    emit(
        out,
        &csv_bytes(&[DetectionRow::new(params, &attack, &stats)])?,
    )
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum SweepAxis {
    J(Vec<usize>),
    N(Vec<usize>),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentConfig {
    n: usize,
    m: usize,
    attack: AttackSpec,
    trials: u64,
    seed: u64,
    #[serde(default)]
    sweep: Option<SweepAxis>,
    #[serde(default)]
    output_path: Option<PathBuf>,
    #[serde(default)]
    key: Option<Key>,
    /// Message spec as accepted by `--message`; `|0…0>` when absent.
    #[serde(default)]
    message: Option<String>,
}

fn config_error(field: &str, msg: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("config field `{field}`: {msg}"))
}

struct SweepPoint {
    params: QsacParams,
    attack: AttackSpec,
}

fn sweep_points(cfg: &ExperimentConfig) -> CliResult<Vec<SweepPoint>> {
    let point = |n: usize, attack: AttackSpec, field: &str| -> CliResult<SweepPoint> {
        let params = QsacParams::new(n, cfg.m).map_err(|e| config_error(field, e))?;
        attack
            .validate(params)
            .map_err(|e| config_error(field, e))?;
        Ok(SweepPoint { params, attack })
    };
    match &cfg.sweep {
        None => Ok(vec![point(cfg.n, cfg.attack.clone(), "attack")?]),
        Some(SweepAxis::N(ns)) => {
            if ns.is_empty() {
                return Err(config_error("sweep.n", "must list at least one value"));
            }
            ns.iter()
                .map(|&n| point(n, cfg.attack.clone(), "sweep.n"))
                .collect()
        }
        Some(SweepAxis::J(js)) => {
            if js.is_empty() {
                return Err(config_error("sweep.j", "must list at least one value"));
            }
            if cfg.attack.kind == AttackKind::Impersonation {
                return Err(config_error(
                    "sweep.j",
                    "Impersonation has no positions to sweep",
                ));
            }
            js.iter()
                .map(|&j| {
                    if j == 0 {
                        return Err(config_error("sweep.j", "values must be at least 1"));
                    }
                    let mut attack = cfg.attack.clone();
                    attack.positions = Positions::Random { random: j };
                    point(cfg.n, attack, "sweep.j")
                })
                .collect()
        }
    }
}

fn cmd_sweep(config: &Path, key_file: Option<&Path>, out: Option<&Path>) -> CliResult {
    let cfg: ExperimentConfig = serde_json::from_str(&read_text(config)?)
        .map_err(|e| Failure::Usage(format!("{}: {e}", config.display())))?;
    if cfg.trials < 1 {
        return Err(config_error("trials", "must be at least 1"));
    }
    let key = match key_file {
        Some(path) => read_key(path)?,
        None => cfg
            .key
            .clone()
            .ok_or_else(|| config_error("key", "missing (or pass --key-file)"))?,
    };
    let points = sweep_points(&cfg)?;
    let message = match &cfg.message {
        Some(spec) => parse_message(spec).map_err(|e| match e {
            Failure::Usage(msg) => config_error("message", msg),
            other => other,
        })?,
        None => State::zero(cfg.m)?,
    };
    if message.num_qubits() != cfg.m {
        return Err(config_error(
            "message",
            format!("holds {} qubits but m = {}", message.num_qubits(), cfg.m),
        ));
    }
    let rows = points
        .iter()
        .map(|p| {
            let stats = mc_detection(&p.attack, p.params, &key, &message, cfg.trials, cfg.seed)?;
            Ok(DetectionRow::new(p.params, &p.attack, &stats))
        })
        .collect::<CliResult<Vec<_>>>()?;
    emit(out.or(cfg.output_path.as_deref()), &csv_bytes(&rows)?)
}

#[derive(Serialize)]
struct SessionReport {
    authenticated: bool,
    sent_bits: String,
    received_bits: Option<String>,
    transcript_path: Option<String>,
}

#[derive(Serialize)]
struct RepeatReport {
    sent_bits: String,
    sessions: u64,
    aborts: u64,
    abort_rate: f64,
    ci95_half_width: f64,
    seed: u64,
    transcript_path: Option<String>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_qsdc(
    key_file: &Path,
    bits: &str,
    n: usize,
    seed: u64,
    config: Option<&Path>,
    repeat: Option<u64>,
    out: Option<&Path>,
    transcript: Option<&Path>,
) -> CliResult {
    let key = read_key(key_file)?;
    let message = QsdcMessage::parse(bits)?;
    let attack = config.map(read_attack).transpose()?;
    if let Some(spec) = &attack {
        spec.validate(QsacParams::new(n, 2 * message.pairs())?)?;
    }
    let sessions = repeat.unwrap_or(1);
    if sessions < 1 {
        return Err(Failure::usage("--repeat must be at least 1"));
    }
    let first = run_session::<f64>(&message, &key, n, attack.as_ref(), seed)?;
    let transcript_path = match transcript {
        Some(path) => {
            fs::write(path, first.transcript.to_jsonl())
                .map_err(|e| Failure::Io(format!("{}: {e}", path.display())))?;
            Some(path.display().to_string())
        }
        None => None,
    };

    if repeat.is_none() {
        emit(
            out,
            &to_json(&SessionReport {
                authenticated: first.reception.authenticated,
                sent_bits: message.to_string(),
                received_bits: first.reception.bits.as_ref().map(ToString::to_string),
                transcript_path,
            }),
        )?;
        return if first.reception.authenticated {
            Ok(())
        } else {
            Err(Failure::Rejected)
        };
    }

    let mut passes = u64::from(first.reception.authenticated);
    for s in 1..sessions {
        let session = run_session::<f64>(&message, &key, n, attack.as_ref(), seed.wrapping_add(s))?;
        passes += u64::from(session.reception.authenticated);
    }
    let stats = DetectionStats::from_counts(sessions, sessions - passes, seed, None);
    emit(
        out,
        &to_json(&RepeatReport {
            sent_bits: message.to_string(),
            sessions,
            aborts: stats.passes,
            abort_rate: stats.pass_rate,
            ci95_half_width: stats.ci95_half_width,
            seed,
            transcript_path,
        }),
    )
}

fn run(cli: Cli) -> CliResult {
    match cli.command {
        Command::Keys {
            command: KeysCommand::Derive { key_file, n, m },
        } => cmd_keys_derive(&key_file, n, m),
        Command::Encode {
            key_file,
            n,
            message,
            out,
        } => cmd_encode(&key_file, n, &message, out.as_deref()),
        Command::Verify {
            key_file,
            codeword,
            seed,
            out,
        } => cmd_verify(&key_file, &codeword, seed, out.as_deref()),
        Command::Attack {
            key_file,
            n,
            message,
            config,
            trials,
            seed,
            out,
        } => cmd_attack(
            &key_file,
            n,
            &message,
            &config,
            trials,
            seed,
            out.as_deref(),
        ),
        Command::Sweep {
            config,
            key_file,
            out,
        } => cmd_sweep(&config, key_file.as_deref(), out.as_deref()),
        Command::Qsdc {
            key_file,
            message,
            n,
            seed,
            config,
            repeat,
            out,
            transcript,
        } => cmd_qsdc(
            &key_file,
            &message,
            n,
            seed,
            config.as_deref(),
            repeat,
            out.as_deref(),
            transcript.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Rejected) => ExitCode::from(1),
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
