//! `cme`: run measurement experiments from the command line.
//!
//! Exit codes: 0 success, 1 I/O or internal failure, 2 usage or
//! configuration error, 3 a measurement timed out, 4 an estimate was
//! refused for lack of trials.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use num_traits::One;
use serde_json::json;

use cme::advice::{decode_advice, encode_advice, AdviceError, AdviceFunction, Alphabet};
use cme::dyadic::{render_bits, Dyadic};
use cme::harness::{advice_schedule, estimate_with_trials, required_trials};
use cme::mass::MassSource;
use cme::notation::{parse_schedule, MassSpec};
use cme::oracle::{Oracle, OracleConfig, PrecisionMode, TimeoutReaction, TimingModel, WaitPolicy};
use cme::procedures::{bisection, grid_algorithm, program_nk, program_pk, MeasurementReport, Status};
use cme::report::{diff_dirs, Report, RunManifest, MANIFEST_FILE};
use cme::time::SimTime;

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_TIMEOUT: u8 = 3;
const EXIT_REFUSED: u8 = 4;

#[derive(Parser)]
#[command(name = "cme", version, about = "Collider machine experiments: measure an unknown mass through a timed oracle")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read digits of a mass with a measurement procedure.
    Measure(MeasureArgs),
    /// Estimate leading digits of s through a fixed-precision oracle.
    Estimate(EstimateArgs),
    /// Encode advice corpora as masses, or decode them back.
    Advice {
        #[command(subcommand)]
        action: AdviceAction,
    },
    /// Re-run a manifest and compare its reports with the originals.
    Replay(ReplayArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Errorfree,
    Arbitrary,
    Fixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum WaitArg {
    Interrupt,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum ReactionArg {
    Abort,
    Return,
}

#[derive(Clone, Copy, ValueEnum)]
enum TimingArg {
    Protocol,
    Kinematic,
}

#[derive(Args)]
struct OracleFlags {
    /// TOML file with oracle settings; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Precision error, a dyadic such as 1/16.
    #[arg(long)]
    epsilon: Option<String>,
    #[arg(long, env = "CME_SEED")]
    seed: Option<u64>,
    /// Time constant of the experiment.
    #[arg(long = "K")]
    k_const: Option<String>,
    /// Jitter bound on answer times.
    #[arg(long = "N")]
    jitter: Option<String>,
    #[arg(long, value_enum)]
    wait: Option<WaitArg>,
    #[arg(long = "on-timeout", value_enum)]
    on_timeout: Option<ReactionArg>,
    #[arg(long, value_enum)]
    timing: Option<TimingArg>,
}

#[derive(Args)]
struct MeasureArgs {
    /// Unknown mass, e.g. rational:1/3, pattern:3,2;tail=const:1, file:m.txt.
    #[arg(long)]
    mass: String,
    /// Protocol T(n), e.g. exp:k=2, alg:k=2,alpha=1, table:1,4,16, const:64.
    #[arg(long, default_value = "exp:k=2")]
    schedule: String,
    #[arg(long, default_value_t = 16)]
    digits: u64,
    /// bisection, grid:R, pk:K or nk:K.
    #[arg(long, default_value = "bisection")]
    procedure: String,
    #[command(flatten)]
    oracle: OracleFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    /// The number s in [0, 1] whose digits are sought.
    #[arg(long)]
    s: String,
    /// Digits of s to estimate.
    #[arg(long)]
    digits: u32,
    #[arg(long, default_value_t = 0.25)]
    delta: f64,
    #[arg(long, default_value_t = 1)]
    replications: u64,
    /// Trials per estimate; defaults to the least admissible count.
    #[arg(long)]
    zeta: Option<u64>,
    /// Refuse when the admissible count exceeds this.
    #[arg(long, default_value_t = 10_000_000)]
    max_trials: u64,
    /// Run even with too few trials.
    #[arg(long)]
    force: bool,
    #[command(flatten)]
    oracle: OracleFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum AdviceAction {
    /// Print the mass prefix encoding a corpus up to length n_max.
    Encode {
        /// Lines of `n<TAB>f(n)`.
        #[arg(long)]
        corpus: PathBuf,
        /// Letter width in bits; omit for binary advice.
        #[arg(long)]
        width: Option<u32>,
        #[arg(long, default_value_t = 16)]
        n_max: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Recover f(2^m) for every m up to the given input length.
    Decode {
        /// Measure the encoding of this corpus through the oracle.
        #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
        corpus: Option<PathBuf>,
        /// Decode a raw digit string instead.
        #[arg(long)]
        bits: Option<String>,
        #[arg(long)]
        width: Option<u32>,
        #[arg(long, default_value_t = 16)]
        max_len: u64,
        #[command(flatten)]
        oracle: OracleFlags,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReplayArgs {
    manifest: PathBuf,
    /// Where to write the re-run; defaults to `replay/` next to the manifest.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Io(String),
    Refused(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Io(_) => EXIT_IO,
            CliError::Refused(_) => EXIT_REFUSED,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Io(m) | CliError::Refused(m) => f.write_str(m),
        }
    }
}

fn usage(e: impl std::fmt::Display) -> CliError {
    CliError::Usage(e.to_string())
}

fn io_err(e: impl std::fmt::Display) -> CliError {
    CliError::Io(e.to_string())
}

fn exact(text: &str, what: &str) -> Result<BigRational, CliError> {
    text.parse::<SimTime>().map(SimTime::into_rational).map_err(|e| usage(format!("--{what}: {e}")))
}

fn dyadic(text: &str) -> Result<Dyadic, CliError> {
    text.parse().map_err(|e| usage(format!("--epsilon: {e}")))
}

impl OracleFlags {
    fn resolve(&self) -> Result<OracleConfig, CliError> {
        let mut cfg = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).map_err(|e| io_err(format!("{}: {e}", p.display())))?;
                OracleConfig::from_toml(&text).map_err(|e| usage(format!("{}: {e}", p.display())))?
            }
            None => OracleConfig::default(),
        };
        if let Some(k) = &self.k_const {
            cfg.k_const = exact(k, "K")?;
        }
        if let Some(n) = &self.jitter {
            cfg.jitter = exact(n, "N")?;
        }
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        let eps = self.epsilon.as_deref().map(dyadic).transpose()?;
        match (self.mode, eps) {
            (Some(ModeArg::Errorfree), _) => cfg.mode = PrecisionMode::ErrorFree,
            (Some(ModeArg::Arbitrary), _) => cfg.mode = PrecisionMode::ArbitraryPrecision,
            (Some(ModeArg::Fixed), Some(epsilon)) | (None, Some(epsilon)) => cfg.mode = PrecisionMode::FixedPrecision { epsilon },
            (Some(ModeArg::Fixed), None) => {
                if !matches!(cfg.mode, PrecisionMode::FixedPrecision { .. }) {
                    return Err(usage("--mode fixed needs --epsilon"));
                }
            }
            (None, None) => {}
        }
        if let Some(w) = self.wait {
            cfg.wait_policy = match w {
                WaitArg::Interrupt => WaitPolicy::InterruptDriven,
                WaitArg::Full => WaitPolicy::FullBudget,
            };
        }
        if let Some(r) = self.on_timeout {
            cfg.timeout_reaction = match r {
                ReactionArg::Abort => TimeoutReaction::Abort,
                ReactionArg::Return => TimeoutReaction::ReturnTimeout,
            };
        }
        if let Some(t) = self.timing {
            cfg.timing = match t {
                TimingArg::Protocol => TimingModel::Protocol,
                TimingArg::Kinematic => TimingModel::Kinematic,
            };
        }
        cfg.validate().map_err(usage)?;
        Ok(cfg)
    }
}

fn alphabet(width: Option<u32>) -> Alphabet {
    width.map_or(Alphabet::Binary, Alphabet::FixedWidth)
}

fn load_corpus(path: &Path, width: Option<u32>) -> Result<AdviceFunction, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| io_err(format!("{}: {e}", path.display())))?;
    AdviceFunction::from_corpus(path.display().to_string(), &text, alphabet(width)).map_err(|e| match e {
        AdviceError::Corpus { line, msg } => usage(format!("{}:{line}:1: {msg}", path.display())),
        other => usage(format!("{}: {other}", path.display())),
    })
}

/// Result of one subcommand: the report, its manifest and the exit code.
struct Outcome {
    manifest: RunManifest,
    report: Report,
    code: u8,
}

fn measure(a: &MeasureArgs, args: Vec<String>) -> Result<Outcome, CliError> {
    let cfg = a.oracle.resolve()?;
    let schedule = parse_schedule(&a.schedule, &cfg.k_const).map_err(|e| usage(format!("--schedule: {e}")))?;
    let spec = MassSpec::parse_short(&a.mass).map_err(|e| usage(format!("--mass: {e}")))?.resolve().map_err(usage)?;
    let src = spec.build(&schedule, &cfg.k_const).map_err(|e| usage(format!("--mass: {e}")))?;
    let manifest = RunManifest::new(
        "measure",
        args,
        json!({
            "oracle": cfg.to_json(),
            "mass": spec.to_string(),
            "schedule": schedule.describe(),
            "digits": a.digits,
            "procedure": a.procedure,
        }),
        cfg.seed,
    );
    let mut oracle = Oracle::new(cfg, src.clone()).map_err(usage)?;
    let (name, param) = a.procedure.split_once(':').unwrap_or((a.procedure.as_str(), ""));
    let param = || param.parse::<u64>().map_err(|_| usage(format!("--procedure {name} needs a numeric parameter")));
    let run: MeasurementReport = match name {
        "bisection" => bisection(&mut oracle, a.digits, &schedule),
        "grid" => grid_algorithm(&mut oracle, param()?),
        "pk" => program_pk(&mut oracle, param()?, a.digits),
        "nk" => program_nk(&mut oracle, param()?, a.digits),
        other => return Err(usage(format!("unknown procedure {other:?}"))),
    }
    .map_err(usage)?;

    let mut report = Report::new(&manifest);
    let mut body = run.to_json();
    body["mass"] = json!(spec.to_string());
    body["schedule"] = json!(schedule.describe());
    body["first_mismatch"] = json!(run.first_mismatch(&src));
    report.record("measurement", body);
    oracle.transcript().write_jsonl(report.transcript_sink()).map_err(io_err)?;

    report.line(format!("procedure:  {}", run.procedure));
    report.line(format!("mass:       {spec}"));
    report.line(format!("schedule:   {}", schedule.describe()));
    report.line(format!("digits:     {}", if run.digits.is_empty() { "-".into() } else { run.digit_string() }));
    let code = match run.status {
        Status::Complete(n) => {
            report.line(format!("status:     complete ({n} digits)"));
            0
        }
        Status::TimedOutAtDigit(j) => {
            report.line(format!("status:     timed out at digit {j}"));
            EXIT_TIMEOUT
        }
    };
    report.line(format!("queries:    {}", run.transcript.len()));
    report.line(format!("simulated:  {} ({:.6e})", run.total_time, run.total_time.to_f64()));
    Ok(Outcome { manifest, report, code })
}

fn estimate(a: &EstimateArgs, args: Vec<String>) -> Result<Outcome, CliError> {
    let mut cfg = a.oracle.resolve()?;
    let PrecisionMode::FixedPrecision { epsilon } = cfg.mode.clone() else {
        return Err(usage("estimate needs --epsilon (a power of two such as 1/16)"));
    };
    if !epsilon.numerator().is_one() || epsilon.exponent() == 0 {
        return Err(usage(format!("--epsilon must be 2^-e with e >= 1, got {epsilon}")));
    }
    if a.replications == 0 {
        return Err(usage("--replications must be at least 1"));
    }
    let schedule = parse_schedule("exp:k=2", &cfg.k_const).map_err(usage)?;
    let s_spec = MassSpec::parse_short(&a.s).map_err(|e| usage(format!("--s: {e}")))?.resolve().map_err(usage)?;
    let s_src = s_spec.build(&schedule, &cfg.k_const).map_err(|e| usage(format!("--s: {e}")))?;
    let required = required_trials(a.digits, a.delta).map_err(usage)?;
    let zeta = a.zeta.unwrap_or(required);
    if !a.force {
        if zeta < required {
            return Err(CliError::Refused(format!(
                "{zeta} trials are too few: at least {required} are required (use --force to run anyway)"
            )));
        }
        if zeta > a.max_trials {
            return Err(CliError::Refused(format!(
                "{} digits at delta {} need {required} trials, above --max-trials {} (use --force to run anyway)",
                a.digits, a.delta, a.max_trials
            )));
        }
    }
    let truth = render_bits(&s_src.digits(a.digits as u64));
    let mu = MassSource::fixed_precision_embedding(&s_src, epsilon.exponent());
    let base_seed = cfg.seed;
    let manifest = RunManifest::new(
        "estimate",
        args,
        json!({
            "oracle": cfg.to_json(),
            "s": s_spec.to_string(),
            "digits": a.digits,
            "delta": a.delta,
            "zeta": zeta,
            "replications": a.replications,
            "forced": a.force,
        }),
        base_seed,
    );
    let mut report = Report::new(&manifest);
    let mut failures = 0u64;
    let mut sim_total = SimTime::zero();
    for rep in 0..a.replications {
        cfg.seed = base_seed.wrapping_add(rep);
        let mut oracle = Oracle::new(cfg.clone(), mu.clone()).map_err(usage)?;
        oracle.set_recording(false);
        let est = estimate_with_trials(&mut oracle, a.digits, a.delta, zeta).map_err(usage)?;
        let correct = est.digits == truth;
        failures += u64::from(!correct);
        sim_total += &est.elapsed_total;
        let mut body = serde_json::to_value(&est).map_err(io_err)?;
        body["replication"] = json!(rep);
        body["seed"] = json!(cfg.seed);
        body["truth"] = json!(truth);
        body["correct"] = json!(correct);
        report.record("estimate", body);
    }
    let reps = a.replications as f64;
    let rate = failures as f64 / reps;
    let tolerance = a.delta + 3.0 * (a.delta * (1.0 - a.delta) / reps).sqrt();
    report.record(
        "aggregate",
        json!({
            "replications": a.replications,
            "failures": failures,
            "failure_rate": rate,
            "delta": a.delta,
            "tolerance": tolerance,
            "within_tolerance": rate < tolerance,
            "simulated_total": sim_total,
        }),
    );
    report.line(format!("s:            {s_spec} (leading digits {truth})"));
    report.line(format!("epsilon:      {epsilon}"));
    report.line(format!("trials:       {zeta} per estimate (admissible from {required})"));
    report.line(format!("replications: {}", a.replications));
    report.line(format!("failure rate: {rate:.4} against delta {} (3-sigma tolerance {tolerance:.4})", a.delta));
    report.line(format!("simulated:    {:.6e}", sim_total.to_f64()));
    Ok(Outcome { manifest, report, code: 0 })
}

fn advice_encode(corpus: &Path, width: Option<u32>, n_max: u64, args: Vec<String>) -> Result<Outcome, CliError> {
    let f = load_corpus(corpus, width)?;
    let prefix = encode_advice(&f, n_max).map_err(usage)?;
    let manifest = RunManifest::new(
        "advice encode",
        args,
        json!({"corpus": corpus.display().to_string(), "alphabet": format!("{:?}", f.alphabet()), "n_max": n_max}),
        0,
    );
    let mut report = Report::new(&manifest);
    report
        .record("encoding", json!({"n_max": n_max, "bits": prefix.render(), "length": prefix.bits.len(), "separators": prefix.separators}));
    report.line(format!("corpus:     {}", corpus.display()));
    report.line(format!("digits:     {}", prefix.bits.len()));
    report.line(format!("separators: {:?}", prefix.separators));
    report.line(format!("prefix:     0.{}", prefix.render()));
    Ok(Outcome { manifest, report, code: 0 })
}

fn advice_decode(
    corpus: Option<&Path>,
    bits: Option<&str>,
    width: Option<u32>,
    max_len: u64,
    flags: &OracleFlags,
    args: Vec<String>,
) -> Result<Outcome, CliError> {
    let alphabet = alphabet(width);
    let top = cme::advice::separator_target(max_len.max(1));
    let (digits, reference, cfg_json, code) = match (corpus, bits) {
        (Some(path), _) => {
            let f = load_corpus(path, width)?;
            let cfg = flags.resolve()?;
            // enough digits to pass the separator after the block for 2^top
            let needed = encode_advice(&f, 1 << top).map_err(usage)?.bits.len() as u64;
            let cfg_json = cfg.to_json();
            let mut oracle = Oracle::new(cfg, MassSource::from_advice(f.clone())).map_err(usage)?;
            let schedule = advice_schedule(&oracle.config().k_const);
            let run = bisection(&mut oracle, needed, &schedule).map_err(usage)?;
            let code = if run.is_complete() { 0 } else { EXIT_TIMEOUT };
            (run.digits, Some(f), cfg_json, code)
        }
        (None, Some(b)) => (cme::dyadic::parse_bits(b).map_err(|e| usage(format!("--bits: {e}")))?, None, json!(null), 0),
        (None, None) => return Err(usage("give --corpus or --bits")),
    };
    let manifest = RunManifest::new(
        "advice decode",
        args,
        json!({
            "corpus": corpus.map(|p| p.display().to_string()),
            "bits": bits,
            "alphabet": format!("{alphabet:?}"),
            "max_len": max_len,
            "oracle": cfg_json,
        }),
        flags.seed.unwrap_or(0),
    );
    let mut report = Report::new(&manifest);
    report.line(format!("{:>3}  {:>12}  {:>11}  advice", "m", "lengths", "digits read"));
    let mut code = code;
    for m in 0..=top {
        let w_len = 1u64 << m;
        match decode_advice(digits.iter().copied(), w_len, alphabet) {
            Ok(d) => {
                let matches = reference.as_ref().map(|f| f.eval(w_len) == d.word);
                report.record("decoded", json!({"m": m, "word": d.word, "digits_read": d.digits_read, "matches_corpus": matches}));
                let lo = if m == 0 { 1 } else { (1 << (m - 1)) + 1 };
                report.line(format!("{m:>3}  {:>12}  {:>11}  {:?}", format!("{lo}..={w_len}"), d.digits_read, d.word));
                if matches == Some(false) {
                    code = EXIT_IO;
                }
            }
            Err(AdviceError::Truncated { read }) => {
                report.record("truncated", json!({"m": m, "digits_read": read}));
                report.line(format!("{m:>3}  digits run out after {read}"));
                break;
            }
            Err(e) => return Err(usage(e)),
        }
    }
    Ok(Outcome { manifest, report, code })
}

/// Drop the subcommand words, output flags and any seed, then pin the seed.
fn normalize(argv: &[String], words: usize, seed: Option<u64>) -> Vec<String> {
    let mut out = Vec::new();
    let mut it = argv.iter().skip(1 + words);
    while let Some(a) = it.next() {
        if a == "--out" || a == "--seed" {
            it.next();
        } else if !(a.starts_with("--out=") || a.starts_with("--seed=")) {
            out.push(a.clone());
        }
    }
    if let Some(s) = seed {
        out.push("--seed".into());
        out.push(s.to_string());
    }
    out
}

fn emit(outcome: Outcome, out: Option<&Path>, started: Instant) -> Result<u8, CliError> {
    let Outcome { mut manifest, report, code } = outcome;
    print!("{}", report.render_summary());
    println!("manifest:   {}", report.hash());
    println!("wall-clock: {:.3} s", started.elapsed().as_secs_f64());
    if let Some(dir) = out {
        report.write_dir(dir, &mut manifest).map_err(|e| io_err(format!("{}: {e}", dir.display())))?;
        println!("reports in: {}", dir.display());
    }
    Ok(code)
}

fn replay(a: &ReplayArgs) -> Result<u8, CliError> {
    let manifest = RunManifest::load(&a.manifest).map_err(|e| io_err(format!("{}: {e}", a.manifest.display())))?;
    let original = a.manifest.parent().unwrap_or(Path::new(".")).to_path_buf();
    let target = a.out.clone().unwrap_or_else(|| original.join("replay"));
    let mut argv = vec!["cme".to_string()];
    argv.extend(manifest.command.split(' ').map(str::to_string));
    argv.extend(manifest.args.iter().cloned());
    argv.push("--out".into());
    argv.push(target.display().to_string());
    let code = run(&argv)?;
    let replayed = RunManifest::load(&target.join(MANIFEST_FILE)).map_err(io_err)?;
    if replayed.hash() != manifest.hash() {
        println!("replay: manifest hash differs ({} vs {})", replayed.hash(), manifest.hash());
        return Ok(EXIT_IO);
    }
    let differing = diff_dirs(&original, &target).map_err(io_err)?;
    if differing.is_empty() {
        println!("replay: reports identical");
        Ok(code)
    } else {
        println!("replay: reports differ in {}", differing.join(", "));
        Ok(EXIT_IO)
    }
}

fn run(argv: &[String]) -> Result<u8, CliError> {
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code() as u8;
            let _ = e.print();
            return Ok(code);
        }
    };
    let started = Instant::now();
    match &cli.command {
        Command::Measure(a) => {
            let seed = a.oracle.resolve()?.seed;
            let outcome = measure(a, normalize(argv, 1, Some(seed)))?;
            emit(outcome, a.out.as_deref(), started)
        }
        Command::Estimate(a) => {
            let seed = a.oracle.resolve()?.seed;
            let outcome = estimate(a, normalize(argv, 1, Some(seed)))?;
            emit(outcome, a.out.as_deref(), started)
        }
        Command::Advice { action: AdviceAction::Encode { corpus, width, n_max, out } } => {
            let outcome = advice_encode(corpus, *width, *n_max, normalize(argv, 2, None))?;
            emit(outcome, out.as_deref(), started)
        }
        Command::Advice { action: AdviceAction::Decode { corpus, bits, width, max_len, oracle, out } } => {
            let seed = if corpus.is_some() { Some(oracle.resolve()?.seed) } else { None };
            let outcome = advice_decode(corpus.as_deref(), bits.as_deref(), *width, *max_len, oracle, normalize(argv, 2, seed))?;
            emit(outcome, out.as_deref(), started)
        }
        Command::Replay(a) => replay(a),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    match run(&argv) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("cme: {e}");
            ExitCode::from(e.code())
        }
    }
}
