//! `bcns`: command-line front end for the bit commitment toolkit.
//!
//! Exit codes: 0 accepted or secure, 2 rejected or insecure, 3 aborted,
//! 64 usage error, 1 any other failure.

use std::fs;
use std::io::{self, Write};
use std::net::{TcpListener, TcpStream};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

use bcns::codes::generate_parity_check;
use bcns::config::{KvConfig, RunConfig};
use bcns::estimate::{accidental_rate_bound, estimate_probabilities, SourceRates};
use bcns::net::{run_alice, run_bob};
use bcns::photon::{measured_rates, simulate_session, write_stream_csv, SourceModel};
use bcns::protocol::{run_local, CodeSource, Reason, SessionConfig, Verdict};
use bcns::security::params::lambda_threshold;
use bcns::security::repro::{reproduce, ExperimentInputs};
use bcns::security::{security_region, AxisSpec, Erasures, RegionParams, StorageAssumption, StorageModel};
use bcns::symmetrize::{adjusted_no_click, solve_keep_probabilities, DetectorCounts};
use bcns::transcript::Transcript;

const EXIT_REJECT: u8 = 2;
const EXIT_ABORT: u8 = 3;
const EXIT_USAGE: u8 = 64;

/// A problem with the arguments or configuration rather than the run.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(e: impl std::fmt::Display) -> anyhow::Error {
    Usage(e.to_string()).into()
}

#[derive(Parser, Debug)]
#[command(name = "bcns", version, about = "Bit commitment in the noisy-storage model")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Protocol probabilities from measured detection rates.
    Estimate(EstimateArgs),
    /// Keep probabilities that equalize a 2x2 table of detector counts.
    Symmetrize(SymmetrizeArgs),
    /// Write a random parity-check matrix to a code file.
    Codegen(CodegenArgs),
    /// Simulate a timestamped detection stream from the pair source.
    Simulate(SimulateArgs),
    /// Run a commitment session.
    Run {
        #[command(subcommand)]
        mode: RunMode,
    },
    /// Sweep two parameters and emit the security region as CSV.
    Region(RegionArgs),
    /// Largest storage size that keeps the commitment hiding.
    Maxstorage(MaxStorageArgs),
    /// Replay Bob's side of a recorded transcript and report his verdict.
    VerifyTranscript(VerifyArgs),
    /// Derive the full parameter chain of the reference experiment.
    Reproduce(FormatArg),
}

#[derive(Clone, Copy, Debug, Default, ValueEnum)]
enum Format {
    #[default]
    Kv,
    Csv,
}

#[derive(Args, Debug, Clone, Copy, Default)]
struct FormatArg {
    /// Output format.
    #[arg(long, value_enum, default_value_t = Format::Kv)]
    format: Format,
}

#[derive(Args, Debug)]
struct EstimateArgs {
    /// key = value file with r_a, r_b, r_p, tau_c; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Alice singles rate (1/s).
    #[arg(long)]
    r_a: Option<f64>,
    /// Bob singles rate (1/s).
    #[arg(long)]
    r_b: Option<f64>,
    /// Coincidence rate (1/s).
    #[arg(long)]
    r_p: Option<f64>,
    /// Coincidence window (s).
    #[arg(long)]
    tau_c: Option<f64>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct SymmetrizeArgs {
    /// 2x2 counts table: one row per bit value, one column per basis.
    counts: PathBuf,
    /// Honest no-click probability to adjust for the discarded clicks.
    #[arg(long)]
    p_noclick: Option<f64>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct CodegenArgs {
    #[arg(long)]
    n: usize,
    /// Code dimension; the matrix has n - k rows.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    seed: u64,
    /// Simulated time (s).
    #[arg(long, default_value_t = 1.0)]
    duration: f64,
    /// Pair emission rate (1/s); defaults reproduce the reference rates.
    #[arg(long)]
    r_s: Option<f64>,
    #[arg(long)]
    eta_a: Option<f64>,
    #[arg(long)]
    eta_b: Option<f64>,
    /// Background rate on Alice's side before losses (1/s).
    #[arg(long)]
    r_ba: Option<f64>,
    /// Background rate on Bob's side before losses (1/s).
    #[arg(long)]
    r_bb: Option<f64>,
    #[arg(long)]
    tau_c: Option<f64>,
    #[arg(long)]
    p_err: Option<f64>,
    /// Stream CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Add the ground-truth origin column.
    #[arg(long)]
    origin: bool,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Subcommand, Debug)]
enum RunMode {
    /// Both parties in this process.
    Local(SessionArgs),
    /// Listen as Alice for one session.
    Serve {
        #[arg(long)]
        addr: String,
        #[command(flatten)]
        session: SessionArgs,
    },
    /// Connect as Bob.
    Connect {
        #[arg(long)]
        addr: String,
        #[command(flatten)]
        session: SessionArgs,
    },
}

#[derive(Args, Debug, Default)]
struct SessionArgs {
    /// key = value run configuration; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Block length.
    #[arg(long)]
    n: Option<usize>,
    /// Number of signals (alternative to --n).
    #[arg(long)]
    signals: Option<u64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long)]
    p_err: Option<f64>,
    /// Honest no-click probability after symmetrization.
    #[arg(long)]
    p_noclick: Option<f64>,
    /// Committed bits, e.g. 1 or 0110.
    #[arg(long)]
    commit: Option<String>,
    /// Wait time before the basis is revealed (s).
    #[arg(long)]
    delta_t: Option<f64>,
    /// Code file written by `codegen`.
    #[arg(long)]
    code: Option<PathBuf>,
    #[arg(long)]
    code_k: Option<usize>,
    #[arg(long)]
    code_seed: Option<u64>,
    /// Derives Alice, Bob and channel seeds as seed, seed+1, seed+2.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    seed_alice: Option<u64>,
    #[arg(long)]
    seed_bob: Option<u64>,
    #[arg(long)]
    seed_channel: Option<u64>,
    #[arg(long)]
    session: Option<u64>,
    /// Write this side's transcript here.
    #[arg(long)]
    transcript: Option<PathBuf>,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct RegionArgs {
    /// First axis as name:lo:hi:steps, e.g. p_noclick_h:0:0.9:50.
    #[arg(long)]
    axis1: AxisSpec,
    /// Second axis, same form.
    #[arg(long)]
    axis2: AxisSpec,
    #[command(flatten)]
    point: PointArgs,
    /// CSV destination; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Model {
    Bounded,
    Depolarizing,
}

#[derive(Args, Debug)]
struct PointArgs {
    #[arg(long, default_value_t = 250_000)]
    n: usize,
    #[arg(long, default_value_t = 3e-4)]
    epsilon: f64,
    /// Failure probability allowed for the random code.
    #[arg(long, default_value_t = 3e-4)]
    eps_code: f64,
    #[arg(long, default_value_t = 1.0)]
    p_sent_1: f64,
    #[arg(long, default_value_t = 0.0)]
    p_noclick_h: f64,
    #[arg(long, default_value_t = 0.0)]
    p_noclick_d: f64,
    #[arg(long, default_value_t = 0.0)]
    p_err: f64,
    #[arg(long, value_enum, default_value_t = Model::Depolarizing)]
    model: Model,
    /// Storage size in qubits.
    #[arg(long, default_value_t = 0.0)]
    storage: f64,
    /// Depolarizing parameter of the memory.
    #[arg(long, default_value_t = 0.9)]
    r: f64,
    /// Code rate; defaults to the largest admissible one.
    #[arg(long)]
    rate: Option<f64>,
}

#[derive(Args, Debug)]
struct MaxStorageArgs {
    #[arg(long, value_enum, default_value_t = Model::Depolarizing)]
    model: Model,
    #[arg(long, default_value_t = 0.9)]
    r: f64,
    #[arg(long, default_value_t = 250_000)]
    n: usize,
    #[arg(long, default_value_t = 0.99e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 0.125)]
    p_sent_1: f64,
    #[arg(long, default_value_t = 0.909)]
    p_noclick_h: f64,
    #[arg(long, default_value_t = 0.875)]
    p_noclick_d: f64,
    #[arg(long, default_value_t = 0.531)]
    rate: f64,
    #[command(flatten)]
    format: FormatArg,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    /// Transcript file to check.
    #[arg(value_name = "TRANSCRIPT")]
    file: PathBuf,
    #[command(flatten)]
    session: SessionArgs,
}

type Rows = Vec<(String, String)>;

fn row(key: &str, value: impl ToString) -> (String, String) {
    (key.to_string(), value.to_string())
}

fn emit(out: &mut dyn Write, format: Format, rows: &Rows) -> io::Result<()> {
    match format {
        Format::Kv => {
            for (k, v) in rows {
                writeln!(out, "{k} = {v}")?;
            }
        }
        Format::Csv => {
            writeln!(out, "key,value")?;
            for (k, v) in rows {
                writeln!(out, "{k},{v}")?;
            }
        }
    }
    Ok(())
}

fn read_kv(path: &Path) -> Result<KvConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    KvConfig::parse(&text).map_err(|e| usage(format!("{}: {e}", path.display())))
}

fn estimate(args: &EstimateArgs, out: &mut dyn Write) -> Result<u8> {
    let file = match &args.config {
        Some(p) => read_kv(p)?,
        None => KvConfig::default(),
    };
    let pick = |flag: Option<f64>, key: &str, default: f64| -> Result<f64> {
        match (flag, file.0.get(key)) {
            (Some(v), _) => Ok(v),
            (None, Some(v)) => v.parse().map_err(|_| usage(format!("{key}: cannot parse {v:?}"))),
            (None, None) => Ok(default),
        }
    };
    if let Some(k) = file.0.keys().find(|k| !["r_a", "r_b", "r_p", "tau_c"].contains(&k.as_str())) {
        return Err(usage(format!("unknown key {k:?}")));
    }
    let rates = SourceRates::new(
        pick(args.r_a, "r_a", 23758.0)?,
        pick(args.r_b, "r_b", 22227.0)?,
        pick(args.r_p, "r_p", 2997.0)?,
        pick(args.tau_c, "tau_c", 3e-9)?,
    );
    let p = estimate_probabilities(&rates).map_err(usage)?;
    let rows = vec![
        row("p_sent_0", p.p_sent_0),
        row("p_sent_1", p.p_sent_1),
        row("p_sent_multi", p.p_sent_multi),
        row("p_noclick_h", p.p_noclick_h),
        row("p_noclick_d", p.p_noclick_d),
        row("r_acc", accidental_rate_bound(rates.r_a, rates.r_b, rates.tau_c)),
    ];
    emit(out, args.format.format, &rows)?;
    Ok(0)
}

fn symmetrize(args: &SymmetrizeArgs, out: &mut dyn Write) -> Result<u8> {
    let text = fs::read_to_string(&args.counts).with_context(|| format!("reading {}", args.counts.display()))?;
    let counts = DetectorCounts::parse(&text).map_err(usage)?;
    let keep = solve_keep_probabilities(&counts).map_err(usage)?;
    let mut rows = Vec::new();
    for x in 0..2 {
        for th in 0..2 {
            rows.push(row(&format!("t_{x}{th}"), keep.t[x][th]));
        }
    }
    rows.push(row("pr_keep", keep.pr_keep));
    if let Some(p) = args.p_noclick {
        if !(0.0..=1.0).contains(&p) {
            return Err(usage(format!("p_noclick {p} outside [0, 1]")));
        }
        rows.push(row("p_noclick_adjusted", adjusted_no_click(p, keep.pr_keep)));
    }
    emit(out, args.format.format, &rows)?;
    Ok(0)
}

fn codegen(args: &CodegenArgs, out: &mut dyn Write) -> Result<u8> {
    let code = generate_parity_check(args.n, args.k, args.seed).map_err(usage)?;
    fs::write(&args.out, code.to_bytes()).with_context(|| format!("writing {}", args.out.display()))?;
    let descriptor = CodeSource::from_code(code).descriptor;
    let rows = vec![
        row("n", args.n),
        row("k", args.k),
        row("seed", args.seed),
        row("code", descriptor),
        row("path", args.out.display()),
    ];
    emit(out, args.format.format, &rows)?;
    Ok(0)
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<u8> {
    let base = SourceModel::experiment();
    let model = SourceModel {
        r_s: args.r_s.unwrap_or(base.r_s),
        eta_a: args.eta_a.unwrap_or(base.eta_a),
        eta_b: args.eta_b.unwrap_or(base.eta_b),
        r_ba: args.r_ba.unwrap_or(base.r_ba),
        r_bb: args.r_bb.unwrap_or(base.r_bb),
        tau_c: args.tau_c.unwrap_or(base.tau_c),
        p_err: args.p_err.unwrap_or(base.p_err),
        ..base
    };
    let mut rng = ChaCha20Rng::seed_from_u64(args.seed);
    let (alice, bob) = simulate_session(&model, args.duration, &mut rng).map_err(usage)?;
    let mut events: Vec<_> = alice.iter().chain(&bob).copied().collect();
    events.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let csv = write_stream_csv(&events, args.origin);
    match &args.out {
        None => out.write_all(csv.as_bytes())?,
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            let rates = measured_rates(&alice, &bob, model.tau_c, args.duration)?;
            let rows = vec![
                row("events_alice", alice.len()),
                row("events_bob", bob.len()),
                row("r_a", rates.r_a),
                row("r_b", rates.r_b),
                row("r_p", rates.r_p),
                row("tau_c", rates.tau_c),
                row("path", path.display()),
            ];
            emit(out, args.format.format, &rows)?;
        }
    }
    Ok(0)
}

/// File values first, then flags on top.
fn run_config(args: &SessionArgs) -> Result<RunConfig> {
    let mut kv = match &args.config {
        Some(p) => read_kv(p)?,
        None => KvConfig::default(),
    };
    let file_has_seed = ["seed_alice", "seed_bob", "seed_channel"].iter().any(|k| kv.0.contains_key(*k));
    let mut flags = KvConfig::default();
    let mut put = |k: &str, v: Option<String>| {
        if let Some(v) = v {
            flags.set(k, v);
        }
    };
    put("n", args.n.map(|v| v.to_string()));
    put("signals", args.signals.map(|v| v.to_string()));
    put("epsilon", args.epsilon.map(|v| format!("{v:?}")));
    put("p_err", args.p_err.map(|v| format!("{v:?}")));
    put("p_noclick_h", args.p_noclick.map(|v| format!("{v:?}")));
    put("commit", args.commit.clone());
    put("delta_t", args.delta_t.map(|v| format!("{v:?}")));
    put("code", args.code.as_ref().map(|p| p.display().to_string()));
    put("code_k", args.code_k.map(|v| v.to_string()));
    put("code_seed", args.code_seed.map(|v| v.to_string()));
    if let Some(s) = args.seed {
        put("seed_alice", Some(s.to_string()));
        put("seed_bob", Some(s.wrapping_add(1).to_string()));
        put("seed_channel", Some(s.wrapping_add(2).to_string()));
    }
    put("seed_alice", args.seed_alice.map(|v| v.to_string()));
    put("seed_bob", args.seed_bob.map(|v| v.to_string()));
    put("seed_channel", args.seed_channel.map(|v| v.to_string()));
    put("session", args.session.map(|v| v.to_string()));

    // A code given on one level replaces the other level's choice.
    if flags.0.contains_key("code") {
        kv.0.remove("code_k");
        kv.0.remove("code_seed");
    }
    if flags.0.contains_key("code_k") || flags.0.contains_key("code_seed") {
        kv.0.remove("code");
    }
    if flags.0.contains_key("n") {
        kv.0.remove("signals");
    }
    if flags.0.contains_key("signals") {
        kv.0.remove("n");
    }
    let flag_has_seed = ["seed_alice", "seed_bob", "seed_channel"].iter().any(|k| flags.0.contains_key(*k));
    if std::env::var_os("CI").is_some() && !file_has_seed && !flag_has_seed {
        return Err(usage("seeds must be given explicitly when CI is set (use --seed)"));
    }
    kv.0.extend(flags.0);
    let mut cfg = RunConfig::default();
    cfg.apply(&kv).map_err(usage)?;
    Ok(cfg)
}

fn session_config(cfg: &RunConfig) -> Result<SessionConfig> {
    cfg.session_config().map_err(usage)
}

fn verdict_exit(reason: Reason) -> u8 {
    match reason {
        Reason::Ok => 0,
        Reason::SyndromeMismatch | Reason::ErrorCountOutOfInterval => EXIT_REJECT,
        _ => EXIT_ABORT,
    }
}

fn bits_text(b: &bcns::BitString) -> String {
    b.iter().map(|v| if v { '1' } else { '0' }).collect()
}

fn verdict_rows(rows: &mut Rows, verdict: &Verdict) {
    rows.push(row("accepted", verdict.accepted));
    rows.push(row("reason", verdict.reason));
    if let Some(bits) = &verdict.opened {
        rows.push(row("opened", bits_text(bits)));
    }
}

fn save_transcript(path: Option<&PathBuf>, t: &Transcript) -> Result<()> {
    if let Some(path) = path {
        fs::write(path, t.to_bytes()).with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(())
}

fn session_rows(cfg: &SessionConfig) -> Rows {
    vec![
        row("n", cfg.params.n),
        row("m", cfg.params.m),
        row("signals", cfg.params.signals),
        row("code", &cfg.code.descriptor),
    ]
}

fn run(mode: &RunMode, out: &mut dyn Write) -> Result<u8> {
    match mode {
        RunMode::Local(args) => {
            let rc = run_config(args)?;
            let cfg = session_config(&rc)?;
            let result = run_local(&cfg, rc.alice_inputs()?, rc.seed_bob, args.transcript.is_some())?;
            if let Some(t) = &result.transcript {
                save_transcript(args.transcript.as_ref(), t)?;
            }
            let mut rows = session_rows(&cfg);
            rows.push(row("tested", result.bob.indices.len()));
            verdict_rows(&mut rows, &result.bob.verdict);
            emit(out, args.format.format, &rows)?;
            Ok(verdict_exit(result.bob.verdict.reason))
        }
        RunMode::Serve { addr, session: args } => {
            let rc = run_config(args)?;
            let cfg = session_config(&rc)?;
            let listener = TcpListener::bind(addr).with_context(|| format!("binding {addr}"))?;
            eprintln!("listening on {}", listener.local_addr()?);
            let (mut stream, peer) = listener.accept()?;
            stream.set_nodelay(true)?;
            eprintln!("session with {peer}");
            let result = run_alice(&mut stream, &cfg, rc.alice_inputs()?)?;
            save_transcript(args.transcript.as_ref(), &result.transcript)?;
            let mut rows = session_rows(&cfg);
            let reason = match (&result.outcome.abort, &result.outcome.bob_verdict) {
                (_, Some(v)) => {
                    verdict_rows(&mut rows, v);
                    v.reason
                }
                (Some(r), None) => {
                    rows.push(row("accepted", false));
                    rows.push(row("reason", r));
                    *r
                }
                (None, None) => Reason::ConnectionLost,
            };
            emit(out, args.format.format, &rows)?;
            Ok(verdict_exit(reason))
        }
        RunMode::Connect { addr, session: args } => {
            let rc = run_config(args)?;
            let cfg = session_config(&rc)?;
            let mut stream = TcpStream::connect(addr).with_context(|| format!("connecting to {addr}"))?;
            stream.set_nodelay(true)?;
            let result = run_bob(&mut stream, &cfg, rc.seed_bob)?;
            save_transcript(args.transcript.as_ref(), &result.transcript)?;
            let mut rows = session_rows(&cfg);
            rows.push(row("tested", result.outcome.indices.len()));
            verdict_rows(&mut rows, &result.outcome.verdict);
            emit(out, args.format.format, &rows)?;
            Ok(verdict_exit(result.outcome.verdict.reason))
        }
    }
}

fn storage(model: Model, qubits: f64, r: f64) -> StorageAssumption {
    match model {
        Model::Bounded => StorageAssumption::Bounded { qubits },
        Model::Depolarizing => StorageAssumption::Depolarizing { qubits, r },
    }
}

fn region(args: &RegionArgs, out: &mut dyn Write) -> Result<u8> {
    let p = &args.point;
    let fixed = RegionParams {
        n: p.n,
        epsilon: p.epsilon,
        eps_code: p.eps_code,
        p_sent_1: p.p_sent_1,
        p_noclick_h: p.p_noclick_h,
        p_noclick_d: p.p_noclick_d,
        p_err: p.p_err,
        storage: storage(p.model, p.storage, p.r),
        rate: p.rate,
        ..Default::default()
    };
    let grid = security_region(args.axis1, args.axis2, &fixed).map_err(usage)?;
    let csv = grid.to_csv();
    match &args.out {
        None => out.write_all(csv.as_bytes())?,
        Some(path) => {
            fs::write(path, csv).with_context(|| format!("writing {}", path.display()))?;
            let secure = grid.cells.iter().filter(|c| c.verdict.secure).count();
            let rows = vec![row("cells", grid.cells.len()), row("secure", secure), row("path", path.display())];
            emit(out, Format::Kv, &rows)?;
        }
    }
    Ok(0)
}

fn maxstorage(args: &MaxStorageArgs, out: &mut dyn Write) -> Result<u8> {
    let model = StorageModel {
        n: args.n,
        epsilon: args.epsilon,
        erasures: Erasures {
            p_sent_1: args.p_sent_1,
            p_noclick_h: args.p_noclick_h,
            p_noclick_d: args.p_noclick_d,
        },
    };
    let lambda_hat = lambda_threshold(args.rate, args.n, args.epsilon);
    let s_max = model.max_storage(&storage(args.model, 0.0, args.r), lambda_hat).map_err(usage)?;
    let rows = vec![
        row("lambda_hat", lambda_hat),
        row("s_max", s_max.map_or("none".to_string(), |s| s.to_string())),
    ];
    emit(out, args.format.format, &rows)?;
    Ok(if s_max.is_some() { 0 } else { EXIT_REJECT })
}

fn verify_transcript(args: &VerifyArgs, out: &mut dyn Write) -> Result<u8> {
    let rc = run_config(&args.session)?;
    let cfg = session_config(&rc)?;
    let bytes = fs::read(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let mut rows = vec![row("records", 0)];
    let outcome = Transcript::from_bytes(&bytes).and_then(|t| {
        rows[0] = row("records", t.records.len());
        bcns::transcript::replay_bob(&cfg, rc.seed_bob, &t)
    });
    let code = match outcome {
        Ok(o) => {
            verdict_rows(&mut rows, &o.verdict);
            verdict_exit(o.verdict.reason)
        }
        Err(e) => {
            rows.push(row("valid", false));
            rows.push(row("error", e));
            EXIT_REJECT
        }
    };
    emit(out, args.session.format.format, &rows)?;
    Ok(code)
}

fn reproduce_cmd(args: &FormatArg, out: &mut dyn Write) -> Result<u8> {
    let r = reproduce(&ExperimentInputs::published())?;
    let mut rows: Rows = r.lines().into_iter().map(|(k, v)| (k.to_string(), v)).collect();
    let near = |s: Option<u64>, t: u64| s.is_some_and(|v| v.abs_diff(t) <= 2);
    let checks = [
        ("lambda_hat", "0.469133", (r.lambda_hat - 0.469133).abs() <= 1e-6),
        ("r_max", ">= 0.531", r.r_max >= 0.531),
        ("delta_min", "0.0998", (r.delta_min - 0.0998).abs() <= 5e-4),
        ("s_bounded", "928", near(r.s_bounded, 928)),
        ("s_noisy", "972", near(r.s_noisy, 972)),
        ("total_error", "2e-5", (r.total_error - 2e-5).abs() <= 4.0 * f64::EPSILON * 2e-5),
    ];
    for (key, reference, ok) in checks {
        rows.push(row(&format!("{key}_reference"), reference));
        rows.push(row(&format!("{key}_check"), if ok { "pass" } else { "fail" }));
    }
    rows.push(row(
        "delta_min_note",
        "a printed value of 0.998201 contradicts R = 0.531 and lambda_hat = 0.469133; the derived 0.0998 is used",
    ));
    emit(out, args.format, &rows)?;
    Ok(0)
}

fn execute(cli: &Cli, out: &mut dyn Write) -> Result<u8> {
    match &cli.command {
        Command::Estimate(a) => estimate(a, out),
        Command::Symmetrize(a) => symmetrize(a, out),
        Command::Codegen(a) => codegen(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::Run { mode } => run(mode, out),
        Command::Region(a) => region(a, out),
        Command::Maxstorage(a) => maxstorage(a, out),
        Command::VerifyTranscript(a) => verify_transcript(a, out),
        Command::Reproduce(a) => reproduce_cmd(a, out),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    let stdout = io::stdout();
    match execute(&cli, &mut stdout.lock()) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
