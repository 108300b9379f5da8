//! `rfabel`: evaluate Ramanujan sums, damped Ramanujan-Fourier series,
//! Abel-summed correlation predictions and the prime-pair experiments from
//! the command line.
//!
//! Exit codes: 0 success, 1 internal/check failures, 2 parameter errors,
//! 3 numeric-integrity errors, 4 checkpoint mismatches.

mod checkpoint;
mod config;
mod families;
mod output;
mod verify;

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};

use config::ExperimentConfig;
use families::FamilySpec;
use output::{fmt_f64, Sink};
use rfabel_core::correlation::{
    correlate_resumable, CorrelateOptions, CorrelateOutcome, CorrelationEstimate,
    DEFAULT_CHUNK_SIZE,
};
use rfabel_core::primeapps::{
    experiment_prime_pair, singular_series_c, sophie_germain_s, EulerProductValue,
    PrimePairReport,
};
use rfabel_core::ramanujan::{csum_direct, csum_fast};
use rfabel_core::rfseries::{choose_q_epsilon, damped_eval, CoefficientFamily};
use rfabel_core::sieves::SegmentedSieve;
use rfabel_core::{Error as CoreError, SieveTable};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(
    name = "rfabel",
    version,
    about = "Ramanujan-Fourier series, Abel summation and prime-pair correlation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dump n, phi(n), mu(n), Lambda(n) rows for spot-checking
    Sieve {
        #[arg(long = "n-max")]
        n_max: u64,
        /// Output format (csv)
        #[arg(long, default_value = "csv")]
        emit: String,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Evaluate one Ramanujan sum c_q(n) by both methods
    Csum {
        #[arg(long)]
        q: u64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        /// Use only the direct exponential-sum evaluation
        #[arg(long)]
        direct: bool,
    },
    /// Print a coefficient a_q of a named family
    Coeff {
        #[arg(long, default_value = "mu-over-phi")]
        family: String,
        #[arg(long)]
        q: u64,
    },
    /// Evaluate the damped series at n, truncated for a target epsilon
    AbelEval {
        #[arg(long)]
        z: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, allow_negative_numbers = true)]
        n: i64,
        #[arg(long, default_value = "mu-over-phi")]
        family: String,
    },
    /// Correlation mean (1/N) sum of f(n) g(n +/- m), checkpointable
    Correlate {
        #[arg(long)]
        f: Option<String>,
        #[arg(long)]
        g: Option<String>,
        #[arg(long)]
        m: Option<u64>,
        #[arg(long = "N")]
        n_terms: Option<u64>,
        #[arg(long, default_value = "+")]
        sign: String,
        #[arg(long)]
        z: Option<f64>,
        #[arg(long)]
        eps: Option<f64>,
        #[arg(long, default_value = "csv")]
        out: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long = "chunk-size", default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: usize,
        #[arg(long)]
        checkpoint: Option<PathBuf>,
        /// Chunks between checkpoint writes
        #[arg(long = "checkpoint-interval", default_value_t = 64)]
        checkpoint_interval: u64,
        /// Stop (resumably) after this many chunks; mainly for testing resume
        #[arg(long = "stop-after-chunks")]
        stop_after_chunks: Option<u64>,
        /// Load all parameters from a JSON config file instead of flags
        #[arg(long)]
        config: Option<PathBuf>,
        /// Force the segmented streaming sieve for weighted-lambda
        #[arg(long)]
        streaming: bool,
    },
    /// Hardy-Littlewood singular series C(h)
    Singular {
        #[arg(long = "h")]
        h: u64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
    },
    /// Sophie Germain singular constant S(a, b, l)
    Sophie {
        #[arg(long)]
        a: u64,
        #[arg(long)]
        b: u64,
        #[arg(long)]
        l: u64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
    },
    /// End-to-end experiments
    Experiment {
        #[command(subcommand)]
        what: ExperimentCmd,
    },
    /// Run the built-in invariant suite
    Verify,
}

#[derive(Subcommand)]
enum ExperimentCmd {
    /// Weighted von Mangoldt autocorrelation at shift h against C(h)
    PrimePair {
        #[arg(long = "h")]
        h: Option<u64>,
        #[arg(long = "N")]
        n_terms: Option<u64>,
        /// Damping schedule, e.g. --z 0.9,0.99
        #[arg(long, value_delimiter = ',')]
        z: Vec<f64>,
        #[arg(long, default_value_t = 0.01)]
        eps: f64,
        #[arg(long, default_value_t = 1_000_000)]
        cutoff: u64,
        #[arg(long, default_value = "csv")]
        out: String,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long = "chunk-size", default_value_t = DEFAULT_CHUNK_SIZE)]
        chunk_size: usize,
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

/// An error carrying its process exit code.
struct Failure {
    code: i32,
    message: String,
}

type CliResult<T> = Result<T, Failure>;

impl From<CoreError> for Failure {
    fn from(e: CoreError) -> Self {
        let code = match e {
            CoreError::Parameter(_)
            | CoreError::Range(_)
            | CoreError::Capacity(_)
            | CoreError::Domain(_) => 2,
            CoreError::NumericIntegrity(_) | CoreError::DivergenceSuspected(_) => 3,
            CoreError::CheckpointMismatch(_) => 4,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure {
            code: 1,
            message: format!("{e:#}"),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure {
            code: 1,
            message: e.to_string(),
        }
    }
}

fn param_error(msg: impl Into<String>) -> Failure {
    Failure {
        code: 2,
        message: msg.into(),
    }
}

fn main() {
    if let Ok(workers) = std::env::var("RFABEL_WORKERS") {
        if let Ok(n) = workers.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new()
                .num_threads(n.max(1))
                .build_global();
        }
    }
    let cli = Cli::parse();
    if let Err(f) = run(cli) {
        eprintln!("rfabel: {}", f.message);
        std::process::exit(f.code);
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Sieve {
            n_max,
            emit,
            output,
        } => cmd_sieve(n_max, &emit, output.as_deref()),
        Command::Csum { q, n, direct } => cmd_csum(q, n, direct),
        Command::Coeff { family, q } => cmd_coeff(&family, q),
        Command::AbelEval { z, eps, n, family } => cmd_abel_eval(z, eps, n, &family),
        Command::Correlate {
            f,
            g,
            m,
            n_terms,
            sign,
            z,
            eps,
            out,
            output,
            chunk_size,
            checkpoint,
            checkpoint_interval,
            stop_after_chunks,
            config,
            streaming,
        } => {
            let cfg = resolve_correlate_config(
                f,
                g,
                m,
                n_terms,
                sign,
                z,
                eps,
                chunk_size,
                checkpoint_interval,
                config.as_deref(),
            )?;
            cmd_correlate(
                cfg,
                &out,
                output.as_deref(),
                checkpoint.as_deref(),
                stop_after_chunks,
                streaming,
            )
        }
        Command::Singular { h, cutoff } => {
            let v = singular_series_c(h, cutoff)?;
            print_euler_product(&v);
            Ok(())
        }
        Command::Sophie { a, b, l, cutoff } => {
            let v = sophie_germain_s(a, b, l, cutoff)?;
            print_euler_product(&v);
            Ok(())
        }
        Command::Experiment { what } => match what {
            ExperimentCmd::PrimePair {
                h,
                n_terms,
                z,
                eps,
                cutoff,
                out,
                output,
                chunk_size,
                config,
            } => {
                let cfg = resolve_experiment_config(
                    h,
                    n_terms,
                    z,
                    eps,
                    cutoff,
                    chunk_size,
                    config.as_deref(),
                )?;
                cmd_experiment_prime_pair(cfg, &out, output.as_deref())
            }
        },
        Command::Verify => cmd_verify(),
    }
}

fn cmd_sieve(n_max: u64, emit: &str, output: Option<&Path>) -> CliResult<()> {
    if emit != "csv" {
        return Err(param_error(format!("unsupported --emit format '{emit}'")));
    }
    if n_max == 0 {
        return Err(Failure::from(CoreError::Capacity(
            "n_max must be >= 1".into(),
        )));
    }
    let start = Instant::now();
    let mut sink = Sink::open(output)?;
    sink.meta("tool", format_args!("rfabel {VERSION}"))?;
    sink.meta("command", format_args!("sieve --n-max {n_max}"))?;
    sink.meta("wall_time_s", start.elapsed().as_secs_f64())?;
    sink.row("n,phi,mu,lambda")?;
    if n_max > families::STREAM_THRESHOLD {
        for seg in SegmentedSieve::new(1, n_max + 1, 1 << 20)? {
            for i in 0..seg.len() {
                let n = seg.lo + i as u64;
                sink.row(&format!(
                    "{n},{},{},{}",
                    seg.phi[i],
                    seg.mu[i],
                    fmt_f64(seg.lambda[i])
                ))?;
            }
        }
    } else {
        let table = SieveTable::build(n_max)?;
        for n in 1..=n_max {
            sink.row(&format!(
                "{n},{},{},{}",
                table.phi(n),
                table.mu(n),
                fmt_f64(table.lambda(n))
            ))?;
        }
    }
    sink.finish()?;
    Ok(())
}

fn cmd_csum(q: u64, n: i64, direct_only: bool) -> CliResult<()> {
    if direct_only {
        let direct = csum_direct(q, n)?;
        println!("c_{q}({n}) = {direct}");
        println!("method direct: {direct}");
        return Ok(());
    }
    let table = SieveTable::build(q.max(3))?;
    let fast = csum_fast(&table, q, n)?;
    let direct = csum_direct(q, n)?;
    println!("c_{q}({n}) = {fast}");
    println!("method fast:   {fast}");
    println!("method direct: {direct}");
    println!("agree: {}", fast == direct);
    if fast != direct {
        return Err(Failure::from(CoreError::NumericIntegrity(format!(
            "method disagreement for c_{q}({n}): fast {fast}, direct {direct}"
        ))));
    }
    Ok(())
}

fn named_family(name: &str) -> CliResult<CoefficientFamily> {
    match name {
        "mu-over-phi" => Ok(CoefficientFamily::mu_over_phi()),
        other => Err(param_error(format!(
            "unknown coefficient family '{other}' (expected mu-over-phi)"
        ))),
    }
}

fn cmd_coeff(family: &str, q: u64) -> CliResult<()> {
    let fam = named_family(family)?;
    let table = SieveTable::build(q.max(3))?;
    let value = fam.value(&table, q)?;
    println!("a_{q} = {} ({family})", fmt_f64(value));
    Ok(())
}

fn cmd_abel_eval(z: f64, eps: f64, n: i64, family: &str) -> CliResult<()> {
    let fam = named_family(family)?;
    let q = choose_q_epsilon(&fam, z, eps)?;
    let table = SieveTable::build(q.max(3))?;
    let ev = damped_eval(&table, &fam, z, eps, n)?;
    println!("f(z={z}, n={n}) = {}", fmt_f64(ev.value));
    println!("q_epsilon: {}", ev.q_epsilon);
    println!("tail_bound: {}", fmt_f64(ev.tail_bound));
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn resolve_correlate_config(
    f: Option<String>,
    g: Option<String>,
    m: Option<u64>,
    n_terms: Option<u64>,
    sign: String,
    z: Option<f64>,
    eps: Option<f64>,
    chunk_size: usize,
    checkpoint_interval: u64,
    config: Option<&Path>,
) -> CliResult<ExperimentConfig> {
    if let Some(path) = config {
        if f.is_some() || g.is_some() || m.is_some() || n_terms.is_some() {
            return Err(param_error(
                "--config replaces --f/--g/--m/--N; do not pass both",
            ));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| param_error(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| param_error(format!("bad config {}: {e}", path.display())))?;
        if cfg.subcommand != "correlate" {
            return Err(param_error(format!(
                "config is for subcommand '{}', expected 'correlate'",
                cfg.subcommand
            )));
        }
        return Ok(cfg);
    }
    let f = f.ok_or_else(|| param_error("--f is required (or use --config)"))?;
    let g = g.ok_or_else(|| param_error("--g is required (or use --config)"))?;
    let m = m.ok_or_else(|| param_error("--m is required (or use --config)"))?;
    let n_terms = n_terms.ok_or_else(|| param_error("--N is required (or use --config)"))?;
    Ok(ExperimentConfig {
        subcommand: "correlate".into(),
        f: Some(f),
        g: Some(g),
        m: Some(m),
        sign: Some(sign),
        h: None,
        n_terms,
        z: z.into_iter().collect(),
        epsilon: eps,
        cutoff: None,
        chunk_size,
        checkpoint_interval,
    })
}

fn cmd_correlate(
    cfg: ExperimentConfig,
    out: &str,
    output: Option<&Path>,
    checkpoint_path: Option<&Path>,
    stop_after_chunks: Option<u64>,
    streaming: bool,
) -> CliResult<()> {
    check_out_format(out)?;
    if stop_after_chunks.is_some() && checkpoint_path.is_none() {
        return Err(param_error("--stop-after-chunks requires --checkpoint"));
    }

    let f_spec: FamilySpec = cfg.f.as_deref().unwrap_or_default().parse()?;
    let g_spec: FamilySpec = cfg.g.as_deref().unwrap_or_default().parse()?;
    let m = cfg.m.unwrap_or(0);
    let sign: rfabel_core::Sign = cfg.sign.as_deref().unwrap_or("+").parse()?;
    let n_terms = cfg.n_terms;
    let z = cfg.z.first().copied();
    let eps = cfg.epsilon;

    let f_hi = n_terms;
    let g_hi = match sign {
        rfabel_core::Sign::Plus => n_terms + m,
        rfabel_core::Sign::Minus => n_terms,
    };
    let table_req = f_spec
        .table_requirement(f_hi, z, eps, streaming)?
        .max(g_spec.table_requirement(g_hi, z, eps, streaming)?);
    let table = if table_req > 0 {
        Some(SieveTable::build(table_req.max(3))?)
    } else {
        None
    };
    let f_seq = f_spec.build(table.as_ref(), f_hi, z, eps, streaming)?;
    let g_seq = g_spec.build(table.as_ref(), g_hi, z, eps, streaming)?;

    let params_hash = cfg.params_hash();
    let resume = match checkpoint_path {
        Some(path) => checkpoint::load(path)?,
        None => None,
    };

    let opts = CorrelateOptions {
        chunk_size: cfg.chunk_size,
        checkpoint_interval: if checkpoint_path.is_some() {
            cfg.checkpoint_interval.max(1)
        } else {
            0
        },
        stop_after_chunks,
    };

    let start = Instant::now();
    let outcome = correlate_resumable(
        f_seq.as_dyn(),
        g_seq.as_dyn(),
        m,
        sign,
        n_terms,
        &opts,
        params_hash,
        resume.as_ref(),
        &mut |state| {
            if let Some(path) = checkpoint_path {
                checkpoint::save_atomic(path, state)
                    .map_err(|e| CoreError::Parameter(format!("checkpoint write failed: {e}")))?;
            }
            Ok(())
        },
    )?;

    match outcome {
        CorrelateOutcome::Suspended(state) => {
            let path = checkpoint_path.expect("stop-after-chunks requires a checkpoint path");
            checkpoint::save_atomic(path, &state)?;
            println!(
                "suspended after {} of {} chunks; resume with the same parameters \
                 and --checkpoint {}",
                state.chunks_done,
                state.n_terms.div_ceil(state.chunk_size),
                path.display()
            );
            Ok(())
        }
        CorrelateOutcome::Complete(est) => {
            if let Some(path) = checkpoint_path {
                let _ = fs::remove_file(path);
            }
            write_correlation(&cfg, &est, out, output, start.elapsed().as_secs_f64())?;
            Ok(())
        }
    }
}

fn write_correlation(
    cfg: &ExperimentConfig,
    est: &CorrelationEstimate,
    out: &str,
    output: Option<&Path>,
    wall_time_s: f64,
) -> CliResult<()> {
    let mut sink = Sink::open(output)?;
    match out {
        "csv" => {
            sink.meta("tool", format_args!("rfabel {VERSION}"))?;
            sink.meta("command", "correlate")?;
            sink.meta("params", cfg.canonical_string())?;
            sink.meta("params_hash", format_args!("{:#018x}", cfg.params_hash()))?;
            sink.meta("wall_time_s", wall_time_s)?;
            sink.row("n_terms,retained,m,sign,value,sum,compensation")?;
            sink.row(&format!(
                "{},{},{},{},{},{},{}",
                est.n_terms,
                est.retained,
                est.shift,
                est.sign,
                fmt_f64(est.value),
                fmt_f64(est.sum),
                fmt_f64(est.compensation)
            ))?;
        }
        "json" => {
            let doc = serde_json::json!({
                "meta": {
                    "tool": format!("rfabel {VERSION}"),
                    "command": "correlate",
                    "params": cfg.canonical_string(),
                    "params_hash": format!("{:#018x}", cfg.params_hash()),
                    "wall_time_s": wall_time_s,
                },
                "result": est,
            });
            sink.row(&serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?)?;
        }
        _ => unreachable!("format checked earlier"),
    }
    sink.finish()?;
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn resolve_experiment_config(
    h: Option<u64>,
    n_terms: Option<u64>,
    z: Vec<f64>,
    eps: f64,
    cutoff: u64,
    chunk_size: usize,
    config: Option<&Path>,
) -> CliResult<ExperimentConfig> {
    if let Some(path) = config {
        if h.is_some() || n_terms.is_some() {
            return Err(param_error("--config replaces --h/--N; do not pass both"));
        }
        let text = fs::read_to_string(path)
            .map_err(|e| param_error(format!("cannot read config {}: {e}", path.display())))?;
        let cfg: ExperimentConfig = serde_json::from_str(&text)
            .map_err(|e| param_error(format!("bad config {}: {e}", path.display())))?;
        if cfg.subcommand != "experiment-prime-pair" {
            return Err(param_error(format!(
                "config is for subcommand '{}', expected 'experiment-prime-pair'",
                cfg.subcommand
            )));
        }
        return Ok(cfg);
    }
    let h = h.ok_or_else(|| param_error("--h is required (or use --config)"))?;
    let n_terms = n_terms.ok_or_else(|| param_error("--N is required (or use --config)"))?;
    Ok(ExperimentConfig {
        subcommand: "experiment-prime-pair".into(),
        f: None,
        g: None,
        m: None,
        sign: None,
        h: Some(h),
        n_terms,
        z,
        epsilon: Some(eps),
        cutoff: Some(cutoff),
        chunk_size,
        checkpoint_interval: 0,
    })
}

fn cmd_experiment_prime_pair(
    cfg: ExperimentConfig,
    out: &str,
    output: Option<&Path>,
) -> CliResult<()> {
    check_out_format(out)?;
    let h = cfg.h.unwrap_or(0);
    let n_terms = cfg.n_terms;
    let epsilon = cfg.epsilon.unwrap_or(0.01);
    let cutoff = cfg.cutoff.unwrap_or(1_000_000);
    let table = SieveTable::build((n_terms + h).max(3))?;
    let opts = CorrelateOptions {
        chunk_size: cfg.chunk_size,
        ..CorrelateOptions::default()
    };
    let start = Instant::now();
    let report = experiment_prime_pair(&table, h, n_terms, &cfg.z, epsilon, cutoff, &opts)?;
    let wall = start.elapsed().as_secs_f64();

    let mut sink = Sink::open(output)?;
    match out {
        "csv" => {
            sink.meta("tool", format_args!("rfabel {VERSION}"))?;
            sink.meta("command", "experiment prime-pair")?;
            sink.meta("params", cfg.canonical_string())?;
            sink.meta(
                "predicted",
                format_args!(
                    "C({h}) = {} (prime cutoff {}, log remainder {})",
                    fmt_f64(report.predicted.value),
                    report.predicted.prime_cutoff,
                    fmt_f64(report.predicted.remainder_estimate)
                ),
            )?;
            sink.meta("wall_time_s", wall)?;
            sink.row("kind,n_terms,z,q_epsilon,value,predicted,ratio")?;
            for row in &report.ladder {
                sink.row(&format!(
                    "ladder,{},,,{},{},{}",
                    row.n_terms,
                    fmt_f64(row.empirical),
                    fmt_f64(row.predicted),
                    fmt_f64(row.ratio)
                ))?;
            }
            for row in &report.damped {
                sink.row(&format!(
                    "damped,,{},{},{},{},{}",
                    fmt_f64(row.z),
                    row.q_epsilon,
                    fmt_f64(row.damped),
                    fmt_f64(row.predicted),
                    fmt_f64(row.ratio)
                ))?;
            }
        }
        "json" => {
            let doc = experiment_json(&cfg, &report, wall);
            sink.row(&serde_json::to_string_pretty(&doc).map_err(anyhow::Error::from)?)?;
        }
        _ => unreachable!("format checked earlier"),
    }
    sink.finish()?;
    Ok(())
}

fn experiment_json(
    cfg: &ExperimentConfig,
    report: &PrimePairReport,
    wall_time_s: f64,
) -> serde_json::Value {
    serde_json::json!({
        "meta": {
            "tool": format!("rfabel {VERSION}"),
            "command": "experiment prime-pair",
            "params": cfg.canonical_string(),
            "wall_time_s": wall_time_s,
        },
        "report": report,
    })
}

fn print_euler_product(v: &EulerProductValue) {
    println!("{} = {}", v.params, fmt_f64(v.value));
    println!("prime cutoff: {}", v.prime_cutoff);
    println!("log-space remainder estimate: {}", fmt_f64(v.remainder_estimate));
}

fn cmd_verify() -> CliResult<()> {
    let checks = verify::run_all();
    let mut failures = 0;
    for c in &checks {
        if c.pass {
            println!("PASS {} ({})", c.name, c.detail);
        } else {
            println!("FAIL {} ({})", c.name, c.detail);
            failures += 1;
        }
    }
    println!("{} of {} checks passed", checks.len() - failures, checks.len());
    if failures > 0 {
        return Err(Failure {
            code: 1,
            message: format!("{failures} verification checks failed"),
        });
    }
    Ok(())
}

fn check_out_format(out: &str) -> CliResult<()> {
    match out {
        "csv" | "json" => Ok(()),
        other => Err(param_error(format!(
            "unsupported --out format '{other}' (csv or json)"
        ))),
    }
}
