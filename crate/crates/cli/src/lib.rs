// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end for `shortseg`.

#![forbid(unsafe_code)]

pub mod error;
pub mod io;

use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use shortseg::bounds::{
    flank_separation_bound, identification_bound, null_segment_count_bound, unbroken_segment_bound,
    Bound, SignalGeometry,
};
use shortseg::evaluate::{classify, Label};
use shortseg::inference::BallConfiguration;
use shortseg::oracle::{exact_pattern_probability, monte_carlo_pattern_probability};
use shortseg::simulate::{
    five_segment_model, generate_with, null_model, replicate_rng, NoiseFamily, NoiseSpec,
    SignalLevel,
};
use shortseg::tune::{tuning_table, write_tuning_csv};
use shortseg::{
    detect_with_p_values, filter_by_p, p_value_upper_bound, DetectionParams, ThresholdMode,
};

pub use error::{CliError, CliResult};
use io::{
    format_segments, read_intervals, read_sequences, segment_header, write_file, SequenceFormat,
};

#[derive(Debug, Parser)]
#[command(
    name = "shortseg",
    version,
    about = "Short segment detection in long noisy sequences"
)]
pub struct Cli {
    /// Worker threads for batch work (defaults to all cores).
    #[arg(long, global = true, env = "SHORTSEG_THREADS")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Detect segments in every sequence of an input file.
    Detect(DetectArgs),
    /// Write simulated sequences and their ground truth.
    Simulate(SimulateArgs),
    /// Tabulate the threshold percentile selected for target patterns.
    Tune(TuneArgs),
    /// Evaluate the finite-sample bounds.
    Bounds(BoundsArgs),
    /// Score detections against ground truth.
    Eval(EvalArgs),
    /// Time detection on synthetic noise of several lengths.
    Bench(BenchArgs),
    /// Exact and Monte Carlo pattern probabilities.
    #[command(hide = true)]
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ThresholdArgs {
    /// Absolute threshold c.
    #[arg(long, conflicts_with = "percentile", allow_negative_numbers = true)]
    pub threshold: Option<f64>,
    /// Threshold at this sample percentile of |x|, in (0, 1).
    #[arg(long)]
    pub percentile: Option<f64>,
    /// Longest run of non-exceedances filled in between exceedances.
    #[arg(long, default_value_t = 9)]
    pub gap: usize,
    /// Drop segments whose length is at most this value.
    #[arg(long = "min-len", default_value_t = 3)]
    pub min_len: usize,
}

impl ThresholdArgs {
    fn params(&self) -> CliResult<DetectionParams> {
        let mode = match (self.threshold, self.percentile) {
            (Some(c), None) => ThresholdMode::Absolute(c),
            (None, Some(a)) => ThresholdMode::Percentile(a),
            (None, None) => ThresholdMode::Percentile(0.95),
            (Some(_), Some(_)) => {
                return Err(CliError::Usage(
                    "--threshold and --percentile are mutually exclusive".into(),
                ))
            }
        };
        DetectionParams::new(mode, self.gap, self.min_len)
            .map_err(|e| CliError::Usage(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Centering {
    None,
    Median,
}

#[derive(Debug, Args)]
pub struct DetectArgs {
    /// Input sequence file.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = SequenceFormat::Auto)]
    pub format: SequenceFormat,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Keep only segments with p-value at most this level.
    #[arg(long = "p-max")]
    pub p_max: Option<f64>,
    /// Subtract each sequence's median before detection.
    #[arg(long, value_enum, default_value_t = Centering::None)]
    pub center: Centering,
    /// Write 0-based half-open starts (BED convention).
    #[arg(long)]
    pub bed: bool,
    /// Output file (standard output if omitted).
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Scenario {
    /// No signal.
    Null,
    /// Five segments of lengths 8 to 40.
    Signal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum NoiseKind {
    Gaussian,
    T3,
    Ar1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Level {
    S1,
    S2,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long, value_enum, default_value_t = Scenario::Signal)]
    pub scenario: Scenario,
    #[arg(long, value_enum, default_value_t = NoiseKind::Gaussian)]
    pub noise: NoiseKind,
    /// AR(1) coefficient.
    #[arg(long, default_value_t = 0.2, allow_negative_numbers = true)]
    pub rho: f64,
    #[arg(long, value_enum, default_value_t = Level::S1)]
    pub level: Level,
    #[arg(long, default_value_t = 10_000)]
    pub length: usize,
    /// Number of sequences.
    #[arg(long, default_value_t = 1)]
    pub count: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sequence output (`sequence_id<TAB>value` rows).
    #[arg(long)]
    pub output: PathBuf,
    /// Ground-truth output (`sequence_id, start, end, height`).
    #[arg(long)]
    pub truth: PathBuf,
}

#[derive(Debug, Args)]
pub struct TuneArgs {
    /// Sequence lengths; defaults to 13 log-spaced values from 1e3 to 1e6.
    #[arg(long = "n", value_delimiter = ',')]
    pub n_grid: Vec<usize>,
    /// Patterns as `s:t`.
    #[arg(long, value_delimiter = ',', default_values_t = vec!["5:5".to_string(), "10:6".to_string()])]
    pub patterns: Vec<String>,
    /// Significance levels.
    #[arg(long = "p", value_delimiter = ',', default_values_t = vec![0.05, 0.1])]
    pub p_levels: Vec<f64>,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BoundsArgs {
    /// Splitting length: exceedances more than this far apart are never
    /// joined. A detector run with `--gap g` has splitting length g + 1.
    #[arg(long)]
    pub d: usize,
    /// Signal segment length for the within-segment bound.
    #[arg(long = "len", default_value_t = 8)]
    pub len: usize,
    /// Flank width for the separation bound.
    #[arg(long, default_value_t = 100)]
    pub flank: usize,
    /// Noise CDF at the threshold, in (0.5, 1).
    #[arg(long, default_value_t = 0.99)]
    pub beta: f64,
    #[arg(long, default_value_t = 5)]
    pub segments: usize,
    #[arg(long = "min-len", default_value_t = 8)]
    pub min_len: usize,
    #[arg(long = "max-len", default_value_t = 40)]
    pub max_len: usize,
    #[arg(long = "min-gap", default_value_t = 1000)]
    pub min_gap: usize,
    /// Sequence length for the false-positive bound.
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    /// Exceedance count for the false-positive bound.
    #[arg(long, default_value_t = 500)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Ground-truth intervals (needs `sequence_id`, `start`, `end` columns).
    #[arg(long)]
    pub truth: PathBuf,
    /// Detected intervals, e.g. the output of `detect`.
    #[arg(long)]
    pub detected: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_values_t = vec![1_000_000usize, 10_000_000])]
    pub sizes: Vec<usize>,
    #[command(flatten)]
    pub threshold: ThresholdArgs,
    /// Timed runs per size; the fastest is reported.
    #[arg(long, default_value_t = 3)]
    pub repeats: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct OracleArgs {
    #[arg(long)]
    pub n: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long)]
    pub s: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
}

/// Parses `args`, runs the command and returns the process exit code.
/// Results go to `out`, diagnostics to `diag`.
pub fn run<I, T>(args: I, out: &mut dyn Write, diag: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(diag, "{}", e.render());
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(&cli, out, diag) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(diag, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(cli: &Cli, out: &mut dyn Write, diag: &mut dyn Write) -> CliResult<()> {
    match &cli.command {
        Command::Detect(a) => cmd_detect(a, cli.threads, out, diag),
        Command::Simulate(a) => cmd_simulate(a, diag),
        Command::Tune(a) => cmd_tune(a, out),
        Command::Bounds(a) => cmd_bounds(a, out),
        Command::Eval(a) => cmd_eval(a, out),
        Command::Bench(a) => cmd_bench(a, out),
        Command::Oracle(a) => cmd_oracle(a, out),
    }
}

fn worker_pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(t) = threads {
        b = b.num_threads(t);
    }
    b.build()
        .map_err(|e| CliError::Usage(format!("cannot start worker threads: {e}")))
}

fn emit(path: Option<&PathBuf>, text: &str, out: &mut dyn Write) -> CliResult<()> {
    match path {
        Some(p) => write_file(p, text),
        None => out
            .write_all(text.as_bytes())
            .map_err(|e| CliError::io("writing output", e)),
    }
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    let mid = v.len() / 2;
    let (lower, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let upper = *upper;
    if values.len() % 2 == 1 {
        upper
    } else {
        let lower_max = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lower_max + upper)
    }
}

pub fn cmd_detect(
    args: &DetectArgs,
    threads: Option<usize>,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> CliResult<()> {
    let params = args.threshold.params()?;
    if let Some(p) = args.p_max {
        if !(p > 0.0 && p <= 1.0) {
            return Err(CliError::Usage(format!(
                "--p-max must lie in (0, 1]; got {p}"
            )));
        }
    }
    if matches!(params.threshold, ThresholdMode::Absolute(c) if c < 0.0) {
        let _ = writeln!(
            diag,
            "warning: negative threshold; every position is an exceedance"
        );
    }
    let started = Instant::now();
    let mut sequences = read_sequences(&args.input, args.format)?;
    let blocks: Vec<String> = worker_pool(threads)?.install(|| {
        sequences
            .par_iter_mut()
            .map(|s| -> CliResult<String> {
                if args.center == Centering::Median {
                    let m = median(&s.values);
                    s.values.iter_mut().for_each(|v| *v -= m);
                }
                let mut result = detect_with_p_values(&s.values, &params)?;
                if let Some(p) = args.p_max {
                    result = filter_by_p(result, p)?;
                }
                let mut block = String::new();
                format_segments(&mut block, &s.id, &result, args.bed);
                Ok(block)
            })
            .collect::<CliResult<_>>()
    })?;

    let mut text = segment_header(args.bed);
    let mut found = 0;
    for b in &blocks {
        found += b.lines().count();
        text.push_str(b);
    }
    emit(args.output.as_ref(), &text, out)?;
    let _ = writeln!(
        diag,
        "processed {} sequences, {found} segments, {:.3}s",
        sequences.len(),
        started.elapsed().as_secs_f64()
    );
    Ok(())
}

fn noise_family(kind: NoiseKind, rho: f64) -> NoiseFamily {
    match kind {
        NoiseKind::Gaussian => NoiseFamily::Gaussian,
        NoiseKind::T3 => NoiseFamily::StudentT { df: 3.0 },
        NoiseKind::Ar1 => NoiseFamily::Ar1 { rho },
    }
}

pub fn cmd_simulate(args: &SimulateArgs, diag: &mut dyn Write) -> CliResult<()> {
    if args.count == 0 {
        return Err(CliError::Usage("--count must be at least 1".into()));
    }
    let family = noise_family(args.noise, args.rho);
    let noise = NoiseSpec::new(family, args.seed);
    let model = match args.scenario {
        Scenario::Null => null_model(args.length)?,
        Scenario::Signal => {
            let level = match args.level {
                Level::S1 => SignalLevel::S1,
                Level::S2 => SignalLevel::S2,
            };
            five_segment_model(args.length, &family, level)?
        }
    };

    let mut seq_text = String::from("sequence_id\tvalue\n");
    let mut truth_text = String::from("sequence_id\tstart\tend\theight\n");
    for i in 0..args.count {
        let id = format!("sim{}", i + 1);
        let x = generate_with(&model, &noise, &mut replicate_rng(args.seed, i as u64))?;
        for v in &x {
            let _ = writeln!(seq_text, "{id}\t{v}");
        }
        for (seg, h) in &model.segments {
            let _ = writeln!(truth_text, "{id}\t{}\t{}\t{h}", seg.start, seg.end);
        }
    }
    write_file(&args.output, &seq_text)?;
    write_file(&args.truth, &truth_text)?;
    let _ = writeln!(
        diag,
        "wrote {} sequences of length {} with {} signal segments each",
        args.count,
        args.length,
        model.segments.len()
    );
    Ok(())
}

/// 13 log-spaced lengths from 10^3 to 10^6.
pub fn default_tuning_grid() -> Vec<usize> {
    (0..=12)
        .map(|i| (1e3 * 10f64.powf(i as f64 * 0.25)).round() as usize)
        .collect()
}

fn parse_pattern(s: &str) -> CliResult<(usize, usize)> {
    let bad = || CliError::Usage(format!("pattern must look like s:t; got '{s}'"));
    let (a, b) = s.split_once(':').ok_or_else(bad)?;
    Ok((
        a.trim().parse().map_err(|_| bad())?,
        b.trim().parse().map_err(|_| bad())?,
    ))
}

pub fn cmd_tune(args: &TuneArgs, out: &mut dyn Write) -> CliResult<()> {
    let grid = if args.n_grid.is_empty() {
        default_tuning_grid()
    } else {
        args.n_grid.clone()
    };
    let patterns = args
        .patterns
        .iter()
        .map(|p| parse_pattern(p))
        .collect::<CliResult<Vec<_>>>()?;
    let rows = tuning_table(&grid, &patterns, &args.p_levels)?;
    let mut buf = Vec::new();
    write_tuning_csv(&rows, &mut buf).map_err(|e| CliError::Usage(e.to_string()))?;
    emit(args.output.as_ref(), &String::from_utf8_lossy(&buf), out)
}

pub fn cmd_bounds(args: &BoundsArgs, out: &mut dyn Write) -> CliResult<()> {
    let row = |name: &str, b: Bound| format!("{name}\t{}\t{}\n", b.value, b.vacuous);
    let geometry = SignalGeometry::new(
        args.segments,
        args.min_len,
        args.max_len,
        args.min_gap,
        args.beta,
    )?;
    let mut text = String::from("bound\tvalue\tvacuous\n");
    text += &row(
        "segment_unbroken",
        unbroken_segment_bound(args.len, args.d)?,
    );
    text += &row(
        "flanks_separated",
        flank_separation_bound(args.flank, args.d, args.beta)?,
    );
    text += &row("all_identified", identification_bound(&geometry, args.d)?);
    let fp = null_segment_count_bound(args.n, args.m, args.d)?;
    let _ = writeln!(text, "expected_false_positives\t{fp}\tfalse");
    emit(None, &text, out)
}

pub fn cmd_eval(args: &EvalArgs, out: &mut dyn Write) -> CliResult<()> {
    let truth = read_intervals(&args.truth)?;
    let detected = read_intervals(&args.detected)?;
    let mut ids: Vec<&String> = truth.iter().map(|(k, _)| k).collect();
    for (k, _) in &detected {
        if !ids.contains(&k) {
            ids.push(k);
        }
    }
    let empty = Vec::new();
    let lookup = |sets: &'_ io::IntervalSets, id: &str| -> Vec<shortseg::Segment> {
        sets.iter()
            .find(|(k, _)| k == id)
            .map(|(_, v)| v.clone())
            .unwrap_or_else(|| empty.clone())
    };

    let mut text = String::from("sequence_id\tstart\tend\tlabel\ttruth_start\ttruth_end\n");
    let (mut tp, mut fp, mut identified, mut n_truth, mut n_det) = (0, 0, 0, 0, 0);
    for id in &ids {
        let t = lookup(&truth, id);
        let d = lookup(&detected, id);
        let c = classify(&t, &d)?;
        for (seg, label) in d.iter().zip(&c.labels) {
            match label {
                Label::TruePositive { truth: k } => {
                    let _ = writeln!(
                        text,
                        "{id}\t{}\t{}\tTP\t{}\t{}",
                        seg.start, seg.end, t[*k].start, t[*k].end
                    );
                }
                Label::FalsePositive => {
                    let _ = writeln!(text, "{id}\t{}\t{}\tFP\tNA\tNA", seg.start, seg.end);
                }
            }
        }
        tp += c.tp;
        fp += c.fp;
        identified += c.identified;
        n_truth += t.len();
        n_det += d.len();
    }
    let _ = writeln!(
        text,
        "# sequences={} truth={n_truth} detected={n_det} TP={tp} FP={fp} identified={identified}",
        ids.len()
    );
    emit(args.output.as_ref(), &text, out)
}

pub fn cmd_bench(args: &BenchArgs, out: &mut dyn Write) -> CliResult<()> {
    let params = args.threshold.params()?;
    let repeats = args.repeats.max(1);
    let mut text = String::from("n\tm\tsegments\tseconds\tpoints_per_sec\n");
    for &n in &args.sizes {
        let model = null_model(n)?;
        let x = generate_with(
            &model,
            &NoiseSpec::gaussian(args.seed),
            &mut replicate_rng(args.seed, n as u64),
        )?;
        let mut best = f64::INFINITY;
        let mut last = None;
        for _ in 0..repeats {
            let t0 = Instant::now();
            let r = detect_with_p_values(&x, &params)?;
            best = best.min(t0.elapsed().as_secs_f64());
            last = Some(r);
        }
        let r = last.expect("at least one run");
        let _ = writeln!(
            text,
            "{n}\t{}\t{}\t{best:.6}\t{:.0}",
            r.exceedances,
            r.segments.len(),
            n as f64 / best
        );
    }
    emit(None, &text, out)
}

pub fn cmd_oracle(args: &OracleArgs, out: &mut dyn Write) -> CliResult<()> {
    let cfg = BallConfiguration {
        seq_len: args.n,
        exceedances: args.m,
        window: args.s,
        hits: args.t,
    };
    let mut text = String::new();
    match exact_pattern_probability(&cfg) {
        Ok(p) => {
            let _ = writeln!(text, "exact\t{p}");
        }
        Err(e) => {
            let _ = writeln!(text, "exact\tNA\t# {e}");
        }
    }
    let (est, se) = monte_carlo_pattern_probability(&cfg, args.reps, args.seed)?;
    let _ = writeln!(text, "monte_carlo\t{est}\t{se}");
    match p_value_upper_bound(&cfg) {
        Ok(b) => {
            let _ = writeln!(text, "bound\t{b}");
        }
        Err(e) => {
            let _ = writeln!(text, "bound\tNA\t# {e}");
        }
    }
    emit(None, &text, out)
}
