//! Command-line front end: sieving, gap records, the random model, the
//! conformal dimension, measure scans, and the series criteria. Every run
//! emits its artifacts (CSV/JSON) next to a reproducibility manifest.

use clap::{Args, Parser, Subcommand};
use primecantor::alphabet::TruncatedAlphabet;
use primecantor::artifacts::{
    self, out_path, parse_u64_flag, Cell, RunManifest, SCHEMA_ANNULUS, SCHEMA_CRAMER, SCHEMA_GAPS,
    SCHEMA_HOHEISEL, SCHEMA_RECORDS, SCHEMA_SCAN, SCHEMA_SERIES, SCHEMA_TAIL,
};
use primecantor::cramer;
use primecantor::diagnostics::{self, VerdictPolicy};
use primecantor::dimension;
use primecantor::error::{Error, Result};
use primecantor::gauss::Word;
use primecantor::measure::MeasureModel;
use primecantor::primes;
use primecantor::psi::{DimensionFunction, Family};
use primecantor::series;
use primecantor::util::{fmt17, median};
use std::collections::BTreeMap;
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "primecantor",
    version,
    about = "prime continued-fraction Cantor set laboratory"
)]
struct Cli {
    /// key=value config file; flags override file values
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// rayon worker threads (default: available cores)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// directory for CSV/JSON artifacts
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the pressure equation for the conformal dimension
    Delta(DeltaArgs),
    /// Emit consecutive prime gaps
    Gaps(GapsArgs),
    /// Running-maximum records of the windowed normalized gap statistic
    Rk(RkArgs),
    /// Normalized short-interval prime counts over sampled windows
    Hoheisel(HoheiselArgs),
    /// Random-model record statistics over several seeds
    Cramer(CramerArgs),
    /// Series criteria and convergence verdicts
    #[command(subcommand)]
    Series(SeriesCmd),
    /// Conformal-measure scans and the measure-formula sandwich
    #[command(subcommand)]
    Measure(MeasureCmd),
}

#[derive(Args)]
struct DeltaArgs {
    /// primes | all | set:a,b,c
    #[arg(long, default_value = "primes")]
    alphabet: String,
    /// truncation cutoff N
    #[arg(long, value_parser = parse_u64_flag)]
    trunc: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
    /// skip the standing-assumption checks in the report
    #[arg(long)]
    no_checks: bool,
    /// write the JSON report here (default: <out-dir>/delta.json)
    #[arg(long)]
    json: Option<PathBuf>,
}

#[derive(Args)]
struct GapsArgs {
    #[arg(long, value_parser = parse_u64_flag)]
    limit: u64,
    /// only emit gaps of at least this size
    #[arg(long, default_value_t = 0)]
    min_gap: u64,
    /// binary sieve cache: loaded when present, written after sieving
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct RkArgs {
    #[arg(long, value_parser = parse_u64_flag)]
    limit: u64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    /// first prime index eligible for a record
    #[arg(long, default_value_t = primes::DEFAULT_RECORD_START)]
    start_n: usize,
    /// binary sieve cache: loaded when present, written after sieving
    #[arg(long)]
    cache: Option<PathBuf>,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct HoheiselArgs {
    #[arg(long, value_parser = parse_u64_flag)]
    limit: u64,
    /// window exponent θ ∈ (0,1)
    #[arg(long, default_value_t = 21.0 / 40.0)]
    theta: f64,
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args)]
struct CramerArgs {
    #[arg(long, value_parser = parse_u64_flag)]
    limit: u64,
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    base_seed: u64,
    #[arg(long)]
    csv: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct GaugeArgs {
    /// log_power | loglog_power | slow_phi | power_offset
    #[arg(long)]
    family: String,
    /// family parameter (exponent s, or offset t for power_offset)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    s: f64,
    /// dimension δ; computed from --trunc when omitted
    #[arg(long)]
    delta: Option<f64>,
    #[arg(long, value_parser = parse_u64_flag)]
    trunc: Option<u64>,
    #[arg(long)]
    tol: Option<f64>,
}

#[derive(Subcommand)]
enum SeriesCmd {
    /// Resolution-scale series of the Hausdorff criterion
    Hd {
        #[command(flatten)]
        gauge: GaugeArgs,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, value_parser = parse_u64_flag, default_value = "100000")]
        terms: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Σ_n p_n^{−kC}
    Bc {
        #[arg(long, default_value_t = 1)]
        k: u32,
        #[arg(long)]
        c: f64,
        #[arg(long, value_parser = parse_u64_flag, default_value = "1000000")]
        terms: u64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Letter-indexed series with the density-law argument
    Sigma2 {
        #[command(flatten)]
        gauge: GaugeArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Letter-indexed packing series with the exact inner maximization
    Sigma1 {
        #[command(flatten)]
        gauge: GaugeArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Composed series: packing terms plus density-law terms
    SigmaH {
        #[command(flatten)]
        gauge: GaugeArgs,
        #[arg(long, default_value_t = 1.0)]
        alpha: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

#[derive(Subcommand)]
enum MeasureCmd {
    /// Small-scale mass near 0 against its asymptote
    Tail {
        #[arg(long, value_parser = parse_u64_flag)]
        trunc: Option<u64>,
        #[arg(long, default_value_t = 1e-4)]
        r_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        r_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Annulus-to-tail measure ratios over a radius grid
    Annulus {
        #[arg(long, value_parser = parse_u64_flag)]
        trunc: Option<u64>,
        #[arg(long, default_value_t = 2.0)]
        lambda: f64,
        #[arg(long, default_value_t = 1e-4)]
        r_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        r_max: f64,
        #[arg(long, default_value_t = 13)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// One measure-formula sandwich instance at x = π(periodic prefix)
    Gmf {
        #[arg(long, value_parser = parse_u64_flag)]
        trunc: Option<u64>,
        /// word prefix, e.g. "2,3"
        #[arg(long)]
        prefix: String,
        #[arg(long)]
        r: f64,
    },
    /// μ(B(x,r))/ψ(r) over a decreasing radius grid
    Scan {
        #[arg(long)]
        prefix: String,
        #[command(flatten)]
        gauge: GaugeArgs,
        #[arg(long, default_value_t = 1e-6)]
        r_min: f64,
        #[arg(long, default_value_t = 1e-2)]
        r_max: f64,
        #[arg(long, default_value_t = 17)]
        points: usize,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
}

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global();
    }
    let started = Instant::now();
    match run(&cli, started) {
        Ok(()) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

struct Ctx {
    out_dir: PathBuf,
    config: BTreeMap<String, String>,
    started: Instant,
}

impl Ctx {
    fn cfg_u64(&self, key: &str, flag: Option<u64>, default: u64) -> Result<u64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(s) => parse_u64_flag(s).map_err(Error::Parse),
            None => Ok(default),
        }
    }

    fn cfg_f64(&self, key: &str, flag: Option<f64>, default: f64) -> Result<f64> {
        if let Some(v) = flag {
            return Ok(v);
        }
        match self.config.get(key) {
            Some(s) => s
                .parse::<f64>()
                .map_err(|e| Error::Parse(format!("config {key}={s:?}: {e}"))),
            None => Ok(default),
        }
    }

    fn finish(&self, mut manifest: RunManifest, name: &str) -> Result<()> {
        manifest.wall_time_s = self.started.elapsed().as_secs_f64();
        manifest.config = self.config.clone();
        let path = out_path(&self.out_dir, name);
        manifest.write(&path)?;
        Ok(())
    }
}

fn run(cli: &Cli, started: Instant) -> Result<()> {
    let config = match &cli.config {
        Some(p) => artifacts::parse_config(p)?,
        None => BTreeMap::new(),
    };
    std::fs::create_dir_all(&cli.out_dir)?;
    let ctx = Ctx {
        out_dir: cli.out_dir.clone(),
        config,
        started,
    };
    match &cli.command {
        Command::Delta(a) => cmd_delta(&ctx, a),
        Command::Gaps(a) => cmd_gaps(&ctx, a),
        Command::Rk(a) => cmd_rk(&ctx, a),
        Command::Hoheisel(a) => cmd_hoheisel(&ctx, a),
        Command::Cramer(a) => cmd_cramer(&ctx, a),
        Command::Series(c) => cmd_series(&ctx, c),
        Command::Measure(c) => cmd_measure(&ctx, c),
    }
}

/// Load the table from a cache file when it covers the limit; otherwise
/// sieve and (when a path was given) write the cache.
fn table_with_cache(limit: u64, cache: &Option<PathBuf>) -> Result<primes::PrimeTable> {
    if let Some(path) = cache {
        if path.exists() {
            let table = primes::load_cache(path)?;
            if table.limit() >= limit {
                return Ok(table);
            }
            eprintln!(
                "cache {} covers only {}; resieving to {limit}",
                path.display(),
                table.limit()
            );
        }
        let table = primes::sieve(limit)?;
        primes::save_cache(&table, path)?;
        return Ok(table);
    }
    primes::sieve(limit)
}

fn build_alphabet(ctx: &Ctx, spec: &str, trunc: Option<u64>) -> Result<TruncatedAlphabet> {
    let trunc = ctx.cfg_u64("trunc", trunc, 100_000)?;
    TruncatedAlphabet::parse(spec, trunc)
}

#[derive(serde::Serialize)]
struct DeltaJson {
    delta: f64,
    bracket: (f64, f64),
    #[serde(rename = "N")]
    n: u64,
    letters: usize,
    tol: f64,
    tail_bound: f64,
    residual_bracket: (f64, f64),
    flags: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    assumption_checks: Option<dimension::AssumptionReport>,
}

fn cmd_delta(ctx: &Ctx, a: &DeltaArgs) -> Result<()> {
    let tol = ctx.cfg_f64("tol", a.tol, 1e-4)?;
    let alphabet = build_alphabet(ctx, &a.alphabet, a.trunc)?;
    let report = dimension::conformal_dimension(&alphabet, tol)?;

    let checks = if a.no_checks || alphabet.len() <= 1 {
        None
    } else {
        let model = MeasureModel::new(alphabet.clone(), report.delta.max(0.51))?;
        let table = primes::sieve(alphabet.cutoff().saturating_mul(2).max(4))?;
        Some(dimension::assumption_checks(&model, &table)?)
    };

    let json = DeltaJson {
        delta: report.delta,
        bracket: report.bracket,
        n: report.cutoff,
        letters: report.letters,
        tol: report.tol,
        tail_bound: report.tail_bound,
        residual_bracket: (report.residual.lower, report.residual.upper),
        flags: report.flags.clone(),
        assumption_checks: checks,
    };
    let text = serde_json::to_string_pretty(&json)
        .map_err(|e| Error::Parse(format!("delta report serialization: {e}")))?;
    let path = a
        .json
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, "delta.json"));
    std::fs::write(&path, format!("{text}\n"))?;
    println!("delta = {}", fmt17(report.delta));
    println!(
        "bracket = [{}, {}]",
        fmt17(report.bracket.0),
        fmt17(report.bracket.1)
    );
    println!("tail_bound = {}", fmt17(report.tail_bound));
    println!("report: {}", path.display());

    let mut manifest = RunManifest::new("delta", "delta-json-v1");
    manifest.truncation = Some(alphabet.cutoff());
    manifest.outputs.push(path.display().to_string());
    ctx.finish(manifest, "delta.manifest.json")
}

fn cmd_gaps(ctx: &Ctx, a: &GapsArgs) -> Result<()> {
    let table = table_with_cache(a.limit, &a.cache)?;
    let gaps = primes::gaps(&table);
    let rows: Vec<Vec<Cell>> = gaps
        .iter()
        .filter(|&&(_, _, d)| d >= a.min_gap)
        .map(|&(n, p, d)| vec![Cell::UInt(n as u64), Cell::UInt(p), Cell::UInt(d)])
        .collect();
    let path = a
        .csv
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, "gaps.csv"));
    artifacts::write_csv(&path, &["n", "p_n", "d_n"], &rows)?;
    println!("{} gaps -> {}", rows.len(), path.display());

    let mut manifest = RunManifest::new("gaps", SCHEMA_GAPS);
    manifest.truncation = Some(a.limit);
    manifest.outputs.push(path.display().to_string());
    ctx.finish(manifest, "gaps.manifest.json")
}

fn records_rows(records: &[primes::GapRecord], seed: Option<u64>) -> Vec<Vec<Cell>> {
    records
        .iter()
        .map(|r| {
            let mut row = Vec::with_capacity(6);
            if let Some(s) = seed {
                row.push(Cell::UInt(s));
            }
            row.extend([
                Cell::UInt(r.n as u64),
                Cell::UInt(r.p_n),
                Cell::UInt(r.d_n),
                Cell::UInt(r.window_min),
                Cell::Float(r.normalized),
            ]);
            row
        })
        .collect()
}

fn cmd_rk(ctx: &Ctx, a: &RkArgs) -> Result<()> {
    let table = table_with_cache(a.limit, &a.cache)?;
    let records = primes::rk_records_from(&table, a.k, a.start_n)?;
    let path = a
        .csv
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, "rk.csv"));
    artifacts::write_csv(
        &path,
        &["n", "p_n", "d_n", "window_min", "normalized"],
        &records_rows(&records, None),
    )?;
    match records.last() {
        Some(last) => println!(
            "final record (lower-bound witness): p_n={} window_min={} normalized={}",
            last.p_n,
            last.window_min,
            fmt17(last.normalized)
        ),
        None => println!("no records (table too small for k={})", a.k),
    }
    println!("{} records -> {}", records.len(), path.display());

    let mut manifest = RunManifest::new("rk", SCHEMA_RECORDS);
    manifest.truncation = Some(a.limit);
    manifest.outputs.push(path.display().to_string());
    ctx.finish(manifest, "rk.manifest.json")
}

fn cmd_hoheisel(ctx: &Ctx, a: &HoheiselArgs) -> Result<()> {
    let table = primes::sieve(a.limit)?;
    let (samples, summary) = primes::hoheisel_ratios(&table, a.theta, a.samples, a.seed)?;
    let rows: Vec<Vec<Cell>> = samples
        .iter()
        .map(|s| {
            vec![
                Cell::UInt(s.a),
                Cell::UInt(s.h),
                Cell::UInt(s.count),
                Cell::Float(s.ratio),
            ]
        })
        .collect();
    let path = a
        .csv
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, "hoheisel.csv"));
    artifacts::write_csv(&path, &["a", "h", "count", "ratio"], &rows)?;
    println!(
        "theta={} samples={} ratio band: min={} median={} max={}",
        a.theta,
        a.samples,
        fmt17(summary.min),
        fmt17(summary.median),
        fmt17(summary.max)
    );

    let mut manifest = RunManifest::new("hoheisel", SCHEMA_HOHEISEL);
    manifest.truncation = Some(a.limit);
    manifest.seeds = vec![a.seed];
    manifest.outputs.push(path.display().to_string());
    ctx.finish(manifest, "hoheisel.manifest.json")
}

fn cmd_cramer(ctx: &Ctx, a: &CramerArgs) -> Result<()> {
    let mut rows = Vec::new();
    let mut finals = Vec::new();
    let mut seeds = Vec::new();
    for i in 0..a.seeds {
        let seed = a.base_seed + i;
        seeds.push(seed);
        let set = cramer::simulate(a.limit, seed)?;
        let records = cramer::rk_on_model(&set, a.k)?;
        if let Some(last) = records.last() {
            finals.push(last.normalized);
        }
        rows.extend(records_rows(&records, Some(seed)));
    }
    let path = a
        .csv
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, "cramer.csv"));
    artifacts::write_csv(
        &path,
        &["seed", "n", "p_n", "d_n", "window_min", "normalized"],
        &rows,
    )?;
    println!(
        "k={} seeds={} median final record = {} (model limit 1/k = {}; drift is logarithmic)",
        a.k,
        a.seeds,
        fmt17(median(&finals)),
        fmt17(1.0 / a.k as f64)
    );
    println!("{} record rows -> {}", rows.len(), path.display());

    let mut manifest = RunManifest::new("cramer", SCHEMA_CRAMER);
    manifest.truncation = Some(a.limit);
    manifest.seeds = seeds;
    manifest.outputs.push(path.display().to_string());
    ctx.finish(manifest, "cramer.manifest.json")
}

fn gauge_from(ctx: &Ctx, g: &GaugeArgs) -> Result<(DimensionFunction, f64)> {
    let delta = match g.delta {
        Some(d) => d,
        None => {
            let trunc = ctx.cfg_u64("trunc", g.trunc, 100_000)?;
            let tol = ctx.cfg_f64("tol", g.tol, 1e-4)?;
            let alphabet = TruncatedAlphabet::primes(trunc)?;
            dimension::conformal_dimension(&alphabet, tol)?.delta
        }
    };
    let family = match g.family.as_str() {
        "log_power" => Family::LogPower { s: g.s },
        "loglog_power" => Family::LogLogPower { s: g.s },
        "slow_phi" => Family::SlowPhi,
        "power_offset" => Family::PowerOffset { t: g.s },
        other => {
            return Err(Error::Parse(format!(
                "unknown family {other:?} (log_power | loglog_power | slow_phi | power_offset)"
            )))
        }
    };
    Ok((DimensionFunction::new(family, delta)?, delta))
}

fn emit_series(
    ctx: &Ctx,
    name: &str,
    stream: &series::TermStream,
    csv: &Option<PathBuf>,
    seeds: Vec<u64>,
    trunc: Option<u64>,
) -> Result<()> {
    let diag = diagnostics::verdict(stream, VerdictPolicy::default())?;
    let mut rows = Vec::with_capacity(stream.entries.len());
    let mut lse = primecantor::util::LogSumExp::new();
    for e in &stream.entries {
        lse.add_ln(e.ln_term);
        rows.push(vec![
            Cell::Float(e.index),
            Cell::Float(e.ln_term.exp()),
            Cell::Float(e.ln_term),
            Cell::Float(lse.ln_value()),
        ]);
    }
    let path = csv
        .clone()
        .unwrap_or_else(|| out_path(&ctx.out_dir, &format!("{name}.csv")));
    artifacts::write_csv(
        &path,
        &["index", "term", "ln_term", "ln_partial_sum"],
        &rows,
    )?;
    let verdict_json = serde_json::to_string_pretty(&diag)
        .map_err(|e| Error::Parse(format!("verdict serialization: {e}")))?;
    let vpath = out_path(&ctx.out_dir, &format!("{name}.verdict.json"));
    std::fs::write(&vpath, format!("{verdict_json}\n"))?;
    println!("verdict: {:?} — {}", diag.verdict, diag.verdict_basis);
    println!(
        "{} terms ({} skipped) -> {} ; verdict -> {}",
        stream.entries.len(),
        stream.skipped,
        path.display(),
        vpath.display()
    );
    let mut manifest = RunManifest::new(name, SCHEMA_SERIES);
    manifest.seeds = seeds;
    manifest.truncation = trunc;
    manifest.outputs.push(path.display().to_string());
    manifest.outputs.push(vpath.display().to_string());
    ctx.finish(manifest, &format!("{name}.manifest.json"))
}

fn cmd_series(ctx: &Ctx, c: &SeriesCmd) -> Result<()> {
    match c {
        SeriesCmd::Hd {
            gauge,
            lambda,
            terms,
            csv,
        } => {
            let (spec, delta) = gauge_from(ctx, gauge)?;
            let stream = series::hd_series_terms(&spec, *lambda, delta, *terms as usize)?;
            emit_series(ctx, "series-hd", &stream, csv, vec![], gauge.trunc)
        }
        SeriesCmd::Bc { k, c, terms, csv } => {
            let n_terms = *terms as usize;
            // p_n < n(ln n + lnln n) for n ≥ 6; headroom for the sieve limit
            let nf = n_terms.max(10) as f64;
            let bound = (nf * (nf.ln() + nf.ln().ln() + 1.0)).ceil() as u64;
            let table = primes::sieve(bound.max(100))?;
            let diag = series::borel_cantelli_series(&table, *k, *c, n_terms)?;
            let stream = series::borel_cantelli_terms(&table, *k, *c, n_terms)?;
            let mut rows = Vec::with_capacity(stream.entries.len());
            let mut lse = primecantor::util::LogSumExp::new();
            for e in &stream.entries {
                lse.add_ln(e.ln_term);
                rows.push(vec![
                    Cell::Float(e.index),
                    Cell::Float(e.ln_term.exp()),
                    Cell::Float(e.ln_term),
                    Cell::Float(lse.ln_value()),
                ]);
            }
            let path = csv
                .clone()
                .unwrap_or_else(|| out_path(&ctx.out_dir, "series-bc.csv"));
            artifacts::write_csv(
                &path,
                &["index", "term", "ln_term", "ln_partial_sum"],
                &rows,
            )?;
            println!("verdict: {:?} — {}", diag.verdict, diag.verdict_basis);
            let mut manifest = RunManifest::new("series-bc", SCHEMA_SERIES);
            manifest.outputs.push(path.display().to_string());
            ctx.finish(manifest, "series-bc.manifest.json")
        }
        SeriesCmd::Sigma2 { gauge, alpha, csv } => {
            let (spec, delta) = gauge_from(ctx, gauge)?;
            let trunc = ctx.cfg_u64("trunc", gauge.trunc, 100_000)?;
            let alphabet = TruncatedAlphabet::primes(trunc)?;
            let model = MeasureModel::new(alphabet, delta)?;
            let stream = series::sigma_doubleprime_terms(&spec, *alpha, &model)?;
            emit_series(ctx, "series-sigma2", &stream, csv, vec![], Some(trunc))
        }
        SeriesCmd::Sigma1 { gauge, alpha, csv } => {
            let (spec, delta) = gauge_from(ctx, gauge)?;
            let trunc = ctx.cfg_u64("trunc", gauge.trunc, 100_000)?;
            let alphabet = TruncatedAlphabet::primes(trunc)?;
            let table = primes::sieve(trunc + trunc / 3 + 2)?;
            let model = MeasureModel::new(alphabet, delta)?;
            let stream = series::sigma_prime_packing_terms(&spec, *alpha, &model, &table)?;
            emit_series(ctx, "series-sigma1", &stream, csv, vec![], Some(trunc))
        }
        SeriesCmd::SigmaH { gauge, alpha, csv } => {
            let (spec, delta) = gauge_from(ctx, gauge)?;
            let trunc = ctx.cfg_u64("trunc", gauge.trunc, 100_000)?;
            let alphabet = TruncatedAlphabet::primes(trunc)?;
            let table = primes::sieve(trunc + trunc / 3 + 2)?;
            let model = MeasureModel::new(alphabet, delta)?;
            let stream = series::sigma_prime_hausdorff_terms(&spec, *alpha, &model, &table)?;
            emit_series(ctx, "series-sigma-h", &stream, csv, vec![], Some(trunc))
        }
    }
}

fn log_grid(r_min: f64, r_max: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    (0..n)
        .map(|i| (r_max.ln() + (r_min.ln() - r_max.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

fn model_at(ctx: &Ctx, trunc: Option<u64>) -> Result<MeasureModel> {
    let trunc = ctx.cfg_u64("trunc", trunc, 100_000)?;
    let alphabet = TruncatedAlphabet::primes(trunc)?;
    let delta = dimension::conformal_dimension(&alphabet, 1e-4)?.delta;
    MeasureModel::new(alphabet, delta)
}

fn cmd_measure(ctx: &Ctx, c: &MeasureCmd) -> Result<()> {
    match c {
        MeasureCmd::Tail {
            trunc,
            r_min,
            r_max,
            points,
            csv,
        } => {
            let model = model_at(ctx, *trunc)?;
            let mut rows = Vec::new();
            for r in log_grid(*r_min, *r_max, *points) {
                let t = model.tail_measure(r)?;
                rows.push(vec![
                    Cell::Float(r),
                    Cell::Float(t.value),
                    Cell::Float(t.value / model.distortion_band()),
                    Cell::Float(t.value * model.distortion_band()),
                    Cell::Float(t.ratio.unwrap_or(f64::NAN)),
                ]);
            }
            let path = csv
                .clone()
                .unwrap_or_else(|| out_path(&ctx.out_dir, "measure-tail.csv"));
            artifacts::write_csv(
                &path,
                &["r", "value", "lower_band", "upper_band", "ratio"],
                &rows,
            )?;
            println!("{} radii -> {}", rows.len(), path.display());
            let mut manifest = RunManifest::new("measure-tail", SCHEMA_TAIL);
            manifest.truncation = Some(model.alphabet().cutoff());
            manifest.outputs.push(path.display().to_string());
            ctx.finish(manifest, "measure-tail.manifest.json")
        }
        MeasureCmd::Annulus {
            trunc,
            lambda,
            r_min,
            r_max,
            points,
            csv,
        } => {
            let model = model_at(ctx, *trunc)?;
            let mut rows = Vec::new();
            for r in log_grid(*r_min, *r_max, *points) {
                let a = model.annulus_ratio(r, *lambda)?;
                rows.push(vec![
                    Cell::Float(r),
                    Cell::Float(a.ratio),
                    Cell::Float(a.annulus_normalized),
                    Cell::Float(a.tail_normalized),
                    Cell::UInt(a.empty as u64),
                ]);
            }
            let path = csv
                .clone()
                .unwrap_or_else(|| out_path(&ctx.out_dir, "measure-annulus.csv"));
            artifacts::write_csv(
                &path,
                &[
                    "r",
                    "ratio",
                    "annulus_normalized",
                    "tail_normalized",
                    "empty",
                ],
                &rows,
            )?;
            println!("{} radii -> {}", rows.len(), path.display());
            let mut manifest = RunManifest::new("measure-annulus", SCHEMA_ANNULUS);
            manifest.truncation = Some(model.alphabet().cutoff());
            manifest.outputs.push(path.display().to_string());
            ctx.finish(manifest, "measure-annulus.manifest.json")
        }
        MeasureCmd::Gmf { trunc, prefix, r } => {
            let model = model_at(ctx, *trunc)?;
            let word = Word::parse(prefix)?;
            let g = model.global_measure_formula(word.letters(), *r)?;
            println!("m = {}, n = {}, case = {:?}", g.m, g.n, g.case);
            println!(
                "M(x,n,r) = {} [{}, {}]",
                fmt17(g.m_sum.value),
                fmt17(g.m_sum.lower),
                fmt17(g.m_sum.upper)
            );
            println!(
                "ball = {} [{}, {}] (uncertain {}, depth {})",
                fmt17(g.ball.value),
                fmt17(g.ball.lower),
                fmt17(g.ball.upper),
                fmt17(g.ball.uncertain),
                g.ball.depth
            );
            println!("containment C = {}", fmt17(g.containment_c));
            match g.upper_c {
                Some(c) => println!("upper-sandwich C = {}", fmt17(c)),
                None => println!("upper-sandwich C not reached on the grid"),
            }
            println!("sandwich lower ok: {}", g.sandwich_lower_ok);
            let manifest = RunManifest::new("measure-gmf", "gmf-v1");
            ctx.finish(manifest, "measure-gmf.manifest.json")
        }
        MeasureCmd::Scan {
            prefix,
            gauge,
            r_min,
            r_max,
            points,
            csv,
        } => {
            let model = model_at(ctx, gauge.trunc)?;
            let (spec, _) = gauge_from(
                ctx,
                &GaugeArgs {
                    delta: Some(model.delta()),
                    ..gauge.clone()
                },
            )?;
            let word = Word::parse(prefix)?;
            let mut radii = log_grid(*r_min, *r_max, *points);
            radii.sort_by(|a, b| b.partial_cmp(a).unwrap());
            let (pts, run_min, run_max) =
                model.local_density_scan(word.letters(), &spec, &radii)?;
            let rows: Vec<Vec<Cell>> = pts
                .iter()
                .map(|p| {
                    vec![
                        Cell::Float(p.r),
                        Cell::Float(p.ratio),
                        Cell::Float(p.lower),
                        Cell::Float(p.upper),
                    ]
                })
                .collect();
            let path = csv
                .clone()
                .unwrap_or_else(|| out_path(&ctx.out_dir, "measure-scan.csv"));
            artifacts::write_csv(&path, &["r", "value", "lower_band", "upper_band"], &rows)?;
            println!(
                "finite-scan density proxies: running min {} max {} (proxies, not limits)",
                fmt17(run_min),
                fmt17(run_max)
            );
            println!("{} radii -> {}", rows.len(), path.display());
            let mut manifest = RunManifest::new("measure-scan", SCHEMA_SCAN);
            manifest.truncation = Some(model.alphabet().cutoff());
            manifest.outputs.push(path.display().to_string());
            ctx.finish(manifest, "measure-scan.manifest.json")
        }
    }
}
