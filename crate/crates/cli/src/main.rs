use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::info;

use overtune::analysis::{
    self, budget_sweep, build_ecdf, compute_reports, group_summaries, paired_compare,
    split_by_factor, RunReport, TimePoint,
};
use overtune::fmt::{OutputFormat, Table};
use overtune::ingest::{self, Corpus, MetricSpec, MetricTable, Orientation};
use overtune::replication::{replicate_curves_with, SubsetOrder};
use overtune::selection::{rule_sweep, SelectionRule};
use overtune::synthetic::{self, FactorialDesign, SyntheticSpec, TestSurface};
use overtune::{Epsilon, Error, ErrorKind};

/// Sidecar looked up next to the first input when --metric-table is absent.
const SIDECAR: &str = "metric_table.csv";

#[derive(Parser, Debug)]
#[command(
    name = "overtune",
    version,
    about = "Overtuning diagnostics for HPO runs"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Worker threads (default: all cores). Outputs do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    output: PathBuf,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Master seed for every stochastic subcommand.
    #[arg(long, global = true, default_value_t = 42)]
    seed: u64,

    /// Threshold on the test improvement below which relative overtuning is undefined.
    #[arg(long, global = true, default_value_t = overtune::metrics::DEFAULT_EPSILON)]
    epsilon: f64,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

impl From<Format> for OutputFormat {
    fn from(f: Format) -> Self {
        match f {
            Format::Csv => OutputFormat::Csv,
            Format::Json => OutputFormat::Json,
        }
    }
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Corpus files (.csv, or .jsonl / .ndjson).
    #[arg(long, required = true, num_args = 1..)]
    input: Vec<PathBuf>,

    /// Lines of `name,minimize|maximize`. Defaults to metric_table.csv next to the first input.
    #[arg(long)]
    metric_table: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a corpus for schema errors and duplicate runs.
    Validate(InputArgs),
    /// Final overtuning, meta-overfitting and test regret per run.
    Metrics {
        #[command(flatten)]
        inputs: InputArgs,
        /// Key field toggled between the two sides of a paired comparison.
        #[arg(long, requires_all = ["pair_a", "pair_b"])]
        pair_factor: Option<String>,
        #[arg(long)]
        pair_a: Option<String>,
        #[arg(long)]
        pair_b: Option<String>,
    },
    /// ECDF of relative overtuning, optionally stratified.
    Ecdf {
        #[command(flatten)]
        inputs: InputArgs,
        /// Comma-separated key fields.
        #[arg(long, value_delimiter = ',')]
        group_by: Vec<String>,
        /// 1-based iteration to evaluate at instead of each run's final one.
        #[arg(long)]
        at: Option<usize>,
    },
    /// Pooled metric means over a grid of budgets.
    Sweep {
        #[command(flatten)]
        inputs: InputArgs,
        /// Comma-separated 1-based iterations (default: 1..=longest run).
        #[arg(long, value_delimiter = ',')]
        budget_grid: Vec<usize>,
    },
    /// Mean and standard error of replicate incumbent curves.
    Curves {
        #[command(flatten)]
        inputs: InputArgs,
        #[arg(long, default_value_t = 100)]
        replicates: usize,
        #[arg(long, default_value_t = 0.5)]
        subsample_frac: f64,
        /// Run to use, in key order. Required when the corpus has several runs.
        #[arg(long)]
        run_index: Option<usize>,
        /// Permute configurations within each replicate.
        #[arg(long)]
        permute: bool,
    },
    /// Generate a synthetic corpus with a known test surface.
    Simulate(SimulateArgs),
    /// Compare counterfactual selection rules against the final incumbent.
    Select {
        #[command(flatten)]
        inputs: InputArgs,
        /// Comma-separated rules: naive, stop:T, stopfrac:F, pct:K.
        #[arg(long, value_delimiter = ',', default_value = "naive")]
        rules: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, default_value_t = 1000)]
    n_configs: usize,
    #[arg(long, default_value_t = 500)]
    trajectory_len: usize,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', default_value = "0")]
    sigma_shared: Vec<f64>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    sigma_indep: Vec<f64>,
    /// Comma-separated levels.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    k_folds: Vec<usize>,
    /// Comma-separated booleans; the bare flag means `true`.
    #[arg(long, value_delimiter = ',', num_args = 0..=1, default_value = "false", default_missing_value = "true")]
    reshuffled: Vec<bool>,
    /// uniform:LO:HI, normal:MU:SD or quadratic:DEPTH:FLOOR.
    #[arg(long, default_value = "uniform:0:1")]
    surface: String,
    /// Seeds per cell: seed, seed+1, ...
    #[arg(long, default_value_t = 10)]
    n_seeds: u64,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e.kind() {
            ErrorKind::Io => 1,
            ErrorKind::Schema => 2,
            ErrorKind::Argument => 3,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn arg_error(message: impl Into<String>) -> Failure {
    Failure {
        code: 3,
        message: message.into(),
    }
}

fn io_error(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: 1,
        message: format!("{}: {e}", path.display()),
    }
}

struct Ctx {
    output: PathBuf,
    format: OutputFormat,
    seed: u64,
    epsilon: Epsilon,
}

impl Ctx {
    fn emit(&self, table: &Table, stem: &str) -> Result<(), Failure> {
        let path = table.write_to_dir(&self.output, stem, self.format)?;
        info!("wrote {}", path.display());
        Ok(())
    }
}

fn load(inputs: &InputArgs) -> Result<Corpus, Failure> {
    let table_path = match &inputs.metric_table {
        Some(p) => p.clone(),
        None => {
            let dir = inputs.input[0].parent().unwrap_or(Path::new("."));
            dir.join(SIDECAR)
        }
    };
    if !table_path.is_file() {
        return Err(Failure {
            code: 1,
            message: format!(
                "metric table {} not found (pass --metric-table)",
                table_path.display()
            ),
        });
    }
    let metrics = MetricTable::from_path(&table_path)?;
    let corpus = ingest::parse_files(&inputs.input, &metrics)?;
    info!(
        "ingest: {} runs, {} rows kept, {} dropped, {} runs rejected",
        corpus.runs.len(),
        corpus.stats.rows_kept,
        corpus.stats.rows_dropped,
        corpus.stats.runs_rejected
    );
    Ok(corpus)
}

fn load_reports(inputs: &InputArgs, ctx: &Ctx) -> Result<(Corpus, Vec<RunReport>), Failure> {
    let corpus = load(inputs)?;
    ingest::validate_corpus(&corpus.runs)?;
    let reports = compute_reports(&corpus.runs, ctx.epsilon)?;
    info!("metrics: computed {} reports", reports.len());
    Ok((corpus, reports))
}

fn cmd_validate(inputs: &InputArgs, ctx: &Ctx) -> Result<(), Failure> {
    let corpus = load(inputs)?;
    let report = ingest::validate_corpus(&corpus.runs)?;
    let stats = &corpus.stats;
    let mut summary = Table::new([
        "n_runs",
        "n_duplicates",
        "rows_read",
        "rows_kept",
        "rows_dropped",
        "runs_rejected",
        "warnings",
    ]);
    summary.push(vec![
        report.n_runs.into(),
        report.n_duplicates.into(),
        stats.rows_read.into(),
        stats.rows_kept.into(),
        stats.rows_dropped.into(),
        stats.runs_rejected.into(),
        stats.warnings.len().into(),
    ]);
    let mut lengths = Table::new(["length", "runs"]);
    for (len, n) in &report.length_histogram {
        lengths.push(vec![(*len).into(), (*n).into()]);
    }
    let mut studies = Table::new(["study", "runs"]);
    for (study, n) in &report.runs_per_study {
        studies.push(vec![study.as_str().into(), (*n).into()]);
    }
    println!(
        "ok: {} runs, {} rows kept, {} rows dropped",
        report.n_runs, stats.rows_kept, stats.rows_dropped
    );
    ctx.emit(&summary, "validation")?;
    ctx.emit(&lengths, "lengths")?;
    ctx.emit(&studies, "studies")
}

fn cmd_metrics(
    inputs: &InputArgs,
    pair: Option<(&str, &str, &str)>,
    ctx: &Ctx,
) -> Result<(), Failure> {
    let (_, reports) = load_reports(inputs, ctx)?;
    ctx.emit(&analysis::metrics_table(&reports), "metrics")?;
    if let Some((factor, a, b)) = pair {
        let (left, right) = split_by_factor(&reports, factor, a, b);
        let cmp = paired_compare(&left, &right, factor)?;
        info!(
            "pairs: {} matched, mean delta test {:?}, mean delta ot {:?}",
            cmp.pairs.len(),
            cmp.mean_delta_final_test,
            cmp.mean_delta_final_ot
        );
        ctx.emit(&analysis::pairs_table(&cmp), "pairs")?;
    }
    Ok(())
}

fn cmd_ecdf(
    inputs: &InputArgs,
    group_by: &[String],
    at: Option<usize>,
    ctx: &Ctx,
) -> Result<(), Failure> {
    let (_, reports) = load_reports(inputs, ctx)?;
    let at = at.map_or(TimePoint::Final, TimePoint::Iteration);
    let ecdf = build_ecdf(reports.iter().map(|r| &r.report), at, ctx.epsilon)?;
    info!(
        "ecdf: {} values, {} filtered, fraction_severe {:?}",
        ecdf.values.len(),
        ecdf.n_filtered,
        ecdf.fraction_severe
    );
    ctx.emit(&ecdf.to_table(), "ecdf")?;
    ctx.emit(&ecdf.summary_table(), "ecdf_summary")?;
    if !group_by.is_empty() {
        let fields: Vec<&str> = group_by.iter().map(String::as_str).collect();
        let groups = group_summaries(&reports, &fields, ctx.epsilon)?;
        ctx.emit(&analysis::groups_table(&fields, &groups), "groups")?;
    }
    Ok(())
}

fn cmd_sweep(inputs: &InputArgs, grid: &[usize], ctx: &Ctx) -> Result<(), Failure> {
    let (_, reports) = load_reports(inputs, ctx)?;
    let grid: Vec<usize> = if grid.is_empty() {
        let longest = reports.iter().map(|r| r.report.len()).max().unwrap_or(0);
        (1..=longest).collect()
    } else {
        grid.to_vec()
    };
    let points = budget_sweep(reports.iter().map(|r| &r.report), &grid, ctx.epsilon)?;
    let excluded: usize = points.iter().map(|p| p.n_excluded).sum();
    if excluded > 0 {
        info!("sweep: {excluded} run/iteration cells excluded (run shorter than budget)");
    }
    ctx.emit(&analysis::sweep_table(&points), "sweep")
}

fn cmd_curves(
    inputs: &InputArgs,
    replicates: usize,
    fraction: f64,
    run_index: Option<usize>,
    order: SubsetOrder,
    ctx: &Ctx,
) -> Result<(), Failure> {
    let corpus = load(inputs)?;
    ingest::validate_corpus(&corpus.runs)?;
    let index = match (run_index, corpus.runs.len()) {
        (Some(i), n) if i < n => i,
        (Some(i), n) => {
            return Err(arg_error(format!(
                "--run-index {i} out of range ({n} runs)"
            )))
        }
        (None, 1) => 0,
        (None, n) => {
            return Err(arg_error(format!(
                "corpus has {n} runs; choose one with --run-index"
            )))
        }
    };
    let run = &corpus.runs[index];
    info!(
        "curves: run {} ({} evaluations)",
        run.key,
        run.trajectory.len()
    );
    let curves = replicate_curves_with(&run.trajectory, fraction, replicates, ctx.seed, order)?;
    ctx.emit(&curves.to_table(), "curves")
}

fn cmd_simulate(args: &SimulateArgs, ctx: &Ctx) -> Result<(), Failure> {
    let surface: TestSurface = args.surface.parse()?;
    let base = SyntheticSpec {
        n_configs: args.n_configs,
        surface,
        trajectory_len: args.trajectory_len,
        ..SyntheticSpec::default()
    };
    if args.n_seeds == 0 {
        return Err(arg_error("--n-seeds must be >= 1"));
    }
    let design = FactorialDesign {
        base,
        sigma_shared: args.sigma_shared.clone(),
        sigma_indep: args.sigma_indep.clone(),
        k_folds: args.k_folds.clone(),
        reshuffled: args.reshuffled.clone(),
        seeds: (0..args.n_seeds)
            .map(|i| ctx.seed.wrapping_add(i))
            .collect(),
    };
    let generated = synthetic::sweep_grid(&design.specs())?;
    info!("simulate: generated {} runs", generated.len());

    let metrics = MetricTable::new(vec![MetricSpec::new(
        synthetic::METRIC,
        Orientation::Minimize,
    )]);
    let runs: Vec<_> = generated.iter().map(|g| g.run.clone()).collect();
    let corpus_path = match ctx.format {
        OutputFormat::Csv => ctx.output.join("corpus.csv"),
        OutputFormat::Json => ctx.output.join("corpus.jsonl"),
    };
    let file = std::fs::File::create(&corpus_path).map_err(|e| io_error(&corpus_path, e))?;
    let writer = std::io::BufWriter::new(file);
    match ctx.format {
        OutputFormat::Csv => ingest::write_csv(&runs, &metrics, writer)?,
        OutputFormat::Json => ingest::write_jsonl(&runs, &metrics, writer)?,
    }
    info!("wrote {}", corpus_path.display());
    let table_path = ctx.output.join(SIDECAR);
    std::fs::write(&table_path, metrics.to_text()).map_err(|e| io_error(&table_path, e))?;

    let mut oracle = Table::new(
        ingest::KEY_FIELDS
            .iter()
            .copied()
            .chain(["oracle_min_test"]),
    );
    for g in &generated {
        let mut row = analysis::key_cells(&g.run.key);
        row.push(g.oracle_min_test.into());
        oracle.push(row);
    }
    ctx.emit(&oracle, "oracle")
}

fn cmd_select(inputs: &InputArgs, rules: &[String], ctx: &Ctx) -> Result<(), Failure> {
    let rules = rules
        .iter()
        .map(|s| s.parse::<SelectionRule>())
        .collect::<Result<Vec<_>, _>>()?;
    let corpus = load(inputs)?;
    ingest::validate_corpus(&corpus.runs)?;
    let sweep = rule_sweep(&corpus.runs, &rules)?;
    for s in &sweep.summaries {
        info!(
            "select: {} mean delta test {:?} over {} runs ({} excluded)",
            s.rule, s.mean_delta_test, s.n, s.n_excluded
        );
    }
    ctx.emit(&sweep.rules_table(), "rules")?;
    ctx.emit(&sweep.scatter_table(), "rule_scatter")?;
    ctx.emit(&sweep.quadrants_table(), "rule_quadrants")
}

fn run(cli: Cli) -> Result<(), Failure> {
    if let Some(n) = cli.threads {
        if n == 0 {
            return Err(arg_error("--threads must be >= 1"));
        }
        #[cfg(feature = "parallel")]
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| arg_error(format!("cannot configure thread pool: {e}")))?;
    }
    let ctx = Ctx {
        epsilon: Epsilon::new(cli.epsilon)?,
        output: cli.output,
        format: cli.format.into(),
        seed: cli.seed,
    };
    std::fs::create_dir_all(&ctx.output).map_err(|e| io_error(&ctx.output, e))?;

    match &cli.command {
        Command::Validate(inputs) => cmd_validate(inputs, &ctx),
        Command::Metrics {
            inputs,
            pair_factor,
            pair_a,
            pair_b,
        } => {
            let pair = match (pair_factor, pair_a, pair_b) {
                (Some(f), Some(a), Some(b)) => Some((f.as_str(), a.as_str(), b.as_str())),
                _ => None,
            };
            cmd_metrics(inputs, pair, &ctx)
        }
        Command::Ecdf {
            inputs,
            group_by,
            at,
        } => cmd_ecdf(inputs, group_by, *at, &ctx),
        Command::Sweep {
            inputs,
            budget_grid,
        } => cmd_sweep(inputs, budget_grid, &ctx),
        Command::Curves {
            inputs,
            replicates,
            subsample_frac,
            run_index,
            permute,
        } => {
            let order = if *permute {
                SubsetOrder::Permute
            } else {
                SubsetOrder::Preserve
            };
            cmd_curves(
                inputs,
                *replicates,
                *subsample_frac,
                *run_index,
                order,
                &ctx,
            )
        }
        Command::Simulate(args) => cmd_simulate(args, &ctx),
        Command::Select { inputs, rules } => cmd_select(inputs, rules, &ctx),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info"))
        .format_timestamp(None)
        .init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
