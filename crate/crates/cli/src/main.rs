//! `osnap`: batch front end over Matrix Market files.
//!
//! Exit status: 0 success, 1 bad parameters or input, 2 numerical failure,
//! 3 verification report with `passed = false`.

mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use osnap::matio::read_matrix_market;
use osnap::solvers::{
    approx_leverage_scores, low_rank_approx, sketched_regression, LeverageOptions, LowRankOptions,
    RegressionOptions,
};
use osnap::verify::{
    embedding_success_rate, frobenius_moment_check, hash_independence_exhaustive,
    matrix_product_error_check, nnz_scaling_benchmark, VerificationReport,
};
use osnap::{
    recommend_params, DenseMatrix, Matrix, Operand, ParamConstants, Sketch, SketchKind,
    SketchParams, SketchSpec,
};

use output::{write_output, Failure};

#[derive(Parser, Debug)]
#[command(
    name = "osnap",
    version,
    about = "Sparse oblivious subspace embeddings and sketch-and-solve tools"
)]
struct Cli {
    /// Worker threads; 0 uses every core, 1 runs fully serially.
    #[arg(long, global = true, default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Materialize a sketch matrix as sparse Matrix Market.
    Sketch(SketchArgs),
    /// Sketch a Matrix Market input: writes Π A.
    Apply(ApplyArgs),
    /// Sketch-and-solve least squares: writes x minimizing ||Π A x - Π b||.
    Regress(RegressArgs),
    /// Approximate leverage scores of the rows of A.
    Leverage(LeverageArgs),
    /// Rank-k approximation of A from a sketch of its row space.
    Lowrank(LowRankArgs),
    /// Run one Monte Carlo verification experiment and emit a JSON report.
    Verify(VerifyArgs),
    /// Time sketch application across nnz levels and emit a JSON report.
    Bench(BenchArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Mm,
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Experiment {
    Embedding,
    Frobenius,
    Product,
    Hash,
}

/// Sketch shape. Missing `m` or `s` are filled from the recommended
/// parameters for `(d, eps, delta)`.
#[derive(Args, Debug, Clone)]
struct ShapeArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Tz)]
    kind: KindArg,
    /// Rows of the sketch.
    #[arg(long)]
    m: Option<usize>,
    /// Nonzeros per column.
    #[arg(long)]
    s: Option<usize>,
    /// Independence of the position hashes (default: recommended, or 2 for tz and 4 otherwise).
    #[arg(long)]
    independence: Option<usize>,
    /// Distortion target, needed when m or s is omitted.
    #[arg(long)]
    eps: Option<f64>,
    /// Failure probability.
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
    /// Exponent slack of the block regime.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Multiplier on the recommended m (OSNAP kinds).
    #[arg(long, default_value_t = 1.0)]
    c_m: f64,
    /// Multiplier on the recommended s (OSNAP kinds).
    #[arg(long, default_value_t = 1.0)]
    c_s: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum KindArg {
    Tz,
    OsnapGlobal,
    OsnapBlock,
}

impl From<KindArg> for SketchKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Tz => SketchKind::Tz,
            KindArg::OsnapGlobal => SketchKind::OsnapGlobal,
            KindArg::OsnapBlock => SketchKind::OsnapBlock,
        }
    }
}

impl ShapeArgs {
    fn constants(&self) -> ParamConstants {
        ParamConstants {
            c_m: self.c_m,
            c_s: self.c_s,
            gamma: self.gamma,
        }
    }

    /// Explicit values win; anything missing comes from `recommend_params`
    /// and is echoed to stderr.
    fn resolve(&self, d: Option<usize>) -> Result<SketchParams, Failure> {
        let kind = SketchKind::from(self.kind);
        let mut p = match (self.m, self.s, kind) {
            (Some(m), _, SketchKind::Tz) => SketchParams {
                kind,
                m,
                s: 1,
                independence_k: 2,
            },
            (Some(m), Some(s), _) => SketchParams {
                kind,
                m,
                s,
                independence_k: 4,
            },
            _ => {
                let eps = self.eps.ok_or_else(|| {
                    Failure::usage("--eps is required when --m or --s is omitted")
                })?;
                let d =
                    d.ok_or_else(|| Failure::usage("--d is required when --m or --s is omitted"))?;
                let rec = recommend_params(d, eps, self.delta, kind, &self.constants())?;
                let p = SketchParams {
                    kind,
                    m: self.m.unwrap_or(rec.m),
                    s: self.s.unwrap_or(rec.s),
                    independence_k: rec.independence_k,
                };
                eprintln!(
                    "osnap: {kind} sketch with m={} s={} independence={} (d={d}, eps={eps}, delta={})",
                    p.m, p.s, p.independence_k, self.delta
                );
                p
            }
        };
        if let Some(k) = self.independence {
            p.independence_k = k;
        }
        Ok(p)
    }
}

#[derive(Args, Debug)]
struct SketchArgs {
    /// Columns of the sketch (ambient dimension).
    #[arg(long)]
    n: usize,
    /// Subspace dimension used to size the sketch.
    #[arg(long)]
    d: Option<usize>,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ApplyArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct RegressArgs {
    #[arg(long)]
    input: PathBuf,
    /// Right-hand side, an n x 1 Matrix Market file.
    #[arg(long)]
    rhs: PathBuf,
    #[arg(long, value_enum, default_value_t = KindArg::Tz)]
    kind: KindArg,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    /// Independent sketches to try; the best true residual is kept.
    #[arg(long, default_value_t = 1)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Mm)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LeverageArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct LowRankArgs {
    #[arg(long)]
    input: PathBuf,
    /// Target rank.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    eps: f64,
    #[arg(long, default_value_t = 1.0 / 3.0)]
    delta: f64,
    /// Override the sketch row count.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// `mm` writes the rank-k reconstruction, `json` the spectrum and error.
    #[arg(long, value_enum, default_value_t = Format::Mm)]
    format: Format,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[arg(long, value_enum)]
    experiment: Experiment,
    /// Subspace dimension (embedding, frobenius) or common column count (product).
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// Ambient dimension.
    #[arg(long, default_value_t = 200)]
    n: usize,
    #[command(flatten)]
    shape: ShapeArgs,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Hash independence degree (hash experiment).
    #[arg(long, default_value_t = 2)]
    k: usize,
    /// Field size (hash experiment).
    #[arg(long, default_value_t = 5)]
    prime: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, default_value_t = 100_000)]
    n: usize,
    /// Columns of the random input.
    #[arg(long, default_value_t = 8)]
    d: usize,
    #[command(flatten)]
    shape: ShapeArgs,
    /// Comma-separated nnz levels.
    #[arg(long, value_delimiter = ',', default_values_t = vec![5_000usize, 50_000, 500_000])]
    levels: Vec<usize>,
    #[arg(long, default_value_t = 5)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    output: Option<PathBuf>,
}

fn load(path: &PathBuf) -> Result<Matrix, Failure> {
    read_matrix_market(path).map_err(|e| Failure::input(path, e))
}

fn run_sketch(args: SketchArgs) -> Result<(), Failure> {
    let p = args.shape.resolve(args.d)?;
    let sketch = Sketch::new(p.to_spec(args.n, args.seed))?;
    write_output(
        args.output.as_deref(),
        &output::matrix(&Matrix::Sparse(sketch.to_csc()))?,
    )
}

fn run_apply(args: ApplyArgs) -> Result<(), Failure> {
    let a = load(&args.input)?;
    let p = args.shape.resolve(Some(a.cols()))?;
    let sketch = Sketch::new(p.to_spec(a.rows(), args.seed))?;
    let pa = sketch.apply(&a)?;
    write_output(args.output.as_deref(), &output::matrix(&Matrix::Dense(pa))?)
}

fn run_regress(args: RegressArgs) -> Result<(), Failure> {
    let a = load(&args.input)?;
    let b = load(&args.rhs)?.to_dense();
    let mut opts = RegressionOptions::new(args.eps, args.delta, args.kind.into(), args.seed);
    opts.repeats = args.repeats;
    opts.constants.gamma = args.gamma;
    let res = sketched_regression(&a, &b, &opts)?;
    let spec = res.sketch_spec_used;
    eprintln!(
        "osnap: {} sketch with m={} s={}; residual {} (sketched {})",
        spec.kind, spec.m, spec.s, res.residual, res.sketched_residual
    );
    let text = match args.format {
        Format::Mm => output::matrix(&Matrix::Dense(res.x.clone()))?,
        Format::Csv => output::indexed_csv("x", res.x.data()),
        Format::Json => output::json_line(&serde_json::json!({
            "x": res.x.data(),
            "residual": res.residual,
            "sketched_residual": res.sketched_residual,
            "sketch_spec_used": spec,
        })),
    };
    write_output(args.output.as_deref(), &text)
}

fn run_leverage(args: LeverageArgs) -> Result<(), Failure> {
    let a = load(&args.input)?;
    let res = approx_leverage_scores(&a, &LeverageOptions::new(args.eps, args.delta, args.seed))?;
    let spec = res.sketch_spec_used;
    eprintln!(
        "osnap: {} sketch with m={} s={}, {} projection columns",
        spec.kind, spec.m, spec.s, res.jl_dim
    );
    let text = match args.format {
        Format::Csv => output::indexed_csv("score", &res.scores),
        Format::Json => output::json_line(&res),
        Format::Mm => output::matrix(&Matrix::Dense(DenseMatrix::column_vector(
            res.scores.clone(),
        )?))?,
    };
    write_output(args.output.as_deref(), &text)
}

fn run_lowrank(args: LowRankArgs) -> Result<(), Failure> {
    let a = load(&args.input)?;
    let mut opts = LowRankOptions::new(args.k, args.eps, args.seed);
    opts.delta = args.delta;
    opts.sketch_rows = args.m;
    let res = low_rank_approx(&a, &opts)?;
    let spec = res.sketch_spec_used;
    eprintln!(
        "osnap: {} sketch with m={} s={}; error {}",
        spec.kind, spec.m, spec.s, res.error_frobenius
    );
    let text = match args.format {
        Format::Mm => output::matrix(&Matrix::Dense(res.reconstruct()))?,
        Format::Csv => output::indexed_csv("sigma", &res.sigma),
        Format::Json => output::json_line(&res),
    };
    write_output(args.output.as_deref(), &text)
}

fn gaussian(rows: usize, cols: usize, seed: u64) -> DenseMatrix {
    let mut rng = osnap::rng::CounterRng::new(seed);
    DenseMatrix::from_fn(rows, cols, |_, _| rng.next_normal())
}

fn run_verify(args: VerifyArgs) -> Result<VerificationReport, Failure> {
    let report = match args.experiment {
        Experiment::Embedding => {
            let p = args.shape.resolve(Some(args.d))?;
            let eps = args
                .shape
                .eps
                .ok_or_else(|| Failure::usage("--eps is required"))?;
            embedding_success_rate(&p, args.n, args.d, eps, args.trials, args.seed)?
        }
        Experiment::Frobenius => {
            let m = args
                .shape
                .m
                .ok_or_else(|| Failure::usage("--m is required"))?;
            frobenius_moment_check(args.n, args.d, m, args.trials, args.seed)?
        }
        Experiment::Product => {
            let p = args.shape.resolve(Some(args.d))?;
            let eps = args
                .shape
                .eps
                .ok_or_else(|| Failure::usage("--eps is required"))?;
            let a = gaussian(args.n, args.d, osnap::rng::mix(args.seed, 1));
            let b = gaussian(args.n, args.d, osnap::rng::mix(args.seed, 2));
            matrix_product_error_check(&a, &b, &p, args.trials, eps, args.seed, args.shape.delta)?
        }
        Experiment::Hash => hash_independence_exhaustive(args.k, args.prime)?,
    };
    write_output(args.output.as_deref(), &output::json_line(&report))?;
    Ok(report)
}

fn run_bench(args: BenchArgs) -> Result<(), Failure> {
    let p = args.shape.resolve(Some(args.d))?;
    let spec: SketchSpec = p.to_spec(args.n, args.seed);
    // Fail early on impossible levels instead of after the first timing.
    if let Some(&too_big) = args
        .levels
        .iter()
        .find(|&&l| l > args.n.saturating_mul(args.d))
    {
        return Err(Failure::usage(format!(
            "nnz level {too_big} exceeds n*d = {}",
            args.n * args.d
        )));
    }
    let report = nnz_scaling_benchmark(&spec, args.d, &args.levels, args.reps, args.seed)?;
    if !report.passed {
        eprintln!(
            "osnap: timing ratio {:.2} exceeds the linear tolerance 2.0 (informational)",
            report.statistic
        );
    }
    write_output(args.output.as_deref(), &output::json_line(&report))
}

fn dispatch(cli: Cli) -> Result<ExitCode, Failure> {
    if cli.threads > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global()
            .map_err(|e| Failure::usage(e.to_string()))?;
    }
    match cli.command {
        Command::Sketch(a) => run_sketch(a)?,
        Command::Apply(a) => run_apply(a)?,
        Command::Regress(a) => run_regress(a)?,
        Command::Leverage(a) => run_leverage(a)?,
        Command::Lowrank(a) => run_lowrank(a)?,
        Command::Verify(a) => {
            if !run_verify(a)?.passed {
                return Ok(ExitCode::from(3));
            }
        }
        Command::Bench(a) => run_bench(a)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match dispatch(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("osnap: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
