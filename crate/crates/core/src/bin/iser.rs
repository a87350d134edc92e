use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use iser::harness::bench::{run_bench, BenchDataset, BenchPlan};
use iser::harness::grid::{grid_csv, heatmap_pgm, score_grid, GridSpec};
use iser::harness::scalability::{run_scalability, runtime_csv, ScalabilityPlan};
use iser::harness::DEFAULT_PSI_GRID;
use iser::iforest::DEFAULT_TREES;
use iser::metrics::DetectionMetrics;
use iser::model::{read_csv_header, write_file, DEFAULT_LABEL_COLUMN};
use iser::scoring::scores_csv;
use iser::synth::{default_anomalies, generate, SynthKind, SynthSpec, DEFAULT_NOISE};
use iser::{ingest_csv, write_csv, Dataset, Detector, DetectorParams, Error, Execution, Method};

#[derive(Parser)]
#[command(
    name = "iser",
    version,
    about = "Isolation-based anomaly detection with spherical ensemble representations"
)]
struct Cli {
    /// Run everything on the calling thread.
    #[arg(long, global = true)]
    sequential: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a labeled synthetic dataset.
    Synth(SynthArgs),
    /// Fit a detector on a CSV and score every row.
    Detect(DetectArgs),
    /// Grid-search psi and compare methods over labeled datasets.
    Bench(BenchArgs),
    /// Score a dense 2-D grid around a dataset.
    Grid(GridArgs),
    /// Time fit + score on Gaussian data of growing size.
    Scalability(ScalabilityArgs),
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    kind: SynthKind,
    #[arg(long, default_value_t = 500)]
    n_normal: usize,
    /// Defaults to n-normal / 20.
    #[arg(long)]
    n_anomaly: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_NOISE)]
    noise: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    #[arg(long)]
    method: Method,
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value_t = 16)]
    psi: usize,
    #[arg(long, default_value_t = 200)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trees for iser-if and iforest.
    #[arg(long, default_value_t = DEFAULT_TREES)]
    trees: usize,
    /// Tree subsample size (default min(256, n)).
    #[arg(long)]
    subsample: Option<usize>,
    /// Min-max scale features before fitting.
    #[arg(long)]
    normalize: bool,
    /// Label column; "label" is used when present unless another name is given.
    #[arg(long)]
    label_col: Option<String>,
}

#[derive(Args)]
struct DetectArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long)]
    scores_out: PathBuf,
    /// Where to write {auroc, aupr} for labeled input (default: <scores-out stem>.metrics.json).
    #[arg(long)]
    metrics_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<Method>,
    /// Labeled CSV; repeat for several datasets.
    #[arg(long = "data", required = true)]
    datasets: Vec<PathBuf>,
    #[arg(long, default_value_t = 5)]
    repeats: usize,
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_PSI_GRID)]
    psi_grid: Vec<usize>,
    #[arg(long, default_value_t = 200)]
    t: usize,
    #[arg(long, default_value_t = DEFAULT_TREES)]
    trees: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    normalize: bool,
    #[arg(long, default_value = DEFAULT_LABEL_COLUMN)]
    label_col: String,
    #[arg(long)]
    results_out: PathBuf,
    #[arg(long)]
    report_out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[command(flatten)]
    fit: FitArgs,
    #[arg(long, default_value_t = 100)]
    resolution: usize,
    /// x range as "min,max" (default: data extent plus 10%).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    x_range: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    y_range: Option<Vec<f64>>,
    #[arg(long)]
    out: PathBuf,
    /// Optional grayscale heatmap (binary PGM).
    #[arg(long)]
    pgm: Option<PathBuf>,
}

#[derive(Args)]
struct ScalabilityArgs {
    #[arg(long, value_delimiter = ',', default_value = "iser-a,iser-s")]
    methods: Vec<Method>,
    #[arg(long, value_delimiter = ',', default_value = "1000,10000")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "8")]
    dims: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 16)]
    psi: usize,
    #[arg(long, default_value_t = 200)]
    t: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
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
    let execution = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let result = match cli.command {
        Command::Synth(args) => synth(args),
        Command::Detect(args) => detect(args, execution),
        Command::Bench(args) => bench(args, execution),
        Command::Grid(args) => grid(args, execution),
        Command::Scalability(args) => scalability(args, execution),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::InvalidParameter(_) | Error::UnknownMethod(_) => ExitCode::from(1),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn synth(args: SynthArgs) -> iser::Result<()> {
    let spec = SynthSpec::new(args.kind, args.n_normal, args.seed)
        .with_anomalies(
            args.n_anomaly
                .unwrap_or_else(|| default_anomalies(args.n_normal)),
        )
        .with_noise(args.noise);
    let data = generate(&spec)?;
    write_csv(&data, &args.out)
}

fn load(path: &Path, label_col: Option<&str>) -> iser::Result<Dataset> {
    match label_col {
        Some(name) => ingest_csv(path, Some(name)),
        None => {
            let has_default = read_csv_header(path)?
                .iter()
                .any(|h| h == DEFAULT_LABEL_COLUMN);
            ingest_csv(path, has_default.then_some(DEFAULT_LABEL_COLUMN))
        }
    }
}

fn fit(args: &FitArgs, execution: Execution) -> iser::Result<(Dataset, Detector)> {
    let data = load(&args.input, args.label_col.as_deref())?;
    let params = DetectorParams::new(args.psi, args.t, args.seed)
        .with_trees(args.trees)
        .with_subsample(args.subsample)
        .with_normalize(args.normalize)
        .with_execution(execution);
    let detector = Detector::fit(args.method, &data, &params)?;
    Ok((data, detector))
}

fn detect(args: DetectArgs, execution: Execution) -> iser::Result<()> {
    let (data, detector) = fit(&args.fit, execution)?;
    let scores = detector.score_dataset(&data, execution)?.scores;
    let metrics = data
        .labels()
        .map(|labels| DetectionMetrics::compute(&scores, labels))
        .transpose()?;
    let metrics_json = metrics
        .map(|m| serde_json::to_string_pretty(&m))
        .transpose()?;

    write_file(
        &args.scores_out,
        scores_csv(&scores, data.labels()).as_bytes(),
    )?;
    if let Some(json) = metrics_json {
        let path = args
            .metrics_out
            .unwrap_or_else(|| args.scores_out.with_extension("metrics.json"));
        write_file(&path, json.as_bytes())?;
        println!("{}", json);
    }
    Ok(())
}

fn bench(args: BenchArgs, execution: Execution) -> iser::Result<()> {
    let datasets = args
        .datasets
        .iter()
        .map(|path| {
            let name = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| path.display().to_string());
            Ok(BenchDataset {
                name,
                data: ingest_csv(path, Some(&args.label_col))?,
            })
        })
        .collect::<iser::Result<Vec<_>>>()?;
    let plan = BenchPlan {
        methods: args.methods,
        datasets,
        repeats: args.repeats,
        psi_grid: args.psi_grid,
        t: args.t,
        n_trees: args.trees,
        seed: args.seed,
        normalize: args.normalize,
        execution,
    };
    let outcome = run_bench(&plan)?;
    let report = outcome.report_json()?;
    write_file(&args.results_out, outcome.results_csv().as_bytes())?;
    write_file(&args.report_out, report.as_bytes())
}

fn range(v: Option<Vec<f64>>) -> iser::Result<Option<(f64, f64)>> {
    match v.as_deref() {
        None => Ok(None),
        Some(&[lo, hi]) => Ok(Some((lo, hi))),
        Some(_) => Err(Error::InvalidParameter(
            "ranges are given as min,max".into(),
        )),
    }
}

fn grid(args: GridArgs, execution: Execution) -> iser::Result<()> {
    let (data, detector) = fit(&args.fit, execution)?;
    let mut spec = GridSpec::around(&data, args.resolution, 0.1)?;
    if let Some(x) = range(args.x_range)? {
        spec.x_range = x;
    }
    if let Some(y) = range(args.y_range)? {
        spec.y_range = y;
    }
    let cells = score_grid(&detector, &spec, execution)?;
    let image = args
        .pgm
        .as_ref()
        .map(|_| heatmap_pgm(&cells, spec.resolution))
        .transpose()?;
    write_file(&args.out, grid_csv(&cells).as_bytes())?;
    if let (Some(path), Some(bytes)) = (args.pgm, image) {
        write_file(&path, &bytes)?;
    }
    Ok(())
}

fn scalability(args: ScalabilityArgs, execution: Execution) -> iser::Result<()> {
    let plan = ScalabilityPlan {
        methods: args.methods,
        sizes: args.sizes,
        dims: args.dims,
        repeats: args.repeats,
        psi: args.psi,
        t: args.t,
        seed: args.seed,
        execution,
    };
    let rows = run_scalability(&plan)?;
    write_file(&args.out, runtime_csv(&rows).as_bytes())
}
