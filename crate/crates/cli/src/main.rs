use std::fs::{self, File};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use sustainloop::harness::series::write_series_csv;
use sustainloop::harness::{
    default_drift, generate_synthetic, inject_drift, load_series_csv, run_experiment,
    write_run_artifacts, Approach, DriftSegment, ExperimentPlan,
    SummaryRow, SyntheticParams,
};
use sustainloop::knowledge::{load_decision_map, SustainabilityGoals};
use sustainloop::report::{compare, render_chart_svg, write_chart_data, write_report, ResultSet};
use sustainloop::Error;

#[derive(Parser)]
#[command(name = "sustainloop", version, about = "Energy-aware self-adaptive forecasting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic traffic-flow series.
    GenData {
        #[arg(long, default_value_t = 15_940)]
        length: usize,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        /// Innovation standard deviation of the AR(1) noise.
        #[arg(long, default_value_t = 8.0)]
        noise: f64,
        #[arg(long)]
        out: PathBuf,
        /// Resolve a relative `--out` under this directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Reject lengths shorter than the default train/validation/test split.
        #[arg(long)]
        check_split: bool,
    },
    /// Apply scale-and-shift drift to index ranges of a series.
    InjectDrift {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        /// Comma-separated half-open ranges `start:end` in series indices.
        /// Defaults to the double-drift scenario.
        #[arg(long, value_parser = parse_segment, value_delimiter = ',')]
        segments: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 1.4)]
        scale: f64,
        #[arg(long, default_value_t = 30.0)]
        shift: f64,
    },
    /// Run one approach for several seeded repetitions.
    Run {
        #[arg(long, value_parser = parse_approach)]
        approach: Approach,
        #[arg(long)]
        config: Option<PathBuf>,
        /// Series CSV. Defaults to a synthetic series seeded from the config.
        #[arg(long)]
        data: Option<PathBuf>,
        /// Drift applied to the test window. Defaults to `default` for synthetic
        /// data and `none` for `--data`.
        #[arg(long, value_enum)]
        drift: Option<DriftMode>,
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        #[arg(long)]
        out_dir: PathBuf,
        /// Record wall-clock inference time (makes summaries non-reproducible).
        #[arg(long)]
        measure_wall: bool,
    },
    /// Compare result sets produced by `run`.
    Compare {
        /// `<approach>_summary.csv` files.
        #[arg(long, num_args = 1.., required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out_dir: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum DriftMode {
    None,
    Default,
}

fn parse_approach(s: &str) -> Result<Approach, String> {
    s.parse::<Approach>().map_err(|e| e.to_string())
}

fn parse_segment(part: &str) -> Result<(usize, usize), String> {
    let (a, b) = part
        .split_once(':')
        .ok_or_else(|| format!("segment `{part}` is not start:end"))?;
    let a = a.trim().parse().map_err(|_| format!("bad start in `{part}`"))?;
    let b = b.trim().parse().map_err(|_| format!("bad end in `{part}`"))?;
    Ok((a, b))
}

/// Failure carrying its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::SeedMismatch => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Error::from(e).into()
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn dispatch(command: Command) -> Result<(), Failure> {
    match command {
        Command::GenData {
            length,
            seed,
            noise,
            out,
            out_dir,
            check_split,
        } => gen_data(length, seed, noise, &resolve(out, out_dir), check_split),
        Command::InjectDrift {
            input,
            out,
            out_dir,
            segments,
            scale,
            shift,
        } => inject(&input, &resolve(out, out_dir), segments, scale, shift),
        Command::Run {
            approach,
            config,
            data,
            drift,
            repetitions,
            out_dir,
            measure_wall,
        } => run(approach, config, data, drift, repetitions, &out_dir, measure_wall),
        Command::Compare {
            inputs,
            config,
            out_dir,
        } => cmd_compare(&inputs, config, &out_dir),
    }
}

fn resolve(out: PathBuf, out_dir: Option<PathBuf>) -> PathBuf {
    match out_dir {
        Some(dir) if out.is_relative() => dir.join(out),
        _ => out,
    }
}

fn create_parent(path: &Path) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)?;
    }
    Ok(())
}

fn load_goals(config: Option<PathBuf>) -> Result<SustainabilityGoals, Failure> {
    match config {
        Some(path) => load_decision_map(&path).map_err(|e| Failure::usage(e.to_string())),
        None => Ok(SustainabilityGoals::default()),
    }
}

fn gen_data(length: usize, seed: u64, noise: f64, out: &Path, check_split: bool) -> Result<(), Failure> {
    let minimum = ExperimentPlan::new(Approach::HarmonE, SustainabilityGoals::default())
        .split
        .total();
    if check_split && length < minimum {
        return Err(Failure::usage(format!(
            "length {length} is below the split minimum of {minimum}"
        )));
    }
    if !(noise.is_finite() && noise >= 0.0) {
        return Err(Failure::usage("--noise must be finite and non-negative"));
    }
    let params = SyntheticParams {
        sigma: noise,
        ..SyntheticParams::default()
    };
    let series = generate_synthetic(&params, seed, length);
    create_parent(out)?;
    write_series_csv(&series.readings, File::create(out)?)?;
    println!("wrote {} readings to {}", length, out.display());
    Ok(())
}

fn inject(
    input: &Path,
    out: &Path,
    segments: Vec<(usize, usize)>,
    scale: f64,
    shift: f64,
) -> Result<(), Failure> {
    let series = load_series_csv(input)?;
    let segments: Vec<DriftSegment> = if segments.is_empty() {
        let offset = ExperimentPlan::new(Approach::HarmonE, SustainabilityGoals::default())
            .split
            .test_start();
        default_drift()
            .into_iter()
            .map(|s| DriftSegment { scale, shift, ..s.offset(offset) })
            .collect()
    } else {
        segments
            .into_iter()
            .map(|(start, end)| DriftSegment {
                start,
                end,
                scale,
                shift,
            })
            .collect()
    };
    let drifted = inject_drift(&series.readings, &segments).map_err(|e| Failure::usage(e.to_string()))?;
    create_parent(out)?;
    write_series_csv(&drifted, File::create(out)?)?;
    println!("wrote {} readings to {}", drifted.len(), out.display());
    Ok(())
}

fn run(
    approach: Approach,
    config: Option<PathBuf>,
    data: Option<PathBuf>,
    drift: Option<DriftMode>,
    repetitions: usize,
    out_dir: &Path,
    measure_wall: bool,
) -> Result<(), Failure> {
    let goals = load_goals(config)?;
    let mut plan = ExperimentPlan::new(approach, goals);
    plan.repetitions = repetitions;
    plan.measure_wall_clock = measure_wall;
    let drift = drift.unwrap_or(if data.is_some() { DriftMode::None } else { DriftMode::Default });
    if matches!(drift, DriftMode::None) {
        plan.drift.clear();
    }
    plan.validate().map_err(|e| Failure::usage(e.to_string()))?;

    let clean = match data {
        Some(path) => load_series_csv(&path)?.readings,
        None => generate_synthetic(&SyntheticParams::default(), plan.goals.seed, plan.split.total()).readings,
    };
    let results = run_experiment(&clean, &plan)?;
    write_run_artifacts(out_dir, &results)?;
    for r in &results {
        println!("{}", SummaryRow::from(r).to_line());
    }
    Ok(())
}

fn cmd_compare(inputs: &[PathBuf], config: Option<PathBuf>, out_dir: &Path) -> Result<(), Failure> {
    if inputs.len() < 2 {
        return Err(Failure::usage("compare needs at least two result sets"));
    }
    let goals = load_goals(config)?;
    let sets = inputs
        .iter()
        .map(|p| ResultSet::load(p))
        .collect::<Result<Vec<_>, _>>()?;
    let report = compare(&sets)?;

    fs::create_dir_all(out_dir)?;
    write_report(&report, File::create(out_dir.join("comparison.csv"))?)?;
    write_chart_data(&sets, File::create(out_dir.join("cumulative_energy.csv"))?)?;
    fs::write(out_dir.join("cumulative_energy.svg"), render_chart_svg(&sets, goals.e_ref))?;

    for r in &report.rows {
        println!(
            "{},energy={},r2={},energy_ratio={},r2_ratio={},loop_share={}",
            r.approach, r.mean_energy, r.mean_r2, r.energy_ratio, r.r2_ratio, r.loop_energy_share
        );
    }
    Ok(())
}
