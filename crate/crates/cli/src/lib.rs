//! Command-line front end: argument parsing and dispatch to the `lars` crate.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lars::io::{self, IoError, PathSummary, Units};
use lars::preprocess::{binary_columns, to_original_units};
use lars::select::{self, BootstrapConfig, DfRule, Resampling, SimulationConfig};
use lars::variants::{active_at, main_effects_first, pairwise_interactions};
use lars::{
    datasets, fit_path, interpolate, quadratic_expand, standardize, FitOptions, LarsError,
    StandardizedDesign, Variant,
};
use serde_json::json;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Debug, Parser)]
#[command(
    name = "lars",
    version,
    about = "Least angle regression, Lasso and Stagewise coefficient paths"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a coefficient path and write one CSV row per vertex.
    Fit(FitArgs),
    /// Cp curve along a path.
    Cp(CpArgs),
    /// Bootstrap degrees of freedom of the k-step fits.
    BootstrapDf(BootstrapArgs),
    /// Prediction simulation on the quadratic expansion.
    Simulate(SimulateArgs),
    /// Coefficients at a given L1 norm.
    Interpolate(InterpolateArgs),
    /// Fit main effects for k steps, then interactions of the active ones on the residual.
    MainEffectsFirst(MainEffectsArgs),
}

#[derive(Debug, Args)]
struct DataArgs {
    /// Input table with a header row.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "Y")]
    response: String,
    /// Add pairwise products and squares of the covariates.
    #[arg(long)]
    quadratic: bool,
    /// Covariate treated as binary (no square term). Detected when omitted.
    #[arg(long = "binary-col")]
    binary_col: Vec<String>,
}

#[derive(Debug, Args)]
struct OptionalDataArgs {
    /// Input table with a header row. Defaults to the bundled diabetes data.
    #[arg(long)]
    input: Option<PathBuf>,
    #[arg(long, default_value = "Y")]
    response: String,
    #[arg(long = "binary-col")]
    binary_col: Vec<String>,
}

#[derive(Debug, Args)]
struct OutputArgs {
    /// Write tables here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print a JSON summary on stdout.
    #[arg(long)]
    json: bool,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum VariantArg {
    Lars,
    Lasso,
    Stagewise,
    PositiveLasso,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Self {
        match v {
            VariantArg::Lars => Variant::Lars,
            VariantArg::Lasso => Variant::Lasso,
            VariantArg::Stagewise => Variant::Stagewise,
            VariantArg::PositiveLasso => Variant::PositiveLasso,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ResamplingArg {
    Normal,
    Residuals,
}

#[derive(Debug, Args)]
struct FitArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "lars")]
    variant: VariantArg,
    #[arg(long)]
    max_steps: Option<usize>,
    #[arg(long)]
    step_limit: Option<usize>,
    #[arg(long)]
    jitter_seed: Option<u64>,
    /// Report coefficients on the standardized scale.
    #[arg(long)]
    standardized: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct CpArgs {
    #[command(flatten)]
    data: DataArgs,
    /// `lars` charges k degrees of freedom at step k; other variants charge the support size.
    #[arg(long, value_enum, default_value = "lars")]
    variant: VariantArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct BootstrapArgs {
    #[command(flatten)]
    data: OptionalDataArgs,
    #[arg(long = "B", default_value_t = 500)]
    replications: usize,
    #[arg(long, default_value_t = 10)]
    groups: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest step; defaults to the number of covariates.
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_enum, default_value = "normal")]
    resampling: ResamplingArg,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    #[command(flatten)]
    data: OptionalDataArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    replications: usize,
    #[arg(long, default_value_t = 40)]
    steps: usize,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct InterpolateArgs {
    #[command(flatten)]
    data: DataArgs,
    #[arg(long, value_enum, default_value = "lasso")]
    variant: VariantArg,
    #[arg(long)]
    t: f64,
    #[arg(long)]
    standardized: bool,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Debug, Args)]
struct MainEffectsArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, default_value = "Y")]
    response: String,
    /// Number of main-effect LARS steps before looking at interactions.
    #[arg(long)]
    k: usize,
    #[arg(long)]
    standardized: bool,
    #[command(flatten)]
    output: OutputArgs,
}

/// Raw covariates and response as read, with the binary columns resolved.
struct Loaded {
    columns: ndarray::Array2<f64>,
    response: ndarray::Array1<f64>,
    names: Vec<String>,
    binary: Vec<usize>,
}

fn binary_indices(
    names: &[String],
    requested: &[String],
    columns: ndarray::ArrayView2<'_, f64>,
) -> Result<Vec<usize>, IoError> {
    if requested.is_empty() {
        return Ok(binary_columns(columns));
    }
    requested
        .iter()
        .map(|r| {
            names.iter().position(|n| n == r).ok_or_else(|| {
                IoError::Model(LarsError::InvalidArgument(format!(
                    "unknown binary column `{r}`"
                )))
            })
        })
        .collect()
}

fn load(input: Option<&PathBuf>, response: &str, binary: &[String]) -> Result<Loaded, IoError> {
    let (columns, response, names) = match input {
        Some(path) => {
            let data = io::read_csv(path, response)?;
            (data.columns, data.response, data.names)
        }
        None => datasets::diabetes(),
    };
    let binary = binary_indices(&names, binary, columns.view())?;
    Ok(Loaded {
        columns,
        response,
        names,
        binary,
    })
}

fn design(args: &DataArgs) -> Result<StandardizedDesign, IoError> {
    let raw = load(Some(&args.input), &args.response, &args.binary_col)?;
    if args.quadratic {
        let (q, labels) = quadratic_expand(raw.columns.view(), &raw.names, &raw.binary)?;
        Ok(standardize(q.view(), raw.response.view(), &labels)?)
    } else {
        Ok(standardize(
            raw.columns.view(),
            raw.response.view(),
            &raw.names,
        )?)
    }
}

fn units(standardized: bool) -> Units {
    if standardized {
        Units::Standardized
    } else {
        Units::Original
    }
}

/// Sends `table` to `--out` or, when no JSON is requested, to stdout.
fn emit(
    output: &OutputArgs,
    table: &str,
    summary: serde_json::Value,
    stdout: &mut dyn Write,
) -> Result<(), IoError> {
    match &output.out {
        Some(path) => std::fs::write(path, table)?,
        None if !output.json => stdout.write_all(table.as_bytes())?,
        None => {}
    }
    if output.json {
        let text = serde_json::to_string_pretty(&summary).map_err(std::io::Error::other)?;
        writeln!(stdout, "{text}")?;
    }
    Ok(())
}

fn fit(args: &FitArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let d = design(&args.data)?;
    let options = FitOptions {
        max_steps: args.max_steps,
        step_limit: args.step_limit,
        jitter_seed: args.jitter_seed,
        use_gram: None,
    };
    let path = fit_path(&d, args.variant.into(), &options)?;
    let table = io::write_path_csv(&path, &d, units(args.standardized))?;
    let summary = PathSummary::new(&path, d.names(), None);
    emit(
        &args.output,
        &table,
        serde_json::to_value(summary).map_err(std::io::Error::other)?,
        stdout,
    )
}

fn cp(args: &CpArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let d = design(&args.data)?;
    let variant: Variant = args.variant.into();
    let path = fit_path(&d, variant, &FitOptions::default())?;
    let rule = if variant == Variant::Lars {
        DfRule::SimpleK
    } else {
        DfRule::SupportSize
    };
    let report = select::cp_curve(&path, select::sigma2_full_ols(&d)?, &rule)?;
    let summary = PathSummary::new(&path, d.names(), Some(report.argmin_k));
    emit(
        &args.output,
        &io::write_cp_csv(&report),
        serde_json::to_value(summary).map_err(std::io::Error::other)?,
        stdout,
    )
}

fn bootstrap(args: &BootstrapArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let raw = load(
        args.data.input.as_ref(),
        &args.data.response,
        &args.data.binary_col,
    )?;
    let d = standardize(raw.columns.view(), raw.response.view(), &raw.names)?;
    let config = BootstrapConfig {
        replications: args.replications,
        groups: args.groups,
        seed: args.seed,
        resampling: match args.resampling {
            ResamplingArg::Normal => Resampling::Normal,
            ResamplingArg::Residuals => Resampling::Residuals,
        },
    };
    let k_max = args.steps.unwrap_or(d.m());
    let estimates = select::bootstrap_df(&d, |dd| select::lars_fits(dd, k_max), &config)?;
    let summary = json!({
        "replications": config.replications,
        "groups": config.groups,
        "seed": config.seed,
        "df_hat": estimates.iter().map(|e| e.df_hat).collect::<Vec<_>>(),
        "ci_low": estimates.iter().map(|e| e.ci_low).collect::<Vec<_>>(),
        "ci_high": estimates.iter().map(|e| e.ci_high).collect::<Vec<_>>(),
    });
    emit(&args.output, &io::write_df_csv(&estimates), summary, stdout)
}

fn simulate(args: &SimulateArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let raw = load(
        args.data.input.as_ref(),
        &args.data.response,
        &args.data.binary_col,
    )?;
    let config = SimulationConfig {
        seed: args.seed,
        replications: args.replications,
        steps: args.steps,
        ..SimulationConfig::default()
    };
    let result = select::run_simulation_study(
        raw.columns.view(),
        raw.response.view(),
        &raw.names,
        &raw.binary,
        &config,
    )?;
    let peaks: serde_json::Map<String, serde_json::Value> = result
        .curves
        .iter()
        .map(|c| {
            let (k, pe) = c.peak();
            (c.method.to_string(), json!({ "step": k, "pe": pe }))
        })
        .collect();
    let summary = json!({ "true_r2": result.true_r2, "peaks": peaks });
    emit(
        &args.output,
        &io::write_simulation_csv(&result),
        summary,
        stdout,
    )
}

fn interpolate_cmd(args: &InterpolateArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let d = design(&args.data)?;
    let path = fit_path(&d, args.variant.into(), &FitOptions::default())?;
    let beta = interpolate(&path, args.t)?;
    let coefficients = if args.standardized {
        beta.to_vec()
    } else {
        to_original_units(&d, beta.view())?.0.to_vec()
    };
    let mut table = String::from("index,variable,coefficient\n");
    for (j, (name, c)) in d.names().iter().zip(&coefficients).enumerate() {
        table.push_str(&format!("{},{name},{}\n", j + 1, io::format_float(*c)));
    }
    let support: Vec<&String> = d
        .names()
        .iter()
        .zip(&coefficients)
        .filter(|(_, c)| **c != 0.0)
        .map(|(n, _)| n)
        .collect();
    let summary = json!({
        "variant": path.variant.to_string(),
        "t": args.t,
        "t_max": path.t_max(),
        "support": support,
        "coefficients": coefficients,
    });
    emit(&args.output, &table, summary, stdout)
}

fn main_effects(args: &MainEffectsArgs, stdout: &mut dyn Write) -> Result<(), IoError> {
    let raw = load(Some(&args.input), &args.response, &[])?;
    let d = standardize(raw.columns.view(), raw.response.view(), &raw.names)?;
    let first = fit_path(&d, Variant::Lars, &FitOptions::default())?;
    let active = active_at(&first, args.k);
    let (extra, labels) = pairwise_interactions(raw.columns.view(), &raw.names, &active)?;
    let (second, path) = main_effects_first(&d, &first, args.k, extra.view(), &labels)?;
    let table = io::write_path_csv(&path, &second, units(args.standardized))?;
    let mut summary = serde_json::to_value(PathSummary::new(&path, second.names(), None))
        .map_err(std::io::Error::other)?;
    summary["main_effects"] = json!(active
        .iter()
        .map(|&j| raw.names[j].clone())
        .collect::<Vec<_>>());
    emit(&args.output, &table, summary, stdout)
}

/// Runs the CLI on `argv` (including the program name) and returns the exit
/// code.
pub fn run<I, T>(argv: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{}", e.render());
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match &cli.command {
        Command::Fit(a) => fit(a, stdout),
        Command::Cp(a) => cp(a, stdout),
        Command::BootstrapDf(a) => bootstrap(a, stdout),
        Command::Simulate(a) => simulate(a, stdout),
        Command::Interpolate(a) => interpolate_cmd(a, stdout),
        Command::MainEffectsFirst(a) => main_effects(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_DATA
        }
    }
}
