//! Implementations of the `ace` subcommands.

use std::path::{Path, PathBuf};

use ace_core::estimators::{ace_estimate, split_indices, AceConfig};
use ace_core::nuisance::{lambda_cv, LassoConfig, LassoDesign};
use ace_core::simulate::{gen_dataset, run_monte_carlo, suite_plan, sweep, DgpConfig, Scale, Suite};
use ace_core::LinearPredictor;
use serde::Serialize;

use crate::dataio::{load_dataset, write_dataset};
use crate::error::{CliError, CliResult};
use crate::output::{
    ensure_dir, write_estimates_csv, write_json, write_report_csv, write_sweep_csv, SweepJson, SweepPointJson,
};
use crate::scenario::ScenarioFile;

/// Run `f` on a rayon pool of `threads` workers, or the global pool.
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match threads {
        None => Ok(f()),
        Some(0) => Err(CliError::Schema("--threads must be >= 1".into())),
        Some(k) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(k)
                .build()
                .map_err(|e| CliError::Schema(format!("thread pool: {e}")))?;
            Ok(pool.install(f))
        }
    }
}

/// `ace simulate`: run a scenario and write `report.csv`, `report.json` and
/// `estimates.csv` into the output directory.
pub fn simulate(scenario: &Path, out: Option<&Path>, threads: Option<usize>) -> CliResult<PathBuf> {
    let file = ScenarioFile::load(scenario)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| file.out.clone())
        .ok_or_else(|| CliError::Schema("no output directory: pass --out or set \"out\" in the scenario".into()))?;
    let cfg = file.to_mc_config();
    let outcome = with_threads(threads, || run_monte_carlo(&cfg))??;
    ensure_dir(&dir)?;
    write_report_csv(&dir.join("report.csv"), &outcome.report)?;
    write_json(&dir.join("report.json"), &outcome.report)?;
    write_estimates_csv(&dir.join("estimates.csv"), &outcome.records)?;
    Ok(dir)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaChoice {
    Theory,
    Fixed(f64),
    CrossValidated(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateArgs {
    pub data: PathBuf,
    pub order: usize,
    pub level: f64,
    pub seed: u64,
    pub lambda: LambdaChoice,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateOutput {
    pub order: usize,
    pub level: f64,
    pub theta_hat: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub denominator: f64,
    /// Residual cumulants `κ̂_1..κ̂_r`.
    pub cumulants: Vec<f64>,
    pub identification_proxy: f64,
    pub n_nuisance: usize,
    pub n_estimation: usize,
    pub lambda_t: f64,
    pub lambda_y: f64,
}

const MIN_ESTIMATE_ROWS: usize = 8;

/// `ace estimate`: fit Lasso nuisances on a seeded half of the file and run
/// ACE on the other half.
pub fn estimate(args: &EstimateArgs) -> CliResult<EstimateOutput> {
    let data = load_dataset(&args.data)?;
    if data.len() < MIN_ESTIMATE_ROWS {
        return Err(CliError::DataShape(format!(
            "{} data rows; need at least {MIN_ESTIMATE_ROWS} (half for nuisances, half for estimation)",
            data.len()
        )));
    }
    let halves = AceConfig {
        seed: args.seed,
        ..AceConfig::default()
    };
    let (nuis_idx, est_idx) = split_indices(data.len(), &halves)?;
    let train = data.select(&nuis_idx);
    let est = data.select(&est_idx);

    let design = LassoDesign::new(train.x.view())?;
    let fit = |y: &ndarray::Array1<f64>| -> CliResult<(LinearPredictor, f64)> {
        let lambda = match args.lambda {
            LambdaChoice::Theory => design.lambda_default(y.view(), 1.0, true)?,
            LambdaChoice::Fixed(l) => l,
            LambdaChoice::CrossValidated(folds) => {
                lambda_cv(train.x.view(), y.view(), &LassoConfig::default(), folds)?
            }
        };
        Ok((design.fit(y.view(), &LassoConfig::with_lambda(lambda))?.predictor, lambda))
    };
    let (g_hat, lambda_t) = fit(&train.t)?;
    let (q_hat, lambda_y) = fit(&train.y)?;

    let config = AceConfig {
        order: args.order,
        seed: args.seed.wrapping_add(1),
        ..AceConfig::default()
    };
    let e = ace_estimate(&est, &g_hat, &q_hat, &config, args.level)?;
    Ok(EstimateOutput {
        order: args.order,
        level: args.level,
        theta_hat: e.theta_hat,
        std_error: e.std_error,
        ci_lo: e.ci.0,
        ci_hi: e.ci.1,
        denominator: e.denominator,
        cumulants: e.cumulants.values[..args.order].to_vec(),
        identification_proxy: e.identification_proxy,
        n_nuisance: train.len(),
        n_estimation: est.len(),
        lambda_t,
        lambda_y,
    })
}

/// `ace generate`: write one synthetic dataset as CSV.
pub fn generate(config: &DgpConfig, out: &Path) -> CliResult<()> {
    let (data, _) = gen_dataset(config)?;
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        ensure_dir(parent)?;
    }
    let file = std::fs::File::create(out).map_err(|e| CliError::io(out, e))?;
    write_dataset(std::io::BufWriter::new(file), &data)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteArgs {
    pub suite: Suite,
    pub scale: Scale,
    pub reps: Option<usize>,
    pub seed: Option<u64>,
}

/// `ace papersuite`: run a preconfigured sweep and write `<suite>.csv` and
/// `<suite>.json`.
pub fn papersuite(args: &SuiteArgs, out: &Path, threads: Option<usize>) -> CliResult<PathBuf> {
    let mut plan = suite_plan(args.suite, args.scale);
    if let Some(reps) = args.reps {
        plan.base.reps = reps;
    }
    if let Some(seed) = args.seed {
        plan.base.base_seed = seed;
    }
    let points = with_threads(threads, || sweep(plan.axis, &plan.grid, &plan.base))??;
    ensure_dir(out)?;
    let csv_path = out.join(format!("{}.csv", plan.name));
    write_sweep_csv(&csv_path, plan.axis, &points)?;
    let json = SweepJson {
        suite: plan.name,
        axis: plan.axis,
        base_seed: plan.base.base_seed,
        reps: plan.base.reps,
        points: points
            .iter()
            .map(|p| SweepPointJson {
                value: p.value,
                report: &p.outcome.report,
            })
            .collect(),
    };
    write_json(&out.join(format!("{}.json", plan.name)), &json)?;
    Ok(csv_path)
}
