//! Synthetic data-generating processes and the Monte Carlo harness.
//!
//! The default scenario is the demand-estimation design: standard-normal
//! covariates, sparse linear nuisances on a shared random support, a
//! four-point discount distribution for the treatment noise and uniform
//! outcome noise on `[−3, 3]`. The treatment may be perturbed to
//! `T = g(X) + (1 + ξ X₁) η` to break independence of noise and covariates.
//!
//! Every replicate draws from its own ChaCha stream derived from the base
//! seed and the replicate index, so results do not depend on thread count
//! or estimator order.

use std::fmt;
use std::str::FromStr;

use ndarray::{Array1, Array2};
use rand::distr::weighted::WeightedIndex;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, LinearPredictor};
use crate::error::{invalid, AceError, Result};
use crate::estimators::{ace_estimate, dml_inference, AceConfig};
use crate::nuisance::{lambda_cv, oracle_nuisance, LassoConfig, LassoDesign, PerturbationMode};

/// Support points of the demand-discount noise.
pub const DEMAND_POINTS: [f64; 4] = [0.5, 0.0, -1.5, -3.5];
/// Probabilities of [`DEMAND_POINTS`].
pub const DEMAND_PROBS: [f64; 4] = [0.65, 0.2, 0.1, 0.05];
/// Outcome noise is uniform on `[−OUTCOME_NOISE_HALF_WIDTH, OUTCOME_NOISE_HALF_WIDTH]`.
pub const OUTCOME_NOISE_HALF_WIDTH: f64 = 3.0;

/// Treatment-noise law. All variants have mean zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NoiseSpec {
    DemandDiscrete,
    Gaussian { sigma: f64 },
    /// Uniform on `[−a, a]`.
    Uniform { a: f64 },
    Custom { points: Vec<f64>, probs: Vec<f64> },
}

impl NoiseSpec {
    /// Points and probabilities of a discrete law.
    fn discrete(&self) -> Option<(Vec<f64>, Vec<f64>)> {
        match self {
            NoiseSpec::DemandDiscrete => Some((DEMAND_POINTS.to_vec(), DEMAND_PROBS.to_vec())),
            NoiseSpec::Custom { points, probs } => Some((points.clone(), probs.clone())),
            _ => None,
        }
    }

    fn validate(&self) -> Result<()> {
        match self {
            NoiseSpec::Gaussian { sigma } if !(*sigma >= 0.0 && sigma.is_finite()) => {
                Err(invalid(format!("noise.sigma must be finite and >= 0, got {sigma}")))
            }
            NoiseSpec::Uniform { a } if !(*a >= 0.0 && a.is_finite()) => {
                Err(invalid(format!("noise.a must be finite and >= 0, got {a}")))
            }
            NoiseSpec::Custom { points, probs } => {
                if points.is_empty() || points.len() != probs.len() {
                    return Err(invalid("noise.points and noise.probs must be non-empty and of equal length"));
                }
                if probs.iter().any(|p| p.is_nan() || *p < 0.0) || points.iter().any(|x| !x.is_finite()) {
                    return Err(invalid("noise.probs must be >= 0 and noise.points finite"));
                }
                let total: f64 = probs.iter().sum();
                if (total - 1.0).abs() > 1e-12 {
                    return Err(invalid(format!("noise.probs sum to {total}, not 1")));
                }
                let mean: f64 = points.iter().zip(probs).map(|(x, p)| x * p).sum();
                if mean.abs() > 1e-12 {
                    return Err(invalid(format!("noise must have mean zero, got {mean}")));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Exact raw moments `E[η^k]`, `k = 1..=max_order`.
    pub fn exact_moments(&self, max_order: usize) -> Vec<f64> {
        (1..=max_order as i32)
            .map(|k| match self {
                NoiseSpec::Gaussian { sigma } => {
                    if k % 2 == 1 {
                        0.0
                    } else {
                        // (k − 1)!! σ^k
                        let dfact: f64 = (1..k).step_by(2).map(f64::from).product();
                        dfact * sigma.powi(k)
                    }
                }
                NoiseSpec::Uniform { a } => {
                    if k % 2 == 1 {
                        0.0
                    } else {
                        a.powi(k) / f64::from(k + 1)
                    }
                }
                _ => {
                    let (pts, probs) = self.discrete().expect("discrete law");
                    pts.iter().zip(&probs).map(|(x, p)| p * x.powi(k)).sum()
                }
            })
            .collect()
    }
}

enum NoiseSampler {
    Discrete { points: Vec<f64>, index: WeightedIndex<f64> },
    Gaussian(f64),
    Uniform(f64),
}

impl NoiseSampler {
    fn new(spec: &NoiseSpec) -> Result<Self> {
        Ok(match spec {
            NoiseSpec::Gaussian { sigma } => NoiseSampler::Gaussian(*sigma),
            NoiseSpec::Uniform { a } => NoiseSampler::Uniform(*a),
            _ => {
                let (points, probs) = spec.discrete().expect("discrete law");
                let index = WeightedIndex::new(&probs).map_err(|e| invalid(format!("noise.probs: {e}")))?;
                NoiseSampler::Discrete { points, index }
            }
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            NoiseSampler::Discrete { points, index } => points[index.sample(rng)],
            NoiseSampler::Gaussian(sigma) => sigma * rng.sample::<f64, _>(StandardNormal),
            NoiseSampler::Uniform(a) => a * (2.0 * rng.random::<f64>() - 1.0),
        }
    }
}

fn default_p() -> usize {
    100
}
fn default_s() -> usize {
    40
}
fn default_theta0() -> f64 {
    1.0
}
fn default_coef_scale() -> f64 {
    1.0
}

/// Parameters of the synthetic design.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DgpConfig {
    pub n: usize,
    #[serde(default = "default_p")]
    pub p: usize,
    /// Support size shared by the treatment and outcome nuisances.
    #[serde(default = "default_s")]
    pub s: usize,
    #[serde(default = "default_theta0")]
    pub theta0: f64,
    pub noise: NoiseSpec,
    /// Strength of the covariate-dependent noise scaling.
    #[serde(default)]
    pub xi: f64,
    /// Value of every non-zero nuisance coefficient.
    #[serde(default = "default_coef_scale")]
    pub coef_scale: f64,
    /// Seeds the support draw (and the data for [`gen_dataset`]).
    #[serde(default)]
    pub seed: u64,
}

impl DgpConfig {
    /// The demand-estimation scenario with `n` observations.
    pub fn demand(n: usize) -> Self {
        Self {
            n,
            p: default_p(),
            s: default_s(),
            theta0: default_theta0(),
            noise: NoiseSpec::DemandDiscrete,
            xi: 0.0,
            coef_scale: default_coef_scale(),
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(invalid("n must be >= 1"));
        }
        if self.p == 0 {
            return Err(invalid("p must be >= 1"));
        }
        if self.s > self.p {
            return Err(invalid(format!("s = {} exceeds p = {}", self.s, self.p)));
        }
        for (name, v) in [("theta0", self.theta0), ("xi", self.xi), ("coef_scale", self.coef_scale)] {
            if !v.is_finite() {
                return Err(invalid(format!("{name} must be finite")));
            }
        }
        self.noise.validate()
    }
}

/// Population nuisances of a design.
#[derive(Debug, Clone, PartialEq)]
pub struct Truth {
    pub theta0: f64,
    /// `E[T | X]`.
    pub g0: LinearPredictor,
    /// Direct covariate effect on the outcome.
    pub f0: LinearPredictor,
    /// `E[Y | X] = θ₀ g₀ + f₀`.
    pub q0: LinearPredictor,
    pub support: Vec<usize>,
}

const SUPPORT_STREAM: u64 = u64::MAX;

/// A design with its fixed truth, ready to draw samples.
pub struct Dgp {
    config: DgpConfig,
    truth: Truth,
    noise: NoiseSampler,
}

impl Dgp {
    pub fn new(config: DgpConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(SUPPORT_STREAM);
        let mut support = rand::seq::index::sample(&mut rng, config.p, config.s).into_vec();
        support.sort_unstable();

        let mut coefs = Array1::zeros(config.p);
        for &j in &support {
            coefs[j] = config.coef_scale;
        }
        let g0 = LinearPredictor::new(0.0, coefs.clone());
        let f0 = LinearPredictor::new(0.0, coefs.clone());
        let q0 = LinearPredictor::new(0.0, &coefs * config.theta0 + &coefs);
        let noise = NoiseSampler::new(&config.noise)?;
        Ok(Self {
            truth: Truth {
                theta0: config.theta0,
                g0,
                f0,
                q0,
                support,
            },
            config,
            noise,
        })
    }

    pub fn truth(&self) -> &Truth {
        &self.truth
    }

    pub fn config(&self) -> &DgpConfig {
        &self.config
    }

    /// Draw `n` observations. Covariates, then treatment noise, then outcome
    /// noise are drawn in that order, so `ξ` does not change any draw.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Dataset {
        let p = self.config.p;
        let x = Array2::from_shape_simple_fn((n, p), || rng.sample::<f64, _>(StandardNormal));
        let eta = Array1::from_shape_simple_fn(n, || self.noise.sample(rng));
        let eps = Array1::from_shape_simple_fn(n, || {
            OUTCOME_NOISE_HALF_WIDTH * (2.0 * rng.random::<f64>() - 1.0)
        });
        let g = x.dot(&self.truth.g0.coefficients);
        let f = x.dot(&self.truth.f0.coefficients);
        let xi = self.config.xi;
        let t = Array1::from_shape_fn(n, |i| g[i] + (1.0 + xi * x[[i, 0]]) * eta[i]);
        let y = &t * self.config.theta0 + &f + &eps;
        Dataset { x, t, y }
    }
}

/// One dataset of `config.n` rows with the design's truth, deterministic in
/// `config.seed`.
pub fn gen_dataset(config: &DgpConfig) -> Result<(Dataset, Truth)> {
    let dgp = Dgp::new(config.clone())?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let data = dgp.sample(config.n, &mut rng);
    Ok((data, dgp.truth.clone()))
}

/// An estimator evaluated by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EstimatorSpec {
    Dml,
    Ace(usize),
}

impl fmt::Display for EstimatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EstimatorSpec::Dml => write!(f, "dml"),
            EstimatorSpec::Ace(r) => write!(f, "ace{r}"),
        }
    }
}

impl FromStr for EstimatorSpec {
    type Err = AceError;

    fn from_str(s: &str) -> Result<Self> {
        if s == "dml" {
            return Ok(EstimatorSpec::Dml);
        }
        s.strip_prefix("ace")
            .and_then(|r| r.parse::<usize>().ok())
            .filter(|r| (1..=crate::jpoly::MAX_ORDER).contains(r))
            .map(EstimatorSpec::Ace)
            .ok_or_else(|| invalid(format!("unknown estimator {s:?} (expected \"dml\" or \"ace1\"..\"ace8\")")))
    }
}

impl Serialize for EstimatorSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EstimatorSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// How the Lasso penalty is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum LambdaRule {
    /// `c · σ̂ · sqrt(2 ln p / n)`.
    Theory { c: f64 },
    Fixed { lambda: f64 },
    CrossValidated { folds: usize },
}

impl Default for LambdaRule {
    fn default() -> Self {
        LambdaRule::Theory { c: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum NuisancePolicy {
    Lasso {
        #[serde(default)]
        lambda: LambdaRule,
    },
    /// Truth perturbed to `L²` errors `eps_g` (treatment) and `eps_q`
    /// (outcome).
    Oracle {
        eps_g: f64,
        eps_q: f64,
        #[serde(default = "default_mode")]
        mode: PerturbationMode,
    },
}

fn default_mode() -> PerturbationMode {
    PerturbationMode::CoefficientInflation
}

impl Default for NuisancePolicy {
    fn default() -> Self {
        NuisancePolicy::Lasso {
            lambda: LambdaRule::default(),
        }
    }
}

/// Where first-stage nuisances are trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum NuisanceSampling {
    /// A fresh independent sample of the same size.
    #[default]
    Auxiliary,
    /// The first third of a single sample; the estimators see the rest.
    ThreeWay,
}

/// A full Monte Carlo experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub dgp: DgpConfig,
    pub estimators: Vec<EstimatorSpec>,
    pub reps: usize,
    pub nuisance: NuisancePolicy,
    pub sampling: NuisanceSampling,
    pub base_seed: u64,
    pub level: f64,
    /// Split settings for ACE; `order` and `seed` are set per estimator and
    /// replicate.
    pub ace: AceConfig,
}

impl McConfig {
    pub fn new(dgp: DgpConfig, estimators: Vec<EstimatorSpec>, reps: usize) -> Self {
        Self {
            dgp,
            estimators,
            reps,
            nuisance: NuisancePolicy::default(),
            sampling: NuisanceSampling::default(),
            base_seed: 0,
            level: 0.95,
            ace: AceConfig::default(),
        }
    }
}

/// One estimator on one replicate.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicateRecord {
    pub replicate: usize,
    pub estimator: EstimatorSpec,
    pub theta_hat: f64,
    pub std_error: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub covered: bool,
    /// Set when the estimator failed; the numeric fields are then NaN.
    pub failure: Option<String>,
}

impl ReplicateRecord {
    fn failed(replicate: usize, estimator: EstimatorSpec, err: &AceError) -> Self {
        Self {
            replicate,
            estimator,
            theta_hat: f64::NAN,
            std_error: f64::NAN,
            ci_lo: f64::NAN,
            ci_hi: f64::NAN,
            covered: false,
            failure: Some(err.to_string()),
        }
    }
}

/// Aggregates for one estimator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McRow {
    pub label: String,
    pub rmse: f64,
    pub bias: f64,
    pub sd: f64,
    pub coverage: f64,
    pub mean_ci_width: f64,
    /// Replicates attempted.
    pub replicates: usize,
    /// Replicates excluded because the estimator failed.
    pub failures: usize,
    /// More than 1% of replicates failed.
    pub excessive_failures: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McReport {
    pub theta0: f64,
    pub n: usize,
    pub rows: Vec<McRow>,
}

impl McReport {
    pub fn row(&self, spec: EstimatorSpec) -> Option<&McRow> {
        let label = spec.to_string();
        self.rows.iter().find(|r| r.label == label)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct McOutcome {
    pub report: McReport,
    /// Replicate-major, estimators in configuration order.
    pub records: Vec<ReplicateRecord>,
}

mod purpose {
    pub const NUISANCE_SAMPLE: u64 = 0;
    pub const ESTIMATION_SAMPLE: u64 = 1;
    pub const ORACLE: u64 = 2;
    pub const SPLIT: u64 = 3;
}

/// Independent stream for `(replicate, purpose)` under `base_seed`.
pub fn replicate_rng(base_seed: u64, replicate: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(((replicate as u64) << 3) | purpose);
    rng
}

fn fit_lasso_pair(
    train: &Dataset,
    rule: LambdaRule,
) -> Result<(LinearPredictor, LinearPredictor)> {
    let design = LassoDesign::new(train.x.view())?;
    let fit = |y: &Array1<f64>| -> Result<LinearPredictor> {
        let lambda = match rule {
            LambdaRule::Theory { c } => design.lambda_default(y.view(), c, true)?,
            LambdaRule::Fixed { lambda } => lambda,
            LambdaRule::CrossValidated { folds } => {
                lambda_cv(train.x.view(), y.view(), &LassoConfig::default(), folds)?
            }
        };
        Ok(design.fit(y.view(), &LassoConfig::with_lambda(lambda))?.predictor)
    };
    Ok((fit(&train.t)?, fit(&train.y)?))
}

fn run_replicate(dgp: &Dgp, config: &McConfig, k: usize) -> Vec<ReplicateRecord> {
    let n = config.dgp.n;
    let (train, data) = match config.sampling {
        NuisanceSampling::Auxiliary => {
            let train = dgp.sample(n, &mut replicate_rng(config.base_seed, k, purpose::NUISANCE_SAMPLE));
            let data = dgp.sample(n, &mut replicate_rng(config.base_seed, k, purpose::ESTIMATION_SAMPLE));
            (train, data)
        }
        NuisanceSampling::ThreeWay => {
            let all = dgp.sample(n, &mut replicate_rng(config.base_seed, k, purpose::ESTIMATION_SAMPLE));
            let cut = n / 3;
            (all.slice_rows(0, cut), all.slice_rows(cut, n))
        }
    };

    let nuisances = match config.nuisance {
        NuisancePolicy::Lasso { lambda } => fit_lasso_pair(&train, lambda),
        NuisancePolicy::Oracle { eps_g, eps_q, mode } => {
            let mut rng = replicate_rng(config.base_seed, k, purpose::ORACLE);
            let truth = dgp.truth();
            oracle_nuisance(&truth.g0, eps_g, mode, rng.next_u64()).and_then(|g| {
                oracle_nuisance(&truth.q0, eps_q, mode, rng.next_u64()).map(|q| (g, q))
            })
        }
    };
    let (g_hat, q_hat) = match nuisances {
        Ok(pair) => pair,
        Err(e) => {
            return config
                .estimators
                .iter()
                .map(|&spec| ReplicateRecord::failed(k, spec, &e))
                .collect()
        }
    };

    let split_seed = replicate_rng(config.base_seed, k, purpose::SPLIT).next_u64();
    let theta0 = config.dgp.theta0;
    config
        .estimators
        .iter()
        .map(|&spec| {
            let result = match spec {
                EstimatorSpec::Dml => {
                    dml_inference(&data, &g_hat, &q_hat, config.level).map(|e| (e.theta_hat, e.std_error, e.ci))
                }
                EstimatorSpec::Ace(r) => {
                    let ace = AceConfig {
                        order: r,
                        seed: split_seed,
                        ..config.ace
                    };
                    ace_estimate(&data, &g_hat, &q_hat, &ace, config.level)
                        .map(|e| (e.theta_hat, e.std_error, e.ci))
                }
            };
            match result {
                Ok((theta_hat, std_error, (lo, hi))) => ReplicateRecord {
                    replicate: k,
                    estimator: spec,
                    theta_hat,
                    std_error,
                    ci_lo: lo,
                    ci_hi: hi,
                    covered: lo <= theta0 && theta0 <= hi,
                    failure: None,
                },
                Err(e) => ReplicateRecord::failed(k, spec, &e),
            }
        })
        .collect()
}

fn validate_mc(config: &McConfig) -> Result<()> {
    config.dgp.validate()?;
    if config.reps == 0 {
        return Err(invalid("reps must be >= 1"));
    }
    if config.estimators.is_empty() {
        return Err(invalid("no estimators requested"));
    }
    if !(config.level > 0.0 && config.level < 1.0) {
        return Err(invalid(format!("level must lie in (0, 1), got {}", config.level)));
    }
    if let NuisancePolicy::Oracle { eps_g, eps_q, .. } = config.nuisance {
        if !(eps_g >= 0.0 && eps_q >= 0.0) {
            return Err(invalid("oracle errors must be >= 0"));
        }
    }
    Ok(())
}

/// Run every replicate (in parallel on the current rayon pool) and
/// aggregate. Estimator failures are recorded, not raised.
pub fn run_monte_carlo(config: &McConfig) -> Result<McOutcome> {
    validate_mc(config)?;
    let dgp = Dgp::new(config.dgp.clone())?;
    let records: Vec<ReplicateRecord> = (0..config.reps)
        .into_par_iter()
        .map(|k| run_replicate(&dgp, config, k))
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();
    let report = summarize(&records, &config.estimators, config.dgp.theta0, config.dgp.n, None);
    Ok(McOutcome { report, records })
}

/// Aggregate replicate records, optionally restricted to replicates
/// `0..first_reps`. Aggregation is sequential in replicate order.
pub fn summarize(
    records: &[ReplicateRecord],
    estimators: &[EstimatorSpec],
    theta0: f64,
    n: usize,
    first_reps: Option<usize>,
) -> McReport {
    let rows = estimators
        .iter()
        .map(|&spec| {
            let mine: Vec<&ReplicateRecord> = records
                .iter()
                .filter(|r| r.estimator == spec && first_reps.is_none_or(|m| r.replicate < m))
                .collect();
            let ok: Vec<&ReplicateRecord> = mine.iter().copied().filter(|r| r.failure.is_none()).collect();
            let count = ok.len() as f64;
            let mean = ok.iter().map(|r| r.theta_hat).sum::<f64>() / count;
            let sd = (ok.iter().map(|r| (r.theta_hat - mean).powi(2)).sum::<f64>() / count).sqrt();
            let rmse = (ok.iter().map(|r| (r.theta_hat - theta0).powi(2)).sum::<f64>() / count).sqrt();
            let coverage = ok.iter().filter(|r| r.covered).count() as f64 / count;
            let width = ok.iter().map(|r| r.ci_hi - r.ci_lo).sum::<f64>() / count;
            let failures = mine.len() - ok.len();
            McRow {
                label: spec.to_string(),
                rmse,
                bias: mean - theta0,
                sd,
                coverage,
                mean_ci_width: width,
                replicates: mine.len(),
                failures,
                excessive_failures: failures * 100 > mine.len(),
            }
        })
        .collect();
    McReport { theta0, n, rows }
}

/// Grid axis for [`sweep`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    N,
    Xi,
    S,
    /// Oracle nuisance error, applied to both nuisances.
    Epsilon,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::N => "n",
            SweepAxis::Xi => "xi",
            SweepAxis::S => "s",
            SweepAxis::Epsilon => "epsilon",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub outcome: McOutcome,
}

fn as_count(axis: SweepAxis, value: f64) -> Result<usize> {
    if value >= 0.0 && value.fract() == 0.0 && value <= u32::MAX as f64 {
        Ok(value as usize)
    } else {
        Err(invalid(format!("{axis} grid value {value} is not a non-negative integer")))
    }
}

/// The configuration `base` with `axis` set to `value`.
pub fn at_grid_point(base: &McConfig, axis: SweepAxis, value: f64) -> Result<McConfig> {
    let mut cfg = base.clone();
    match axis {
        SweepAxis::N => cfg.dgp.n = as_count(axis, value)?,
        SweepAxis::S => cfg.dgp.s = as_count(axis, value)?,
        SweepAxis::Xi => cfg.dgp.xi = value,
        SweepAxis::Epsilon => match &mut cfg.nuisance {
            NuisancePolicy::Oracle { eps_g, eps_q, .. } => {
                *eps_g = value;
                *eps_q = value;
            }
            NuisancePolicy::Lasso { .. } => {
                return Err(invalid("an epsilon sweep needs the oracle nuisance policy"))
            }
        },
    }
    Ok(cfg)
}

/// One Monte Carlo run per grid value, all sharing `base.base_seed`.
pub fn sweep(axis: SweepAxis, grid: &[f64], base: &McConfig) -> Result<Vec<SweepPoint>> {
    if grid.is_empty() {
        return Err(invalid("empty sweep grid"));
    }
    grid.iter()
        .map(|&value| {
            let cfg = at_grid_point(base, axis, value)?;
            Ok(SweepPoint {
                value,
                outcome: run_monte_carlo(&cfg)?,
            })
        })
        .collect()
}

/// Preconfigured experiment suites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    /// RMSE/bias/SD/coverage against sample size.
    Fig1,
    /// Sensitivity to `ξ`.
    Correlation,
    /// Sensitivity to the support size.
    Sparsity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scale {
    Desk,
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuitePlan {
    pub name: &'static str,
    pub axis: SweepAxis,
    pub grid: Vec<f64>,
    pub base: McConfig,
}

pub const DEFAULT_SUITE_SEED: u64 = 20_250_101;

pub fn suite_plan(suite: Suite, scale: Scale) -> SuitePlan {
    let desk = scale == Scale::Desk;
    let ace = |orders: &[usize]| orders.iter().map(|&r| EstimatorSpec::Ace(r)).collect::<Vec<_>>();
    let with = |dgp: DgpConfig, estimators, reps| McConfig {
        base_seed: DEFAULT_SUITE_SEED,
        ..McConfig::new(dgp, estimators, reps)
    };
    match suite {
        Suite::Fig1 => SuitePlan {
            name: "fig1",
            axis: SweepAxis::N,
            grid: if desk {
                vec![2000.0, 5000.0, 10000.0, 20000.0]
            } else {
                (1..=10).map(|i| 2000.0 * i as f64).collect()
            },
            base: with(DgpConfig::demand(20_000), ace(&[1, 2, 3, 5]), if desk { 500 } else { 20_000 }),
        },
        Suite::Correlation => SuitePlan {
            name: "correlation",
            axis: SweepAxis::Xi,
            grid: vec![0.0, 0.05, 0.1, 0.2, 0.3],
            base: with(DgpConfig::demand(20_000), ace(&[1, 2, 5]), if desk { 200 } else { 2000 }),
        },
        Suite::Sparsity => SuitePlan {
            name: "sparsity",
            axis: SweepAxis::S,
            grid: if desk {
                vec![40.0, 100.0, 200.0]
            } else {
                vec![40.0, 100.0, 200.0, 300.0, 400.0]
            },
            base: with(
                DgpConfig {
                    p: 1000,
                    ..DgpConfig::demand(10_000)
                },
                ace(&[1, 2, 3, 4, 5, 6]),
                if desk { 50 } else { 1000 },
            ),
        },
    }
}
