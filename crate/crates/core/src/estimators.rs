//! DML and ACE treatment-effect estimators with plug-in inference.
//!
//! ACE splits the estimation sample in two: residual cumulants from the
//! first part define `Ĵ_r`, and the moment equation
//! `Σ [Y − q̂ − θ(T − ĝ)] Ĵ_r(T − ĝ) = 0` is solved on the second part.
//! The equation is affine in `θ`, so the solution is a ratio.

use ndarray::Array1;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::cumulants::{residual_cumulants, CumulantSet};
use crate::data::{Dataset, LinearPredictor};
use crate::error::{invalid, AceError, Result};
use crate::jpoly::{j_closed_form, JrPolynomial, MAX_ORDER};
use crate::partitions::factorial;

/// Relative threshold below which the empirical denominator counts as zero.
pub const WEAK_IDENTIFICATION_RTOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SplitMode {
    /// Seeded uniform permutation, then first/second block.
    #[default]
    Permuted,
    /// Rows in input order: the first block, then the rest.
    Sequential,
}

/// Which plug-in for the moment variance `V_m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum VarianceFormula {
    /// `mean[(Y − q̂ − θ̂(T − ĝ))² Ĵ_r(T − ĝ)²]`, the variance of the moment
    /// function at `θ̂`.
    #[default]
    MomentResidual,
    /// `mean[((Y − q̂)² + θ̂²(T − ĝ)²) Ĵ_r(T − ĝ)²]`. Conservative; kept for
    /// comparison.
    SeparateSquares,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AceConfig {
    pub order: usize,
    /// Fraction of rows used for the cumulant estimates.
    pub split_fraction: f64,
    pub swap_and_average: bool,
    pub seed: u64,
    pub split_mode: SplitMode,
    pub variance: VarianceFormula,
}

impl Default for AceConfig {
    fn default() -> Self {
        Self {
            order: 2,
            split_fraction: 0.5,
            swap_and_average: false,
            seed: 0,
            split_mode: SplitMode::Permuted,
            variance: VarianceFormula::MomentResidual,
        }
    }
}

impl AceConfig {
    pub fn with_order(order: usize) -> Self {
        Self {
            order,
            ..Self::default()
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AceEstimate {
    pub theta_hat: f64,
    pub std_error: f64,
    pub ci: (f64, f64),
    pub level: f64,
    /// Per-sample mean of `(T − ĝ) Ĵ_r(T − ĝ)` on the solving fold.
    pub denominator: f64,
    /// Per-sample mean of `(Y − q̂) Ĵ_r(T − ĝ)` on the solving fold.
    pub numerator: f64,
    pub v_m_hat: f64,
    /// Residual cumulants `κ̂_1..κ̂_{r+1}` from the cumulant fold.
    pub cumulants: CumulantSet,
    pub polynomial: JrPolynomial,
    /// `κ̂_{r+1}/r!`, the plug-in identification coefficient.
    pub identification_proxy: f64,
    /// Estimates from each solving fold (one entry unless swapping).
    pub fold_thetas: Vec<f64>,
}

impl AceEstimate {
    /// `θ̂ ± z·SE` at another confidence level.
    pub fn confidence_interval(&self, level: f64) -> Result<(f64, f64)> {
        confidence_interval(self.theta_hat, self.std_error, level)
    }
}

/// Standard-normal quantile `z` with `P(|Z| ≤ z) = level`.
pub fn z_value(level: f64) -> Result<f64> {
    if !(level > 0.0 && level < 1.0) {
        return Err(invalid(format!("confidence level must lie in (0, 1), got {level}")));
    }
    let normal = Normal::new(0.0, 1.0).expect("valid standard normal");
    Ok(normal.inverse_cdf(0.5 + level / 2.0))
}

pub fn confidence_interval(theta: f64, std_error: f64, level: f64) -> Result<(f64, f64)> {
    let half = z_value(level)? * std_error;
    Ok((theta - half, theta + half))
}

/// Index sets `(D1, D2)`; `D1` gets `⌈n · fraction⌉` rows.
pub fn split_indices(n: usize, config: &AceConfig) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(config.split_fraction > 0.0 && config.split_fraction < 1.0) {
        return Err(invalid(format!(
            "split_fraction must lie in (0, 1), got {}",
            config.split_fraction
        )));
    }
    let n1 = (n as f64 * config.split_fraction).ceil() as usize;
    if n1 == 0 || n1 >= n {
        return Err(invalid(format!(
            "split of {n} rows at fraction {} leaves an empty fold",
            config.split_fraction
        )));
    }
    let mut idx: Vec<usize> = (0..n).collect();
    if config.split_mode == SplitMode::Permuted {
        idx.shuffle(&mut ChaCha8Rng::seed_from_u64(config.seed));
    }
    let second = idx.split_off(n1);
    Ok((idx, second))
}

struct Residuals {
    treatment: Array1<f64>,
    outcome: Array1<f64>,
}

fn residualize(data: &Dataset, g_hat: &LinearPredictor, q_hat: &LinearPredictor) -> Result<Residuals> {
    let g = g_hat.predict(data.x.view())?;
    let q = q_hat.predict(data.x.view())?;
    Ok(Residuals {
        treatment: &data.t - &g,
        outcome: &data.y - &q,
    })
}

// (Σ u·j / n, Σ w·j / n), shared by DML and ACE so r = 1 reproduces DML
// bit for bit.
fn moment_means(res: &Residuals, instrument: &[f64]) -> (f64, f64) {
    let n = instrument.len() as f64;
    let mut num = 0.0;
    let mut den = 0.0;
    for ((u, w), j) in res.outcome.iter().zip(&res.treatment).zip(instrument) {
        num += u * j;
        den += w * j;
    }
    (num / n, den / n)
}

/// `[Σ(T − ĝ)²]⁻¹ Σ(Y − q̂)(T − ĝ)` over the whole dataset.
pub fn dml_estimate(data: &Dataset, g_hat: &LinearPredictor, q_hat: &LinearPredictor) -> Result<f64> {
    Ok(dml_inference(data, g_hat, q_hat, 0.95)?.theta_hat)
}

/// DML point estimate with its sandwich standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DmlEstimate {
    pub theta_hat: f64,
    pub std_error: f64,
    pub ci: (f64, f64),
}

pub fn dml_inference(
    data: &Dataset,
    g_hat: &LinearPredictor,
    q_hat: &LinearPredictor,
    level: f64,
) -> Result<DmlEstimate> {
    if data.is_empty() {
        return Err(invalid("DML on an empty dataset"));
    }
    let res = residualize(data, g_hat, q_hat)?;
    let w = res.treatment.to_vec();
    let (num, den) = moment_means(&res, &w);
    if den == 0.0 || !den.is_finite() {
        return Err(AceError::DegenerateDesign(
            "treatment residuals T − ĝ(X) are identically zero".into(),
        ));
    }
    let theta = num / den;
    let n = w.len() as f64;
    let v: f64 = res
        .outcome
        .iter()
        .zip(&w)
        .map(|(u, w)| ((u - theta * w) * w).powi(2))
        .sum::<f64>()
        / n;
    let std_error = (v / n).sqrt() / den;
    Ok(DmlEstimate {
        theta_hat: theta,
        std_error,
        ci: confidence_interval(theta, std_error, level)?,
    })
}

struct FoldResult {
    theta: f64,
    numerator: f64,
    denominator: f64,
    v_m: f64,
    std_error: f64,
    cumulants: CumulantSet,
    polynomial: JrPolynomial,
}

fn solve_fold(
    cumulant_fold: &Dataset,
    solve_fold: &Dataset,
    g_hat: &LinearPredictor,
    q_hat: &LinearPredictor,
    config: &AceConfig,
) -> Result<FoldResult> {
    let r = config.order;
    let cumulants = residual_cumulants(cumulant_fold, g_hat, r + 1)?;
    let polynomial = j_closed_form(&cumulants.values[..r], r)?;

    let res = residualize(solve_fold, g_hat, q_hat)?;
    let instrument: Vec<f64> = res.treatment.iter().map(|&w| polynomial.eval(w)).collect();
    let (numerator, denominator) = moment_means(&res, &instrument);

    let n2 = instrument.len() as f64;
    let scale = (res.treatment.iter().map(|w| w.abs().powi(r as i32 + 1)).sum::<f64>() / n2).max(1.0);
    let threshold = WEAK_IDENTIFICATION_RTOL * scale;
    if denominator.is_nan() || denominator.abs() < threshold {
        return Err(AceError::WeakIdentification {
            denominator,
            threshold,
        });
    }
    let theta = numerator / denominator;

    let v_m = res
        .outcome
        .iter()
        .zip(&res.treatment)
        .zip(&instrument)
        .map(|((u, w), j)| {
            let j2 = j * j;
            match config.variance {
                VarianceFormula::MomentResidual => (u - theta * w).powi(2) * j2,
                VarianceFormula::SeparateSquares => (u * u + theta * theta * w * w) * j2,
            }
        })
        .sum::<f64>()
        / n2;
    let std_error = (v_m / n2).sqrt() / denominator.abs();
    Ok(FoldResult {
        theta,
        numerator,
        denominator,
        v_m,
        std_error,
        cumulants,
        polynomial,
    })
}

/// Order-`r` ACE on `data`. The nuisances must have been fitted on data
/// disjoint from `data`.
pub fn ace_estimate(
    data: &Dataset,
    g_hat: &LinearPredictor,
    q_hat: &LinearPredictor,
    config: &AceConfig,
    level: f64,
) -> Result<AceEstimate> {
    if config.order == 0 || config.order > MAX_ORDER {
        return Err(AceError::Capacity {
            what: "ACE order",
            value: config.order,
            max: MAX_ORDER,
        });
    }
    if data.len() < 4 {
        return Err(invalid(format!("ACE needs at least 4 rows, got {}", data.len())));
    }
    let z = z_value(level)?;
    let (first, second) = split_indices(data.len(), config)?;
    let d1 = data.select(&first);
    let d2 = data.select(&second);

    let main = solve_fold(&d1, &d2, g_hat, q_hat, config)?;
    let (theta_hat, std_error, fold_thetas) = if config.swap_and_average {
        let swapped = solve_fold(&d2, &d1, g_hat, q_hat, config)?;
        let theta = 0.5 * (main.theta + swapped.theta);
        let se = 0.5 * (main.std_error.powi(2) + swapped.std_error.powi(2)).sqrt();
        (theta, se, vec![main.theta, swapped.theta])
    } else {
        (main.theta, main.std_error, vec![main.theta])
    };

    let r = config.order;
    Ok(AceEstimate {
        theta_hat,
        std_error,
        ci: (theta_hat - z * std_error, theta_hat + z * std_error),
        level,
        denominator: main.denominator,
        numerator: main.numerator,
        v_m_hat: main.v_m,
        identification_proxy: main.cumulants.get(r + 1) / factorial(r),
        cumulants: main.cumulants,
        polynomial: main.polynomial,
        fold_thetas,
    })
}

/// ACE solved with a caller-supplied polynomial on the whole of `data`
/// (no split); used to check invariances of the ratio.
pub fn solve_with_polynomial(
    data: &Dataset,
    g_hat: &LinearPredictor,
    q_hat: &LinearPredictor,
    polynomial: &JrPolynomial,
) -> Result<f64> {
    let res = residualize(data, g_hat, q_hat)?;
    let instrument: Vec<f64> = res.treatment.iter().map(|&w| polynomial.eval(w)).collect();
    let (num, den) = moment_means(&res, &instrument);
    if den == 0.0 {
        return Err(AceError::WeakIdentification {
            denominator: den,
            threshold: 0.0,
        });
    }
    Ok(num / den)
}
