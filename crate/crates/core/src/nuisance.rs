//! First-stage nuisance estimates.
//!
//! Lasso by cyclic coordinate descent on the (optionally standardized)
//! centred design, using covariance updates: the `p×p` Gram matrix is formed
//! once per design and every sweep costs `O(p²)` regardless of `n`. The
//! intercept is never penalized.
//!
//! [`oracle_nuisance`] produces predictors at an exact, chosen `L²(P_X)`
//! distance from the truth for controlled-error experiments.

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::data::LinearPredictor;
use crate::error::{invalid, AceError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LassoConfig {
    /// Penalty on the (standardized) coefficients.
    pub lambda: f64,
    pub max_iters: usize,
    /// Convergence threshold on the largest coefficient update in a sweep.
    pub tol: f64,
    pub standardize: bool,
}

impl Default for LassoConfig {
    fn default() -> Self {
        Self {
            lambda: 0.0,
            max_iters: 10_000,
            tol: 1e-7,
            standardize: true,
        }
    }
}

impl LassoConfig {
    pub fn with_lambda(lambda: f64) -> Self {
        Self {
            lambda,
            ..Self::default()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.lambda >= 0.0 && self.lambda.is_finite()) {
            return Err(invalid(format!("lambda must be finite and >= 0, got {}", self.lambda)));
        }
        if self.tol.is_nan() || self.tol <= 0.0 {
            return Err(invalid(format!("tol must be > 0, got {}", self.tol)));
        }
        if self.max_iters == 0 {
            return Err(invalid("max_iters must be >= 1"));
        }
        Ok(())
    }
}

/// Output of a Lasso fit.
#[derive(Debug, Clone, PartialEq)]
pub struct LassoFit {
    pub predictor: LinearPredictor,
    pub lambda: f64,
    pub converged: bool,
    /// Number of full coordinate sweeps performed.
    pub sweeps: usize,
}

/// Sufficient statistics of a design matrix for repeated Lasso fits.
#[derive(Debug, Clone)]
pub struct LassoDesign {
    n: usize,
    means: Array1<f64>,
    centred: Array2<f64>,
    /// Unscaled centred Gram matrix `X_cᵀ X_c / n`.
    gram: Array2<f64>,
}

impl LassoDesign {
    pub fn new(x: ArrayView2<'_, f64>) -> Result<Self> {
        let (n, p) = x.dim();
        if n < 2 {
            return Err(invalid(format!("lasso needs at least 2 rows, got {n}")));
        }
        if p < 1 {
            return Err(invalid("lasso needs at least one covariate"));
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("design matrix contains non-finite values"));
        }
        let means = x.mean_axis(Axis(0)).expect("n >= 2");
        let centred = &x - &means;
        let gram = centred.t().dot(&centred) / n as f64;
        Ok(Self {
            n,
            means,
            centred,
            gram,
        })
    }

    pub fn nrows(&self) -> usize {
        self.n
    }

    pub fn ncols(&self) -> usize {
        self.means.len()
    }

    fn scales(&self, standardize: bool) -> Array1<f64> {
        self.gram.diag().mapv(|v| if standardize { v.sqrt() } else { 1.0 })
    }

    fn problem(&self, y: ArrayView1<'_, f64>, standardize: bool) -> Result<Problem> {
        if y.len() != self.n {
            return Err(AceError::DimensionMismatch {
                expected: self.n,
                got: y.len(),
            });
        }
        if y.iter().any(|v| !v.is_finite()) {
            return Err(invalid("response contains non-finite values"));
        }
        let y_mean = y.mean().expect("n >= 2");
        let yc = y.mapv(|v| v - y_mean);
        let scales = self.scales(standardize);
        let raw_corr = self.centred.t().dot(&yc) / self.n as f64;
        let p = self.ncols();
        let mut gram = Array2::zeros((p, p));
        let mut corr = Array1::zeros(p);
        for j in 0..p {
            if scales[j] == 0.0 {
                continue;
            }
            corr[j] = raw_corr[j] / scales[j];
            for k in 0..p {
                if scales[k] != 0.0 {
                    gram[[j, k]] = self.gram[[j, k]] / (scales[j] * scales[k]);
                }
            }
        }
        Ok(Problem {
            y_mean,
            y_ss: yc.dot(&yc) / self.n as f64,
            scales,
            gram,
            corr,
        })
    }

    /// Smallest penalty at which every coefficient is zero.
    pub fn lambda_max(&self, y: ArrayView1<'_, f64>, standardize: bool) -> Result<f64> {
        let prob = self.problem(y, standardize)?;
        Ok(prob.corr.iter().fold(0.0f64, |m, c| m.max(c.abs())))
    }

    pub fn fit(&self, y: ArrayView1<'_, f64>, config: &LassoConfig) -> Result<LassoFit> {
        self.fit_from(y, config, None).map(|(fit, _)| fit)
    }

    // Returns the fit and the working-scale coefficients for warm starts.
    fn fit_from(
        &self,
        y: ArrayView1<'_, f64>,
        config: &LassoConfig,
        warm: Option<&Array1<f64>>,
    ) -> Result<(LassoFit, Array1<f64>)> {
        config.validate()?;
        let prob = self.problem(y, config.standardize)?;
        let p = self.ncols();
        let mut beta = warm.cloned().unwrap_or_else(|| Array1::zeros(p));
        let (converged, sweeps) = prob.coordinate_descent(&mut beta, config);

        let coefficients = Array1::from_shape_fn(p, |j| {
            if prob.scales[j] == 0.0 {
                0.0
            } else {
                beta[j] / prob.scales[j]
            }
        });
        let intercept = prob.y_mean - coefficients.dot(&self.means);
        Ok((
            LassoFit {
                predictor: LinearPredictor::new(intercept, coefficients),
                lambda: config.lambda,
                converged,
                sweeps,
            },
            beta,
        ))
    }

    /// Theory-driven penalty `c · σ̂ · sqrt(2 ln p / n)`.
    ///
    /// `σ̂` starts at the standard deviation of the centred response and is
    /// refreshed once from the residuals of a fit at the initial penalty.
    pub fn lambda_default(&self, y: ArrayView1<'_, f64>, c: f64, standardize: bool) -> Result<f64> {
        let prob = self.problem(y, standardize)?;
        let rate = (2.0 * (self.ncols() as f64).ln() / self.n as f64).sqrt();
        let sigma0 = prob.y_ss.sqrt();
        let lambda0 = c * sigma0 * rate;
        if lambda0 == 0.0 {
            return Ok(0.0);
        }
        let config = LassoConfig {
            lambda: lambda0,
            standardize,
            ..LassoConfig::default()
        };
        let mut beta = Array1::zeros(self.ncols());
        prob.coordinate_descent(&mut beta, &config);
        let rss = prob.loss(&beta) * 2.0;
        Ok(c * rss.max(0.0).sqrt() * rate)
    }
}

struct Problem {
    y_mean: f64,
    /// `‖y_c‖² / n`.
    y_ss: f64,
    scales: Array1<f64>,
    gram: Array2<f64>,
    corr: Array1<f64>,
}

fn soft_threshold(z: f64, lambda: f64) -> f64 {
    if z > lambda {
        z - lambda
    } else if z < -lambda {
        z + lambda
    } else {
        0.0
    }
}

impl Problem {
    /// `½ n⁻¹ ‖y_c − Z β‖²` from sufficient statistics.
    fn loss(&self, beta: &Array1<f64>) -> f64 {
        0.5 * (self.y_ss - 2.0 * beta.dot(&self.corr) + beta.dot(&self.gram.dot(beta)))
    }

    fn objective(&self, beta: &Array1<f64>, lambda: f64) -> f64 {
        self.loss(beta) + lambda * beta.iter().map(|b| b.abs()).sum::<f64>()
    }

    fn coordinate_descent(&self, beta: &mut Array1<f64>, config: &LassoConfig) -> (bool, usize) {
        let p = beta.len();
        // grad_j = corr_j − (G β)_j
        let mut grad = &self.corr - &self.gram.dot(beta);
        let mut last_objective = if cfg!(debug_assertions) {
            self.objective(beta, config.lambda)
        } else {
            0.0
        };
        for sweep in 1..=config.max_iters {
            let mut max_update: f64 = 0.0;
            for j in 0..p {
                let gjj = self.gram[[j, j]];
                if gjj == 0.0 {
                    continue;
                }
                let old = beta[j];
                let z = grad[j] + gjj * old;
                let new = soft_threshold(z, config.lambda) / gjj;
                let delta = new - old;
                if delta != 0.0 {
                    beta[j] = new;
                    grad.scaled_add(-delta, &self.gram.column(j));
                    max_update = max_update.max(delta.abs());
                }
            }
            if cfg!(debug_assertions) {
                let objective = self.objective(beta, config.lambda);
                debug_assert!(
                    objective <= last_objective + 1e-12 * last_objective.abs().max(1.0),
                    "lasso objective increased: {last_objective} -> {objective}"
                );
                last_objective = objective;
            }
            if max_update < config.tol {
                return (true, sweep);
            }
        }
        (false, config.max_iters)
    }
}

/// One-shot Lasso fit.
pub fn lasso_fit(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, config: &LassoConfig) -> Result<LassoFit> {
    LassoDesign::new(x)?.fit(y, config)
}

/// See [`LassoDesign::lambda_default`].
pub fn lambda_default(x: ArrayView2<'_, f64>, y: ArrayView1<'_, f64>, c: f64) -> Result<f64> {
    LassoDesign::new(x)?.lambda_default(y, c, true)
}

/// Penalty chosen by `folds`-fold cross-validation over a geometric grid of
/// 30 values from `λ_max` down to `10⁻³ λ_max`, minimizing mean held-out
/// squared error. Fold `k` holds rows `i` with `i % folds == k`.
pub fn lambda_cv(
    x: ArrayView2<'_, f64>,
    y: ArrayView1<'_, f64>,
    config: &LassoConfig,
    folds: usize,
) -> Result<f64> {
    let n = x.nrows();
    if folds < 2 || folds > n / 2 {
        return Err(invalid(format!("cannot run {folds}-fold CV on {n} rows")));
    }
    let lambda_max = LassoDesign::new(x)?.lambda_max(y, config.standardize)?;
    if lambda_max == 0.0 {
        return Ok(0.0);
    }
    const GRID: usize = 30;
    let grid: Vec<f64> = (0..GRID)
        .map(|i| lambda_max * 10f64.powf(-3.0 * i as f64 / (GRID - 1) as f64))
        .collect();
    let mut errors = vec![0.0; GRID];
    for k in 0..folds {
        let (train, test): (Vec<usize>, Vec<usize>) = (0..n).partition(|i| i % folds != k);
        let x_train = x.select(Axis(0), &train);
        let y_train = y.select(Axis(0), &train);
        let x_test = x.select(Axis(0), &test);
        let y_test = y.select(Axis(0), &test);
        let design = LassoDesign::new(x_train.view())?;
        let mut warm: Option<Array1<f64>> = None;
        for (g, &lambda) in grid.iter().enumerate() {
            let cfg = LassoConfig { lambda, ..*config };
            let (fit, beta) = design.fit_from(y_train.view(), &cfg, warm.as_ref())?;
            warm = Some(beta);
            let pred = fit.predictor.predict(x_test.view())?;
            let sse: f64 = (&y_test - &pred).mapv(|r| r * r).sum();
            errors[g] += sse / n as f64;
        }
    }
    let best = errors
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .expect("non-empty grid");
    Ok(grid[best])
}

/// How [`oracle_nuisance`] perturbs the truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PerturbationMode {
    /// Add a seeded-random coefficient vector of Euclidean norm `ε`; under
    /// `X ~ N(0, I)` the `L²(P_X)` error is exactly `ε`.
    CoefficientInflation,
    /// Add the constant `ε`; the `L²(P_X)` error is `ε` for any `P_X`.
    AdditiveFunction,
}

/// A predictor at `L²(P_X)` distance `epsilon` from `truth`.
pub fn oracle_nuisance(
    truth: &LinearPredictor,
    epsilon: f64,
    mode: PerturbationMode,
    seed: u64,
) -> Result<LinearPredictor> {
    if !(epsilon >= 0.0 && epsilon.is_finite()) {
        return Err(invalid(format!("epsilon must be finite and >= 0, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(truth.clone());
    }
    match mode {
        PerturbationMode::AdditiveFunction => Ok(truth.shifted(epsilon)),
        PerturbationMode::CoefficientInflation => {
            let p = truth.dim();
            if p == 0 {
                return Err(invalid("coefficient perturbation needs p >= 1"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut dir: Array1<f64> = loop {
                let d = Array1::from_shape_fn(p, |_| StandardNormal.sample(&mut rng));
                if d.dot(&d) > 0.0 {
                    break d;
                }
            };
            let norm = dir.dot(&dir).sqrt();
            dir.mapv_inplace(|v| v * epsilon / norm);
            Ok(LinearPredictor::new(truth.intercept, &truth.coefficients + &dir))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;
    use rand::Rng;

    fn random_problem(seed: u64, n: usize, p: usize) -> (Array2<f64>, Array1<f64>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal) * 1.5 + 0.3);
        let beta = Array1::from_shape_fn(p, |j| if j % 3 == 0 { 1.0 + j as f64 * 0.1 } else { 0.0 });
        let y = x.dot(&beta) + 0.7 + Array1::from_shape_fn(n, |_| rng.sample::<f64, _>(StandardNormal));
        (x, y)
    }

    /// Orthonormal centred design: Walsh columns, XᵀX/n = I.
    fn walsh(n: usize, p: usize) -> Array2<f64> {
        Array2::from_shape_fn((n, p), |(i, j)| {
            if ((i >> j) & 1) == 0 {
                1.0
            } else {
                -1.0
            }
        })
    }

    #[test]
    fn orthonormal_design_is_soft_thresholding() {
        let x = walsh(16, 4);
        let y = array![
            1.0, -2.0, 0.5, 3.0, 0.0, 1.5, -1.0, 2.0, 0.25, -0.5, 1.0, 0.0, 2.5, -3.0, 1.0, 0.75
        ];
        let lambda = 0.3;
        let cfg = LassoConfig {
            lambda,
            standardize: false,
            tol: 1e-12,
            ..LassoConfig::default()
        };
        let fit = lasso_fit(x.view(), y.view(), &cfg).unwrap();
        assert!(fit.converged);
        for j in 0..4 {
            let z = x.column(j).dot(&y) / 16.0;
            let expect = soft_threshold(z, lambda);
            assert!((fit.predictor.coefficients[j] - expect).abs() < 1e-10);
        }
    }

    #[test]
    fn zero_penalty_is_ols() {
        let (x, y) = random_problem(3, 60, 5);
        let cfg = LassoConfig {
            lambda: 0.0,
            tol: 1e-13,
            ..LassoConfig::default()
        };
        let fit = lasso_fit(x.view(), y.view(), &cfg).unwrap();
        let ols = ols_oracle(&x, &y);
        assert!((fit.predictor.intercept - ols[0]).abs() < 1e-8);
        for j in 0..5 {
            assert!((fit.predictor.coefficients[j] - ols[j + 1]).abs() < 1e-8);
        }
    }

    /// Normal equations with an intercept column, solved by Gaussian
    /// elimination with partial pivoting.
    fn ols_oracle(x: &Array2<f64>, y: &Array1<f64>) -> Vec<f64> {
        let (n, p) = x.dim();
        let mut a = Array2::<f64>::zeros((n, p + 1));
        a.column_mut(0).fill(1.0);
        a.slice_mut(ndarray::s![.., 1..]).assign(x);
        let mut m = a.t().dot(&a);
        let mut b = a.t().dot(y);
        let k = p + 1;
        for c in 0..k {
            let piv = (c..k).max_by(|&i, &j| m[[i, c]].abs().total_cmp(&m[[j, c]].abs())).unwrap();
            for col in 0..k {
                m.swap([c, col], [piv, col]);
            }
            b.swap(c, piv);
            for r in (c + 1)..k {
                let f = m[[r, c]] / m[[c, c]];
                for col in c..k {
                    m[[r, col]] -= f * m[[c, col]];
                }
                b[r] -= f * b[c];
            }
        }
        let mut sol = vec![0.0; k];
        for r in (0..k).rev() {
            let s: f64 = ((r + 1)..k).map(|c| m[[r, c]] * sol[c]).sum();
            sol[r] = (b[r] - s) / m[[r, r]];
        }
        sol
    }

    #[test]
    fn null_model_threshold() {
        let (x, y) = random_problem(5, 50, 6);
        let design = LassoDesign::new(x.view()).unwrap();
        let lmax = design.lambda_max(y.view(), true).unwrap();
        let fit = design.fit(y.view(), &LassoConfig::with_lambda(lmax)).unwrap();
        assert!(fit.predictor.coefficients.iter().all(|&c| c == 0.0));
        assert!((fit.predictor.intercept - y.mean().unwrap()).abs() < 1e-12);
        let fit = design.fit(y.view(), &LassoConfig::with_lambda(0.99 * lmax)).unwrap();
        assert!(fit.predictor.coefficients.iter().any(|&c| c != 0.0));
    }

    #[test]
    fn kkt_conditions_hold() {
        for seed in 0..20u64 {
            let (x, y) = random_problem(100 + seed, 80, 12);
            let standardize = seed % 2 == 0;
            let design = LassoDesign::new(x.view()).unwrap();
            let lambda = 0.2 * design.lambda_max(y.view(), standardize).unwrap();
            let cfg = LassoConfig {
                lambda,
                standardize,
                ..LassoConfig::default()
            };
            let fit = design.fit(y.view(), &cfg).unwrap();
            assert!(fit.converged);
            let viol = kkt_violation(&x, &y, &fit.predictor, lambda, standardize);
            assert!(viol < 1e-5, "seed {seed}: violation {viol}");
        }
    }

    fn kkt_violation(x: &Array2<f64>, y: &Array1<f64>, g: &LinearPredictor, lambda: f64, standardize: bool) -> f64 {
        let n = x.nrows() as f64;
        let r = y - &g.predict(x.view()).unwrap();
        let mut worst: f64 = 0.0;
        for j in 0..x.ncols() {
            let col = x.column(j);
            let mean = col.mean().unwrap();
            let sd = if standardize {
                (col.mapv(|v| (v - mean).powi(2)).sum() / n).sqrt()
            } else {
                1.0
            };
            let grad = col.mapv(|v| (v - mean) / sd).dot(&r) / n;
            let b = g.coefficients[j];
            let v = if b == 0.0 {
                (grad.abs() - lambda).max(0.0)
            } else {
                (grad - lambda * b.signum()).abs()
            };
            worst = worst.max(v);
        }
        worst
    }

    #[test]
    fn deterministic() {
        let (x, y) = random_problem(9, 70, 8);
        let cfg = LassoConfig::with_lambda(0.05);
        let a = lasso_fit(x.view(), y.view(), &cfg).unwrap();
        let b = lasso_fit(x.view(), y.view(), &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn nonconvergence_is_flagged() {
        let (x, y) = random_problem(11, 40, 10);
        let cfg = LassoConfig {
            lambda: 0.01,
            max_iters: 1,
            tol: 1e-15,
            standardize: true,
        };
        let fit = lasso_fit(x.view(), y.view(), &cfg).unwrap();
        assert!(!fit.converged);
        assert_eq!(fit.sweeps, 1);
    }

    #[test]
    fn rejects_bad_input() {
        let x = array![[1.0, f64::NAN], [0.0, 1.0]];
        assert!(lasso_fit(x.view(), array![1.0, 2.0].view(), &LassoConfig::default()).is_err());
        let x = array![[1.0]];
        assert!(lasso_fit(x.view(), array![1.0].view(), &LassoConfig::default()).is_err());
        let x = array![[1.0], [2.0]];
        assert!(lasso_fit(x.view(), array![1.0].view(), &LassoConfig::default()).is_err());
        let bad = LassoConfig { tol: 0.0, ..LassoConfig::default() };
        assert!(lasso_fit(x.view(), array![1.0, 2.0].view(), &bad).is_err());
    }

    #[test]
    fn default_lambda() {
        let (x, _) = random_problem(1, 30, 4);
        let y = Array1::from_elem(30, 2.5);
        assert_eq!(lambda_default(x.view(), y.view(), 1.0).unwrap(), 0.0);

        // σ̂ = 1 after refit would give sqrt(2 ln p / n); check the rate part.
        let rate = (2.0 * 100f64.ln() / 10_000.0).sqrt();
        assert!((rate - 0.03035).abs() < 5e-6);

        let (x, y) = random_problem(2, 400, 8);
        let l1 = lambda_default(x.view(), y.view(), 1.0).unwrap();
        let l2 = lambda_default(x.view(), y.view(), 2.0).unwrap();
        assert!(l1 > 0.0 && l2 > l1);
        // residual scale is roughly the unit noise level
        let sigma = l1 / (2.0 * 8f64.ln() / 400.0).sqrt();
        assert!((sigma - 1.0).abs() < 0.2, "sigma {sigma}");
    }

    #[test]
    fn cv_picks_a_grid_value() {
        let (x, y) = random_problem(4, 100, 6);
        let cfg = LassoConfig::default();
        let lam = lambda_cv(x.view(), y.view(), &cfg, 5).unwrap();
        let lmax = LassoDesign::new(x.view()).unwrap().lambda_max(y.view(), true).unwrap();
        assert!(lam > 0.0 && lam <= lmax);
        assert!(lambda_cv(x.view(), y.view(), &cfg, 1).is_err());
    }

    #[test]
    fn oracle_perturbations() {
        let truth = LinearPredictor::new(0.5, array![1.0, 0.0, -2.0]);
        assert_eq!(
            oracle_nuisance(&truth, 0.0, PerturbationMode::CoefficientInflation, 1).unwrap(),
            truth
        );
        let g = oracle_nuisance(&truth, 0.2, PerturbationMode::CoefficientInflation, 7).unwrap();
        let diff = &g.coefficients - &truth.coefficients;
        assert!((diff.dot(&diff).sqrt() - 0.2).abs() < 1e-12);
        assert_eq!(g.intercept, truth.intercept);
        let h = oracle_nuisance(&truth, 0.2, PerturbationMode::AdditiveFunction, 7).unwrap();
        assert_eq!(h.intercept, 0.7);
        assert!(oracle_nuisance(&truth, -1.0, PerturbationMode::AdditiveFunction, 0).is_err());
    }

    #[test]
    fn oracle_l2_error_matches_epsilon() {
        let p = 20;
        let truth = LinearPredictor::new(0.0, Array1::from_elem(p, 0.5));
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 100_000;
        let x = Array2::from_shape_fn((n, p), |_| rng.sample::<f64, _>(StandardNormal));
        for (i, eps) in [0.05, 0.1, 0.2].into_iter().enumerate() {
            let g = oracle_nuisance(&truth, eps, PerturbationMode::CoefficientInflation, i as u64).unwrap();
            let d = g.predict(x.view()).unwrap() - truth.predict(x.view()).unwrap();
            let rms = (d.dot(&d) / n as f64).sqrt();
            assert!((rms / eps - 1.0).abs() < 0.05, "eps {eps}: rms {rms}");
        }
    }
}
