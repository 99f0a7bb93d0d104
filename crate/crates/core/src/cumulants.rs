//! Raw moments, moment/cumulant conversion and residual cumulant estimates.
//!
//! The residual cumulant estimator takes the cumulants of the empirical
//! distribution of `T_i - ĝ(X_i)`. Cumulants of order two and above are
//! translation invariant and additive over independent summands, which is
//! what makes them insensitive to a nuisance error that is independent of
//! the treatment noise.

use crate::data::{Dataset, LinearPredictor};
use crate::error::{invalid, AceError, Result};
use crate::partitions::{partition_weighted_sum, BlockSign, MAX_PARTITION_ORDER};

/// Where a moment sequence came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MomentOrigin {
    /// Sample moments over `n` observations.
    Empirical { n: usize },
    /// Moments of a known distribution.
    Exact,
}

/// Raw moments `μ'_1..μ'_K`; `values[k - 1]` is the order-`k` moment.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentSequence {
    values: Vec<f64>,
    origin: MomentOrigin,
}

impl MomentSequence {
    pub fn exact(values: Vec<f64>) -> Result<Self> {
        Self::with_origin(values, MomentOrigin::Exact)
    }

    pub fn with_origin(values: Vec<f64>, origin: MomentOrigin) -> Result<Self> {
        if values.is_empty() {
            return Err(invalid("moment sequence needs at least one order"));
        }
        if let MomentOrigin::Empirical { .. } = origin {
            if values.len() >= 2 {
                let (m1, m2) = (values[0], values[1]);
                // Cauchy–Schwarz, up to rounding in the summation.
                if m2 - m1 * m1 < -1e-12 * m2.abs().max(1.0) {
                    return Err(invalid(format!(
                        "empirical moments violate μ'_2 ≥ μ'_1² (μ'_1 = {m1}, μ'_2 = {m2})"
                    )));
                }
            }
        }
        Ok(Self { values, origin })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn origin(&self) -> MomentOrigin {
        self.origin
    }

    /// Highest order `K`.
    pub fn max_order(&self) -> usize {
        self.values.len()
    }

    /// `μ'_k`, with `μ'_0 = 1`.
    pub fn get(&self, k: usize) -> f64 {
        if k == 0 {
            1.0
        } else {
            self.values[k - 1]
        }
    }
}

/// Cumulants `κ_1..κ_K` with the moments they were derived from.
#[derive(Debug, Clone, PartialEq)]
pub struct CumulantSet {
    pub values: Vec<f64>,
    pub source_moments: MomentSequence,
}

impl CumulantSet {
    /// `κ_k` for `k >= 1`.
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    pub fn max_order(&self) -> usize {
        self.values.len()
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Kahan {
    sum: f64,
    carry: f64,
}

impl Kahan {
    fn add(&mut self, v: f64) {
        let y = v - self.carry;
        let t = self.sum + y;
        self.carry = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Sample raw moments `(1/n) Σ s_i^k` for `k = 1..=max_order`, accumulated
/// with compensated summation.
pub fn raw_moments(samples: &[f64], max_order: usize) -> Result<MomentSequence> {
    if samples.is_empty() {
        return Err(invalid("raw moments of an empty sample"));
    }
    if max_order == 0 {
        return Err(invalid("max_order must be at least 1"));
    }
    let mut acc = vec![Kahan::default(); max_order];
    for &s in samples {
        let mut power = s;
        for a in acc.iter_mut() {
            a.add(power);
            power *= s;
        }
    }
    let n = samples.len();
    let values = acc.iter().map(|a| a.sum / n as f64).collect();
    MomentSequence::with_origin(values, MomentOrigin::Empirical { n })
}

fn binomial(n: usize, k: usize) -> f64 {
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `κ_k = μ'_k − Σ_{j=1}^{k−1} C(k−1, j−1) μ'_{k−j} κ_j`.
pub fn moments_to_cumulants(moments: &MomentSequence) -> CumulantSet {
    let mut kappa: Vec<f64> = Vec::with_capacity(moments.max_order());
    for k in 1..=moments.max_order() {
        let mut value = moments.get(k);
        for j in 1..k {
            value -= binomial(k - 1, j - 1) * moments.get(k - j) * kappa[j - 1];
        }
        kappa.push(value);
    }
    CumulantSet {
        values: kappa,
        source_moments: moments.clone(),
    }
}

/// `μ_m = Σ_{π ∈ Π_m} Π_{B ∈ π} κ_{|B|}` for `m = 1..=K`.
pub fn cumulants_to_moments(cumulants: &[f64]) -> Result<MomentSequence> {
    if cumulants.len() > MAX_PARTITION_ORDER {
        return Err(AceError::Capacity {
            what: "cumulant order",
            value: cumulants.len(),
            max: MAX_PARTITION_ORDER,
        });
    }
    let values = (1..=cumulants.len())
        .map(|m| partition_weighted_sum(m, cumulants, BlockSign::Unsigned))
        .collect::<Result<Vec<_>>>()?;
    MomentSequence::exact(values)
}

/// Treatment residuals `T_i − ĝ(X_i)`.
pub fn residuals(data: &Dataset, g_hat: &LinearPredictor) -> Result<Vec<f64>> {
    let fitted = g_hat.predict(data.x.view())?;
    Ok((&data.t - &fitted).to_vec())
}

/// Cumulants of the empirical distribution of `samples`.
///
/// Computed from central moments about the (compensated) sample mean, then
/// `κ_1` is set to the mean. Mathematically equal to
/// `moments_to_cumulants(raw_moments(samples))`, with better conditioning
/// for high orders.
pub fn sample_cumulants(samples: &[f64], max_order: usize) -> Result<CumulantSet> {
    let source = raw_moments(samples, max_order)?;
    Ok(centered_cumulants(samples, 0.0, source))
}

fn centered_cumulants(samples: &[f64], offset: f64, source: MomentSequence) -> CumulantSet {
    let max_order = source.max_order();
    let mut mean = Kahan::default();
    samples.iter().for_each(|&s| mean.add(s));
    let mean = mean.sum / samples.len() as f64;
    let centered: Vec<f64> = samples.iter().map(|s| s - mean).collect();
    // `centered` is non-empty and max_order >= 1, so this cannot fail.
    let mut central = raw_moments(&centered, max_order)
        .expect("non-empty sample")
        .values;
    central[0] = 0.0;
    let mut kappa = moments_to_cumulants(&MomentSequence {
        values: central,
        origin: MomentOrigin::Exact,
    })
    .values;
    kappa[0] = mean - offset;
    CumulantSet {
        values: kappa,
        source_moments: source,
    }
}

/// Cumulants of the empirical distribution of `T_i − ĝ(X_i)`.
///
/// The intercept of `ĝ` only enters `κ̂_1`: orders two and up are computed
/// from `T_i − ⟨β̂, X_i⟩`, so shifting `ĝ` by a constant leaves them
/// bit-for-bit unchanged.
pub fn residual_cumulants(
    data: &Dataset,
    g_hat: &LinearPredictor,
    max_order: usize,
) -> Result<CumulantSet> {
    if data.is_empty() {
        return Err(invalid("residual cumulants of an empty dataset"));
    }
    if max_order == 0 {
        return Err(invalid("max_order must be at least 1"));
    }
    let slope_only = LinearPredictor::new(0.0, g_hat.coefficients.clone());
    let uncentred = residuals(data, &slope_only)?;
    let res: Vec<f64> = uncentred.iter().map(|u| u - g_hat.intercept).collect();
    let source = raw_moments(&res, max_order)?;
    Ok(centered_cumulants(&uncentred, g_hat.intercept, source))
}

/// `θ_1 = 0`, `θ_k = μ'_k − k θ_{k−1} μ'_1`.
pub fn debiased_moments(moments: &MomentSequence) -> Vec<f64> {
    let m1 = moments.get(1);
    let mut theta = Vec::with_capacity(moments.max_order());
    theta.push(0.0);
    for k in 2..=moments.max_order() {
        let prev = theta[k - 2];
        theta.push(moments.get(k) - k as f64 * prev * m1);
    }
    theta
}

/// The plug-in third-cumulant estimate `ψ̂ = μ̂_3 − 3μ̂_2μ̂_1` and the naive
/// third-moment estimate `ν̂ = μ̂_3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CubicEstimates {
    pub psi: f64,
    pub nu: f64,
}

pub fn cubic_estimators(residuals: &[f64]) -> Result<CubicEstimates> {
    let m = raw_moments(residuals, 3)?;
    let (m1, m2, m3) = (m.get(1), m.get(2), m.get(3));
    Ok(CubicEstimates {
        psi: m3 - 3.0 * m2 * m1,
        nu: m3,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    const DEMAND_POINTS: [f64; 4] = [0.5, 0.0, -1.5, -3.5];
    const DEMAND_PROBS: [f64; 4] = [0.65, 0.2, 0.1, 0.05];

    fn demand_exact_moments(k: usize) -> Vec<f64> {
        (1..=k)
            .map(|j| {
                DEMAND_POINTS
                    .iter()
                    .zip(DEMAND_PROBS)
                    .map(|(x, p)| p * x.powi(j as i32))
                    .sum()
            })
            .collect()
    }

    #[test]
    fn raw_moment_examples() {
        let m = raw_moments(&[-1.0, 1.0], 4).unwrap();
        assert_eq!(m.values(), &[0.0, 1.0, 0.0, 1.0]);

        let mut four_point = Vec::new();
        for (x, count) in DEMAND_POINTS.iter().zip([65, 20, 10, 5]) {
            four_point.extend(std::iter::repeat_n(*x, count));
        }
        let m = raw_moments(&four_point, 2).unwrap();
        assert!(m.get(1).abs() < 1e-15);
        assert!((m.get(2) - 1.0).abs() < 1e-14);

        let m = raw_moments(&[2.0, 2.0, 2.0], 3).unwrap();
        assert_eq!(m.values(), &[2.0, 4.0, 8.0]);
        assert_eq!(m.origin(), MomentOrigin::Empirical { n: 3 });
    }

    #[test]
    fn raw_moment_errors() {
        assert!(raw_moments(&[], 3).is_err());
        assert!(raw_moments(&[1.0], 0).is_err());
        assert!(MomentSequence::exact(vec![]).is_err());
        assert!(MomentSequence::with_origin(vec![1.0, 0.5], MomentOrigin::Empirical { n: 2 }).is_err());
    }

    #[test]
    fn gaussian_cumulants_vanish() {
        let s2: f64 = 1.7;
        let m = MomentSequence::exact(vec![0.0, s2, 0.0, 3.0 * s2 * s2]).unwrap();
        let k = moments_to_cumulants(&m);
        assert_eq!(k.values[0], 0.0);
        assert!((k.values[1] - s2).abs() < 1e-15);
        assert_eq!(k.values[2], 0.0);
        assert!(k.values[3].abs() < 1e-14);
    }

    #[test]
    fn demand_law_cumulants() {
        // Oracle: κ2 = μ2, κ3 = μ3, κ4 = μ4 − 3μ2² for a centred law.
        let mu = demand_exact_moments(4);
        let (k2, k3, k4) = (mu[1], mu[2], mu[3] - 3.0 * mu[1] * mu[1]);
        assert!((k2 - 1.0).abs() < 1e-12);
        assert!((k3 + 2.4).abs() < 1e-12);
        assert!((k4 - 5.05).abs() < 1e-12);

        let k = moments_to_cumulants(&MomentSequence::exact(mu).unwrap());
        assert!(k.values[0].abs() < 1e-15);
        assert!((k.get(2) - k2).abs() < 1e-12);
        assert!((k.get(3) - k3).abs() < 1e-12);
        assert!((k.get(4) - k4).abs() < 1e-12);
    }

    #[test]
    fn point_mass() {
        let c: f64 = -1.3;
        let mu: Vec<f64> = (1..=6).map(|k| c.powi(k)).collect();
        let k = moments_to_cumulants(&MomentSequence::exact(mu.clone()).unwrap());
        assert!((k.get(1) - c).abs() < 1e-15);
        for j in 2..=6 {
            assert!(k.get(j).abs() < 1e-12, "κ{j} = {}", k.get(j));
        }
        let back = cumulants_to_moments(&[c, 0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
        for (a, b) in back.values().iter().zip(&mu) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn cumulants_to_moment_examples() {
        let m = cumulants_to_moments(&[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(m.values(), &[0.0, 1.0, 0.0, 3.0]);
        let m = cumulants_to_moments(&[0.0, 1.0, -2.4, 5.05]).unwrap();
        assert!((m.get(4) - 8.05).abs() < 1e-12);
        assert!(cumulants_to_moments(&[0.0; 21]).is_err());
    }

    #[test]
    fn debiased_moment_examples() {
        let m = MomentSequence::exact(vec![0.1, 1.0, 0.5]).unwrap();
        let th = debiased_moments(&m);
        assert_eq!(th[0], 0.0);
        assert_eq!(th[1], 1.0);
        assert!((th[2] - 0.2).abs() < 1e-15);

        let m = MomentSequence::exact(vec![0.0, 2.0, -1.0, 7.0]).unwrap();
        assert_eq!(debiased_moments(&m), vec![0.0, 2.0, -1.0, 7.0]);

        let m = MomentSequence::exact(vec![3.0]).unwrap();
        assert_eq!(debiased_moments(&m), vec![0.0]);
    }

    #[test]
    fn cubic_examples() {
        let c = cubic_estimators(&[-1.0, 1.0, -1.0, 1.0]).unwrap();
        assert_eq!((c.psi, c.nu), (0.0, 0.0));
        let c = cubic_estimators(&[0.0, 0.0, 3.0]).unwrap();
        assert!(c.psi.abs() < 1e-14);
        assert!((c.nu - 9.0).abs() < 1e-14);
        assert!(cubic_estimators(&[]).is_err());
    }

    #[test]
    fn cubic_shift_law() {
        // ψ̂ − κ̂3 = −2μ̂_1³ exactly (κ3 = μ3 − 3μ2μ1 + 2μ1³); with a shift c
        // the third cumulant is unchanged, so ψ̂ moves only via −2μ̂_1³.
        let base = [0.3, -1.2, 2.5, 0.0, -0.4, 1.1];
        let c = 0.75;
        let shifted: Vec<f64> = base.iter().map(|v| v + c).collect();
        for sample in [&base[..], &shifted[..]] {
            let est = cubic_estimators(sample).unwrap();
            let m = raw_moments(sample, 3).unwrap();
            let k3 = moments_to_cumulants(&m).get(3);
            assert!((est.psi - (k3 - 2.0 * m.get(1).powi(3))).abs() < 1e-12);
        }
        let k3_base = moments_to_cumulants(&raw_moments(&base, 3).unwrap()).get(3);
        let k3_shift = moments_to_cumulants(&raw_moments(&shifted, 3).unwrap()).get(3);
        assert!((k3_base - k3_shift).abs() < 1e-12);
    }

    #[test]
    fn sample_cumulants_match_recursion() {
        let sample = [0.3, -1.2, 2.5, 0.0, -0.4, 1.1, 5.0, -2.2];
        let direct = moments_to_cumulants(&raw_moments(&sample, 6).unwrap());
        let centred = sample_cumulants(&sample, 6).unwrap();
        for k in 1..=6 {
            let (a, b) = (direct.get(k), centred.get(k));
            assert!((a - b).abs() < 1e-10 * a.abs().max(1.0), "k={k}: {a} vs {b}");
        }
        assert_eq!(centred.source_moments, direct.source_moments);
    }

    #[test]
    fn intercept_shift_only_moves_first_cumulant() {
        use ndarray::array;
        let d = Dataset::new(
            array![[0.1, 2.0], [1.5, -0.3], [-0.7, 0.2], [2.2, 1.1], [0.0, -1.0]],
            array![1.0, -0.5, 0.25, 3.0, -2.0],
            array![0.0, 0.0, 0.0, 0.0, 0.0],
        )
        .unwrap();
        let g = LinearPredictor::new(0.2, array![0.5, -0.25]);
        let a = residual_cumulants(&d, &g, 5).unwrap();
        let b = residual_cumulants(&d, &g.shifted(0.731), 5).unwrap();
        assert_eq!(a.values[1..], b.values[1..]);
        assert!((a.get(1) - b.get(1) - 0.731).abs() < 1e-12);
        assert!(residual_cumulants(&d, &LinearPredictor::zeros(3), 2).is_err());
    }

    #[test]
    fn empty_dataset_errors() {
        use ndarray::{Array1, Array2};
        let d = Dataset::new(Array2::zeros((0, 2)), Array1::zeros(0), Array1::zeros(0)).unwrap();
        assert!(residual_cumulants(&d, &LinearPredictor::zeros(2), 3).is_err());
    }
}
