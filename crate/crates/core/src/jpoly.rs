//! The orthogonalizing polynomial `Ĵ_r`.
//!
//! Starting from `J_1(w) = w` (centred), each `J_r` is obtained by
//! integrating `J_{r−1}` from zero and subtracting the expectation of the
//! result under the noise law. With the noise independent of the covariates
//! the coefficients have a closed form in the noise cumulants,
//!
//! ```text
//! a_i = 1/((i−1)! (r+1−i)!) · Σ_{π ∈ Π_{r+1−i}} (−1)^{|π|} Π_{B ∈ π} κ_{|B|},
//! ```
//!
//! so `Ĵ_r` is built by plugging in estimated cumulants. The expected `k`-th
//! derivative of `Ĵ_r` under the true law is then a sum over partitions of
//! products of cumulant errors, which is what makes the moment function
//! insensitive to first-stage errors up to order `r`.

use crate::cumulants::MomentSequence;
use crate::error::{invalid, AceError, Result};
use crate::partitions::{factorial, partition_weighted_sum, BlockSign};

/// Largest supported polynomial order.
pub const MAX_ORDER: usize = 8;

/// A real polynomial with coefficients stored by ascending power.
#[derive(Debug, Clone, PartialEq)]
pub struct Polynomial(pub Vec<f64>);

impl Polynomial {
    pub fn coeffs(&self) -> &[f64] {
        &self.0
    }

    /// Horner evaluation. The empty polynomial is zero.
    pub fn eval(&self, w: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, &c| acc * w + c)
    }

    /// `k`-th formal derivative. Differentiating past the degree gives the
    /// zero polynomial `[0.0]`.
    pub fn derivative(&self, k: usize) -> Polynomial {
        if k >= self.0.len() {
            return Polynomial(vec![0.0]);
        }
        let coeffs = (k..self.0.len())
            .map(|i| self.0[i] * falling_factorial(i, k))
            .collect();
        Polynomial(coeffs)
    }

    /// Antiderivative vanishing at zero.
    pub fn integral(&self) -> Polynomial {
        let mut coeffs = Vec::with_capacity(self.0.len() + 1);
        coeffs.push(0.0);
        coeffs.extend(self.0.iter().enumerate().map(|(i, c)| c / (i + 1) as f64));
        Polynomial(coeffs)
    }

    /// `E[p(W)] = Σ_i c_i μ_i` for the given raw moments (`μ_0 = 1`).
    pub fn expectation(&self, moments: &MomentSequence) -> Result<f64> {
        let degree = self.0.len().saturating_sub(1);
        if degree > moments.max_order() {
            return Err(invalid(format!(
                "expectation of a degree-{degree} polynomial needs {degree} moments, got {}",
                moments.max_order()
            )));
        }
        Ok(self
            .0
            .iter()
            .enumerate()
            .map(|(i, c)| c * moments.get(i))
            .sum())
    }
}

fn falling_factorial(i: usize, k: usize) -> f64 {
    ((i - k + 1)..=i).map(|v| v as f64).product()
}

/// `Ĵ_r` together with the cumulants it was built from.
#[derive(Debug, Clone, PartialEq)]
pub struct JrPolynomial {
    order: usize,
    poly: Polynomial,
    cumulants_used: Vec<f64>,
}

impl JrPolynomial {
    pub fn order(&self) -> usize {
        self.order
    }

    /// Coefficients `â_1..â_{r+1}`; `â_i` multiplies `w^{i−1}`.
    pub fn coeffs(&self) -> &[f64] {
        self.poly.coeffs()
    }

    pub fn polynomial(&self) -> &Polynomial {
        &self.poly
    }

    /// Cumulants plugged into the closed form (empty for the recursive
    /// construction, which works from moments).
    pub fn cumulants_used(&self) -> &[f64] {
        &self.cumulants_used
    }

    /// Multiply every coefficient by `c`.
    pub fn scaled(&self, c: f64) -> JrPolynomial {
        JrPolynomial {
            order: self.order,
            poly: Polynomial(self.poly.0.iter().map(|a| a * c).collect()),
            cumulants_used: self.cumulants_used.clone(),
        }
    }

    pub fn eval(&self, w: f64) -> f64 {
        self.poly.eval(w)
    }
}

fn check_order(r: usize) -> Result<()> {
    if r == 0 || r > MAX_ORDER {
        return Err(AceError::Capacity {
            what: "polynomial order",
            value: r,
            max: MAX_ORDER,
        });
    }
    Ok(())
}

/// Closed-form `Ĵ_r` from cumulants `κ̂_1..κ̂_r` (extra entries are ignored).
pub fn j_closed_form(cumulants: &[f64], r: usize) -> Result<JrPolynomial> {
    check_order(r)?;
    if cumulants.len() < r {
        return Err(invalid(format!(
            "order-{r} polynomial needs {r} cumulants, got {}",
            cumulants.len()
        )));
    }
    let kappa = &cumulants[..r];
    let coeffs = (1..=r + 1)
        .map(|i| {
            let m = r + 1 - i;
            let sum = partition_weighted_sum(m, kappa, BlockSign::Alternating)?;
            Ok(sum / (factorial(i - 1) * factorial(m)))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JrPolynomial {
        order: r,
        poly: Polynomial(coeffs),
        cumulants_used: kappa.to_vec(),
    })
}

/// `J_r` by repeated integrate-and-centre from `J_1(w) = w − μ_1`, taking
/// expectations with the given raw moments `μ_1..μ_r`.
pub fn j_recursive(moments: &MomentSequence, r: usize) -> Result<JrPolynomial> {
    check_order(r)?;
    if moments.max_order() < r {
        return Err(invalid(format!(
            "order-{r} recursion needs {r} moments, got {}",
            moments.max_order()
        )));
    }
    let mut poly = Polynomial(vec![-moments.get(1), 1.0]);
    for _ in 2..=r {
        let mut next = poly.integral();
        let centre = next.expectation(moments)?;
        next.0[0] -= centre;
        poly = next;
    }
    Ok(JrPolynomial {
        order: r,
        poly,
        cumulants_used: Vec::new(),
    })
}

/// `d^k/dw^k Ĵ_r`; `k` may not exceed `r + 1`.
pub fn j_derivative(p: &JrPolynomial, k: usize) -> Result<Polynomial> {
    if k > p.order + 1 {
        return Err(invalid(format!(
            "derivative order {k} exceeds r + 1 = {}",
            p.order + 1
        )));
    }
    Ok(p.poly.derivative(k))
}

pub fn j_eval(p: &JrPolynomial, w: f64) -> Result<f64> {
    if !w.is_finite() {
        return Err(invalid(format!("cannot evaluate at non-finite point {w}")));
    }
    Ok(p.eval(w))
}

pub fn j_eval_batch(p: &JrPolynomial, w: &[f64]) -> Result<Vec<f64>> {
    w.iter().map(|&v| j_eval(p, v)).collect()
}

/// `(1/m!) Σ_{π ∈ Π_m} Π_{B ∈ π} (κ_{|B|} − κ̂_{|B|})`.
pub fn insensitivity_rhs(kappa: &[f64], kappa_hat: &[f64], m: usize) -> Result<f64> {
    if kappa.len() < m || kappa_hat.len() < m {
        return Err(invalid(format!(
            "need cumulants up to order {m}, got {} and {}",
            kappa.len(),
            kappa_hat.len()
        )));
    }
    let diff: Vec<f64> = kappa[..m]
        .iter()
        .zip(&kappa_hat[..m])
        .map(|(a, b)| a - b)
        .collect();
    Ok(partition_weighted_sum(m, &diff, BlockSign::Unsigned)? / factorial(m))
}

/// `E[Ĵ_r^{(k)}(η)] = Σ_{i=k}^{r} i!/(i−k)! · â_{i+1} · μ_{i−k}` under the
/// given raw moments of `η`.
pub fn expected_j_derivative(
    p: &JrPolynomial,
    true_moments: &MomentSequence,
    k: usize,
) -> Result<f64> {
    j_derivative(p, k)?.expectation(true_moments)
}

/// `E[η Ĵ_r(η)]`, the population identification coefficient.
pub fn identification_value(p: &JrPolynomial, moments: &MomentSequence) -> Result<f64> {
    let mut shifted = vec![0.0];
    shifted.extend_from_slice(p.coeffs());
    Polynomial(shifted).expectation(moments)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cumulants::{cumulants_to_moments, moments_to_cumulants};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn second_order_closed_form() {
        let s2 = 1.7;
        let j = j_closed_form(&[0.0, s2], 2).unwrap();
        assert!(close(j.coeffs(), &[-s2 / 2.0, 0.0, 0.5], 1e-15));

        let (k1, k2) = (0.4, 1.3);
        let j = j_closed_form(&[k1, k2], 2).unwrap();
        assert!(close(
            j.coeffs(),
            &[(k1 * k1 - k2) / 2.0, -k1, 0.5],
            1e-15
        ));
    }

    #[test]
    fn third_order_closed_form() {
        let (m2, m3) = (1.0, -2.4);
        let j = j_closed_form(&[0.0, m2, m3], 3).unwrap();
        assert!(close(
            j.coeffs(),
            &[-m3 / 6.0, -m2 / 2.0, 0.0, 1.0 / 6.0],
            1e-15
        ));
        // value at the origin is −μ3/6
        assert!((j_eval(&j, 0.0).unwrap() - 0.4).abs() < 1e-15);
    }

    #[test]
    fn fourth_order_matches_explicit_moment_form() {
        // 24·Ĵ_4(w) = w⁴ − 6μ2 w² − 4μ3 w − (μ4 − 6μ2²) for a centred law
        let mu = [0.0, 1.3, -0.7, 4.9];
        let kappa = moments_to_cumulants(&MomentSequence::exact(mu.to_vec()).unwrap());
        let j = j_closed_form(&kappa.values, 4).unwrap();
        let expect: Vec<f64> = [
            -(mu[3] - 6.0 * mu[1] * mu[1]),
            -4.0 * mu[2],
            -6.0 * mu[1],
            0.0,
            1.0,
        ]
        .iter()
        .map(|c| c / 24.0)
        .collect();
        assert!(close(j.coeffs(), &expect, 1e-14));
    }

    #[test]
    fn leading_coefficient() {
        for r in 1..=MAX_ORDER {
            let j = j_closed_form(&vec![0.3; r], r).unwrap();
            assert_eq!(*j.coeffs().last().unwrap(), 1.0 / factorial(r));
            assert_eq!(j.coeffs().len(), r + 1);
        }
    }

    #[test]
    fn recursion_examples() {
        let j = j_recursive(&MomentSequence::exact(vec![0.0, 2.0]).unwrap(), 2).unwrap();
        assert!(close(j.coeffs(), &[-1.0, 0.0, 0.5], 1e-15));
        let j = j_recursive(&MomentSequence::exact(vec![0.7]).unwrap(), 1).unwrap();
        assert!(close(j.coeffs(), &[-0.7, 1.0], 1e-15));
    }

    #[test]
    fn recursion_matches_closed_form_on_demand_law() {
        let kappa = [0.0, 1.0, -2.4, 5.05];
        let mu = cumulants_to_moments(&kappa).unwrap();
        let rec = j_recursive(&mu, 4).unwrap();
        let closed = j_closed_form(&moments_to_cumulants(&mu).values, 4).unwrap();
        assert!(close(rec.coeffs(), closed.coeffs(), 1e-12));
    }

    #[test]
    fn order_validation() {
        assert!(matches!(j_closed_form(&[], 0), Err(AceError::Capacity { .. })));
        assert!(j_closed_form(&[0.0; 9], 9).is_err());
        assert!(j_closed_form(&[0.0, 1.0], 3).is_err());
        assert!(j_recursive(&MomentSequence::exact(vec![0.0]).unwrap(), 2).is_err());
    }

    #[test]
    fn derivatives() {
        let j2 = j_closed_form(&[0.0, 1.0], 2).unwrap();
        assert!(close(j_derivative(&j2, 1).unwrap().coeffs(), &[0.0, 1.0], 0.0));
        assert_eq!(j_derivative(&j2, 0).unwrap(), *j2.polynomial());
        assert_eq!(j_derivative(&j2, 3).unwrap().coeffs(), &[0.0]);
        assert!(j_derivative(&j2, 4).is_err());

        let j3 = j_closed_form(&[0.0, 1.2, -0.5], 3).unwrap();
        assert!(close(j_derivative(&j3, 2).unwrap().coeffs(), &[0.0, 1.0], 1e-15));
    }

    #[test]
    fn evaluation() {
        let j2 = j_closed_form(&[0.0, 1.0], 2).unwrap();
        assert_eq!(j_eval(&j2, 1.0).unwrap(), 0.0);
        assert!(j_eval(&j2, f64::NAN).is_err());
        assert!(j_eval(&j2, f64::INFINITY).is_err());
        assert_eq!(j_eval_batch(&j2, &[1.0, 3.0]).unwrap(), vec![0.0, 4.0]);
    }

    #[test]
    fn insensitivity_examples() {
        let k = [0.2, 1.1, -0.3];
        for m in 1..=3 {
            assert_eq!(insensitivity_rhs(&k, &k, m).unwrap(), 0.0);
        }
        assert_eq!(insensitivity_rhs(&k, &[0.5, 0.0, 0.0], 1).unwrap(), 0.2 - 0.5);
        assert_eq!(insensitivity_rhs(&[], &[], 0).unwrap(), 1.0);
        assert!(insensitivity_rhs(&k, &k[..1], 2).is_err());
    }

    #[test]
    fn expected_derivative_examples() {
        let kappa = [0.0, 1.0];
        let mu = cumulants_to_moments(&kappa).unwrap();
        let j2 = j_closed_form(&kappa, 2).unwrap();
        for k in 0..=1 {
            assert!(expected_j_derivative(&j2, &mu, k).unwrap().abs() < 1e-15);
        }
        // κ̂1 ≠ κ1: E[Ĵ_2'(η)] = κ1 − κ̂1
        let kappa = [0.3, 1.0];
        let mu = cumulants_to_moments(&kappa).unwrap();
        let j2 = j_closed_form(&[-0.2, 1.0], 2).unwrap();
        assert!((expected_j_derivative(&j2, &mu, 1).unwrap() - 0.5).abs() < 1e-15);
        // k = r: leading term only
        let j5 = j_closed_form(&[0.1, 0.9, 0.4, -0.3, 0.2], 5).unwrap();
        let mu = cumulants_to_moments(&[0.0; 5]).unwrap();
        let lhs = expected_j_derivative(&j5, &mu, 5).unwrap();
        assert!((lhs - 1.0).abs() < 1e-13);
        assert_eq!(insensitivity_rhs(&[], &[], 0).unwrap(), 1.0);
    }

    #[test]
    fn identification_on_demand_law() {
        let kappa = [0.0, 1.0, -2.4, 5.05];
        let mu = cumulants_to_moments(&kappa).unwrap();
        let j3 = j_closed_form(&kappa, 3).unwrap();
        let delta = identification_value(&j3, &mu).unwrap();
        assert!((delta - 5.05 / 6.0).abs() < 1e-12);
    }

    #[test]
    fn scaling_and_expectation_guard() {
        let j = j_closed_form(&[0.0, 1.0], 2).unwrap();
        assert_eq!(j.scaled(2.0).coeffs(), &[-1.0, 0.0, 1.0]);
        let short = MomentSequence::exact(vec![0.0]).unwrap();
        assert!(j.polynomial().expectation(&short).is_err());
    }
}
