//! Validated Student-t parameters and the constants derived from them.
//!
//! A Student-t member of the power-law family of order `alpha` in `d` dimensions
//! has density
//!
//! ```text
//! p(x) = N * [1 + b * (x - mu)' Sigma^{-1} (x - mu)]_+^{1/(alpha - 1)}
//! b    = (1 - alpha) / (2 alpha - d (1 - alpha))
//! ```
//!
//! where `Sigma` is the covariance. For `alpha < 1` the support is all of `R^d`
//! and the law is a classical multivariate t with `nu = 2/(1 - alpha) - d` degrees
//! of freedom; for `alpha > 1` the support is the ellipsoid
//! `(x - mu)' Sigma^{-1} (x - mu) <= -1/b`.

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};
use statrs::function::gamma::ln_gamma;
use std::f64::consts::PI;

use crate::error::{Error, Result};

const SYMMETRY_TOL: f64 = 1e-10;
const EIGEN_RATIO_TOL: f64 = 1e-12;

/// Order of the divergence and of the power-law family, tied to a dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaOrder {
    alpha: f64,
    dim: usize,
}

impl AlphaOrder {
    /// Accepts any `alpha > 0`, `alpha != 1`.
    pub fn new(alpha: f64, dim: usize) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ZeroDimension);
        }
        if !alpha.is_finite() || alpha <= 0.0 {
            return Err(Error::AlphaNotPositive(alpha));
        }
        if alpha == 1.0 {
            return Err(Error::AlphaIsOne);
        }
        Ok(Self { alpha, dim })
    }

    /// Additionally enforces `alpha > d/(d+2)`, below which the Student-t bracket
    /// is not integrable.
    pub fn student_t(alpha: f64, dim: usize) -> Result<Self> {
        let order = Self::new(alpha, dim)?;
        let d = dim as f64;
        if (d + 2.0) * alpha - d <= 0.0 {
            return Err(Error::AlphaBelowStudentBound {
                alpha,
                dim,
                bound: d / (d + 2.0),
            });
        }
        Ok(order)
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Exponent `1/(alpha - 1)` applied to the bracket.
    pub fn exponent(&self) -> f64 {
        1.0 / (self.alpha - 1.0)
    }

    pub fn is_compact(&self) -> bool {
        self.alpha > 1.0
    }

    /// `b = (1 - alpha) / (2 alpha - d (1 - alpha))`.
    pub fn b_alpha(&self) -> f64 {
        let d = self.dim as f64;
        (1.0 - self.alpha) / (2.0 * self.alpha - d * (1.0 - self.alpha))
    }

    /// Degrees of freedom `2/(1 - alpha) - d`; only defined on the heavy-tailed
    /// branch `alpha < 1`.
    pub fn degrees_of_freedom(&self) -> Option<f64> {
        (self.alpha < 1.0).then(|| 2.0 / (1.0 - self.alpha) - self.dim as f64)
    }
}

/// Where a Student-t density is positive.
#[derive(Debug, Clone, PartialEq)]
pub enum Support {
    AllSpace,
    /// `{x : (x - center)' shape (x - center) <= radius_sq}` with `shape = Sigma^{-1}`.
    Ellipsoid {
        center: DVector<f64>,
        shape: DMatrix<f64>,
        radius_sq: f64,
    },
}

impl Support {
    pub fn contains(&self, x: &DVector<f64>) -> bool {
        match self {
            Support::AllSpace => true,
            Support::Ellipsoid {
                center,
                shape,
                radius_sq,
            } => {
                let u = x - center;
                u.dot(&(shape * &u)) <= *radius_sq
            }
        }
    }

    pub fn is_bounded(&self) -> bool {
        matches!(self, Support::Ellipsoid { .. })
    }
}

/// Checks symmetry and positive definiteness, returning the symmetrized matrix.
pub(crate) fn validate_covariance(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !sigma.is_square() {
        return Err(Error::NotSquare {
            rows: sigma.nrows(),
            cols: sigma.ncols(),
        });
    }
    if sigma.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("covariance"));
    }
    let scale = sigma.norm();
    let deviation = (sigma - sigma.transpose()).amax();
    if deviation > SYMMETRY_TOL * scale {
        return Err(Error::NotSymmetric { deviation });
    }
    let sym = (sigma + sigma.transpose()) * 0.5;
    let eigen = SymmetricEigen::new(sym.clone());
    let max = eigen.eigenvalues.max();
    let min = eigen.eigenvalues.min();
    if max <= 0.0 || min <= EIGEN_RATIO_TOL * max {
        let ratio = if max > 0.0 {
            min / max
        } else {
            f64::NEG_INFINITY
        };
        return Err(Error::NotPositiveDefinite { ratio });
    }
    Ok(sym)
}

/// `log of the integral over R^d of [1 + b Q(x)]_+^e`, with `Q` the Mahalanobis
/// form of a covariance whose log-determinant is `log_det`.
///
/// For `b > 0` this needs `-e > d/2`; for `b < 0` it needs `e > -1`.
pub(crate) fn log_bracket_integral(b: f64, log_det: f64, dim: usize, exponent: f64) -> f64 {
    let half_d = dim as f64 / 2.0;
    let base = half_d * PI.ln() + 0.5 * log_det;
    if b > 0.0 {
        base - half_d * b.ln() + ln_gamma(-exponent - half_d) - ln_gamma(-exponent)
    } else {
        base - half_d * (-b).ln() + ln_gamma(exponent + 1.0) - ln_gamma(exponent + 1.0 + half_d)
    }
}

/// Fully validated `(alpha, mu, Sigma)` with cached inverse and normalizer.
#[derive(Debug, Clone)]
pub struct StudentTParams {
    order: AlphaOrder,
    mu: DVector<f64>,
    sigma: DMatrix<f64>,
    precision: DMatrix<f64>,
    chol_lower: DMatrix<f64>,
    log_det: f64,
    log_norm: f64,
}

impl StudentTParams {
    pub fn new(alpha: f64, mu: DVector<f64>, sigma: DMatrix<f64>) -> Result<Self> {
        let dim = mu.len();
        let order = AlphaOrder::student_t(alpha, dim)?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("location"));
        }
        if sigma.nrows() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: sigma.nrows(),
            });
        }
        let sigma = validate_covariance(&sigma)?;
        let chol = Cholesky::new(sigma.clone()).ok_or(Error::NotPositiveDefinite { ratio: 0.0 })?;
        let chol_lower = chol.l();
        let log_det = 2.0 * chol_lower.diagonal().iter().map(|v| v.ln()).sum::<f64>();
        let precision = chol.inverse();
        let precision = (&precision + precision.transpose()) * 0.5;
        let log_norm = -log_bracket_integral(order.b_alpha(), log_det, dim, order.exponent());
        Ok(Self {
            order,
            mu,
            sigma,
            precision,
            chol_lower,
            log_det,
            log_norm,
        })
    }

    /// Univariate convenience constructor; `variance` is `sigma^2`.
    pub fn univariate(alpha: f64, mean: f64, variance: f64) -> Result<Self> {
        Self::new(
            alpha,
            DVector::from_element(1, mean),
            DMatrix::from_element(1, 1, variance),
        )
    }

    pub fn order(&self) -> AlphaOrder {
        self.order
    }

    pub fn alpha(&self) -> f64 {
        self.order.alpha()
    }

    pub fn dim(&self) -> usize {
        self.order.dim()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn sigma(&self) -> &DMatrix<f64> {
        &self.sigma
    }

    /// `Sigma^{-1}`.
    pub fn precision(&self) -> &DMatrix<f64> {
        &self.precision
    }

    /// Lower Cholesky factor of `Sigma`.
    pub fn chol_lower(&self) -> &DMatrix<f64> {
        &self.chol_lower
    }

    pub fn log_det_sigma(&self) -> f64 {
        self.log_det
    }

    pub fn b_alpha(&self) -> f64 {
        self.order.b_alpha()
    }

    pub fn nu(&self) -> Option<f64> {
        self.order.degrees_of_freedom()
    }

    pub fn norm_const(&self) -> f64 {
        self.log_norm.exp()
    }

    pub fn log_norm_const(&self) -> f64 {
        self.log_norm
    }

    pub fn support(&self) -> Support {
        if self.order.is_compact() {
            Support::Ellipsoid {
                center: self.mu.clone(),
                shape: self.precision.clone(),
                radius_sq: -1.0 / self.b_alpha(),
            }
        } else {
            Support::AllSpace
        }
    }

    /// `(x - mu)' Sigma^{-1} (x - mu)`.
    pub fn mahalanobis_sq(&self, x: &DVector<f64>) -> f64 {
        let u = x - &self.mu;
        u.dot(&(&self.precision * &u))
    }

    /// `log of the integral of p^alpha`, closed form in any dimension.
    pub fn log_power_integral(&self) -> f64 {
        let alpha = self.alpha();
        alpha * self.log_norm
            + log_bracket_integral(
                self.b_alpha(),
                self.log_det,
                self.dim(),
                alpha / (alpha - 1.0),
            )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn alpha_domain_errors_are_distinct() {
        assert_eq!(AlphaOrder::new(1.0, 1), Err(Error::AlphaIsOne));
        assert!(matches!(
            AlphaOrder::new(-0.5, 1),
            Err(Error::AlphaNotPositive(_))
        ));
        assert!(matches!(
            AlphaOrder::student_t(1.0 / 3.0, 1),
            Err(Error::AlphaBelowStudentBound { .. })
        ));
        assert!(matches!(
            AlphaOrder::student_t(0.5, 2),
            Err(Error::AlphaBelowStudentBound { .. })
        ));
        assert!(AlphaOrder::student_t(0.51, 2).is_ok());
    }

    #[test]
    fn alpha_two_univariate_constants() {
        let p = StudentTParams::univariate(2.0, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.b_alpha(), -0.2, epsilon = 1e-15);
        assert_relative_eq!(
            p.norm_const(),
            3.0 / (4.0 * 5f64.sqrt()),
            max_relative = 1e-13
        );
        assert_relative_eq!(p.norm_const(), 0.335410, epsilon = 1e-6);
        match p.support() {
            Support::Ellipsoid { radius_sq, .. } => assert_relative_eq!(radius_sq, 5.0),
            Support::AllSpace => panic!("alpha = 2 must have compact support"),
        }
        assert!(p.nu().is_none());
    }

    #[test]
    fn alpha_half_univariate_constants() {
        let p = StudentTParams::univariate(0.5, 0.0, 1.0).unwrap();
        assert_relative_eq!(p.b_alpha(), 1.0);
        assert_relative_eq!(p.nu().unwrap(), 3.0);
        assert_eq!(p.support(), Support::AllSpace);
        let shifted = StudentTParams::univariate(0.5, 5.0, 1.0).unwrap();
        assert_eq!(shifted.b_alpha(), p.b_alpha());
        assert_eq!(shifted.nu(), p.nu());
        assert_eq!(shifted.norm_const(), p.norm_const());
    }

    #[test]
    fn rejects_bad_covariances() {
        let mu = DVector::zeros(2);
        let asym = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]);
        assert!(matches!(
            StudentTParams::new(0.8, mu.clone(), asym),
            Err(Error::NotSymmetric { .. })
        ));
        let indefinite = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(
            StudentTParams::new(0.8, mu.clone(), indefinite),
            Err(Error::NotPositiveDefinite { .. })
        ));
        let wrong = DMatrix::identity(3, 3);
        assert!(matches!(
            StudentTParams::new(0.8, mu, wrong),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn tolerates_serialization_noise() {
        let mu = DVector::zeros(2);
        let sigma = DMatrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3 + 1e-14, 1.0]);
        let p = StudentTParams::new(0.8, mu, sigma).unwrap();
        assert_eq!(p.sigma()[(0, 1)], p.sigma()[(1, 0)]);
    }

    #[test]
    fn sign_of_b_follows_one_minus_alpha() {
        for d in 1..=4 {
            let lo = d as f64 / (d as f64 + 2.0);
            for i in 1..50 {
                let alpha = lo + (1.0 - lo) * i as f64 / 50.0;
                let o = AlphaOrder::student_t(alpha, d).unwrap();
                assert!(o.b_alpha() > 0.0);
                assert!(o.degrees_of_freedom().unwrap() > 2.0);
                // b = 1/(nu - 2) ties the bracket to the classical t with covariance Sigma.
                assert_relative_eq!(
                    o.b_alpha(),
                    1.0 / (o.degrees_of_freedom().unwrap() - 2.0),
                    max_relative = 1e-10
                );
            }
            for alpha in [1.01, 1.5, 2.0, 5.0] {
                assert!(AlphaOrder::student_t(alpha, d).unwrap().b_alpha() < 0.0);
            }
        }
    }

    #[test]
    fn normalizer_approaches_gaussian_near_one() {
        let gauss = 1.0 / (2.0 * PI * 2.5f64).sqrt();
        for alpha in [1.0 - 1e-3, 1.0 + 1e-3] {
            let p = StudentTParams::univariate(alpha, 0.0, 2.5).unwrap();
            assert!((p.norm_const() - gauss).abs() < 1e-3, "alpha {alpha}");
        }
    }

    #[test]
    fn power_integral_at_alpha_two() {
        let p = StudentTParams::univariate(2.0, 1.3, 1.0).unwrap();
        let n2 = p.norm_const();
        assert_relative_eq!(
            p.log_power_integral(),
            (4.0 * n2 / 5.0).ln(),
            max_relative = 1e-12
        );
    }
}
