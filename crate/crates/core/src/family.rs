//! Abstract descriptors for the two families the estimating equations work on.
//!
//! A power-law family of order `alpha` has densities
//! `Z(theta)^{-1} [q(x)^{alpha-1} + w(theta)' f(x)]_+^{1/(alpha-1)}`; an
//! exponential family has densities `exp[q(x) + Z(theta) + w(theta)' f(x)]`.
//! Both are described by the maps `w` (with its `s x k` Jacobian) and `f`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// A `k`-parameter power-law family with `s` statistics.
pub trait MAlphaFamily {
    fn alpha(&self) -> f64;
    /// `k`
    fn param_count(&self) -> usize;
    /// `s`
    fn stat_count(&self) -> usize;
    fn data_dim(&self) -> usize;
    fn q(&self, x: &DVector<f64>) -> f64;
    fn w(&self, theta: &DVector<f64>) -> DVector<f64>;
    fn f(&self, x: &DVector<f64>) -> DVector<f64>;
    /// The normalizer `Z(theta)`.
    fn z(&self, theta: &DVector<f64>) -> f64;
    /// `s x k` matrix of `d w_i / d theta_r`.
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64>;

    /// `q^{alpha-1} + w' f`, the quantity raised to `1/(alpha-1)`.
    fn bracket(&self, theta: &DVector<f64>, x: &DVector<f64>) -> f64 {
        self.q(x).powf(self.alpha() - 1.0) + self.w(theta).dot(&self.f(x))
    }

    /// Density rebuilt from the descriptor.
    fn density(&self, theta: &DVector<f64>, x: &DVector<f64>) -> f64 {
        let b = self.bracket(theta, x);
        if b <= 0.0 {
            return 0.0;
        }
        b.powf(1.0 / (self.alpha() - 1.0)) / self.z(theta)
    }
}

/// A `k`-parameter exponential family with `s` statistics.
pub trait ExponentialFamily {
    fn param_count(&self) -> usize;
    fn stat_count(&self) -> usize;
    fn f(&self, x: &DVector<f64>) -> DVector<f64>;
    fn w(&self, theta: &DVector<f64>) -> DVector<f64>;
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64>;
    /// `E_theta[f(X)]`.
    fn mean_statistics(&self, theta: &DVector<f64>) -> DVector<f64>;
}

type ScalarFn = Box<dyn Fn(&DVector<f64>) -> f64 + Send + Sync>;
type VectorFn = Box<dyn Fn(&DVector<f64>) -> DVector<f64> + Send + Sync>;
type MatrixFn = Box<dyn Fn(&DVector<f64>) -> DMatrix<f64> + Send + Sync>;

/// A power-law family assembled from closures.
pub struct CustomFamily {
    pub alpha: f64,
    pub param_count: usize,
    pub stat_count: usize,
    pub data_dim: usize,
    pub q: ScalarFn,
    pub w: VectorFn,
    pub f: VectorFn,
    pub z: ScalarFn,
    pub w_jacobian: MatrixFn,
}

impl std::fmt::Debug for CustomFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("CustomFamily")
            .field("alpha", &self.alpha)
            .field("param_count", &self.param_count)
            .field("stat_count", &self.stat_count)
            .field("data_dim", &self.data_dim)
            .finish_non_exhaustive()
    }
}

impl MAlphaFamily for CustomFamily {
    fn alpha(&self) -> f64 {
        self.alpha
    }
    fn param_count(&self) -> usize {
        self.param_count
    }
    fn stat_count(&self) -> usize {
        self.stat_count
    }
    fn data_dim(&self) -> usize {
        self.data_dim
    }
    fn q(&self, x: &DVector<f64>) -> f64 {
        (self.q)(x)
    }
    fn w(&self, theta: &DVector<f64>) -> DVector<f64> {
        (self.w)(theta)
    }
    fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        (self.f)(x)
    }
    fn z(&self, theta: &DVector<f64>) -> f64 {
        (self.z)(theta)
    }
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        (self.w_jacobian)(theta)
    }
}

/// The univariate normal law in exponential-family form, `theta = (mu, sigma^2)`,
/// `w = (mu/sigma^2, -1/(2 sigma^2))`, `f = (x, x^2)`.
#[derive(Debug, Clone, Copy, Default)]
pub struct GaussianFamily;

impl ExponentialFamily for GaussianFamily {
    fn param_count(&self) -> usize {
        2
    }
    fn stat_count(&self) -> usize {
        2
    }
    fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![x[0], x[0] * x[0]])
    }
    fn w(&self, theta: &DVector<f64>) -> DVector<f64> {
        let (mu, v) = (theta[0], theta[1]);
        DVector::from_vec(vec![mu / v, -0.5 / v])
    }
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let (mu, v) = (theta[0], theta[1]);
        DMatrix::from_row_slice(2, 2, &[1.0 / v, -mu / (v * v), 0.0, 0.5 / (v * v)])
    }
    fn mean_statistics(&self, theta: &DVector<f64>) -> DVector<f64> {
        let (mu, v) = (theta[0], theta[1]);
        DVector::from_vec(vec![mu, v + mu * mu])
    }
}

/// Threshold on the reciprocal condition number of the Jacobian below which it
/// is treated as singular.
pub const REGULARITY_RCOND_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityFailure {
    pub probe: usize,
    pub determinant: f64,
    pub rcond: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegularityReport {
    pub regular: bool,
    pub probes: usize,
    pub failures: Vec<RegularityFailure>,
}

/// Reciprocal 2-norm condition number, 0 for a singular matrix.
pub(crate) fn rcond(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().singular_values();
    let max = sv.max();
    if max == 0.0 {
        0.0
    } else {
        sv.min() / max
    }
}

/// Checks that `w`'s Jacobian is square and nonsingular at every probe.
pub fn validate_regular<F: MAlphaFamily + ?Sized>(
    family: &F,
    probe_thetas: &[DVector<f64>],
) -> Result<RegularityReport> {
    let (k, s) = (family.param_count(), family.stat_count());
    if s != k {
        return Err(Error::DimensionMismatch {
            expected: k,
            got: s,
        });
    }
    let mut failures = Vec::new();
    for (probe, theta) in probe_thetas.iter().enumerate() {
        if theta.len() != k {
            return Err(Error::DimensionMismatch {
                expected: k,
                got: theta.len(),
            });
        }
        let jac = family.w_jacobian(theta);
        let rc = rcond(&jac);
        if !(rc > REGULARITY_RCOND_TOL) {
            failures.push(RegularityFailure {
                probe,
                determinant: jac.determinant(),
                rcond: rc,
            });
        }
    }
    Ok(RegularityReport {
        regular: failures.is_empty(),
        probes: probe_thetas.len(),
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn linear_family(k: usize, w: VectorFn, jac: MatrixFn) -> CustomFamily {
        CustomFamily {
            alpha: 0.5,
            param_count: k,
            stat_count: k,
            data_dim: 1,
            q: Box::new(|_| 1.0),
            w,
            f: Box::new(move |x| DVector::from_fn(k, |i, _| x[0].powi(i as i32 + 1))),
            z: Box::new(|_| 1.0),
            w_jacobian: jac,
        }
    }

    #[test]
    fn identity_family_is_regular() {
        let fam = linear_family(
            1,
            Box::new(|t| t.clone()),
            Box::new(|_| DMatrix::identity(1, 1)),
        );
        let probes: Vec<_> = [-2.0, 0.0, 3.5]
            .iter()
            .map(|&t| DVector::from_element(1, t))
            .collect();
        let report = validate_regular(&fam, &probes).unwrap();
        assert!(report.regular);
        assert_eq!(report.probes, 3);
    }

    #[test]
    fn dependent_rows_are_not_regular() {
        // w2 = 2 w1
        let fam = linear_family(
            2,
            Box::new(|t| DVector::from_vec(vec![t[0] + t[1], 2.0 * (t[0] + t[1])])),
            Box::new(|_| DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 2.0, 2.0])),
        );
        let report = validate_regular(&fam, &[DVector::from_vec(vec![0.3, 0.1])]).unwrap();
        assert!(!report.regular);
        assert_eq!(report.failures.len(), 1);
        assert_eq!(report.failures[0].probe, 0);
    }

    #[test]
    fn non_square_descriptor_is_rejected() {
        let mut fam = linear_family(
            2,
            Box::new(|t| t.clone()),
            Box::new(|_| DMatrix::identity(2, 2)),
        );
        fam.stat_count = 3;
        assert!(matches!(
            validate_regular(&fam, &[DVector::zeros(2)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn gaussian_jacobian_matches_finite_differences() {
        let g = GaussianFamily;
        let theta = DVector::from_vec(vec![0.7, 1.9]);
        let jac = g.w_jacobian(&theta);
        let h = 1e-6;
        for r in 0..2 {
            let mut tp = theta.clone();
            let mut tm = theta.clone();
            tp[r] += h;
            tm[r] -= h;
            let fd = (g.w(&tp) - g.w(&tm)) / (2.0 * h);
            for i in 0..2 {
                assert!((fd[i] - jac[(i, r)]).abs() < 1e-8);
            }
        }
    }
}
