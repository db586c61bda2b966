//! Sufficient statistics, residuals of the estimating equations and the
//! closed-form Student-t estimator.
//!
//! Residuals are "population side minus sample side", one entry per equation.
//! A root of the estimating equation is a `theta` where the residual vanishes.

use nalgebra::{DMatrix, DVector};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::family::{rcond, ExponentialFamily, MAlphaFamily};
use crate::params::{AlphaOrder, StudentTParams};
use crate::studentt::{pack_theta, StudentTRegularFamily};

/// Below this reciprocal condition number a covariance estimate is flagged.
pub const SINGULAR_RCOND_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStats {
    /// `X-bar`
    pub mean_x: DVector<f64>,
    /// `(1/n) sum_l X_l X_l'`
    pub mean_xxt: DMatrix<f64>,
    /// `f-bar`
    pub mean_f: DVector<f64>,
    /// `(1/n) sum_l q(X_l)^(alpha-1)`
    pub mean_q_pow: f64,
}

pub fn sufficient_stats<F: MAlphaFamily + ?Sized>(
    batch: &SampleBatch,
    family: &F,
    alpha: f64,
) -> Result<SufficientStats> {
    if batch.dim() != family.data_dim() {
        return Err(Error::DimensionMismatch {
            expected: family.data_dim(),
            got: batch.dim(),
        });
    }
    let n = batch.len() as f64;
    let mut mean_f = DVector::zeros(family.stat_count());
    let mut mean_q_pow = 0.0;
    for x in batch.observations() {
        mean_f += family.f(&x);
        mean_q_pow += family.q(&x).powf(alpha - 1.0);
    }
    Ok(SufficientStats {
        mean_x: batch.mean(),
        mean_xxt: batch.second_moment(),
        mean_f: mean_f / n,
        mean_q_pow: mean_q_pow / n,
    })
}

/// `f-bar` for an exponential family.
pub fn exponential_stats<F: ExponentialFamily + ?Sized>(
    batch: &SampleBatch,
    family: &F,
) -> DVector<f64> {
    let mut acc = DVector::zeros(family.stat_count());
    for x in batch.observations() {
        acc += family.f(&x);
    }
    acc / batch.len() as f64
}

/// `E_theta[f(X)]` and `E_theta[q(X)^(alpha-1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationMoments {
    pub mean_f: DVector<f64>,
    pub mean_q_pow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EstimatingEquation {
    /// `dw_r' E[f] = dw_r' f-bar`
    GeneralExponential,
    /// `dw_r' E[f] / E[q^(a-1) + w'f] = dw_r' f-bar / (q-bar + w' f-bar)`
    GeneralMAlpha,
    /// `E[f] = f-bar`
    RegularExponential,
    /// `E[f] / E[q^(a-1)] = f-bar / q-bar`
    RegularMAlpha,
}

impl EstimatingEquation {
    pub fn name(&self) -> &'static str {
        match self {
            EstimatingEquation::GeneralExponential => "general-exponential",
            EstimatingEquation::GeneralMAlpha => "general-malpha",
            EstimatingEquation::RegularExponential => "regular-exponential",
            EstimatingEquation::RegularMAlpha => "regular-malpha",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualReport {
    pub residuals: DVector<f64>,
    pub norm: f64,
    pub equation: EstimatingEquation,
}

impl ResidualReport {
    fn new(residuals: DVector<f64>, equation: EstimatingEquation) -> Self {
        let norm = residuals.norm();
        Self {
            residuals,
            norm,
            equation,
        }
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

/// Residual of the regular power-law equation `E[f]/E[q^(a-1)] - f-bar/q-bar`.
pub fn residual_regular_malpha<F: MAlphaFamily + ?Sized>(
    family: &F,
    theta: &DVector<f64>,
    stats: &SufficientStats,
    pop: &PopulationMoments,
) -> Result<ResidualReport> {
    check_len(family.param_count(), family.stat_count())?;
    check_len(family.param_count(), theta.len())?;
    check_len(family.stat_count(), stats.mean_f.len())?;
    check_len(family.stat_count(), pop.mean_f.len())?;
    if pop.mean_q_pow == 0.0 {
        return Err(Error::DegenerateStatistics("E[q^(alpha-1)]"));
    }
    if stats.mean_q_pow == 0.0 {
        return Err(Error::DegenerateStatistics("sample mean of q^(alpha-1)"));
    }
    let r = &pop.mean_f / pop.mean_q_pow - &stats.mean_f / stats.mean_q_pow;
    Ok(ResidualReport::new(r, EstimatingEquation::RegularMAlpha))
}

/// Residual of the general power-law equation, one entry per parameter.
pub fn residual_general_malpha<F: MAlphaFamily + ?Sized>(
    family: &F,
    theta: &DVector<f64>,
    stats: &SufficientStats,
    pop: &PopulationMoments,
) -> Result<ResidualReport> {
    check_len(family.param_count(), theta.len())?;
    check_len(family.stat_count(), stats.mean_f.len())?;
    check_len(family.stat_count(), pop.mean_f.len())?;
    let w = family.w(theta);
    let jac = family.w_jacobian(theta);
    let pop_denom = pop.mean_q_pow + w.dot(&pop.mean_f);
    let sample_denom = stats.mean_q_pow + w.dot(&stats.mean_f);
    if pop_denom == 0.0 {
        return Err(Error::DegenerateStatistics("E[q^(alpha-1) + w'f]"));
    }
    if sample_denom == 0.0 {
        return Err(Error::DegenerateStatistics("q-bar + w' f-bar"));
    }
    let r = jac.tr_mul(&pop.mean_f) / pop_denom - jac.tr_mul(&stats.mean_f) / sample_denom;
    Ok(ResidualReport::new(r, EstimatingEquation::GeneralMAlpha))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExponentialForm {
    General,
    Regular,
}

/// Residual of the likelihood equation on an exponential family.
pub fn residual_exponential<F: ExponentialFamily + ?Sized>(
    family: &F,
    theta: &DVector<f64>,
    sample_mean_f: &DVector<f64>,
    pop_mean_f: &DVector<f64>,
    form: ExponentialForm,
) -> Result<ResidualReport> {
    check_len(family.param_count(), theta.len())?;
    check_len(family.stat_count(), sample_mean_f.len())?;
    check_len(family.stat_count(), pop_mean_f.len())?;
    let diff = pop_mean_f - sample_mean_f;
    Ok(match form {
        ExponentialForm::Regular => {
            check_len(family.param_count(), family.stat_count())?;
            ResidualReport::new(diff, EstimatingEquation::RegularExponential)
        }
        ExponentialForm::General => ResidualReport::new(
            family.w_jacobian(theta).tr_mul(&diff),
            EstimatingEquation::GeneralExponential,
        ),
    })
}

/// Closed-form estimate of a heavy-tailed Student-t's mean and covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTEstimate {
    pub mu_hat: DVector<f64>,
    pub sigma_hat: DMatrix<f64>,
    pub alpha: f64,
    pub n: usize,
    /// `sigma_hat` is not invertible (or `n <= d`).
    pub singular: bool,
}

impl StudentTEstimate {
    pub fn to_params(&self) -> Result<StudentTParams> {
        if self.singular {
            return Err(Error::NotPositiveDefinite { ratio: 0.0 });
        }
        StudentTParams::new(self.alpha, self.mu_hat.clone(), self.sigma_hat.clone())
    }
}

/// `mu = X-bar`, `sigma_ij = (1/n) sum_l (X_il - mu_i)(X_jl - mu_j)`.
///
/// The result does not depend on `alpha`; `alpha` is only validated against the
/// heavy-tailed domain `d/(d+2) < alpha < 1`.
pub fn estimate_student_t(batch: &SampleBatch, alpha: f64) -> Result<StudentTEstimate> {
    let d = batch.dim();
    AlphaOrder::student_t(alpha, d)?;
    if alpha > 1.0 {
        return Err(Error::Unsupported(format!(
            "closed-form estimator needs alpha < 1, got {alpha}"
        )));
    }
    let n = batch.len();
    let mu_hat = batch.mean();
    let mut sigma_hat = DMatrix::zeros(d, d);
    for x in batch.matrix().column_iter() {
        let u = x - &mu_hat;
        for i in 0..d {
            for j in i..d {
                sigma_hat[(i, j)] += u[i] * u[j];
            }
        }
    }
    for i in 0..d {
        for j in i..d {
            let v = sigma_hat[(i, j)] / n as f64;
            sigma_hat[(i, j)] = v;
            sigma_hat[(j, i)] = v;
        }
    }
    let singular = n <= d || !(rcond(&sigma_hat) > SINGULAR_RCOND_TOL);
    Ok(StudentTEstimate {
        mu_hat,
        sigma_hat,
        alpha,
        n,
        singular,
    })
}

/// Regular power-law residual at the closed-form estimate, with the analytic
/// population moments `E[X] = mu`, `E[XX'] = Sigma + mu mu'`.
pub fn student_t_plugin_residual(
    estimate: &StudentTEstimate,
    batch: &SampleBatch,
) -> Result<ResidualReport> {
    let params = estimate.to_params()?;
    let family = StudentTRegularFamily::new(params.order());
    let theta = pack_theta(&params);
    let stats = sufficient_stats(batch, &family, params.alpha())?;
    let pop = PopulationMoments {
        mean_f: family.population_moments(&theta)?,
        mean_q_pow: 1.0,
    };
    residual_regular_malpha(&family, &theta, &stats, &pop)
}
