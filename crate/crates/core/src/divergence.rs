//! The `I_alpha` divergence (relative alpha-entropy), KL divergence and the
//! generalized likelihood
//!
//! ```text
//! I_a(p, q) = a/(1-a) log int p q^(a-1) - 1/(1-a) log int p^a + log int q^a
//! L_a(theta) = a/(a-1) log[(1/n) sum_j p_theta(X_j)^(a-1)] - log int p_theta^a
//! ```
//!
//! Finite distributions use exact sums; univariate continuous ones use adaptive
//! quadrature over their support.

use std::fmt;
use std::sync::Arc;

use nalgebra::DVector;

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::family::MAlphaFamily;
use crate::params::StudentTParams;
use crate::quadrature::{integrate_with_breaks, QuadConfig};
use crate::studentt;

/// A real number or one of the two infinities; orders as the extended line.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub enum Extended {
    NegInfinity,
    Finite(f64),
    PosInfinity,
}

impl Extended {
    /// Maps `+-inf` onto the infinite variants. NaN is not representable.
    pub fn from_f64(v: f64) -> Option<Self> {
        if v.is_nan() {
            None
        } else if v == f64::INFINITY {
            Some(Extended::PosInfinity)
        } else if v == f64::NEG_INFINITY {
            Some(Extended::NegInfinity)
        } else {
            Some(Extended::Finite(v))
        }
    }

    pub fn to_f64(self) -> f64 {
        match self {
            Extended::NegInfinity => f64::NEG_INFINITY,
            Extended::Finite(v) => v,
            Extended::PosInfinity => f64::INFINITY,
        }
    }

    pub fn finite(self) -> Option<f64> {
        match self {
            Extended::Finite(v) => Some(v),
            _ => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Extended::Finite(_))
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInfinity => f.write_str("-inf"),
            Extended::Finite(v) => write!(f, "{v}"),
            Extended::PosInfinity => f.write_str("inf"),
        }
    }
}

type Density1d = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A univariate density on `[lower, upper]` (either end may be infinite) with
/// optional interior points where it is not smooth.
#[derive(Clone)]
pub struct ContinuousDensity {
    density: Density1d,
    log_density: Option<Density1d>,
    lower: f64,
    upper: f64,
    breaks: Vec<f64>,
}

impl fmt::Debug for ContinuousDensity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ContinuousDensity")
            .field("lower", &self.lower)
            .field("upper", &self.upper)
            .field("breaks", &self.breaks)
            .finish_non_exhaustive()
    }
}

impl ContinuousDensity {
    pub fn eval(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper {
            0.0
        } else {
            (self.density)(x)
        }
    }

    /// `log p(x)`, exact when a log-density was supplied; tail integrands are
    /// formed from this so they do not underflow before the density does.
    pub fn ln_eval(&self, x: f64) -> f64 {
        if x < self.lower || x > self.upper {
            return f64::NEG_INFINITY;
        }
        match &self.log_density {
            Some(lp) => lp(x),
            None => (self.density)(x).ln(),
        }
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lower, self.upper)
    }

    fn integrate<G: Fn(f64) -> f64>(&self, g: G, cfg: &QuadConfig) -> Result<f64> {
        Ok(integrate_with_breaks(g, self.lower, self.upper, &self.breaks, cfg)?.value)
    }
}

pub const DISCRETE_MASS_TOL: f64 = 1e-12;
pub const CONTINUOUS_MASS_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub enum DistributionHandle {
    Discrete(Vec<f64>),
    Continuous(ContinuousDensity),
}

impl DistributionHandle {
    pub fn discrete(probs: Vec<f64>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidDistribution("no atoms".into()));
        }
        if probs.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return Err(Error::InvalidDistribution(
                "probabilities must be finite and non-negative".into(),
            ));
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > DISCRETE_MASS_TOL {
            return Err(Error::InvalidDistribution(format!(
                "probabilities sum to {total}"
            )));
        }
        Ok(DistributionHandle::Discrete(probs))
    }

    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidDistribution(format!(
                "Bernoulli parameter {p} outside [0, 1]"
            )));
        }
        Self::discrete(vec![1.0 - p, p])
    }

    /// Wraps a density and checks that it integrates to one.
    pub fn continuous<F>(density: F, lower: f64, upper: f64, breaks: Vec<f64>) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_parts(Arc::new(density), None, lower, upper, breaks)
    }

    /// Like [`DistributionHandle::continuous`], with an exact log-density.
    pub fn continuous_with_log<F, G>(
        density: F,
        log_density: G,
        lower: f64,
        upper: f64,
        breaks: Vec<f64>,
    ) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
        G: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_parts(
            Arc::new(density),
            Some(Arc::new(log_density)),
            lower,
            upper,
            breaks,
        )
    }

    fn from_parts(
        density: Density1d,
        log_density: Option<Density1d>,
        lower: f64,
        upper: f64,
        breaks: Vec<f64>,
    ) -> Result<Self> {
        if !(lower < upper) {
            return Err(Error::InvalidDistribution(format!(
                "empty support [{lower}, {upper}]"
            )));
        }
        let c = ContinuousDensity {
            density,
            log_density,
            lower,
            upper,
            breaks,
        };
        let mass = c.integrate(|x| c.eval(x), &QuadConfig::default())?;
        if !((mass - 1.0).abs() <= CONTINUOUS_MASS_TOL) {
            return Err(Error::InvalidDistribution(format!(
                "density integrates to {mass}"
            )));
        }
        Ok(DistributionHandle::Continuous(c))
    }

    pub fn normal(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidDistribution(format!("normal({mean}, {sd})")));
        }
        let log_c = -(sd * (2.0 * std::f64::consts::PI).sqrt()).ln();
        Self::continuous_with_log(
            move |x| {
                let z = (x - mean) / sd;
                (log_c - 0.5 * z * z).exp()
            },
            move |x| {
                let z = (x - mean) / sd;
                log_c - 0.5 * z * z
            },
            f64::NEG_INFINITY,
            f64::INFINITY,
            vec![mean],
        )
    }

    /// A univariate Student-t as a handle on its exact support.
    pub fn student_t(params: &StudentTParams) -> Result<Self> {
        if params.dim() != 1 {
            return Err(Error::Unsupported(
                "continuous divergences are univariate only".into(),
            ));
        }
        let (lo, hi) = univariate_support(params);
        let p = params.clone();
        let lp = params.clone();
        Self::continuous_with_log(
            move |x| studentt::density(&p, &DVector::from_element(1, x)),
            move |x| studentt::log_density(&lp, &DVector::from_element(1, x)),
            lo,
            hi,
            vec![params.mu()[0]],
        )
    }
}

/// `[mu - r, mu + r]` on the compact branch, the whole line otherwise.
pub fn univariate_support(params: &StudentTParams) -> (f64, f64) {
    let mu = params.mu()[0];
    if params.order().is_compact() {
        let r = (-params.sigma()[(0, 0)] / params.b_alpha()).sqrt();
        (mu - r, mu + r)
    } else {
        (f64::NEG_INFINITY, f64::INFINITY)
    }
}

fn check_alpha(alpha: f64) -> Result<()> {
    if !alpha.is_finite() || alpha <= 0.0 {
        return Err(Error::AlphaNotPositive(alpha));
    }
    if alpha == 1.0 {
        return Err(Error::AlphaIsOne);
    }
    Ok(())
}

fn finite_log(v: f64, what: &str) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v.ln())
    } else {
        Err(Error::InvalidDistribution(format!(
            "{what} is {v}; need a finite positive value"
        )))
    }
}

/// `(int p q^(a-1), int p^a, int q^a)`.
fn alpha_integrals(
    p: &DistributionHandle,
    q: &DistributionHandle,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<(f64, f64, f64)> {
    match (p, q) {
        (DistributionHandle::Discrete(p), DistributionHandle::Discrete(q)) => {
            if p.len() != q.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    got: q.len(),
                });
            }
            let cross = p
                .iter()
                .zip(q)
                .filter(|(pi, _)| **pi > 0.0)
                .map(|(pi, qi)| pi * qi.powf(alpha - 1.0))
                .sum();
            let pp = p.iter().map(|v| v.powf(alpha)).sum();
            let qq = q.iter().map(|v| v.powf(alpha)).sum();
            Ok((cross, pp, qq))
        }
        (DistributionHandle::Continuous(p), DistributionHandle::Continuous(q)) => {
            let cross = p.integrate(
                |x| {
                    let lp = p.ln_eval(x);
                    if lp == f64::NEG_INFINITY {
                        0.0
                    } else {
                        (lp + (alpha - 1.0) * q.ln_eval(x)).exp()
                    }
                },
                cfg,
            )?;
            let pp = p.integrate(|x| (alpha * p.ln_eval(x)).exp(), cfg)?;
            let qq = q.integrate(|x| (alpha * q.ln_eval(x)).exp(), cfg)?;
            Ok((cross, pp, qq))
        }
        _ => Err(Error::InvalidDistribution(
            "divergence arguments must be of the same kind".into(),
        )),
    }
}

/// `I_alpha(p, q)`. Returns `PosInfinity` when the cross term degenerates
/// (it vanishes, or diverges because `q = 0` on part of `p`'s support).
pub fn i_alpha(
    p: &DistributionHandle,
    q: &DistributionHandle,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<Extended> {
    check_alpha(alpha)?;
    let (cross, pp, qq) = alpha_integrals(p, q, alpha, cfg)?;
    let log_pp = finite_log(pp, "integral of p^alpha")?;
    let log_qq = finite_log(qq, "integral of q^alpha")?;
    if !(cross.is_finite() && cross > 0.0) {
        if cross.is_nan() {
            return Err(Error::InvalidDistribution("cross integral is NaN".into()));
        }
        return Ok(Extended::PosInfinity);
    }
    let value = alpha / (1.0 - alpha) * cross.ln() - log_pp / (1.0 - alpha) + log_qq;
    Ok(Extended::Finite(value))
}

/// `KL(p || q)`; `PosInfinity` when `p` is not absolutely continuous w.r.t. `q`.
pub fn kl(p: &DistributionHandle, q: &DistributionHandle, cfg: &QuadConfig) -> Result<Extended> {
    match (p, q) {
        (DistributionHandle::Discrete(p), DistributionHandle::Discrete(q)) => {
            if p.len() != q.len() {
                return Err(Error::DimensionMismatch {
                    expected: p.len(),
                    got: q.len(),
                });
            }
            let mut acc = 0.0;
            for (pi, qi) in p.iter().zip(q) {
                if *pi == 0.0 {
                    continue;
                }
                if *qi == 0.0 {
                    return Ok(Extended::PosInfinity);
                }
                acc += pi * (pi / qi).ln();
            }
            Ok(Extended::Finite(acc))
        }
        (DistributionHandle::Continuous(pc), DistributionHandle::Continuous(qc)) => {
            let v = pc.integrate(
                |x| {
                    let lp = pc.ln_eval(x);
                    if lp == f64::NEG_INFINITY {
                        return 0.0;
                    }
                    let lq = qc.ln_eval(x);
                    if lq == f64::NEG_INFINITY {
                        return f64::INFINITY;
                    }
                    lp.exp() * (lp - lq)
                },
                cfg,
            )?;
            Extended::from_f64(v)
                .ok_or_else(|| Error::InvalidDistribution("KL integrand is NaN".into()))
        }
        _ => Err(Error::InvalidDistribution(
            "divergence arguments must be of the same kind".into(),
        )),
    }
}

/// Something that can be plugged into the generalized likelihood.
pub trait DensityModel {
    fn dim(&self) -> usize;
    fn density(&self, x: &DVector<f64>) -> f64;
    /// `log int p(x)^alpha dx`.
    fn log_power_integral(&self, alpha: f64, cfg: &QuadConfig) -> Result<f64>;
}

/// `log int p^alpha` for a univariate Student-t by quadrature.
pub fn student_t_power_integral_quadrature(
    params: &StudentTParams,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<f64> {
    if params.dim() != 1 {
        return Err(Error::Unsupported(
            "quadrature is available for d = 1 only".into(),
        ));
    }
    let (lo, hi) = univariate_support(params);
    let v = integrate_with_breaks(
        |x| studentt::density(params, &DVector::from_element(1, x)).powf(alpha),
        lo,
        hi,
        &[params.mu()[0]],
        cfg,
    )?
    .value;
    finite_log(v, "integral of p^alpha")
}

impl DensityModel for StudentTParams {
    fn dim(&self) -> usize {
        StudentTParams::dim(self)
    }

    fn density(&self, x: &DVector<f64>) -> f64 {
        studentt::density(self, x)
    }

    /// Closed form at the family's own order, quadrature (d = 1) otherwise.
    fn log_power_integral(&self, alpha: f64, cfg: &QuadConfig) -> Result<f64> {
        if alpha == self.alpha() {
            Ok(StudentTParams::log_power_integral(self))
        } else {
            student_t_power_integral_quadrature(self, alpha, cfg)
        }
    }
}

/// A univariate power-law family member at a fixed `theta`, with the interval
/// to integrate over.
pub struct FamilyDensity<'a, F: MAlphaFamily + ?Sized> {
    pub family: &'a F,
    pub theta: DVector<f64>,
    pub lower: f64,
    pub upper: f64,
}

impl<F: MAlphaFamily + ?Sized> DensityModel for FamilyDensity<'_, F> {
    fn dim(&self) -> usize {
        self.family.data_dim()
    }

    fn density(&self, x: &DVector<f64>) -> f64 {
        self.family.density(&self.theta, x)
    }

    fn log_power_integral(&self, alpha: f64, cfg: &QuadConfig) -> Result<f64> {
        if self.family.data_dim() != 1 {
            return Err(Error::Unsupported(
                "quadrature is available for d = 1 only".into(),
            ));
        }
        let v = integrate_with_breaks(
            |x| self.density(&DVector::from_element(1, x)).powf(alpha),
            self.lower,
            self.upper,
            &[],
            cfg,
        )?
        .value;
        finite_log(v, "integral of p^alpha")
    }
}

/// The first term `a/(a-1) log[(1/n) sum_j p(X_j)^(a-1)]`.
pub fn likelihood_sample_term<M: DensityModel + ?Sized>(
    model: &M,
    batch: &SampleBatch,
    alpha: f64,
) -> Result<Extended> {
    check_alpha(alpha)?;
    if batch.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            got: batch.dim(),
        });
    }
    let n = batch.len() as f64;
    let mean = batch
        .observations()
        .map(|x| model.density(&x).powf(alpha - 1.0))
        .sum::<f64>()
        / n;
    // a/(a-1) > 0 with mean = 0 for a > 1; a/(a-1) < 0 with mean = inf for a < 1
    if mean == 0.0 || mean == f64::INFINITY {
        return Ok(Extended::NegInfinity);
    }
    Extended::from_f64(alpha / (alpha - 1.0) * mean.ln())
        .ok_or_else(|| Error::InvalidDistribution("likelihood term is NaN".into()))
}

/// The generalized likelihood `L_alpha`. An empty overlap between the sample
/// and the support gives `NegInfinity`, not an error.
pub fn generalized_log_likelihood<M: DensityModel + ?Sized>(
    model: &M,
    batch: &SampleBatch,
    alpha: f64,
    cfg: &QuadConfig,
) -> Result<Extended> {
    let first = likelihood_sample_term(model, batch, alpha)?;
    let second = model.log_power_integral(alpha, cfg)?;
    Ok(match first {
        Extended::Finite(v) => Extended::Finite(v - second),
        other => other,
    })
}
