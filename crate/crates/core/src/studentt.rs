//! Student-t densities as members of the power-law family.
//!
//! Parameters are packed as `theta = (mu, Vec(Sigma^{-1}))`, the matrix
//! flattened row-major, so `k = d + d^2`. Every entry of `Sigma^{-1}` is its own
//! coordinate, so Jacobians here are plain coordinate partials. Derivatives along
//! the symmetric directions `E_ij + E_ji` are available separately through
//! [`StudentTFamily::symmetric_direction_jacobian`].

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{ChiSquared, Distribution, StandardNormal};

use crate::batch::SampleBatch;
use crate::error::{Error, Result};
use crate::family::MAlphaFamily;
use crate::params::{log_bracket_integral, AlphaOrder, StudentTParams};

/// Row-major `Vec(A)`.
pub fn vec_row_major(a: &DMatrix<f64>) -> DVector<f64> {
    let (r, c) = a.shape();
    DVector::from_fn(r * c, |idx, _| a[(idx / c, idx % c)])
}

/// Inverse of [`vec_row_major`] for a square matrix.
pub fn unvec_row_major(v: &[f64], d: usize) -> DMatrix<f64> {
    DMatrix::from_row_slice(d, d, v)
}

/// `(mu, Vec(Sigma^{-1}))`.
pub fn pack_theta(params: &StudentTParams) -> DVector<f64> {
    let mut theta = Vec::with_capacity(params.dim() * (params.dim() + 1));
    theta.extend(params.mu().iter());
    theta.extend(vec_row_major(params.precision()).iter());
    DVector::from_vec(theta)
}

/// Splits a packed `theta` into `(mu, Sigma^{-1})`.
pub fn unpack_theta(theta: &DVector<f64>, d: usize) -> Result<(DVector<f64>, DMatrix<f64>)> {
    if theta.len() != d + d * d {
        return Err(Error::DimensionMismatch {
            expected: d + d * d,
            got: theta.len(),
        });
    }
    let mu = DVector::from_column_slice(&theta.as_slice()[..d]);
    let prec = unvec_row_major(&theta.as_slice()[d..], d);
    Ok((mu, prec))
}

/// `N [1 + b (x - mu)' Sigma^{-1} (x - mu)]_+^{1/(alpha-1)}`; exactly 0 off an
/// `alpha > 1` support, including its boundary.
pub fn density(params: &StudentTParams, x: &DVector<f64>) -> f64 {
    let bracket = y_statistic(params, x);
    if bracket <= 0.0 {
        return 0.0;
    }
    (params.log_norm_const() + params.order().exponent() * bracket.ln()).exp()
}

/// `log p(x)`, `-inf` off the support.
pub fn log_density(params: &StudentTParams, x: &DVector<f64>) -> f64 {
    let bracket = y_statistic(params, x);
    if bracket <= 0.0 {
        return f64::NEG_INFINITY;
    }
    params.log_norm_const() + params.order().exponent() * bracket.ln()
}

/// The per-observation bracket `Y(x) = 1 + b (x - mu)' Sigma^{-1} (x - mu)`,
/// whose expectation is `1 + d b`.
pub fn y_statistic(params: &StudentTParams, x: &DVector<f64>) -> f64 {
    1.0 + params.b_alpha() * params.mahalanobis_sq(x)
}

pub fn expected_y(order: &AlphaOrder) -> f64 {
    1.0 + order.dim() as f64 * order.b_alpha()
}

/// `log p_theta(x)` from a raw packed `theta` whose precision block need not be
/// symmetric. Returns `None` where `det(Sigma^{-1}) <= 0`.
pub fn log_density_at_theta(
    order: &AlphaOrder,
    theta: &DVector<f64>,
    x: &DVector<f64>,
) -> Option<f64> {
    let d = order.dim();
    let (mu, prec) = unpack_theta(theta, d).ok()?;
    let det = prec.clone().lu().determinant();
    if !(det > 0.0) {
        return None;
    }
    let log_norm = -log_bracket_integral(order.b_alpha(), -det.ln(), d, order.exponent());
    let u = x - mu;
    let bracket = 1.0 + order.b_alpha() * u.dot(&(&prec * &u));
    if bracket <= 0.0 {
        return Some(f64::NEG_INFINITY);
    }
    Some(log_norm + order.exponent() * bracket.ln())
}

/// Gradient of `log p_theta(x)` with respect to the packed `theta`.
pub fn score(params: &StudentTParams, x: &DVector<f64>) -> Result<DVector<f64>> {
    let d = params.dim();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    let b = params.b_alpha();
    let e = params.order().exponent();
    let bracket = y_statistic(params, x);
    if bracket <= 0.0 {
        return Err(Error::UndefinedScore);
    }
    let u = x - params.mu();
    let prec = params.precision();
    let scale = e * b / bracket;
    let grad_mu = (prec * &u) * (-2.0 * scale);
    let sigma = params.sigma();
    let mut out = DVector::zeros(d + d * d);
    out.rows_mut(0, d).copy_from(&grad_mu);
    for i in 0..d {
        for j in 0..d {
            out[d + i * d + j] = 0.5 * sigma[(j, i)] + scale * u[i] * u[j];
        }
    }
    Ok(out)
}

/// The three coefficient blocks of the Student-t bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct StudentTDecomposition {
    /// `b mu' Sigma^{-1} mu`, paired with `f1(x) = 1`.
    pub w1: f64,
    /// `-2 b Sigma^{-1} mu`, paired with `f2(x) = x`.
    pub w2: DVector<f64>,
    /// `b Vec(Sigma^{-1})`, paired with `f3(x) = Vec(x x')`.
    pub w3: DVector<f64>,
    pub family: StudentTFamily,
    pub theta: DVector<f64>,
}

impl StudentTDecomposition {
    /// `Z^{-1} [1 + w1 f1 + w2' f2 + w3' f3]_+^{1/(alpha-1)}`.
    pub fn reconstruct(&self, x: &DVector<f64>) -> f64 {
        self.family.density(&self.theta, x)
    }
}

pub fn decompose(params: &StudentTParams) -> StudentTDecomposition {
    let family = StudentTFamily::new(params.order());
    let theta = pack_theta(params);
    let w = family.w(&theta);
    let d = params.dim();
    StudentTDecomposition {
        w1: w[0],
        w2: w.rows(1, d).into_owned(),
        w3: w.rows(1 + d, d * d).into_owned(),
        family,
        theta,
    }
}

/// The Student-t family with statistics `f = (1, x, Vec(x x'))`, `q = 1`,
/// so `s = 1 + d + d^2` and `k = d + d^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentTFamily {
    order: AlphaOrder,
}

impl StudentTFamily {
    pub fn new(order: AlphaOrder) -> Self {
        Self { order }
    }

    pub fn order(&self) -> AlphaOrder {
        self.order
    }

    fn d(&self) -> usize {
        self.order.dim()
    }

    /// `E_theta[f(X)] = (1, mu, Vec(Sigma + mu mu'))` from a packed `theta`.
    pub fn population_moments(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let d = self.d();
        let (mu, prec) = unpack_theta(theta, d)?;
        let sigma = prec
            .try_inverse()
            .ok_or(Error::NotPositiveDefinite { ratio: 0.0 })?;
        let second = sigma + &mu * mu.transpose();
        let mut out = Vec::with_capacity(1 + d + d * d);
        out.push(1.0);
        out.extend(mu.iter());
        out.extend(vec_row_major(&second).iter());
        Ok(DVector::from_vec(out))
    }

    /// Derivatives of `w` along `E_ij + E_ji` in the precision block, one column
    /// per `(i, j)` in row-major order. Column `(i, j)` is the sum of the
    /// coordinate columns `(i, j)` and `(j, i)`:
    /// `d w1 = 2 b mu_i mu_j`, `d w2` is `-2 b mu_j` at `i` plus `-2 b mu_i` at `j`,
    /// `d w3` is `b` at `Vec` positions `(i, j)` and `(j, i)`.
    pub fn symmetric_direction_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d();
        let b = self.order.b_alpha();
        let mu = &theta.as_slice()[..d];
        let mut out = DMatrix::zeros(1 + d + d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                let col = i * d + j;
                out[(0, col)] += 2.0 * b * mu[i] * mu[j];
                out[(1 + i, col)] += -2.0 * b * mu[j];
                out[(1 + j, col)] += -2.0 * b * mu[i];
                out[(1 + d + i * d + j, col)] += b;
                out[(1 + d + j * d + i, col)] += b;
            }
        }
        out
    }
}

impl MAlphaFamily for StudentTFamily {
    fn alpha(&self) -> f64 {
        self.order.alpha()
    }
    fn param_count(&self) -> usize {
        self.d() + self.d() * self.d()
    }
    fn stat_count(&self) -> usize {
        1 + self.d() + self.d() * self.d()
    }
    fn data_dim(&self) -> usize {
        self.d()
    }
    fn q(&self, _x: &DVector<f64>) -> f64 {
        1.0
    }
    fn w(&self, theta: &DVector<f64>) -> DVector<f64> {
        let d = self.d();
        let b = self.order.b_alpha();
        let mu = DVector::from_column_slice(&theta.as_slice()[..d]);
        let prec = unvec_row_major(&theta.as_slice()[d..d + d * d], d);
        let prec_mu = &prec * &mu;
        let mut out = Vec::with_capacity(1 + d + d * d);
        out.push(b * mu.dot(&prec_mu));
        out.extend(prec_mu.iter().map(|v| -2.0 * b * v));
        out.extend(theta.as_slice()[d..].iter().map(|v| b * v));
        DVector::from_vec(out)
    }
    fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        let mut out = Vec::with_capacity(1 + x.len() * (x.len() + 1));
        out.push(1.0);
        out.extend(x.iter());
        out.extend(vec_row_major(&(x * x.transpose())).iter());
        DVector::from_vec(out)
    }
    fn z(&self, theta: &DVector<f64>) -> f64 {
        let d = self.d();
        let prec = unvec_row_major(&theta.as_slice()[d..d + d * d], d);
        let det = prec.lu().determinant();
        log_bracket_integral(self.order.b_alpha(), -det.ln(), d, self.order.exponent()).exp()
    }
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let d = self.d();
        let b = self.order.b_alpha();
        let mu = DVector::from_column_slice(&theta.as_slice()[..d]);
        let prec = unvec_row_major(&theta.as_slice()[d..d + d * d], d);
        let mut jac = DMatrix::zeros(1 + d + d * d, d + d * d);
        // mu block
        let sym_mu = (&prec + prec.transpose()) * &mu;
        for r in 0..d {
            jac[(0, r)] = b * sym_mu[r];
            for i in 0..d {
                jac[(1 + i, r)] = -2.0 * b * prec[(i, r)];
            }
        }
        // precision block, coordinate (i, j)
        for i in 0..d {
            for j in 0..d {
                let col = d + i * d + j;
                jac[(0, col)] = b * mu[i] * mu[j];
                jac[(1 + i, col)] = -2.0 * b * mu[j];
                jac[(1 + d + i * d + j, col)] = b;
            }
        }
        jac
    }
}

/// The Student-t family with the constant statistic folded into the normalizer:
/// `w~ = (w2, w3) / (1 + w1)`, `f~ = (x, Vec(x x'))`,
/// `Z~ = Z (1 + w1)^{-1/(alpha-1)}`. Square (`s = k = d + d^2`) and defined
/// wherever `1 + w1 > 0`, which holds for every `theta` when `alpha < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StudentTRegularFamily {
    full: StudentTFamily,
}

impl StudentTRegularFamily {
    pub fn new(order: AlphaOrder) -> Self {
        Self {
            full: StudentTFamily::new(order),
        }
    }

    pub fn full(&self) -> &StudentTFamily {
        &self.full
    }

    /// `E_theta[f~(X)] = (mu, Vec(Sigma + mu mu'))`.
    pub fn population_moments(&self, theta: &DVector<f64>) -> Result<DVector<f64>> {
        let m = self.full.population_moments(theta)?;
        Ok(m.rows(1, m.len() - 1).into_owned())
    }
}

impl MAlphaFamily for StudentTRegularFamily {
    fn alpha(&self) -> f64 {
        self.full.alpha()
    }
    fn param_count(&self) -> usize {
        self.full.param_count()
    }
    fn stat_count(&self) -> usize {
        self.full.param_count()
    }
    fn data_dim(&self) -> usize {
        self.full.data_dim()
    }
    fn q(&self, _x: &DVector<f64>) -> f64 {
        1.0
    }
    fn w(&self, theta: &DVector<f64>) -> DVector<f64> {
        let w = self.full.w(theta);
        w.rows(1, w.len() - 1) / (1.0 + w[0])
    }
    fn f(&self, x: &DVector<f64>) -> DVector<f64> {
        let f = self.full.f(x);
        f.rows(1, f.len() - 1).into_owned()
    }
    fn z(&self, theta: &DVector<f64>) -> f64 {
        let w1 = self.full.w(theta)[0];
        self.full.z(theta) * (1.0 + w1).powf(-self.full.order().exponent())
    }
    fn w_jacobian(&self, theta: &DVector<f64>) -> DMatrix<f64> {
        let w = self.full.w(theta);
        let jac = self.full.w_jacobian(theta);
        let s = w.len() - 1;
        let denom = 1.0 + w[0];
        let rest = jac.rows(1, s) / denom;
        let correction = w.rows(1, s) * jac.row(0) / (denom * denom);
        rest - correction
    }
}

/// `n` draws at a fixed seed.
///
/// `alpha < 1`: `mu + L z sqrt((nu - 2)/W)` with `L L' = Sigma`, `z` standard
/// normal and `W ~ chi^2(nu)`, i.e. a multivariate t with scale
/// `Sigma (nu - 2)/nu`. `alpha > 1` (only `d = 1`): rejection from the uniform
/// law on the support interval.
///
/// The stream is ChaCha20 seeded through `SeedableRng::seed_from_u64`.
pub fn sample(params: &StudentTParams, n: usize, seed: u64) -> Result<SampleBatch> {
    if n == 0 {
        return Err(Error::EmptyBatch);
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let d = params.dim();
    let mut data = DMatrix::zeros(d, n);
    match params.nu() {
        Some(nu) => {
            let chi = ChiSquared::new(nu)
                .map_err(|e| Error::Unsupported(format!("chi-squared({nu}): {e}")))?;
            let l = params.chol_lower();
            let mut z = DVector::zeros(d);
            for mut col in data.column_iter_mut() {
                for zi in z.iter_mut() {
                    *zi = rng.sample(StandardNormal);
                }
                let w: f64 = chi.sample(&mut rng);
                let factor = ((nu - 2.0) / w).sqrt();
                col.copy_from(&(params.mu() + (l * &z) * factor));
            }
        }
        None => {
            if d != 1 {
                return Err(Error::Unsupported(format!(
                    "sampling alpha > 1 requires d = 1, got d = {d}"
                )));
            }
            let mu = params.mu()[0];
            let half_width = (-params.sigma()[(0, 0)] / params.b_alpha()).sqrt();
            let e = params.order().exponent();
            let b = params.b_alpha();
            let var = params.sigma()[(0, 0)];
            for l in 0..n {
                data[(0, l)] = loop {
                    let x = mu + half_width * (2.0 * rng.random::<f64>() - 1.0);
                    let bracket = 1.0 + b * (x - mu) * (x - mu) / var;
                    if bracket > 0.0 && rng.random::<f64>() <= bracket.powf(e) {
                        break x;
                    }
                };
            }
        }
    }
    SampleBatch::from_columns(data)
}
