//! Exact location fit for the univariate `alpha = 2`, unit-variance Student-t,
//! whose density `N2 [1 - (x - mu)^2 / 5]_+` has the moving support
//! `[mu - sqrt 5, mu + sqrt 5]`.
//!
//! The generalized likelihood is maximized by maximizing
//! `l(mu) = sum_i p_mu(X_i)`. Between consecutive breakpoints `X_i +- sqrt 5` the
//! set of points inside the support is fixed, so `l` is a downward parabola in
//! `mu` whose vertex is the mean of the active points; the constrained maximum
//! on `[lo, hi]` is `median{lo, mean, hi}`. Sweeping all such segments and
//! keeping the best gives the global maximizer for any layout of the sample,
//! clustered or not.

use crate::batch::SampleBatch;
use crate::error::{Error, Result};

pub const SQRT_5: f64 = 2.236_067_977_499_79;

/// `N2 = Gamma(5/2) / (sqrt(5 pi) Gamma(2)) = 3 / (4 sqrt 5)`.
pub const N2: f64 = 0.335_410_196_624_968_45;

const OBJECTIVE_TOL: f64 = 1e-12;

/// `N2 [1 - (x - mu)^2 / 5]_+`.
pub fn pdf_alpha2(mu: f64, x: f64) -> f64 {
    let u = x - mu;
    N2 * (1.0 - u * u / 5.0).max(0.0)
}

fn slack(mu: f64) -> f64 {
    1e-12 * (1.0 + mu.abs())
}

/// One interval between consecutive breakpoints.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentCandidate {
    pub lo: f64,
    pub hi: f64,
    /// Indices into the input batch, ascending.
    pub active_set: Vec<usize>,
    /// Mean of the active observations (the unconstrained vertex).
    pub unconstrained_max: f64,
    /// `median{lo, unconstrained_max, hi}`.
    pub maximizer: f64,
    /// `l(maximizer) / N2`.
    pub objective: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompactFitResult {
    pub mu_hat: f64,
    pub objective_over_n2: f64,
    /// In increasing order of `lo`.
    pub candidates: Vec<SegmentCandidate>,
    /// Every co-optimal maximizer, increasing; `mu_hat` is the first.
    pub ties: Vec<f64>,
}

/// The segment sweep with a configurable support half-width: the density is
/// `N_h [1 - (x - mu)^2 / h^2]_+` with `N_h = 3 / (4 h)`, and objectives are
/// still reported in units of `N2`. [`maximize_l2`] uses `h = sqrt 5`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompactModel {
    half_width: f64,
}

impl Default for CompactModel {
    fn default() -> Self {
        Self { half_width: SQRT_5 }
    }
}

impl CompactModel {
    pub fn with_half_width(half_width: f64) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::Unsupported(format!(
                "support half-width must be positive, got {half_width}"
            )));
        }
        Ok(Self { half_width })
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    /// `N_h / N2`; exactly 1 for the default half-width.
    pub fn scale(&self) -> f64 {
        SQRT_5 / self.half_width
    }

    /// `l(mu) / N2 = (N_h / N2) sum_i [1 - (X_i - mu)^2 / h^2]_+`.
    pub fn objective(&self, xs: &[f64], mu: f64) -> f64 {
        let h2 = self.half_width * self.half_width;
        self.scale()
            * xs.iter()
                .map(|x| (1.0 - (x - mu) * (x - mu) / h2).max(0.0))
                .sum::<f64>()
    }

    pub fn enumerate_segments(&self, xs: &[f64]) -> Vec<SegmentCandidate> {
        let h = self.half_width;
        let h2 = h * h;
        let mut breaks: Vec<f64> = xs.iter().flat_map(|&x| [x - h, x + h]).collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut out = Vec::new();
        for w in breaks.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mid = 0.5 * (lo + hi);
            if hi - lo <= slack(mid) {
                continue;
            }
            let active_set: Vec<usize> = xs
                .iter()
                .enumerate()
                .filter(|(_, &x)| (x - mid).abs() <= h + slack(mid))
                .map(|(i, _)| i)
                .collect();
            if active_set.is_empty() {
                continue;
            }
            let mean = active_set.iter().map(|&i| xs[i]).sum::<f64>() / active_set.len() as f64;
            let maximizer = mean.clamp(lo, hi);
            let objective = self.scale()
                * active_set
                    .iter()
                    .map(|&i| (1.0 - (xs[i] - maximizer) * (xs[i] - maximizer) / h2).max(0.0))
                    .sum::<f64>();
            out.push(SegmentCandidate {
                lo,
                hi,
                active_set,
                unconstrained_max: mean,
                maximizer,
                objective,
            });
        }
        out
    }

    pub fn maximize(&self, xs: &[f64]) -> Result<CompactFitResult> {
        if xs.is_empty() {
            return Err(Error::EmptyBatch);
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("sample"));
        }
        let candidates = self.enumerate_segments(xs);
        let best = candidates
            .iter()
            .map(|c| c.objective)
            .fold(f64::NEG_INFINITY, f64::max);
        let cutoff = best - OBJECTIVE_TOL * (1.0 + best.abs());
        let mut ties: Vec<f64> = candidates
            .iter()
            .filter(|c| c.objective >= cutoff)
            .map(|c| c.maximizer)
            .collect();
        ties.sort_by(f64::total_cmp);
        ties.dedup_by(|a, b| (*a - *b).abs() <= slack(*b));
        Ok(CompactFitResult {
            mu_hat: ties[0],
            objective_over_n2: best,
            candidates,
            ties,
        })
    }
}

/// Segments of `l` for a scalar sample.
pub fn enumerate_segments(batch: &SampleBatch) -> Vec<SegmentCandidate> {
    CompactModel::default().enumerate_segments(&batch.scalars())
}

/// Global maximizer of `l` over `mu`. Ties go to the smallest `mu`.
pub fn maximize_l2(batch: &SampleBatch) -> Result<CompactFitResult> {
    if batch.dim() != 1 {
        return Err(Error::DimensionMismatch {
            expected: 1,
            got: batch.dim(),
        });
    }
    CompactModel::default().maximize(&batch.scalars())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn constants() {
        assert_relative_eq!(SQRT_5, 5f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(N2, 3.0 / (4.0 * 5f64.sqrt()), max_relative = 1e-15);
    }

    #[test]
    fn pdf_examples() {
        assert_relative_eq!(pdf_alpha2(1.5, 1.5), N2);
        assert_eq!(pdf_alpha2(0.0, SQRT_5), 0.0);
        assert_eq!(pdf_alpha2(0.0, -7.0), 0.0);
        assert_relative_eq!(pdf_alpha2(2.0, 3.0), N2 * 0.8, max_relative = 1e-15);
    }

    #[test]
    fn single_point() {
        let r = maximize_l2(&SampleBatch::from_scalars(&[0.0]).unwrap()).unwrap();
        assert_eq!(r.candidates.len(), 1);
        let c = &r.candidates[0];
        assert_relative_eq!(c.lo, -SQRT_5);
        assert_relative_eq!(c.hi, SQRT_5);
        assert_eq!(r.mu_hat, 0.0);
        assert_eq!(r.objective_over_n2, 1.0);
    }

    #[test]
    fn two_far_points() {
        let batch = SampleBatch::from_scalars(&[10.0, 0.0]).unwrap();
        let segs = enumerate_segments(&batch);
        assert_eq!(segs.len(), 2);
        assert_eq!(segs[0].active_set, vec![1]);
        assert_eq!(segs[1].active_set, vec![0]);
        assert_eq!(segs[0].maximizer, 0.0);
        assert_eq!(segs[1].maximizer, 10.0);
        assert_eq!(segs[0].objective, 1.0);
        let r = maximize_l2(&batch).unwrap();
        assert_eq!(r.mu_hat, 0.0);
        assert_eq!(r.ties, vec![0.0, 10.0]);
    }

    #[test]
    fn duplicates_weight_the_parabola() {
        let r = maximize_l2(&SampleBatch::from_scalars(&[1.0, 1.0, 1.0, 2.0]).unwrap()).unwrap();
        assert_relative_eq!(r.mu_hat, 1.25, epsilon = 1e-12);
        let model = CompactModel::default();
        assert_relative_eq!(
            r.objective_over_n2,
            model.objective(&[1.0, 1.0, 1.0, 2.0], 1.25),
            epsilon = 1e-12
        );
    }

    #[test]
    fn half_width_changes_normalizer() {
        let model = CompactModel::with_half_width(2.0).unwrap();
        assert_relative_eq!(
            model.objective(&[0.0], 0.0),
            SQRT_5 / 2.0,
            max_relative = 1e-15
        );
        assert_eq!(CompactModel::default().scale(), 1.0);
    }

    #[test]
    fn rejects_empty_and_multivariate() {
        assert!(CompactModel::default().maximize(&[]).is_err());
        let b = SampleBatch::from_rows(&[[1.0, 2.0]]).unwrap();
        assert!(maximize_l2(&b).is_err());
    }
}
