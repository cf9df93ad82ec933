//! Multivariate Gaussian evaluation on detector subsets, plus log-domain
//! helpers. All probability arithmetic elsewhere in the crate stays in the
//! log domain; 64-dimensional densities underflow linear-domain floats.

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};

use crate::error::{Error, Result};

pub(crate) const LN_2PI: f64 = 1.8378770664093453;

/// log(Σ exp(x_i)), safe against overflow; returns -inf for empty/-inf input.
pub(crate) fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !m.is_finite() {
        return m;
    }
    let s: f64 = xs.iter().map(|x| (x - m).exp()).sum();
    m + s.ln()
}

/// A Gaussian over the detectors selected by a ROI mask, factorized once so
/// that repeated evaluations (one per distance grid point and frame) cost a
/// single triangular solve.
#[derive(Debug, Clone)]
pub(crate) struct SubGaussian {
    /// Detector indices this density looks at.
    pub idx: Vec<usize>,
    mu: DVector<f64>,
    chol: Cholesky<f64, Dyn>,
    /// -(n/2)·ln 2π - Σ ln L_ii
    log_norm: f64,
}

impl SubGaussian {
    /// Builds from a masked mean and masked covariance. The covariance must
    /// be positive definite; background ridge keeps it that way.
    pub fn new(idx: Vec<usize>, mu: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let n = idx.len();
        if n == 0 || mu.len() != n || cov.nrows() != n || cov.ncols() != n {
            return Err(Error::Usage("masked Gaussian needs a non-empty, consistent subset".into()));
        }
        let chol = Cholesky::new(cov).ok_or_else(|| {
            Error::Numeric(
                "masked covariance is not positive definite; increase the background ridge".into(),
            )
        })?;
        let log_det_half: f64 = (0..n).map(|i| chol.l_dirty()[(i, i)].ln()).sum();
        let log_norm = -0.5 * n as f64 * LN_2PI - log_det_half;
        Ok(Self { idx, mu, chol, log_norm })
    }

    /// log N(y_masked; mu + shift·1, cov) picking masked entries out of the
    /// full detector vector.
    pub fn logpdf_shifted(&self, y_full: &[f64], shift: f64) -> f64 {
        let d = DVector::from_iterator(
            self.idx.len(),
            self.idx.iter().map(|&m| y_full[m] - self.mu[self.idx_pos(m)] - shift),
        );
        let quad = d.dot(&self.chol.solve(&d));
        self.log_norm - 0.5 * quad
    }

    pub fn logpdf(&self, y_full: &[f64]) -> f64 {
        self.logpdf_shifted(y_full, 0.0)
    }

    fn idx_pos(&self, detector: usize) -> usize {
        // idx is sorted ascending by construction (mask scan order)
        self.idx.binary_search(&detector).expect("detector in mask")
    }
}
