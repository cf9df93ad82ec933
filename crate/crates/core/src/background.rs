//! Empty-scene statistics: startup estimation of (μ, C) and slow adaptation
//! via exponentially weighted moving average / covariance.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::ThermalFrame;

pub const DEFAULT_RIDGE_C2: f64 = 1e-4;

/// Gaussian background model w ~ N(μ, C) with exponential-forgetting update
/// state. One instance per sensor stream, single writer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BackgroundModel {
    mu: DVector<f64>,
    cov: DMatrix<f64>,
    pub lambda_mu: f64,
    pub lambda_c: f64,
    /// Ridge ε added to the covariance diagonal after every update (°C²).
    pub ridge: f64,
    pub frames_seen: u64,
    /// Keep only the covariance diagonal (speed switch for full-frame M).
    pub diagonal: bool,
}

impl BackgroundModel {
    /// Estimates (μ, C) from startup frames of the unoccupied scene:
    /// sample mean and sample covariance plus ε·I.
    pub fn init(frames: &[ThermalFrame], lambda_mu: f64, lambda_c: f64) -> Result<Self> {
        if frames.len() < 2 {
            return Err(Error::Usage(format!(
                "background init needs at least 2 empty-scene frames, got {}",
                frames.len()
            )));
        }
        let m = frames[0].temps.len();
        for f in frames {
            f.validate(m)?;
        }
        let n = frames.len() as f64;
        let mut mu = DVector::zeros(m);
        for f in frames {
            for (i, &t) in f.temps.iter().enumerate() {
                mu[i] += t;
            }
        }
        mu /= n;
        let mut cov = DMatrix::zeros(m, m);
        for f in frames {
            let d = DVector::from_iterator(m, f.temps.iter().enumerate().map(|(i, &t)| t - mu[i]));
            // rank-1 outer product of d with itself is exactly symmetric
            cov.ger(1.0 / (n - 1.0), &d, &d, 1.0);
        }
        let mut bg = BackgroundModel {
            mu,
            cov,
            lambda_mu,
            lambda_c,
            ridge: DEFAULT_RIDGE_C2,
            frames_seen: frames.len() as u64,
            diagonal: false,
        };
        bg.apply_ridge();
        Ok(bg)
    }

    /// Builds from known statistics (warm restart, simulation oracles).
    pub fn from_parts(
        mu: DVector<f64>,
        cov: DMatrix<f64>,
        lambda_mu: f64,
        lambda_c: f64,
    ) -> Result<Self> {
        if cov.nrows() != mu.len() || cov.ncols() != mu.len() {
            return Err(Error::Usage("covariance shape does not match mean".into()));
        }
        let mut bg = BackgroundModel {
            mu,
            cov,
            lambda_mu,
            lambda_c,
            ridge: DEFAULT_RIDGE_C2,
            frames_seen: 0,
            diagonal: false,
        };
        bg.apply_ridge();
        Ok(bg)
    }

    pub fn detectors(&self) -> usize {
        self.mu.len()
    }

    pub fn mu(&self) -> &DVector<f64> {
        &self.mu
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// One MEWMA/MEWMC step:
    /// μ' = λ_μ·μ + (1−λ_μ)·y, C' = λ_C·C + (1−λ_C)·(y−μ')(y−μ')ᵀ,
    /// re-symmetrized and re-ridged. The caller decides gating; feeding
    /// frames that contain a body pulls the background toward it.
    pub fn update(&mut self, frame: &ThermalFrame) -> Result<()> {
        let m = self.detectors();
        frame.validate(m)?;
        for i in 0..m {
            self.mu[i] = self.lambda_mu * self.mu[i] + (1.0 - self.lambda_mu) * frame.temps[i];
        }
        let d = DVector::from_iterator(m, frame.temps.iter().enumerate().map(|(i, &t)| t - self.mu[i]));
        self.cov *= self.lambda_c;
        self.cov.ger(1.0 - self.lambda_c, &d, &d, 1.0);
        // guard against asymmetry drifting in through external edits
        for i in 0..m {
            for j in (i + 1)..m {
                let s = 0.5 * (self.cov[(i, j)] + self.cov[(j, i)]);
                self.cov[(i, j)] = s;
                self.cov[(j, i)] = s;
            }
        }
        self.apply_ridge();
        self.frames_seen += 1;
        Ok(())
    }

    fn apply_ridge(&mut self) {
        let m = self.detectors();
        if self.diagonal {
            for i in 0..m {
                for j in 0..m {
                    if i != j {
                        self.cov[(i, j)] = 0.0;
                    }
                }
            }
        }
        for i in 0..m {
            self.cov[(i, i)] += self.ridge;
        }
    }

    /// Restriction (μ_k, C_k) to the detectors selected by `mask`.
    pub fn subset(&self, mask: &[bool]) -> Result<(DVector<f64>, DMatrix<f64>)> {
        if mask.len() != self.detectors() {
            return Err(Error::Usage("mask length does not match detector count".into()));
        }
        let idx: Vec<usize> = mask.iter().enumerate().filter_map(|(m, &b)| b.then_some(m)).collect();
        if idx.is_empty() {
            return Err(Error::Usage("mask selects no detectors".into()));
        }
        let mu_k = DVector::from_iterator(idx.len(), idx.iter().map(|&m| self.mu[m]));
        let cov_k = DMatrix::from_fn(idx.len(), idx.len(), |i, j| self.cov[(idx[i], idx[j])]);
        Ok((mu_k, cov_k))
    }

    /// Average of μ over all detectors; serves as the ambient temperature.
    pub fn mean_temperature(&self) -> f64 {
        self.mu.mean()
    }
}
