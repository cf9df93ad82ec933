//! Model parameters with calibrated defaults for both mount types and the
//! screening chain.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Every scalar the pipeline needs. `Default` carries the calibrated values
/// for 8×8 arrays with a 60° FOV; any subset can be overridden from a TOML
/// file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelParams {
    /// Softplus intercept σ̄₀ of the wall distance law (°C).
    pub sigma0_c: f64,
    /// Softplus decay rate γ (°C/m).
    pub gamma_c_per_m: f64,
    /// Body-increase deviation σ_T for wall mounts (°C).
    pub sigma_t_wall_c: f64,
    /// Body-increase deviation σ_T for ceiling mounts (°C).
    pub sigma_t_ceiling_c: f64,
    /// Constant mean increase σ̄ for ceiling mounts (°C).
    pub sigma_bar_ceiling_c: f64,
    /// Signature-extraction thresholds τ per mount (°C).
    pub tau_wall_c: f64,
    pub tau_ceiling_c: f64,
    /// Distance grid step Δd (m).
    pub delta_d_m: f64,
    /// Spot-fraction model, linear form α = α₀ − α₁·d.
    pub alpha0_linear: f64,
    pub alpha1_linear: f64,
    /// Spot-fraction model, quadratic form α = α₀ − α₁·d − α₂·d².
    pub alpha0_quadratic: f64,
    pub alpha1_quadratic: f64,
    pub alpha2_quadratic: f64,
    /// Ambient correction β = β₀·(1 + β₁·(T_amb − T_min)/T_min).
    pub beta0: f64,
    pub beta1: f64,
    /// Reading deviation from head/body micro-movements (°C).
    pub sigma_body_c: f64,
    /// LLR decision threshold ξ.
    pub xi: f64,
    /// Inspection window length Q (frames).
    pub q_window: usize,
    /// Fever threshold T_max (°C).
    pub t_max_c: f64,
    /// Reference ambient T_min for the β correction (°C).
    pub t_min_c: f64,
    /// Signature-learning regularization λ.
    pub lambda_lasso: f64,
    /// MEWMA / MEWMC smoothing constants.
    pub mewma_mu: f64,
    pub mewma_c: f64,
    /// Mobility prior: walking speed (m/s) and frame interval (s).
    pub walk_speed_mps: f64,
    pub dt_s: f64,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            sigma0_c: 4.5,
            gamma_c_per_m: 1.1,
            sigma_t_wall_c: 1.5,
            sigma_t_ceiling_c: 0.3,
            sigma_bar_ceiling_c: 1.3,
            tau_wall_c: 0.8,
            tau_ceiling_c: 0.4,
            delta_d_m: 0.25,
            alpha0_linear: 0.67,
            alpha1_linear: 0.45,
            alpha0_quadratic: 0.66,
            alpha1_quadratic: 0.54,
            alpha2_quadratic: -0.21,
            beta0: 1.0,
            beta1: -0.09,
            sigma_body_c: 0.4,
            xi: -0.2,
            q_window: 12,
            t_max_c: 37.5,
            t_min_c: 20.0,
            lambda_lasso: 41.0,
            mewma_mu: 0.99,
            mewma_c: 0.995,
            walk_speed_mps: 0.5,
            dt_s: 0.3,
        }
    }
}

impl ModelParams {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| v > 0.0 && v < 1.0;
        if !in_unit(self.mewma_mu) || !in_unit(self.mewma_c) {
            return Err(Error::Config("smoothing constants must lie in (0, 1)".into()));
        }
        if self.q_window < 1 {
            return Err(Error::Config("q_window must be at least 1".into()));
        }
        if self.delta_d_m <= 0.0 {
            return Err(Error::Config("delta_d_m must be positive".into()));
        }
        if self.sigma_body_c <= 0.0 {
            return Err(Error::Config("sigma_body_c must be positive".into()));
        }
        if self.sigma_t_wall_c <= 0.0 || self.sigma_t_ceiling_c <= 0.0 {
            return Err(Error::Config("sigma_T must be positive".into()));
        }
        if self.tau_wall_c <= 0.0 || self.tau_ceiling_c <= 0.0 {
            return Err(Error::Config("τ thresholds must be positive".into()));
        }
        if self.t_min_c <= 0.0 {
            return Err(Error::Config("t_min_c must be positive".into()));
        }
        if self.dt_s <= 0.0 {
            return Err(Error::Config("dt_s must be positive".into()));
        }
        if self.walk_speed_mps < 0.0 {
            return Err(Error::Config("walk_speed_mps must be non-negative".into()));
        }
        if !(self.alpha0_linear > 0.0 && self.alpha0_linear <= 1.0)
            || !(self.alpha0_quadratic > 0.0 && self.alpha0_quadratic <= 1.0)
        {
            return Err(Error::Config("α₀ must lie in (0, 1]".into()));
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text)
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let p: ModelParams =
            toml::from_str(text).map_err(|e| Error::Config(format!("params file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::Config(format!("params file: {e}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        ModelParams::default().validate().unwrap();
    }

    #[test]
    fn partial_toml_overrides_defaults() {
        let p = ModelParams::from_toml("xi = 0.1\nq_window = 6\n").unwrap();
        assert_eq!(p.xi, 0.1);
        assert_eq!(p.q_window, 6);
        assert_eq!(p.sigma0_c, 4.5);
    }

    #[test]
    fn toml_round_trip() {
        let p = ModelParams::default();
        let back = ModelParams::from_toml(&p.to_toml().unwrap()).unwrap();
        assert_eq!(p, back);
    }

    #[test]
    fn bad_smoothing_rejected() {
        assert!(ModelParams::from_toml("mewma_mu = 1.0").is_err());
    }
}
