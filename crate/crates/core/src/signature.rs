//! Body-induced thermal signature models: the softplus (s-relu) distance
//! law for wall mounts, the constant-increase model for ceiling mounts,
//! geometric ROI masks, and least-squares fitting of the distance law.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::layout::{Mount, SensorLayout};
use crate::params::ModelParams;

/// Mean body-induced temperature increase at distance `d_m`:
/// log(1 + exp(σ̄₀ − γ·d)), evaluated overflow-safe.
pub fn srelu_mean(d_m: f64, sigma0_c: f64, gamma_c_per_m: f64) -> f64 {
    softplus(sigma0_c - gamma_c_per_m * d_m)
}

fn softplus(x: f64) -> f64 {
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// Logistic function; the derivative of [`softplus`].
fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SignatureVariant {
    /// h_k(d) = σ̄(d)·b_k with σ̄(d) from the s-relu law (wall mounts).
    WallDistanceDependent,
    /// h_k = σ̄·b_k with constant σ̄ (ceiling mounts).
    CeilingConstant,
}

/// Where a target is relative to the array, for signature evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TargetState {
    /// Θ = ∅: no body, zero signature.
    Absent,
    /// Body at the given range (wall mounts).
    AtDistance(f64),
    /// Body present under the array (ceiling mounts, range fixed by the
    /// mount height).
    Present,
}

/// Signature model bound to one layout: per-ROI masks plus the scalar
/// increase law of the mount type.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignatureModel {
    pub variant: SignatureVariant,
    /// b_k per ROI, each of length M.
    pub masks: Vec<Vec<bool>>,
    pub sigma0_c: f64,
    pub gamma_c_per_m: f64,
    /// Constant mean increase for the ceiling variant.
    pub sigma_bar_c: f64,
    /// Deviation σ_T of the increase around its mean.
    pub sigma_t_c: f64,
    pub d_min_m: f64,
    pub d_max_m: f64,
}

impl SignatureModel {
    pub fn from_layout(layout: &SensorLayout, params: &ModelParams) -> Result<Self> {
        layout.validate()?;
        let masks = layout.rois.iter().map(|r| r.mask.clone()).collect();
        match layout.mount {
            Mount::Wall => {
                let (d_min, d_max) = layout.distance_bounds()?;
                Ok(SignatureModel {
                    variant: SignatureVariant::WallDistanceDependent,
                    masks,
                    sigma0_c: params.sigma0_c,
                    gamma_c_per_m: params.gamma_c_per_m,
                    sigma_bar_c: 0.0,
                    sigma_t_c: params.sigma_t_wall_c,
                    d_min_m: d_min,
                    d_max_m: d_max,
                })
            }
            Mount::Ceiling => {
                if params.sigma_bar_ceiling_c <= 0.0 {
                    return Err(Error::Config("ceiling σ̄ must be positive".into()));
                }
                Ok(SignatureModel {
                    variant: SignatureVariant::CeilingConstant,
                    masks,
                    sigma0_c: params.sigma0_c,
                    gamma_c_per_m: params.gamma_c_per_m,
                    sigma_bar_c: params.sigma_bar_ceiling_c,
                    sigma_t_c: params.sigma_t_ceiling_c,
                    d_min_m: 0.0,
                    d_max_m: 0.0,
                })
            }
        }
    }

    pub fn roi_count(&self) -> usize {
        self.masks.len()
    }

    /// Mean increase for a present target: σ̄(d) (wall) or σ̄ (ceiling).
    pub fn mean_increase(&self, target: TargetState) -> Result<f64> {
        match (self.variant, target) {
            (_, TargetState::Absent) => Ok(0.0),
            (SignatureVariant::WallDistanceDependent, TargetState::AtDistance(d)) => {
                if d < 0.0 {
                    return Err(Error::Usage(format!("negative distance {d}")));
                }
                Ok(srelu_mean(d, self.sigma0_c, self.gamma_c_per_m))
            }
            (SignatureVariant::CeilingConstant, TargetState::Present) => Ok(self.sigma_bar_c),
            (SignatureVariant::WallDistanceDependent, TargetState::Present) => Err(Error::Usage(
                "wall signature requires a distance".into(),
            )),
            (SignatureVariant::CeilingConstant, TargetState::AtDistance(_)) => Err(Error::Usage(
                "ceiling signature takes no distance".into(),
            )),
        }
    }

    /// The M-vector signature h_k(Θ) of ROI `k` for the given target state.
    pub fn signature(&self, k: usize, target: TargetState) -> Result<Vec<f64>> {
        let mask = self
            .masks
            .get(k)
            .ok_or_else(|| Error::Usage(format!("ROI index {k} out of range")))?;
        let s = self.mean_increase(target)?;
        Ok(mask.iter().map(|&b| if b { s } else { 0.0 }).collect())
    }
}

/// Derives the binary detector masks from layout geometry alone.
///
/// Wall: every detector column is assigned to the ROI whose AOA is nearest
/// to the column azimuth (all rows selected), which yields contiguous
/// column groups covering the full FOV. Ceiling: a detector belongs to the
/// ROI whose floor cell contains its downward projection.
pub fn build_geometric_masks(layout: &SensorLayout) -> Result<Vec<Vec<bool>>> {
    let m = layout.detectors();
    let k_count = layout.roi_count();
    let mut masks = vec![vec![false; m]; k_count];
    match layout.mount {
        Mount::Wall => {
            let half = layout.fov_deg / 2.0;
            let mut aoas = Vec::with_capacity(k_count);
            for r in &layout.rois {
                let a = r
                    .aoa_deg
                    .ok_or_else(|| Error::Layout(format!("ROI {} lacks aoa_deg", r.index)))?;
                if a.abs() > half {
                    return Err(Error::Layout(format!(
                        "ROI {} AOA {a}° is outside the ±{half}° FOV",
                        r.index
                    )));
                }
                aoas.push(a);
            }
            for c in 0..layout.cols {
                let az = layout.column_azimuth_deg(c);
                let mut best = 0usize;
                for (k, &a) in aoas.iter().enumerate() {
                    if (az - a).abs() < (az - aoas[best]).abs() {
                        best = k;
                    }
                }
                for r in 0..layout.rows {
                    masks[best][r * layout.cols + c] = true;
                }
            }
        }
        Mount::Ceiling => {
            let cell = layout.roi_cell()?;
            let centres = layout.footprints()?;
            for row in 0..layout.rows {
                for col in 0..layout.cols {
                    let [x, y] = layout.detector_floor_xy(row, col)?;
                    for (k, c) in centres.iter().enumerate() {
                        if (x - c[0]).abs() <= cell / 2.0 && (y - c[1]).abs() <= cell / 2.0 {
                            masks[k][row * layout.cols + col] = true;
                            break;
                        }
                    }
                }
            }
        }
    }
    for (k, mask) in masks.iter().enumerate() {
        if !mask.iter().any(|&b| b) {
            return Err(Error::Layout(format!(
                "ROI {k} selects no detectors (check AOA/footprint against the FOV)"
            )));
        }
    }
    Ok(masks)
}

/// Result of fitting the s-relu law to (distance, observed increase) pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SreluFit {
    pub sigma0_c: f64,
    pub gamma_c_per_m: f64,
    pub rmse_c: f64,
    pub iterations: usize,
}

/// Least-squares fit of (σ̄₀, γ) by Gauss–Newton with Levenberg damping.
///
/// Initial guess: σ̄₀ from the largest observed increase plus log 2, γ from
/// the slope between the nearest and farthest samples.
pub fn fit_srelu(samples: &[(f64, f64)]) -> Result<SreluFit> {
    if samples.len() < 2 {
        return Err(Error::Usage("s-relu fit needs at least two samples".into()));
    }
    let d_lo = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let d_hi = samples.iter().map(|s| s.0).fold(f64::NEG_INFINITY, f64::max);
    if !(d_hi - d_lo > 1e-9) {
        return Err(Error::Usage("s-relu fit needs at least two distinct distances".into()));
    }

    let nearest = samples
        .iter()
        .cloned()
        .min_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    let farthest = samples
        .iter()
        .cloned()
        .max_by(|a, b| a.0.partial_cmp(&b.0).unwrap())
        .unwrap();
    let obs_max = samples.iter().map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let mut gamma = ((nearest.1 - farthest.1) / (d_hi - d_lo)).max(0.01);
    let mut sigma0 = obs_max + std::f64::consts::LN_2;

    let cost = |s0: f64, g: f64| -> f64 {
        samples.iter().map(|&(d, o)| (srelu_mean(d, s0, g) - o).powi(2)).sum()
    };

    let mut damping = 1e-6;
    let mut current = cost(sigma0, gamma);
    let mut iterations = 0;
    for _ in 0..200 {
        iterations += 1;
        // normal equations of the 2-parameter Jacobian
        let (mut jtj00, mut jtj01, mut jtj11, mut jtr0, mut jtr1) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(d, o) in samples {
            let x = sigma0 - gamma * d;
            let p = sigmoid(x);
            let r = softplus(x) - o;
            let j0 = p;
            let j1 = -d * p;
            jtj00 += j0 * j0;
            jtj01 += j0 * j1;
            jtj11 += j1 * j1;
            jtr0 += j0 * r;
            jtr1 += j1 * r;
        }
        let mut improved = false;
        for _ in 0..12 {
            let a00 = jtj00 + damping;
            let a11 = jtj11 + damping;
            let det = a00 * a11 - jtj01 * jtj01;
            if det.abs() < 1e-300 {
                break;
            }
            let ds0 = (-jtr0 * a11 + jtr1 * jtj01) / det;
            let dg = (-jtr1 * a00 + jtr0 * jtj01) / det;
            let trial = cost(sigma0 + ds0, gamma + dg);
            if trial <= current {
                sigma0 += ds0;
                gamma += dg;
                let delta = ds0.abs().max(dg.abs());
                let gain = current - trial;
                current = trial;
                damping = (damping / 3.0).max(1e-12);
                improved = true;
                if delta < 1e-12 || gain < 1e-16 {
                    let rmse = (current / samples.len() as f64).sqrt();
                    return Ok(SreluFit { sigma0_c: sigma0, gamma_c_per_m: gamma, rmse_c: rmse, iterations });
                }
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let rmse = (current / samples.len() as f64).sqrt();
    Ok(SreluFit { sigma0_c: sigma0, gamma_c_per_m: gamma, rmse_c: rmse, iterations })
}
