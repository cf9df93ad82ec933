//! Wall-mount recursive estimation of per-ROI occupancy, distance and AOA:
//! per-ROI ML occupancy over a marginalized distance grid, then grid-based
//! Bayesian filtering of the distance posterior with a 1-D random-walk
//! transition kernel. All weights live in the log domain.

use serde::{Deserialize, Serialize};

use crate::background::BackgroundModel;
use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::gaussian::{log_sum_exp, SubGaussian};
use crate::layout::{Mount, SensorLayout};
use crate::params::ModelParams;
use crate::signature::{srelu_mean, SignatureModel};

/// Discretized distance posterior Λ_{t,k}(d) for one ROI.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DistancePosterior {
    pub roi: usize,
    pub grid_m: Vec<f64>,
    pub log_weights: Vec<f64>,
}

impl DistancePosterior {
    /// Grid argmax, lowest index on ties.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, &w) in self.log_weights.iter().enumerate() {
            if w > self.log_weights[best] {
                best = i;
            }
        }
        best
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.log_weights.iter().map(|&w| w.exp()).collect()
    }
}

/// Per-ROI tracking output at one time step.
#[derive(Debug, Clone)]
pub struct RoiTrack {
    pub roi: usize,
    pub occupied: bool,
    pub posterior: DistancePosterior,
    pub d_hat_m: Option<f64>,
    pub theta_hat_deg: Option<f64>,
    /// log Pr(y|r=1) − log Pr(y|r=0); ranking score across ROIs.
    pub log_odds: f64,
}

#[derive(Debug, Clone)]
pub struct TrackState {
    pub ts_ms: u64,
    pub rois: Vec<RoiTrack>,
}

impl TrackState {
    /// The occupied ROI with the strongest occupancy evidence, if any.
    pub fn best(&self) -> Option<&RoiTrack> {
        self.rois
            .iter()
            .filter(|r| r.occupied)
            .max_by(|a, b| a.log_odds.partial_cmp(&b.log_odds).unwrap())
    }
}

/// Wall-mount tracker state machine; one per sensor stream.
pub struct Tracker {
    grid: Vec<f64>,
    /// σ̄(d) per grid point.
    sigma_grid: Vec<f64>,
    /// log transition kernel, `kernel[from][to]`, rows normalized on the
    /// truncated grid.
    kernel: Vec<Vec<f64>>,
    /// Per ROI: empty-scene density and body density (same mask, inflated
    /// covariance), plus the ROI AOA.
    empty: Vec<SubGaussian>,
    occupied: Vec<SubGaussian>,
    thetas: Vec<f64>,
    log_uniform_weight: f64,
    prev: Vec<RoiState>,
    /// Steps on which a posterior collapsed to all -inf and was reset.
    pub degenerate_resets: u64,
    sigma_model: SignatureModel,
    layout: SensorLayout,
}

#[derive(Debug, Clone)]
struct RoiState {
    occupied: bool,
    log_weights: Vec<f64>,
}

impl Tracker {
    pub fn new(layout: &SensorLayout, params: &ModelParams, bg: &BackgroundModel) -> Result<Self> {
        if layout.mount != Mount::Wall {
            return Err(Error::Usage("distance/AOA tracking requires a wall layout".into()));
        }
        layout.validate()?;
        params.validate()?;
        if bg.detectors() != layout.detectors() {
            return Err(Error::Usage("background detector count does not match layout".into()));
        }
        let (d_min, d_max) = layout.distance_bounds()?;
        let n = ((d_max - d_min) / params.delta_d_m + 1e-9).floor() as usize + 1;
        if n < 2 {
            return Err(Error::Config("distance grid needs at least 2 points".into()));
        }
        let grid: Vec<f64> = (0..n).map(|i| d_min + i as f64 * params.delta_d_m).collect();
        let sigma_grid: Vec<f64> =
            grid.iter().map(|&d| srelu_mean(d, params.sigma0_c, params.gamma_c_per_m)).collect();

        let walk_var = (params.walk_speed_mps * params.dt_s).powi(2);
        let kernel = build_kernel(&grid, walk_var);

        let sigma_model = SignatureModel::from_layout(layout, params)?;
        let (empty, occupied) = build_roi_gaussians(layout, params, bg)?;
        let thetas: Vec<f64> = layout
            .rois
            .iter()
            .map(|r| r.aoa_deg.expect("validated wall layout"))
            .collect();

        let log_uniform_weight = -(n as f64).ln();
        let prev = (0..layout.roi_count())
            .map(|_| RoiState { occupied: false, log_weights: vec![log_uniform_weight; n] })
            .collect();

        Ok(Tracker {
            grid,
            sigma_grid,
            kernel,
            empty,
            occupied,
            thetas,
            log_uniform_weight,
            prev,
            degenerate_resets: 0,
            sigma_model,
            layout: layout.clone(),
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn layout(&self) -> &SensorLayout {
        &self.layout
    }

    /// Rebuilds the cached density factorizations after the background
    /// model was updated.
    pub fn rebind_background(&mut self, params: &ModelParams, bg: &BackgroundModel) -> Result<()> {
        let (empty, occupied) = build_roi_gaussians(&self.layout, params, bg)?;
        self.empty = empty;
        self.occupied = occupied;
        Ok(())
    }

    /// log N(y_k; μ_k + σ̄(d)·1, C_k + σ_T²·I) on the mask support of ROI k.
    pub fn log_likelihood_occupied(&self, frame: &ThermalFrame, k: usize, d_m: f64) -> f64 {
        let s = srelu_mean(d_m, self.sigma_model.sigma0_c, self.sigma_model.gamma_c_per_m);
        self.occupied[k].logpdf_shifted(&frame.temps, s)
    }

    /// log N(y_k; μ_k, C_k) on the mask support of ROI k.
    pub fn log_likelihood_empty(&self, frame: &ThermalFrame, k: usize) -> f64 {
        self.empty[k].logpdf(&frame.temps)
    }

    /// log Pr(y | r_k = 1): the grid marginalization of the occupied
    /// likelihood under a uniform distance prior,
    /// (Δd/(d_max−d_min))·Σ_d Γ(y|d), via log-sum-exp.
    pub fn log_likelihood_occupied_marginal(&self, frame: &ThermalFrame, k: usize) -> f64 {
        let logs = self.grid_log_likelihoods(frame, k);
        marginal_from_grid(&logs, &self.grid)
    }

    /// ML occupancy decision for ROI k; ties resolve to empty.
    pub fn detect_occupancy(&self, frame: &ThermalFrame, k: usize) -> bool {
        self.log_likelihood_occupied_marginal(frame, k) > self.log_likelihood_empty(frame, k)
    }

    fn grid_log_likelihoods(&self, frame: &ThermalFrame, k: usize) -> Vec<f64> {
        self.sigma_grid
            .iter()
            .map(|&s| self.occupied[k].logpdf_shifted(&frame.temps, s))
            .collect()
    }

    /// One tracking round: occupancy, posterior propagation/update, point
    /// estimates. Returns an immutable snapshot.
    pub fn step(&mut self, frame: &ThermalFrame) -> Result<TrackState> {
        frame.validate(self.layout.detectors())?;
        let n = self.grid.len();
        let mut rois = Vec::with_capacity(self.prev.len());
        for k in 0..self.prev.len() {
            let grid_logs = self.grid_log_likelihoods(frame, k);
            let log_occ = marginal_from_grid(&grid_logs, &self.grid);
            let log_empty = self.empty[k].logpdf(&frame.temps);
            let occupied = log_occ > log_empty;
            let log_odds = log_occ - log_empty;

            let mut log_weights = if occupied {
                let prior = if self.prev[k].occupied {
                    propagate(&self.prev[k].log_weights, &self.kernel)
                } else {
                    vec![self.log_uniform_weight; n]
                };
                let mut w: Vec<f64> =
                    prior.iter().zip(grid_logs.iter()).map(|(p, l)| p + l).collect();
                let norm = log_sum_exp(&w);
                if norm.is_finite() {
                    for v in &mut w {
                        *v -= norm;
                    }
                } else {
                    self.degenerate_resets += 1;
                    w = vec![self.log_uniform_weight; n];
                }
                w
            } else {
                vec![self.log_uniform_weight; n]
            };

            // keep exact normalization under long products
            let norm = log_sum_exp(&log_weights);
            for v in &mut log_weights {
                *v -= norm;
            }

            let posterior = DistancePosterior {
                roi: k,
                grid_m: self.grid.clone(),
                log_weights: log_weights.clone(),
            };
            let (d_hat_m, theta_hat_deg) = if occupied {
                (Some(self.grid[posterior.argmax()]), Some(self.thetas[k]))
            } else {
                (None, None)
            };
            self.prev[k] = RoiState { occupied, log_weights };
            rois.push(RoiTrack { roi: k, occupied, posterior, d_hat_m, theta_hat_deg, log_odds });
        }
        Ok(TrackState { ts_ms: frame.ts_ms, rois })
    }
}

fn build_roi_gaussians(
    layout: &SensorLayout,
    params: &ModelParams,
    bg: &BackgroundModel,
) -> Result<(Vec<SubGaussian>, Vec<SubGaussian>)> {
    let mut empty = Vec::with_capacity(layout.roi_count());
    let mut occupied = Vec::with_capacity(layout.roi_count());
    let sigma_t2 = params.sigma_t_wall_c.powi(2);
    for roi in &layout.rois {
        let (mu_k, cov_k) = bg.subset(&roi.mask)?;
        let idx = roi.support();
        empty.push(SubGaussian::new(idx.clone(), mu_k.clone(), cov_k.clone())?);
        let mut cov_body = cov_k;
        for i in 0..mu_k.len() {
            cov_body[(i, i)] += sigma_t2;
        }
        occupied.push(SubGaussian::new(idx, mu_k, cov_body)?);
    }
    Ok((empty, occupied))
}

/// log Pr(y|r=1) from per-grid-point log likelihoods: the finite-sum form
/// of the uniform-prior marginal, Δd/(d_max−d_min) per point.
fn marginal_from_grid(grid_logs: &[f64], grid: &[f64]) -> f64 {
    let d_min = grid[0];
    let d_max = grid[grid.len() - 1];
    let delta = grid[1] - grid[0];
    log_sum_exp(grid_logs) + (delta / (d_max - d_min)).ln()
}

/// Row-normalized Gaussian random-walk kernel on the truncated grid,
/// log Pr(d_to | d_from), rows summing to one.
fn build_kernel(grid: &[f64], walk_var: f64) -> Vec<Vec<f64>> {
    let n = grid.len();
    let mut kernel = Vec::with_capacity(n);
    for i in 0..n {
        let mut row: Vec<f64> = if walk_var > 0.0 {
            grid.iter().map(|&d| -(d - grid[i]).powi(2) / (2.0 * walk_var)).collect()
        } else {
            (0..n).map(|j| if j == i { 0.0 } else { f64::NEG_INFINITY }).collect()
        };
        let norm = log_sum_exp(&row);
        for v in &mut row {
            *v -= norm;
        }
        kernel.push(row);
    }
    kernel
}

/// Chapman–Kolmogorov step in log domain: prior(j) = Σ_i post(i)·K[i][j].
fn propagate(log_post: &[f64], kernel: &[Vec<f64>]) -> Vec<f64> {
    let n = log_post.len();
    let mut scratch = vec![0.0; n];
    (0..n)
        .map(|j| {
            for i in 0..n {
                scratch[i] = log_post[i] + kernel[i][j];
            }
            log_sum_exp(&scratch)
        })
        .collect()
}

/// One matched (estimate, truth) localization sample.
#[derive(Debug, Clone, Copy)]
pub struct RmseSample {
    pub est_d_m: f64,
    pub est_theta_deg: f64,
    pub true_d_m: f64,
    pub true_theta_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseRow {
    pub true_d_m: f64,
    pub n: usize,
    pub rmse_d_m: f64,
    pub rmse_theta_deg: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RmseReport {
    pub n: usize,
    pub rmse_d_m: f64,
    pub rmse_theta_deg: f64,
    /// Per-true-distance breakdown, ascending.
    pub rows: Vec<RmseRow>,
}

/// Distance and AOA RMSE over matched samples, with a per-true-distance
/// breakdown.
pub fn rmse_report(samples: &[RmseSample]) -> Result<RmseReport> {
    if samples.is_empty() {
        return Err(Error::Usage("RMSE evaluation needs at least one matched sample".into()));
    }
    let mut groups: std::collections::BTreeMap<i64, Vec<&RmseSample>> = Default::default();
    for s in samples {
        groups.entry((s.true_d_m * 1000.0).round() as i64).or_default().push(s);
    }
    let mse = |xs: &[&RmseSample]| {
        let d: f64 = xs.iter().map(|s| (s.est_d_m - s.true_d_m).powi(2)).sum::<f64>()
            / xs.len() as f64;
        let t: f64 = xs
            .iter()
            .map(|s| (s.est_theta_deg - s.true_theta_deg).powi(2))
            .sum::<f64>()
            / xs.len() as f64;
        (d.sqrt(), t.sqrt())
    };
    let all: Vec<&RmseSample> = samples.iter().collect();
    let (rmse_d, rmse_t) = mse(&all);
    let rows = groups
        .into_iter()
        .map(|(key, xs)| {
            let (d, t) = mse(&xs);
            RmseRow { true_d_m: key as f64 / 1000.0, n: xs.len(), rmse_d_m: d, rmse_theta_deg: t }
        })
        .collect();
    Ok(RmseReport { n: samples.len(), rmse_d_m: rmse_d, rmse_theta_deg: rmse_t, rows })
}

/// Wire form of one per-ROI estimate.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EstimateRecord {
    #[serde(with = "crate::frame::u64_as_string")]
    pub sensor_id: u64,
    pub ts_ms: u64,
    pub roi: usize,
    pub occupied: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_hat_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_hat_deg: Option<f64>,
    pub log_odds: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub posterior: Option<Vec<f64>>,
}

impl EstimateRecord {
    pub fn from_state(
        state: &TrackState,
        sensor_id: u64,
        include_posterior: bool,
    ) -> Vec<EstimateRecord> {
        state
            .rois
            .iter()
            .map(|r| EstimateRecord {
                sensor_id,
                ts_ms: state.ts_ms,
                roi: r.roi,
                occupied: r.occupied,
                d_hat_m: r.d_hat_m,
                theta_hat_deg: r.theta_hat_deg,
                log_odds: r.log_odds,
                posterior: include_posterior.then(|| r.posterior.probabilities()),
            })
            .collect()
    }
}
