//! Ceiling-mount MAP occupancy over K ROIs with iterative prior
//! propagation, subject counting and mutual-distancing alerts.
//!
//! The joint occupancy posterior is kept on the bounded support of binary
//! K-vectors with at most ζ ones; per-ROI likelihoods follow the
//! constant-increase ceiling signature model.

use serde::{Deserialize, Serialize};

use crate::background::BackgroundModel;
use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::gaussian::{log_sum_exp, SubGaussian};
use crate::layout::{Mount, SensorLayout};
use crate::params::ModelParams;
use crate::signature::SignatureModel;

/// Nearest-neighbour occupancy chain: a body stays in its ROI, moves to a
/// spatially adjacent ROI, or leaves; new bodies enter at border ROIs.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransitionModel {
    pub p_stay: f64,
    /// Total probability of moving, split equally over adjacent ROIs.
    pub p_move: f64,
    pub p_exit: f64,
    /// Per-step entry probability at each entry ROI.
    pub p_birth: f64,
    /// Adjacency lists by ROI index.
    pub adjacency: Vec<Vec<usize>>,
    /// ROIs where new bodies may appear.
    pub entry_rois: Vec<bool>,
}

impl TransitionModel {
    /// Builds the chain from ceiling footprints: ROIs within 1.5 cell edges
    /// are adjacent, and ROIs with fewer neighbours than the interior
    /// maximum count as entry points.
    pub fn from_layout(layout: &SensorLayout) -> Result<Self> {
        Self::from_layout_with(layout, 0.8, 0.15, 0.05, 0.05)
    }

    pub fn from_layout_with(
        layout: &SensorLayout,
        p_stay: f64,
        p_move: f64,
        p_exit: f64,
        p_birth: f64,
    ) -> Result<Self> {
        if layout.mount != Mount::Ceiling {
            return Err(Error::Usage("occupancy transitions require a ceiling layout".into()));
        }
        let cell = layout.roi_cell()?;
        let centres = layout.footprints()?;
        let k = centres.len();
        let mut adjacency = vec![Vec::new(); k];
        for i in 0..k {
            for j in 0..k {
                if i == j {
                    continue;
                }
                let dx = centres[i][0] - centres[j][0];
                let dy = centres[i][1] - centres[j][1];
                if (dx * dx + dy * dy).sqrt() <= 1.5 * cell {
                    adjacency[i].push(j);
                }
            }
        }
        let max_neighbours = adjacency.iter().map(|a| a.len()).max().unwrap_or(0);
        let entry_rois = adjacency
            .iter()
            .map(|a| a.len() < max_neighbours || max_neighbours == 0)
            .collect();
        let tm = TransitionModel { p_stay, p_move, p_exit, p_birth, adjacency, entry_rois };
        tm.validate()?;
        Ok(tm)
    }

    pub fn validate(&self) -> Result<()> {
        let sum = self.p_stay + self.p_move + self.p_exit;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Config(format!(
                "p_stay + p_move + p_exit must be 1, got {sum}"
            )));
        }
        if !(0.0..=1.0).contains(&self.p_birth) {
            return Err(Error::Config("p_birth must lie in [0, 1]".into()));
        }
        if self.entry_rois.len() != self.adjacency.len() {
            return Err(Error::Config("entry_rois length mismatch".into()));
        }
        Ok(())
    }

    /// Probability that a body currently at `from` lands on `to` next step.
    fn move_prob(&self, from: usize, to: usize) -> f64 {
        if from == to {
            self.p_stay
        } else if self.adjacency[from].contains(&to) {
            self.p_move / self.adjacency[from].len() as f64
        } else {
            0.0
        }
    }

}

/// Per-ROI occupancy transition Pr(r_{t,k} = 1 | r_{t-1}).
pub trait OccupancyTransition {
    fn prob_occupied(&self, k: usize, prev: &[bool]) -> f64;
}

impl OccupancyTransition for TransitionModel {
    /// One minus the probability that no present body lands on k and no
    /// new body enters there.
    fn prob_occupied(&self, k: usize, prev: &[bool]) -> f64 {
        let mut p_unreached = 1.0;
        for (j, &occ) in prev.iter().enumerate() {
            if occ {
                p_unreached *= 1.0 - self.move_prob(j, k);
            }
        }
        let p_no_birth = if self.entry_rois[k] { 1.0 - self.p_birth } else { 1.0 };
        1.0 - p_unreached * p_no_birth
    }
}

/// Joint occupancy posterior over the bounded support {r : Σr ≤ ζ}.
#[derive(Debug, Clone)]
pub struct OccupancyPosterior {
    /// All binary K-vectors with at most ζ ones, in ascending bit order
    /// (bit k = ROI k); includes the all-zero vector first.
    pub support: Vec<Vec<bool>>,
    pub log_probs: Vec<f64>,
    pub zeta: usize,
}

impl OccupancyPosterior {
    /// Uniform posterior over the support.
    pub fn uniform(k: usize, zeta: usize) -> Result<Self> {
        let support = bounded_support(k, zeta)?;
        let w = -(support.len() as f64).ln();
        let log_probs = vec![w; support.len()];
        Ok(OccupancyPosterior { support, log_probs, zeta })
    }

    /// Marginal Pr(r_k = 1) under this posterior.
    pub fn marginal(&self, k: usize) -> f64 {
        let mut acc = Vec::new();
        for (s, &lp) in self.support.iter().zip(self.log_probs.iter()) {
            if s[k] {
                acc.push(lp);
            }
        }
        log_sum_exp(&acc).exp()
    }
}

/// Enumerates binary K-vectors with popcount ≤ ζ.
fn bounded_support(k: usize, zeta: usize) -> Result<Vec<Vec<bool>>> {
    if k == 0 || k > 20 {
        return Err(Error::Usage(format!("support enumeration supports 1..=20 ROIs, got {k}")));
    }
    let mut support = Vec::new();
    for bits in 0u32..(1u32 << k) {
        if bits.count_ones() as usize <= zeta {
            support.push((0..k).map(|i| bits >> i & 1 == 1).collect());
        }
    }
    Ok(support)
}

/// Per-ROI prior Pr(r_{t,k} = 1 | Y_{t-1}) by summing the transition over
/// the bounded support of the previous posterior.
pub fn propagate_prior(posterior: &OccupancyPosterior, tm: &impl OccupancyTransition) -> Vec<f64> {
    let k_count = posterior.support[0].len();
    (0..k_count)
        .map(|k| {
            let mut p = 0.0;
            for (r_prev, &lp) in posterior.support.iter().zip(posterior.log_probs.iter()) {
                p += tm.prob_occupied(k, r_prev) * lp.exp();
            }
            p.clamp(0.0, 1.0)
        })
        .collect()
}

/// Output of one counting round.
#[derive(Debug, Clone)]
pub struct CountStep {
    pub ts_ms: u64,
    /// MAP occupancy r̂ under the Σ ≤ ζ constraint.
    pub occupied: Vec<bool>,
    pub count: usize,
    /// Per-ROI posterior marginals Pr(r_k = 1 | Y_t).
    pub marginals: Vec<f64>,
}

/// Number of occupied spots S = Σ r̂_k.
pub fn count(r: &[bool]) -> usize {
    r.iter().filter(|&&b| b).count()
}

/// Ceiling-mount occupancy filter; one per sensor stream.
pub struct CountingFilter {
    empty: Vec<SubGaussian>,
    occupied: Vec<SubGaussian>,
    sigma_bar: f64,
    transition: TransitionModel,
    posterior: OccupancyPosterior,
    detectors: usize,
}

impl CountingFilter {
    pub fn new(
        layout: &SensorLayout,
        params: &ModelParams,
        bg: &BackgroundModel,
        transition: TransitionModel,
        zeta: usize,
    ) -> Result<Self> {
        if layout.mount != Mount::Ceiling {
            return Err(Error::Usage("counting requires a ceiling layout".into()));
        }
        layout.validate()?;
        if zeta == 0 {
            return Err(Error::Usage("ζ must be at least 1".into()));
        }
        let sig = SignatureModel::from_layout(layout, params)?;
        let sigma_t2 = params.sigma_t_ceiling_c.powi(2);
        let mut empty = Vec::with_capacity(layout.roi_count());
        let mut occupied = Vec::with_capacity(layout.roi_count());
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
        let posterior = OccupancyPosterior::uniform(layout.roi_count(), zeta)?;
        Ok(CountingFilter {
            empty,
            occupied,
            sigma_bar: sig.sigma_bar_c,
            transition,
            posterior,
            detectors: layout.detectors(),
        })
    }

    pub fn posterior(&self) -> &OccupancyPosterior {
        &self.posterior
    }

    /// Per-ROI priors for the upcoming frame.
    pub fn priors(&self) -> Vec<f64> {
        propagate_prior(&self.posterior, &self.transition)
    }

    /// log Pr(y | r_k) for both hypotheses of one ROI.
    pub fn log_likelihoods(&self, frame: &ThermalFrame, k: usize) -> (f64, f64) {
        let l0 = self.empty[k].logpdf(&frame.temps);
        let l1 = self.occupied[k].logpdf_shifted(&frame.temps, self.sigma_bar);
        (l0, l1)
    }

    /// (log q_k, log(1−q_k)) for every ROI, where q_k = Pr(r_k = 1 | y, prior).
    /// Kept in the log domain so that support scoring stays exact even when
    /// the linear marginal saturates at 0 or 1.
    pub fn log_marginal_pairs(
        &self,
        frame: &ThermalFrame,
        priors: &[f64],
    ) -> Result<Vec<(f64, f64)>> {
        frame.validate(self.detectors)?;
        let k_count = self.empty.len();
        if priors.len() != k_count {
            return Err(Error::Usage("prior vector length does not match K".into()));
        }
        let mut pairs = Vec::with_capacity(k_count);
        for k in 0..k_count {
            let (l0, l1) = self.log_likelihoods(frame, k);
            pairs.push(log_marginal_pair(l0, l1, priors[k]));
        }
        Ok(pairs)
    }

    /// MAP occupancy for a frame under explicit priors, without touching
    /// the filter state. Returns r̂ and the per-ROI posterior marginals.
    pub fn map_occupancy(
        &self,
        frame: &ThermalFrame,
        priors: &[f64],
    ) -> Result<(Vec<bool>, Vec<f64>)> {
        let pairs = self.log_marginal_pairs(frame, priors)?;
        let best = argmax_support(&self.posterior.support, &pairs);
        let marginals = pairs.iter().map(|&(lq, _)| lq.exp()).collect();
        Ok((self.posterior.support[best].clone(), marginals))
    }

    /// One filtering round: propagate priors, decide MAP occupancy, refresh
    /// the joint posterior over the bounded support.
    pub fn step(&mut self, frame: &ThermalFrame) -> Result<CountStep> {
        let priors = self.priors();
        let pairs = self.log_marginal_pairs(frame, &priors)?;
        let best = argmax_support(&self.posterior.support, &pairs);
        let occupied = self.posterior.support[best].clone();
        let marginals: Vec<f64> = pairs.iter().map(|&(lq, _)| lq.exp()).collect();

        let mut log_probs: Vec<f64> =
            self.posterior.support.iter().map(|r| support_score(r, &pairs)).collect();
        let norm = log_sum_exp(&log_probs);
        if norm.is_finite() {
            for lp in &mut log_probs {
                *lp -= norm;
            }
        } else {
            // every support state ruled out (more bodies than ζ); fall back
            // to the product measure renormalized over the MAP state alone
            log_probs = vec![f64::NEG_INFINITY; self.posterior.support.len()];
            log_probs[best] = 0.0;
        }
        self.posterior.log_probs = log_probs;

        Ok(CountStep { ts_ms: frame.ts_ms, count: count(&occupied), occupied, marginals })
    }
}

/// Product score Σ_k r_k·log q_k + (1−r_k)·log(1−q_k) of one support state.
fn support_score(r: &[bool], pairs: &[(f64, f64)]) -> f64 {
    r.iter().zip(pairs.iter()).map(|(&occ, &(lq, l1q))| if occ { lq } else { l1q }).sum()
}

/// First maximal support state under the product score.
fn argmax_support(support: &[Vec<bool>], pairs: &[(f64, f64)]) -> usize {
    let mut best = 0usize;
    let mut best_score = f64::NEG_INFINITY;
    for (si, r) in support.iter().enumerate() {
        let score = support_score(r, pairs);
        if score > best_score {
            best_score = score;
            best = si;
        }
    }
    best
}

/// (log q, log(1−q)) with q = Pr(r_k = 1 | y, prior), evaluated without
/// leaving the log domain.
fn log_marginal_pair(l0: f64, l1: f64, prior: f64) -> (f64, f64) {
    if prior <= 0.0 {
        return (f64::NEG_INFINITY, 0.0);
    }
    if prior >= 1.0 {
        return (0.0, f64::NEG_INFINITY);
    }
    let a = l1 + prior.ln();
    let b = l0 + (1.0 - prior).ln();
    let norm = log_sum_exp(&[a, b]);
    (a - norm, b - norm)
}

/// One mutual-distancing violation, deduplicated per aggregation window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancingAlert {
    /// First frame in the window on which the pair violated the threshold.
    pub ts_ms: u64,
    pub roi_pair: (usize, usize),
    pub distance_m: f64,
    /// Aggregation window id: ts_ms / window_ms.
    pub window: u64,
}

/// Scans an occupancy sequence for ROI pairs closer than `threshold_m`,
/// emitting one alert per (pair, window).
pub fn distancing_alerts(
    steps: &[CountStep],
    footprints_m: &[[f64; 2]],
    threshold_m: f64,
    window_ms: u64,
) -> Result<Vec<DistancingAlert>> {
    if window_ms == 0 {
        return Err(Error::Usage("aggregation window must be positive".into()));
    }
    let mut seen: std::collections::HashSet<(usize, usize, u64)> = Default::default();
    let mut alerts = Vec::new();
    for step in steps {
        let occ: Vec<usize> = step
            .occupied
            .iter()
            .enumerate()
            .filter_map(|(k, &b)| b.then_some(k))
            .collect();
        for (a, &j) in occ.iter().enumerate() {
            for &k in &occ[a + 1..] {
                if j >= footprints_m.len() || k >= footprints_m.len() {
                    return Err(Error::Usage("footprints missing for occupied ROI".into()));
                }
                let dx = footprints_m[j][0] - footprints_m[k][0];
                let dy = footprints_m[j][1] - footprints_m[k][1];
                let dist = (dx * dx + dy * dy).sqrt();
                if dist < threshold_m {
                    let window = step.ts_ms / window_ms;
                    if seen.insert((j, k, window)) {
                        alerts.push(DistancingAlert {
                            ts_ms: step.ts_ms,
                            roi_pair: (j, k),
                            distance_m: dist,
                            window,
                        });
                    }
                }
            }
        }
    }
    Ok(alerts)
}

/// Wire form of one occupancy snapshot.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OccupancyRecord {
    #[serde(with = "crate::frame::u64_as_string")]
    pub sensor_id: u64,
    pub ts_ms: u64,
    pub r: Vec<u8>,
    pub count: usize,
}

impl OccupancyRecord {
    pub fn from_step(step: &CountStep, sensor_id: u64) -> Self {
        OccupancyRecord {
            sensor_id,
            ts_ms: step.ts_ms,
            r: step.occupied.iter().map(|&b| u8::from(b)).collect(),
            count: step.count,
        }
    }
}

/// Wire form of one distancing alert.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AlertRecord {
    #[serde(with = "crate::frame::u64_as_string")]
    pub sensor_id: u64,
    pub ts_ms: u64,
    pub roi_pair: (usize, usize),
    pub distance_m: f64,
    pub window: u64,
}
