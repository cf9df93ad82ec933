//! Contactless body-temperature estimation and anomalous-temperature
//! detection: spot-fraction and ambient corrections, per-frame
//! log-likelihood ratios between the fever (F1) and safe (F0) hypotheses,
//! majority voting over an inspection window, and sequential IR+radar
//! distance fusion.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::background::BackgroundModel;
use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::gaussian::{SubGaussian, LN_2PI};
use crate::params::ModelParams;
use crate::signature::{SignatureModel, TargetState};

/// Screening is validated up to this subject range.
pub const SCREENING_MAX_RANGE_M: f64 = 1.1;
/// Ambient band over which the measurement model holds.
pub const AMBIENT_RANGE_C: (f64, f64) = (20.0, 28.0);
/// Linear spot-fraction model is preferred below this range.
pub const LINEAR_ALPHA_RANGE_M: f64 = 0.75;
/// Lower clamp of the spot fraction.
pub const ALPHA_FLOOR: f64 = 0.01;

/// Default accuracy of the IR-only distance estimate (σ, m).
pub const IR_DISTANCE_STD_M: f64 = 0.32;
/// Default accuracy of the radar distance estimate (σ, m).
pub const RADAR_DISTANCE_STD_M: f64 = 0.1;
/// IR/radar disagreement beyond this gate defers to the radar.
pub const FUSION_GATE_M: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AlphaMode {
    /// Linear below [`LINEAR_ALPHA_RANGE_M`], quadratic beyond.
    Auto,
    Linear,
    Quadratic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FeverState {
    F0,
    F1,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScreeningWarning {
    /// Fused distance beyond the validated screening range.
    RangeExceeded,
    /// Ambient temperature outside the validated band.
    AmbientOutOfRange,
    /// Spot fraction hit its lower clamp; distance beyond reliability.
    AlphaClamped,
}

/// Ambient temperature: the detector-average of the background mean.
pub fn ambient_temperature(bg: &BackgroundModel) -> f64 {
    bg.mean_temperature()
}

/// The detector with the largest excess over the background and its
/// absolute reading. Ties resolve to the lowest index.
pub fn hot_pixel(frame: &ThermalFrame, mu: &nalgebra::DVector<f64>) -> Result<(usize, f64)> {
    if frame.temps.len() != mu.len() {
        return Err(Error::Usage("frame length does not match background".into()));
    }
    let mut best = 0usize;
    let mut best_excess = f64::NEG_INFINITY;
    for (m, &t) in frame.temps.iter().enumerate() {
        let excess = t - mu[m];
        if excess > best_excess {
            best_excess = excess;
            best = m;
        }
    }
    Ok((best, frame.temps[best]))
}

/// Window-averaged absolute temperature T̄: per frame, the absolute
/// reading of the detector with the largest excess over the background,
/// averaged across the window.
pub fn mean_max_temperature(
    frames: &[ThermalFrame],
    mu: &nalgebra::DVector<f64>,
) -> Result<f64> {
    if frames.is_empty() {
        return Err(Error::Usage("temperature window is empty".into()));
    }
    let mut acc = 0.0;
    for f in frames {
        acc += hot_pixel(f, mu)?.1;
    }
    Ok(acc / frames.len() as f64)
}

/// Spot fraction α(d) with its clamp flag.
#[derive(Debug, Clone, Copy)]
pub struct AlphaValue {
    pub value: f64,
    pub clamped: bool,
}

/// Fraction of the sensing spot occupied by the body at distance `d_m`,
/// clamped into [`ALPHA_FLOOR`], 1].
pub fn alpha_fraction(d_m: f64, mode: AlphaMode, params: &ModelParams) -> AlphaValue {
    let raw = match mode {
        AlphaMode::Linear => params.alpha0_linear - params.alpha1_linear * d_m,
        AlphaMode::Quadratic => {
            params.alpha0_quadratic
                - params.alpha1_quadratic * d_m
                - params.alpha2_quadratic * d_m * d_m
        }
        AlphaMode::Auto => {
            let pick = if d_m < LINEAR_ALPHA_RANGE_M {
                AlphaMode::Linear
            } else {
                AlphaMode::Quadratic
            };
            return alpha_fraction(d_m, pick, params);
        }
    };
    let value = raw.clamp(ALPHA_FLOOR, 1.0);
    AlphaValue { value, clamped: value != raw }
}

/// Ambient-dependent measurement correction
/// β = β₀(1 + β₁(T_amb − T_min)/T_min).
pub fn beta_correction(t_amb_c: f64, params: &ModelParams) -> f64 {
    params.beta0 * (1.0 + params.beta1 * (t_amb_c - params.t_min_c) / params.t_min_c)
}

#[derive(Debug, Clone)]
pub struct BodyTempEstimate {
    pub t_body_c: f64,
    pub warnings: Vec<ScreeningWarning>,
}

/// Inverts the measurement model β·T̄ = α·T_body + (1−α)·T_amb for the
/// body temperature.
pub fn estimate_body_temperature(
    t_bar_c: f64,
    d_m: f64,
    t_amb_c: f64,
    mode: AlphaMode,
    params: &ModelParams,
) -> BodyTempEstimate {
    let alpha = alpha_fraction(d_m, mode, params);
    let beta = beta_correction(t_amb_c, params);
    let t_body_c = (beta * t_bar_c - (1.0 - alpha.value) * t_amb_c) / alpha.value;
    let mut warnings = Vec::new();
    if alpha.clamped {
        warnings.push(ScreeningWarning::AlphaClamped);
    }
    BodyTempEstimate { t_body_c, warnings }
}

/// Forward measurement model: the expected hot-pixel reading for a body of
/// temperature `t_body_c` at distance `d_m`.
pub fn forward_reading(
    t_body_c: f64,
    d_m: f64,
    t_amb_c: f64,
    mode: AlphaMode,
    params: &ModelParams,
) -> f64 {
    let alpha = alpha_fraction(d_m, mode, params).value;
    let beta = beta_correction(t_amb_c, params);
    (alpha * t_body_c + (1.0 - alpha) * t_amb_c) / beta
}

/// log Q(x): logarithm of the standard normal upper tail, stable far into
/// the tail.
pub fn log_gaussian_tail(x: f64) -> f64 {
    if x < 35.0 {
        (0.5 * erfc(x / std::f64::consts::SQRT_2)).ln()
    } else {
        // asymptotic expansion; erfc underflows past ~37σ
        -0.5 * x * x - x.ln() - 0.5 * LN_2PI + (-1.0 / (x * x) + 3.0 / (x * x * x * x)).ln_1p()
    }
}

/// Per-frame LLR between the fever and safe hypotheses from one hot-pixel
/// reading. The shared conditional likelihood and the equal priors cancel
/// in the ratio; [`llr_parts`] retains the full form.
///
/// The decision threshold in reading space is the β-corrected image of
/// α·T_max + (1−α)·T_amb; for T_amb = T_min (β = 1) this is exactly the
/// raw threshold of the hypothesis test.
pub fn llr_from_reading(
    reading_c: f64,
    fused_d_m: f64,
    t_amb_c: f64,
    mode: AlphaMode,
    params: &ModelParams,
) -> f64 {
    let alpha = alpha_fraction(fused_d_m, mode, params).value;
    let beta = beta_correction(t_amb_c, params);
    let threshold = (alpha * params.t_max_c + (1.0 - alpha) * t_amb_c) / beta;
    let z = (reading_c - threshold) / params.sigma_body_c;
    log_gaussian_tail(-z) - log_gaussian_tail(z)
}

/// Per-frame LLR from a full frame: extracts the hot-pixel reading against
/// the background mean, then applies [`llr_from_reading`].
pub fn llr(
    frame: &ThermalFrame,
    fused_d_m: f64,
    bg: &BackgroundModel,
    t_amb_c: f64,
    mode: AlphaMode,
    params: &ModelParams,
) -> Result<f64> {
    if params.sigma_body_c <= 0.0 {
        return Err(Error::Config("sigma_body_c must be positive".into()));
    }
    let (_, reading) = hot_pixel(frame, bg.mu())?;
    Ok(llr_from_reading(reading, fused_d_m, t_amb_c, mode, params))
}

/// Full decomposition of the two hypothesis likelihoods, including the
/// terms that cancel in the ratio (conditional likelihood of the frame
/// under the subject's ROI signature, and the priors).
#[derive(Debug, Clone)]
pub struct LlrParts {
    pub log_tail_f1: f64,
    pub log_tail_f0: f64,
    /// log Γ(y | Θ_{t,k}) for the subject's ROI at the fused distance.
    pub log_cond_lik: f64,
    pub log_prior_f1: f64,
    pub log_prior_f0: f64,
}

impl LlrParts {
    /// log Pr(y|F1) − log Pr(y|F0) with every term in place; equals the
    /// reduced [`llr`] because Γ is shared and the priors are equal.
    pub fn llr(&self) -> f64 {
        (self.log_tail_f1 + self.log_cond_lik - self.log_prior_f1)
            - (self.log_tail_f0 + self.log_cond_lik - self.log_prior_f0)
    }
}

pub fn llr_parts(
    frame: &ThermalFrame,
    fused_d_m: f64,
    roi: usize,
    bg: &BackgroundModel,
    sig: &SignatureModel,
    t_amb_c: f64,
    mode: AlphaMode,
    params: &ModelParams,
) -> Result<LlrParts> {
    let (_, reading) = hot_pixel(frame, bg.mu())?;
    let alpha = alpha_fraction(fused_d_m, mode, params).value;
    let beta = beta_correction(t_amb_c, params);
    let threshold = (alpha * params.t_max_c + (1.0 - alpha) * t_amb_c) / beta;
    let z = (reading - threshold) / params.sigma_body_c;

    let mask = sig
        .masks
        .get(roi)
        .ok_or_else(|| Error::Usage(format!("ROI index {roi} out of range")))?;
    let (mu_k, mut cov_k) = bg.subset(mask)?;
    for i in 0..mu_k.len() {
        cov_k[(i, i)] += sig.sigma_t_c.powi(2);
    }
    let idx: Vec<usize> = mask.iter().enumerate().filter_map(|(m, &b)| b.then_some(m)).collect();
    let gauss = SubGaussian::new(idx, mu_k, cov_k)?;
    let s = sig.mean_increase(TargetState::AtDistance(fused_d_m))?;
    let log_cond_lik = gauss.logpdf_shifted(&frame.temps, s);

    Ok(LlrParts {
        log_tail_f1: log_gaussian_tail(-z),
        log_tail_f0: log_gaussian_tail(z),
        log_cond_lik,
        log_prior_f1: 0.5f64.ln(),
        log_prior_f0: 0.5f64.ln(),
    })
}

/// Majority vote over a window of LLRs: F1 iff strictly more values lie at
/// or above ξ than below. The soft indicator is the fraction at or above.
pub fn majority_vote(llrs: &[f64], xi: f64) -> (FeverState, f64) {
    let above = llrs.iter().filter(|&&v| v >= xi).count();
    let below = llrs.len() - above;
    let soft = if llrs.is_empty() { 0.0 } else { above as f64 / llrs.len() as f64 };
    (if above > below { FeverState::F1 } else { FeverState::F0 }, soft)
}

/// The window statistic equivalent to the majority vote: the t-th largest
/// LLR with t = ⌊Q/2⌋+1. The vote is F1 at threshold ξ iff this statistic
/// is at least ξ.
pub fn vote_statistic(llrs: &[f64]) -> f64 {
    let t = llrs.len() / 2 + 1;
    let mut sorted = llrs.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap());
    sorted[t - 1]
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScreeningVerdict {
    pub ts_ms: u64,
    pub state: FeverState,
    /// Fraction of window LLRs at or above ξ, in [0, 1].
    pub soft: f64,
    pub t_body_c: f64,
    pub t_amb_c: f64,
    /// Distance used for the spot-fraction correction.
    pub d_m: f64,
    pub llr_trace: Vec<f64>,
    pub warnings: Vec<ScreeningWarning>,
}

/// One subject-in-range screening session: a trailing window of Q frames
/// plus the fused distance stream, smoothed over the session for the
/// spot-fraction correction.
#[derive(Debug, Clone)]
pub struct ScreeningSession {
    q: usize,
    frames: VecDeque<ThermalFrame>,
    dist_sum: f64,
    dist_count: usize,
}

impl ScreeningSession {
    pub fn new(q: usize) -> Result<Self> {
        if q < 1 {
            return Err(Error::Usage("inspection window must hold at least one frame".into()));
        }
        Ok(ScreeningSession { q, frames: VecDeque::with_capacity(q), dist_sum: 0.0, dist_count: 0 })
    }

    pub fn push(&mut self, frame: ThermalFrame, fused_d_m: f64) {
        if self.frames.len() == self.q {
            self.frames.pop_front();
        }
        self.frames.push_back(frame);
        self.dist_sum += fused_d_m;
        self.dist_count += 1;
    }

    pub fn is_ready(&self) -> bool {
        self.frames.len() == self.q
    }

    /// Session-smoothed subject distance.
    pub fn distance(&self) -> Option<f64> {
        (self.dist_count > 0).then(|| self.dist_sum / self.dist_count as f64)
    }

    /// Screens the current window: per-frame LLRs at the smoothed distance,
    /// majority vote, window-averaged body-temperature estimate.
    pub fn verdict(
        &self,
        bg: &BackgroundModel,
        mode: AlphaMode,
        params: &ModelParams,
    ) -> Result<ScreeningVerdict> {
        if !self.is_ready() {
            return Err(Error::Usage(format!(
                "window holds {} of {} frames",
                self.frames.len(),
                self.q
            )));
        }
        let d_m = self.distance().expect("non-empty session");
        let t_amb_c = ambient_temperature(bg);
        let frames: Vec<ThermalFrame> = self.frames.iter().cloned().collect();

        let mut llr_trace = Vec::with_capacity(self.q);
        for f in &frames {
            llr_trace.push(llr(f, d_m, bg, t_amb_c, mode, params)?);
        }
        let (state, soft) = majority_vote(&llr_trace, params.xi);

        let t_bar = mean_max_temperature(&frames, bg.mu())?;
        let estimate = estimate_body_temperature(t_bar, d_m, t_amb_c, mode, params);

        let mut warnings = estimate.warnings;
        if d_m > SCREENING_MAX_RANGE_M {
            warnings.push(ScreeningWarning::RangeExceeded);
        }
        if t_amb_c < AMBIENT_RANGE_C.0 || t_amb_c > AMBIENT_RANGE_C.1 {
            warnings.push(ScreeningWarning::AmbientOutOfRange);
        }

        Ok(ScreeningVerdict {
            ts_ms: frames.last().expect("full window").ts_ms,
            state,
            soft,
            t_body_c: estimate.t_body_c,
            t_amb_c,
            d_m,
            llr_trace,
            warnings,
        })
    }
}

/// Sequential IR+radar distance fusion: radar overrides on gross
/// disagreement, otherwise inverse-variance weighting.
pub fn fuse_distance(
    ir_d_m: f64,
    radar_d_m: Option<f64>,
    ir_std_m: f64,
    radar_std_m: f64,
    gate_m: f64,
) -> Result<f64> {
    if ir_d_m < 0.0 || radar_d_m.is_some_and(|d| d < 0.0) {
        return Err(Error::Usage("distances must be non-negative".into()));
    }
    let Some(radar) = radar_d_m else {
        return Ok(ir_d_m);
    };
    if (ir_d_m - radar).abs() > gate_m {
        return Ok(radar);
    }
    let wi = 1.0 / (ir_std_m * ir_std_m);
    let wr = 1.0 / (radar_std_m * radar_std_m);
    Ok((ir_d_m * wi + radar * wr) / (wi + wr))
}

/// [`fuse_distance`] with the calibrated accuracies and gate.
pub fn fuse_distance_default(ir_d_m: f64, radar_d_m: Option<f64>) -> Result<f64> {
    fuse_distance(ir_d_m, radar_d_m, IR_DISTANCE_STD_M, RADAR_DISTANCE_STD_M, FUSION_GATE_M)
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct RocPoint {
    pub xi: f64,
    pub fpr: f64,
    pub tpr: f64,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ClassMetrics {
    pub precision: f64,
    pub recall: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct RocReport {
    pub points: Vec<RocPoint>,
    pub auc: f64,
    /// Operating point at the configured ξ.
    pub xi: f64,
    pub tpr_at_xi: f64,
    pub fpr_at_xi: f64,
    pub f1_class: ClassMetrics,
    pub f0_class: ClassMetrics,
}

impl RocReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("xi,fpr,tpr\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.xi, p.fpr, p.tpr));
        }
        out
    }
}

/// Confusion-matrix sweep of the vote threshold over labeled windows.
///
/// Each labeled example carries the LLR trace of one inspection window and
/// the true class. The vote at threshold ξ reduces to comparing the
/// window's order statistic ([`vote_statistic`]) against ξ, so the sweep
/// is a standard score ROC.
pub fn roc_report(labeled: &[(Vec<f64>, bool)], xi: f64) -> Result<RocReport> {
    let positives = labeled.iter().filter(|(_, y)| *y).count();
    let negatives = labeled.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::Usage(
            "ROC evaluation needs examples from both classes".into(),
        ));
    }
    let scored: Vec<(f64, bool)> =
        labeled.iter().map(|(trace, y)| (vote_statistic(trace), *y)).collect();

    let mut thresholds: Vec<f64> = scored.iter().map(|&(s, _)| s).collect();
    thresholds.sort_by(|a, b| b.partial_cmp(a).unwrap());
    thresholds.dedup();

    let rate = |thr: f64| -> (f64, f64) {
        let tp = scored.iter().filter(|&&(s, y)| y && s >= thr).count();
        let fp = scored.iter().filter(|&&(s, y)| !y && s >= thr).count();
        (fp as f64 / negatives as f64, tp as f64 / positives as f64)
    };

    let mut points = vec![RocPoint { xi: f64::INFINITY, fpr: 0.0, tpr: 0.0 }];
    for &thr in &thresholds {
        let (fpr, tpr) = rate(thr);
        points.push(RocPoint { xi: thr, fpr, tpr });
    }
    points.push(RocPoint { xi: f64::NEG_INFINITY, fpr: 1.0, tpr: 1.0 });

    let mut auc = 0.0;
    for w in points.windows(2) {
        auc += (w[1].fpr - w[0].fpr) * (w[0].tpr + w[1].tpr) / 2.0;
    }

    let (fpr_at_xi, tpr_at_xi) = rate(xi);
    let tp = scored.iter().filter(|&&(s, y)| y && s >= xi).count() as f64;
    let fp = scored.iter().filter(|&&(s, y)| !y && s >= xi).count() as f64;
    let fne = positives as f64 - tp;
    let tn = negatives as f64 - fp;
    let f1_class = ClassMetrics {
        precision: if tp + fp > 0.0 { tp / (tp + fp) } else { 1.0 },
        recall: tp / positives as f64,
    };
    let f0_class = ClassMetrics {
        precision: if tn + fne > 0.0 { tn / (tn + fne) } else { 1.0 },
        recall: tn / negatives as f64,
    };

    Ok(RocReport { points, auc, xi, tpr_at_xi, fpr_at_xi, f1_class, f0_class })
}

/// Wire form of one radar distance sample.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RadarRecord {
    pub ts_ms: u64,
    pub d_m: f64,
    #[serde(default)]
    pub quality: f64,
}

/// Wire form of one screening verdict.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerdictRecord {
    pub ts_ms: u64,
    pub state: String,
    pub soft: f64,
    pub t_body_c: f64,
    pub t_amb_c: f64,
    pub d_m: f64,
    pub warnings: Vec<ScreeningWarning>,
}

impl From<&ScreeningVerdict> for VerdictRecord {
    fn from(v: &ScreeningVerdict) -> Self {
        VerdictRecord {
            ts_ms: v.ts_ms,
            state: match v.state {
                FeverState::F0 => "F0".into(),
                FeverState::F1 => "F1".into(),
            },
            soft: v.soft,
            t_body_c: v.t_body_c,
            t_amb_c: v.t_amb_c,
            d_m: v.d_m,
            warnings: v.warnings.clone(),
        }
    }
}
