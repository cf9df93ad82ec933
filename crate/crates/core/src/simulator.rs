//! Generative scene synthesis: frames are composed directly from the
//! linear measurement model (signature columns scaled by sampled body
//! increases, plus correlated Gaussian background), deliberately sharing no
//! likelihood-evaluation path with the estimators it is used to verify.

use nalgebra::{Cholesky, DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::frame::ThermalFrame;
use crate::layout::{Mount, SensorLayout};
use crate::params::ModelParams;
use crate::screening::{forward_reading, AlphaMode};
use crate::signature::srelu_mean;

/// A body location relative to the array, per mount type.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BodyPosition {
    Wall { d_m: f64, theta_deg: f64 },
    Ceiling { x_m: f64, y_m: f64 },
}

/// One simulated subject: a timestamped trajectory (one position per scene
/// step, starting at `start_step`) and its physical parameters.
#[derive(Debug, Clone)]
pub struct Body {
    pub positions: Vec<BodyPosition>,
    pub start_step: usize,
    pub t_body_c: f64,
    /// Angular half-extent of the torso; controls how many wall sectors a
    /// close body spans.
    pub half_width_m: f64,
}

impl Body {
    pub fn new(positions: Vec<BodyPosition>, start_step: usize) -> Self {
        Body { positions, start_step, t_body_c: 36.8, half_width_m: 0.15 }
    }

    fn position_at(&self, t: usize) -> Option<BodyPosition> {
        if t < self.start_step {
            return None;
        }
        self.positions.get(t - self.start_step).copied()
    }
}

/// Background noise specification for a scene.
#[derive(Debug, Clone)]
pub enum BackgroundNoise {
    None,
    /// Independent per-detector noise with a shared standard deviation.
    Diagonal(f64),
    /// Full covariance, sampled through its Cholesky factor.
    Full(DMatrix<f64>),
}

/// Ground truth for one frame.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRecord {
    pub ts_ms: u64,
    pub bodies: Vec<TruthBody>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthBody {
    /// Primary ROI (the one containing the body centre).
    pub roi: usize,
    /// Every ROI the body occupies (a close wall body spans several).
    pub rois: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub d_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub theta_deg: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_m: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub y_m: Option<f64>,
    pub t_body_c: f64,
}

/// A reproducible synthetic scene. Frame synthesis is a pure function of
/// (scene, step): each step draws from its own RNG stream.
#[derive(Debug, Clone)]
pub struct Scene {
    pub layout: SensorLayout,
    pub params: ModelParams,
    pub mu_true: DVector<f64>,
    pub bodies: Vec<Body>,
    pub seed: u64,
    pub sensor_id: u64,
    pub t0_ms: u64,
    pub dt_ms: u64,
    pub steps: usize,
    /// Sample the per-body increase around its mean (σ_T); disable for
    /// noiseless oracle scenes.
    pub body_noise: bool,
    noise: BackgroundNoise,
    chol_l: Option<DMatrix<f64>>,
    wall_sectors: Option<Vec<(f64, f64)>>,
}

impl Scene {
    pub fn new(
        layout: SensorLayout,
        params: ModelParams,
        mu_true: DVector<f64>,
        noise: BackgroundNoise,
        bodies: Vec<Body>,
        seed: u64,
        steps: usize,
    ) -> Result<Self> {
        layout.validate()?;
        params.validate()?;
        if mu_true.len() != layout.detectors() {
            return Err(Error::Usage("μ* length does not match detector count".into()));
        }
        let chol_l = match &noise {
            BackgroundNoise::Full(cov) => Some(
                Cholesky::new(cov.clone())
                    .ok_or_else(|| Error::Numeric("scene covariance is not positive definite".into()))?
                    .l(),
            ),
            _ => None,
        };
        let wall_sectors = match layout.mount {
            Mount::Wall => Some(layout.wall_sectors()?),
            Mount::Ceiling => None,
        };
        Ok(Scene {
            layout,
            params,
            mu_true,
            bodies,
            seed,
            sensor_id: 1,
            t0_ms: 0,
            dt_ms: 300,
            steps,
            body_noise: true,
            noise,
            chol_l,
            wall_sectors,
        })
    }

    pub fn ts_ms(&self, t: usize) -> u64 {
        self.t0_ms + t as u64 * self.dt_ms
    }

    /// Synthesizes frame t and its ground truth. Deterministic: step t
    /// always draws from RNG stream t+1 of the scene seed.
    pub fn synth_frame(&self, t: usize) -> Result<(ThermalFrame, TruthRecord)> {
        if t >= self.steps {
            return Err(Error::Usage(format!("step {t} beyond scene horizon {}", self.steps)));
        }
        let m = self.layout.detectors();
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(t as u64 + 1);

        let mut temps: Vec<f64> = self.mu_true.iter().cloned().collect();
        match &self.noise {
            BackgroundNoise::None => {}
            BackgroundNoise::Diagonal(std) => {
                for v in temps.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += std * z;
                }
            }
            BackgroundNoise::Full(_) => {
                let l = self.chol_l.as_ref().expect("factor cached at construction");
                let z = DVector::from_fn(m, |_, _| StandardNormal.sample(&mut rng));
                let w = l * z;
                for (v, n) in temps.iter_mut().zip(w.iter()) {
                    *v += n;
                }
            }
        }

        let mut truth_bodies = Vec::new();
        for body in &self.bodies {
            let Some(pos) = body.position_at(t) else { continue };
            match self.place_body(body, pos, &mut rng, &mut temps) {
                Some(tb) => truth_bodies.push(tb),
                None => log::warn!("body at {pos:?} covers no ROI at step {t}; dropped"),
            }
        }
        let ts_ms = self.ts_ms(t);
        let frame = ThermalFrame::new(self.sensor_id, ts_ms, temps);
        Ok((frame, TruthRecord { ts_ms, bodies: truth_bodies }))
    }

    pub fn synth_all(&self) -> Result<(Vec<ThermalFrame>, Vec<TruthRecord>)> {
        let mut frames = Vec::with_capacity(self.steps);
        let mut truths = Vec::with_capacity(self.steps);
        for t in 0..self.steps {
            let (f, g) = self.synth_frame(t)?;
            frames.push(f);
            truths.push(g);
        }
        Ok((frames, truths))
    }

    fn place_body(
        &self,
        body: &Body,
        pos: BodyPosition,
        rng: &mut ChaCha8Rng,
        temps: &mut [f64],
    ) -> Option<TruthBody> {
        match (self.layout.mount, pos) {
            (Mount::Wall, BodyPosition::Wall { d_m, theta_deg }) => {
                let sectors = self.wall_sectors.as_ref().expect("wall scene");
                let w_ang = (body.half_width_m / d_m.max(1e-6)).atan().to_degrees();
                let (span_lo, span_hi) = (theta_deg - w_ang, theta_deg + w_ang);
                let occupied: Vec<usize> = sectors
                    .iter()
                    .enumerate()
                    .filter_map(|(k, &(lo, hi))| (span_lo < hi && span_hi > lo).then_some(k))
                    .collect();
                if occupied.is_empty() {
                    return None;
                }
                // primary: occupied ROI with AOA nearest the body centre
                let primary = *occupied
                    .iter()
                    .min_by(|&&a, &&b| {
                        let da = (self.layout.rois[a].aoa_deg.unwrap() - theta_deg).abs();
                        let db = (self.layout.rois[b].aoa_deg.unwrap() - theta_deg).abs();
                        da.partial_cmp(&db).unwrap()
                    })
                    .expect("non-empty");
                let mean = srelu_mean(d_m, self.params.sigma0_c, self.params.gamma_c_per_m);
                let sigma = self.sample_increase(mean, self.params.sigma_t_wall_c, rng);
                for &k in &occupied {
                    for (mi, &b) in self.layout.rois[k].mask.iter().enumerate() {
                        if b {
                            temps[mi] += sigma;
                        }
                    }
                }
                Some(TruthBody {
                    roi: primary,
                    rois: occupied,
                    d_m: Some(d_m),
                    theta_deg: Some(theta_deg),
                    x_m: None,
                    y_m: None,
                    t_body_c: body.t_body_c,
                })
            }
            (Mount::Ceiling, BodyPosition::Ceiling { x_m, y_m }) => {
                let cell = self.layout.roi_cell().ok()?;
                let roi = self.layout.rois.iter().position(|r| {
                    let c = r.footprint_m.expect("ceiling layout");
                    (x_m - c[0]).abs() <= cell / 2.0 && (y_m - c[1]).abs() <= cell / 2.0
                })?;
                let sigma = self.sample_increase(
                    self.params.sigma_bar_ceiling_c,
                    self.params.sigma_t_ceiling_c,
                    rng,
                );
                for (mi, &b) in self.layout.rois[roi].mask.iter().enumerate() {
                    if b {
                        temps[mi] += sigma;
                    }
                }
                Some(TruthBody {
                    roi,
                    rois: vec![roi],
                    d_m: None,
                    theta_deg: None,
                    x_m: Some(x_m),
                    y_m: Some(y_m),
                    t_body_c: body.t_body_c,
                })
            }
            _ => None,
        }
    }

    fn sample_increase(&self, mean: f64, std: f64, rng: &mut ChaCha8Rng) -> f64 {
        if self.body_noise {
            let z: f64 = StandardNormal.sample(rng);
            mean + std * z
        } else {
            mean
        }
    }
}

/// Trajectory generators for the standard scene shapes.
#[derive(Debug, Clone)]
pub enum TrajectoryKind {
    Static { position: BodyPosition },
    /// Reflected Gaussian range walk at fixed AOA (wall mounts).
    RangeWalk { theta_deg: f64, d0_m: f64, step_std_m: f64, d_min_m: f64, d_max_m: f64 },
    /// Straight crossing of the ceiling footprint at constant speed.
    CorridorPass { from_m: [f64; 2], to_m: [f64; 2], speed_mps: f64, dt_s: f64 },
    /// Fixed range, lateral shuffle: reflected Gaussian walk of the
    /// lateral offset, mapped to AOA (wall mounts).
    LateralShuffle { d_m: f64, x0_m: f64, x_bound_m: f64, step_std_m: f64 },
}

pub fn gen_trajectory(kind: &TrajectoryKind, steps: usize, seed: u64) -> Vec<BodyPosition> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        TrajectoryKind::Static { position } => vec![position; steps],
        TrajectoryKind::RangeWalk { theta_deg, d0_m, step_std_m, d_min_m, d_max_m } => {
            let mut d = d0_m.clamp(d_min_m, d_max_m);
            (0..steps)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    d = reflect(d + step_std_m * z, d_min_m, d_max_m);
                    BodyPosition::Wall { d_m: d, theta_deg }
                })
                .collect()
        }
        TrajectoryKind::CorridorPass { from_m, to_m, speed_mps, dt_s } => {
            let dx = to_m[0] - from_m[0];
            let dy = to_m[1] - from_m[1];
            let dist = (dx * dx + dy * dy).sqrt();
            let n = ((dist / (speed_mps * dt_s)).round() as usize).max(1);
            let step = speed_mps * dt_s / dist;
            (0..n)
                .map(|t| BodyPosition::Ceiling {
                    x_m: from_m[0] + dx * step * t as f64,
                    y_m: from_m[1] + dy * step * t as f64,
                })
                .collect()
        }
        TrajectoryKind::LateralShuffle { d_m, x0_m, x_bound_m, step_std_m } => {
            let mut x = x0_m.clamp(-x_bound_m, x_bound_m);
            (0..steps)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    x = reflect(x + step_std_m * z, -x_bound_m, x_bound_m);
                    BodyPosition::Wall { d_m, theta_deg: (x / d_m).atan().to_degrees() }
                })
                .collect()
        }
    }
}

fn reflect(mut v: f64, lo: f64, hi: f64) -> f64 {
    debug_assert!(hi > lo);
    for _ in 0..64 {
        if v < lo {
            v = 2.0 * lo - v;
        } else if v > hi {
            v = 2.0 * hi - v;
        } else {
            return v;
        }
    }
    v.clamp(lo, hi)
}

/// A screening subject in front of a wall array: per-frame hot-pixel
/// readings follow the forward measurement model with micro-movement
/// noise; every other detector shows background.
#[derive(Debug, Clone)]
pub struct ScreeningScene {
    pub layout: SensorLayout,
    pub params: ModelParams,
    pub t_body_c: f64,
    pub t_amb_c: f64,
    pub trajectory: Vec<BodyPosition>,
    pub mode: AlphaMode,
    pub background_std_c: f64,
    /// Std of the hot-pixel reading noise; 0 gives the exact forward model.
    pub reading_noise_std_c: f64,
    pub seed: u64,
    pub sensor_id: u64,
    pub t0_ms: u64,
    pub dt_ms: u64,
}

impl ScreeningScene {
    pub fn synth(&self) -> Result<Vec<ThermalFrame>> {
        let (lo, hi) = crate::screening::AMBIENT_RANGE_C;
        if self.t_amb_c < lo || self.t_amb_c > hi {
            return Err(Error::Usage(format!(
                "ambient {} °C outside the validated band [{lo}, {hi}]",
                self.t_amb_c
            )));
        }
        if self.layout.mount != Mount::Wall {
            return Err(Error::Usage("screening scenes use a wall layout".into()));
        }
        let m = self.layout.detectors();
        let noise = Normal::new(0.0, self.reading_noise_std_c.max(f64::MIN_POSITIVE))
            .map_err(|e| Error::Numeric(e.to_string()))?;
        let mut frames = Vec::with_capacity(self.trajectory.len());
        for (t, pos) in self.trajectory.iter().enumerate() {
            let BodyPosition::Wall { d_m, theta_deg } = *pos else {
                return Err(Error::Usage("screening trajectories are wall positions".into()));
            };
            let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
            rng.set_stream(t as u64 + 1);
            let mut temps = vec![self.t_amb_c; m];
            if self.background_std_c > 0.0 {
                for v in temps.iter_mut() {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    *v += self.background_std_c * z;
                }
            }
            let mut reading =
                forward_reading(self.t_body_c, d_m, self.t_amb_c, self.mode, &self.params);
            if self.reading_noise_std_c > 0.0 {
                reading += noise.sample(&mut rng);
            }
            // detector column nearest the subject azimuth, middle row
            let col = (0..self.layout.cols)
                .min_by(|&a, &b| {
                    let da = (self.layout.column_azimuth_deg(a) - theta_deg).abs();
                    let db = (self.layout.column_azimuth_deg(b) - theta_deg).abs();
                    da.partial_cmp(&db).unwrap()
                })
                .expect("non-empty grid");
            let row = self.layout.rows / 2;
            temps[row * self.layout.cols + col] = reading;
            frames.push(ThermalFrame::new(
                self.sensor_id,
                self.t0_ms + t as u64 * self.dt_ms,
                temps,
            ));
        }
        Ok(frames)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::screening::estimate_body_temperature;

    fn wall_scene(bodies: Vec<Body>, noise: BackgroundNoise, steps: usize) -> Scene {
        Scene::new(
            SensorLayout::wall_default(),
            ModelParams::default(),
            DVector::from_element(64, 21.0),
            noise,
            bodies,
            7,
            steps,
        )
        .unwrap()
    }

    #[test]
    fn empty_noiseless_scene_reproduces_mu() {
        let scene = wall_scene(vec![], BackgroundNoise::None, 3);
        let (frame, truth) = scene.synth_frame(0).unwrap();
        assert!(frame.temps.iter().all(|&t| t == 21.0));
        assert!(truth.bodies.is_empty());
    }

    #[test]
    fn single_body_noiseless_is_mu_plus_signature() {
        let pos = BodyPosition::Wall { d_m: 1.0, theta_deg: 0.0 };
        let mut body = Body::new(vec![pos; 2], 0);
        body.half_width_m = 0.05; // narrow: single ROI
        let mut scene = wall_scene(vec![body], BackgroundNoise::None, 2);
        scene.body_noise = false;
        let (frame, truth) = scene.synth_frame(0).unwrap();
        assert_eq!(truth.bodies.len(), 1);
        assert_eq!(truth.bodies[0].roi, 2);
        assert_eq!(truth.bodies[0].rois, vec![2]);
        let expect = srelu_mean(1.0, 4.5, 1.1);
        for (m, &b) in scene.layout.rois[2].mask.iter().enumerate() {
            let want = if b { 21.0 + expect } else { 21.0 };
            assert!((frame.temps[m] - want).abs() < 1e-12);
        }
    }

    #[test]
    fn close_body_spans_multiple_sectors() {
        let pos = BodyPosition::Wall { d_m: 0.5, theta_deg: 0.0 };
        let mut body = Body::new(vec![pos], 0);
        body.half_width_m = 0.15; // ±16.7° at 0.5 m
        let mut scene = wall_scene(vec![body], BackgroundNoise::None, 1);
        scene.body_noise = false;
        let (_, truth) = scene.synth_frame(0).unwrap();
        assert_eq!(truth.bodies[0].roi, 2);
        assert_eq!(truth.bodies[0].rois, vec![1, 2, 3]);
    }

    #[test]
    fn body_outside_fov_is_dropped() {
        let pos = BodyPosition::Wall { d_m: 1.0, theta_deg: 45.0 };
        let mut scene = wall_scene(vec![Body::new(vec![pos], 0)], BackgroundNoise::None, 1);
        scene.body_noise = false;
        let (frame, truth) = scene.synth_frame(0).unwrap();
        assert!(truth.bodies.is_empty());
        assert!(frame.temps.iter().all(|&t| t == 21.0));
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let pos = BodyPosition::Wall { d_m: 1.5, theta_deg: 5.0 };
        let scene = wall_scene(
            vec![Body::new(vec![pos; 20], 0)],
            BackgroundNoise::Diagonal(0.08),
            20,
        );
        let (a, _) = scene.synth_all().unwrap();
        let (b, _) = scene.synth_all().unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn sample_mean_converges_to_noiseless_frame() {
        let pos = BodyPosition::Wall { d_m: 1.0, theta_deg: 0.0 };
        let mut body = Body::new(vec![pos; 10_000], 0);
        body.half_width_m = 0.05;
        let scene = wall_scene(vec![body], BackgroundNoise::Diagonal(0.08), 10_000);

        let mut noiseless = scene.clone();
        noiseless.body_noise = false;
        noiseless.noise = BackgroundNoise::None;
        let (f0, _) = noiseless.synth_frame(0).unwrap();
        let expect = f0.temps;

        let n = 10_000usize;
        let mut mean = vec![0.0; 64];
        for t in 0..n {
            let (f, _) = scene.synth_frame(t).unwrap();
            for (i, &v) in f.temps.iter().enumerate() {
                mean[i] += v;
            }
        }
        for v in mean.iter_mut() {
            *v /= n as f64;
        }
        let params = ModelParams::default();
        for (i, &b) in scene.layout.rois[2].mask.iter().enumerate() {
            let var = 0.08f64.powi(2) + if b { params.sigma_t_wall_c.powi(2) } else { 0.0 };
            let bound = 3.0 * var.sqrt() / (n as f64).sqrt();
            assert!(
                (mean[i] - expect[i]).abs() < bound,
                "detector {i}: {} vs {} (±{bound})",
                mean[i],
                expect[i]
            );
        }
    }

    #[test]
    fn full_covariance_noise_uses_cholesky() {
        let m = 64;
        let mut cov = DMatrix::from_diagonal(&DVector::from_element(m, 0.01));
        for i in 0..m - 1 {
            cov[(i, i + 1)] = 0.004;
            cov[(i + 1, i)] = 0.004;
        }
        let scene = Scene::new(
            SensorLayout::wall_default(),
            ModelParams::default(),
            DVector::from_element(m, 21.0),
            BackgroundNoise::Full(cov),
            vec![],
            3,
            2000,
        )
        .unwrap();
        // neighbouring detectors must correlate positively
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for t in 0..2000 {
            let (f, _) = scene.synth_frame(t).unwrap();
            xs.push(f.temps[10] - 21.0);
            ys.push(f.temps[11] - 21.0);
        }
        let n = xs.len() as f64;
        let mx = xs.iter().sum::<f64>() / n;
        let my = ys.iter().sum::<f64>() / n;
        let cov_hat =
            xs.iter().zip(ys.iter()).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / n;
        assert!(cov_hat > 0.001, "sampled covariance {cov_hat}");
    }

    #[test]
    fn static_trajectory_is_constant() {
        let pos = BodyPosition::Wall { d_m: 1.0, theta_deg: 3.0 };
        let traj = gen_trajectory(&TrajectoryKind::Static { position: pos }, 5, 1);
        assert_eq!(traj.len(), 5);
        assert!(traj.iter().all(|&p| p == pos));
    }

    #[test]
    fn zero_speed_walk_is_constant() {
        let traj = gen_trajectory(
            &TrajectoryKind::RangeWalk {
                theta_deg: 0.0,
                d0_m: 1.5,
                step_std_m: 0.0,
                d_min_m: 0.25,
                d_max_m: 3.5,
            },
            10,
            1,
        );
        assert!(traj
            .iter()
            .all(|p| matches!(p, BodyPosition::Wall { d_m, .. } if (*d_m - 1.5).abs() < 1e-12)));
    }

    #[test]
    fn range_walk_stays_in_bounds() {
        let traj = gen_trajectory(
            &TrajectoryKind::RangeWalk {
                theta_deg: 0.0,
                d0_m: 0.5,
                step_std_m: 0.15,
                d_min_m: 0.25,
                d_max_m: 3.5,
            },
            5000,
            42,
        );
        for p in traj {
            let BodyPosition::Wall { d_m, .. } = p else { panic!() };
            assert!((0.25..=3.5).contains(&d_m));
        }
    }

    #[test]
    fn corridor_pass_step_count() {
        // 3 m at 0.5 m/s sampled at 0.3 s: 20 steps
        let traj = gen_trajectory(
            &TrajectoryKind::CorridorPass {
                from_m: [-1.5, 0.0],
                to_m: [1.5, 0.0],
                speed_mps: 0.5,
                dt_s: 0.3,
            },
            0,
            1,
        );
        assert_eq!(traj.len(), 20);
    }

    fn screening_scene(t_body: f64, t_amb: f64, d: f64) -> ScreeningScene {
        ScreeningScene {
            layout: SensorLayout::wall_default(),
            params: ModelParams::default(),
            t_body_c: t_body,
            t_amb_c: t_amb,
            trajectory: vec![BodyPosition::Wall { d_m: d, theta_deg: 0.0 }; 4],
            mode: AlphaMode::Linear,
            background_std_c: 0.0,
            reading_noise_std_c: 0.0,
            seed: 5,
            sensor_id: 1,
            t0_ms: 0,
            dt_ms: 300,
        }
    }

    #[test]
    fn screening_subject_noiseless_forward_value() {
        let frames = screening_scene(38.0, 23.0, 0.5).synth().unwrap();
        let hot = frames[0].temps.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((hot - 30.081).abs() < 1e-3, "hot pixel {hot}");

        // noiseless round trip recovers the body temperature exactly
        let params = ModelParams::default();
        let est = estimate_body_temperature(hot, 0.5, 23.0, AlphaMode::Linear, &params);
        assert!((est.t_body_c - 38.0).abs() < 1e-9);
    }

    #[test]
    fn screening_subject_degenerates_to_ambient() {
        // at T_amb = T_min the correction is 1 and a body at ambient
        // temperature is invisible
        let frames = screening_scene(20.0, 20.0, 0.5).synth().unwrap();
        assert!(frames[0].temps.iter().all(|&t| (t - 20.0).abs() < 1e-12));
    }

    #[test]
    fn screening_scene_rejects_ambient_outside_band() {
        assert!(screening_scene(38.0, 19.0, 0.5).synth().is_err());
        assert!(screening_scene(38.0, 29.0, 0.5).synth().is_err());
    }
}
