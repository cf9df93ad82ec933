//! Synthetic scene generation: named presets covering the standard wall
//! tracking, corridor counting and screening setups. Fixed seeds give
//! byte-identical outputs.

use std::path::PathBuf;

use clap::Args;
use nalgebra::DVector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use thermotrack::error::{Error, Result};
use thermotrack::frame::write_frames_jsonl;
use thermotrack::layout::SensorLayout;
use thermotrack::params::ModelParams;
use thermotrack::screening::{forward_reading, AlphaMode, RadarRecord};
use thermotrack::simulator::{
    gen_trajectory, BackgroundNoise, Body, BodyPosition, Scene, TrajectoryKind,
};

use super::{load_params, sink, write_jsonl};

/// Frames the pipelines treat as empty-scene warm-up.
pub const LEAD_IN_FRAMES: usize = 60;

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Scene preset: wall-walk | corridor1 | corridor2 | corridor3 | screening
    #[arg(long)]
    pub scene: String,
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Body steps after the empty lead-in (preset default when omitted).
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Output directory for frames.jsonl, truth.jsonl (and radar.jsonl).
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: &SimulateArgs) -> Result<()> {
    let params = load_params(args.params.as_ref())?;
    std::fs::create_dir_all(&args.out)?;

    let (scene, radar_truth_d) = build_scene(&args.scene, args.seed, args.steps, &params)?;
    let (mut frames, truths) = scene.synth_all()?;

    let mut radar: Vec<RadarRecord> = Vec::new();
    if let Some(d_true) = radar_truth_d {
        // screening preset: inject the facial hot pixel and a radar stream
        let mut rng = ChaCha8Rng::seed_from_u64(args.seed ^ 0x5c4e_e71a);
        let face = face_detector(&scene.layout, 0.0);
        for (frame, truth) in frames.iter_mut().zip(truths.iter()) {
            if truth.bodies.is_empty() {
                continue;
            }
            let z: f64 = StandardNormal.sample(&mut rng);
            let reading = forward_reading(
                truth.bodies[0].t_body_c,
                d_true,
                scene.mu_true[0],
                AlphaMode::Auto,
                &params,
            ) + params.sigma_body_c * z;
            frame.temps[face] = reading;
            let zr: f64 = StandardNormal.sample(&mut rng);
            radar.push(RadarRecord {
                ts_ms: frame.ts_ms,
                d_m: (d_true + 0.1 * zr).max(0.0),
                quality: 1.0,
            });
        }
    }

    let frames_path = args.out.join("frames.jsonl");
    let truth_path = args.out.join("truth.jsonl");
    let mut fw = sink(Some(&frames_path))?;
    write_frames_jsonl(&mut fw, &frames)?;
    let mut tw = sink(Some(&truth_path))?;
    for t in &truths {
        write_jsonl(tw.as_mut(), t)?;
    }
    println!("wrote {} frames to {}", frames.len(), frames_path.display());
    println!("wrote ground truth to {}", truth_path.display());
    if !radar.is_empty() {
        let radar_path = args.out.join("radar.jsonl");
        let mut rw = sink(Some(&radar_path))?;
        for r in &radar {
            write_jsonl(rw.as_mut(), r)?;
        }
        println!("wrote radar stream to {}", radar_path.display());
    }
    Ok(())
}

fn face_detector(layout: &SensorLayout, theta_deg: f64) -> usize {
    let col = (0..layout.cols)
        .min_by(|&a, &b| {
            let da = (layout.column_azimuth_deg(a) - theta_deg).abs();
            let db = (layout.column_azimuth_deg(b) - theta_deg).abs();
            da.partial_cmp(&db).unwrap()
        })
        .expect("non-empty grid");
    (layout.rows / 2) * layout.cols + col
}

/// Builds the preset; the second value carries the true screening distance
/// when the preset needs a radar stream.
fn build_scene(
    name: &str,
    seed: u64,
    steps: Option<usize>,
    params: &ModelParams,
) -> Result<(Scene, Option<f64>)> {
    match name {
        "wall-walk" => {
            let body_steps = steps.unwrap_or(400);
            let layout = SensorLayout::wall_default();
            let traj = gen_trajectory(
                &TrajectoryKind::RangeWalk {
                    theta_deg: 0.0,
                    d0_m: 1.5,
                    step_std_m: params.walk_speed_mps * params.dt_s,
                    d_min_m: 0.25,
                    d_max_m: 3.5,
                },
                body_steps,
                seed ^ 0x11,
            );
            let m = layout.detectors();
            let scene = Scene::new(
                layout,
                params.clone(),
                DVector::from_element(m, 21.0),
                BackgroundNoise::Diagonal(0.08),
                vec![Body::new(traj, LEAD_IN_FRAMES)],
                seed,
                LEAD_IN_FRAMES + body_steps,
            )?;
            Ok((scene, None))
        }
        "corridor1" | "corridor2" | "corridor3" => {
            let zeta = name.as_bytes()[8] - b'0';
            let layout = SensorLayout::ceiling_default();
            let lanes = [-0.5, 0.0, 0.5];
            let mut bodies = Vec::new();
            for b in 0..zeta as usize {
                let reverse = b % 2 == 1;
                let (from, to) = if reverse { (1.0, -1.0) } else { (-1.0, 1.0) };
                let traj = gen_trajectory(
                    &TrajectoryKind::CorridorPass {
                        from_m: [from, lanes[b]],
                        to_m: [to, lanes[b]],
                        speed_mps: params.walk_speed_mps,
                        dt_s: params.dt_s,
                    },
                    0,
                    seed ^ (0x20 + b as u64),
                );
                bodies.push(Body::new(traj, LEAD_IN_FRAMES + 3 * b));
            }
            let body_steps = steps.unwrap_or(30);
            let m = layout.detectors();
            let scene = Scene::new(
                layout,
                params.clone(),
                DVector::from_element(m, 21.0),
                BackgroundNoise::Diagonal(0.08),
                bodies,
                seed,
                LEAD_IN_FRAMES + body_steps,
            )?;
            Ok((scene, None))
        }
        "screening" => {
            let body_steps = steps.unwrap_or(120);
            let layout = SensorLayout::wall_default();
            let d_true = 0.3;
            let traj = gen_trajectory(
                &TrajectoryKind::Static {
                    position: BodyPosition::Wall { d_m: d_true, theta_deg: 0.0 },
                },
                body_steps,
                seed ^ 0x31,
            );
            let mut body = Body::new(traj, LEAD_IN_FRAMES);
            body.t_body_c = 38.2;
            let m = layout.detectors();
            let scene = Scene::new(
                layout,
                params.clone(),
                DVector::from_element(m, 23.0),
                BackgroundNoise::Diagonal(0.05),
                vec![body],
                seed,
                LEAD_IN_FRAMES + body_steps,
            )?;
            Ok((scene, Some(d_true)))
        }
        other => Err(Error::Usage(format!(
            "unknown scene {other:?}; expected wall-walk, corridor1..3 or screening"
        ))),
    }
}
