//! Wall-mount tracking mode: background warm-up, recursive per-ROI
//! occupancy/distance/AOA estimation, gated MEWMA adaptation, estimate
//! JSONL output.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;

use thermotrack::background::BackgroundModel;
use thermotrack::error::Result;
use thermotrack::frame::ThermalFrame;
use thermotrack::layout::SensorLayout;
use thermotrack::tracking::{EstimateRecord, Tracker};

use super::{load_layout, load_params, sink, write_jsonl, FrameSource};

#[derive(Args, Debug)]
pub struct TrackArgs {
    /// JSONL frame file.
    #[arg(long)]
    pub frames: Option<PathBuf>,
    /// Live endpoint speaking newline-JSON frame records.
    #[arg(long)]
    pub connect: Option<String>,
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Leading frames per sensor used to estimate the empty-scene model.
    #[arg(long, default_value_t = 60)]
    pub bg_frames: usize,
    /// Keep adapting the background on frames the tracker reports empty.
    #[arg(long, default_value_t = true)]
    pub adapt_background: bool,
    /// Attach the distance posterior to every estimate record.
    #[arg(long, default_value_t = false)]
    pub emit_posterior: bool,
    /// Warm-restart from a saved background state instead of warming up.
    #[arg(long)]
    pub bg_state: Option<PathBuf>,
    /// Save the final background state of every sensor for warm restarts.
    #[arg(long)]
    pub bg_state_out: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Lane {
    warmup: Vec<ThermalFrame>,
    tracker: Option<(BackgroundModel, Tracker)>,
}

pub fn run(args: &TrackArgs) -> Result<()> {
    let layout = load_layout(args.layout.as_ref(), SensorLayout::wall_default)?;
    let params = load_params(args.params.as_ref())?;
    let source = FrameSource::from_args(args.frames.clone(), args.connect.clone())?;
    let mut out = sink(args.out.as_deref())?;

    // saved states are keyed by decimal sensor id
    let saved: HashMap<String, BackgroundModel> = match &args.bg_state {
        Some(path) => serde_json::from_reader(std::fs::File::open(path)?)?,
        None => HashMap::new(),
    };

    let mut lanes: HashMap<u64, Lane> = HashMap::new();
    source.for_each(layout.detectors(), |frame| {
        let lane = lanes.entry(frame.sensor_id).or_insert_with(|| {
            let tracker = saved
                .get(&frame.sensor_id.to_string())
                .map(|bg| {
                    let t = Tracker::new(&layout, &params, bg)?;
                    log::info!("sensor {}: warm restart", frame.sensor_id);
                    Ok::<_, thermotrack::Error>((bg.clone(), t))
                })
                .transpose()
                .unwrap_or(None);
            Lane { warmup: Vec::new(), tracker }
        });
        if lane.tracker.is_none() {
            lane.warmup.push(frame);
            if lane.warmup.len() >= args.bg_frames.max(2) {
                let bg = BackgroundModel::init(&lane.warmup, params.mewma_mu, params.mewma_c)?;
                let tracker = Tracker::new(&layout, &params, &bg)?;
                log::info!("sensor {}: background ready", lane.warmup[0].sensor_id);
                lane.warmup.clear();
                lane.tracker = Some((bg, tracker));
            }
            return Ok(());
        }
        let (bg, tracker) = lane.tracker.as_mut().expect("initialized above");
        let state = tracker.step(&frame)?;
        let all_empty = state.rois.iter().all(|r| !r.occupied);
        for rec in EstimateRecord::from_state(&state, frame.sensor_id, args.emit_posterior) {
            write_jsonl(out.as_mut(), &rec)?;
        }
        if args.adapt_background && all_empty {
            bg.update(&frame)?;
            tracker.rebind_background(&params, bg)?;
        }
        Ok(())
    })?;

    if let Some(path) = &args.bg_state_out {
        let states: HashMap<String, &BackgroundModel> = lanes
            .iter()
            .filter_map(|(id, lane)| lane.tracker.as_ref().map(|(bg, _)| (id.to_string(), bg)))
            .collect();
        serde_json::to_writer(std::fs::File::create(path)?, &states)?;
        log::info!("saved background state for {} sensors to {}", states.len(), path.display());
    }
    Ok(())
}
