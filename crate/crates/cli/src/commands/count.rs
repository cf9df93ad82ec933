//! Ceiling-mount counting mode: MAP occupancy snapshots plus
//! mutual-distancing alerts aggregated per time window.

use std::collections::HashMap;
use std::path::PathBuf;

use clap::Args;

use thermotrack::background::BackgroundModel;
use thermotrack::counting::{
    distancing_alerts, AlertRecord, CountStep, CountingFilter, OccupancyRecord, TransitionModel,
};
use thermotrack::error::Result;
use thermotrack::frame::ThermalFrame;
use thermotrack::layout::SensorLayout;

use super::{load_layout, load_params, sink, write_jsonl, FrameSource};

#[derive(Args, Debug)]
pub struct CountArgs {
    #[arg(long)]
    pub frames: Option<PathBuf>,
    #[arg(long)]
    pub connect: Option<String>,
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Maximum number of co-present bodies.
    #[arg(long, default_value_t = 3)]
    pub zeta: usize,
    /// Mutual-distance alert threshold.
    #[arg(long = "threshold-m", default_value_t = 1.0)]
    pub threshold_m: f64,
    /// Alert aggregation window in seconds.
    #[arg(long = "window-s", default_value_t = 60)]
    pub window_s: u64,
    #[arg(long, default_value_t = 60)]
    pub bg_frames: usize,
    /// Occupancy snapshot sink (JSONL).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Alert sink (JSONL); stdout when omitted.
    #[arg(long)]
    pub alerts_out: Option<PathBuf>,
}

struct Lane {
    warmup: Vec<ThermalFrame>,
    filter: Option<CountingFilter>,
    steps: Vec<CountStep>,
}

pub fn run(args: &CountArgs) -> Result<()> {
    let layout = load_layout(args.layout.as_ref(), SensorLayout::ceiling_default)?;
    let params = load_params(args.params.as_ref())?;
    let source = FrameSource::from_args(args.frames.clone(), args.connect.clone())?;
    let mut out = sink(args.out.as_deref())?;
    let footprints = layout.footprints()?;

    let mut lanes: HashMap<u64, Lane> = HashMap::new();
    source.for_each(layout.detectors(), |frame| {
        let lane = lanes
            .entry(frame.sensor_id)
            .or_insert_with(|| Lane { warmup: Vec::new(), filter: None, steps: Vec::new() });
        if lane.filter.is_none() {
            lane.warmup.push(frame);
            if lane.warmup.len() >= args.bg_frames.max(2) {
                let bg = BackgroundModel::init(&lane.warmup, params.mewma_mu, params.mewma_c)?;
                let tm = TransitionModel::from_layout(&layout)?;
                lane.filter = Some(CountingFilter::new(&layout, &params, &bg, tm, args.zeta)?);
                log::info!("sensor {}: background ready", lane.warmup[0].sensor_id);
                lane.warmup.clear();
            }
            return Ok(());
        }
        let sensor_id = frame.sensor_id;
        let step = lane.filter.as_mut().expect("initialized above").step(&frame)?;
        write_jsonl(out.as_mut(), &OccupancyRecord::from_step(&step, sensor_id))?;
        lane.steps.push(step);
        Ok(())
    })?;

    let mut alerts_out = sink(args.alerts_out.as_deref())?;
    for (sensor_id, lane) in &lanes {
        let alerts =
            distancing_alerts(&lane.steps, &footprints, args.threshold_m, args.window_s * 1000)?;
        for a in alerts {
            let rec = AlertRecord {
                sensor_id: *sensor_id,
                ts_ms: a.ts_ms,
                roi_pair: a.roi_pair,
                distance_m: a.distance_m,
                window: a.window,
            };
            write_jsonl(alerts_out.as_mut(), &rec)?;
        }
    }
    Ok(())
}
