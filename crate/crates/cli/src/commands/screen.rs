//! Screening mode: localization-triggered temperature screening with
//! optional radar distance refinement.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::PathBuf;

use clap::Args;

use thermotrack::background::BackgroundModel;
use thermotrack::error::{Error, Result};
use thermotrack::frame::ThermalFrame;
use thermotrack::layout::SensorLayout;
use thermotrack::screening::{
    fuse_distance_default, AlphaMode, RadarRecord, ScreeningSession, VerdictRecord,
};
use thermotrack::tracking::Tracker;

use super::{load_layout, load_params, sink, write_jsonl, FrameSource};

#[derive(Args, Debug)]
pub struct ScreenArgs {
    #[arg(long)]
    pub frames: Option<PathBuf>,
    #[arg(long)]
    pub connect: Option<String>,
    /// Radar distance stream (JSONL of {ts_ms, d_m, quality}).
    #[arg(long)]
    pub radar: Option<PathBuf>,
    #[arg(long)]
    pub layout: Option<PathBuf>,
    #[arg(long)]
    pub params: Option<PathBuf>,
    /// Inspection window length; overrides the configured Q.
    #[arg(long)]
    pub q: Option<usize>,
    /// LLR decision threshold; overrides the configured ξ.
    #[arg(long, allow_hyphen_values = true)]
    pub xi: Option<f64>,
    #[arg(long, default_value_t = 60)]
    pub bg_frames: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

struct Lane {
    warmup: Vec<ThermalFrame>,
    tracker: Option<(BackgroundModel, Tracker)>,
    session: Option<ScreeningSession>,
}

pub fn run(args: &ScreenArgs) -> Result<()> {
    let layout = load_layout(args.layout.as_ref(), SensorLayout::wall_default)?;
    let mut params = load_params(args.params.as_ref())?;
    if let Some(q) = args.q {
        params.q_window = q;
    }
    if let Some(xi) = args.xi {
        params.xi = xi;
    }
    params.validate()?;

    let radar = match &args.radar {
        Some(path) => load_radar(path)?,
        None => Vec::new(),
    };
    let match_window_ms = (params.dt_s * 1000.0 / 2.0) as u64;

    let source = FrameSource::from_args(args.frames.clone(), args.connect.clone())?;
    let mut out = sink(args.out.as_deref())?;

    let mut lanes: HashMap<u64, Lane> = HashMap::new();
    source.for_each(layout.detectors(), |frame| {
        let lane = lanes.entry(frame.sensor_id).or_insert_with(|| Lane {
            warmup: Vec::new(),
            tracker: None,
            session: None,
        });
        if lane.tracker.is_none() {
            lane.warmup.push(frame);
            if lane.warmup.len() >= args.bg_frames.max(2) {
                let bg = BackgroundModel::init(&lane.warmup, params.mewma_mu, params.mewma_c)?;
                let tracker = Tracker::new(&layout, &params, &bg)?;
                lane.warmup.clear();
                lane.tracker = Some((bg, tracker));
            }
            return Ok(());
        }
        let (bg, tracker) = lane.tracker.as_mut().expect("initialized above");
        let state = tracker.step(&frame)?;
        match state.best().and_then(|b| b.d_hat_m) {
            Some(ir_d) => {
                let radar_d = lookup_radar(&radar, frame.ts_ms, match_window_ms);
                let fused = fuse_distance_default(ir_d, radar_d)?;
                let session = lane
                    .session
                    .get_or_insert_with(|| {
                        ScreeningSession::new(params.q_window).expect("validated Q")
                    });
                session.push(frame.clone(), fused);
                if session.is_ready() {
                    let verdict = session.verdict(bg, AlphaMode::Auto, &params)?;
                    write_jsonl(out.as_mut(), &VerdictRecord::from(&verdict))?;
                }
            }
            None => {
                // subject left the range: close the session, adapt background
                lane.session = None;
                bg.update(&frame)?;
                tracker.rebind_background(&params, bg)?;
            }
        }
        Ok(())
    })?;
    Ok(())
}

fn load_radar(path: &PathBuf) -> Result<Vec<RadarRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: RadarRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("radar line {}: {e}", i + 1)))?;
        if rec.d_m < 0.0 {
            return Err(Error::Usage(format!("radar line {}: negative distance", i + 1)));
        }
        records.push(rec);
    }
    records.sort_by_key(|r| r.ts_ms);
    Ok(records)
}

/// Nearest radar sample within ±window of the frame timestamp.
fn lookup_radar(radar: &[RadarRecord], ts_ms: u64, window_ms: u64) -> Option<f64> {
    if radar.is_empty() {
        return None;
    }
    let idx = radar.partition_point(|r| r.ts_ms < ts_ms);
    let candidates = [idx.checked_sub(1), Some(idx)];
    candidates
        .iter()
        .flatten()
        .filter_map(|&i| radar.get(i))
        .map(|r| (r.ts_ms.abs_diff(ts_ms), r.d_m))
        .filter(|&(gap, _)| gap <= window_ms)
        .min_by_key(|&(gap, _)| gap)
        .map(|(_, d)| d)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn radar_lookup_picks_nearest_within_window() {
        let radar = vec![
            RadarRecord { ts_ms: 0, d_m: 0.30, quality: 1.0 },
            RadarRecord { ts_ms: 300, d_m: 0.32, quality: 1.0 },
            RadarRecord { ts_ms: 900, d_m: 0.40, quality: 1.0 },
        ];
        assert_eq!(lookup_radar(&radar, 310, 150), Some(0.32));
        assert_eq!(lookup_radar(&radar, 600, 150), None);
        assert_eq!(lookup_radar(&radar, 0, 150), Some(0.30));
        assert_eq!(lookup_radar(&[], 0, 150), None);
    }
}
