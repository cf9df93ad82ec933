//! Shared plumbing for the CLI modes: config loading, frame sources and
//! output sinks.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use thermotrack::error::{Error, Result};
use thermotrack::frame::ThermalFrame;
use thermotrack::layout::SensorLayout;
use thermotrack::params::ModelParams;

use crate::ingest;

pub mod count;
pub mod eval;
pub mod fit;
pub mod screen;
pub mod simulate;
pub mod track;

pub fn load_params(path: Option<&PathBuf>) -> Result<ModelParams> {
    match path {
        Some(p) => ModelParams::load(p),
        None => Ok(ModelParams::default()),
    }
}

pub fn load_layout(path: Option<&PathBuf>, default: fn() -> SensorLayout) -> Result<SensorLayout> {
    match path {
        Some(p) => SensorLayout::load(p),
        None => Ok(default()),
    }
}

/// Where frames come from: a JSONL file or a live socket.
pub enum FrameSource {
    File(PathBuf),
    Socket(String),
}

impl FrameSource {
    pub fn from_args(frames: Option<PathBuf>, connect: Option<String>) -> Result<Self> {
        match (frames, connect) {
            (Some(p), None) => Ok(FrameSource::File(p)),
            (None, Some(e)) => Ok(FrameSource::Socket(e)),
            _ => Err(Error::Usage("provide exactly one of --frames or --connect".into())),
        }
    }

    /// Feeds every frame, per-sensor ordered, through the callback.
    pub fn for_each(self, detectors: usize, mut f: impl FnMut(ThermalFrame) -> Result<()>) -> Result<()> {
        match self {
            FrameSource::File(path) => {
                let reader = BufReader::new(File::open(&path)?);
                let mut demux = ingest::SensorDemux::new(detectors);
                for line in reader.lines() {
                    for frame in demux.push_line(&line?) {
                        f(frame)?;
                    }
                }
                for frame in demux.flush() {
                    f(frame)?;
                }
                log_counters(&demux.counters);
                Ok(())
            }
            FrameSource::Socket(endpoint) => {
                let mut pending: Option<Error> = None;
                let counters = ingest::ingest_stream(&endpoint, detectors, |frame| {
                    match f(frame) {
                        Ok(()) => Ok(()),
                        Err(e) => {
                            pending = Some(e);
                            Err(std::io::Error::other("pipeline error"))
                        }
                    }
                });
                if let Some(e) = pending {
                    return Err(e);
                }
                log_counters(&counters.map_err(Error::Io)?);
                Ok(())
            }
        }
    }
}

fn log_counters(c: &ingest::IngestCounters) {
    log::info!(
        "ingest: {} accepted, {} malformed, {} late, {} duplicate",
        c.accepted,
        c.malformed,
        c.dropped_late,
        c.dropped_duplicate
    );
}

/// Opens the output sink: a file when given, stdout otherwise.
pub fn sink(path: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => {
            if let Some(dir) = p.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir)?;
                }
            }
            Box::new(BufWriter::new(File::create(p)?))
        }
        None => Box::new(BufWriter::new(std::io::stdout())),
    })
}

pub fn write_jsonl<T: serde::Serialize>(w: &mut dyn Write, value: &T) -> Result<()> {
    serde_json::to_writer(&mut *w, value)?;
    writeln!(w)?;
    Ok(())
}
