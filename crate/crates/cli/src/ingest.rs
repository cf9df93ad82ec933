//! Streaming ingestion: newline-delimited JSON frame records over a plain
//! socket, demultiplexed into per-sensor streams with a small reordering
//! window. A broker client can be slotted in by feeding its payloads to
//! [`SensorDemux::push_line`].

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, BufReader};
use std::net::TcpStream;
use std::time::Duration;

use thermotrack::frame::{decode_frame, parse_record_line, ThermalFrame};

/// How many newer frames may overtake an out-of-order one before it is
/// considered lost.
pub const REORDER_WINDOW: usize = 2;

#[derive(Debug, Default, Clone, Copy, PartialEq, Eq)]
pub struct IngestCounters {
    pub accepted: u64,
    pub malformed: u64,
    pub dropped_late: u64,
    pub dropped_duplicate: u64,
}

/// Per-sensor reordering and deduplication of a mixed frame stream.
pub struct SensorDemux {
    detectors: usize,
    pending: HashMap<u64, BTreeMap<u64, ThermalFrame>>,
    last_emitted: HashMap<u64, u64>,
    pub counters: IngestCounters,
}

impl SensorDemux {
    pub fn new(detectors: usize) -> Self {
        SensorDemux {
            detectors,
            pending: HashMap::new(),
            last_emitted: HashMap::new(),
            counters: IngestCounters::default(),
        }
    }

    /// Parses one wire line; returns any frames that became emittable, in
    /// per-sensor timestamp order. Malformed lines are skipped and counted.
    pub fn push_line(&mut self, line: &str) -> Vec<ThermalFrame> {
        if line.trim().is_empty() {
            return Vec::new();
        }
        let frame = match parse_record_line(line)
            .and_then(|rec| decode_frame(&rec, self.detectors))
        {
            Ok(f) => f,
            Err(e) => {
                log::debug!("skipping malformed record: {e}");
                self.counters.malformed += 1;
                return Vec::new();
            }
        };
        self.push_frame(frame)
    }

    pub fn push_frame(&mut self, frame: ThermalFrame) -> Vec<ThermalFrame> {
        let sensor = frame.sensor_id;
        if let Some(&last) = self.last_emitted.get(&sensor) {
            if frame.ts_ms == last {
                self.counters.dropped_duplicate += 1;
                return Vec::new();
            }
            if frame.ts_ms < last {
                self.counters.dropped_late += 1;
                return Vec::new();
            }
        }
        let pending = self.pending.entry(sensor).or_default();
        if pending.contains_key(&frame.ts_ms) {
            self.counters.dropped_duplicate += 1;
            return Vec::new();
        }
        pending.insert(frame.ts_ms, frame);
        let mut ready = Vec::new();
        while pending.len() > REORDER_WINDOW {
            let (&ts, _) = pending.iter().next().expect("non-empty");
            let f = pending.remove(&ts).expect("present");
            self.last_emitted.insert(sensor, ts);
            self.counters.accepted += 1;
            ready.push(f);
        }
        ready
    }

    /// Drains every buffered frame in per-sensor timestamp order.
    pub fn flush(&mut self) -> Vec<ThermalFrame> {
        let mut sensors: Vec<u64> = self.pending.keys().cloned().collect();
        sensors.sort_unstable();
        let mut out = Vec::new();
        for sensor in sensors {
            if let Some(pending) = self.pending.get_mut(&sensor) {
                while let Some((&ts, _)) = pending.iter().next() {
                    let f = pending.remove(&ts).expect("present");
                    self.last_emitted.insert(sensor, ts);
                    self.counters.accepted += 1;
                    out.push(f);
                }
            }
        }
        out
    }
}

/// Connects to a newline-JSON frame endpoint and ingests until the peer
/// closes the stream. Connection failures retry with bounded exponential
/// backoff.
pub fn ingest_stream(
    endpoint: &str,
    detectors: usize,
    mut on_frame: impl FnMut(ThermalFrame) -> std::io::Result<()>,
) -> std::io::Result<IngestCounters> {
    let mut demux = SensorDemux::new(detectors);
    let mut backoff = Duration::from_millis(250);
    let mut attempts = 0u32;
    loop {
        match TcpStream::connect(endpoint) {
            Ok(stream) => {
                log::info!("connected to {endpoint}");
                let reader = BufReader::new(stream);
                for line in reader.lines() {
                    let line = line?;
                    for frame in demux.push_line(&line) {
                        on_frame(frame)?;
                    }
                }
                // peer closed: drain the reorder buffer and finish
                for frame in demux.flush() {
                    on_frame(frame)?;
                }
                return Ok(demux.counters);
            }
            Err(e) => {
                attempts += 1;
                if attempts > 6 {
                    return Err(e);
                }
                log::warn!("connect to {endpoint} failed ({e}); retrying in {backoff:?}");
                std::thread::sleep(backoff);
                backoff = (backoff * 2).min(Duration::from_secs(8));
            }
        }
    }
}
