//! Thermal frames and the quantized wire codec.
//!
//! Internally every computation runs on dequantized °C floats; the 8-bit
//! code representation (0.25 °C steps over [0, 63.75]) exists only at the
//! I/O boundary.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Wire resolution: one code step in °C.
pub const LSB_C: f64 = 0.25;
/// Largest representable temperature (code 255).
pub const MAX_TEMP_C: f64 = 255.0 * LSB_C;

/// One timestamped reading of all detectors of a sensor.
#[derive(Debug, Clone, PartialEq)]
pub struct ThermalFrame {
    pub sensor_id: u64,
    /// Milliseconds since epoch.
    pub ts_ms: u64,
    /// Detector temperatures in °C, row-major over the detector grid.
    pub temps: Vec<f64>,
}

impl ThermalFrame {
    pub fn new(sensor_id: u64, ts_ms: u64, temps: Vec<f64>) -> Self {
        Self { sensor_id, ts_ms, temps }
    }

    /// Validates detector count and finiteness of every reading.
    pub fn validate(&self, expected_detectors: usize) -> Result<()> {
        if self.temps.len() != expected_detectors {
            return Err(Error::Parse(format!(
                "frame has {} detector values, layout expects {}",
                self.temps.len(),
                expected_detectors
            )));
        }
        for (m, &t) in self.temps.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::Parse(format!("detector {m}: non-finite temperature")));
            }
        }
        Ok(())
    }
}

/// One frame as it travels on the wire: quantized codes plus identity.
///
/// The sensor id is a 64-bit hardware address serialized as a decimal
/// string so that JSON consumers without u64 support stay exact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    #[serde(with = "u64_as_string")]
    pub sensor_id: u64,
    pub ts_ms: u64,
    pub codes: Vec<u8>,
}

pub(crate) mod u64_as_string {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &u64, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&v.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<u64, D::Error> {
        let s = String::deserialize(d)?;
        s.parse::<u64>()
            .map_err(|_| de::Error::custom(format!("sensor_id is not a decimal u64: {s:?}")))
    }
}

/// Quantizes a frame to its wire record.
///
/// Each temperature maps to `code = round(temp / 0.25)`; any reading
/// outside [0, 63.75] °C is rejected naming the detector index.
pub fn encode_frame(frame: &ThermalFrame) -> Result<FrameRecord> {
    let mut codes = Vec::with_capacity(frame.temps.len());
    for (m, &t) in frame.temps.iter().enumerate() {
        if !t.is_finite() || t < 0.0 || t > MAX_TEMP_C {
            return Err(Error::TemperatureRange { detector: m, value: t });
        }
        codes.push((t / LSB_C).round() as u8);
    }
    Ok(FrameRecord { sensor_id: frame.sensor_id, ts_ms: frame.ts_ms, codes })
}

/// Dequantizes a wire record, checking the detector count.
pub fn decode_frame(record: &FrameRecord, expected_detectors: usize) -> Result<ThermalFrame> {
    if record.codes.len() != expected_detectors {
        return Err(Error::Parse(format!(
            "record has {} codes, layout expects {}",
            record.codes.len(),
            expected_detectors
        )));
    }
    let temps = record.codes.iter().map(|&c| f64::from(c) * LSB_C).collect();
    Ok(ThermalFrame { sensor_id: record.sensor_id, ts_ms: record.ts_ms, temps })
}

/// Parses one JSONL line into a wire record.
pub fn parse_record_line(line: &str) -> Result<FrameRecord> {
    serde_json::from_str(line).map_err(|e| Error::Parse(format!("bad frame record: {e}")))
}

/// Reads a JSONL frame file, enforcing per-sensor non-decreasing timestamps.
pub fn read_frames_jsonl<R: BufRead>(reader: R, detectors: usize) -> Result<Vec<ThermalFrame>> {
    let mut frames = Vec::new();
    let mut last_ts: std::collections::HashMap<u64, u64> = std::collections::HashMap::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec = parse_record_line(&line)
            .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
        if let Some(&prev) = last_ts.get(&rec.sensor_id) {
            if rec.ts_ms < prev {
                return Err(Error::Parse(format!(
                    "line {}: timestamp {} goes backwards (sensor {}, previous {})",
                    i + 1,
                    rec.ts_ms,
                    rec.sensor_id,
                    prev
                )));
            }
        }
        last_ts.insert(rec.sensor_id, rec.ts_ms);
        frames.push(decode_frame(&rec, detectors)?);
    }
    Ok(frames)
}

/// Writes frames as JSONL wire records.
pub fn write_frames_jsonl<W: Write>(w: &mut W, frames: &[ThermalFrame]) -> Result<()> {
    for f in frames {
        let rec = encode_frame(f)?;
        serde_json::to_writer(&mut *w, &rec)?;
        writeln!(w)?;
    }
    Ok(())
}
