//! Model fitting mode: the s-relu distance law from (distance, increase)
//! samples, and supervised signature learning from labeled frames.

use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::{Deserialize, Serialize};

use thermotrack::background::BackgroundModel;
use thermotrack::error::{Error, Result};
use thermotrack::frame::{decode_frame, FrameRecord};
use thermotrack::lasso::{learn_signatures_lasso, TrainingPair};
use thermotrack::signature::fit_srelu;

use super::{load_params, sink};

#[derive(Args, Debug)]
pub struct FitArgs {
    #[command(subcommand)]
    pub what: FitWhat,
}

#[derive(Subcommand, Debug)]
pub enum FitWhat {
    /// Fit the softplus distance law to (d_m, increase_c) samples.
    Srelu {
        /// JSONL of {"d_m": .., "increase_c": ..}.
        #[arg(long)]
        samples: PathBuf,
        /// TOML fragment sink; stdout when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Learn the signature matrix from labeled (occupancy, frame) pairs.
    Lasso {
        /// JSONL of frame records extended with "r": [0/1; K]. All-empty
        /// rows calibrate the background.
        #[arg(long)]
        training: PathBuf,
        #[arg(long)]
        lambda: Option<f64>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Debug, Deserialize)]
struct SampleLine {
    d_m: f64,
    increase_c: f64,
}

#[derive(Debug, Deserialize)]
struct TrainingLine {
    #[serde(flatten)]
    record: FrameRecord,
    r: Vec<u8>,
}

#[derive(Debug, Serialize)]
struct LassoOutput {
    detectors: usize,
    rois: usize,
    lambda: f64,
    residual: f64,
    sweeps: usize,
    /// Row-major M×K signature matrix.
    h: Vec<Vec<f64>>,
}

pub fn run(args: &FitArgs) -> Result<()> {
    match &args.what {
        FitWhat::Srelu { samples, out } => {
            let reader = BufReader::new(File::open(samples)?);
            let mut pairs = Vec::new();
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let s: SampleLine = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("sample line {}: {e}", i + 1)))?;
                pairs.push((s.d_m, s.increase_c));
            }
            let fit = fit_srelu(&pairs)?;
            let mut w = sink(out.as_deref())?;
            writeln!(w, "sigma0_c = {}", fit.sigma0_c)?;
            writeln!(w, "gamma_c_per_m = {}", fit.gamma_c_per_m)?;
            eprintln!(
                "fitted {} samples: σ̄₀ = {:.4} °C, γ = {:.4} °C/m, RMSE {:.4} °C ({} iterations)",
                pairs.len(),
                fit.sigma0_c,
                fit.gamma_c_per_m,
                fit.rmse_c,
                fit.iterations
            );
            Ok(())
        }
        FitWhat::Lasso { training, lambda, params, out } => {
            let model_params = load_params(params.as_ref())?;
            let lambda = lambda.unwrap_or(model_params.lambda_lasso);
            let reader = BufReader::new(File::open(training)?);
            let mut empties = Vec::new();
            let mut pairs: Vec<TrainingPair> = Vec::new();
            let mut detectors = None;
            for (i, line) in reader.lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let t: TrainingLine = serde_json::from_str(&line)
                    .map_err(|e| Error::Parse(format!("training line {}: {e}", i + 1)))?;
                let m = *detectors.get_or_insert(t.record.codes.len());
                let frame = decode_frame(&t.record, m)?;
                if t.r.iter().all(|&b| b == 0) {
                    empties.push(frame);
                } else {
                    pairs.push(TrainingPair {
                        occupancy: t.r.iter().map(|&b| f64::from(b)).collect(),
                        temps: frame.temps,
                    });
                }
            }
            let bg =
                BackgroundModel::init(&empties, model_params.mewma_mu, model_params.mewma_c)
                    .map_err(|_| {
                        Error::Usage(
                            "training set needs at least 2 all-empty rows to calibrate the \
                             background"
                                .into(),
                        )
                    })?;
            let fit = learn_signatures_lasso(&pairs, bg.mu(), bg.cov(), lambda)?;
            let output = LassoOutput {
                detectors: fit.h.nrows(),
                rois: fit.h.ncols(),
                lambda,
                residual: fit.residual,
                sweeps: fit.sweeps,
                h: (0..fit.h.nrows())
                    .map(|i| (0..fit.h.ncols()).map(|k| fit.h[(i, k)]).collect())
                    .collect(),
            };
            let mut w = sink(out.as_deref())?;
            serde_json::to_writer_pretty(&mut w, &output)?;
            writeln!(w)?;
            eprintln!(
                "learned {}×{} signature matrix from {} pairs (λ = {lambda}, {} sweeps, \
                 objective {:.4})",
                output.detectors,
                output.rois,
                pairs.len(),
                fit.sweeps,
                fit.residual
            );
            Ok(())
        }
    }
}
