//! Evaluation mode: localization RMSE against ground truth, and the
//! screening ROC / precision-recall sweep.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::{Args, Subcommand};
use serde::Deserialize;

use thermotrack::error::{Error, Result};
use thermotrack::screening::roc_report;
use thermotrack::simulator::TruthRecord;
use thermotrack::tracking::{rmse_report, EstimateRecord, RmseSample};

use super::{load_params, sink};

#[derive(Args, Debug)]
pub struct EvalArgs {
    #[command(subcommand)]
    pub what: EvalWhat,
}

#[derive(Subcommand, Debug)]
pub enum EvalWhat {
    /// Distance/AOA RMSE of estimates against simulator ground truth,
    /// broken down per true distance.
    Rmse {
        /// Estimate JSONL from the track mode.
        #[arg(long)]
        est: PathBuf,
        /// Ground-truth JSONL from the simulate mode.
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// ROC sweep over labeled screening windows.
    Roc {
        /// JSONL of {"llr_trace": [..], "positive": bool}.
        #[arg(long)]
        scores: PathBuf,
        /// Operating threshold; configured ξ when omitted.
        #[arg(long, allow_hyphen_values = true)]
        xi: Option<f64>,
        #[arg(long)]
        params: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

pub fn run(args: &EvalArgs) -> Result<()> {
    match &args.what {
        EvalWhat::Rmse { est, truth, out } => run_rmse(est, truth, out.as_ref()),
        EvalWhat::Roc { scores, xi, params, out } => {
            let p = load_params(params.as_ref())?;
            run_roc(scores, xi.unwrap_or(p.xi), out.as_ref())
        }
    }
}

fn run_rmse(est: &PathBuf, truth: &PathBuf, out: Option<&PathBuf>) -> Result<()> {
    // strongest occupied estimate per timestamp
    let mut best: BTreeMap<u64, EstimateRecord> = BTreeMap::new();
    let reader = BufReader::new(File::open(est)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: EstimateRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("estimate line {}: {e}", i + 1)))?;
        if !rec.occupied || rec.d_hat_m.is_none() {
            continue;
        }
        match best.get(&rec.ts_ms) {
            Some(prev) if prev.log_odds >= rec.log_odds => {}
            _ => {
                best.insert(rec.ts_ms, rec);
            }
        }
    }

    let mut samples = Vec::new();
    let reader = BufReader::new(File::open(truth)?);
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let t: TruthRecord = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("truth line {}: {e}", i + 1)))?;
        // single-subject evaluation: skip multi-body frames
        if t.bodies.len() != 1 {
            continue;
        }
        let body = &t.bodies[0];
        let (Some(true_d), Some(true_theta)) = (body.d_m, body.theta_deg) else {
            continue;
        };
        if let Some(rec) = best.get(&t.ts_ms) {
            samples.push(RmseSample {
                est_d_m: rec.d_hat_m.expect("filtered above"),
                est_theta_deg: rec.theta_hat_deg.unwrap_or(0.0),
                true_d_m: true_d,
                true_theta_deg: true_theta,
            });
        }
    }

    let report = rmse_report(&samples)?;
    let mut w = sink(out.map(|p| p.as_path()))?;
    writeln!(w, "true_d_m,n,rmse_d_m,rmse_theta_deg")?;
    for row in &report.rows {
        writeln!(w, "{},{},{},{}", row.true_d_m, row.n, row.rmse_d_m, row.rmse_theta_deg)?;
    }
    writeln!(w, "overall,{},{},{}", report.n, report.rmse_d_m, report.rmse_theta_deg)?;
    eprintln!(
        "matched {} frames: distance RMSE {:.3} m, AOA RMSE {:.2}°",
        report.n, report.rmse_d_m, report.rmse_theta_deg
    );
    Ok(())
}

#[derive(Debug, Deserialize)]
struct ScoreLine {
    llr_trace: Vec<f64>,
    positive: bool,
}

fn run_roc(scores: &PathBuf, xi: f64, out: Option<&PathBuf>) -> Result<()> {
    let reader = BufReader::new(File::open(scores)?);
    let mut labeled = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let s: ScoreLine = serde_json::from_str(&line)
            .map_err(|e| Error::Parse(format!("score line {}: {e}", i + 1)))?;
        labeled.push((s.llr_trace, s.positive));
    }
    let report = roc_report(&labeled, xi)?;
    let mut w = sink(out.map(|p| p.as_path()))?;
    w.write_all(report.to_csv().as_bytes())?;
    eprintln!(
        "AUC {:.4}; at ξ = {}: TPR {:.3}, FPR {:.3}; F1 precision {:.3}/recall {:.3}, \
         F0 precision {:.3}/recall {:.3}",
        report.auc,
        xi,
        report.tpr_at_xi,
        report.fpr_at_xi,
        report.f1_class.precision,
        report.f1_class.recall,
        report.f0_class.precision,
        report.f0_class.recall
    );
    Ok(())
}
