//! Supervised signature learning: covariance-weighted least squares with an
//! L1 penalty, solved by cyclic coordinate descent with soft-thresholding.
//!
//! Minimizes Σ_i ‖ỹ_i − H·r_i‖²_C + λ·Σ|h_{m,k}| where ỹ_i = y_i − μ and
//! ‖v‖²_C = vᵀC⁻¹v.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

const MAX_SWEEPS: usize = 10_000;
const COORD_TOL: f64 = 1e-8;

/// Learned signature matrix Ĥ (M×K) with solver diagnostics.
#[derive(Debug, Clone)]
pub struct LearnedSignatureMatrix {
    pub h: DMatrix<f64>,
    pub lambda: f64,
    /// Final objective value.
    pub residual: f64,
    /// Objective after every sweep; non-increasing.
    pub objective_trace: Vec<f64>,
    pub sweeps: usize,
}

/// One labeled training sample: the true occupancy pattern and the raw
/// frame temperatures.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    /// Binary occupancy r over the K ROIs.
    pub occupancy: Vec<f64>,
    /// Raw detector temperatures y (length M).
    pub temps: Vec<f64>,
}

pub fn learn_signatures_lasso(
    pairs: &[TrainingPair],
    mu: &DVector<f64>,
    cov: &DMatrix<f64>,
    lambda: f64,
) -> Result<LearnedSignatureMatrix> {
    if pairs.is_empty() {
        return Err(Error::Usage("signature learning needs at least one labeled pair".into()));
    }
    if lambda < 0.0 {
        return Err(Error::Usage("λ must be non-negative".into()));
    }
    let m = mu.len();
    let k_count = pairs[0].occupancy.len();
    if k_count == 0 {
        return Err(Error::Usage("occupancy vectors are empty".into()));
    }
    for (i, p) in pairs.iter().enumerate() {
        if p.temps.len() != m {
            return Err(Error::Usage(format!("pair {i}: frame length {} != M = {m}", p.temps.len())));
        }
        if p.occupancy.len() != k_count {
            return Err(Error::Usage(format!(
                "pair {i}: occupancy length {} != K = {k_count}",
                p.occupancy.len()
            )));
        }
        if p.occupancy.iter().any(|&r| r != 0.0 && r != 1.0) {
            return Err(Error::Usage(format!("pair {i}: occupancy vector is not binary")));
        }
    }
    let n = pairs.len();

    let precision = Cholesky::new(cov.clone())
        .ok_or_else(|| {
            Error::Numeric(
                "training covariance is singular; add ridge regularization (ε·I) before learning"
                    .into(),
            )
        })?
        .inverse();

    // ỹ columns and occupancy columns
    let ytil = DMatrix::from_fn(m, n, |i, j| pairs[j].temps[i] - mu[i]);
    let rmat = DMatrix::from_fn(k_count, n, |k, j| pairs[j].occupancy[k]);
    let gram = &rmat * rmat.transpose(); // K×K

    let mut h = DMatrix::zeros(m, k_count);
    let mut trace: Vec<f64> = Vec::new();
    let mut sweeps = 0;

    for _sweep in 0..MAX_SWEEPS {
        sweeps += 1;
        // residual columns e_i = ỹ_i − H r_i and their ROI-weighted sums
        let resid = &ytil - &h * &rmat; // M×N
        let mut s = &resid * rmat.transpose(); // M×K, S[:,k] = Σ_i e_i r_{i,k}
        let mut max_delta: f64 = 0.0;

        for mi in 0..m {
            for k in 0..k_count {
                let a = precision[(mi, mi)] * gram[(k, k)];
                if a <= 0.0 {
                    // ROI k never occupied in training: coefficient unidentifiable
                    continue;
                }
                // b = [P·S_k]_m with the current coordinate's own
                // contribution added back (partial residual)
                let mut b = 0.0;
                for j in 0..m {
                    b += precision[(mi, j)] * s[(j, k)];
                }
                b += h[(mi, k)] * a;
                let h_new = soft_threshold(b, lambda / 2.0) / a;
                let delta = h_new - h[(mi, k)];
                if delta != 0.0 {
                    for kk in 0..k_count {
                        s[(mi, kk)] -= delta * gram[(k, kk)];
                    }
                    h[(mi, k)] = h_new;
                    max_delta = max_delta.max(delta.abs());
                }
            }
        }

        let obj = objective(&ytil, &rmat, &h, &precision, lambda);
        if let Some(&prev) = trace.last() {
            debug_assert!(
                obj <= prev + 1e-7 * prev.abs().max(1.0),
                "objective increased across a sweep: {prev} -> {obj}"
            );
        }
        trace.push(obj);
        if max_delta < COORD_TOL {
            break;
        }
    }

    let residual = *trace.last().expect("at least one sweep ran");
    Ok(LearnedSignatureMatrix { h, lambda, residual, objective_trace: trace, sweeps })
}

fn soft_threshold(v: f64, t: f64) -> f64 {
    if v > t {
        v - t
    } else if v < -t {
        v + t
    } else {
        0.0
    }
}

fn objective(
    ytil: &DMatrix<f64>,
    rmat: &DMatrix<f64>,
    h: &DMatrix<f64>,
    precision: &DMatrix<f64>,
    lambda: f64,
) -> f64 {
    let resid = ytil - h * rmat;
    let mut quad = 0.0;
    for j in 0..resid.ncols() {
        let e = resid.column(j);
        quad += (precision * e).dot(&e);
    }
    quad + lambda * h.iter().map(|v| v.abs()).sum::<f64>()
}
