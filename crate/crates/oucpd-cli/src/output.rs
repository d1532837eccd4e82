//! Result assembly and file emission: the versioned detection-result JSON,
//! full-precision series CSV, and the Monte-Carlo summary tables.

use std::path::Path;

use oucpd::{
    BasisSet, IcEntry, McCountSummary, McRateSummary, PruningStats, Segmentation, TimeSeries,
    fit_segments,
};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::Result;

pub const SCHEMA_VERSION: &str = "1";

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentReport {
    pub start_idx: usize,
    pub end_idx: usize,
    pub mu: Vec<f64>,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_run_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_run_var: Option<f64>,
    pub sse: f64,
    pub loglik: f64,
}

/// The JSON document every detection path emits.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DetectionResult {
    pub schema_version: String,
    pub method: String,
    pub algorithm: String,
    pub m: usize,
    pub change_indices: Vec<usize>,
    pub change_times: Vec<f64>,
    pub change_fractions: Vec<f64>,
    pub per_segment: Vec<SegmentReport>,
    pub sigma_used: f64,
    pub total_cost: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub selected_m: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ic_trace: Option<Vec<IcTraceEntry>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub pruning_stats: Option<PruningStats>,
    pub config: Value,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IcTraceEntry {
    pub m: usize,
    pub loglik: f64,
    pub ic: f64,
}

impl From<&IcEntry> for IcTraceEntry {
    fn from(e: &IcEntry) -> Self {
        Self {
            m: e.m,
            loglik: e.loglik,
            ic: e.ic,
        }
    }
}

/// Labels and objective value accompanying an accepted segmentation.
pub struct ResultMeta<'a> {
    pub method: &'a str,
    pub algorithm: &'a str,
    pub total_cost: f64,
}

/// Fits every segment of the accepted segmentation and assembles the
/// report. Long-run statistics are emitted only for segments with a > 0,
/// and the long-run mean only for the single-function basis.
pub fn build_result(
    series: &TimeSeries,
    basis: &BasisSet,
    segmentation: &Segmentation,
    sigma: f64,
    meta: ResultMeta<'_>,
    config: Value,
) -> Result<DetectionResult> {
    let fits = fit_segments(series, basis, segmentation.change_indices(), Some(sigma))?;
    let per_segment = fits
        .iter()
        .map(|fit| {
            let a = fit.params.a;
            let long_run_mean = (a > 0.0 && basis.p() == 1).then(|| fit.params.mu[0] / a);
            let long_run_var = (a > 0.0).then(|| sigma * sigma / (2.0 * a));
            SegmentReport {
                start_idx: fit.a_idx,
                end_idx: fit.b_idx,
                mu: fit.params.mu.clone(),
                a,
                long_run_mean,
                long_run_var,
                sse: fit.sse,
                loglik: fit.loglik.expect("loglik requested"),
            }
        })
        .collect();
    Ok(DetectionResult {
        schema_version: SCHEMA_VERSION.to_owned(),
        method: meta.method.to_owned(),
        algorithm: meta.algorithm.to_owned(),
        m: segmentation.m(),
        change_indices: segmentation.change_indices().to_vec(),
        change_times: segmentation.change_times(series.delta_t()),
        change_fractions: segmentation.fractions(),
        per_segment,
        sigma_used: sigma,
        total_cost: meta.total_cost,
        selected_m: None,
        ic_trace: None,
        pruning_stats: None,
        config,
    })
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Writes a `t,x` CSV at 17 significant digits (lossless for f64).
pub fn write_series_csv(path: &Path, series: &TimeSeries) -> Result<()> {
    let mut out = String::with_capacity(series.values().len() * 48);
    out.push_str("t,x\n");
    for (i, v) in series.values().iter().enumerate() {
        out.push_str(&format!("{:.16e},{:.16e}\n", series.time_at(i), v));
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// One row per (method, change point), shaped like the reproduced tables.
pub fn write_rate_csv(
    path: &Path,
    case: u8,
    horizon: f64,
    summaries: &[McRateSummary],
) -> Result<()> {
    let mut out = String::new();
    out.push_str("case,method,T,iterations,failures,cp,true_fraction,mean,ci_lower,ci_upper,mse\n");
    for summary in summaries {
        for (j, cp) in summary.per_change.iter().enumerate() {
            out.push_str(&format!(
                "{case},{:?},{horizon},{},{},{},{},{:.6},{:.6},{:.6},{:.6e}\n",
                summary.method,
                summary.iterations,
                summary.failures,
                j + 1,
                cp.true_fraction,
                cp.mean,
                cp.ci_lower,
                cp.ci_upper,
                cp.mse
            ));
        }
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn write_count_csv(
    path: &Path,
    case: u8,
    horizon: f64,
    m_true: usize,
    summary: &McCountSummary,
) -> Result<()> {
    let mut out = String::new();
    out.push_str("case,algorithm,T,iterations,failures,m_true,cf,rf_percent\n");
    out.push_str(&format!(
        "{case},{:?},{horizon},{},{},{m_true},{},{}\n",
        summary.algorithm, summary.iterations, summary.failures, summary.cf, summary.rf_percent
    ));
    std::fs::write(path, out)?;
    Ok(())
}
