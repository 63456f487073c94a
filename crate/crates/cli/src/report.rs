//! Machine-readable reports. Field names are part of the published schemas
//! in `schemas/`.

use serde::Serialize;

use bnpmi_core::mi::MiDraws;
use bnpmi_core::rbtest::Verdict;
use bnpmi_core::stats::{mean, quantile_sorted, sorted_copy};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DrawSummary {
    pub count: usize,
    pub mean: f64,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    /// Fraction of draws clamped to exactly zero.
    pub zero_fraction: f64,
    /// Realizations redrawn after a degenerate neighbor structure.
    pub retries: usize,
}

impl DrawSummary {
    pub fn of(draws: &MiDraws) -> Self {
        let s = sorted_copy(&draws.values);
        DrawSummary {
            count: s.len(),
            mean: mean(&s),
            min: s[0],
            q1: quantile_sorted(&s, 0.25),
            median: quantile_sorted(&s, 0.5),
            q3: quantile_sorted(&s, 0.75),
            max: s[s.len() - 1],
            zero_fraction: s.iter().filter(|v| **v == 0.0).count() as f64 / s.len() as f64,
            retries: draws.retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfigEcho {
    /// File path or distribution text form.
    pub source: String,
    pub n: usize,
    pub d: usize,
    pub k: usize,
    pub a: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    pub n_atoms: usize,
    pub draws: usize,
    pub seed: u64,
    pub standardize: bool,
    pub marginals: &'static str,
    pub ties: &'static str,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateReport {
    pub command: &'static str,
    pub point: f64,
    pub q1: f64,
    pub q3: f64,
    pub posterior: DrawSummary,
    pub config: ConfigEcho,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub command: &'static str,
    pub rb: f64,
    pub strength: f64,
    pub verdict: Verdict,
    pub prior: DrawSummary,
    pub posterior: DrawSummary,
    pub config: ConfigEcho,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProfilePoint {
    pub a: f64,
    pub probability: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ElicitReport {
    pub command: &'static str,
    pub c: f64,
    pub d: usize,
    pub chosen_a: f64,
    pub probability: f64,
    pub profile: Vec<ProfilePoint>,
    pub draws: usize,
    pub k: usize,
    pub n_atoms: usize,
    pub seed: u64,
    pub wall_time_s: f64,
}

/// One cell of a simulation table. Column order is fixed.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimRow {
    pub distribution: String,
    pub n: usize,
    pub k: usize,
    pub reps: usize,
    pub true_mi: Option<f64>,
    pub mi_mean: f64,
    pub mse: Option<f64>,
    pub rb_mean: Option<f64>,
    pub str_mean: Option<f64>,
    /// Replications with relative belief below 1.
    pub rb_below_one: Option<usize>,
    /// MI draws that were negative or not finite, over all replications.
    pub invalid_draws: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulateReport {
    pub command: &'static str,
    pub seed: u64,
    pub rows: Vec<SimRow>,
}
