//! Differential-entropy estimators (nats) and closed-form entropies.
//!
//! * [`kl_entropy`]: nearest-neighbor estimator of Kozachenko and Leonenko.
//! * [`knn_kl_entropy`]: its k-th neighbor generalization.
//! * [`bnp_prior_entropy`] / [`bnp_posterior_entropy`]: the same statistic
//!   with the empirical weights `1/n` replaced by the Dirichlet weights of a
//!   process realization.
//!
//! Neighbor distances follow the zero-skipping convention of [`crate::knn`].

use std::f64::consts::PI;

use statrs::function::beta::ln_beta;
use statrs::function::gamma::{digamma, ln_gamma};

use crate::dp::{DpRealization, Provenance};
use crate::knn::{distinct_rows, knn_distances, TiePolicy};
use crate::sampling::{DistributionSpec, UbdVariant};
use crate::{Error, Result, SampleMatrix};

pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// `log(pi^(d/2) / Gamma(d/2 + 1))`, the log-volume of the unit ball.
pub fn unit_ball_log_volume(d: usize) -> f64 {
    let h = d as f64 / 2.0;
    h * PI.ln() - ln_gamma(h + 1.0)
}

/// `L_j = sum_{r=1..j} 1/r`, `L_0 = 0`.
pub fn harmonic(j: usize) -> f64 {
    (1..=j).map(|r| 1.0 / r as f64).sum()
}

/// Dimension- and order-dependent constants shared by the estimators.
#[derive(Debug, Clone, PartialEq)]
pub struct EstimatorConstants {
    pub d: usize,
    pub k: usize,
    pub unit_ball_log_volume: f64,
    pub euler_gamma: f64,
    /// `L_0 ..= L_{k-1}`.
    pub harmonic: Vec<f64>,
}

impl EstimatorConstants {
    pub fn new(d: usize, k: usize) -> Result<Self> {
        if d == 0 || k == 0 {
            return Err(Error::InvalidParameter(format!(
                "need d >= 1 and k >= 1, got d = {d}, k = {k}"
            )));
        }
        Ok(EstimatorConstants {
            d,
            k,
            unit_ball_log_volume: unit_ball_log_volume(d),
            euler_gamma: EULER_GAMMA,
            harmonic: (0..k).map(harmonic).collect(),
        })
    }

    /// `L_{k-1}`.
    pub fn digamma_offset(&self) -> f64 {
        self.harmonic[self.k - 1]
    }
}

fn mean_log(distances: &[f64]) -> f64 {
    distances.iter().map(|r| r.ln()).sum::<f64>() / distances.len() as f64
}

fn check_size(n: usize, k: usize) -> Result<()> {
    if n < k + 1 {
        return Err(Error::Precondition(format!(
            "need at least k + 1 = {} points, got {n}",
            k + 1
        )));
    }
    Ok(())
}

/// `(d/n) sum log rho_i + log V_d + gamma + log(n - 1)` with `rho_i` the
/// nearest-neighbor distance.
pub fn kl_entropy(sample: &SampleMatrix) -> Result<f64> {
    let n = sample.nrows();
    check_size(n, 1)?;
    let c = EstimatorConstants::new(sample.ncols(), 1)?;
    let rho = knn_distances(sample, 1)?;
    Ok(c.d as f64 * mean_log(&rho) + c.unit_ball_log_volume + c.euler_gamma + (n as f64 - 1.0).ln())
}

/// `(d/n) sum log R_{i,k} + log V_d - L_{k-1} + gamma + log n`.
pub fn knn_kl_entropy(sample: &SampleMatrix, k: usize) -> Result<f64> {
    let n = sample.nrows();
    let c = EstimatorConstants::new(sample.ncols(), k)?;
    check_size(n, k)?;
    let r = knn_distances(sample, k)?;
    Ok(c.d as f64 * mean_log(&r) + c.unit_ball_log_volume - c.digamma_offset()
        + c.euler_gamma
        + (n as f64).ln())
}

/// Weighted k-NN entropy of a realization:
/// `sum_i J_i log(N V_d R_i^d / k) - L_{k-1} + gamma + log k`, where `R_i`
/// is the distance from atom `i` to its k-th neighbor among the other
/// `N - 1` atoms.
///
/// The atom count enters as `N` so that equal weights `1/N` reproduce
/// [`knn_kl_entropy`] on the atoms exactly.
///
/// Under [`TiePolicy::MergeDuplicates`] repeated atoms are first collapsed
/// into one atom carrying their total weight, and `N` counts distinct atoms.
/// This makes the value a function of the random measure alone, not of how
/// its atoms happen to be listed.
pub fn bnp_entropy(dpr: &DpRealization, k: usize, ties: TiePolicy) -> Result<f64> {
    let c = EstimatorConstants::new(dpr.dim(), k)?;
    let merged;
    let (atoms, weights) = match ties {
        TiePolicy::PositiveOnly => (dpr.atoms(), dpr.weights()),
        TiePolicy::MergeDuplicates => {
            let (unique, membership) = distinct_rows(dpr.atoms());
            let mut w = vec![0.0; unique.nrows()];
            for (g, wi) in membership.iter().zip(dpr.weights()) {
                w[*g] += wi;
            }
            merged = (unique, w);
            (&merged.0, merged.1.as_slice())
        }
    };
    check_size(dpr.n_atoms(), k)?;
    let n = atoms.nrows();
    if n < k + 1 {
        return Err(Error::DegenerateSupport { index: 0, k });
    }
    let r = knn_distances(atoms, k)?;
    let offset = c.unit_ball_log_volume + (n as f64).ln() - (k as f64).ln();
    let d = c.d as f64;
    let weighted: f64 = weights
        .iter()
        .zip(&r)
        .map(|(w, ri)| w * (d * ri.ln() + offset))
        .sum();
    Ok(weighted - c.digamma_offset() + c.euler_gamma + (k as f64).ln())
}

/// [`bnp_entropy`] of a prior realization.
pub fn bnp_prior_entropy(dpr: &DpRealization, k: usize, ties: TiePolicy) -> Result<f64> {
    if dpr.provenance() != Provenance::Prior {
        return Err(Error::Precondition("expected a prior realization".into()));
    }
    bnp_entropy(dpr, k, ties)
}

/// [`bnp_entropy`] of a posterior realization.
pub fn bnp_posterior_entropy(dpr: &DpRealization, k: usize, ties: TiePolicy) -> Result<f64> {
    if dpr.provenance() != Provenance::Posterior {
        return Err(Error::Precondition("expected a posterior realization".into()));
    }
    bnp_entropy(dpr, k, ties)
}

/// Entropy of a location/scale multivariate t with `r` degrees of freedom
/// and scale-matrix log-determinant `log_det`.
fn t_entropy(r: f64, d: usize, log_det: f64) -> f64 {
    let df = d as f64;
    let h = (r + df) / 2.0;
    -(ln_gamma(h) - ln_gamma(r / 2.0) - df / 2.0 * (r * PI).ln()) + 0.5 * log_det
        + h * (digamma(h) - digamma(r / 2.0))
}

/// Entropy of a univariate Maxwell-Boltzmann law with scale `a`.
fn maxwell_entropy(a: f64) -> f64 {
    (a * (2.0 * PI).sqrt()).ln() + EULER_GAMMA - 0.5
}

/// Closed-form differential entropy.
pub fn true_entropy(spec: &DistributionSpec) -> Result<f64> {
    match spec {
        DistributionSpec::MvNormal(g) => {
            let d = g.dim() as f64;
            Ok(0.5 * (d * (2.0 * PI * std::f64::consts::E).ln() + g.log_det()))
        }
        DistributionSpec::MvT { dof, scale } => Ok(t_entropy(*dof, scale.dim(), scale.log_det())),
        DistributionSpec::MaxwellProduct { scale, dim } => Ok(*dim as f64 * maxwell_entropy(*scale)),
        DistributionSpec::UniformProduct { low, high, dim } => Ok(*dim as f64 * (high - low).ln()),
        // a symmetric sign times a lognormal radius
        DistributionSpec::SphericalLognormal { dim: 1, log_sd } => {
            Ok(0.5 * (2.0 * PI * std::f64::consts::E * log_sd * log_sd).ln() + 2f64.ln())
        }
        other => Err(Error::Unsupported(format!("closed-form entropy of {other}"))),
    }
}

/// Entropy of the i-th marginal where a closed form is known.
pub(crate) fn true_marginal_entropy(spec: &DistributionSpec, i: usize) -> Result<f64> {
    let d = spec.dim();
    if i >= d {
        return Err(Error::IndexError { index: i, dim: d });
    }
    match spec {
        DistributionSpec::MvNormal(g) => {
            Ok(0.5 * (2.0 * PI * std::f64::consts::E * g.cov_entry(i, i)).ln())
        }
        DistributionSpec::MvT { dof, scale } => {
            let r = *dof;
            let standard = (r + 1.0) / 2.0 * (digamma((1.0 + r) / 2.0) - digamma(r / 2.0))
                + (r.sqrt().ln() + ln_beta(r / 2.0, 0.5));
            Ok(standard + 0.5 * scale.cov_entry(i, i).ln())
        }
        DistributionSpec::MaxwellProduct { scale, .. } => Ok(maxwell_entropy(*scale)),
        DistributionSpec::UniformProduct { low, high, .. } => Ok((high - low).ln()),
        DistributionSpec::Ubd(UbdVariant::FourClouds) => Err(Error::Unsupported(
            "closed-form entropy of a normal location mixture".into(),
        )),
        other => Err(Error::Unsupported(format!("closed-form marginal entropy of {other}"))),
    }
}
