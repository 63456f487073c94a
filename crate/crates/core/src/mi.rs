//! Prior and posterior draws of mutual information and the midhinge point
//! estimate.
//!
//! One MI draw takes a process realization `P`, computes the weighted k-NN
//! entropy of `P` and of each of its coordinate projections, and returns
//! `[sum_i H(P_i) - H(P)]+`.

use rayon::prelude::*;

use crate::dp::{
    draw_posterior_dp, draw_prior_dp, marginal_realization, DpParams, DpRealization,
    PosteriorBase, Provenance, DEFAULT_ATOMS,
};
use crate::knn::TiePolicy;
use crate::entropy::{bnp_entropy, true_entropy, true_marginal_entropy};
use crate::sampling::{DistributionSpec, RngStream, UbdVariant};
use crate::stats::{quantile_sorted, sorted_copy};
use crate::{Error, Result, SampleMatrix};

pub const DEFAULT_K: usize = 3;
pub const DEFAULT_DRAWS: usize = 1000;
pub const DEFAULT_ESTIMATION_A: f64 = 0.05;
pub const RETRY_CAP: usize = 10;

/// How the marginal entropies of one draw relate to the joint one.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MarginalMode {
    /// Marginals are projections of the realization used for the joint.
    #[default]
    Coupled,
    /// Each marginal entropy uses its own fresh realization.
    Independent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiConfig {
    pub provenance: Provenance,
    /// Concentration of the prior process.
    pub a: f64,
    pub n_atoms: usize,
    pub k: usize,
    /// Number of draws `l`.
    pub draws: usize,
    /// Prior base measure `G`.
    pub base: DistributionSpec,
    pub marginals: MarginalMode,
    /// Treatment of repeated atoms in the entropy estimates.
    pub ties: TiePolicy,
}

impl MiConfig {
    /// Posterior defaults for `d`-dimensional data: `a = 0.05`, `N = 500`,
    /// `k = 3`, `l = 1000`, `G = N(0, I)`.
    pub fn posterior(d: usize) -> Result<Self> {
        Ok(MiConfig {
            provenance: Provenance::Posterior,
            a: DEFAULT_ESTIMATION_A,
            n_atoms: DEFAULT_ATOMS,
            k: DEFAULT_K,
            draws: DEFAULT_DRAWS,
            base: DistributionSpec::standard_normal(d)?,
            marginals: MarginalMode::Coupled,
            ties: TiePolicy::MergeDuplicates,
        })
    }

    pub fn prior(d: usize, a: f64) -> Result<Self> {
        Ok(MiConfig {
            provenance: Provenance::Prior,
            a,
            ..Self::posterior(d)?
        })
    }

    pub fn with_a(mut self, a: f64) -> Self {
        self.a = a;
        self
    }

    pub fn with_atoms(mut self, n_atoms: usize) -> Self {
        self.n_atoms = n_atoms;
        self
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn with_draws(mut self, draws: usize) -> Self {
        self.draws = draws;
        self
    }

    pub fn with_base(mut self, base: DistributionSpec) -> Self {
        self.base = base;
        self
    }

    pub fn with_ties(mut self, ties: TiePolicy) -> Self {
        self.ties = ties;
        self
    }

    pub fn with_marginals(mut self, marginals: MarginalMode) -> Self {
        self.marginals = marginals;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.draws == 0 {
            return Err(Error::InsufficientDraws { needed: 1, got: 0 });
        }
        if self.base.dim() < 2 {
            return Err(Error::Precondition(
                "mutual information needs dimension >= 2".into(),
            ));
        }
        if self.k == 0 {
            return Err(Error::InvalidParameter("k must be positive".into()));
        }
        if self.n_atoms < self.k + 1 {
            return Err(Error::Precondition(format!(
                "need N >= k + 1 atoms, got N = {} and k = {}",
                self.n_atoms, self.k
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiDraws {
    pub values: Vec<f64>,
    pub provenance: Provenance,
    pub config: MiConfig,
    /// Realizations discarded because of degenerate neighbor structure.
    pub retries: usize,
}

impl MiDraws {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MiEstimate {
    pub point: f64,
    pub q1: f64,
    pub q3: f64,
    pub draws: MiDraws,
}

/// `[sum_i H(P_i) - H(P)]+` on one realization.
pub fn mi_draw(dpr: &DpRealization, k: usize, ties: TiePolicy) -> Result<f64> {
    let d = dpr.dim();
    if d < 2 {
        return Err(Error::Precondition(
            "mutual information needs dimension >= 2".into(),
        ));
    }
    let joint = bnp_entropy(dpr, k, ties)?;
    let mut marginals = 0.0;
    for i in 0..d {
        marginals += bnp_entropy(&marginal_realization(dpr, i)?, k, ties)?;
    }
    Ok((marginals - joint).max(0.0))
}

enum Source {
    Prior(DpParams),
    Posterior(PosteriorBase),
}

impl Source {
    fn draw<R: rand::Rng + ?Sized>(&self, n_atoms: usize, rng: &mut R) -> Result<DpRealization> {
        match self {
            Source::Prior(p) => draw_prior_dp(p, rng),
            Source::Posterior(pb) => draw_posterior_dp(pb, n_atoms, rng),
        }
    }
}

fn independent_draw<R: rand::Rng + ?Sized>(
    source: &Source,
    cfg: &MiConfig,
    rng: &mut R,
) -> Result<f64> {
    let joint = bnp_entropy(&source.draw(cfg.n_atoms, rng)?, cfg.k, cfg.ties)?;
    let mut marginals = 0.0;
    for i in 0..cfg.base.dim() {
        let fresh = source.draw(cfg.n_atoms, rng)?;
        marginals += bnp_entropy(&marginal_realization(&fresh, i)?, cfg.k, cfg.ties)?;
    }
    Ok((marginals - joint).max(0.0))
}

/// `l` independent MI draws. Draw `i` uses `stream.substream(i)`, so the
/// result does not depend on the number of worker threads.
///
/// Posterior draws need `data`; prior draws must not receive any.
pub fn mi_draws(cfg: &MiConfig, data: Option<&SampleMatrix>, stream: &RngStream) -> Result<MiDraws> {
    cfg.validate()?;
    let source = match (cfg.provenance, data) {
        (Provenance::Prior, None) => Source::Prior(DpParams::new(cfg.a, cfg.n_atoms, cfg.base.clone())?),
        (Provenance::Posterior, Some(x)) => {
            Source::Posterior(PosteriorBase::new(cfg.a, x.clone(), cfg.base.clone())?)
        }
        (Provenance::Prior, Some(_)) => {
            return Err(Error::Precondition("prior draws take no data".into()))
        }
        (Provenance::Posterior, None) => {
            return Err(Error::Precondition("posterior draws need data".into()))
        }
    };

    let outcomes: Vec<Result<(f64, usize)>> = (0..cfg.draws)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream.substream(i as u64).rng();
            let mut last = None;
            for attempt in 0..=RETRY_CAP {
                let value = match cfg.marginals {
                    MarginalMode::Coupled => source
                        .draw(cfg.n_atoms, &mut rng)
                        .and_then(|dpr| mi_draw(&dpr, cfg.k, cfg.ties)),
                    MarginalMode::Independent => independent_draw(&source, cfg, &mut rng),
                };
                match value {
                    Ok(v) => return Ok((v, attempt)),
                    Err(e @ Error::DegenerateSupport { .. }) => last = Some(e),
                    Err(e) => return Err(e),
                }
            }
            Err(Error::Stage {
                stage: "degenerate realizations; increase N or a",
                source: Box::new(last.expect("at least one attempt")),
            })
        })
        .collect();

    let mut values = Vec::with_capacity(cfg.draws);
    let mut retries = 0;
    for outcome in outcomes {
        let (v, r) = outcome?;
        values.push(v);
        retries += r;
    }
    Ok(MiDraws {
        values,
        provenance: cfg.provenance,
        config: cfg.clone(),
        retries,
    })
}

/// Midhinge `(Q1 + Q3) / 2` of the draws.
pub fn mi_point_estimate(draws: MiDraws) -> Result<MiEstimate> {
    if draws.len() < 2 {
        return Err(Error::InsufficientDraws {
            needed: 2,
            got: draws.len(),
        });
    }
    let sorted = sorted_copy(&draws.values);
    let q1 = quantile_sorted(&sorted, 0.25);
    let q3 = quantile_sorted(&sorted, 0.75);
    Ok(MiEstimate {
        point: 0.5 * (q1 + q3),
        q1,
        q3,
        draws,
    })
}

/// Closed-form mutual information, `sum_i H(F_i) - H(F)`.
pub fn true_mi(spec: &DistributionSpec) -> Result<f64> {
    match spec {
        DistributionSpec::MaxwellProduct { .. }
        | DistributionSpec::UniformProduct { .. }
        | DistributionSpec::Ubd(UbdVariant::FourClouds) => Ok(0.0),
        DistributionSpec::MvNormal(_) | DistributionSpec::MvT { .. } => {
            let mut marginals = 0.0;
            for i in 0..spec.dim() {
                marginals += true_marginal_entropy(spec, i)?;
            }
            Ok((marginals - true_entropy(spec)?).max(0.0))
        }
        other => Err(Error::Unsupported(format!("closed-form mutual information of {other}"))),
    }
}
