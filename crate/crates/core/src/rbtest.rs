//! Relative-belief test of mutual independence.
//!
//! The hypothesis `MI = 0` is replaced by the window `MI in [0, c)`. The
//! relative belief ratio compares posterior to prior mass in that window;
//! its strength is the posterior mass of the MI values whose (binned)
//! relative belief is no larger than the observed one.

use serde::{Deserialize, Serialize};

use crate::dp::{Provenance, DEFAULT_ATOMS};
use crate::knn::TiePolicy;
use crate::mi::{mi_draws, MiConfig, MiDraws, DEFAULT_DRAWS, DEFAULT_K};
use crate::sampling::{DistributionSpec, RngStream};
use crate::stats::{quantile_sorted, sorted_copy, EmpiricalCdf};
use crate::{Error, Result, SampleMatrix};

pub const DEFAULT_C: f64 = 0.05;
pub const DEFAULT_TEST_A: f64 = 1.0;
pub const DEFAULT_GRID: [f64; 7] = [0.05, 0.25, 0.5, 1.0, 2.0, 5.0, 10.0];

#[derive(Debug, Clone, PartialEq)]
pub struct RbConfig {
    /// Width of the window `[0, c)`.
    pub c: f64,
    /// Concentration of the prior process.
    pub a: f64,
    /// Draws per side.
    pub draws: usize,
    /// Number of prior-quantile cells for the strength.
    pub m: usize,
    /// First cell counted by the strength.
    pub i0: usize,
}

impl Default for RbConfig {
    fn default() -> Self {
        RbConfig {
            c: DEFAULT_C,
            a: DEFAULT_TEST_A,
            draws: DEFAULT_DRAWS,
            m: 20,
            i0: 1,
        }
    }
}

impl RbConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.c > 0.0 && self.c.is_finite()) {
            return Err(Error::InvalidParameter(format!("window width c = {} must be positive", self.c)));
        }
        if !(self.a > 0.0 && self.a.is_finite()) {
            return Err(Error::InvalidParameter(format!("concentration a = {} must be positive", self.a)));
        }
        if self.i0 < 1 || self.i0 >= self.m {
            return Err(Error::InvalidParameter(format!(
                "need 1 <= i0 < M, got i0 = {} and M = {}",
                self.i0, self.m
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    EvidenceFor,
    EvidenceAgainst,
    Neutral,
}

impl Verdict {
    pub fn from_rb(rb: f64) -> Self {
        if rb > 1.0 {
            Verdict::EvidenceFor
        } else if rb < 1.0 {
            Verdict::EvidenceAgainst
        } else {
            Verdict::Neutral
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RbTestResult {
    pub rb: f64,
    pub strength: f64,
    pub verdict: Verdict,
    pub prior_draws: MiDraws,
    pub posterior_draws: MiDraws,
}

/// Settings for choosing the prior concentration.
#[derive(Debug, Clone, PartialEq)]
pub struct ElicitConfig {
    pub c: f64,
    pub d: usize,
    /// Candidate concentrations, tried in increasing order.
    pub grid: Vec<f64>,
    /// Largest accepted distance between the window probability and 0.5.
    pub tolerance: f64,
    /// Prior draws per candidate.
    pub draws: usize,
    pub k: usize,
    pub n_atoms: usize,
    /// Geometric bisection steps between the grid values bracketing 0.5.
    pub refine_steps: usize,
}

impl ElicitConfig {
    pub fn new(c: f64, d: usize) -> Self {
        ElicitConfig {
            c,
            d,
            grid: DEFAULT_GRID.to_vec(),
            tolerance: 0.1,
            draws: 1000,
            k: DEFAULT_K,
            n_atoms: DEFAULT_ATOMS,
            refine_steps: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Elicitation {
    pub a: f64,
    pub probability: f64,
    /// `(a, Pr(MI in [0, c)))` for every candidate evaluated.
    pub profile: Vec<(f64, f64)>,
}

fn window_fraction(values: &[f64], c: f64) -> f64 {
    values.iter().filter(|v| **v >= 0.0 && **v < c).count() as f64 / values.len() as f64
}

/// Monte-Carlo estimate of `Pr(MI_pri in [0, c))` under `DP(a, N(0, I_d))`.
pub fn prior_window_probability(cfg: &ElicitConfig, a: f64, stream: &RngStream) -> Result<f64> {
    let mi = MiConfig::prior(cfg.d, a)?
        .with_k(cfg.k)
        .with_atoms(cfg.n_atoms)
        .with_draws(cfg.draws);
    Ok(window_fraction(&mi_draws(&mi, None, stream)?.values, cfg.c))
}

/// Picks the concentration whose prior window probability is nearest 0.5.
///
/// Every candidate shares the same random stream, which keeps the profile
/// close to monotone in `a`.
pub fn elicit_a(cfg: &ElicitConfig, stream: &RngStream) -> Result<Elicitation> {
    if !(cfg.c > 0.0) {
        return Err(Error::InvalidParameter(format!("window width c = {} must be positive", cfg.c)));
    }
    if cfg.grid.is_empty() {
        return Err(Error::ElicitationFailed { profile: Vec::new() });
    }
    let mut grid = cfg.grid.clone();
    grid.sort_by(f64::total_cmp);
    let mut profile = Vec::with_capacity(grid.len() + cfg.refine_steps);
    for &a in &grid {
        profile.push((a, prior_window_probability(cfg, a, stream)?));
    }

    if cfg.refine_steps > 0 {
        let bracket = profile
            .windows(2)
            .find(|w| (w[0].1 - 0.5) * (w[1].1 - 0.5) <= 0.0)
            .map(|w| (w[0], w[1]));
        if let Some((mut lo, mut hi)) = bracket {
            for _ in 0..cfg.refine_steps {
                let a = (lo.0 * hi.0).sqrt();
                let p = prior_window_probability(cfg, a, stream)?;
                profile.push((a, p));
                if (p - 0.5) * (lo.1 - 0.5) <= 0.0 {
                    hi = (a, p);
                } else {
                    lo = (a, p);
                }
            }
        }
    }

    let best = profile
        .iter()
        .copied()
        .min_by(|x, y| (x.1 - 0.5).abs().total_cmp(&(y.1 - 0.5).abs()))
        .expect("profile is nonempty");
    if (best.1 - 0.5).abs() > cfg.tolerance {
        return Err(Error::ElicitationFailed { profile });
    }
    Ok(Elicitation {
        a: best.0,
        probability: best.1,
        profile,
    })
}

/// `(posterior fraction in [0, c)) / (prior fraction in [0, c))`.
pub fn rb_estimate(prior: &MiDraws, posterior: &MiDraws, c: f64) -> Result<f64> {
    if prior.is_empty() || posterior.is_empty() {
        return Err(Error::InsufficientDraws { needed: 1, got: 0 });
    }
    let p = window_fraction(&prior.values, c);
    if p == 0.0 {
        return Err(Error::ZeroPriorMass { c });
    }
    Ok(window_fraction(&posterior.values, c) / p)
}

/// Posterior mass of the prior-quantile cells `i0..M` whose binned relative
/// belief `M (F_pos(d_(i+1)/M) - F_pos(d_i/M))` is at most `rb0`.
///
/// Returns 0 when no cell qualifies.
pub fn strength_estimate(prior: &MiDraws, posterior: &MiDraws, rb0: f64, cfg: &RbConfig) -> Result<f64> {
    cfg.validate()?;
    if !(rb0 >= 0.0) {
        return Err(Error::InvalidParameter(format!("rb0 = {rb0} must be nonnegative")));
    }
    if prior.len() < cfg.m + 1 {
        return Err(Error::InsufficientDraws {
            needed: cfg.m + 1,
            got: prior.len(),
        });
    }
    let sorted = sorted_copy(&prior.values);
    if sorted[0] == sorted[sorted.len() - 1] {
        return Err(Error::DegeneratePrior);
    }
    let post = EmpiricalCdf::new(&posterior.values)?;
    let m = cfg.m as f64;
    let edges: Vec<f64> = (0..=cfg.m).map(|i| quantile_sorted(&sorted, i as f64 / m)).collect();
    let mut strength = 0.0;
    for i in cfg.i0..cfg.m {
        let mass = post.cdf(edges[i + 1]) - post.cdf(edges[i]);
        if m * mass <= rb0 {
            strength += mass;
        }
    }
    Ok(strength.clamp(0.0, 1.0))
}

/// Prior draws, posterior draws, relative belief and its strength for
/// `data` under `DP(a, N(0, I_d))`.
pub fn run_independence_test(
    data: &SampleMatrix,
    cfg: &RbConfig,
    k: usize,
    n_atoms: usize,
    stream: &RngStream,
) -> Result<RbTestResult> {
    cfg.validate()?;
    let d = data.ncols();
    if data.nrows() < 2 || d < 2 {
        return Err(Error::Precondition(format!(
            "need n >= 2 and d >= 2, got n = {} and d = {d}",
            data.nrows()
        )));
    }
    let base = MiConfig {
        provenance: Provenance::Prior,
        a: cfg.a,
        n_atoms,
        k,
        draws: cfg.draws,
        base: DistributionSpec::standard_normal(d)?,
        marginals: Default::default(),
        ties: TiePolicy::MergeDuplicates,
    };
    let post_cfg = MiConfig {
        provenance: Provenance::Posterior,
        ..base.clone()
    };
    let (prior, posterior) = rayon::join(
        || mi_draws(&base, None, &stream.substream(0)),
        || mi_draws(&post_cfg, Some(data), &stream.substream(1)),
    );
    let prior = prior.map_err(|e| e.at("prior draws"))?;
    let posterior = posterior.map_err(|e| e.at("posterior draws"))?;
    let rb = rb_estimate(&prior, &posterior, cfg.c).map_err(|e| e.at("relative belief"))?;
    let strength = strength_estimate(&prior, &posterior, rb, cfg).map_err(|e| e.at("strength"))?;
    Ok(RbTestResult {
        rb,
        strength,
        verdict: Verdict::from_rb(rb),
        prior_draws: prior,
        posterior_draws: posterior,
    })
}
