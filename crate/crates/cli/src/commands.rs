//! The four subcommands as library calls.

use std::time::Instant;

use rayon::prelude::*;

use bnpmi_core::knn::TiePolicy;
use bnpmi_core::mi::{mi_draws, mi_point_estimate, true_mi, MarginalMode, MiConfig, MiDraws};
use bnpmi_core::rbtest::{elicit_a, run_independence_test, ElicitConfig, RbConfig};
use bnpmi_core::sampling::{DistributionSpec, RngStream};
use bnpmi_core::SampleMatrix;

use crate::config::{DataSource, RunConfig, SimulateGrid};
use crate::data::load_csv;
use crate::error::{CliError, CliResult};
use crate::report::{
    ConfigEcho, DrawSummary, ElicitReport, EstimateReport, ProfilePoint, SimRow, TestReport,
};

// Stream ids under the user seed.
const DATA_STREAM: u64 = 1;
const DRAW_STREAM: u64 = 2;
const ELICIT_STREAM: u64 = 3;
const SIMULATE_STREAM: u64 = 4;

fn marginals_name(m: MarginalMode) -> &'static str {
    match m {
        MarginalMode::Coupled => "coupled",
        MarginalMode::Independent => "independent",
    }
}

fn ties_name(t: TiePolicy) -> &'static str {
    match t {
        TiePolicy::PositiveOnly => "positive-only",
        TiePolicy::MergeDuplicates => "merge-duplicates",
    }
}

fn load(source: &DataSource, cfg: &RunConfig) -> CliResult<(SampleMatrix, String)> {
    let (data, label) = match source {
        DataSource::File {
            path,
            has_header,
            columns,
        } => (
            load_csv(path, *has_header, columns.as_deref())?,
            path.display().to_string(),
        ),
        DataSource::Simulated { spec, n } => {
            let mut rng = RngStream::new(cfg.seed, DATA_STREAM).rng();
            (spec.sample(*n, &mut rng)?, spec.to_string())
        }
    };
    if data.ncols() < 2 {
        return Err(CliError::Input(format!(
            "need at least two columns, got {}",
            data.ncols()
        )));
    }
    let data = if cfg.standardize { data.standardized() } else { data };
    Ok((data, label))
}

fn mi_config(cfg: &RunConfig, d: usize, a: f64) -> CliResult<MiConfig> {
    Ok(MiConfig::posterior(d)?
        .with_a(a)
        .with_k(cfg.k)
        .with_atoms(cfg.n_atoms)
        .with_draws(cfg.draws)
        .with_marginals(cfg.marginals)
        .with_ties(cfg.ties))
}

fn echo(cfg: &RunConfig, label: String, data: &SampleMatrix, a: f64, c: Option<f64>) -> ConfigEcho {
    ConfigEcho {
        source: label,
        n: data.nrows(),
        d: data.ncols(),
        k: cfg.k,
        a,
        c,
        n_atoms: cfg.n_atoms,
        draws: cfg.draws,
        seed: cfg.seed,
        standardize: cfg.standardize,
        marginals: marginals_name(cfg.marginals),
        ties: ties_name(cfg.ties),
    }
}

/// Runs `f` on a pool of `workers` threads, or on the global pool.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> CliResult<T> {
    match workers {
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w.max(1))
                .build()
                .map_err(|e| CliError::Input(format!("cannot start {w} workers: {e}")))?;
            Ok(pool.install(f))
        }
        None => Ok(f()),
    }
}

pub fn cmd_estimate(cfg: &RunConfig, source: &DataSource) -> CliResult<EstimateReport> {
    let start = Instant::now();
    let (data, label) = load(source, cfg)?;
    let a = cfg.a.unwrap_or(bnpmi_core::mi::DEFAULT_ESTIMATION_A);
    let mi = mi_config(cfg, data.ncols(), a)?;
    let stream = RngStream::new(cfg.seed, DRAW_STREAM);
    let draws = with_workers(cfg.workers, || mi_draws(&mi, Some(&data), &stream))??;
    let est = mi_point_estimate(draws)?;
    Ok(EstimateReport {
        command: "estimate",
        point: est.point,
        q1: est.q1,
        q3: est.q3,
        posterior: DrawSummary::of(&est.draws),
        config: echo(cfg, label, &data, a, None),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

fn rb_config(cfg: &RunConfig, a: f64) -> RbConfig {
    RbConfig {
        c: cfg.c,
        a,
        draws: cfg.draws,
        m: cfg.m,
        i0: cfg.i0,
    }
}

pub fn cmd_test(cfg: &RunConfig, source: &DataSource) -> CliResult<TestReport> {
    let start = Instant::now();
    let (data, label) = load(source, cfg)?;
    let a = cfg.a.unwrap_or(bnpmi_core::rbtest::DEFAULT_TEST_A);
    let rb = rb_config(cfg, a);
    let stream = RngStream::new(cfg.seed, DRAW_STREAM);
    let res = with_workers(cfg.workers, || {
        run_independence_test(&data, &rb, cfg.k, cfg.n_atoms, &stream)
    })??;
    Ok(TestReport {
        command: "test",
        rb: res.rb,
        strength: res.strength,
        verdict: res.verdict,
        prior: DrawSummary::of(&res.prior_draws),
        posterior: DrawSummary::of(&res.posterior_draws),
        config: echo(cfg, label, &data, a, Some(cfg.c)),
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

pub fn cmd_elicit(cfg: &RunConfig, ecfg: &ElicitConfig) -> CliResult<ElicitReport> {
    let start = Instant::now();
    let stream = RngStream::new(cfg.seed, ELICIT_STREAM);
    let e = with_workers(cfg.workers, || elicit_a(ecfg, &stream))??;
    Ok(ElicitReport {
        command: "elicit",
        c: ecfg.c,
        d: ecfg.d,
        chosen_a: e.a,
        probability: e.probability,
        profile: e
            .profile
            .iter()
            .map(|&(a, probability)| ProfilePoint { a, probability })
            .collect(),
        draws: ecfg.draws,
        k: ecfg.k,
        n_atoms: ecfg.n_atoms,
        seed: cfg.seed,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

struct RepOutcome {
    point: f64,
    test: Option<(f64, f64)>,
    invalid: usize,
}

fn invalid_count(d: &MiDraws) -> usize {
    d.values.iter().filter(|v| !(v.is_finite() && **v >= 0.0)).count()
}

fn replicate(
    cfg: &RunConfig,
    grid: &SimulateGrid,
    spec: &DistributionSpec,
    n: usize,
    k: usize,
    rep: &RngStream,
) -> CliResult<RepOutcome> {
    let d = spec.dim();
    let mut x = spec.sample(n, &mut rep.substream(0).rng())?;
    if cfg.standardize {
        x = x.standardized();
    }
    let run = RunConfig { k, ..cfg.clone() };
    let est_cfg = mi_config(&run, d, cfg.a.unwrap_or(bnpmi_core::mi::DEFAULT_ESTIMATION_A))?;
    let draws = mi_draws(&est_cfg, Some(&x), &rep.substream(1))?;
    let mut invalid = invalid_count(&draws);
    let point = mi_point_estimate(draws)?.point;
    let test = if grid.with_test {
        let rb = rb_config(cfg, grid.test_a);
        let res = run_independence_test(&x, &rb, k, cfg.n_atoms, &rep.substream(2))?;
        invalid += invalid_count(&res.prior_draws) + invalid_count(&res.posterior_draws);
        Some((res.rb, res.strength))
    } else {
        None
    };
    Ok(RepOutcome {
        point,
        test,
        invalid,
    })
}

/// Runs every (distribution, n, k) cell of `grid` for `cfg.reps`
/// replications and hands each finished row to `on_row` before starting the
/// next cell.
///
/// Replication `r` of distribution `i` at sample size `n` draws from stream
/// `(i, n, r)` whatever the worker count, and the same data are reused
/// across the k values of a sweep.
pub fn cmd_simulate(
    cfg: &RunConfig,
    grid: &SimulateGrid,
    mut on_row: impl FnMut(&SimRow) -> CliResult<()>,
) -> CliResult<Vec<SimRow>> {
    if cfg.reps == 0 {
        return Err(CliError::Input("need at least one replication".into()));
    }
    let root = RngStream::new(cfg.seed, SIMULATE_STREAM);
    let mut rows = Vec::new();
    for (i, spec) in grid.distributions.iter().enumerate() {
        if spec.dim() < 2 {
            return Err(CliError::Input(format!("{spec} has dimension 1")));
        }
        let truth = true_mi(spec).ok();
        for &n in &grid.ns {
            let cell = root.substream(i as u64).substream(n as u64);
            for &k in &grid.ks {
                let outcomes = with_workers(cfg.workers, || {
                    (0..cfg.reps)
                        .into_par_iter()
                        .map(|r| replicate(cfg, grid, spec, n, k, &cell.substream(r as u64)))
                        .collect::<CliResult<Vec<_>>>()
                })??;
                let reps = outcomes.len() as f64;
                let mi_mean = outcomes.iter().map(|o| o.point).sum::<f64>() / reps;
                let mse = truth.map(|t| outcomes.iter().map(|o| (o.point - t).powi(2)).sum::<f64>() / reps);
                let tests: Option<Vec<(f64, f64)>> = outcomes.iter().map(|o| o.test).collect();
                let row = SimRow {
                    distribution: spec.to_string(),
                    n,
                    k,
                    reps: outcomes.len(),
                    true_mi: truth,
                    mi_mean,
                    mse,
                    rb_mean: tests.as_ref().map(|t| t.iter().map(|x| x.0).sum::<f64>() / reps),
                    str_mean: tests.as_ref().map(|t| t.iter().map(|x| x.1).sum::<f64>() / reps),
                    rb_below_one: tests.as_ref().map(|t| t.iter().filter(|x| x.0 < 1.0).count()),
                    invalid_draws: outcomes.iter().map(|o| o.invalid).sum(),
                };
                on_row(&row)?;
                rows.push(row);
            }
        }
    }
    Ok(rows)
}
