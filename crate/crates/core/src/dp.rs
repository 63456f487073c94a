//! Finite Dirichlet-process realizations.
//!
//! `DP(a, G)` is approximated by `P_N = sum_i J_i delta_{Y_i}` with
//! `(J_1..J_N) ~ Dirichlet(a/N, ..., a/N)` and `Y_i` i.i.d. from `G`. The
//! posterior given data `x_1..x_n` is `DP(a + n, G*)` with
//! `G* = a/(a+n) G + n/(a+n) F_n`.

use rand::{Rng, RngExt};
use rand_distr::{Distribution, Gamma};

use crate::sampling::DistributionSpec;
use crate::{Error, Result, SampleMatrix};

/// Default number of atoms in a realization.
pub const DEFAULT_ATOMS: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Provenance {
    Prior,
    Posterior,
}

/// Concentration, atom count and base measure of a prior process.
#[derive(Debug, Clone, PartialEq)]
pub struct DpParams {
    pub a: f64,
    pub n_atoms: usize,
    pub base: DistributionSpec,
}

impl DpParams {
    pub fn new(a: f64, n_atoms: usize, base: DistributionSpec) -> Result<Self> {
        check_concentration(a)?;
        check_atoms(n_atoms)?;
        Ok(DpParams { a, n_atoms, base })
    }
}

/// The posterior base measure `G*`: a mixture of the prior base `G` and the
/// empirical distribution of `data`.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorBase {
    a: f64,
    data: SampleMatrix,
    prior_base: DistributionSpec,
}

impl PosteriorBase {
    pub fn new(a: f64, data: SampleMatrix, prior_base: DistributionSpec) -> Result<Self> {
        check_concentration(a)?;
        if data.nrows() == 0 {
            return Err(Error::EmptyRequest);
        }
        if !data.is_finite() {
            return Err(Error::InvalidParameter("data must be finite".into()));
        }
        if data.ncols() != prior_base.dim() {
            return Err(Error::InvalidParameter(format!(
                "data has {} columns but the base measure has dimension {}",
                data.ncols(),
                prior_base.dim()
            )));
        }
        Ok(PosteriorBase {
            a,
            data,
            prior_base,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn data(&self) -> &SampleMatrix {
        &self.data
    }

    pub fn prior_base(&self) -> &DistributionSpec {
        &self.prior_base
    }

    pub fn n(&self) -> usize {
        self.data.nrows()
    }

    /// Posterior concentration `a + n`.
    pub fn concentration(&self) -> f64 {
        self.a + self.n() as f64
    }

    /// Probability that an atom is a fresh draw from the prior base.
    pub fn base_fraction(&self) -> f64 {
        self.a / self.concentration()
    }
}

/// Where an atom of [`sample_posterior_base`] came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomSource {
    Base,
    Data(usize),
}

#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorAtoms {
    pub atoms: SampleMatrix,
    pub sources: Vec<AtomSource>,
}

impl PosteriorAtoms {
    pub fn base_count(&self) -> usize {
        self.sources
            .iter()
            .filter(|s| matches!(s, AtomSource::Base))
            .count()
    }
}

/// One finite realization: weights on the simplex and their atoms.
#[derive(Debug, Clone, PartialEq)]
pub struct DpRealization {
    weights: Vec<f64>,
    atoms: SampleMatrix,
    provenance: Provenance,
}

impl DpRealization {
    pub fn new(weights: Vec<f64>, atoms: SampleMatrix, provenance: Provenance) -> Result<Self> {
        if weights.len() != atoms.nrows() {
            return Err(Error::InvalidParameter(format!(
                "{} weights for {} atoms",
                weights.len(),
                atoms.nrows()
            )));
        }
        check_atoms(weights.len())?;
        if weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::InvalidParameter("weights must be finite and nonnegative".into()));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidParameter(format!("weights sum to {total}, not 1")));
        }
        if !atoms.is_finite() {
            return Err(Error::InvalidParameter("atoms must be finite".into()));
        }
        Ok(DpRealization {
            weights,
            atoms,
            provenance,
        })
    }

    /// Equal weights `1/N` on the given atoms.
    pub fn uniform(atoms: SampleMatrix, provenance: Provenance) -> Result<Self> {
        let n = atoms.nrows();
        DpRealization::new(vec![1.0 / n as f64; n], atoms, provenance)
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn atoms(&self) -> &SampleMatrix {
        &self.atoms
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn n_atoms(&self) -> usize {
        self.weights.len()
    }

    pub fn dim(&self) -> usize {
        self.atoms.ncols()
    }

    /// `sum_i J_i g(Y_i)`.
    pub fn integrate(&self, g: impl Fn(&[f64]) -> f64) -> f64 {
        self.weights
            .iter()
            .zip(self.atoms.rows())
            .map(|(w, y)| w * g(y))
            .sum()
    }
}

fn check_concentration(a: f64) -> Result<()> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "concentration must be positive and finite, got {a}"
        )));
    }
    Ok(())
}

fn check_atoms(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "a realization needs at least 2 atoms, got {n}"
        )));
    }
    Ok(())
}

/// `log X` for `X ~ Gamma(shape, 1)`.
///
/// Below shape 1 this uses `X = Y U^(1/shape)` with `Y ~ Gamma(1 + shape)`,
/// kept in log space: at shapes like `1e-4` the power underflows to zero in
/// linear space for almost every draw.
fn log_gamma_variate<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> Result<f64> {
    let bad = |e| Error::InvalidParameter(format!("gamma({shape}, 1): {e}"));
    if shape >= 1.0 {
        let x: f64 = Gamma::new(shape, 1.0).map_err(bad)?.sample(rng);
        Ok(x.ln())
    } else {
        let y: f64 = Gamma::new(1.0 + shape, 1.0).map_err(bad)?.sample(rng);
        // (0, 1]
        let u = 1.0 - rng.random::<f64>();
        Ok(y.ln() + u.ln() / shape)
    }
}

/// Symmetric `Dirichlet(a/N, ..., a/N)` weights from normalized
/// `Gamma(a/N, 1)` variates.
pub fn dirichlet_weights<R: Rng + ?Sized>(a: f64, n: usize, rng: &mut R) -> Result<Vec<f64>> {
    check_concentration(a)?;
    check_atoms(n)?;
    let shape = a / n as f64;
    let logs = (0..n)
        .map(|_| log_gamma_variate(shape, rng))
        .collect::<Result<Vec<f64>>>()?;
    let top = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - top).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}

/// `n_atoms` i.i.d. draws from `G*`: each atom is, independently, a fresh
/// draw from the prior base with probability `a/(a+n)` and otherwise a data
/// row chosen uniformly with replacement.
pub fn sample_posterior_base<R: Rng + ?Sized>(
    pb: &PosteriorBase,
    n_atoms: usize,
    rng: &mut R,
) -> Result<PosteriorAtoms> {
    if n_atoms == 0 {
        return Err(Error::EmptyRequest);
    }
    let p = pb.base_fraction();
    let n = pb.n();
    let mut sources: Vec<AtomSource> = (0..n_atoms)
        .map(|_| {
            if rng.random::<f64>() < p {
                AtomSource::Base
            } else {
                AtomSource::Data(rng.random_range(0..n))
            }
        })
        .collect();
    let fresh = sources.iter().filter(|s| matches!(s, AtomSource::Base)).count();
    let fresh_rows = if fresh > 0 {
        Some(pb.prior_base.sample(fresh, rng)?)
    } else {
        None
    };
    let d = pb.data.ncols();
    let mut atoms = SampleMatrix::zeros(n_atoms, d);
    let mut next_fresh = 0;
    for (i, src) in sources.iter_mut().enumerate() {
        match *src {
            AtomSource::Data(j) => atoms.row_mut(i).copy_from_slice(pb.data.row(j)),
            AtomSource::Base => {
                let rows = fresh_rows.as_ref().expect("fresh rows drawn");
                atoms.row_mut(i).copy_from_slice(rows.row(next_fresh));
                next_fresh += 1;
            }
        }
    }
    Ok(PosteriorAtoms { atoms, sources })
}

/// A realization of `DP(a, G)`.
pub fn draw_prior_dp<R: Rng + ?Sized>(params: &DpParams, rng: &mut R) -> Result<DpRealization> {
    check_concentration(params.a)?;
    check_atoms(params.n_atoms)?;
    let weights = dirichlet_weights(params.a, params.n_atoms, rng)?;
    let atoms = params.base.sample(params.n_atoms, rng)?;
    Ok(DpRealization {
        weights,
        atoms,
        provenance: Provenance::Prior,
    })
}

/// A realization of `DP(a + n, G*)`.
pub fn draw_posterior_dp<R: Rng + ?Sized>(
    pb: &PosteriorBase,
    n_atoms: usize,
    rng: &mut R,
) -> Result<DpRealization> {
    check_atoms(n_atoms)?;
    let weights = dirichlet_weights(pb.concentration(), n_atoms, rng)?;
    let atoms = sample_posterior_base(pb, n_atoms, rng)?.atoms;
    Ok(DpRealization {
        weights,
        atoms,
        provenance: Provenance::Posterior,
    })
}

/// Projection of a realization onto one coordinate: same weights, atoms
/// reduced to column `coord`.
pub fn marginal_realization(dpr: &DpRealization, coord: usize) -> Result<DpRealization> {
    let column = dpr.atoms.column(coord)?;
    Ok(DpRealization {
        weights: dpr.weights.clone(),
        atoms: SampleMatrix::column_vector(column),
        provenance: dpr.provenance,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use crate::stats::{mean, variance};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::new(seed, 17).rng()
    }

    fn std_normal(d: usize) -> DistributionSpec {
        DistributionSpec::standard_normal(d).unwrap()
    }

    #[test]
    fn weights_on_simplex() {
        let mut r = rng(1);
        for (a, n) in [(1.0, 4), (0.05, 500), (1e-9, 1000), (51.0, 500), (1e6, 3)] {
            let w = dirichlet_weights(a, n, &mut r).unwrap();
            assert_eq!(w.len(), n);
            assert!(w.iter().all(|x| x.is_finite() && *x >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
        assert!(dirichlet_weights(1.0, 1, &mut r).is_err());
        assert!(dirichlet_weights(0.0, 4, &mut r).is_err());
    }

    #[test]
    fn weight_moments() {
        let mut r = rng(2);
        let draws: Vec<Vec<f64>> = (0..10_000)
            .map(|_| dirichlet_weights(1.0, 4, &mut r).unwrap())
            .collect();
        for j in 0..4 {
            let col: Vec<f64> = draws.iter().map(|w| w[j]).collect();
            assert!((mean(&col) - 0.25).abs() < 0.01);
        }
        // Var(J_1) = (N-1) / (N^2 (a+1)) = 0.125 at a = 1, N = 2
        let first: Vec<f64> = (0..10_000)
            .map(|_| dirichlet_weights(1.0, 2, &mut r).unwrap()[0])
            .collect();
        assert!((variance(&first) - 0.125).abs() < 0.01);
    }

    #[test]
    fn tiny_concentration_moments() {
        // shape a/N = 1e-4 lives entirely in the log-space branch
        let mut r = rng(3);
        let first: Vec<f64> = (0..20_000)
            .map(|_| dirichlet_weights(0.05, 500, &mut r).unwrap()[0])
            .collect();
        assert!((mean(&first) - 1.0 / 500.0).abs() < 1e-3);
    }

    #[test]
    fn posterior_base_fraction() {
        let data = std_normal(1).sample(1, &mut rng(4)).unwrap();
        let pb = PosteriorBase::new(1.0, data, std_normal(1)).unwrap();
        let atoms = sample_posterior_base(&pb, 100, &mut rng(5)).unwrap();
        let fresh = atoms.base_count() as f64;
        // Binomial(100, 1/2): mean 50, sd 5
        assert!((fresh - 50.0).abs() < 4.0 * 5.0);

        let data = SampleMatrix::column_vector(vec![0.0, 10.0]);
        let pb = PosteriorBase::new(1e-12, data, std_normal(1)).unwrap();
        let atoms = sample_posterior_base(&pb, 200, &mut rng(6)).unwrap();
        assert_eq!(atoms.base_count(), 0);
        assert!(atoms.atoms.as_slice().iter().all(|&x| x == 0.0 || x == 10.0));
    }

    #[test]
    fn posterior_base_small_a_count() {
        // a = 0.05, n = 50, N = 500: Binomial(500, 0.05 / 50.05), mean ~ 0.4995
        let data = std_normal(2).sample(50, &mut rng(7)).unwrap();
        let pb = PosteriorBase::new(0.05, data, std_normal(2)).unwrap();
        let mut r = rng(8);
        let counts: Vec<f64> = (0..200)
            .map(|_| sample_posterior_base(&pb, 500, &mut r).unwrap().base_count() as f64)
            .collect();
        let p: f64 = 0.05 / 50.05;
        let sd_of_mean = (500.0 * p * (1.0 - p) / 200.0).sqrt();
        assert!((mean(&counts) - 500.0 * p).abs() < 2.576 * sd_of_mean);
    }

    #[test]
    fn prior_realization_structure() {
        let params = DpParams::new(1.0, 10, std_normal(2)).unwrap();
        let dpr = draw_prior_dp(&params, &mut rng(9)).unwrap();
        assert_eq!(dpr.n_atoms(), 10);
        assert_eq!(dpr.dim(), 2);
        assert_eq!(dpr.provenance(), Provenance::Prior);
        assert!((dpr.weights().iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(DpParams::new(1.0, 1, std_normal(2)).is_err());
    }

    #[test]
    fn prior_mean_functional() {
        let params = DpParams::new(1.0, 500, std_normal(1)).unwrap();
        let mut r = rng(10);
        let means: Vec<f64> = (0..200)
            .map(|_| draw_prior_dp(&params, &mut r).unwrap().integrate(|y| y[0]))
            .collect();
        // Var(sum J_i Y_i) = Var(Y) / (a + 1) = 1/2, so the mean of 200 has sd 0.05
        assert!(mean(&means).abs() < 3.0 * 0.05);
    }

    #[test]
    fn posterior_mean_functional() {
        let data = std_normal(1)
            .translated(&[2.0])
            .unwrap()
            .sample(50, &mut rng(11))
            .unwrap();
        let data_mean = mean(data.as_slice());
        let pb = PosteriorBase::new(1.0, data, std_normal(1)).unwrap();
        let mut r = rng(12);
        let means: Vec<f64> = (0..200)
            .map(|_| draw_posterior_dp(&pb, 500, &mut r).unwrap().integrate(|y| y[0]))
            .collect();
        let target = 50.0 / 51.0 * data_mean;
        let se = (variance(&means) / 200.0).sqrt();
        assert!((mean(&means) - target).abs() < 2.0 * se + 1e-3, "{} vs {target}", mean(&means));
    }

    #[test]
    fn posterior_atoms_collapse_to_data() {
        let data = SampleMatrix::column_vector(vec![0.0, 10.0]);
        let pb = PosteriorBase::new(1e-12, data, std_normal(1)).unwrap();
        let dpr = draw_posterior_dp(&pb, 200, &mut rng(13)).unwrap();
        assert_eq!(dpr.provenance(), Provenance::Posterior);
        assert!(dpr.atoms().as_slice().iter().all(|&x| x == 0.0 || x == 10.0));
    }

    #[test]
    fn marginal_projection() {
        let params = DpParams::new(1.0, 20, std_normal(3)).unwrap();
        let dpr = draw_prior_dp(&params, &mut rng(14)).unwrap();
        let m = marginal_realization(&dpr, 0).unwrap();
        assert_eq!(m.weights(), dpr.weights());
        assert_eq!(m.atoms().as_slice(), dpr.atoms().column(0).unwrap().as_slice());
        let again = marginal_realization(&m, 0).unwrap();
        assert_eq!(again, m);
        assert_eq!(
            marginal_realization(&dpr, 3),
            Err(Error::IndexError { index: 3, dim: 3 })
        );
    }

    #[test]
    fn variance_shrinks_with_concentration() {
        let in_box = |y: &[f64]| if y.iter().all(|v| v.abs() < 0.5) { 1.0 } else { 0.0 };
        let spread = |a: f64| {
            let params = DpParams::new(a, 500, std_normal(2)).unwrap();
            let mut r = rng(15);
            let v: Vec<f64> = (0..300)
                .map(|_| draw_prior_dp(&params, &mut r).unwrap().integrate(in_box))
                .collect();
            variance(&v)
        };
        assert!(spread(100.0) < spread(1.0));
    }
}
