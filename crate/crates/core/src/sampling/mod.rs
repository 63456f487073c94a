//! Seeded random-variate generation for base measures and test distributions.
//!
//! Every generator takes a caller-owned RNG; reproducibility comes from
//! building that RNG from an [`RngStream`].

mod rng;
pub mod table;
mod ubd;

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{ChiSquared, Distribution, LogNormal, StandardNormal, Uniform};

use crate::{Error, Result, SampleMatrix};

pub use rng::RngStream;
pub use ubd::{sample_ubd, UbdVariant};

/// Kinds of distribution the generators understand.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    MvNormal,
    MvT,
    MaxwellProduct,
    SphericalLognormal,
    UniformProduct,
    Ubd,
}

/// Location vector plus a validated symmetric positive definite matrix and
/// its lower Cholesky factor.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: Vec<f64>,
    cov: Vec<f64>,
    chol: Vec<f64>,
}

impl Gaussian {
    /// `cov` is row-major `d x d` with `d = mean.len()`.
    pub fn new(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 {
            return Err(Error::InvalidParameter("dimension must be at least 1".into()));
        }
        if cov.len() != d * d {
            return Err(Error::InvalidParameter(format!(
                "covariance has {} entries, expected {}",
                cov.len(),
                d * d
            )));
        }
        if mean.iter().chain(&cov).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite mean or covariance".into()));
        }
        for a in 0..d {
            for b in 0..a {
                let (x, y) = (cov[a * d + b], cov[b * d + a]);
                if (x - y).abs() > 1e-12 * (1.0 + x.abs().max(y.abs())) {
                    return Err(Error::CholeskyFailure);
                }
            }
        }
        let l = DMatrix::from_row_slice(d, d, &cov)
            .cholesky()
            .ok_or(Error::CholeskyFailure)?
            .unpack();
        let mut chol = vec![0.0; d * d];
        for a in 0..d {
            for b in 0..=a {
                chol[a * d + b] = l[(a, b)];
            }
        }
        if chol.iter().any(|x| !x.is_finite()) || (0..d).any(|a| chol[a * d + a] <= 0.0) {
            return Err(Error::CholeskyFailure);
        }
        Ok(Gaussian { mean, cov, chol })
    }

    pub fn standard(d: usize) -> Result<Self> {
        Gaussian::new(vec![0.0; d], table::identity(d))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &[f64] {
        &self.mean
    }

    pub fn cov(&self) -> &[f64] {
        &self.cov
    }

    pub fn cov_entry(&self, a: usize, b: usize) -> f64 {
        self.cov[a * self.dim() + b]
    }

    /// `log det` of the matrix, from the Cholesky diagonal.
    pub fn log_det(&self) -> f64 {
        let d = self.dim();
        2.0 * (0..d).map(|a| self.chol[a * d + a].ln()).sum::<f64>()
    }

    /// Writes `L z` (without the mean) into `out`, `z` i.i.d. standard normal.
    fn correlated_normal<R: Rng + ?Sized>(&self, rng: &mut R, z: &mut [f64], out: &mut [f64]) {
        let d = self.dim();
        for zi in z.iter_mut() {
            *zi = StandardNormal.sample(rng);
        }
        for a in 0..d {
            out[a] = (0..=a).map(|b| self.chol[a * d + b] * z[b]).sum();
        }
    }
}

/// A distribution to draw samples or base-measure atoms from.
#[derive(Debug, Clone, PartialEq)]
pub enum DistributionSpec {
    MvNormal(Gaussian),
    /// Location/scale multivariate t with `dof` degrees of freedom; the
    /// matrix of `scale` is a scale matrix, not the covariance.
    MvT { dof: f64, scale: Gaussian },
    /// Product of `dim` independent Maxwell-Boltzmann(`scale`) coordinates.
    MaxwellProduct { scale: f64, dim: usize },
    /// Uniform direction times a lognormal radius with log-sd `log_sd`.
    SphericalLognormal { dim: usize, log_sd: f64 },
    /// Product of `dim` independent U(`low`, `high`) coordinates.
    UniformProduct { low: f64, high: f64, dim: usize },
    Ubd(UbdVariant),
}

impl DistributionSpec {
    pub fn mv_normal(mean: Vec<f64>, cov: Vec<f64>) -> Result<Self> {
        Ok(DistributionSpec::MvNormal(Gaussian::new(mean, cov)?))
    }

    /// `N(0_d, I_d)`, the default base measure.
    pub fn standard_normal(d: usize) -> Result<Self> {
        Ok(DistributionSpec::MvNormal(Gaussian::standard(d)?))
    }

    pub fn mv_t(dof: f64, location: Vec<f64>, scale: Vec<f64>) -> Result<Self> {
        if !(dof > 0.0 && dof.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "degrees of freedom must be positive, got {dof}"
            )));
        }
        Ok(DistributionSpec::MvT {
            dof,
            scale: Gaussian::new(location, scale)?,
        })
    }

    pub fn maxwell_product(scale: f64, dim: usize) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "Maxwell scale must be positive, got {scale}"
            )));
        }
        check_dim(dim)?;
        Ok(DistributionSpec::MaxwellProduct { scale, dim })
    }

    pub fn spherical_lognormal(dim: usize, log_sd: f64) -> Result<Self> {
        check_dim(dim)?;
        if !(log_sd > 0.0 && log_sd.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "lognormal log-sd must be positive, got {log_sd}"
            )));
        }
        Ok(DistributionSpec::SphericalLognormal { dim, log_sd })
    }

    pub fn uniform_product(low: f64, high: f64, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if !(low < high && low.is_finite() && high.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "uniform bounds must satisfy low < high, got ({low}, {high})"
            )));
        }
        Ok(DistributionSpec::UniformProduct { low, high, dim })
    }

    pub fn kind(&self) -> DistributionKind {
        match self {
            DistributionSpec::MvNormal(_) => DistributionKind::MvNormal,
            DistributionSpec::MvT { .. } => DistributionKind::MvT,
            DistributionSpec::MaxwellProduct { .. } => DistributionKind::MaxwellProduct,
            DistributionSpec::SphericalLognormal { .. } => DistributionKind::SphericalLognormal,
            DistributionSpec::UniformProduct { .. } => DistributionKind::UniformProduct,
            DistributionSpec::Ubd(_) => DistributionKind::Ubd,
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            DistributionSpec::MvNormal(g) => g.dim(),
            DistributionSpec::MvT { scale, .. } => scale.dim(),
            DistributionSpec::MaxwellProduct { dim, .. }
            | DistributionSpec::SphericalLognormal { dim, .. }
            | DistributionSpec::UniformProduct { dim, .. } => *dim,
            DistributionSpec::Ubd(_) => 2,
        }
    }

    /// Same distribution moved by `shift` (only location families support it).
    pub fn translated(&self, shift: &[f64]) -> Result<Self> {
        if shift.len() != self.dim() {
            return Err(Error::InvalidParameter("shift dimension mismatch".into()));
        }
        let moved = |g: &Gaussian| {
            let mean = g.mean.iter().zip(shift).map(|(m, s)| m + s).collect();
            Gaussian::new(mean, g.cov.clone())
        };
        match self {
            DistributionSpec::MvNormal(g) => Ok(DistributionSpec::MvNormal(moved(g)?)),
            DistributionSpec::MvT { dof, scale } => Ok(DistributionSpec::MvT {
                dof: *dof,
                scale: moved(scale)?,
            }),
            other => Err(Error::Unsupported(format!("translation of {other}"))),
        }
    }

    /// `n` independent rows.
    pub fn sample<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<SampleMatrix> {
        match self {
            DistributionSpec::MvNormal(_) => sample_mv_normal(self, n, rng),
            DistributionSpec::MvT { .. } => sample_mv_t(self, n, rng),
            DistributionSpec::MaxwellProduct { scale, dim } => {
                sample_maxwell_product(*scale, *dim, n, rng)
            }
            DistributionSpec::SphericalLognormal { dim, log_sd } => {
                sample_spherical(*dim, *log_sd, n, rng)
            }
            DistributionSpec::UniformProduct { low, high, dim } => {
                sample_uniform_product(*low, *high, *dim, n, rng)
            }
            DistributionSpec::Ubd(v) => sample_ubd(*v, n, rng),
        }
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return Err(Error::InvalidParameter("dimension must be at least 1".into()));
    }
    Ok(())
}

fn check_rows(n: usize) -> Result<()> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    Ok(())
}

/// Rows `mean + L z` with `L` the lower Cholesky factor of the covariance.
pub fn sample_mv_normal<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let DistributionSpec::MvNormal(g) = spec else {
        return Err(Error::InvalidParameter(format!("{spec} is not a normal distribution")));
    };
    check_rows(n)?;
    let d = g.dim();
    let mut out = SampleMatrix::zeros(n, d);
    let mut z = vec![0.0; d];
    for i in 0..n {
        let row = out.row_mut(i);
        g.correlated_normal(rng, &mut z, row);
        row.iter_mut().zip(&g.mean).for_each(|(x, m)| *x += m);
    }
    Ok(out)
}

/// Rows `location + z / sqrt(w / r)`, `z ~ N(0, scale)`, `w ~ chi2(r)`.
pub fn sample_mv_t<R: Rng + ?Sized>(
    spec: &DistributionSpec,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    let DistributionSpec::MvT { dof, scale } = spec else {
        return Err(Error::InvalidParameter(format!("{spec} is not a t distribution")));
    };
    if !(*dof > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "degrees of freedom must be positive, got {dof}"
        )));
    }
    check_rows(n)?;
    let chi = ChiSquared::new(*dof)
        .map_err(|e| Error::InvalidParameter(format!("chi-square({dof}): {e}")))?;
    let d = scale.dim();
    let mut out = SampleMatrix::zeros(n, d);
    let mut z = vec![0.0; d];
    for i in 0..n {
        let row = out.row_mut(i);
        scale.correlated_normal(rng, &mut z, row);
        let w: f64 = chi.sample(rng);
        let f = (w / dof).sqrt().recip();
        row.iter_mut()
            .zip(&scale.mean)
            .for_each(|(x, m)| *x = m + *x * f);
    }
    Ok(out)
}

/// Independent Maxwell-Boltzmann(`scale`) coordinates, each the norm of
/// three independent `N(0, scale^2)` variates.
pub fn sample_maxwell_product<R: Rng + ?Sized>(
    scale: f64,
    dim: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if !(scale > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Maxwell scale must be positive, got {scale}"
        )));
    }
    check_dim(dim)?;
    check_rows(n)?;
    let mut out = SampleMatrix::zeros(n, dim);
    for i in 0..n {
        for x in out.row_mut(i) {
            let s: f64 = (0..3)
                .map(|_| {
                    let z: f64 = StandardNormal.sample(rng);
                    z * z
                })
                .sum();
            *x = scale * s.sqrt();
        }
    }
    Ok(out)
}

/// Rows `R u` with `R ~ Lognormal(0, 0.25)` and `u` uniform on the unit sphere.
pub fn sample_spherical_lognormal<R: Rng + ?Sized>(
    d: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    sample_spherical(d, table::SPHERICAL_LOG_SD, n, rng)
}

fn sample_spherical<R: Rng + ?Sized>(
    d: usize,
    log_sd: f64,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    check_dim(d)?;
    check_rows(n)?;
    let radius = LogNormal::new(0.0, log_sd)
        .map_err(|e| Error::InvalidParameter(format!("lognormal(0, {log_sd}): {e}")))?;
    let mut out = SampleMatrix::zeros(n, d);
    for i in 0..n {
        let row = out.row_mut(i);
        let norm = loop {
            for x in row.iter_mut() {
                *x = StandardNormal.sample(rng);
            }
            let norm = row.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm > 0.0 {
                break norm;
            }
        };
        let r: f64 = radius.sample(rng);
        row.iter_mut().for_each(|x| *x *= r / norm);
    }
    Ok(out)
}

pub fn sample_uniform_product<R: Rng + ?Sized>(
    low: f64,
    high: f64,
    dim: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    check_dim(dim)?;
    check_rows(n)?;
    let u = Uniform::new(low, high)
        .map_err(|e| Error::InvalidParameter(format!("uniform({low}, {high}): {e}")))?;
    let mut out = SampleMatrix::zeros(n, dim);
    for i in 0..n {
        for x in out.row_mut(i) {
            *x = u.sample(rng);
        }
    }
    Ok(out)
}

/// Mean of a Maxwell-Boltzmann(`scale`) variate, `2 c sqrt(2 / pi)`.
pub fn maxwell_mean(scale: f64) -> f64 {
    2.0 * scale * (2.0 / PI).sqrt()
}

/// Text form used on the command line:
///
/// * `normal:<I|A|Sigma|B>:<d>[:<mean>]` (mean is a constant vector)
/// * `t:<dof>:<d>` (location 0, scale I)
/// * `maxwell:<scale>:<d>`
/// * `spherical-lognormal:<d>[:<log-sd>]`
/// * `uniform:<low>:<high>:<d>`
/// * `ubd:<four-clouds|circle|two-parabolas|parabola|diamond|w>`
impl FromStr for DistributionSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.trim().split(':').map(str::trim).collect();
        let bad = || Error::InvalidParameter(format!("cannot parse distribution '{s}'"));
        let num = |t: &str| t.parse::<f64>().map_err(|_| bad());
        let int = |t: &str| t.parse::<usize>().map_err(|_| bad());
        match parts.as_slice() {
            ["normal", m, d] | ["normal", m, d, _] => {
                let d = int(d)?;
                let cov = table::named_matrix(m, d)?;
                let shift = if parts.len() == 4 { num(parts[3])? } else { 0.0 };
                DistributionSpec::mv_normal(vec![shift; d], cov)
            }
            ["t", r, d] => {
                let d = int(d)?;
                DistributionSpec::mv_t(num(r)?, vec![0.0; d], table::identity(d))
            }
            ["maxwell", c, d] => DistributionSpec::maxwell_product(num(c)?, int(d)?),
            ["spherical-lognormal", d] => {
                DistributionSpec::spherical_lognormal(int(d)?, table::SPHERICAL_LOG_SD)
            }
            ["spherical-lognormal", d, sd] => {
                DistributionSpec::spherical_lognormal(int(d)?, num(sd)?)
            }
            ["uniform", lo, hi, d] => DistributionSpec::uniform_product(num(lo)?, num(hi)?, int(d)?),
            ["ubd", v] => Ok(DistributionSpec::Ubd(v.parse()?)),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for DistributionSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DistributionSpec::MvNormal(g) => {
                let d = g.dim();
                let name = table::matrix_name(g.cov(), d).unwrap_or("custom");
                let shift = g.mean()[0];
                if g.mean().iter().all(|&m| m == shift) && shift != 0.0 {
                    write!(f, "normal:{name}:{d}:{shift}")
                } else if g.mean().iter().all(|&m| m == 0.0) {
                    write!(f, "normal:{name}:{d}")
                } else {
                    write!(f, "normal:{name}:{d}:custom-mean")
                }
            }
            DistributionSpec::MvT { dof, scale } => write!(f, "t:{dof}:{}", scale.dim()),
            DistributionSpec::MaxwellProduct { scale, dim } => write!(f, "maxwell:{scale}:{dim}"),
            DistributionSpec::SphericalLognormal { dim, log_sd } => {
                write!(f, "spherical-lognormal:{dim}:{log_sd}")
            }
            DistributionSpec::UniformProduct { low, high, dim } => {
                write!(f, "uniform:{low}:{high}:{dim}")
            }
            DistributionSpec::Ubd(v) => write!(f, "ubd:{v}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::{mean, sorted_copy};
    use statrs::distribution::{ContinuousCDF, Normal};

    fn rng(seed: u64) -> rand_chacha::ChaCha8Rng {
        RngStream::new(seed, 0).rng()
    }

    fn correlation(m: &SampleMatrix, a: usize, b: usize) -> f64 {
        let c = m.covariance();
        let d = m.ncols();
        c[a * d + b] / (c[a * d + a] * c[b * d + b]).sqrt()
    }

    #[test]
    fn normal_identity_covariance() {
        let spec = DistributionSpec::standard_normal(2).unwrap();
        let m = sample_mv_normal(&spec, 10_000, &mut rng(1)).unwrap();
        let c = m.covariance();
        for (got, want) in c.iter().zip([1.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 0.1, "{c:?}");
        }
    }

    #[test]
    fn normal_a2_correlation() {
        let spec = DistributionSpec::mv_normal(vec![0.0; 2], table::a_matrix(2)).unwrap();
        let m = spec.sample(10_000, &mut rng(2)).unwrap();
        assert!((correlation(&m, 0, 1) - 0.5).abs() < 0.05);
    }

    #[test]
    fn degenerate_covariance_rejected() {
        assert_eq!(
            DistributionSpec::mv_normal(vec![0.0], vec![0.0]),
            Err(Error::CholeskyFailure)
        );
        assert_eq!(
            DistributionSpec::mv_normal(vec![0.0; 2], vec![1.0, 2.0, 2.0, 1.0]),
            Err(Error::CholeskyFailure)
        );
        assert_eq!(
            DistributionSpec::mv_normal(vec![0.0; 2], vec![1.0, 0.3, 0.2, 1.0]),
            Err(Error::CholeskyFailure)
        );
    }

    #[test]
    fn zero_rows_rejected() {
        let spec = DistributionSpec::standard_normal(2).unwrap();
        assert_eq!(spec.sample(0, &mut rng(0)), Err(Error::EmptyRequest));
    }

    #[test]
    fn t_covariance_is_scaled_identity() {
        let spec = DistributionSpec::mv_t(20.0, vec![0.0; 2], table::identity(2)).unwrap();
        let m = sample_mv_t(&spec, 10_000, &mut rng(3)).unwrap();
        let c = m.covariance();
        let v = 20.0 / 18.0;
        for (got, want) in c.iter().zip([v, 0.0, 0.0, v]) {
            assert!((got - want).abs() < 0.15, "{c:?}");
        }
    }

    #[test]
    fn t_with_many_dof_is_close_to_normal() {
        let spec = DistributionSpec::mv_t(1e6, vec![0.0], vec![1.0]).unwrap();
        let m = spec.sample(10_000, &mut rng(4)).unwrap();
        let x = sorted_copy(m.as_slice());
        let normal = Normal::standard();
        let n = x.len() as f64;
        let ks = x
            .iter()
            .enumerate()
            .map(|(i, &v)| {
                let f = normal.cdf(v);
                (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
            })
            .fold(0.0, f64::max);
        assert!(ks < 0.05, "KS distance {ks}");
    }

    #[test]
    fn t_rejects_nonpositive_dof() {
        assert!(matches!(
            DistributionSpec::mv_t(0.0, vec![0.0; 2], table::identity(2)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn maxwell_mean_and_independence() {
        let m = sample_maxwell_product(10.0, 2, 10_000, &mut rng(5)).unwrap();
        let target = maxwell_mean(10.0);
        assert!((target - 15.957).abs() < 1e-3);
        for j in 0..2 {
            assert!((mean(&m.column(j).unwrap()) - target).abs() < 0.5);
        }
        let m = sample_maxwell_product(10.0, 3, 10_000, &mut rng(6)).unwrap();
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            assert!(correlation(&m, a, b).abs() < 0.05);
        }
        assert!(matches!(
            sample_maxwell_product(0.0, 2, 10, &mut rng(0)),
            Err(Error::InvalidParameter(_))
        ));
    }

    #[test]
    fn spherical_lognormal_moments() {
        let m = sample_spherical_lognormal(3, 10_000, &mut rng(7)).unwrap();
        for j in 0..3 {
            assert!(mean(&m.column(j).unwrap()).abs() < 0.05);
        }
        let logr: Vec<f64> = m
            .rows()
            .map(|r| r.iter().map(|x| x * x).sum::<f64>().sqrt().ln())
            .collect();
        assert!(mean(&logr).abs() < 0.02);
        assert!((crate::stats::variance(&logr).sqrt() - 0.25).abs() < 0.02);

        let one = sample_spherical_lognormal(2, 1, &mut rng(8)).unwrap();
        assert_eq!(one.nrows(), 1);
        assert!(one.is_finite());
    }

    #[test]
    fn product_distributions_are_uncorrelated() {
        let specs = [
            DistributionSpec::standard_normal(3).unwrap(),
            DistributionSpec::maxwell_product(10.0, 3).unwrap(),
            DistributionSpec::uniform_product(0.0, 1.0, 3).unwrap(),
        ];
        for (s, spec) in specs.iter().enumerate() {
            let m = spec.sample(10_000, &mut rng(10 + s as u64)).unwrap();
            assert!(m.is_finite());
            for (a, b) in [(0, 1), (0, 2), (1, 2)] {
                assert!(correlation(&m, a, b).abs() < 0.05, "{spec}");
            }
        }
    }

    #[test]
    fn same_stream_same_sample() {
        let spec: DistributionSpec = "t:3:4".parse().unwrap();
        let a = spec.sample(100, &mut RngStream::new(9, 2).rng()).unwrap();
        let b = spec.sample(100, &mut RngStream::new(9, 2).rng()).unwrap();
        let c = spec.sample(100, &mut RngStream::new(9, 3).rng()).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn text_form_round_trips() {
        for s in [
            "normal:I:2",
            "normal:A:3",
            "normal:Sigma:4",
            "normal:B:3:3",
            "t:3:4",
            "maxwell:10:2",
            "spherical-lognormal:3:0.25",
            "uniform:0:1:2",
            "ubd:circle",
            "ubd:w",
        ] {
            let spec: DistributionSpec = s.parse().unwrap();
            assert_eq!(spec.to_string(), s);
        }
        assert!("normal:Q:2".parse::<DistributionSpec>().is_err());
        assert!("gamma:1".parse::<DistributionSpec>().is_err());
    }
}
