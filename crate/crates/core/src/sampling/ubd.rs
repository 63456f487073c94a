//! Six uncorrelated bivariate laws; all but `FourClouds` are dependent.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngExt};
use rand_distr::{Distribution, StandardNormal};

use crate::{Error, Result, SampleMatrix};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UbdVariant {
    FourClouds,
    Circle,
    TwoParabolas,
    Parabola,
    Diamond,
    /// `x2 = 4((u1^2 - 1/2)^2 + u2 / n)` where `n` is the number of rows
    /// requested. The sample size inside the law is odd but is kept as
    /// published.
    W,
}

impl UbdVariant {
    pub const ALL: [UbdVariant; 6] = [
        UbdVariant::FourClouds,
        UbdVariant::Circle,
        UbdVariant::TwoParabolas,
        UbdVariant::Parabola,
        UbdVariant::Diamond,
        UbdVariant::W,
    ];

    pub fn name(self) -> &'static str {
        match self {
            UbdVariant::FourClouds => "four-clouds",
            UbdVariant::Circle => "circle",
            UbdVariant::TwoParabolas => "two-parabolas",
            UbdVariant::Parabola => "parabola",
            UbdVariant::Diamond => "diamond",
            UbdVariant::W => "w",
        }
    }
}

impl fmt::Display for UbdVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for UbdVariant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.to_ascii_lowercase().replace(['_', ' '], "-");
        UbdVariant::ALL
            .into_iter()
            .find(|v| v.name() == key)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown UBD variant '{s}'")))
    }
}

fn sign<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    if rng.random::<bool>() {
        1.0
    } else {
        -1.0
    }
}

fn normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    StandardNormal.sample(rng)
}

pub fn sample_ubd<R: Rng + ?Sized>(
    variant: UbdVariant,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::EmptyRequest);
    }
    let mut out = SampleMatrix::zeros(n, 2);
    let size = n as f64;
    for i in 0..n {
        let (x1, x2) = match variant {
            UbdVariant::FourClouds => {
                let (z1, z2) = (normal(rng), normal(rng));
                (z1 + sign(rng), z2 + sign(rng))
            }
            UbdVariant::Circle => {
                let u: f64 = rng.random_range(-1.0..1.0);
                let (z1, z2) = (normal(rng), normal(rng));
                ((PI * u).sin() + z1 / 8.0, (PI * u).cos() + z2 / 8.0)
            }
            UbdVariant::TwoParabolas => {
                let u1: f64 = rng.random_range(-1.0..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                (u1, sign(rng) * (u1 * u1 + u2 / 2.0))
            }
            UbdVariant::Parabola => {
                let u1: f64 = rng.random_range(-1.0..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                (u1, (u1 * u1 + u2 / 2.0) / 2.0)
            }
            UbdVariant::Diamond => {
                let u1: f64 = rng.random_range(-1.0..1.0);
                let u2: f64 = rng.random_range(-1.0..1.0);
                let t = -PI / 4.0;
                (u1 * t.cos() + u2 * t.sin(), -u1 * t.sin() + u2 * t.cos())
            }
            UbdVariant::W => {
                let u1: f64 = rng.random_range(-1.0..1.0);
                let u2: f64 = rng.random_range(0.0..1.0);
                (u1 + u2 / 3.0, 4.0 * ((u1 * u1 - 0.5).powi(2) + u2 / size))
            }
        };
        let row = out.row_mut(i);
        row[0] = x1;
        row[1] = x2;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::RngStream;
    use crate::stats::{mean, variance};

    fn draw(v: UbdVariant, n: usize) -> SampleMatrix {
        sample_ubd(v, n, &mut RngStream::new(11, v as u64).rng()).unwrap()
    }

    #[test]
    fn diamond_is_a_rotated_unit_square() {
        let m = draw(UbdVariant::Diamond, 10_000);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        for r in m.rows() {
            // rotating back by +45 degrees recovers (u1, u2) in [-1, 1]^2
            let u1 = (r[0] - r[1]) * s;
            let u2 = (r[0] + r[1]) * s;
            assert!(u1.abs() <= 1.0 + 1e-12 && u2.abs() <= 1.0 + 1e-12);
            assert!((r[0] + r[1]).abs().max((r[0] - r[1]).abs()) <= 2.0 * s + 1e-12);
        }
    }

    #[test]
    fn circle_is_uncorrelated() {
        let m = draw(UbdVariant::Circle, 10_000);
        let c = m.covariance();
        assert!((c[1] / (c[0] * c[3]).sqrt()).abs() < 0.05);
    }

    #[test]
    fn four_clouds_variance() {
        let m = draw(UbdVariant::FourClouds, 10_000);
        for j in 0..2 {
            assert!((variance(&m.column(j).unwrap()) - 2.0).abs() < 0.1);
        }
    }

    #[test]
    fn w_uses_sample_size_in_second_coordinate() {
        let m = draw(UbdVariant::W, 4);
        for r in m.rows() {
            assert!(r[1] >= 0.0 && r[1] <= 4.0 * (0.25 + 0.25) + 1e-12);
        }
        let big = draw(UbdVariant::W, 10_000);
        // u2 / n is negligible at this size: x2 = 4 (u1^2 - 1/2)^2 has mean 4 (1/5 - 1/3 + 1/4)
        assert!((mean(&big.column(1).unwrap()) - 4.0 * (0.2 - 1.0 / 3.0 + 0.25)).abs() < 0.02);
    }

    #[test]
    fn parsing() {
        assert_eq!("Four_Clouds".parse::<UbdVariant>().unwrap(), UbdVariant::FourClouds);
        assert!("spiral".parse::<UbdVariant>().is_err());
        for v in UbdVariant::ALL {
            assert_eq!(v.name().parse::<UbdVariant>().unwrap(), v);
            assert!(draw(v, 100).is_finite());
        }
    }
}
