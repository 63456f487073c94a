//! Named covariance matrices of the simulation study.

use crate::{Error, Result};

/// Log-scale standard deviation of the radius of the spherical lognormal law.
pub const SPHERICAL_LOG_SD: f64 = 0.25;

#[rustfmt::skip]
const SIGMA4: [f64; 16] = [
    1.0, 0.5, 0.5, 0.5,
    0.5, 2.0, 0.5, 0.5,
    0.5, 0.5, 1.0, 0.5,
    0.5, 0.5, 0.5, 1.0,
];

pub fn identity(d: usize) -> Vec<f64> {
    let mut m = vec![0.0; d * d];
    (0..d).for_each(|i| m[i * d + i] = 1.0);
    m
}

/// `A_d`: identity except correlation 0.5 between the last two coordinates.
pub fn a_matrix(d: usize) -> Vec<f64> {
    let mut m = identity(d);
    if d >= 2 {
        m[(d - 2) * d + d - 1] = 0.5;
        m[(d - 1) * d + d - 2] = 0.5;
    }
    m
}

/// `Sigma_d`: leading `d x d` block of `Sigma_4`.
pub fn sigma(d: usize) -> Result<Vec<f64>> {
    if d == 0 || d > 4 {
        return Err(Error::InvalidParameter(format!("Sigma_d is defined for d <= 4, got {d}")));
    }
    Ok((0..d)
        .flat_map(|a| (0..d).map(move |b| SIGMA4[a * 4 + b]))
        .collect())
}

/// `B_d`: unit diagonal, 0.9 everywhere else.
pub fn b_matrix(d: usize) -> Vec<f64> {
    let mut m = vec![0.9; d * d];
    (0..d).for_each(|i| m[i * d + i] = 1.0);
    m
}

pub fn named_matrix(name: &str, d: usize) -> Result<Vec<f64>> {
    match name {
        "I" => Ok(identity(d)),
        "A" => Ok(a_matrix(d)),
        "Sigma" => sigma(d),
        "B" => Ok(b_matrix(d)),
        _ => Err(Error::InvalidParameter(format!("unknown matrix name '{name}'"))),
    }
}

pub fn matrix_name(m: &[f64], d: usize) -> Option<&'static str> {
    if m == identity(d).as_slice() {
        Some("I")
    } else if m == a_matrix(d).as_slice() {
        Some("A")
    } else if sigma(d).is_ok_and(|s| s == m) {
        Some("Sigma")
    } else if m == b_matrix(d).as_slice() {
        Some("B")
    } else {
        None
    }
}
