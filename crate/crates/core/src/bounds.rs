//! Reference curves: the heterodyne standard quantum limit (SQL), its
//! efficiency-degraded variant and the Helstrom bound for QPSK.

use std::f64::consts::SQRT_2;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{check_non_negative, check_unit, Error, Result};
use crate::physics::SYMBOLS;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub alpha_sq: f64,
    pub sql: f64,
    pub sql_lossy: f64,
    pub helstrom: f64,
}

impl BoundPoint {
    pub fn new(alpha_sq: f64, eta_total: f64) -> Result<Self> {
        check_non_negative("alpha_sq", alpha_sq)?;
        check_unit("eta_total", eta_total)?;
        Ok(Self {
            alpha_sq,
            sql: sql_heterodyne(alpha_sq),
            sql_lossy: sql_lossy(alpha_sq, eta_total),
            helstrom: helstrom_qpsk(alpha_sq)?,
        })
    }
}

pub fn erf(x: f64) -> f64 {
    libm::erf(x)
}

/// Heterodyne error `1 - (1 + erf(|alpha| / sqrt 2))^2 / 4`.
pub fn sql_heterodyne(alpha_sq: f64) -> f64 {
    let s = 1.0 + erf(alpha_sq.max(0.0).sqrt() / SQRT_2);
    1.0 - 0.25 * s * s
}

/// SQL with the signal attenuated by `eta_total` before the heterodyne.
pub fn sql_lossy(alpha_sq: f64, eta_total: f64) -> f64 {
    sql_heterodyne(eta_total * alpha_sq)
}

/// First row of the QPSK Gram matrix, `c_k = <alpha_0|alpha_k> = exp(alpha_sq (i^k - 1))`.
pub fn gram_first_row(alpha_sq: f64) -> [Complex64; SYMBOLS] {
    let mut i_pow = Complex64::new(1.0, 0.0);
    std::array::from_fn(|_| {
        let c = ((i_pow - 1.0) * alpha_sq).exp();
        i_pow *= Complex64::i();
        c
    })
}

/// Gram eigenvalues from the DFT of the circulant first row,
/// `lambda_j = sum_k c_k i^(jk)`. Tiny negative rounding is clamped to zero.
pub fn gram_eigenvalues(alpha_sq: f64) -> Result<[f64; SYMBOLS]> {
    let c = gram_first_row(alpha_sq);
    let mut out = [0.0; SYMBOLS];
    for (j, lambda) in out.iter_mut().enumerate() {
        let mut sum = Complex64::new(0.0, 0.0);
        for (k, ck) in c.iter().enumerate() {
            sum += ck * Complex64::i().powi(((j * k) % SYMBOLS) as i32);
        }
        if sum.re < -1e-12 {
            return Err(Error::Numeric(format!(
                "Gram eigenvalue {} is negative at alpha_sq = {alpha_sq}",
                sum.re
            )));
        }
        *lambda = sum.re.max(0.0);
    }
    Ok(out)
}

/// Minimum error for the four equiprobable symmetric coherent states, via the
/// square-root measurement: `1 - (sum_j sqrt(lambda_j))^2 / 16`.
pub fn helstrom_qpsk(alpha_sq: f64) -> Result<f64> {
    check_non_negative("alpha_sq", alpha_sq)?;
    let s: f64 = gram_eigenvalues(alpha_sq)?.iter().map(|l| l.sqrt()).sum();
    let n = SYMBOLS as f64;
    Ok((1.0 - s * s / (n * n)).max(0.0))
}
