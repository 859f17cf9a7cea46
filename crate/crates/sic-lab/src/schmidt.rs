//! Schmidt structure of fiducials across coprime tensor factorizations
//! C^d = C^{d1} x C^{d2}, where the 2-design property pins the sum of squared
//! coefficients to (d1+d2)/(d+1) independently of the fiducial.

use num_complex::Complex64 as C64;

use crate::clifford::gcd;
use crate::error::{Result, SicError};
use crate::linalg::{hermitian_eigenvalues, CMat};
use crate::whgroup::{overlap_table, DimensionContext, FiducialVector};

/// The CRT identification |k> -> |k mod d1> (x) |k mod d2>, returned as the
/// permutation k -> (k mod d1)*d2 + (k mod d2) of {0, ..., d1*d2 - 1}. It is
/// a bijection precisely because the factors are coprime, and it maps the
/// cyclic shift and modulation in C^d to tensor products of the factors',
/// preserving group covariance.
pub fn crt_map(d1: usize, d2: usize) -> Result<Vec<usize>> {
    if d1 == 0 || d2 == 0 {
        return Err(SicError::InvalidDimension(0));
    }
    if gcd(d1, d2) != 1 {
        return Err(SicError::NotCoprime(d1, d2));
    }
    Ok((0..d1 * d2).map(|k| (k % d1) * d2 + (k % d2)).collect())
}

/// Squared Schmidt coefficients of a fiducial across a coprime bipartition,
/// in descending order, with the 2-design identity residual.
#[derive(Clone, Debug)]
pub struct SchmidtReport {
    pub d1: usize,
    pub d2: usize,
    pub coefficients: Vec<f64>,
    pub sum_sq: f64,
    pub identity_residual: f64,
}

/// Schmidt coefficients lambda_l of phi reshaped as a d1 x d2 matrix through
/// the CRT permutation. Computed as eigenvalues of the small d1 x d1 Gram
/// matrix M M^dag rather than a general SVD.
pub fn schmidt_coefficients(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    d1: usize,
    d2: usize,
) -> Result<SchmidtReport> {
    let d = ctx.d();
    let (d1, d2) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
    if d1 * d2 != d {
        return Err(SicError::InvalidDimension(d1 * d2));
    }
    let perm = crt_map(d1, d2)?;

    // gate: the identity below is a 2-design consequence, meaningless for
    // arbitrary vectors
    let target = 1.0 / (d as f64 + 1.0);
    let dev = overlap_table(ctx, phi)
        .iter()
        .skip(1)
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max);
    if dev >= 1e-8 {
        return Err(SicError::NotFiducial {
            deviation: dev,
            tol: 1e-8,
        });
    }

    let c = phi.entries();
    let mut reshaped = vec![C64::new(0.0, 0.0); d];
    for (k, &slot) in perm.iter().enumerate() {
        reshaped[slot] = c[k];
    }
    // Gram matrix (M M^dag)_{ij} = sum_l M_il conj(M_jl), embedded in a CMat
    // padded to d1 x d1
    let gram = CMat::from_fn(d1, |i, j| {
        (0..d2)
            .map(|l| reshaped[i * d2 + l] * reshaped[j * d2 + l].conj())
            .sum()
    });
    let coefficients: Vec<f64> = hermitian_eigenvalues(&gram)
        .into_iter()
        .map(|l| if l < 0.0 { 0.0 } else { l })
        .collect();
    let sum_sq: f64 = coefficients.iter().map(|l| l * l).sum();
    let identity_residual = (sum_sq - (d1 + d2) as f64 / (d as f64 + 1.0)).abs();
    Ok(SchmidtReport {
        d1,
        d2,
        coefficients,
        sum_sq,
        identity_residual,
    })
}
