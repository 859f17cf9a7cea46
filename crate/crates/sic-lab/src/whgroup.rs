//! Displacement operators D_p = tau^{p1 p2} V^{p1} U^{p2} and the
//! Heisenberg-group relations every other module builds on.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Result, SicError};
use crate::linalg::{norm, CMat};

/// Dimension d together with the derived quantities that fix the group:
/// dbar (= d odd, 2d even), the phases tau and omega, and cached integer
/// powers of both. Immutable after construction.
#[derive(Clone, Debug)]
pub struct DimensionContext {
    d: usize,
    dbar: usize,
    tau: C64,
    omega: C64,
    tau_powers: Vec<C64>,   // tau^k for k in [0, 2d)
    omega_powers: Vec<C64>, // omega^k for k in [0, d)
}

impl DimensionContext {
    pub fn new(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(SicError::InvalidDimension(0));
        }
        let dbar = if d % 2 == 0 { 2 * d } else { d };
        // tau^k: exponents are integers, so reduce mod 2d exactly before
        // taking a single complex exponential.
        let tau_powers: Vec<C64> = (0..2 * d)
            .map(|k| C64::from_polar(1.0, PI * (d as f64 + 1.0) * k as f64 / d as f64))
            .collect();
        let omega_powers: Vec<C64> = (0..d)
            .map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / d as f64))
            .collect();
        Ok(Self {
            d,
            dbar,
            tau: tau_powers[1 % (2 * d)],
            omega: omega_powers[1 % d],
            tau_powers,
            omega_powers,
        })
    }

    #[inline]
    pub fn d(&self) -> usize {
        self.d
    }

    #[inline]
    pub fn dbar(&self) -> usize {
        self.dbar
    }

    #[inline]
    pub fn tau(&self) -> C64 {
        self.tau
    }

    #[inline]
    pub fn omega(&self) -> C64 {
        self.omega
    }

    /// tau^e with exact exponent reduction mod 2d.
    #[inline]
    pub fn tau_pow(&self, e: i64) -> C64 {
        self.tau_powers[e.rem_euclid(2 * self.d as i64) as usize]
    }

    /// omega^e with exact exponent reduction mod d.
    #[inline]
    pub fn omega_pow(&self, e: i64) -> C64 {
        self.omega_powers[e.rem_euclid(self.d as i64) as usize]
    }
}

/// Index p = (p1, p2) of a displacement operator, stored reduced mod dbar.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct DisplacementIndex {
    pub p1: usize,
    pub p2: usize,
}

impl DisplacementIndex {
    pub fn new(ctx: &DimensionContext, p1: i64, p2: i64) -> Self {
        let m = ctx.dbar() as i64;
        Self {
            p1: p1.rem_euclid(m) as usize,
            p2: p2.rem_euclid(m) as usize,
        }
    }

    pub fn negate(&self, ctx: &DimensionContext) -> Self {
        Self::new(ctx, -(self.p1 as i64), -(self.p2 as i64))
    }

    pub fn add(&self, other: &Self, ctx: &DimensionContext) -> Self {
        Self::new(
            ctx,
            self.p1 as i64 + other.p1 as i64,
            self.p2 as i64 + other.p2 as i64,
        )
    }
}

/// Symplectic form <p, q> = p2 q1 - p1 q2 reduced mod m.
pub fn symplectic_form(p: &DisplacementIndex, q: &DisplacementIndex, m: usize) -> usize {
    assert!(m >= 1);
    let v = p.p2 as i64 * q.q1() - p.p1 as i64 * q.q2();
    v.rem_euclid(m as i64) as usize
}

impl DisplacementIndex {
    #[inline]
    fn q1(&self) -> i64 {
        self.p1 as i64
    }
    #[inline]
    fn q2(&self) -> i64 {
        self.p2 as i64
    }
}

/// A unit vector in C^d; the optimization variable of the whole artifact.
#[derive(Clone, Debug, PartialEq)]
pub struct FiducialVector {
    entries: Vec<C64>,
}

impl FiducialVector {
    /// Accepts a vector already normalized to 1e-12.
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        let n = norm(&entries);
        if (n - 1.0).abs() > 1e-12 {
            return Err(SicError::NotNormalized(n));
        }
        Ok(Self { entries })
    }

    /// Normalizes first, then wraps.
    pub fn from_unnormalized(entries: &[C64]) -> Result<Self> {
        let n = norm(entries);
        if n == 0.0 {
            return Err(SicError::NotNormalized(0.0));
        }
        Self::new(entries.iter().map(|z| z / n).collect())
    }

    #[inline]
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.len()
    }
}

/// The dense matrix of D_p = tau^{p1 p2} V^{p1} U^{p2}, with V the cyclic
/// shift and U = diag(omega^k).
pub fn displacement(ctx: &DimensionContext, p: &DisplacementIndex) -> CMat {
    let d = ctx.d();
    let phase = ctx.tau_pow(p.p1 as i64 * p.p2 as i64);
    CMat::from_fn(d, |j, k| {
        if (k + p.p1) % d == j % d {
            phase * ctx.omega_pow(p.p2 as i64 * k as i64)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Applies D_p to a vector in O(d) without materializing the matrix.
pub fn displace_vec(ctx: &DimensionContext, p: &DisplacementIndex, v: &[C64]) -> Vec<C64> {
    let d = ctx.d();
    let phase = ctx.tau_pow(p.p1 as i64 * p.p2 as i64);
    let mut out = vec![C64::new(0.0, 0.0); d];
    for k in 0..d {
        let j = (k + p.p1) % d;
        out[j] = phase * ctx.omega_pow(p.p2 as i64 * k as i64) * v[k];
    }
    out
}

/// <phi| D_p |phi> via the index identity
/// tau^{p1 p2} sum_k conj(c_{k+p1}) omega^{p2 k} c_k.
pub fn overlap(ctx: &DimensionContext, phi: &FiducialVector, p: &DisplacementIndex) -> C64 {
    let d = ctx.d();
    let c = phi.entries();
    let mut acc = C64::new(0.0, 0.0);
    for k in 0..d {
        acc += c[(k + p.p1) % d].conj() * ctx.omega_pow(p.p2 as i64 * k as i64) * c[k];
    }
    ctx.tau_pow(p.p1 as i64 * p.p2 as i64) * acc
}

/// All d^2 overlaps <phi|D_p|phi> for p in [0,d)^2, indexed p1*d + p2.
pub fn overlap_table(ctx: &DimensionContext, phi: &FiducialVector) -> Vec<C64> {
    let d = ctx.d();
    let mut table = Vec::with_capacity(d * d);
    for p1 in 0..d {
        for p2 in 0..d {
            table.push(overlap(
                ctx,
                phi,
                &DisplacementIndex { p1, p2 },
            ));
        }
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::inner;
    use crate::linalg::normalize;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_unit(d: usize, rng: &mut ChaCha8Rng) -> FiducialVector {
        let v: Vec<C64> = (0..d)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        FiducialVector::new(normalize(&v)).unwrap()
    }

    #[test]
    fn context_fields() {
        assert!(matches!(
            DimensionContext::new(0),
            Err(SicError::InvalidDimension(0))
        ));
        // d=2 -> tau = e^{3 pi i / 2} = -i
        let ctx = DimensionContext::new(2).unwrap();
        assert!((ctx.tau() - c(0.0, -1.0)).norm() < 1e-14);
        assert_eq!(DimensionContext::new(3).unwrap().dbar(), 3);
        assert_eq!(DimensionContext::new(4).unwrap().dbar(), 8);
        for d in 1..=20 {
            let ctx = DimensionContext::new(d).unwrap();
            assert!((ctx.tau_pow(2 * d as i64) - c(1.0, 0.0)).norm() < 1e-14);
            assert!((ctx.omega_pow(d as i64) - c(1.0, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn symplectic_form_examples() {
        let ctx = DimensionContext::new(5).unwrap();
        let p = DisplacementIndex::new(&ctx, 1, 0);
        let q = DisplacementIndex::new(&ctx, 0, 1);
        assert_eq!(symplectic_form(&p, &q, 5), 4);
        assert_eq!(symplectic_form(&p, &p, 5), 0);
        let ctx7 = DimensionContext::new(7).unwrap();
        let p = DisplacementIndex::new(&ctx7, 2, 3);
        let q = DisplacementIndex::new(&ctx7, 1, 1);
        assert_eq!(symplectic_form(&p, &q, 7), 1);
    }

    #[test]
    fn displacement_small_cases() {
        let ctx = DimensionContext::new(2).unwrap();
        let id = displacement(&ctx, &DisplacementIndex::new(&ctx, 0, 0));
        assert!(id.max_abs_diff(&CMat::identity(2)) < 1e-14);

        // d=2, p=(1,1): -i VU = [[0, i], [-i, 0]]
        let m = displacement(&ctx, &DisplacementIndex::new(&ctx, 1, 1));
        let expect = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 1) => c(0.0, 1.0),
            (1, 0) => c(0.0, -1.0),
            _ => c(0.0, 0.0),
        });
        assert!(m.max_abs_diff(&expect) < 1e-14);

        // d=2, p=(1,2): -V by the even-d periodicity sign
        let m = displacement(&ctx, &DisplacementIndex::new(&ctx, 1, 2));
        let expect = CMat::from_fn(2, |i, j| match (i, j) {
            (0, 1) | (1, 0) => c(-1.0, 0.0),
            _ => c(0.0, 0.0),
        });
        assert!(m.max_abs_diff(&expect) < 1e-14);
    }

    #[test]
    fn composition_law_exhaustive_small() {
        for d in 1..=8usize {
            let ctx = DimensionContext::new(d).unwrap();
            let m = ctx.dbar() as i64;
            for a1 in 0..m {
                for a2 in 0..m {
                    for b1 in 0..m {
                        for b2 in 0..m {
                            if d > 4 && (a1 + a2 + b1 + b2) % 3 != 0 {
                                continue; // thin out, still hundreds of pairs
                            }
                            let p = DisplacementIndex::new(&ctx, a1, a2);
                            let q = DisplacementIndex::new(&ctx, b1, b2);
                            let lhs = displacement(&ctx, &p).mul(&displacement(&ctx, &q));
                            let s = symplectic_form(&p, &q, 2 * d) as i64;
                            let rhs = displacement(&ctx, &p.add(&q, &ctx)).scale(ctx.tau_pow(s));
                            assert!(
                                lhs.max_abs_diff(&rhs) < 1e-12,
                                "composition law failed d={d} p={p:?} q={q:?}"
                            );
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn composition_law_random_larger() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for d in [11usize, 18, 25, 30] {
            let ctx = DimensionContext::new(d).unwrap();
            let m = ctx.dbar() as i64;
            for _ in 0..200 {
                let p = DisplacementIndex::new(&ctx, rng.gen_range(0..m), rng.gen_range(0..m));
                let q = DisplacementIndex::new(&ctx, rng.gen_range(0..m), rng.gen_range(0..m));
                let lhs = displacement(&ctx, &p).mul(&displacement(&ctx, &q));
                let s = symplectic_form(&p, &q, 2 * d) as i64;
                let rhs = displacement(&ctx, &p.add(&q, &ctx)).scale(ctx.tau_pow(s));
                assert!(lhs.max_abs_diff(&rhs) < 1e-12);
            }
        }
    }

    #[test]
    fn adjoint_periodicity_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for d in [2usize, 3, 5, 6, 8, 12] {
            let ctx = DimensionContext::new(d).unwrap();
            let m = ctx.dbar() as i64;
            for _ in 0..40 {
                let p = DisplacementIndex::new(&ctx, rng.gen_range(0..m), rng.gen_range(0..m));
                let dp = displacement(&ctx, &p);
                assert!(dp.unitarity_defect() < 1e-13);
                let dm = displacement(&ctx, &p.negate(&ctx));
                assert!(dp.adjoint().max_abs_diff(&dm) < 1e-13);

                // periodicity: D_{p+dq} = D_p (odd) or (-1)^{<p,q>} D_p (even)
                let q1 = rng.gen_range(0..3i64);
                let q2 = rng.gen_range(0..3i64);
                let shifted = DisplacementIndex::new(
                    &ctx,
                    p.p1 as i64 + d as i64 * q1,
                    p.p2 as i64 + d as i64 * q2,
                );
                let dshift = displacement(&ctx, &shifted);
                let sign = if d % 2 == 1 {
                    1.0
                } else {
                    let q = DisplacementIndex::new(&ctx, q1, q2);
                    if symplectic_form(&p, &q, 2) == 0 {
                        1.0
                    } else {
                        -1.0
                    }
                };
                assert!(dshift.max_abs_diff(&dp.scale(c(sign, 0.0))) < 1e-12);
            }
        }
    }

    #[test]
    fn overlap_matches_matrix_route_and_examples() {
        let ctx = DimensionContext::new(2).unwrap();
        let phi = FiducialVector::new(vec![c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
        let t = overlap_table(&ctx, &phi);
        assert!((t[0] - c(1.0, 0.0)).norm() < 1e-14); // p=(0,0)
        assert!(t[2].norm() < 1e-14); // p=(1,0): <0|V|0> = 0
        assert!((t[1] - c(1.0, 0.0)).norm() < 1e-14); // p=(0,1): <0|U|0> = 1

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for d in [3usize, 4, 7] {
            let ctx = DimensionContext::new(d).unwrap();
            let phi = random_unit(d, &mut rng);
            assert!((overlap_table(&ctx, &phi)[0].norm() - 1.0).abs() < 1e-12);
            for p1 in 0..d {
                for p2 in 0..d {
                    let p = DisplacementIndex { p1, p2 };
                    let via_matrix = inner(
                        phi.entries(),
                        &displacement(&ctx, &p).apply(phi.entries()),
                    );
                    assert!((overlap(&ctx, &phi, &p) - via_matrix).norm() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn d2_sic_fiducial_overlaps() {
        // known d=2 fiducial: (sqrt((1+1/sqrt 3)/2), e^{i pi/4} sqrt((1-1/sqrt 3)/2))
        let ctx = DimensionContext::new(2).unwrap();
        let a = ((1.0 + 1.0 / 3f64.sqrt()) / 2.0).sqrt();
        let b = ((1.0 - 1.0 / 3f64.sqrt()) / 2.0).sqrt();
        let phi = FiducialVector::new(vec![
            c(a, 0.0),
            C64::from_polar(b, PI / 4.0),
        ])
        .unwrap();
        let t = overlap_table(&ctx, &phi);
        for (i, z) in t.iter().enumerate() {
            if i == 0 {
                continue;
            }
            assert!((z.norm_sqr() - 1.0 / 3.0).abs() < 1e-13);
        }
    }
}
