//! Appleby's explicit construction of the Clifford and extended Clifford
//! groups: metaplectic operators, the Zauner unitary and its eigenspaces,
//! named symmetry matrices and the group-order formulas.
//!
//! All symplectic bookkeeping is exact integer arithmetic mod dbar; floating
//! point only enters when a unitary matrix is materialized.

use num_complex::Complex64 as C64;
use std::f64::consts::PI;

use crate::error::{Result, SicError};
use crate::linalg::{conj_vec, inner, norm, orthonormalize_rank, CMat};
use crate::whgroup::{displacement, DimensionContext, DisplacementIndex};

/// gcd helper.
pub(crate) fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Modular inverse of a mod m, if it exists.
pub(crate) fn mod_inv(a: i64, m: i64) -> Option<i64> {
    let (mut old_r, mut r) = (a.rem_euclid(m), m);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let q = old_r / r;
        (old_r, r) = (r, old_r - q * r);
        (old_s, s) = (s, old_s - q * s);
    }
    if old_r == 1 {
        Some(old_s.rem_euclid(m))
    } else {
        None
    }
}

/// A pair [F|p] over Z_m with F (anti)symplectic: det F = +1 or -1 mod m.
/// det_sign records which; -1 marks the antiunitary branch of the E map.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SymplecticIndex {
    modulus: usize,
    f: [[usize; 2]; 2],
    p: [usize; 2],
    det_sign: i8,
}

impl SymplecticIndex {
    pub fn new(modulus: usize, f: [[i64; 2]; 2], p: [i64; 2]) -> Result<Self> {
        let m = modulus as i64;
        assert!(modulus >= 1);
        let fr = [
            [f[0][0].rem_euclid(m) as usize, f[0][1].rem_euclid(m) as usize],
            [f[1][0].rem_euclid(m) as usize, f[1][1].rem_euclid(m) as usize],
        ];
        let pr = [p[0].rem_euclid(m) as usize, p[1].rem_euclid(m) as usize];
        let det = (fr[0][0] as i64 * fr[1][1] as i64 - fr[0][1] as i64 * fr[1][0] as i64)
            .rem_euclid(m) as usize;
        let det_sign = if modulus == 1 || det == 1 % modulus {
            1
        } else if det == modulus - 1 {
            -1
        } else {
            return Err(SicError::NotSymplectic { det, modulus });
        };
        Ok(Self {
            modulus,
            f: fr,
            p: pr,
            det_sign,
        })
    }

    pub fn identity(modulus: usize) -> Self {
        Self::new(modulus, [[1, 0], [0, 1]], [0, 0]).expect("identity is symplectic")
    }

    #[inline]
    pub fn modulus(&self) -> usize {
        self.modulus
    }

    #[inline]
    pub fn matrix(&self) -> [[usize; 2]; 2] {
        self.f
    }

    #[inline]
    pub fn translation(&self) -> [usize; 2] {
        self.p
    }

    #[inline]
    pub fn det_sign(&self) -> i8 {
        self.det_sign
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.modulus)
    }

    /// [F|p][G|q] = [FG | p + Fq], det signs multiply.
    pub fn pair_mul(&self, other: &Self) -> Result<Self> {
        if self.modulus != other.modulus {
            return Err(SicError::ModulusMismatch(self.modulus, other.modulus));
        }
        let a = self.f;
        let b = other.f;
        let fg = [
            [
                a[0][0] as i64 * b[0][0] as i64 + a[0][1] as i64 * b[1][0] as i64,
                a[0][0] as i64 * b[0][1] as i64 + a[0][1] as i64 * b[1][1] as i64,
            ],
            [
                a[1][0] as i64 * b[0][0] as i64 + a[1][1] as i64 * b[1][0] as i64,
                a[1][0] as i64 * b[0][1] as i64 + a[1][1] as i64 * b[1][1] as i64,
            ],
        ];
        let q = other.p;
        let p = [
            self.p[0] as i64 + a[0][0] as i64 * q[0] as i64 + a[0][1] as i64 * q[1] as i64,
            self.p[1] as i64 + a[1][0] as i64 * q[0] as i64 + a[1][1] as i64 * q[1] as i64,
        ];
        // det(FG) = det F * det G, so the sign recomputed by the constructor
        // is exactly the product of the two signs
        Self::new(self.modulus, fg, p)
    }

    /// [F|p]^{-1} = [F^{-1} | -F^{-1} p], using adj(F)*det for the inverse.
    pub fn inverse(&self) -> Self {
        let s = self.det_sign as i64;
        let f = self.f;
        let finv = [
            [s * f[1][1] as i64, -s * (f[0][1] as i64)],
            [-s * (f[1][0] as i64), s * f[0][0] as i64],
        ];
        let p = [
            -(finv[0][0] * self.p[0] as i64 + finv[0][1] * self.p[1] as i64),
            -(finv[1][0] * self.p[0] as i64 + finv[1][1] * self.p[1] as i64),
        ];
        Self::new(self.modulus, finv, p).expect("inverse stays (anti)symplectic")
    }

    pub fn pow(&self, n: usize) -> Self {
        let mut out = Self::identity(self.modulus);
        for _ in 0..n {
            out = out.pair_mul(self).expect("same modulus");
        }
        out
    }

    /// F p as a displacement index (used for the conjugation law).
    pub fn act_on(&self, ctx: &DimensionContext, q: &DisplacementIndex) -> DisplacementIndex {
        let f = self.f;
        DisplacementIndex::new(
            ctx,
            f[0][0] as i64 * q.p1 as i64 + f[0][1] as i64 * q.p2 as i64,
            f[1][0] as i64 * q.p1 as i64 + f[1][1] as i64 * q.p2 as i64,
        )
    }

    /// Smallest n >= 1 with g^n in the PEC kernel (projective order).
    pub fn projective_order(&self, kernel: &[SymplecticIndex]) -> usize {
        let mut acc = *self;
        for n in 1..=(4 * self.modulus * self.modulus * self.modulus) {
            if kernel.contains(&acc) {
                return n;
            }
            acc = acc.pair_mul(self).expect("same modulus");
        }
        unreachable!("finite group");
    }

    /// Total order on kernel-coset representatives: the minimal encoding over
    /// the right coset g*K identifies the projective class.
    pub fn class_key(&self, kernel: &[SymplecticIndex]) -> ClassKey {
        kernel
            .iter()
            .map(|k| self.pair_mul(k).expect("same modulus").encode())
            .min()
            .expect("kernel nonempty")
    }

    fn encode(&self) -> ClassKey {
        ClassKey([
            (self.det_sign + 1) as usize,
            self.f[0][0],
            self.f[0][1],
            self.f[1][0],
            self.f[1][1],
            self.p[0],
            self.p[1],
        ])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassKey([usize; 7]);

/// A concrete extended-Clifford operator: a unitary matrix plus a flag.
/// Antiunitary elements act as v -> matrix * conj(v).
#[derive(Clone, Debug)]
pub struct CliffordElement {
    pub matrix: CMat,
    pub antiunitary: bool,
}

impl CliffordElement {
    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        if self.antiunitary {
            self.matrix.apply(&conj_vec(v))
        } else {
            self.matrix.apply(v)
        }
    }
}

/// Orthonormal basis of a subspace of C^d. `real_structure` marks the fixed
/// set of an antiunitary involution, where only real linear combinations stay
/// inside.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: Vec<Vec<C64>>,
    pub real_structure: bool,
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }
}

/// The metaplectic operator V_F for F in SL2(Z_dbar):
/// entries tau^{beta^{-1}(alpha k^2 - 2 j k + delta j^2)} / sqrt(d) when beta
/// is invertible, else the product V_{F1} V_{F2} over the decomposition
/// F = F1 F2 with an invertible-beta factor pair.
pub fn metaplectic(ctx: &DimensionContext, f: &[[usize; 2]; 2]) -> Result<CMat> {
    let m = ctx.dbar() as i64;
    let d = ctx.d();
    let (alpha, beta, gamma, delta) = (
        f[0][0] as i64,
        f[0][1] as i64,
        f[1][0] as i64,
        f[1][1] as i64,
    );
    let det = (alpha * delta - beta * gamma).rem_euclid(m);
    if det != 1 % m {
        return Err(SicError::NotSymplectic {
            det: det as usize,
            modulus: ctx.dbar(),
        });
    }
    if let Some(binv) = mod_inv(beta, m) {
        let scale = 1.0 / (d as f64).sqrt();
        return Ok(CMat::from_fn(d, |j, k| {
            let e = binv
                * (alpha * (k as i64) * (k as i64) - 2 * (j as i64) * (k as i64)
                    + delta * (j as i64) * (j as i64));
            ctx.tau_pow(e) * scale
        }));
    }
    // beta not invertible: route through F = F1 F2
    for x in 0..m {
        if mod_inv(delta + x * beta, m).is_some() {
            let f1 = [
                [0, (m - 1) as usize],
                [1, x as usize],
            ];
            let f2 = [
                [
                    (gamma + x * alpha).rem_euclid(m) as usize,
                    (delta + x * beta).rem_euclid(m) as usize,
                ],
                [(-alpha).rem_euclid(m) as usize, (-beta).rem_euclid(m) as usize],
            ];
            return Ok(metaplectic(ctx, &f1)?.mul(&metaplectic(ctx, &f2)?));
        }
    }
    Err(SicError::Internal(format!(
        "no x makes delta + x*beta invertible mod {m} (F = {f:?})"
    )))
}

/// The E map: D_p V_F for symplectic pairs, J-conjugated for antisymplectic
/// ones (returned with the antiunitary flag set; the stored matrix already
/// absorbs the complex conjugation of the operator product).
pub fn clifford_element(ctx: &DimensionContext, g: &SymplecticIndex) -> Result<CliffordElement> {
    if g.modulus() != ctx.dbar() {
        return Err(SicError::ModulusMismatch(g.modulus(), ctx.dbar()));
    }
    let p = g.translation();
    if g.det_sign() >= 0 {
        let dp = displacement(
            ctx,
            &DisplacementIndex::new(ctx, p[0] as i64, p[1] as i64),
        );
        let vf = metaplectic(ctx, &g.matrix())?;
        Ok(CliffordElement {
            matrix: dp.mul(&vf),
            antiunitary: false,
        })
    } else {
        // E_{[F|p]} = J-hat C_{[JF|Jp]}; acting on v this is conj(C) conj(v)
        let f = g.matrix();
        let m = ctx.dbar() as i64;
        let jf = [
            [f[0][0], f[0][1]],
            [
                (-(f[1][0] as i64)).rem_euclid(m) as usize,
                (-(f[1][1] as i64)).rem_euclid(m) as usize,
            ],
        ];
        let jp = DisplacementIndex::new(ctx, p[0] as i64, -(p[1] as i64));
        let c = displacement(ctx, &jp).mul(&metaplectic(ctx, &jf)?);
        Ok(CliffordElement {
            matrix: c.conj(),
            antiunitary: true,
        })
    }
}

/// Zauner's unitary: entries e^{i xi} tau^{2jk + j^2} / sqrt(d) with
/// xi = pi (d-1)/12, which makes Z^3 = I.
pub fn zauner_matrix(ctx: &DimensionContext) -> CMat {
    let d = ctx.d();
    let xi = C64::from_polar(1.0, PI * (d as f64 - 1.0) / 12.0);
    let scale = 1.0 / (d as f64).sqrt();
    CMat::from_fn(d, |j, k| {
        xi * ctx.tau_pow(2 * (j as i64) * (k as i64) + (j as i64) * (j as i64)) * scale
    })
}

/// dim Z_k = floor((d + 3 - 2k)/3).
pub fn zauner_dim(d: usize, k: usize) -> usize {
    (d + 3 - 2 * k) / 3
}

/// Orthonormal basis of the e^{2 pi i k/3} eigenspace of Z, built by
/// projector averaging with the rank fixed by the dimension formula.
pub fn zauner_eigenspace(ctx: &DimensionContext, k: usize) -> Subspace {
    assert!(k < 3);
    let d = ctx.d();
    let z = zauner_matrix(ctx);
    let z2 = z.mul(&z);
    let w1 = C64::from_polar(1.0, -2.0 * PI * k as f64 / 3.0);
    let w2 = C64::from_polar(1.0, -4.0 * PI * k as f64 / 3.0);
    let third = C64::new(1.0 / 3.0, 0.0);
    let proj = CMat::from_fn(d, |i, j| {
        let idm = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
        third * (idm + w1 * z.get(i, j) + w2 * z2.get(i, j))
    });
    let cols: Vec<Vec<C64>> = (0..d).map(|j| (0..d).map(|i| proj.get(i, j)).collect()).collect();
    let basis = orthonormalize_rank(&cols, zauner_dim(d, k));
    Subspace {
        basis,
        real_structure: false,
    }
}

/// The named symmetry matrices of the solution tables.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NamedSymmetry {
    /// order-3 unitary, every dimension
    Fz,
    /// order-3 unitary, d = 3 mod 9
    Fa,
    /// order-2 permutation, d = k^2 - 1
    Fb,
    /// order-2 antiunitary, d = (3k +- 1)^2 + 3
    Fc,
}

pub fn named_symmetry(ctx: &DimensionContext, which: NamedSymmetry) -> Result<SymplecticIndex> {
    let d = ctx.d() as i64;
    let m = ctx.dbar();
    match which {
        NamedSymmetry::Fz => SymplecticIndex::new(m, [[0, d - 1], [d + 1, d - 1]], [0, 0]),
        NamedSymmetry::Fa => {
            if ctx.d() < 3 || ctx.d() % 9 != 3 {
                return Err(SicError::SymmetryUnavailable {
                    name: "Fa",
                    d: ctx.d(),
                    requirement: "d = 3 mod 9",
                });
            }
            let k = (d - 3) / 9;
            SymplecticIndex::new(m, [[1, d + 3], [d + 3 * k, d - 2]], [0, 0])
        }
        NamedSymmetry::Fb => {
            let t = (ctx.d() as f64 + 1.0).sqrt().round() as i64;
            if t * t != d + 1 {
                return Err(SicError::SymmetryUnavailable {
                    name: "Fb",
                    d: ctx.d(),
                    requirement: "d = k^2 - 1 for an integer k",
                });
            }
            SymplecticIndex::new(m, [[-t, d], [d, d - t]], [0, 0])
        }
        NamedSymmetry::Fc => {
            let mut found = None;
            for k in 0..=d {
                for s in [1i64, -1] {
                    if (3 * k + s) * (3 * k + s) + 3 == d {
                        found = Some(3 * k * k + s * k + 1);
                    }
                }
            }
            let kappa = found.ok_or(SicError::SymmetryUnavailable {
                name: "Fc",
                d: ctx.d(),
                requirement: "d = (3k +- 1)^2 + 3 for an integer k",
            })?;
            let g = SymplecticIndex::new(
                m,
                [[kappa, d - 2 * kappa], [d + 2 * kappa, d - kappa]],
                [0, 0],
            )?;
            debug_assert_eq!(g.det_sign(), -1);
            Ok(g)
        }
    }
}

/// Canonical order-3 test: tr(F) = -1 mod d, F != I mod d, unitary branch.
pub fn is_canonical_order3(ctx: &DimensionContext, g: &SymplecticIndex) -> bool {
    if g.det_sign() != 1 {
        return false;
    }
    let d = ctx.d() as i64;
    let f = g.matrix();
    let tr = (f[0][0] as i64 + f[1][1] as i64).rem_euclid(d);
    if tr != (-1i64).rem_euclid(d) {
        return false;
    }
    let is_id_mod_d = f[0][0] as i64 % d == 1 % d
        && f[1][1] as i64 % d == 1 % d
        && f[0][1] as i64 % d == 0
        && f[1][0] as i64 % d == 0;
    !is_id_mod_d
}

/// (|PC(d)|, |PEC(d)|) with |PC(d)| = d^5 prod_{p | d} (1 - p^{-2}),
/// evaluated exactly over the integer factorization of d.
pub fn group_orders(d: usize) -> Result<(u128, u128)> {
    if d == 0 {
        return Err(SicError::InvalidDimension(0));
    }
    let mut pc: u128 = (d as u128).pow(5);
    let mut n = d;
    let mut p = 2;
    while p * p <= n {
        if n % p == 0 {
            let pp = (p * p) as u128;
            pc = pc / pp * (pp - 1);
            while n % p == 0 {
                n /= p;
            }
        }
        p += 1;
    }
    if n > 1 {
        let pp = (n * n) as u128;
        pc = pc / pp * (pp - 1);
    }
    Ok((pc, 2 * pc))
}

/// The three kernel generators of the C map for even d.
pub fn kernel_generators(ctx: &DimensionContext) -> Vec<SymplecticIndex> {
    let d = ctx.d() as i64;
    let m = ctx.dbar();
    if ctx.d() % 2 == 1 {
        return vec![];
    }
    vec![
        SymplecticIndex::new(m, [[1 + d, 0], [0, 1 + d]], [0, 0]).unwrap(),
        SymplecticIndex::new(m, [[1, d], [0, 1]], [d / 2, 0]).unwrap(),
        SymplecticIndex::new(m, [[1, 0], [d, 1]], [0, d / 2]).unwrap(),
    ]
}

/// Full kernel of the E map as a subgroup of ec(dbar): closure of the
/// generators (order 32 for even d, trivial for odd d).
pub fn kernel_classes(ctx: &DimensionContext) -> Vec<SymplecticIndex> {
    let mut set = vec![SymplecticIndex::identity(ctx.dbar())];
    let gens = kernel_generators(ctx);
    loop {
        let mut grew = false;
        let current = set.clone();
        for a in &current {
            for g in &gens {
                let prod = a.pair_mul(g).unwrap();
                if !set.contains(&prod) {
                    set.push(prod);
                    grew = true;
                }
            }
        }
        if !grew {
            break;
        }
    }
    set
}

/// Report of the even-d kernel consistency check.
#[derive(Clone, Debug)]
pub struct KernelReport {
    pub deviations: Vec<f64>,
    pub failures: Vec<usize>,
    pub kernel_order: usize,
}

impl KernelReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks that each kernel generator maps under the E map to phase * I.
pub fn kernel_check(ctx: &DimensionContext) -> Result<KernelReport> {
    if ctx.d() % 2 != 0 {
        return Err(SicError::SymmetryUnavailable {
            name: "kernel",
            d: ctx.d(),
            requirement: "even d",
        });
    }
    let d = ctx.d();
    let mut deviations = Vec::new();
    let mut failures = Vec::new();
    for (i, g) in kernel_generators(ctx).iter().enumerate() {
        let e = clifford_element(ctx, g)?;
        let phase = e.matrix.trace() / d as f64;
        let dev = e.matrix.max_abs_diff(&CMat::identity(d).scale(phase));
        let dev = dev.max((phase.norm() - 1.0).abs());
        if dev >= 1e-11 {
            failures.push(i);
        }
        deviations.push(dev);
    }
    Ok(KernelReport {
        deviations,
        failures,
        kernel_order: kernel_classes(ctx).len(),
    })
}

/// All F in SL2(Z_m) (or ESL2 when antisymplectic matrices are included).
pub fn enumerate_symplectic(m: usize, include_antisymplectic: bool) -> Vec<[[usize; 2]; 2]> {
    let mi = m as i64;
    let mut out = Vec::new();
    for a in 0..m {
        for b in 0..m {
            for c in 0..m {
                for e in 0..m {
                    let det = (a as i64 * e as i64 - b as i64 * c as i64).rem_euclid(mi);
                    if det == 1 % mi || (include_antisymplectic && det == (mi - 1) % mi) {
                        out.push([[a, b], [c, e]]);
                    }
                }
            }
        }
    }
    out
}

/// Generic eigenspace restriction for a Clifford element of finite projective
/// order. For the Zauner pair the dedicated eigenspace routine is used so the
/// branch labels line up with the Z_k convention.
pub fn symmetry_eigenspace(
    ctx: &DimensionContext,
    g: &SymplecticIndex,
    k: usize,
) -> Result<Subspace> {
    let fz = named_symmetry(ctx, NamedSymmetry::Fz)?;
    if *g == fz {
        assert!(k < 3);
        return Ok(zauner_eigenspace(ctx, k));
    }
    let kernel = kernel_classes(ctx);
    let order = g.projective_order(&kernel);
    let elem = clifford_element(ctx, g)?;
    let d = ctx.d();
    if !elem.antiunitary {
        // E^order = e^{i chi} I; branch eigenvalues e^{i chi/order} e^{2 pi i k/order}
        let mut power = CMat::identity(d);
        let mut powers = vec![power.clone()];
        for _ in 1..order {
            power = elem.matrix.mul(&power);
            powers.push(power.clone());
        }
        let top = elem.matrix.mul(&power);
        let chi = (top.trace() / d as f64).arg();
        let mu = C64::from_polar(1.0, chi / order as f64 + 2.0 * PI * k as f64 / order as f64);
        let mut proj = CMat::zeros(d);
        for (n, pw) in powers.iter().enumerate() {
            let w = mu.powi(-(n as i32)) / order as f64;
            for i in 0..d {
                for j in 0..d {
                    proj.set(i, j, proj.get(i, j) + w * pw.get(i, j));
                }
            }
        }
        let cols: Vec<Vec<C64>> = (0..d)
            .map(|j| (0..d).map(|i| proj.get(i, j)).collect())
            .collect();
        let basis = orthonormal_threshold(&cols, 1e-8);
        Ok(Subspace {
            basis,
            real_structure: false,
        })
    } else {
        // antiunitary involution: fixed set is a real form when M conj(M) = +I
        let mconj = elem.matrix.mul(&elem.matrix.conj());
        let phase = mconj.trace() / d as f64;
        if mconj.max_abs_diff(&CMat::identity(d).scale(phase)) > 1e-10 {
            return Err(SicError::Internal(
                "antiunitary element does not square to a phase".into(),
            ));
        }
        if (phase - C64::new(1.0, 0.0)).norm() > 1e-10 {
            // quaternionic case: no fixed vectors
            return Ok(Subspace {
                basis: vec![],
                real_structure: true,
            });
        }
        let mut candidates: Vec<Vec<C64>> = Vec::with_capacity(2 * d);
        for j in 0..d {
            let col: Vec<C64> = (0..d).map(|i| elem.matrix.get(i, j)).collect();
            let mut v1 = col.clone();
            v1[j] += 1.0;
            let v2: Vec<C64> = (0..d)
                .map(|i| {
                    let e = if i == j { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) };
                    C64::new(0.0, 1.0) * (e - col[i])
                })
                .collect();
            candidates.push(v1);
            candidates.push(v2);
        }
        // fixed vectors have pairwise real inner products, so real
        // Gram-Schmidt also yields complex orthonormality
        let mut basis: Vec<Vec<C64>> = Vec::new();
        for cand in candidates {
            let mut v = cand;
            for _ in 0..2 {
                for b in &basis {
                    let c: f64 = b
                        .iter()
                        .zip(&v)
                        .map(|(x, y)| (x.conj() * y).re)
                        .sum();
                    for (x, y) in v.iter_mut().zip(b) {
                        *x -= c * y;
                    }
                }
            }
            let n = norm(&v);
            if n > 1e-8 {
                basis.push(v.iter().map(|z| z / n).collect());
            }
            if basis.len() == d {
                break;
            }
        }
        Ok(Subspace {
            basis,
            real_structure: true,
        })
    }
}

fn orthonormal_threshold(candidates: &[Vec<C64>], tol: f64) -> Vec<Vec<C64>> {
    let mut basis: Vec<Vec<C64>> = Vec::new();
    let mut residuals: Vec<Vec<C64>> = candidates.to_vec();
    loop {
        let best = residuals
            .iter()
            .enumerate()
            .map(|(i, v)| (i, norm(v)))
            .max_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((i, n)) if n > tol => {
                let mut v = residuals.swap_remove(i);
                for _ in 0..2 {
                    for b in &basis {
                        let c = inner(b, &v);
                        for (x, y) in v.iter_mut().zip(b) {
                            *x -= c * y;
                        }
                    }
                }
                let n = norm(&v);
                if n <= tol {
                    continue;
                }
                let v: Vec<C64> = v.iter().map(|z| z / n).collect();
                for r in residuals.iter_mut() {
                    let c = inner(&v, r);
                    for (x, y) in r.iter_mut().zip(&v) {
                        *x -= c * y;
                    }
                }
                basis.push(v);
            }
            _ => break,
        }
    }
    basis
}
