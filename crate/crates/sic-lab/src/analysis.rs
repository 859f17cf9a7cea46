//! Verification and classification: equiangularity checks, t-design defects,
//! tomographic reconstruction, stabilizer computation, Zauner-eigenspace
//! classification, realness tests, triple-product fingerprints, orbit
//! equivalence and the randomized census with its stopping rule.

use num_complex::Complex64 as C64;
use sha2::{Digest, Sha256};
use std::collections::HashMap;
use std::f64::consts::PI;

use crate::clifford::{
    clifford_element, enumerate_symplectic, is_canonical_order3, kernel_classes, metaplectic,
    named_symmetry, zauner_matrix, ClassKey, NamedSymmetry, SymplecticIndex,
};
use crate::error::{Result, SicError};
use crate::linalg::{conj_vec, inner, normalize, CMat};
use crate::search::{run_search, sic_cost, welch_bound, SearchConfig};
use crate::whgroup::{
    displace_vec, overlap_table, DimensionContext, DisplacementIndex, FiducialVector,
};

/// Cutoff for exhaustive extended-Clifford enumeration (|PEC(15)| is about
/// 1.3M classes; beyond that the scans stop being desk-scale).
pub const EXHAUSTIVE_CUTOFF: usize = 15;

/// How well phi's orbit does as a SIC: overlap deviation against the
/// (d delta + 1)/(d+1) target, cost gap, 1- and 2-design defects of the full
/// orbit, and the tomographic self-reconstruction error.
#[derive(Clone, Debug)]
pub struct VerificationReport {
    pub max_overlap_deviation: f64,
    pub cost_gap: f64,
    pub design_defect_t1: f64,
    pub design_defect_t2: f64,
    pub inversion_error: f64,
    pub tol: f64,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.max_overlap_deviation < self.tol
    }
}

fn orbit_states(ctx: &DimensionContext, phi: &FiducialVector) -> Vec<Vec<C64>> {
    let d = ctx.d();
    let mut states = Vec::with_capacity(d * d);
    for p1 in 0..d {
        for p2 in 0..d {
            states.push(displace_vec(
                ctx,
                &DisplacementIndex::new(ctx, p1 as i64, p2 as i64),
                phi.entries(),
            ));
        }
    }
    states
}

fn max_overlap_deviation(ctx: &DimensionContext, phi: &FiducialVector) -> f64 {
    let target = 1.0 / (ctx.d() as f64 + 1.0);
    overlap_table(ctx, phi)
        .iter()
        .skip(1)
        .map(|z| (z.norm_sqr() - target).abs())
        .fold(0.0, f64::max)
}

fn require_fiducial(ctx: &DimensionContext, phi: &FiducialVector, tol: f64) -> Result<()> {
    let deviation = max_overlap_deviation(ctx, phi);
    if deviation >= tol {
        return Err(SicError::NotFiducial { deviation, tol });
    }
    Ok(())
}

pub fn verify_sic(ctx: &DimensionContext, phi: &FiducialVector, tol: f64) -> VerificationReport {
    let d = ctx.d();
    let orbit = orbit_states(ctx, phi);
    let rho = CMat::from_fn(d, |i, j| phi.entries()[i] * phi.entries()[j].conj());
    let inversion_error = reconstruction_error(ctx, phi, &rho);
    VerificationReport {
        max_overlap_deviation: max_overlap_deviation(ctx, phi),
        cost_gap: sic_cost(ctx, phi) - 2.0 / (d as f64 + 1.0),
        design_defect_t1: tdesign_defect(&orbit, 1),
        design_defect_t2: tdesign_defect(&orbit, 2),
        inversion_error,
        tol,
    }
}

/// Average 2t-th overlap power of the point set minus the Welch bound
/// 1/C(d+t-1, t); zero exactly for t-designs.
pub fn tdesign_defect(states: &[Vec<C64>], t: usize) -> f64 {
    assert!(!states.is_empty() && t >= 1);
    let d = states[0].len();
    let n = states.len();
    let mut sum = 0.0;
    for a in states {
        for b in states {
            sum += inner(a, b).norm_sqr().powi(t as i32);
        }
    }
    sum / (n * n) as f64 - welch_bound(d, t)
}

fn reconstruction_error(ctx: &DimensionContext, phi: &FiducialVector, rho: &CMat) -> f64 {
    let d = ctx.d();
    // rho = (d+1)/d sum_p tr(Pi_p rho) Pi_p - I over the d^2 orbit projectors
    let mut recon = CMat::zeros(d);
    for x in orbit_states(ctx, phi) {
        let rx = rho.apply(&x);
        let q = inner(&x, &rx).re;
        let w = q * (d as f64 + 1.0) / d as f64;
        for i in 0..d {
            for j in 0..d {
                recon.set(i, j, recon.get(i, j) + w * x[i] * x[j].conj());
            }
        }
    }
    for i in 0..d {
        recon.set(i, i, recon.get(i, i) - 1.0);
    }
    recon.frobenius_dist(rho)
}

/// Frobenius error of the state-inversion reconstruction of `rho` from its
/// SIC outcome probabilities.
pub fn state_inversion_check(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    rho: &CMat,
) -> Result<f64> {
    require_fiducial(ctx, phi, 1e-8)?;
    let d = ctx.d();
    if rho.n() != d {
        return Err(SicError::NotDensityMatrix("wrong dimension"));
    }
    if rho.max_abs_diff(&rho.adjoint()) > 1e-10 {
        return Err(SicError::NotDensityMatrix("not Hermitian"));
    }
    if (rho.trace() - C64::new(1.0, 0.0)).norm() > 1e-10 {
        return Err(SicError::NotDensityMatrix("trace is not 1"));
    }
    if crate::linalg::hermitian_eigenvalues(rho)
        .iter()
        .any(|&l| l < -1e-10)
    {
        return Err(SicError::NotDensityMatrix("not positive semidefinite"));
    }
    Ok(reconstruction_error(ctx, phi, rho))
}

/// How a stabilizer was obtained.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StabilizerStrategy {
    /// Scan every class of PEC(d); complete, d <= 15 only.
    Exhaustive,
    /// Test powers of the named symmetries (all translations) plus the given
    /// extra elements; a lower bound on the true stabilizer beyond d = 15.
    Targeted(Vec<SymplecticIndex>),
}

#[derive(Clone, Debug)]
pub struct StabilizerRecord {
    pub order: usize,
    pub generators: Vec<SymplecticIndex>,
    pub strategy: StabilizerStrategy,
}

/// |<phi|E psi>| for the element [F|p], given w = V_F psi (unitary) or
/// w = V_{JF} psi (antiunitary: the stored operator is conj(D_{Jp} V_{JF}),
/// and applying it to conj(psi) collapses to conj(D_{Jp} V_{JF} psi)).
fn fix_amplitude(
    ctx: &DimensionContext,
    phi_conj: &[C64],
    phi: &FiducialVector,
    f_sign: i8,
    p: [i64; 2],
    w: &[C64],
) -> f64 {
    if f_sign >= 0 {
        let moved = displace_vec(ctx, &DisplacementIndex::new(ctx, p[0], p[1]), w);
        inner(phi.entries(), &moved).norm()
    } else {
        // E phi = conj(D_{Jp} w) => <phi|E phi> = conj(<conj(phi)|D_{Jp} w>)
        let jp = DisplacementIndex::new(ctx, p[0], -p[1]);
        let moved = displace_vec(ctx, &jp, w);
        inner(phi_conj, &moved).norm()
    }
}

/// Per-F cached vector for the amplitude test above.
fn cached_action(
    ctx: &DimensionContext,
    f: &[[usize; 2]; 2],
    sign: i8,
    phi: &FiducialVector,
) -> Result<Vec<C64>> {
    if sign >= 0 {
        Ok(metaplectic(ctx, f)?.apply(phi.entries()))
    } else {
        let m = ctx.dbar() as i64;
        let jf = [
            [f[0][0], f[0][1]],
            [
                (-(f[1][0] as i64)).rem_euclid(m) as usize,
                (-(f[1][1] as i64)).rem_euclid(m) as usize,
            ],
        ];
        Ok(metaplectic(ctx, &jf)?.apply(phi.entries()))
    }
}

fn matrix_sign(f: &[[usize; 2]; 2], m: usize) -> Option<i8> {
    let det = (f[0][0] as i64 * f[1][1] as i64 - f[0][1] as i64 * f[1][0] as i64)
        .rem_euclid(m as i64) as usize;
    if det == 1 % m {
        Some(1)
    } else if det == m - 1 {
        Some(-1)
    } else {
        None
    }
}

/// The projective extended-Clifford stabilizer of the fiducial projector:
/// classes [F|p] with |<phi|E phi>| > 1 - 1e-9.
pub fn stabilizer(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    strategy: StabilizerStrategy,
) -> Result<StabilizerRecord> {
    require_fiducial(ctx, phi, 1e-8)?;
    let d = ctx.d();
    let m = ctx.dbar();
    let kernel = kernel_classes(ctx);
    let phi_conj = conj_vec(phi.entries());

    let mut hits: HashMap<ClassKey, SymplecticIndex> = HashMap::new();
    let mut raw_hits = 0usize;

    let mut test_matrix = |f: &[[usize; 2]; 2], sign: i8| -> Result<()> {
        let w = cached_action(ctx, f, sign, phi)?;
        for p1 in 0..m {
            for p2 in 0..m {
                let amp = fix_amplitude(ctx, &phi_conj, phi, sign, [p1 as i64, p2 as i64], &w);
                if amp > 1.0 - 1e-9 {
                    raw_hits += 1;
                    let g = SymplecticIndex::new(
                        m,
                        [
                            [f[0][0] as i64, f[0][1] as i64],
                            [f[1][0] as i64, f[1][1] as i64],
                        ],
                        [p1 as i64, p2 as i64],
                    )?;
                    hits.entry(g.class_key(&kernel)).or_insert(g);
                }
            }
        }
        Ok(())
    };

    match &strategy {
        StabilizerStrategy::Exhaustive => {
            if d > EXHAUSTIVE_CUTOFF {
                return Err(SicError::ExhaustiveCutoff {
                    d,
                    cutoff: EXHAUSTIVE_CUTOFF,
                });
            }
            for f in enumerate_symplectic(m, true) {
                let sign = matrix_sign(&f, m).expect("enumerated matrices are (anti)symplectic");
                test_matrix(&f, sign)?;
            }
        }
        StabilizerStrategy::Targeted(extra) => {
            let mut candidates: Vec<SymplecticIndex> = vec![SymplecticIndex::identity(m)];
            for which in [
                NamedSymmetry::Fz,
                NamedSymmetry::Fa,
                NamedSymmetry::Fb,
                NamedSymmetry::Fc,
            ] {
                if let Ok(g) = named_symmetry(ctx, which) {
                    let order = g.projective_order(&kernel);
                    for n in 1..order {
                        candidates.push(g.pow(n));
                    }
                }
            }
            candidates.extend_from_slice(extra);
            let mut seen: Vec<[[usize; 2]; 2]> = Vec::new();
            for g in candidates {
                if seen.contains(&g.matrix()) {
                    continue;
                }
                seen.push(g.matrix());
                test_matrix(&g.matrix(), g.det_sign())?;
            }
        }
    }

    if matches!(strategy, StabilizerStrategy::Exhaustive) && raw_hits % kernel.len() != 0 {
        return Err(SicError::Internal(format!(
            "stabilizer hit count {raw_hits} not divisible by kernel order {}",
            kernel.len()
        )));
    }

    // group closure on class keys (exact, symplectic side only)
    let keys: Vec<ClassKey> = hits.keys().copied().collect();
    let reps: Vec<SymplecticIndex> = hits.values().copied().collect();
    for a in &reps {
        for b in &reps {
            let key = a.pair_mul(b)?.class_key(&kernel);
            if !hits.contains_key(&key) {
                return Err(SicError::Internal(
                    "stabilizer hits are not closed under composition".into(),
                ));
            }
        }
    }

    // greedy generating set over class keys
    let mut generators: Vec<SymplecticIndex> = Vec::new();
    let mut generated: Vec<ClassKey> =
        vec![SymplecticIndex::identity(m).class_key(&kernel)];
    let mut ordered: Vec<(ClassKey, SymplecticIndex)> =
        keys.iter().copied().zip(reps.iter().copied()).collect();
    ordered.sort_by_key(|(k, _)| *k);
    for (key, rep) in ordered {
        if generated.contains(&key) {
            continue;
        }
        generators.push(rep);
        // regenerate the closure of the current generators
        generated = vec![SymplecticIndex::identity(m).class_key(&kernel)];
        let mut frontier = vec![SymplecticIndex::identity(m)];
        while let Some(g) = frontier.pop() {
            for gen in &generators {
                let next = g.pair_mul(gen)?;
                let k = next.class_key(&kernel);
                if !generated.contains(&k) {
                    generated.push(k);
                    frontier.push(next);
                }
            }
        }
    }

    Ok(StabilizerRecord {
        order: hits.len().max(1),
        generators,
        strategy,
    })
}

/// #SICs = (|PEC(d)|/d^2) * sum_i 1/|S_i|, evaluated in exact integer
/// arithmetic; a non-integral result means the input orders are wrong.
pub fn count_sics(d: usize, stabilizer_orders: &[u64]) -> Result<u128> {
    if d == 0 {
        return Err(SicError::InvalidDimension(0));
    }
    if stabilizer_orders.iter().any(|&s| s == 0) {
        return Err(SicError::NonIntegralCount { num: 0, den: 0 });
    }
    let (_, pec) = crate::clifford::group_orders(d)?;
    fn gcd(a: u128, b: u128) -> u128 {
        if b == 0 {
            a
        } else {
            gcd(b, a % b)
        }
    }
    let mut l: u128 = 1;
    for &s in stabilizer_orders {
        let s = s as u128;
        l = l / gcd(l, s) * s;
    }
    let sum: u128 = stabilizer_orders.iter().map(|&s| l / s as u128).sum();
    let num = pec * sum;
    let den = (d * d) as u128 * l;
    if num % den != 0 {
        return Err(SicError::NonIntegralCount { num, den });
    }
    Ok(num / den)
}

/// Which Zauner eigenspace (if any) the orbit touches.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ZaunerClassification {
    pub stabilized: bool,
    /// Eigenvalue index k of the Z_k eigenspace containing the phase-aligned
    /// eigenvector, when stabilized.
    pub k: Option<u8>,
}

/// Tests whether some conjugate of [F_z|0] stabilizes the projector and, if
/// so, which eigenspace the conjugated fiducial lands in: find a canonical
/// order-3 stabilizer element g, conjugate its class onto [F_z|0] by a
/// Clifford element T, and read k off the Z-eigenvalue of T phi.
pub fn zauner_class(ctx: &DimensionContext, phi: &FiducialVector) -> Result<ZaunerClassification> {
    require_fiducial(ctx, phi, 1e-8)?;
    let d = ctx.d();
    if d > EXHAUSTIVE_CUTOFF {
        return Err(SicError::ExhaustiveCutoff {
            d,
            cutoff: EXHAUSTIVE_CUTOFF,
        });
    }
    let m = ctx.dbar();
    let mi = m as i64;
    let kernel = kernel_classes(ctx);
    let fz = named_symmetry(ctx, NamedSymmetry::Fz)?;
    let fz_key = fz.class_key(&kernel);
    let phi_conj = conj_vec(phi.entries());

    // matrix parts reachable inside a kernel class
    let kernel_mats: Vec<[[usize; 2]; 2]> = {
        let mut v: Vec<_> = kernel.iter().map(|g| g.matrix()).collect();
        v.dedup();
        v
    };

    // canonical order-3 stabilizer elements
    let mut candidates: Vec<SymplecticIndex> = Vec::new();
    for f in enumerate_symplectic(m, false) {
        let probe = SymplecticIndex::new(
            m,
            [
                [f[0][0] as i64, f[0][1] as i64],
                [f[1][0] as i64, f[1][1] as i64],
            ],
            [0, 0],
        )?;
        if !is_canonical_order3(ctx, &probe) {
            continue;
        }
        let w = cached_action(ctx, &f, 1, phi)?;
        for p1 in 0..m {
            for p2 in 0..m {
                if fix_amplitude(ctx, &phi_conj, phi, 1, [p1 as i64, p2 as i64], &w) > 1.0 - 1e-9 {
                    candidates.push(SymplecticIndex::new(
                        m,
                        [
                            [f[0][0] as i64, f[0][1] as i64],
                            [f[1][0] as i64, f[1][1] as i64],
                        ],
                        [p1 as i64, p2 as i64],
                    )?);
                }
            }
        }
    }
    if candidates.is_empty() {
        return Ok(ZaunerClassification {
            stabilized: false,
            k: None,
        });
    }

    let fzm = fz.matrix();
    for g in &candidates {
        // conjugators G with G F G^{-1} = (kernel matrix) * F_z
        let f = g.matrix();
        for a in 0..m {
            for b in 0..m {
                for c in 0..m {
                    for e in 0..m {
                        let det = (a as i64 * e as i64 - b as i64 * c as i64).rem_euclid(mi);
                        if det != 1 % mi {
                            continue;
                        }
                        // G F == K Fz G for some kernel matrix part K
                        let gf = [
                            [
                                (a * f[0][0] + b * f[1][0]) % m,
                                (a * f[0][1] + b * f[1][1]) % m,
                            ],
                            [
                                (c * f[0][0] + e * f[1][0]) % m,
                                (c * f[0][1] + e * f[1][1]) % m,
                            ],
                        ];
                        let matches_kernel = kernel_mats.iter().any(|k| {
                            let kfz = [
                                [
                                    (k[0][0] * fzm[0][0] + k[0][1] * fzm[1][0]) % m,
                                    (k[0][0] * fzm[0][1] + k[0][1] * fzm[1][1]) % m,
                                ],
                                [
                                    (k[1][0] * fzm[0][0] + k[1][1] * fzm[1][0]) % m,
                                    (k[1][0] * fzm[0][1] + k[1][1] * fzm[1][1]) % m,
                                ],
                            ];
                            let kfzg = [
                                [
                                    (kfz[0][0] * a + kfz[0][1] * c) % m,
                                    (kfz[0][0] * b + kfz[0][1] * e) % m,
                                ],
                                [
                                    (kfz[1][0] * a + kfz[1][1] * c) % m,
                                    (kfz[1][0] * b + kfz[1][1] * e) % m,
                                ],
                            ];
                            gf == kfzg
                        });
                        if !matches_kernel {
                            continue;
                        }
                        for t1 in 0..m {
                            for t2 in 0..m {
                                let t = SymplecticIndex::new(
                                    m,
                                    [[a as i64, b as i64], [c as i64, e as i64]],
                                    [t1 as i64, t2 as i64],
                                )?;
                                let conj =
                                    t.pair_mul(g)?.pair_mul(&t.inverse())?.class_key(&kernel);
                                if conj != fz_key {
                                    continue;
                                }
                                let e_t = clifford_element(ctx, &t)?;
                                let psi = normalize(&e_t.apply(phi.entries()));
                                let z = zauner_matrix(ctx);
                                let lambda = inner(&psi, &z.apply(&psi));
                                if lambda.norm() < 0.9 {
                                    continue; // not an eigenvector; wrong branch
                                }
                                let k = ((lambda.arg() * 3.0 / (2.0 * PI)).round() as i64)
                                    .rem_euclid(3) as u8;
                                return Ok(ZaunerClassification {
                                    stabilized: true,
                                    k: Some(k),
                                });
                            }
                        }
                    }
                }
            }
        }
    }
    // canonical order-3 symmetry exists, but none of them is conjugate to Fz
    Ok(ZaunerClassification {
        stabilized: false,
        k: None,
    })
}

fn is_real_up_to_phase(v: &[C64], tol: f64) -> bool {
    let (mut best, mut mag) = (C64::new(1.0, 0.0), 0.0);
    for z in v {
        if z.norm() > mag {
            mag = z.norm();
            best = *z;
        }
    }
    if mag == 0.0 {
        return true;
    }
    let phase = best.conj() / best.norm();
    v.iter().all(|z| (z * phase).im.abs() < tol)
}

/// True iff some global phase makes every component real (within 1e-10).
pub fn realness_check(_ctx: &DimensionContext, phi: &FiducialVector) -> bool {
    is_real_up_to_phase(phi.entries(), 1e-10)
}

/// Whether any state in the full extended-Clifford orbit is real up to a
/// global phase. Exhaustive over PEC classes; d <= 8 only.
pub fn orbit_contains_real(ctx: &DimensionContext, phi: &FiducialVector) -> Result<bool> {
    require_fiducial(ctx, phi, 1e-8)?;
    let d = ctx.d();
    if d > 8 {
        return Err(SicError::ExhaustiveCutoff { d, cutoff: 8 });
    }
    let m = ctx.dbar();
    for f in enumerate_symplectic(m, true) {
        let sign = matrix_sign(&f, m).expect("enumerated matrices are (anti)symplectic");
        let w = cached_action(ctx, &f, sign, phi)?;
        for p1 in 0..m {
            for p2 in 0..m {
                // the state E phi; realness is conjugation-invariant, so the
                // antiunitary branch can drop its outer conjugation
                let p = if sign >= 0 {
                    DisplacementIndex::new(ctx, p1 as i64, p2 as i64)
                } else {
                    DisplacementIndex::new(ctx, p1 as i64, -(p2 as i64))
                };
                let state = displace_vec(ctx, &p, &w);
                if is_real_up_to_phase(&state, 1e-10) {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Sorted multiset of triple products over the orbit's difference pairs.
/// The products depend only on the displacement differences (a, b), and the
/// full difference multiset is permuted by the unitary Clifford action and
/// conjugated by the antiunitary one, which is what makes it an orbit
/// invariant. Values are stored as (re, im), sorted lexicographically, and
/// truncated to `subset_size`. Comparison is by multiset matching rather
/// than elementwise: most triple products of a SIC share the same modulus,
/// so any sort order among them is decided by floating-point noise.
#[derive(Clone, Debug)]
pub struct OrbitFingerprint {
    pub values: Vec<(f64, f64)>,
    pub tolerance: f64,
}

impl OrbitFingerprint {
    /// The image of the fingerprint under the antiunitary action.
    pub fn conjugated(&self) -> Self {
        let mut values: Vec<(f64, f64)> =
            self.values.iter().map(|&(re, im)| (re, -im)).collect();
        values.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
        OrbitFingerprint {
            values,
            tolerance: self.tolerance,
        }
    }

    /// Worst matched pair over a greedy nearest-neighbour matching of the two
    /// multisets; infinite when some value has no partner within the search
    /// window. Values whose real parts differ by more than the window are
    /// never candidates, which keeps the scan local in the sorted lists.
    pub fn distance(&self, other: &Self) -> f64 {
        if self.values.len() != other.values.len() {
            return f64::INFINITY;
        }
        let window = self.tolerance.max(other.tolerance).max(1e-6);
        let n = self.values.len();
        let mut used = vec![false; n];
        let mut lo = 0usize;
        let mut worst = 0.0f64;
        for &(re, im) in &self.values {
            while lo < n && (used[lo] || other.values[lo].0 < re - window) {
                lo += 1;
            }
            let mut best: Option<(usize, f64)> = None;
            let mut j = lo;
            while j < n && other.values[j].0 <= re + window {
                if !used[j] {
                    let (ore, oim) = other.values[j];
                    let dist = ((re - ore).powi(2) + (im - oim).powi(2)).sqrt();
                    if dist <= window && best.map_or(true, |(_, b)| dist < b) {
                        best = Some((j, dist));
                    }
                }
                j += 1;
            }
            match best {
                Some((j, dist)) => {
                    used[j] = true;
                    worst = worst.max(dist);
                }
                None => return f64::INFINITY,
            }
        }
        worst
    }

    /// Hex digest for catalog records: values rounded to 1e-8 first.
    pub fn digest(&self) -> String {
        let mut hasher = Sha256::new();
        for &(re, im) in &self.values {
            hasher.update(((re / 1e-8).round() as i64).to_le_bytes());
            hasher.update(((im / 1e-8).round() as i64).to_le_bytes());
        }
        let out = hasher.finalize();
        out.iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn triple_fingerprint(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    subset_size: usize,
) -> Result<OrbitFingerprint> {
    require_fiducial(ctx, phi, 1e-8)?;
    let d = ctx.d();
    let m = ctx.dbar();
    // overlaps t_p = <x_0|x_p> over the full index group Z_dbar^2: for even d
    // the difference of two [0,d)^2 representatives can leave that window,
    // and D_{p+(d,0)} differs from D_p by a sign
    let t: Vec<C64> = {
        let mut t = Vec::with_capacity(m * m);
        for p1 in 0..m {
            for p2 in 0..m {
                t.push(crate::whgroup::overlap(
                    ctx,
                    phi,
                    &DisplacementIndex::new(ctx, p1 as i64, p2 as i64),
                ));
            }
        }
        t
    };
    // <x_a|x_b> = tau^{a1 b2 - a2 b1} t_{b-a}: from D_{-a} D_b = tau^{<-a,b>} D_{b-a}
    let pair = |a: (usize, usize), b: (usize, usize)| -> C64 {
        let e = a.0 as i64 * b.1 as i64 - a.1 as i64 * b.0 as i64;
        let diff = DisplacementIndex::new(ctx, b.0 as i64 - a.0 as i64, b.1 as i64 - a.1 as i64);
        ctx.tau_pow(e) * t[diff.p1 * m + diff.p2]
    };
    let mut values: Vec<(f64, f64)> = Vec::with_capacity(d * d * d * d);
    for a1 in 0..d {
        for a2 in 0..d {
            for b1 in 0..d {
                for b2 in 0..d {
                    let a = (a1, a2);
                    let ab = ((a1 + b1) % d, (a2 + b2) % d);
                    let c = pair((0, 0), a) * pair(a, ab) * pair(ab, (0, 0));
                    values.push((c.re, c.im));
                }
            }
        }
    }
    values.sort_by(|x, y| x.partial_cmp(y).expect("finite"));
    values.truncate(subset_size);
    Ok(OrbitFingerprint {
        values,
        tolerance: 1e-8,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum OrbitVerdict {
    Same,
    Different,
    Inconclusive,
}

/// Exhaustive test for an extended-Clifford element mapping phi onto psi's
/// projector.
fn clifford_map_exists(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    psi: &FiducialVector,
    tol: f64,
) -> Result<bool> {
    let m = ctx.dbar();
    let psi_conj = conj_vec(psi.entries());
    for f in enumerate_symplectic(m, true) {
        let sign = matrix_sign(&f, m).expect("enumerated matrices are (anti)symplectic");
        let w = cached_action(ctx, &f, sign, phi)?;
        for p1 in 0..m {
            for p2 in 0..m {
                let amp = if sign >= 0 {
                    let moved =
                        displace_vec(ctx, &DisplacementIndex::new(ctx, p1 as i64, p2 as i64), &w);
                    inner(psi.entries(), &moved).norm()
                } else {
                    let jp = DisplacementIndex::new(ctx, p1 as i64, -(p2 as i64));
                    let moved = displace_vec(ctx, &jp, &w);
                    inner(&psi_conj, &moved).norm()
                };
                if amp > 1.0 - tol {
                    return Ok(true);
                }
            }
        }
    }
    Ok(false)
}

/// Are two fiducials on the same extended-Clifford orbit? Fingerprints that
/// disagree settle it immediately; matching fingerprints are confirmed by the
/// exhaustive mapping test for d <= 10 and reported inconclusive beyond.
pub fn orbits_equivalent(
    ctx: &DimensionContext,
    phi: &FiducialVector,
    psi: &FiducialVector,
    tol: f64,
) -> Result<OrbitVerdict> {
    require_fiducial(ctx, phi, 1e-8)?;
    require_fiducial(ctx, psi, 1e-8)?;
    let fp = triple_fingerprint(ctx, phi, usize::MAX)?;
    let fq = triple_fingerprint(ctx, psi, usize::MAX)?;
    let dist = fp.distance(&fq).min(fp.conjugated().distance(&fq));
    if dist > tol.max(1e-8) {
        return Ok(OrbitVerdict::Different);
    }
    if ctx.d() > 10 {
        return Ok(OrbitVerdict::Inconclusive);
    }
    if clifford_map_exists(ctx, phi, psi, tol.max(1e-6))? {
        Ok(OrbitVerdict::Same)
    } else {
        Ok(OrbitVerdict::Different)
    }
}

/// One orbit the census found.
#[derive(Clone, Debug)]
pub struct CensusOrbit {
    pub representative: FiducialVector,
    pub stabilizer_order: usize,
    pub hits: usize,
}

#[derive(Clone, Debug)]
pub struct CensusReport {
    pub d: usize,
    pub orbits: Vec<CensusOrbit>,
    pub trials: usize,
    pub solutions: usize,
}

/// Randomized census of fiducial orbits: keep searching from Haar-random
/// starts until 30(n+1) consecutive solutions land in already-known orbits
/// (missing-orbit probability then below e^{-30}).
pub fn census(ctx: &DimensionContext, base_config: &SearchConfig) -> Result<CensusReport> {
    let d = ctx.d();
    if d == 3 {
        return Err(SicError::ContinuousFamily);
    }
    if d > 10 {
        return Err(SicError::CensusTooLarge(d));
    }

    let mut orbits: Vec<CensusOrbit> = Vec::new();
    let mut consecutive_known = 0usize;
    let mut trials = 0usize;
    let mut solutions = 0usize;
    let batch = 16usize;

    for round in 0.. {
        let needed = 30 * (orbits.len() + 1);
        if consecutive_known >= needed {
            break;
        }
        let mut config = base_config.clone();
        config.d = d;
        config.subspace = None;
        config.restarts = batch;
        // fresh, deterministic stream block per round
        config.seed = base_config.seed.wrapping_add(round as u64);
        let outcomes = run_search(ctx, &config)?;
        trials += batch;
        for outcome in outcomes {
            if !outcome.converged {
                continue;
            }
            if max_overlap_deviation(ctx, &outcome.fiducial) >= 1e-9 {
                continue; // polish failed to reach the verification gate
            }
            solutions += 1;
            let mut known = false;
            for orbit in orbits.iter_mut() {
                if orbits_equivalent(ctx, &orbit.representative, &outcome.fiducial, 1e-6)?
                    == OrbitVerdict::Same
                {
                    orbit.hits += 1;
                    known = true;
                    break;
                }
            }
            if known {
                consecutive_known += 1;
            } else {
                let stab = stabilizer(ctx, &outcome.fiducial, StabilizerStrategy::Exhaustive)?;
                orbits.push(CensusOrbit {
                    representative: outcome.fiducial,
                    stabilizer_order: stab.order,
                    hits: 1,
                });
                consecutive_known = 0;
            }
            if consecutive_known >= 30 * (orbits.len() + 1) {
                break;
            }
        }
        if round > 5000 {
            return Err(SicError::Internal(
                "census failed to meet its stopping rule within the trial budget".into(),
            ));
        }
    }
    orbits.sort_by_key(|o| o.stabilizer_order);
    Ok(CensusReport {
        d,
        orbits,
        trials,
        solutions,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::zauner_eigenspace;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn d2_fiducial() -> FiducialVector {
        let a = ((1.0 + 1.0 / 3f64.sqrt()) / 2.0).sqrt();
        let b = ((1.0 - 1.0 / 3f64.sqrt()) / 2.0).sqrt();
        FiducialVector::new(vec![
            C64::new(a, 0.0),
            C64::from_polar(b, PI / 4.0),
        ])
        .unwrap()
    }

    fn d3_fiducial() -> FiducialVector {
        let s = 1.0 / 2f64.sqrt();
        FiducialVector::new(vec![
            C64::new(0.0, 0.0),
            C64::new(s, 0.0),
            C64::new(-s, 0.0),
        ])
        .unwrap()
    }

    fn found_fiducial(d: usize, k: usize, seed: u64) -> FiducialVector {
        let ctx = DimensionContext::new(d).unwrap();
        let mut config = SearchConfig::new(d);
        config.subspace = Some(zauner_eigenspace(&ctx, k));
        config.restarts = 24;
        config.seed = seed;
        run_search(&ctx, &config)
            .unwrap()
            .into_iter()
            .find(|o| o.converged)
            .expect("solvable dimension")
            .fiducial
    }

    #[test]
    fn verify_known_fiducials() {
        let ctx = DimensionContext::new(2).unwrap();
        let report = verify_sic(&ctx, &d2_fiducial(), 1e-10);
        assert!(report.passed(), "deviation {}", report.max_overlap_deviation);
        assert!(report.design_defect_t2 < 1e-10);

        let ctx3 = DimensionContext::new(3).unwrap();
        let report = verify_sic(&ctx3, &d3_fiducial(), 1e-12);
        assert!(report.passed());

        // basis state: worst deviation |1 - 1/3| = 2/3
        let e0 = FiducialVector::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.0)]).unwrap();
        let report = verify_sic(&ctx, &e0, 1e-10);
        assert!(!report.passed());
        assert!((report.max_overlap_deviation - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn design_defects_of_bases() {
        let d = 2;
        let basis: Vec<Vec<C64>> = (0..d)
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); d];
                e[j] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        assert!(tdesign_defect(&basis, 1).abs() < 1e-14);
        assert!((tdesign_defect(&basis, 2) - 1.0 / 6.0).abs() < 1e-14);
    }

    #[test]
    fn state_inversion_reconstructs() {
        let ctx = DimensionContext::new(2).unwrap();
        let phi = d2_fiducial();
        let d = 2;
        let mixed = CMat::from_fn(d, |i, j| {
            if i == j {
                C64::new(1.0 / d as f64, 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        assert!(state_inversion_check(&ctx, &phi, &mixed).unwrap() < 1e-12);

        let proj = CMat::from_fn(d, |i, j| phi.entries()[i] * phi.entries()[j].conj());
        assert!(state_inversion_check(&ctx, &phi, &proj).unwrap() < 1e-9);

        // random rank-1 state in d=4
        let ctx4 = DimensionContext::new(4).unwrap();
        let phi4 = found_fiducial(4, 0, 11);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let v: Vec<C64> = (0..4)
            .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let v = normalize(&v);
        let rho = CMat::from_fn(4, |i, j| v[i] * v[j].conj());
        assert!(state_inversion_check(&ctx4, &phi4, &rho).unwrap() < 1e-9);

        // non-states rejected
        let bad = CMat::identity(2);
        assert!(matches!(
            state_inversion_check(&ctx, &phi, &bad),
            Err(SicError::NotDensityMatrix(_))
        ));
    }

    #[test]
    fn stabilizer_small_dimensions() {
        let ctx = DimensionContext::new(2).unwrap();
        let rec = stabilizer(&ctx, &d2_fiducial(), StabilizerStrategy::Exhaustive).unwrap();
        assert_eq!(rec.order, 6);

        let ctx5 = DimensionContext::new(5).unwrap();
        let phi5 = found_fiducial(5, 0, 1);
        let rec = stabilizer(&ctx5, &phi5, StabilizerStrategy::Exhaustive).unwrap();
        assert_eq!(rec.order, 3);
        // |orb| * |S| = |PEC|
        let (_, pec) = crate::clifford::group_orders(5).unwrap();
        assert_eq!(pec % rec.order as u128, 0);

        // targeted strategy finds the Zauner symmetry too
        let rec = stabilizer(&ctx5, &phi5, StabilizerStrategy::Targeted(vec![])).unwrap();
        assert!(rec.order >= 3);
    }

    #[test]
    fn counting_identities() {
        assert_eq!(count_sics(15, &[3, 3, 3, 6]).unwrap(), 6720);
        assert_eq!(count_sics(2, &[6]).unwrap(), 2);
        assert_eq!(count_sics(4, &[6]).unwrap(), 16);
        assert!(matches!(
            count_sics(2, &[7]),
            Err(SicError::NonIntegralCount { .. })
        ));
    }

    #[test]
    fn zauner_classification() {
        let ctx = DimensionContext::new(5).unwrap();
        let phi = found_fiducial(5, 0, 1);
        let class = zauner_class(&ctx, &phi).unwrap();
        assert!(class.stabilized);
        assert_eq!(class.k, Some(0));

        let phi1 = found_fiducial(5, 1, 6);
        let class = zauner_class(&ctx, &phi1).unwrap();
        assert!(class.stabilized);
        assert_eq!(class.k, Some(1));

        // non-SIC input is rejected
        let e0 = {
            let mut v = vec![C64::new(0.0, 0.0); 5];
            v[0] = C64::new(1.0, 0.0);
            FiducialVector::new(v).unwrap()
        };
        assert!(matches!(
            zauner_class(&ctx, &e0),
            Err(SicError::NotFiducial { .. })
        ));
    }

    #[test]
    fn realness() {
        let ctx = DimensionContext::new(3).unwrap();
        assert!(realness_check(&ctx, &d3_fiducial()));
        let rotated = FiducialVector::new(
            d3_fiducial()
                .entries()
                .iter()
                .map(|z| z * C64::from_polar(1.0, PI / 7.0))
                .collect(),
        )
        .unwrap();
        assert!(realness_check(&ctx, &rotated));

        let ctx2 = DimensionContext::new(2).unwrap();
        assert!(!realness_check(&ctx2, &d2_fiducial()));
        // ... and no state of the d=2 orbit is real either
        assert!(!orbit_contains_real(&ctx2, &d2_fiducial()).unwrap());
    }

    #[test]
    fn fingerprint_moduli_and_invariance() {
        let ctx = DimensionContext::new(2).unwrap();
        let phi = d2_fiducial();
        let fp = triple_fingerprint(&ctx, &phi, 10_000).unwrap();
        assert_eq!(fp.values.len(), 16);
        // distinct triples have modulus 3^{-3/2}
        let m0 = 3f64.powf(-1.5);
        assert!(fp
            .values
            .iter()
            .any(|&(re, im)| (re.hypot(im) - m0).abs() < 1e-10));

        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let ctx5 = DimensionContext::new(5).unwrap();
        let phi5 = found_fiducial(5, 0, 1);
        let base = triple_fingerprint(&ctx5, &phi5, 10_000).unwrap();
        let mut done = 0;
        while done < 5 {
            let f = [
                [rng.gen_range(0..5i64), rng.gen_range(0..5)],
                [rng.gen_range(0..5), rng.gen_range(0..5)],
            ];
            let p = [rng.gen_range(0..5i64), rng.gen_range(0..5)];
            let Ok(g) = SymplecticIndex::new(5, f, p) else {
                continue;
            };
            if g.det_sign() != 1 {
                continue;
            }
            done += 1;
            let e = clifford_element(&ctx5, &g).unwrap();
            let moved = FiducialVector::new(normalize(&e.apply(phi5.entries()))).unwrap();
            let fp2 = triple_fingerprint(&ctx5, &moved, 10_000).unwrap();
            assert!(base.distance(&fp2) < 1e-8, "distance {}", base.distance(&fp2));
        }
        // antiunitary action conjugates the fingerprint
        let conj_phi = FiducialVector::new(conj_vec(phi5.entries())).unwrap();
        let fpc = triple_fingerprint(&ctx5, &conj_phi, 10_000).unwrap();
        assert!(base.conjugated().distance(&fpc) < 1e-8);
    }

    #[test]
    fn orbit_equivalence_basics() {
        let ctx = DimensionContext::new(2).unwrap();
        let phi = d2_fiducial();
        let moved = FiducialVector::new(displace_vec(
            &ctx,
            &DisplacementIndex::new(&ctx, 1, 1),
            phi.entries(),
        ))
        .unwrap();
        assert_eq!(
            orbits_equivalent(&ctx, &phi, &moved, 1e-8).unwrap(),
            OrbitVerdict::Same
        );
        let conj_phi = FiducialVector::new(conj_vec(phi.entries())).unwrap();
        assert_eq!(
            orbits_equivalent(&ctx, &phi, &conj_phi, 1e-8).unwrap(),
            OrbitVerdict::Same
        );
    }

    #[test]
    fn census_d2() {
        let ctx = DimensionContext::new(2).unwrap();
        let mut config = SearchConfig::new(2);
        config.seed = 7;
        let report = census(&ctx, &config).unwrap();
        assert_eq!(report.orbits.len(), 1);
        assert_eq!(report.orbits[0].stabilizer_order, 6);
    }

    #[test]
    fn census_rejects_bad_dimensions() {
        let ctx3 = DimensionContext::new(3).unwrap();
        assert!(matches!(
            census(&ctx3, &SearchConfig::new(3)),
            Err(SicError::ContinuousFamily)
        ));
        let ctx11 = DimensionContext::new(11).unwrap();
        assert!(matches!(
            census(&ctx11, &SearchConfig::new(11)),
            Err(SicError::CensusTooLarge(11))
        ));
    }
}
