//! Numerical fiducial search: minimize the quartic frame-potential cost over
//! unit vectors, optionally restricted to a symmetry eigenspace, with a
//! Gauss-Newton polish that pushes the equiangularity residuals down to the
//! double-precision floor.

use num_complex::Complex64 as C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::clifford::{symmetry_eigenspace, Subspace, SymplecticIndex};
use crate::error::{Result, SicError};
use crate::linalg::{inner, norm, solve_damped};
use crate::whgroup::{displace_vec, DimensionContext, DisplacementIndex, FiducialVector};

/// 1 / C(d+t-1, t), the Welch lower bound for t-th frame potentials,
/// evaluated exactly in integers before the final division.
pub fn welch_bound(d: usize, t: usize) -> f64 {
    assert!(d >= 1 && t >= 1);
    let mut c: u128 = 1;
    for i in 1..=t as u128 {
        c = c * (d as u128 - 1 + i) / i;
    }
    1.0 / c as f64
}

/// Overlaps t_p = <v|D_p v> for all d^2 displacement indices, row-major in
/// (p1, p2). Works on unnormalized vectors.
fn overlaps_raw(ctx: &DimensionContext, v: &[C64]) -> Vec<C64> {
    let d = ctx.d();
    let mut out = Vec::with_capacity(d * d);
    for p1 in 0..d {
        let a: Vec<C64> = (0..d).map(|k| v[(k + p1) % d].conj() * v[k]).collect();
        for p2 in 0..d {
            let mut acc = C64::new(0.0, 0.0);
            for (k, ak) in a.iter().enumerate() {
                acc += ctx.omega_pow((p2 * k) as i64) * ak;
            }
            out.push(ctx.tau_pow((p1 * p2) as i64) * acc);
        }
    }
    out
}

/// (1/d) sum_p |t_p|^4 for an unnormalized vector, via the index-sum form:
/// with a_{p1}(k) = conj(v_{k+p1}) v_k and b its cyclic self-convolution,
/// Parseval turns the p2 sum into sum_{p1,m} |b_{p1}(m)|^2 in O(d^3).
fn cost_raw(v: &[C64]) -> f64 {
    let d = v.len();
    let mut total = 0.0;
    for p1 in 0..d {
        let a: Vec<C64> = (0..d).map(|k| v[(k + p1) % d].conj() * v[k]).collect();
        for m in 0..d {
            let mut b = C64::new(0.0, 0.0);
            for k in 0..d {
                b += a[k] * a[(m + d - k) % d];
            }
            total += b.norm_sqr();
        }
    }
    total
}

/// The frame-potential cost (1/d) sum_p |<phi|D_p phi>|^4. Bounded below by
/// 2/(d+1), with equality exactly at SIC fiducials.
pub fn sic_cost(ctx: &DimensionContext, phi: &FiducialVector) -> f64 {
    assert_eq!(phi.dim(), ctx.d());
    cost_raw(phi.entries())
}

/// Wirtinger gradient of the raw potential F = sum_p |t_p|^4 with respect to
/// conj(psi): since D_p^{-1} = D_{-p} and t_{-p} = conj(t_p), the two chain
/// terms merge into sum_p 4 |t_p|^2 conj(t_p) D_p psi.
fn potential_wirtinger(ctx: &DimensionContext, v: &[C64], t: &[C64]) -> Vec<C64> {
    let d = ctx.d();
    let mut w = vec![C64::new(0.0, 0.0); d];
    for p1 in 0..d {
        for p2 in 0..d {
            let tp = t[p1 * d + p2];
            let coeff = 4.0 * tp.norm_sqr() * tp.conj();
            if coeff.norm_sqr() == 0.0 {
                continue;
            }
            let up = displace_vec(ctx, &DisplacementIndex::new(ctx, p1 as i64, p2 as i64), v);
            for (wi, ui) in w.iter_mut().zip(&up) {
                *wi += coeff * ui;
            }
        }
    }
    w
}

/// Gradient of the normalized cost psi -> sic_cost(psi/|psi|) at a normalized
/// point, in interleaved real coordinates (re_0, im_0, re_1, ...).
pub fn sic_cost_gradient(ctx: &DimensionContext, phi: &FiducialVector) -> Vec<f64> {
    let v = phi.entries();
    let t = overlaps_raw(ctx, v);
    let f: f64 = t.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum();
    let w = potential_wirtinger(ctx, v, &t);
    let d = ctx.d() as f64;
    let mut out = Vec::with_capacity(2 * v.len());
    for (wi, vi) in w.iter().zip(v) {
        let g = (wi - 4.0 * f * vi) / d;
        out.push(2.0 * g.re);
        out.push(2.0 * g.im);
    }
    out
}

/// Eigenspace of a finite-order Clifford element to restrict the search to.
pub fn restrict_to_symmetry(
    ctx: &DimensionContext,
    g: &SymplecticIndex,
    eigenvalue_index: usize,
) -> Result<Subspace> {
    symmetry_eigenspace(ctx, g, eigenvalue_index)
}

/// Coordinate chart for the optimization: an orthonormal basis of the search
/// subspace, with either complex coefficients (two reals each) or real
/// coefficients when the subspace carries a real structure.
struct Chart {
    basis: Vec<Vec<C64>>,
    real: bool,
    d: usize,
}

impl Chart {
    fn ambient(d: usize) -> Self {
        let basis = (0..d)
            .map(|j| {
                let mut e = vec![C64::new(0.0, 0.0); d];
                e[j] = C64::new(1.0, 0.0);
                e
            })
            .collect();
        Chart {
            basis,
            real: false,
            d,
        }
    }

    fn from_subspace(d: usize, s: &Subspace) -> Self {
        Chart {
            basis: s.basis.clone(),
            real: s.real_structure,
            d,
        }
    }

    fn nparams(&self) -> usize {
        if self.real {
            self.basis.len()
        } else {
            2 * self.basis.len()
        }
    }

    fn to_state(&self, x: &[f64]) -> Vec<C64> {
        let mut v = vec![C64::new(0.0, 0.0); self.d];
        for (j, b) in self.basis.iter().enumerate() {
            let c = if self.real {
                C64::new(x[j], 0.0)
            } else {
                C64::new(x[2 * j], x[2 * j + 1])
            };
            for (vi, bi) in v.iter_mut().zip(b) {
                *vi += c * bi;
            }
        }
        v
    }

    /// Real gradient components from a Wirtinger gradient g = dc/d(conj psi):
    /// dc/dre_j = 2 Re <b_j, g>, dc/dim_j = 2 Im <b_j, g>.
    fn pullback(&self, g: &[C64]) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.nparams());
        for b in &self.basis {
            let c = inner(b, g);
            out.push(2.0 * c.re);
            if !self.real {
                out.push(2.0 * c.im);
            }
        }
        out
    }

    fn random_start(&self, rng: &mut ChaCha8Rng) -> Vec<f64> {
        let n = self.nparams();
        let mut x: Vec<f64> = (0..n)
            .map(|_| StandardNormal.sample(rng))
            .collect();
        let s = x.iter().map(|a| a * a).sum::<f64>().sqrt();
        for a in x.iter_mut() {
            *a /= s;
        }
        x
    }
}

/// Normalized cost and its real-coordinate gradient at an unnormalized chart
/// point x: c(x) = cost_raw(psi) / |psi|^8 (cost_raw is degree 8 in psi).
fn cost_and_gradient(ctx: &DimensionContext, chart: &Chart, x: &[f64]) -> (f64, Vec<f64>) {
    let v = chart.to_state(x);
    let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
    let t = overlaps_raw(ctx, &v);
    let f: f64 = t.iter().map(|z| z.norm_sqr() * z.norm_sqr()).sum();
    let d = ctx.d() as f64;
    let cost = f / (d * n2.powi(4));
    let w = potential_wirtinger(ctx, &v, &t);
    // d/d(conj psi) of F / (d |psi|^8) = w / (d n^8) - 4 F psi / (d n^10)
    let g: Vec<C64> = w
        .iter()
        .zip(&v)
        .map(|(wi, vi)| wi / (d * n2.powi(4)) - 4.0 * f * vi / (d * n2.powi(5)))
        .collect();
    (cost, chart.pullback(&g))
}

/// Search parameters. `subspace = None` searches all of C^d.
#[derive(Clone)]
pub struct SearchConfig {
    pub d: usize,
    pub subspace: Option<Subspace>,
    pub restarts: usize,
    pub max_iterations: usize,
    pub convergence_tol: f64,
    pub accept_tol: f64,
    pub seed: u64,
}

impl SearchConfig {
    pub fn new(d: usize) -> Self {
        SearchConfig {
            d,
            subspace: None,
            restarts: 20 * d,
            max_iterations: 2000,
            convergence_tol: 1e-9,
            accept_tol: 1e-12,
            seed: 0,
        }
    }
}

/// One restart's result. `converged` means the cost gap beat the acceptance
/// tolerance (and the vector was subsequently polished).
#[derive(Clone, Debug)]
pub struct SearchOutcome {
    pub fiducial: FiducialVector,
    pub cost: f64,
    pub cost_gap: f64,
    pub trial_index: usize,
    pub iterations: usize,
    pub converged: bool,
}

/// Limited-memory BFGS with Armijo backtracking; returns the final point,
/// cost and iteration count. Stops on gradient norm, cost target, or budget.
fn lbfgs(
    ctx: &DimensionContext,
    chart: &Chart,
    mut x: Vec<f64>,
    max_iter: usize,
    grad_tol: f64,
    cost_target: f64,
) -> (Vec<f64>, f64, usize) {
    const MEMORY: usize = 10;
    let (mut cost, mut grad) = cost_and_gradient(ctx, chart, &x);
    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut rho_hist: Vec<f64> = Vec::new();
    let mut iters = 0;
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(p, q)| p * q).sum::<f64>();

    for it in 0..max_iter {
        iters = it;
        let gnorm = dot(&grad, &grad).sqrt();
        if gnorm < grad_tol || cost <= cost_target {
            break;
        }
        // two-loop recursion
        let mut q = grad.clone();
        let mut alphas = Vec::with_capacity(s_hist.len());
        for i in (0..s_hist.len()).rev() {
            let a = rho_hist[i] * dot(&s_hist[i], &q);
            for (qj, yj) in q.iter_mut().zip(&y_hist[i]) {
                *qj -= a * yj;
            }
            alphas.push(a);
        }
        if let (Some(s), Some(y)) = (s_hist.last(), y_hist.last()) {
            let gamma = dot(s, y) / dot(y, y);
            for qj in q.iter_mut() {
                *qj *= gamma;
            }
        }
        for (idx, i) in (0..s_hist.len()).enumerate() {
            let a = alphas[s_hist.len() - 1 - idx];
            let b = rho_hist[i] * dot(&y_hist[i], &q);
            for (qj, sj) in q.iter_mut().zip(&s_hist[i]) {
                *qj += (a - b) * sj;
            }
        }
        let dir: Vec<f64> = q.iter().map(|v| -v).collect();
        let mut slope = dot(&grad, &dir);
        let dir = if slope >= 0.0 {
            // fall back to steepest descent if curvature info went bad
            slope = -dot(&grad, &grad);
            grad.iter().map(|v| -v).collect()
        } else {
            dir
        };

        // Armijo backtracking
        let mut step = 1.0;
        let mut accepted = None;
        for _ in 0..40 {
            let xt: Vec<f64> = x.iter().zip(&dir).map(|(a, b)| a + step * b).collect();
            let (ct, gt) = cost_and_gradient(ctx, chart, &xt);
            if ct <= cost + 1e-4 * step * slope {
                accepted = Some((xt, ct, gt));
                break;
            }
            step *= 0.5;
        }
        let Some((xn, cn, gn)) = accepted else {
            break;
        };
        let s: Vec<f64> = xn.iter().zip(&x).map(|(a, b)| a - b).collect();
        let y: Vec<f64> = gn.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy = dot(&s, &y);
        if sy > 1e-14 * dot(&s, &s).sqrt() * dot(&y, &y).sqrt() {
            s_hist.push(s);
            y_hist.push(y);
            rho_hist.push(1.0 / sy);
            if s_hist.len() > MEMORY {
                s_hist.remove(0);
                y_hist.remove(0);
                rho_hist.remove(0);
            }
        }
        x = xn;
        cost = cn;
        grad = gn;
    }
    (x, cost, iters)
}

/// Levenberg-style Gauss-Newton on the equiangularity residuals
/// r_p = |t_p(psi/|psi|)|^2 - 1/(d+1) for p != 0. The quartic cost flattens
/// quadratically near the solution, so quasi-Newton descent alone floors well
/// above machine precision; the residual form does not.
fn polish(ctx: &DimensionContext, chart: &Chart, mut x: Vec<f64>) -> Vec<f64> {
    let d = ctx.d();
    let target = 1.0 / (d as f64 + 1.0);
    let m = chart.nparams();
    let nres = d * d - 1;

    let residuals = |x: &[f64]| -> (Vec<f64>, Vec<C64>, Vec<C64>, f64) {
        let v = chart.to_state(x);
        let n2: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        let t = overlaps_raw(ctx, &v);
        let r: Vec<f64> = t
            .iter()
            .skip(1)
            .map(|tp| tp.norm_sqr() / n2.powi(2) - target)
            .collect();
        (r, t, v, n2)
    };

    let (mut r, mut t, mut v, mut n2) = residuals(&x);
    let mut sq: f64 = r.iter().map(|a| a * a).sum();
    let mut lambda = 1e-10;

    for _ in 0..60 {
        if r.iter().fold(0.0f64, |m, a| m.max(a.abs())) < 1e-15 {
            break;
        }
        // Jacobian: d r_p / d(conj psi) = (conj(t_p) D_p psi + t_p D_{-p} psi)/n^4
        //           - 2 |t_p|^2 psi / n^6, pulled back through the chart
        let mut jac = vec![0.0f64; nres * m];
        for p1 in 0..d {
            for p2 in 0..d {
                if p1 == 0 && p2 == 0 {
                    continue;
                }
                let idx = p1 * d + p2 - 1;
                let tp = t[p1 * d + p2];
                let up = displace_vec(ctx, &DisplacementIndex::new(ctx, p1 as i64, p2 as i64), &v);
                let un = displace_vec(
                    ctx,
                    &DisplacementIndex::new(ctx, -(p1 as i64), -(p2 as i64)),
                    &v,
                );
                let g: Vec<C64> = (0..d)
                    .map(|i| {
                        (tp.conj() * up[i] + tp * un[i]) / n2.powi(2)
                            - 2.0 * tp.norm_sqr() * v[i] / n2.powi(3)
                    })
                    .collect();
                for (j, gj) in chart.pullback(&g).into_iter().enumerate() {
                    jac[idx * m + j] = gj;
                }
            }
        }
        // normal equations
        let mut jtj = vec![0.0f64; m * m];
        let mut jtr = vec![0.0f64; m];
        for i in 0..nres {
            for a in 0..m {
                let ja = jac[i * m + a];
                jtr[a] += ja * r[i];
                for b in 0..m {
                    jtj[a * m + b] += ja * jac[i * m + b];
                }
            }
        }
        let neg: Vec<f64> = jtr.iter().map(|a| -a).collect();
        let mut improved = false;
        for _ in 0..12 {
            let delta = solve_damped(&jtj, m, lambda, &neg);
            let xt: Vec<f64> = x.iter().zip(&delta).map(|(a, b)| a + b).collect();
            let (rt, tt, vt, nt) = residuals(&xt);
            let sqt: f64 = rt.iter().map(|a| a * a).sum();
            if sqt < sq {
                x = xt;
                r = rt;
                t = tt;
                v = vt;
                n2 = nt;
                sq = sqt;
                lambda = (lambda / 5.0).max(1e-14);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    x
}

/// Runs `config.restarts` independent minimizations. Each trial draws its RNG
/// stream from (seed, trial index), so results do not depend on scheduling.
pub fn run_search(ctx: &DimensionContext, config: &SearchConfig) -> Result<Vec<SearchOutcome>> {
    if config.d != ctx.d() {
        return Err(SicError::ModulusMismatch(config.d, ctx.d()));
    }
    if config.restarts < 1 || config.accept_tol <= 0.0 {
        return Err(SicError::Internal(
            "restarts must be >= 1 and accept_tol positive".into(),
        ));
    }
    let chart = match &config.subspace {
        Some(s) => {
            if s.dim() == 0 {
                return Err(SicError::Internal("search subspace is empty".into()));
            }
            if s.basis.iter().any(|b| b.len() != ctx.d()) {
                return Err(SicError::ModulusMismatch(s.basis[0].len(), ctx.d()));
            }
            Chart::from_subspace(ctx.d(), s)
        }
        None => Chart::ambient(ctx.d()),
    };
    let bound = 2.0 / (ctx.d() as f64 + 1.0);

    let outcomes: Vec<SearchOutcome> = (0..config.restarts)
        .into_par_iter()
        .map(|trial| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(trial as u64);
            let x0 = chart.random_start(&mut rng);
            let (x, cost, iterations) = lbfgs(
                ctx,
                &chart,
                x0,
                config.max_iterations,
                config.convergence_tol,
                bound + config.accept_tol,
            );
            let (x, cost) = if cost - bound < config.accept_tol {
                let xp = polish(ctx, &chart, x);
                let vp = chart.to_state(&xp);
                (xp.clone(), cost_raw(&vp) / norm(&vp).powi(8))
            } else {
                (x, cost)
            };
            let v = chart.to_state(&x);
            let n = norm(&v);
            let entries: Vec<C64> = v.iter().map(|z| z / n).collect();
            let cost_gap = cost - bound;
            SearchOutcome {
                fiducial: FiducialVector::new(entries).expect("normalized by construction"),
                cost,
                cost_gap,
                trial_index: trial,
                iterations,
                converged: cost_gap < config.accept_tol,
            }
        })
        .collect();
    Ok(outcomes)
}
