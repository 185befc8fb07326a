//! Primal-dual interior-point method for real block-diagonal SDPs.
//!
//! Solves the pair
//!
//! ```text
//! (P)  min <C, X>   s.t. <A_i, X> = b_i,  X ⪰ 0
//! (D)  max b^T y    s.t. S = C - Σ y_i A_i ⪰ 0
//! ```
//!
//! with the HKM search direction and Mehrotra's predictor-corrector, starting
//! from an infeasible interior point.

use alloc::{vec, vec::Vec};

use nalgebra::{DMatrix, DVector};
#[allow(unused_imports)]
use num_traits::Float;

use crate::linalg::RMat;

/// A block-diagonal symmetric matrix.
pub type Blocks = Vec<RMat>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IpmStatus {
    Optimal,
    /// The dual-form problem has no feasible `y`.
    Infeasible,
    /// The dual-form objective is unbounded above.
    Unbounded,
    /// Stopped without meeting the tolerances; the best iterate seen is returned.
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct IpmSettings {
    pub max_iters: usize,
    /// Relative duality gap target.
    pub gap_tol: f64,
    /// Relative primal/dual residual target.
    pub feas_tol: f64,
    /// Fraction of the distance to the cone boundary taken per step.
    pub step_fraction: f64,
}

impl Default for IpmSettings {
    fn default() -> Self {
        IpmSettings { max_iters: 100, gap_tol: 1e-8, feas_tol: 1e-8, step_fraction: 0.95 }
    }
}

#[derive(Debug, Clone)]
pub struct IpmResult {
    pub status: IpmStatus,
    pub y: Vec<f64>,
    pub x: Blocks,
    pub s: Blocks,
    pub primal_value: f64,
    pub dual_value: f64,
    pub rel_gap: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub iterations: usize,
}

/// Problem data: `c` and every `a[i]` share one block structure.
#[derive(Debug, Clone)]
pub struct IpmProblem {
    pub c: Blocks,
    pub a: Vec<Blocks>,
    pub b: Vec<f64>,
}

fn inner(x: &Blocks, y: &Blocks) -> f64 {
    x.iter().zip(y).map(|(a, b)| a.dot(b)).sum()
}

fn norm(x: &Blocks) -> f64 {
    inner(x, x).sqrt()
}

fn zeros_like(x: &Blocks) -> Blocks {
    x.iter().map(|b| RMat::zeros(b.nrows(), b.ncols())).collect()
}

fn identity_like(x: &Blocks, scale: f64) -> Blocks {
    x.iter().map(|b| RMat::identity(b.nrows(), b.ncols()) * scale).collect()
}

fn axpy(y: &mut Blocks, alpha: f64, x: &Blocks) {
    for (yb, xb) in y.iter_mut().zip(x) {
        *yb += xb * alpha;
    }
}

fn sym(x: &RMat) -> RMat {
    (x + x.transpose()) * 0.5
}

/// `Σ y_i A_i`
fn adjoint_map(a: &[Blocks], y: &[f64], template: &Blocks) -> Blocks {
    let mut out = zeros_like(template);
    for (ai, &yi) in a.iter().zip(y) {
        if yi != 0.0 {
            axpy(&mut out, yi, ai);
        }
    }
    out
}

/// `(<A_i, X>)_i`
fn forward_map(a: &[Blocks], x: &Blocks) -> Vec<f64> {
    a.iter().map(|ai| inner(ai, x)).collect()
}

fn cholesky_blocks(x: &Blocks) -> Option<Vec<RMat>> {
    x.iter().map(|b| sym(b).cholesky().map(|c| c.l())).collect()
}

fn inverse_from_chol(l: &[RMat]) -> Blocks {
    l.iter()
        .map(|lb| {
            let n = lb.nrows();
            let linv = lb.solve_lower_triangular(&RMat::identity(n, n)).unwrap_or_else(|| RMat::identity(n, n));
            linv.transpose() * linv
        })
        .collect()
}

/// Largest `α` with `X + α ΔX ⪰ 0`, given the Cholesky factor of `X`.
fn max_step(l: &[RMat], dx: &Blocks) -> f64 {
    let mut alpha = f64::INFINITY;
    for (lb, db) in l.iter().zip(dx) {
        let n = lb.nrows();
        if n == 0 {
            continue;
        }
        let Some(t) = lb.solve_lower_triangular(db) else {
            return 0.0;
        };
        let Some(m) = lb.solve_lower_triangular(&t.transpose()) else {
            return 0.0;
        };
        let lmin = sym(&m).symmetric_eigenvalues().iter().fold(f64::INFINITY, |acc, &v| acc.min(v));
        if lmin < 0.0 {
            alpha = alpha.min(-1.0 / lmin);
        }
    }
    alpha
}

fn solve_spd(m: &RMat, rhs: &DVector<f64>) -> Option<DVector<f64>> {
    let n = m.nrows();
    if n == 0 {
        return Some(DVector::zeros(0));
    }
    let diag_max = (0..n).map(|i| m[(i, i)].abs()).fold(0.0_f64, f64::max).max(1e-300);
    for shift in [0.0, 1e-14, 1e-12, 1e-10] {
        let mut mm = m.clone();
        for i in 0..n {
            mm[(i, i)] += shift * diag_max;
        }
        if let Some(ch) = mm.cholesky() {
            let sol = ch.solve(rhs);
            if sol.iter().all(|v| v.is_finite()) {
                return Some(sol);
            }
        }
    }
    m.clone().lu().solve(rhs)
}

pub fn solve(problem: &IpmProblem, settings: &IpmSettings) -> IpmResult {
    let IpmProblem { c, a, b } = problem;
    let m = a.len();
    let n_total: usize = c.iter().map(|blk| blk.nrows()).sum();
    let nf = n_total.max(1) as f64;
    let bvec = DVector::from_column_slice(b);
    let b_norm = bvec.norm();
    let c_norm = norm(c);

    // Starting point in the spirit of SDPT3: scaled identities.
    let mut x_scale = 10.0_f64.max(nf.sqrt());
    let mut s_scale = 10.0_f64.max(nf.sqrt()).max(c_norm);
    for (ai, &bi) in a.iter().zip(b.iter()) {
        let an = norm(ai);
        x_scale = x_scale.max(nf * (1.0 + bi.abs()) / (1.0 + an));
        s_scale = s_scale.max(an);
    }
    let mut gram = DMatrix::<f64>::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v = inner(&a[i], &a[j]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }

    let mut x = identity_like(c, x_scale);
    let mut s = identity_like(c, s_scale);
    let mut y = vec![0.0; m];

    let mut result = IpmResult {
        status: IpmStatus::NumericalFailure,
        y: y.clone(),
        x: x.clone(),
        s: s.clone(),
        primal_value: f64::NAN,
        dual_value: f64::NAN,
        rel_gap: f64::INFINITY,
        primal_res: f64::INFINITY,
        dual_res: f64::INFINITY,
        iterations: 0,
    };

    let mut best = result.clone();
    let mut best_merit = f64::INFINITY;
    let mut last_iter = 0;

    for iter in 0..=settings.max_iters {
        last_iter = iter;
        let ax = forward_map(a, &x);
        let rp: Vec<f64> = b.iter().zip(&ax).map(|(bi, ai)| bi - ai).collect();
        let aty = adjoint_map(a, &y, c);
        let mut rd = c.clone();
        axpy(&mut rd, -1.0, &s);
        axpy(&mut rd, -1.0, &aty);

        let pobj = inner(c, &x);
        let dobj: f64 = b.iter().zip(&y).map(|(bi, yi)| bi * yi).sum();
        let xs = inner(&x, &s);
        let mu = xs / nf;
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let rp_norm = rp.iter().map(|v| v * v).sum::<f64>().sqrt();
        let primal_res = rp_norm / (1.0 + b_norm);
        let dual_res = norm(&rd) / (1.0 + c_norm);

        result.y.clone_from(&y);
        result.x.clone_from(&x);
        result.s.clone_from(&s);
        result.primal_value = pobj;
        result.dual_value = dobj;
        result.rel_gap = rel_gap;
        result.primal_res = primal_res;
        result.dual_res = dual_res;
        result.iterations = iter;
        let merit = rel_gap.max(primal_res).max(dual_res);
        if merit < best_merit {
            best_merit = merit;
            best = result.clone();
        }

        let gap_ok = rel_gap <= settings.gap_tol || xs / (1.0 + pobj.abs() + dobj.abs()) <= settings.gap_tol;
        if gap_ok && primal_res <= settings.feas_tol && dual_res <= settings.feas_tol {
            result.status = IpmStatus::Optimal;
            return result;
        }

        // Certificates: X with A(X) ≈ 0, <C,X> < 0 proves (D) infeasible;
        // y with Σ y_i A_i ⪯ 0 and b^T y > 0 proves (D) unbounded.
        if pobj < 0.0 {
            let x_norm = norm(&x);
            if x_norm > 1e8 * (1.0 + x_scale) && rp_norm / (-pobj) < 1e-8 * (1.0 + b_norm) {
                result.status = IpmStatus::Infeasible;
                return result;
            }
        }
        if dobj > 0.0 {
            let y_norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if y_norm > 1e8 && norm(&rd) / dobj < 1e-8 * (1.0 + c_norm) {
                result.status = IpmStatus::Unbounded;
                return result;
            }
        }
        if iter == settings.max_iters {
            break;
        }

        let (Some(lx), Some(ls)) = (cholesky_blocks(&x), cholesky_blocks(&s)) else {
            break;
        };
        let sinv = inverse_from_chol(&ls);

        // Schur complement M_ij = tr(A_i X A_j S^{-1}).
        let g: Vec<Blocks> =
            a.iter().map(|aj| x.iter().zip(aj).zip(&sinv).map(|((xb, ab), sb)| xb * ab * sb).collect()).collect();
        let mut schur = DMatrix::<f64>::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = inner(&a[i], &g[j]);
                schur[(i, j)] = v;
                schur[(j, i)] = v;
            }
        }
        let a_sinv = forward_map(a, &sinv);
        let x_rd_sinv: Blocks = x.iter().zip(&rd).zip(&sinv).map(|((xb, rb), sb)| xb * rb * sb).collect();
        let a_x_rd_sinv = forward_map(a, &x_rd_sinv);

        let direction = |sigma_mu: f64, second: Option<&Blocks>| -> Option<(Vec<f64>, Blocks, Blocks)> {
            let mut rhs = DVector::<f64>::zeros(m);
            let corr = second.map(|d| {
                let d_sinv: Blocks = d.iter().zip(&sinv).map(|(db, sb)| db * sb).collect();
                forward_map(a, &d_sinv)
            });
            for i in 0..m {
                rhs[i] = b[i] - sigma_mu * a_sinv[i] + a_x_rd_sinv[i];
                if let Some(cv) = &corr {
                    rhs[i] += cv[i];
                }
            }
            let dy = solve_spd(&schur, &rhs)?;
            let dy: Vec<f64> = dy.iter().copied().collect();
            let mut ds = rd.clone();
            axpy(&mut ds, -1.0, &adjoint_map(a, &dy, c));
            let mut dx: Blocks = x
                .iter()
                .zip(&ds)
                .zip(&sinv)
                .enumerate()
                .map(|(k, ((xb, dsb), sb))| {
                    let mut inner_term = xb * dsb;
                    if let Some(d) = second {
                        inner_term += &d[k];
                    }
                    let mut out = sb * sigma_mu - xb - sym(&(inner_term * sb));
                    out = sym(&out);
                    out
                })
                .collect();
            // Project out the primal residual left by round-off in the Schur solve.
            let adx = forward_map(a, &dx);
            let err = DVector::from_iterator(m, rp.iter().zip(&adx).map(|(r, v)| r - v));
            if let Some(fix) = solve_spd(&gram, &err) {
                let fix: Vec<f64> = fix.iter().copied().collect();
                let corr = adjoint_map(a, &fix, c);
                axpy(&mut dx, 1.0, &corr);
            }
            Some((dy, dx, ds))
        };

        // Predictor.
        let Some((_, dx_p, ds_p)) = direction(0.0, None) else {
            break;
        };
        let ap = max_step(&lx, &dx_p).min(1.0);
        let ad = max_step(&ls, &ds_p).min(1.0);
        let mut x_aff = x.clone();
        axpy(&mut x_aff, ap, &dx_p);
        let mut s_aff = s.clone();
        axpy(&mut s_aff, ad, &ds_p);
        let mu_aff = inner(&x_aff, &s_aff) / nf;
        let ratio = (mu_aff / mu).max(0.0);
        let sigma = (ratio * ratio * ratio).min(1.0);

        // Corrector with the second-order term ΔX_p ΔS_p S^{-1} folded in.
        let second: Blocks = dx_p.iter().zip(&ds_p).map(|(a, b)| a * b).collect();
        let Some((dy, dx, ds)) = direction(sigma * mu, Some(&second)) else {
            break;
        };
        let gamma = settings.step_fraction;
        let ap = (gamma * max_step(&lx, &dx)).min(1.0);
        let ad = (gamma * max_step(&ls, &ds)).min(1.0);
        if !(ap.is_finite() && ad.is_finite()) || (ap < 1e-12 && ad < 1e-12) {
            break;
        }
        axpy(&mut x, ap, &dx);
        axpy(&mut s, ad, &ds);
        for (yi, di) in y.iter_mut().zip(&dy) {
            *yi += ad * di;
        }
        for blk in x.iter_mut().chain(s.iter_mut()) {
            *blk = sym(blk);
        }
    }
    best.status = IpmStatus::NumericalFailure;
    best.iterations = last_iter;
    best
}
