//! Concave log-det maximization over trace-bounded PSD blocks.
//!
//! ```text
//! maximize  Σ_t w_t ln det(K_t + Σ_b A_tb Q_b A_tb^H) + Σ_b Re tr(C_b Q_b)
//! s.t.      Q_b ⪰ 0,  Σ_b tr(Q_b) ≤ P
//! ```
//!
//! solved by projected gradient ascent with Armijo backtracking.

use alloc::{vec, vec::Vec};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::linalg::{cr, hermitian_eigen, hermitian_part, inner_re, inverse_hpd, ln_det_hpd, CMat};

/// One weighted `ln det(constant + Σ A Q A^H)` term.
#[derive(Debug, Clone)]
pub struct LogDetTerm {
    pub weight: f64,
    /// Hermitian positive definite offset, usually the identity.
    pub constant: CMat,
    /// `(block index, A)` pairs.
    pub parts: Vec<(usize, CMat)>,
}

#[derive(Debug, Clone)]
pub struct LogDetProblem {
    pub block_dims: Vec<usize>,
    pub terms: Vec<LogDetTerm>,
    /// Hermitian `C_b` per block for the linear part `Re tr(C_b Q_b)`.
    pub linear: Vec<CMat>,
    pub power: f64,
}

#[derive(Debug, Clone)]
pub struct LogDetSettings {
    pub max_iters: usize,
    /// Relative objective change that counts as converged.
    pub tol: f64,
    pub armijo: f64,
    pub backtrack: f64,
    pub initial_step: f64,
}

impl Default for LogDetSettings {
    fn default() -> Self {
        LogDetSettings { max_iters: 200, tol: 1e-6, armijo: 1e-4, backtrack: 0.5, initial_step: 1.0 }
    }
}

#[derive(Debug, Clone)]
pub struct LogDetSolution {
    pub value: f64,
    pub blocks: Vec<CMat>,
    /// Objective after every accepted iterate, starting with the projected initial point.
    pub trace: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

impl LogDetProblem {
    fn validate(&self) -> Result<()> {
        if self.linear.len() != self.block_dims.len() {
            return Err(Error::InvalidInput("one linear coefficient per block required".into()));
        }
        if !(self.power >= 0.0) {
            return Err(Error::InvalidInput("power budget must be non-negative".into()));
        }
        for (c, &n) in self.linear.iter().zip(&self.block_dims) {
            if c.shape() != (n, n) {
                return Err(Error::InvalidInput("linear coefficient shape mismatch".into()));
            }
        }
        for t in &self.terms {
            let m = t.constant.nrows();
            for (b, a) in &t.parts {
                if *b >= self.block_dims.len() || a.shape() != (m, self.block_dims[*b]) {
                    return Err(Error::InvalidInput("log-det term shape mismatch".into()));
                }
            }
        }
        Ok(())
    }

    fn argument(&self, t: &LogDetTerm, q: &[CMat]) -> CMat {
        let mut arg = t.constant.clone();
        for (b, a) in &t.parts {
            arg += a * &q[*b] * a.adjoint();
        }
        hermitian_part(&arg)
    }

    /// Objective value, `None` outside the domain.
    pub fn objective(&self, q: &[CMat]) -> Option<f64> {
        let mut val = 0.0;
        for t in &self.terms {
            val += t.weight * ln_det_hpd(&self.argument(t, q))?;
        }
        for (c, qb) in self.linear.iter().zip(q) {
            val += inner_re(c, qb);
        }
        Some(val)
    }

    /// Euclidean gradient with respect to each block.
    pub fn gradient(&self, q: &[CMat]) -> Option<Vec<CMat>> {
        let mut g: Vec<CMat> = self.linear.iter().map(hermitian_part).collect();
        for t in &self.terms {
            let inv = inverse_hpd(&self.argument(t, q))?;
            for (b, a) in &t.parts {
                g[*b] += a.adjoint() * &inv * a * cr(t.weight);
            }
        }
        Some(g.iter().map(hermitian_part).collect())
    }
}

/// Euclidean projection of `v` onto `{λ ≥ 0, Σλ ≤ budget}`.
pub fn project_capped_simplex(v: &[f64], budget: f64) -> Vec<f64> {
    let clipped: Vec<f64> = v.iter().map(|x| x.max(0.0)).collect();
    if clipped.iter().sum::<f64>() <= budget {
        return clipped;
    }
    let mut sorted: Vec<f64> = v.to_vec();
    sorted.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, &s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - budget) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        } else {
            break;
        }
    }
    v.iter().map(|x| (x - theta).max(0.0)).collect()
}

/// Project Hermitian blocks onto `{Q_b ⪰ 0, Σ tr Q_b ≤ budget}`.
pub fn project_blocks(blocks: &[CMat], budget: f64) -> Vec<CMat> {
    let decomps: Vec<(Vec<f64>, CMat)> = blocks.iter().map(hermitian_eigen).collect();
    let stacked: Vec<f64> = decomps.iter().flat_map(|(v, _)| v.iter().copied()).collect();
    let projected = project_capped_simplex(&stacked, budget);
    let mut k = 0;
    decomps
        .iter()
        .map(|(vals, vecs)| {
            let n = vals.len();
            let mut out = CMat::zeros(n, n);
            for i in 0..n {
                let lam = projected[k + i];
                if lam > 0.0 {
                    let col = vecs.column(i);
                    out += col * col.adjoint() * Complex64::new(lam, 0.0);
                }
            }
            k += n;
            hermitian_part(&out)
        })
        .collect()
}

/// Maximize the problem starting from `init` (projected onto the feasible set first).
///
/// The step starts at `initial_step` and, after every accepted iterate, restarts
/// from twice the last accepted step.
pub fn solve_logdet_max(p: &LogDetProblem, init: &[CMat], settings: &LogDetSettings) -> Result<LogDetSolution> {
    p.validate()?;
    if init.len() != p.block_dims.len() {
        return Err(Error::InvalidInput("initial point has the wrong number of blocks".into()));
    }
    let mut q = project_blocks(init, p.power);
    let mut f =
        p.objective(&q).ok_or_else(|| Error::Solver("log-det objective undefined at the initial point".into()))?;
    let mut trace = vec![f];
    let mut step = settings.initial_step;
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..settings.max_iters {
        let Some(g) = p.gradient(&q) else {
            return Err(Error::Solver("log-det gradient undefined".into()));
        };
        let mut t = step;
        let mut accepted = None;
        for _ in 0..60 {
            let trial: Vec<CMat> = q.iter().zip(&g).map(|(qb, gb)| qb + gb * cr(t)).collect();
            let cand = project_blocks(&trial, p.power);
            let dir: f64 = cand.iter().zip(&q).zip(&g).map(|((c, qb), gb)| inner_re(gb, &(c - qb))).sum();
            if let Some(fc) = p.objective(&cand) {
                if fc >= f + settings.armijo * dir && fc >= f {
                    accepted = Some((cand, fc, dir));
                    break;
                }
            }
            t *= settings.backtrack;
        }
        iterations += 1;
        let Some((cand, fc, dir)) = accepted else {
            converged = true;
            break;
        };
        let change = fc - f;
        q = cand;
        f = fc;
        trace.push(f);
        step = 2.0 * t;
        if change <= settings.tol * f.abs().max(1.0) && dir <= settings.tol * f.abs().max(1.0) {
            converged = true;
            break;
        }
    }
    Ok(LogDetSolution { value: f, blocks: q, trace, iterations, converged })
}
