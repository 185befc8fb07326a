//! A small modeling layer for SDPs over complex Hermitian matrix variables.
//!
//! Variables are Hermitian blocks and real scalars. Constraints are Hermitian
//! affine expressions required to be PSD, scalar affine expressions required
//! to be non-negative, and scalar affine equalities. Equalities are eliminated
//! through a null-space parametrization, complex LMIs are embedded as real
//! symmetric `[Re -Im; Im Re]` blocks, and the result is handed to the
//! interior-point solver in [`super::ipm`].

use alloc::{format, vec, vec::Vec};

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::ipm::{self, Blocks, IpmProblem, IpmSettings, IpmStatus};
use crate::error::{Error, Result};
use crate::linalg::{cr, embed_complex, sorted_svd, symmetric_eigenvalues, to_complex, CMat, RMat};

/// Handle to an `n×n` Hermitian variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HermVar {
    offset: usize,
    n: usize,
}

impl HermVar {
    pub fn dim(&self) -> usize {
        self.n
    }
}

/// Handle to a real scalar variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ScalarVar {
    offset: usize,
}

/// Real parameters of a Hermitian variable, in order: the `n` diagonal entries,
/// then `(re, im)` of each strictly upper entry, row by row.
fn herm_basis(n: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        let mut e = CMat::zeros(n, n);
        e[(i, i)] = cr(1.0);
        out.push(e);
    }
    for i in 0..n {
        for j in i + 1..n {
            let mut re = CMat::zeros(n, n);
            re[(i, j)] = cr(1.0);
            re[(j, i)] = cr(1.0);
            out.push(re);
            let mut im = CMat::zeros(n, n);
            im[(i, j)] = Complex64::new(0.0, 1.0);
            im[(j, i)] = Complex64::new(0.0, -1.0);
            out.push(im);
        }
    }
    out
}

fn herm_from_params(n: usize, p: &[f64]) -> CMat {
    let mut q = CMat::zeros(n, n);
    for i in 0..n {
        q[(i, i)] = cr(p[i]);
    }
    let mut k = n;
    for i in 0..n {
        for j in i + 1..n {
            let z = Complex64::new(p[k], p[k + 1]);
            q[(i, j)] = z;
            q[(j, i)] = z.conj();
            k += 2;
        }
    }
    q
}

/// Scalar affine expression `constant + Σ coef * param`.
#[derive(Debug, Clone, Default)]
pub struct LinExpr {
    constant: f64,
    terms: Vec<(usize, f64)>,
}

impl LinExpr {
    pub fn constant(c: f64) -> Self {
        LinExpr { constant: c, terms: Vec::new() }
    }

    pub fn scalar(v: ScalarVar, coef: f64) -> Self {
        LinExpr::default().plus_scalar(v, coef)
    }

    pub fn plus_scalar(mut self, v: ScalarVar, coef: f64) -> Self {
        self.terms.push((v.offset, coef));
        self
    }

    pub fn plus_constant(mut self, c: f64) -> Self {
        self.constant += c;
        self
    }

    /// Adds `coef * Re tr(M Q)` for Hermitian `m`.
    pub fn plus_inner(mut self, v: HermVar, m: &CMat, coef: f64) -> Self {
        for (k, e) in herm_basis(v.n).iter().enumerate() {
            let val: f64 = (m * e).trace().re;
            if val != 0.0 {
                self.terms.push((v.offset + k, coef * val));
            }
        }
        self
    }

    /// Adds `coef * tr(Q)`.
    pub fn plus_trace(self, v: HermVar, coef: f64) -> Self {
        let n = v.n;
        self.plus_inner(v, &CMat::identity(n, n), coef)
    }

    /// Adds `coef * Re(a Q a^H)` for a row vector `a` (1×n).
    pub fn plus_quad(self, v: HermVar, a: &CMat, coef: f64) -> Self {
        let m = a.adjoint() * a;
        self.plus_inner(v, &m, coef)
    }

    pub fn scaled(mut self, f: f64) -> Self {
        self.constant *= f;
        for t in &mut self.terms {
            t.1 *= f;
        }
        self
    }

    fn dense(&self, n: usize) -> Vec<f64> {
        let mut out = vec![0.0; n];
        for &(k, c) in &self.terms {
            out[k] += c;
        }
        out
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.constant + self.terms.iter().map(|&(k, c)| c * x[k]).sum::<f64>()
    }
}

#[derive(Debug, Clone)]
enum HermTerm {
    /// `coef * A Q A^H`
    Congruence { var: HermVar, a: CMat, coef: f64 },
    /// `z * M`
    Scaled { var: ScalarVar, m: CMat },
}

/// Hermitian affine expression `constant + Σ terms` of a fixed size.
#[derive(Debug, Clone)]
pub struct HermExpr {
    size: usize,
    constant: CMat,
    terms: Vec<HermTerm>,
}

impl HermExpr {
    pub fn zeros(size: usize) -> Self {
        HermExpr { size, constant: CMat::zeros(size, size), terms: Vec::new() }
    }

    /// The variable itself.
    pub fn var(v: HermVar) -> Self {
        HermExpr::zeros(v.n).plus_congruence(v, &CMat::identity(v.n, v.n), 1.0)
    }

    pub fn plus_congruence(mut self, var: HermVar, a: &CMat, coef: f64) -> Self {
        assert_eq!(a.nrows(), self.size, "congruence row count");
        assert_eq!(a.ncols(), var.n, "congruence column count");
        self.terms.push(HermTerm::Congruence { var, a: a.clone(), coef });
        self
    }

    pub fn plus_scalar(mut self, var: ScalarVar, m: &CMat) -> Self {
        assert_eq!(m.shape(), (self.size, self.size), "scalar term shape");
        self.terms.push(HermTerm::Scaled { var, m: m.clone() });
        self
    }

    pub fn plus_constant(mut self, m: &CMat) -> Self {
        self.constant += m;
        self
    }

    /// Coefficient matrix of every parameter, plus the constant.
    fn expand(&self, nparams: usize) -> (CMat, Vec<(usize, CMat)>) {
        let mut coeffs: Vec<Option<CMat>> = vec![None; nparams];
        for t in &self.terms {
            match t {
                HermTerm::Congruence { var, a, coef } => {
                    for (k, e) in herm_basis(var.n).iter().enumerate() {
                        let m = a * e * a.adjoint() * cr(*coef);
                        let slot = coeffs[var.offset + k].get_or_insert_with(|| CMat::zeros(self.size, self.size));
                        *slot += m;
                    }
                }
                HermTerm::Scaled { var, m } => {
                    let slot = coeffs[var.offset].get_or_insert_with(|| CMat::zeros(self.size, self.size));
                    *slot += m;
                }
            }
        }
        let list = coeffs.into_iter().enumerate().filter_map(|(k, c)| c.map(|m| (k, m))).collect();
        (self.constant.clone(), list)
    }

    pub fn eval(&self, sol: &SdpSolution) -> CMat {
        let mut out = self.constant.clone();
        for t in &self.terms {
            match t {
                HermTerm::Congruence { var, a, coef } => out += a * sol.hermitian(*var) * a.adjoint() * cr(*coef),
                HermTerm::Scaled { var, m } => out += m * cr(sol.scalar(*var)),
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

/// Solver outcome. Anything but [`SdpStatus::Optimal`] means the values are the
/// last iterate and should be checked against `rel_gap` / residuals.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SdpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    NumericalFailure,
}

#[derive(Debug, Clone)]
pub struct SdpSolution {
    pub status: SdpStatus,
    /// Objective value in the problem's own sense.
    pub value: f64,
    pub rel_gap: f64,
    pub primal_res: f64,
    pub dual_res: f64,
    pub iterations: usize,
    params: Vec<f64>,
}

impl SdpSolution {
    pub fn hermitian(&self, v: HermVar) -> CMat {
        herm_from_params(v.n, &self.params[v.offset..v.offset + v.n * v.n])
    }

    pub fn scalar(&self, v: ScalarVar) -> f64 {
        self.params[v.offset]
    }

    /// Whether the iterate is usable at `accuracy` even if the solver did not report optimality.
    pub fn acceptable(&self, accuracy: f64) -> bool {
        self.status == SdpStatus::Optimal
            || (self.status == SdpStatus::NumericalFailure
                && self.rel_gap <= accuracy
                && self.primal_res <= accuracy
                && self.dual_res <= accuracy)
    }
}

/// Linear-objective SDP with LMI, non-negativity and equality constraints.
#[derive(Debug, Clone, Default)]
pub struct SdpProblem {
    nparams: usize,
    psd: Vec<HermExpr>,
    nonneg: Vec<LinExpr>,
    eq: Vec<LinExpr>,
    objective: LinExpr,
    sense: Option<Sense>,
}

impl SdpProblem {
    pub fn new() -> Self {
        SdpProblem::default()
    }

    pub fn hermitian(&mut self, n: usize) -> HermVar {
        let v = HermVar { offset: self.nparams, n };
        self.nparams += n * n;
        v
    }

    /// A Hermitian variable constrained to be PSD.
    pub fn psd_variable(&mut self, n: usize) -> HermVar {
        let v = self.hermitian(n);
        self.psd(HermExpr::var(v));
        v
    }

    pub fn scalar(&mut self) -> ScalarVar {
        let v = ScalarVar { offset: self.nparams };
        self.nparams += 1;
        v
    }

    pub fn psd(&mut self, e: HermExpr) {
        self.psd.push(e);
    }

    pub fn nonneg(&mut self, e: LinExpr) {
        self.nonneg.push(e);
    }

    pub fn equal(&mut self, e: LinExpr) {
        self.eq.push(e);
    }

    pub fn maximize(&mut self, e: LinExpr) {
        self.objective = e;
        self.sense = Some(Sense::Maximize);
    }

    pub fn minimize(&mut self, e: LinExpr) {
        self.objective = e;
        self.sense = Some(Sense::Minimize);
    }

    pub fn num_params(&self) -> usize {
        self.nparams
    }
}

/// Real matrix `F(x) = F0 + Σ x_k F_k` for one constraint block.
struct RealLmi {
    f0: RMat,
    fk: Vec<(usize, RMat)>,
}

/// Solve to relative duality gap `accuracy`.
pub fn solve_sdp(p: &SdpProblem, accuracy: f64) -> Result<SdpSolution> {
    let sense = p.sense.ok_or_else(|| Error::InvalidInput("SDP has no objective".into()))?;
    let n = p.nparams;
    if p.psd.is_empty() && p.nonneg.is_empty() {
        return Err(Error::InvalidInput("SDP has no conic constraints".into()));
    }

    // Equality elimination: x = x0 + N z.
    let (x0, basis) = eliminate_equalities(&p.eq, n)?;
    let nz = basis.ncols();

    let mut lmis: Vec<RealLmi> = Vec::new();
    for e in &p.psd {
        let (c0, list) = e.expand(n);
        let f0 = embed_complex(&((&c0 + c0.adjoint()) * cr(0.5)));
        let fk = list.into_iter().map(|(k, m)| (k, embed_complex(&((&m + m.adjoint()) * cr(0.5))))).collect();
        lmis.push(RealLmi { f0, fk });
    }
    for e in &p.nonneg {
        let f0 = RMat::from_element(1, 1, e.constant);
        let fk = e.terms.iter().map(|&(k, c)| (k, RMat::from_element(1, 1, c))).collect();
        lmis.push(RealLmi { f0, fk });
    }

    // Substitute x = x0 + N z and scale each block to unit largest coefficient.
    let mut c_blocks: Blocks = Vec::with_capacity(lmis.len());
    let mut constant_violated = false;
    let mut a_blocks: Vec<Blocks> = vec![Vec::with_capacity(lmis.len()); nz];
    for lmi in &lmis {
        let dim = lmi.f0.nrows();
        let mut f0 = lmi.f0.clone();
        let mut fz = vec![RMat::zeros(dim, dim); nz];
        for (k, fk) in &lmi.fk {
            if x0[*k] != 0.0 {
                f0 += fk * x0[*k];
            }
            for (j, fzj) in fz.iter_mut().enumerate() {
                let w = basis[(*k, j)];
                if w != 0.0 {
                    *fzj += fk * w;
                }
            }
        }
        let scale = fz.iter().map(|m| m.amax()).fold(0.0_f64, f64::max);
        if scale == 0.0 {
            let lmin = symmetric_eigenvalues(&f0).into_iter().fold(f64::INFINITY, f64::min);
            if lmin < -1e-12 * (1.0 + f0.amax()) {
                constant_violated = true;
            }
            continue;
        }
        c_blocks.push(f0 / scale);
        for (j, fzj) in fz.into_iter().enumerate() {
            a_blocks[j].push(fzj / (-scale));
        }
    }

    if constant_violated {
        return Ok(SdpSolution {
            status: SdpStatus::Infeasible,
            value: p.objective.eval(&x0),
            rel_gap: f64::INFINITY,
            primal_res: f64::INFINITY,
            dual_res: f64::INFINITY,
            iterations: 0,
            params: x0,
        });
    }
    let c_full = p.objective.dense(n);
    let sign = if sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut b: Vec<f64> = (0..nz).map(|j| sign * (0..n).map(|k| c_full[k] * basis[(k, j)]).sum::<f64>()).collect();
    let b_scale = b.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let b_scale = if b_scale > 0.0 { b_scale } else { 1.0 };
    for v in &mut b {
        *v /= b_scale;
    }

    if c_blocks.is_empty() {
        let unbounded = b.iter().any(|v| *v != 0.0);
        return Ok(SdpSolution {
            status: if unbounded { SdpStatus::Unbounded } else { SdpStatus::Optimal },
            value: p.objective.eval(&x0),
            rel_gap: 0.0,
            primal_res: 0.0,
            dual_res: 0.0,
            iterations: 0,
            params: x0,
        });
    }

    let settings = IpmSettings { gap_tol: accuracy, feas_tol: accuracy.max(1e-12), ..IpmSettings::default() };
    let res = ipm::solve(&IpmProblem { c: c_blocks, a: a_blocks, b }, &settings);

    let mut params = x0.clone();
    for j in 0..nz {
        for k in 0..n {
            params[k] += basis[(k, j)] * res.y[j];
        }
    }
    let value = p.objective.eval(&params);
    let status = match res.status {
        IpmStatus::Optimal => SdpStatus::Optimal,
        IpmStatus::Infeasible => SdpStatus::Infeasible,
        IpmStatus::Unbounded => SdpStatus::Unbounded,
        IpmStatus::NumericalFailure => SdpStatus::NumericalFailure,
    };
    Ok(SdpSolution {
        status,
        value,
        rel_gap: res.rel_gap,
        primal_res: res.primal_res,
        dual_res: res.dual_res,
        iterations: res.iterations,
        params,
    })
}

/// Particular solution and null-space basis of the equality system.
fn eliminate_equalities(eq: &[LinExpr], n: usize) -> Result<(Vec<f64>, RMat)> {
    if eq.is_empty() {
        return Ok((vec![0.0; n], RMat::identity(n, n)));
    }
    let m = eq.len();
    let mut e = RMat::zeros(m, n);
    let mut rhs = vec![0.0; m];
    for (i, row) in eq.iter().enumerate() {
        for &(k, c) in &row.terms {
            e[(i, k)] += c;
        }
        rhs[i] = -row.constant;
    }
    let svd = sorted_svd(&to_complex(&e));
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let rank = svd.s.iter().filter(|&&s| s > 1e-12 * smax).count();

    // x0 = V_r Σ_r^{-1} U_r^T rhs
    let mut x0 = vec![0.0; n];
    for r in 0..rank {
        let coef: f64 = (0..m).map(|i| svd.u[(i, r)].re * rhs[i]).sum::<f64>() / svd.s[r];
        for (k, x) in x0.iter_mut().enumerate() {
            *x += svd.v[(k, r)].re * coef;
        }
    }
    let resid: f64 = (0..m)
        .map(|i| {
            let v: f64 = (0..n).map(|k| e[(i, k)] * x0[k]).sum::<f64>() - rhs[i];
            v * v
        })
        .sum::<f64>()
        .sqrt();
    let rhs_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    if resid > 1e-9 * (1.0 + rhs_norm) {
        return Err(Error::InvalidInput(format!("inconsistent equality constraints (residual {resid:.3e})")));
    }

    // Null space: orthonormal complement of the row space.
    let row_space = crate::linalg::columns(&svd.v, 0, rank);
    let null = crate::linalg::orthogonal_complement(&row_space);
    Ok((x0, null.map(|z| z.re)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{hermitian_eigen, trace_re};

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { cr(v[i]) } else { cr(0.0) })
    }

    #[test]
    fn max_trace_inner_with_unit_trace() {
        let mut p = SdpProblem::new();
        let x = p.psd_variable(2);
        p.equal(LinExpr::default().plus_trace(x, 1.0).plus_constant(-1.0));
        p.maximize(LinExpr::default().plus_inner(x, &diag(&[1.0, 3.0]), 1.0));
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-7);
        assert!((sol.hermitian(x) - diag(&[0.0, 1.0])).norm() < 1e-6);
    }

    #[test]
    fn min_trace_above_identity() {
        let mut p = SdpProblem::new();
        let x = p.hermitian(3);
        p.psd(HermExpr::var(x).plus_constant(&(-CMat::identity(3, 3))));
        p.minimize(LinExpr::default().plus_trace(x, 1.0));
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 3.0).abs() < 1e-7);
        assert!((sol.hermitian(x) - CMat::identity(3, 3)).norm() < 1e-6);
    }

    #[test]
    fn complex_max_eigenvalue() {
        // max Re tr(C X), tr X = 1, X ⪰ 0 → λ_max(C) for a complex Hermitian C.
        let c = CMat::from_row_slice(2, 2, &[cr(1.0), Complex64::new(0.0, 2.0), Complex64::new(0.0, -2.0), cr(1.0)]);
        let mut p = SdpProblem::new();
        let x = p.psd_variable(2);
        p.equal(LinExpr::default().plus_trace(x, 1.0).plus_constant(-1.0));
        p.maximize(LinExpr::default().plus_inner(x, &c, 1.0));
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert!((sol.value - 3.0).abs() < 1e-7);
        let q = sol.hermitian(x);
        let (vals, _) = hermitian_eigen(&q);
        assert!(vals[1] > -1e-8);
        assert!((trace_re(&q) - 1.0).abs() < 1e-8);
        assert!(((c * &q).trace().re - 3.0).abs() < 1e-7);
    }

    #[test]
    fn scalar_and_nonneg_constraints() {
        // max z s.t. z <= 2, 3 - z ≥ 0 via LMI, z ≥ 0
        let mut p = SdpProblem::new();
        let z = p.scalar();
        p.nonneg(LinExpr::scalar(z, -1.0).plus_constant(2.0));
        p.psd(HermExpr::zeros(1).plus_constant(&diag(&[3.0])).plus_scalar(z, &diag(&[-1.0])));
        p.nonneg(LinExpr::scalar(z, 1.0));
        p.maximize(LinExpr::scalar(z, 1.0));
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert!((sol.scalar(z) - 2.0).abs() < 1e-7);
    }

    #[test]
    fn inconsistent_equalities_rejected() {
        let mut p = SdpProblem::new();
        let z = p.scalar();
        p.equal(LinExpr::scalar(z, 1.0).plus_constant(-1.0));
        p.equal(LinExpr::scalar(z, 1.0).plus_constant(-2.0));
        p.nonneg(LinExpr::scalar(z, 1.0));
        p.maximize(LinExpr::scalar(z, 1.0));
        assert!(matches!(solve_sdp(&p, 1e-8), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn infeasible_problem_is_not_optimal() {
        let mut p = SdpProblem::new();
        let z = p.scalar();
        p.nonneg(LinExpr::scalar(z, 1.0).plus_constant(-1.0));
        p.nonneg(LinExpr::scalar(z, -1.0));
        p.maximize(LinExpr::scalar(z, 1.0));
        let sol = solve_sdp(&p, 1e-8).unwrap();
        assert_ne!(sol.status, SdpStatus::Optimal);
    }

    #[test]
    fn constant_blocks_are_checked_not_scaled() {
        let mut p = SdpProblem::new();
        let x = p.scalar();
        let y = p.scalar();
        p.equal(LinExpr::scalar(x, 1.0).plus_scalar(y, 1.0).plus_constant(-1.0));
        p.nonneg(LinExpr::scalar(x, 1.0).plus_scalar(y, 1.0));
        p.nonneg(LinExpr::scalar(x, 1.0));
        p.nonneg(LinExpr::scalar(y, 1.0));
        p.maximize(LinExpr::scalar(x, 2.0).plus_scalar(y, 1.0));
        let sol = solve_sdp(&p, 1e-9).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 2.0).abs() < 1e-7);

        let mut p = SdpProblem::new();
        let x = p.scalar();
        let y = p.scalar();
        p.equal(LinExpr::scalar(x, 1.0).plus_scalar(y, 1.0).plus_constant(-1.0));
        p.nonneg(LinExpr::scalar(x, -1.0).plus_scalar(y, -1.0));
        p.nonneg(LinExpr::scalar(x, 1.0));
        p.maximize(LinExpr::scalar(x, 1.0));
        assert_eq!(solve_sdp(&p, 1e-9).unwrap().status, SdpStatus::Infeasible);
    }
}
