//! Complex matrix utilities and the GSVD transform.
//!
//! Everything here works on dense `DMatrix<Complex64>` values. Zero-column
//! (and zero-row) matrices are ordinary values: their rank is 0, their span is
//! `{0}` and products with them stay empty.

use alloc::{format, vec, vec::Vec};
use core::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

mod jacobi;

pub type CMat = DMatrix<Complex64>;
pub type RMat = DMatrix<f64>;

/// Default relative rank threshold: singular values below `RANK_TOL * sigma_max` count as zero.
pub const RANK_TOL: f64 = 1e-9;

#[inline]
pub(crate) fn cr(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

pub fn eye(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Thin SVD `a = u * diag(s) * v^H` with singular values sorted in descending order.
pub(crate) struct SortedSvd {
    pub u: CMat,
    pub s: Vec<f64>,
    pub v: CMat,
}

pub(crate) fn sorted_svd(a: &CMat) -> SortedSvd {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return SortedSvd { u: CMat::zeros(m, 0), s: Vec::new(), v: CMat::zeros(n, 0) };
    }
    let (u, sv_raw, v) = jacobi::svd(a);
    let t = sv_raw.len();
    let mut order: Vec<usize> = (0..t).collect();
    order.sort_by(|&i, &j| sv_raw[j].partial_cmp(&sv_raw[i]).unwrap_or(Ordering::Equal).then(i.cmp(&j)));
    let mut su = CMat::zeros(m, t);
    let mut sv = CMat::zeros(n, t);
    let mut s = Vec::with_capacity(t);
    for (dst, &src) in order.iter().enumerate() {
        su.set_column(dst, &u.column(src));
        sv.set_column(dst, &v.column(src));
        s.push(sv_raw[src]);
    }
    SortedSvd { u: su, s, v: sv }
}

/// Singular values in descending order; empty for a zero-sized matrix.
pub fn singular_values(a: &CMat) -> Vec<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return Vec::new();
    }
    let mut s = jacobi::svd(a).1;
    s.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    s
}

fn count_above(s: &[f64], threshold: f64) -> usize {
    s.iter().filter(|&&v| v > threshold).count()
}

/// Number of singular values strictly above an absolute `threshold`.
pub fn rank_above(a: &CMat, threshold: f64) -> usize {
    count_above(&singular_values(a), threshold)
}

/// Largest singular value, zero for empty matrices.
pub fn spectral_norm(a: &CMat) -> f64 {
    singular_values(a).first().copied().unwrap_or(0.0)
}

/// Number of singular values strictly above `tol * sigma_max`.
pub fn numeric_rank(a: &CMat, tol: f64) -> usize {
    let s = singular_values(a);
    match s.first() {
        Some(&max) if max > 0.0 => count_above(&s, tol * max),
        _ => 0,
    }
}

/// Horizontal concatenation. All inputs must share a row count of `rows`.
pub fn hstack(rows: usize, blocks: &[&CMat]) -> CMat {
    let cols = blocks.iter().map(|b| b.ncols()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.nrows(), rows);
        if b.ncols() > 0 {
            out.columns_mut(at, b.ncols()).copy_from(*b);
        }
        at += b.ncols();
    }
    out
}

/// Vertical concatenation. All inputs must share a column count of `cols`.
pub fn vstack(cols: usize, blocks: &[&CMat]) -> CMat {
    let rows = blocks.iter().map(|b| b.nrows()).sum();
    let mut out = CMat::zeros(rows, cols);
    let mut at = 0;
    for b in blocks {
        debug_assert_eq!(b.ncols(), cols);
        if b.nrows() > 0 {
            out.rows_mut(at, b.nrows()).copy_from(*b);
        }
        at += b.nrows();
    }
    out
}

/// Columns `start..start + len` of `a`, clamped to zero length when the range is empty.
pub fn columns(a: &CMat, start: usize, len: usize) -> CMat {
    if len == 0 {
        return CMat::zeros(a.nrows(), 0);
    }
    a.columns(start, len).into_owned()
}

/// Rows `start..start + len` of `a`.
pub fn rows(a: &CMat, start: usize, len: usize) -> CMat {
    if len == 0 {
        return CMat::zeros(0, a.ncols());
    }
    a.rows(start, len).into_owned()
}

/// Orthonormal basis of the orthogonal complement of `span(q)` in `C^n`.
///
/// `q` must have orthonormal columns.
pub fn orthogonal_complement(q: &CMat) -> CMat {
    let n = q.nrows();
    let r = q.ncols();
    if r >= n {
        return CMat::zeros(n, 0);
    }
    if r == 0 {
        return eye(n);
    }
    let proj = eye(n) - q * q.adjoint();
    let (vals, vecs) = hermitian_eigen(&proj);
    debug_assert!(vals.len() == n);
    columns(&vecs, 0, n - r)
}

/// Orthonormal basis of `null(a)` using the default rank threshold.
pub fn null_space_basis(a: &CMat) -> CMat {
    null_space_basis_tol(a, RANK_TOL)
}

pub fn null_space_basis_tol(a: &CMat, tol: f64) -> CMat {
    let n = a.ncols();
    if a.nrows() == 0 || n == 0 {
        return eye(n);
    }
    let svd = sorted_svd(a);
    let max = svd.s.first().copied().unwrap_or(0.0);
    let rank = if max > 0.0 { count_above(&svd.s, tol * max) } else { 0 };
    orthogonal_complement(&columns(&svd.v, 0, rank))
}

/// Orthonormal basis of `span(a)`.
pub fn range_basis(a: &CMat, tol: f64) -> CMat {
    let svd = sorted_svd(a);
    let max = svd.s.first().copied().unwrap_or(0.0);
    let rank = if max > 0.0 { count_above(&svd.s, tol * max) } else { 0 };
    columns(&svd.u, 0, rank)
}

fn joint_threshold(a: &CMat, b: &CMat, tol: f64) -> f64 {
    let sa = singular_values(a).first().copied().unwrap_or(0.0);
    let sb = singular_values(b).first().copied().unwrap_or(0.0);
    tol * sa.max(sb)
}

fn abs_rank(a: &CMat, threshold: f64) -> usize {
    count_above(&singular_values(a), threshold)
}

/// `span(a) ⊂ span(b)`, decided by `rank([a b]) == rank(b)`.
///
/// Both ranks use one absolute threshold, `tol` times the larger of the two
/// spectral norms, so a numerically vanishing `a` counts as the zero subspace.
pub fn span_contained(a: &CMat, b: &CMat, tol: f64) -> bool {
    assert_eq!(a.nrows(), b.nrows(), "span_contained: row mismatch");
    let thr = joint_threshold(a, b, tol);
    if thr == 0.0 {
        return true;
    }
    let ab = hstack(a.nrows(), &[a, b]);
    abs_rank(&ab, thr) == abs_rank(b, thr)
}

/// `span(a) ∩ span(b) = {0}`, decided by `rank([a b]) == rank(a) + rank(b)`.
pub fn span_intersection_trivial(a: &CMat, b: &CMat, tol: f64) -> bool {
    assert_eq!(a.nrows(), b.nrows(), "span_intersection_trivial: row mismatch");
    let thr = joint_threshold(a, b, tol);
    if thr == 0.0 {
        return true;
    }
    let ab = hstack(a.nrows(), &[a, b]);
    abs_rank(&ab, thr) == abs_rank(a, thr) + abs_rank(b, thr)
}

/// The `(k, p, r, s)` subspace dimensions of a matrix pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubspaceDims {
    pub k: usize,
    pub p: usize,
    pub r: usize,
    pub s: usize,
}

/// Subspace dimensions from rank arithmetic alone:
/// `k = rank([h g])`, `p = k - rank(h)`, `r = k - rank(g)`, `s = rank(h) + rank(g) - k`.
pub fn subspace_dims_oracle(h: &CMat, g: &CMat) -> Result<SubspaceDims> {
    if h.nrows() != g.nrows() {
        return Err(Error::InvalidInput(format!("row count mismatch: {} vs {}", h.nrows(), g.nrows())));
    }
    let k = numeric_rank(&hstack(h.nrows(), &[h, g]), RANK_TOL);
    let rh = numeric_rank(h, RANK_TOL);
    let rg = numeric_rank(g, RANK_TOL);
    Ok(SubspaceDims { k, p: k - rh, r: k - rg, s: rh + rg - k })
}

/// Output of [`gsvd_transform`]: `h * psi1 = x * d1^H` and `g * psi2 = x * d2^H`.
///
/// Column blocks of `x` (and of `d1`, `d2`) are ordered `r`, `s`, `p`:
/// `d1 = [I_r 0 0; 0 S1 0; 0 0 0]` and `d2 = [0 0 0; 0 S2 0; 0 0 I_p]`.
/// The `s`-block is sorted by descending `S1` entries.
#[derive(Debug, Clone)]
pub struct GsvdResult {
    pub psi1: CMat,
    pub psi2: CMat,
    pub d1: RMat,
    pub d2: RMat,
    pub x: CMat,
    pub k: usize,
    pub r: usize,
    pub s: usize,
    pub p: usize,
    pub s1_diag: Vec<f64>,
    pub s2_diag: Vec<f64>,
}

impl GsvdResult {
    pub fn dims(&self) -> SubspaceDims {
        SubspaceDims { k: self.k, p: self.p, r: self.r, s: self.s }
    }

    /// First column of the `s`-block inside `psi2`, i.e. `r + K - k` (0-based).
    pub fn psi2_s_offset(&self) -> usize {
        self.r + self.psi2.ncols() - self.k
    }
}

/// Joint decomposition of `h` (N×M) and `g` (N×K), the GSVD of `(h^H, g^H)`.
///
/// Built from the SVD of the stacked matrix `[h^H; g^H]` followed by a
/// CS decomposition of its orthonormal factor.
pub fn gsvd_transform(h: &CMat, g: &CMat) -> Result<GsvdResult> {
    gsvd_transform_tol(h, g, RANK_TOL)
}

pub fn gsvd_transform_tol(h: &CMat, g: &CMat, tol: f64) -> Result<GsvdResult> {
    let n = h.nrows();
    if g.nrows() != n {
        return Err(Error::InvalidInput(format!("gsvd: row count mismatch: {} vs {}", n, g.nrows())));
    }
    let m = h.ncols();
    let kk = g.ncols();

    let stacked = vstack(n, &[&h.adjoint(), &g.adjoint()]);
    let svd = sorted_svd(&stacked);
    let smax = svd.s.first().copied().unwrap_or(0.0);
    let k = if smax > 0.0 { count_above(&svd.s, tol * smax) } else { 0 };

    // stacked ≈ q * rmat with q orthonormal ((M+K)×k) and rmat (k×N)
    let q = columns(&svd.u, 0, k);
    let mut rmat = columns(&svd.v, 0, k).adjoint();
    for i in 0..k {
        rmat.row_mut(i).scale_mut(svd.s[i]);
    }
    let q1 = rows(&q, 0, m);
    let q2 = rows(&q, m, kk);

    // CS decomposition: q1 = u1 diag(cos) z^H
    let cs = sorted_svd(&q1);
    let t = cs.s.len();
    let z = hstack(k, &[&cs.v, &orthogonal_complement(&cs.v)]);
    let psi1 = hstack(m, &[&cs.u, &orthogonal_complement(&cs.u)]);
    let mut cosines = vec![0.0; k];
    cosines[..t].copy_from_slice(&cs.s);

    let y = &q2 * &z;
    let sines: Vec<f64> = (0..k).map(|i| y.column(i).norm()).collect();

    let r = sines.iter().take_while(|&&s| s <= tol).count();
    let p = cosines.iter().rev().take_while(|&&c| c <= tol).count();
    if r + p > k {
        return Err(Error::Internal(format!("gsvd: r={r} p={p} exceed k={k}")));
    }
    let s = k - r - p;
    if s + p > kk || r + s > m {
        return Err(Error::Internal(format!("gsvd: block sizes r={r} s={s} p={p} inconsistent with M={m}, K={kk}")));
    }

    let mut tail = CMat::zeros(kk, s + p);
    for j in 0..s + p {
        let i = r + j;
        tail.set_column(j, &(y.column(i) / cr(sines[i])));
    }
    let psi2 = hstack(kk, &[&orthogonal_complement(&tail), &tail]);

    let mut d1 = RMat::zeros(m, k);
    let mut d2 = RMat::zeros(kk, k);
    for i in 0..r {
        d1[(i, i)] = 1.0;
    }
    let zero_rows = kk - s - p;
    for j in 0..s {
        let i = r + j;
        d1[(i, i)] = cosines[i];
        d2[(zero_rows + j, i)] = sines[i];
    }
    for j in 0..p {
        d2[(zero_rows + s + j, r + s + j)] = 1.0;
    }

    let x = rmat.adjoint() * &z;
    Ok(GsvdResult {
        psi1,
        psi2,
        d1,
        d2,
        x,
        k,
        r,
        s,
        p,
        s1_diag: cosines[r..r + s].to_vec(),
        s2_diag: sines[r..r + s].to_vec(),
    })
}

pub fn to_complex(a: &RMat) -> CMat {
    a.map(cr)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues in descending order.
pub fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    if n == 0 {
        return (Vec::new(), CMat::zeros(0, 0));
    }
    let (raw, raw_vecs) = jacobi::hermitian_eigen(a);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| raw[j].partial_cmp(&raw[i]).unwrap_or(Ordering::Equal));
    let mut vecs = CMat::zeros(n, n);
    let mut vals = Vec::with_capacity(n);
    for (dst, &src) in order.iter().enumerate() {
        vecs.set_column(dst, &raw_vecs.column(src));
        vals.push(raw[src]);
    }
    (vals, vecs)
}

pub fn hermitian_part(a: &CMat) -> CMat {
    (a + a.adjoint()) * cr(0.5)
}

/// Real symmetric eigenvalues in descending order.
pub fn symmetric_eigenvalues(a: &RMat) -> Vec<f64> {
    if a.nrows() == 0 {
        return Vec::new();
    }
    let sym = (a + a.transpose()) * 0.5;
    let mut vals: Vec<f64> = sym.symmetric_eigenvalues().iter().copied().collect();
    vals.sort_by(|x, y| y.partial_cmp(x).unwrap_or(Ordering::Equal));
    vals
}

/// `ln det(a)` for Hermitian positive definite `a`; `None` if the Cholesky factorization fails.
pub fn ln_det_hpd(a: &CMat) -> Option<f64> {
    if a.nrows() == 0 {
        return Some(0.0);
    }
    let chol = hermitian_part(a).cholesky()?;
    let l = chol.l_dirty();
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        acc += l[(i, i)].re.ln();
    }
    Some(2.0 * acc)
}

pub fn inverse_hpd(a: &CMat) -> Option<CMat> {
    if a.nrows() == 0 {
        return Some(CMat::zeros(0, 0));
    }
    Some(hermitian_part(a).cholesky()?.inverse())
}

/// Real part of the trace.
pub fn trace_re(a: &CMat) -> f64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)].re).sum()
}

/// `Re tr(a^H b)`, the real Frobenius inner product.
pub fn inner_re(a: &CMat, b: &CMat) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x.conj() * y).re).sum()
}

/// `a * q * a^H`
pub fn congruence(a: &CMat, q: &CMat) -> CMat {
    a * q * a.adjoint()
}

/// Real embedding `[Re -Im; Im Re]` of a complex matrix.
pub fn embed_complex(a: &CMat) -> RMat {
    let (m, n) = a.shape();
    let mut out = RMat::zeros(2 * m, 2 * n);
    for i in 0..m {
        for j in 0..n {
            let v = a[(i, j)];
            out[(i, j)] = v.re;
            out[(i, n + j)] = -v.im;
            out[(m + i, j)] = v.im;
            out[(m + i, n + j)] = v.re;
        }
    }
    out
}

/// Inverse of [`embed_complex`] for a symmetric `2n×2n` matrix that need not have the
/// complex block structure; the structured (averaged) part is returned.
pub fn deembed_symmetric(x: &RMat) -> CMat {
    let n = x.nrows() / 2;
    CMat::from_fn(n, n, |i, j| {
        let re = 0.5 * (x[(i, j)] + x[(n + i, n + j)]);
        let im = 0.5 * (x[(n + i, j)] - x[(i, n + j)]);
        Complex64::new(re, im)
    })
}

/// Clip small negative eigenvalues of a Hermitian matrix to zero.
///
/// Fails if an eigenvalue is below `-tol * max(trace, 1e-300)`.
pub fn clip_psd(q: &CMat, tol: f64) -> Result<CMat> {
    let n = q.nrows();
    if n == 0 {
        return Ok(q.clone());
    }
    let (vals, vecs) = hermitian_eigen(q);
    let scale = trace_re(q).abs().max(vals.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
    let floor = -tol * scale;
    if vals.iter().any(|&v| v < floor) {
        return Err(Error::InvalidInput(format!(
            "matrix is not positive semidefinite (min eigenvalue {:.3e})",
            vals[n - 1]
        )));
    }
    if vals[n - 1] >= 0.0 {
        return Ok(hermitian_part(q));
    }
    let mut out = CMat::zeros(n, n);
    for (i, &v) in vals.iter().enumerate() {
        if v > 0.0 {
            let col = vecs.column(i);
            out += col * col.adjoint() * cr(v);
        }
    }
    Ok(out)
}

/// Frobenius norm.
pub fn fro(a: &CMat) -> f64 {
    a.norm()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    use crate::channel::random_cn_matrix;

    fn rng(seed: u64) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(seed)
    }

    fn check_gsvd(h: &CMat, g: &CMat) -> GsvdResult {
        let res = gsvd_transform(h, g).unwrap();
        let d1 = to_complex(&res.d1);
        let d2 = to_complex(&res.d2);
        let hn = fro(h).max(1e-300);
        let gn = fro(g).max(1e-300);
        if h.ncols() > 0 {
            assert!(fro(&(h * &res.psi1 - &res.x * d1.adjoint())) / hn <= 1e-8);
        }
        if g.ncols() > 0 {
            assert!(fro(&(g * &res.psi2 - &res.x * d2.adjoint())) / gn <= 1e-8);
        }
        let ident = d1.adjoint() * &d1 + d2.adjoint() * &d2;
        assert!(fro(&(ident - eye(res.k))) <= 1e-8);
        assert!(fro(&(res.psi1.adjoint() * &res.psi1 - eye(h.ncols()))) < 1e-9);
        assert!(fro(&(res.psi2.adjoint() * &res.psi2 - eye(g.ncols()))) < 1e-9);
        assert_eq!(numeric_rank(&res.x, RANK_TOL), res.k);
        res
    }

    #[test]
    fn gsvd_identity_pair_is_full_overlap() {
        let res = check_gsvd(&eye(2), &eye(2));
        assert_eq!((res.k, res.p, res.r, res.s), (2, 0, 0, 2));
    }

    #[test]
    fn gsvd_generic_dims() {
        let mut r = rng(7);
        let h = random_cn_matrix(&mut r, 4, 2);
        let g = random_cn_matrix(&mut r, 4, 3);
        let res = check_gsvd(&h, &g);
        assert_eq!((res.k, res.p, res.r, res.s), (4, 2, 1, 1));

        let h = random_cn_matrix(&mut r, 3, 3);
        let g = random_cn_matrix(&mut r, 3, 1);
        let res = check_gsvd(&h, &g);
        assert_eq!((res.k, res.p, res.r, res.s), (3, 0, 2, 1));
    }

    #[test]
    fn gsvd_block_layout() {
        let mut r = rng(11);
        let h = random_cn_matrix(&mut r, 5, 3);
        let g = random_cn_matrix(&mut r, 5, 4);
        let res = check_gsvd(&h, &g);
        let (k, rr, s, p) = (res.k, res.r, res.s, res.p);
        for i in 0..h.ncols() {
            for j in 0..k {
                let expect_nonzero = i == j && i < rr + s;
                assert_eq!(res.d1[(i, j)] != 0.0, expect_nonzero, "d1[{i},{j}]");
            }
        }
        let off = g.ncols() - s - p;
        for i in 0..g.ncols() {
            for j in 0..k {
                let expect_nonzero = i >= off && j >= rr && i - off == j - rr;
                assert_eq!(res.d2[(i, j)] != 0.0, expect_nonzero, "d2[{i},{j}]");
            }
        }
        for w in res.s1_diag.windows(2) {
            assert!(w[0] >= w[1]);
        }
        assert!(res.s1_diag.iter().chain(&res.s2_diag).all(|&v| v > 0.0));
    }

    #[test]
    fn gsvd_zero_column_inputs() {
        let mut r = rng(3);
        let h = random_cn_matrix(&mut r, 3, 2);
        let g = CMat::zeros(3, 0);
        let res = check_gsvd(&h, &g);
        assert_eq!((res.k, res.p, res.r, res.s), (2, 0, 2, 0));
        let res = check_gsvd(&g, &h);
        assert_eq!((res.k, res.p, res.r, res.s), (2, 2, 0, 0));
        let res = gsvd_transform(&CMat::zeros(2, 0), &CMat::zeros(2, 0)).unwrap();
        assert_eq!(res.k, 0);
    }

    #[test]
    fn gsvd_row_mismatch_is_invalid_input() {
        let err = gsvd_transform(&eye(2), &eye(3)).unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn oracle_examples() {
        let d = subspace_dims_oracle(&eye(2), &eye(2)).unwrap();
        assert_eq!(d, SubspaceDims { k: 2, p: 0, r: 0, s: 2 });
        let mut r = rng(5);
        let h = random_cn_matrix(&mut r, 4, 2);
        let g = random_cn_matrix(&mut r, 4, 3);
        assert_eq!(subspace_dims_oracle(&h, &g).unwrap(), SubspaceDims { k: 4, p: 2, r: 1, s: 1 });
        let h = random_cn_matrix(&mut r, 4, 3);
        let g = &h * random_cn_matrix(&mut r, 3, 2);
        assert_eq!(subspace_dims_oracle(&h, &g).unwrap(), SubspaceDims { k: 3, p: 0, r: 1, s: 2 });
        check_gsvd(&h, &g);
    }

    #[test]
    fn null_space_examples() {
        let b = null_space_basis(&CMat::zeros(2, 3));
        assert_eq!(b.ncols(), 3);
        assert!(fro(&(b.adjoint() * &b - eye(3))) < 1e-12);
        assert_eq!(null_space_basis(&eye(3)).ncols(), 0);
        let a = random_cn_matrix(&mut rng(9), 2, 3);
        let b = null_space_basis(&a);
        assert_eq!(b.ncols(), 1);
        assert!(fro(&(&a * &b)) < 1e-10);
        assert!(fro(&(b.adjoint() * &b - eye(1))) < 1e-12);
    }

    #[test]
    fn rank_examples() {
        let mut d = eye(2);
        d[(1, 1)] = cr(1e-15);
        assert_eq!(numeric_rank(&d, 1e-9), 1);
        assert_eq!(numeric_rank(&CMat::zeros(3, 3), 1e-9), 0);
        assert_eq!(numeric_rank(&random_cn_matrix(&mut rng(1), 3, 5), 1e-9), 3);
    }

    #[test]
    fn span_examples() {
        let mut r = rng(21);
        let b = random_cn_matrix(&mut r, 4, 3);
        let a = &b * random_cn_matrix(&mut r, 3, 2);
        assert!(span_contained(&a, &b, 1e-9));
        let a = random_cn_matrix(&mut r, 4, 2);
        let b = random_cn_matrix(&mut r, 4, 1);
        assert!(!span_contained(&a, &b, 1e-9));
        assert!(span_intersection_trivial(&a, &b, 1e-9));
        let inv = random_cn_matrix(&mut r, 2, 2);
        let ab = &a * &inv;
        assert!(span_contained(&a, &ab, 1e-9) && span_contained(&ab, &a, 1e-9));
        assert!(span_contained(&CMat::zeros(4, 0), &b, 1e-9));
    }

    #[test]
    fn embedding_round_trip() {
        let a = random_cn_matrix(&mut rng(2), 3, 3);
        let h = hermitian_part(&a);
        let e = embed_complex(&h);
        assert!((&e - e.transpose()).norm() < 1e-14);
        assert!(fro(&(deembed_symmetric(&e) - &h)) < 1e-14);
        // eigenvalues double up under the embedding
        let (vals, _) = hermitian_eigen(&h);
        let evals = symmetric_eigenvalues(&e);
        for (i, v) in vals.iter().enumerate() {
            assert!((evals[2 * i] - v).abs() < 1e-10 && (evals[2 * i + 1] - v).abs() < 1e-10);
        }
    }

    #[test]
    fn ln_det_matches_eigenvalues() {
        let a = random_cn_matrix(&mut rng(4), 3, 3);
        let m = eye(3) + &a * a.adjoint();
        let (vals, _) = hermitian_eigen(&m);
        let expect: f64 = vals.iter().map(|v| v.ln()).sum();
        assert!((ln_det_hpd(&m).unwrap() - expect).abs() < 1e-10);
    }

    #[test]
    fn clip_psd_rejects_negative() {
        let mut q = eye(2);
        q[(1, 1)] = cr(-0.5);
        assert!(clip_psd(&q, 1e-9).is_err());
        q[(1, 1)] = cr(-1e-12);
        let c = clip_psd(&q, 1e-9).unwrap();
        assert!(hermitian_eigen(&c).0[1] >= 0.0);
    }
}
