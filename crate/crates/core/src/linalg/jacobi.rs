//! Jacobi-rotation SVD and Hermitian eigensolver.
//!
//! Both are cyclic-sweep methods that are accurate to working precision on the
//! small dense matrices used throughout the crate, including inputs with
//! clustered or repeated singular values.

use alloc::vec::Vec;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;

use super::CMat;

const MAX_SWEEPS: usize = 80;

/// Thin SVD of a matrix with at least as many rows as columns: `a = u diag(s) v^H`, unsorted.
fn one_sided(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    let n = a.ncols();
    let mut w = a.clone();
    let mut v = CMat::identity(n, n);
    let eps = f64::EPSILON;

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha: f64 = w.column(p).norm_squared();
                let beta: f64 = w.column(q).norm_squared();
                let gamma: Complex64 = w.column(p).dotc(&w.column(q));
                let g = gamma.norm();
                if g == 0.0 || g <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let phase = gamma / g;
                let zeta = (beta - alpha) / (2.0 * g);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_columns(&mut w, p, q, c, s, phase);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
        if !rotated {
            break;
        }
    }

    let s: Vec<f64> = (0..n).map(|j| w.column(j).norm()).collect();
    let smax = s.iter().fold(0.0_f64, |m, &x| m.max(x));
    let cutoff = smax * eps * (a.nrows().max(1) as f64);
    let mut u = CMat::zeros(a.nrows(), n);
    let mut missing = Vec::new();
    for (j, &sj) in s.iter().enumerate().take(n) {
        if sj > cutoff {
            u.set_column(j, &(w.column(j) / Complex64::new(sj, 0.0)));
        } else {
            missing.push(j);
        }
    }
    complete_columns(&mut u, &missing);
    (u, s, v)
}

/// Fill the listed (zero) columns of `u` so that all columns are orthonormal,
/// by Gram-Schmidt on the standard basis.
fn complete_columns(u: &mut CMat, missing: &[usize]) {
    if missing.is_empty() {
        return;
    }
    let m = u.nrows();
    let mut filled: Vec<usize> = (0..u.ncols()).filter(|j| !missing.contains(j)).collect();
    let mut candidate = 0;
    for &j in missing {
        while candidate < m {
            let mut x = CMat::zeros(m, 1);
            x[(candidate, 0)] = Complex64::new(1.0, 0.0);
            candidate += 1;
            for _ in 0..2 {
                for &k in &filled {
                    let proj = u.column(k).dotc(&x.column(0));
                    let col = u.column(k).into_owned();
                    x.column_mut(0).axpy(-proj, &col, Complex64::new(1.0, 0.0));
                }
            }
            let norm = x.norm();
            if norm > 0.5 {
                u.set_column(j, &(x.column(0) / Complex64::new(norm, 0.0)));
                filled.push(j);
                break;
            }
        }
    }
}

/// Replace columns `p`, `q` of `m` by `c m_p - s e^{-iφ} m_q` and `s m_p + c e^{-iφ} m_q`
/// where `phase = e^{iφ}`.
fn rotate_columns(m: &mut CMat, p: usize, q: usize, c: f64, s: f64, phase: Complex64) {
    let ph = phase.conj();
    for i in 0..m.nrows() {
        let mp = m[(i, p)];
        let mq = m[(i, q)] * ph;
        m[(i, p)] = mp * c - mq * s;
        m[(i, q)] = mp * s + mq * c;
    }
}

/// Thin SVD `a = u diag(s) v^H` with `min(m, n)` orthonormal columns in `u` and `v`, unsorted.
pub(crate) fn svd(a: &CMat) -> (CMat, Vec<f64>, CMat) {
    if a.nrows() >= a.ncols() {
        one_sided(a)
    } else {
        let (u, s, v) = one_sided(&a.adjoint());
        (v, s, u)
    }
}

/// Eigen-decomposition of a Hermitian matrix (only the upper triangle is trusted), unsorted.
pub(crate) fn hermitian_eigen(a: &CMat) -> (Vec<f64>, CMat) {
    let n = a.nrows();
    let mut m = (a + a.adjoint()) * Complex64::new(0.5, 0.0);
    let mut v = CMat::identity(n, n);

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[(i, j)].norm_sqr())
            .sum();
        let diag: f64 = (0..n).map(|i| m[(i, i)].norm_sqr()).sum();
        if off <= (f64::EPSILON * f64::EPSILON) * (diag + off) * 1e-2 || off == 0.0 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[(p, q)];
                let g = apq.norm();
                if g == 0.0 {
                    continue;
                }
                let phase = apq / g;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (2.0 * g);
                let t = if tau == 0.0 { 1.0 } else { tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt()) };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                // M <- G^H M G with G = D R: columns first, then rows.
                rotate_columns(&mut m, p, q, c, s, phase);
                let ph = phase;
                for j in 0..n {
                    let mp = m[(p, j)];
                    let mq = m[(q, j)] * ph;
                    m[(p, j)] = mp * c - mq * s;
                    m[(q, j)] = mp * s + mq * c;
                }
                m[(p, q)] = Complex64::new(0.0, 0.0);
                m[(q, p)] = Complex64::new(0.0, 0.0);
                rotate_columns(&mut v, p, q, c, s, phase);
            }
        }
    }
    ((0..n).map(|i| m[(i, i)].re).collect(), v)
}
