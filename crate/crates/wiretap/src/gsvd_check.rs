//! Randomized self-check of the GSVD transform.

use wiretap_core::linalg::{eye, fro, gsvd_transform, subspace_dims_oracle, to_complex, CMat};
use wiretap_core::{sample_channel, AntennaConfig};

use crate::harness::trial_seed;

#[derive(Debug, Clone, Default, PartialEq)]
pub struct GsvdCheckReport {
    pub trials: usize,
    /// Largest relative reconstruction or orthogonality residual seen.
    pub max_residual: f64,
    /// One line per failing instance.
    pub failures: Vec<String>,
}

impl GsvdCheckReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Reconstruction and orthogonality residuals of the GSVD of `(h, g)`.
pub fn gsvd_residual(h: &CMat, g: &CMat) -> wiretap_core::Result<f64> {
    let res = gsvd_transform(h, g)?;
    let d1 = to_complex(&res.d1);
    let d2 = to_complex(&res.d2);
    let rel = |m: &CMat, scale: &CMat| fro(m) / fro(scale).max(1e-300);
    let mut worst = 0.0_f64;
    if h.ncols() > 0 {
        worst = worst.max(rel(&(h * &res.psi1 - &res.x * d1.adjoint()), h));
        worst = worst.max(fro(&(res.psi1.adjoint() * &res.psi1 - eye(h.ncols()))));
    }
    if g.ncols() > 0 {
        worst = worst.max(rel(&(g * &res.psi2 - &res.x * d2.adjoint()), g));
        worst = worst.max(fro(&(res.psi2.adjoint() * &res.psi2 - eye(g.ncols()))));
    }
    worst = worst.max(fro(&(d1.adjoint() * &d1 + d2.adjoint() * &d2 - eye(res.k))));
    Ok(worst)
}

/// Draw `(N, M, K)` uniformly from `[1, 6]^3` per trial and check residuals
/// against `tol` and the subspace dimensions against plain rank arithmetic.
pub fn gsvd_check(trials: usize, seed: u64, tol: f64) -> GsvdCheckReport {
    let mut report = GsvdCheckReport { trials, ..Default::default() };
    for t in 0..trials {
        let s = trial_seed(seed, 0, t);
        let dim = |shift: u32| 1 + ((s >> shift) % 6) as usize;
        let (n, m, k) = (dim(0), dim(8), dim(16));
        let ch = sample_channel(AntennaConfig { na: m, nb: 1, ne: n, nj: k }, s);
        let (h, g) = (&ch.g1, &ch.h2);
        let residual = match gsvd_residual(h, g) {
            Ok(r) => r,
            Err(e) => {
                report.failures.push(format!("({n},{m},{k}) seed {s}: {e}"));
                continue;
            }
        };
        report.max_residual = report.max_residual.max(residual);
        if !(residual <= tol) {
            report.failures.push(format!("({n},{m},{k}) seed {s}: residual {residual:.3e}"));
        }
        let dims = gsvd_transform(h, g).map(|r| r.dims());
        match (dims, subspace_dims_oracle(h, g)) {
            (Ok(d), Ok(o)) if d == o => {}
            (d, o) => report.failures.push(format!("({n},{m},{k}) seed {s}: dims {d:?} vs oracle {o:?}")),
        }
    }
    report
}
