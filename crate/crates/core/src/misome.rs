//! Secrecy capacity of the helper-assisted channel with a single-antenna receiver.
//!
//! The capacity is found by a two-layer search: an outer one-dimensional search
//! over the eavesdropper SNR bound `τ` and an inner SDP giving the best receiver
//! SNR `f(τ)` under that bound. A rank-one source covariance is then recovered
//! with a power-minimization SDP. The module also provides the closed-form
//! alignment rate and a zero-forcing baseline.

use alloc::{format, string::String, vec, vec::Vec};
use core::f64::consts::LN_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{secrecy_rate, AntennaConfig, CovariancePair, Diagnostics, SecrecyResult, WiretapChannel};
use crate::convex::{solve_sdp, HermExpr, LinExpr, SdpProblem};
use crate::error::{Error, Result};
use crate::linalg::{clip_psd, cr, eye, hermitian_eigen, hermitian_part, null_space_basis, trace_re, CMat};
use crate::sdof::misome_alignment_directions;

/// Target relative duality gap of the inner SDP solves.
const SDP_ACCURACY: f64 = 1e-9;

/// Outer search parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoLayerConfig {
    /// Number of `τ` grid points, including `τ = 0`.
    pub grid_points: usize,
    /// Golden-section iterations in the best grid cell.
    pub refinement_iterations: usize,
    /// Eigenvalue ratio `λ2/λ1` under which the relaxed source covariance is accepted as rank one.
    pub rank_one_threshold: f64,
}

impl Default for TwoLayerConfig {
    fn default() -> Self {
        TwoLayerConfig { grid_points: 200, refinement_iterations: 40, rank_one_threshold: 1e-6 }
    }
}

impl TwoLayerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid_points < 2 {
            return Err(Error::InvalidInput("the τ grid needs at least 2 points".into()));
        }
        if !(self.rank_one_threshold > 0.0 && self.rank_one_threshold < 1.0) {
            return Err(Error::InvalidInput("rank-one threshold must lie in (0, 1)".into()));
        }
        Ok(())
    }
}

/// Solution of the Charnes-Cooper transformed inner problem at one `τ`.
#[derive(Debug, Clone, PartialEq)]
pub struct CharnesCooperSolution {
    pub q_tilde_a: CMat,
    pub q_tilde_j: CMat,
    pub xi: f64,
    pub f_tau: f64,
}

impl CharnesCooperSolution {
    /// The covariances `(Q̃a/ξ, Q̃j/ξ)` of the original problem.
    pub fn descaled(&self) -> CovariancePair {
        let s = cr(1.0 / self.xi);
        CovariancePair { qa: psd_part(&(&self.q_tilde_a * s)), qj: psd_part(&(&self.q_tilde_j * s)) }
    }
}

fn require_single_receiver(ch: &WiretapChannel) -> Result<()> {
    if ch.config.nb != 1 {
        return Err(Error::InvalidInput(format!("single-antenna receiver required, got Nb = {}", ch.config.nb)));
    }
    Ok(())
}

/// Drop the round-off negative eigenvalues an interior-point solution can carry.
fn psd_part(q: &CMat) -> CMat {
    clip_psd(q, f64::INFINITY).unwrap_or_else(|_| hermitian_part(q))
}

fn quad(row: &CMat, q: &CMat) -> f64 {
    (row * q * row.adjoint())[(0, 0)].re
}

fn rank_one(dir: &CMat, power: f64) -> CMat {
    let n = dir.norm();
    if n == 0.0 {
        return CMat::zeros(dir.nrows(), dir.nrows());
    }
    let u = dir / cr(n);
    hermitian_part(&(&u * u.adjoint() * cr(power)))
}

/// `τ = 0`: the source must stay inside `null(G1)` and the helper stays silent.
fn inner_at_zero(ch: &WiretapChannel, power: f64) -> CharnesCooperSolution {
    let AntennaConfig { na, nj, .. } = ch.config;
    let null = null_space_basis(&ch.g1);
    let (qa, f) = if null.ncols() == 0 {
        (CMat::zeros(na, na), 0.0)
    } else {
        let dir = &null * (null.adjoint() * ch.h1.adjoint());
        let qa = rank_one(&dir, power);
        let f = quad(&ch.h1, &qa);
        (qa, f)
    };
    CharnesCooperSolution { q_tilde_a: qa, q_tilde_j: CMat::zeros(nj, nj), xi: 1.0, f_tau: f }
}

/// Best receiver SNR `f(τ)` when the eavesdropper SNR is capped at `τ`.
///
/// The SDP is solved in power-normalized variables `Q̂ = Q̃/P`.
pub fn inner_sdp_f_tau(ch: &WiretapChannel, power: f64, tau: f64) -> Result<CharnesCooperSolution> {
    require_single_receiver(ch)?;
    if !(tau >= 0.0) || !tau.is_finite() {
        return Err(Error::InvalidInput(format!("τ must be finite and non-negative, got {tau}")));
    }
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {power}")));
    }
    if tau == 0.0 || ch.h1.norm() == 0.0 {
        let mut sol = inner_at_zero(ch, power);
        if ch.h1.norm() == 0.0 {
            sol.f_tau = 0.0;
        }
        return Ok(sol);
    }
    let AntennaConfig { na, ne, nj, .. } = ch.config;
    let mut p = SdpProblem::new();
    let qa = p.psd_variable(na);
    let qj = p.psd_variable(nj);
    let xi = p.scalar();
    p.equal(LinExpr::scalar(xi, 1.0).plus_quad(qj, &ch.g2, power).plus_constant(-1.0));
    p.psd(
        HermExpr::zeros(ne)
            .plus_scalar(xi, &(eye(ne) * cr(tau / power)))
            .plus_congruence(qj, &ch.h2, tau)
            .plus_congruence(qa, &ch.g1, -1.0),
    );
    p.nonneg(LinExpr::scalar(xi, 1.0).plus_trace(qa, -1.0).plus_trace(qj, -1.0));
    p.nonneg(LinExpr::scalar(xi, 1.0));
    p.maximize(LinExpr::default().plus_quad(qa, &ch.h1, 1.0));

    let sol = solve_sdp(&p, SDP_ACCURACY).map_err(|e| with_tau(e, tau))?;
    if !sol.acceptable(1e-6) {
        return Err(Error::Solver(format!(
            "inner SDP at τ = {tau:.6e} ended with {:?} after {} iterations (gap {:.2e}, residuals {:.2e}/{:.2e})",
            sol.status, sol.iterations, sol.rel_gap, sol.primal_res, sol.dual_res
        )));
    }
    let pw = cr(power);
    let q_tilde_a = hermitian_part(&(sol.hermitian(qa) * pw));
    let q_tilde_j = hermitian_part(&(sol.hermitian(qj) * pw));
    let xi_val = sol.scalar(xi);
    if !(xi_val > 0.0) {
        return Err(Error::Solver(format!("inner SDP at τ = {tau:.6e} returned ξ = {xi_val:.3e}")));
    }
    Ok(CharnesCooperSolution { f_tau: quad(&ch.h1, &q_tilde_a).max(0.0), q_tilde_a, q_tilde_j, xi: xi_val })
}

fn with_tau(e: Error, tau: f64) -> Error {
    match e {
        Error::Solver(m) => Error::Solver(format!("τ = {tau:.6e}: {m}")),
        other => other,
    }
}

/// Sorted eigenvalue ratio `λ2/λ1` (0 for a zero or 1×1 matrix).
pub fn eigen_ratio(q: &CMat) -> f64 {
    let (mut vals, _) = hermitian_eigen(q);
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap_or(core::cmp::Ordering::Equal));
    if vals.len() < 2 || vals[0] <= 0.0 {
        return 0.0;
    }
    vals[1].max(0.0) / vals[0]
}

/// Principal rank-one part of `q`, keeping its trace.
fn principal_component(q: &CMat) -> CMat {
    let (vals, vecs) = hermitian_eigen(q);
    let (i, _) =
        vals.iter().enumerate().fold((0, f64::NEG_INFINITY), |best, (i, &v)| if v > best.1 { (i, v) } else { best });
    rank_one(&CMat::from_column_slice(q.nrows(), 1, vecs.column(i).as_slice()), trace_re(q).max(0.0))
}

/// Power-minimizing covariances that still reach receiver SNR `f_tau` under the `τ` bound.
///
/// The returned source covariance is rank one whenever a positive secrecy rate is
/// achievable. If the SDP fails, the principal eigenvector of the relaxed solution
/// `fallback` is used and the `rank-one-fallback` flag is raised in `flags`.
pub fn power_min_rank_one(
    ch: &WiretapChannel,
    power: f64,
    tau: f64,
    f_tau: f64,
    fallback: &CharnesCooperSolution,
    flags: &mut Vec<String>,
) -> Result<CovariancePair> {
    require_single_receiver(ch)?;
    let AntennaConfig { na, ne, nj, .. } = ch.config;
    if f_tau <= 0.0 {
        return Ok(CovariancePair { qa: CMat::zeros(na, na), qj: CMat::zeros(nj, nj) });
    }
    if tau == 0.0 {
        return Ok(inner_at_zero(ch, power).descaled());
    }
    // Variables Q̂ = Q/P; the SNR requirement is backed off by 1e-9 for strict feasibility.
    let target = f_tau * (1.0 - 1e-9);
    let mut p = SdpProblem::new();
    let qa = p.psd_variable(na);
    let qj = p.psd_variable(nj);
    p.nonneg(
        LinExpr::default().plus_quad(qa, &ch.h1, 1.0).plus_quad(qj, &ch.g2, -target).plus_constant(-target / power),
    );
    p.psd(
        HermExpr::zeros(ne)
            .plus_constant(&(eye(ne) * cr(tau / power)))
            .plus_congruence(qj, &ch.h2, tau)
            .plus_congruence(qa, &ch.g1, -1.0),
    );
    p.minimize(LinExpr::default().plus_trace(qa, 1.0).plus_trace(qj, 1.0));

    let fall_back = |flags: &mut Vec<String>| {
        flags.push("rank-one-fallback".into());
        let d = fallback.descaled();
        CovariancePair { qa: principal_component(&d.qa), qj: d.qj }
    };
    let sol = match solve_sdp(&p, SDP_ACCURACY) {
        Ok(s) if s.acceptable(1e-6) => s,
        _ => return Ok(fall_back(flags)),
    };
    let pw = cr(power);
    let cov = CovariancePair { qa: psd_part(&(sol.hermitian(qa) * pw)), qj: psd_part(&(sol.hermitian(qj) * pw)) };
    if cov.total_power() > power * (1.0 + 1e-6) {
        return Ok(fall_back(flags));
    }
    Ok(cov)
}

/// Two-layer objective `log2(1 + f) - log2(1 + τ)`.
pub fn two_layer_objective(f_tau: f64, tau: f64) -> f64 {
    ((1.0 + f_tau).ln() - (1.0 + tau).ln()) / LN_2
}

/// Everything the two-layer search produced.
#[derive(Debug, Clone)]
pub struct TwoLayerOutcome {
    pub result: SecrecyResult,
    pub tau_star: f64,
    pub f_tau_star: f64,
    /// Every successfully evaluated `(τ, f(τ))`.
    pub evaluations: Vec<(f64, f64)>,
}

impl TwoLayerOutcome {
    /// Best two-layer objective over the evaluations, in bits.
    pub fn objective(&self) -> f64 {
        two_layer_objective(self.f_tau_star, self.tau_star)
    }
}

/// `τ` grid: zero followed by `n - 1` log-spaced points ending at `upper`.
pub fn tau_grid(upper: f64, n: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if n < 2 || !(upper > 0.0) {
        return grid;
    }
    let m = n - 1;
    let lo = upper * 1e-6;
    let ratio = (upper / lo).ln();
    for i in 0..m {
        let t = if m == 1 { 1.0 } else { i as f64 / (m - 1) as f64 };
        grid.push(lo * (ratio * t).exp());
    }
    grid
}

/// Run the outer search and recover a rank-one optimal source covariance.
pub fn misome_two_layer(ch: &WiretapChannel, power: f64, cfg: &TwoLayerConfig) -> Result<TwoLayerOutcome> {
    require_single_receiver(ch)?;
    cfg.validate()?;
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {power}")));
    }
    let upper = power * ch.h1.norm_squared();
    let mut flags: Vec<String> = Vec::new();
    let mut evaluations: Vec<(f64, f64)> = Vec::new();
    let mut failures = 0usize;
    let mut best: Option<(f64, CharnesCooperSolution)> = None;

    let mut eval =
        |tau: f64, evaluations: &mut Vec<(f64, f64)>, best: &mut Option<(f64, CharnesCooperSolution)>| -> Option<f64> {
            match inner_sdp_f_tau(ch, power, tau) {
                Ok(sol) => {
                    let obj = two_layer_objective(sol.f_tau, tau);
                    evaluations.push((tau, sol.f_tau));
                    if best.as_ref().is_none_or(|(t, b)| obj > two_layer_objective(b.f_tau, *t)) {
                        *best = Some((tau, sol));
                    }
                    Some(obj)
                }
                Err(_) => {
                    failures += 1;
                    None
                }
            }
        };

    let grid = tau_grid(upper, cfg.grid_points);
    let values: Vec<Option<f64>> = grid.iter().map(|&t| eval(t, &mut evaluations, &mut best)).collect();
    let Some((best_idx, _)) = values.iter().enumerate().filter_map(|(i, v)| v.map(|v| (i, v))).fold(
        None,
        |acc: Option<(usize, f64)>, (i, v)| match acc {
            Some((_, bv)) if bv >= v => acc,
            _ => Some((i, v)),
        },
    ) else {
        return Err(Error::Solver("every inner SDP solve failed".into()));
    };

    if upper > 0.0 {
        let lo = grid[best_idx.saturating_sub(1)];
        let hi = grid[(best_idx + 1).min(grid.len() - 1)];
        golden_section(lo, hi, cfg.refinement_iterations, |t| {
            eval(t, &mut evaluations, &mut best).unwrap_or(f64::NEG_INFINITY)
        });
    }
    if failures > 0 {
        flags.push(format!("inner-failures={failures}"));
    }

    let (tau_star, sol) = best.ok_or_else(|| Error::Solver("every inner SDP solve failed".into()))?;
    let relaxed = sol.descaled();
    let cov = if sol.f_tau <= 0.0 {
        CovariancePair::zeros(ch.config)
    } else if eigen_ratio(&relaxed.qa) <= cfg.rank_one_threshold {
        relaxed
    } else {
        power_min_rank_one(ch, power, tau_star, sol.f_tau, &sol, &mut flags)?
    };
    let diagnostics =
        Diagnostics { iterations: evaluations.len(), converged: true, objective_trace: Vec::new(), flags };
    let result = SecrecyResult::evaluate(ch, cov, diagnostics)?;
    Ok(TwoLayerOutcome { result, tau_star, f_tau_star: sol.f_tau, evaluations })
}

/// Secrecy capacity with a single-antenna receiver.
pub fn misome_secrecy_capacity(ch: &WiretapChannel, power: f64, cfg: &TwoLayerConfig) -> Result<SecrecyResult> {
    Ok(misome_two_layer(ch, power, cfg)?.result)
}

/// Golden-section maximization of `f` on `[lo, hi]`; returns the best point seen.
pub fn golden_section(lo: f64, hi: f64, iterations: usize, mut f: impl FnMut(f64) -> f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    let mut best = if fc >= fd { (c, fc) } else { (d, fd) };
    for _ in 0..iterations {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        for (x, v) in [(c, fc), (d, fd)] {
            if v > best.1 {
                best = (x, v);
            }
        }
    }
    best
}

/// Closed-form best power split of the alignment scheme and the rate it achieves.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlignmentClosedForm {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub power: f64,
    pub x_star: f64,
    pub eta_max: f64,
    pub cs_sub: f64,
    pub y0: f64,
    pub kappa: f64,
    pub big_a: f64,
    pub big_b: f64,
    /// Whether the `b ≈ c` grid fallback was used.
    pub grid_fallback: bool,
}

/// `η(x) = (1 + a x)(1 + c(P - x)) / (1 + cP + (b - c) x)`.
pub fn eta(a: f64, b: f64, c: f64, power: f64, x: f64) -> f64 {
    (1.0 + a * x) * (1.0 + c * (power - x)) / (1.0 + c * power + (b - c) * x)
}

fn eta_grid_max(a: f64, b: f64, c: f64, power: f64) -> (f64, f64) {
    let n = 100_000;
    let step = power / n as f64;
    let (mut bx, mut bv) = (0.0, eta(a, b, c, power, 0.0));
    for i in 1..=n {
        let x = step * i as f64;
        let v = eta(a, b, c, power, x);
        if v > bv {
            bx = x;
            bv = v;
        }
    }
    let lo = (bx - step).max(0.0);
    let hi = (bx + step).min(power);
    let (gx, gv) = golden_section(lo, hi, 60, |x| eta(a, b, c, power, x));
    if gv > bv {
        (gx, gv)
    } else {
        (bx, bv)
    }
}

/// Maximize `η(x)` over `0 ≤ x ≤ P` in closed form.
pub fn eta_closed_form(a: f64, b: f64, c: f64, power: f64) -> Result<AlignmentClosedForm> {
    if !(a >= 0.0 && b >= 0.0 && c >= 0.0 && power > 0.0) || ![a, b, c, power].iter().all(|v| v.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "closed form needs a, b, c ≥ 0 and P > 0 (a={a}, b={b}, c={c}, P={power})"
        )));
    }
    let cp = 1.0 + c * power;
    let d = c - b;
    let big_a = a * c / (d * d);
    let big_b = b * cp * (a * cp + c - b) / (d * d);
    let kappa = (a * cp + c - b) / d + (2.0 * a * cp + c - b) * b / (d * d);
    let y0 = (big_b / big_a).sqrt();
    let mut out = AlignmentClosedForm {
        a,
        b,
        c,
        power,
        x_star: 0.0,
        eta_max: 1.0,
        cs_sub: 0.0,
        y0,
        kappa,
        big_a,
        big_b,
        grid_fallback: false,
    };
    if d.abs() < 1e-8 * b.max(c) || c == 0.0 {
        let (x, v) = eta_grid_max(a, b, c, power);
        out.x_star = x;
        out.eta_max = v;
        out.grid_fallback = true;
    } else {
        let (lo, hi) = (1.0 + b.min(c) * power, 1.0 + b.max(c) * power);
        if big_b > 0.0 && y0 >= lo && y0 <= hi {
            out.x_star = ((y0 - cp) / (b - c)).clamp(0.0, power);
        } else if eta(a, b, c, power, power) > 1.0 {
            out.x_star = power;
        } else {
            out.x_star = 0.0;
        }
        out.eta_max = eta(a, b, c, power, out.x_star);
    }
    out.cs_sub = out.eta_max.max(1.0).log2();
    Ok(out)
}

/// Alignment rate with the directions of [`misome_alignment_directions`] and the best power split.
pub fn alignment_closed_form(ch: &WiretapChannel, power: f64) -> Result<AlignmentClosedForm> {
    require_single_receiver(ch)?;
    let dirs = misome_alignment_directions(ch)?;
    let a = (&ch.h1 * &dirs.v_o).norm_squared();
    let b = (&ch.g1 * &dirs.v_o).norm_squared();
    let c = (&ch.h2 * dirs.helper_direction()).norm_squared();
    eta_closed_form(a, b, c, power)
}

/// Alignment scheme scored with the exact rate formulas.
pub fn alignment_scheme(ch: &WiretapChannel, power: f64) -> Result<(AlignmentClosedForm, SecrecyResult)> {
    let cf = alignment_closed_form(ch, power)?;
    let dirs = misome_alignment_directions(ch)?;
    let cov = CovariancePair {
        qa: rank_one(&dirs.v_o, cf.x_star),
        qj: rank_one(&dirs.helper_direction(), power - cf.x_star),
    };
    let mut diagnostics = Diagnostics { converged: true, ..Diagnostics::default() };
    if cf.grid_fallback {
        diagnostics.flag("grid-fallback");
    }
    Ok((cf, SecrecyResult::evaluate(ch, cov, diagnostics)?))
}

fn zf_covariances(ch: &WiretapChannel, gamma: &CMat, power: f64, x: f64) -> CovariancePair {
    let AntennaConfig { na, nj, .. } = ch.config;
    let qa = if ch.h1.norm() > 0.0 { rank_one(&ch.h1.adjoint(), x) } else { CMat::zeros(na, na) };
    let qj = if gamma.ncols() > 0 {
        hermitian_part(&(gamma * gamma.adjoint() * cr((power - x) / gamma.ncols() as f64)))
    } else {
        CMat::zeros(nj, nj)
    };
    CovariancePair { qa, qj }
}

/// Zero-forcing baseline: matched source beam, isotropic jamming in `null(g2)`,
/// best power split by a dense grid refined with golden section.
pub fn zf_baseline(ch: &WiretapChannel, power: f64) -> Result<SecrecyResult> {
    require_single_receiver(ch)?;
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {power}")));
    }
    let gamma = null_space_basis(&ch.g2);
    let mut flags = Vec::new();
    let rate = |x: f64| secrecy_rate(ch, &zf_covariances(ch, &gamma, power, x)).unwrap_or(f64::NEG_INFINITY);
    let x_best = if gamma.ncols() == 0 {
        flags.push(String::from("no-jamming"));
        if rate(power) >= rate(0.0) {
            power
        } else {
            0.0
        }
    } else {
        let n = 2000;
        let step = power / n as f64;
        let (mut bx, mut bv) = (0.0, rate(0.0));
        for i in 1..=n {
            let x = step * i as f64;
            let v = rate(x);
            if v > bv {
                bx = x;
                bv = v;
            }
        }
        let (gx, gv) = golden_section((bx - step).max(0.0), (bx + step).min(power), 50, rate);
        if gv > bv {
            gx
        } else {
            bx
        }
    };
    let diagnostics = Diagnostics { converged: true, flags, ..Diagnostics::default() };
    SecrecyResult::evaluate(ch, zf_covariances(ch, &gamma, power, x_best), diagnostics)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::sample_channel;
    use crate::linalg::trace_re;

    fn scalar(v: f64) -> CMat {
        CMat::from_element(1, 1, cr(v))
    }

    fn scalar_channel(h1: f64, g1: f64, g2: f64, h2: f64) -> WiretapChannel {
        WiretapChannel::new(scalar(h1), scalar(g1), scalar(g2), scalar(h2)).unwrap()
    }

    /// Max of `qa h1² / (1 + qj g2²)` over a grid subject to the τ bound and power.
    fn scalar_f_oracle(h1: f64, g1: f64, g2: f64, h2: f64, p: f64, tau: f64) -> f64 {
        let n = 400;
        let mut best = 0.0_f64;
        for i in 0..=n {
            let qa = p * i as f64 / n as f64;
            for j in 0..=n {
                let qj = p * j as f64 / n as f64;
                if qa + qj > p + 1e-12 {
                    continue;
                }
                if g1 * g1 * qa <= tau * (1.0 + h2 * h2 * qj) + 1e-12 {
                    best = best.max(qa * h1 * h1 / (1.0 + g2 * g2 * qj));
                }
            }
        }
        best
    }

    #[test]
    fn no_eavesdropper_channel_gets_full_power() {
        let ch = WiretapChannel::new(
            CMat::from_row_slice(1, 2, &[cr(1.0), cr(0.5)]),
            CMat::zeros(2, 2),
            CMat::from_row_slice(1, 2, &[cr(0.3), cr(0.7)]),
            CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.0), cr(0.0), cr(1.0)]),
        )
        .unwrap();
        let p = 4.0;
        let h2 = ch.h1.norm_squared();
        for tau in [0.0, 0.5, 3.0] {
            let sol = inner_sdp_f_tau(&ch, p, tau).unwrap();
            assert!((sol.f_tau - p * h2).abs() < 1e-6 * p * h2, "τ={tau}: {}", sol.f_tau);
            assert!(trace_re(&sol.descaled().qj) < 1e-6);
        }
        let out = misome_two_layer(&ch, p, &TwoLayerConfig::default()).unwrap();
        assert!((out.result.cs - (1.0 + p * h2).log2()).abs() < 1e-6);
        assert!(out.tau_star < 1e-6);
    }

    #[test]
    fn zero_tau_confines_source_to_null_space() {
        let ch = sample_channel(AntennaConfig::new(3, 1, 2, 1).unwrap(), 4);
        let p = 2.0;
        let sol = inner_sdp_f_tau(&ch, p, 0.0).unwrap();
        let null = null_space_basis(&ch.g1);
        let want = p * (&ch.h1 * &null).norm_squared();
        assert!((sol.f_tau - want).abs() < 1e-10);
        let ch = sample_channel(AntennaConfig::new(2, 1, 3, 2).unwrap(), 4);
        assert_eq!(inner_sdp_f_tau(&ch, p, 0.0).unwrap().f_tau, 0.0);
    }

    #[test]
    fn scalar_inner_matches_grid() {
        let sol = inner_sdp_f_tau(&scalar_channel(1.0, 1.0, 1.0, 1.0), 10.0, 1.0).unwrap();
        let oracle = scalar_f_oracle(1.0, 1.0, 1.0, 1.0, 10.0, 1.0);
        assert!((sol.f_tau - oracle).abs() < 1e-3 * oracle.max(1.0), "{} vs {oracle}", sol.f_tau);
        assert!((sol.xi + sol.q_tilde_j[(0, 0)].re - 1.0).abs() < 1e-7);
    }

    #[test]
    fn charnes_cooper_invariants_hold() {
        let ch = sample_channel(AntennaConfig::new(3, 1, 3, 2).unwrap(), 11);
        let p = 10.0;
        for tau in [0.1, 1.0, 5.0] {
            let sol = inner_sdp_f_tau(&ch, p, tau).unwrap();
            assert!(sol.xi > 0.0);
            assert!((sol.xi + quad(&ch.g2, &sol.q_tilde_j) - 1.0).abs() < 1e-7);
            assert!(trace_re(&sol.q_tilde_a) + trace_re(&sol.q_tilde_j) <= sol.xi * p + 1e-7 * p);
            sol.descaled().validated(ch.config).unwrap();
        }
    }

    #[test]
    fn symmetric_scalar_channel_has_zero_capacity() {
        let ch = scalar_channel(1.3, 1.3, 0.0, 0.0);
        let r = misome_secrecy_capacity(&ch, 10.0, &TwoLayerConfig::default()).unwrap();
        assert!(r.cs < 1e-6, "{}", r.cs);
    }

    #[test]
    fn power_min_is_rank_one_and_keeps_snr() {
        let ch = sample_channel(AntennaConfig::new(3, 1, 3, 2).unwrap(), 2);
        let (p, tau) = (10.0, 1.0);
        let sol = inner_sdp_f_tau(&ch, p, tau).unwrap();
        let mut flags = Vec::new();
        let cov = power_min_rank_one(&ch, p, tau, sol.f_tau, &sol, &mut flags).unwrap();
        assert!(flags.is_empty(), "{flags:?}");
        assert!(eigen_ratio(&cov.qa) <= 1e-5, "{}", eigen_ratio(&cov.qa));
        assert!(cov.total_power() <= p * (1.0 + 1e-6));
        let snr = quad(&ch.h1, &cov.qa) / (1.0 + quad(&ch.g2, &cov.qj));
        assert!((snr - sol.f_tau).abs() <= 1e-5 * sol.f_tau);
    }

    #[test]
    fn power_min_with_blind_eavesdropper() {
        let ch = WiretapChannel::new(
            CMat::from_row_slice(1, 2, &[cr(1.0), cr(2.0)]),
            CMat::zeros(1, 2),
            scalar(1.0),
            scalar(1.0),
        )
        .unwrap();
        let sol = inner_sdp_f_tau(&ch, 5.0, 1.0).unwrap();
        let mut flags = Vec::new();
        let cov = power_min_rank_one(&ch, 5.0, 1.0, sol.f_tau, &sol, &mut flags).unwrap();
        let want = rank_one(&ch.h1.adjoint(), 5.0);
        assert!((&cov.qa - &want).norm() < 1e-5 * 5.0);
        assert!(trace_re(&cov.qj) < 1e-6);
    }

    #[test]
    fn scalar_capacity_matches_grid() {
        let ch = scalar_channel(2.0, 1.0, 1.0, 2.0);
        let p = 10.0;
        let r = misome_secrecy_capacity(&ch, p, &TwoLayerConfig::default()).unwrap();
        let n = 400;
        let mut oracle = 0.0_f64;
        for i in 0..=n {
            for j in 0..=n - i {
                let cov = CovariancePair { qa: scalar(p * i as f64 / n as f64), qj: scalar(p * j as f64 / n as f64) };
                oracle = oracle.max(secrecy_rate(&ch, &cov).unwrap());
            }
        }
        assert!((r.cs - oracle).abs() < 2e-2, "{} vs {oracle}", r.cs);
        assert!(r.cs >= oracle - 1e-9);
    }

    #[test]
    fn eta_example() {
        let cf = eta_closed_form(2.0, 1.0, 4.0, 10.0).unwrap();
        let step = 1e-4;
        let (mut gx, mut gv) = (0.0, 0.0);
        let mut x = 0.0;
        while x <= 10.0 {
            let v = eta(2.0, 1.0, 4.0, 10.0, x);
            if v > gv {
                gx = x;
                gv = v;
            }
            x += step;
        }
        assert!((cf.x_star - gx).abs() < 1e-3);
        assert!((cf.eta_max - gv).abs() <= 1e-6 * gv);
        assert!((cf.x_star - 6.71).abs() < 0.01);
        assert!((cf.eta_max - 9.8).abs() < 0.05);
        assert!((cf.cs_sub - 3.29).abs() < 0.01);
        assert!((cf.kappa - 2.0 * (cf.big_a * cf.big_b).sqrt() - cf.eta_max).abs() < 1e-9 * cf.eta_max);
    }

    #[test]
    fn eta_trivial_when_source_weaker_than_eavesdropper() {
        let cf = eta_closed_form(0.2, 1.0, 0.1, 10.0).unwrap();
        assert!(cf.big_b <= 0.0);
        assert_eq!(cf.x_star, 0.0);
        assert_eq!(cf.cs_sub, 0.0);
    }

    #[test]
    fn eta_equal_gains_uses_grid() {
        let cf = eta_closed_form(2.0, 1.0, 1.0, 10.0).unwrap();
        assert!(cf.grid_fallback);
        // η(x) = (1 + 2x)(11 - x)/11 peaks at x = 5.25.
        assert!((cf.x_star - 5.25).abs() < 1e-6);
    }

    #[test]
    fn alignment_closed_form_matches_exact_rate() {
        let cfg = AntennaConfig::new(3, 1, 3, 2).unwrap();
        for seed in 0..5 {
            let ch = sample_channel(cfg, seed);
            let (cf, r) = alignment_scheme(&ch, 100.0).unwrap();
            assert!((cf.cs_sub - r.cs).abs() < 1e-8, "seed {seed}: {} vs {}", cf.cs_sub, r.cs);
        }
    }

    #[test]
    fn alignment_high_power_asymptote() {
        let ch = sample_channel(AntennaConfig::new(3, 1, 3, 2).unwrap(), 7);
        let p = 1e5;
        let cf = alignment_closed_form(&ch, p).unwrap();
        let approx = (cf.a * p).log2() - 2.0 * (1.0 + (cf.b / cf.c).sqrt()).log2();
        assert!((cf.cs_sub - approx).abs() < 0.05, "{} vs {approx}", cf.cs_sub);
    }

    #[test]
    fn zf_examples() {
        let ch = WiretapChannel::new(
            CMat::from_row_slice(1, 2, &[cr(1.0), cr(1.0)]),
            CMat::zeros(2, 2),
            CMat::from_row_slice(1, 2, &[cr(1.0), cr(-0.5)]),
            CMat::from_row_slice(2, 2, &[cr(1.0), cr(0.2), cr(0.1), cr(1.0)]),
        )
        .unwrap();
        let r = zf_baseline(&ch, 3.0).unwrap();
        assert!((r.cs - (1.0 + 3.0 * 2.0_f64).log2()).abs() < 1e-9);
        assert!((trace_re(&r.covariances.qa) - 3.0).abs() < 1e-9);

        let ch = scalar_channel(2.0, 1.0, 1.0, 1.0);
        let r = zf_baseline(&ch, 10.0).unwrap();
        assert!(r.diagnostics.flags.iter().any(|f| f == "no-jamming"));
        let no_helper = secrecy_rate(&ch, &CovariancePair { qa: scalar(10.0), qj: scalar(0.0) }).unwrap();
        assert!((r.cs - no_helper).abs() < 1e-12);
    }

    #[test]
    fn zf_has_a_ceiling() {
        let ch = sample_channel(AntennaConfig::new(3, 1, 3, 2).unwrap(), 3);
        let r40 = zf_baseline(&ch, 1e4).unwrap().cs;
        let r50 = zf_baseline(&ch, 1e5).unwrap().cs;
        assert!(r50 - r40 < 0.5, "{r40} -> {r50}");
    }
}
