//! Gauss-Seidel secrecy-rate maximization for multi-antenna receivers.
//!
//! Both log-determinants with an inverse are written variationally,
//! `ln|E⁻¹| = max_S −tr(SE) + ln|S| + N`, which turns the secrecy rate into a
//! surrogate `θ(S0, S1, Qa, Qj)` that is concave in the covariances for fixed
//! `S` and maximized in closed form over `S` for fixed covariances.

use alloc::{format, vec, vec::Vec};
use core::f64::consts::LN_2;

#[allow(unused_imports)]
use num_traits::Float;

use crate::channel::{rate_eavesdropper, rate_legitimate, CovariancePair, Diagnostics, SecrecyResult, WiretapChannel};
use crate::convex::{solve_logdet_max, LogDetProblem, LogDetSettings, LogDetTerm};
use crate::error::{Error, Result};
use crate::linalg::{congruence, eye, hermitian_part, inner_re, inverse_hpd, ln_det_hpd, CMat};
use crate::sdof::alignment_precoders;

/// Dual variables of the two variational log-determinants.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationalState {
    pub s0: CMat,
    pub s1: CMat,
}

impl VariationalState {
    pub fn identity(ch: &WiretapChannel) -> Self {
        VariationalState { s0: eye(ch.config.nb), s1: eye(ch.config.ne) }
    }
}

/// `E0 = I + G2 Qj G2^H` (receiver interference-plus-noise).
fn e0(ch: &WiretapChannel, cov: &CovariancePair) -> CMat {
    eye(ch.config.nb) + congruence(&ch.g2, &cov.qj)
}

/// `E1 = I + H2 Qj H2^H + G1 Qa G1^H` (eavesdropper signal-plus-jamming-plus-noise).
fn e1(ch: &WiretapChannel, cov: &CovariancePair) -> CMat {
    eye(ch.config.ne) + congruence(&ch.h2, &cov.qj) + congruence(&ch.g1, &cov.qa)
}

/// `φ(S) = −tr(S E) + ln|S| + N`, or `-∞` for singular `S`.
fn phi(s: &CMat, e: &CMat) -> f64 {
    match ln_det_hpd(s) {
        Some(ld) => -inner_re(s, e) + ld + s.nrows() as f64,
        None => f64::NEG_INFINITY,
    }
}

/// `ω = ln|I + H1 Qa H1^H + G2 Qj G2^H| + ln|I + H2 Qj H2^H|`.
fn omega(ch: &WiretapChannel, cov: &CovariancePair) -> f64 {
    let rx = eye(ch.config.nb) + congruence(&ch.h1, &cov.qa) + congruence(&ch.g2, &cov.qj);
    let jam = eye(ch.config.ne) + congruence(&ch.h2, &cov.qj);
    match (ln_det_hpd(&rx), ln_det_hpd(&jam)) {
        (Some(a), Some(b)) => a + b,
        _ => f64::NEG_INFINITY,
    }
}

/// Surrogate objective in nats.
pub fn theta_objective(ch: &WiretapChannel, state: &VariationalState, cov: &CovariancePair) -> f64 {
    phi(&state.s0, &e0(ch, cov)) + phi(&state.s1, &e1(ch, cov)) + omega(ch, cov)
}

/// Exact maximizer of `θ` over `(S0, S1)` at fixed covariances.
pub fn s_update(ch: &WiretapChannel, cov: &CovariancePair) -> Result<VariationalState> {
    let s0 = inverse_hpd(&e0(ch, cov)).ok_or_else(|| Error::Internal("I + G2 Qj G2^H is not invertible".into()))?;
    let s1 =
        inverse_hpd(&e1(ch, cov)).ok_or_else(|| Error::Internal("eavesdropper covariance is not invertible".into()))?;
    Ok(VariationalState { s0: hermitian_part(&s0), s1: hermitian_part(&s1) })
}

/// Result of a covariance update.
#[derive(Debug, Clone)]
pub struct QUpdate {
    pub cov: CovariancePair,
    pub converged: bool,
    pub iterations: usize,
}

/// Maximize `θ` over the covariances at fixed `(S0, S1)`, starting from `start`.
pub fn q_update(
    ch: &WiretapChannel,
    state: &VariationalState,
    power: f64,
    start: &CovariancePair,
    settings: &LogDetSettings,
) -> Result<QUpdate> {
    let cfg = ch.config;
    let problem = LogDetProblem {
        block_dims: vec![cfg.na, cfg.nj],
        terms: vec![
            LogDetTerm { weight: 1.0, constant: eye(cfg.nb), parts: vec![(0, ch.h1.clone()), (1, ch.g2.clone())] },
            LogDetTerm { weight: 1.0, constant: eye(cfg.ne), parts: vec![(1, ch.h2.clone())] },
        ],
        linear: vec![
            -(ch.g1.adjoint() * &state.s1 * &ch.g1),
            -(ch.g2.adjoint() * &state.s0 * &ch.g2) - ch.h2.adjoint() * &state.s1 * &ch.h2,
        ],
        power,
    };
    let sol = solve_logdet_max(&problem, &[start.qa.clone(), start.qj.clone()], settings)?;
    let mut blocks = sol.blocks.into_iter();
    let cov = CovariancePair {
        qa: blocks.next().unwrap_or_else(|| CMat::zeros(cfg.na, cfg.na)),
        qj: blocks.next().unwrap_or_else(|| CMat::zeros(cfg.nj, cfg.nj)),
    };
    Ok(QUpdate { cov, converged: sol.converged, iterations: sol.iterations })
}

/// Initial point of the alternating ascent.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GsInit {
    /// Alignment precoders with equal per-stream power, isotropic if none exist.
    Alignment,
    Isotropic,
}

#[derive(Debug, Clone)]
pub struct GsSettings {
    /// Relative `θ` improvement per iteration below which the ascent stops.
    pub tol: f64,
    pub max_iters: usize,
    pub inner: LogDetSettings,
}

impl Default for GsSettings {
    fn default() -> Self {
        GsSettings { tol: 1e-2, max_iters: 100, inner: LogDetSettings::default() }
    }
}

#[derive(Debug, Clone)]
pub struct GsReport {
    pub iterations: usize,
    /// `θ` in nats after every half-step, starting with the first S-update.
    pub objective_trace: Vec<f64>,
    /// `|θ − ln2 (Rd − Re)|` right after every S-update.
    pub bridge_gaps: Vec<f64>,
    pub final_result: SecrecyResult,
    pub init_result: SecrecyResult,
    pub converged: bool,
}

/// Starting covariances for `init`.
pub fn initial_covariances(ch: &WiretapChannel, power: f64, init: GsInit) -> (CovariancePair, Option<&'static str>) {
    match init {
        GsInit::Isotropic => (CovariancePair::isotropic(ch.config, power), None),
        GsInit::Alignment => match alignment_precoders(ch) {
            Ok(pair) => (pair.equal_power_covariances(power), None),
            Err(_) => (CovariancePair::isotropic(ch.config, power), Some("init-isotropic-fallback")),
        },
    }
}

fn rate_gap_nats(ch: &WiretapChannel, cov: &CovariancePair) -> Result<f64> {
    Ok((rate_legitimate(ch, cov)? - rate_eavesdropper(ch, cov)?) * LN_2)
}

/// Alternate exact S-updates and log-det covariance updates from `init`.
pub fn gauss_seidel_solve(
    ch: &WiretapChannel,
    power: f64,
    init: &CovariancePair,
    settings: &GsSettings,
) -> Result<GsReport> {
    if !(power > 0.0) || !power.is_finite() {
        return Err(Error::InvalidInput(format!("power must be positive, got {power}")));
    }
    let mut cov = init.validated(ch.config)?;
    if !cov.within_budget(power) {
        return Err(Error::InvalidInput(format!(
            "initial covariances use power {:.6e} > {power:.6e}",
            cov.total_power()
        )));
    }
    let mut diagnostics = Diagnostics::default();
    let init_result = SecrecyResult::evaluate(ch, cov.clone(), Diagnostics::default())?;

    let mut state = s_update(ch, &cov)?;
    let mut theta = theta_objective(ch, &state, &cov);
    let mut trace = vec![theta];
    let mut bridge_gaps = vec![(theta - rate_gap_nats(ch, &cov)?).abs()];
    let mut converged = false;
    let mut iterations = 0;
    let mut inner_stalls = 0usize;

    while iterations < settings.max_iters {
        let upd = q_update(ch, &state, power, &cov, &settings.inner)?;
        if !upd.converged {
            inner_stalls += 1;
        }
        cov = upd.cov;
        trace.push(theta_objective(ch, &state, &cov));
        state = s_update(ch, &cov)?;
        let next = theta_objective(ch, &state, &cov);
        trace.push(next);
        bridge_gaps.push((next - rate_gap_nats(ch, &cov)?).abs());
        iterations += 1;
        let improvement = next - theta;
        theta = next;
        if improvement <= settings.tol * theta.abs().max(1e-9) {
            converged = true;
            break;
        }
    }
    if inner_stalls > 0 {
        diagnostics.flag(format!("q-update-max-iters={inner_stalls}"));
    }
    diagnostics.iterations = iterations;
    diagnostics.converged = converged;
    diagnostics.objective_trace = trace.clone();
    let mut final_result = SecrecyResult::evaluate(ch, cov, diagnostics)?;
    if final_result.rd < final_result.re {
        final_result.diagnostics.flag("negative-rate-clamped");
    }
    Ok(GsReport { iterations, objective_trace: trace, bridge_gaps, final_result, init_result, converged })
}

/// Gauss-Seidel from the documented initialization.
pub fn gauss_seidel_from(ch: &WiretapChannel, power: f64, init: GsInit, settings: &GsSettings) -> Result<GsReport> {
    let (cov, note) = initial_covariances(ch, power, init);
    let mut report = gauss_seidel_solve(ch, power, &cov, settings)?;
    if let Some(n) = note {
        report.final_result.diagnostics.flag(n);
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{random_cn_matrix, sample_channel, AntennaConfig};
    use crate::linalg::{cr, trace_re};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar(v: f64) -> CMat {
        CMat::from_element(1, 1, cr(v))
    }

    fn scalar_channel(h1: f64, g1: f64, g2: f64, h2: f64) -> WiretapChannel {
        WiretapChannel::new(scalar(h1), scalar(g1), scalar(g2), scalar(h2)).unwrap()
    }

    fn random_psd(rng: &mut ChaCha8Rng, n: usize, trace: f64) -> CMat {
        let b = random_cn_matrix(rng, n, n);
        let m = &b * b.adjoint();
        let t = trace_re(&m);
        hermitian_part(&(m * cr(trace / t)))
    }

    #[test]
    fn theta_at_zero_is_zero() {
        let ch = sample_channel(AntennaConfig::new(2, 2, 3, 2).unwrap(), 1);
        let cov = CovariancePair::zeros(ch.config);
        let st = VariationalState::identity(&ch);
        assert!(theta_objective(&ch, &st, &cov).abs() < 1e-14);
        let st = s_update(&ch, &cov).unwrap();
        assert!((st.s0 - eye(2)).norm() < 1e-14 && (st.s1 - eye(3)).norm() < 1e-14);
    }

    #[test]
    fn scalar_examples() {
        let ch = scalar_channel(1.0, 1.0, 1.0, 1.0);
        let cov = CovariancePair { qa: scalar(1.0), qj: scalar(1.0) };
        let st = s_update(&ch, &cov).unwrap();
        assert!(theta_objective(&ch, &st, &cov).abs() < 1e-14);
        let cov = CovariancePair { qa: scalar(0.0), qj: scalar(3.0) };
        assert!((s_update(&ch, &cov).unwrap().s0[(0, 0)].re - 0.25).abs() < 1e-15);
    }

    #[test]
    fn s_update_is_maximal_and_bridges_rates() {
        let ch = sample_channel(AntennaConfig::new(2, 2, 2, 2).unwrap(), 5);
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cov = CovariancePair { qa: random_psd(&mut rng, 2, 1.5), qj: random_psd(&mut rng, 2, 0.7) };
        let best = s_update(&ch, &cov).unwrap();
        let tb = theta_objective(&ch, &best, &cov);
        assert!((tb - rate_gap_nats(&ch, &cov).unwrap()).abs() < 1e-10);
        for _ in 0..100 {
            let st = VariationalState { s0: random_psd(&mut rng, 2, 2.0), s1: random_psd(&mut rng, 2, 2.0) };
            assert!(theta_objective(&ch, &st, &cov) <= tb + 1e-12);
        }
    }

    #[test]
    fn q_update_heavy_penalty_silences_source() {
        let ch = sample_channel(AntennaConfig::new(2, 2, 2, 2).unwrap(), 3);
        let st = VariationalState { s0: eye(2), s1: eye(2) * cr(1e4) };
        let start = CovariancePair::isotropic(ch.config, 1.0);
        let upd = q_update(&ch, &st, 1.0, &start, &LogDetSettings::default()).unwrap();
        assert!(trace_re(&upd.cov.qa) < 0.01);
    }

    #[test]
    fn q_update_scalar_matches_grid() {
        let ch = scalar_channel(1.0, 1.0, 1.0, 1.0);
        let st = VariationalState { s0: scalar(1.0), s1: scalar(1.0) };
        let start = CovariancePair::isotropic(ch.config, 1.0);
        let upd = q_update(&ch, &st, 1.0, &start, &LogDetSettings::default()).unwrap();
        let got = theta_objective(&ch, &st, &upd.cov);
        let n = 1000;
        let mut best = f64::NEG_INFINITY;
        for i in 0..=n {
            for j in 0..=(n - i) {
                let cov = CovariancePair { qa: scalar(i as f64 / n as f64), qj: scalar(j as f64 / n as f64) };
                best = best.max(theta_objective(&ch, &st, &cov));
            }
        }
        assert!((got - best).abs() < 1e-3, "{got} vs {best}");
        assert!(got >= best - 1e-9);
    }

    #[test]
    fn q_update_decoupled_water_fills() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let h1 = random_cn_matrix(&mut rng, 2, 2);
        let h2 = random_cn_matrix(&mut rng, 2, 2);
        let ch = WiretapChannel::new(h1.clone(), CMat::zeros(2, 2), CMat::zeros(2, 2), h2.clone()).unwrap();
        let st = VariationalState::identity(&ch);
        let p = 2.0;
        let upd = q_update(&ch, &st, p, &CovariancePair::isotropic(ch.config, p), &LogDetSettings::default()).unwrap();
        // With S1 = I the helper term ln|I + H2 Qj H2^H| − tr(H2 Qj H2^H) is maximized by Qj = 0,
        // leaving classic water-filling of Qa over the eigenmodes of H1.
        let (gains, _) = crate::linalg::hermitian_eigen(&(h1.adjoint() * &h1));
        let wf = |level: f64| gains.iter().map(|g| (level - 1.0 / g).max(0.0)).sum::<f64>();
        let (mut lo, mut hi) = (0.0, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if wf(mid) > p {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let want: f64 = gains.iter().map(|g| (1.0 + g * (lo - 1.0 / g).max(0.0)).ln()).sum();
        let got = crate::linalg::ln_det_hpd(&(eye(2) + congruence(&h1, &upd.cov.qa))).unwrap();
        assert!(trace_re(&upd.cov.qj) < 1e-6);
        assert!((got - want).abs() < 1e-5, "{got} vs {want}");
    }

    #[test]
    fn zero_iterations_return_init() {
        let ch = sample_channel(AntennaConfig::new(3, 3, 3, 4).unwrap(), 2);
        let settings = GsSettings { tol: f64::INFINITY, max_iters: 0, ..GsSettings::default() };
        let rep = gauss_seidel_from(&ch, 10.0, GsInit::Alignment, &settings).unwrap();
        assert_eq!(rep.iterations, 0);
        assert_eq!(rep.final_result.cs, rep.init_result.cs);
    }

    #[test]
    fn ascent_is_monotone_and_improves_alignment() {
        let ch = sample_channel(AntennaConfig::new(3, 3, 3, 4).unwrap(), 4);
        let p = 100.0;
        let rep = gauss_seidel_from(&ch, p, GsInit::Alignment, &GsSettings::default()).unwrap();
        assert!(rep.objective_trace.windows(2).all(|w| w[1] >= w[0] - 1e-9));
        assert!(rep.bridge_gaps.iter().all(|&g| g < 1e-8), "{:?}", rep.bridge_gaps);
        assert!(rep.final_result.cs >= rep.init_result.cs - 1e-6);
        assert!(rep.final_result.covariances.within_budget(p));
    }
}
