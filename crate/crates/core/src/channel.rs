//! Wiretap channel model, Rayleigh sampling and the rate formulas.
//!
//! All rates are reported in bits per channel use. Internally the log-det
//! algebra runs in nats and converts at the boundary.

use alloc::{format, string::String, vec::Vec};
use core::f64::consts::LN_2;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::linalg::{clip_psd, congruence, eye, ln_det_hpd, trace_re, CMat};

/// Eigenvalues down to `-PSD_TOL * trace` are accepted and clipped to zero.
pub const PSD_TOL: f64 = 1e-9;

/// Antenna counts at the source, legitimate receiver, eavesdropper and helper.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct AntennaConfig {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub nj: usize,
}

impl AntennaConfig {
    pub fn new(na: usize, nb: usize, ne: usize, nj: usize) -> Result<Self> {
        if na == 0 || nb == 0 || ne == 0 || nj == 0 {
            return Err(Error::InvalidInput(format!("antenna counts must be positive, got ({na}, {nb}, {ne}, {nj})")));
        }
        Ok(AntennaConfig { na, nb, ne, nj })
    }

    /// Every configuration in `{1..=max}^4`, ordered lexicographically by `(na, nb, ne, nj)`.
    pub fn enumerate(max: usize) -> impl Iterator<Item = AntennaConfig> {
        (1..=max).flat_map(move |na| {
            (1..=max).flat_map(move |nb| {
                (1..=max).flat_map(move |ne| (1..=max).map(move |nj| AntennaConfig { na, nb, ne, nj }))
            })
        })
    }
}

impl core::fmt::Display for AntennaConfig {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "({},{},{},{})", self.na, self.nb, self.ne, self.nj)
    }
}

/// The four channel matrices: `h1` (Nb×Na), `g1` (Ne×Na), `g2` (Nb×Nj), `h2` (Ne×Nj).
#[derive(Debug, Clone, PartialEq)]
pub struct WiretapChannel {
    pub h1: CMat,
    pub g1: CMat,
    pub g2: CMat,
    pub h2: CMat,
    pub config: AntennaConfig,
}

impl WiretapChannel {
    pub fn new(h1: CMat, g1: CMat, g2: CMat, h2: CMat) -> Result<Self> {
        let config = AntennaConfig::new(h1.ncols(), h1.nrows(), g1.nrows(), g2.ncols())?;
        let expect =
            [("g1", &g1, config.ne, config.na), ("g2", &g2, config.nb, config.nj), ("h2", &h2, config.ne, config.nj)];
        for (name, m, r, c) in expect {
            if m.shape() != (r, c) {
                return Err(Error::InvalidInput(format!("{name} has shape {:?}, expected ({r}, {c})", m.shape())));
            }
        }
        Ok(WiretapChannel { h1, g1, g2, h2, config })
    }

    /// Multiply every channel matrix by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let f = Complex64::new(factor, 0.0);
        WiretapChannel { h1: &self.h1 * f, g1: &self.g1 * f, g2: &self.g2 * f, h2: &self.h2 * f, config: self.config }
    }

    /// Rotate the source antennas: `H1 -> H1 U^H`, `G1 -> G1 U^H`.
    pub fn rotate_source(&self, u: &CMat) -> Self {
        WiretapChannel {
            h1: &self.h1 * u.adjoint(),
            g1: &self.g1 * u.adjoint(),
            g2: self.g2.clone(),
            h2: self.h2.clone(),
            config: self.config,
        }
    }
}

/// Matrix with i.i.d. `CN(0, 1)` entries (real and imaginary parts each `N(0, 1/2)`).
pub fn random_cn_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> CMat {
    let sd = core::f64::consts::FRAC_1_SQRT_2;
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(sd * re, sd * im)
    })
}

/// Rayleigh channel draw, deterministic per `seed`.
///
/// Column-major fill order is `h1`, `g1`, `g2`, `h2`.
pub fn sample_channel(config: AntennaConfig, seed: u64) -> WiretapChannel {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let AntennaConfig { na, nb, ne, nj } = config;
    let h1 = random_cn_matrix(&mut rng, nb, na);
    let g1 = random_cn_matrix(&mut rng, ne, na);
    let g2 = random_cn_matrix(&mut rng, nb, nj);
    let h2 = random_cn_matrix(&mut rng, ne, nj);
    WiretapChannel { h1, g1, g2, h2, config }
}

/// Transmit covariances at the source (`qa`) and helper (`qj`).
#[derive(Debug, Clone, PartialEq)]
pub struct CovariancePair {
    pub qa: CMat,
    pub qj: CMat,
}

impl CovariancePair {
    pub fn zeros(config: AntennaConfig) -> Self {
        CovariancePair { qa: CMat::zeros(config.na, config.na), qj: CMat::zeros(config.nj, config.nj) }
    }

    /// `P/2` on each terminal, spread evenly over its antennas.
    pub fn isotropic(config: AntennaConfig, power: f64) -> Self {
        let a = power / 2.0 / config.na as f64;
        let j = power / 2.0 / config.nj as f64;
        CovariancePair { qa: eye(config.na) * Complex64::new(a, 0.0), qj: eye(config.nj) * Complex64::new(j, 0.0) }
    }

    pub fn total_power(&self) -> f64 {
        trace_re(&self.qa) + trace_re(&self.qj)
    }

    /// Check shapes against `config`, then clip tiny negative eigenvalues.
    pub fn validated(&self, config: AntennaConfig) -> Result<Self> {
        if self.qa.shape() != (config.na, config.na) || self.qj.shape() != (config.nj, config.nj) {
            return Err(Error::InvalidInput(format!(
                "covariance shapes {:?}/{:?} do not match config {config}",
                self.qa.shape(),
                self.qj.shape()
            )));
        }
        Ok(CovariancePair { qa: clip_psd(&self.qa, PSD_TOL)?, qj: clip_psd(&self.qj, PSD_TOL)? })
    }

    pub fn within_budget(&self, power: f64) -> bool {
        self.total_power() <= power * (1.0 + 1e-8)
    }
}

/// Free-form solver metadata carried by every [`SecrecyResult`].
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Diagnostics {
    pub iterations: usize,
    pub converged: bool,
    pub objective_trace: Vec<f64>,
    pub flags: Vec<String>,
}

impl Diagnostics {
    pub fn flag(&mut self, flag: impl Into<String>) {
        self.flags.push(flag.into());
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SecrecyResult {
    pub rd: f64,
    pub re: f64,
    pub cs: f64,
    pub covariances: CovariancePair,
    pub diagnostics: Diagnostics,
}

impl SecrecyResult {
    /// Score `cov` with the exact rate formulas.
    pub fn evaluate(ch: &WiretapChannel, cov: CovariancePair, diagnostics: Diagnostics) -> Result<Self> {
        let rd = rate_legitimate(ch, &cov)?;
        let re = rate_eavesdropper(ch, &cov)?;
        Ok(SecrecyResult { rd, re, cs: (rd - re).max(0.0), covariances: cov, diagnostics })
    }
}

/// `ln det(I + A Q A^H + B R B^H) - ln det(I + B R B^H)` in nats.
pub(crate) fn mutual_information_nats(a: &CMat, q: &CMat, b: &CMat, r: &CMat) -> Result<f64> {
    let n = a.nrows();
    let interference = eye(n) + congruence(b, r);
    let total = &interference + congruence(a, q);
    let num = ln_det_hpd(&total).ok_or_else(|| Error::Solver("ln det of signal-plus-noise failed".into()))?;
    let den = ln_det_hpd(&interference).ok_or_else(|| Error::Solver("ln det of noise failed".into()))?;
    Ok((num - den).max(0.0))
}

/// `log2 det(I + (I + G2 Qj G2^H)^{-1} H1 Qa H1^H)`.
pub fn rate_legitimate(ch: &WiretapChannel, cov: &CovariancePair) -> Result<f64> {
    let cov = cov.validated(ch.config)?;
    Ok(mutual_information_nats(&ch.h1, &cov.qa, &ch.g2, &cov.qj)? / LN_2)
}

/// `log2 det(I + (I + H2 Qj H2^H)^{-1} G1 Qa G1^H)`.
pub fn rate_eavesdropper(ch: &WiretapChannel, cov: &CovariancePair) -> Result<f64> {
    let cov = cov.validated(ch.config)?;
    Ok(mutual_information_nats(&ch.g1, &cov.qa, &ch.h2, &cov.qj)? / LN_2)
}

/// `max(R_d - R_e, 0)`.
pub fn secrecy_rate(ch: &WiretapChannel, cov: &CovariancePair) -> Result<f64> {
    Ok((rate_legitimate(ch, cov)? - rate_eavesdropper(ch, cov)?).max(0.0))
}
