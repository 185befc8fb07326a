//! Monte-Carlo sweeps over seeded Rayleigh channels.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use wiretap_core::mimome::{gauss_seidel_from, GsInit, GsSettings};
use wiretap_core::misome::{alignment_scheme, misome_two_layer, zf_baseline, TwoLayerConfig};
use wiretap_core::sdof::{alignment_precoders, sdof_closed_form};
use wiretap_core::{sample_channel, AntennaConfig, Diagnostics, Error as CoreError, SecrecyResult, WiretapChannel};

use crate::error::{HarnessError, Result};

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SECRECY_OPT_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    OptimalMisome,
    Alignment,
    Zf,
    GaussSeidel,
    SdofTheory,
}

impl Scheme {
    pub const ALL: [Scheme; 5] =
        [Scheme::OptimalMisome, Scheme::Alignment, Scheme::Zf, Scheme::GaussSeidel, Scheme::SdofTheory];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::OptimalMisome => "optimal-misome",
            Scheme::Alignment => "alignment",
            Scheme::Zf => "zf",
            Scheme::GaussSeidel => "gauss-seidel",
            Scheme::SdofTheory => "sdof-theory",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        Scheme::ALL.into_iter().find(|sc| sc.name() == s).ok_or_else(|| format!("unknown scheme {s:?}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitChoice {
    #[default]
    Alignment,
    Isotropic,
}

impl From<InitChoice> for GsInit {
    fn from(c: InitChoice) -> GsInit {
        match c {
            InitChoice::Alignment => GsInit::Alignment,
            InitChoice::Isotropic => GsInit::Isotropic,
        }
    }
}

impl FromStr for InitChoice {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "alignment" => Ok(InitChoice::Alignment),
            "isotropic" => Ok(InitChoice::Isotropic),
            other => Err(format!("unknown initialization {other:?}, expected alignment or isotropic")),
        }
    }
}

/// Optional solver settings; `None` keeps the library default.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverOverrides {
    /// Outer `τ` grid size of the two-layer MISOME search.
    pub grid_points: Option<usize>,
    pub gs_tol: Option<f64>,
    pub gs_max_iters: Option<usize>,
    pub gs_init: Option<InitChoice>,
}

impl SolverOverrides {
    pub fn two_layer(&self) -> TwoLayerConfig {
        let mut cfg = TwoLayerConfig::default();
        if let Some(n) = self.grid_points {
            cfg.grid_points = n;
        }
        cfg
    }

    pub fn gauss_seidel(&self) -> GsSettings {
        let mut s = GsSettings::default();
        if let Some(t) = self.gs_tol {
            s.tol = t;
        }
        if let Some(n) = self.gs_max_iters {
            s.max_iters = n;
        }
        s
    }

    pub fn init(&self) -> GsInit {
        self.gs_init.unwrap_or_default().into()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AntennaSpec {
    pub na: usize,
    pub nb: usize,
    pub ne: usize,
    pub nj: usize,
}

impl From<AntennaConfig> for AntennaSpec {
    fn from(c: AntennaConfig) -> Self {
        AntennaSpec { na: c.na, nb: c.nb, ne: c.ne, nj: c.nj }
    }
}

impl TryFrom<AntennaSpec> for AntennaConfig {
    type Error = CoreError;

    fn try_from(s: AntennaSpec) -> std::result::Result<Self, CoreError> {
        AntennaConfig::new(s.na, s.nb, s.ne, s.nj)
    }
}

/// A sweep: every configuration × trial × SNR × scheme.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub configs: Vec<AntennaConfig>,
    pub snr_db_list: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    pub overrides: SolverOverrides,
}

/// JSON form of [`ExperimentConfig`], as accepted by `sweep --config`.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentFile {
    pub configs: Vec<AntennaSpec>,
    pub snr_db_list: Vec<f64>,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub seed: u64,
    pub schemes: Vec<Scheme>,
    #[serde(default)]
    pub overrides: SolverOverrides,
}

fn default_trials() -> usize {
    DEFAULT_TRIALS
}

pub const DEFAULT_TRIALS: usize = 50;

impl TryFrom<ExperimentFile> for ExperimentConfig {
    type Error = HarnessError;

    fn try_from(f: ExperimentFile) -> Result<Self> {
        let configs = f.configs.into_iter().map(AntennaConfig::try_from).collect::<std::result::Result<Vec<_>, _>>()?;
        let cfg = ExperimentConfig {
            configs,
            snr_db_list: f.snr_db_list,
            trials: f.trials,
            seed: f.seed,
            schemes: f.schemes,
            overrides: f.overrides,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

impl From<&ExperimentConfig> for ExperimentFile {
    fn from(c: &ExperimentConfig) -> Self {
        ExperimentFile {
            configs: c.configs.iter().map(|&a| a.into()).collect(),
            snr_db_list: c.snr_db_list.clone(),
            trials: c.trials,
            seed: c.seed,
            schemes: c.schemes.clone(),
            overrides: c.overrides.clone(),
        }
    }
}

impl ExperimentConfig {
    pub fn new(config: AntennaConfig, snr_db_list: Vec<f64>, trials: usize, seed: u64, schemes: Vec<Scheme>) -> Self {
        ExperimentConfig {
            configs: vec![config],
            snr_db_list,
            trials,
            seed,
            schemes,
            overrides: SolverOverrides::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.into()));
        if self.trials == 0 {
            return bad("trials must be at least 1");
        }
        if self.snr_db_list.is_empty() {
            return bad("SNR list is empty");
        }
        if self.snr_db_list.iter().any(|s| !s.is_finite()) {
            return bad("SNR values must be finite");
        }
        if self.configs.is_empty() {
            return bad("no antenna configuration given");
        }
        if self.schemes.is_empty() {
            return bad("no scheme selected");
        }
        if self.overrides.gs_tol.is_some_and(|t| !(t >= 0.0)) {
            return bad("gs_tol must be non-negative");
        }
        Ok(())
    }
}

/// One row of the result table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialRecord {
    /// Channel seed of the trial (feed to `sample_channel` to reproduce it).
    pub seed: u64,
    pub snr_db: f64,
    pub scheme: Scheme,
    /// Secrecy rate in bits per channel use; the s.d.o.f. `d*` for `sdof-theory`.
    pub cs_bits: f64,
    pub iterations: usize,
    pub wall_time_ms: f64,
    /// `;`-separated solver flags.
    pub flags: String,
}

/// `P = 10^(snr/10)` with unit noise power.
pub fn snr_to_power(snr_db: f64) -> f64 {
    10f64.powf(snr_db / 10.0)
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Channel seed of `trial` under configuration `config_index`.
///
/// Depends only on the master seed and the two counters, never on schemes or SNRs.
pub fn trial_seed(master: u64, config_index: usize, trial: usize) -> u64 {
    let counter = ((config_index as u64) << 32) ^ trial as u64;
    splitmix64(splitmix64(master) ^ splitmix64(counter.wrapping_add(0x5EED)))
}

/// What one scheme produced on one channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutcome {
    pub cs_bits: f64,
    pub iterations: usize,
    pub flags: Vec<String>,
}

impl SchemeOutcome {
    fn from_result(r: SecrecyResult) -> Self {
        let Diagnostics { iterations, flags, .. } = r.diagnostics;
        SchemeOutcome { cs_bits: r.cs.max(0.0), iterations, flags }
    }

    fn zero(flag: &str) -> Self {
        SchemeOutcome { cs_bits: 0.0, iterations: 0, flags: vec![flag.into()] }
    }
}

fn require_misome(ch: &WiretapChannel, scheme: Scheme) -> Result<()> {
    if ch.config.nb != 1 {
        return Err(HarnessError::InvalidConfig(format!(
            "{scheme} needs a single-antenna receiver, got {}",
            ch.config
        )));
    }
    Ok(())
}

/// Run one scheme at power `power`.
pub fn run_scheme(
    ch: &WiretapChannel,
    scheme: Scheme,
    power: f64,
    overrides: &SolverOverrides,
) -> Result<SchemeOutcome> {
    match scheme {
        Scheme::OptimalMisome => {
            require_misome(ch, scheme)?;
            let out = misome_two_layer(ch, power, &overrides.two_layer())?;
            Ok(SchemeOutcome::from_result(out.result))
        }
        Scheme::Alignment => {
            if sdof_closed_form(ch.config).d_star == 0 {
                return Ok(SchemeOutcome::zero("sdof-zero"));
            }
            let result = if ch.config.nb == 1 {
                alignment_scheme(ch, power)?.1
            } else {
                let cov = alignment_precoders(ch)?.equal_power_covariances(power);
                SecrecyResult::evaluate(ch, cov, Diagnostics { converged: true, ..Diagnostics::default() })?
            };
            Ok(SchemeOutcome::from_result(result))
        }
        Scheme::Zf => {
            require_misome(ch, scheme)?;
            Ok(SchemeOutcome::from_result(zf_baseline(ch, power)?))
        }
        Scheme::GaussSeidel => {
            let settings = overrides.gauss_seidel();
            let report = gauss_seidel_from(ch, power, overrides.init(), &settings)?;
            let mut out = SchemeOutcome::from_result(report.final_result);
            if !report.converged {
                out.flags.push("not-converged".into());
            }
            Ok(out)
        }
        Scheme::SdofTheory => {
            Ok(SchemeOutcome { cs_bits: sdof_closed_form(ch.config).d_star as f64, iterations: 0, flags: Vec::new() })
        }
    }
}

/// `(Cs(P2) − Cs(P1)) / (log2 P2 − log2 P1)` for powers given in dB.
pub fn empirical_sdof_slope(ch: &WiretapChannel, scheme: Scheme, p1_db: f64, p2_db: f64) -> Result<f64> {
    empirical_sdof_slope_with(ch, scheme, p1_db, p2_db, &SolverOverrides::default())
}

pub fn empirical_sdof_slope_with(
    ch: &WiretapChannel,
    scheme: Scheme,
    p1_db: f64,
    p2_db: f64,
    overrides: &SolverOverrides,
) -> Result<f64> {
    if !(p2_db > p1_db) {
        return Err(HarnessError::InvalidConfig(format!("need p2_db > p1_db, got {p1_db} and {p2_db}")));
    }
    let (p1, p2) = (snr_to_power(p1_db), snr_to_power(p2_db));
    let c1 = run_scheme(ch, scheme, p1, overrides)?.cs_bits;
    let c2 = run_scheme(ch, scheme, p2, overrides)?.cs_bits;
    Ok((c2 - c1) / (p2.log2() - p1.log2()))
}

fn sanitize(msg: &str) -> String {
    msg.replace(';', ",")
}

fn trial_records(cfg: &ExperimentConfig, config_index: usize, trial: usize) -> Vec<TrialRecord> {
    let config = cfg.configs[config_index];
    let seed = trial_seed(cfg.seed, config_index, trial);
    let ch = sample_channel(config, seed);
    let label = (cfg.configs.len() > 1).then(|| format!("cfg={}x{}x{}x{}", config.na, config.nb, config.ne, config.nj));
    let mut out = Vec::with_capacity(cfg.snr_db_list.len() * cfg.schemes.len());
    for &snr_db in &cfg.snr_db_list {
        let power = snr_to_power(snr_db);
        for &scheme in &cfg.schemes {
            let start = Instant::now();
            let outcome = run_scheme(&ch, scheme, power, &cfg.overrides)
                .unwrap_or_else(|e| SchemeOutcome::zero(&format!("failed: {}", sanitize(&e.to_string()))));
            let wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
            let flags: Vec<String> = label.iter().cloned().chain(outcome.flags).collect();
            out.push(TrialRecord {
                seed,
                snr_db,
                scheme,
                cs_bits: outcome.cs_bits,
                iterations: outcome.iterations,
                wall_time_ms,
                flags: flags.join(";"),
            });
        }
    }
    out
}

/// Thread count from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV).ok()?.trim().parse().ok().filter(|&n: &usize| n > 0)
}

/// Run every (configuration, trial) in parallel and return records in
/// (configuration, trial, SNR, scheme) order.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<TrialRecord>> {
    cfg.validate()?;
    let work: Vec<(usize, usize)> = (0..cfg.configs.len()).flat_map(|c| (0..cfg.trials).map(move |t| (c, t))).collect();
    let run = || -> Vec<TrialRecord> {
        work.par_iter().map(|&(c, t)| trial_records(cfg, c, t)).collect::<Vec<_>>().into_iter().flatten().collect()
    };
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = thread_cap() {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| HarnessError::InvalidConfig(format!("cannot start worker threads: {e}")))?;
    Ok(pool.install(run))
}

/// Mean `cs_bits` per (SNR, scheme), in first-appearance order.
pub fn mean_curves(records: &[TrialRecord]) -> Vec<(f64, Scheme, f64)> {
    let mut acc: Vec<(f64, Scheme, f64, usize)> = Vec::new();
    for r in records {
        match acc.iter_mut().find(|(s, sc, _, _)| *s == r.snr_db && *sc == r.scheme) {
            Some(slot) => {
                slot.2 += r.cs_bits;
                slot.3 += 1;
            }
            None => acc.push((r.snr_db, r.scheme, r.cs_bits, 1)),
        }
    }
    acc.into_iter().map(|(s, sc, sum, n)| (s, sc, sum / n as f64)).collect()
}

/// Named figure sweeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preset {
    Fig2,
    Fig3,
    Fig4,
    Fig5,
    Fig6,
    Fig7,
}

impl FromStr for Preset {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "fig2" => Ok(Preset::Fig2),
            "fig3" => Ok(Preset::Fig3),
            "fig4" => Ok(Preset::Fig4),
            "fig5" => Ok(Preset::Fig5),
            "fig6" => Ok(Preset::Fig6),
            "fig7" => Ok(Preset::Fig7),
            other => Err(format!("unknown preset {other:?}, expected fig2..fig7")),
        }
    }
}

fn cfg(na: usize, nb: usize, ne: usize, nj: usize) -> AntennaConfig {
    AntennaConfig::new(na, nb, ne, nj).expect("preset antenna counts are positive")
}

fn snr_range(lo: i32, hi: i32, step: i32) -> Vec<f64> {
    (lo..=hi).step_by(step as usize).map(f64::from).collect()
}

impl Preset {
    /// Trials used when none are requested: theory-only presets need one.
    pub fn default_trials(self) -> usize {
        match self {
            Preset::Fig6 | Preset::Fig7 => 1,
            _ => DEFAULT_TRIALS,
        }
    }

    pub fn config(self, trials: Option<usize>, seed: u64) -> ExperimentConfig {
        use Scheme::*;
        let trials = trials.unwrap_or(self.default_trials());
        let (configs, snr_db_list, schemes) = match self {
            Preset::Fig2 => (vec![cfg(3, 1, 3, 2)], snr_range(0, 30, 5), vec![OptimalMisome, Alignment, Zf]),
            Preset::Fig3 => (vec![cfg(3, 3, 3, 4)], snr_range(0, 30, 5), vec![Alignment, GaussSeidel]),
            Preset::Fig4 => (vec![cfg(3, 3, 3, 4)], snr_range(0, 30, 10), vec![GaussSeidel]),
            Preset::Fig5 => {
                ((1..=8).map(|na| cfg(na, 3, 4, 3)).collect(), vec![40.0, 50.0], vec![Alignment, SdofTheory])
            }
            Preset::Fig6 => (
                (1..=4).flat_map(|nb| (1..=8).map(move |na| cfg(na, nb, 4, 2))).collect(),
                vec![50.0],
                vec![SdofTheory],
            ),
            Preset::Fig7 => (
                (1..=4).flat_map(|nb| (1..=8).map(move |na| cfg(na, nb, 4, 4))).collect(),
                vec![50.0],
                vec![SdofTheory],
            ),
        };
        ExperimentConfig { configs, snr_db_list, trials, seed, schemes, overrides: SolverOverrides::default() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scheme_names_round_trip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
            assert_eq!(serde_json::to_string(&s).unwrap(), format!("\"{}\"", s.name()));
        }
        assert!("optimal".parse::<Scheme>().is_err());
    }

    #[test]
    fn snr_mapping() {
        assert_eq!(snr_to_power(0.0), 1.0);
        assert!((snr_to_power(10.0) - 10.0).abs() < 1e-12);
        assert!((snr_to_power(30.0) - 1000.0).abs() < 1e-9);
    }

    #[test]
    fn trial_seeds_are_distinct_and_stable() {
        let mut seen = std::collections::HashSet::new();
        for c in 0..4 {
            for t in 0..100 {
                assert!(seen.insert(trial_seed(7, c, t)));
            }
        }
        assert_eq!(trial_seed(7, 1, 2), trial_seed(7, 1, 2));
        assert_ne!(trial_seed(7, 0, 0), trial_seed(8, 0, 0));
    }

    #[test]
    fn validation_rejects_empty_sweeps() {
        let base = ExperimentConfig::new(cfg(1, 1, 1, 1), vec![0.0], 1, 0, vec![Scheme::SdofTheory]);
        assert!(base.validate().is_ok());
        assert!(ExperimentConfig { trials: 0, ..base.clone() }.validate().is_err());
        assert!(ExperimentConfig { snr_db_list: vec![], ..base.clone() }.validate().is_err());
        assert!(ExperimentConfig { schemes: vec![], ..base.clone() }.validate().is_err());
    }

    #[test]
    fn misome_only_schemes_fail_per_trial() {
        let cfg = ExperimentConfig::new(cfg(2, 2, 2, 2), vec![10.0], 1, 3, vec![Scheme::Zf, Scheme::SdofTheory]);
        let recs = run_sweep(&cfg).unwrap();
        assert_eq!(recs.len(), 2);
        assert!(recs[0].flags.starts_with("failed:"), "{}", recs[0].flags);
        assert_eq!(recs[0].cs_bits, 0.0);
        assert_eq!(recs[1].cs_bits, sdof_closed_form(cfg.configs[0]).d_star as f64);
    }

    #[test]
    fn presets_are_valid() {
        for p in ["fig2", "fig3", "fig4", "fig5", "fig6", "fig7"] {
            let preset: Preset = p.parse().unwrap();
            let c = preset.config(None, 1);
            c.validate().unwrap();
        }
        assert_eq!(Preset::Fig2.config(None, 0).configs, vec![cfg(3, 1, 3, 2)]);
        assert_eq!(Preset::Fig2.config(None, 0).trials, 50);
        assert_eq!(Preset::Fig5.config(Some(3), 0).configs.len(), 8);
    }
}
