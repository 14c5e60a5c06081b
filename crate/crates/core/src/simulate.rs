//! Seeded Monte Carlo engine.
//!
//! Each trial draws one Bob/Eve channel pair, builds the precoders once, and
//! evaluates every requested scheme on that same realization. The random
//! stream of a trial depends only on `(master_seed, sweep_index,
//! trial_index)`, so results do not depend on the number of workers or on
//! execution order.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::allocation::{self, PowerBudget};
use crate::error::{Error, Result};
use crate::linalg::CMatrix;
use crate::ofdm::{freq_response, ChannelPair, NoiseModel, OfdmConfig, TapProfile};
use crate::precoding::PrecoderSet;
use crate::rates::{self, RateBreakdown};

/// Transmit strategy: which AN precoder/power split and which data powers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// Second precoder present, uniform data and AN powers over all streams.
    EqualPower,
    /// No second precoder; equal AN power on the useful structured columns,
    /// data water-filled on Bob's channel.
    UnknownCsi,
    /// `U = V_z`, AN water-filled over `δ²`, per-subchannel secrecy data powers.
    KnownCsiTwoStage,
    /// Structured-column AN extraction without `U`, secrecy data powers.
    KnownCsiNoSecondPrecoder,
    /// Everything on data, water-filled on Bob's channel.
    NoAn,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::EqualPower,
        Scheme::UnknownCsi,
        Scheme::KnownCsiTwoStage,
        Scheme::KnownCsiNoSecondPrecoder,
        Scheme::NoAn,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::EqualPower => "equal-power",
            Scheme::UnknownCsi => "unknown-csi",
            Scheme::KnownCsiTwoStage => "known-csi-two-stage",
            Scheme::KnownCsiNoSecondPrecoder => "known-csi-no-second-precoder",
            Scheme::NoAn => "no-an",
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sch| sch.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown scheme '{s}'")))
    }
}

/// Which of Eve's receivers to report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveReceiver {
    Joint,
    PerSubchannel,
    Both,
}

impl FromStr for EveReceiver {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "joint" => Ok(Self::Joint),
            "per_subchannel" => Ok(Self::PerSubchannel),
            "both" => Ok(Self::Both),
            other => Err(Error::InvalidConfig(format!("unknown eve receiver '{other}'"))),
        }
    }
}

/// One receiver column in the results table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Receiver {
    Joint,
    PerSubchannel,
    Approx,
}

impl Receiver {
    pub fn name(&self) -> &'static str {
        match self {
            Receiver::Joint => "joint",
            Receiver::PerSubchannel => "per_subchannel",
            Receiver::Approx => "approx",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Alpha,
    N,
    NCp,
    LB,
    LE,
    /// Total power, expressed as per-subchannel input SNR in dB.
    SnrDb,
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Alpha => "alpha",
            SweepAxis::N => "n",
            SweepAxis::NCp => "n_cp",
            SweepAxis::LB => "l_b",
            SweepAxis::LE => "l_e",
            SweepAxis::SnrDb => "snr_db",
        }
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "alpha" => Ok(Self::Alpha),
            "n" | "N" => Ok(Self::N),
            "n_cp" | "N_cp" => Ok(Self::NCp),
            "l_b" | "L_B" => Ok(Self::LB),
            "l_e" | "L_E" => Ok(Self::LE),
            "snr_db" | "p" | "P" => Ok(Self::SnrDb),
            other => Err(Error::InvalidConfig(format!("unknown sweep axis '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
    Fig4,
    Fig5,
}

impl FromStr for Figure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fig1" => Ok(Self::Fig1),
            "fig2" => Ok(Self::Fig2),
            "fig3" => Ok(Self::Fig3),
            "fig4" => Ok(Self::Fig4),
            "fig5" => Ok(Self::Fig5),
            other => Err(Error::InvalidConfig(format!("unknown figure '{other}'"))),
        }
    }
}

impl fmt::Display for Figure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
            Figure::Fig4 => "fig4",
            Figure::Fig5 => "fig5",
        })
    }
}

/// Coarse α grid used when `alpha_search` is on.
pub const ALPHA_GRID: [f64; 9] = [0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9];

/// Fully resolved experiment description. Field names double as the flat
/// configuration keys.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub n: usize,
    pub n_cp: usize,
    pub bandwidth_hz: f64,
    pub l_b: usize,
    pub l_e: usize,
    /// Per-subchannel input SNR `P_s / Δ_fκ_B` in dB, with `P_s = P / N`.
    pub snr_db: f64,
    pub alpha: f64,
    /// Pick α per scheme from [`ALPHA_GRID`] by best mean joint secrecy rate.
    pub alpha_search: bool,
    /// Per-subchannel noise powers `Δ_fκ_B`, `Δ_fκ_E`.
    pub noise_power_b: f64,
    pub noise_power_e: f64,
    pub profile: TapProfile,
    /// Force uniform data power instead of each scheme's data allocation.
    pub equal_data_power: bool,
    /// Emit rows for the diagonal approximation of Eve's rate.
    pub report_approx: bool,
    pub sweep_axis: Option<SweepAxis>,
    pub sweep_values: Vec<f64>,
    pub schemes: Vec<Scheme>,
    pub eve_receiver: EveReceiver,
    pub trials: usize,
    pub seed: u64,
}

impl Default for ExperimentSpec {
    fn default() -> Self {
        Self {
            n: 64,
            n_cp: 16,
            bandwidth_hz: 1e6,
            l_b: 4,
            l_e: 8,
            snr_db: 30.0,
            alpha: 0.5,
            alpha_search: false,
            noise_power_b: 1.0,
            noise_power_e: 1.0,
            profile: TapProfile::UniformPdpGaussian,
            equal_data_power: false,
            report_approx: false,
            sweep_axis: None,
            sweep_values: Vec::new(),
            schemes: vec![Scheme::UnknownCsi],
            eve_receiver: EveReceiver::Joint,
            trials: 2000,
            seed: 0,
        }
    }
}

/// Keys whose default values are not taken from the source experiments.
pub const DEFAULT_ASSUMED: [&str; 7] = ["n", "n_cp", "l_b", "l_e", "alpha", "snr_db", "trials"];

impl ExperimentSpec {
    /// Checks everything that does not depend on a particular sweep value.
    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        if self.schemes.is_empty() {
            return Err(Error::InvalidConfig("at least one scheme is required".into()));
        }
        if self.sweep_axis.is_some() && self.sweep_values.is_empty() {
            return Err(Error::InvalidConfig("sweep axis given without sweep values".into()));
        }
        if self.alpha_search && self.sweep_axis == Some(SweepAxis::Alpha) {
            return Err(Error::InvalidConfig("alpha_search cannot be combined with an alpha sweep".into()));
        }
        Ok(())
    }

    /// Sweep values, or a single unnamed point when nothing is swept.
    pub fn points(&self) -> Vec<Option<f64>> {
        match self.sweep_axis {
            Some(_) => self.sweep_values.iter().map(|&v| Some(v)).collect(),
            None => vec![None],
        }
    }

    /// Resolves one sweep value into a validated [`SimPoint`].
    pub fn point(&self, value: Option<f64>) -> Result<SimPoint> {
        let mut n = self.n;
        let mut n_cp = self.n_cp;
        let mut l_b = self.l_b;
        let mut l_e = self.l_e;
        let mut snr_db = self.snr_db;
        let mut alpha = self.alpha;
        if let (Some(axis), Some(v)) = (self.sweep_axis, value) {
            let as_count = |v: f64| -> Result<usize> {
                if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                    Ok(v as usize)
                } else {
                    Err(Error::InvalidSweep { value: v, reason: format!("{} needs a non-negative integer", axis.name()) })
                }
            };
            match axis {
                SweepAxis::Alpha => alpha = v,
                SweepAxis::N => n = as_count(v)?,
                SweepAxis::NCp => n_cp = as_count(v)?,
                SweepAxis::LB => l_b = as_count(v)?,
                SweepAxis::LE => l_e = as_count(v)?,
                SweepAxis::SnrDb => snr_db = v,
            }
        }
        let invalid = |e: Error| match (value, e) {
            (Some(v), e) => Error::InvalidSweep { value: v, reason: e.to_string() },
            (None, e) => e,
        };
        let cfg = OfdmConfig::new(n, n_cp, self.bandwidth_hz).map_err(invalid)?;
        if l_b > n_cp || l_e > n_cp {
            return Err(invalid(Error::InvalidConfig(format!(
                "channel memories L_B = {l_b}, L_E = {l_e} must not exceed N_cp = {n_cp}"
            ))));
        }
        if !snr_db.is_finite() {
            return Err(invalid(Error::InvalidConfig(format!("snr_db must be finite, got {snr_db}"))));
        }
        let noise = NoiseModel::new(self.noise_power_b / cfg.delta_f(), self.noise_power_e / cfg.delta_f())
            .map_err(invalid)?;
        let total = n as f64 * self.noise_power_b * 10f64.powf(snr_db / 10.0);
        let budget = PowerBudget::new(total, alpha).map_err(invalid)?;
        Ok(SimPoint { cfg, noise, l_b, l_e, budget, profile: self.profile, equal_data_power: self.equal_data_power })
    }
}

/// A single, fully validated simulation configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimPoint {
    pub cfg: OfdmConfig,
    pub noise: NoiseModel,
    pub l_b: usize,
    pub l_e: usize,
    pub budget: PowerBudget,
    pub profile: TapProfile,
    pub equal_data_power: bool,
}

impl SimPoint {
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Ok(Self { budget: PowerBudget::new(self.budget.total(), alpha)?, ..*self })
    }
}

/// Per-trial random stream: ChaCha12 keyed by SHA-256 of the little-endian
/// `(master_seed, sweep_index, trial_index)`.
pub fn trial_rng(master_seed: u64, sweep_index: u64, trial_index: u64) -> ChaCha12Rng {
    let mut hasher = Sha256::new();
    hasher.update(b"temporal-an/trial/v1");
    hasher.update(master_seed.to_le_bytes());
    hasher.update(sweep_index.to_le_bytes());
    hasher.update(trial_index.to_le_bytes());
    let digest = hasher.finalize();
    let mut key = [0u8; 32];
    key.copy_from_slice(&digest);
    ChaCha12Rng::from_seed(key)
}

/// Powers chosen by one scheme on one realization.
#[derive(Debug, Clone)]
pub struct SchemeOutcome {
    pub scheme: Scheme,
    pub p_x: Vec<f64>,
    /// AN powers in the precoder's own column ordering.
    pub p_z: Vec<f64>,
    /// AN powers per SVD stream, used by the diagonal approximation.
    pub p_z_svd: Vec<f64>,
    /// `K = B B*`.
    pub factor: CMatrix,
    pub rates: RateBreakdown,
    /// The secrecy allocation found no usable subchannel and fell back to
    /// Bob-only water-filling.
    pub fell_back: bool,
}

/// Everything measured in one trial.
#[derive(Debug, Clone)]
pub struct TrialResult {
    pub trial_index: u64,
    pub useful: usize,
    pub outcomes: Vec<SchemeOutcome>,
}

impl TrialResult {
    pub fn rates(&self, scheme: Scheme) -> Option<&RateBreakdown> {
        self.outcomes.iter().find(|o| o.scheme == scheme).map(|o| &o.rates)
    }
}

/// Runs every scheme on one channel realization.
pub fn run_trial(point: &SimPoint, schemes: &[Scheme], seed: u64, sweep_index: u64, trial_index: u64) -> Result<TrialResult> {
    let mut rng = trial_rng(seed, sweep_index, trial_index);
    let cfg = &point.cfg;
    let pair = ChannelPair::sample(point.l_b, point.l_e, point.profile, cfg, &mut rng)?;
    evaluate_schemes(point, &pair, schemes, trial_index)
}

/// Evaluates every scheme for a given channel pair.
pub fn evaluate_schemes(point: &SimPoint, pair: &ChannelPair, schemes: &[Scheme], trial_index: u64) -> Result<TrialResult> {
    let cfg = &point.cfg;
    let set = PrecoderSet::build(pair, cfg, true)?;
    let bob = freq_response(&pair.bob, cfg.n());
    let eve = freq_response(&pair.eve, cfg.n());
    let outcomes = schemes
        .iter()
        .map(|&scheme| evaluate_scheme(point, &set, &bob, &eve, scheme))
        .collect::<Result<Vec<_>>>()?;
    Ok(TrialResult { trial_index, useful: set.useful, outcomes })
}

fn uniform(len: usize, total: f64) -> Vec<f64> {
    if len == 0 {
        return Vec::new();
    }
    vec![total / len as f64; len]
}

fn evaluate_scheme(
    point: &SimPoint,
    set: &PrecoderSet,
    bob: &[Complex64],
    eve: &[Complex64],
    scheme: Scheme,
) -> Result<SchemeOutcome> {
    let cfg = &point.cfg;
    let (n, n_cp) = (cfg.n(), cfg.n_cp());
    let noise_b = point.noise.bob_power(cfg);
    let noise_e = point.noise.eve_power(cfg);
    let useful = set.useful;

    let mut budget = point.budget;
    if scheme == Scheme::NoAn {
        budget = budget.all_data();
    } else if useful == 0 && budget.an() > 0.0 {
        log::debug!("no useful AN directions (L_B = L_E = 0); {scheme} puts the whole budget on data");
        budget = budget.all_data();
    }
    let an_budget = budget.an();
    let data_budget = budget.data();

    let v_z = set.u.as_ref().unwrap_or(&set.svd.v_z);
    let (p_z, p_z_svd, factor) = match scheme {
        Scheme::NoAn => (vec![0.0; n_cp], vec![0.0; n_cp], CMatrix::zeros(n, 0)),
        Scheme::EqualPower => {
            let p = uniform(n_cp, an_budget);
            let factor = rates::interference_factor(&set.q_tilde, Some(v_z), &p);
            (p.clone(), p, factor)
        }
        Scheme::UnknownCsi | Scheme::KnownCsiNoSecondPrecoder => {
            let structured = allocation::an_power_unknown_csi_structured(useful, n_cp, an_budget);
            let factor = rates::interference_factor(&set.q_tilde, None, &structured);
            (structured, allocation::an_power_unknown_csi(useful, n_cp, an_budget), factor)
        }
        Scheme::KnownCsiTwoStage => {
            let p = allocation::an_power_known_csi(&set.svd.singular_values, useful, an_budget)?;
            let factor = rates::interference_factor(&set.q_tilde, Some(v_z), &p);
            (p.clone(), p, factor)
        }
    };
    let eta = rates::an_power_per_subchannel(&factor);

    let bob_gains: Vec<f64> = bob.iter().map(|h| h.norm_sqr()).collect();
    let mut fell_back = false;
    let p_x = if point.equal_data_power || scheme == Scheme::EqualPower {
        uniform(n, data_budget)
    } else {
        match scheme {
            Scheme::KnownCsiTwoStage | Scheme::KnownCsiNoSecondPrecoder => {
                let a: Vec<f64> = bob_gains.iter().map(|g| g / noise_b).collect();
                let b: Vec<f64> = eve.iter().zip(&eta).map(|(g, e)| g.norm_sqr() / (noise_e + e)).collect();
                match allocation::data_power_secrecy(&a, &b, data_budget) {
                    Ok(sec) => sec.powers,
                    Err(Error::NoPositiveGap) => {
                        log::debug!("{scheme}: no positive secrecy gap, falling back to Bob-only water-filling");
                        fell_back = true;
                        allocation::data_power_bob_only(&bob_gains, noise_b, data_budget)?
                    }
                    Err(e) => return Err(e),
                }
            }
            _ => allocation::data_power_bob_only(&bob_gains, noise_b, data_budget)?,
        }
    };
    allocation::PowerAllocation { p_x: p_x.clone(), p_z: p_z_svd.clone(), budget }.check(useful.max(
        if scheme == Scheme::EqualPower { n_cp } else { 0 },
    ))?;

    let r_bob = rates::rate_bob(bob, &p_x, noise_b);
    let r_eve_joint = rates::rate_eve_joint_lowrank(eve, &p_x, &factor, noise_e)?;
    let r_eve_persub = rates::rate_eve_persub_eta(eve, &p_x, &eta, noise_e);
    let uniform_data = p_x.windows(2).all(|w| w[0] == w[1]);
    let r_eve_approx = uniform_data.then(|| {
        rates::rate_eve_approx(eve, p_x.first().copied().unwrap_or(0.0), &set.svd.singular_values, &p_z_svd, noise_e, useful)
    });
    let rates = RateBreakdown::new(r_bob, r_eve_joint, r_eve_persub, r_eve_approx, cfg);
    Ok(SchemeOutcome { scheme, p_x, p_z, p_z_svd, factor, rates, fell_back })
}

/// Runs `trials` trials of one point in parallel, returned in trial order.
pub fn run_point(point: &SimPoint, schemes: &[Scheme], seed: u64, sweep_index: u64, trials: usize) -> Result<Vec<TrialResult>> {
    (0..trials as u64)
        .into_par_iter()
        .map(|t| run_trial(point, schemes, seed, sweep_index, t))
        .collect()
}

/// Sample mean and standard error (`s / √T`, zero for a single sample).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
}

impl Estimate {
    pub fn from_samples(samples: &[f64]) -> Self {
        let t = samples.len() as f64;
        if samples.is_empty() {
            return Self { mean: f64::NAN, stderr: f64::NAN };
        }
        let mean = samples.iter().sum::<f64>() / t;
        if samples.len() < 2 {
            return Self { mean, stderr: 0.0 };
        }
        let var = samples.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (t - 1.0);
        Self { mean, stderr: (var / t).sqrt() }
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self { mean: self.mean * factor, stderr: self.stderr * factor }
    }
}

/// Means and standard errors of every rate, in bits/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub r_bob: Estimate,
    pub r_eve_joint: Estimate,
    pub r_eve_persub: Estimate,
    pub r_eve_approx: Option<Estimate>,
    pub r_sec_joint: Estimate,
    pub r_sec_persub: Estimate,
    pub r_sec_approx: Option<Estimate>,
}

impl RateSummary {
    pub fn from_breakdowns(rows: &[RateBreakdown]) -> Self {
        let scale = rows.first().map_or(1.0, |r| r.scale_bits_per_sec);
        let est = |f: &dyn Fn(&RateBreakdown) -> f64| {
            Estimate::from_samples(&rows.iter().map(f).collect::<Vec<_>>()).scaled(scale)
        };
        let opt = |f: &dyn Fn(&RateBreakdown) -> Option<f64>| {
            let vals: Option<Vec<f64>> = rows.iter().map(f).collect();
            vals.filter(|v| !v.is_empty()).map(|v| Estimate::from_samples(&v).scaled(scale))
        };
        Self {
            r_bob: est(&|r| r.r_bob),
            r_eve_joint: est(&|r| r.r_eve_joint),
            r_eve_persub: est(&|r| r.r_eve_persub),
            r_eve_approx: opt(&|r| r.r_eve_approx),
            r_sec_joint: est(&|r| r.r_sec_joint),
            r_sec_persub: est(&|r| r.r_sec_persub),
            r_sec_approx: opt(&|r| r.r_sec_approx),
        }
    }

    /// `(r_eve, r_sec)` as seen by one receiver.
    pub fn receiver(&self, receiver: Receiver) -> (Option<Estimate>, Option<Estimate>) {
        match receiver {
            Receiver::Joint => (Some(self.r_eve_joint), Some(self.r_sec_joint)),
            Receiver::PerSubchannel => (Some(self.r_eve_persub), Some(self.r_sec_persub)),
            Receiver::Approx => (self.r_eve_approx, self.r_sec_approx),
        }
    }
}

/// Aggregated result for one (sweep value, scheme) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub sweep_index: usize,
    pub sweep_value: Option<f64>,
    pub scheme: Scheme,
    pub alpha: f64,
    pub rates_bps: RateSummary,
    pub trials: usize,
    pub fallbacks: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvalidPoint {
    pub sweep_index: usize,
    pub value: f64,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutput {
    pub rows: Vec<ResultRow>,
    pub invalid: Vec<InvalidPoint>,
}

impl ExperimentOutput {
    pub fn row(&self, sweep_index: usize, scheme: Scheme) -> Option<&ResultRow> {
        self.rows.iter().find(|r| r.sweep_index == sweep_index && r.scheme == scheme)
    }
}

/// Runs a whole experiment on `workers` threads (0 = rayon default).
pub fn run_experiment(spec: &ExperimentSpec, workers: usize) -> Result<ExperimentOutput> {
    spec.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::NumericalFailure(format!("cannot start worker pool: {e}")))?;
    pool.install(|| run_experiment_inner(spec))
}

fn run_experiment_inner(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    let mut rows = Vec::new();
    let mut invalid = Vec::new();
    for (sweep_index, value) in spec.points().into_iter().enumerate() {
        let point = match spec.point(value) {
            Ok(p) => p,
            Err(Error::InvalidSweep { value, reason }) => {
                log::warn!("skipping sweep value {value}: {reason}");
                invalid.push(InvalidPoint { sweep_index, value, reason });
                continue;
            }
            Err(e) => return Err(e),
        };
        let alphas: Vec<f64> = if spec.alpha_search { ALPHA_GRID.to_vec() } else { vec![point.budget.alpha()] };
        let mut best: Vec<Option<(f64, Vec<RateBreakdown>, usize)>> = vec![None; spec.schemes.len()];
        for &alpha in &alphas {
            let trials = run_point(&point.with_alpha(alpha)?, &spec.schemes, spec.seed, sweep_index as u64, spec.trials)?;
            for (s, &scheme) in spec.schemes.iter().enumerate() {
                let series: Vec<RateBreakdown> = trials.iter().map(|t| *t.rates(scheme).expect("scheme evaluated")).collect();
                let fallbacks = trials
                    .iter()
                    .filter(|t| t.outcomes.iter().any(|o| o.scheme == scheme && o.fell_back))
                    .count();
                let score = series.iter().map(|r| r.r_sec_joint).sum::<f64>();
                let better = match &best[s] {
                    None => true,
                    Some((_, prev, _)) => score > prev.iter().map(|r| r.r_sec_joint).sum::<f64>(),
                };
                if better {
                    best[s] = Some((alpha, series, fallbacks));
                }
            }
        }
        for (s, &scheme) in spec.schemes.iter().enumerate() {
            let (alpha, series, fallbacks) = best[s].take().expect("at least one alpha evaluated");
            rows.push(ResultRow {
                sweep_index,
                sweep_value: value,
                scheme,
                alpha,
                rates_bps: RateSummary::from_breakdowns(&series),
                trials: series.len(),
                fallbacks,
                seed: spec.seed,
            });
        }
    }
    Ok(ExperimentOutput { rows, invalid })
}

/// Receivers reported for a spec, in table order.
pub fn reported_receivers(spec: &ExperimentSpec) -> Vec<Receiver> {
    let mut out = match spec.eve_receiver {
        EveReceiver::Joint => vec![Receiver::Joint],
        EveReceiver::PerSubchannel => vec![Receiver::PerSubchannel],
        EveReceiver::Both => vec![Receiver::Joint, Receiver::PerSubchannel],
    };
    if spec.report_approx {
        out.push(Receiver::Approx);
    }
    out
}

/// Experiment spec and the list of parameters that were filled in rather
/// than taken from the source experiments.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub figure: Figure,
    pub spec: ExperimentSpec,
    pub assumed: BTreeSet<String>,
}

pub fn figure_preset(which: Figure) -> Preset {
    let base = ExperimentSpec::default();
    let mut assumed: BTreeSet<String> = DEFAULT_ASSUMED.iter().map(|s| s.to_string()).collect();
    let spec = match which {
        Figure::Fig1 => {
            assumed.insert("equal_data_power".into());
            assumed.remove("alpha");
            ExperimentSpec {
                sweep_axis: Some(SweepAxis::Alpha),
                sweep_values: (1..=19).map(|i| i as f64 * 0.05).map(|v| (v * 100.0).round() / 100.0).collect(),
                schemes: vec![Scheme::UnknownCsi],
                eve_receiver: EveReceiver::Joint,
                equal_data_power: true,
                report_approx: true,
                ..base
            }
        }
        Figure::Fig2 => {
            assumed.remove("n");
            ExperimentSpec {
                // N = 16 is in the sweep, so the prefix must stay below it.
                n_cp: 8,
                sweep_axis: Some(SweepAxis::N),
                sweep_values: vec![16.0, 32.0, 64.0, 128.0, 256.0],
                schemes: vec![Scheme::UnknownCsi],
                eve_receiver: EveReceiver::Both,
                equal_data_power: true,
                ..base
            }
        }
        Figure::Fig3 | Figure::Fig4 => {
            assumed.remove("n_cp");
            assumed.remove("snr_db");
            let useful = base.l_b.max(base.l_e);
            ExperimentSpec {
                snr_db: if which == Figure::Fig3 { 30.0 } else { 10.0 },
                sweep_axis: Some(SweepAxis::NCp),
                sweep_values: (useful..=32).map(|v| v as f64).collect(),
                schemes: vec![
                    Scheme::EqualPower,
                    Scheme::UnknownCsi,
                    Scheme::KnownCsiTwoStage,
                    Scheme::KnownCsiNoSecondPrecoder,
                ],
                eve_receiver: EveReceiver::Joint,
                ..base
            }
        }
        Figure::Fig5 => {
            assumed.remove("l_b");
            assumed.remove("l_e");
            ExperimentSpec {
                l_e: 8,
                sweep_axis: Some(SweepAxis::LB),
                sweep_values: (1..=16).map(|v| v as f64).collect(),
                schemes: vec![Scheme::UnknownCsi, Scheme::KnownCsiTwoStage],
                eve_receiver: EveReceiver::Joint,
                ..base
            }
        }
    };
    Preset { figure: which, spec, assumed }
}
