//! OFDM block scaffolding: cyclic-prefix insertion/removal, the unitary DFT,
//! random multipath channels and their time/frequency-domain matrices.
//!
//! Conventions: `F` is the unitary DFT (`F F* = I`), time-domain channels are
//! lower-triangular Toeplitz matrices of size `(N+N_cp) × (N+N_cp)`, and the
//! frequency response at bin `k` is the *unnormalized* DFT of the zero-padded
//! taps, which is exactly the diagonal of `F R_cp H T_cp F*`.

use std::cell::RefCell;
use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, ZERO};

/// Relative off-diagonal tolerance for the frequency-domain diagonalization.
pub const DIAGONAL_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OfdmConfig {
    n: usize,
    n_cp: usize,
    bandwidth_hz: f64,
}

impl OfdmConfig {
    pub fn new(n: usize, n_cp: usize, bandwidth_hz: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::InvalidConfig(format!("need at least 2 subchannels, got N = {n}")));
        }
        if n_cp == 0 || n_cp >= n {
            return Err(Error::InvalidConfig(format!(
                "cyclic prefix must satisfy 1 <= N_cp < N, got N_cp = {n_cp}, N = {n}"
            )));
        }
        if !(bandwidth_hz.is_finite() && bandwidth_hz > 0.0) {
            return Err(Error::InvalidConfig(format!("bandwidth must be positive, got {bandwidth_hz}")));
        }
        Ok(Self { n, n_cp, bandwidth_hz })
    }

    /// Number of data subchannels `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    /// Cyclic-prefix length `N_cp` in samples.
    pub fn n_cp(&self) -> usize {
        self.n_cp
    }

    /// Samples per transmitted block, `N + N_cp`.
    pub fn block_len(&self) -> usize {
        self.n + self.n_cp
    }

    pub fn bandwidth_hz(&self) -> f64 {
        self.bandwidth_hz
    }

    /// Per-subchannel bandwidth `Δ_f = B / N`.
    pub fn delta_f(&self) -> f64 {
        self.bandwidth_hz / self.n as f64
    }
}

/// Receiver noise power spectral densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    pub kappa_b: f64,
    pub kappa_e: f64,
}

impl NoiseModel {
    pub fn new(kappa_b: f64, kappa_e: f64) -> Result<Self> {
        if !(kappa_b > 0.0 && kappa_e > 0.0 && kappa_b.is_finite() && kappa_e.is_finite()) {
            return Err(Error::InvalidConfig(format!(
                "noise densities must be positive, got kappa_B = {kappa_b}, kappa_E = {kappa_e}"
            )));
        }
        Ok(Self { kappa_b, kappa_e })
    }

    /// Densities giving unit per-subchannel noise power at both receivers.
    pub fn unit(cfg: &OfdmConfig) -> Self {
        let kappa = 1.0 / cfg.delta_f();
        Self { kappa_b: kappa, kappa_e: kappa }
    }

    /// Per-subchannel noise power at Bob, `Δ_f κ_B`.
    pub fn bob_power(&self, cfg: &OfdmConfig) -> f64 {
        cfg.delta_f() * self.kappa_b
    }

    /// Per-subchannel noise power at Eve, `Δ_f κ_E`.
    pub fn eve_power(&self, cfg: &OfdmConfig) -> f64 {
        cfg.delta_f() * self.kappa_e
    }
}

/// Distribution family used to draw channel taps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TapProfile {
    /// Uniform power-delay profile, each tap `CN(0, 1/(L+1))`.
    #[default]
    UniformPdpGaussian,
    /// I.i.d. uniform magnitudes and phases, rescaled to unit total power.
    UniformMagnitude,
}

impl std::str::FromStr for TapProfile {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "uniform-pdp-gaussian" => Ok(Self::UniformPdpGaussian),
            "uniform-magnitude" => Ok(Self::UniformMagnitude),
            other => Err(Error::InvalidConfig(format!("unknown tap profile '{other}'"))),
        }
    }
}

impl std::fmt::Display for TapProfile {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::UniformPdpGaussian => "uniform-pdp-gaussian",
            Self::UniformMagnitude => "uniform-magnitude",
        })
    }
}

/// Channel impulse response of one link. `memory()` is `L`, so there are
/// `L + 1` taps.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelTaps {
    taps: Vec<Complex64>,
    profile: TapProfile,
    avg_tap_gain: f64,
}

impl ChannelTaps {
    pub fn new(taps: Vec<Complex64>, profile: TapProfile) -> Result<Self> {
        if taps.is_empty() {
            return Err(Error::InvalidConfig("a channel needs at least one tap".into()));
        }
        let avg_tap_gain = 1.0 / taps.len() as f64;
        Ok(Self { taps, profile, avg_tap_gain })
    }

    /// Deterministic taps from real values, handy in tests and examples.
    pub fn from_real(taps: &[f64]) -> Result<Self> {
        Self::new(taps.iter().map(|&t| Complex64::new(t, 0.0)).collect(), TapProfile::UniformPdpGaussian)
    }

    pub fn taps(&self) -> &[Complex64] {
        &self.taps
    }

    pub fn memory(&self) -> usize {
        self.taps.len() - 1
    }

    pub fn profile(&self) -> TapProfile {
        self.profile
    }

    /// Expected power per tap, `σ²`.
    pub fn avg_tap_gain(&self) -> f64 {
        self.avg_tap_gain
    }

    pub fn energy(&self) -> f64 {
        self.taps.iter().map(|h| h.norm_sqr()).sum()
    }

    pub fn check_fits(&self, cfg: &OfdmConfig) -> Result<()> {
        if self.memory() > cfg.n_cp() {
            return Err(Error::InvalidConfig(format!(
                "channel memory {} exceeds cyclic prefix {}",
                self.memory(),
                cfg.n_cp()
            )));
        }
        Ok(())
    }
}

/// Alice–Bob and Alice–Eve channels sharing one OFDM configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelPair {
    pub bob: ChannelTaps,
    pub eve: ChannelTaps,
}

impl ChannelPair {
    pub fn new(bob: ChannelTaps, eve: ChannelTaps, cfg: &OfdmConfig) -> Result<Self> {
        bob.check_fits(cfg)?;
        eve.check_fits(cfg)?;
        Ok(Self { bob, eve })
    }

    pub fn sample<R: Rng + ?Sized>(
        l_b: usize,
        l_e: usize,
        profile: TapProfile,
        cfg: &OfdmConfig,
        rng: &mut R,
    ) -> Result<Self> {
        let bob = sample_channel(l_b, profile, rng);
        let eve = sample_channel(l_e, profile, rng);
        Self::new(bob, eve, cfg)
    }
}

/// CP insertion `T_cp` ((N+N_cp) × N) and removal `R_cp` (N × (N+N_cp)).
pub fn cp_matrices(cfg: &OfdmConfig) -> (DMatrix<f64>, DMatrix<f64>) {
    let (n, ncp) = (cfg.n(), cfg.n_cp());
    let mut t_cp = DMatrix::zeros(n + ncp, n);
    for r in 0..ncp {
        t_cp[(r, n - ncp + r)] = 1.0;
    }
    for r in 0..n {
        t_cp[(ncp + r, r)] = 1.0;
    }
    let mut r_cp = DMatrix::zeros(n, n + ncp);
    for r in 0..n {
        r_cp[(r, ncp + r)] = 1.0;
    }
    (t_cp, r_cp)
}

/// Unitary DFT matrix, entry `(k, n) = exp(−j2πkn/N)/√N`.
pub fn dft_matrix(n: usize) -> CMatrix {
    let scale = 1.0 / (n as f64).sqrt();
    CMatrix::from_fn(n, n, |k, m| {
        // Reduce the exponent first so large N keeps full phase accuracy.
        let idx = (k * m) % n;
        Complex64::from_polar(scale, -2.0 * PI * idx as f64 / n as f64)
    })
}

/// Draw an `L`-memory channel with unit expected total power.
pub fn sample_channel<R: Rng + ?Sized>(memory: usize, profile: TapProfile, rng: &mut R) -> ChannelTaps {
    let count = memory + 1;
    let taps = match profile {
        TapProfile::UniformPdpGaussian => {
            let sigma = (0.5 / count as f64).sqrt();
            (0..count)
                .map(|_| {
                    let re: f64 = StandardNormal.sample(rng);
                    let im: f64 = StandardNormal.sample(rng);
                    Complex64::new(sigma * re, sigma * im)
                })
                .collect()
        }
        TapProfile::UniformMagnitude => {
            let raw: Vec<Complex64> = (0..count)
                .map(|_| {
                    // Keep magnitudes away from zero so the rescale is defined.
                    let mag: f64 = rng.random_range(f64::EPSILON..1.0);
                    let phase: f64 = rng.random_range(0.0..2.0 * PI);
                    Complex64::from_polar(mag, phase)
                })
                .collect();
            let energy: f64 = raw.iter().map(|h| h.norm_sqr()).sum();
            raw.into_iter().map(|h| h / energy.sqrt()).collect()
        }
    };
    ChannelTaps { taps, profile, avg_tap_gain: 1.0 / count as f64 }
}

/// Lower-triangular Toeplitz channel with first column `[h(0) … h(L) 0 … 0]ᵀ`.
pub fn time_domain_matrix(taps: &ChannelTaps, cfg: &OfdmConfig) -> CMatrix {
    let len = cfg.block_len();
    let h = taps.taps();
    CMatrix::from_fn(len, len, |i, j| if i >= j && i - j < h.len() { h[i - j] } else { ZERO })
}

/// `R_cp H_time`, the N × (N+N_cp) channel seen after CP removal.
pub fn cp_removed_channel(taps: &ChannelTaps, cfg: &OfdmConfig) -> CMatrix {
    let (n, ncp) = (cfg.n(), cfg.n_cp());
    let h = taps.taps();
    CMatrix::from_fn(n, n + ncp, |k, c| {
        let row = ncp + k;
        if row >= c && row - c < h.len() {
            h[row - c]
        } else {
            ZERO
        }
    })
}

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// In-place unnormalized forward DFT of every column of `m`.
pub(crate) fn fft_columns(m: &mut CMatrix) {
    let n = m.nrows();
    if n == 0 {
        return;
    }
    let fft = PLANNER.with(|p| p.borrow_mut().plan_fft_forward(n));
    for mut col in m.column_iter_mut() {
        // nalgebra stores columns contiguously.
        fft.process(col.as_mut_slice());
    }
}

/// Unnormalized N-point DFT of the zero-padded taps: `H_k = Σ_l h(l) e^{−j2πkl/N}`.
pub fn freq_response(taps: &ChannelTaps, n: usize) -> Vec<Complex64> {
    let mut padded = CMatrix::zeros(n, 1);
    for (l, &h) in taps.taps().iter().enumerate() {
        padded[(l % n, 0)] += h;
    }
    fft_columns(&mut padded);
    padded.iter().cloned().collect()
}

/// Diagonal of `F R_cp H_time T_cp F*`, after checking the product is diagonal.
///
/// This builds the dense product; simulations use [`freq_response`], which
/// returns the same values in `O(N log N)`.
pub fn freq_diag_channel(taps: &ChannelTaps, cfg: &OfdmConfig) -> Result<CVector> {
    let f = dft_matrix(cfg.n());
    let (t_cp, _) = cp_matrices(cfg);
    let t_cp = t_cp.map(|x| Complex64::new(x, 0.0));
    let product = &f * cp_removed_channel(taps, cfg) * t_cp * f.adjoint();
    let mut diag_max = 0.0_f64;
    let mut off_max = 0.0_f64;
    for i in 0..cfg.n() {
        for j in 0..cfg.n() {
            let mag = product[(i, j)].norm();
            if i == j {
                diag_max = diag_max.max(mag);
            } else {
                off_max = off_max.max(mag);
            }
        }
    }
    if off_max > DIAGONAL_TOLERANCE * diag_max.max(f64::MIN_POSITIVE) {
        return Err(Error::NotDiagonal { off_diagonal: off_max, diagonal: diag_max });
    }
    Ok(CVector::from_iterator(cfg.n(), (0..cfg.n()).map(|i| product[(i, i)])))
}

/// `|H_k|²` for a frequency response.
pub fn power_gains(freq: &[Complex64]) -> Vec<f64> {
    freq.iter().map(|h| h.norm_sqr()).collect()
}
