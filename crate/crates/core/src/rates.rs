//! Achievable-rate expressions for Bob and Eve, secrecy rates and unit
//! conversion.
//!
//! All rates are in bits per OFDM block unless stated otherwise. Eve's
//! interference covariance is `K = Q̃ U Σ_z U* Q̃*` (or `Q̃ Σ_z Q̃*` without a
//! second precoder); it always has rank at most `N_cp`, so the simulator works
//! with a factor `B` such that `K = B B*` and evaluates determinants through
//! the `N_cp × N_cp` matrix-determinant lemma.

use std::f64::consts::LN_2;

use nalgebra::Cholesky;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, ONE};
use crate::ofdm::OfdmConfig;

/// Every rate variant for one channel realization and scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateBreakdown {
    pub r_bob: f64,
    pub r_eve_joint: f64,
    pub r_eve_persub: f64,
    /// Only defined when every subchannel carries the same data power.
    pub r_eve_approx: Option<f64>,
    pub r_sec_joint: f64,
    pub r_sec_persub: f64,
    pub r_sec_approx: Option<f64>,
    /// Multiplier `B / (N + N_cp)` from bits/block to bits/s.
    pub scale_bits_per_sec: f64,
}

impl RateBreakdown {
    pub fn new(r_bob: f64, r_eve_joint: f64, r_eve_persub: f64, r_eve_approx: Option<f64>, cfg: &OfdmConfig) -> Self {
        Self {
            r_bob,
            r_eve_joint,
            r_eve_persub,
            r_eve_approx,
            r_sec_joint: secrecy(r_bob, r_eve_joint),
            r_sec_persub: secrecy(r_bob, r_eve_persub),
            r_sec_approx: r_eve_approx.map(|e| secrecy(r_bob, e)),
            scale_bits_per_sec: cfg.bandwidth_hz() / cfg.block_len() as f64,
        }
    }
}

fn log2_1p(x: f64) -> f64 {
    x.ln_1p() / LN_2
}

/// Bob's rate, `Σ log₂(1 + |H_k|² p_{x,k} / Δ_fκ_B)`.
pub fn rate_bob(bob_freq: &[Complex64], p_x: &[f64], noise_b: f64) -> f64 {
    bob_freq.iter().zip(p_x).map(|(h, p)| log2_1p(h.norm_sqr() * p / noise_b)).sum()
}

/// Low-rank factor `B = Q̃ U Σ_z^{1/2}` (or `Q̃ Σ_z^{1/2}` without `U`), so the
/// interference covariance is `B B*`.
pub fn interference_factor(q_tilde: &CMatrix, u: Option<&CMatrix>, p_z: &[f64]) -> CMatrix {
    let mut steered = match u {
        Some(u) => q_tilde * u,
        None => q_tilde.clone(),
    };
    assert_eq!(steered.ncols(), p_z.len(), "one AN power per stream");
    for (mut col, &p) in steered.column_iter_mut().zip(p_z) {
        col *= Complex64::new(p.max(0.0).sqrt(), 0.0);
    }
    steered
}

/// Interference covariance at Eve, `Q̃ U Σ_z U* Q̃*`.
pub fn interference_cov(q_tilde: &CMatrix, u: Option<&CMatrix>, p_z: &[f64]) -> CMatrix {
    let b = interference_factor(q_tilde, u, p_z);
    let mut k = &b * b.adjoint();
    // Exact Hermitian symmetry for the factorizations downstream.
    for i in 0..k.nrows() {
        k[(i, i)] = Complex64::new(k[(i, i)].re, 0.0);
        for j in 0..i {
            k[(j, i)] = k[(i, j)].conj();
        }
    }
    k
}

fn ln_det_hpd(m: CMatrix) -> Result<f64> {
    let chol = Cholesky::new(m).ok_or_else(|| Error::NumericalFailure("matrix is not positive definite".into()))?;
    let l = chol.l_dirty();
    Ok((0..l.nrows()).map(|i| 2.0 * l[(i, i)].re.ln()).sum())
}

/// Eve's joint-decoding rate,
/// `log₂det(I + G P_x G* (K + Δ_fκ_E I)⁻¹)`.
///
/// Evaluated as `log₂det(K + Δ_fκ_E I + G P_x G*) − log₂det(K + Δ_fκ_E I)`
/// with two Cholesky factorizations; no inverse is formed.
pub fn rate_eve_joint(eve_freq: &[Complex64], p_x: &[f64], k: &CMatrix, noise_e: f64) -> Result<f64> {
    let n = eve_freq.len();
    let mut base = k.clone();
    for i in 0..n {
        base[(i, i)] += Complex64::new(noise_e, 0.0);
    }
    let mut full = base.clone();
    for i in 0..n {
        full[(i, i)] += Complex64::new(eve_freq[i].norm_sqr() * p_x[i], 0.0);
    }
    let diff = ln_det_hpd(full)? - ln_det_hpd(base)?;
    Ok((diff / LN_2).max(0.0))
}

/// Same rate as [`rate_eve_joint`] for `K = B B*`, using
/// `det(A + BB*) = det(A) det(I + B* A⁻¹ B)` with diagonal `A`.
pub fn rate_eve_joint_lowrank(eve_freq: &[Complex64], p_x: &[f64], factor: &CMatrix, noise_e: f64) -> Result<f64> {
    let signal: Vec<f64> = eve_freq.iter().zip(p_x).map(|(g, p)| g.norm_sqr() * p).collect();
    let with_signal: f64 = signal.iter().map(|s| (s / noise_e).ln_1p()).sum();
    let a_full: Vec<f64> = signal.iter().map(|s| s + noise_e).collect();
    let a_noise = vec![noise_e; eve_freq.len()];
    let diff = with_signal + ln_det_capacitance(factor, &a_full)? - ln_det_capacitance(factor, &a_noise)?;
    Ok((diff / LN_2).max(0.0))
}

/// `ln det(I + B* diag(a)⁻¹ B)`.
fn ln_det_capacitance(factor: &CMatrix, diag: &[f64]) -> Result<f64> {
    let cols = factor.ncols();
    if cols == 0 {
        return Ok(0.0);
    }
    let mut scaled = factor.clone();
    for (i, &a) in diag.iter().enumerate() {
        let s = Complex64::new(1.0 / a.sqrt(), 0.0);
        for j in 0..cols {
            scaled[(i, j)] *= s;
        }
    }
    let mut cap = scaled.adjoint() * &scaled;
    for i in 0..cols {
        cap[(i, i)] = Complex64::new(cap[(i, i)].re, 0.0) + ONE;
    }
    ln_det_hpd(cap)
}

/// Eve's rate when `R_z` is replaced by the identity: the first `useful`
/// subchannels see noise plus `δ²_{z,i} p_{z,i}`, the rest see noise only.
///
/// Only defined for a common data power `p_x` on every subchannel.
pub fn rate_eve_approx(
    eve_freq: &[Complex64],
    p_x: f64,
    singular_values: &[f64],
    p_z: &[f64],
    noise_e: f64,
    useful: usize,
) -> f64 {
    eve_freq
        .iter()
        .enumerate()
        .map(|(i, g)| {
            let interference = if i < useful {
                let d = singular_values.get(i).copied().unwrap_or(0.0);
                d * d * p_z.get(i).copied().unwrap_or(0.0)
            } else {
                0.0
            };
            log2_1p(g.norm_sqr() * p_x / (noise_e + interference))
        })
        .sum()
}

/// Eve's per-subchannel rate with AN treated as independent noise of power
/// `η_k = [K]_{kk}`.
pub fn rate_eve_persub(eve_freq: &[Complex64], p_x: &[f64], k: &CMatrix, noise_e: f64) -> f64 {
    let eta: Vec<f64> = (0..eve_freq.len()).map(|i| k[(i, i)].re.max(0.0)).collect();
    rate_eve_persub_eta(eve_freq, p_x, &eta, noise_e)
}

/// [`rate_eve_persub`] from precomputed per-subchannel AN powers.
pub fn rate_eve_persub_eta(eve_freq: &[Complex64], p_x: &[f64], eta: &[f64], noise_e: f64) -> f64 {
    eve_freq
        .iter()
        .zip(p_x)
        .zip(eta)
        .map(|((g, p), e)| log2_1p(g.norm_sqr() * p / (e + noise_e)))
        .sum()
}

/// Diagonal of `B B*`: AN power landing on each of Eve's subchannels.
pub fn an_power_per_subchannel(factor: &CMatrix) -> Vec<f64> {
    factor.row_iter().map(|r| r.iter().map(|z| z.norm_sqr()).sum()).collect()
}

/// `log₂det(I_N + R_z Λ_z Σ_z Λ_z* R_z*)` built densely from the SVD factors.
pub fn an_log_det_dense(r_z: &CMatrix, lambda: &CMatrix, p_z: &[f64]) -> Result<f64> {
    let n = r_z.nrows();
    let mut m = CMatrix::identity(n, n);
    let mut scaled = r_z * lambda;
    for (mut col, &p) in scaled.column_iter_mut().zip(p_z) {
        col *= Complex64::new(p.sqrt(), 0.0);
    }
    m += &scaled * scaled.adjoint();
    Ok(ln_det_hpd(m)? / LN_2)
}

/// Scalar form of [`an_log_det_dense`], `Σ_i log₂(1 + δ²_{z,i} p_{z,i})`.
pub fn an_log_det_scalar(singular_values: &[f64], p_z: &[f64]) -> f64 {
    singular_values.iter().zip(p_z).map(|(d, p)| log2_1p(d * d * p)).sum()
}

/// `[R_B − R_E]⁺`.
pub fn secrecy(r_bob: f64, r_eve: f64) -> f64 {
    (r_bob - r_eve).max(0.0)
}

/// bits/block → bits/s, multiplying by `B / (N + N_cp)`.
pub fn to_bits_per_sec(rate_block: f64, cfg: &OfdmConfig) -> f64 {
    rate_block * cfg.bandwidth_hz() / cfg.block_len() as f64
}
