//! Power allocation between data subchannels and AN streams.
//!
//! Two-stage scheme: the AN budget `(1−α)P` is placed first (water-filling
//! over `δ²_{z,i}` with Eve's CSI, equal split over the useful streams
//! without), then the data budget `αP` is placed either by water-filling on
//! Bob's gains alone or by the per-subchannel secrecy closed form with a
//! bisected Lagrange multiplier.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerBudget {
    total: f64,
    alpha: f64,
}

impl PowerBudget {
    pub fn new(total: f64, alpha: f64) -> Result<Self> {
        if !(total.is_finite() && total > 0.0) {
            return Err(Error::InvalidConfig(format!("total power must be positive, got {total}")));
        }
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::InvalidConfig(format!("alpha must lie in [0, 1], got {alpha}")));
        }
        Ok(Self { total, alpha })
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    /// Fraction of the total power spent on data.
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn data(&self) -> f64 {
        self.alpha * self.total
    }

    pub fn an(&self) -> f64 {
        (1.0 - self.alpha) * self.total
    }

    /// Same total with every watt on data.
    pub fn all_data(&self) -> Self {
        Self { total: self.total, alpha: 1.0 }
    }
}

/// Per-subchannel data powers and per-stream AN powers (SVD ordering).
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation {
    pub p_x: Vec<f64>,
    pub p_z: Vec<f64>,
    pub budget: PowerBudget,
}

impl PowerAllocation {
    /// Checks non-negativity, the sum-power constraint (relative 1e−6) and
    /// that no AN power sits beyond the `useful` leading streams.
    pub fn check(&self, useful: usize) -> Result<()> {
        if self.p_x.iter().chain(&self.p_z).any(|&p| !(p >= 0.0)) {
            return Err(Error::NumericalFailure("negative or NaN power".into()));
        }
        let used: f64 = self.p_x.iter().sum::<f64>() + self.p_z.iter().sum::<f64>();
        let total = self.budget.total();
        if (used - total).abs() > 1e-6 * total {
            return Err(Error::NumericalFailure(format!("allocation uses {used}, budget {total}")));
        }
        if self.p_z.iter().skip(useful).any(|&p| p != 0.0) {
            return Err(Error::NumericalFailure("AN power on a useless stream".into()));
        }
        Ok(())
    }
}

fn check_budget(budget: f64) -> Result<()> {
    if budget.is_finite() && budget >= 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidBudget(budget))
    }
}

/// Classic water-filling, `p_i = [C − 1/g_i]⁺` with `Σ p_i = budget`.
pub fn water_fill(gains: &[f64], budget: f64) -> Result<Vec<f64>> {
    water_fill_with_level(gains, budget).map(|(p, _)| p)
}

/// [`water_fill`] that also returns the water level `C` (zero for an empty
/// budget).
pub fn water_fill_with_level(gains: &[f64], budget: f64) -> Result<(Vec<f64>, f64)> {
    check_budget(budget)?;
    let mut powers = vec![0.0; gains.len()];
    if budget == 0.0 {
        return Ok((powers, 0.0));
    }
    let mut active: Vec<usize> = (0..gains.len()).filter(|&i| gains[i] > 0.0).collect();
    if active.is_empty() {
        return Err(Error::AllZeroGains { budget });
    }
    loop {
        let inverse_sum: f64 = active.iter().map(|&i| 1.0 / gains[i]).sum();
        let level = (budget + inverse_sum) / active.len() as f64;
        let before = active.len();
        active.retain(|&i| level - 1.0 / gains[i] > 0.0);
        if active.len() == before {
            for &i in &active {
                powers[i] = level - 1.0 / gains[i];
            }
            return Ok((powers, level));
        }
    }
}

/// Known-CSI AN powers: water-fill `an_budget` over `δ²_{z,i}` for the first
/// `useful` singular values, zero on the rest.
pub fn an_power_known_csi(singular_values: &[f64], useful: usize, an_budget: f64) -> Result<Vec<f64>> {
    check_budget(an_budget)?;
    let mut out = vec![0.0; singular_values.len()];
    let useful = useful.min(singular_values.len());
    if useful == 0 {
        return Ok(out);
    }
    let gains: Vec<f64> = singular_values[..useful].iter().map(|d| d * d).collect();
    let filled = water_fill(&gains, an_budget)?;
    out[..useful].copy_from_slice(&filled);
    Ok(out)
}

/// Unknown-CSI AN powers in SVD ordering: `an_budget / L_u` on each of the
/// first `useful` streams.
pub fn an_power_unknown_csi(useful: usize, n_cp: usize, an_budget: f64) -> Vec<f64> {
    let mut out = vec![0.0; n_cp];
    if useful > 0 {
        let each = an_budget / useful as f64;
        out[..useful.min(n_cp)].iter_mut().for_each(|p| *p = each);
    }
    out
}

/// The same equal split in structured-`Q` column ordering, where the useful
/// directions are the *last* `useful` columns.
pub fn an_power_unknown_csi_structured(useful: usize, n_cp: usize, an_budget: f64) -> Vec<f64> {
    let mut out = an_power_unknown_csi(useful, n_cp, an_budget);
    out.reverse();
    out
}

/// Data powers from Bob's CSI only: water-filling on `|H_k|² / (Δ_f κ_B)`.
pub fn data_power_bob_only(bob_gains: &[f64], noise_b: f64, data_budget: f64) -> Result<Vec<f64>> {
    let normalized: Vec<f64> = bob_gains.iter().map(|g| g / noise_b).collect();
    water_fill(&normalized, data_budget)
}

/// Result of the per-subchannel secrecy allocation.
#[derive(Debug, Clone)]
pub struct SecrecyAllocation {
    pub powers: Vec<f64>,
    /// Lagrange multiplier `μ` that meets the budget.
    pub multiplier: f64,
    /// Every `(μ, Σ p_i(μ))` evaluated during the search.
    pub trace: Vec<(f64, f64)>,
}

/// Closed-form secrecy power on one subchannel for multiplier `mu`.
///
/// `bob` and `eve` are noise-normalized gains `a = |H|²/Δ_fκ_B` and
/// `b = |G̃|²`. Zero unless `a − b > μ`; otherwise the positive root of
/// `ab p² + (a+b) p + 1 − (a−b)/μ = 0`, written as `2c / (γ + √(γ² + 4ξc))`
/// with `c = (a−b)/μ − 1` so that `ξ = 0` needs no special case.
pub fn secrecy_power(bob: f64, eve: f64, mu: f64) -> f64 {
    let gap = bob - eve;
    if gap <= mu {
        return 0.0;
    }
    let gamma = bob + eve;
    let xi = bob * eve;
    let c = gap / mu - 1.0;
    let disc = (gamma * gamma + 4.0 * xi * c).max(0.0);
    2.0 * c / (gamma + disc.sqrt())
}

const SECRECY_MAX_ITER: usize = 200;
const SECRECY_REL_TOL: f64 = 1e-9;
const SECRECY_STOP_TOL: f64 = 1e-13;

/// Per-subchannel secrecy data allocation with the multiplier found by
/// bisection so that `Σ p_i = data_budget`.
pub fn data_power_secrecy(bob_gains: &[f64], eve_eff_gains: &[f64], data_budget: f64) -> Result<SecrecyAllocation> {
    assert_eq!(bob_gains.len(), eve_eff_gains.len(), "gain vectors must have equal length");
    check_budget(data_budget)?;
    let max_gap = bob_gains
        .iter()
        .zip(eve_eff_gains)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max);
    if !(max_gap > 0.0) {
        return Err(Error::NoPositiveGap);
    }
    if data_budget == 0.0 {
        return Ok(SecrecyAllocation { powers: vec![0.0; bob_gains.len()], multiplier: max_gap, trace: vec![] });
    }

    let total_at = |mu: f64| -> f64 {
        bob_gains.iter().zip(eve_eff_gains).map(|(&a, &b)| secrecy_power(a, b, mu)).sum()
    };
    let mut trace = Vec::new();

    // Σp(μ) → ∞ as μ → 0⁺ and is 0 at μ = max gap.
    let mut hi = max_gap;
    let mut lo = (1e-12_f64).min(max_gap * 0.5);
    loop {
        let t = total_at(lo);
        trace.push((lo, t));
        if t >= data_budget {
            break;
        }
        hi = lo;
        lo *= 1e-3;
        if lo < f64::MIN_POSITIVE * 1e10 {
            return Err(Error::NumericalFailure("cannot bracket the secrecy multiplier".into()));
        }
    }

    let mut mu = lo;
    for _ in 0..SECRECY_MAX_ITER {
        mu = (lo * hi).sqrt();
        if !(mu > lo && mu < hi) {
            mu = 0.5 * (lo + hi);
        }
        let t = total_at(mu);
        trace.push((mu, t));
        if (t - data_budget).abs() <= SECRECY_STOP_TOL * data_budget {
            break;
        }
        if t > data_budget {
            lo = mu;
        } else {
            hi = mu;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let powers: Vec<f64> = bob_gains.iter().zip(eve_eff_gains).map(|(&a, &b)| secrecy_power(a, b, mu)).collect();
    let used: f64 = powers.iter().sum();
    if (used - data_budget).abs() > SECRECY_REL_TOL * data_budget {
        return Err(Error::NumericalFailure(format!(
            "secrecy bisection stalled at {used} for budget {data_budget}"
        )));
    }
    Ok(SecrecyAllocation { powers, multiplier: mu, trace })
}

/// `Σ log₂(1 + g_i p_i)`.
pub fn capacity_objective(gains: &[f64], powers: &[f64]) -> f64 {
    gains.iter().zip(powers).map(|(g, p)| (g * p).ln_1p()).sum::<f64>() / std::f64::consts::LN_2
}

/// `Σ [log₂(1 + a_i p_i) − log₂(1 + b_i p_i)]`.
pub fn secrecy_objective(bob: &[f64], eve: &[f64], powers: &[f64]) -> f64 {
    bob.iter()
        .zip(eve)
        .zip(powers)
        .map(|((a, b), p)| (a * p).ln_1p() - (b * p).ln_1p())
        .sum::<f64>()
        / std::f64::consts::LN_2
}
