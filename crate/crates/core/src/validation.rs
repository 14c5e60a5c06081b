//! Self-check suite behind the `validate` subcommand.
//!
//! Each check draws seeded random realizations and tests one structural
//! property of the pipeline. The quick mode uses far fewer draws.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::allocation;
use crate::linalg::{identity_defect, max_abs};
use crate::ofdm::{cp_removed_channel, dft_matrix, freq_diag_channel, sample_channel, ChannelPair, OfdmConfig, TapProfile};
use crate::precoding::{negligible_columns, null_space_structured, null_space_svd, PrecoderSet};
use crate::rates;
use crate::simulate::{run_experiment, run_trial, ExperimentSpec, Scheme};

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:<4} {:<28} {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

const SEED: u64 = 0x5eed;

/// Runs every check; `quick` shrinks the number of realizations.
pub fn run_suite(quick: bool) -> Vec<Check> {
    let scale = if quick { 1 } else { 10 };
    vec![
        ofdm_diagonalization(5 * scale),
        an_nulling(20 * scale),
        useful_rank(2 * scale),
        water_fill_kkt(50 * scale),
        sylvester(20 * scale),
        receiver_ordering(50 * scale),
        approximation_gap(50 * scale),
        worker_determinism(if quick { 20 } else { 100 }),
    ]
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ tag)
}

fn ofdm_diagonalization(draws: usize) -> Check {
    let cfg = OfdmConfig::new(64, 16, 1e6).expect("valid config");
    let mut rng = rng(1);
    let mut failures = 0;
    for _ in 0..draws {
        let l = rng.random_range(0..=16);
        if freq_diag_channel(&sample_channel(l, TapProfile::default(), &mut rng), &cfg).is_err() {
            failures += 1;
        }
    }
    check("cp-dft-diagonalization", failures == 0, format!("{failures}/{draws} non-diagonal"))
}

fn an_nulling(draws: usize) -> Check {
    let cfg = OfdmConfig::new(64, 16, 1e6).expect("valid config");
    let f = dft_matrix(64);
    let mut rng = rng(2);
    let mut worst: f64 = 0.0;
    let mut errors = 0;
    for _ in 0..draws {
        let taps = sample_channel(rng.random_range(0..=16), TapProfile::default(), &mut rng);
        let h = &f * cp_removed_channel(&taps, &cfg);
        for q in [null_space_structured(&taps, &cfg), null_space_svd(&h)] {
            match q {
                Ok(q) => worst = worst.max(max_abs(&(&h * &q))).max(identity_defect(&(q.adjoint() * &q))),
                Err(_) => errors += 1,
            }
        }
    }
    check("an-nulling-at-bob", errors == 0 && worst < 1e-9, format!("max leak {worst:.2e}, {errors} errors"))
}

/// Rank equals `L_u` generically. A realization whose channel polynomial has
/// a root very close to zero or infinity pushes one true singular value
/// below double precision, so a small miss rate is tolerated; the rank may
/// never exceed `L_u` and the zero-column count must be exact.
fn useful_rank(per_pair: usize) -> Check {
    let cfg = OfdmConfig::new(64, 16, 1e6).expect("valid config");
    let mut rng = rng(3);
    let mut broken = 0;
    let mut short = 0;
    let mut total = 0;
    for l_b in 0..=16 {
        for l_e in 0..=16 {
            for _ in 0..per_pair {
                total += 1;
                let Ok(set) = ChannelPair::sample(l_b, l_e, TapProfile::default(), &cfg, &mut rng)
                    .and_then(|pair| PrecoderSet::build(&pair, &cfg, false))
                else {
                    broken += 1;
                    continue;
                };
                let rank = set.svd.rank();
                if rank > set.useful || negligible_columns(&set.q_tilde) != 16 - set.useful {
                    broken += 1;
                } else if rank < set.useful || set.svd.rank_gap() < 1e6 {
                    short += 1;
                }
            }
        }
    }
    let passed = broken == 0 && short * 100 <= total;
    check("useful-an-rank", passed, format!("{broken} structural misses, {short}/{total} rank-deficient in double precision"))
}

fn water_fill_kkt(draws: usize) -> Check {
    let mut rng = rng(4);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let len = rng.random_range(1..=16);
        let gains: Vec<f64> = (0..len).map(|_| rng.random_range(0.01..10.0)).collect();
        let budget = rng.random_range(0.1..20.0);
        let Ok((p, level)) = allocation::water_fill_with_level(&gains, budget) else {
            worst = f64::INFINITY;
            continue;
        };
        let sum: f64 = p.iter().sum();
        worst = worst.max((sum - budget).abs() / budget);
        for (g, pi) in gains.iter().zip(&p) {
            let slack = if *pi > 0.0 { (pi + 1.0 / g - level).abs() } else { (1.0 / g - level).min(0.0).abs() };
            worst = worst.max(slack / level);
        }
    }
    check("water-filling-kkt", worst < 1e-9, format!("max relative KKT violation {worst:.2e}"))
}

fn sylvester(draws: usize) -> Check {
    let cfg = OfdmConfig::new(32, 8, 1e6).expect("valid config");
    let mut rng = rng(5);
    let mut worst: f64 = 0.0;
    for _ in 0..draws {
        let l_b = rng.random_range(0..=8);
        let l_e = rng.random_range(0..=8);
        let Ok(set) = ChannelPair::sample(l_b, l_e, TapProfile::default(), &cfg, &mut rng)
            .and_then(|pair| PrecoderSet::build(&pair, &cfg, true))
        else {
            worst = f64::INFINITY;
            continue;
        };
        let p_z: Vec<f64> = (0..8).map(|_| rng.random_range(0.0..100.0)).collect();
        let dense = rates::an_log_det_dense(&set.svd.left_unitary(), &set.svd.lambda(), &p_z).unwrap_or(f64::NAN);
        let scalar = rates::an_log_det_scalar(&set.svd.singular_values, &p_z);
        worst = worst.max((dense - scalar).abs() / scalar.abs().max(1.0));
    }
    check("sylvester-consistency", worst < 1e-9, format!("max relative mismatch {worst:.2e}"))
}

fn small_spec(trials: usize) -> ExperimentSpec {
    ExperimentSpec { trials, schemes: Scheme::ALL.to_vec(), seed: SEED, ..ExperimentSpec::default() }
}

fn receiver_ordering(draws: usize) -> Check {
    let spec = small_spec(draws);
    let point = spec.point(None).expect("default point is valid");
    let mut worst = f64::NEG_INFINITY;
    for t in 0..draws as u64 {
        let Ok(trial) = run_trial(&point, &spec.schemes, spec.seed, 0, t) else {
            worst = f64::INFINITY;
            continue;
        };
        for o in &trial.outcomes {
            worst = worst.max(o.rates.r_eve_persub - o.rates.r_eve_joint);
        }
    }
    check("per-subchannel-below-joint", worst <= 1e-9, format!("max persub - joint {worst:.2e} bits/block"))
}

fn approximation_gap(draws: usize) -> Check {
    let spec = ExperimentSpec { equal_data_power: true, ..small_spec(draws) };
    let point = spec.point(None).expect("default point is valid");
    let mut gap = 0.0;
    let mut count = 0;
    for t in 0..draws as u64 {
        if let Ok(trial) = run_trial(&point, &[Scheme::UnknownCsi], spec.seed, 0, t) {
            let r = &trial.outcomes[0].rates;
            if let Some(approx) = r.r_eve_approx {
                gap += (r.r_eve_joint - approx).abs() / r.r_eve_joint;
                count += 1;
            }
        }
    }
    let mean = if count > 0 { gap / count as f64 } else { f64::INFINITY };
    check("diagonal-approximation-gap", mean < 0.05, format!("mean relative gap {:.3}%", 100.0 * mean))
}

fn worker_determinism(trials: usize) -> Check {
    let spec = small_spec(trials);
    let a = run_experiment(&spec, 1);
    let b = run_experiment(&spec, 4);
    let same = matches!((&a, &b), (Ok(x), Ok(y)) if x == y);
    check("worker-count-determinism", same, format!("{trials} trials on 1 and 4 workers"))
}
