//! Eve's rate under joint decoding, per-subchannel decoding and the diagonal
//! approximation, with equal data power and unknown-CSI AN.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use temporal_an::allocation::{an_power_unknown_csi, an_power_unknown_csi_structured, PowerBudget};
use temporal_an::ofdm::{freq_response, ChannelPair, NoiseModel, OfdmConfig, TapProfile};
use temporal_an::precoding::PrecoderSet;
use temporal_an::rates::{interference_cov, rate_bob, rate_eve_approx, rate_eve_joint, rate_eve_persub, to_bits_per_sec};

fn main() -> temporal_an::Result<()> {
    let cfg = OfdmConfig::new(64, 16, 1e6)?;
    let noise = NoiseModel::unit(&cfg);
    let (nb, ne) = (noise.bob_power(&cfg), noise.eve_power(&cfg));
    let budget = PowerBudget::new(64.0 * nb * 1e3, 0.5)?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let pair = ChannelPair::sample(4, 8, TapProfile::default(), &cfg, &mut rng)?;
    let set = PrecoderSet::build(&pair, &cfg, false)?;

    let p_x = vec![budget.data() / 64.0; 64];
    let p_z = an_power_unknown_csi_structured(set.useful, cfg.n_cp(), budget.an());
    let k = interference_cov(&set.q_tilde, None, &p_z);
    let (h, g) = (freq_response(&pair.bob, 64), freq_response(&pair.eve, 64));

    let bob = rate_bob(&h, &p_x, nb);
    let joint = rate_eve_joint(&g, &p_x, &k, ne)?;
    let persub = rate_eve_persub(&g, &p_x, &k, ne);
    // The approximation pairs the i-th strongest AN direction with subchannel i.
    let p_z_sorted = an_power_unknown_csi(set.useful, cfg.n_cp(), budget.an());
    let approx = rate_eve_approx(&g, p_x[0], &set.svd.singular_values, &p_z_sorted, ne, set.useful);

    println!("bits/block: Bob {bob:.2}, Eve joint {joint:.2}, per-subchannel {persub:.2}, approx {approx:.2}");
    println!("secrecy (joint Eve): {:.0} bits/s", to_bits_per_sec((bob - joint).max(0.0), &cfg));
    Ok(())
}
