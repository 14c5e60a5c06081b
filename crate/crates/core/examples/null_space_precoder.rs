//! Builds Bob's null-space AN precoder both ways, checks that Bob sees no AN,
//! and shows that only max(L_B, L_E) directions reach Eve.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use temporal_an::linalg::max_abs;
use temporal_an::ofdm::{cp_removed_channel, dft_matrix, ChannelPair, OfdmConfig, TapProfile};
use temporal_an::precoding::{negligible_columns, null_space_svd, PrecoderSet};

fn main() -> temporal_an::Result<()> {
    let cfg = OfdmConfig::new(64, 16, 1e6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let pair = ChannelPair::sample(4, 8, TapProfile::default(), &cfg, &mut rng)?;

    let set = PrecoderSet::build(&pair, &cfg, false)?;
    let h_bob = dft_matrix(cfg.n()) * cp_removed_channel(&pair.bob, &cfg);
    println!("structured Q: leak at Bob {:.2e}", max_abs(&(&h_bob * &set.q)));
    let q_svd = null_space_svd(&h_bob)?;
    println!("SVD Q:        leak at Bob {:.2e}", max_abs(&(&h_bob * &q_svd)));

    println!("useful AN streams L_u = {}", set.useful);
    println!("numerical rank of Q~ = {}, zero columns = {}", set.svd.rank(), negligible_columns(&set.q_tilde));
    let sv: Vec<String> = set.svd.singular_values.iter().map(|s| format!("{s:.2e}")).collect();
    println!("singular values: {}", sv.join(" "));
    Ok(())
}
