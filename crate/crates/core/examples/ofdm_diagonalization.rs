//! CP insertion, a multipath channel and CP removal collapse to a diagonal
//! matrix after the DFT. Prints the largest off-diagonal entry.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use temporal_an::linalg::max_abs;
use temporal_an::ofdm::{cp_matrices, dft_matrix, freq_response, sample_channel, time_domain_matrix, OfdmConfig, TapProfile};

fn main() -> temporal_an::Result<()> {
    let cfg = OfdmConfig::new(16, 4, 1e6)?;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let taps = sample_channel(3, TapProfile::default(), &mut rng);

    let (t_cp, r_cp) = cp_matrices(&cfg);
    let f = dft_matrix(cfg.n());
    let h = time_domain_matrix(&taps, &cfg);
    let to_c = |m: nalgebra::DMatrix<f64>| m.map(|x| num_complex::Complex64::new(x, 0.0));
    let d = &f * to_c(r_cp) * h * to_c(t_cp) * f.adjoint();

    let freq = freq_response(&taps, cfg.n());
    let mut off = d.clone();
    for (k, h_k) in freq.iter().enumerate() {
        off[(k, k)] -= h_k;
    }
    println!("N = {}, N_cp = {}, L = {}", cfg.n(), cfg.n_cp(), taps.memory());
    println!("max |F R_cp H T_cp F* - diag(H_k)| = {:.2e}", max_abs(&off));
    for (k, h_k) in freq.iter().take(4).enumerate() {
        println!("H[{k}] = {:.4} {:+.4}i", h_k.re, h_k.im);
    }
    Ok(())
}
