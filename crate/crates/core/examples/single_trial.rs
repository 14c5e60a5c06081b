//! One Monte Carlo trial: every scheme on the same channel draw.

use temporal_an::simulate::{run_trial, ExperimentSpec, Scheme};

fn main() -> temporal_an::Result<()> {
    let spec = ExperimentSpec { schemes: Scheme::ALL.to_vec(), seed: 42, ..ExperimentSpec::default() };
    let point = spec.point(None)?;
    let trial = run_trial(&point, &spec.schemes, spec.seed, 0, 0)?;
    println!("useful AN streams: {}", trial.useful);
    for o in &trial.outcomes {
        let r = &o.rates;
        println!(
            "{:<30} Bob {:7.2}  Eve {:7.2}  secrecy {:7.2} bits/block  AN power {:.1}",
            o.scheme.name(),
            r.r_bob,
            r.r_eve_joint,
            r.r_sec_joint,
            o.p_z.iter().sum::<f64>()
        );
    }
    Ok(())
}
