//! Lists the built-in figure presets and runs a shortened fig5 sweep.

use temporal_an::simulate::{figure_preset, run_experiment, Figure, Scheme};

fn main() -> temporal_an::Result<()> {
    for fig in [Figure::Fig1, Figure::Fig2, Figure::Fig3, Figure::Fig4, Figure::Fig5] {
        let p = figure_preset(fig);
        println!(
            "{fig}: axis {:?} over {} values, schemes {:?}, assumed {:?}",
            p.spec.sweep_axis,
            p.spec.sweep_values.len(),
            p.spec.schemes.iter().map(|s| s.name()).collect::<Vec<_>>(),
            p.assumed
        );
    }

    let mut spec = figure_preset(Figure::Fig5).spec;
    spec.trials = 50;
    spec.sweep_values = vec![2.0, 8.0, 12.0, 16.0];
    let out = run_experiment(&spec, 0)?;
    for row in out.rows.iter().filter(|r| r.scheme == Scheme::UnknownCsi) {
        let e = row.rates_bps.r_sec_joint;
        println!("L_B = {:>2}: {:>9.0} ± {:.0} bits/s", row.sweep_value.unwrap_or(f64::NAN), e.mean, e.stderr);
    }
    Ok(())
}
