//! Sweeps the data-power fraction and writes the table to stdout as CSV.

use temporal_an::config::ResolvedSpec;
use temporal_an::output::{table_rows, write_csv};
use temporal_an::simulate::run_experiment;

fn main() -> temporal_an::Result<()> {
    let mut resolved = ResolvedSpec::defaults();
    resolved.apply_overrides(&[
        "sweep_axis=alpha",
        "sweep_values=0.2,0.5,0.8",
        "schemes=unknown-csi,known-csi-two-stage",
        "trials=100",
        "seed=5",
    ])?;
    let out = run_experiment(&resolved.spec, 0)?;
    write_csv(std::io::stdout().lock(), &table_rows(&resolved.spec, &out))
}
