//! Water-filling, AN power for known and unknown Eve CSI, and the
//! secrecy-rate data allocation on a toy four-subchannel link.

use temporal_an::allocation::{
    an_power_known_csi, an_power_unknown_csi_structured, capacity_objective, data_power_secrecy, secrecy_objective,
    water_fill_with_level, PowerBudget,
};

fn main() -> temporal_an::Result<()> {
    let budget = PowerBudget::new(8.0, 0.6)?;
    let bob = [2.0, 1.0, 0.5, 0.1];
    let eve = [0.2, 0.9, 0.6, 0.05];

    let (p, level) = water_fill_with_level(&bob, budget.data())?;
    println!("water level {level:.4}, powers {p:.4?}, capacity {:.4} bits", capacity_objective(&bob, &p));

    let sec = data_power_secrecy(&bob, &eve, budget.data())?;
    println!(
        "secrecy powers {:.4?}, mu {:.4}, secrecy {:.4} bits ({} bisection steps)",
        sec.powers,
        sec.multiplier,
        secrecy_objective(&bob, &eve, &sec.powers),
        sec.trace.len()
    );

    let singular_values = [1.3, 0.8, 0.2, 0.0, 0.0];
    println!("AN, Eve CSI known:   {:.4?}", an_power_known_csi(&singular_values, 3, budget.an())?);
    println!("AN, Eve CSI unknown: {:.4?}", an_power_unknown_csi_structured(3, 5, budget.an()));
    Ok(())
}
