//! Runs the quick invariant suite that backs `temporal-an validate`.

fn main() {
    let checks = temporal_an::validation::run_suite(true);
    for c in &checks {
        println!("{c}");
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    println!("{failed} of {} checks failed", checks.len());
}
