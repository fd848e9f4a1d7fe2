//! Random search for counterexamples to the pointwise tensor inequalities.
//!
//! Usage: `falsify_catalog [samples]` (default 5000 per dimension pair).

use cpflow::oracles::{falsify_catalog, SampleSpec};

fn main() -> cpflow::Result<()> {
    let samples = std::env::args().nth(1).map_or(5000, |s| s.parse().expect("sample count"));
    let spec = SampleSpec { samples, ..Default::default() };
    let report = falsify_catalog(&spec)?;
    println!("{:<22} {:>3} {:>3} {:>14} {:>10}", "inequality", "n", "q", "min slack/scale", "confirmed");
    for r in &report.reports {
        println!(
            "{:<22} {:>3} {:>3} {:>14.3e} {:>10}",
            r.inequality.name(),
            r.n,
            r.q,
            r.min_normalized_slack,
            r.confirmed
        );
    }
    let worst_identity = report.reports.iter().filter_map(|r| r.max_relative_error).fold(0.0, f64::max);
    println!("\nlargest relative error of the R2 identity: {worst_identity:.3e}");
    println!("confirmed counterexamples: {}", report.counterexamples.len());
    Ok(())
}
