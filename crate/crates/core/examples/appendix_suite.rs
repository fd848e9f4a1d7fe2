//! Checks the pinching function inequalities on the default grid and prints
//! the largest passing eps for every dimension.

use cpflow::pinching::{verify_appendix, AppendixConfig};

fn main() -> cpflow::Result<()> {
    let report = verify_appendix(&AppendixConfig::default())?;
    println!("{:>4}  {:>12}  {}", "n", "largest eps", "downward closed");
    for v in &report.eps_verdicts {
        let eps = v.largest_passing_eps.map_or("none".to_string(), |e| format!("{e:e}"));
        println!("{:>4}  {:>12}  {}", v.n, eps, v.downward_closed);
    }
    println!();
    for c in report.closed_forms.iter().filter(|c| c.eps.is_none()).take(8) {
        println!("{:<28} n={:<3} computed {:+.15e} expected {:+.15e}", c.check, c.n, c.computed, c.expected);
    }
    let tightest = report
        .inequalities
        .iter()
        .filter(|r| r.pass)
        .min_by(|a, b| a.min_slack.total_cmp(&b.min_slack))
        .expect("at least one inequality");
    println!(
        "\ntightest passing check: {} (n={}) slack {:.3e} at x={:.3e}",
        tightest.inequality, tightest.n, tightest.min_slack, tightest.argmin_x
    );
    println!("all pass: {}", report.all_pass);
    Ok(())
}
