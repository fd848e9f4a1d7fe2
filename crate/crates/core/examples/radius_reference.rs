//! Integrates the radius ODE of a shrinking geodesic sphere in CP^2 and prints
//! the trajectory and extinction time.

use cpflow::oracles::{sphere_radius_reference, RadiusTable, TableSpec};

fn main() -> cpflow::Result<()> {
    let table = RadiusTable::build(TableSpec::new(2))?;
    let r0 = 0.6;
    let t_grid: Vec<f64> = (0..=14).map(|k| 0.005 * k as f64).collect();
    let traj = sphere_radius_reference(&table, r0, &t_grid, 0.1)?;
    println!("{:>8}  {:>12}  {:>12}", "t", "r(t)", "dr/dt");
    for (t, r) in traj.t.iter().zip(&traj.r) {
        println!("{t:>8.4}  {r:>12.8}  {:>12.6}", table.speed_at(*r)?);
    }
    println!("\nr = 0.1 reached at t = {:?}", traj.exit_time);
    println!("accepted {} / rejected {} steps", traj.accepted_steps, traj.rejected_steps);
    Ok(())
}
