//! Flows a geodesic sphere in CP^2 until it collapses to a round point and
//! compares its mean radius with the ODE reference along the way.

use cpflow::flow::{run, FlowConfig};
use cpflow::immersion::build_geodesic_sphere;
use cpflow::oracles::{sphere_radius_reference, RadiusTable, TableSpec};

fn main() -> cpflow::Result<()> {
    let (r0, res) = (0.6, 12);
    let cfg = FlowConfig {
        monitor_every: 10,
        center: Some(vec![[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]]),
        ..Default::default()
    };
    let out = run(&build_geodesic_sphere(2, r0, res)?, &cfg)?;
    let table = RadiusTable::build(TableSpec::new(2))?;
    let resolved: Vec<_> = out
        .trajectory
        .iter()
        .filter(|r| r.mean_radius.is_some_and(|x| x > table.radii[0]))
        .collect();
    let times: Vec<f64> = resolved.iter().map(|r| r.t).collect();
    let reference = sphere_radius_reference(&table, r0, &times, table.radii[0])?;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10} {:>8}", "step", "t", "radius", "ode", "max|h|^2", "ratio");
    for (rec, r_ode) in resolved.iter().zip(&reference.r).step_by(10) {
        println!(
            "{:>6} {:>10.6} {:>10.6} {:>10.6} {:>10.3e} {:>8.5}",
            rec.step,
            rec.t,
            rec.mean_radius.unwrap(),
            r_ode,
            rec.max_h2,
            rec.mean_ratio
        );
    }
    println!("\nclassification {:?} ({:?}) at t = {:.6}", out.classification, out.stop, out.final_state.t);
    Ok(())
}
