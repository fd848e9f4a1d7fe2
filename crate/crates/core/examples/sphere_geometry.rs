//! Extracts |H| of geodesic spheres in CP^2 at three resolutions and compares
//! the centre node with the extrapolated radius table.

use std::f64::consts::FRAC_PI_4;

use cpflow::immersion::{build_geodesic_sphere, mean_curvature_norms};
use cpflow::oracles::{error_order, RadiusTable, TableSpec};

fn main() -> cpflow::Result<()> {
    let table = RadiusTable::build(TableSpec::new(2))?;
    for r in [0.3, FRAC_PI_4, 1.0] {
        let reference = table.mean_norm_at(r)?;
        let mut errors = Vec::new();
        for res in [12, 24, 48] {
            let im = build_geodesic_sphere(2, r, res)?;
            let norms = mean_curvature_norms(&im)?;
            let worst = norms.iter().map(|h| (h - reference).abs()).fold(0.0, f64::max) / reference;
            println!("r={r:.4} res={res:>2}  reference |H|={reference:.10}  max rel error {worst:.3e}");
            errors.push(worst);
        }
        println!("  observed order {:?}\n", error_order(errors[0], errors[1], errors[2]));
    }
    Ok(())
}
