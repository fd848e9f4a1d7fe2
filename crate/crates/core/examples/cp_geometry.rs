//! Fubini-Study basics: distances, geodesic retraction and the range of
//! sectional curvatures in CP^3.

use cpflow::ambient::{apply_j, distance, normalize_point, project_to_tangent, retract, sectional_curvature, CVec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_vec(rng: &mut ChaCha8Rng, k: usize) -> CVec {
    CVec::from_fn(k, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

fn main() -> cpflow::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let p = normalize_point(random_vec(&mut rng, 4))?;
    let v = project_to_tangent(&p, &random_vec(&mut rng, 4))?;
    let unit = v.scale(1.0 / v.norm());
    for s in [0.25, 0.5, 1.0, 1.5] {
        let q = retract(&p, &unit, s)?;
        println!("geodesic at length {s:.2}: distance {:.12}", distance(&p, &q)?);
    }
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for _ in 0..2000 {
        let x = project_to_tangent(&p, &random_vec(&mut rng, 4))?;
        let y = project_to_tangent(&p, &random_vec(&mut rng, 4))?;
        let k = sectional_curvature(&x, &y)?;
        lo = lo.min(k);
        hi = hi.max(k);
    }
    println!("random planes: sectional curvature in [{lo:.4}, {hi:.4}]");
    println!("complex line: {:.12}", sectional_curvature(&unit, &apply_j(&unit))?);
    Ok(())
}
