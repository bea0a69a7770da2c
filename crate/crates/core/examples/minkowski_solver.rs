//! Reconstructing polytopes from their surface area measures.
//!
//! Run with `cargo run --example minkowski_solver`.

use zonal_bm::bodies::random_polytope;
use zonal_bm::measures::surface_area_measure;
use zonal_bm::minkowski_solver::{solve_minkowski_detailed, MinkowskiProblem};
use zonal_bm::{AtomicMeasure, Result};

fn main() -> Result<()> {
    // six atoms ±e_j of mass 4: the cube [−1, 1]³
    let atoms = (0..3)
        .flat_map(|j| {
            [1.0, -1.0].map(|s| {
                let mut u = [0.0; 3];
                u[j] = s;
                (u, 4.0)
            })
        })
        .collect();
    let sol = solve_minkowski_detailed(&MinkowskiProblem::new(AtomicMeasure::new(3, atoms)?))?;
    println!(
        "cube from its facet areas: {} iterations, residual {:.1e}, volume {:.12}",
        sol.iterations,
        sol.residual,
        sol.polytope.volume()
    );

    for seed in 0..5 {
        let p = random_polytope(seed, 10 + seed as usize)?;
        let sol = solve_minkowski_detailed(&MinkowskiProblem::new(surface_area_measure(&p)))?;
        let target = p.steiner_centered()?;
        let err = target
            .vertices()
            .iter()
            .chain(sol.polytope.vertices())
            .map(|&u| {
                let n = (u[0] * u[0] + u[1] * u[1] + u[2] * u[2]).sqrt();
                let u = [u[0] / n, u[1] / n, u[2] / n];
                (target.support(u) - sol.polytope.support(u)).abs()
            })
            .fold(0.0, f64::max);
        println!(
            "random polytope {seed}: {:2} facets, {:2} iterations, support error after Steiner centering {:.1e}",
            p.facets().len(),
            sol.iterations,
            err
        );
    }

    // invalid data is rejected with a named reason
    let lopsided = AtomicMeasure::new(3, vec![([1.0, 0.0, 0.0], 1.0), ([0.0, 1.0, 0.0], 1.0), ([0.0, 0.0, 1.0], 1.0)])?;
    match solve_minkowski_detailed(&MinkowskiProblem::new(lopsided)) {
        Err(e) => println!("non-centred data: {e}"),
        Ok(_) => unreachable!("the centroid condition fails"),
    }
    Ok(())
}
