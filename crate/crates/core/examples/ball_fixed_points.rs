//! Images of the unit ball: `ΠB = πB`, `ΘB = π²B`, `IB = πB` and
//! `ΓB = (3/8)B`, together with the Petty and Busemann–Petty equality
//! cases at the ball.
//!
//! Run with `cargo run --example ball_fixed_points`.

use std::f64::consts::PI;
use std::sync::Arc;

use zonal_bm::inequalities::{busemann_petty_ball_anchor, petty_ball_anchor};
use zonal_bm::operators::{apply_bm, apply_bm_ball, apply_radial, centroid_body};
use zonal_bm::{build_grid, BMHomomorphism, Polytope, RadialBMHomomorphism, Result, StarBody};

fn spread(samples: &[f64], target: f64) -> f64 {
    samples.iter().map(|x| (x - target).abs()).fold(0.0, f64::max)
}

fn main() -> Result<()> {
    let grid = Arc::new(build_grid(3, 24)?);

    let pi_ball = apply_bm_ball(&BMHomomorphism::projection(), &grid)?;
    println!("h(ΠB) = π         sup error {:.2e}  (analytic ball)", spread(pi_ball.samples(), PI));
    let hull_ball = Polytope::ball_approximant(&build_grid(3, 12)?)?;
    let pi_hull = apply_bm(&BMHomomorphism::projection(), &hull_ball, &grid)?;
    println!("h(ΠB) = π         sup error {:.2e}  (hull approximant of B)", spread(pi_hull.samples(), PI));

    let theta_ball = apply_bm_ball(&BMHomomorphism::theta(), &grid)?;
    println!("h(ΘB) = π²        sup error {:.2e}", spread(theta_ball.samples(), PI * PI));

    let ball = StarBody::ball(grid.clone(), 1.0)?;
    let ib = apply_radial(&RadialBMHomomorphism::intersection(), &ball)?;
    println!("ρ(IB) = π         sup error {:.2e}", spread(ib.samples(), PI));

    let gamma = centroid_body(&ball)?;
    println!("h(ΓB) = 3/8       sup error {:.2e}", spread(gamma.samples(), 3.0 / 8.0));

    for a in [petty_ball_anchor(&grid)?, busemann_petty_ball_anchor(&grid)?] {
        println!("{:20} computed {:.9} expected {:.9} (|Δ| = {:.1e})", a.name, a.computed, a.expected, a.abs_error);
    }
    Ok(())
}
