//! Blaschke–Minkowski homomorphisms and their radial counterparts.
//!
//! A Blaschke–Minkowski homomorphism `Φ` is determined by a zonal generating
//! function `g`; on polytopes `h(ΦK, ·) = S₂(K, ·) ∗ g` is an exact finite sum.
//! A radial homomorphism `Ψ` is determined by a zonal measure `μ` (density
//! plus an optional equator atom) and acts by `ρ(ΨL, ·) = ρ²(L, ·) ∗ μ`.

use std::sync::Arc;

use crate::bodies::{polar, Polytope, RadialFn, StarBody, SupportBody};
use crate::error::{GeomError, Result};
use crate::measures::{ball_measure, mixed_surface_area_measure, surface_area_measure, AtomicMeasure, MixedArg};
use crate::sphere::{convolve_at, great_sphere_mean, kappa, KernelKind, PoleRule, SphericalGrid, ZonalKernel};
use crate::vec3::{self, Vec3};
use crate::volumes::volume_star;

/// Trapezoid points on each great circle for equator-atom convolutions.
pub const CIRCLE_POINTS: usize = 128;

/// A Blaschke–Minkowski homomorphism given by its generating kernel.
#[derive(Debug, Clone)]
pub struct BMHomomorphism {
    pub kernel: ZonalKernel,
}

impl BMHomomorphism {
    /// `Π`: `ğ(t) = |t|/2`.
    pub fn projection() -> Self {
        BMHomomorphism { kernel: ZonalKernel::projection() }
    }

    /// `Θ`: `ğ(t) = √(1 − t²)`, the support function of the equatorial unit disc.
    pub fn theta() -> Self {
        BMHomomorphism { kernel: ZonalKernel::sine() }
    }

    pub fn from_kernel(kernel: ZonalKernel) -> Result<Self> {
        if kernel.equator_atom != 0.0 {
            return Err(GeomError::OperatorRejected(
                "a Blaschke–Minkowski generating function cannot carry an equator atom".into(),
            ));
        }
        Ok(BMHomomorphism { kernel })
    }

    pub fn name(&self) -> &str {
        &self.kernel.name
    }

    pub fn is_even(&self) -> bool {
        self.kernel.even
    }

    pub fn is_support(&self) -> bool {
        self.kernel.is_support
    }

    /// `r_Φ = ∫ g dv`, the radius of `ΦB`.
    pub fn radius(&self) -> f64 {
        self.kernel.sphere_integral()
    }

    /// The polar theorems and `M_Φ` need an even kernel that is a support function.
    pub fn require_polar_capable(&self) -> Result<()> {
        if !self.is_even() || !self.is_support() {
            return Err(GeomError::OperatorRejected(format!(
                "operator '{}' must be even with a support-function generator (even={}, is_support={})",
                self.name(),
                self.is_even(),
                self.is_support()
            )));
        }
        Ok(())
    }
}

/// `h = μ ∗ g` for an arbitrary surface-type measure.
pub fn apply_bm_measure(phi: &BMHomomorphism, mu: AtomicMeasure, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    SupportBody::from_zonal(grid.clone(), mu, phi.kernel.clone())
}

/// `ΦK` with `h(ΦK, ·) = S₂(K, ·) ∗ g`.
pub fn apply_bm(phi: &BMHomomorphism, k: &Polytope, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    apply_bm_measure(phi, surface_area_measure(k), grid)
}

/// `Φ(K₁, K₂)` with `h = S(K₁, K₂, ·) ∗ g`.
pub fn apply_bm_mixed(phi: &BMHomomorphism, args: &[MixedArg<'_>], grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    apply_bm_measure(phi, mixed_surface_area_measure(args)?, grid)
}

/// `Φ_i(K, L) = Φ(K, …, K, L, …, L)` with `i` copies of `L` (`0 ≤ i ≤ 1` for n = 3).
pub fn phi_i(phi: &BMHomomorphism, k: &Polytope, l: MixedArg<'_>, i: usize, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    match i {
        0 => apply_bm(phi, k, grid),
        1 => apply_bm_mixed(phi, &[MixedArg::Polytope(k), l], grid),
        _ => Err(GeomError::InvalidArgument(format!("mixed operator index {i} outside 0..=1"))),
    }
}

/// `Φ_i K = Φ_i(K, B)`; `i = 2` gives the ball `Φ(B, B) = r_Φ B`.
pub fn phi_ball(phi: &BMHomomorphism, k: &Polytope, i: usize, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    match i {
        0 | 1 => phi_i(phi, k, MixedArg::Ball(grid), i, grid),
        2 => apply_bm_measure(phi, ball_measure(grid)?, grid),
        _ => Err(GeomError::InvalidArgument(format!("mixed operator index {i} outside 0..=2"))),
    }
}

pub fn projection_body(k: &Polytope, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    apply_bm(&BMHomomorphism::projection(), k, grid)
}

pub fn theta_body(k: &Polytope, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    apply_bm(&BMHomomorphism::theta(), k, grid)
}

/// `ΠK` as an explicit zonotope: the Minkowski sum of the segments `[−a n/2, a n/2]`.
pub fn projection_zonotope(k: &Polytope) -> Result<Polytope> {
    let mu = surface_area_measure(k);
    let mut pts: Vec<Vec3> = vec![[0.0; 3]];
    for a in mu.atoms() {
        let g = vec3::scale(a.dir, 0.5 * a.weight);
        let mut next = Vec::with_capacity(pts.len() * 2);
        for p in &pts {
            next.push(vec3::add(*p, g));
            next.push(vec3::sub(*p, g));
        }
        pts = match Polytope::from_points(&next) {
            Ok(p) => p.vertices().to_vec(),
            Err(GeomError::Degenerate(_)) => dedup_points(next),
            Err(e) => return Err(e),
        };
    }
    Polytope::from_points(&pts)
}

fn dedup_points(mut pts: Vec<Vec3>) -> Vec<Vec3> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup_by(|a, b| vec3::norm(vec3::sub(*a, *b)) < 1e-12);
    pts
}

/// `h(ΦB, ·)` through pole-aligned quadrature of the constant field (no ball approximant).
pub fn apply_bm_ball(phi: &BMHomomorphism, grid: &Arc<SphericalGrid>) -> Result<SupportBody> {
    let kernel = phi.kernel.clone();
    SupportBody::from_fn(grid.clone(), Arc::new(move |u| convolve_at(&|_| 1.0, &kernel, u, PoleRule::default())))
}

/// A radial Blaschke–Minkowski homomorphism: a nonnegative zonal measure.
#[derive(Debug, Clone)]
pub struct RadialBMHomomorphism {
    pub kernel: ZonalKernel,
    pub rule: PoleRule,
    pub circle_points: usize,
}

impl RadialBMHomomorphism {
    /// The intersection body operator: the equator measure of total mass `κ₂ = π`.
    pub fn intersection() -> Self {
        RadialBMHomomorphism { kernel: ZonalKernel::equator(kappa(2)), rule: PoleRule::default(), circle_points: CIRCLE_POINTS }
    }

    pub fn from_kernel(kernel: ZonalKernel) -> Result<Self> {
        if kernel.equator_atom < 0.0 || (0..=400).any(|k| kernel.has_density() && kernel.eval(-1.0 + k as f64 / 200.0) < 0.0) {
            return Err(GeomError::OperatorRejected("radial operator measure must be nonnegative".into()));
        }
        let psi = RadialBMHomomorphism { kernel, rule: PoleRule::default(), circle_points: CIRCLE_POINTS };
        if !(psi.radius() > 0.0) {
            return Err(GeomError::OperatorRejected("trivial radial operator (zero measure)".into()));
        }
        Ok(psi)
    }

    pub fn name(&self) -> &str {
        &self.kernel.name
    }

    /// `r_Ψ`: radius of `ΨB`, the total mass of the measure.
    pub fn radius(&self) -> f64 {
        self.kernel.sphere_integral()
    }

    /// `(f ∗ μ)(u)` for a field `f` on the sphere.
    pub fn convolve(&self, f: &dyn Fn(Vec3) -> f64, u: Vec3) -> f64 {
        let mut v = 0.0;
        if self.kernel.has_density() {
            v += convolve_at(f, &self.kernel, u, self.rule);
        }
        if self.kernel.equator_atom != 0.0 {
            v += self.kernel.equator_atom
                * great_sphere_mean(f, u, self.circle_points).expect("circle resolution checked at construction");
        }
        v
    }

    fn image(&self, grid: &Arc<SphericalGrid>, field: RadialFn) -> Result<StarBody> {
        let psi = self.clone();
        StarBody::from_fn(grid.clone(), Arc::new(move |u| psi.convolve(&|v| field(v), u)))
    }
}

fn star_field(l: &StarBody) -> RadialFn {
    match l.radial_fn() {
        Some(f) => f.clone(),
        None => {
            let l = l.clone();
            Arc::new(move |u| l.eval(u))
        }
    }
}

/// `ΨL`: `ρ(ΨL, ·) = ρ²(L, ·) ∗ μ`.
pub fn apply_radial(psi: &RadialBMHomomorphism, l: &StarBody) -> Result<StarBody> {
    let f = star_field(l);
    psi.image(l.grid(), Arc::new(move |u| f(u).powi(2)))
}

/// `Ψ(L₁, L₂)`: `ρ = (ρ₁ρ₂) ∗ μ`.
pub fn apply_radial_mixed(psi: &RadialBMHomomorphism, l1: &StarBody, l2: &StarBody) -> Result<StarBody> {
    if !l1.grid().same_as(l2.grid()) {
        return Err(GeomError::GridMismatch);
    }
    let (f, g) = (star_field(l1), star_field(l2));
    psi.image(l1.grid(), Arc::new(move |u| f(u) * g(u)))
}

/// `Ψ_i L = Ψ(L[2−i], B[i])`.
pub fn psi_ball(psi: &RadialBMHomomorphism, l: &StarBody, i: usize) -> Result<StarBody> {
    match i {
        0 => apply_radial(psi, l),
        1 => {
            let f = star_field(l);
            psi.image(l.grid(), f)
        }
        2 => psi.image(l.grid(), Arc::new(|_| 1.0)),
        _ => Err(GeomError::InvalidArgument(format!("mixed operator index {i} outside 0..=2"))),
    }
}

/// The intersection body `IL`.
pub fn intersection_body(l: &StarBody) -> Result<StarBody> {
    apply_radial(&RadialBMHomomorphism::intersection(), l)
}

/// `h(M_Φ L, u) = ∫ ρ⁴(L, v) ğ(u·v) dv` at a single direction.
pub fn m_phi_eval(phi: &BMHomomorphism, l: &StarBody, u: Vec3) -> f64 {
    let f = star_field(l);
    convolve_at(&|v| f(v).powi(4), &phi.kernel, u, PoleRule::default())
}

/// `M_Φ L` for a support-type generator.
pub fn m_phi(phi: &BMHomomorphism, l: &StarBody) -> Result<SupportBody> {
    if !phi.is_support() {
        return Err(GeomError::OperatorRejected(format!(
            "M_Φ needs a generating function that is a support function; '{}' is not",
            phi.name()
        )));
    }
    let (phi, f) = (phi.clone(), star_field(l));
    SupportBody::from_fn(
        l.grid().clone(),
        Arc::new(move |u| convolve_at(&|v| f(v).powi(4), &phi.kernel, u, PoleRule::default())),
    )
}

/// The centroid body `ΓL`: `h(ΓL, u) = (1/(4V(L))) ∫ ρ⁴(L, v) |u·v| dv`.
pub fn centroid_body(l: &StarBody) -> Result<SupportBody> {
    let v = volume_star(l);
    if !(v > 0.0) {
        return Err(GeomError::Degenerate("star body has zero volume".into()));
    }
    // M_Π uses |t|/2, so Γ = M_Π / (2V).
    m_phi(&BMHomomorphism::projection(), l)?.dilate(1.0 / (2.0 * v))
}

/// `Φ*(K₁, K₂)` with `ρ = 1/h(Φ(K₁, K₂), ·)`.
pub fn polar_phi(phi: &BMHomomorphism, args: &[MixedArg<'_>], grid: &Arc<SphericalGrid>) -> Result<StarBody> {
    let img = match args {
        [MixedArg::Polytope(k)] => apply_bm(phi, k, grid)?,
        _ => apply_bm_mixed(phi, args, grid)?,
    };
    polar(&img)
}

/// Whether the operator's kernel is one of the built-in named ones.
pub fn is_builtin(kernel: &ZonalKernel) -> bool {
    matches!(kernel.kind, KernelKind::Projection | KernelKind::Sine | KernelKind::Equator)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::{random_polytope, random_rotation, random_star_body, random_unit};
    use crate::sphere::build_grid;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::PI;

    fn grid(r: usize) -> Arc<SphericalGrid> {
        Arc::new(build_grid(3, r).unwrap())
    }

    #[test]
    fn projection_of_cube() {
        let g = grid(8);
        let c = Polytope::cube(1.0).unwrap();
        let pi = projection_body(&c, &g).unwrap();
        for (i, u) in g.nodes3().enumerate() {
            let want = 4.0 * (u[0].abs() + u[1].abs() + u[2].abs());
            assert!((pi.samples()[i] - want).abs() < 1e-12);
        }
        let z = projection_zonotope(&c).unwrap();
        assert!((z.volume() - 512.0).abs() < 1e-9);
    }

    #[test]
    fn translation_invariance() {
        let g = grid(6);
        let p = random_polytope(3, 12).unwrap();
        let a = projection_body(&p, &g).unwrap();
        let b = projection_body(&p.translate([0.3, -2.0, 1.0]).unwrap(), &g).unwrap();
        assert!(a.samples().iter().zip(b.samples()).all(|(x, y)| (x - y).abs() < 1e-12));
    }

    #[test]
    fn ball_images() {
        let g = grid(16);
        let phi = BMHomomorphism::projection();
        assert!((phi.radius() - PI).abs() < 1e-12);
        assert!((BMHomomorphism::theta().radius() - PI * PI).abs() < 1e-9);
        let analytic = apply_bm_ball(&phi, &g).unwrap();
        assert!(analytic.samples().iter().all(|h| (h - PI).abs() < 1e-6));
        let bp = Polytope::ball_approximant(&g).unwrap();
        let img = projection_body(&bp, &g).unwrap();
        assert!(img.samples().iter().all(|h| (h - PI).abs() < 2e-2));
    }

    #[test]
    fn rotation_intertwining_atomic() {
        let g = grid(6);
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let p = random_polytope(5, 14).unwrap();
        let r = random_rotation(&mut rng);
        let a = projection_body(&p.rotate(&r).unwrap(), &g).unwrap();
        let b = projection_body(&p, &g).unwrap();
        let rt = vec3::transpose(&r);
        for (i, u) in g.nodes3().enumerate() {
            assert!((a.samples()[i] - b.eval(vec3::mat_vec(&rt, u))).abs() < 1e-9);
        }
    }

    #[test]
    fn intersection_of_balls() {
        let g = grid(4);
        let i1 = intersection_body(&StarBody::ball(g.clone(), 1.0).unwrap()).unwrap();
        assert!(i1.samples().iter().all(|r| (r - PI).abs() < 1e-9));
        let i2 = intersection_body(&StarBody::ball(g.clone(), 2.0).unwrap()).unwrap();
        assert!(i2.samples().iter().all(|r| (r - 4.0 * PI).abs() < 1e-9));
        let psi = RadialBMHomomorphism::intersection();
        let m = apply_radial_mixed(&psi, &StarBody::ball(g.clone(), 1.0).unwrap(), &StarBody::ball(g, 2.0).unwrap()).unwrap();
        assert!(m.samples().iter().all(|r| (r - 2.0 * PI).abs() < 1e-9));
    }

    #[test]
    fn intersection_radial_additivity() {
        let g = grid(4);
        let k = random_star_body(g.clone(), 1, 3).unwrap();
        let l = random_star_body(g.clone(), 2, 3).unwrap();
        let s = crate::bodies::radial_blaschke_sum(&k, &l, 1.0, 1.0).unwrap();
        let lhs = intersection_body(&s).unwrap();
        let rhs = crate::bodies::radial_sum(&intersection_body(&k).unwrap(), &intersection_body(&l).unwrap(), 1.0, 1.0).unwrap();
        for (a, b) in lhs.samples().iter().zip(rhs.samples()) {
            assert!((a - b).abs() < 1e-6 * b);
        }
    }

    #[test]
    fn m_phi_and_centroid_of_ball() {
        let g = grid(4);
        let b = StarBody::ball(g.clone(), 1.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let u = random_unit(&mut rng);
        assert!((m_phi_eval(&BMHomomorphism::projection(), &b, u) - PI).abs() < 1e-6);
        assert!((m_phi_eval(&BMHomomorphism::theta(), &b, u) - PI * PI).abs() < 1e-3);
        let b2 = StarBody::ball(g.clone(), 2.0).unwrap();
        assert!((m_phi_eval(&BMHomomorphism::projection(), &b2, u) - 16.0 * PI).abs() < 1e-5);
        let gamma = centroid_body(&b).unwrap();
        assert!(gamma.samples().iter().all(|h| (h - 0.375).abs() < 1e-4));
        let gamma2 = centroid_body(&b2).unwrap();
        assert!(gamma2.samples().iter().all(|h| (h - 0.75).abs() < 1e-4));
        let odd = BMHomomorphism::from_kernel(ZonalKernel::new("odd", |t| t, true, false)).unwrap();
        assert!(m_phi(&odd, &b).is_err());
    }

    #[test]
    fn polar_projection_body() {
        let g = grid(24);
        let bp = Polytope::ball_approximant(&g).unwrap();
        let phi = BMHomomorphism::projection();
        let star = polar_phi(&phi, &[MixedArg::Polytope(&bp)], &g).unwrap();
        assert!((volume_star(&star) - 4.0 / (3.0 * PI * PI)).abs() < 1e-3);
        let c = Polytope::cube(1.0).unwrap();
        let pc = polar_phi(&phi, &[MixedArg::Polytope(&c)], &g).unwrap();
        let u = [0.6, 0.0, 0.8];
        assert!((pc.eval(u) - 1.0 / (4.0 * 1.4)).abs() < 1e-12);
    }

    #[test]
    fn steiner_point_of_mixed_images_is_origin() {
        let g = grid(6);
        let p = random_polytope(31, 10).unwrap().translate([1.0, 2.0, 0.5]).unwrap();
        let q = random_polytope(32, 11).unwrap();
        for phi in [BMHomomorphism::projection(), BMHomomorphism::theta()] {
            let img = apply_bm_mixed(&phi, &[MixedArg::Polytope(&p), MixedArg::Polytope(&q)], &g).unwrap();
            assert!(vec3::norm(img.steiner_point()) < 1e-8);
            assert!(vec3::norm(img.steiner_point_quadrature()) < 1e-8);
        }
    }
}
