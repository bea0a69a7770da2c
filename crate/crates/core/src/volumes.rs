//! Volumes, mixed volumes, quermassintegrals, and dual mixed volumes (n = 3).

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::bodies::{minkowski_sum, Polytope, StarBody, SupportBody, SupportSource};
use crate::error::{GeomError, Result};
use crate::measures::{mixed_surface_area_measure, polytope_ball_measure, AtomicMeasure, MixedArg, ARC_NODES};
use crate::sphere::{build_grid, gauss_legendre_on, kappa, KernelKind, SphericalGrid, ZonalKernel};
use crate::vec3::{self, Vec3};

/// How a number was obtained, and hence how much error it may carry.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Rung {
    /// Exact polytope / atomic arithmetic.
    Exact,
    /// One spherical quadrature.
    Quadrature,
    /// Polytope approximant of a curved body, or a solver in the loop.
    Approximant,
}

impl Rung {
    pub fn tolerance(self) -> f64 {
        match self {
            Rung::Exact => 1e-9,
            Rung::Quadrature => 1e-6,
            Rung::Approximant => 1e-4,
        }
    }
}

/// A value together with the accuracy class of the path that produced it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: f64,
    pub rung: Rung,
}

impl Estimate {
    pub fn new(value: f64, rung: Rung) -> Self {
        Estimate { value, rung }
    }
}

/// Resolution of the direction grid used for circumscribed-polytope approximants.
pub const APPROX_RESOLUTION: usize = 40;

pub fn volume(p: &Polytope) -> f64 {
    p.volume()
}

/// `V(L) = (1/3) ∫ ρ³ du`.
pub fn volume_star(l: &StarBody) -> f64 {
    integrate_nodes(l.grid(), |i| l.samples()[i].powi(3)) / 3.0
}

fn integrate_nodes(grid: &SphericalGrid, f: impl Fn(usize) -> f64) -> f64 {
    grid.weights().iter().enumerate().map(|(i, w)| w * f(i)).sum()
}

/// `V(K₁, K₂, K₃)` by polarization over the seven subset sums.
pub fn mixed_volume(k1: &Polytope, k2: &Polytope, k3: &Polytope) -> Result<f64> {
    let ((s12, s13), (s23, s123)) = rayon::join(
        || (minkowski_sum(k1, k2, 1.0, 1.0), minkowski_sum(k1, k3, 1.0, 1.0)),
        || {
            let s23 = minkowski_sum(k2, k3, 1.0, 1.0);
            let s123 = s23.as_ref().ok().map(|s| minkowski_sum(s, k1, 1.0, 1.0));
            (s23, s123)
        },
    );
    let s123 = s123.unwrap_or_else(|| Err(GeomError::Degenerate("subset sum failed".into())))?;
    let v = s123.volume() - s12?.volume() - s13?.volume() - s23?.volume() + k1.volume() + k2.volume() + k3.volume();
    Ok(v / 6.0)
}

/// `V(K₁, K₂, Q) = (1/3) ∫ h_Q dS(K₁, K₂)`.
pub fn mixed_volume_via_measure(k1: &Polytope, k2: &Polytope, q: &Polytope) -> Result<f64> {
    let s = mixed_surface_area_measure(&[MixedArg::Polytope(k1), MixedArg::Polytope(k2)])?;
    Ok(s.integrate(|u| q.support(u)) / 3.0)
}

/// Exact quermassintegral `W_i(P)` of a polytope.
///
/// `W₀ = V`, `W₁ = S/3`, `W₂ = (1/6) Σ ℓ_e θ_e`, `W₃ = κ₃`.
pub fn quermassintegral(p: &Polytope, i: usize) -> Result<f64> {
    match i {
        0 => Ok(p.volume()),
        1 => Ok(p.surface_area() / 3.0),
        2 => Ok(p.edge_curvature() / 6.0),
        3 => Ok(kappa(3)),
        _ => Err(GeomError::InvalidArgument(format!("quermassintegral index {i} outside 0..=3"))),
    }
}

/// `W_i(P)` through mixed volumes with a ball approximant in the ball slots.
pub fn quermassintegral_with_ball(p: &Polytope, i: usize, ball: &Polytope) -> Result<f64> {
    match i {
        0 => Ok(p.volume()),
        1 => mixed_volume(p, p, ball),
        2 => mixed_volume(p, ball, ball),
        3 => Ok(ball.volume()),
        _ => Err(GeomError::InvalidArgument(format!("quermassintegral index {i} outside 0..=3"))),
    }
}

/// `W_i(K, L) = V(K[2−i], B[i], L)` for polytopes, exact.
pub fn w_i_pair(k: &Polytope, l: &Polytope, i: usize) -> Result<f64> {
    match i {
        0 => Ok(k.facets().iter().map(|f| f.area * l.support(f.normal)).sum::<f64>() / 3.0),
        1 => {
            let s = minkowski_sum(k, l, 1.0, 1.0)?;
            Ok((quermassintegral(&s, 1)? - quermassintegral(k, 1)? - quermassintegral(l, 1)?) / 2.0)
        }
        2 => quermassintegral(l, 2),
        _ => Err(GeomError::InvalidArgument(format!("mixed quermassintegral index {i} outside 0..=2"))),
    }
}

/// `W_i(K, Q) = (1/3) ∫ h_Q dS_i(K)` for a polytope `K` and a support body `Q`,
/// using `Q`'s exact evaluation at the atoms of `S_i(K)`.
pub fn w_i_support(k: &Polytope, q: &SupportBody, i: usize) -> Result<Estimate> {
    match i {
        0 => Ok(Estimate::new(k.facets().iter().map(|f| f.area * q.eval(f.normal)).sum::<f64>() / 3.0, Rung::Exact)),
        1 => {
            let s = polytope_ball_measure(k, ARC_NODES);
            Ok(Estimate::new(s.integrate(|u| q.eval(u)) / 3.0, Rung::Quadrature))
        }
        2 => support_mean_width(q),
        _ => Err(GeomError::InvalidArgument(format!("mixed quermassintegral index {i} outside 0..=2"))),
    }
}

/// `W₂(Q) = (1/3) ∫ h_Q`: closed form for polytopes and zonal bodies
/// (`r_g · mass / 3`), grid quadrature otherwise.
pub fn support_mean_width(q: &SupportBody) -> Result<Estimate> {
    match q.source() {
        SupportSource::Polytope(p) => Ok(Estimate::new(quermassintegral(p, 2)?, Rung::Exact)),
        SupportSource::Zonal { measure, kernel } => {
            Ok(Estimate::new(kernel.sphere_integral() * measure.mass() / 3.0, Rung::Exact))
        }
        _ => Ok(Estimate::new(mean_width_quadrature(q), Rung::Quadrature)),
    }
}

/// Generators `a·n` of the zonotope with support function `½ Σ a |u·n|`,
/// with antipodal and parallel atoms combined.
fn zonotope_generators(mu: &AtomicMeasure) -> Vec<Vec3> {
    let mut gens: Vec<Vec3> = Vec::with_capacity(mu.len());
    for a in mu.atoms() {
        if a.weight <= 0.0 {
            continue;
        }
        match gens.iter_mut().find(|g| {
            let gn = vec3::normalize(**g).unwrap();
            vec3::norm(vec3::cross(gn, a.dir)) < 1e-12
        }) {
            Some(g) => {
                let s = if vec3::dot(*g, a.dir) >= 0.0 { 1.0 } else { -1.0 };
                *g = vec3::add(*g, vec3::scale(a.dir, s * a.weight));
            }
            None => gens.push(vec3::scale(a.dir, a.weight)),
        }
    }
    gens
}

/// Volume of the zonotope `Σ [−g/2, g/2]`: `Σ_{i<j<k} |det(g_i, g_j, g_k)|`.
pub fn zonotope_volume(mu: &AtomicMeasure) -> f64 {
    let g = zonotope_generators(mu);
    let m = g.len();
    let mut v = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            let c = vec3::cross(g[i], g[j]);
            for gk in &g[j + 1..] {
                v += vec3::dot(c, *gk).abs();
            }
        }
    }
    v
}

/// Surface area of the zonotope: `2 Σ_{i<j} |g_i × g_j|`.
pub fn zonotope_surface_area(mu: &AtomicMeasure) -> f64 {
    let g = zonotope_generators(mu);
    let mut s = 0.0;
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            s += vec3::norm(vec3::cross(g[i], g[j]));
        }
    }
    2.0 * s
}

/// Circumscribed polytope of a support body over the directions of a fine grid,
/// plus the atom directions of zonal images (where flat faces sit).
pub fn circumscribed_polytope(q: &SupportBody, resolution: usize) -> Result<Polytope> {
    let grid = build_grid(3, resolution)?;
    let mut dirs: Vec<Vec3> = grid.nodes3().collect();
    if let SupportSource::Zonal { measure, .. } = q.source() {
        for a in measure.atoms() {
            dirs.push(a.dir);
            dirs.push(vec3::scale(a.dir, -1.0));
        }
    }
    crate::bodies::halfspace_polytope(dirs.into_iter().map(|u| (u, q.eval(u))))
}

/// `W_i(Q)` for a support body, choosing the most exact available route.
pub fn support_quermassintegral(q: &SupportBody, i: usize) -> Result<Estimate> {
    support_quermassintegral_at(q, i, APPROX_RESOLUTION)
}

pub fn support_quermassintegral_at(q: &SupportBody, i: usize, resolution: usize) -> Result<Estimate> {
    if i > 3 {
        return Err(GeomError::InvalidArgument(format!("quermassintegral index {i} outside 0..=3")));
    }
    Ok(support_quermassintegrals_at(q, resolution)?[i])
}

/// `[W₀, W₁, W₂, W₃]` of a support body, sharing one approximant between
/// the entries that need it.
pub fn support_quermassintegrals(q: &SupportBody) -> Result<[Estimate; 4]> {
    support_quermassintegrals_at(q, APPROX_RESOLUTION)
}

pub fn support_quermassintegrals_at(q: &SupportBody, resolution: usize) -> Result<[Estimate; 4]> {
    let ball = Estimate::new(kappa(3), Rung::Exact);
    let exact = |w: [f64; 3]| [Estimate::new(w[0], Rung::Exact), Estimate::new(w[1], Rung::Exact), Estimate::new(w[2], Rung::Exact), ball];
    match q.source() {
        SupportSource::Polytope(p) => {
            Ok(exact([quermassintegral(p, 0)?, quermassintegral(p, 1)?, quermassintegral(p, 2)?]))
        }
        SupportSource::Zonal { measure, kernel } => {
            let w2 = kernel.sphere_integral() * measure.mass() / 3.0;
            if kernel.kind == KernelKind::Projection {
                return Ok(exact([zonotope_volume(measure), zonotope_surface_area(measure) / 3.0, w2]));
            }
            let [w0, w1, _] = extrapolated_quermassintegrals(q, resolution)?;
            Ok([Estimate::new(w0, Rung::Approximant), Estimate::new(w1, Rung::Approximant), Estimate::new(w2, Rung::Exact), ball])
        }
        SupportSource::Sampled | SupportSource::Function(_) => {
            let [w0, w1, _] = extrapolated_quermassintegrals(q, resolution)?;
            Ok([
                Estimate::new(w0, Rung::Approximant),
                Estimate::new(w1, Rung::Approximant),
                Estimate::new(mean_width_quadrature(q), Rung::Quadrature),
                ball,
            ])
        }
    }
}

/// Richardson extrapolation of circumscribed-polytope quermassintegrals at
/// `resolution / 2` and `resolution`, whose error decays quadratically in
/// the grid spacing.
fn extrapolated_quermassintegrals(q: &SupportBody, resolution: usize) -> Result<[f64; 3]> {
    let coarse = approximant_quermassintegrals(q, (resolution / 2).max(1))?;
    let fine = approximant_quermassintegrals(q, resolution)?;
    Ok([0, 1, 2].map(|i| (4.0 * fine[i] - coarse[i]) / 3.0))
}

/// `[W₀, W₁, W₂]` of the circumscribed polytope of [`circumscribed_polytope`].
pub fn approximant_quermassintegrals(q: &SupportBody, resolution: usize) -> Result<[f64; 3]> {
    let grid = build_grid(3, resolution)?;
    let mut halfspaces: Vec<(Vec3, f64)> = grid.nodes3().map(|u| (u, q.eval(u))).collect();
    if let SupportSource::Zonal { measure, .. } = q.source() {
        for a in measure.atoms() {
            for u in [a.dir, vec3::scale(a.dir, -1.0)] {
                halfspaces.push((u, q.eval(u)));
            }
        }
    }
    halfspace_quermassintegrals(&halfspaces)
}

/// `[W₀, W₁, W₂]` of `∩ {x·u ≤ h}` (origin interior), read off the polar hull
/// of the points `u/h`: its vertices are the facets, its facets the vertices
/// and its edges the edges of the intersection.
pub fn halfspace_quermassintegrals(halfspaces: &[(Vec3, f64)]) -> Result<[f64; 3]> {
    let mut dual = Vec::with_capacity(halfspaces.len());
    for &(u, h) in halfspaces {
        if !(h > 0.0) {
            return Err(GeomError::OriginNotInterior(h));
        }
        dual.push(vec3::scale(u, 1.0 / h));
    }
    let hull = crate::hull::convex_hull(&dual)?;
    if hull.facets.iter().any(|f| !(f.offset > 0.0)) {
        return Err(GeomError::Degenerate("unbounded halfspace intersection".into()));
    }
    let vertices: Vec<Vec3> = hull.facets.iter().map(|f| vec3::scale(f.normal, 1.0 / f.offset)).collect();
    let mut around: Vec<Vec<usize>> = vec![Vec::new(); dual.len()];
    for (t, tri) in hull.triangles.iter().enumerate() {
        let f = hull.tri_facet[t];
        for &i in tri {
            if !around[i].contains(&f) {
                around[i].push(f);
            }
        }
    }
    let (mut volume, mut area) = (0.0, 0.0);
    for (i, fs) in around.iter().enumerate() {
        if fs.len() >= 3 {
            let (u, h) = halfspaces[i];
            let a = polygon_area(u, fs.iter().map(|&f| vertices[f]));
            area += a;
            volume += h * a / 3.0;
        }
    }
    let mut curvature = 0.0;
    let mut tri_of_edge = rustc_hash::FxHashMap::default();
    for (t, tri) in hull.triangles.iter().enumerate() {
        for k in 0..3 {
            tri_of_edge.insert((tri[k], tri[(k + 1) % 3]), t);
        }
    }
    for (&(a, b), &t) in &tri_of_edge {
        if a < b {
            if let Some(&s) = tri_of_edge.get(&(b, a)) {
                let (f, g) = (hull.tri_facet[t], hull.tri_facet[s]);
                if f != g {
                    let len = vec3::norm(vec3::sub(vertices[f], vertices[g]));
                    curvature += len * vec3::angle(halfspaces[a].0, halfspaces[b].0);
                }
            }
        }
    }
    Ok([volume, area / 3.0, curvature / 6.0])
}

/// Area of the convex polygon with the given vertices in a plane normal to `u`.
fn polygon_area(u: Vec3, points: impl Iterator<Item = Vec3>) -> f64 {
    let (e1, e2) = vec3::orthonormal_complement(u);
    let mut p: Vec<(f64, f64)> = points.map(|x| (vec3::dot(x, e1), vec3::dot(x, e2))).collect();
    let n = p.len() as f64;
    let c = p.iter().fold((0.0, 0.0), |acc, q| (acc.0 + q.0 / n, acc.1 + q.1 / n));
    p.sort_by(|a, b| (a.1 - c.1).atan2(a.0 - c.0).total_cmp(&(b.1 - c.1).atan2(b.0 - c.0)));
    let mut twice = 0.0;
    for k in 0..p.len() {
        let (a, b) = (p[k], p[(k + 1) % p.len()]);
        twice += (a.0 - c.0) * (b.1 - c.1) - (b.0 - c.0) * (a.1 - c.1);
    }
    0.5 * twice.abs()
}

/// `W₂(Q) = (1/3) ∫ h_Q du` by grid quadrature, whatever the source.
pub fn mean_width_quadrature(q: &SupportBody) -> f64 {
    integrate_nodes(q.grid(), |k| q.samples()[k]) / 3.0
}

/// `V(Q*) = (1/3) ∫ h_Q^{-3} du`.
pub fn polar_volume(q: &SupportBody) -> Result<f64> {
    let m = q.min_sample();
    if !(m > 0.0) {
        return Err(GeomError::OriginNotInterior(m));
    }
    Ok(integrate_nodes(q.grid(), |k| q.samples()[k].powi(-3)) / 3.0)
}

/// `V(Q*)` by the most exact available route: the polar polytope for
/// polytopes and projection-type zonotopes, otherwise grid quadrature of
/// `h^{-3}`. The support functions of zonal images have kinks, so the
/// quadrature path is classed as an approximant.
pub fn polar_volume_estimate(q: &SupportBody) -> Result<Estimate> {
    match q.source() {
        SupportSource::Polytope(p) => Ok(Estimate::new(polytope_polar_volume(p)?, Rung::Exact)),
        SupportSource::Zonal { measure, kernel } if kernel.kind == KernelKind::Projection => {
            Ok(Estimate::new(zonotope_polar_volume(measure)?, Rung::Exact))
        }
        _ => Ok(Estimate::new(polar_volume(q)?, Rung::Approximant)),
    }
}

/// `V(P*)` for a polytope with the origin in its interior: `P*` is the hull
/// of the points `n_F / h_F` over the facets `F` of `P`.
pub fn polytope_polar_volume(p: &Polytope) -> Result<f64> {
    let mut pts = Vec::with_capacity(p.facets().len());
    for f in p.facets() {
        if !(f.offset > 0.0) {
            return Err(GeomError::OriginNotInterior(f.offset));
        }
        pts.push(vec3::scale(f.normal, 1.0 / f.offset));
    }
    Ok(Polytope::from_points(&pts)?.volume())
}

/// Volume of the polar of the zonotope with support `½ Σ a |u·n|`. Every
/// normal `gᵢ × gⱼ` of two generators is a facet normal of the zonotope, so
/// the polar is the hull of the points `±n / h(n)`.
pub fn zonotope_polar_volume(mu: &AtomicMeasure) -> Result<f64> {
    let g = zonotope_generators(mu);
    let support = |n: Vec3| 0.5 * g.iter().map(|x| vec3::dot(*x, n).abs()).sum::<f64>();
    let mut pts = Vec::new();
    for i in 0..g.len() {
        for j in i + 1..g.len() {
            if let Some(n) = vec3::normalize(vec3::cross(g[i], g[j])) {
                let h = support(n);
                if !(h > 0.0) {
                    return Err(GeomError::OriginNotInterior(h));
                }
                pts.push(vec3::scale(n, 1.0 / h));
                pts.push(vec3::scale(n, -1.0 / h));
            }
        }
    }
    Ok(Polytope::from_points(&pts)?.volume())
}

fn same_grid(ls: &[&StarBody]) -> Result<()> {
    if ls.windows(2).any(|w| !w[0].grid().same_as(w[1].grid())) {
        return Err(GeomError::GridMismatch);
    }
    Ok(())
}

/// `Ṽ(L₁, L₂, L₃) = (1/3) ∫ ρ₁ρ₂ρ₃ du`.
pub fn dual_mixed_volume(ls: &[&StarBody]) -> Result<f64> {
    if ls.len() != 3 {
        return Err(GeomError::DimensionMismatch(ls.len(), 3));
    }
    same_grid(ls)?;
    Ok(integrate_nodes(ls[0].grid(), |i| ls.iter().map(|l| l.samples()[i]).product::<f64>()) / 3.0)
}

/// `Ṽ_r(K, L) = (1/3) ∫ ρ_K^{3−r} ρ_L^r du`.
pub fn dual_v_r(k: &StarBody, l: &StarBody, r: f64) -> Result<f64> {
    same_grid(&[k, l])?;
    Ok(integrate_nodes(k.grid(), |i| k.samples()[i].powf(3.0 - r) * l.samples()[i].powf(r)) / 3.0)
}

/// `W̃_i(K, L) = (1/3) ∫ ρ_K^{2−i} ρ_L du`.
pub fn dual_w_i(k: &StarBody, l: &StarBody, i: usize) -> Result<f64> {
    if i > 2 {
        return Err(GeomError::InvalidArgument(format!("dual quermassintegral index {i} outside 0..=2")));
    }
    same_grid(&[k, l])?;
    Ok(integrate_nodes(k.grid(), |j| k.samples()[j].powi(2 - i as i32) * l.samples()[j]) / 3.0)
}

/// `W̃_i(K) = (1/3) ∫ ρ_K^{3−i} du`.
pub fn dual_quermassintegral(k: &StarBody, i: usize) -> Result<f64> {
    if i > 3 {
        return Err(GeomError::InvalidArgument(format!("dual quermassintegral index {i} outside 0..=3")));
    }
    Ok(integrate_nodes(k.grid(), |j| k.samples()[j].powi(3 - i as i32)) / 3.0)
}

/// `∫_arc ğ(v·d) ds` along the great-circle arc from `n1` to `n2`, split at the
/// kernel's breakpoints so every panel is smooth.
pub fn arc_kernel_integral(kernel: &ZonalKernel, n1: Vec3, n2: Vec3, d: Vec3) -> f64 {
    let theta = vec3::angle(n1, n2);
    if theta <= 0.0 {
        return 0.0;
    }
    let p = match vec3::normalize(vec3::sub(n2, vec3::scale(n1, vec3::dot(n1, n2)))) {
        Some(p) => p,
        None => return 0.0,
    };
    let (a, b) = (vec3::dot(n1, d), vec3::dot(p, d));
    let r = a.hypot(b);
    let delta = b.atan2(a);
    let mut cuts = vec![0.0, theta];
    for &t in kernel.breakpoints().iter().chain([-1.0, 1.0].iter()) {
        if r > 0.0 && t.abs() <= r {
            let base = (t / r).clamp(-1.0, 1.0).acos();
            for s0 in [delta + base, delta - base] {
                for k in -2..=2 {
                    let s = s0 + 2.0 * PI * k as f64;
                    if s > 0.0 && s < theta {
                        cuts.push(s);
                    }
                }
            }
        }
    }
    cuts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    cuts.dedup_by(|x, y| (*x - *y).abs() < 1e-14);
    let mut total = 0.0;
    for w in cuts.windows(2) {
        for (s, wt) in gauss_legendre_on(16, w[0], w[1]) {
            total += wt * kernel.eval(a * s.cos() + b * s.sin());
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bodies::random_polytope;
    use crate::measures::surface_area_measure;
    use std::sync::Arc;

    #[test]
    fn polytope_volumes() {
        let c = Polytope::cube(1.0).unwrap();
        assert!((volume(&c) - 8.0).abs() < 1e-12);
        assert!((volume(&Polytope::standard_simplex()) - 1.0 / 6.0).abs() < 1e-15);
        assert!((mixed_volume(&c, &c, &c).unwrap() - 8.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_volume_with_segment() {
        let c = Polytope::cuboid([0.0; 3], [1.0; 3]).unwrap();
        let s = Polytope::thin_segment([0.0; 3], [0.0, 0.0, 1.0], 1e-3).unwrap();
        let v = mixed_volume(&c, &c, &s).unwrap();
        assert!((v - 1.0 / 3.0).abs() < 1e-2);
    }

    #[test]
    fn cube_quermassintegrals() {
        let c = Polytope::cube(1.0).unwrap();
        assert!((quermassintegral(&c, 1).unwrap() - 8.0).abs() < 1e-12);
        assert!((quermassintegral(&c, 2).unwrap() - 2.0 * PI).abs() < 1e-12);
        let ball = Polytope::ball_approximant(&build_grid(3, 16).unwrap()).unwrap();
        assert!((quermassintegral_with_ball(&c, 1, &ball).unwrap() - 8.0).abs() < 5e-2);
        assert!((quermassintegral_with_ball(&c, 2, &ball).unwrap() - 2.0 * PI).abs() < 5e-2);
    }

    #[test]
    fn mixed_volume_routes_agree() {
        let p = random_polytope(1, 12).unwrap();
        let q = random_polytope(2, 10).unwrap();
        let r = random_polytope(3, 9).unwrap();
        let a = mixed_volume(&p, &q, &r).unwrap();
        let b = mixed_volume_via_measure(&p, &q, &r).unwrap();
        assert!((a - b).abs() <= 1e-8 * a, "{a} vs {b}");
        let c = mixed_volume(&r, &p, &q).unwrap();
        assert!((a - c).abs() <= 1e-9 * a);
        assert!((w_i_pair(&p, &q, 0).unwrap() - mixed_volume(&p, &p, &q).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn zonotope_of_cube_measure() {
        let c = Polytope::cube(1.0).unwrap();
        let s = surface_area_measure(&c);
        assert!((zonotope_volume(&s) - 512.0).abs() < 1e-9);
        assert!((zonotope_surface_area(&s) - 6.0 * 64.0).abs() < 1e-9);
    }

    #[test]
    fn star_volumes() {
        let g = Arc::new(build_grid(3, 12).unwrap());
        let b = StarBody::ball(g.clone(), 1.0).unwrap();
        let b2 = StarBody::ball(g.clone(), 2.0).unwrap();
        assert!((volume_star(&b) - kappa(3)).abs() < 1e-9);
        assert!((volume_star(&b2) - 8.0 * kappa(3)).abs() < 1e-9);
        assert!((dual_mixed_volume(&[&b, &b, &b2]).unwrap() - 2.0 * kappa(3)).abs() < 1e-9);
        assert!((dual_v_r(&b, &b2, -1.0).unwrap() - kappa(3) / 2.0).abs() < 1e-9);
        assert!((dual_v_r(&b, &b2, 1.0).unwrap() - 2.0 * kappa(3)).abs() < 1e-9);
        assert!((dual_w_i(&b, &b2, 1).unwrap() - 2.0 * kappa(3)).abs() < 1e-9);
        assert!((dual_quermassintegral(&b2, 1).unwrap() - 4.0 * kappa(3)).abs() < 1e-9);
        let g = Arc::new(build_grid(3, 48).unwrap());
        let oct = crate::bodies::polar_of_polytope(&Polytope::cube(1.0).unwrap(), g).unwrap();
        assert!((volume_star(&oct) - 4.0 / 3.0).abs() < 1e-3);
    }

    #[test]
    fn halfspace_quermassintegrals_match_hull() {
        let p = random_polytope(6, 30).unwrap();
        let grid = build_grid(3, 10).unwrap();
        let hs: Vec<(Vec3, f64)> = grid.nodes3().map(|u| (u, p.support(u))).collect();
        let w = halfspace_quermassintegrals(&hs).unwrap();
        let q = crate::bodies::halfspace_polytope(hs.into_iter()).unwrap();
        for i in 0..3 {
            let want = quermassintegral(&q, i).unwrap();
            assert!((w[i] - want).abs() < 1e-9 * want, "W{i}: {} vs {want}", w[i]);
        }
    }

    #[test]
    fn extrapolated_approximant_of_a_smooth_image() {
        // ΘB for B given by its surface measure on a grid is a smooth body; the
        // extrapolated approximant must beat the plain one at the same resolution.
        let g = Arc::new(build_grid(3, 8).unwrap());
        let k = random_polytope(2, 10).unwrap();
        let t = crate::operators::theta_body(&k, &g).unwrap();
        let reference = extrapolated_quermassintegrals(&t, 80).unwrap();
        let plain = approximant_quermassintegrals(&t, APPROX_RESOLUTION).unwrap();
        let est = support_quermassintegrals(&t).unwrap();
        for i in 0..2 {
            let e_plain = (plain[i] / reference[i] - 1.0).abs();
            let e_rich = (est[i].value / reference[i] - 1.0).abs();
            assert!(e_rich < 1e-4 && e_rich < e_plain / 5.0, "W{i}: {e_rich} vs {e_plain}");
            assert_eq!(est[i].rung, Rung::Approximant);
        }
    }

    #[test]
    fn polar_volume_routes_agree() {
        let k = random_polytope(3, 12).unwrap();
        let z = crate::operators::projection_zonotope(&k).unwrap();
        let exact = zonotope_polar_volume(&surface_area_measure(&k)).unwrap();
        assert!((polytope_polar_volume(&z).unwrap() / exact - 1.0).abs() < 1e-12);
        let g = Arc::new(build_grid(3, 64).unwrap());
        let pi = crate::operators::projection_body(&k, &g).unwrap();
        let est = polar_volume_estimate(&pi).unwrap();
        assert_eq!(est.rung, Rung::Exact);
        assert!((polar_volume(&pi).unwrap() / est.value - 1.0).abs() < 1e-4);
        // cube [-1,1]³: the polar is the octahedron of volume 4/3
        let c = Polytope::cube(1.0).unwrap();
        assert!((polytope_polar_volume(&c).unwrap() - 4.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn arc_integral_of_projection_kernel() {
        let k = ZonalKernel::projection();
        // quarter circle from e1 to e2 against d = e1: ∫₀^{π/2} cos s / 2 ds = 1/2
        let v = arc_kernel_integral(&k, [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 0.0, 0.0]);
        assert!((v - 0.5).abs() < 1e-14);
        // crossing the kink: from (1,-1)/√2 to (1,1)/√2 against e2: ∫ |sin s|/2 over [−π/4, π/4]
        let r = 0.5f64.sqrt();
        let v = arc_kernel_integral(&k, [r, -r, 0.0], [r, r, 0.0], [0.0, 1.0, 0.0]);
        assert!((v - (1.0 - r)).abs() < 1e-14);
    }
}
