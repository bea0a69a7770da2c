//! Convex and star body representations, constructions, and elementary maps.

use rustc_hash::FxHashMap as HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::hull::{self, Facet, FacetEdge, Hull};
use crate::measures::AtomicMeasure;
use crate::sphere::{self, kappa, SphericalGrid, ZonalKernel};
use crate::vec3::{self, Mat3, Vec3};

/// Relative edge length below which hull vertices are merged when
/// computing exterior angles.
pub const VERTEX_CLUSTER_REL: f64 = 1e-7;

/// Relative facet area below which a facet's normal is ignored when
/// computing exterior angles.
pub const SLIVER_AREA_REL: f64 = 1e-9;

/// Sup-norm tolerance for homothety and dilate detection after normalization.
pub const SHAPE_MATCH_TOL: f64 = 1e-5;

/// A convex polytope in ℝ³ stored as the convex hull of its vertices.
#[derive(Clone)]
pub struct Polytope {
    vertices: Vec<Vec3>,
    hull: Arc<Hull>,
}

impl fmt::Debug for Polytope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Polytope")
            .field("vertices", &self.vertices.len())
            .field("facets", &self.hull.facets.len())
            .field("volume", &self.hull.volume)
            .finish()
    }
}

impl Polytope {
    /// Convex hull of `points`; interior and coplanar-redundant points are dropped,
    /// the remaining vertices keep their input order.
    pub fn from_points(points: &[Vec3]) -> Result<Self> {
        let h = hull::convex_hull(points)?;
        let vertices: Vec<Vec3> = h.vertex_ids.iter().map(|&i| points[i]).collect();
        let mut remap = HashMap::with_capacity_and_hasher(h.vertex_ids.len(), Default::default());
        for (new, &old) in h.vertex_ids.iter().enumerate() {
            remap.insert(old, new);
        }
        let mut h = h;
        for t in &mut h.triangles {
            for i in t.iter_mut() {
                *i = remap[i];
            }
        }
        h.vertex_ids = (0..vertices.len()).collect();
        Ok(Polytope { vertices, hull: Arc::new(h) })
    }

    /// From raw vertex lists with dimension check.
    pub fn from_vertex_lists(dim: usize, vertices: &[Vec<f64>]) -> Result<Self> {
        if dim != 3 {
            return Err(GeomError::UnsupportedDimension(dim, "3"));
        }
        let pts = vertices
            .iter()
            .map(|v| match v.as_slice() {
                [x, y, z] => Ok([*x, *y, *z]),
                _ => Err(GeomError::DimensionMismatch(v.len(), dim)),
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_points(&pts)
    }

    /// Axis-parallel box `[lo, hi]`.
    pub fn cuboid(lo: Vec3, hi: Vec3) -> Result<Self> {
        let mut v = Vec::with_capacity(8);
        for &x in &[lo[0], hi[0]] {
            for &y in &[lo[1], hi[1]] {
                for &z in &[lo[2], hi[2]] {
                    v.push([x, y, z]);
                }
            }
        }
        Self::from_points(&v)
    }

    /// Cube `[-a, a]³`.
    pub fn cube(a: f64) -> Result<Self> {
        Self::cuboid([-a; 3], [a; 3])
    }

    /// `conv{0, e₁, e₂, e₃}`.
    pub fn standard_simplex() -> Self {
        Self::from_points(&[[0.0; 3], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]).expect("simplex")
    }

    /// Segment `[a, b]` thickened into a box of cross-section `thickness × thickness`.
    pub fn thin_segment(a: Vec3, b: Vec3, thickness: f64) -> Result<Self> {
        let d = vec3::normalize(vec3::sub(b, a)).ok_or_else(|| GeomError::Degenerate("zero-length segment".into()))?;
        let (p, q) = vec3::orthonormal_complement(d);
        let half = 0.5 * thickness;
        let mut pts = Vec::with_capacity(8);
        for end in [a, b] {
            for sp in [-half, half] {
                for sq in [-half, half] {
                    pts.push(vec3::add(end, vec3::add(vec3::scale(p, sp), vec3::scale(q, sq))));
                }
            }
        }
        Self::from_points(&pts)
    }

    /// Inscribed polytope of the unit ball: hull of the nodes of a grid.
    pub fn ball_approximant(grid: &SphericalGrid) -> Result<Self> {
        grid.require_dim3()?;
        let pts: Vec<Vec3> = grid.nodes3().collect();
        Self::from_points(&pts)
    }

    pub fn dim(&self) -> usize {
        3
    }

    pub fn vertices(&self) -> &[Vec3] {
        &self.vertices
    }

    pub fn facets(&self) -> &[Facet] {
        &self.hull.facets
    }

    pub fn edges(&self) -> &[FacetEdge] {
        &self.hull.edges
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.hull.triangles
    }

    /// Facet index of every hull triangle.
    pub fn triangle_facets(&self) -> &[usize] {
        &self.hull.tri_facet
    }

    pub fn volume(&self) -> f64 {
        self.hull.volume
    }

    pub fn surface_area(&self) -> f64 {
        self.hull.facets.iter().map(|f| f.area).sum()
    }

    /// Total length of edges weighted by exterior dihedral angle, `Σ ℓ_e θ_e`.
    pub fn edge_curvature(&self) -> f64 {
        self.edges()
            .iter()
            .map(|e| {
                let (a, b) = e.facets;
                e.length * vec3::angle(self.facets()[a].normal, self.facets()[b].normal)
            })
            .sum()
    }

    /// `h(P, u) = max_v u·v`.
    pub fn support(&self, u: Vec3) -> f64 {
        self.vertices.iter().map(|v| vec3::dot(*v, u)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn support_samples(&self, grid: &SphericalGrid) -> Vec<f64> {
        grid.sample3(|u| self.support(u))
    }

    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> Result<Self> {
        let pts: Vec<Vec3> = self.vertices.iter().map(|v| f(*v)).collect();
        Self::from_points(&pts)
    }

    /// `λP` about the origin.
    pub fn dilate(&self, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(GeomError::InvalidArgument(format!("dilation factor must be > 0, got {lambda}")));
        }
        self.map_vertices(|v| vec3::scale(v, lambda))
    }

    pub fn translate(&self, t: Vec3) -> Result<Self> {
        self.map_vertices(|v| vec3::add(v, t))
    }

    pub fn rotate(&self, r: &Mat3) -> Result<Self> {
        check_rotation(r)?;
        self.map_vertices(|v| vec3::mat_vec(r, v))
    }

    /// Normalized exterior solid angle of every vertex (sums to 1).
    ///
    /// Vertices closer than `VERTEX_CLUSTER_REL` times the diameter are
    /// treated as one vertex: the facets between them are too
    /// small for their normals to be meaningful; for the same reason facets
    /// below `SLIVER_AREA_REL` of the surface area are ignored (they are
    /// limits of edges or vertices). A cluster's normal cone is
    /// spanned by the normals of the facets meeting it in a single corner; its solid
    /// angle is split evenly among its members.
    pub fn external_angles(&self) -> Vec<f64> {
        let nv = self.vertices.len();
        let diam = self.diameter();
        let mut parent: Vec<usize> = (0..nv).collect();
        fn find(parent: &mut [usize], mut i: usize) -> usize {
            while parent[i] != i {
                parent[i] = parent[parent[i]];
                i = parent[i];
            }
            i
        }
        for a in 0..nv {
            for b in a + 1..nv {
                if vec3::norm(vec3::sub(self.vertices[a], self.vertices[b])) <= VERTEX_CLUSTER_REL * diam {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let root: Vec<usize> = (0..nv).map(|i| find(&mut parent, i)).collect();
        let min_area = SLIVER_AREA_REL * self.surface_area();
        let mut normals: HashMap<usize, Vec<usize>> = HashMap::default();
        for (t, v) in self.triangles().iter().enumerate() {
            let f = self.hull.tri_facet[t];
            if self.facets()[f].area <= min_area {
                continue;
            }
            // A triangle with two corners in one cluster degenerates to a
            // segment as the cluster collapses; its normal carries no information.
            if root[v[0]] == root[v[1]] || root[v[1]] == root[v[2]] || root[v[2]] == root[v[0]] {
                continue;
            }
            for &i in v {
                let e = normals.entry(root[i]).or_default();
                if !e.contains(&f) {
                    e.push(f);
                }
            }
        }
        let mut members: HashMap<usize, usize> = HashMap::default();
        for &r in &root {
            *members.entry(r).or_default() += 1;
        }
        let center = vec3::scale(
            self.vertices.iter().fold([0.0; 3], |acc, v| vec3::add(acc, *v)),
            1.0 / nv as f64,
        );
        let cone: HashMap<usize, f64> = normals
            .iter()
            .map(|(&r, fs)| {
                let n: Vec<Vec3> = fs.iter().map(|&f| self.facets()[f].normal).collect();
                // Every incident facet normal has a positive component along
                // the direction from an interior point to the vertex.
                let pole = vec3::normalize(vec3::sub(self.vertices[r], center));
                (r, pole.map_or(0.0, |p| normal_cone_solid_angle(p, &n)))
            })
            .collect();
        let angles: Vec<f64> = (0..nv)
            .map(|i| cone.get(&root[i]).copied().unwrap_or(0.0) / members[&root[i]] as f64)
            .collect();
        let total: f64 = angles.iter().sum();
        angles.iter().map(|a| a / total).collect()
    }

    /// Largest distance between two vertices.
    pub fn diameter(&self) -> f64 {
        let v = &self.vertices;
        let mut d: f64 = 0.0;
        for i in 0..v.len() {
            for j in i + 1..v.len() {
                d = d.max(vec3::norm(vec3::sub(v[i], v[j])));
            }
        }
        d
    }

    /// Steiner point `Σ_v γ(v) v` with normalized exterior angles `γ`.
    pub fn steiner_point(&self) -> Vec3 {
        self.external_angles()
            .iter()
            .zip(&self.vertices)
            .fold([0.0; 3], |acc, (g, v)| vec3::add(acc, vec3::scale(*v, *g)))
    }

    /// Translate so that the Steiner point is the origin.
    pub fn steiner_centered(&self) -> Result<Self> {
        let s = self.steiner_point();
        self.translate(vec3::scale(s, -1.0))
    }

    /// Closest-pair vertex match against `other` (for exact round-trip checks).
    pub fn same_vertices(&self, other: &Polytope) -> bool {
        self.vertices == other.vertices
    }
}

/// Solid angle of the cone spanned by unit vectors `normals`, all of which
/// have a positive component along the unit vector `pole`.
fn normal_cone_solid_angle(pole: Vec3, normals: &[Vec3]) -> f64 {
    if normals.len() < 3 {
        return 0.0;
    }
    // Gnomonic projection about the pole keeps great-circle arcs straight,
    // so the planar hull orders the extreme rays of the cone.
    let (e1, e2) = vec3::orthonormal_complement(pole);
    let pts: Vec<(f64, f64, usize)> = normals
        .iter()
        .enumerate()
        .map(|(i, n)| {
            let d = vec3::dot(*n, pole);
            (vec3::dot(*n, e1) / d, vec3::dot(*n, e2) / d, i)
        })
        .collect();
    let ring = planar_hull(pts);
    if ring.len() < 3 {
        return 0.0;
    }
    let n: Vec<Vec3> = ring.iter().map(|&i| normals[i]).collect();
    let mut omega = 0.0;
    for k in 1..n.len() - 1 {
        let (a, b, c) = (n[0], n[k], n[k + 1]);
        let num = vec3::det(a, b, c);
        let den = 1.0 + vec3::dot(a, b) + vec3::dot(b, c) + vec3::dot(c, a);
        omega += 2.0 * num.atan2(den);
    }
    omega.abs()
}

/// Counter-clockwise convex hull (monotone chain) returning the payload indices.
fn planar_hull(mut pts: Vec<(f64, f64, usize)>) -> Vec<usize> {
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let cross = |o: (f64, f64, usize), a: (f64, f64, usize), b: (f64, f64, usize)| {
        (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
    };
    let mut hull: Vec<(f64, f64, usize)> = Vec::with_capacity(2 * pts.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &(f64, f64, usize)>> =
            if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while hull.len() >= start + 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull.into_iter().map(|p| p.2).collect()
}

pub fn check_rotation(r: &Mat3) -> Result<()> {
    if vec3::orthogonality_defect(r) > 1e-10 || vec3::determinant(r) < 0.0 {
        return Err(GeomError::InvalidArgument("matrix is not a rotation (‖RᵀR − I‖ > 1e-10 or det < 0)".into()));
    }
    Ok(())
}

/// `λ₁K + λ₂L` as the hull of pairwise vertex combinations.
pub fn minkowski_sum(k: &Polytope, l: &Polytope, l1: f64, l2: f64) -> Result<Polytope> {
    minkowski_sum_points(k, l.vertices(), l1, l2)
}

/// `λ₁K + λ₂·conv(points)`; `points` may be lower-dimensional (even a single point).
pub fn minkowski_sum_points(k: &Polytope, points: &[Vec3], l1: f64, l2: f64) -> Result<Polytope> {
    if !(l1 >= 0.0 && l2 >= 0.0) {
        return Err(GeomError::InvalidArgument("Minkowski coefficients must be >= 0".into()));
    }
    if points.is_empty() {
        return Err(GeomError::InvalidArgument("empty summand".into()));
    }
    if l1 == 0.0 && l2 == 0.0 {
        return Err(GeomError::InvalidArgument("both Minkowski coefficients are zero".into()));
    }
    let mut pts = Vec::with_capacity(k.vertices.len() * points.len());
    for x in &k.vertices {
        for y in points {
            pts.push(vec3::add(vec3::scale(*x, l1), vec3::scale(*y, l2)));
        }
    }
    Polytope::from_points(&pts)
}

/// Where a support body's values come from.
#[derive(Clone)]
pub enum SupportSource {
    /// Only the node samples are known; off-grid values are interpolated.
    Sampled,
    /// Exact support function of a polytope.
    Polytope(Polytope),
    /// `h = μ ∗ ğ`, exact at every direction.
    Zonal { measure: AtomicMeasure, kernel: ZonalKernel },
    /// A closed-form (or independently computed) support function.
    Function(RadialFn),
}

impl fmt::Debug for SupportSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportSource::Sampled => write!(f, "Sampled"),
            SupportSource::Polytope(p) => f.debug_tuple("Polytope").field(p).finish(),
            SupportSource::Zonal { measure, kernel } => f
                .debug_struct("Zonal")
                .field("atoms", &measure.len())
                .field("kernel", &kernel.name)
                .finish(),
            SupportSource::Function(_) => write!(f, "Function"),
        }
    }
}

/// A convex body given by support-function samples on a grid.
#[derive(Clone, Debug)]
pub struct SupportBody {
    grid: Arc<SphericalGrid>,
    h: Vec<f64>,
    source: SupportSource,
}

impl SupportBody {
    pub fn from_samples(grid: Arc<SphericalGrid>, h: Vec<f64>) -> Result<Self> {
        grid.require_dim3()?;
        if h.len() != grid.len() {
            return Err(GeomError::InvalidArgument(format!("{} samples for a grid of {} nodes", h.len(), grid.len())));
        }
        Ok(SupportBody { grid, h, source: SupportSource::Sampled })
    }

    pub fn from_polytope(grid: Arc<SphericalGrid>, p: &Polytope) -> Result<Self> {
        grid.require_dim3()?;
        let h = p.support_samples(&grid);
        Ok(SupportBody { grid, h, source: SupportSource::Polytope(p.clone()) })
    }

    /// `h = μ ∗ ğ` sampled on the grid.
    pub fn from_zonal(grid: Arc<SphericalGrid>, measure: AtomicMeasure, kernel: ZonalKernel) -> Result<Self> {
        let h = sphere::zonal_convolve(&measure, &kernel, &grid)?;
        Ok(SupportBody { grid, h, source: SupportSource::Zonal { measure, kernel } })
    }

    /// Samples a support function given in closed form and keeps it for off-grid evaluation.
    pub fn from_fn(grid: Arc<SphericalGrid>, f: RadialFn) -> Result<Self> {
        grid.require_dim3()?;
        let h = grid.sample3(|u| f(u));
        Ok(SupportBody { grid, h, source: SupportSource::Function(f) })
    }

    /// The unit ball scaled by `r`.
    pub fn ball(grid: Arc<SphericalGrid>, r: f64) -> Result<Self> {
        let n = grid.len();
        Self::from_samples(grid, vec![r; n])
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.h
    }

    pub fn source(&self) -> &SupportSource {
        &self.source
    }

    /// Support value at any direction (exact when the source allows it).
    pub fn eval(&self, u: Vec3) -> f64 {
        match &self.source {
            SupportSource::Sampled => self.grid.interpolate(&self.h, u),
            SupportSource::Polytope(p) => p.support(u),
            SupportSource::Zonal { measure, kernel } => sphere::zonal_eval(measure, kernel, u),
            SupportSource::Function(f) => f(u),
        }
    }

    pub fn min_sample(&self) -> f64 {
        self.h.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `λ₁A + λ₂B` (support functions add).
    pub fn combine(a: &SupportBody, b: &SupportBody, l1: f64, l2: f64) -> Result<SupportBody> {
        if !a.grid.same_as(&b.grid) {
            return Err(GeomError::GridMismatch);
        }
        let h: Vec<f64> = a.h.iter().zip(&b.h).map(|(x, y)| l1 * x + l2 * y).collect();
        let source = match (&a.source, &b.source) {
            (SupportSource::Zonal { measure: m1, kernel: k1 }, SupportSource::Zonal { measure: m2, kernel: k2 })
                if k1.kind == k2.kind && k1.kind != sphere::KernelKind::Custom && k1.name == k2.name =>
            {
                SupportSource::Zonal { measure: AtomicMeasure::combine(m1, m2, l1, l2), kernel: k1.clone() }
            }
            (SupportSource::Polytope(p), SupportSource::Polytope(q)) if l1 >= 0.0 && l2 >= 0.0 => {
                SupportSource::Polytope(minkowski_sum(p, q, l1, l2)?)
            }
            _ => SupportSource::Sampled,
        };
        Ok(SupportBody { grid: a.grid.clone(), h, source })
    }

    pub fn dilate(&self, lambda: f64) -> Result<SupportBody> {
        if !(lambda > 0.0) {
            return Err(GeomError::InvalidArgument("dilation factor must be > 0".into()));
        }
        let source = match &self.source {
            SupportSource::Sampled => SupportSource::Sampled,
            SupportSource::Function(f) => {
                let f = f.clone();
                SupportSource::Function(Arc::new(move |u| lambda * f(u)))
            }
            SupportSource::Polytope(p) => SupportSource::Polytope(p.dilate(lambda)?),
            SupportSource::Zonal { measure, kernel } => {
                SupportSource::Zonal { measure: measure.scaled(lambda), kernel: kernel.clone() }
            }
        };
        Ok(SupportBody { grid: self.grid.clone(), h: self.h.iter().map(|x| x * lambda).collect(), source })
    }

    /// `ϑK`: samples become `h(K, ϑ⁻¹u)`.
    pub fn rotate(&self, r: &Mat3) -> Result<SupportBody> {
        check_rotation(r)?;
        match &self.source {
            SupportSource::Polytope(p) => SupportBody::from_polytope(self.grid.clone(), &p.rotate(r)?),
            SupportSource::Zonal { measure, kernel } => {
                SupportBody::from_zonal(self.grid.clone(), measure.rotated(r), kernel.clone())
            }
            SupportSource::Function(f) => {
                let (f, rt) = (f.clone(), vec3::transpose(r));
                SupportBody::from_fn(self.grid.clone(), Arc::new(move |u| f(vec3::mat_vec(&rt, u))))
            }
            SupportSource::Sampled => {
                let rt = vec3::transpose(r);
                let h = self.grid.sample3(|u| self.grid.interpolate(&self.h, vec3::mat_vec(&rt, u)));
                SupportBody::from_samples(self.grid.clone(), h)
            }
        }
    }

    /// Steiner point `(1/κ₃) ∫ h(u) u du`.
    ///
    /// Zonal images use `∫ ğ(u·v) u du = c_ğ v`, so the point is
    /// `(c_ğ/κ₃) ∫ v dμ(v)`; other sources use grid quadrature.
    pub fn steiner_point(&self) -> Vec3 {
        if let SupportSource::Zonal { measure, kernel } = &self.source {
            return vec3::scale(measure.centroid(), kernel.first_moment() / kappa(3));
        }
        self.steiner_point_quadrature()
    }

    /// Steiner point by grid quadrature regardless of the source.
    pub fn steiner_point_quadrature(&self) -> Vec3 {
        let mut s = [0.0; 3];
        for (i, u) in self.grid.nodes3().enumerate() {
            s = vec3::add(s, vec3::scale(u, self.grid.weights()[i] * self.h[i]));
        }
        vec3::scale(s, 1.0 / kappa(3))
    }

    /// Circumscribed polytope `∩ {x·u ≤ h(u)}` over the grid directions.
    pub fn to_polytope(&self) -> Result<Polytope> {
        halfspace_polytope(self.grid.nodes3().zip(self.h.iter().copied()))
    }

    /// Circumscribed polytope over the nodes of another (usually finer) grid,
    /// using exact evaluation where available.
    pub fn to_polytope_on(&self, directions: &SphericalGrid) -> Result<Polytope> {
        halfspace_polytope(directions.nodes3().map(|u| (u, self.eval(u))))
    }
}

/// Intersection of halfspaces `{x·u ≤ h}` containing the origin in its interior.
pub fn halfspace_polytope(halfspaces: impl Iterator<Item = (Vec3, f64)>) -> Result<Polytope> {
    let mut dual = Vec::new();
    for (u, h) in halfspaces {
        if !(h > 0.0) {
            return Err(GeomError::OriginNotInterior(h));
        }
        dual.push(vec3::scale(u, 1.0 / h));
    }
    let dh = hull::convex_hull(&dual)?;
    let verts: Vec<Vec3> = dh.facets.iter().map(|f| vec3::scale(f.normal, 1.0 / f.offset)).collect();
    if dh.facets.iter().any(|f| !(f.offset > 0.0)) {
        return Err(GeomError::Degenerate("unbounded halfspace intersection".into()));
    }
    Polytope::from_points(&verts)
}

pub type RadialFn = Arc<dyn Fn(Vec3) -> f64 + Send + Sync>;

/// A star body given by radial-function samples on a grid, optionally with
/// the closed-form radial function.
#[derive(Clone)]
pub struct StarBody {
    grid: Arc<SphericalGrid>,
    rho: Vec<f64>,
    exact: Option<RadialFn>,
}

impl fmt::Debug for StarBody {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("StarBody")
            .field("nodes", &self.rho.len())
            .field("exact", &self.exact.is_some())
            .field("min_rho", &self.min_rho())
            .finish()
    }
}

impl StarBody {
    pub fn from_samples(grid: Arc<SphericalGrid>, rho: Vec<f64>) -> Result<Self> {
        grid.require_dim3()?;
        if rho.len() != grid.len() {
            return Err(GeomError::InvalidArgument(format!("{} samples for a grid of {} nodes", rho.len(), grid.len())));
        }
        if let Some(bad) = rho.iter().find(|r| !(**r > 0.0) || !r.is_finite()) {
            return Err(GeomError::InvalidArgument(format!("radial function must be positive and finite, got {bad}")));
        }
        Ok(StarBody { grid, rho, exact: None })
    }

    /// Samples a closed-form radial function and keeps it for off-grid evaluation.
    pub fn from_fn(grid: Arc<SphericalGrid>, f: RadialFn) -> Result<Self> {
        let rho = grid.sample3(|u| f(u));
        let mut s = Self::from_samples(grid, rho)?;
        s.exact = Some(f);
        Ok(s)
    }

    pub fn ball(grid: Arc<SphericalGrid>, r: f64) -> Result<Self> {
        Self::from_fn(grid, Arc::new(move |_| r))
    }

    /// Origin-centred ellipsoid with semi-axes `(a, b, c)` along the coordinate axes.
    pub fn ellipsoid(grid: Arc<SphericalGrid>, axes: Vec3) -> Result<Self> {
        Self::from_fn(
            grid,
            Arc::new(move |u: Vec3| {
                let q = (u[0] / axes[0]).powi(2) + (u[1] / axes[1]).powi(2) + (u[2] / axes[2]).powi(2);
                1.0 / q.sqrt()
            }),
        )
    }

    pub fn grid(&self) -> &Arc<SphericalGrid> {
        &self.grid
    }

    pub fn samples(&self) -> &[f64] {
        &self.rho
    }

    pub fn has_exact(&self) -> bool {
        self.exact.is_some()
    }

    pub fn radial_fn(&self) -> Option<&RadialFn> {
        self.exact.as_ref()
    }

    pub fn eval(&self, u: Vec3) -> f64 {
        match &self.exact {
            Some(f) => f(u),
            None => self.grid.interpolate(&self.rho, u),
        }
    }

    pub fn min_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rho(&self) -> f64 {
        self.rho.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Pointwise map of the radial function, preserving exactness.
    pub fn map(&self, f: impl Fn(f64) -> f64 + Send + Sync + Clone + 'static) -> Result<StarBody> {
        match &self.exact {
            Some(e) => {
                let e = e.clone();
                StarBody::from_fn(self.grid.clone(), Arc::new(move |u| f(e(u))))
            }
            None => StarBody::from_samples(self.grid.clone(), self.rho.iter().map(|x| f(*x)).collect()),
        }
    }

    pub fn dilate(&self, lambda: f64) -> Result<StarBody> {
        if !(lambda > 0.0) {
            return Err(GeomError::InvalidArgument("dilation factor must be > 0".into()));
        }
        self.map(move |r| lambda * r)
    }

    pub fn rotate(&self, r: &Mat3) -> Result<StarBody> {
        check_rotation(r)?;
        let rt = vec3::transpose(r);
        match &self.exact {
            Some(e) => {
                let e = e.clone();
                StarBody::from_fn(self.grid.clone(), Arc::new(move |u| e(vec3::mat_vec(&rt, u))))
            }
            None => {
                let rho = self.grid.sample3(|u| self.grid.interpolate(&self.rho, vec3::mat_vec(&rt, u)));
                StarBody::from_samples(self.grid.clone(), rho)
            }
        }
    }
}

/// Combines two star bodies pointwise, keeping closed forms when both have them.
fn combine_star(
    k: &StarBody,
    l: &StarBody,
    f: impl Fn(f64, f64) -> f64 + Send + Sync + Clone + 'static,
) -> Result<StarBody> {
    if !k.grid.same_as(&l.grid) {
        return Err(GeomError::GridMismatch);
    }
    match (&k.exact, &l.exact) {
        (Some(a), Some(b)) => {
            let (a, b) = (a.clone(), b.clone());
            StarBody::from_fn(k.grid.clone(), Arc::new(move |u| f(a(u), b(u))))
        }
        _ => StarBody::from_samples(k.grid.clone(), k.rho.iter().zip(&l.rho).map(|(x, y)| f(*x, *y)).collect()),
    }
}

/// Radial Minkowski combination: `ρ = λ₁ρ_K + λ₂ρ_L`.
pub fn radial_sum(k: &StarBody, l: &StarBody, l1: f64, l2: f64) -> Result<StarBody> {
    if !(l1 >= 0.0 && l2 >= 0.0) || l1 + l2 == 0.0 {
        return Err(GeomError::InvalidArgument("radial sum needs λ ≥ 0, not both zero".into()));
    }
    combine_star(k, l, move |a, b| l1 * a + l2 * b)
}

/// Radial Blaschke combination: `ρ² = λ₁ρ_K² + λ₂ρ_L²` (n = 3).
pub fn radial_blaschke_sum(k: &StarBody, l: &StarBody, l1: f64, l2: f64) -> Result<StarBody> {
    if !(l1 >= 0.0 && l2 >= 0.0) || l1 + l2 == 0.0 {
        return Err(GeomError::InvalidArgument("radial Blaschke sum needs λ ≥ 0, not both zero".into()));
    }
    combine_star(k, l, move |a, b| (l1 * a * a + l2 * b * b).sqrt())
}

/// Polar of a polytope: `ρ(P*, u) = 1/h(P, u)`.
pub fn polar_of_polytope(p: &Polytope, grid: Arc<SphericalGrid>) -> Result<StarBody> {
    let body = SupportBody::from_polytope(grid, p)?;
    polar(&body)
}

/// Polar of a support body with the origin in its interior.
pub fn polar(k: &SupportBody) -> Result<StarBody> {
    let m = k.min_sample();
    if !(m > 0.0) {
        return Err(GeomError::OriginNotInterior(m));
    }
    match &k.source {
        SupportSource::Sampled => StarBody::from_samples(k.grid.clone(), k.h.iter().map(|h| 1.0 / h).collect()),
        _ => {
            let body = k.clone();
            let mut s = StarBody::from_samples(k.grid.clone(), k.h.iter().map(|h| 1.0 / h).collect())?;
            s.exact = Some(Arc::new(move |u| 1.0 / body.eval(u)));
            Ok(s)
        }
    }
}

/// Polar of a star body whose radial function is the reciprocal of a support function:
/// `h(L*, u) = 1/ρ(L, u)`.
pub fn polar_of_star(l: &StarBody) -> Result<SupportBody> {
    SupportBody::from_samples(l.grid.clone(), l.rho.iter().map(|r| 1.0 / r).collect())
}

/// Hull of `k` uniform points in the unit ball, Steiner-centred. Deterministic in `seed`.
pub fn random_polytope(seed: u64, k: usize) -> Result<Polytope> {
    if k < 4 {
        return Err(GeomError::InvalidArgument(format!("need at least 4 points, got {k}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..100 {
        let pts: Vec<Vec3> = (0..k).map(|_| random_in_ball(&mut rng)).collect();
        match Polytope::from_points(&pts) {
            Ok(p) if p.volume() > 1e-10 => return p.steiner_centered(),
            _ => continue,
        }
    }
    Err(GeomError::Degenerate("random polytope stayed degenerate after 100 attempts".into()))
}

pub fn random_in_ball(rng: &mut impl Rng) -> Vec3 {
    loop {
        let p = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
        if vec3::dot(p, p) <= 1.0 {
            return p;
        }
    }
}

pub fn random_unit(rng: &mut impl Rng) -> Vec3 {
    loop {
        let p = random_in_ball(rng);
        if let Some(u) = vec3::normalize(p) {
            if vec3::norm(p) > 1e-3 {
                return u;
            }
        }
    }
}

/// Uniformly random rotation (axis-angle with a uniform axis; adequate for tests).
pub fn random_rotation(rng: &mut impl Rng) -> Mat3 {
    let axis = random_unit(rng);
    vec3::rotation_about(axis, rng.gen_range(0.0..2.0 * PI))
}

pub const STAR_RHO_MIN: f64 = 0.2;
pub const STAR_RHO_MAX: f64 = 5.0;

/// Random smooth star body: `ρ = c·exp(1.2 tanh(Σ c_j b_j(u)))` with zonal
/// bumps `b_j(u) = exp(κ(u·d_j − 1))` and `c ∈ [0.7, 1.3]`, so `ρ` is
/// analytic with values in `[0.2, 5]`.
///
/// `smoothness` widens the bumps (`κ = 12/(smoothness + 1)`); default is 3.
pub fn random_star_body(grid: Arc<SphericalGrid>, seed: u64, smoothness: usize) -> Result<StarBody> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let conc = 12.0 / (smoothness as f64 + 1.0);
    let terms: Vec<(Vec3, f64)> = (0..10).map(|_| (random_unit(&mut rng), rng.gen_range(-0.6..0.6))).collect();
    let scale = rng.gen_range(0.7..1.3);
    StarBody::from_fn(
        grid,
        Arc::new(move |u: Vec3| {
            let s: f64 = terms.iter().map(|(d, c)| c * (conc * (vec3::dot(u, *d) - 1.0)).exp()).sum();
            scale * (1.2 * s.tanh()).exp()
        }),
    )
}

/// Homothety test: after Steiner-centring and volume normalization, the
/// support functions agree within [`SHAPE_MATCH_TOL`] at every grid node.
pub fn are_homothetic(k: &Polytope, l: &Polytope, grid: &SphericalGrid) -> bool {
    let (sk, sl) = (k.steiner_point(), l.steiner_point());
    let (vk, vl) = (k.volume().cbrt(), l.volume().cbrt());
    grid.nodes3().all(|u| {
        let a = (k.support(u) - vec3::dot(sk, u)) / vk;
        let b = (l.support(u) - vec3::dot(sl, u)) / vl;
        (a - b).abs() <= SHAPE_MATCH_TOL
    })
}

/// Same test for support bodies.
pub fn support_bodies_homothetic(k: &SupportBody, l: &SupportBody, vk: f64, vl: f64) -> bool {
    let (sk, sl) = (k.steiner_point(), l.steiner_point());
    let (vk, vl) = (vk.cbrt(), vl.cbrt());
    k.grid.nodes3().enumerate().all(|(i, u)| {
        let a = (k.h[i] - vec3::dot(sk, u)) / vk;
        let b = (l.h[i] - vec3::dot(sl, u)) / vl;
        (a - b).abs() <= SHAPE_MATCH_TOL
    })
}

/// Dilate test for star bodies: volume-normalized radial functions agree within [`SHAPE_MATCH_TOL`].
pub fn are_dilates(k: &StarBody, l: &StarBody) -> bool {
    let vk = crate::volumes::volume_star(k).cbrt();
    let vl = crate::volumes::volume_star(l).cbrt();
    k.rho.iter().zip(&l.rho).all(|(a, b)| (a / vk - b / vl).abs() <= SHAPE_MATCH_TOL)
}

/// On-disk body description.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BodyFile {
    pub dim: usize,
    pub kind: BodyKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub vertices: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_resolution: Option<usize>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "lowercase")]
pub enum BodyKind {
    Polytope,
    Support,
    Star,
}

/// A body loaded from a [`BodyFile`].
#[derive(Debug, Clone)]
pub enum AnyBody {
    Polytope(Polytope),
    Support(SupportBody),
    Star(StarBody),
}

impl BodyFile {
    pub fn from_polytope(p: &Polytope) -> Self {
        BodyFile {
            dim: 3,
            kind: BodyKind::Polytope,
            vertices: Some(p.vertices().iter().map(|v| v.to_vec()).collect()),
            samples: None,
            grid_resolution: None,
        }
    }

    pub fn from_support(k: &SupportBody) -> Self {
        BodyFile {
            dim: 3,
            kind: BodyKind::Support,
            vertices: None,
            samples: Some(k.samples().to_vec()),
            grid_resolution: Some(k.grid().resolution()),
        }
    }

    pub fn from_star(l: &StarBody) -> Self {
        BodyFile {
            dim: 3,
            kind: BodyKind::Star,
            vertices: None,
            samples: Some(l.samples().to_vec()),
            grid_resolution: Some(l.grid().resolution()),
        }
    }

    /// Materializes the body. Sampled kinds build (or reuse) a grid of the stored resolution.
    pub fn load(&self, grid: Option<Arc<SphericalGrid>>) -> Result<AnyBody> {
        if self.dim != 3 {
            return Err(GeomError::UnsupportedDimension(self.dim, "3"));
        }
        match self.kind {
            BodyKind::Polytope => {
                let v = self.vertices.as_ref().ok_or_else(|| GeomError::Format("polytope needs \"vertices\"".into()))?;
                Ok(AnyBody::Polytope(Polytope::from_vertex_lists(self.dim, v)?))
            }
            BodyKind::Support | BodyKind::Star => {
                let s = self.samples.clone().ok_or_else(|| GeomError::Format("sampled body needs \"samples\"".into()))?;
                let r = self.grid_resolution.ok_or_else(|| GeomError::Format("sampled body needs \"grid_resolution\"".into()))?;
                let grid = match grid {
                    Some(g) if g.resolution() == r && g.dim() == 3 => g,
                    _ => Arc::new(sphere::build_grid(3, r)?),
                };
                if self.kind == BodyKind::Support {
                    Ok(AnyBody::Support(SupportBody::from_samples(grid, s)?))
                } else {
                    Ok(AnyBody::Star(StarBody::from_samples(grid, s)?))
                }
            }
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
