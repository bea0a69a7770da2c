//! Finite Borel measures on the sphere with atomic support, and the
//! (mixed) surface area measures of polytopes.

use serde::{Deserialize, Serialize};

use crate::bodies::{minkowski_sum, Polytope};
use crate::error::{GeomError, Result};
use crate::sphere::{gauss_legendre_on, SphericalGrid};
use crate::vec3::{self, Mat3, Vec3};

/// Atoms closer than this angle are merged.
pub const MERGE_ANGLE: f64 = 1e-10;

/// Negative polarization residue below `CLAMP_REL · mass` is set to zero.
pub const CLAMP_REL: f64 = 1e-10;

/// Gauss–Legendre nodes used to discretize each edge arc of `S(P, B)`.
pub const ARC_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub dir: Vec3,
    #[serde(rename = "w")]
    pub weight: f64,
}

/// `Σ w_i δ_{u_i}` on `S²`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct AtomicMeasure {
    dim: usize,
    atoms: Vec<Atom>,
}

#[derive(Serialize, Deserialize)]
struct MeasureFile {
    dim: usize,
    atoms: Vec<MeasureFileAtom>,
}

#[derive(Serialize, Deserialize)]
struct MeasureFileAtom {
    dir: Vec<f64>,
    w: f64,
}

impl AtomicMeasure {
    /// Builds a measure as given, without normalizing or merging directions.
    pub fn from_raw(dim: usize, atoms: Vec<(Vec3, f64)>) -> Self {
        AtomicMeasure { dim, atoms: atoms.into_iter().map(|(dir, weight)| Atom { dir, weight }).collect() }
    }

    /// Normalizes directions, rejects negative or non-finite weights, and merges near-duplicates.
    pub fn new(dim: usize, atoms: Vec<(Vec3, f64)>) -> Result<Self> {
        if dim != 3 {
            return Err(GeomError::UnsupportedDimension(dim, "3"));
        }
        let mut out = Vec::with_capacity(atoms.len());
        for (d, w) in atoms {
            if !(w >= 0.0) || !w.is_finite() {
                return Err(GeomError::InvalidMeasure(format!("atom weight {w} is not a finite nonnegative number")));
            }
            let dir = vec3::normalize(d).ok_or_else(|| GeomError::InvalidMeasure("zero atom direction".into()))?;
            out.push((dir, w));
        }
        Ok(AtomicMeasure::from_raw(dim, out).merged(MERGE_ANGLE))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.weight).sum()
    }

    /// `∫ u dμ(u)`.
    pub fn centroid(&self) -> Vec3 {
        self.atoms.iter().fold([0.0; 3], |s, a| vec3::add(s, vec3::scale(a.dir, a.weight)))
    }

    /// `∫ f dμ`.
    pub fn integrate(&self, f: impl Fn(Vec3) -> f64) -> f64 {
        self.atoms.iter().map(|a| a.weight * f(a.dir)).sum()
    }

    pub fn scaled(&self, s: f64) -> Self {
        AtomicMeasure {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { dir: a.dir, weight: a.weight * s }).collect(),
        }
    }

    pub fn rotated(&self, r: &Mat3) -> Self {
        AtomicMeasure {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| Atom { dir: vec3::mat_vec(r, a.dir), weight: a.weight }).collect(),
        }
    }

    /// `l₁μ + l₂ν` (atoms concatenated, not merged).
    pub fn combine(a: &AtomicMeasure, b: &AtomicMeasure, l1: f64, l2: f64) -> Self {
        let mut atoms: Vec<Atom> = a.atoms.iter().map(|x| Atom { dir: x.dir, weight: l1 * x.weight }).collect();
        atoms.extend(b.atoms.iter().map(|x| Atom { dir: x.dir, weight: l2 * x.weight }));
        AtomicMeasure { dim: a.dim, atoms }
    }

    /// Greedy clustering: each atom joins the first earlier cluster within `angle`.
    pub fn merged(&self, angle: f64) -> Self {
        let mut out: Vec<Atom> = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            match out
                .iter_mut()
                .find(|b| vec3::dot(a.dir, b.dir) > 0.5 && vec3::angle(a.dir, b.dir) <= angle)
            {
                Some(b) => b.weight += a.weight,
                None => out.push(*a),
            }
        }
        AtomicMeasure { dim: self.dim, atoms: out }
    }

    /// Drops tiny negative residue and zero atoms; errors on substantial negative mass.
    pub fn clamp_negligible(&self) -> Result<Self> {
        let scale: f64 = self.atoms.iter().map(|a| a.weight.abs()).sum();
        let tol = CLAMP_REL * scale.max(f64::MIN_POSITIVE);
        let mut atoms = Vec::with_capacity(self.atoms.len());
        for a in &self.atoms {
            if a.weight < -tol {
                return Err(GeomError::InvalidMeasure(format!("negative atom weight {:e}", a.weight)));
            }
            if a.weight > tol {
                atoms.push(*a);
            }
        }
        Ok(AtomicMeasure { dim: self.dim, atoms })
    }

    pub fn to_json(&self) -> Result<String> {
        let f = MeasureFile {
            dim: self.dim,
            atoms: self.atoms.iter().map(|a| MeasureFileAtom { dir: a.dir.to_vec(), w: a.weight }).collect(),
        };
        Ok(serde_json::to_string_pretty(&f)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: MeasureFile = serde_json::from_str(text)?;
        if f.dim != 3 {
            return Err(GeomError::UnsupportedDimension(f.dim, "3"));
        }
        let atoms = f
            .atoms
            .into_iter()
            .map(|a| match a.dir.as_slice() {
                [x, y, z] => Ok(([*x, *y, *z], a.w)),
                _ => Err(GeomError::DimensionMismatch(a.dir.len(), f.dim)),
            })
            .collect::<Result<Vec<_>>>()?;
        AtomicMeasure::new(f.dim, atoms)
    }
}

/// `S₂(P)`: facet normals weighted by facet areas.
pub fn surface_area_measure(p: &Polytope) -> AtomicMeasure {
    AtomicMeasure::from_raw(3, p.facets().iter().map(|f| (f.normal, f.area)).collect()).merged(MERGE_ANGLE)
}

/// The uniform measure on `S²` represented by grid quadrature (`S₂(B)`).
pub fn ball_measure(grid: &SphericalGrid) -> Result<AtomicMeasure> {
    grid.require_dim3()?;
    Ok(AtomicMeasure::from_raw(3, grid.nodes3().zip(grid.weights().iter().copied()).collect()))
}

/// Argument of a mixed surface area measure.
#[derive(Debug, Clone, Copy)]
pub enum MixedArg<'a> {
    Polytope(&'a Polytope),
    /// The unit ball; `S₂(B)` is represented on this grid.
    Ball(&'a SphericalGrid),
}

/// `S(P, B) = ½ Σ_edges ℓ_e · (arc-length on the arc between the adjacent facet normals)`.
pub fn polytope_ball_measure(p: &Polytope, arc_nodes: usize) -> AtomicMeasure {
    let mut atoms = Vec::with_capacity(p.edges().len() * arc_nodes);
    for e in p.edges() {
        let (n1, n2) = (p.facets()[e.facets.0].normal, p.facets()[e.facets.1].normal);
        let theta = vec3::angle(n1, n2);
        if theta <= 0.0 {
            continue;
        }
        let st = theta.sin();
        for (s, w) in gauss_legendre_on(arc_nodes, 0.0, 1.0) {
            let dir = if st > 1e-12 {
                vec3::add(vec3::scale(n1, ((1.0 - s) * theta).sin() / st), vec3::scale(n2, (s * theta).sin() / st))
            } else {
                vec3::normalize(vec3::add(vec3::scale(n1, 1.0 - s), vec3::scale(n2, s))).unwrap_or(n1)
            };
            atoms.push((dir, 0.5 * e.length * theta * w));
        }
    }
    AtomicMeasure::from_raw(3, atoms)
}

/// Mixed surface area measure `S(K, L)` for `n = 3`.
///
/// Polytope pairs use polarization of `S₂(K + L)`; pairs with the ball use
/// the edge-arc formula.
pub fn mixed_surface_area_measure(args: &[MixedArg<'_>]) -> Result<AtomicMeasure> {
    let [a, b] = args else {
        return Err(GeomError::UnsupportedDimension(args.len() + 1, "3 (two body arguments)"));
    };
    match (a, b) {
        (MixedArg::Polytope(k), MixedArg::Polytope(l)) => {
            if std::ptr::eq(*k, *l) || k.same_vertices(l) {
                return Ok(surface_area_measure(k));
            }
            let s = minkowski_sum(k, l, 1.0, 1.0)?;
            let sum = surface_area_measure(&s);
            let (sk, sl) = (surface_area_measure(k), surface_area_measure(l));
            let all = AtomicMeasure::combine(&AtomicMeasure::combine(&sum, &sk, 0.5, -0.5), &sl, 1.0, -0.5);
            all.merged(1e-9).clamp_negligible()
        }
        (MixedArg::Polytope(p), MixedArg::Ball(_)) | (MixedArg::Ball(_), MixedArg::Polytope(p)) => {
            Ok(polytope_ball_measure(p, ARC_NODES))
        }
        (MixedArg::Ball(g), MixedArg::Ball(_)) => ball_measure(g),
    }
}

/// Diagnostics for the Minkowski conditions of a measure.
#[derive(Debug, Clone, Serialize)]
pub struct MinkowskiDiagnostics {
    pub mass: f64,
    /// `|∫ u dμ| / mass`.
    pub relative_centroid: f64,
    /// Smallest eigenvalue of `(1/mass) ∫ u uᵀ dμ`; zero iff concentrated on a great circle.
    pub min_moment_eigenvalue: f64,
    pub problems: Vec<String>,
}

impl MinkowskiDiagnostics {
    pub fn ok(&self) -> bool {
        self.problems.is_empty()
    }
}

/// Relative centroid tolerance for accepting Minkowski data.
pub const CENTROID_TOL: f64 = 1e-8;
/// Lower bound on the normalized second-moment eigenvalue.
pub const SPREAD_TOL: f64 = 1e-8;

/// Checks the Minkowski conditions: positive mass, centroid at the origin,
/// and support not contained in a great subsphere.
pub fn validate_minkowski_data(mu: &AtomicMeasure) -> MinkowskiDiagnostics {
    let mass = mu.mass();
    let mut problems = Vec::new();
    if mu.dim() != 3 {
        problems.push(format!("dimension {} unsupported", mu.dim()));
    }
    if mu.atoms().iter().any(|a| !(a.weight >= 0.0)) {
        problems.push("negative atom weight".into());
    }
    if !(mass > 0.0) {
        problems.push("measure has no mass".into());
        return MinkowskiDiagnostics { mass, relative_centroid: f64::NAN, min_moment_eigenvalue: 0.0, problems };
    }
    let relative_centroid = vec3::norm(mu.centroid()) / mass;
    if relative_centroid > CENTROID_TOL {
        problems.push(format!("centroid is not at the origin (|∫u dμ|/mass = {relative_centroid:.3e})"));
    }
    let mut m = nalgebra::Matrix3::<f64>::zeros();
    for a in mu.atoms() {
        let d = nalgebra::Vector3::from(a.dir);
        m += d * d.transpose() * (a.weight / mass);
    }
    let min_moment_eigenvalue = m.symmetric_eigenvalues().min();
    if min_moment_eigenvalue < SPREAD_TOL {
        problems.push(format!(
            "support lies in a great circle (smallest moment eigenvalue {min_moment_eigenvalue:.3e})"
        ));
    }
    MinkowskiDiagnostics { mass, relative_centroid, min_moment_eigenvalue, problems }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sphere::build_grid;

    #[test]
    fn cube_surface_measure() {
        let c = Polytope::cube(1.0).unwrap();
        let s = surface_area_measure(&c);
        assert_eq!(s.len(), 6);
        assert!(s.atoms().iter().all(|a| (a.weight - 4.0).abs() < 1e-12));
        assert!((s.mass() - 24.0).abs() < 1e-12);
        assert!(vec3::norm(s.centroid()) < 1e-12);
    }

    #[test]
    fn merging_combines_close_atoms() {
        let m = AtomicMeasure::new(3, vec![([0.0, 0.0, 1.0], 1.0), ([0.0, 1e-12, 1.0], 2.0), ([1.0, 0.0, 0.0], 1.0)])
            .unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.atoms()[0].weight - 3.0).abs() < 1e-15);
        assert!(AtomicMeasure::new(3, vec![([0.0, 0.0, 1.0], -1.0)]).is_err());
        assert!(AtomicMeasure::new(4, vec![]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let c = Polytope::cube(0.5).unwrap();
        let s = surface_area_measure(&c);
        let back = AtomicMeasure::from_json(&s.to_json().unwrap()).unwrap();
        assert_eq!(back.len(), s.len());
        assert!((back.mass() - s.mass()).abs() < 1e-15);
    }

    #[test]
    fn mixed_measure_of_equal_bodies_is_surface_measure() {
        let c = Polytope::cube(1.0).unwrap();
        let d = Polytope::cube(1.0).unwrap();
        let m = mixed_surface_area_measure(&[MixedArg::Polytope(&c), MixedArg::Polytope(&d)]).unwrap();
        assert!((m.mass() - 24.0).abs() < 1e-10);
    }

    #[test]
    fn mixed_cube_box() {
        // S(C, B') for the unit-cube C and box B' = [0,2]×[0,1]×[0,1]:
        // V(C, C, B') = (1/3) ∫ h_{B'} dS(C, C) and V(C, B', B') via mixed measure.
        let c = Polytope::cuboid([0.0; 3], [1.0; 3]).unwrap();
        let b = Polytope::cuboid([0.0; 3], [2.0, 1.0, 1.0]).unwrap();
        let m = mixed_surface_area_measure(&[MixedArg::Polytope(&c), MixedArg::Polytope(&b)]).unwrap();
        // facet normals ±e1 get area 1, ±e2, ±e3 get (1 + 2)/2
        assert!((m.mass() - (2.0 + 4.0 * 1.5)).abs() < 1e-10);
        assert!(vec3::norm(m.centroid()) < 1e-10);
    }

    #[test]
    fn polytope_ball_measure_mass() {
        let c = Polytope::cube(1.0).unwrap();
        let m = mixed_surface_area_measure(&[MixedArg::Polytope(&c), MixedArg::Ball(&build_grid(3, 4).unwrap())]).unwrap();
        assert!((m.mass() - 6.0 * std::f64::consts::PI).abs() < 1e-10);
        assert!(vec3::norm(m.centroid()) < 1e-10);
    }

    #[test]
    fn validation() {
        let c = Polytope::cube(1.0).unwrap();
        assert!(validate_minkowski_data(&surface_area_measure(&c)).ok());
        let single = AtomicMeasure::new(3, vec![([0.0, 0.0, 1.0], 1.0)]).unwrap();
        assert!(!validate_minkowski_data(&single).ok());
        let flat = AtomicMeasure::new(3, vec![([0.0, 0.0, 1.0], 1.0), ([0.0, 0.0, -1.0], 1.0)]).unwrap();
        let d = validate_minkowski_data(&flat);
        assert!(!d.ok());
        assert!(d.relative_centroid < 1e-15);
        let g = build_grid(3, 6).unwrap();
        assert!(validate_minkowski_data(&ball_measure(&g).unwrap()).ok());
    }
}
