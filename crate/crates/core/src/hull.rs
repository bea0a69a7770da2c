//! Three-dimensional convex hulls (quickhull) with facet extraction.
//!
//! Points closer than a scale-relative tolerance to a face plane count as
//! lying on it, so coplanar clusters produced by Minkowski sums collapse into
//! single facets. If the tolerance-based construction meets an inconsistent
//! horizon, the input is re-run once with a deterministic 1e-12 relative
//! coordinate perturbation.

use rustc_hash::FxHashMap as HashMap;

use crate::error::{GeomError, Result};
use crate::vec3::{self, Vec3};

const PLANE_EPS_REL: f64 = 1e-10;
const FACET_MERGE_SIN: f64 = 1e-8;
const PERTURB_REL: f64 = 1e-12;

/// A planar facet: possibly several coplanar hull triangles merged.
#[derive(Debug, Clone)]
pub struct Facet {
    pub normal: Vec3,
    pub area: f64,
    /// Support value `normal · x` of the facet plane.
    pub offset: f64,
}

/// A hull edge between two facets, with its total length.
#[derive(Debug, Clone)]
pub struct FacetEdge {
    pub facets: (usize, usize),
    pub length: f64,
}

#[derive(Debug, Clone)]
pub struct Hull {
    /// Indices (into the input slice) of points on the hull, ascending.
    pub vertex_ids: Vec<usize>,
    /// Outward-oriented triangles, indices into the input slice.
    pub triangles: Vec<[usize; 3]>,
    /// Facet index of each triangle.
    pub tri_facet: Vec<usize>,
    pub facets: Vec<Facet>,
    pub edges: Vec<FacetEdge>,
    pub volume: f64,
}

struct Face {
    v: [usize; 3],
    n: Vec3,
    d: f64,
    outside: Vec<usize>,
    alive: bool,
}

fn plane(p: &[Vec3], v: [usize; 3]) -> Option<(Vec3, f64)> {
    let n = vec3::cross(vec3::sub(p[v[1]], p[v[0]]), vec3::sub(p[v[2]], p[v[0]]));
    let n = vec3::normalize(n)?;
    Some((n, vec3::dot(n, p[v[0]])))
}

/// Convex hull of `points`; errors when the points span less than three dimensions.
///
/// Only extreme points are kept as vertices: points lying in the relative
/// interior of a facet or an edge are dropped.
pub fn convex_hull(points: &[Vec3]) -> Result<Hull> {
    let h = convex_hull_raw(points)?;
    let extreme = extreme_vertices(&h);
    if extreme.len() == h.vertex_ids.len() {
        return Ok(h);
    }
    let sub: Vec<Vec3> = extreme.iter().map(|&i| points[i]).collect();
    let mut h = convex_hull_raw(&sub)?;
    for t in &mut h.triangles {
        for i in t.iter_mut() {
            *i = extreme[*i];
        }
    }
    h.vertex_ids = h.vertex_ids.iter().map(|&i| extreme[i]).collect();
    Ok(h)
}

/// Hull vertices whose incident facet normals span ℝ³.
fn extreme_vertices(h: &Hull) -> Vec<usize> {
    let mut incident: HashMap<usize, Vec<usize>> = HashMap::default();
    for (t, v) in h.triangles.iter().enumerate() {
        for &i in v {
            let f = h.tri_facet[t];
            let e = incident.entry(i).or_default();
            if !e.contains(&f) {
                e.push(f);
            }
        }
    }
    let mut out: Vec<usize> = incident
        .into_iter()
        .filter(|(_, fs)| {
            let n: Vec<Vec3> = fs.iter().map(|&f| h.facets[f].normal).collect();
            (0..n.len()).any(|a| {
                (a + 1..n.len()).any(|b| (b + 1..n.len()).any(|c| vec3::det(n[a], n[b], n[c]).abs() > 1e-12))
            })
        })
        .map(|(i, _)| i)
        .collect();
    out.sort_unstable();
    out
}

fn convex_hull_raw(points: &[Vec3]) -> Result<Hull> {
    if points.len() < 4 {
        return Err(GeomError::Degenerate(format!("{} points cannot span a 3-polytope", points.len())));
    }
    if points.iter().any(|p| p.iter().any(|x| !x.is_finite())) {
        return Err(GeomError::InvalidArgument("non-finite point coordinate".into()));
    }
    match quickhull(points) {
        Ok(h) => Ok(h),
        Err(GeomError::Degenerate(m)) => Err(GeomError::Degenerate(m)),
        Err(_) => {
            let scale = bounding_scale(points);
            let jittered: Vec<Vec3> = points
                .iter()
                .enumerate()
                .map(|(i, p)| {
                    let mut q = *p;
                    for (k, x) in q.iter_mut().enumerate() {
                        *x += PERTURB_REL * scale * hash_unit(i as u64 * 3 + k as u64);
                    }
                    q
                })
                .collect();
            let mut h = quickhull(&jittered)?;
            // facet geometry from the original coordinates
            finish(points, &mut h);
            Ok(h)
        }
    }
}

fn hash_unit(x: u64) -> f64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^= z >> 31;
    (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn bounding_scale(points: &[Vec3]) -> f64 {
    let mut lo = [f64::INFINITY; 3];
    let mut hi = [f64::NEG_INFINITY; 3];
    for p in points {
        for k in 0..3 {
            lo[k] = lo[k].min(p[k]);
            hi[k] = hi[k].max(p[k]);
        }
    }
    let ext = (0..3).map(|k| hi[k] - lo[k]).fold(0.0, f64::max);
    let mag = points.iter().flat_map(|p| p.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    ext.max(mag * 1e-3).max(f64::MIN_POSITIVE)
}

fn quickhull(p: &[Vec3]) -> Result<Hull> {
    let scale = bounding_scale(p);
    let eps = PLANE_EPS_REL * scale;

    // initial simplex
    let mut ext = [(0usize, 0usize); 3];
    for (k, e) in ext.iter_mut().enumerate() {
        let (mut lo, mut hi) = (0, 0);
        for (i, q) in p.iter().enumerate() {
            if q[k] < p[lo][k] {
                lo = i;
            }
            if q[k] > p[hi][k] {
                hi = i;
            }
        }
        *e = (lo, hi);
    }
    let (i0, i1) = ext
        .iter()
        .copied()
        .max_by(|a, b| {
            let da = vec3::norm(vec3::sub(p[a.1], p[a.0]));
            let db = vec3::norm(vec3::sub(p[b.1], p[b.0]));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    let axis = vec3::sub(p[i1], p[i0]);
    let axis_len = vec3::norm(axis);
    if axis_len <= eps {
        return Err(GeomError::Degenerate("all points coincide".into()));
    }
    let mut i2 = i0;
    let mut best = 0.0;
    for (i, q) in p.iter().enumerate() {
        let d = vec3::norm(vec3::cross(axis, vec3::sub(*q, p[i0]))) / axis_len;
        if d > best {
            best = d;
            i2 = i;
        }
    }
    if best <= eps {
        return Err(GeomError::Degenerate("points are collinear".into()));
    }
    let (n0, d0) = plane(p, [i0, i1, i2]).ok_or_else(|| GeomError::Degenerate("collinear seed".into()))?;
    let mut i3 = i0;
    best = 0.0;
    for (i, q) in p.iter().enumerate() {
        let d = (vec3::dot(n0, *q) - d0).abs();
        if d > best {
            best = d;
            i3 = i;
        }
    }
    if best <= eps {
        return Err(GeomError::Degenerate("points are coplanar".into()));
    }

    let mut faces: Vec<Face> = Vec::new();
    let mut edge_map: HashMap<(usize, usize), usize> = HashMap::default();
    // Per-face visibility mark: the eye index it was last tested against, and the outcome.
    let mut tested: Vec<(usize, bool)> = Vec::new();
    let seed = [i0, i1, i2, i3];
    let centroid = vec3::scale(
        seed.iter().fold([0.0; 3], |acc, &i| vec3::add(acc, p[i])),
        0.25,
    );
    for tri in [[i0, i1, i2], [i0, i1, i3], [i0, i2, i3], [i1, i2, i3]] {
        let (n, d) = plane(p, tri).unwrap();
        let v = if vec3::dot(n, centroid) - d > 0.0 { [tri[0], tri[2], tri[1]] } else { tri };
        let (n, d) = plane(p, v).unwrap();
        add_face(&mut faces, &mut edge_map, v, n, d)?;
    }
    for (i, q) in p.iter().enumerate() {
        if seed.contains(&i) {
            continue;
        }
        assign(&mut faces, 0..4, i, *q, eps);
    }

    let mut stack: Vec<usize> = (0..faces.len()).collect();
    while let Some(fi) = stack.pop() {
        if !faces[fi].alive || faces[fi].outside.is_empty() {
            continue;
        }
        let eye = *faces[fi]
            .outside
            .iter()
            .max_by(|&&a, &&b| {
                let da = vec3::dot(faces[fi].n, p[a]);
                let db = vec3::dot(faces[fi].n, p[b]);
                da.partial_cmp(&db).unwrap()
            })
            .unwrap();
        let ep = p[eye];

        // visible region
        tested.resize(faces.len(), (usize::MAX, false));
        let mut visible = vec![fi];
        tested[fi] = (eye, true);
        let mut k = 0;
        while k < visible.len() {
            let f = visible[k];
            k += 1;
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                let g = *edge_map
                    .get(&(b, a))
                    .ok_or_else(|| GeomError::Format("hull adjacency broken".into()))?;
                if tested[g].0 == eye {
                    continue;
                }
                let vis = vec3::dot(faces[g].n, ep) - faces[g].d > eps;
                tested[g] = (eye, vis);
                if vis {
                    visible.push(g);
                }
            }
        }
        let mut horizon = Vec::new();
        for &f in &visible {
            let v = faces[f].v;
            for e in 0..3 {
                let (a, b) = (v[e], v[(e + 1) % 3]);
                let g = edge_map[&(b, a)];
                if !tested[g].1 {
                    horizon.push((a, b));
                }
            }
        }
        let mut orphans = Vec::new();
        for &f in &visible {
            faces[f].alive = false;
            let v = faces[f].v;
            for e in 0..3 {
                edge_map.remove(&(v[e], v[(e + 1) % 3]));
            }
            orphans.append(&mut faces[f].outside);
        }
        let first_new = faces.len();
        for &(a, b) in &horizon {
            let v = [a, b, eye];
            let (n, d) = plane(p, v).ok_or_else(|| GeomError::Format("degenerate cone face".into()))?;
            add_face(&mut faces, &mut edge_map, v, n, d)?;
        }
        for &q in &orphans {
            if q != eye {
                let end = faces.len();
                assign(&mut faces, first_new..end, q, p[q], eps);
            }
        }
        stack.extend(first_new..faces.len());
    }

    let triangles: Vec<[usize; 3]> = faces.iter().filter(|f| f.alive).map(|f| f.v).collect();
    let mut h = Hull {
        vertex_ids: Vec::new(),
        triangles,
        tri_facet: Vec::new(),
        facets: Vec::new(),
        edges: Vec::new(),
        volume: 0.0,
    };
    finish(p, &mut h);
    if !(h.volume > 0.0) {
        return Err(GeomError::Degenerate("zero volume hull".into()));
    }
    Ok(h)
}

fn add_face(
    faces: &mut Vec<Face>,
    edge_map: &mut HashMap<(usize, usize), usize>,
    v: [usize; 3],
    n: Vec3,
    d: f64,
) -> Result<()> {
    let id = faces.len();
    for e in 0..3 {
        if edge_map.insert((v[e], v[(e + 1) % 3]), id).is_some() {
            return Err(GeomError::Format("non-manifold horizon".into()));
        }
    }
    faces.push(Face { v, n, d, outside: Vec::new(), alive: true });
    Ok(())
}

fn assign(faces: &mut [Face], range: std::ops::Range<usize>, i: usize, q: Vec3, eps: f64) {
    let mut best = eps;
    let mut target = None;
    for f in range {
        if !faces[f].alive {
            continue;
        }
        let d = vec3::dot(faces[f].n, q) - faces[f].d;
        if d > best {
            best = d;
            target = Some(f);
        }
    }
    if let Some(f) = target {
        faces[f].outside.push(i);
    }
}

/// Groups triangles into facets and computes facet and edge geometry.
fn finish(p: &[Vec3], h: &mut Hull) {
    let tris = &h.triangles;
    let mut tri_of_edge: HashMap<(usize, usize), usize> = HashMap::with_capacity_and_hasher(tris.len() * 3, Default::default());
    for (t, v) in tris.iter().enumerate() {
        for e in 0..3 {
            tri_of_edge.insert((v[e], v[(e + 1) % 3]), t);
        }
    }
    let area_vec: Vec<Vec3> = tris
        .iter()
        .map(|v| vec3::scale(vec3::cross(vec3::sub(p[v[1]], p[v[0]]), vec3::sub(p[v[2]], p[v[0]])), 0.5))
        .collect();
    let unit: Vec<Vec3> = area_vec.iter().map(|a| vec3::normalize(*a).unwrap_or([0.0; 3])).collect();

    // union-find over coplanar neighbours
    let mut parent: Vec<usize> = (0..tris.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for (t, v) in tris.iter().enumerate() {
        for e in 0..3 {
            if let Some(&s) = tri_of_edge.get(&(v[(e + 1) % 3], v[e])) {
                let coplanar = vec3::dot(unit[t], unit[s]) > 0.0
                    && vec3::norm(vec3::cross(unit[t], unit[s])) < FACET_MERGE_SIN;
                let degenerate = unit[t] == [0.0; 3] || unit[s] == [0.0; 3];
                if coplanar || degenerate {
                    let (a, b) = (find(&mut parent, t), find(&mut parent, s));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut facet_of_root: HashMap<usize, usize> = HashMap::default();
    let mut tri_facet = vec![0; tris.len()];
    let mut sums: Vec<Vec3> = Vec::new();
    for t in 0..tris.len() {
        let r = find(&mut parent, t);
        let f = *facet_of_root.entry(r).or_insert_with(|| {
            sums.push([0.0; 3]);
            sums.len() - 1
        });
        tri_facet[t] = f;
        sums[f] = vec3::add(sums[f], area_vec[t]);
    }
    let mut facets: Vec<Facet> = sums
        .iter()
        .map(|s| {
            let n = vec3::normalize(*s).unwrap_or([0.0, 0.0, 1.0]);
            Facet { normal: n, area: vec3::dot(n, *s), offset: f64::NEG_INFINITY }
        })
        .collect();
    for (t, v) in tris.iter().enumerate() {
        let f = &mut facets[tri_facet[t]];
        for &i in v {
            f.offset = f.offset.max(vec3::dot(f.normal, p[i]));
        }
    }

    // Edges in order of first appearance, which is deterministic.
    let mut edge_index: HashMap<(usize, usize), usize> = HashMap::default();
    let mut edges: Vec<FacetEdge> = Vec::new();
    for (t, v) in tris.iter().enumerate() {
        for e in 0..3 {
            let (a, b) = (v[e], v[(e + 1) % 3]);
            if let Some(&s) = tri_of_edge.get(&(b, a)) {
                let (fa, fb) = (tri_facet[t], tri_facet[s]);
                if fa < fb {
                    let len = vec3::norm(vec3::sub(p[a], p[b]));
                    let k = *edge_index.entry((fa, fb)).or_insert_with(|| {
                        edges.push(FacetEdge { facets: (fa, fb), length: 0.0 });
                        edges.len() - 1
                    });
                    edges[k].length += len;
                }
            }
        }
    }

    let mut on_hull = vec![false; p.len()];
    for v in tris {
        for &i in v {
            on_hull[i] = true;
        }
    }
    let ids: Vec<usize> = (0..p.len()).filter(|&i| on_hull[i]).collect();
    let origin = ids.iter().fold([0.0; 3], |acc, &i| vec3::add(acc, p[i]));
    let origin = vec3::scale(origin, 1.0 / ids.len().max(1) as f64);
    let volume = tris
        .iter()
        .map(|v| vec3::det(vec3::sub(p[v[0]], origin), vec3::sub(p[v[1]], origin), vec3::sub(p[v[2]], origin)))
        .sum::<f64>()
        / 6.0;

    h.vertex_ids = ids;
    h.tri_facet = tri_facet;
    h.facets = facets;
    h.edges = edges;
    h.volume = volume;
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cube_points() -> Vec<Vec3> {
        let mut v = Vec::new();
        for &x in &[-1.0, 1.0] {
            for &y in &[-1.0, 1.0] {
                for &z in &[-1.0, 1.0] {
                    v.push([x, y, z]);
                }
            }
        }
        v
    }

    #[test]
    fn cube_has_six_facets() {
        let h = convex_hull(&cube_points()).unwrap();
        assert_eq!(h.facets.len(), 6);
        assert_eq!(h.vertex_ids.len(), 8);
        assert_eq!(h.edges.len(), 12);
        assert!((h.volume - 8.0).abs() < 1e-12);
        for f in &h.facets {
            assert!((f.area - 4.0).abs() < 1e-12);
            assert!((f.offset - 1.0).abs() < 1e-12);
        }
        for e in &h.edges {
            assert!((e.length - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn interior_and_coplanar_points_are_dropped() {
        let mut pts = cube_points();
        pts.push([0.0, 0.0, 0.0]);
        pts.push([0.3, -0.2, 0.1]);
        pts.push([1.0, 0.0, 0.0]);
        pts.push([1.0, 0.5, 1.0]);
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.facets.len(), 6);
        assert!((h.volume - 8.0).abs() < 1e-12);
        assert!(h.vertex_ids.iter().all(|&i| i < 8));
    }

    #[test]
    fn minkowski_grid_of_cube_is_a_box() {
        // every pairwise sum of two cubes: many coplanar points
        let c = cube_points();
        let mut pts = Vec::new();
        for a in &c {
            for b in &c {
                pts.push(vec3::add(*a, vec3::scale(*b, 0.5)));
            }
        }
        let h = convex_hull(&pts).unwrap();
        assert_eq!(h.facets.len(), 6);
        assert!((h.volume - 27.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_inputs_are_rejected() {
        let flat = vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [1.0, 1.0, 0.0]];
        assert!(matches!(convex_hull(&flat), Err(GeomError::Degenerate(_))));
        assert!(convex_hull(&flat[..3]).is_err());
    }

    #[test]
    fn closure_of_area_vectors() {
        let pts: Vec<Vec3> = (0..200)
            .map(|i| {
                let i = i as u64;
                [hash_unit(3 * i), hash_unit(3 * i + 1), hash_unit(3 * i + 2)]
            })
            .collect();
        let h = convex_hull(&pts).unwrap();
        let s = h.facets.iter().fold([0.0; 3], |acc, f| vec3::add(acc, vec3::scale(f.normal, f.area)));
        assert!(vec3::norm(s) < 1e-12);
        // all points inside
        for q in &pts {
            for f in &h.facets {
                assert!(vec3::dot(f.normal, *q) - f.offset < 1e-9);
            }
        }
    }
}
