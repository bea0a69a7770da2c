//! The discrete Minkowski problem: reconstructing a polytope from the
//! atomic surface area measure `Σ aᵢ δ_{uᵢ}`, and Blaschke addition.
//!
//! The solver minimizes the convex functional
//! `F(h) = Σ aᵢ hᵢ − (M/3) log V(P(h))`, `P(h) = ∩ {x·uᵢ ≤ hᵢ}`, `M = Σ aᵢ`,
//! whose minimizers are exactly the polytopes with facet areas proportional
//! to `aᵢ`. Equivalently it maximizes `V(P(h))` on the slice `Σ aᵢ hᵢ = const`.
//! The gradient of `V` in `h` is the vector of facet areas and its Hessian is
//! assembled exactly from edge lengths and dihedral angles, so the iteration
//! is a damped Newton method with backtracking line search. A final
//! homogeneity rescaling matches the areas themselves, not only their ratios.

use nalgebra::{DMatrix, DVector};

use crate::bodies::Polytope;
use crate::error::{GeomError, Result};
use crate::measures::{surface_area_measure, validate_minkowski_data, AtomicMeasure};
use crate::vec3::{self, Vec3};

pub const DEFAULT_TOLERANCE: f64 = 1e-6;
pub const DEFAULT_MAX_ITERS: usize = 10_000;

/// Atoms lighter than this fraction of the total mass are ignored when
/// measuring the relative area error (their absolute error still counts
/// against this floor).
const AREA_FLOOR_REL: f64 = 1e-9;

/// Levenberg–Marquardt damping range, relative to the typical curvature.
const MIN_DAMPING: f64 = 1e-12;
const MAX_DAMPING: f64 = 1e12;

/// Extra Newton steps taken once the tolerance is met, and the residual at
/// which they stop early.
const POLISH_STEPS: usize = 8;
const POLISH_FLOOR: f64 = 1e-13;

/// Relative size of `F` below which decreases are indistinguishable from rounding.
const OBJECTIVE_NOISE: f64 = 1e-12;

/// Input of [`solve_minkowski`].
#[derive(Debug, Clone)]
pub struct MinkowskiProblem {
    pub measure: AtomicMeasure,
    /// Target relative facet-area error.
    pub tolerance: f64,
    pub max_iters: usize,
}

impl MinkowskiProblem {
    pub fn new(measure: AtomicMeasure) -> Self {
        MinkowskiProblem { measure, tolerance: DEFAULT_TOLERANCE, max_iters: DEFAULT_MAX_ITERS }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_max_iters(mut self, max_iters: usize) -> Self {
        self.max_iters = max_iters;
        self
    }
}

/// A solved Minkowski problem with convergence diagnostics.
#[derive(Debug, Clone)]
pub struct MinkowskiSolution {
    /// Steiner-centered solution polytope.
    pub polytope: Polytope,
    pub iterations: usize,
    /// Maximum relative facet-area error of the returned polytope.
    pub residual: f64,
    /// Value of `V(P(h))` normalized by `(Σ aᵢhᵢ)³` after every accepted step.
    pub normalized_volumes: Vec<f64>,
}

/// `P(h)` described combinatorially: facet areas per atom, edges between atoms.
struct State {
    h: Vec<f64>,
    vertices: Vec<Vec3>,
    volume: f64,
    areas: Vec<f64>,
    /// `(i, j, ℓ_ij, θ_ij)` for every edge between the facets with normals `uᵢ` and `uⱼ`.
    edges: Vec<(usize, usize, f64, f64)>,
    objective: f64,
}

struct Solver<'a> {
    dirs: Vec<Vec3>,
    weights: Vec<f64>,
    mass: f64,
    /// Orthonormal basis of the translation directions in `h`-space.
    translations: Vec<DVector<f64>>,
    problem: &'a MinkowskiProblem,
}

impl<'a> Solver<'a> {
    fn new(dirs: Vec<Vec3>, weights: Vec<f64>, problem: &'a MinkowskiProblem) -> Self {
        let mut translations: Vec<DVector<f64>> = Vec::with_capacity(3);
        for k in 0..3 {
            let mut t = DVector::from_iterator(dirs.len(), dirs.iter().map(|u| u[k]));
            for b in &translations {
                let c = b.dot(&t);
                t.axpy(-c, b, 1.0);
            }
            let norm = t.norm();
            if norm > 0.0 {
                translations.push(t / norm);
            }
        }
        let mass = weights.iter().sum();
        Solver { dirs, weights, mass, translations, problem }
    }

    /// Builds `P(h)` by clipping: vertices are continuous functions of `h`,
    /// so areas, edges and volume stay mutually consistent even where
    /// `P(h)` has non-simple vertices and the facet structure is degenerate.
    fn evaluate(&self, h: Vec<f64>) -> Option<State> {
        if h.iter().any(|x| !(*x > 0.0) || !x.is_finite()) {
            return None;
        }
        let faces = clip_halfspaces(&self.dirs, &h)?;
        let n = self.dirs.len();
        let mut areas = vec![0.0; n];
        let mut edges = Vec::new();
        let mut vertices = Vec::new();
        for f in &faces {
            let m = f.verts.len();
            let mut twice = [0.0; 3];
            for k in 0..m {
                let (a, b) = (f.verts[k], f.verts[(k + 1) % m]);
                twice = vec3::add(twice, vec3::cross(a, b));
                let j = f.across[k];
                if f.id < j {
                    let len = vec3::norm(vec3::sub(b, a));
                    if len > 0.0 {
                        edges.push((f.id, j, len, vec3::angle(self.dirs[f.id], self.dirs[j])));
                    }
                }
            }
            areas[f.id] = (0.5 * vec3::dot(twice, self.dirs[f.id])).max(0.0);
            vertices.extend_from_slice(&f.verts);
        }
        let volume: f64 = h.iter().zip(&areas).map(|(x, a)| x * a).sum::<f64>() / 3.0;
        if !(volume > 0.0) {
            return None;
        }
        let linear: f64 = self.weights.iter().zip(&h).map(|(a, x)| a * x).sum();
        let objective = linear - self.mass / 3.0 * volume.ln();
        Some(State { h, vertices, volume, areas, edges, objective })
    }

    fn residual(&self, s: &State) -> f64 {
        let total: f64 = s.areas.iter().sum();
        let floor = AREA_FLOOR_REL * self.mass;
        self.weights
            .iter()
            .zip(&s.areas)
            .map(|(a, area)| (area * self.mass / total - a).abs() / a.max(floor))
            .fold(0.0, f64::max)
    }

    fn gradient(&self, s: &State) -> DVector<f64> {
        let c = self.mass / (3.0 * s.volume);
        DVector::from_iterator(self.dirs.len(), self.weights.iter().zip(&s.areas).map(|(a, area)| a - c * area))
    }

    /// `∇²F = (M/3)(A Aᵀ/V² − ∇²V/V)`, with `∂²V/∂hᵢ∂hⱼ = ℓᵢⱼ/sin θᵢⱼ` and
    /// `∂²V/∂hᵢ² = −Σⱼ ℓᵢⱼ cot θᵢⱼ`.
    fn hessian(&self, s: &State) -> DMatrix<f64> {
        let n = self.dirs.len();
        let hv = volume_hessian(n, &s.edges);
        let a = DVector::from_column_slice(&s.areas);
        let v = s.volume;
        (&a * a.transpose() / (v * v) - hv / v) * (self.mass / 3.0)
    }

    /// Translates `P(h)` so its vertex centroid sits at the origin and
    /// rescales it onto the slice `Σ aᵢhᵢ = M`, where `F` equals its minimum
    /// over dilates; `F` decreasing then means the normalized volume grows.
    fn normalize(&self, s: State) -> State {
        let verts = &s.vertices;
        let c = verts.iter().fold([0.0; 3], |acc, v| vec3::add(acc, *v));
        let c = vec3::scale(c, 1.0 / verts.len() as f64);
        let mut h: Vec<f64> = s.h.iter().zip(&self.dirs).map(|(x, u)| x - vec3::dot(*u, c)).collect();
        let linear: f64 = self.weights.iter().zip(&h).map(|(a, x)| a * x).sum();
        for x in &mut h {
            *x *= self.mass / linear;
        }
        self.evaluate(h).unwrap_or(s)
    }

    fn normalized_volume(&self, s: &State) -> f64 {
        let linear: f64 = self.weights.iter().zip(&s.h).map(|(a, x)| a * x).sum();
        s.volume / (linear / self.mass).powi(3)
    }

    /// Removes the components along `(uᵢ·e_k)ᵢ`, the translations of `P(h)`,
    /// which leave `F` invariant and span the kernel of its Hessian.
    fn project_out_translations(&self, v: &mut DVector<f64>) {
        for t in &self.translations {
            let c = t.dot(v);
            v.axpy(-c, t, 1.0);
        }
    }

    /// Damped Newton step `−(∇²F + λ·c·I)⁻¹ ∇F` with `c` the median
    /// positive Hessian diagonal, taken modulo translations.
    fn damped_step(&self, s: &State, g: &DVector<f64>, lambda: f64) -> DVector<f64> {
        let n = self.dirs.len();
        let mut hess = self.hessian(s);
        let mut positive: Vec<f64> = (0..n).map(|i| hess[(i, i)]).filter(|d| *d > 0.0).collect();
        positive.sort_by(f64::total_cmp);
        let typical = positive.get(positive.len() / 2).copied().unwrap_or(1.0);
        // Atoms whose facet is currently absent have an empty Hessian row;
        // give them the typical curvature so their step stays bounded.
        for i in 0..n {
            if s.areas[i] <= 0.0 {
                hess[(i, i)] = hess[(i, i)].max(typical);
            }
        }
        let mut mu = lambda.max(MIN_DAMPING) * typical;
        let mut step = loop {
            let mut m = hess.clone();
            for i in 0..n {
                m[(i, i)] += mu;
            }
            if let Some(ch) = m.cholesky() {
                break -ch.solve(g);
            }
            if mu > 1e12 * typical {
                break -g / typical;
            }
            mu *= 100.0;
        };
        self.project_out_translations(&mut step);
        step
    }

    fn solve(&self) -> Result<MinkowskiSolution> {
        let n = self.dirs.len();
        let start = self
            .evaluate(vec![1.0; n])
            .ok_or_else(|| GeomError::Degenerate("initial polytope P(1) is unbounded or empty".into()))?;
        let mut state = self.normalize(start);
        let mut residual = self.residual(&state);
        let mut history = vec![self.normalized_volume(&state)];
        let mut iterations = 0;
        let mut lambda = MIN_DAMPING;
        // After the tolerance is met, Newton steps are nearly free and the
        // support numbers of tiny facets are still poorly resolved, so keep
        // polishing until the residual stops improving.
        let mut polishing = 0;
        loop {
            if residual <= self.problem.tolerance {
                if polishing >= POLISH_STEPS || residual <= POLISH_FLOOR {
                    break;
                }
                polishing += 1;
            }
            if iterations >= self.problem.max_iters {
                if residual <= self.problem.tolerance {
                    break;
                }
                return Err(GeomError::NoConvergence { iterations, residual });
            }
            iterations += 1;
            let mut g = self.gradient(&state);
            self.project_out_translations(&mut g);
            let mut accepted = None;
            while lambda <= MAX_DAMPING {
                let step = self.damped_step(&state, &g, lambda);
                let slope = g.dot(&step);
                let h: Vec<f64> = state.h.iter().zip(step.iter()).map(|(x, d)| x + d).collect();
                if let Some(trial) = self.evaluate(h) {
                    let decreased = trial.objective <= state.objective + 1e-4 * slope.min(0.0);
                    // Once the predicted decrease drowns in the rounding noise
                    // of F, the gradient norm is the only reliable merit.
                    let noisy = -slope <= OBJECTIVE_NOISE * state.objective.abs().max(1.0) && {
                        let mut gt = self.gradient(&trial);
                        self.project_out_translations(&mut gt);
                        gt.norm() < g.norm()
                    };
                    if decreased || noisy {
                        accepted = Some(trial);
                        break;
                    }
                }
                lambda *= 10.0;
            }
            let Some(next) = accepted else {
                if residual <= self.problem.tolerance {
                    break;
                }
                return Err(GeomError::NoConvergence { iterations, residual });
            };
            lambda = (lambda / 100.0).max(MIN_DAMPING);
            let next = self.normalize(next);
            let r = self.residual(&next);
            if residual <= self.problem.tolerance && r >= residual {
                break;
            }
            state = next;
            history.push(self.normalized_volume(&state));
            residual = r;
        }
        let total: f64 = state.areas.iter().sum();
        let scaled = Polytope::from_points(&state.vertices)?.dilate((self.mass / total).sqrt())?;
        let polytope = scaled.steiner_centered()?;
        Ok(MinkowskiSolution { polytope, iterations, residual, normalized_volumes: history })
    }
}

/// A facet of a polytope under construction: its vertices in
/// counterclockwise order about the outward normal and, for every edge
/// `verts[k] → verts[k+1]`, the facet on its other side.
struct Face {
    id: usize,
    verts: Vec<Vec3>,
    across: Vec<usize>,
}

/// Facets of `∩ {x·dirs[i] ≤ h[i]}` obtained by clipping a large box one
/// halfspace at a time. Facet ids index `dirs`; `None` if the intersection
/// is empty or not contained in the box.
fn clip_halfspaces(dirs: &[Vec3], h: &[f64]) -> Option<Vec<Face>> {
    let n = dirs.len();
    let reach = 1e3 * h.iter().copied().fold(0.0, f64::max);
    let mut faces = box_faces(n, reach);
    for (p, (&u, &offset)) in dirs.iter().zip(h).enumerate() {
        let mut cap: Vec<(Vec3, usize)> = Vec::new();
        let mut kept = Vec::with_capacity(faces.len() + 1);
        for f in faces {
            let side: Vec<f64> = f.verts.iter().map(|v| vec3::dot(*v, u) - offset).collect();
            if side.iter().all(|s| *s <= 0.0) {
                kept.push(f);
                continue;
            }
            if side.iter().all(|s| *s > 0.0) {
                continue;
            }
            let m = f.verts.len();
            let mut verts = Vec::with_capacity(m + 1);
            let mut across = Vec::with_capacity(m + 1);
            for k in 0..m {
                let (a, b) = (f.verts[k], f.verts[(k + 1) % m]);
                let (sa, sb) = (side[k], side[(k + 1) % m]);
                if sa <= 0.0 {
                    verts.push(a);
                    across.push(f.across[k]);
                }
                if (sa <= 0.0) != (sb <= 0.0) {
                    let x = vec3::add(a, vec3::scale(vec3::sub(b, a), sa / (sa - sb)));
                    verts.push(x);
                    if sa <= 0.0 {
                        across.push(p);
                    } else {
                        across.push(f.across[k]);
                        cap.push((x, f.id));
                    }
                }
            }
            if verts.len() >= 3 {
                kept.push(Face { id: f.id, verts, across });
            }
        }
        if kept.is_empty() {
            return None;
        }
        if cap.len() >= 3 {
            // The new facet is convex, so ordering its corners by angle about
            // their centroid recovers the boundary cycle.
            let (e1, _) = vec3::orthonormal_complement(u);
            let e2 = vec3::cross(u, e1);
            let c = vec3::scale(cap.iter().fold([0.0; 3], |acc, (x, _)| vec3::add(acc, *x)), 1.0 / cap.len() as f64);
            let angle = |x: &Vec3| {
                let d = vec3::sub(*x, c);
                vec3::dot(d, e2).atan2(vec3::dot(d, e1))
            };
            cap.sort_by(|a, b| angle(&a.0).total_cmp(&angle(&b.0)));
            kept.push(Face { id: p, verts: cap.iter().map(|e| e.0).collect(), across: cap.iter().map(|e| e.1).collect() });
        }
        faces = kept;
    }
    if faces.iter().any(|f| f.id >= n) {
        return None;
    }
    Some(faces)
}

/// The six facets of `[-r, r]³`, with ids `n..n+6` for `e₀, −e₀, e₁, …`.
fn box_faces(n: usize, r: f64) -> Vec<Face> {
    let axis = |k: usize, sign: f64| {
        let mut e = [0.0; 3];
        e[k] = sign;
        e
    };
    let id = |k: usize, sign: f64| n + 2 * k + usize::from(sign < 0.0);
    let mut faces = Vec::with_capacity(6);
    for k in 0..3 {
        for sign in [1.0, -1.0] {
            // (e1, e2, normal) is right-handed.
            let (k1, k2) = if sign > 0.0 { ((k + 1) % 3, (k + 2) % 3) } else { ((k + 2) % 3, (k + 1) % 3) };
            let corner = |a: f64, b: f64| {
                vec3::scale(vec3::add(vec3::add(axis(k, sign), axis(k1, a)), axis(k2, b)), r)
            };
            faces.push(Face {
                id: id(k, sign),
                verts: vec![corner(1.0, 1.0), corner(-1.0, 1.0), corner(-1.0, -1.0), corner(1.0, -1.0)],
                across: vec![id(k2, 1.0), id(k1, -1.0), id(k2, -1.0), id(k1, 1.0)],
            });
        }
    }
    faces
}

/// Exact Hessian of `h ↦ V(P(h))` for the given facet adjacency.
fn volume_hessian(n: usize, edges: &[(usize, usize, f64, f64)]) -> DMatrix<f64> {
    let mut hv = DMatrix::<f64>::zeros(n, n);
    for &(i, j, len, theta) in edges {
        let off = len / theta.sin();
        hv[(i, j)] += off;
        hv[(j, i)] += off;
        let d = len / theta.tan();
        hv[(i, i)] -= d;
        hv[(j, j)] -= d;
    }
    hv
}

/// Solves the Minkowski problem and reports convergence diagnostics.
pub fn solve_minkowski_detailed(problem: &MinkowskiProblem) -> Result<MinkowskiSolution> {
    let diag = validate_minkowski_data(&problem.measure);
    if !diag.ok() {
        return Err(GeomError::InvalidMeasure(diag.problems.join("; ")));
    }
    if !(problem.tolerance > 0.0) {
        return Err(GeomError::InvalidArgument(format!("tolerance must be positive, got {}", problem.tolerance)));
    }
    let atoms: Vec<_> = problem.measure.atoms().iter().filter(|a| a.weight > 0.0).collect();
    let solver = Solver::new(atoms.iter().map(|a| a.dir).collect(), atoms.iter().map(|a| a.weight).collect(), problem);
    solver.solve()
}

/// The Steiner-centered polytope whose surface area measure is `problem.measure`.
pub fn solve_minkowski(problem: &MinkowskiProblem) -> Result<Polytope> {
    Ok(solve_minkowski_detailed(problem)?.polytope)
}

/// Blaschke combination `λ₁·K # λ₂·L`: the polytope with surface area
/// measure `λ₁S₂(K) + λ₂S₂(L)`, Steiner-centered.
pub fn blaschke_sum(k: &Polytope, l: &Polytope, l1: f64, l2: f64) -> Result<Polytope> {
    blaschke_sum_with(k, l, l1, l2, DEFAULT_TOLERANCE)
}

pub fn blaschke_sum_with(k: &Polytope, l: &Polytope, l1: f64, l2: f64, tolerance: f64) -> Result<Polytope> {
    if !(l1 >= 0.0 && l2 >= 0.0) || !(l1 + l2 > 0.0) {
        return Err(GeomError::InvalidArgument(format!(
            "Blaschke coefficients must be nonnegative with a positive sum, got ({l1}, {l2})"
        )));
    }
    let mu = blaschke_measure(k, l, l1, l2)?;
    solve_minkowski(&MinkowskiProblem::new(mu).with_tolerance(tolerance))
}

/// `λ₁S₂(K) + λ₂S₂(L)` with coincident normals merged.
pub fn blaschke_measure(k: &Polytope, l: &Polytope, l1: f64, l2: f64) -> Result<AtomicMeasure> {
    let mu = AtomicMeasure::combine(&surface_area_measure(k), &surface_area_measure(l), l1, l2);
    let atoms = mu.atoms().iter().filter(|a| a.weight > 0.0).map(|a| (a.dir, a.weight)).collect();
    AtomicMeasure::new(3, atoms)
}
