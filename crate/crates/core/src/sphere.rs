//! Spherical grids, quadrature, and zonal convolution.
//!
//! The pole `e` is the last coordinate axis. Grids are products of
//! Gauss–Legendre rules in the polar variable with uniform azimuths, which
//! makes every grid symmetric under `u -> -u`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::measures::AtomicMeasure;
use crate::vec3::{self, Vec3};

/// Volume of the unit ball in `n` dimensions.
pub fn kappa(n: usize) -> f64 {
    match n {
        0 => 1.0,
        1 => 2.0,
        _ => 2.0 * PI / n as f64 * kappa(n - 2),
    }
}

/// Surface area of `S^{n-1}`.
pub fn sphere_area(n: usize) -> f64 {
    n as f64 * kappa(n)
}

/// A point on the unit sphere.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `coords`; rejects the zero vector.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = coords.iter().map(|x| x * x).sum::<f64>().sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(GeomError::InvalidArgument("cannot normalize zero or non-finite vector".into()));
        }
        Ok(UnitVector(coords.into_iter().map(|x| x / n).collect()))
    }

    pub fn from_vec3(v: Vec3) -> Result<Self> {
        Self::new(v.to_vec())
    }

    /// The pole `e` of `S^{dim-1}`.
    pub fn pole(dim: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[dim - 1] = 1.0;
        UnitVector(c)
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn to_vec3(&self) -> Result<Vec3> {
        match self.0.as_slice() {
            [x, y, z] => Ok([*x, *y, *z]),
            _ => Err(GeomError::UnsupportedDimension(self.0.len(), "3")),
        }
    }
}

/// Gauss–Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![2.0]);
    }
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

/// Gauss–Legendre rule mapped to `[a, b]`.
pub fn gauss_legendre_on(n: usize, a: f64, b: f64) -> Vec<(f64, f64)> {
    let (x, w) = gauss_legendre(n);
    let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
    x.iter().zip(&w).map(|(xi, wi)| (c + h * xi, h * wi)).collect()
}

/// Ring structure of a three-dimensional product grid.
#[derive(Debug, Clone)]
struct Rings {
    t: Vec<f64>,
    azimuths: usize,
}

/// Quadrature grid on `S^{dim-1}`.
#[derive(Debug, Clone)]
pub struct SphericalGrid {
    dim: usize,
    resolution: usize,
    coords: Vec<f64>,
    weights: Vec<f64>,
    rings: Option<Rings>,
}

/// Builds the product quadrature grid on `S^{dim-1}`.
///
/// For `dim = 3` the grid has `2·resolution` Gauss–Legendre rings in `u·e`
/// and `4·resolution` azimuths per ring.
pub fn build_grid(dim: usize, resolution: usize) -> Result<SphericalGrid> {
    if dim < 3 {
        return Err(GeomError::UnsupportedDimension(dim, ">= 3"));
    }
    if resolution == 0 {
        return Err(GeomError::InvalidArgument("grid resolution must be >= 1".into()));
    }
    if dim == 3 {
        // Gauss–Legendre on each hemisphere separately, so the equator is a
        // panel boundary and fields with a kink there integrate exactly.
        let (mut t, mut wt): (Vec<f64>, Vec<f64>) = gauss_legendre_on(resolution, -1.0, 0.0).into_iter().unzip();
        let (t2, w2): (Vec<f64>, Vec<f64>) = gauss_legendre_on(resolution, 0.0, 1.0).into_iter().unzip();
        t.extend(t2);
        wt.extend(w2);
        let naz = 4 * resolution;
        let dphi = 2.0 * PI / naz as f64;
        let mut coords = Vec::with_capacity(3 * t.len() * naz);
        let mut weights = Vec::with_capacity(t.len() * naz);
        for (ti, wi) in t.iter().zip(&wt) {
            let s = (1.0 - ti * ti).max(0.0).sqrt();
            for k in 0..naz {
                let phi = dphi * (k as f64 + 0.5);
                coords.extend_from_slice(&[s * phi.cos(), s * phi.sin(), *ti]);
                weights.push(wi * dphi);
            }
        }
        return Ok(SphericalGrid {
            dim,
            resolution,
            coords,
            weights,
            rings: Some(Rings { t, azimuths: naz }),
        });
    }
    let base = build_grid(dim - 1, resolution)?;
    let theta = gauss_legendre_on(2 * resolution + 8, 0.0, PI);
    let mut coords = Vec::new();
    let mut weights = Vec::new();
    for (th, wth) in theta {
        let (s, c) = th.sin_cos();
        let wr = wth * s.powi(dim as i32 - 2);
        for j in 0..base.len() {
            coords.extend(base.node(j).iter().map(|x| x * s));
            coords.push(c);
            weights.push(wr * base.weights[j]);
        }
    }
    Ok(SphericalGrid { dim, resolution, coords, weights, rings: None })
}

impl SphericalGrid {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn resolution(&self) -> usize {
        self.resolution
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    /// Node `i` of a three-dimensional grid.
    #[inline]
    pub fn node3(&self, i: usize) -> Vec3 {
        let c = &self.coords[3 * i..3 * i + 3];
        [c[0], c[1], c[2]]
    }

    pub fn nodes3(&self) -> impl Iterator<Item = Vec3> + '_ {
        (0..self.len()).map(|i| self.node3(i))
    }

    pub fn require_dim3(&self) -> Result<()> {
        if self.dim == 3 {
            Ok(())
        } else {
            Err(GeomError::UnsupportedDimension(self.dim, "3"))
        }
    }

    /// Samples `f` at every node.
    pub fn sample3(&self, f: impl Fn(Vec3) -> f64) -> Vec<f64> {
        self.nodes3().map(f).collect()
    }

    /// Whether `other` is the same grid (same dimension and resolution).
    pub fn same_as(&self, other: &SphericalGrid) -> bool {
        self.dim == other.dim && self.resolution == other.resolution && self.len() == other.len()
    }

    /// Linear interpolation of node values at an arbitrary direction.
    ///
    /// Bilinear in `(u·e, azimuth)` between neighbouring rings; beyond the
    /// outermost rings the pole value is the ring mean. All weights are
    /// nonnegative.
    pub fn interpolate(&self, values: &[f64], u: Vec3) -> f64 {
        let rings = self.rings.as_ref().expect("interpolation requires a 3-dimensional grid");
        let naz = rings.azimuths;
        let nr = rings.t.len();
        let t = u[2].clamp(-1.0, 1.0);
        let dphi = 2.0 * PI / naz as f64;
        let phi = u[1].atan2(u[0]).rem_euclid(2.0 * PI);
        let x = phi / dphi - 0.5;
        let k0 = x.floor();
        let f = x - k0;
        let k0 = (k0 as i64).rem_euclid(naz as i64) as usize;
        let k1 = (k0 + 1) % naz;
        let ring_val = |r: usize| (1.0 - f) * values[r * naz + k0] + f * values[r * naz + k1];
        let ring_mean = |r: usize| values[r * naz..(r + 1) * naz].iter().sum::<f64>() / naz as f64;
        let ts = &rings.t;
        if t <= ts[0] {
            let s = (t + 1.0) / (ts[0] + 1.0);
            return (1.0 - s) * ring_mean(0) + s * ring_val(0);
        }
        if t >= ts[nr - 1] {
            let s = (1.0 - t) / (1.0 - ts[nr - 1]);
            return (1.0 - s) * ring_mean(nr - 1) + s * ring_val(nr - 1);
        }
        let r = ts.partition_point(|&x| x <= t) - 1;
        let s = (t - ts[r]) / (ts[r + 1] - ts[r]);
        (1.0 - s) * ring_val(r) + s * ring_val(r + 1)
    }
}

/// `Σ w_i f_i` over the grid nodes.
pub fn integrate(grid: &SphericalGrid, f: &[f64]) -> f64 {
    debug_assert_eq!(f.len(), grid.len());
    grid.weights.iter().zip(f).map(|(w, x)| w * x).sum()
}

/// Which built-in profile a kernel carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelKind {
    /// `|t|/2`: half the support function of `[-e, e]`.
    Projection,
    /// `sqrt(1 - t²)`: support function of the equatorial disc.
    Sine,
    /// Pure equator atom (intersection body).
    Equator,
    /// Piecewise linear profile read from a table.
    Tabulated,
    /// Arbitrary callable profile.
    Custom,
}

type Profile = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A zonal function on the sphere given by its profile `t -> ğ(t)` with
/// `t = u·e`, optionally plus mass concentrated on the equator `S ∩ e^⊥`.
#[derive(Clone)]
pub struct ZonalKernel {
    profile: Profile,
    /// Mass on the equator; the equator measure maps the constant field 1 to this value.
    pub equator_atom: f64,
    pub name: String,
    /// `ğ(-t) = ğ(t)`.
    pub even: bool,
    /// The profile is the support function of a figure of revolution.
    pub is_support: bool,
    pub kind: KernelKind,
    /// Values of `t` where the profile is not smooth; quadrature panels split there.
    breakpoints: Vec<f64>,
}

impl fmt::Debug for ZonalKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ZonalKernel")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .field("even", &self.even)
            .field("is_support", &self.is_support)
            .field("equator_atom", &self.equator_atom)
            .finish()
    }
}

impl ZonalKernel {
    pub fn new(
        name: impl Into<String>,
        profile: impl Fn(f64) -> f64 + Send + Sync + 'static,
        even: bool,
        is_support: bool,
    ) -> Self {
        ZonalKernel {
            profile: Arc::new(profile),
            equator_atom: 0.0,
            name: name.into(),
            even,
            is_support,
            kind: KernelKind::Custom,
            breakpoints: Vec::new(),
        }
    }

    /// `ğ(t) = |t|/2`, the generating function of the projection body operator.
    pub fn projection() -> Self {
        ZonalKernel {
            kind: KernelKind::Projection,
            breakpoints: vec![0.0],
            ..Self::new("pi", |t: f64| 0.5 * t.abs(), true, true)
        }
    }

    /// `ğ(t) = sqrt(1 - t²)`, the generating function of the sine transform operator.
    pub fn sine() -> Self {
        ZonalKernel {
            kind: KernelKind::Sine,
            ..Self::new("theta", |t: f64| (1.0 - t * t).max(0.0).sqrt(), true, true)
        }
    }

    /// Equator-supported invariant measure with mass `κ₂ = π` (intersection body).
    pub fn equator(mass: f64) -> Self {
        ZonalKernel {
            kind: KernelKind::Equator,
            equator_atom: mass,
            ..Self::new("intersection", |_| 0.0, true, false)
        }
    }

    /// Piecewise-linear profile through `(t, value)` knots covering `[-1, 1]`.
    pub fn tabulated(name: impl Into<String>, mut knots: Vec<(f64, f64)>, even: bool, is_support: bool) -> Result<Self> {
        knots.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if knots.len() < 2 {
            return Err(GeomError::InvalidArgument("kernel table needs at least two rows".into()));
        }
        if knots.iter().any(|(t, v)| !t.is_finite() || !v.is_finite()) {
            return Err(GeomError::InvalidArgument("kernel table has non-finite entries".into()));
        }
        if knots[0].0 > -1.0 + 1e-12 || knots[knots.len() - 1].0 < 1.0 - 1e-12 {
            return Err(GeomError::InvalidArgument("kernel table must cover [-1, 1]".into()));
        }
        let breakpoints = knots.iter().map(|k| k.0).filter(|t| t.abs() < 1.0).collect();
        let table = knots.clone();
        let profile = move |t: f64| {
            let i = table.partition_point(|k| k.0 <= t);
            if i == 0 {
                return table[0].1;
            }
            if i >= table.len() {
                return table[table.len() - 1].1;
            }
            let (a, b) = (table[i - 1], table[i]);
            if b.0 == a.0 {
                return b.1;
            }
            a.1 + (b.1 - a.1) * (t - a.0) / (b.0 - a.0)
        };
        Ok(ZonalKernel {
            kind: KernelKind::Tabulated,
            breakpoints,
            ..Self::new(name, profile, even, is_support)
        })
    }

    /// Parses `t,value` rows (optional header) into a tabulated kernel.
    pub fn from_csv(name: impl Into<String>, text: &str, even: bool, is_support: bool) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
        let mut knots = Vec::new();
        for rec in rdr.records() {
            let rec = rec.map_err(|e| GeomError::Format(e.to_string()))?;
            if rec.len() < 2 {
                return Err(GeomError::Format("kernel rows need two columns".into()));
            }
            match (rec[0].parse::<f64>(), rec[1].parse::<f64>()) {
                (Ok(t), Ok(v)) => knots.push((t, v)),
                _ if knots.is_empty() => continue, // header
                _ => return Err(GeomError::Format(format!("bad kernel row: {:?}", rec))),
            }
        }
        Self::tabulated(name, knots, even, is_support)
    }

    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        (self.profile)(t.clamp(-1.0, 1.0))
    }

    pub fn has_density(&self) -> bool {
        self.kind != KernelKind::Equator
    }

    /// Polar-angle panels `[θ_a, θ_b]` split at the profile's breakpoints.
    pub fn theta_panels(&self) -> Vec<(f64, f64)> {
        let mut cuts: Vec<f64> = self.breakpoints.iter().map(|t| t.clamp(-1.0, 1.0).acos()).collect();
        cuts.push(0.0);
        cuts.push(PI);
        cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        cuts.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        cuts.windows(2).map(|w| (w[0], w[1])).collect()
    }

    /// `∫_{S²} ğ(u·e) du + equator_atom`: the image radius of the unit ball.
    pub fn sphere_integral(&self) -> f64 {
        let mut s = 0.0;
        if self.has_density() {
            for (a, b) in self.theta_panels() {
                let sub = 8;
                for k in 0..sub {
                    let lo = a + (b - a) * k as f64 / sub as f64;
                    let hi = a + (b - a) * (k + 1) as f64 / sub as f64;
                    for (th, w) in gauss_legendre_on(24, lo, hi) {
                        s += w * th.sin() * self.eval(th.cos());
                    }
                }
            }
        }
        2.0 * PI * s + self.equator_atom
    }

    /// `∫_{S²} ğ(u·e) (u·e) du`: the pole component of `∫ ğ(u·e) u du`.
    pub fn first_moment(&self) -> f64 {
        if !self.has_density() {
            return 0.0;
        }
        let mut s = 0.0;
        for (a, b) in self.theta_panels() {
            for k in 0..8 {
                let lo = a + (b - a) * k as f64 / 8.0;
                let hi = a + (b - a) * (k + 1) as f64 / 8.0;
                for (th, w) in gauss_legendre_on(24, lo, hi) {
                    let (st, ct) = th.sin_cos();
                    s += w * st * ct * self.eval(ct);
                }
            }
        }
        2.0 * PI * s
    }

    /// Declares kinks of a custom profile so quadrature panels split there.
    pub fn with_breakpoints(mut self, t: &[f64]) -> Self {
        self.breakpoints.extend(t.iter().copied().filter(|t| t.abs() < 1.0));
        self
    }

    /// Values of `t` where the profile has kinks.
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Checks `ğ(-t) = ğ(t)` on a fine sample.
    pub fn is_numerically_even(&self) -> bool {
        (0..=200).all(|k| {
            let t = k as f64 / 200.0;
            let (a, b) = (self.eval(t), self.eval(-t));
            (a - b).abs() <= 1e-12 * (1.0 + a.abs())
        })
    }
}

/// Evaluates `(μ ∗ ğ)(u) = Σ_atoms w ğ(u·d)` at a single direction.
pub fn zonal_eval(mu: &AtomicMeasure, kernel: &ZonalKernel, u: Vec3) -> f64 {
    mu.atoms().iter().map(|a| a.weight * kernel.eval(vec3::dot(u, a.dir))).sum()
}

/// Zonal convolution of an atomic measure with a kernel, sampled at the grid nodes.
pub fn zonal_convolve(mu: &AtomicMeasure, kernel: &ZonalKernel, grid: &SphericalGrid) -> Result<Vec<f64>> {
    grid.require_dim3()?;
    if kernel.equator_atom != 0.0 {
        return Err(GeomError::InvalidArgument(
            "kernel carries an equator atom; use great_sphere_convolve for that part".into(),
        ));
    }
    Ok(grid.nodes3().map(|u| zonal_eval(mu, kernel, u)).collect())
}

/// `(f ∗ ğ)(v_j) = Σ_i w_i f_i ğ(u_i·v_j)` for a node field `f`.
pub fn zonal_convolve_field(f: &[f64], kernel: &ZonalKernel, grid: &SphericalGrid) -> Result<Vec<f64>> {
    grid.require_dim3()?;
    let mu = AtomicMeasure::from_raw(
        3,
        grid.nodes3().zip(grid.weights().iter().zip(f)).map(|(u, (w, x))| (u, w * x)).collect(),
    );
    zonal_convolve(&mu, kernel, grid)
}

/// Convolution of a field with the invariant measure on the great circle
/// orthogonal to `u`, normalized so that the constant field 1 maps to `κ₂ = π`.
pub fn great_sphere_convolve(field: impl Fn(Vec3) -> f64, u: Vec3, resolution: usize) -> Result<f64> {
    Ok(kappa(2) * great_sphere_mean(field, u, resolution)?)
}

/// Mean of `field` over the great circle orthogonal to `u` (trapezoid rule).
pub fn great_sphere_mean(field: impl Fn(Vec3) -> f64, u: Vec3, resolution: usize) -> Result<f64> {
    if resolution < 4 {
        return Err(GeomError::InvalidArgument("great-sphere resolution must be >= 4".into()));
    }
    let u = vec3::normalize(u).ok_or_else(|| GeomError::InvalidArgument("zero direction".into()))?;
    let (a, b) = vec3::orthonormal_complement(u);
    let mut s = 0.0;
    for k in 0..resolution {
        let phi = 2.0 * PI * k as f64 / resolution as f64;
        let (sn, cs) = phi.sin_cos();
        s += field(vec3::add(vec3::scale(a, cs), vec3::scale(b, sn)));
    }
    Ok(s / resolution as f64)
}

/// Polar-angle / azimuth rule used to convolve an analytic field with a
/// kernel around an arbitrary pole.
#[derive(Debug, Clone, Copy)]
pub struct PoleRule {
    /// Gauss–Legendre nodes per polar panel.
    pub polar: usize,
    /// Trapezoid azimuths.
    pub azimuths: usize,
}

impl Default for PoleRule {
    fn default() -> Self {
        PoleRule { polar: 24, azimuths: 48 }
    }
}

/// `∫ f(v) ğ(u·v) dv` with the integration grid aligned to the pole `u`.
pub fn convolve_at(f: &dyn Fn(Vec3) -> f64, kernel: &ZonalKernel, u: Vec3, rule: PoleRule) -> f64 {
    let u = vec3::normalize(u).unwrap_or([0.0, 0.0, 1.0]);
    let (a, b) = vec3::orthonormal_complement(u);
    let dphi = 2.0 * PI / rule.azimuths as f64;
    let trig: Vec<(f64, f64)> = (0..rule.azimuths)
        .map(|k| (dphi * (k as f64 + 0.5)).sin_cos())
        .collect();
    let mut total = 0.0;
    for (lo, hi) in kernel.theta_panels() {
        for (th, w) in gauss_legendre_on(rule.polar, lo, hi) {
            let (st, ct) = th.sin_cos();
            let g = kernel.eval(ct);
            if g == 0.0 {
                continue;
            }
            let mut ring = 0.0;
            for &(sp, cp) in &trig {
                let v = vec3::add(vec3::scale(u, ct), vec3::scale(vec3::add(vec3::scale(a, cp), vec3::scale(b, sp)), st));
                ring += f(v);
            }
            total += w * st * g * ring * dphi;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_is_exact_for_polynomials() {
        let (x, w) = gauss_legendre(5);
        let m = |k: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(k)).sum::<f64>();
        assert!((m(0) - 2.0).abs() < 1e-14);
        assert!((m(4) - 0.4).abs() < 1e-14);
        assert!((m(8) - 2.0 / 9.0).abs() < 1e-14);
        assert!(m(3).abs() < 1e-15);
    }

    #[test]
    fn low_dimension_rejected() {
        assert!(matches!(build_grid(2, 4), Err(GeomError::UnsupportedDimension(2, _))));
        assert!(build_grid(3, 0).is_err());
    }

    #[test]
    fn moments_on_s2() {
        for r in [2, 3, 8, 16] {
            let g = build_grid(3, r).unwrap();
            let one = vec![1.0; g.len()];
            assert!((integrate(&g, &one) - 4.0 * PI).abs() < 1e-9);
            let mut m = [0.0; 3];
            for (i, u) in g.nodes3().enumerate() {
                for k in 0..3 {
                    m[k] += g.weights()[i] * u[k];
                }
            }
            assert!(vec3::norm(m) < 1e-12);
            let sq = g.sample3(|u| u[2] * u[2]);
            assert!((integrate(&g, &sq) - 4.0 * PI / 3.0).abs() < 1e-6);
        }
        let g = build_grid(3, 24).unwrap();
        let abs = g.sample3(|u| u[2].abs());
        assert!((integrate(&g, &abs) - 2.0 * PI).abs() < 1e-6);
    }

    #[test]
    fn higher_dimensional_grids() {
        for n in [4, 5] {
            let g = build_grid(n, 4).unwrap();
            let total: f64 = g.weights().iter().sum();
            assert!((total - sphere_area(n)).abs() < 1e-9 * sphere_area(n));
            let mut first = vec![0.0; n];
            for i in 0..g.len() {
                for (k, x) in g.node(i).iter().enumerate() {
                    first[k] += g.weights()[i] * x;
                }
            }
            assert!(first.iter().all(|x| x.abs() < 1e-9));
        }
    }

    #[test]
    fn kernel_radii() {
        assert!((ZonalKernel::projection().sphere_integral() - PI).abs() < 1e-12);
        assert!((ZonalKernel::sine().sphere_integral() - PI * PI).abs() < 1e-9);
        assert!((ZonalKernel::equator(PI).sphere_integral() - PI).abs() < 1e-15);
    }

    #[test]
    fn equator_kernel_rejected_by_density_convolution() {
        let g = build_grid(3, 2).unwrap();
        let mu = AtomicMeasure::from_raw(3, vec![([0.0, 0.0, 1.0], 1.0)]);
        assert!(zonal_convolve(&mu, &ZonalKernel::equator(PI), &g).is_err());
    }

    #[test]
    fn single_atom_linear_profile() {
        let g = build_grid(3, 3).unwrap();
        let mu = AtomicMeasure::from_raw(3, vec![([0.0, 0.0, 1.0], 1.0)]);
        let k = ZonalKernel::new("lin", |t| t, false, false);
        let f = zonal_convolve(&mu, &k, &g).unwrap();
        for (i, u) in g.nodes3().enumerate() {
            assert!((f[i] - u[2]).abs() < 1e-15);
        }
    }

    #[test]
    fn great_sphere_normalization() {
        let v = great_sphere_convolve(|_| 1.0, [0.3, -0.2, 0.9], 16).unwrap();
        assert!((v - PI).abs() < 1e-12);
        let v = great_sphere_convolve(|_| 4.0, [0.0, 0.0, 1.0], 16).unwrap();
        assert!((v - 4.0 * PI).abs() < 1e-12);
        assert!(great_sphere_convolve(|_| 1.0, [0.0, 0.0, 1.0], 3).is_err());
    }

    #[test]
    fn interpolation_reproduces_nodes_and_constants() {
        let g = build_grid(3, 6).unwrap();
        let f = g.sample3(|u| 1.0 + u[0] + 0.5 * u[2]);
        for (i, u) in g.nodes3().enumerate() {
            assert!((g.interpolate(&f, u) - f[i]).abs() < 1e-12);
        }
        let c = vec![2.5; g.len()];
        for u in [[0.0, 0.0, 1.0], [0.0, 0.0, -1.0], [0.6, 0.8, 0.0]] {
            assert!((g.interpolate(&c, u) - 2.5).abs() < 1e-14);
        }
    }

    #[test]
    fn csv_kernel() {
        let k = ZonalKernel::from_csv("tab", "t,value\n-1,1\n0,0\n1,1\n", true, true).unwrap();
        assert!((k.eval(0.5) - 0.5).abs() < 1e-15);
        assert!((k.sphere_integral() - 2.0 * PI).abs() < 1e-9);
        assert!(ZonalKernel::from_csv("bad", "0,1\n1,1\n", true, true).is_err());
    }

    #[test]
    fn pole_rule_integrates_kernel_mass() {
        for k in [ZonalKernel::projection(), ZonalKernel::sine()] {
            let v = convolve_at(&|_| 1.0, &k, [0.2, 0.3, 0.5], PoleRule::default());
            assert!((v - k.sphere_integral()).abs() < 1e-9, "{}", k.name);
        }
    }
}
