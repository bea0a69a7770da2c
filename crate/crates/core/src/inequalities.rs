//! Executable forms of the volume inequalities and adjointness identities of
//! Blaschke–Minkowski homomorphisms, and a seeded randomized harness.
//!
//! Every check evaluates both sides of a statement and reports the
//! normalized margin `(lhs − rhs)/max(|lhs|, |rhs|)`, signed so that a
//! nonnegative margin means the statement holds. Identities report
//! `−|lhs − rhs|/max(|lhs|, |rhs|)`. A margin below `−tolerance` of the
//! accuracy rung of the path that produced the numbers is a violation;
//! checks whose inputs satisfy the equality condition (homothetic bodies for
//! the convex track, dilates for the star track) must also have
//! `|margin| ≤ EQUALITY_TOL`.
//!
//! All statements are for `n = 3`, where `Φ(K₁, K₂)` has two body slots and
//! `Φ_i K = Φ(K[2−i], B[i])`.

use std::f64::consts::PI;
use std::cell::OnceCell;
use std::fmt;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bodies::{
    are_dilates, are_homothetic, minkowski_sum, random_in_ball, random_polytope, random_star_body, radial_sum,
    Polytope, StarBody, SupportBody,
};
use crate::error::{GeomError, Result};
use crate::measures::MixedArg;
use crate::operators::{
    apply_bm, apply_bm_ball, apply_bm_mixed, apply_radial, apply_radial_mixed, centroid_body, m_phi_eval, phi_ball,
    is_builtin, polar_phi, psi_ball, BMHomomorphism, RadialBMHomomorphism,
};
use crate::sphere::{build_grid, kappa, SphericalGrid};
use crate::vec3;
use crate::volumes::{
    dual_quermassintegral, dual_v_r, dual_w_i, mean_width_quadrature, mixed_volume, polar_volume,
    polar_volume_estimate, quermassintegral, support_quermassintegrals, volume_star, w_i_pair, w_i_support,
    Estimate, Rung,
};

/// Version of the JSON report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Allowed `|margin|` for checks whose inputs meet the equality condition.
pub const EQUALITY_TOL: f64 = 1e-4;

/// Default resolution of the shared spherical grid.
pub const DEFAULT_GRID_RESOLUTION: usize = 24;

/// Minimum grid resolution for identities whose sides differ by a grid
/// quadrature of a kinked integrand (second-order convergence).
pub const LEMMA_GRID_RESOLUTION: usize = 48;

/// Every `PROBE_EVERY`-th trial feeds equality-case inputs, alternating
/// between identical arguments and homothets (dilates for star bodies).
pub const PROBE_EVERY: u64 = 4;

/// Vertex counts of random polytopes.
const POLYTOPE_VERTICES: std::ops::RangeInclusive<usize> = 6..=14;

/// Bump width parameter of random star bodies.
const STAR_SMOOTHNESS: usize = 3;

/// Lower edges of the margin histogram bins (the first bin is unbounded below).
pub const MARGIN_BIN_EDGES: [f64; 8] = [-1e-4, -1e-6, -1e-9, 0.0, 1e-9, 1e-6, 1e-4, 1e-2];

/// Direction of a comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sense {
    /// `lhs ≥ rhs`.
    AtLeast,
    /// `lhs ≤ rhs`.
    AtMost,
    /// `lhs = rhs`.
    Equal,
}

/// One evaluated statement.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TheoremCheck {
    /// Family name, e.g. `minkowski_type`.
    pub theorem: String,
    pub operator: String,
    /// Indices of the instance, e.g. `i=1`.
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub sense: Sense,
    pub margin: f64,
    pub equality_expected: bool,
    pub rung: Rung,
    /// Seed and body descriptors (filled in by the harness).
    pub inputs: String,
}

/// Normalized signed margin; `0` when both sides vanish.
pub fn margin(lhs: f64, rhs: f64, sense: Sense) -> f64 {
    let scale = lhs.abs().max(rhs.abs());
    if !lhs.is_finite() || !rhs.is_finite() {
        return f64::NAN;
    }
    if scale == 0.0 {
        return 0.0;
    }
    match sense {
        Sense::AtLeast => (lhs - rhs) / scale,
        Sense::AtMost => (rhs - lhs) / scale,
        Sense::Equal => -(lhs - rhs).abs() / scale,
    }
}

impl TheoremCheck {
    pub fn new(
        theorem: Family,
        operator: &str,
        params: impl Into<String>,
        lhs: f64,
        rhs: f64,
        sense: Sense,
        rung: Rung,
        equality_expected: bool,
    ) -> Self {
        TheoremCheck {
            theorem: theorem.name().into(),
            operator: operator.into(),
            params: params.into(),
            lhs,
            rhs,
            sense,
            margin: margin(lhs, rhs, sense),
            equality_expected: equality_expected || sense == Sense::Equal,
            rung,
            inputs: String::new(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.rung.tolerance()
    }

    /// Margin below the rung tolerance (a non-finite margin counts).
    pub fn is_violation(&self) -> bool {
        !(self.margin >= -self.tolerance())
    }

    pub fn is_equality_failure(&self) -> bool {
        self.equality_expected && !(self.margin.abs() <= EQUALITY_TOL)
    }

    pub fn passed(&self) -> bool {
        !self.is_violation() && !self.is_equality_failure()
    }
}

impl fmt::Display for TheoremCheck {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}[{} {}] lhs={:.12e} rhs={:.12e} margin={:+.3e} rung={:?}{}",
            self.theorem,
            self.operator,
            self.params,
            self.lhs,
            self.rhs,
            self.margin,
            self.rung,
            if self.equality_expected { " (equality case)" } else { "" }
        )
    }
}

/// The statement families run by the harness.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    /// `W_i(Φ(K, L))² ≥ W_i(ΦK) W_i(ΦL)`.
    MinkowskiType,
    /// `W_i(Φ(K₁, K₂))^m ≥ ∏_{j ≤ m} W_i(Φ(K_j[m], K_{m+1}, …))`, `m ∈ {1, 2}`.
    AleksandrovFenchelType,
    /// `W_i(Φ(K₁, K₂))² ≥ W_i(ΦK₁) W_i(ΦK₂)`.
    ProductInequality,
    /// `W_i(Φ_j(K, L))² ≥ W_i(ΦK)^{2−j} W_i(ΦL)^j` with `Φ_j(K, L) = Φ(K[2−j], L[j])`.
    MixedPowerInequality,
    /// `W_i(Φ(K + L))^{1/2(3−i)} ≥ W_i(ΦK)^{1/2(3−i)} + W_i(ΦL)^{1/2(3−i)}`.
    BrunnMinkowskiType,
    /// `V(Φ*(K, L))² ≤ V(Φ*K) V(Φ*L)`.
    PolarMinkowski,
    /// `V(Φ*(K₁, K₂))^m ≤ ∏_{j ≤ m} V(Φ*(K_j[m], K_{m+1}, …))`, `m ∈ {1, 2}`.
    PolarAleksandrovFenchel,
    /// `V(Φ*(K₁, K₂))² ≤ V(Φ*K₁) V(Φ*K₂)` and `V(Φ_j*(K, L))² ≤ V(Φ*K)^{2−j} V(Φ*L)^j`.
    PolarCorollaries,
    /// `V(Φ*(K + L))^{−1/6} ≥ V(Φ*K)^{−1/6} + V(Φ*L)^{−1/6}`.
    PolarBrunnMinkowski,
    /// `W̃_i(Ψ(L₁, L₂))² ≤ W̃_i(ΨL₁) W̃_i(ΨL₂)`.
    DualAleksandrovFenchel,
    /// `W̃_i(Ψ_j(K, L))² ≤ W̃_i(ΨK)^{2−j} W̃_i(ΨL)^j`.
    DualCorollaries,
    /// `W̃_i(Ψ(K +̃ L))^{1/2(3−i)} ≤ W̃_i(ΨK)^{1/2(3−i)} + W̃_i(ΨL)^{1/2(3−i)}` (radial sum).
    DualBrunnMinkowski,
    /// `W_i(K, Φ_j L) = W_j(L, Φ_i K)`.
    MixedAdjointness,
    /// `W₂(Φ_i K) = r_Φ W_{i+1}(K)`.
    MeanWidthIdentity,
    /// `Ṽ₋₁(L, Φ*(K₁, K₂)) = V(K₁, K₂, M_Φ L)`.
    PolarAdjointness,
    /// `W̃_i(K, Ψ_j L) = W̃_j(L, Ψ_i K)`.
    DualAdjointness,
    /// `W̃₂(Ψ_i L) = r_Ψ W̃_{i+1}(L)`.
    DualMeanRadiusIdentity,
    /// `V(K, K, L)³ ≥ V(K)² V(L)`.
    ClassicalMinkowski,
    /// `V(K + L)^{1/3} ≥ V(K)^{1/3} + V(L)^{1/3}`.
    ClassicalBrunnMinkowski,
    /// `Ṽ₋₁(K, L)³ ≥ V(K)⁴ V(L)^{−1}`.
    DualMinkowskiClassical,
}

/// Which kind of operator a family needs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorClass {
    /// Any Blaschke–Minkowski homomorphism.
    Convex,
    /// An even homomorphism whose generating function is a support function.
    Polar,
    /// A radial Blaschke–Minkowski homomorphism.
    Radial,
    /// No operator.
    None,
}

impl Family {
    pub const ALL: [Family; 20] = [
        Family::MinkowskiType,
        Family::AleksandrovFenchelType,
        Family::ProductInequality,
        Family::MixedPowerInequality,
        Family::BrunnMinkowskiType,
        Family::PolarMinkowski,
        Family::PolarAleksandrovFenchel,
        Family::PolarCorollaries,
        Family::PolarBrunnMinkowski,
        Family::DualAleksandrovFenchel,
        Family::DualCorollaries,
        Family::DualBrunnMinkowski,
        Family::MixedAdjointness,
        Family::MeanWidthIdentity,
        Family::PolarAdjointness,
        Family::DualAdjointness,
        Family::DualMeanRadiusIdentity,
        Family::ClassicalMinkowski,
        Family::ClassicalBrunnMinkowski,
        Family::DualMinkowskiClassical,
    ];

    /// The inequality families of the operators (no identities, no classical checks).
    pub const INEQUALITIES: [Family; 12] = [
        Family::MinkowskiType,
        Family::AleksandrovFenchelType,
        Family::ProductInequality,
        Family::MixedPowerInequality,
        Family::BrunnMinkowskiType,
        Family::PolarMinkowski,
        Family::PolarAleksandrovFenchel,
        Family::PolarCorollaries,
        Family::PolarBrunnMinkowski,
        Family::DualAleksandrovFenchel,
        Family::DualCorollaries,
        Family::DualBrunnMinkowski,
    ];

    /// The adjointness identities.
    pub const IDENTITIES: [Family; 5] = [
        Family::MixedAdjointness,
        Family::MeanWidthIdentity,
        Family::PolarAdjointness,
        Family::DualAdjointness,
        Family::DualMeanRadiusIdentity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Family::MinkowskiType => "minkowski_type",
            Family::AleksandrovFenchelType => "aleksandrov_fenchel_type",
            Family::ProductInequality => "product_inequality",
            Family::MixedPowerInequality => "mixed_power_inequality",
            Family::BrunnMinkowskiType => "brunn_minkowski_type",
            Family::PolarMinkowski => "polar_minkowski",
            Family::PolarAleksandrovFenchel => "polar_aleksandrov_fenchel",
            Family::PolarCorollaries => "polar_corollaries",
            Family::PolarBrunnMinkowski => "polar_brunn_minkowski",
            Family::DualAleksandrovFenchel => "dual_aleksandrov_fenchel",
            Family::DualCorollaries => "dual_corollaries",
            Family::DualBrunnMinkowski => "dual_brunn_minkowski",
            Family::MixedAdjointness => "mixed_adjointness",
            Family::MeanWidthIdentity => "mean_width_identity",
            Family::PolarAdjointness => "polar_adjointness",
            Family::DualAdjointness => "dual_adjointness",
            Family::DualMeanRadiusIdentity => "dual_mean_radius_identity",
            Family::ClassicalMinkowski => "classical_minkowski",
            Family::ClassicalBrunnMinkowski => "classical_brunn_minkowski",
            Family::DualMinkowskiClassical => "dual_minkowski_classical",
        }
    }

    pub fn from_name(name: &str) -> Result<Family> {
        Family::ALL
            .iter()
            .copied()
            .find(|f| f.name() == name)
            .ok_or_else(|| GeomError::InvalidArgument(format!("unknown theorem family '{name}'")))
    }

    pub fn operator_class(self) -> OperatorClass {
        use Family::*;
        match self {
            MinkowskiType | AleksandrovFenchelType | ProductInequality | MixedPowerInequality | BrunnMinkowskiType
            | MixedAdjointness | MeanWidthIdentity => OperatorClass::Convex,
            PolarMinkowski | PolarAleksandrovFenchel | PolarCorollaries | PolarBrunnMinkowski | PolarAdjointness => {
                OperatorClass::Polar
            }
            DualAleksandrovFenchel | DualCorollaries | DualBrunnMinkowski | DualAdjointness | DualMeanRadiusIdentity => {
                OperatorClass::Radial
            }
            ClassicalMinkowski | ClassicalBrunnMinkowski | DualMinkowskiClassical => OperatorClass::None,
        }
    }

    fn index(self) -> u64 {
        Family::ALL.iter().position(|f| *f == self).unwrap() as u64
    }
}

fn max_rung(rungs: impl IntoIterator<Item = Rung>) -> Rung {
    rungs.into_iter().max().unwrap_or(Rung::Exact)
}

fn mixed<'a>(k: &'a Polytope, l: &'a Polytope) -> [MixedArg<'a>; 2] {
    [MixedArg::Polytope(k), MixedArg::Polytope(l)]
}

// ---------------------------------------------------------------------------
// Convex and polar tracks
// ---------------------------------------------------------------------------

fn cached<'c, T>(cell: &'c OnceCell<Result<T>>, f: impl FnOnce() -> Result<T>) -> Result<&'c T> {
    cell.get_or_init(f).as_ref().map_err(Clone::clone)
}

/// One operator applied to a pair of polytopes `(K, L)`. Every image and
/// every volume functional is computed at most once, so all convex and polar
/// families can share the work of a trial.
pub struct ConvexPair<'a> {
    phi: &'a BMHomomorphism,
    k: &'a Polytope,
    l: &'a Polytope,
    grid: &'a Arc<SphericalGrid>,
    sum: OnceCell<Result<Polytope>>,
    images: [OnceCell<Result<SupportBody>>; 4],
    quermass: [OnceCell<Result<[Estimate; 3]>>; 4],
    polar: [OnceCell<Result<Estimate>>; 4],
    homothetic: OnceCell<bool>,
}

/// Slots of [`ConvexPair`]: `ΦK`, `ΦL`, `Φ(K, L)`, `Φ(K + L)`.
const IMG_K: usize = 0;
const IMG_L: usize = 1;
const IMG_KL: usize = 2;
const IMG_SUM: usize = 3;

impl<'a> ConvexPair<'a> {
    pub fn new(phi: &'a BMHomomorphism, k: &'a Polytope, l: &'a Polytope, grid: &'a Arc<SphericalGrid>) -> Self {
        ConvexPair {
            phi,
            k,
            l,
            grid,
            sum: OnceCell::new(),
            images: Default::default(),
            quermass: Default::default(),
            polar: Default::default(),
            homothetic: OnceCell::new(),
        }
    }

    fn op(&self) -> &str {
        self.phi.name()
    }

    /// Equality condition of the Minkowski- and Brunn–Minkowski-type statements.
    fn homothetic(&self) -> bool {
        *self.homothetic.get_or_init(|| are_homothetic(self.k, self.l, self.grid))
    }

    /// The Aleksandrov–Fenchel equality cases are not characterized; only
    /// identical arguments are asserted.
    fn identical(&self) -> bool {
        self.k.same_vertices(self.l)
    }

    fn image(&self, slot: usize) -> Result<&SupportBody> {
        cached(&self.images[slot], || match slot {
            IMG_K => apply_bm(self.phi, self.k, self.grid),
            IMG_L => apply_bm(self.phi, self.l, self.grid),
            IMG_KL => apply_bm_mixed(self.phi, &[MixedArg::Polytope(self.k), MixedArg::Polytope(self.l)], self.grid),
            _ => {
                let sum = cached(&self.sum, || minkowski_sum(self.k, self.l, 1.0, 1.0))?;
                apply_bm(self.phi, sum, self.grid)
            }
        })
    }

    /// `[W₀, W₁, W₂]` of an image.
    fn w(&self, slot: usize) -> Result<[Estimate; 3]> {
        cached(&self.quermass[slot], || {
            let w = support_quermassintegrals(self.image(slot)?)?;
            Ok([w[0], w[1], w[2]])
        })
        .copied()
    }

    /// `V(Φ*·)` of an image.
    fn v_polar(&self, slot: usize) -> Result<Estimate> {
        self.phi.require_polar_capable()?;
        cached(&self.polar[slot], || polar_volume_estimate(self.image(slot)?)).copied()
    }

    /// `x² ≥ a^{2−j} b^j` for each quermassintegral index.
    #[allow(clippy::too_many_arguments)]
    fn power(&self, family: Family, tag: &str, x: usize, a: usize, b: usize, j: i32, equality: bool) -> Result<Vec<TheoremCheck>> {
        let (wx, wa, wb) = (self.w(x)?, self.w(a)?, self.w(b)?);
        Ok((0..3)
            .map(|i| {
                TheoremCheck::new(
                    family,
                    self.op(),
                    format!("{tag}i={i}"),
                    wx[i].value.powi(2),
                    wa[i].value.powi(2 - j) * wb[i].value.powi(j),
                    Sense::AtLeast,
                    max_rung([wx[i].rung, wa[i].rung, wb[i].rung]),
                    equality,
                )
            })
            .collect())
    }

    /// `V(Φ*x)² ≤ V(Φ*a)^{2−j} V(Φ*b)^j`.
    fn polar_power(&self, family: Family, params: &str, x: usize, a: usize, b: usize, j: i32, equality: bool) -> Result<TheoremCheck> {
        let (vx, va, vb) = (self.v_polar(x)?, self.v_polar(a)?, self.v_polar(b)?);
        Ok(TheoremCheck::new(
            family,
            self.op(),
            params,
            vx.value.powi(2),
            va.value.powi(2 - j) * vb.value.powi(j),
            Sense::AtMost,
            max_rung([vx.rung, va.rung, vb.rung]),
            equality,
        ))
    }

    /// `W_i(Φ(K, L))² ≥ W_i(ΦK) W_i(ΦL)` for `i = 0, 1, 2`.
    pub fn minkowski_type(&self) -> Result<Vec<TheoremCheck>> {
        self.power(Family::MinkowskiType, "", IMG_KL, IMG_K, IMG_L, 1, self.homothetic())
    }

    /// Aleksandrov–Fenchel type inequality for `m = 1` (both sides coincide)
    /// and `m = 2`, with `K₁ = K`, `K₂ = L`.
    pub fn aleksandrov_fenchel_type(&self) -> Result<Vec<TheoremCheck>> {
        let fam = Family::AleksandrovFenchelType;
        let w = self.w(IMG_KL)?;
        let mut out: Vec<TheoremCheck> = (0..3)
            .map(|i| TheoremCheck::new(fam, self.op(), format!("m=1 i={i}"), w[i].value, w[i].value, Sense::AtLeast, w[i].rung, true))
            .collect();
        out.extend(self.power(fam, "m=2 ", IMG_KL, IMG_K, IMG_L, 1, self.identical())?);
        Ok(out)
    }

    /// `W_i(Φ(K₁, K₂))² ≥ W_i(ΦK₁) W_i(ΦK₂)`.
    pub fn product_inequality(&self) -> Result<Vec<TheoremCheck>> {
        self.power(Family::ProductInequality, "", IMG_KL, IMG_K, IMG_L, 1, self.homothetic())
    }

    /// `W_i(Φ_j(K, L))² ≥ W_i(ΦK)^{2−j} W_i(ΦL)^j` for `j = 0, 1, 2`.
    pub fn mixed_power_inequality(&self) -> Result<Vec<TheoremCheck>> {
        let fam = Family::MixedPowerInequality;
        let mut out = self.power(fam, "j=0 ", IMG_K, IMG_K, IMG_L, 0, true)?;
        out.extend(self.power(fam, "j=1 ", IMG_KL, IMG_K, IMG_L, 1, self.homothetic())?);
        out.extend(self.power(fam, "j=2 ", IMG_L, IMG_K, IMG_L, 2, true)?);
        Ok(out)
    }

    /// `W_i(Φ(K + L))^{1/2(3−i)} ≥ W_i(ΦK)^{1/2(3−i)} + W_i(ΦL)^{1/2(3−i)}`.
    pub fn brunn_minkowski_type(&self) -> Result<Vec<TheoremCheck>> {
        let (ws, wk, wl) = (self.w(IMG_SUM)?, self.w(IMG_K)?, self.w(IMG_L)?);
        Ok((0..3)
            .map(|i| {
                let p = 1.0 / (2.0 * (3 - i) as f64);
                TheoremCheck::new(
                    Family::BrunnMinkowskiType,
                    self.op(),
                    format!("i={i} j=0"),
                    ws[i].value.powf(p),
                    wk[i].value.powf(p) + wl[i].value.powf(p),
                    Sense::AtLeast,
                    max_rung([ws[i].rung, wk[i].rung, wl[i].rung]),
                    self.homothetic(),
                )
            })
            .collect())
    }

    /// `V(Φ*(K, L))² ≤ V(Φ*K) V(Φ*L)`.
    pub fn polar_minkowski(&self) -> Result<Vec<TheoremCheck>> {
        Ok(vec![self.polar_power(Family::PolarMinkowski, "", IMG_KL, IMG_K, IMG_L, 1, self.homothetic())?])
    }

    /// Polar Aleksandrov–Fenchel type inequality for `m = 1, 2`.
    pub fn polar_aleksandrov_fenchel(&self) -> Result<Vec<TheoremCheck>> {
        let fam = Family::PolarAleksandrovFenchel;
        let v = self.v_polar(IMG_KL)?;
        Ok(vec![
            TheoremCheck::new(fam, self.op(), "m=1", v.value, v.value, Sense::AtMost, v.rung, true),
            self.polar_power(fam, "m=2", IMG_KL, IMG_K, IMG_L, 1, self.identical())?,
        ])
    }

    /// Product and mixed-power corollaries of the polar inequality.
    pub fn polar_corollaries(&self) -> Result<Vec<TheoremCheck>> {
        let fam = Family::PolarCorollaries;
        let h = self.homothetic();
        Ok(vec![
            self.polar_power(fam, "product", IMG_KL, IMG_K, IMG_L, 1, h)?,
            self.polar_power(fam, "j=0", IMG_K, IMG_K, IMG_L, 0, true)?,
            self.polar_power(fam, "j=1", IMG_KL, IMG_K, IMG_L, 1, h)?,
            self.polar_power(fam, "j=2", IMG_L, IMG_K, IMG_L, 2, true)?,
        ])
    }

    /// `V(Φ*(K + L))^{−1/6} ≥ V(Φ*K)^{−1/6} + V(Φ*L)^{−1/6}`.
    pub fn polar_brunn_minkowski(&self) -> Result<Vec<TheoremCheck>> {
        let (vs, vk, vl) = (self.v_polar(IMG_SUM)?, self.v_polar(IMG_K)?, self.v_polar(IMG_L)?);
        let p = -1.0 / 6.0;
        Ok(vec![TheoremCheck::new(
            Family::PolarBrunnMinkowski,
            self.op(),
            "j=0",
            vs.value.powf(p),
            vk.value.powf(p) + vl.value.powf(p),
            Sense::AtLeast,
            max_rung([vs.rung, vk.rung, vl.rung]),
            self.homothetic(),
        )])
    }

    /// Evaluates a convex or polar family on this pair.
    pub fn family(&self, family: Family) -> Result<Vec<TheoremCheck>> {
        use Family::*;
        match family {
            MinkowskiType => self.minkowski_type(),
            AleksandrovFenchelType => self.aleksandrov_fenchel_type(),
            ProductInequality => self.product_inequality(),
            MixedPowerInequality => self.mixed_power_inequality(),
            BrunnMinkowskiType => self.brunn_minkowski_type(),
            PolarMinkowski => self.polar_minkowski(),
            PolarAleksandrovFenchel => self.polar_aleksandrov_fenchel(),
            PolarCorollaries => self.polar_corollaries(),
            PolarBrunnMinkowski => self.polar_brunn_minkowski(),
            other => Err(GeomError::InvalidArgument(format!("'{}' is not a convex pair family", other.name()))),
        }
    }
}

// ---------------------------------------------------------------------------
// Star track
// ---------------------------------------------------------------------------

/// One radial operator applied to a pair of star bodies, with memoized images.
pub struct StarPair<'a> {
    psi: &'a RadialBMHomomorphism,
    k: &'a StarBody,
    l: &'a StarBody,
    quermass: [OnceCell<Result<[f64; 3]>>; 4],
}

impl<'a> StarPair<'a> {
    pub fn new(psi: &'a RadialBMHomomorphism, k: &'a StarBody, l: &'a StarBody) -> Self {
        StarPair { psi, k, l, quermass: Default::default() }
    }

    fn op(&self) -> &str {
        self.psi.name()
    }

    fn dilates(&self) -> bool {
        are_dilates(self.k, self.l)
    }

    /// `[W̃₀, W̃₁, W̃₂]` of `ΨK`, `ΨL`, `Ψ(K, L)` or `Ψ(K +̃ L)`.
    fn w(&self, slot: usize) -> Result<[f64; 3]> {
        cached(&self.quermass[slot], || {
            let img = match slot {
                IMG_K => apply_radial(self.psi, self.k)?,
                IMG_L => apply_radial(self.psi, self.l)?,
                IMG_KL => apply_radial_mixed(self.psi, self.k, self.l)?,
                _ => apply_radial(self.psi, &radial_sum(self.k, self.l, 1.0, 1.0)?)?,
            };
            Ok([dual_quermassintegral(&img, 0)?, dual_quermassintegral(&img, 1)?, dual_quermassintegral(&img, 2)?])
        })
        .copied()
    }

    fn power(&self, family: Family, tag: &str, x: usize, a: usize, b: usize, j: i32, equality: bool) -> Result<Vec<TheoremCheck>> {
        let (wx, wa, wb) = (self.w(x)?, self.w(a)?, self.w(b)?);
        Ok((0..3)
            .map(|i| {
                TheoremCheck::new(
                    family,
                    self.op(),
                    format!("{tag}i={i}"),
                    wx[i].powi(2),
                    wa[i].powi(2 - j) * wb[i].powi(j),
                    Sense::AtMost,
                    Rung::Quadrature,
                    equality,
                )
            })
            .collect())
    }

    /// `W̃_i(Ψ(L₁, L₂))² ≤ W̃_i(ΨL₁) W̃_i(ΨL₂)` (`m = 2`); equality iff dilates.
    pub fn dual_aleksandrov_fenchel(&self) -> Result<Vec<TheoremCheck>> {
        self.power(Family::DualAleksandrovFenchel, "m=2 ", IMG_KL, IMG_K, IMG_L, 1, self.dilates())
    }

    /// `W̃_i(Ψ_j(K, L))² ≤ W̃_i(ΨK)^{2−j} W̃_i(ΨL)^j` for `j = 0, 1, 2`.
    pub fn dual_corollaries(&self) -> Result<Vec<TheoremCheck>> {
        let fam = Family::DualCorollaries;
        let mut out = self.power(fam, "j=0 ", IMG_K, IMG_K, IMG_L, 0, true)?;
        out.extend(self.power(fam, "j=1 ", IMG_KL, IMG_K, IMG_L, 1, self.dilates())?);
        out.extend(self.power(fam, "j=2 ", IMG_L, IMG_K, IMG_L, 2, true)?);
        Ok(out)
    }

    /// `W̃_i(Ψ(K +̃ L))^{1/2(3−i)} ≤ W̃_i(ΨK)^{1/2(3−i)} + W̃_i(ΨL)^{1/2(3−i)}`.
    pub fn dual_brunn_minkowski(&self) -> Result<Vec<TheoremCheck>> {
        let (ws, wk, wl) = (self.w(IMG_SUM)?, self.w(IMG_K)?, self.w(IMG_L)?);
        let equality = self.dilates();
        Ok((0..3)
            .map(|i| {
                let p = 1.0 / (2.0 * (3 - i) as f64);
                TheoremCheck::new(
                    Family::DualBrunnMinkowski,
                    self.op(),
                    format!("i={i} j=0"),
                    ws[i].powf(p),
                    wk[i].powf(p) + wl[i].powf(p),
                    Sense::AtMost,
                    Rung::Quadrature,
                    equality,
                )
            })
            .collect())
    }

    pub fn family(&self, family: Family) -> Result<Vec<TheoremCheck>> {
        match family {
            Family::DualAleksandrovFenchel => self.dual_aleksandrov_fenchel(),
            Family::DualCorollaries => self.dual_corollaries(),
            Family::DualBrunnMinkowski => self.dual_brunn_minkowski(),
            other => Err(GeomError::InvalidArgument(format!("'{}' is not a star pair family", other.name()))),
        }
    }
}

// ---------------------------------------------------------------------------
// Identities
// ---------------------------------------------------------------------------

/// `W_i(K, Φ_j L) = W_j(L, Φ_i K)` for `i, j ∈ {0, 1, 2}`.
pub fn check_mixed_adjointness(
    phi: &BMHomomorphism,
    k: &Polytope,
    l: &Polytope,
    grid: &Arc<SphericalGrid>,
) -> Result<Vec<TheoremCheck>> {
    let phi_l: Vec<SupportBody> = (0..3).map(|j| phi_ball(phi, l, j, grid)).collect::<Result<_>>()?;
    let phi_k: Vec<SupportBody> = (0..3).map(|i| phi_ball(phi, k, i, grid)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            let lhs = w_i_support(k, &phi_l[j], i)?;
            let rhs = w_i_support(l, &phi_k[i], j)?;
            out.push(TheoremCheck::new(
                Family::MixedAdjointness,
                phi.name(),
                format!("i={i} j={j}"),
                lhs.value,
                rhs.value,
                Sense::Equal,
                // only i = j = 0 avoids the arc rule for S(·, B) and the grid form of S(B, B)
                if i == 0 && j == 0 { Rung::Exact } else { Rung::Approximant },
                true,
            ));
        }
    }
    Ok(out)
}

/// `W₂(Φ_i K) = r_Φ W_{i+1}(K)` for `i = 0, 1`, with the left side by grid
/// quadrature of the image support function.
pub fn check_mean_width_identity(
    phi: &BMHomomorphism,
    k: &Polytope,
    grid: &Arc<SphericalGrid>,
) -> Result<Vec<TheoremCheck>> {
    (0..2)
        .map(|i| {
            let lhs = mean_width_quadrature(&phi_ball(phi, k, i, grid)?);
            let rhs = phi.radius() * quermassintegral(k, i + 1)?;
            Ok(TheoremCheck::new(
                Family::MeanWidthIdentity,
                phi.name(),
                format!("i={i}"),
                lhs,
                rhs,
                Sense::Equal,
                Rung::Approximant,
                true,
            ))
        })
        .collect()
}

/// `Ṽ₋₁(L, Φ*(K₁, K₂)) = V(K₁, K₂, M_Φ L)`: the left side by grid quadrature
/// of `ρ_L⁴ / ρ_{Φ*}`, the right side by `(1/3) ∫ h(M_Φ L, ·) dS(K₁, K₂, ·)`
/// with `h(M_Φ L, ·)` evaluated by pole-aligned quadrature at every atom.
pub fn check_polar_adjointness(
    phi: &BMHomomorphism,
    l: &StarBody,
    k1: &Polytope,
    k2: &Polytope,
) -> Result<TheoremCheck> {
    phi.require_polar_capable()?;
    let grid = l.grid();
    let star = polar_phi(phi, &mixed(k1, k2), grid)?;
    let lhs = dual_v_r(l, &star, -1.0)?;
    let mu = crate::measures::mixed_surface_area_measure(&mixed(k1, k2))?;
    let rhs = mu.integrate(|u| m_phi_eval(phi, l, u)) / 3.0;
    Ok(TheoremCheck::new(Family::PolarAdjointness, phi.name(), "", lhs, rhs, Sense::Equal, Rung::Approximant, true))
}

/// `W̃_i(K, Ψ_j L) = W̃_j(L, Ψ_i K)` for `i, j ∈ {0, 1, 2}`.
pub fn check_dual_adjointness(psi: &RadialBMHomomorphism, k: &StarBody, l: &StarBody) -> Result<Vec<TheoremCheck>> {
    let psi_l: Vec<StarBody> = (0..3).map(|j| psi_ball(psi, l, j)).collect::<Result<_>>()?;
    let psi_k: Vec<StarBody> = (0..3).map(|i| psi_ball(psi, k, i)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for i in 0..3 {
        for j in 0..3 {
            out.push(TheoremCheck::new(
                Family::DualAdjointness,
                psi.name(),
                format!("i={i} j={j}"),
                dual_w_i(k, &psi_l[j], i)?,
                dual_w_i(l, &psi_k[i], j)?,
                Sense::Equal,
                Rung::Quadrature,
                true,
            ));
        }
    }
    Ok(out)
}

/// `W̃₂(Ψ_i L) = r_Ψ W̃_{i+1}(L)` for `i = 0, 1`.
pub fn check_dual_mean_radius_identity(psi: &RadialBMHomomorphism, l: &StarBody) -> Result<Vec<TheoremCheck>> {
    (0..2)
        .map(|i| {
            Ok(TheoremCheck::new(
                Family::DualMeanRadiusIdentity,
                psi.name(),
                format!("i={i}"),
                dual_quermassintegral(&psi_ball(psi, l, i)?, 2)?,
                psi.radius() * dual_quermassintegral(l, i + 1)?,
                Sense::Equal,
                Rung::Quadrature,
                true,
            ))
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Classical inequalities and closed-form anchors
// ---------------------------------------------------------------------------

/// `V(K, K, L)³ ≥ V(K)² V(L)`.
pub fn check_classical_minkowski(k: &Polytope, l: &Polytope, grid: &SphericalGrid) -> Result<TheoremCheck> {
    let v1 = w_i_pair(k, l, 0)?;
    Ok(TheoremCheck::new(
        Family::ClassicalMinkowski,
        "none",
        "",
        v1.powi(3),
        k.volume().powi(2) * l.volume(),
        Sense::AtLeast,
        Rung::Exact,
        are_homothetic(k, l, grid),
    ))
}

/// `V(K + L)^{1/3} ≥ V(K)^{1/3} + V(L)^{1/3}`.
pub fn check_classical_brunn_minkowski(k: &Polytope, l: &Polytope, grid: &SphericalGrid) -> Result<TheoremCheck> {
    let s = minkowski_sum(k, l, 1.0, 1.0)?;
    Ok(TheoremCheck::new(
        Family::ClassicalBrunnMinkowski,
        "none",
        "",
        s.volume().cbrt(),
        k.volume().cbrt() + l.volume().cbrt(),
        Sense::AtLeast,
        Rung::Exact,
        are_homothetic(k, l, grid),
    ))
}

/// `Ṽ₋₁(K, L)³ ≥ V(K)⁴ V(L)^{−1}`.
pub fn check_dual_minkowski_classical(k: &StarBody, l: &StarBody) -> Result<TheoremCheck> {
    Ok(TheoremCheck::new(
        Family::DualMinkowskiClassical,
        "none",
        "",
        dual_v_r(k, l, -1.0)?.powi(3),
        volume_star(k).powi(4) / volume_star(l),
        Sense::AtLeast,
        Rung::Quadrature,
        are_dilates(k, l),
    ))
}

/// A closed-form anchor value compared with its computed counterpart.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Anchor {
    pub name: String,
    pub computed: f64,
    pub expected: f64,
    pub abs_error: f64,
}

impl Anchor {
    fn new(name: &str, computed: f64, expected: f64) -> Self {
        Anchor { name: name.into(), computed, expected, abs_error: (computed - expected).abs() }
    }
}

/// Equality case of Petty's projection inequality at the ball:
/// `V(B)² V(Π*B) = (4/3)³`, with `h(ΠB) ≡ π` from pole-aligned quadrature.
pub fn petty_ball_anchor(grid: &Arc<SphericalGrid>) -> Result<Anchor> {
    let pb = apply_bm_ball(&BMHomomorphism::projection(), grid)?;
    let v = kappa(3).powi(2) * polar_volume(&pb)?;
    Ok(Anchor::new("petty_ball", v, 64.0 / 27.0))
}

/// Equality case of the Busemann–Petty centroid inequality at the ball:
/// `V(ΓB)/V(B) = (3/8)³`, with `ΓB` a ball, so its volume is `κ₃ h³`.
pub fn busemann_petty_ball_anchor(grid: &Arc<SphericalGrid>) -> Result<Anchor> {
    let ball = StarBody::ball(grid.clone(), 1.0)?;
    let gamma = centroid_body(&ball)?;
    let h = gamma.eval([0.0, 0.0, 1.0]);
    let spread = gamma.samples().iter().map(|x| (x - h).abs()).fold(0.0, f64::max);
    if spread > 1e-6 {
        return Err(GeomError::Degenerate(format!("centroid body of the ball is not round (spread {spread:e})")));
    }
    Ok(Anchor::new("busemann_petty_ball", kappa(3) * h.powi(3) / volume_star(&ball), 27.0 / 512.0))
}

/// Steiner-type expansion `V(K + tL) = Σ C(3, i) tⁱ V(K[3−i], L[i])`;
/// returns the relative deviation.
pub fn volume_expansion_deviation(k: &Polytope, l: &Polytope, t: f64) -> Result<f64> {
    let direct = minkowski_sum(k, l, 1.0, t)?.volume();
    let (v0, v3) = (k.volume(), l.volume());
    let v1 = mixed_volume(k, k, l)?;
    let v2 = mixed_volume(k, l, l)?;
    let poly = v0 + 3.0 * t * v1 + 3.0 * t * t * v2 + t.powi(3) * v3;
    Ok((direct - poly).abs() / direct.abs())
}

/// Dual expansion `V(K +̃ tL) = Σ C(3, i) tⁱ Ṽ_i(K, L)`; returns the relative deviation.
pub fn dual_volume_expansion_deviation(k: &StarBody, l: &StarBody, t: f64) -> Result<f64> {
    let direct = volume_star(&radial_sum(k, l, 1.0, t)?);
    let mut poly = 0.0;
    for (i, c) in [1.0, 3.0, 3.0, 1.0].iter().enumerate() {
        poly += c * t.powi(i as i32) * dual_v_r(k, l, i as f64)?;
    }
    Ok((direct - poly).abs() / direct.abs())
}

// ---------------------------------------------------------------------------
// Harness
// ---------------------------------------------------------------------------

/// Configuration of [`run_suite`].
#[derive(Clone)]
pub struct SuiteConfig {
    pub trials: u64,
    /// Index of the first trial; trial `t` always sees the same inputs.
    pub first_trial: u64,
    pub seed: u64,
    pub grid_resolution: usize,
    pub families: Vec<Family>,
    pub bm_ops: Vec<BMHomomorphism>,
    pub radial_ops: Vec<RadialBMHomomorphism>,
    /// Worker threads; `None` uses the global pool.
    pub threads: Option<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        SuiteConfig {
            trials: 200,
            first_trial: 0,
            seed: 7,
            grid_resolution: DEFAULT_GRID_RESOLUTION,
            families: Family::ALL.to_vec(),
            bm_ops: vec![BMHomomorphism::projection(), BMHomomorphism::theta()],
            radial_ops: vec![RadialBMHomomorphism::intersection()],
            threads: None,
        }
    }
}

/// Configuration echoed into the report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportConfig {
    pub seed: u64,
    pub trials: u64,
    pub first_trial: u64,
    pub grid_resolution: usize,
    pub families: Vec<Family>,
    pub operators: Vec<String>,
}

/// Aggregate statistics of one (family, operator) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyStats {
    pub family: Family,
    pub operator: String,
    pub trials: u64,
    pub checks: u64,
    pub violations: u64,
    pub equality_failures: u64,
    pub errors: u64,
    pub equality_checks: u64,
    /// Smallest margin over all checks (`None` if none finite).
    pub min_margin: Option<f64>,
    /// Largest `|margin|` over the equality-case checks.
    pub max_equality_deviation: Option<f64>,
    /// Counts per margin bin; see [`MARGIN_BIN_EDGES`].
    pub margin_histogram: Vec<u64>,
}

/// Kind of a failing record.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Violation,
    EqualityFailure,
    Error,
}

/// A failing check or trial, with the command that reproduces it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub kind: FailureKind,
    pub family: Family,
    pub operator: String,
    pub trial: u64,
    pub params: String,
    pub lhs: Option<f64>,
    pub rhs: Option<f64>,
    pub margin: Option<f64>,
    pub tolerance: Option<f64>,
    pub inputs: String,
    pub message: String,
    pub reproduce: String,
}

/// The deterministic part of a suite run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub schema_version: u32,
    pub config: ReportConfig,
    pub total_trials: u64,
    pub total_checks: u64,
    pub violations: u64,
    pub equality_failures: u64,
    pub errors: u64,
    pub families: Vec<FamilyStats>,
    /// Combinations skipped because the operator does not meet the family's hypotheses.
    pub skipped: Vec<String>,
    pub failures: Vec<FailureRecord>,
}

impl SuiteReport {
    /// No violations, equality failures or trial errors.
    pub fn clean(&self) -> bool {
        self.violations == 0 && self.equality_failures == 0 && self.errors == 0
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// One evaluated check with its trial coordinates (a row of the CSV export).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRow {
    pub family: Family,
    pub operator: String,
    pub trial: u64,
    pub params: String,
    pub lhs: f64,
    pub rhs: f64,
    pub margin: f64,
    pub rung: Rung,
    pub equality_expected: bool,
    pub passed: bool,
}

/// Report plus every evaluated check.
#[derive(Debug, Clone)]
pub struct SuiteOutcome {
    pub report: SuiteReport,
    pub rows: Vec<CheckRow>,
}

impl SuiteOutcome {
    /// Margin table as CSV.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &self.rows {
            w.serialize(r).map_err(|e| GeomError::Format(e.to_string()))?;
        }
        let bytes = w.into_inner().map_err(|e| GeomError::Format(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| GeomError::Format(e.to_string()))
    }
}

/// Families that draw the same inputs for a given trial index. The convex
/// and polar inequality families share one pair of polytopes, the dual
/// inequality families one pair of star bodies; every other family has its
/// own input stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum InputStream {
    PolytopePair,
    StarPair,
    Single(Family),
}

impl InputStream {
    fn of(family: Family) -> Self {
        use Family::*;
        match family {
            MinkowskiType | AleksandrovFenchelType | ProductInequality | MixedPowerInequality | BrunnMinkowskiType
            | PolarMinkowski | PolarAleksandrovFenchel | PolarCorollaries | PolarBrunnMinkowski => {
                InputStream::PolytopePair
            }
            DualAleksandrovFenchel | DualCorollaries | DualBrunnMinkowski => InputStream::StarPair,
            other => InputStream::Single(other),
        }
    }

    fn id(self) -> u64 {
        match self {
            InputStream::Single(f) => f.index(),
            InputStream::PolytopePair => 1 << 16,
            InputStream::StarPair => (1 << 16) + 1,
        }
    }
}

/// Per-trial generator: `ChaCha8` seeded with the suite seed, on a stream
/// determined by the input stream of the family and the trial index.
pub fn trial_rng(seed: u64, family: Family, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream((InputStream::of(family).id() << 40) ^ trial);
    rng
}

/// Equality-case inputs fed on probe trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Probe {
    None,
    /// `L = K` (the only equality case asserted for Aleksandrov–Fenchel type statements).
    Identical,
    /// `L = λK + t` for polytopes, `L = λK` for star bodies.
    Homothet,
}

fn probe_for(trial: u64) -> Probe {
    match trial % (2 * PROBE_EVERY) {
        0 => Probe::Identical,
        t if t % PROBE_EVERY == 0 => Probe::Homothet,
        _ => Probe::None,
    }
}

struct Inputs<'a> {
    rng: ChaCha8Rng,
    grid: &'a Arc<SphericalGrid>,
    digest: Vec<String>,
}

impl<'a> Inputs<'a> {
    fn new(seed: u64, family: Family, trial: u64, grid: &'a Arc<SphericalGrid>) -> Self {
        Inputs { rng: trial_rng(seed, family, trial), grid, digest: vec![format!("seed={seed} trial={trial}")] }
    }

    fn polytope(&mut self, label: &str) -> Result<Polytope> {
        let seed: u64 = self.rng.gen();
        let k = self.rng.gen_range(POLYTOPE_VERTICES);
        self.digest.push(format!("{label}=poly(seed={seed},k={k})"));
        random_polytope(seed, k)
    }

    fn star(&mut self, label: &str) -> Result<StarBody> {
        self.star_on(label, self.grid.clone())
    }

    fn star_on(&mut self, label: &str, grid: Arc<SphericalGrid>) -> Result<StarBody> {
        let seed: u64 = self.rng.gen();
        self.digest.push(format!("{label}=star(seed={seed})"));
        random_star_body(grid, seed, STAR_SMOOTHNESS)
    }

    fn polytope_pair(&mut self, probe: Probe) -> Result<(Polytope, Polytope)> {
        let k = self.polytope("K")?;
        let l = match probe {
            Probe::None => self.polytope("L")?,
            Probe::Identical => {
                self.digest.push("L=K".into());
                k.clone()
            }
            Probe::Homothet => {
                let lambda = self.rng.gen_range(0.5..2.0);
                let t = vec3::scale(random_in_ball(&mut self.rng), 0.2);
                self.digest.push(format!("L={lambda:.6}*K+[{:.4},{:.4},{:.4}]", t[0], t[1], t[2]));
                k.dilate(lambda)?.translate(t)?
            }
        };
        Ok((k, l))
    }

    fn star_pair(&mut self, probe: Probe) -> Result<(StarBody, StarBody)> {
        let k = self.star("K")?;
        let l = match probe {
            Probe::None => self.star("L")?,
            Probe::Identical | Probe::Homothet => {
                let lambda = self.rng.gen_range(0.5..2.0);
                self.digest.push(format!("L={lambda:.6}*K"));
                k.dilate(lambda)?
            }
        };
        Ok((k, l))
    }
}

/// An operator as seen by the harness.
#[derive(Clone, Copy)]
enum Op<'a> {
    Convex(&'a BMHomomorphism),
    Radial(&'a RadialBMHomomorphism),
    None,
}

impl Op<'_> {
    fn name(&self) -> &str {
        match self {
            Op::Convex(p) => p.name(),
            Op::Radial(p) => p.name(),
            Op::None => "none",
        }
    }
}

/// The suite grid, refined to at least `resolution`.
fn refined_grid(grid: &Arc<SphericalGrid>, resolution: usize) -> Result<Arc<SphericalGrid>> {
    if grid.resolution() >= resolution {
        Ok(grid.clone())
    } else {
        Ok(Arc::new(build_grid(3, resolution)?))
    }
}

fn lemma_grid(grid: &Arc<SphericalGrid>) -> Result<Arc<SphericalGrid>> {
    refined_grid(grid, LEMMA_GRID_RESOLUTION)
}

type FamilyResult = Result<Vec<TheoremCheck>>;

/// Runs one trial of a set of families sharing an input stream and an
/// operator; returns the input digest and one result per family.
fn run_trial(families: &[Family], op: Op<'_>, seed: u64, trial: u64, grid: &Arc<SphericalGrid>) -> (String, Vec<FamilyResult>) {
    let first = families[0];
    let mut inp = Inputs::new(seed, first, trial, grid);
    let probe = probe_for(trial);
    let results = match (InputStream::of(first), op) {
        (InputStream::PolytopePair, Op::Convex(phi)) => match inp.polytope_pair(probe) {
            Ok((k, l)) => {
                let pair = ConvexPair::new(phi, &k, &l, grid);
                families.iter().map(|f| pair.family(*f)).collect()
            }
            Err(e) => vec![Err(e); families.len()],
        },
        (InputStream::StarPair, Op::Radial(psi)) => match inp.star_pair(probe) {
            Ok((k, l)) => {
                let pair = StarPair::new(psi, &k, &l);
                families.iter().map(|f| pair.family(*f)).collect()
            }
            Err(e) => vec![Err(e); families.len()],
        },
        _ => families.iter().map(|f| single_family(*f, op, probe, &mut inp, grid)).collect(),
    };
    (inp.digest.join(" "), results)
}

fn single_family(family: Family, op: Op<'_>, probe: Probe, inp: &mut Inputs<'_>, grid: &Arc<SphericalGrid>) -> FamilyResult {
    use Family::*;
    match (family, op) {
        (MixedAdjointness, Op::Convex(phi)) => {
            let (k, l) = inp.polytope_pair(Probe::None)?;
            check_mixed_adjointness(phi, &k, &l, &refined_grid(grid, DEFAULT_GRID_RESOLUTION)?)
        }
        (MeanWidthIdentity, Op::Convex(phi)) => {
            let k = inp.polytope("K")?;
            check_mean_width_identity(phi, &k, &lemma_grid(grid)?)
        }
        (PolarAdjointness, Op::Convex(phi)) => {
            let l = inp.star_on("L", lemma_grid(grid)?)?;
            let (k1, k2) = inp.polytope_pair(Probe::None)?;
            Ok(vec![check_polar_adjointness(phi, &l, &k1, &k2)?])
        }
        (DualAdjointness, Op::Radial(psi)) => {
            let (k, l) = inp.star_pair(Probe::None)?;
            check_dual_adjointness(psi, &k, &l)
        }
        (DualMeanRadiusIdentity, Op::Radial(psi)) => {
            let l = inp.star("L")?;
            check_dual_mean_radius_identity(psi, &l)
        }
        (ClassicalMinkowski, Op::None) => {
            let (k, l) = inp.polytope_pair(probe)?;
            Ok(vec![check_classical_minkowski(&k, &l, grid)?])
        }
        (ClassicalBrunnMinkowski, Op::None) => {
            let (k, l) = inp.polytope_pair(probe)?;
            Ok(vec![check_classical_brunn_minkowski(&k, &l, grid)?])
        }
        (DualMinkowskiClassical, Op::None) => {
            let (k, l) = inp.star_pair(probe)?;
            Ok(vec![check_dual_minkowski_classical(&k, &l)?])
        }
        _ => Err(GeomError::InvalidArgument(format!("operator '{}' cannot drive family '{}'", op.name(), family.name()))),
    }
}

/// Shell command that reruns a single trial.
fn reproduce_command(config: &SuiteConfig, family: Family, op: &str, trial: u64) -> String {
    let mut cmd = format!(
        "cbh suite --seed {} --first-trial {trial} --trials 1 --families {} --grid {}",
        config.seed,
        family.name(),
        config.grid_resolution
    );
    match config.bm_ops.iter().find(|phi| phi.name() == op) {
        Some(phi) if !is_builtin(&phi.kernel) => {
            cmd.push_str(&format!(" --ops {op} --kernel-name {op} --kernel-csv <profile.csv>"));
            if phi.is_even() {
                cmd.push_str(" --kernel-even");
            }
            if phi.is_support() {
                cmd.push_str(" --kernel-support");
            }
        }
        _ if op != "none" => cmd.push_str(&format!(" --ops {op}")),
        _ => {}
    }
    cmd
}

fn finite(x: f64) -> Option<f64> {
    x.is_finite().then_some(x)
}

fn histogram_bin(m: f64) -> usize {
    MARGIN_BIN_EDGES.iter().take_while(|e| m >= **e).count()
}

/// A unit of parallel work: one trial of the families of `pairs` that share
/// an input stream and an operator.
struct Task {
    pairs: Vec<usize>,
    trial: u64,
}

/// Runs every selected family against every applicable operator.
///
/// Trials are independent and run in parallel; results are assembled in
/// (family, operator, trial) order, so the report depends only on the
/// configuration. A failing trial is recorded, never propagated.
pub fn run_suite(config: &SuiteConfig) -> Result<SuiteOutcome> {
    let grid = Arc::new(build_grid(3, config.grid_resolution)?);
    let mut pairs: Vec<(Family, Op<'_>)> = Vec::new();
    let mut skipped = Vec::new();
    for &family in &config.families {
        match family.operator_class() {
            OperatorClass::Convex => pairs.extend(config.bm_ops.iter().map(|p| (family, Op::Convex(p)))),
            OperatorClass::Polar => {
                for p in &config.bm_ops {
                    match p.require_polar_capable() {
                        Ok(()) => pairs.push((family, Op::Convex(p))),
                        Err(e) => skipped.push(format!("{} with {}: {e}", family.name(), p.name())),
                    }
                }
            }
            OperatorClass::Radial => pairs.extend(config.radial_ops.iter().map(|p| (family, Op::Radial(p)))),
            OperatorClass::None => pairs.push((family, Op::None)),
        }
    }
    // Group (family, operator) pairs that can share a trial's inputs and images.
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, (family, op)) in pairs.iter().enumerate() {
        let stream = InputStream::of(*family);
        let shared = !matches!(stream, InputStream::Single(_));
        match groups.iter_mut().find(|g| {
            let (f0, op0) = &pairs[g[0]];
            shared && InputStream::of(*f0) == stream && op0.name() == op.name()
        }) {
            Some(g) => g.push(i),
            None => groups.push(vec![i]),
        }
    }
    let trials: Vec<u64> = (config.first_trial..config.first_trial + config.trials).collect();
    let tasks: Vec<Task> =
        groups.iter().flat_map(|g| trials.iter().map(|&trial| Task { pairs: g.clone(), trial })).collect();
    let run = || -> Vec<(String, Vec<FamilyResult>)> {
        tasks
            .par_iter()
            .map(|task| {
                let families: Vec<Family> = task.pairs.iter().map(|&p| pairs[p].0).collect();
                let op = pairs[task.pairs[0]].1;
                std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
                    run_trial(&families, op, config.seed, task.trial, &grid)
                }))
                .unwrap_or_else(|_| {
                    (String::new(), vec![Err(GeomError::Degenerate("trial panicked".into())); families.len()])
                })
            })
            .collect()
    };
    let results = match config.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| GeomError::InvalidArgument(e.to_string()))?
            .install(run),
        None => run(),
    };
    // slots[pair][trial offset]
    let mut slots: Vec<Vec<Option<(String, FamilyResult)>>> =
        pairs.iter().map(|_| (0..trials.len()).map(|_| None).collect()).collect();
    for (task, (digest, res)) in tasks.iter().zip(results) {
        for (&p, r) in task.pairs.iter().zip(res) {
            slots[p][(task.trial - config.first_trial) as usize] = Some((digest.clone(), r));
        }
    }

    let mut stats = Vec::with_capacity(pairs.len());
    let mut failures = Vec::new();
    let mut rows = Vec::new();
    for ((family, op), slot) in pairs.iter().zip(slots) {
        let mut st = FamilyStats {
            family: *family,
            operator: op.name().into(),
            trials: config.trials,
            checks: 0,
            violations: 0,
            equality_failures: 0,
            errors: 0,
            equality_checks: 0,
            min_margin: None,
            max_equality_deviation: None,
            margin_histogram: vec![0; MARGIN_BIN_EDGES.len() + 1],
        };
        for (trial, entry) in trials.iter().copied().zip(slot) {
            let (digest, result) = entry.expect("every trial slot is filled");
            let reproduce = reproduce_command(config, *family, op.name(), trial);
            let checks = match result {
                Ok(c) => c,
                Err(e) => {
                    st.errors += 1;
                    failures.push(FailureRecord {
                        kind: FailureKind::Error,
                        family: *family,
                        operator: op.name().into(),
                        trial,
                        params: String::new(),
                        lhs: None,
                        rhs: None,
                        margin: None,
                        tolerance: None,
                        inputs: digest,
                        message: e.to_string(),
                        reproduce,
                    });
                    continue;
                }
            };
            for mut c in checks {
                c.inputs = digest.clone();
                st.checks += 1;
                if c.margin.is_finite() {
                    st.min_margin = Some(st.min_margin.map_or(c.margin, |m| m.min(c.margin)));
                    st.margin_histogram[histogram_bin(c.margin)] += 1;
                }
                if c.equality_expected {
                    st.equality_checks += 1;
                    let d = c.margin.abs();
                    if d.is_finite() {
                        st.max_equality_deviation = Some(st.max_equality_deviation.map_or(d, |m| m.max(d)));
                    }
                }
                let kinds = [
                    (c.is_violation(), FailureKind::Violation, format!("margin below -{:.0e}", c.tolerance())),
                    (
                        c.is_equality_failure(),
                        FailureKind::EqualityFailure,
                        format!("equality case off by more than {EQUALITY_TOL:.0e}"),
                    ),
                ];
                for (hit, kind, message) in kinds {
                    if !hit {
                        continue;
                    }
                    match kind {
                        FailureKind::Violation => st.violations += 1,
                        _ => st.equality_failures += 1,
                    }
                    failures.push(FailureRecord {
                        kind,
                        family: *family,
                        operator: op.name().into(),
                        trial,
                        params: c.params.clone(),
                        lhs: finite(c.lhs),
                        rhs: finite(c.rhs),
                        margin: finite(c.margin),
                        tolerance: Some(c.tolerance()),
                        inputs: c.inputs.clone(),
                        message,
                        reproduce: reproduce.clone(),
                    });
                }
                rows.push(CheckRow {
                    family: *family,
                    operator: op.name().into(),
                    trial,
                    params: c.params.clone(),
                    lhs: c.lhs,
                    rhs: c.rhs,
                    margin: c.margin,
                    rung: c.rung,
                    equality_expected: c.equality_expected,
                    passed: c.passed(),
                });
            }
        }
        stats.push(st);
    }
    let mut operators: Vec<String> = config.bm_ops.iter().map(|p| p.name().to_string()).collect();
    operators.extend(config.radial_ops.iter().map(|p| p.name().to_string()));
    let report = SuiteReport {
        schema_version: SCHEMA_VERSION,
        config: ReportConfig {
            seed: config.seed,
            trials: config.trials,
            first_trial: config.first_trial,
            grid_resolution: config.grid_resolution,
            families: config.families.clone(),
            operators,
        },
        total_trials: (pairs.len() * trials.len()) as u64,
        total_checks: stats.iter().map(|s| s.checks).sum(),
        violations: stats.iter().map(|s| s.violations).sum(),
        equality_failures: stats.iter().map(|s| s.equality_failures).sum(),
        errors: stats.iter().map(|s| s.errors).sum(),
        families: stats,
        skipped,
        failures,
    };
    Ok(SuiteOutcome { report, rows })
}

/// The deliberately invalid operator used as a negative control: the odd
/// profile `ğ(t) = t`, falsely flagged as even with a support-function
/// generator. Its images are degenerate, so the suite must flag it.
pub fn negative_control_operator() -> BMHomomorphism {
    BMHomomorphism { kernel: crate::sphere::ZonalKernel::new("odd-control", |t| t, true, true) }
}

/// `h(ΠB) = π` and related ball fixed points are `π`-multiples; exposed for callers.
pub const PI_RADIUS: f64 = PI;

#[cfg(test)]
mod tests {
    use super::*;

    fn grid(r: usize) -> Arc<SphericalGrid> {
        Arc::new(build_grid(3, r).unwrap())
    }

    #[test]
    fn margin_sign_conventions() {
        assert!(margin(2.0, 1.0, Sense::AtLeast) > 0.0);
        assert!(margin(2.0, 1.0, Sense::AtMost) < 0.0);
        assert_eq!(margin(0.0, 0.0, Sense::Equal), 0.0);
        assert!((margin(1.0, 1.0 + 1e-3, Sense::Equal) + 1e-3 / 1.001).abs() < 1e-15);
        assert!(margin(f64::NAN, 1.0, Sense::AtLeast).is_nan());
    }

    #[test]
    fn cube_pair_is_an_equality_case() {
        let g = grid(12);
        let c = Polytope::cube(1.0).unwrap();
        let pi = BMHomomorphism::projection();
        for check in ConvexPair::new(&pi, &c, &c, &g).minkowski_type().unwrap() {
            assert!(check.equality_expected && check.margin.abs() <= 1e-6, "{check}");
        }
    }

    #[test]
    fn cube_and_simplex_is_strict() {
        let g = grid(12);
        let c = Polytope::cube(1.0).unwrap();
        let s = Polytope::standard_simplex();
        let pi = BMHomomorphism::projection();
        let checks = ConvexPair::new(&pi, &c, &s, &g).minkowski_type().unwrap();
        assert!(checks[0].margin > 0.0 && !checks[0].equality_expected, "{}", checks[0]);
        assert_eq!(checks[0].rung, Rung::Exact);
    }

    #[test]
    fn homothets_give_equality_in_the_brunn_minkowski_type_inequality() {
        let g = grid(12);
        let k = random_polytope(5, 9).unwrap();
        let l = k.dilate(2.0).unwrap().translate([0.1, -0.2, 0.05]).unwrap();
        let pi = BMHomomorphism::projection();
        for check in ConvexPair::new(&pi, &k, &l, &g).brunn_minkowski_type().unwrap() {
            assert!(check.equality_expected && check.margin.abs() <= 1e-4, "{check}");
        }
    }

    #[test]
    fn polar_track_rejects_non_even_operators() {
        let g = grid(8);
        let c = Polytope::cube(1.0).unwrap();
        let odd = BMHomomorphism { kernel: crate::sphere::ZonalKernel::new("odd", |t| t.max(0.0), false, true) };
        assert!(matches!(ConvexPair::new(&odd, &c, &c, &g).polar_minkowski(), Err(GeomError::OperatorRejected(_))));
    }

    #[test]
    fn mixed_adjointness_for_cube_and_simplex() {
        let g = grid(16);
        let c = Polytope::cube(1.0).unwrap();
        let s = Polytope::standard_simplex();
        let checks = check_mixed_adjointness(&BMHomomorphism::projection(), &c, &s, &g).unwrap();
        // i = j = 0 is a double sum over facet pairs, symmetric term by term
        assert!(checks[0].margin.abs() < 1e-12, "{}", checks[0]);
        assert!(checks.iter().all(|c| c.margin.abs() <= 1e-3), "{:?}", checks);
    }

    #[test]
    fn mean_width_identity_for_the_cube() {
        let g = grid(32);
        let c = Polytope::cube(1.0).unwrap();
        let checks = check_mean_width_identity(&BMHomomorphism::projection(), &c, &g).unwrap();
        assert!((checks[0].rhs - 8.0 * PI).abs() < 1e-9);
        assert!((checks[0].lhs - 8.0 * PI).abs() < 5e-2);
    }

    #[test]
    fn dual_mean_radius_identity_at_the_ball() {
        let g = grid(12);
        let b = StarBody::ball(g.clone(), 1.0).unwrap();
        let checks = check_dual_mean_radius_identity(&RadialBMHomomorphism::intersection(), &b).unwrap();
        assert!((checks[0].lhs - PI * kappa(3)).abs() < 1e-9, "{}", checks[0]);
        assert!(checks.iter().all(|c| c.passed()));
    }

    #[test]
    fn ball_anchors() {
        let g = grid(24);
        assert!(petty_ball_anchor(&g).unwrap().abs_error < 1e-3);
        assert!(busemann_petty_ball_anchor(&g).unwrap().abs_error < 1e-3);
    }

    #[test]
    fn expansion_polynomials() {
        let k = random_polytope(1, 9).unwrap();
        let l = random_polytope(2, 7).unwrap();
        assert!(volume_expansion_deviation(&k, &l, 0.7).unwrap() < 1e-8);
        let g = grid(12);
        let a = random_star_body(g.clone(), 3, 3).unwrap();
        let b = random_star_body(g, 4, 3).unwrap();
        assert!(dual_volume_expansion_deviation(&a, &b, 1.3).unwrap() < 1e-12);
    }

    #[test]
    fn empty_suite_is_clean() {
        let cfg = SuiteConfig { trials: 0, ..SuiteConfig::default() };
        let out = run_suite(&cfg).unwrap();
        assert!(out.report.clean());
        assert_eq!(out.report.total_checks, 0);
    }

    #[test]
    fn trial_inputs_depend_only_on_coordinates() {
        let g = grid(8);
        let op = BMHomomorphism::projection();
        let fams = [Family::MinkowskiType, Family::PolarMinkowski];
        let a = run_trial(&fams, Op::Convex(&op), 7, 5, &g);
        let b = run_trial(&fams[..1], Op::Convex(&op), 7, 5, &g);
        assert_eq!(a.0, b.0);
        assert_eq!(a.1[0].as_ref().unwrap(), b.1[0].as_ref().unwrap());
        let c = run_trial(&fams, Op::Convex(&op), 7, 6, &g);
        assert_ne!(a.0, c.0);
    }

    #[test]
    fn shared_pair_matches_fresh_evaluation() {
        let g = grid(8);
        let pi = BMHomomorphism::projection();
        let k = random_polytope(11, 8).unwrap();
        let l = random_polytope(12, 10).unwrap();
        let shared = ConvexPair::new(&pi, &k, &l, &g);
        let _ = shared.polar_corollaries().unwrap();
        let fresh = ConvexPair::new(&pi, &k, &l, &g);
        assert_eq!(shared.brunn_minkowski_type().unwrap(), fresh.brunn_minkowski_type().unwrap());
        assert_eq!(shared.minkowski_type().unwrap(), fresh.minkowski_type().unwrap());
    }

    #[test]
    fn probe_schedule() {
        assert_eq!(probe_for(0), Probe::Identical);
        assert_eq!(probe_for(4), Probe::Homothet);
        assert_eq!(probe_for(8), Probe::Identical);
        assert_eq!(probe_for(3), Probe::None);
    }
}
