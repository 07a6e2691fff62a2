//! Convex cones, the Hilbert projective metric, Birkhoff contraction and
//! almost-multiplicativity certificates.
//!
//! Cones are closed, convex, pointed and have nonempty interior. A
//! polyhedral cone is stored through its extreme rays and its facet normals
//! `n_j` (so that `x ∈ C` iff `n_j · x ≥ 0` for all `j`); a circular cone
//! `{x : ‖x − (x·a)a‖ ≤ c (x·a)}` through its unit axis `a` and aperture `c`.
//!
//! Angular quantities (margins, inscribed radii) are measured on the unit
//! sphere in radians.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::cocycle::{level_table, CocycleSpec, TableOptions};
use crate::error::{Error, Result};
use crate::matkernel::{op_norm, Matrix};
use crate::subshift::enumerate_words;

const TOL: f64 = 1e-12;

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn unit(a: &[f64]) -> Vec<f64> {
    let n = norm(a);
    a.iter().map(|x| x / n).collect()
}

fn angle(a: &[f64], b: &[f64]) -> f64 {
    let c = dot(a, b) / (norm(a) * norm(b));
    c.clamp(-1.0, 1.0).acos()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConeKind {
    Orthant,
    Circular { axis: Vec<f64>, aperture: f64 },
    Generated { rays: Vec<Vec<f64>> },
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Cone {
    dim: usize,
    #[serde(flatten)]
    kind: ConeKind,
    #[serde(skip)]
    rays: Vec<Vec<f64>>,
    #[serde(skip)]
    facets: Vec<Vec<f64>>,
}

impl Cone {
    /// The nonnegative orthant of `R^k`.
    pub fn orthant(k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::invalid("cone dimension must be at least 1"));
        }
        let basis: Vec<Vec<f64>> = (0..k)
            .map(|i| (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
            .collect();
        Ok(Cone { dim: k, kind: ConeKind::Orthant, rays: basis.clone(), facets: basis })
    }

    /// `{x : ‖x − (x·a)a‖ ≤ c (x·a)}` for the unit axis `a` and `c ∈ (0, 1]`.
    pub fn circular(axis: Vec<f64>, aperture: f64) -> Result<Self> {
        if axis.len() < 2 {
            return Err(Error::invalid("circular cones need dimension at least 2"));
        }
        if !(aperture > 0.0 && aperture <= 1.0) {
            return Err(Error::invalid(format!("aperture must lie in (0, 1], got {aperture}")));
        }
        let n = norm(&axis);
        if !(n.is_finite() && n > 0.0) {
            return Err(Error::invalid("cone axis must be a nonzero finite vector"));
        }
        let axis = unit(&axis);
        Ok(Cone { dim: axis.len(), kind: ConeKind::Circular { axis, aperture }, rays: vec![], facets: vec![] })
    }

    /// The cone spanned by finitely many rays. Redundant rays are kept out
    /// of the extreme-ray list.
    pub fn generated(rays: Vec<Vec<f64>>) -> Result<Self> {
        let k = rays.first().map_or(0, Vec::len);
        if k == 0 {
            return Err(Error::invalid("generated cone needs at least one nonzero ray"));
        }
        if rays.iter().any(|r| r.len() != k || r.iter().any(|x| !x.is_finite()) || norm(r) == 0.0) {
            return Err(Error::invalid("cone rays must be nonzero finite vectors of equal length"));
        }
        let mut units: Vec<Vec<f64>> = Vec::new();
        for r in &rays {
            let u = unit(r);
            if !units.iter().any(|v| angle(v, &u) <= 1e-10) {
                units.push(u);
            }
        }
        let facets = facets_of(&units, k)?;
        let extreme: Vec<Vec<f64>> = units
            .into_iter()
            .filter(|r| is_extreme(r, &facets, k))
            .collect();
        Ok(Cone { dim: k, kind: ConeKind::Generated { rays }, rays: extreme, facets })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ConeKind {
        &self.kind
    }

    pub fn is_polyhedral(&self) -> bool {
        !matches!(self.kind, ConeKind::Circular { .. })
    }

    /// Unit extreme rays of a polyhedral cone; empty for circular cones.
    pub fn extreme_rays(&self) -> &[Vec<f64>] {
        &self.rays
    }

    /// Unit inward facet normals of a polyhedral cone.
    pub fn facet_normals(&self) -> &[Vec<f64>] {
        &self.facets
    }

    /// Signed angular distance from the direction of `v` to the boundary,
    /// positive in the interior.
    pub fn angular_depth(&self, v: &[f64]) -> f64 {
        let u = unit(v);
        match &self.kind {
            ConeKind::Circular { axis, aperture } => {
                let along = dot(&u, axis);
                let perp = (1.0 - along * along).max(0.0).sqrt();
                aperture.atan() - perp.atan2(along)
            }
            _ => self.facets.iter().map(|n| dot(n, &u).clamp(-1.0, 1.0).asin()).fold(f64::INFINITY, f64::min),
        }
    }

    /// Membership with a relative tolerance.
    pub fn contains(&self, v: &[f64]) -> bool {
        v.len() == self.dim && norm(v) > 0.0 && self.angular_depth(v) >= -1e-10
    }

    // c (x·a) − ‖x − (x·a)a‖ scaled by ‖x‖-independent units
    fn circular_slack(axis: &[f64], aperture: f64, x: &[f64]) -> f64 {
        let along = dot(x, axis);
        let perp: f64 = x.iter().zip(axis).map(|(xi, ai)| (xi - along * ai).powi(2)).sum::<f64>().sqrt();
        aperture * along - perp
    }

    /// `sup {λ ≥ 0 : w − λv ∈ C}` for `v, w ∈ C`.
    fn alpha(&self, v: &[f64], w: &[f64]) -> f64 {
        match &self.kind {
            ConeKind::Circular { axis, aperture } => {
                let f = |lam: f64| {
                    let x: Vec<f64> = w.iter().zip(v).map(|(wi, vi)| wi - lam * vi).collect();
                    Cone::circular_slack(axis, *aperture, &x)
                };
                let scale = norm(w) / norm(v);
                if f(0.0) <= TOL * norm(w) {
                    return 0.0;
                }
                let mut hi = scale;
                while f(hi) >= 0.0 {
                    hi *= 2.0;
                    if !hi.is_finite() {
                        return f64::INFINITY;
                    }
                }
                let mut lo = 0.0;
                while hi - lo > 1e-12 * hi {
                    let mid = 0.5 * (lo + hi);
                    if f(mid) >= 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                lo
            }
            _ => {
                let nw = norm(w);
                let mut best = f64::INFINITY;
                for n in &self.facets {
                    let nv = dot(n, v);
                    let nwv = dot(n, w);
                    if nv > TOL * norm(v) {
                        // w on a facet that v avoids: α = 0
                        let num = if nwv.abs() <= TOL * nw { 0.0 } else { nwv };
                        best = best.min(num / nv);
                    }
                }
                best.max(0.0)
            }
        }
    }

    /// Boundary directions used for images of the cone: the extreme rays
    /// of a polyhedral cone, or a mesh of the boundary of a circular one.
    pub fn boundary_mesh(&self) -> Vec<Vec<f64>> {
        match &self.kind {
            ConeKind::Circular { axis, aperture } => {
                let k = self.dim;
                let basis = orthonormal_complement(axis);
                let dirs: Vec<Vec<f64>> = match k {
                    2 => vec![vec![1.0], vec![-1.0]],
                    3 => (0..720)
                        .map(|i| {
                            let th = i as f64 * std::f64::consts::TAU / 720.0;
                            vec![th.cos(), th.sin()]
                        })
                        .collect(),
                    _ => sphere_points(k - 1, 512),
                };
                dirs.iter()
                    .map(|d| {
                        let mut x = axis.clone();
                        for (coef, b) in d.iter().zip(&basis) {
                            for (xi, bi) in x.iter_mut().zip(b) {
                                *xi += aperture * coef * bi;
                            }
                        }
                        unit(&x)
                    })
                    .collect()
            }
            _ => self.rays.clone(),
        }
    }
}

/// Facet normals of the cone spanned by unit `rays` in `R^k`, from all
/// `(k−1)`-subsets of rays that span a supporting hyperplane.
fn facets_of(rays: &[Vec<f64>], k: usize) -> Result<Vec<Vec<f64>>> {
    let all = DMatrix::from_fn(rays.len(), k, |i, j| rays[i][j]);
    if all.rank(1e-10) < k {
        return Err(Error::invalid("cone rays do not span the space (empty interior)"));
    }
    if k == 1 {
        let s = rays[0][0].signum();
        if rays.iter().any(|r| r[0].signum() != s) {
            return Err(Error::invalid("cone contains a line"));
        }
        return Ok(vec![vec![s]]);
    }
    let mut facets: Vec<Vec<f64>> = Vec::new();
    for subset in (0..rays.len()).combinations(k - 1) {
        let mut m = DMatrix::<f64>::zeros(k, k);
        for (row, &i) in subset.iter().enumerate() {
            for j in 0..k {
                m[(row, j)] = rays[i][j];
            }
        }
        let svd = m.svd(false, true);
        let mut sv: Vec<(usize, f64)> = svd.singular_values.iter().copied().enumerate().collect();
        sv.sort_by(|a, b| a.1.total_cmp(&b.1));
        if sv[1].1 <= 1e-10 {
            continue; // the subset spans less than a hyperplane
        }
        let v_t = svd.v_t.expect("requested v_t");
        let mut n: Vec<f64> = v_t.row(sv[0].0).iter().copied().collect();
        let signs: Vec<f64> = rays.iter().map(|r| dot(&n, r)).collect();
        let pos = signs.iter().any(|&s| s > 1e-10);
        let neg = signs.iter().any(|&s| s < -1e-10);
        if pos && neg {
            continue;
        }
        if neg {
            n.iter_mut().for_each(|x| *x = -*x);
        }
        if !pos && !neg {
            continue;
        }
        let n = unit(&n);
        if !facets.iter().any(|f| angle(f, &n) <= 1e-9) {
            facets.push(n);
        }
    }
    let fm = DMatrix::from_fn(facets.len(), k, |i, j| facets[i][j]);
    if facets.is_empty() || fm.rank(1e-10) < k {
        return Err(Error::invalid("cone contains a line (not pointed)"));
    }
    Ok(facets)
}

fn is_extreme(r: &[f64], facets: &[Vec<f64>], k: usize) -> bool {
    if k == 1 {
        return true;
    }
    let on: Vec<&Vec<f64>> = facets.iter().filter(|n| dot(n, r).abs() <= 1e-10).collect();
    if on.len() < k - 1 {
        return false;
    }
    DMatrix::from_fn(on.len(), k, |i, j| on[i][j]).rank(1e-10) >= k - 1
}

fn orthonormal_complement(axis: &[f64]) -> Vec<Vec<f64>> {
    let k = axis.len();
    let mut basis: Vec<Vec<f64>> = vec![axis.to_vec()];
    for i in 0..k {
        let mut e: Vec<f64> = (0..k).map(|j| if i == j { 1.0 } else { 0.0 }).collect();
        for b in &basis {
            let c = dot(&e, b);
            e.iter_mut().zip(b).for_each(|(x, y)| *x -= c * y);
        }
        if norm(&e) > 1e-8 {
            basis.push(unit(&e));
        }
        if basis.len() == k {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Deterministic, roughly uniform points on the unit sphere of `R^d`
/// (`d ≥ 3`), from an additive-recurrence sequence mapped through the
/// inverse normal of each coordinate pair.
fn sphere_points(d: usize, count: usize) -> Vec<Vec<f64>> {
    // generalized golden ratio for dimension d
    let mut phi = 2.0_f64;
    for _ in 0..50 {
        phi = (1.0 + phi).powf(1.0 / (d as f64 + 1.0));
    }
    let alphas: Vec<f64> = (1..=d).map(|j| (1.0 / phi.powi(j as i32)).fract()).collect();
    (1..=count)
        .map(|i| {
            let u: Vec<f64> = alphas.iter().map(|a| (0.5 + a * i as f64).fract()).collect();
            // Box–Muller on consecutive coordinate pairs
            let mut g = Vec::with_capacity(d);
            let mut j = 0;
            while g.len() < d {
                let u1 = u[j % d].max(1e-12);
                let u2 = u[(j + 1) % d];
                let r = (-2.0 * u1.ln()).sqrt();
                g.push(r * (std::f64::consts::TAU * u2).cos());
                if g.len() < d {
                    g.push(r * (std::f64::consts::TAU * u2).sin());
                }
                j += 2;
            }
            unit(&g)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct HilbertDistance {
    pub alpha: f64,
    pub beta: f64,
    /// `log(β/α)`; infinite when `α = 0` or `β = ∞`.
    pub d: f64,
}

/// Hilbert projective distance between `v` and `w` in `C`.
pub fn hilbert_distance(v: &[f64], w: &[f64], c: &Cone) -> Result<HilbertDistance> {
    for (name, x) in [("v", v), ("w", w)] {
        if x.len() != c.dim() {
            return Err(Error::invalid(format!("{name} has length {}, cone dimension is {}", x.len(), c.dim())));
        }
        if !c.contains(x) {
            return Err(Error::invalid(format!("{name} lies outside the cone")));
        }
    }
    let alpha = c.alpha(v, w);
    let back = c.alpha(w, v);
    let beta = if back == 0.0 { f64::INFINITY } else { 1.0 / back };
    let d = if alpha == 0.0 || beta.is_infinite() { f64::INFINITY } else { (beta / alpha).ln().max(0.0) };
    Ok(HilbertDistance { alpha, beta, d })
}

fn distance(v: &[f64], w: &[f64], c: &Cone) -> f64 {
    let alpha = c.alpha(v, w);
    let back = c.alpha(w, v);
    if alpha == 0.0 || back == 0.0 {
        f64::INFINITY
    } else {
        (1.0 / (back * alpha)).ln().max(0.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Invariance {
    pub invariant: bool,
    /// Least angular depth of an image boundary ray inside `C`; positive iff
    /// every generator maps `C` strictly inside itself.
    pub margin: f64,
}

fn image_depth(m: &Matrix, c: &Cone) -> f64 {
    c.boundary_mesh()
        .iter()
        .map(|r| c.angular_depth(&m.apply(r)))
        .fold(f64::INFINITY, f64::min)
}

/// Whether every generator maps `C` into its interior. Polyhedral cones
/// are checked on their extreme rays, circular ones on a boundary mesh.
pub fn cone_invariance(spec: &CocycleSpec, c: &Cone) -> Result<Invariance> {
    if c.dim() != spec.dim() {
        return Err(Error::invalid(format!("cone dimension {} differs from cocycle dimension {}", c.dim(), spec.dim())));
    }
    let margin = spec.generators().iter().map(|g| image_depth(g, c)).fold(f64::INFINITY, f64::min);
    Ok(Invariance { invariant: margin > 1e-10, margin })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BirkhoffData {
    /// Hilbert diameter of `M C` inside `C`.
    pub diameter: f64,
    /// `tanh(Δ/4)`, equal to 1 when `Δ = ∞`.
    pub coefficient: f64,
}

/// Projective diameter of the image cone and the Birkhoff contraction
/// coefficient.
pub fn birkhoff_data(m: &Matrix, c: &Cone) -> Result<BirkhoffData> {
    if m.dim() != c.dim() {
        return Err(Error::invalid("matrix and cone dimensions differ"));
    }
    let images: Vec<Vec<f64>> = c.boundary_mesh().iter().map(|r| m.apply(r)).collect();
    if images.iter().any(|y| norm(y) == 0.0 || !c.contains(y)) {
        return Ok(BirkhoffData { diameter: f64::INFINITY, coefficient: 1.0 });
    }
    let mut diameter: f64 = 0.0;
    for (i, a) in images.iter().enumerate() {
        for b in &images[i + 1..] {
            diameter = diameter.max(distance(a, b, c));
        }
    }
    let coefficient = if diameter.is_infinite() { 1.0 } else { (diameter / 4.0).tanh() };
    Ok(BirkhoffData { diameter, coefficient })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KappaRoute {
    /// Constants from the invariant cone.
    Cone,
    /// Conformal generators: norms are exactly multiplicative.
    Conformal,
}

/// Constants of the almost-multiplicativity bound
/// `‖A(IJ)‖ ≥ κ ‖A(I)‖ ‖A(J)‖`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct KappaCertificate {
    pub cone: Cone,
    pub route: KappaRoute,
    pub k1: f64,
    pub k2: f64,
    pub k3: f64,
    pub lambda: f64,
    pub inscribed_radius: f64,
    pub k4: f64,
    pub rho: f64,
    pub kappa: f64,
    pub validation_depth: usize,
    /// Least `‖A(IJ)‖ / (‖A(I)‖‖A(J)‖)` met during validation.
    pub empirical_min_ratio: f64,
}

/// Safety multiplier on mesh maxima.
const SAFETY: f64 = 1.1;
/// Cap on the number of mesh points used for pairwise scans.
const PAIR_MESH: usize = 600;

/// Points of the cone spanned by `rays`, as normalized barycentric lattice
/// combinations at the finest resolution with at most `max_points` points.
fn cone_mesh(rays: &[Vec<f64>], max_points: usize) -> Vec<Vec<f64>> {
    let m = rays.len();
    let count = |r: usize| crate::matkernel::binomial(r + m - 1, m - 1);
    let mut res = 1;
    while count(res + 1) <= max_points {
        res += 1;
    }
    let mut out = Vec::new();
    let mut weights = vec![0usize; m];
    fn rec(i: usize, left: usize, weights: &mut Vec<usize>, rays: &[Vec<f64>], out: &mut Vec<Vec<f64>>) {
        let m = rays.len();
        if i == m - 1 {
            weights[i] = left;
            let k = rays[0].len();
            let mut x = vec![0.0; k];
            for (w, r) in weights.iter().zip(rays) {
                for (xi, ri) in x.iter_mut().zip(r) {
                    *xi += *w as f64 * ri;
                }
            }
            out.push(unit(&x));
            return;
        }
        for w in 0..=left {
            weights[i] = w;
            rec(i + 1, left - w, weights, rays, out);
        }
    }
    rec(0, res, &mut weights, rays, &mut out);
    out
}

/// Norm of the spherical gradient of `v ↦ log ‖Av‖` at the unit vector `v`.
fn log_norm_gradient(a: &Matrix, v: &[f64]) -> f64 {
    let av = a.apply(v);
    let ata_v = a.transpose().apply(&av);
    let nn = dot(&av, &av);
    let radial = dot(&ata_v, v);
    let tangential: Vec<f64> = ata_v.iter().zip(v).map(|(x, vi)| x - radial * vi).collect();
    norm(&tangential) / nn
}

/// The almost-multiplicativity constant from an invariant polyhedral cone.
///
/// `D` is the cone spanned by the images of `C`'s extreme rays. Then:
///
/// * `K1` is the Hilbert diameter of `D` inside `C`;
/// * `λ` is the largest Birkhoff coefficient of a generator on `C`;
/// * `K2 = 1.1 · max(d_C/θ, θ/d_C)` over mesh pairs of `D`, with `θ` the
///   angle between directions;
/// * `K3 = 1.1 ·` the largest Lipschitz quotient of `v ↦ log(‖A_i v‖/‖v‖)`
///   in the angle metric on `D`, from mesh pairs and spherical gradients;
/// * `r` is the largest angular radius of a ball around a mesh point of
///   `D` that stays in `D`;
///
/// and `K4 = K1 K2 K3 / (1 − λ)`, `ρ = K4 − log(½ sin r)`,
/// `κ = exp(−2ρ − 2K4)`. The constant is released only after the bound
/// holds for every admissible pair of words up to `validation_depth`.
///
/// Conformal generators take a separate route with `κ = 1`; their constants
/// are reported as zero and the cone plays no role.
pub fn kappa_certificate(spec: &CocycleSpec, c: &Cone, validation_depth: usize, cap: u64) -> Result<KappaCertificate> {
    if c.dim() != spec.dim() {
        return Err(Error::invalid(format!("cone dimension {} differs from cocycle dimension {}", c.dim(), spec.dim())));
    }
    if spec.is_conformal() {
        let cert = KappaCertificate {
            cone: c.clone(),
            route: KappaRoute::Conformal,
            k1: 0.0,
            k2: 0.0,
            k3: 0.0,
            lambda: 0.0,
            inscribed_radius: std::f64::consts::FRAC_PI_2,
            k4: 0.0,
            rho: 0.0,
            kappa: 1.0,
            validation_depth,
            empirical_min_ratio: 1.0,
        };
        return validate(spec, cert, cap);
    }
    if !c.is_polyhedral() {
        return Err(Error::Precondition(
            "kappa certificates need a polyhedral cone (orthant or generated)".into(),
        ));
    }
    let inv = cone_invariance(spec, c)?;
    if !inv.invariant {
        return Err(Error::Precondition(format!(
            "the cone is not strictly invariant (margin {:.3e})",
            inv.margin
        )));
    }
    let images: Vec<Vec<f64>> = spec
        .generators()
        .iter()
        .flat_map(|g| c.extreme_rays().iter().map(move |r| g.apply(r)))
        .collect();
    let d_cone = if spec.dim() == 1 { Cone::orthant(1)? } else { Cone::generated(images)? };
    let d_rays = d_cone.extreme_rays();

    let mut k1: f64 = 0.0;
    for (i, a) in d_rays.iter().enumerate() {
        for b in &d_rays[i + 1..] {
            k1 = k1.max(distance(a, b, c));
        }
    }
    let lambda = spec
        .generators()
        .iter()
        .map(|g| birkhoff_data(g, c).map(|b| b.coefficient))
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    if lambda >= 1.0 {
        return Err(Error::Precondition("a generator does not contract the Hilbert metric".into()));
    }

    let mesh = cone_mesh(d_rays, PAIR_MESH);
    let mut ratio: f64 = 1.0;
    let mut lipschitz: f64 = 0.0;
    for (i, a) in mesh.iter().enumerate() {
        for g in spec.generators() {
            lipschitz = lipschitz.max(log_norm_gradient(g, a));
        }
        for b in &mesh[i + 1..] {
            let th = angle(a, b);
            if th < 1e-9 {
                continue;
            }
            let d = distance(a, b, c);
            if d.is_finite() && d > 0.0 {
                ratio = ratio.max(d / th).max(th / d);
            }
            for g in spec.generators() {
                let q = ((op_norm_vec(g, a)).ln() - (op_norm_vec(g, b)).ln()).abs() / th;
                lipschitz = lipschitz.max(q);
            }
        }
    }
    let k2 = SAFETY * ratio;
    let k3 = SAFETY * lipschitz;
    let inscribed_radius = if spec.dim() == 1 {
        std::f64::consts::FRAC_PI_2
    } else {
        mesh.iter().map(|v| d_cone.angular_depth(v)).fold(0.0, f64::max)
    };
    if inscribed_radius <= 0.0 {
        return Err(Error::Numerical("image cone has no interior on the mesh".into()));
    }
    let k4 = k1 * k2 * k3 / (1.0 - lambda);
    let rho = k4 - (0.5 * inscribed_radius.sin()).ln();
    let kappa = (-2.0 * rho - 2.0 * k4).exp();
    if !(kappa > 0.0) {
        return Err(Error::Numerical(format!("kappa underflows (rho = {rho}, K4 = {k4})")));
    }
    let cert = KappaCertificate {
        cone: c.clone(),
        route: KappaRoute::Cone,
        k1,
        k2,
        k3,
        lambda,
        inscribed_radius,
        k4,
        rho,
        kappa,
        validation_depth,
        empirical_min_ratio: 1.0,
    };
    validate(spec, cert, cap)
}

fn op_norm_vec(m: &Matrix, v: &[f64]) -> f64 {
    norm(&m.apply(v)) / norm(v)
}

/// Exhaustive check of `‖A(IJ)‖ ≥ κ‖A(I)‖‖A(J)‖` over admissible pairs.
fn validate(spec: &CocycleSpec, mut cert: KappaCertificate, cap: u64) -> Result<KappaCertificate> {
    let depth = cert.validation_depth;
    if depth == 0 {
        return Err(Error::invalid("validation depth must be at least 1"));
    }
    let shift = spec.shift();
    let total: u128 = (1..=depth).map(|n| shift.word_count(n)).sum();
    let pairs = total.saturating_mul(total);
    if pairs > cap as u128 {
        return Err(Error::ResourceLimit {
            what: "kappa validation pairs".into(),
            requested: u64::try_from(pairs).unwrap_or(u64::MAX),
            cap,
        });
    }
    // (first symbol, last symbol, normalized product, log norm)
    let mut words: Vec<(usize, usize, Matrix, f64)> = Vec::new();
    for n in 1..=depth {
        for w in enumerate_words(shift, n, cap)? {
            let s = w.symbols();
            let mut p = Matrix::identity(spec.dim());
            let mut exponent = 0.0;
            for &x in s {
                p = spec.generator(x) * &p;
                let nn = op_norm(&p);
                exponent += nn.ln();
                p = p.scale(1.0 / nn);
            }
            words.push((s[0], s[s.len() - 1], p, exponent));
        }
    }
    let log_kappa = cert.kappa.ln();
    let mut worst = f64::INFINITY;
    // products are stored normalized, so the ratio is the norm of the join
    for (_, li, pi, _) in &words {
        for (fj, _, pj, _) in &words {
            if shift.allows(*li, *fj) {
                worst = worst.min(op_norm(&(pj * pi)).ln());
            }
        }
    }
    cert.empirical_min_ratio = worst.exp();
    if worst < log_kappa - 1e-12 {
        return Err(Error::Internal(format!(
            "kappa = {} fails validation: a pair of words up to depth {depth} has ratio {}",
            cert.kappa, cert.empirical_min_ratio
        )));
    }
    Ok(cert)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Domination {
    pub index: usize,
    pub dominated: bool,
    pub fitted_c: f64,
    pub fitted_tau: f64,
    /// `max_I σ_{i+1}(A(I)) / σ_i(A(I))` for `|I| = 1..=n_max`.
    pub worst_ratios: Vec<f64>,
}

/// Numerical i-domination diagnostic: fits `log max_I σ_{i+1}/σ_i ≈
/// log C + n log τ` over `n = 1..=n_max` and reports domination when
/// `τ < 1 − tol` and every residual is below one nat.
pub fn domination_check(spec: &CocycleSpec, i: usize, n_max: usize, tol: f64, opts: TableOptions) -> Result<Domination> {
    let k = spec.dim();
    if i == 0 || i >= k {
        return Err(Error::invalid(format!("domination index must lie in 1..{k}, got {i}")));
    }
    if n_max == 0 {
        return Err(Error::invalid("n_max must be at least 1"));
    }
    let mut logs = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        let table = level_table(spec, n, false, opts)?;
        let worst = table
            .rows()
            .map(|r| {
                // log σ_j = row[j] − row[j−1]
                let s_i = r[i - 1] - if i >= 2 { r[i - 2] } else { 0.0 };
                let s_next = r[i] - r[i - 1];
                s_next - s_i
            })
            .fold(f64::NEG_INFINITY, f64::max);
        logs.push(worst);
    }
    let (log_c, log_tau) = if n_max == 1 {
        (0.0, logs[0])
    } else {
        let ns: Vec<f64> = (1..=n_max).map(|n| n as f64).collect();
        let mean_n = ns.iter().sum::<f64>() / ns.len() as f64;
        let mean_y = logs.iter().sum::<f64>() / logs.len() as f64;
        let sxy: f64 = ns.iter().zip(&logs).map(|(x, y)| (x - mean_n) * (y - mean_y)).sum();
        let sxx: f64 = ns.iter().map(|x| (x - mean_n).powi(2)).sum();
        let slope = sxy / sxx;
        (mean_y - slope * mean_n, slope)
    };
    let max_residual = logs
        .iter()
        .enumerate()
        .map(|(j, y)| (y - (log_c + log_tau * (j + 1) as f64)).abs())
        .fold(0.0, f64::max);
    let tau = log_tau.exp();
    Ok(Domination {
        index: i,
        dominated: tau < 1.0 - tol && max_residual < 1.0,
        fitted_c: log_c.exp(),
        fitted_tau: tau,
        worst_ratios: logs.iter().map(|l| l.exp()).collect(),
    })
}
