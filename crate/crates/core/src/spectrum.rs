//! Legendre-transform entropy spectrum, Lyapunov intervals and Gibbs
//! approximants.
//!
//! All entropies are in nats and all exponents in nats per symbol.

use serde::Serialize;

use crate::cocycle::{level_table, CocycleSpec, TableOptions};
use crate::error::{Error, Result};
use crate::matkernel::singular_values;
use crate::pressure::{growth_extremes, log_partition, PressureBracket, PressureEngine, QuasiMultConstants, WeightVector};

/// Pressure brackets along the ray `t ↦ t·direction`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureCurve {
    pub direction: Vec<f64>,
    pub points: Vec<(f64, PressureBracket)>,
}

impl PressureCurve {
    pub fn new(direction: Vec<f64>, points: Vec<(f64, PressureBracket)>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::invalid("pressure curve has no points"));
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return Err(Error::invalid("pressure curve grid must be strictly increasing"));
        }
        Ok(PressureCurve { direction, points })
    }

    /// Heuristic-mode brackets at every grid value, sharing one set of word
    /// tables.
    pub fn compute(
        spec: &CocycleSpec,
        direction: &[f64],
        grid: &[f64],
        n: usize,
        qm: Option<&QuasiMultConstants>,
        opts: TableOptions,
    ) -> Result<Self> {
        check_grid(grid)?;
        let engine = PressureEngine::new(spec, n, opts)?;
        let points = grid
            .iter()
            .map(|&t| Ok((t, engine.bracket(&WeightVector::along(direction, t)?, qm, false)?)))
            .collect::<Result<Vec<_>>>()?;
        PressureCurve::new(direction.to_vec(), points)
    }

    pub fn grid(&self) -> Vec<f64> {
        self.points.iter().map(|(t, _)| *t).collect()
    }
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("t-grid is empty"));
    }
    if grid.iter().any(|t| !t.is_finite()) {
        return Err(Error::invalid("t-grid has non-finite values"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("t-grid must be strictly increasing"));
    }
    Ok(())
}

/// Where a spectrum value sits relative to the range of achievable slopes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Region {
    Interior,
    Boundary,
    Exterior,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Region::Interior => "interior",
            Region::Boundary => "boundary",
            Region::Exterior => "exterior",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SpectrumPoint {
    pub alpha: f64,
    pub h: f64,
    pub t_source: f64,
    pub h_uncertainty: f64,
    pub region: Region,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LegendreValue {
    pub h: f64,
    pub uncertainty: f64,
    pub region: Region,
}

/// `inf_t {P(t) − αt}` over the curve's grid, using bracket uppers.
///
/// The uncertainty adds the bracket width at the minimizer to the largest
/// drop convexity allows between grid points next to it. When the minimizer
/// is a grid endpoint, `α` is at or beyond the steepest sampled slope: within
/// that slope's uncertainty the value is reported as a boundary value,
/// further out as zero entropy in the exterior.
pub fn legendre_entropy(curve: &PressureCurve, alpha: f64) -> LegendreValue {
    let pts = &curve.points;
    let f = |i: usize| pts[i].1.upper - alpha * pts[i].0;
    let mut best = 0;
    for i in 1..pts.len() {
        if f(i) < f(best) {
            best = i;
        }
    }
    let h = f(best);
    let low = (0..pts.len()).map(|i| pts[i].1.lower - alpha * pts[i].0).fold(f64::INFINITY, f64::min);
    let mut uncertainty = (h - low).max(0.0);
    let est = |i: usize| pts[i].1.estimate - alpha * pts[i].0;
    let secant = |i: usize| (est(i + 1) - est(i)) / (pts[i + 1].0 - pts[i].0);
    let last = pts.len() - 1;
    if best > 0 && best < last {
        let drop_right = (-secant(best - 1)).max(0.0) * (pts[best + 1].0 - pts[best].0);
        let drop_left = secant(best).max(0.0) * (pts[best].0 - pts[best - 1].0);
        uncertainty += drop_right.max(drop_left);
        return LegendreValue { h, uncertainty, region: Region::Interior };
    }
    if pts.len() == 1 {
        return LegendreValue { h: h.max(0.0), uncertainty, region: Region::Boundary };
    }
    // slope of P − αt on the end interval; zero means α is the end slope
    let (i, j) = if best == 0 { (0, 1) } else { (last - 1, last) };
    let excess = secant(i).abs();
    let tolerance = (pts[i].1.width() + pts[j].1.width()) / (pts[j].0 - pts[i].0) + 1e-9;
    if excess <= tolerance {
        LegendreValue { h: h.max(0.0), uncertainty: uncertainty + h.min(0.0).abs(), region: Region::Boundary }
    } else {
        LegendreValue { h: 0.0, uncertainty: uncertainty + h.abs(), region: Region::Exterior }
    }
}

/// Spectrum points from central-difference slopes of the curve's point
/// estimates. Endpoints use one-sided differences and are flagged as
/// boundary points. Coincident points are merged and the result is sorted by
/// `alpha`.
pub fn spectrum_from_curve(curve: &PressureCurve) -> Result<Vec<SpectrumPoint>> {
    let pts = &curve.points;
    if pts.len() < 2 {
        return Err(Error::invalid("central differences need at least two grid points"));
    }
    let last = pts.len() - 1;
    let est: Vec<f64> = pts.iter().map(|(_, b)| b.estimate).collect();
    let ts: Vec<f64> = pts.iter().map(|(t, _)| *t).collect();
    let widths: Vec<f64> = pts.iter().map(|(_, b)| b.width()).collect();
    let (slopes, slope_err): (Vec<f64>, Vec<f64>) = (0..=last)
        .map(|i| {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(last));
            let dt = ts[b] - ts[a];
            ((est[b] - est[a]) / dt, (widths[a] + widths[b]) / dt)
        })
        .unzip();
    let mut offending = Vec::new();
    for i in 1..=last {
        let slack = slope_err[i] + slope_err[i - 1] + 1e-9;
        if slopes[i] < slopes[i - 1] - slack {
            offending.push(format!(
                "slopes decrease between t={} and t={} ({} > {})",
                ts[i - 1], ts[i], slopes[i - 1], slopes[i]
            ));
        }
    }
    if !offending.is_empty() {
        return Err(Error::Invalid(offending));
    }
    let mut points: Vec<SpectrumPoint> = (0..=last)
        .map(|i| {
            let h_raw = est[i] - ts[i] * slopes[i];
            let u = 0.5 * widths[i] + ts[i].abs() * 0.5 * slope_err[i];
            SpectrumPoint {
                alpha: slopes[i],
                h: h_raw.max(0.0),
                t_source: ts[i],
                h_uncertainty: u + (-h_raw).max(0.0),
                region: if i == 0 || i == last { Region::Boundary } else { Region::Interior },
            }
        })
        .collect();
    points.sort_by(|a, b| a.alpha.total_cmp(&b.alpha).then(a.t_source.total_cmp(&b.t_source)));
    let mut merged: Vec<SpectrumPoint> = Vec::with_capacity(points.len());
    for p in points {
        match merged.last_mut() {
            Some(q) if (p.alpha - q.alpha).abs() <= 1e-9 && (p.h - q.h).abs() <= 1e-9 => {
                if p.h_uncertainty < q.h_uncertainty {
                    *q = p;
                }
            }
            _ => merged.push(p),
        }
    }
    Ok(merged)
}

/// Scalar-weight spectrum `(α_t, P(t) − tα_t)` over the grid at depth `n`.
/// A single grid value is handled with the exact slope of the depth-`n`
/// partition sum.
pub fn spectrum_curve(spec: &CocycleSpec, grid: &[f64], n: usize, opts: TableOptions) -> Result<Vec<SpectrumPoint>> {
    spectrum_along(spec, &unit(spec.dim()), grid, n, opts)
}

/// As [`spectrum_curve`], along the ray `t·direction`.
pub fn spectrum_along(
    spec: &CocycleSpec,
    direction: &[f64],
    grid: &[f64],
    n: usize,
    opts: TableOptions,
) -> Result<Vec<SpectrumPoint>> {
    check_grid(grid)?;
    if grid.len() == 1 {
        let t = grid[0];
        let b = PressureEngine::new(spec, n, opts)?.bracket(&WeightVector::along(direction, t)?, None, false)?;
        let alpha = exact_slopes_along(spec, direction, grid, n, opts)?[0];
        return Ok(vec![SpectrumPoint {
            alpha,
            h: (b.estimate - t * alpha).max(0.0),
            t_source: t,
            h_uncertainty: 0.5 * b.width(),
            region: Region::Boundary,
        }]);
    }
    spectrum_from_curve(&PressureCurve::compute(spec, direction, grid, n, None, opts)?)
}

fn unit(k: usize) -> Vec<f64> {
    let mut d = vec![0.0; k];
    d[0] = 1.0;
    d
}

/// Exact `t`-derivatives of `(1/n) log Z_n(t)`: the Gibbs-weighted mean of
/// the level-1 log norms, divided by `n`. A cross-check for the central
/// differences.
pub fn exact_slopes(spec: &CocycleSpec, grid: &[f64], n: usize, opts: TableOptions) -> Result<Vec<f64>> {
    exact_slopes_along(spec, &unit(spec.dim()), grid, n, opts)
}

fn exact_slopes_along(spec: &CocycleSpec, direction: &[f64], grid: &[f64], n: usize, opts: TableOptions) -> Result<Vec<f64>> {
    let table = level_table(spec, n, false, opts)?;
    let dir = WeightVector::new(direction.to_vec())?;
    grid.iter()
        .map(|&t| {
            let w = WeightVector::along(direction, t)?;
            let log_z = log_partition(&table, &w)?;
            let mean: f64 = table.rows().map(|r| (w.dot(r) - log_z).exp() * dir.dot(r)).sum();
            Ok(mean / n as f64)
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LyapunovInterval {
    pub alpha_lower: f64,
    pub alpha_upper: f64,
    pub beta_lower: f64,
    pub beta_upper: f64,
}

/// Brackets `[α(A)] ⊂ [alpha_lower, alpha_upper]` and `[β(A)] ⊂
/// [beta_lower, beta_upper]` at depth `n`.
///
/// Without `κ`, `α` is bounded below by `min_i log|det A_i| / k` and by
/// `min_i log σ_k(A_i)`; a one-symbol cocycle has `α = β`.
pub fn lyapunov_interval(spec: &CocycleSpec, n: usize, kappa: Option<f64>, cap: u64) -> Result<LyapunovInterval> {
    let g = growth_extremes(spec, n, kappa, cap)?;
    let k = spec.dim() as f64;
    let (det_bound, sigma_bound) = spec.generators().iter().fold((f64::INFINITY, f64::INFINITY), |(d, s), m| {
        let sv = singular_values(m);
        (d.min(m.determinant().abs().ln() / k), s.min(sv[sv.len() - 1].ln()))
    });
    let mut alpha_lower = det_bound.max(sigma_bound);
    if let Some(a) = g.alpha_lower {
        alpha_lower = alpha_lower.max(a);
    }
    if spec.alphabet_size() == 1 {
        alpha_lower = alpha_lower.max(g.beta_lower);
    }
    // a lower bound can never exceed the matching upper bound except by rounding
    Ok(LyapunovInterval {
        alpha_lower: alpha_lower.min(g.alpha_upper),
        alpha_upper: g.alpha_upper,
        beta_lower: g.beta_lower,
        beta_upper: g.beta_upper,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GibbsReport {
    pub t: WeightVector,
    pub depth: usize,
    /// `h_n = −(1/n) Σ w_J log w_J`.
    pub entropy: f64,
    /// `χ_n`, the weighted mean of `log‖A(J)‖ / n`.
    pub chi: f64,
    /// Weighted means of `log‖A^{∧l}(J)‖ / n` for every level.
    pub exponents: Vec<f64>,
    /// `t · exponents`.
    pub energy: f64,
    /// `max_J max(w_J/g_J, g_J/w_J)` with `g_J = e^{−nP̂ + t·logΦ(J)}`.
    pub ratio_bound: f64,
    pub pressure: PressureBracket,
}

/// Gibbs weights `w_J ∝ Π_l ‖A^{∧l}(J)‖^{t_l}` on `L(n)` and their
/// entropy/energy split. `P̂` is the midpoint of the depth-`n` bracket.
pub fn gibbs_report(
    spec: &CocycleSpec,
    t: &WeightVector,
    n: usize,
    qm: Option<&QuasiMultConstants>,
    opts: TableOptions,
) -> Result<GibbsReport> {
    let table = level_table(spec, n, false, opts)?;
    let log_z = log_partition(&table, t)?;
    let k = spec.dim();
    let nf = n as f64;
    let mut mean = vec![0.0; k];
    let mut weighted_phi = 0.0;
    for row in table.rows() {
        let phi = t.dot(row);
        let w = (phi - log_z).exp();
        weighted_phi += w * phi;
        for (m, v) in mean.iter_mut().zip(row) {
            *m += w * v;
        }
    }
    let exponents: Vec<f64> = mean.iter().map(|m| m / nf).collect();
    let energy = t.dot(&exponents);
    let entropy = ((log_z - weighted_phi) / nf).max(0.0);
    let pressure = PressureEngine::new(spec, n, opts)?.bracket(t, qm, false)?;
    // w_J / g_J = exp(nP̂ − log Z_n) for every J
    let ratio_bound = (nf * pressure.midpoint() - log_z).abs().exp();
    Ok(GibbsReport {
        t: t.clone(),
        depth: n,
        entropy,
        chi: exponents[0],
        exponents,
        energy,
        ratio_bound,
        pressure,
    })
}
