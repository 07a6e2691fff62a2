//! Subadditive pressure of the singular-value potentials.
//!
//! For a weight vector `t = (t_1, …, t_k)` the partition sum at depth `n` is
//!
//! ```text
//! Z_n(t) = Σ_{I ∈ L(n)} Π_l ‖A^{∧l}(I)‖^{t_l}
//! ```
//!
//! and `P(t) = lim (1/n) log Z_n(t)`.
//!
//! # Brackets
//!
//! * Upper side, `t ≥ 0`: norms are submultiplicative and every admissible
//!   word of length `a+b` splits into admissible words of lengths `a` and
//!   `b`, so `Z_{a+b} ≤ Z_a Z_b` and `P ≤ (1/n) log Z_n`.
//! * Lower side, `t = t_l e_l ≥ 0`, from quasi-multiplicativity constants
//!   `(m, C)` at level `l`: chaining `j` words of length `n` through
//!   connectors of length at most `m` gives a map into words of lengths
//!   `jn ≤ L ≤ jn + (j−1)m` that is at most `(m+1)^{j−1}`-to-one. Padding
//!   each image to the common length `N = jn + (j−1)m` costs at most
//!   `e^{−t B}` per symbol, where `B = max_i log⁺‖(A_i^{∧l})^{-1}‖`, so
//!
//!   ```text
//!   log Z_N ≥ j log Z_n + (j−1)(t log C − log(m+1) − m t B) − log((j−1)m+1)
//!   ```
//!
//!   and letting `j → ∞`,
//!   `P ≥ (log Z_n + t log C − log(m+1) − m t B) / (n + m)`.
//!   The chaining applies the constant to pairs whose first word is long,
//!   so a bound derived from a finite search is only as good as the search.
//! * Gap zero on a full shift (an almost-multiplicativity constant `κ`):
//!   `Z_{a+b}` is squeezed between `Z_a Z_b` and `κ^t Z_a Z_b`, which gives
//!   the two-sided bracket between `p_n` and `p_n + t log κ / n` for every
//!   sign of `t`.
//! * Conformal generators, or `t = 0`: the potential is additive and `P` is
//!   the log Perron root of `Q_{ij} e^{φ(j)}`, bracketed to rounding.
//!
//! Without constants the lower side is heuristic, built from the finite-`n`
//! growth rates:
//!
//! * `r¹ = log Z_n − log Z_{n−1}`;
//! * `r² = (log Z_n − log Z_{n−2}) / 2`, which cancels the period-two
//!   oscillation of `Z_n` seen in cocycles such as
//!   `diag(σ, 1/σ), diag(1/σ, σ)`;
//! * the extrapolated rate `R`, from fitting
//!   `log Z_m = mP + a log m + b` at `m = n, n−2, n−4`, which removes the
//!   polynomial prefactors typical of negative weights.
//!
//! `R` is the point estimate. With the spread `s = |R − r²|`, the heuristic
//! lower end is `min(p_n, r¹, r², R) − s`, and for negative weights the
//! heuristic upper end is `max(p_n, r², R) + s`.

use serde::Serialize;

use crate::cocycle::{for_each_product, raw_product, level_table, CocycleSpec, LevelTable, TableOptions};
use crate::error::{Error, Result};
use crate::matkernel::{exterior_power, singular_values, Matrix, ScaledProduct};
use crate::subshift::{connector_between, is_primitive, perron_log_bounds, TransitionMatrix};

/// Weights on the exterior levels `1..=k`.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(t: Vec<f64>) -> Result<Self> {
        if t.is_empty() {
            return Err(Error::invalid("weight vector is empty"));
        }
        if t.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("weight vector has non-finite entries"));
        }
        Ok(WeightVector(t))
    }

    /// `(t, 0, …, 0)` of length `k`.
    pub fn scalar(t: f64, k: usize) -> Result<Self> {
        let mut v = vec![0.0; k.max(1)];
        v[0] = t;
        WeightVector::new(v)
    }

    /// `s · direction`.
    pub fn along(direction: &[f64], s: f64) -> Result<Self> {
        WeightVector::new(direction.iter().map(|d| d * s).collect())
    }

    pub fn components(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0.0)
    }

    pub fn is_nonnegative(&self) -> bool {
        self.0.iter().all(|&x| x >= 0.0)
    }

    /// `(l, t_l)` when exactly one component is nonzero (`l` is 1-based).
    pub fn single_level(&self) -> Option<(usize, f64)> {
        let mut nz = self.0.iter().enumerate().filter(|(_, &x)| x != 0.0);
        let (i, &x) = nz.next()?;
        nz.next().is_none().then_some((i + 1, x))
    }

    /// `Σ_l t_l · row[l]` for a row of cumulative log singular values.
    pub fn dot(&self, row: &[f64]) -> f64 {
        self.0.iter().zip(row).filter(|(t, _)| **t != 0.0).map(|(t, v)| t * v).sum()
    }

    fn check_dim(&self, k: usize) -> Result<()> {
        if self.0.len() != k {
            return Err(Error::invalid(format!(
                "weight vector has {} components, cocycle dimension is {k}",
                self.0.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Rigor {
    Certified,
    Heuristic,
}

impl std::fmt::Display for Rigor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Rigor::Certified => "certified",
            Rigor::Heuristic => "heuristic",
        })
    }
}

/// How a bracket was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BracketMethod {
    /// Additive potential; Perron root of a weighted transition matrix.
    Additive,
    /// Certified upper side, heuristic lower side.
    Submultiplicative,
    /// Both sides from quasi-multiplicativity constants.
    QuasiMultiplicative,
    /// Negative weights, both sides heuristic.
    Extrapolated,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PressureBracket {
    pub t: WeightVector,
    pub depth: usize,
    pub lower: f64,
    pub upper: f64,
    /// Point estimate inside `[lower, upper]`.
    pub estimate: f64,
    pub rigor: Rigor,
    pub method: BracketMethod,
}

impl PressureBracket {
    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }

    pub fn midpoint(&self) -> f64 {
        0.5 * (self.lower + self.upper)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }
}

/// `‖A^{∧l}(IKJ)‖ ≥ C ‖A^{∧l}(I)‖ ‖A^{∧l}(J)‖` with `|K| ≤ gap`, verified for
/// `|I|, |J| ≤ depth`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QuasiMultConstants {
    pub level: usize,
    pub gap: usize,
    pub constant: f64,
    pub depth: usize,
}

impl QuasiMultConstants {
    /// Gap-zero constants at level 1 from an almost-multiplicativity
    /// certificate.
    pub fn from_kappa(kappa: f64, depth: usize) -> Result<Self> {
        if !(kappa > 0.0 && kappa <= 1.0) {
            return Err(Error::invalid(format!("kappa must lie in (0, 1], got {kappa}")));
        }
        Ok(QuasiMultConstants { level: 1, gap: 0, constant: kappa, depth })
    }
}

fn pad(v: f64) -> f64 {
    1e-12 * v.abs().max(1.0)
}

fn log_sum_exp(mut values: Vec<f64>) -> f64 {
    if values.is_empty() {
        return f64::NEG_INFINITY;
    }
    values.sort_by(|a, b| b.total_cmp(a));
    let top = values[0];
    let sum: f64 = values.iter().map(|v| (v - top).exp()).sum();
    top + sum.ln()
}

/// `log Z_n(t)` from a prebuilt level table.
pub fn log_partition(table: &LevelTable, t: &WeightVector) -> Result<f64> {
    t.check_dim(table.k)?;
    Ok(log_sum_exp(table.rows().map(|r| t.dot(r)).collect()))
}

/// `log Σ_{I∈L(n)} Π_l ‖A^{∧l}(I)‖^{t_l}`.
pub fn partition_sum(spec: &CocycleSpec, t: &WeightVector, n: usize, opts: TableOptions) -> Result<f64> {
    t.check_dim(spec.dim())?;
    let table = level_table(spec, n, false, opts)?;
    log_partition(&table, t)
}

/// Pressure brackets at a fixed depth, reusing the word tables across
/// weights.
pub struct PressureEngine<'a> {
    spec: &'a CocycleSpec,
    depth: usize,
    primitive: bool,
    conformal_logs: Option<Vec<f64>>,
    // depth n, then n−1 and n−2 where they exist
    tables: Option<Vec<LevelTable>>,
    inverse_logs: Vec<f64>,
}

impl<'a> PressureEngine<'a> {
    pub fn new(spec: &'a CocycleSpec, depth: usize, opts: TableOptions) -> Result<Self> {
        if depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        let primitive = is_primitive(spec.shift()).primitive;
        let conformal_logs = spec
            .is_conformal()
            .then(|| spec.generators().iter().map(|g| singular_values(g)[0].ln()).collect());
        let tables = if primitive && conformal_logs.is_some() {
            None
        } else {
            let depths = [Some(depth), depth.checked_sub(1), depth.checked_sub(2), depth.checked_sub(4)];
            let tables = depths
                .into_iter()
                .flatten()
                .filter(|&d| d >= 1)
                .map(|d| level_table(spec, d, false, opts))
                .collect::<Result<Vec<_>>>()?;
            Some(tables)
        };
        let k = spec.dim();
        // B_l = max_i log⁺ ‖(A_i^{∧l})^{-1}‖ = max_i log⁺ Π_{j>k−l} 1/σ_j(A_i)
        let mut inverse_logs = vec![0.0_f64; k];
        for g in spec.generators() {
            let s = singular_values(g);
            let mut acc = 0.0;
            for l in 1..=k {
                acc -= s[k - l].ln();
                inverse_logs[l - 1] = inverse_logs[l - 1].max(acc);
            }
        }
        Ok(PressureEngine { spec, depth, primitive, conformal_logs, tables, inverse_logs })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn spec(&self) -> &CocycleSpec {
        self.spec
    }

    /// The depth-`n` table, when one was built.
    pub fn table(&self) -> Option<&LevelTable> {
        self.tables.as_ref().map(|t| &t[0])
    }

    fn additive_weights(&self, t: &WeightVector) -> Option<Vec<f64>> {
        if !self.primitive {
            return None;
        }
        if t.is_zero() {
            return Some(vec![0.0; self.spec.alphabet_size()]);
        }
        let logs = self.conformal_logs.as_ref()?;
        // conformal: ‖A^{∧l}‖ = c^l
        let scale: f64 = t.components().iter().enumerate().map(|(i, tl)| tl * (i + 1) as f64).sum();
        Some(logs.iter().map(|c| scale * c).collect())
    }

    /// Bracket for `P(t)`. With `certified` set, negative weights are
    /// rejected unless gap-zero constants on a full shift cover them.
    pub fn bracket(&self, t: &WeightVector, qm: Option<&QuasiMultConstants>, certified: bool) -> Result<PressureBracket> {
        t.check_dim(self.spec.dim())?;
        if let Some(w) = self.additive_weights(t) {
            let (lo, hi) = perron_log_bounds(self.spec.shift(), &w)?;
            let (lower, upper) = (lo - pad(lo), hi + pad(hi));
            return Ok(PressureBracket {
                t: t.clone(),
                depth: self.depth,
                lower,
                upper,
                estimate: 0.5 * (lo + hi),
                rigor: Rigor::Certified,
                method: BracketMethod::Additive,
            });
        }
        let Some(tables) = &self.tables else {
            return Err(Error::Internal("pressure tables were not built".into()));
        };
        let n = self.depth as f64;
        let log_z = log_partition(&tables[0], t)?;
        let p = log_z / n;
        let log_z_at = |d: usize| -> Result<Option<f64>> {
            tables.iter().find(|tb| tb.depth == d).map(|tb| log_partition(tb, t)).transpose()
        };
        let d = self.depth;
        let back = |k: usize| -> Result<Option<f64>> { d.checked_sub(k).map_or(Ok(None), log_z_at) };
        let r1 = back(1)?.map(|z| log_z - z);
        let r2 = back(2)?.map(|z| (log_z - z) / 2.0);
        let extrapolated = match (back(2)?, back(4)?) {
            (Some(z2), Some(z4)) => Some(extrapolate(d, log_z, z2, z4)),
            _ => None,
        };
        let r = extrapolated.or(r2).or(r1).unwrap_or(p);
        let spread = match (extrapolated, r2) {
            (Some(x), Some(y)) => (x - y).abs(),
            _ => 0.0,
        };
        let rates = [Some(p), r1, r2, extrapolated];
        let low = rates.iter().flatten().fold(f64::INFINITY, |a, &b| a.min(b)) - spread;
        let high = [Some(p), r2, extrapolated].iter().flatten().fold(f64::NEG_INFINITY, |a, &b| a.max(b)) + spread;
        let qm = qm.filter(|c| t.single_level().is_some_and(|(l, _)| l == c.level));
        let (lower, upper, rigor, method) = if t.is_nonnegative() {
            match qm {
                Some(c) => {
                    let (l, tl) = t.single_level().expect("filtered to a single level");
                    let m = c.gap as f64;
                    let lower = (log_z + tl * c.constant.ln() - (m + 1.0).ln() - m * tl * self.inverse_logs[l - 1]) / (n + m);
                    if lower > p + pad(p) + 1e-9 {
                        return Err(Error::Internal(format!(
                            "quasi-multiplicativity lower bound {lower} exceeds upper bound {p}; the constants do not hold at depth {}",
                            self.depth
                        )));
                    }
                    (lower.min(p), p, Rigor::Certified, BracketMethod::QuasiMultiplicative)
                }
                None => (low, p, Rigor::Heuristic, BracketMethod::Submultiplicative),
            }
        } else {
            match qm.filter(|c| c.gap == 0 && self.spec.shift().is_full()) {
                Some(c) => {
                    let (_, tl) = t.single_level().expect("filtered to a single level");
                    let other = p + tl * c.constant.ln() / n;
                    (p.min(other), p.max(other), Rigor::Certified, BracketMethod::QuasiMultiplicative)
                }
                None if certified => return Err(Error::NegativeWeightCertified),
                None => (low, high, Rigor::Heuristic, BracketMethod::Extrapolated),
            }
        };
        let (lower, upper) = (lower - pad(lower), upper + pad(upper));
        Ok(PressureBracket {
            t: t.clone(),
            depth: self.depth,
            lower,
            upper,
            estimate: r.clamp(lower, upper),
            rigor,
            method,
        })
    }
}

/// `P` from `log Z_m = mP + a log m + b` through three depths `n, n−2, n−4`.
fn extrapolate(n: usize, z0: f64, z2: f64, z4: f64) -> f64 {
    let (n0, n2, n4) = (n as f64, (n - 2) as f64, (n - 4) as f64);
    let (d1, d2) = (z0 - z2, z2 - z4);
    let (u, v) = ((n0 / n2).ln(), (n2 / n4).ln());
    let a = (d1 - d2) / (u - v);
    (d1 - a * u) / 2.0
}

/// Bracket for `P(t)` at depth `n`; see the module docs for the bounds.
pub fn pressure_bracket(
    spec: &CocycleSpec,
    t: &WeightVector,
    n: usize,
    qm: Option<&QuasiMultConstants>,
    certified: bool,
    opts: TableOptions,
) -> Result<PressureBracket> {
    PressureEngine::new(spec, n, opts)?.bracket(t, qm, certified)
}

struct LiftedWord {
    len: usize,
    first: usize,
    last: usize,
    product: ScaledProduct,
    log_norm: f64,
}

fn lifted_words(shift: &TransitionMatrix, gens: &[Matrix], max_len: usize, include_empty: bool) -> Result<Vec<LiftedWord>> {
    let dim = gens[0].dim();
    let mut out = Vec::new();
    if include_empty {
        out.push(LiftedWord { len: 0, first: usize::MAX, last: usize::MAX, product: ScaledProduct::identity(dim), log_norm: 0.0 });
    }
    let mut frontier: Vec<LiftedWord> = Vec::new();
    for (s, g) in gens.iter().enumerate() {
        let product = ScaledProduct::from_matrix(g)?;
        let log_norm = product.log_norm();
        frontier.push(LiftedWord { len: 1, first: s, last: s, product, log_norm });
    }
    for len in 1..=max_len {
        let mut next = Vec::new();
        if len < max_len {
            for w in &frontier {
                for (s, g) in gens.iter().enumerate() {
                    if shift.allows(w.last, s) {
                        let product = w.product.left_multiply(g)?;
                        let log_norm = product.log_norm();
                        next.push(LiftedWord { len: w.len + 1, first: w.first, last: s, product, log_norm });
                    }
                }
            }
        }
        out.append(&mut frontier);
        frontier = next;
    }
    Ok(out)
}

/// Brute-force search for quasi-multiplicativity constants at exterior level
/// `level`: for every pair `I, J` with lengths up to `n_max`, the best
/// connector of length at most `m_max` is found; `C` is the worst ratio over
/// pairs (capped at 1) and the reported gap is the longest connector used.
/// Returns `None` when some pair has no connector at all.
pub fn quasi_mult_search(
    spec: &CocycleSpec,
    level: usize,
    m_max: usize,
    n_max: usize,
    cap: u64,
) -> Result<Option<QuasiMultConstants>> {
    let k = spec.dim();
    if level == 0 || level > k {
        return Err(Error::invalid(format!("exterior index {level} out of range 1..={k}")));
    }
    if n_max == 0 {
        return Err(Error::invalid("search depth must be at least 1"));
    }
    let shift = spec.shift();
    let words_up_to = |len: usize| -> u128 { (1..=len).map(|i| shift.word_count(i)).sum() };
    let pairs = words_up_to(n_max).saturating_pow(2);
    let connectors = 1 + words_up_to(m_max);
    let work = pairs.saturating_mul(connectors);
    if work > cap as u128 {
        return Err(Error::ResourceLimit {
            what: "quasi-multiplicativity pair scan".into(),
            requested: u64::try_from(work).unwrap_or(u64::MAX),
            cap,
        });
    }
    let lifted: Vec<Matrix> = spec.generators().iter().map(|g| exterior_power(g, level)).collect::<Result<_>>()?;
    let words = lifted_words(shift, &lifted, n_max, false)?;
    let conns = lifted_words(shift, &lifted, m_max, true)?;
    let mut worst = f64::INFINITY;
    let mut gap = 0usize;
    for i in &words {
        for j in &words {
            let mut best: Option<(f64, usize)> = None;
            for c in &conns {
                let len = c.len;
                let fits = if len == 0 {
                    shift.allows(i.last, j.first)
                } else {
                    shift.allows(i.last, c.first) && shift.allows(c.last, j.first)
                };
                if !fits {
                    continue;
                }
                let joined = j.product.then_right(&c.product)?.then_right(&i.product)?;
                let value = joined.log_norm() - i.log_norm - j.log_norm;
                if best.is_none_or(|(b, _)| value > b) {
                    best = Some((value, len));
                }
            }
            match best {
                Some((value, len)) => {
                    worst = worst.min(value);
                    gap = gap.max(len);
                }
                None => return Ok(None),
            }
        }
    }
    Ok(Some(QuasiMultConstants { level, gap, constant: worst.exp().min(1.0), depth: n_max }))
}

/// Growth-rate extremes of the cocycle at depth `n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GrowthExtremes {
    pub depth: usize,
    /// `max_I log‖A(I)‖ / n`, an upper bound on `β(A)`.
    pub beta_upper: f64,
    /// Best periodic-orbit growth `log ρ / period`, a lower bound on `β(A)`.
    pub beta_lower: f64,
    /// Least periodic-orbit norm growth, an upper bound on `α(A)`.
    pub alpha_upper: f64,
    /// `(min_I log‖A(I)‖ + log κ) / n` when `κ` is supplied.
    pub alpha_lower: Option<f64>,
}

/// `β` and `α` estimates from all words of length `n`. Words that do not
/// close up cyclically are completed by their shortest connector before
/// being read as periodic orbits.
pub fn growth_extremes(spec: &CocycleSpec, n: usize, kappa: Option<f64>, cap: u64) -> Result<GrowthExtremes> {
    if let Some(k) = kappa {
        if !(k > 0.0 && k <= 1.0) {
            return Err(Error::invalid(format!("kappa must lie in (0, 1], got {k}")));
        }
    }
    let shift = spec.shift();
    let q = spec.alphabet_size();
    let mut max_norm = f64::NEG_INFINITY;
    let mut min_norm = f64::INFINITY;
    let mut beta_lower = f64::NEG_INFINITY;
    let mut alpha_upper = f64::INFINITY;
    // connector product and length per (last, first) pair, filled lazily
    let mut closing: Vec<Option<Option<(ScaledProduct, usize)>>> = vec![None; q * q];
    for_each_product(spec, n, cap, |word, p| {
        let log_norm = p.log_norm();
        max_norm = max_norm.max(log_norm);
        min_norm = min_norm.min(log_norm);
        let (first, last) = (word[0], word[word.len() - 1]);
        let periodic = if shift.allows(last, first) {
            Some((p.clone(), n))
        } else {
            let slot = &mut closing[last * q + first];
            if slot.is_none() {
                *slot = Some(match connector_between(shift, last, first, q * q) {
                    Some(k) => Some((raw_product(spec, k.symbols())?, k.len())),
                    None => None,
                });
            }
            match slot.as_ref().expect("filled above") {
                Some((kp, len)) => Some((kp.then_right(p)?, n + len)),
                None => None,
            }
        };
        if let Some((pp, period)) = periodic {
            let per = period as f64;
            alpha_upper = alpha_upper.min(pp.log_norm() / per);
            beta_lower = beta_lower.max(pp.log_spectral_radius()? / per);
        }
        Ok(())
    })?;
    let nf = n as f64;
    Ok(GrowthExtremes {
        depth: n,
        beta_upper: max_norm / nf,
        beta_lower,
        alpha_upper,
        alpha_lower: kappa.map(|k| (min_norm + k.ln()) / nf),
    })
}
