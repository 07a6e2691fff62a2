//! Pinching and twisting for locally constant cocycles.
//!
//! A periodic point `p` is given by one period `p_word`, read from
//! coordinate 0 onwards and repeated in both directions. A homoclinic point
//! `z` agrees with `p` except on the block `insert`, which occupies
//! coordinates `offset .. offset + insert.len()` (the offset may be
//! negative). Holonomies of a locally constant cocycle are finite products:
//!
//! ```text
//! H^s_{p←z} = [A_{p_{m−1}}⋯A_{p_0}]^{−1} · A_{z_{m−1}}⋯A_{z_0}
//! H^u_{z←p} = A_{z_{−1}}⋯A_{z_{−n}} · [A_{p_{−1}}⋯A_{p_{−n}}]^{−1}
//! ```
//!
//! where `m` and `n` count the coordinates at or after 0 and before 0 that
//! the insert block reaches, and the loop is `ψ = H^s ∘ H^u`.
//!
//! Every check returns a three-valued [`Verdict`]: a quantity at or above
//! its tolerance passes, one below `tol / BAND` fails, and the band between
//! is inconclusive.

use itertools::Itertools;
use nalgebra::DMatrix;
use serde::Serialize;

use crate::cocycle::CocycleSpec;
use crate::error::{Error, Result};
use crate::matkernel::{eigenvalues, exterior_power, real_eigenvector, subsets, Matrix};
use crate::subshift::{TransitionMatrix, Word};

/// Width of the inconclusive band, as a factor below the tolerance.
pub const BAND: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    True,
    False,
    Inconclusive,
}

impl Verdict {
    /// Classifies `value` against `tol` with the inconclusive band.
    pub fn classify(value: f64, tol: f64) -> Verdict {
        if value >= tol {
            Verdict::True
        } else if value < tol / BAND {
            Verdict::False
        } else {
            Verdict::Inconclusive
        }
    }

    /// Three-valued conjunction.
    pub fn and(self, other: Verdict) -> Verdict {
        match (self, other) {
            (Verdict::False, _) | (_, Verdict::False) => Verdict::False,
            (Verdict::Inconclusive, _) | (_, Verdict::Inconclusive) => Verdict::Inconclusive,
            _ => Verdict::True,
        }
    }

    pub fn is_true(self) -> bool {
        self == Verdict::True
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::True => "true",
            Verdict::False => "false",
            Verdict::Inconclusive => "inconclusive",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomoclinicSpec {
    p_word: Word,
    insert: Word,
    offset: i64,
}

impl HomoclinicSpec {
    /// Validates that `p_word` is cyclic, both seams of the insert are
    /// allowed and the resulting point differs from `p`.
    pub fn new(shift: &TransitionMatrix, p_word: Word, insert: Word, offset: i64) -> Result<Self> {
        let mut errors = Vec::new();
        if !p_word.is_cyclic(shift) {
            errors.push(format!("periodic word {p_word} is not cyclically admissible"));
        }
        if insert.is_empty() {
            errors.push("insert block is empty".to_string());
        } else if !shift.is_admissible(insert.symbols()) {
            errors.push(format!("insert block {insert} is not admissible"));
        }
        if let Some(bad) = p_word.symbols().iter().chain(insert.symbols()).find(|&&s| s >= shift.alphabet_size()) {
            errors.push(format!("symbol {bad} outside alphabet of size {}", shift.alphabet_size()));
        }
        if !errors.is_empty() || p_word.is_empty() {
            if p_word.is_empty() {
                errors.push("periodic word is empty".to_string());
            }
            return Err(Error::Invalid(errors));
        }
        let h = HomoclinicSpec { p_word, insert, offset };
        let len = h.insert.len() as i64;
        let first = h.insert.symbols()[0];
        let last = h.insert.symbols()[h.insert.len() - 1];
        if !shift.allows(h.p_at(offset - 1), first) {
            errors.push(format!(
                "left seam {} -> {} at coordinate {} is forbidden",
                h.p_at(offset - 1),
                first,
                offset
            ));
        }
        if !shift.allows(last, h.p_at(offset + len)) {
            errors.push(format!(
                "right seam {} -> {} at coordinate {} is forbidden",
                last,
                h.p_at(offset + len),
                offset + len
            ));
        }
        if (offset..offset + len).all(|i| h.z_at(i) == h.p_at(i)) {
            errors.push("insert block agrees with the periodic pattern, so z = p".to_string());
        }
        if errors.is_empty() {
            Ok(h)
        } else {
            Err(Error::Invalid(errors))
        }
    }

    /// Both words in the format of [`Word::parse`].
    pub fn parse(shift: &TransitionMatrix, p_word: &str, insert: &str, offset: i64) -> Result<Self> {
        HomoclinicSpec::new(shift, Word::parse(shift, p_word)?, Word::parse(shift, insert)?, offset)
    }

    pub fn p_word(&self) -> &Word {
        &self.p_word
    }

    pub fn insert(&self) -> &Word {
        &self.insert
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    fn p_at(&self, i: i64) -> usize {
        let per = self.p_word.len() as i64;
        self.p_word.symbols()[i.rem_euclid(per) as usize]
    }

    fn z_at(&self, i: i64) -> usize {
        let rel = i - self.offset;
        if rel >= 0 && (rel as usize) < self.insert.len() {
            self.insert.symbols()[rel as usize]
        } else {
            self.p_at(i)
        }
    }
}

/// `A_{s_{m−1}}⋯A_{s_0}` for the symbols `s` in coordinate order.
fn product(spec: &CocycleSpec, symbols: impl Iterator<Item = usize>) -> Matrix {
    symbols.fold(Matrix::identity(spec.dim()), |acc, s| spec.generator(s) * &acc)
}

fn inverse(m: &Matrix) -> Result<Matrix> {
    m.inverse().ok_or_else(|| Error::Numerical(format!("product {m:?} is not invertible")))
}

/// The product of one period of `p`.
pub fn periodic_product(spec: &CocycleSpec, p_word: &Word) -> Result<Matrix> {
    if !p_word.is_cyclic(spec.shift()) {
        return Err(Error::Inadmissible {
            word: p_word.to_string(),
            reason: "the periodic closure (last symbol back to first) is not admissible".into(),
        });
    }
    Ok(product(spec, p_word.symbols().iter().copied()))
}

/// The holonomy loop `ψ = H^s_{p←z} ∘ H^u_{z←p}` at the fiber of `p`.
pub fn holonomy_loop(spec: &CocycleSpec, h: &HomoclinicSpec) -> Result<Matrix> {
    // revalidate against this spec's shift
    let h = HomoclinicSpec::new(spec.shift(), h.p_word.clone(), h.insert.clone(), h.offset)?;
    let end = h.offset + h.insert.len() as i64;
    let m = end.max(0);
    let n = (-h.offset).max(0);
    let stable = inverse(&product(spec, (0..m).map(|i| h.p_at(i))))? * product(spec, (0..m).map(|i| h.z_at(i)));
    let unstable = product(spec, (-n..0).map(|i| h.z_at(i))) * inverse(&product(spec, (-n..0).map(|i| h.p_at(i))))?;
    Ok(stable * unstable)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Pinching {
    pub verdict: Verdict,
    /// Eigenvalue moduli (of `P^∧t` at level `t`) in descending order.
    pub moduli: Vec<f64>,
    /// Ratios of consecutive moduli, each at least 1.
    pub gaps: Vec<f64>,
    /// Smallest relative gap `1 − m_{i+1}/m_i`; zero if an eigenvalue is
    /// not real.
    pub min_relative_gap: f64,
}

fn real_spectrum(m: &Matrix, tol: f64) -> Result<(Vec<f64>, bool)> {
    let mut eig = eigenvalues(m)?;
    eig.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)));
    let real = eig.iter().all(|&(re, im)| im.abs() <= tol * re.hypot(im).max(f64::MIN_POSITIVE));
    Ok((eig.iter().map(|&(re, _)| re).collect(), real))
}

/// Moduli of the eigenvalues of `P` are simple and pairwise separated by
/// relative gap `tol`. A complex pair has equal moduli and always fails.
pub fn pinching_check(p: &Matrix, tol: f64) -> Result<Pinching> {
    let k = p.dim();
    let mut eig = eigenvalues(p)?;
    eig.sort_by(|a, b| b.0.hypot(b.1).total_cmp(&a.0.hypot(a.1)));
    let moduli: Vec<f64> = eig.iter().map(|&(re, im)| re.hypot(im)).collect();
    let complex = eig.iter().any(|&(re, im)| im.abs() > 1e-12 * re.hypot(im));
    Ok(summarize_moduli(moduli, complex, tol, k))
}

fn summarize_moduli(moduli: Vec<f64>, complex: bool, tol: f64, k: usize) -> Pinching {
    let gaps: Vec<f64> = moduli.windows(2).map(|w| if w[1] == 0.0 { f64::INFINITY } else { w[0] / w[1] }).collect();
    let mut min_relative_gap = moduli
        .windows(2)
        .map(|w| if w[0] == 0.0 { 0.0 } else { 1.0 - w[1] / w[0] })
        .fold(1.0, f64::min);
    if complex {
        min_relative_gap = 0.0;
    }
    let verdict = if k < 2 { Verdict::True } else { Verdict::classify(min_relative_gap, tol) };
    Pinching { verdict, moduli, gaps, min_relative_gap }
}

/// Pinching at exterior level `t`: the products of `t` distinct eigenvalue
/// moduli of `P` are pairwise separated.
pub fn pinching_at_level(p: &Matrix, t: usize, tol: f64) -> Result<Pinching> {
    let k = p.dim();
    if t == 0 || t > k {
        return Err(Error::invalid(format!("exterior level {t} out of range 1..={k}")));
    }
    let base = pinching_check(p, tol)?;
    if t == 1 {
        return Ok(base);
    }
    let mut products: Vec<f64> = subsets(k, t)
        .iter()
        .map(|s| s.iter().map(|&i| base.moduli[i]).product())
        .collect();
    products.sort_by(|a, b| b.total_cmp(a));
    let (_, real) = real_spectrum(p, 1e-12)?;
    Ok(summarize_moduli(products, !real, tol, subsets(k, t).len()))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Twisting {
    pub verdict: Verdict,
    /// Smallest `|c_j| / ‖ψ^∧t w_i‖` over all eigenvector wedges `w_i` and
    /// all coefficients `c_j` in the unit eigenbasis of `P^∧t`.
    pub min_coefficient: f64,
}

/// Unit eigenvectors of `P` as columns, ordered by decreasing modulus.
fn eigenbasis(p: &Matrix) -> Result<DMatrix<f64>> {
    let (values, real) = real_spectrum(p, 1e-12)?;
    if !real {
        return Err(Error::Precondition("the periodic product has non-real eigenvalues".into()));
    }
    let k = p.dim();
    let mut basis = DMatrix::zeros(k, k);
    for (j, &lam) in values.iter().enumerate() {
        let v = real_eigenvector(p, lam);
        for i in 0..k {
            basis[(i, j)] = v[i];
        }
    }
    Ok(basis)
}

/// Whether `ψ^∧t` moves every wedge of `t` eigenvectors of `P` off every
/// coordinate hyperplane of the eigenbasis of `P^∧t`.
pub fn twisting_check(psi: &Matrix, p: &Matrix, t: usize, tol: f64) -> Result<Twisting> {
    let k = p.dim();
    if psi.dim() != k {
        return Err(Error::invalid("holonomy and periodic product dimensions differ"));
    }
    let pinch = pinching_at_level(p, t, tol)?;
    if pinch.verdict != Verdict::True {
        return Err(Error::Precondition(format!(
            "pinching fails at level {t} (relative gap {:.3e}), twisting is undefined",
            pinch.min_relative_gap
        )));
    }
    let v = Matrix::from_nalgebra(eigenbasis(p)?);
    // columns of V^∧t are the wedges v_{i1}∧…∧v_{it}
    let mut wedges = exterior_power(&v, t)?.as_nalgebra().clone();
    for mut col in wedges.column_iter_mut() {
        let nrm = col.norm();
        col /= nrm;
    }
    let inv = wedges
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Numerical("eigenvector wedges are linearly dependent".into()))?;
    let images = exterior_power(psi, t)?.as_nalgebra() * &wedges;
    let coeffs = inv * &images;
    let mut min_coefficient = f64::INFINITY;
    for j in 0..images.ncols() {
        let nrm = images.column(j).norm();
        for i in 0..coeffs.nrows() {
            min_coefficient = min_coefficient.min(coeffs[(i, j)].abs() / nrm);
        }
    }
    Ok(Twisting { verdict: Verdict::classify(min_coefficient, tol), min_coefficient })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Tolerances {
    /// Relative gap required between eigenvalue moduli.
    pub moduli: f64,
    /// Relative magnitude required of every twisting coefficient.
    pub coefficient: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { moduli: 1e-6, coefficient: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LevelReport {
    pub level: usize,
    pub pinching: Pinching,
    /// Absent when pinching at this level does not hold.
    pub twisting: Option<Twisting>,
    pub verdict: Verdict,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TypicalityReport {
    pub p_word: String,
    pub insert: String,
    pub offset: i64,
    pub levels: Vec<LevelReport>,
    pub typical: Verdict,
    pub tolerances: Tolerances,
    pub periodic_product: Vec<Vec<f64>>,
    pub holonomy: Vec<Vec<f64>>,
}

/// Pinching and twisting at every level `1 ≤ t ≤ k − 1`.
pub fn typicality_report(spec: &CocycleSpec, h: &HomoclinicSpec, tol: Tolerances) -> Result<TypicalityReport> {
    let p = periodic_product(spec, &h.p_word)?;
    let psi = holonomy_loop(spec, h)?;
    let k = spec.dim();
    let mut levels = Vec::new();
    for t in 1..k {
        let pinching = pinching_at_level(&p, t, tol.moduli)?;
        let twisting = if pinching.verdict == Verdict::True {
            Some(twisting_check(&psi, &p, t, tol.coefficient)?)
        } else {
            None
        };
        let verdict = match &twisting {
            Some(tw) => pinching.verdict.and(tw.verdict),
            None => pinching.verdict.and(Verdict::Inconclusive),
        };
        levels.push(LevelReport { level: t, pinching, twisting, verdict });
    }
    let typical = levels.iter().fold(Verdict::True, |acc, l| acc.and(l.verdict));
    Ok(TypicalityReport {
        p_word: h.p_word.to_string(),
        insert: h.insert.to_string(),
        offset: h.offset,
        levels,
        typical,
        tolerances: tol,
        periodic_product: p.rows(),
        holonomy: psi.rows(),
    })
}

/// Searches short periodic words and inserts for a homoclinic pair that
/// makes the cocycle typical, returning the first conclusive report.
pub fn search_typicality(spec: &CocycleSpec, max_period: usize, max_insert: usize, tol: Tolerances) -> Result<TypicalityReport> {
    let shift = spec.shift();
    let q = spec.alphabet_size();
    let mut fallback: Option<TypicalityReport> = None;
    for per in 1..=max_period {
        for p_syms in (0..per).map(|_| 0..q).multi_cartesian_product() {
            let p_word = Word::from_symbols(p_syms);
            if !p_word.is_cyclic(shift) {
                continue;
            }
            for len in 1..=max_insert {
                for ins in (0..len).map(|_| 0..q).multi_cartesian_product() {
                    let Ok(h) = HomoclinicSpec::new(shift, p_word.clone(), Word::from_symbols(ins), 0) else {
                        continue;
                    };
                    let report = typicality_report(spec, &h, tol)?;
                    if report.typical == Verdict::True {
                        return Ok(report);
                    }
                    fallback.get_or_insert(report);
                }
            }
        }
    }
    fallback.ok_or_else(|| Error::Precondition("no cyclic periodic word with a valid homoclinic insert found".into()))
}
