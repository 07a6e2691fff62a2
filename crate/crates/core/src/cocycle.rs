//! Locally constant cocycles: one invertible generator per symbol.
//!
//! The generator of a point depends only on its coordinate `x_0`, so the
//! product along a cylinder `[I]` is the same for every point in it:
//! `A(I) = A_{i_{n-1}} ⋯ A_{i_1} A_{i_0}`. Generators that depend on a longer
//! window must be recoded to a higher-block shift first.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matkernel::{exterior_power, singular_values, Matrix, ScaledProduct};
use crate::subshift::{check_word_cap, shard_ranges, TransitionMatrix, Word};

/// Generators with `|det| < MIN_ABS_DET` are rejected as non-invertible.
pub const MIN_ABS_DET: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct CocycleSpec {
    shift: TransitionMatrix,
    generators: Vec<Matrix>,
    omega: f64,
    holder_r: f64,
}

/// The JSON document for a [`CocycleSpec`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpecDocument {
    pub alphabet: usize,
    pub transition: Vec<Vec<u8>>,
    /// Symbol (as a decimal string) to row-major `k×k` rows.
    pub matrices: BTreeMap<String, Vec<Vec<f64>>>,
    pub omega: f64,
    pub holder_r: f64,
}

impl CocycleSpec {
    /// Validates and builds a spec; all violations are collected.
    pub fn new(shift: TransitionMatrix, generators: Vec<Matrix>, omega: f64, holder_r: f64) -> Result<Self> {
        let mut problems = Vec::new();
        let q = shift.alphabet_size();
        if generators.len() != q {
            problems.push(format!("expected {q} generators (one per symbol), got {}", generators.len()));
        }
        if let Some(k) = generators.first().map(Matrix::dim) {
            for (i, g) in generators.iter().enumerate() {
                if g.dim() != k {
                    problems.push(format!("generator for symbol {i} is {}x{}, expected {k}x{k}", g.dim(), g.dim()));
                } else if !g.is_finite() {
                    problems.push(format!("generator for symbol {i} has non-finite entries"));
                } else if g.determinant().abs() < MIN_ABS_DET {
                    problems.push(format!(
                        "generator for symbol {i} is singular (|det| = {:e} < {MIN_ABS_DET:e})",
                        g.determinant().abs()
                    ));
                }
            }
        }
        if !(omega > 0.0 && omega < 1.0) {
            problems.push(format!("omega must lie in (0,1), got {omega}"));
        }
        if !(holder_r > 0.0 && holder_r.is_finite()) {
            problems.push(format!("holder_r must be positive, got {holder_r}"));
        }
        if problems.is_empty() {
            Ok(CocycleSpec { shift, generators, omega, holder_r })
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// Full shift with metric parameter 1/2 and Hölder exponent 1.
    pub fn full_shift(generators: Vec<Matrix>) -> Result<Self> {
        let q = generators.len().max(1);
        CocycleSpec::new(TransitionMatrix::full(q), generators, 0.5, 1.0)
    }

    pub fn shift(&self) -> &TransitionMatrix {
        &self.shift
    }

    pub fn generators(&self) -> &[Matrix] {
        &self.generators
    }

    pub fn generator(&self, symbol: usize) -> &Matrix {
        &self.generators[symbol]
    }

    pub fn alphabet_size(&self) -> usize {
        self.shift.alphabet_size()
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn holder_r(&self) -> f64 {
        self.holder_r
    }

    /// Same shift and parameters, new generators.
    pub fn with_generators(&self, generators: Vec<Matrix>) -> Result<Self> {
        CocycleSpec::new(self.shift.clone(), generators, self.omega, self.holder_r)
    }

    pub fn with_omega(&self, omega: f64) -> Result<Self> {
        CocycleSpec::new(self.shift.clone(), self.generators.clone(), omega, self.holder_r)
    }

    /// True when every generator is a scalar multiple of an orthogonal
    /// matrix, so that all norms along words are multiplicative.
    pub fn is_conformal(&self) -> bool {
        self.generators.iter().all(|g| {
            let s = singular_values(g);
            let (hi, lo) = (s[0], s[s.len() - 1]);
            hi - lo <= 1e-12 * hi
        })
    }

    pub fn to_document(&self) -> SpecDocument {
        SpecDocument {
            alphabet: self.alphabet_size(),
            transition: self.shift.rows(),
            matrices: self
                .generators
                .iter()
                .enumerate()
                .map(|(i, g)| (i.to_string(), g.rows()))
                .collect(),
            omega: self.omega,
            holder_r: self.holder_r,
        }
    }

    pub fn from_document(doc: SpecDocument) -> Result<Self> {
        let mut problems = Vec::new();
        if doc.transition.len() != doc.alphabet {
            problems.push(format!(
                "alphabet is {} but transition has {} rows",
                doc.alphabet,
                doc.transition.len()
            ));
        }
        let shift = match TransitionMatrix::new(doc.transition) {
            Ok(s) => Some(s),
            Err(Error::Invalid(v)) => {
                problems.extend(v);
                None
            }
            Err(e) => return Err(e),
        };
        let mut generators = Vec::with_capacity(doc.alphabet);
        for key in doc.matrices.keys() {
            if key.parse::<usize>().map_or(true, |s| s >= doc.alphabet) {
                problems.push(format!("matrix key {key:?} is not a symbol in 0..{}", doc.alphabet));
            }
        }
        for symbol in 0..doc.alphabet {
            match doc.matrices.get(&symbol.to_string()) {
                None => problems.push(format!("missing matrix for symbol {symbol}")),
                Some(rows) => match Matrix::from_rows(rows) {
                    Ok(m) => generators.push(m),
                    Err(Error::Invalid(v)) => {
                        problems.extend(v.into_iter().map(|m| format!("matrix for symbol {symbol}: {m}")))
                    }
                    Err(e) => return Err(e),
                },
            }
        }
        if !problems.is_empty() {
            // still report generator-level problems when the shape is sane
            if generators.len() == doc.alphabet && doc.alphabet > 0 {
                let probe = shift.unwrap_or_else(|| TransitionMatrix::full(doc.alphabet));
                if let Err(Error::Invalid(v)) = CocycleSpec::new(probe, generators, doc.omega, doc.holder_r) {
                    problems.extend(v);
                }
            }
            problems.dedup();
            return Err(Error::Invalid(problems));
        }
        CocycleSpec::new(shift.expect("no problems"), generators, doc.omega, doc.holder_r)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SpecDocument =
            serde_json::from_str(text).map_err(|e| Error::invalid(format!("spec schema violation: {e}")))?;
        CocycleSpec::from_document(doc)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("spec serializes")
    }
}

/// `A(I)` lifted to the `l`-th exterior power:
/// `A_{i_{n-1}}^{∧l} ⋯ A_{i_0}^{∧l}`, as a scaled product.
pub fn word_product(spec: &CocycleSpec, word: &Word, level: usize) -> Result<ScaledProduct> {
    let k = spec.dim();
    if level == 0 || level > k {
        return Err(Error::invalid(format!("exterior index {level} out of range 1..={k}")));
    }
    if word.is_empty() {
        return Err(Error::invalid("word products need a nonempty word"));
    }
    Word::new(spec.shift(), word.symbols().to_vec())?;
    let lifted: Vec<Matrix> = if level == 1 {
        spec.generators.clone()
    } else {
        spec.generators
            .iter()
            .map(|g| exterior_power(g, level))
            .collect::<Result<_>>()?
    };
    let mut p = ScaledProduct::identity(lifted[0].dim());
    for &s in word.symbols() {
        p = p.left_multiply(&lifted[s])?;
    }
    Ok(p)
}

/// Unchecked product of a symbol sequence (may be empty).
pub(crate) fn raw_product(spec: &CocycleSpec, symbols: &[usize]) -> Result<ScaledProduct> {
    let mut p = ScaledProduct::identity(spec.dim());
    for &s in symbols {
        p = p.left_multiply(&spec.generators[s])?;
    }
    Ok(p)
}

/// Calls `f(word, A(word))` for every admissible word of length `depth`, in
/// lexicographic order, reusing prefix products.
pub fn for_each_product<F>(spec: &CocycleSpec, depth: usize, cap: u64, mut f: F) -> Result<()>
where
    F: FnMut(&[usize], &ScaledProduct) -> Result<()>,
{
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    check_word_cap(spec.shift(), depth, cap)?;
    fn rec<F>(spec: &CocycleSpec, depth: usize, prefix: &mut Vec<usize>, p: &ScaledProduct, f: &mut F) -> Result<()>
    where
        F: FnMut(&[usize], &ScaledProduct) -> Result<()>,
    {
        if prefix.len() == depth {
            return f(prefix, p);
        }
        let last = *prefix.last().expect("nonempty prefix");
        for s in 0..spec.alphabet_size() {
            if spec.shift.allows(last, s) {
                let next = p.left_multiply(&spec.generators[s])?;
                prefix.push(s);
                rec(spec, depth, prefix, &next, f)?;
                prefix.pop();
            }
        }
        Ok(())
    }
    for s in 0..spec.alphabet_size() {
        let p = ScaledProduct::from_matrix(&spec.generators[s])?;
        rec(spec, depth, &mut vec![s], &p, &mut f)?;
    }
    Ok(())
}

/// `log ‖A^{∧l}(I)‖` for every admissible word of one length and level.
#[derive(Clone, Debug, PartialEq)]
pub struct CylinderNormTable {
    pub depth: usize,
    pub level: usize,
    /// Lexicographic order.
    pub entries: Vec<(Word, f64)>,
}

impl CylinderNormTable {
    pub fn get(&self, word: &Word) -> Option<f64> {
        self.entries
            .binary_search_by(|(w, _)| w.cmp(word))
            .ok()
            .map(|i| self.entries[i].1)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Per-word log singular-value sums for all exterior levels at one depth.
///
/// Row `w` holds `log ‖A^{∧l}(I_w)‖ = Σ_{i≤l} log σ_i(A(I_w))` for
/// `l = 1..=k`, words in lexicographic order.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelTable {
    pub depth: usize,
    pub k: usize,
    pub values: Vec<f64>,
    pub words: Option<Vec<Word>>,
}

impl LevelTable {
    pub fn len(&self) -> usize {
        self.values.len() / self.k
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.k..(i + 1) * self.k]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks(self.k)
    }
}

/// Options shared by table-building operations.
#[derive(Clone, Copy, Debug)]
pub struct TableOptions {
    pub cap: u64,
    pub shards: usize,
}

impl Default for TableOptions {
    fn default() -> Self {
        TableOptions {
            cap: crate::subshift::DEFAULT_WORD_CAP,
            shards: 1,
        }
    }
}

struct ShardOutput {
    values: Vec<f64>,
    words: Vec<Word>,
}

fn walk(
    spec: &CocycleSpec,
    depth: usize,
    prefix: &mut Vec<usize>,
    product: &ScaledProduct,
    keep_words: bool,
    out: &mut ShardOutput,
) -> Result<()> {
    if prefix.len() == depth {
        let mut acc = 0.0;
        for ls in product.log_singular_values() {
            acc += ls;
            out.values.push(acc);
        }
        if keep_words {
            out.words.push(Word::from_symbols(prefix.clone()));
        }
        return Ok(());
    }
    let last = *prefix.last().expect("walk starts with a symbol");
    for s in 0..spec.alphabet_size() {
        if spec.shift.allows(last, s) {
            let next = product.left_multiply(&spec.generators[s])?;
            prefix.push(s);
            walk(spec, depth, prefix, &next, keep_words, out)?;
            prefix.pop();
        }
    }
    Ok(())
}

fn shard_table(
    spec: &CocycleSpec,
    depth: usize,
    first: std::ops::Range<usize>,
    keep_words: bool,
) -> Result<ShardOutput> {
    let mut out = ShardOutput { values: Vec::new(), words: Vec::new() };
    for s in first {
        let p = ScaledProduct::from_matrix(&spec.generators[s])?;
        let mut prefix = vec![s];
        walk(spec, depth, &mut prefix, &p, keep_words, &mut out)?;
    }
    Ok(out)
}

/// Builds the all-level table at `depth` by depth-first extension of prefix
/// products. Work is split by first symbol across `opts.shards` threads;
/// shard outputs are concatenated in symbol order, so the result does not
/// depend on the shard count.
pub fn level_table(spec: &CocycleSpec, depth: usize, keep_words: bool, opts: TableOptions) -> Result<LevelTable> {
    if depth == 0 {
        return Err(Error::invalid("depth must be at least 1"));
    }
    check_word_cap(spec.shift(), depth, opts.cap)?;
    let ranges = shard_ranges(spec.alphabet_size(), opts.shards);
    let outputs: Vec<Result<ShardOutput>> = if ranges.len() == 1 {
        vec![shard_table(spec, depth, ranges[0].clone(), keep_words)]
    } else {
        std::thread::scope(|scope| {
            let handles: Vec<_> = ranges
                .iter()
                .cloned()
                .map(|r| scope.spawn(move || shard_table(spec, depth, r, keep_words)))
                .collect();
            handles
                .into_iter()
                .map(|h| h.join().unwrap_or_else(|_| Err(Error::Internal("table shard panicked".into()))))
                .collect()
        })
    };
    let mut values = Vec::new();
    let mut words = Vec::new();
    for o in outputs {
        let o = o?;
        values.extend(o.values);
        words.extend(o.words);
    }
    Ok(LevelTable {
        depth,
        k: spec.dim(),
        values,
        words: keep_words.then_some(words),
    })
}

/// `log ‖A^{∧l}(I)‖` for every `I ∈ L(n)`.
pub fn cylinder_norm_table(spec: &CocycleSpec, depth: usize, level: usize, opts: TableOptions) -> Result<CylinderNormTable> {
    let k = spec.dim();
    if level == 0 || level > k {
        return Err(Error::invalid(format!("exterior index {level} out of range 1..={k}")));
    }
    let table = level_table(spec, depth, true, opts)?;
    let words = table.words.clone().expect("kept words");
    let entries = words
        .into_iter()
        .enumerate()
        .map(|(i, w)| (w, table.row(i)[level - 1]))
        .collect();
    Ok(CylinderNormTable { depth, level, entries })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FiberBunching {
    pub bunched: bool,
    /// `max_i ‖A_i‖·‖A_i^{-1}‖·ω^r`; bunched iff `< 1`.
    pub margin: f64,
}

pub fn fiber_bunched(spec: &CocycleSpec) -> FiberBunching {
    let contraction = spec.omega.powf(spec.holder_r);
    let margin = spec
        .generators
        .iter()
        .map(|g| {
            let s = singular_values(g);
            // ‖A‖·‖A⁻¹‖ = σ_1/σ_k
            s[0] / s[s.len() - 1] * contraction
        })
        .fold(0.0, f64::max);
    FiberBunching { bunched: margin < 1.0, margin }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;
    use crate::matkernel::op_norm;
    use approx::assert_relative_eq;

    fn table_map(t: &CylinderNormTable) -> Vec<(String, f64)> {
        t.entries.iter().map(|(w, v)| (w.to_string(), *v)).collect()
    }

    #[test]
    fn word_product_examples() {
        let id = presets::identity(TransitionMatrix::full(2), 2);
        let w = Word::parse(id.shift(), "0110").unwrap();
        let p = word_product(&id, &w, 1).unwrap();
        assert_eq!(p.to_matrix(), Matrix::identity(2));
        assert_eq!(p.log_norm(), 0.0);

        let butler = presets::butler(2.0);
        let w = Word::parse(butler.shift(), "01").unwrap();
        assert_eq!(word_product(&butler, &w, 1).unwrap().to_matrix(), Matrix::identity(2));

        let dr = presets::diag_rotation(std::f64::consts::FRAC_PI_2);
        let p = word_product(&dr, &w, 1).unwrap().to_matrix();
        let expected = Matrix::from_row_slice(2, &[0.0, -0.5, 2.0, 0.0]);
        assert!(p.max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn word_product_rejects_bad_input() {
        let spec = presets::identity(TransitionMatrix::golden_mean(), 2);
        let w = Word::from_symbols(vec![1, 1]);
        assert!(matches!(word_product(&spec, &w, 1), Err(Error::Inadmissible { .. })));
        let w = Word::from_symbols(vec![0]);
        assert!(word_product(&spec, &w, 3).is_err());
    }

    #[test]
    fn butler_table_example() {
        let t = cylinder_norm_table(&presets::butler(2.0), 2, 1, TableOptions::default()).unwrap();
        let ln4 = 4f64.ln();
        let got = table_map(&t);
        let expected = [("00", ln4), ("01", 0.0), ("10", 0.0), ("11", ln4)];
        for ((w, v), (ew, ev)) in got.iter().zip(expected) {
            assert_eq!(w, ew);
            assert!((v - ev).abs() < 1e-14, "{w}: {v} vs {ev}");
        }
    }

    #[test]
    fn top_level_table_is_log_det() {
        let spec = presets::positive_pair();
        let t = cylinder_norm_table(&spec, 5, 2, TableOptions::default()).unwrap();
        let dets: Vec<f64> = spec.generators().iter().map(|g| g.determinant().abs().ln()).collect();
        for (w, v) in &t.entries {
            let expected: f64 = w.symbols().iter().map(|&s| dets[s]).sum();
            assert!((v - expected).abs() < 1e-12);
        }
        let id = cylinder_norm_table(&presets::identity(TransitionMatrix::full(3), 3), 3, 1, TableOptions::default()).unwrap();
        assert!(id.entries.iter().all(|(_, v)| *v == 0.0));
    }

    #[test]
    fn tables_are_submultiplicative() {
        let spec = presets::diag_rotation(1.0);
        let opts = TableOptions::default();
        let tables: Vec<CylinderNormTable> = (1..=6).map(|n| cylinder_norm_table(&spec, n, 1, opts).unwrap()).collect();
        for a in 1..=5 {
            for b in 1..=(6 - a) {
                let tab = &tables[a + b - 1];
                for (i, vi) in &tables[a - 1].entries {
                    for (j, vj) in &tables[b - 1].entries {
                        let v = tab.get(&i.concat(j)).unwrap();
                        assert!(v <= vi + vj + 1e-9);
                    }
                }
            }
        }
    }

    #[test]
    fn exterior_lift_is_functorial() {
        let spec = presets::random_full_shift(3, 3, 17);
        for word in crate::subshift::enumerate_words(spec.shift(), 4, 1 << 20).unwrap() {
            let base = word_product(&spec, &word, 1).unwrap().to_matrix();
            for l in 1..=3 {
                let lifted = word_product(&spec, &word, l).unwrap().to_matrix();
                let direct = exterior_power(&base, l).unwrap();
                let scale = op_norm(&direct).max(1e-300);
                assert!(lifted.max_abs_diff(&direct) <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn shard_count_does_not_change_tables() {
        let spec = presets::random_full_shift(3, 2, 5);
        let one = level_table(&spec, 6, false, TableOptions { shards: 1, ..Default::default() }).unwrap();
        let three = level_table(&spec, 6, false, TableOptions { shards: 3, ..Default::default() }).unwrap();
        assert_eq!(one, three);
    }

    #[test]
    fn reversal_symmetry_on_full_shift() {
        // transposing every generator reverses products: A(I)^T = A^T(rev I)
        let spec = presets::random_full_shift(2, 2, 9);
        let transposed = spec
            .with_generators(spec.generators().iter().map(Matrix::transpose).collect())
            .unwrap();
        let mut a: Vec<f64> = cylinder_norm_table(&spec, 7, 1, TableOptions::default()).unwrap().entries.into_iter().map(|e| e.1).collect();
        let mut b: Vec<f64> = cylinder_norm_table(&transposed, 7, 1, TableOptions::default()).unwrap().entries.into_iter().map(|e| e.1).collect();
        a.sort_by(f64::total_cmp);
        b.sort_by(f64::total_cmp);
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
    }

    #[test]
    fn fiber_bunching_examples() {
        let b = fiber_bunched(&presets::butler(2.0));
        assert!(!b.bunched);
        assert_relative_eq!(b.margin, 2.0, max_relative = 1e-12);
        let b = fiber_bunched(&presets::butler(1.2));
        assert!(b.bunched);
        assert_relative_eq!(b.margin, 0.72, max_relative = 1e-12);
        let spec = presets::identity(TransitionMatrix::full(2), 2).with_omega(0.3).unwrap();
        let b = fiber_bunched(&spec);
        assert!(b.bunched);
        assert_relative_eq!(b.margin, 0.3, max_relative = 1e-12);
    }

    #[test]
    fn fiber_bunching_is_monotone_in_omega() {
        let spec = presets::butler(1.3);
        let mut last = true;
        for i in (1..100).rev() {
            let b = fiber_bunched(&spec.with_omega(i as f64 / 100.0).unwrap()).bunched;
            // decreasing omega can only switch from false to true
            assert!(b || !last || i == 99);
            last = b;
        }
    }

    #[test]
    fn spec_validation_collects_all_problems() {
        let doc = r#"{"alphabet":2,"transition":[[1,1],[0,0]],
            "matrices":{"0":[[1,0],[0,1]],"1":[[1,2],[2,4]]},"omega":1.5,"holder_r":1}"#;
        let err = CocycleSpec::from_json(doc).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("dead symbol"), "{msg}");
        let doc = r#"{"alphabet":2,"transition":[[1,1],[1,1]],
            "matrices":{"0":[[1,0],[0,1]],"1":[[1,2],[2,4]]},"omega":1.5,"holder_r":1}"#;
        let msg = CocycleSpec::from_json(doc).unwrap_err().to_string();
        assert!(msg.contains("symbol 1 is singular"), "{msg}");
        assert!(msg.contains("omega"), "{msg}");
    }

    #[test]
    fn spec_json_round_trip_is_bit_exact() {
        let spec = presets::random_full_shift(3, 3, 1);
        let back = CocycleSpec::from_json(&spec.to_json()).unwrap();
        assert_eq!(spec, back);
        let dr = presets::diag_rotation(1.0);
        assert_eq!(CocycleSpec::from_json(&dr.to_json()).unwrap(), dr);
    }
}
