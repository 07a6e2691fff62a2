//! Two-sided subshifts of finite type.
//!
//! A subshift is described by its 0/1 transition matrix `Q`: symbol `j` may
//! follow symbol `i` iff `Q[i][j] = 1`. Words are indexed at coordinates
//! `0..n` of the two-sided shift, so the cylinder of a word `I` is the set of
//! sequences with `x_0 … x_{n-1} = I`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default enumeration cap: `q^n` may not exceed `2^26`.
pub const DEFAULT_WORD_CAP: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<u8>>", into = "Vec<Vec<u8>>")]
pub struct TransitionMatrix {
    q: usize,
    entries: Vec<bool>,
}

impl TransitionMatrix {
    /// Builds a transition matrix from rows of 0/1 entries.
    ///
    /// Every violation (non-square shape, entries other than 0/1, dead rows
    /// or columns) is reported at once.
    pub fn new(rows: Vec<Vec<u8>>) -> Result<Self> {
        let q = rows.len();
        let mut problems = Vec::new();
        if q == 0 {
            return Err(Error::invalid("transition matrix is empty"));
        }
        for (i, row) in rows.iter().enumerate() {
            if row.len() != q {
                problems.push(format!(
                    "transition row {i} has {} entries, expected {q}",
                    row.len()
                ));
            }
            for (j, &e) in row.iter().enumerate() {
                if e > 1 {
                    problems.push(format!("transition entry ({i},{j}) is {e}, expected 0 or 1"));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Invalid(problems));
        }
        let entries: Vec<bool> = rows.iter().flatten().map(|&e| e == 1).collect();
        let tm = TransitionMatrix { q, entries };
        for i in 0..q {
            if !(0..q).any(|j| tm.allows(i, j)) {
                problems.push(format!("dead symbol {i}: transition row {i} is all zero"));
            }
            if !(0..q).any(|j| tm.allows(j, i)) {
                problems.push(format!("dead symbol {i}: transition column {i} is all zero"));
            }
        }
        if problems.is_empty() {
            Ok(tm)
        } else {
            Err(Error::Invalid(problems))
        }
    }

    /// The full shift on `q` symbols.
    pub fn full(q: usize) -> Self {
        assert!(q > 0, "full shift needs at least one symbol");
        TransitionMatrix {
            q,
            entries: vec![true; q * q],
        }
    }

    /// The golden-mean shift: no two consecutive 1s.
    pub fn golden_mean() -> Self {
        TransitionMatrix::new(vec![vec![1, 1], vec![1, 0]]).expect("valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.q
    }

    #[inline]
    pub fn allows(&self, from: usize, to: usize) -> bool {
        self.entries[from * self.q + to]
    }

    pub fn is_full(&self) -> bool {
        self.entries.iter().all(|&e| e)
    }

    pub fn rows(&self) -> Vec<Vec<u8>> {
        self.entries
            .chunks(self.q)
            .map(|r| r.iter().map(|&e| u8::from(e)).collect())
            .collect()
    }

    /// True iff every symbol is in range and consecutive pairs are allowed.
    pub fn is_admissible(&self, symbols: &[usize]) -> bool {
        symbols.iter().all(|&s| s < self.q) && symbols.windows(2).all(|w| self.allows(w[0], w[1]))
    }

    /// Number of admissible words of length `n`, i.e. the entry sum of `Q^{n-1}`.
    /// Saturates at `u128::MAX`.
    pub fn word_count(&self, n: usize) -> u128 {
        if n == 0 {
            return 1;
        }
        let mut ends = vec![1u128; self.q];
        for _ in 1..n {
            let mut next = vec![0u128; self.q];
            for (i, &c) in ends.iter().enumerate() {
                for (j, slot) in next.iter_mut().enumerate() {
                    if self.allows(i, j) {
                        *slot = slot.saturating_add(c);
                    }
                }
            }
            ends = next;
        }
        ends.iter().fold(0u128, |a, &b| a.saturating_add(b))
    }

    fn bool_product(&self, a: &[bool], b: &[bool]) -> Vec<bool> {
        let q = self.q;
        let mut out = vec![false; q * q];
        for i in 0..q {
            for k in 0..q {
                if a[i * q + k] {
                    for j in 0..q {
                        if b[k * q + j] {
                            out[i * q + j] = true;
                        }
                    }
                }
            }
        }
        out
    }
}

impl TryFrom<Vec<Vec<u8>>> for TransitionMatrix {
    type Error = Error;
    fn try_from(rows: Vec<Vec<u8>>) -> Result<Self> {
        TransitionMatrix::new(rows)
    }
}

impl From<TransitionMatrix> for Vec<Vec<u8>> {
    fn from(tm: TransitionMatrix) -> Self {
        tm.rows()
    }
}

/// A finite sequence of symbols. Admissibility is checked by [`Word::new`];
/// [`Word::from_symbols`] is unchecked and used for connectors and scratch work.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Word(Vec<usize>);

impl Word {
    pub fn new(shift: &TransitionMatrix, symbols: Vec<usize>) -> Result<Self> {
        if symbols.is_empty() {
            return Err(Error::invalid("words must have length at least 1"));
        }
        let word = Word(symbols);
        if let Some(&bad) = word.0.iter().find(|&&s| s >= shift.alphabet_size()) {
            return Err(Error::Inadmissible {
                word: word.to_string(),
                reason: format!("symbol {bad} outside alphabet of size {}", shift.alphabet_size()),
            });
        }
        if let Some(pos) = word.0.windows(2).position(|w| !shift.allows(w[0], w[1])) {
            return Err(Error::Inadmissible {
                word: word.to_string(),
                reason: format!(
                    "transition {} -> {} at position {pos} is forbidden",
                    word.0[pos],
                    word.0[pos + 1]
                ),
            });
        }
        Ok(word)
    }

    pub fn from_symbols(symbols: Vec<usize>) -> Self {
        Word(symbols)
    }

    /// Parses `"0110"` (one digit per symbol) or `"0,1,10"` (comma separated).
    pub fn parse(shift: &TransitionMatrix, text: &str) -> Result<Self> {
        let text = text.trim();
        let symbols: Option<Vec<usize>> = if text.contains(',') {
            text.split(',').map(|s| s.trim().parse::<usize>().ok()).collect()
        } else {
            text.chars().map(|c| c.to_digit(10).map(|d| d as usize)).collect()
        };
        let symbols = symbols.ok_or_else(|| Error::invalid(format!("cannot parse word {text:?}")))?;
        Word::new(shift, symbols)
    }

    pub fn symbols(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, other: &Word) -> Word {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Word(v)
    }

    /// True iff the word can be repeated periodically (last symbol may be
    /// followed by the first).
    pub fn is_cyclic(&self, shift: &TransitionMatrix) -> bool {
        match (self.0.first(), self.0.last()) {
            (Some(&first), Some(&last)) => shift.is_admissible(&self.0) && shift.allows(last, first),
            _ => false,
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.iter().all(|&s| s < 10) {
            for s in &self.0 {
                write!(f, "{s}")?;
            }
            Ok(())
        } else {
            let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
            write!(f, "{}", parts.join(","))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Primitivity {
    pub primitive: bool,
    /// Least `n` with `Q^n` entrywise positive, if it exists.
    pub witness_power: Option<usize>,
}

/// Tests powers of `Q` up to the Wielandt bound `(q-1)^2 + 1`.
pub fn is_primitive(shift: &TransitionMatrix) -> Primitivity {
    let q = shift.alphabet_size();
    let bound = (q - 1) * (q - 1) + 1;
    let mut power = shift.entries.clone();
    for n in 1..=bound {
        if power.iter().all(|&e| e) {
            return Primitivity {
                primitive: true,
                witness_power: Some(n),
            };
        }
        power = shift.bool_product(&power, &shift.entries);
    }
    Primitivity {
        primitive: false,
        witness_power: None,
    }
}

pub(crate) fn check_word_cap(shift: &TransitionMatrix, n: usize, cap: u64) -> Result<()> {
    let q = shift.alphabet_size() as u64;
    let requested = u32::try_from(n)
        .ok()
        .and_then(|n| q.checked_pow(n))
        .unwrap_or(u64::MAX);
    if requested > cap {
        return Err(Error::ResourceLimit {
            what: format!("enumeration of words of length {n} over {q} symbols"),
            requested,
            cap,
        });
    }
    Ok(())
}

/// Lexicographic iterator over admissible words of a fixed length.
pub struct WordIter<'a> {
    shift: &'a TransitionMatrix,
    current: Vec<usize>,
    first_symbols: std::ops::Range<usize>,
    done: bool,
    started: bool,
}

impl<'a> WordIter<'a> {
    fn new(shift: &'a TransitionMatrix, n: usize, first_symbols: std::ops::Range<usize>) -> Self {
        WordIter {
            shift,
            current: vec![0; n],
            first_symbols,
            done: n == 0,
            started: false,
        }
    }

    /// Fill positions `from..` with the lexicographically smallest admissible
    /// continuation. Fails only when no first symbol is available.
    fn fill_from(&mut self, from: usize) -> bool {
        let q = self.shift.alphabet_size();
        for pos in from..self.current.len() {
            let candidate = if pos == 0 {
                self.first_symbols.clone().next()
            } else {
                (0..q).find(|&s| self.shift.allows(self.current[pos - 1], s))
            };
            match candidate {
                Some(s) => self.current[pos] = s,
                None => return false,
            }
        }
        true
    }

    /// Advance to the next admissible word in lexicographic order.
    fn advance(&mut self) -> bool {
        let n = self.current.len();
        let q = self.shift.alphabet_size();
        let mut pos = n;
        while pos > 0 {
            pos -= 1;
            let limit = if pos == 0 { self.first_symbols.end } else { q };
            let next = (self.current[pos] + 1..limit)
                .find(|&s| pos == 0 || self.shift.allows(self.current[pos - 1], s));
            if let Some(s) = next {
                self.current[pos] = s;
                // every symbol has a successor, so the suffix can always be filled
                if self.fill_from(pos + 1) {
                    return true;
                }
            }
        }
        false
    }
}

impl Iterator for WordIter<'_> {
    type Item = Word;

    fn next(&mut self) -> Option<Word> {
        if self.done {
            return None;
        }
        let ok = if !self.started {
            self.started = true;
            self.first_symbols.start < self.first_symbols.end && self.fill_from(0)
        } else {
            self.advance()
        };
        if ok {
            Some(Word(self.current.clone()))
        } else {
            self.done = true;
            None
        }
    }
}

/// All admissible words of length `n` in lexicographic order.
pub fn enumerate_words(shift: &TransitionMatrix, n: usize, cap: u64) -> Result<WordIter<'_>> {
    if n == 0 {
        return Err(Error::invalid("word length must be at least 1"));
    }
    check_word_cap(shift, n, cap)?;
    Ok(WordIter::new(shift, n, 0..shift.alphabet_size()))
}

/// The admissible words of length `n` whose first symbol lies in `first`.
/// Concatenating shards over a partition of `0..q` in order reproduces
/// [`enumerate_words`].
pub fn enumerate_shard(
    shift: &TransitionMatrix,
    n: usize,
    first: std::ops::Range<usize>,
    cap: u64,
) -> Result<WordIter<'_>> {
    if n == 0 {
        return Err(Error::invalid("word length must be at least 1"));
    }
    check_word_cap(shift, n, cap)?;
    let end = first.end.min(shift.alphabet_size());
    Ok(WordIter::new(shift, n, first.start.min(end)..end))
}

/// Splits `0..q` into at most `shards` contiguous first-symbol ranges.
pub fn shard_ranges(q: usize, shards: usize) -> Vec<std::ops::Range<usize>> {
    let shards = shards.clamp(1, q);
    let base = q / shards;
    let extra = q % shards;
    let mut out = Vec::with_capacity(shards);
    let mut start = 0;
    for s in 0..shards {
        let len = base + usize::from(s < extra);
        out.push(start..start + len);
        start += len;
    }
    out
}

/// Logarithm of the Perron root of a primitive `Q`, i.e. `h_top`.
pub fn topological_entropy(shift: &TransitionMatrix) -> Result<f64> {
    if !is_primitive(shift).primitive {
        return Err(Error::NotPrimitive);
    }
    let q = shift.alphabet_size();
    let weights: Vec<f64> = vec![0.0; q];
    perron_log_radius(shift, &weights)
}

/// `log ρ(M)` for `M[i][j] = Q[i][j]·exp(weights[j])` with `Q` primitive.
///
/// Power iteration with Collatz–Wielandt bounds; iterates until the bounds
/// agree to `1e-14` in the log. Returns the midpoint of the final bounds.
pub(crate) fn perron_log_radius(shift: &TransitionMatrix, weights: &[f64]) -> Result<f64> {
    let (lo, hi) = perron_log_bounds(shift, weights)?;
    Ok(0.5 * (lo + hi))
}

pub(crate) fn perron_log_bounds(shift: &TransitionMatrix, weights: &[f64]) -> Result<(f64, f64)> {
    let q = shift.alphabet_size();
    let shiftw = weights.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let factors: Vec<f64> = weights.iter().map(|w| (w - shiftw).exp()).collect();
    let mut x = vec![1.0f64; q];
    let mut best = (f64::NEG_INFINITY, f64::INFINITY);
    for _ in 0..200_000 {
        let mut y = vec![0.0f64; q];
        for (i, yi) in y.iter_mut().enumerate() {
            for j in 0..q {
                if shift.allows(i, j) {
                    *yi += factors[j] * x[j];
                }
            }
        }
        let mut lo = f64::INFINITY;
        let mut hi = 0.0f64;
        for i in 0..q {
            let r = y[i] / x[i];
            lo = lo.min(r);
            hi = hi.max(r);
        }
        if !(lo > 0.0) || !hi.is_finite() {
            return Err(Error::Numerical("Perron iteration degenerated".into()));
        }
        best.0 = best.0.max(lo.ln() + shiftw);
        best.1 = best.1.min(hi.ln() + shiftw);
        if best.1 - best.0 <= 1e-14 {
            return Ok(best);
        }
        let norm = y.iter().cloned().fold(0.0, f64::max);
        x = y.into_iter().map(|v| v / norm).collect();
        if x.iter().any(|&v| v < 1e-280) {
            // entries underflowing means the chain is not irreducible
            return Err(Error::NotPrimitive);
        }
    }
    if best.1 - best.0 <= 1e-11 {
        Ok(best)
    } else {
        Err(Error::Numerical(format!(
            "Perron iteration did not converge: bounds [{}, {}]",
            best.0, best.1
        )))
    }
}

/// Shortest `K` with `|K| <= max_gap` such that `I K J` is admissible; ties
/// are broken lexicographically. `Some(empty)` means `IJ` is already
/// admissible.
pub fn connector(shift: &TransitionMatrix, first: &Word, second: &Word, max_gap: usize) -> Option<Word> {
    let (&last, &head) = (first.0.last()?, second.0.first()?);
    connector_between(shift, last, head, max_gap)
}

/// Connector between two symbols: `last K head` admissible.
pub(crate) fn connector_between(shift: &TransitionMatrix, last: usize, head: usize, max_gap: usize) -> Option<Word> {
    let q = shift.alphabet_size();
    if shift.allows(last, head) {
        return Some(Word::default());
    }
    // reach[r][s]: from symbol s, `head` is reachable in exactly r more steps
    let mut reach: Vec<Vec<bool>> = vec![(0..q).map(|s| s == head).collect()];
    for r in 1..=max_gap {
        let prev = &reach[r - 1];
        let row: Vec<bool> = (0..q).map(|s| (0..q).any(|t| shift.allows(s, t) && prev[t])).collect();
        reach.push(row);
    }
    for gap in 1..=max_gap {
        // need K_0..K_{gap-1}; K_{gap-1} -> head, i.e. K_0 reaches head in `gap` steps
        if !(0..q).any(|s| shift.allows(last, s) && reach[gap][s]) {
            continue;
        }
        let mut k = Vec::with_capacity(gap);
        let mut prev = last;
        for pos in 0..gap {
            let remaining = gap - pos;
            let s = (0..q)
                .find(|&s| shift.allows(prev, s) && reach[remaining][s])
                .expect("reachability table guarantees a choice");
            k.push(s);
            prev = s;
        }
        return Some(Word(k));
    }
    None
}
