//! Index combinatorics of the canonical coordinates and of the Milnor
//! invariants that separate link-homotopy classes.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum IndexError {
    #[error("component count {0} is not supported here")]
    UnsupportedN(usize),
    #[error("degree {k} is out of range for n = {n}")]
    DegreeOutOfRange { n: usize, k: usize },
    #[error("invalid index sequence {0:?}")]
    BadSequence(String),
    #[error("index sequence {0} is not a basis index for n = {1}")]
    NotBasis(String, usize),
    #[error("block Y{block} has length {found}, expected {expected}")]
    BlockLength {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} blocks for n = {n}, found {found}")]
    BlockCount {
        n: usize,
        expected: usize,
        found: usize,
    },
}

/// A sequence of pairwise distinct component indices of length at least 2.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IndexSequence(Vec<usize>);

impl IndexSequence {
    pub fn new(entries: Vec<usize>) -> Result<Self, IndexError> {
        let bad = || IndexError::BadSequence(format!("{entries:?}"));
        if entries.len() < 2 || entries.iter().any(|&e| e == 0) {
            return Err(bad());
        }
        for (k, e) in entries.iter().enumerate() {
            if entries[..k].contains(e) {
                return Err(bad());
            }
        }
        Ok(IndexSequence(entries))
    }

    /// Builds a sequence and additionally checks that every entry is at most `n`.
    pub fn within(entries: Vec<usize>, n: usize) -> Result<Self, IndexError> {
        let s = IndexSequence::new(entries)?;
        if s.0.len() > n || s.0.iter().any(|&e| e > n) {
            return Err(IndexError::BadSequence(s.to_string()));
        }
        Ok(s)
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn last(&self) -> usize {
        *self.0.last().expect("length >= 2")
    }

    /// All entries but the last.
    pub fn head(&self) -> &[usize] {
        &self.0[..self.0.len() - 1]
    }

    pub fn max_entry(&self) -> usize {
        *self.0.iter().max().expect("nonempty")
    }
}

impl fmt::Display for IndexSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for e in &self.0 {
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

impl FromStr for IndexSequence {
    type Err = IndexError;

    /// Digit strings such as `"1324"`; components are single digits.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let entries = s
            .chars()
            .map(|c| c.to_digit(10).map(|d| d as usize))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| IndexError::BadSequence(s.to_string()))?;
        IndexSequence::new(entries)
    }
}

impl Serialize for IndexSequence {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for IndexSequence {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

fn seqs(list: &[&str]) -> Vec<IndexSequence> {
    list.iter().map(|s| s.parse().expect("static index")).collect()
}

const N4_BLOCKS: [&[&str]; 3] = [
    &["12", "13", "14", "23", "24", "34"],
    &["123", "124", "134", "234"],
    &["1234", "1324"],
];

const N5_BLOCKS: [&[&str]; 4] = [
    &["12", "13", "14", "15", "23", "24", "25", "34", "35", "45"],
    &["123", "124", "134", "125", "135", "145", "234", "235", "245", "345"],
    &[
        "1234", "1324", "1235", "1245", "1325", "1345", "1425", "1435", "2345", "2435",
    ],
    &["12345", "12435", "13245", "13425", "14235", "14325"],
];

const N3_BLOCKS: [&[&str]; 2] = [&["12", "13", "23"], &["123"]];
const N2_BLOCKS: [&[&str]; 1] = [&["12"]];

/// Basis index sequences of degree `k`, in the fixed coordinate order.
pub fn basis_indices(n: usize, k: usize) -> Result<Vec<IndexSequence>, IndexError> {
    if !(2..=5).contains(&n) {
        return Err(IndexError::UnsupportedN(n));
    }
    if !(2..=n).contains(&k) {
        return Err(IndexError::DegreeOutOfRange { n, k });
    }
    let block = match n {
        2 => N2_BLOCKS[k - 2],
        3 => N3_BLOCKS[k - 2],
        4 => N4_BLOCKS[k - 2],
        _ => N5_BLOCKS[k - 2],
    };
    Ok(seqs(block))
}

/// All basis indices, block after block.
pub fn all_basis_indices(n: usize) -> Result<Vec<IndexSequence>, IndexError> {
    let mut out = Vec::new();
    for k in 2..=n.max(2) {
        out.extend(basis_indices(n, k)?);
    }
    Ok(out)
}

/// Combinatorial description of the degree-`k` basis: for every `k`-subset
/// `S`, the sequences `(min, permutation of the middle, max)`.
/// Used only to cross-check the hard-coded orders.
pub fn generated_basis_indices(n: usize, k: usize) -> Vec<IndexSequence> {
    let mut out = Vec::new();
    for subset in subsets(n, k) {
        let lo = subset[0];
        let hi = subset[k - 1];
        let middle = &subset[1..k - 1];
        for perm in permutations(middle) {
            let mut e = vec![lo];
            e.extend(perm);
            e.push(hi);
            out.push(IndexSequence(e));
        }
    }
    out
}

pub(crate) fn subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(i + 1, n, k, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, k, &mut Vec::new(), &mut out);
    out
}

pub(crate) fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for (i, &x) in items.iter().enumerate() {
        let mut rest = items.to_vec();
        rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Every non-repeating index sequence of length 2..=n over 1..=n.
pub fn all_sequences(n: usize) -> Vec<IndexSequence> {
    let mut out = Vec::new();
    for k in 2..=n {
        for s in subsets(n, k) {
            for p in permutations(&s) {
                out.push(IndexSequence(p));
            }
        }
    }
    out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.0.cmp(&b.0)));
    out
}

const DISTINGUISHING_4: &[&str] = &[
    "12", "13", "14", "23", "24", "34", "123", "124", "134", "234", "1234", "1324",
];

const DISTINGUISHING_5: &[&str] = &[
    "12", "13", "14", "15", "23", "24", "25", "34", "35", "45", //
    "123", "124", "125", "134", "135", "145", "234", "235", "245", "345", //
    "1234", "1324", "1235", "1245", "1325", "1345", "1425", "1435", "2345", "2435", //
    "12345", "12435", "13245", "13425", "14235", "14325", //
    "21345", "21435", "31245", "31425", "41235", "41325",
];

// Milnor's classification for three components.
const DISTINGUISHING_3: &[&str] = &["12", "13", "23", "123"];

/// Milnor invariant indices sufficient to separate classes that the
/// invariants can separate at all.
pub fn distinguishing_indices(n: usize) -> Result<Vec<IndexSequence>, IndexError> {
    match n {
        3 => Ok(seqs(DISTINGUISHING_3)),
        4 => Ok(seqs(DISTINGUISHING_4)),
        5 => Ok(seqs(DISTINGUISHING_5)),
        _ => Err(IndexError::UnsupportedN(n)),
    }
}

fn factorial(k: usize) -> usize {
    (1..=k).product()
}

fn binomial(n: usize, k: usize) -> usize {
    factorial(n) / (factorial(k) * factorial(n - k))
}

/// Number of canonical coordinates for `n` components.
pub fn coordinate_count(n: usize) -> usize {
    (2..=n).map(|k| binomial(n, k) * factorial(k - 2)).sum()
}

/// Block lengths `|Y_1|, .., |Y_{n-1}|`.
pub fn block_lengths(n: usize) -> Vec<usize> {
    (2..=n).map(|k| binomial(n, k) * factorial(k - 2)).collect()
}

/// Canonical coordinates `(Y_1, .., Y_{n-1})`; block `Y_b` holds the
/// exponents of the degree `b + 1` basis indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalForm {
    n: usize,
    blocks: Vec<Vec<i64>>,
}

impl CanonicalForm {
    pub fn new(n: usize, blocks: Vec<Vec<i64>>) -> Result<Self, IndexError> {
        if !(2..=5).contains(&n) {
            return Err(IndexError::UnsupportedN(n));
        }
        let lengths = block_lengths(n);
        if blocks.len() != lengths.len() {
            return Err(IndexError::BlockCount {
                n,
                expected: lengths.len(),
                found: blocks.len(),
            });
        }
        for (b, (block, &len)) in blocks.iter().zip(&lengths).enumerate() {
            if block.len() != len {
                return Err(IndexError::BlockLength {
                    block: b + 1,
                    expected: len,
                    found: block.len(),
                });
            }
        }
        Ok(CanonicalForm { n, blocks })
    }

    pub fn zero(n: usize) -> Result<Self, IndexError> {
        CanonicalForm::new(n, block_lengths(n).into_iter().map(|l| vec![0; l]).collect())
    }

    /// Splits a flat coordinate vector into blocks.
    pub fn from_flat(n: usize, flat: &[i64]) -> Result<Self, IndexError> {
        if !(2..=5).contains(&n) {
            return Err(IndexError::UnsupportedN(n));
        }
        let lengths = block_lengths(n);
        let total: usize = lengths.iter().sum();
        if flat.len() != total {
            return Err(IndexError::BadSequence(format!(
                "expected {total} coordinates, found {}",
                flat.len()
            )));
        }
        let mut blocks = Vec::new();
        let mut pos = 0;
        for len in lengths {
            blocks.push(flat[pos..pos + len].to_vec());
            pos += len;
        }
        CanonicalForm::new(n, blocks)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn blocks(&self) -> &[Vec<i64>] {
        &self.blocks
    }

    /// Block `Y_b`, 1-based.
    pub fn block(&self, b: usize) -> &[i64] {
        &self.blocks[b - 1]
    }

    pub fn block_mut(&mut self, b: usize) -> &mut Vec<i64> {
        &mut self.blocks[b - 1]
    }

    pub fn flat(&self) -> Vec<i64> {
        self.blocks.iter().flatten().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.blocks.iter().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|&y| y == 0)
    }

    /// Coordinate `y_I` for a basis index `I`.
    pub fn get(&self, index: &IndexSequence) -> Result<i64, IndexError> {
        let k = index.len();
        let basis = basis_indices(self.n, k)?;
        let pos = basis
            .iter()
            .position(|b| b == index)
            .ok_or_else(|| IndexError::NotBasis(index.to_string(), self.n))?;
        Ok(self.blocks[k - 2][pos])
    }

    /// Pairs of basis index and coordinate, in coordinate order.
    pub fn entries(&self) -> Vec<(IndexSequence, i64)> {
        all_basis_indices(self.n)
            .expect("validated n")
            .into_iter()
            .zip(self.flat())
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct WireForm {
    components: usize,
    #[serde(rename = "Y")]
    y: Vec<Vec<i64>>,
}

impl Serialize for CanonicalForm {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        WireForm {
            components: self.n,
            y: self.blocks.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for CanonicalForm {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let w = WireForm::deserialize(d)?;
        CanonicalForm::new(w.components, w.y).map_err(serde::de::Error::custom)
    }
}
