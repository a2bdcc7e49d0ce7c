//! Milnor μ̄-invariants of closures of string links.
//!
//! The integer invariants `μ(I)` of a string link become invariants of its
//! closure only modulo `Δ(I)`, the gcd of `μ(J)` over all sequences `J`
//! obtained from `I` by deleting at least one index and permuting the rest
//! cyclically.

use std::collections::HashMap;

use num_integer::Integer;
use num_traits::{Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::fiber;
use crate::indexing::{self, CanonicalForm, IndexError, IndexSequence};
use crate::magnus::Int;
use crate::stringlink::{StringLink, StringLinkError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MilnorError {
    #[error("μ table has no entry for {0}")]
    IncompleteTable(IndexSequence),
    #[error("links have different component counts: {0} vs {1}")]
    MismatchedN(usize, usize),
    #[error("index {0} does not fit {1} components")]
    IndexOutOfRange(IndexSequence, usize),
    #[error(transparent)]
    StringLink(#[from] StringLinkError),
    #[error(transparent)]
    Index(#[from] IndexError),
}

pub type Result<T> = std::result::Result<T, MilnorError>;

/// A μ̄-invariant as a residue. Modulus 0 means the value is an integer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct MuResidue {
    pub index: IndexSequence,
    pub value: Int,
    pub modulus: Int,
}

impl MuResidue {
    pub fn new(index: IndexSequence, value: Int, modulus: Int) -> Self {
        let value = if modulus.is_zero() {
            value
        } else {
            value.mod_floor(&modulus)
        };
        MuResidue {
            index,
            value,
            modulus,
        }
    }

    /// Same value and modulus.
    pub fn agrees_with(&self, other: &MuResidue) -> bool {
        self.value == other.value && self.modulus == other.modulus
    }
}

fn serialize_int<S: SerializeStruct>(st: &mut S, key: &'static str, v: &Int) -> std::result::Result<(), S::Error> {
    match v.to_i64() {
        Some(x) => st.serialize_field(key, &x),
        None => st.serialize_field(key, &v.to_string()),
    }
}

impl Serialize for MuResidue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("MuResidue", 3)?;
        st.serialize_field("index", &self.index)?;
        serialize_int(&mut st, "value", &self.value)?;
        serialize_int(&mut st, "modulus", &self.modulus)?;
        st.end()
    }
}

/// Sequences obtained from `index` by deleting at least one entry, keeping at
/// least two, and rotating cyclically. Sorted and deduplicated.
pub fn delta_sequences(index: &IndexSequence) -> Vec<IndexSequence> {
    let e = index.entries();
    let k = e.len();
    let mut out = Vec::new();
    for mask in 0u32..(1 << k) {
        let kept: Vec<usize> = (0..k).filter(|b| mask & (1 << b) != 0).map(|b| e[b]).collect();
        if kept.len() < 2 || kept.len() == k {
            continue;
        }
        for r in 0..kept.len() {
            let mut rot = kept[r..].to_vec();
            rot.extend_from_slice(&kept[..r]);
            out.push(IndexSequence::new(rot).expect("distinct entries"));
        }
    }
    out.sort();
    out.dedup();
    out
}

/// `Δ(I)`: gcd of the table values over [`delta_sequences`]. The gcd of the
/// empty set is 0.
pub fn delta(index: &IndexSequence, mu_table: &HashMap<IndexSequence, Int>) -> Result<Int> {
    let mut g = Int::zero();
    for j in delta_sequences(index) {
        let v = mu_table
            .get(&j)
            .ok_or_else(|| MilnorError::IncompleteTable(j.clone()))?;
        g = g.gcd(v);
    }
    Ok(g.abs())
}

/// Integer μ of a string link for every non-repeating sequence of length
/// at least two.
pub fn mu_table(sl: &StringLink) -> Result<HashMap<IndexSequence, Int>> {
    indexing::all_sequences(sl.n())
        .into_iter()
        .filter(|s| s.len() >= 2)
        .map(|s| {
            let v = sl.mu(&s)?;
            Ok((s, v))
        })
        .collect()
}

/// Integer μ table of the string link with canonical form `y`, computed
/// from the coordinates without building the string link.
pub fn mu_table_from_canonical(y: &CanonicalForm) -> HashMap<IndexSequence, Int> {
    let flat = y.flat();
    let entries = fiber::mu_from_coordinates::<i64>(y.n(), &flat)
        .or_else(|_| fiber::mu_from_coordinates::<Int>(y.n(), &flat))
        .expect("arbitrary precision does not overflow");
    entries
        .into_iter()
        .map(|(seq, v)| (IndexSequence::new(seq).expect("distinct strands"), v))
        .collect()
}

/// Residues of several indices for the closure of one string link.
pub struct Closure {
    n: usize,
    table: HashMap<IndexSequence, Int>,
}

impl Closure {
    pub fn new(sl: &StringLink) -> Result<Self> {
        Ok(Closure {
            n: sl.n(),
            table: mu_table(sl)?,
        })
    }

    pub fn from_canonical(y: &CanonicalForm) -> Result<Self> {
        Ok(Closure {
            n: y.n(),
            table: mu_table_from_canonical(y),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mu(&self, index: &IndexSequence) -> Result<Int> {
        self.table
            .get(index)
            .cloned()
            .ok_or_else(|| MilnorError::IndexOutOfRange(index.clone(), self.n))
    }

    pub fn residue(&self, index: &IndexSequence) -> Result<MuResidue> {
        let value = self.mu(index)?;
        let modulus = delta(index, &self.table)?;
        Ok(MuResidue::new(index.clone(), value, modulus))
    }
}

/// `μ̄(I)` of the closure of the string link with canonical form `y`.
pub fn mubar(y: &CanonicalForm, index: &IndexSequence) -> Result<MuResidue> {
    if index.max_entry() > y.n() {
        return Err(MilnorError::IndexOutOfRange(index.clone(), y.n()));
    }
    Closure::from_canonical(y)?.residue(index)
}

/// One distinguishing index evaluated on both links.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ResiduePair {
    pub index: IndexSequence,
    pub left: MuResidue,
    pub right: MuResidue,
}

/// Result of comparing two links on the distinguishing indices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MuReport {
    pub equal: bool,
    pub first_difference: Option<IndexSequence>,
    pub residues: Vec<ResiduePair>,
}

/// Residues of every distinguishing index of `closure`.
pub fn distinguishing_residues(closure: &Closure) -> Result<Vec<MuResidue>> {
    indexing::distinguishing_indices(closure.n())?
        .iter()
        .map(|i| closure.residue(i))
        .collect()
}

/// Compares the closures of two canonical forms on the distinguishing
/// index set of their component count.
pub fn mu_compare(y: &CanonicalForm, y2: &CanonicalForm) -> Result<MuReport> {
    if y.n() != y2.n() {
        return Err(MilnorError::MismatchedN(y.n(), y2.n()));
    }
    let a = distinguishing_residues(&Closure::from_canonical(y)?)?;
    let b = distinguishing_residues(&Closure::from_canonical(y2)?)?;
    let residues: Vec<ResiduePair> = a
        .into_iter()
        .zip(b)
        .map(|(left, right)| ResiduePair {
            index: left.index.clone(),
            left,
            right,
        })
        .collect();
    let first_difference = residues
        .iter()
        .find(|p| !p.left.agrees_with(&p.right))
        .map(|p| p.index.clone());
    Ok(MuReport {
        equal: first_difference.is_none(),
        first_difference,
        residues,
    })
}
