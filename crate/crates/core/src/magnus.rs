//! The reduced Magnus algebra.
//!
//! Integer polynomials in non-commuting variables `X1..Xn` modulo the
//! two-sided ideal spanned by monomials in which some variable occurs twice.
//! Elements with constant term 1 form a group which is a faithful model of
//! the reduced free group `RF(n)` (the meridian `x_i` maps to `1 + X_i`).
//!
//! Every monomial that survives the quotient is a word of pairwise distinct
//! letters, so for `n <= 5` the whole algebra has at most 326 basis
//! monomials. Monomials are numbered once per `n` in the canonical order
//! (degree first, then lexicographic) and elements store sorted
//! `(index, coefficient)` pairs, which keeps equality structural.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

/// Arbitrary precision coefficient type used throughout the crate.
pub type Int = BigInt;

/// Largest supported number of variables.
pub const MAX_N: usize = 5;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MagnusError {
    #[error("variable index {index} out of range 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error("ambient variable counts differ: {left} vs {right}")]
    AmbientMismatch { left: usize, right: usize },
    #[error("unsupported variable count {0} (expected 1..=5)")]
    UnsupportedN(usize),
    #[error("monomial repeats variable {0}")]
    RepeatedIndex(usize),
    #[error("element is not group-like (constant term must be 1)")]
    NotGroupLike,
    #[error("cannot parse algebra element: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, MagnusError>;

const NONE: u16 = u16::MAX;

/// Precomputed monomial numbering and multiplication table for one `n`.
pub(crate) struct MonomialTable {
    words: Vec<Vec<u8>>,
    masks: Vec<u32>,
    lookup: HashMap<Vec<u8>, u16>,
    // product[u * len + v] = index of the word u.v, or NONE when they share a letter
    product: Vec<u16>,
    // index of the single-letter monomial X_i at position i - 1
    letters: Vec<u16>,
}

impl MonomialTable {
    fn build(n: usize) -> Self {
        let mut words: Vec<Vec<u8>> = vec![Vec::new()];
        let mut frontier: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..n {
            let mut next = Vec::new();
            for w in &frontier {
                for l in 1..=n as u8 {
                    if !w.contains(&l) {
                        let mut v = w.clone();
                        v.push(l);
                        next.push(v);
                    }
                }
            }
            next.sort();
            words.extend(next.iter().cloned());
            frontier = next;
        }
        let masks: Vec<u32> = words
            .iter()
            .map(|w| w.iter().fold(0u32, |m, &l| m | (1 << l)))
            .collect();
        let lookup: HashMap<Vec<u8>, u16> = words
            .iter()
            .enumerate()
            .map(|(i, w)| (w.clone(), i as u16))
            .collect();
        let len = words.len();
        let mut product = vec![NONE; len * len];
        for u in 0..len {
            for v in 0..len {
                if masks[u] & masks[v] == 0 {
                    let mut w = words[u].clone();
                    w.extend_from_slice(&words[v]);
                    product[u * len + v] = lookup[&w];
                }
            }
        }
        let letters = (1..=n as u8).map(|l| lookup[&vec![l]]).collect();
        MonomialTable {
            words,
            masks,
            lookup,
            product,
            letters,
        }
    }

    pub(crate) fn get(n: usize) -> &'static MonomialTable {
        static TABLES: OnceLock<Vec<MonomialTable>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| (0..=MAX_N).map(MonomialTable::build).collect());
        &tables[n]
    }

    pub(crate) fn len(&self) -> usize {
        self.words.len()
    }

    pub(crate) fn word(&self, idx: u16) -> &[u8] {
        &self.words[idx as usize]
    }

    pub(crate) fn index_of(&self, letters: &[u8]) -> Option<u16> {
        self.lookup.get(letters).copied()
    }

    pub(crate) fn mask(&self, idx: u16) -> u32 {
        self.masks[idx as usize]
    }

    #[inline]
    pub(crate) fn mul_index(&self, u: u16, v: u16) -> u16 {
        self.product[u as usize * self.words.len() + v as usize]
    }
}

/// Number of repeat-free monomials on `n` letters (including the unit).
pub fn monomial_count(n: usize) -> Result<usize> {
    check_n(n)?;
    Ok(MonomialTable::get(n).len())
}

/// Every repeat-free monomial on `n` letters, in canonical order.
pub fn all_monomials(n: usize) -> Result<Vec<Monomial>> {
    check_n(n)?;
    let t = MonomialTable::get(n);
    Ok(t.words
        .iter()
        .map(|w| Monomial(w.iter().map(|&l| l as usize).collect()))
        .collect())
}

fn check_n(n: usize) -> Result<()> {
    if (1..=MAX_N).contains(&n) {
        Ok(())
    } else {
        Err(MagnusError::UnsupportedN(n))
    }
}

fn check_index(i: usize, n: usize) -> Result<()> {
    if (1..=n).contains(&i) {
        Ok(())
    } else {
        Err(MagnusError::IndexOutOfRange { index: i, n })
    }
}

/// A word of pairwise distinct variable indices; the empty word is the unit.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Monomial(Vec<usize>);

impl Monomial {
    pub fn new(letters: Vec<usize>, n: usize) -> Result<Self> {
        check_n(n)?;
        let mut seen = 0u32;
        for &l in &letters {
            check_index(l, n)?;
            if seen & (1 << l) != 0 {
                return Err(MagnusError::RepeatedIndex(l));
            }
            seen |= 1 << l;
        }
        Ok(Monomial(letters))
    }

    pub fn unit() -> Self {
        Monomial(Vec::new())
    }

    pub fn letters(&self) -> &[usize] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for l in &self.0 {
            write!(f, "X{l}")?;
        }
        Ok(())
    }
}

/// An element of the reduced Magnus algebra on `n` variables.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraElement {
    n: usize,
    // sorted by monomial index, coefficients never zero
    terms: Vec<(u16, Int)>,
}

/// Dense accumulator over the monomial basis of one `n`.
pub(crate) struct Accumulator {
    n: usize,
    coeffs: Vec<Int>,
    touched: Vec<bool>,
}

impl Accumulator {
    pub(crate) fn new(n: usize) -> Self {
        let len = MonomialTable::get(n).len();
        Accumulator {
            n,
            coeffs: vec![Int::zero(); len],
            touched: vec![false; len],
        }
    }

    #[inline]
    fn add(&mut self, idx: u16, c: &Int) {
        let i = idx as usize;
        self.coeffs[i] += c;
        self.touched[i] = true;
    }

    fn add_element(&mut self, a: &AlgebraElement, scale: &Int) {
        debug_assert_eq!(a.n, self.n);
        for (u, c) in &a.terms {
            if scale.is_one() {
                self.add(*u, c);
            } else {
                self.add(*u, &(c * scale));
            }
        }
    }

    fn add_product(&mut self, a: &AlgebraElement, b: &AlgebraElement) {
        let t = MonomialTable::get(self.n);
        for (u, cu) in &a.terms {
            let mu = t.masks[*u as usize];
            for (v, cv) in &b.terms {
                if mu & t.masks[*v as usize] == 0 {
                    let w = t.mul_index(*u, *v);
                    self.add(w, &(cu * cv));
                }
            }
        }
    }

    pub(crate) fn finish(self) -> AlgebraElement {
        let terms = self
            .coeffs
            .into_iter()
            .zip(self.touched)
            .enumerate()
            .filter(|(_, (c, t))| *t && !c.is_zero())
            .map(|(i, (c, _))| (i as u16, c))
            .collect();
        AlgebraElement { n: self.n, terms }
    }
}

impl AlgebraElement {
    pub fn zero(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(AlgebraElement { n, terms: Vec::new() })
    }

    pub fn one(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(AlgebraElement {
            n,
            terms: vec![(0, Int::one())],
        })
    }

    /// The variable `X_i`.
    pub fn variable(i: usize, n: usize) -> Result<Self> {
        check_n(n)?;
        check_index(i, n)?;
        Ok(AlgebraElement {
            n,
            terms: vec![(MonomialTable::get(n).letters[i - 1], Int::one())],
        })
    }

    pub fn from_terms<I>(n: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Monomial, Int)>,
    {
        check_n(n)?;
        let t = MonomialTable::get(n);
        let mut acc = Accumulator::new(n);
        for (m, c) in terms {
            let m = Monomial::new(m.0, n)?;
            let letters: Vec<u8> = m.0.iter().map(|&l| l as u8).collect();
            acc.add(t.index_of(&letters).expect("validated monomial"), &c);
        }
        Ok(acc.finish())
    }

    pub fn ambient_n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub(crate) fn raw_terms(&self) -> &[(u16, Int)] {
        &self.terms
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in canonical monomial order.
    pub fn terms(&self) -> impl Iterator<Item = (Monomial, &Int)> + '_ {
        let t = MonomialTable::get(self.n);
        self.terms.iter().map(move |(u, c)| {
            (
                Monomial(t.word(*u).iter().map(|&l| l as usize).collect()),
                c,
            )
        })
    }

    /// Coefficient of the monomial with the given letters (zero for words
    /// with a repeated or out-of-range letter).
    pub fn coefficient(&self, letters: &[usize]) -> Int {
        let t = MonomialTable::get(self.n);
        if letters.iter().any(|&l| l == 0 || l > self.n) {
            return Int::zero();
        }
        let key: Vec<u8> = letters.iter().map(|&l| l as u8).collect();
        match t.index_of(&key) {
            Some(idx) => self.coeff_at(idx),
            None => Int::zero(),
        }
    }

    pub(crate) fn coeff_at(&self, idx: u16) -> Int {
        match self.terms.binary_search_by_key(&idx, |(u, _)| *u) {
            Ok(pos) => self.terms[pos].1.clone(),
            Err(_) => Int::zero(),
        }
    }

    pub fn constant_term(&self) -> Int {
        self.coeff_at(0)
    }

    /// Lowest degree carrying a nonzero coefficient, `None` for zero.
    pub fn min_degree(&self) -> Option<usize> {
        let t = MonomialTable::get(self.n);
        self.terms.first().map(|(u, _)| t.word(*u).len())
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.n == other.n {
            Ok(())
        } else {
            Err(MagnusError::AmbientMismatch {
                left: self.n,
                right: other.n,
            })
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.plus(other))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.minus(other))
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(self.times(other))
    }

    pub(crate) fn plus(&self, other: &Self) -> Self {
        let mut acc = Accumulator::new(self.n);
        acc.add_element(self, &Int::one());
        acc.add_element(other, &Int::one());
        acc.finish()
    }

    pub(crate) fn minus(&self, other: &Self) -> Self {
        let mut acc = Accumulator::new(self.n);
        acc.add_element(self, &Int::one());
        acc.add_element(other, &-Int::one());
        acc.finish()
    }

    pub(crate) fn times(&self, other: &Self) -> Self {
        debug_assert_eq!(self.n, other.n);
        let mut acc = Accumulator::new(self.n);
        acc.add_product(self, other);
        acc.finish()
    }

    pub fn neg(&self) -> Self {
        self.scale(&-Int::one())
    }

    pub fn scale(&self, k: &Int) -> Self {
        if k.is_zero() {
            return AlgebraElement {
                n: self.n,
                terms: Vec::new(),
            };
        }
        AlgebraElement {
            n: self.n,
            terms: self.terms.iter().map(|(u, c)| (*u, c * k)).collect(),
        }
    }

    /// The image under the ring map `X_j -> 0`, other variables fixed.
    pub fn kill_variable(&self, j: usize) -> Self {
        let t = MonomialTable::get(self.n);
        let bit = 1u32 << j;
        AlgebraElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(u, _)| t.masks[*u as usize] & bit == 0)
                .cloned()
                .collect(),
        }
    }

    /// Drops every term of degree greater than `max_degree`.
    pub fn truncate(&self, max_degree: usize) -> Self {
        let t = MonomialTable::get(self.n);
        AlgebraElement {
            n: self.n,
            terms: self
                .terms
                .iter()
                .filter(|(u, _)| t.word(*u).len() <= max_degree)
                .cloned()
                .collect(),
        }
    }

    /// True when no monomial of the element contains `X_j`.
    pub fn avoids(&self, j: usize) -> bool {
        let t = MonomialTable::get(self.n);
        self.terms
            .iter()
            .all(|(u, _)| t.masks[*u as usize] & (1 << j) == 0)
    }

    /// For an element of the form `sum_u c_u u X_j v`, returns
    /// `sum_u c_{u X_j} u`: the left cofactors of `X_j` with empty right part.
    pub fn left_cofactor(&self, j: usize) -> Self {
        let t = MonomialTable::get(self.n);
        let mut acc = Accumulator::new(self.n);
        for (u, c) in &self.terms {
            let w = t.word(*u);
            if w.last() == Some(&(j as u8)) {
                let prefix = t.index_of(&w[..w.len() - 1]).expect("prefix of a basis word");
                acc.add(prefix, c);
            }
        }
        acc.finish()
    }
}

impl fmt::Display for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let t = MonomialTable::get(self.n);
        for (k, (u, c)) in self.terms.iter().enumerate() {
            let word = t.word(*u);
            let negative = c.is_negative();
            match (k, negative) {
                (0, true) => write!(f, "-")?,
                (0, false) => {}
                (_, true) => write!(f, " - ")?,
                (_, false) => write!(f, " + ")?,
            }
            let abs = c.abs();
            if word.is_empty() {
                write!(f, "{abs}")?;
            } else {
                write!(f, "{abs}*")?;
                for l in word {
                    write!(f, "X{l}")?;
                }
            }
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraElement[n={}]({})", self.n, self)
    }
}

impl AlgebraElement {
    /// Parses the textual form written by `Display`. A missing coefficient
    /// means 1, so `1 + X1 - 2*X1X2` is accepted as well.
    pub fn parse(s: &str, n: usize) -> Result<Self> {
        check_n(n)?;
        let err = |m: &str| MagnusError::Parse(format!("{m} in {s:?}"));
        let compact: String = s.chars().filter(|c| !c.is_whitespace()).collect();
        if compact.is_empty() {
            return Err(err("empty input"));
        }
        let mut pieces = Vec::new();
        let mut current = String::new();
        for (i, ch) in compact.chars().enumerate() {
            if (ch == '+' || ch == '-') && i > 0 {
                pieces.push(std::mem::take(&mut current));
            }
            current.push(ch);
        }
        pieces.push(current);
        let mut terms = Vec::new();
        for piece in pieces {
            let (sign, body) = match piece.strip_prefix('-') {
                Some(rest) => (-1, rest),
                None => (1, piece.strip_prefix('+').unwrap_or(&piece)),
            };
            if body.is_empty() {
                return Err(err("dangling sign"));
            }
            let (coeff, word) = match body.split_once('*') {
                Some((c, w)) => (c, w),
                None if body.starts_with('X') => ("1", body),
                None => (body, ""),
            };
            let mut c = Int::from_str(coeff).map_err(|_| err("bad coefficient"))?;
            if sign < 0 {
                c = -c;
            }
            let mut letters = Vec::new();
            if !word.is_empty() {
                if !word.starts_with('X') {
                    return Err(err("expected X"));
                }
                for part in word[1..].split('X') {
                    letters.push(part.parse::<usize>().map_err(|_| err("bad index"))?);
                }
            }
            terms.push((Monomial::new(letters, n)?, c));
        }
        AlgebraElement::from_terms(n, terms)
    }
}

/// A group-like element (constant term exactly 1) of the reduced Magnus
/// algebra; these are the images of reduced free group elements.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct GroupElement(AlgebraElement);

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "GroupElement[n={}]({})", self.0.n, self.0)
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl TryFrom<AlgebraElement> for GroupElement {
    type Error = MagnusError;

    fn try_from(a: AlgebraElement) -> Result<Self> {
        if a.constant_term().is_one() {
            Ok(GroupElement(a))
        } else {
            Err(MagnusError::NotGroupLike)
        }
    }
}

/// Magnus image `1 + X_i` of the meridian `x_i`.
pub fn meridian(i: usize, n: usize) -> Result<GroupElement> {
    GroupElement::meridian(i, n)
}

impl GroupElement {
    pub fn identity(n: usize) -> Result<Self> {
        Ok(GroupElement(AlgebraElement::one(n)?))
    }

    pub fn meridian(i: usize, n: usize) -> Result<Self> {
        let x = AlgebraElement::variable(i, n)?;
        Ok(GroupElement(x.plus(&AlgebraElement::one(n)?)))
    }

    pub(crate) fn from_algebra_unchecked(a: AlgebraElement) -> Self {
        debug_assert!(a.constant_term().is_one());
        GroupElement(a)
    }

    pub fn as_algebra(&self) -> &AlgebraElement {
        &self.0
    }

    pub fn into_algebra(self) -> AlgebraElement {
        self.0
    }

    pub fn ambient_n(&self) -> usize {
        self.0.n
    }

    pub fn is_identity(&self) -> bool {
        self.0.terms.len() == 1 && self.0.terms[0].0 == 0
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        Ok(GroupElement(self.0.mul(&other.0)?))
    }

    pub(crate) fn times(&self, other: &Self) -> Self {
        GroupElement(self.0.times(&other.0))
    }

    /// Inverse by the finite geometric series `sum (-t)^k` where `t = a - 1`;
    /// `t^(n+1) = 0` in the quotient.
    pub fn inv(&self) -> Self {
        let n = self.0.n;
        let one = AlgebraElement::one(n).expect("valid n");
        let t = self.0.minus(&one);
        if t.is_zero() {
            return self.clone();
        }
        let minus_t = t.neg();
        let mut acc = Accumulator::new(n);
        acc.add_element(&one, &Int::one());
        let mut power = minus_t.clone();
        while !power.is_zero() {
            acc.add_element(&power, &Int::one());
            power = power.times(&minus_t);
        }
        GroupElement(acc.finish())
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.0.check_same(&other.0)?;
        Ok(self.comm(other))
    }

    pub(crate) fn comm(&self, other: &Self) -> Self {
        self.times(other).times(&self.inv()).times(&other.inv())
    }

    /// Integer power, negative exponents through the inverse.
    pub fn pow(&self, k: i64) -> Self {
        let base = if k < 0 { self.inv() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut result = GroupElement::identity(self.0.n).expect("valid n");
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.times(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.times(&sq);
            }
        }
        result
    }

    /// `self * X_i * self^-1` as an algebra element.
    pub fn conjugate_variable(&self, i: usize) -> Result<AlgebraElement> {
        let x = AlgebraElement::variable(i, self.0.n)?;
        Ok(self.0.times(&x).times(&self.inv().0))
    }

    pub fn kill_variable(&self, j: usize) -> Self {
        GroupElement(self.0.kill_variable(j))
    }
}

/// An algebra endomorphism given by the images of the variables.
#[derive(Clone, Debug)]
pub struct Substitution {
    n: usize,
    images: Vec<AlgebraElement>,
    // letters whose image differs from the variable itself
    moved: u32,
}

impl Substitution {
    pub fn identity(n: usize) -> Result<Self> {
        let images = (1..=n)
            .map(|i| AlgebraElement::variable(i, n))
            .collect::<Result<Vec<_>>>()?;
        Ok(Substitution {
            n,
            images,
            moved: 0,
        })
    }

    /// `X_i -> images[i - 1]`. Images must have zero constant term for the
    /// map to respect the quotient.
    pub fn new(images: Vec<AlgebraElement>) -> Result<Self> {
        let n = images.len();
        check_n(n)?;
        let mut moved = 0u32;
        for (k, img) in images.iter().enumerate() {
            if img.n != n {
                return Err(MagnusError::AmbientMismatch {
                    left: n,
                    right: img.n,
                });
            }
            if img != &AlgebraElement::variable(k + 1, n)? {
                moved |= 1 << (k + 1);
            }
        }
        Ok(Substitution { n, images, moved })
    }

    /// The map `X_i -> w X_i w^-1`, all other variables fixed.
    pub fn conjugating(i: usize, w: &GroupElement) -> Result<Self> {
        let n = w.ambient_n();
        check_index(i, n)?;
        let mut s = Substitution::identity(n)?;
        s.images[i - 1] = w.conjugate_variable(i)?;
        if s.images[i - 1] != AlgebraElement::variable(i, n)? {
            s.moved |= 1 << i;
        }
        Ok(s)
    }

    pub fn image(&self, i: usize) -> &AlgebraElement {
        &self.images[i - 1]
    }

    pub fn apply(&self, a: &AlgebraElement) -> Result<AlgebraElement> {
        if a.n != self.n {
            return Err(MagnusError::AmbientMismatch {
                left: self.n,
                right: a.n,
            });
        }
        Ok(self.apply_unchecked(a))
    }

    pub(crate) fn apply_unchecked(&self, a: &AlgebraElement) -> AlgebraElement {
        let t = MonomialTable::get(self.n);
        let mut acc = Accumulator::new(self.n);
        let mut memo: HashMap<u16, AlgebraElement> = HashMap::new();
        for (u, c) in &a.terms {
            if t.masks[*u as usize] & self.moved == 0 {
                acc.add(*u, c);
            } else {
                let img = self.monomial_image(*u, t, &mut memo);
                acc.add_element(&img, c);
            }
        }
        acc.finish()
    }

    pub(crate) fn apply_group(&self, g: &GroupElement) -> GroupElement {
        GroupElement(self.apply_unchecked(&g.0))
    }

    /// Image of the basis monomial with index `u`.
    pub(crate) fn image_of_monomial(&self, u: u16) -> AlgebraElement {
        let t = MonomialTable::get(self.n);
        self.monomial_image(u, t, &mut HashMap::new())
    }

    fn monomial_image(
        &self,
        u: u16,
        t: &MonomialTable,
        memo: &mut HashMap<u16, AlgebraElement>,
    ) -> AlgebraElement {
        if let Some(img) = memo.get(&u) {
            return img.clone();
        }
        let word = t.word(u);
        let img = if word.is_empty() {
            AlgebraElement::one(self.n).expect("valid n")
        } else if t.masks[u as usize] & self.moved == 0 {
            AlgebraElement {
                n: self.n,
                terms: vec![(u, Int::one())],
            }
        } else {
            let head = &self.images[word[0] as usize - 1];
            let rest = t.index_of(&word[1..]).expect("suffix of a basis word");
            let tail = self.monomial_image(rest, t, memo);
            head.times(&tail)
        };
        memo.insert(u, img.clone());
        img
    }

    /// Composition `self o other`.
    pub fn compose(&self, other: &Substitution) -> Result<Substitution> {
        let images = other
            .images
            .iter()
            .map(|img| self.apply(img))
            .collect::<Result<Vec<_>>>()?;
        Substitution::new(images)
    }
}

/// The algebra endomorphism `X_i -> w X_i w^-1` (other variables fixed)
/// applied to `a`.
pub fn substitute(i: usize, w: &GroupElement, a: &AlgebraElement) -> Result<AlgebraElement> {
    if w.ambient_n() != a.n {
        return Err(MagnusError::AmbientMismatch {
            left: w.ambient_n(),
            right: a.n,
        });
    }
    Substitution::conjugating(i, w)?.apply(a)
}
