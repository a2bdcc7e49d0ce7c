//! Link-homotopy classes of string links, modelled by their longitudes.
//!
//! A string link on `n` strands is stored as the tuple `(λ_1, .., λ_n)` of
//! longitudes in the reduced free group, normalized so that `λ_j` does not
//! involve its own meridian `x_j`. The induced map
//! `x_j -> λ_j x_j λ_j^-1` must fix the boundary word `x_1 x_2 .. x_n`.
//!
//! Stacking convention: `compose(a, b)` has induced map `φ_a ∘ φ_b`, so its
//! longitudes are `φ_a(λ^b_j) λ^a_j`.

use std::sync::OnceLock;

use num_traits::{One, ToPrimitive};
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::indexing::{self, CanonicalForm, IndexError, IndexSequence};
use crate::magnus::{AlgebraElement, GroupElement, Int, MagnusError, Substitution};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StringLinkError {
    #[error(transparent)]
    Magnus(#[from] MagnusError),
    #[error(transparent)]
    Index(#[from] IndexError),
    #[error("string links have different strand counts: {0} vs {1}")]
    AmbientMismatch(usize, usize),
    #[error("longitudes do not fix the boundary word x1..xn")]
    NotRealizable,
    #[error("elementary generator needs two distinct strands, got {0} and {0}")]
    SameStrand(usize),
    #[error("coordinate {0} does not fit in 64 bits")]
    CoordinateOverflow(String),
    #[error("internal invariant violated: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, StringLinkError>;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct StringLink {
    n: usize,
    longitudes: Vec<GroupElement>,
}

impl StringLink {
    pub fn trivial(n: usize) -> Result<Self> {
        check_n(n)?;
        Ok(StringLink {
            n,
            longitudes: (0..n)
                .map(|_| GroupElement::identity(n))
                .collect::<std::result::Result<_, _>>()?,
        })
    }

    /// Builds a string link from longitudes. Each `λ_j` is reduced modulo
    /// the normal closure of `x_j` (by killing `X_j`), then the boundary
    /// condition is checked.
    pub fn from_longitudes(longitudes: Vec<GroupElement>) -> Result<Self> {
        let n = longitudes.len();
        check_n(n)?;
        for l in &longitudes {
            if l.ambient_n() != n {
                return Err(StringLinkError::AmbientMismatch(n, l.ambient_n()));
            }
        }
        let sl = StringLink::normalized_unchecked(longitudes);
        if sl.is_realizable() {
            Ok(sl)
        } else {
            Err(StringLinkError::NotRealizable)
        }
    }

    pub(crate) fn normalized_unchecked(longitudes: Vec<GroupElement>) -> Self {
        let n = longitudes.len();
        let longitudes = longitudes
            .into_iter()
            .enumerate()
            .map(|(k, l)| l.kill_variable(k + 1))
            .collect();
        StringLink { n, longitudes }
    }

    pub(crate) fn normalized(longitudes: Vec<GroupElement>) -> Self {
        let n = longitudes.len();
        let longitudes = longitudes
            .into_iter()
            .enumerate()
            .map(|(k, l)| l.kill_variable(k + 1))
            .collect();
        let sl = StringLink { n, longitudes };
        debug_assert!(sl.is_realizable(), "constructed a non-realizable string link");
        sl
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Longitude `λ_j`, 1-based.
    pub fn longitude(&self, j: usize) -> &GroupElement {
        &self.longitudes[j - 1]
    }

    pub fn longitudes(&self) -> &[GroupElement] {
        &self.longitudes
    }

    pub fn is_trivial(&self) -> bool {
        self.longitudes.iter().all(GroupElement::is_identity)
    }

    /// The induced endomorphism `X_j -> λ_j X_j λ_j^-1` of the Magnus algebra.
    pub fn induced_map(&self) -> Substitution {
        let images = self
            .longitudes
            .iter()
            .enumerate()
            .map(|(k, l)| l.conjugate_variable(k + 1).expect("index in range"))
            .collect();
        Substitution::new(images).expect("valid images")
    }

    /// Boundary condition: the induced map fixes `x_1 x_2 .. x_n`.
    pub fn is_realizable(&self) -> bool {
        let boundary = boundary_word(self.n);
        let phi = self.induced_map();
        phi.apply_group(&boundary) == boundary
    }

    pub fn compose(&self, other: &StringLink) -> Result<StringLink> {
        if self.n != other.n {
            return Err(StringLinkError::AmbientMismatch(self.n, other.n));
        }
        Ok(self.stack(other))
    }

    pub(crate) fn stack(&self, other: &StringLink) -> StringLink {
        if other.is_trivial() {
            return self.clone();
        }
        if self.is_trivial() {
            return other.clone();
        }
        let phi = self.induced_map();
        let longitudes = other
            .longitudes
            .iter()
            .zip(&self.longitudes)
            .map(|(lb, la)| phi.apply_group(lb).times(la))
            .collect();
        StringLink::normalized(longitudes)
    }

    /// Inverse in the string link group. Uses `φ^-1 = Σ_m (id - φ)^m`, a
    /// finite sum because `id - φ` strictly raises degree.
    pub fn inverse(&self) -> StringLink {
        if self.is_trivial() {
            return self.clone();
        }
        let phi = self.induced_map();
        let inverse_map = |z: &AlgebraElement| -> AlgebraElement {
            let mut result = z.clone();
            let mut term = z.clone();
            loop {
                term = term.minus(&phi.apply_unchecked(&term));
                if term.is_zero() {
                    return result;
                }
                result = result.plus(&term);
            }
        };
        let longitudes = self
            .longitudes
            .iter()
            .enumerate()
            .map(|(k, l)| {
                let image = inverse_map(l.as_algebra()).kill_variable(k + 1);
                GroupElement::from_algebra_unchecked(image).inv()
            })
            .collect();
        StringLink::normalized(longitudes)
    }

    /// `a b a^-1 b^-1`.
    pub fn commutator(&self, other: &StringLink) -> Result<StringLink> {
        if self.n != other.n {
            return Err(StringLinkError::AmbientMismatch(self.n, other.n));
        }
        Ok(self
            .stack(other)
            .stack(&self.inverse())
            .stack(&other.inverse()))
    }

    pub fn pow(&self, k: i64) -> StringLink {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut e = k.unsigned_abs();
        let mut result = StringLink::trivial(self.n).expect("valid n");
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.stack(&sq);
            }
            e >>= 1;
            if e > 0 {
                sq = sq.stack(&sq);
            }
        }
        result
    }

    /// Milnor invariant `μ(I)`: the coefficient of `X_{i_1} .. X_{i_{k-1}}`
    /// in `λ_{i_k}`.
    pub fn mu(&self, index: &IndexSequence) -> Result<Int> {
        if index.max_entry() > self.n {
            return Err(IndexError::BadSequence(index.to_string()).into());
        }
        Ok(self.longitude(index.last()).as_algebra().coefficient(index.head()))
    }

    pub(crate) fn mu_i64(&self, index: &IndexSequence) -> Result<i64> {
        self.mu(index)?
            .to_i64()
            .ok_or_else(|| StringLinkError::CoordinateOverflow(index.to_string()))
    }
}

impl Serialize for StringLink {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let texts: Vec<String> = self.longitudes.iter().map(ToString::to_string).collect();
        texts.serialize(s)
    }
}

fn check_n(n: usize) -> Result<()> {
    if (2..=5).contains(&n) {
        Ok(())
    } else {
        Err(IndexError::UnsupportedN(n).into())
    }
}

fn boundary_word(n: usize) -> GroupElement {
    (1..=n).fold(GroupElement::identity(n).expect("valid n"), |acc, i| {
        acc.times(&GroupElement::meridian(i, n).expect("index in range"))
    })
}

/// The pure braid generator `A_ij` (strand `min(i,j)` encircling strand
/// `max(i,j)` behind the strands in between). With `r < s`:
/// `λ_s = x_r`, `λ_r = x_s`, and `λ_k = [x_r, x_s]` for `r < k < s`.
pub fn elementary(i: usize, j: usize, n: usize) -> Result<StringLink> {
    check_n(n)?;
    if i == j {
        return Err(StringLinkError::SameStrand(i));
    }
    let (r, s) = (i.min(j), i.max(j));
    if s > n {
        return Err(MagnusError::IndexOutOfRange { index: s, n }.into());
    }
    let xr = GroupElement::meridian(r, n)?;
    let xs = GroupElement::meridian(s, n)?;
    let middle = xr.comm(&xs);
    let longitudes = (1..=n)
        .map(|k| {
            if k == s {
                xr.clone()
            } else if k == r {
                xs.clone()
            } else if r < k && k < s {
                middle.clone()
            } else {
                GroupElement::identity(n).expect("valid n")
            }
        })
        .collect();
    Ok(StringLink::normalized(longitudes))
}

/// Generator of one canonical coordinate together with its inverse.
#[derive(Debug, Clone)]
pub struct Generator {
    pub index: IndexSequence,
    pub link: StringLink,
    pub inverse: StringLink,
}

impl Generator {
    /// `G_I^k`.
    pub fn power(&self, k: i64) -> StringLink {
        if k >= 0 {
            self.link.pow(k)
        } else {
            self.inverse.pow(-k)
        }
    }
}

/// The left-normed commutator `[[A_{i1 ik}, A_{i2 ik}], .., A_{i(k-1) ik}]`,
/// inverted when needed so that `μ(G_I; I) = 1`.
fn build_generator(index: &IndexSequence, n: usize) -> Result<StringLink> {
    let e = index.entries();
    let top = index.last();
    let mut g = elementary(e[0], top, n)?;
    for &a in &e[1..e.len() - 1] {
        g = g.commutator(&elementary(a, top, n)?)?;
    }
    let mu = g.mu(index)?;
    if mu.is_one() {
        Ok(g)
    } else if mu == -Int::one() {
        Ok(g.inverse())
    } else {
        Err(StringLinkError::Internal(format!(
            "generator {index} has mu = {mu}"
        )))
    }
}

/// Generators of all basis indices for `n`, in coordinate order.
pub fn generator_table(n: usize) -> Result<&'static [Generator]> {
    check_n(n)?;
    static TABLES: OnceLock<Vec<Vec<Generator>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=5)
            .map(|n| {
                if n < 2 {
                    return Vec::new();
                }
                indexing::all_basis_indices(n)
                    .expect("valid n")
                    .into_iter()
                    .map(|index| {
                        let link = build_generator(&index, n).expect("generator construction");
                        let inverse = link.inverse();
                        Generator {
                            index,
                            link,
                            inverse,
                        }
                    })
                    .collect()
            })
            .collect()
    });
    Ok(&tables[n])
}

/// The realized generator `G_I` of a basis index.
pub fn generator(index: &IndexSequence, n: usize) -> Result<StringLink> {
    let table = generator_table(n)?;
    table
        .iter()
        .find(|g| &g.index == index)
        .map(|g| g.link.clone())
        .ok_or_else(|| IndexError::NotBasis(index.to_string(), n).into())
}

/// Ordered product of `G_I^{y_I}` over all basis indices, degree ascending.
pub fn from_canonical(y: &CanonicalForm) -> Result<StringLink> {
    let n = y.n();
    let table = generator_table(n)?;
    let mut current = StringLink::trivial(n)?;
    for (g, &exp) in table.iter().zip(y.flat().iter()) {
        if exp != 0 {
            current = current.stack(&g.power(exp));
        }
    }
    Ok(current)
}

/// Reads off coordinates degree by degree and peels the corresponding
/// generators off the left end until nothing is left.
pub fn to_canonical(sl: &StringLink) -> Result<CanonicalForm> {
    let n = sl.n();
    let table = generator_table(n)?;
    let mut current = sl.clone();
    let mut flat = Vec::with_capacity(table.len());
    let mut pos = 0;
    for k in 2..=n {
        let block: Vec<&Generator> = table[pos..].iter().take_while(|g| g.index.len() == k).collect();
        pos += block.len();
        let ys = block
            .iter()
            .map(|g| current.mu_i64(&g.index))
            .collect::<Result<Vec<_>>>()?;
        let mut peel = StringLink::trivial(n)?;
        for (g, &y) in block.iter().zip(&ys).rev() {
            if y != 0 {
                peel = peel.stack(&g.power(-y));
            }
        }
        current = peel.stack(&current);
        flat.extend(ys);
    }
    if !current.is_trivial() {
        return Err(StringLinkError::Internal(
            "coordinate extraction did not reach the trivial string link".into(),
        ));
    }
    Ok(CanonicalForm::from_flat(n, &flat)?)
}
