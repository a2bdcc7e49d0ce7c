//! Partial conjugations and their action on string links and coordinates.
//!
//! The partial conjugation `PC(i, w)` conjugates the `i`-th longitude,
//! `λ_i -> w^-1 λ_i w`, and leaves the string link obtained by deleting
//! strand `i` unchanged. It is realized as left multiplication by the
//! element of the strand-`i` deletion kernel whose `i`-th longitude is
//! `λ_i^-1 w^-1 λ_i w` (modulo `x_i`). The kernel is identified with the
//! reduced free group on the other strands through `x_j -> A_{ij}`, which
//! reverses products.
//!
//! An alternative convention rebases the meridian of strand `i` in all other
//! longitudes; it is kept for comparison under [`PcConvention`] and fails
//! the boundary condition for most inputs.

use std::fmt;
use std::sync::OnceLock;

use num_traits::{ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};


use crate::fiber::{FiberError, StrandData};
use crate::indexing::{self, CanonicalForm};
use crate::magnus::{AlgebraElement, GroupElement, Int, MagnusError, Substitution};
use crate::stringlink::{elementary, Result, StringLink, StringLinkError};

/// A partial conjugation `PC(i, w)`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct PartialConj {
    component: usize,
    conjugator: GroupElement,
}

impl fmt::Debug for PartialConj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "PC({}, {})", self.component, self.conjugator_label())
    }
}

impl fmt::Display for PartialConj {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

impl PartialConj {
    pub fn new(component: usize, conjugator: GroupElement) -> Result<Self> {
        let n = conjugator.ambient_n();
        if !(1..=n).contains(&component) {
            return Err(MagnusError::IndexOutOfRange { index: component, n }.into());
        }
        Ok(PartialConj {
            component,
            conjugator,
        })
    }

    /// `PC(i, x_j^k)`.
    pub fn letter(i: usize, j: usize, k: i64, n: usize) -> Result<Self> {
        PartialConj::new(i, GroupElement::meridian(j, n)?.pow(k))
    }

    /// Parses a conjugator label: `"1"`, `"x3"`, `"x3^-1"`, `"x3^k"`, or any
    /// group-like algebra element in the `magnus` text format.
    pub fn parse(component: usize, conjugator: &str, n: usize) -> Result<Self> {
        let s = conjugator.trim();
        if s == "1" {
            return PartialConj::new(component, GroupElement::identity(n)?);
        }
        if let Some(rest) = s.strip_prefix('x') {
            let (base, exp) = match rest.split_once('^') {
                Some((b, e)) => (b, e.parse::<i64>().ok()),
                None => (rest, Some(1)),
            };
            if let (Ok(j), Some(k)) = (base.parse::<usize>(), exp) {
                return PartialConj::letter(component, j, k, n);
            }
        }
        let a = AlgebraElement::parse(s, n)?;
        PartialConj::new(component, GroupElement::try_from(a)?)
    }

    pub fn n(&self) -> usize {
        self.conjugator.ambient_n()
    }

    pub fn component(&self) -> usize {
        self.component
    }

    pub fn conjugator(&self) -> &GroupElement {
        &self.conjugator
    }

    pub fn inverse(&self) -> PartialConj {
        PartialConj {
            component: self.component,
            conjugator: self.conjugator.inv(),
        }
    }

    /// `PC(i, w)^k = PC(i, w^k)`.
    pub fn pow(&self, k: i64) -> PartialConj {
        PartialConj {
            component: self.component,
            conjugator: self.conjugator.pow(k),
        }
    }

    /// `(j, k)` when the conjugator is `x_j^k` with `k != 0`.
    pub fn meridian_power(&self) -> Option<(usize, i64)> {
        let a = self.conjugator.as_algebra();
        if a.num_terms() != 2 {
            return None;
        }
        let (mono, c) = a.terms().find(|(m, _)| m.degree() > 0)?;
        if mono.degree() != 1 {
            return None;
        }
        Some((mono.letters()[0], c.to_i64()?))
    }

    fn conjugator_label(&self) -> String {
        if self.conjugator.is_identity() {
            return "1".into();
        }
        match self.meridian_power() {
            Some((j, 1)) => format!("x{j}"),
            Some((j, k)) => format!("x{j}^{k}"),
            None => self.conjugator.to_string(),
        }
    }
}

impl Serialize for PartialConj {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("PartialConj", 2)?;
        st.serialize_field("component", &self.component)?;
        st.serialize_field("conjugator", &self.conjugator_label())?;
        st.end()
    }
}

/// The `2 n (n - 1)` moves `PC(i, x_j^{±1})`, `i != j`, ordered by `i`, then
/// `j`, positive before negative.
pub fn elementary_moves(n: usize) -> Result<Vec<PartialConj>> {
    if !(2..=5).contains(&n) {
        return Err(MagnusError::UnsupportedN(n).into());
    }
    let mut out = Vec::with_capacity(2 * n * (n - 1));
    for i in 1..=n {
        for j in (1..=n).filter(|&j| j != i) {
            out.push(PartialConj::letter(i, j, 1, n)?);
            out.push(PartialConj::letter(i, j, -1, n)?);
        }
    }
    Ok(out)
}

/// Convention used to act on string links.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PcConvention {
    /// Conjugate `λ_i` and keep the string link with strand `i` deleted.
    Kernel,
    /// Substitute `x_i -> w x_i w^-1` in every longitude, then conjugate
    /// `λ_i` by `w`.
    RebaseConjugateOwn,
    /// Substitute `x_i -> w x_i w^-1` in every longitude, `λ_i` kept.
    RebaseKeepOwn,
}

/// Applies a partial conjugation to a string link.
pub fn pc_apply(pc: &PartialConj, sl: &StringLink) -> Result<StringLink> {
    pc_apply_with(pc, sl, PcConvention::Kernel)
}

/// Applies a partial conjugation under an explicit convention. Results that
/// violate the boundary condition are reported as `NotRealizable`.
pub fn pc_apply_with(
    pc: &PartialConj,
    sl: &StringLink,
    convention: PcConvention,
) -> Result<StringLink> {
    let n = sl.n();
    if pc.n() != n {
        return Err(StringLinkError::AmbientMismatch(pc.n(), n));
    }
    let i = pc.component;
    let w = &pc.conjugator;
    if w.is_identity() {
        return Ok(sl.clone());
    }
    let out = match convention {
        PcConvention::Kernel => {
            let l = sl.longitude(i);
            let u = l.inv().times(&w.inv()).times(l).times(w).kill_variable(i);
            kernel_element(n, i, &u)?.compose(sl)?
        }
        PcConvention::RebaseConjugateOwn | PcConvention::RebaseKeepOwn => {
            let s = Substitution::conjugating(i, w)?;
            let longitudes = (1..=n)
                .map(|j| {
                    let l = s.apply_group(sl.longitude(j));
                    if j == i && convention == PcConvention::RebaseConjugateOwn {
                        w.inv().times(&l).times(w)
                    } else {
                        l
                    }
                })
                .collect();
            StringLink::normalized_unchecked(longitudes)
        }
    };
    if out.is_realizable() {
        Ok(out)
    } else {
        Err(StringLinkError::NotRealizable)
    }
}

/// A basic commutator on the letters other than `i`, with the kernel string
/// link realizing it as `i`-th longitude.
struct KernelFactor {
    letters: Vec<usize>,
    element: GroupElement,
    link: StringLink,
    inverse: StringLink,
}

fn kernel_factors(n: usize, i: usize) -> &'static [KernelFactor] {
    static TABLES: OnceLock<Vec<Vec<OnceLock<Vec<KernelFactor>>>>> = OnceLock::new();
    let tables = TABLES.get_or_init(|| {
        (0..=5usize)
            .map(|n| (0..=n).map(|_| OnceLock::new()).collect())
            .collect()
    });
    tables[n][i].get_or_init(|| build_kernel_factors(n, i))
}

/// Left-normed commutators `[.., [x_a, x_b], ..]` on distinct letters
/// avoiding `i`, the first letter smallest, grouped by length. Their
/// Magnus leading terms form a basis of each degree.
fn build_kernel_factors(n: usize, i: usize) -> Vec<KernelFactor> {
    let others: Vec<usize> = (1..=n).filter(|&a| a != i).collect();
    let a_links: Vec<(StringLink, StringLink)> = others
        .iter()
        .map(|&a| {
            let l = elementary(i, a, n).expect("distinct strands");
            let inv = l.inverse();
            (l, inv)
        })
        .collect();
    let a_link = |a: usize, positive: bool| {
        let p = others.iter().position(|&o| o == a).expect("letter avoids i");
        if positive {
            &a_links[p].0
        } else {
            &a_links[p].1
        }
    };
    let mut out = Vec::new();
    for k in 1..=others.len() {
        for subset in indexing::subsets(others.len(), k) {
            let set: Vec<usize> = subset.iter().map(|&p| others[p - 1]).collect();
            for rest in indexing::permutations(&set[1..]) {
                let mut letters = vec![set[0]];
                letters.extend(rest);
                let mut element = GroupElement::meridian(letters[0], n).expect("valid letter");
                // signed letter word of the commutator, +a for x_a, -a for x_a^-1
                let mut word = vec![letters[0] as i64];
                for &a in &letters[1..] {
                    element = element.comm(&GroupElement::meridian(a, n).expect("valid letter"));
                    let mut w = word.clone();
                    w.push(a as i64);
                    w.extend(word.iter().rev().map(|l| -l));
                    w.push(-(a as i64));
                    word = w;
                }
                let mut link = StringLink::trivial(n).expect("valid n");
                for &l in word.iter().rev() {
                    link = link.stack(a_link(l.unsigned_abs() as usize, l > 0));
                }
                let inverse = link.inverse();
                out.push(KernelFactor {
                    letters,
                    element,
                    link,
                    inverse,
                });
            }
        }
    }
    out
}

/// The element of the strand-`i` deletion kernel whose `i`-th longitude is
/// `u`, an element not involving `x_i`.
fn kernel_element(n: usize, i: usize, u: &GroupElement) -> Result<StringLink> {
    let factors = kernel_factors(n, i);
    let mut current = u.clone();
    let mut exponents: Vec<(usize, i64)> = Vec::new();
    let mut pos = 0;
    while pos < factors.len() {
        let k = factors[pos].letters.len();
        let end = pos + factors[pos..].iter().take_while(|f| f.letters.len() == k).count();
        let mut peel = GroupElement::identity(n)?;
        for (idx, f) in factors.iter().enumerate().take(end).skip(pos) {
            let e = current.as_algebra().coefficient(&f.letters);
            if e.is_zero() {
                continue;
            }
            let e = e
                .to_i64()
                .ok_or_else(|| StringLinkError::CoordinateOverflow(e.to_string()))?;
            peel = peel.times(&f.element.pow(e));
            exponents.push((idx, e));
        }
        current = peel.inv().times(&current);
        pos = end;
    }
    if !current.is_identity() {
        return Err(StringLinkError::Internal(
            "kernel decomposition did not terminate at the identity".into(),
        ));
    }
    let mut link = StringLink::trivial(n)?;
    for &(idx, e) in exponents.iter().rev() {
        let f = &factors[idx];
        let p = if e > 0 {
            f.link.pow(e)
        } else {
            f.inverse.pow(-e)
        };
        link = link.stack(&p);
    }
    Ok(link)
}

/// Coordinates of `PC(i, w)` applied to the string link with canonical form
/// `y`. Agrees with `to_canonical(pc_apply(..))` and avoids building string
/// links: only coordinates whose index involves `i` change.
pub fn pc_coords(pc: &PartialConj, y: &CanonicalForm) -> Result<CanonicalForm> {
    let n = y.n();
    if pc.n() != n {
        return Err(StringLinkError::AmbientMismatch(pc.n(), n));
    }
    let mut flat = y.flat();
    if !pc.conjugator.is_identity() {
        conjugate_flat(n, pc.component, &pc.conjugator, &mut flat)?;
    }
    Ok(CanonicalForm::from_flat(n, &flat)?)
}

/// Applies `PC(i, x_j^k)` to flat coordinates in place.
pub(crate) fn apply_letter_flat(n: usize, i: usize, j: usize, k: i64, y: &mut [i64]) -> Result<()> {
    if k == 0 {
        return Ok(());
    }
    conjugate_flat(n, i, &GroupElement::meridian(j, n)?.pow(k), y)
}

/// Replaces `λ_i` by `w^-1 λ_i w` on flat coordinates, with machine
/// integers first and arbitrary precision on overflow.
fn conjugate_flat(n: usize, i: usize, w: &GroupElement, y: &mut [i64]) -> Result<()> {
    use crate::coeff::Coeff;

    fn attempt<C: Coeff>(
        data: &StrandData,
        w: &GroupElement,
        y: &[i64],
    ) -> std::result::Result<Vec<i64>, FiberError> {
        let wl: Vec<C> = data.local_group(w)?;
        let wi: Vec<C> = data.local_group(&w.inv())?;
        let lam: Vec<C> = data.longitude(y, data.letters())?;
        let target = data.conjugate(&lam, &wl, &wi)?;
        let mut out = y.to_vec();
        data.solve(&target, &mut out)?;
        Ok(out)
    }
    let data = StrandData::get(n, i);
    let result = match attempt::<i64>(data, w, y) {
        Err(FiberError::Overflow) => attempt::<Int>(data, w, y),
        other => other,
    };
    match result {
        Ok(out) => {
            y.copy_from_slice(&out);
            Ok(())
        }
        Err(FiberError::Overflow) => Err(StringLinkError::CoordinateOverflow(
            "partial conjugation result".into(),
        )),
        Err(FiberError::Mismatch) => Err(StringLinkError::Internal(
            "coordinate solve did not reproduce the conjugated longitude".into(),
        )),
    }
}

/// Coordinate change caused by a move, one vector per block `Y_1 .. Y_{n-1}`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Displacement {
    blocks: Vec<Vec<i64>>,
}

impl Displacement {
    pub fn between(before: &CanonicalForm, after: &CanonicalForm) -> Result<Displacement> {
        if before.n() != after.n() {
            return Err(StringLinkError::AmbientMismatch(before.n(), after.n()));
        }
        let blocks = before
            .blocks()
            .iter()
            .zip(after.blocks())
            .map(|(b, a)| {
                a.iter()
                    .zip(b)
                    .map(|(x, y)| {
                        x.checked_sub(*y).ok_or_else(|| {
                            StringLinkError::CoordinateOverflow("displacement".into())
                        })
                    })
                    .collect::<Result<Vec<i64>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Displacement { blocks })
    }

    pub fn blocks(&self) -> &[Vec<i64>] {
        &self.blocks
    }

    /// Block `b`, numbered from 1.
    pub fn block(&self, b: usize) -> &[i64] {
        &self.blocks[b - 1]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().flatten().all(|&x| x == 0)
    }
}

/// `to_canonical(pc_apply(ψ, from_canonical(Y))) - Y`, evaluated through
/// [`pc_coords`].
pub fn pc_displacement(pc: &PartialConj, y: &CanonicalForm) -> Result<Displacement> {
    let after = pc_coords(pc, y)?;
    let d = Displacement::between(y, &after)?;
    if d.block(1).iter().any(|&x| x != 0) {
        return Err(StringLinkError::Internal(
            "partial conjugation changed a linking number".into(),
        ));
    }
    Ok(d)
}
