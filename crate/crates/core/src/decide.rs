//! Staged decision of link-homotopy between closures of string links.
//!
//! Partial conjugations never change `Y_1`. Block `Y_s` for `s >= 2` is
//! matched at step `s` using compositions of partial conjugations that fix
//! the blocks already matched. Step `s` fails exactly when the target
//! difference lies outside the lattice of translations such compositions
//! induce on `Y_s`.
//!
//! Each move `PC(i, x_j)` changes block `s` by a polynomial in the lower
//! blocks of weighted degree at most `s - 2`, where `Y_t` has weight `t - 1`:
//! a constant on `Y_2`, an affine function of `Y_2` on `Y_3`, and on `Y_4` a
//! quadratic function of `Y_2` plus a linear function of `Y_3`. These
//! polynomials are interpolated exactly from the coordinate engine at a
//! handful of points and checked against it at every step.
//!
//! With the polynomials in hand the stabilizer of the matched blocks is
//! generated by
//! * words in the moves whose total `Y_2` translation vanishes,
//! * commutators `[a, b]` and `[[a, b], c]` of moves,
//! * at step 4, commutators of the above and words in them whose `Y_3`
//!   translation vanishes.
//!
//! Every solution is realized as a concrete move sequence and applied with
//! the exact engine before the next step starts.

use std::ops::Range;

use log::{debug, warn};
use num_traits::{Signed, ToPrimitive};
use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::coeff::{binomial, Checked, Coeff, Overflow};
use crate::indexing::{self, CanonicalForm};
use crate::lattice::{self, IntMatrix};
use crate::magnus::Int;
use crate::moves::{self, PartialConj};
use crate::reduce;
use crate::stringlink::{self, StringLinkError};

/// Passes allowed per step before giving up.
pub const MAX_PASSES: usize = 8;

/// Distinct candidate vectors used per linear solve, cheapest first.
const MAX_COLUMNS: usize = 60;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("links have different component counts: {0} vs {1}")]
    MismatchedN(usize, usize),
    #[error("unsupported component count {0} (expected 2..=5)")]
    UnsupportedN(usize),
    #[error("step {step} did not converge within {passes} passes")]
    IterationBound { step: usize, passes: usize },
    #[error("internal invariant violated: {0}")]
    Internal(String),
    #[error(transparent)]
    StringLink(#[from] StringLinkError),
}

pub type Result<T> = std::result::Result<T, DecideError>;

/// A sequence of partial conjugations, applied left to right.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Certificate {
    moves: Vec<PartialConj>,
}

impl Certificate {
    pub fn new(moves: Vec<PartialConj>) -> Self {
        Certificate { moves }
    }

    pub fn moves(&self) -> &[PartialConj] {
        &self.moves
    }

    pub fn len(&self) -> usize {
        self.moves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.moves.is_empty()
    }

    /// Reads the JSON list form `[{"component": i, "conjugator": "x2"}, ..]`.
    pub fn from_json(value: &serde_json::Value, n: usize) -> std::result::Result<Self, String> {
        let items = value.as_array().ok_or("certificate must be a JSON list")?;
        let moves = items
            .iter()
            .enumerate()
            .map(|(k, item)| {
                let component = item
                    .get("component")
                    .and_then(serde_json::Value::as_u64)
                    .ok_or(format!("move {k}: missing integer \"component\""))?;
                let conj = item
                    .get("conjugator")
                    .and_then(serde_json::Value::as_str)
                    .ok_or(format!("move {k}: missing string \"conjugator\""))?;
                PartialConj::parse(component as usize, conj, n).map_err(|e| format!("move {k}: {e}"))
            })
            .collect::<std::result::Result<Vec<_>, String>>()?;
        Ok(Certificate { moves })
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.moves.serialize(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    LinkHomotopic(Certificate),
    /// Blocks before `step` were matched, block `step` could not be.
    NotLinkHomotopic { step: usize },
}

impl Verdict {
    pub fn is_link_homotopic(&self) -> bool {
        matches!(self, Verdict::LinkHomotopic(_))
    }

    pub fn step(&self) -> Option<usize> {
        match self {
            Verdict::NotLinkHomotopic { step } => Some(*step),
            Verdict::LinkHomotopic(_) => None,
        }
    }

    pub fn certificate(&self) -> Option<&Certificate> {
        match self {
            Verdict::LinkHomotopic(c) => Some(c),
            Verdict::NotLinkHomotopic { .. } => None,
        }
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Verdict", 3)?;
        match self {
            Verdict::LinkHomotopic(c) => {
                st.serialize_field("result", "link-homotopic")?;
                st.serialize_field("step", &None::<usize>)?;
                st.serialize_field("certificate", c)?;
            }
            Verdict::NotLinkHomotopic { step } => {
                st.serialize_field("result", "not-link-homotopic")?;
                st.serialize_field("step", step)?;
                st.serialize_field("certificate", &None::<Certificate>)?;
            }
        }
        st.end()
    }
}

/// Number of solve passes spent on each step; `passes[s]` is 0 when block
/// `s` already matched. More than one pass means a step was re-entered.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Trace {
    pub passes: Vec<usize>,
}

impl Trace {
    /// Steps that needed more than one pass.
    pub fn repeated_steps(&self) -> Vec<usize> {
        (0..self.passes.len()).filter(|&s| self.passes[s] > 1).collect()
    }
}

/// Decides whether the closures of two canonical forms are link-homotopic.
pub fn decide(y: &CanonicalForm, target: &CanonicalForm) -> Result<Verdict> {
    decide_traced(y, target).map(|(v, _)| v)
}

/// [`decide`], also reporting the passes spent per step.
pub fn decide_traced(y: &CanonicalForm, target: &CanonicalForm) -> Result<(Verdict, Trace)> {
    let n = y.n();
    if target.n() != n {
        return Err(DecideError::MismatchedN(n, target.n()));
    }
    if !(2..=5).contains(&n) {
        return Err(DecideError::UnsupportedN(n));
    }
    let mut trace = Trace::default();
    if y.block(1) != target.block(1) {
        return Ok((Verdict::NotLinkHomotopic { step: 1 }, trace));
    }
    let verdict = match decide_with::<i64>(y, target, &mut trace) {
        Err(Fail::Overflow) => {
            debug!("machine integers overflowed, rerunning with arbitrary precision");
            decide_with::<Int>(y, target, &mut trace)
        }
        other => other,
    }
    .map_err(|f| match f {
        Fail::Overflow => DecideError::Internal("arithmetic overflow in exact mode".into()),
        Fail::Error(e) => e,
    })?;
    if let Verdict::LinkHomotopic(c) = &verdict {
        if !verify_certificate(y, target, c) {
            return Err(DecideError::Internal(
                "produced certificate failed verification".into(),
            ));
        }
    }
    Ok((verdict, trace))
}

/// Element-wise [`decide`], evaluated in parallel.
pub fn decide_batch(pairs: &[(CanonicalForm, CanonicalForm)]) -> Vec<Result<Verdict>> {
    pairs.par_iter().map(|(a, b)| decide(a, b)).collect()
}

/// Applies the certificate's moves to `y` through the coordinate engine and
/// compares the result with `target`.
pub fn verify_certificate(y: &CanonicalForm, target: &CanonicalForm, c: &Certificate) -> bool {
    if y.n() != target.n() {
        return false;
    }
    let mut current = y.clone();
    for pc in c.moves() {
        match moves::pc_coords(pc, &current) {
            Ok(next) => current = next,
            Err(_) => return false,
        }
    }
    current == *target
}

/// Same check as [`verify_certificate`] carried out on string links:
/// realize `y`, apply each move, read the coordinates back. Much slower.
pub fn verify_certificate_on_string_links(
    y: &CanonicalForm,
    target: &CanonicalForm,
    c: &Certificate,
) -> bool {
    if y.n() != target.n() {
        return false;
    }
    let run = || -> stringlink::Result<bool> {
        let mut sl = stringlink::from_canonical(y)?;
        for pc in c.moves() {
            sl = moves::pc_apply(pc, &sl)?;
        }
        Ok(stringlink::to_canonical(&sl)? == *target)
    };
    run().unwrap_or(false)
}

enum Fail {
    Overflow,
    Error(DecideError),
}

impl From<Overflow> for Fail {
    fn from(_: Overflow) -> Self {
        Fail::Overflow
    }
}

impl From<DecideError> for Fail {
    fn from(e: DecideError) -> Self {
        Fail::Error(e)
    }
}

impl From<StringLinkError> for Fail {
    fn from(e: StringLinkError) -> Self {
        Fail::Error(e.into())
    }
}

type Res<T> = std::result::Result<T, Fail>;

fn internal(msg: impl Into<String>) -> Fail {
    Fail::Error(DecideError::Internal(msg.into()))
}

/// Flat coordinate ranges of the blocks `Y_1 .. Y_{n-1}`.
struct Layout {
    n: usize,
    ranges: Vec<Range<usize>>,
}

impl Layout {
    fn new(n: usize) -> Self {
        let mut ranges = Vec::new();
        let mut start = 0;
        for len in indexing::block_lengths(n) {
            ranges.push(start..start + len);
            start += len;
        }
        Layout { n, ranges }
    }

    fn top(&self) -> usize {
        self.n - 1
    }

    /// Block `b`, numbered from 1.
    fn range(&self, b: usize) -> Range<usize> {
        self.ranges[b - 1].clone()
    }

    fn len(&self, b: usize) -> usize {
        self.ranges[b - 1].len()
    }
}

/// The positive moves `PC(i, x_j)` as `(i, j)`, in the order of
/// [`moves::elementary_moves`].
fn letter_moves(n: usize) -> Vec<(usize, usize)> {
    (1..=n)
        .flat_map(|i| (1..=n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect()
}

/// A word in the positive moves as runs `(move, exponent)`, applied left to
/// right.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Word(Vec<(usize, i64)>);

impl Word {
    fn letter(m: usize, e: i64) -> Word {
        let mut w = Word::default();
        w.push(m, e);
        w
    }

    fn push(&mut self, m: usize, e: i64) {
        if e == 0 {
            return;
        }
        if let Some(last) = self.0.last_mut() {
            if last.0 == m {
                last.1 += e;
                if last.1 == 0 {
                    self.0.pop();
                }
                return;
            }
        }
        self.0.push((m, e));
    }

    fn extend(&mut self, other: &Word) {
        for &(m, e) in &other.0 {
            self.push(m, e);
        }
    }

    fn inverse(&self) -> Word {
        Word(self.0.iter().rev().map(|&(m, e)| (m, -e)).collect())
    }

    fn pow(&self, k: i64) -> Word {
        let base = if k < 0 { self.inverse() } else { self.clone() };
        let mut out = Word::default();
        for _ in 0..k.unsigned_abs() {
            out.extend(&base);
        }
        out
    }

    fn commutator(a: &Word, b: &Word) -> Word {
        let mut out = a.clone();
        out.extend(b);
        out.extend(&a.inverse());
        out.extend(&b.inverse());
        out
    }

    fn runs(&self) -> usize {
        self.0.len()
    }

    /// Net exponent of each move.
    fn counts(&self, moves: usize) -> Vec<i64> {
        let mut c = vec![0; moves];
        for &(m, e) in &self.0 {
            c[m] += e;
        }
        c
    }
}

/// Coordinate change of one move on block `s`, as a polynomial in the lower
/// blocks. `quad2` is indexed by pairs `a <= b` of `Y_2` positions and uses
/// the basis `binomial(y_a, 2)` on the diagonal, `y_a y_b` off it.
struct BlockPoly<C> {
    constant: Vec<C>,
    lin2: Vec<Vec<C>>,
    quad2: Vec<Vec<C>>,
    lin3: Vec<Vec<C>>,
}

/// Interpolated move polynomials for a fixed `Y_1`. `polys[m][s - 2]`.
struct Model<C> {
    lens: Vec<usize>,
    polys: Vec<Vec<BlockPoly<C>>>,
}

/// Values of the blocks `Y_2 .. Y_top`; `point[s - 2]` is block `s`.
type Point<C> = Vec<Vec<C>>;

fn to_c<C: Coeff>(v: &[i64]) -> Vec<C> {
    v.iter().map(|&x| C::from_i64(x)).collect()
}

fn sub_vec<C: Coeff>(a: &[C], b: &[C]) -> Checked<Vec<C>> {
    a.iter().zip(b).map(|(x, y)| x.sub(y)).collect()
}

fn add_assign<C: Coeff>(a: &mut [C], b: &[C]) -> Checked<()> {
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = x.add(y)?;
        }
    }
    Ok(())
}

fn sub_assign<C: Coeff>(a: &mut [C], b: &[C]) -> Checked<()> {
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x = x.sub(y)?;
        }
    }
    Ok(())
}

/// `acc += v * k`.
fn add_scaled<C: Coeff>(acc: &mut [C], v: &[C], k: &C) -> Checked<()> {
    if k.is_zero() {
        return Ok(());
    }
    for (x, y) in acc.iter_mut().zip(v) {
        if !y.is_zero() {
            x.add_mul(y, k)?;
        }
    }
    Ok(())
}

fn to_ints<C: Coeff>(v: &[C]) -> Vec<Int> {
    v.iter().map(Coeff::to_int).collect()
}

/// Flat coordinates after `PC(i, x_j^e)`.
fn exact_apply(layout: &Layout, mv: (usize, usize), e: i64, flat: &[i64]) -> Res<Vec<i64>> {
    let mut out = flat.to_vec();
    moves::apply_letter_flat(layout.n, mv.0, mv.1, e, &mut out)?;
    Ok(out)
}

fn apply_word_exact(layout: &Layout, moves: &[(usize, usize)], w: &Word, flat: &mut Vec<i64>) -> Res<()> {
    for &(m, e) in &w.0 {
        *flat = exact_apply(layout, moves[m], e, flat)?;
    }
    Ok(())
}

impl<C: Coeff> Model<C> {
    /// Interpolates the move polynomials at points with the given `Y_1`.
    fn fit(layout: &Layout, moves: &[(usize, usize)], y1: &[i64]) -> Res<Model<C>> {
        let top = layout.top();
        let lens: Vec<usize> = (2..=top).map(|s| layout.len(s)).collect();
        let total = layout.ranges.last().map_or(0, |r| r.end);
        let mut base = vec![0i64; total];
        base[layout.range(1)].copy_from_slice(y1);
        // displacement of every move at a point, per block s >= 2
        let displacements = |flat: &[i64]| -> Res<Vec<Vec<Vec<C>>>> {
            moves
                .iter()
                .map(|&mv| {
                    let after = exact_apply(layout, mv, 1, flat)?;
                    (2..=top)
                        .map(|s| {
                            let r = layout.range(s);
                            Ok(sub_vec(&to_c::<C>(&after[r.clone()]), &to_c::<C>(&flat[r]))?)
                        })
                        .collect()
                })
                .collect()
        };
        let d0 = displacements(&base)?;
        let mut polys: Vec<Vec<BlockPoly<C>>> = d0
            .iter()
            .map(|per_block| {
                per_block
                    .iter()
                    .map(|c| BlockPoly {
                        constant: c.clone(),
                        lin2: Vec::new(),
                        quad2: Vec::new(),
                        lin3: Vec::new(),
                    })
                    .collect()
            })
            .collect();
        if top >= 3 {
            let r2 = layout.range(2);
            let l2 = r2.len();
            let mut unit = Vec::with_capacity(l2);
            for a in 0..l2 {
                let mut p = base.clone();
                p[r2.start + a] = 1;
                unit.push(displacements(&p)?);
            }
            for (m, poly) in polys.iter_mut().enumerate() {
                for (k, bp) in poly.iter_mut().enumerate().skip(1) {
                    bp.lin2 = (0..l2)
                        .map(|a| sub_vec(&unit[a][m][k], &bp.constant))
                        .collect::<Checked<_>>()?;
                }
            }
            if top >= 4 {
                let r3 = layout.range(3);
                for a in 0..l2 {
                    for b in a..l2 {
                        let mut p = base.clone();
                        p[r2.start + a] += 1;
                        p[r2.start + b] += 1;
                        let d = displacements(&p)?;
                        for (m, poly) in polys.iter_mut().enumerate() {
                            let bp = &mut poly[2];
                            let mut q = sub_vec(&d[m][2], &bp.constant)?;
                            sub_assign(&mut q, &bp.lin2[a])?;
                            sub_assign(&mut q, &bp.lin2[b])?;
                            bp.quad2.push(q);
                        }
                    }
                }
                for c in 0..r3.len() {
                    let mut p = base.clone();
                    p[r3.start + c] = 1;
                    let d = displacements(&p)?;
                    for (m, poly) in polys.iter_mut().enumerate() {
                        let bp = &mut poly[2];
                        bp.lin3.push(sub_vec(&d[m][2], &bp.constant)?);
                    }
                }
            }
        }
        Ok(Model { lens, polys })
    }

    fn top(&self) -> usize {
        self.lens.len() + 1
    }

    /// Change of block `s` caused by move `m` at `p`; reads only blocks
    /// below `s`.
    fn eval_block(&self, m: usize, s: usize, p: &Point<C>) -> Checked<Vec<C>> {
        let bp = &self.polys[m][s - 2];
        let mut out = bp.constant.clone();
        if s >= 3 {
            for (a, y) in p[0].iter().enumerate() {
                add_scaled(&mut out, &bp.lin2[a], y)?;
            }
        }
        if s >= 4 {
            let y2 = &p[0];
            let mut k = 0;
            for a in 0..y2.len() {
                for b in a..y2.len() {
                    let basis = if a == b {
                        y2[a].mul(&y2[a].sub(&C::one())?)?.half()
                    } else {
                        y2[a].mul(&y2[b])?
                    };
                    add_scaled(&mut out, &bp.quad2[k], &basis)?;
                    k += 1;
                }
            }
            for (c, y) in p[1].iter().enumerate() {
                add_scaled(&mut out, &bp.lin3[c], y)?;
            }
        }
        Ok(out)
    }

    fn apply(&self, m: usize, e: i64, p: &mut Point<C>) -> Checked<()> {
        let top = self.top();
        for _ in 0..e.unsigned_abs() {
            if e > 0 {
                for s in (2..=top).rev() {
                    let d = self.eval_block(m, s, p)?;
                    add_assign(&mut p[s - 2], &d)?;
                }
            } else {
                for s in 2..=top {
                    let d = self.eval_block(m, s, p)?;
                    sub_assign(&mut p[s - 2], &d)?;
                }
            }
        }
        Ok(())
    }

    fn simulate(&self, w: &Word, p0: &Point<C>) -> Checked<Point<C>> {
        let mut p = p0.clone();
        for &(m, e) in &w.0 {
            self.apply(m, e, &mut p)?;
        }
        Ok(p)
    }

    /// `Y_4`-by-`Y_3` coefficient matrix of move `m`, rows indexed by `Y_4`.
    fn y3_matrix(&self, m: usize) -> Vec<Vec<C>> {
        let bp = &self.polys[m][2];
        (0..self.lens[2])
            .map(|r| bp.lin3.iter().map(|col| col[r].clone()).collect())
            .collect()
    }
}

fn point_of<C: Coeff>(layout: &Layout, flat: &[i64]) -> Point<C> {
    (2..=layout.top()).map(|s| to_c(&flat[layout.range(s)])).collect()
}

/// Compares the model with the exact engine for every move at `flat`.
fn check_model<C: Coeff>(
    layout: &Layout,
    moves: &[(usize, usize)],
    model: &Model<C>,
    flat: &[i64],
) -> Res<()> {
    let p = point_of::<C>(layout, flat);
    for (m, &mv) in moves.iter().enumerate() {
        let after = exact_apply(layout, mv, 1, flat)?;
        if after[layout.range(1)] != flat[layout.range(1)] {
            return Err(internal("a move changed a linking number"));
        }
        for s in 2..=layout.top() {
            let r = layout.range(s);
            let exact = sub_vec(&to_c::<C>(&after[r.clone()]), &to_c::<C>(&flat[r]))?;
            if exact != model.eval_block(m, s, &p)? {
                return Err(internal(format!(
                    "interpolated action of PC({}, x{}) on block {s} disagrees with the engine",
                    mv.0, mv.1
                )));
            }
        }
    }
    Ok(())
}

/// Grows a lattice one generator at a time.
struct LatticeBuilder {
    dim: usize,
    gens: Vec<Vec<Int>>,
    // echelon basis: (pivot row, column) of the current Hermite form
    basis: Vec<(usize, Vec<Int>)>,
}

impl LatticeBuilder {
    fn new(dim: usize) -> Self {
        LatticeBuilder {
            dim,
            gens: Vec::new(),
            basis: Vec::new(),
        }
    }

    fn contains(&self, v: &[Int]) -> bool {
        let mut r = v.to_vec();
        for (row, col) in &self.basis {
            if r[*row].is_zero() {
                continue;
            }
            let (q, rem) = num_integer::Integer::div_rem(&r[*row], &col[*row]);
            if !rem.is_zero() {
                return false;
            }
            for (x, c) in r.iter_mut().zip(col) {
                if !c.is_zero() {
                    *x -= &q * c;
                }
            }
        }
        r.iter().all(Coeff::is_zero)
    }

    /// Adds `v` when it enlarges the lattice; returns whether it did.
    fn offer(&mut self, v: &[Int]) -> bool {
        if self.contains(v) {
            return false;
        }
        self.gens.push(v.to_vec());
        let h = lattice::hnf(&IntMatrix::from_columns(self.dim, &self.gens));
        self.basis = h.pivots.iter().map(|&(row, col)| (row, h.h.column(col))).collect();
        true
    }
}

/// Indices ordered by `runs * |v|^2`, zero vectors last, ties by index.
fn by_cost<'a>(items: impl Iterator<Item = (usize, &'a [Int])>) -> Vec<usize> {
    let mut keyed: Vec<(bool, Int, usize)> = items
        .enumerate()
        .map(|(k, (runs, v))| {
            let norm = v.iter().fold(Int::zero(), |acc, x| acc + x * x);
            (norm.is_zero(), norm * Int::from(runs.max(1)), k)
        })
        .collect();
    keyed.sort();
    keyed.into_iter().map(|(_, _, k)| k).collect()
}

/// Indices of a sub-family generating the same lattice, chosen greedily in
/// the given order.
fn select(dim: usize, vectors: &[Vec<Int>]) -> Vec<usize> {
    let mut b = LatticeBuilder::new(dim);
    (0..vectors.len()).filter(|&k| b.offer(&vectors[k])).collect()
}

fn exponent(v: &Int) -> Res<i64> {
    v.to_i64().ok_or_else(|| internal(format!("exponent {v} exceeds 64 bits")))
}

/// Weighted inner product `Σ w_k a_k b_k`.
fn weighted_dot(a: &[Int], b: &[Int], w: &[Int]) -> Int {
    a.iter()
        .zip(b)
        .zip(w)
        .filter(|((x, y), _)| !x.is_zero() && !y.is_zero())
        .fold(Int::zero(), |acc, ((x, y), k)| acc + x * y * k)
}

/// Nearest integer to `a / b` for `b > 0`.
fn round_div(a: &Int, b: &Int) -> Int {
    num_integer::Integer::div_floor(&(a * 2 + b), &(b * 2))
}

/// `x - q v` when that strictly decreases the weighted norm of `x`.
fn reduce_against(x: &mut [Int], v: &[Int], w: &[Int]) -> bool {
    let vv = weighted_dot(v, v, w);
    if vv.is_zero() {
        return false;
    }
    let q = round_div(&weighted_dot(x, v, w), &vv);
    if q.is_zero() {
        return false;
    }
    let before = weighted_dot(x, x, w);
    let candidate: Vec<Int> = x.iter().zip(v).map(|(a, b)| a - &q * b).collect();
    if weighted_dot(&candidate, &candidate, w) < before {
        x.clone_from_slice(&candidate);
        true
    } else {
        false
    }
}

/// Pairwise size reduction of a lattice basis under the weighted norm.
fn reduce_basis(basis: &mut [Vec<Int>], w: &[Int]) {
    loop {
        let mut changed = false;
        for i in 0..basis.len() {
            for j in 0..basis.len() {
                if i != j {
                    let v = basis[j].clone();
                    changed |= reduce_against(&mut basis[i], &v, w);
                }
            }
        }
        if !changed {
            break;
        }
    }
}

/// Shortens `x` modulo the lattice spanned by `basis`.
fn shorten(x: &mut [Int], basis: &[Vec<Int>], w: &[Int]) {
    loop {
        let mut changed = false;
        for v in basis {
            changed |= reduce_against(x, v, w);
        }
        if !changed {
            break;
        }
    }
}

/// A short solution of `A x = b`, together with a reduced basis of the
/// solutions of `A x = 0`.
fn short_solution(a: &IntMatrix, b: &[Int], w: &[Int]) -> Option<(Vec<Int>, Vec<Vec<Int>>)> {
    let sol = lattice::solve_integer(a, b)?;
    let mut null = sol.null_basis;
    reduce_basis(&mut null, w);
    reduce::lll(&mut null, w);
    let mut x = sol.particular;
    shorten(&mut x, &null, w);
    reduce::nearest_plane(&mut x, &null, w);
    shorten(&mut x, &null, w);
    Some((x, null))
}

/// Combinations `[(generator, power)]` generating the group-theoretic
/// kernel of `g -> vectors[g]`: each non-selected generator corrected by the
/// selected ones, plus relations among the selected ones.
fn kernel_combinations(
    dim: usize,
    vectors: &[Vec<Int>],
    weights: &[Int],
) -> Res<Vec<Vec<(usize, i64)>>> {
    let order = by_cost(
        vectors
            .iter()
            .zip(weights)
            .map(|(v, w)| (w.to_usize().unwrap_or(usize::MAX), v.as_slice())),
    );
    let ordered: Vec<Vec<Int>> = order.iter().map(|&k| vectors[k].clone()).collect();
    let sel: Vec<usize> = select(dim, &ordered).into_iter().map(|k| order[k]).collect();
    let cols: Vec<Vec<Int>> = sel.iter().map(|&k| vectors[k].clone()).collect();
    let w: Vec<Int> = sel.iter().map(|&k| weights[k].clone()).collect();
    let mat = IntMatrix::from_columns(dim, &cols);
    let zero = vec![Int::zero(); dim];
    let (_, null) = short_solution(&mat, &zero, &w)
        .ok_or_else(|| internal("homogeneous system reported unsolvable"))?;
    let mut out = Vec::new();
    for g in (0..vectors.len()).filter(|g| !sel.contains(g)) {
        let (x, _) = short_solution(&mat, &vectors[g], &w)
            .ok_or_else(|| internal("selected generators do not span the lattice"))?;
        let mut combo = vec![(g, 1)];
        for (k, v) in x.iter().enumerate() {
            if !v.is_zero() {
                combo.push((sel[k], -exponent(v)?));
            }
        }
        out.push(combo);
    }
    for v in null {
        let mut combo = Vec::new();
        for (k, x) in v.iter().enumerate() {
            if !x.is_zero() {
                combo.push((sel[k], exponent(x)?));
            }
        }
        out.push(combo);
    }
    Ok(out)
}

fn combination_word(combo: &[(usize, i64)], words: &[Word]) -> Word {
    let mut w = Word::default();
    for &(g, e) in combo {
        w.extend(&words[g].pow(e));
    }
    w
}

/// Solves `Σ α_g T(g) = delta` over candidates `(word, T(g))` and realizes
/// the solution as a word, or `None` when `delta` is out of reach.
fn solve_step(candidates: &[(Word, Vec<Int>)], delta: &[Int]) -> Res<Option<Word>> {
    let dim = delta.len();
    // cheapest word for each distinct vector up to sign
    let mut best: std::collections::BTreeMap<Vec<Int>, (usize, usize, bool)> = Default::default();
    for (k, (w, v)) in candidates.iter().enumerate() {
        let Some(first) = v.iter().find(|x| !x.is_zero()) else { continue };
        let flip = first.is_negative();
        let key: Vec<Int> = if flip { v.iter().map(|x| -x).collect() } else { v.clone() };
        let cost = w.runs();
        let entry = best.entry(key).or_insert((cost, k, flip));
        if cost < entry.0 {
            *entry = (cost, k, flip);
        }
    }
    let distinct: Vec<(Vec<Int>, usize, usize, bool)> =
        best.into_iter().map(|(v, (c, k, f))| (v, c, k, f)).collect();
    let order = by_cost(distinct.iter().map(|(v, c, _, _)| (*c, v.as_slice())));
    let ordered: Vec<Vec<Int>> = order.iter().map(|&k| distinct[k].0.clone()).collect();
    let mut chosen: Vec<usize> = select(dim, &ordered);
    chosen.extend(0..ordered.len().min(MAX_COLUMNS));
    chosen.sort_unstable();
    chosen.dedup();
    debug!("{} candidates, {} distinct, {} used", candidates.len(), distinct.len(), chosen.len());
    let cols: Vec<Vec<Int>> = chosen.iter().map(|&k| ordered[k].clone()).collect();
    let weights: Vec<Int> = chosen
        .iter()
        .map(|&k| Int::from(distinct[order[k]].1.max(1)))
        .collect();
    let mat = IntMatrix::from_columns(dim, &cols);
    let Some((x, _)) = short_solution(&mat, delta, &weights) else {
        return Ok(None);
    };
    let mut w = Word::default();
    for (k, a) in x.iter().enumerate() {
        if !a.is_zero() {
            let (_, _, idx, flip) = &distinct[order[chosen[k]]];
            let e = exponent(a)?;
            w.extend(&candidates[*idx].0.pow(if *flip { -e } else { e }));
        }
    }
    Ok(Some(w))
}

/// Affine action of a `Y_2`-stabilizing word on `(Y_3, Y_4)` at fixed
/// `Y_2`: `Y_3 += t`, `Y_4 += u + M (Y_3 - Y_3^0)`.
#[derive(Clone)]
struct Affine<C> {
    t: Vec<C>,
    u: Vec<C>,
    m: Vec<Vec<C>>,
}

impl<C: Coeff> Affine<C> {
    fn mat_vec(m: &[Vec<C>], v: &[C]) -> Checked<Vec<C>> {
        m.iter()
            .map(|row| {
                let mut acc = C::zero();
                for (a, b) in row.iter().zip(v) {
                    if !a.is_zero() && !b.is_zero() {
                        acc.add_mul(a, b)?;
                    }
                }
                Ok(acc)
            })
            .collect()
    }

    /// `self` first, then `other`.
    fn then(&self, other: &Affine<C>) -> Checked<Affine<C>> {
        let mut t = self.t.clone();
        add_assign(&mut t, &other.t)?;
        let mut u = self.u.clone();
        add_assign(&mut u, &other.u)?;
        add_assign(&mut u, &Self::mat_vec(&other.m, &self.t)?)?;
        let m = self
            .m
            .iter()
            .zip(&other.m)
            .map(|(a, b)| a.iter().zip(b).map(|(x, y)| x.add(y)).collect())
            .collect::<Checked<_>>()?;
        Ok(Affine { t, u, m })
    }

    fn inverse(&self) -> Checked<Affine<C>> {
        let t = self.t.iter().map(Coeff::neg).collect::<Checked<Vec<C>>>()?;
        let mut u = self.u.iter().map(Coeff::neg).collect::<Checked<Vec<C>>>()?;
        add_assign(&mut u, &Self::mat_vec(&self.m, &self.t)?)?;
        let m = self
            .m
            .iter()
            .map(|row| row.iter().map(Coeff::neg).collect())
            .collect::<Checked<_>>()?;
        Ok(Affine { t, u, m })
    }

    /// `(k t, k u + binomial(k, 2) M t, k M)` for `k >= 0`.
    fn pow(&self, k: i64) -> Checked<Affine<C>> {
        if k < 0 {
            return self.inverse()?.pow(-k);
        }
        let kc = C::from_i64(k);
        let scale = |v: &[C]| v.iter().map(|x| x.mul(&kc)).collect::<Checked<Vec<C>>>();
        let mut u = scale(&self.u)?;
        add_scaled(&mut u, &Self::mat_vec(&self.m, &self.t)?, &binomial::<C>(k, 2)?)?;
        Ok(Affine {
            t: scale(&self.t)?,
            u,
            m: self.m.iter().map(|row| scale(row)).collect::<Checked<_>>()?,
        })
    }

    fn commutator(a: &Affine<C>, b: &Affine<C>) -> Checked<Affine<C>> {
        a.then(b)?.then(&a.inverse()?)?.then(&b.inverse()?)
    }
}

/// Words generating the words with zero total `Y_2` translation modulo
/// commutators.
fn translation_kernel_words<C: Coeff>(model: &Model<C>) -> Res<Vec<Word>> {
    let dim = model.lens[0];
    let vectors: Vec<Vec<Int>> = model.polys.iter().map(|p| to_ints(&p[0].constant)).collect();
    let weights = vec![Int::from(1); vectors.len()];
    Ok(kernel_combinations(dim, &vectors, &weights)?
        .into_iter()
        .map(|combo| {
            let mut w = Word::default();
            for (m, e) in combo {
                w.push(m, e);
            }
            w
        })
        .collect())
}

fn commutator_words(moves: usize) -> Vec<Word> {
    let mut out = Vec::new();
    for a in 0..moves {
        for b in a + 1..moves {
            out.push(Word::commutator(&Word::letter(a, 1), &Word::letter(b, 1)));
        }
    }
    out
}

struct Search<'a, C> {
    layout: &'a Layout,
    moves: &'a [(usize, usize)],
    model: &'a Model<C>,
}

impl<C: Coeff> Search<'_, C> {
    /// Candidates for step `s` at coordinates `flat`, with their translation
    /// of block `s`.
    fn candidates(&self, s: usize, flat: &[i64]) -> Res<Vec<(Word, Vec<Int>)>> {
        let p0 = point_of::<C>(self.layout, flat);
        match s {
            2 => Ok(self
                .model
                .polys
                .iter()
                .enumerate()
                .map(|(m, p)| (Word::letter(m, 1), to_ints(&p[0].constant)))
                .collect()),
            3 => {
                let mut words = translation_kernel_words(self.model)?;
                words.extend(commutator_words(self.moves.len()));
                words
                    .into_iter()
                    .map(|w| {
                        let end = self.model.simulate(&w, &p0)?;
                        if end[0] != p0[0] {
                            return Err(internal("stabilizer word moved block 2"));
                        }
                        let t = to_ints(&sub_vec(&end[1], &p0[1])?);
                        Ok((w, t))
                    })
                    .collect()
            }
            4 => self.step4_candidates(&p0),
            _ => Err(internal(format!("no step {s}"))),
        }
    }

    fn step4_candidates(&self, p0: &Point<C>) -> Res<Vec<(Word, Vec<Int>)>> {
        let kernel = translation_kernel_words(self.model)?;
        let k2 = kernel.len();
        let mut words = kernel;
        words.extend(commutator_words(self.moves.len()));
        let y3_mats: Vec<Vec<Vec<C>>> = (0..self.moves.len()).map(|m| self.model.y3_matrix(m)).collect();
        let (l3, l4) = (self.model.lens[1], self.model.lens[2]);
        let affine = words
            .iter()
            .map(|w| {
                let end = self.model.simulate(w, p0)?;
                if end[0] != p0[0] {
                    return Err(internal("stabilizer word moved block 2"));
                }
                let mut m = vec![vec![C::zero(); l3]; l4];
                for (mv, &k) in w.counts(self.moves.len()).iter().enumerate() {
                    if k != 0 {
                        let kc = C::from_i64(k);
                        for (row, src) in m.iter_mut().zip(&y3_mats[mv]) {
                            add_scaled(row, src, &kc)?;
                        }
                    }
                }
                Ok(Affine {
                    t: sub_vec(&end[1], &p0[1])?,
                    u: sub_vec(&end[2], &p0[2])?,
                    m,
                })
            })
            .collect::<Res<Vec<Affine<C>>>>()?;

        let mut out = Vec::new();
        // words whose Y_3 translation cancels
        let t_vectors: Vec<Vec<Int>> = affine.iter().map(|a| to_ints(&a.t)).collect();
        let weights: Vec<Int> = words.iter().map(|w| Int::from(w.runs().max(1))).collect();
        let combos = kernel_combinations(l3, &t_vectors, &weights)?;
        for combo in combos {
            let mut acc: Option<Affine<C>> = None;
            for &(g, e) in &combo {
                let p = affine[g].pow(e)?;
                acc = Some(match acc {
                    None => p,
                    Some(a) => a.then(&p)?,
                });
            }
            let Some(acc) = acc else { continue };
            if acc.t.iter().any(|x| !x.is_zero()) {
                return Err(internal("kernel combination has nonzero block-3 translation"));
            }
            out.push((combination_word(&combo, &words), to_ints(&acc.u)));
        }
        // commutators of stabilizer generators
        for g in 0..k2 {
            for h in g + 1..words.len() {
                let c = Affine::commutator(&affine[g], &affine[h])?;
                out.push((Word::commutator(&words[g], &words[h]), to_ints(&c.u)));
            }
        }
        // triple commutators of moves
        let pairs = commutator_words(self.moves.len());
        for pw in &pairs {
            for c in 0..self.moves.len() {
                let w = Word::commutator(pw, &Word::letter(c, 1));
                let end = self.model.simulate(&w, p0)?;
                if end[0] != p0[0] || end[1] != p0[1] {
                    return Err(internal("triple commutator moved a lower block"));
                }
                out.push((w, to_ints(&sub_vec(&end[2], &p0[2])?)));
            }
        }
        Ok(out)
    }
}

fn decide_with<C: Coeff>(y: &CanonicalForm, target: &CanonicalForm, trace: &mut Trace) -> Res<Verdict> {
    let n = y.n();
    let layout = Layout::new(n);
    let top = layout.top();
    trace.passes = vec![0; top + 1];
    if top < 2 {
        return Ok(Verdict::LinkHomotopic(Certificate::default()));
    }
    let moves = letter_moves(n);
    let model = Model::<C>::fit(&layout, &moves, y.block(1))?;
    let search = Search {
        layout: &layout,
        moves: &moves,
        model: &model,
    };
    let goal = target.flat();
    let mut flat = y.flat();
    let mut word = Word::default();
    for s in 2..=top {
        let range = layout.range(s);
        let mut passes = 0;
        while flat[range.clone()] != goal[range.clone()] {
            if passes == MAX_PASSES {
                return Err(Fail::Error(DecideError::IterationBound {
                    step: s,
                    passes,
                }));
            }
            if passes > 0 {
                warn!("step {s}: block not matched after pass {passes}, repeating");
            }
            passes += 1;
            trace.passes[s] = passes;
            check_model(&layout, &moves, &model, &flat)?;
            let candidates = search.candidates(s, &flat)?;
            let delta: Vec<Int> = goal[range.clone()]
                .iter()
                .zip(&flat[range.clone()])
                .map(|(a, b)| Int::from(*a) - Int::from(*b))
                .collect();
            let Some(w) = solve_step(&candidates, &delta)? else {
                debug!("step {s}: target outside the reachable lattice");
                return Ok(Verdict::NotLinkHomotopic { step: s });
            };
            let before = flat.clone();
            apply_word_exact(&layout, &moves, &w, &mut flat)?;
            if flat[..range.start] != before[..range.start] {
                return Err(internal(format!("step {s} disturbed an already matched block")));
            }
            debug!("step {s}: applied {} runs", w.runs());
            word.extend(&w);
        }
    }
    if flat != goal {
        return Err(internal("all blocks matched but coordinates differ"));
    }
    let certificate = word
        .0
        .iter()
        .map(|&(m, e)| PartialConj::letter(moves[m].0, moves[m].1, e, n))
        .collect::<stringlink::Result<Vec<_>>>()?;
    Ok(Verdict::LinkHomotopic(Certificate::new(certificate)))
}
