//! Coordinate-level evaluation of partial conjugations.
//!
//! Deleting strand `i` splits the string link group, and the kernel of the
//! deletion is identified with `RF(n - 1)` through the longitude `λ_i`
//! taken modulo `x_i`. Generators `G_I` with `i ∈ I` lie in that kernel, the
//! others act on it through the deleted string link. A partial conjugation
//! on strand `i` conjugates `λ_i` and keeps the deleted string link, so it
//! leaves every coordinate not involving `i` alone. It can therefore be
//! evaluated in the Magnus algebra on the remaining `n - 1` letters: read
//! `λ_i` off the coordinates, conjugate it, and solve for the coordinates
//! involving `i` one degree at a time.
//!
//! Reading `λ_i` off the coordinates uses the recursion
//! `λ_i(g h) = φ_g(λ_i(h)) λ_i(g)` modulo `x_i`. For a fixed generator the
//! step `v -> φ_g(v) λ_i(g)` is a unipotent linear map `T_g = 1 + N_g`, so
//! `T_g^y = Σ_k binomial(y, k) N_g^k` for every integer `y`.

use std::sync::OnceLock;

use num_traits::ToPrimitive;

use crate::coeff::{binomial, Checked, Coeff, Overflow};
use crate::magnus::{AlgebraElement, GroupElement, Int, MonomialTable, MAX_N};
use crate::stringlink::generator_table;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum FiberError {
    Overflow,
    /// The degree-by-degree solve did not reproduce the target longitude.
    Mismatch,
}

impl From<Overflow> for FiberError {
    fn from(_: Overflow) -> Self {
        FiberError::Overflow
    }
}

/// Sparse `N_g`, entries sorted by the degree of their row.
struct Op {
    entries: Vec<(u16, u16, i64)>,
    // end[d]: number of entries whose row has degree <= d
    end: Vec<usize>,
}

/// Data for solving the coordinates of one degree.
struct Level {
    words: Vec<u16>,
    positions: Vec<usize>,
    inverse: Vec<Vec<i64>>,
}

/// Precomputed tables for strand `i` of `n`-strand string links.
pub(crate) struct StrandData {
    n: usize,
    i: usize,
    m: usize,
    dim: usize,
    // product triples (a, b, a.b) sorted by degree of a.b, with prefix ends
    mul: Vec<(u16, u16, u16)>,
    mul_end: Vec<usize>,
    ops: Vec<Op>,
    levels: Vec<Level>,
}

fn local_letter(i: usize, global: usize) -> u8 {
    (if global < i { global } else { global - 1 }) as u8
}

fn global_letter(i: usize, local: u8) -> usize {
    let l = local as usize;
    if l < i {
        l
    } else {
        l + 1
    }
}

impl StrandData {
    pub(crate) fn get(n: usize, i: usize) -> &'static StrandData {
        static TABLES: OnceLock<Vec<Vec<OnceLock<StrandData>>>> = OnceLock::new();
        let tables = TABLES.get_or_init(|| {
            (0..=MAX_N)
                .map(|n| (0..=n).map(|_| OnceLock::new()).collect())
                .collect()
        });
        assert!((2..=MAX_N).contains(&n) && (1..=n).contains(&i));
        tables[n][i].get_or_init(|| StrandData::build(n, i))
    }

    fn build(n: usize, i: usize) -> StrandData {
        let m = n - 1;
        let local = MonomialTable::get(m);
        let global = MonomialTable::get(n);
        let dim = local.len();
        let degree = |u: u16| local.word(u).len();

        let mut mul = Vec::new();
        for a in 0..dim as u16 {
            for b in 0..dim as u16 {
                if local.mask(a) & local.mask(b) == 0 {
                    mul.push((a, b, local.mul_index(a, b)));
                }
            }
        }
        mul.sort_by_key(|&(_, _, c)| (degree(c), c));
        let mul_end = (0..=m)
            .map(|d| mul.iter().filter(|t| degree(t.2) <= d).count())
            .collect();

        let to_local = |a: &AlgebraElement| -> Vec<i64> {
            let mut v = vec![0i64; dim];
            for (u, c) in a.raw_terms() {
                let letters: Vec<u8> = global
                    .word(*u)
                    .iter()
                    .map(|&l| local_letter(i, l as usize))
                    .collect();
                let idx = local.index_of(&letters).expect("x_i-free monomial");
                v[idx as usize] = c.to_i64().expect("generator data fits in 64 bits");
            }
            v
        };
        let global_index = |u: u16| -> u16 {
            let letters: Vec<u8> = local
                .word(u)
                .iter()
                .map(|&l| global_letter(i, l) as u8)
                .collect();
            global.index_of(&letters).expect("valid word")
        };

        let table = generator_table(n).expect("valid n");
        let mut ops = Vec::with_capacity(table.len());
        let mut longitudes = Vec::with_capacity(table.len());
        for g in table {
            let f = to_local(g.link.longitude(i).as_algebra());
            let involving = g.index.entries().contains(&i);
            let phi = g.link.induced_map();
            let mut entries = Vec::new();
            for col in 0..dim as u16 {
                let image = if involving {
                    let mut v = vec![0i64; dim];
                    v[col as usize] = 1;
                    v
                } else {
                    to_local(&phi.image_of_monomial(global_index(col)).kill_variable(i))
                };
                let mut t = vec![0i64; dim];
                for &(a, b, c) in &mul {
                    if image[a as usize] != 0 && f[b as usize] != 0 {
                        t[c as usize] += image[a as usize] * f[b as usize];
                    }
                }
                t[col as usize] -= 1;
                for (row, &val) in t.iter().enumerate() {
                    if val != 0 {
                        assert!(degree(row as u16) > degree(col), "N_g must raise degree");
                        entries.push((row as u16, col, val));
                    }
                }
            }
            entries.sort_by_key(|&(r, c, _)| (degree(r), r, c));
            let end = (0..=m)
                .map(|d| entries.iter().filter(|e| degree(e.0) <= d).count())
                .collect();
            ops.push(Op { entries, end });
            longitudes.push((involving, g.index.len() - 1, f));
        }

        let mut levels = Vec::with_capacity(m);
        for d in 1..=m {
            let words: Vec<u16> = (0..dim as u16)
                .filter(|&u| {
                    let w = local.word(u);
                    w.len() == d && w.iter().all(|&l| l >= w[0])
                })
                .collect();
            let positions: Vec<usize> = longitudes
                .iter()
                .enumerate()
                .filter(|(_, (inv, deg, _))| *inv && *deg == d)
                .map(|(k, _)| k)
                .collect();
            assert_eq!(words.len(), positions.len(), "degree {d} level is not square");
            let matrix: Vec<Vec<i64>> = words
                .iter()
                .map(|&w| positions.iter().map(|&k| longitudes[k].2[w as usize]).collect())
                .collect();
            let inverse = unimodular_inverse(&matrix)
                .unwrap_or_else(|| panic!("degree {d} leading terms of strand {i} are not unimodular"));
            levels.push(Level {
                words,
                positions,
                inverse,
            });
        }

        StrandData {
            n,
            i,
            m,
            dim,
            mul,
            mul_end,
            ops,
            levels,
        }
    }

    /// Product in the Magnus algebra on `n - 1` letters, truncated above
    /// degree `dmax`.
    fn product<C: Coeff>(&self, a: &[C], b: &[C], dmax: usize) -> Checked<Vec<C>> {
        let mut out = vec![C::zero(); self.dim];
        for &(x, y, z) in &self.mul[..self.mul_end[dmax]] {
            let (p, q) = (&a[x as usize], &b[y as usize]);
            if !p.is_zero() && !q.is_zero() {
                out[z as usize].add_mul(p, q)?;
            }
        }
        Ok(out)
    }

    /// `v <- T_k^y v`, truncated above degree `dmax`.
    fn apply_power<C: Coeff>(&self, k: usize, y: i64, v: &mut Vec<C>, dmax: usize) -> Checked<()> {
        let op = &self.ops[k];
        let entries = &op.entries[..op.end[dmax]];
        if y == 0 || entries.is_empty() {
            return Ok(());
        }
        let mut term = v.clone();
        for j in 1..=dmax {
            let mut next = vec![C::zero(); self.dim];
            let mut any = false;
            for &(r, c, val) in entries {
                let t = &term[c as usize];
                if !t.is_zero() {
                    next[r as usize].add_mul(&C::from_i64(val), t)?;
                    any = true;
                }
            }
            if !any {
                break;
            }
            let b: C = binomial(y, j)?;
            for (slot, x) in v.iter_mut().zip(&next) {
                if !x.is_zero() {
                    slot.add_mul(&b, x)?;
                }
            }
            term = next;
        }
        Ok(())
    }

    /// `λ_i` modulo `x_i` of the string link with flat coordinates `y`, as a
    /// dense vector over the monomials on `n - 1` letters, truncated above
    /// degree `dmax`.
    pub(crate) fn longitude<C: Coeff>(&self, y: &[i64], dmax: usize) -> Checked<Vec<C>> {
        let mut v = vec![C::zero(); self.dim];
        v[0] = C::one();
        for k in (0..self.ops.len()).rev() {
            self.apply_power(k, y[k], &mut v, dmax)?;
        }
        Ok(v)
    }

    /// Dense local image of a group element, with `x_i` killed.
    pub(crate) fn local_group<C: Coeff>(&self, w: &GroupElement) -> Checked<Vec<C>> {
        let global = MonomialTable::get(self.n);
        let local = MonomialTable::get(self.m);
        let mut v = vec![C::zero(); self.dim];
        for (u, c) in w.kill_variable(self.i).as_algebra().raw_terms() {
            let letters: Vec<u8> = global
                .word(*u)
                .iter()
                .map(|&l| local_letter(self.i, l as usize))
                .collect();
            v[local.index_of(&letters).expect("x_i-free monomial") as usize] = C::from_int(c)?;
        }
        Ok(v)
    }

    /// `w^-1 v w`.
    pub(crate) fn conjugate<C: Coeff>(&self, v: &[C], w: &[C], w_inv: &[C]) -> Checked<Vec<C>> {
        let left = self.product(w_inv, v, self.m)?;
        self.product(&left, w, self.m)
    }

    /// Overwrites the coordinates involving strand `i` in `y` so that the
    /// resulting string link has longitude `target`, keeping all other
    /// coordinates.
    pub(crate) fn solve<C: Coeff>(&self, target: &[C], y: &mut [i64]) -> Result<(), FiberError> {
        for (d0, level) in self.levels.iter().enumerate() {
            for later in &self.levels[d0..] {
                for &p in &later.positions {
                    y[p] = 0;
                }
            }
            let d = d0 + 1;
            let current: Vec<C> = self.longitude(y, d)?;
            let residual = level
                .words
                .iter()
                .map(|&w| target[w as usize].sub(&current[w as usize]))
                .collect::<Checked<Vec<C>>>()?;
            for (row, &p) in level.inverse.iter().zip(&level.positions) {
                let mut acc = C::zero();
                for (a, r) in row.iter().zip(&residual) {
                    if *a != 0 && !r.is_zero() {
                        acc.add_mul(&C::from_i64(*a), r)?;
                    }
                }
                y[p] = acc.as_i64()?;
            }
        }
        let check: Vec<C> = self.longitude(y, self.m)?;
        if check.as_slice() == target {
            Ok(())
        } else {
            Err(FiberError::Mismatch)
        }
    }

    pub(crate) fn letters(&self) -> usize {
        self.m
    }
}

/// Integer μ of every non-repeating sequence of length at least two, read
/// from flat coordinates: `μ(j_1 .. j_k i)` is a coefficient of `λ_i` modulo
/// `x_i`. Entries are `(sequence, value)` with the sequence as strand numbers.
pub(crate) fn mu_from_coordinates<C: Coeff>(n: usize, y: &[i64]) -> Checked<Vec<(Vec<usize>, Int)>> {
    let local = MonomialTable::get(n - 1);
    let mut out = Vec::new();
    for i in 1..=n {
        let data = StrandData::get(n, i);
        let v: Vec<C> = data.longitude(y, data.m)?;
        for (u, c) in v.iter().enumerate().skip(1) {
            let mut seq: Vec<usize> = local
                .word(u as u16)
                .iter()
                .map(|&l| global_letter(i, l))
                .collect();
            seq.push(i);
            out.push((seq, c.to_int()));
        }
    }
    Ok(out)
}

/// Inverse of a square integer matrix with determinant ±1, or `None`.
pub(crate) fn unimodular_inverse(a: &[Vec<i64>]) -> Option<Vec<Vec<i64>>> {
    let k = a.len();
    let mut m: Vec<Vec<i128>> = a.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut inv: Vec<Vec<i128>> = (0..k)
        .map(|r| (0..k).map(|c| i128::from(r == c)).collect())
        .collect();
    for col in 0..k {
        loop {
            let pivot = (col..k)
                .filter(|&r| m[r][col] != 0)
                .min_by_key(|&r| m[r][col].abs())?;
            m.swap(col, pivot);
            inv.swap(col, pivot);
            let mut done = true;
            for r in 0..k {
                if r != col && m[r][col] != 0 {
                    let q = m[r][col].div_euclid(m[col][col]);
                    if q != 0 {
                        for c in 0..k {
                            m[r][c] -= q * m[col][c];
                            inv[r][c] -= q * inv[col][c];
                        }
                    }
                    if r > col && m[r][col] != 0 {
                        done = false;
                    }
                }
            }
            if done {
                break;
            }
        }
        if m[col][col].abs() != 1 {
            return None;
        }
        if m[col][col] < 0 {
            for c in 0..k {
                m[col][c] = -m[col][c];
                inv[col][c] = -inv[col][c];
            }
        }
    }
    // rows above the pivots may still hold entries from earlier columns
    for col in (0..k).rev() {
        for r in 0..k {
            if r != col && m[r][col] != 0 {
                let q = m[r][col];
                for c in 0..k {
                    m[r][c] -= q * m[col][c];
                    inv[r][c] -= q * inv[col][c];
                }
            }
        }
    }
    inv.into_iter()
        .map(|r| r.into_iter().map(|x| i64::try_from(x).ok()).collect())
        .collect()
}
