//! Exact integer linear algebra: Hermite and Smith normal forms, integer
//! solutions of `A x = b`, and lattice membership.

use std::fmt;

use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::magnus::Int;

/// Dense integer matrix in row-major order.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Int>,
}

impl fmt::Debug for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "IntMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = self.row(r).iter().map(|x| x.to_string()).collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl IntMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![Int::zero(); rows * cols],
        }
    }

    pub fn identity(k: usize) -> Self {
        let mut m = IntMatrix::zeros(k, k);
        for i in 0..k {
            m[(i, i)] = Int::one();
        }
        m
    }

    /// Builds a matrix from rows of equal length.
    ///
    /// # Panics
    /// If the rows have different lengths.
    pub fn from_rows(rows: Vec<Vec<Int>>) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        assert!(rows.iter().all(|row| row.len() == c), "ragged matrix rows");
        IntMatrix {
            rows: r,
            cols: c,
            data: rows.into_iter().flatten().collect(),
        }
    }

    pub fn from_i64_rows(rows: &[Vec<i64>]) -> Self {
        IntMatrix::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Int::from(x)).collect())
                .collect(),
        )
    }

    /// Matrix whose columns are the given vectors, all of length `rows`.
    pub fn from_columns(rows: usize, columns: &[Vec<Int>]) -> Self {
        let mut m = IntMatrix::zeros(rows, columns.len());
        for (j, col) in columns.iter().enumerate() {
            assert_eq!(col.len(), rows, "column length mismatch");
            for (i, x) in col.iter().enumerate() {
                m[(i, j)] = x.clone();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[Int] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<Int> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn mul(&self, other: &IntMatrix) -> IntMatrix {
        assert_eq!(self.cols, other.rows, "dimension mismatch in product");
        let mut out = IntMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn mul_vec(&self, x: &[Int]) -> Vec<Int> {
        assert_eq!(self.cols, x.len(), "dimension mismatch in product");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .filter(|(a, b)| !a.is_zero() && !b.is_zero())
                    .fold(Int::zero(), |acc, (a, b)| acc + a * b)
            })
            .collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    /// Determinant by fraction-free (Bareiss) elimination.
    ///
    /// # Panics
    /// If the matrix is not square.
    pub fn determinant(&self) -> Int {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let k = self.rows;
        if k == 0 {
            return Int::one();
        }
        let mut m = self.clone();
        let mut sign = Int::one();
        let mut prev = Int::one();
        for p in 0..k {
            if m[(p, p)].is_zero() {
                match (p + 1..k).find(|&r| !m[(r, p)].is_zero()) {
                    Some(r) => {
                        m.swap_rows(p, r);
                        sign = -sign;
                    }
                    None => return Int::zero(),
                }
            }
            for i in p + 1..k {
                for j in p + 1..k {
                    let v = &m[(i, j)] * &m[(p, p)] - &m[(i, p)] * &m[(p, j)];
                    m[(i, j)] = v / &prev;
                }
            }
            prev = m[(p, p)].clone();
        }
        sign * &m[(k - 1, k - 1)]
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for c in 0..self.cols {
                self.data.swap(a * self.cols + c, b * self.cols + c);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for r in 0..self.rows {
                self.data.swap(r * self.cols + a, r * self.cols + b);
            }
        }
    }

    /// `col[dst] -= q * col[src]`.
    fn sub_col(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for r in 0..self.rows {
            let s = self[(r, src)].clone();
            if !s.is_zero() {
                self[(r, dst)] -= q * s;
            }
        }
    }

    fn negate_col(&mut self, c: usize) {
        for r in 0..self.rows {
            let v = -std::mem::take(&mut self[(r, c)]);
            self[(r, c)] = v;
        }
    }

    /// `row[dst] -= q * row[src]`.
    fn sub_row(&mut self, dst: usize, src: usize, q: &Int) {
        if q.is_zero() {
            return;
        }
        for c in 0..self.cols {
            let s = self[(src, c)].clone();
            if !s.is_zero() {
                self[(dst, c)] -= q * s;
            }
        }
    }
}

impl std::ops::Index<(usize, usize)> for IntMatrix {
    type Output = Int;
    fn index(&self, (r, c): (usize, usize)) -> &Int {
        &self.data[r * self.cols + c]
    }
}

impl std::ops::IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Int {
        &mut self.data[r * self.cols + c]
    }
}

/// Column Hermite normal form `A U = H`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HnfResult {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// `(row, column)` of each pivot; pivot columns are `0..rank`.
    pub pivots: Vec<(usize, usize)>,
}

impl HnfResult {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Column-style Hermite normal form.
///
/// Column `k` of `H` is the `k`-th pivot column; its first nonzero entry is
/// positive, sits in a strictly lower row than the previous pivot, and the
/// entries to its left in that row lie in `[0, pivot)`. Columns past the
/// rank are zero. Pivoting picks the entry of smallest absolute value.
pub fn hnf(a: &IntMatrix) -> HnfResult {
    let mut h = a.clone();
    let mut u = IntMatrix::identity(a.cols);
    let mut pivots = Vec::new();
    let mut r = 0;
    for row in 0..h.rows {
        if r == h.cols {
            break;
        }
        loop {
            let best = (r..h.cols)
                .filter(|&c| !h[(row, c)].is_zero())
                .min_by(|&x, &y| h[(row, x)].abs().cmp(&h[(row, y)].abs()));
            let Some(best) = best else { break };
            h.swap_cols(r, best);
            u.swap_cols(r, best);
            let mut done = true;
            for c in r + 1..h.cols {
                if h[(row, c)].is_zero() {
                    continue;
                }
                let q = h[(row, c)].div_floor(&h[(row, r)]);
                h.sub_col(c, r, &q);
                u.sub_col(c, r, &q);
                if !h[(row, c)].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if h[(row, r)].is_zero() {
            continue;
        }
        if h[(row, r)].is_negative() {
            h.negate_col(r);
            u.negate_col(r);
        }
        for c in 0..r {
            let q = h[(row, c)].div_floor(&h[(row, r)]);
            h.sub_col(c, r, &q);
            u.sub_col(c, r, &q);
        }
        pivots.push((row, r));
        r += 1;
    }
    HnfResult { h, u, pivots }
}

/// A particular integer solution and generators of the integer null space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IntegerSolution {
    pub particular: Vec<Int>,
    pub null_basis: Vec<Vec<Int>>,
}

/// Solves `A x = b` over the integers.
///
/// # Panics
/// If `b` does not have one entry per row of `A`.
pub fn solve_integer(a: &IntMatrix, b: &[Int]) -> Option<IntegerSolution> {
    assert_eq!(a.rows(), b.len(), "right-hand side length mismatch");
    let res = hnf(a);
    let rank = res.rank();
    let mut z = vec![Int::zero(); a.cols()];
    let mut next = 0;
    for row in 0..a.rows() {
        let acc = (0..next).fold(Int::zero(), |acc, j| acc + &res.h[(row, j)] * &z[j]);
        let rest = &b[row] - acc;
        if next < rank && res.pivots[next].0 == row {
            let (q, rem) = rest.div_rem(&res.h[(row, next)]);
            if !rem.is_zero() {
                return None;
            }
            z[next] = q;
            next += 1;
        } else if !rest.is_zero() {
            return None;
        }
    }
    let particular = res.u.mul_vec(&z);
    if a.mul_vec(&particular) != b {
        return None;
    }
    let null_basis = (rank..a.cols()).map(|c| res.u.column(c)).collect();
    Some(IntegerSolution {
        particular,
        null_basis,
    })
}

/// Whether `v` is an integer combination of `gens`.
///
/// # Panics
/// If the vectors have different lengths.
pub fn in_lattice(v: &[Int], gens: &[Vec<Int>]) -> bool {
    if v.iter().all(Zero::is_zero) {
        return true;
    }
    if gens.is_empty() {
        return false;
    }
    let a = IntMatrix::from_columns(v.len(), gens);
    match solve_integer(&a, v) {
        Some(_) => true,
        None => smith_membership(&a, v),
    }
}

/// Smith normal form `P A Q = D` with `D` diagonal, each diagonal entry
/// dividing the next, and `P`, `Q` unimodular.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnfResult {
    pub d: IntMatrix,
    pub p: IntMatrix,
    pub q: IntMatrix,
}

pub fn snf(a: &IntMatrix) -> SnfResult {
    let mut d = a.clone();
    let mut p = IntMatrix::identity(a.rows());
    let mut q = IntMatrix::identity(a.cols());
    let k = a.rows().min(a.cols());
    for t in 0..k {
        loop {
            let best = (t..d.rows())
                .flat_map(|r| (t..d.cols()).map(move |c| (r, c)))
                .filter(|&(r, c)| !d[(r, c)].is_zero())
                .min_by(|&x, &y| d[x].abs().cmp(&d[y].abs()));
            let Some((r, c)) = best else {
                return SnfResult { d, p, q };
            };
            d.swap_rows(t, r);
            p.swap_rows(t, r);
            d.swap_cols(t, c);
            q.swap_cols(t, c);
            let mut clean = true;
            for r in t + 1..d.rows() {
                let f = d[(r, t)].div_floor(&d[(t, t)]);
                d.sub_row(r, t, &f);
                p.sub_row(r, t, &f);
                clean &= d[(r, t)].is_zero();
            }
            for c in t + 1..d.cols() {
                let f = d[(t, c)].div_floor(&d[(t, t)]);
                d.sub_col(c, t, &f);
                q.sub_col(c, t, &f);
                clean &= d[(t, c)].is_zero();
            }
            if !clean {
                continue;
            }
            // enforce divisibility of the remaining block by the pivot
            let bad = (t + 1..d.rows())
                .flat_map(|r| (t + 1..d.cols()).map(move |c| (r, c)))
                .find(|&(r, c)| !d[(r, c)].is_multiple_of(&d[(t, t)]));
            match bad {
                Some((r, _)) => {
                    let one = -Int::one();
                    d.sub_row(t, r, &one);
                    p.sub_row(t, r, &one);
                }
                None => break,
            }
        }
        if d[(t, t)].is_negative() {
            for c in 0..d.cols() {
                let v = -std::mem::take(&mut d[(t, c)]);
                d[(t, c)] = v;
            }
            for c in 0..p.cols() {
                let v = -std::mem::take(&mut p[(t, c)]);
                p[(t, c)] = v;
            }
        }
    }
    SnfResult { d, p, q }
}

/// Membership through the Smith form: `A x = v` is solvable iff each entry
/// of `P v` is divisible by the matching diagonal entry (zero rows must
/// vanish).
fn smith_membership(a: &IntMatrix, v: &[Int]) -> bool {
    let s = snf(a);
    let pv = s.p.mul_vec(v);
    pv.iter().enumerate().all(|(i, x)| {
        let diag = if i < s.d.cols() { s.d[(i, i)].clone() } else { Int::zero() };
        if diag.is_zero() {
            x.is_zero()
        } else {
            x.is_multiple_of(&diag)
        }
    })
}
