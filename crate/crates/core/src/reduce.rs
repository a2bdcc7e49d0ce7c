//! Lattice basis reduction used to keep move sequences short.
//!
//! Reduction steps are exact integer operations; floating point only guides
//! which operations to take, so the lattice is never changed.

use num_traits::{ToPrimitive, Zero};

use crate::magnus::Int;

const DELTA: f64 = 0.99;
const MAX_SWAPS: usize = 200_000;
const REFRESH: usize = 64;

fn to_f64(v: &[Int], w: &[f64]) -> Vec<f64> {
    v.iter()
        .zip(w)
        .map(|(x, s)| x.to_f64().unwrap_or(f64::MAX) * s)
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram-Schmidt coefficients `mu` and squared norms `bb`.
fn gram_schmidt(bf: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let n = bf.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    let mut bb = vec![0.0; n];
    for i in 0..n {
        let mut v = bf[i].clone();
        for j in 0..i {
            mu[i][j] = if bb[j] > 0.0 { dot(&bf[i], &star[j]) / bb[j] } else { 0.0 };
            for (x, s) in v.iter_mut().zip(&star[j]) {
                *x -= mu[i][j] * s;
            }
        }
        mu[i][i] = 1.0;
        bb[i] = dot(&v, &v);
        star.push(v);
    }
    (mu, bb)
}

fn sub_scaled(a: &mut [Int], b: &[Int], q: &Int) {
    for (x, y) in a.iter_mut().zip(b) {
        if !y.is_zero() {
            *x -= q * y;
        }
    }
}

/// LLL reduction of `basis` under the norm `Σ w_k x_k^2`. Vectors that
/// become zero are removed.
pub(crate) fn lll(basis: &mut Vec<Vec<Int>>, weights: &[Int]) {
    let w: Vec<f64> = weights
        .iter()
        .map(|x| x.to_f64().unwrap_or(1.0).max(1.0).sqrt())
        .collect();
    basis.retain(|v| v.iter().any(|x| !x.is_zero()));
    let n = basis.len();
    if n < 2 {
        return;
    }
    let mut bf: Vec<Vec<f64>> = basis.iter().map(|v| to_f64(v, &w)).collect();
    let (mut mu, mut bb) = gram_schmidt(&bf);
    let mut k = 1;
    let mut swaps = 0;
    while k < n && swaps < MAX_SWAPS {
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 && q.is_finite() {
                let qi = Int::from(q as i64);
                let (head, tail) = basis.split_at_mut(k);
                sub_scaled(&mut tail[0], &head[j], &qi);
                bf[k] = to_f64(&basis[k], &w);
                for l in 0..=j {
                    mu[k][l] -= q * mu[j][l];
                }
            }
        }
        if bb[k] >= (DELTA - mu[k][k - 1] * mu[k][k - 1]) * bb[k - 1] {
            k += 1;
            continue;
        }
        basis.swap(k, k - 1);
        bf.swap(k, k - 1);
        swaps += 1;
        if swaps % REFRESH == 0 {
            (mu, bb) = gram_schmidt(&bf);
        } else {
            let m = mu[k][k - 1];
            let big = bb[k] + m * m * bb[k - 1];
            if big <= 0.0 {
                (mu, bb) = gram_schmidt(&bf);
            } else {
                mu[k][k - 1] = m * bb[k - 1] / big;
                bb[k] = bb[k - 1] * bb[k] / big;
                bb[k - 1] = big;
                for j in 0..k - 1 {
                    let t = mu[k - 1][j];
                    mu[k - 1][j] = mu[k][j];
                    mu[k][j] = t;
                }
                for i in k + 1..n {
                    let t = mu[i][k];
                    mu[i][k] = mu[i][k - 1] - m * t;
                    mu[i][k - 1] = t + mu[k][k - 1] * mu[i][k];
                }
            }
        }
        k = (k - 1).max(1);
    }
    basis.retain(|v| v.iter().any(|x| !x.is_zero()));
}

/// Moves `x` towards the origin by lattice vectors (nearest plane).
pub(crate) fn nearest_plane(x: &mut [Int], basis: &[Vec<Int>], weights: &[Int]) {
    if basis.is_empty() {
        return;
    }
    let w: Vec<f64> = weights
        .iter()
        .map(|x| x.to_f64().unwrap_or(1.0).max(1.0).sqrt())
        .collect();
    let bf: Vec<Vec<f64>> = basis.iter().map(|v| to_f64(v, &w)).collect();
    let n = bf.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut bb = Vec::with_capacity(n);
    for i in 0..n {
        let mut v = bf[i].clone();
        for j in 0..i {
            let m = if bb[j] > 0.0 { dot(&bf[i], &star[j]) / bb[j] } else { 0.0 };
            for (a, s) in v.iter_mut().zip(&star[j]) {
                *a -= m * s;
            }
        }
        bb.push(dot(&v, &v));
        star.push(v);
    }
    for i in (0..n).rev() {
        if bb[i] <= 0.0 {
            continue;
        }
        let xf = to_f64(x, &w);
        let q = (dot(&xf, &star[i]) / bb[i]).round();
        if q != 0.0 && q.is_finite() {
            sub_scaled(x, &basis[i], &Int::from(q as i64));
        }
    }
}
