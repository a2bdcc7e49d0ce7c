mod common;

use std::collections::HashMap;

use linkhom::magnus::{self, AlgebraElement, GroupElement, Int, Monomial};
use num_traits::{One, Zero};
use rand::Rng;

fn random_group_element<R: Rng>(rng: &mut R, n: usize, avoid: Option<usize>) -> GroupElement {
    let mut g = GroupElement::identity(n).unwrap();
    for _ in 0..rng.gen_range(1..=6) {
        let i = loop {
            let i = rng.gen_range(1..=n);
            if Some(i) != avoid {
                break i;
            }
        };
        let e = rng.gen_range(-2..=2);
        g = g.mul(&GroupElement::meridian(i, n).unwrap().pow(e)).unwrap();
    }
    g
}

/// Integer polynomials in non-commuting variables where repeated letters are
/// kept; terms of degree above `n` always contain a repeat and are dropped.
type Free = HashMap<Vec<usize>, Int>;

fn free_of(a: &AlgebraElement) -> Free {
    a.terms().map(|(m, c)| (m.letters().to_vec(), c.clone())).collect()
}

fn free_mul(a: &Free, b: &Free, n: usize) -> Free {
    let mut out = Free::new();
    for (u, x) in a {
        for (v, y) in b {
            if u.len() + v.len() > n {
                continue;
            }
            let mut w = u.clone();
            w.extend(v);
            *out.entry(w).or_insert_with(Int::zero) += x * y;
        }
    }
    out
}

fn free_inv(a: &Free, n: usize) -> Free {
    let mut aug = a.clone();
    aug.remove(&Vec::new());
    let neg: Free = aug.iter().map(|(k, v)| (k.clone(), -v)).collect();
    let mut sum: Free = [(Vec::new(), Int::one())].into();
    let mut power = sum.clone();
    for _ in 0..n {
        power = free_mul(&power, &neg, n);
        for (k, v) in &power {
            *sum.entry(k.clone()).or_insert_with(Int::zero) += v;
        }
    }
    sum
}

fn reduce(f: &Free, n: usize) -> AlgebraElement {
    let terms = f.iter().filter(|(k, v)| {
        let mut s = (*k).clone();
        s.sort_unstable();
        s.dedup();
        s.len() == k.len() && !v.is_zero()
    });
    AlgebraElement::from_terms(
        n,
        terms.map(|(k, v)| (Monomial::new(k.clone(), n).unwrap(), v.clone())),
    )
    .unwrap()
}

fn free_substitute(i: usize, w: &GroupElement, a: &AlgebraElement, n: usize) -> AlgebraElement {
    let wf = free_of(w.as_algebra());
    let xi: Free = [(vec![i], Int::one())].into();
    let image_i = free_mul(&free_mul(&wf, &xi, n), &free_inv(&wf, n), n);
    let mut out = Free::new();
    for (m, c) in a.terms() {
        let mut prod: Free = [(Vec::new(), c.clone())].into();
        for &l in m.letters() {
            let image = if l == i { image_i.clone() } else { [(vec![l], Int::one())].into() };
            prod = free_mul(&prod, &image, n);
        }
        for (k, v) in prod {
            *out.entry(k).or_insert_with(Int::zero) += v;
        }
    }
    reduce(&out, n)
}

#[test]
fn group_laws_on_random_elements() {
    let mut rng = common::rng(11);
    for case in 0..200 {
        let n = 2 + case % 4;
        let a = random_group_element(&mut rng, n, None);
        let b = random_group_element(&mut rng, n, None);
        let c = random_group_element(&mut rng, n, None);
        let one = GroupElement::identity(n).unwrap();
        assert_eq!(a.mul(&b).unwrap().mul(&c).unwrap(), a.mul(&b.mul(&c).unwrap()).unwrap());
        assert_eq!(a.mul(&one).unwrap(), a);
        assert_eq!(one.mul(&a).unwrap(), a);
        assert!(a.mul(&a.inv()).unwrap().is_identity());
        assert_eq!(a.mul(&b).unwrap().inv(), b.inv().mul(&a.inv()).unwrap());
    }
}

#[test]
fn substitute_matches_free_algebra_oracle() {
    let mut rng = common::rng(12);
    for case in 0..100 {
        let n = 2 + case % 4;
        let i = rng.gen_range(1..=n);
        let w = random_group_element(&mut rng, n, None);
        let a = random_group_element(&mut rng, n, None).into_algebra();
        let got = magnus::substitute(i, &w, &a).unwrap();
        assert_eq!(got, free_substitute(i, &w, &a, n), "n={n} i={i} w={w} a={a}");
    }
}

#[test]
fn substitute_composes_in_reverse_order_for_conjugators_avoiding_the_variable() {
    let mut rng = common::rng(13);
    for case in 0..100 {
        let n = 2 + case % 4;
        let i = rng.gen_range(1..=n);
        let w1 = random_group_element(&mut rng, n, Some(i));
        let w2 = random_group_element(&mut rng, n, Some(i));
        let a = random_group_element(&mut rng, n, None).into_algebra();
        let lhs = magnus::substitute(i, &w2.mul(&w1).unwrap(), &a).unwrap();
        let inner = magnus::substitute(i, &w2, &a).unwrap();
        assert_eq!(lhs, magnus::substitute(i, &w1, &inner).unwrap());
    }
}

#[test]
fn substitute_keeps_group_like_elements_group_like() {
    let mut rng = common::rng(14);
    for case in 0..50 {
        let n = 2 + case % 4;
        let i = rng.gen_range(1..=n);
        let w = random_group_element(&mut rng, n, None);
        let a = random_group_element(&mut rng, n, None).into_algebra();
        let image = magnus::substitute(i, &w, &a).unwrap();
        assert!(GroupElement::try_from(image).is_ok());
    }
}

#[test]
fn five_variable_monomial_count() {
    let count: usize = (0..=5).map(|k| (5 - k + 1..=5).product::<usize>()).sum();
    assert_eq!(count, 326);
    assert_eq!(magnus::monomial_count(5).unwrap(), count);
    assert_eq!(magnus::all_monomials(5).unwrap().len(), count);
}

#[test]
fn commutator_of_meridians() {
    let x1 = GroupElement::meridian(1, 3).unwrap();
    let x2 = GroupElement::meridian(2, 3).unwrap();
    let c = x1.commutator(&x2).unwrap();
    assert_eq!(c.to_string(), AlgebraElement::parse("1+X1X2-X2X1", 3).unwrap().to_string());
    assert!(x1.commutator(&x1).unwrap().is_identity());
    assert!(x1.commutator(&GroupElement::identity(3).unwrap()).unwrap().is_identity());
}
