mod common;

use common::*;
use linkhom::indexing::{self, IndexSequence};
use linkhom::magnus::Int;
use linkhom::stringlink::{self, StringLink};
use rand::Rng;

fn idx(s: &str) -> IndexSequence {
    s.parse().unwrap()
}

fn mu(sl: &StringLink, s: &str) -> Int {
    sl.mu(&idx(s)).unwrap()
}

#[test]
fn elementary_linking() {
    let a = stringlink::elementary(1, 2, 2).unwrap();
    assert_eq!(mu(&a, "12"), Int::from(1));
    assert!(a.is_realizable());
    assert_eq!(mu(&stringlink::elementary(1, 2, 5).unwrap(), "13"), Int::from(0));
    assert!(stringlink::elementary(2, 2, 3).is_err());
}

#[test]
fn generator_examples() {
    let g = stringlink::generator(&idx("123"), 4).unwrap();
    assert_eq!(mu(&g, "123"), Int::from(1));
    assert_eq!(mu(&g, "12"), Int::from(0));
    let g = stringlink::generator(&idx("1234"), 4).unwrap();
    assert_eq!(mu(&g, "1324"), Int::from(0));
    assert!(stringlink::generator(&idx("213"), 4).is_err());
}

#[test]
fn compose_examples() {
    let g = stringlink::generator(&idx("12"), 4).unwrap();
    let t = StringLink::trivial(4).unwrap();
    assert_eq!(t.compose(&g).unwrap(), g);
    assert!(g.compose(&g.inverse()).unwrap().is_trivial());
    assert_eq!(mu(&g.compose(&g).unwrap(), "12"), Int::from(2));
}

#[test]
fn mu_of_canonical_examples() {
    let t = StringLink::trivial(5).unwrap();
    for s in indexing::all_sequences(5) {
        assert_eq!(t.mu(&s).unwrap(), Int::from(0));
    }
    let l1 = stringlink::from_canonical(&example1().0).unwrap();
    assert_eq!(mu(&l1, "12"), Int::from(1));
    let l2 = stringlink::from_canonical(&example2().0).unwrap();
    assert_eq!(mu(&l2, "123"), Int::from(1));
    let f4 = stringlink::from_canonical(&figure4()).unwrap();
    assert_eq!(mu(&f4, "12"), Int::from(-2));
}

#[test]
fn canonical_examples() {
    let z = indexing::CanonicalForm::zero(4).unwrap();
    assert!(stringlink::from_canonical(&z).unwrap().is_trivial());
    assert_eq!(stringlink::to_canonical(&StringLink::trivial(4).unwrap()).unwrap(), z);
    let y = stringlink::to_canonical(&stringlink::generator(&idx("1324"), 4).unwrap()).unwrap();
    for (i, v) in y.entries() {
        assert_eq!(v, i64::from(i == idx("1324")), "{i}");
    }
}

#[test]
fn lowest_degree_is_additive() {
    let mut rng = rng(21);
    for n in [4, 5] {
        for _ in 0..20 {
            let (a, b) = (random_form(&mut rng, n, 3), random_form(&mut rng, n, 3));
            let ab = stringlink::from_canonical(&a)
                .unwrap()
                .compose(&stringlink::from_canonical(&b).unwrap())
                .unwrap();
            assert!(ab.is_realizable());
            let y = stringlink::to_canonical(&ab).unwrap();
            let sum: Vec<i64> = a.block(1).iter().zip(b.block(1)).map(|(x, z)| x + z).collect();
            assert_eq!(y.block(1), &sum[..]);
        }
    }
}

#[test]
fn group_laws_on_random_links() {
    let mut rng = rng(22);
    for n in [3, 4, 5] {
        for _ in 0..10 {
            let [a, b, c] = [0, 1, 2].map(|_| stringlink::from_canonical(&random_form(&mut rng, n, 2)).unwrap());
            let left = a.compose(&b).unwrap().compose(&c).unwrap();
            let right = a.compose(&b.compose(&c).unwrap()).unwrap();
            assert_eq!(left, right);
            assert!(a.compose(&a.inverse()).unwrap().is_trivial());
            assert!(a.inverse().compose(&a).unwrap().is_trivial());
            let k: i64 = rng.gen_range(-3..=3);
            let mut p = StringLink::trivial(n).unwrap();
            for _ in 0..k.unsigned_abs() {
                p = p.compose(&if k < 0 { a.inverse() } else { a.clone() }).unwrap();
            }
            assert_eq!(a.pow(k), p);
        }
    }
}

#[test]
fn small_n_roundtrip() {
    let mut rng = rng(23);
    for n in [2, 3] {
        for _ in 0..50 {
            let y = random_form(&mut rng, n, 5);
            let sl = stringlink::from_canonical(&y).unwrap();
            assert!(sl.is_realizable());
            assert_eq!(stringlink::to_canonical(&sl).unwrap(), y);
        }
    }
}

#[test]
fn generators_satisfy_triangularity_for_small_n() {
    for n in [2, 3] {
        let basis = indexing::all_basis_indices(n).unwrap();
        for i in &basis {
            let g = stringlink::generator(i, n).unwrap();
            for j in basis.iter().filter(|j| j.len() <= i.len()) {
                assert_eq!(g.mu(j).unwrap(), Int::from(i64::from(i == j)), "G_{i} at {j}");
            }
        }
    }
}
