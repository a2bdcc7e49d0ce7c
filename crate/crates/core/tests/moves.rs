mod common;

use common::*;
use linkhom::decide;
use linkhom::indexing::{self, CanonicalForm};
use linkhom::lattice::in_lattice;
use linkhom::magnus::{GroupElement, Int};
use linkhom::moves::{self, Displacement, PartialConj, PcConvention};
use linkhom::stringlink::{self, StringLink, StringLinkError};
use rand::Rng;

fn ints(v: &[i64]) -> Vec<Int> {
    v.iter().map(|&x| Int::from(x)).collect()
}

#[test]
fn elementary_move_set() {
    assert_eq!(moves::elementary_moves(4).unwrap().len(), 24);
    assert_eq!(moves::elementary_moves(5).unwrap().len(), 40);
    for n in 2..=5 {
        for m in moves::elementary_moves(n).unwrap() {
            let (j, k) = m.meridian_power().unwrap();
            assert_ne!(j, m.component());
            assert_eq!(k.abs(), 1);
        }
    }
}

#[test]
fn trivial_conjugator_does_nothing() {
    let y = figure4();
    let sl = stringlink::from_canonical(&y).unwrap();
    let pc = PartialConj::new(2, GroupElement::identity(4).unwrap()).unwrap();
    assert_eq!(moves::pc_apply(&pc, &sl).unwrap(), sl);
    assert!(moves::pc_displacement(&pc, &y).unwrap().is_zero());
}

#[test]
fn hopf_string_link() {
    let x1 = GroupElement::meridian(1, 2).unwrap();
    let x2 = GroupElement::meridian(2, 2).unwrap();
    let hopf = StringLink::from_longitudes(vec![x2.clone(), x1.clone()]).unwrap();
    let moved = moves::pc_apply(&PartialConj::letter(1, 2, 1, 2).unwrap(), &hopf).unwrap();
    let conj = x2.mul(&x1).unwrap().mul(&x2.inv()).unwrap();
    let expected = StringLink::from_longitudes(vec![x2, conj]).unwrap();
    assert_eq!(moved, expected);
    assert!(moved.is_realizable());
    assert_eq!(moved.mu(&"12".parse().unwrap()).unwrap(), Int::from(1));
}

#[test]
fn coordinate_engine_matches_string_links() {
    let mut rng = rng(41);
    for (n, samples) in [(2, 10), (3, 20), (4, 10), (5, 3)] {
        let all = moves::elementary_moves(n).unwrap();
        for _ in 0..samples {
            let y = random_form(&mut rng, n, 3);
            let sl = stringlink::from_canonical(&y).unwrap();
            for _ in 0..3 {
                let m = &all[rng.gen_range(0..all.len())];
                let m = m.pow(rng.gen_range(1..=3));
                let moved = moves::pc_apply(&m, &sl).unwrap();
                assert!(moved.is_realizable());
                let via_links = stringlink::to_canonical(&moved).unwrap();
                assert_eq!(moves::pc_coords(&m, &y).unwrap(), via_links);
                assert_eq!(via_links.block(1), y.block(1));
            }
        }
    }
}

#[test]
fn longer_conjugators_match_string_links() {
    let mut rng = rng(42);
    for n in [3, 4] {
        for _ in 0..10 {
            let y = random_form(&mut rng, n, 2);
            let i = rng.gen_range(1..=n);
            let mut w = GroupElement::identity(n).unwrap();
            for _ in 0..3 {
                let j = rng.gen_range(1..=n);
                w = w.mul(&GroupElement::meridian(j, n).unwrap().pow(rng.gen_range(-2..=2))).unwrap();
            }
            let pc = PartialConj::new(i, w).unwrap();
            let sl = stringlink::from_canonical(&y).unwrap();
            let via_links = stringlink::to_canonical(&moves::pc_apply(&pc, &sl).unwrap()).unwrap();
            assert_eq!(moves::pc_coords(&pc, &y).unwrap(), via_links);
        }
    }
}

#[test]
fn moves_fix_linking_numbers() {
    let mut rng = rng(43);
    for n in [4, 5] {
        let all = moves::elementary_moves(n).unwrap();
        for _ in 0..50 {
            let y = random_form(&mut rng, n, 5);
            for m in &all {
                let d = moves::pc_displacement(m, &y).unwrap();
                assert!(d.block(1).iter().all(|&x| x == 0));
            }
        }
    }
}

#[test]
fn inverse_and_power_moves() {
    let mut rng = rng(44);
    for n in [3, 4, 5] {
        let all = moves::elementary_moves(n).unwrap();
        for _ in 0..10 {
            let y = random_form(&mut rng, n, 3);
            let m = &all[rng.gen_range(0..all.len())];
            let there = moves::pc_coords(m, &y).unwrap();
            assert_eq!(moves::pc_coords(&m.inverse(), &there).unwrap(), y);
            let k: i64 = rng.gen_range(-4..=4);
            let mut step = y.clone();
            let unit = if k < 0 { m.inverse() } else { m.clone() };
            for _ in 0..k.unsigned_abs() {
                step = moves::pc_coords(&unit, &step).unwrap();
            }
            assert_eq!(moves::pc_coords(&m.pow(k), &y).unwrap(), step);
        }
    }
}

/// Positions in `Y_2` of the sequences entering the two linear forms that
/// separate the links of the third example.
fn separating_forms(block: &[i64]) -> (i64, i64) {
    let basis = indexing::basis_indices(5, 3).unwrap();
    let at = |s: &str| {
        let k = basis.iter().position(|b| b.to_string() == s).unwrap();
        block[k]
    };
    (
        -at("134") + at("135") - at("145") + at("345"),
        -at("234") + at("235") - at("245") + at("345"),
    )
}

#[test]
fn separating_forms_are_invariant() {
    let (l, lp) = example3();
    assert_eq!(separating_forms(l.block(2)), (0, 0));
    assert_eq!(separating_forms(lp.block(2)), (-1, -1));
    let mut rng = rng(45);
    let mut bases = vec![l];
    for _ in 0..10 {
        let mut y = random_form(&mut rng, 5, 3);
        *y.block_mut(1) = vec![1; 10];
        bases.push(y);
    }
    for y in &bases {
        for m in moves::elementary_moves(5).unwrap() {
            let d = moves::pc_displacement(&m, y).unwrap();
            assert_eq!(separating_forms(d.block(2)), (0, 0), "{m:?}");
        }
    }
}

#[test]
fn some_move_changes_degree_three_on_example2() {
    let l = example2().0;
    let moved = moves::elementary_moves(5)
        .unwrap()
        .iter()
        .any(|m| moves::pc_displacement(m, &l).unwrap().block(3).iter().any(|&x| x != 0));
    assert!(moved);
}

#[test]
fn rebasing_conventions_leave_realizable_string_links() {
    let y = CanonicalForm::from_flat(4, &[1, 1, 1, 1, 1, 1, 0, 0, 0, 0, 0, 0]).unwrap();
    let sl = stringlink::from_canonical(&y).unwrap();
    for convention in [PcConvention::RebaseConjugateOwn, PcConvention::RebaseKeepOwn] {
        let failures = moves::elementary_moves(4)
            .unwrap()
            .iter()
            .filter(|m| {
                matches!(
                    moves::pc_apply_with(m, &sl, convention),
                    Err(StringLinkError::NotRealizable)
                )
            })
            .count();
        assert!(failures > 0, "{convention:?}");
    }
    for m in moves::elementary_moves(4).unwrap() {
        assert!(moves::pc_apply_with(&m, &sl, PcConvention::Kernel).unwrap().is_realizable());
    }
}

#[test]
fn global_conjugation_is_generated_by_partial_conjugations() {
    let mut rng = rng(46);
    for n in [3, 4, 5] {
        let all = moves::elementary_moves(n).unwrap();
        for _ in 0..5 {
            let y = random_form(&mut rng, n, 2);
            let tau = stringlink::from_canonical(&random_form(&mut rng, n, 1)).unwrap();
            let sl = stringlink::from_canonical(&y).unwrap();
            let z = stringlink::to_canonical(&tau.compose(&sl).unwrap().compose(&tau.inverse()).unwrap()).unwrap();
            let d = Displacement::between(&y, &z).unwrap();
            // the lowest changed block is a lattice combination of the move
            // displacements that leave the blocks below it alone
            if let Some(b) = (1..n).find(|&b| d.block(b).iter().any(|&x| x != 0)) {
                let gens: Vec<Vec<Int>> = all
                    .iter()
                    .map(|m| moves::pc_displacement(m, &y).unwrap())
                    .filter(|e| (1..b).all(|c| e.block(c).iter().all(|&x| x == 0)))
                    .map(|e| ints(e.block(b)))
                    .collect();
                assert!(in_lattice(&ints(d.block(b)), &gens), "n={n} block {b}");
            }
            let v = decide::decide(&y, &z).unwrap();
            assert!(decide::verify_certificate(&y, &z, v.certificate().unwrap()));
        }
    }
}

#[test]
fn partial_conjugation_serialization() {
    let m = PartialConj::letter(3, 2, -1, 4).unwrap();
    let json = serde_json::to_value(&m).unwrap();
    assert_eq!(json, serde_json::json!({"component": 3, "conjugator": "x2^-1"}));
    let back = PartialConj::parse(3, "x2^-1", 4).unwrap();
    assert_eq!(back, m);
    let id = PartialConj::parse(1, "1", 4).unwrap();
    assert_eq!(serde_json::to_value(&id).unwrap()["conjugator"], "1");
}
