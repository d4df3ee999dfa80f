use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use thirdorder::corpus::{ode, SWAP_OF_ZERO};
use thirdorder::invariants::{scalar_invariant, InvariantName};
use thirdorder::prolong::equivalence_residual;
use thirdorder::symkernel::{is_zero_frac, parse_with, Frac, ProbeConfig};
use thirdorder::{prolong, transform_ode, verify_equivalence, Error, MapKind, VariableMap};

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn f(s: &str) -> Frac {
    parse_with(s, &["mu".to_string()].into()).unwrap().to_frac().unwrap()
}

fn fibre_doubling() -> VariableMap {
    VariableMap::fibre(f("2*x"), f("y"), &cfg())
        .unwrap()
        .with_inverse(f("x/2"), f("y"), None, &cfg())
        .unwrap()
}

#[test]
fn identity_prolongs_to_itself() {
    let o = ode("q^3 + x*p").unwrap();
    let pm = prolong(&VariableMap::identity(), &o).unwrap();
    let want = [f("x"), f("y"), f("p"), f("q"), f("q^3 + x*p")];
    for (got, want) in pm.components().into_iter().zip(&want) {
        assert_eq!(got, want);
    }
}

#[test]
fn swap_prolongation() {
    let pm = prolong(&VariableMap::swap(), &ode("0").unwrap()).unwrap();
    let want = [f("y"), f("x"), f("1/p"), f("-q/p^3"), f("3*q^2/p^5")];
    for (got, want) in pm.components().into_iter().zip(&want) {
        assert_eq!(got, want);
    }
}

#[test]
fn fibre_prolongation() {
    let pm = prolong(&fibre_doubling(), &ode("q^3").unwrap()).unwrap();
    let want = [f("2*x"), f("y"), f("p/2"), f("q/4"), f("q^3/8")];
    for (got, want) in pm.components().into_iter().zip(&want) {
        assert_eq!(got, want);
    }
}

#[test]
fn transform_examples() {
    let c = cfg();
    let t = transform_ode(&VariableMap::swap(), &ode("0").unwrap(), &c).unwrap();
    assert_eq!(t.rhs(), &f(SWAP_OF_ZERO));
    let o = ode("q^3 + x*y").unwrap();
    let t = transform_ode(&VariableMap::identity(), &o, &c).unwrap();
    assert_eq!(t.rhs(), o.rhs());
    let t = transform_ode(&fibre_doubling(), &ode("q^3").unwrap(), &c).unwrap();
    assert_eq!(t.rhs(), &f("8*q^3"));
}

#[test]
fn transform_needs_a_valid_inverse() {
    let c = cfg();
    let m = VariableMap::fibre(f("2*x"), f("y"), &c).unwrap();
    assert!(matches!(
        transform_ode(&m, &ode("q^3").unwrap(), &c),
        Err(Error::MissingInverse)
    ));
    let bad = m.with_inverse(f("x/3"), f("y"), None, &c).unwrap();
    assert!(matches!(
        transform_ode(&bad, &ode("q^3").unwrap(), &c),
        Err(Error::InverseMismatch { .. })
    ));
}

#[test]
fn verify_examples() {
    let c = cfg();
    let zero = ode("0").unwrap();
    let swap = VariableMap::swap();
    assert!(verify_equivalence(&swap, &zero, &ode(SWAP_OF_ZERO).unwrap(), &c)
        .unwrap()
        .is_proved_zero());
    let o = ode("q^2*x + y").unwrap();
    assert!(verify_equivalence(&VariableMap::identity(), &o, &o, &c)
        .unwrap()
        .is_proved_zero());
    let half = ode("3*q^2/(2*p)").unwrap();
    assert!(verify_equivalence(&swap, &zero, &half, &c)
        .unwrap()
        .is_proved_nonzero());
    // residual in the source coordinates is -(3/2) q'^2/p' at the image
    let res = equivalence_residual(&swap, &zero, &half).unwrap();
    assert_eq!(res, f("-3*q^2/(2*p^5)"));
}

#[test]
fn round_trip_through_the_inverse() {
    let c = cfg();
    let swap = VariableMap::swap();
    let there = transform_ode(&swap, &ode("0").unwrap(), &c).unwrap();
    let back = transform_ode(&swap.inverted().unwrap(), &there, &c).unwrap();
    assert!(back.rhs().is_zero());
    let m = fibre_doubling();
    for s in ["q^3", "x*q^2 + y", "q^(3/2)"] {
        let o = ode(s).unwrap();
        let there = transform_ode(&m, &o, &c).unwrap();
        let back = transform_ode(&m.inverted().unwrap(), &there, &c).unwrap();
        assert!(is_zero_frac(&(back.rhs() - o.rhs()), &c).is_proved_zero(), "{s}");
    }
}

#[test]
fn map_validation() {
    let c = cfg();
    assert!(matches!(
        VariableMap::fibre(f("y"), f("x"), &c),
        Err(Error::InvalidMap(_))
    ));
    assert!(matches!(
        VariableMap::point(f("x"), f("x"), &c),
        Err(Error::DegenerateMap(_))
    ));
    assert!(matches!(
        VariableMap::point(f("y + 0*x"), f("p"), &c),
        Err(Error::InvalidMap(_))
    ));
    // Legendre transform: x' = p, y' = x p - y, p' = x
    let leg = VariableMap::contact(f("p"), f("x*p - y"), f("x"), &c).unwrap();
    assert_eq!(leg.kind(), MapKind::Contact);
    assert!(matches!(
        VariableMap::contact(f("p"), f("x*p - y"), f("2*x"), &c),
        Err(Error::InvalidMap(_))
    ));
}

#[test]
fn legendre_round_trip() {
    let c = cfg();
    let leg = VariableMap::contact(f("p"), f("x*p - y"), f("x"), &c)
        .unwrap()
        .with_inverse(f("p"), f("x*p - y"), Some(f("x")), &c)
        .unwrap();
    for s in ["q^3", "q^4 + x"] {
        let o = ode(s).unwrap();
        let there = transform_ode(&leg, &o, &c).unwrap();
        assert!(verify_equivalence(&leg, &o, &there, &c).unwrap().is_proved_zero(), "{s}");
        let back = transform_ode(&leg.inverted().unwrap(), &there, &c).unwrap();
        assert!(is_zero_frac(&(back.rhs() - o.rhs()), &c).is_proved_zero(), "{s}");
    }
}

#[test]
fn w_vanishing_is_preserved() {
    let c = cfg();
    let cases = [
        (VariableMap::swap(), "0"),
        (VariableMap::swap(), "q^(3/2)"),
        (fibre_doubling(), "(q^2 + 1)^(3/2)"),
        (fibre_doubling(), "3*q^2/(2*p)"),
    ];
    for (m, s) in cases {
        let a = ode(s).unwrap();
        assert!(scalar_invariant(&a, InvariantName::W).unwrap().is_zero());
        let b = transform_ode(&m, &a, &c).unwrap();
        assert!(verify_equivalence(&m, &a, &b, &c).unwrap().is_proved_zero());
        let wb = scalar_invariant(&b, InvariantName::W).unwrap();
        let pulled = wb.subst_vars(&prolong(&m, &a).unwrap().bindings()).unwrap();
        assert!(is_zero_frac(&pulled, &c).is_proved_zero(), "{s}");
    }
}

fn random_point_map(rng: &mut ChaCha8Rng) -> VariableMap {
    let mut k = || rng.gen_range(-3i64..=3);
    let chi = f(&format!("x + ({})*y + ({})*x^2 + ({})*x*y", k(), k(), k()));
    let phi = f(&format!("y + ({})*x + ({})*y^2 + ({})*x^3", k(), k(), k()));
    VariableMap::point(chi, phi, &cfg()).unwrap()
}

#[test]
fn group_law_on_random_pairs() {
    let c = cfg();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let o = ode("q^2 + x*y").unwrap();
    for _ in 0..10 {
        let (m1, m2) = (random_point_map(&mut rng), random_point_map(&mut rng));
        let both = m1.then(&m2, &c).unwrap();
        let direct = both.jet_images().unwrap();
        let first = prolong(&m1, &o).unwrap().bindings();
        let second = m2.jet_images().unwrap();
        for (d, s) in direct.iter().zip(&second) {
            let via = s.subst_vars(&first).unwrap();
            assert!(is_zero_frac(&(d - &via), &c).is_proved_zero());
        }
    }
}

#[test]
fn group_law_on_the_third_derivative() {
    // r' of a composite equals r' of the second map along the intermediate equation
    let c = cfg();
    let o = ode("x*q^2 + y").unwrap();
    let (m1, m2) = (fibre_doubling(), VariableMap::swap());
    let mid = transform_ode(&m1, &o, &c).unwrap();
    let both = m1.then(&m2, &c).unwrap();
    let direct = prolong(&both, &o).unwrap();
    let first = prolong(&m1, &o).unwrap().bindings();
    let second = prolong(&m2, &mid).unwrap();
    for (d, s) in direct.components().into_iter().zip(second.components()) {
        let via = s.subst_vars(&first).unwrap();
        assert!(is_zero_frac(&(d - &via), &c).is_proved_zero());
    }
}
