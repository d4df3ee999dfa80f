use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use thirdorder::symkernel::{
    diff, is_constant, is_zero, parse, parse_with, rat, Expr, Frac, Point, ProbeConfig, Var,
    ZeroVerdict,
};

fn f(s: &str) -> Frac {
    parse(s).unwrap().to_frac().unwrap()
}

fn fp(s: &str) -> Frac {
    let ps: BTreeSet<String> = ["mu".to_string()].into();
    parse_with(s, &ps).unwrap().to_frac().unwrap()
}

#[test]
fn power_rule_for_fractional_exponent() {
    assert_eq!(f("q^(3/2)").diff(Var::Q), f("3/2*q^(1/2)"));
    assert_eq!(f("3*q^2/(2*p)").diff(Var::P), f("-3*q^2/(2*p^2)"));
}

#[test]
fn fourth_derivative_of_three_halves_power() {
    let mut e = f("q^(3/2)");
    for _ in 0..4 {
        e = e.diff(Var::Q);
    }
    assert_eq!(e, f("9/16*q^(-5/2)"));
    // finite-difference oracle on the third derivative
    let mut d3 = f("q^(3/2)");
    for _ in 0..3 {
        d3 = d3.diff(Var::Q);
    }
    let h = 1e-4;
    let at = |q: f64| d3.eval(&Point::new().with(Var::Q, q)).unwrap();
    let q0 = 1.3;
    let fd = (at(q0 + h) - at(q0 - h)) / (2.0 * h);
    let sym = e.eval(&Point::new().with(Var::Q, q0)).unwrap();
    assert!((fd - sym).abs() < 1e-7 * sym.abs().max(1.0));
}

#[test]
fn substitution_examples() {
    let mut b = BTreeMap::new();
    b.insert(Var::P, parse("1/p").unwrap());
    assert_eq!(
        parse("p*q").unwrap().substitute(&b).unwrap().to_frac().unwrap(),
        f("q/p")
    );
    let mut b = BTreeMap::new();
    b.insert(Var::Q, parse("-q/p^3").unwrap());
    assert_eq!(
        parse("q^2").unwrap().substitute(&b).unwrap().to_frac().unwrap(),
        f("q^2/p^6")
    );
    assert_eq!(
        parse("x").unwrap().substitute(&BTreeMap::new()).unwrap(),
        Expr::var(Var::X)
    );
}

#[test]
fn numeric_evaluation() {
    let e = parse("q^(3/2)").unwrap();
    assert_eq!(e.eval(&Point::new().with(Var::Q, 4.0)).unwrap(), 8.0);
    let e = parse("3*q^2/(2*p)").unwrap();
    let v: f64 = e.eval(&Point::new().with(Var::P, 2.0).with(Var::Q, 2.0)).unwrap();
    assert_eq!(v, 3.0);
    let v32: f32 = e
        .eval(&Point::new().with(Var::P, 2.0f32).with(Var::Q, 2.0f32))
        .unwrap();
    assert_eq!(v32, 3.0);
    assert!(parse("q^(1/2)")
        .unwrap()
        .eval(&Point::new().with(Var::Q, -1.0))
        .is_err());
    let c: f64 = parse("cbrt(q)")
        .unwrap()
        .eval(&Point::new().with(Var::Q, -8.0))
        .unwrap();
    assert!((c + 2.0).abs() < 1e-12);
    assert!(parse("ln(q)")
        .unwrap()
        .eval(&Point::new().with(Var::Q, -1.0))
        .is_err());
    assert!(parse("1/(q-1)")
        .unwrap()
        .eval(&Point::new().with(Var::Q, 1.0))
        .is_err());
}

#[test]
fn zero_test_examples() {
    let cfg = ProbeConfig::default();
    assert_eq!(is_zero(&parse("0").unwrap(), &cfg).unwrap(), ZeroVerdict::ProvedZero);
    assert_eq!(
        is_zero(&parse("p*q - q*p").unwrap(), &cfg).unwrap(),
        ZeroVerdict::ProvedZero
    );
    match is_zero(&parse("x + q").unwrap(), &cfg).unwrap() {
        ZeroVerdict::ProvedNonzero(w) => assert!(w.value.abs() > 0.0),
        other => panic!("{other:?}"),
    }
}

#[test]
fn zero_test_is_reproducible() {
    let cfg = ProbeConfig::default().with_seed(7);
    let e = parse("x*y - p^2 + q^(3/2)").unwrap();
    let a = is_zero(&e, &cfg).unwrap();
    let b = is_zero(&e, &cfg).unwrap();
    assert_eq!(a, b);
}

#[test]
fn constancy() {
    let cfg = ProbeConfig::default();
    assert_eq!(is_constant(&f("x + q"), &cfg), None);
    assert_eq!(is_constant(&fp("2*mu + 1"), &cfg), Some(fp("2*mu + 1")));
}

#[test]
fn radicals_merge_on_identical_bases() {
    assert_eq!(&f("q^(3/2)") * &f("q^(1/2)"), f("q^2"));
    assert_eq!(f("sqrt(q)^2"), f("q"));
    assert_eq!(f("(q^2+1)^(3/2)/(q^2+1)"), f("(q^2+1)^(1/2)"));
    assert_eq!(f("1/(1+sqrt(q))*(1+sqrt(q))"), f("1"));
    assert_eq!(f("cbrt(-q)"), f("-cbrt(q)"));
    assert_eq!(f("sqrt(4)"), f("2"));
    assert_eq!(f("cbrt(-27/8)"), f("-3/2"));
}

#[test]
fn transcendental_derivatives() {
    assert_eq!(f("exp(2*x)").diff(Var::X), f("2*exp(2*x)"));
    assert_eq!(f("ln(p)").diff(Var::P), f("1/p"));
    assert_eq!(f("sin(q)").diff(Var::Q), f("cos(q)"));
    assert_eq!(f("cos(q)").diff(Var::Q), f("-sin(q)"));
    assert_eq!(f("exp(0)"), f("1"));
}

#[test]
fn display_round_trips() {
    for s in [
        "3*q^2/(2*p)",
        "(q^2/(1-p^2) - p^2 + 1)^(3/2) - 3*q^2*p/(1-p^2)",
        "-2*p + y",
        "exp(x)*sin(q)^2 - ln(p)/q",
        "(2*q*y - p^2)^(3/2)/y^2",
        "q^(-1/3) + x^(-2)",
    ] {
        let a = f(s);
        let printed = a.to_string();
        let b = f(&printed);
        assert_eq!(a, b, "{s} -> {printed}");
    }
}

#[test]
fn tree_diff_agrees_with_normal_form_diff() {
    let e = parse("(q^2+1)^(3/2)*exp(p)/(x - y)").unwrap();
    for v in Var::JET {
        assert_eq!(
            e.diff(v).to_frac().unwrap(),
            diff(&e, v).unwrap().to_frac().unwrap()
        );
    }
}

fn leaf() -> impl Strategy<Value = String> {
    prop_oneof![
        Just("x".to_string()),
        Just("y".to_string()),
        Just("p".to_string()),
        Just("q".to_string()),
        (1i64..5).prop_map(|n| n.to_string()),
        (1i64..5, 2i64..5).prop_map(|(a, b)| format!("{a}/{b}")),
    ]
}

/// Random expressions; radicals only over sums of squares plus one so the
/// real domain is everything.
fn expr_strategy() -> impl Strategy<Value = String> {
    leaf().prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) + ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a}) - ({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})*({b})")),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| format!("({a})/(({b})^2 + 1)")),
            inner.clone().prop_map(|a| format!("(({a})^2 + 1)^(1/2)")),
            inner.clone().prop_map(|a| format!("({a})^3")),
            inner.clone().prop_map(|a| format!("sin({a})")),
            inner.prop_map(|a| format!("exp(({a})/4)")),
        ]
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn partials_match_central_differences(s in expr_strategy(), seed in 0u64..1000) {
        let e = f(&s);
        let mut sampler = thirdorder::symkernel::Sampler::new(&ProbeConfig::default().with_seed(seed));
        for _ in 0..10 {
            let pt = sampler.point(&Var::JET.into_iter().collect(), &BTreeSet::new(), &BTreeSet::new());
            for v in Var::JET {
                let d = e.diff(v);
                let x0 = pt.vars[&v];
                let h = 1e-5 * x0.abs().max(1.0);
                let at = |x: f64| { let mut p = pt.clone(); p.vars.insert(v, x); e.eval(&p).unwrap() };
                let fd = (at(x0 + h) - at(x0 - h)) / (2.0 * h);
                let sym = d.eval(&pt).unwrap();
                let scale = sym.abs().max(fd.abs()).max(1.0);
                prop_assert!((fd - sym).abs() / scale < 1e-6, "{} d/d{}: fd {} sym {}", s, v, fd, sym);
            }
        }
    }

    #[test]
    fn normal_form_is_a_ring_fixed_point(a in expr_strategy(), b in expr_strategy(), c in expr_strategy()) {
        let (fa, fb, fc) = (f(&a), f(&b), f(&c));
        prop_assert_eq!(&fa + &fb, &fb + &fa);
        prop_assert_eq!(&fa * &(&fb + &fc), &(&fa * &fb) + &(&fa * &fc));
        let n1 = parse(&a).unwrap().normalize().unwrap();
        prop_assert_eq!(n1.normalize().unwrap(), n1.clone());
    }

    #[test]
    fn diff_commutes_with_normalize(s in expr_strategy()) {
        let e = parse(&s).unwrap();
        for v in Var::JET {
            let lhs = e.diff(v).to_frac().unwrap();
            let rhs = e.normalize().unwrap().diff(v).to_frac().unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn zero_test_is_sound(s in expr_strategy()) {
        let e = parse(&format!("({s}) - ({s})")).unwrap();
        prop_assert!(is_zero(&e, &ProbeConfig::default()).unwrap().is_proved_zero());
    }
}

#[test]
fn rational_helper() {
    assert_eq!(Frac::constant(rat(6, 4)), f("3/2"));
}
