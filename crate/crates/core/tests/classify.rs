use thirdorder::classify::*;
use thirdorder::corpus::{self, ode};
use thirdorder::oracle::RicciSign;
use thirdorder::prolong::{verify_equivalence, MapKind, VariableMap};
use thirdorder::symkernel::{is_zero_frac, parse_with, Frac, ProbeConfig};
use thirdorder::Error;

fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

fn f(s: &str) -> Frac {
    let ps = ["mu".to_string()].into();
    parse_with(s, &ps).unwrap().to_frac().unwrap()
}

fn report(s: &str) -> ClassificationReport {
    classify(&ode(s).unwrap(), &cfg()).unwrap()
}

#[test]
fn zero_rhs() {
    let r = report("0");
    for id in ["contact_trivial", "contact_projective", "point_projective", "point_trivial", "einstein_weyl"] {
        assert_eq!(r.outcome(id), Outcome::True, "{id}");
    }
    let pt = r.condition("point_trivial").unwrap();
    assert!(pt.checks.iter().all(|c| c.verdict.is_proved_zero()));
    assert_eq!(r.outcome("linearizable"), Outcome::NotApplicable);
    assert_eq!(r.ricci_sign, Some(RicciSign::Zero));
    let c = r.cubic_coefficients.as_ref().unwrap();
    assert!(c.to_array().iter().all(Frac::is_zero));
    assert!(r.discrepancies.is_empty());
}

#[test]
fn negative_pair_member() {
    let r = report("3*q^2/(2*p)");
    assert_eq!(r.outcome("contact_trivial"), Outcome::True);
    assert_eq!(r.outcome("point_trivial"), Outcome::False);
    assert_eq!(r.outcome("einstein_weyl"), Outcome::True);
    assert_eq!(r.outcome("lorentz_reduction"), Outcome::True);
    assert_eq!(r.ricci_sign, Some(RicciSign::Negative));
    let c = r.cubic_coefficients.as_ref().unwrap();
    assert_eq!(c.to_array(), [Frac::zero(), f("3/(2*p)"), Frac::zero(), Frac::zero()]);
    assert!(r.discrepancies.iter().any(|d| d.contains("EWcartan")));
}

#[test]
fn positive_pair_member() {
    let r = report("3*q^2*p/(p^2 + 1)");
    assert_eq!(r.outcome("contact_trivial"), Outcome::True);
    assert_eq!(r.outcome("point_trivial"), Outcome::False);
    assert_eq!(r.outcome("einstein_weyl"), Outcome::True);
    assert_eq!(r.ricci_sign, Some(RicciSign::Positive));
}

#[test]
fn linear_family() {
    let r = report("-2*mu*p + y");
    assert_eq!(r.outcome("linearizable"), Outcome::True);
    assert_eq!(r.mu, Some(f("mu")));
    assert_eq!(r.outcome("contact_trivial"), Outcome::False);
    assert_eq!(r.outcome("einstein_weyl"), Outcome::False);
    assert_eq!(r.ricci_sign, None);
    for (text, mu) in [("y", "0"), ("-2*p + y", "1"), ("4*p + y", "-2")] {
        let r = report(text);
        assert_eq!(r.outcome("linearizable"), Outcome::True, "{text}");
        assert_eq!(r.mu, Some(f(mu)), "{text}");
    }
}

#[test]
fn a_non_linearizable_equation_with_nonzero_w() {
    let r = report("q^3 + y");
    assert_eq!(r.outcome("linearizable"), Outcome::False);
    assert_eq!(r.mu, None);
}

#[test]
fn three_halves_power() {
    let r = report("q^(3/2)");
    let w = r.condition("contact_trivial").unwrap().check("W").unwrap();
    assert!(w.verdict.is_proved_zero());
    assert_eq!(r.outcome("contact_trivial"), Outcome::False);
    assert_eq!(r.outcome("contact_projective"), Outcome::False);
    assert_eq!(r.outcome("einstein_weyl"), Outcome::True);
    assert!(r.cubic_coefficients.is_none());
    let printed = r.condition("einstein_weyl").unwrap().check("EWcartan (printed)").unwrap();
    assert!(printed.verdict.is_proved_nonzero());
    assert_eq!(printed.expression, f("-3/16*q^(1/2)"));
    assert!(r.discrepancies.iter().any(|d| d.contains("EWcartan")));
    assert!(r.notes.iter().any(|n| n.contains("F_qqqq != 0")));
}

#[test]
fn swap_image_agrees_with_zero_on_point_invariant_conditions() {
    let (a, b) = (ode("0").unwrap(), ode("3*q^2/p").unwrap());
    let swap = VariableMap::swap();
    assert!(verify_equivalence(&swap, &a, &b, &cfg()).unwrap().is_proved_zero());
    let (ra, rb) = (classify(&a, &cfg()).unwrap(), classify(&b, &cfg()).unwrap());
    let mut compared = 0;
    for ca in &ra.conditions {
        if ca.invariance >= MapKind::Point {
            assert_eq!(ca.outcome, rb.outcome(&ca.id), "{}", ca.id);
            compared += 1;
        }
    }
    assert_eq!(compared, 7);
    // printed C1 does not vanish on the swap image; the report says so
    let c1 = rb.condition("point_trivial").unwrap().check("C1 (printed)").unwrap();
    assert!(c1.verdict.is_proved_nonzero());
    assert!(rb.discrepancies.iter().any(|d| d.contains("printed C1")));
}

#[test]
fn contact_trivial_implies_projective_and_einstein_weyl() {
    for s in ["3*q^2/(2*p)", "3*q^2*p/(p^2 + 1)", "0", "3*q^2/p"] {
        let r = report(s);
        assert_eq!(r.outcome("contact_trivial"), Outcome::True, "{s}");
        assert_eq!(r.outcome("contact_projective"), Outcome::True, "{s}");
        assert_eq!(r.outcome("einstein_weyl"), Outcome::True, "{s}");
    }
}

#[test]
fn cubic_examples() {
    let c = cubic_coefficients(&ode("q^3").unwrap(), &cfg()).unwrap();
    assert_eq!(c.to_array(), [Frac::one(), Frac::zero(), Frac::zero(), Frac::zero()]);
    assert!(matches!(
        cubic_coefficients(&ode("q^(3/2)").unwrap(), &cfg()),
        Err(Error::NotCubic(_))
    ));
    for seed in 0..10 {
        let (o, a) = corpus::random_cubic(seed);
        let c = cubic_coefficients(&o, &cfg()).unwrap();
        // the corpus lists a0..a3
        let mut a = a;
        a.reverse();
        assert_eq!(c.to_array(), a, "seed {seed}");
        assert!(is_zero_frac(&(&c.reconstruct() - o.rhs()), &cfg()).is_proved_zero());
    }
}

#[test]
fn random_equations_classify_without_unknowns() {
    for o in corpus::random_corpus() {
        let r = classify(&o, &cfg()).unwrap();
        assert!(!r.has_unknown(), "{}", o.rhs());
    }
}

#[test]
fn json_and_table() {
    let r = report("3*q^2/(2*p)");
    let v = serde_json::to_value(&r).unwrap();
    assert_eq!(v["einstein_weyl"], true);
    assert_eq!(v["point_trivial"], false);
    assert_eq!(v["ricci_sign"], "negative");
    assert_eq!(v["cubic_coefficients"]["a2"], "3/2/p");
    let t = r.to_table();
    assert!(t.contains("einstein_weyl"));
    assert!(t.contains("ricci sign: negative"));
    let v = serde_json::to_value(report("0")).unwrap();
    assert_eq!(v["linearizable"], "not applicable");
}
