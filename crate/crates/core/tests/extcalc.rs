use thirdorder::corpus::{self, ode};
use thirdorder::extcalc::*;
use thirdorder::invariants::{scalar_invariant, InvariantName as N, Jet};
use thirdorder::symkernel::{is_zero_frac, rat, Frac, ProbeConfig, Var};
use thirdorder::Error;

fn f(s: &str) -> Frac {
    let ps = ["mu".to_string()].into();
    thirdorder::symkernel::parse_with(s, &ps).unwrap().to_frac().unwrap()
}

fn c() -> Coords {
    jet_coords()
}

fn d(v: Var) -> Form {
    Form::d_coord(&c(), v)
}


fn cfg() -> ProbeConfig {
    ProbeConfig::default()
}

#[test]
fn wedge_examples() {
    use Var::*;
    assert!((&d(X) ^ &d(X)).is_zero());
    let w1 = &d(Y) - &(&f("p") * &d(X));
    assert_eq!(&w1 ^ &d(X), &d(Y) ^ &d(X));
    let [w1, w2, _, _] = plain_coframe(&ode("q^3").unwrap());
    let expect = &(&(&d(Y) ^ &d(P)) - &(&f("q") * &(&d(Y) ^ &d(X)))) - &(&f("p") * &(&d(X) ^ &d(P)));
    assert_eq!(&w1 ^ &w2, expect);
    assert!(wedge(&w1, &Form::d_coord(&five_coords(), X)).is_err());
}

#[test]
fn exterior_d_examples() {
    use Var::*;
    assert_eq!((&f("p") * &d(X)).d(), &d(P) ^ &d(X));
    let w1 = &d(Y) - &(&f("p") * &d(X));
    assert_eq!(w1.d(), &d(X) ^ &d(P));
    assert!((&f("1/p") * &d(P)).d().is_zero());
}

#[test]
fn d_squared_vanishes_on_random_forms() {
    let mut s = 0u64;
    for degree in 0..3 {
        for _ in 0..20 {
            s += 1;
            let mut form = Form::zero(&c(), degree);
            for idx in frame_tuples(4, degree) {
                let coef = corpus::random_polynomial(s * 7 + idx.len() as u64, 3).rhs().clone();
                form = &form + &Form::from_terms(&c(), degree, vec![(idx, coef)]);
            }
            assert!(form.d().d().is_zero());
        }
    }
}

fn frame_tuples(n: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..k {
        let mut next = vec![];
        for t in &out {
            let start = t.last().map(|x| x + 1).unwrap_or(0);
            for i in start..n {
                let mut t2: Vec<usize> = t.clone();
                t2.push(i);
                next.push(t2);
            }
        }
        out = next;
    }
    out
}

#[test]
fn lie_derivative_examples() {
    let zero = ode("0").unwrap();
    let dd = total_derivative_field(&zero);
    let [w1, w2, _, dx] = plain_coframe(&zero);
    assert_eq!(lie_derivative(&dd, &w1).unwrap(), w2);
    for s in ["0", "q^(3/2)", "x*y + q^2"] {
        let dd = total_derivative_field(&ode(s).unwrap());
        assert!(lie_derivative(&dd, &dx).unwrap().is_zero());
    }
}

#[test]
fn coframe_examples() {
    use Var::*;
    let [a, b, c3, e] = coframe(&ode("0").unwrap(), Picture::Contact);
    assert_eq!(a, &d(Y) - &(&f("p") * &d(X)));
    assert_eq!(b, &d(P) - &(&f("q") * &d(X)));
    assert_eq!(c3, d(Q));
    assert_eq!(e, d(X));
    let w4 = &coframe(&ode("3*q^2/(2*p)").unwrap(), Picture::Point)[3];
    let w1 = &d(Y) - &(&f("p") * &d(X));
    assert_eq!(*w4, &d(X) + &(&f("1/(2*p)") * &w1));
    for s in ["0", "q^3*x", "3*q^2/(2*p)"] {
        assert_eq!(coframe(&ode(s).unwrap(), Picture::Fibre)[3], d(X));
    }
}

#[test]
fn omega0_examples() {
    assert!(omega0(&ode("0").unwrap(), Picture::Contact).iter().all(Form::is_zero));
    let om = omega0(&ode("3*q^2/(2*p)").unwrap(), Picture::Point);
    assert_eq!(om[2], &f("1/p") * &d(Var::P));
    assert!(omega0(&ode("0").unwrap(), Picture::Fibre)[1].is_zero());
}

#[test]
fn flat_connections_of_zero_rhs() {
    for pic in Picture::ALL {
        let k = curvature(&connection(&ode("0").unwrap(), pic));
        assert!(k.is_zero(), "{pic}");
    }
    let k = curvature(&connection(&ode("q^3").unwrap(), Picture::Point));
    assert!(k.zero_verdict(&cfg()).is_proved_nonzero());
}

#[test]
fn swap_image_has_flat_point_connection() {
    let k = curvature(&connection(&ode("3*q^2/p").unwrap(), Picture::Point));
    assert!(k.zero_verdict(&cfg()).is_proved_zero());
}

#[test]
fn metric_and_potential_examples() {
    use Var::*;
    let g = conformal_metric(&ode("0").unwrap());
    let w1 = &d(Y) - &(&f("p") * &d(X));
    let w2 = &d(P) - &(&f("q") * &d(X));
    let expect = SymTensor2::sym_product(&w1, &d(Q))
        .unwrap()
        .scale(&Frac::int(2))
        .try_add(&SymTensor2::sym_product(&w2, &w2).unwrap().scale(&Frac::int(-1)))
        .unwrap();
    assert_eq!(g, expect);
    assert!(weyl_potential(&ode("0").unwrap()).is_zero());
    assert_eq!(weyl_potential(&ode("3*q^2/(2*p)").unwrap()), &f("1/p") * &d(P));
    assert_eq!(weyl_potential(&ode("3*q^2/p").unwrap()), &f("2/p") * &d(P));
}

#[test]
fn cotton_examples() {
    assert!(cotton(&ode("0").unwrap()).iter().all(Form::is_zero));
    let dp = cotton(&ode("q^(3/2)").unwrap());
    let frame = Coframe::new(coframe(&ode("q^(3/2)").unwrap(), Picture::Contact).to_vec(), &cfg()).unwrap();
    assert_eq!(frame.component(&dp[2], &[1, 2]).unwrap(), f("-3/32*q^(-5/2)"));
    for form in cotton(&ode("3*q^2/(2*p)").unwrap()) {
        assert!(form.zero_verdict(&cfg()).is_proved_zero());
    }
}

#[test]
fn five_dim_coframe_of_y() {
    let th = five_dim_coframe(&ode("y").unwrap()).unwrap();
    let c5 = five_coords();
    let dx = Form::d_coord(&c5, Var::X);
    let u = f("u");
    let w1 = &Form::d_coord(&c5, Var::Y) - &(&f("p") * &dx);
    let w2 = &Form::d_coord(&c5, Var::P) - &(&f("q") * &dx);
    let w3 = &Form::d_coord(&c5, Var::Q) - &(&f("y") * &dx);
    assert_eq!(th[0], &u * &w1);
    assert_eq!(th[1], &u * &w2);
    assert_eq!(th[2], &u * &w3);
    assert_eq!(th[3], dx);
    assert_eq!(th[4], &f("1/u") * &Form::d_coord(&c5, Var::U));
    let st = five_dim_structure(&ode("y").unwrap(), &cfg()).unwrap();
    assert!(st.residual_verdict(&cfg()).is_proved_zero());
    assert!(st.functions.values().all(Frac::is_zero));
}

#[test]
fn five_dim_linear_example() {
    let st = five_dim_structure(&ode("-2*p + y").unwrap(), &cfg()).unwrap();
    assert_eq!(st.functions["a"], f("1"));
    assert!(st.functions["k"].is_zero());
    assert!(matches!(five_dim_coframe(&ode("0").unwrap()), Err(Error::WunschmannZero(_))));
}

/// `F_qq Z^2 / (162 u W^(2/3))`: the extracted `b` exceeds the printed `b5`
/// by this amount.
fn b5_gap(o: &thirdorder::Ode3) -> Frac {
    let j = Jet::new(o);
    let z = j.z(&[]).unwrap();
    let num = &j.f(&[Var::Q, Var::Q]) * &(&z * &z);
    let den = &(&Frac::int(162) * &Frac::var(Var::U)) * &j.w_third(2, "test").unwrap();
    num.try_div(&den).unwrap()
}

#[test]
fn structure_functions_match_named_invariants_exactly() {
    let cf = cfg();
    let o = ode("q^2 + y").unwrap();
    let st = five_dim_structure(&o, &cf).unwrap();
    assert!(st.residual_verdict(&cf).is_proved_zero());
    for (name, inv) in [("a", N::A5), ("e", N::E5), ("h", N::H5), ("k", N::K5)] {
        let diff = &st.functions[name] - &scalar_invariant(&o, inv).unwrap();
        let v = is_zero_frac(&diff, &cf);
        assert!(v.is_proved_zero(), "{name} {v}");
    }
    let b = scalar_invariant(&o, N::B5).unwrap();
    assert!(is_zero_frac(&(&st.functions["b"] - &b), &cf).is_proved_nonzero());
    let gap = &(&st.functions["b"] - &b) - &b5_gap(&o);
    assert!(is_zero_frac(&gap, &cf).is_proved_zero());
}

#[test]
fn structure_functions_match_named_invariants_numerically() {
    use thirdorder::Point;
    let points = [(0.3, 0.7, -0.4, 1.1, 1.3), (-0.2, 1.4, 0.5, -0.8, 0.7)];
    for s in ["x*q^2 + y^2", "q^3 + p*y", "q^2*p + x*y"] {
        let o = ode(s).unwrap();
        let gap = b5_gap(&o);
        for (x, y, p, q, u) in points {
            let pt = Point::new()
                .with(Var::X, x)
                .with(Var::Y, y)
                .with(Var::P, p)
                .with(Var::Q, q)
                .with(Var::U, u);
            let st = five_dim_structure_at(&o, &pt).unwrap();
            for (name, inv) in [("a", N::A5), ("b", N::B5), ("e", N::E5), ("h", N::H5), ("k", N::K5)] {
                let mut printed = scalar_invariant(&o, inv).unwrap().eval(&pt).unwrap();
                if name == "b" {
                    printed += gap.eval(&pt).unwrap();
                }
                let got = st[name];
                assert!(
                    (got - printed).abs() <= 1e-8 * (1.0 + printed.abs()),
                    "{s} {name}: {got} vs {printed}"
                );
            }
        }
    }
}

#[test]
fn mu_connection_examples() {
    for s in ["-2*mu*p + y", "y", "-2*p + y", "4*p + y"] {
        let m = mu_connection(&ode(s).unwrap(), &cfg()).unwrap();
        assert!(m.curvature.zero_verdict(&cfg()).is_proved_zero(), "{s}");
    }
    assert_eq!(mu_connection(&ode("-2*mu*p + y").unwrap(), &cfg()).unwrap().mu, f("mu"));
    assert!(matches!(
        mu_connection(&ode("q^(3/2)").unwrap(), &cfg()),
        Err(Error::NotConstant(..))
    ));
}

#[test]
fn six_dim_metric_examples() {
    use Var::*;
    let g = six_dim_metric(&ode("0").unwrap(), MetricVariant::C);
    let expect = SymTensor2::sym_product(&d(X), &d(Q)).unwrap().scale(&Frac::int(2));
    assert_eq!(g, expect);
    let g3 = six_dim_metric(&ode("q^3").unwrap(), MetricVariant::C);
    assert!(!g3.is_zero());
    let gp = six_dim_metric(&ode("q^3").unwrap(), MetricVariant::P);
    assert_ne!(g3, gp);
}

#[test]
fn six_dim_metric_rank_is_at_most_four() {
    let mut sampler = thirdorder::symkernel::Sampler::new(&cfg());
    for seed in 0..5 {
        let o = corpus::random_polynomial(seed + 40, 2);
        let g = six_dim_metric(&o, MetricVariant::C);
        for _ in 0..10 {
            let pt = sampler.point(&Var::JET.into_iter().collect(), &Default::default(), &Default::default());
            let m = g.eval(&pt).unwrap();
            let (pos, neg) = signature(&m);
            assert!(pos + neg <= 4);
        }
    }
}

#[test]
fn solution_space_metric_examples() {
    let cf = cfg();
    let g = solution_space_metric(&ode("0").unwrap(), &f("c1 + c2*x + c3*x^2/2"), &rat(0, 1), &cf).unwrap();
    let cs = solution_coords();
    let dc = |v| Form::d_coord(&cs, v);
    let expect = SymTensor2::sym_product(&dc(Var::C1), &dc(Var::C3))
        .unwrap()
        .scale(&Frac::int(2))
        .try_add(&SymTensor2::sym_product(&dc(Var::C2), &dc(Var::C2)).unwrap().scale(&Frac::int(-1)))
        .unwrap();
    assert_eq!(g, expect);

    let g = solution_space_metric(&ode("3*q^2/(2*p)").unwrap(), &f("c1 + c2/(x + c3)"), &rat(0, 1), &cf).unwrap();
    let at = thirdorder::Point::new()
        .with(Var::C1, 0.9)
        .with(Var::C2, 1.1)
        .with(Var::C3, 1.3);
    let m = g.eval(&at).unwrap();
    let (pos, neg) = signature(&m);
    assert_eq!((pos, neg), (1, 2));

    assert!(matches!(
        solution_space_metric(&ode("0").unwrap(), &f("c1 + c2*x + c3*x^3"), &rat(0, 1), &cf),
        Err(Error::NotASolution(_))
    ));
}

fn signature(m: &[Vec<f64>]) -> (usize, usize) {
    // Sylvester: signs of leading principal minors after a generic rotation is
    // overkill here; use the characteristic polynomial roots via Jacobi sweeps.
    let mut a: Vec<Vec<f64>> = m.to_vec();
    let n = a.len();
    for _ in 0..100 {
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-15 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let cth = 1.0 / (t * t + 1.0).sqrt();
                let s = t * cth;
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = cth * akp - s * akq;
                    a[k][q] = s * akp + cth * akq;
                }
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = cth * apk - s * aqk;
                    a[q][k] = s * apk + cth * aqk;
                }
            }
        }
    }
    let pos = (0..n).filter(|&i| a[i][i] > 1e-12).count();
    let neg = (0..n).filter(|&i| a[i][i] < -1e-12).count();
    (pos, neg)
}

#[test]
fn transport_identities_on_random_equations() {
    for seed in 0..10 {
        let o = corpus::random_polynomial(seed + 200, 3);
        let j = Jet::new(&o);
        let pt = coframe(&o, Picture::Point);
        let fb = coframe(&o, Picture::Fibre);
        let b1f = scalar_invariant(&o, N::B1f).unwrap();
        let half = Frac::ratio(1, 2);
        assert_eq!(pt[3], &fb[3] + &(&(&half * &b1f) * &fb[0]));
        let b5f = scalar_invariant(&o, N::B5f).unwrap();
        let po = omega0(&o, Picture::Point);
        let fo = omega0(&o, Picture::Fibre);
        assert_eq!(po[2], &fo[2] + &(&(&half * &b5f) * &fb[0]), "seed {seed}");
        assert_eq!(weyl_potential(&o), po[2]);
        let _ = j;
    }
}

#[test]
fn einstein_weyl_algebraic_identity() {
    for seed in 0..10 {
        let o = corpus::random_polynomial(seed + 300, 3);
        let b = |n| scalar_invariant(&o, n).unwrap();
        let (b1, b2, b3, b4) = (b(N::B1p), b(N::B2p), b(N::B3p), b(N::B4p));
        let three = Frac::int(3);
        // printed matrix with the (3,1) entry read as -3B1 + B4
        let ric = [
            [Frac::zero(), -(&three * &b3), &(&three * &b1) - &(&Frac::int(5) * &b4)],
            [&three * &b3, &Frac::int(2) * &b4, &three * &b2],
            [&(&Frac::int(-3) * &b1) + &b4, -(&three * &b2), Frac::zero()],
        ];
        // g' = (theta^2)^2 - 2 theta^1 theta^3
        let g = [[0, 0, -1], [0, 1, 0], [-1, 0, 0]];
        let r = &Frac::int(6) * &b4;
        for i in 0..3 {
            for k in 0..3 {
                let sym = &Frac::ratio(1, 2) * &(&ric[i][k] + &ric[k][i]);
                let rhs = &(&Frac::ratio(1, 3) * &r) * &Frac::int(g[i][k]);
                assert!((&sym - &rhs).is_zero());
            }
        }
    }
}

#[test]
fn point_curvature_reproduces_w_and_b_invariants() {
    let cf = cfg();
    for seed in 0..10 {
        let o = corpus::random_polynomial(seed + 500, 2);
        let frame = Coframe::new(coframe(&o, Picture::Point).to_vec(), &cf).unwrap();
        let k = curvature(&connection(&o, Picture::Point));
        // entry (2,1) of the curvature carries -W on theta^1 ^ theta^4
        let w = scalar_invariant(&o, N::W).unwrap();
        let c = frame.component(&k.0[2][1], &[0, 3]).unwrap();
        assert!(is_zero_frac(&(&c + &w), &cf).is_proved_zero(), "seed {seed}");
        // entry (1,0) is B1 theta^2^theta^1 + B2 theta^3^theta^1
        let b1 = scalar_invariant(&o, N::B1p).unwrap();
        let b2 = scalar_invariant(&o, N::B2p).unwrap();
        let e = &k.0[1][0];
        assert!(is_zero_frac(&(&frame.component(e, &[0, 1]).unwrap() + &b1), &cf).is_proved_zero());
        assert!(is_zero_frac(&(&frame.component(e, &[0, 2]).unwrap() + &b2), &cf).is_proved_zero());
    }
}

#[test]
fn contact_curvature_reproduces_basic_invariants() {
    let cf = cfg();
    for seed in 0..6 {
        let o = corpus::random_polynomial(seed + 600, 2);
        let frame = Coframe::new(coframe(&o, Picture::Contact).to_vec(), &cf).unwrap();
        let k = curvature(&connection(&o, Picture::Contact));
        let w = scalar_invariant(&o, N::W).unwrap();
        let c = frame.component(&k.0[2][1], &[0, 3]).unwrap();
        assert!(is_zero_frac(&(&c + &w), &cf).is_proved_zero(), "seed {seed}");
        let b1c = scalar_invariant(&o, N::B1c).unwrap();
        let c = frame.component(&k.0[1][2], &[1, 2]).unwrap();
        assert!(is_zero_frac(&(&c + &b1c), &cf).is_proved_zero(), "seed {seed}");
    }
}

#[test]
fn json_shape_of_forms() {
    let form = &f("q") * &d(Var::X);
    let v = serde_json::to_value(&form).unwrap();
    assert_eq!(v["degree"], 1);
    assert_eq!(v["terms"][0]["idx"][0], 0);
    assert_eq!(v["terms"][0]["coeff"], "q");
}
