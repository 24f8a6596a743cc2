use std::collections::BTreeMap;

use kzp::num::{int, pow_rat, rat, Int, Rat};
use kzp::padic::{BoxCell, Coord, PAdicContext, Weight};
use kzp::presburger::parse;
use kzp::ring::*;
use kzp::{Formula, LinearTerm};
use num_traits::{One, Zero};

fn base(p: i64) -> Presentation {
    Presentation::zero(PAdicContext::new(p).unwrap(), Vec::new(), Formula::True)
}

fn with_s(p: i64) -> Presentation {
    Presentation::zero(PAdicContext::new(p).unwrap(), vec!["s".into()], parse("s >= 0").unwrap())
}

fn value(x: &Presentation) -> Rat {
    measure_function(x).unwrap().eval(&BTreeMap::new()).unwrap()
}

fn value_at(x: &Presentation, s: i64) -> Rat {
    let pt: BTreeMap<String, Int> = [("s".to_string(), int(s))].into();
    measure_function(x).unwrap().eval(&pt).unwrap()
}

fn ball(x: &Presentation, c: i64) -> Presentation {
    x.with_generators(Presentation::ball_generators(x.p(), c))
}

fn single(x: &Presentation, coeff: Rat, cell: BoxCell) -> Presentation {
    x.with_generators(vec![Generator { coeff, cell }])
}

fn weighted(lambda: &str, c: i64, b: i64) -> BoxCell {
    BoxCell {
        coords: vec![Coord::unit(rat(0, 1))],
        lambda_vars: vec!["l1".into()],
        lambda: parse(lambda).unwrap(),
        weight: Some(Weight { r: int(1), c: LinearTerm::constant(c), b: vec![int(b)] }),
    }
}

#[test]
fn additive_identities() {
    let x = base(3);
    let zp = ball(&x, 0);
    assert_eq!(value(&zp.add(&x).unwrap()), Rat::one());
    assert_eq!(value(&zp.add(&zp).unwrap()), rat(2, 1));
    let d1 = single(&x, Rat::one(), Presentation::delta_cell(1));
    assert!(value(&d1.add(&d1.neg()).unwrap()).is_zero());
}

#[test]
fn context_mismatch() {
    assert_eq!(base(2).add(&base(3)), Err(RingError::ContextMismatch));
}

#[test]
fn products() {
    for p in [2, 3, 5] {
        let x = base(p);
        let pz = ball(&x, 1);
        assert_eq!(value(&pz.multiply(&pz).unwrap()), rat(1, p * p));
        let d2 = single(&x, Rat::one(), Presentation::delta_cell(2));
        assert_eq!(value(&x.one().multiply(&d2).unwrap()), value(&d2));
    }
}

#[test]
fn delta_and_translates() {
    let x = base(2);
    assert_eq!(value(&single(&x, Rat::one(), Presentation::delta_cell(3))), rat(1, 7));
    for p in [2, 3, 5, 7] {
        let x = base(p);
        let mut gens = Vec::new();
        for k in 0..p {
            for mut g in Presentation::ball_generators(x.p(), 1) {
                for c in &mut g.cell.coords {
                    if let Coord::Box { center, .. } = c {
                        *center = rat(k, 1);
                    }
                }
                gens.push(g);
            }
        }
        assert_eq!(value(&x.with_generators(gens)), Rat::one());
    }
}

#[test]
fn equality_decisions() {
    for p in [2, 3, 5] {
        let x = base(p);
        let lhs = ball(&x, 1).scalar_mul(&rat(p, 1));
        assert_eq!(decide_equal(&lhs, &ball(&x, 0)).unwrap(), Equality::Equal);
        let d1 = single(&x, rat(p - 1, 1), Presentation::delta_cell(1));
        assert_eq!(decide_equal(&d1, &x.one()).unwrap(), Equality::Equal);
        match decide_equal(&d1, &x.constant(rat(2, 1))).unwrap() {
            Equality::NotEqual { v1, v2, .. } => assert_eq!((v1, v2), (Rat::one(), rat(2, 1))),
            e => panic!("{e:?}"),
        }
    }
}

#[test]
fn parametric_inequality_has_witness() {
    let x = with_s(2);
    let a = single(&x, Rat::one(), weighted("0 <= l1 /\\ l1 < s", -1, -1));
    let b = x.constant(Rat::one());
    let Equality::NotEqual { witness, v1, v2 } = decide_equal(&a, &b).unwrap() else { panic!() };
    assert_ne!(v1, v2);
    let s = witness.iter().find(|(v, _)| v == "s").map(|(_, x)| x.clone()).unwrap();
    assert_eq!(v1, Rat::one() - pow_rat(&int(2), &-s));
}

#[test]
fn geometric_normalization() {
    for p in [2, 3, 5, 7] {
        let x = base(p);
        let xi = single(&x, Rat::one(), weighted("l1 >= 0", 0, -1));
        let n = normalize_to_basic(&xi).unwrap();
        assert_eq!(n.ell, int(p - 1));
        assert_eq!(value(&n.basic.presentation), rat(p, 1));
        verify_certificate(&n.certificate).unwrap();
    }
}

#[test]
fn basic_input_is_returned() {
    let x = with_s(3);
    let cell = BoxCell {
        coords: vec![Coord::unit(rat(0, 1))],
        lambda_vars: vec!["l1".into()],
        lambda: parse("0 <= l1 /\\ l1 <= s").unwrap(),
        weight: Some(Weight { r: int(1), c: LinearTerm::var("s").neg(), b: vec![int(0)] }),
    };
    let xi = single(&x, rat(2, 1), cell);
    let n = normalize_to_basic(&xi).unwrap();
    assert_eq!(n.ell, Int::one());
    assert_eq!(n.basic.presentation, xi);
    assert!(n.certificate.steps.is_empty());
}

#[test]
fn truncated_tail_normalization() {
    for p in [2, 3] {
        let x = with_s(p);
        let xi = single(&x, Rat::one(), weighted("0 <= l1 /\\ l1 < s", -1, -1));
        let n = normalize_to_basic(&xi).unwrap();
        verify_certificate(&n.certificate).unwrap();
        let ell = Rat::from_integer(n.ell.clone());
        for s in 0..=20 {
            let expect = (Rat::one() - pow_rat(&int(p), &int(-s))) / rat(p - 1, 1);
            assert_eq!(value_at(&n.basic.presentation, s), &ell * expect);
        }
        assert_eq!(decide_equal(&xi.scalar_mul(&ell), &n.basic.presentation).unwrap(), Equality::Equal);
    }
}

#[test]
fn divergence_is_reported() {
    let x = base(2);
    let xi = single(&x, Rat::one(), weighted("l1 >= 0", 0, 0));
    assert!(matches!(normalize_to_basic(&xi), Err(RingError::Diverges { generator: 0, .. })));
}

#[test]
fn certificates() {
    let x = base(3);
    let d = single(&x, Rat::one(), Presentation::delta_cell(2));
    let r4 = Step {
        rule: Rule::R4,
        before: d.clone(),
        after: d.multiply(&ball(&x, 0)).unwrap(),
        note: "times the unit ball".into(),
    };
    verify_certificate(&Certificate { steps: vec![r4.clone()] }).unwrap();
    let mut bad = r4;
    bad.after.generators[0].coeff = rat(2, 1);
    assert_eq!(verify_certificate(&Certificate { steps: vec![bad] }).unwrap_err().step, 0);
}

#[test]
fn documents_round_trip() {
    let x = with_s(5);
    let xi = single(&x, rat(-3, 2), weighted("0 <= l1 /\\ l1 < s", -1, -1)).add(&ball(&x, 2)).unwrap();
    let text = presentation_to_json(&xi);
    assert_eq!(presentation_from_json(&text).unwrap(), xi);
    let n = normalize_to_basic(&xi).unwrap();
    let c = certificate_to_json(&n.certificate);
    assert_eq!(certificate_from_json(&c).unwrap(), n.certificate);
    assert!(matches!(
        presentation_from_json(&text.replace("\"prime\": 5", "\"prime\": 4")),
        Err(DocumentError::Padic(_))
    ));
}

#[test]
fn rule_applications_preserve_measure() {
    use kzp::presburger::Atom;
    use kzp::ring::rules::RuleApp;
    let x = with_s(3);
    let cell = BoxCell {
        coords: vec![Coord::unit(rat(0, 1)), Coord::Box { center: rat(1, 2), level: 2, ac: int(4) }],
        lambda_vars: vec!["l1".into(), "l2".into()],
        lambda: parse("0 <= l1 /\\ l1 <= l2 /\\ l2 < s + 3").unwrap(),
        weight: None,
    };
    let mut xi = single(&x, rat(3, 2), cell);
    let apps = vec![
        RuleApp::Split { gen: 0, atom: Atom::Div(int(2), LinearTerm::var("l1")) },
        RuleApp::AddNull { coeff: rat(5, 1), point: rat(1, 3) },
        RuleApp::Translate { gen: 0, coord: 1, center: rat(-7, 1) },
        RuleApp::Rescale { gen: 1, coord: 0, ac: int(2) },
        RuleApp::Permute { gen: 0, perm: vec![1, 0] },
        RuleApp::RefineLevel { gen: 1, coord: 1 },
        RuleApp::Explicit { gen: 0 },
        RuleApp::Shear { gen: 0, a: 1, b: 0 },
        RuleApp::Shift { gen: 0, k: 2 },
        RuleApp::UnitBall { gen: 0 },
        RuleApp::Delta { gen: 1, n: 2 },
        RuleApp::Geometric { gen: 2, n: 1 },
    ];
    let mut steps = Vec::new();
    for a in &apps {
        let st = a.apply(&xi).unwrap();
        xi = st.after.clone();
        steps.push(st);
    }
    let cert = Certificate { steps };
    verify_certificate(&cert).unwrap();
    let first = cert.first().unwrap();
    assert_eq!(decide_equal(first, &xi).unwrap(), Equality::Equal);
}
