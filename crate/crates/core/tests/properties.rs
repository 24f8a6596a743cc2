//! Property tests. Each case draws a seed and builds its instance with the
//! shared generators.

mod common;

use std::collections::BTreeMap;

use common::*;
use kzp::num::{int, Int, Rat};
use kzp::oracle::{brute_force_qe, truncated_measure};
use kzp::padic::{exp_poly_is_zero, ExpPolynomial, ZeroTest};
use kzp::presburger::{equivalent_on_box, evaluate_qf, parse, qe};
use kzp::ring::*;
use kzp::semilinear::{count_parametric, enumerate_fiber, rectilinearize, to_cells};
use kzp::{Formula, LinearTerm};
use num_traits::Zero;
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn env(map: &BTreeMap<String, Int>) -> impl Fn(&str) -> Option<Int> + '_ {
    move |v| map.get(v).cloned()
}

fn random_point(r: &mut R, vars: &[String], lo: i64, hi: i64) -> BTreeMap<String, Int> {
    vars.iter().map(|v| (v.clone(), int(r.gen_range(lo..=hi)))).collect()
}

fn sample_params(r: &mut R, x: &Presentation, count: usize) -> Vec<BTreeMap<String, Int>> {
    if x.param_vars.is_empty() {
        return vec![BTreeMap::new()];
    }
    (0..count).map(|_| random_point(r, &x.param_vars, 0, 12)).collect()
}

fn value(x: &Presentation, pt: &BTreeMap<String, Int>) -> Rat {
    measure_function(x).unwrap().eval(pt).unwrap()
}

fn small_presentation(r: &mut R, max_gens: usize) -> Presentation {
    let p = *PRIMES.choose(r).unwrap();
    let base = if r.gen_bool(0.5) { presentation(p, &["s"], "s >= 0") } else { presentation(p, &[], "true") };
    random_presentation(r, &base, max_gens, 2)
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn qe_matches_brute_force(seed in any::<u64>()) {
        let mut r = rng(seed);
        let (k, q) = *[(1, 1), (2, 1), (1, 2), (0, 2), (2, 2), (0, 3)].choose(&mut r).unwrap();
        let f = random_formula(&mut r, k, q);
        let g = qe(&f);
        prop_assert!(g.is_quantifier_free());
        let table = brute_force_qe(&f, 6).unwrap();
        prop_assert!(table.agrees_with(&g).unwrap(), "{} vs {}", f, g);
    }

    #[test]
    fn qe_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = r.gen_range(1..=2);
        let f = random_formula(&mut r, 2, q);
        let once = qe(&f);
        prop_assert!(equivalent_on_box(&qe(&once), &once, 10).unwrap());
    }

    #[test]
    fn printing_round_trips(seed in any::<u64>()) {
        let mut r = rng(seed);
        let q = r.gen_range(0..=2);
        let f = random_formula(&mut r, 3, q);
        let text = f.to_string();
        let g = parse(&text).unwrap();
        prop_assert_eq!(g.to_string(), text);
        let free = names(&["a", "b", "c"]);
        for _ in 0..20 {
            let pt = random_point(&mut r, &free, -20, 20);
            if f.is_quantifier_free() {
                prop_assert_eq!(evaluate_qf(&f, &pt).unwrap(), evaluate_qf(&g, &pt).unwrap());
            }
        }
        prop_assert!(equivalent_on_box(&qe(&f), &qe(&g), 6).unwrap());
    }

    #[test]
    fn cells_are_disjoint_and_complete(seed in any::<u64>()) {
        let mut r = rng(seed);
        let params = if r.gen_bool(0.5) { names(&["s"]) } else { Vec::new() };
        let vars = default_lambda_vars(r.gen_range(1..=3));
        let finite = r.gen_bool(0.5);
        let f = lambda(&mut r, &vars, &params, finite);
        let cells = to_cells(&f, &vars, &params);
        let mut all = params.clone();
        all.extend(vars.iter().cloned());
        for _ in 0..300 {
            let mut pt = random_point(&mut r, &vars, -15, 15);
            pt.extend(random_point(&mut r, &params, -10, 10));
            let hits = cells.iter().filter(|c| c.contains(&env(&pt))).count();
            prop_assert!(hits <= 1, "{hits} cells contain {pt:?}");
            prop_assert_eq!(hits == 1, evaluate_qf(&f, &pt).unwrap(), "membership at {:?}", pt);
        }
    }

    #[test]
    fn counting_matches_enumeration(seed in any::<u64>()) {
        let mut r = rng(seed);
        let params = names(&["s"]);
        let vars = default_lambda_vars(r.gen_range(1..=2));
        let f = lambda(&mut r, &vars, &params, true);
        let cells = to_cells(&f, &vars, &params);
        let count = count_parametric(&cells, &parse("s >= 0").unwrap()).unwrap();
        for s in 0..=15 {
            let fiber = enumerate_fiber(&cells, &[("s".to_string(), int(s))], 1 << 16).unwrap();
            let got = count.eval(&|v| (v == "s").then(|| int(s)));
            prop_assert_eq!(got, Some(Rat::from_integer(Int::from(fiber.len()))));
        }
    }

    #[test]
    fn rectilinear_images_are_injective(seed in any::<u64>()) {
        let mut r = rng(seed);
        let vars = default_lambda_vars(r.gen_range(1..=3));
        let f = lambda(&mut r, &vars, &[], false);
        let pieces = rectilinearize(&to_cells(&f, &vars, &[])).unwrap();
        for pc in &pieces {
            let m = pc.dims();
            if m == 0 {
                continue;
            }
            for _ in 0..200 {
                let a: Vec<Int> = (0..m).map(|_| int(r.gen_range(0..=12))).collect();
                let mut b = a.clone();
                let j = r.gen_range(0..m);
                b[j] += int(r.gen_range(1..=5));
                b.shuffle(&mut r);
                if a == b {
                    continue;
                }
                let none = |_: &str| None;
                prop_assert_ne!(pc.image(&a, &none), pc.image(&b, &none));
            }
        }
    }

    #[test]
    fn zero_test_is_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = small_presentation(&mut r, 2);
        let y = random_presentation(&mut r, &x, 2, 2);
        let diff = measure_function(&x.sub(&y).unwrap()).unwrap();
        match exp_poly_is_zero(&diff.expr, &x.param_domain, &x.ctx) {
            ZeroTest::NonZero(w) => {
                let pt: BTreeMap<String, Int> = w.into_iter().collect();
                prop_assert!(!diff.eval(&pt).unwrap().is_zero());
            }
            ZeroTest::Zero => {
                for pt in sample_params(&mut r, &x, 10) {
                    prop_assert!(diff.eval(&pt).unwrap().is_zero());
                }
            }
        }
        let self_diff = measure_function(&x.sub(&x).unwrap()).unwrap();
        prop_assert_eq!(self_diff.is_zero(), ZeroTest::Zero);
    }

    #[test]
    fn canonical_form_is_idempotent(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = small_presentation(&mut r, 3);
        let raw = ExpPolynomial {
            terms: x
                .generators
                .iter()
                .flat_map(|g| cell_measure(&g.cell, &x.param_domain, &x.ctx).unwrap().terms)
                .collect(),
        };
        let once = raw.canonical();
        prop_assert_eq!(once.canonical(), once.clone());
        let p = x.p().clone();
        for pt in sample_params(&mut r, &x, 5) {
            prop_assert_eq!(raw.eval_or_zero(&env(&pt), &p).unwrap(), once.eval_or_zero(&env(&pt), &p).unwrap());
        }
    }

    #[test]
    fn smaller_weights_give_smaller_measures(seed in any::<u64>()) {
        let mut r = rng(seed);
        let p = *PRIMES.choose(&mut r).unwrap();
        let x = presentation(p, &["s"], "s >= 0");
        let n = r.gen_range(1..=2);
        let mut hi = cell(&mut r, p, n, &x.param_vars, false);
        let w = weight(&mut r, n, &x.param_vars, false).unwrap_or_else(|| kzp::padic::Weight {
            r: int(1),
            c: LinearTerm::zero(),
            b: vec![int(-1); n],
        });
        hi.weight = Some(w.clone());
        let nonneg = hi.lambda_vars.iter().map(|v| Formula::geq(LinearTerm::var(v)));
        hi.lambda = Formula::and(std::iter::once(hi.lambda.clone()).chain(nonneg));
        let mut lo = hi.clone();
        let mut lw = w;
        for b in &mut lw.b {
            *b -= int(r.gen_range(0..=2));
        }
        lw.c = lw.c.add_constant(&int(-r.gen_range(0..=2)));
        lo.weight = Some(lw);
        let xh = x.with_generators(vec![Generator { coeff: Rat::from_integer(int(1)), cell: hi }]);
        let xl = x.with_generators(vec![Generator { coeff: Rat::from_integer(int(1)), cell: lo }]);
        for pt in sample_params(&mut r, &x, 10) {
            prop_assert!(value(&xl, &pt) <= value(&xh, &pt));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, ..ProptestConfig::default() })]

    #[test]
    fn ring_laws_hold_pointwise(seed in any::<u64>()) {
        let mut r = rng(seed);
        let a = small_presentation(&mut r, 2);
        let b = random_presentation(&mut r, &a, 2, 2);
        let c = random_presentation(&mut r, &a, 1, 1);
        let sum = a.add(&b).unwrap();
        let prod = a.multiply(&b).unwrap();
        let dist = a.multiply(&b.add(&c).unwrap()).unwrap();
        for pt in sample_params(&mut r, &a, 10) {
            let (va, vb, vc) = (value(&a, &pt), value(&b, &pt), value(&c, &pt));
            prop_assert_eq!(value(&sum, &pt), &va + &vb);
            prop_assert_eq!(value(&prod, &pt), &va * &vb);
            prop_assert_eq!(value(&dist, &pt), &va * (&vb + &vc));
        }
    }

    #[test]
    fn normalization_is_sound(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = small_presentation(&mut r, 3);
        let out = normalize_to_basic(&x).unwrap();
        let scaled = x.scalar_mul(&Rat::from_integer(out.ell.clone()));
        prop_assert_eq!(decide_equal(&scaled, &out.basic.presentation).unwrap(), Equality::Equal);
        prop_assert!(verify_certificate(&out.certificate).is_ok());
        prop_assert!(BasicPresentation::certify(&out.basic.presentation).is_ok());
    }

    #[test]
    fn certificate_mutations_are_caught(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = small_presentation(&mut r, 2);
        let out = normalize_to_basic(&x).unwrap();
        let mut cert = out.certificate;
        prop_assume!(!cert.steps.is_empty());
        let i = r.gen_range(0..cert.steps.len());
        let step = &mut cert.steps[i];
        let target = if r.gen_bool(0.5) { &mut step.before } else { &mut step.after };
        let probe = target.clone();
        let live: Vec<usize> = (0..probe.generators.len())
            .filter(|&j| {
                let one = probe.with_generators(vec![probe.generators[j].clone()]);
                measure_function(&one).unwrap().is_zero() != ZeroTest::Zero
            })
            .collect();
        prop_assume!(!live.is_empty());
        let j = *live.choose(&mut r).unwrap();
        target.generators[j].coeff += coeff(&mut r);
        prop_assert!(verify_certificate(&cert).is_err());
    }

    #[test]
    fn oracle_contains_and_shrinks(seed in any::<u64>()) {
        let mut r = rng(seed);
        let x = small_presentation(&mut r, 2);
        for pt in sample_params(&mut r, &x, 2) {
            let exact = value(&x, &pt);
            let mut last: Option<Rat> = None;
            for k in [2, 4, 8] {
                let Ok(b) = truncated_measure(&x, &pt, k, 40, &x.ctx) else { continue };
                prop_assert!(b.contains(&exact), "{} outside {} at depth {}", exact, b, k);
                if let Some(w) = &last {
                    prop_assert!(&b.width() <= w);
                }
                last = Some(b.width());
            }
            let mut last: Option<Rat> = None;
            for v in [8, 16, 32] {
                let b = truncated_measure(&x, &pt, 8, v, &x.ctx);
                let Ok(b) = b else { continue };
                prop_assert!(b.contains(&exact));
                if let Some(w) = &last {
                    prop_assert!(&b.width() <= w);
                }
                last = Some(b.width());
            }
        }
    }
}

#[test]
fn count_of_a_triangle() {
    let vars = names(&["l1", "l2"]);
    let f = parse("0 <= l1 /\\ l1 <= l2 /\\ l2 <= s").unwrap();
    let cells = to_cells(&f, &vars, &names(&["s"]));
    let pp = count_parametric(&cells, &Formula::geq(LinearTerm::var("s"))).unwrap();
    for s in 0..10 {
        let got = pp.eval(&|v| (v == "s").then(|| int(s))).unwrap();
        assert_eq!(got, Rat::from_integer(int((s + 1) * (s + 2) / 2)));
    }
}
