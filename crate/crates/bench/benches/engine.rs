use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use kzp::num::{int, rat, Rat};
use kzp::oracle::truncated_measure;
use kzp::padic::{BoxCell, Coord, PAdicContext, Weight};
use kzp::presburger::{parse, qe};
use kzp::ring::{decide_equal, measure_function, normalize_to_basic, Generator, Presentation};
use kzp::semilinear::{count_parametric, to_cells};
use kzp::LinearTerm;

fn names(v: &[&str]) -> Vec<String> {
    v.iter().map(|s| s.to_string()).collect()
}

fn tail(p: i64) -> Presentation {
    let x = Presentation::zero(PAdicContext::new(p).unwrap(), names(&["s"]), parse("s >= 0").unwrap());
    let cell = BoxCell {
        coords: vec![Coord::unit(rat(0, 1)), Coord::unit(rat(1, 2))],
        lambda_vars: names(&["l1", "l2"]),
        lambda: parse("l1 >= 0 /\\ l2 >= l1 /\\ l2 <= l1 + s").unwrap(),
        weight: Some(Weight { r: int(1), c: LinearTerm::var("s"), b: vec![int(-2), int(-1)] }),
    };
    x.with_generators(vec![Generator { coeff: rat(3, 2), cell }])
}

fn delta(p: i64, n: usize) -> Presentation {
    let x = Presentation::zero(PAdicContext::new(p).unwrap(), Vec::new(), kzp::Formula::True);
    x.with_generators(vec![Generator { coeff: Rat::from_integer(int(1)), cell: Presentation::delta_cell(n) }])
}

fn presburger(c: &mut Criterion) {
    let f = parse("E x. E y. 2*x + 3*y = a /\\ x >= 0 /\\ y >= 0 /\\ x <= b").unwrap();
    c.bench_function("qe_two_quantifiers", |b| b.iter(|| qe(black_box(&f))));
    let tri = parse("0 <= l1 /\\ l1 <= l2 /\\ l2 <= s /\\ 2 | l1 + l2").unwrap();
    let cells = to_cells(&tri, &names(&["l1", "l2"]), &names(&["s"]));
    let dom = parse("s >= 0").unwrap();
    c.bench_function("count_parametric_triangle", |b| b.iter(|| count_parametric(black_box(&cells), &dom)));
}

fn ring(c: &mut Criterion) {
    let d3 = delta(5, 3);
    c.bench_function("measure_delta3", |b| b.iter(|| measure_function(black_box(&d3))));
    let t = tail(3);
    c.bench_function("measure_parametric_tail", |b| b.iter(|| measure_function(black_box(&t))));
    c.bench_function("normalize_parametric_tail", |b| b.iter(|| normalize_to_basic(black_box(&t))));
    let twice = t.add(&t).unwrap();
    let doubled = t.scalar_mul(&rat(2, 1));
    c.bench_function("decide_equal_tail", |b| b.iter(|| decide_equal(black_box(&twice), &doubled)));
}

fn oracle(c: &mut Criterion) {
    let t = tail(3);
    let pt: BTreeMap<String, _> = [("s".to_string(), int(4))].into();
    c.bench_function("truncated_measure_depth8", |b| b.iter(|| truncated_measure(black_box(&t), &pt, 8, 12, &t.ctx)));
}

criterion_group!(benches, presburger, ring, oracle);
criterion_main!(benches);
