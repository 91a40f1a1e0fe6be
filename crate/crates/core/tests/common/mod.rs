//! Random expression generators shared by the property tests and the
//! acceptance harness.

#![allow(dead_code)]

pub mod formulas;

use std::collections::{BTreeSet, HashMap};

use jetlift::{Atom, Expr, JetContext, Rational};
use proptest::prelude::*;
use proptest::strategy::ValueTree;
use proptest::test_runner::{Config, RngAlgorithm, RngSeed, TestRng, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(x, y; u)` with parameter `a` and function `f(x)`, the Burgers setting.
pub fn plane_context() -> JetContext {
    JetContext::new(&["x", "y"], &["u"])
        .unwrap()
        .with_parameters(&["a"])
        .unwrap()
        .with_function("f", "x")
        .unwrap()
}

pub fn plane_leaves() -> Vec<Expr> {
    let c = plane_context();
    vec![
        Expr::indep(0),
        Expr::indep(1),
        c.u(0, &[0, 0]),
        c.u(0, &[1, 0]),
        c.u(0, &[0, 1]),
        c.u(0, &[2, 0]),
        c.u(0, &[1, 1]),
        Expr::param("a"),
        Expr::func("f", 0, 0),
        Expr::func("f", 0, 1),
    ]
}

fn leaf(atoms: Vec<Expr>) -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i64..=3, 1i64..=3).prop_map(|(n, d)| Expr::rational(n, d)),
        proptest::sample::select(atoms.clone()),
        proptest::sample::select(atoms),
    ]
}

/// Expressions of depth at most 6 over `atoms`. Fractional powers and logs
/// only ever see arguments of the form `e^2 + 1`.
pub fn expr_strategy(atoms: Vec<Expr>) -> impl Strategy<Value = Expr> {
    expr_strategy_with_depth(atoms, 6)
}

pub fn expr_strategy_with_depth(atoms: Vec<Expr>, depth: u32) -> impl Strategy<Value = Expr> {
    leaf(atoms).prop_recursive(depth, 24, 3, |inner| {
        prop_oneof![
            3 => proptest::collection::vec(inner.clone(), 2..=3).prop_map(Expr::sum),
            3 => proptest::collection::vec(inner.clone(), 2..=3).prop_map(Expr::product),
            1 => (inner.clone(), proptest::sample::select(vec![2i64, -1])).prop_map(|(e, k)| Expr::powi(e, k)),
            1 => (inner.clone(), proptest::sample::select(vec![(1i64, 2i64), (-1, 2), (1, 3)]))
                .prop_map(|(e, (n, d))| Expr::pow(&e * &e + Expr::one(), Rational::new(n.into(), d.into()))),
            1 => inner.prop_map(|e| Expr::log(&e * &e + Expr::one())),
        ]
    })
}

/// Fixed-seed proptest configuration, so runs are reproducible.
pub fn config(cases: u32) -> Config {
    Config {
        cases,
        rng_seed: RngSeed::Fixed(0x6a65_746c),
        failure_persistence: None,
        ..Config::default()
    }
}

/// `count` expressions drawn deterministically from [`expr_strategy`].
pub fn sample_exprs(atoms: Vec<Expr>, count: usize, seed: u8) -> Vec<Expr> {
    let rng = TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]);
    let mut runner = TestRunner::new_with_rng(Config::default(), rng);
    let strategy = expr_strategy(atoms);
    (0..count)
        .map(|_| strategy.new_tree(&mut runner).unwrap().current())
        .collect()
}

/// Positive rational values for every atom in `atoms`.
pub fn random_point(atoms: &BTreeSet<Atom>, rng: &mut ChaCha8Rng) -> HashMap<Atom, Rational> {
    atoms
        .iter()
        .map(|a| {
            let n: i64 = rng.gen_range(1..=13);
            let d: i64 = rng.gen_range(1..=7);
            (a.clone(), Rational::new(n.into(), d.into()))
        })
        .collect()
}

pub fn seeded_rng(seed: u8) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed.into())
}
