//! Hand-derived first-order prolongation coefficients of a parametric
//! point mapping in the plane, checked against `prolong_param`.

use jetlift::series::{prolong_param, series_of_expr, ParamMapping};
use jetlift::{equal, parse_expr, total_derivative, Expr, MultiIndex};

use super::plane_context;

/// Names of the hand-derived coefficients that disagree with the engine.
pub fn prolongation_mismatches() -> Vec<String> {
    let ctx = plane_context();
    let e = |text: &str| parse_expr(text, &ctx).unwrap();
    let xs = ["0", "y*u", "x^2 + u", "u^2*y"].map(e);
    let ys = ["0", "x^2", "x*u", "y + u^3"].map(e);
    let us = ["0", "x*u^2", "y^2*u", "x*y"].map(e);
    let series = |coeffs: &[Expr], base: &str| {
        let mut s = e(base);
        for (i, c) in coeffs.iter().enumerate().skip(1) {
            s = s + c * Expr::powi(e("a"), i as i64);
        }
        series_of_expr(&s, "a", 3).unwrap()
    };
    let m = ParamMapping::new(
        &ctx,
        "a",
        vec![series(&xs, "x"), series(&ys, "y")],
        vec![series(&us, "u")],
    )
    .unwrap();
    let m = prolong_param(&m, 2).unwrap();
    let get = |alpha: [u32; 2], i: usize| {
        m.component(0, &MultiIndex::new(alpha.to_vec()))
            .unwrap()
            .coeff(i)
    };

    let (p, q, r, s, t) = (e("u[x]"), e("u[y]"), e("u[x,x]"), e("u[x,y]"), e("u[y,y]"));
    let dx = |e: &Expr| total_derivative(e, 0);
    let dy = |e: &Expr| total_derivative(e, 1);
    let p1 = dx(&us[1]) - &p * dx(&xs[1]) - &q * dx(&ys[1]);
    let q1 = dy(&us[1]) - &p * dy(&xs[1]) - &q * dy(&ys[1]);
    let p2 = dx(&us[2]) - &p * dx(&xs[2]) - &p1 * dx(&xs[1]) - &q * dx(&ys[2]) - &q1 * dx(&ys[1]);
    let q2 = dy(&us[2]) - &p * dy(&xs[2]) - &p1 * dy(&xs[1]) - &q * dy(&ys[2]) - &q1 * dy(&ys[1]);
    let p3 = dx(&us[3])
        - &p * dx(&xs[3])
        - &p1 * dx(&xs[2])
        - &p2 * dx(&xs[1])
        - &q * dx(&ys[3])
        - &q1 * dx(&ys[2])
        - &q2 * dx(&ys[1]);
    let q3 = dy(&us[3])
        - &p * dy(&xs[3])
        - &p1 * dy(&xs[2])
        - &p2 * dy(&xs[1])
        - &q * dy(&ys[3])
        - &q1 * dy(&ys[2])
        - &q2 * dy(&ys[1]);
    let r1 = dx(&p1) - &r * dx(&xs[1]) - &s * dx(&ys[1]);
    let s1 = dy(&p1) - &r * dy(&xs[1]) - &s * dy(&ys[1]);
    let t1 = dy(&q1) - &s * dy(&xs[1]) - &t * dy(&ys[1]);
    let r2 = dx(&p2) - &r * dx(&xs[2]) - &r1 * dx(&xs[1]) - &s * dx(&ys[2]) - &s1 * dx(&ys[1]);
    let s2 = dy(&p2) - &r * dy(&xs[2]) - &r1 * dy(&xs[1]) - &s * dy(&ys[2]) - &s1 * dy(&ys[1]);
    let t2 = dy(&q2) - &s * dy(&xs[2]) - &s1 * dy(&xs[1]) - &t * dy(&ys[2]) - &t1 * dy(&ys[1]);

    let checks = [
        ("p1", [1, 0], 1, p1),
        ("q1", [0, 1], 1, q1),
        ("p2", [1, 0], 2, p2),
        ("q2", [0, 1], 2, q2),
        ("p3", [1, 0], 3, p3),
        ("q3", [0, 1], 3, q3),
        ("r1", [2, 0], 1, r1),
        ("s1", [1, 1], 1, s1),
        ("t1", [0, 2], 1, t1),
        ("r2", [2, 0], 2, r2),
        ("s2", [1, 1], 2, s2),
        ("t2", [0, 2], 2, t2),
    ];
    checks
        .into_iter()
        .filter(|(_, alpha, i, expected)| !equal(&get(*alpha, *i), expected).unwrap())
        .map(|(name, ..)| name.to_string())
        .collect()
}
