//! Acceptance gate: one PASS/FAIL line per criterion, each under 10 seconds.

#[path = "../../core/tests/common/mod.rs"]
mod common;
mod support;

use std::collections::{BTreeSet, HashMap};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::{plane_context, plane_leaves, random_point, sample_exprs, seeded_rng};
use jetlift::ideal::{is_member, orient, reduce, Ranking};
use jetlift::series::{
    h_condition, initial_values, ode_residual, series_of_expr, verify_h_condition,
};
use jetlift::{
    equal, eval_numeric, format_expr, jet_of_solution, lift, normalize, parse_expr, parse_problem,
    simplify, total_derivative, Atom, Equation, Error, Expr, JetContext, Mapping, Rational, Value,
};
use rand::Rng;
use support::{fixtures, golden_matches, jetlift, json};

const BUDGET: Duration = Duration::from_secs(10);

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn defined(e: &Expr) -> bool {
    !matches!(normalize(e), Err(Error::DivisionByZero))
}

fn eval_at(e: &Expr, pt: &HashMap<Atom, Rational>) -> Option<Value> {
    eval_numeric(e, pt).ok()
}

fn ring_laws() -> Outcome {
    let mut exprs: Vec<Expr> = Vec::new();
    let mut seed = 0u8;
    while exprs.len() < 201 {
        exprs.extend(
            sample_exprs(plane_leaves(), 120, seed)
                .into_iter()
                .filter(defined),
        );
        seed += 1;
    }
    exprs.truncate(201);
    let mut rng = seeded_rng(42);
    let mut distinct_pairs = 0;
    for (i, pair) in exprs.windows(2).enumerate() {
        let (a, b) = (&pair[0], &pair[1]);
        let dxy = total_derivative(&total_derivative(a, 0), 1);
        let dyx = total_derivative(&total_derivative(a, 1), 0);
        check(equal(&dxy, &dyx).unwrap(), || {
            format!("D_x D_y != D_y D_x on #{i}")
        })?;
        for k in 0..2 {
            let leibniz = total_derivative(&(a * b), k)
                - (total_derivative(a, k) * b + a * total_derivative(b, k));
            check(normalize(&leibniz).unwrap().is_zero(), || {
                format!("Leibniz fails on #{i}")
            })?;
            let c = Expr::rational(-3, 7);
            let lin = total_derivative(&(&c * a + b), k)
                - (&c * total_derivative(a, k) + total_derivative(b, k));
            check(normalize(&lin).unwrap().is_zero(), || {
                format!("linearity fails on #{i}")
            })?;
        }
        let once = simplify(a).unwrap();
        check(simplify(&once).unwrap() == once, || {
            format!("normalize not idempotent on #{i}")
        })?;

        // equal must agree with numeric evaluation, both ways
        let atoms: BTreeSet<Atom> = a.atoms().into_iter().chain(b.atoms()).collect();
        let same = equal(a, b).unwrap();
        let mut differs = false;
        for _ in 0..20 {
            let pt = random_point(&atoms, &mut rng);
            if let (Some(x), Some(y)) = (eval_at(a, &pt), eval_at(&once, &pt)) {
                check(x.agrees_with(&y, 1e-9), || {
                    format!("#{i} and its normal form differ numerically")
                })?;
            }
            if let (Some(x), Some(y)) = (eval_at(a, &pt), eval_at(b, &pt)) {
                if same {
                    check(x.agrees_with(&y, 1e-9), || {
                        format!("equal(#{i}, #{}) but values differ", i + 1)
                    })?;
                }
                differs |= !x.agrees_with(&y, 1e-9);
            }
        }
        if !same && differs {
            distinct_pairs += 1;
        }
    }
    Ok(format!(
        "200 expressions, {distinct_pairs} unequal pairs separated numerically"
    ))
}

fn lifting() -> Outcome {
    let ctx = JetContext::new(&["t", "x"], &["u"]).unwrap();
    let id = lift(&Mapping::identity(&ctx), 3).unwrap();
    for (j, alpha, e) in id.components() {
        let atom = Expr::atom(Atom::Dependent {
            var: j,
            alpha: alpha.clone(),
        });
        check(equal(e, &atom).unwrap(), || {
            format!("identity lift changes {}", format_expr(&atom, &ctx))
        })?;
    }

    let target = JetContext::new(&["t", "y"], &["v"]).unwrap();
    let p = |s: &str| parse_expr(s, &ctx).unwrap();
    let m = Mapping::new(
        ctx.clone(),
        target,
        vec![p("t"), p("2*x^(1/2)")],
        vec![p("x*u[x] - u")],
    )
    .unwrap();
    let lifted = lift(&m, 3).unwrap();
    let jet = jet_of_solution(&[p("x^2 + x*t^2")], 2, 4).unwrap();
    let mut rng = seeded_rng(5);
    let mut compared = 0;
    for _ in 0..5 {
        // x a perfect square keeps y = 2 sqrt(x) rational
        let t = Rational::new(rng.gen_range(1..=9).into(), rng.gen_range(1..=4).into());
        let r = Rational::new(rng.gen_range(1..=9).into(), rng.gen_range(1..=4).into());
        let y = Rational::from_integer(2.into()) * &r;
        let pt: HashMap<Atom, Rational> =
            [(Atom::Independent(0), t), (Atom::Independent(1), &r * &r)].into();
        for (_, alpha, e) in lifted.components() {
            let (a, b) = (alpha.entries()[0], alpha.entries()[1] as i32);
            // v = y^4/16 differentiated b times in y and a times in t
            let expected = if a > 0 || b > 4 {
                Rational::from_integer(0.into())
            } else {
                let falling: i64 = (0..b as i64).map(|k| 4 - k).product();
                (0..4 - b).fold(Rational::new(falling.into(), 16.into()), |acc, _| acc * &y)
            };
            let got = eval_numeric(&e.substitute(&jet), &pt).unwrap();
            check(
                got.agrees_with(&Value::Exact(expected.clone()), 1e-9),
                || {
                    format!(
                        "component {:?} gives {got}, expected {expected}",
                        alpha.entries()
                    )
                },
            )?;
            compared += 1;
        }
    }
    Ok(format!(
        "identity to order 3; {compared} component values at 5 points"
    ))
}

fn burgers_rational() -> Outcome {
    let run = jetlift(&["param-verify", "burgers_rational.problem", "--json"]);
    check(run.code == 0, || {
        format!("exit {}: {}", run.code, run.stderr)
    })?;
    let r = json(&run);
    let residuals = r["residuals"].as_array().unwrap();
    check(residuals.len() == 7, || {
        format!("{} residuals", residuals.len())
    })?;
    check(residuals.iter().all(|x| x["normal_form"] == "0"), || {
        "nonzero coefficient".into()
    })?;
    Ok("a^0..a^6 coefficients reduce to 0".into())
}

fn burgers_context() -> (JetContext, jetlift::OrientedSystem) {
    let c = JetContext::new(&["x", "y"], &["u"])
        .unwrap()
        .with_parameters(&["a", "s0", "s1", "s2", "s3", "s4", "s5"])
        .unwrap();
    let p = |s: &str| parse_expr(s, &c).unwrap();
    let sys = orient(
        &[Equation::new(p("u[y]"), p("u[x,x] + u*u[x]"))],
        &c,
        Ranking::default_for(2),
    )
    .unwrap();
    (c, sys)
}

fn h_conditions() -> Outcome {
    let (c, sys) = burgers_context();
    let p = |s: &str| parse_expr(s, &c).unwrap();
    let family = "s0 + a*(s1*(2*u[x] + u^2) + s2*u + s3*(y*u + x) + s4*(2*y*u[x] + y*u^2 + x*u))";
    for h in ["1 + a*u", family] {
        check(is_member(&h_condition(&p(h), &c), &sys).unwrap(), || {
            format!("{h} fails the condition")
        })?;
        check(
            verify_h_condition(&p(h), &sys, 0).unwrap().is_verified(),
            || format!("{h} fails end to end"),
        )?;
    }
    let wrong = p(&format!(
        "{family} + a*s5*(y^2*(4*u[x] + 2*u^2) + 2*x*y*u + x^2 + 2*y)"
    ));
    let residual = reduce(&h_condition(&wrong, &c), &sys).unwrap();
    check(!is_member(&h_condition(&wrong, &c), &sys).unwrap(), || {
        "wrong s5 term passes".into()
    })?;
    check(
        equal(&residual, &p("a*s5*2*y*(2*u[x] + u^2)")).unwrap(),
        || format!("wrong s5 residual is {}", format_expr(&residual, &c)),
    )?;
    let good = p(&format!(
        "{family} + a*s5*(y^2*(2*u[x] + u^2) + 2*x*y*u + x^2 + 2*y)"
    ));
    check(is_member(&h_condition(&good, &c), &sys).unwrap(), || {
        "good s5 term fails".into()
    })?;
    let wrong_run = jetlift(&["param-verify", "h_family_wrong_s5.problem"]);
    let good_run = jetlift(&["param-verify", "h_family.problem"]);
    check(wrong_run.code == 1 && good_run.code == 0, || {
        "CLI exit codes".into()
    })?;
    Ok(format!("wrong s5 residual {}", format_expr(&residual, &c)))
}

fn determining_equations() -> Outcome {
    let text = std::fs::read_to_string(fixtures().join("wave_ansatz.problem")).unwrap();
    let problem = parse_problem(&text).unwrap();
    let c = &problem.context;
    let run = jetlift(&[
        "det-eqs",
        "--top",
        "u[x,x,x],u[x,x],u[x],u",
        "wave_ansatz.problem",
        "--json",
    ]);
    check(run.code == 0, || {
        format!("exit {}: {}", run.code, run.stderr)
    })?;
    let r = json(&run);
    let eqs = r["equations"].as_array().unwrap();
    let monomials: Vec<&str> = eqs
        .iter()
        .map(|e| e["monomial"].as_str().unwrap())
        .collect();
    check(monomials == ["u[x,x,x]", "u[x,x]", "u[x]", "u"], || {
        format!("monomials {monomials:?}")
    })?;
    let p = |s: &str| parse_expr(s, c).unwrap();
    let coeff = |i: usize| p(eqs[i]["coefficient"].as_str().unwrap());
    // the fixture uses x^3 as the wave speed
    check(
        equal(&(coeff(0) * p("h'(x)^2")), &p("f(x)*(x^3*h'(x)^2 - 1)")).unwrap(),
        || "u[x,x,x] coefficient".into(),
    )?;
    let scaled = coeff(3) * p("-h(x)*h'(x)^3");
    let expected = p("m*h'(x)^2*g'(x) + h(x)*h'(x)*g''(x) - h(x)*h''(x)*g'(x)");
    check(equal(&scaled, &expected).unwrap(), || {
        "u coefficient".into()
    })?;
    let explicit = jetlift(&[
        "det-eqs",
        "--top",
        "u[x,x,x],u[x,x],u[x],u",
        "wave_ansatz_explicit.problem",
        "--json",
    ]);
    let zeros = json(&explicit)["equations"]
        .as_array()
        .unwrap()
        .iter()
        .all(|e| e["coefficient"] == "0");
    check(zeros, || "explicit ansatz leaves nonzero equations".into())?;
    Ok("4 equations; u[x,x,x] and u relations hold".into())
}

fn verify_map() -> Outcome {
    let good = jetlift(&["verify-map", "wave_map.problem", "--json"]);
    let bad = jetlift(&["verify-map", "wave_map_wrong.problem", "--json"]);
    check(good.code == 0, || format!("derived map exit {}", good.code))?;
    check(bad.code == 1, || format!("wrong map exit {}", bad.code))?;
    check(json(&bad)["residuals"][0]["normal_form"] != "0", || {
        "no nonzero residual".into()
    })?;
    golden_matches("verify_wave_map", &good.stdout)?;
    golden_matches("verify_wave_map_wrong", &bad.stdout)?;
    Ok("VERIFIED/FALSIFIED, golden files match".into())
}

fn series_ode() -> Outcome {
    let (c, _) = burgers_context();
    let p = |s: &str| parse_expr(s, &c).unwrap();
    let ubar = series_of_expr(&p("u + 2*a*u[x]*(a*u + 1)^(-1)"), "a", 6).unwrap();
    let r = ode_residual(&ubar).unwrap();
    check(r.trunc() == 4, || format!("truncated at a^{}", r.trunc()))?;
    check(
        r.coeffs().iter().all(|x| normalize(x).unwrap().is_zero()),
        || "ODE residual nonzero".into(),
    )?;
    let (_, slope) = initial_values(&ubar).unwrap();
    check(equal(&slope, &p("2*u[x]")).unwrap(), || {
        format!("slope {}", format_expr(&slope, &c))
    })?;
    let notes = json(&jetlift(&[
        "param-verify",
        "burgers_rational.problem",
        "--json",
    ]))["notes"]
        .clone();
    check(
        notes
            .as_array()
            .unwrap()
            .iter()
            .any(|n| n == "dubar/da|a=0 = 2*u[x]"),
        || "slope not reported".into(),
    )?;
    Ok("zero through a^4; initial slope 2*u[x], not u[x]".into())
}

fn formula_fixtures() -> Outcome {
    let bad = common::formulas::prolongation_mismatches();
    check(bad.is_empty(), || format!("mismatched: {}", bad.join(", ")))?;
    Ok("p1 q1 p2 q2 p3 q3 r1 s1 t1 r2 s2 t2".into())
}

fn parser() -> Outcome {
    let c = plane_context();
    let exprs: Vec<Expr> = sample_exprs(plane_leaves(), 160, 99)
        .into_iter()
        .filter(defined)
        .take(100)
        .collect();
    check(exprs.len() == 100, || "not enough samples".into())?;
    for e in &exprs {
        let text = format_expr(e, &c);
        let back = parse_expr(&text, &c).map_err(|err| format!("{text}: {err}"))?;
        check(equal(&back, e).unwrap(), || {
            format!("round trip changes {text}")
        })?;
    }
    let mut files: Vec<String> = std::fs::read_dir(fixtures())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.starts_with("malformed_"))
        .collect();
    files.sort();
    check(!files.is_empty(), || "no malformed fixtures".into())?;
    for f in &files {
        let run = jetlift(&["verify-map", f]);
        check(run.code == 2, || format!("{f}: exit {}", run.code))?;
        let positioned = run.stderr.split_once(&format!("{f}:")).map(|(_, rest)| {
            let mut parts = rest.splitn(3, ':');
            let line = parts.next().and_then(|l| l.parse::<usize>().ok());
            let col = parts.next().and_then(|l| l.parse::<usize>().ok());
            line.is_some()
                && col.is_some()
                && parts.next().is_some_and(|m| m.starts_with(" syntax error"))
        });
        check(positioned == Some(true), || format!("{f}: {}", run.stderr))?;
    }
    let expr = jetlift(&["reduce", "--expr", "u[y] + * u", "burgers_rational.problem"]);
    check(
        expr.code == 2 && expr.stderr.contains("--expr:1:8: syntax error"),
        || expr.stderr.clone(),
    )?;
    Ok(format!(
        "100 round trips; {} malformed files positioned",
        files.len()
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("differential-ring laws", ring_laws),
        ("lifting correctness", lifting),
        ("Burgers parametric symmetry", burgers_rational),
        ("h-condition suite", h_conditions),
        ("determining equations", determining_equations),
        ("end-to-end verify-map", verify_map),
        ("series ODE in the group parameter", series_ode),
        ("prolongation formula fixtures", formula_fixtures),
        ("parser round trip and diagnostics", parser),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| Err("panicked".into()));
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > BUDGET => Err(format!("took {:.1} s", elapsed.as_secs_f64())),
            other => other,
        };
        let (tag, detail) = match &result {
            Ok(d) => ("PASS", d.clone()),
            Err(e) => {
                failed += 1;
                ("FAIL", e.clone())
            }
        };
        println!(
            "criterion {} {tag} [{:.2} s] {name}: {detail}",
            i + 1,
            elapsed.as_secs_f64()
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
