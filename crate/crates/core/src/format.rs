//! Text rendering that re-parses with [`crate::parse::parse_expr`].

use num_traits::{One, Signed};

use crate::expr::{Atom, Expr, Rational};
use crate::jet::JetContext;

const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POWER: u8 = 4;
const ATOM: u8 = 5;

pub fn format_atom(a: &Atom, ctx: &JetContext) -> String {
    match a {
        Atom::Independent(i) => ctx
            .independents()
            .get(*i)
            .cloned()
            .unwrap_or_else(|| format!("x{i}")),
        Atom::Dependent { var, alpha } => {
            let name = ctx
                .dependents()
                .get(*var)
                .cloned()
                .unwrap_or_else(|| format!("u{var}"));
            if alpha.is_zero() {
                return name;
            }
            let mut parts = Vec::new();
            for (k, &count) in alpha.entries().iter().enumerate() {
                let x = ctx
                    .independents()
                    .get(k)
                    .cloned()
                    .unwrap_or_else(|| format!("x{k}"));
                parts.extend(std::iter::repeat_n(x, count as usize));
            }
            format!("{name}[{}]", parts.join(","))
        }
        Atom::Parameter(p) => p.to_string(),
        Atom::FuncDeriv { name, arg, order } => {
            let x = ctx
                .independents()
                .get(*arg)
                .cloned()
                .unwrap_or_else(|| format!("x{arg}"));
            if *order <= 3 {
                format!("{name}{}({x})", "'".repeat(*order as usize))
            } else {
                format!("diff({name},{x},{order})")
            }
        }
    }
}

pub fn format_expr(e: &Expr, ctx: &JetContext) -> String {
    render(e, ctx).0
}

fn rational_text(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

fn exponent_text(r: &Rational) -> String {
    if r.is_integer() && !r.is_negative() {
        r.numer().to_string()
    } else {
        format!("({})", rational_text(r))
    }
}

fn wrap(text: (String, u8), min: u8) -> String {
    if text.1 < min {
        format!("({})", text.0)
    } else {
        text.0
    }
}

/// Splits a leading negative constant off a term, for `a - b` rendering.
fn negated(e: &Expr) -> Option<Expr> {
    match e {
        Expr::Constant(c) if c.is_negative() => Some(Expr::Constant(-c)),
        Expr::Product(fs) => match fs.first() {
            Some(Expr::Constant(c)) if c.is_negative() => {
                let mut rest: Vec<Expr> = fs.iter().skip(1).cloned().collect();
                rest.insert(0, Expr::Constant(-c));
                Some(Expr::product(rest))
            }
            _ => None,
        },
        _ => None,
    }
}

/// Returns the text and its precedence level.
fn render(e: &Expr, ctx: &JetContext) -> (String, u8) {
    match e {
        Expr::Constant(c) => {
            if c.is_negative() {
                (format!("-{}", rational_text(&-c)), UNARY)
            } else if c.is_integer() {
                (rational_text(c), ATOM)
            } else {
                // "3/2" binds as one literal, but not as a power base
                (rational_text(c), POWER)
            }
        }
        Expr::Atomic(a) => (format_atom(a, ctx), ATOM),
        Expr::Sum(ts) => {
            let mut out = String::new();
            for (i, t) in ts.iter().enumerate() {
                match negated(t) {
                    Some(pos) => {
                        out.push('-');
                        out.push_str(&wrap(render(&pos, ctx), PRODUCT));
                    }
                    None => {
                        if i > 0 {
                            out.push('+');
                        }
                        out.push_str(&wrap(render(t, ctx), PRODUCT));
                    }
                }
            }
            (out, SUM)
        }
        Expr::Product(fs) => {
            let mut parts = Vec::new();
            let mut sign = "";
            for (i, f) in fs.iter().enumerate() {
                if i == 0 {
                    if let Expr::Constant(c) = f {
                        if c.is_negative() {
                            sign = "-";
                            if !(-c).is_one() {
                                parts.push(wrap(render(&Expr::Constant(-c), ctx), POWER));
                            }
                            continue;
                        }
                    }
                }
                parts.push(wrap(render(f, ctx), POWER));
            }
            if parts.is_empty() {
                parts.push("1".into());
            }
            let body = parts.join("*");
            if sign.is_empty() {
                (body, PRODUCT)
            } else {
                (format!("-{body}"), UNARY)
            }
        }
        Expr::Power(b, r) => {
            let base = wrap(render(b, ctx), ATOM);
            (format!("{base}^{}", exponent_text(r)), POWER)
        }
        Expr::Log(a) => (format!("log({})", render(a, ctx).0), ATOM),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::normal::equal;
    use crate::parse::parse_expr;

    fn ctx() -> JetContext {
        JetContext::new(&["x", "y"], &["u"])
            .unwrap()
            .with_parameters(&["a"])
            .unwrap()
            .with_function("f", "x")
            .unwrap()
    }

    #[test]
    fn reciprocal_of_linear_form() {
        let c = ctx();
        let e = Expr::powi(Expr::param("a") * c.u(0, &[0, 0]) + Expr::one(), -1);
        assert_eq!(format_expr(&e, &c), "(a*u+1)^(-1)");
    }

    #[test]
    fn round_trips() {
        let c = ctx();
        for text in [
            "u[x]+x",
            "-3/2*x*u - u[x,y]^2",
            "x^(1/2) - (2/3)^(1/2)",
            "(-2)^(1/3) * f''(x) + diff(f,x,5)",
            "-(x+u)^(-2) * log(1 + a*u)",
            "x - -u",
            "2^(-1) * (u*(x-1))^3",
        ] {
            let e = parse_expr(text, &c).unwrap();
            let printed = format_expr(&e, &c);
            let back = parse_expr(&printed, &c).unwrap_or_else(|err| panic!("{printed}: {err}"));
            assert!(equal(&back, &e).unwrap(), "{text} -> {printed}");
        }
    }

    #[test]
    fn atom_names() {
        let c = ctx();
        assert_eq!(format_atom(&Atom::dep(0, vec![2, 1]), &c), "u[x,x,y]");
        assert_eq!(format_atom(&Atom::func("f", 0, 2), &c), "f''(x)");
        assert_eq!(format_atom(&Atom::func("f", 0, 4), &c), "diff(f,x,4)");
    }
}
