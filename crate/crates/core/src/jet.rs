//! Jet-space coordinates and the total derivatives `D_k`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, MultiIndex};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct FunctionDecl {
    pub name: String,
    /// Index of the independent variable the function depends on.
    pub arg: usize,
}

/// Names of the coordinates of a jet space `J^p(R^n, R^m)` together with the
/// symbolic parameters and unknown functions in scope.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct JetContext {
    independents: Vec<String>,
    dependents: Vec<String>,
    parameters: Vec<String>,
    functions: Vec<FunctionDecl>,
}

impl JetContext {
    pub fn new<S: AsRef<str>>(independents: &[S], dependents: &[S]) -> Result<Self> {
        let ctx = JetContext {
            independents: independents
                .iter()
                .map(|s| s.as_ref().to_string())
                .collect(),
            dependents: dependents.iter().map(|s| s.as_ref().to_string()).collect(),
            parameters: Vec::new(),
            functions: Vec::new(),
        };
        if ctx.independents.is_empty() || ctx.dependents.is_empty() {
            return Err(Error::Unsupported(
                "a jet space needs at least one independent and one dependent variable".into(),
            ));
        }
        ctx.check_disjoint()?;
        Ok(ctx)
    }

    pub fn with_parameters<S: AsRef<str>>(mut self, params: &[S]) -> Result<Self> {
        self.parameters
            .extend(params.iter().map(|s| s.as_ref().to_string()));
        self.check_disjoint()?;
        Ok(self)
    }

    pub fn with_function(mut self, name: &str, arg: &str) -> Result<Self> {
        let arg = self.independent_index(arg).ok_or_else(|| {
            Error::Unsupported(format!(
                "function argument {arg} is not an independent variable"
            ))
        })?;
        self.functions.push(FunctionDecl {
            name: name.to_string(),
            arg,
        });
        self.check_disjoint()?;
        Ok(self)
    }

    /// Same parameters and functions, different coordinate names.
    pub fn renamed<S: AsRef<str>>(&self, independents: &[S], dependents: &[S]) -> Result<Self> {
        let mut ctx = JetContext::new(independents, dependents)?;
        ctx.parameters = self.parameters.clone();
        ctx.functions = self.functions.clone();
        ctx.check_disjoint()?;
        Ok(ctx)
    }

    fn check_disjoint(&self) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        let names = self
            .independents
            .iter()
            .chain(&self.dependents)
            .chain(&self.parameters)
            .chain(self.functions.iter().map(|f| &f.name));
        for name in names {
            if !seen.insert(name.as_str()) {
                return Err(Error::Unsupported(format!("name {name} declared twice")));
            }
        }
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.independents.len()
    }

    pub fn m(&self) -> usize {
        self.dependents.len()
    }

    pub fn independents(&self) -> &[String] {
        &self.independents
    }

    pub fn dependents(&self) -> &[String] {
        &self.dependents
    }

    pub fn parameters(&self) -> &[String] {
        &self.parameters
    }

    pub fn functions(&self) -> &[FunctionDecl] {
        &self.functions
    }

    pub fn independent_index(&self, name: &str) -> Option<usize> {
        self.independents.iter().position(|s| s == name)
    }

    pub fn dependent_index(&self, name: &str) -> Option<usize> {
        self.dependents.iter().position(|s| s == name)
    }

    pub fn has_parameter(&self, name: &str) -> bool {
        self.parameters.iter().any(|s| s == name)
    }

    pub fn function(&self, name: &str) -> Option<&FunctionDecl> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// `x_i` as an expression.
    pub fn x(&self, i: usize) -> Expr {
        Expr::indep(i)
    }

    /// `u^j_alpha` as an expression.
    pub fn u(&self, j: usize, alpha: &[u32]) -> Expr {
        Expr::atom(Atom::Dependent {
            var: j,
            alpha: MultiIndex::new(alpha.to_vec()),
        })
    }

    /// Jet atom by name and derivative list, e.g. `("u", &["x", "x"])`.
    pub fn jet(&self, dep: &str, derivs: &[&str]) -> Option<Atom> {
        let var = self.dependent_index(dep)?;
        let mut alpha = MultiIndex::zero(self.n());
        for d in derivs {
            alpha = alpha.incremented(self.independent_index(d)?);
        }
        Some(Atom::Dependent { var, alpha })
    }
}

/// The total derivative `D_k`: `D_k(x_i) = delta_ik`, `D_k(u^j_a) = u^j_{a+1_k}`,
/// parameters are constants and `f^(r)(x_i)` moves to `f^(r+1)(x_i)` when `i = k`.
///
/// The output is not normalized.
pub fn total_derivative(e: &Expr, k: usize) -> Expr {
    e.derive_with(&|a| match a {
        Atom::Independent(i) => {
            if *i == k {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Dependent { var, alpha } => Expr::atom(Atom::Dependent {
            var: *var,
            alpha: alpha.incremented(k),
        }),
        Atom::Parameter(_) => Expr::zero(),
        Atom::FuncDeriv { name, arg, order } => {
            if *arg == k {
                Expr::atom(Atom::FuncDeriv {
                    name: name.clone(),
                    arg: *arg,
                    order: order + 1,
                })
            } else {
                Expr::zero()
            }
        }
    })
}

/// `D_1^{a_1} ... D_n^{a_n} e`.
pub fn total_derivative_multi(e: &Expr, alpha: &MultiIndex) -> Expr {
    let mut out = e.clone();
    for (k, &count) in alpha.entries().iter().enumerate() {
        for _ in 0..count {
            out = total_derivative(&out, k);
        }
    }
    out
}

/// Jet of an explicit section `u^j = closed_forms[j](x)` up to order `p`:
/// every `u^j_alpha` with `|alpha| <= p` maps to the `alpha`-derivative of the
/// closed form. Substituting this assignment realizes the pullback `s*`.
pub fn jet_of_solution(closed_forms: &[Expr], n: usize, order: u32) -> Result<HashMap<Atom, Expr>> {
    for f in closed_forms {
        if let Some(a) = f
            .atoms()
            .into_iter()
            .find(|a| matches!(a, Atom::Dependent { .. }))
        {
            return Err(Error::Unsupported(format!(
                "closed form contains jet coordinate {a:?}"
            )));
        }
    }
    let mut out = HashMap::new();
    for (j, f) in closed_forms.iter().enumerate() {
        // derivatives cached by multi-index; each built from a lower one
        let mut cache: BTreeMap<MultiIndex, Expr> = BTreeMap::new();
        cache.insert(MultiIndex::zero(n), f.clone());
        for ord in 0..=order {
            for alpha in MultiIndex::all_of_order(n, ord) {
                let value = match alpha.first_nonzero() {
                    None => f.clone(),
                    Some(k) => {
                        let parent = alpha.decremented(k).expect("nonzero entry");
                        let d = total_derivative(&cache[&parent], k);
                        crate::normal::simplify(&d)?
                    }
                };
                cache.insert(alpha.clone(), value.clone());
                out.insert(Atom::Dependent { var: j, alpha }, value);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::rat;
    use crate::normal::equal;

    fn xy() -> JetContext {
        JetContext::new(&["x", "y"], &["u"]).unwrap()
    }

    #[test]
    fn total_derivative_on_atoms() {
        let ctx = xy();
        let u = ctx.u(0, &[0, 0]);
        assert_eq!(total_derivative(&u, 0), ctx.u(0, &[1, 0]));
        assert!(total_derivative(&Expr::param("a"), 0).is_zero());
        assert!(total_derivative(&ctx.x(1), 0).is_zero());
        assert!(total_derivative(&ctx.x(0), 0).is_one());
        let f = Expr::func("f", 0, 1);
        assert_eq!(total_derivative(&f, 0), Expr::func("f", 0, 2));
        assert!(total_derivative(&f, 1).is_zero());
    }

    #[test]
    fn leibniz_and_power_rule() {
        let ctx = xy();
        let x = ctx.x(0);
        let e = x.clone() * ctx.u(0, &[1, 0]);
        let expected = ctx.u(0, &[1, 0]) + x.clone() * ctx.u(0, &[2, 0]);
        assert!(equal(&total_derivative(&e, 0), &expected).unwrap());

        let e = Expr::int(2) * Expr::pow(x.clone(), rat(1, 2));
        assert!(equal(&total_derivative(&e, 0), &Expr::pow(x, rat(-1, 2))).unwrap());

        let a = Expr::param("a");
        let w = a.clone() * ctx.u(0, &[0, 0]) + Expr::one();
        let expected = a * ctx.u(0, &[1, 0]) * Expr::powi(w.clone(), -1);
        assert!(equal(&total_derivative(&Expr::log(w), 0), &expected).unwrap());
    }

    #[test]
    fn multi_index_derivative() {
        let ctx = xy();
        let u = ctx.u(0, &[0, 0]);
        assert_eq!(total_derivative_multi(&u, &MultiIndex::zero(2)), u);
        assert_eq!(
            total_derivative_multi(&u, &MultiIndex::new(vec![2, 0])),
            ctx.u(0, &[2, 0])
        );
        let e = u.clone() * ctx.u(0, &[1, 0]);
        let a = total_derivative(&total_derivative(&e, 0), 1);
        let b = total_derivative(&total_derivative(&e, 1), 0);
        assert!(equal(&a, &b).unwrap());
        assert!(equal(
            &a,
            &total_derivative_multi(&e, &MultiIndex::new(vec![1, 1]))
        )
        .unwrap());
    }

    #[test]
    fn solution_jet() {
        // u = x^2 + x t^2 over (t, x)
        let (t, x) = (Expr::indep(0), Expr::indep(1));
        let u = x.clone() * x.clone() + x.clone() * t.clone() * t.clone();
        let jet = jet_of_solution(std::slice::from_ref(&u), 2, 2).unwrap();
        let at = |a: &[u32]| jet[&Atom::dep(0, a.to_vec())].clone();
        assert!(equal(&at(&[0, 0]), &u).unwrap());
        assert!(equal(&at(&[1, 0]), &(Expr::int(2) * x.clone() * t.clone())).unwrap());
        assert!(equal(
            &at(&[0, 1]),
            &(Expr::int(2) * x.clone() + t.clone() * t.clone())
        )
        .unwrap());
        assert!(equal(&at(&[2, 0]), &(Expr::int(2) * x.clone())).unwrap());
        assert!(equal(&at(&[1, 1]), &(Expr::int(2) * t)).unwrap());
        assert!(equal(&at(&[0, 2]), &Expr::int(2)).unwrap());
        assert_eq!(jet.len(), 6);

        let zero = jet_of_solution(&[Expr::zero()], 2, 2).unwrap();
        assert!(zero.values().all(Expr::is_zero));

        let jet = jet_of_solution(&[Expr::indep(0)], 2, 1).unwrap();
        assert!(jet[&Atom::dep(0, vec![1, 0])].is_one());
        assert!(jet[&Atom::dep(0, vec![0, 1])].is_zero());

        assert!(jet_of_solution(&[Expr::dep(0, vec![0, 0])], 2, 1).is_err());
    }

    #[test]
    fn solution_soundness_for_wave_equation() {
        let (t, x) = (Expr::indep(0), Expr::indep(1));
        let u = x.clone() * x.clone() + x.clone() * t.clone() * t;
        let jet = jet_of_solution(&[u], 2, 3).unwrap();
        let residual = Expr::dep(0, vec![2, 0]) - x * Expr::dep(0, vec![0, 2]);
        assert!(crate::normal::is_zero(&residual.substitute(&jet)).unwrap());
    }

    #[test]
    fn context_rejects_duplicates() {
        assert!(JetContext::new(&["x", "x"], &["u"]).is_err());
        assert!(JetContext::new(&["x"], &["x"]).is_err());
        let empty: [&str; 0] = [];
        assert!(JetContext::new(&empty, &["u"]).is_err());
        assert!(xy().with_function("f", "z").is_err());
    }
}
