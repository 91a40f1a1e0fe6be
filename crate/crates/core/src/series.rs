//! Truncated power series in a group parameter with expression coefficients,
//! and the order-by-order prolongation of parametric mappings.

use std::collections::{BTreeMap, HashMap};

use num_traits::One;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, MultiIndex, Rational};
use crate::format::format_expr;
use crate::ideal::{OrientedSystem, Reducer};
use crate::jet::{total_derivative, JetContext};
use crate::normal::{normalize, simplify};
use crate::problem::ParamMappingSpec;
use crate::report::Report;

/// `c_0 + c_1 a + ... + c_N a^N`, with `O(a^{N+1})` dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct ParamSeries {
    param: String,
    coeffs: Vec<Expr>,
}

impl ParamSeries {
    pub fn new(param: &str, coeffs: Vec<Expr>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Unsupported(
                "a series needs at least one coefficient".into(),
            ));
        }
        let atom = Atom::param(param);
        if let Some(k) = coeffs.iter().position(|c| c.contains_atom(&atom)) {
            return Err(Error::ParameterInCoefficient(format!(
                "coefficient {k} mentions {param}"
            )));
        }
        Ok(ParamSeries {
            param: param.to_string(),
            coeffs,
        })
    }

    pub fn constant(param: &str, c: Expr, trunc: usize) -> Self {
        let mut coeffs = vec![Expr::zero(); trunc + 1];
        coeffs[0] = c;
        ParamSeries {
            param: param.to_string(),
            coeffs,
        }
    }

    /// The parameter itself.
    pub fn variable(param: &str, trunc: usize) -> Self {
        let mut s = ParamSeries::constant(param, Expr::zero(), trunc);
        if trunc >= 1 {
            s.coeffs[1] = Expr::one();
        }
        s
    }

    pub fn param(&self) -> &str {
        &self.param
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Expr] {
        &self.coeffs
    }

    pub fn coeff(&self, k: usize) -> Expr {
        self.coeffs.get(k).cloned().unwrap_or_else(Expr::zero)
    }

    /// `sum c_k a^k` as a single expression.
    pub fn to_expr(&self) -> Expr {
        let a = Expr::param(&self.param);
        Expr::sum(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(k, c)| c * Expr::powi(a.clone(), k as i64))
                .collect::<Vec<_>>(),
        )
    }

    fn map(&self, f: impl FnMut(&Expr) -> Result<Expr>) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(f).collect::<Result<Vec<_>>>()?;
        Ok(ParamSeries {
            param: self.param.clone(),
            coeffs,
        })
    }

    pub fn simplified(&self) -> Result<Self> {
        self.map(simplify)
    }

    pub fn truncate(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Expr::zero());
        ParamSeries {
            param: self.param.clone(),
            coeffs,
        }
    }

    pub fn add(&self, other: &ParamSeries) -> Result<Self> {
        let n = self.trunc().min(other.trunc());
        let coeffs = (0..=n)
            .map(|k| simplify(&(&self.coeffs[k] + &other.coeffs[k])))
            .collect::<Result<_>>()?;
        Ok(ParamSeries {
            param: self.param.clone(),
            coeffs,
        })
    }

    pub fn neg(&self) -> Self {
        ParamSeries {
            param: self.param.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn sub(&self, other: &ParamSeries) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scalar_mul(&self, c: &Expr) -> Result<Self> {
        self.map(|x| simplify(&(x * c)))
    }

    /// Cauchy product truncated at the smaller truncation order.
    pub fn mul(&self, other: &ParamSeries) -> Result<Self> {
        let n = self.trunc().min(other.trunc());
        let mut coeffs = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let terms: Vec<Expr> = (0..=k)
                .filter(|i| !self.coeffs[*i].is_zero() && !other.coeffs[k - i].is_zero())
                .map(|i| &self.coeffs[i] * &other.coeffs[k - i])
                .collect();
            coeffs.push(simplify(&Expr::sum(terms))?);
        }
        Ok(ParamSeries {
            param: self.param.clone(),
            coeffs,
        })
    }

    /// `r_0 = 1/c_0`, `r_k = -(sum_{i=1..k} c_i r_{k-i}) / c_0`.
    pub fn reciprocal(&self) -> Result<Self> {
        let c0 = normalize(&self.coeffs[0])?;
        if c0.is_zero() {
            return Err(Error::NonUnitConstantTerm);
        }
        let inv0 = c0.inv()?.to_expr();
        let mut r = vec![inv0.clone()];
        for k in 1..self.coeffs.len() {
            let acc: Vec<Expr> = (1..=k).map(|i| &self.coeffs[i] * &r[k - i]).collect();
            r.push(simplify(&(-(Expr::sum(acc)) * &inv0))?);
        }
        Ok(ParamSeries {
            param: self.param.clone(),
            coeffs: r,
        })
    }

    pub fn powi(&self, k: i64) -> Result<Self> {
        let base = if k < 0 {
            self.reciprocal()?
        } else {
            self.clone()
        };
        let mut e = k.unsigned_abs();
        let mut acc = ParamSeries::constant(&self.param, Expr::one(), self.trunc());
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(acc)
    }

    /// Splits `c_0 (1 + w)` with `w` free of a constant term.
    fn unit_split(&self) -> Result<(Expr, ParamSeries)> {
        let c0 = &self.coeffs[0];
        if normalize(c0)?.is_zero() {
            return Err(Error::NonUnitConstantTerm);
        }
        let inv = c0.clone().recip();
        let mut w = self.scalar_mul(&inv)?;
        w.coeffs[0] = Expr::zero();
        Ok((c0.clone(), w))
    }

    /// Binomial series `c_0^r sum_j binom(r, j) w^j`.
    pub fn pow(&self, r: &Rational) -> Result<Self> {
        if r.is_integer() {
            let k = r.to_integer();
            let k: i64 = k
                .try_into()
                .map_err(|_| Error::Unsupported("exponent too large".into()))?;
            return self.powi(k);
        }
        let (c0, w) = self.unit_split()?;
        let n = self.trunc();
        let mut total = ParamSeries::constant(&self.param, Expr::one(), n);
        let mut wj = ParamSeries::constant(&self.param, Expr::one(), n);
        let mut binom = Rational::one();
        for j in 1..=n {
            wj = wj.mul(&w)?;
            binom = binom * (r - Rational::from_integer((j - 1).into()))
                / Rational::from_integer(j.into());
            total = total.add(&wj.scalar_mul(&Expr::constant(binom.clone()))?)?;
        }
        total.scalar_mul(&simplify(&Expr::pow(c0, r.clone()))?)
    }

    /// `log c_0 + sum_j (-1)^{j+1} w^j / j`.
    pub fn log(&self) -> Result<Self> {
        let (c0, w) = self.unit_split()?;
        let n = self.trunc();
        let mut total = ParamSeries::constant(&self.param, simplify(&Expr::log(c0))?, n);
        let mut wj = ParamSeries::constant(&self.param, Expr::one(), n);
        for j in 1..=n {
            wj = wj.mul(&w)?;
            let sign = if j % 2 == 1 { 1 } else { -1 };
            total = total.add(&wj.scalar_mul(&Expr::rational(sign, j as i64))?)?;
        }
        Ok(total)
    }

    /// `d/da`: coefficients `k c_k` shifted down one place.
    pub fn a_derivative(&self) -> Result<Self> {
        if self.trunc() == 0 {
            return Err(Error::Unsupported(
                "cannot differentiate a series truncated at order 0".into(),
            ));
        }
        let coeffs = (1..self.coeffs.len())
            .map(|k| {
                self.coeffs[k]
                    .clone()
                    .scale(Rational::from_integer(k.into()))
            })
            .collect();
        Ok(ParamSeries {
            param: self.param.clone(),
            coeffs,
        })
    }
}

/// Expands `e` in powers of `param`, replacing atoms through `leaf` first.
/// Atoms without a replacement are constants in the parameter.
pub fn series_eval(
    e: &Expr,
    param: &str,
    trunc: usize,
    leaf: &dyn Fn(&Atom) -> Option<ParamSeries>,
) -> Result<ParamSeries> {
    match e {
        Expr::Constant(_) => Ok(ParamSeries::constant(param, e.clone(), trunc)),
        Expr::Atomic(a) => {
            if let Some(s) = leaf(a) {
                return Ok(s.truncate(trunc));
            }
            match a {
                Atom::Parameter(p) if &**p == param => Ok(ParamSeries::variable(param, trunc)),
                _ => Ok(ParamSeries::constant(param, e.clone(), trunc)),
            }
        }
        Expr::Sum(ts) => {
            let mut acc = ParamSeries::constant(param, Expr::zero(), trunc);
            for t in ts.iter() {
                acc = acc.add(&series_eval(t, param, trunc, leaf)?)?;
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = ParamSeries::constant(param, Expr::one(), trunc);
            for f in fs.iter() {
                acc = acc.mul(&series_eval(f, param, trunc, leaf)?)?;
            }
            Ok(acc)
        }
        Expr::Power(b, r) => series_eval(b, param, trunc, leaf)?.pow(r),
        Expr::Log(b) => series_eval(b, param, trunc, leaf)?.log(),
    }
}

pub fn series_of_expr(e: &Expr, param: &str, trunc: usize) -> Result<ParamSeries> {
    series_eval(e, param, trunc, &|_| None)
}

/// `xbar^i`, `ubar^j` and their prolongations `U_beta = sum_k U_{beta,k} a^k`.
#[derive(Clone, Debug)]
pub struct ParamMapping {
    context: JetContext,
    param: String,
    xbar: Vec<ParamSeries>,
    components: BTreeMap<(usize, MultiIndex), ParamSeries>,
    order: u32,
}

impl ParamMapping {
    pub fn new(
        context: &JetContext,
        param: &str,
        xbar: Vec<ParamSeries>,
        ubar: Vec<ParamSeries>,
    ) -> Result<Self> {
        let n = context.n();
        if xbar.len() != n || ubar.len() != context.m() {
            return Err(Error::InvalidMapping(format!(
                "expected {n} independent and {} dependent series",
                context.m()
            )));
        }
        let trunc = xbar
            .iter()
            .chain(&ubar)
            .map(ParamSeries::trunc)
            .min()
            .unwrap_or(0);
        let mut components = BTreeMap::new();
        for (i, s) in xbar.iter().enumerate() {
            if !normalize(&(s.coeff(0) - Expr::indep(i)))?.is_zero() {
                return Err(Error::InvalidMapping(format!(
                    "{}bar is not the identity at order 0",
                    context.independents()[i]
                )));
            }
        }
        for (j, s) in ubar.into_iter().enumerate() {
            if !normalize(&(s.coeff(0) - context.u(j, &vec![0; n])))?.is_zero() {
                return Err(Error::InvalidMapping(format!(
                    "{}bar is not the identity at order 0",
                    context.dependents()[j]
                )));
            }
            components.insert((j, MultiIndex::zero(n)), s.truncate(trunc));
        }
        let xbar = xbar.into_iter().map(|s| s.truncate(trunc)).collect();
        Ok(ParamMapping {
            context: context.clone(),
            param: param.to_string(),
            xbar,
            components,
            order: 0,
        })
    }

    pub fn from_spec(context: &JetContext, spec: &ParamMappingSpec, trunc: usize) -> Result<Self> {
        let expand = |e: &Expr| series_of_expr(e, &spec.param, trunc);
        let xbar = spec.xbar.iter().map(expand).collect::<Result<Vec<_>>>()?;
        let ubar = spec.ubar.iter().map(expand).collect::<Result<Vec<_>>>()?;
        ParamMapping::new(context, &spec.param, xbar, ubar)
    }

    pub fn context(&self) -> &JetContext {
        &self.context
    }

    pub fn param(&self) -> &str {
        &self.param
    }

    pub fn trunc(&self) -> usize {
        self.xbar[0].trunc()
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn xbar(&self, i: usize) -> &ParamSeries {
        &self.xbar[i]
    }

    pub fn ubar(&self, j: usize) -> &ParamSeries {
        &self.components[&(j, MultiIndex::zero(self.context.n()))]
    }

    /// The series for the barred derivative `(var, alpha)`.
    pub fn component(&self, j: usize, alpha: &MultiIndex) -> Option<&ParamSeries> {
        self.components.get(&(j, alpha.clone()))
    }
}

/// Fills in derivative series up to `order` with
/// `U_{b,k} = D_i U_{b-1_i,k} - sum_{l<k} sum_j U_{b-1_i+1_j,l} D_i X^j_{k-l}`,
/// where `i` is the last direction in which `b` is nonzero.
pub fn prolong_param(map: &ParamMapping, order: u32) -> Result<ParamMapping> {
    let mut out = map.clone();
    let n = map.context.n();
    let trunc = map.trunc();
    // dx[i][j][k] = D_i X^j_k
    let dx: Vec<Vec<Vec<Expr>>> = (0..n)
        .map(|i| {
            map.xbar
                .iter()
                .map(|s| {
                    s.coeffs()
                        .iter()
                        .map(|c| simplify(&total_derivative(c, i)))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<_>>()?;
    for level in (map.order + 1)..=order {
        let betas = MultiIndex::all_of_order(n, level);
        for j in 0..map.context.m() {
            let mut coeffs: BTreeMap<MultiIndex, Vec<Expr>> = BTreeMap::new();
            for k in 0..=trunc {
                for beta in &betas {
                    let i = (0..n)
                        .rev()
                        .find(|&i| beta.entries()[i] > 0)
                        .expect("level >= 1");
                    let parent = beta.decremented(i).expect("nonzero entry");
                    let mut terms = vec![total_derivative(
                        &out.components[&(j, parent.clone())].coeffs[k],
                        i,
                    )];
                    for l in 0..k {
                        for (jj, dxj) in dx[i].iter().enumerate() {
                            let d = &dxj[k - l];
                            if d.is_zero() {
                                continue;
                            }
                            let sibling = parent.incremented(jj);
                            let u = if l == 0 {
                                Expr::atom(Atom::Dependent {
                                    var: j,
                                    alpha: sibling,
                                })
                            } else {
                                coeffs[&sibling][l].clone()
                            };
                            terms.push(-(u * d));
                        }
                    }
                    let value = if k == 0 {
                        Expr::atom(Atom::Dependent {
                            var: j,
                            alpha: beta.clone(),
                        })
                    } else {
                        simplify(&Expr::sum(terms))?
                    };
                    coeffs.entry(beta.clone()).or_default().push(value);
                }
            }
            for (beta, cs) in coeffs {
                out.components.insert(
                    (j, beta),
                    ParamSeries {
                        param: map.param.clone(),
                        coeffs: cs,
                    },
                );
            }
        }
        out.order = level;
    }
    Ok(out)
}

/// Contact conditions coefficient by coefficient:
/// `D_i U_{b,k} - sum_{l<=k} sum_j U_{b+1_j,l} D_i X^j_{k-l}` for `|b| < order`
/// and every direction `i`, each normalized.
pub fn param_contact_residuals(map: &ParamMapping) -> Result<Vec<Expr>> {
    let n = map.context.n();
    let mut out = Vec::new();
    for level in 0..map.order {
        for beta in MultiIndex::all_of_order(n, level) {
            for j in 0..map.context.m() {
                let u = &map.components[&(j, beta.clone())];
                for i in 0..n {
                    for k in 0..=map.trunc() {
                        let mut e = total_derivative(&u.coeffs[k], i);
                        for l in 0..=k {
                            for jj in 0..n {
                                let next = &map.components[&(j, beta.incremented(jj))].coeffs[l];
                                e = e - next * total_derivative(&map.xbar[jj].coeffs[k - l], i);
                            }
                        }
                        out.push(normalize(&e)?.to_expr());
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Substitutes the barred series into each equation of `sys` and reduces every
/// coefficient modulo the unbarred system. One series per equation.
pub fn series_substitute_residual(
    sys: &OrientedSystem,
    map: &ParamMapping,
) -> Result<Vec<ParamSeries>> {
    let trunc = map.trunc();
    let leaf = |a: &Atom| -> Option<ParamSeries> {
        match a {
            Atom::Independent(i) => Some(map.xbar[*i].clone()),
            Atom::Dependent { var, alpha } => map.component(*var, alpha).cloned(),
            _ => None,
        }
    };
    let mut reducer = Reducer::new(sys);
    let mut out = Vec::new();
    for eq in sys.sources() {
        let residual = eq.residual();
        for atom in residual.atoms() {
            if let Atom::Dependent { var, alpha } = &atom {
                if map.component(*var, alpha).is_none() {
                    return Err(Error::OrderExceeded {
                        found: alpha.order(),
                        lifted: map.order,
                    });
                }
            }
        }
        let s = series_eval(&residual, &map.param, trunc, &leaf)?;
        out.push(s.map(|c| reducer.reduce(c))?);
    }
    Ok(out)
}

/// Residuals of the series check, labelled by equation and power of `a`.
pub fn param_verify(sys: &OrientedSystem, map: &ParamMapping, seed: u64) -> Result<Report> {
    let ctx = sys.context();
    let needed = sys
        .sources()
        .iter()
        .map(|e| crate::ideal::jet_order(&e.residual()))
        .max()
        .unwrap_or(0);
    let prolonged = if map.order() < needed {
        prolong_param(map, needed)?
    } else {
        map.clone()
    };
    let series = series_substitute_residual(sys, &prolonged)?;
    let mut residuals = Vec::new();
    for (eq, s) in sys.sources().iter().zip(&series) {
        let label = format!(
            "{} = {}",
            format_expr(&eq.lhs, ctx),
            format_expr(&eq.rhs, ctx)
        );
        for (k, c) in s.coeffs().iter().enumerate() {
            residuals.push((format!("{label} [{}^{k}]", map.param()), c.clone()));
        }
    }
    Report::from_residuals(residuals, seed)
}

fn dx(e: &Expr) -> Expr {
    total_derivative(e, 0)
}

/// The Burgers-type condition `D_y h - D_x^2 h - u D_x h`, with `x`, `y` the
/// first two independents and `u` the first dependent variable.
pub fn h_condition(h: &Expr, ctx: &JetContext) -> Expr {
    let u = ctx.u(0, &vec![0; ctx.n()]);
    total_derivative(h, 1) - dx(&dx(h)) - u * dx(h)
}

/// Checks the condition on `h` modulo `sys` and, when it holds, that
/// `v = u + 2 D_x(h)/h` satisfies `v_y - v_xx - v v_x` in the ideal (after
/// clearing `h^2`).
pub fn verify_h_condition(h: &Expr, sys: &OrientedSystem, seed: u64) -> Result<Report> {
    let ctx = sys.context();
    if ctx.n() < 2 {
        return Err(Error::Unsupported(
            "the h condition needs two independent variables".into(),
        ));
    }
    let mut reducer = Reducer::new(sys);
    let cond = reducer.reduce(&h_condition(h, ctx))?;
    let mut residuals = vec![("D_y(h) - D_x^2(h) - u*D_x(h)".to_string(), cond.clone())];
    let mut notes = Vec::new();
    if normalize(&cond)?.is_zero() {
        let u = ctx.u(0, &vec![0; ctx.n()]);
        let v = u + Expr::int(2) * dx(h) / h;
        let burgers_v = total_derivative(&v, 1) - dx(&dx(&v)) - &v * dx(&v);
        let cleared = Expr::powi(h.clone(), 2) * burgers_v;
        residuals.push((
            "h^2*(v_y - v_xx - v*v_x), v = u + 2*D_x(h)/h".to_string(),
            reducer.reduce(&cleared)?,
        ));
    } else {
        notes.push("condition on h fails; end-to-end check skipped".to_string());
    }
    let mut report = Report::from_residuals(residuals, seed)?;
    report.notes = notes;
    Ok(report)
}

/// `(a ubar + 1) ubar_aa - 2 ubar_a (a ubar_a - ubar)`, truncated at `N - 2`.
pub fn ode_residual(ubar: &ParamSeries) -> Result<ParamSeries> {
    let n = ubar.trunc();
    if n < 2 {
        return Err(Error::Unsupported(
            "the ODE check needs truncation order at least 2".into(),
        ));
    }
    let p = ubar.param().to_string();
    let u = ubar.truncate(n - 2);
    let ua = ubar.a_derivative()?.truncate(n - 2);
    let uaa = ubar.a_derivative()?.a_derivative()?;
    let a = ParamSeries::variable(&p, n - 2);
    let one = ParamSeries::constant(&p, Expr::one(), n - 2);
    let lhs = a.mul(&u)?.add(&one)?.mul(&uaa)?;
    let rhs = ua.mul(&a.mul(&ua)?.sub(&u)?)?.scalar_mul(&Expr::int(2))?;
    lhs.sub(&rhs)
}

/// `(ubar(0), ubar_a(0))`.
pub fn initial_values(ubar: &ParamSeries) -> Result<(Expr, Expr)> {
    Ok((ubar.coeff(0), ubar.a_derivative()?.coeff(0)))
}

/// Substitutes `a = 0` into every series: the jet map it induces.
pub fn at_zero(map: &ParamMapping) -> HashMap<Atom, Expr> {
    let mut out = HashMap::new();
    for (i, s) in map.xbar.iter().enumerate() {
        out.insert(Atom::Independent(i), s.coeff(0));
    }
    for ((j, alpha), s) in &map.components {
        out.insert(
            Atom::Dependent {
                var: *j,
                alpha: alpha.clone(),
            },
            s.coeff(0),
        );
    }
    out
}
