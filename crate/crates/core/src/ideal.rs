//! Oriented PDE systems and reduction modulo the differential ideal they
//! generate.

use std::cmp::Ordering;
use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, MultiIndex};
use crate::format::{format_atom, format_expr};
use crate::jet::{total_derivative, JetContext};
use crate::normal::{collect, collect_named, normalize, simplify};
use crate::problem::Equation;
use crate::prolong::{lift, pullback, Mapping};
use crate::report::Report;

/// Elimination ranking of derivative atoms: derivative counts compared
/// lexicographically in `priority` order, then the dependent index. It is
/// compatible with total differentiation and well founded, which is all
/// reduction needs for termination.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ranking {
    priority: Vec<usize>,
}

impl Ranking {
    /// Last-declared independent first.
    pub fn default_for(n: usize) -> Self {
        Ranking {
            priority: (0..n).rev().collect(),
        }
    }

    /// `priority` lists every independent index exactly once, highest first.
    pub fn with_priority(n: usize, priority: Vec<usize>) -> Result<Self> {
        let mut sorted = priority.clone();
        sorted.sort_unstable();
        if sorted != (0..n).collect::<Vec<_>>() {
            return Err(Error::Unsupported(format!(
                "ranking must list each of the {n} independent variables once"
            )));
        }
        Ok(Ranking { priority })
    }

    /// Parses a space separated list of independent names.
    pub fn parse(text: &str, ctx: &JetContext) -> Result<Self> {
        let priority = text
            .split_whitespace()
            .map(|name| {
                ctx.independent_index(name).ok_or_else(|| {
                    Error::Unsupported(format!("ranking names unknown variable {name}"))
                })
            })
            .collect::<Result<Vec<_>>>()?;
        Ranking::with_priority(ctx.n(), priority)
    }

    /// For equations written as `atom = rhs`, the first priority order
    /// (starting from the default) under which every such left side is the
    /// highest-ranked atom of its equation. Falls back to the default.
    pub fn for_solved_forms(equations: &[Equation], n: usize) -> Self {
        let default = Ranking::default_for(n);
        let solved: Vec<(Atom, std::collections::BTreeSet<Atom>)> = equations
            .iter()
            .filter_map(|eq| match &eq.lhs {
                Expr::Atomic(a @ Atom::Dependent { .. }) => Some((a.clone(), eq.rhs.atoms())),
                _ => None,
            })
            .collect();
        if solved.is_empty() {
            return default;
        }
        let mut candidates = vec![default.priority.clone()];
        permutations(
            &(0..n).collect::<Vec<_>>(),
            &mut Vec::new(),
            &mut candidates,
        );
        candidates
            .into_iter()
            .map(|priority| Ranking { priority })
            .find(|r| {
                solved.iter().all(|(lhs, rhs)| {
                    rhs.iter()
                        .filter(|a| a.is_dependent())
                        .all(|a| r.cmp(a, lhs) == Ordering::Less)
                })
            })
            .unwrap_or(default)
    }

    pub fn priority(&self) -> &[usize] {
        &self.priority
    }

    fn key(&self, var: usize, alpha: &MultiIndex) -> (Vec<u32>, usize) {
        let counts = self.priority.iter().map(|&k| alpha.entries()[k]).collect();
        (counts, var)
    }

    /// Compares dependent atoms; every other atom ranks below all of them.
    pub fn cmp(&self, a: &Atom, b: &Atom) -> Ordering {
        match (a, b) {
            (Atom::Dependent { var: va, alpha: aa }, Atom::Dependent { var: vb, alpha: ab }) => {
                self.key(*va, aa).cmp(&self.key(*vb, ab))
            }
            (Atom::Dependent { .. }, _) => Ordering::Greater,
            (_, Atom::Dependent { .. }) => Ordering::Less,
            _ => a.cmp(b),
        }
    }

    pub fn highest<'a, I: IntoIterator<Item = &'a Atom>>(&self, atoms: I) -> Option<&'a Atom> {
        atoms
            .into_iter()
            .filter(|a| a.is_dependent())
            .max_by(|a, b| self.cmp(a, b))
    }
}

#[derive(Clone, Debug)]
pub struct OrientedEquation {
    pub var: usize,
    pub principal: MultiIndex,
    pub rhs: Expr,
}

impl OrientedEquation {
    pub fn principal_atom(&self) -> Atom {
        Atom::Dependent {
            var: self.var,
            alpha: self.principal.clone(),
        }
    }

    /// `principal - rhs`.
    pub fn generator(&self) -> Expr {
        Expr::atom(self.principal_atom()) - &self.rhs
    }
}

#[derive(Clone, Debug)]
pub struct OrientedSystem {
    context: JetContext,
    ranking: Ranking,
    equations: Vec<OrientedEquation>,
    sources: Vec<Equation>,
}

impl OrientedSystem {
    pub fn context(&self) -> &JetContext {
        &self.context
    }

    pub fn ranking(&self) -> &Ranking {
        &self.ranking
    }

    pub fn equations(&self) -> &[OrientedEquation] {
        &self.equations
    }

    /// The equations as written before orientation.
    pub fn sources(&self) -> &[Equation] {
        &self.sources
    }

    pub fn order(&self) -> u32 {
        self.equations
            .iter()
            .map(|e| e.principal.order())
            .max()
            .unwrap_or(0)
    }

    /// The equation whose principal divides `(var, alpha)`, with the quotient.
    fn principal_for(
        &self,
        var: usize,
        alpha: &MultiIndex,
    ) -> Option<(&OrientedEquation, MultiIndex)> {
        self.equations
            .iter()
            .filter(|e| e.var == var)
            .find_map(|e| e.principal.complement_in(alpha).map(|beta| (e, beta)))
    }

    pub fn is_reducible(&self, atom: &Atom) -> bool {
        match atom {
            Atom::Dependent { var, alpha } => self.principal_for(*var, alpha).is_some(),
            _ => false,
        }
    }
}

fn permutations(rest: &[usize], prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    if rest.is_empty() {
        out.push(prefix.clone());
        return;
    }
    for (i, &k) in rest.iter().enumerate() {
        let mut remaining = rest.to_vec();
        remaining.remove(i);
        prefix.push(k);
        permutations(&remaining, prefix, out);
        prefix.pop();
    }
}

/// Solves each equation for its highest-ranked derivative.
pub fn orient(
    equations: &[Equation],
    ctx: &JetContext,
    ranking: Ranking,
) -> Result<OrientedSystem> {
    let mut oriented: Vec<OrientedEquation> = Vec::new();
    for eq in equations {
        let shown = || {
            format!(
                "{} = {}",
                format_expr(&eq.lhs, ctx),
                format_expr(&eq.rhs, ctx)
            )
        };
        let residual = simplify(&eq.residual())?;
        let atoms = residual.atoms();
        let top = ranking
            .highest(&atoms)
            .ok_or_else(|| {
                Error::NotSolvable(format!("{} has no derivative to solve for", shown()))
            })?
            .clone();
        let coeffs = collect(&residual, std::slice::from_ref(&top)).map_err(|_| {
            Error::NotSolvable(format!(
                "{} is not polynomial in {}",
                shown(),
                format_atom(&top, ctx)
            ))
        })?;
        if coeffs.keys().any(|k| k[0] > 1) {
            return Err(Error::NotSolvable(format!(
                "{} is nonlinear in {}",
                shown(),
                format_atom(&top, ctx)
            )));
        }
        let c1 = coeffs.get(&vec![1]).cloned().unwrap_or_else(Expr::zero);
        let c0 = coeffs.get(&vec![0]).cloned().unwrap_or_else(Expr::zero);
        let rhs = simplify(&(-c0 / c1))?;
        let Atom::Dependent { var, alpha } = top else {
            unreachable!("highest() only returns dependent atoms")
        };
        oriented.push(OrientedEquation {
            var,
            principal: alpha,
            rhs,
        });
    }
    for (i, a) in oriented.iter().enumerate() {
        for b in oriented.iter().skip(i + 1) {
            if a.var == b.var
                && (a.principal.divides(&b.principal) || b.principal.divides(&a.principal))
            {
                return Err(Error::OverlappingPrincipals(
                    format_atom(&a.principal_atom(), ctx),
                    format_atom(&b.principal_atom(), ctx),
                ));
            }
        }
    }
    Ok(OrientedSystem {
        context: ctx.clone(),
        ranking,
        equations: oriented,
        sources: equations.to_vec(),
    })
}

/// Reduction with a memo of fully reduced derivative atoms. Reusing one
/// reducer across several expressions shares that memo.
pub struct Reducer<'a> {
    sys: &'a OrientedSystem,
    memo: HashMap<Atom, Expr>,
    steps: usize,
}

impl<'a> Reducer<'a> {
    pub fn new(sys: &'a OrientedSystem) -> Self {
        Reducer {
            sys,
            memo: HashMap::new(),
            steps: 0,
        }
    }

    /// Number of atom rewrites performed so far.
    pub fn steps(&self) -> usize {
        self.steps
    }

    /// Normal form of a reducible atom, built as `D_k` of the normal form of
    /// the next lower derivative of the same principal.
    fn reduced_atom(&mut self, atom: &Atom) -> Result<Expr> {
        if let Some(v) = self.memo.get(atom) {
            return Ok(v.clone());
        }
        let Atom::Dependent { var, alpha } = atom else {
            unreachable!("only dependent atoms are reducible")
        };
        let (eq, beta) = self
            .sys
            .principal_for(*var, alpha)
            .expect("caller checked reducibility");
        let value = match beta.first_nonzero() {
            None => {
                let rhs = eq.rhs.clone();
                self.reduce(&rhs)?
            }
            Some(k) => {
                let parent = Atom::Dependent {
                    var: *var,
                    alpha: alpha.decremented(k).expect("beta_k > 0"),
                };
                let p = self.reduced_atom(&parent)?;
                self.reduce(&total_derivative(&p, k))?
            }
        };
        self.steps += 1;
        self.memo.insert(atom.clone(), value.clone());
        Ok(value)
    }

    pub fn reduce(&mut self, e: &Expr) -> Result<Expr> {
        let mut bindings = HashMap::new();
        for atom in e.atoms() {
            if self.sys.is_reducible(&atom) {
                let v = self.reduced_atom(&atom)?;
                bindings.insert(atom, v);
            }
        }
        if bindings.is_empty() {
            return simplify(e);
        }
        simplify(&e.substitute(&bindings))
    }
}

/// Normal form of `e` modulo the differential ideal of `sys`.
pub fn reduce(e: &Expr, sys: &OrientedSystem) -> Result<Expr> {
    Reducer::new(sys).reduce(e)
}

pub fn is_member(e: &Expr, sys: &OrientedSystem) -> Result<bool> {
    Ok(normalize(&reduce(e, sys)?)?.is_zero())
}

/// Highest derivative order of any dependent atom in `e`.
pub fn jet_order(e: &Expr) -> u32 {
    e.atoms()
        .iter()
        .filter_map(|a| match a {
            Atom::Dependent { alpha, .. } => Some(alpha.order()),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

fn equation_label(eq: &Equation, ctx: &JetContext) -> String {
    format!(
        "{} = {}",
        format_expr(&eq.lhs, ctx),
        format_expr(&eq.rhs, ctx)
    )
}

/// Checks that `mapping` carries solutions of `source` to solutions of
/// `target` by pulling back each target residual through the order-`q` lift.
pub fn verify_solution_map(
    source: &OrientedSystem,
    target: &[Equation],
    mapping: &Mapping,
    q: u32,
    seed: u64,
) -> Result<Report> {
    let lifted = lift(mapping, q)?;
    let mut reducer = Reducer::new(source);
    let mut residuals = Vec::new();
    for eq in target {
        let pulled = pullback(&lifted, &eq.residual())?;
        residuals.push((
            equation_label(eq, &mapping.target),
            reducer.reduce(&pulled)?,
        ));
    }
    let mut report = Report::from_residuals(residuals, seed)?;
    report.notes.push(format!(
        "det(Df) = {}",
        format_expr(lifted.df_det(), &mapping.source)
    ));
    Ok(report)
}

pub fn verify_symmetry(
    sys: &OrientedSystem,
    mapping: &Mapping,
    q: u32,
    seed: u64,
) -> Result<Report> {
    verify_solution_map(sys, sys.sources(), mapping, q, seed)
}

/// One coefficient equation `coefficient = 0`.
#[derive(Clone, Debug)]
pub struct DetEquation {
    /// Index of the target equation it came from.
    pub equation: usize,
    pub monomial: Vec<(Atom, u32)>,
    pub coefficient: Expr,
}

/// Pulls back, reduces and collects coefficients over `top`. Every atom in
/// `top` gets its linear coefficient listed, zero or not. Without `top`,
/// every dependent atom left in a reduced residual is used, highest ranked
/// first, and only nonzero coefficients appear.
pub fn determining_equations(
    source: &OrientedSystem,
    target: &[Equation],
    mapping: &Mapping,
    q: u32,
    top: Option<&[Atom]>,
) -> Result<Vec<DetEquation>> {
    let lifted = lift(mapping, q)?;
    let mut reducer = Reducer::new(source);
    let mut out = Vec::new();
    for (idx, eq) in target.iter().enumerate() {
        let reduced = reducer.reduce(&pullback(&lifted, &eq.residual())?)?;
        let vars: Vec<Atom> = match top {
            Some(t) => t.to_vec(),
            None => {
                let mut v: Vec<Atom> = reduced
                    .atoms()
                    .into_iter()
                    .filter(Atom::is_dependent)
                    .collect();
                v.sort_by(|a, b| source.ranking().cmp(b, a));
                v
            }
        };
        let mut coeffs = collect_named(&reduced, &vars, |a| format_atom(a, source.context()))?;
        if top.is_some() {
            for i in 0..vars.len() {
                let mut key = vec![0; vars.len()];
                key[i] = 1;
                coeffs.entry(key).or_insert_with(Expr::zero);
            }
        }
        let mut entries: Vec<_> = coeffs.into_iter().collect();
        // highest powers of the highest-ranked atoms first
        entries.sort_by(|a, b| b.0.cmp(&a.0));
        for (exps, coefficient) in entries {
            let monomial = vars
                .iter()
                .cloned()
                .zip(exps)
                .filter(|(_, e)| *e > 0)
                .collect();
            out.push(DetEquation {
                equation: idx,
                monomial,
                coefficient,
            });
        }
    }
    Ok(out)
}
