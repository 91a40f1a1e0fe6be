//! Lifting of mappings `J^p -> J^0` to contact mappings into `J^q`.
//!
//! Matrix layout is fixed project-wide: `Df[i][k] = D_i f_k` (row = direction
//! of total differentiation, column = component). With derivatives as column
//! vectors the lifted first derivatives solve `Dg = Df v_1`, and every further
//! order solves `D v_a = Df v_{a+1}`.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, MultiIndex};
use crate::jet::{total_derivative, JetContext};
use crate::normal::{normalize, simplify};

pub type Matrix = Vec<Vec<Expr>>;

/// `y_k = f_k(x, u_a)`, `v_j = g_j(x, u_a)`.
#[derive(Clone, Debug)]
pub struct Mapping {
    pub source: JetContext,
    pub target: JetContext,
    pub f: Vec<Expr>,
    pub g: Vec<Expr>,
}

impl Mapping {
    pub fn new(source: JetContext, target: JetContext, f: Vec<Expr>, g: Vec<Expr>) -> Result<Self> {
        if source.n() != target.n() || source.m() != target.m() {
            return Err(Error::InvalidMapping(format!(
                "source has n={}, m={} but target has n={}, m={}",
                source.n(),
                source.m(),
                target.n(),
                target.m()
            )));
        }
        if f.len() != target.n() || g.len() != target.m() {
            return Err(Error::InvalidMapping(format!(
                "expected {} independent and {} dependent components, got {} and {}",
                target.n(),
                target.m(),
                f.len(),
                g.len()
            )));
        }
        Ok(Mapping {
            source,
            target,
            f,
            g,
        })
    }

    pub fn identity(ctx: &JetContext) -> Self {
        let f = (0..ctx.n()).map(Expr::indep).collect();
        let g = (0..ctx.m()).map(|j| ctx.u(j, &vec![0; ctx.n()])).collect();
        Mapping {
            source: ctx.clone(),
            target: ctx.clone(),
            f,
            g,
        }
    }
}

/// `Df[i][k] = D_i f_k`.
pub fn total_jacobian(components: &[Expr], n: usize) -> Matrix {
    (0..n)
        .map(|i| components.iter().map(|f| total_derivative(f, i)).collect())
        .collect()
}

fn minor(m: &Matrix, row: usize, col: usize) -> Matrix {
    m.iter()
        .enumerate()
        .filter(|(i, _)| *i != row)
        .map(|(_, r)| {
            r.iter()
                .enumerate()
                .filter(|(j, _)| *j != col)
                .map(|(_, e)| e.clone())
                .collect()
        })
        .collect()
}

fn determinant(m: &Matrix) -> Expr {
    match m.len() {
        0 => Expr::one(),
        1 => m[0][0].clone(),
        2 => &m[0][0] * &m[1][1] - &m[0][1] * &m[1][0],
        n => Expr::sum((0..n).map(|j| {
            let c = &m[0][j] * determinant(&minor(m, 0, j));
            if j % 2 == 0 {
                c
            } else {
                -c
            }
        })),
    }
}

/// Inverse by the adjugate, for `n <= 4`. Returns `(inverse, det)`.
pub fn symbolic_inverse(m: &Matrix) -> Result<(Matrix, Expr)> {
    let n = m.len();
    if n > 4 {
        return Err(Error::MatrixTooLarge(n));
    }
    if m.iter().any(|r| r.len() != n) {
        return Err(Error::Unsupported("matrix is not square".into()));
    }
    let det = simplify(&determinant(m))?;
    if det.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let det_inv = det.clone().recip();
    let mut inv = vec![vec![Expr::zero(); n]; n];
    for (i, row) in inv.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let cof = if n == 1 {
                Expr::one()
            } else {
                determinant(&minor(m, j, i))
            };
            let signed = if (i + j) % 2 == 0 { cof } else { -cof };
            *slot = simplify(&(signed * &det_inv))?;
        }
    }
    Ok((inv, det))
}

#[derive(Clone, Debug)]
pub struct LiftedMapping {
    base: Mapping,
    order: u32,
    components: BTreeMap<(usize, MultiIndex), Expr>,
    df: Matrix,
    df_inverse: Matrix,
    df_det: Expr,
}

impl LiftedMapping {
    pub fn base(&self) -> &Mapping {
        &self.base
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    /// The lifted component `v^j_alpha` as a source expression.
    pub fn component(&self, j: usize, alpha: &MultiIndex) -> Option<&Expr> {
        self.components.get(&(j, alpha.clone()))
    }

    /// All components ordered by `(j, alpha)` with lower orders first.
    pub fn components(&self) -> Vec<(usize, &MultiIndex, &Expr)> {
        let mut out: Vec<_> = self
            .components
            .iter()
            .map(|((j, a), e)| (*j, a, e))
            .collect();
        out.sort_by(|x, y| {
            (x.1.order(), x.0, std::cmp::Reverse(x.1)).cmp(&(
                y.1.order(),
                y.0,
                std::cmp::Reverse(y.1),
            ))
        });
        out
    }

    pub fn df(&self) -> &Matrix {
        &self.df
    }

    pub fn df_inverse(&self) -> &Matrix {
        &self.df_inverse
    }

    pub fn df_det(&self) -> &Expr {
        &self.df_det
    }

    /// Overwrites one component. Used to build negative controls for
    /// [`verify_contact`].
    pub fn set_component(&mut self, j: usize, alpha: MultiIndex, value: Expr) {
        self.components.insert((j, alpha), value);
    }
}

/// `v_{a+1_k} = sum_i (Df^-1)[k][i] D_i(v_a)` for the given parent.
fn lift_step(parent: &Expr, k: usize, df_inverse: &Matrix) -> Result<Expr> {
    let n = df_inverse.len();
    let terms = (0..n)
        .filter(|i| !df_inverse[k][*i].is_zero())
        .map(|i| total_derivative(parent, i) * &df_inverse[k][i]);
    simplify(&Expr::sum(terms.collect::<Vec<_>>()))
}

/// Lifts `mapping` to order `q` by the recurrence `v_{k+1} = Df^-1 D v_k`.
pub fn lift(mapping: &Mapping, q: u32) -> Result<LiftedMapping> {
    let n = mapping.source.n();
    let df = total_jacobian(&mapping.f, n);
    let (df_inverse, df_det) = symbolic_inverse(&df)?;
    let mut components = BTreeMap::new();
    for (j, g) in mapping.g.iter().enumerate() {
        components.insert((j, MultiIndex::zero(n)), simplify(g)?);
    }
    for ord in 1..=q {
        for j in 0..mapping.g.len() {
            for alpha in MultiIndex::all_of_order(n, ord) {
                let k = alpha.first_nonzero().expect("order >= 1");
                let parent = alpha.decremented(k).expect("nonzero entry");
                let v = lift_step(&components[&(j, parent)], k, &df_inverse)?;
                components.insert((j, alpha), v);
            }
        }
    }
    Ok(LiftedMapping {
        base: mapping.clone(),
        order: q,
        components,
        df,
        df_inverse,
        df_det,
    })
}

/// Derivative `v^j_alpha` reached through the parent `alpha - 1_k`; differs
/// from [`LiftedMapping::component`] only in the derivation path.
pub fn component_via(
    lifted: &LiftedMapping,
    j: usize,
    alpha: &MultiIndex,
    k: usize,
) -> Result<Expr> {
    let parent = alpha.decremented(k).ok_or_else(|| {
        Error::Unsupported(format!(
            "multi-index {:?} has no entry in direction {k}",
            alpha.entries()
        ))
    })?;
    let pv = lifted.component(j, &parent).ok_or(Error::OrderExceeded {
        found: parent.order(),
        lifted: lifted.order,
    })?;
    lift_step(pv, k, &lifted.df_inverse)
}

/// `phi*`: replaces every target coordinate by its lifted component.
pub fn pullback(lifted: &LiftedMapping, target_expr: &Expr) -> Result<Expr> {
    let mut bindings = HashMap::new();
    for atom in target_expr.atoms() {
        match &atom {
            Atom::Independent(k) => {
                let f = lifted
                    .base
                    .f
                    .get(*k)
                    .ok_or_else(|| Error::InvalidMapping(format!("no component for x{k}")))?;
                bindings.insert(atom.clone(), f.clone());
            }
            Atom::Dependent { var, alpha } => {
                let v = lifted.component(*var, alpha).ok_or(Error::OrderExceeded {
                    found: alpha.order(),
                    lifted: lifted.order,
                })?;
                bindings.insert(atom.clone(), v.clone());
            }
            Atom::Parameter(_) | Atom::FuncDeriv { .. } => {}
        }
    }
    Ok(target_expr.substitute(&bindings))
}

#[derive(Clone, Debug)]
pub struct ContactResidual {
    pub var: usize,
    pub alpha: MultiIndex,
    pub direction: usize,
    pub residual: Expr,
}

/// Residuals `D_i v_a - sum_k v_{a+1_k} Df[i][k]` for all `|a| < q`.
#[derive(Clone, Debug, Default)]
pub struct ContactCheck {
    pub residuals: Vec<ContactResidual>,
}

impl ContactCheck {
    pub fn is_contact(&self) -> bool {
        self.residuals.iter().all(|r| r.residual.is_zero())
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &ContactResidual> {
        self.residuals.iter().filter(|r| !r.residual.is_zero())
    }
}

pub fn verify_contact(lifted: &LiftedMapping) -> Result<ContactCheck> {
    let n = lifted.base.source.n();
    let mut check = ContactCheck::default();
    for ord in 0..lifted.order {
        for j in 0..lifted.base.g.len() {
            for alpha in MultiIndex::all_of_order(n, ord) {
                let v = &lifted.components[&(j, alpha.clone())];
                for i in 0..n {
                    let mut e = total_derivative(v, i);
                    for k in 0..n {
                        let next = &lifted.components[&(j, alpha.incremented(k))];
                        e = e - next * &lifted.df[i][k];
                    }
                    let residual = normalize(&e)?.to_expr();
                    check.residuals.push(ContactResidual {
                        var: j,
                        alpha: alpha.clone(),
                        direction: i,
                        residual,
                    });
                }
            }
        }
    }
    Ok(check)
}
