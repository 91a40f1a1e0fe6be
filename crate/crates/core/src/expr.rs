//! Immutable expression trees over jet coordinates.
//!
//! An [`Expr`] is built through the smart constructors on this type, which
//! flatten nested sums and products, fold rational constants and drop
//! neutral elements. No other simplification happens here; semantic
//! equality is decided by [`crate::normal::normalize`].

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

/// Arbitrary-precision rational number; the scalar field of every expression.
pub type Rational = num_rational::BigRational;

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Derivative counts per independent variable, in declaration order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn zero(n: usize) -> Self {
        MultiIndex(vec![0; n])
    }

    pub fn new(entries: Vec<u32>) -> Self {
        MultiIndex(entries)
    }

    /// The unit index `1_k`.
    pub fn unit(n: usize, k: usize) -> Self {
        let mut m = Self::zero(n);
        m.0[k] = 1;
        m
    }

    pub fn entries(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn order(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    /// `self + 1_k`
    pub fn incremented(&self, k: usize) -> Self {
        let mut m = self.clone();
        m.0[k] += 1;
        m
    }

    /// `self - 1_k`, or `None` when entry `k` is zero.
    pub fn decremented(&self, k: usize) -> Option<Self> {
        if self.0[k] == 0 {
            return None;
        }
        let mut m = self.clone();
        m.0[k] -= 1;
        Some(m)
    }

    /// Componentwise `self <= other`.
    pub fn divides(&self, other: &MultiIndex) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other - self`, when `self` divides `other`.
    pub fn complement_in(&self, other: &MultiIndex) -> Option<MultiIndex> {
        if !self.divides(other) {
            return None;
        }
        Some(MultiIndex(
            other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect(),
        ))
    }

    /// Index of the first nonzero entry.
    pub fn first_nonzero(&self) -> Option<usize> {
        self.0.iter().position(|&e| e > 0)
    }

    /// All multi-indices of length `n` with total order exactly `order`, in a
    /// fixed deterministic sequence.
    pub fn all_of_order(n: usize, order: u32) -> Vec<MultiIndex> {
        fn rec(n: usize, left: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
            if prefix.len() + 1 == n {
                prefix.push(left);
                out.push(MultiIndex(prefix.clone()));
                prefix.pop();
                return;
            }
            for e in (0..=left).rev() {
                prefix.push(e);
                rec(n, left - e, prefix, out);
                prefix.pop();
            }
        }
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        rec(n, order, &mut Vec::with_capacity(n), &mut out);
        out
    }
}

/// An indivisible symbol of the differential ring.
///
/// Independent and dependent coordinates are index-based against a
/// [`crate::jet::JetContext`]; parameters and unknown functions carry names.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Atom {
    Independent(usize),
    Dependent {
        var: usize,
        alpha: MultiIndex,
    },
    Parameter(Arc<str>),
    /// `k`-th derivative of a declared unknown function of one independent.
    FuncDeriv {
        name: Arc<str>,
        arg: usize,
        order: u32,
    },
}

impl Atom {
    pub fn param(name: &str) -> Atom {
        Atom::Parameter(Arc::from(name))
    }

    pub fn dep(var: usize, alpha: Vec<u32>) -> Atom {
        Atom::Dependent {
            var,
            alpha: MultiIndex(alpha),
        }
    }

    pub fn func(name: &str, arg: usize, order: u32) -> Atom {
        Atom::FuncDeriv {
            name: Arc::from(name),
            arg,
            order,
        }
    }

    pub fn is_dependent(&self) -> bool {
        matches!(self, Atom::Dependent { .. })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    Constant(Rational),
    Atomic(Atom),
    Sum(Arc<[Expr]>),
    Product(Arc<[Expr]>),
    Power(Arc<Expr>, Rational),
    Log(Arc<Expr>),
}

impl Expr {
    pub fn zero() -> Expr {
        Expr::Constant(Rational::zero())
    }

    pub fn one() -> Expr {
        Expr::Constant(Rational::one())
    }

    pub fn int(n: i64) -> Expr {
        Expr::Constant(int(n))
    }

    pub fn rational(n: i64, d: i64) -> Expr {
        Expr::Constant(rat(n, d))
    }

    pub fn constant(r: Rational) -> Expr {
        Expr::Constant(r)
    }

    pub fn atom(a: Atom) -> Expr {
        Expr::Atomic(a)
    }

    pub fn param(name: &str) -> Expr {
        Expr::Atomic(Atom::param(name))
    }

    pub fn indep(i: usize) -> Expr {
        Expr::Atomic(Atom::Independent(i))
    }

    pub fn dep(var: usize, alpha: Vec<u32>) -> Expr {
        Expr::Atomic(Atom::dep(var, alpha))
    }

    pub fn func(name: &str, arg: usize, order: u32) -> Expr {
        Expr::Atomic(Atom::func(name, arg, order))
    }

    pub fn as_constant(&self) -> Option<&Rational> {
        match self {
            Expr::Constant(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Constant(c) if c.is_zero())
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Expr::Constant(c) if c.is_one())
    }

    pub fn sum<I: IntoIterator<Item = Expr>>(terms: I) -> Expr {
        let mut constant = Rational::zero();
        let mut out = Vec::new();
        for t in terms {
            match t {
                Expr::Constant(c) => constant += c,
                Expr::Sum(inner) => {
                    for s in inner.iter() {
                        match s {
                            Expr::Constant(c) => constant += c,
                            other => out.push(other.clone()),
                        }
                    }
                }
                other => out.push(other),
            }
        }
        if !constant.is_zero() {
            out.push(Expr::Constant(constant));
        }
        match out.len() {
            0 => Expr::zero(),
            1 => out.pop().unwrap(),
            _ => Expr::Sum(out.into()),
        }
    }

    pub fn product<I: IntoIterator<Item = Expr>>(factors: I) -> Expr {
        let mut constant = Rational::one();
        let mut out = Vec::new();
        for f in factors {
            match f {
                Expr::Constant(c) => constant *= c,
                Expr::Product(inner) => {
                    for s in inner.iter() {
                        match s {
                            Expr::Constant(c) => constant *= c,
                            other => out.push(other.clone()),
                        }
                    }
                }
                other => out.push(other),
            }
            if constant.is_zero() {
                return Expr::zero();
            }
        }
        if !constant.is_one() {
            out.insert(0, Expr::Constant(constant));
        }
        match out.len() {
            0 => Expr::one(),
            1 => out.pop().unwrap(),
            _ => Expr::Product(out.into()),
        }
    }

    /// `base^exponent`. Integer powers of nonzero constants are folded.
    pub fn pow(base: Expr, exponent: Rational) -> Expr {
        if exponent.is_zero() {
            return Expr::one();
        }
        if exponent.is_one() {
            return base;
        }
        if let Expr::Constant(c) = &base {
            if exponent.is_integer() && !c.is_zero() {
                if let Some(k) = exponent.to_integer().to_i32() {
                    return Expr::Constant(num_traits::pow::Pow::pow(c, k));
                }
            }
            if c.is_one() {
                return Expr::one();
            }
        }
        Expr::Power(Arc::new(base), exponent)
    }

    pub fn powi(base: Expr, k: i64) -> Expr {
        Expr::pow(base, int(k))
    }

    pub fn recip(self) -> Expr {
        Expr::powi(self, -1)
    }

    pub fn log(arg: Expr) -> Expr {
        Expr::Log(Arc::new(arg))
    }

    pub fn scale(self, c: Rational) -> Expr {
        Expr::product([Expr::Constant(c), self])
    }

    /// Rebuilds the expression bottom-up, replacing atoms for which `f`
    /// returns a value. Replacement is simultaneous.
    pub fn map_atoms(&self, f: &dyn Fn(&Atom) -> Option<Expr>) -> Expr {
        match self {
            Expr::Constant(_) => self.clone(),
            Expr::Atomic(a) => f(a).unwrap_or_else(|| self.clone()),
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.map_atoms(f))),
            Expr::Product(fs) => Expr::product(fs.iter().map(|t| t.map_atoms(f))),
            Expr::Power(b, r) => Expr::pow(b.map_atoms(f), r.clone()),
            Expr::Log(a) => Expr::log(a.map_atoms(f)),
        }
    }

    /// Simultaneous substitution of atoms; unbound atoms are untouched.
    pub fn substitute(&self, bindings: &HashMap<Atom, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        self.map_atoms(&|a| bindings.get(a).cloned())
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Expr::Constant(_) => {}
            Expr::Atomic(a) => {
                out.insert(a.clone());
            }
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().for_each(|t| t.collect_atoms(out)),
            Expr::Power(b, _) | Expr::Log(b) => b.collect_atoms(out),
        }
    }

    pub fn contains_atom(&self, atom: &Atom) -> bool {
        match self {
            Expr::Constant(_) => false,
            Expr::Atomic(a) => a == atom,
            Expr::Sum(ts) | Expr::Product(ts) => ts.iter().any(|t| t.contains_atom(atom)),
            Expr::Power(b, _) | Expr::Log(b) => b.contains_atom(atom),
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Constant(_) | Expr::Atomic(_) => 1,
            Expr::Sum(ts) | Expr::Product(ts) => 1 + ts.iter().map(Expr::size).sum::<usize>(),
            Expr::Power(b, _) | Expr::Log(b) => 1 + b.size(),
        }
    }

    /// Applies a derivation given by its action on atoms.
    pub(crate) fn derive_with(&self, on_atom: &dyn Fn(&Atom) -> Expr) -> Expr {
        match self {
            Expr::Constant(_) => Expr::zero(),
            Expr::Atomic(a) => on_atom(a),
            Expr::Sum(ts) => Expr::sum(ts.iter().map(|t| t.derive_with(on_atom))),
            Expr::Product(fs) => {
                let mut terms = Vec::with_capacity(fs.len());
                for (i, f) in fs.iter().enumerate() {
                    let df = f.derive_with(on_atom);
                    if df.is_zero() {
                        continue;
                    }
                    let mut parts: Vec<Expr> = Vec::with_capacity(fs.len());
                    for (j, g) in fs.iter().enumerate() {
                        if i != j {
                            parts.push(g.clone());
                        }
                    }
                    parts.push(df);
                    terms.push(Expr::product(parts));
                }
                Expr::sum(terms)
            }
            Expr::Power(b, r) => {
                let db = b.derive_with(on_atom);
                if db.is_zero() {
                    return Expr::zero();
                }
                let lowered = Expr::pow((**b).clone(), r - Rational::one());
                Expr::product([Expr::Constant(r.clone()), lowered, db])
            }
            Expr::Log(b) => {
                let db = b.derive_with(on_atom);
                if db.is_zero() {
                    return Expr::zero();
                }
                Expr::product([db, Expr::powi((**b).clone(), -1)])
            }
        }
    }

    /// Formal partial derivative treating every other atom as a constant.
    ///
    /// `FuncDeriv` atoms are opaque here; only the total derivative moves
    /// them to the next order.
    pub fn partial(&self, v: &Atom) -> Expr {
        self.derive_with(&|a| if a == v { Expr::one() } else { Expr::zero() })
    }
}

impl From<Atom> for Expr {
    fn from(a: Atom) -> Self {
        Expr::Atomic(a)
    }
}

impl From<i64> for Expr {
    fn from(n: i64) -> Self {
        Expr::int(n)
    }
}

impl From<Rational> for Expr {
    fn from(r: Rational) -> Self {
        Expr::Constant(r)
    }
}

macro_rules! binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs)
            }
        }
        impl $trait<&Expr> for Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self, rhs.clone())
            }
        }
        impl $trait<Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs)
            }
        }
        impl $trait<&Expr> for &Expr {
            type Output = Expr;
            fn $method(self, rhs: &Expr) -> Expr {
                let f: fn(Expr, Expr) -> Expr = $body;
                f(self.clone(), rhs.clone())
            }
        }
    };
}

binop!(Add, add, |a, b| Expr::sum([a, b]));
binop!(Sub, sub, |a, b| Expr::sum([a, -b]));
binop!(Mul, mul, |a, b| Expr::product([a, b]));
binop!(Div, div, |a, b| Expr::product([a, Expr::powi(b, -1)]));

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        match self {
            Expr::Constant(c) => Expr::Constant(-c),
            other => Expr::product([Expr::int(-1), other]),
        }
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -(self.clone())
    }
}

/// Context-free debug rendering; use [`crate::format::format_expr`] for
/// re-parseable output with declared names.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Constant(c) => write!(f, "{c}"),
            Expr::Atomic(a) => write!(f, "{a:?}"),
            Expr::Sum(ts) => {
                write!(f, "(")?;
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, " + ")?;
                    }
                    write!(f, "{t}")?;
                }
                write!(f, ")")
            }
            Expr::Product(ts) => {
                for (i, t) in ts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    write!(f, "{t}")?;
                }
                Ok(())
            }
            Expr::Power(b, r) => write!(f, "({b})^({r})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}
