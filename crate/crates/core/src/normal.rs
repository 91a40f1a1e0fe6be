//! Canonical forms for expressions.
//!
//! A [`NormalForm`] is a fraction `num / (B_1^k_1 ... B_r^k_r)` where `num`
//! is a polynomial over generators with rational (possibly negative)
//! exponents and each `B_i` is a primitive multi-term polynomial. Generators
//! are jet atoms, logarithms of normal forms and radicals `b^f` of
//! non-monomial normal forms with `0 < f < 1`.
//!
//! An expression is zero iff its numerator is the empty polynomial, so
//! [`equal`] is exact. Denominator bases are cancelled against the
//! numerator by exact division whenever possible.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, Rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Gen {
    Atom(Atom),
    Log(Box<NormalForm>),
    /// Fractional power of a normal form that has no rational root.
    Radical(Box<NormalForm>),
}

impl Gen {
    fn mentions(&self, atom: &Atom) -> bool {
        match self {
            Gen::Atom(a) => a == atom,
            Gen::Log(nf) | Gen::Radical(nf) => nf.mentions(atom),
        }
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        match self {
            Gen::Atom(a) => {
                out.insert(a.clone());
            }
            Gen::Log(nf) | Gen::Radical(nf) => nf.collect_atoms(out),
        }
    }

    fn to_expr(&self) -> Expr {
        match self {
            Gen::Atom(a) => Expr::atom(a.clone()),
            Gen::Log(nf) => Expr::log(nf.to_expr()),
            Gen::Radical(nf) => nf.to_expr(),
        }
    }
}

/// Product of generator powers, sorted by generator, exponents nonzero.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial(Vec<(Gen, Rational)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn gen(g: Gen, e: Rational) -> Self {
        if e.is_zero() {
            Monomial::one()
        } else {
            Monomial(vec![(g, e)])
        }
    }

    pub fn factors(&self) -> &[(Gen, Rational)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, g: &Gen) -> Rational {
        match self.0.binary_search_by(|(h, _)| h.cmp(g)) {
            Ok(i) => self.0[i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    let e = &self.0[i].1 + &other.0[j].1;
                    if !e.is_zero() {
                        out.push((self.0[i].0.clone(), e));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        Monomial(out)
    }

    pub fn pow(&self, r: &Rational) -> Monomial {
        if r.is_zero() {
            return Monomial::one();
        }
        Monomial(self.0.iter().map(|(g, e)| (g.clone(), e * r)).collect())
    }

    pub fn inv(&self) -> Monomial {
        Monomial(self.0.iter().map(|(g, e)| (g.clone(), -e)).collect())
    }

    pub fn div(&self, other: &Monomial) -> Monomial {
        self.mul(&other.inv())
    }

    fn all_nonnegative(&self) -> bool {
        self.0.iter().all(|(_, e)| !e.is_negative())
    }

    /// Lexicographic monomial order, the smallest generator being the most
    /// significant. Compatible with multiplication.
    pub fn lex_cmp(&self, other: &Monomial) -> Ordering {
        let (mut i, mut j) = (0, 0);
        let zero = Rational::zero();
        loop {
            let (a, b) = match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some((_, e)), None) => {
                    i += 1;
                    (e, &zero)
                }
                (None, Some((_, f))) => {
                    j += 1;
                    (&zero, f)
                }
                (Some((g, e)), Some((h, f))) => match g.cmp(h) {
                    Ordering::Less => {
                        i += 1;
                        (e, &zero)
                    }
                    Ordering::Greater => {
                        j += 1;
                        (&zero, f)
                    }
                    Ordering::Equal => {
                        i += 1;
                        j += 1;
                        (e, f)
                    }
                },
            };
            match a.cmp(b) {
                Ordering::Equal => continue,
                ord => return ord,
            }
        }
    }

    /// Componentwise minimum, absent generators counting as exponent zero.
    fn min_with(&self, other: &Monomial) -> Monomial {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let ord = match (self.0.get(i), other.0.get(j)) {
                (Some((g, _)), Some((h, _))) => g.cmp(h),
                (Some(_), None) => Ordering::Less,
                (None, Some(_)) => Ordering::Greater,
                (None, None) => unreachable!(),
            };
            match ord {
                Ordering::Less => {
                    let (g, e) = &self.0[i];
                    if e.is_negative() {
                        out.push((g.clone(), e.clone()));
                    }
                    i += 1;
                }
                Ordering::Greater => {
                    let (g, e) = &other.0[j];
                    if e.is_negative() {
                        out.push((g.clone(), e.clone()));
                    }
                    j += 1;
                }
                Ordering::Equal => {
                    let (g, e) = &self.0[i];
                    let f = &other.0[j].1;
                    let m = if e < f { e } else { f };
                    if !m.is_zero() {
                        out.push((g.clone(), m.clone()));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Monomial(out)
    }

    fn has_bad_radical(&self) -> bool {
        self.0.iter().any(|(g, e)| {
            matches!(g, Gen::Radical(_)) && (e.is_negative() || *e >= Rational::one())
        })
    }
}

/// Sparse polynomial with rational coefficients over [`Monomial`]s.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Poly(BTreeMap<Monomial, Rational>);

impl Poly {
    pub fn zero() -> Self {
        Poly(BTreeMap::new())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::term(Monomial::one(), c)
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero();
        p.add_term(m, c);
        p
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.0.iter()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.0.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let (big, small) = if self.len() >= other.len() {
            (self, other)
        } else {
            (other, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.0 {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.0 {
            out.add_term(m.clone(), -c);
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly(self.0.iter().map(|(m, d)| (m.clone(), d * c)).collect())
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (n, d) in &self.0 {
            out.add_term(n.mul(m), d * c);
        }
        out
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (m, c) in &self.0 {
            for (n, d) in &other.0 {
                out.add_term(m.mul(n), c * d);
            }
        }
        out
    }

    pub fn pow(&self, k: u32) -> Poly {
        let mut result = Poly::constant(Rational::one());
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        result
    }

    pub fn single_term(&self) -> Option<(&Monomial, &Rational)> {
        if self.0.len() == 1 {
            self.0.iter().next()
        } else {
            None
        }
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.0.is_empty() {
            return Some(Rational::zero());
        }
        match self.single_term() {
            Some((m, c)) if m.is_one() => Some(c.clone()),
            _ => None,
        }
    }

    fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.0.iter().max_by(|a, b| a.0.lex_cmp(b.0))
    }

    fn min_monomial(&self) -> Monomial {
        let mut it = self.0.keys();
        let Some(first) = it.next() else {
            return Monomial::one();
        };
        let mut m = first.clone();
        for n in it {
            m = m.min_with(n);
        }
        m
    }

    fn max_exponents(&self) -> BTreeMap<&Gen, &Rational> {
        let mut out: BTreeMap<&Gen, &Rational> = BTreeMap::new();
        for m in self.0.keys() {
            for (g, e) in &m.0 {
                let slot = out.entry(g).or_insert(e);
                if e > *slot {
                    *slot = e;
                }
            }
        }
        out
    }

    /// Writes `self = c * m * B` with `B` free of monomial factors and with
    /// leading coefficient one.
    pub fn make_primitive(&self) -> (Rational, Monomial, Poly) {
        if let Some((m, c)) = self.single_term() {
            return (c.clone(), m.clone(), Poly::constant(Rational::one()));
        }
        let m = self.min_monomial();
        let inv = m.inv();
        let shifted = self.mul_term(&inv, &Rational::one());
        let c = shifted
            .leading()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::one);
        let b = shifted.scale(&c.recip());
        (c, m, b)
    }

    /// Exact quotient `self / b` for a primitive `b`, or `None` when `b` does
    /// not divide `self`.
    pub fn div_exact(&self, b: &Poly) -> Option<Poly> {
        if self.is_zero() {
            return Some(Poly::zero());
        }
        let shift = self.min_monomial();
        let mut rem = self.mul_term(&shift.inv(), &Rational::one());
        let rem_max = rem.max_exponents();
        for (g, e) in b.max_exponents() {
            match rem_max.get(g) {
                Some(f) if *f >= e => {}
                _ => return None,
            }
        }
        let (lb, cb) = b.leading()?;
        let (lb, cb) = (lb.clone(), cb.clone());
        let mut quotient = Poly::zero();
        let mut guard = 0usize;
        while !rem.is_zero() {
            guard += 1;
            if guard > 200_000 {
                return None;
            }
            let (lm, lc) = rem.leading().map(|(m, c)| (m.clone(), c.clone()))?;
            let qm = lm.div(&lb);
            if !qm.all_nonnegative() {
                return None;
            }
            let qc = lc / &cb;
            rem = rem.sub(&b.mul_term(&qm, &qc));
            quotient.add_term(qm, qc);
        }
        Some(quotient.mul_term(&shift, &Rational::one()))
    }

    fn mentions(&self, atom: &Atom) -> bool {
        self.0
            .keys()
            .any(|m| m.0.iter().any(|(g, _)| g.mentions(atom)))
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        for m in self.0.keys() {
            for (g, _) in &m.0 {
                g.collect_atoms(out);
            }
        }
    }

    fn to_expr(&self) -> Expr {
        let mut terms: Vec<(&Monomial, &Rational)> = self.0.iter().collect();
        terms.sort_by(|a, b| b.0.lex_cmp(a.0));
        Expr::sum(terms.into_iter().map(|(m, c)| monomial_expr(m, c)))
    }
}

fn monomial_expr(m: &Monomial, c: &Rational) -> Expr {
    let mut parts = vec![Expr::constant(c.clone())];
    for (g, e) in &m.0 {
        parts.push(Expr::pow(g.to_expr(), e.clone()));
    }
    Expr::product(parts)
}

/// Canonical representative of an expression's equivalence class.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NormalForm {
    num: Poly,
    /// Sorted, primitive multi-term bases with positive multiplicities.
    den: Vec<(Poly, u32)>,
}

impl NormalForm {
    pub fn zero() -> Self {
        NormalForm::default()
    }

    pub fn one() -> Self {
        NormalForm::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        NormalForm {
            num: Poly::constant(c),
            den: Vec::new(),
        }
    }

    pub fn from_gen(g: Gen) -> Self {
        NormalForm {
            num: Poly::term(Monomial::gen(g, Rational::one()), Rational::one()),
            den: Vec::new(),
        }
    }

    pub fn numerator(&self) -> &Poly {
        &self.num
    }

    pub fn denominator(&self) -> &[(Poly, u32)] {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn as_constant(&self) -> Option<Rational> {
        if self.den.is_empty() {
            self.num.as_constant()
        } else {
            None
        }
    }

    /// Number of numerator terms.
    pub fn term_count(&self) -> usize {
        self.num.len()
    }

    fn build(num: Poly, den: Vec<(Poly, u32)>) -> Result<NormalForm> {
        if num.is_zero() {
            return Ok(NormalForm::zero());
        }
        let fixed = fixup_radicals(num)?;
        let mut den = if fixed.den.is_empty() {
            den
        } else {
            merge_den(&den, &fixed.den, |a, b| a + b)
        };
        let mut num = fixed.num;
        for (b, k) in den.iter_mut() {
            while *k > 0 {
                match num.div_exact(b) {
                    Some(q) => {
                        num = q;
                        *k -= 1;
                    }
                    None => break,
                }
            }
        }
        den.retain(|(_, k)| *k > 0);
        Ok(NormalForm { num, den })
    }

    pub fn add(&self, other: &NormalForm) -> Result<NormalForm> {
        if self.is_zero() {
            return Ok(other.clone());
        }
        if other.is_zero() {
            return Ok(self.clone());
        }
        if self.den.is_empty() && other.den.is_empty() {
            return Ok(NormalForm {
                num: self.num.add(&other.num),
                den: Vec::new(),
            });
        }
        if self.den == other.den {
            return NormalForm::build(self.num.add(&other.num), self.den.clone());
        }
        let common = merge_den(&self.den, &other.den, |a, b| a.max(b));
        let a = self.num.mul(&expand_den(&quotient_den(&common, &self.den)));
        let b = other
            .num
            .mul(&expand_den(&quotient_den(&common, &other.den)));
        NormalForm::build(a.add(&b), common)
    }

    pub fn neg(&self) -> NormalForm {
        NormalForm {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }

    pub fn sub(&self, other: &NormalForm) -> Result<NormalForm> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> NormalForm {
        if c.is_zero() {
            return NormalForm::zero();
        }
        NormalForm {
            num: self.num.scale(c),
            den: self.den.clone(),
        }
    }

    pub fn mul(&self, other: &NormalForm) -> Result<NormalForm> {
        if self.is_zero() || other.is_zero() {
            return Ok(NormalForm::zero());
        }
        let num = self.num.mul(&other.num);
        let den = if other.den.is_empty() {
            self.den.clone()
        } else if self.den.is_empty() {
            other.den.clone()
        } else {
            merge_den(&self.den, &other.den, |a, b| a + b)
        };
        NormalForm::build(num, den)
    }

    pub fn inv(&self) -> Result<NormalForm> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let (c, m, b) = self.num.make_primitive();
        let num = expand_den(&self.den).mul_term(&m.inv(), &c.recip());
        let den = if b.as_constant().is_some() {
            Vec::new()
        } else {
            vec![(b, 1)]
        };
        NormalForm::build(num, den)
    }

    pub fn powi(&self, k: i64) -> Result<NormalForm> {
        if k == 0 {
            return Ok(NormalForm::one());
        }
        if k < 0 {
            return self.inv()?.powi(-k);
        }
        if self.is_zero() {
            return Ok(NormalForm::zero());
        }
        if let Some((m, c)) = self.num.single_term() {
            if self.den.is_empty() {
                let kr = Rational::from_integer(BigInt::from(k));
                let num = Poly::term(m.pow(&kr), num_traits::pow::Pow::pow(c, k as u32));
                return NormalForm::build(num, Vec::new());
            }
        }
        let mut result = NormalForm::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                result = result.mul(&base)?;
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base)?;
            }
        }
        Ok(result)
    }

    pub fn pow(&self, r: &Rational) -> Result<NormalForm> {
        if r.is_integer() {
            let k = r
                .to_integer()
                .to_i64()
                .ok_or_else(|| Error::Unsupported("exponent too large".into()))?;
            return self.powi(k);
        }
        if self.is_zero() {
            return if r.is_negative() {
                Err(Error::DivisionByZero)
            } else {
                Ok(NormalForm::zero())
            };
        }
        let k = r.floor();
        let frac = r - &k;
        let whole = self.powi(
            k.to_integer()
                .to_i64()
                .ok_or_else(|| Error::Unsupported("exponent too large".into()))?,
        )?;
        whole.mul(&self.fractional_root(&frac)?)
    }

    fn fractional_root(&self, f: &Rational) -> Result<NormalForm> {
        if self.den.is_empty() {
            if let Some((m, c)) = self.num.single_term() {
                if c.is_positive() {
                    let mono = m.pow(f);
                    let num = match exact_root(c, f) {
                        Some(rc) => Poly::term(mono, rc),
                        None => {
                            let g = Gen::Radical(Box::new(NormalForm::constant(c.clone())));
                            Poly::term(mono.mul(&Monomial::gen(g, f.clone())), Rational::one())
                        }
                    };
                    return NormalForm::build(num, Vec::new());
                }
            }
        }
        let g = Gen::Radical(Box::new(self.clone()));
        Ok(NormalForm {
            num: Poly::term(Monomial::gen(g, f.clone()), Rational::one()),
            den: Vec::new(),
        })
    }

    pub fn log(&self) -> Result<NormalForm> {
        if self.is_zero() {
            return Err(Error::Domain("logarithm of zero".into()));
        }
        if self.as_constant().map(|c| c.is_one()).unwrap_or(false) {
            return Ok(NormalForm::zero());
        }
        Ok(NormalForm::from_gen(Gen::Log(Box::new(self.clone()))))
    }

    pub fn to_expr(&self) -> Expr {
        let mut factors = vec![self.num.to_expr()];
        for (b, k) in &self.den {
            factors.push(Expr::pow(
                b.to_expr(),
                -Rational::from_integer(BigInt::from(*k)),
            ));
        }
        Expr::product(factors)
    }

    pub fn mentions(&self, atom: &Atom) -> bool {
        self.num.mentions(atom) || self.den.iter().any(|(b, _)| b.mentions(atom))
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<Atom>) {
        self.num.collect_atoms(out);
        for (b, _) in &self.den {
            b.collect_atoms(out);
        }
    }
}

fn merge_den(
    a: &[(Poly, u32)],
    b: &[(Poly, u32)],
    combine: fn(u32, u32) -> u32,
) -> Vec<(Poly, u32)> {
    let mut map: BTreeMap<Poly, u32> = a.iter().cloned().collect();
    for (p, k) in b {
        let slot = map.entry(p.clone()).or_insert(0);
        *slot = combine(*slot, *k);
    }
    map.into_iter().filter(|(_, k)| *k > 0).collect()
}

fn quotient_den(common: &[(Poly, u32)], part: &[(Poly, u32)]) -> Vec<(Poly, u32)> {
    common
        .iter()
        .map(|(p, k)| {
            let sub = part
                .iter()
                .find(|(q, _)| q == p)
                .map(|(_, j)| *j)
                .unwrap_or(0);
            (p.clone(), k - sub)
        })
        .filter(|(_, k)| *k > 0)
        .collect()
}

fn expand_den(den: &[(Poly, u32)]) -> Poly {
    let mut out = Poly::constant(Rational::one());
    for (b, k) in den {
        out = out.mul(&b.pow(*k));
    }
    out
}

/// Brings every radical exponent into `[0, 1)`, moving integer parts into
/// ordinary powers of the radical's base.
fn fixup_radicals(num: Poly) -> Result<NormalForm> {
    if !num.0.keys().any(Monomial::has_bad_radical) {
        return Ok(NormalForm {
            num,
            den: Vec::new(),
        });
    }
    let mut good = Poly::zero();
    let mut acc = NormalForm::zero();
    for (m, c) in num.0 {
        if !m.has_bad_radical() {
            good.add_term(m, c);
            continue;
        }
        let mut keep = Vec::new();
        let mut extra = NormalForm::one();
        for (g, e) in m.0 {
            if let Gen::Radical(base) = &g {
                let k = e.floor();
                let f = &e - &k;
                let k = k
                    .to_integer()
                    .to_i64()
                    .ok_or_else(|| Error::Unsupported("exponent too large".into()))?;
                extra = extra.mul(&base.powi(k)?)?;
                if !f.is_zero() {
                    keep.push((g, f));
                }
            } else {
                keep.push((g, e));
            }
        }
        let t = NormalForm {
            num: Poly::term(Monomial(keep), c),
            den: Vec::new(),
        }
        .mul(&extra)?;
        acc = acc.add(&t)?;
    }
    acc.add(&NormalForm {
        num: good,
        den: Vec::new(),
    })
}

fn exact_nth_root(n: &BigInt, k: u32) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.nth_root(k);
    if num_traits::pow::Pow::pow(&r, k) == *n {
        Some(r)
    } else {
        None
    }
}

/// `c^f` as an exact rational, when it exists (`c > 0`).
pub(crate) fn exact_root(c: &Rational, f: &Rational) -> Option<Rational> {
    let k = f.denom().to_u32()?;
    let p = f.numer().to_i32()?;
    let n = exact_nth_root(c.numer(), k)?;
    let d = exact_nth_root(c.denom(), k)?;
    Some(num_traits::pow::Pow::pow(Rational::new(n, d), p))
}

/// Normalizes an expression.
pub fn normalize(e: &Expr) -> Result<NormalForm> {
    match e {
        Expr::Constant(c) => Ok(NormalForm::constant(c.clone())),
        Expr::Atomic(a) => Ok(NormalForm::from_gen(Gen::Atom(a.clone()))),
        Expr::Sum(ts) => {
            let mut acc = NormalForm::zero();
            for t in ts.iter() {
                acc = acc.add(&normalize(t)?)?;
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = NormalForm::one();
            for f in fs.iter() {
                acc = acc.mul(&normalize(f)?)?;
                if acc.is_zero() {
                    break;
                }
            }
            Ok(acc)
        }
        Expr::Power(b, r) => normalize(b)?.pow(r),
        Expr::Log(a) => normalize(a)?.log(),
    }
}

/// Normalizes and converts back to a canonical expression tree.
pub fn simplify(e: &Expr) -> Result<Expr> {
    Ok(normalize(e)?.to_expr())
}

/// Semantic equality: `e1 - e2` normalizes to zero.
pub fn equal(e1: &Expr, e2: &Expr) -> Result<bool> {
    Ok(normalize(&(e1 - e2))?.is_zero())
}

pub fn is_zero(e: &Expr) -> Result<bool> {
    Ok(normalize(e)?.is_zero())
}

/// Splits `e` as a polynomial in `vars`: exponent vector to coefficient.
/// Coefficients are free of the listed atoms; zero coefficients are omitted.
pub fn collect(e: &Expr, vars: &[Atom]) -> Result<BTreeMap<Vec<u32>, Expr>> {
    collect_named(e, vars, |a| format!("{a:?}"))
}

/// [`collect`], naming offending atoms with `name` in errors.
pub fn collect_named(
    e: &Expr,
    vars: &[Atom],
    name: impl Fn(&Atom) -> String,
) -> Result<BTreeMap<Vec<u32>, Expr>> {
    let nf = normalize(e)?;
    for (b, _) in &nf.den {
        if let Some(v) = vars.iter().find(|v| b.mentions(v)) {
            return Err(Error::NotPolynomial(format!(
                "{} occurs in a denominator",
                name(v)
            )));
        }
    }
    let mut groups: BTreeMap<Vec<u32>, Poly> = BTreeMap::new();
    for (m, c) in nf.num.terms() {
        let mut key = vec![0u32; vars.len()];
        let mut rest = Vec::new();
        for (g, e) in m.factors() {
            match g {
                Gen::Atom(a) => {
                    if let Some(i) = vars.iter().position(|v| v == a) {
                        if !e.is_integer() || e.is_negative() {
                            return Err(Error::NotPolynomial(format!(
                                "{} has exponent {e}",
                                name(a)
                            )));
                        }
                        key[i] = e
                            .to_integer()
                            .to_u32()
                            .ok_or_else(|| Error::NotPolynomial("exponent too large".into()))?;
                        continue;
                    }
                }
                other => {
                    if let Some(v) = vars.iter().find(|v| other.mentions(v)) {
                        return Err(Error::NotPolynomial(format!(
                            "{} occurs inside a log or radical",
                            name(v)
                        )));
                    }
                }
            }
            rest.push((g.clone(), e.clone()));
        }
        groups
            .entry(key)
            .or_default()
            .add_term(Monomial(rest), c.clone());
    }
    let mut out = BTreeMap::new();
    for (k, p) in groups {
        let coeff = NormalForm::build(p, nf.den.clone())?;
        if !coeff.is_zero() {
            out.insert(k, coeff.to_expr());
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{int, rat};

    fn x() -> Expr {
        Expr::indep(0)
    }
    fn u() -> Expr {
        Expr::dep(0, vec![0, 0])
    }
    fn ux() -> Expr {
        Expr::dep(0, vec![1, 0])
    }
    fn uy() -> Expr {
        Expr::dep(0, vec![0, 1])
    }
    fn a() -> Expr {
        Expr::param("a")
    }

    #[test]
    fn cancellation_to_zero() {
        assert!(normalize(&(x() - x())).unwrap().is_zero());
        let e = ux() * (a() * u() + Expr::one()) - a() * u() * ux() - ux();
        assert!(normalize(&e).unwrap().is_zero());
    }

    #[test]
    fn exponent_addition() {
        let h = Expr::pow(x(), rat(1, 2));
        let nf = normalize(&(h.clone() * h)).unwrap();
        assert_eq!(nf, normalize(&x()).unwrap());
    }

    #[test]
    fn rational_function_cancellation() {
        let s = u() + Expr::one();
        let e = (u() * u() - Expr::one()) / s.clone();
        assert!(equal(&e, &(u() - Expr::one())).unwrap());
        let nf = normalize(&e).unwrap();
        assert!(nf.denominator().is_empty());
        let f = u() / s.clone() + Expr::one() / s;
        assert_eq!(normalize(&f).unwrap(), NormalForm::one());
    }

    #[test]
    fn commutativity_and_distinct_atoms() {
        assert!(equal(&(x() + u()), &(u() + x())).unwrap());
        assert!(!equal(&ux(), &uy()).unwrap());
    }

    #[test]
    fn log_derivative_identity() {
        let h = Expr::one() + a() * u();
        let dlog = crate::jet::total_derivative(&Expr::log(h.clone()), 0);
        let direct = crate::jet::total_derivative(&h, 0) / h;
        assert!(equal(&(Expr::int(2) * dlog), &(Expr::int(2) * direct)).unwrap());
    }

    #[test]
    fn division_by_zero_detected() {
        let e = Expr::powi(x() - x(), -1);
        assert_eq!(normalize(&e), Err(Error::DivisionByZero));
    }

    #[test]
    fn radicals_merge() {
        let s = Expr::one() + u();
        let r = Expr::pow(s.clone(), rat(1, 2));
        assert!(equal(&(r.clone() * r.clone()), &s).unwrap());
        let inv = Expr::pow(s.clone(), rat(-1, 2));
        assert!(equal(&(inv * r.clone()), &Expr::one()).unwrap());
        assert!(equal(&Expr::pow(Expr::int(4), rat(1, 2)), &Expr::int(2)).unwrap());
        let sqrt2 = Expr::pow(Expr::int(2), rat(1, 2));
        assert!(equal(&(sqrt2.clone() * sqrt2), &Expr::int(2)).unwrap());
    }

    #[test]
    fn partial_derivatives() {
        let e = Expr::powi(ux(), 2);
        assert!(equal(
            &e.partial(&Atom::dep(0, vec![1, 0])),
            &(Expr::int(2) * ux())
        )
        .unwrap());
        let e = x() * ux() + u();
        assert!(equal(&e.partial(&Atom::dep(0, vec![0, 0])), &Expr::one()).unwrap());
        let e = Expr::log(a() * u() + Expr::one());
        let expected = a() * Expr::powi(a() * u() + Expr::one(), -1);
        assert!(equal(&e.partial(&Atom::dep(0, vec![0, 0])), &expected).unwrap());
        let f = Expr::func("f", 0, 0);
        assert!(f.partial(&Atom::Independent(0)).is_zero());
    }

    #[test]
    fn collect_reads_coefficients() {
        let uxxx = Atom::dep(0, vec![3, 0]);
        let uxx = Atom::dep(0, vec![2, 0]);
        let f = Expr::func("f", 0, 0);
        let g = Expr::func("g", 0, 0);
        let e = x() * f.clone() * Expr::atom(uxxx.clone()) + g.clone() * Expr::atom(uxx.clone());
        let c = collect(&e, &[uxxx, uxx]).unwrap();
        assert_eq!(c.len(), 2);
        assert!(equal(&c[&vec![1, 0]], &(x() * f)).unwrap());
        assert!(equal(&c[&vec![0, 1]], &g).unwrap());

        let c = collect(&Expr::powi(ux(), 2), &[Atom::dep(0, vec![1, 0])]).unwrap();
        assert_eq!(c.len(), 1);
        assert!(c[&vec![2]].is_one());

        let bad = Expr::pow(x(), rat(1, 2));
        assert!(matches!(
            collect(&bad, &[Atom::Independent(0)]),
            Err(Error::NotPolynomial(_))
        ));
        let bad = Expr::one() / (ux() + Expr::one());
        assert!(matches!(
            collect(&bad, &[Atom::dep(0, vec![1, 0])]),
            Err(Error::NotPolynomial(_))
        ));
    }

    #[test]
    fn exact_roots() {
        assert_eq!(exact_root(&rat(9, 4), &rat(1, 2)), Some(rat(3, 2)));
        assert_eq!(exact_root(&int(8), &rat(2, 3)), Some(int(4)));
        assert_eq!(exact_root(&int(2), &rat(1, 2)), None);
    }
}
