//! Numeric evaluation at rational points.
//!
//! Evaluation stays exact as long as every power has an integer exponent or
//! an exact rational root; logarithms and irrational roots fall back to `f64`
//! (about 15 significant digits).

use std::collections::HashMap;
use std::fmt;

use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::expr::{Atom, Expr, Rational};
use crate::normal::exact_root;

#[derive(Clone, Debug, PartialEq)]
pub enum Value {
    Exact(Rational),
    Approx(f64),
}

impl Value {
    pub fn to_f64(&self) -> f64 {
        match self {
            Value::Exact(r) => r.to_f64().unwrap_or(f64::NAN),
            Value::Approx(x) => *x,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        matches!(self, Value::Exact(r) if r.is_zero())
    }

    /// Exact comparison when both sides are exact, otherwise relative/absolute
    /// tolerance `tol`.
    pub fn agrees_with(&self, other: &Value, tol: f64) -> bool {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => a == b,
            _ => {
                let (a, b) = (self.to_f64(), other.to_f64());
                let scale = 1.0f64.max(a.abs()).max(b.abs());
                (a - b).abs() <= tol * scale
            }
        }
    }

    fn add(self, other: Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a + b),
            (a, b) => Value::Approx(a.to_f64() + b.to_f64()),
        }
    }

    fn mul(self, other: Value) -> Value {
        match (self, other) {
            (Value::Exact(a), Value::Exact(b)) => Value::Exact(a * b),
            (a, b) => Value::Approx(a.to_f64() * b.to_f64()),
        }
    }
}

impl fmt::Display for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Value::Exact(r) => write!(f, "{r}"),
            Value::Approx(x) => write!(f, "{x:.12e}"),
        }
    }
}

pub fn eval_numeric(e: &Expr, assignment: &HashMap<Atom, Rational>) -> Result<Value> {
    match e {
        Expr::Constant(c) => Ok(Value::Exact(c.clone())),
        Expr::Atomic(a) => assignment
            .get(a)
            .cloned()
            .map(Value::Exact)
            .ok_or_else(|| Error::Unassigned(format!("{a:?}"))),
        Expr::Sum(ts) => {
            let mut acc = Value::Exact(Rational::zero());
            for t in ts.iter() {
                acc = acc.add(eval_numeric(t, assignment)?);
            }
            Ok(acc)
        }
        Expr::Product(fs) => {
            let mut acc = Value::Exact(Rational::one());
            for f in fs.iter() {
                acc = acc.mul(eval_numeric(f, assignment)?);
            }
            Ok(acc)
        }
        Expr::Power(b, r) => power(eval_numeric(b, assignment)?, r),
        Expr::Log(a) => match eval_numeric(a, assignment)? {
            Value::Exact(v) if v.is_one() => Ok(Value::Exact(Rational::zero())),
            v => {
                let x = v.to_f64();
                if x <= 0.0 {
                    Err(Error::Domain(format!(
                        "logarithm of non-positive value {x}"
                    )))
                } else {
                    Ok(Value::Approx(x.ln()))
                }
            }
        },
    }
}

fn power(base: Value, r: &Rational) -> Result<Value> {
    let negative_exponent = r.is_negative();
    match base {
        Value::Exact(b) => {
            if b.is_zero() {
                return if negative_exponent {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Value::Exact(b))
                };
            }
            if r.is_integer() {
                let k = r
                    .to_integer()
                    .to_i32()
                    .ok_or_else(|| Error::Domain("exponent too large".into()))?;
                return Ok(Value::Exact(num_traits::pow::Pow::pow(&b, k)));
            }
            if b.is_negative() {
                return Err(Error::Domain(format!(
                    "fractional power of negative value {b}"
                )));
            }
            if let Some(v) = exact_root(&b, r) {
                return Ok(Value::Exact(v));
            }
            Ok(Value::Approx(
                b.to_f64()
                    .unwrap_or(f64::NAN)
                    .powf(r.to_f64().unwrap_or(f64::NAN)),
            ))
        }
        Value::Approx(x) => {
            if x == 0.0 && negative_exponent {
                return Err(Error::DivisionByZero);
            }
            if x < 0.0 && !r.is_integer() {
                return Err(Error::Domain(format!(
                    "fractional power of negative value {x}"
                )));
            }
            Ok(Value::Approx(x.powf(r.to_f64().unwrap_or(f64::NAN))))
        }
    }
}
