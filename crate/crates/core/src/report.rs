//! Verification reports: residual normal forms plus seeded numeric spot checks.

use std::collections::{BTreeSet, HashMap};

use num_bigint::BigInt;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::Result;
use crate::eval::{eval_numeric, Value};
use crate::expr::{Atom, Expr, Rational};
use crate::normal::normalize;

pub const SPOT_CHECK_POINTS: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    Falsified,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Verified => "VERIFIED",
            Verdict::Falsified => "FALSIFIED",
        }
    }
}

/// One checked equation and what is left of it after reduction.
#[derive(Clone, Debug)]
pub struct Residual {
    pub label: String,
    pub normal_form: Expr,
}

/// A random point and the value of every residual there, in residual order.
#[derive(Clone, Debug)]
pub struct SpotCheck {
    pub assignment: Vec<(Atom, Rational)>,
    pub values: Vec<Value>,
}

#[derive(Clone, Debug)]
pub struct Report {
    pub verdict: Verdict,
    pub residuals: Vec<Residual>,
    pub spot_checks: Vec<SpotCheck>,
    pub notes: Vec<String>,
}

impl Report {
    /// Normalizes each residual; the verdict is VERIFIED iff all are zero.
    pub fn from_residuals(residuals: Vec<(String, Expr)>, seed: u64) -> Result<Report> {
        let mut out = Vec::with_capacity(residuals.len());
        for (label, e) in residuals {
            out.push(Residual {
                label,
                normal_form: normalize(&e)?.to_expr(),
            });
        }
        let verdict = if out.iter().all(|r| r.normal_form.is_zero()) {
            Verdict::Verified
        } else {
            Verdict::Falsified
        };
        let spot_checks = spot_checks(&out, seed);
        Ok(Report {
            verdict,
            residuals: out,
            spot_checks,
            notes: Vec::new(),
        })
    }

    pub fn is_verified(&self) -> bool {
        self.verdict == Verdict::Verified
    }

    pub fn nonzero(&self) -> impl Iterator<Item = &Residual> {
        self.residuals.iter().filter(|r| !r.normal_form.is_zero())
    }
}

fn random_positive(rng: &mut ChaCha8Rng) -> Rational {
    Rational::new(
        BigInt::from(rng.gen_range(1..=12)),
        BigInt::from(rng.gen_range(1..=5)),
    )
}

/// Evaluates the residuals at up to [`SPOT_CHECK_POINTS`] random points with
/// positive rational coordinates. Points where some residual is undefined are
/// redrawn a bounded number of times and then skipped.
fn spot_checks(residuals: &[Residual], seed: u64) -> Vec<SpotCheck> {
    let atoms: BTreeSet<Atom> = residuals
        .iter()
        .flat_map(|r| r.normal_form.atoms())
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for _ in 0..SPOT_CHECK_POINTS {
        for _attempt in 0..20 {
            let assignment: Vec<(Atom, Rational)> = atoms
                .iter()
                .map(|a| (a.clone(), random_positive(&mut rng)))
                .collect();
            let lookup: HashMap<Atom, Rational> = assignment.iter().cloned().collect();
            let values: Result<Vec<Value>> = residuals
                .iter()
                .map(|r| eval_numeric(&r.normal_form, &lookup))
                .collect();
            if let Ok(values) = values {
                out.push(SpotCheck { assignment, values });
                break;
            }
        }
    }
    out
}
