//! Exact symbolic engine for contact mappings of jet spaces.

pub mod error;
pub mod eval;
pub mod expr;
pub mod format;
pub mod ideal;
pub mod jet;
pub mod normal;
pub mod parse;
pub mod problem;
pub mod prolong;
pub mod report;
pub mod series;

pub use error::{Error, Result};
pub use eval::{eval_numeric, Value};
pub use expr::{Atom, Expr, MultiIndex, Rational};
pub use format::{format_atom, format_expr};
pub use ideal::{
    determining_equations, is_member, orient, reduce, verify_solution_map, verify_symmetry,
    OrientedSystem, Ranking,
};
pub use jet::{jet_of_solution, total_derivative, total_derivative_multi, JetContext};
pub use normal::{collect, collect_named, equal, normalize, simplify, NormalForm};
pub use parse::{parse_expr, parse_target_expr, ParseError};
pub use problem::{parse_problem, Equation, Problem};
pub use prolong::{
    lift, pullback, symbolic_inverse, total_jacobian, verify_contact, LiftedMapping, Mapping,
};
pub use report::{Report, Verdict};
pub use series::{prolong_param, series_of_expr, ParamMapping, ParamSeries};
