//! Problem files: sectioned, line-oriented descriptions of a verification
//! task.
//!
//! ```text
//! [variables]
//! independent: t x
//! dependent: u
//! parameters: a
//! [functions]
//! f(x)
//! [system source]
//! u[t,t] = x*u[x,x]
//! [system target]
//! v[t',t'] = v[y',y'] - 3/y'*v[y']
//! [mapping]
//! t' = t
//! y' = 2*x^(1/2)
//! v' = x*u[x] - u
//! [param-mapping]
//! ubar = u + 2*a*u[x]*(a*u+1)^(-1)
//! [options]
//! order = 2
//! ```

use std::collections::BTreeMap;

use crate::error::Result;
use crate::expr::Expr;
use crate::ideal::{orient, OrientedSystem, Ranking};
use crate::jet::{total_derivative, JetContext};
use crate::parse::{parse_expr_at, ParseError};
use crate::prolong::Mapping;

#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub lhs: Expr,
    pub rhs: Expr,
}

impl Equation {
    pub fn new(lhs: Expr, rhs: Expr) -> Self {
        Equation { lhs, rhs }
    }

    /// `lhs - rhs`.
    pub fn residual(&self) -> Expr {
        &self.lhs - &self.rhs
    }
}

/// The `[param-mapping]` section: one series expression per coordinate in the
/// first declared parameter.
#[derive(Clone, Debug)]
pub struct ParamMappingSpec {
    pub param: String,
    pub xbar: Vec<Expr>,
    pub ubar: Vec<Expr>,
    /// Present when `ubar` was given as `u + 2 D_x(h)/h`.
    pub h: Option<Expr>,
}

#[derive(Clone, Debug)]
pub struct Problem {
    pub context: JetContext,
    /// Coordinates of the target jet space; equals `context` without a
    /// `[mapping]` section.
    pub target_context: JetContext,
    pub source_system: Vec<Equation>,
    pub target_system: Vec<Equation>,
    pub mapping: Option<Mapping>,
    pub param_mapping: Option<ParamMappingSpec>,
    pub options: BTreeMap<String, String>,
}

impl Problem {
    pub fn ansatz_functions(&self) -> Vec<&str> {
        self.context
            .functions()
            .iter()
            .map(|f| f.name.as_str())
            .collect()
    }

    pub fn ranking(&self) -> Result<Ranking> {
        match self.options.get("ranking") {
            Some(text) => Ranking::parse(text, &self.context),
            None => Ok(Ranking::for_solved_forms(
                &self.source_system,
                self.context.n(),
            )),
        }
    }

    pub fn oriented_source(&self) -> Result<OrientedSystem> {
        orient(&self.source_system, &self.context, self.ranking()?)
    }

    /// Integer option, if present.
    pub fn option_u32(&self, key: &str) -> std::result::Result<Option<u32>, String> {
        match self.options.get(key) {
            None => Ok(None),
            Some(v) => v
                .parse()
                .map(Some)
                .map_err(|_| format!("option {key} must be a non-negative integer, got {v}")),
        }
    }
}

const SECTIONS: [&str; 7] = [
    "variables",
    "functions",
    "system source",
    "system target",
    "mapping",
    "param-mapping",
    "options",
];
const OPTION_KEYS: [&str; 3] = ["order", "trunc", "ranking"];

/// Text of one side of an assignment and its byte offset in the line.
type Side<'a> = (&'a str, usize);

/// A content line: 1-based line number and the text with comments removed.
#[derive(Clone, Debug)]
struct Line<'a> {
    number: usize,
    text: &'a str,
}

impl Line<'_> {
    /// 1-based column of byte offset `at`.
    fn column(&self, at: usize) -> usize {
        self.text[..at].chars().count() + 1
    }

    fn invalid(&self, message: impl Into<String>) -> ParseError {
        ParseError::Invalid {
            line: self.number,
            message: message.into(),
        }
    }

    fn syntax(&self, at: usize, message: impl Into<String>) -> ParseError {
        ParseError::Syntax {
            line: self.number,
            column: self.column(at),
            message: message.into(),
        }
    }

    /// Splits `lhs = rhs` and returns both sides with their byte offsets.
    fn split_assignment(&self) -> std::result::Result<(Side<'_>, Side<'_>), ParseError> {
        let mut eqs = self.text.match_indices('=').map(|(i, _)| i);
        let Some(at) = eqs.next() else {
            return Err(self.syntax(self.text.len(), "expected '='"));
        };
        if let Some(second) = eqs.next() {
            return Err(self.syntax(second, "more than one '=' on a line"));
        }
        Ok(((&self.text[..at], 0), (&self.text[at + 1..], at + 1)))
    }

    fn expr(
        &self,
        part: (&str, usize),
        ctx: &JetContext,
        strip_primes: bool,
    ) -> std::result::Result<Expr, ParseError> {
        parse_expr_at(part.0, ctx, self.number, self.column(part.1), strip_primes)
    }
}

struct Section<'a> {
    header_line: usize,
    lines: Vec<Line<'a>>,
}

fn split_sections(
    text: &str,
) -> std::result::Result<BTreeMap<&'static str, Section<'_>>, ParseError> {
    let mut sections: BTreeMap<&'static str, Section> = BTreeMap::new();
    let mut current: Option<&'static str> = None;
    for (i, raw) in text.lines().enumerate() {
        let number = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let trimmed = body.trim();
        if trimmed.is_empty() {
            continue;
        }
        if let Some(inner) = trimmed.strip_prefix('[') {
            let Some(name) = inner.strip_suffix(']') else {
                let col = body.find('[').unwrap_or(0);
                return Err(Line { number, text: body }.syntax(col, "unterminated section header"));
            };
            let name = name.split_whitespace().collect::<Vec<_>>().join(" ");
            let Some(known) = SECTIONS.iter().find(|s| **s == name) else {
                return Err(ParseError::UnknownSection { name, line: number });
            };
            if sections.contains_key(known) {
                return Err(ParseError::DuplicateSection { name, line: number });
            }
            sections.insert(
                known,
                Section {
                    header_line: number,
                    lines: Vec::new(),
                },
            );
            current = Some(known);
            continue;
        }
        match current {
            Some(name) => sections
                .get_mut(name)
                .expect("inserted")
                .lines
                .push(Line { number, text: body }),
            None => {
                return Err(
                    Line { number, text: body }.invalid("content before the first section header")
                )
            }
        }
    }
    Ok(sections)
}

fn words(text: &str) -> Vec<&str> {
    text.split(|c: char| c.is_whitespace() || c == ',')
        .filter(|w| !w.is_empty())
        .collect()
}

fn parse_variables(section: &Section) -> std::result::Result<JetContext, ParseError> {
    let mut independent = None;
    let mut dependent = None;
    let mut parameters = Vec::new();
    for line in &section.lines {
        let Some((key, value)) = line.text.split_once(':') else {
            return Err(line.syntax(line.text.len(), "expected 'key: names'"));
        };
        let names = words(value);
        match key.trim() {
            "independent" => independent = Some(names),
            "dependent" => dependent = Some(names),
            "parameters" => parameters.extend(names),
            other => return Err(line.invalid(format!("unknown variable kind '{other}'"))),
        }
    }
    let header = Line {
        number: section.header_line,
        text: "",
    };
    let independent =
        independent.ok_or_else(|| header.invalid("no independent variables declared"))?;
    let dependent = dependent.ok_or_else(|| header.invalid("no dependent variables declared"))?;
    JetContext::new(&independent, &dependent)
        .and_then(|c| c.with_parameters(&parameters))
        .map_err(|e| header.invalid(e.to_string()))
}

fn parse_functions(
    section: &Section,
    mut ctx: JetContext,
) -> std::result::Result<JetContext, ParseError> {
    for line in &section.lines {
        let mut rest = line.text;
        let mut offset = 0;
        while let Some(open) = rest.find('(') {
            let Some(close) = rest[open..].find(')').map(|c| c + open) else {
                return Err(line.syntax(offset + open, "unclosed '('"));
            };
            let name = rest[..open].trim().trim_start_matches(',').trim();
            let arg = rest[open + 1..close].trim();
            if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
                return Err(line.syntax(offset, "expected a function name"));
            }
            if ctx.independent_index(arg).is_none() {
                return Err(ParseError::UnknownSymbol {
                    name: arg.to_string(),
                    line: line.number,
                    column: line.column(offset + open + 1),
                });
            }
            ctx = ctx
                .with_function(name, arg)
                .map_err(|e| line.invalid(e.to_string()))?;
            offset += close + 1;
            rest = &rest[close + 1..];
        }
        if !rest.trim().trim_matches(',').trim().is_empty() {
            return Err(line.syntax(offset, "expected 'name(variable)'"));
        }
    }
    Ok(ctx)
}

fn parse_equations(
    section: Option<&Section>,
    ctx: &JetContext,
    strip_primes: bool,
) -> std::result::Result<Vec<Equation>, ParseError> {
    let Some(section) = section else {
        return Ok(Vec::new());
    };
    section
        .lines
        .iter()
        .map(|line| {
            let (lhs, rhs) = line.split_assignment()?;
            Ok(Equation::new(
                line.expr(lhs, ctx, strip_primes)?,
                line.expr(rhs, ctx, strip_primes)?,
            ))
        })
        .collect()
}

fn parse_mapping(section: &Section, ctx: &JetContext) -> std::result::Result<Mapping, ParseError> {
    let header = Line {
        number: section.header_line,
        text: "",
    };
    if section.lines.len() != ctx.n() + ctx.m() {
        return Err(header.invalid(format!(
            "expected {} lines (one per target coordinate), found {}",
            ctx.n() + ctx.m(),
            section.lines.len()
        )));
    }
    let mut names = Vec::new();
    let mut exprs = Vec::new();
    for line in &section.lines {
        let (lhs, rhs) = line.split_assignment()?;
        let name = lhs.0.trim().trim_end_matches('\'').trim();
        if name.is_empty() || !name.chars().all(|c| c.is_alphanumeric() || c == '_') {
            return Err(line.syntax(0, "expected a target coordinate name such as y'"));
        }
        names.push(name.to_string());
        exprs.push(line.expr(rhs, ctx, false)?);
    }
    let (f_names, g_names) = names.split_at(ctx.n());
    let target = ctx
        .renamed(f_names, g_names)
        .map_err(|e| header.invalid(e.to_string()))?;
    let g = exprs.split_off(ctx.n());
    Mapping::new(ctx.clone(), target, exprs, g).map_err(|e| header.invalid(e.to_string()))
}

fn parse_param_mapping(
    section: &Section,
    ctx: &JetContext,
) -> std::result::Result<ParamMappingSpec, ParseError> {
    let header = Line {
        number: section.header_line,
        text: "",
    };
    let param = ctx
        .parameters()
        .first()
        .cloned()
        .ok_or_else(|| header.invalid("a parameter must be declared for [param-mapping]"))?;
    let mut xbar: Vec<Option<Expr>> = vec![None; ctx.n()];
    let mut ubar: Vec<Option<Expr>> = vec![None; ctx.m()];
    let mut h = None;
    for line in &section.lines {
        let (lhs, rhs) = line.split_assignment()?;
        let key = lhs.0.trim();
        let value = line.expr(rhs, ctx, false)?;
        let slot = if key == "h" {
            &mut h
        } else if let Some(i) = key
            .strip_suffix("bar")
            .and_then(|b| ctx.independent_index(b))
        {
            &mut xbar[i]
        } else if let Some(j) = key.strip_suffix("bar").and_then(|b| ctx.dependent_index(b)) {
            &mut ubar[j]
        } else {
            return Err(line.invalid(format!(
                "'{key}' names no coordinate; expected e.g. xbar or ubar"
            )));
        };
        if slot.is_some() {
            return Err(line.invalid(format!("'{key}' given twice")));
        }
        *slot = Some(value);
    }
    if let Some(h) = &h {
        if ctx.m() != 1 {
            return Err(header.invalid("'h' requires exactly one dependent variable"));
        }
        if ubar[0].is_some() {
            return Err(header.invalid("give either 'h' or the dependent coordinate, not both"));
        }
        let u = ctx.u(0, &vec![0; ctx.n()]);
        ubar[0] = Some(u + Expr::int(2) * total_derivative(h, 0) / h);
    }
    let xbar = xbar
        .into_iter()
        .enumerate()
        .map(|(i, e)| e.unwrap_or_else(|| Expr::indep(i)))
        .collect();
    let ubar = ubar
        .into_iter()
        .enumerate()
        .map(|(j, e)| e.unwrap_or_else(|| ctx.u(j, &vec![0; ctx.n()])))
        .collect();
    Ok(ParamMappingSpec {
        param,
        xbar,
        ubar,
        h,
    })
}

fn parse_options(section: &Section) -> std::result::Result<BTreeMap<String, String>, ParseError> {
    let mut out = BTreeMap::new();
    for line in &section.lines {
        let (key, value) = line.split_assignment()?;
        let key = key.0.trim();
        if !OPTION_KEYS.contains(&key) {
            return Err(line.invalid(format!("unknown option '{key}'")));
        }
        if out
            .insert(key.to_string(), value.0.trim().to_string())
            .is_some()
        {
            return Err(line.invalid(format!("option '{key}' given twice")));
        }
    }
    Ok(out)
}

pub fn parse_problem(text: &str) -> std::result::Result<Problem, ParseError> {
    let sections = split_sections(text)?;
    let variables = sections
        .get("variables")
        .ok_or_else(|| ParseError::MissingSection("variables".into()))?;
    let mut context = parse_variables(variables)?;
    if let Some(f) = sections.get("functions") {
        context = parse_functions(f, context)?;
    }
    if let (Some(_), Some(p)) = (sections.get("mapping"), sections.get("param-mapping")) {
        return Err(ParseError::DuplicateMapping {
            line: p.header_line.max(sections["mapping"].header_line),
        });
    }
    let source_system = parse_equations(sections.get("system source"), &context, false)?;
    let mapping = sections
        .get("mapping")
        .map(|s| parse_mapping(s, &context))
        .transpose()?;
    let target_context = mapping
        .as_ref()
        .map(|m| m.target.clone())
        .unwrap_or_else(|| context.clone());
    let target_system = parse_equations(sections.get("system target"), &target_context, true)?;
    let param_mapping = sections
        .get("param-mapping")
        .map(|s| parse_param_mapping(s, &context))
        .transpose()?;
    let options = sections
        .get("options")
        .map(parse_options)
        .transpose()?
        .unwrap_or_default();
    Ok(Problem {
        context,
        target_context,
        source_system,
        target_system,
        mapping,
        param_mapping,
        options,
    })
}
