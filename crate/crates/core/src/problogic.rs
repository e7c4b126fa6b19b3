//! Boolean expressions and their probabilities.
//!
//! Grammar (lowest to highest precedence):
//!
//! ```text
//! or_expr  := xor_expr ("or" xor_expr)*
//! xor_expr := and_expr ("xor" and_expr)*
//! and_expr := unary ("and" unary)*
//! unary    := "not" unary | atom
//! atom     := identifier | "0" | "1" | "true" | "false" | "(" or_expr ")"
//! ```
//!
//! Binary connectives are left-associative.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::copula::{self, CopulaParam, UnitValue};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LogicError {
    #[error("syntax error at byte {offset}: expected {}", expected.join(" | "))]
    Syntax {
        offset: usize,
        expected: Vec<&'static str>,
    },
    #[error("unbound variable `{0}`")]
    Unbound(String),
    #[error("value {value} in column `{column}` row {row} is not Boolean")]
    NotBoolean {
        column: String,
        row: usize,
        value: f64,
    },
    #[error("sample space: {0}")]
    Space(String),
    #[error("too many variables for a truth table ({0}, limit {MAX_TABLE_VARS})")]
    TooManyVariables(usize),
}

/// Truth tables enumerate `2^n` rows; larger expressions are rejected.
pub const MAX_TABLE_VARS: usize = 20;
/// Tolerance of the additivity check in [`check_consistency`].
pub const CONSISTENCY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    Var(String),
    Const(bool),
    Not(Box<BoolExpr>),
    And(Box<BoolExpr>, Box<BoolExpr>),
    Or(Box<BoolExpr>, Box<BoolExpr>),
    Xor(Box<BoolExpr>, Box<BoolExpr>),
}

impl BoolExpr {
    pub fn var(name: &str) -> Self {
        BoolExpr::Var(name.to_string())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(e))
    }

    pub fn and(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::And(Box::new(l), Box::new(r))
    }

    pub fn or(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Or(Box::new(l), Box::new(r))
    }

    pub fn xor(l: BoolExpr, r: BoolExpr) -> Self {
        BoolExpr::Xor(Box::new(l), Box::new(r))
    }

    /// Replaces every `a xor b` by `(a or b) and not (a and b)`.
    pub fn desugar_xor(&self) -> BoolExpr {
        match self {
            BoolExpr::Var(_) | BoolExpr::Const(_) => self.clone(),
            BoolExpr::Not(e) => BoolExpr::not(e.desugar_xor()),
            BoolExpr::And(l, r) => BoolExpr::and(l.desugar_xor(), r.desugar_xor()),
            BoolExpr::Or(l, r) => BoolExpr::or(l.desugar_xor(), r.desugar_xor()),
            BoolExpr::Xor(l, r) => {
                let (l, r) = (l.desugar_xor(), r.desugar_xor());
                BoolExpr::and(
                    BoolExpr::or(l.clone(), r.clone()),
                    BoolExpr::not(BoolExpr::and(l, r)),
                )
            }
        }
    }

    /// Distinct variable names in sorted order.
    pub fn variables(&self) -> Vec<String> {
        let mut counts = BTreeMap::new();
        self.count_vars(&mut counts);
        counts.into_keys().collect()
    }

    /// Variables that occur more than once.
    pub fn repeated_variables(&self) -> Vec<String> {
        let mut counts = BTreeMap::new();
        self.count_vars(&mut counts);
        counts.into_iter().filter(|&(_, n)| n > 1).map(|(k, _)| k).collect()
    }

    fn count_vars(&self, counts: &mut BTreeMap<String, usize>) {
        match self {
            BoolExpr::Var(v) => *counts.entry(v.clone()).or_default() += 1,
            BoolExpr::Const(_) => {}
            BoolExpr::Not(e) => e.count_vars(counts),
            BoolExpr::And(l, r) | BoolExpr::Or(l, r) | BoolExpr::Xor(l, r) => {
                l.count_vars(counts);
                r.count_vars(counts);
            }
        }
    }

    /// Boolean evaluation; `lookup` returns `None` for unbound names.
    pub fn eval_with<F>(&self, lookup: &F) -> Result<bool, LogicError>
    where
        F: Fn(&str) -> Option<bool>,
    {
        Ok(match self {
            BoolExpr::Var(v) => lookup(v).ok_or_else(|| LogicError::Unbound(v.clone()))?,
            BoolExpr::Const(b) => *b,
            BoolExpr::Not(e) => !e.eval_with(lookup)?,
            BoolExpr::And(l, r) => l.eval_with(lookup)? & r.eval_with(lookup)?,
            BoolExpr::Or(l, r) => l.eval_with(lookup)? | r.eval_with(lookup)?,
            BoolExpr::Xor(l, r) => l.eval_with(lookup)? ^ r.eval_with(lookup)?,
        })
    }

    pub fn eval(&self, assignment: &BTreeMap<String, bool>) -> Result<bool, LogicError> {
        self.eval_with(&|name: &str| assignment.get(name).copied())
    }
}

/// Fully parenthesised infix rendering; re-parses to the same tree.
impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::Var(v) => write!(f, "{v}"),
            BoolExpr::Const(b) => write!(f, "{}", u8::from(*b)),
            BoolExpr::Not(e) => write!(f, "not {e}"),
            BoolExpr::And(l, r) => write!(f, "({l} and {r})"),
            BoolExpr::Or(l, r) => write!(f, "({l} or {r})"),
            BoolExpr::Xor(l, r) => write!(f, "({l} xor {r})"),
        }
    }
}

impl FromStr for BoolExpr {
    type Err = LogicError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Const(bool),
    Not,
    And,
    Or,
    Xor,
    LParen,
    RParen,
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

const EXPECT_OPERAND: &[&str] = &["identifier", "constant", "not", "("];

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, LogicError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'(' {
            out.push((Tok::LParen, i));
            i += 1;
        } else if c == b')' {
            out.push((Tok::RParen, i));
            i += 1;
        } else if c.is_ascii_alphanumeric() || c == b'_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            let word = &text[start..i];
            let tok = match word {
                "not" => Tok::Not,
                "and" => Tok::And,
                "or" => Tok::Or,
                "xor" => Tok::Xor,
                "1" | "true" => Tok::Const(true),
                "0" | "false" => Tok::Const(false),
                _ if word.as_bytes()[0].is_ascii_digit() => {
                    return Err(LogicError::Syntax {
                        offset: start,
                        expected: EXPECT_OPERAND.to_vec(),
                    })
                }
                _ => Tok::Ident(word.to_string()),
            };
            out.push((tok, start));
        } else {
            return Err(LogicError::Syntax {
                offset: i,
                expected: EXPECT_OPERAND.to_vec(),
            });
        }
    }
    Ok(out)
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map(|&(_, o)| o).unwrap_or(self.end)
    }

    fn binary(
        &mut self,
        op: Tok,
        next: fn(&mut Parser) -> Result<BoolExpr, LogicError>,
        build: fn(BoolExpr, BoolExpr) -> BoolExpr,
    ) -> Result<BoolExpr, LogicError> {
        let mut lhs = next(self)?;
        while self.peek() == Some(&op) {
            self.pos += 1;
            let rhs = next(self)?;
            lhs = build(lhs, rhs);
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> Result<BoolExpr, LogicError> {
        self.binary(Tok::Or, Parser::xor_expr, BoolExpr::or)
    }

    fn xor_expr(&mut self) -> Result<BoolExpr, LogicError> {
        self.binary(Tok::Xor, Parser::and_expr, BoolExpr::xor)
    }

    fn and_expr(&mut self) -> Result<BoolExpr, LogicError> {
        self.binary(Tok::And, Parser::unary, BoolExpr::and)
    }

    fn unary(&mut self) -> Result<BoolExpr, LogicError> {
        let offset = self.offset();
        match self.toks.get(self.pos).map(|(t, _)| t.clone()) {
            Some(Tok::Not) => {
                self.pos += 1;
                Ok(BoolExpr::not(self.unary()?))
            }
            Some(Tok::Ident(name)) => {
                self.pos += 1;
                Ok(BoolExpr::Var(name))
            }
            Some(Tok::Const(b)) => {
                self.pos += 1;
                Ok(BoolExpr::Const(b))
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let inner = self.or_expr()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(LogicError::Syntax {
                        offset: self.offset(),
                        expected: vec![")", "and", "or", "xor"],
                    });
                }
                self.pos += 1;
                Ok(inner)
            }
            _ => Err(LogicError::Syntax {
                offset,
                expected: EXPECT_OPERAND.to_vec(),
            }),
        }
    }
}

/// Parses an expression over `not`/`and`/`xor`/`or` (that precedence order).
pub fn parse_expr(text: &str) -> Result<BoolExpr, LogicError> {
    let mut p = Parser {
        toks: tokenize(text)?,
        pos: 0,
        end: text.len(),
    };
    let expr = p.or_expr()?;
    if p.pos != p.toks.len() {
        return Err(LogicError::Syntax {
            offset: p.offset(),
            expected: vec!["and", "or", "xor", "end of input"],
        });
    }
    Ok(expr)
}

/// A weighted set of truth assignments.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSpace {
    variables: Vec<String>,
    rows: Vec<(Vec<bool>, f64)>,
}

impl SampleSpace {
    /// Normalises the weights to sum to one.
    pub fn new(variables: Vec<String>, rows: Vec<(Vec<bool>, f64)>) -> Result<Self, LogicError> {
        if rows.is_empty() {
            return Err(LogicError::Space("no rows".into()));
        }
        let unique: BTreeSet<_> = variables.iter().collect();
        if unique.len() != variables.len() {
            return Err(LogicError::Space("duplicate variable names".into()));
        }
        for (i, (bits, w)) in rows.iter().enumerate() {
            if bits.len() != variables.len() {
                return Err(LogicError::Space(format!(
                    "row {i} has {} bits for {} variables",
                    bits.len(),
                    variables.len()
                )));
            }
            if !(w.is_finite() && *w > 0.0) {
                return Err(LogicError::Space(format!("row {i} has non-positive weight {w}")));
            }
        }
        let total: f64 = rows.iter().map(|(_, w)| w).sum();
        let rows = rows.into_iter().map(|(b, w)| (b, w / total)).collect();
        Ok(Self { variables, rows })
    }

    /// All `2^n` assignments with equal weight, first variable most significant.
    pub fn uniform(variables: &[&str]) -> Result<Self, LogicError> {
        let n = variables.len();
        if n > MAX_TABLE_VARS {
            return Err(LogicError::TooManyVariables(n));
        }
        let rows = (0..1usize << n)
            .map(|k| ((0..n).map(|i| (k >> (n - 1 - i)) & 1 == 1).collect(), 1.0))
            .collect();
        Self::new(variables.iter().map(|s| s.to_string()).collect(), rows)
    }

    /// One row per observation, each of weight `1/n`; duplicates are kept.
    pub fn from_observations(variables: Vec<String>, observations: Vec<Vec<bool>>) -> Result<Self, LogicError> {
        Self::new(variables, observations.into_iter().map(|b| (b, 1.0)).collect())
    }

    /// The two-variable space whose joint law is coupled by Frank's copula:
    /// `Pr[X and Y] = A_s(x, y)` with margins `x` and `y`. Rows of zero
    /// weight are dropped.
    pub fn coupled(
        first: &str,
        second: &str,
        x: UnitValue,
        y: UnitValue,
        s: CopulaParam,
    ) -> Result<Self, LogicError> {
        let (xv, yv) = (x.get(), y.get());
        let both = copula::and_raw(s, xv, yv);
        let rows = [
            (vec![false, false], 1.0 - xv - yv + both),
            (vec![false, true], yv - both),
            (vec![true, false], xv - both),
            (vec![true, true], both),
        ]
        .into_iter()
        .filter(|(_, w)| *w > 0.0)
        .collect();
        Self::new(vec![first.to_string(), second.to_string()], rows)
    }

    pub fn variables(&self) -> &[String] {
        &self.variables
    }

    pub fn rows(&self) -> &[(Vec<bool>, f64)] {
        &self.rows
    }
}

/// Total weight of the rows on which `expr` is true.
pub fn truth_table_prob(expr: &BoolExpr, space: &SampleSpace) -> Result<UnitValue, LogicError> {
    let index: BTreeMap<&str, usize> = space
        .variables
        .iter()
        .enumerate()
        .map(|(i, v)| (v.as_str(), i))
        .collect();
    for v in expr.variables() {
        if !index.contains_key(v.as_str()) {
            return Err(LogicError::Unbound(v));
        }
    }
    let mut p = 0.0;
    for (bits, w) in &space.rows {
        if expr.eval_with(&|name: &str| index.get(name).map(|&i| bits[i]))? {
            p += w;
        }
    }
    Ok(UnitValue::new(p).expect("normalised weights sum to at most one"))
}

/// Every assignment of the expression's variables with its truth value.
pub fn truth_table(expr: &BoolExpr) -> Result<(Vec<String>, Vec<(Vec<bool>, bool)>), LogicError> {
    let vars = expr.variables();
    if vars.len() > MAX_TABLE_VARS {
        return Err(LogicError::TooManyVariables(vars.len()));
    }
    let n = vars.len();
    let mut rows = Vec::with_capacity(1 << n);
    for k in 0..1usize << n {
        let bits: Vec<bool> = (0..n).map(|i| (k >> (n - 1 - i)) & 1 == 1).collect();
        let value = expr.eval_with(&|name: &str| vars.iter().position(|v| v == name).map(|i| bits[i]))?;
        rows.push((bits, value));
    }
    Ok((vars, rows))
}

/// Fraction of ones per column. Every entry must be exactly 0 or 1.
pub fn empirical_frequencies(
    columns: &[String],
    rows: &[Vec<f64>],
) -> Result<BTreeMap<String, UnitValue>, LogicError> {
    if rows.is_empty() {
        return Err(LogicError::Space("no rows".into()));
    }
    let mut out = BTreeMap::new();
    for (c, name) in columns.iter().enumerate() {
        let mut ones = 0usize;
        for (r, row) in rows.iter().enumerate() {
            match row[c] {
                v if v == 1.0 => ones += 1,
                v if v == 0.0 => {}
                value => {
                    return Err(LogicError::NotBoolean {
                        column: name.clone(),
                        row: r,
                        value,
                    })
                }
            }
        }
        let freq = UnitValue::new(ones as f64 / rows.len() as f64).expect("fraction in [0, 1]");
        out.insert(name.clone(), freq);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`check_consistency`]: one entry per axiom or bound.
#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub checks: Vec<Check>,
}

impl Verdict {
    pub fn consistent(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.passed)
    }
}

/// Checks the probabilistic-logic requirements on `Pr[X]`, `Pr[Y]`,
/// `Pr[X and Y]` and `Pr[X or Y]`.
pub fn check_consistency(px: f64, py: f64, pand: f64, por: f64) -> Verdict {
    let tol = CONSISTENCY_TOL;
    let in_unit = |v: f64| (-tol..=1.0 + tol).contains(&v);
    let min = px.min(py);
    let max = px.max(py);
    let checks = vec![
        Check {
            name: "range",
            passed: [px, py, pand, por].into_iter().all(in_unit),
            detail: format!("all of {px}, {py}, {pand}, {por} in [0, 1]"),
        },
        Check {
            name: "and_bounds",
            passed: pand >= -tol && pand <= min + tol,
            detail: format!("0 <= {pand} <= min({px}, {py}) = {min}"),
        },
        Check {
            name: "or_bounds",
            passed: por >= max - tol && por <= 1.0 + tol,
            detail: format!("max({px}, {py}) = {max} <= {por} <= 1"),
        },
        Check {
            name: "additivity",
            passed: ((pand + por) - (px + py)).abs() <= tol,
            detail: format!("{pand} + {por} = {px} + {py}"),
        },
    ];
    Verdict { checks }
}

/// Result of [`copula_prob`].
#[derive(Debug, Clone, PartialEq)]
pub struct CopulaProb {
    pub value: UnitValue,
    /// Variables occurring more than once. Compositional evaluation treats
    /// each occurrence as independent, so the value can disagree with the
    /// truth table when this is non-empty.
    pub repeated: Vec<String>,
}

/// Compositional probability of `expr` under Frank's copula with parameter `s`.
pub fn copula_prob(
    expr: &BoolExpr,
    assignment: &BTreeMap<String, UnitValue>,
    s: CopulaParam,
) -> Result<CopulaProb, LogicError> {
    fn go(e: &BoolExpr, a: &BTreeMap<String, UnitValue>, s: CopulaParam) -> Result<f64, LogicError> {
        Ok(match e {
            BoolExpr::Var(v) => a.get(v).ok_or_else(|| LogicError::Unbound(v.clone()))?.get(),
            BoolExpr::Const(b) => f64::from(u8::from(*b)),
            BoolExpr::Not(inner) => 1.0 - go(inner, a, s)?,
            BoolExpr::And(l, r) => copula::and_raw(s, go(l, a, s)?, go(r, a, s)?),
            BoolExpr::Or(l, r) => {
                let (x, y) = (go(l, a, s)?, go(r, a, s)?);
                x + y - copula::and_raw(s, x, y)
            }
            BoolExpr::Xor(l, r) => {
                let (x, y) = (go(l, a, s)?, go(r, a, s)?);
                x + y - 2.0 * copula::and_raw(s, x, y)
            }
        })
    }
    let raw = go(expr, assignment, s)?;
    Ok(CopulaProb {
        value: UnitValue::new(raw).unwrap_or(if raw < 0.0 { UnitValue::ZERO } else { UnitValue::ONE }),
        repeated: expr.repeated_variables(),
    })
}
