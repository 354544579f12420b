//! Concrete text syntax: expressions, programs, formulas, sequents and
//! `.dl` declaration files.
//!
//! Surface forms, loosest binding first:
//!
//! - formulas: `<->`, `->` (right associative), `|`, `&`, then the prefix
//!   forms `!P`, `[prog] P`, `<prog> P`, `forall x. P`, `exists x. P`
//! - comparisons `e1 op e2` with `op` in `<= >= < > = !=`, never chained
//! - reals: `+ -`, `* /`, unary `-`, `^n`
//! - programs: `++` (choice), `;` (sequence), then `x := e, y := e`,
//!   `x := *`, `?P`, `{x' = e & Q}`, `{prog}` and postfix `*` on braces
//!
//! A numeral directly after a unary minus is a negative constant: `-5` is
//! `Cnst(-5)` while `-(5)` is `Neg(Cnst(5))`. Variables are named through a
//! [`Scope`]; `$n` always denotes the variable with index `n`.

mod lexer;
mod parser;
mod printer;
mod specfile;

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::ast::{BoolExpr, HybridProgram, Rational, Variable};

pub use lexer::{tokenize, Token};
pub use parser::{parse_formula, parse_program, parse_real, parse_sequent, Parser};
pub use printer::{print_formula, print_program, print_real, print_sequent, Printer};
pub use specfile::{parse_spec, GoalDecl, SpecFile};

/// Byte range plus 1-based line/column of its start.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
    pub line: usize,
    pub column: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("{}:{}: {message}", span.line, span.column)]
pub struct ParseError {
    pub message: String,
    pub span: SourceSpan,
}

impl ParseError {
    pub fn new(message: impl Into<String>, span: SourceSpan) -> Self {
        ParseError { message: message.into(), span }
    }
}

/// What a declared identifier stands for.
#[derive(Clone, Debug, PartialEq)]
pub enum Symbol {
    Var(Variable),
    Const(Rational),
    Prog(HybridProgram),
    Form(BoolExpr),
}

/// Identifier table shared by the parser and the printer.
#[derive(Clone, Debug, Default)]
pub struct Scope {
    symbols: BTreeMap<String, Symbol>,
    var_names: BTreeMap<Variable, String>,
    /// Declaration order of program and formula abbreviations.
    abbreviations: Vec<String>,
    next_var: u32,
}

const RESERVED: &[&str] = &[
    "true", "false", "forall", "exists", "sqrt", "var", "const", "prog", "form", "goal",
];

impl Scope {
    pub fn new() -> Self {
        Scope::default()
    }

    /// Scope whose variables get indices 0, 1, ... in the given order.
    pub fn with_vars(names: &[&str]) -> Self {
        let mut s = Scope::new();
        for n in names {
            s.declare_var(n).expect("distinct variable names");
        }
        s
    }

    fn check_fresh(&self, name: &str) -> Result<(), String> {
        if RESERVED.contains(&name) {
            return Err(format!("`{name}` is a reserved word"));
        }
        if self.symbols.contains_key(name) {
            return Err(format!("`{name}` is already declared"));
        }
        Ok(())
    }

    pub fn declare_var(&mut self, name: &str) -> Result<Variable, String> {
        self.check_fresh(name)?;
        let v = Variable(self.next_var);
        self.next_var += 1;
        self.symbols.insert(name.to_string(), Symbol::Var(v));
        self.var_names.insert(v, name.to_string());
        Ok(v)
    }

    pub fn declare_const(&mut self, name: &str, value: Rational) -> Result<(), String> {
        self.check_fresh(name)?;
        self.symbols.insert(name.to_string(), Symbol::Const(value));
        Ok(())
    }

    pub fn declare_prog(&mut self, name: &str, prog: HybridProgram) -> Result<(), String> {
        self.check_fresh(name)?;
        self.symbols.insert(name.to_string(), Symbol::Prog(prog));
        self.abbreviations.push(name.to_string());
        Ok(())
    }

    pub fn declare_form(&mut self, name: &str, form: BoolExpr) -> Result<(), String> {
        self.check_fresh(name)?;
        self.symbols.insert(name.to_string(), Symbol::Form(form));
        self.abbreviations.push(name.to_string());
        Ok(())
    }

    pub fn lookup(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn var(&self, name: &str) -> Option<Variable> {
        match self.symbols.get(name) {
            Some(Symbol::Var(v)) => Some(*v),
            _ => None,
        }
    }

    pub fn var_name(&self, v: Variable) -> Option<&str> {
        self.var_names.get(&v).map(String::as_str)
    }

    pub fn form(&self, name: &str) -> Option<&BoolExpr> {
        match self.symbols.get(name) {
            Some(Symbol::Form(f)) => Some(f),
            _ => None,
        }
    }

    pub fn prog(&self, name: &str) -> Option<&HybridProgram> {
        match self.symbols.get(name) {
            Some(Symbol::Prog(p)) => Some(p),
            _ => None,
        }
    }

    /// Program and formula abbreviations, most recently declared first.
    pub(crate) fn abbreviations(&self) -> impl Iterator<Item = (&str, &Symbol)> {
        self.abbreviations
            .iter()
            .rev()
            .filter_map(|n| self.symbols.get(n).map(|s| (n.as_str(), s)))
    }
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.column)
    }
}
