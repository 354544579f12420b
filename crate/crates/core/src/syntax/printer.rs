use num_bigint::BigInt;
use num_traits::{Signed, Zero};

use super::{Scope, Symbol};
use crate::ast::{BoolExpr, HybridProgram, Rational, RealExpr, Variable};
use crate::sequent::Sequent;

/// Pretty-printer producing text that parses back to the same tree.
///
/// With [`Printer::with_abbreviations`], subtrees equal to a declared
/// `prog` or `form` print as that name.
pub struct Printer<'s> {
    scope: Option<&'s Scope>,
    abbreviate: bool,
}

pub fn print_real(e: &RealExpr, scope: &Scope) -> String {
    Printer::new(scope).real(e)
}

pub fn print_formula(p: &BoolExpr, scope: &Scope) -> String {
    Printer::new(scope).formula(p)
}

pub fn print_program(a: &HybridProgram, scope: &Scope) -> String {
    Printer::new(scope).program(a)
}

pub fn print_sequent(s: &Sequent, scope: &Scope) -> String {
    Printer::new(scope).sequent(s)
}

// Binding strength of real-expression nodes.
const R_SUM: u8 = 1;
const R_PRODUCT: u8 = 2;
const R_NEG: u8 = 3;
const R_POW: u8 = 4;
const R_ATOM: u8 = 5;

const F_IFF: u8 = 1;
const F_IMPLIES: u8 = 2;
const F_OR: u8 = 3;
const F_AND: u8 = 4;
const F_PREFIX: u8 = 5;

const P_CHOICE: u8 = 1;
const P_SEQ: u8 = 2;
const P_ATOM: u8 = 3;

fn is_negative_const(e: &RealExpr) -> bool {
    matches!(e, RealExpr::Cnst(c) if c.is_negative())
}

fn real_prec(e: &RealExpr) -> u8 {
    match e {
        RealExpr::Add(..) | RealExpr::Sub(..) => R_SUM,
        RealExpr::Mul(..) | RealExpr::Div(..) => R_PRODUCT,
        RealExpr::Neg(_) => R_NEG,
        RealExpr::Cnst(c) if c.is_negative() => R_NEG,
        RealExpr::Cnst(c) if decimal(c).is_none() => R_PRODUCT,
        RealExpr::Pow(..) => R_POW,
        _ => R_ATOM,
    }
}

fn neg_like(e: &RealExpr) -> bool {
    matches!(e, RealExpr::Neg(_)) || is_negative_const(e)
}

/// Decimal rendering of a rational whose denominator has no prime factor
/// other than 2 and 5.
fn decimal(c: &Rational) -> Option<String> {
    let mut den = c.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0u32, 0u32);
    while (&den % &two).is_zero() {
        den /= &two;
        twos += 1;
    }
    while (&den % &five).is_zero() {
        den /= &five;
        fives += 1;
    }
    if den != BigInt::from(1) {
        return None;
    }
    let digits = twos.max(fives);
    let scaled = c.numer() * BigInt::from(10).pow(digits) / c.denom();
    if digits == 0 {
        return Some(scaled.to_string());
    }
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    while s.len() <= digits as usize {
        s.insert(0, '0');
    }
    let point = s.len() - digits as usize;
    s.insert(point, '.');
    Some(if neg { format!("-{s}") } else { s })
}

fn rational_text(c: &Rational) -> String {
    match decimal(c) {
        Some(s) => s,
        None => format!("{}/{}", c.numer(), c.denom()),
    }
}

impl<'s> Printer<'s> {
    pub fn new(scope: &'s Scope) -> Self {
        Printer { scope: Some(scope), abbreviate: false }
    }

    /// Printer without names: every variable prints as `$n`.
    pub fn raw() -> Self {
        Printer { scope: None, abbreviate: false }
    }

    pub fn with_abbreviations(scope: &'s Scope) -> Self {
        Printer { scope: Some(scope), abbreviate: true }
    }

    fn var(&self, v: Variable) -> String {
        match self.scope.and_then(|s| s.var_name(v)) {
            Some(n) => n.to_string(),
            None => format!("${}", v.0),
        }
    }

    pub fn real(&self, e: &RealExpr) -> String {
        let mut out = String::new();
        self.write_real(e, 0, &mut out);
        out
    }

    fn write_real(&self, e: &RealExpr, min: u8, out: &mut String) {
        let paren = real_prec(e) < min;
        if paren {
            out.push('(');
        }
        match e {
            RealExpr::Cnst(c) => out.push_str(&rational_text(c)),
            RealExpr::Val(v) => out.push_str(&self.var(*v)),
            RealExpr::Add(a, b) => self.write_binary(a, " + ", b, R_SUM, out),
            RealExpr::Sub(a, b) => self.write_binary(a, " - ", b, R_SUM, out),
            RealExpr::Mul(a, b) => self.write_binary(a, "*", b, R_PRODUCT, out),
            RealExpr::Div(a, b) => self.write_binary(a, "/", b, R_PRODUCT, out),
            RealExpr::Neg(a) => {
                out.push('-');
                let force = matches!(**a, RealExpr::Cnst(_)) || neg_like(a);
                self.write_real(a, if force { u8::MAX } else { R_NEG }, out);
            }
            RealExpr::Sqrt(a) => {
                out.push_str("sqrt(");
                self.write_real(a, 0, out);
                out.push(')');
            }
            RealExpr::Pow(a, n) => {
                self.write_real(a, R_ATOM, out);
                out.push('^');
                out.push_str(&n.to_string());
            }
        }
        if paren {
            out.push(')');
        }
    }

    fn write_binary(&self, a: &RealExpr, op: &str, b: &RealExpr, level: u8, out: &mut String) {
        self.write_real(a, level, out);
        out.push_str(op);
        let right = if neg_like(b) { u8::MAX } else { level + 1 };
        self.write_real(b, right, out);
    }

    pub fn formula(&self, p: &BoolExpr) -> String {
        let mut out = String::new();
        self.write_formula(p, 0, &mut out);
        out
    }

    fn form_abbrev(&self, p: &BoolExpr) -> Option<&'s str> {
        if !self.abbreviate {
            return None;
        }
        self.scope?.abbreviations().find_map(|(n, s)| match s {
            Symbol::Form(f) if f == p => Some(n),
            _ => None,
        })
    }

    fn prog_abbrev(&self, a: &HybridProgram) -> Option<&'s str> {
        if !self.abbreviate {
            return None;
        }
        self.scope?.abbreviations().find_map(|(n, s)| match s {
            Symbol::Prog(q) if q == a => Some(n),
            _ => None,
        })
    }

    fn formula_prec(&self, p: &BoolExpr) -> u8 {
        if self.form_abbrev(p).is_some() {
            return F_PREFIX;
        }
        match p {
            BoolExpr::Iff(..) => F_IFF,
            BoolExpr::Implies(..) => F_IMPLIES,
            BoolExpr::Or(..) => F_OR,
            BoolExpr::And(..) => F_AND,
            _ => F_PREFIX,
        }
    }

    fn write_formula(&self, p: &BoolExpr, min: u8, out: &mut String) {
        if let Some(name) = self.form_abbrev(p) {
            out.push_str(name);
            return;
        }
        let paren = self.formula_prec(p) < min;
        if paren {
            out.push('(');
        }
        match p {
            BoolExpr::Top => out.push_str("true"),
            BoolExpr::Bot => out.push_str("false"),
            BoolExpr::Rel(op, a, b) => {
                self.write_real(a, 0, out);
                out.push(' ');
                out.push_str(op.symbol());
                out.push(' ');
                self.write_real(b, 0, out);
            }
            BoolExpr::And(a, b) => self.write_connective(a, " & ", b, F_AND, F_AND + 1, out),
            BoolExpr::Or(a, b) => self.write_connective(a, " | ", b, F_OR, F_OR + 1, out),
            BoolExpr::Implies(a, b) => self.write_connective(a, " -> ", b, F_IMPLIES + 1, F_IMPLIES, out),
            BoolExpr::Iff(a, b) => self.write_connective(a, " <-> ", b, F_IFF + 1, F_IFF, out),
            BoolExpr::Not(a) => {
                out.push('!');
                self.write_prefix_body(a, out);
            }
            BoolExpr::Forall(v, a) | BoolExpr::Exists(v, a) => {
                out.push_str(if matches!(p, BoolExpr::Forall(..)) { "forall " } else { "exists " });
                out.push_str(&self.var(*v));
                out.push_str(". ");
                self.write_prefix_body(a, out);
            }
            BoolExpr::AllRuns(prog, a) => {
                out.push('[');
                self.write_program(prog, 0, out);
                out.push_str("] ");
                self.write_prefix_body(a, out);
            }
            BoolExpr::SomeRuns(prog, a) => {
                out.push('<');
                self.write_program(prog, 0, out);
                out.push_str("> ");
                self.write_prefix_body(a, out);
            }
        }
        if paren {
            out.push(')');
        }
    }

    fn write_connective(&self, a: &BoolExpr, op: &str, b: &BoolExpr, lmin: u8, rmin: u8, out: &mut String) {
        self.write_formula(a, lmin, out);
        out.push_str(op);
        self.write_formula(b, rmin, out);
    }

    /// Bodies of prefix operators; comparisons get parentheses for
    /// readability even though the grammar does not need them.
    fn write_prefix_body(&self, a: &BoolExpr, out: &mut String) {
        let is_rel = matches!(a, BoolExpr::Rel(..)) && self.form_abbrev(a).is_none();
        self.write_formula(a, if is_rel { u8::MAX } else { F_PREFIX }, out);
    }

    pub fn program(&self, a: &HybridProgram) -> String {
        let mut out = String::new();
        self.write_program(a, 0, &mut out);
        out
    }

    fn program_prec(&self, a: &HybridProgram) -> u8 {
        if self.prog_abbrev(a).is_some() {
            return P_ATOM;
        }
        match a {
            HybridProgram::Choice(..) => P_CHOICE,
            HybridProgram::Seq(..) => P_SEQ,
            _ => P_ATOM,
        }
    }

    fn write_program(&self, a: &HybridProgram, min: u8, out: &mut String) {
        if let Some(name) = self.prog_abbrev(a) {
            out.push_str(name);
            return;
        }
        let brace = self.program_prec(a) < min;
        if brace {
            out.push('{');
        }
        match a {
            HybridProgram::Assign(l) if l.is_empty() => out.push_str("{}"),
            HybridProgram::Assign(l) => {
                for (i, (v, e)) in l.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&self.var(*v));
                    out.push_str(" := ");
                    self.write_real(e, 0, out);
                }
            }
            HybridProgram::Ode(sys) => {
                out.push('{');
                for (i, (v, e)) in sys.equations.iter().enumerate() {
                    if i > 0 {
                        out.push_str(", ");
                    }
                    out.push_str(&self.var(*v));
                    out.push_str("' = ");
                    self.write_real(e, 0, out);
                }
                if sys.domain != BoolExpr::Top {
                    out.push_str(" & ");
                    self.write_formula(&sys.domain, 0, out);
                }
                out.push('}');
            }
            HybridProgram::Test(p) => {
                out.push('?');
                self.write_prefix_body(p, out);
            }
            HybridProgram::AnyAssign(v) => {
                out.push_str(&self.var(*v));
                out.push_str(" := *");
            }
            HybridProgram::Seq(x, y) => {
                self.write_program(x, P_SEQ, out);
                out.push_str("; ");
                self.write_program(y, P_ATOM, out);
            }
            HybridProgram::Choice(x, y) => {
                self.write_program(x, P_CHOICE, out);
                out.push_str(" ++ ");
                self.write_program(y, P_SEQ, out);
            }
            HybridProgram::Star(body) => {
                let self_braced = self.prog_abbrev(body).is_none()
                    && matches!(**body, HybridProgram::Ode(_) | HybridProgram::Star(_))
                    || matches!(&**body, HybridProgram::Assign(l) if l.is_empty());
                if self_braced {
                    self.write_program(body, P_ATOM, out);
                } else {
                    out.push('{');
                    self.write_program(body, 0, out);
                    out.push('}');
                }
                out.push('*');
            }
        }
        if brace {
            out.push('}');
        }
    }

    pub fn sequent(&self, s: &Sequent) -> String {
        let side = |fs: &[BoolExpr]| fs.iter().map(|f| self.formula(f)).collect::<Vec<_>>().join(", ");
        let (l, r) = (side(&s.antecedent), side(&s.consequent));
        match (l.is_empty(), r.is_empty()) {
            (true, true) => "|-".to_string(),
            (true, false) => format!("|- {r}"),
            (false, true) => format!("{l} |-"),
            (false, false) => format!("{l} |- {r}"),
        }
    }
}
