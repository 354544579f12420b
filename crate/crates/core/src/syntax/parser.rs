use num_bigint::BigInt;
use num_traits::Num;

use super::lexer::{tokenize, Token};
use super::{ParseError, Scope, SourceSpan, Symbol};
use crate::ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, Rational, RealExpr, RelOp, Variable};
use crate::sequent::Sequent;

/// Recursive-descent parser over a token vector.
pub struct Parser<'s> {
    toks: Vec<(Token, SourceSpan)>,
    pos: usize,
    scope: &'s Scope,
}

pub fn parse_real(text: &str, scope: &Scope) -> Result<RealExpr, ParseError> {
    let mut p = Parser::new(text, scope)?;
    let e = p.real()?;
    p.expect_eof()?;
    Ok(e)
}

pub fn parse_formula(text: &str, scope: &Scope) -> Result<BoolExpr, ParseError> {
    let mut p = Parser::new(text, scope)?;
    let f = p.formula()?;
    p.expect_eof()?;
    Ok(f)
}

pub fn parse_program(text: &str, scope: &Scope) -> Result<HybridProgram, ParseError> {
    let mut p = Parser::new(text, scope)?;
    let a = p.program()?;
    p.expect_eof()?;
    Ok(a)
}

pub fn parse_sequent(text: &str, scope: &Scope) -> Result<Sequent, ParseError> {
    let mut p = Parser::new(text, scope)?;
    let s = p.sequent()?;
    p.expect_eof()?;
    Ok(s)
}

pub(crate) fn parse_decimal(text: &str) -> Option<Rational> {
    match text.split_once('.') {
        None => BigInt::from_str_radix(text, 10).ok().map(Rational::from_integer),
        Some((int, frac)) => {
            let num = BigInt::from_str_radix(&format!("{int}{frac}"), 10).ok()?;
            let den = BigInt::from(10u32).pow(frac.len() as u32);
            Some(Rational::new(num, den))
        }
    }
}

impl<'s> Parser<'s> {
    pub fn new(text: &str, scope: &'s Scope) -> Result<Self, ParseError> {
        Ok(Parser { toks: tokenize(text)?, pos: 0, scope })
    }

    pub(crate) fn from_tokens(toks: Vec<(Token, SourceSpan)>, scope: &'s Scope) -> Self {
        Parser { toks, pos: 0, scope }
    }

    fn peek(&self) -> &Token {
        &self.toks[self.pos].0
    }

    fn peek_at(&self, k: usize) -> &Token {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].0
    }

    fn span(&self) -> SourceSpan {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Token) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError::new(msg, self.span()))
    }

    fn unexpected<T>(&self, wanted: &str) -> Result<T, ParseError> {
        self.error(format!("expected {wanted}, found {}", self.peek().describe()))
    }

    fn expect(&mut self, t: Token, wanted: &str) -> Result<(), ParseError> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.unexpected(wanted)
        }
    }

    pub fn expect_eof(&self) -> Result<(), ParseError> {
        if *self.peek() == Token::Eof {
            Ok(())
        } else {
            self.unexpected("end of input")
        }
    }

    pub fn at_eof(&self) -> bool {
        *self.peek() == Token::Eof
    }

    fn variable(&mut self) -> Result<Variable, ParseError> {
        match self.peek().clone() {
            Token::RawVar(i) => {
                self.bump();
                Ok(Variable(i))
            }
            Token::Ident(name) => match self.scope.lookup(&name) {
                Some(Symbol::Var(v)) => {
                    let v = *v;
                    self.bump();
                    Ok(v)
                }
                Some(_) => self.error(format!("`{name}` is not a variable")),
                None => self.error(format!("unknown identifier `{name}`")),
            },
            _ => self.unexpected("a variable"),
        }
    }

    fn is_variable_token(&self, t: &Token) -> bool {
        match t {
            Token::RawVar(_) => true,
            Token::Ident(n) => matches!(self.scope.lookup(n), Some(Symbol::Var(_))),
            _ => false,
        }
    }

    // ---- reals ----

    pub fn real(&mut self) -> Result<RealExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                lhs = lhs + self.term()?;
            } else if self.eat(&Token::Minus) {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<RealExpr, ParseError> {
        let mut lhs = self.unary_real()?;
        loop {
            if self.eat(&Token::Star) {
                lhs = lhs * self.unary_real()?;
            } else if self.eat(&Token::Slash) {
                lhs = lhs / self.unary_real()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary_real(&mut self) -> Result<RealExpr, ParseError> {
        if *self.peek() == Token::Minus {
            if let Token::Num(n) = self.peek_at(1).clone() {
                if *self.peek_at(2) != Token::Caret {
                    let span = self.toks[self.pos + 1].1;
                    self.bump();
                    self.bump();
                    let value = parse_decimal(&n).ok_or_else(|| ParseError::new("malformed number", span))?;
                    return Ok(RealExpr::Cnst(-value));
                }
            }
            self.bump();
            return Ok(-self.unary_real()?);
        }
        self.power()
    }

    fn power(&mut self) -> Result<RealExpr, ParseError> {
        let base = self.real_atom()?;
        if !self.eat(&Token::Caret) {
            return Ok(base);
        }
        let n = match self.peek().clone() {
            Token::Num(n) if !n.contains('.') => n
                .parse::<u32>()
                .or_else(|_| self.error("exponent too large"))?,
            _ => return self.unexpected("a natural-number exponent"),
        };
        self.bump();
        if *self.peek() == Token::Caret {
            return self.error("chained exponents need parentheses");
        }
        Ok(base.pow(n))
    }

    fn real_atom(&mut self) -> Result<RealExpr, ParseError> {
        match self.peek().clone() {
            Token::Num(n) => {
                let span = self.span();
                self.bump();
                parse_decimal(&n)
                    .map(RealExpr::Cnst)
                    .ok_or_else(|| ParseError::new("malformed number", span))
            }
            Token::RawVar(i) => {
                self.bump();
                Ok(RealExpr::Val(Variable(i)))
            }
            Token::Ident(name) if name == "sqrt" => {
                self.bump();
                self.expect(Token::LParen, "`(` after sqrt")?;
                let e = self.real()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e.sqrt())
            }
            Token::Ident(name) => match self.scope.lookup(&name) {
                Some(Symbol::Var(v)) => {
                    let v = *v;
                    self.bump();
                    Ok(RealExpr::Val(v))
                }
                Some(Symbol::Const(c)) => {
                    let c = c.clone();
                    self.bump();
                    Ok(RealExpr::Cnst(c))
                }
                Some(_) => self.error(format!("`{name}` is not a real-valued name")),
                None => self.error(format!("unknown identifier `{name}`")),
            },
            Token::LParen => {
                self.bump();
                let e = self.real()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(e)
            }
            _ => self.unexpected("a real expression"),
        }
    }

    // ---- formulas ----

    pub fn formula(&mut self) -> Result<BoolExpr, ParseError> {
        let lhs = self.implication()?;
        if self.eat(&Token::DArrow) {
            let rhs = self.formula()?;
            return Ok(BoolExpr::iff(lhs, rhs));
        }
        Ok(lhs)
    }

    fn implication(&mut self) -> Result<BoolExpr, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&Token::Arrow) {
            let rhs = self.implication()?;
            return Ok(BoolExpr::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&Token::Bar) {
            lhs = BoolExpr::or(lhs, self.conjunction()?);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<BoolExpr, ParseError> {
        let mut lhs = self.unary_formula()?;
        while self.eat(&Token::Amp) {
            lhs = BoolExpr::and(lhs, self.unary_formula()?);
        }
        Ok(lhs)
    }

    fn unary_formula(&mut self) -> Result<BoolExpr, ParseError> {
        match self.peek().clone() {
            Token::Bang => {
                self.bump();
                Ok(BoolExpr::not(self.unary_formula()?))
            }
            Token::LBracket => {
                self.bump();
                let a = self.program()?;
                self.expect(Token::RBracket, "`]`")?;
                Ok(BoolExpr::box_(a, self.unary_formula()?))
            }
            Token::Lt => {
                self.bump();
                let a = self.program()?;
                self.expect(Token::Gt, "`>` closing a diamond")?;
                Ok(BoolExpr::diamond(a, self.unary_formula()?))
            }
            Token::Ident(k) if k == "forall" || k == "exists" => {
                self.bump();
                let v = self.variable()?;
                self.expect(Token::Dot, "`.` after the bound variable")?;
                let body = self.unary_formula()?;
                Ok(if k == "forall" { BoolExpr::forall(v, body) } else { BoolExpr::exists(v, body) })
            }
            Token::Ident(k) if k == "true" => {
                self.bump();
                Ok(BoolExpr::Top)
            }
            Token::Ident(k) if k == "false" => {
                self.bump();
                Ok(BoolExpr::Bot)
            }
            Token::Ident(name) if matches!(self.scope.lookup(&name), Some(Symbol::Form(_))) => {
                self.bump();
                Ok(self.scope.form(&name).cloned().expect("checked above"))
            }
            Token::LParen => {
                let save = self.pos;
                match self.comparison() {
                    Ok(f) => Ok(f),
                    Err(cmp_err) => {
                        let cmp_pos = self.pos;
                        self.pos = save;
                        self.bump();
                        let inner = self.formula().and_then(|f| {
                            self.expect(Token::RParen, "`)`")?;
                            Ok(f)
                        });
                        match inner {
                            Ok(f) => Ok(f),
                            Err(form_err) => {
                                if cmp_err.span.start > form_err.span.start {
                                    self.pos = cmp_pos;
                                    Err(cmp_err)
                                } else {
                                    Err(form_err)
                                }
                            }
                        }
                    }
                }
            }
            _ => self.comparison(),
        }
    }

    fn rel_op(&self) -> Option<RelOp> {
        Some(match self.peek() {
            Token::Le => RelOp::Le,
            Token::Ge => RelOp::Ge,
            Token::Lt => RelOp::Lt,
            Token::Gt => RelOp::Gt,
            Token::EqSign => RelOp::Eq,
            Token::Ne => RelOp::Ne,
            _ => return None,
        })
    }

    fn comparison(&mut self) -> Result<BoolExpr, ParseError> {
        let lhs = self.real()?;
        let op = match self.rel_op() {
            Some(op) => op,
            None => return self.unexpected("a comparison operator"),
        };
        self.bump();
        let rhs = self.real()?;
        if self.rel_op().is_some() {
            return self.error("comparison chaining is not allowed");
        }
        Ok(BoolExpr::rel(op, lhs, rhs))
    }

    // ---- programs ----

    pub fn program(&mut self) -> Result<HybridProgram, ParseError> {
        let mut lhs = self.sequence()?;
        while self.eat(&Token::PlusPlus) {
            lhs = HybridProgram::choice(lhs, self.sequence()?);
        }
        Ok(lhs)
    }

    fn sequence(&mut self) -> Result<HybridProgram, ParseError> {
        let mut lhs = self.program_atom()?;
        while self.eat(&Token::Semi) {
            lhs = HybridProgram::seq(lhs, self.program_atom()?);
        }
        Ok(lhs)
    }

    fn program_atom(&mut self) -> Result<HybridProgram, ParseError> {
        match self.peek().clone() {
            Token::LBrace => {
                self.bump();
                let mut a = if self.eat(&Token::RBrace) {
                    HybridProgram::Assign(AssignmentList::empty())
                } else {
                    let t = self.peek().clone();
                    let a = if self.is_variable_token(&t) && *self.peek_at(1) == Token::Prime {
                        self.ode()?
                    } else {
                        self.program()?
                    };
                    self.expect(Token::RBrace, "`}`")?;
                    a
                };
                while self.eat(&Token::Star) {
                    a = HybridProgram::star(a);
                }
                Ok(a)
            }
            Token::Question => {
                self.bump();
                let span = self.span();
                let p = self.unary_formula()?;
                HybridProgram::test(p).map_err(|e| ParseError::new(e.to_string(), span))
            }
            Token::Ident(name) if matches!(self.scope.lookup(&name), Some(Symbol::Prog(_))) => {
                self.bump();
                Ok(self.scope.prog(&name).cloned().expect("checked above"))
            }
            t if self.is_variable_token(&t) => self.assignment(),
            _ => self.unexpected("a program"),
        }
    }

    fn assignment(&mut self) -> Result<HybridProgram, ParseError> {
        let start = self.span();
        let v = self.variable()?;
        self.expect(Token::Assign, "`:=`")?;
        if self.eat(&Token::Star) {
            return Ok(HybridProgram::AnyAssign(v));
        }
        let mut pairs = vec![(v, self.real()?)];
        while *self.peek() == Token::Comma {
            self.bump();
            let v = self.variable()?;
            self.expect(Token::Assign, "`:=`")?;
            if *self.peek() == Token::Star {
                return self.error("`x := *` cannot appear in an assignment list");
            }
            pairs.push((v, self.real()?));
        }
        AssignmentList::new(pairs)
            .map(HybridProgram::Assign)
            .map_err(|e| ParseError::new(e.to_string(), start))
    }

    fn ode(&mut self) -> Result<HybridProgram, ParseError> {
        let start = self.span();
        let mut pairs = Vec::new();
        loop {
            let v = self.variable()?;
            self.expect(Token::Prime, "`'`")?;
            self.expect(Token::EqSign, "`=`")?;
            pairs.push((v, self.real()?));
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        let domain = if self.eat(&Token::Amp) { self.formula()? } else { BoolExpr::Top };
        let eqs = AssignmentList::new(pairs).map_err(|e| ParseError::new(e.to_string(), start))?;
        OdeSystem::new(eqs, domain)
            .map(HybridProgram::Ode)
            .map_err(|e| ParseError::new(e.to_string(), start))
    }

    // ---- sequents ----

    pub fn sequent(&mut self) -> Result<Sequent, ParseError> {
        let antecedent = self.formula_list(&Token::Turnstile)?;
        self.expect(Token::Turnstile, "`|-`")?;
        let consequent = self.formula_list(&Token::Eof)?;
        Ok(Sequent::new(antecedent, consequent))
    }

    /// Comma-separated formulas, possibly empty when `stop` comes first.
    fn formula_list(&mut self, stop: &Token) -> Result<Vec<BoolExpr>, ParseError> {
        let mut out = Vec::new();
        if self.peek() == stop || (*stop == Token::Eof && *self.peek() == Token::Semi) {
            return Ok(out);
        }
        out.push(self.formula()?);
        while self.eat(&Token::Comma) {
            out.push(self.formula()?);
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope() -> Scope {
        let mut s = Scope::with_vars(&["x", "y", "c"]);
        s.declare_form("P", BoolExpr::rel(RelOp::Gt, RealExpr::Val(Variable(0)), RealExpr::int(0)))
            .unwrap();
        s.declare_prog("a", HybridProgram::assign(Variable(0), RealExpr::int(1))).unwrap();
        s.declare_prog("b", HybridProgram::assign(Variable(1), RealExpr::int(2))).unwrap();
        s
    }

    fn x() -> RealExpr {
        RealExpr::Val(Variable(0))
    }
    fn y() -> RealExpr {
        RealExpr::Val(Variable(1))
    }

    #[test]
    fn circle_lhs() {
        assert_eq!(parse_real("x^2 + y^2", &scope()).unwrap(), x().pow(2) + y().pow(2));
    }

    #[test]
    fn constant() {
        assert_eq!(parse_real("5", &scope()).unwrap(), RealExpr::int(5));
        assert_eq!(parse_real("0.25", &scope()).unwrap(), RealExpr::ratio(1, 4));
    }

    #[test]
    fn negated_product_over_two() {
        assert_eq!(parse_real("-(x*y)/2", &scope()).unwrap(), -(x() * y()) / RealExpr::int(2));
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        assert_eq!(parse_real("-x^2", &scope()).unwrap(), -(x().pow(2)));
        assert_eq!(parse_real("-3^2", &scope()).unwrap(), -(RealExpr::int(3).pow(2)));
        assert_eq!(parse_real("-3", &scope()).unwrap(), RealExpr::int(-3));
        assert_eq!(parse_real("-(3)", &scope()).unwrap(), -RealExpr::int(3));
        assert_eq!(parse_real("-x*y", &scope()).unwrap(), (-x()) * y());
    }

    #[test]
    fn left_associative_arithmetic() {
        assert_eq!(parse_real("x - y - 1", &scope()).unwrap(), (x() - y()) - RealExpr::int(1));
        assert_eq!(parse_real("x / y / 2", &scope()).unwrap(), (x() / y()) / RealExpr::int(2));
    }

    #[test]
    fn unknown_identifier() {
        let err = parse_real("x + zz", &scope()).unwrap_err();
        assert!(err.message.contains("unknown identifier"));
        assert_eq!(err.span.column, 5);
    }

    #[test]
    fn test_then_ode() {
        let a = parse_program("?(x>0); {x' = -y, y' = x & x >= 0}", &scope()).unwrap();
        let eqs = AssignmentList::new(vec![(Variable(0), -y()), (Variable(1), x())]).unwrap();
        let dom = BoolExpr::rel(RelOp::Ge, x(), RealExpr::int(0));
        let expected = HybridProgram::seq(
            HybridProgram::Test(BoolExpr::rel(RelOp::Gt, x(), RealExpr::int(0))),
            HybridProgram::Ode(OdeSystem::new(eqs, dom).unwrap()),
        );
        assert_eq!(a, expected);
    }

    #[test]
    fn random_assignment() {
        assert_eq!(parse_program("x := *", &scope()).unwrap(), HybridProgram::AnyAssign(Variable(0)));
    }

    #[test]
    fn seq_binds_tighter_than_choice() {
        let p = parse_program("a; b ++ b", &scope()).unwrap();
        let a = scope().prog("a").cloned().unwrap();
        let b = scope().prog("b").cloned().unwrap();
        assert_eq!(p, HybridProgram::choice(HybridProgram::seq(a, b.clone()), b));
    }

    #[test]
    fn duplicate_assignment_rejected() {
        let err = parse_program("x := 1, x := 2", &scope()).unwrap_err();
        assert!(err.message.contains("more than once"));
    }

    #[test]
    fn diamond_of_sequence() {
        let f = parse_formula("<a;b> P", &scope()).unwrap();
        let s = scope();
        let expected = BoolExpr::diamond(
            HybridProgram::seq(s.prog("a").cloned().unwrap(), s.prog("b").cloned().unwrap()),
            s.form("P").cloned().unwrap(),
        );
        assert_eq!(f, expected);
    }

    #[test]
    fn parenthesised_formula_versus_comparison() {
        let s = scope();
        let f = parse_formula("(x + 1) > 0 & (x > 0)", &s).unwrap();
        let expected = BoolExpr::and(
            BoolExpr::rel(RelOp::Gt, x() + RealExpr::int(1), RealExpr::int(0)),
            BoolExpr::rel(RelOp::Gt, x(), RealExpr::int(0)),
        );
        assert_eq!(f, expected);
        assert_eq!(parse_formula("true", &s).unwrap(), BoolExpr::Top);
    }

    #[test]
    fn chaining_rejected() {
        let err = parse_formula("x < y < 1", &scope()).unwrap_err();
        assert!(err.message.contains("chaining"));
    }

    #[test]
    fn sequent_sides() {
        let s = parse_sequent("x > 0, y = 0 |- x >= 0", &scope()).unwrap();
        assert_eq!(s.antecedent.len(), 2);
        assert_eq!(s.consequent.len(), 1);
        let empty = parse_sequent("|-", &scope()).unwrap();
        assert!(empty.antecedent.is_empty() && empty.consequent.is_empty());
    }
}
