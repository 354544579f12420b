//! `.dl` declaration files.
//!
//! ```text
//! var x, y, c;
//! const half = 1/2;
//! form circ := x^2 + y^2 = c^2;
//! prog alpha := {x' = -y, y' = x}*;
//! goal dubins : c > 0 |- circ -> [alpha] circ;
//! ```
//!
//! A statement ends at a `;` that is followed by a keyword or the end of
//! the file, so programs may contain `;` freely.

use num_traits::{One, Zero};

use super::lexer::{tokenize, Token};
use super::parser::Parser;
use super::{ParseError, Scope, SourceSpan};
use crate::ast::{Rational, RealExpr};
use crate::sequent::Sequent;

#[derive(Clone, Debug)]
pub struct GoalDecl {
    pub name: String,
    pub sequent: Sequent,
    pub span: SourceSpan,
}

#[derive(Clone, Debug, Default)]
pub struct SpecFile {
    pub scope: Scope,
    pub goals: Vec<GoalDecl>,
}

impl SpecFile {
    pub fn goal(&self, name: &str) -> Option<&GoalDecl> {
        self.goals.iter().find(|g| g.name == name)
    }
}

const KEYWORDS: &[&str] = &["var", "const", "prog", "form", "goal"];

fn is_keyword(t: &Token) -> bool {
    matches!(t, Token::Ident(s) if KEYWORDS.contains(&s.as_str()))
}

pub fn parse_spec(src: &str) -> Result<SpecFile, ParseError> {
    let toks = tokenize(src)?;
    let mut spec = SpecFile::default();
    let mut start = 0;
    while toks[start].0 != Token::Eof {
        if !is_keyword(&toks[start].0) {
            return Err(ParseError::new(
                format!("expected a declaration keyword, found {}", toks[start].0.describe()),
                toks[start].1,
            ));
        }
        let mut end = start + 1;
        loop {
            match &toks[end].0 {
                Token::Eof => {
                    return Err(ParseError::new("missing `;` at end of declaration", toks[end].1));
                }
                Token::Semi if toks[end + 1].0 == Token::Eof || is_keyword(&toks[end + 1].0) => break,
                _ => end += 1,
            }
        }
        let mut stmt: Vec<(Token, SourceSpan)> = toks[start..end].to_vec();
        stmt.push((Token::Eof, toks[end].1));
        statement(&mut spec, stmt)?;
        start = end + 1;
    }
    Ok(spec)
}

fn statement(spec: &mut SpecFile, stmt: Vec<(Token, SourceSpan)>) -> Result<(), ParseError> {
    let keyword = match &stmt[0].0 {
        Token::Ident(k) => k.clone(),
        _ => unreachable!("statements start with a keyword"),
    };
    let mut body = stmt[1..].to_vec();
    let mut names = Vec::new();
    let name = |t: &(Token, SourceSpan)| match &t.0 {
        Token::Ident(n) => Ok(n.clone()),
        other => Err(ParseError::new(format!("expected a name, found {}", other.describe()), t.1)),
    };
    let declare_err = |msg: String, span: SourceSpan| ParseError::new(msg, span);
    match keyword.as_str() {
        "var" => {
            let mut i = 0;
            loop {
                names.push((name(&body[i])?, body[i].1));
                i += 1;
                match &body[i].0 {
                    Token::Comma => i += 1,
                    Token::Eof => break,
                    other => {
                        return Err(ParseError::new(format!("expected `,` or `;`, found {}", other.describe()), body[i].1))
                    }
                }
            }
            for (n, span) in names {
                spec.scope.declare_var(&n).map_err(|m| declare_err(m, span))?;
            }
        }
        "const" | "prog" | "form" | "goal" => {
            let (n, span) = (name(&body[0])?, body[0].1);
            if body.len() < 2 {
                return Err(ParseError::new("incomplete declaration", span));
            }
            let sep = &body[1];
            let ok = match keyword.as_str() {
                "const" => matches!(sep.0, Token::EqSign | Token::Assign),
                "goal" => sep.0 == Token::Colon,
                _ => sep.0 == Token::Assign,
            };
            if !ok {
                let want = if keyword == "goal" { "`:`" } else { "`:=`" };
                return Err(ParseError::new(format!("expected {want}, found {}", sep.0.describe()), sep.1));
            }
            body.drain(0..2);
            let mut p = Parser::from_tokens(body, &spec.scope);
            match keyword.as_str() {
                "const" => {
                    let e = p.real()?;
                    p.expect_eof()?;
                    let value = fold_constant(&e)
                        .ok_or_else(|| ParseError::new("constant must be a closed rational expression", span))?;
                    spec.scope.declare_const(&n, value).map_err(|m| declare_err(m, span))?;
                }
                "prog" => {
                    let a = p.program()?;
                    p.expect_eof()?;
                    spec.scope.declare_prog(&n, a).map_err(|m| declare_err(m, span))?;
                }
                "form" => {
                    let f = p.formula()?;
                    p.expect_eof()?;
                    spec.scope.declare_form(&n, f).map_err(|m| declare_err(m, span))?;
                }
                _ => {
                    let s = p.sequent()?;
                    p.expect_eof()?;
                    if spec.goal(&n).is_some() {
                        return Err(ParseError::new(format!("goal `{n}` is already declared"), span));
                    }
                    spec.goals.push(GoalDecl { name: n, sequent: s, span });
                }
            }
        }
        _ => unreachable!("keyword list"),
    }
    Ok(())
}

fn fold_constant(e: &RealExpr) -> Option<Rational> {
    Some(match e {
        RealExpr::Cnst(c) => c.clone(),
        RealExpr::Val(_) | RealExpr::Sqrt(_) => return None,
        RealExpr::Add(a, b) => fold_constant(a)? + fold_constant(b)?,
        RealExpr::Sub(a, b) => fold_constant(a)? - fold_constant(b)?,
        RealExpr::Mul(a, b) => fold_constant(a)? * fold_constant(b)?,
        RealExpr::Div(a, b) => {
            let d = fold_constant(b)?;
            if d.is_zero() {
                return None;
            }
            fold_constant(a)? / d
        }
        RealExpr::Neg(a) => -fold_constant(a)?,
        RealExpr::Pow(a, n) => {
            let base = fold_constant(a)?;
            (0..*n).fold(Rational::one(), |acc, _| acc * &base)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::print_sequent;

    #[test]
    fn declarations_and_goal() {
        let spec = parse_spec(
            "var x, y, c;\nconst half = 1/2;\nform circ := x^2 + y^2 = c^2;\n\
             prog alpha := {x := half; y := 1}*;\ngoal g : c > 0 |- circ -> [alpha] circ;",
        )
        .unwrap();
        assert_eq!(spec.scope.var("c").map(|v| v.0), Some(2));
        assert_eq!(spec.goals.len(), 1);
        let text = print_sequent(&spec.goals[0].sequent, &spec.scope);
        assert_eq!(text, "c > 0 |- x^2 + y^2 = c^2 -> [{x := 0.5; y := 1}*] (x^2 + y^2 = c^2)");
    }

    #[test]
    fn missing_semicolon() {
        let err = parse_spec("var x y;").unwrap_err();
        assert!(err.message.contains("`,` or `;`"), "{}", err.message);
    }

    #[test]
    fn redeclaration_is_rejected() {
        let err = parse_spec("var x;\nvar x;").unwrap_err();
        assert_eq!(err.span.line, 2);
    }
}
