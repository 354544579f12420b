//! Symbolic partial derivatives, Lie derivatives along an ODE system, and
//! derivatives of non-quantified formulas.

use thiserror::Error;

use crate::ast::{BoolExpr, OdeSystem, RealExpr, RelOp, Variable, VarsOf};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("derivative of {0:?} is not supported")]
    UnsupportedDerivative(RealExpr),
    #[error("not a non-quantified formula: {0:?}")]
    NotNqb(BoolExpr),
}

fn add(a: RealExpr, b: RealExpr) -> RealExpr {
    if a.is_zero() {
        b
    } else if b.is_zero() {
        a
    } else {
        a + b
    }
}

fn sub(a: RealExpr, b: RealExpr) -> RealExpr {
    if b.is_zero() {
        a
    } else if a.is_zero() {
        neg(b)
    } else {
        a - b
    }
}

fn neg(a: RealExpr) -> RealExpr {
    if a.is_zero() {
        a
    } else {
        -a
    }
}

fn mul(a: RealExpr, b: RealExpr) -> RealExpr {
    if a.is_zero() || b.is_zero() {
        RealExpr::int(0)
    } else if a.is_one() {
        b
    } else if b.is_one() {
        a
    } else {
        a * b
    }
}

fn power(a: &RealExpr, n: u32) -> RealExpr {
    match n {
        0 => RealExpr::int(1),
        1 => a.clone(),
        _ => a.clone().pow(n),
    }
}

/// `∂r/∂v`, folding the constants 0 and 1 only.
pub fn partial(r: &RealExpr, v: Variable) -> Result<RealExpr, DiffError> {
    if !r.vars_of().contains(&v) {
        return Ok(RealExpr::int(0));
    }
    Ok(match r {
        RealExpr::Cnst(_) => RealExpr::int(0),
        RealExpr::Val(w) => RealExpr::int(i64::from(*w == v)),
        RealExpr::Add(a, b) => add(partial(a, v)?, partial(b, v)?),
        RealExpr::Sub(a, b) => sub(partial(a, v)?, partial(b, v)?),
        RealExpr::Mul(a, b) => add(
            mul(partial(a, v)?, (**b).clone()),
            mul((**a).clone(), partial(b, v)?),
        ),
        RealExpr::Neg(a) => neg(partial(a, v)?),
        RealExpr::Pow(a, n) => {
            if *n == 0 {
                RealExpr::int(0)
            } else {
                mul(mul(RealExpr::int(i64::from(*n)), power(a, n - 1)), partial(a, v)?)
            }
        }
        RealExpr::Div(..) | RealExpr::Sqrt(_) => return Err(DiffError::UnsupportedDerivative(r.clone())),
    })
}

/// `Σ ∂r/∂x_i · f_i` over the equations `x_i' = f_i`, in equation order.
pub fn lie_derivative(r: &RealExpr, sys: &OdeSystem) -> Result<RealExpr, DiffError> {
    let mut acc = RealExpr::int(0);
    for (v, rhs) in sys.equations.iter() {
        acc = add(acc, mul(partial(r, *v)?, rhs.clone()));
    }
    Ok(acc)
}

/// Built only from `&`, `|`, `!` and comparisons.
pub fn is_nqb(b: &BoolExpr) -> bool {
    match b {
        BoolExpr::Rel(..) => true,
        BoolExpr::And(x, y) | BoolExpr::Or(x, y) => is_nqb(x) && is_nqb(y),
        BoolExpr::Not(x) => is_nqb(x),
        _ => false,
    }
}

/// Pushes negations onto comparisons by dualizing them.
pub fn negation_normal_form(b: &BoolExpr) -> BoolExpr {
    match b {
        BoolExpr::And(x, y) => BoolExpr::and(negation_normal_form(x), negation_normal_form(y)),
        BoolExpr::Or(x, y) => BoolExpr::or(negation_normal_form(x), negation_normal_form(y)),
        BoolExpr::Not(x) => match &**x {
            BoolExpr::Rel(op, r1, r2) => BoolExpr::Rel(op.negate(), r1.clone(), r2.clone()),
            BoolExpr::Not(y) => negation_normal_form(y),
            BoolExpr::And(p, q) => negation_normal_form(&BoolExpr::or(BoolExpr::not((**p).clone()), BoolExpr::not((**q).clone()))),
            BoolExpr::Or(p, q) => negation_normal_form(&BoolExpr::and(BoolExpr::not((**p).clone()), BoolExpr::not((**q).clone()))),
            other => BoolExpr::not(negation_normal_form(other)),
        },
        other => other.clone(),
    }
}

/// The derivative `b'` of a non-quantified formula along `sys`.
pub fn bool_derivative(b: &BoolExpr, sys: &OdeSystem) -> Result<BoolExpr, DiffError> {
    if !is_nqb(b) {
        return Err(DiffError::NotNqb(b.clone()));
    }
    derive(&negation_normal_form(b), sys)
}

fn derive(b: &BoolExpr, sys: &OdeSystem) -> Result<BoolExpr, DiffError> {
    match b {
        BoolExpr::And(x, y) | BoolExpr::Or(x, y) => Ok(BoolExpr::and(derive(x, sys)?, derive(y, sys)?)),
        BoolExpr::Rel(op, r1, r2) => {
            let op = match op {
                RelOp::Le | RelOp::Lt => RelOp::Le,
                RelOp::Ge | RelOp::Gt => RelOp::Ge,
                RelOp::Eq | RelOp::Ne => RelOp::Eq,
            };
            Ok(BoolExpr::Rel(op, lie_derivative(r1, sys)?, lie_derivative(r2, sys)?))
        }
        other => Err(DiffError::NotNqb(other.clone())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::HybridProgram;
    use crate::syntax::{parse_formula, parse_program, parse_real, print_formula, print_real, Scope};

    fn scope() -> Scope {
        Scope::with_vars(&["x", "y", "c"])
    }

    fn rotation(sc: &Scope) -> OdeSystem {
        match parse_program("{x' = -y, y' = x & x >= 0}", sc).unwrap() {
            HybridProgram::Ode(s) => s,
            _ => unreachable!(),
        }
    }

    #[test]
    fn partials() {
        let sc = scope();
        let x = sc.var("x").unwrap();
        let y = sc.var("y").unwrap();
        let d = |s: &str, v| print_real(&partial(&parse_real(s, &sc).unwrap(), v).unwrap(), &sc);
        assert_eq!(d("x^2", x), "2*x");
        assert_eq!(d("x^2 + y^2", x), "2*x");
        assert_eq!(d("x*y", y), "x");
        assert_eq!(d("c/2 + x", x), "1");
        assert!(partial(&parse_real("1/x", &sc).unwrap(), x).is_err());
    }

    #[test]
    fn circle_lie_derivative() {
        let sc = scope();
        let sys = rotation(&sc);
        let r = parse_real("x^2 + y^2", &sc).unwrap();
        assert_eq!(print_real(&lie_derivative(&r, &sys).unwrap(), &sc), "2*x*(-y) + 2*y*x");
        let c = parse_real("c^2", &sc).unwrap();
        assert!(lie_derivative(&c, &sys).unwrap().is_zero());
        let circ = parse_formula("x^2 + y^2 = c^2", &sc).unwrap();
        assert_eq!(print_formula(&bool_derivative(&circ, &sys).unwrap(), &sc), "2*x*(-y) + 2*y*x = 0");
    }

    #[test]
    fn relation_table() {
        let sc = scope();
        let sys = rotation(&sc);
        let d = |s: &str| print_formula(&bool_derivative(&parse_formula(s, &sc).unwrap(), &sys).unwrap(), &sc);
        assert_eq!(d("x < y"), "-y <= x");
        assert_eq!(d("x > c"), "-y >= 0");
        assert_eq!(d("x != y"), "-y = x");
        assert_eq!(d("x >= 0 | y >= 0"), "-y >= 0 & x >= 0");
        assert_eq!(d("!(x < 0)"), "-y >= 0");
        assert_eq!(d("!(x < 0 & y = 1)"), "-y >= 0 & x = 0");
    }

    #[test]
    fn nqb_classifier() {
        let sc = scope();
        assert!(is_nqb(&parse_formula("x > 0 & y = c", &sc).unwrap()));
        assert!(!is_nqb(&parse_formula("forall x. x > 0", &sc).unwrap()));
        assert!(!is_nqb(&parse_formula("[x := 1] (x > 0)", &sc).unwrap()));
        assert!(!is_nqb(&BoolExpr::Top));
        assert!(bool_derivative(&BoolExpr::Top, &rotation(&sc)).is_err());
    }
}
