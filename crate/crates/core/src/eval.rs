//! Executable semantics: expression evaluation, bounded enumeration of
//! program runs, and RK4 flows of ODE systems.
//!
//! Star is unrolled a bounded number of times and `x := *` ranges over a
//! finite sample list, so modal formulas evaluate to a sampled
//! approximation of their meaning. Continuous programs are not executable
//! under a modality.

use std::collections::BTreeSet;

use num_traits::ToPrimitive;
use thiserror::Error;

use crate::ast::{BoolExpr, HybridProgram, OdeSystem, Rational, RealExpr, RelOp, Variable};
use crate::env::Environment;
use crate::sequent::Sequent;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("division by zero in {0:?}")]
    DivByZero(RealExpr),
    #[error("square root of a negative number in {0:?}")]
    SqrtNegative(RealExpr),
    #[error("not executable: {0}")]
    NonExecutable(String),
    #[error("more than {0} intermediate runs")]
    BudgetExceeded(usize),
    #[error("ODEs are not supported by the bounded run enumeration")]
    OdeNotSupported,
}

/// Finitization parameters for the run enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Budget {
    pub star_unroll: usize,
    /// Values tried for `x := *` and for quantified variables.
    pub any_assign_samples: Vec<Rational>,
    pub max_branches: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            star_unroll: 4,
            any_assign_samples: [-1, 0, 1, 2].iter().map(|&n| Rational::from_integer(n.into())).collect(),
            max_branches: 100_000,
        }
    }
}

impl Budget {
    pub fn with_star(star_unroll: usize) -> Self {
        Budget { star_unroll, ..Budget::default() }
    }

    fn samples(&self) -> impl Iterator<Item = f64> + '_ {
        self.any_assign_samples.iter().map(rational_to_f64)
    }
}

pub fn rational_to_f64(c: &Rational) -> f64 {
    c.to_f64().unwrap_or(f64::NAN)
}

pub fn eval_real(r: &RealExpr, e: &Environment) -> Result<f64, EvalError> {
    Ok(match r {
        RealExpr::Cnst(c) => rational_to_f64(c),
        RealExpr::Val(v) => e.lookup(*v),
        RealExpr::Add(a, b) => eval_real(a, e)? + eval_real(b, e)?,
        RealExpr::Sub(a, b) => eval_real(a, e)? - eval_real(b, e)?,
        RealExpr::Mul(a, b) => eval_real(a, e)? * eval_real(b, e)?,
        RealExpr::Div(a, b) => {
            let d = eval_real(b, e)?;
            if d == 0.0 {
                return Err(EvalError::DivByZero(r.clone()));
            }
            eval_real(a, e)? / d
        }
        RealExpr::Neg(a) => -eval_real(a, e)?,
        RealExpr::Sqrt(a) => {
            let x = eval_real(a, e)?;
            if x < 0.0 {
                return Err(EvalError::SqrtNegative(r.clone()));
            }
            x.sqrt()
        }
        RealExpr::Pow(a, n) => {
            let x = eval_real(a, e)?;
            match i32::try_from(*n) {
                Ok(k) => x.powi(k),
                Err(_) => x.powf(*n as f64),
            }
        }
    })
}

/// Relative tolerance of numeric comparisons.
pub const REL_TOLERANCE: f64 = 1e-9;

/// Comparison up to [`REL_TOLERANCE`]. The six relations stay mutually
/// consistent: `!(a <= b)` iff `a > b`, and `a <= b` iff `a < b | a = b`.
pub fn compare(op: RelOp, a: f64, b: f64) -> bool {
    let tol = REL_TOLERANCE * 1f64.max(a.abs()).max(b.abs());
    let d = a - b;
    match op {
        RelOp::Eq => d.abs() <= tol,
        RelOp::Ne => d.abs() > tol,
        RelOp::Le => d <= tol,
        RelOp::Lt => d < -tol,
        RelOp::Ge => d >= -tol,
        RelOp::Gt => d > tol,
    }
}

/// Truth value at `e`. `None` uses [`Budget::default`] for modalities and
/// quantifiers, which range over the sample list only.
pub fn eval_bool(p: &BoolExpr, e: &Environment, b: Option<&Budget>) -> Result<bool, EvalError> {
    let default;
    let budget = match b {
        Some(b) => b,
        None => {
            default = Budget::default();
            &default
        }
    };
    eval_with(p, e, budget)
}

fn eval_with(p: &BoolExpr, e: &Environment, b: &Budget) -> Result<bool, EvalError> {
    Ok(match p {
        BoolExpr::Top => true,
        BoolExpr::Bot => false,
        BoolExpr::Rel(op, x, y) => compare(*op, eval_real(x, e)?, eval_real(y, e)?),
        BoolExpr::And(x, y) => eval_with(x, e, b)? && eval_with(y, e, b)?,
        BoolExpr::Or(x, y) => eval_with(x, e, b)? || eval_with(y, e, b)?,
        BoolExpr::Not(x) => !eval_with(x, e, b)?,
        BoolExpr::Implies(x, y) => !eval_with(x, e, b)? || eval_with(y, e, b)?,
        BoolExpr::Iff(x, y) => eval_with(x, e, b)? == eval_with(y, e, b)?,
        BoolExpr::Forall(v, x) => {
            for r in b.samples() {
                if !eval_with(x, &e.with(&[(*v, r)]), b)? {
                    return Ok(false);
                }
            }
            true
        }
        BoolExpr::Exists(v, x) => {
            for r in b.samples() {
                if eval_with(x, &e.with(&[(*v, r)]), b)? {
                    return Ok(true);
                }
            }
            false
        }
        BoolExpr::AllRuns(a, x) => {
            for o in runs_for_modality(a, e, b)? {
                if !eval_with(x, &o, b)? {
                    return Ok(false);
                }
            }
            true
        }
        BoolExpr::SomeRuns(a, x) => {
            for o in runs_for_modality(a, e, b)? {
                if eval_with(x, &o, b)? {
                    return Ok(true);
                }
            }
            false
        }
    })
}

fn runs_for_modality(a: &HybridProgram, e: &Environment, b: &Budget) -> Result<BTreeSet<Environment>, EvalError> {
    match bounded_outputs(a, e, b) {
        Err(EvalError::OdeNotSupported) => Err(EvalError::NonExecutable(
            "ODE under a modality has no executable semantics".to_string(),
        )),
        other => other,
    }
}

/// Sampled validity of `Γ ⊢ Δ` at one environment.
pub fn eval_sequent(s: &Sequent, e: &Environment, b: Option<&Budget>) -> Result<bool, EvalError> {
    for g in &s.antecedent {
        if !eval_bool(g, e, b)? {
            return Ok(true);
        }
    }
    for d in &s.consequent {
        if eval_bool(d, e, b)? {
            return Ok(true);
        }
    }
    Ok(false)
}

/// All final environments of runs of a discrete program, finitized by the
/// budget.
pub fn bounded_outputs(a: &HybridProgram, e: &Environment, b: &Budget) -> Result<BTreeSet<Environment>, EvalError> {
    let mut start = BTreeSet::new();
    start.insert(e.clone());
    outputs_from(a, start, b)
}

fn check(set: BTreeSet<Environment>, b: &Budget) -> Result<BTreeSet<Environment>, EvalError> {
    if set.len() > b.max_branches {
        Err(EvalError::BudgetExceeded(b.max_branches))
    } else {
        Ok(set)
    }
}

fn outputs_from(a: &HybridProgram, inputs: BTreeSet<Environment>, b: &Budget) -> Result<BTreeSet<Environment>, EvalError> {
    let out = match a {
        HybridProgram::Assign(l) => {
            let mut out = BTreeSet::new();
            for e in inputs {
                let mut updates = Vec::with_capacity(l.len());
                for (v, r) in l.iter() {
                    updates.push((*v, eval_real(r, &e)?));
                }
                out.insert(e.with(&updates));
            }
            out
        }
        HybridProgram::Test(p) => {
            let mut out = BTreeSet::new();
            for e in inputs {
                if eval_with(p, &e, b)? {
                    out.insert(e);
                }
            }
            out
        }
        HybridProgram::AnyAssign(v) => {
            let mut out = BTreeSet::new();
            for e in inputs {
                for r in b.samples() {
                    out.insert(e.with(&[(*v, r)]));
                }
            }
            out
        }
        HybridProgram::Ode(_) => return Err(EvalError::OdeNotSupported),
        HybridProgram::Seq(x, y) => {
            let mid = outputs_from(x, inputs, b)?;
            outputs_from(y, mid, b)?
        }
        HybridProgram::Choice(x, y) => {
            let mut out = outputs_from(x, inputs.clone(), b)?;
            out.extend(outputs_from(y, inputs, b)?);
            out
        }
        HybridProgram::Star(x) => {
            let mut all = inputs.clone();
            let mut frontier = inputs;
            for _ in 0..b.star_unroll {
                if frontier.is_empty() {
                    break;
                }
                let next = outputs_from(x, frontier, b)?;
                frontier = next.difference(&all).cloned().collect();
                all.extend(next);
                all = check(all, b)?;
            }
            all
        }
    };
    check(out, b)
}

/// Numeric trajectory of an ODE system.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowResult {
    pub end_env: Environment,
    pub trajectory: Vec<(f64, Environment)>,
    /// First grid time at which the domain constraint was false. The
    /// trajectory stops at the last grid point before it.
    pub domain_violated_at: Option<f64>,
}

fn field(sys: &OdeSystem, e: &Environment) -> Result<Vec<f64>, EvalError> {
    sys.equations.iter().map(|(_, r)| eval_real(r, e)).collect()
}

fn shifted(sys: &OdeSystem, e: &Environment, base: &[f64], k: &[f64], h: f64) -> Environment {
    let updates: Vec<(Variable, f64)> = sys
        .equations
        .iter()
        .zip(base.iter().zip(k))
        .map(|((v, _), (x, d))| (*v, x + h * d))
        .collect();
    e.with(&updates)
}

/// Fixed-step RK4 integration from `e` for `t_end` time units. The final
/// step is shortened so the last grid point lands on `t_end`.
pub fn ode_flow(sys: &OdeSystem, e: &Environment, t_end: f64, step: f64) -> Result<FlowResult, EvalError> {
    assert!(t_end >= 0.0 && step > 0.0, "ode_flow needs t_end >= 0 and step > 0");
    let mut trajectory = vec![(0.0, e.clone())];
    if !eval_bool(&sys.domain, e, None)? {
        return Ok(FlowResult { end_env: e.clone(), trajectory, domain_violated_at: Some(0.0) });
    }
    let steps = ((t_end / step) - 1e-9).ceil().max(0.0) as usize;
    let mut cur = e.clone();
    let mut t = 0.0;
    for i in 0..steps {
        let t_next = if i + 1 == steps { t_end } else { (i + 1) as f64 * step };
        let h = t_next - t;
        let x0: Vec<f64> = sys.equations.iter().map(|(v, _)| cur.lookup(*v)).collect();
        let k1 = field(sys, &cur)?;
        let k2 = field(sys, &shifted(sys, &cur, &x0, &k1, h / 2.0))?;
        let k3 = field(sys, &shifted(sys, &cur, &x0, &k2, h / 2.0))?;
        let k4 = field(sys, &shifted(sys, &cur, &x0, &k3, h))?;
        let incr: Vec<f64> = (0..x0.len())
            .map(|j| (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]) / 6.0)
            .collect();
        let next = shifted(sys, &cur, &x0, &incr, h);
        if !eval_bool(&sys.domain, &next, None)? {
            return Ok(FlowResult { end_env: cur, trajectory, domain_violated_at: Some(t_next) });
        }
        trajectory.push((t_next, next.clone()));
        cur = next;
        t = t_next;
    }
    Ok(FlowResult { end_env: cur, trajectory, domain_violated_at: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ast::AssignmentList;
    use crate::syntax::{parse_formula, parse_program, parse_real, Scope};

    fn scope() -> Scope {
        Scope::with_vars(&["x", "y", "c"])
    }

    const X: Variable = Variable(0);
    const Y: Variable = Variable(1);

    #[test]
    fn constants_and_errors() {
        let sc = scope();
        assert_eq!(eval_real(&RealExpr::int(5), &Environment::constant(3.0)).unwrap(), 5.0);
        let inv = parse_real("1/x", &sc).unwrap();
        assert!(matches!(eval_real(&inv, &Environment::zero()), Err(EvalError::DivByZero(_))));
        let root = parse_real("sqrt(x - 1)", &sc).unwrap();
        assert!(matches!(eval_real(&root, &Environment::zero()), Err(EvalError::SqrtNegative(_))));
    }

    #[test]
    fn circle_point() {
        let sc = scope();
        let e = Environment::zero().with(&[(X, 1.0), (Y, 3f64.sqrt()), (Variable(2), 2.0)]);
        let r = eval_real(&parse_real("x^2 + y^2", &sc).unwrap(), &e).unwrap();
        assert!((r - 4.0).abs() < 1e-12);
        let circ = parse_formula("x^2 + y^2 = c^2", &sc).unwrap();
        assert!(eval_bool(&circ, &e, None).unwrap());
        assert!(!eval_bool(&circ, &e.with(&[(Y, 1.7)]), None).unwrap());
    }

    #[test]
    fn choice_box() {
        let sc = scope();
        let p = parse_formula("[x := 1 ++ x := 2] (x >= 1)", &sc).unwrap();
        assert!(eval_bool(&p, &Environment::zero(), None).unwrap());
    }

    #[test]
    fn outputs_of_choice_and_star() {
        let sc = scope();
        let b = Budget::with_star(3);
        let out = bounded_outputs(&parse_program("x := 1 ++ x := 2", &sc).unwrap(), &Environment::zero(), &b).unwrap();
        let xs: Vec<f64> = out.iter().map(|e| e.lookup(X)).collect();
        assert_eq!(xs.len(), 2);
        assert!(xs.contains(&1.0) && xs.contains(&2.0));
        let star = parse_program("{x := x + 1}*", &sc).unwrap();
        let mut xs: Vec<f64> = bounded_outputs(&star, &Environment::zero(), &b).unwrap().iter().map(|e| e.lookup(X)).collect();
        xs.sort_by(f64::total_cmp);
        assert_eq!(xs, vec![0.0, 1.0, 2.0, 3.0]);
        let fail = parse_program("?false", &sc).unwrap();
        assert!(bounded_outputs(&fail, &Environment::zero(), &b).unwrap().is_empty());
    }

    #[test]
    fn budget_exceeded() {
        let sc = scope();
        let b = Budget { max_branches: 3, ..Budget::default() };
        let a = parse_program("x := *; y := *", &sc).unwrap();
        assert_eq!(bounded_outputs(&a, &Environment::zero(), &b), Err(EvalError::BudgetExceeded(3)));
    }

    #[test]
    fn ode_under_modality_is_not_executable() {
        let sc = scope();
        let p = parse_formula("[{x' = 1}] (x >= 0)", &sc).unwrap();
        assert!(matches!(eval_bool(&p, &Environment::zero(), None), Err(EvalError::NonExecutable(_))));
    }

    #[test]
    fn zero_field_keeps_env() {
        let sys = OdeSystem::new(AssignmentList::single(X, RealExpr::int(0)), BoolExpr::Top).unwrap();
        let e = Environment::zero().with(&[(X, 0.3), (Y, -2.0)]);
        let f = ode_flow(&sys, &e, 1.0, 0.1).unwrap();
        assert_eq!(f.end_env, e);
        assert_eq!(f.trajectory.len(), 11);
        assert_eq!(f.trajectory.last().unwrap().0, 1.0);
    }

    #[test]
    fn domain_violation_stops_flow() {
        let sc = scope();
        let a = parse_program("{x' = -1 & x >= 0}", &sc).unwrap();
        let HybridProgram::Ode(sys) = a else { unreachable!() };
        let f = ode_flow(&sys, &Environment::zero().with(&[(X, 0.5)]), 2.0, 0.1).unwrap();
        let t = f.domain_violated_at.unwrap();
        assert!((t - 0.6).abs() < 1e-9, "{t}");
        assert!(f.end_env.lookup(X) >= 0.0);
    }
}
