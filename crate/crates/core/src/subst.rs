//! Simultaneous substitution of an assignment list, at the level of
//! environments and pushed down through expressions and formulas.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, RealExpr, Variable, VarsOf};
use crate::env::Environment;
use crate::eval::{eval_real, EvalError};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SubstError {
    /// The substitution would need renaming or would reach inside a
    /// program that mentions a target.
    #[error("substitution is incomplete at {0:?}")]
    SubstitutionIncomplete(BoolExpr),
}

/// The environment after running the assignment: every right-hand side is
/// evaluated in the original `e`.
pub fn assign_sub(l: &AssignmentList, e: &Environment) -> Result<Environment, EvalError> {
    let mut updates = Vec::with_capacity(l.len());
    for (v, r) in l.iter() {
        updates.push((*v, eval_real(r, e)?));
    }
    Ok(e.with(&updates))
}

pub fn sub_re(l: &AssignmentList, r: &RealExpr) -> RealExpr {
    let b = |x: &RealExpr| Box::new(sub_re(l, x));
    match r {
        RealExpr::Cnst(_) => r.clone(),
        RealExpr::Val(v) => l.get(*v).cloned().unwrap_or_else(|| r.clone()),
        RealExpr::Add(x, y) => RealExpr::Add(b(x), b(y)),
        RealExpr::Sub(x, y) => RealExpr::Sub(b(x), b(y)),
        RealExpr::Mul(x, y) => RealExpr::Mul(b(x), b(y)),
        RealExpr::Div(x, y) => RealExpr::Div(b(x), b(y)),
        RealExpr::Neg(x) => RealExpr::Neg(b(x)),
        RealExpr::Sqrt(x) => RealExpr::Sqrt(b(x)),
        RealExpr::Pow(x, n) => RealExpr::Pow(b(x), *n),
    }
}

/// Pushes the substitution through `p`. Binders shadow their variable;
/// a right-hand side that would be captured by a binder or by a variable
/// the program changes makes the substitution incomplete.
pub fn sub_bool(l: &AssignmentList, p: &BoolExpr) -> Result<BoolExpr, SubstError> {
    if l.is_empty() {
        return Ok(p.clone());
    }
    let rec = |x: &BoolExpr| sub_bool(l, x).map(Box::new);
    Ok(match p {
        BoolExpr::Top | BoolExpr::Bot => p.clone(),
        BoolExpr::Rel(op, a, b) => BoolExpr::Rel(*op, sub_re(l, a), sub_re(l, b)),
        BoolExpr::And(a, b) => BoolExpr::And(rec(a)?, rec(b)?),
        BoolExpr::Or(a, b) => BoolExpr::Or(rec(a)?, rec(b)?),
        BoolExpr::Implies(a, b) => BoolExpr::Implies(rec(a)?, rec(b)?),
        BoolExpr::Iff(a, b) => BoolExpr::Iff(rec(a)?, rec(b)?),
        BoolExpr::Not(a) => BoolExpr::Not(rec(a)?),
        BoolExpr::Forall(v, a) | BoolExpr::Exists(v, a) => {
            let inner = without(l, &BTreeSet::from([*v]));
            if rhs_vars(&inner).contains(v) {
                return Err(SubstError::SubstitutionIncomplete(p.clone()));
            }
            let body = Box::new(sub_bool(&inner, a)?);
            if matches!(p, BoolExpr::Forall(..)) {
                BoolExpr::Forall(*v, body)
            } else {
                BoolExpr::Exists(*v, body)
            }
        }
        BoolExpr::AllRuns(prog, a) | BoolExpr::SomeRuns(prog, a) => {
            if !rhs_vars(l).is_disjoint(&prog.bound_vars()) {
                return Err(SubstError::SubstitutionIncomplete(p.clone()));
            }
            let (prog2, after) = sub_prog(l, prog).ok_or_else(|| SubstError::SubstitutionIncomplete(p.clone()))?;
            let body = Box::new(sub_bool(&after, a)?);
            if matches!(p, BoolExpr::AllRuns(..)) {
                BoolExpr::AllRuns(Box::new(prog2), body)
            } else {
                BoolExpr::SomeRuns(Box::new(prog2), body)
            }
        }
    })
}

fn rhs_vars(l: &AssignmentList) -> BTreeSet<Variable> {
    l.iter().flat_map(|(_, r)| r.vars_of()).collect()
}

fn without(l: &AssignmentList, drop: &BTreeSet<Variable>) -> AssignmentList {
    let pairs = l.iter().filter(|(v, _)| !drop.contains(v)).cloned().collect();
    AssignmentList::new(pairs).expect("subset of distinct targets")
}

/// The substituted program and the substitution that still applies after
/// it. The caller guarantees no right-hand side mentions a variable the
/// program changes.
fn sub_prog(l: &AssignmentList, a: &HybridProgram) -> Option<(HybridProgram, AssignmentList)> {
    Some(match a {
        HybridProgram::Assign(m) => {
            let pairs = m.iter().map(|(v, r)| (*v, sub_re(l, r))).collect();
            let m2 = AssignmentList::new(pairs).expect("targets unchanged");
            (HybridProgram::Assign(m2), without(l, &m.targets().collect()))
        }
        HybridProgram::Test(q) => (HybridProgram::Test(sub_bool(l, q).ok()?), l.clone()),
        HybridProgram::AnyAssign(v) => (a.clone(), without(l, &BTreeSet::from([*v]))),
        HybridProgram::Ode(sys) => {
            // Inside the flow the evolving variables denote their current values.
            let targets: BTreeSet<Variable> = sys.equations.targets().collect();
            let inner = without(l, &targets);
            let pairs = sys.equations.iter().map(|(v, r)| (*v, sub_re(&inner, r))).collect();
            let equations = AssignmentList::new(pairs).expect("targets unchanged");
            let sys2 = OdeSystem::new(equations, sub_bool(&inner, &sys.domain).ok()?).ok()?;
            (HybridProgram::Ode(sys2), inner)
        }
        HybridProgram::Seq(x, y) => {
            let (x2, l1) = sub_prog(l, x)?;
            let (y2, l2) = sub_prog(&l1, y)?;
            (HybridProgram::seq(x2, y2), l2)
        }
        HybridProgram::Choice(x, y) => {
            let (x2, lx) = sub_prog(l, x)?;
            let (y2, ly) = sub_prog(l, y)?;
            if lx != ly {
                return None;
            }
            (HybridProgram::choice(x2, y2), lx)
        }
        HybridProgram::Star(x) => {
            let (x2, after) = sub_prog(l, x)?;
            if after != *l {
                return None;
            }
            (HybridProgram::star(x2), after)
        }
    })
}
