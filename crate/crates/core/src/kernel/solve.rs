//! Closed-form solutions of ODE systems, checked symbolically.

use std::collections::{BTreeMap, BTreeSet};

use super::{side_failed, KernelError, SideCondition};
use crate::arith::{poly_normalize, Monomial, PolyNF};
use crate::ast::{AssignmentList, OdeSystem, Rational, RealExpr, Variable, VarsOf};
use crate::diff::partial;
use crate::fresh::least_unused;
use crate::subst::sub_re;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Provenance {
    Builtin,
    User,
}

/// `x(τ)` for every evolving variable `x`, written in the time variable
/// `time` and the initial values (the variables themselves).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SolutionEntry {
    pub ode: OdeSystem,
    pub time: Variable,
    pub solution: AssignmentList,
    pub provenance: Provenance,
}

impl SolutionEntry {
    /// Whether this entry solves the equations of `sys`, ignoring the
    /// domain and equation order.
    pub fn solves(&self, sys: &OdeSystem) -> bool {
        let mine = &self.ode.equations;
        mine.len() == sys.equations.len() && sys.equations.iter().all(|(v, e)| mine.get(*v) == Some(e))
    }

    /// The solution at time `t`: `x := x(t)` for every evolving variable.
    pub fn at_time(&self, t: &RealExpr) -> AssignmentList {
        let shift = AssignmentList::single(self.time, t.clone());
        let pairs = self.solution.iter().map(|(v, e)| (*v, sub_re(&shift, e))).collect();
        AssignmentList::new(pairs).expect("targets unchanged")
    }
}

fn normalize(r: &RealExpr) -> Result<PolyNF, KernelError> {
    poly_normalize(r).map_err(|e| side_failed(SideCondition::Shape, e.to_string()))
}

/// Checks `d/dτ x(τ) = f_x(x(τ))` and `x(0) = x` for every equation by
/// polynomial normalization.
pub fn check_solution(sys: &OdeSystem, time: Variable, solution: &AssignmentList) -> Result<(), KernelError> {
    let evolving: BTreeSet<Variable> = sys.equations.targets().collect();
    if sys.vars_of().contains(&time) {
        return Err(side_failed(SideCondition::Freshness, format!("time variable {time} occurs in the system")));
    }
    let solved: BTreeSet<Variable> = solution.targets().collect();
    if solved != evolving {
        return Err(side_failed(SideCondition::Shape, "solution must cover exactly the evolving variables"));
    }
    let zero = AssignmentList::single(time, RealExpr::int(0));
    for (x, rhs) in sys.equations.iter() {
        let sol = solution.get(*x).expect("covered");
        if !sol.is_polynomial() {
            return Err(side_failed(SideCondition::Shape, format!("solution for {x} is not polynomial")));
        }
        let derivative = partial(sol, time).map_err(|e| side_failed(SideCondition::Shape, e.to_string()))?;
        let residual = normalize(&sub_re(solution, rhs))?.sub(&normalize(&derivative)?);
        if !residual.is_zero() {
            return Err(KernelError::SolutionCheckFailed { var: *x, residual });
        }
        let initial = normalize(&sub_re(&zero, sol))?.sub(&PolyNF::var(*x));
        if !initial.is_zero() {
            return Err(KernelError::SolutionCheckFailed { var: *x, residual: initial });
        }
    }
    Ok(())
}

fn integrate(p: &PolyNF, time: Variable) -> PolyNF {
    let mut out = PolyNF::zero();
    for (m, c) in p.terms() {
        let k = m.exponent(time);
        let coeff = c / Rational::from_integer((k + 1).into());
        out = out.add(&PolyNF::monomial(m.mul(&Monomial::var(time)), coeff));
    }
    out
}

/// Solves systems whose equations can be ordered so that each right-hand
/// side is a polynomial in already solved variables and parameters.
pub fn solve_ode(sys: &OdeSystem) -> Option<SolutionEntry> {
    let evolving: BTreeSet<Variable> = sys.equations.targets().collect();
    let time = least_unused(&sys.vars_of());
    let mut solved: BTreeMap<Variable, RealExpr> = BTreeMap::new();
    while solved.len() < evolving.len() {
        let next = sys.equations.iter().find(|(x, rhs)| {
            !solved.contains_key(x) && rhs.vars_of().iter().all(|v| !evolving.contains(v) || solved.contains_key(v))
        })?;
        let (x, rhs) = next;
        let known = AssignmentList::new(solved.iter().map(|(v, e)| (*v, e.clone())).collect()).expect("distinct");
        let along = poly_normalize(&sub_re(&known, rhs)).ok()?;
        let sol = PolyNF::var(*x).add(&integrate(&along, time));
        solved.insert(*x, sol.to_expr());
    }
    let pairs = sys.equations.targets().map(|x| (x, solved[&x].clone())).collect();
    let solution = AssignmentList::new(pairs).expect("distinct");
    check_solution(sys, time, &solution).ok()?;
    Some(SolutionEntry { ode: sys.clone(), time, solution, provenance: Provenance::Builtin })
}
