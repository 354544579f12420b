//! Syntactic freshness. A `true` answer guarantees the semantic property;
//! some semantically fresh variables are reported as not fresh.

use std::collections::BTreeSet;

use crate::ast::{BoolExpr, HybridProgram, RealExpr, Variable, VarsOf};
use crate::sequent::Sequent;

/// Variables whose value may influence the truth of `p`. Everything in a
/// program counts, and a quantifier removes its own variable.
pub fn free_vars(p: &BoolExpr) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    collect_free(p, &mut out);
    out
}

fn collect_free(p: &BoolExpr, out: &mut BTreeSet<Variable>) {
    match p {
        BoolExpr::Top | BoolExpr::Bot => {}
        BoolExpr::Rel(_, a, b) => {
            a.collect_vars(out);
            b.collect_vars(out);
        }
        BoolExpr::And(a, b) | BoolExpr::Or(a, b) | BoolExpr::Implies(a, b) | BoolExpr::Iff(a, b) => {
            collect_free(a, out);
            collect_free(b, out);
        }
        BoolExpr::Not(a) => collect_free(a, out),
        BoolExpr::Forall(v, a) | BoolExpr::Exists(v, a) => {
            let mut inner = free_vars(a);
            inner.remove(v);
            out.extend(inner);
        }
        BoolExpr::AllRuns(prog, a) | BoolExpr::SomeRuns(prog, a) => {
            prog.collect_vars(out);
            collect_free(a, out);
        }
    }
}

pub fn fresh_in_real(v: Variable, r: &RealExpr) -> bool {
    !r.vars_of().contains(&v)
}

pub fn fresh_in_bool(v: Variable, p: &BoolExpr) -> bool {
    !free_vars(p).contains(&v)
}

/// `v` does not occur in the program at all.
pub fn fresh_in_program(v: Variable, a: &HybridProgram) -> bool {
    !a.vars_of().contains(&v)
}

/// Every variable the program may change is fresh in `p`.
pub fn fresh_program(p: &BoolExpr, a: &HybridProgram) -> bool {
    match a {
        HybridProgram::Assign(l) => l.targets().all(|v| fresh_in_bool(v, p)),
        HybridProgram::Ode(sys) => sys.equations.targets().all(|v| fresh_in_bool(v, p)),
        HybridProgram::Test(_) => true,
        HybridProgram::AnyAssign(x) => fresh_in_bool(*x, p),
        HybridProgram::Seq(x, y) | HybridProgram::Choice(x, y) => fresh_program(p, x) && fresh_program(p, y),
        HybridProgram::Star(x) => fresh_program(p, x),
    }
}

/// Least index not occurring anywhere in `used`.
pub fn least_unused(used: &BTreeSet<Variable>) -> Variable {
    let mut i = 0;
    for v in used {
        if v.0 != i {
            break;
        }
        i += 1;
    }
    Variable(i)
}

/// Least index not used as a variable anywhere in the sequent.
pub fn fresh_variable(s: &Sequent) -> Variable {
    least_unused(&s.vars_of())
}
