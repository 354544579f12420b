//! Rule schemas as checked goal transformers.
//!
//! Placement conventions: the principal formula is replaced in place by
//! its first same-side component, a second same-side component goes right
//! after it, and formulas moving to the other side are appended.

use std::collections::BTreeSet;

use super::rules::RuleId;
use super::solve::{solve_ode, SolutionEntry};
use super::{not_applicable, side_failed, KernelError, RuleArgs, SideCondition};
use crate::arith::{arith_close, Verdict};
use crate::ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, RealExpr, RelOp, Variable, VarsOf};
use crate::diff::bool_derivative;
use crate::fresh::{fresh_in_bool, fresh_program, least_unused};
use crate::sequent::{Position, Sequent, Side};
use crate::subst::sub_bool;

type Rules = Result<Vec<Sequent>, KernelError>;

/// Applies `rule` to `s` and returns the premises in schema order.
pub fn apply_schema(s: &Sequent, rule: RuleId, args: &RuleArgs, solutions: &[SolutionEntry]) -> Rules {
    args.validate(rule)?;
    use RuleId::*;
    match rule {
        NotR | NotL | AndR | AndL | OrR | OrL | ImpliesR | ImpliesL | IffR | IffL => propositional(s, rule, args),
        Cut => {
            let c = formula(args)?;
            Ok(vec![pushed(s, Side::Right, c.clone()), pushed(s, Side::Left, c)])
        }
        WeakR | WeakL => weaken(s, rule, args),
        FalseL => {
            locate(s, args, Side::Left, "false", |f| matches!(f, BoolExpr::Bot))?;
            Ok(vec![])
        }
        TrueR => {
            locate(s, args, Side::Right, "true", |f| matches!(f, BoolExpr::Top))?;
            Ok(vec![])
        }
        Axiom => axiom(s, args),
        ExistsR | ForallL | ForallR | ExistsL => quantifier(s, rule, args),
        MoveR | MoveL => {
            let side = if rule == MoveR { Side::Right } else { Side::Left };
            let i = locate(s, args, side, "any formula", |_| true)?;
            if i + 1 >= s.side(side).len() {
                return Err(not_applicable(format!("{rule} needs a formula after position {i}")));
            }
            let mut out = s.clone();
            out.side_mut(side).swap(i, i + 1);
            Ok(vec![out])
        }
        HideR | HideL => {
            let side = if rule == HideR { Side::Right } else { Side::Left };
            let i = locate(s, args, side, "any formula", |_| true)?;
            let mut out = s.clone();
            out.side_mut(side).remove(i);
            Ok(vec![out])
        }
        Boxd | Assignb | Assignd | Testb | Testd | Choiceb | Choiced | Composeb | Composed | Iterateb | Iterated
        | Anyb | Anyd => rewrite_at(s, rule, args),
        Mb | Md | K | Loop | MbR | MbL | MdR | MdL | Ghost | Gb | Gd | VRb | VRd => program_rule(s, rule, args),
        Dinit | DW | DI | DC | DG | DS => ode_rule(s, rule, args, solutions),
        Arith => match arith_close(s) {
            Verdict::Proved(_) => Ok(vec![]),
            Verdict::Counterexample(cx) => {
                let shown: Vec<String> = cx.iter().map(|(v, q)| format!("{v} = {q}")).collect();
                Err(not_applicable(format!("counterexample: {}", shown.join(", "))))
            }
            Verdict::Unknown => Err(not_applicable("arithmetic could not prove the goal")),
        },
    }
}

fn formula(args: &RuleArgs) -> Result<BoolExpr, KernelError> {
    args.formula.clone().ok_or_else(|| not_applicable("missing formula argument `with`"))
}

fn term(args: &RuleArgs) -> Result<RealExpr, KernelError> {
    args.term.clone().ok_or_else(|| not_applicable("missing term argument `with`"))
}

/// Index of the principal formula: the addressed one if `at` is given,
/// otherwise the first on `side` satisfying `pred`.
fn locate(
    s: &Sequent,
    args: &RuleArgs,
    side: Side,
    shape: &str,
    pred: impl Fn(&BoolExpr) -> bool,
) -> Result<usize, KernelError> {
    match &args.at {
        Some(pos) => {
            if pos.side != side {
                return Err(not_applicable(format!("expected a position in the {side:?} side, got {pos}")));
            }
            if !pos.top() {
                return Err(not_applicable(format!("rule applies to top-level formulas only, got {pos}")));
            }
            let f = s.side(side).get(pos.index).ok_or_else(|| not_applicable(format!("no formula at {pos}")))?;
            if !pred(f) {
                return Err(not_applicable(format!("formula at {pos} is not {shape}")));
            }
            Ok(pos.index)
        }
        None => s
            .side(side)
            .iter()
            .position(pred)
            .ok_or_else(|| not_applicable(format!("no {shape} on the {side:?} side"))),
    }
}

fn replaced(s: &Sequent, side: Side, i: usize, f: BoolExpr) -> Sequent {
    let mut out = s.clone();
    out.side_mut(side)[i] = f;
    out
}

fn pushed(s: &Sequent, side: Side, f: BoolExpr) -> Sequent {
    let mut out = s.clone();
    out.side_mut(side).push(f);
    out
}

fn removed(s: &Sequent, side: Side, i: usize) -> Sequent {
    let mut out = s.clone();
    out.side_mut(side).remove(i);
    out
}

fn only(antecedent: Vec<BoolExpr>, consequent: Vec<BoolExpr>) -> Sequent {
    Sequent::new(antecedent, consequent)
}

fn propositional(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Rules {
    use BoolExpr as B;
    use RuleId::*;
    let (side, shape): (Side, &str) = match rule {
        NotR => (Side::Right, "a negation"),
        NotL => (Side::Left, "a negation"),
        AndR => (Side::Right, "a conjunction"),
        AndL => (Side::Left, "a conjunction"),
        OrR => (Side::Right, "a disjunction"),
        OrL => (Side::Left, "a disjunction"),
        ImpliesR => (Side::Right, "an implication"),
        ImpliesL => (Side::Left, "an implication"),
        IffR => (Side::Right, "an equivalence"),
        _ => (Side::Left, "an equivalence"),
    };
    let pred = |f: &BoolExpr| match rule {
        NotR | NotL => matches!(f, B::Not(_)),
        AndR | AndL => matches!(f, B::And(..)),
        OrR | OrL => matches!(f, B::Or(..)),
        ImpliesR | ImpliesL => matches!(f, B::Implies(..)),
        _ => matches!(f, B::Iff(..)),
    };
    let i = locate(s, args, side, shape, pred)?;
    let f = s.side(side)[i].clone();
    Ok(match (rule, f) {
        (NotR, B::Not(p)) => vec![pushed(&removed(s, side, i), Side::Left, *p)],
        (NotL, B::Not(p)) => vec![pushed(&removed(s, side, i), Side::Right, *p)],
        (AndR, B::And(p, q)) | (OrL, B::Or(p, q)) => vec![replaced(s, side, i, *p), replaced(s, side, i, *q)],
        (AndL, B::And(p, q)) | (OrR, B::Or(p, q)) => {
            let mut out = replaced(s, side, i, *p);
            out.side_mut(side).insert(i + 1, *q);
            vec![out]
        }
        (ImpliesR, B::Implies(p, q)) => vec![pushed(&replaced(s, side, i, *q), Side::Left, *p)],
        (ImpliesL, B::Implies(p, q)) => {
            vec![pushed(&removed(s, side, i), Side::Right, *p), replaced(s, side, i, *q)]
        }
        (IffR, B::Iff(p, q)) => vec![
            pushed(&replaced(s, side, i, (*q).clone()), Side::Left, (*p).clone()),
            pushed(&replaced(s, side, i, *p), Side::Left, *q),
        ],
        (IffL, B::Iff(p, q)) => vec![
            replaced(s, side, i, B::and((*p).clone(), (*q).clone())),
            replaced(s, side, i, B::and(B::not(*p), B::not(*q))),
        ],
        _ => unreachable!("shape checked by locate"),
    })
}

fn weaken(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Rules {
    let p = formula(args)?;
    if rule == RuleId::WeakR {
        let i = locate(s, args, Side::Right, "a formula", |_| true)?;
        let q = s.consequent[i].clone();
        Ok(vec![replaced(s, Side::Right, i, p.clone()), only(vec![p], vec![q])])
    } else {
        let i = locate(s, args, Side::Left, "a formula", |_| true)?;
        let q = s.antecedent[i].clone();
        Ok(vec![replaced(s, Side::Left, i, p.clone()), only(vec![q], vec![p])])
    }
}

fn axiom(s: &Sequent, args: &RuleArgs) -> Rules {
    let found = match &args.at {
        Some(pos) => {
            let f = s.get(pos).filter(|_| pos.top()).ok_or_else(|| not_applicable(format!("no formula at {pos}")))?;
            s.side(pos.side.other()).contains(f)
        }
        None => s.antecedent.iter().any(|f| s.consequent.contains(f)),
    };
    if found {
        Ok(vec![])
    } else {
        Err(not_applicable("no formula occurs on both sides"))
    }
}

fn quantifier(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Rules {
    use RuleId::*;
    let (side, universal) = match rule {
        ExistsR => (Side::Right, false),
        ForallL => (Side::Left, true),
        ForallR => (Side::Right, true),
        _ => (Side::Left, false),
    };
    let shape = if universal { "a universal formula" } else { "an existential formula" };
    let i = locate(s, args, side, shape, |f| match f {
        BoolExpr::Forall(..) => universal,
        BoolExpr::Exists(..) => !universal,
        _ => false,
    })?;
    let (x, body) = match &s.side(side)[i] {
        BoolExpr::Forall(x, p) | BoolExpr::Exists(x, p) => (*x, (**p).clone()),
        _ => unreachable!("shape checked by locate"),
    };
    let value = match rule {
        ExistsR | ForallL => term(args)?,
        _ => RealExpr::Val(skolem(s)),
    };
    let inst = sub_bool(&AssignmentList::single(x, value), &body)?;
    Ok(vec![replaced(s, side, i, inst)])
}

/// The Skolem symbol: the least index unused in the sequent.
fn skolem(s: &Sequent) -> Variable {
    least_unused(&s.vars_of())
}

/// Resolves the rewrite target: the addressed subformula, or the first
/// subformula (consequent first, preorder) the rewrite accepts.
fn rewrite_at(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Rules {
    let pos = match &args.at {
        Some(pos) => pos.clone(),
        None => find_rewrite(s, rule, args).ok_or_else(|| not_applicable(format!("no subformula matches {rule}")))?,
    };
    let f = s.get(&pos).ok_or_else(|| not_applicable(format!("no formula at {pos}")))?;
    let new = rewrite(f, rule, args.reverse, args.formula.as_ref())?;
    let mut out = s.clone();
    *out.get_mut(&pos).expect("position checked") = new;
    Ok(vec![out])
}

fn find_rewrite(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Option<Position> {
    for side in [Side::Right, Side::Left] {
        for (index, f) in s.side(side).iter().enumerate() {
            let mut path = Vec::new();
            if let Some(p) = search(f, &mut path, &|g| rewrite(g, rule, args.reverse, args.formula.as_ref()).is_ok()) {
                return Some(Position { side, index, path: p });
            }
        }
    }
    None
}

fn search(f: &BoolExpr, path: &mut Vec<usize>, ok: &dyn Fn(&BoolExpr) -> bool) -> Option<Vec<usize>> {
    if ok(f) {
        return Some(path.clone());
    }
    for (i, c) in f.children().into_iter().enumerate() {
        path.push(i);
        if let Some(p) = search(c, path, ok) {
            return Some(p);
        }
        path.pop();
    }
    None
}

/// One program equivalence, left to right or right to left.
pub fn rewrite(f: &BoolExpr, rule: RuleId, reverse: bool, with: Option<&BoolExpr>) -> Result<BoolExpr, KernelError> {
    use BoolExpr as B;
    use HybridProgram as H;
    use RuleId::*;
    let mismatch = || not_applicable(format!("{rule} does not match {}", if reverse { "right to left" } else { "here" }));
    let boxed = |a: &H, p: B| B::AllRuns(Box::new(a.clone()), Box::new(p));
    let dia = |a: &H, p: B| B::SomeRuns(Box::new(a.clone()), Box::new(p));
    let test = |q: &B| H::test(q.clone()).map_err(|e| not_applicable(e.to_string()));
    if !reverse {
        return match (rule, f) {
            (Boxd, B::SomeRuns(a, p)) => Ok(B::not(boxed(a, B::not((**p).clone())))),
            (Assignb, B::AllRuns(a, p)) | (Assignd, B::SomeRuns(a, p)) => match &**a {
                H::Assign(l) => Ok(sub_bool(l, p)?),
                _ => Err(mismatch()),
            },
            (Testb, B::AllRuns(a, p)) => match &**a {
                H::Test(q) => Ok(B::implies(q.clone(), (**p).clone())),
                _ => Err(mismatch()),
            },
            (Testd, B::SomeRuns(a, p)) => match &**a {
                H::Test(q) => Ok(B::and(q.clone(), (**p).clone())),
                _ => Err(mismatch()),
            },
            (Choiceb, B::AllRuns(a, p)) => match &**a {
                H::Choice(x, y) => Ok(B::and(boxed(x, (**p).clone()), boxed(y, (**p).clone()))),
                _ => Err(mismatch()),
            },
            (Choiced, B::SomeRuns(a, p)) => match &**a {
                H::Choice(x, y) => Ok(B::or(dia(x, (**p).clone()), dia(y, (**p).clone()))),
                _ => Err(mismatch()),
            },
            (Composeb, B::AllRuns(a, p)) => match &**a {
                H::Seq(x, y) => Ok(boxed(x, boxed(y, (**p).clone()))),
                _ => Err(mismatch()),
            },
            (Composed, B::SomeRuns(a, p)) => match &**a {
                H::Seq(x, y) => Ok(dia(x, dia(y, (**p).clone()))),
                _ => Err(mismatch()),
            },
            (Iterateb, B::AllRuns(a, p)) => match &**a {
                H::Star(x) => Ok(B::and((**p).clone(), boxed(x, f.clone()))),
                _ => Err(mismatch()),
            },
            (Iterated, B::SomeRuns(a, p)) => match &**a {
                H::Star(x) => Ok(B::or((**p).clone(), dia(x, f.clone()))),
                _ => Err(mismatch()),
            },
            (Anyb, B::AllRuns(a, p)) => match &**a {
                H::AnyAssign(x) => Ok(B::forall(*x, (**p).clone())),
                _ => Err(mismatch()),
            },
            (Anyd, B::SomeRuns(a, p)) => match &**a {
                H::AnyAssign(x) => Ok(B::exists(*x, (**p).clone())),
                _ => Err(mismatch()),
            },
            _ => Err(mismatch()),
        };
    }
    match (rule, f) {
        (Boxd, B::Not(inner)) => match &**inner {
            B::AllRuns(a, np) => match &**np {
                B::Not(p) => Ok(dia(a, (**p).clone())),
                _ => Err(mismatch()),
            },
            _ => Err(mismatch()),
        },
        (Assignb | Assignd, _) => {
            let w = with.ok_or_else(|| not_applicable(format!("right-to-left {rule} needs `with`")))?;
            let (a, p) = match (rule, w) {
                (Assignb, B::AllRuns(a, p)) | (Assignd, B::SomeRuns(a, p)) => (a, p),
                _ => return Err(not_applicable(format!("`with` must be a {rule} left-hand side"))),
            };
            match &**a {
                H::Assign(l) if sub_bool(l, p)? == *f => Ok(w.clone()),
                H::Assign(_) => Err(not_applicable("`with` does not substitute to the addressed formula")),
                _ => Err(not_applicable(format!("`with` must be a {rule} left-hand side"))),
            }
        }
        (Testb, B::Implies(q, p)) => Ok(boxed(&test(q)?, (**p).clone())),
        (Testd, B::And(q, p)) => Ok(dia(&test(q)?, (**p).clone())),
        (Choiceb, B::And(l, r)) => match (&**l, &**r) {
            (B::AllRuns(x, p1), B::AllRuns(y, p2)) if p1 == p2 => {
                Ok(boxed(&H::choice((**x).clone(), (**y).clone()), (**p1).clone()))
            }
            _ => Err(mismatch()),
        },
        (Choiced, B::Or(l, r)) => match (&**l, &**r) {
            (B::SomeRuns(x, p1), B::SomeRuns(y, p2)) if p1 == p2 => {
                Ok(dia(&H::choice((**x).clone(), (**y).clone()), (**p1).clone()))
            }
            _ => Err(mismatch()),
        },
        (Composeb, B::AllRuns(x, inner)) => match &**inner {
            B::AllRuns(y, p) => Ok(boxed(&H::seq((**x).clone(), (**y).clone()), (**p).clone())),
            _ => Err(mismatch()),
        },
        (Composed, B::SomeRuns(x, inner)) => match &**inner {
            B::SomeRuns(y, p) => Ok(dia(&H::seq((**x).clone(), (**y).clone()), (**p).clone())),
            _ => Err(mismatch()),
        },
        (Iterateb, B::And(p, rest)) => match &**rest {
            B::AllRuns(x, inner) => match &**inner {
                B::AllRuns(star, q) if q == p && matches!(&**star, H::Star(y) if y == x) => Ok((**inner).clone()),
                _ => Err(mismatch()),
            },
            _ => Err(mismatch()),
        },
        (Iterated, B::Or(p, rest)) => match &**rest {
            B::SomeRuns(x, inner) => match &**inner {
                B::SomeRuns(star, q) if q == p && matches!(&**star, H::Star(y) if y == x) => Ok((**inner).clone()),
                _ => Err(mismatch()),
            },
            _ => Err(mismatch()),
        },
        (Anyb, B::Forall(x, p)) => Ok(boxed(&H::AnyAssign(*x), (**p).clone())),
        (Anyd, B::Exists(x, p)) => Ok(dia(&H::AnyAssign(*x), (**p).clone())),
        _ => Err(mismatch()),
    }
}

fn program_rule(s: &Sequent, rule: RuleId, args: &RuleArgs) -> Rules {
    use BoolExpr as B;
    use RuleId::*;
    let boxed = |f: &B| matches!(f, B::AllRuns(..));
    let dia = |f: &B| matches!(f, B::SomeRuns(..));
    let modal_parts = |f: &B| match f {
        B::AllRuns(a, p) | B::SomeRuns(a, p) => ((**a).clone(), (**p).clone()),
        _ => unreachable!("shape checked by locate"),
    };
    let rebuild = |f: &B, p: B| match f {
        B::AllRuns(a, _) => B::AllRuns(a.clone(), Box::new(p)),
        B::SomeRuns(a, _) => B::SomeRuns(a.clone(), Box::new(p)),
        _ => unreachable!("shape checked by locate"),
    };
    match rule {
        Mb | Md | K => {
            let want_box = rule != Md;
            let i = locate(s, args, Side::Right, "an implication between matching modalities", |f| {
                modal_implication(f, want_box).is_some()
            })?;
            let (a, p, q) = modal_implication(&s.consequent[i], want_box).expect("shape checked");
            if rule == K {
                let f = B::AllRuns(Box::new(a), Box::new(B::implies(p, q)));
                Ok(vec![replaced(s, Side::Right, i, f)])
            } else {
                Ok(vec![only(vec![], vec![B::implies(p, q)])])
            }
        }
        Loop => {
            let i = locate(s, args, Side::Right, "a box of a repetition", |f| {
                matches!(f, B::AllRuns(a, _) if matches!(**a, HybridProgram::Star(_)))
            })?;
            let j = formula(args)?;
            let (star, p) = modal_parts(&s.consequent[i]);
            let HybridProgram::Star(body) = star else { unreachable!("shape checked") };
            Ok(vec![
                replaced(s, Side::Right, i, j.clone()),
                only(vec![j.clone()], vec![B::AllRuns(body, Box::new(j.clone()))]),
                only(vec![j], vec![p]),
            ])
        }
        MbR | MdR => {
            let i = locate(s, args, Side::Right, "a modality", if rule == MbR { boxed } else { dia })?;
            let q = formula(args)?;
            let f = &s.consequent[i];
            let (_, p) = modal_parts(f);
            Ok(vec![replaced(s, Side::Right, i, rebuild(f, q.clone())), only(vec![q], vec![p])])
        }
        MbL | MdL => {
            let i = locate(s, args, Side::Left, "a modality", if rule == MbL { boxed } else { dia })?;
            let q = formula(args)?;
            let f = &s.antecedent[i];
            let (_, p) = modal_parts(f);
            Ok(vec![replaced(s, Side::Left, i, rebuild(f, q.clone())), only(vec![p], vec![q])])
        }
        Ghost => {
            let i = locate(s, args, Side::Right, "a formula", |_| true)?;
            let e = term(args)?;
            let p = s.consequent[i].clone();
            let y = match args.ghost {
                Some(y) => y,
                None => {
                    let mut used = s.vars_of();
                    used.extend(e.vars_of());
                    least_unused(&used)
                }
            };
            if !fresh_in_bool(y, &p) {
                return Err(side_failed(SideCondition::Freshness, format!("{y} is not fresh in the formula")));
            }
            let f = B::AllRuns(Box::new(HybridProgram::assign(y, e)), Box::new(p));
            Ok(vec![replaced(s, Side::Right, i, f)])
        }
        Gb => {
            let i = locate(s, args, Side::Right, "a box modality", boxed)?;
            Ok(vec![only(vec![], vec![modal_parts(&s.consequent[i]).1])])
        }
        Gd => {
            let i = locate(s, args, Side::Right, "a diamond modality", dia)?;
            let (a, p) = modal_parts(&s.consequent[i]);
            Ok(vec![only(vec![], vec![B::SomeRuns(Box::new(a), Box::new(B::Top))]), only(vec![], vec![p])])
        }
        VRb | VRd => {
            let i = locate(s, args, Side::Right, "a modality", if rule == VRb { boxed } else { dia })?;
            let (a, p) = modal_parts(&s.consequent[i]);
            if !fresh_program(&p, &a) {
                return Err(side_failed(SideCondition::Freshness, "the program changes a variable of the postcondition"));
            }
            let kept = replaced(s, Side::Right, i, p);
            if rule == VRb {
                Ok(vec![kept])
            } else {
                Ok(vec![only(vec![], vec![B::SomeRuns(Box::new(a), Box::new(B::Top))]), kept])
            }
        }
        _ => unreachable!("dispatched by apply_schema"),
    }
}

/// `[α]P → [α]Q` (or with diamonds): returns `(α, P, Q)`.
fn modal_implication(f: &BoolExpr, want_box: bool) -> Option<(HybridProgram, BoolExpr, BoolExpr)> {
    let BoolExpr::Implies(l, r) = f else { return None };
    match (want_box, &**l, &**r) {
        (true, BoolExpr::AllRuns(a, p), BoolExpr::AllRuns(b, q)) | (false, BoolExpr::SomeRuns(a, p), BoolExpr::SomeRuns(b, q))
            if a == b =>
        {
            Some(((**a).clone(), (**p).clone(), (**q).clone()))
        }
        _ => None,
    }
}

fn ode_rule(s: &Sequent, rule: RuleId, args: &RuleArgs, solutions: &[SolutionEntry]) -> Rules {
    use BoolExpr as B;
    use RuleId::*;
    let i = locate(s, args, Side::Right, "a box of a differential equation", |f| {
        matches!(f, B::AllRuns(a, _) if matches!(**a, HybridProgram::Ode(_)))
    })?;
    let (sys, p) = match &s.consequent[i] {
        B::AllRuns(a, p) => match &**a {
            HybridProgram::Ode(sys) => (sys.clone(), (**p).clone()),
            _ => unreachable!("shape checked"),
        },
        _ => unreachable!("shape checked"),
    };
    let q = sys.domain.clone();
    let ode_box = |sys: OdeSystem, p: B| B::AllRuns(Box::new(HybridProgram::Ode(sys)), Box::new(p));
    let shape = |e: crate::ast::AstError| side_failed(SideCondition::Shape, e.to_string());
    match rule {
        Dinit => Ok(vec![pushed(s, Side::Left, q)]),
        DW => Ok(vec![only(vec![q], vec![p])]),
        DI => {
            let derivative = bool_derivative(&p, &sys).map_err(|e| side_failed(SideCondition::Shape, e.to_string()))?;
            Ok(vec![pushed(&replaced(s, Side::Right, i, p), Side::Left, q.clone()), only(vec![q], vec![derivative])])
        }
        DC => {
            let c = formula(args)?;
            let strengthened = sys.with_domain(B::and(q, c.clone())).map_err(shape)?;
            Ok(vec![
                replaced(s, Side::Right, i, ode_box(sys, c)),
                replaced(s, Side::Right, i, ode_box(strengthened, p)),
            ])
        }
        DG => {
            let g = formula(args)?;
            let a = args.ghost_a.clone().ok_or_else(|| not_applicable("dG requires `a`"))?;
            let b = args.ghost_b.clone().ok_or_else(|| not_applicable("dG requires `b`"))?;
            if !a.is_polynomial() || !b.is_polynomial() {
                return Err(side_failed(SideCondition::Continuity, "a and b must be polynomial"));
            }
            let mut used: BTreeSet<Variable> = s.vars_of();
            used.extend(a.vars_of());
            used.extend(b.vars_of());
            let y = args.ghost.unwrap_or_else(|| least_unused(&used));
            if used.contains(&y) {
                return Err(side_failed(SideCondition::Freshness, format!("ghost {y} is not fresh")));
            }
            let mut pairs = sys.equations.clone().into_pairs();
            pairs.push((y, a * RealExpr::Val(y) + b));
            let equations = AssignmentList::new(pairs).map_err(shape)?;
            let extended = OdeSystem::new(equations, q).map_err(shape)?;
            let ghosted = B::exists(y, ode_box(extended, g.clone()));
            Ok(vec![
                only(s.antecedent.clone(), vec![g.clone()]),
                only(vec![g], vec![p]),
                replaced(s, Side::Right, i, ghosted),
            ])
        }
        DS => {
            let entry = match args.solution {
                Some(k) => {
                    let e = solutions.get(k).ok_or(KernelError::NoSolutionRegistered)?;
                    if !e.solves(&sys) {
                        return Err(not_applicable(format!("solution {k} is for a different system")));
                    }
                    e.clone()
                }
                None => solutions
                    .iter()
                    .find(|e| e.solves(&sys))
                    .cloned()
                    .or_else(|| solve_ode(&sys))
                    .ok_or(KernelError::NoSolutionRegistered)?,
            };
            let mut used = s.vars_of();
            let t = least_unused(&used);
            used.insert(t);
            let sv = least_unused(&used);
            let (tv, svv) = (RealExpr::Val(t), RealExpr::Val(sv));
            let zero = RealExpr::int(0);
            let q_along = sub_bool(&entry.at_time(&svv), &q)?;
            let window = B::and(B::rel(RelOp::Le, zero.clone(), svv.clone()), B::rel(RelOp::Le, svv, tv.clone()));
            let stays = B::forall(sv, B::implies(window, q_along));
            let post = B::AllRuns(Box::new(HybridProgram::Assign(entry.at_time(&tv))), Box::new(p));
            let premise = B::forall(t, B::implies(B::rel(RelOp::Ge, tv, zero), B::implies(stays, post)));
            Ok(vec![only(s.antecedent.clone(), vec![premise])])
        }
        _ => unreachable!("dispatched by apply_schema"),
    }
}

/// Rules whose shape precondition matches somewhere in the sequent. No
/// side conditions or arguments are checked.
pub fn applicable_rules(s: &Sequent) -> Vec<RuleId> {
    use BoolExpr as B;
    use RuleId::*;
    let any_r = |p: &dyn Fn(&B) -> bool| s.consequent.iter().any(p);
    let any_l = |p: &dyn Fn(&B) -> bool| s.antecedent.iter().any(p);
    let is_ode_box = |f: &B| matches!(f, B::AllRuns(a, _) if matches!(**a, HybridProgram::Ode(_)));
    let mut out = Vec::new();
    for rule in RuleId::ALL.iter().copied() {
        let ok = match rule {
            NotR => any_r(&|f| matches!(f, B::Not(_))),
            NotL => any_l(&|f| matches!(f, B::Not(_))),
            AndR => any_r(&|f| matches!(f, B::And(..))),
            AndL => any_l(&|f| matches!(f, B::And(..))),
            OrR => any_r(&|f| matches!(f, B::Or(..))),
            OrL => any_l(&|f| matches!(f, B::Or(..))),
            ImpliesR => any_r(&|f| matches!(f, B::Implies(..))),
            ImpliesL => any_l(&|f| matches!(f, B::Implies(..))),
            IffR => any_r(&|f| matches!(f, B::Iff(..))),
            IffL => any_l(&|f| matches!(f, B::Iff(..))),
            Cut => true,
            WeakR | HideR => !s.consequent.is_empty(),
            WeakL | HideL => !s.antecedent.is_empty(),
            MoveR => s.consequent.len() > 1,
            MoveL => s.antecedent.len() > 1,
            FalseL => any_l(&|f| matches!(f, B::Bot)),
            TrueR => any_r(&|f| matches!(f, B::Top)),
            Axiom => s.antecedent.iter().any(|f| s.consequent.contains(f)),
            ExistsR | ForallR => any_r(&|f| matches!((rule, f), (ExistsR, B::Exists(..)) | (ForallR, B::Forall(..)))),
            ForallL | ExistsL => any_l(&|f| matches!((rule, f), (ForallL, B::Forall(..)) | (ExistsL, B::Exists(..)))),
            Boxd | Testb | Testd | Choiceb | Choiced | Composeb | Composed | Iterateb | Iterated | Anyb | Anyd
            | Assignb | Assignd => find_rewrite(s, rule, &RuleArgs::none()).is_some(),
            Mb | K => any_r(&|f| modal_implication(f, true).is_some()),
            Md => any_r(&|f| modal_implication(f, false).is_some()),
            Loop => any_r(&|f| matches!(f, B::AllRuns(a, _) if matches!(**a, HybridProgram::Star(_)))),
            MbR | Gb | VRb => any_r(&|f| matches!(f, B::AllRuns(..))),
            MdR | Gd | VRd => any_r(&|f| matches!(f, B::SomeRuns(..))),
            MbL => any_l(&|f| matches!(f, B::AllRuns(..))),
            MdL => any_l(&|f| matches!(f, B::SomeRuns(..))),
            Ghost => !s.consequent.is_empty(),
            Dinit | DW | DI | DC | DG | DS => any_r(&is_ode_box),
            Arith => !s.to_formula().has_modality() && !s.to_formula().has_quantifier(),
        };
        if ok {
            out.push(rule);
        }
    }
    out
}
