//! Composite proof commands. Every effect goes through
//! [`ProofState::apply_rule`], so the kernel log records the expansion.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::arith::{entails, sample_counterexample};
use crate::ast::{BoolExpr, RealExpr};
use crate::env::Environment;
use crate::kernel::{GoalId, KernelError, ProofState, RuleArgs, RuleId};
use crate::sequent::{Position, Sequent, Side};

/// Samples drawn by [`dl_grind_lite`] when looking for a counterexample.
pub const GRIND_SAMPLES: usize = 1000;
pub const GRIND_SEED: u64 = 0x706c_6169_6479;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TacticError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("formula at {0} is not a quantifier of the expected kind")]
    WrongShape(Position),
    #[error("substitution is incomplete at {0}")]
    SubstitutionIncomplete(Position),
}

/// Applies a rule, treating "not applicable" as `None`.
fn try_rule(st: &mut ProofState, goal: GoalId, rule: RuleId, args: RuleArgs) -> Option<Vec<GoalId>> {
    st.apply_rule(goal, rule, args).ok()
}

fn sequent(st: &ProofState, goal: GoalId) -> Result<Sequent, TacticError> {
    Ok(st.goal(goal)?.clone())
}

/// Runs `step` on every goal it produces until it reports no change, and
/// returns the resulting open goals in order.
fn fixpoint(
    st: &mut ProofState,
    goal: GoalId,
    step: &mut dyn FnMut(&mut ProofState, GoalId) -> Result<Option<Vec<GoalId>>, TacticError>,
) -> Result<Vec<GoalId>, TacticError> {
    st.goal(goal)?;
    let mut done = Vec::new();
    let mut work = vec![goal];
    while let Some(g) = work.pop() {
        match step(st, g)? {
            Some(children) => work.extend(children.into_iter().rev()),
            None => done.push(g),
        }
    }
    Ok(done)
}

/// One non-branching simplification step.
fn flatten_step(st: &mut ProofState, g: GoalId) -> Option<Vec<GoalId>> {
    const RULES: [RuleId; 8] = [
        RuleId::TrueR,
        RuleId::FalseL,
        RuleId::Axiom,
        RuleId::NotR,
        RuleId::NotL,
        RuleId::OrR,
        RuleId::ImpliesR,
        RuleId::AndL,
    ];
    RULES.into_iter().find_map(|rule| try_rule(st, g, rule, RuleArgs::none()))
}

/// trueR, falseL, axiom, notR, notL, orR, impliesR and andL to a fixpoint.
pub fn dl_flatten(st: &mut ProofState, goal: GoalId) -> Result<Vec<GoalId>, TacticError> {
    fixpoint(st, goal, &mut |st, g| Ok(flatten_step(st, g)))
}

fn first_order(s: &Sequent) -> Vec<BoolExpr> {
    s.antecedent.iter().filter(|f| !f.has_modality() && !f.has_quantifier()).cloned().collect()
}

fn ground_step(st: &mut ProofState, g: GoalId) -> Option<Vec<GoalId>> {
    if let Some(c) = flatten_step(st, g) {
        return Some(c);
    }
    let s = st.goal(g).ok()?.clone();
    let facts = first_order(&s);
    // Implications whose premise the other facts refute are dropped, and
    // ones whose premise they entail are split first.
    for (i, f) in s.antecedent.iter().enumerate() {
        if let BoolExpr::Implies(p, _) = f {
            if !p.has_modality() && !p.has_quantifier() {
                let others: Vec<BoolExpr> = facts.iter().filter(|h| *h != f).cloned().collect();
                if entails(&others, &BoolExpr::not((**p).clone())) {
                    return try_rule(st, g, RuleId::HideL, RuleArgs::at(Position::left(i)));
                }
            }
        }
    }
    for (i, f) in s.antecedent.iter().enumerate() {
        if let BoolExpr::Implies(p, _) = f {
            if s.antecedent.contains(p) {
                return try_rule(st, g, RuleId::ImpliesL, RuleArgs::at(Position::left(i)));
            }
        }
    }
    for rule in [RuleId::AndR, RuleId::OrL, RuleId::ImpliesL] {
        if let Some(c) = try_rule(st, g, rule, RuleArgs::none()) {
            return Some(c);
        }
    }
    None
}

/// [`dl_flatten`] plus andR, orL and impliesL to a fixpoint.
pub fn dl_ground(st: &mut ProofState, goal: GoalId) -> Result<Vec<GoalId>, TacticError> {
    fixpoint(st, goal, &mut |st, g| Ok(ground_step(st, g)))
}

/// forallL on the antecedent or existsR on the consequent.
pub fn dl_inst(st: &mut ProofState, goal: GoalId, at: Position, witness: RealExpr) -> Result<Vec<GoalId>, TacticError> {
    let s = sequent(st, goal)?;
    let rule = match (at.side, s.get(&at)) {
        (Side::Left, Some(BoolExpr::Forall(..))) => RuleId::ForallL,
        (Side::Right, Some(BoolExpr::Exists(..))) => RuleId::ExistsR,
        _ => return Err(TacticError::WrongShape(at)),
    };
    Ok(st.apply_rule(goal, rule, RuleArgs::at(at).with_term(witness))?)
}

/// forallR on the consequent or existsL on the antecedent.
pub fn dl_skolem(st: &mut ProofState, goal: GoalId, at: Position) -> Result<Vec<GoalId>, TacticError> {
    let s = sequent(st, goal)?;
    let rule = match (at.side, s.get(&at)) {
        (Side::Right, Some(BoolExpr::Forall(..))) => RuleId::ForallR,
        (Side::Left, Some(BoolExpr::Exists(..))) => RuleId::ExistsL,
        _ => return Err(TacticError::WrongShape(at)),
    };
    Ok(st.apply_rule(goal, rule, RuleArgs::at(at))?)
}

fn skolem_step(st: &mut ProofState, g: GoalId) -> Option<Vec<GoalId>> {
    let s = st.goal(g).ok()?.clone();
    let r = s.consequent.iter().position(|f| matches!(f, BoolExpr::Forall(..))).map(Position::right);
    let l = s.antecedent.iter().position(|f| matches!(f, BoolExpr::Exists(..))).map(Position::left);
    r.or(l).and_then(|at| dl_skolem(st, g, at).ok())
}

/// Termination measure of [`dl_assert`]: a program-weighted modality count,
/// then the number of diamonds.
pub fn assert_measure(s: &Sequent) -> (BigUint, usize) {
    fn weight(f: &BoolExpr) -> BigUint {
        match f {
            BoolExpr::AllRuns(a, p) | BoolExpr::SomeRuns(a, p) => {
                (weight(p) + BigUint::one()) * BigUint::from(3u32).pow(a.size() as u32)
            }
            _ => f.children().into_iter().map(weight).fold(BigUint::zero(), |x, y| x + y),
        }
    }
    fn diamonds(f: &BoolExpr) -> usize {
        let own = usize::from(matches!(f, BoolExpr::SomeRuns(..)));
        own + f.children().into_iter().map(diamonds).sum::<usize>()
    }
    let all = s.antecedent.iter().chain(&s.consequent);
    let w = all.clone().map(weight).fold(BigUint::zero(), |x, y| x + y);
    (w, all.map(diamonds).sum())
}

const ASSERT_RULES: [RuleId; 10] = [
    RuleId::Assignb,
    RuleId::Assignd,
    RuleId::Testb,
    RuleId::Testd,
    RuleId::Choiceb,
    RuleId::Choiced,
    RuleId::Composeb,
    RuleId::Composed,
    RuleId::Anyb,
    RuleId::Anyd,
];

fn subformula_positions(s: &Sequent) -> Vec<Position> {
    fn walk(f: &BoolExpr, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        out.push(path.clone());
        for (i, c) in f.children().into_iter().enumerate() {
            path.push(i);
            walk(c, path, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for side in [Side::Right, Side::Left] {
        for (index, f) in s.side(side).iter().enumerate() {
            let mut paths = Vec::new();
            walk(f, &mut Vec::new(), &mut paths);
            out.extend(paths.into_iter().map(|path| Position { side, index, path }));
        }
    }
    out
}

/// Applies the program rewrites left to right at the first position where
/// one succeeds; boxd only where no other rewrite applies.
fn assert_step(st: &mut ProofState, g: GoalId, incomplete: &mut Option<Position>) -> Option<Vec<GoalId>> {
    let s = st.goal(g).ok()?.clone();
    for pos in subformula_positions(&s) {
        for rule in ASSERT_RULES.into_iter().chain([RuleId::Boxd]) {
            match st.apply_rule(g, rule, RuleArgs::at(pos.clone())) {
                Ok(c) => {
                    debug_assert!(c.iter().all(|k| assert_measure(st.goal(*k).expect("open")) < assert_measure(&s)));
                    return Some(c);
                }
                Err(KernelError::SubstitutionIncomplete(_)) => {
                    incomplete.get_or_insert(pos.clone());
                }
                Err(_) => {}
            }
        }
    }
    None
}

/// Hybrid program rewriting to a fixpoint. Fails only if it made no
/// progress because a substitution could not be pushed through.
pub fn dl_assert(st: &mut ProofState, goal: GoalId) -> Result<Vec<GoalId>, TacticError> {
    let mut incomplete = None;
    let mut progressed = false;
    let out = fixpoint(st, goal, &mut |st, g| {
        let r = assert_step(st, g, &mut incomplete);
        progressed |= r.is_some();
        Ok(r)
    })?;
    match incomplete {
        Some(pos) if !progressed => Err(TacticError::SubstitutionIncomplete(pos)),
        _ => Ok(out),
    }
}

/// Result of [`dl_grind_lite`]: goals left open, and sampled
/// counterexamples for some of them.
#[derive(Clone, Debug, PartialEq)]
pub struct GrindOutcome {
    pub open: Vec<GoalId>,
    pub counterexamples: Vec<(GoalId, Environment)>,
}

/// Ground and Skolemize to a fixpoint, then try the arithmetic closure on
/// each remaining goal and sample for counterexamples where it fails.
pub fn dl_grind_lite(st: &mut ProofState, goal: GoalId) -> Result<GrindOutcome, TacticError> {
    let simplified = fixpoint(st, goal, &mut |st, g| Ok(ground_step(st, g).or_else(|| skolem_step(st, g))))?;
    let mut outcome = GrindOutcome { open: Vec::new(), counterexamples: Vec::new() };
    for g in simplified {
        if st.apply_rule(g, RuleId::Arith, RuleArgs::none()).is_ok() {
            continue;
        }
        if let Some(e) = sample_counterexample(st.goal(g)?, GRIND_SAMPLES, GRIND_SEED) {
            outcome.counterexamples.push((g, e));
        }
        outcome.open.push(g);
    }
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{parse_real, parse_sequent, print_sequent, Scope};

    fn scope() -> Scope {
        let mut sc = Scope::with_vars(&["x", "y", "c", "b"]);
        let circ = crate::syntax::parse_formula("x^2 + y^2 = c^2", &sc).unwrap();
        sc.declare_form("circ", circ).unwrap();
        sc
    }

    fn shown(st: &ProofState, goals: &[GoalId], sc: &Scope) -> Vec<String> {
        goals.iter().map(|g| print_sequent(&st.nodes()[*g].sequent, sc)).collect()
    }

    fn state(s: &str, sc: &Scope) -> ProofState {
        ProofState::new(parse_sequent(s, sc).unwrap())
    }

    #[test]
    fn flatten_examples() {
        let sc = scope();
        let mut st = state("|- x = c & y = 0 -> [b := 1] (x > 0)", &sc);
        let out = dl_flatten(&mut st, 0).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["x = c, y = 0 |- [b := 1] (x > 0)"]);
        let mut st = state("|- true", &sc);
        assert!(dl_flatten(&mut st, 0).unwrap().is_empty());
        assert!(st.is_proved());
        let mut st = state("x > 0, y > 0 |- c > 0, y > 0", &sc);
        assert!(dl_flatten(&mut st, 0).unwrap().is_empty());
    }

    #[test]
    fn ground_splits_and_is_idempotent() {
        let sc = scope();
        let mut st = state("|- x > 0 & y > 0", &sc);
        let out = dl_ground(&mut st, 0).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["|- x > 0", "|- y > 0"]);
        let before = st.clone();
        assert_eq!(dl_ground(&mut st, out[0]).unwrap(), vec![out[0]]);
        assert_eq!(st, before);
    }

    #[test]
    fn inst_and_skolem() {
        let sc = scope();
        let mut st = state("forall x. x^2 >= 0 |- c > 0", &sc);
        let out = dl_inst(&mut st, 0, Position::left(0), parse_real("c", &sc).unwrap()).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["c^2 >= 0 |- c > 0"]);
        let mut st = state("|- forall x. x >= x", &sc);
        let out = dl_skolem(&mut st, 0, Position::right(0)).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["|- y >= y"]);
        let mut st = state("x > 0 |- c > 0", &sc);
        assert_eq!(dl_inst(&mut st, 0, Position::left(0), RealExpr::int(1)), Err(TacticError::WrongShape(Position::left(0))));
    }

    #[test]
    fn assert_examples() {
        let sc = scope();
        let mut st = state("|- [?(x > 0); b := 2] (b > x)", &sc);
        let out = dl_assert(&mut st, 0).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["|- x > 0 -> 2 > x"]);
        let mut st = state("|- [x := y, y := 10] (x^2 + y^2 = 11)", &sc);
        let out = dl_assert(&mut st, 0).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["|- y^2 + 10^2 = 11"]);
        let mut st = state("x > 0 |- y > 0", &sc);
        assert_eq!(dl_assert(&mut st, 0).unwrap(), vec![0]);
        let mut st = state("|- <x := 1 ++ x := 2> (x > 1)", &sc);
        let out = dl_assert(&mut st, 0).unwrap();
        assert_eq!(shown(&st, &out, &sc), vec!["|- 1 > 1 | 2 > 1"]);
    }

    #[test]
    fn assert_measure_decreases() {
        let sc = scope();
        let mut st = state("|- [{x := 1 ++ ?(y > 0)}; {x' = 1}] (x > 0) & <{b := 1}*> (b > 0)", &sc);
        dl_assert(&mut st, 0).unwrap();
        for n in st.nodes() {
            for c in &n.children {
                assert!(assert_measure(&st.nodes()[*c].sequent) < assert_measure(&n.sequent));
            }
        }
    }

    #[test]
    fn grind_examples() {
        let sc = scope();
        let mut st = state("x >= 0 |- 2*x*(-y) + 2*y*x = 0", &sc);
        assert!(dl_grind_lite(&mut st, 0).unwrap().open.is_empty());
        let mut st = state("x >= 0, x <= -1 |- false", &sc);
        assert!(dl_grind_lite(&mut st, 0).unwrap().open.is_empty());
        let mut st = state("|- x^4 - 2*x^2 + 1 >= 0", &sc);
        let out = dl_grind_lite(&mut st, 0).unwrap();
        assert_eq!(out.open, vec![0]);
        assert!(out.counterexamples.is_empty());
        let mut st = state("|- x > y", &sc);
        let out = dl_grind_lite(&mut st, 0).unwrap();
        assert_eq!(out.counterexamples.len(), 1);
    }

    #[test]
    fn tactics_replay_from_log() {
        let sc = scope();
        let mut st = state("|- (x = c & y = 0) -> [x := x + 1] (x > c - 1 & y = 0)", &sc);
        let g = dl_flatten(&mut st, 0).unwrap()[0];
        let g = dl_assert(&mut st, g).unwrap()[0];
        dl_grind_lite(&mut st, g).unwrap();
        assert!(st.is_proved());
        let again = ProofState::replay_log(st.root().sequent.clone(), st.log()).unwrap();
        assert_eq!(again, st);
    }
}
