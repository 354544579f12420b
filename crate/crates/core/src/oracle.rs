//! Random instances and sampled checks against the executable semantics.
//!
//! The kernel is checked by evaluating parent and premises in the bounded
//! semantics at random environments. Only the discrete fragment is
//! generated for those checks; [`Gen::any_formula`] covers the full syntax
//! for parser round trips.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::ast::{AssignmentList, BoolExpr, HybridProgram, OdeSystem, Rational, RealExpr, RelOp, Variable};
use crate::env::Environment;
use crate::eval::{eval_bool, eval_sequent, Budget};
use crate::kernel::{apply_schema, rewrite, RuleArgs, RuleGroup, RuleId};
use crate::sequent::{Position, Sequent, Side};
use crate::subst::sub_bool;
use crate::syntax::{parse_formula, Printer, Scope};

/// Names of the generated variables, in index order.
pub const VAR_NAMES: [&str; 3] = ["x", "y", "z"];

pub fn scope() -> Scope {
    Scope::with_vars(&VAR_NAMES)
}

/// Seeded generator of expressions, programs, formulas and environments.
pub struct Gen {
    rng: ChaCha8Rng,
    vars: Vec<Variable>,
}

const RELS: [RelOp; 6] = [RelOp::Eq, RelOp::Ne, RelOp::Lt, RelOp::Le, RelOp::Gt, RelOp::Ge];

impl Gen {
    pub fn new(seed: u64) -> Self {
        let sc = scope();
        let vars = VAR_NAMES.iter().map(|n| sc.var(n).expect("declared")).collect();
        Gen { rng: ChaCha8Rng::seed_from_u64(seed), vars }
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }

    fn chance(&mut self, p: f64) -> bool {
        self.rng.gen_bool(p)
    }

    pub fn var(&mut self) -> Variable {
        *self.vars.choose(&mut self.rng).expect("variables")
    }

    /// A polynomial term with small integer constants.
    pub fn term(&mut self, depth: usize) -> RealExpr {
        if depth == 0 || self.chance(0.35) {
            return if self.chance(0.6) { RealExpr::var(self.var()) } else { RealExpr::int(self.rng.gen_range(-3..=3)) };
        }
        match self.rng.gen_range(0..5) {
            0 => self.term(depth - 1) + self.term(depth - 1),
            1 => self.term(depth - 1) - self.term(depth - 1),
            2 => self.term(depth - 1) * self.term(depth - 1),
            3 => -self.term(depth - 1),
            _ => self.term(depth - 1).pow(2),
        }
    }

    pub fn atom(&mut self) -> BoolExpr {
        let op = *RELS.choose(&mut self.rng).expect("relations");
        BoolExpr::rel(op, self.term(2), self.term(1))
    }

    /// A modality-free formula for tests.
    pub fn test_formula(&mut self) -> BoolExpr {
        match self.rng.gen_range(0..4) {
            0 => BoolExpr::and(self.atom(), self.atom()),
            1 => BoolExpr::or(self.atom(), self.atom()),
            _ => self.atom(),
        }
    }

    fn assignment(&mut self) -> AssignmentList {
        let x = self.var();
        let mut pairs = vec![(x, self.term(2))];
        if self.chance(0.3) {
            let y = self.var();
            if y != x {
                pairs.push((y, self.term(1)));
            }
        }
        AssignmentList::new(pairs).expect("distinct targets")
    }

    /// A discrete program. Stars are not nested and appear only when
    /// `stars` is set.
    pub fn program(&mut self, depth: usize, stars: bool) -> HybridProgram {
        if depth == 0 || self.chance(0.3) {
            return match self.rng.gen_range(0..5) {
                0 | 1 => HybridProgram::Assign(self.assignment()),
                2 | 3 => HybridProgram::test(self.test_formula()).expect("modality free"),
                _ => HybridProgram::AnyAssign(self.var()),
            };
        }
        match self.rng.gen_range(0..5) {
            0 | 1 => HybridProgram::seq(self.program(depth - 1, stars), self.program(depth - 1, stars)),
            2 | 3 => HybridProgram::choice(self.program(depth - 1, stars), self.program(depth - 1, stars)),
            _ if stars => HybridProgram::star(self.program(depth - 1, false)),
            _ => HybridProgram::seq(self.program(depth - 1, false), self.program(depth - 1, false)),
        }
    }

    /// A formula of the discrete fragment.
    pub fn formula(&mut self, depth: usize, stars: bool) -> BoolExpr {
        if depth == 0 || self.chance(0.25) {
            return match self.rng.gen_range(0..12) {
                0 => BoolExpr::Top,
                1 => BoolExpr::Bot,
                _ => self.atom(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..11) {
            0 => BoolExpr::and(self.formula(d, stars), self.formula(d, stars)),
            1 => BoolExpr::or(self.formula(d, stars), self.formula(d, stars)),
            2 => BoolExpr::not(self.formula(d, stars)),
            3 => BoolExpr::implies(self.formula(d, stars), self.formula(d, stars)),
            4 => BoolExpr::iff(self.formula(d, stars), self.formula(d, stars)),
            5 | 6 => BoolExpr::box_(self.program(2, stars), self.formula(d, false)),
            7 | 8 => BoolExpr::diamond(self.program(2, stars), self.formula(d, false)),
            9 => BoolExpr::forall(self.var(), self.formula(d, stars)),
            _ => BoolExpr::exists(self.var(), self.formula(d, stars)),
        }
    }

    /// Values from small integers and halves.
    pub fn env(&mut self) -> Environment {
        let updates: Vec<(Variable, f64)> = self
            .vars
            .clone()
            .into_iter()
            .map(|v| (v, self.rng.gen_range(-8i32..=8) as f64 / 2.0))
            .collect();
        Environment::zero().with(&updates)
    }

    /// A constant that prints and parses back unchanged.
    fn printable_const(&mut self) -> Rational {
        let den = *[1, 1, 1, 2, 4, 10].choose(&mut self.rng).expect("denominators");
        Rational::new(self.rng.gen_range(-40i64..=40).into(), den.into())
    }

    pub fn any_real(&mut self, depth: usize) -> RealExpr {
        if depth == 0 || self.chance(0.3) {
            return match self.rng.gen_range(0..3) {
                0 => RealExpr::Cnst(self.printable_const()),
                _ => RealExpr::var(self.var()),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => self.any_real(d) + self.any_real(d),
            1 => self.any_real(d) - self.any_real(d),
            2 => self.any_real(d) * self.any_real(d),
            3 => self.any_real(d) / self.any_real(d),
            4 => -self.any_real(d),
            5 => self.any_real(d).pow(self.rng.gen_range(0..4)),
            6 => self.any_real(d).sqrt(),
            _ => RealExpr::Cnst(self.printable_const()),
        }
    }

    fn any_atom(&mut self) -> BoolExpr {
        let op = *RELS.choose(&mut self.rng).expect("relations");
        BoolExpr::rel(op, self.any_real(2), self.any_real(2))
    }

    fn any_first_order(&mut self, depth: usize, quantifiers: bool) -> BoolExpr {
        if depth == 0 || self.chance(0.4) {
            return self.any_atom();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..4) {
            0 => BoolExpr::and(self.any_first_order(d, quantifiers), self.any_first_order(d, quantifiers)),
            1 => BoolExpr::or(self.any_first_order(d, quantifiers), self.any_first_order(d, quantifiers)),
            2 => BoolExpr::not(self.any_first_order(d, quantifiers)),
            _ if quantifiers => BoolExpr::forall(self.var(), self.any_first_order(d, quantifiers)),
            _ => BoolExpr::not(self.any_first_order(d, quantifiers)),
        }
    }

    pub fn any_program(&mut self, depth: usize) -> HybridProgram {
        if depth == 0 || self.chance(0.3) {
            return match self.rng.gen_range(0..4) {
                0 => {
                    let x = self.var();
                    let mut pairs = vec![(x, self.any_real(2))];
                    for v in self.vars.clone() {
                        if v != x && self.chance(0.3) {
                            pairs.push((v, self.any_real(1)));
                        }
                    }
                    HybridProgram::Assign(AssignmentList::new(pairs).expect("distinct"))
                }
                1 => HybridProgram::test(self.any_first_order(2, true)).expect("modality free"),
                2 => HybridProgram::AnyAssign(self.var()),
                _ => {
                    let x = self.var();
                    let mut pairs = vec![(x, self.any_real(2))];
                    for v in self.vars.clone() {
                        if v != x && self.chance(0.4) {
                            pairs.push((v, self.any_real(1)));
                        }
                    }
                    let eqs = AssignmentList::new(pairs).expect("distinct");
                    let dom = if self.chance(0.5) { BoolExpr::Top } else { self.any_first_order(1, false) };
                    HybridProgram::Ode(OdeSystem::new(eqs, dom).expect("quantifier-free domain"))
                }
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..3) {
            0 => HybridProgram::seq(self.any_program(d), self.any_program(d)),
            1 => HybridProgram::choice(self.any_program(d), self.any_program(d)),
            _ => HybridProgram::star(self.any_program(d)),
        }
    }

    /// Any formula, including ODEs, division and square roots.
    pub fn any_formula(&mut self, depth: usize) -> BoolExpr {
        if depth == 0 || self.chance(0.2) {
            return match self.rng.gen_range(0..10) {
                0 => BoolExpr::Top,
                1 => BoolExpr::Bot,
                _ => self.any_atom(),
            };
        }
        let d = depth - 1;
        match self.rng.gen_range(0..10) {
            0 => BoolExpr::and(self.any_formula(d), self.any_formula(d)),
            1 => BoolExpr::or(self.any_formula(d), self.any_formula(d)),
            2 => BoolExpr::not(self.any_formula(d)),
            3 => BoolExpr::implies(self.any_formula(d), self.any_formula(d)),
            4 => BoolExpr::iff(self.any_formula(d), self.any_formula(d)),
            5 => BoolExpr::forall(self.var(), self.any_formula(d)),
            6 => BoolExpr::exists(self.var(), self.any_formula(d)),
            7 => BoolExpr::diamond(self.any_program(2), self.any_formula(d)),
            _ => BoolExpr::box_(self.any_program(2), self.any_formula(d)),
        }
    }

    fn context(&mut self, n: usize) -> Vec<BoolExpr> {
        let k = self.rng.gen_range(0..=n);
        (0..k).map(|_| self.formula(2, true)).collect()
    }

    /// Wraps `f` in a random connective and returns the path to it.
    fn embed(&mut self, f: BoolExpr) -> (BoolExpr, Vec<usize>) {
        match self.rng.gen_range(0..6) {
            0 => (BoolExpr::and(self.atom(), f), vec![1]),
            1 => (BoolExpr::or(f, self.atom()), vec![0]),
            2 => (BoolExpr::not(f), vec![0]),
            3 => (BoolExpr::implies(self.atom(), f), vec![1]),
            _ => (f, vec![]),
        }
    }

    /// A random sequent with `principal` inserted on `side`, and its index.
    fn sequent_with(&mut self, side: Side, principal: BoolExpr) -> (Sequent, usize) {
        let mut s = Sequent::new(self.context(2), self.context(2));
        let list = s.side_mut(side);
        let i = self.rng.gen_range(0..=list.len());
        list.insert(i, principal);
        (s, i)
    }
}

/// The left-hand side of a rewrite rule, with generated parts.
pub fn rewrite_lhs(g: &mut Gen, rule: RuleId) -> Option<BoolExpr> {
    use RuleId::*;
    let post = |g: &mut Gen, stars: bool| g.formula(2, stars);
    let f = match rule {
        Boxd => BoolExpr::diamond(g.program(2, true), post(g, true)),
        Assignb => BoolExpr::box_(HybridProgram::Assign(g.assignment()), post(g, true)),
        Assignd => BoolExpr::diamond(HybridProgram::Assign(g.assignment()), post(g, true)),
        Testb => BoolExpr::box_(HybridProgram::test(g.test_formula()).ok()?, post(g, true)),
        Testd => BoolExpr::diamond(HybridProgram::test(g.test_formula()).ok()?, post(g, true)),
        Choiceb => BoolExpr::box_(HybridProgram::choice(g.program(2, true), g.program(2, true)), post(g, false)),
        Choiced => BoolExpr::diamond(HybridProgram::choice(g.program(2, true), g.program(2, true)), post(g, false)),
        Composeb => BoolExpr::box_(HybridProgram::seq(g.program(2, true), g.program(2, true)), post(g, false)),
        Composed => BoolExpr::diamond(HybridProgram::seq(g.program(2, true), g.program(2, true)), post(g, false)),
        Iterateb => BoolExpr::box_(HybridProgram::star(g.program(2, false)), post(g, false)),
        Iterated => BoolExpr::diamond(HybridProgram::star(g.program(2, false)), post(g, false)),
        Anyb => BoolExpr::box_(HybridProgram::AnyAssign(g.var()), post(g, true)),
        Anyd => BoolExpr::diamond(HybridProgram::AnyAssign(g.var()), post(g, true)),
        _ => return None,
    };
    Some(f)
}

/// A sequent and arguments on which `rule` is meant to apply. Only the
/// propositional, structural and rewrite rules are generated.
pub fn instance(g: &mut Gen, rule: RuleId, reverse: bool) -> Option<(Sequent, RuleArgs)> {
    use RuleId::*;
    let p = g.formula(2, true);
    let q = g.formula(2, true);
    let at = |side: Side, index: usize| match side {
        Side::Left => Position::left(index),
        Side::Right => Position::right(index),
    };
    let principal = |g: &mut Gen, side: Side, f: BoolExpr| {
        let (s, i) = g.sequent_with(side, f);
        Some((s, RuleArgs::at(at(side, i))))
    };
    match rule {
        NotR => principal(g, Side::Right, BoolExpr::not(p)),
        NotL => principal(g, Side::Left, BoolExpr::not(p)),
        AndR => principal(g, Side::Right, BoolExpr::and(p, q)),
        AndL => principal(g, Side::Left, BoolExpr::and(p, q)),
        OrR => principal(g, Side::Right, BoolExpr::or(p, q)),
        OrL => principal(g, Side::Left, BoolExpr::or(p, q)),
        ImpliesR => principal(g, Side::Right, BoolExpr::implies(p, q)),
        ImpliesL => principal(g, Side::Left, BoolExpr::implies(p, q)),
        IffR => principal(g, Side::Right, BoolExpr::iff(p, q)),
        IffL => principal(g, Side::Left, BoolExpr::iff(p, q)),
        Cut => Some((Sequent::new(g.context(2), g.context(2)), RuleArgs::none().with_formula(p))),
        WeakR => principal(g, Side::Right, q).map(|(s, a)| (s, a.with_formula(p))),
        WeakL => principal(g, Side::Left, q).map(|(s, a)| (s, a.with_formula(p))),
        FalseL => principal(g, Side::Left, BoolExpr::Bot),
        TrueR => principal(g, Side::Right, BoolExpr::Top),
        Axiom => {
            let (mut s, _) = g.sequent_with(Side::Left, p.clone());
            let i = g.rng.gen_range(0..=s.consequent.len());
            s.consequent.insert(i, p);
            Some((s, RuleArgs::none()))
        }
        MoveR | MoveL | HideR | HideL => {
            let side = if matches!(rule, MoveR | HideR) { Side::Right } else { Side::Left };
            let (mut s, _) = g.sequent_with(side, p);
            s.side_mut(side).push(q);
            let n = s.side(side).len();
            let i = if matches!(rule, MoveR | MoveL) { g.rng.gen_range(0..n - 1) } else { g.rng.gen_range(0..n) };
            Some((s, RuleArgs::at(at(side, i))))
        }
        r if r.is_rewrite() => {
            let lhs = rewrite_lhs(g, r)?;
            let (target, with) = if reverse {
                let rhs = rewrite(&lhs, r, false, None).ok()?;
                (rhs, matches!(r, Assignb | Assignd).then_some(lhs))
            } else {
                (lhs, None)
            };
            let (f, path) = g.embed(target);
            let side = if g.chance(0.5) { Side::Left } else { Side::Right };
            let (s, i) = g.sequent_with(side, f);
            let mut pos = at(side, i);
            pos.path = path;
            let mut args = RuleArgs::at(pos);
            args.reverse = reverse;
            args.formula = with;
            Some((s, args))
        }
        _ => None,
    }
}

/// Rules whose premises imply the conclusion at each single state, so that
/// pointwise sampling is a meaningful soundness check.
pub fn locally_checkable() -> Vec<RuleId> {
    RuleId::calculus_rules()
        .filter(|r| matches!(r.group(), RuleGroup::Propositional | RuleGroup::Structural | RuleGroup::Rewrite))
        .collect()
}

fn is_iterate(rule: RuleId) -> bool {
    matches!(rule, RuleId::Iterateb | RuleId::Iterated)
}

/// Budgets for the sequent holding the star and the one holding its
/// one-step unfolding, so that both describe the same runs.
fn iterate_budgets(star: usize) -> (Budget, Budget) {
    (Budget::with_star(star), Budget::with_star(star.saturating_sub(1)))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct SoundnessReport {
    pub rule: String,
    pub reverse: bool,
    /// Instances the kernel accepted.
    pub instances: usize,
    /// Generated instances the kernel refused (failed side conditions or
    /// incomplete substitutions).
    pub refused: usize,
    /// Environment checks where every premise held.
    pub premises_held: usize,
    /// Environment checks the semantics could not decide.
    pub undecided: usize,
    pub violations: usize,
    /// Printed counterexample to soundness, if any.
    pub first_violation: Option<String>,
}

/// Samples `instances` accepted applications of `rule`, each at `envs`
/// environments, looking for a state where all premises hold but the
/// conclusion does not.
pub fn sampled_soundness(rule: RuleId, reverse: bool, instances: usize, envs: usize, star: usize, seed: u64) -> SoundnessReport {
    sampled_soundness_of(rule, reverse, instances, envs, star, seed, &|s, a| apply_schema(s, rule, a, &[]).ok())
}

/// [`sampled_soundness`] for an arbitrary premise function.
pub fn sampled_soundness_of(
    rule: RuleId,
    reverse: bool,
    instances: usize,
    envs: usize,
    star: usize,
    seed: u64,
    premises_of: &dyn Fn(&Sequent, &RuleArgs) -> Option<Vec<Sequent>>,
) -> SoundnessReport {
    let mut g = Gen::new(seed ^ (rule as u64) << 8 ^ u64::from(reverse));
    let mut report = SoundnessReport { rule: rule.name().to_string(), reverse, ..Default::default() };
    let (full, unfolded) = iterate_budgets(star);
    let (parent_budget, premise_budget) = match (is_iterate(rule), reverse) {
        (true, false) => (&full, &unfolded),
        (true, true) => (&unfolded, &full),
        (false, _) => (&full, &full),
    };
    let mut attempts = 0;
    while report.instances < instances && attempts < instances * 50 {
        attempts += 1;
        let Some((s, args)) = instance(&mut g, rule, reverse) else { continue };
        let premises = match premises_of(&s, &args) {
            Some(p) => p,
            None => {
                report.refused += 1;
                continue;
            }
        };
        report.instances += 1;
        for _ in 0..envs {
            let e = g.env();
            let held: Result<Vec<bool>, _> = premises.iter().map(|p| eval_sequent(p, &e, Some(premise_budget))).collect();
            let parent = eval_sequent(&s, &e, Some(parent_budget));
            match (held, parent) {
                (Ok(h), Ok(parent)) if h.iter().all(|b| *b) => {
                    report.premises_held += 1;
                    if !parent {
                        report.violations += 1;
                        if report.first_violation.is_none() {
                            let sc = scope();
                            let pr = Printer::new(&sc);
                            report.first_violation = Some(format!("{} at {:?}", pr.sequent(&s), e));
                        }
                    }
                }
                (Ok(_), Ok(_)) => {}
                _ => report.undecided += 1,
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct EquivalenceReport {
    pub rule: String,
    pub cases: usize,
    /// Left-hand sides whose rewrite the kernel refused.
    pub refused: usize,
    pub checks: usize,
    pub undecided: usize,
    pub mismatches: usize,
    pub first_mismatch: Option<String>,
}

/// Compares both sides of a rewrite on `cases` random left-hand sides at
/// `envs` environments each. The right-hand side comes from the kernel and
/// must also rewrite back to the left-hand side.
pub fn rewrite_equivalence(rule: RuleId, cases: usize, envs: usize, star: usize, seed: u64) -> EquivalenceReport {
    let mut g = Gen::new(seed ^ (rule as u64) << 8);
    let mut report = EquivalenceReport { rule: rule.name().to_string(), ..Default::default() };
    let (full, unfolded) = iterate_budgets(star);
    let rhs_budget = if is_iterate(rule) { &unfolded } else { &full };
    let mut attempts = 0;
    while report.cases < cases && attempts < cases * 50 {
        attempts += 1;
        let Some(lhs) = rewrite_lhs(&mut g, rule) else { continue };
        let Ok(rhs) = rewrite(&lhs, rule, false, None) else {
            report.refused += 1;
            continue;
        };
        report.cases += 1;
        let back = rewrite(&rhs, rule, true, Some(&lhs));
        if back.as_ref() != Ok(&lhs) {
            report.mismatches += 1;
            report.first_mismatch.get_or_insert_with(|| format!("right to left does not restore {lhs:?}"));
        }
        for _ in 0..envs {
            let e = g.env();
            match (eval_bool(&lhs, &e, Some(&full)), eval_bool(&rhs, &e, Some(rhs_budget))) {
                (Ok(a), Ok(b)) => {
                    report.checks += 1;
                    if a != b {
                        report.mismatches += 1;
                        report.first_mismatch.get_or_insert_with(|| {
                            let sc = scope();
                            let pr = Printer::new(&sc);
                            format!("{} vs {} at {:?}", pr.formula(&lhs), pr.formula(&rhs), e)
                        });
                    }
                }
                _ => report.undecided += 1,
            }
        }
    }
    report
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct RoundTripReport {
    pub cases: usize,
    pub failures: usize,
    pub first_failure: Option<String>,
}

/// Prints random formulas of the full syntax and parses them back.
pub fn parser_round_trip(cases: usize, seed: u64) -> RoundTripReport {
    let mut g = Gen::new(seed);
    let sc = scope();
    let mut report = RoundTripReport { cases, ..Default::default() };
    for _ in 0..cases {
        let f = g.any_formula(4);
        let text = Printer::new(&sc).formula(&f);
        if parse_formula(&text, &sc).as_ref() != Ok(&f) {
            report.failures += 1;
            report.first_failure.get_or_insert(text);
        }
    }
    report
}

/// Whether substitution agrees with running the assignment first.
pub fn substitution_agrees(g: &mut Gen, envs: usize, budget: &Budget) -> Option<bool> {
    let l = g.assignment();
    let p = g.formula(2, true);
    let sub = sub_bool(&l, &p).ok()?;
    let lhs = BoolExpr::box_(HybridProgram::Assign(l), p);
    let mut agree = true;
    for _ in 0..envs {
        let e = g.env();
        if let (Ok(a), Ok(b)) = (eval_bool(&lhs, &e, Some(budget)), eval_bool(&sub, &e, Some(budget))) {
            agree &= a == b;
        }
    }
    Some(agree)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_local_rule_has_instances() {
        let mut g = Gen::new(1);
        for rule in locally_checkable() {
            for reverse in [false, true] {
                if reverse && !rule.is_rewrite() {
                    continue;
                }
                let ok = (0..50).any(|_| {
                    instance(&mut g, rule, reverse).is_some_and(|(s, a)| apply_schema(&s, rule, &a, &[]).is_ok())
                });
                assert!(ok, "{rule} reverse={reverse}");
            }
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let a: Vec<BoolExpr> = (0..5).map({
            let mut g = Gen::new(7);
            move |_| g.any_formula(3)
        }).collect();
        let b: Vec<BoolExpr> = (0..5).map({
            let mut g = Gen::new(7);
            move |_| g.any_formula(3)
        }).collect();
        assert_eq!(a, b);
    }

    #[test]
    fn detects_an_unsound_rule() {
        // andR that forgets its second premise.
        let broken = |s: &Sequent, a: &RuleArgs| apply_schema(s, RuleId::AndR, a, &[]).ok().map(|mut p| {
            p.truncate(1);
            p
        });
        let r = sampled_soundness_of(RuleId::AndR, false, 20, 20, 4, 5, &broken);
        assert!(r.violations > 0);
        assert!(r.first_violation.is_some());
    }

    #[test]
    fn small_soundness_sample() {
        let r = sampled_soundness(RuleId::Choiceb, false, 5, 5, 4, 3);
        assert_eq!(r.instances, 5);
        assert_eq!(r.violations, 0);
    }
}
