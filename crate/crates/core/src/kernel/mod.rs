//! The trusted core: checked rule application on proof states. Only this
//! module closes goals.

mod apply;
mod proof;
mod rules;
mod solve;

use thiserror::Error;

pub use apply::{applicable_rules, apply_schema, rewrite};
pub use proof::{GoalId, LogEntry, NodeStatus, ProofNode, ProofState, Step};
pub use rules::{ArgKind, ArgSpec, RuleGroup, RuleId, UnknownRule};
pub use solve::{check_solution, solve_ode, Provenance, SolutionEntry};

use crate::arith::PolyNF;
use crate::ast::{BoolExpr, RealExpr, Variable};
use crate::sequent::Position;
use crate::subst::SubstError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SideCondition {
    Freshness,
    Shape,
    Continuity,
}

impl std::fmt::Display for SideCondition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SideCondition::Freshness => "freshness",
            SideCondition::Shape => "shape",
            SideCondition::Continuity => "continuity not established",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("rule not applicable: {0}")]
    RuleNotApplicable(String),
    #[error("side condition failed ({kind}): {detail}")]
    SideConditionFailed { kind: SideCondition, detail: String },
    #[error("no solution registered for the differential equation")]
    NoSolutionRegistered,
    #[error("solution check failed for {var}: residual {residual}")]
    SolutionCheckFailed { var: Variable, residual: PolyNF },
    #[error("substitution is incomplete at {0:?}")]
    SubstitutionIncomplete(BoolExpr),
    #[error("goal {0} does not exist")]
    UnknownGoal(GoalId),
    #[error("goal {0} is not open")]
    GoalNotOpen(GoalId),
}

impl From<SubstError> for KernelError {
    fn from(e: SubstError) -> Self {
        match e {
            SubstError::SubstitutionIncomplete(p) => KernelError::SubstitutionIncomplete(p),
        }
    }
}

pub(crate) fn not_applicable(msg: impl Into<String>) -> KernelError {
    KernelError::RuleNotApplicable(msg.into())
}

pub(crate) fn side_failed(kind: SideCondition, detail: impl Into<String>) -> KernelError {
    KernelError::SideConditionFailed { kind, detail: detail.into() }
}

/// Instantiation data for a rule. Only the fields a rule lists in
/// [`RuleId::args`] may be set.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RuleArgs {
    pub at: Option<Position>,
    /// Cut formula, invariant, differential cut, weakening or monotonicity
    /// formula, ghost postcondition, or the unsubstituted form for a
    /// right-to-left assignment rewrite.
    pub formula: Option<BoolExpr>,
    /// Instantiation witness or ghost value.
    pub term: Option<RealExpr>,
    pub ghost: Option<Variable>,
    pub ghost_a: Option<RealExpr>,
    pub ghost_b: Option<RealExpr>,
    /// Index into the solution registry.
    pub solution: Option<usize>,
    /// Rewrite right to left.
    pub reverse: bool,
}

impl RuleArgs {
    pub fn none() -> Self {
        RuleArgs::default()
    }

    pub fn at(pos: Position) -> Self {
        RuleArgs { at: Some(pos), ..RuleArgs::default() }
    }

    pub fn with_at(mut self, pos: Position) -> Self {
        self.at = Some(pos);
        self
    }

    pub fn with_formula(mut self, f: BoolExpr) -> Self {
        self.formula = Some(f);
        self
    }

    pub fn with_term(mut self, t: RealExpr) -> Self {
        self.term = Some(t);
        self
    }

    pub fn with_ghost(mut self, v: Variable) -> Self {
        self.ghost = Some(v);
        self
    }

    pub fn with_ghost_ode(mut self, a: RealExpr, b: RealExpr) -> Self {
        self.ghost_a = Some(a);
        self.ghost_b = Some(b);
        self
    }

    pub fn with_solution(mut self, i: usize) -> Self {
        self.solution = Some(i);
        self
    }

    pub fn reversed(mut self) -> Self {
        self.reverse = true;
        self
    }

    /// Checks that only accepted arguments are set and required ones are
    /// present.
    pub fn validate(&self, rule: RuleId) -> Result<(), KernelError> {
        let specs = rule.args();
        let spec = |key: &str| specs.iter().find(|s| s.key == key);
        let present = [
            ("at", self.at.is_some(), None),
            ("with", self.formula.is_some(), Some(ArgKind::Formula)),
            ("with", self.term.is_some(), Some(ArgKind::Term)),
            ("ghost", self.ghost.is_some(), None),
            ("a", self.ghost_a.is_some(), None),
            ("b", self.ghost_b.is_some(), None),
            ("sol", self.solution.is_some(), None),
            ("dir", self.reverse, None),
        ];
        for (key, set, kind) in present {
            if !set {
                continue;
            }
            match spec(key) {
                Some(s) if kind.is_none_or(|k| k == s.kind) => {}
                _ => return Err(not_applicable(format!("{rule} does not take argument `{key}`"))),
            }
        }
        for s in specs.iter().filter(|s| s.required) {
            let set = match s.key {
                "at" => self.at.is_some(),
                "with" => self.formula.is_some() || self.term.is_some(),
                "ghost" => self.ghost.is_some(),
                "a" => self.ghost_a.is_some(),
                "b" => self.ghost_b.is_some(),
                "sol" => self.solution.is_some(),
                _ => true,
            };
            if !set {
                return Err(not_applicable(format!("{rule} requires argument `{}`", s.key)));
            }
        }
        Ok(())
    }
}
