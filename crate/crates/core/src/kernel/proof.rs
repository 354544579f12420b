use super::apply::apply_schema;
use super::rules::RuleId;
use super::solve::{check_solution, Provenance, SolutionEntry};
use super::{KernelError, RuleArgs};
use crate::ast::{AssignmentList, OdeSystem, Variable};
use crate::sequent::Sequent;

/// Node index in the proof tree. The root is 0 and children are numbered
/// in creation order.
pub type GoalId = usize;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Step {
    pub rule: RuleId,
    pub args: RuleArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum NodeStatus {
    Open,
    /// A rule was applied and some descendant is still open.
    Pending,
    Closed,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofNode {
    pub sequent: Sequent,
    pub parent: Option<GoalId>,
    pub step: Option<Step>,
    pub children: Vec<GoalId>,
    pub status: NodeStatus,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum LogEntry {
    Rule { goal: GoalId, rule: RuleId, args: RuleArgs },
    Register(SolutionEntry),
}

/// A proof tree with its ordered open goals, its command log and its
/// solution registry. Mutated only through [`ProofState::apply_rule`] and
/// [`ProofState::register_solution`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ProofState {
    nodes: Vec<ProofNode>,
    open: Vec<GoalId>,
    log: Vec<LogEntry>,
    solutions: Vec<SolutionEntry>,
}

impl ProofState {
    pub fn new(root: Sequent) -> Self {
        let node = ProofNode { sequent: root, parent: None, step: None, children: Vec::new(), status: NodeStatus::Open };
        ProofState { nodes: vec![node], open: vec![0], log: Vec::new(), solutions: Vec::new() }
    }

    pub fn root(&self) -> &ProofNode {
        &self.nodes[0]
    }

    pub fn node(&self, id: GoalId) -> Option<&ProofNode> {
        self.nodes.get(id)
    }

    pub fn nodes(&self) -> &[ProofNode] {
        &self.nodes
    }

    pub fn open_goals(&self) -> &[GoalId] {
        &self.open
    }

    pub fn is_proved(&self) -> bool {
        self.open.is_empty()
    }

    pub fn log(&self) -> &[LogEntry] {
        &self.log
    }

    pub fn solutions(&self) -> &[SolutionEntry] {
        &self.solutions
    }

    /// The sequent of an open goal.
    pub fn goal(&self, id: GoalId) -> Result<&Sequent, KernelError> {
        let node = self.nodes.get(id).ok_or(KernelError::UnknownGoal(id))?;
        if node.status != NodeStatus::Open {
            return Err(KernelError::GoalNotOpen(id));
        }
        Ok(&node.sequent)
    }

    /// Applies a rule to an open goal. On success the goal is replaced in
    /// the open list by its premises, in schema order. On error nothing
    /// changes.
    pub fn apply_rule(&mut self, goal: GoalId, rule: RuleId, args: RuleArgs) -> Result<Vec<GoalId>, KernelError> {
        let premises = apply_schema(self.goal(goal)?, rule, &args, &self.solutions)?;
        let first = self.nodes.len();
        let ids: Vec<GoalId> = (first..first + premises.len()).collect();
        for sequent in premises {
            self.nodes.push(ProofNode {
                sequent,
                parent: Some(goal),
                step: None,
                children: Vec::new(),
                status: NodeStatus::Open,
            });
        }
        let node = &mut self.nodes[goal];
        node.step = Some(Step { rule, args: args.clone() });
        node.children = ids.clone();
        node.status = NodeStatus::Pending;
        let at = self.open.iter().position(|g| *g == goal).expect("open goal is listed");
        self.open.splice(at..=at, ids.iter().copied());
        if ids.is_empty() {
            self.close_upwards(goal);
        }
        self.log.push(LogEntry::Rule { goal, rule, args });
        Ok(ids)
    }

    fn close_upwards(&mut self, mut id: GoalId) {
        loop {
            let node = &self.nodes[id];
            if !node.children.iter().all(|c| self.nodes[*c].status == NodeStatus::Closed) {
                return;
            }
            self.nodes[id].status = NodeStatus::Closed;
            match self.nodes[id].parent {
                Some(p) => id = p,
                None => return,
            }
        }
    }

    /// Adds a solution after checking it symbolically, and returns its
    /// registry index.
    pub fn register_solution(
        &mut self,
        ode: &OdeSystem,
        time: Variable,
        solution: AssignmentList,
    ) -> Result<usize, KernelError> {
        check_solution(ode, time, &solution)?;
        let entry = SolutionEntry { ode: ode.clone(), time, solution, provenance: Provenance::User };
        self.solutions.push(entry.clone());
        self.log.push(LogEntry::Register(entry));
        Ok(self.solutions.len() - 1)
    }

    /// Replays a command log from a root sequent. On failure returns the
    /// index of the failing entry, its error and the state before it.
    pub fn replay_log(root: Sequent, log: &[LogEntry]) -> Result<ProofState, (usize, KernelError, ProofState)> {
        let mut state = ProofState::new(root);
        for (i, entry) in log.iter().enumerate() {
            let result = match entry {
                LogEntry::Rule { goal, rule, args } => state.apply_rule(*goal, *rule, args.clone()).map(|_| ()),
                LogEntry::Register(e) => state.register_solution(&e.ode, e.time, e.solution.clone()).map(|_| ()),
            };
            if let Err(e) = result {
                return Err((i, e, state));
            }
        }
        Ok(state)
    }
}
