//! An interactive proof of one goal: the command history is the source of
//! truth and undo replays it.

use plaidy_core::kernel::{GoalId, ProofState};
use plaidy_core::script::{parse_command, run, Command, CommandError, Outcome, ProofScript};
use plaidy_core::syntax::{parse_spec, Printer, Scope, SpecFile};
use plaidy_core::Sequent;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("{0}")]
    Parse(String),
    #[error(transparent)]
    Command(#[from] CommandError),
    #[error("nothing to undo")]
    NothingToUndo,
}

#[derive(Clone, Debug)]
pub struct Session {
    goal_name: String,
    root: Sequent,
    spec_scope: Scope,
    scope: Scope,
    commands: Vec<Command>,
    /// Scope before each command, for undo.
    scopes: Vec<Scope>,
    state: ProofState,
}

impl Session {
    /// Opens the named goal of a `.dl` text, or its first goal.
    pub fn open(spec_src: &str, goal: Option<&str>) -> Result<Session, SessionError> {
        let spec: SpecFile = parse_spec(spec_src).map_err(|e| SessionError::Parse(e.to_string()))?;
        let decl = match goal {
            Some(name) => spec.goal(name).ok_or_else(|| SessionError::Parse(format!("no goal named `{name}`")))?,
            None => spec.goals.first().ok_or_else(|| SessionError::Parse("the specification declares no goal".into()))?,
        };
        Ok(Session {
            goal_name: decl.name.clone(),
            root: decl.sequent.clone(),
            spec_scope: spec.scope.clone(),
            scope: spec.scope.clone(),
            commands: Vec::new(),
            scopes: Vec::new(),
            state: ProofState::new(decl.sequent.clone()),
        })
    }

    pub fn goal_name(&self) -> &str {
        &self.goal_name
    }

    pub fn state(&self) -> &ProofState {
        &self.state
    }

    pub fn scope(&self) -> &Scope {
        &self.scope
    }

    pub fn commands(&self) -> &[Command] {
        &self.commands
    }

    /// Parses and runs one `.dlp` line. Blank lines are accepted and do
    /// nothing. On error the session is unchanged.
    pub fn apply(&mut self, line: &str) -> Result<Outcome, SessionError> {
        let mut scope = self.scope.clone();
        let Some(cmd) = parse_command(line, &mut scope).map_err(SessionError::Parse)? else {
            return Ok(Outcome::default());
        };
        let mut state = self.state.clone();
        let outcome = run(&mut state, &cmd)?;
        self.scopes.push(std::mem::replace(&mut self.scope, scope));
        self.commands.push(cmd);
        self.state = state;
        Ok(outcome)
    }

    /// Drops the last command and replays the rest from the root.
    pub fn undo(&mut self) -> Result<(), SessionError> {
        self.commands.pop().ok_or(SessionError::NothingToUndo)?;
        self.scope = self.scopes.pop().expect("one scope per command");
        let script = ProofScript { commands: self.commands.clone() };
        self.state = script.replay(self.root.clone()).map_err(|e| e.error)?;
        Ok(())
    }

    /// The accepted commands as a `.dlp` text for this goal.
    pub fn script(&self) -> String {
        let body = ProofScript { commands: self.commands.clone() }.print(&self.scope);
        format!("proof {}\n{body}", self.goal_name)
    }

    pub fn print_goal(&self, id: GoalId) -> String {
        Printer::with_abbreviations(&self.scope).sequent(&self.state.nodes()[id].sequent)
    }

    /// The declarations the session was opened with.
    pub fn spec_scope(&self) -> &Scope {
        &self.spec_scope
    }
}
