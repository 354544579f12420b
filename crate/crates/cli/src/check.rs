//! Batch checking of a `.dl` file against a `.dlp` script.
//!
//! A script line `proof <name>` starts the commands for goal `<name>`.
//! Commands before any such line are replayed against every goal that has
//! no section of its own.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use plaidy_core::kernel::{GoalId, ProofState};
use plaidy_core::script::{parse_command, Command, ProofScript, ReplayError};
use plaidy_core::syntax::{parse_spec, Printer, Scope, SpecFile};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CheckError {
    #[error("{path}:{line}:{column}: {message}")]
    Spec { path: String, line: usize, column: usize, message: String },
    #[error("{path}:{line}: {message}")]
    Script { path: String, line: usize, message: String },
}

/// Parsed script: shared commands and per-goal sections.
#[derive(Clone, Debug, Default)]
pub struct Sections {
    pub shared: ProofScript,
    pub named: BTreeMap<String, ProofScript>,
}

impl Sections {
    pub fn for_goal(&self, name: &str) -> &ProofScript {
        self.named.get(name).unwrap_or(&self.shared)
    }
}

pub fn parse_sections(text: &str, spec: &SpecFile, scope: &mut Scope) -> Result<Sections, (usize, String)> {
    let mut out = Sections::default();
    let mut current: Option<String> = None;
    for (i, line) in text.lines().enumerate() {
        let trimmed = line.trim();
        if let Some(name) = trimmed.strip_prefix("proof ") {
            let name = name.split('#').next().unwrap_or("").trim().to_string();
            if spec.goal(&name).is_none() {
                return Err((i + 1, format!("no goal named `{name}`")));
            }
            if out.named.contains_key(&name) {
                return Err((i + 1, format!("second proof of `{name}`")));
            }
            out.named.insert(name.clone(), ProofScript::default());
            current = Some(name);
            continue;
        }
        let Some(cmd) = parse_command(line, scope).map_err(|m| (i + 1, m))? else {
            continue;
        };
        let target = match &current {
            Some(n) => out.named.get_mut(n).expect("inserted"),
            None => &mut out.shared,
        };
        target.commands.push(cmd);
    }
    Ok(out)
}

#[derive(Debug)]
pub struct GoalReport {
    pub name: String,
    pub state: ProofState,
    /// A command that failed: its index in the goal's script and message.
    pub failure: Option<(usize, String)>,
}

impl GoalReport {
    pub fn closed(&self) -> bool {
        self.failure.is_none() && self.state.is_proved()
    }
}

#[derive(Debug)]
pub struct Report {
    pub scope: Scope,
    pub goals: Vec<GoalReport>,
}

impl Report {
    pub fn all_closed(&self) -> bool {
        self.goals.iter().all(GoalReport::closed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for g in &self.goals {
            let status = if g.closed() { "closed" } else { "open" };
            let _ = writeln!(out, "goal {}: {status}", g.name);
            if let Some((i, m)) = &g.failure {
                let _ = writeln!(out, "  command {i} failed: {m}");
            }
            for id in g.state.open_goals() {
                let _ = writeln!(out, "  [{id}] {}", open_sequent(&g.state, *id, &self.scope));
            }
        }
        out
    }
}

fn open_sequent(st: &ProofState, id: GoalId, scope: &Scope) -> String {
    Printer::with_abbreviations(scope).sequent(&st.nodes()[id].sequent)
}

pub fn check(spec_path: &str, spec_src: &str, script_path: &str, script_src: &str) -> Result<Report, CheckError> {
    let spec = parse_spec(spec_src).map_err(|e| CheckError::Spec {
        path: spec_path.to_string(),
        line: e.span.line,
        column: e.span.column,
        message: e.message.clone(),
    })?;
    let mut scope = spec.scope.clone();
    let sections = parse_sections(script_src, &spec, &mut scope)
        .map_err(|(line, message)| CheckError::Script { path: script_path.to_string(), line, message })?;
    let goals = spec
        .goals
        .iter()
        .map(|g| {
            let (state, failure) = match sections.for_goal(&g.name).replay(g.sequent.clone()) {
                Ok(st) => (st, None),
                Err(ReplayError { index, error, state }) => (state, Some((index, error.to_string()))),
            };
            GoalReport { name: g.name.clone(), state, failure }
        })
        .collect();
    Ok(Report { scope, goals })
}

/// Prints a script with its section headers.
pub fn print_sections(sections: &Sections, scope: &Scope) -> String {
    let mut out = sections.shared.print(scope);
    for (name, script) in &sections.named {
        out.push_str(&format!("proof {name}\n"));
        out.push_str(&script.print(scope));
    }
    out
}

/// Convenience for callers holding commands rather than a script.
pub fn script_of(commands: &[Command]) -> ProofScript {
    ProofScript { commands: commands.to_vec() }
}
