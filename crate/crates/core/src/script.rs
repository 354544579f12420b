//! `.dlp` proof scripts: one command per line, `#` starts a comment.
//!
//! ```text
//! rule loop goal=1 at=R:0 with="path & y >= 0"
//! rule assignb goal=4 at=R:0:1 dir=rtl with="[x := 1] (x > 0)"
//! rule dG goal=7 with="y^2 * x = 1" ghost=z a="-1/2" b="0"
//! tac ground goal=3
//! tac inst goal=5 at=L:0 with="c"
//! register time=t ode="{x' = -c}" solution="x := x - c*t"
//! ```
//!
//! Names given to `ghost=` and `time=` that the scope does not know yet
//! are declared as new variables.

use std::fmt;

use thiserror::Error;

use crate::ast::{AssignmentList, HybridProgram, OdeSystem, Variable};
use crate::env::Environment;
use crate::kernel::{ArgKind, GoalId, KernelError, ProofState, RuleArgs, RuleId};
use crate::sequent::{Position, Sequent};
use crate::syntax::{parse_formula, parse_program, parse_real, print_formula, print_program, print_real, Scope};
use crate::tactics::{dl_assert, dl_flatten, dl_grind_lite, dl_ground, dl_inst, dl_skolem, TacticError};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Tactic {
    Flatten,
    Ground,
    Assert,
    Grind,
    Inst { at: Position, witness: crate::ast::RealExpr },
    Skolem { at: Position },
}

impl Tactic {
    pub fn name(&self) -> &'static str {
        match self {
            Tactic::Flatten => "flatten",
            Tactic::Ground => "ground",
            Tactic::Assert => "assert",
            Tactic::Grind => "grind",
            Tactic::Inst { .. } => "inst",
            Tactic::Skolem { .. } => "skolem",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Command {
    Rule { goal: GoalId, rule: RuleId, args: RuleArgs },
    Tactic { goal: GoalId, tactic: Tactic },
    Register { ode: OdeSystem, time: Variable, solution: AssignmentList },
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
#[error("line {line}: {message}")]
pub struct ScriptParseError {
    pub line: usize,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum CommandError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error(transparent)]
    Tactic(#[from] TacticError),
}

impl CommandError {
    /// Whether the failure is a violated side condition rather than a
    /// shape mismatch.
    pub fn is_side_condition(&self) -> bool {
        let k = match self {
            CommandError::Kernel(k) | CommandError::Tactic(TacticError::Kernel(k)) => k,
            CommandError::Tactic(_) => return false,
        };
        matches!(k, KernelError::SideConditionFailed { .. } | KernelError::SolutionCheckFailed { .. })
    }
}

/// What a successful command did.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Outcome {
    /// Open goals produced from the addressed goal, in order.
    pub goals: Vec<GoalId>,
    pub counterexamples: Vec<(GoalId, Environment)>,
    pub registered: Option<usize>,
}

impl Outcome {
    fn goals(goals: Vec<GoalId>) -> Self {
        Outcome { goals, ..Outcome::default() }
    }
}

/// Runs one command. Rule and registration failures leave the state
/// untouched; a tactic keeps the steps it managed before failing.
pub fn run(st: &mut ProofState, cmd: &Command) -> Result<Outcome, CommandError> {
    match cmd {
        Command::Rule { goal, rule, args } => Ok(Outcome::goals(st.apply_rule(*goal, *rule, args.clone())?)),
        Command::Register { ode, time, solution } => {
            let k = st.register_solution(ode, *time, solution.clone())?;
            Ok(Outcome { registered: Some(k), ..Outcome::default() })
        }
        Command::Tactic { goal, tactic } => {
            let goal = *goal;
            let goals = match tactic {
                Tactic::Flatten => dl_flatten(st, goal)?,
                Tactic::Ground => dl_ground(st, goal)?,
                Tactic::Assert => dl_assert(st, goal)?,
                Tactic::Inst { at, witness } => dl_inst(st, goal, at.clone(), witness.clone())?,
                Tactic::Skolem { at } => dl_skolem(st, goal, at.clone())?,
                Tactic::Grind => {
                    let g = dl_grind_lite(st, goal)?;
                    return Ok(Outcome { goals: g.open, counterexamples: g.counterexamples, registered: None });
                }
            };
            Ok(Outcome::goals(goals))
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ProofScript {
    pub commands: Vec<Command>,
}

/// A failed replay: the index of the failing command, its error, and the
/// state reached before it.
#[derive(Debug, Error)]
#[error("command {index}: {error}")]
pub struct ReplayError {
    pub index: usize,
    pub error: CommandError,
    pub state: ProofState,
}

impl ProofScript {
    pub fn parse(text: &str, scope: &mut Scope) -> Result<ProofScript, ScriptParseError> {
        let mut commands = Vec::new();
        for (i, line) in text.lines().enumerate() {
            if let Some(cmd) = parse_command(line, scope).map_err(|message| ScriptParseError { line: i + 1, message })? {
                commands.push(cmd);
            }
        }
        Ok(ProofScript { commands })
    }

    pub fn print(&self, scope: &Scope) -> String {
        self.commands.iter().map(|c| print_command(c, scope) + "\n").collect()
    }

    /// Replays every command from a fresh state on `root`.
    pub fn replay(&self, root: Sequent) -> Result<ProofState, ReplayError> {
        let mut st = ProofState::new(root);
        for (index, cmd) in self.commands.iter().enumerate() {
            let before = st.clone();
            if let Err(error) = run(&mut st, cmd) {
                return Err(ReplayError { index, error, state: before });
            }
        }
        Ok(st)
    }
}

/// Splits `word key=value key="quoted value"` into words and pairs.
fn tokens(line: &str) -> Result<Vec<(Option<String>, String)>, String> {
    let mut out = Vec::new();
    let mut chars = line.chars().peekable();
    loop {
        while chars.peek().is_some_and(|c| c.is_whitespace()) {
            chars.next();
        }
        if chars.peek().is_none() {
            return Ok(out);
        }
        let mut word = String::new();
        let mut key = None;
        while let Some(&c) = chars.peek() {
            if c.is_whitespace() {
                break;
            }
            chars.next();
            if c == '=' && key.is_none() {
                key = Some(std::mem::take(&mut word));
                if chars.peek() == Some(&'"') {
                    chars.next();
                    loop {
                        match chars.next() {
                            None => return Err("unterminated string".into()),
                            Some('"') => break,
                            Some('\\') => word.push(chars.next().ok_or("unterminated string")?),
                            Some(c) => word.push(c),
                        }
                    }
                    if chars.peek().is_some_and(|c| !c.is_whitespace()) {
                        return Err("expected a space after a quoted value".into());
                    }
                    break;
                }
            } else {
                word.push(c);
            }
        }
        out.push((key, word));
    }
}

struct Fields {
    pairs: Vec<(String, String)>,
}

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        let i = self.pairs.iter().position(|(k, _)| k == key)?;
        Some(self.pairs.remove(i).1)
    }

    fn goal(&mut self) -> Result<GoalId, String> {
        let g = self.take("goal").ok_or("missing goal=<n>")?;
        g.parse().map_err(|_| format!("bad goal id `{g}`"))
    }

    fn position(&mut self) -> Result<Option<Position>, String> {
        self.take("at").map(|p| p.parse()).transpose()
    }

    fn finish(self) -> Result<(), String> {
        match self.pairs.first() {
            Some((k, _)) => Err(format!("unexpected argument `{k}`")),
            None => Ok(()),
        }
    }
}

fn variable(name: &str, scope: &mut Scope) -> Result<Variable, String> {
    if let Some(v) = scope.var(name) {
        return Ok(v);
    }
    if let Some(n) = name.strip_prefix('$') {
        return n.parse().map(Variable).map_err(|_| format!("bad variable `{name}`"));
    }
    let ok = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if !ok {
        return Err(format!("bad variable name `{name}`"));
    }
    scope.declare_var(name)
}

/// Parses one line; `None` for blank and comment-only lines.
pub fn parse_command(line: &str, scope: &mut Scope) -> Result<Option<Command>, String> {
    let line = line.split_once('#').map_or(line, |(code, _)| code);
    let toks = tokens(line)?;
    let Some(((None, head), rest)) = toks.split_first().map(|(h, r)| (h.clone(), r)) else {
        return match toks.first() {
            None => Ok(None),
            Some(_) => Err("expected a command word".into()),
        };
    };
    let mut words = Vec::new();
    let mut pairs = Vec::new();
    for (k, v) in rest {
        match k {
            Some(k) => {
                if pairs.iter().any(|(p, _): &(String, String)| p == k) {
                    return Err(format!("duplicate argument `{k}`"));
                }
                pairs.push((k.clone(), v.clone()));
            }
            None if pairs.is_empty() => words.push(v.clone()),
            None => return Err(format!("unexpected word `{v}`")),
        }
    }
    let mut f = Fields { pairs };
    let cmd = match (head.as_str(), words.as_slice()) {
        ("rule", [name]) => {
            let rule: RuleId = name.parse().map_err(|e: crate::kernel::UnknownRule| e.to_string())?;
            let goal = f.goal()?;
            let args = rule_args(rule, &mut f, scope)?;
            Command::Rule { goal, rule, args }
        }
        ("tac", [name]) => {
            let goal = f.goal()?;
            let tactic = match name.as_str() {
                "flatten" => Tactic::Flatten,
                "ground" => Tactic::Ground,
                "assert" => Tactic::Assert,
                "grind" => Tactic::Grind,
                "inst" => {
                    let at = f.position()?.ok_or("inst needs at=<side>:<i>")?;
                    let w = f.take("with").ok_or("inst needs with=\"<term>\"")?;
                    Tactic::Inst { at, witness: parse_real(&w, scope).map_err(|e| e.to_string())? }
                }
                "skolem" => Tactic::Skolem { at: f.position()?.ok_or("skolem needs at=<side>:<i>")? },
                other => return Err(format!("unknown tactic `{other}`")),
            };
            Command::Tactic { goal, tactic }
        }
        ("register", []) => {
            let time = variable(&f.take("time").ok_or("register needs time=<name>")?, scope)?;
            let ode = match parse_program(&f.take("ode").ok_or("register needs ode=\"{...}\"")?, scope) {
                Ok(HybridProgram::Ode(sys)) => sys,
                Ok(_) => return Err("ode= must be a differential equation system".into()),
                Err(e) => return Err(e.to_string()),
            };
            let solution = match parse_program(&f.take("solution").ok_or("register needs solution=\"x := ...\"")?, scope) {
                Ok(HybridProgram::Assign(l)) => l,
                Ok(_) => return Err("solution= must be an assignment list".into()),
                Err(e) => return Err(e.to_string()),
            };
            Command::Register { ode, time, solution }
        }
        ("rule" | "tac", _) => return Err(format!("`{head}` takes exactly one name")),
        _ => return Err(format!("unknown command `{head}`")),
    };
    f.finish()?;
    Ok(Some(cmd))
}

fn rule_args(rule: RuleId, f: &mut Fields, scope: &mut Scope) -> Result<RuleArgs, String> {
    let mut args = RuleArgs::none();
    let mut with_kind = None;
    for spec in rule.args() {
        if spec.key == "with" {
            with_kind = Some(spec.kind);
        }
    }
    args.at = f.position()?;
    // The ghost may be new and named in the other arguments.
    if let Some(g) = f.take("ghost") {
        args.ghost = Some(variable(&g, scope)?);
    }
    if let Some(w) = f.take("with") {
        match with_kind {
            Some(ArgKind::Term) => args.term = Some(parse_real(&w, scope).map_err(|e| e.to_string())?),
            Some(_) => args.formula = Some(parse_formula(&w, scope).map_err(|e| e.to_string())?),
            None => return Err(format!("{rule} takes no with= argument")),
        }
    }
    for (key, slot) in [("a", &mut args.ghost_a), ("b", &mut args.ghost_b)] {
        if let Some(t) = f.take(key) {
            *slot = Some(parse_real(&t, scope).map_err(|e| e.to_string())?);
        }
    }
    if let Some(d) = f.take("dir") {
        args.reverse = match d.as_str() {
            "ltr" => false,
            "rtl" => true,
            _ => return Err(format!("dir must be ltr or rtl, not `{d}`")),
        };
    }
    if let Some(k) = f.take("sol") {
        args.solution = Some(k.parse().map_err(|_| format!("bad solution index `{k}`"))?);
    }
    args.validate(rule).map_err(|e| e.to_string())?;
    Ok(args)
}

fn quoted(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn var_name(v: Variable, scope: &Scope) -> String {
    scope.var_name(v).map_or_else(|| format!("${}", v.0), str::to_string)
}

pub fn print_command(cmd: &Command, scope: &Scope) -> String {
    let mut out = String::new();
    let mut push = |s: String| {
        out.push(' ');
        out.push_str(&s);
    };
    match cmd {
        Command::Rule { goal, rule, args } => {
            push(format!("rule {rule} goal={goal}"));
            if let Some(at) = &args.at {
                push(format!("at={at}"));
            }
            if let Some(p) = &args.formula {
                push(format!("with={}", quoted(&print_formula(p, scope))));
            }
            if let Some(t) = &args.term {
                push(format!("with={}", quoted(&print_real(t, scope))));
            }
            if let Some(g) = args.ghost {
                push(format!("ghost={}", var_name(g, scope)));
            }
            if let Some(a) = &args.ghost_a {
                push(format!("a={}", quoted(&print_real(a, scope))));
            }
            if let Some(b) = &args.ghost_b {
                push(format!("b={}", quoted(&print_real(b, scope))));
            }
            if args.reverse {
                push("dir=rtl".into());
            }
            if let Some(k) = args.solution {
                push(format!("sol={k}"));
            }
        }
        Command::Tactic { goal, tactic } => {
            push(format!("tac {} goal={goal}", tactic.name()));
            match tactic {
                Tactic::Inst { at, witness } => push(format!("at={at} with={}", quoted(&print_real(witness, scope)))),
                Tactic::Skolem { at } => push(format!("at={at}")),
                _ => {}
            }
        }
        Command::Register { ode, time, solution } => {
            let ode = print_program(&HybridProgram::Ode(ode.clone()), scope);
            let sol = print_program(&HybridProgram::Assign(solution.clone()), scope);
            push(format!("register time={} ode={} solution={}", var_name(*time, scope), quoted(&ode), quoted(&sol)));
        }
    }
    out.remove(0);
    out
}

impl fmt::Display for Tactic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_sequent;

    fn scope() -> Scope {
        Scope::with_vars(&["x", "y", "c"])
    }

    #[test]
    fn parse_print_round_trip() {
        let mut sc = scope();
        let text = "\
# a comment
rule impliesR goal=0
rule loop goal=1 at=R:0 with=\"x > 0 & y >= 0\"   # trailing
rule assignb goal=2 at=R:0:1 dir=rtl with=\"[x := 1] (x > 0)\"
rule dG goal=3 at=R:0 with=\"y * z^2 = 1\" ghost=z a=\"-1 / 2\" b=\"0\"
rule dS goal=4 sol=0
rule existsR goal=5 at=R:0 with=\"c + 1\"
tac grind goal=6
tac inst goal=7 at=L:0 with=\"c\"
tac skolem goal=8 at=R:1
register time=t ode=\"{x' = -c}\" solution=\"x := x - c * t\"
";
        let script = ProofScript::parse(text, &mut sc).unwrap();
        assert_eq!(script.commands.len(), 10);
        assert!(sc.var("z").is_some() && sc.var("t").is_some());
        let printed = script.print(&sc);
        let again = ProofScript::parse(&printed, &mut sc.clone()).unwrap();
        assert_eq!(again, script);
        assert_eq!(again.print(&sc), printed);
    }

    #[test]
    fn parse_errors_carry_lines() {
        let mut sc = scope();
        for (text, line) in [
            ("rule nope goal=0", 1),
            ("\nrule axiom", 2),
            ("rule axiom goal=x", 1),
            ("rule axiom goal=0 at=Q:1", 1),
            ("rule cut goal=0", 1),
            ("rule axiom goal=0 with=\"x > 0\"", 1),
            ("rule cut goal=0 with=\"x >\"", 1),
            ("rule cut goal=0 with=\"x > 0", 1),
            ("tac frobnicate goal=0", 1),
            ("rule axiom goal=0 goal=1", 1),
            ("hello", 1),
        ] {
            assert_eq!(ProofScript::parse(text, &mut sc).unwrap_err().line, line, "{text}");
        }
    }

    #[test]
    fn replay_reports_failing_index() {
        let mut sc = scope();
        let root = parse_sequent("|- x > 0 -> x > 0 | y > 0", &sc).unwrap();
        let good = ProofScript::parse("rule impliesR goal=0\nrule orR goal=1\n", &mut sc).unwrap();
        let st = good.replay(root.clone()).unwrap();
        assert_eq!(st.open_goals(), &[2]);
        let bad = ProofScript::parse("rule impliesR goal=0\nrule hideL goal=1 at=L:3\nrule orR goal=1\n", &mut sc).unwrap();
        let err = bad.replay(root.clone()).unwrap_err();
        assert_eq!(err.index, 1);
        assert_eq!(err.state.open_goals(), &[1]);
        assert_eq!(ProofScript::default().replay(root).unwrap().open_goals(), &[0]);
    }
}
