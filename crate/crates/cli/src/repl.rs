//! Line-oriented interactive prover over any reader and writer.

use std::io::{self, BufRead, Write};

use crate::session::Session;

const HELP: &str = "commands: <.dlp line> | goals | undo | save <path> | quit";

fn show_current(s: &Session, out: &mut impl Write) -> io::Result<()> {
    match s.state().open_goals().first() {
        Some(id) => writeln!(out, "[{id}] {}", s.print_goal(*id)),
        None => writeln!(out, "all goals closed"),
    }
}

/// Runs the loop until `quit` or end of input.
pub fn repl(mut session: Session, input: impl BufRead, out: &mut impl Write) -> io::Result<()> {
    writeln!(out, "goal {}  ({HELP})", session.goal_name())?;
    show_current(&session, out)?;
    write!(out, "> ")?;
    out.flush()?;
    for line in input.lines() {
        let line = line?;
        let trimmed = line.trim();
        match trimmed {
            "quit" | "exit" => break,
            "help" => writeln!(out, "{HELP}")?,
            "goals" => {
                for id in session.state().open_goals() {
                    writeln!(out, "[{id}] {}", session.print_goal(*id))?;
                }
            }
            "undo" => match session.undo() {
                Ok(()) => show_current(&session, out)?,
                Err(e) => writeln!(out, "error: {e}")?,
            },
            _ if trimmed.starts_with("save ") => {
                let path = trimmed["save ".len()..].trim();
                match std::fs::write(path, session.script()) {
                    Ok(()) => writeln!(out, "saved {path}")?,
                    Err(e) => writeln!(out, "error: {e}")?,
                }
            }
            _ => match session.apply(&line) {
                Ok(o) => {
                    for (g, env) in &o.counterexamples {
                        let vals: Vec<String> = env
                            .overrides()
                            .map(|(v, x)| format!("{}={x}", session.scope().var_name(v).unwrap_or("?")))
                            .collect();
                        writeln!(out, "counterexample for [{g}]: {}", vals.join(", "))?;
                    }
                    show_current(&session, out)?;
                }
                Err(e) => writeln!(out, "error: {e}")?,
            },
        }
        write!(out, "> ")?;
        out.flush()?;
    }
    writeln!(out)?;
    Ok(())
}
