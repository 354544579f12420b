//! JSON session protocol: one request object in, one response object out.
//!
//! Requests carry `op` and, except for `open` and `rules`, a `session` id:
//!
//! | op      | extra fields             | response                                  |
//! |---------|--------------------------|-------------------------------------------|
//! | `open`  | `spec`, optional `goal`  | `session`, `goal`, `goals`, `closed`, `tree` |
//! | `apply` | `command` (a `.dlp` line)| state fields, `produced`, `counterexamples` |
//! | `state` |                          | state fields                              |
//! | `undo`  |                          | state fields                              |
//! | `script`|                          | `script`                                  |
//! | `close` |                          | `session`, `closed_session`               |
//! | `rules` |                          | `rules`: the argument table of every rule |
//!
//! Failures answer `{"error": {"code", "message"}}` with `code` one of
//! `parse`, `rule`, `side-condition`, `internal`; a failed `apply` also
//! carries the unchanged state fields.

use std::collections::BTreeMap;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, PoisonError};

use plaidy_core::kernel::{applicable_rules, NodeStatus, RuleId};
use plaidy_core::script::Outcome;
use plaidy_core::syntax::Printer;
use serde_json::{json, Value};

use crate::session::{Session, SessionError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorCode {
    Parse,
    Rule,
    SideCondition,
    Internal,
}

impl ErrorCode {
    pub fn as_str(self) -> &'static str {
        match self {
            ErrorCode::Parse => "parse",
            ErrorCode::Rule => "rule",
            ErrorCode::SideCondition => "side-condition",
            ErrorCode::Internal => "internal",
        }
    }
}

fn error(code: ErrorCode, message: impl Into<String>) -> Value {
    json!({ "error": { "code": code.as_str(), "message": message.into() } })
}

fn session_error(e: &SessionError) -> Value {
    let code = match e {
        SessionError::Parse(_) => ErrorCode::Parse,
        SessionError::Command(c) if c.is_side_condition() => ErrorCode::SideCondition,
        SessionError::Command(_) | SessionError::NothingToUndo => ErrorCode::Rule,
    };
    error(code, e.to_string())
}

/// The argument table of every rule, as served to clients.
pub fn rule_table() -> Value {
    let rules: Vec<Value> = RuleId::ALL
        .iter()
        .map(|r| json!({ "name": r.name(), "group": r.group(), "args": r.args() }))
        .collect();
    Value::Array(rules)
}

/// Goals, the proof tree and the closed flag of a session.
pub fn state_fields(s: &Session) -> serde_json::Map<String, Value> {
    let st = s.state();
    let printer = Printer::with_abbreviations(s.scope());
    let goals: Vec<Value> = st
        .open_goals()
        .iter()
        .map(|id| {
            let seq = &st.nodes()[*id].sequent;
            let hints: Vec<&str> = applicable_rules(seq).into_iter().map(RuleId::name).collect();
            json!({
                "id": id,
                "antecedent": seq.antecedent.iter().map(|f| printer.formula(f)).collect::<Vec<_>>(),
                "consequent": seq.consequent.iter().map(|f| printer.formula(f)).collect::<Vec<_>>(),
                "rules": hints,
            })
        })
        .collect();
    let tree: Vec<Value> = st
        .nodes()
        .iter()
        .enumerate()
        .map(|(id, n)| {
            let status = match n.status {
                NodeStatus::Open => "open",
                NodeStatus::Pending => "pending",
                NodeStatus::Closed => "closed",
            };
            json!({
                "id": id,
                "parent": n.parent,
                "rule": n.step.as_ref().map(|step| step.rule.name()),
                "children": n.children,
                "status": status,
                "sequent": printer.sequent(&n.sequent),
            })
        })
        .collect();
    let mut m = serde_json::Map::new();
    m.insert("goal".into(), json!(s.goal_name()));
    m.insert("goals".into(), Value::Array(goals));
    m.insert("closed".into(), json!(st.is_proved()));
    m.insert("tree".into(), Value::Array(tree));
    m
}

fn outcome_fields(s: &Session, o: &Outcome, m: &mut serde_json::Map<String, Value>) {
    m.insert("produced".into(), json!(o.goals));
    let cex: Vec<Value> = o
        .counterexamples
        .iter()
        .map(|(g, env)| {
            let values: BTreeMap<String, f64> = env
                .overrides()
                .map(|(v, x)| (s.scope().var_name(v).map_or_else(|| format!("${}", v.0), str::to_string), x))
                .collect();
            json!({ "goal": g, "values": values })
        })
        .collect();
    m.insert("counterexamples".into(), Value::Array(cex));
}

/// All sessions of one server run. Each session has its own lock, so
/// sessions proceed independently and one session's commands run in
/// arrival order.
#[derive(Default)]
pub struct Server {
    sessions: Mutex<BTreeMap<String, Arc<Mutex<Session>>>>,
    next: AtomicU64,
}

impl Server {
    pub fn new() -> Self {
        Server::default()
    }

    /// Handles one request text and returns the response text. Never
    /// panics: internal failures become `internal` errors.
    pub fn handle(&self, request: &str) -> String {
        let response = catch_unwind(AssertUnwindSafe(|| self.dispatch(request)))
            .unwrap_or_else(|_| error(ErrorCode::Internal, "request handler panicked"));
        response.to_string()
    }

    fn session(&self, req: &Value) -> Result<(String, Arc<Mutex<Session>>), Value> {
        let id = req
            .get("session")
            .and_then(Value::as_str)
            .ok_or_else(|| error(ErrorCode::Parse, "missing string field `session`"))?;
        let map = self.sessions.lock().unwrap_or_else(PoisonError::into_inner);
        let s = map.get(id).ok_or_else(|| error(ErrorCode::Parse, format!("unknown session `{id}`")))?;
        Ok((id.to_string(), Arc::clone(s)))
    }

    fn dispatch(&self, request: &str) -> Value {
        let req: Value = match serde_json::from_str(request) {
            Ok(v) => v,
            Err(e) => return error(ErrorCode::Parse, format!("invalid JSON: {e}")),
        };
        let Some(op) = req.get("op").and_then(Value::as_str) else {
            return error(ErrorCode::Parse, "missing string field `op`");
        };
        match op {
            "open" => self.open(&req),
            "rules" => json!({ "rules": rule_table() }),
            "apply" | "state" | "undo" | "script" | "close" => match self.session(&req) {
                Ok((id, s)) => self.on_session(op, &id, &s, &req),
                Err(e) => e,
            },
            other => error(ErrorCode::Parse, format!("unknown op `{other}`")),
        }
    }

    fn open(&self, req: &Value) -> Value {
        let Some(spec) = req.get("spec").and_then(Value::as_str) else {
            return error(ErrorCode::Parse, "missing string field `spec`");
        };
        let goal = match req.get("goal") {
            None | Some(Value::Null) => None,
            Some(Value::String(g)) => Some(g.as_str()),
            Some(_) => return error(ErrorCode::Parse, "`goal` must be a string"),
        };
        match Session::open(spec, goal) {
            Ok(s) => {
                let id = format!("s{}", self.next.fetch_add(1, Ordering::Relaxed) + 1);
                let mut m = state_fields(&s);
                m.insert("session".into(), json!(id));
                self.sessions.lock().unwrap_or_else(PoisonError::into_inner).insert(id, Arc::new(Mutex::new(s)));
                Value::Object(m)
            }
            Err(e) => session_error(&e),
        }
    }

    fn on_session(&self, op: &str, id: &str, s: &Mutex<Session>, req: &Value) -> Value {
        let mut s = s.lock().unwrap_or_else(PoisonError::into_inner);
        let with_state = |s: &Session, mut extra: serde_json::Map<String, Value>| {
            extra.extend(state_fields(s));
            extra.insert("session".into(), json!(id));
            Value::Object(extra)
        };
        match op {
            "state" => with_state(&s, serde_json::Map::new()),
            "apply" => {
                let Some(line) = req.get("command").and_then(Value::as_str) else {
                    return error(ErrorCode::Parse, "missing string field `command`");
                };
                match s.apply(line) {
                    Ok(o) => {
                        let mut m = serde_json::Map::new();
                        outcome_fields(&s, &o, &mut m);
                        with_state(&s, m)
                    }
                    Err(e) => {
                        let Value::Object(m) = session_error(&e) else { unreachable!() };
                        with_state(&s, m)
                    }
                }
            }
            "undo" => match s.undo() {
                Ok(()) => with_state(&s, serde_json::Map::new()),
                Err(e) => {
                    let Value::Object(m) = session_error(&e) else { unreachable!() };
                    with_state(&s, m)
                }
            },
            "script" => json!({ "session": id, "script": s.script() }),
            "close" => {
                drop(s);
                self.sessions.lock().unwrap_or_else(PoisonError::into_inner).remove(id);
                json!({ "session": id, "closed_session": true })
            }
            _ => unreachable!("ops filtered in dispatch"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(server: &Server, v: Value) -> Value {
        serde_json::from_str(&server.handle(&v.to_string())).unwrap()
    }

    const SPEC: &str = "var x; goal g : |- x > 0 -> x > 0;";

    #[test]
    fn open_apply_undo() {
        let server = Server::new();
        let r = call(&server, json!({"op": "open", "spec": SPEC}));
        let id = r["session"].as_str().unwrap().to_string();
        assert_eq!(r["goals"][0]["consequent"], json!(["x > 0 -> x > 0"]));
        assert!(r["goals"][0]["rules"].as_array().unwrap().contains(&json!("impliesR")));
        let state = server.handle(&json!({"op": "state", "session": id}).to_string());
        let r = call(&server, json!({"op": "apply", "session": id, "command": "rule impliesR goal=0"}));
        assert_eq!(r["produced"], json!([1]));
        assert_eq!(r["closed"], json!(false));
        let r = call(&server, json!({"op": "apply", "session": id, "command": "rule axiom goal=1"}));
        assert_eq!(r["closed"], json!(true));
        call(&server, json!({"op": "undo", "session": id}));
        call(&server, json!({"op": "undo", "session": id}));
        assert_eq!(server.handle(&json!({"op": "state", "session": id}).to_string()), state);
    }

    #[test]
    fn error_codes() {
        let server = Server::new();
        assert_eq!(call(&server, json!({"op": "open", "spec": "goal"}))["error"]["code"], "parse");
        let r = call(&server, json!({"op": "open", "spec": SPEC}));
        let id = r["session"].as_str().unwrap().to_string();
        let r = call(&server, json!({"op": "apply", "session": id, "command": "frobnicate"}));
        assert_eq!(r["error"]["code"], "parse");
        assert_eq!(r["goals"].as_array().unwrap().len(), 1);
        let r = call(&server, json!({"op": "apply", "session": id, "command": "rule andR goal=0"}));
        assert_eq!(r["error"]["code"], "rule");
        let r = call(&server, json!({"op": "apply", "session": id, "command": "rule VRb goal=0 at=R:0"}));
        assert_eq!(r["error"]["code"], "rule");
        assert_eq!(call(&server, json!({"op": "undo", "session": id}))["error"]["code"], "rule");
        assert_eq!(call(&server, json!({"op": "state", "session": "nope"}))["error"]["code"], "parse");
        assert_eq!(server.handle("{"), server.handle("{"));
        assert_eq!(call(&server, json!({"op": "close", "session": id}))["closed_session"], true);
        assert_eq!(call(&server, json!({"op": "state", "session": id}))["error"]["code"], "parse");
    }

    #[test]
    fn side_condition_code() {
        let server = Server::new();
        let spec = "var x, y; goal g : x > 0 |- [x := 1] (x > 0);";
        let id = call(&server, json!({"op": "open", "spec": spec}))["session"].as_str().unwrap().to_string();
        let r = call(&server, json!({"op": "apply", "session": id, "command": "rule VRb goal=0 at=R:0"}));
        assert_eq!(r["error"]["code"], "side-condition");
    }

    #[test]
    fn rules_table_lists_every_rule() {
        let server = Server::new();
        let r = call(&server, json!({"op": "rules"}));
        let rules = r["rules"].as_array().unwrap();
        assert_eq!(rules.len(), RuleId::ALL.len());
        let dg = rules.iter().find(|x| x["name"] == "dG").unwrap();
        assert_eq!(dg["group"], "differential");
        let keys: Vec<&str> = dg["args"].as_array().unwrap().iter().map(|a| a["key"].as_str().unwrap()).collect();
        assert_eq!(keys, ["at", "with", "ghost", "a", "b"]);
    }
}
