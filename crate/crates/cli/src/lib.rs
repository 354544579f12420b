//! Library side of the `plaidy` command: batch checking, the interactive
//! session model, the JSON protocol server and the oracle fuzzer.

pub mod check;
pub mod protocol;
pub mod session;
pub mod oracle;
pub mod repl;
