//! Query-based interactive debugging of disjunctive logic programs.

pub mod diagnosis;
pub mod explain;
pub mod program;
pub mod query;
pub mod semantics;
pub mod session;
