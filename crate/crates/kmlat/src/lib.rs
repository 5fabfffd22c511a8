//! Exact algebra for edge-transitive lattices in rank-2 Kac-Moody groups
//! over finite fields, acting on their Bruhat-Tits trees.

pub mod cli;
pub mod gf;
pub mod groups;
pub mod kmaction;
pub mod lattice;
pub mod laurent;
pub mod par;
pub mod serretree;

pub const REPORT_SCHEMA: &str = "kmlat-report-v1";
