//! Statistics-free join ordering toolkit.
//!
//! The pipeline is: [`catalog`] (table sizes and key constraints) →
//! [`sqlfront`] (query model and annotated join graph) → [`planner`]
//! (join order) → [`rewriter`] (SQL that pins the order). [`costlab`] runs
//! orders exactly on small tabular data to measure intermediate result sizes
//! and to check rewritten queries against the original.

pub mod catalog;
pub mod costlab;
pub mod planner;
pub mod rewriter;
pub mod sql;
pub mod sqlfront;

pub use catalog::{load_catalog, Catalog, SchemaInfo};
pub use planner::{simpli2_order, size_order, validate_order, Direction, JoinOrder, Provenance};
pub use sqlfront::{build_join_graph, parse_query, JoinGraph, QueryModel};
