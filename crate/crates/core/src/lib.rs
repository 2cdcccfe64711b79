//! Minimum sum-of-radii clustering (k-MSR) under mergeable constraints.
//!
//! The crate provides FPT approximation pipelines built on greedy ball covers,
//! assignment subroutines for lower-bound, balanced and fair clustering, exact
//! brute-force oracles, and a generator for hard instances derived from
//! partitioned Set Cover.

pub mod assign;
pub mod cli;
pub mod constraints;
pub mod covers;
pub mod flow;
pub mod gen;
pub mod hardness;
pub mod io;
pub mod metric;
pub mod profiles;
pub mod solvers;

pub use constraints::{check_feasible, merge_clusters, Clustering, ConstraintSpec};
pub use metric::{Ball, Instance, MetricSpace};
