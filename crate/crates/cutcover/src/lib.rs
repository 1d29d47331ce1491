//! Epoch-based multiplicative weights solvers for the Cut Covering LP
//! (Held-Karp bound, fractional k-ECSM) and the k-ECSS LP with knapsack-cover
//! constraints.

pub mod error;
pub mod generate;
pub mod graph;
pub mod kecss;
pub mod mwu;
pub mod oracle;
pub mod packing;
pub mod path;
pub mod reference;
pub mod tree;
pub mod tree_focus;

pub use error::{Error, Result};
pub use tree_focus::{held_karp, solve_cut_cover, CoverSolution, SolveOptions};
pub use kecss::solve_kecss;
