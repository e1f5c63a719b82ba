#![allow(clippy::result_large_err)]

pub mod audit;
pub mod certify;
pub mod circulation;
pub mod cli;
pub mod dfs_tree;
pub mod graph;
pub mod lp;
pub mod mincut;
pub mod rational;
pub mod simplex;
