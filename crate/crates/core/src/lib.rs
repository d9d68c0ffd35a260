//! LRU design: partition a system's parts into line replaceable units so that
//! the expected replacement-plus-purchase cost per time unit is minimal.
//!
//! The main solver is [`colgen::solve_lru_design_colgen`]. [`blp`] holds the
//! monolithic binary-program benchmark and [`oracle`] the brute-force ground
//! truth used for testing.

pub mod blp;
pub mod clru;
pub mod colgen;
pub mod cost;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod generator;
pub mod instance;
pub mod oracle;
pub mod sets;
pub mod structure;

pub use clru::{clru_cost, solve_clru, ClruMode, CoverDesign, CoverLru};
pub use colgen::{solve_lru_design_colgen, ColgenOptions, ColgenOutcome, PricingMethod};
pub use cost::{design_cost, is_connected_design, lru_cost, DesignJson, Lru, LruDesign};
pub use error::{Error, Result};
pub use experiment::{run_experiment, summarize, ExperimentResult, ExperimentSpec, GridPoint, Method};
pub use fixtures::fixture;
pub use generator::{generate, scale_edge_weights, GeneratorConfig};
pub use instance::{Component, RawInstance, SuccessorSets, SystemInstance};
pub use sets::{EdgeSet, VertexSet};
