//! Generator, oracle interpreter and scoring harness for a grounded
//! command-following benchmark in a 2D grid world.

pub mod attributes;
pub mod config;
pub mod dataset_io;
pub mod eval;
pub mod generate;
pub mod grammar;
pub mod pipeline;
pub mod planner;
pub mod sampler;
pub mod seed;
pub mod splits;
pub mod world;
