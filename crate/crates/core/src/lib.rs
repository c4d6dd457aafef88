pub mod community;
pub mod corpus;
pub mod graph;
pub mod heuristics;
pub mod merge;
pub mod pipeline;
pub mod service;
