//! File formats: CSV tables and JSON experiment configurations.

mod config;
mod tables;

pub use config::{
    builtin_graph, parse_coefficient, resolve_coefficient, CoefficientEntry, CoefficientSpec,
    ExperimentConfig, GraphSource, GridKind, LambdaGrid, SolverConfig,
};
pub use tables::{
    edge_named, read_solution, solution_from_str, solution_to_string, write_eigenvectors,
    write_records, write_solution, write_spectrum, write_trajectory, SOLUTION_HEADER,
};
