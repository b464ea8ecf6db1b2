//! Exact computations on the nodal complete intersection of four quadrics in P^7
//! with 96 nodes, its monomial symmetry group, and Calabi-Yau quotients.
//!
//! Modules are layered bottom-up: `scalars` and `linalg` feed `group_engine`,
//! which feeds `threefold`, `divisor_lattice` and `fixed_loci`; `cy_pipeline`
//! combines them. `borcherds_local` and `theta_numerics` stand alone.

pub mod borcherds_local;
pub mod cache;
pub mod cli;
pub mod cy_pipeline;
pub mod divisor_lattice;
pub mod fixed_loci;
pub mod group_engine;
pub mod linalg;
pub mod model;
pub mod scalars;
pub mod theta_numerics;
pub mod threefold;

pub use model::Model;
pub use scalars::{ExtScalar, FieldScalar, Rational, UnitScale};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,
    #[error("parse error: {0}")]
    Parse(String),
    #[error("element is not in the group: {0}")]
    NotInGroup(String),
    #[error("closure exceeded cap of {0} elements")]
    CapExceeded(usize),
    #[error("consistency check failed: {0}")]
    Consistency(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("search budget exhausted: {0}")]
    BudgetExhausted(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
