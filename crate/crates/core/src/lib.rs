//! Optimal token pricing for a seller of multi-input language-model precision.
//!
//! Buyers value precision on a continuum of tasks; precision is Cobb-Douglas in
//! input tokens, output tokens and shared fine-tuning tokens. The crate computes
//! efficient allocations, cost functions, revenue-maximising menus (packages,
//! per-task allocations, two profile types), their two-part tariff
//! implementations, and numeric audits of all of them.

pub mod cli;
pub mod cost;
pub mod efficient;
pub mod error;
pub mod model;
pub mod scenario;
pub mod screening;
pub mod tariffs;
pub mod verify;

pub use error::{Error, Result};
