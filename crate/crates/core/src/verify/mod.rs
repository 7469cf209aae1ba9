//! Quadrature, one-dimensional search and incentive audits.

pub mod audit;
pub mod quad;
pub mod search;

pub use audit::{ic_audit, ic_audit_points, ir_audit, ir_audit_points, AuditReport, GridDim, GridSpec};
pub use quad::{integrate, integrate_2d, integrate_with, Integral, QuadOptions};
