//! Detection, achievable sets and the auditability index.

mod clinch;
mod engine;
mod scope;
pub mod space;

pub use clinch::{ClinchStep, ClincherRow, FullRangeReport, UniformityReport};
pub use engine::{AuditOptions, AuditReport, AuditStats, Auditor, DeviationWitness, Route};
pub use scope::{ProblemScope, WorstCase};
pub use space::{CounterpartSpace, MemberKey, PriorityRoute};
