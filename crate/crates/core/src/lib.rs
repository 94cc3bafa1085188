//! Episode and scenario logs as finite categories, with functor-based
//! matching between them.

pub mod belog;
pub mod edit;
pub mod equations;
pub mod functor;
pub mod id;
pub mod log;
pub mod matrix;
pub mod reasoning;
pub mod store;
pub mod temporal;
#[cfg(feature = "testkit")]
pub mod testkit;
pub mod text;
pub mod validate;

pub use belog::{BeLog, BeRelation, BeVerbType};
pub use id::{oid, ObjectId};
pub use log::{build_elog, build_slog, Action, Log, LogKind, ModelError, Participant, RawData};
pub use matrix::{BoolMatrix, MatrixError};
pub use validate::{validate_category, ValidationReport, Violation};
