//! Crypto-agility maturity assessment.
//!
//! * [`model`]: the five-level, 24-requirement maturity model as validated data.
//! * [`engine`]: assessment sessions, achieved levels, gaps and what-if analysis.
//! * [`inventory`]: source scanning, cryptography inventories, policies,
//!   algorithm negotiation and the Mosca migration-time check.
//! * [`report`]: JSON, Markdown and HTML assessment reports.

pub mod engine;
pub mod error;
pub mod inventory;
pub mod model;
pub mod report;

pub use error::{EngineError, InventoryError, ModelError, ReportError};

/// Pretty JSON with a trailing newline; the canonical on-disk and wire form.
pub fn to_json_pretty<T: serde::Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("value serializes to JSON");
    s.push('\n');
    s
}
