//! Shared report conventions: a schema version stamped into every
//! machine-readable report, and deterministic serialization helpers.

/// Version stamped into JSON reports; bump on breaking schema changes.
pub const SCHEMA_VERSION: u32 = 1;

/// Serialize any report to pretty JSON with a trailing newline. Field
/// order follows struct declaration order, so output is byte-stable.
pub fn to_json_string<T: serde::Serialize>(report: &T) -> String {
    let mut s = serde_json::to_string_pretty(report).expect("report serialization cannot fail");
    s.push('\n');
    s
}
