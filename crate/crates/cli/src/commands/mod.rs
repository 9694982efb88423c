pub mod metrics;
pub mod reconstruct;
pub mod report;
pub mod simulate;
pub mod sweep;

/// Shortest round-trip decimal form; `nan` for undefined values.
pub(crate) fn num(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else {
        format!("{v}")
    }
}
