//! Correlation with significance, per-category correlation tables and
//! proportion histograms.

mod correlation;
mod histogram;
pub mod special;

pub use correlation::{
    category_correlation_table, category_samples, correlate, measure_gpa_correlation, p_value,
    pearson, round2, CategoryCorrelationRow, CategorySamples, CorrelationResult, SIGNIFICANCE,
};
pub use histogram::{
    grade_split, grade_split_histograms, rai_histogram, GradeSplit, Histogram, DEFAULT_BINS,
};
