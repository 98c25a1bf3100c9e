//! Brute-force checks of the aligned-image-set converse on single-letter instances.

mod ais;
mod entropy;

pub use ais::{
    alignment_probability_bound, check_alignment_interval, entropy_gap_report, estimate_alignment_probability,
    expected_image_size_check, expected_image_size_checks, image_size_bound, scan_alignment_extents,
    AisInstance, AisParams, AlignmentEstimate, EntropyGap, ImageSetResult, IntervalCheck, Psi, MAX_CODEWORDS,
    MAX_M, MAX_PBAR,
};
pub use entropy::{
    check_submodularity, entropy_bits, random_pmf, submodularity_independent, submodularity_joint, Inequality, Joint3, Pmf,
    SUBMODULARITY_TOLERANCE,
};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("instance too large: {0}")]
    InstanceTooLarge(String),
    #[error("coefficient and symbol counts differ ({0} vs {1})")]
    ArityMismatch(usize, usize),
    #[error("not a distribution: {0}")]
    NotADistribution(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
}

/// `sum_i floor(c_i * x_i)`.
pub fn eval_floor_form(coeffs: &[f64], symbols: &[i64]) -> Result<i64, OracleError> {
    if coeffs.len() != symbols.len() {
        return Err(OracleError::ArityMismatch(coeffs.len(), symbols.len()));
    }
    Ok(coeffs
        .iter()
        .zip(symbols)
        .map(|(&c, &x)| (c * x as f64).floor() as i64)
        .sum())
}
