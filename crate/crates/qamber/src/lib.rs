//! Exact bit-error rates for Gray-coded PAM and rectangular QAM.
//!
//! The crate computes closed-form BER values by characterizing, for every
//! labeling bit of a binary-reflected-Gray-coded M-PAM, the decision regions
//! and symbol positions of that bit, and summing the resulting Gaussian tail
//! probabilities. The same machinery yields the conditional BER of a
//! rectangular QAM whose constellation is rotated by a fixed phase-noise
//! angle. A brute-force layout scan and a seeded Monte Carlo link simulator
//! provide independent cross-checks.
//!
//! Modules:
//! - [`graycode`]: binary reflected Gray code sequences, bit columns, and
//!   permutation/complementation transforms.
//! - [`pam_layout`]: analytic decision regions and bit positions, plus the
//!   brute-force oracle and the per-bit decision rule.
//! - [`closed_form`]: erfc, spacing normalization, the PAM and QAM BER sums,
//!   BER curves, and dB-loss measurement.
//! - [`montecarlo`]: reproducible link simulation over AWGN with a fixed
//!   phase rotation.
//! - [`verify`]: the self-check suites behind `qamber verify`.

pub mod closed_form;
pub mod graycode;
pub mod montecarlo;
pub mod pam_layout;
pub mod verify;

/// Errors reported by the library.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    /// A parameter lies outside the range an operation is defined on.
    #[error("domain error: {0}")]
    Domain(String),
    /// A target value is not bracketed by the supplied data.
    #[error("target not bracketed: {0}")]
    Bracket(String),
    /// A simulation bit budget below the supported minimum.
    #[error("budget too small: {0}")]
    Budget(String),
}

pub type Result<T> = std::result::Result<T, Error>;
