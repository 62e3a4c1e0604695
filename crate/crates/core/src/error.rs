use thiserror::Error;

/// Errors surfaced by model construction, contour validation and the pricing path.
#[derive(Debug, Error)]
pub enum PricingError {
    /// Parameter or evaluation-point outside the mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// A contour or grid failed a build-time or per-q validation check.
    #[error("contour validation error: {0}")]
    Contour(String),

    /// The alternating series diverged; the corridor is too narrow for this q.
    #[error("series divergence: {0}")]
    Divergence(String),

    /// A linear system in the resolvent block was singular.
    #[error("singular system: {0}")]
    Singular(String),

    /// Configuration parsing or validation failure.
    #[error("config error: {0}")]
    Config(String),
}
