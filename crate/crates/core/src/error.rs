use thiserror::Error;

/// Errors raised by the solver, the simulators and the verification harness.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum EscapeError {
    #[error("start position is the region center; relative heading is undefined at r = 0")]
    CenterStart,
    #[error("start position r = {r} lies outside the region of radius {rho}")]
    StartOutside { r: f64, rho: f64 },
    #[error("start position is on the boundary with inward heading theta = {theta}")]
    OnBoundaryInward { theta: f64 },
    #[error("turn circle does not cross the region boundary")]
    NotIntersecting,
    #[error("turn arc to the tangent point is negative ({arc})")]
    NegativeArc { arc: f64 },
    #[error("precondition violated: {0}")]
    Domain(String),
    #[error("step size control failed at t = {t} (h = {h})")]
    StepFailure { t: f64, h: f64 },
    #[error("integration exceeded the time limit {limit} without escaping")]
    NonTermination { limit: f64 },
    #[error("terminal heading {theta_f} is outside the admissible seed range")]
    SeedOutOfRange { theta_f: f64 },
    #[error("no candidate path escapes the region")]
    NoEscapingCandidate,
}

impl EscapeError {
    /// Stable machine-readable name, used in CLI error records.
    pub fn code(&self) -> &'static str {
        match self {
            EscapeError::CenterStart => "CenterStart",
            EscapeError::StartOutside { .. } => "StartOutside",
            EscapeError::OnBoundaryInward { .. } => "OnBoundaryInward",
            EscapeError::NotIntersecting => "NotIntersecting",
            EscapeError::NegativeArc { .. } => "NegativeArc",
            EscapeError::Domain(_) => "Domain",
            EscapeError::StepFailure { .. } => "StepFailure",
            EscapeError::NonTermination { .. } => "NonTermination",
            EscapeError::SeedOutOfRange { .. } => "SeedOutOfRange",
            EscapeError::NoEscapingCandidate => "NoEscapingCandidate",
        }
    }
}

pub type Result<T> = std::result::Result<T, EscapeError>;
