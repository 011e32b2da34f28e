//! Strategy classification and closed-form escape times.
//!
//! States with `theta < 0` are reflected into the upper half plane, solved
//! with the right-turn geometry, and the resulting points are reflected back.
//! All times are computed in scaled units and multiplied by `rho / ve` once,
//! at the end of [`solve`].

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::error::{EscapeError, Result};
use crate::geometry::{
    intercept_geometry, normalize_angle, InterceptGeometry, PlanarPoint, ScaledState, TurnGeometry,
    VehicleConfig,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StrategyTag {
    Straight,
    TurnStraight,
    TurnOnly,
}

impl StrategyTag {
    /// Numeric code used in raster output.
    pub fn code(self) -> i32 {
        match self {
            StrategyTag::Straight => 0,
            StrategyTag::TurnStraight => 1,
            StrategyTag::TurnOnly => 2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            StrategyTag::Straight => "straight",
            StrategyTag::TurnStraight => "turn-straight",
            StrategyTag::TurnOnly => "turn-only",
        }
    }
}

/// Full outcome of [`solve`]. Lengths and points are in the units of the
/// configuration passed in; angles are radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrategyDecision {
    pub tag: StrategyTag,
    pub t_escape: f64,
    pub turn: Option<TurnGeometry>,
    pub intercept: Option<InterceptGeometry>,
    pub exit_point: PlanarPoint,
    pub exit_heading_theta: f64,
    pub mirrored: bool,
}

/// Reflect a lower-half-plane heading into `[0, pi]`.
pub fn mirror_reduce(state: ScaledState) -> (ScaledState, bool) {
    if state.theta < 0.0 {
        (
            ScaledState {
                r: state.r,
                theta: -state.theta,
            },
            true,
        )
    } else {
        (state, false)
    }
}

fn require_reduced(state: ScaledState) -> Result<()> {
    if !(0.0..=PI).contains(&state.theta) {
        return Err(EscapeError::Domain(format!(
            "expected theta in [0, pi] after reflection, got {}",
            state.theta
        )));
    }
    Ok(())
}

/// Classify a reduced, scaled state (`0 < r <= 1`, `theta` in `[0, pi]`).
pub fn classify(state: ScaledState, turn_radius: f64) -> Result<StrategyTag> {
    require_reduced(state)?;
    if state.r > 1.0 {
        return Err(EscapeError::StartOutside {
            r: state.r,
            rho: 1.0,
        });
    }
    if !(state.r > 0.0) {
        return Err(EscapeError::CenterStart);
    }
    if state.theta == 0.0 {
        return Ok(StrategyTag::Straight);
    }
    let turn = TurnGeometry::new(state, turn_radius)?;
    // the tie |T| = 1 goes to turn-only
    Ok(if turn.tangent_norm < 1.0 {
        StrategyTag::TurnStraight
    } else {
        StrategyTag::TurnOnly
    })
}

fn scaled_inputs(state: ScaledState, config: &VehicleConfig) -> Result<(ScaledState, f64)> {
    let scaled = ScaledState::new(state.r / config.rho, state.theta)?;
    Ok((scaled, config.scaled_turn_radius()))
}

/// Straight radial run, `(rho - r) / ve`.
pub fn escape_time_straight(state: ScaledState, config: &VehicleConfig) -> Result<f64> {
    if state.theta != 0.0 {
        return Err(EscapeError::Domain(format!(
            "straight escape needs theta = 0, got {}",
            state.theta
        )));
    }
    Ok((config.rho - state.r) / config.speed)
}

fn turn_straight_scaled(turn: &TurnGeometry, theta: f64, turn_radius: f64) -> Result<f64> {
    let arc = theta - turn.phi;
    if arc < -1e-12 {
        return Err(EscapeError::NegativeArc { arc });
    }
    Ok(turn_radius * arc.max(0.0) + (1.0 - turn.tangent_norm))
}

/// Turn to the radial tangent point, then run straight out.
pub fn escape_time_turn_straight(state: ScaledState, config: &VehicleConfig) -> Result<f64> {
    let (s, rr) = scaled_inputs(state, config)?;
    if !(s.theta > 0.0) {
        return Err(EscapeError::Domain("turn-straight needs theta > 0".into()));
    }
    let turn = TurnGeometry::new(s, rr)?;
    if !(turn.tangent_norm <= 1.0 + 1e-12) {
        return Err(EscapeError::Domain(format!(
            "tangent point lies outside the region (|T| = {})",
            turn.tangent_norm
        )));
    }
    Ok(config.time_scale() * turn_straight_scaled(&turn, s.theta, rr)?)
}

/// Keep turning until the turn circle crosses the boundary.
pub fn escape_time_turn_only(state: ScaledState, config: &VehicleConfig) -> Result<f64> {
    let (s, rr) = scaled_inputs(state, config)?;
    if !(s.theta > 0.0) {
        return Err(EscapeError::Domain("turn-only needs theta > 0".into()));
    }
    let turn = TurnGeometry::new(s, rr)?;
    if turn.tangent_norm < 1.0 - 1e-12 {
        return Err(EscapeError::Domain(format!(
            "tangent point lies inside the region (|T| = {})",
            turn.tangent_norm
        )));
    }
    let intercept = intercept_geometry(s, rr, 1.0)?;
    Ok(config.time_scale() * rr * intercept.arc_angle)
}

fn decide_scaled(state: ScaledState, turn_radius: f64) -> Result<StrategyDecision> {
    let tag = classify(state, turn_radius)?;
    let on_boundary = state.r == 1.0;
    let mut decision = StrategyDecision {
        tag,
        t_escape: 0.0,
        turn: None,
        intercept: None,
        exit_point: PlanarPoint::new(1.0, 0.0),
        exit_heading_theta: 0.0,
        mirrored: false,
    };
    match tag {
        StrategyTag::Straight => {
            decision.t_escape = 1.0 - state.r;
        }
        StrategyTag::TurnStraight => {
            let turn = TurnGeometry::new(state, turn_radius)?;
            decision.t_escape = turn_straight_scaled(&turn, state.theta, turn_radius)?;
            decision.exit_point = PlanarPoint::from_polar(1.0, turn.phi);
            decision.turn = Some(turn);
        }
        StrategyTag::TurnOnly if on_boundary => {
            // already crossing the usable part
            decision.turn = Some(TurnGeometry::new(state, turn_radius)?);
            decision.exit_point = PlanarPoint::new(1.0, 0.0);
            decision.exit_heading_theta = state.theta;
        }
        StrategyTag::TurnOnly => {
            let turn = TurnGeometry::new(state, turn_radius)?;
            let intercept = intercept_geometry(state, turn_radius, 1.0)?;
            decision.t_escape = turn_radius * intercept.arc_angle;
            decision.exit_point = intercept.exit_point;
            decision.exit_heading_theta =
                normalize_angle(state.theta - intercept.arc_angle - intercept.alpha);
            decision.turn = Some(turn);
            decision.intercept = Some(intercept);
        }
    }
    Ok(decision)
}

/// Solve for the optimal escape from `state` (radius in the units of
/// `config.rho`). The returned time is in `rho / ve` units; geometry is in
/// the units of `config.rho`.
pub fn solve(state: ScaledState, config: &VehicleConfig) -> Result<StrategyDecision> {
    if state.r > config.rho {
        return Err(EscapeError::StartOutside {
            r: state.r,
            rho: config.rho,
        });
    }
    if state.r == config.rho && state.theta.abs() >= FRAC_PI_2 {
        return Err(EscapeError::OnBoundaryInward { theta: state.theta });
    }
    let (reduced, mirrored) = mirror_reduce(state);
    let (scaled, turn_radius) = scaled_inputs(reduced, config)?;
    let d = decide_scaled(scaled, turn_radius)?;

    let k = config.rho;
    let mut out = StrategyDecision {
        tag: d.tag,
        t_escape: config.time_scale() * d.t_escape,
        turn: d.turn.map(|t| t.scaled(k)),
        intercept: d.intercept.map(|i| i.scaled(k)),
        exit_point: d.exit_point.scale(k),
        exit_heading_theta: d.exit_heading_theta,
        mirrored,
    };
    if mirrored {
        out.turn = out.turn.map(|t| t.mirrored());
        out.intercept = out.intercept.map(|i| i.mirrored());
        out.exit_point = out.exit_point.mirrored();
        out.exit_heading_theta = -out.exit_heading_theta;
    }
    Ok(out)
}

/// [`solve`] with `rho = ve = 1`.
pub fn solve_scaled(state: ScaledState, turn_radius: f64) -> Result<StrategyDecision> {
    solve(state, &VehicleConfig::unit(turn_radius)?)
}
