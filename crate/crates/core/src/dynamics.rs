//! Closed-loop forward simulation of the scaled kinematics
//!
//! ```text
//! dr/dt     = cos(theta)
//! dtheta/dt = -sin(theta) / r + u / R
//! ```
//!
//! under the bang-singular feedback `u = -sign(theta)`, together with the
//! Hamiltonian of the minimum-time problem and the usable-part predicate.

use std::f64::consts::{FRAC_PI_2, TAU};

use serde::Serialize;

use crate::error::{EscapeError, Result};
use crate::geometry::ScaledState;
use crate::ode::Stepper;

/// Headings with `|theta| <= SWITCH_TOL` are treated as lying on the
/// universal line.
pub const SWITCH_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum EventKind {
    ReachedUL,
    Escaped,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEvent {
    pub kind: EventKind,
    pub t: f64,
    pub state: ScaledState,
}

/// One row of a trajectory. `u` is the control applied from this sample on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectorySample {
    pub t: f64,
    pub r: f64,
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    pub u: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub events: Vec<TrajectoryEvent>,
    pub t_escape: f64,
}

impl Trajectory {
    pub fn reached_universal_line(&self) -> bool {
        self.events.iter().any(|e| e.kind == EventKind::ReachedUL)
    }

    pub fn final_sample(&self) -> &TrajectorySample {
        self.samples
            .last()
            .expect("trajectory has at least one sample")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostateState {
    pub lambda_r: f64,
    pub lambda_theta: f64,
}

/// Turn hard toward the radial direction, hold course once on it.
pub fn feedback_control(state: ScaledState) -> f64 {
    if state.theta.abs() <= SWITCH_TOL {
        0.0
    } else if state.theta > 0.0 {
        -1.0
    } else {
        1.0
    }
}

fn require_radius(r: f64) -> Result<()> {
    if r > 0.0 {
        Ok(())
    } else {
        Err(EscapeError::Domain(format!(
            "dynamics are singular at r = {r}"
        )))
    }
}

/// `(dr/dt, dtheta/dt)` for control `u` and scaled turn radius `turn_radius`.
pub fn rates(state: ScaledState, u: f64, turn_radius: f64) -> Result<(f64, f64)> {
    require_radius(state.r)?;
    if u.abs() > 1.0 {
        return Err(EscapeError::Domain(format!("control {u} outside [-1, 1]")));
    }
    let (s, c) = state.theta.sin_cos();
    Ok((c, -s / state.r + u / turn_radius))
}

/// `H = -1 + l_r cos(theta) + l_theta u / R - l_theta sin(theta) / r`.
pub fn hamiltonian(
    state: ScaledState,
    costate: CostateState,
    u: f64,
    turn_radius: f64,
) -> Result<f64> {
    require_radius(state.r)?;
    let (s, c) = state.theta.sin_cos();
    Ok(
        -1.0 + costate.lambda_r * c + costate.lambda_theta * u / turn_radius
            - costate.lambda_theta * s / state.r,
    )
}

/// Hamiltonian minimized over the control, i.e. with `u = sign(l_theta)`.
/// Vanishes along optimal extremals.
pub fn optimal_hamiltonian(
    state: ScaledState,
    costate: CostateState,
    turn_radius: f64,
) -> Result<f64> {
    require_radius(state.r)?;
    let (s, c) = state.theta.sin_cos();
    Ok(
        -1.0 + costate.lambda_r * c + costate.lambda_theta.abs() / turn_radius
            - costate.lambda_theta * s / state.r,
    )
}

/// The outward-facing half of the boundary, `|theta| < pi/2`.
pub fn usable_part(theta: f64) -> bool {
    -FRAC_PI_2 < theta && theta < FRAC_PI_2
}

/// Forward-integrate the closed loop from `initial` until the boundary
/// `r = 1` is crossed. `turn_radius` is scaled; returned times are scaled.
pub fn integrate(
    initial: ScaledState,
    turn_radius: f64,
    dt_max: f64,
    tol: f64,
) -> Result<Trajectory> {
    if !(turn_radius.is_finite() && turn_radius > 0.0) {
        return Err(EscapeError::Domain(format!(
            "turn radius must be positive, got {turn_radius}"
        )));
    }
    if !(dt_max > 0.0 && tol > 0.0) {
        return Err(EscapeError::Domain(
            "dt_max and tol must be positive".into(),
        ));
    }
    require_radius(initial.r)?;
    if initial.r > 1.0 {
        return Err(EscapeError::StartOutside {
            r: initial.r,
            rho: 1.0,
        });
    }
    if initial.r == 1.0 && !usable_part(initial.theta) {
        return Err(EscapeError::OnBoundaryInward {
            theta: initial.theta,
        });
    }

    let mut u = feedback_control(initial);
    let turn_sign = initial.theta.signum();
    let mut t = 0.0;
    let mut y = [initial.r, initial.theta, 0.0];
    let sample = |t: f64, y: &[f64; 3], u: f64| TrajectorySample {
        t,
        r: y[0],
        theta: y[1],
        x: y[0] * y[2].cos(),
        y: y[0] * y[2].sin(),
        u,
    };
    let mut traj = Trajectory {
        samples: vec![sample(0.0, &y, u)],
        events: Vec::new(),
        t_escape: 0.0,
    };
    if initial.r == 1.0 {
        traj.events.push(TrajectoryEvent {
            kind: EventKind::Escaped,
            t: 0.0,
            state: initial,
        });
        return Ok(traj);
    }

    let limit = 10.0 * (TAU * turn_radius + 2.0);
    let escape = |y: &[f64; 3]| 1.0 - y[0];
    let switch = move |y: &[f64; 3]| turn_sign * y[1];
    let mut stepper = Stepper::new(tol, dt_max);

    loop {
        if t > limit {
            return Err(EscapeError::NonTermination { limit });
        }
        let rhs = |y: &[f64; 3]| {
            let (s, c) = y[1].sin_cos();
            [c, -s / y[0] + u / turn_radius, s / y[0]]
        };
        let step = if u == 0.0 {
            stepper.advance(&rhs, t, &y, f64::INFINITY, &[&escape])?
        } else {
            stepper.advance(&rhs, t, &y, f64::INFINITY, &[&escape, &switch])?
        };
        t += step.h;
        y = step.y;
        match step.event {
            Some(0) => {
                y[0] = 1.0;
                traj.samples.push(sample(t, &y, u));
                traj.events.push(TrajectoryEvent {
                    kind: EventKind::Escaped,
                    t,
                    state: ScaledState {
                        r: y[0],
                        theta: y[1],
                    },
                });
                traj.t_escape = t;
                return Ok(traj);
            }
            Some(_) => {
                y[1] = 0.0;
                u = 0.0;
                traj.events.push(TrajectoryEvent {
                    kind: EventKind::ReachedUL,
                    t,
                    state: ScaledState {
                        r: y[0],
                        theta: 0.0,
                    },
                });
                traj.samples.push(sample(t, &y, u));
            }
            None => traj.samples.push(sample(t, &y, u)),
        }
    }
}
