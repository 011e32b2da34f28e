//! Retrograde characteristics of the minimum-time escape problem.
//!
//! Starting from a terminal heading `theta_f` on the usable part, the
//! state/costate system is integrated backward in time `tau`:
//!
//! ```text
//! r'        = -cos(theta)
//! theta'    = sin(theta) / r - sign(l_theta) / R
//! l_r'      = l_theta sin(theta) / r^2
//! l_theta'  = -l_r sin(theta) - l_theta cos(theta) / r
//! ```
//!
//! with `r = 1`, `l_r = sec(theta_f)`, `l_theta = 0` at `tau = 0`. The
//! optimal Hamiltonian is recorded at each sample as a conservation check.
//!
//! A path stops at the horizon, when `r` leaves `(0, 1]`, or when `|theta|`
//! reaches `pi`: past that line the mirrored turn takes over, so the path is
//! no longer optimal.

use std::f64::consts::{FRAC_PI_2, PI};

use serde::Serialize;

use crate::dynamics::{integrate, optimal_hamiltonian, CostateState};
use crate::error::{EscapeError, Result};
use crate::geometry::ScaledState;
use crate::ode::Stepper;

/// Distance kept from `+-pi/2` when seeding, where `sec(theta_f)` diverges.
pub const SEED_MARGIN: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CharacteristicSample {
    pub tau: f64,
    pub r: f64,
    pub theta: f64,
    pub lambda_r: f64,
    pub lambda_theta: f64,
    pub u: f64,
    pub h_residual: f64,
}

impl CharacteristicSample {
    pub fn state(&self) -> ScaledState {
        ScaledState {
            r: self.r,
            theta: self.theta,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Termination {
    Horizon,
    /// Re-crossed the boundary `r = 1` (the entry point of the turn circle).
    Boundary,
    Center,
    /// `|theta| = pi`, where left and right turns tie.
    Dispersal,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CharacteristicPath {
    pub theta_f: f64,
    pub turn_radius: f64,
    pub samples: Vec<CharacteristicSample>,
    pub termination: Termination,
}

impl CharacteristicPath {
    pub fn max_abs_residual(&self) -> f64 {
        self.samples
            .iter()
            .map(|s| s.h_residual.abs())
            .fold(0.0, f64::max)
    }
}

/// Three-valued sign with `sign(0) = 0`.
pub fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Forward-time costate rates `(dl_r/dt, dl_theta/dt)`.
pub fn costate_rates(state: ScaledState, costate: CostateState) -> Result<(f64, f64)> {
    if !(state.r > 0.0) {
        return Err(EscapeError::Domain(format!(
            "costate rates singular at r = {}",
            state.r
        )));
    }
    let (s, c) = state.theta.sin_cos();
    let r = state.r;
    Ok((
        -costate.lambda_theta * s / (r * r),
        costate.lambda_r * s + costate.lambda_theta * c / r,
    ))
}

/// Retrograde rates `[r', theta', l_r', l_theta']` with `u = sign(l_theta)`.
pub fn retro_rates(
    state: ScaledState,
    costate: CostateState,
    turn_radius: f64,
) -> Result<[f64; 4]> {
    let (dlr, dlt) = costate_rates(state, costate)?;
    let (s, c) = state.theta.sin_cos();
    Ok([
        -c,
        s / state.r - sign(costate.lambda_theta) / turn_radius,
        -dlr,
        -dlt,
    ])
}

fn retro_rhs(y: &[f64; 4], u: f64, turn_radius: f64) -> [f64; 4] {
    let (s, c) = y[1].sin_cos();
    let r = y[0];
    [
        -c,
        s / r - u / turn_radius,
        y[3] * s / (r * r),
        -y[2] * s - y[3] * c / r,
    ]
}

fn make_sample(tau: f64, y: &[f64; 4], turn_radius: f64) -> CharacteristicSample {
    let state = ScaledState {
        r: y[0],
        theta: y[1],
    };
    let costate = CostateState {
        lambda_r: y[2],
        lambda_theta: y[3],
    };
    CharacteristicSample {
        tau,
        r: y[0],
        theta: y[1],
        lambda_r: y[2],
        lambda_theta: y[3],
        u: sign(y[3]),
        h_residual: optimal_hamiltonian(state, costate, turn_radius).unwrap_or(f64::NAN),
    }
}

/// Straight retrograde ray down the universal line, sampled every `spacing`.
fn universal_line_path(turn_radius: f64, tau_max: f64, spacing: f64) -> CharacteristicPath {
    let tau_end = tau_max.min(1.0);
    let n = (tau_end / spacing).ceil().max(1.0) as usize;
    let mut samples: Vec<_> = (0..=n)
        .map(|k| {
            let tau = tau_end * k as f64 / n as f64;
            make_sample(tau, &[1.0 - tau, 0.0, 1.0, 0.0], turn_radius)
        })
        .collect();
    let termination = if tau_max >= 1.0 {
        // the ray reaches the center at tau = 1, which is not a valid state
        samples.pop();
        Termination::Center
    } else {
        Termination::Horizon
    };
    CharacteristicPath {
        theta_f: 0.0,
        turn_radius,
        samples,
        termination,
    }
}

/// Integrate the characteristic ending at heading `theta_f` on the boundary.
pub fn emit_characteristic(
    theta_f: f64,
    turn_radius: f64,
    tau_max: f64,
    tol: f64,
) -> Result<CharacteristicPath> {
    if !(theta_f.abs() < FRAC_PI_2 - SEED_MARGIN) {
        return Err(EscapeError::SeedOutOfRange { theta_f });
    }
    if !(turn_radius.is_finite() && turn_radius > 0.0) {
        return Err(EscapeError::Domain(format!(
            "turn radius must be positive, got {turn_radius}"
        )));
    }
    if !(tau_max >= 0.0 && tol > 0.0) {
        return Err(EscapeError::Domain(
            "tau_max must be >= 0 and tol > 0".into(),
        ));
    }
    if theta_f == 0.0 {
        return Ok(universal_line_path(turn_radius, tau_max, 0.01));
    }

    // l_theta leaves zero with the sign of -tan(theta_f) and keeps it, so the
    // forward control is constant along the path.
    let u = -sign(theta_f);
    let rhs = |y: &[f64; 4]| retro_rhs(y, u, turn_radius);
    let boundary = |y: &[f64; 4]| 1.0 - y[0];
    let center = |y: &[f64; 4]| y[0];
    let dispersal = |y: &[f64; 4]| PI - y[1].abs();

    let mut y = [1.0, theta_f, 1.0 / theta_f.cos(), 0.0];
    let mut tau = 0.0;
    let mut samples = vec![CharacteristicSample {
        u,
        ..make_sample(0.0, &y, turn_radius)
    }];
    let mut stepper = Stepper::new(tol, 0.05);
    let termination = loop {
        if tau >= tau_max {
            break Termination::Horizon;
        }
        let step = stepper.advance(
            &rhs,
            tau,
            &y,
            tau_max - tau,
            &[&boundary, &center, &dispersal],
        )?;
        tau = if step.event.is_none() && step.h >= tau_max - tau {
            tau_max
        } else {
            tau + step.h
        };
        y = step.y;
        match step.event {
            Some(0) => {
                y[0] = 1.0;
                samples.push(make_sample(tau, &y, turn_radius));
                break Termination::Boundary;
            }
            Some(1) => break Termination::Center,
            Some(_) => {
                y[1] = PI.copysign(y[1]);
                samples.push(make_sample(tau, &y, turn_radius));
                break Termination::Dispersal;
            }
            None => samples.push(make_sample(tau, &y, turn_radius)),
        }
    };
    Ok(CharacteristicPath {
        theta_f,
        turn_radius,
        samples,
        termination,
    })
}

/// Interior of the universal line: `0 < r < 1` and `|theta| <= tol`.
pub fn on_universal_line(state: ScaledState, tol: f64) -> bool {
    state.r > 0.0 && state.r < 1.0 && state.theta.abs() <= tol
}

/// Outcome of running the forward closed loop from a point on a
/// characteristic back to the boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ReplayCheck {
    pub start_tau: f64,
    pub start: ScaledState,
    /// Forward escape time minus the retrograde time of the start sample.
    pub time_error: f64,
    pub terminal_theta_error: f64,
    pub terminal_r_error: f64,
}

impl ReplayCheck {
    pub fn max_error(&self) -> f64 {
        self.time_error
            .abs()
            .max(self.terminal_theta_error.abs())
            .max(self.terminal_r_error.abs())
    }
}

/// Replay the path forward from its deepest interior sample (strictly inside
/// the region and off the dispersal line) and compare the terminal state with
/// the seed. Returns `None` for a path with no such sample.
pub fn replay(path: &CharacteristicPath, dt_max: f64, tol: f64) -> Result<Option<ReplayCheck>> {
    let start = path
        .samples
        .iter()
        .rev()
        .find(|s| s.tau > 0.0 && s.r < 1.0 && s.r > 0.0 && s.theta.abs() < PI);
    let Some(start) = start else {
        return Ok(None);
    };
    let state = ScaledState::new(start.r, start.theta)?;
    let traj = integrate(state, path.turn_radius, dt_max, tol)?;
    let end = traj.final_sample();
    Ok(Some(ReplayCheck {
        start_tau: start.tau,
        start: state,
        time_error: traj.t_escape - start.tau,
        terminal_theta_error: end.theta - path.theta_f,
        terminal_r_error: end.r - 1.0,
    }))
}
