//! Circle and tangent geometry of the clockwise (right) turn circle.
//!
//! Everything here lives in the scaled plane: the region is a disk of
//! radius `rho` (1 after scaling) centred at the origin `C`, and the vehicle
//! `E` sits on the positive x-axis at distance `r` with heading `theta`
//! measured from the outward radial direction. Positive `theta` turns
//! clockwise (u = -1); the mirrored case is handled by the strategy solver.
//!
//! Angles are built from `atan2` of explicit vectors. The `reference`
//! submodule keeps the arcsine/arccosine chains for cross-checking on the
//! domain where they hold.

use std::f64::consts::{PI, TAU};

use serde::Serialize;

use crate::error::{EscapeError, Result};

/// Wrap an angle into `(-pi, pi]`. Values already in range are returned
/// unchanged, bit for bit.
pub fn normalize_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = a.rem_euclid(TAU);
    if w > PI {
        w - TAU
    } else {
        w
    }
}

/// Wrap an angle into `[0, 2pi)`.
pub fn wrap_positive(a: f64) -> f64 {
    let w = a.rem_euclid(TAU);
    if w >= TAU {
        0.0
    } else {
        w
    }
}

/// Polar position of the vehicle: radius (units of `rho`) and heading
/// relative to the outward radial direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScaledState {
    pub r: f64,
    pub theta: f64,
}

impl ScaledState {
    /// Validates `r > 0` and normalizes `theta` into `(-pi, pi]`.
    pub fn new(r: f64, theta: f64) -> Result<Self> {
        if !r.is_finite() || !theta.is_finite() {
            return Err(EscapeError::Domain(format!(
                "state must be finite (r = {r}, theta = {theta})"
            )));
        }
        if r == 0.0 {
            return Err(EscapeError::CenterStart);
        }
        if r < 0.0 {
            return Err(EscapeError::Domain(format!(
                "radius must be positive, got {r}"
            )));
        }
        Ok(Self {
            r,
            theta: normalize_angle(theta),
        })
    }
}

/// Physical problem data: region radius, minimum turn radius and speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VehicleConfig {
    pub rho: f64,
    pub turn_radius: f64,
    pub speed: f64,
}

impl VehicleConfig {
    pub fn new(rho: f64, turn_radius: f64, speed: f64) -> Result<Self> {
        for (name, v) in [("rho", rho), ("R", turn_radius), ("ve", speed)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(EscapeError::Domain(format!(
                    "{name} must be positive, got {v}"
                )));
            }
        }
        Ok(Self {
            rho,
            turn_radius,
            speed,
        })
    }

    /// Scaled configuration (`rho = ve = 1`) with the given turn radius.
    pub fn unit(turn_radius: f64) -> Result<Self> {
        Self::new(1.0, turn_radius, 1.0)
    }

    /// Turn radius in units of the region radius.
    pub fn scaled_turn_radius(&self) -> f64 {
        self.turn_radius / self.rho
    }

    /// Conversion factor from scaled time to physical time, `rho / ve`.
    pub fn time_scale(&self) -> f64 {
        self.rho / self.speed
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PlanarPoint {
    pub x: f64,
    pub y: f64,
}

impl PlanarPoint {
    pub const ORIGIN: PlanarPoint = PlanarPoint { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn from_polar(radius: f64, angle: f64) -> Self {
        Self::new(radius * angle.cos(), radius * angle.sin())
    }

    pub fn norm(&self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn angle(&self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(&self, other: PlanarPoint) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(&self, other: PlanarPoint) -> f64 {
        self.x * other.y - self.y * other.x
    }

    pub fn sub(&self, other: PlanarPoint) -> PlanarPoint {
        PlanarPoint::new(self.x - other.x, self.y - other.y)
    }

    pub fn scale(&self, k: f64) -> PlanarPoint {
        PlanarPoint::new(self.x * k, self.y * k)
    }

    /// Reflection across the x-axis.
    pub fn mirrored(&self) -> PlanarPoint {
        PlanarPoint::new(self.x, -self.y)
    }

    /// Rotation by -90 degrees.
    pub fn rotated_cw(&self) -> PlanarPoint {
        PlanarPoint::new(self.y, -self.x)
    }
}

/// Unsigned angle between two vectors in `[0, pi]`.
pub fn angle_between(a: PlanarPoint, b: PlanarPoint) -> f64 {
    a.cross(b).abs().atan2(a.dot(b))
}

/// Turn circle of the vehicle and its radial tangent point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TurnGeometry {
    pub center_o: PlanarPoint,
    pub norm_o: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub tangent_norm: f64,
    pub phi: f64,
    pub tangent_point: PlanarPoint,
}

impl TurnGeometry {
    pub fn new(state: ScaledState, turn_radius: f64) -> Result<Self> {
        require_upper_half(state)?;
        let center_o = turn_center(state, turn_radius)?;
        let sigma2 = tangent_norm(state, turn_radius)?;
        let phi = phi_from_parts(center_o, sigma2, turn_radius);
        let (s, c) = state.theta.sin_cos();
        let r = state.r;
        let sigma1_sq = r * r + turn_radius * turn_radius + 2.0 * r * turn_radius * s
            - turn_radius * turn_radius * c * c;
        Ok(Self {
            center_o,
            norm_o: center_o.norm(),
            sigma1: sigma1_sq.max(0.0).sqrt(),
            sigma2,
            tangent_norm: sigma2,
            phi,
            tangent_point: PlanarPoint::from_polar(sigma2, phi),
        })
    }

    pub(crate) fn scaled(&self, k: f64) -> Self {
        Self {
            center_o: self.center_o.scale(k),
            norm_o: self.norm_o * k,
            sigma1: self.sigma1 * k,
            sigma2: self.sigma2 * k,
            tangent_norm: self.tangent_norm * k,
            phi: self.phi,
            tangent_point: self.tangent_point.scale(k),
        }
    }

    pub(crate) fn mirrored(&self) -> Self {
        Self {
            center_o: self.center_o.mirrored(),
            phi: -self.phi,
            tangent_point: self.tangent_point.mirrored(),
            ..*self
        }
    }
}

/// Crossing of the turn circle with the region boundary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct InterceptGeometry {
    pub alpha: f64,
    pub delta: f64,
    pub beta: f64,
    pub omega: f64,
    pub arc_angle: f64,
    pub exit_point: PlanarPoint,
}

impl InterceptGeometry {
    /// `beta - omega`, the inside arc when E and I lie on the same side of line OC.
    pub fn beta_minus_omega(&self) -> f64 {
        self.beta - self.omega
    }

    pub fn beta_plus_omega(&self) -> f64 {
        self.beta + self.omega
    }

    /// Whether `beta - omega` reproduces the swept arc to within `tol`.
    pub fn difference_form_holds(&self, tol: f64) -> bool {
        (self.beta_minus_omega() - self.arc_angle).abs() <= tol
    }

    pub(crate) fn scaled(&self, k: f64) -> Self {
        Self {
            exit_point: self.exit_point.scale(k),
            ..*self
        }
    }

    pub(crate) fn mirrored(&self) -> Self {
        Self {
            alpha: -self.alpha,
            exit_point: self.exit_point.mirrored(),
            ..*self
        }
    }
}

fn require_positive_radius(turn_radius: f64) -> Result<()> {
    if turn_radius.is_finite() && turn_radius > 0.0 {
        Ok(())
    } else {
        Err(EscapeError::Domain(format!(
            "turn radius must be positive, got {turn_radius}"
        )))
    }
}

fn require_upper_half(state: ScaledState) -> Result<()> {
    if (0.0..=PI).contains(&state.theta) {
        Ok(())
    } else {
        Err(EscapeError::Domain(format!(
            "right-turn geometry needs theta in [0, pi], got {}",
            state.theta
        )))
    }
}

/// Center of the clockwise turn circle, `O = (r + R sin theta, -R cos theta)`.
pub fn turn_center(state: ScaledState, turn_radius: f64) -> Result<PlanarPoint> {
    require_positive_radius(turn_radius)?;
    let (s, c) = state.theta.sin_cos();
    Ok(PlanarPoint::new(
        state.r + turn_radius * s,
        -turn_radius * c,
    ))
}

/// Length of the tangent from the origin to the turn circle,
/// `sqrt(r^2 + 2 r R sin theta) = sqrt(|O|^2 - R^2)`.
pub fn tangent_norm(state: ScaledState, turn_radius: f64) -> Result<f64> {
    require_positive_radius(turn_radius)?;
    let r = state.r;
    let sq = r * r + 2.0 * r * turn_radius * state.theta.sin();
    if !(sq > 0.0) {
        return Err(EscapeError::Domain(
            "origin lies on or inside the turn circle".into(),
        ));
    }
    Ok(sq.sqrt())
}

fn phi_from_parts(center_o: PlanarPoint, sigma2: f64, turn_radius: f64) -> f64 {
    // polar angle of O plus the half-angle subtended by the circle at C
    normalize_angle(center_o.angle() + turn_radius.atan2(sigma2))
}

/// Polar angle of the tangent point T.
pub fn phi_angle(state: ScaledState, turn_radius: f64) -> Result<f64> {
    require_upper_half(state)?;
    let o = turn_center(state, turn_radius)?;
    let sigma2 = tangent_norm(state, turn_radius)?;
    Ok(phi_from_parts(o, sigma2, turn_radius))
}

/// Point on the turn circle where the heading becomes radially outward.
pub fn tangent_point(state: ScaledState, turn_radius: f64) -> Result<PlanarPoint> {
    let phi = phi_angle(state, turn_radius)?;
    let sigma2 = tangent_norm(state, turn_radius)?;
    Ok(PlanarPoint::from_polar(sigma2, phi))
}

/// Exit point of the clockwise turn circle through the boundary of radius
/// `rho`, with the associated triangle angles and the swept arc from E.
pub fn intercept_geometry(
    state: ScaledState,
    turn_radius: f64,
    rho: f64,
) -> Result<InterceptGeometry> {
    require_upper_half(state)?;
    if !(rho.is_finite() && rho > 0.0) {
        return Err(EscapeError::Domain(format!(
            "rho must be positive, got {rho}"
        )));
    }
    if state.r >= rho {
        return Err(EscapeError::Domain(format!(
            "intercept needs a start strictly inside, r = {} >= rho = {rho}",
            state.r
        )));
    }
    let o = turn_center(state, turn_radius)?;
    let d = o.norm();
    if d > rho + turn_radius || d < (rho - turn_radius).abs() {
        return Err(EscapeError::NotIntersecting);
    }

    // chord construction: foot of the common chord along C->O, half chord h
    let foot = (d * d + rho * rho - turn_radius * turn_radius) / (2.0 * d);
    let half_chord = (rho * rho - foot * foot).max(0.0).sqrt();
    let delta = half_chord.atan2(foot);

    let e = PlanarPoint::new(state.r, 0.0);
    let start_angle = e.sub(o).angle();
    let (alpha, arc_angle, exit_point) = [o.angle() + delta, o.angle() - delta]
        .into_iter()
        .map(|a| {
            let p = PlanarPoint::from_polar(rho, a);
            let arc = wrap_positive(start_angle - p.sub(o).angle());
            (normalize_angle(a), arc, p)
        })
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("two candidates");

    let to_c = PlanarPoint::ORIGIN.sub(o);
    Ok(InterceptGeometry {
        alpha,
        delta,
        beta: angle_between(exit_point.sub(o), to_c),
        omega: angle_between(e.sub(o), to_c),
        arc_angle,
        exit_point,
    })
}

/// Velocity direction of clockwise motion on the circle centered at `center`
/// with radius `turn_radius`, at point `p` on that circle.
pub fn clockwise_velocity(p: PlanarPoint, center: PlanarPoint, turn_radius: f64) -> PlanarPoint {
    p.sub(center).rotated_cw().scale(1.0 / turn_radius)
}

/// Locus `|T| = rho` separating the turn-straight and turn-only regimes,
/// evaluated at each heading in `thetas` (each in `[0, pi]`).
pub fn strategy_boundary_curve(turn_radius: f64, rho: f64, thetas: &[f64]) -> Vec<(f64, f64)> {
    thetas
        .iter()
        .map(|&theta| {
            let b = turn_radius * theta.sin();
            // positive root of r^2 + 2 b r - rho^2 = 0, cancellation-free form
            let r = rho * rho / (b + (b * b + rho * rho).sqrt());
            (r, theta)
        })
        .collect()
}

/// Arcsine/arccosine chains for `phi`, `|T|` and `alpha`, kept for
/// cross-checks against the `atan2` constructions above. They are only
/// meaningful for `theta` in `[0, pi/2]`.
pub mod reference {
    use super::*;

    fn ratios(state: ScaledState, turn_radius: f64) -> (f64, f64) {
        let o = turn_center(state, turn_radius).expect("valid radius");
        let n = o.norm();
        (turn_radius / n, turn_radius * state.theta.cos() / n)
    }

    /// `phi = asin(a) - asin(b)` with `a = R/|O|`, `b = R cos theta/|O|`,
    /// evaluated as `asin(a sqrt(1 - b^2) - b sqrt(1 - a^2))`. For `b >= 0`
    /// the difference is rationalized to `(a^2 - b^2) / (a sqrt(1 - b^2) +
    /// b sqrt(1 - a^2))` so that small headings do not cancel.
    pub fn phi(state: ScaledState, turn_radius: f64) -> f64 {
        let (a, b) = ratios(state, turn_radius);
        let (ca, cb) = ((1.0 - a * a).sqrt(), (1.0 - b * b).sqrt());
        let sin_phi = if b >= 0.0 {
            let d = a * state.theta.sin();
            d * d / (a * cb + b * ca)
        } else {
            a * cb - b * ca
        };
        sin_phi.asin()
    }

    /// `|T| = R (cos(phi) - cos theta) / sin(phi)`, with the numerator as
    /// `2 sin((theta + phi)/2) sin((theta - phi)/2)`. NaN at `phi = 0`.
    pub fn tangent_norm_from_angles(state: ScaledState, turn_radius: f64) -> f64 {
        let p = phi(state, turn_radius);
        if p == 0.0 {
            return f64::NAN;
        }
        let th = state.theta;
        turn_radius * 2.0 * ((th + p) / 2.0).sin() * ((th - p) / 2.0).sin() / p.sin()
    }

    /// `(s1 s2 - s2^2 cos theta) / (s1 - s2 cos theta)`, which reduces to `s2`.
    pub fn tangent_norm_from_sigmas(state: ScaledState, turn_radius: f64) -> f64 {
        let g = TurnGeometry::new(state, turn_radius).expect("valid geometry");
        let c = state.theta.cos();
        (g.sigma1 * g.sigma2 - g.sigma2 * g.sigma2 * c) / (g.sigma1 - g.sigma2 * c)
    }

    /// The same ratio with the denominator `s1 - s2`; does not reduce to `s2`.
    pub fn tangent_norm_wrong_denominator(state: ScaledState, turn_radius: f64) -> f64 {
        let g = TurnGeometry::new(state, turn_radius).expect("valid geometry");
        let c = state.theta.cos();
        (g.sigma1 * g.sigma2 - g.sigma2 * g.sigma2 * c) / (g.sigma1 - g.sigma2)
    }

    /// `alpha = acos((|O|^2 + rho^2 - R^2) / (2 rho |O|)) - asin(R cos theta / |O|)`.
    pub fn alpha(state: ScaledState, turn_radius: f64, rho: f64) -> f64 {
        let n = turn_center(state, turn_radius)
            .expect("valid radius")
            .norm();
        let (_, b) = ratios(state, turn_radius);
        ((n * n + rho * rho - turn_radius * turn_radius) / (2.0 * rho * n))
            .clamp(-1.0, 1.0)
            .acos()
            - b.asin()
    }

    /// `beta` from the law of cosines in triangle IOC.
    pub fn beta(state: ScaledState, turn_radius: f64, rho: f64) -> f64 {
        let n = turn_center(state, turn_radius)
            .expect("valid radius")
            .norm();
        ((n * n + turn_radius * turn_radius - rho * rho) / (2.0 * n * turn_radius))
            .clamp(-1.0, 1.0)
            .acos()
    }

    /// `omega` from the law of cosines in triangle EOC (standard sign).
    pub fn omega(state: ScaledState, turn_radius: f64) -> f64 {
        let n = turn_center(state, turn_radius)
            .expect("valid radius")
            .norm();
        let r = state.r;
        ((n * n + turn_radius * turn_radius - r * r) / (2.0 * n * turn_radius))
            .clamp(-1.0, 1.0)
            .acos()
    }
}
