//! Independent checks of the closed-form escape times.
//!
//! Two routes are compared against [`crate::strategy::solve`]:
//!
//! - forward integration of the closed loop ([`crate::dynamics::integrate`]);
//! - an exhaustive search over the bang/singular path family: a constant
//!   turn (left or right) for some arc, followed by a straight ray. A path
//!   whose arc crosses the boundary before the switch is an arc-only path.
//!
//! Candidate times come from exact circle/ray versus unit-circle
//! intersections written out here, not from the geometry module.

use std::f64::consts::{PI, TAU};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dynamics::integrate;
use crate::error::{EscapeError, Result};
use crate::geometry::{ScaledState, VehicleConfig};
use crate::strategy::solve;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum CandidateFamily {
    ArcOnlyRight,
    ArcOnlyLeft,
    ArcThenStraightRight,
    ArcThenStraightLeft,
}

impl CandidateFamily {
    pub fn is_left(self) -> bool {
        matches!(
            self,
            CandidateFamily::ArcOnlyLeft | CandidateFamily::ArcThenStraightLeft
        )
    }
}

/// Best member of a family. `parameter` is the exit arc for arc-only paths
/// and the switch arc for arc-then-straight paths, in radians.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CandidateResult {
    pub family: CandidateFamily,
    pub parameter: f64,
    pub time: Option<f64>,
}

impl CandidateResult {
    fn none(family: CandidateFamily) -> Self {
        Self {
            family,
            parameter: f64::NAN,
            time: None,
        }
    }

    fn beats(&self, other: &CandidateResult) -> bool {
        match (self.time, other.time) {
            (Some(a), Some(b)) => a < b,
            (Some(_), None) => true,
            _ => false,
        }
    }
}

/// Turn circle of one direction, parameterised by swept arc.
struct Arc {
    r: f64,
    theta: f64,
    radius: f64,
    // +1 counter-clockwise (left), -1 clockwise (right)
    dir: f64,
    cx: f64,
    cy: f64,
    start_angle: f64,
}

impl Arc {
    fn new(r: f64, theta: f64, radius: f64, dir: f64) -> Self {
        // center sits a quarter turn from the heading, toward the turn side
        let cx = r - dir * radius * theta.sin();
        let cy = dir * radius * theta.cos();
        Self {
            r,
            theta,
            radius,
            dir,
            cx,
            cy,
            start_angle: (0.0 - cy).atan2(r - cx),
        }
    }

    fn point(&self, arc: f64) -> (f64, f64) {
        let a = self.start_angle + self.dir * arc;
        (
            self.cx + self.radius * a.cos(),
            self.cy + self.radius * a.sin(),
        )
    }

    fn heading(&self, arc: f64) -> f64 {
        self.theta + self.dir * arc
    }

    /// Smallest positive arc at which the circle reaches the unit circle.
    fn exit_arc(&self) -> Option<f64> {
        let d = self.cx.hypot(self.cy);
        if d < 1e-300 {
            return None;
        }
        // |P(a)|^2 = d^2 + R^2 + 2 R d cos(start + dir a - angle(C)) = 1
        let c = (1.0 - d * d - self.radius * self.radius) / (2.0 * self.radius * d);
        if !(-1.0..=1.0).contains(&c) {
            return None;
        }
        let k = c.acos();
        let gamma = self.cy.atan2(self.cx);
        [k, -k]
            .into_iter()
            .map(|root| (self.dir * (root + gamma - self.start_angle)).rem_euclid(TAU))
            .filter(|a| *a > 1e-14 || self.r < 1.0)
            .min_by(f64::total_cmp)
    }

    /// Straight-ray distance from the point at `arc` to the unit circle.
    fn ray_exit(&self, arc: f64) -> (f64, (f64, f64)) {
        let (px, py) = self.point(arc);
        let (ux, uy) = (self.heading(arc).cos(), self.heading(arc).sin());
        let along = px * ux + py * uy;
        let rest = 1.0 - (px * px + py * py);
        let s = -along + (along * along + rest).max(0.0).sqrt();
        (s, (px + s * ux, py + s * uy))
    }
}

fn on_unit_circle(p: (f64, f64)) -> bool {
    (p.0.hypot(p.1) - 1.0).abs() <= 1e-9
}

fn search_direction(
    r: f64,
    theta: f64,
    radius: f64,
    dir: f64,
    n_grid: usize,
) -> (CandidateResult, CandidateResult) {
    let (only_family, straight_family) = if dir < 0.0 {
        (
            CandidateFamily::ArcOnlyRight,
            CandidateFamily::ArcThenStraightRight,
        )
    } else {
        (
            CandidateFamily::ArcOnlyLeft,
            CandidateFamily::ArcThenStraightLeft,
        )
    };
    let arc = Arc::new(r, theta, radius, dir);
    let exit = arc.exit_arc();

    let arc_only = match exit {
        Some(e) if on_unit_circle(arc.point(e)) => CandidateResult {
            family: only_family,
            parameter: e,
            time: Some(radius * e),
        },
        _ => CandidateResult::none(only_family),
    };

    let limit = exit.unwrap_or(TAU);
    let eval = |a: f64| -> Option<f64> {
        if !(0.0..limit).contains(&a) {
            return None;
        }
        let (s, end) = arc.ray_exit(a);
        on_unit_circle(end).then_some(radius * a + s)
    };
    let mut best = CandidateResult::none(straight_family);
    let consider = |a: f64, best: &mut CandidateResult| {
        if let Some(t) = eval(a) {
            if best.time.is_none_or(|b| t < b) {
                *best = CandidateResult {
                    family: straight_family,
                    parameter: a,
                    time: Some(t),
                };
            }
        }
    };
    let h = TAU / n_grid as f64;
    for k in 0..n_grid {
        consider(k as f64 * h, &mut best);
    }
    if best.time.is_some() {
        let centre = best.parameter;
        let fine = h / n_grid as f64;
        for k in 0..=2 * n_grid {
            consider(centre - h + k as f64 * fine, &mut best);
        }
    }
    (arc_only, best)
}

/// Best candidate of each family, in the order right arc-only, right
/// arc-then-straight, left arc-only, left arc-then-straight. Times are in
/// the units of `config`.
pub fn candidate_families(
    state: ScaledState,
    config: &VehicleConfig,
    n_grid: usize,
) -> Result<[CandidateResult; 4]> {
    if n_grid < 100 {
        return Err(EscapeError::Domain(format!(
            "n_grid must be >= 100, got {n_grid}"
        )));
    }
    let r = state.r / config.rho;
    if !(r > 0.0 && r <= 1.0) {
        return Err(EscapeError::Domain(format!(
            "candidate search needs 0 < r <= 1, got {r}"
        )));
    }
    let radius = config.scaled_turn_radius();
    let (ro, rs) = search_direction(r, state.theta, radius, -1.0, n_grid);
    let (lo, ls) = search_direction(r, state.theta, radius, 1.0, n_grid);
    let k = config.time_scale();
    Ok([ro, rs, lo, ls].map(|mut c| {
        c.time = c.time.map(|t| t * k);
        c
    }))
}

/// Fastest escaping candidate over all four families.
pub fn candidate_search(
    state: ScaledState,
    config: &VehicleConfig,
    n_grid: usize,
) -> Result<CandidateResult> {
    let all = candidate_families(state, config, n_grid)?;
    // right before left and arc-then-straight first on exact ties
    let order = [1, 0, 3, 2];
    let mut best = all[order[0]];
    for &i in &order[1..] {
        if all[i].beats(&best) {
            best = all[i];
        }
    }
    if best.time.is_none() {
        return Err(EscapeError::NoEscapingCandidate);
    }
    Ok(best)
}

/// First-order bound on how far the gridded search can sit above the true
/// family optimum, `2 pi (R / ve) / n^2`.
pub fn grid_resolution_bound(config: &VehicleConfig, n_grid: usize) -> f64 {
    TAU * (config.turn_radius / config.speed) / (n_grid as f64 * n_grid as f64)
}

/// Pseudorandom state sampling for [`verify`]. All ranges are open-ended
/// intervals in scaled units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SampleSpec {
    pub count: usize,
    pub seed: u64,
    pub r_range: (f64, f64),
    pub theta_range: (f64, f64),
    pub turn_radius_range: (f64, f64),
}

impl Default for SampleSpec {
    fn default() -> Self {
        Self {
            count: 1000,
            seed: 42,
            r_range: (0.05, 0.99),
            theta_range: (0.0, PI),
            turn_radius_range: (0.05, 3.0),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySettings {
    pub n_grid: usize,
    pub dt_max: f64,
    pub tol: f64,
    /// Allowed gap between closed-form and integrated times.
    pub time_tol: f64,
}

impl Default for VerifySettings {
    fn default() -> Self {
        Self {
            n_grid: 2000,
            dt_max: 0.05,
            tol: 1e-9,
            time_tol: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub r: f64,
    pub theta: f64,
    #[serde(rename = "R")]
    pub turn_radius: f64,
    pub closed: f64,
    pub integrated: f64,
    pub best_candidate: CandidateResult,
    /// `closed - best_candidate.time`; positive means a candidate was faster.
    pub violation: f64,
    /// Whether `beta - omega` matches the swept arc (turn-only states only).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difference_form_holds: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub pass: bool,
}

/// Draw `count` scaled states and turn radii from `spec`, deterministically.
pub fn sample_cases(spec: &SampleSpec) -> Vec<(ScaledState, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut draw = |(lo, hi): (f64, f64)| -> f64 {
        loop {
            let v = rng.gen_range(lo..hi);
            if v > lo {
                return v;
            }
        }
    };
    (0..spec.count)
        .map(|_| {
            let r = draw(spec.r_range);
            let theta = draw(spec.theta_range);
            let radius = draw(spec.turn_radius_range);
            (ScaledState { r, theta }, radius)
        })
        .collect()
}

fn verify_one(state: ScaledState, turn_radius: f64, settings: &VerifySettings) -> VerifyReport {
    let mut report = VerifyReport {
        r: state.r,
        theta: state.theta,
        turn_radius,
        closed: f64::NAN,
        integrated: f64::NAN,
        best_candidate: CandidateResult::none(CandidateFamily::ArcThenStraightRight),
        violation: f64::NAN,
        difference_form_holds: None,
        error: None,
        pass: false,
    };
    let run = |report: &mut VerifyReport| -> Result<()> {
        let config = VehicleConfig::unit(turn_radius)?;
        let state = ScaledState::new(state.r, state.theta)?;
        let decision = solve(state, &config)?;
        report.closed = decision.t_escape;
        report.difference_form_holds = decision.intercept.map(|i| i.difference_form_holds(1e-9));
        report.integrated = integrate(state, turn_radius, settings.dt_max, settings.tol)?.t_escape;
        report.best_candidate = candidate_search(state, &config, settings.n_grid)?;
        let best = report.best_candidate.time.expect("escaping candidate");
        report.violation = report.closed - best;
        let bound = grid_resolution_bound(&config, settings.n_grid);
        report.pass = (report.closed - report.integrated).abs() <= settings.time_tol
            && report.violation <= bound;
        Ok(())
    };
    if let Err(e) = run(&mut report) {
        report.error = Some(format!("{}: {e}", e.code()));
        report.pass = false;
    }
    report
}

/// Check closed form, integration and candidate search on explicit cases.
/// Order of the reports matches the input.
pub fn verify_cases(cases: &[(ScaledState, f64)], settings: &VerifySettings) -> Vec<VerifyReport> {
    cases
        .par_iter()
        .map(|&(s, rr)| verify_one(s, rr, settings))
        .collect()
}

pub fn verify(spec: &SampleSpec, settings: &VerifySettings) -> Result<Vec<VerifyReport>> {
    if spec.count == 0 {
        return Err(EscapeError::Domain("count must be at least 1".into()));
    }
    for (lo, hi) in [spec.r_range, spec.theta_range, spec.turn_radius_range] {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(EscapeError::Domain(format!(
                "empty sampling range ({lo}, {hi})"
            )));
        }
    }
    Ok(verify_cases(&sample_cases(spec), settings))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VerifySummary {
    pub passed: usize,
    pub failed: usize,
    pub max_violation: f64,
    pub max_integration_error: f64,
}

pub fn summarize(reports: &[VerifyReport]) -> VerifySummary {
    let passed = reports.iter().filter(|r| r.pass).count();
    let finite_max = |f: &dyn Fn(&VerifyReport) -> f64| {
        reports
            .iter()
            .map(f)
            .filter(|v| v.is_finite())
            .fold(f64::NEG_INFINITY, f64::max)
    };
    VerifySummary {
        passed,
        failed: reports.len() - passed,
        max_violation: finite_max(&|r| r.violation),
        max_integration_error: finite_max(&|r| (r.closed - r.integrated).abs()),
    }
}
