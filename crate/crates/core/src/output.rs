//! Text and binary encodings of solver products.
//!
//! CSV numbers are written with 17 significant digits in scientific form
//! (`{:.16e}`), which round-trips every `f64`. NaN is written as `nan`.

use std::fmt::Write as _;

use serde_json::{json, Value};

use crate::atlas::{Contour, FieldGrid, Polyline};
use crate::characteristics::CharacteristicPath;
use crate::dynamics::Trajectory;
use crate::geometry::PlanarPoint;
use crate::oracle::{VerifyReport, VerifySummary};
use crate::strategy::StrategyDecision;

pub const TRAJECTORY_HEADER: &str = "t,r,theta,x,y,u";
pub const CHARACTERISTIC_HEADER: &str = "tau,r,theta,lambda_r,lambda_theta,u,h_residual";
pub const FIELD_HEADER: &str = "theta,r,strategy,t_escape";
pub const CURVE_HEADER: &str = "curve_id,theta,r";

/// 17 significant digits.
pub fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn csv_rows<'a>(header: &str, rows: impl Iterator<Item = Vec<String>> + 'a) -> String {
    let mut out = String::with_capacity(4096);
    out.push_str(header);
    out.push('\n');
    for row in rows {
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

pub fn trajectory_csv(traj: &Trajectory) -> String {
    csv_rows(
        TRAJECTORY_HEADER,
        traj.samples
            .iter()
            .map(|s| [s.t, s.r, s.theta, s.x, s.y, s.u].map(fmt17).to_vec()),
    )
}

pub fn characteristic_csv(path: &CharacteristicPath) -> String {
    csv_rows(
        CHARACTERISTIC_HEADER,
        path.samples.iter().map(|s| {
            [
                s.tau,
                s.r,
                s.theta,
                s.lambda_r,
                s.lambda_theta,
                s.u,
                s.h_residual,
            ]
            .map(fmt17)
            .to_vec()
        }),
    )
}

pub fn field_csv(grid: &FieldGrid) -> String {
    csv_rows(
        FIELD_HEADER,
        grid.cells.iter().map(|c| {
            vec![
                fmt17(c.theta),
                fmt17(c.r),
                c.strategy.to_string(),
                fmt17(c.t_escape),
            ]
        }),
    )
}

/// Polylines numbered from 0 in the order given.
pub fn curves_csv<'a>(lines: impl IntoIterator<Item = &'a Polyline>) -> String {
    let mut out = String::new();
    out.push_str(CURVE_HEADER);
    out.push('\n');
    for (id, line) in lines.into_iter().enumerate() {
        for p in &line.points {
            let _ = writeln!(out, "{id},{},{}", fmt17(p.theta), fmt17(p.r));
        }
    }
    out
}

/// Contour polylines numbered across levels in order.
pub fn contours_csv(contours: &[Contour]) -> String {
    curves_csv(contours.iter().flat_map(|c| c.lines.iter()))
}

/// Binary PGM of the strategy codes: width `nr`, height `ntheta`, one byte
/// per cell (0, 1, 2; 255 for error cells).
pub fn strategy_pgm(grid: &FieldGrid) -> Vec<u8> {
    let mut out = format!("P5\n{} {}\n255\n", grid.nr(), grid.ntheta()).into_bytes();
    out.extend(grid.cells.iter().map(|c| match c.strategy {
        0..=2 => c.strategy as u8,
        _ => 255,
    }));
    out
}

fn point(p: PlanarPoint) -> Value {
    json!({"x": p.x, "y": p.y})
}

/// JSON record for a solved state.
pub fn decision_json(
    r: f64,
    theta: f64,
    turn_radius: f64,
    rho: f64,
    ve: f64,
    d: &StrategyDecision,
) -> Value {
    let mut obj = json!({
        "r": r,
        "theta": theta,
        "R": turn_radius,
        "rho": rho,
        "ve": ve,
        "strategy": d.tag.name(),
        "strategy_code": d.tag.code(),
        "t_escape": d.t_escape,
        "mirrored": d.mirrored,
        "exit_point": point(d.exit_point),
        "exit_heading_theta": d.exit_heading_theta,
        "phi": Value::Null,
        "tangent": Value::Null,
        "turn": Value::Null,
        "intercept": Value::Null,
    });
    if let Some(t) = d.turn {
        obj["phi"] = json!(t.phi);
        obj["tangent"] = point(t.tangent_point);
        obj["turn"] = json!({
            "center": point(t.center_o),
            "norm_o": t.norm_o,
            "sigma1": t.sigma1,
            "sigma2": t.sigma2,
            "tangent_norm": t.tangent_norm,
        });
    }
    if let Some(i) = d.intercept {
        obj["intercept"] = json!({
            "alpha": i.alpha,
            "delta": i.delta,
            "beta": i.beta,
            "omega": i.omega,
            "arc_angle": i.arc_angle,
            "beta_minus_omega": i.beta_minus_omega(),
            "beta_plus_omega": i.beta_plus_omega(),
            "exit_point": point(i.exit_point),
        });
    }
    obj
}

pub fn verify_report_json(reports: &[VerifyReport]) -> Value {
    serde_json::to_value(reports).expect("reports serialize")
}

pub fn verify_summary_json(summary: &VerifySummary) -> Value {
    serde_json::to_value(summary).expect("summary serializes")
}
