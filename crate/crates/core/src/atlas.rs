//! Rasterized strategy regions and time-to-escape field over the `(r, theta)`
//! cylinder, the analytic regime boundary, and level sets of the field.

use std::collections::HashMap;
use std::f64::consts::PI;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{EscapeError, Result};
use crate::geometry::{strategy_boundary_curve, ScaledState, VehicleConfig};
use crate::strategy::solve;

/// Strategy code written for cells where [`solve`] rejects the node.
pub const ERROR_CODE: i32 = -1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub nr: usize,
    pub ntheta: usize,
    pub turn_radius: f64,
    pub rho: f64,
    pub ve: f64,
}

impl GridSpec {
    pub fn scaled(nr: usize, ntheta: usize, turn_radius: f64) -> Self {
        Self {
            nr,
            ntheta,
            turn_radius,
            rho: 1.0,
            ve: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldCell {
    pub theta: f64,
    pub r: f64,
    pub strategy: i32,
    pub t_escape: f64,
}

/// Cells are stored theta-major: index `j * nr + i` for `theta_axis[j]`,
/// `r_axis[i]`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FieldGrid {
    pub r_axis: Vec<f64>,
    pub theta_axis: Vec<f64>,
    pub cells: Vec<FieldCell>,
}

impl FieldGrid {
    pub fn nr(&self) -> usize {
        self.r_axis.len()
    }

    pub fn ntheta(&self) -> usize {
        self.theta_axis.len()
    }

    pub fn cell(&self, j_theta: usize, i_r: usize) -> &FieldCell {
        &self.cells[j_theta * self.nr() + i_r]
    }
}

/// `n` headings from `-pi` to `pi` inclusive, exactly antisymmetric.
pub fn theta_axis(n: usize) -> Vec<f64> {
    let mut axis = vec![0.0; n];
    let step = 2.0 * PI / (n - 1) as f64;
    for j in 0..n / 2 {
        let v = -PI + j as f64 * step;
        axis[j] = v;
        axis[n - 1 - j] = -v;
    }
    axis
}

/// `n` radii `rho * k / n`, `k = 1..=n`.
pub fn r_axis(n: usize, rho: f64) -> Vec<f64> {
    (1..=n).map(|k| rho * (k as f64 / n as f64)).collect()
}

fn evaluate(theta: f64, r: f64, config: &VehicleConfig) -> FieldCell {
    let decision = ScaledState::new(r, theta).and_then(|s| solve(s, config));
    match decision {
        Ok(d) => FieldCell {
            theta,
            r,
            strategy: d.tag.code(),
            t_escape: d.t_escape,
        },
        Err(_) => FieldCell {
            theta,
            r,
            strategy: ERROR_CODE,
            t_escape: f64::NAN,
        },
    }
}

/// Evaluate the solver at every node of the grid.
pub fn raster(spec: &GridSpec) -> Result<FieldGrid> {
    if spec.nr < 2 || spec.ntheta < 2 {
        return Err(EscapeError::Domain(format!(
            "grid needs nr, ntheta >= 2, got {} x {}",
            spec.nr, spec.ntheta
        )));
    }
    let config = VehicleConfig::new(spec.rho, spec.turn_radius, spec.ve)?;
    let r_axis = r_axis(spec.nr, spec.rho);
    let theta_axis = theta_axis(spec.ntheta);
    let cells = (0..spec.ntheta * spec.nr)
        .into_par_iter()
        .map(|idx| evaluate(theta_axis[idx / spec.nr], r_axis[idx % spec.nr], &config))
        .collect();
    Ok(FieldGrid {
        r_axis,
        theta_axis,
        cells,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub theta: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Polyline {
    pub points: Vec<CurvePoint>,
    pub closed: bool,
}

/// The `|T| = rho` locus as two polylines: `theta` in `[0, pi]` and its
/// mirror image in `[-pi, 0]`.
pub fn boundary_overlay(turn_radius: f64, rho: f64, n_samples: usize) -> Result<Vec<Polyline>> {
    if n_samples < 2 {
        return Err(EscapeError::Domain(
            "boundary needs at least 2 samples".into(),
        ));
    }
    let thetas: Vec<f64> = (0..n_samples)
        .map(|k| PI * k as f64 / (n_samples - 1) as f64)
        .collect();
    let upper: Vec<CurvePoint> = strategy_boundary_curve(turn_radius, rho, &thetas)
        .into_iter()
        .map(|(r, theta)| CurvePoint {
            theta,
            r: r.min(rho),
        })
        .collect();
    let lower = upper
        .iter()
        .map(|p| CurvePoint {
            theta: -p.theta,
            r: p.r,
        })
        .collect();
    Ok(vec![
        Polyline {
            points: upper,
            closed: false,
        },
        Polyline {
            points: lower,
            closed: false,
        },
    ])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Contour {
    pub level: f64,
    pub lines: Vec<Polyline>,
}

// Edge of the node lattice: horizontal edges join (j, i)-(j+1, i), vertical
// edges join (j, i)-(j, i+1).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Edge {
    H(usize, usize),
    V(usize, usize),
}

/// Marching-squares level sets of `t_escape`. A node counts as above the
/// level when its value is strictly greater; cells touching an error node are
/// skipped.
pub fn time_contours(grid: &FieldGrid, levels: &[f64]) -> Vec<Contour> {
    levels
        .iter()
        .map(|&level| Contour {
            level,
            lines: contour_level(grid, level),
        })
        .collect()
}

fn contour_level(grid: &FieldGrid, level: f64) -> Vec<Polyline> {
    let (nt, nr) = (grid.ntheta(), grid.nr());
    let value = |j: usize, i: usize| grid.cell(j, i).t_escape;
    let vertex = |e: Edge| -> CurvePoint {
        let ((j0, i0), (j1, i1)) = match e {
            Edge::H(j, i) => ((j, i), (j + 1, i)),
            Edge::V(j, i) => ((j, i), (j, i + 1)),
        };
        let (a, b) = (value(j0, i0), value(j1, i1));
        let s = if a == b { 0.5 } else { (level - a) / (b - a) };
        CurvePoint {
            theta: grid.theta_axis[j0] + s * (grid.theta_axis[j1] - grid.theta_axis[j0]),
            r: grid.r_axis[i0] + s * (grid.r_axis[i1] - grid.r_axis[i0]),
        }
    };

    let mut segments: Vec<(Edge, Edge)> = Vec::new();
    for j in 0..nt.saturating_sub(1) {
        for i in 0..nr.saturating_sub(1) {
            let v = [
                value(j, i),
                value(j + 1, i),
                value(j + 1, i + 1),
                value(j, i + 1),
            ];
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            // corners counter-clockwise from (j, i); edges between them
            let edges = [
                Edge::H(j, i),
                Edge::V(j + 1, i),
                Edge::H(j, i + 1),
                Edge::V(j, i),
            ];
            let above: Vec<bool> = v.iter().map(|&x| x > level).collect();
            let idx = above
                .iter()
                .enumerate()
                .fold(0usize, |acc, (k, &b)| acc | ((b as usize) << k));
            let crossing: Vec<Edge> = (0..4)
                .filter(|&k| above[k] != above[(k + 1) % 4])
                .map(|k| edges[k])
                .collect();
            match crossing.len() {
                2 => segments.push((crossing[0], crossing[1])),
                4 => {
                    // saddle: decide the pairing from the cell-centre average
                    let centre_above = v.iter().sum::<f64>() / 4.0 > level;
                    let corner0_above = idx & 1 == 1;
                    if centre_above == corner0_above {
                        segments.push((edges[0], edges[1]));
                        segments.push((edges[2], edges[3]));
                    } else {
                        segments.push((edges[3], edges[0]));
                        segments.push((edges[1], edges[2]));
                    }
                }
                _ => {}
            }
        }
    }
    chain(&segments)
        .into_iter()
        .map(|(edges, closed)| Polyline {
            points: edges.into_iter().map(vertex).collect(),
            closed,
        })
        .collect()
}

/// Join segments that share lattice edges into polylines, deterministically.
fn chain(segments: &[(Edge, Edge)]) -> Vec<(Vec<Edge>, bool)> {
    let mut incident: HashMap<Edge, Vec<usize>> = HashMap::new();
    for (k, (a, b)) in segments.iter().enumerate() {
        incident.entry(*a).or_default().push(k);
        incident.entry(*b).or_default().push(k);
    }
    let mut used = vec![false; segments.len()];
    let mut out = Vec::new();

    let walk = |start_seg: usize, from: Edge, used: &mut Vec<bool>| -> Vec<Edge> {
        let mut path = vec![from];
        let mut seg = start_seg;
        let mut at = from;
        loop {
            used[seg] = true;
            let (a, b) = segments[seg];
            let next = if a == at { b } else { a };
            path.push(next);
            at = next;
            match incident[&at].iter().find(|&&s| !used[s]) {
                Some(&s) => seg = s,
                None => return path,
            }
        }
    };

    // open chains first, starting from edges with a single incident segment
    for k in 0..segments.len() {
        if used[k] {
            continue;
        }
        let (a, b) = segments[k];
        let start = if incident[&a].len() == 1 {
            Some(a)
        } else if incident[&b].len() == 1 {
            Some(b)
        } else {
            None
        };
        if let Some(s) = start {
            out.push((walk(k, s, &mut used), false));
        }
    }
    for k in 0..segments.len() {
        if !used[k] {
            let path = walk(k, segments[k].0, &mut used);
            let closed = path.first() == path.last();
            out.push((path, closed));
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    #[test]
    fn axes_include_endpoints() {
        let t = theta_axis(5);
        assert_eq!(t, vec![-PI, -FRAC_PI_2, 0.0, FRAC_PI_2, PI]);
        let t = theta_axis(512);
        for j in 0..512 {
            assert_eq!(t[j], -t[511 - j]);
        }
        assert_eq!(r_axis(4, 2.0), vec![0.5, 1.0, 1.5, 2.0]);
    }

    #[test]
    fn small_raster_nodes() {
        let g = raster(&GridSpec::scaled(3, 3, 0.2)).unwrap();
        assert_eq!(g.cells.len(), 9);
        let c = g.cell(1, 2);
        assert_eq!((c.theta, c.r, c.strategy, c.t_escape), (0.0, 1.0, 0, 0.0));
        // (r = 1, theta = +-pi) heads inward on the boundary
        assert_eq!(g.cell(0, 2).strategy, ERROR_CODE);
        assert!(g.cell(0, 2).t_escape.is_nan());
    }

    #[test]
    fn raster_matches_solver_examples() {
        let g = raster(&GridSpec::scaled(4, 5, 0.2)).unwrap();
        let c = g.cell(3, 1);
        assert_eq!((c.theta, c.r), (FRAC_PI_2, 0.5));
        assert_eq!(c.strategy, 1);
        assert!((c.t_escape - 0.585_388_53).abs() < 1e-7);
        let g = raster(&GridSpec::scaled(4, 5, 1.0)).unwrap();
        assert_eq!(g.cell(3, 1).strategy, 2);
        assert!((g.cell(3, 1).t_escape - 0.722_734_25).abs() < 1e-7);
    }

    #[test]
    fn raster_rejects_tiny_grids() {
        assert!(raster(&GridSpec::scaled(1, 3, 0.2)).is_err());
    }

    #[test]
    fn boundary_overlay_examples() {
        let b = boundary_overlay(0.75, 1.0, 3).unwrap();
        assert_eq!(b.len(), 2);
        assert!((b[0].points[1].r - 0.5).abs() < 1e-15);
        assert_eq!(b[0].points[0].r, 1.0);
        assert_eq!(b[1].points[1].theta, -FRAC_PI_2);
        let b = boundary_overlay(1.0, 1.0, 3).unwrap();
        assert!((b[0].points[1].r - (2f64.sqrt() - 1.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_level_runs_along_the_usable_part() {
        let g = raster(&GridSpec::scaled(16, 33, 0.2)).unwrap();
        let c = time_contours(&g, &[0.0]);
        let pts: Vec<_> = c[0].lines.iter().flat_map(|l| l.points.iter()).collect();
        assert!(!pts.is_empty());
        for p in pts {
            assert_eq!(p.r, 1.0);
            assert!(p.theta.abs() < FRAC_PI_2);
        }
    }

    #[test]
    fn level_passes_near_the_radial_start() {
        let g = raster(&GridSpec::scaled(40, 81, 0.2)).unwrap();
        let c = time_contours(&g, &[0.7]);
        let dr = 1.0 / 40.0;
        let dth = 2.0 * PI / 80.0;
        let near = c[0]
            .lines
            .iter()
            .flat_map(|l| l.points.iter())
            .any(|p| (p.r - 0.3).abs() <= dr && p.theta.abs() <= dth);
        assert!(near);
    }

    #[test]
    fn level_above_range_is_empty() {
        let g = raster(&GridSpec::scaled(8, 9, 0.2)).unwrap();
        let c = time_contours(&g, &[100.0]);
        assert!(c[0].lines.is_empty());
    }

    #[test]
    fn chain_closes_loops() {
        // a single interior peak produces one closed ring
        let n = 5;
        let axis: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let cells = (0..n * n)
            .map(|idx| {
                let (j, i) = (idx / n, idx % n);
                FieldCell {
                    theta: axis[j],
                    r: axis[i],
                    strategy: 0,
                    t_escape: if (j, i) == (2, 2) { 1.0 } else { 0.0 },
                }
            })
            .collect();
        let g = FieldGrid {
            r_axis: axis.clone(),
            theta_axis: axis,
            cells,
        };
        let c = time_contours(&g, &[0.5]);
        assert_eq!(c[0].lines.len(), 1);
        assert!(c[0].lines[0].closed);
        assert_eq!(c[0].lines[0].points.len(), 5);
    }
}
