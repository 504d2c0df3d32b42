//! Expansion-center placement with geometric clearance control.

use crate::error::{QbxError, Result};
use crate::geometry::{Discretization, GridKind, SourceGrid};
use crate::kernels::Side;
use crate::point::Vec2;

/// An expansion disk touching the boundary at one target node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionCenter {
    pub center: Vec2,
    pub radius: f64,
    pub side: Side,
    /// Target node the disk touches.
    pub target: usize,
    /// Source panel containing the target (source node for trapezoidal
    /// grids).
    pub panel: usize,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CenterOptions {
    /// `r = radius_factor * h`, with `h` the local panel length (node
    /// spacing on trapezoidal grids).
    pub radius_factor: f64,
    /// Relative slack in the clearance test.
    pub clearance_tol: f64,
    pub max_rounds: usize,
}

impl Default for CenterOptions {
    fn default() -> Self {
        CenterOptions {
            radius_factor: 0.5,
            clearance_tol: 1e-3,
            max_rounds: 8,
        }
    }
}

/// One center per target node on `side`, without clearance checks.
pub fn centers_for(
    target: &Discretization,
    source: &SourceGrid,
    side: Side,
    radius_factor: f64,
) -> Vec<ExpansionCenter> {
    (0..target.len())
        .map(|j| {
            let panel = source.owner(j);
            let h = match target.kind() {
                GridKind::Panels => source.disc.panels()[panel].length,
                GridKind::Trapezoidal => target.weights[j],
            };
            let radius = radius_factor * h;
            ExpansionCenter {
                center: target.points[j] + target.normals[j] * (side.sign() * radius),
                radius,
                side,
                target: j,
                panel,
            }
        })
        .collect()
}

/// Indices of centers closer than `(1 - tol) r` to a source panel that is
/// neither their own nor adjacent to it.
pub fn clearance_violations(centers: &[ExpansionCenter], source: &SourceGrid, tol: f64) -> Vec<usize> {
    let disc = &source.disc;
    if disc.kind() != GridKind::Panels {
        return Vec::new();
    }
    // bounding circles of source panels
    let bounds: Vec<(Vec2, f64)> = (0..disc.num_panels())
        .map(|sp| {
            let r = disc.node_range(sp);
            let mid = disc.points[r.start + r.len() / 2];
            let rad = disc.points[r].iter().map(|&x| x.distance(mid)).fold(0.0, f64::max);
            (mid, rad)
        })
        .collect();
    centers
        .iter()
        .enumerate()
        .filter(|(_, c)| {
            let limit = (1.0 - tol) * c.radius;
            bounds.iter().enumerate().any(|(sp, &(mid, rad))| {
                if source.adjacent(c.panel, sp) || c.center.distance(mid) - rad >= limit {
                    return false;
                }
                disc.points[disc.node_range(sp)]
                    .iter()
                    .any(|x| x.distance(c.center) < limit)
            })
        })
        .map(|(i, _)| i)
        .collect()
}

/// Places centers on the requested sides, bisecting the source panels of
/// offending centers until every disk clears the non-adjacent panels.
pub fn place_centers(
    target: &Discretization,
    mut source: SourceGrid,
    sides: &[Side],
    opts: CenterOptions,
) -> Result<(SourceGrid, Vec<Vec<ExpansionCenter>>)> {
    for round in 0..=opts.max_rounds {
        let all: Vec<Vec<ExpansionCenter>> = sides
            .iter()
            .map(|&s| centers_for(target, &source, s, opts.radius_factor))
            .collect();
        let mut marked = vec![false; source.disc.num_panels()];
        let mut count = 0;
        for cs in &all {
            for i in clearance_violations(cs, &source, opts.clearance_tol) {
                marked[cs[i].panel] = true;
                count += 1;
            }
        }
        if count == 0 {
            return Ok((source, all));
        }
        if round == opts.max_rounds || source.is_trapezoidal() {
            return Err(QbxError::ClearanceUnachievable {
                rounds: round,
                violations: count,
            });
        }
        log::debug!("clearance round {}: {count} centers too close", round + 1);
        source = source.bisect(target, &marked)?;
    }
    unreachable!("loop returns on its last round")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Curve, PanelOptions};

    fn setup(c: &Curve) -> (Discretization, SourceGrid) {
        let d = Discretization::build_panelization(c, PanelOptions::for_curve(c)).unwrap();
        let s = SourceGrid::new(&d, 6).unwrap();
        (d, s)
    }

    #[test]
    fn circle_centers() {
        let (d, s) = setup(&Curve::circle(1.0));
        let (s, cs) = place_centers(&d, s, &[Side::Interior, Side::Exterior], CenterOptions::default()).unwrap();
        assert_eq!(s.rounds(), 0);
        for (ci, ce) in cs[0].iter().zip(&cs[1]) {
            assert!((ci.center.norm() - (1.0 - ci.radius)).abs() < 1e-12);
            let x = d.points[ci.target];
            assert!((ci.center.distance(x) - ci.radius).abs() < 1e-12);
            assert!(((ci.center + ce.center) * 0.5 - x).norm() < 1e-12);
        }
    }

    #[test]
    fn starfish_clearance_refinement() {
        let (d, s) = setup(&Curve::starfish());
        // r = h/2 clears the starfish with margin
        let (s0, _) =
            place_centers(&d, s.clone(), &[Side::Interior, Side::Exterior], CenterOptions::default()).unwrap();
        assert_eq!(s0.rounds(), 0);
        // larger disks reach into the concave arms and force bisection
        let opts = CenterOptions {
            radius_factor: 1.5,
            ..CenterOptions::default()
        };
        let (s1, cs) = place_centers(&d, s, &[Side::Interior, Side::Exterior], opts).unwrap();
        assert!(s1.rounds() >= 1);
        assert!(s1.disc.num_panels() > d.num_panels());
        for side in &cs {
            assert!(clearance_violations(side, &s1, 1e-3).is_empty());
        }
    }

    #[test]
    fn exhausted_rounds_error() {
        let (d, s) = setup(&Curve::starfish());
        let opts = CenterOptions {
            radius_factor: 6.0,
            max_rounds: 1,
            ..CenterOptions::default()
        };
        assert!(matches!(
            place_centers(&d, s, &[Side::Exterior], opts),
            Err(QbxError::ClearanceUnachievable { .. })
        ));
    }
}
