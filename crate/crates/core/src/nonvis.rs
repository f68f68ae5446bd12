//! Non-goal-visible certificates: the pursuer first walks to a goal-visible obstacle
//! vertex (the anchor) and must still hold a non-negative safe distance there
//! against every position the evader could have reached meanwhile.

use serde::{Deserialize, Serialize};

use crate::convexopt::solve_wavelet_program;
use crate::error::Result;
use crate::esp::{reach_sectors, DistanceField, EspGraph, EspPath};
use crate::geometry::{CircularSector, FreeSpace, Point2, Polygon, EPS};
use crate::goalvis::is_goal_visible;

pub fn goal_visible_obstacle_vertices(space: &FreeSpace, goal: &Polygon) -> Vec<Point2> {
    space
        .obstacles
        .iter()
        .flat_map(|o| o.vertices().iter().copied())
        .filter(|&v| space.contains(v) && is_goal_visible(v, space, goal))
        .collect()
}

/// Largest distance from `s` to a point of the sector.
pub fn max_sector_distance(sector: &CircularSector, s: Point2) -> f64 {
    let (a, b) = sector.arc_endpoints();
    let mut d = s.dist(sector.apex).max(s.dist(a)).max(s.dist(b));
    match (sector.apex - s).normalized(EPS) {
        Some(u) => {
            if sector.arc.contains(u.angle()) {
                d = d.max(s.dist(sector.apex + u * sector.radius));
            }
        }
        None => d = d.max(sector.radius),
    }
    d
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NonvisCertificate {
    pub anchor: Point2,
    /// Pursuer's shortest path to the anchor.
    pub path: EspPath,
    /// Evader travel budget while the pursuer walks the path.
    pub evader_budget: f64,
    pub sectors: Vec<CircularSector>,
    pub min_program_value: f64,
}

/// Tries anchors nearest-first; the first one whose every reach sector keeps the
/// relaxed evasion region off the goal yields the certificate.
pub fn check_nonvis_winning(
    graph: &EspGraph,
    pursuer_field: &DistanceField<'_>,
    evader_field: &DistanceField<'_>,
    alpha: f64,
    capture_radius: f64,
    goal: &Polygon,
    anchors: &[Point2],
) -> Result<Option<NonvisCertificate>> {
    let evader = evader_field.source();
    let mut order: Vec<(f64, Point2)> = anchors
        .iter()
        .map(|&s| (pursuer_field.distance_to(s), s))
        .filter(|(d, _)| d.is_finite())
        .collect();
    order.sort_by(|a, b| a.0.total_cmp(&b.0));
    let goal_dists: Vec<f64> = goal.vertices().iter().map(|&v| evader_field.distance_to(v)).collect();
    'anchors: for (dp, s) in order {
        if goal_dists.iter().any(|&de| alpha * de < dp) {
            continue;
        }
        let budget = dp / alpha;
        let sectors = reach_sectors(graph, evader, budget)?;
        let mut min_j = f64::INFINITY;
        for sector in &sectors {
            let d_k = max_sector_distance(sector, s);
            match solve_wavelet_program(sector, s, d_k, alpha, capture_radius, goal) {
                Ok(j) if j >= 0.0 => min_j = min_j.min(j),
                Ok(_) => continue 'anchors,
                Err(e) => {
                    log::debug!("anchor {s} dropped: {e}");
                    continue 'anchors;
                }
            }
        }
        let Some(path) = pursuer_field.path_to(s) else { continue };
        return Ok(Some(NonvisCertificate { anchor: s, path, evader_budget: budget, sectors, min_program_value: min_j }));
    }
    Ok(None)
}

/// Heading along the stored path toward the waypoint after `next`, advancing once
/// the current waypoint is within one step.
pub fn nonvis_control(cert: &NonvisCertificate, pursuer: Point2, next: &mut usize, step: f64) -> Point2 {
    let wps = &cert.path.waypoints;
    while *next < wps.len() && pursuer.dist(wps[*next]) <= step.max(EPS) {
        *next += 1;
    }
    match wps.get(*next) {
        Some(&w) => (w - pursuer).normalized(EPS).unwrap_or_default(),
        None => Point2::ORIGIN,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{pt, AngleRange};

    fn goal() -> Polygon {
        Polygon::rect(pt(4.0, 4.0), pt(6.0, 6.0)).unwrap()
    }

    fn space(obstacles: Vec<Polygon>) -> FreeSpace {
        FreeSpace::new(Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap(), obstacles)
    }

    #[test]
    fn half_disk_farthest_point() {
        let s = CircularSector::new(pt(0.0, 0.0), 1.0, AngleRange::new(-std::f64::consts::FRAC_PI_2, std::f64::consts::PI)).unwrap();
        assert!((max_sector_distance(&s, pt(-2.0, 0.0)) - 3.0).abs() < 1e-12);
        assert!((max_sector_distance(&s, pt(0.0, 0.0)) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn goal_visible_corners() {
        let o1 = Polygon::rect(pt(2.0, 2.0), pt(3.0, 3.0)).unwrap();
        let v = goal_visible_obstacle_vertices(&space(vec![o1]), &goal());
        // the corner facing away from the goal looks through its own square
        assert_eq!(v.len(), 3);
        assert!(!v.contains(&pt(2.0, 2.0)));
        let o2 = Polygon::rect(pt(4.0, 6.5), pt(6.0, 7.5)).unwrap();
        let v = goal_visible_obstacle_vertices(&space(vec![o2]), &goal());
        assert_eq!(v.len(), 2);
        assert!(v.contains(&pt(4.0, 6.5)) && v.contains(&pt(6.0, 6.5)));
    }

    #[test]
    fn pursuer_behind_slab_certifies_against_far_evader() {
        let o2 = Polygon::rect(pt(4.0, 6.5), pt(6.0, 7.5)).unwrap();
        let sp = space(vec![o2]);
        let g = goal();
        let graph = EspGraph::new(sp.clone());
        let anchors = goal_visible_obstacle_vertices(&sp, &g);
        let p = pt(5.0, 8.5);
        assert!(!is_goal_visible(p, &sp, &g));
        let e = pt(9.5, 0.5);
        let fp = graph.field(p).unwrap();
        let fe = graph.field(e).unwrap();
        let cert = check_nonvis_winning(&graph, &fp, &fe, 3.0, 0.05, &g, &anchors).unwrap();
        let cert = cert.expect("certificate");
        assert!(anchors.contains(&cert.anchor));
        assert!((cert.path.length - fp.distance_to(cert.anchor)).abs() < 1e-12);
        // an evader already beside the goal cannot be certified
        let near = pt(6.5, 5.0);
        let fe = graph.field(near).unwrap();
        assert!(check_nonvis_winning(&graph, &fp, &fe, 3.0, 0.05, &g, &anchors).unwrap().is_none());
    }
}
