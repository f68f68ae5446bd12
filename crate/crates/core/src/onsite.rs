//! Onsite certificates: the expanded Apollonius disk of a pursuer-evader pair plus
//! the tangent triangle back to the pursuer must be obstacle-free and avoid the goal.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Disk, FreeSpace, Point2, Polygon, Region, EPS};

/// Points the evader reaches no later than the pursuer.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ApolloniusDisk {
    pub center: Point2,
    pub radius: f64,
}

pub fn apollonius(pursuer: Point2, evader: Point2, alpha: f64) -> Result<ApolloniusDisk> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::DegenerateInput(format!("speed ratio {alpha} must exceed 1")));
    }
    let a2 = alpha * alpha;
    let center = (evader * a2 - pursuer) / (a2 - 1.0);
    let radius = alpha * pursuer.dist(evader) / (a2 - 1.0);
    Ok(ApolloniusDisk { center, radius })
}

/// Triangle from the pursuer to its two tangent points on the expanded disk,
/// united with that disk.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsiteRegion {
    pub pursuer: Point2,
    pub tangents: [Point2; 2],
    pub disk: ApolloniusDisk,
    pub expanded_radius: f64,
}

impl OnsiteRegion {
    pub fn expanded_disk(&self) -> Disk {
        Disk { center: self.disk.center, radius: self.expanded_radius }
    }

    pub fn triangle(&self) -> Result<Polygon> {
        Polygon::new(vec![self.pursuer, self.tangents[0], self.tangents[1]])
    }

    pub fn snapshot(&self) -> OnsiteSnapshot {
        OnsiteSnapshot { center: self.disk.center, expanded_radius: self.expanded_radius }
    }
}

pub fn onsite_region(pursuer: Point2, evader: Point2, alpha: f64, delta: f64) -> Result<OnsiteRegion> {
    let disk = apollonius(pursuer, evader, alpha)?;
    let rd = disk.radius + delta;
    let v = pursuer - disk.center;
    let l1 = rd * rd;
    let h = v.norm_sq() - l1;
    if h <= EPS {
        return Err(Error::RegionDegenerate);
    }
    let l2 = rd * h.sqrt();
    let n2 = v.norm_sq();
    let t1 = disk.center + (v * l1 + v.perp_cw() * l2) / n2;
    let t2 = disk.center + (v * l1 - v.perp_cw() * l2) / n2;
    Ok(OnsiteRegion { pursuer, tangents: [t1, t2], disk, expanded_radius: rd })
}

/// Obstacle-free, inside the arena, and the expanded disk misses the goal.
pub fn check_onsite(pursuer: Point2, evader: Point2, alpha: f64, delta: f64, space: &FreeSpace, goal: &Polygon) -> bool {
    let Ok(region) = onsite_region(pursuer, evader, alpha, delta) else {
        return false;
    };
    region_ok(&region, space, goal)
}

fn region_ok(region: &OnsiteRegion, space: &FreeSpace, goal: &Polygon) -> bool {
    let disk = region.expanded_disk();
    if goal.distance(disk.center) <= disk.radius {
        return false;
    }
    let Ok(tri) = region.triangle() else {
        return false;
    };
    space.region_free(&Region::Disk(disk)) && space.region_free(&Region::Polygon(tri))
}

/// Every member of the coalition holds its own onsite certificate.
pub fn check_onsite_coalition(
    pursuers: &[Point2],
    evader: Point2,
    alpha: &[f64],
    delta: f64,
    space: &FreeSpace,
    goal: &Polygon,
) -> bool {
    !pursuers.is_empty() && pursuers.iter().zip(alpha).all(|(&p, &a)| check_onsite(p, evader, a, delta, space, goal))
}

/// Apollonius center and expanded radius frozen when the pursuer engages.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct OnsiteSnapshot {
    pub center: Point2,
    pub expanded_radius: f64,
}

/// Heading that keeps the current Apollonius disk inside the engagement snapshot.
/// Falls back to pure pursuit when the steering vector vanishes.
pub fn onsite_control(pursuer: Point2, evader: Point2, alpha: f64, snapshot: &OnsiteSnapshot) -> Result<Point2> {
    let now = apollonius(pursuer, evader, alpha)?;
    let Some(los) = (evader - pursuer).normalized(EPS) else {
        return Ok(Point2::ORIGIN);
    };
    let z = los * (alpha * (snapshot.expanded_radius - now.radius)) + now.center - snapshot.center;
    Ok(z.normalized(1e-12).unwrap_or(los))
}

/// Upper bound on the capture time used by the onsite tests.
pub fn capture_time_bound(pursuer: Point2, evader: Point2, pursuer_speed: f64, evader_speed: f64) -> f64 {
    10.0 * pursuer.dist(evader) / (pursuer_speed - evader_speed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::pt;

    fn f1() -> (FreeSpace, Polygon) {
        let arena = Polygon::rect(pt(0.0, 0.0), pt(10.0, 10.0)).unwrap();
        let o1 = Polygon::rect(pt(2.0, 2.0), pt(3.0, 3.0)).unwrap();
        (FreeSpace::new(arena, vec![o1]), Polygon::rect(pt(4.0, 4.0), pt(6.0, 6.0)).unwrap())
    }

    #[test]
    fn apollonius_of_vertical_pair() {
        let d = apollonius(pt(0.0, 0.0), pt(0.0, 1.0), 3.0).unwrap();
        assert!(d.center.dist(pt(0.0, 9.0 / 8.0)) < 1e-12);
        assert!((d.radius - 3.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn tangent_points_of_unit_example() {
        let r = onsite_region(pt(0.0, 0.0), pt(3.0, 0.0), 2.0, 0.0).unwrap();
        let want = [pt(3.0, 3f64.sqrt()), pt(3.0, -3f64.sqrt())];
        for t in want {
            assert!(r.tangents.iter().any(|x| x.dist(t) < 1e-12), "{t}");
        }
        for t in r.tangents {
            assert!(((t - r.disk.center).dot(t - r.pursuer)).abs() < 1e-9);
        }
    }

    #[test]
    fn onsite_checks_on_reference_field() {
        let (space, goal) = f1();
        assert!(check_onsite(pt(7.0, 8.0), pt(8.0, 8.0), 2.0, 0.05, &space, &goal));
        assert!(!check_onsite(pt(7.0, 8.0), pt(6.2, 6.8), 2.0, 0.05, &space, &goal));
        assert!(!check_onsite(pt(0.5, 2.5), pt(1.6, 2.5), 2.0, 0.05, &space, &goal));
    }

    #[test]
    fn engulfing_margin_is_degenerate() {
        assert_eq!(onsite_region(pt(0.0, 0.0), pt(1.0, 0.0), 2.0, 5.0), Err(Error::RegionDegenerate));
    }
}
