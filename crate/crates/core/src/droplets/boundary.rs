//! The infected boundary region: a union of up to three open half-planes,
//! one "main" plane plus an optional pair of cone sides through a common
//! anchor.

use crate::geom::{dot, Dir, HalfPlane, QPoint};
use crate::rational::{qi, Q};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BoundaryRegion {
    planes: Vec<HalfPlane>,
}

impl BoundaryRegion {
    /// Single half-plane boundary.
    pub fn halfplane(h: HalfPlane) -> BoundaryRegion {
        BoundaryRegion { planes: vec![h] }
    }

    /// Cone boundary: H_{u'} through the origin plus the two side planes
    /// through a0. The complement is the working domain.
    pub fn cone(a0: QPoint, u_prime: Dir, u_prime1: Dir, u_prime2: Dir) -> BoundaryRegion {
        BoundaryRegion {
            planes: vec![
                HalfPlane::new(u_prime, QPoint::from_site((0, 0))),
                HalfPlane::new(u_prime1, a0),
                HalfPlane::new(u_prime2, a0),
            ],
        }
    }

    /// Only the two side planes (the bar-boundary of the renormalised
    /// triangle).
    pub fn sides(a0: QPoint, u_prime1: Dir, u_prime2: Dir) -> BoundaryRegion {
        BoundaryRegion {
            planes: vec![HalfPlane::new(u_prime1, a0), HalfPlane::new(u_prime2, a0)],
        }
    }

    pub fn from_planes(planes: Vec<HalfPlane>) -> BoundaryRegion {
        assert!(!planes.is_empty() && planes.len() <= 3, "1..=3 half-planes");
        BoundaryRegion { planes }
    }

    pub fn planes(&self) -> &[HalfPlane] {
        &self.planes
    }

    pub fn contains(&self, p: QPoint) -> bool {
        self.planes.iter().any(|h| h.contains(p))
    }

    pub fn contains_site(&self, s: (i64, i64)) -> bool {
        self.contains(QPoint::from_site(s))
    }

    /// Exact test of d(p, boundary) > c for p outside the region.
    /// The distance to a union of half-planes is the minimum of the signed
    /// line distances, so the test is a conjunction.
    pub fn dist_exceeds(&self, p: QPoint, c: Q) -> bool {
        !self.contains(p)
            && self.planes.iter().all(|h| {
                let s = dot(h.normal, p) - h.threshold(); // >= 0 outside
                s * s > c * c * qi(h.normal.norm_sq())
            })
    }

    /// Exact d(p, boundary) <= c for p outside the region.
    pub fn dist_at_most(&self, p: QPoint, c: Q) -> bool {
        !self.contains(p)
            && self.planes.iter().any(|h| {
                let s = dot(h.normal, p) - h.threshold();
                s * s <= c * c * qi(h.normal.norm_sq())
            })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn halfplane_boundary_distance() {
        let b = BoundaryRegion::halfplane(HalfPlane::new(Dir::d(1, 0), QPoint::from_site((0, 0))));
        assert!(b.contains_site((-3, 7)));
        assert!(!b.contains_site((0, 7)));
        // d((5,0), {x<0}) = 5
        let p = QPoint::from_site((5, 0));
        assert!(b.dist_exceeds(p, qi(4)));
        assert!(!b.dist_exceeds(p, qi(5)));
        assert!(b.dist_at_most(p, qi(5)));
        assert!(!b.dist_at_most(p, q(49, 10)));
    }

    #[test]
    fn cone_membership() {
        // Main plane x<0; sides through (10,0): y > x - 10 side etc.
        let b = BoundaryRegion::cone(
            QPoint::from_site((10, 0)),
            Dir::d(-1, 0),
            Dir::d(-1, 1),
            Dir::d(-1, -1),
        );
        // Main: <(-1,0), p> < -0? -> x > 0 infected by main plane.
        assert!(b.contains_site((1, 0)));
        assert!(!b.contains_site((0, 0)));
        assert!(!b.contains_site((-5, 0)));
        // Side 1 at (10,0): <(-1,1),(p-(10,0))> < 0 -> (x-10) > y.
        assert!(b.contains_site((-20, -40))); // -30 > -40 via side 1
    }
}
