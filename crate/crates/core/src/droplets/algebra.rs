//! Span, cut and size on droplets.

use super::shapes::{diam_sq, droplet_vertices, Cdyd, Droplet, Dyd, ShapeError};
use super::{BoundaryRegion, DropletConstants};
use crate::geom::dot;
use crate::rational::{sqrt_upper, Q};

/// Cut an uncut droplet against the boundary: same staircase, the v-wedge
/// replaced by the complement of the boundary region.
pub fn cut(d: &Dyd, boundary: &BoundaryRegion) -> Cdyd {
    Cdyd::new(d.direction_set(), boundary.clone(), d.corner_thresholds().to_vec())
        .expect("cut preserves the nonempty corner list")
}

/// Cut on either shape; identity on an already cut droplet.
pub fn cut_droplet(d: &Droplet, boundary: &BoundaryRegion) -> Cdyd {
    match d {
        Droplet::Dyd(d) => cut(d, boundary),
        Droplet::Cdyd(c) => c.clone(),
    }
}

/// The minimal droplet of the common kind containing both operands.
///
/// Uncut with uncut stays uncut; any cut operand forces the result to be
/// cut against its boundary.
pub fn span(a: &Droplet, b: &Droplet) -> Result<Droplet, ShapeError> {
    if a.direction_set() != b.direction_set() {
        return Err(ShapeError::MixedDirections);
    }
    match (a, b) {
        (Droplet::Dyd(x), Droplet::Dyd(y)) => {
            let (a1x, a2x) = x.v_thresholds();
            let (a1y, a2y) = y.v_thresholds();
            let mut ys = x.corner_thresholds().to_vec();
            ys.extend_from_slice(y.corner_thresholds());
            Ok(Droplet::Dyd(Dyd::new(
                x.direction_set(),
                a1x.max(a1y),
                a2x.max(a2y),
                ys,
            )?))
        }
        (Droplet::Cdyd(x), Droplet::Cdyd(y)) => {
            if x.boundary() != y.boundary() {
                return Err(ShapeError::MixedDirections);
            }
            let mut ys = x.corner_thresholds().to_vec();
            ys.extend_from_slice(y.corner_thresholds());
            Ok(Droplet::Cdyd(Cdyd::new(x.direction_set(), x.boundary().clone(), ys)?))
        }
        (Droplet::Cdyd(x), Droplet::Dyd(y)) | (Droplet::Dyd(y), Droplet::Cdyd(x)) => {
            let yc = cut(y, x.boundary());
            span(&Droplet::Cdyd(x.clone()), &Droplet::Cdyd(yc))
        }
    }
}

/// Size of a droplet. Uncut: the extent of the projection transverse to
/// v1, measured by the raw inner product with rot90(v1) (a fixed scale per
/// direction set). Cut: diameter over C1, with the diameter rounded up to
/// the rational grid.
pub fn size(d: &Droplet, consts: &DropletConstants) -> Result<Q, ShapeError> {
    match d {
        Droplet::Dyd(dyd) => {
            let w = dyd.direction_set().v1.perp();
            let vs = droplet_vertices(d);
            if vs.is_empty() {
                return Ok(crate::rational::qi(0));
            }
            let mut lo = dot(w, vs[0]);
            let mut hi = lo;
            for v in &vs[1..] {
                let t = dot(w, *v);
                lo = lo.min(t);
                hi = hi.max(t);
            }
            Ok(hi - lo)
        }
        Droplet::Cdyd(c) => {
            if !c.is_connected() {
                return Err(ShapeError::Disconnected);
            }
            Ok(sqrt_upper(diam_sq(d)) / consts.c1)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::droplets::shapes::{droplet_contains, droplets_intersect};
    use crate::geom::QPoint;
    use crate::rational::qi;

    fn dirs() -> crate::bootstrap::DirectionSet {
        super::super::test_direction_set()
    }

    fn dyd(a1: i128, a2: i128, ys: &[(i128, i128)]) -> Droplet {
        Droplet::Dyd(
            Dyd::new(
                dirs(),
                qi(a1),
                qi(a2),
                ys.iter().map(|&(a, b)| (qi(a), qi(b))).collect(),
            )
            .unwrap(),
        )
    }

    #[test]
    fn span_idempotent_and_monotone() {
        let d = dyd(100, 100, &[(0, 20), (10, 0)]);
        assert_eq!(span(&d, &d).unwrap(), d);
        let big = dyd(200, 200, &[(30, 30)]);
        assert!(droplet_contains(&big, &d));
        assert_eq!(span(&d, &big).unwrap(), big);
    }

    #[test]
    fn span_contains_both_operands() {
        let a = dyd(100, 100, &[(0, 20)]);
        let b = dyd(90, 110, &[(10, 5)]);
        let s = span(&a, &b).unwrap();
        assert!(droplet_contains(&s, &a));
        assert!(droplet_contains(&s, &b));
    }

    #[test]
    fn span_commutative_associative() {
        let a = dyd(100, 100, &[(0, 20)]);
        let b = dyd(90, 110, &[(10, 5)]);
        let c = dyd(95, 105, &[(4, 12)]);
        assert_eq!(span(&a, &b).unwrap(), span(&b, &a).unwrap());
        let ab_c = span(&span(&a, &b).unwrap(), &c).unwrap();
        let a_bc = span(&a, &span(&b, &c).unwrap()).unwrap();
        assert_eq!(ab_c, a_bc);
    }

    #[test]
    fn cut_is_idempotent_and_distributes_over_span() {
        let s = dirs();
        let boundary = BoundaryRegion::cone(
            QPoint::from_site((0, 0)),
            s.u_prime,
            s.u_prime1,
            s.u_prime2,
        );
        let a = dyd(100, 100, &[(0, 20)]);
        let b = dyd(90, 110, &[(10, 5)]);
        let ca = Droplet::Cdyd(cut_droplet(&a, &boundary));
        assert_eq!(cut_droplet(&ca, &boundary), cut_droplet(&a, &boundary));
        // C(a) v b = C(a v b)
        let lhs = span(&ca, &b).unwrap();
        let rhs = Droplet::Cdyd(cut_droplet(&span(&a, &b).unwrap(), &boundary));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn quad_has_same_size() {
        let consts = DropletConstants::default();
        let d = dyd(100, 100, &[(0, 40), (20, 10), (35, -5)]);
        let Droplet::Dyd(inner) = &d else { unreachable!() };
        let q = Droplet::Dyd(inner.quad());
        assert_eq!(size(&d, &consts).unwrap(), size(&q, &consts).unwrap());
        assert!(size(&d, &consts).unwrap() > qi(0));
    }

    #[test]
    fn size_subadditive_on_intersecting_pairs() {
        let consts = DropletConstants::default();
        // Deterministic pseudo-random pairs.
        let mut state = 7u64;
        let mut next = |m: i128| -> i128 {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((state >> 33) as i128) % m
        };
        let mut tested = 0;
        while tested < 200 {
            let a = dyd(
                50 + next(50),
                50 + next(50),
                &[(next(30), 20 + next(20)), (10 + next(20), next(15))],
            );
            let b = dyd(
                50 + next(50),
                50 + next(50),
                &[(next(30), 20 + next(20)), (10 + next(20), next(15))],
            );
            if !droplets_intersect(&a, &b) {
                continue;
            }
            let s = span(&a, &b).unwrap();
            let (sa, sb, ss) = (
                size(&a, &consts).unwrap(),
                size(&b, &consts).unwrap(),
                size(&s, &consts).unwrap(),
            );
            assert!(ss <= sa + sb, "span size {ss} > {sa} + {sb}");
            tested += 1;
        }
    }

    #[test]
    fn mixed_direction_sets_rejected() {
        let a = dyd(100, 100, &[(0, 20)]);
        let mut other = dirs();
        other.v2 = crate::geom::Dir::d(1, 1);
        let b = Droplet::Dyd(Dyd::new(other, qi(10), qi(10), vec![(qi(0), qi(0))]).unwrap());
        assert_eq!(span(&a, &b), Err(ShapeError::MixedDirections));
    }
}
