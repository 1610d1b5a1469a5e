//! Exact planar geometry kernel: primitive integer directions, open
//! half-planes with rational anchors, circular order on S^1, arcs and
//! annotated circle partitions, plus a small convex feasibility solver.
//!
//! No predicate in this module touches floating point.

use crate::rational::{qi, Q};
use num_traits::Zero;
use num_integer::Integer;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GeomError {
    #[error("direction vector must be nonzero")]
    ZeroDirection,
    #[error("mediant requires distinct directions spanning less than pi")]
    BadMediant,
    #[error("inconsistent circle partition: {0}")]
    BadPartition(String),
}

/// Primitive integer vector identifying a rational direction on S^1.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dir {
    pub dx: i64,
    pub dy: i64,
}

impl fmt::Debug for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.dx, self.dy)
    }
}

impl Dir {
    /// Reduce (dx,dy) to its primitive representative.
    pub fn new(dx: i64, dy: i64) -> Result<Dir, GeomError> {
        if dx == 0 && dy == 0 {
            return Err(GeomError::ZeroDirection);
        }
        let g = dx.abs().gcd(&dy.abs());
        Ok(Dir { dx: dx / g, dy: dy / g })
    }

    /// Panicking constructor for literals known to be nonzero.
    pub fn d(dx: i64, dy: i64) -> Dir {
        Dir::new(dx, dy).expect("nonzero direction literal")
    }

    pub fn antipode(self) -> Dir {
        Dir { dx: -self.dx, dy: -self.dy }
    }

    /// Counterclockwise rotation by pi/2.
    pub fn perp(self) -> Dir {
        Dir { dx: -self.dy, dy: self.dx }
    }

    /// Squared Euclidean norm, exact.
    pub fn norm_sq(self) -> i128 {
        let (x, y) = (self.dx as i128, self.dy as i128);
        x * x + y * y
    }
}

/// Exact cross product a x b as i128.
pub fn cross(a: Dir, b: Dir) -> i128 {
    a.dx as i128 * b.dy as i128 - a.dy as i128 * b.dx as i128
}

/// Exact dot product of two directions.
pub fn dot_dir(a: Dir, b: Dir) -> i128 {
    a.dx as i128 * b.dx as i128 + a.dy as i128 * b.dy as i128
}

/// Total counterclockwise order from the reference direction (1,0).
///
/// A direction in the upper half (angle in [0,pi)) precedes every direction
/// in the lower half; within a half the exact cross product decides.
pub fn circular_compare(a: Dir, b: Dir) -> Ordering {
    if a == b {
        return Ordering::Equal;
    }
    let half = |d: Dir| -> u8 {
        // 0 for angle in [0,pi), 1 for [pi,2pi)
        if d.dy > 0 || (d.dy == 0 && d.dx > 0) {
            0
        } else {
            1
        }
    };
    match half(a).cmp(&half(b)) {
        Ordering::Equal => {
            // Same open half-turn: positive cross means a precedes b.
            if cross(a, b) > 0 {
                Ordering::Less
            } else {
                Ordering::Greater
            }
        }
        other => other,
    }
}

/// Mediant of two directions: the primitive reduction of their sum.
/// Requires the ccw arc from a to b to span strictly less than pi.
pub fn mediant_direction(a: Dir, b: Dir) -> Result<Dir, GeomError> {
    if a == b || cross(a, b) <= 0 {
        return Err(GeomError::BadMediant);
    }
    Dir::new(a.dx + b.dx, a.dy + b.dy).map_err(|_| GeomError::BadMediant)
}

/// Class of the ccw angle from `base` to `d` in [0, 2pi).
/// 0: equal; 1: (0,pi); 2: exactly pi; 3: (pi,2pi).
fn delta_class(base: Dir, d: Dir) -> u8 {
    if base == d {
        return 0;
    }
    let c = cross(base, d);
    if c > 0 {
        1
    } else if c == 0 {
        2
    } else {
        3
    }
}

/// Compare ccw angular offsets from `base`: is delta(base,a) < delta(base,b)?
pub fn ccw_before(base: Dir, a: Dir, b: Dir) -> bool {
    let (ca, cb) = (delta_class(base, a), delta_class(base, b));
    if ca != cb {
        return ca < cb;
    }
    if ca == 0 || ca == 2 {
        return false; // identical offsets
    }
    cross(a, b) > 0
}

/// True iff d lies strictly inside the open ccw arc (s, e), s != e.
pub fn strictly_inside_arc(s: Dir, e: Dir, d: Dir) -> bool {
    if d == s || d == e {
        return false;
    }
    ccw_before(s, d, e)
}

/// True iff the ccw angle from a to b is strictly greater than pi/2.
pub fn ccw_gap_exceeds_quarter(a: Dir, b: Dir) -> bool {
    let c = cross(a, b);
    let d = dot_dir(a, b);
    // delta in (pi/2, pi): c>0, d<0; delta >= pi: c<=0 with a!=b.
    if a == b {
        return false;
    }
    (c > 0 && d < 0) || c < 0 || (c == 0 && d < 0)
}

/// A rational point.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct QPoint {
    pub x: Q,
    pub y: Q,
}

impl fmt::Debug for QPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

impl QPoint {
    pub fn new(x: Q, y: Q) -> QPoint {
        QPoint { x, y }
    }

    pub fn from_site(p: (i64, i64)) -> QPoint {
        QPoint { x: qi(p.0 as i128), y: qi(p.1 as i128) }
    }

    pub fn sub(self, o: QPoint) -> QPoint {
        QPoint { x: self.x - o.x, y: self.y - o.y }
    }

    pub fn add(self, o: QPoint) -> QPoint {
        QPoint { x: self.x + o.x, y: self.y + o.y }
    }

    /// Squared Euclidean distance, exact.
    pub fn dist_sq(self, o: QPoint) -> Q {
        let dx = self.x - o.x;
        let dy = self.y - o.y;
        dx * dx + dy * dy
    }
}

/// Inner product of a direction with a rational point.
pub fn dot(d: Dir, p: QPoint) -> Q {
    qi(d.dx as i128) * p.x + qi(d.dy as i128) * p.y
}

/// The unique point p with <d1,p> = t1 and <d2,p> = t2 (d1 not parallel d2).
pub fn point_from_thresholds(d1: Dir, t1: Q, d2: Dir, t2: Q) -> Option<QPoint> {
    let det = cross(d1, d2);
    if det == 0 {
        return None;
    }
    // Solve [d1x d1y; d2x d2y] p = (t1,t2).
    let det = qi(det);
    let x = (t1 * qi(d2.dy as i128) - t2 * qi(d1.dy as i128)) / det;
    let y = (t2 * qi(d1.dx as i128) - t1 * qi(d2.dx as i128)) / det;
    Some(QPoint { x, y })
}

/// Open half-plane H = {p : <normal, p - anchor> < 0}.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct HalfPlane {
    pub normal: Dir,
    pub anchor: QPoint,
}

impl HalfPlane {
    pub fn new(normal: Dir, anchor: QPoint) -> HalfPlane {
        HalfPlane { normal, anchor }
    }

    /// Threshold form: membership(p) iff <normal,p> < threshold().
    pub fn threshold(&self) -> Q {
        dot(self.normal, self.anchor)
    }

    pub fn contains(&self, p: QPoint) -> bool {
        dot(self.normal, p) < self.threshold()
    }

    pub fn contains_site(&self, s: (i64, i64)) -> bool {
        self.contains(QPoint::from_site(s))
    }
}

pub fn halfplane_contains(h: &HalfPlane, p: QPoint) -> bool {
    h.contains(p)
}

/// Half-open integer window [x0,x1) x [y0,y1) with an exactness margin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Window {
    pub x0: i64,
    pub x1: i64,
    pub y0: i64,
    pub y1: i64,
    pub margin: i64,
}

impl Window {
    pub fn new(x0: i64, x1: i64, y0: i64, y1: i64, margin: i64) -> Window {
        assert!(x1 > x0 && y1 > y0 && margin >= 0, "degenerate window");
        Window { x0, x1, y0, y1, margin }
    }

    pub fn centered(half: i64, margin: i64) -> Window {
        Window::new(-half, half + 1, -half, half + 1, margin)
    }

    pub fn contains(&self, s: (i64, i64)) -> bool {
        s.0 >= self.x0 && s.0 < self.x1 && s.1 >= self.y0 && s.1 < self.y1
    }

    /// True iff s is inside and at least `margin` sites from every edge.
    pub fn well_inside(&self, s: (i64, i64)) -> bool {
        s.0 >= self.x0 + self.margin
            && s.0 < self.x1 - self.margin
            && s.1 >= self.y0 + self.margin
            && s.1 < self.y1 - self.margin
    }
}

/// Closed/open arc from start ccw to end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Arc {
    pub start: Dir,
    pub end: Dir,
    pub closed_start: bool,
    pub closed_end: bool,
}

impl Arc {
    /// Degenerate arc = single direction.
    pub fn is_degenerate(&self) -> bool {
        self.start == self.end && self.closed_start && self.closed_end
    }

    pub fn contains(&self, d: Dir) -> bool {
        if d == self.start {
            return self.closed_start;
        }
        if d == self.end {
            return self.closed_end;
        }
        if self.start == self.end {
            // Degenerate arcs hold only their endpoint.
            return false;
        }
        strictly_inside_arc(self.start, self.end, d)
    }
}

/// One representative strictly inside each ccw gap (d_i, d_{i+1}).
///
/// Works for gaps of any positive length: mediant when the gap is below pi,
/// a quarter-turn otherwise.
pub fn gap_representative(a: Dir, b: Dir) -> Dir {
    if a != b && cross(a, b) > 0 {
        mediant_direction(a, b).expect("gap below pi")
    } else {
        // Gap of pi or more (or full circle when a == b): pi/2 fits inside.
        a.perp()
    }
}

/// Sort directions into strict ccw order starting from (1,0), deduplicated.
pub fn sort_ccw(dirs: &[Dir]) -> Vec<Dir> {
    let mut v: Vec<Dir> = dirs.to_vec();
    v.sort_by(|a, b| circular_compare(*a, *b));
    v.dedup();
    v
}

/// Annotation values used by stability/difficulty scans.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Value {
    /// Exactly known finite value.
    Fin(u32),
    /// Unresolved; known to be strictly greater than the payload.
    Unknown(u32),
    Inf,
}

impl Value {
    pub fn sup(self, other: Value) -> Value {
        use Value::*;
        match (self, other) {
            (Inf, _) | (_, Inf) => Inf,
            (Unknown(a), Unknown(b)) => Unknown(a.max(b)),
            (Unknown(a), Fin(b)) | (Fin(b), Unknown(a)) => Unknown(a.max(b)),
            (Fin(a), Fin(b)) => Fin(a.max(b)),
        }
    }

    pub fn inf(self, other: Value) -> Value {
        use Value::*;
        match (self, other) {
            (Inf, x) | (x, Inf) => x,
            (Fin(a), Fin(b)) => Fin(a.min(b)),
            // An Unknown(l) value lies somewhere in (l, inf].
            (Unknown(a), Unknown(b)) => Unknown(a.min(b)),
            (Unknown(l), Fin(k)) | (Fin(k), Unknown(l)) => {
                if k <= l {
                    Fin(k)
                } else {
                    Unknown(l)
                }
            }
        }
    }
}

/// Annotated partition of S^1: boundary directions carry point values, the
/// open gap after dirs[i] (ccw, wrapping) carries gap_vals[i]. With no
/// boundary directions the whole circle carries `whole`.
#[derive(Clone, Debug)]
pub struct CirclePartition {
    pub dirs: Vec<Dir>,
    pub point_vals: Vec<Value>,
    pub gap_vals: Vec<Value>,
    pub whole: Option<Value>,
}

impl CirclePartition {
    pub fn uniform(v: Value) -> CirclePartition {
        CirclePartition { dirs: vec![], point_vals: vec![], gap_vals: vec![], whole: Some(v) }
    }

    pub fn new(
        cells: Vec<(Dir, Value)>,
        gaps: Vec<Value>,
    ) -> Result<CirclePartition, GeomError> {
        if cells.is_empty() {
            return Err(GeomError::BadPartition("no boundary directions".into()));
        }
        if cells.len() != gaps.len() {
            return Err(GeomError::BadPartition("gap count mismatch".into()));
        }
        let sorted = sort_ccw(&cells.iter().map(|c| c.0).collect::<Vec<_>>());
        if sorted.len() != cells.len() {
            return Err(GeomError::BadPartition("duplicate directions".into()));
        }
        // Reorder the annotation to the sorted order.
        let mut point_vals = Vec::with_capacity(cells.len());
        let mut gap_vals = Vec::with_capacity(cells.len());
        for d in &sorted {
            let idx = cells.iter().position(|c| c.0 == *d).unwrap();
            point_vals.push(cells[idx].1);
            gap_vals.push(gaps[idx]);
        }
        Ok(CirclePartition { dirs: sorted, point_vals, gap_vals, whole: None })
    }

    fn gap_rep(&self, i: usize) -> Dir {
        let a = self.dirs[i];
        let b = self.dirs[(i + 1) % self.dirs.len()];
        if self.dirs.len() == 1 {
            // The single gap is the whole circle minus one point.
            a.perp()
        } else {
            gap_representative(a, b)
        }
    }

    /// Sup of annotations over the open semicircle {u : <c,u> < 0}
    /// (closed = true includes the two endpoint directions).
    pub fn semicircle_sup(&self, c: Dir, closed: bool) -> Value {
        let member = |d: Dir| -> bool {
            let ip = dot_dir(c, d);
            ip < 0 || (closed && ip == 0)
        };
        if let Some(w) = self.whole {
            return w;
        }
        let mut best: Option<Value> = None;
        let mut push = |v: Value| {
            best = Some(match best {
                None => v,
                Some(b) => b.sup(v),
            });
        };
        for (i, d) in self.dirs.iter().enumerate() {
            if member(*d) {
                push(self.point_vals[i]);
            }
        }
        for i in 0..self.dirs.len() {
            let a = self.dirs[i];
            let b = self.dirs[(i + 1) % self.dirs.len()];
            // The gap intersects the open semicircle iff one of the cell
            // representatives of the refinement by {a, b, perp(c), -perp(c)}
            // lies in both. Endpoint directions of the semicircle are the
            // only places membership can change inside the gap.
            let mut cands = vec![self.gap_rep(i)];
            for w in [c.perp(), c.perp().antipode()] {
                if self.dirs.len() == 1 {
                    if w != a {
                        cands.push(w); // inside the full-minus-point gap
                    }
                } else if strictly_inside_arc(a, b, w) {
                    // Representatives on each side of w within the gap.
                    cands.push(gap_representative(a, w));
                    cands.push(gap_representative(w, b));
                }
            }
            let in_gap = |d: Dir| -> bool {
                if self.dirs.len() == 1 {
                    d != a
                } else {
                    strictly_inside_arc(a, b, d)
                }
            };
            // Strict membership inside the open gap: the closed flag only
            // matters at partition points and at semicircle endpoints that
            // coincide with them, both handled above. Inside a gap, closed
            // endpoints of the semicircle contribute iff the gap reaches
            // them, which the refined representatives detect.
            if cands.iter().any(|d| in_gap(*d) && dot_dir(c, *d) < 0) {
                push(self.gap_vals[i]);
            } else if closed {
                // A gap can touch a closed semicircle exactly at an endpoint
                // direction of the semicircle lying inside the gap.
                for w in [c.perp(), c.perp().antipode()] {
                    if in_gap(w) {
                        push(self.gap_vals[i]);
                    }
                }
            }
        }
        best.unwrap_or(Value::Fin(0))
    }
}

/// Linear constraint <normal, p> (< | <=) threshold.
#[derive(Clone, Copy, Debug)]
pub struct LinCon {
    pub normal: Dir,
    pub threshold: Q,
    pub strict: bool,
}

impl LinCon {
    pub fn lt(normal: Dir, threshold: Q) -> LinCon {
        LinCon { normal, threshold, strict: true }
    }

    pub fn le(normal: Dir, threshold: Q) -> LinCon {
        LinCon { normal, threshold, strict: false }
    }

    /// Complement constraint: <n,p> >= t, i.e. <-n,p> <= -t.
    pub fn ge(normal: Dir, threshold: Q) -> LinCon {
        LinCon { normal: normal.antipode(), threshold: -threshold, strict: false }
    }

    pub fn holds(&self, p: QPoint) -> bool {
        let v = dot(self.normal, p);
        if self.strict {
            v < self.threshold
        } else {
            v <= self.threshold
        }
    }

    fn holds_closed(&self, p: QPoint) -> bool {
        dot(self.normal, p) <= self.threshold
    }

    fn on_line(&self, p: QPoint) -> bool {
        dot(self.normal, p) == self.threshold
    }
}

/// Exact feasibility of a system of half-plane constraints whose closed
/// relaxation is bounded (the callers guarantee constraint normals that
/// positively span the plane). Decision: the closed polytope is nonempty
/// and not contained in the boundary line of any strict constraint.
pub fn feasible(cons: &[LinCon]) -> bool {
    let mut witnesses: Vec<QPoint> = Vec::new();
    for i in 0..cons.len() {
        for j in (i + 1)..cons.len() {
            if let Some(p) =
                point_from_thresholds(cons[i].normal, cons[i].threshold, cons[j].normal, cons[j].threshold)
            {
                if cons.iter().all(|c| c.holds_closed(p)) {
                    witnesses.push(p);
                }
            }
        }
    }
    if witnesses.is_empty() {
        return false;
    }
    // Strict point: if some witness satisfies everything strictly we are done.
    if witnesses.iter().any(|p| cons.iter().all(|c| c.holds(*p))) {
        return true;
    }
    // The closed polytope P is the convex hull of (a superset of) these
    // witnesses. P meets the open region iff P is not contained in the
    // boundary line of any violated strict constraint, and no single line
    // can carry P unless all witnesses are collinear with it.
    for c in cons.iter().filter(|c| c.strict) {
        if witnesses.iter().all(|p| c.on_line(*p)) {
            return false;
        }
    }
    // P is full-dimensional relative to every strict line it touches, and
    // midpoints of witnesses off each line realise strict feasibility.
    // Construct an interior candidate: average of all witnesses.
    let n = qi(witnesses.len() as i128);
    let mut cx = Q::zero();
    let mut cy = Q::zero();
    for p in &witnesses {
        cx = cx + p.x;
        cy = cy + p.y;
    }
    let centroid = QPoint::new(cx / n, cy / n);
    if cons.iter().all(|c| c.holds(centroid)) {
        return true;
    }
    // Centroid still on some strict line: P is a segment lying inside that
    // line, which the collinearity test above would have caught; remaining
    // cases are genuinely empty.
    false
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::q;

    #[test]
    fn halfplane_examples() {
        let h = HalfPlane::new(Dir::d(1, 0), QPoint::from_site((0, 0)));
        assert!(h.contains(QPoint::from_site((-1, 0))));
        assert!(!h.contains(QPoint::from_site((0, 5))));
        let h2 = HalfPlane::new(Dir::d(-1, 1), QPoint::from_site((0, 0)));
        assert!(h2.contains(QPoint::from_site((0, -1))));
    }

    #[test]
    fn halfplane_scale_invariant() {
        // Same predicate whether the normal is reduced from (3,0) or given
        // as (1,0).
        let h = HalfPlane::new(Dir::new(3, 0).unwrap(), QPoint::from_site((0, 0)));
        assert_eq!(h.normal, Dir::d(1, 0));
        assert!(h.contains(QPoint::new(q(-1, 7), qi(3))));
    }

    #[test]
    fn circular_compare_examples() {
        assert_eq!(circular_compare(Dir::d(1, 0), Dir::d(0, 1)), Ordering::Less);
        assert_eq!(circular_compare(Dir::d(-1, 0), Dir::d(-1, 0)), Ordering::Equal);
        assert_eq!(circular_compare(Dir::d(1, 1), Dir::d(2, 1)), Ordering::Greater);
        // Quadrant walk.
        let walk = [
            Dir::d(1, 0),
            Dir::d(2, 1),
            Dir::d(1, 1),
            Dir::d(0, 1),
            Dir::d(-1, 1),
            Dir::d(-1, 0),
            Dir::d(-1, -1),
            Dir::d(0, -1),
            Dir::d(1, -1),
        ];
        for w in walk.windows(2) {
            assert_eq!(circular_compare(w[0], w[1]), Ordering::Less, "{:?}", w);
        }
    }

    #[test]
    fn circular_compare_total_order() {
        let mut rng = 1234u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as i64 % 21) - 10
        };
        let mut dirs = Vec::new();
        while dirs.len() < 60 {
            let (x, y) = (next(), next());
            if let Ok(d) = Dir::new(x, y) {
                dirs.push(d);
            }
        }
        for &a in &dirs {
            for &b in &dirs {
                let ab = circular_compare(a, b);
                let ba = circular_compare(b, a);
                assert_eq!(ab, ba.reverse());
                for &c in &dirs {
                    if ab == Ordering::Less && circular_compare(b, c) == Ordering::Less {
                        assert_eq!(circular_compare(a, c), Ordering::Less);
                    }
                }
            }
        }
    }

    #[test]
    fn mediant_examples() {
        assert_eq!(mediant_direction(Dir::d(1, 0), Dir::d(0, 1)).unwrap(), Dir::d(1, 1));
        assert_eq!(mediant_direction(Dir::d(1, 0), Dir::d(1, 1)).unwrap(), Dir::d(2, 1));
        assert!(mediant_direction(Dir::d(1, 0), Dir::d(-1, 0)).is_err());
        assert!(mediant_direction(Dir::d(1, 0), Dir::d(1, 0)).is_err());
    }

    #[test]
    fn mediant_strictly_inside() {
        let mut rng = 99u64;
        let mut next = || {
            rng = rng.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((rng >> 33) as i64 % 15) - 7
        };
        let mut checked = 0;
        while checked < 1000 {
            let (a, b) = (Dir::new(next(), next()), Dir::new(next(), next()));
            if let (Ok(a), Ok(b)) = (a, b) {
                if a != b && cross(a, b) > 0 {
                    let m = mediant_direction(a, b).unwrap();
                    assert!(strictly_inside_arc(a, b, m), "{a:?} {b:?} {m:?}");
                    checked += 1;
                }
            }
        }
    }

    #[test]
    fn quarter_gap_classifier() {
        assert!(!ccw_gap_exceeds_quarter(Dir::d(1, 0), Dir::d(0, 1))); // exactly pi/2
        assert!(ccw_gap_exceeds_quarter(Dir::d(1, 0), Dir::d(-1, 1)));
        assert!(ccw_gap_exceeds_quarter(Dir::d(1, 0), Dir::d(-1, 0))); // pi
        assert!(ccw_gap_exceeds_quarter(Dir::d(1, 0), Dir::d(0, -1))); // 3pi/2
        assert!(!ccw_gap_exceeds_quarter(Dir::d(1, 0), Dir::d(2, 1)));
    }

    #[test]
    fn partition_semicircle_sup() {
        // Everything zero.
        let p = CirclePartition::uniform(Value::Fin(0));
        assert_eq!(p.semicircle_sup(Dir::d(3, -2), false), Value::Fin(0));

        // Duarte-like annotation: closed stable arc (0,1)..(0,-1) through
        // (-1,0) at Inf, isolated (1,0) at 1, open side gaps unstable (0).
        let cells = vec![
            (Dir::d(1, 0), Value::Fin(1)),
            (Dir::d(0, 1), Value::Inf),
            (Dir::d(0, -1), Value::Inf),
        ];
        // Gap after (1,0) is ((1,0),(0,1)) unstable; after (0,1) is the arc
        // interior; after (0,-1) is unstable.
        let gaps = vec![Value::Fin(0), Value::Inf, Value::Fin(0)];
        let p = CirclePartition::new(cells, gaps).unwrap();
        assert_eq!(p.semicircle_sup(Dir::d(-1, 0), false), Value::Fin(1));
        assert_eq!(p.semicircle_sup(Dir::d(1, 0), false), Value::Inf);
        // Closed semicircle pointed at (-1,0) picks up the endpoints (0,+-1).
        assert_eq!(p.semicircle_sup(Dir::d(-1, 0), true), Value::Inf);
    }

    #[test]
    fn value_lattice() {
        use Value::*;
        assert_eq!(Fin(1).sup(Inf), Inf);
        assert_eq!(Fin(1).inf(Unknown(1)), Fin(1));
        assert_eq!(Fin(2).inf(Unknown(1)), Unknown(1));
        assert_eq!(Unknown(3).sup(Fin(5)), Unknown(5));
        assert_eq!(Fin(2).inf(Fin(3)), Fin(2));
    }

    #[test]
    fn feasibility_triangle() {
        // Open triangle x>0, y>0, x+y<1.
        let cons = vec![
            LinCon::ge(Dir::d(1, 0), qi(0)),
            LinCon::ge(Dir::d(0, 1), qi(0)),
            LinCon::lt(Dir::d(1, 1), qi(1)),
        ];
        // ge() produces closed >=; make them strict manually for this test.
        let mut strict = cons.clone();
        strict[0].strict = true;
        strict[1].strict = true;
        assert!(feasible(&strict));
        // Empty: x>0 and x<0.
        let empty = vec![
            LinCon::lt(Dir::d(1, 0), qi(0)),
            LinCon { normal: Dir::d(-1, 0), threshold: qi(0), strict: true },
            LinCon::lt(Dir::d(0, 1), qi(1)),
            LinCon { normal: Dir::d(0, -1), threshold: qi(1), strict: true },
        ];
        assert!(!feasible(&empty));
        // Degenerate to a line: x<=0, x>=0, 0<y<1 open in x? The region is
        // the open segment {0} x (0,1); nonempty.
        let seg = vec![
            LinCon::le(Dir::d(1, 0), qi(0)),
            LinCon::ge(Dir::d(1, 0), qi(0)),
            LinCon::lt(Dir::d(0, 1), qi(1)),
            LinCon { normal: Dir::d(0, -1), threshold: qi(0), strict: true },
        ];
        assert!(feasible(&seg));
        // Segment squashed onto a strict line: x<0 strict plus x>=0 -> empty.
        let sq = vec![
            LinCon::lt(Dir::d(1, 0), qi(0)),
            LinCon::ge(Dir::d(1, 0), qi(0)),
            LinCon::lt(Dir::d(0, 1), qi(1)),
            LinCon { normal: Dir::d(0, -1), threshold: qi(0), strict: true },
        ];
        assert!(!feasible(&sq));
    }

    #[test]
    fn arcs() {
        let a = Arc {
            start: Dir::d(0, 1),
            end: Dir::d(0, -1),
            closed_start: true,
            closed_end: true,
        };
        assert!(a.contains(Dir::d(-1, 0)));
        assert!(a.contains(Dir::d(0, 1)));
        assert!(!a.contains(Dir::d(1, 0)));
        assert!(!a.contains(Dir::d(1, 1)));
    }
}
