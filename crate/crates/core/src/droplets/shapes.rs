//! The two droplet shapes.
//!
//! Internally both are kept in threshold form ("Y-form"): a droplet is
//! described by its convex-corner thresholds along u1 and u2, an antichain
//! with c1 strictly increasing and c2 strictly decreasing, plus for the
//! uncut shape the two v-thresholds of the v-corner. All region predicates
//! reduce to exact linear constraint systems.

use super::BoundaryRegion;
use crate::bootstrap::DirectionSet;
use crate::geom::{dot, feasible, point_from_thresholds, LinCon, QPoint};
use crate::rational::Q;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ShapeError {
    #[error("a droplet needs at least one convex corner")]
    NoCorners,
    #[error("operands use different direction sets")]
    MixedDirections,
    #[error("size is undefined for a disconnected cut droplet")]
    Disconnected,
    #[error("malformed droplet record: {0}")]
    BadRecord(String),
}

/// Reduce (c1, c2) threshold pairs to the canonical antichain: sorted with
/// c1 strictly increasing, c2 strictly decreasing, dominated pairs dropped.
fn canonical_antichain(mut ys: Vec<(Q, Q)>) -> Vec<(Q, Q)> {
    ys.sort_by(|a, b| a.0.cmp(&b.0).then(a.1.cmp(&b.1)));
    let mut out: Vec<(Q, Q)> = Vec::with_capacity(ys.len());
    for (c1, c2) in ys.into_iter().rev() {
        // Scanning by descending c1: keep iff c2 strictly beats everything
        // with larger (or equal) c1.
        match out.last() {
            Some(&(_, best_c2)) if c2 <= best_c2 => {}
            _ => out.push((c1, c2)),
        }
    }
    out.reverse();
    out
}

/// Uncut droplet: v-wedge intersected with the staircase union of
/// u-quadrants.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Dyd {
    s: DirectionSet,
    a1: Q,
    a2: Q,
    ys: Vec<(Q, Q)>,
}

/// Cut droplet: the staircase union of u-quadrants restricted to the
/// complement of the boundary region.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cdyd {
    s: DirectionSet,
    boundary: BoundaryRegion,
    ys: Vec<(Q, Q)>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Droplet {
    Dyd(Dyd),
    Cdyd(Cdyd),
}

impl Dyd {
    pub fn new(s: DirectionSet, a1: Q, a2: Q, ys: Vec<(Q, Q)>) -> Result<Dyd, ShapeError> {
        let ys = canonical_antichain(ys);
        if ys.is_empty() {
            return Err(ShapeError::NoCorners);
        }
        Ok(Dyd { s, a1, a2, ys })
    }

    pub fn direction_set(&self) -> DirectionSet {
        self.s
    }

    pub fn v_thresholds(&self) -> (Q, Q) {
        (self.a1, self.a2)
    }

    pub fn corner_thresholds(&self) -> &[(Q, Q)] {
        &self.ys
    }

    /// The v-corner x.
    pub fn v_corner(&self) -> QPoint {
        point_from_thresholds(self.s.v1, self.a1, self.s.v2, self.a2)
            .expect("v1, v2 not parallel")
    }

    /// The u-corner y of Q(D): maximal thresholds in both u-directions.
    pub fn u_corner(&self) -> QPoint {
        let c1 = self.ys.last().unwrap().0;
        let c2 = self.ys.first().unwrap().1;
        point_from_thresholds(self.s.u1, c1, self.s.u2, c2).expect("u1, u2 not parallel")
    }

    pub fn convex_corners(&self) -> Vec<QPoint> {
        self.ys
            .iter()
            .map(|&(c1, c2)| {
                point_from_thresholds(self.s.u1, c1, self.s.u2, c2)
                    .expect("u1, u2 not parallel")
            })
            .collect()
    }

    /// Concave corners between consecutive convex corners.
    pub fn concave_corners(&self) -> Vec<QPoint> {
        self.ys
            .windows(2)
            .map(|w| {
                point_from_thresholds(self.s.u1, w[0].0, self.s.u2, w[1].1)
                    .expect("u1, u2 not parallel")
            })
            .collect()
    }

    /// Rebuild from the corner ("X-form") description: v-corner, concave
    /// corners, u-corner.
    pub fn from_corners(
        s: DirectionSet,
        x: QPoint,
        concave: &[QPoint],
        u_corner: QPoint,
    ) -> Result<Dyd, ShapeError> {
        let a1 = dot(s.v1, x);
        let a2 = dot(s.v2, x);
        let c1_max = dot(s.u1, u_corner);
        let c2_max = dot(s.u2, u_corner);
        let mut cc: Vec<(Q, Q)> =
            concave.iter().map(|p| (dot(s.u1, *p), dot(s.u2, *p))).collect();
        cc.sort_by(|a, b| a.0.cmp(&b.0));
        let mut ys = Vec::with_capacity(cc.len() + 1);
        let mut prev_c2 = c2_max;
        for &(d1, d2) in &cc {
            ys.push((d1, prev_c2));
            prev_c2 = d2;
        }
        ys.push((c1_max, prev_c2));
        Dyd::new(s, a1, a2, ys)
    }

    /// Q(D): the bounding quadrilateral, itself a single-corner droplet.
    pub fn quad(&self) -> Dyd {
        let c1 = self.ys.last().unwrap().0;
        let c2 = self.ys.first().unwrap().1;
        Dyd { s: self.s, a1: self.a1, a2: self.a2, ys: vec![(c1, c2)] }
    }

    pub fn contains(&self, p: QPoint) -> bool {
        dot(self.s.v1, p) < self.a1
            && dot(self.s.v2, p) < self.a2
            && self
                .ys
                .iter()
                .any(|&(c1, c2)| dot(self.s.u1, p) < c1 && dot(self.s.u2, p) < c2)
    }

    pub fn contains_site(&self, s: (i64, i64)) -> bool {
        self.contains(QPoint::from_site(s))
    }

    /// Convex decomposition into open pieces, one per convex corner.
    pub fn pieces(&self) -> Vec<Vec<LinCon>> {
        self.ys
            .iter()
            .map(|&(c1, c2)| {
                vec![
                    LinCon::lt(self.s.v1, self.a1),
                    LinCon::lt(self.s.v2, self.a2),
                    LinCon::lt(self.s.u1, c1),
                    LinCon::lt(self.s.u2, c2),
                ]
            })
            .collect()
    }

    /// Convex cover of the complement of the open region.
    pub fn complement_pieces(&self) -> Vec<Vec<LinCon>> {
        let mut out = vec![
            vec![LinCon::ge(self.s.v1, self.a1)],
            vec![LinCon::ge(self.s.v2, self.a2)],
        ];
        out.extend(staircase_complement(&self.s, &self.ys));
        out
    }
}

impl Cdyd {
    pub fn new(
        s: DirectionSet,
        boundary: BoundaryRegion,
        ys: Vec<(Q, Q)>,
    ) -> Result<Cdyd, ShapeError> {
        let ys = canonical_antichain(ys);
        if ys.is_empty() {
            return Err(ShapeError::NoCorners);
        }
        Ok(Cdyd { s, boundary, ys })
    }

    pub fn direction_set(&self) -> DirectionSet {
        self.s
    }

    pub fn boundary(&self) -> &BoundaryRegion {
        &self.boundary
    }

    pub fn corner_thresholds(&self) -> &[(Q, Q)] {
        &self.ys
    }

    pub fn convex_corners(&self) -> Vec<QPoint> {
        self.ys
            .iter()
            .map(|&(c1, c2)| {
                point_from_thresholds(self.s.u1, c1, self.s.u2, c2)
                    .expect("u1, u2 not parallel")
            })
            .collect()
    }

    pub fn contains(&self, p: QPoint) -> bool {
        !self.boundary.contains(p)
            && self
                .ys
                .iter()
                .any(|&(c1, c2)| dot(self.s.u1, p) < c1 && dot(self.s.u2, p) < c2)
    }

    pub fn contains_site(&self, s: (i64, i64)) -> bool {
        self.contains(QPoint::from_site(s))
    }

    fn lambda_constraints(&self) -> Vec<LinCon> {
        self.boundary
            .planes()
            .iter()
            .map(|h| LinCon::ge(h.normal, h.threshold()))
            .collect()
    }

    /// Convex pieces: one quadrant per corner, clipped to the complement of
    /// every boundary half-plane.
    pub fn pieces(&self) -> Vec<Vec<LinCon>> {
        let lambda = self.lambda_constraints();
        self.ys
            .iter()
            .map(|&(c1, c2)| {
                let mut cons =
                    vec![LinCon::lt(self.s.u1, c1), LinCon::lt(self.s.u2, c2)];
                cons.extend(lambda.iter().copied());
                cons
            })
            .collect()
    }

    pub fn complement_pieces(&self) -> Vec<Vec<LinCon>> {
        let mut out: Vec<Vec<LinCon>> = self
            .boundary
            .planes()
            .iter()
            .map(|h| vec![LinCon::lt(h.normal, h.threshold())])
            .collect();
        out.extend(staircase_complement(&self.s, &self.ys));
        out
    }

    /// Connectivity of the closure, decided by union-find over pairwise
    /// intersecting pieces.
    pub fn is_connected(&self) -> bool {
        let pieces = self.pieces();
        let nonempty: Vec<usize> =
            (0..pieces.len()).filter(|&i| feasible(&closed(&pieces[i]))).collect();
        if nonempty.len() <= 1 {
            return true;
        }
        let mut parent: Vec<usize> = (0..nonempty.len()).collect();
        fn find(parent: &mut Vec<usize>, i: usize) -> usize {
            if parent[i] != i {
                let r = find(parent, parent[i]);
                parent[i] = r;
            }
            parent[i]
        }
        for a in 0..nonempty.len() {
            for b in (a + 1)..nonempty.len() {
                let mut cons = closed(&pieces[nonempty[a]]);
                cons.extend(closed(&pieces[nonempty[b]]));
                if feasible(&cons) {
                    let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
                    parent[ra] = rb;
                }
            }
        }
        let root = find(&mut parent, 0);
        (1..nonempty.len()).all(|i| find(&mut parent, i) == root)
    }
}

fn closed(cons: &[LinCon]) -> Vec<LinCon> {
    cons.iter().map(|c| LinCon { strict: false, ..*c }).collect()
}

/// Convex cover of the complement of the open staircase union.
fn staircase_complement(s: &DirectionSet, ys: &[(Q, Q)]) -> Vec<Vec<LinCon>> {
    let m = ys.len();
    let mut out = vec![vec![LinCon::ge(s.u1, ys[m - 1].0)]];
    out.push(vec![LinCon::lt(s.u1, ys[0].0), LinCon::ge(s.u2, ys[0].1)]);
    for j in 0..m - 1 {
        out.push(vec![
            LinCon::ge(s.u1, ys[j].0),
            LinCon::lt(s.u1, ys[j + 1].0),
            LinCon::ge(s.u2, ys[j + 1].1),
        ]);
    }
    out
}

impl Droplet {
    pub fn direction_set(&self) -> DirectionSet {
        match self {
            Droplet::Dyd(d) => d.s,
            Droplet::Cdyd(c) => c.s,
        }
    }

    pub fn contains(&self, p: QPoint) -> bool {
        match self {
            Droplet::Dyd(d) => d.contains(p),
            Droplet::Cdyd(c) => c.contains(p),
        }
    }

    pub fn contains_site(&self, s: (i64, i64)) -> bool {
        self.contains(QPoint::from_site(s))
    }

    pub fn pieces(&self) -> Vec<Vec<LinCon>> {
        match self {
            Droplet::Dyd(d) => d.pieces(),
            Droplet::Cdyd(c) => c.pieces(),
        }
    }

    pub fn complement_pieces(&self) -> Vec<Vec<LinCon>> {
        match self {
            Droplet::Dyd(d) => d.complement_pieces(),
            Droplet::Cdyd(c) => c.complement_pieces(),
        }
    }

    pub fn corner_thresholds(&self) -> &[(Q, Q)] {
        match self {
            Droplet::Dyd(d) => &d.ys,
            Droplet::Cdyd(c) => &c.ys,
        }
    }
}

/// Exact region intersection test.
pub fn droplets_intersect(a: &Droplet, b: &Droplet) -> bool {
    let pa = a.pieces();
    let pb = b.pieces();
    for x in &pa {
        for y in &pb {
            let mut cons = x.clone();
            cons.extend(y.iter().copied());
            if feasible(&cons) {
                return true;
            }
        }
    }
    false
}

/// Exact region containment: inner subset of outer.
pub fn droplet_contains(outer: &Droplet, inner: &Droplet) -> bool {
    let pi = inner.pieces();
    let pc = outer.complement_pieces();
    for x in &pi {
        for y in &pc {
            let mut cons = x.clone();
            cons.extend(y.iter().copied());
            if feasible(&cons) {
                return false;
            }
        }
    }
    true
}

/// Does the droplet meet the boundary region?
pub fn meets_boundary(d: &Droplet, boundary: &BoundaryRegion) -> bool {
    for piece in d.pieces() {
        for h in boundary.planes() {
            let mut cons = piece.clone();
            cons.push(LinCon::lt(h.normal, h.threshold()));
            if feasible(&cons) {
                return true;
            }
        }
    }
    false
}

/// Vertices of the closed relaxation of a convex piece: all feasible
/// pairwise line intersections.
pub fn piece_vertices(cons: &[LinCon]) -> Vec<QPoint> {
    let closed_cons = closed(cons);
    let mut out = Vec::new();
    for i in 0..closed_cons.len() {
        for j in (i + 1)..closed_cons.len() {
            if let Some(p) = point_from_thresholds(
                closed_cons[i].normal,
                closed_cons[i].threshold,
                closed_cons[j].normal,
                closed_cons[j].threshold,
            ) {
                if closed_cons.iter().all(|c| c.holds(p)) && !out.contains(&p) {
                    out.push(p);
                }
            }
        }
    }
    out
}

/// All closure vertices of a droplet.
pub fn droplet_vertices(d: &Droplet) -> Vec<QPoint> {
    let mut out = Vec::new();
    for piece in d.pieces() {
        for v in piece_vertices(&piece) {
            if !out.contains(&v) {
                out.push(v);
            }
        }
    }
    out
}

/// Squared diameter of the closure, from the candidate vertex set.
pub fn diam_sq(d: &Droplet) -> Q {
    let vs = droplet_vertices(d);
    let mut best = crate::rational::qi(0);
    for i in 0..vs.len() {
        for j in (i + 1)..vs.len() {
            let dd = vs[i].dist_sq(vs[j]);
            if dd > best {
                best = dd;
            }
        }
    }
    best
}

/// Integer bounding box (inclusive) of the droplet closure, if nonempty.
pub fn bounding_box(d: &Droplet) -> Option<(i64, i64, i64, i64)> {
    let vs = droplet_vertices(d);
    if vs.is_empty() {
        return None;
    }
    let (mut x0, mut x1) = (vs[0].x, vs[0].x);
    let (mut y0, mut y1) = (vs[0].y, vs[0].y);
    for v in &vs[1..] {
        x0 = x0.min(v.x);
        x1 = x1.max(v.x);
        y0 = y0.min(v.y);
        y1 = y1.max(v.y);
    }
    Some((
        x0.floor().to_integer() as i64,
        x1.ceil().to_integer() as i64,
        y0.floor().to_integer() as i64,
        y1.ceil().to_integer() as i64,
    ))
}

/// Lattice sites strictly inside the droplet.
pub fn droplet_sites(d: &Droplet) -> Vec<(i64, i64)> {
    let Some((x0, x1, y0, y1)) = bounding_box(d) else {
        return Vec::new();
    };
    let mut out = Vec::new();
    for x in x0..=x1 {
        for y in y0..=y1 {
            if d.contains_site((x, y)) {
                out.push((x, y));
            }
        }
    }
    out
}

// Serialisation: a flat record with exact rational coordinates as strings.

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DropletRecord {
    pub kind: String,
    /// u1, u2, v1, v2, u', u'1, u'2 as primitive integer vectors.
    pub s: Vec<(i64, i64)>,
    /// Convex corners.
    pub corners: Vec<(String, String)>,
    /// v-corner for the uncut shape.
    pub v_corner: Option<(String, String)>,
    /// Boundary half-planes (normal, anchor) for the cut shape.
    pub boundary: Option<Vec<((i64, i64), (String, String))>>,
}

fn q_str(v: Q) -> String {
    v.to_string()
}

fn q_parse(s: &str) -> Result<Q, ShapeError> {
    s.parse::<Q>()
        .map_err(|e| ShapeError::BadRecord(format!("bad rational {s:?}: {e}")))
}

fn point_str(p: QPoint) -> (String, String) {
    (q_str(p.x), q_str(p.y))
}

fn point_parse(p: &(String, String)) -> Result<QPoint, ShapeError> {
    Ok(QPoint::new(q_parse(&p.0)?, q_parse(&p.1)?))
}

impl Droplet {
    pub fn to_record(&self) -> DropletRecord {
        let s = self.direction_set();
        let dirs = vec![
            (s.u1.dx, s.u1.dy),
            (s.u2.dx, s.u2.dy),
            (s.v1.dx, s.v1.dy),
            (s.v2.dx, s.v2.dy),
            (s.u_prime.dx, s.u_prime.dy),
            (s.u_prime1.dx, s.u_prime1.dy),
            (s.u_prime2.dx, s.u_prime2.dy),
        ];
        match self {
            Droplet::Dyd(d) => DropletRecord {
                kind: "dyd".into(),
                s: dirs,
                corners: d.convex_corners().into_iter().map(point_str).collect(),
                v_corner: Some(point_str(d.v_corner())),
                boundary: None,
            },
            Droplet::Cdyd(c) => DropletRecord {
                kind: "cdyd".into(),
                s: dirs,
                corners: c.convex_corners().into_iter().map(point_str).collect(),
                v_corner: None,
                boundary: Some(
                    c.boundary
                        .planes()
                        .iter()
                        .map(|h| ((h.normal.dx, h.normal.dy), point_str(h.anchor)))
                        .collect(),
                ),
            },
        }
    }

    pub fn from_record(rec: &DropletRecord) -> Result<Droplet, ShapeError> {
        use crate::geom::{Dir, HalfPlane};
        if rec.s.len() != 7 {
            return Err(ShapeError::BadRecord("need 7 directions".into()));
        }
        let dir = |i: usize| -> Result<Dir, ShapeError> {
            Dir::new(rec.s[i].0, rec.s[i].1)
                .map_err(|e| ShapeError::BadRecord(e.to_string()))
        };
        let s = DirectionSet {
            u1: dir(0)?,
            u2: dir(1)?,
            v1: dir(2)?,
            v2: dir(3)?,
            u_prime: dir(4)?,
            u_prime1: dir(5)?,
            u_prime2: dir(6)?,
        };
        let corners: Result<Vec<QPoint>, ShapeError> =
            rec.corners.iter().map(point_parse).collect();
        let ys: Vec<(Q, Q)> =
            corners?.into_iter().map(|p| (dot(s.u1, p), dot(s.u2, p))).collect();
        match rec.kind.as_str() {
            "dyd" => {
                let x = rec
                    .v_corner
                    .as_ref()
                    .ok_or_else(|| ShapeError::BadRecord("dyd needs v_corner".into()))?;
                let x = point_parse(x)?;
                Ok(Droplet::Dyd(Dyd::new(s, dot(s.v1, x), dot(s.v2, x), ys)?))
            }
            "cdyd" => {
                let planes = rec
                    .boundary
                    .as_ref()
                    .ok_or_else(|| ShapeError::BadRecord("cdyd needs boundary".into()))?;
                if planes.is_empty() || planes.len() > 3 {
                    return Err(ShapeError::BadRecord("boundary needs 1..=3 planes".into()));
                }
                let planes: Result<Vec<HalfPlane>, ShapeError> = planes
                    .iter()
                    .map(|(n, a)| {
                        Ok(HalfPlane::new(
                            Dir::new(n.0, n.1)
                                .map_err(|e| ShapeError::BadRecord(e.to_string()))?,
                            point_parse(a)?,
                        ))
                    })
                    .collect();
                Ok(Droplet::Cdyd(Cdyd::new(
                    s,
                    BoundaryRegion::from_planes(planes?),
                    ys,
                )?))
            }
            k => Err(ShapeError::BadRecord(format!("unknown kind {k:?}"))),
        }
    }
}
