//! Stable directions: the finite scan over J-directions and one
//! representative per open gap, merged into maximal closed arcs.

use crate::family::UpdateFamily;
use crate::geom::{gap_representative, sort_ccw, Arc, Dir, Value};

/// u is unstable iff some rule lies entirely in the open half-plane H_u.
pub fn is_stable_direction(fam: &UpdateFamily, u: Dir) -> bool {
    !fam.rules.iter().any(|rule| {
        rule.iter()
            .all(|&(x, y)| (x as i128) * (u.dx as i128) + (y as i128) * (u.dy as i128) < 0)
    })
}

/// Status of a single direction with respect to the stable set.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DirStatus {
    Unstable,
    /// Degenerate stable arc.
    Isolated,
    /// Endpoint of a non-degenerate stable arc.
    SemiIsolated,
    /// Interior of a stable arc.
    StronglyStable,
}

/// The stable set of a family: maximal closed non-degenerate arcs plus
/// isolated directions, or the full circle.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StableSet {
    pub full_circle: bool,
    pub arcs: Vec<Arc>,
    pub isolated: Vec<Dir>,
}

impl StableSet {
    pub fn status(&self, d: Dir) -> DirStatus {
        if self.full_circle {
            return DirStatus::StronglyStable;
        }
        if self.isolated.contains(&d) {
            return DirStatus::Isolated;
        }
        for a in &self.arcs {
            if d == a.start || d == a.end {
                return DirStatus::SemiIsolated;
            }
            if a.contains(d) {
                return DirStatus::StronglyStable;
            }
        }
        DirStatus::Unstable
    }

    pub fn has_nondegenerate_arc(&self) -> bool {
        self.full_circle || !self.arcs.is_empty()
    }
}

/// The finite set J of directions orthogonal to some rule element, sorted
/// counterclockwise. Stability is constant on each open gap between
/// consecutive J-directions.
pub fn j_directions(fam: &UpdateFamily) -> Vec<Dir> {
    let mut dirs = Vec::new();
    for rule in &fam.rules {
        for &(x, y) in rule {
            let d = Dir::new(-y, x).expect("rule elements nonzero");
            dirs.push(d);
            dirs.push(d.antipode());
        }
    }
    sort_ccw(&dirs)
}

pub fn stable_arcs(fam: &UpdateFamily) -> StableSet {
    let j = j_directions(fam);
    let n = j.len();
    debug_assert!(n >= 2, "J contains antipodal pairs");
    let point_stable: Vec<bool> = j.iter().map(|&d| is_stable_direction(fam, d)).collect();
    let gap_stable: Vec<bool> = (0..n)
        .map(|i| {
            let rep = gap_representative(j[i], j[(i + 1) % n]);
            is_stable_direction(fam, rep)
        })
        .collect();

    if point_stable.iter().all(|&b| b) && gap_stable.iter().all(|&b| b) {
        return StableSet { full_circle: true, arcs: vec![], isolated: vec![] };
    }
    if point_stable.iter().all(|&b| !b) && gap_stable.iter().all(|&b| !b) {
        return StableSet { full_circle: false, arcs: vec![], isolated: vec![] };
    }

    // Cells in circular order: point 0, gap 0, point 1, gap 1, ...
    // A maximal run of stable cells starts and ends at point cells because
    // the stable set is closed.
    let cell_stable = |c: usize| -> bool {
        if c % 2 == 0 {
            point_stable[c / 2]
        } else {
            gap_stable[c / 2]
        }
    };
    let cells = 2 * n;
    let mut arcs = Vec::new();
    let mut isolated = Vec::new();
    // Find run starts: stable point cell whose predecessor cell is unstable.
    for p in 0..n {
        let c = 2 * p;
        if !point_stable[p] || cell_stable((c + cells - 1) % cells) {
            continue;
        }
        // Walk forward to the run end.
        let mut end = c;
        while cell_stable((end + 1) % cells) {
            end = (end + 1) % cells;
            debug_assert!(end != (c + cells - 1) % cells, "run wrapped the circle");
        }
        debug_assert!(end % 2 == 0, "stable run must end at a J-direction");
        if end == c {
            isolated.push(j[p]);
        } else {
            arcs.push(Arc {
                start: j[p],
                end: j[end / 2],
                closed_start: true,
                closed_end: true,
            });
        }
    }
    StableSet { full_circle: false, arcs, isolated }
}

/// Classification of an update family.
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Classification {
    Supercritical,
    Critical,
    Subcritical,
    Unresolved,
}

/// Full stability/difficulty report.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub stable: StableSet,
    pub isolated_points: Vec<(Dir, Value)>,
    pub classification: Classification,
    pub alpha: Value,
    pub infinite_stable: bool,
    pub balanced: Option<bool>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::*;

    #[test]
    fn stability_examples() {
        assert!(!is_stable_direction(&two_neighbour(), Dir::d(1, 1)));
        assert!(is_stable_direction(&two_neighbour(), Dir::d(1, 0)));
        assert!(is_stable_direction(&duarte(), Dir::d(1, 0)));
        for u in [Dir::d(1, 0), Dir::d(0, 1), Dir::d(3, -2), Dir::d(-5, 1)] {
            assert!(!is_stable_direction(&one_neighbour(), u));
        }
    }

    #[test]
    fn duarte_arcs() {
        let s = stable_arcs(&duarte());
        assert!(!s.full_circle);
        assert_eq!(s.isolated, vec![Dir::d(1, 0)]);
        assert_eq!(s.arcs.len(), 1);
        let a = s.arcs[0];
        assert_eq!(a.start, Dir::d(0, 1));
        assert_eq!(a.end, Dir::d(0, -1));
        assert_eq!(s.status(Dir::d(-1, 0)), DirStatus::StronglyStable);
        assert_eq!(s.status(Dir::d(0, 1)), DirStatus::SemiIsolated);
        assert_eq!(s.status(Dir::d(1, 0)), DirStatus::Isolated);
        assert_eq!(s.status(Dir::d(1, 1)), DirStatus::Unstable);
    }

    #[test]
    fn two_neighbour_isolated_points() {
        let s = stable_arcs(&two_neighbour());
        assert!(s.arcs.is_empty());
        assert_eq!(s.isolated.len(), 4);
        assert!(s.isolated.contains(&Dir::d(1, 0)));
        assert!(s.isolated.contains(&Dir::d(0, -1)));
        assert!(!s.has_nondegenerate_arc());
    }

    #[test]
    fn one_neighbour_nothing_stable() {
        let s = stable_arcs(&one_neighbour());
        assert!(!s.full_circle);
        assert!(s.arcs.is_empty() && s.isolated.is_empty());
    }

    #[test]
    fn horizontal_pair_full_circle() {
        let s = stable_arcs(&horizontal_pair());
        assert!(s.full_circle);
    }

    #[test]
    fn three_rule_arc_and_points() {
        let s = stable_arcs(&three_rule());
        assert_eq!(s.arcs.len(), 1);
        assert_eq!(s.arcs[0].start, Dir::d(-1, 0));
        assert_eq!(s.arcs[0].end, Dir::d(0, -1));
        let mut iso = s.isolated.clone();
        iso.sort_by_key(|d| (d.dx, d.dy));
        assert_eq!(iso, vec![Dir::d(0, 1), Dir::d(1, 0)]);
    }

    #[test]
    fn scan_agrees_with_pointwise_checks() {
        for fam in [duarte(), two_neighbour(), three_rule(), one_neighbour()] {
            let s = stable_arcs(&fam);
            let mut dirs = Vec::new();
            for dx in -7i64..=7 {
                for dy in -7i64..=7 {
                    if let Ok(d) = Dir::new(dx, dy) {
                        dirs.push(d);
                    }
                }
            }
            dirs.sort_by(|a, b| crate::geom::circular_compare(*a, *b));
            dirs.dedup();
            for d in dirs {
                let direct = is_stable_direction(&fam, d);
                let via_set = s.status(d) != DirStatus::Unstable;
                assert_eq!(direct, via_set, "family {:?} dir {:?}", fam.name, d);
            }
        }
    }
}
