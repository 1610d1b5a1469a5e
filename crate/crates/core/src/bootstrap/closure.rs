//! Closure computation with a dirty-queue: only sites whose rule
//! neighbourhood changed are re-examined.

use crate::droplets::BoundaryRegion;
use crate::family::UpdateFamily;
use crate::geom::Window;
use std::collections::{BTreeSet, HashSet, VecDeque};

/// Finite set of infected sites inside a window, with an optional implicit
/// infected boundary region. Boundary sites are never stored.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SiteSet {
    pub sites: BTreeSet<(i64, i64)>,
    pub window: Window,
    pub boundary: Option<BoundaryRegion>,
}

impl SiteSet {
    pub fn new(
        sites: impl IntoIterator<Item = (i64, i64)>,
        window: Window,
        boundary: Option<BoundaryRegion>,
    ) -> SiteSet {
        let sites = sites
            .into_iter()
            .filter(|s| window.contains(*s))
            .filter(|s| boundary.as_ref().map_or(true, |b| !b.contains_site(*s)))
            .collect();
        SiteSet { sites, window, boundary }
    }

    pub fn empty(window: Window) -> SiteSet {
        SiteSet { sites: BTreeSet::new(), window, boundary: None }
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    pub fn contains(&self, s: (i64, i64)) -> bool {
        self.sites.contains(&s)
    }
}

#[derive(Clone, Debug)]
pub struct ClosureResult {
    pub sites: SiteSet,
    /// True iff no newly infected site lies within `margin` of the window
    /// edge, so the window truncation provably did not bite.
    pub exact: bool,
}

/// Sites of the window within L-infinity distance `band` of the boundary
/// region's bounding lines, outside the region itself. These are the only
/// sites the region can help infect directly.
fn boundary_band(
    boundary: &BoundaryRegion,
    window: &Window,
    band: i64,
) -> Vec<(i64, i64)> {
    let mut out = HashSet::new();
    for hp in boundary.planes() {
        let n = hp.normal;
        let t = hp.threshold();
        // |<n,p> - t| small enough that p is within `band` (L-inf) of the
        // line: |<n,p> - t| <= band * (|nx| + |ny|) suffices.
        let spread =
            crate::rational::qi(band as i128 * (n.dx.abs() as i128 + n.dy.abs() as i128));
        if n.dy.abs() >= n.dx.abs() {
            // Line closer to horizontal: iterate x, solve y interval.
            for x in window.x0..window.x1 {
                // n.dx*x + n.dy*y in [t - spread, t + spread]
                let lo = (t - spread - crate::rational::qi(n.dx as i128 * x as i128))
                    / crate::rational::qi(n.dy as i128);
                let hi = (t + spread - crate::rational::qi(n.dx as i128 * x as i128))
                    / crate::rational::qi(n.dy as i128);
                let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                let ylo = lo.floor().to_integer().max(window.y0 as i128) as i64;
                let yhi = (hi.ceil().to_integer().min(window.y1 as i128 - 1)) as i64;
                for y in ylo..=yhi {
                    if window.contains((x, y)) && !boundary.contains_site((x, y)) {
                        out.insert((x, y));
                    }
                }
            }
        } else {
            for y in window.y0..window.y1 {
                let lo = (t - spread - crate::rational::qi(n.dy as i128 * y as i128))
                    / crate::rational::qi(n.dx as i128);
                let hi = (t + spread - crate::rational::qi(n.dy as i128 * y as i128))
                    / crate::rational::qi(n.dx as i128);
                let (lo, hi) = if lo <= hi { (lo, hi) } else { (hi, lo) };
                let xlo = lo.floor().to_integer().max(window.x0 as i128) as i64;
                let xhi = (hi.ceil().to_integer().min(window.x1 as i128 - 1)) as i64;
                for x in xlo..=xhi {
                    if window.contains((x, y)) && !boundary.contains_site((x, y)) {
                        out.insert((x, y));
                    }
                }
            }
        }
    }
    out.into_iter().collect()
}

fn run_closure(k: &SiteSet, fam: &UpdateFamily) -> ClosureResult {
    let window = k.window;
    let boundary = k.boundary.clone();
    let mut infected: HashSet<(i64, i64)> = k.sites.iter().copied().collect();
    let is_infected = |set: &HashSet<(i64, i64)>, s: (i64, i64)| -> bool {
        set.contains(&s) || boundary.as_ref().map_or(false, |b| b.contains_site(s))
    };

    let mut queue: VecDeque<(i64, i64)> = VecDeque::new();
    let mut queued: HashSet<(i64, i64)> = HashSet::new();
    let push_candidates =
        |s: (i64, i64), queue: &mut VecDeque<(i64, i64)>, queued: &mut HashSet<(i64, i64)>| {
            for rule in &fam.rules {
                for &(ex, ey) in rule {
                    let cand = (s.0 - ex, s.1 - ey);
                    if window.contains(cand) && queued.insert(cand) {
                        queue.push_back(cand);
                    }
                }
            }
        };

    for &s in &k.sites {
        push_candidates(s, &mut queue, &mut queued);
    }
    if let Some(b) = &boundary {
        for s in boundary_band(b, &window, fam.linf_radius()) {
            if queued.insert(s) {
                queue.push_back(s);
            }
        }
    }

    let mut exact = true;
    while let Some(x) = queue.pop_front() {
        queued.remove(&x);
        if infected.contains(&x) {
            continue;
        }
        if boundary.as_ref().map_or(false, |b| b.contains_site(x)) {
            continue;
        }
        let fires = fam.rules.iter().any(|rule| {
            rule.iter().all(|&(ex, ey)| is_infected(&infected, (x.0 + ex, x.1 + ey)))
        });
        if fires {
            infected.insert(x);
            if !window.well_inside(x) {
                exact = false;
            }
            push_candidates(x, &mut queue, &mut queued);
        }
    }

    ClosureResult {
        sites: SiteSet {
            sites: infected.into_iter().collect(),
            window,
            boundary,
        },
        exact,
    }
}

/// Closure [K] inside K's window; boundary predicate of K (if any) counts
/// as permanently infected.
pub fn closure(k: &SiteSet, fam: &UpdateFamily) -> ClosureResult {
    run_closure(k, fam)
}

/// Boundary-relative closure [K]_d: rule sites falling in `boundary` count
/// as infected; boundary sites never appear in the output.
pub fn closure_with_boundary(
    k: &SiteSet,
    boundary: &BoundaryRegion,
    fam: &UpdateFamily,
) -> ClosureResult {
    let rebased = SiteSet::new(k.sites.iter().copied(), k.window, Some(boundary.clone()));
    run_closure(&rebased, fam)
}
