//! Decomposition of a finite infected set into clusters and crumbs.

use super::{BoundaryRegion, DropletConstants};
use crate::bootstrap::{closure, SiteSet};
use crate::family::UpdateFamily;
use crate::geom::Window;
use crate::rational::{qi, Q};
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ComponentError {
    #[error("crumb search space too large: {0} candidate subsets")]
    TooLarge(u128),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cluster {
    pub sites: Vec<(i64, i64)>,
    /// Within C2 of the boundary region.
    pub boundary: bool,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ComponentReport {
    pub clusters: Vec<Cluster>,
    pub crumbs: Vec<Vec<(i64, i64)>>,
}

pub(crate) fn site_dist_sq(a: (i64, i64), b: (i64, i64)) -> i128 {
    let dx = (a.0 - b.0) as i128;
    let dy = (a.1 - b.1) as i128;
    dx * dx + dy * dy
}

fn within(a: (i64, i64), b: (i64, i64), r: Q) -> bool {
    qi(site_dist_sq(a, b)) <= r * r
}

/// Connected components of the graph with edges at Euclidean distance at
/// most `radius`, ordered by least site.
pub fn gamma_components(sites: &BTreeSet<(i64, i64)>, radius: Q) -> Vec<Vec<(i64, i64)>> {
    let all: Vec<(i64, i64)> = sites.iter().copied().collect();
    let mut assigned = vec![false; all.len()];
    let mut out = Vec::new();
    for start in 0..all.len() {
        if assigned[start] {
            continue;
        }
        let mut comp = vec![start];
        assigned[start] = true;
        let mut head = 0;
        while head < comp.len() {
            let cur = all[comp[head]];
            head += 1;
            for (j, &s) in all.iter().enumerate() {
                if !assigned[j] && within(cur, s, radius) {
                    assigned[j] = true;
                    comp.push(j);
                }
            }
        }
        let mut comp: Vec<(i64, i64)> = comp.into_iter().map(|i| all[i]).collect();
        comp.sort_unstable();
        out.push(comp);
    }
    out
}

/// Can the component be generated by at most alpha - 1 nearby sites?
/// Exhaustive search over subsets of the lattice ball of radius C1/2
/// around G.
pub fn crumb_test(
    g: &[(i64, i64)],
    alpha: u32,
    fam: &UpdateFamily,
    window: Window,
    c1: Q,
    cap: u128,
) -> Result<bool, ComponentError> {
    if g.is_empty() {
        return Ok(true);
    }
    if alpha == 1 {
        return Ok(false);
    }
    let half = c1 / qi(2);
    // Candidate sites within C1/2 of G.
    let reach = (half.ceil().to_integer() as i64) + 1;
    let mut cands: BTreeSet<(i64, i64)> = BTreeSet::new();
    for &(x, y) in g {
        for dx in -reach..=reach {
            for dy in -reach..=reach {
                let p = (x + dx, y + dy);
                if window.contains(p) && within(p, (x, y), half) {
                    cands.insert(p);
                }
            }
        }
    }
    let cands: Vec<(i64, i64)> = cands.into_iter().collect();
    let k = (alpha - 1) as usize;
    let mut subsets: u128 = 1;
    for i in 0..k {
        subsets = subsets.saturating_mul((cands.len().saturating_sub(i)) as u128)
            / (i as u128 + 1);
    }
    if subsets > cap {
        return Err(ComponentError::TooLarge(subsets));
    }
    let gset: BTreeSet<(i64, i64)> = g.iter().copied().collect();
    let mut stack: Vec<usize> = Vec::with_capacity(k);
    fn search(
        cands: &[(i64, i64)],
        stack: &mut Vec<usize>,
        k: usize,
        from: usize,
        gset: &BTreeSet<(i64, i64)>,
        fam: &UpdateFamily,
        window: Window,
    ) -> bool {
        if stack.len() == k {
            let p: Vec<(i64, i64)> = stack.iter().map(|&i| cands[i]).collect();
            let res = closure(&SiteSet::new(p, window, None), fam);
            return gset.iter().all(|s| res.sites.contains(*s));
        }
        for i in from..cands.len() {
            stack.push(i);
            if search(cands, stack, k, i + 1, gset, fam, window) {
                return true;
            }
            stack.pop();
        }
        false
    }
    Ok(search(&cands, &mut stack, k, 0, &gset, fam, window))
}

/// Deterministic greedy decomposition of one component into clusters of
/// Euclidean diameter at most C3: repeatedly grow from the least
/// unassigned site, adding graph neighbours in breadth-first order while
/// the diameter bound holds.
pub fn greedy_clusters(component: &[(i64, i64)], radius: Q, c3: Q) -> Vec<Vec<(i64, i64)>> {
    let mut unassigned: BTreeSet<(i64, i64)> = component.iter().copied().collect();
    let mut out = Vec::new();
    while let Some(&seed) = unassigned.iter().next() {
        unassigned.remove(&seed);
        let mut cluster = vec![seed];
        let mut head = 0;
        while head < cluster.len() {
            let cur = cluster[head];
            head += 1;
            let neighbours: Vec<(i64, i64)> = unassigned
                .iter()
                .copied()
                .filter(|&s| within(cur, s, radius))
                .collect();
            for s in neighbours {
                if cluster.iter().all(|&c| within(c, s, c3)) {
                    unassigned.remove(&s);
                    cluster.push(s);
                }
            }
        }
        cluster.sort_unstable();
        out.push(cluster);
    }
    out
}

const CRUMB_CAP: u128 = 5_000_000;

/// Full decomposition of K into boundary clusters, interior clusters and
/// crumbs.
pub fn classify_components(
    k: &SiteSet,
    consts: &DropletConstants,
    boundary: Option<&BoundaryRegion>,
    modified: bool,
    alpha: u32,
    fam: &UpdateFamily,
) -> Result<ComponentReport, ComponentError> {
    let radius = if modified { consts.c2_prime } else { consts.c2 };
    let mut report = ComponentReport::default();
    for comp in gamma_components(&k.sites, radius) {
        let near_boundary = boundary.map_or(false, |b| {
            comp.iter()
                .any(|&s| b.dist_at_most(crate::geom::QPoint::from_site(s), consts.c2))
        });
        if near_boundary {
            for sites in greedy_clusters(&comp, radius, consts.c3) {
                report.clusters.push(Cluster { sites, boundary: true });
            }
        } else if crumb_test(&comp, alpha, fam, k.window, consts.c1, CRUMB_CAP)? {
            report.crumbs.push(comp);
        } else {
            for sites in greedy_clusters(&comp, radius, consts.c3) {
                report.clusters.push(Cluster { sites, boundary: false });
            }
        }
    }
    Ok(report)
}
