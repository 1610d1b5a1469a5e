//! Cluster quadrilaterals, the merge loop and spanning predicates.

use super::components::{classify_components, ComponentError};
use super::shapes::{
    droplet_contains, droplet_sites, droplets_intersect, meets_boundary, Droplet, Dyd,
};
use super::{span, BoundaryRegion, DropletConstants};
use crate::bootstrap::{DirectionSet, SiteSet};
use crate::family::UpdateFamily;
use crate::geom::{dot, Dir, QPoint};
use crate::rational::{qi, sqrt_upper, Q};
use crate::seeds;
use rand::Rng;

/// Smallest quadrilateral with sides perpendicular to the direction set
/// containing the open reach-neighbourhood of the cluster. Each threshold
/// uses a rational upper bound on the side normal's Euclidean norm, exact
/// for axis directions.
pub fn quad_of_cluster(cluster: &[(i64, i64)], reach: Q, s: DirectionSet) -> Dyd {
    assert!(!cluster.is_empty(), "cluster must be nonempty");
    let threshold = |w: Dir| -> Q {
        let m = cluster
            .iter()
            .map(|&p| dot(w, QPoint::from_site(p)))
            .max()
            .expect("nonempty cluster");
        m + reach * sqrt_upper(qi(w.norm_sq()))
    };
    Dyd::new(
        s,
        threshold(s.v1),
        threshold(s.v2),
        vec![(threshold(s.u1), threshold(s.u2))],
    )
    .expect("single corner")
}

fn maybe_cut(d: Droplet, boundary: Option<&BoundaryRegion>) -> Droplet {
    match boundary {
        Some(b) if meets_boundary(&d, b) => Droplet::Cdyd(super::cut_droplet(&d, b)),
        _ => d,
    }
}

/// One run of the merge loop. Records every intermediate collection state
/// when `trace` is enabled (used by scale-ladder diagnostics).
pub struct AlgorithmRun {
    pub droplets: Vec<Droplet>,
    /// Every droplet that ever appeared in the working collection,
    /// including the initial quadrilaterals and all merge results.
    pub intermediates: Vec<Droplet>,
    /// Clusters feeding the initial collection.
    pub clusters: Vec<Vec<(i64, i64)>>,
}

/// The droplet algorithm: quadrilaterals of clusters, cut on boundary
/// contact, then repeated replacement of intersecting pairs by their span.
/// The merge order is irrelevant to the result; `order_seed` randomises it
/// for the canonicity checks.
pub fn droplet_algorithm(
    k: &SiteSet,
    boundary: Option<&BoundaryRegion>,
    consts: &DropletConstants,
    modified: bool,
    fam: &UpdateFamily,
    s: DirectionSet,
    alpha: u32,
    order_seed: Option<u64>,
) -> Result<AlgorithmRun, ComponentError> {
    let report = classify_components(k, consts, boundary, modified, alpha, fam)?;
    let reach = if modified { consts.c4_prime } else { consts.c4 };
    let mut work: Vec<Droplet> = Vec::new();
    let mut intermediates: Vec<Droplet> = Vec::new();
    let mut clusters = Vec::new();
    for c in &report.clusters {
        let d = maybe_cut(Droplet::Dyd(quad_of_cluster(&c.sites, reach, s)), boundary);
        intermediates.push(d.clone());
        work.push(d);
        clusters.push(c.sites.clone());
    }
    let mut rng = order_seed.map(|seed| seeds::stream_rng(seed, seeds::streams::DROPLET_ORDER, 0));
    loop {
        let mut pairs: Vec<(usize, usize)> = Vec::new();
        'outer: for i in 0..work.len() {
            for j in (i + 1)..work.len() {
                if droplets_intersect(&work[i], &work[j]) {
                    pairs.push((i, j));
                    if rng.is_none() {
                        break 'outer;
                    }
                }
            }
        }
        if pairs.is_empty() {
            break;
        }
        let (i, j) = match &mut rng {
            Some(r) => pairs[r.gen_range(0..pairs.len())],
            None => pairs[0],
        };
        let merged = span(&work[i], &work[j]).expect("uniform direction set");
        let merged = maybe_cut(merged, boundary);
        work.swap_remove(j);
        work.swap_remove(i);
        intermediates.push(merged.clone());
        work.push(merged);
    }
    // Canonical output order for comparability across merge orders.
    work.sort_by(|a, b| format!("{a:?}").cmp(&format!("{b:?}")));
    Ok(AlgorithmRun { droplets: work, intermediates, clusters })
}

/// Is D spanned by K? Runs the algorithm on K restricted to D and checks
/// whether an output droplet contains D.
pub fn is_spanned(
    d: &Droplet,
    k: &SiteSet,
    boundary: Option<&BoundaryRegion>,
    consts: &DropletConstants,
    modified: bool,
    fam: &UpdateFamily,
    s: DirectionSet,
    alpha: u32,
) -> Result<bool, ComponentError> {
    let inside = SiteSet::new(
        k.sites.iter().copied().filter(|&p| d.contains_site(p)),
        k.window,
        k.boundary.clone(),
    );
    let run = droplet_algorithm(&inside, boundary, consts, modified, fam, s, alpha, None)?;
    Ok(run.droplets.iter().any(|out| droplet_contains(out, d)))
}

/// Spanning probability estimate under independent Bernoulli(q) fills of
/// the droplet's lattice sites, with a Wilson 95% interval.
#[derive(Clone, Copy, Debug)]
pub struct SpanningEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
}

pub fn estimate_spanning_probability(
    d: &Droplet,
    q: f64,
    fam: &UpdateFamily,
    s: DirectionSet,
    consts: &DropletConstants,
    alpha: u32,
    trials: u64,
    seed: u64,
) -> Result<SpanningEstimate, ComponentError> {
    assert!((0.0..=1.0).contains(&q), "q must be a probability");
    assert!(trials >= 1);
    let sites = droplet_sites(d);
    let window = match super::shapes::bounding_box(d) {
        Some((x0, x1, y0, y1)) => crate::geom::Window::new(x0 - 1, x1 + 2, y0 - 1, y1 + 2, 1),
        None => crate::geom::Window::new(-1, 1, -1, 1, 1),
    };
    let mut successes = 0u64;
    for t in 0..trials {
        let mut rng = seeds::stream_rng(seed, seeds::streams::SPANNING, t);
        let fill: Vec<(i64, i64)> = sites
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(q))
            .collect();
        let k = SiteSet::new(fill, window, None);
        if is_spanned(d, &k, None, consts, false, fam, s, alpha)? {
            successes += 1;
        }
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = 1.959963984540054f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    Ok(SpanningEstimate {
        successes,
        trials,
        p_hat: p,
        lo: (centre - half).max(0.0),
        hi: (centre + half).min(1.0),
    })
}

/// Count of discretised droplets containing the point with diameter at
/// most `d`: integer-threshold staircases in the admissible grid. The
/// count is closed-form; the list is materialised up to `list_cap`.
#[derive(Clone, Debug)]
pub struct DiscretisedDroplets {
    pub count: u128,
    pub droplets: Vec<Droplet>,
    pub truncated: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EnumError {
    #[error("diameter must be at least 1")]
    TooSmall,
    #[error("enumeration cap exceeded: more than {0} droplets")]
    CapExceeded(u128),
}

fn binom(n: u64, k: u64) -> Option<u128> {
    let k = k.min(n - k.min(n));
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc.checked_mul((n - i) as u128)?;
        acc /= (i + 1) as u128;
    }
    Some(acc)
}

pub fn enumerate_discretised_droplets(
    a: QPoint,
    d: Q,
    s: DirectionSet,
    count_cap: u128,
    list_cap: usize,
) -> Result<DiscretisedDroplets, EnumError> {
    if d < qi(1) {
        return Err(EnumError::TooSmall);
    }
    let grid = |w: Dir| -> u64 {
        // Threshold choices strictly above <w, a> within one diameter.
        let span = d * sqrt_upper(qi(w.norm_sq()));
        (span.ceil().to_integer().max(1)) as u64
    };
    let (g1, g2) = (grid(s.u1), grid(s.u2));
    let (gv1, gv2) = (grid(s.v1), grid(s.v2));
    // Antichains with c1 drawn from g1 values and c2 from g2 values:
    // sum_m C(g1,m) C(g2,m) = C(g1+g2, g1); subtract the empty one.
    let staircases = binom(g1 + g2, g1)
        .and_then(|c| c.checked_sub(1))
        .ok_or(EnumError::CapExceeded(count_cap))?;
    let count = staircases
        .checked_mul(gv1 as u128)
        .and_then(|c| c.checked_mul(gv2 as u128))
        .ok_or(EnumError::CapExceeded(count_cap))?;
    if count > count_cap {
        return Err(EnumError::CapExceeded(count_cap));
    }
    // Materialise in lexicographic order until the list cap.
    let base = |w: Dir| dot(w, a);
    let mut droplets = Vec::new();
    let mut truncated = false;
    'outer: for av1 in 1..=gv1 as i128 {
        for av2 in 1..=gv2 as i128 {
            let mut stack: Vec<Vec<(i128, i128)>> = vec![vec![]];
            while let Some(cur) = stack.pop() {
                if !cur.is_empty() {
                    if droplets.len() >= list_cap {
                        truncated = true;
                        break 'outer;
                    }
                    let ys = cur
                        .iter()
                        .map(|&(c1, c2)| (base(s.u1) + qi(c1), base(s.u2) + qi(c2)))
                        .collect();
                    let dyd = Dyd::new(
                        s,
                        base(s.v1) + qi(av1),
                        base(s.v2) + qi(av2),
                        ys,
                    )
                    .expect("nonempty corner list");
                    droplets.push(Droplet::Dyd(dyd));
                }
                let (min_c1, max_c2) = match cur.last() {
                    Some(&(c1, c2)) => (c1 + 1, c2 - 1),
                    None => (1, g2 as i128),
                };
                for c1 in min_c1..=g1 as i128 {
                    for c2 in (1..=max_c2).rev() {
                        let mut next = cur.clone();
                        next.push((c1, c2));
                        stack.push(next);
                    }
                }
            }
        }
    }
    Ok(DiscretisedDroplets { count, droplets, truncated })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::three_rule;
    use crate::geom::Window;

    fn dirs() -> DirectionSet {
        super::super::test_direction_set()
    }

    fn fam() -> UpdateFamily {
        three_rule()
    }

    fn win() -> Window {
        Window::new(-200, 200, -200, 200, 2)
    }

    #[test]
    fn quad_translate_covariance() {
        let s = dirs();
        let c1 = vec![(0, 0), (2, 1)];
        let c2 = vec![(7, -3), (9, -2)];
        let q1 = quad_of_cluster(&c1, qi(10), s);
        let q2 = quad_of_cluster(&c2, qi(10), s);
        let t = QPoint::from_site((7, -3));
        // Same shape shifted: threshold difference equals <w, t>.
        assert_eq!(
            q2.v_thresholds().0 - q1.v_thresholds().0,
            dot(s.v1, t)
        );
        assert_eq!(
            q2.corner_thresholds()[0].0 - q1.corner_thresholds()[0].0,
            dot(s.u1, t)
        );
    }

    #[test]
    fn quad_contains_reach_neighbourhood_and_closure() {
        let s = dirs();
        let cluster = vec![(0, 0), (3, 2)];
        let q = quad_of_cluster(&cluster, qi(12), s);
        for &site in &cluster {
            assert!(q.contains_site(site));
        }
        // Points within distance 12 of the cluster are inside.
        for dx in -12..=12i64 {
            for dy in -12..=12i64 {
                if dx * dx + dy * dy <= 144 {
                    assert!(q.contains_site((dx, dy)), "({dx},{dy})");
                }
            }
        }
        // Closure of the cluster stays inside.
        let k = SiteSet::new(cluster.clone(), win(), None);
        let res = crate::bootstrap::closure(&k, &fam());
        for &site in &res.sites.sites {
            assert!(q.contains_site(site));
        }
    }

    #[test]
    fn empty_input_empty_output() {
        let k = SiteSet::empty(win());
        let run = droplet_algorithm(
            &k,
            None,
            &DropletConstants::small(),
            false,
            &fam(),
            dirs(),
            1,
            None,
        )
        .unwrap();
        assert!(run.droplets.is_empty());
    }

    #[test]
    fn isolated_cluster_gives_single_quad() {
        let k = SiteSet::new([(0, 0)], win(), None);
        let consts = DropletConstants::small();
        let run =
            droplet_algorithm(&k, None, &consts, false, &fam(), dirs(), 1, None).unwrap();
        assert_eq!(run.droplets.len(), 1);
        let expect = Droplet::Dyd(quad_of_cluster(&[(0, 0)], consts.c4, dirs()));
        assert_eq!(run.droplets[0], expect);
    }

    #[test]
    fn two_overlapping_quads_merge() {
        let consts = DropletConstants::small();
        // Two singleton clusters within 2*C4 = 24 of each other but beyond
        // C2 = 3 so they are distinct clusters.
        let k = SiteSet::new([(0, 0), (8, 0)], win(), None);
        let run =
            droplet_algorithm(&k, None, &consts, false, &fam(), dirs(), 1, None).unwrap();
        assert_eq!(run.droplets.len(), 1);
        let q1 = Droplet::Dyd(quad_of_cluster(&[(0, 0)], consts.c4, dirs()));
        let q2 = Droplet::Dyd(quad_of_cluster(&[(8, 0)], consts.c4, dirs()));
        let expect = span(&q1, &q2).unwrap();
        assert_eq!(run.droplets[0], expect);
        assert!(droplet_contains(&run.droplets[0], &q1));
    }

    #[test]
    fn output_pairwise_disjoint() {
        let consts = DropletConstants::small();
        let k = SiteSet::new(
            [(0, 0), (8, 0), (-60, 90), (100, -100), (104, -98)],
            win(),
            None,
        );
        let run =
            droplet_algorithm(&k, None, &consts, false, &fam(), dirs(), 1, None).unwrap();
        assert!(run.droplets.len() >= 2);
        for i in 0..run.droplets.len() {
            for j in (i + 1)..run.droplets.len() {
                assert!(!droplets_intersect(&run.droplets[i], &run.droplets[j]));
            }
        }
    }

    #[test]
    fn merge_order_independent() {
        let consts = DropletConstants::small();
        let k = SiteSet::new(
            [(0, 0), (8, 0), (14, 4), (-30, 20), (-24, 26), (60, 60)],
            win(),
            None,
        );
        let reference =
            droplet_algorithm(&k, None, &consts, false, &fam(), dirs(), 1, None).unwrap();
        for seed in 0..10u64 {
            let run = droplet_algorithm(
                &k,
                None,
                &consts,
                false,
                &fam(),
                dirs(),
                1,
                Some(seed),
            )
            .unwrap();
            assert_eq!(run.droplets, reference.droplets, "seed {seed}");
        }
    }

    #[test]
    fn spanned_basics() {
        let consts = DropletConstants::small();
        let s = dirs();
        let k = SiteSet::new([(0, 0)], win(), None);
        let run =
            droplet_algorithm(&k, None, &consts, false, &fam(), s, 1, None).unwrap();
        let d = run.droplets[0].clone();
        // The algorithm's own output is spanned by its input.
        assert!(is_spanned(&d, &k, None, &consts, false, &fam(), s, 1).unwrap());
        // Empty intersection: not spanned.
        let empty = SiteSet::empty(win());
        assert!(!is_spanned(&d, &empty, None, &consts, false, &fam(), s, 1).unwrap());
    }

    #[test]
    fn spanning_probability_endpoints() {
        let consts = DropletConstants::small();
        let s = dirs();
        let d = Droplet::Dyd(quad_of_cluster(&[(0, 0)], consts.c4, s));
        let e0 =
            estimate_spanning_probability(&d, 0.0, &fam(), s, &consts, 1, 20, 7).unwrap();
        assert_eq!(e0.successes, 0);
        let e1 =
            estimate_spanning_probability(&d, 1.0, &fam(), s, &consts, 1, 5, 7).unwrap();
        assert_eq!(e1.successes, 5);
        assert!(e1.lo > 0.5);
    }

    #[test]
    fn discretised_enumeration() {
        let s = dirs();
        let a = QPoint::from_site((0, 0));
        let small = enumerate_discretised_droplets(a, qi(1), s, 1 << 40, 10_000).unwrap();
        assert!(small.count >= 1);
        let mid = enumerate_discretised_droplets(a, qi(2), s, 1 << 60, 100).unwrap();
        assert!(mid.count > small.count);
        assert!(mid.truncated || mid.droplets.len() as u128 == mid.count);
        // Every materialised droplet contains the point.
        for d in small.droplets.iter().take(50) {
            assert!(d.contains(a));
        }
        // Cap error path.
        assert!(matches!(
            enumerate_discretised_droplets(a, qi(16), s, 10, 10),
            Err(EnumError::CapExceeded(_))
        ));
        assert!(matches!(
            enumerate_discretised_droplets(a, qi(0), s, 10, 10),
            Err(EnumError::TooSmall)
        ));
    }

    #[test]
    fn discretised_count_growth_bounded() {
        let s = dirs();
        let a = QPoint::from_site((0, 0));
        let c: f64 = 1024.0;
        let mut prev = 0u128;
        for d in [4u64, 8, 16] {
            let res =
                enumerate_discretised_droplets(a, qi(d as i128), s, u128::MAX / 4, 10)
                    .unwrap();
            assert!(res.count > prev);
            prev = res.count;
            let log_ratio = (res.count as f64).ln() / d as f64;
            assert!(log_ratio <= c.ln(), "log count per unit diameter {log_ratio}");
        }
    }
}
