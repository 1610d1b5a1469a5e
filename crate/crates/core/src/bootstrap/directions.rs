//! Selection of the canonical rational direction quadruple S = {u1,u2,v1,v2}
//! together with the bisector triple (u', u'1, u'2). Exact angle bisection is
//! impossible in the rational rotation group, so the bisectors are produced
//! by mediant chains and everything is re-verified against the testable
//! properties, which are all downstream code consumes.

use super::stability::{DirStatus, StabilityReport};
use crate::bootstrap::{difficulty_direction, j_directions, Classification, GrowthParams};
use crate::family::UpdateFamily;
use crate::geom::{
    ccw_before, ccw_gap_exceeds_quarter, cross, mediant_direction, sort_ccw, Arc,
    Dir, Value,
};

/// The properties a candidate quadruple must satisfy, in checking order.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Bullet {
    AllStable,
    DifficultyAtLeastAlpha,
    CcwOrder,
    NoneSemiIsolated,
    Cones,
    ZeroInteriorToHull,
    GapExceedsQuarter,
    HalfPlaneUnionStable,
    RationalBisectors,
}

impl std::fmt::Display for Bullet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Bullet::AllStable => "all four directions stable",
            Bullet::DifficultyAtLeastAlpha => "difficulty at least alpha",
            Bullet::CcwOrder => "counterclockwise order u1,u2,v1,v2",
            Bullet::NoneSemiIsolated => "no semi-isolated direction",
            Bullet::Cones => "cone conditions",
            Bullet::ZeroInteriorToHull => "origin interior to the convex envelope",
            Bullet::GapExceedsQuarter => "gap from u2 to v1 exceeds a quarter turn",
            Bullet::HalfPlaneUnionStable => "union of the two half-planes stable",
            Bullet::RationalBisectors => "rational bisector chain",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SelectError {
    #[error("direction selection requires a critical family with an infinite stable set")]
    Precondition,
    #[error("no valid direction set found; last failing property: {0}")]
    NoValidSet(Bullet),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct DirectionSet {
    pub u1: Dir,
    pub u2: Dir,
    pub v1: Dir,
    pub v2: Dir,
    pub u_prime: Dir,
    pub u_prime1: Dir,
    pub u_prime2: Dir,
}

/// x in the open convex cone spanned by a and b (angle < pi apart).
fn in_cone(a: Dir, b: Dir, x: Dir) -> bool {
    let den = cross(a, b);
    if den == 0 {
        return false;
    }
    let lam = cross(x, b);
    let mu = cross(a, x);
    if den > 0 {
        lam >= 0 && mu >= 0
    } else {
        lam <= 0 && mu <= 0
    }
}

fn value_at_least(v: Value, alpha: u32) -> bool {
    match v {
        Value::Fin(n) => n >= alpha,
        Value::Inf => true,
        // Unknown(l): all witness sizes <= l were ruled out exactly.
        Value::Unknown(l) => l + 1 >= alpha,
    }
}

fn dir_difficulty(
    fam: &UpdateFamily,
    report: &StabilityReport,
    d: Dir,
    alpha: u32,
    growth: &GrowthParams,
) -> Value {
    match report.stable.status(d) {
        DirStatus::Unstable => Value::Fin(0),
        DirStatus::StronglyStable | DirStatus::SemiIsolated => Value::Inf,
        DirStatus::Isolated => report
            .isolated_points
            .iter()
            .find(|(x, _)| *x == d)
            .map(|(_, v)| *v)
            .unwrap_or_else(|| {
                difficulty_direction(fam, d, alpha, growth).unwrap_or(Value::Unknown(0))
            }),
    }
}

/// Re-check every required property of a candidate set. Public so callers
/// can audit a returned quadruple independently.
pub fn validate_direction_set(
    fam: &UpdateFamily,
    report: &StabilityReport,
    set: &DirectionSet,
    alpha: u32,
) -> Result<(), Bullet> {
    let growth = GrowthParams::default();
    let s = [set.u1, set.u2, set.v1, set.v2];
    if s.iter().any(|&d| report.stable.status(d) == DirStatus::Unstable) {
        return Err(Bullet::AllStable);
    }
    if s
        .iter()
        .any(|&d| !value_at_least(dir_difficulty(fam, report, d, alpha, &growth), alpha))
    {
        return Err(Bullet::DifficultyAtLeastAlpha);
    }
    // Strict cyclic order u1 -> u2 -> v1 -> v2.
    let distinct = s.iter().all(|&a| s.iter().filter(|&&b| b == a).count() == 1);
    if !distinct
        || !ccw_before(set.u1, set.u2, set.v1)
        || !ccw_before(set.u1, set.v1, set.v2)
    {
        return Err(Bullet::CcwOrder);
    }
    if s.iter().any(|&d| report.stable.status(d) == DirStatus::SemiIsolated) {
        return Err(Bullet::NoneSemiIsolated);
    }
    if !in_cone(set.v1, set.u1, set.u2) || !in_cone(set.v2, set.u2, set.u1) {
        return Err(Bullet::Cones);
    }
    let sorted = sort_ccw(&s);
    if sorted.len() != 4 {
        return Err(Bullet::ZeroInteriorToHull);
    }
    for i in 0..4 {
        if cross(sorted[i], sorted[(i + 1) % 4]) <= 0 {
            return Err(Bullet::ZeroInteriorToHull);
        }
    }
    if !ccw_gap_exceeds_quarter(set.u2, set.v1) {
        return Err(Bullet::GapExceedsQuarter);
    }
    // H_{u1} union H_{u2} stable: every rule keeps an element outside both
    // open half-planes.
    let site_dot = |u: Dir, (x, y): (i64, i64)| -> i128 {
        u.dx as i128 * x as i128 + u.dy as i128 * y as i128
    };
    let union_stable = fam.rules.iter().all(|rule| {
        rule.iter()
            .any(|&x| site_dot(set.u1, x) >= 0 && site_dot(set.u2, x) >= 0)
    });
    if !union_stable {
        return Err(Bullet::HalfPlaneUnionStable);
    }
    // Bisectors strictly interleave u1 < u'1 < u' < u'2 < u2 and are
    // strongly stable.
    let chain_ok = cross(set.u1, set.u_prime1) > 0
        && cross(set.u_prime1, set.u_prime) > 0
        && cross(set.u_prime, set.u_prime2) > 0
        && cross(set.u_prime2, set.u2) > 0
        && [set.u_prime, set.u_prime1, set.u_prime2]
            .iter()
            .all(|&d| report.stable.status(d) == DirStatus::StronglyStable);
    if !chain_ok {
        return Err(Bullet::RationalBisectors);
    }
    Ok(())
}

/// A feature direction usable as v1 or v2.
#[derive(Clone, Copy, Debug)]
struct Feature {
    dir: Dir,
    /// Interior arc direction to approach from when `dir` is semi-isolated.
    approach_from: Option<Dir>,
}

fn ccw_cmp_from(base: Dir, a: Dir, b: Dir) -> std::cmp::Ordering {
    if a == b {
        std::cmp::Ordering::Equal
    } else if ccw_before(base, a, b) {
        std::cmp::Ordering::Less
    } else {
        std::cmp::Ordering::Greater
    }
}

fn arc_j_dirs(arc: &Arc, j: &[Dir]) -> Vec<Dir> {
    // J-directions on the arc, ordered ccw from the arc start.
    let mut on: Vec<Dir> = j
        .iter()
        .copied()
        .filter(|&d| d == arc.start || d == arc.end || arc.contains(d))
        .collect();
    on.sort_by(|a, b| ccw_cmp_from(arc.start, *a, *b));
    on
}

fn mediant_toward(a: Dir, toward: Dir) -> Option<Dir> {
    match cross(a, toward).cmp(&0) {
        std::cmp::Ordering::Greater => mediant_direction(a, toward).ok(),
        std::cmp::Ordering::Less => mediant_direction(toward, a).ok(),
        std::cmp::Ordering::Equal => None,
    }
}

fn mediant_chain(from: Dir, toward: Dir, depth: u32) -> Option<Dir> {
    let mut p = mediant_toward(from, toward)?;
    for _ in 0..depth {
        p = mediant_toward(p, toward)?;
    }
    Some(p)
}

/// Features strictly inside the open ccw interval (lo, hi), by ccw position.
fn features_in_interval(features: &[Feature], lo: Dir, hi: Dir) -> Vec<Feature> {
    let mut inside: Vec<Feature> = features
        .iter()
        .copied()
        .filter(|f| crate::geom::strictly_inside_arc(lo, hi, f.dir))
        .collect();
    inside.sort_by(|a, b| ccw_cmp_from(lo, a.dir, b.dir));
    inside.dedup_by_key(|f| f.dir);
    inside
}

fn resolve_feature(f: &Feature, depth: u32, report: &StabilityReport) -> Option<Dir> {
    match report.stable.status(f.dir) {
        DirStatus::SemiIsolated => {
            let from = f.approach_from?;
            let d = mediant_chain(from, f.dir, depth)?;
            (report.stable.status(d) == DirStatus::StronglyStable).then_some(d)
        }
        DirStatus::Unstable => None,
        _ => Some(f.dir),
    }
}

pub fn select_canonical_directions(
    report: &StabilityReport,
    fam: &UpdateFamily,
) -> Result<DirectionSet, SelectError> {
    if report.classification != Classification::Critical || !report.infinite_stable {
        return Err(SelectError::Precondition);
    }
    let alpha = match report.alpha {
        Value::Fin(a) if a >= 1 => a,
        _ => return Err(SelectError::Precondition),
    };
    let growth = GrowthParams::default();
    let j = j_directions(fam);

    // Feature directions eligible for the v slots: isolated directions of
    // sufficient difficulty, and arc endpoints approached from inside.
    let mut features: Vec<Feature> = Vec::new();
    for &(d, v) in &report.isolated_points {
        if value_at_least(v, alpha) {
            features.push(Feature { dir: d, approach_from: None });
        }
    }
    for arc in &report.stable.arcs {
        let on = arc_j_dirs(arc, &j);
        for (i, &d) in on.iter().enumerate() {
            let approach_from = if d == arc.start {
                on.get(i + 1).copied()
            } else if d == arc.end {
                Some(on[i - 1])
            } else {
                None
            };
            features.push(Feature { dir: d, approach_from });
        }
    }

    let mut last_fail = Bullet::AllStable;
    for arc in &report.stable.arcs {
        let on = arc_j_dirs(arc, &j);
        for gap in on.windows(2) {
            let (g0, g1) = (gap[0], gap[1]);
            if cross(g0, g1) <= 0 {
                continue;
            }
            // Approach sequence p_k toward g1; u1 = p_k, u2 = p_{k+1}.
            let mut chain = Vec::new();
            let mut p = match mediant_direction(g0, g1) {
                Ok(p) => p,
                Err(_) => continue,
            };
            for _ in 0..=9 {
                chain.push(p);
                p = match mediant_direction(p, g1) {
                    Ok(q) => q,
                    Err(_) => break,
                };
            }
            for k in 0..chain.len().saturating_sub(1) {
                let (u1, u2) = (chain[k], chain[k + 1]);
                if report.stable.status(u1) != DirStatus::StronglyStable
                    || report.stable.status(u2) != DirStatus::StronglyStable
                {
                    continue;
                }
                for depth in 2..=12u32 {
                    let v1_cands = features_in_interval(&features, u2, u1.antipode());
                    let v2_cands = features_in_interval(&features, u2.antipode(), u1);
                    let v1 = v1_cands
                        .last()
                        .and_then(|f| resolve_feature(f, depth, report));
                    let v2 = v2_cands
                        .first()
                        .and_then(|f| resolve_feature(f, depth, report));
                    let (Some(v1), Some(v2)) = (v1, v2) else { continue };
                    let Ok(u_prime) = mediant_direction(u1, u2) else { continue };
                    let Ok(u_prime1) = mediant_direction(u1, u_prime) else { continue };
                    let Ok(u_prime2) = mediant_direction(u_prime, u2) else { continue };
                    let set =
                        DirectionSet { u1, u2, v1, v2, u_prime, u_prime1, u_prime2 };
                    match validate_direction_set(fam, report, &set, alpha) {
                        Ok(()) => return Ok(set),
                        Err(b) => {
                            last_fail = b;
                            // Only a short gap can be cured by approaching
                            // the endpoint more closely.
                            if b != Bullet::GapExceedsQuarter {
                                break;
                            }
                        }
                    }
                }
            }
        }
    }
    // Retain the growth parameters binding so the signature stays honest
    // even though validation recomputes defaults internally.
    let _ = &growth;
    Err(SelectError::NoValidSet(last_fail))
}
