//! Difficulty of directions and families via the doubling-strip growth
//! oracle. FINITE verdicts are exact (the closure stabilised strictly
//! inside the margin); INFINITE is a semidecision.

use super::closure::{closure_with_boundary, SiteSet};
use super::stability::{
    is_stable_direction, stable_arcs, Classification, DirStatus, StabilityReport,
};
use crate::droplets::BoundaryRegion;
use crate::family::UpdateFamily;
use crate::geom::{
    gap_representative, sort_ccw, CirclePartition, Dir, HalfPlane, QPoint, Value, Window,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GrowthConfigError {
    #[error("growth widths must increase: w0={0}, w_max={1}")]
    WidthsNotIncreasing(i64, i64),
}

/// Parameters of the doubling growth oracle.
#[derive(Clone, Copy, Debug)]
pub struct GrowthParams {
    /// Initial window half-width.
    pub w0: i64,
    /// Final window half-width (widths double from w0 up to w_max).
    pub w_max: i64,
    /// Strip thickness multiplier h = strip_factor * radius * n.
    pub strip_factor: i64,
    /// Cap on candidate sets examined per n.
    pub candidate_cap: usize,
}

impl Default for GrowthParams {
    fn default() -> Self {
        GrowthParams { w0: 8, w_max: 64, strip_factor: 3, candidate_cap: 20000 }
    }
}

impl GrowthParams {
    pub fn validate(&self) -> Result<(), GrowthConfigError> {
        if self.w_max <= self.w0 || self.w0 < 2 {
            return Err(GrowthConfigError::WidthsNotIncreasing(self.w0, self.w_max));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GrowthVerdict {
    Infinite,
    Finite,
    Unknown,
}

/// Does [H_u + K] \ H_u grow without bound? Runs the boundary closure on
/// windows of doubling width; INFINITE requires the infected count to grow
/// at every doubling with the frontier advancing both ways along the line.
pub fn growth_oracle(
    fam: &UpdateFamily,
    u: Dir,
    k: &[(i64, i64)],
    growth: &GrowthParams,
) -> GrowthVerdict {
    let boundary =
        BoundaryRegion::halfplane(HalfPlane::new(u, QPoint::from_site((0, 0))));
    let t = u.perp();
    let margin = fam.linf_radius().max(1);
    let mut prev: Option<(usize, i128, i128)> = None;
    let mut all_advancing = true;
    let mut w = growth.w0;
    let mut widths_run = 0;
    while w <= growth.w_max {
        let window = Window::centered(w, margin);
        let sites = SiteSet::new(k.iter().copied(), window, None);
        let res = closure_with_boundary(&sites, &boundary, fam);
        if res.exact {
            // The closure never came near the edge: the infinite-lattice
            // closure is this finite set.
            return GrowthVerdict::Finite;
        }
        let count = res.sites.len();
        let (mut tmax, mut tmin) = (i128::MIN, i128::MAX);
        for &(x, y) in &res.sites.sites {
            let v = t.dx as i128 * x as i128 + t.dy as i128 * y as i128;
            tmax = tmax.max(v);
            tmin = tmin.min(v);
        }
        if let Some((pc, pmax, pmin)) = prev {
            if !(count > pc && tmax > pmax && tmin < pmin) {
                all_advancing = false;
            }
        }
        prev = Some((count, tmax, tmin));
        widths_run += 1;
        w *= 2;
    }
    if widths_run >= 3 && all_advancing && prev.map_or(false, |(c, _, _)| c > 0) {
        GrowthVerdict::Infinite
    } else {
        GrowthVerdict::Unknown
    }
}

/// Candidate helper sites for difficulty n: lattice points on the closed
/// side of H_u within L-inf distance h of its boundary line. `period`
/// restricts to one fundamental domain along the line direction.
fn strip_candidates(u: Dir, h: i64, period_only: bool) -> Vec<(i64, i64)> {
    let t = u.perp();
    let l1 = (u.dx.abs() + u.dy.abs()) as i128;
    let depth = h as i128 * l1;
    let tnorm = t.dx as i128 * t.dx as i128 + t.dy as i128 * t.dy as i128;
    let along = if period_only { tnorm } else { depth.max(tnorm) * 2 };
    let bound = (depth + along + 2) as i64;
    let mut out = Vec::new();
    for x in -bound..=bound {
        for y in -bound..=bound {
            let du = u.dx as i128 * x as i128 + u.dy as i128 * y as i128;
            if du < 0 || du > depth {
                continue;
            }
            let dt = t.dx as i128 * x as i128 + t.dy as i128 * y as i128;
            let ok = if period_only { (0..tnorm).contains(&dt) } else { dt.abs() <= along };
            if ok {
                out.push((x, y));
            }
        }
    }
    out.sort_unstable();
    out
}

/// Difficulty of a single direction.
pub fn difficulty_direction(
    fam: &UpdateFamily,
    u: Dir,
    n_max: u32,
    growth: &GrowthParams,
) -> Result<Value, GrowthConfigError> {
    growth.validate()?;
    if !is_stable_direction(fam, u) {
        return Ok(Value::Fin(0));
    }
    let stable = stable_arcs(fam);
    match stable.status(u) {
        DirStatus::StronglyStable | DirStatus::SemiIsolated => return Ok(Value::Inf),
        DirStatus::Unstable => unreachable!("checked above"),
        DirStatus::Isolated => {}
    }
    let radius = fam.radius();
    for n in 1..=n_max {
        let h = growth.strip_factor * radius * n as i64;
        let first = strip_candidates(u, h, true);
        let rest = strip_candidates(u, h, false);
        let mut budget = growth.candidate_cap;
        let mut sets: Vec<Vec<(i64, i64)>> = Vec::new();
        // First site modulo the line period, remaining sites free in the
        // strip; sets assembled lexicographically.
        fn extend(
            sets: &mut Vec<Vec<(i64, i64)>>,
            cur: &mut Vec<(i64, i64)>,
            rest: &[(i64, i64)],
            need: usize,
            budget: &mut usize,
        ) {
            if *budget == 0 {
                return;
            }
            if need == 0 {
                *budget -= 1;
                sets.push(cur.clone());
                return;
            }
            for (i, &s) in rest.iter().enumerate() {
                if cur.contains(&s) {
                    continue;
                }
                cur.push(s);
                extend(sets, cur, &rest[i + 1..], need - 1, budget);
                cur.pop();
                if *budget == 0 {
                    return;
                }
            }
        }
        for &f in &first {
            let mut cur = vec![f];
            extend(&mut sets, &mut cur, &rest, (n - 1) as usize, &mut budget);
        }
        let mut saw_unknown = budget == 0;
        for set in &sets {
            match growth_oracle(fam, u, set, growth) {
                GrowthVerdict::Infinite => return Ok(Value::Fin(n)),
                GrowthVerdict::Finite => {}
                GrowthVerdict::Unknown => saw_unknown = true,
            }
        }
        if saw_unknown {
            // Cannot rule out difficulty n; report the best lower bound.
            return Ok(Value::Unknown(n - 1));
        }
    }
    Ok(Value::Unknown(n_max))
}

/// The annotated circle partition of stability/difficulty features.
fn difficulty_partition(
    fam: &UpdateFamily,
    n_max: u32,
    growth: &GrowthParams,
) -> Result<(CirclePartition, Vec<(Dir, Value)>), GrowthConfigError> {
    let stable = stable_arcs(fam);
    if stable.full_circle {
        return Ok((CirclePartition::uniform(Value::Inf), vec![]));
    }
    let mut isolated_vals = Vec::new();
    for &d in &stable.isolated {
        isolated_vals.push((d, difficulty_direction(fam, d, n_max, growth)?));
    }
    let mut dirs: Vec<Dir> = stable.isolated.clone();
    for a in &stable.arcs {
        dirs.push(a.start);
        dirs.push(a.end);
    }
    if dirs.is_empty() {
        return Ok((CirclePartition::uniform(Value::Fin(0)), vec![]));
    }
    let dirs = sort_ccw(&dirs);
    let mut cells = Vec::new();
    let mut gaps = Vec::new();
    for (i, &d) in dirs.iter().enumerate() {
        let pv = match stable.status(d) {
            DirStatus::Isolated => {
                isolated_vals.iter().find(|(x, _)| *x == d).unwrap().1
            }
            DirStatus::SemiIsolated | DirStatus::StronglyStable => Value::Inf,
            DirStatus::Unstable => Value::Fin(0),
        };
        let rep = if dirs.len() == 1 {
            d.perp()
        } else {
            gap_representative(d, dirs[(i + 1) % dirs.len()])
        };
        let gv = match stable.status(rep) {
            DirStatus::StronglyStable => Value::Inf,
            _ => Value::Fin(0),
        };
        cells.push((d, pv));
        gaps.push(gv);
    }
    let part = CirclePartition::new(cells, gaps).expect("partition from sorted features");
    Ok((part, isolated_vals))
}

/// Candidate poles: semicircles change contents only when an endpoint
/// crosses a feature direction.
fn candidate_poles(feature_dirs: &[Dir]) -> Vec<Dir> {
    let mut poles = Vec::new();
    for &d in feature_dirs {
        poles.push(d.perp());
        poles.push(d.perp().antipode());
    }
    let sorted = sort_ccw(&poles);
    let mut out = sorted.clone();
    for (i, &d) in sorted.iter().enumerate() {
        let next = sorted[(i + 1) % sorted.len()];
        if sorted.len() == 1 {
            out.push(d.perp());
        } else if d != next {
            out.push(gap_representative(d, next));
        }
    }
    sort_ccw(&out)
}

/// alpha(U): inf over open semicircles of the sup of difficulties.
pub fn difficulty_family(
    fam: &UpdateFamily,
    n_max: u32,
    growth: &GrowthParams,
) -> Result<Value, GrowthConfigError> {
    let (part, _) = difficulty_partition(fam, n_max, growth)?;
    Ok(family_alpha(&part))
}

fn family_alpha(part: &CirclePartition) -> Value {
    if part.whole.is_some() {
        return part.semicircle_sup(Dir::d(1, 0), false);
    }
    let poles = candidate_poles(&part.dirs);
    let mut best: Option<Value> = None;
    for c in poles {
        let s = part.semicircle_sup(c, false);
        best = Some(match best {
            None => s,
            Some(b) => b.inf(s),
        });
    }
    best.unwrap_or(Value::Fin(0))
}

fn family_alpha_closed(part: &CirclePartition) -> Value {
    if part.whole.is_some() {
        return part.semicircle_sup(Dir::d(1, 0), true);
    }
    let poles = candidate_poles(&part.dirs);
    let mut best: Option<Value> = None;
    for c in poles {
        let s = part.semicircle_sup(c, true);
        best = Some(match best {
            None => s,
            Some(b) => b.inf(s),
        });
    }
    best.unwrap_or(Value::Fin(0))
}

/// Full classification report.
pub fn classify(
    fam: &UpdateFamily,
    n_max: u32,
    growth: &GrowthParams,
) -> Result<StabilityReport, GrowthConfigError> {
    let stable = stable_arcs(fam);
    let (part, isolated_points) = difficulty_partition(fam, n_max, growth)?;
    let alpha = family_alpha(&part);
    let classification = match alpha {
        Value::Fin(0) => Classification::Supercritical,
        Value::Fin(_) => Classification::Critical,
        Value::Inf => Classification::Subcritical,
        Value::Unknown(_) => Classification::Unresolved,
    };
    let balanced = match alpha {
        Value::Unknown(_) => None,
        _ => {
            let closed = family_alpha_closed(&part);
            match closed {
                Value::Unknown(_) => None,
                c => Some(c == alpha),
            }
        }
    };
    let infinite_stable = stable.has_nondegenerate_arc();
    Ok(StabilityReport {
        stable,
        isolated_points,
        classification,
        alpha,
        infinite_stable,
        balanced,
    })
}
