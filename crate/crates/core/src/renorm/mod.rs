//! Renormalisation of the dynamics onto a triangular domain: columns,
//! staggered boundaries, arrow variables, block variables and the
//! bottleneck events they define.

mod chain;

pub use chain::RenormChain;

use crate::bootstrap::{closure, DirectionSet, SiteSet};
use crate::droplets::{droplet_algorithm, size, BoundaryRegion, DropletConstants};
use crate::family::UpdateFamily;
use crate::geom::{dot, point_from_thresholds, HalfPlane, QPoint, Window};
use crate::rational::{q, qi, Q};
use crate::seeds;
use num_traits::ToPrimitive;
use rand::Rng;
use std::collections::BTreeSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RenormError {
    #[error("invalid parameter: {0}")]
    BadParam(String),
    #[error("flip at {0:?} is not legal given the configuration and side boundary")]
    IllegalFlip((i64, i64)),
    #[error("site {0:?} is not a domain site")]
    OutsideDomain((i64, i64)),
    #[error("component analysis failed: {0}")]
    Components(#[from] crate::droplets::ComponentError),
}

/// Construction parameters: either desk-scale overrides or quantities
/// coupled to the vacancy density the way the continuum analysis fixes
/// them.
#[derive(Clone, Debug, PartialEq)]
pub enum RenormParams {
    Desk {
        /// Droplet-size threshold for arrows; also sets q_eff = e^{-l}.
        l: Q,
        /// Column width, in raw <x,u'> units.
        step: Q,
        /// Number of blocks; 2n columns.
        n_blocks: usize,
        lambda0_radius: Q,
    },
    Coupled {
        q: Q,
        alpha: u32,
        c5: Q,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct RenormGeometry {
    pub dirs: DirectionSet,
    pub l: Q,
    pub step: Q,
    pub n_blocks: usize,
    pub lambda0_radius: Q,
    pub window: Window,
}

fn q_pow(base: Q, e: u32) -> Q {
    let mut acc = qi(1);
    for _ in 0..e {
        acc = acc * base;
    }
    acc
}

impl RenormGeometry {
    pub fn n_cols(&self) -> usize {
        2 * self.n_blocks
    }

    /// Top threshold of <x,u'>; the origin sits mid-column 2N.
    pub fn t_top(&self) -> Q {
        q(4 * self.n_blocks as i128 - 1, 2) * self.step
    }

    /// Lower <.,u'> threshold of column i (also the H_i threshold).
    pub fn col_threshold(&self, i: usize) -> Q {
        self.t_top() - self.step * qi(i as i128)
    }

    /// Apex of the domain: <a0,u'> = -step/2, on the u' axis.
    pub fn apex(&self) -> QPoint {
        let u = self.dirs.u_prime;
        let c = -self.step / qi(2 * u.norm_sq());
        QPoint::new(c * qi(u.dx as i128), c * qi(u.dy as i128))
    }

    /// The two side half-planes (the fixed infected surround of V).
    pub fn side_boundary(&self) -> BoundaryRegion {
        BoundaryRegion::sides(self.apex(), self.dirs.u_prime1, self.dirs.u_prime2)
    }

    pub fn h_i_plane(&self, i: usize) -> HalfPlane {
        let u = self.dirs.u_prime;
        let t = self.col_threshold(i) / qi(u.norm_sq());
        HalfPlane::new(u, QPoint::new(t * qi(u.dx as i128), t * qi(u.dy as i128)))
    }

    /// The staggered boundary of column i: H_i plus both sides.
    pub fn partial_i(&self, i: usize) -> BoundaryRegion {
        let sides = self.side_boundary();
        let mut planes = vec![self.h_i_plane(i)];
        planes.extend_from_slice(sides.planes());
        BoundaryRegion::from_planes(planes)
    }

    pub fn in_domain(&self, s: (i64, i64)) -> bool {
        let p = QPoint::from_site(s);
        dot(self.dirs.u_prime, p) < self.t_top() && !self.side_boundary().contains(p)
    }

    pub fn column_of(&self, s: (i64, i64)) -> Option<usize> {
        if !self.in_domain(s) {
            return None;
        }
        let level = dot(self.dirs.u_prime, QPoint::from_site(s));
        (1..=self.n_cols()).find(|&i| {
            level >= self.col_threshold(i) && level < self.col_threshold(i - 1)
        })
    }

    /// Corner points of the closed region of column i.
    fn column_vertices(&self, i: usize) -> Vec<QPoint> {
        let u = self.dirs.u_prime;
        let a0 = self.apex();
        let (t_hi, t_lo) = (self.col_threshold(i - 1), self.col_threshold(i));
        let mut vs = Vec::new();
        for side in [self.dirs.u_prime1, self.dirs.u_prime2] {
            let ts = dot(side, a0);
            for t in [t_hi, t_lo] {
                if let Some(p) = point_from_thresholds(u, t, side, ts) {
                    vs.push(p);
                }
            }
        }
        vs
    }

    /// A column is usable only when its whole region fits in the window,
    /// so truncation can never silently change an arrow.
    pub fn column_defined(&self, i: usize) -> bool {
        self.column_vertices(i).iter().all(|p| {
            let (x0, x1) = (p.x.floor().to_integer(), p.x.ceil().to_integer());
            let (y0, y1) = (p.y.floor().to_integer(), p.y.ceil().to_integer());
            x0 >= self.window.x0 as i128
                && x1 < self.window.x1 as i128
                && y0 >= self.window.y0 as i128
                && y1 < self.window.y1 as i128
        })
    }

    pub fn column_sites(&self, i: usize) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for y in self.window.y0..self.window.y1 {
            for x in self.window.x0..self.window.x1 {
                if self.column_of((x, y)) == Some(i) {
                    out.push((x, y));
                }
            }
        }
        out
    }

    /// All domain lattice sites inside the window, sorted.
    pub fn domain_sites(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        for y in self.window.y0..self.window.y1 {
            for x in self.window.x0..self.window.x1 {
                if self.in_domain((x, y)) {
                    out.push((x, y));
                }
            }
        }
        out
    }
    pub fn lambda0_sites(&self) -> Vec<(i64, i64)> {
        let r = self.lambda0_radius;
        let reach = r.ceil().to_integer() as i64;
        let mut out = Vec::new();
        for x in -reach..=reach {
            for y in -reach..=reach {
                if qi((x as i128) * (x as i128) + (y as i128) * (y as i128)) <= r * r {
                    out.push((x, y));
                }
            }
        }
        out
    }

    pub fn q_eff(&self) -> f64 {
        (-self.l.to_f64().unwrap()).exp()
    }

    /// n = floor(L), the barrier height the block dynamics inherits.
    pub fn n_floor(&self) -> usize {
        self.l.floor().to_integer().max(0) as usize
    }

    fn validate(&self) -> Result<(), RenormError> {
        if self.l <= qi(0) || self.step <= qi(0) {
            return Err(RenormError::BadParam("l and step must be positive".into()));
        }
        if self.n_blocks < 1 {
            return Err(RenormError::BadParam("need at least one block".into()));
        }
        if self.column_of((0, 0)) != Some(self.n_cols()) {
            return Err(RenormError::BadParam(
                "origin must lie in the last column".into(),
            ));
        }
        // Columns partition the domain.
        for s in self.domain_sites() {
            let hits = (1..=self.n_cols())
                .filter(|&i| {
                    let level = dot(self.dirs.u_prime, QPoint::from_site(s));
                    level >= self.col_threshold(i) && level < self.col_threshold(i - 1)
                })
                .count();
            if hits != 1 {
                return Err(RenormError::BadParam(format!(
                    "site {s:?} lies in {hits} columns"
                )));
            }
        }
        for s in self.lambda0_sites() {
            if self.column_of(s) != Some(self.n_cols()) {
                return Err(RenormError::BadParam(format!(
                    "occupation ball site {s:?} outside the last column"
                )));
            }
        }
        Ok(())
    }
}

pub fn build_geometry(
    params: &RenormParams,
    dirs: DirectionSet,
    window: Window,
) -> Result<RenormGeometry, RenormError> {
    let geom = match *params {
        RenormParams::Desk { l, step, n_blocks, lambda0_radius } => RenormGeometry {
            dirs,
            l,
            step,
            n_blocks,
            lambda0_radius,
            window,
        },
        RenormParams::Coupled { q: qv, alpha, c5 } => {
            if qv <= qi(0) || qv >= qi(1) || c5 <= qi(0) {
                return Err(RenormError::BadParam("need 0 < q < 1 and C5 > 0".into()));
            }
            let qa = q_pow(qv, alpha);
            let l = qi(1) / (c5 * qa);
            // Least iota >= 1 with iota/(2 q^alpha) u' a lattice vector:
            // the scalar must be integral, so iota is the least admissible
            // multiple of 2 q^alpha.
            let half_inv = qi(1) / (qi(2) * qa);
            let k = half_inv.ceil();
            let iota = qi(k.to_integer()) / half_inv;
            let step = iota / qa;
            let lf = l.to_f64().unwrap();
            let n = (lf.exp() * qa.to_f64().unwrap()
                / (2.0 * iota.to_f64().unwrap())
                + 0.25)
                .round();
            if !(1.0..1e6).contains(&n) {
                return Err(RenormError::BadParam(format!(
                    "block count {n} out of representable range"
                )));
            }
            RenormGeometry {
                dirs,
                l,
                step,
                n_blocks: n as usize,
                lambda0_radius: (qi(1) / (qi(4) * qa)).min(step / qi(4)),
                window,
            }
        }
    };
    geom.validate()?;
    Ok(geom)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Arrow {
    Up,
    Down,
    /// Column truncated by the window; no value is guessed.
    Undefined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ArrowProfile {
    /// arrows[k] is the arrow of column k+1.
    pub arrows: Vec<Arrow>,
    /// Up-arrow positions, strictly increasing.
    pub up_set: Vec<usize>,
}

impl ArrowProfile {
    pub fn up_count(&self) -> usize {
        self.up_set.len()
    }

    pub fn arrow(&self, k: usize) -> Arrow {
        self.arrows[k - 1]
    }
}

fn domain_restriction(geom: &RenormGeometry, omega: &BTreeSet<(i64, i64)>) -> BTreeSet<(i64, i64)> {
    omega.iter().copied().filter(|&s| geom.in_domain(s)).collect()
}

/// Does the boundary-relative closure of omega carry a modified spanned
/// droplet of size at least L against the staggered boundary of column i?
fn column_has_droplet(
    omega: &BTreeSet<(i64, i64)>,
    i: usize,
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
) -> Result<bool, RenormError> {
    let b = geom.partial_i(i);
    let inside: Vec<(i64, i64)> = omega
        .iter()
        .copied()
        .filter(|&s| !b.contains_site(s))
        .collect();
    let k = SiteSet::new(inside, geom.window, Some(b.clone()));
    let closed = closure(&k, fam);
    let run = droplet_algorithm(
        &closed.sites,
        Some(&b),
        consts,
        true,
        fam,
        geom.dirs,
        alpha,
        None,
    )?;
    // The algorithm's outputs are exactly the maximal spanned droplets.
    Ok(run.droplets.iter().any(|d| match size(d, consts) {
        Ok(s) => s >= geom.l,
        Err(_) => false,
    }))
}

/// Position of the first up-arrow, or None. Undefined columns are skipped;
/// callers see them flagged in the full profile.
pub fn first_up_arrow(
    omega: &BTreeSet<(i64, i64)>,
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
) -> Result<Option<usize>, RenormError> {
    let omega = domain_restriction(geom, omega);
    for i in 1..=geom.n_cols() {
        if !geom.column_defined(i) {
            continue;
        }
        if column_has_droplet(&omega, i, geom, fam, consts, alpha)? {
            return Ok(Some(i));
        }
    }
    Ok(None)
}

/// Full arrow profile: iterate the first-up-arrow search on residuals
/// restricted below each found column.
pub fn arrow_profile(
    omega: &BTreeSet<(i64, i64)>,
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
) -> Result<ArrowProfile, RenormError> {
    let mut arrows = vec![Arrow::Down; geom.n_cols()];
    for (k, a) in arrows.iter_mut().enumerate() {
        if !geom.column_defined(k + 1) {
            *a = Arrow::Undefined;
        }
    }
    let mut up_set = Vec::new();
    let mut residual = domain_restriction(geom, omega);
    loop {
        match first_up_arrow(&residual, geom, fam, consts, alpha)? {
            None => break,
            Some(i) => {
                arrows[i - 1] = Arrow::Up;
                up_set.push(i);
                let t = geom.col_threshold(i);
                residual.retain(|&s| dot(geom.dirs.u_prime, QPoint::from_site(s)) < t);
            }
        }
    }
    Ok(ArrowProfile { arrows, up_set })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockConfig {
    /// eta[i] for block i+1: true iff both arrows of the block are down.
    pub eta: Vec<bool>,
    pub n_floor: usize,
}

pub fn eta_of(profile: &ArrowProfile, geom: &RenormGeometry) -> BlockConfig {
    let eta = (0..geom.n_blocks)
        .map(|i| {
            profile.arrows[2 * i] == Arrow::Down && profile.arrows[2 * i + 1] == Arrow::Down
        })
        .collect();
    BlockConfig { eta, n_floor: geom.n_floor() }
}

pub fn in_b_n(profile: &ArrowProfile, n: usize) -> bool {
    profile.up_count() >= n
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EventFlags {
    /// No up-arrows at all.
    pub all_down: bool,
    /// Up-arrow in the last column.
    pub up_last: bool,
    /// All down and the occupation ball fully occupied.
    pub good: bool,
}

pub fn event_flags(
    omega: &BTreeSet<(i64, i64)>,
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
) -> Result<EventFlags, RenormError> {
    let profile = arrow_profile(omega, geom, fam, consts, alpha)?;
    let all_down = profile.up_set.is_empty();
    let up_last = profile.arrow(geom.n_cols()) == Arrow::Up;
    let ball_occupied = geom.lambda0_sites().iter().all(|s| !omega.contains(s));
    Ok(EventFlags { all_down, up_last, good: all_down && ball_occupied })
}

/// Is the constraint at x satisfied by the empties of omega together with
/// the exterior of the domain? Everything outside the domain counts as
/// empty: the sides play the role of the droplet boundary, and the region
/// past the first column is the reservoir the block dynamics freezes
/// empty. Occupied exteriors would freeze the whole finite chain.
pub fn flip_is_legal(
    omega: &BTreeSet<(i64, i64)>,
    x: (i64, i64),
    geom: &RenormGeometry,
    fam: &UpdateFamily,
) -> bool {
    fam.rules.iter().any(|rule| {
        rule.iter().all(|&(dx, dy)| {
            let s = (x.0 + dx, x.1 + dy);
            omega.contains(&s) || !geom.in_domain(s)
        })
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ChainVerdict {
    Pass,
    Fail {
        before: Vec<Arrow>,
        after: Vec<Arrow>,
        column: usize,
        max_diff: usize,
    },
}

/// Check the alternating-chain law for one legal emptying flip: the two
/// profiles must be equal, or differ exactly on [i, j] (i the flip's
/// column) with the emptied configuration gaining the up-arrow at i and
/// the pattern alternating up to j, preceded by a shared up-arrow at i-1
/// (position 0 counting as up).
pub fn chain_flip_check(
    omega: &BTreeSet<(i64, i64)>,
    x: (i64, i64),
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
) -> Result<ChainVerdict, RenormError> {
    let i = geom.column_of(x).ok_or(RenormError::OutsideDomain(x))?;
    if omega.contains(&x) || !flip_is_legal(omega, x, geom, fam) {
        return Err(RenormError::IllegalFlip(x));
    }
    let before = arrow_profile(omega, geom, fam, consts, alpha)?;
    let mut emptied = omega.clone();
    emptied.insert(x);
    let after = arrow_profile(&emptied, geom, fam, consts, alpha)?;
    Ok(profile_pair_verdict(&before, &after, i, geom.n_cols()))
}

/// The comparison underlying chain_flip_check, on precomputed profiles.
pub fn profile_pair_verdict(
    before: &ArrowProfile,
    after: &ArrowProfile,
    i: usize,
    n_cols: usize,
) -> ChainVerdict {
    if before.arrows == after.arrows {
        return ChainVerdict::Pass;
    }
    let fail = |j: usize| ChainVerdict::Fail {
        before: before.arrows.clone(),
        after: after.arrows.clone(),
        column: i,
        max_diff: j,
    };
    let diffs: Vec<usize> = (1..=n_cols)
        .filter(|&k| before.arrow(k) != after.arrow(k))
        .collect();
    let j = *diffs.last().unwrap();
    // Differences must fill [i, j] exactly.
    if diffs != (i..=j).collect::<Vec<_>>() {
        return fail(j);
    }
    // Shared up-arrow just before the chain (position 0 counts as up).
    if i > 1 && before.arrow(i - 1) != Arrow::Up {
        return fail(j);
    }
    for k in i..=j {
        let (want_before, want_after) = if (k - i) % 2 == 0 {
            (Arrow::Down, Arrow::Up)
        } else {
            (Arrow::Up, Arrow::Down)
        };
        if before.arrow(k) != want_before || after.arrow(k) != want_after {
            return fail(j);
        }
    }
    ChainVerdict::Pass
}

/// Legality of a block-variable path for the East dynamics on blocks
/// 1..=N with block 0 frozen empty: consecutive states differ in at most
/// one block, and a changing block needs its predecessor empty.
pub fn eta_path_is_east_legal(etas: &[Vec<bool>]) -> bool {
    etas.windows(2).all(|w| {
        let diffs: Vec<usize> = (0..w[0].len()).filter(|&i| w[0][i] != w[1][i]).collect();
        match diffs[..] {
            [] => true,
            [i] => i == 0 || !w[0][i - 1],
            _ => false,
        }
    })
}

#[derive(Clone, Copy, Debug)]
pub struct WilsonEstimate {
    pub successes: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub lo: f64,
    pub hi: f64,
}

fn wilson(successes: u64, trials: u64) -> WilsonEstimate {
    let n = trials as f64;
    let p = successes as f64 / n;
    let z = 1.959963984540054f64;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = (z / denom) * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    WilsonEstimate {
        successes,
        trials,
        p_hat: p,
        lo: (centre - half).max(0.0),
        hi: (centre + half).min(1.0),
    }
}

#[derive(Clone, Debug)]
pub struct ArrowStats {
    /// Estimate of mu(at least one up-arrow).
    pub first_up: WilsonEstimate,
    /// b_n[k] estimates mu(at least k+1 up-arrows).
    pub b_n: Vec<WilsonEstimate>,
    pub q_eff: f64,
}

pub fn estimate_arrow_probabilities(
    qv: f64,
    geom: &RenormGeometry,
    fam: &UpdateFamily,
    consts: &DropletConstants,
    alpha: u32,
    trials: u64,
    master: u64,
    n_report: usize,
) -> Result<ArrowStats, RenormError> {
    assert!(trials >= 1 && (0.0..=1.0).contains(&qv));
    let sites = geom.domain_sites();
    let mut first = 0u64;
    let mut counts = vec![0u64; n_report];
    for trial in 0..trials {
        let mut rng = seeds::stream_rng(master, seeds::streams::ARROWS, trial);
        let omega: BTreeSet<(i64, i64)> = sites
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(qv))
            .collect();
        let profile = arrow_profile(&omega, geom, fam, consts, alpha)?;
        if !profile.up_set.is_empty() {
            first += 1;
        }
        for (n, c) in counts.iter_mut().enumerate() {
            if profile.up_count() >= n + 1 {
                *c += 1;
            }
        }
    }
    Ok(ArrowStats {
        first_up: wilson(first, trials),
        b_n: counts.into_iter().map(|c| wilson(c, trials)).collect(),
        q_eff: geom.q_eff(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::tiny_renorm_scenario;

    fn tiny() -> (RenormGeometry, UpdateFamily, DropletConstants, u32) {
        let s = tiny_renorm_scenario().unwrap();
        let geom = build_geometry(&s.renorm, s.dirs, s.window).unwrap();
        (geom, s.family, s.consts, s.alpha)
    }

    fn set(sites: &[(i64, i64)]) -> BTreeSet<(i64, i64)> {
        sites.iter().copied().collect()
    }

    #[test]
    fn desk_geometry_shape() {
        let (geom, ..) = tiny();
        assert_eq!(geom.n_cols(), 6);
        assert_eq!(geom.t_top(), q(11, 2));
        assert_eq!(geom.col_threshold(6), q(-1, 2));
        assert_eq!(geom.n_floor(), 1);
        assert!((geom.q_eff() - (-1.5f64).exp()).abs() < 1e-12);
        assert_eq!(geom.column_sites(1), vec![(-5, -1), (-5, 0), (-5, 1)]);
        assert_eq!(geom.column_sites(5), vec![(-1, 0)]);
        assert_eq!(geom.column_of((7, 0)), None);
        assert!(!geom.in_domain((0, 1)));
        assert!(!geom.in_domain((-6, 0)));
    }

    #[test]
    fn coupled_parameters() {
        let s = tiny_renorm_scenario().unwrap();
        let params = RenormParams::Coupled { q: q(1, 2), alpha: 1, c5: qi(2) };
        let geom = build_geometry(&params, s.dirs, s.window).unwrap();
        assert_eq!(geom.l, qi(1));
        assert_eq!(geom.step, qi(2));
        assert_eq!(geom.n_blocks, 1);
        assert_eq!(geom.lambda0_radius, q(1, 2));
        assert_eq!(geom.n_floor(), 1);
        assert!((geom.q_eff() - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn bad_params_rejected() {
        let s = tiny_renorm_scenario().unwrap();
        let bad = RenormParams::Desk {
            l: qi(0),
            step: qi(1),
            n_blocks: 3,
            lambda0_radius: q(1, 4),
        };
        assert!(build_geometry(&bad, s.dirs, s.window).is_err());
        let bad = RenormParams::Coupled { q: qi(1), alpha: 1, c5: qi(2) };
        assert!(build_geometry(&bad, s.dirs, s.window).is_err());
    }

    #[test]
    fn first_up_arrow_examples() {
        let (geom, fam, consts, alpha) = tiny();
        let none = first_up_arrow(&set(&[]), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(none, None);
        let mid = first_up_arrow(&set(&[(-3, 0)]), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(mid, Some(3));
        // More empties can only move the first up-arrow towards the top.
        let both =
            first_up_arrow(&set(&[(-3, 0), (-5, 1)]), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(both, Some(1));
    }

    #[test]
    fn first_up_arrow_is_a_stopping_time() {
        // The value i depends only on the configuration above the lower
        // threshold of column i; anything deeper may be resampled freely.
        let (geom, fam, consts, alpha) = tiny();
        let base = set(&[(-5, 0)]);
        assert_eq!(first_up_arrow(&base, &geom, &fam, &consts, alpha).unwrap(), Some(1));
        for extra in [
            vec![(-4, 1)],
            vec![(0, 0)],
            vec![(-4, -1), (-3, 0), (-2, 0), (-1, 0)],
        ] {
            let mut omega = base.clone();
            omega.extend(extra);
            assert_eq!(first_up_arrow(&omega, &geom, &fam, &consts, alpha).unwrap(), Some(1));
        }
    }

    #[test]
    fn arrow_profile_matches_emptied_columns() {
        // On this geometry any singleton vacancy spans a large enough
        // droplet, so the profile marks exactly the columns with a vacancy.
        let (geom, fam, consts, alpha) = tiny();
        let omega = set(&[(-5, 0), (-3, 1), (0, 0)]);
        let p = arrow_profile(&omega, &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(p.up_set, vec![1, 3, 6]);
        assert_eq!(p.up_count(), 3);
        assert_eq!(p.arrow(1), Arrow::Up);
        assert_eq!(p.arrow(2), Arrow::Down);
        assert!(p.up_set.len() <= geom.n_cols());
        assert!(p.up_set.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn eta_blocks_pair_columns() {
        let (geom, fam, consts, alpha) = tiny();
        let p = arrow_profile(&set(&[(-4, 0)]), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(p.up_set, vec![2]);
        let blocks = eta_of(&p, &geom);
        assert_eq!(blocks.eta, vec![false, true, true]);
        assert_eq!(blocks.n_floor, 1);
        assert!(in_b_n(&p, 1));
        assert!(!in_b_n(&p, 2));
    }

    #[test]
    fn event_flags_examples() {
        let (geom, fam, consts, alpha) = tiny();
        let f = event_flags(&set(&[]), &geom, &fam, &consts, alpha).unwrap();
        assert!(f.all_down && !f.up_last && f.good);
        let f = event_flags(&set(&[(0, 0)]), &geom, &fam, &consts, alpha).unwrap();
        assert!(!f.all_down && f.up_last && !f.good);
    }

    #[test]
    fn flip_legality_against_the_empty_exterior() {
        let (geom, fam, ..) = tiny();
        let full = set(&[]);
        // Corner sites lean on the exterior on two sides.
        assert!(flip_is_legal(&full, (-5, 1), &geom, &fam));
        assert!(flip_is_legal(&full, (-5, -1), &geom, &fam));
        // Interior sites need a vacancy to their west.
        assert!(!flip_is_legal(&full, (-5, 0), &geom, &fam));
        assert!(!flip_is_legal(&full, (0, 0), &geom, &fam));
        assert!(flip_is_legal(&set(&[(-1, 0)]), (0, 0), &geom, &fam));
    }

    #[test]
    fn chain_flip_check_examples() {
        let (geom, fam, consts, alpha) = tiny();
        // New vacancy in the top column: the profile gains the up-arrow
        // there and nothing else moves.
        let v = chain_flip_check(&set(&[]), (-5, 1), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(v, ChainVerdict::Pass);
        // Second vacancy in an already-up column: profiles are equal.
        let v =
            chain_flip_check(&set(&[(-5, 1)]), (-5, 0), &geom, &fam, &consts, alpha).unwrap();
        assert_eq!(v, ChainVerdict::Pass);
        // Occupied sites cannot be emptied again.
        let err = chain_flip_check(&set(&[(-5, 1)]), (-5, 1), &geom, &fam, &consts, alpha);
        assert_eq!(err, Err(RenormError::IllegalFlip((-5, 1))));
    }

    fn profile_of(arrows: &[Arrow]) -> ArrowProfile {
        let up_set = arrows
            .iter()
            .enumerate()
            .filter(|(_, &a)| a == Arrow::Up)
            .map(|(k, _)| k + 1)
            .collect();
        ArrowProfile { arrows: arrows.to_vec(), up_set }
    }

    #[test]
    fn verdict_accepts_alternating_chains_only() {
        use Arrow::{Down as D, Up as U};
        let v = |b: &[Arrow], a: &[Arrow], i| profile_pair_verdict(&profile_of(b), &profile_of(a), i, 4);
        let pass = ChainVerdict::Pass;
        assert_eq!(v(&[D, U, D, D], &[D, U, D, D], 2), pass);
        // Chain from the top column needs no preceding up-arrow.
        assert_eq!(v(&[D, U, D, D], &[U, D, D, D], 1), pass);
        assert_eq!(v(&[D, U, D, D], &[D, U, U, D], 3), pass);
        // A chain deeper in needs the shared up-arrow just before it.
        assert!(matches!(v(&[D, D, D, D], &[D, D, U, D], 3), ChainVerdict::Fail { .. }));
        // Differences must be contiguous from the flip column.
        assert!(matches!(v(&[D, D, D, D], &[U, D, U, D], 1), ChainVerdict::Fail { .. }));
        // And must alternate down/up.
        assert!(matches!(v(&[D, D, D, D], &[U, U, D, D], 1), ChainVerdict::Fail { .. }));
        // The emptied side gains the arrow, never loses it.
        assert!(matches!(v(&[U, D, D, D], &[D, D, D, D], 1), ChainVerdict::Fail { .. }));
    }

    #[test]
    fn eta_path_legality() {
        let p = |bits: &[u8]| bits.iter().map(|&b| b == 1).collect::<Vec<bool>>();
        // Block 0 is frozen empty, so block 1 may always move.
        assert!(eta_path_is_east_legal(&[p(&[1, 1, 1]), p(&[0, 1, 1])]));
        // A block needs an up-arrow (eta false) in its predecessor.
        assert!(eta_path_is_east_legal(&[p(&[0, 1, 1]), p(&[0, 0, 1])]));
        assert!(!eta_path_is_east_legal(&[p(&[1, 1, 1]), p(&[1, 0, 1])]));
        // At most one block changes per step; stutters are fine.
        assert!(eta_path_is_east_legal(&[p(&[1, 1, 1]), p(&[1, 1, 1])]));
        assert!(!eta_path_is_east_legal(&[p(&[1, 1, 1]), p(&[0, 0, 1])]));
    }

    #[test]
    fn arrow_estimates_degenerate_and_monotone() {
        let (geom, fam, consts, alpha) = tiny();
        let stats =
            estimate_arrow_probabilities(0.0, &geom, &fam, &consts, alpha, 5, 7, 2).unwrap();
        assert_eq!(stats.first_up.p_hat, 0.0);
        assert_eq!(stats.b_n[0].successes, 0);
        let stats =
            estimate_arrow_probabilities(0.3, &geom, &fam, &consts, alpha, 40, 7, 3).unwrap();
        assert_eq!(stats.first_up.p_hat, stats.b_n[0].p_hat);
        assert!(stats.b_n[0].p_hat >= stats.b_n[1].p_hat);
        assert!(stats.b_n[1].p_hat >= stats.b_n[2].p_hat);
        for w in stats.b_n.iter().chain([&stats.first_up]) {
            assert!(w.lo <= w.p_hat && w.p_hat <= w.hi);
            assert!((0.0..=1.0).contains(&w.lo) && (0.0..=1.0).contains(&w.hi));
        }
    }
}
