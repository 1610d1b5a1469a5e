//! Exhaustive dynamics over a tiny renormalised domain: configurations as
//! bit masks over the domain sites, legal flips against the occupied
//! exterior plus the side boundary, memoised arrow profiles, and BFS
//! reachability under a forbidden-set restriction.

use super::{
    arrow_profile, profile_pair_verdict, ArrowProfile, ChainVerdict, RenormError, RenormGeometry,
};
use crate::droplets::DropletConstants;
use crate::family::UpdateFamily;
use std::cell::RefCell;
use std::collections::{BTreeSet, HashMap, VecDeque};

pub const CHAIN_CAP: usize = 20;

pub struct RenormChain {
    pub geom: RenormGeometry,
    pub fam: UpdateFamily,
    pub consts: DropletConstants,
    pub alpha: u32,
    pub sites: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    /// Per site, per rule: mask of domain sites that must be empty, or
    /// None when the translate hits an occupied exterior site.
    needs: Vec<Vec<Option<u64>>>,
    site_in_last_col: Vec<bool>,
    /// Bits of sites inside the renormalised domain; the profile reads
    /// only these.
    domain_mask: u64,
    profiles: RefCell<HashMap<u64, ArrowProfile>>,
}

impl RenormChain {
    pub fn new(
        geom: RenormGeometry,
        fam: UpdateFamily,
        consts: DropletConstants,
        alpha: u32,
    ) -> Result<RenormChain, RenormError> {
        let sites = geom.domain_sites();
        if sites.len() > CHAIN_CAP {
            return Err(RenormError::BadParam(format!(
                "{} domain sites exceed the exhaustive cap {CHAIN_CAP}",
                sites.len()
            )));
        }
        let index: HashMap<(i64, i64), usize> =
            sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        // Everything outside the domain counts as empty, matching the flip
        // legality of the sampled dynamics. A translate inside the domain
        // but outside the window would be a setup error.
        let needs = sites
            .iter()
            .map(|&(x, y)| {
                fam.rules
                    .iter()
                    .map(|rule| {
                        let mut mask = 0u64;
                        for &(dx, dy) in rule {
                            let s = (x + dx, y + dy);
                            match index.get(&s) {
                                Some(&i) => mask |= 1 << i,
                                None if !geom.in_domain(s) => {}
                                None => return None,
                            }
                        }
                        Some(mask)
                    })
                    .collect()
            })
            .collect();
        let last = geom.n_cols();
        let site_in_last_col: Vec<bool> =
            sites.iter().map(|&s| geom.column_of(s) == Some(last)).collect();
        let domain_mask = sites
            .iter()
            .enumerate()
            .filter(|(_, &s)| geom.in_domain(s))
            .fold(0u64, |m, (i, _)| m | (1 << i));
        Ok(RenormChain {
            geom,
            fam,
            consts,
            alpha,
            sites,
            index,
            needs,
            site_in_last_col,
            domain_mask,
            profiles: RefCell::new(HashMap::new()),
        })
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_index(&self, s: (i64, i64)) -> Option<usize> {
        self.index.get(&s).copied()
    }

    pub fn mask_of(&self, omega: &BTreeSet<(i64, i64)>) -> u64 {
        omega
            .iter()
            .filter_map(|s| self.site_index(*s))
            .fold(0, |m, i| m | (1 << i))
    }

    pub fn omega_of(&self, mask: u64) -> BTreeSet<(i64, i64)> {
        self.sites
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &s)| s)
            .collect()
    }

    pub fn constraint(&self, mask: u64, x: usize) -> bool {
        self.needs[x]
            .iter()
            .any(|r| r.is_some_and(|need| mask & need == need))
    }

    /// Memoised arrow profile of a configuration; only domain bits matter.
    pub fn profile(&self, mask: u64) -> Result<ArrowProfile, RenormError> {
        let mask = mask & self.domain_mask;
        if let Some(p) = self.profiles.borrow().get(&mask) {
            return Ok(p.clone());
        }
        let p = arrow_profile(
            &self.omega_of(mask),
            &self.geom,
            &self.fam,
            &self.consts,
            self.alpha,
        )?;
        self.profiles.borrow_mut().insert(mask, p.clone());
        Ok(p)
    }

    pub fn up_count(&self, mask: u64) -> Result<usize, RenormError> {
        Ok(self.profile(mask)?.up_count())
    }

    /// Chain-law verdict for the legal emptying flip of site x, using the
    /// memoised profiles. The bit of x must be clear in `mask`.
    pub fn flip_verdict(&self, mask: u64, x: usize) -> Result<ChainVerdict, RenormError> {
        if mask >> x & 1 == 1 || !self.constraint(mask, x) {
            return Err(RenormError::IllegalFlip(self.sites[x]));
        }
        let col = self
            .geom
            .column_of(self.sites[x])
            .ok_or(RenormError::OutsideDomain(self.sites[x]))?;
        let before = self.profile(mask)?;
        let after = self.profile(mask | (1 << x))?;
        Ok(profile_pair_verdict(&before, &after, col, self.geom.n_cols()))
    }

    /// All occupied in the occupation ball around the origin.
    pub fn ball_occupied(&self, mask: u64) -> bool {
        self.geom
            .lambda0_sites()
            .iter()
            .all(|s| self.site_index(*s).map_or(true, |i| mask >> i & 1 == 0))
    }

    /// BFS over legal flips restricted to non-forbidden states; returns a
    /// witness state path when a target is reachable.
    pub fn reachable_avoiding(
        &self,
        starts: &[u64],
        target: impl Fn(&RenormChain, u64) -> Result<bool, RenormError>,
        forbidden: impl Fn(&RenormChain, u64) -> Result<bool, RenormError>,
    ) -> Result<Option<Vec<u64>>, RenormError> {
        let mut parent: HashMap<u64, u64> = HashMap::new();
        let mut seen: HashMap<u64, ()> = HashMap::new();
        let mut queue = VecDeque::new();
        for &s in starts {
            if forbidden(self, s)? || seen.contains_key(&s) {
                continue;
            }
            seen.insert(s, ());
            queue.push_back(s);
        }
        while let Some(m) = queue.pop_front() {
            if target(self, m)? {
                let mut path = vec![m];
                let mut cur = m;
                while let Some(&prev) = parent.get(&cur) {
                    path.push(prev);
                    cur = prev;
                }
                path.reverse();
                return Ok(Some(path));
            }
            for x in 0..self.n_sites() {
                if self.constraint(m, x) {
                    let m2 = m ^ (1 << x);
                    if !seen.contains_key(&m2) && !forbidden(self, m2)? {
                        seen.insert(m2, ());
                        parent.insert(m2, m);
                        queue.push_back(m2);
                    }
                }
            }
        }
        Ok(None)
    }

    /// Every mask in 0..2^n, for exhaustive scans.
    pub fn all_states(&self) -> impl Iterator<Item = u64> {
        0..(1u64 << self.n_sites())
    }

    /// Stuttering steps are allowed: filtered paths repeat states.
    pub fn path_is_legal(&self, path: &[u64]) -> bool {
        path.windows(2).all(|w| {
            let diff = w[0] ^ w[1];
            diff == 0
                || (diff.count_ones() == 1
                    && self.constraint(w[0], diff.trailing_zeros() as usize))
        })
    }

    /// The last-column filtering of a legal path: replay the same flips,
    /// but a flip in the last column is performed only when it empties the
    /// site. The output is again legal, pointwise below the input, and
    /// agrees with it outside the last column.
    pub fn filter_last_column(&self, path: &[u64]) -> Vec<u64> {
        let mut out = vec![path[0]];
        for w in path.windows(2) {
            let diff = w[0] ^ w[1];
            let cur = *out.last().unwrap();
            if diff.count_ones() != 1 {
                out.push(cur);
                continue;
            }
            let x = diff.trailing_zeros() as usize;
            let emptying = cur >> x & 1 == 0;
            if !self.site_in_last_col[x] || emptying {
                out.push(cur ^ (1 << x));
            } else {
                out.push(cur);
            }
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::renorm::{build_geometry, flip_is_legal, Arrow, RenormParams};
    use crate::scenario::tiny_renorm_scenario;

    fn tiny_chain() -> RenormChain {
        let s = tiny_renorm_scenario().unwrap();
        let geom = build_geometry(&s.renorm, s.dirs, s.window).unwrap();
        RenormChain::new(geom, s.family, s.consts, s.alpha).unwrap()
    }

    #[test]
    fn cap_guards_the_state_space() {
        let s = tiny_renorm_scenario().unwrap();
        let params = RenormParams::Desk {
            l: crate::rational::q(3, 2),
            step: crate::rational::qi(1),
            n_blocks: 8,
            lambda0_radius: crate::rational::q(1, 4),
        };
        let geom = build_geometry(&params, s.dirs, s.window).unwrap();
        assert!(geom.domain_sites().len() > CHAIN_CAP);
        assert!(RenormChain::new(geom, s.family, s.consts, s.alpha).is_err());
    }

    #[test]
    fn mask_roundtrip_and_constraint_agreement() {
        let chain = tiny_chain();
        assert_eq!(chain.n_sites(), 12);
        for mask in [0u64, 0b1010, 0b110010101, (1 << 12) - 1] {
            let omega = chain.omega_of(mask);
            assert_eq!(chain.mask_of(&omega), mask);
            for x in 0..chain.n_sites() {
                assert_eq!(
                    chain.constraint(mask, x),
                    flip_is_legal(&omega, chain.sites[x], &chain.geom, &chain.fam)
                );
            }
        }
    }

    #[test]
    fn flip_verdicts_match_the_slow_path() {
        let chain = tiny_chain();
        let corner = chain.site_index((-5, 1)).unwrap();
        assert_eq!(chain.flip_verdict(0, corner).unwrap(), ChainVerdict::Pass);
        // Occupied exterior never applies: already-empty sites error out.
        assert!(chain.flip_verdict(1 << corner, corner).is_err());
        let origin = chain.site_index((0, 0)).unwrap();
        assert!(chain.flip_verdict(0, origin).is_err());
        assert_eq!(chain.up_count(0).unwrap(), 0);
        assert_eq!(chain.up_count(1 << corner).unwrap(), 1);
        assert!(chain.ball_occupied(0));
        assert!(!chain.ball_occupied(1 << origin));
    }

    /// Left-to-right emptying wave: corner first, then each site once its
    /// west neighbour is empty, down to the origin.
    fn wave(chain: &RenormChain) -> Vec<u64> {
        let flips = [
            (-5, 1),
            (-5, 0),
            (-4, 1),
            (-4, 0),
            (-3, 1),
            (-3, 0),
            (-2, 0),
            (-1, 0),
            (0, 0),
        ];
        let mut path = vec![0u64];
        for s in flips {
            let x = chain.site_index(s).unwrap();
            path.push(path.last().unwrap() | (1 << x));
        }
        path
    }

    #[test]
    fn wave_path_is_legal_and_reaches_the_last_column() {
        let chain = tiny_chain();
        let path = wave(&chain);
        assert!(chain.path_is_legal(&path));
        let last = *path.last().unwrap();
        assert_eq!(chain.profile(last).unwrap().arrow(chain.geom.n_cols()), Arrow::Up);
        // BFS finds the same event without help.
        let found = chain
            .reachable_avoiding(
                &[0],
                |c, m| Ok(c.profile(m)?.arrow(c.geom.n_cols()) == Arrow::Up),
                |_, _| Ok(false),
            )
            .unwrap()
            .expect("up-arrow in the last column is reachable");
        assert!(chain.path_is_legal(&found));
        assert_eq!(found.len(), path.len());
    }

    #[test]
    fn last_column_filter_properties() {
        let chain = tiny_chain();
        let origin = chain.site_index((0, 0)).unwrap();
        let mut path = wave(&chain);
        // Refill and re-empty the origin; the filter must suppress the
        // refill and stutter instead.
        let last = *path.last().unwrap();
        path.push(last & !(1 << origin));
        path.push(last);
        assert!(chain.path_is_legal(&path));
        let filtered = chain.filter_last_column(&path);
        assert_eq!(filtered.len(), path.len());
        assert!(chain.path_is_legal(&filtered));
        let last_col_bits = 1u64 << origin;
        for (a, b) in path.iter().zip(&filtered) {
            // No site the original keeps empty is refilled, and nothing
            // changes outside the last column.
            assert_eq!(a & !last_col_bits, b & !last_col_bits);
            assert_eq!(a & !b, 0);
        }
        assert_ne!(filtered, path);
    }
}
