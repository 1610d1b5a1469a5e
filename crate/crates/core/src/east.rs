//! The East chain on sites 1..=M with site 0 frozen empty: legal moves,
//! exact energy barriers by exhaustive search, and continuous-time runs.

use crate::seeds;
use rand::Rng;
use std::collections::VecDeque;

/// Occupancies of sites 1..=M packed into a bit mask, bit x-1 for site x
/// (set = occupied). Site 0 is virtual and always empty.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EastConfig {
    pub m: u32,
    pub occupied: u32,
}

impl EastConfig {
    pub fn fully_occupied(m: u32) -> EastConfig {
        EastConfig { m, occupied: (1u32 << m) - 1 }
    }

    pub fn is_occupied(&self, x: u32) -> bool {
        x != 0 && self.occupied >> (x - 1) & 1 == 1
    }

    pub fn flipped(&self, x: u32) -> EastConfig {
        EastConfig { m: self.m, occupied: self.occupied ^ (1 << (x - 1)) }
    }

    pub fn empties(&self) -> u32 {
        self.m - self.occupied.count_ones()
    }
}

/// Sites whose constraint is satisfied: x is flippable iff x-1 is empty.
pub fn east_legal_moves(cfg: EastConfig) -> Vec<u32> {
    (1..=cfg.m).filter(|&x| !cfg.is_occupied(x - 1)).collect()
}

pub const M_CAP: u32 = 16;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EastError {
    #[error("M = {0} exceeds the exhaustive-search cap {M_CAP}")]
    TooLarge(u32),
    #[error("M must be at least 1")]
    Empty,
}

/// Is a configuration with site M empty reachable from fully occupied
/// without ever exceeding `budget` simultaneous empties?
fn reachable_under_budget(m: u32, budget: u32) -> bool {
    let start = EastConfig::fully_occupied(m);
    if start.empties() > budget {
        return false;
    }
    let mut seen = vec![false; 1usize << m];
    let mut queue = VecDeque::from([start]);
    seen[start.occupied as usize] = true;
    while let Some(cfg) = queue.pop_front() {
        if !cfg.is_occupied(m) {
            return true;
        }
        for x in east_legal_moves(cfg) {
            let next = cfg.flipped(x);
            if next.empties() <= budget && !seen[next.occupied as usize] {
                seen[next.occupied as usize] = true;
                queue.push_back(next);
            }
        }
    }
    false
}

/// Minimum over legal paths from fully occupied to "site M empty" of the
/// maximum number of simultaneous empties along the path. Binary search on
/// the budget; reachability is monotone in it.
pub fn east_min_barrier(m: u32) -> Result<u32, EastError> {
    if m == 0 {
        return Err(EastError::Empty);
    }
    if m > M_CAP {
        return Err(EastError::TooLarge(m));
    }
    let (mut lo, mut hi) = (1, m);
    while lo < hi {
        let mid = lo + (hi - lo) / 2;
        if reachable_under_budget(m, mid) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    Ok(lo)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EastTrajectory {
    /// First time site M is empty, None if never before the horizon.
    pub t_empty: Option<f64>,
    pub censored: bool,
    /// Running maximum of simultaneous empties up to t_empty (or horizon).
    pub max_empties: u32,
    pub final_cfg: EastConfig,
    pub final_time: f64,
}

/// Continuous-time run from fully occupied: rate-1 clocks per site,
/// legal flips land empty with probability q, occupied otherwise. Stops at
/// the first emptying of site M or at the horizon.
pub fn east_simulate(m: u32, q: f64, horizon: f64, master: u64, trial: u64) -> EastTrajectory {
    assert!(m >= 1 && q > 0.0 && q < 1.0);
    let mut rng = seeds::stream_rng(master, seeds::streams::EAST, trial);
    let mut cfg = EastConfig::fully_occupied(m);
    let mut t = 0.0f64;
    let mut max_empties = cfg.empties();
    loop {
        t += -(1.0 - rng.gen::<f64>()).ln() / m as f64;
        if t >= horizon {
            return EastTrajectory {
                t_empty: None,
                censored: true,
                max_empties,
                final_cfg: cfg,
                final_time: horizon,
            };
        }
        let x = rng.gen_range(1..=m);
        if cfg.is_occupied(x - 1) {
            continue;
        }
        let empty = rng.gen::<f64>() < q;
        if empty == cfg.is_occupied(x) {
            cfg = cfg.flipped(x);
        }
        max_empties = max_empties.max(cfg.empties());
        if !cfg.is_occupied(m) {
            return EastTrajectory {
                t_empty: Some(t),
                censored: false,
                max_empties,
                final_cfg: cfg,
                final_time: t,
            };
        }
    }
}

/// Run until the horizon regardless of site M, for equilibrium checks.
pub fn east_run_to_horizon(m: u32, q: f64, horizon: f64, master: u64, trial: u64) -> EastConfig {
    assert!(m >= 1 && q > 0.0 && q < 1.0);
    let mut rng = seeds::stream_rng(master, seeds::streams::EAST, trial);
    let mut cfg = EastConfig::fully_occupied(m);
    let mut t = 0.0f64;
    loop {
        t += -(1.0 - rng.gen::<f64>()).ln() / m as f64;
        if t >= horizon {
            return cfg;
        }
        let x = rng.gen_range(1..=m);
        if cfg.is_occupied(x - 1) {
            continue;
        }
        let empty = rng.gen::<f64>() < q;
        if empty == cfg.is_occupied(x) {
            cfg = cfg.flipped(x);
        }
    }
}
