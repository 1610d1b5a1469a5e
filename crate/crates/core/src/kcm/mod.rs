//! Constrained Glauber dynamics on finite windows: legal flips, stationary
//! sampling, continuous-time runs and legal-path utilities. Exact spectral
//! analysis of tiny systems lives in `exact`.

mod exact;

pub use exact::{
    detailed_balance_holds, dirichlet_form, exact_generator_gap, first_passage_law,
    ks_statistic, mean_tau0_exact, reachability_avoiding, variance, ExactChain,
    FirstPassageLaw, GapReport, ReachWitness, GAP_CAP, REACH_CAP,
};

use crate::droplets::BoundaryRegion;
use crate::family::UpdateFamily;
use crate::geom::{QPoint, Window};
use crate::seeds;
use rand::Rng;
use std::collections::HashMap;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum KcmError {
    #[error("site {0:?} is outside the window")]
    OutsideWindow((i64, i64)),
    #[error("window has {0} sites, cap is {1}")]
    WindowTooLarge(usize, usize),
    #[error("the origin is not in the window")]
    NoOrigin,
}

/// What the sites outside the window look like to the constraints.
#[derive(Clone, Debug, PartialEq)]
pub enum Boundary {
    AllOccupied,
    AllEmpty,
    /// Sites inside the region are empty, the rest occupied.
    Region(BoundaryRegion),
}

impl Boundary {
    fn virtual_empty(&self, s: (i64, i64)) -> bool {
        match self {
            Boundary::AllOccupied => false,
            Boundary::AllEmpty => true,
            Boundary::Region(b) => b.contains(QPoint::from_site(s)),
        }
    }
}

/// A family on a window with a boundary condition, with the rule
/// translates resolved once: for every site and rule, either the list of
/// in-window sites that must be empty, or None when an out-of-window site
/// of the translate is occupied under the boundary.
pub struct KcmSystem {
    pub fam: UpdateFamily,
    pub window: Window,
    pub boundary: Boundary,
    pub sites: Vec<(i64, i64)>,
    index: HashMap<(i64, i64), usize>,
    needs: Vec<Vec<Option<Vec<usize>>>>,
}

impl KcmSystem {
    pub fn new(fam: UpdateFamily, window: Window, boundary: Boundary) -> KcmSystem {
        let mut sites = Vec::new();
        for y in window.y0..window.y1 {
            for x in window.x0..window.x1 {
                sites.push((x, y));
            }
        }
        let index: HashMap<(i64, i64), usize> =
            sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let needs = sites
            .iter()
            .map(|&(x, y)| {
                fam.rules
                    .iter()
                    .map(|rule| {
                        let mut need = Vec::new();
                        for &(dx, dy) in rule {
                            let s = (x + dx, y + dy);
                            match index.get(&s) {
                                Some(&i) => need.push(i),
                                None if boundary.virtual_empty(s) => {}
                                None => return None,
                            }
                        }
                        Some(need)
                    })
                    .collect()
            })
            .collect();
        KcmSystem { fam, window, boundary, sites, index, needs }
    }

    pub fn n_sites(&self) -> usize {
        self.sites.len()
    }

    pub fn site_index(&self, s: (i64, i64)) -> Result<usize, KcmError> {
        self.index.get(&s).copied().ok_or(KcmError::OutsideWindow(s))
    }

    /// Constraint indicator c_x: some rule translate entirely empty.
    pub fn constraint(&self, empty: &[bool], x: usize) -> bool {
        self.needs[x]
            .iter()
            .any(|r| r.as_ref().is_some_and(|need| need.iter().all(|&i| empty[i])))
    }

    pub(crate) fn rule_needs(&self, x: usize) -> &[Option<Vec<usize>>] {
        &self.needs[x]
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct KcmState {
    /// Per-site indicator, true = empty (infected).
    pub empty: Vec<bool>,
    pub time: f64,
}

impl KcmState {
    pub fn all_occupied(sys: &KcmSystem) -> KcmState {
        KcmState { empty: vec![false; sys.n_sites()], time: 0.0 }
    }
}

/// Is flipping site s legal in this state?
pub fn is_legal_flip(sys: &KcmSystem, state: &KcmState, s: (i64, i64)) -> Result<bool, KcmError> {
    let x = sys.site_index(s)?;
    Ok(sys.constraint(&state.empty, x))
}

/// Product state: each site empty independently with probability q.
pub fn sample_equilibrium(sys: &KcmSystem, q: f64, rng: &mut impl Rng) -> KcmState {
    KcmState {
        empty: (0..sys.n_sites()).map(|_| rng.gen::<f64>() < q).collect(),
        time: 0.0,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StopRule {
    /// Stop when the origin is empty, censor at the horizon.
    OriginEmpty { horizon: f64 },
    /// Run to the horizon regardless.
    Horizon(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct KcmRun {
    pub tau0: Option<f64>,
    pub censored: bool,
    pub steps: u64,
    pub final_state: KcmState,
}

/// Continuous-time run from a given state. Global rate |window|,
/// uniform site choice, legal flips resample to empty with probability q.
pub fn simulate_from(
    sys: &KcmSystem,
    mut state: KcmState,
    q: f64,
    stop: StopRule,
    rng: &mut impl Rng,
) -> Result<KcmRun, KcmError> {
    assert!(q > 0.0 && q < 1.0);
    let n = sys.n_sites();
    let origin = match stop {
        StopRule::OriginEmpty { .. } => Some(sys.site_index((0, 0)).map_err(|_| KcmError::NoOrigin)?),
        StopRule::Horizon(_) => None,
    };
    let horizon = match stop {
        StopRule::OriginEmpty { horizon } => horizon,
        StopRule::Horizon(t) => t,
    };
    if let Some(o) = origin {
        if state.empty[o] {
            return Ok(KcmRun { tau0: Some(state.time), censored: false, steps: 0, final_state: state });
        }
    }
    let mut steps = 0u64;
    loop {
        state.time += -(1.0 - rng.gen::<f64>()).ln() / n as f64;
        if state.time >= horizon {
            state.time = horizon;
            return Ok(KcmRun {
                tau0: None,
                censored: origin.is_some(),
                steps,
                final_state: state,
            });
        }
        steps += 1;
        let x = rng.gen_range(0..n);
        if sys.constraint(&state.empty, x) {
            state.empty[x] = rng.gen::<f64>() < q;
        }
        if let Some(o) = origin {
            if state.empty[o] {
                let t = state.time;
                return Ok(KcmRun { tau0: Some(t), censored: false, steps, final_state: state });
            }
        }
    }
}

/// Stationary-start run: sample the product measure, then simulate.
pub fn simulate_kcm(
    sys: &KcmSystem,
    q: f64,
    stop: StopRule,
    master: u64,
    trial: u64,
) -> Result<KcmRun, KcmError> {
    let mut rng = seeds::stream_rng(master, seeds::streams::KCM, trial);
    let start = sample_equilibrium(sys, q, &mut rng);
    simulate_from(sys, start, q, stop, &mut rng)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LegalPath {
    /// states[0] is the start; states[i+1] = states[i] with flips[i] flipped.
    pub states: Vec<Vec<bool>>,
    pub flips: Vec<(i64, i64)>,
}

impl LegalPath {
    /// Replay every step through the constraint check.
    pub fn verify(&self, sys: &KcmSystem) -> bool {
        if self.states.len() != self.flips.len() + 1 {
            return false;
        }
        for (i, &s) in self.flips.iter().enumerate() {
            let Ok(x) = sys.site_index(s) else { return false };
            if !sys.constraint(&self.states[i], x) {
                return false;
            }
            let mut next = self.states[i].clone();
            next[x] = !next[x];
            if next != self.states[i + 1] {
                return false;
            }
        }
        true
    }

    /// The same walk backwards; legality is preserved because constraints
    /// never read the flipped site itself.
    pub fn reversed(&self) -> LegalPath {
        LegalPath {
            states: self.states.iter().rev().cloned().collect(),
            flips: self.flips.iter().rev().copied().collect(),
        }
    }
}

/// Attempt `steps` uniform flips from the start state, keeping legal ones.
pub fn random_legal_path(
    sys: &KcmSystem,
    start: &KcmState,
    steps: usize,
    master: u64,
    trial: u64,
) -> LegalPath {
    let mut rng = seeds::stream_rng(master, seeds::streams::PATHS, trial);
    let n = sys.n_sites();
    let mut states = vec![start.empty.clone()];
    let mut flips = Vec::new();
    for _ in 0..steps {
        let x = rng.gen_range(0..n);
        let cur = states.last().unwrap();
        if sys.constraint(cur, x) {
            let mut next = cur.clone();
            next[x] = !next[x];
            states.push(next);
            flips.push(sys.sites[x]);
        }
    }
    LegalPath { states, flips }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::{duarte, one_neighbour};
    use crate::geom::{Dir, HalfPlane};
    use crate::rational::q;

    fn fa1f_3x3(boundary: Boundary) -> KcmSystem {
        KcmSystem::new(one_neighbour(), Window::new(-1, 2, -1, 2, 0), boundary)
    }

    #[test]
    fn legal_flip_examples() {
        let sys = fa1f_3x3(Boundary::AllOccupied);
        let state = KcmState::all_occupied(&sys);
        assert_eq!(is_legal_flip(&sys, &state, (0, 0)), Ok(false));
        assert!(is_legal_flip(&sys, &state, (5, 5)).is_err());

        let sys = KcmSystem::new(duarte(), Window::new(-2, 3, -2, 3, 0), Boundary::AllOccupied);
        let mut state = KcmState::all_occupied(&sys);
        state.empty[sys.site_index((-1, 0)).unwrap()] = true;
        state.empty[sys.site_index((0, 1)).unwrap()] = true;
        assert_eq!(is_legal_flip(&sys, &state, (0, 0)), Ok(true));
    }

    #[test]
    fn boundary_assists_flips() {
        // All-empty boundary: corner sites of FA-1f see empty neighbours.
        let sys = fa1f_3x3(Boundary::AllEmpty);
        let state = KcmState::all_occupied(&sys);
        assert_eq!(is_legal_flip(&sys, &state, (-1, -1)), Ok(true));
        assert_eq!(is_legal_flip(&sys, &state, (0, 0)), Ok(false));

        // Region boundary: empty half-plane x < -1/2 west of the window.
        let region = BoundaryRegion::halfplane(HalfPlane::new(
            Dir::d(1, 0),
            QPoint::new(q(-1, 2), q(0, 1)),
        ));
        let sys = KcmSystem::new(
            one_neighbour(),
            Window::new(0, 3, 0, 1, 0),
            Boundary::Region(region),
        );
        let state = KcmState::all_occupied(&sys);
        assert_eq!(is_legal_flip(&sys, &state, (0, 0)), Ok(true));
        assert_eq!(is_legal_flip(&sys, &state, (1, 0)), Ok(false));
    }

    #[test]
    fn equilibrium_margins() {
        let sys = KcmSystem::new(one_neighbour(), Window::new(0, 100, 0, 100, 0), Boundary::AllOccupied);
        let mut rng = seeds::stream_rng(3, seeds::streams::KCM, 0);
        assert!(sample_equilibrium(&sys, 0.0, &mut rng).empty.iter().all(|&e| !e));
        assert!(sample_equilibrium(&sys, 1.0, &mut rng).empty.iter().all(|&e| e));
        let st = sample_equilibrium(&sys, 0.37, &mut rng);
        let n = st.empty.len() as f64;
        let frac = st.empty.iter().filter(|&&e| e).count() as f64 / n;
        let sigma = (0.37 * 0.63 / n).sqrt();
        assert!((frac - 0.37).abs() < 3.0 * sigma);
    }

    #[test]
    fn origin_initially_empty_means_zero() {
        let sys = fa1f_3x3(Boundary::AllEmpty);
        let mut state = KcmState::all_occupied(&sys);
        state.empty[sys.site_index((0, 0)).unwrap()] = true;
        let mut rng = seeds::stream_rng(1, seeds::streams::KCM, 0);
        let run =
            simulate_from(&sys, state, 0.3, StopRule::OriginEmpty { horizon: 1e8 }, &mut rng)
                .unwrap();
        assert_eq!(run.tau0, Some(0.0));
        assert_eq!(run.steps, 0);
    }

    #[test]
    fn censoring_flags() {
        // FA-1f all occupied with occupied boundary is frozen: must censor.
        let sys = fa1f_3x3(Boundary::AllOccupied);
        let state = KcmState::all_occupied(&sys);
        let mut rng = seeds::stream_rng(2, seeds::streams::KCM, 0);
        let run = simulate_from(&sys, state, 0.3, StopRule::OriginEmpty { horizon: 50.0 }, &mut rng)
            .unwrap();
        assert!(run.censored);
        assert_eq!(run.tau0, None);
        assert_eq!(run.final_state.time, 50.0);
    }

    #[test]
    fn stationary_marginal_at_origin() {
        // Occupancy law at t=5 from a stationary start stays Bernoulli.
        let sys = fa1f_3x3(Boundary::AllEmpty);
        let (q, n) = (0.3f64, 2000u64);
        let mut empt = 0u64;
        for trial in 0..n {
            let run = simulate_kcm(&sys, q, StopRule::Horizon(5.0), 777, trial).unwrap();
            if run.final_state.empty[sys.site_index((0, 0)).unwrap()] {
                empt += 1;
            }
        }
        let frac = empt as f64 / n as f64;
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((frac - q).abs() < 3.0 * sigma, "frac {frac}");
    }

    #[test]
    fn paths_verify_and_reverse() {
        let sys = fa1f_3x3(Boundary::AllEmpty);
        let start = KcmState::all_occupied(&sys);
        let p = random_legal_path(&sys, &start, 0, 11, 0);
        assert_eq!(p.states.len(), 1);
        assert!(p.flips.is_empty());
        let p = random_legal_path(&sys, &start, 200, 11, 1);
        assert!(p.flips.len() > 10);
        assert!(p.verify(&sys));
        assert!(p.reversed().verify(&sys));
    }
}
