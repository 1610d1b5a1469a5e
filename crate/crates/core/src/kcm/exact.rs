//! Exact analysis of tiny systems: the full 2^n generator, its spectral
//! gap, Dirichlet forms, hitting times and constrained reachability.
//!
//! Configurations are bit masks over the window sites, a set bit meaning
//! the site is empty.

use super::{KcmError, KcmSystem};
use crate::rational::{qi, Q};
use nalgebra::DMatrix;
use std::collections::HashMap;
use std::collections::VecDeque;

pub const GAP_CAP: usize = 16;
pub const REACH_CAP: usize = 20;

pub struct ExactChain<'a> {
    pub sys: &'a KcmSystem,
    pub n: usize,
    /// Per site, per rule: mask of in-window sites required empty, or None
    /// when the boundary blocks the translate.
    need_masks: Vec<Vec<Option<u32>>>,
}

impl<'a> ExactChain<'a> {
    pub fn new(sys: &'a KcmSystem, cap: usize) -> Result<ExactChain<'a>, KcmError> {
        let n = sys.n_sites();
        if n > cap {
            return Err(KcmError::WindowTooLarge(n, cap));
        }
        let need_masks = (0..n)
            .map(|x| {
                sys.rule_needs(x)
                    .iter()
                    .map(|r| {
                        r.as_ref()
                            .map(|need| need.iter().fold(0u32, |m, &i| m | (1 << i)))
                    })
                    .collect()
            })
            .collect();
        Ok(ExactChain { sys, n, need_masks })
    }

    pub fn n_states(&self) -> usize {
        1usize << self.n
    }

    pub fn constraint(&self, mask: u32, x: usize) -> bool {
        self.need_masks[x]
            .iter()
            .any(|r| r.is_some_and(|need| mask & need == need))
    }

    pub fn mu(&self, mask: u32, q: f64) -> f64 {
        let k = mask.count_ones() as i32;
        q.powi(k) * (1.0 - q).powi(self.n as i32 - k)
    }

    /// Rate of the flip at x out of `mask` (0 when the constraint fails).
    pub fn rate(&self, mask: u32, x: usize, q: f64) -> f64 {
        if !self.constraint(mask, x) {
            return 0.0;
        }
        if mask >> x & 1 == 0 {
            q
        } else {
            1.0 - q
        }
    }

    /// States connected to `start` by legal flips, sorted.
    pub fn component_of(&self, start: u32) -> Vec<u32> {
        let mut seen = vec![false; self.n_states()];
        seen[start as usize] = true;
        let mut queue = VecDeque::from([start]);
        let mut comp = vec![start];
        while let Some(m) = queue.pop_front() {
            for x in 0..self.n {
                if self.constraint(m, x) {
                    let m2 = m ^ (1 << x);
                    if !seen[m2 as usize] {
                        seen[m2 as usize] = true;
                        comp.push(m2);
                        queue.push_back(m2);
                    }
                }
            }
        }
        comp.sort_unstable();
        comp
    }

    /// Symmetrised generator on a set of states. Reversibility makes the
    /// conjugation by sqrt(mu) reduce off-diagonals to sqrt(q(1-q)) times
    /// the constraint; diagonals keep the full exit rates.
    fn symmetrised(&self, states: &[u32], q: f64) -> DMatrix<f64> {
        let idx: HashMap<u32, usize> = states.iter().enumerate().map(|(i, &m)| (m, i)).collect();
        let k = states.len();
        let s = (q * (1.0 - q)).sqrt();
        let mut a = DMatrix::zeros(k, k);
        for (i, &m) in states.iter().enumerate() {
            let mut total = 0.0;
            for x in 0..self.n {
                let r = self.rate(m, x, q);
                if r > 0.0 {
                    total += r;
                    if let Some(&j) = idx.get(&(m ^ (1 << x))) {
                        a[(i, j)] = s;
                    }
                }
            }
            a[(i, i)] = -total;
        }
        a
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GapReport {
    pub gap: f64,
    pub t_rel: f64,
    pub component_size: usize,
    pub n_states: usize,
    pub reducible: bool,
    pub component: Vec<u32>,
}

/// Spectral gap of the ergodic component containing the all-empty state;
/// T_rel = 1/gap. Reducibility of the full chain is reported, not assumed
/// away.
pub fn exact_generator_gap(sys: &KcmSystem, q: f64, cap: usize) -> Result<GapReport, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    let all_empty = ((1u64 << chain.n) - 1) as u32;
    let comp = chain.component_of(all_empty);
    let reducible = comp.len() < chain.n_states();
    if comp.len() == 1 {
        return Ok(GapReport {
            gap: f64::INFINITY,
            t_rel: 0.0,
            component_size: 1,
            n_states: chain.n_states(),
            reducible,
            component: comp,
        });
    }
    let a = chain.symmetrised(&comp, q);
    let mut evs: Vec<f64> = a.symmetric_eigenvalues().iter().copied().collect();
    evs.sort_by(|x, y| y.partial_cmp(x).unwrap());
    let gap = -evs[1];
    Ok(GapReport {
        gap,
        t_rel: 1.0 / gap,
        component_size: comp.len(),
        n_states: chain.n_states(),
        reducible,
        component: comp,
    })
}

/// D(f) = sum_x mu(c_x Var_x(f)) as a full sum over configurations.
pub fn dirichlet_form(sys: &KcmSystem, q: f64, f: &[f64], cap: usize) -> Result<f64, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    assert_eq!(f.len(), chain.n_states());
    let mut d = 0.0;
    for mask in 0..chain.n_states() as u32 {
        let mu = chain.mu(mask, q);
        for x in 0..chain.n {
            if chain.constraint(mask, x) {
                let delta = f[(mask | (1 << x)) as usize] - f[(mask & !(1 << x)) as usize];
                d += mu * q * (1.0 - q) * delta * delta;
            }
        }
    }
    Ok(d)
}

/// Var_mu(f) over the full configuration space.
pub fn variance(sys: &KcmSystem, q: f64, f: &[f64], cap: usize) -> Result<f64, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    assert_eq!(f.len(), chain.n_states());
    let (mut m1, mut m2) = (0.0, 0.0);
    for mask in 0..chain.n_states() as u32 {
        let mu = chain.mu(mask, q);
        m1 += mu * f[mask as usize];
        m2 += mu * f[mask as usize] * f[mask as usize];
    }
    Ok(m2 - m1 * m1)
}

/// Exact rational check of mu(w) rate(w -> w^x) = mu(w^x) rate(w^x -> w)
/// over every configuration and site.
pub fn detailed_balance_holds(sys: &KcmSystem, q: Q, cap: usize) -> Result<bool, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    let mu = |mask: u32| -> Q {
        let mut m = qi(1);
        for i in 0..chain.n {
            m = m * if mask >> i & 1 == 1 { q } else { qi(1) - q };
        }
        m
    };
    for mask in 0..chain.n_states() as u32 {
        for x in 0..chain.n {
            if !chain.constraint(mask, x) {
                // The constraint ignores site x, so the reverse flip is
                // equally blocked and both sides vanish.
                continue;
            }
            let other = mask ^ (1 << x);
            let fwd = if mask >> x & 1 == 0 { q } else { qi(1) - q };
            let bwd = if other >> x & 1 == 0 { q } else { qi(1) - q };
            if mu(mask) * fwd != mu(other) * bwd {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

fn transient_states(chain: &ExactChain, origin: usize) -> Vec<u32> {
    (0..chain.n_states() as u32)
        .filter(|m| m >> origin & 1 == 0)
        .collect()
}

/// Stationary-start mean hitting time of "origin empty": solve the
/// absorbing system L_TT e = -1 on origin-occupied states and average the
/// solution under the product measure.
pub fn mean_tau0_exact(sys: &KcmSystem, q: f64, cap: usize) -> Result<f64, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    let origin = sys.site_index((0, 0)).map_err(|_| KcmError::NoOrigin)?;
    let trans = transient_states(&chain, origin);
    let idx: HashMap<u32, usize> = trans.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let k = trans.len();
    let mut l = DMatrix::zeros(k, k);
    for (i, &m) in trans.iter().enumerate() {
        let mut total = 0.0;
        for x in 0..chain.n {
            let r = chain.rate(m, x, q);
            if r > 0.0 {
                total += r;
                if let Some(&j) = idx.get(&(m ^ (1 << x))) {
                    l[(i, j)] = r;
                }
            }
        }
        l[(i, i)] = -total;
    }
    let rhs = DMatrix::from_element(k, 1, -1.0);
    let e = l.lu().solve(&rhs).ok_or(KcmError::NoOrigin)?;
    if e.iter().any(|&v| !v.is_finite() || v < 0.0) {
        return Err(KcmError::NoOrigin);
    }
    Ok(trans
        .iter()
        .enumerate()
        .map(|(i, &m)| chain.mu(m, q) * e[(i, 0)])
        .sum())
}

/// Law of tau_0 from a stationary start, as a mixture of exponentials
/// obtained from the symmetrised sub-generator on origin-occupied states.
/// cdf(0) equals the stationary mass with the origin already empty.
#[derive(Clone, Debug)]
pub struct FirstPassageLaw {
    pub lambdas: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FirstPassageLaw {
    pub fn survival(&self, t: f64) -> f64 {
        self.lambdas
            .iter()
            .zip(&self.weights)
            .map(|(&l, &w)| w * (l * t).exp())
            .sum()
    }

    pub fn cdf(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            1.0 - self.survival(t)
        }
    }
}

pub fn first_passage_law(sys: &KcmSystem, q: f64, cap: usize) -> Result<FirstPassageLaw, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    let origin = sys.site_index((0, 0)).map_err(|_| KcmError::NoOrigin)?;
    let trans = transient_states(&chain, origin);
    let vecs = nalgebra::SymmetricEigen::new(chain.symmetrised(&trans, q));
    let mut lambdas = Vec::new();
    let mut weights = Vec::new();
    let sqrt_mu: Vec<f64> = trans.iter().map(|&m| chain.mu(m, q).sqrt()).collect();
    for k in 0..trans.len() {
        let v = vecs.eigenvectors.column(k);
        let c: f64 = sqrt_mu.iter().zip(v.iter()).map(|(s, vi)| s * vi).sum();
        lambdas.push(vecs.eigenvalues[k]);
        weights.push(c * c);
    }
    Ok(FirstPassageLaw { lambdas, weights })
}

/// Two-sided Kolmogorov-Smirnov statistic of a sample against a cdf.
pub fn ks_statistic(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = xs.len() as f64;
    let mut d = 0.0f64;
    for (i, &x) in xs.iter().enumerate() {
        let f = cdf(x);
        d = d.max(f - i as f64 / n).max((i + 1) as f64 / n - f);
    }
    d
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReachWitness {
    pub states: Vec<u32>,
    pub flips: Vec<(i64, i64)>,
}

/// BFS over the legal-flip graph restricted to non-forbidden states.
/// Some target reachable -> a witness path; otherwise None.
pub fn reachability_avoiding(
    sys: &KcmSystem,
    starts: &[u32],
    target: impl Fn(u32) -> bool,
    forbidden: impl Fn(u32) -> bool,
    cap: usize,
) -> Result<Option<ReachWitness>, KcmError> {
    let chain = ExactChain::new(sys, cap)?;
    let mut parent: HashMap<u32, (u32, usize)> = HashMap::new();
    let mut seen = vec![false; chain.n_states()];
    let mut queue = VecDeque::new();
    for &s in starts {
        if forbidden(s) || seen[s as usize] {
            continue;
        }
        seen[s as usize] = true;
        queue.push_back(s);
    }
    while let Some(m) = queue.pop_front() {
        if target(m) {
            let mut states = vec![m];
            let mut flips = Vec::new();
            let mut cur = m;
            while let Some(&(prev, x)) = parent.get(&cur) {
                flips.push(sys.sites[x]);
                states.push(prev);
                cur = prev;
            }
            states.reverse();
            flips.reverse();
            return Ok(Some(ReachWitness { states, flips }));
        }
        for x in 0..chain.n {
            if chain.constraint(m, x) {
                let m2 = m ^ (1 << x);
                if !seen[m2 as usize] && !forbidden(m2) {
                    seen[m2 as usize] = true;
                    parent.insert(m2, (m, x));
                    queue.push_back(m2);
                }
            }
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::droplets::BoundaryRegion;
    use crate::family::{duarte, one_neighbour, UpdateFamily};
    use crate::geom::{Dir, HalfPlane, QPoint, Window};
    use crate::kcm::{simulate_kcm, Boundary, StopRule};
    use crate::rational::q as qq;
    use crate::seeds;
    use rand::Rng;

    fn single_free_site() -> KcmSystem {
        KcmSystem::new(one_neighbour(), Window::new(0, 1, 0, 1, 0), Boundary::AllEmpty)
    }

    /// East chain on sites 1..=m: rule {W}, empty half plane west of 1.
    fn east_sys(m: i64) -> KcmSystem {
        let fam = UpdateFamily::new(vec![vec![(-1, 0)]], Some("east".into())).unwrap();
        let region = BoundaryRegion::halfplane(HalfPlane::new(
            Dir::d(1, 0),
            QPoint::new(qq(1, 2), qq(0, 1)),
        ));
        KcmSystem::new(fam, Window::new(1, m + 1, 0, 1, 0), Boundary::Region(region))
    }

    #[test]
    fn free_site_relaxes_at_rate_one() {
        let r = exact_generator_gap(&single_free_site(), 0.3, GAP_CAP).unwrap();
        assert!(!r.reducible);
        assert!((r.gap - 1.0).abs() < 1e-12);
        assert!((r.t_rel - 1.0).abs() < 1e-12);
    }

    #[test]
    fn east_two_site_matches_dense_oracle() {
        let q = 0.35;
        let r = exact_generator_gap(&east_sys(2), q, GAP_CAP).unwrap();
        assert!(!r.reducible);
        // Hand-built 4-state generator, states indexed by (w1, w2) bits.
        let mut l = DMatrix::zeros(4, 4);
        for m in 0..4u32 {
            let mut total = 0.0;
            // Site 1 always flippable, site 2 needs site 1 empty.
            for (x, ok) in [(0, true), (1, m & 1 == 1)] {
                if !ok {
                    continue;
                }
                let rate = if m >> x & 1 == 0 { q } else { 1.0 - q };
                l[(m as usize, (m ^ (1 << x)) as usize)] = rate;
                total += rate;
            }
            l[(m as usize, m as usize)] = -total;
        }
        let mut evs: Vec<f64> = l.complex_eigenvalues().iter().map(|c| c.re).collect();
        evs.sort_by(|a, b| b.partial_cmp(a).unwrap());
        assert!((r.gap + evs[1]).abs() < 1e-10, "{} vs {}", r.gap, -evs[1]);
    }

    #[test]
    fn variational_bound_holds() {
        let sys = KcmSystem::new(one_neighbour(), Window::new(0, 2, 0, 2, 0), Boundary::AllEmpty);
        let q = 0.4;
        let r = exact_generator_gap(&sys, q, GAP_CAP).unwrap();
        let mut rng = seeds::stream_rng(88, seeds::streams::KCM, 0);
        for _ in 0..100 {
            let f: Vec<f64> = (0..16).map(|_| rng.gen::<f64>()).collect();
            let v = variance(&sys, q, &f, GAP_CAP).unwrap();
            let d = dirichlet_form(&sys, q, &f, GAP_CAP).unwrap();
            assert!(v <= r.t_rel * d + 1e-9, "Var {v} > T_rel {} * D {d}", r.t_rel);
        }
    }

    #[test]
    fn dirichlet_examples() {
        let sys = single_free_site();
        let q = 0.3;
        let f = vec![5.0, 5.0];
        assert_eq!(dirichlet_form(&sys, q, &f, GAP_CAP).unwrap(), 0.0);
        assert_eq!(variance(&sys, q, &f, GAP_CAP).unwrap(), 0.0);
        // f = indicator of empty.
        let f = vec![0.0, 1.0];
        let expect = q * (1.0 - q);
        assert!((dirichlet_form(&sys, q, &f, GAP_CAP).unwrap() - expect).abs() < 1e-15);
        assert!((variance(&sys, q, &f, GAP_CAP).unwrap() - expect).abs() < 1e-15);
    }

    #[test]
    fn gap_is_variational_supremum() {
        let sys = east_sys(2);
        let q = 0.3;
        let r = exact_generator_gap(&sys, q, GAP_CAP).unwrap();
        let mut rng = seeds::stream_rng(89, seeds::streams::KCM, 0);
        let mut best = 0.0f64;
        for _ in 0..10_000 {
            let f: Vec<f64> = (0..4).map(|_| rng.gen::<f64>()).collect();
            let d = dirichlet_form(&sys, q, &f, GAP_CAP).unwrap();
            if d > 1e-12 {
                best = best.max(variance(&sys, q, &f, GAP_CAP).unwrap() / d);
            }
        }
        assert!(best <= r.t_rel * (1.0 + 1e-9));
        assert!(best >= r.t_rel * 0.98, "best {best} vs T_rel {}", r.t_rel);
    }

    #[test]
    fn detailed_balance_exact_in_rationals() {
        let sys = KcmSystem::new(duarte(), Window::new(0, 2, 0, 2, 0), Boundary::AllOccupied);
        assert_eq!(detailed_balance_holds(&sys, qq(1, 3), GAP_CAP), Ok(true));
        let sys = east_sys(3);
        assert_eq!(detailed_balance_holds(&sys, qq(2, 7), GAP_CAP), Ok(true));
    }

    #[test]
    fn east_reachability_barrier() {
        let sys = east_sys(3);
        let full = 0u32;
        let target = |m: u32| m >> 2 & 1 == 1;
        // Forbidding two simultaneous empties blocks site 3.
        let r = reachability_avoiding(&sys, &[full], target, |m| m.count_ones() >= 2, REACH_CAP)
            .unwrap();
        assert!(r.is_none());
        // Allowing two, forbidding three, succeeds with a legal witness.
        let r = reachability_avoiding(&sys, &[full], target, |m| m.count_ones() >= 3, REACH_CAP)
            .unwrap()
            .expect("reachable under budget 2");
        assert_eq!(r.states.len(), r.flips.len() + 1);
        assert!(target(*r.states.last().unwrap()));
        let chain = ExactChain::new(&sys, REACH_CAP).unwrap();
        for (i, &site) in r.flips.iter().enumerate() {
            let x = sys.site_index(site).unwrap();
            assert!(chain.constraint(r.states[i], x));
            assert_eq!(r.states[i] ^ (1 << x), r.states[i + 1]);
        }
        // Target at the start: empty witness.
        let start = 0b100u32;
        let r = reachability_avoiding(&sys, &[start], target, |_| false, REACH_CAP)
            .unwrap()
            .unwrap();
        assert_eq!(r.states, vec![start]);
        assert!(r.flips.is_empty());
    }

    #[test]
    fn mean_tau0_matches_simulation() {
        let sys = KcmSystem::new(one_neighbour(), Window::new(-1, 2, -1, 2, 0), Boundary::AllEmpty);
        let q = 0.4;
        let exact = mean_tau0_exact(&sys, q, GAP_CAP).unwrap();
        let n = 4000u64;
        let mut sum = 0.0;
        let mut sumsq = 0.0;
        for trial in 0..n {
            let run = simulate_kcm(&sys, q, StopRule::OriginEmpty { horizon: 1e8 }, 606, trial)
                .unwrap();
            let t = run.tau0.expect("ergodic with empty boundary");
            sum += t;
            sumsq += t * t;
        }
        let mean = sum / n as f64;
        let sd = ((sumsq / n as f64 - mean * mean) / n as f64).sqrt();
        assert!((mean - exact).abs() < 3.0 * sd, "sim {mean} exact {exact} sd {sd}");
    }

    #[test]
    fn first_passage_law_ks() {
        let sys = KcmSystem::new(one_neighbour(), Window::new(0, 2, 0, 2, 0), Boundary::AllEmpty);
        let q = 0.3;
        let law = first_passage_law(&sys, q, GAP_CAP).unwrap();
        // cdf(0) is the stationary chance the origin starts empty.
        assert!((law.cdf(0.0) - q).abs() < 1e-10);
        let n = 1000usize;
        let mut samples = Vec::with_capacity(n);
        for trial in 0..n as u64 {
            let run = simulate_kcm(&sys, q, StopRule::OriginEmpty { horizon: 1e8 }, 31337, trial)
                .unwrap();
            samples.push(run.tau0.unwrap());
        }
        // The law has an atom at zero; check it separately, then KS the
        // continuous part conditioned on tau0 > 0.
        let zeros = samples.iter().filter(|&&t| t == 0.0).count();
        let sigma = (q * (1.0 - q) / n as f64).sqrt();
        assert!((zeros as f64 / n as f64 - q).abs() < 3.0 * sigma);
        let pos: Vec<f64> = samples.iter().copied().filter(|&t| t > 0.0).collect();
        let f0 = law.cdf(0.0);
        let d = ks_statistic(&pos, |t| (law.cdf(t) - f0) / (1.0 - f0));
        let crit = 1.6276 / (pos.len() as f64).sqrt();
        assert!(d < crit, "KS {d} >= {crit}");
    }
}
