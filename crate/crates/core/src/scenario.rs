//! Bundled scenarios: a family together with its direction set, droplet
//! constants, vacancy density and renormalisation parameters, so tests and
//! the CLI agree on one tuned configuration per purpose.

use crate::bootstrap::{
    classify, select_canonical_directions, DirectionSet, GrowthParams, StabilityReport,
};
use crate::droplets::DropletConstants;
use crate::family::{modified_duarte, three_rule, UpdateFamily};
use crate::geom::{Dir, Window};
use crate::rational::q;
use crate::renorm::RenormParams;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ScenarioError {
    #[error("unknown scenario `{0}`")]
    Unknown(String),
    #[error("direction selection failed: {0}")]
    Selection(String),
}

#[derive(Clone, Debug)]
pub struct Scenario {
    pub name: &'static str,
    pub family: UpdateFamily,
    pub report: StabilityReport,
    pub dirs: DirectionSet,
    pub consts: DropletConstants,
    pub alpha: u32,
    /// Vacancy density the scenario's probabilistic checks sample at.
    pub q: f64,
    pub window: Window,
    pub renorm: RenormParams,
}

fn canonical(fam: &UpdateFamily) -> Result<(StabilityReport, DirectionSet), ScenarioError> {
    let report = classify(fam, 3, &GrowthParams::default())
        .map_err(|e| ScenarioError::Selection(e.to_string()))?;
    let dirs = select_canonical_directions(&report, fam)
        .map_err(|e| ScenarioError::Selection(e.to_string()))?;
    Ok((report, dirs))
}

/// Three-rule model at the shipped default constants: the reference
/// scenario for closure-proposition and arrow-probability checks. The
/// vacancy density is tuned so up-arrows are rare but not unseen.
pub fn three_rule_scenario() -> Result<Scenario, ScenarioError> {
    let family = three_rule();
    let (report, dirs) = canonical(&family)?;
    Ok(Scenario {
        name: "three-rule",
        family,
        report,
        dirs,
        consts: DropletConstants::default(),
        alpha: 1,
        q: 1.5e-4,
        window: Window::new(-96, 97, -96, 97, 0),
        renorm: RenormParams::Desk {
            l: q(2, 1),
            step: q(3, 1),
            n_blocks: 3,
            lambda0_radius: q(3, 4),
        },
    })
}

/// Modified Duarte model on a 12-site triangle: the exhaustive desk
/// geometry. The bisector triple is overridden to an axis-aligned u' with
/// narrow flanks; all three stay strongly stable, but the triple is chosen
/// outside the canonical bisector chain so one lattice level fits per
/// column and the full state space stays enumerable.
pub fn tiny_renorm_scenario() -> Result<Scenario, ScenarioError> {
    let family = modified_duarte();
    let (report, mut dirs) = canonical(&family)?;
    dirs.u_prime = Dir::new(-1, 0).expect("nonzero");
    dirs.u_prime1 = Dir::new(-1, 3).expect("nonzero");
    dirs.u_prime2 = Dir::new(-1, -3).expect("nonzero");
    Ok(Scenario {
        name: "tiny-renorm",
        family,
        report,
        dirs,
        consts: DropletConstants::small(),
        alpha: 1,
        q: 0.2,
        window: Window::new(-24, 25, -24, 25, 0),
        renorm: RenormParams::Desk {
            l: q(3, 2),
            step: q(1, 1),
            n_blocks: 3,
            lambda0_radius: q(1, 4),
        },
    })
}

pub fn by_name(name: &str) -> Result<Scenario, ScenarioError> {
    match name {
        "three-rule" => three_rule_scenario(),
        "tiny-renorm" => tiny_renorm_scenario(),
        other => Err(ScenarioError::Unknown(other.into())),
    }
}

pub const SCENARIO_NAMES: &[&str] = &["three-rule", "tiny-renorm"];
