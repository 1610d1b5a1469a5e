//! Subcommand implementations: family ingestion, analysis calls into the
//! library, and record assembly.

use crate::report::Report;
use crate::svg::Scene;
use kcm2d::bootstrap::{
    classify, closure, difficulty_direction, difficulty_family, select_canonical_directions,
    stable_arcs, Classification, DirectionSet, GrowthParams, SiteSet, StabilityReport,
};
use kcm2d::droplets::{
    droplet_algorithm, estimate_spanning_probability, quad_of_cluster, size, Droplet,
    DropletConstants,
};
use kcm2d::east::{east_min_barrier, EastError};
use kcm2d::family::{
    duarte, horizontal_pair, modified_duarte, one_neighbour, three_rule, two_neighbour,
    UpdateFamily,
};
use kcm2d::geom::{Dir, Value, Window};
use kcm2d::kcm::{exact_generator_gap, simulate_kcm, Boundary, KcmError, KcmSystem, StopRule};
use kcm2d::rational::qi;
use kcm2d::renorm::{
    arrow_profile, build_geometry, chain_flip_check, estimate_arrow_probabilities,
    eta_path_is_east_legal, eta_of, flip_is_legal, ChainVerdict, RenormGeometry,
};
use kcm2d::scenario::{by_name, Scenario};
use kcm2d::seeds;
use rand::Rng;
use std::collections::BTreeSet;
use std::fmt;
use std::fs;
use std::path::Path;

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Resource(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "validation: {m}"),
            CliError::Resource(m) => write!(f, "resource: {m}"),
        }
    }
}

impl CliError {
    pub fn code(&self) -> i32 {
        match self {
            CliError::Validation(_) => 3,
            CliError::Resource(_) => 4,
        }
    }
}

fn val(m: impl ToString) -> CliError {
    CliError::Validation(m.to_string())
}

impl From<KcmError> for CliError {
    fn from(e: KcmError) -> CliError {
        match e {
            KcmError::WindowTooLarge(..) => CliError::Resource(e.to_string()),
            other => val(other),
        }
    }
}

impl From<EastError> for CliError {
    fn from(e: EastError) -> CliError {
        match e {
            EastError::TooLarge(_) => CliError::Resource(e.to_string()),
            EastError::Empty => val(e),
        }
    }
}

/// A builtin family name, or a path to a family JSON file.
pub fn load_family(spec: &str) -> Result<UpdateFamily, CliError> {
    match spec {
        "duarte" => Ok(duarte()),
        "modified-duarte" => Ok(modified_duarte()),
        "three-rule" => Ok(three_rule()),
        "two-neighbour" => Ok(two_neighbour()),
        "one-neighbour" => Ok(one_neighbour()),
        "horizontal-pair" => Ok(horizontal_pair()),
        path => {
            let text = fs::read_to_string(Path::new(path))
                .map_err(|e| val(format!("family file {path}: {e}")))?;
            UpdateFamily::from_json(&text).map_err(|e| val(format!("family file {path}: {e}")))
        }
    }
}

/// Site list: one "x y" or "x,y" pair per line, # comments allowed.
pub fn load_sites(path: &Path) -> Result<Vec<(i64, i64)>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| val(format!("sites file {}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let parts: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|p| !p.is_empty())
            .collect();
        let bad = || val(format!("sites line {}: expected two integers", no + 1));
        if parts.len() != 2 {
            return Err(bad());
        }
        let x = parts[0].parse().map_err(|_| bad())?;
        let y = parts[1].parse().map_err(|_| bad())?;
        out.push((x, y));
    }
    Ok(out)
}

/// Either a half-width ("12") or explicit bounds ("x0,x1,y0,y1").
pub fn parse_window(spec: &str) -> Result<Window, CliError> {
    let parts: Vec<i64> = spec
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| val(format!("window {spec:?}: expected integers")))?;
    match parts[..] {
        [half] if half > 0 => Ok(Window::centered(half, 0)),
        [x0, x1, y0, y1] if x0 < x1 && y0 < y1 => Ok(Window::new(x0, x1, y0, y1, 0)),
        _ => Err(val(format!(
            "window {spec:?}: need a positive half-width or x0,x1,y0,y1"
        ))),
    }
}

pub fn parse_dir(spec: &str) -> Result<Dir, CliError> {
    let parts: Vec<i64> = spec
        .split(',')
        .map(|p| p.trim().parse())
        .collect::<Result<_, _>>()
        .map_err(|_| val(format!("direction {spec:?}: expected dx,dy")))?;
    match parts[..] {
        [dx, dy] => Dir::new(dx, dy).map_err(val),
        _ => Err(val(format!("direction {spec:?}: expected dx,dy"))),
    }
}

fn scenario(name: &str) -> Result<Scenario, CliError> {
    by_name(name).map_err(val)
}

fn scenario_geometry(s: &Scenario) -> Result<RenormGeometry, CliError> {
    let geom = build_geometry(&s.renorm, s.dirs, s.window).map_err(val)?;
    for i in 1..=geom.n_cols() {
        if !geom.column_defined(i) {
            return Err(val(format!("scenario window truncates column {i}")));
        }
    }
    Ok(geom)
}

fn report_of(fam: &UpdateFamily) -> Result<StabilityReport, CliError> {
    classify(fam, 3, &GrowthParams::default()).map_err(val)
}

fn canonical(fam: &UpdateFamily) -> Result<(StabilityReport, DirectionSet, u32), CliError> {
    let report = report_of(fam)?;
    let dirs = select_canonical_directions(&report, fam).map_err(val)?;
    let alpha = match report.alpha {
        Value::Fin(a) => a,
        other => return Err(val(format!("family difficulty {} is not finite", value_str(other)))),
    };
    Ok((report, dirs, alpha))
}

fn value_str(v: Value) -> String {
    match v {
        Value::Fin(n) => n.to_string(),
        Value::Unknown(n) => format!(">{n}"),
        Value::Inf => "inf".into(),
    }
}

fn class_str(c: Classification) -> &'static str {
    match c {
        Classification::Supercritical => "supercritical",
        Classification::Critical => "critical",
        Classification::Subcritical => "subcritical",
        Classification::Unresolved => "unresolved",
    }
}

fn family_name(fam: &UpdateFamily) -> String {
    fam.name.clone().unwrap_or_else(|| "unnamed".into())
}

pub fn cmd_classify(fam: &UpdateFamily) -> Result<Report, CliError> {
    let r = report_of(fam)?;
    let mut rep = Report::new();
    rep.push(&[
        ("family", family_name(fam)),
        ("classification", class_str(r.classification).into()),
        ("alpha", value_str(r.alpha)),
        ("infinite_stable", r.infinite_stable.to_string()),
        (
            "balanced",
            r.balanced.map_or("unknown".into(), |b| b.to_string()),
        ),
    ]);
    Ok(rep)
}

pub fn cmd_stable_arcs(fam: &UpdateFamily) -> Result<Report, CliError> {
    let stable = stable_arcs(fam);
    let mut rep = Report::new();
    if stable.full_circle {
        rep.push(&[
            ("kind", "full-circle".into()),
            ("start", String::new()),
            ("end", String::new()),
        ]);
        return Ok(rep);
    }
    for arc in &stable.arcs {
        rep.push(&[
            ("kind", "arc".into()),
            ("start", format!("{:?}", arc.start)),
            ("end", format!("{:?}", arc.end)),
        ]);
    }
    for d in &stable.isolated {
        rep.push(&[
            ("kind", "isolated".into()),
            ("start", format!("{d:?}")),
            ("end", format!("{d:?}")),
        ]);
    }
    Ok(rep)
}

pub fn cmd_difficulty(fam: &UpdateFamily, dir: Option<Dir>) -> Result<Report, CliError> {
    let growth = GrowthParams::default();
    let mut rep = Report::new();
    match dir {
        Some(d) => {
            let v = difficulty_direction(fam, d, 3, &growth).map_err(val)?;
            rep.push(&[
                ("family", family_name(fam)),
                ("dir", format!("{d:?}")),
                ("difficulty", value_str(v)),
            ]);
        }
        None => {
            let v = difficulty_family(fam, 3, &growth).map_err(val)?;
            rep.push(&[
                ("family", family_name(fam)),
                ("dir", "all".into()),
                ("difficulty", value_str(v)),
            ]);
        }
    }
    Ok(rep)
}

pub fn cmd_closure(
    fam: &UpdateFamily,
    sites: Vec<(i64, i64)>,
    window: Window,
) -> Result<Report, CliError> {
    let k = SiteSet::new(sites, window, None);
    let closed = closure(&k, fam);
    let mut rep = Report::new();
    for (x, y) in &closed.sites.sites {
        rep.push(&[("x", x.to_string()), ("y", y.to_string())]);
    }
    Ok(rep)
}

pub fn cmd_droplets(
    fam: &UpdateFamily,
    sites: Vec<(i64, i64)>,
    window: Window,
    modified: bool,
) -> Result<Report, CliError> {
    let (_, dirs, alpha) = canonical(fam)?;
    let consts = DropletConstants::default();
    let k = SiteSet::new(sites, window, None);
    let run = droplet_algorithm(&k, None, &consts, modified, fam, dirs, alpha, None)
        .map_err(val)?;
    let mut rep = Report::new();
    for (i, d) in run.droplets.iter().enumerate() {
        let record = d.to_record();
        rep.push(&[
            ("index", i.to_string()),
            ("kind", record.kind.clone()),
            ("corners", record.corners.len().to_string()),
            ("size", size(d, &consts).map_err(val)?.to_string()),
        ]);
    }
    Ok(rep)
}

pub fn cmd_span_prob(
    scenario_name: &str,
    q: Option<f64>,
    trials: u64,
    levels: u32,
    base: i64,
    seed: u64,
) -> Result<Report, CliError> {
    let s = scenario(scenario_name)?;
    let q = q.unwrap_or(0.15);
    if !(0.0..=1.0).contains(&q) {
        return Err(val("q must be in [0,1]"));
    }
    if base < 1 {
        return Err(val("--base must be positive"));
    }
    let mut rep = Report::new();
    for level in 0..levels {
        let reach = qi(base as i128) * qi(1 << level);
        let d = Droplet::Dyd(quad_of_cluster(&[(0, 0)], reach, s.dirs));
        let est = estimate_spanning_probability(
            &d, q, &s.family, s.dirs, &s.consts, s.alpha, trials, seed,
        )
        .map_err(val)?;
        rep.push(&[
            ("level", level.to_string()),
            ("reach", reach.to_string()),
            ("successes", est.successes.to_string()),
            ("trials", est.trials.to_string()),
            ("p_hat", format!("{:.6}", est.p_hat)),
            ("lo", format!("{:.6}", est.lo)),
            ("hi", format!("{:.6}", est.hi)),
        ]);
    }
    Ok(rep)
}

fn ceil_log2(n: u32) -> u32 {
    debug_assert!(n >= 1);
    32 - (n - 1).leading_zeros()
}

pub fn cmd_east_barrier(max: u32) -> Result<Report, CliError> {
    if max < 1 {
        return Err(val("--max must be at least 1"));
    }
    let mut rep = Report::new();
    for m in 1..=max {
        let barrier = east_min_barrier(m)?;
        rep.push(&[
            ("m", m.to_string()),
            ("barrier", barrier.to_string()),
            ("log2_bound", ceil_log2(m + 1).to_string()),
        ]);
    }
    Ok(rep)
}

pub fn cmd_kcm_tau(
    fam: &UpdateFamily,
    q: f64,
    trials: u64,
    window: Window,
    horizon: f64,
    seed: u64,
) -> Result<Report, CliError> {
    if !(0.0 < q && q < 1.0) {
        return Err(val("q must be in (0,1)"));
    }
    if trials < 1 {
        return Err(val("need at least one trial"));
    }
    let sys = KcmSystem::new(fam.clone(), window, Boundary::AllOccupied);
    let mut taus = Vec::new();
    let mut censored = 0u64;
    for trial in 0..trials {
        let run = simulate_kcm(&sys, q, StopRule::OriginEmpty { horizon }, seed, trial)?;
        match run.tau0 {
            Some(t) => taus.push(t),
            None => censored += 1,
        }
    }
    let n = taus.len() as f64;
    let mean = taus.iter().sum::<f64>() / n.max(1.0);
    let var = taus.iter().map(|t| (t - mean) * (t - mean)).sum::<f64>() / (n - 1.0).max(1.0);
    let mut rep = Report::new();
    rep.push(&[
        ("family", family_name(fam)),
        ("q", format!("{q:e}")),
        ("trials", trials.to_string()),
        ("censored", censored.to_string()),
        ("mean_tau0", format!("{mean:.6}")),
        ("stderr", format!("{:.6}", (var / n.max(1.0)).sqrt())),
    ]);
    Ok(rep)
}

pub fn cmd_gap(
    fam: &UpdateFamily,
    q: f64,
    window: Window,
    cap: usize,
) -> Result<Report, CliError> {
    if !(0.0 < q && q < 1.0) {
        return Err(val("q must be in (0,1)"));
    }
    let sys = KcmSystem::new(fam.clone(), window, Boundary::AllOccupied);
    let g = exact_generator_gap(&sys, q, cap)?;
    let mut rep = Report::new();
    rep.push(&[
        ("family", family_name(fam)),
        ("q", format!("{q:e}")),
        ("n_states", g.n_states.to_string()),
        ("component_size", g.component_size.to_string()),
        ("reducible", g.reducible.to_string()),
        ("gap", format!("{:.10}", g.gap)),
        ("t_rel", format!("{:.10}", g.t_rel)),
    ]);
    Ok(rep)
}

pub fn cmd_arrows(
    scenario_name: &str,
    q: Option<f64>,
    trials: u64,
    n_report: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let s = scenario(scenario_name)?;
    let geom = scenario_geometry(&s)?;
    let q = q.unwrap_or(s.q);
    if !(0.0..=1.0).contains(&q) {
        return Err(val("q must be in [0,1]"));
    }
    let stats = estimate_arrow_probabilities(
        q, &geom, &s.family, &s.consts, s.alpha, trials, seed, n_report,
    )
    .map_err(val)?;
    let mut rep = Report::new();
    for (i, w) in stats.b_n.iter().enumerate() {
        let n = i + 1;
        let bound = stats.q_eff.powi(n as i32);
        rep.push(&[
            ("n", n.to_string()),
            ("successes", w.successes.to_string()),
            ("trials", w.trials.to_string()),
            ("p_hat", format!("{:.6}", w.p_hat)),
            ("lo", format!("{:.6}", w.lo)),
            ("hi", format!("{:.6}", w.hi)),
            ("bound", format!("{bound:.6}")),
            ("within_bound", (w.hi <= bound).to_string()),
        ]);
    }
    Ok(rep)
}

pub fn cmd_path_check(
    scenario_name: &str,
    trials: u64,
    steps: usize,
    seed: u64,
) -> Result<Report, CliError> {
    let s = scenario(scenario_name)?;
    let geom = scenario_geometry(&s)?;
    let sites = geom.domain_sites();
    let mut flips = 0u64;
    let mut chain_checks = 0u64;
    let mut chain_fails = 0u64;
    let mut eta_violations = 0u64;
    for trial in 0..trials {
        let mut rng = seeds::stream_rng(seed, seeds::streams::PATHS, trial);
        let mut omega: BTreeSet<(i64, i64)> = sites
            .iter()
            .copied()
            .filter(|_| rng.gen_bool(s.q))
            .collect();
        let mut etas = Vec::with_capacity(steps + 1);
        let profile = arrow_profile(&omega, &geom, &s.family, &s.consts, s.alpha).map_err(val)?;
        etas.push(eta_of(&profile, &geom).eta);
        for _ in 0..steps {
            let x = sites[rng.gen_range(0..sites.len())];
            if !flip_is_legal(&omega, x, &geom, &s.family) {
                etas.push(etas.last().unwrap().clone());
                continue;
            }
            if !omega.contains(&x) {
                chain_checks += 1;
                let verdict =
                    chain_flip_check(&omega, x, &geom, &s.family, &s.consts, s.alpha)
                        .map_err(val)?;
                if !matches!(verdict, ChainVerdict::Pass) {
                    chain_fails += 1;
                }
                omega.insert(x);
            } else {
                omega.remove(&x);
            }
            flips += 1;
            let profile =
                arrow_profile(&omega, &geom, &s.family, &s.consts, s.alpha).map_err(val)?;
            etas.push(eta_of(&profile, &geom).eta);
        }
        if !eta_path_is_east_legal(&etas) {
            eta_violations += 1;
        }
    }
    let mut rep = Report::new();
    rep.push(&[
        ("scenario", s.name.into()),
        ("trials", trials.to_string()),
        ("steps", steps.to_string()),
        ("flips", flips.to_string()),
        ("chain_checks", chain_checks.to_string()),
        ("chain_fails", chain_fails.to_string()),
        ("eta_violations", eta_violations.to_string()),
    ]);
    Ok(rep)
}

pub fn cmd_render(
    scenario_name: Option<&str>,
    family_spec: Option<&str>,
    sites: Option<Vec<(i64, i64)>>,
    window: Option<Window>,
) -> Result<String, CliError> {
    let mut scene = Scene::new();
    if let Some(name) = scenario_name {
        let s = scenario(name)?;
        let geom = scenario_geometry(&s)?;
        for i in 1..=geom.n_cols() {
            let class = if i % 2 == 0 { "site-alt" } else { "site" };
            for site in geom.column_sites(i) {
                scene.add_site(site, class);
            }
        }
        for site in geom.lambda0_sites() {
            scene.add_site(site, "ball");
        }
    }
    if let Some(spec) = family_spec {
        let fam = load_family(spec)?;
        let sites = sites.unwrap_or_default();
        let window = window.unwrap_or_else(|| Window::centered(32, 0));
        let (_, dirs, alpha) = canonical(&fam)?;
        let consts = DropletConstants::default();
        let k = SiteSet::new(sites.iter().copied(), window, None);
        let run =
            droplet_algorithm(&k, None, &consts, false, &fam, dirs, alpha, None).map_err(val)?;
        for site in &sites {
            scene.add_site(*site, "input");
        }
        for d in &run.droplets {
            for piece in d.pieces() {
                let corners = kcm2d::droplets::piece_vertices(&piece);
                scene.add_convex_polygon(&corners, "droplet");
            }
        }
    }
    Ok(scene.to_svg())
}
