//! Running a scenario: analyses in dependency order, one report per
//! analysis and a summary.
//!
//! The stages share one context (reduction, fixed points, star
//! intervals, cycle). A failing stage stops the run; the reports of the
//! stages before it are still written, and the summary records the
//! error and the exit code (0 success, 1 input, 2 hypotheses, 3
//! numerical).

use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::cycles::{find_cycle, reduce_pair, verify_cycle_order, Cycle, OrderCertificate, Reduction};
use crate::error::{Error, Result};
use crate::intervals::{enumerate_star_intervals, enumerate_with_inventory, Inventory, StarInterval, StarKind};
use crate::limits::decomposition::spectral_decomposition;
use crate::limits::denjoy::denjoy_check;
use crate::limits::minimality::{minimality_certificate, MinimalityReport};
use crate::limits::orbit::{stream_rng, BinGrid, Strategy, Walker};
use crate::maps::distortion::{circle_variation, closeness_certificate, distortion, power_derivative_bounds, Closeness, PowerDerivativeBounds};
use crate::maps::fixed::FixedPointRecord;
use crate::maps::rotation::{RotationNumber, RotationVerdict};
use crate::maps::{Generator, MapPair};
use crate::report::{envelope, to_bytes, to_report_value};
use crate::return_map::expansion::{
    cycle_condition, duminy_condition, expansion_certificate, power_derivative, Condition, ExpansionBound, ExpansionCertificate, Frame, GlobalConstants,
    LocalConstants,
};
use crate::return_map::global::{build_global_return_map, CycleFrame};
use crate::return_map::local::{build_local_return_map, LocalFrame};
use crate::return_map::ReturnMapAtlas;
use crate::scenario::{Analysis, MapSpec, Scenario};

/// Points of a derivative profile.
pub const PROFILE_POINTS: usize = 256;

impl Error {
    /// Process exit code of the error's class.
    pub fn exit_code(&self) -> i32 {
        if self.is_hypothesis_failure() {
            2
        } else if self.is_numerical() {
            3
        } else {
            1
        }
    }

    /// Variant name, for reports.
    pub fn kind(&self) -> String {
        let dbg = format!("{self:?}");
        dbg.split(|c: char| !c.is_alphanumeric()).next().unwrap_or_default().to_string()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MapSummary {
    pub generator: Generator,
    pub spec: MapSpec,
    pub domain: &'static str,
    /// Total variation of `log Df` (over the scan window on the line).
    pub variation: f64,
    pub closeness: Option<Closeness>,
    pub rotation: Option<RotationNumber>,
    /// The reduced generator is `f^power - shift`.
    pub power: u32,
    pub shift: i64,
    /// Fixed points of the reduced generator.
    pub fixed_points: Vec<FixedPointRecord>,
    /// Derivative range of `f^power` against `[e^-V, e^V]`.
    pub envelope: Option<PowerDerivativeBounds>,
    pub envelope_note: Option<String>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct KindCounts {
    pub ss: usize,
    pub su: usize,
    pub uu: usize,
    pub s: usize,
    pub u: usize,
}

impl KindCounts {
    pub fn of(stars: &[StarInterval]) -> Self {
        let mut c = Self::default();
        for k in stars {
            match k.kind {
                StarKind::Ss => c.ss += 1,
                StarKind::Su => c.su += 1,
                StarKind::Uu => c.uu += 1,
                StarKind::S => c.s += 1,
                StarKind::U => c.u += 1,
            }
        }
        c
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClassifyResult {
    pub maps: [MapSummary; 2],
    /// Star intervals of the reduced pair.
    pub star_intervals: Vec<StarInterval>,
    pub counts: KindCounts,
    /// Kinds seen by the inverse pair (ss and uu trade places).
    pub inverse_counts: KindCounts,
}

#[derive(Debug, Clone, Serialize)]
pub struct CycleResult {
    pub cycle: Option<Cycle>,
    pub order_certificate: Option<OrderCertificate>,
    pub condition: Option<Condition<GlobalConstants>>,
    pub epsilon: f64,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct ProfilePoint {
    pub x: f64,
    /// `DR(x)`.
    pub dr: f64,
    /// `DR^N(x)` for the certificate's `N`.
    pub dr_n: Option<f64>,
}

#[derive(Debug, Clone, Serialize)]
pub struct AtlasReport {
    /// `"ss"`, `"su"`, ... for local atlases, `"cycle"` for the global one.
    pub label: String,
    pub a: f64,
    pub b: f64,
    pub atlas: Option<ReturnMapAtlas>,
    pub local_condition: Option<Condition<LocalConstants>>,
    pub cycle_condition: Option<Condition<GlobalConstants>>,
    pub certificate: Option<ExpansionCertificate>,
    pub profile: Vec<ProfilePoint>,
    pub skipped: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ReturnMapResult {
    pub local: Vec<AtlasReport>,
    pub global: Option<AtlasReport>,
}

/// Visit counts of one orbit over bins of width `delta`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrbitHistogram {
    pub inverse: bool,
    pub start: f64,
    pub steps: usize,
    pub lo: f64,
    pub hi: f64,
    pub delta: f64,
    pub counts: Vec<u64>,
    /// Steps that landed outside `[lo, hi)` (line only).
    pub outside: u64,
    pub escaped: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct OrbitResult {
    pub forward: OrbitHistogram,
    pub backward: OrbitHistogram,
}

#[derive(Debug, Clone, Serialize)]
pub struct CertifyResult {
    pub minimality: MinimalityReport,
    pub orbit: OrbitResult,
}

/// One orbit of `Phi` (or `Phi^-1`) binned at `delta`.
pub fn orbit_histogram(pair: &MapPair, inverse: bool, steps: usize, delta: f64, seed: u64) -> OrbitHistogram {
    let (lo, hi) = pair.domain().scan_window();
    let (lo, hi) = if pair.is_circle() { (0.0, 1.0) } else { (lo, hi) };
    let grid = BinGrid::new(lo, hi, delta);
    let walker = Walker::new(pair, inverse);
    let start = 0.5 * (lo + hi);
    let mut counts = vec![0u64; grid.count];
    let mut outside = 0u64;
    let mut rng = stream_rng(seed, 0x6869_7374 + inverse as u64);
    let end = walker.run(start, steps, Strategy::Mixed, &mut rng, |_, y, _| {
        match grid.index(y) {
            Some(b) => counts[b] += 1,
            None => outside += 1,
        }
        true
    });
    OrbitHistogram { inverse, start, steps: end.steps, lo, hi, delta, counts, outside, escaped: end.escaped.is_some() }
}

fn orbit_result(s: &Scenario) -> OrbitResult {
    let steps = s.budgets.orbit_steps;
    OrbitResult {
        forward: orbit_histogram(&s.pair, false, steps, s.certify.delta, s.seed),
        backward: orbit_histogram(&s.pair, true, steps, s.certify.delta, s.seed),
    }
}

struct Context {
    reduction: Reduction,
    inventory: Option<Inventory>,
    stars: Vec<StarInterval>,
    cycle: Option<Cycle>,
}

fn map_summary(s: &Scenario, r: &Reduction, g: Generator) -> Result<MapSummary> {
    let f = s.pair.get(g);
    let i = g.index();
    let circle = f.domain().is_circle();
    let variation = if circle { circle_variation(f) } else { distortion(f, None).total_variation_log_df };
    let fixed_points = crate::maps::fixed::fixed_points(r.pair.get(g), 1, g, &s.tolerances).or_else(|e| match e {
        Error::ContinuumOfFixedPoints { .. } => Ok(Vec::new()),
        e => Err(e),
    })?;
    let rational = r.rotation[i].as_ref().is_none_or(|rn| matches!(rn.verdict, RotationVerdict::Rational { .. }));
    let (envelope, envelope_note) = if !circle {
        (None, Some("the envelope is stated for circle maps".to_string()))
    } else if !rational {
        (None, Some("no periodic points: rotation number looks irrational".to_string()))
    } else {
        match power_derivative_bounds(f, r.powers[i], &s.tolerances) {
            Ok(b) => (Some(b), None),
            Err(e @ Error::EnvelopeViolation { .. }) => return Err(e),
            Err(e) => (None, Some(e.to_string())),
        }
    };
    Ok(MapSummary {
        generator: g,
        spec: s.maps[i].clone(),
        domain: if circle { "circle" } else { "line" },
        variation,
        closeness: circle.then(|| closeness_certificate(f, s.epsilon)),
        rotation: r.rotation[i],
        power: r.powers[i],
        shift: r.shifts[i],
        fixed_points,
        envelope,
        envelope_note,
    })
}

fn classify(s: &Scenario) -> Result<(Context, ClassifyResult)> {
    let tol = &s.tolerances;
    let reduction = reduce_pair(&s.pair, &s.budgets, tol)?;
    let maps = [map_summary(s, &reduction, Generator::F0)?, map_summary(s, &reduction, Generator::F1)?];
    let rp = &reduction.pair;
    let (inventory, stars, inverse_stars) = if reduction.has_periodic_points() {
        let inv = Inventory::compute(rp, tol)?;
        let stars = enumerate_with_inventory(rp, &inv, tol)?;
        let inverse = enumerate_star_intervals(&rp.inverse(), tol)?;
        (Some(inv), stars, inverse)
    } else {
        (None, Vec::new(), Vec::new())
    };
    let result = ClassifyResult { maps, counts: KindCounts::of(&stars), inverse_counts: KindCounts::of(&inverse_stars), star_intervals: stars.clone() };
    Ok((Context { reduction, inventory, stars, cycle: None }, result))
}

fn cycle_stage(s: &Scenario, ctx: &mut Context) -> Result<CycleResult> {
    let rp = &ctx.reduction.pair;
    let mut out = CycleResult { cycle: None, order_certificate: None, condition: None, epsilon: s.epsilon, note: None };
    let Some(inv) = &ctx.inventory else {
        out.note = Some("no periodic points".into());
        return Ok(out);
    };
    let Some(c) = find_cycle(rp, inv)? else {
        out.note = Some("a reduced generator has no attracting fixed point".into());
        return Ok(out);
    };
    if c.is_ss_pair() {
        out.note = Some("the cycle folds back: its two attractors bound an ss interval".into());
    } else {
        out.order_certificate = Some(verify_cycle_order(&c, rp, &s.tolerances)?);
        if rp.is_circle() {
            out.condition = Some(cycle_condition(rp, &c));
        }
    }
    ctx.cycle = Some(c.clone());
    out.cycle = Some(c);
    Ok(out)
}

fn profile(atlas: &ReturnMapAtlas, cp: &MapPair, frame: &Frame, n: Option<u32>) -> Vec<ProfilePoint> {
    let (lo, hi) = atlas.domain;
    (0..PROFILE_POINTS)
        .filter_map(|i| {
            let x = lo + (hi - lo) * (i as f64 + 0.5) / PROFILE_POINTS as f64;
            let (_, dr) = atlas.apply_with_deriv(cp, x)?;
            let dr_n = n.and_then(|n| power_derivative(atlas, cp, frame, x, n));
            Some(ProfilePoint { x, dr, dr_n })
        })
        .collect()
}

/// Construction problems that only mean the atlas does not apply.
fn skippable(e: &Error) -> bool {
    matches!(e, Error::OverlapEmpty | Error::InvalidMap(_) | Error::BudgetExhausted { .. } | Error::StageOrderViolation { .. })
}

fn local_atlas(s: &Scenario, rp: &MapPair, k: &StarInterval, seed: u64) -> Result<AtlasReport> {
    let tol = &s.tolerances;
    let mut out = AtlasReport {
        label: format!("{:?}", k.kind).to_lowercase(),
        a: k.a,
        b: k.b,
        atlas: None,
        local_condition: None,
        cycle_condition: None,
        certificate: None,
        profile: Vec::new(),
        skipped: None,
    };
    if !(k.a.is_finite() && k.b.is_finite()) {
        out.skipped = Some("unbounded interval".into());
        return Ok(out);
    }
    let atlas = match build_local_return_map(rp, k, s.budgets.atlas_depth, tol) {
        Ok(a) => a,
        Err(e) if skippable(&e) => {
            out.skipped = Some(e.to_string());
            return Ok(out);
        }
        Err(e) => return Err(e),
    };
    let cp = atlas.chart_pair(rp);
    let frame = Frame::Local(LocalFrame::new(&cp, k, tol)?);
    let cond = duminy_condition(rp, k, s.epsilon, tol)?;
    if let Condition::Holds { constants, .. } = &cond {
        out.certificate = Some(expansion_certificate(&atlas, &cp, &frame, ExpansionBound::Local(*constants), s.certify.kappa, s.certify.samples, seed)?);
    }
    out.profile = profile(&atlas, &cp, &frame, out.certificate.as_ref().map(|c| c.n));
    out.local_condition = Some(cond);
    out.atlas = Some(atlas);
    Ok(out)
}

fn global_atlas(s: &Scenario, ctx: &Context, seed: u64) -> Result<Option<AtlasReport>> {
    let (Some(c), Some(inv)) = (&ctx.cycle, &ctx.inventory) else { return Ok(None) };
    let rp = &ctx.reduction.pair;
    if c.is_ss_pair() || !rp.is_circle() {
        return Ok(None);
    }
    let mut out = AtlasReport {
        label: "cycle".into(),
        a: c.attractors[0],
        b: c.attractors[c.length],
        atlas: None,
        local_condition: None,
        cycle_condition: None,
        certificate: None,
        profile: Vec::new(),
        skipped: None,
    };
    let atlas = match build_global_return_map(rp, inv, c, &s.budgets, s.budgets.atlas_depth, &s.tolerances) {
        Ok(a) => a,
        Err(e) if skippable(&e) => {
            out.skipped = Some(e.to_string());
            return Ok(Some(out));
        }
        Err(e) => return Err(e),
    };
    let fr = CycleFrame::new(rp, c, &s.tolerances)?;
    let cp = fr.pair.clone();
    let frame = Frame::Global(fr);
    let cond = cycle_condition(rp, c);
    if let Condition::Holds { constants, .. } = &cond {
        out.certificate = Some(expansion_certificate(&atlas, &cp, &frame, ExpansionBound::Global(*constants), s.certify.kappa, s.certify.samples, seed)?);
    }
    out.profile = profile(&atlas, &cp, &frame, out.certificate.as_ref().map(|c| c.n));
    out.cycle_condition = Some(cond);
    out.atlas = Some(atlas);
    Ok(Some(out))
}

fn return_map_stage(s: &Scenario, ctx: &Context) -> Result<ReturnMapResult> {
    let rp = &ctx.reduction.pair;
    let local = ctx
        .stars
        .iter()
        .enumerate()
        .map(|(i, k)| local_atlas(s, rp, k, s.seed.wrapping_add(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    let global = global_atlas(s, ctx, s.seed.wrapping_add(ctx.stars.len() as u64))?;
    Ok(ReturnMapResult { local, global })
}

/// Everything one run produced.
#[derive(Debug, Clone)]
pub struct Bundle {
    /// `(file name, report)` in execution order.
    pub reports: Vec<(String, Value)>,
    pub summary: Value,
    pub exit_code: i32,
    pub error: Option<Error>,
}

impl Bundle {
    pub fn report(&self, a: Analysis) -> Option<&Value> {
        let name = a.file_name();
        self.reports.iter().find(|(n, _)| *n == name).map(|(_, v)| v)
    }

    /// Write every report and `summary.json` into `dir`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
        for (name, v) in self.reports.iter().chain([&("summary.json".to_string(), self.summary.clone())]) {
            let p = dir.join(name);
            std::fs::write(&p, to_bytes(v)).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?;
        }
        Ok(())
    }
}

fn headline(a: Analysis, v: &Value) -> Option<(String, Value)> {
    let r = &v["result"];
    Some(match a {
        Analysis::Classify => ("star_intervals".into(), r["counts"].clone()),
        Analysis::Cycle => ("cycle_length".into(), r["cycle"]["length"].clone()),
        Analysis::ReturnMap => (
            "certified_atlases".into(),
            json!(r["local"].as_array()?.iter().chain(r["global"].as_object().map(|_| &r["global"])).filter(|x| !x["certificate"].is_null()).count()),
        ),
        Analysis::Decompose => ("decomposition".into(), r["status"]["status"].clone()),
        Analysis::Certify => ("minimality".into(), r["minimality"]["verdict"]["verdict"].clone()),
        Analysis::Denjoy => (
            "cantor_suspected".into(),
            json!(r["intervals"].as_array()?.iter().any(|i| i["closure"] == "cantor_suspected")),
        ),
        Analysis::Orbit => ("orbit_steps".into(), r["forward"]["steps"].clone()),
    })
}

fn scenario_echo(s: &Scenario) -> Result<Value> {
    to_report_value(&json!({
        "name": s.name,
        "epsilon": crate::report::format_real(s.epsilon),
        "maps": to_report_value(&s.maps)?,
        "tolerances": to_report_value(&s.tolerances)?,
        "budgets": to_report_value(&s.budgets)?,
        "certify": to_report_value(&s.certify)?,
        "analyses": s.analyses.iter().map(|a| a.id()).collect::<Vec<_>>(),
    }))
}

fn run_stage(s: &Scenario, a: Analysis, ctx: &mut Option<Context>) -> Result<Value> {
    let tol = &s.tolerances;
    match a {
        Analysis::Classify => {
            let (c, r) = classify(s)?;
            *ctx = Some(c);
            to_report_value(&r)
        }
        Analysis::Cycle => {
            let c = ctx.as_mut().expect("classify runs first");
            to_report_value(&cycle_stage(s, c)?)
        }
        Analysis::ReturnMap => to_report_value(&return_map_stage(s, ctx.as_ref().expect("classify runs first"))?),
        Analysis::Decompose => to_report_value(&spectral_decomposition(&s.pair, s.epsilon, &s.budgets, tol, s.seed)?),
        Analysis::Certify => {
            let m = minimality_certificate(&s.pair, s.epsilon, s.certify.delta, s.budgets.orbit_steps, &s.budgets, tol, s.seed)?;
            to_report_value(&CertifyResult { minimality: m, orbit: orbit_result(s) })
        }
        Analysis::Denjoy => to_report_value(&denjoy_check(&s.pair, s.epsilon, s.budgets.orbit_steps, &s.budgets, tol, s.seed)?),
        Analysis::Orbit => to_report_value(&orbit_result(s)),
    }
}

/// Run `requested` (and what they depend on) on the scenario.
pub fn run_pipeline(s: &Scenario, requested: &[Analysis]) -> Bundle {
    let order = Analysis::closure(requested);
    let mut reports = Vec::new();
    let mut statuses = Vec::new();
    let mut headlines = serde_json::Map::new();
    let mut ctx: Option<Context> = None;
    let mut error: Option<Error> = None;
    for a in &order {
        if error.is_some() {
            statuses.push(json!({"analysis": a.id(), "status": "skipped", "file": null}));
            continue;
        }
        match run_stage(s, *a, &mut ctx) {
            Ok(result) => {
                let v = envelope(a.id(), &s.name, s.seed, result);
                if let Some((k, h)) = headline(*a, &v) {
                    headlines.insert(k, h);
                }
                statuses.push(json!({"analysis": a.id(), "status": "ok", "file": a.file_name()}));
                reports.push((a.file_name(), v));
            }
            Err(e) => {
                statuses.push(json!({"analysis": a.id(), "status": "failed", "file": null}));
                error = Some(e);
            }
        }
    }
    let exit_code = error.as_ref().map_or(0, Error::exit_code);
    let echo = scenario_echo(s).unwrap_or(Value::Null);
    let err_json = error.as_ref().map(|e| json!({"kind": e.kind(), "message": e.to_string(), "exit_code": e.exit_code()}));
    let summary = envelope(
        "summary",
        &s.name,
        s.seed,
        json!({
            "exit_code": exit_code,
            "analyses": statuses,
            "error": err_json,
            "headline": headlines,
            "scenario_echo": echo,
        }),
    );
    Bundle { reports, summary, exit_code, error }
}
