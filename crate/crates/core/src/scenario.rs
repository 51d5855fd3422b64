//! Scenario files: two generators, tolerances, budgets, a seed and the
//! analyses to run.
//!
//! Scenarios are TOML or JSON documents. Every real parameter is a
//! decimal string such as `"0.05"` or `"1e-10"`; the string is kept next
//! to the parsed value so reports can echo exactly what was read.
//!
//! ```toml
//! name = "two-bumps"
//! seed = 7
//! epsilon = "0.38"
//! analyses = ["classify", "decompose", "certify"]
//!
//! [maps.f0]
//! family = "perturbed_rotation"
//! params = { alpha = "0", beta = "0.05", phase = "0" }
//!
//! [maps.f1]
//! family = "morse_smale"
//! params = { amplitude = "0.02", zeros = ["0.6", "0.7", "0.8", "0.9"] }
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{Budgets, Tolerances};
use crate::error::{Error, Result};
use crate::maps::family::MonotoneSpline;
use crate::maps::{CircleMap, MapFamily, MapPair};

/// The analyses a scenario can request, in dependency order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Analysis {
    Classify,
    Cycle,
    ReturnMap,
    Decompose,
    Certify,
    Denjoy,
    Orbit,
}

impl Analysis {
    pub const ALL: [Analysis; 7] = [
        Analysis::Classify,
        Analysis::Cycle,
        Analysis::ReturnMap,
        Analysis::Decompose,
        Analysis::Certify,
        Analysis::Denjoy,
        Analysis::Orbit,
    ];

    /// Analyses run when a scenario does not list any.
    pub const DEFAULT: [Analysis; 6] = [
        Analysis::Classify,
        Analysis::Cycle,
        Analysis::ReturnMap,
        Analysis::Decompose,
        Analysis::Certify,
        Analysis::Denjoy,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Analysis::Classify => "classify",
            Analysis::Cycle => "cycle",
            Analysis::ReturnMap => "return-map",
            Analysis::Decompose => "decompose",
            Analysis::Certify => "certify",
            Analysis::Denjoy => "denjoy",
            Analysis::Orbit => "orbit",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|a| a.id() == s)
    }

    /// Name of the report file.
    pub fn file_name(self) -> String {
        format!("{}.json", self.id().replace('-', "_"))
    }

    /// Analyses whose results this one consumes.
    pub fn prerequisites(self) -> &'static [Analysis] {
        match self {
            Analysis::Classify | Analysis::Orbit => &[],
            Analysis::Cycle | Analysis::Decompose | Analysis::Certify | Analysis::Denjoy => &[Analysis::Classify],
            Analysis::ReturnMap => &[Analysis::Classify, Analysis::Cycle],
        }
    }

    /// `requested` plus prerequisites, sorted in dependency order.
    pub fn closure(requested: &[Analysis]) -> Vec<Analysis> {
        let mut out: Vec<Analysis> = requested.iter().flat_map(|a| a.prerequisites().iter().copied().chain([*a])).collect();
        out.sort();
        out.dedup();
        out
    }
}

impl fmt::Display for Analysis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// A real number read from a decimal string.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decimal {
    pub text: String,
    pub value: f64,
}

/// Whether `s` is a plain decimal literal (`-0.5`, `.25`, `1e-10`).
fn is_decimal_literal(s: &str) -> bool {
    let b = s.as_bytes();
    let mut i = 0;
    if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
        i += 1;
    }
    let int_start = i;
    while i < b.len() && b[i].is_ascii_digit() {
        i += 1;
    }
    let mut digits = i - int_start;
    if i < b.len() && b[i] == b'.' {
        i += 1;
        let frac_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        digits += i - frac_start;
    }
    if digits == 0 {
        return false;
    }
    if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
        i += 1;
        if i < b.len() && (b[i] == b'+' || b[i] == b'-') {
            i += 1;
        }
        let exp_start = i;
        while i < b.len() && b[i].is_ascii_digit() {
            i += 1;
        }
        if i == exp_start {
            return false;
        }
    }
    i == b.len()
}

impl Decimal {
    pub fn parse(text: &str) -> std::result::Result<Self, String> {
        let t = text.trim();
        if !is_decimal_literal(t) {
            return Err(format!("`{text}` is not a decimal number"));
        }
        let value: f64 = t.parse().map_err(|e| format!("`{text}`: {e}"))?;
        if !value.is_finite() {
            return Err(format!("`{text}` overflows a double"));
        }
        Ok(Self { text: t.to_string(), value })
    }
}

/// A parameter: one decimal or a list of them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Param {
    Scalar(Decimal),
    List(Vec<Decimal>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSpec {
    pub family: String,
    /// Parameters as read, by name.
    pub params: BTreeMap<String, Param>,
    /// Scan window of a line family.
    pub window: Option<(Decimal, Decimal)>,
}

/// Knobs of the minimality certificate and the expansion check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertifyOptions {
    /// Bin width of the coverage and witness census.
    pub delta: f64,
    /// Target of the expansion certificate, `DR^N > kappa`.
    pub kappa: f64,
    /// Sample count of the measured cross-check of `DR^N`.
    pub samples: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        Self { delta: 1e-3, kappa: 2.0, samples: 1000 }
    }
}

#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub seed: u64,
    /// Closeness threshold of the hypotheses.
    pub epsilon: f64,
    pub maps: [MapSpec; 2],
    pub pair: MapPair,
    pub tolerances: Tolerances,
    pub budgets: Budgets,
    pub certify: CertifyOptions,
    pub analyses: Vec<Analysis>,
}

/// Collects field-level problems while walking a document.
struct Checker {
    problems: Vec<String>,
}

impl Checker {
    fn fail(&mut self, path: &str, msg: impl fmt::Display) {
        self.problems.push(format!("{path}: {msg}"));
    }

    fn table<'a>(&mut self, v: &'a Value, path: &str, allowed: &[&str]) -> Option<&'a serde_json::Map<String, Value>> {
        match v.as_object() {
            Some(m) => {
                for k in m.keys() {
                    if !allowed.contains(&k.as_str()) {
                        self.fail(&format!("{path}.{k}"), "unknown field");
                    }
                }
                Some(m)
            }
            None => {
                self.fail(path, "expected a table");
                None
            }
        }
    }

    fn decimal(&mut self, v: &Value, path: &str) -> Option<Decimal> {
        match v {
            Value::String(s) => match Decimal::parse(s) {
                Ok(d) => Some(d),
                Err(e) => {
                    self.fail(path, e);
                    None
                }
            },
            Value::Number(n) if n.is_i64() || n.is_u64() => Decimal::parse(&n.to_string()).ok(),
            Value::Number(n) => {
                self.fail(path, format!("write {n} as a decimal string, e.g. \"{n}\""));
                None
            }
            _ => {
                self.fail(path, "expected a decimal string");
                None
            }
        }
    }

    fn positive(&mut self, v: &Value, path: &str) -> Option<f64> {
        let d = self.decimal(v, path)?;
        if d.value > 0.0 {
            Some(d.value)
        } else {
            self.fail(path, "must be positive");
            None
        }
    }

    fn count(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = match v {
            Value::Number(n) => n.as_u64(),
            Value::String(s) if !s.is_empty() && s.bytes().all(|c| c.is_ascii_digit()) => s.parse().ok(),
            _ => None,
        };
        if n.is_none() {
            self.fail(path, "expected a non-negative integer");
        }
        n
    }

    fn positive_count(&mut self, v: &Value, path: &str) -> Option<u64> {
        let n = self.count(v, path)?;
        if n == 0 {
            self.fail(path, "must be positive");
            return None;
        }
        Some(n)
    }
}

const FAMILIES: [&str; 5] = ["perturbed_rotation", "rotation", "morse_smale", "monotone_spline", "line_bump"];

fn family_params(family: &str) -> (&'static [&'static str], &'static [&'static str]) {
    // (required, optional)
    match family {
        "perturbed_rotation" => (&["alpha", "beta"], &["phase"]),
        "rotation" => (&["alpha"], &[]),
        "morse_smale" => (&["amplitude", "zeros"], &["shift"]),
        "monotone_spline" => (&["knots", "values"], &[]),
        "line_bump" => (&["amplitude", "zeros"], &["shift"]),
        _ => (&[], &[]),
    }
}

fn is_list_param(name: &str) -> bool {
    matches!(name, "zeros" | "knots" | "values")
}

fn parse_map(c: &mut Checker, v: &Value, path: &str) -> Option<MapSpec> {
    let m = c.table(v, path, &["family", "params", "window"])?;
    let family = match m.get("family").and_then(Value::as_str) {
        Some(f) if FAMILIES.contains(&f) => f.to_string(),
        Some(f) => {
            c.fail(&format!("{path}.family"), format!("unknown family `{f}`; expected one of {}", FAMILIES.join(", ")));
            return None;
        }
        None => {
            c.fail(&format!("{path}.family"), "missing");
            return None;
        }
    };
    let (required, optional) = family_params(&family);
    let mut allowed: Vec<&str> = required.to_vec();
    allowed.extend_from_slice(optional);
    let empty = Value::Object(Default::default());
    let pv = m.get("params").unwrap_or(&empty);
    let pm = c.table(pv, &format!("{path}.params"), &allowed)?;
    let mut params = BTreeMap::new();
    let mut ok = true;
    for name in required {
        if !pm.contains_key(*name) {
            c.fail(&format!("{path}.params.{name}"), "missing");
            ok = false;
        }
    }
    for (name, val) in pm {
        if !allowed.contains(&name.as_str()) {
            continue;
        }
        let p = format!("{path}.params.{name}");
        if is_list_param(name) {
            match val.as_array() {
                Some(items) => {
                    let ds: Vec<Option<Decimal>> = items.iter().enumerate().map(|(i, x)| c.decimal(x, &format!("{p}[{i}]"))).collect();
                    if ds.iter().all(Option::is_some) {
                        params.insert(name.clone(), Param::List(ds.into_iter().flatten().collect()));
                    } else {
                        ok = false;
                    }
                }
                None => {
                    c.fail(&p, "expected a list of decimal strings");
                    ok = false;
                }
            }
        } else {
            match c.decimal(val, &p) {
                Some(d) => {
                    params.insert(name.clone(), Param::Scalar(d));
                }
                None => ok = false,
            }
        }
    }
    let line = family == "line_bump";
    let window = match (m.get("window"), line) {
        (Some(w), true) => match w.as_array().map(Vec::as_slice) {
            Some([lo, hi]) => {
                let (lo, hi) = (c.decimal(lo, &format!("{path}.window[0]")), c.decimal(hi, &format!("{path}.window[1]")));
                match (lo, hi) {
                    (Some(lo), Some(hi)) if lo.value < hi.value => Some((lo, hi)),
                    (Some(_), Some(_)) => {
                        c.fail(&format!("{path}.window"), "lower end must be below upper end");
                        ok = false;
                        None
                    }
                    _ => {
                        ok = false;
                        None
                    }
                }
            }
            _ => {
                c.fail(&format!("{path}.window"), "expected two decimal strings");
                ok = false;
                None
            }
        },
        (None, true) => Some((Decimal::parse("-6").unwrap(), Decimal::parse("6").unwrap())),
        (Some(_), false) => {
            c.fail(&format!("{path}.window"), "only line families take a window");
            ok = false;
            None
        }
        (None, false) => None,
    };
    ok.then_some(MapSpec { family, params, window })
}

impl MapSpec {
    fn scalar(&self, name: &str, default: f64) -> f64 {
        match self.params.get(name) {
            Some(Param::Scalar(d)) => d.value,
            _ => default,
        }
    }

    fn list(&self, name: &str) -> Vec<f64> {
        match self.params.get(name) {
            Some(Param::List(v)) => v.iter().map(|d| d.value).collect(),
            _ => Vec::new(),
        }
    }

    /// Build the map; parameters must already be present.
    pub fn build(&self) -> Result<CircleMap> {
        let fam = match self.family.as_str() {
            "perturbed_rotation" => MapFamily::perturbed(self.scalar("alpha", 0.0), self.scalar("beta", 0.0), self.scalar("phase", 0.0)),
            "rotation" => MapFamily::rotation(self.scalar("alpha", 0.0)),
            "morse_smale" => MapFamily::morse_smale(self.scalar("shift", 0.0), self.scalar("amplitude", 0.0), self.list("zeros")),
            "monotone_spline" => MapFamily::Spline(MonotoneSpline::new(&self.list("knots"), &self.list("values"))?),
            "line_bump" => MapFamily::line_bump(self.scalar("shift", 0.0), self.scalar("amplitude", 0.0), self.list("zeros")),
            f => return Err(Error::InvalidMap(format!("unknown family {f}"))),
        };
        match &self.window {
            Some((lo, hi)) => CircleMap::on_line(fam, lo.value, hi.value),
            None => CircleMap::new(fam),
        }
    }
}

impl Scenario {
    /// Read a scenario; the format follows the extension (`.json`, else
    /// TOML). The file stem is the default name.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("scenario");
        if path.extension().is_some_and(|e| e == "json") {
            Self::from_json_str(&text, stem)
        } else {
            Self::from_toml_str(&text, stem)
        }
    }

    pub fn from_toml_str(text: &str, default_name: &str) -> Result<Self> {
        let v: Value = toml::from_str(text).map_err(|e| Error::ScenarioInvalid(vec![format!("TOML: {}", e.message())]))?;
        Self::from_value(&v, default_name)
    }

    pub fn from_json_str(text: &str, default_name: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| Error::ScenarioInvalid(vec![format!("JSON: {e}")]))?;
        Self::from_value(&v, default_name)
    }

    /// Validate a parsed document, reporting every problem found.
    pub fn from_value(v: &Value, default_name: &str) -> Result<Self> {
        let mut c = Checker { problems: Vec::new() };
        let top = c
            .table(v, "scenario", &["name", "seed", "epsilon", "analyses", "maps", "tolerances", "budgets", "certify"])
            .ok_or_else(|| Error::ScenarioInvalid(c.problems.clone()))?;
        let name = match top.get("name") {
            None => default_name.to_string(),
            Some(Value::String(s)) if !s.is_empty() => s.clone(),
            Some(_) => {
                c.fail("name", "expected a non-empty string");
                String::new()
            }
        };
        let seed = top.get("seed").map_or(Some(0), |s| c.count(s, "seed"));
        let epsilon = match top.get("epsilon") {
            None => Some(0.38),
            Some(e) => c.positive(e, "epsilon").and_then(|e| {
                if e < 1.0 {
                    Some(e)
                } else {
                    c.fail("epsilon", "must lie in (0, 1)");
                    None
                }
            }),
        };
        let analyses = match top.get("analyses") {
            None => Analysis::DEFAULT.to_vec(),
            Some(Value::Array(items)) => {
                let mut out = Vec::new();
                for (i, a) in items.iter().enumerate() {
                    match a.as_str().and_then(Analysis::from_id) {
                        Some(x) => out.push(x),
                        None => c.fail(&format!("analyses[{i}]"), format!("unknown analysis {a}; expected one of {}", Analysis::ALL.map(Analysis::id).join(", "))),
                    }
                }
                if items.is_empty() {
                    c.fail("analyses", "must not be empty");
                }
                out
            }
            Some(_) => {
                c.fail("analyses", "expected a list");
                Vec::new()
            }
        };

        let mut specs = [None, None];
        match top.get("maps") {
            Some(mv) => {
                if let Some(mm) = c.table(mv, "maps", &["f0", "f1"]) {
                    for (i, key) in ["f0", "f1"].iter().enumerate() {
                        match mm.get(*key) {
                            Some(x) => specs[i] = parse_map(&mut c, x, &format!("maps.{key}")),
                            None => c.fail(&format!("maps.{key}"), "missing"),
                        }
                    }
                }
            }
            None => c.fail("maps", "missing"),
        }

        let mut tolerances = Tolerances::default();
        if let Some(tv) = top.get("tolerances") {
            if let Some(t) = c.table(tv, "tolerances", &["point", "inversion", "margin", "deltas"]) {
                for (key, slot) in [("point", &mut tolerances.point), ("inversion", &mut tolerances.inversion), ("margin", &mut tolerances.margin)] {
                    if let Some(x) = t.get(key) {
                        if let Some(p) = c.positive(x, &format!("tolerances.{key}")) {
                            *slot = p;
                        }
                    }
                }
                if let Some(d) = t.get("deltas") {
                    match d.as_array() {
                        Some(items) if !items.is_empty() => {
                            tolerances.deltas = items.iter().enumerate().filter_map(|(i, x)| c.positive(x, &format!("tolerances.deltas[{i}]"))).collect();
                        }
                        _ => c.fail("tolerances.deltas", "expected a non-empty list of decimal strings"),
                    }
                }
            }
        }

        let mut budgets = Budgets::default();
        if let Some(bv) = top.get("budgets") {
            if let Some(b) = c.table(bv, "budgets", &["orbit_steps", "atlas_depth", "piece_budget", "rotation_iterations", "max_denominator"]) {
                let mut get = |key: &str| b.get(key).and_then(|x| c.positive_count(x, &format!("budgets.{key}")));
                if let Some(n) = get("orbit_steps") {
                    budgets.orbit_steps = n as usize;
                }
                if let Some(n) = get("atlas_depth") {
                    budgets.atlas_depth = n as usize;
                }
                if let Some(n) = get("piece_budget") {
                    budgets.piece_budget = n as usize;
                }
                if let Some(n) = get("rotation_iterations") {
                    budgets.rotation_iterations = n as usize;
                }
                if let Some(n) = get("max_denominator") {
                    budgets.max_denominator = n.min(u32::MAX as u64) as u32;
                }
            }
        }

        let mut certify = CertifyOptions::default();
        if let Some(cv) = top.get("certify") {
            if let Some(t) = c.table(cv, "certify", &["delta", "kappa", "samples"]) {
                if let Some(d) = t.get("delta").and_then(|x| c.positive(x, "certify.delta")) {
                    if d < 1.0 {
                        certify.delta = d;
                    } else {
                        c.fail("certify.delta", "must be below 1");
                    }
                }
                if let Some(k) = t.get("kappa").and_then(|x| c.positive(x, "certify.kappa")) {
                    if k > 1.0 {
                        certify.kappa = k;
                    } else {
                        c.fail("certify.kappa", "must exceed 1");
                    }
                }
                if let Some(n) = t.get("samples").and_then(|x| c.positive_count(x, "certify.samples")) {
                    certify.samples = n as usize;
                }
            }
        }

        let built: Vec<Option<CircleMap>> = specs
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let s = s.as_ref()?;
                s.build().map_err(|e| c.fail(&format!("maps.f{i}"), e)).ok()
            })
            .collect();
        let pair = match (&built[0], &built[1]) {
            (Some(f0), Some(f1)) => MapPair::new(f0.clone(), f1.clone()).map_err(|e| c.fail("maps", e)).ok(),
            _ => None,
        };
        if !c.problems.is_empty() {
            return Err(Error::ScenarioInvalid(c.problems));
        }
        let [s0, s1] = specs;
        Ok(Scenario {
            name,
            seed: seed.unwrap_or(0),
            epsilon: epsilon.unwrap_or(0.38),
            maps: [s0.unwrap(), s1.unwrap()],
            pair: pair.unwrap(),
            tolerances,
            budgets,
            certify,
            analyses,
        })
    }
}
