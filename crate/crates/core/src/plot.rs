//! CSV tables for external plotting, read back from report documents.
//!
//! | kind                 | source report       | columns                          |
//! |----------------------|---------------------|----------------------------------|
//! | `orbit_histogram`    | certify or orbit    | `direction,bin,lo,hi,count`      |
//! | `interval_diagram`   | decompose           | `kind,a,b,witnessed`             |
//! | `derivative_profile` | return-map          | `atlas,x,dr,dr_n`                |
//!
//! Reals are copied verbatim from the reports' decimal strings.

use std::fmt;

use serde_json::Value;

use crate::error::{Error, Result};
use crate::report::{format_real, parse_real};
use crate::scenario::Analysis;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlotKind {
    OrbitHistogram,
    IntervalDiagram,
    DerivativeProfile,
}

impl PlotKind {
    pub const ALL: [PlotKind; 3] = [PlotKind::OrbitHistogram, PlotKind::IntervalDiagram, PlotKind::DerivativeProfile];

    pub fn id(self) -> &'static str {
        match self {
            PlotKind::OrbitHistogram => "orbit_histogram",
            PlotKind::IntervalDiagram => "interval_diagram",
            PlotKind::DerivativeProfile => "derivative_profile",
        }
    }

    pub fn from_id(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.id() == s)
    }

    pub fn file_name(self) -> String {
        format!("{}.csv", self.id())
    }

    /// Reports that can feed this table, in order of preference.
    pub fn sources(self) -> &'static [Analysis] {
        match self {
            PlotKind::OrbitHistogram => &[Analysis::Certify, Analysis::Orbit],
            PlotKind::IntervalDiagram => &[Analysis::Decompose],
            PlotKind::DerivativeProfile => &[Analysis::ReturnMap],
        }
    }
}

impl fmt::Display for PlotKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

fn missing(what: &str) -> Error {
    Error::MissingSection(what.to_string())
}

fn real(v: &Value, what: &str) -> Result<f64> {
    v.as_str().and_then(parse_real).ok_or_else(|| missing(what))
}

fn text(v: &Value, what: &str) -> Result<String> {
    v.as_str().map(str::to_string).ok_or_else(|| missing(what))
}

fn finish(w: csv::Writer<Vec<u8>>) -> Result<String> {
    let bytes = w.into_inner().map_err(|e| Error::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Error::Io(e.to_string()))
}

fn io(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

fn orbit_histogram(result: &Value) -> Result<String> {
    let orbit = result.get("orbit").unwrap_or(result);
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["direction", "bin", "lo", "hi", "count"]).map_err(io)?;
    let mut any = false;
    for dir in ["forward", "backward"] {
        let h = &orbit[dir];
        let Some(counts) = h["counts"].as_array() else { continue };
        any = true;
        let (lo, hi) = (real(&h["lo"], "orbit.lo")?, real(&h["hi"], "orbit.hi")?);
        let width = (hi - lo) / counts.len() as f64;
        for (i, c) in counts.iter().enumerate() {
            let c = c.as_u64().ok_or_else(|| missing("orbit.counts"))?;
            let (a, b) = (lo + i as f64 * width, lo + (i + 1) as f64 * width);
            w.write_record([dir.to_string(), i.to_string(), format_real(a), format_real(b), c.to_string()]).map_err(io)?;
        }
    }
    if !any {
        return Err(missing("orbit"));
    }
    finish(w)
}

fn interval_diagram(result: &Value) -> Result<String> {
    let pieces = result["pieces"].as_array().ok_or_else(|| missing("pieces"))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["kind", "a", "b", "witnessed"]).map_err(io)?;
    for p in pieces {
        let k = &p["kind"];
        let kind = match k["type"].as_str() {
            Some("star_interval") => text(&k["kind"], "pieces.kind")?,
            Some("fixed_point") => format!("fixed_point_{}", text(&k["map"], "pieces.kind.map")?),
            _ => return Err(missing("pieces.kind")),
        };
        let (a, b) = (text(&p["a"], "pieces.a")?, text(&p["b"], "pieces.b")?);
        w.write_record([kind, a, b, (!p["witness"].is_null()).to_string()]).map_err(io)?;
    }
    finish(w)
}

fn derivative_profile(result: &Value) -> Result<String> {
    let local = result["local"].as_array().ok_or_else(|| missing("local"))?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["atlas", "x", "dr", "dr_n"]).map_err(io)?;
    let global = result["global"].is_object().then_some(&result["global"]);
    for (i, at) in local.iter().enumerate().map(|(i, a)| (Some(i), a)).chain(global.map(|g| (None, g))) {
        let label = text(&at["label"], "label")?;
        let name = match i {
            Some(i) => format!("local_{i}_{label}"),
            None => label,
        };
        for p in at["profile"].as_array().ok_or_else(|| missing("profile"))? {
            let dr_n = p["dr_n"].as_str().unwrap_or("").to_string();
            w.write_record([name.clone(), text(&p["x"], "profile.x")?, text(&p["dr"], "profile.dr")?, dr_n]).map_err(io)?;
        }
    }
    finish(w)
}

/// The CSV table `kind` built from `report` (a full report document).
pub fn emit_plot_data(report: &Value, kind: PlotKind) -> Result<String> {
    let analysis = report["analysis"].as_str().and_then(Analysis::from_id);
    if !analysis.is_some_and(|a| kind.sources().contains(&a)) {
        return Err(missing(kind.id()));
    }
    let result = report.get("result").ok_or_else(|| missing("result"))?;
    match kind {
        PlotKind::OrbitHistogram => orbit_histogram(result),
        PlotKind::IntervalDiagram => interval_diagram(result),
        PlotKind::DerivativeProfile => derivative_profile(result),
    }
}
