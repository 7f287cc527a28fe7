//! Version-1 JSON family files.
//!
//! Combinatorial files list curves by hub and meeting ids, plus the
//! counter-clockwise rotation at every meeting and hub:
//!
//! ```json
//! {
//!   "version": 1,
//!   "mode": "combinatorial",
//!   "curves": [{ "id": 0, "source": 0, "target": 1, "events": [0] }, ...],
//!   "meetings": [{ "id": 0, "rotation": [[0, "in"], [1, "in"], [0, "out"], [1, "out"]] }],
//!   "hubs": [{ "id": 0, "rotation": [[0, "start"]] }, ...]
//! }
//! ```
//!
//! Geometric files carry polylines whose coordinates are decimal strings
//! (plain JSON numbers are accepted too). A bare `{"curves": [...]}` object
//! and SVG documents made of `M`/`L` paths are read as geometric input.

use serde::de::{self, Deserializer};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;
use thiserror::Error;

use crate::geometry::{Point, Polyline};
use crate::model::{
    CombinatorialFamily, Containment, CurveId, CurveSpec, FaceRef, HubEnd, MeetingEnd, Passage,
    StructuralError, Terminal,
};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("schema: {0}")]
    Schema(String),
    #[error("svg: {0}")]
    Svg(String),
    #[error(transparent)]
    Structural(#[from] StructuralError),
}

fn schema(msg: impl Into<String>) -> FormatError {
    FormatError::Schema(msg.into())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Combinatorial,
    Geometric,
}

/// A coordinate stored as a decimal string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Coord(pub f64);

impl Serialize for Coord {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&format!("{}", self.0))
    }
}

impl<'de> Deserialize<'de> for Coord {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::String(s) => s
                .trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .map(Coord)
                .ok_or_else(|| de::Error::custom(format!("bad decimal {s:?}"))),
            Value::Number(n) => n.as_f64().map(Coord).ok_or_else(|| de::Error::custom("bad number")),
            other => Err(de::Error::custom(format!("expected a coordinate, got {other}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CurveRecord {
    pub id: usize,
    pub source: usize,
    pub target: usize,
    pub events: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeetingRecord {
    pub id: usize,
    pub rotation: [(usize, Passage); 4],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HubRecord {
    pub id: usize,
    pub rotation: Vec<(usize, Terminal)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolylineRecord {
    pub id: usize,
    pub points: Vec<(Coord, Coord)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CombinatorialFileV1 {
    pub version: u32,
    pub mode: Mode,
    pub curves: Vec<CurveRecord>,
    #[serde(default)]
    pub meetings: Vec<MeetingRecord>,
    pub hubs: Vec<HubRecord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub containment: Vec<Containment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<FaceRef>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricFileV1 {
    pub version: u32,
    pub mode: Mode,
    pub curves: Vec<PolylineRecord>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerance: Option<Coord>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub containment: Vec<Containment>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<FaceRef>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum FamilyFile {
    Combinatorial(CombinatorialFileV1),
    Geometric(GeometricFileV1),
}

impl FamilyFile {
    pub fn parse(text: &str) -> Result<FamilyFile, FormatError> {
        let trimmed = text.trim_start();
        if trimmed.starts_with('<') {
            return Ok(FamilyFile::Geometric(parse_svg(trimmed)?));
        }
        let value: Value = serde_json::from_str(text)?;
        let Value::Object(map) = &value else {
            return Err(schema("top level must be an object"));
        };
        if !map.contains_key("version") {
            // bare geometric input
            #[derive(Deserialize)]
            #[serde(deny_unknown_fields)]
            struct Bare {
                curves: Vec<PolylineRecord>,
            }
            let bare: Bare = serde_json::from_value(value)?;
            let file = GeometricFileV1 {
                version: 1,
                mode: Mode::Geometric,
                curves: bare.curves,
                tolerance: None,
                containment: Vec::new(),
                outer: None,
            };
            file.check()?;
            return Ok(FamilyFile::Geometric(file));
        }
        match map.get("version").and_then(Value::as_u64) {
            Some(1) => {}
            other => return Err(schema(format!("unsupported version {other:?}"))),
        }
        let mode: Mode = serde_json::from_value(
            map.get("mode").cloned().ok_or_else(|| schema("missing mode"))?,
        )?;
        match mode {
            Mode::Combinatorial => {
                let f: CombinatorialFileV1 = serde_json::from_value(value)?;
                f.check()?;
                Ok(FamilyFile::Combinatorial(f))
            }
            Mode::Geometric => {
                let f: GeometricFileV1 = serde_json::from_value(value)?;
                f.check()?;
                Ok(FamilyFile::Geometric(f))
            }
        }
    }

    /// Canonical text: pretty JSON with a trailing newline.
    pub fn to_canonical_string(&self) -> String {
        let mut s = match self {
            FamilyFile::Combinatorial(f) => serde_json::to_string_pretty(f),
            FamilyFile::Geometric(f) => serde_json::to_string_pretty(f),
        }
        .expect("family files always serialize");
        s.push('\n');
        s
    }

    pub fn mode(&self) -> Mode {
        match self {
            FamilyFile::Combinatorial(_) => Mode::Combinatorial,
            FamilyFile::Geometric(_) => Mode::Geometric,
        }
    }
}

fn dense(what: &str, ids: impl Iterator<Item = usize>) -> Result<(), FormatError> {
    for (i, id) in ids.enumerate() {
        if id != i {
            return Err(schema(format!("{what} ids must be 0..n in order; found {id} at {i}")));
        }
    }
    Ok(())
}

impl CombinatorialFileV1 {
    fn check(&self) -> Result<(), FormatError> {
        if self.mode != Mode::Combinatorial {
            return Err(schema("mode must be combinatorial"));
        }
        dense("curve", self.curves.iter().map(|c| c.id))?;
        dense("meeting", self.meetings.iter().map(|m| m.id))?;
        dense("hub", self.hubs.iter().map(|h| h.id))?;
        let n = self.curves.len();
        for m in &self.meetings {
            if let Some((c, _)) = m.rotation.iter().find(|(c, _)| *c >= n) {
                return Err(schema(format!("meeting {} names unknown curve {c}", m.id)));
            }
        }
        for h in &self.hubs {
            if let Some((c, _)) = h.rotation.iter().find(|(c, _)| *c >= n) {
                return Err(schema(format!("hub {} names unknown curve {c}", h.id)));
            }
        }
        for c in &self.curves {
            if c.source >= self.hubs.len() || c.target >= self.hubs.len() {
                return Err(schema(format!("curve {} names an unknown hub", c.id)));
            }
            if let Some(m) = c.events.iter().find(|&&m| m >= self.meetings.len()) {
                return Err(schema(format!("curve {} names unknown meeting {m}", c.id)));
            }
        }
        Ok(())
    }

    pub fn to_family(&self) -> Result<CombinatorialFamily, FormatError> {
        let curves = self.curves.iter().map(|c| CurveSpec::new(c.source, c.target, &c.events)).collect();
        let meetings = self
            .meetings
            .iter()
            .map(|m| m.rotation.map(|(c, p)| MeetingEnd::new(c, p)))
            .collect();
        let hubs = self
            .hubs
            .iter()
            .map(|h| h.rotation.iter().map(|&(c, t)| HubEnd { curve: CurveId(c), terminal: t }).collect())
            .collect();
        let mut family = CombinatorialFamily::assemble(curves, meetings, hubs)?;
        family.containment = self.containment.clone();
        family.outer = self.outer;
        Ok(family)
    }

    pub fn from_family(family: &CombinatorialFamily) -> CombinatorialFileV1 {
        CombinatorialFileV1 {
            version: 1,
            mode: Mode::Combinatorial,
            curves: family
                .curves
                .iter()
                .map(|c| CurveRecord {
                    id: c.id.index(),
                    source: c.source.index(),
                    target: c.target.index(),
                    events: c.events.iter().map(|e| e.meeting.index()).collect(),
                })
                .collect(),
            meetings: family
                .meetings
                .iter()
                .map(|m| MeetingRecord {
                    id: m.id.index(),
                    rotation: m.rotation.map(|e| (e.curve.index(), e.passage)),
                })
                .collect(),
            hubs: family
                .hubs
                .iter()
                .map(|h| HubRecord {
                    id: h.id.index(),
                    rotation: h.rotation.iter().map(|e| (e.curve.index(), e.terminal)).collect(),
                })
                .collect(),
            containment: family.containment.clone(),
            outer: family.outer,
        }
    }
}

impl GeometricFileV1 {
    fn check(&self) -> Result<(), FormatError> {
        if self.mode != Mode::Geometric {
            return Err(schema("mode must be geometric"));
        }
        dense("curve", self.curves.iter().map(|c| c.id))?;
        if let Some(t) = self.tolerance {
            if t.0.partial_cmp(&0.0) != Some(std::cmp::Ordering::Greater) {
                return Err(schema("tolerance must be positive"));
            }
        }
        Ok(())
    }

    pub fn polylines(&self) -> Vec<Polyline<f64>> {
        self.curves
            .iter()
            .map(|c| Polyline {
                id: CurveId(c.id),
                points: c.points.iter().map(|&(x, y)| Point::new(x.0, y.0)).collect(),
            })
            .collect()
    }

    pub fn from_polylines(curves: &[Polyline<f64>]) -> GeometricFileV1 {
        GeometricFileV1 {
            version: 1,
            mode: Mode::Geometric,
            curves: curves
                .iter()
                .map(|c| PolylineRecord {
                    id: c.id.index(),
                    points: c.points.iter().map(|p| (Coord(p.x), Coord(p.y))).collect(),
                })
                .collect(),
            tolerance: None,
            containment: Vec::new(),
            outer: None,
        }
    }
}

/// Reads every `<path d="...">` made of `M`/`L` commands (absolute or
/// relative) as one polyline, in document order.
pub fn parse_svg(text: &str) -> Result<GeometricFileV1, FormatError> {
    let mut curves = Vec::new();
    let mut rest = text;
    while let Some(at) = rest.find("<path") {
        rest = &rest[at + 5..];
        let end = rest.find('>').ok_or_else(|| FormatError::Svg("unterminated <path".into()))?;
        let tag = &rest[..end];
        let d = attribute(tag, "d").ok_or_else(|| FormatError::Svg("path without d".into()))?;
        let points = parse_path_data(d)?;
        curves.push(PolylineRecord {
            id: curves.len(),
            points: points.into_iter().map(|(x, y)| (Coord(x), Coord(y))).collect(),
        });
        rest = &rest[end..];
    }
    if curves.is_empty() {
        return Err(FormatError::Svg("no <path> elements".into()));
    }
    Ok(GeometricFileV1 {
        version: 1,
        mode: Mode::Geometric,
        curves,
        tolerance: None,
        containment: Vec::new(),
        outer: None,
    })
}

fn attribute<'a>(tag: &'a str, name: &str) -> Option<&'a str> {
    let mut search = tag;
    loop {
        let at = search.find(name)?;
        let before_ok = at == 0 || search.as_bytes()[at - 1].is_ascii_whitespace();
        let after = search[at + name.len()..].trim_start();
        if before_ok {
            if let Some(after) = after.strip_prefix('=') {
                let after = after.trim_start();
                let quote = after.chars().next()?;
                if quote == '"' || quote == '\'' {
                    let body = &after[1..];
                    return body.find(quote).map(|e| &body[..e]);
                }
            }
        }
        search = &search[at + name.len()..];
    }
}

fn parse_path_data(d: &str) -> Result<Vec<(f64, f64)>, FormatError> {
    let mut tokens = Vec::new();
    let mut num = String::new();
    let flush = |num: &mut String, tokens: &mut Vec<String>| {
        if !num.is_empty() {
            tokens.push(std::mem::take(num));
        }
    };
    for ch in d.chars() {
        match ch {
            'M' | 'm' | 'L' | 'l' => {
                flush(&mut num, &mut tokens);
                tokens.push(ch.to_string());
            }
            '-' if !num.is_empty() && !num.ends_with(['e', 'E']) => {
                flush(&mut num, &mut tokens);
                num.push(ch);
            }
            c if c.is_ascii_digit() || matches!(c, '.' | '-' | '+' | 'e' | 'E') => num.push(c),
            c if c.is_whitespace() || c == ',' => flush(&mut num, &mut tokens),
            other => return Err(FormatError::Svg(format!("unsupported path command {other:?}"))),
        }
    }
    flush(&mut num, &mut tokens);
    let mut points: Vec<(f64, f64)> = Vec::new();
    let mut relative = false;
    let mut i = 0;
    let mut started = false;
    while i < tokens.len() {
        match tokens[i].as_str() {
            "M" | "L" => {
                if tokens[i] == "M" && started {
                    return Err(FormatError::Svg("one subpath per curve".into()));
                }
                relative = false;
                started = true;
                i += 1;
            }
            "m" | "l" => {
                if tokens[i] == "m" && started {
                    return Err(FormatError::Svg("one subpath per curve".into()));
                }
                relative = true;
                started = true;
                i += 1;
            }
            _ => {
                if !started || i + 1 >= tokens.len() {
                    return Err(FormatError::Svg("dangling coordinate".into()));
                }
                let parse = |t: &str| {
                    t.parse::<f64>().map_err(|_| FormatError::Svg(format!("bad number {t:?}")))
                };
                let (mut x, mut y) = (parse(&tokens[i])?, parse(&tokens[i + 1])?);
                if relative {
                    if let Some(&(px, py)) = points.last() {
                        x += px;
                        y += py;
                    }
                }
                points.push((x, y));
                i += 2;
            }
        }
    }
    Ok(points)
}
