//! Directed curves, meetings and rotation systems.
//!
//! A [`CombinatorialFamily`] stores every curve as the ordered list of
//! meetings it passes through, together with the counter-clockwise cyclic
//! order of curve-ends at every meeting and at every hub (shared endpoint).
//! The rotation at a meeting is the source of truth; the [`MeetingKind`]
//! cached on each [`MeetingEvent`] is derived from it and re-checked by
//! [`validate_family`].

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

macro_rules! id_type {
    ($(#[$doc:meta])* $name:ident, $prefix:literal) => {
        $(#[$doc])*
        #[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
        #[serde(transparent)]
        pub struct $name(pub usize);

        impl $name {
            #[inline]
            pub fn index(self) -> usize {
                self.0
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_type!(
    /// Dense curve index, `0..n`.
    CurveId,
    "c"
);
id_type!(
    /// A shared endpoint. Curves with private endpoints use singleton hubs.
    HubId,
    "H"
);
id_type!(
    /// Key shared by the two curves' views of one meeting point.
    MeetingId,
    "m"
);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn flip(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Same,
    Opposite,
}

/// How a curve `a` meets another curve `b`, seen from `a`.
///
/// For a touching, `side` is the side of `b` that `a` lies on and
/// `direction` says whether the two curves run the same way at the point.
/// `Touch { side: Left, direction: Same }` is `a ↑↑ b`: the right side of
/// `a` touches the left side of `b`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeetingKind {
    Crossing,
    Touch { side: Side, direction: Direction },
}

impl MeetingKind {
    pub fn is_touch(self) -> bool {
        matches!(self, MeetingKind::Touch { .. })
    }

    /// The same meeting seen from the other curve.
    pub fn swap_roles(self) -> MeetingKind {
        match self {
            MeetingKind::Crossing => MeetingKind::Crossing,
            MeetingKind::Touch { side, direction: Direction::Same } => MeetingKind::Touch {
                side: side.flip(),
                direction: Direction::Same,
            },
            MeetingKind::Touch { side, direction: Direction::Opposite } => MeetingKind::Touch {
                side,
                direction: Direction::Opposite,
            },
        }
    }

    /// The kind after mirroring the plane.
    pub fn reflect(self) -> MeetingKind {
        match self {
            MeetingKind::Crossing => MeetingKind::Crossing,
            MeetingKind::Touch { side, direction } => MeetingKind::Touch {
                side: side.flip(),
                direction,
            },
        }
    }
}

/// Whether a curve-end at a meeting is the incoming or the outgoing branch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Passage {
    In,
    Out,
}

impl Passage {
    pub fn flip(self) -> Passage {
        match self {
            Passage::In => Passage::Out,
            Passage::Out => Passage::In,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct MeetingEnd {
    pub curve: CurveId,
    pub passage: Passage,
}

impl MeetingEnd {
    pub fn new(curve: usize, passage: Passage) -> Self {
        MeetingEnd { curve: CurveId(curve), passage }
    }
    pub fn incoming(curve: usize) -> Self {
        Self::new(curve, Passage::In)
    }
    pub fn outgoing(curve: usize) -> Self {
        Self::new(curve, Passage::Out)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Terminal {
    Start,
    End,
}

impl Terminal {
    pub fn flip(self) -> Terminal {
        match self {
            Terminal::Start => Terminal::End,
            Terminal::End => Terminal::Start,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct HubEnd {
    pub curve: CurveId,
    pub terminal: Terminal,
}

impl HubEnd {
    pub fn start(curve: usize) -> Self {
        HubEnd { curve: CurveId(curve), terminal: Terminal::Start }
    }
    pub fn end(curve: usize) -> Self {
        HubEnd { curve: CurveId(curve), terminal: Terminal::End }
    }
}

/// A crossing or touching point with its counter-clockwise rotation.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Meeting {
    pub id: MeetingId,
    pub rotation: [MeetingEnd; 4],
}

impl Meeting {
    /// The curve meeting `curve` here, if `curve` takes part.
    pub fn other(&self, curve: CurveId) -> Option<CurveId> {
        if !self.rotation.iter().any(|e| e.curve == curve) {
            return None;
        }
        self.rotation.iter().map(|e| e.curve).find(|&c| c != curve)
    }

    pub fn curves(&self) -> (CurveId, CurveId) {
        let a = self.rotation[0].curve;
        let b = self
            .rotation
            .iter()
            .map(|e| e.curve)
            .find(|&c| c != a)
            .unwrap_or(a);
        (a.min(b), a.max(b))
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MeetingEvent {
    pub meeting: MeetingId,
    pub other: CurveId,
    /// Kind of the meeting seen from the owning curve.
    pub kind: MeetingKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DirectedCurve {
    pub id: CurveId,
    pub source: HubId,
    pub target: HubId,
    /// Meetings in traversal order from `source` to `target`.
    pub events: Vec<MeetingEvent>,
}

impl DirectedCurve {
    pub fn is_closed(&self) -> bool {
        self.source == self.target
    }

    pub fn position_of(&self, meeting: MeetingId) -> Option<usize> {
        self.events.iter().position(|e| e.meeting == meeting)
    }
}

/// Counter-clockwise cyclic order of curve-ends at a shared endpoint.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Hub {
    pub id: HubId,
    pub rotation: Vec<HubEnd>,
}

/// Names one face of the traced map: the face on `side` of section
/// `section` of `curve` (sections are numbered from the source, the
/// section before the first meeting being `0`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct FaceRef {
    pub curve: CurveId,
    pub section: usize,
    pub side: Side,
}

/// Places one connected component of the map inside a face of another.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Containment {
    /// Any curve of the placed component.
    pub component: CurveId,
    /// The face of the placed component that merges with `inside`.
    /// Defaults to the face at the component's lowest-numbered hub.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outer: Option<FaceRef>,
    pub inside: FaceRef,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CombinatorialFamily {
    pub curves: Vec<DirectedCurve>,
    pub meetings: Vec<Meeting>,
    pub hubs: Vec<Hub>,
    pub containment: Vec<Containment>,
    pub outer: Option<FaceRef>,
}

/// Input to [`CombinatorialFamily::assemble`]: a curve as its hubs and the
/// ordered meeting ids it passes through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CurveSpec {
    pub source: HubId,
    pub target: HubId,
    pub events: Vec<MeetingId>,
}

impl CurveSpec {
    pub fn new(source: usize, target: usize, events: &[usize]) -> Self {
        CurveSpec {
            source: HubId(source),
            target: HubId(target),
            events: events.iter().map(|&m| MeetingId(m)).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RotationError {
    #[error("a meeting rotation needs two ends of each of two curves, got {0:?}")]
    Degenerate([MeetingEnd; 4]),
    #[error("curve {0} does not take part in this meeting")]
    NotIncident(CurveId),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StructuralError {
    #[error("ids must be dense: {what} at position {position} has id {id}")]
    SparseId { what: &'static str, position: usize, id: usize },
    #[error("meeting {meeting}: {source}")]
    BadRotation { meeting: MeetingId, source: RotationError },
    #[error("meeting {meeting} is referenced {found} times, expected once on each of its two curves")]
    MeetingReferences { meeting: MeetingId, found: usize },
    #[error("curve {curve} lists meeting {meeting}, whose rotation does not involve it")]
    ForeignMeeting { curve: CurveId, meeting: MeetingId },
    #[error("curve {curve} lists unknown meeting {meeting}")]
    UnknownMeeting { curve: CurveId, meeting: MeetingId },
    #[error("curve {curve} records meeting {meeting} with curve {recorded}, rotation says {actual}")]
    WrongOther { curve: CurveId, meeting: MeetingId, recorded: CurveId, actual: CurveId },
    #[error("curve {curve} refers to unknown hub {hub}")]
    UnknownHub { curve: CurveId, hub: HubId },
    #[error("hub {hub} rotation does not match the curves ending there")]
    HubMismatch { hub: HubId },
}

/// Classifies a meeting from its counter-clockwise rotation, as seen from
/// `curve`. Crossing when the two curves' ends alternate; otherwise the
/// side of the other curve that `curve` lies on and the relative
/// direction.
pub fn classify_meeting(
    rotation: &[MeetingEnd; 4],
    curve: CurveId,
) -> Result<MeetingKind, RotationError> {
    let find = |c: CurveId, p: Passage| {
        let mut hits = rotation
            .iter()
            .enumerate()
            .filter(|(_, e)| e.curve == c && e.passage == p);
        match (hits.next(), hits.next()) {
            (Some((i, _)), None) => Some(i),
            _ => None,
        }
    };
    if !rotation.iter().any(|e| e.curve == curve) {
        return Err(RotationError::NotIncident(curve));
    }
    let other = rotation
        .iter()
        .map(|e| e.curve)
        .find(|&c| c != curve)
        .ok_or(RotationError::Degenerate(*rotation))?;
    if rotation.iter().any(|e| e.curve != curve && e.curve != other) {
        return Err(RotationError::Degenerate(*rotation));
    }
    let (Some(a_in), Some(a_out), Some(b_in), Some(b_out)) = (
        find(curve, Passage::In),
        find(curve, Passage::Out),
        find(other, Passage::In),
        find(other, Passage::Out),
    ) else {
        return Err(RotationError::Degenerate(*rotation));
    };
    // steps going counter-clockwise from `from` to `to`
    let ccw = |from: usize, to: usize| (to + 4 - from) % 4;
    let in_arc = |x: usize, from: usize, to: usize| ccw(from, x) < ccw(from, to);
    let a_in_left = in_arc(a_in, b_out, b_in);
    let a_out_left = in_arc(a_out, b_out, b_in);
    if a_in_left != a_out_left {
        return Ok(MeetingKind::Crossing);
    }
    let kind = if a_in_left {
        // left of b runs counter-clockwise from b_out to b_in
        let direction = if ccw(b_out, a_out) < ccw(b_out, a_in) {
            Direction::Same
        } else {
            Direction::Opposite
        };
        MeetingKind::Touch { side: Side::Left, direction }
    } else {
        let direction = if ccw(b_in, a_in) < ccw(b_in, a_out) {
            Direction::Same
        } else {
            Direction::Opposite
        };
        MeetingKind::Touch { side: Side::Right, direction }
    };
    Ok(kind)
}

/// Rotation at a new meeting where `new` reaches `existing` from `side` of
/// `existing` and either crosses it or touches it with `kind`'s direction.
pub fn rotation_for(
    new: CurveId,
    existing: CurveId,
    approach: Side,
    kind: MeetingKind,
) -> [MeetingEnd; 4] {
    let a_in = MeetingEnd { curve: new, passage: Passage::In };
    let a_out = MeetingEnd { curve: new, passage: Passage::Out };
    let b_in = MeetingEnd { curve: existing, passage: Passage::In };
    let b_out = MeetingEnd { curve: existing, passage: Passage::Out };
    match (approach, kind) {
        (Side::Left, MeetingKind::Crossing) => [b_out, a_in, b_in, a_out],
        (Side::Right, MeetingKind::Crossing) => [b_in, a_in, b_out, a_out],
        (Side::Left, MeetingKind::Touch { direction: Direction::Same, .. }) => {
            [b_out, a_out, a_in, b_in]
        }
        (Side::Left, MeetingKind::Touch { direction: Direction::Opposite, .. }) => {
            [b_out, a_in, a_out, b_in]
        }
        (Side::Right, MeetingKind::Touch { direction: Direction::Same, .. }) => {
            [b_in, a_in, a_out, b_out]
        }
        (Side::Right, MeetingKind::Touch { direction: Direction::Opposite, .. }) => {
            [b_in, a_out, a_in, b_out]
        }
    }
}

fn unordered(a: CurveId, b: CurveId) -> (CurveId, CurveId) {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

impl CombinatorialFamily {
    /// Builds a family from curve event lists and rotations, deriving each
    /// event's partner curve and kind.
    pub fn assemble(
        curves: Vec<CurveSpec>,
        meetings: Vec<[MeetingEnd; 4]>,
        hubs: Vec<Vec<HubEnd>>,
    ) -> Result<Self, StructuralError> {
        let meetings: Vec<Meeting> = meetings
            .into_iter()
            .enumerate()
            .map(|(i, rotation)| Meeting { id: MeetingId(i), rotation })
            .collect();
        let mut out = Vec::with_capacity(curves.len());
        for (i, spec) in curves.into_iter().enumerate() {
            let id = CurveId(i);
            let mut events = Vec::with_capacity(spec.events.len());
            for m in spec.events {
                let meeting = meetings
                    .get(m.index())
                    .ok_or(StructuralError::UnknownMeeting { curve: id, meeting: m })?;
                let other = meeting
                    .other(id)
                    .ok_or(StructuralError::ForeignMeeting { curve: id, meeting: m })?;
                let kind = classify_meeting(&meeting.rotation, id)
                    .map_err(|source| StructuralError::BadRotation { meeting: m, source })?;
                events.push(MeetingEvent { meeting: m, other, kind });
            }
            out.push(DirectedCurve { id, source: spec.source, target: spec.target, events });
        }
        let hubs = hubs
            .into_iter()
            .enumerate()
            .map(|(i, rotation)| Hub { id: HubId(i), rotation })
            .collect();
        let family = CombinatorialFamily {
            curves: out,
            meetings,
            hubs,
            containment: Vec::new(),
            outer: None,
        };
        family.check_structure()?;
        Ok(family)
    }

    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn curve(&self, id: CurveId) -> &DirectedCurve {
        &self.curves[id.index()]
    }

    pub fn meeting(&self, id: MeetingId) -> &Meeting {
        &self.meetings[id.index()]
    }

    pub fn hub(&self, id: HubId) -> &Hub {
        &self.hubs[id.index()]
    }

    pub fn curve_ids(&self) -> impl Iterator<Item = CurveId> + '_ {
        (0..self.curves.len()).map(CurveId)
    }

    /// Cross-reference checks: dense ids, well-formed rotations, every
    /// meeting listed exactly once by each of its two curves, hub rotations
    /// matching curve endpoints.
    pub fn check_structure(&self) -> Result<(), StructuralError> {
        for (i, c) in self.curves.iter().enumerate() {
            if c.id.index() != i {
                return Err(StructuralError::SparseId { what: "curve", position: i, id: c.id.index() });
            }
        }
        for (i, m) in self.meetings.iter().enumerate() {
            if m.id.index() != i {
                return Err(StructuralError::SparseId { what: "meeting", position: i, id: m.id.index() });
            }
            let a = m.rotation[0].curve;
            classify_meeting(&m.rotation, a)
                .map_err(|source| StructuralError::BadRotation { meeting: m.id, source })?;
            if m.curves().0 == m.curves().1 {
                return Err(StructuralError::BadRotation {
                    meeting: m.id,
                    source: RotationError::Degenerate(m.rotation),
                });
            }
        }
        for (i, h) in self.hubs.iter().enumerate() {
            if h.id.index() != i {
                return Err(StructuralError::SparseId { what: "hub", position: i, id: h.id.index() });
            }
            if h.rotation.is_empty() {
                return Err(StructuralError::HubMismatch { hub: h.id });
            }
        }
        let mut refs = vec![0usize; self.meetings.len()];
        for c in &self.curves {
            for e in &c.events {
                let meeting = self
                    .meetings
                    .get(e.meeting.index())
                    .ok_or(StructuralError::UnknownMeeting { curve: c.id, meeting: e.meeting })?;
                let other = meeting
                    .other(c.id)
                    .ok_or(StructuralError::ForeignMeeting { curve: c.id, meeting: e.meeting })?;
                if other != e.other {
                    return Err(StructuralError::WrongOther {
                        curve: c.id,
                        meeting: e.meeting,
                        recorded: e.other,
                        actual: other,
                    });
                }
                refs[e.meeting.index()] += 1;
            }
            for hub in [c.source, c.target] {
                if hub.index() >= self.hubs.len() {
                    return Err(StructuralError::UnknownHub { curve: c.id, hub });
                }
            }
        }
        for (i, &n) in refs.iter().enumerate() {
            if n != 2 {
                return Err(StructuralError::MeetingReferences { meeting: MeetingId(i), found: n });
            }
        }
        // each curve must list a given meeting once: with two references in
        // total, a curve listing it twice would leave the partner with none
        for c in &self.curves {
            let mut seen = std::collections::HashSet::new();
            for e in &c.events {
                if !seen.insert(e.meeting) {
                    return Err(StructuralError::MeetingReferences { meeting: e.meeting, found: 2 });
                }
            }
        }
        let mut expected: Vec<Vec<HubEnd>> = vec![Vec::new(); self.hubs.len()];
        for c in &self.curves {
            expected[c.source.index()].push(HubEnd { curve: c.id, terminal: Terminal::Start });
            expected[c.target.index()].push(HubEnd { curve: c.id, terminal: Terminal::End });
        }
        for (hub, mut want) in self.hubs.iter().zip(expected) {
            let mut have = hub.rotation.clone();
            have.sort();
            want.sort();
            if have != want {
                return Err(StructuralError::HubMismatch { hub: hub.id });
            }
        }
        Ok(())
    }

    /// Meetings grouped by unordered curve pair.
    pub fn pair_meetings(&self) -> BTreeMap<(CurveId, CurveId), Vec<MeetingId>> {
        let mut out: BTreeMap<_, Vec<_>> = BTreeMap::new();
        for m in &self.meetings {
            out.entry(m.curves()).or_default().push(m.id);
        }
        out
    }

    /// The kind of the first meeting between `a` and `b`, seen from `a`.
    pub fn kind_between(&self, a: CurveId, b: CurveId) -> Option<MeetingKind> {
        self.curve(a).events.iter().find(|e| e.other == b).map(|e| e.kind)
    }

    /// Meeting between `a` and `b`, when they meet exactly once.
    pub fn unique_meeting(&self, a: CurveId, b: CurveId) -> Option<MeetingId> {
        let mut it = self.curve(a).events.iter().filter(|e| e.other == b);
        match (it.next(), it.next()) {
            (Some(e), None) => Some(e.meeting),
            _ => None,
        }
    }

    /// Number of meetings between `a` and `b`.
    pub fn meeting_count(&self, a: CurveId, b: CurveId) -> usize {
        self.curve(a).events.iter().filter(|e| e.other == b).count()
    }

    /// The family with `curve` traversed backwards.
    pub fn reverse_curve(&self, curve: CurveId) -> CombinatorialFamily {
        let mut out = self.clone();
        {
            let c = &mut out.curves[curve.index()];
            std::mem::swap(&mut c.source, &mut c.target);
            c.events.reverse();
        }
        for m in &mut out.meetings {
            for e in &mut m.rotation {
                if e.curve == curve {
                    e.passage = e.passage.flip();
                }
            }
        }
        for h in &mut out.hubs {
            for e in &mut h.rotation {
                if e.curve == curve {
                    e.terminal = e.terminal.flip();
                }
            }
        }
        for ct in &mut out.containment {
            for r in std::iter::once(&mut ct.inside).chain(ct.outer.iter_mut()) {
                reverse_face_ref(r, curve, &self.curves[curve.index()]);
            }
        }
        if let Some(r) = &mut out.outer {
            reverse_face_ref(r, curve, &self.curves[curve.index()]);
        }
        out.refresh_kinds();
        out
    }

    /// Every curve reversed.
    pub fn reverse_all(&self) -> CombinatorialFamily {
        let mut out = self.clone();
        for id in self.curve_ids() {
            out = out.reverse_curve(id);
        }
        out
    }

    /// Mirror image: every rotation reversed.
    pub fn reflect(&self) -> CombinatorialFamily {
        let mut out = self.clone();
        for m in &mut out.meetings {
            m.rotation.reverse();
        }
        for h in &mut out.hubs {
            h.rotation.reverse();
        }
        for ct in &mut out.containment {
            ct.inside.side = ct.inside.side.flip();
            if let Some(o) = &mut ct.outer {
                o.side = o.side.flip();
            }
        }
        if let Some(o) = &mut out.outer {
            o.side = o.side.flip();
        }
        out.refresh_kinds();
        out
    }

    /// Recomputes the cached kind and partner of every event from the
    /// rotations. Panics on malformed rotations.
    pub fn refresh_kinds(&mut self) {
        let meetings = &self.meetings;
        for c in &mut self.curves {
            for e in &mut c.events {
                let m = &meetings[e.meeting.index()];
                e.other = m.other(c.id).expect("event on foreign meeting");
                e.kind = classify_meeting(&m.rotation, c.id).expect("malformed rotation");
            }
        }
    }

    /// The subfamily on `keep` (in the given order), renumbered densely.
    /// Meetings with dropped curves disappear; hubs left without curves are
    /// removed. Returns the family and, for each new curve id, the old one.
    pub fn subfamily(&self, keep: &[CurveId]) -> (CombinatorialFamily, Vec<CurveId>) {
        let mut new_id = vec![None; self.curves.len()];
        for (i, &c) in keep.iter().enumerate() {
            new_id[c.index()] = Some(CurveId(i));
        }
        let mut meeting_map = vec![None; self.meetings.len()];
        let mut meetings = Vec::new();
        for m in &self.meetings {
            let (a, b) = m.curves();
            if let (Some(_), Some(_)) = (new_id[a.index()], new_id[b.index()]) {
                let id = MeetingId(meetings.len());
                meeting_map[m.id.index()] = Some(id);
                let mut rotation = m.rotation;
                for e in &mut rotation {
                    e.curve = new_id[e.curve.index()].unwrap();
                }
                meetings.push(Meeting { id, rotation });
            }
        }
        let mut hub_map = vec![None; self.hubs.len()];
        let mut hubs = Vec::new();
        for h in &self.hubs {
            let rotation: Vec<HubEnd> = h
                .rotation
                .iter()
                .filter_map(|e| {
                    new_id[e.curve.index()].map(|c| HubEnd { curve: c, terminal: e.terminal })
                })
                .collect();
            if !rotation.is_empty() {
                let id = HubId(hubs.len());
                hub_map[h.id.index()] = Some(id);
                hubs.push(Hub { id, rotation });
            }
        }
        let curves = keep
            .iter()
            .enumerate()
            .map(|(i, &old)| {
                let c = self.curve(old);
                DirectedCurve {
                    id: CurveId(i),
                    source: hub_map[c.source.index()].unwrap(),
                    target: hub_map[c.target.index()].unwrap(),
                    events: c
                        .events
                        .iter()
                        .filter_map(|e| {
                            let meeting = meeting_map[e.meeting.index()]?;
                            Some(MeetingEvent {
                                meeting,
                                other: new_id[e.other.index()]?,
                                kind: e.kind,
                            })
                        })
                        .collect(),
                }
            })
            .collect();
        (
            CombinatorialFamily {
                curves,
                meetings,
                hubs,
                containment: Vec::new(),
                outer: None,
            },
            keep.to_vec(),
        )
    }

    /// The family with curves renumbered: new curve `i` is old `order[i]`.
    pub fn relabel(&self, order: &[CurveId]) -> CombinatorialFamily {
        assert_eq!(order.len(), self.curves.len());
        self.subfamily(order).0
    }

    /// Touchings and crossings, each meeting counted once. Hub
    /// coincidences are not meetings and never counted.
    pub fn count_meetings(&self) -> MeetingCounts {
        let mut counts = MeetingCounts::default();
        for m in &self.meetings {
            let a = m.rotation[0].curve;
            match classify_meeting(&m.rotation, a) {
                Ok(MeetingKind::Crossing) => counts.crossings += 1,
                Ok(MeetingKind::Touch { .. }) => counts.touchings += 1,
                Err(_) => {}
            }
        }
        counts
    }
}

fn reverse_face_ref(r: &mut FaceRef, curve: CurveId, old: &DirectedCurve) {
    if r.curve == curve {
        r.section = old.events.len() - r.section;
        r.side = r.side.flip();
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetingCounts {
    pub touchings: usize,
    pub crossings: usize,
}

/// Counts touchings and crossings of a family.
pub fn count_meetings(family: &CombinatorialFamily) -> MeetingCounts {
    family.count_meetings()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum Violation {
    /// The pair meets more than once outside hubs.
    MultipleMeetings { pair: (CurveId, CurveId), count: usize },
    /// The pair never meets outside hubs.
    NoMeeting { pair: (CurveId, CurveId) },
    /// The kind cached on an event disagrees with the meeting's rotation.
    KindMismatch { pair: (CurveId, CurveId), meeting: MeetingId },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub is_pseudo_segment: bool,
    pub is_intersecting: bool,
    pub violations: Vec<Violation>,
}

/// Checks the at-most-once (pseudo-segment) and exactly-once
/// (intersecting) properties and rotation/kind consistency.
pub fn validate_family(family: &CombinatorialFamily) -> Result<ValidationReport, StructuralError> {
    family.check_structure()?;
    let mut violations = Vec::new();
    let mut mismatch = false;
    for c in &family.curves {
        for e in &c.events {
            let m = family.meeting(e.meeting);
            let actual = classify_meeting(&m.rotation, c.id)
                .map_err(|source| StructuralError::BadRotation { meeting: m.id, source })?;
            if actual != e.kind {
                mismatch = true;
                violations.push(Violation::KindMismatch {
                    pair: unordered(c.id, e.other),
                    meeting: e.meeting,
                });
            }
        }
    }
    let pairs = family.pair_meetings();
    let mut multiple = false;
    let mut missing = false;
    let n = family.curves.len();
    for a in 0..n {
        for b in a + 1..n {
            let pair = (CurveId(a), CurveId(b));
            let count = pairs.get(&pair).map_or(0, Vec::len);
            if count > 1 {
                multiple = true;
                violations.push(Violation::MultipleMeetings { pair, count });
            } else if count == 0 {
                missing = true;
                violations.push(Violation::NoMeeting { pair });
            }
        }
    }
    let is_pseudo_segment = !multiple && !mismatch;
    Ok(ValidationReport {
        is_pseudo_segment,
        is_intersecting: is_pseudo_segment && !missing,
        violations,
    })
}
