//! Level-wise enumeration of realizable families by routing one curve at a
//! time through the faces of the drawing built so far.
//!
//! A curve being routed ends at a temporary free hub `T` (always the last
//! hub). Each step either meets a dart of `T`'s face (crossing or touching
//! it) or stops, at `T` or at a corner of an existing hub in that face.
//! Every step is a planar operation, so every emitted family is realizable.
//! Families that differ only by a symmetry of the template are merged after
//! each level.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use touchgrid::arrangement::{trace_faces, Dart, PlaneGraph};
use touchgrid::{
    classify_meeting, CombinatorialFamily, CurveId, Direction, DirectedCurve, Hub, HubEnd, HubId,
    Meeting, MeetingEvent, MeetingId, MeetingKind, Side,
};

use crate::canonical::{canonicalize, Symmetry};

/// Endpoint labels of one curve position, with its role. Equal labels are
/// the same hub.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Slot {
    pub source: u32,
    pub target: u32,
    pub role: u32,
}

/// What the curve being added may do with an earlier curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MeetRule {
    pub required: bool,
    pub cross: bool,
    pub touch: bool,
}

impl MeetRule {
    pub const ANY: MeetRule = MeetRule { required: false, cross: true, touch: true };
    pub const ONCE: MeetRule = MeetRule { required: true, cross: true, touch: true };
    pub const CROSS: MeetRule = MeetRule { required: true, cross: true, touch: false };
    pub const TOUCH: MeetRule = MeetRule { required: true, cross: false, touch: true };
    pub const NEVER: MeetRule = MeetRule { required: false, cross: false, touch: false };
}

/// Shape of the families to build. Any two curves meet at most once.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Template {
    pub slots: Vec<Slot>,
    /// `rules[new_role][old_role]`.
    pub rules: Vec<Vec<MeetRule>>,
    pub max_meetings: usize,
    pub reflection: bool,
    pub reversal: bool,
}

impl Template {
    pub fn symmetry(&self) -> Symmetry {
        Symmetry {
            roles: self.slots.iter().map(|s| s.role).collect(),
            reflection: self.reflection,
            reversal: self.reversal,
        }
    }

    fn rule(&self, new: usize, old: usize) -> MeetRule {
        let (a, b) = (self.slots[new].role as usize, self.slots[old].role as usize);
        self.rules.get(a).and_then(|r| r.get(b)).copied().unwrap_or(MeetRule::NEVER)
    }

    /// Hub holding each label among the first `placed` curves.
    fn labels(&self, family: &CombinatorialFamily, placed: usize) -> BTreeMap<u32, HubId> {
        let mut out = BTreeMap::new();
        for (slot, c) in self.slots.iter().zip(&family.curves).take(placed) {
            out.insert(slot.source, c.source);
            out.insert(slot.target, c.target);
        }
        out
    }
}

/// A family in canonical form together with its canonical word.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct State {
    pub word: Vec<u32>,
    pub family: CombinatorialFamily,
}

/// Every way to add curve `family.len()` of the template, before
/// deduplication.
pub fn extend(template: &Template, family: &CombinatorialFamily) -> Vec<CombinatorialFamily> {
    let c = family.len();
    let Some(slot) = template.slots.get(c) else {
        return Vec::new();
    };
    let labels = template.labels(family, c);
    let mut out = Vec::new();
    let id = CurveId(c);

    if c == 0 {
        let mut f = family.clone();
        let s = HubId(0);
        if slot.source == slot.target {
            f.hubs.push(Hub { id: s, rotation: vec![HubEnd::start(0), HubEnd::end(0)] });
            f.curves.push(DirectedCurve { id, source: s, target: s, events: Vec::new() });
        } else {
            f.hubs.push(Hub { id: s, rotation: vec![HubEnd::start(0)] });
            f.hubs.push(Hub { id: HubId(1), rotation: vec![HubEnd::end(0)] });
            f.curves.push(DirectedCurve { id, source: s, target: HubId(1), events: Vec::new() });
        }
        out.push(f);
        return out;
    }

    let mut router = Router { template, labels: &labels, curve: c, out: &mut out };
    match labels.get(&slot.source) {
        Some(&h) => {
            for corner in 0..family.hubs[h.index()].rotation.len() {
                let mut f = family.clone();
                f.hubs[h.index()].rotation.insert(corner + 1, HubEnd::start(c));
                let t = HubId(f.hubs.len());
                f.hubs.push(Hub { id: t, rotation: vec![HubEnd::end(c)] });
                f.curves.push(DirectedCurve { id, source: h, target: t, events: Vec::new() });
                router.route(f, None);
            }
        }
        None => {
            let graph = PlaneGraph::from_family(family);
            let (faces, _) = trace_faces(&graph);
            for face in &faces {
                let mut f = family.clone();
                let s = HubId(f.hubs.len());
                let t = HubId(f.hubs.len() + 1);
                f.hubs.push(Hub { id: s, rotation: vec![HubEnd::start(c)] });
                f.hubs.push(Hub { id: t, rotation: vec![HubEnd::end(c)] });
                f.curves.push(DirectedCurve { id, source: s, target: t, events: Vec::new() });
                router.route(f, Some(face[0]));
            }
        }
    }
    out
}

struct Router<'a> {
    template: &'a Template,
    labels: &'a BTreeMap<u32, HubId>,
    curve: usize,
    out: &'a mut Vec<CombinatorialFamily>,
}

impl Router<'_> {
    /// `floating`: the new curve has not touched the rest yet and sits in
    /// the face of this dart of the old drawing.
    fn route(&mut self, family: CombinatorialFamily, floating: Option<Dart>) {
        let c = self.curve;
        let id = CurveId(c);
        let slot = self.template.slots[c];
        let graph = PlaneGraph::from_family(&family);
        let (faces, face_of) = trace_faces(&graph);
        let t_hub = HubId(family.hubs.len() - 1);
        let here = match floating {
            Some(d) => face_of[d],
            None => {
                let last = graph.section_index(id, family.curves[c].events.len());
                face_of[2 * last + 1]
            }
        };
        let cycle = &faces[here];
        let met: Vec<bool> = {
            let mut m = vec![false; c];
            for e in &family.curves[c].events {
                m[e.other.index()] = true;
            }
            m
        };

        // stop here
        let done = (0..c).all(|o| met[o] || !self.template.rule(c, o).required);
        if done {
            let own_source = family.curves[c].source;
            let target = if slot.target == slot.source {
                Some(own_source)
            } else {
                self.labels.get(&slot.target).copied()
            };
            match target {
                Some(h) => {
                    let node = graph.hub_node(h);
                    for &d in cycle {
                        if graph.origin(d) != node || h == t_hub {
                            continue;
                        }
                        let at = graph.rotation[node].iter().position(|&x| x == d).unwrap();
                        let mut f = family.clone();
                        f.hubs.pop();
                        f.curves[c].target = h;
                        f.hubs[h.index()].rotation.insert(at + 1, HubEnd::end(c));
                        self.out.push(f);
                    }
                }
                None if floating.is_none() => self.out.push(family.clone()),
                None => {}
            }
        }

        if family.meetings.len() >= self.template.max_meetings {
            return;
        }
        for &d in cycle {
            let sec = *graph.section_of(d);
            let o = sec.curve.index();
            if o == c || met[o] {
                continue;
            }
            let rule = self.template.rule(c, o);
            let approach = if d % 2 == 0 { Side::Left } else { Side::Right };
            let mut kinds = Vec::new();
            if rule.cross {
                kinds.push(MeetingKind::Crossing);
            }
            if rule.touch {
                for direction in [Direction::Same, Direction::Opposite] {
                    kinds.push(MeetingKind::Touch { side: approach, direction });
                }
            }
            for kind in kinds {
                let mut f = family.clone();
                let m = MeetingId(f.meetings.len());
                let rotation = touchgrid::model::rotation_for(id, sec.curve, approach, kind);
                f.meetings.push(Meeting { id: m, rotation });
                let kind_o = classify_meeting(&rotation, sec.curve).unwrap();
                let kind_c = classify_meeting(&rotation, id).unwrap();
                f.curves[o]
                    .events
                    .insert(sec.index, MeetingEvent { meeting: m, other: id, kind: kind_o });
                f.curves[c].events.push(MeetingEvent { meeting: m, other: sec.curve, kind: kind_c });
                self.route(f, None);
            }
        }
    }
}

/// Predicate applied to every completed level; `level` is the number of
/// curves placed.
pub type LevelFilter<'a> = dyn Fn(&CombinatorialFamily, usize) -> bool + Sync + 'a;

/// Expands `frontier` by one curve, filters and deduplicates. The result is
/// sorted by canonical word.
pub fn next_level(
    template: &Template,
    frontier: &[State],
    filter: &LevelFilter<'_>,
) -> BTreeMap<Vec<u32>, CombinatorialFamily> {
    let sym = template.symmetry();
    let found: Vec<(Vec<u32>, CombinatorialFamily)> = frontier
        .par_iter()
        .flat_map_iter(|s| {
            let level = s.family.len() + 1;
            extend(template, &s.family)
                .into_iter()
                .filter(|f| filter(f, level))
                .map(|f| canonicalize(&f, &sym))
                .collect::<Vec<_>>()
        })
        .collect();
    found.into_iter().collect()
}

/// All template families passing `filter` at every level, one per class,
/// in canonical order. Also returns the number of classes seen per level.
pub fn enumerate_template(template: &Template, filter: &LevelFilter<'_>) -> (Vec<State>, Vec<usize>) {
    let mut frontier = vec![State { word: vec![0, 0], family: CombinatorialFamily::default() }];
    let mut sizes = vec![1];
    for _ in 0..template.slots.len() {
        frontier = next_level(template, &frontier, filter)
            .into_iter()
            .map(|(word, family)| State { word, family })
            .collect();
        sizes.push(frontier.len());
    }
    (frontier, sizes)
}

/// Endpoint sharing of the enumerated curves.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointPattern {
    /// Every endpoint its own hub.
    Distinct,
    /// Every curve starts at one common hub (a contracted ground).
    Grounded,
    /// Every curve runs from one common hub to another.
    DoubleGrounded,
    /// Every curve is closed at one common hub.
    Closed,
    /// Explicit `(source, target)` labels per curve.
    Labels(Vec<(u32, u32)>),
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnumerationLimits {
    /// Families have exactly this many curves.
    pub max_curves: usize,
    pub max_meetings: usize,
    pub endpoint_pattern: EndpointPattern,
    pub require_intersecting: bool,
}

impl EnumerationLimits {
    pub fn new(curves: usize, pattern: EndpointPattern, intersecting: bool) -> Self {
        EnumerationLimits {
            max_curves: curves,
            max_meetings: curves * curves.saturating_sub(1) / 2,
            endpoint_pattern: pattern,
            require_intersecting: intersecting,
        }
    }

    pub fn template(&self) -> Template {
        let n = self.max_curves;
        let labels: Vec<(u32, u32)> = match &self.endpoint_pattern {
            EndpointPattern::Distinct => (0..n as u32).map(|i| (2 * i + 2, 2 * i + 3)).collect(),
            EndpointPattern::Grounded => (0..n as u32).map(|i| (0, i + 2)).collect(),
            EndpointPattern::DoubleGrounded => vec![(0, 1); n],
            EndpointPattern::Closed => vec![(0, 0); n],
            EndpointPattern::Labels(l) => l.clone(),
        };
        let reversal = matches!(
            self.endpoint_pattern,
            EndpointPattern::Distinct | EndpointPattern::Closed
        );
        let rule = if self.require_intersecting { MeetRule::ONCE } else { MeetRule::ANY };
        Template {
            slots: labels.iter().map(|&(s, t)| Slot { source: s, target: t, role: 0 }).collect(),
            rules: vec![vec![rule]],
            max_meetings: self.max_meetings,
            reflection: true,
            reversal,
        }
    }
}

/// Realizable families within `limits`, one per isomorphism class under
/// relabelling, reflection and (for symmetric patterns) global reversal,
/// in canonical order.
///
/// Without `require_intersecting` only families whose curves can be added
/// one by one, each meeting or sharing a hub with an earlier one, are
/// produced.
pub fn enumerate_families(limits: &EnumerationLimits) -> Vec<CombinatorialFamily> {
    let template = limits.template();
    let (states, _) = enumerate_template(&template, &|_, _| true);
    states.into_iter().map(|s| s.family).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use touchgrid::arrangement::is_realizable;

    #[test]
    fn two_free_curves_give_three_classes() {
        let fams = enumerate_families(&EnumerationLimits::new(2, EndpointPattern::Distinct, true));
        assert_eq!(fams.len(), 3);
        let touches = fams.iter().filter(|f| f.count_meetings().touchings == 1).count();
        assert_eq!(touches, 2);
    }

    #[test]
    fn empty_limits_give_the_empty_family() {
        let fams = enumerate_families(&EnumerationLimits::new(0, EndpointPattern::Distinct, true));
        assert_eq!(fams, vec![CombinatorialFamily::default()]);
    }

    #[test]
    fn outputs_are_realizable() {
        for f in enumerate_families(&EnumerationLimits::new(3, EndpointPattern::Distinct, true)) {
            assert!(is_realizable(&f));
            assert_eq!(f.meetings.len(), 3);
        }
    }
}
