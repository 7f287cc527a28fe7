//! Plane graph traced from a rotation system.
//!
//! Vertices are meetings and hubs (every endpoint is a hub; a curve with a
//! private endpoint uses a singleton hub). A curve with `m` meetings has
//! `m + 1` sections; section `i` runs from its `(i-1)`-th event to its
//! `i`-th, with the source and target hubs standing in at the two ends.
//! Each section has a forward dart (face on its left) and a backward dart.
//!
//! End sections (those touching a hub) are kept while tracing, so the
//! traced map is connected through its endpoints. The faces of the reduced
//! drawing are recovered by merging the two faces on either side of every
//! end section.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    CombinatorialFamily, Containment, CurveId, FaceRef, Hub, HubEnd, HubId, MeetingId, Passage,
    Side, StructuralError, Terminal,
};

/// Index of a half-edge: `2 * section` is forward, `2 * section + 1` backward.
pub type Dart = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Node {
    Meeting(MeetingId),
    Hub(HubId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Section {
    pub curve: CurveId,
    pub index: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Clone, Debug)]
pub struct PlaneGraph {
    pub nodes: Vec<Node>,
    pub sections: Vec<Section>,
    /// Global index of section 0 of every curve.
    pub curve_offset: Vec<usize>,
    /// Outgoing darts around every node, counter-clockwise.
    pub rotation: Vec<Vec<Dart>>,
    slot: Vec<usize>,
    meeting_count: usize,
}

impl PlaneGraph {
    pub fn from_family(family: &CombinatorialFamily) -> PlaneGraph {
        let meeting_count = family.meetings.len();
        let mut nodes: Vec<Node> = family.meetings.iter().map(|m| Node::Meeting(m.id)).collect();
        nodes.extend(family.hubs.iter().map(|h| Node::Hub(h.id)));
        let hub_node = |h: HubId| meeting_count + h.index();

        let mut sections = Vec::new();
        let mut curve_offset = Vec::with_capacity(family.curves.len());
        let mut position: BTreeMap<(MeetingId, CurveId), usize> = BTreeMap::new();
        for c in &family.curves {
            curve_offset.push(sections.len());
            let m = c.events.len();
            for i in 0..=m {
                let from = if i == 0 { hub_node(c.source) } else { c.events[i - 1].meeting.index() };
                let to = if i == m { hub_node(c.target) } else { c.events[i].meeting.index() };
                sections.push(Section { curve: c.id, index: i, from, to });
            }
            for (i, e) in c.events.iter().enumerate() {
                position.insert((e.meeting, c.id), i);
            }
        }

        let mut rotation = vec![Vec::new(); nodes.len()];
        for m in &family.meetings {
            rotation[m.id.index()] = m
                .rotation
                .iter()
                .map(|end| {
                    let i = position[&(m.id, end.curve)];
                    let base = curve_offset[end.curve.index()];
                    match end.passage {
                        Passage::In => 2 * (base + i) + 1,
                        Passage::Out => 2 * (base + i + 1),
                    }
                })
                .collect();
        }
        for h in &family.hubs {
            rotation[hub_node(h.id)] = h
                .rotation
                .iter()
                .map(|end| {
                    let base = curve_offset[end.curve.index()];
                    match end.terminal {
                        Terminal::Start => 2 * base,
                        Terminal::End => {
                            2 * (base + family.curves[end.curve.index()].events.len()) + 1
                        }
                    }
                })
                .collect();
        }
        let mut slot = vec![0; sections.len() * 2];
        for darts in &rotation {
            for (i, &d) in darts.iter().enumerate() {
                slot[d] = i;
            }
        }
        PlaneGraph { nodes, sections, curve_offset, rotation, slot, meeting_count }
    }

    pub fn dart_count(&self) -> usize {
        self.sections.len() * 2
    }

    pub fn meeting_node(&self, m: MeetingId) -> usize {
        m.index()
    }

    pub fn hub_node(&self, h: HubId) -> usize {
        self.meeting_count + h.index()
    }

    pub fn section_of(&self, d: Dart) -> &Section {
        &self.sections[d / 2]
    }

    pub fn origin(&self, d: Dart) -> usize {
        let s = &self.sections[d / 2];
        if d % 2 == 0 {
            s.from
        } else {
            s.to
        }
    }

    pub fn dest(&self, d: Dart) -> usize {
        self.origin(d ^ 1)
    }

    pub fn twin(d: Dart) -> Dart {
        d ^ 1
    }

    pub fn ccw_next(&self, d: Dart) -> Dart {
        let r = &self.rotation[self.origin(d)];
        r[(self.slot[d] + 1) % r.len()]
    }

    pub fn ccw_prev(&self, d: Dart) -> Dart {
        let r = &self.rotation[self.origin(d)];
        r[(self.slot[d] + r.len() - 1) % r.len()]
    }

    /// Successor along the face on the left of `d`.
    pub fn face_next(&self, d: Dart) -> Dart {
        self.ccw_prev(d ^ 1)
    }

    pub fn section_index(&self, curve: CurveId, section: usize) -> usize {
        self.curve_offset[curve.index()] + section
    }

    /// Number of sections of `curve`.
    pub fn section_count(&self, curve: CurveId) -> usize {
        let start = self.curve_offset[curve.index()];
        let end = self.curve_offset.get(curve.index() + 1).copied().unwrap_or(self.sections.len());
        end - start
    }

    pub fn is_end_section(&self, s: usize) -> bool {
        let sec = &self.sections[s];
        sec.index == 0 || sec.index + 1 == self.section_count(sec.curve)
    }

    /// The dart whose left face is the face named by `r`.
    pub fn face_ref_dart(&self, r: &FaceRef) -> Option<Dart> {
        if r.curve.index() >= self.curve_offset.len() || r.section >= self.section_count(r.curve) {
            return None;
        }
        let s = self.section_index(r.curve, r.section);
        Some(match r.side {
            Side::Left => 2 * s,
            Side::Right => 2 * s + 1,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub curves: Vec<CurveId>,
}

impl ComponentSummary {
    pub fn euler(&self) -> i64 {
        self.vertices as i64 - self.edges as i64 + self.faces as i64
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ArrangementError {
    #[error(transparent)]
    Structural(#[from] StructuralError),
    #[error("component of curve {curve} is not realizable on the sphere: V={vertices} E={edges} F={faces}")]
    NotRealizable { curve: CurveId, vertices: usize, edges: usize, faces: usize },
    #[error("containment entry for curve {curve}: {reason}")]
    BadContainment { curve: CurveId, reason: String },
}

/// A traced family. Face `f` is the cycle `faces[f]`; regions are the faces
/// of the reduced drawing (end sections removed, nested components merged
/// into their surrounding face).
#[derive(Clone, Debug)]
pub struct Arrangement {
    pub graph: PlaneGraph,
    pub faces: Vec<Vec<Dart>>,
    pub face_of: Vec<usize>,
    pub components: Vec<ComponentSummary>,
    pub component_of_node: Vec<usize>,
    pub region_of_face: Vec<usize>,
    pub region_count: usize,
    /// Region of every hub.
    pub hub_region: Vec<usize>,
    /// Containment after filling in defaults, one entry per non-root
    /// component.
    pub containment: Vec<Containment>,
    pub outer_face: usize,
    pub t_c: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ArrangementSummary {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub components: usize,
    pub regions: usize,
    pub t_c: usize,
}

impl Arrangement {
    pub fn summary(&self) -> ArrangementSummary {
        ArrangementSummary {
            vertices: self.graph.nodes.len(),
            edges: self.graph.sections.len(),
            faces: self.faces.len(),
            components: self.components.len(),
            regions: self.region_count,
            t_c: self.t_c,
        }
    }

    pub fn region_of_dart(&self, d: Dart) -> usize {
        self.region_of_face[self.face_of[d]]
    }

    pub fn face_ref(&self, r: &FaceRef) -> Option<usize> {
        self.graph.face_ref_dart(r).map(|d| self.face_of[d])
    }

    /// A [`FaceRef`] naming face `f`.
    pub fn name_face(&self, f: usize) -> FaceRef {
        let d = self.faces[f][0];
        let s = self.graph.section_of(d);
        FaceRef {
            curve: s.curve,
            section: s.index,
            side: if d % 2 == 0 { Side::Left } else { Side::Right },
        }
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }
    fn find(&mut self, x: usize) -> usize {
        let mut r = x;
        while self.0[r] != r {
            r = self.0[r];
        }
        let mut y = x;
        while self.0[y] != r {
            let next = self.0[y];
            self.0[y] = r;
            y = next;
        }
        r
    }
    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        if a != b {
            self.0[a.max(b)] = a.min(b);
        }
    }
    /// Dense labels in order of first appearance.
    fn labels(&mut self) -> (Vec<usize>, usize) {
        let mut map = BTreeMap::new();
        let mut out = Vec::with_capacity(self.0.len());
        for x in 0..self.0.len() {
            let r = self.find(x);
            let next = map.len();
            out.push(*map.entry(r).or_insert(next));
        }
        (out, map.len())
    }
}

/// Traces faces of `graph`. Returns face cycles and the face of each dart.
pub fn trace_faces(graph: &PlaneGraph) -> (Vec<Vec<Dart>>, Vec<usize>) {
    let n = graph.dart_count();
    let mut face_of = vec![usize::MAX; n];
    let mut faces = Vec::new();
    for start in 0..n {
        if face_of[start] != usize::MAX {
            continue;
        }
        let f = faces.len();
        let mut cycle = Vec::new();
        let mut d = start;
        loop {
            face_of[d] = f;
            cycle.push(d);
            d = graph.face_next(d);
            if d == start {
                break;
            }
        }
        faces.push(cycle);
    }
    (faces, face_of)
}

/// Connected components of the traced graph and, per component, its
/// vertex, edge and face counts. Faces never straddle components.
fn components(
    graph: &PlaneGraph,
    faces: &[Vec<Dart>],
) -> (Vec<ComponentSummary>, Vec<usize>) {
    let mut uf = UnionFind::new(graph.nodes.len());
    for s in &graph.sections {
        uf.union(s.from, s.to);
    }
    // label components by their smallest curve so ids are stable
    let mut by_root: BTreeMap<usize, usize> = BTreeMap::new();
    let mut summaries: Vec<ComponentSummary> = Vec::new();
    for s in &graph.sections {
        if s.index != 0 {
            continue;
        }
        let r = uf.find(s.from);
        let next = summaries.len();
        let id = *by_root.entry(r).or_insert(next);
        if id == next {
            summaries.push(ComponentSummary { vertices: 0, edges: 0, faces: 0, curves: Vec::new() });
        }
        summaries[id].curves.push(s.curve);
    }
    let mut of_node = vec![0; graph.nodes.len()];
    for v in 0..graph.nodes.len() {
        let r = uf.find(v);
        let id = by_root[&r];
        of_node[v] = id;
        summaries[id].vertices += 1;
    }
    for s in &graph.sections {
        summaries[of_node[s.from]].edges += 1;
    }
    for f in faces {
        summaries[of_node[graph.origin(f[0])]].faces += 1;
    }
    (summaries, of_node)
}

/// Builds the traced arrangement, checks sphere realizability of every
/// connected component and resolves containment.
pub fn build_arrangement(family: &CombinatorialFamily) -> Result<Arrangement, ArrangementError> {
    family.check_structure()?;
    let graph = PlaneGraph::from_family(family);
    let (faces, face_of) = trace_faces(&graph);
    let (components, component_of_node) = components(&graph, &faces);
    for c in &components {
        if c.euler() != 2 {
            return Err(ArrangementError::NotRealizable {
                curve: c.curves[0],
                vertices: c.vertices,
                edges: c.edges,
                faces: c.faces,
            });
        }
    }

    let component_of_curve = |c: CurveId| -> usize {
        let s = graph.section_index(c, 0);
        component_of_node[graph.sections[s].from]
    };
    // face at the first corner of a component's lowest-numbered hub
    let default_face = |comp: usize| -> FaceRef {
        let hub = family
            .hubs
            .iter()
            .find(|h| component_of_node[graph.hub_node(h.id)] == comp)
            .expect("every component has a hub");
        let d = graph.rotation[graph.hub_node(hub.id)][0];
        let s = graph.section_of(d);
        FaceRef {
            curve: s.curve,
            section: s.index,
            side: if d % 2 == 0 { Side::Left } else { Side::Right },
        }
    };

    let mut entry_of: Vec<Option<Containment>> = vec![None; components.len()];
    for ct in &family.containment {
        let bad = |reason: &str| ArrangementError::BadContainment {
            curve: ct.component,
            reason: reason.to_string(),
        };
        if ct.component.index() >= family.curves.len() {
            return Err(bad("unknown curve"));
        }
        let comp = component_of_curve(ct.component);
        if entry_of[comp].is_some() {
            return Err(bad("component placed twice"));
        }
        let inside = graph.face_ref_dart(&ct.inside).ok_or_else(|| bad("inside face does not exist"))?;
        if component_of_node[graph.origin(inside)] == comp {
            return Err(bad("component placed inside itself"));
        }
        let outer = match ct.outer {
            Some(r) => {
                let d = graph.face_ref_dart(&r).ok_or_else(|| bad("outer face does not exist"))?;
                if component_of_node[graph.origin(d)] != comp {
                    return Err(bad("outer face belongs to another component"));
                }
                r
            }
            None => default_face(comp),
        };
        entry_of[comp] = Some(Containment { component: ct.component, outer: Some(outer), inside: ct.inside });
    }
    // components without an entry beyond the first hang off component 0
    let root = (0..components.len()).find(|&c| entry_of[c].is_none());
    let Some(root) = root else {
        return Err(ArrangementError::BadContainment {
            curve: CurveId(0),
            reason: "containment is cyclic".into(),
        });
    };
    for comp in 0..components.len() {
        if comp != root && entry_of[comp].is_none() {
            entry_of[comp] = Some(Containment {
                component: components[comp].curves[0],
                outer: Some(default_face(comp)),
                inside: default_face(root),
            });
        }
    }
    let parent = |comp: usize| -> Option<usize> {
        entry_of[comp].as_ref().map(|e| {
            let d = graph.face_ref_dart(&e.inside).unwrap();
            component_of_node[graph.origin(d)]
        })
    };
    for comp in 0..components.len() {
        let mut at = comp;
        for _ in 0..=components.len() {
            match parent(at) {
                Some(p) => at = p,
                None => break,
            }
        }
        if parent(at).is_some() {
            return Err(ArrangementError::BadContainment {
                curve: components[comp].curves[0],
                reason: "containment is cyclic".into(),
            });
        }
    }

    let mut uf = UnionFind::new(faces.len());
    for (s, _) in graph.sections.iter().enumerate() {
        if graph.is_end_section(s) {
            uf.union(face_of[2 * s], face_of[2 * s + 1]);
        }
    }
    let containment: Vec<Containment> = entry_of.iter().flatten().cloned().collect();
    for e in &containment {
        let a = face_of[graph.face_ref_dart(&e.inside).unwrap()];
        let b = face_of[graph.face_ref_dart(e.outer.as_ref().unwrap()).unwrap()];
        uf.union(a, b);
    }
    let (region_of_face, region_count) = uf.labels();
    let hub_region: Vec<usize> = family
        .hubs
        .iter()
        .map(|h| region_of_face[face_of[graph.rotation[graph.hub_node(h.id)][0]]])
        .collect();
    let t_c = hub_region.iter().collect::<BTreeSet<_>>().len();

    let outer_face = match family.outer.as_ref().and_then(|r| graph.face_ref_dart(r)) {
        Some(d) => face_of[d],
        None => {
            let hub = family
                .hubs
                .iter()
                .find(|h| h.rotation.len() == 1)
                .or(family.hubs.first());
            hub.map_or(0, |h| face_of[graph.rotation[graph.hub_node(h.id)][0]])
        }
    };

    Ok(Arrangement {
        graph,
        faces,
        face_of,
        components,
        component_of_node,
        region_of_face,
        region_count,
        hub_region,
        containment,
        outer_face,
        t_c,
    })
}

/// Number of regions of the reduced drawing holding at least one endpoint.
pub fn compute_tc(arr: &Arrangement) -> usize {
    arr.t_c
}

/// Sphere realizability without building the full arrangement.
pub fn is_realizable(family: &CombinatorialFamily) -> bool {
    if family.check_structure().is_err() {
        return false;
    }
    let graph = PlaneGraph::from_family(family);
    let (faces, _) = trace_faces(&graph);
    let (components, _) = components(&graph, &faces);
    components.iter().all(|c| c.euler() == 2)
}

#[derive(Clone, Debug)]
pub struct Contraction {
    pub family: CombinatorialFamily,
    /// Distinct unordered hub pairs among the contracted curves.
    pub s: usize,
    /// Number of new hubs, one per region holding endpoints.
    pub t: usize,
    /// Region of the original arrangement behind each new hub.
    pub hub_regions: Vec<usize>,
}

/// Reattaches every endpoint to one new hub per endpoint-holding region,
/// keeping all meetings and their rotations.
pub fn contract_endpoints(family: &CombinatorialFamily, arr: &Arrangement) -> Contraction {
    let g = &arr.graph;
    let kept = |d: Dart| !g.is_end_section(d / 2);
    // end dart at a meeting -> the hub end it stands for
    let end_of = |d: Dart| -> HubEnd {
        let s = g.section_of(d);
        if d % 2 == 1 && s.index == 0 {
            HubEnd { curve: s.curve, terminal: Terminal::Start }
        } else {
            HubEnd { curve: s.curve, terminal: Terminal::End }
        }
    };

    let mut blocks: BTreeMap<usize, Vec<Vec<HubEnd>>> = BTreeMap::new();
    let mut visited = vec![false; g.dart_count()];
    let reduced_prev = |d: Dart| -> Dart {
        let mut x = g.ccw_prev(d);
        while !kept(x) {
            x = g.ccw_prev(x);
        }
        x
    };
    for start in 0..g.dart_count() {
        if !kept(start) || visited[start] {
            continue;
        }
        let mut cycle = Vec::new();
        let mut d = start;
        loop {
            visited[d] = true;
            cycle.push(d);
            d = reduced_prev(d ^ 1);
            if d == start {
                break;
            }
        }
        let mut ends = Vec::new();
        for k in 0..cycle.len() {
            let back = cycle[k] ^ 1;
            let next = cycle[(k + 1) % cycle.len()];
            let mut corner = Vec::new();
            let mut x = g.ccw_next(next);
            while x != back {
                corner.push(end_of(x));
                x = g.ccw_next(x);
            }
            corner.reverse();
            ends.extend(corner);
        }
        if !ends.is_empty() {
            blocks.entry(arr.region_of_dart(start)).or_default().push(ends);
        }
    }
    for (v, node) in g.nodes.iter().enumerate() {
        if let Node::Meeting(_) = node {
            if g.rotation[v].iter().all(|&d| !kept(d)) {
                let ends: Vec<HubEnd> = g.rotation[v].iter().rev().map(|&d| end_of(d)).collect();
                blocks.entry(arr.region_of_dart(g.rotation[v][0])).or_default().push(ends);
            }
        }
    }
    for c in &family.curves {
        if c.events.is_empty() {
            let d = 2 * g.section_index(c.id, 0);
            blocks
                .entry(arr.region_of_dart(d))
                .or_default()
                .push(vec![HubEnd::end(c.id.index()), HubEnd::start(c.id.index())]);
        }
    }

    let mut out = family.clone();
    out.hubs.clear();
    let mut hub_regions = Vec::new();
    for (region, bs) in blocks {
        let id = HubId(out.hubs.len());
        let rotation: Vec<HubEnd> = bs.into_iter().flatten().collect();
        for e in &rotation {
            let c = &mut out.curves[e.curve.index()];
            match e.terminal {
                Terminal::Start => c.source = id,
                Terminal::End => c.target = id,
            }
        }
        out.hubs.push(Hub { id, rotation });
        hub_regions.push(region);
    }
    // keep nesting only for components the new hubs did not join
    out.containment = Vec::new();
    out.outer = None;
    if arr.components.len() > 1 {
        let graph = PlaneGraph::from_family(&out);
        let (faces, _) = trace_faces(&graph);
        let (comps, of_node) = components(&graph, &faces);
        if comps.len() > 1 {
            for ct in &arr.containment {
                let comp = of_node[graph.sections[graph.section_index(ct.component, 0)].from];
                let inside = graph.face_ref_dart(&ct.inside).unwrap();
                if comp != 0 && of_node[graph.origin(inside)] != comp {
                    let mut ct = ct.clone();
                    ct.outer = None;
                    out.containment.push(ct);
                }
            }
        }
    }

    let s = out
        .curves
        .iter()
        .map(|c| (c.source.min(c.target), c.source.max(c.target)))
        .collect::<BTreeSet<_>>()
        .len();
    Contraction { t: out.hubs.len(), s, family: out, hub_regions }
}
