//! Touch classes, quasi-grid certificates and the decompositions of a
//! touch class into quasi-grids.
//!
//! A list `c_1..c_k` of curves from hub `A` to hub `B` is a quasi-grid with
//! respect to `g` when
//!
//! 1. the curves and `g` pairwise meet exactly once,
//! 2. every `c_i` touches `g` at `P_i`, all in the same touch class,
//! 3. every `c_i`, `c_j` pair crosses at `P_{i,j}`,
//! 4. `P_1..P_k` appear along `g` in this order or its reverse,
//! 5. `c_j` passes `P_{1,j}, .., P_{j-1,j}, P_j, P_{j,j+1}, .., P_{j,k}`
//!    in this order.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    validate_family, CombinatorialFamily, CurveId, Direction, Hub, HubEnd, HubId, MeetingId,
    MeetingKind, Side, StructuralError, Terminal,
};

/// Degree threshold used when pruning the bipartite touching graph.
pub const PRUNE_K: usize = 4 * 48 * 48 + 1;

/// How a curve `c` touches the reference curve `g`, named by the kind of
/// the touching seen from `g`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TouchClass {
    /// `g ↑↑ c`: `g` on the left of `c`, same direction.
    GUpC,
    /// `g` on the left of `c`, opposite directions.
    OppositeLeft,
    /// `c ↑↑ g`: `g` on the right of `c`, same direction.
    CUpG,
    /// `g` on the right of `c`, opposite directions.
    OppositeRight,
}

impl TouchClass {
    pub const ALL: [TouchClass; 4] =
        [TouchClass::GUpC, TouchClass::OppositeLeft, TouchClass::CUpG, TouchClass::OppositeRight];

    /// Class of a touching from its kind seen from `g`.
    pub fn from_kind(kind_from_g: MeetingKind) -> Option<TouchClass> {
        match kind_from_g {
            MeetingKind::Crossing => None,
            MeetingKind::Touch { side: Side::Left, direction: Direction::Same } => Some(TouchClass::GUpC),
            MeetingKind::Touch { side: Side::Left, direction: Direction::Opposite } => {
                Some(TouchClass::OppositeLeft)
            }
            MeetingKind::Touch { side: Side::Right, direction: Direction::Same } => Some(TouchClass::CUpG),
            MeetingKind::Touch { side: Side::Right, direction: Direction::Opposite } => {
                Some(TouchClass::OppositeRight)
            }
        }
    }

    pub fn kind_from_g(self) -> MeetingKind {
        let (side, direction) = match self {
            TouchClass::GUpC => (Side::Left, Direction::Same),
            TouchClass::OppositeLeft => (Side::Left, Direction::Opposite),
            TouchClass::CUpG => (Side::Right, Direction::Same),
            TouchClass::OppositeRight => (Side::Right, Direction::Opposite),
        };
        MeetingKind::Touch { side, direction }
    }

    pub fn direction(self) -> Direction {
        match self {
            TouchClass::GUpC | TouchClass::CUpG => Direction::Same,
            _ => Direction::Opposite,
        }
    }
}

/// The class of `c`'s first touching with `g`, if any.
pub fn touch_class_of(family: &CombinatorialFamily, g: CurveId, c: CurveId) -> Option<TouchClass> {
    family
        .curve(g)
        .events
        .iter()
        .filter(|e| e.other == c)
        .find_map(|e| TouchClass::from_kind(e.kind))
}

/// Touchers of `g` grouped by class. Curves that only cross `g` are left out.
pub fn touch_classes(g: CurveId, family: &CombinatorialFamily) -> BTreeMap<TouchClass, Vec<CurveId>> {
    let mut out: BTreeMap<TouchClass, Vec<CurveId>> = BTreeMap::new();
    for c in family.curve_ids() {
        if c == g {
            continue;
        }
        if let Some(class) = touch_class_of(family, g, c) {
            out.entry(class).or_default().push(c);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Orientation {
    Forward,
    Backward,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CrossPoint {
    /// Zero-based indices into the certificate's curve list, `i < j`.
    pub i: usize,
    pub j: usize,
    pub meeting: MeetingId,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuasiGridCertificate {
    pub g: CurveId,
    /// `c_1..c_k`, indexed by the order of their touching points on `g`.
    pub curves: Vec<CurveId>,
    pub class: Option<TouchClass>,
    pub source: Option<HubId>,
    pub target: Option<HubId>,
    /// `P_1..P_k`.
    pub touch_points: Vec<MeetingId>,
    /// `P_{i,j}` for `i < j`.
    pub cross_points: Vec<CrossPoint>,
    /// Whether `P_1..P_k` run along `g` forwards or backwards.
    pub along_g: Orientation,
    /// Positions of `P_1..P_k` in `g`'s event list.
    pub g_positions: Vec<usize>,
    /// For each `c_j`, the certified point order: crossings and `P_j`.
    pub curve_orders: Vec<Vec<MeetingId>>,
}

impl QuasiGridCertificate {
    pub fn len(&self) -> usize {
        self.curves.len()
    }

    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn cross_point(&self, i: usize, j: usize) -> Option<MeetingId> {
        let (i, j) = (i.min(j), i.max(j));
        self.cross_points.iter().find(|p| p.i == i && p.j == j).map(|p| p.meeting)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum FailureReason {
    #[error("bad input: {detail}")]
    InvalidInput { detail: String },
    #[error("curve {curve} does not run between the common hubs")]
    EndpointMismatch { curve: CurveId },
    #[error("condition 1: {a} and {b} meet {count} times")]
    NotIntersecting { a: CurveId, b: CurveId, count: usize },
    #[error("condition 1: meeting {meeting} has a stale kind")]
    InconsistentKind { meeting: MeetingId },
    #[error("condition 2: {curve} does not touch g in class {expected:?} (found {found:?})")]
    TouchMismatch { curve: CurveId, expected: Option<TouchClass>, found: Option<MeetingKind> },
    #[error("condition 3: {a} and {b} touch at {meeting} instead of crossing")]
    NotCrossing { a: CurveId, b: CurveId, meeting: MeetingId },
    #[error("condition 4: touching points sit at positions {positions:?} along g")]
    NotMonotoneOnG { positions: Vec<usize> },
    #[error("condition 5: {curve} passes {found:?}, expected {expected:?}")]
    WrongOrderOnCurve { curve: CurveId, expected: Vec<MeetingId>, found: Vec<MeetingId> },
}

impl FailureReason {
    /// The violated condition, `0` for input/endpoint problems.
    pub fn condition(&self) -> u8 {
        match self {
            FailureReason::InvalidInput { .. } | FailureReason::EndpointMismatch { .. } => 0,
            FailureReason::NotIntersecting { .. } | FailureReason::InconsistentKind { .. } => 1,
            FailureReason::TouchMismatch { .. } => 2,
            FailureReason::NotCrossing { .. } => 3,
            FailureReason::NotMonotoneOnG { .. } => 4,
            FailureReason::WrongOrderOnCurve { .. } => 5,
        }
    }
}

/// Checks the five conditions for the curves in the given index order.
pub fn verify_quasi_grid_ordered(
    curves: &[CurveId],
    g: CurveId,
    family: &CombinatorialFamily,
) -> Result<QuasiGridCertificate, FailureReason> {
    let n = family.len();
    let mut seen = BTreeSet::new();
    if g.index() >= n {
        return Err(FailureReason::InvalidInput { detail: format!("unknown curve {g}") });
    }
    for &c in curves {
        if c.index() >= n {
            return Err(FailureReason::InvalidInput { detail: format!("unknown curve {c}") });
        }
        if c == g {
            return Err(FailureReason::InvalidInput { detail: format!("{c} is the reference curve") });
        }
        if !seen.insert(c) {
            return Err(FailureReason::InvalidInput { detail: format!("{c} listed twice") });
        }
    }
    let gc = family.curve(g);
    let (source, target) = match curves.first() {
        Some(&c) => (Some(family.curve(c).source), Some(family.curve(c).target)),
        None => (None, None),
    };
    for &c in curves {
        let cc = family.curve(c);
        if Some(cc.source) != source || Some(cc.target) != target {
            return Err(FailureReason::EndpointMismatch { curve: c });
        }
    }

    // 1: pairwise exactly once, with kinds matching rotations
    let all: Vec<CurveId> = std::iter::once(g).chain(curves.iter().copied()).collect();
    for (x, &a) in all.iter().enumerate() {
        for &b in &all[x + 1..] {
            let count = family.meeting_count(a, b);
            if count != 1 {
                return Err(FailureReason::NotIntersecting { a, b, count });
            }
        }
        for e in &family.curve(a).events {
            if seen.contains(&e.other) || e.other == g {
                let m = family.meeting(e.meeting);
                match crate::model::classify_meeting(&m.rotation, a) {
                    Ok(k) if k == e.kind => {}
                    _ => return Err(FailureReason::InconsistentKind { meeting: e.meeting }),
                }
            }
        }
    }

    // 2: same touch class with g
    let class = curves.first().and_then(|&c| touch_class_of(family, g, c));
    let mut touch_points = Vec::with_capacity(curves.len());
    for &c in curves {
        let found = family.kind_between(g, c);
        let this = found.and_then(TouchClass::from_kind);
        if this.is_none() || this != class {
            return Err(FailureReason::TouchMismatch { curve: c, expected: class, found });
        }
        touch_points.push(family.unique_meeting(g, c).unwrap());
    }

    // 3: pairwise crossings
    let mut cross_points = Vec::new();
    for i in 0..curves.len() {
        for j in i + 1..curves.len() {
            let m = family.unique_meeting(curves[i], curves[j]).unwrap();
            if family.kind_between(curves[i], curves[j]) != Some(MeetingKind::Crossing) {
                return Err(FailureReason::NotCrossing { a: curves[i], b: curves[j], meeting: m });
            }
            cross_points.push(CrossPoint { i, j, meeting: m });
        }
    }

    // 4: monotone along g
    let g_positions: Vec<usize> =
        touch_points.iter().map(|&m| gc.position_of(m).unwrap()).collect();
    let along_g = if g_positions.windows(2).all(|w| w[0] < w[1]) {
        Orientation::Forward
    } else if g_positions.windows(2).all(|w| w[0] > w[1]) {
        Orientation::Backward
    } else {
        return Err(FailureReason::NotMonotoneOnG { positions: g_positions });
    };

    // 5: ladder order on every c_j
    let k = curves.len();
    let cross = |i: usize, j: usize| {
        let (i, j) = (i.min(j), i.max(j));
        cross_points.iter().find(|p| p.i == i && p.j == j).unwrap().meeting
    };
    let mut curve_orders = Vec::with_capacity(k);
    for j in 0..k {
        let expected: Vec<MeetingId> = (0..k)
            .map(|i| if i == j { touch_points[j] } else { cross(i, j) })
            .collect();
        let wanted: BTreeSet<MeetingId> = expected.iter().copied().collect();
        let found: Vec<MeetingId> = family
            .curve(curves[j])
            .events
            .iter()
            .map(|e| e.meeting)
            .filter(|m| wanted.contains(m))
            .collect();
        if found != expected {
            return Err(FailureReason::WrongOrderOnCurve { curve: curves[j], expected, found });
        }
        curve_orders.push(expected);
    }

    Ok(QuasiGridCertificate {
        g,
        curves: curves.to_vec(),
        class,
        source,
        target,
        touch_points,
        cross_points,
        along_g,
        g_positions,
        curve_orders,
    })
}

/// Checks the five conditions after indexing the curves by the order of
/// their touching points along `g`. Both readings of `g` are tried.
pub fn verify_quasi_grid(
    curves: &[CurveId],
    g: CurveId,
    family: &CombinatorialFamily,
) -> Result<QuasiGridCertificate, FailureReason> {
    let n = family.len();
    if g.index() >= n || curves.iter().any(|c| c.index() >= n) {
        return verify_quasi_grid_ordered(curves, g, family);
    }
    let gc = family.curve(g);
    let pos = |c: CurveId| {
        gc.events.iter().position(|e| e.other == c).unwrap_or(usize::MAX)
    };
    let mut sorted = curves.to_vec();
    sorted.sort_by_key(|&c| (pos(c), c));
    match verify_quasi_grid_ordered(&sorted, g, family) {
        Ok(cert) => Ok(cert),
        Err(first) if first.condition() == 5 => {
            sorted.reverse();
            verify_quasi_grid_ordered(&sorted, g, family).map_err(|_| first)
        }
        Err(e) => Err(e),
    }
}

/// Graph on curves with an edge for every touching pair.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct TouchingGraph {
    pub nodes: Vec<CurveId>,
    pub edges: Vec<(CurveId, CurveId)>,
}

impl TouchingGraph {
    /// Touching graph of `subset` inside `family`.
    pub fn of(family: &CombinatorialFamily, subset: &[CurveId]) -> TouchingGraph {
        let inside: BTreeSet<CurveId> = subset.iter().copied().collect();
        let mut edges = BTreeSet::new();
        for &a in subset {
            for e in &family.curve(a).events {
                if inside.contains(&e.other) && e.kind.is_touch() {
                    edges.insert((a.min(e.other), a.max(e.other)));
                }
            }
        }
        let mut nodes: Vec<CurveId> = inside.into_iter().collect();
        nodes.sort();
        TouchingGraph { nodes, edges: edges.into_iter().collect() }
    }

    /// Touchings between `left` and `right` only.
    pub fn bipartite(family: &CombinatorialFamily, left: &[CurveId], right: &[CurveId]) -> TouchingGraph {
        let r: BTreeSet<CurveId> = right.iter().copied().collect();
        let mut edges = BTreeSet::new();
        for &a in left {
            for e in &family.curve(a).events {
                if r.contains(&e.other) && e.kind.is_touch() {
                    edges.insert((a.min(e.other), a.max(e.other)));
                }
            }
        }
        let mut nodes: Vec<CurveId> = left.iter().chain(right).copied().collect();
        nodes.sort();
        nodes.dedup();
        TouchingGraph { nodes, edges: edges.into_iter().collect() }
    }

    pub fn neighbours(&self) -> BTreeMap<CurveId, BTreeSet<CurveId>> {
        let mut out: BTreeMap<CurveId, BTreeSet<CurveId>> =
            self.nodes.iter().map(|&n| (n, BTreeSet::new())).collect();
        for &(a, b) in &self.edges {
            out.entry(a).or_default().insert(b);
            out.entry(b).or_default().insert(a);
        }
        out
    }

    pub fn max_degree(&self) -> usize {
        self.neighbours().values().map(BTreeSet::len).max().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Repeatedly deletes vertices of degree below `k`, lowest id first.
pub fn prune_k_core(graph: &TouchingGraph, k: usize) -> TouchingGraph {
    prune_k_core_by(graph, k, |_| 0)
}

/// As [`prune_k_core`], letting `pick` choose which of the currently
/// deletable vertices (sorted by id) goes next.
pub fn prune_k_core_by(
    graph: &TouchingGraph,
    k: usize,
    mut pick: impl FnMut(&[CurveId]) -> usize,
) -> TouchingGraph {
    let mut adj = graph.neighbours();
    let mut queue: VecDeque<CurveId> = VecDeque::new();
    let mut low: BTreeSet<CurveId> =
        adj.iter().filter(|(_, n)| n.len() < k).map(|(&v, _)| v).collect();
    loop {
        if low.is_empty() {
            break;
        }
        let candidates: Vec<CurveId> = low.iter().copied().collect();
        let v = candidates[pick(&candidates).min(candidates.len() - 1)];
        queue.push_back(v);
        low.remove(&v);
        let ns = adj.remove(&v).unwrap_or_default();
        for n in ns {
            if let Some(set) = adj.get_mut(&n) {
                set.remove(&v);
                if set.len() < k {
                    low.insert(n);
                }
            }
        }
    }
    let nodes: Vec<CurveId> = adj.keys().copied().collect();
    let edges = graph
        .edges
        .iter()
        .filter(|(a, b)| adj.contains_key(a) && adj.contains_key(b))
        .copied()
        .collect();
    TouchingGraph { nodes, edges }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dilation {
    pub hub: HubId,
    /// Ends moved to the first new hub, in rotation order.
    pub first: Vec<HubEnd>,
    pub second: Vec<HubEnd>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionGroup {
    pub class: TouchClass,
    pub source: HubId,
    pub target: HubId,
    pub curves: Vec<CurveId>,
    /// Parts of this group; at most `bound`.
    pub parts: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub g: CurveId,
    pub parts: Vec<QuasiGridCertificate>,
    /// 2, 12 or 48 (per group for the full decomposition).
    pub bound_claimed: usize,
    /// Curves left out because they do not touch `g`.
    pub residual: Vec<CurveId>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub groups: Vec<DecompositionGroup>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dilations: Vec<Dilation>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize, Error)]
#[serde(tag = "error", rename_all = "snake_case")]
pub enum DecomposeError {
    #[error("precondition failed: {detail}")]
    Precondition { detail: String },
    #[error("input contradicts the lemma: {detail}")]
    InputContradictsLemma { detail: String, curves: Vec<CurveId> },
    #[error("structural error: {0}")]
    Structural(String),
}

impl From<StructuralError> for DecomposeError {
    fn from(e: StructuralError) -> Self {
        DecomposeError::Structural(e.to_string())
    }
}

fn precondition(detail: impl Into<String>) -> DecomposeError {
    DecomposeError::Precondition { detail: detail.into() }
}

fn common_class(
    family: &CombinatorialFamily,
    g: CurveId,
    h: &[CurveId],
) -> Result<TouchClass, DecomposeError> {
    let mut class = None;
    for &c in h {
        if c.index() >= family.len() || c == g {
            return Err(precondition(format!("{c} is not a member distinct from g")));
        }
        let this = touch_class_of(family, g, c)
            .ok_or_else(|| precondition(format!("{c} does not touch {g}")))?;
        if *class.get_or_insert(this) != this {
            return Err(precondition("curves are not touch-equivalent"));
        }
        if family.meeting_count(g, c) != 1 {
            return Err(precondition(format!("{c} meets {g} more than once")));
        }
    }
    for (i, &a) in h.iter().enumerate() {
        for &b in &h[i + 1..] {
            if family.meeting_count(a, b) != 1 {
                return Err(precondition(format!("{a} and {b} do not meet exactly once")));
            }
        }
    }
    class.ok_or_else(|| precondition("empty curve set"))
}

/// Splits `h` (one touch class of `g`, all from hub `A` to hub `B != A`)
/// into at most two quasi-grids.
///
/// A set that already is a quasi-grid is returned whole. Otherwise the
/// pivot is the first toucher along `g` when the class runs in the same
/// direction as `g` and the last one otherwise (the other end is tried if
/// that fails); the first part is the pivot with every curve that meets it
/// before meeting `g`.
pub fn decompose_open(
    family: &CombinatorialFamily,
    g: CurveId,
    h: &[CurveId],
) -> Result<DecompositionReport, DecomposeError> {
    if h.is_empty() {
        return Ok(DecompositionReport {
            g,
            parts: Vec::new(),
            bound_claimed: 2,
            residual: Vec::new(),
            groups: Vec::new(),
            dilations: Vec::new(),
        });
    }
    let class = common_class(family, g, h)?;
    let (a, b) = (family.curve(h[0]).source, family.curve(h[0]).target);
    if a == b {
        return Err(precondition("curves are closed; use decompose_closed"));
    }
    for &c in h {
        let cc = family.curve(c);
        if cc.source != a || cc.target != b {
            return Err(precondition(format!("{c} does not run from {a} to {b}")));
        }
    }
    let report = |parts| DecompositionReport {
        g,
        parts,
        bound_claimed: 2,
        residual: Vec::new(),
        groups: Vec::new(),
        dilations: Vec::new(),
    };
    if let Ok(cert) = verify_quasi_grid(h, g, family) {
        return Ok(report(vec![cert]));
    }
    let gc = family.curve(g);
    let pos = |c: CurveId| gc.events.iter().position(|e| e.other == c).unwrap();
    let first_on_g = *h.iter().min_by_key(|&&c| pos(c)).unwrap();
    let last_on_g = *h.iter().max_by_key(|&&c| pos(c)).unwrap();
    let pivots = match class.direction() {
        Direction::Same => [first_on_g, last_on_g],
        Direction::Opposite => [last_on_g, first_on_g],
    };
    let mut failure = None;
    for pivot in pivots {
        match split_at_pivot(family, g, h, pivot) {
            Ok(parts) => return Ok(report(parts)),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    Err(failure.unwrap())
}

fn split_at_pivot(
    family: &CombinatorialFamily,
    g: CurveId,
    h: &[CurveId],
    pivot: CurveId,
) -> Result<Vec<QuasiGridCertificate>, DecomposeError> {
    let mut first = vec![pivot];
    let mut second = Vec::new();
    for &c in h {
        if c == pivot {
            continue;
        }
        let meets_pivot_first = family
            .curve(c)
            .events
            .iter()
            .find(|e| e.other == pivot || e.other == g)
            .is_some_and(|e| e.other == pivot);
        if meets_pivot_first {
            first.push(c);
        } else {
            second.push(c);
        }
    }
    let mut parts = Vec::new();
    for part in [first, second] {
        if part.is_empty() {
            continue;
        }
        let cert = verify_quasi_grid(&part, g, family).map_err(|reason| {
            DecomposeError::InputContradictsLemma {
                detail: format!("part is not a quasi-grid: {reason}"),
                curves: part.clone(),
            }
        })?;
        parts.push(cert);
    }
    Ok(parts)
}

/// Greedy colouring in id order; at most three colours when the maximum
/// degree is two.
pub fn greedy_colouring(graph: &TouchingGraph) -> BTreeMap<CurveId, usize> {
    let adj = graph.neighbours();
    let mut colour: BTreeMap<CurveId, usize> = BTreeMap::new();
    for &v in &graph.nodes {
        let used: BTreeSet<usize> = adj[&v].iter().filter_map(|n| colour.get(n).copied()).collect();
        let c = (0..).find(|c| !used.contains(c)).unwrap();
        colour.insert(v, c);
    }
    colour
}

/// Splits hub `hub` into two: ends from `cut` (inclusive) up to `cut + half`
/// (exclusive) in rotation order go to the first new hub, the rest to a
/// second one appended at the end. Returns the new family and the id of the
/// second hub.
fn dilate(family: &CombinatorialFamily, hub: HubId, cut: usize, until: usize) -> (CombinatorialFamily, HubId) {
    let rot = &family.hub(hub).rotation;
    let len = rot.len();
    let mut first = Vec::new();
    let mut second = Vec::new();
    for step in 0..len {
        let e = rot[(cut + step) % len];
        if step < (until + len - cut) % len {
            first.push(e);
        } else {
            second.push(e);
        }
    }
    let mut out = family.clone();
    let new = HubId(out.hubs.len());
    out.hubs[hub.index()].rotation = first;
    for e in &second {
        let c = &mut out.curves[e.curve.index()];
        match e.terminal {
            Terminal::Start => c.source = new,
            Terminal::End => c.target = new,
        }
    }
    out.hubs.push(Hub { id: new, rotation: second });
    (out, new)
}

/// Splits `h` (one touch class of `g`, all closed at one hub) into at most
/// twelve quasi-grids.
pub fn decompose_closed(
    family: &CombinatorialFamily,
    g: CurveId,
    h: &[CurveId],
) -> Result<DecompositionReport, DecomposeError> {
    let mut report = DecompositionReport {
        g,
        parts: Vec::new(),
        bound_claimed: 12,
        residual: Vec::new(),
        groups: Vec::new(),
        dilations: Vec::new(),
    };
    if h.is_empty() {
        return Ok(report);
    }
    common_class(family, g, h)?;
    let a = family.curve(h[0]).source;
    for &c in h {
        let cc = family.curve(c);
        if cc.source != a || cc.target != a {
            return Err(precondition(format!("{c} is not closed at {a}")));
        }
    }
    let graph = TouchingGraph::of(family, h);
    let adj = graph.neighbours();
    if let Some((&v, ns)) = adj.iter().find(|(_, ns)| ns.len() > 2) {
        let mut curves = vec![v];
        curves.extend(ns.iter().copied());
        return Err(DecomposeError::InputContradictsLemma {
            detail: format!("{v} touches {} curves of the class", ns.len()),
            curves,
        });
    }
    let colours = greedy_colouring(&graph);
    let ncolours = colours.values().max().map_or(0, |m| m + 1);
    for colour in 0..ncolours {
        let class: Vec<CurveId> =
            h.iter().copied().filter(|c| colours[c] == colour).collect();
        let members: BTreeSet<CurveId> = class.iter().copied().collect();
        let rot = &family.hub(a).rotation;
        let idx: Vec<usize> =
            (0..rot.len()).filter(|&i| members.contains(&rot[i].curve)).collect();
        let k = class.len();
        for i in 0..k {
            if rot[idx[i]].curve != rot[idx[i + k]].curve {
                return Err(DecomposeError::InputContradictsLemma {
                    detail: format!(
                        "ends of {} and {} are not antipodal around {a}",
                        rot[idx[i]].curve,
                        rot[idx[i + k]].curve
                    ),
                    curves: class.clone(),
                });
            }
        }
        let (dilated, a2) = dilate(family, a, idx[0], idx[k]);
        report.dilations.push(Dilation {
            hub: a,
            first: dilated.hub(a).rotation.clone(),
            second: dilated.hub(a2).rotation.clone(),
        });
        let (h12, h21): (Vec<CurveId>, Vec<CurveId>) =
            class.iter().partition(|&&c| dilated.curve(c).source == a);
        for side in [h12, h21] {
            let sub = decompose_open(&dilated, g, &side)?;
            for part in sub.parts {
                let cert = verify_quasi_grid(&part.curves, g, family).map_err(|reason| {
                    DecomposeError::InputContradictsLemma {
                        detail: format!("dilated part fails in the original family: {reason}"),
                        curves: part.curves.clone(),
                    }
                })?;
                report.parts.push(cert);
            }
        }
    }
    if report.parts.len() > 12 {
        return Err(DecomposeError::InputContradictsLemma {
            detail: format!("{} parts", report.parts.len()),
            curves: h.to_vec(),
        });
    }
    Ok(report)
}

/// Decomposes every toucher of `g`, grouped by touch class and hub pair,
/// into quasi-grids; each group yields at most 48 parts.
pub fn decompose_all(
    g: CurveId,
    family: &CombinatorialFamily,
) -> Result<DecompositionReport, DecomposeError> {
    if g.index() >= family.len() {
        return Err(precondition(format!("unknown curve {g}")));
    }
    let validation = validate_family(family)?;
    if !validation.is_pseudo_segment {
        return Err(precondition("family is not a pseudo-segment family"));
    }
    let mut groups: BTreeMap<(TouchClass, HubId, HubId), Vec<CurveId>> = BTreeMap::new();
    let mut residual = Vec::new();
    for c in family.curve_ids() {
        if c == g {
            continue;
        }
        match touch_class_of(family, g, c) {
            Some(class) => {
                let cc = family.curve(c);
                groups.entry((class, cc.source, cc.target)).or_default().push(c);
            }
            None => residual.push(c),
        }
    }
    let keyed: Vec<_> = groups.into_iter().collect();
    let results: Vec<Result<DecompositionReport, DecomposeError>> = keyed
        .par_iter()
        .map(|((_, s, t), curves)| {
            if s == t {
                decompose_closed(family, g, curves)
            } else {
                decompose_open(family, g, curves)
            }
        })
        .collect();
    let mut report = DecompositionReport {
        g,
        parts: Vec::new(),
        bound_claimed: 48,
        residual,
        groups: Vec::new(),
        dilations: Vec::new(),
    };
    for (((class, source, target), curves), r) in keyed.into_iter().zip(results) {
        let r = r?;
        if r.parts.len() > 48 {
            return Err(DecomposeError::InputContradictsLemma {
                detail: format!("{} parts in one group", r.parts.len()),
                curves,
            });
        }
        report.groups.push(DecompositionGroup {
            class,
            source,
            target,
            curves,
            parts: r.parts.len(),
        });
        report.parts.extend(r.parts);
        report.dilations.extend(r.dilations);
    }
    Ok(report)
}
