//! Polyline front end: pairwise contacts, ray classification, and
//! conversion to a [`CombinatorialFamily`].
//!
//! Touchings are vertex contacts (a vertex of one curve on the other curve,
//! or two vertices coinciding) and crossings may sit anywhere; every
//! contact is classified from the counter-clockwise order of the four rays
//! leaving it. All length comparisons go through one tolerance `eps`.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{Float, FromPrimitive};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    classify_meeting, CombinatorialFamily, CurveId, CurveSpec, HubEnd, MeetingEnd, MeetingKind,
    Passage, Terminal,
};

pub trait Scalar: Float + FromPrimitive + Send + Sync + fmt::Debug + fmt::Display {}
impl<T: Float + FromPrimitive + Send + Sync + fmt::Debug + fmt::Display> Scalar for T {}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point<T> {
    pub x: T,
    pub y: T,
}

impl<T: Scalar> Point<T> {
    pub fn new(x: T, y: T) -> Self {
        Point { x, y }
    }

    pub fn sub(self, o: Self) -> Self {
        Point::new(self.x - o.x, self.y - o.y)
    }

    pub fn add(self, o: Self) -> Self {
        Point::new(self.x + o.x, self.y + o.y)
    }

    pub fn scale(self, k: T) -> Self {
        Point::new(self.x * k, self.y * k)
    }

    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y
    }

    pub fn cross(self, o: Self) -> T {
        self.x * o.y - self.y * o.x
    }

    pub fn norm(self) -> T {
        self.x.hypot(self.y)
    }

    pub fn dist(self, o: Self) -> T {
        self.sub(o).norm()
    }

    /// Angle in `[0, 2π)`.
    pub fn angle(self) -> T {
        let a = self.y.atan2(self.x);
        if a < T::zero() {
            a + two_pi()
        } else {
            a
        }
    }
}

fn two_pi<T: Scalar>() -> T {
    T::from_f64(std::f64::consts::TAU).unwrap()
}

fn lit<T: Scalar>(v: f64) -> T {
    T::from_f64(v).unwrap()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Polyline<T> {
    pub id: CurveId,
    pub points: Vec<Point<T>>,
}

impl<T: Scalar> Polyline<T> {
    pub fn new(id: usize, points: &[(f64, f64)]) -> Self {
        Polyline {
            id: CurveId(id),
            points: points.iter().map(|&(x, y)| Point::new(lit(x), lit(y))).collect(),
        }
    }

    pub fn first(&self) -> Point<T> {
        self.points[0]
    }

    pub fn last(&self) -> Point<T> {
        *self.points.last().unwrap()
    }

    fn cumulative(&self) -> Vec<T> {
        let mut acc = vec![T::zero()];
        for w in self.points.windows(2) {
            let l = *acc.last().unwrap() + w[0].dist(w[1]);
            acc.push(l);
        }
        acc
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GeometryError {
    #[error("curve {curve}: needs at least two points")]
    TooFewPoints { curve: CurveId },
    #[error("curve {curve}: coordinate {index} is not finite")]
    NonFiniteCoordinate { curve: CurveId, index: usize },
    #[error("curve {curve}: points {index} and {next} coincide")]
    RepeatedPoint { curve: CurveId, index: usize, next: usize },
    #[error("curve {curve} is not simple near ({x}, {y})")]
    SelfIntersection { curve: CurveId, x: f64, y: f64 },
    #[error("general position violated near ({x}, {y}): {detail}")]
    GeneralPositionViolation { x: f64, y: f64, detail: String },
    #[error("curves {a} and {b} overlap along a segment near ({x}, {y})")]
    NonFiniteIntersection { a: CurveId, b: CurveId, x: f64, y: f64 },
    #[error("rays at ({x}, {y}) are angularly indistinguishable")]
    TangencyUnresolvable { x: f64, y: f64 },
    #[error("curve {curve}: two meetings at the same arclength near ({x}, {y})")]
    ArclengthTie { curve: CurveId, x: f64, y: f64 },
    #[error("curve ids must be 0..n in order, found {found} at position {position}")]
    BadCurveId { position: usize, found: CurveId },
}

fn at<T: Scalar>(p: Point<T>) -> (f64, f64) {
    (p.x.to_f64().unwrap_or(f64::NAN), p.y.to_f64().unwrap_or(f64::NAN))
}

/// One of the four rays leaving a meeting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Ray<T> {
    pub curve: CurveId,
    pub passage: Passage,
    /// Direction in radians, `[0, 2π)`.
    pub angle: T,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeometricMeeting<T> {
    pub pair: (CurveId, CurveId),
    pub location: Point<T>,
    /// Seen from `pair.0`.
    pub kind: MeetingKind,
    /// The four rays, counter-clockwise.
    pub frame: [Ray<T>; 4],
    /// Arclength position of the meeting along each curve of `pair`.
    pub params: (T, T),
}

/// Rays closer than this (radians) are treated as equal.
pub fn angular_resolution<T: Scalar>() -> T {
    T::epsilon().sqrt()
}

/// Orders the rays counter-clockwise and classifies, as seen from the
/// curve of `rays[0]`.
pub fn classify_geometric<T: Scalar>(
    rays: &[Ray<T>; 4],
    location: Point<T>,
) -> Result<([Ray<T>; 4], MeetingKind), GeometryError> {
    let mut sorted = *rays;
    sorted.sort_by(|a, b| a.angle.partial_cmp(&b.angle).unwrap());
    let res = angular_resolution::<T>();
    for i in 0..4 {
        let a = sorted[i].angle;
        let b = if i == 3 { sorted[0].angle + two_pi() } else { sorted[i + 1].angle };
        if b - a <= res {
            let (x, y) = at(location);
            return Err(GeometryError::TangencyUnresolvable { x, y });
        }
    }
    let rotation = sorted.map(|r| MeetingEnd { curve: r.curve, passage: r.passage });
    let kind = classify_meeting(&rotation, rays[0].curve).map_err(|e| {
        let (x, y) = at(location);
        GeometryError::GeneralPositionViolation { x, y, detail: e.to_string() }
    })?;
    Ok((sorted, kind))
}

/// 1e-9 of the bounding-box diagonal (1e-9 for a degenerate box).
pub fn default_tolerance<T: Scalar>(curves: &[Polyline<T>]) -> T {
    let mut lo = Point::new(T::infinity(), T::infinity());
    let mut hi = Point::new(T::neg_infinity(), T::neg_infinity());
    for p in curves.iter().flat_map(|c| &c.points) {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    }
    let diag = hi.sub(lo).norm();
    let base = if diag.is_finite() && diag > T::zero() { diag } else { T::one() };
    // f32 cannot resolve 1e-9 of its own scale
    let rel = lit::<T>(1e-9).max(T::epsilon() * lit(16.0));
    base * rel
}

/// Where a contact sits on one curve.
#[derive(Clone, Copy, Debug)]
struct Site<T> {
    param: T,
    segment: usize,
    vertex: Option<usize>,
}

#[derive(Clone, Copy, Debug)]
struct Contact<T> {
    location: Point<T>,
    on_a: Site<T>,
    on_b: Site<T>,
}

fn project<T: Scalar>(p: Point<T>, s0: Point<T>, s1: Point<T>) -> (T, T) {
    let d = s1.sub(s0);
    let len2 = d.dot(d);
    let t = (p.sub(s0).dot(d) / len2).max(T::zero()).min(T::one());
    let foot = s0.add(d.scale(t));
    (t, p.dist(foot))
}

fn site_on<T: Scalar>(c: &Polyline<T>, cum: &[T], seg: usize, p: Point<T>, eps: T) -> Site<T> {
    let (t, _) = project(p, c.points[seg], c.points[seg + 1]);
    let param = cum[seg] + (cum[seg + 1] - cum[seg]) * t;
    let vertex = if p.dist(c.points[seg]) <= eps {
        Some(seg)
    } else if p.dist(c.points[seg + 1]) <= eps {
        Some(seg + 1)
    } else {
        None
    };
    let param = match vertex {
        Some(v) => cum[v],
        None => param,
    };
    Site { param, segment: seg, vertex }
}

fn check_polyline<T: Scalar>(c: &Polyline<T>, eps: T) -> Result<(), GeometryError> {
    if c.points.len() < 2 {
        return Err(GeometryError::TooFewPoints { curve: c.id });
    }
    for (i, p) in c.points.iter().enumerate() {
        if !p.x.is_finite() || !p.y.is_finite() {
            return Err(GeometryError::NonFiniteCoordinate { curve: c.id, index: i });
        }
    }
    for i in 0..c.points.len() - 1 {
        if c.points[i].dist(c.points[i + 1]) <= eps {
            return Err(GeometryError::RepeatedPoint { curve: c.id, index: i, next: i + 1 });
        }
    }
    let closed = c.points.len() > 2 && c.first().dist(c.last()) <= eps;
    let nseg = c.points.len() - 1;
    for i in 0..nseg {
        for j in i + 1..nseg {
            let (p0, p1) = (c.points[i], c.points[i + 1]);
            let (q0, q1) = (c.points[j], c.points[j + 1]);
            let adjacent = j == i + 1;
            let wrap = closed && i == 0 && j == nseg - 1;
            let bad = if adjacent {
                // folding back onto the previous segment
                let d1 = p1.sub(p0);
                let d2 = q1.sub(q0);
                d1.cross(d2).abs() <= eps * d1.norm().max(d2.norm())
                    && d1.dot(d2) < T::zero()
            } else {
                let contacts = segment_contacts(p0, p1, q0, q1, eps);
                match contacts {
                    Err(()) => true,
                    Ok(v) => v.iter().any(|&(p, _, _)| {
                        !(wrap && p.dist(c.first()) <= eps * lit(2.0))
                    }),
                }
            };
            if bad {
                let (x, y) = at(q0);
                return Err(GeometryError::SelfIntersection { curve: c.id, x, y });
            }
        }
    }
    Ok(())
}

/// Contacts between two segments: the point and the segment parameters
/// on each. `Err` on collinear overlap longer than `eps`.
#[allow(clippy::type_complexity)]
fn segment_contacts<T: Scalar>(
    p0: Point<T>,
    p1: Point<T>,
    q0: Point<T>,
    q1: Point<T>,
    eps: T,
) -> Result<Vec<(Point<T>, T, T)>, ()> {
    let mut out = Vec::new();
    let d1 = p1.sub(p0);
    let d2 = q1.sub(q0);
    for (v, on_p) in [(p0, true), (p1, true), (q0, false), (q1, false)] {
        let (s0, s1) = if on_p { (q0, q1) } else { (p0, p1) };
        let (t, dist) = project(v, s0, s1);
        if dist <= eps {
            let tp = if on_p { if v == p0 { T::zero() } else { T::one() } } else { project(v, p0, p1).0 };
            let tq = if on_p { t } else if v == q0 { T::zero() } else { T::one() };
            out.push((v, tp, tq));
        }
    }
    let denom = d1.cross(d2);
    let scale = d1.norm() * d2.norm();
    if denom.abs() > eps * scale / (d1.norm().max(d2.norm())) {
        let w = q0.sub(p0);
        let t = w.cross(d2) / denom;
        let u = w.cross(d1) / denom;
        if t > T::zero() && t < T::one() && u > T::zero() && u < T::one() {
            let p = p0.add(d1.scale(t));
            if out.iter().all(|(o, _, _)| o.dist(p) > eps) {
                out.push((p, t, u));
            }
        }
    } else if out.len() >= 2 {
        // parallel with at least two contacts: overlapping unless they coincide
        let spread = out.iter().map(|(p, _, _)| p.dist(out[0].0)).fold(T::zero(), T::max);
        if spread > eps {
            return Err(());
        }
    }
    Ok(out)
}

/// Raw contacts between two distinct curves, merged per location.
fn pair_contacts<T: Scalar>(
    a: &Polyline<T>,
    ca: &[T],
    b: &Polyline<T>,
    cb: &[T],
    eps: T,
) -> Result<Vec<Contact<T>>, GeometryError> {
    let mut raw: Vec<Contact<T>> = Vec::new();
    for i in 0..a.points.len() - 1 {
        for j in 0..b.points.len() - 1 {
            let (p0, p1) = (a.points[i], a.points[i + 1]);
            let (q0, q1) = (b.points[j], b.points[j + 1]);
            // cheap box rejection
            if p0.x.min(p1.x) > q0.x.max(q1.x) + eps
                || q0.x.min(q1.x) > p0.x.max(p1.x) + eps
                || p0.y.min(p1.y) > q0.y.max(q1.y) + eps
                || q0.y.min(q1.y) > p0.y.max(p1.y) + eps
            {
                continue;
            }
            let hits = segment_contacts(p0, p1, q0, q1, eps).map_err(|_| {
                let (x, y) = at(p0);
                GeometryError::NonFiniteIntersection { a: a.id, b: b.id, x, y }
            })?;
            for (p, _, _) in hits {
                raw.push(Contact {
                    location: p,
                    on_a: site_on(a, ca, i, p, eps),
                    on_b: site_on(b, cb, j, p, eps),
                });
            }
        }
    }
    let merge = eps * lit(4.0);
    let mut merged: Vec<Contact<T>> = Vec::new();
    for c in raw {
        match merged.iter_mut().find(|m| m.location.dist(c.location) <= merge) {
            Some(m) => {
                // prefer the vertex reading of a site
                if m.on_a.vertex.is_none() && c.on_a.vertex.is_some() {
                    m.on_a = c.on_a;
                    m.location = c.location;
                }
                if m.on_b.vertex.is_none() && c.on_b.vertex.is_some() {
                    m.on_b = c.on_b;
                    m.location = c.location;
                }
            }
            None => merged.push(c),
        }
    }
    Ok(merged)
}

fn rays_at<T: Scalar>(c: &Polyline<T>, s: &Site<T>, loc: Point<T>) -> (T, T) {
    match s.vertex {
        Some(k) => (c.points[k - 1].sub(loc).angle(), c.points[k + 1].sub(loc).angle()),
        None => {
            let d = c.points[s.segment + 1].sub(c.points[s.segment]);
            (d.scale(-T::one()).angle(), d.angle())
        }
    }
}

fn is_end<T: Scalar>(c: &Polyline<T>, s: &Site<T>) -> bool {
    matches!(s.vertex, Some(k) if k == 0 || k + 1 == c.points.len())
}

/// Every meeting between the curves. Endpoint-to-endpoint contacts are
/// hub coincidences and are not reported.
pub fn intersect_all<T: Scalar>(
    curves: &[Polyline<T>],
    eps: T,
) -> Result<Vec<GeometricMeeting<T>>, GeometryError> {
    for (i, c) in curves.iter().enumerate() {
        if c.id.index() != i {
            return Err(GeometryError::BadCurveId { position: i, found: c.id });
        }
        check_polyline(c, eps)?;
    }
    let cum: Vec<Vec<T>> = curves.iter().map(Polyline::cumulative).collect();
    let pairs: Vec<(usize, usize)> = (0..curves.len())
        .flat_map(|a| (a + 1..curves.len()).map(move |b| (a, b)))
        .collect();
    let per_pair: Vec<Result<Vec<GeometricMeeting<T>>, GeometryError>> = pairs
        .par_iter()
        .map(|&(ia, ib)| {
            let (a, b) = (&curves[ia], &curves[ib]);
            let contacts = pair_contacts(a, &cum[ia], b, &cum[ib], eps)?;
            let mut out = Vec::new();
            for c in contacts {
                let (ea, eb) = (is_end(a, &c.on_a), is_end(b, &c.on_b));
                if ea && eb {
                    continue;
                }
                if ea || eb {
                    let (x, y) = at(c.location);
                    let (e, o) = if ea { (a.id, b.id) } else { (b.id, a.id) };
                    return Err(GeometryError::GeneralPositionViolation {
                        x,
                        y,
                        detail: format!("endpoint of {e} lies on {o}"),
                    });
                }
                let (a_in, a_out) = rays_at(a, &c.on_a, c.location);
                let (b_in, b_out) = rays_at(b, &c.on_b, c.location);
                let rays = [
                    Ray { curve: a.id, passage: Passage::In, angle: a_in },
                    Ray { curve: a.id, passage: Passage::Out, angle: a_out },
                    Ray { curve: b.id, passage: Passage::In, angle: b_in },
                    Ray { curve: b.id, passage: Passage::Out, angle: b_out },
                ];
                let (frame, kind) = classify_geometric(&rays, c.location)?;
                out.push(GeometricMeeting {
                    pair: (a.id, b.id),
                    location: c.location,
                    kind,
                    frame,
                    params: (c.on_a.param, c.on_b.param),
                });
            }
            out.sort_by(|x, y| x.params.0.partial_cmp(&y.params.0).unwrap());
            Ok(out)
        })
        .collect();
    let mut meetings = Vec::new();
    for r in per_pair {
        meetings.extend(r?);
    }
    let near = eps * lit(4.0);
    for (i, m) in meetings.iter().enumerate() {
        for n in &meetings[i + 1..] {
            if m.location.dist(n.location) <= near {
                let (x, y) = at(m.location);
                return Err(GeometryError::GeneralPositionViolation {
                    x,
                    y,
                    detail: format!(
                        "curves {}, {} and {} meet at one point",
                        m.pair.0,
                        m.pair.1,
                        if n.pair.0 == m.pair.0 || n.pair.0 == m.pair.1 { n.pair.1 } else { n.pair.0 }
                    ),
                });
            }
        }
        for c in curves {
            for p in [c.first(), c.last()] {
                if p.dist(m.location) <= near {
                    let (x, y) = at(m.location);
                    return Err(GeometryError::GeneralPositionViolation {
                        x,
                        y,
                        detail: format!("meeting of {} and {} at an endpoint of {}", m.pair.0, m.pair.1, c.id),
                    });
                }
            }
        }
    }
    Ok(meetings)
}

/// Builds the combinatorial family: hubs from coinciding endpoints, event
/// order by arclength, rotations by ray angle.
pub fn to_combinatorial<T: Scalar>(
    curves: &[Polyline<T>],
    meetings: &[GeometricMeeting<T>],
    eps: T,
) -> Result<CombinatorialFamily, GeometryError> {
    // hubs: endpoints within eps, numbered by first appearance
    let ends: Vec<(usize, Terminal, Point<T>)> = curves
        .iter()
        .enumerate()
        .flat_map(|(i, c)| [(i, Terminal::Start, c.first()), (i, Terminal::End, c.last())])
        .collect();
    let mut hub_of = vec![usize::MAX; ends.len()];
    let mut hub_points: Vec<Point<T>> = Vec::new();
    for (k, &(_, _, p)) in ends.iter().enumerate() {
        let found = hub_points.iter().position(|h| h.dist(p) <= eps * lit(4.0));
        hub_of[k] = match found {
            Some(h) => h,
            None => {
                hub_points.push(p);
                hub_points.len() - 1
            }
        };
    }
    let mut hub_rays: Vec<Vec<(T, HubEnd)>> = vec![Vec::new(); hub_points.len()];
    for (k, &(c, term, p)) in ends.iter().enumerate() {
        let pts = &curves[c].points;
        let toward = match term {
            Terminal::Start => pts[1],
            Terminal::End => pts[pts.len() - 2],
        };
        hub_rays[hub_of[k]].push((toward.sub(p).angle(), HubEnd { curve: CurveId(c), terminal: term }));
    }
    let mut hubs = Vec::with_capacity(hub_rays.len());
    for (h, mut rays) in hub_rays.into_iter().enumerate() {
        rays.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if rays.len() > 1 {
            for i in 0..rays.len() {
                let a = rays[i].0;
                let b = if i + 1 == rays.len() { rays[0].0 + two_pi() } else { rays[i + 1].0 };
                if b - a <= angular_resolution::<T>() {
                    let (x, y) = at(hub_points[h]);
                    return Err(GeometryError::TangencyUnresolvable { x, y });
                }
            }
        }
        hubs.push(rays.into_iter().map(|(_, e)| e).collect::<Vec<_>>());
    }

    let mut order = vec![Vec::new(); curves.len()];
    for (m, gm) in meetings.iter().enumerate() {
        order[gm.pair.0.index()].push((gm.params.0, m));
        order[gm.pair.1.index()].push((gm.params.1, m));
    }
    let mut specs = Vec::with_capacity(curves.len());
    for (i, evs) in order.iter_mut().enumerate() {
        evs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in evs.windows(2) {
            if w[1].0 - w[0].0 <= eps {
                let (x, y) = at(meetings[w[1].1].location);
                return Err(GeometryError::ArclengthTie { curve: CurveId(i), x, y });
            }
        }
        let events: Vec<usize> = evs.iter().map(|&(_, m)| m).collect();
        specs.push(CurveSpec::new(hub_of[2 * i], hub_of[2 * i + 1], &events));
    }
    let rotations = meetings
        .iter()
        .map(|m| m.frame.map(|r| MeetingEnd { curve: r.curve, passage: r.passage }))
        .collect();
    CombinatorialFamily::assemble(specs, rotations, hubs).map_err(|e| {
        GeometryError::GeneralPositionViolation { x: f64::NAN, y: f64::NAN, detail: e.to_string() }
    })
}

/// `intersect_all` followed by `to_combinatorial`, with the default
/// tolerance when `eps` is `None`.
pub fn ingest<T: Scalar>(
    curves: &[Polyline<T>],
    eps: Option<T>,
) -> Result<(CombinatorialFamily, Vec<GeometricMeeting<T>>), GeometryError> {
    let eps = eps.unwrap_or_else(|| default_tolerance(curves));
    let meetings = intersect_all(curves, eps)?;
    let family = to_combinatorial(curves, &meetings, eps)?;
    Ok((family, meetings))
}

/// Moves every point by a uniform offset in `[-magnitude, magnitude]²`
/// drawn from a ChaCha8 stream seeded with `seed`. Endpoints that share a
/// hub move together so hubs survive.
pub fn jitter<T: Scalar>(curves: &[Polyline<T>], seed: u64, magnitude: T) -> Vec<Polyline<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = default_tolerance(curves);
    let mut hub_offsets: Vec<(Point<T>, Point<T>)> = Vec::new();
    let draw = |rng: &mut ChaCha8Rng| {
        let m = magnitude.to_f64().unwrap();
        let dx: f64 = rng.gen_range(-m..=m);
        let dy: f64 = rng.gen_range(-m..=m);
        Point::new(lit::<T>(dx), lit::<T>(dy))
    };
    let mut out = Vec::with_capacity(curves.len());
    for c in curves {
        let n = c.points.len();
        let mut points = Vec::with_capacity(n);
        for (i, &p) in c.points.iter().enumerate() {
            let offset = if i == 0 || i + 1 == n {
                match hub_offsets.iter().find(|(h, _)| h.dist(p) <= eps) {
                    Some(&(_, o)) => o,
                    None => {
                        let o = draw(&mut rng);
                        hub_offsets.push((p, o));
                        o
                    }
                }
            } else {
                draw(&mut rng)
            };
            points.push(p.add(offset));
        }
        out.push(Polyline { id: c.id, points });
    }
    out
}

/// Meetings grouped per unordered pair, for reports.
pub fn meetings_by_pair<T>(meetings: &[GeometricMeeting<T>]) -> BTreeMap<(CurveId, CurveId), usize> {
    let mut out = BTreeMap::new();
    for m in meetings {
        *out.entry(m.pair).or_insert(0) += 1;
    }
    out
}
