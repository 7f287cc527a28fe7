//! SVG 1.1 drawing of a traced family: shaded faces, curves, hubs, and
//! meetings (touchings as rings, crossings as crosses).
//!
//! Geometric inputs are drawn at their coordinates. Combinatorial inputs
//! get a barycentric (Tutte-style) placement per component, with every
//! section bent through its own midpoint vertex.

use std::collections::BTreeMap;
use std::fmt::Write;

use touchgrid::arrangement::{Arrangement, Dart, Node};
use touchgrid::{CombinatorialFamily, GeometricMeeting64, Polyline64};

type P = (f64, f64);

/// Points of every section, in the curve's direction.
struct Drawing {
    sections: Vec<Vec<P>>,
    nodes: Vec<P>,
}

fn fmt(x: f64) -> String {
    let s = format!("{x:.3}");
    if s == "-0.000" {
        "0.000".into()
    } else {
        s
    }
}

fn arclength_points(points: &[P]) -> Vec<f64> {
    let mut acc = vec![0.0];
    for w in points.windows(2) {
        let d = ((w[1].0 - w[0].0).powi(2) + (w[1].1 - w[0].1).powi(2)).sqrt();
        acc.push(acc.last().unwrap() + d);
    }
    acc
}

fn point_at(points: &[P], acc: &[f64], s: f64) -> P {
    let i = acc.partition_point(|&a| a <= s).clamp(1, points.len() - 1);
    let (a, b) = (points[i - 1], points[i]);
    let len = acc[i] - acc[i - 1];
    let t = if len > 0.0 { ((s - acc[i - 1]) / len).clamp(0.0, 1.0) } else { 0.0 };
    (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
}

/// The part of a polyline between two arclengths.
fn cut(points: &[P], acc: &[f64], s0: f64, s1: f64) -> Vec<P> {
    let mut out = vec![point_at(points, acc, s0)];
    for (p, &a) in points.iter().zip(acc) {
        if a > s0 && a < s1 {
            out.push(*p);
        }
    }
    out.push(point_at(points, acc, s1));
    out
}

fn geometric(
    family: &CombinatorialFamily,
    arr: &Arrangement,
    curves: &[Polyline64],
    meetings: &[GeometricMeeting64],
) -> Drawing {
    let g = &arr.graph;
    let mut sections = Vec::with_capacity(g.sections.len());
    for c in &family.curves {
        let pts: Vec<P> = curves[c.id.index()].points.iter().map(|p| (p.x, p.y)).collect();
        let acc = arclength_points(&pts);
        let mut cuts = vec![0.0];
        for e in &c.events {
            let gm = &meetings[e.meeting.index()];
            cuts.push(if gm.pair.0 == c.id { gm.params.0 } else { gm.params.1 });
        }
        cuts.push(*acc.last().unwrap());
        for w in cuts.windows(2) {
            sections.push(cut(&pts, &acc, w[0], w[1]));
        }
    }
    let mut nodes = vec![(0.0, 0.0); g.nodes.len()];
    for (s, sec) in g.sections.iter().enumerate() {
        nodes[sec.from] = sections[s][0];
        nodes[sec.to] = *sections[s].last().unwrap();
    }
    Drawing { sections, nodes }
}

fn combinatorial(arr: &Arrangement) -> Drawing {
    let g = &arr.graph;
    let n = g.nodes.len();
    let ns = g.sections.len();
    // layout vertices: nodes, then one midpoint per section
    let total = n + ns;
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
    for (s, sec) in g.sections.iter().enumerate() {
        adj[n + s].push(sec.from);
        adj[n + s].push(sec.to);
        adj[sec.from].push(n + s);
        adj[sec.to].push(n + s);
    }
    let mut pos = vec![(0.0, 0.0); total];
    let mut fixed = vec![false; total];
    let comps = arr.components.len();
    for comp in 0..comps {
        // outer cycle: the longest face of the component
        let outer = arr
            .faces
            .iter()
            .enumerate()
            .filter(|(_, f)| arr.component_of_node[g.origin(f[0])] == comp)
            .max_by_key(|(i, f)| (f.len(), std::cmp::Reverse(*i)))
            .map(|(_, f)| f.clone())
            .unwrap_or_default();
        let mut ring: Vec<usize> = Vec::new();
        for &d in &outer {
            for v in [g.origin(d), n + d / 2] {
                if !ring.contains(&v) {
                    ring.push(v);
                }
            }
        }
        let cx = comp as f64 * 260.0;
        let k = ring.len().max(1) as f64;
        for (i, &v) in ring.iter().enumerate() {
            // faces are traced with the face on the left, the outer one
            // clockwise, so walk the circle clockwise
            let a = -2.0 * std::f64::consts::PI * i as f64 / k;
            pos[v] = (cx + 100.0 * a.cos(), 100.0 * a.sin());
            fixed[v] = true;
        }
        for v in 0..total {
            let node = if v < n { v } else { g.sections[v - n].from };
            if arr.component_of_node[node] == comp && !fixed[v] {
                pos[v] = (cx, 0.0);
            }
        }
    }
    for _ in 0..2000 {
        for v in 0..total {
            if fixed[v] || adj[v].is_empty() {
                continue;
            }
            let (mut x, mut y) = (0.0, 0.0);
            for &u in &adj[v] {
                x += pos[u].0;
                y += pos[u].1;
            }
            let k = adj[v].len() as f64;
            pos[v] = (x / k, y / k);
        }
    }
    // separate parallel sections and loops
    let mut bundles: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (s, sec) in g.sections.iter().enumerate() {
        bundles.entry((sec.from.min(sec.to), sec.from.max(sec.to))).or_default().push(s);
    }
    for ((a, b), list) in bundles {
        if list.len() < 2 && a != b {
            continue;
        }
        let (pa, pb) = (pos[a], pos[b]);
        let (dx, dy) = (pb.0 - pa.0, pb.1 - pa.1);
        let len = (dx * dx + dy * dy).sqrt();
        let (nx, ny) = if len > 1e-9 { (-dy / len, dx / len) } else { (0.0, 1.0) };
        let spread = if a == b { 18.0 } else { 0.25 * len.max(8.0) };
        for (i, &s) in list.iter().enumerate() {
            if fixed[n + s] {
                continue;
            }
            let off = if a == b {
                spread * (i + 1) as f64
            } else {
                spread * (i as f64 - (list.len() - 1) as f64 / 2.0)
            };
            let mid = ((pa.0 + pb.0) / 2.0, (pa.1 + pb.1) / 2.0);
            pos[n + s] = (mid.0 + off * nx, mid.1 + off * ny);
        }
    }
    let sections = g
        .sections
        .iter()
        .enumerate()
        .map(|(s, sec)| vec![pos[sec.from], pos[n + s], pos[sec.to]])
        .collect();
    Drawing { sections, nodes: pos[..n].to_vec() }
}

fn face_polygon(drawing: &Drawing, face: &[Dart]) -> Vec<P> {
    let mut out = Vec::new();
    for &d in face {
        let sec = &drawing.sections[d / 2];
        let mut pts = sec.clone();
        if d % 2 == 1 {
            pts.reverse();
        }
        out.extend_from_slice(&pts[..pts.len() - 1]);
    }
    out
}

fn signed_area(p: &[P]) -> f64 {
    let mut a = 0.0;
    for i in 0..p.len() {
        let (x0, y0) = p[i];
        let (x1, y1) = p[(i + 1) % p.len()];
        a += x0 * y1 - x1 * y0;
    }
    a / 2.0
}

const PALETTE: [&str; 8] =
    ["#e8d5b7", "#b7d5e8", "#d5e8b7", "#e8b7d5", "#c9c0e8", "#e8e0b0", "#b0e8d8", "#e8c4b0"];

/// Renders the traced family. `geometry` carries the input polylines and
/// the meetings found on them, indexed like the family's meetings.
pub fn render(
    family: &CombinatorialFamily,
    arr: &Arrangement,
    geometry: Option<(&[Polyline64], &[GeometricMeeting64])>,
) -> String {
    let drawing = match geometry {
        Some((curves, meetings)) => geometric(family, arr, curves, meetings),
        None => combinatorial(arr),
    };
    // y grows downwards in SVG; flip so counter-clockwise stays so
    let flip = |p: P| (p.0, -p.1);
    let all: Vec<P> = drawing.sections.iter().flatten().map(|&p| flip(p)).collect();
    let (mut x0, mut y0, mut x1, mut y1) = (f64::MAX, f64::MAX, f64::MIN, f64::MIN);
    for &(x, y) in &all {
        x0 = x0.min(x);
        y0 = y0.min(y);
        x1 = x1.max(x);
        y1 = y1.max(y);
    }
    if all.is_empty() {
        (x0, y0, x1, y1) = (0.0, 0.0, 1.0, 1.0);
    }
    let pad = 0.08 * (x1 - x0).max(y1 - y0).max(1.0);
    let unit = (x1 - x0).max(y1 - y0).max(1.0) / 200.0;
    let mut s = String::new();
    let _ = writeln!(s, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="{} {} {} {}">"#,
        fmt(x0 - pad),
        fmt(y0 - pad),
        fmt(x1 - x0 + 2.0 * pad),
        fmt(y1 - y0 + 2.0 * pad)
    );
    let _ = writeln!(
        s,
        "<style>.curve{{fill:none;stroke:#222;stroke-width:{w}}} .touch{{fill:none;stroke:#c00;stroke-width:{w}}} .crossing{{stroke:#06c;stroke-width:{w}}} .hub{{fill:#222}} text{{font-size:{f}px;font-family:sans-serif}}</style>",
        w = fmt(unit * 0.8),
        f = fmt(unit * 6.0)
    );

    let _ = writeln!(s, r#"<g id="faces">"#);
    let mut colour = 0;
    for (i, face) in arr.faces.iter().enumerate() {
        let poly = face_polygon(&drawing, face);
        if i == arr.outer_face || signed_area(&poly) <= 0.0 {
            continue;
        }
        let d: Vec<String> = poly.iter().map(|&p| flip(p)).map(|(x, y)| format!("{},{}", fmt(x), fmt(y))).collect();
        let has_end = arr.region_of_face.get(i).is_some_and(|r| arr.hub_region.contains(r));
        let _ = writeln!(
            s,
            r#"<path id="face-{i}" class="face{}" fill="{}" fill-opacity="0.6" d="M {} Z"/>"#,
            if has_end { " endpoint-face" } else { "" },
            PALETTE[colour % PALETTE.len()],
            d.join(" L ")
        );
        colour += 1;
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="curves">"#);
    let g = &arr.graph;
    for c in &family.curves {
        let first = g.section_index(c.id, 0);
        let mut pts: Vec<P> = Vec::new();
        for k in 0..g.section_count(c.id) {
            let sec = &drawing.sections[first + k];
            let skip = usize::from(k > 0);
            pts.extend_from_slice(&sec[skip..]);
        }
        let d: Vec<String> = pts.iter().map(|&p| flip(p)).map(|(x, y)| format!("{},{}", fmt(x), fmt(y))).collect();
        let _ = writeln!(s, r#"<path id="curve-{}" class="curve" d="M {}"/>"#, c.id.index(), d.join(" L "));
        if let Some(&p) = pts.get(pts.len() / 2) {
            let (x, y) = flip(p);
            let _ = writeln!(s, r#"<text x="{}" y="{}">{}</text>"#, fmt(x + unit), fmt(y - unit), c.id);
        }
    }
    let _ = writeln!(s, "</g>");

    let _ = writeln!(s, r#"<g id="meetings">"#);
    for (v, node) in g.nodes.iter().enumerate() {
        let (x, y) = flip(drawing.nodes[v]);
        let r = unit * 2.5;
        match node {
            Node::Meeting(m) => {
                let (a, _) = family.meeting(*m).curves();
                let touch = family.curve(a).events.iter().any(|e| e.meeting == *m && e.kind.is_touch());
                if touch {
                    let _ = writeln!(
                        s,
                        r#"<circle id="meeting-{}" class="touch" cx="{}" cy="{}" r="{}"/>"#,
                        m.index(),
                        fmt(x),
                        fmt(y),
                        fmt(r)
                    );
                } else {
                    let _ = writeln!(
                        s,
                        r#"<path id="meeting-{}" class="crossing" d="M {},{} L {},{} M {},{} L {},{}"/>"#,
                        m.index(),
                        fmt(x - r),
                        fmt(y - r),
                        fmt(x + r),
                        fmt(y + r),
                        fmt(x - r),
                        fmt(y + r),
                        fmt(x + r),
                        fmt(y - r)
                    );
                }
            }
            Node::Hub(h) => {
                let _ = writeln!(
                    s,
                    r#"<rect id="hub-{}" class="hub" x="{}" y="{}" width="{}" height="{}"/>"#,
                    h.index(),
                    fmt(x - r / 2.0),
                    fmt(y - r / 2.0),
                    fmt(r),
                    fmt(r)
                );
            }
        }
    }
    let _ = writeln!(s, "</g>");
    let _ = writeln!(s, "</svg>");
    s
}
