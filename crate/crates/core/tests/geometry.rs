mod common;

use proptest::prelude::*;
use touchgrid::geometry::{classify_geometric, ingest, intersect_all, GeometryError, Ray};
use touchgrid::quasigrid::{decompose_all, decompose_open, verify_quasi_grid};
use touchgrid::{
    validate_family, CurveId, Direction, MeetingKind, Passage, Point64, Polyline32, Polyline64, Side,
};

fn ray(curve: usize, passage: Passage, deg: f64) -> Ray<f64> {
    Ray { curve: CurveId(curve), passage, angle: deg.to_radians() }
}

#[test]
fn diagonal_segments_cross_at_centre() {
    let curves = vec![
        Polyline64::new(0, &[(0.0, 0.0), (2.0, 2.0)]),
        Polyline64::new(1, &[(0.0, 2.0), (2.0, 0.0)]),
    ];
    let ms = intersect_all(&curves, 1e-9).unwrap();
    assert_eq!(ms.len(), 1);
    assert_eq!(ms[0].kind, MeetingKind::Crossing);
    assert!((ms[0].location.x - 1.0).abs() < 1e-12 && (ms[0].location.y - 1.0).abs() < 1e-12);
    let (f, _) = ingest(&curves, None).unwrap();
    assert_eq!(f.curves[0].events.len(), 1);
    assert_eq!(f.curves[1].events[0].kind, MeetingKind::Crossing);
}

#[test]
fn apex_on_segment_touches() {
    let curves = vec![
        Polyline64::new(0, &[(0.0, 0.0), (1.0, 1.0), (2.0, 0.0)]),
        Polyline64::new(1, &[(0.0, 1.0), (2.0, 1.0)]),
    ];
    let ms = intersect_all(&curves, 1e-9).unwrap();
    assert_eq!(ms.len(), 1);
    assert!(ms[0].kind.is_touch());
}

#[test]
fn parallel_segments_never_meet() {
    let curves = vec![
        Polyline64::new(0, &[(0.0, 0.0), (2.0, 0.0)]),
        Polyline64::new(1, &[(0.0, 1.0), (2.0, 1.0)]),
    ];
    assert!(intersect_all(&curves, 1e-9).unwrap().is_empty());
}

#[test]
fn ray_frames() {
    let at = Point64::new(0.0, 0.0);
    let alt = [ray(0, Passage::In, 0.0), ray(0, Passage::Out, 180.0), ray(1, Passage::In, 90.0), ray(1, Passage::Out, 270.0)];
    assert_eq!(classify_geometric(&alt, at).unwrap().1, MeetingKind::Crossing);
    let grouped = [ray(0, Passage::In, 170.0), ray(0, Passage::Out, 10.0), ray(1, Passage::In, 190.0), ray(1, Passage::Out, 350.0)];
    assert_eq!(
        classify_geometric(&grouped, at).unwrap().1,
        MeetingKind::Touch { side: Side::Left, direction: Direction::Same }
    );
    let same = [ray(0, Passage::In, 10.0), ray(0, Passage::Out, 10.0), ray(1, Passage::In, 90.0), ray(1, Passage::Out, 270.0)];
    assert!(matches!(classify_geometric(&same, at), Err(GeometryError::TangencyUnresolvable { .. })));
}

#[test]
fn overlap_and_self_crossing_are_errors() {
    let overlap = vec![
        Polyline64::new(0, &[(0.0, 0.0), (2.0, 0.0)]),
        Polyline64::new(1, &[(1.0, 0.0), (3.0, 0.0)]),
    ];
    assert!(matches!(ingest(&overlap, None), Err(GeometryError::NonFiniteIntersection { .. })));
    let bow = vec![Polyline64::new(0, &[(0.0, 0.0), (2.0, 2.0), (2.0, 0.0), (0.0, 2.0)])];
    assert!(matches!(ingest(&bow, None), Err(GeometryError::SelfIntersection { .. })));
}

#[test]
fn fig1_ingests_to_a_quasi_grid() {
    let (f, _) = ingest(&common::polylines("fig1.json"), None).unwrap();
    assert!(validate_family(&f).unwrap().is_intersecting);
    let c = f.count_meetings();
    assert_eq!((c.touchings, c.crossings), (3, 3));
    let h: Vec<CurveId> = (1..=3).map(CurveId).collect();
    let cert = verify_quasi_grid(&h, CurveId(0), &f).unwrap();
    assert_eq!(cert.len(), 3);
    assert_eq!(decompose_all(CurveId(0), &f).unwrap().parts.len(), 1);
}

#[test]
fn fig3_splits_in_two() {
    let (f, _) = ingest(&common::polylines("fig3.json"), None).unwrap();
    let h: Vec<CurveId> = (1..=4).map(CurveId).collect();
    assert!(verify_quasi_grid(&h, CurveId(0), &f).is_err());
    let r = decompose_open(&f, CurveId(0), &h).unwrap();
    assert_eq!(r.parts.len(), 2);
    let mut parts: Vec<Vec<CurveId>> = r.parts.iter().map(|p| {
        let mut c = p.curves.clone();
        c.sort();
        c
    }).collect();
    parts.sort();
    assert_eq!(parts, vec![vec![CurveId(1), CurveId(2)], vec![CurveId(3), CurveId(4)]]);
    assert_eq!(decompose_all(CurveId(0), &f).unwrap().parts.len(), 2);
}

#[test]
fn single_and_double_precision_agree() {
    for name in ["fig1.json", "fig3.json", "mixed4.json"] {
        let wide = common::polylines(name);
        let narrow: Vec<Polyline32> = wide
            .iter()
            .map(|c| {
                let pts: Vec<(f64, f64)> = c.points.iter().map(|p| (p.x, p.y)).collect();
                Polyline32::new(c.id.index(), &pts)
            })
            .collect();
        let (a, _) = ingest(&wide, None).unwrap();
        let (b, _) = ingest(&narrow, None).unwrap();
        assert_eq!(a, b, "{name}");
    }
}

proptest! {
    #[test]
    fn segments_meet_at_most_once(curves in common::segments(8)) {
        let Ok(ms) = intersect_all(&curves, 1e-9) else { return Ok(()) };
        let mut pairs: Vec<_> = ms.iter().map(|m| m.pair).collect();
        let n = pairs.len();
        pairs.sort();
        pairs.dedup();
        prop_assert_eq!(pairs.len(), n);
        prop_assert!(ms.iter().all(|m| m.kind == MeetingKind::Crossing));
    }

    #[test]
    fn vee_apexes_touch_g(curves in common::touching_scene()) {
        let Ok((f, meetings)) = ingest(&curves, None) else { return Ok(()) };
        let vees = curves.iter().filter(|c| c.points.len() == 3).count();
        let touches_g = meetings.iter().filter(|m| m.pair.0 == CurveId(0) && m.kind.is_touch()).count();
        prop_assert_eq!(touches_g, vees);
        prop_assert_eq!(f.meetings.len(), meetings.len());
    }
}
