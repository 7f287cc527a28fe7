mod common;

use proptest::prelude::*;
use touchgrid::geometry::ingest;
use touchgrid::{
    classify_meeting, count_meetings, validate_family, CombinatorialFamily, CurveId, CurveSpec,
    Direction, HubEnd, MeetingEnd, MeetingKind, Passage, Side, Violation,
};

use Passage::{In, Out};

fn ends(v: [(usize, Passage); 4]) -> [MeetingEnd; 4] {
    v.map(|(c, p)| MeetingEnd::new(c, p))
}

fn singleton_hubs(n: usize) -> Vec<Vec<HubEnd>> {
    (0..n).flat_map(|c| [vec![HubEnd::start(c)], vec![HubEnd::end(c)]]).collect()
}

#[test]
fn double_crossing_pair_violates() {
    let f = CombinatorialFamily::assemble(
        vec![CurveSpec::new(0, 1, &[0, 1]), CurveSpec::new(2, 3, &[0, 1])],
        vec![ends([(0, In), (1, In), (0, Out), (1, Out)]), ends([(0, In), (1, Out), (0, Out), (1, In)])],
        singleton_hubs(2),
    )
    .unwrap();
    let r = validate_family(&f).unwrap();
    assert!(!r.is_pseudo_segment && !r.is_intersecting);
    assert_eq!(r.violations.len(), 1);
    assert!(matches!(r.violations[0], Violation::MultipleMeetings { count: 2, .. }));
}

#[test]
fn canonical_grid_is_intersecting() {
    let f = common::load("grid.json");
    assert_eq!(f.len(), 4);
    let r = validate_family(&f).unwrap();
    assert!(r.is_pseudo_segment && r.is_intersecting);
    let c = count_meetings(&f);
    assert_eq!((c.touchings, c.crossings), (3, 3));
}

#[test]
fn disjoint_pair_is_not_intersecting() {
    let f = CombinatorialFamily::assemble(
        vec![CurveSpec::new(0, 1, &[]), CurveSpec::new(2, 3, &[])],
        vec![],
        singleton_hubs(2),
    )
    .unwrap();
    let r = validate_family(&f).unwrap();
    assert!(r.is_pseudo_segment);
    assert!(!r.is_intersecting);
}

#[test]
fn empty_family_counts_nothing() {
    let c = count_meetings(&CombinatorialFamily::default());
    assert_eq!((c.touchings, c.crossings), (0, 0));
}

#[test]
fn classify_examples() {
    let g = CurveId(0);
    assert_eq!(
        classify_meeting(&ends([(0, In), (1, In), (1, Out), (0, Out)]), g).unwrap(),
        MeetingKind::Touch { side: Side::Left, direction: Direction::Same }
    );
    assert_eq!(
        classify_meeting(&ends([(0, In), (1, In), (0, Out), (1, Out)]), g).unwrap(),
        MeetingKind::Crossing
    );
    assert!(matches!(
        classify_meeting(&ends([(0, In), (0, Out), (1, In), (1, Out)]), g).unwrap(),
        MeetingKind::Touch { direction: Direction::Opposite, .. }
    ));
    assert!(classify_meeting(&ends([(0, In), (0, Out), (0, In), (1, Out)]), g).is_err());
}

fn any_rotation() -> impl Strategy<Value = [MeetingEnd; 4]> {
    Just(vec![(0, In), (0, Out), (1, In), (1, Out)])
        .prop_shuffle()
        .prop_map(|v| ends([v[0], v[1], v[2], v[3]]))
}

proptest! {
    #[test]
    fn classify_ignores_cyclic_shift(r in any_rotation(), k in 0usize..4, who in 0usize..2) {
        let mut s = r;
        s.rotate_left(k);
        prop_assert_eq!(classify_meeting(&r, CurveId(who)).unwrap(), classify_meeting(&s, CurveId(who)).unwrap());
    }

    #[test]
    fn mirrored_rotation_swaps_sides(r in any_rotation(), who in 0usize..2) {
        let mut m = r;
        m.reverse();
        let a = classify_meeting(&r, CurveId(who)).unwrap();
        prop_assert_eq!(classify_meeting(&m, CurveId(who)).unwrap(), a.reflect());
    }

    #[test]
    fn views_agree_up_to_role_swap(r in any_rotation()) {
        let a = classify_meeting(&r, CurveId(0)).unwrap();
        prop_assert_eq!(classify_meeting(&r, CurveId(1)).unwrap(), a.swap_roles());
    }

    #[test]
    fn stored_kinds_match_rotations(curves in common::touching_scene()) {
        let Ok((f, _)) = ingest(&curves, None) else { return Ok(()) };
        for c in &f.curves {
            for e in &c.events {
                prop_assert_eq!(classify_meeting(&f.meeting(e.meeting).rotation, c.id).unwrap(), e.kind);
            }
        }
    }

    #[test]
    fn pseudo_segment_property_is_hereditary(curves in common::touching_scene(), mask in any::<u16>()) {
        let Ok((f, _)) = ingest(&curves, None) else { return Ok(()) };
        let r = validate_family(&f).unwrap();
        prop_assume!(r.is_pseudo_segment);
        let keep: Vec<CurveId> = f.curve_ids().filter(|c| mask >> (c.index() % 16) & 1 == 1).collect();
        let (sub, _) = f.subfamily(&keep);
        prop_assert!(validate_family(&sub).unwrap().is_pseudo_segment);
    }

    #[test]
    fn intersecting_families_meet_pairwise(curves in common::segments(7)) {
        let Ok((f, _)) = ingest(&curves, None) else { return Ok(()) };
        let r = validate_family(&f).unwrap();
        prop_assert!(r.is_pseudo_segment);
        let n = f.len();
        let c = count_meetings(&f);
        if r.is_intersecting {
            prop_assert_eq!(c.touchings + c.crossings, n * (n - 1) / 2);
        } else {
            prop_assert!(c.touchings + c.crossings < n * (n - 1) / 2);
        }
    }
}
