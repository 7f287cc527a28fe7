use touchgrid::arrangement::is_realizable;
use touchgrid::quasigrid::{decompose_closed, decompose_open, TouchClass, TouchingGraph};
use touchgrid::{
    build_arrangement, ArrangementError, CombinatorialFamily, CurveId, CurveSpec, HubEnd, MeetingEnd,
};
use touchgrid_lab::lemmas::{touch_equivalent_families, PairViolation};
use touchgrid_lab::oracle::min_quasi_grid_partition;
use touchgrid_lab::{
    check_lemma32, enumerate_families, generate_canonical_quasigrid, probe_bounds, EndpointPattern,
    EnumerationLimits, HubPattern,
};

fn members(f: &CombinatorialFamily) -> Vec<CurveId> {
    (1..f.len()).map(CurveId).collect()
}

#[test]
fn ladder_pairs_conform() {
    for class in TouchClass::ALL {
        let f = generate_canonical_quasigrid(4, class, HubPattern::Distinct);
        let r = check_lemma32(&f, CurveId(0));
        assert_eq!(r.pairs_checked, 6);
        assert!(r.conforms(), "{class:?}");
    }
}

#[test]
fn crossing_on_both_first_parts_is_flagged() {
    let touch = |c: usize| [MeetingEnd::incoming(0), MeetingEnd::incoming(c), MeetingEnd::outgoing(c), MeetingEnd::outgoing(0)];
    let q = [MeetingEnd::incoming(1), MeetingEnd::incoming(2), MeetingEnd::outgoing(1), MeetingEnd::outgoing(2)];
    let f = CombinatorialFamily::assemble(
        vec![CurveSpec::new(0, 1, &[0, 1]), CurveSpec::new(2, 3, &[2, 0]), CurveSpec::new(2, 3, &[2, 1])],
        vec![touch(1), touch(2), q],
        vec![
            vec![HubEnd::start(0)],
            vec![HubEnd::end(0)],
            vec![HubEnd::start(1), HubEnd::start(2)],
            vec![HubEnd::end(1), HubEnd::end(2)],
        ],
    )
    .unwrap();
    let r = check_lemma32(&f, CurveId(0));
    assert_eq!(r.violations, vec![(CurveId(1), CurveId(2), PairViolation::SameParts { first: true })]);
    assert!(matches!(build_arrangement(&f), Err(ArrangementError::NotRealizable { .. })));
}

#[test]
fn single_curve_conforms_vacuously() {
    let f = generate_canonical_quasigrid(1, TouchClass::GUpC, HubPattern::Distinct);
    let (solo, _) = f.subfamily(&[CurveId(1)]);
    let r = check_lemma32(&solo, CurveId(0));
    assert_eq!(r.pairs_checked, 0);
    assert!(r.conforms());
}

#[test]
fn touch_equivalent_pairs_conform() {
    for h in 2..=4 {
        for (_, f) in touch_equivalent_families(h, false) {
            assert!(check_lemma32(&f, CurveId(0)).conforms());
        }
    }
}

#[test]
fn probe_examples() {
    let f = generate_canonical_quasigrid(5, TouchClass::GUpC, HubPattern::Distinct);
    let p = probe_bounds(&f).unwrap();
    assert_eq!((p.n, p.touchings, p.crossings), (6, 5, 10));
    assert!((p.t_over_n - 5.0 / 6.0).abs() < 1e-12);
    let pair = enumerate_families(&EnumerationLimits::new(2, EndpointPattern::Distinct, true));
    let touching = pair.iter().find(|f| f.count_meetings().touchings == 1).unwrap();
    let p = probe_bounds(touching).unwrap();
    assert_eq!((p.touchings, p.crossings), (1, 0));
    assert!((p.t_over_n - 0.5).abs() < 1e-12);
}

#[test]
fn extremal_three_curve_families() {
    let mut best = 0;
    for p in [EndpointPattern::Distinct, EndpointPattern::Grounded, EndpointPattern::DoubleGrounded, EndpointPattern::Closed] {
        for f in enumerate_families(&EnumerationLimits::new(3, p, true)) {
            best = best.max(probe_bounds(&f).unwrap().touchings);
        }
    }
    // three pairwise touching curves are realizable
    assert_eq!(best, 3);
}

#[test]
fn open_decomposition_is_tight() {
    for h in 1..=4 {
        for (name, f) in touch_equivalent_families(h, false) {
            let hs = members(&f);
            let r = decompose_open(&f, CurveId(0), &hs).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(r.parts.len() <= 2);
            assert_eq!(Some(r.parts.len()), min_quasi_grid_partition(&f, CurveId(0), &hs), "{name}");
        }
    }
}

#[test]
fn closed_touching_graphs_are_thin() {
    for h in 1..=4 {
        for (name, f) in touch_equivalent_families(h, true) {
            assert!(is_realizable(&f));
            let hs = members(&f);
            assert!(TouchingGraph::of(&f, &hs).max_degree() <= 2, "{name}");
            let r = decompose_closed(&f, CurveId(0), &hs).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(r.parts.len() <= 12);
        }
    }
}

#[test]
fn pairwise_crossing_closed_family_needs_few_parts() {
    let f = generate_canonical_quasigrid(4, TouchClass::GUpC, HubPattern::Closed);
    let hs = members(&f);
    assert!(TouchingGraph::of(&f, &hs).edges.is_empty());
    let r = decompose_closed(&f, CurveId(0), &hs).unwrap();
    assert!(r.parts.len() <= 4);
    let (solo, _) = f.subfamily(&[CurveId(0), CurveId(1)]);
    assert_eq!(decompose_closed(&solo, CurveId(0), &[CurveId(1)]).unwrap().parts.len(), 1);
}

#[test]
fn closed_family_with_touching_members() {
    let found = (2..=4)
        .flat_map(|h| touch_equivalent_families(h, true))
        .find(|(_, f)| TouchingGraph::of(f, &members(f)).max_degree() == 2);
    let (name, f) = found.expect("some closed family has a member touching two others");
    let r = decompose_closed(&f, CurveId(0), &members(&f)).unwrap();
    assert!(r.parts.len() <= 12, "{name}");
}
