use proptest::prelude::*;
use touchgrid::arrangement::is_realizable;
use touchgrid::{validate_family, CurveId, MeetingKind};
use touchgrid_lab::canonical::decode;
use touchgrid_lab::oracle::oracle_class_count;
use touchgrid_lab::{canonical_form, enumerate_families, EndpointPattern, EnumerationLimits};

fn patterns() -> [EndpointPattern; 4] {
    [EndpointPattern::Distinct, EndpointPattern::Grounded, EndpointPattern::DoubleGrounded, EndpointPattern::Closed]
}

#[test]
fn two_curves_give_three_classes() {
    let fams = enumerate_families(&EnumerationLimits::new(2, EndpointPattern::Distinct, true));
    assert_eq!(fams.len(), 3);
    let touches = fams.iter().filter(|f| f.count_meetings().touchings == 1).count();
    assert_eq!(touches, 2);
    let crossing = fams.iter().find(|f| f.count_meetings().crossings == 1).unwrap();
    assert_eq!(crossing.kind_between(CurveId(0), CurveId(1)), Some(MeetingKind::Crossing));
}

#[test]
fn zero_curves_give_the_empty_family() {
    let fams = enumerate_families(&EnumerationLimits::new(0, EndpointPattern::Distinct, true));
    assert_eq!(fams.len(), 1);
    assert!(fams[0].is_empty());
}

#[test]
fn enumeration_matches_brute_force() {
    for p in patterns() {
        for n in 1..=3 {
            let fams = enumerate_families(&EnumerationLimits::new(n, p.clone(), true));
            assert_eq!(fams.len(), oracle_class_count(n, &p), "{p:?} n={n}");
        }
    }
}

#[test]
fn enumerated_families_are_valid_and_distinct() {
    for p in patterns() {
        let limits = EnumerationLimits::new(3, p.clone(), true);
        let sym = limits.template().symmetry();
        let fams = enumerate_families(&limits);
        let mut words: Vec<Vec<u32>> = fams.iter().map(|f| canonical_form(f, &sym)).collect();
        for f in &fams {
            assert!(is_realizable(f));
            assert!(validate_family(f).unwrap().is_intersecting);
        }
        words.sort();
        words.dedup();
        assert_eq!(words.len(), fams.len(), "{p:?}");
    }
}

#[test]
fn decoded_canonical_words_are_fixed_points() {
    let limits = EnumerationLimits::new(3, EndpointPattern::Distinct, true);
    let sym = limits.template().symmetry();
    for f in enumerate_families(&limits) {
        let w = canonical_form(&f, &sym);
        assert_eq!(canonical_form(&decode(&w), &sym), w);
    }
}

proptest! {
    #[test]
    fn canonical_form_is_a_class_invariant(pick in 0usize..91, perm in Just(vec![0usize, 1, 2]).prop_shuffle(), reflect: bool, reverse: bool) {
        let limits = EnumerationLimits::new(3, EndpointPattern::Distinct, true);
        let sym = limits.template().symmetry();
        let fams = enumerate_families(&limits);
        let f = &fams[pick % fams.len()];
        let mut g = f.relabel(&perm.iter().map(|&i| CurveId(i)).collect::<Vec<_>>());
        if reflect {
            g = g.reflect();
        }
        if reverse {
            g = g.reverse_all();
        }
        prop_assert_eq!(canonical_form(&g, &sym), canonical_form(f, &sym));
    }
}
