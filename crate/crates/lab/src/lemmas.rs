//! Per-family checks: the crossing position of touch-equivalent pairs and
//! the touching-count probe.

use serde::{Deserialize, Serialize};
use touchgrid::quasigrid::touch_class_of;

use crate::enumerate::{enumerate_template, MeetRule, Slot, Template};
use touchgrid::{
    build_arrangement, validate_family, ArrangementError, CombinatorialFamily, CurveId, HubId,
    MeetingKind,
};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "reason", rename_all = "snake_case")]
pub enum PairViolation {
    /// The pair does not meet exactly once.
    MeetingCount { count: usize },
    Touching,
    /// The crossing lies before both touch points, or after both.
    SameParts { first: bool },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lemma32Report {
    pub g: CurveId,
    pub pairs_checked: usize,
    pub violations: Vec<(CurveId, CurveId, PairViolation)>,
}

impl Lemma32Report {
    pub fn conforms(&self) -> bool {
        self.violations.is_empty()
    }
}

/// For every pair of curves touching `g` in the same class and sharing
/// both hubs `A != B`: they cross exactly once, joining the part of one
/// before its touch with `g` to the part of the other after it.
pub fn check_lemma32(family: &CombinatorialFamily, g: CurveId) -> Lemma32Report {
    let mut report = Lemma32Report { g, pairs_checked: 0, violations: Vec::new() };
    if g.index() >= family.len() {
        return report;
    }
    let touchers: Vec<CurveId> = family
        .curve_ids()
        .filter(|&c| c != g && touch_class_of(family, g, c).is_some())
        .filter(|&c| !family.curve(c).is_closed() && family.meeting_count(g, c) == 1)
        .collect();
    for (i, &a) in touchers.iter().enumerate() {
        for &b in &touchers[i + 1..] {
            let (ca, cb) = (family.curve(a), family.curve(b));
            if ca.source != cb.source
                || ca.target != cb.target
                || touch_class_of(family, g, a) != touch_class_of(family, g, b)
            {
                continue;
            }
            report.pairs_checked += 1;
            let count = family.meeting_count(a, b);
            if count != 1 {
                report.violations.push((a, b, PairViolation::MeetingCount { count }));
                continue;
            }
            if family.kind_between(a, b) != Some(MeetingKind::Crossing) {
                report.violations.push((a, b, PairViolation::Touching));
                continue;
            }
            let q = family.unique_meeting(a, b).unwrap();
            let first = |c: CurveId| {
                let cc = family.curve(c);
                let touch = family.unique_meeting(g, c).unwrap();
                cc.position_of(q).unwrap() < cc.position_of(touch).unwrap()
            };
            let (fa, fb) = (first(a), first(b));
            if fa == fb {
                report.violations.push((a, b, PairViolation::SameParts { first: fa }));
            }
        }
    }
    report
}

/// Counts and normalised ratios for one family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundProbe {
    pub n: usize,
    pub t_c: usize,
    pub touchings: usize,
    pub crossings: usize,
    pub t_over_n: f64,
    pub t_over_tc_n: f64,
    pub t_over_tc2_n: f64,
    pub intersecting: bool,
    /// Some hub holds an endpoint of every curve.
    pub grounded: bool,
    /// Two hubs, every curve running between them.
    pub double_grounded: bool,
}

fn ratio(x: usize, d: usize) -> f64 {
    if d == 0 {
        0.0
    } else {
        x as f64 / d as f64
    }
}

pub fn probe_bounds(family: &CombinatorialFamily) -> Result<BoundProbe, ArrangementError> {
    let arr = build_arrangement(family)?;
    let counts = family.count_meetings();
    let intersecting = validate_family(family)?.is_intersecting;
    let n = family.len();
    let (t, t_c) = (counts.touchings, arr.t_c);
    let on = |h: HubId| family.curves.iter().all(|c| c.source == h || c.target == h);
    let grounded = n > 0 && family.hubs.iter().any(|h| on(h.id));
    let double_grounded = n > 0 && {
        let (s, e) = (family.curves[0].source, family.curves[0].target);
        s != e
            && family
                .curves
                .iter()
                .all(|c| (c.source == s && c.target == e) || (c.source == e && c.target == s))
    };
    Ok(BoundProbe {
        n,
        t_c,
        touchings: t,
        crossings: counts.crossings,
        t_over_n: ratio(t, n),
        t_over_tc_n: ratio(t, t_c * n),
        t_over_tc2_n: ratio(t, t_c * t_c * n),
        intersecting,
        grounded,
        double_grounded,
    })
}

/// Realizable families `g` (curve 0) plus `h` curves (1..=h) from `A` to
/// `B`, all touching `g` in one common class, any two curves meeting at
/// most once (`closed`: `A = B` and every pair meets exactly once). The
/// ends of `g` range over every coincidence pattern with `A` and `B`.
/// Returns `(pattern name, family)` pairs, one per class.
pub fn touch_equivalent_families(h: usize, closed: bool) -> Vec<(String, CombinatorialFamily)> {
    let hh = if closed { MeetRule::ONCE } else { MeetRule::ANY };
    let rules = vec![
        vec![MeetRule::NEVER, MeetRule::NEVER],
        vec![MeetRule::TOUCH, hh],
    ];
    let (a, b) = (0, if closed { 0 } else { 1 });
    let mut patterns = std::collections::BTreeSet::new();
    for x in [a, b, 10] {
        for y in [a, b, 10, 11] {
            patterns.insert((x, y));
        }
    }
    let name = |l: u32| match l {
        0 => "A",
        1 => "B",
        _ => "F",
    };
    let g = CurveId(0);
    let same_class = |f: &CombinatorialFamily, level: usize| {
        let first = touch_class_of(f, g, CurveId(1));
        (2..level).all(|i| touch_class_of(f, g, CurveId(i)) == first)
    };
    let mut out = Vec::new();
    for (x, y) in patterns {
        let mut slots = vec![Slot { source: x, target: y, role: 0 }];
        slots.extend((0..h).map(|_| Slot { source: a, target: b, role: 1 }));
        let template = Template {
            slots,
            rules: rules.clone(),
            max_meetings: usize::MAX,
            reflection: true,
            reversal: false,
        };
        let (states, _) = enumerate_template(&template, &same_class);
        let label = format!("g={}{}", name(x), name(y));
        out.extend(states.into_iter().map(|s| (label.clone(), s.family)));
    }
    out
}
