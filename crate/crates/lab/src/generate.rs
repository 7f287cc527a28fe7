//! Constructed families: the ladder-shaped quasi-grid and its variants.

use serde::{Deserialize, Serialize};
use touchgrid::quasigrid::TouchClass;
use touchgrid::{CombinatorialFamily, CurveId, CurveSpec, HubEnd, MeetingEnd};

/// Where the `c_j` begin and end.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HubPattern {
    /// `A != B`, both distinct from the ends of `g`.
    Distinct,
    /// `A = B`: every `c_j` is a closed curve.
    Closed,
}

/// `g` (curve 0, hubs `X -> Y`) touched by `c_1..c_k` (curves `1..=k`, hubs
/// `A -> B`) in the given class. The `c_j` cross each other in ladder order:
/// along `c_j` the crossings with `c_1..c_{j-1}` come first, then the touch
/// with `g`, then the crossings with `c_{j+1}..c_k`.
///
/// # Panics
/// If `k == 0`.
pub fn generate_canonical_quasigrid(
    k: usize,
    class: TouchClass,
    hubs: HubPattern,
) -> CombinatorialFamily {
    assert!(k >= 1, "a quasi-grid needs at least one curve");
    let (x, y, a) = (0, 1, 2);
    let b = match hubs {
        HubPattern::Distinct => 3,
        HubPattern::Closed => a,
    };

    // touch P_i is meeting i-1; crossings follow in (i, j) order
    let mut rotations: Vec<[MeetingEnd; 4]> = Vec::new();
    for i in 1..=k {
        rotations.push([
            MeetingEnd::incoming(0),
            MeetingEnd::incoming(i),
            MeetingEnd::outgoing(i),
            MeetingEnd::outgoing(0),
        ]);
    }
    let mut cross = vec![vec![usize::MAX; k + 1]; k + 1];
    for i in 1..=k {
        for j in i + 1..=k {
            cross[i][j] = rotations.len();
            cross[j][i] = rotations.len();
            rotations.push([
                MeetingEnd::incoming(i),
                MeetingEnd::incoming(j),
                MeetingEnd::outgoing(i),
                MeetingEnd::outgoing(j),
            ]);
        }
    }

    let mut curves = vec![CurveSpec::new(x, y, &(0..k).collect::<Vec<_>>())];
    for j in 1..=k {
        let events: Vec<usize> =
            (1..=k).map(|i| if i == j { j - 1 } else { cross[i][j] }).collect();
        curves.push(CurveSpec::new(a, b, &events));
    }

    let starts: Vec<HubEnd> = (1..=k).rev().map(HubEnd::start).collect();
    let ends: Vec<HubEnd> = (1..=k).rev().map(HubEnd::end).collect();
    let mut hub_rotations = vec![vec![HubEnd::start(0)], vec![HubEnd::end(0)]];
    match hubs {
        HubPattern::Distinct => {
            hub_rotations.push(starts);
            hub_rotations.push(ends);
        }
        HubPattern::Closed => hub_rotations.push(ends.into_iter().chain(starts).collect()),
    }

    let family = CombinatorialFamily::assemble(curves, rotations, hub_rotations)
        .expect("ladder construction is well formed");
    let all_c: Vec<CurveId> = (1..=k).map(CurveId).collect();
    match class {
        TouchClass::GUpC => family,
        TouchClass::OppositeLeft => family.reverse_curve(CurveId(0)),
        TouchClass::OppositeRight => reverse_each(&family, &all_c),
        TouchClass::CUpG => reverse_each(&family.reverse_curve(CurveId(0)), &all_c),
    }
}

fn reverse_each(family: &CombinatorialFamily, curves: &[CurveId]) -> CombinatorialFamily {
    curves.iter().fold(family.clone(), |f, &c| f.reverse_curve(c))
}

/// Grounded family: every curve starts at hub 0 (the contracted ground).
/// The `c_j` of the ladder with `g`'s start also moved onto the ground.
pub fn generate_grounded_ladder(k: usize) -> CombinatorialFamily {
    assert!(k >= 1);
    let mut rotations: Vec<[MeetingEnd; 4]> = Vec::new();
    let mut cross = vec![vec![usize::MAX; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            cross[i][j] = rotations.len();
            cross[j][i] = rotations.len();
            rotations.push([
                MeetingEnd::incoming(i),
                MeetingEnd::incoming(j),
                MeetingEnd::outgoing(i),
                MeetingEnd::outgoing(j),
            ]);
        }
    }
    // pseudolines from one ground: c_j crosses the others in index order
    let curves: Vec<CurveSpec> = (0..k)
        .map(|j| {
            let events: Vec<usize> = (0..k).filter(|&i| i != j).map(|i| cross[i][j]).collect();
            CurveSpec::new(0, j + 1, &events)
        })
        .collect();
    let mut hubs = vec![(0..k).rev().map(HubEnd::start).collect::<Vec<_>>()];
    hubs.extend((0..k).map(|j| vec![HubEnd::end(j)]));
    CombinatorialFamily::assemble(curves, rotations, hubs).expect("well formed")
}
