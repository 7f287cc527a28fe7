//! Brute-force references: raw rotation systems filtered by Euler's
//! formula and quotiented by explicit symmetry orbits, and exhaustive
//! partitions into quasi-grids.

use std::collections::HashMap;

use touchgrid::arrangement::is_realizable;
use touchgrid::quasigrid::verify_quasi_grid_ordered;
use touchgrid::{CombinatorialFamily, CurveId, CurveSpec, HubEnd, MeetingEnd, Passage};

use crate::enumerate::{EndpointPattern, EnumerationLimits};

/// Every intersecting rotation system on `n` curves with endpoints shared
/// as `pattern` says: all event orders, all six local rotations per
/// meeting and all cyclic orders at every hub.
pub fn raw_intersecting_systems(n: usize, pattern: &EndpointPattern) -> Vec<CombinatorialFamily> {
    let mut pair_id = vec![vec![usize::MAX; n]; n];
    let mut pairs = Vec::new();
    for a in 0..n {
        for b in a + 1..n {
            pair_id[a][b] = pairs.len();
            pair_id[b][a] = pairs.len();
            pairs.push((a, b));
        }
    }
    let orders: Vec<Vec<Vec<usize>>> = (0..n)
        .map(|c| permutations(&(0..n).filter(|&o| o != c).map(|o| pair_id[c][o]).collect::<Vec<_>>()))
        .collect();
    let template = EnumerationLimits::new(n, pattern.clone(), true).template();
    let mut hub_of: Vec<u32> = Vec::new();
    let mut ends: Vec<Vec<HubEnd>> = Vec::new();
    let mut ids = Vec::with_capacity(n);
    for (c, slot) in template.slots.iter().enumerate() {
        let mut id = |label: u32, end: HubEnd| {
            let h = hub_of.iter().position(|&l| l == label).unwrap_or_else(|| {
                hub_of.push(label);
                ends.push(Vec::new());
                hub_of.len() - 1
            });
            ends[h].push(end);
            h
        };
        let s = id(slot.source, HubEnd::start(c));
        let t = id(slot.target, HubEnd::end(c));
        ids.push((s, t));
    }
    // cyclic orders: first end fixed
    let rings: Vec<Vec<Vec<HubEnd>>> = ends
        .iter()
        .map(|e| {
            permutations(&(1..e.len()).collect::<Vec<_>>())
                .into_iter()
                .map(|p| std::iter::once(e[0]).chain(p.into_iter().map(|i| e[i])).collect())
                .collect()
        })
        .collect();
    let hub_choices: Vec<Vec<Vec<HubEnd>>> = cartesian(&rings);

    let mut out = Vec::new();
    let mut choice = vec![0usize; n];
    loop {
        let curves: Vec<CurveSpec> =
            (0..n).map(|c| CurveSpec::new(ids[c].0, ids[c].1, &orders[c][choice[c]])).collect();
        for codes in 0..6usize.pow(pairs.len() as u32) {
            let mut x = codes;
            let rotations: Vec<[MeetingEnd; 4]> = pairs
                .iter()
                .map(|&(a, b)| {
                    let r = local_rotation(x % 6, a, b);
                    x /= 6;
                    r
                })
                .collect();
            for hubs in &hub_choices {
                let f = CombinatorialFamily::assemble(curves.clone(), rotations.clone(), hubs.clone())
                    .expect("raw system is well formed");
                out.push(f);
            }
        }
        // odometer over event orders
        let mut i = 0;
        loop {
            if i == n {
                return out;
            }
            choice[i] += 1;
            if choice[i] < orders[i].len() {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

fn local_rotation(code: usize, a: usize, b: usize) -> [MeetingEnd; 4] {
    let others = [
        MeetingEnd::outgoing(a),
        MeetingEnd::incoming(b),
        MeetingEnd::outgoing(b),
    ];
    let p = &permutations(&[0, 1, 2])[code];
    [MeetingEnd::incoming(a), others[p[0]], others[p[1]], others[p[2]]]
}

fn cartesian(choices: &[Vec<Vec<HubEnd>>]) -> Vec<Vec<Vec<HubEnd>>> {
    choices.iter().fold(vec![Vec::new()], |acc, options| {
        acc.iter()
            .flat_map(|prefix| {
                options.iter().map(move |o| {
                    let mut p = prefix.clone();
                    p.push(o.clone());
                    p
                })
            })
            .collect()
    })
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.is_empty() {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let x = rest.remove(i);
        for mut p in permutations(&rest) {
            p.insert(0, x);
            out.push(p);
        }
    }
    out
}

/// Label-sensitive key: partner order per curve, each meeting's rotation
/// read from its lower curve's incoming end, and the hub rings.
fn labelled_key(f: &CombinatorialFamily) -> Vec<(usize, usize, usize)> {
    let mut key = Vec::new();
    for c in &f.curves {
        for e in &c.events {
            key.push((c.id.index(), e.other.index(), 0));
        }
    }
    let mut rots: Vec<(usize, usize, usize)> = f
        .meetings
        .iter()
        .map(|m| {
            let (a, _) = m.curves();
            let start = m
                .rotation
                .iter()
                .position(|e| e.curve == a && e.passage == Passage::In)
                .unwrap();
            let word = (1..4).fold(0, |acc, k| {
                let e = m.rotation[(start + k) % 4];
                acc * 4 + 2 * usize::from(e.curve != a) + usize::from(e.passage == Passage::Out)
            });
            let (x, y) = m.curves();
            (x.index(), y.index(), word + 1)
        })
        .collect();
    rots.sort();
    key.extend(rots);
    let mut rings: Vec<Vec<(usize, usize, usize)>> = f
        .hubs
        .iter()
        .map(|h| {
            let ring: Vec<(usize, usize, usize)> = h
                .rotation
                .iter()
                .map(|e| (usize::MAX, e.curve.index(), e.terminal as usize))
                .collect();
            (0..ring.len())
                .map(|i| {
                    let mut r = ring.clone();
                    r.rotate_left(i);
                    r
                })
                .min()
                .unwrap_or_default()
        })
        .collect();
    rings.sort();
    key.extend(rings.into_iter().flatten());
    key
}

/// Number of orbits of the realizable raw systems under relabelling,
/// reflection and, when the pattern allows it, global reversal.
pub fn oracle_class_count(n: usize, pattern: &EndpointPattern) -> usize {
    let reversal = EnumerationLimits::new(n, pattern.clone(), true).template().reversal;
    let systems: Vec<CombinatorialFamily> =
        raw_intersecting_systems(n, pattern).into_iter().filter(is_realizable).collect();
    let index: HashMap<Vec<(usize, usize, usize)>, usize> =
        systems.iter().enumerate().map(|(i, f)| (labelled_key(f), i)).collect();
    let mut parent: Vec<usize> = (0..systems.len()).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (i, f) in systems.iter().enumerate() {
        let mut images = vec![f.reflect()];
        if reversal {
            images.push(f.reverse_all());
        }
        for s in 0..n.saturating_sub(1) {
            let mut order: Vec<CurveId> = (0..n).map(CurveId).collect();
            order.swap(s, s + 1);
            images.push(f.relabel(&order));
        }
        for img in images {
            let j = *index.get(&labelled_key(&img)).expect("symmetry preserves realizability");
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    (0..systems.len()).filter(|&i| find(&mut parent, i) == i).count()
}

/// Fewest quasi-grids (w.r.t. `g`) that `h` splits into, trying every set
/// partition and every order inside each part. `None` if no partition
/// works.
pub fn min_quasi_grid_partition(
    family: &CombinatorialFamily,
    g: CurveId,
    h: &[CurveId],
) -> Option<usize> {
    let ok = |part: &[CurveId]| {
        permutations(&(0..part.len()).collect::<Vec<_>>())
            .iter()
            .any(|p| {
                let order: Vec<CurveId> = p.iter().map(|&i| part[i]).collect();
                verify_quasi_grid_ordered(&order, g, family).is_ok()
            })
    };
    let mut best: Option<usize> = None;
    let mut blocks: Vec<Vec<CurveId>> = Vec::new();
    partitions(h, 0, &mut blocks, &mut |blocks| {
        if best.map_or(true, |b| blocks.len() < b) && blocks.iter().all(|b| ok(b)) {
            best = Some(blocks.len());
        }
    });
    best
}

fn partitions(
    items: &[CurveId],
    at: usize,
    blocks: &mut Vec<Vec<CurveId>>,
    f: &mut dyn FnMut(&[Vec<CurveId>]),
) {
    if at == items.len() {
        f(blocks);
        return;
    }
    for b in 0..blocks.len() {
        blocks[b].push(items[at]);
        partitions(items, at + 1, blocks, f);
        blocks[b].pop();
    }
    blocks.push(vec![items[at]]);
    partitions(items, at + 1, blocks, f);
    blocks.pop();
}
