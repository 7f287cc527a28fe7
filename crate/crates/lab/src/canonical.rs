//! Canonical forms of families up to relabelling, reflection and global
//! reversal.
//!
//! A family is written as a flat `u32` word (curves in order, each with its
//! hubs and its events, then the hub rotations); the canonical word is the
//! lexicographically smallest word over the allowed symmetries. Curves are
//! first split by an isomorphism-invariant colour refinement so only ties
//! need to be permuted.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use touchgrid::{
    CombinatorialFamily, CurveId, CurveSpec, HubEnd, MeetingEnd, Passage, Terminal,
};

/// Which transformations identify two families.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Symmetry {
    /// Role of every curve position; only curves of equal role may be
    /// swapped. Shorter than the family means missing roles are `0`.
    pub roles: Vec<u32>,
    pub reflection: bool,
    /// Reversal of all curves at once.
    pub reversal: bool,
}

impl Symmetry {
    /// All curves interchangeable, mirror images and reversal identified.
    pub fn full() -> Symmetry {
        Symmetry { roles: Vec::new(), reflection: true, reversal: true }
    }

    fn role(&self, i: usize) -> u32 {
        self.roles.get(i).copied().unwrap_or(0)
    }
}

#[derive(Clone, Copy)]
struct Variant {
    reflect: bool,
    reverse: bool,
}

/// Code `0..6` of the rotation at a meeting as seen from `a`: the order of
/// `a_out`, `b_in`, `b_out` going counter-clockwise from `a_in`.
fn local_code(rotation: &[MeetingEnd; 4], a: CurveId, v: Variant) -> u32 {
    let mut r = *rotation;
    if v.reflect {
        r.reverse();
    }
    if v.reverse {
        for e in &mut r {
            e.passage = e.passage.flip();
        }
    }
    let start = r
        .iter()
        .position(|e| e.curve == a && e.passage == Passage::In)
        .expect("curve passes the meeting");
    let sym = |e: &MeetingEnd| match (e.curve == a, e.passage) {
        (true, Passage::Out) => 0,
        (false, Passage::In) => 1,
        (false, Passage::Out) => 2,
        (true, Passage::In) => unreachable!(),
    };
    let seq = [sym(&r[(start + 1) % 4]), sym(&r[(start + 2) % 4]), sym(&r[(start + 3) % 4])];
    const PERMS: [[u32; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    PERMS.iter().position(|p| *p == seq).unwrap() as u32
}

fn decode_code(code: u32, a: CurveId, b: CurveId) -> [MeetingEnd; 4] {
    const PERMS: [[u32; 3]; 6] = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    let end = |s: u32| match s {
        0 => MeetingEnd { curve: a, passage: Passage::Out },
        1 => MeetingEnd { curve: b, passage: Passage::In },
        _ => MeetingEnd { curve: b, passage: Passage::Out },
    };
    let p = PERMS[code as usize];
    [MeetingEnd { curve: a, passage: Passage::In }, end(p[0]), end(p[1]), end(p[2])]
}

/// Per-curve view under a variant: endpoints and events in traversal order
/// as `(other, index of this meeting on other, code)`.
struct View {
    ends: Vec<(usize, usize)>,
    events: Vec<Vec<(usize, usize, u32)>>,
}

fn view(family: &CombinatorialFamily, v: Variant) -> View {
    let n = family.len();
    let mut ends = Vec::with_capacity(n);
    let mut order: Vec<Vec<usize>> = Vec::with_capacity(n);
    for c in &family.curves {
        let mut ms: Vec<usize> = c.events.iter().map(|e| e.meeting.index()).collect();
        if v.reverse {
            ms.reverse();
            ends.push((c.target.index(), c.source.index()));
        } else {
            ends.push((c.source.index(), c.target.index()));
        }
        order.push(ms);
    }
    let mut pos: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    for (c, ms) in order.iter().enumerate() {
        for (i, &m) in ms.iter().enumerate() {
            pos.insert((m, c), i);
        }
    }
    let events = family
        .curves
        .iter()
        .enumerate()
        .map(|(c, curve)| {
            order[c]
                .iter()
                .map(|&m| {
                    let meeting = &family.meetings[m];
                    let other = meeting.other(curve.id).unwrap().index();
                    (other, pos[&(m, other)], local_code(&meeting.rotation, curve.id, v))
                })
                .collect()
        })
        .collect();
    View { ends, events }
}

fn rank<T: Ord + Clone>(keys: &[T]) -> Vec<u32> {
    let sorted: std::collections::BTreeSet<T> = keys.iter().cloned().collect();
    let index: BTreeMap<T, u32> = sorted.into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
    keys.iter().map(|k| index[k]).collect()
}

/// Colour refinement on curves; colours are ranks of structural keys, so
/// isomorphic families get equal colour multisets.
fn colours(family: &CombinatorialFamily, view: &View, sym: &Symmetry) -> Vec<u32> {
    let n = family.len();
    let hub_size: Vec<usize> = family.hubs.iter().map(|h| h.rotation.len()).collect();
    let start: Vec<(u32, usize, bool, usize, usize, Vec<u32>)> = (0..n)
        .map(|c| {
            let (s, t) = view.ends[c];
            (
                sym.role(c),
                view.events[c].len(),
                s == t,
                hub_size[s],
                hub_size[t],
                view.events[c].iter().map(|e| e.2).collect(),
            )
        })
        .collect();
    let mut colour = rank(&start);
    let mut classes = distinct(&colour);
    loop {
        let keys: Vec<(u32, Vec<(u32, u32)>)> = (0..n)
            .map(|c| (colour[c], view.events[c].iter().map(|e| (colour[e.0], e.2)).collect()))
            .collect();
        let next = rank(&keys);
        let count = distinct(&next);
        colour = next;
        if count == classes {
            return colour;
        }
        classes = count;
    }
}

fn distinct(x: &[u32]) -> usize {
    x.iter().collect::<std::collections::BTreeSet<_>>().len()
}

fn encode(family: &CombinatorialFamily, view: &View, order: &[usize], v: Variant) -> Vec<u32> {
    let n = order.len();
    let mut inv = vec![0usize; n];
    for (new, &old) in order.iter().enumerate() {
        inv[old] = new;
    }
    let mut hub_id: Vec<Option<u32>> = vec![None; family.hubs.len()];
    let mut hub_order = Vec::new();
    let mut name = |h: usize, hub_order: &mut Vec<usize>| -> u32 {
        *hub_id[h].get_or_insert_with(|| {
            hub_order.push(h);
            (hub_order.len() - 1) as u32
        })
    };
    let mut out = vec![n as u32, family.hubs.len() as u32];
    for &old in order {
        let (s, t) = view.ends[old];
        out.push(name(s, &mut hub_order));
        out.push(name(t, &mut hub_order));
        out.push(view.events[old].len() as u32);
        for &(other, at, code) in &view.events[old] {
            out.extend([inv[other] as u32, at as u32, code]);
        }
    }
    for &h in &hub_order {
        let mut ring: Vec<u32> = family.hubs[h]
            .rotation
            .iter()
            .map(|e| {
                let term = match (e.terminal, v.reverse) {
                    (Terminal::Start, false) | (Terminal::End, true) => 0,
                    _ => 1,
                };
                2 * inv[e.curve.index()] as u32 + term
            })
            .collect();
        if v.reflect {
            ring.reverse();
        }
        let best = (0..ring.len())
            .map(|i| {
                let mut r = ring.clone();
                r.rotate_left(i);
                r
            })
            .min()
            .unwrap_or_default();
        out.push(best.len() as u32);
        out.extend(best);
    }
    out
}

fn next_permutation(p: &mut [usize]) -> bool {
    if p.len() < 2 {
        return false;
    }
    let mut i = p.len() - 1;
    while i > 0 && p[i - 1] >= p[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = p.len() - 1;
    while p[j] <= p[i - 1] {
        j -= 1;
    }
    p.swap(i - 1, j);
    p[i..].reverse();
    true
}

/// Smallest word of `family` over the allowed symmetries.
///
/// Containment and outer-face data are ignored; enumerated families are
/// connected.
pub fn canonical_form(family: &CombinatorialFamily, sym: &Symmetry) -> Vec<u32> {
    let mut best: Option<Vec<u32>> = None;
    for reflect in [false, true] {
        if reflect && !sym.reflection {
            continue;
        }
        for reverse in [false, true] {
            if reverse && !sym.reversal {
                continue;
            }
            let v = Variant { reflect, reverse };
            let view = view(family, v);
            let colour = colours(family, &view, sym);
            // positions of each role are filled by that role's curves,
            // sorted by colour; ties are permuted exhaustively
            let mut cells: Vec<Vec<usize>> = Vec::new();
            let mut base: Vec<usize> = (0..family.len()).collect();
            base.sort_by_key(|&c| (sym.role(c), colour[c]));
            let mut start = 0;
            while start < base.len() {
                let key = (sym.role(base[start]), colour[base[start]]);
                let mut end = start;
                while end < base.len() && (sym.role(base[end]), colour[base[end]]) == key {
                    end += 1;
                }
                cells.push(base[start..end].to_vec());
                start = end;
            }
            for_each_product(&mut cells, 0, &mut |cells| {
                let order: Vec<usize> = cells.iter().flatten().copied().collect();
                let word = encode(family, &view, &order, v);
                if best.as_ref().map_or(true, |b| word < *b) {
                    best = Some(word);
                }
            });
        }
    }
    best.unwrap_or_default()
}

fn for_each_product(cells: &mut [Vec<usize>], at: usize, f: &mut dyn FnMut(&[Vec<usize>])) {
    if at == cells.len() {
        f(cells);
        return;
    }
    cells[at].sort_unstable();
    loop {
        for_each_product(cells, at + 1, f);
        if !next_permutation(&mut cells[at]) {
            break;
        }
    }
}

/// Rebuilds the family a canonical word describes.
pub fn decode(word: &[u32]) -> CombinatorialFamily {
    let n = word[0] as usize;
    let hubs = word[1] as usize;
    let mut at = 2;
    let mut ends = Vec::with_capacity(n);
    let mut events: Vec<Vec<(usize, usize, u32)>> = Vec::with_capacity(n);
    for _ in 0..n {
        let (s, t, m) = (word[at] as usize, word[at + 1] as usize, word[at + 2] as usize);
        at += 3;
        ends.push((s, t));
        events.push(
            (0..m)
                .map(|i| {
                    let k = at + 3 * i;
                    (word[k] as usize, word[k + 1] as usize, word[k + 2])
                })
                .collect(),
        );
        at += 3 * m;
    }
    // meeting ids by first appearance
    let mut id: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut rotations: Vec<[MeetingEnd; 4]> = Vec::new();
    let mut specs = Vec::with_capacity(n);
    for c in 0..n {
        let mut list = Vec::with_capacity(events[c].len());
        for (i, &(other, there, code)) in events[c].iter().enumerate() {
            let m = match id.get(&(other, there)) {
                Some(&m) => m,
                None => {
                    let m = rotations.len();
                    rotations.push(decode_code(code, CurveId(c), CurveId(other)));
                    id.insert((c, i), m);
                    m
                }
            };
            list.push(m);
        }
        specs.push(CurveSpec::new(ends[c].0, ends[c].1, &list));
    }
    let mut hub_rotations = Vec::with_capacity(hubs);
    for _ in 0..hubs {
        let len = word[at] as usize;
        let ring = word[at + 1..at + 1 + len]
            .iter()
            .map(|&x| HubEnd {
                curve: CurveId((x / 2) as usize),
                terminal: if x % 2 == 0 { Terminal::Start } else { Terminal::End },
            })
            .collect();
        hub_rotations.push(ring);
        at += 1 + len;
    }
    CombinatorialFamily::assemble(specs, rotations, hub_rotations).expect("canonical word decodes")
}

/// Canonical word and the family rebuilt from it.
pub fn canonicalize(family: &CombinatorialFamily, sym: &Symmetry) -> (Vec<u32>, CombinatorialFamily) {
    let word = canonical_form(family, sym);
    let rebuilt = decode(&word);
    (word, rebuilt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generate::{generate_canonical_quasigrid, HubPattern};
    use touchgrid::quasigrid::TouchClass;

    #[test]
    fn codes_round_trip() {
        let (a, b) = (CurveId(0), CurveId(1));
        let v = Variant { reflect: false, reverse: false };
        for code in 0..6 {
            assert_eq!(local_code(&decode_code(code, a, b), a, v), code);
        }
    }

    #[test]
    fn decode_inverts_identity_encoding() {
        let f = generate_canonical_quasigrid(3, TouchClass::GUpC, HubPattern::Distinct);
        let (word, g) = canonicalize(&f, &Symmetry::full());
        assert_eq!(canonical_form(&g, &Symmetry::full()), word);
    }

    #[test]
    fn symmetric_images_share_a_form() {
        let f = generate_canonical_quasigrid(4, TouchClass::GUpC, HubPattern::Distinct);
        let sym = Symmetry::full();
        let w = canonical_form(&f, &sym);
        let order: Vec<CurveId> = [3, 0, 4, 1, 2].into_iter().map(CurveId).collect();
        assert_eq!(canonical_form(&f.relabel(&order), &sym), w);
        assert_eq!(canonical_form(&f.reflect(), &sym), w);
        assert_eq!(canonical_form(&f.reverse_all(), &sym), w);
        let strict = Symmetry { roles: vec![0, 1, 1, 1, 1], reflection: false, reversal: false };
        assert_ne!(canonical_form(&f, &strict), canonical_form(&f.reflect(), &strict));
    }
}
