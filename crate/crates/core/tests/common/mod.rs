#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use touchgrid::format::FamilyFile;
use touchgrid::geometry::ingest;
use touchgrid::{CombinatorialFamily, Polyline64};

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn load(name: &str) -> CombinatorialFamily {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    match FamilyFile::parse(&text).unwrap() {
        FamilyFile::Combinatorial(f) => f.to_family().unwrap(),
        FamilyFile::Geometric(f) => ingest(&f.polylines(), None).unwrap().0,
    }
}

pub fn polylines(name: &str) -> Vec<Polyline64> {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    match FamilyFile::parse(&text).unwrap() {
        FamilyFile::Geometric(f) => f.polylines(),
        FamilyFile::Combinatorial(_) => panic!("{name} is combinatorial"),
    }
}

/// A horizontal `g` plus V-shaped curves with their apex on it, and some
/// free segments. Apex positions are distinct.
pub fn touching_scene() -> impl Strategy<Value = Vec<Polyline64>> {
    let vee = (0.05f64..0.95, 1.0f64..30.0, 1.0f64..30.0, 5.0f64..40.0, any::<bool>(), any::<bool>());
    let seg = ((0.0f64..100.0, 0.0f64..100.0), (0.0f64..100.0, 0.0f64..100.0));
    (prop::collection::vec(vee, 0..4), prop::collection::vec(seg, 0..4)).prop_map(|(vees, segs)| {
        let mut out = vec![Polyline64::new(0, &[(0.0, 50.0), (100.0, 50.0)])];
        for (i, (t, l, r, h, up, rev)) in vees.into_iter().enumerate() {
            // spread apexes so they never coincide
            let x = 100.0 * (i as f64 + t) / 4.0;
            let y = if up { 50.0 + h } else { 50.0 - h };
            let mut pts = vec![(x - l, y), (x, 50.0), (x + r, y)];
            if rev {
                pts.reverse();
            }
            let id = out.len();
            out.push(Polyline64::new(id, &pts));
        }
        for (a, b) in segs {
            let id = out.len();
            out.push(Polyline64::new(id, &[a, b]));
        }
        out
    })
}

/// Random straight segments; any two meet at most once.
pub fn segments(max: usize) -> impl Strategy<Value = Vec<Polyline64>> {
    prop::collection::vec(((0.0f64..100.0, 0.0f64..100.0), (0.0f64..100.0, 0.0f64..100.0)), 1..=max)
        .prop_map(|v| v.into_iter().enumerate().map(|(i, (a, b))| Polyline64::new(i, &[a, b])).collect())
}
