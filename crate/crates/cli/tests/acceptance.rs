//! One line per acceptance criterion. Exits nonzero only when a criterion
//! outside `KNOWN_FAILURES` fails.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;
use touchgrid::arrangement::is_realizable;
use touchgrid::format::{CombinatorialFileV1, FamilyFile};
use touchgrid::geometry::ingest;
use touchgrid::quasigrid::{
    decompose_closed, decompose_open, prune_k_core, prune_k_core_by, verify_quasi_grid,
    verify_quasi_grid_ordered, TouchClass, TouchingGraph,
};
use touchgrid::{build_arrangement, contract_endpoints, validate_family, CombinatorialFamily, CurveId, Passage};
use touchgrid_lab::generate::generate_grounded_ladder;
use touchgrid_lab::lemmas::touch_equivalent_families;
use touchgrid_lab::oracle::min_quasi_grid_partition;
use touchgrid_lab::search::{search_lemma41_relaxed, SearchLimits};
use touchgrid_lab::{
    enumerate_families, generate_canonical_quasigrid, probe_bounds, run_search, search_lemma41,
    search_lemma42, Budget, Checkpoint, EndpointPattern, EnumerationLimits, HubPattern, RunResult,
    SearchSpec,
};

use Passage::{In, Out};

/// Grounded families never reach s = t + 1 here; see the README.
const KNOWN_FAILURES: &[u32] = &[7];

type Verdict = Result<String, String>;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

fn load(name: &str) -> CombinatorialFamily {
    let text = std::fs::read_to_string(fixture(name)).unwrap();
    match FamilyFile::parse(&text).unwrap() {
        FamilyFile::Combinatorial(f) => f.to_family().unwrap(),
        FamilyFile::Geometric(f) => ingest(&f.polylines(), None).unwrap().0,
    }
}

fn ids(r: std::ops::RangeInclusive<usize>) -> Vec<CurveId> {
    r.map(CurveId).collect()
}

fn members(f: &CombinatorialFamily) -> Vec<CurveId> {
    (1..f.len()).map(CurveId).collect()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

// criterion 1

fn meeting(file: &CombinatorialFileV1, a: usize, b: usize) -> usize {
    file.meetings
        .iter()
        .position(|m| m.rotation.iter().any(|e| e.0 == a) && m.rotation.iter().any(|e| e.0 == b))
        .unwrap()
}

fn drop_meeting(file: &mut CombinatorialFileV1, at: usize) {
    let id = file.meetings.remove(at).id;
    for (i, m) in file.meetings.iter_mut().enumerate() {
        m.id = i;
    }
    for c in &mut file.curves {
        c.events.retain(|&e| e != id);
        for e in &mut c.events {
            if *e > id {
                *e -= 1;
            }
        }
    }
}

fn swap_events(file: &mut CombinatorialFileV1, curve: usize, x: usize, y: usize) {
    let ev = &mut file.curves[curve].events;
    let (i, j) = (ev.iter().position(|&e| e == x).unwrap(), ev.iter().position(|&e| e == y).unwrap());
    ev.swap(i, j);
}

/// Applies the mutation aimed at `condition` and returns the condition the
/// checker reports.
fn mutate(f: &CombinatorialFamily, order: &[CurveId], condition: u8) -> Option<u8> {
    let mut file = CombinatorialFileV1::from_family(f);
    let (c1, c2) = (order[0].index(), order[1].index());
    let (m12, m01, m02) = (meeting(&file, c1, c2), meeting(&file, 0, c1), meeting(&file, 0, c2));
    match condition {
        1 => drop_meeting(&mut file, m12),
        2 => file.meetings[m01].rotation = [(0, In), (c1, In), (0, Out), (c1, Out)],
        3 => file.meetings[m12].rotation = [(c1, In), (c2, In), (c2, Out), (c1, Out)],
        4 => swap_events(&mut file, 0, m01, m02),
        _ => swap_events(&mut file, c2, m12, m02),
    }
    let g = file.to_family().ok()?;
    verify_quasi_grid_ordered(order, CurveId(0), &g).err().map(|e| e.condition())
}

fn criterion1() -> Verdict {
    let mut families = 0;
    let mut mutants = 0;
    for hubs in [HubPattern::Distinct, HubPattern::Closed] {
        for class in TouchClass::ALL {
            for k in 1..=10 {
                let f = generate_canonical_quasigrid(k, class, hubs);
                let cert = verify_quasi_grid(&ids(1..=k), CurveId(0), &f)
                    .map_err(|e| format!("k={k} {class:?} {hubs:?}: {e}"))?;
                ensure(cert.class == Some(class), format!("k={k} {class:?}: class {:?}", cert.class))?;
                families += 1;
                // two touch points are monotone in some direction
                if k < 3 {
                    continue;
                }
                for cond in 1..=5 {
                    let got = mutate(&f, &cert.curves, cond);
                    ensure(got == Some(cond), format!("k={k} {class:?} {hubs:?}: mutation {cond} gave {got:?}"))?;
                    mutants += 1;
                }
            }
        }
    }
    Ok(format!("{families} generated families certify; {mutants} single-condition mutants rejected with the right condition"))
}

// criteria 2, 3

fn criterion2() -> Verdict {
    let mut n = 0;
    let mut two = 0;
    for h in 1..=6 {
        for (name, f) in touch_equivalent_families(h, false) {
            let hs = members(&f);
            let r = decompose_open(&f, CurveId(0), &hs).map_err(|e| format!("h={h} {name}: {e}"))?;
            ensure(r.parts.len() <= 2, format!("h={h} {name}: {} parts", r.parts.len()))?;
            for p in &r.parts {
                verify_quasi_grid(&p.curves, CurveId(0), &f).map_err(|e| format!("h={h} {name}: part fails: {e}"))?;
            }
            let best = min_quasi_grid_partition(&f, CurveId(0), &hs);
            ensure(best == Some(r.parts.len()), format!("h={h} {name}: {} parts, oracle {best:?}", r.parts.len()))?;
            n += 1;
            two += usize::from(r.parts.len() == 2);
        }
    }
    Ok(format!("{n} open families (h <= 6), {two} need 2 parts, all minimal by exhaustive partition"))
}

fn criterion3() -> Verdict {
    let mut n = 0;
    let mut worst = (0, 0);
    for h in 1..=6 {
        for (name, f) in touch_equivalent_families(h, true) {
            ensure(is_realizable(&f), format!("h={h} {name}: not realizable"))?;
            let hs = members(&f);
            let deg = TouchingGraph::of(&f, &hs).max_degree();
            ensure(deg <= 2, format!("h={h} {name}: degree {deg}"))?;
            let r = decompose_closed(&f, CurveId(0), &hs).map_err(|e| format!("h={h} {name}: {e}"))?;
            ensure(r.parts.len() <= 12, format!("h={h} {name}: {} parts", r.parts.len()))?;
            worst = (worst.0.max(deg), worst.1.max(r.parts.len()));
            n += 1;
        }
    }
    Ok(format!("{n} closed families (h <= 6): max degree {}, max parts {}", worst.0, worst.1))
}

// criteria 4, 5, 10 (binary)

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_touchgrid"))
        .args(args)
        .env_remove("TOUCHGRID_CACHE_DIR")
        .output()
        .unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stdout_json(o: &Output) -> Result<Value, String> {
    serde_json::from_slice(&o.stdout).map_err(|e| format!("{e}: {}", String::from_utf8_lossy(&o.stderr)))
}

fn criterion4() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["search", "--lemma", "42", "--h", "5", "--max-curves", "7", "--max-meetings", "25", "--out", path(dir.path())]);
    ensure(o.status.code() == Some(0), format!("exit {:?}: {}", o.status.code(), String::from_utf8_lossy(&o.stderr)))?;
    let text = std::fs::read_to_string(dir.path().join("manifest.json")).map_err(|e| e.to_string())?;
    let m: Value = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    ensure(m["witnesses"] == 0, format!("manifest reports {} witnesses", m["witnesses"]))?;
    ensure(m.get("budget").is_some(), "manifest lacks the budget")?;
    let searched = m["searched"].as_u64().ok_or("manifest lacks searched")?;
    ensure(searched > 0, "nothing searched")?;
    let four = search_lemma42(4, SearchLimits { max_curves: 7, max_meetings: 25 });
    ensure(four.witnesses.is_empty(), "|H| = 4 has witnesses")?;
    Ok(format!(
        "|H| = 5, <= 25 meetings: 0 witnesses over {searched} classes in {} ms (|H| = 4: 0 over {})",
        m["wall_ms"], four.searched
    ))
}

fn criterion5() -> Verdict {
    let limits = SearchLimits { max_curves: 5, max_meetings: 12 };
    let strict = search_lemma41(limits);
    ensure(strict.searched > 0 && strict.witnesses.is_empty(), format!("strict: {} witnesses", strict.witnesses.len()))?;
    let relaxed = search_lemma41_relaxed(limits);
    ensure(!relaxed.witnesses.is_empty(), "relaxed control found nothing")?;
    let replay = relaxed.witnesses.iter().all(|w| relaxed.spec.replay(&w.family.to_family().unwrap()));
    ensure(replay, "a control witness does not replay")?;
    Ok(format!(
        "strict: 0 witnesses over {} classes; relaxed control: {} witnesses, all replay",
        strict.searched,
        relaxed.witnesses.len()
    ))
}

fn criterion10() -> Verdict {
    let limits = SearchLimits { max_curves: 7, max_meetings: 25 };
    let spec = SearchSpec::lemma42(2, limits);
    let RunResult::Done(whole) = run_search(&spec, Budget::default(), None).unwrap() else {
        return Err("unbudgeted run paused".into());
    };
    // every checkpoint of a finely paused run, each resumed to the end
    let mut checkpoints: Vec<Checkpoint> = Vec::new();
    let mut cp: Option<Checkpoint> = None;
    let step = Budget { max_expansions: Some(25), wall: None };
    loop {
        match run_search(&spec, step, cp.take()).map_err(|e| e.to_string())? {
            RunResult::Done(o) => ensure(o == whole, "stepped run differs")?,
            RunResult::Paused(c) => {
                let text = serde_json::to_string(&c).unwrap();
                checkpoints.push(serde_json::from_str(&text).unwrap());
                cp = Some(*c);
                continue;
            }
        }
        break;
    }
    ensure(!checkpoints.is_empty(), "no pause happened")?;
    for (i, c) in checkpoints.iter().enumerate() {
        match run_search(&spec, Budget::default(), Some(c.clone())).map_err(|e| e.to_string())? {
            RunResult::Done(o) => ensure(o == whole, format!("resume from checkpoint {i} differs"))?,
            RunResult::Paused(_) => return Err("unbudgeted resume paused".into()),
        }
    }

    let dir = tempfile::tempdir().unwrap();
    let base = ["search", "--lemma", "42", "--h", "2"];
    let whole_cli = stdout_json(&run(&[&base[..], &["--out", path(&dir.path().join("whole"))]].concat()))?;
    let cpf = dir.path().join("cp.json");
    let parts = dir.path().join("parts");
    let mut o = run(&[&base[..], &["--max-expansions", "100", "--checkpoint", path(&cpf), "--out", path(&parts)]].concat());
    let mut pauses = 0;
    while o.status.code() == Some(7) {
        pauses += 1;
        o = run(&["search", "--resume", path(&cpf), "--max-expansions", "100", "--checkpoint", path(&cpf), "--out", path(&parts)]);
    }
    let resumed = stdout_json(&o)?;
    for key in ["searched", "tasks", "witnesses"] {
        ensure(resumed[key] == whole_cli[key], format!("binary: {key} differs after {pauses} pauses"))?;
    }
    Ok(format!(
        "{} checkpoints each resumed to the same outcome; binary resumed through {pauses} pauses identically",
        checkpoints.len()
    ))
}

// criteria 6, 7

fn corpus() -> Vec<(String, CombinatorialFamily)> {
    let mut out = Vec::new();
    for n in 1..=3 {
        for p in [EndpointPattern::Distinct, EndpointPattern::Grounded, EndpointPattern::DoubleGrounded, EndpointPattern::Closed] {
            let name = format!("enumerated n={n} {p:?}");
            out.extend(enumerate_families(&EnumerationLimits::new(n, p, true)).into_iter().map(|f| (name.clone(), f)));
        }
    }
    for h in 1..=4 {
        for closed in [false, true] {
            out.extend(touch_equivalent_families(h, closed).into_iter().map(|(n, f)| (format!("touch-equivalent h={h} {n}"), f)));
        }
    }
    for hubs in [HubPattern::Distinct, HubPattern::Closed] {
        for class in TouchClass::ALL {
            for k in 1..=10 {
                out.push((format!("ladder k={k} {class:?} {hubs:?}"), generate_canonical_quasigrid(k, class, hubs)));
            }
        }
    }
    for k in 1..=10 {
        out.push((format!("grounded ladder k={k}"), generate_grounded_ladder(k)));
    }
    for name in ["fig1.json", "fig3.json", "grid.json", "mixed4.json", "disjoint.json"] {
        out.push((name.to_string(), load(name)));
    }
    let w = search_lemma42(1, SearchLimits { max_curves: 7, max_meetings: 25 });
    out.extend(w.witnesses.iter().map(|w| ("two-ground search witness".to_string(), w.family.to_family().unwrap())));
    out
}

fn criterion6(corpus: &[(String, CombinatorialFamily)]) -> Verdict {
    let mut intersecting = 0;
    for (name, f) in corpus {
        let arr = build_arrangement(f).map_err(|e| format!("{name}: {e}"))?;
        for c in &arr.components {
            ensure(c.euler() == 2, format!("{name}: component {c:?}"))?;
        }
        let total: usize = arr.faces.iter().map(Vec::len).sum();
        ensure(total == arr.graph.dart_count(), format!("{name}: face lengths {total} vs {} darts", arr.graph.dart_count()))?;
        if validate_family(f).map_err(|e| format!("{name}: {e}"))?.is_intersecting {
            let n = f.len();
            let c = f.count_meetings();
            ensure(c.touchings + c.crossings == n * (n - 1) / 2, format!("{name}: T + X = {} for n = {n}", c.touchings + c.crossings))?;
            intersecting += 1;
        }
    }
    Ok(format!("{} families: Euler per component and face lengths hold; T + X = n(n-1)/2 on all {intersecting} intersecting ones", corpus.len()))
}

fn criterion7(corpus: &[(String, CombinatorialFamily)]) -> Verdict {
    let mut grounded: BTreeMap<i64, usize> = BTreeMap::new();
    for (name, f) in corpus {
        let arr = build_arrangement(f).map_err(|e| format!("{name}: {e}"))?;
        let c = contract_endpoints(f, &arr);
        ensure(c.s <= c.t * (c.t + 1) / 2, format!("7a {name}: s={} t={}", c.s, c.t))?;
        if probe_bounds(f).map_err(|e| e.to_string())?.grounded {
            *grounded.entry(c.s as i64 - c.t as i64).or_default() += 1;
        }
    }
    let hist: Vec<String> = grounded.iter().map(|(d, n)| format!("s-t={d}: {n}")).collect();
    let total: usize = grounded.values().sum();
    let a = format!("7a s <= t(t+1)/2 on {} families", corpus.len());
    if grounded.contains_key(&1) {
        Ok(format!("{a}; 7b s = t+1 reached on grounded families ({})", hist.join(", ")))
    } else {
        Err(format!(
            "{a} passes; 7b no grounded family reaches s = t+1 ({total} grounded: {}). \
             Contracting the common ground to one hub leaves only pairs (ground, other hub), so s <= t",
            hist.join(", ")
        ))
    }
}

// criteria 8, 9

fn criterion8() -> Verdict {
    let mut got = Vec::new();
    for (name, h, want) in [("fig1.json", 3, 1), ("fig3.json", 4, 2)] {
        let f = load(name);
        let r = decompose_open(&f, CurveId(0), &ids(1..=h)).map_err(|e| format!("{name}: {e}"))?;
        ensure(r.parts.len() == want, format!("{name}: {} parts, want {want}", r.parts.len()))?;
        got.push(format!("{name} -> {}", r.parts.len()));
    }
    Ok(got.join(", "))
}

fn criterion9() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut removed = 0;
    for trial in 0..100 {
        let l = rng.gen_range(1..=25);
        let r = rng.gen_range(1..=50 - l);
        let p: f64 = rng.gen_range(0.05..0.9);
        let edges: Vec<(CurveId, CurveId)> = (0..l)
            .flat_map(|a| (0..r).map(move |b| (a, l + b)))
            .filter(|_| rng.gen_bool(p))
            .map(|(a, b)| (CurveId(a), CurveId(b)))
            .collect();
        let g = TouchingGraph { nodes: (0..l + r).map(CurveId).collect(), edges };
        let k = rng.gen_range(1..=6);
        let canonical = prune_k_core(&g, k);
        for _ in 0..3 {
            let seed: u64 = rng.gen();
            let mut order = ChaCha8Rng::seed_from_u64(seed);
            let other = prune_k_core_by(&g, k, |c| order.gen_range(0..c.len()));
            ensure(other == canonical, format!("graph {trial} (k={k}): removal order changes the core"))?;
        }
        ensure(canonical.neighbours().values().all(|n| n.len() >= k), format!("graph {trial}: low degree left"))?;
        removed += g.nodes.len() - canonical.nodes.len();
    }
    Ok(format!("100 random bipartite graphs, 3 random removal orders each agree ({removed} vertices pruned in total)"))
}

fn main() {
    let mut unexpected = Vec::new();
    let mut report = |n: u32, started: Instant, v: Verdict| {
        let secs = started.elapsed().as_secs_f64();
        match v {
            Ok(d) => println!("criterion {n}: PASS - {d} [{secs:.1}s]"),
            Err(d) => {
                println!("criterion {n}: FAIL - {d} [{secs:.1}s]");
                if !KNOWN_FAILURES.contains(&n) {
                    unexpected.push(n);
                }
            }
        }
    };
    let t = Instant::now();
    report(1, t, criterion1());
    let t = Instant::now();
    report(2, t, criterion2());
    let t = Instant::now();
    report(3, t, criterion3());
    let t = Instant::now();
    report(4, t, criterion4());
    let t = Instant::now();
    report(5, t, criterion5());
    let t = Instant::now();
    let c = corpus();
    report(6, t, criterion6(&c));
    let t = Instant::now();
    report(7, t, criterion7(&c));
    let t = Instant::now();
    report(8, t, criterion8());
    let t = Instant::now();
    report(9, t, criterion9());
    let t = Instant::now();
    report(10, t, criterion10());
    if !unexpected.is_empty() {
        println!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
