//! Exhaustive counterexample searches with budgets and resumable
//! checkpoints.
//!
//! A search is a list of tasks (one template per endpoint pattern). Each
//! task is run level by level; a level's frontier is expanded in fixed
//! chunks and the next level is the sorted union of the chunk results, so
//! pausing between chunks never changes what is found.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use touchgrid::arrangement::is_realizable;
use touchgrid::format::CombinatorialFileV1;
use touchgrid::quasigrid::{touch_class_of, verify_quasi_grid};
use touchgrid::{validate_family, CombinatorialFamily, CurveId, MeetingKind};

use crate::canonical::canonical_form;
use crate::enumerate::{next_level, MeetRule, Slot, State, Template};

const CHUNK: usize = 256;
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "lemma", rename_all = "snake_case")]
pub enum SearchKind {
    /// `g, h1..h3, g'`; with `relaxed` the `h` only have to touch `g` in
    /// one common class, not form a quasi-grid.
    Lemma41 { relaxed: bool },
    /// `g1`, `h` curves of `H`, `g2`.
    Lemma42 { h: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_curves: usize,
    pub max_meetings: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchSpec {
    pub kind: SearchKind,
    pub limits: SearchLimits,
}

#[derive(Clone, Debug)]
pub struct Task {
    pub name: String,
    pub template: Template,
}

/// Restricted growth strings: all set partitions of `n` labelled items.
fn set_partitions(n: usize) -> Vec<Vec<u32>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(n: usize, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        let max = cur.iter().copied().max().map_or(0, |m| m + 1);
        for x in 0..=max {
            cur.push(x);
            go(n, cur, out);
            cur.pop();
        }
    }
    go(n, &mut cur, &mut out);
    out
}

fn table(rules: &[(usize, usize, MeetRule)]) -> Vec<Vec<MeetRule>> {
    let mut t = vec![vec![MeetRule::NEVER; 3]; 3];
    for &(a, b, r) in rules {
        t[a][b] = r;
    }
    t
}

impl SearchSpec {
    pub fn lemma41(relaxed: bool, limits: SearchLimits) -> Self {
        SearchSpec { kind: SearchKind::Lemma41 { relaxed }, limits }
    }

    pub fn lemma42(h: usize, limits: SearchLimits) -> Self {
        SearchSpec { kind: SearchKind::Lemma42 { h }, limits }
    }

    pub fn curve_count(&self) -> usize {
        match self.kind {
            SearchKind::Lemma41 { .. } => 5,
            SearchKind::Lemma42 { h } => h + 2,
        }
    }

    /// Templates searched, one per endpoint pattern. Empty when the limits
    /// exclude the configuration.
    pub fn tasks(&self) -> Vec<Task> {
        if self.curve_count() > self.limits.max_curves {
            return Vec::new();
        }
        match self.kind {
            SearchKind::Lemma41 { relaxed } => {
                let rules = if relaxed {
                    table(&[(1, 0, MeetRule::TOUCH), (1, 1, MeetRule::ONCE), (2, 0, MeetRule::ONCE), (2, 1, MeetRule::ONCE)])
                } else {
                    table(&[(1, 0, MeetRule::TOUCH), (1, 1, MeetRule::CROSS), (2, 0, MeetRule::ONCE), (2, 1, MeetRule::ONCE)])
                };
                set_partitions(4)
                    .into_iter()
                    .map(|p| {
                        let (a, b, c, d) = (p[0], p[1], p[2], p[3]);
                        let mut slots = vec![Slot { source: a, target: b, role: 0 }];
                        slots.extend((0..3).map(|_| Slot { source: c, target: d, role: 1 }));
                        slots.push(Slot { source: a, target: b, role: 2 });
                        Task {
                            name: format!("ABCD={a}{b}{c}{d}"),
                            template: Template {
                                slots,
                                rules: rules.clone(),
                                max_meetings: self.limits.max_meetings,
                                reflection: true,
                                reversal: false,
                            },
                        }
                    })
                    .collect()
            }
            SearchKind::Lemma42 { h } => {
                let rules = table(&[
                    (1, 0, MeetRule::TOUCH),
                    (1, 1, MeetRule::CROSS),
                    (2, 0, MeetRule::ANY),
                    (2, 1, MeetRule::TOUCH),
                ]);
                const ENDS: [&str; 7] = ["FF", "AF", "FA", "BF", "FB", "AB", "BA"];
                let mut out = Vec::new();
                let mut seen = std::collections::BTreeSet::new();
                for closed in [false, true] {
                    let (a, b) = (0, if closed { 0 } else { 1 });
                    let label = |ch: u8, fresh: u32| match ch {
                        b'A' => a,
                        b'B' => b,
                        _ => fresh,
                    };
                    for e1 in ENDS {
                        for e2 in ENDS {
                            let g1 = (label(e1.as_bytes()[0], 10), label(e1.as_bytes()[1], 11));
                            let g2 = (label(e2.as_bytes()[0], 20), label(e2.as_bytes()[1], 21));
                            if !seen.insert((closed, g1, g2)) {
                                continue;
                            }
                            let mut slots = vec![Slot { source: g1.0, target: g1.1, role: 0 }];
                            slots.extend((0..h).map(|_| Slot { source: a, target: b, role: 1 }));
                            slots.push(Slot { source: g2.0, target: g2.1, role: 2 });
                            out.push(Task {
                                name: format!("H={} g1={e1} g2={e2}", if closed { "AA" } else { "AB" }),
                                template: Template {
                                    slots,
                                    rules: rules.clone(),
                                    max_meetings: self.limits.max_meetings,
                                    reflection: true,
                                    reversal: false,
                                },
                            });
                        }
                    }
                }
                out
            }
        }
    }

    /// Pruning predicate for a family with `level` curves placed.
    pub fn keep(&self, f: &CombinatorialFamily, level: usize) -> bool {
        let g = CurveId(0);
        match self.kind {
            SearchKind::Lemma41 { relaxed } => {
                if !relaxed && level >= 2 {
                    let h: Vec<CurveId> = (1..level.min(4)).map(CurveId).collect();
                    let Ok(cert) = verify_quasi_grid(&h, g, f) else {
                        return false;
                    };
                    if level == 5 {
                        return touches(f, CurveId(4), cert.curves[1]);
                    }
                }
                if relaxed && (2..=4).contains(&level) {
                    let first = touch_class_of(f, g, CurveId(1));
                    return (2..level).all(|i| touch_class_of(f, g, CurveId(i)) == first);
                }
                if relaxed && level == 5 {
                    return (1..4).filter(|&i| touches(f, CurveId(4), CurveId(i))).count() == 1;
                }
                true
            }
            SearchKind::Lemma42 { h } => {
                if (2..=h + 1).contains(&level) {
                    let hs: Vec<CurveId> = (1..level).map(CurveId).collect();
                    return verify_quasi_grid(&hs, g, f).is_ok();
                }
                true
            }
        }
    }

    /// Target predicate on a complete family (already passing [`keep`]).
    ///
    /// [`keep`]: SearchSpec::keep
    pub fn is_witness(&self, f: &CombinatorialFamily) -> bool {
        let g = CurveId(0);
        match self.kind {
            SearchKind::Lemma41 { relaxed } => {
                let gp = CurveId(4);
                if touches(f, gp, g) {
                    return false;
                }
                if relaxed {
                    return true;
                }
                let h: Vec<CurveId> = (1..4).map(CurveId).collect();
                match verify_quasi_grid(&h, g, f) {
                    Ok(cert) => !touches(f, gp, cert.curves[0]) && !touches(f, gp, cert.curves[2]),
                    Err(_) => false,
                }
            }
            SearchKind::Lemma42 { h } => {
                let hs: Vec<CurveId> = (1..=h).map(CurveId).collect();
                verify_quasi_grid(&hs, CurveId(h + 1), f).is_ok()
            }
        }
    }

    /// Re-checks a witness from scratch: well formed, realizable,
    /// pseudo-segments, passes every level filter and the target predicate.
    pub fn replay(&self, f: &CombinatorialFamily) -> bool {
        let Ok(report) = validate_family(f) else {
            return false;
        };
        f.len() == self.curve_count()
            && report.is_pseudo_segment
            && is_realizable(f)
            && (1..=f.len()).all(|level| {
                let keep: Vec<CurveId> = (0..level).map(CurveId).collect();
                self.keep(&f.subfamily(&keep).0, level)
            })
            && self.is_witness(f)
    }
}

fn touches(f: &CombinatorialFamily, a: CurveId, b: CurveId) -> bool {
    matches!(f.kind_between(a, b), Some(MeetingKind::Touch { .. }))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TaskReport {
    pub name: String,
    /// Classes seen over all levels.
    pub searched: u64,
    /// Complete families reached.
    pub complete: u64,
    pub witnesses: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub task: String,
    pub family: CombinatorialFileV1,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchOutcome {
    pub spec: SearchSpec,
    pub witnesses: Vec<Witness>,
    /// Canonical forms processed over all tasks and levels.
    pub searched: u64,
    pub tasks: Vec<TaskReport>,
}

/// Paused search: everything needed to continue.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub version: u32,
    pub spec: SearchSpec,
    pub task: usize,
    pub level: usize,
    pub cursor: usize,
    pub frontier: Vec<CombinatorialFileV1>,
    pub next: Vec<CombinatorialFileV1>,
    /// Classes seen so far in the current task.
    pub task_searched: u64,
    pub done: Vec<TaskReport>,
    pub witnesses: Vec<Witness>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Budget {
    /// Frontier states expanded in this run before pausing.
    pub max_expansions: Option<u64>,
    #[serde(with = "opt_millis", default)]
    pub wall: Option<Duration>,
}

mod opt_millis {
    use serde::{Deserialize, Deserializer, Serialize, Serializer};
    use std::time::Duration;

    pub fn serialize<S: Serializer>(d: &Option<Duration>, s: S) -> Result<S::Ok, S::Error> {
        d.map(|d| d.as_millis() as u64).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<Duration>, D::Error> {
        Ok(Option::<u64>::deserialize(d)?.map(Duration::from_millis))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum RunResult {
    Done(SearchOutcome),
    Paused(Box<Checkpoint>),
}

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("checkpoint version {0} is not supported")]
    Version(u32),
    #[error("checkpoint belongs to a different search")]
    SpecMismatch,
    #[error("checkpoint is inconsistent: {0}")]
    Corrupt(String),
}

struct Cursor {
    task: usize,
    level: usize,
    cursor: usize,
    frontier: Vec<State>,
    next: BTreeMap<Vec<u32>, CombinatorialFamily>,
    task_searched: u64,
    done: Vec<TaskReport>,
    witnesses: Vec<Witness>,
}

fn to_states(
    files: &[CombinatorialFileV1],
    template: &Template,
) -> Result<Vec<State>, SearchError> {
    let sym = template.symmetry();
    let mut out = Vec::with_capacity(files.len());
    for f in files {
        let family = f.to_family().map_err(|e| SearchError::Corrupt(e.to_string()))?;
        out.push(State { word: canonical_form(&family, &sym), family });
    }
    if out.windows(2).any(|w| w[0].word >= w[1].word) {
        return Err(SearchError::Corrupt("frontier not in canonical order".into()));
    }
    Ok(out)
}

fn start_state() -> Vec<State> {
    vec![State { word: vec![0, 0], family: CombinatorialFamily::default() }]
}

/// Runs (or resumes) a search until it finishes or the budget runs out.
pub fn run_search(
    spec: &SearchSpec,
    budget: Budget,
    resume: Option<Checkpoint>,
) -> Result<RunResult, SearchError> {
    let tasks = spec.tasks();
    let mut st = match resume {
        None => Cursor {
            task: 0,
            level: 0,
            cursor: 0,
            frontier: start_state(),
            next: BTreeMap::new(),
            task_searched: 0,
            done: Vec::new(),
            witnesses: Vec::new(),
        },
        Some(cp) => {
            if cp.version != CHECKPOINT_VERSION {
                return Err(SearchError::Version(cp.version));
            }
            if cp.spec != *spec {
                return Err(SearchError::SpecMismatch);
            }
            let template = &tasks
                .get(cp.task)
                .ok_or_else(|| SearchError::Corrupt("task index out of range".into()))?
                .template;
            let frontier = to_states(&cp.frontier, template)?;
            if cp.cursor > frontier.len() {
                return Err(SearchError::Corrupt("cursor past frontier".into()));
            }
            let next = to_states(&cp.next, template)?
                .into_iter()
                .map(|s| (s.word, s.family))
                .collect();
            Cursor {
                task: cp.task,
                level: cp.level,
                cursor: cp.cursor,
                frontier,
                next,
                task_searched: cp.task_searched,
                done: cp.done,
                witnesses: cp.witnesses,
            }
        }
    };

    let started = Instant::now();
    let mut expanded = 0u64;
    while st.task < tasks.len() {
        let task = &tasks[st.task];
        let slots = task.template.slots.len();
        if st.level == slots || st.frontier.is_empty() {
            let mut found = 0;
            if st.level == slots {
                for s in &st.frontier {
                    if spec.is_witness(&s.family) {
                        found += 1;
                        st.witnesses.push(Witness {
                            task: task.name.clone(),
                            family: CombinatorialFileV1::from_family(&s.family),
                        });
                    }
                }
            }
            st.done.push(TaskReport {
                name: task.name.clone(),
                searched: st.task_searched,
                complete: if st.level == slots { st.frontier.len() as u64 } else { 0 },
                witnesses: found,
            });
            st.task += 1;
            st.level = 0;
            st.cursor = 0;
            st.frontier = start_state();
            st.task_searched = 0;
            continue;
        }

        let end = (st.cursor + CHUNK).min(st.frontier.len());
        let keep = |f: &CombinatorialFamily, level: usize| spec.keep(f, level);
        let found = next_level(&task.template, &st.frontier[st.cursor..end], &keep);
        expanded += (end - st.cursor) as u64;
        st.next.extend(found);
        st.cursor = end;
        if st.cursor == st.frontier.len() {
            st.frontier = std::mem::take(&mut st.next)
                .into_iter()
                .map(|(word, family)| State { word, family })
                .collect();
            st.level += 1;
            st.cursor = 0;
            st.task_searched += st.frontier.len() as u64;
        }

        let over = budget.max_expansions.is_some_and(|m| expanded >= m)
            || budget.wall.is_some_and(|w| started.elapsed() >= w);
        if over && st.task < tasks.len() {
            return Ok(RunResult::Paused(Box::new(Checkpoint {
                version: CHECKPOINT_VERSION,
                spec: spec.clone(),
                task: st.task,
                level: st.level,
                cursor: st.cursor,
                frontier: st.frontier.iter().map(|s| CombinatorialFileV1::from_family(&s.family)).collect(),
                next: st.next.values().map(CombinatorialFileV1::from_family).collect(),
                task_searched: st.task_searched,
                done: st.done.clone(),
                witnesses: st.witnesses.clone(),
            })));
        }
    }
    let searched = st.done.iter().map(|t| t.searched).sum();
    Ok(RunResult::Done(SearchOutcome {
        spec: spec.clone(),
        witnesses: st.witnesses,
        searched,
        tasks: st.done,
    }))
}

/// Runs to completion.
pub fn run_to_end(spec: &SearchSpec) -> SearchOutcome {
    match run_search(spec, Budget::default(), None) {
        Ok(RunResult::Done(o)) => o,
        _ => unreachable!("unbounded runs finish"),
    }
}

pub fn search_lemma41(limits: SearchLimits) -> SearchOutcome {
    run_to_end(&SearchSpec::lemma41(false, limits))
}

pub fn search_lemma41_relaxed(limits: SearchLimits) -> SearchOutcome {
    run_to_end(&SearchSpec::lemma41(true, limits))
}

pub fn search_lemma42(h: usize, limits: SearchLimits) -> SearchOutcome {
    run_to_end(&SearchSpec::lemma42(h, limits))
}

/// Limits, counts and timing of one run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub spec: SearchSpec,
    pub budget: Budget,
    /// The enumeration is deterministic; recorded for completeness.
    pub seed: u64,
    pub searched: u64,
    pub witnesses: usize,
    pub tasks: Vec<TaskReport>,
    pub wall_ms: u64,
    pub resumed: bool,
}
