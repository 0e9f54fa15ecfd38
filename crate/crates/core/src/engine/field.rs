//! The mark/arrow field: all recovery marks (rate 1 per vertex) and infection
//! arrows (rate lambda per directed edge) on a time window, realized as
//! independent Poisson streams.
//!
//! Every initial configuration can be driven by the same field, which makes
//! the coupling monotone and additive pathwise, and running the window
//! backward with arrows reversed gives the dual process.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt::Write as _;

use rand_chacha::ChaCha8Rng;

use super::{Checkpoint, Configuration, EngineError, ExtinctionSample, TrajectorySummary};
use crate::graph::{Adjacency, VertexSet};
use crate::numfmt::fixed12;
use crate::rng::{clock_rng, exp_sample};

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Mark {
    pub vertex: u32,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct Arrow {
    pub source: u32,
    pub target: u32,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldEvent {
    Mark(Mark),
    Arrow(Arrow),
}

impl FieldEvent {
    pub fn time(&self) -> f64 {
        match self {
            FieldEvent::Mark(m) => m.time,
            FieldEvent::Arrow(a) => a.time,
        }
    }
}

/// Materialized field on `[0, t_max]`; marks and arrows are each sorted by
/// time, and times are strictly increasing within every per-vertex and
/// per-edge clock.
#[derive(Debug, Clone)]
pub struct EventField {
    pub t_max: f64,
    pub marks: Vec<Mark>,
    pub arrows: Vec<Arrow>,
    n: usize,
}

/// Lazy merged stream of the per-vertex mark clocks and per-edge arrow
/// clocks, in global time order. Each clock draws from its own substream, so
/// the realization depends only on (seed, clock id).
pub(crate) struct ClockStream<'g> {
    g: &'g Adjacency,
    lambda: f64,
    heap: BinaryHeap<Reverse<HeapEntry>>,
    rngs: Vec<ChaCha8Rng>,
}

#[derive(Debug, PartialEq)]
struct HeapEntry {
    time: f64,
    clock: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.time.total_cmp(&other.time).then(self.clock.cmp(&other.clock))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl<'g> ClockStream<'g> {
    pub fn new(g: &'g Adjacency, lambda: f64, seed: u64) -> Self {
        let n = g.vertex_count();
        let arrow_clocks = if lambda > 0.0 { g.directed_edge_count() } else { 0 };
        let mut heap = BinaryHeap::with_capacity(n + arrow_clocks);
        let mut rngs = Vec::with_capacity(n + arrow_clocks);
        for clock in 0..(n + arrow_clocks) as u32 {
            let mut rng = clock_rng(seed, u64::from(clock));
            let rate = if (clock as usize) < n { 1.0 } else { lambda };
            let time = exp_sample(&mut rng, rate);
            rngs.push(rng);
            heap.push(Reverse(HeapEntry { time, clock }));
        }
        ClockStream { g, lambda, heap, rngs }
    }

    pub fn next_event(&mut self) -> FieldEvent {
        let Reverse(HeapEntry { time, clock }) = self.heap.pop().expect("mark clocks never stop");
        let n = self.g.vertex_count();
        let rate = if (clock as usize) < n { 1.0 } else { self.lambda };
        let gap = exp_sample(&mut self.rngs[clock as usize], rate);
        self.heap.push(Reverse(HeapEntry { time: time + gap, clock }));
        if (clock as usize) < n {
            FieldEvent::Mark(Mark { vertex: clock, time })
        } else {
            let (source, target) = self.g.directed_edge(clock - n as u32);
            FieldEvent::Arrow(Arrow { source, target, time })
        }
    }
}

impl EventField {
    /// Realizes the complete field on `[0, t_max]`.
    pub fn generate(
        g: &Adjacency,
        lambda: f64,
        t_max: f64,
        seed: u64,
    ) -> Result<Self, EngineError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(EngineError::InvalidRate(lambda));
        }
        if !t_max.is_finite() || t_max < 0.0 {
            return Err(EngineError::InvalidTime(t_max));
        }
        let mut stream = ClockStream::new(g, lambda, seed);
        let mut marks = Vec::new();
        let mut arrows = Vec::new();
        loop {
            match stream.next_event() {
                FieldEvent::Mark(m) => {
                    if m.time > t_max {
                        break;
                    }
                    marks.push(m);
                }
                FieldEvent::Arrow(a) => {
                    if a.time > t_max {
                        break;
                    }
                    arrows.push(a);
                }
            }
        }
        Ok(EventField { t_max, marks, arrows, n: g.vertex_count() })
    }

    pub fn vertex_count(&self) -> usize {
        self.n
    }

    /// Marks and arrows merged into global time order.
    pub fn events(&self) -> impl Iterator<Item = FieldEvent> + '_ {
        MergedEvents { field: self, mark: 0, arrow: 0 }
    }

    fn events_rev(&self) -> impl Iterator<Item = FieldEvent> + '_ {
        MergedEventsRev {
            field: self,
            mark: self.marks.len(),
            arrow: self.arrows.len(),
        }
    }

    /// Drives `init` through the field, recording infected counts at the
    /// requested (ascending) checkpoint times.
    pub fn apply(
        &self,
        init: &Configuration,
        checkpoints: &[f64],
    ) -> Result<TrajectorySummary, EngineError> {
        let mut infected = vec![false; self.n];
        let mut count = 0usize;
        for v in init.infected().iter() {
            if v as usize >= self.n {
                return Err(EngineError::VertexOutOfRange { v, n: self.n as u32 });
            }
            infected[v as usize] = true;
            count += 1;
        }
        let mut cps = checkpoints.iter();
        let mut next_cp = cps.next();
        let mut recorded = Vec::with_capacity(checkpoints.len());
        let mut extinction = if count == 0 { Some(0.0) } else { None };
        let mut events = 0u64;
        for ev in self.events() {
            while let Some(&cp) = next_cp {
                if ev.time() > cp {
                    recorded.push(Checkpoint { time: cp, infected: count as u32 });
                    next_cp = cps.next();
                } else {
                    break;
                }
            }
            if extinction.is_some() {
                // Absorbing: nothing past extinction can change the state.
                break;
            }
            events += 1;
            match ev {
                FieldEvent::Mark(m) => {
                    if infected[m.vertex as usize] {
                        infected[m.vertex as usize] = false;
                        count -= 1;
                        if count == 0 {
                            extinction = Some(m.time);
                        }
                    }
                }
                FieldEvent::Arrow(a) => {
                    if infected[a.source as usize] && !infected[a.target as usize] {
                        infected[a.target as usize] = true;
                        count += 1;
                    }
                }
            }
        }
        while let Some(&cp) = next_cp {
            recorded.push(Checkpoint { time: cp, infected: count as u32 });
            next_cp = cps.next();
        }
        let members = (0..self.n as u32).filter(|&v| infected[v as usize]).collect();
        Ok(TrajectorySummary {
            final_config: Configuration::new(VertexSet::new(members)),
            extinction_time: extinction,
            checkpoints: recorded,
            events,
        })
    }

    /// Runs the dual process from `targets` backward over the window tail of
    /// length `t_back`: arrows act reversed, marks kill. The result is the
    /// set of vertices from which an infection path through this field
    /// reaches `targets` at the window end.
    pub fn dual(&self, targets: &Configuration, t_back: f64) -> Result<Configuration, EngineError> {
        if !(0.0..=self.t_max).contains(&t_back) {
            return Err(EngineError::DualWindowExceeded { t_back, t_max: self.t_max });
        }
        let cutoff = self.t_max - t_back;
        let mut active = vec![false; self.n];
        for v in targets.infected().iter() {
            if v as usize >= self.n {
                return Err(EngineError::VertexOutOfRange { v, n: self.n as u32 });
            }
            active[v as usize] = true;
        }
        for ev in self.events_rev() {
            if ev.time() <= cutoff {
                break;
            }
            match ev {
                FieldEvent::Mark(m) => active[m.vertex as usize] = false,
                FieldEvent::Arrow(a) => {
                    if active[a.target as usize] {
                        active[a.source as usize] = true;
                    }
                }
            }
        }
        let members = (0..self.n as u32).filter(|&v| active[v as usize]).collect();
        Ok(Configuration::new(VertexSet::new(members)))
    }

    /// CSV with header `kind,time,vertex,target`; marks leave the target
    /// column empty. Times carry 12 fractional digits.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("kind,time,vertex,target\n");
        for ev in self.events() {
            match ev {
                FieldEvent::Mark(m) => {
                    writeln!(out, "mark,{},{},", fixed12(m.time), m.vertex).unwrap()
                }
                FieldEvent::Arrow(a) => {
                    writeln!(out, "arrow,{},{},{}", fixed12(a.time), a.source, a.target).unwrap()
                }
            }
        }
        out
    }
}

/// Merge order: time, then marks before arrows, then ids. Ties across
/// distinct clocks happen with probability zero; the ordering just needs to
/// be deterministic.
fn event_key(ev: &FieldEvent) -> (f64, u8, u32, u32) {
    match *ev {
        FieldEvent::Mark(m) => (m.time, 0, m.vertex, 0),
        FieldEvent::Arrow(a) => (a.time, 1, a.source, a.target),
    }
}

fn key_le(a: &FieldEvent, b: &FieldEvent) -> bool {
    let (ta, ka, ia, ja) = event_key(a);
    let (tb, kb, ib, jb) = event_key(b);
    (ta.total_cmp(&tb)).then(ka.cmp(&kb)).then(ia.cmp(&ib)).then(ja.cmp(&jb)).is_le()
}

struct MergedEvents<'f> {
    field: &'f EventField,
    mark: usize,
    arrow: usize,
}

impl Iterator for MergedEvents<'_> {
    type Item = FieldEvent;

    fn next(&mut self) -> Option<FieldEvent> {
        let m = self.field.marks.get(self.mark).map(|&m| FieldEvent::Mark(m));
        let a = self.field.arrows.get(self.arrow).map(|&a| FieldEvent::Arrow(a));
        match (m, a) {
            (None, None) => None,
            (Some(m), None) => {
                self.mark += 1;
                Some(m)
            }
            (None, Some(a)) => {
                self.arrow += 1;
                Some(a)
            }
            (Some(m), Some(a)) => {
                if key_le(&m, &a) {
                    self.mark += 1;
                    Some(m)
                } else {
                    self.arrow += 1;
                    Some(a)
                }
            }
        }
    }
}

struct MergedEventsRev<'f> {
    field: &'f EventField,
    mark: usize,
    arrow: usize,
}

impl Iterator for MergedEventsRev<'_> {
    type Item = FieldEvent;

    fn next(&mut self) -> Option<FieldEvent> {
        let m = self.mark.checked_sub(1).map(|i| FieldEvent::Mark(self.field.marks[i]));
        let a = self.arrow.checked_sub(1).map(|i| FieldEvent::Arrow(self.field.arrows[i]));
        match (m, a) {
            (None, None) => None,
            (Some(m), None) => {
                self.mark -= 1;
                Some(m)
            }
            (None, Some(a)) => {
                self.arrow -= 1;
                Some(a)
            }
            (Some(m), Some(a)) => {
                if key_le(&m, &a) {
                    self.arrow -= 1;
                    Some(a)
                } else {
                    self.mark -= 1;
                    Some(m)
                }
            }
        }
    }
}

/// Drives all initial configurations through one shared field, preserving
/// the pathwise monotonicity and additivity of the construction.
pub fn simulate_coupled(
    g: &Adjacency,
    lambda: f64,
    inits: &[Configuration],
    t_max: f64,
    checkpoints: &[f64],
    seed: u64,
) -> Result<(Vec<TrajectorySummary>, EventField), EngineError> {
    if inits.len() < 2 {
        return Err(EngineError::TooFew { what: "initial configurations", need: 2, got: inits.len() });
    }
    let field = EventField::generate(g, lambda, t_max, seed)?;
    let summaries: Result<Vec<_>, _> =
        inits.iter().map(|init| field.apply(init, checkpoints)).collect();
    Ok((summaries?, field))
}

/// Extinction sampling in field mode: the per-clock streams are consumed
/// lazily in time order, so the run is law-identical to materializing the
/// whole field and applying it, without bounding the window in advance.
pub fn extinction_time_full_field(
    g: &Adjacency,
    lambda: f64,
    init: &Configuration,
    t_cap: f64,
    seed: u64,
) -> Result<ExtinctionSample, EngineError> {
    if t_cap.is_nan() || t_cap <= 0.0 {
        return Err(EngineError::InvalidCap(t_cap));
    }
    if !lambda.is_finite() || lambda < 0.0 {
        return Err(EngineError::InvalidRate(lambda));
    }
    let n = g.vertex_count();
    let mut infected = vec![false; n];
    let mut count = 0usize;
    for v in init.infected().iter() {
        if v as usize >= n {
            return Err(EngineError::VertexOutOfRange { v, n: n as u32 });
        }
        infected[v as usize] = true;
        count += 1;
    }
    if count == 0 {
        return Ok(ExtinctionSample { tau: 0.0, censored: false, t_cap });
    }
    let mut stream = ClockStream::new(g, lambda, seed);
    loop {
        let ev = stream.next_event();
        if ev.time() > t_cap {
            return Ok(ExtinctionSample { tau: t_cap, censored: true, t_cap });
        }
        match ev {
            FieldEvent::Mark(m) => {
                if infected[m.vertex as usize] {
                    infected[m.vertex as usize] = false;
                    count -= 1;
                    if count == 0 {
                        return Ok(ExtinctionSample { tau: m.time, censored: false, t_cap });
                    }
                }
            }
            FieldEvent::Arrow(a) => {
                if infected[a.source as usize] && !infected[a.target as usize] {
                    infected[a.target as usize] = true;
                    count += 1;
                }
            }
        }
    }
}
