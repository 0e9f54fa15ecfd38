//! Active-clock event loop.
//!
//! The process keeps the infected vertices and the directed boundary edges
//! (infected source, healthy target) in swap-remove index sets, so every
//! event costs O(d): total rates are read off the set sizes exactly, the
//! event kind is drawn proportionally, and a uniform member of the relevant
//! set is flipped. No rejection sampling anywhere.

use rand::Rng;
use rand_chacha::ChaCha8Rng;

use super::{Configuration, EngineError};
use crate::graph::Adjacency;
use crate::rng::{exp_sample, rng_from};

/// Index set over a dense universe with O(1) insert/remove/sample.
pub(crate) struct FixedSet {
    items: Vec<u32>,
    pos: Vec<u32>,
}

const ABSENT: u32 = u32::MAX;

impl FixedSet {
    pub fn new(universe: usize) -> Self {
        FixedSet { items: Vec::new(), pos: vec![ABSENT; universe] }
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.items.len()
    }

    #[inline]
    pub fn contains(&self, x: u32) -> bool {
        self.pos[x as usize] != ABSENT
    }

    #[inline]
    pub fn insert(&mut self, x: u32) {
        debug_assert!(!self.contains(x));
        self.pos[x as usize] = self.items.len() as u32;
        self.items.push(x);
    }

    #[inline]
    pub fn remove(&mut self, x: u32) {
        let p = self.pos[x as usize];
        debug_assert_ne!(p, ABSENT);
        let last = *self.items.last().unwrap();
        self.items.swap_remove(p as usize);
        if last != x {
            self.pos[last as usize] = p;
        }
        self.pos[x as usize] = ABSENT;
    }

    #[inline]
    pub fn get(&self, i: usize) -> u32 {
        self.items[i]
    }

    pub fn items(&self) -> &[u32] {
        &self.items
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepEvent {
    Recovery { vertex: u32, time: f64 },
    Infection { source: u32, target: u32, time: f64 },
}

impl StepEvent {
    pub fn time(&self) -> f64 {
        match *self {
            StepEvent::Recovery { time, .. } | StepEvent::Infection { time, .. } => time,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BoundedStep {
    /// An event was committed at `StepEvent::time() <= limit`.
    Event(StepEvent),
    /// The next event would land beyond the limit; time advanced to it.
    Limit,
    /// The infected set is empty; the state is absorbing.
    Absorbed,
}

/// A running contact process on a fixed graph.
pub struct Process<'g> {
    g: &'g Adjacency,
    lambda: f64,
    infected: FixedSet,
    /// Directed edge ids with infected source and healthy target.
    boundary: FixedSet,
    t: f64,
    events: u64,
    rng: ChaCha8Rng,
}

impl<'g> Process<'g> {
    pub fn new(
        g: &'g Adjacency,
        lambda: f64,
        init: &Configuration,
        seed: u64,
    ) -> Result<Self, EngineError> {
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(EngineError::InvalidRate(lambda));
        }
        let n = g.vertex_count();
        if let Some(v) = init.infected().max_id() {
            if v as usize >= n {
                return Err(EngineError::VertexOutOfRange { v, n: n as u32 });
            }
        }
        let mut p = Process {
            g,
            lambda,
            infected: FixedSet::new(n),
            boundary: FixedSet::new(g.directed_edge_count()),
            t: 0.0,
            events: 0,
            rng: rng_from(seed),
        };
        for v in init.infected().iter() {
            p.infected.insert(v);
        }
        for v in init.infected().iter() {
            let off = g.edge_offset(v);
            for (i, &u) in g.neighbors(v).iter().enumerate() {
                if !p.infected.contains(u) {
                    p.boundary.insert(off + i as u32);
                }
            }
        }
        Ok(p)
    }

    #[inline]
    pub fn time(&self) -> f64 {
        self.t
    }

    #[inline]
    pub fn count(&self) -> usize {
        self.infected.len()
    }

    #[inline]
    pub fn events(&self) -> u64 {
        self.events
    }

    #[inline]
    pub fn is_infected(&self, v: u32) -> bool {
        self.infected.contains(v)
    }

    /// (recovery rate, infection rate, total) at the current state.
    pub fn rates(&self) -> (f64, f64, f64) {
        let rec = self.infected.len() as f64;
        let inf = self.lambda * self.boundary.len() as f64;
        (rec, inf, rec + inf)
    }

    pub fn configuration(&self) -> Configuration {
        Configuration::new(crate::graph::VertexSet::new(self.infected.items().to_vec()))
    }

    fn infect(&mut self, v: u32) {
        self.infected.insert(v);
        let off = self.g.edge_offset(v);
        for (i, &u) in self.g.neighbors(v).iter().enumerate() {
            if self.infected.contains(u) {
                // u -> v stops being a boundary edge.
                self.boundary.remove(self.g.directed_id(u, v));
            } else {
                self.boundary.insert(off + i as u32);
            }
        }
    }

    fn recover(&mut self, v: u32) {
        self.infected.remove(v);
        let off = self.g.edge_offset(v);
        for (i, &u) in self.g.neighbors(v).iter().enumerate() {
            if self.infected.contains(u) {
                self.boundary.insert(self.g.directed_id(u, v));
            } else {
                self.boundary.remove(off + i as u32);
            }
        }
    }

    /// Advances by one event unless it would land past `limit`, in which case
    /// time moves to `limit` and the pending draw is discarded (the clocks
    /// are memoryless, so restarting them at `limit` leaves the law intact).
    pub fn step_bounded(&mut self, limit: f64) -> BoundedStep {
        let n_inf = self.infected.len();
        if n_inf == 0 {
            return BoundedStep::Absorbed;
        }
        let rec_rate = n_inf as f64;
        let total = rec_rate + self.lambda * self.boundary.len() as f64;
        let dt = exp_sample(&mut self.rng, total);
        if self.t + dt > limit {
            self.t = limit;
            return BoundedStep::Limit;
        }
        self.t += dt;
        self.events += 1;
        let u: f64 = self.rng.random();
        if u * total < rec_rate {
            let v = self.infected.get(self.rng.random_range(0..n_inf));
            self.recover(v);
            BoundedStep::Event(StepEvent::Recovery { vertex: v, time: self.t })
        } else {
            let e = self.boundary.get(self.rng.random_range(0..self.boundary.len()));
            let (src, dst) = self.g.directed_edge(e);
            debug_assert!(self.infected.contains(src) && !self.infected.contains(dst));
            self.infect(dst);
            BoundedStep::Event(StepEvent::Infection { source: src, target: dst, time: self.t })
        }
    }

    /// Runs to `limit`; reports absorption (with its exact time) if the
    /// process dies first.
    pub fn run_until(&mut self, limit: f64) -> RunOutcome {
        loop {
            match self.step_bounded(limit) {
                BoundedStep::Event(_) => {}
                BoundedStep::Limit => return RunOutcome::Reached,
                BoundedStep::Absorbed => return RunOutcome::Absorbed(self.t),
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RunOutcome {
    Absorbed(f64),
    Reached,
}
