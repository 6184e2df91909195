//! Exact minimum-weight hitting sets.
//!
//! [`solve_optimal`] is a depth-first branch-and-bound seeded with the
//! primal-dual solution. [`solve_bruteforce`] enumerates all subsets and
//! exists to cross-check it.

use serde::{Deserialize, Serialize};
use web_time::{Duration, Instant};

use crate::engine::{run_general, AlgoConfig};
use crate::instance::{HittingSetInstance, Solution};
use crate::{Error, Result};

pub const DEFAULT_BUDGET_MS: u64 = 10_000;
pub const BRUTEFORCE_MAX_ELEMENTS: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SolveStatus {
    Optimal,
    Timeout,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalSolution {
    pub chosen: Vec<usize>,
    pub weight: f64,
    pub status: SolveStatus,
    pub nodes_explored: u64,
}

impl OptimalSolution {
    pub fn solution(&self) -> Solution {
        Solution {
            chosen: self.chosen.clone(),
            weight: self.weight,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Decision {
    Open,
    In,
    Out,
}

struct Search<'a> {
    inst: &'a HittingSetInstance,
    decision: Vec<Decision>,
    /// Number of included elements in each set.
    hits: Vec<u32>,
    partial: f64,
    best: f64,
    best_set: Vec<usize>,
    nodes: u64,
    deadline: Option<Instant>,
    timed_out: bool,
}

enum Pick {
    Done,
    Dead,
    Forced(usize),
    Branch(usize),
}

impl<'a> Search<'a> {
    fn include(&mut self, e: usize) {
        self.decision[e] = Decision::In;
        self.partial += self.inst.weights()[e];
        for &t in self.inst.sets_of(e) {
            self.hits[t] += 1;
        }
    }

    fn undo_include(&mut self, e: usize, partial: f64) {
        self.decision[e] = Decision::Open;
        self.partial = partial;
        for &t in self.inst.sets_of(e) {
            self.hits[t] -= 1;
        }
    }

    fn open_degree(&self, e: usize) -> usize {
        self.inst
            .sets_of(e)
            .iter()
            .filter(|&&t| self.hits[t] == 0)
            .count()
    }

    /// Admissible bound: each unhit set needs some open member `e`, which
    /// can pay for at most `d_e` unhit sets, so it contributes at least
    /// `min_e w_e / d_e`.
    fn lower_bound(&self) -> f64 {
        let mut bound = self.partial;
        for (t, set) in self.inst.sets().iter().enumerate() {
            if self.hits[t] > 0 {
                continue;
            }
            let cheapest = set
                .iter()
                .filter(|&&e| self.decision[e] == Decision::Open)
                .map(|&e| self.inst.weights()[e] / self.open_degree(e) as f64)
                .fold(f64::INFINITY, f64::min);
            bound += cheapest;
        }
        bound
    }

    fn pick(&self) -> Pick {
        let mut any_unhit = false;
        for (t, set) in self.inst.sets().iter().enumerate() {
            if self.hits[t] > 0 {
                continue;
            }
            any_unhit = true;
            let mut open = set.iter().filter(|&&e| self.decision[e] == Decision::Open);
            match (open.next(), open.next()) {
                (None, _) => return Pick::Dead,
                (Some(&e), None) => return Pick::Forced(e),
                _ => {}
            }
        }
        if !any_unhit {
            return Pick::Done;
        }
        // highest unhit-degree per unit weight, lowest index on ties
        let mut best: Option<(usize, f64)> = None;
        for e in 0..self.inst.n_elements() {
            if self.decision[e] != Decision::Open {
                continue;
            }
            let d = self.open_degree(e);
            if d == 0 {
                continue;
            }
            let w = self.inst.weights()[e];
            let score = if w > 0.0 { d as f64 / w } else { f64::INFINITY };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((e, score));
            }
        }
        Pick::Branch(best.expect("an unhit set has open members").0)
    }

    fn out_of_time(&mut self) -> bool {
        if self.timed_out {
            return true;
        }
        if let Some(deadline) = self.deadline {
            if (self.nodes - 1).is_multiple_of(1024) && Instant::now() >= deadline {
                self.timed_out = true;
            }
        }
        self.timed_out
    }

    fn slack(&self) -> f64 {
        1e-12 * self.best.abs().max(1.0)
    }

    fn dfs(&mut self) {
        self.nodes += 1;
        if self.out_of_time() {
            return;
        }
        if self.lower_bound() >= self.best - self.slack() {
            return;
        }
        match self.pick() {
            Pick::Dead => {}
            Pick::Done => {
                if self.partial < self.best {
                    self.best = self.partial;
                    self.best_set = (0..self.inst.n_elements())
                        .filter(|&e| self.decision[e] == Decision::In)
                        .collect();
                }
            }
            Pick::Forced(e) => {
                let saved = self.partial;
                self.include(e);
                self.dfs();
                self.undo_include(e, saved);
            }
            Pick::Branch(e) => {
                let saved = self.partial;
                self.include(e);
                self.dfs();
                self.undo_include(e, saved);
                self.decision[e] = Decision::Out;
                self.dfs();
                self.decision[e] = Decision::Open;
            }
        }
    }
}

/// Branch-and-bound optimum. On timeout the best incumbent is returned with
/// [`SolveStatus::Timeout`].
pub fn solve_optimal(instance: &HittingSetInstance, time_budget_ms: u64) -> Result<OptimalSolution> {
    let incumbent = run_general(instance, &AlgoConfig::default())?.final_solution;
    let mut search = Search {
        inst: instance,
        decision: vec![Decision::Open; instance.n_elements()],
        hits: vec![0; instance.n_sets()],
        partial: 0.0,
        best: incumbent.weight,
        best_set: incumbent.chosen,
        nodes: 0,
        deadline: Instant::now().checked_add(Duration::from_millis(time_budget_ms)),
        timed_out: false,
    };
    // zero-weight elements never hurt
    for e in 0..instance.n_elements() {
        if instance.weights()[e] == 0.0 && !instance.sets_of(e).is_empty() {
            search.include(e);
        }
    }
    search.dfs();
    let status = if search.timed_out {
        SolveStatus::Timeout
    } else {
        SolveStatus::Optimal
    };
    let solution = Solution::new(instance, search.best_set)?;
    Ok(OptimalSolution {
        chosen: solution.chosen,
        weight: solution.weight,
        status,
        nodes_explored: search.nodes,
    })
}

/// Exhaustive enumeration over all `2^n` subsets (`n <= 25`).
pub fn solve_bruteforce(instance: &HittingSetInstance) -> Result<OptimalSolution> {
    let n = instance.n_elements();
    if n > BRUTEFORCE_MAX_ELEMENTS {
        return Err(Error::SizeExceeded {
            n,
            max: BRUTEFORCE_MAX_ELEMENTS,
        });
    }
    let masks: Vec<u32> = instance
        .sets()
        .iter()
        .map(|s| s.iter().fold(0u32, |m, &e| m | 1 << e))
        .collect();
    // subset weights from two half tables
    let lo_bits = n / 2;
    let hi_bits = n - lo_bits;
    let table = |offset: usize, bits: usize| -> Vec<f64> {
        let mut t = vec![0.0; 1 << bits];
        for m in 1..(1usize << bits) {
            let low = m.trailing_zeros() as usize;
            t[m] = t[m & (m - 1)] + instance.weights()[offset + low];
        }
        t
    };
    let lo = table(0, lo_bits);
    let hi = table(lo_bits, hi_bits);
    let lo_mask = (1u32 << lo_bits) - 1;

    let mut best = f64::INFINITY;
    let mut best_mask = 0u32;
    let total: u64 = 1 << n;
    for m in 0..total {
        let m = m as u32;
        let w = lo[(m & lo_mask) as usize] + hi[(m >> lo_bits) as usize];
        if w >= best {
            continue;
        }
        if masks.iter().all(|&s| s & m != 0) {
            best = w;
            best_mask = m;
        }
    }
    let chosen = (0..n).filter(|&e| best_mask >> e & 1 == 1).collect();
    let solution = Solution::new(instance, chosen)?;
    Ok(OptimalSolution {
        chosen: solution.chosen,
        weight: solution.weight,
        status: SolveStatus::Optimal,
        nodes_explored: total,
    })
}
