//! Exhaustive search for tiny instances and LP export of the linearized
//! model.
//!
//! The search here does not use the decoder or the feasibility checker of
//! [`schedule`](crate::schedule); it keeps its own occupancy and window
//! bookkeeping so it can serve as an independent reference.

mod lp;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::instance::{CostMode, Instance};
use crate::schedule::Chromosome;

pub use lp::{build_model, export_lp, parse_lp, solve_by_enumeration, LpModel, LpRow, LpSolution, MilpExportConfig, Semantics, Sense};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactLimits {
    pub max_activities: usize,
    pub max_modes_total: usize,
    pub max_horizon: u32,
    /// Search nodes (placements tried) before giving up.
    pub node_budget: u64,
}

impl Default for ExactLimits {
    fn default() -> Self {
        Self { max_activities: 12, max_modes_total: 36, max_horizon: 64, node_budget: 200_000_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSolution {
    pub solution: Chromosome,
    pub objective: f64,
    /// False when the node budget ran out before the search space was
    /// exhausted.
    pub proven: bool,
    pub nodes: u64,
}

fn check_limits(inst: &Instance, limits: &ExactLimits) -> Result<(), SolveError> {
    if inst.n_activities() > limits.max_activities {
        return Err(SolveError::OutOfLimits(format!("{} activities > {}", inst.n_activities(), limits.max_activities)));
    }
    if inst.total_modes() > limits.max_modes_total {
        return Err(SolveError::OutOfLimits(format!("{} modes > {}", inst.total_modes(), limits.max_modes_total)));
    }
    if inst.deadline > limits.max_horizon {
        return Err(SolveError::OutOfLimits(format!("deadline {} > {}", inst.deadline, limits.max_horizon)));
    }
    Ok(())
}

struct Search<'a> {
    inst: &'a Instance,
    order: Vec<usize>,
    tail: Vec<u32>,
    /// `rest[i][k]`: largest unavoidable demand for `k` among `order[i..]`.
    rest: Vec<Vec<u32>>,
    len: usize,
    occ: Vec<Vec<u32>>,
    peak: Vec<u32>,
    win: Vec<Option<(u32, u32)>>,
    start: Vec<u32>,
    mode: Vec<usize>,
    best: Option<(f64, Vec<u32>, Vec<usize>)>,
    nodes: u64,
    budget: u64,
    aborted: bool,
}

impl<'a> Search<'a> {
    fn new(inst: &'a Instance, budget: u64) -> Self {
        let n = inst.n_activities();
        let k = inst.n_workshops();
        let order = topo(inst);
        let tail = inst.min_tail();
        let mut rest = vec![vec![0u32; k]; n + 1];
        for i in (0..n).rev() {
            let a = order[i];
            for w in 0..k {
                let unavoidable = inst.activities[a]
                    .modes
                    .iter()
                    .map(|m| if m.duration > 0 { m.space[w] } else { 0 })
                    .min()
                    .unwrap_or(0);
                rest[i][w] = rest[i + 1][w].max(unavoidable);
            }
        }
        let len = inst.deadline as usize;
        Self {
            inst,
            order,
            tail,
            rest,
            len,
            occ: vec![vec![0; len]; k],
            peak: vec![0; k],
            win: vec![None; k],
            start: vec![0; n],
            mode: vec![0; n],
            best: None,
            nodes: 0,
            budget,
            aborted: false,
        }
    }

    fn bound(&self, depth: usize) -> f64 {
        let inst = self.inst;
        match inst.cost_mode {
            CostMode::Level => (0..inst.n_workshops()).map(|k| inst.workshops[k].unit_cost * f64::from(self.peak[k].max(self.rest[depth][k]))).sum(),
            CostMode::Duration => self
                .win
                .iter()
                .zip(&inst.workshops)
                .map(|(w, ws)| match w {
                    Some((lo, hi)) => ws.cost_per_day.unwrap_or(0.0) * f64::from(hi - lo - 1),
                    None => 0.0,
                })
                .sum(),
        }
    }

    fn site_ok(&self) -> bool {
        (0..self.len as u32).all(|t| {
            let load: u64 = self
                .win
                .iter()
                .zip(&self.peak)
                .filter(|(w, _)| matches!(w, Some((lo, hi)) if *lo <= t && t < *hi))
                .map(|(_, &p)| u64::from(p))
                .sum();
            load <= u64::from(self.inst.site_capacity)
        })
    }

    fn dfs(&mut self, depth: usize) {
        if self.aborted {
            return;
        }
        let inst = self.inst;
        if depth == self.order.len() {
            let cost = self.bound(depth);
            if self.best.as_ref().is_none_or(|(b, _, _)| cost < *b - 1e-9) {
                self.best = Some((cost, self.start.clone(), self.mode.clone()));
            }
            return;
        }
        let a = self.order[depth];
        let k = inst.n_workshops();
        for m in 0..inst.activities[a].modes.len() {
            let spec = &inst.activities[a].modes[m];
            let d = spec.duration;
            let es = inst.activities[a].predecessors.iter().map(|&p| self.start[p] + inst.mode(p, self.mode[p]).duration).max().unwrap_or(0);
            let Some(ls) = inst.deadline.checked_sub(d + self.tail[a]) else { continue };
            let ls = if d == 0 { es.min(ls) } else { ls };
            for s in es..=ls {
                self.nodes += 1;
                if self.nodes > self.budget {
                    self.aborted = true;
                    return;
                }
                let saved_peak = self.peak.clone();
                let saved_win = self.win.clone();
                let mut ok = true;
                for w in 0..k {
                    if d == 0 || spec.space[w] == 0 {
                        continue;
                    }
                    for t in s..s + d {
                        let cell = &mut self.occ[w][t as usize];
                        *cell += spec.space[w];
                        self.peak[w] = self.peak[w].max(*cell);
                    }
                    let (lo, hi) = match self.win[w] {
                        None => (s, s + d),
                        Some((lo, hi)) => (lo.min(s), hi.max(s + d)),
                    };
                    self.win[w] = Some((lo, hi));
                    if inst.workshops[w].max_lifetime.is_some_and(|l| hi - lo > l) {
                        ok = false;
                    }
                }
                self.start[a] = s;
                self.mode[a] = m;
                if ok && self.site_ok() {
                    let lb = self.bound(depth + 1);
                    if self.best.as_ref().is_none_or(|(b, _, _)| lb < *b - 1e-9) {
                        self.dfs(depth + 1);
                    }
                }
                for w in 0..k {
                    if d == 0 || spec.space[w] == 0 {
                        continue;
                    }
                    for t in s..s + d {
                        self.occ[w][t as usize] -= spec.space[w];
                    }
                }
                self.peak = saved_peak;
                self.win = saved_win;
                if self.aborted {
                    return;
                }
            }
        }
    }
}

/// Kahn order by ascending index, computed locally.
fn topo(inst: &Instance) -> Vec<usize> {
    let n = inst.n_activities();
    let mut indeg: Vec<usize> = inst.activities.iter().map(|a| a.predecessors.len()).collect();
    let succ = inst.successors();
    let mut ready: std::collections::BTreeSet<usize> = (0..n).filter(|&j| indeg[j] == 0).collect();
    let mut order = Vec::with_capacity(n);
    while let Some(j) = ready.pop_first() {
        order.push(j);
        for &s in &succ[j] {
            indeg[s] -= 1;
            if indeg[s] == 0 {
                ready.insert(s);
            }
        }
    }
    order
}

/// Provably optimal schedule by depth-first search over modes and starts,
/// with every availability level set to the workshop's peak occupancy.
pub fn enumerate_optimal(inst: &Instance, limits: &ExactLimits) -> Result<ExactSolution, SolveError> {
    check_limits(inst, limits)?;
    if topo(inst).len() != inst.n_activities() {
        return Err(SolveError::InvalidInstance(inst.validate()));
    }
    let mut search = Search::new(inst, limits.node_budget);
    search.dfs(0);
    let proven = !search.aborted;
    match search.best {
        Some((objective, start, mode)) => {
            let peaks = peak_levels(inst, &start, &mode);
            let solution = Chromosome::from_schedule(inst, start, mode, peaks);
            Ok(ExactSolution { solution, objective, proven, nodes: search.nodes })
        }
        None if proven => Err(SolveError::Infeasible),
        None => Err(SolveError::BudgetExhausted),
    }
}

fn peak_levels(inst: &Instance, start: &[u32], mode: &[usize]) -> Vec<u32> {
    (0..inst.n_workshops())
        .map(|k| {
            let horizon = (0..start.len()).map(|a| start[a] + inst.mode(a, mode[a]).duration).max().unwrap_or(0);
            (0..horizon)
                .map(|t| {
                    (0..start.len())
                        .filter(|&a| start[a] <= t && t < start[a] + inst.mode(a, mode[a]).duration)
                        .map(|a| inst.mode(a, mode[a]).space[k])
                        .sum::<u32>()
                })
                .max()
                .unwrap_or(0)
        })
        .collect()
}

/// Shortest makespan over all start vectors for fixed modes and
/// availability levels, with the schedule attaining it.
pub fn enumerate_min_makespan(inst: &Instance, mode: &[usize], avail: &[u32]) -> Option<(u32, Vec<u32>)> {
    struct Ms<'a> {
        inst: &'a Instance,
        mode: &'a [usize],
        avail: &'a [u32],
        order: Vec<usize>,
        tail: Vec<u32>,
        occ: Vec<Vec<u32>>,
        win: Vec<Option<(u32, u32)>>,
        start: Vec<u32>,
        best: Option<(u32, Vec<u32>)>,
    }
    impl Ms<'_> {
        fn dfs(&mut self, depth: usize, makespan: u32) {
            let inst = self.inst;
            if depth == self.order.len() {
                if self.best.as_ref().is_none_or(|(b, _)| makespan < *b) {
                    self.best = Some((makespan, self.start.clone()));
                }
                return;
            }
            let a = self.order[depth];
            let spec = inst.mode(a, self.mode[a]);
            let d = spec.duration;
            let es = inst.activities[a].predecessors.iter().map(|&p| self.start[p] + inst.mode(p, self.mode[p]).duration).max().unwrap_or(0);
            let Some(ls) = inst.deadline.checked_sub(d + self.tail[a]) else { return };
            let ls = if d == 0 { es.min(ls) } else { ls };
            for s in es..=ls {
                let cap = self.best.as_ref().map_or(u32::MAX, |(b, _)| *b);
                if s + d + self.tail[a] >= cap {
                    break;
                }
                let used: Vec<usize> = (0..inst.n_workshops()).filter(|&k| d > 0 && spec.space[k] > 0).collect();
                let fits = used.iter().all(|&k| (s..s + d).all(|t| self.occ[k][t as usize] + spec.space[k] <= self.avail[k]));
                if !fits {
                    continue;
                }
                let saved = self.win.clone();
                let mut ok = true;
                for &k in &used {
                    let (lo, hi) = self.win[k].map_or((s, s + d), |(lo, hi)| (lo.min(s), hi.max(s + d)));
                    self.win[k] = Some((lo, hi));
                    if inst.workshops[k].max_lifetime.is_some_and(|l| hi - lo > l) {
                        ok = false;
                    }
                }
                ok = ok
                    && (0..inst.deadline).all(|t| {
                        self.win
                            .iter()
                            .zip(self.avail)
                            .filter(|(w, _)| matches!(w, Some((lo, hi)) if *lo <= t && t < *hi))
                            .map(|(_, &r)| u64::from(r))
                            .sum::<u64>()
                            <= u64::from(inst.site_capacity)
                    });
                if ok {
                    for &k in &used {
                        for t in s..s + d {
                            self.occ[k][t as usize] += spec.space[k];
                        }
                    }
                    self.start[a] = s;
                    self.dfs(depth + 1, makespan.max(s + d));
                    for &k in &used {
                        for t in s..s + d {
                            self.occ[k][t as usize] -= spec.space[k];
                        }
                    }
                }
                self.win = saved;
            }
        }
    }
    let order = topo(inst);
    if order.len() != inst.n_activities() {
        return None;
    }
    let mut ms = Ms {
        inst,
        mode,
        avail,
        tail: tail_for(inst, mode, &order),
        order,
        occ: vec![vec![0; inst.deadline as usize]; inst.n_workshops()],
        win: vec![None; inst.n_workshops()],
        start: vec![0; inst.n_activities()],
        best: None,
    };
    ms.dfs(0, 0);
    ms.best
}

fn tail_for(inst: &Instance, mode: &[usize], order: &[usize]) -> Vec<u32> {
    let succ = inst.successors();
    let mut tail = vec![0u32; inst.n_activities()];
    for &j in order.iter().rev() {
        tail[j] = succ[j].iter().map(|&s| inst.mode(s, mode[s]).duration + tail[s]).max().unwrap_or(0);
    }
    tail
}
