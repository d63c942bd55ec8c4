//! Electron radar search.
//!
//! A pool of streamers, each holding a feasible chromosome and an electron
//! budget, is visited round-robin. A visit runs a radar search around the
//! streamer's position: up to `radar_points` candidates, each a mutation of
//! `ceil(radius * len)` genes or, with probability `beta`, a crossover with
//! a fresh random solution, followed by the enabled improvement rules. The
//! streamer moves to the best candidate if it improves on its position.
//! Streamers that stagnate for `critical_value` visits or run out of
//! electrons are eliminated; an improving streamer forks a new random one
//! while the pool has room. The run ends when the pool is empty or the
//! budget is spent.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::instance::Instance;
use crate::operators::{apply_improvements, chromosome_len, crossover, mutate, population_member, random_solution, score, ImprovementMask, Score};
use crate::schedule::Chromosome;
use crate::solve::{Budget, SolveResult, Tracker};

const INIT_ATTEMPTS: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErsaParams {
    /// Initial and maximum pool size `N`.
    pub population: usize,
    /// Probability that a radar candidate comes from crossover.
    pub beta: f64,
    /// Electron budget of each streamer.
    pub electrons: u64,
    /// Visits without improvement before a streamer is eliminated.
    pub critical_value: u32,
    /// Fraction of genes perturbed per mutation candidate.
    pub radius: f64,
    /// Candidates sampled per radar search `M`.
    pub radar_points: usize,
    pub seed: u64,
    pub budget: Budget,
    pub improvement_mask: ImprovementMask,
}

impl Default for ErsaParams {
    fn default() -> Self {
        Self {
            population: 60,
            beta: 0.5,
            electrons: 1500,
            critical_value: 50,
            radius: 0.2,
            radar_points: 3600,
            seed: 0,
            budget: Budget::default(),
            improvement_mask: ImprovementMask::ALL,
        }
    }
}

impl ErsaParams {
    pub fn is_valid(&self) -> bool {
        self.population >= 1
            && self.electrons >= 1
            && self.critical_value >= 1
            && self.radar_points >= 1
            && (0.0..=1.0).contains(&self.beta)
            && self.radius > 0.0
            && self.radius <= 1.0
    }

    /// Genes resampled per mutation candidate.
    pub fn mutation_genes(&self, inst: &Instance) -> usize {
        let len = chromosome_len(inst);
        ((self.radius * len as f64).ceil() as usize).clamp(1, len.max(1))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Streamer {
    pub current: Chromosome,
    pub best: Chromosome,
    pub best_score: Score,
    pub electrons_left: u64,
    pub stagnation: u32,
}

impl Streamer {
    pub fn new(inst: &Instance, sol: Chromosome, electrons: u64) -> Self {
        let best_score = score(inst, &sol);
        Self { current: sol.clone(), best: sol, best_score, electrons_left: electrons, stagnation: 0 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum StreamerEvent {
    Eliminated,
    /// The streamer improved and spawned this new one.
    Forked(Box<Streamer>),
    Moved,
}

/// `N` random feasible streamers with full electron budgets.
pub fn init_population<R: Rng + ?Sized>(inst: &Instance, params: &ErsaParams, rng: &mut R) -> Result<Vec<Streamer>, SolveError> {
    let mut pool: Vec<Streamer> = Vec::with_capacity(params.population);
    for _ in 0..params.population.max(1) {
        let fallback = (!pool.is_empty()).then(|| rng.gen_range(0..pool.len())).map(|i| &pool[i].current);
        let sol = population_member(inst, rng, fallback, INIT_ATTEMPTS)
            .ok_or_else(|| SolveError::Initialization("no feasible schedule found for a random streamer".into()))?;
        pool.push(Streamer::new(inst, sol, params.electrons));
    }
    Ok(pool)
}

fn candidate<R: Rng + ?Sized>(inst: &Instance, sol: &Chromosome, params: &ErsaParams, rng: &mut R) -> Chromosome {
    let raw = if rng.gen_bool(params.beta) {
        match random_solution(inst, rng, INIT_ATTEMPTS) {
            Some(other) => {
                let cp = rng.gen_range(1..sol.len().max(2));
                crossover(inst, sol, &other, cp).0
            }
            None => sol.clone(),
        }
    } else {
        mutate(inst, sol, params.mutation_genes(inst), rng)
    };
    apply_improvements(inst, &raw, params.improvement_mask)
}

/// Sample `radar_points` candidates around `sol` and return the best one,
/// or `sol` itself when none is better.
pub fn radar_search<R: Rng + ?Sized>(inst: &Instance, sol: &Chromosome, params: &ErsaParams, rng: &mut R) -> Chromosome {
    let mut best = sol.clone();
    let mut best_score = score(inst, sol);
    for _ in 0..params.radar_points {
        let c = candidate(inst, sol, params, rng);
        let s = score(inst, &c);
        if s.better_than(&best_score) {
            best = c;
            best_score = s;
        }
    }
    best
}

/// State of one run shared by all streamers.
pub struct ErsaRun<'a> {
    inst: &'a Instance,
    params: ErsaParams,
    rng: ChaCha8Rng,
    tracker: Tracker,
}

impl<'a> ErsaRun<'a> {
    pub fn new(inst: &'a Instance, params: &ErsaParams) -> Self {
        Self { inst, params: params.clone(), rng: ChaCha8Rng::seed_from_u64(params.seed), tracker: Tracker::new(params.budget) }
    }

    pub fn evaluations(&self) -> u64 {
        self.tracker.evaluations
    }

    pub fn budget_spent(&self) -> bool {
        self.tracker.exhausted()
    }

    /// Random initial pool; each member counts as one evaluation.
    pub fn init(&mut self) -> Result<Vec<Streamer>, SolveError> {
        let mut pool: Vec<Streamer> = Vec::with_capacity(self.params.population);
        for _ in 0..self.params.population.max(1) {
            if !pool.is_empty() && self.tracker.exhausted() {
                break;
            }
            let fallback = (!pool.is_empty()).then(|| self.rng.gen_range(0..pool.len())).map(|i| &pool[i].current);
            let sol = population_member(self.inst, &mut self.rng, fallback, INIT_ATTEMPTS)
                .ok_or_else(|| SolveError::Initialization("no feasible schedule found for a random streamer".into()))?;
            self.tracker.record(self.inst, &sol);
            pool.push(Streamer::new(self.inst, sol, self.params.electrons));
        }
        Ok(pool)
    }

    /// One visit of streamer `s` given the current pool size.
    pub fn step(&mut self, s: &mut Streamer, pool_size: usize) -> StreamerEvent {
        if s.stagnation >= self.params.critical_value || s.electrons_left == 0 {
            return StreamerEvent::Eliminated;
        }
        let points = (self.params.radar_points as u64).min(s.electrons_left).min(self.tracker.remaining());
        let mut best = s.current.clone();
        let mut best_score = score(self.inst, &best);
        let mut used = 0;
        for _ in 0..points {
            if self.tracker.exhausted() {
                break;
            }
            let c = candidate(self.inst, &s.current, &self.params, &mut self.rng);
            let sc = self.tracker.record(self.inst, &c);
            used += 1;
            if sc.better_than(&best_score) {
                best = c;
                best_score = sc;
            }
        }
        s.electrons_left -= used;
        s.current = best;
        if best_score.better_than(&s.best_score) {
            s.best = s.current.clone();
            s.best_score = best_score;
            s.stagnation = 0;
            if pool_size < self.params.population && !self.tracker.exhausted() {
                if let Some(sol) = random_solution(self.inst, &mut self.rng, INIT_ATTEMPTS) {
                    self.tracker.record(self.inst, &sol);
                    return StreamerEvent::Forked(Box::new(Streamer::new(self.inst, sol, self.params.electrons)));
                }
            }
        } else {
            s.stagnation += 1;
        }
        StreamerEvent::Moved
    }

    pub fn finish(self, name: &str) -> Result<SolveResult, SolveError> {
        self.tracker.finish(self.inst, name, self.params.seed)
    }
}

/// Visit streamer `s` once; see [`ErsaRun::step`].
pub fn step_streamer(run: &mut ErsaRun<'_>, s: &mut Streamer, pool_size: usize) -> StreamerEvent {
    run.step(s, pool_size)
}

fn variant_name(mask: ImprovementMask) -> String {
    (0..=4u8)
        .find(|&v| ImprovementMask::ersa_variant(v) == Some(mask))
        .map_or_else(|| "ersa".to_string(), |v| format!("ersa{v}"))
}

pub fn run_ersa(inst: &Instance, params: &ErsaParams) -> Result<SolveResult, SolveError> {
    let mut run = ErsaRun::new(inst, params);
    let mut pool = run.init()?;
    let mut i = 0;
    while !pool.is_empty() && !run.budget_spent() {
        if i >= pool.len() {
            i = 0;
        }
        let size = pool.len();
        match run.step(&mut pool[i], size) {
            StreamerEvent::Eliminated => {
                pool.remove(i);
            }
            StreamerEvent::Forked(s) => {
                pool.push(*s);
                i += 1;
            }
            StreamerEvent::Moved => i += 1,
        }
    }
    run.finish(&variant_name(params.improvement_mask))
}
