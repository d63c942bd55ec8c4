//! Genetic algorithm, simulated annealing and particle swarm baselines over
//! the shared chromosome and operators.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::instance::Instance;
use crate::operators::{apply_improvements, chromosome_len, crossover, mutate, population_member, random_solution, repair, score, ImprovementMask, Score};
use crate::schedule::Chromosome;
use crate::solve::{Budget, SolveResult, Tracker};

const INIT_ATTEMPTS: usize = 50;

fn init_error() -> SolveError {
    SolveError::Initialization("no feasible schedule found for a random individual".into())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GaParams {
    pub population: usize,
    pub crossover_prob: f64,
    pub mutation_prob: f64,
    /// Fraction of genes resampled by a mutation.
    pub mutation_rate: f64,
    /// Crossover point as a fraction of the chromosome length.
    pub crossover_point: f64,
    pub seed: u64,
    pub budget: Budget,
    pub improvement_mask: ImprovementMask,
}

impl Default for GaParams {
    fn default() -> Self {
        Self {
            population: 50,
            crossover_prob: 0.3,
            mutation_prob: 0.2,
            mutation_rate: 0.2,
            crossover_point: 0.2,
            seed: 0,
            budget: Budget::default(),
            improvement_mask: ImprovementMask::NONE,
        }
    }
}

fn tournament<'p, R: Rng + ?Sized>(pop: &'p [(Chromosome, Score)], rng: &mut R) -> &'p Chromosome {
    let a = &pop[rng.gen_range(0..pop.len())];
    let b = &pop[rng.gen_range(0..pop.len())];
    if b.1.better_than(&a.1) { &b.0 } else { &a.0 }
}

/// Generational GA with size-2 tournaments and one elite.
pub fn run_ga(inst: &Instance, p: &GaParams) -> Result<SolveResult, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut tracker = Tracker::new(p.budget);
    let len = chromosome_len(inst);
    let cp = ((p.crossover_point * len as f64).round() as usize).clamp(1, len.saturating_sub(1).max(1));
    let r_m = ((p.mutation_rate * len as f64).ceil() as usize).clamp(1, len.max(1));

    let mut pop: Vec<(Chromosome, Score)> = Vec::with_capacity(p.population);
    for _ in 0..p.population.max(1) {
        if !pop.is_empty() && tracker.exhausted() {
            break;
        }
        let fallback = (!pop.is_empty()).then(|| rng.gen_range(0..pop.len())).map(|i| &pop[i].0);
        let sol = population_member(inst, &mut rng, fallback, INIT_ATTEMPTS).ok_or_else(init_error)?;
        let s = tracker.record(inst, &sol);
        pop.push((sol, s));
    }

    while !tracker.exhausted() {
        let elite = pop.iter().fold(&pop[0], |b, c| if c.1.better_than(&b.1) { c } else { b }).clone();
        let mut next = vec![elite];
        while next.len() < pop.len() && !tracker.exhausted() {
            let a = tournament(&pop, &mut rng).clone();
            let b = tournament(&pop, &mut rng).clone();
            let (mut c1, mut c2) = if rng.gen_bool(p.crossover_prob) { crossover(inst, &a, &b, cp) } else { (a, b) };
            for c in [&mut c1, &mut c2] {
                if rng.gen_bool(p.mutation_prob) {
                    *c = mutate(inst, c, r_m, &mut rng);
                }
                *c = apply_improvements(inst, c, p.improvement_mask);
            }
            for c in [c1, c2] {
                if next.len() < pop.len() && !tracker.exhausted() {
                    let s = tracker.record(inst, &c);
                    next.push((c, s));
                }
            }
        }
        pop = next;
    }
    tracker.finish(inst, "ga", p.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SaParams {
    pub initial_temperature: f64,
    pub final_temperature: f64,
    pub cooling: f64,
    /// Iterations per temperature level.
    pub iterations_per_level: u32,
    pub seed: u64,
    pub budget: Budget,
    pub improvement_mask: ImprovementMask,
}

impl Default for SaParams {
    fn default() -> Self {
        Self {
            initial_temperature: 1000.0,
            final_temperature: 0.01,
            cooling: 0.98,
            iterations_per_level: 20,
            seed: 0,
            budget: Budget::default(),
            improvement_mask: ImprovementMask::NONE,
        }
    }
}

/// Single-gene neighbourhood with Metropolis acceptance. The temperature
/// falls geometrically every `iterations_per_level` moves and stays at the
/// final temperature once it gets there; the run ends with the budget.
pub fn run_sa(inst: &Instance, p: &SaParams) -> Result<SolveResult, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut tracker = Tracker::new(p.budget);
    let mut current = random_solution(inst, &mut rng, INIT_ATTEMPTS).ok_or_else(init_error)?;
    let mut energy = tracker.record(inst, &current).objective;
    let mut temperature = p.initial_temperature;
    let mut moves = 0u32;
    while !tracker.exhausted() {
        let nb = apply_improvements(inst, &mutate(inst, &current, 1, &mut rng), p.improvement_mask);
        let e = tracker.record(inst, &nb).objective;
        let delta = e - energy;
        if delta <= 0.0 || rng.gen::<f64>() < (-delta / temperature).exp() {
            current = nb;
            energy = e;
        }
        moves += 1;
        if moves >= p.iterations_per_level.max(1) {
            moves = 0;
            temperature = (temperature * p.cooling).max(p.final_temperature);
        }
    }
    tracker.finish(inst, "sa", p.seed)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PsoParams {
    pub swarm: usize,
    pub max_iterations: u32,
    pub c1: f64,
    pub c2: f64,
    pub seed: u64,
    pub budget: Budget,
    pub improvement_mask: ImprovementMask,
}

impl Default for PsoParams {
    fn default() -> Self {
        Self { swarm: 20, max_iterations: 100, c1: 2.0, c2: 2.0, seed: 0, budget: Budget::default(), improvement_mask: ImprovementMask::NONE }
    }
}

/// Discrete swarm. Each gene of a particle is copied from its personal
/// best, the global best or its current value with weights `c1 * r1`,
/// `c2 * r2` and 1; then one random gene is resampled and the particle is
/// repaired. The run stops after `max_iterations` sweeps or with the budget.
pub fn run_pso(inst: &Instance, p: &PsoParams) -> Result<SolveResult, SolveError> {
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut tracker = Tracker::new(p.budget);
    let n = inst.n_activities();
    let k = inst.n_workshops();

    let mut particles: Vec<(Chromosome, Chromosome, Score)> = Vec::with_capacity(p.swarm);
    for _ in 0..p.swarm.max(1) {
        if !particles.is_empty() && tracker.exhausted() {
            break;
        }
        let fallback = (!particles.is_empty()).then(|| rng.gen_range(0..particles.len())).map(|i| &particles[i].0);
        let sol = population_member(inst, &mut rng, fallback, INIT_ATTEMPTS).ok_or_else(init_error)?;
        let s = tracker.record(inst, &sol);
        particles.push((sol.clone(), sol, s));
    }
    let mut global = particles.iter().fold(&particles[0], |b, c| if c.2.better_than(&b.2) { c } else { b }).1.clone();
    let mut global_score = score(inst, &global);

    'sweeps: for _ in 0..p.max_iterations {
        for (pos, pbest, pscore) in particles.iter_mut() {
            if tracker.exhausted() {
                break 'sweeps;
            }
            let cur = pos.to_genes();
            let pb = pbest.to_genes();
            let gb = global.to_genes();
            let mut genes = Vec::with_capacity(cur.len());
            for i in 0..cur.len() {
                let w_pb = p.c1 * rng.gen::<f64>();
                let w_gb = p.c2 * rng.gen::<f64>();
                let pick = rng.gen::<f64>() * (w_pb + w_gb + 1.0);
                genes.push(if pick < w_pb { pb[i] } else if pick < w_pb + w_gb { gb[i] } else { cur[i] });
            }
            let moved = Chromosome::from_genes(n, k, &genes);
            let moved = match repair(inst, &moved) {
                Ok(r) => mutate(inst, &r, 1, &mut rng),
                Err(_) => mutate(inst, pos, 1, &mut rng),
            };
            let moved = apply_improvements(inst, &moved, p.improvement_mask);
            let s = tracker.record(inst, &moved);
            if s.better_than(pscore) {
                *pbest = moved.clone();
                *pscore = s;
            }
            if s.better_than(&global_score) {
                global = moved.clone();
                global_score = s;
            }
            *pos = moved;
        }
    }
    tracker.finish(inst, "pso", p.seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, CostMode, ModeSpec, Workshop};
    use crate::schedule::check_feasible;

    fn tiny() -> Instance {
        Instance {
            activities: vec![
                Activity { modes: vec![ModeSpec::new(2, vec![2]), ModeSpec::new(4, vec![1])], predecessors: vec![] },
                Activity { modes: vec![ModeSpec::new(2, vec![2])], predecessors: vec![] },
            ],
            workshops: vec![Workshop::with_unit_cost(10.0)],
            site_capacity: 10,
            deadline: 6,
            horizon: 8,
            cost_mode: CostMode::Level,
        }
    }

    #[test]
    fn static_ga_returns_best_initial() {
        let inst = tiny();
        let p = GaParams { crossover_prob: 0.0, mutation_prob: 0.0, population: 5, budget: Budget::evaluations(50), ..Default::default() };
        let r = run_ga(&inst, &p).unwrap();
        assert_eq!(r.trace.len(), r.trace.iter().filter(|t| t.iteration <= 5).count());
    }

    #[test]
    fn baselines_are_feasible_and_deterministic() {
        let inst = tiny();
        let b = Budget::evaluations(300);
        let runs = [
            run_ga(&inst, &GaParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
            run_sa(&inst, &SaParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
            run_pso(&inst, &PsoParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
        ];
        let again = [
            run_ga(&inst, &GaParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
            run_sa(&inst, &SaParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
            run_pso(&inst, &PsoParams { seed: 2, budget: b, ..Default::default() }).unwrap(),
        ];
        for (r, s) in runs.iter().zip(&again) {
            assert!(check_feasible(&inst, &r.solution).unwrap().is_feasible());
            assert_eq!(r.trace_csv("x"), s.trace_csv("x"));
        }
    }

    #[test]
    fn single_particle_swarm_terminates() {
        let inst = tiny();
        let r = run_pso(&inst, &PsoParams { swarm: 1, max_iterations: 10, budget: Budget::evaluations(10_000), ..Default::default() }).unwrap();
        assert_eq!(r.evaluations, 11);
    }
}
