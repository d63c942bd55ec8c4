//! Variation operators, repair and improvement rules.
//!
//! Every operator takes and returns chromosomes that pass
//! [`check_feasible`](crate::schedule::check_feasible). Randomness always
//! comes from a caller-supplied generator.
//!
//! Applications can be traced as JSON lines on the `moswacp::ops` log
//! target at debug level.

mod improve;

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::HorizonExhausted;
use crate::instance::Instance;
use crate::schedule::{decode_serial, decode_with_release, objective, occupancy, Chromosome, Gene};

pub use improve::{apply_improvements, ir1_switch_mode, ir2_reschedule_float, ir3_regularize_avail};

/// Log target of the per-application operator records.
pub const OPS_TARGET: &str = "moswacp::ops";

/// Which improvement rules run on each candidate.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ImprovementMask {
    pub ir1: bool,
    pub ir2: bool,
    pub ir3: bool,
}

impl ImprovementMask {
    pub const NONE: Self = Self { ir1: false, ir2: false, ir3: false };
    pub const ALL: Self = Self { ir1: true, ir2: true, ir3: true };

    /// Rule set of the ablation variants 0 to 4: none, all but IR3, all but
    /// IR2, all but IR1, all.
    pub fn ersa_variant(v: u8) -> Option<Self> {
        Some(match v {
            0 => Self::NONE,
            1 => Self { ir3: false, ..Self::ALL },
            2 => Self { ir2: false, ..Self::ALL },
            3 => Self { ir1: false, ..Self::ALL },
            4 => Self::ALL,
            _ => return None,
        })
    }

    pub fn is_empty(&self) -> bool {
        !(self.ir1 || self.ir2 || self.ir3)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OperatorConfig {
    /// First gene index taken from the second parent.
    pub crossover_point: usize,
    /// Number of genes resampled per mutation.
    pub mutation_rate: usize,
    pub improvement_mask: ImprovementMask,
}

impl OperatorConfig {
    /// Crossover point and mutation count as fractions of the chromosome
    /// length, clamped to their valid ranges.
    pub fn from_fractions(inst: &Instance, crossover: f64, mutation: f64, mask: ImprovementMask) -> Self {
        let len = chromosome_len(inst);
        Self {
            crossover_point: ((crossover * len as f64).round() as usize).clamp(1, len.saturating_sub(1).max(1)),
            mutation_rate: ((mutation * len as f64).ceil() as usize).clamp(1, len.max(1)),
            improvement_mask: mask,
        }
    }

    pub fn is_valid_for(&self, inst: &Instance) -> bool {
        let len = chromosome_len(inst);
        (1..len).contains(&self.crossover_point) && (1..=len).contains(&self.mutation_rate)
    }
}

/// `2n + 3K`.
pub fn chromosome_len(inst: &Instance) -> usize {
    2 * inst.n_activities() + 3 * inst.n_workshops()
}

/// Lexicographic quality used by the improvement rules: objective, then
/// makespan, then the cost the current peaks would have if availability
/// were trimmed to them.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub objective: f64,
    pub makespan: u32,
    pub potential: f64,
}

const EPS: f64 = 1e-9;

impl Score {
    /// Strictly better in lexicographic order.
    pub fn better_than(&self, other: &Score) -> bool {
        if self.objective < other.objective - EPS {
            return true;
        }
        if self.objective > other.objective + EPS {
            return false;
        }
        if self.makespan != other.makespan {
            return self.makespan < other.makespan;
        }
        self.potential < other.potential - EPS
    }

    /// Acceptable replacement inside an improvement rule: no worse in
    /// objective or makespan and strictly better overall.
    pub fn accepts_over(&self, other: &Score) -> bool {
        self.objective <= other.objective + EPS && self.makespan <= other.makespan && self.better_than(other)
    }
}

pub fn score(inst: &Instance, sol: &Chromosome) -> Score {
    let objective = objective(inst, sol);
    let makespan = sol.makespan(inst);
    let potential = match inst.cost_mode {
        crate::instance::CostMode::Level => peaks(inst, sol).iter().zip(&inst.workshops).map(|(&p, w)| w.unit_cost * f64::from(p)).sum(),
        crate::instance::CostMode::Duration => objective,
    };
    Score { objective, makespan, potential }
}

pub(crate) fn peaks(inst: &Instance, sol: &Chromosome) -> Vec<u32> {
    let len = sol.makespan(inst) as usize;
    occupancy(inst, &sol.start, &sol.mode, len).into_iter().map(|row| row.into_iter().max().unwrap_or(0)).collect()
}

/// Restore feasibility.
///
/// Invalid modes are clamped, availability is raised to the largest demand
/// under the chosen modes, and starts are recomputed by serial decoding
/// using the chromosome's own starts as release times. If that fails the
/// release times are dropped, and if that fails too availability is
/// lowered to the largest demand. Windows are always re-derived.
pub fn repair(inst: &Instance, sol: &Chromosome) -> Result<Chromosome, HorizonExhausted> {
    let mode: Vec<usize> = sol
        .mode
        .iter()
        .zip(&inst.activities)
        .map(|(&m, a)| m.min(a.modes.len() - 1))
        .collect();
    let demand: Vec<u32> = (0..inst.n_workshops()).map(|k| inst.max_demand_for(k, &mode)).collect();
    let avail: Vec<u32> = sol.avail.iter().zip(&demand).map(|(&r, &d)| r.max(d)).collect();
    let decoded = decode_with_release(inst, &mode, &avail, &sol.start).or_else(|_| decode_serial(inst, &mode, &avail));
    match decoded {
        Ok(start) => Ok(Chromosome::from_schedule(inst, start, mode, avail)),
        Err(e) => {
            if avail == demand {
                return Err(e);
            }
            let start = decode_serial(inst, &mode, &demand)?;
            Ok(Chromosome::from_schedule(inst, start, mode, demand))
        }
    }
}

/// Decode with explicit release times, keeping modes and availability.
pub(crate) fn redecode(inst: &Instance, mode: &[usize], avail: &[u32], release: &[u32]) -> Option<Chromosome> {
    decode_with_release(inst, mode, avail, release)
        .ok()
        .map(|start| Chromosome::from_schedule(inst, start, mode.to_vec(), avail.to_vec()))
}

/// Single-point crossover before repair: each child keeps one parent's
/// genes up to `cp` and takes the other's from `cp` on.
pub fn crossover_raw(p1: &Chromosome, p2: &Chromosome, cp: usize) -> (Chromosome, Chromosome) {
    let n = p1.start.len();
    let k = p1.avail.len();
    let g1 = p1.to_genes();
    let g2 = p2.to_genes();
    let cp = cp.min(g1.len());
    let c1: Vec<u64> = g1[..cp].iter().chain(&g2[cp..]).copied().collect();
    let c2: Vec<u64> = g2[..cp].iter().chain(&g1[cp..]).copied().collect();
    (Chromosome::from_genes(n, k, &c1), Chromosome::from_genes(n, k, &c2))
}

/// Single-point crossover followed by repair. A child that cannot be
/// repaired is replaced by the parent it shares more genes with.
pub fn crossover(inst: &Instance, p1: &Chromosome, p2: &Chromosome, cp: usize) -> (Chromosome, Chromosome) {
    let (c1, c2) = crossover_raw(p1, p2, cp);
    let first_half = 2 * cp >= p1.len();
    let fix = |c: Chromosome, head: &Chromosome, tail: &Chromosome| match repair(inst, &c) {
        Ok(r) => r,
        Err(e) => {
            log::debug!(target: OPS_TARGET, "crossover child unrepairable ({e}); keeping parent");
            if first_half { head.clone() } else { tail.clone() }
        }
    };
    let r1 = fix(c1, p1, p2);
    let r2 = fix(c2, p2, p1);
    trace("crossover", inst, p1, &r1);
    (r1, r2)
}

/// Resample `r_m` distinct genes within their domains and repair.
///
/// Starts are drawn so the activity still ends by the deadline, modes
/// uniformly, availability between the current largest demand and the
/// current level plus that demand. Window genes are drawn from the horizon
/// but are re-derived by repair. If repair fails the input is returned.
pub fn mutate<R: Rng + ?Sized>(inst: &Instance, sol: &Chromosome, r_m: usize, rng: &mut R) -> Chromosome {
    let n = inst.n_activities();
    let k = inst.n_workshops();
    let len = sol.len();
    if r_m == 0 || len == 0 {
        return sol.clone();
    }
    let mut out = sol.clone();
    for idx in sample(rng, len, r_m.min(len)).into_iter() {
        match Chromosome::gene(n, k, idx) {
            Gene::Start(a) => {
                let d = inst.mode(a, out.mode[a].min(inst.activities[a].modes.len() - 1)).duration;
                out.start[a] = rng.gen_range(0..=inst.deadline.saturating_sub(d));
            }
            Gene::Install(w) => out.install[w] = rng.gen_range(0..=inst.horizon),
            Gene::Dismantle(w) => out.dismantle[w] = rng.gen_range(0..=inst.horizon),
            Gene::Mode(a) => out.mode[a] = rng.gen_range(0..inst.activities[a].modes.len()),
            Gene::Avail(w) => {
                let lo = inst.max_demand_for(w, &out.mode);
                out.avail[w] = rng.gen_range(lo..=out.avail[w].max(lo) + lo.max(1));
            }
        }
    }
    let result = match repair(inst, &out) {
        Ok(r) => r,
        Err(e) => {
            log::debug!(target: OPS_TARGET, "mutation unrepairable ({e}); keeping input");
            sol.clone()
        }
    };
    trace("mutate", inst, sol, &result);
    result
}

/// A random feasible chromosome: random modes, availability above the
/// largest demand of each workshop, serial decoding. After `attempts`
/// failures availability falls back to the largest demand under random
/// modes, then the same with random release times within the schedule's
/// slack, and finally to the smallest-area modes.
pub fn random_solution<R: Rng + ?Sized>(inst: &Instance, rng: &mut R, attempts: usize) -> Option<Chromosome> {
    let k = inst.n_workshops();
    let maxr: Vec<u32> = (0..k).map(|w| inst.max_demand(w)).collect();
    for _ in 0..attempts {
        let mode: Vec<usize> = inst.activities.iter().map(|a| rng.gen_range(0..a.modes.len())).collect();
        let avail: Vec<u32> = maxr.iter().map(|&m| rng.gen_range(m + 1..=2 * m + 1)).collect();
        if let Ok(start) = decode_serial(inst, &mode, &avail) {
            return Some(Chromosome::from_schedule(inst, start, mode, avail));
        }
    }
    for _ in 0..attempts {
        let mode: Vec<usize> = inst.activities.iter().map(|a| rng.gen_range(0..a.modes.len())).collect();
        let avail: Vec<u32> = (0..k).map(|w| inst.max_demand_for(w, &mode)).collect();
        if let Ok(start) = decode_serial(inst, &mode, &avail) {
            return Some(Chromosome::from_schedule(inst, start, mode, avail));
        }
    }
    let slack = inst.deadline.saturating_sub(inst.makespan_lower_bound());
    for _ in 0..attempts {
        let mode: Vec<usize> = inst.activities.iter().map(|a| rng.gen_range(0..a.modes.len())).collect();
        let avail: Vec<u32> = (0..k).map(|w| inst.max_demand_for(w, &mode)).collect();
        let release: Vec<u32> = (0..inst.n_activities()).map(|_| rng.gen_range(0..=slack)).collect();
        if let Ok(start) = decode_with_release(inst, &mode, &avail, &release) {
            return Some(Chromosome::from_schedule(inst, start, mode, avail));
        }
    }
    let mode: Vec<usize> = inst
        .activities
        .iter()
        .map(|a| (0..a.modes.len()).min_by_key(|&m| (a.modes[m].total_space(), a.modes[m].duration)).unwrap_or(0))
        .collect();
    let avail: Vec<u32> = (0..k).map(|w| inst.max_demand_for(w, &mode)).collect();
    let start = decode_serial(inst, &mode, &avail).ok()?;
    Some(Chromosome::from_schedule(inst, start, mode, avail))
}

/// A random member for an initial population, or a one-gene mutation of
/// `fallback` when no random feasible chromosome turns up.
pub(crate) fn population_member<R: Rng + ?Sized>(inst: &Instance, rng: &mut R, fallback: Option<&Chromosome>, attempts: usize) -> Option<Chromosome> {
    random_solution(inst, rng, attempts).or_else(|| fallback.map(|f| mutate(inst, f, 1, rng)))
}

pub(crate) fn trace(op: &str, inst: &Instance, before: &Chromosome, after: &Chromosome) {
    if log::log_enabled!(target: OPS_TARGET, log::Level::Debug) {
        let line = serde_json::json!({
            "op": op,
            "before": objective(inst, before),
            "after": objective(inst, after),
            "makespan_before": before.makespan(inst),
            "makespan_after": after.makespan(inst),
            "changed": before != after,
        });
        log::debug!(target: OPS_TARGET, "{line}");
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, CostMode, ModeSpec, Workshop};
    use crate::schedule::check_feasible;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn three() -> Instance {
        Instance {
            activities: vec![
                Activity { modes: vec![ModeSpec::new(2, vec![1, 0]), ModeSpec::new(1, vec![2, 0])], predecessors: vec![] },
                Activity { modes: vec![ModeSpec::new(3, vec![0, 1])], predecessors: vec![] },
                Activity { modes: vec![ModeSpec::new(2, vec![1, 1]), ModeSpec::new(4, vec![0, 1])], predecessors: vec![0] },
            ],
            workshops: vec![Workshop::with_unit_cost(10.0), Workshop::with_unit_cost(20.0)],
            site_capacity: 4,
            deadline: 9,
            horizon: 12,
            cost_mode: CostMode::Level,
        }
    }

    #[test]
    fn variants_drop_one_rule_each() {
        assert_eq!(ImprovementMask::ersa_variant(0), Some(ImprovementMask::NONE));
        assert!(!ImprovementMask::ersa_variant(1).unwrap().ir3);
        assert!(!ImprovementMask::ersa_variant(2).unwrap().ir2);
        assert!(!ImprovementMask::ersa_variant(3).unwrap().ir1);
        assert_eq!(ImprovementMask::ersa_variant(4), Some(ImprovementMask::ALL));
        assert_eq!(ImprovementMask::ersa_variant(5), None);
    }

    #[test]
    fn crossover_raw_swaps_suffixes() {
        let inst = three();
        let p1 = Chromosome::from_schedule(&inst, vec![0, 0, 2], vec![0, 0, 0], vec![2, 2]);
        let p2 = Chromosome::from_schedule(&inst, vec![0, 1, 1], vec![1, 0, 1], vec![3, 3]);
        let cp = inst.n_activities() + inst.n_workshops();
        let (c1, c2) = crossover_raw(&p1, &p2, cp);
        assert_eq!((c1.start.clone(), c1.install.clone()), (p1.start.clone(), p1.install.clone()));
        assert_eq!((c1.dismantle.clone(), c1.mode.clone(), c1.avail.clone()), (p2.dismantle.clone(), p2.mode.clone(), p2.avail.clone()));
        assert_eq!(c2.start, p2.start);
        assert_eq!(c2.avail, p1.avail);
    }

    #[test]
    fn identical_parents_give_identical_children() {
        let inst = three();
        let p = repair(&inst, &Chromosome::from_schedule(&inst, vec![0, 0, 2], vec![0, 0, 0], vec![2, 2])).unwrap();
        let (a, b) = crossover(&inst, &p, &p, 4);
        assert_eq!(a, p);
        assert_eq!(b, p);
    }

    #[test]
    fn mutation_keeps_feasibility() {
        let inst = three();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let mut sol = random_solution(&inst, &mut rng, 10).unwrap();
        for _ in 0..200 {
            sol = mutate(&inst, &sol, 3, &mut rng);
            assert!(check_feasible(&inst, &sol).unwrap().is_feasible());
        }
    }

    #[test]
    fn zero_mutation_is_identity() {
        let inst = three();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let sol = random_solution(&inst, &mut rng, 10).unwrap();
        assert_eq!(mutate(&inst, &sol, 0, &mut rng), sol);
    }

    #[test]
    fn repair_raises_availability_to_demand() {
        let inst = three();
        let bad = Chromosome::from_schedule(&inst, vec![0, 0, 0], vec![1, 0, 0], vec![0, 0]);
        let fixed = repair(&inst, &bad).unwrap();
        assert_eq!(fixed.avail, vec![2, 1]);
        assert!(check_feasible(&inst, &fixed).unwrap().is_feasible());
    }

    #[test]
    fn fractions_map_to_gene_counts() {
        let inst = three();
        let cfg = OperatorConfig::from_fractions(&inst, 0.2, 0.2, ImprovementMask::NONE);
        assert_eq!(chromosome_len(&inst), 12);
        assert_eq!(cfg.crossover_point, 2);
        assert_eq!(cfg.mutation_rate, 3);
        assert!(cfg.is_valid_for(&inst));
    }
}
