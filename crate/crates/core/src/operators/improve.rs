//! The three improvement rules.
//!
//! IR1 and IR2 are greedy first-improvement scans in ascending activity
//! order. A move is accepted only when the result is feasible, neither its
//! objective nor its makespan is worse, and it is strictly better under
//! [`Score`](super::Score).

use super::{peaks, redecode, score, trace, ImprovementMask};
use crate::instance::Instance;
use crate::schedule::Chromosome;

const MAX_PASSES: usize = 8;

/// Run the enabled rules in order IR1, IR2, IR3.
pub fn apply_improvements(inst: &Instance, sol: &Chromosome, mask: ImprovementMask) -> Chromosome {
    let mut out = sol.clone();
    if mask.ir1 {
        out = ir1_switch_mode(inst, &out);
    }
    if mask.ir2 {
        out = ir2_reschedule_float(inst, &out);
    }
    if mask.ir3 {
        out = ir3_regularize_avail(inst, &out);
    }
    out
}

/// Try every alternative mode of every activity. Each trial is decoded
/// twice: keeping the other activities at their current starts, and
/// compacting the whole schedule.
pub fn ir1_switch_mode(inst: &Instance, sol: &Chromosome) -> Chromosome {
    let n = inst.n_activities();
    let zeros = vec![0u32; n];
    let mut best = sol.clone();
    let mut best_score = score(inst, &best);
    for _ in 0..MAX_PASSES {
        let mut improved = false;
        for a in 0..n {
            let current = best.mode[a];
            'modes: for m in 0..inst.activities[a].modes.len() {
                if m == current {
                    continue;
                }
                let mut mode = best.mode.clone();
                mode[a] = m;
                let avail: Vec<u32> = (0..inst.n_workshops()).map(|k| best.avail[k].max(inst.max_demand_for(k, &mode))).collect();
                let keep = best.start.clone();
                for release in [&keep, &zeros] {
                    let Some(trial) = redecode(inst, &mode, &avail, release) else { continue };
                    let s = score(inst, &trial);
                    if s.accepts_over(&best_score) {
                        best = trial;
                        best_score = s;
                        improved = true;
                        break 'modes;
                    }
                }
            }
        }
        if !improved {
            break;
        }
    }
    trace("ir1", inst, sol, &best);
    best
}

/// Move single activities within their float: between the latest
/// predecessor finish and the earliest successor start (or the deadline).
/// Each target start is decoded twice: with every other activity released
/// at its current start, and with only the moved activity held back.
pub fn ir2_reschedule_float(inst: &Instance, sol: &Chromosome) -> Chromosome {
    let n = inst.n_activities();
    let succ = inst.successors();
    let mut best = sol.clone();
    let mut best_score = score(inst, &best);
    for a in 0..n {
        let d = inst.mode(a, best.mode[a]).duration;
        let es = inst.activities[a].predecessors.iter().map(|&p| best.finish(inst, p)).max().unwrap_or(0);
        let ls = succ[a]
            .iter()
            .map(|&s| best.start[s])
            .min()
            .unwrap_or(inst.deadline)
            .min(inst.deadline)
            .saturating_sub(d);
        let mut compact = vec![0u32; n];
        'shift: for s in es..=ls {
            if s == best.start[a] {
                continue;
            }
            let mut keep = best.start.clone();
            keep[a] = s;
            compact[a] = s;
            for release in [&keep, &compact] {
                let Some(trial) = redecode(inst, &best.mode, &best.avail, release) else { continue };
                let sc = score(inst, &trial);
                if sc.accepts_over(&best_score) {
                    best = trial;
                    best_score = sc;
                    break 'shift;
                }
            }
        }
    }
    trace("ir2", inst, sol, &best);
    best
}

/// Lower every availability level to the workshop's peak occupancy.
pub fn ir3_regularize_avail(inst: &Instance, sol: &Chromosome) -> Chromosome {
    let mut out = sol.clone();
    out.avail = peaks(inst, sol);
    trace("ir3", inst, sol, &out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, CostMode, ModeSpec, Workshop};
    use crate::operators::repair;
    use crate::schedule::{check_feasible, decode_serial, objective_level};

    fn fig9() -> Instance {
        let acts = [3u32, 4, 3, 6]
            .iter()
            .enumerate()
            .map(|(i, &d)| {
                let mut space = vec![0; 4];
                space[i] = 1;
                Activity { modes: vec![ModeSpec::new(d, space)], predecessors: vec![] }
            })
            .collect();
        Instance {
            activities: acts,
            workshops: vec![Workshop::with_unit_cost(1.0); 4],
            site_capacity: 3,
            deadline: 20,
            horizon: 20,
            cost_mode: CostMode::Level,
        }
    }

    #[test]
    fn shifting_first_activity_shortens_project_by_a_third() {
        let inst = fig9();
        let start = decode_serial(&inst, &[0; 4], &[1; 4]).unwrap();
        let sol = Chromosome::from_schedule(&inst, start, vec![0; 4], vec![1; 4]);
        assert_eq!(sol.makespan(&inst), 9);
        let out = ir2_reschedule_float(&inst, &sol);
        assert_eq!(out.start[0], 3);
        assert_eq!(out.makespan(&inst), 6);
        assert!(check_feasible(&inst, &out).unwrap().is_feasible());
    }

    #[test]
    fn chain_has_no_float() {
        let inst = Instance {
            activities: vec![
                Activity { modes: vec![ModeSpec::new(2, vec![1])], predecessors: vec![] },
                Activity { modes: vec![ModeSpec::new(3, vec![1])], predecessors: vec![0] },
            ],
            workshops: vec![Workshop::with_unit_cost(1.0)],
            site_capacity: 2,
            deadline: 5,
            horizon: 5,
            cost_mode: CostMode::Level,
        };
        let sol = repair(&inst, &Chromosome::from_schedule(&inst, vec![0, 2], vec![0, 0], vec![1])).unwrap();
        assert_eq!(ir2_reschedule_float(&inst, &sol), sol);
    }

    #[test]
    fn ir3_trims_excess_level() {
        let inst = Instance {
            activities: vec![Activity { modes: vec![ModeSpec::new(2, vec![3])], predecessors: vec![] }],
            workshops: vec![Workshop::with_unit_cost(10.0)],
            site_capacity: 20,
            deadline: 5,
            horizon: 5,
            cost_mode: CostMode::Level,
        };
        let sol = Chromosome::from_schedule(&inst, vec![0], vec![0], vec![8]);
        let out = ir3_regularize_avail(&inst, &sol);
        assert_eq!(out.avail, vec![3]);
        assert_eq!(objective_level(&inst, &sol.avail) - objective_level(&inst, &out.avail), 50.0);
        assert_eq!(ir3_regularize_avail(&inst, &out), out);
    }

    #[test]
    fn single_mode_instance_is_fixed_by_ir1() {
        let inst = fig9();
        let start = decode_serial(&inst, &[0; 4], &[1; 4]).unwrap();
        let sol = Chromosome::from_schedule(&inst, start, vec![0; 4], vec![1; 4]);
        assert_eq!(ir1_switch_mode(&inst, &sol), sol);
    }
}
