//! Import of multi-mode PSPLIB (`.mm`) files.
//!
//! Renewable resources become workshops. Nonrenewable and doubly
//! constrained resources are ignored. Workshop costs and per-mode space
//! demands are sampled from one seeded stream in a fixed order: first one
//! cost per workshop, then one space value for every nonzero renewable
//! request, by activity, mode and workshop.

use std::ops::RangeInclusive;

use rand::{seq::SliceRandom, Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Activity, CostMode, Instance, ModeSpec, Workshop};
use crate::error::InstanceError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Candidate unit costs, one drawn per workshop.
    pub cost_choices: Vec<f64>,
    /// Inclusive range for sampled space demands.
    pub space_range: RangeInclusive<u32>,
    pub seed: u64,
    /// `Q` as a multiple of the largest single-activity total demand.
    pub capacity_factor: f64,
    /// `T_max` as a multiple of the shortest-mode critical path.
    pub deadline_factor: f64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self {
            cost_choices: vec![10.0, 20.0, 30.0, 50.0, 100.0],
            space_range: 0..=13,
            seed: 0,
            capacity_factor: 2.0,
            deadline_factor: 1.5,
        }
    }
}

struct RawJob {
    n_modes: usize,
    successors: Vec<usize>,
    modes: Vec<(u32, Vec<u32>)>,
}

fn perr(msg: impl Into<String>) -> InstanceError {
    InstanceError::Psplib(msg.into())
}

fn ints(line: &str) -> Result<Vec<i64>, InstanceError> {
    line.split_whitespace()
        .map(|t| t.parse::<i64>().map_err(|_| perr(format!("unexpected token `{t}` in `{}`", line.trim()))))
        .collect()
}

fn count_after_colon(line: &str) -> Result<usize, InstanceError> {
    let value = line.split(':').nth(1).ok_or_else(|| perr(format!("expected `:` in `{}`", line.trim())))?;
    value
        .split_whitespace()
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| perr(format!("expected a count in `{}`", line.trim())))
}

fn parse_raw(text: &str) -> Result<(Vec<RawJob>, usize), InstanceError> {
    let lines: Vec<&str> = text.lines().collect();
    let mut n_jobs = None;
    let mut renewable = None;
    let mut other_resources = 0usize;
    for line in &lines {
        let l = line.trim_start();
        if l.starts_with("jobs (incl. supersource/sink") {
            n_jobs = Some(count_after_colon(l)?);
        } else if l.starts_with("- renewable") {
            renewable = Some(count_after_colon(l)?);
        } else if l.starts_with("- nonrenewable") || l.starts_with("- doubly constrained") {
            other_resources += count_after_colon(l)?;
        }
    }
    let n_jobs = n_jobs.ok_or_else(|| perr("missing job count"))?;
    let renewable = renewable.ok_or_else(|| perr("missing renewable resource count"))?;
    if n_jobs < 2 {
        return Err(perr("need at least the two dummy jobs"));
    }

    let find = |marker: &str| {
        lines
            .iter()
            .position(|l| l.trim_start().starts_with(marker))
            .ok_or_else(|| perr(format!("missing section `{marker}`")))
    };

    let mut jobs: Vec<RawJob> = Vec::with_capacity(n_jobs);
    let prec = find("PRECEDENCE RELATIONS:")?;
    // skip the column header
    for line in lines.iter().skip(prec + 2).take(n_jobs) {
        let v = ints(line)?;
        if v.len() < 3 {
            return Err(perr(format!("short precedence row `{}`", line.trim())));
        }
        let n_succ = v[2] as usize;
        if v.len() != 3 + n_succ || v[0] as usize != jobs.len() + 1 {
            return Err(perr(format!("malformed precedence row `{}`", line.trim())));
        }
        let successors = v[3..]
            .iter()
            .map(|&s| if s >= 1 && (s as usize) <= n_jobs { Ok(s as usize - 1) } else { Err(perr(format!("successor {s} out of range"))) })
            .collect::<Result<_, _>>()?;
        jobs.push(RawJob { n_modes: v[1].max(0) as usize, successors, modes: Vec::new() });
    }
    if jobs.len() != n_jobs {
        return Err(perr("precedence section is truncated"));
    }

    let req = find("REQUESTS/DURATIONS:")?;
    let width = renewable + other_resources;
    let mut current: Option<usize> = None;
    for line in lines.iter().skip(req + 1) {
        let l = line.trim();
        if l.starts_with("jobnr") || l.starts_with('-') || l.is_empty() {
            continue;
        }
        if l.starts_with('*') {
            break;
        }
        let v = ints(l)?;
        let (mode_fields, job) = if v.len() == 3 + width {
            let job = v[0] as usize;
            if job == 0 || job > n_jobs {
                return Err(perr(format!("job {job} out of range")));
            }
            current = Some(job - 1);
            (&v[1..], job - 1)
        } else if v.len() == 2 + width {
            (&v[..], current.ok_or_else(|| perr("mode row before any job row"))?)
        } else {
            return Err(perr(format!("request row has {} fields, expected {}", v.len(), 3 + width)));
        };
        if mode_fields[1] < 0 || mode_fields[2..].iter().any(|&r| r < 0) {
            return Err(perr("negative duration or request"));
        }
        let duration = mode_fields[1] as u32;
        let requests = mode_fields[2..2 + renewable].iter().map(|&r| r as u32).collect();
        jobs[job].modes.push((duration, requests));
    }
    for (j, job) in jobs.iter().enumerate() {
        if job.modes.is_empty() || job.modes.len() != job.n_modes {
            return Err(perr(format!("job {} declares {} modes but lists {}", j + 1, job.n_modes, job.modes.len())));
        }
    }
    Ok((jobs, renewable))
}

/// Build an instance from a multi-mode PSPLIB document.
pub fn import_psplib_mm(text: &str, cfg: &AugmentConfig) -> Result<Instance, InstanceError> {
    if cfg.cost_choices.is_empty() {
        return Err(perr("cost_choices must not be empty"));
    }
    let (jobs, renewable) = parse_raw(text)?;
    if renewable == 0 {
        return Err(InstanceError::NoWorkshops);
    }
    let n_jobs = jobs.len();
    let real = |job: usize| job > 0 && job + 1 < n_jobs;

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let workshops: Vec<Workshop> = (0..renewable)
        .map(|_| Workshop::with_unit_cost(*cfg.cost_choices.choose(&mut rng).expect("non-empty")))
        .collect();

    let mut activities: Vec<Activity> = Vec::with_capacity(n_jobs.saturating_sub(2));
    for job in jobs.iter().take(n_jobs - 1).skip(1) {
        let modes = job
            .modes
            .iter()
            .map(|(d, req)| {
                let space = req
                    .iter()
                    .map(|&r| if r > 0 { rng.gen_range(cfg.space_range.clone()) } else { 0 })
                    .collect();
                ModeSpec::new(*d, space)
            })
            .collect();
        activities.push(Activity { modes, predecessors: Vec::new() });
    }
    for (j, job) in jobs.iter().enumerate() {
        if !real(j) {
            continue;
        }
        for &s in &job.successors {
            if real(s) {
                activities[s - 1].predecessors.push(j - 1);
            }
        }
    }
    for a in &mut activities {
        a.predecessors.sort_unstable();
        a.predecessors.dedup();
    }

    let max_total = activities
        .iter()
        .flat_map(|a| a.modes.iter())
        .map(ModeSpec::total_space)
        .max()
        .unwrap_or(0);
    let horizon: u32 = activities.iter().map(|a| a.modes.iter().map(|m| m.duration).max().unwrap_or(0)).sum();
    let mut inst = Instance {
        activities,
        workshops,
        site_capacity: ((cfg.capacity_factor * max_total as f64).ceil() as u32).max(1),
        deadline: 0,
        horizon: horizon.max(1),
        cost_mode: CostMode::Level,
    };
    let cp = inst.makespan_lower_bound();
    inst.deadline = ((cfg.deadline_factor * f64::from(cp)).ceil() as u32).clamp(1, inst.horizon);
    if inst.deadline < cp {
        inst.deadline = cp.min(inst.horizon);
    }
    Ok(inst)
}
