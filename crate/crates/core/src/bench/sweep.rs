//! Site-capacity sensitivity: the same instances solved under a range of
//! capacities `Q`.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::desk::Dataset;
use super::plot::{line_chart, Series};
use super::with_pool;
use crate::solve::{solve, Algorithm, Budget, SolverConfig};

pub const SWEEP_HEADER: &str = "Q,mean_obj,n_feasible";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Strictly ascending.
    pub q_values: Vec<u32>,
    pub dataset: Dataset,
    pub algorithm: Algorithm,
    pub seeds: Vec<u64>,
    pub budget: Budget,
    pub jobs: usize,
}

impl SweepSpec {
    pub fn is_valid(&self) -> bool {
        self.q_values.len() >= 2 && self.q_values.windows(2).all(|w| w[0] < w[1]) && !self.seeds.is_empty() && self.q_values[0] > 0
    }
}

#[derive(Debug, Error, PartialEq)]
pub enum SweepError {
    #[error("a sweep needs at least two strictly ascending positive Q values and one seed")]
    InvalidSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub q: u32,
    /// Mean best objective over runs that found a schedule.
    pub mean_obj: Option<f64>,
    pub n_feasible: usize,
    pub n_runs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub algorithm: String,
    pub points: Vec<SweepPoint>,
}

/// Solve every (Q, instance, seed). A run that is invalid at that capacity
/// or finds no schedule counts as infeasible.
pub fn sweep_q(spec: &SweepSpec) -> Result<SweepReport, SweepError> {
    if !spec.is_valid() {
        return Err(SweepError::InvalidSpec);
    }
    let tasks: Vec<(u32, usize, u64)> = spec
        .q_values
        .iter()
        .flat_map(|&q| (0..spec.dataset.instances.len()).flat_map(move |i| spec.seeds.iter().map(move |&s| (q, i, s))))
        .collect();
    let results: Vec<Option<f64>> = with_pool(spec.jobs, || {
        tasks
            .par_iter()
            .map(|&(q, i, seed)| {
                let mut inst = spec.dataset.instances[i].instance.clone();
                inst.site_capacity = q;
                solve(&inst, &SolverConfig::new(spec.algorithm, seed, spec.budget)).ok().map(|r| r.objective)
            })
            .collect()
    });
    let per_q = spec.dataset.instances.len() * spec.seeds.len();
    let points = spec
        .q_values
        .iter()
        .zip(results.chunks(per_q.max(1)))
        .map(|(&q, chunk)| {
            let ok: Vec<f64> = chunk.iter().flatten().copied().collect();
            SweepPoint { q, mean_obj: (!ok.is_empty()).then(|| ok.iter().sum::<f64>() / ok.len() as f64), n_feasible: ok.len(), n_runs: per_q }
        })
        .collect();
    Ok(SweepReport { algorithm: spec.algorithm.to_string(), points })
}

impl SweepReport {
    pub fn to_csv(&self) -> String {
        let mut out = format!("{SWEEP_HEADER}\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{},{}", p.q, p.mean_obj.map(|m| m.to_string()).unwrap_or_default(), p.n_feasible);
        }
        out
    }

    pub fn to_svg(&self) -> String {
        let points = self.points.iter().filter_map(|p| p.mean_obj.map(|m| (f64::from(p.q), m))).collect();
        line_chart("site capacity sensitivity", "site capacity Q", "mean best objective", &[Series { label: self.algorithm.clone(), points, step: false }])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::desk::{desk_suite, DeskRecipe};

    fn spec(q_values: Vec<u32>) -> SweepSpec {
        SweepSpec {
            q_values,
            dataset: desk_suite("s", &DeskRecipe::tiny(), 2, 3).unwrap(),
            algorithm: Algorithm::Ersa(4),
            seeds: vec![1],
            budget: Budget::evaluations(300),
            jobs: 1,
        }
    }

    #[test]
    fn rejects_bad_specs() {
        assert_eq!(sweep_q(&spec(vec![5])), Err(SweepError::InvalidSpec));
        assert_eq!(sweep_q(&spec(vec![5, 5])), Err(SweepError::InvalidSpec));
    }

    #[test]
    fn capacity_below_every_demand_is_infeasible() {
        let mut s = spec(vec![1, 1000]);
        for ni in &mut s.dataset.instances {
            for a in &mut ni.instance.activities {
                for m in &mut a.modes {
                    m.space.iter_mut().for_each(|r| *r = (*r).max(2));
                }
            }
        }
        let r = sweep_q(&s).unwrap();
        assert_eq!((r.points[0].n_feasible, r.points[0].mean_obj), (0, None));
        assert_eq!(r.points[1].n_feasible, 2);
        assert!(r.to_csv().lines().nth(1).unwrap() == "1,,0");
    }

    #[test]
    fn saturated_capacities_agree() {
        let r = sweep_q(&spec(vec![1000, 2000])).unwrap();
        assert_eq!(r.points[0].mean_obj, r.points[1].mean_obj);
    }
}
