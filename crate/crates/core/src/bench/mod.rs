//! Benchmark harness: dataset runs with N*/R*/T* aggregation, the site
//! capacity sweep, convergence exports and the bundled case study.
//!
//! * N*: instances whose best objective over all seeds equals a proven
//!   optimum.
//! * R*: mean relative gap, in percent, of that best objective to the
//!   proven optimum.
//! * T*: mean wall time per run (absent for count-limited runs).

mod case_study;
mod desk;
mod plot;
mod sweep;

use std::fmt::Write as _;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::exact::{enumerate_optimal, ExactLimits};
use crate::solve::{solve, Algorithm, Budget, SolverConfig, TracePoint, TRACE_HEADER};

pub use case_study::{case_study_instance, run_case_study, run_case_study_with, thousands, traditional_plan, CaseStudyReport, TraditionalPlan, CASE_STUDY};
pub use desk::{desk_suite, random_instance, Dataset, DatasetError, DeskRecipe, NamedInstance, RECIPE_VERSION};
pub use plot::{line_chart, Series};
pub use sweep::{sweep_q, SweepError, SweepPoint, SweepReport, SweepSpec};

const EPS: f64 = 1e-6;

pub const BENCH_HEADER: &str = "dataset,instance,algo,seed,best,time_s,optimal,gap_pct";
pub const SUMMARY_HEADER: &str = "dataset,algo,instances,runs,failures,mean_obj,n_star,r_star,t_star";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub seeds: Vec<u64>,
    pub budget: Budget,
    /// Worker threads; 1 runs everything on the calling thread.
    pub jobs: usize,
    pub exact: ExactLimits,
    /// Algorithm parameters; algorithm, seed and budget are overridden per
    /// run.
    pub solver: SolverConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        let budget = Budget::default();
        Self { seeds: vec![0], budget, jobs: 1, exact: ExactLimits::default(), solver: SolverConfig::new(Algorithm::default(), 0, budget) }
    }
}

/// Oracle value of one instance.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Reference {
    pub objective: f64,
    pub proven: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub instance: String,
    pub algo: String,
    pub seed: u64,
    pub best: Option<f64>,
    pub time_s: Option<f64>,
    pub error: Option<String>,
    pub trace: Vec<TracePoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AlgoSummary {
    pub algo: String,
    pub instances: usize,
    pub runs: usize,
    pub failures: usize,
    pub mean_obj: Option<f64>,
    pub n_star: usize,
    pub r_star: Option<f64>,
    pub t_star: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub dataset: String,
    /// Per instance, in dataset order.
    pub instances: Vec<String>,
    pub references: Vec<Option<Reference>>,
    pub records: Vec<RunRecord>,
    pub summaries: Vec<AlgoSummary>,
}

/// `(f - f*) / f* * 100`; zero when both are zero, undefined when only the
/// optimum is.
pub fn gap_pct(f: f64, f_star: f64) -> Option<f64> {
    if f_star.abs() < EPS {
        (f.abs() < EPS).then_some(0.0)
    } else {
        Some(((f - f_star) / f_star * 100.0).max(0.0))
    }
}

fn with_pool<T: Send>(jobs: usize, f: impl FnOnce() -> T + Send) -> T {
    match rayon::ThreadPoolBuilder::new().num_threads(jobs.max(1)).build() {
        Ok(pool) => pool.install(f),
        Err(_) => f(),
    }
}

/// Run every (instance, algorithm, seed) combination of the dataset. Runs
/// that fail are recorded with their error; the batch always completes.
pub fn run_bench(dataset: &Dataset, algorithms: &[Algorithm], config: &BenchConfig) -> BenchReport {
    let tasks: Vec<(usize, Algorithm, u64)> = (0..dataset.instances.len())
        .flat_map(|i| algorithms.iter().flat_map(move |&a| config.seeds.iter().map(move |&s| (i, a, s))))
        .collect();
    let (references, records) = with_pool(config.jobs, || {
        let references: Vec<Option<Reference>> = dataset
            .instances
            .par_iter()
            .map(|ni| enumerate_optimal(&ni.instance, &config.exact).ok().map(|e| Reference { objective: e.objective, proven: e.proven }))
            .collect();
        let records: Vec<RunRecord> = tasks
            .par_iter()
            .map(|&(i, algo, seed)| {
                let ni = &dataset.instances[i];
                let cfg = SolverConfig { algorithm: algo, seed, budget: config.budget, ..config.solver.clone() };
                let base = RunRecord { instance: ni.name.clone(), algo: algo.to_string(), seed, best: None, time_s: None, error: None, trace: Vec::new() };
                match solve(&ni.instance, &cfg) {
                    Ok(r) => RunRecord { best: Some(r.objective), time_s: r.wall_time_s, trace: r.trace, ..base },
                    Err(e) => RunRecord { error: Some(e.to_string()), ..base },
                }
            })
            .collect();
        (references, records)
    });
    let instances: Vec<String> = dataset.instances.iter().map(|ni| ni.name.clone()).collect();
    let summaries = algorithms.iter().map(|a| summarize(&a.to_string(), &instances, &references, &records)).collect();
    BenchReport { dataset: dataset.name.clone(), instances, references, records, summaries }
}

fn mean(v: &[f64]) -> Option<f64> {
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

fn summarize(algo: &str, instances: &[String], refs: &[Option<Reference>], records: &[RunRecord]) -> AlgoSummary {
    let mine: Vec<&RunRecord> = records.iter().filter(|r| r.algo == algo).collect();
    let objs: Vec<f64> = mine.iter().filter_map(|r| r.best).collect();
    let times: Vec<f64> = mine.iter().filter_map(|r| r.time_s).collect();
    let mut n_star = 0;
    let mut gaps = Vec::new();
    for (name, reference) in instances.iter().zip(refs) {
        let Some(Reference { objective: f_star, proven: true }) = *reference else { continue };
        let best = mine.iter().filter(|r| &r.instance == name).filter_map(|r| r.best).fold(None, |b: Option<f64>, v| Some(b.map_or(v, |b| b.min(v))));
        if let Some(best) = best {
            if best <= f_star + EPS {
                n_star += 1;
            }
            gaps.extend(gap_pct(best, f_star));
        }
    }
    AlgoSummary {
        algo: algo.into(),
        instances: instances.len(),
        runs: mine.len(),
        failures: mine.iter().filter(|r| r.error.is_some()).count(),
        mean_obj: mean(&objs),
        n_star,
        r_star: mean(&gaps),
        t_star: mean(&times),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

impl BenchReport {
    pub fn reference(&self, instance: &str) -> Option<Reference> {
        self.instances.iter().position(|n| n == instance).and_then(|i| self.references[i])
    }

    pub fn summary(&self, algo: &str) -> Option<&AlgoSummary> {
        self.summaries.iter().find(|s| s.algo == algo)
    }

    /// One row per run. `optimal` is `true`/`false` against a proven
    /// optimum, `unproven` when the oracle stopped early and empty when the
    /// instance is outside the oracle's limits or the run failed.
    pub fn bench_csv(&self) -> String {
        let mut out = format!("{BENCH_HEADER}\n");
        for r in &self.records {
            let reference = self.reference(&r.instance);
            let (optimal, gap) = match (r.best, reference) {
                (Some(f), Some(Reference { objective, proven: true })) => ((f <= objective + EPS).to_string(), gap_pct(f, objective).map(|g| format!("{g:.4}"))),
                (Some(_), Some(_)) => ("unproven".into(), None),
                _ => (String::new(), None),
            };
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                self.dataset,
                r.instance,
                r.algo,
                r.seed,
                opt(r.best),
                r.time_s.map(|t| format!("{t:.6}")).unwrap_or_default(),
                optimal,
                gap.unwrap_or_default()
            );
        }
        out
    }

    pub fn summary_csv(&self) -> String {
        let mut out = format!("{SUMMARY_HEADER}\n");
        for s in &self.summaries {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                self.dataset,
                s.algo,
                s.instances,
                s.runs,
                s.failures,
                opt(s.mean_obj),
                s.n_star,
                s.r_star.map(|g| format!("{g:.4}")).unwrap_or_default(),
                s.t_star.map(|t| format!("{t:.6}")).unwrap_or_default()
            );
        }
        out
    }

    pub fn trace_csv(&self) -> String {
        let mut out = format!("{TRACE_HEADER}\n");
        for r in &self.records {
            let run_id = format!("{}/{}/{}/{}", self.dataset, r.instance, r.algo, r.seed);
            for p in &r.trace {
                let elapsed = p.elapsed_s.map(|e| format!("{e:.6}")).unwrap_or_default();
                let _ = writeln!(out, "{run_id},{},{elapsed},{}", p.iteration, p.best);
            }
        }
        out
    }

    /// Best-so-far curves of every algorithm on the first instance and seed.
    pub fn convergence_svg(&self) -> String {
        let first = self.records.first().map(|r| (r.instance.clone(), r.seed));
        let series: Vec<Series> = self
            .records
            .iter()
            .filter(|r| first.as_ref() == Some(&(r.instance.clone(), r.seed)) && !r.trace.is_empty())
            .map(|r| Series { label: r.algo.clone(), points: r.trace.iter().map(|p| (p.iteration as f64, p.best)).collect(), step: true })
            .collect();
        let title = first.map_or_else(|| "convergence".to_string(), |(i, s)| format!("convergence on {i} (seed {s})"));
        line_chart(&title, "evaluations", "best objective", &series)
    }

    /// `bench.csv`, `summary.csv`, `trace.csv` and `convergence.svg`.
    pub fn write(&self, dir: &Path) -> std::io::Result<()> {
        std::fs::create_dir_all(dir)?;
        std::fs::write(dir.join("bench.csv"), self.bench_csv())?;
        std::fs::write(dir.join("summary.csv"), self.summary_csv())?;
        std::fs::write(dir.join("trace.csv"), self.trace_csv())?;
        std::fs::write(dir.join("convergence.svg"), self.convergence_svg())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{Activity, CostMode, Instance, ModeSpec, Workshop};

    #[test]
    fn equal_values_have_zero_gap() {
        assert_eq!(gap_pct(103.45, 103.45).map(|g| format!("{g:.2}")), Some("0.00".into()));
        assert_eq!(gap_pct(110.0, 100.0).map(|g| g.round()), Some(10.0));
        assert_eq!(gap_pct(0.0, 0.0), Some(0.0));
        assert_eq!(gap_pct(5.0, 0.0), None);
    }

    fn single() -> Dataset {
        let inst = Instance {
            activities: vec![Activity { modes: vec![ModeSpec::new(1, vec![2])], predecessors: vec![] }],
            workshops: vec![Workshop::with_unit_cost(10.0)],
            site_capacity: 5,
            deadline: 3,
            horizon: 3,
            cost_mode: CostMode::Level,
        };
        Dataset { name: "one".into(), instances: vec![NamedInstance { name: "a".into(), instance: inst }] }
    }

    #[test]
    fn optimum_hit_gives_full_n_star_and_zero_r_star() {
        let cfg = BenchConfig { budget: Budget::evaluations(200), ..Default::default() };
        let rep = run_bench(&single(), &[Algorithm::Ersa(4)], &cfg);
        let s = rep.summary("ersa4").unwrap();
        assert_eq!((s.n_star, s.r_star), (1, Some(0.0)));
        assert!(rep.bench_csv().lines().nth(1).unwrap().ends_with(",true,0.0000"));
    }

    #[test]
    fn failures_are_recorded_not_fatal() {
        let mut d = single();
        d.instances[0].instance.site_capacity = 1;
        let cfg = BenchConfig { budget: Budget::evaluations(50), ..Default::default() };
        let rep = run_bench(&d, &[Algorithm::Ga, Algorithm::Exact], &cfg);
        assert_eq!(rep.records.len(), 2);
        assert!(rep.records.iter().all(|r| r.error.is_some()));
        assert_eq!(rep.summaries[0].failures, 1);
    }
}
