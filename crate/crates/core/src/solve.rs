//! Shared solver plumbing: budgets, results, convergence traces and
//! algorithm dispatch.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::baselines::{run_ga, run_pso, run_sa, GaParams, PsoParams, SaParams};
use crate::error::SolveError;
use crate::ersa::{run_ersa, ErsaParams};
use crate::exact::{enumerate_optimal, ExactLimits};
use crate::instance::Instance;
use crate::operators::{score, ImprovementMask, Score};
use crate::schedule::Chromosome;

pub const SCHEMA: &str = "solve-result v1";

/// Stopping rule. An evaluation is one scored candidate, including the
/// solutions of the initial population.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Budget {
    pub max_evaluations: Option<u64>,
    pub time_limit_s: Option<f64>,
}

impl Default for Budget {
    fn default() -> Self {
        Self { max_evaluations: None, time_limit_s: Some(60.0) }
    }
}

impl Budget {
    pub fn evaluations(n: u64) -> Self {
        Self { max_evaluations: Some(n), time_limit_s: None }
    }

    pub fn seconds(s: f64) -> Self {
        Self { max_evaluations: None, time_limit_s: Some(s) }
    }

    /// Runs under an evaluation count alone are reproducible, and their
    /// outputs carry no timings.
    pub fn is_deterministic(&self) -> bool {
        self.time_limit_s.is_none() && self.max_evaluations.is_some()
    }
}

/// Evaluation counter, wall clock and best-so-far trace of one run.
pub(crate) struct Tracker {
    budget: Budget,
    started: Instant,
    pub evaluations: u64,
    pub best: Option<(Chromosome, Score)>,
    pub trace: Vec<TracePoint>,
}

impl Tracker {
    pub fn new(budget: Budget) -> Self {
        let budget = if budget.max_evaluations.is_none() && budget.time_limit_s.is_none() { Budget::default() } else { budget };
        Self { budget, started: Instant::now(), evaluations: 0, best: None, trace: Vec::new() }
    }

    pub fn exhausted(&self) -> bool {
        if let Some(max) = self.budget.max_evaluations {
            if self.evaluations >= max {
                return true;
            }
        }
        if let Some(limit) = self.budget.time_limit_s {
            if self.started.elapsed().as_secs_f64() >= limit {
                return true;
            }
        }
        false
    }

    /// Evaluations still allowed by the count limit.
    pub fn remaining(&self) -> u64 {
        self.budget.max_evaluations.map_or(u64::MAX, |m| m.saturating_sub(self.evaluations))
    }

    /// Count one evaluation and record `sol` if it beats the best so far.
    pub fn record(&mut self, inst: &Instance, sol: &Chromosome) -> Score {
        self.evaluations += 1;
        let s = score(inst, sol);
        let better = self.best.as_ref().is_none_or(|(_, b)| s.better_than(b));
        if better {
            let improved_objective = self.best.as_ref().is_none_or(|(_, b)| s.objective < b.objective - 1e-9);
            self.best = Some((sol.clone(), s));
            if improved_objective {
                let elapsed_s = (!self.budget.is_deterministic()).then(|| self.started.elapsed().as_secs_f64());
                self.trace.push(TracePoint { iteration: self.evaluations, elapsed_s, best: s.objective });
            }
        }
        s
    }

    pub fn finish(self, inst: &Instance, algorithm: &str, seed: u64) -> Result<SolveResult, SolveError> {
        let deterministic = self.budget.is_deterministic();
        let wall = self.started.elapsed().as_secs_f64();
        let (best, s) = self.best.ok_or_else(|| SolveError::Initialization("no solution was evaluated".into()))?;
        Ok(SolveResult {
            schema: SCHEMA.into(),
            algorithm: algorithm.into(),
            seed,
            objective: s.objective,
            makespan: best.makespan(inst),
            evaluations: self.evaluations,
            wall_time_s: (!deterministic).then_some(wall),
            proven_optimal: false,
            solution: best,
            trace: self.trace,
        })
    }
}

/// Best-so-far objective after `iteration` evaluations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub iteration: u64,
    /// Absent for runs limited by evaluation count only.
    pub elapsed_s: Option<f64>,
    pub best: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolveResult {
    pub schema: String,
    pub algorithm: String,
    pub seed: u64,
    pub objective: f64,
    pub makespan: u32,
    pub evaluations: u64,
    pub wall_time_s: Option<f64>,
    pub proven_optimal: bool,
    pub solution: Chromosome,
    pub trace: Vec<TracePoint>,
}

impl SolveResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("result serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Trace rows `run_id,iter,elapsed_s,best` without a header.
    pub fn trace_rows(&self, run_id: &str) -> String {
        let mut out = String::new();
        for p in &self.trace {
            let elapsed = p.elapsed_s.map(|e| format!("{e:.6}")).unwrap_or_default();
            out.push_str(&format!("{run_id},{},{elapsed},{}\n", p.iteration, p.best));
        }
        out
    }

    /// Complete trace CSV with header.
    pub fn trace_csv(&self, run_id: &str) -> String {
        format!("{TRACE_HEADER}\n{}", self.trace_rows(run_id))
    }
}

pub const TRACE_HEADER: &str = "run_id,iter,elapsed_s,best";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    /// ERSA with the rule set of the given ablation variant (0 to 4).
    Ersa(u8),
    Ga,
    Sa,
    Pso,
    Exact,
}

impl Default for Algorithm {
    fn default() -> Self {
        Algorithm::Ersa(4)
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Algorithm::Ersa(v) => write!(f, "ersa{v}"),
            Algorithm::Ga => f.write_str("ga"),
            Algorithm::Sa => f.write_str("sa"),
            Algorithm::Pso => f.write_str("pso"),
            Algorithm::Exact => f.write_str("exact"),
        }
    }
}

impl FromStr for Algorithm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ersa" => Ok(Algorithm::Ersa(4)),
            "ga" => Ok(Algorithm::Ga),
            "sa" => Ok(Algorithm::Sa),
            "pso" => Ok(Algorithm::Pso),
            "exact" => Ok(Algorithm::Exact),
            other => other
                .strip_prefix("ersa")
                .and_then(|v| v.parse::<u8>().ok())
                .filter(|&v| v <= 4)
                .map(Algorithm::Ersa)
                .ok_or_else(|| format!("unknown algorithm `{s}`")),
        }
    }
}

/// Algorithm choice with every parameter set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub algorithm: Algorithm,
    pub seed: u64,
    pub budget: Budget,
    pub ersa: ErsaParams,
    pub ga: GaParams,
    pub sa: SaParams,
    pub pso: PsoParams,
    pub exact: ExactLimits,
}

impl SolverConfig {
    pub fn new(algorithm: Algorithm, seed: u64, budget: Budget) -> Self {
        Self {
            algorithm,
            seed,
            budget,
            ersa: ErsaParams::default(),
            ga: GaParams::default(),
            sa: SaParams::default(),
            pso: PsoParams::default(),
            exact: ExactLimits::default(),
        }
    }
}

/// Validate the instance and run the configured algorithm.
pub fn solve(inst: &Instance, cfg: &SolverConfig) -> Result<SolveResult, SolveError> {
    let diags = inst.validate();
    if !diags.is_empty() {
        return Err(SolveError::InvalidInstance(diags));
    }
    match cfg.algorithm {
        Algorithm::Ersa(v) => {
            let mask = ImprovementMask::ersa_variant(v).unwrap_or(ImprovementMask::ALL);
            let params = ErsaParams { seed: cfg.seed, budget: cfg.budget, improvement_mask: mask, ..cfg.ersa.clone() };
            let mut r = run_ersa(inst, &params)?;
            r.algorithm = cfg.algorithm.to_string();
            Ok(r)
        }
        Algorithm::Ga => run_ga(inst, &GaParams { seed: cfg.seed, budget: cfg.budget, ..cfg.ga.clone() }),
        Algorithm::Sa => run_sa(inst, &SaParams { seed: cfg.seed, budget: cfg.budget, ..cfg.sa.clone() }),
        Algorithm::Pso => run_pso(inst, &PsoParams { seed: cfg.seed, budget: cfg.budget, ..cfg.pso.clone() }),
        Algorithm::Exact => {
            let started = Instant::now();
            let ex = enumerate_optimal(inst, &cfg.exact)?;
            let objective = ex.objective;
            Ok(SolveResult {
                schema: SCHEMA.into(),
                algorithm: "exact".into(),
                seed: cfg.seed,
                objective,
                makespan: ex.solution.makespan(inst),
                evaluations: ex.nodes,
                wall_time_s: (!cfg.budget.is_deterministic()).then(|| started.elapsed().as_secs_f64()),
                proven_optimal: ex.proven,
                trace: vec![TracePoint { iteration: ex.nodes, elapsed_s: None, best: objective }],
                solution: ex.solution,
            })
        }
    }
}
