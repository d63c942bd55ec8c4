//! Eight-activity construction project with three workshops, solved under
//! the duration objective and compared with a traditional plan that keeps
//! each workshop from the first day it could be needed to the end of its
//! last use.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::SolveError;
use crate::ersa::{run_ersa, ErsaParams};
use crate::instance::{parse_instance, Instance};
use crate::schedule::report::text_report;
use crate::schedule::{check_feasible, objective_duration_days, ConstraintTag, Window};
use crate::solve::{Budget, SolveResult};

pub const CASE_STUDY: &str = include_str!("../../data/case_study.moswacp");

pub fn case_study_instance() -> Instance {
    parse_instance(CASE_STUDY).expect("bundled case study parses")
}

/// Workshop windows of the traditional plan with the rental days charged
/// for each.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TraditionalPlan {
    pub windows: Vec<Window>,
    pub billed_days: Vec<u32>,
}

pub fn traditional_plan() -> TraditionalPlan {
    TraditionalPlan {
        windows: vec![Window { install: 0, dismantle: 31 }, Window { install: 0, dismantle: 43 }, Window { install: 15, dismantle: 50 }],
        billed_days: vec![30, 42, 35],
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub result: SolveResult,
    pub optimal_cost: f64,
    pub windows: Vec<Window>,
    /// Most workshops installed on a single day.
    pub max_installed: usize,
    pub lifetimes_respected: bool,
    pub feasible: bool,
    pub traditional: TraditionalPlan,
    pub traditional_cost: f64,
    pub savings: f64,
    pub savings_pct: f64,
    /// Activity and workshop tables of the optimized schedule.
    pub schedule_table: String,
}

/// Solve with ERSA_4 under a fixed evaluation budget.
pub fn run_case_study() -> CaseStudyReport {
    let params = ErsaParams { seed: 0, budget: Budget::evaluations(3000), ..Default::default() };
    run_case_study_with(&params).expect("bundled case study is solvable")
}

pub fn run_case_study_with(params: &ErsaParams) -> Result<CaseStudyReport, SolveError> {
    let inst = case_study_instance();
    let result = run_ersa(&inst, params)?;
    let decoded = check_feasible(&inst, &result.solution).expect("solver output has the instance's shape");
    let traditional = traditional_plan();
    let traditional_cost = objective_duration_days(&inst, &traditional.billed_days).expect("case study has daily costs");
    let optimal_cost = result.objective;
    let savings = traditional_cost - optimal_cost;
    Ok(CaseStudyReport {
        optimal_cost,
        windows: decoded.windows.clone(),
        max_installed: decoded.max_installed(),
        lifetimes_respected: !decoded.has(ConstraintTag::Lifetime),
        feasible: decoded.is_feasible(),
        traditional,
        traditional_cost,
        savings,
        savings_pct: savings / traditional_cost * 100.0,
        schedule_table: text_report(&inst, &result.solution),
        result,
    })
}

/// `22800.0` -> `22,800`.
pub fn thousands(v: f64) -> String {
    let digits = format!("{:.0}", v.abs());
    let mut out = String::new();
    for (i, c) in digits.chars().enumerate() {
        if i > 0 && (digits.len() - i) % 3 == 0 {
            out.push(',');
        }
        out.push(c);
    }
    if v < 0.0 {
        out.insert(0, '-');
    }
    out
}

impl CaseStudyReport {
    pub fn to_text(&self) -> String {
        let mut out = String::from("Optimized schedule\n");
        out.push_str(&self.schedule_table);
        let _ = writeln!(out, "\nTraditional plan");
        let _ = writeln!(out, "{:<9} {:>7} {:>9} {:>5}", "workshop", "install", "dismantle", "days");
        for (k, (w, d)) in self.traditional.windows.iter().zip(&self.traditional.billed_days).enumerate() {
            let _ = writeln!(out, "{:<9} {:>7} {:>9} {:>5}", format!("W{}", k + 1), w.install_day(), w.dismantle_day(), d);
        }
        let _ = writeln!(out, "\noptimal cost      {} USD", thousands(self.optimal_cost));
        let _ = writeln!(out, "traditional cost  {} USD", thousands(self.traditional_cost));
        let _ = writeln!(out, "savings           {} USD ({:.2}%)", thousands(self.savings), self.savings_pct);
        let _ = writeln!(out, "max installed     {} workshops on one day", self.max_installed);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn thousands_separators() {
        assert_eq!(thousands(22800.0), "22,800");
        assert_eq!(thousands(950.0), "950");
        assert_eq!(thousands(1234567.0), "1,234,567");
    }

    #[test]
    fn traditional_cost_from_billed_days() {
        let inst = case_study_instance();
        assert_eq!(objective_duration_days(&inst, &traditional_plan().billed_days).unwrap(), 34_550.0);
    }
}
