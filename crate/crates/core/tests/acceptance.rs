//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line for
//! each and exits non-zero when any of them fails.

use std::process::ExitCode;
use std::time::Instant;

use moswacp::baselines::{run_ga, run_pso, run_sa, GaParams, PsoParams, SaParams};
use moswacp::bench::{desk_suite, random_instance, run_bench, run_case_study, sweep_q, BenchConfig, DeskRecipe, SweepSpec};
use moswacp::ersa::{run_ersa, ErsaParams};
use moswacp::exact::{enumerate_optimal, export_lp, parse_lp, solve_by_enumeration, ExactLimits, MilpExportConfig, Semantics};
use moswacp::operators::{
    apply_improvements, crossover, ir1_switch_mode, ir2_reschedule_float, ir3_regularize_avail, mutate, random_solution, repair, ImprovementMask,
};
use moswacp::schedule::objective_level;
use moswacp::{check_feasible, solve, Algorithm, Budget, Chromosome, Instance, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn feasible(inst: &Instance, sol: &Chromosome) -> bool {
    check_feasible(inst, sol).is_ok_and(|d| d.is_feasible())
}

fn case_study() -> Outcome {
    let t = Instant::now();
    let r = run_case_study();
    let secs = t.elapsed().as_secs_f64();
    let days: Vec<(u32, u32)> = r.windows.iter().map(|w| (w.install_day(), w.dismantle_day())).collect();
    let detail = format!(
        "optimal {} traditional {} savings {} ({:.2}%) windows {:?} max installed {} in {secs:.2}s",
        r.optimal_cost, r.traditional_cost, r.savings, r.savings_pct, days, r.max_installed
    );
    ensure(
        r.optimal_cost == 22_800.0
            && r.traditional_cost == 34_550.0
            && r.savings == 11_750.0
            && (r.savings_pct - 33.99).abs() <= 0.05
            && days == [(1, 26), (16, 43), (32, 50)]
            && r.max_installed <= 2
            && r.lifetimes_respected
            && r.feasible
            && secs < 10.0,
        detail,
    )
}

fn oracle_equivalence() -> Outcome {
    let t = Instant::now();
    let suite = desk_suite("oracle", &DeskRecipe::tiny(), 100, 2024).map_err(|e| e.to_string())?;
    let budget = Budget::evaluations(5000);
    let mut hits = [0usize; 4];
    let mut below = 0;
    for ni in &suite.instances {
        let inst = &ni.instance;
        if inst.n_activities() > 6 || inst.activities.iter().any(|a| a.modes.len() > 2) || inst.horizon > 15 {
            return Err(format!("{} is outside the tiny class", ni.name));
        }
        let opt = enumerate_optimal(inst, &ExactLimits::default()).map_err(|e| e.to_string())?.objective;
        let runs = [
            run_ersa(inst, &ErsaParams { seed: 1, budget, ..Default::default() }).map(|r| r.objective),
            run_ga(inst, &GaParams { seed: 1, budget, ..Default::default() }).map(|r| r.objective),
            run_sa(inst, &SaParams { seed: 1, budget, ..Default::default() }).map(|r| r.objective),
            run_pso(inst, &PsoParams { seed: 1, budget, ..Default::default() }).map(|r| r.objective),
        ];
        for (h, r) in hits.iter_mut().zip(&runs) {
            if let Ok(f) = r {
                *h += usize::from((f - opt).abs() < 1e-9);
            }
        }
        if runs[0].as_ref().map_or(true, |f| *f < opt - 1e-9) {
            below += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let detail = format!("ERSA_4 {}/100, GA {}/100, SA {}/100, PSO {}/100, below optimum {below} in {secs:.1}s", hits[0], hits[1], hits[2], hits[3]);
    ensure(hits[0] >= 90 && below == 0 && secs < 600.0, detail)
}

fn feasibility_closure() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut applications = 0usize;
    let mut bad = 0usize;
    let mut not_idempotent = 0usize;
    let mut insts: Vec<Instance> = Vec::new();
    while insts.len() < 50 {
        insts.extend(random_instance(&mut rng, &DeskRecipe::small()));
    }
    let mut check = |inst: &Instance, out: &Chromosome, applications: &mut usize| {
        *applications += 1;
        if !feasible(inst, out) {
            bad += 1;
        } else if repair(inst, out).ok().as_ref() != Some(out) {
            not_idempotent += 1;
        }
    };
    'outer: loop {
        for inst in &insts {
            let (Some(a), Some(b)) = (random_solution(inst, &mut rng, 1000), random_solution(inst, &mut rng, 1000)) else { continue };
            let cp = rng.gen_range(0..=a.len());
            let (c1, c2) = crossover(inst, &a, &b, cp);
            check(inst, &c1, &mut applications);
            check(inst, &c2, &mut applications);
            let r_m = rng.gen_range(1..=a.len());
            check(inst, &mutate(inst, &a, r_m, &mut rng), &mut applications);
            check(inst, &ir1_switch_mode(inst, &a), &mut applications);
            check(inst, &ir2_reschedule_float(inst, &a), &mut applications);
            check(inst, &ir3_regularize_avail(inst, &a), &mut applications);
            check(inst, &apply_improvements(inst, &b, ImprovementMask::ALL), &mut applications);
            if applications >= 10_000 {
                break 'outer;
            }
        }
    }
    ensure(bad == 0 && not_idempotent == 0, format!("{applications} applications, {bad} infeasible, {not_idempotent} repair changes"))
}

/// Peak of the per-period area each workshop hosts, summed activity by
/// activity.
fn recomputed_peaks(inst: &Instance, sol: &Chromosome) -> Vec<u32> {
    let end = (0..inst.n_activities()).map(|a| sol.finish(inst, a)).max().unwrap_or(0) as usize;
    let mut load = vec![vec![0u32; end]; inst.n_workshops()];
    for a in 0..inst.n_activities() {
        let m = inst.mode(a, sol.mode[a]);
        for t in sol.start[a]..sol.start[a] + m.duration {
            for (k, row) in load.iter_mut().enumerate() {
                row[t as usize] += m.space[k];
            }
        }
    }
    load.iter().map(|row| row.iter().copied().max().unwrap_or(0)).collect()
}

fn ir_monotonicity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let (mut samples, mut worse, mut peak_mismatch) = (0usize, 0usize, 0usize);
    while samples < 1000 {
        let Some(inst) = random_instance(&mut rng, &DeskRecipe::small()) else { continue };
        let Some(sol) = random_solution(&inst, &mut rng, 1000) else { continue };
        samples += 1;
        let before = objective_level(&inst, &sol.avail);
        let ir3 = ir3_regularize_avail(&inst, &sol);
        for out in [ir1_switch_mode(&inst, &sol), ir2_reschedule_float(&inst, &sol), ir3.clone()] {
            if objective_level(&inst, &out.avail) > before + 1e-9 {
                worse += 1;
            }
        }
        if ir3.avail != recomputed_peaks(&inst, &sol) {
            peak_mismatch += 1;
        }
    }
    ensure(worse == 0 && peak_mismatch == 0, format!("{samples} solutions, {worse} worsening applications, {peak_mismatch} IR3 peak mismatches"))
}

fn ablation_direction() -> Outcome {
    let suite = desk_suite("small", &DeskRecipe::small(), 20, 2024).map_err(|e| e.to_string())?;
    let cfg = BenchConfig { seeds: (1..=5).collect(), budget: Budget::evaluations(2000), jobs: 0, ..Default::default() };
    let report = run_bench(&suite, &(0..=4).map(Algorithm::Ersa).collect::<Vec<_>>(), &cfg);
    let s: Vec<_> = (0..=4).map(|v| report.summary(&format!("ersa{v}")).cloned()).collect::<Option<_>>().ok_or("missing summary")?;
    let mean = |v: usize| s[v].mean_obj.unwrap_or(f64::INFINITY);
    let detail = s.iter().map(|x| format!("{} mean {:.2} N* {}", x.algo, x.mean_obj.unwrap_or(f64::NAN), x.n_star)).collect::<Vec<_>>().join(", ");
    ensure(mean(4) <= mean(0) && (1..=3).all(|v| s[4].n_star >= s[v].n_star) && s.iter().all(|x| x.failures == 0), detail)
}

fn q_sensitivity() -> Outcome {
    let dataset = desk_suite("capacity", &DeskRecipe::capacity_bound(5), 10, 2).map_err(|e| e.to_string())?;
    let spec = SweepSpec {
        q_values: vec![5, 6, 7, 8, 9, 11, 15, 100],
        dataset,
        algorithm: Algorithm::Ersa(4),
        seeds: (1..=5).collect(),
        budget: Budget::evaluations(3000),
        jobs: 0,
    };
    let r = sweep_q(&spec).map_err(|e| e.to_string())?;
    let means: Vec<f64> = r.points.iter().map(|p| p.mean_obj.unwrap_or(f64::INFINITY)).collect();
    let all_feasible = r.points.iter().all(|p| p.n_feasible == p.n_runs);
    let non_increasing = means.windows(2).all(|w| w[1] <= w[0] + 1e-9);
    let [.., a, b] = means[..] else { return Err("too few points".into()) };
    let saturated = (a - b).abs() < 0.01 * a.abs().max(b.abs());
    let detail = r.points.iter().map(|p| format!("Q={} {:.1}", p.q, p.mean_obj.unwrap_or(f64::NAN))).collect::<Vec<_>>().join(", ");
    ensure(all_feasible && non_increasing && saturated, detail)
}

fn milp_cross_check() -> Outcome {
    let recipe = DeskRecipe { activities: 2..=4, horizon: 10, ..DeskRecipe::tiny() };
    let suite = desk_suite("lp", &recipe, 10, 7).map_err(|e| e.to_string())?;
    let cfg = MilpExportConfig { semantics: Semantics::TimeIndexed, ..Default::default() };
    let mut equal = 0;
    for ni in &suite.instances {
        let model = parse_lp(&export_lp(&ni.instance, &cfg)).map_err(|e| e.to_string())?;
        let lp = solve_by_enumeration(&model, 100_000_000).map_err(|e| e.to_string())?.map(|s| s.objective);
        let opt = enumerate_optimal(&ni.instance, &ExactLimits::default()).map_err(|e| e.to_string())?.objective;
        equal += usize::from(lp == Some(opt));
    }
    ensure(equal == suite.instances.len(), format!("{equal}/{} exported optima equal the oracle", suite.instances.len()))
}

fn determinism() -> Outcome {
    let inst = desk_suite("det", &DeskRecipe::small(), 1, 5).map_err(|e| e.to_string())?.instances.remove(0).instance;
    let algos = [0, 1, 2, 3, 4].map(Algorithm::Ersa).into_iter().chain([Algorithm::Ga, Algorithm::Sa, Algorithm::Pso, Algorithm::Exact]);
    let mut differing = Vec::new();
    let mut n = 0;
    for algo in algos {
        n += 1;
        let cfg = SolverConfig::new(algo, 42, Budget::evaluations(1500));
        let run = || solve(&inst, &cfg).map(|r| r.trace_csv("det"));
        if run().map_err(|e| e.to_string())? != run().map_err(|e| e.to_string())? {
            differing.push(algo.to_string());
        }
    }
    ensure(differing.is_empty(), format!("{} of {n} solvers reproduced their trace CSV, differing: {differing:?}", n - differing.len()))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("case-study regression", case_study),
        ("oracle equivalence", oracle_equivalence),
        ("feasibility closure", feasibility_closure),
        ("IR monotonicity", ir_monotonicity),
        ("ablation direction", ablation_direction),
        ("Q-sensitivity", q_sensitivity),
        ("MILP cross-check", milp_cross_check),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(d) => println!("criterion {} {name}: PASS ({d}) [{secs:.1}s]", i + 1),
            Err(d) => {
                failed += 1;
                println!("criterion {} {name}: FAIL ({d}) [{secs:.1}s]", i + 1);
            }
        }
    }
    println!("acceptance: {}/{} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
