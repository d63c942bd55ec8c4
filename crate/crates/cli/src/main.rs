mod logging;

use std::fmt;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use moswacp::bench::{run_bench, run_case_study_with, sweep_q, BenchConfig, Dataset, DeskRecipe, SweepSpec};
use moswacp::ersa::ErsaParams;
use moswacp::exact::{export_lp, MilpExportConfig, Semantics};
use moswacp::instance::{import_psplib_mm, parse_instance, serialize_instance, AugmentConfig};
use moswacp::{check_feasible, solve, Algorithm, Budget, Chromosome, Instance, SolveError, SolveResult, SolverConfig};
use serde_json::{json, Value};

#[derive(Parser)]
#[command(name = "moswacp", version, about = "On-site workshop availability cost solvers")]
struct Cli {
    /// Print failures as a JSON object on stderr.
    #[arg(long, global = true)]
    json_errors: bool,

    /// Write one JSON line per operator application to FILE.
    #[arg(long, global = true, value_name = "FILE")]
    op_trace: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one instance and emit a solve-result JSON document.
    Solve(SolveArgs),
    /// Check a solution against an instance.
    Validate(ValidateArgs),
    /// Generate instances from a PSPLIB file or the desk recipes.
    Gen(GenArgs),
    /// Export the linearized model in LP format.
    ExportLp(ExportLpArgs),
    /// Run algorithms over a dataset directory.
    Bench(BenchArgs),
    /// Mean best objective across site capacities.
    SweepQ(SweepArgs),
    /// Optimized versus traditional plan for the bundled project.
    CaseStudy(CaseStudyArgs),
}

#[derive(Args)]
struct BudgetArgs {
    /// Wall-clock limit in seconds.
    #[arg(long)]
    budget_s: Option<f64>,
    /// Evaluation limit; alone it makes runs reproducible.
    #[arg(long)]
    budget_iters: Option<u64>,
}

impl BudgetArgs {
    fn budget(&self) -> Budget {
        match (self.budget_s, self.budget_iters) {
            (None, None) => Budget::default(),
            (s, i) => Budget { max_evaluations: i, time_limit_s: s },
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    #[arg(long, default_value = "ersa4", value_parser = parse_algo)]
    algo: Algorithm,
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    budget: BudgetArgs,
    /// Result file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Convergence trace CSV.
    #[arg(long)]
    trace: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    instance: PathBuf,
    /// solve-result JSON or a bare chromosome JSON.
    #[arg(long)]
    solution: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    /// PSPLIB multi-mode (.mm) file to augment.
    #[arg(long, conflicts_with = "desk", required_unless_present = "desk")]
    from_psplib: Option<PathBuf>,
    /// Draw a suite of random desk-scale instances.
    #[arg(long)]
    desk: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_delimiter = ',', default_value = "10,20,30,50,100")]
    cost_set: Vec<f64>,
    /// Inclusive demand range, `LO..HI`.
    #[arg(long, default_value = "0..13", value_parser = parse_range)]
    space: (u32, u32),
    #[arg(long, default_value_t = 2.0)]
    capacity_factor: f64,
    #[arg(long, default_value_t = 1.5)]
    deadline_factor: f64,
    #[arg(long, default_value_t = 20)]
    count: usize,
    #[arg(long, value_enum, default_value_t = Recipe::Tiny)]
    recipe: Recipe,
    /// Output file for --from-psplib; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Output directory for --desk.
    #[arg(long, env = "MOSWACP_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Recipe {
    Tiny,
    Small,
    /// Tiny instances built for capacity sweeps, at Q = 5.
    Capacity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    Literal,
    TimeIndexed,
}

#[derive(Args)]
struct ExportLpArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = SemanticsArg::TimeIndexed)]
    semantics: SemanticsArg,
    #[arg(long, default_value_t = 0.75)]
    alpha: f64,
    /// Defaults to the site capacity.
    #[arg(long)]
    big_m: Option<f64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, value_delimiter = ',', default_value = "ersa0,ersa1,ersa2,ersa3,ersa4,ga,sa,pso", value_parser = parse_algo)]
    algos: Vec<Algorithm>,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    #[arg(long, env = "MOSWACP_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    instance_dir: PathBuf,
    #[arg(long, value_delimiter = ',', required = true)]
    q: Vec<u32>,
    #[arg(long, default_value = "ersa4", value_parser = parse_algo)]
    algo: Algorithm,
    #[arg(long, value_delimiter = ',', default_value = "0")]
    seeds: Vec<u64>,
    #[command(flatten)]
    budget: BudgetArgs,
    #[arg(long, env = "MOSWACP_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct CaseStudyArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 3000)]
    budget_iters: u64,
    /// Print the full report as JSON.
    #[arg(long)]
    json: bool,
}

fn parse_algo(s: &str) -> Result<Algorithm, String> {
    s.parse()
}

fn parse_range(s: &str) -> Result<(u32, u32), String> {
    let (a, b) = s.split_once("..").ok_or("expected LO..HI")?;
    let b = b.strip_prefix('=').unwrap_or(b);
    let lo = a.trim().parse::<u32>().map_err(|e| e.to_string())?;
    let hi = b.trim().parse::<u32>().map_err(|e| e.to_string())?;
    if lo > hi {
        return Err(format!("empty range {s}"));
    }
    Ok((lo, hi))
}

struct Failure {
    code: u8,
    kind: &'static str,
    message: String,
    details: Option<Value>,
}

impl Failure {
    fn usage(message: impl fmt::Display) -> Self {
        Self { code: 2, kind: "usage", message: message.to_string(), details: None }
    }

    fn input(kind: &'static str, message: impl fmt::Display) -> Self {
        Self { code: 1, kind, message: message.to_string(), details: None }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::input("input", format!("{e:#}"))
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let details = match &e {
            SolveError::InvalidInstance(d) => serde_json::to_value(d).ok(),
            _ => None,
        };
        let kind = match e {
            SolveError::InvalidInstance(_) => "invalid_instance",
            SolveError::OutOfLimits(_) => "out_of_limits",
            _ => "infeasible",
        };
        Failure { code: 1, kind, message: e.to_string(), details }
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, text: &str) -> anyhow::Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

/// Write to stdout; a closed pipe is not an error.
fn out(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn load_instance(path: &Path) -> Result<Instance, Failure> {
    let inst = parse_instance(&read(path)?).map_err(|e| Failure::input("invalid_instance", format!("{}: {e}", path.display())))?;
    let diags = inst.validate();
    if diags.is_empty() {
        Ok(inst)
    } else {
        Err(SolveError::InvalidInstance(diags).into())
    }
}

fn cmd_solve(a: SolveArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let result = solve(&inst, &SolverConfig::new(a.algo, a.seed, a.budget.budget()))?;
    if let Some(path) = &a.trace {
        write(path, &result.trace_csv(&format!("{}/{}", a.algo, a.seed)))?;
    }
    match &a.out {
        Some(path) => {
            write(path, &result.to_json())?;
            out(&format!("{} objective={} makespan={} evaluations={}\n", result.algorithm, result.objective, result.makespan, result.evaluations));
        }
        None => out(&format!("{}\n", result.to_json())),
    }
    Ok(())
}

fn cmd_validate(a: ValidateArgs) -> Result<(), Failure> {
    let inst = load_instance(&a.instance)?;
    let text = read(&a.solution)?;
    let sol = match SolveResult::from_json(&text) {
        Ok(r) => r.solution,
        Err(_) => serde_json::from_str::<Chromosome>(&text).map_err(|e| Failure::input("invalid_solution", format!("{}: {e}", a.solution.display())))?,
    };
    let decoded = check_feasible(&inst, &sol).map_err(|e| Failure::input("invalid_solution", e))?;
    if decoded.is_feasible() {
        out(&format!("feasible objective={} makespan={}\n", moswacp::schedule::objective(&inst, &sol), decoded.makespan));
        return Ok(());
    }
    for d in &decoded.violations {
        out(&format!("{d}\n"));
    }
    Err(Failure {
        code: 1,
        kind: "infeasible_solution",
        message: format!("{} constraint violation(s), first {}", decoded.violations.len(), decoded.violations[0].tag),
        details: serde_json::to_value(&decoded.violations).ok(),
    })
}

fn cmd_gen(a: GenArgs) -> Result<(), Failure> {
    if let Some(path) = &a.from_psplib {
        let cfg = AugmentConfig {
            cost_choices: a.cost_set.clone(),
            space_range: a.space.0..=a.space.1,
            seed: a.seed,
            capacity_factor: a.capacity_factor,
            deadline_factor: a.deadline_factor,
        };
        let inst = import_psplib_mm(&read(path)?, &cfg).map_err(|e| Failure::input("invalid_instance", format!("{}: {e}", path.display())))?;
        let text = serialize_instance(&inst);
        match &a.out {
            Some(out) => write(out, &text)?,
            None => out(&text),
        }
        return Ok(());
    }
    let recipe = match a.recipe {
        Recipe::Tiny => DeskRecipe::tiny(),
        Recipe::Small => DeskRecipe::small(),
        Recipe::Capacity => DeskRecipe::capacity_bound(5),
    };
    let name = match a.recipe {
        Recipe::Tiny => "tiny",
        Recipe::Small => "small",
        Recipe::Capacity => "capacity",
    };
    let suite = moswacp::bench::desk_suite(name, &recipe, a.count, a.seed).map_err(|e| Failure::input("input", e))?;
    suite.save(&a.out_dir).map_err(|e| Failure::input("io", e))?;
    out(&format!("wrote {} instances to {}\n", suite.instances.len(), a.out_dir.display()));
    Ok(())
}

fn cmd_export_lp(a: ExportLpArgs) -> Result<(), Failure> {
    let semantics = match a.semantics {
        SemanticsArg::Literal => Semantics::Literal,
        SemanticsArg::TimeIndexed => Semantics::TimeIndexed,
    };
    let cfg = MilpExportConfig { alpha: a.alpha, big_m: a.big_m, semantics };
    if !cfg.is_valid() {
        return Err(Failure::usage("alpha must lie in [0.5, 1) and big-M must be positive"));
    }
    let inst = load_instance(&a.instance)?;
    let lp = export_lp(&inst, &cfg);
    match &a.out {
        Some(out) => write(out, &lp)?,
        None => out(&lp),
    }
    Ok(())
}

fn cmd_bench(a: BenchArgs) -> Result<(), Failure> {
    let dataset = Dataset::load(&a.dataset).map_err(|e| Failure::input("input", e))?;
    let budget = a.budget.budget();
    let cfg = BenchConfig { seeds: a.seeds, budget, jobs: a.jobs, solver: SolverConfig::new(Algorithm::default(), 0, budget), ..Default::default() };
    let report = run_bench(&dataset, &a.algos, &cfg);
    report.write(&a.out_dir).with_context(|| format!("writing to {}", a.out_dir.display()))?;
    out(&report.summary_csv());
    Ok(())
}

fn cmd_sweep(a: SweepArgs) -> Result<(), Failure> {
    let dataset = Dataset::load(&a.instance_dir).map_err(|e| Failure::input("input", e))?;
    let spec = SweepSpec { q_values: a.q, dataset, algorithm: a.algo, seeds: a.seeds, budget: a.budget.budget(), jobs: 1 };
    let report = sweep_q(&spec).map_err(Failure::usage)?;
    write(&a.out_dir.join("sweep.csv"), &report.to_csv())?;
    write(&a.out_dir.join("sweep.svg"), &report.to_svg())?;
    out(&report.to_csv());
    Ok(())
}

fn cmd_case_study(a: CaseStudyArgs) -> Result<(), Failure> {
    let params = ErsaParams { seed: a.seed, budget: Budget::evaluations(a.budget_iters), ..Default::default() };
    let report = run_case_study_with(&params)?;
    if a.json {
        out(&format!("{}\n", serde_json::to_string_pretty(&report).context("serializing report")?));
    } else {
        out(&report.to_text());
    }
    Ok(())
}

fn report_failure(f: &Failure, json: bool) {
    if json {
        let mut v = json!({ "error": f.kind, "code": f.code, "message": f.message });
        if let Some(d) = &f.details {
            v["details"] = d.clone();
        }
        eprintln!("{v}");
    } else {
        eprintln!("error: {}", f.message);
    }
}

fn main() -> ExitCode {
    let json_errors = std::env::args().any(|a| a == "--json-errors");
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) if json_errors => {
            report_failure(&Failure::usage(e.to_string().trim()), true);
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    if let Err(e) = logging::init(cli.op_trace.as_deref()) {
        report_failure(&Failure::input("io", format!("opening operator trace: {e}")), cli.json_errors);
        return ExitCode::from(1);
    }
    let outcome = match cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Validate(a) => cmd_validate(a),
        Command::Gen(a) => cmd_gen(a),
        Command::ExportLp(a) => cmd_export_lp(a),
        Command::Bench(a) => cmd_bench(a),
        Command::SweepQ(a) => cmd_sweep(a),
        Command::CaseStudy(a) => cmd_case_study(a),
    };
    logging::flush();
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            report_failure(&f, cli.json_errors);
            ExitCode::from(f.code)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges_accept_both_spellings() {
        assert_eq!(parse_range("1..13"), Ok((1, 13)));
        assert_eq!(parse_range("2..=5"), Ok((2, 5)));
        assert!(parse_range("5..2").is_err());
        assert!(parse_range("7").is_err());
    }

    #[test]
    fn budget_flags_combine() {
        let b = BudgetArgs { budget_s: None, budget_iters: Some(10) }.budget();
        assert!(b.is_deterministic());
        let b = BudgetArgs { budget_s: Some(1.0), budget_iters: None }.budget();
        assert_eq!(b.time_limit_s, Some(1.0));
    }

    #[test]
    fn command_line_is_well_formed() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
