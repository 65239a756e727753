//! Command-line entry points: solve an instance, evaluate a plan, run
//! sweeps, exchange LP/solution files with external solvers, and emit the
//! built-in example instance.
//!
//! Exit codes: 0 ok, 1 usage/parse, 2 validation, 3 solver, 4 i/o.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::effectiveness::build_report;
use crate::error::Error;
use crate::instance::{appendix_example, load_instance, save_instance, Instance};
use crate::model::{build, MilpModel, Plan, Variant};
use crate::reporting::{levels_table, plan_table, write_reports, ReportBundle};
use crate::scenario::{load_sweep_spec, run_sweep, summarize};
use crate::solver::{
    import_external_solution, solve_milp, verify_lp_round_trip, write_solution_file, BranchRule,
    MilpResult, MilpStatus, SolverConfig,
};

#[derive(Parser)]
#[command(
    name = "captrans",
    version,
    about = "Strategic capacity planning under rising carbon taxes"
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance file and write plan + report tables.
    Solve(SolveArgs),
    /// Compute effectiveness reports from an instance and a plan file.
    Evaluate(EvaluateArgs),
    /// Run a seeded scenario sweep from a sweep spec file.
    Sweep(SweepArgs),
    /// Export an instance's model in LP format.
    #[command(name = "export-lp")]
    ExportLp(ExportArgs),
    /// Import an externally solved solution file and verify + report it.
    #[command(name = "import-sol")]
    ImportSol(ImportArgs),
    /// Write the built-in example instance to disk.
    Example(ExampleArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Spt,
    Spwt,
}

impl From<VariantArg> for Variant {
    fn from(v: VariantArg) -> Variant {
        match v {
            VariantArg::Spt => Variant::Spt,
            VariantArg::Spwt => Variant::Spwt,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum BranchArg {
    MostFractional,
    PseudoCost,
}

#[derive(Args)]
struct SolverFlags {
    /// Relative optimality gap target.
    #[arg(long, default_value_t = 1e-4)]
    gap: f64,
    /// Time limit in seconds.
    #[arg(long, default_value_t = 36_000.0)]
    time_limit: f64,
    /// Node limit for the search tree.
    #[arg(long)]
    node_limit: Option<u64>,
    /// Branching rule.
    #[arg(long, value_enum, default_value_t = BranchArg::MostFractional)]
    branching: BranchArg,
    /// Seed recorded in outputs and driving any randomized component.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl SolverFlags {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            gap: self.gap,
            time_limit: self.time_limit,
            branching: match self.branching {
                BranchArg::MostFractional => BranchRule::MostFractional,
                BranchArg::PseudoCost => BranchRule::PseudoCost,
            },
            node_limit: self.node_limit,
            seed: self.seed,
        }
    }
}

#[derive(Args)]
struct SolveArgs {
    /// Instance file (TOML).
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Spt)]
    variant: VariantArg,
    /// Transition thresholds evaluated in the report.
    #[arg(long = "beta")]
    betas: Vec<f64>,
    /// Output directory for plan and report files.
    #[arg(long, default_value = "captrans-out")]
    out: PathBuf,
    #[command(flatten)]
    solver: SolverFlags,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Instance file the plan belongs to.
    instance: PathBuf,
    /// Plan (solution) file to evaluate.
    #[arg(long)]
    plan: PathBuf,
    /// Variant the plan was solved under.
    #[arg(long, value_enum, default_value_t = VariantArg::Spt)]
    variant: VariantArg,
    /// Untaxed-variant plan for the emission comparison.
    #[arg(long)]
    baseline_plan: Option<PathBuf>,
    #[arg(long = "beta")]
    betas: Vec<f64>,
    #[arg(long, default_value = "captrans-out")]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Sweep spec file (TOML with a [sweep] section).
    spec: PathBuf,
    /// Overrides the seed from the spec file.
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads (0 = all cores); falls back to CAPTRANS_JOBS.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value = "captrans-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExportArgs {
    instance: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Spt)]
    variant: VariantArg,
    /// Output LP file path.
    #[arg(long, default_value = "model.lp")]
    out: PathBuf,
}

#[derive(Args)]
struct ImportArgs {
    instance: PathBuf,
    /// Solution file with `name value` lines.
    #[arg(long)]
    solution: PathBuf,
    #[arg(long, value_enum, default_value_t = VariantArg::Spt)]
    variant: VariantArg,
    #[arg(long = "beta")]
    betas: Vec<f64>,
    #[arg(long, default_value = "captrans-out")]
    out: PathBuf,
}

#[derive(Args)]
struct ExampleArgs {
    /// Where to write the instance file.
    #[arg(long, default_value = "example.toml")]
    out: PathBuf,
}

/// Parses arguments and runs; returns the process exit code.
pub fn main_entry<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return code;
        }
    };
    match run(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn exit_code(error: &Error) -> i32 {
    match error {
        Error::Parse { .. } | Error::InvalidArgument(_) => 1,
        Error::Validation { .. } => 2,
        Error::Solver(_) | Error::SolutionRejected(_) | Error::Export(_) => 3,
        Error::Io { .. } => 4,
    }
}

fn default_betas(betas: &[f64]) -> Vec<f64> {
    if betas.is_empty() {
        vec![0.50, 0.75]
    } else {
        betas.to_vec()
    }
}

fn jobs_from(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("CAPTRANS_JOBS")
            .ok()
            .and_then(|v| v.parse().ok())
    })
    .unwrap_or(0)
}

fn run(command: Command) -> Result<(), Error> {
    match command {
        Command::Solve(args) => cmd_solve(args),
        Command::Evaluate(args) => cmd_evaluate(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::ExportLp(args) => cmd_export(args),
        Command::ImportSol(args) => cmd_import(args),
        Command::Example(args) => {
            let instance = appendix_example();
            save_instance(&instance, &args.out)?;
            println!("wrote {}", args.out.display());
            Ok(())
        }
    }
}

fn describe(result: &MilpResult) -> String {
    let status = match result.status {
        MilpStatus::Optimal => "optimal",
        MilpStatus::GapLimit => "gap-limit",
        MilpStatus::TimeLimit => "time-limit",
        MilpStatus::NodeLimit => "node-limit",
        MilpStatus::Infeasible => "infeasible",
        MilpStatus::Unbounded => "unbounded",
    };
    match (result.objective, result.gap) {
        (Some(obj), Some(gap)) => format!(
            "{status}: objective {obj:.6}, bound {:.6}, gap {gap:.2e}, {} nodes, {:.1}s",
            result.best_bound, result.nodes, result.wall_time
        ),
        _ => format!(
            "{status}: bound {:.6}, {} nodes, {:.1}s",
            result.best_bound, result.nodes, result.wall_time
        ),
    }
}

fn solve_to_plan(
    model: &MilpModel,
    config: &SolverConfig,
) -> Result<(Plan, MilpResult), Error> {
    let result = solve_milp(model, config)?;
    println!("{}", describe(&result));
    match &result.plan {
        Some(_) => {
            let plan = result.plan.clone().unwrap();
            Ok((plan, result))
        }
        None => Err(Error::Solver(format!(
            "no feasible plan found ({})",
            describe(&result)
        ))),
    }
}

/// Writes the per-plan report set and prints the effectiveness summary.
fn report_plan(
    plan: &Plan,
    baseline: Option<&Plan>,
    instance: &Instance,
    betas: &[f64],
    out: &PathBuf,
    seed: Option<u64>,
    config_description: String,
) -> Result<(), Error> {
    let report = build_report(plan, instance, betas, baseline)?;
    let mut bundle = ReportBundle {
        plan_rows: Some(plan_table(plan, instance)),
        levels: Some(levels_table(&report, instance)),
        seed,
        config_description,
        ..Default::default()
    };
    match &report.baseline_emissions {
        Some(untaxed) => {
            bundle.emissions_compare = Some(
                report
                    .emissions
                    .iter()
                    .zip(untaxed)
                    .enumerate()
                    .map(|(t, (&a, &b))| (t + 1, a, b))
                    .collect(),
            );
        }
        None => {
            bundle.emissions = Some(
                report
                    .emissions
                    .iter()
                    .enumerate()
                    .map(|(t, &e)| (t + 1, e))
                    .collect(),
            );
        }
    }
    let files = write_reports(&bundle, out)?;
    for (beta, period) in &report.transition_periods {
        match period {
            Some(t) => println!("transition threshold {beta}: reached in period {t}"),
            None => println!("transition threshold {beta}: never reached"),
        }
    }
    println!(
        "final weighted clean share: {:.6}",
        report.final_weighted_level
    );
    for file in files {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let instance = load_instance(&args.instance)?;
    let betas = default_betas(&args.betas);
    let config = args.solver.config();
    let model = build(&instance, args.variant.into());
    let (plan, result) = solve_to_plan(&model, &config)?;

    std::fs::create_dir_all(&args.out).map_err(|e| Error::io(&args.out, e))?;
    let sol_path = args.out.join("plan.sol");
    write_solution_file(&model, &plan.raw, plan.objective, &sol_path)?;
    println!("wrote {}", sol_path.display());

    report_plan(
        &plan,
        None,
        &instance,
        &betas,
        &args.out,
        Some(config.seed),
        format!(
            "solve variant={} gap={} time_limit={} seed={} status={:?} objective={:?}",
            model.variant, config.gap, config.time_limit, config.seed, result.status,
            result.objective
        ),
    )
}

fn cmd_evaluate(args: EvaluateArgs) -> Result<(), Error> {
    let instance = load_instance(&args.instance)?;
    let betas = default_betas(&args.betas);
    let model = build(&instance, args.variant.into());
    let plan = import_external_solution(&args.plan, &model)?;
    println!("plan objective: {:.6}", plan.objective);
    let baseline = match &args.baseline_plan {
        Some(path) => {
            let untaxed = build(&instance, Variant::Spwt);
            Some(import_external_solution(path, &untaxed)?)
        }
        None => None,
    };
    report_plan(
        &plan,
        baseline.as_ref(),
        &instance,
        &betas,
        &args.out,
        None,
        format!("evaluate variant={} plan={}", model.variant, args.plan.display()),
    )
}

fn cmd_sweep(args: SweepArgs) -> Result<(), Error> {
    let mut spec = load_sweep_spec(&args.spec)?;
    if let Some(seed) = args.seed {
        spec.seed = seed;
        spec.solver.seed = seed;
    }
    let jobs = jobs_from(args.jobs);
    let result = run_sweep(&spec, jobs)?;
    let summary = summarize(&result);
    let solved: usize = summary.cells.iter().map(|c| c.solved).sum();
    let attempted: usize = summary.cells.iter().map(|c| c.attempted).sum();
    println!("sweep: {solved}/{attempted} scenarios solved");
    let bundle = ReportBundle {
        sweep: Some(summary),
        scenarios: Some(result),
        seed: Some(spec.seed),
        config_description: format!(
            "sweep instances={} ep_ratios={:?} ci_ratios={:?} betas={:?} seed={} gap={} time_limit={}",
            spec.instance_count,
            spec.emission_ratios,
            spec.investment_ratios,
            spec.betas,
            spec.seed,
            spec.solver.gap,
            spec.solver.time_limit
        ),
        ..Default::default()
    };
    for file in write_reports(&bundle, &args.out)? {
        println!("wrote {}", file.display());
    }
    Ok(())
}

fn cmd_export(args: ExportArgs) -> Result<(), Error> {
    let instance = load_instance(&args.instance)?;
    let model = build(&instance, args.variant.into());
    verify_lp_round_trip(&model, &args.out)?;
    println!(
        "wrote {} ({} variables, {} rows; round-trip verified)",
        args.out.display(),
        model.num_variables(),
        model.num_rows()
    );
    Ok(())
}

fn cmd_import(args: ImportArgs) -> Result<(), Error> {
    let instance = load_instance(&args.instance)?;
    let betas = default_betas(&args.betas);
    let model = build(&instance, args.variant.into());
    let plan = import_external_solution(&args.solution, &model)?;
    println!("imported plan verified: objective {:.6}", plan.objective);
    report_plan(
        &plan,
        None,
        &instance,
        &betas,
        &args.out,
        None,
        format!(
            "import variant={} solution={}",
            model.variant,
            args.solution.display()
        ),
    )
}
