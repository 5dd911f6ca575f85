use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::info;
use typegen::execute::{solve, SolveConfig};
use typegen::pddl::{export_domain, export_problem, import_domain};
use typegen::plan::PlannerConfig;
use typegen::{ActionSchema, Demonstration, TypeHierarchy};
use typegen_bench::report::{self, Format};
use typegen_bench::subset;
use typegen_bench::tasks::{self, find_task, TaskSet};
use typegen_bench::{aggregate, builtin_scenarios, builtin_sets, evaluate, EvalConfig, Models, Variant};
use typegen_kitchen::{builtin_demos, demos, hierarchy, record_all};

#[derive(Parser)]
#[command(name = "typegen-bench", version, about = "Learn, imagine and plan in a simulated kitchen")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Record the scripted demonstrations.
    Demos {
        #[arg(long, default_value = "demos")]
        out: PathBuf,
        /// JSON file of demo scripts instead of the built-in ones.
        #[arg(long)]
        scripts: Option<PathBuf>,
    },
    /// Learn action schemas from demonstrations.
    Learn {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "generalized")]
        variant: Variant,
        #[arg(long, default_value = "model")]
        out: PathBuf,
    },
    /// Run task sets under one or more variants.
    Eval {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tasks: TaskArgs,
        /// Variants to compare; all four when omitted.
        #[arg(long, value_delimiter = ',')]
        variant: Vec<Variant>,
        /// Learned schemas (JSON or PDDL domain) to use instead of learning;
        /// needs a single variant.
        #[arg(long)]
        schemas: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Runs per task; planning time is their median.
        #[arg(long, default_value_t = 5)]
        repetitions: usize,
        /// Also print one line per task.
        #[arg(long)]
        details: bool,
        #[command(flatten)]
        output: Output,
    },
    /// Learn from every k-subset of the demonstrations and evaluate each.
    SubsetStudy {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tasks: TaskArgs,
        #[arg(long, default_value_t = 2)]
        k_min: usize,
        #[arg(long, default_value_t = 8)]
        k_max: usize,
        #[command(flatten)]
        solver: SolverArgs,
        #[command(flatten)]
        output: Output,
    },
    /// Write a PDDL domain and problem.
    ExportPddl {
        #[command(flatten)]
        source: Source,
        #[arg(long, default_value = "generalized")]
        variant: Variant,
        /// Schemas (JSON or PDDL domain) to use instead of learning.
        #[arg(long)]
        schemas: Option<PathBuf>,
        #[command(flatten)]
        tasks: TaskArgs,
        /// Task to export as the problem.
        #[arg(long, default_value = "cut_lettuce")]
        task: String,
        #[arg(long, default_value = "pddl")]
        out: PathBuf,
    },
    /// Solve one task and show the plan and execution trace.
    Solve {
        #[command(flatten)]
        source: Source,
        #[command(flatten)]
        tasks: TaskArgs,
        #[arg(long)]
        task: String,
        #[arg(long, default_value = "generalized+imagined")]
        variant: Variant,
        /// Schemas (JSON or PDDL domain) to use instead of learning.
        #[arg(long)]
        schemas: Option<PathBuf>,
        #[command(flatten)]
        solver: SolverArgs,
        /// Write the session trace as JSON.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Print the initial kitchen layout.
        #[arg(long)]
        show_layout: bool,
    },
}

#[derive(Args)]
struct Source {
    /// Directory of recorded demonstrations; recorded afresh when omitted.
    #[arg(long)]
    demos: Option<PathBuf>,
}

#[derive(Args)]
struct TaskArgs {
    /// JSON file of task sets instead of the built-in S1 to S6.
    #[arg(long)]
    task_file: Option<PathBuf>,
    /// Restrict to these set ids.
    #[arg(long, value_delimiter = ',')]
    sets: Vec<String>,
}

#[derive(Args)]
struct SolverArgs {
    #[arg(long, default_value_t = 1.0)]
    penalty_non_goal: f64,
    #[arg(long, default_value_t = 1.0)]
    penalty_no_landmark: f64,
    /// Node expansions per search call.
    #[arg(long, default_value_t = typegen::plan::DEFAULT_BUDGET)]
    budget: usize,
    #[arg(long, default_value_t = 10)]
    max_proposals: usize,
}

#[derive(Args)]
struct Output {
    /// Directory for text, JSON and CSV outputs.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format printed to stdout.
    #[arg(long, default_value = "text")]
    format: Format,
}

impl SolverArgs {
    fn config(&self) -> SolveConfig {
        SolveConfig {
            planner: PlannerConfig {
                penalty_non_goal_object: self.penalty_non_goal,
                penalty_no_new_landmark: self.penalty_no_landmark,
                budget: self.budget,
                ..PlannerConfig::default()
            },
            max_proposals: self.max_proposals,
            ..SolveConfig::default()
        }
    }
}

impl Source {
    fn load(&self) -> Result<Vec<Demonstration>> {
        let Some(dir) = &self.demos else {
            return Ok(record_all(&builtin_demos())?);
        };
        let mut files: Vec<PathBuf> = fs::read_dir(dir)
            .with_context(|| format!("reading {}", dir.display()))?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| p.extension().is_some_and(|x| x == "json"))
            .collect();
        files.sort();
        files
            .iter()
            .map(|p| {
                let text = fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                let d: Demonstration =
                    serde_json::from_str(&text).with_context(|| format!("malformed demonstration {}", p.display()))?;
                d.validate().with_context(|| format!("invalid demonstration {}", p.display()))?;
                Ok(d)
            })
            .collect()
    }
}

impl TaskArgs {
    fn load(&self) -> Result<Vec<TaskSet>> {
        let mut sets = match &self.task_file {
            Some(p) => tasks::parse_sets(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)?,
            None => builtin_sets(),
        };
        if !self.sets.is_empty() {
            sets.retain(|s| self.sets.contains(&s.id));
            if sets.is_empty() {
                bail!("no task set matches {:?}", self.sets);
            }
        }
        Ok(sets)
    }
}

impl Output {
    fn emit(&self, stem: &str, text: String, json: String, csv: String) -> Result<()> {
        print!(
            "{}",
            match self.format {
                Format::Text => &text,
                Format::Json => &json,
                Format::Csv => &csv,
            }
        );
        if let Some(dir) = &self.out {
            fs::create_dir_all(dir)?;
            for (ext, body) in [("txt", &text), ("json", &json), ("csv", &csv)] {
                write(&dir.join(format!("{stem}.{ext}")), body)?;
            }
        }
        Ok(())
    }
}

fn write(path: &Path, body: &str) -> Result<()> {
    fs::write(path, body).with_context(|| format!("writing {}", path.display()))?;
    info!("wrote {}", path.display());
    Ok(())
}

/// Schemas from a JSON file, or from a PDDL domain when the extension is
/// `.pddl`.
fn load_schemas(path: &Path) -> Result<Vec<ActionSchema>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if path.extension().is_some_and(|e| e == "pddl") {
        let (_, schemas) = import_domain(&text).with_context(|| format!("malformed domain {}", path.display()))?;
        return Ok(schemas);
    }
    serde_json::from_str(&text).with_context(|| format!("malformed schema file {}", path.display()))
}

fn schemas_for(
    source: &Source,
    schemas: &Option<PathBuf>,
    variant: Variant,
    h: &TypeHierarchy,
) -> Result<Vec<ActionSchema>> {
    match schemas {
        Some(p) => load_schemas(p),
        None => Ok(typegen::learn(&source.load()?, h, variant.generalize())?.schemas),
    }
}

fn main() -> Result<()> {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let h = hierarchy();
    match cli.command {
        Command::Demos { out, scripts } => {
            let scripts = match scripts {
                Some(p) => {
                    demos::parse_scripts(&fs::read_to_string(&p).with_context(|| format!("reading {}", p.display()))?)?
                }
                None => builtin_demos(),
            };
            let recorded = record_all(&scripts)?;
            fs::create_dir_all(&out)?;
            let mut rows = vec![];
            for (i, d) in recorded.iter().enumerate() {
                write(&out.join(format!("{:02}_{}.json", i + 1, d.task)), &report::json(d))?;
                rows.push(vec![d.task.clone(), String::new(), d.transitions.len().to_string()]);
            }
            let total: usize = recorded.iter().map(|d| d.transitions.len()).sum();
            rows.push(vec!["total".into(), String::new(), total.to_string()]);
            print!("{}", report::table(&["demonstration", "", "transitions"], &rows));
        }
        Command::Learn { source, variant, out } => {
            let model = typegen::learn(&source.load()?, &h, variant.generalize())?;
            fs::create_dir_all(&out)?;
            write(&out.join("schemas.json"), &report::json(&model.schemas))?;
            write(&out.join("domain.pddl"), &export_domain("kitchen", &model.schemas, &h))?;
            println!("{} schemas learned from {} observation clusters", model.schemas.len(), model.clusters.len());
        }
        Command::Eval { source, tasks, variant, schemas, solver, repetitions, details, output } => {
            let sets = tasks.load()?;
            let variants = if variant.is_empty() { Variant::ALL.to_vec() } else { variant };
            let mut models = Models::learn(&source.load()?, &h)?;
            if let Some(p) = &schemas {
                if variants.len() != 1 {
                    bail!("--schemas needs exactly one --variant");
                }
                let loaded = load_schemas(p)?;
                if variants[0].generalize() {
                    models.generalized.schemas = loaded;
                } else {
                    models.individual.schemas = loaded;
                }
            }
            let cfg = EvalConfig { solve: solver.config(), repetitions };
            let results = evaluate(&sets, &models, &variants, &cfg);
            let rows = aggregate(&results);
            if details {
                print!("{}", report::task_results(&results, Format::Text));
                println!();
            }
            if let Some(dir) = &output.out {
                fs::create_dir_all(dir)?;
                write(&dir.join("tasks.json"), &report::task_results(&results, Format::Json))?;
                write(&dir.join("tasks.csv"), &report::task_results(&results, Format::Csv))?;
            }
            output.emit(
                "results",
                report::result_rows(&rows, Format::Text),
                report::result_rows(&rows, Format::Json),
                report::result_rows(&rows, Format::Csv),
            )?;
        }
        Command::SubsetStudy { source, tasks, k_min, k_max, solver, output } => {
            let demos = source.load()?;
            let records = subset::study(&demos, &tasks.load()?, &h, k_min..=k_max, &solver.config())?;
            let summary = subset::summarize(&records);
            if let Some(dir) = &output.out {
                fs::create_dir_all(dir)?;
                write(&dir.join("combinations.json"), &report::json(&records))?;
            }
            output.emit(
                "subsets",
                report::subset_rows(&summary, Format::Text),
                report::subset_rows(&summary, Format::Json),
                report::subset_rows(&summary, Format::Csv),
            )?;
        }
        Command::ExportPddl { source, variant, schemas, tasks, task, out } => {
            let schemas = schemas_for(&source, &schemas, variant, &h)?;
            let sets = tasks.load()?;
            let scenarios = builtin_scenarios();
            let spec = find_task(&sets, &scenarios, &task).with_context(|| format!("no task named {task}"))?;
            let (t, _) = spec.instantiate(&h)?;
            fs::create_dir_all(&out)?;
            write(&out.join("domain.pddl"), &export_domain("kitchen", &schemas, &h))?;
            write(&out.join("problem.pddl"), &export_problem("kitchen", &t))?;
            println!("wrote {} and {}", out.join("domain.pddl").display(), out.join("problem.pddl").display());
        }
        Command::Solve { source, tasks, task, variant, schemas, solver, trace, show_layout } => {
            let schemas = schemas_for(&source, &schemas, variant, &h)?;
            let sets = tasks.load()?;
            let scenarios = builtin_scenarios();
            let spec = find_task(&sets, &scenarios, &task).with_context(|| format!("no task named {task}"))?;
            let (t, mut env) = spec.instantiate(&h)?;
            if show_layout {
                print!("{}", env.sim.dump(&env.sim.state));
                println!();
            }
            let cfg = SolveConfig { imagine: variant.imagine(), ..solver.config() };
            let r = solve(&t, &schemas, &h, &mut env, &cfg);
            for (i, a) in r.trace.attempts.iter().enumerate() {
                println!("proposal {} ({} steps):", i + 1, a.plan.steps.len());
                for (j, s) in a.plan.steps.iter().enumerate() {
                    let failed = a.outcome.mismatch.as_ref().is_some_and(|m| m.step == j);
                    println!("  {:>2}. {}{}", j + 1, s.description, if failed { "  <- mismatch" } else { "" });
                }
                if !a.excluded.is_empty() {
                    println!("  excluded: {}", a.excluded.join(", "));
                }
            }
            for s in &r.trace.imagined {
                println!("imagined {}", s.name);
            }
            if let Some(e) = &r.trace.planner_error {
                println!("planner: {e}");
            }
            println!("status {:?}, proposals {}, planning {:.2} ms", r.status, r.proposals, r.planning_ms);
            if let Some(p) = trace {
                write(&p, &report::json(&r.trace))?;
            }
        }
    }
    Ok(())
}
