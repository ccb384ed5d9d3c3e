//! `upr`: generate, solve, verify and benchmark packet routing instances.

use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Deserialize;

use upr_core::bench::{self, BenchConfig, Method};
use upr_core::ddd::{solve_ddd, solve_two_phase, DddOptions, DddStatus, Solution};
use upr_core::gen::{generate, GenParams};
use upr_core::models::{backend_by_name, build_full, default_backend, SolveStatus, SolverBackend, BACKEND_ENV};
use upr_core::schedule::SolutionFile;
use upr_core::verify::check_schedule;
use upr_core::{Instance, Schedule, Time};

#[derive(Parser)]
#[command(name = "upr", version, about = "Makespan-minimal packet routing by dynamic discretization discovery")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate an instance from a TOML parameter file and/or key=value pairs.
    Gen {
        #[arg(long)]
        config: Option<PathBuf>,
        /// geographic, geometric, tiny or appendix_a.
        #[arg(long)]
        family: Option<String>,
        #[arg(long)]
        seed: Option<u64>,
        /// Generator parameter as key=value, with a TOML value.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        set: Vec<String>,
        #[arg(short, long)]
        out: PathBuf,
    },
    /// Solve an instance.
    Solve {
        instance: PathBuf,
        /// TOML file with method, alpha, time_limit_s, gap, ub and backend.
        #[arg(long)]
        config: Option<PathBuf>,
        /// full-ip, ddd or two-phase.
        #[arg(long)]
        method: Option<Method>,
        #[arg(long)]
        alpha: Option<f64>,
        /// Seconds.
        #[arg(long)]
        time_limit: Option<f64>,
        /// Relative gap for each model solve.
        #[arg(long)]
        gap: Option<f64>,
        /// Horizon to use instead of the instance's.
        #[arg(long)]
        ub: Option<Time>,
        #[arg(long, env = BACKEND_ENV)]
        backend: Option<String>,
        /// Solution file.
        #[arg(short, long)]
        out: Option<PathBuf>,
        /// Run log, one JSON record per iteration.
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Check a solution file against an instance; exits 1 on any violation.
    Verify { instance: PathBuf, solution: PathBuf },
    /// Run a benchmark matrix from a TOML config.
    Bench {
        config: PathBuf,
        #[arg(long)]
        out_dir: Option<PathBuf>,
        #[arg(long)]
        time_limit: Option<f64>,
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        methods: Option<Vec<Method>>,
        #[arg(long, env = BACKEND_ENV)]
        backend: Option<String>,
    },
    /// Summarize `results.csv` and `records.jsonl` into runtime, curve and
    /// violation tables.
    Report {
        dir: PathBuf,
        /// Defaults to `dir`.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
}

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
struct SolveConfig {
    method: Option<Method>,
    alpha: Option<f64>,
    time_limit_s: Option<f64>,
    gap: Option<f64>,
    ub: Option<Time>,
    backend: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Gen { config, family, seed, set, out } => {
            let params = gen_params(config.as_deref(), family, seed, &set)?;
            let inst = generate(&params)?;
            inst.write_json(&out)?;
            println!(
                "{}: {} nodes, {} arcs, {} packets, horizon {}",
                out.display(),
                inst.nodes.len(),
                inst.arcs.len(),
                inst.commodities.len(),
                inst.horizon
            );
        }
        Cmd::Solve { instance, config, method, alpha, time_limit, gap, ub, backend, out, log } => {
            let file = match &config {
                Some(p) => toml::from_str(&fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?)
                    .with_context(|| format!("parsing {}", p.display()))?,
                None => SolveConfig::default(),
            };
            let cfg = SolveConfig {
                method: method.or(file.method),
                alpha: alpha.or(file.alpha),
                time_limit_s: time_limit.or(file.time_limit_s),
                gap: gap.or(file.gap),
                ub: ub.or(file.ub),
                backend: backend.or(file.backend),
            };
            return solve(&instance, &cfg, out.as_deref(), log.as_deref());
        }
        Cmd::Verify { instance, solution } => {
            let inst = Instance::read_json(&instance)?;
            let file = SolutionFile::read_json(&solution)?;
            let sched = Schedule::from_file(&inst, &file)?;
            let report = check_schedule(&inst, &sched)?;
            if report.is_ok() {
                println!("ok: makespan {}", report.makespan);
                return Ok(ExitCode::SUCCESS);
            }
            for v in &report.violations {
                println!("{v}");
            }
            println!("{} violation(s)", report.violations.len());
            return Ok(ExitCode::from(1));
        }
        Cmd::Bench { config, out_dir, time_limit, workers, methods, backend } => {
            let mut cfg = BenchConfig::read(&config).with_context(|| format!("reading {}", config.display()))?;
            if out_dir.is_some() {
                cfg.output_dir = out_dir;
            }
            if let Some(t) = time_limit {
                cfg.time_limit_s = t;
            }
            if let Some(w) = workers {
                cfg.workers = w;
            }
            if let Some(m) = methods {
                cfg.methods = m;
            }
            if backend.is_some() {
                cfg.backend = backend;
            }
            let output = bench::run_bench(&cfg)?;
            let rep = bench::report(&output.rows, &output.records);
            if let Some(dir) = &cfg.output_dir {
                for p in bench::write_report(&rep, dir)? {
                    log::info!("wrote {}", p.display());
                }
                println!("{} rows in {}", output.rows.len(), dir.join("results.csv").display());
            } else {
                bench::write_rows_to(&output.rows, std::io::stdout().lock())?;
            }
        }
        Cmd::Report { dir, out_dir } => {
            let rows = bench::read_rows(dir.join("results.csv"))?;
            let records_path = dir.join("records.jsonl");
            let records = if records_path.exists() { bench::read_records(&records_path)? } else { Vec::new() };
            let rep = bench::report(&rows, &records);
            let out = out_dir.unwrap_or(dir);
            fs::create_dir_all(&out)?;
            for p in bench::write_report(&rep, &out)? {
                println!("{}", p.display());
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn gen_params(config: Option<&Path>, family: Option<String>, seed: Option<u64>, set: &[String]) -> Result<GenParams> {
    let mut table: toml::Table = match config {
        Some(p) => fs::read_to_string(p)?.parse().with_context(|| format!("parsing {}", p.display()))?,
        None => toml::Table::new(),
    };
    if let Some(f) = family {
        table.insert("family".into(), toml::Value::String(f));
    }
    if let Some(s) = seed {
        table.insert("seed".into(), toml::Value::Integer(i64::try_from(s)?));
    }
    for kv in set {
        let Some((k, v)) = kv.split_once('=') else { bail!("expected key=value, got {kv}") };
        let value: toml::Value = match format!("x = {v}").parse::<toml::Table>() {
            Ok(mut t) => t.remove("x").expect("parsed key"),
            Err(_) => toml::Value::String(v.to_string()),
        };
        table.insert(k.trim().to_string(), value);
    }
    if !table.contains_key("family") {
        bail!("no generator family given (use --family or a config file)");
    }
    Ok(table.try_into()?)
}

fn solve(path: &Path, cfg: &SolveConfig, out: Option<&Path>, log_path: Option<&Path>) -> Result<ExitCode> {
    let mut inst = Instance::read_json(path).with_context(|| format!("reading {}", path.display()))?;
    inst.ensure_valid()?;
    if let Some(t) = cfg.ub {
        inst = inst.with_horizon(t);
    }
    let mut backend: Box<dyn SolverBackend> = match &cfg.backend {
        Some(name) => backend_by_name(name)?,
        None => default_backend()?,
    };
    let mut opts = DddOptions::default();
    if let Some(a) = cfg.alpha {
        opts.alpha = a;
    }
    if let Some(g) = cfg.gap {
        opts.solver.rel_gap = g;
    }
    opts.time_limit_s = cfg.time_limit_s;
    let method = cfg.method.unwrap_or(Method::Ddd);

    let (sched, finished, summary) = match method {
        Method::FullIp => {
            let model = build_full(&inst);
            let params = opts.solver.clone().with_time_limit(opts.time_limit_s);
            let res = backend.solve(&model, &params)?;
            if res.status == SolveStatus::Infeasible {
                bail!("infeasible within horizon {}", inst.horizon);
            }
            let sched = if res.has_solution() { Some(Solution::new(&model, &res.values).schedule(&inst)?) } else { None };
            let bound = res.bound.map_or("-".to_string(), |b| format!("{b:.3}"));
            (sched, res.status == SolveStatus::Optimal, format!("full_ip {:?}, bound {bound}", res.status))
        }
        Method::Ddd | Method::TwoPhase => {
            let res =
                if method == Method::Ddd { solve_ddd(&inst, backend.as_mut(), &opts)? } else { solve_two_phase(&inst, backend.as_mut(), &opts)? };
            if let Some(p) = log_path {
                let mut w = BufWriter::new(File::create(p)?);
                for r in &res.records {
                    writeln!(w, "{}", serde_json::to_string(r)?)?;
                }
                w.flush()?;
            }
            let summary = format!(
                "{} {:?}, lb {} ub {}, {} iterations, |N_S|/|N_T| {:.3}",
                method.name(),
                res.status,
                res.lb,
                res.ub,
                res.iterations(),
                res.ns_ratio()
            );
            (res.schedule, res.status == DddStatus::Converged, summary)
        }
    };
    println!("{summary}");
    let Some(sched) = sched else {
        println!("no schedule found");
        return Ok(ExitCode::from(1));
    };
    let report = check_schedule(&inst, &sched)?;
    if !report.is_ok() {
        bail!("schedule fails verification: {}", report.violations[0]);
    }
    println!("makespan {}{}", report.makespan, if finished { "" } else { " (limit hit)" });
    if let Some(p) = out {
        sched.to_file(&inst).write_json(p)?;
    }
    Ok(ExitCode::SUCCESS)
}
