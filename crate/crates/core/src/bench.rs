//! Benchmark harness: reference solves, the method-by-factor matrix, and the
//! summary tables and curves built from its rows.
//!
//! For every instance an exact DDD run at the generated horizon gives `T*`.
//! Each method then runs with horizon `ceil(f * T*)` for every factor `f`.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::ddd::{solve_ddd, solve_two_phase, DddOptions, DddResult, DddStatus, RunRecord};
use crate::error::{Error, Result};
use crate::gen::{ceil_frac, generate, Family, GenParams};
use crate::instance::{Instance, Time};
use crate::models::{backend_by_name, build_full, SolveStatus, SolverParams, DEFAULT_BACKEND};
use crate::verify::check_schedule;

pub const CSV_HEADER: &str =
    "instance,method,ub_factor,status,wall_s,makespan,iters,ns_ratio,short_viol,thr_viol,sto_viol,nodes_short,nodes_thr,nodes_sto";

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    FullIp,
    Ddd,
    TwoPhase,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::FullIp => "full_ip",
            Method::Ddd => "ddd",
            Method::TwoPhase => "two_phase",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.replace('-', "_").as_str() {
            "full_ip" => Ok(Method::FullIp),
            "ddd" => Ok(Method::Ddd),
            "two_phase" => Ok(Method::TwoPhase),
            other => Err(Error::Config(format!("unknown method {other}"))),
        }
    }
}

/// Cartesian product of generator settings. Empty lists keep the value of
/// `base`; `capacity_fracs` sets both upper capacity bounds to `ceil(f * k)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenMatrix {
    pub base: GenParams,
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub n: Vec<usize>,
    #[serde(default)]
    pub m: Vec<usize>,
    #[serde(default)]
    pub k: Vec<usize>,
    #[serde(default)]
    pub capacity_fracs: Vec<f64>,
}

impl GenMatrix {
    /// `(id, params)` for every cell and seed.
    pub fn expand(&self) -> Vec<(String, GenParams)> {
        fn or<T: Clone>(list: &[T], base: T) -> Vec<T> {
            if list.is_empty() {
                vec![base]
            } else {
                list.to_vec()
            }
        }
        let (n0, m0, k0) = match &self.base.family {
            Family::Geographic(p) => (p.n, p.m, p.k),
            Family::Geometric(p) => (p.n, 0, p.k),
            Family::Tiny(p) => (p.n, 0, p.k),
            Family::AppendixA => (4, 4, 50),
        };
        let fracs: Vec<Option<f64>> =
            if self.capacity_fracs.is_empty() { vec![None] } else { self.capacity_fracs.iter().map(|&f| Some(f)).collect() };
        let mut out = Vec::new();
        for &n in &or(&self.n, n0) {
            for &m in &or(&self.m, m0) {
                for &k in &or(&self.k, k0) {
                    for &frac in &fracs {
                        for &seed in &or(&self.seeds, self.base.seed) {
                            let mut p = self.base.clone();
                            p.seed = seed;
                            let family = match &mut p.family {
                                Family::Geographic(g) => {
                                    (g.n, g.m, g.k) = (n, m, k);
                                    if let Some(f) = frac {
                                        g.throughput.1 = ceil_frac(k, f).max(g.throughput.0);
                                        g.storage.1 = ceil_frac(k, f).max(g.storage.0);
                                    }
                                    format!("geographic_n{n}_m{m}_k{k}")
                                }
                                Family::Geometric(g) => {
                                    (g.n, g.k) = (n, k);
                                    if let Some(f) = frac {
                                        g.throughput.1 = ceil_frac(k, f).max(g.throughput.0);
                                        g.storage.1 = ceil_frac(k, f).max(g.storage.0);
                                    }
                                    format!("geometric_n{n}_k{k}")
                                }
                                Family::Tiny(t) => {
                                    (t.n, t.k) = (n, k);
                                    format!("tiny_n{n}_k{k}")
                                }
                                Family::AppendixA => "appendix_a".to_string(),
                            };
                            let cap = frac.map(|f| format!("_c{f}")).unwrap_or_default();
                            out.push((format!("{family}{cap}_s{seed}"), p));
                        }
                    }
                }
            }
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BenchConfig {
    /// Instance files.
    pub instances: Vec<PathBuf>,
    pub generator: Option<GenMatrix>,
    pub methods: Vec<Method>,
    pub ub_factors: Vec<f64>,
    /// Per run, and for the reference solve.
    pub time_limit_s: f64,
    pub rel_gap: f64,
    pub alpha: f64,
    pub workers: usize,
    pub backend: Option<String>,
    pub output_dir: Option<PathBuf>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            instances: Vec::new(),
            generator: None,
            methods: vec![Method::FullIp, Method::Ddd, Method::TwoPhase],
            ub_factors: vec![1.0, 1.5, 2.0],
            time_limit_s: 300.0,
            rel_gap: 0.01,
            alpha: 0.01,
            workers: 1,
            backend: None,
            output_dir: None,
        }
    }
}

impl BenchConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&fs::read_to_string(path)?)
    }

    pub fn check(&self) -> Result<()> {
        if self.methods.is_empty() || self.ub_factors.is_empty() {
            return Err(Error::Config("need at least one method and one ub factor".into()));
        }
        if self.ub_factors.iter().any(|&f| !(f >= 1.0 && f.is_finite())) {
            return Err(Error::Config("ub factors must be finite and at least 1".into()));
        }
        if self.instances.is_empty() && self.generator.is_none() {
            return Err(Error::Config("no instance files and no generator matrix".into()));
        }
        backend_by_name(self.backend_name()).map(|_| ())
    }

    fn backend_name(&self) -> &str {
        self.backend.as_deref().unwrap_or(DEFAULT_BACKEND)
    }
}

/// One CSV line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub instance: String,
    pub method: Method,
    pub ub_factor: f64,
    /// `solved`, `time_limit` (a run stopped by the limit), `no_reference` or `error`.
    pub status: String,
    pub wall_s: f64,
    pub makespan: Option<Time>,
    pub iters: usize,
    pub ns_ratio: f64,
    pub short_viol: usize,
    pub thr_viol: usize,
    pub sto_viol: usize,
    pub nodes_short: usize,
    pub nodes_thr: usize,
    pub nodes_sto: usize,
}

impl ResultRow {
    fn blank(instance: &str, method: Method, ub_factor: f64, status: &str) -> Self {
        Self {
            instance: instance.to_string(),
            method,
            ub_factor,
            status: status.to_string(),
            wall_s: 0.0,
            makespan: None,
            iters: 0,
            ns_ratio: 0.0,
            short_viol: 0,
            thr_viol: 0,
            sto_viol: 0,
            nodes_short: 0,
            nodes_thr: 0,
            nodes_sto: 0,
        }
    }

    pub fn solved(&self) -> bool {
        self.status == "solved"
    }
}

/// A run record tagged with the run it belongs to, one JSON line each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaggedRecord {
    pub instance: String,
    pub method: Method,
    pub ub_factor: f64,
    #[serde(flatten)]
    pub record: RunRecord,
}

#[derive(Debug, Clone, Default)]
pub struct BenchOutput {
    pub rows: Vec<ResultRow>,
    pub records: Vec<TaggedRecord>,
    /// `T*` per instance id, when the reference solve converged.
    pub optimum: BTreeMap<String, Time>,
}

fn horizon_for(t_star: Time, factor: f64) -> Time {
    ((t_star as f64 * factor - 1e-9).ceil() as Time).max(t_star)
}

/// Runs one method on one instance.
pub fn run_method(
    inst: &Instance,
    method: Method,
    opts: &DddOptions,
    backend: &mut dyn crate::models::SolverBackend,
) -> Result<(ResultRow, Vec<RunRecord>)> {
    let start = Instant::now();
    let mut row = ResultRow::blank("", method, 1.0, "solved");
    let records = match method {
        Method::FullIp => {
            let model = build_full(inst);
            let params = SolverParams { rel_gap: opts.solver.rel_gap, ..opts.solver.clone() }.with_time_limit(opts.time_limit_s);
            let res = backend.solve(&model, &params)?;
            row.iters = 1;
            row.ns_ratio = 1.0;
            match res.status {
                SolveStatus::Optimal => {}
                SolveStatus::Infeasible => return Err(Error::Infeasible(inst.horizon)),
                _ => row.status = "time_limit".into(),
            }
            if res.has_solution() {
                let sched = crate::ddd::Solution::new(&model, &res.values).schedule(inst)?;
                let report = check_schedule(inst, &sched)?;
                if !report.is_ok() {
                    return Err(Error::Solver(format!("full model incumbent fails verification: {}", report.violations[0])));
                }
                row.makespan = Some(report.makespan);
            }
            Vec::new()
        }
        Method::Ddd | Method::TwoPhase => {
            let res: DddResult = if method == Method::Ddd {
                solve_ddd(inst, backend, opts)?
            } else {
                solve_two_phase(inst, backend, opts)?
            };
            if res.status != DddStatus::Converged {
                row.status = "time_limit".into();
            }
            row.makespan = res.schedule.as_ref().map(|_| res.ub);
            row.iters = res.iterations();
            row.ns_ratio = res.ns_ratio();
            for r in &res.records {
                row.short_viol += r.violations.short;
                row.thr_viol += r.violations.throughput;
                row.sto_viol += r.violations.storage;
                row.nodes_short += r.violations.nodes_short;
                row.nodes_thr += r.violations.nodes_throughput;
                row.nodes_sto += r.violations.nodes_storage;
            }
            res.records
        }
    };
    row.wall_s = start.elapsed().as_secs_f64();
    Ok((row, records))
}

struct Job {
    id: String,
    instance: Result<Instance>,
}

fn jobs(cfg: &BenchConfig) -> Vec<Job> {
    let mut out = Vec::new();
    for path in &cfg.instances {
        let id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
        out.push(Job { id, instance: Instance::read_json(path) });
    }
    if let Some(g) = &cfg.generator {
        for (id, p) in g.expand() {
            out.push(Job { id, instance: generate(&p) });
        }
    }
    out
}

type JobOutput = (Vec<ResultRow>, Vec<TaggedRecord>, Option<Time>);

fn run_job(cfg: &BenchConfig, job: &Job, sink: &Mutex<Option<BufWriter<File>>>) -> Result<JobOutput> {
    let mut backend = backend_by_name(cfg.backend_name())?;
    let mut rows = Vec::new();
    let mut tagged = Vec::new();
    let inst = match &job.instance {
        Ok(i) => i,
        Err(e) => {
            log::warn!("{}: {e}", job.id);
            for &f in &cfg.ub_factors {
                for &m in &cfg.methods {
                    rows.push(ResultRow::blank(&job.id, m, f, "error"));
                }
            }
            return Ok((rows, tagged, None));
        }
    };
    let reference = DddOptions {
        alpha: 0.0,
        solver: SolverParams::exact(),
        time_limit_s: Some(cfg.time_limit_s),
        ..DddOptions::default()
    };
    let t_star = match solve_ddd(inst, backend.as_mut(), &reference) {
        Ok(r) if r.status == DddStatus::Converged => Some(r.ub),
        Ok(_) => None,
        Err(e) => {
            log::warn!("{}: reference solve failed: {e}", job.id);
            None
        }
    };
    let Some(t_star) = t_star else {
        for &f in &cfg.ub_factors {
            for &m in &cfg.methods {
                rows.push(ResultRow::blank(&job.id, m, f, "no_reference"));
            }
        }
        return Ok((rows, tagged, None));
    };
    let opts = DddOptions {
        alpha: cfg.alpha,
        solver: SolverParams { rel_gap: cfg.rel_gap, ..SolverParams::default() },
        time_limit_s: Some(cfg.time_limit_s),
        ..DddOptions::default()
    };
    for &f in &cfg.ub_factors {
        let sized = inst.with_horizon(horizon_for(t_star, f));
        for &m in &cfg.methods {
            let (mut row, records) = match run_method(&sized, m, &opts, backend.as_mut()) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("{} {} x{f}: {e}", job.id, m.name());
                    (ResultRow::blank(&job.id, m, f, "error"), Vec::new())
                }
            };
            row.instance = job.id.clone();
            row.ub_factor = f;
            log::info!("{} {} x{f}: {} in {:.2}s", job.id, m.name(), row.status, row.wall_s);
            let batch: Vec<TaggedRecord> = records
                .into_iter()
                .map(|record| TaggedRecord { instance: job.id.clone(), method: m, ub_factor: f, record })
                .collect();
            if let Some(w) = sink.lock().expect("record sink").as_mut() {
                for t in &batch {
                    writeln!(w, "{}", serde_json::to_string(t)?)?;
                }
                w.flush()?;
            }
            tagged.extend(batch);
            rows.push(row);
        }
    }
    Ok((rows, tagged, Some(t_star)))
}

/// Runs the whole matrix on `cfg.workers` threads. With an output directory,
/// writes `results.csv` and streams run records to `records.jsonl`.
pub fn run_bench(cfg: &BenchConfig) -> Result<BenchOutput> {
    cfg.check()?;
    let jobs = jobs(cfg);
    let sink = match &cfg.output_dir {
        Some(dir) => {
            fs::create_dir_all(dir)?;
            Some(BufWriter::new(File::create(dir.join("records.jsonl"))?))
        }
        None => None,
    };
    let sink = Mutex::new(sink);
    let next = AtomicUsize::new(0);
    let done: Mutex<Vec<(usize, Result<JobOutput>)>> = Mutex::new(Vec::new());
    std::thread::scope(|s| {
        for _ in 0..cfg.workers.max(1).min(jobs.len().max(1)) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(job) = jobs.get(i) else { break };
                let r = run_job(cfg, job, &sink);
                done.lock().expect("results").push((i, r));
            });
        }
    });
    let mut done = done.into_inner().expect("results");
    done.sort_by_key(|(i, _)| *i);
    let mut out = BenchOutput::default();
    for (i, r) in done {
        let (rows, records, t_star) = r?;
        if let Some(t) = t_star {
            out.optimum.insert(jobs[i].id.clone(), t);
        }
        out.rows.extend(rows);
        out.records.extend(records);
    }
    if let Some(dir) = &cfg.output_dir {
        write_rows(&out.rows, dir.join("results.csv"))?;
    }
    Ok(out)
}

pub fn write_rows(rows: &[ResultRow], path: impl AsRef<Path>) -> Result<()> {
    write_rows_to(rows, File::create(path)?)
}

pub fn write_rows_to(rows: &[ResultRow], out: impl std::io::Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_rows(path: impl AsRef<Path>) -> Result<Vec<ResultRow>> {
    let mut r = csv::Reader::from_path(path)?;
    r.deserialize().map(|x| x.map_err(Error::from)).collect()
}

pub fn read_records(path: impl AsRef<Path>) -> Result<Vec<TaggedRecord>> {
    fs::read_to_string(path)?
        .lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| serde_json::from_str(l).map_err(Error::from))
        .collect()
}

/// Instance id without the trailing `_s<seed>`.
pub fn cell_of(instance: &str) -> &str {
    match instance.rfind("_s") {
        Some(i) if instance[i + 2..].chars().all(|c| c.is_ascii_digit()) && i + 2 < instance.len() => &instance[..i],
        _ => instance,
    }
}

/// Mean runtime per (cell, factor, method) and the mean over instances of
/// each run's runtime divided by the `full_ip` runtime on the same instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RuntimeLine {
    pub cell: String,
    pub ub_factor: f64,
    pub method: Method,
    pub runs: usize,
    pub mean_wall_s: f64,
    /// `None` without `full_ip` rows to compare against.
    pub mean_ratio: Option<f64>,
    /// Some run in the group hit the time limit.
    pub limit_hit: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvePoint {
    pub method: Method,
    pub ub_factor: f64,
    pub time_s: f64,
    pub solved: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ViolationLine {
    pub method: Method,
    pub iteration: usize,
    pub runs: usize,
    pub short: usize,
    pub throughput: usize,
    pub storage: usize,
    pub prop_short: f64,
    pub prop_throughput: f64,
    pub prop_storage: f64,
    pub nodes_short: usize,
    pub nodes_throughput: usize,
    pub nodes_storage: usize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub runtime: Vec<RuntimeLine>,
    pub curves: Vec<CurvePoint>,
    pub violations: Vec<ViolationLine>,
}

fn key(f: f64) -> i64 {
    (f * 1000.0).round() as i64
}

pub fn report(rows: &[ResultRow], records: &[TaggedRecord]) -> Report {
    let mut full: BTreeMap<(&str, i64), f64> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.method == Method::FullIp && r.status != "error" && r.status != "no_reference") {
        full.insert((r.instance.as_str(), key(r.ub_factor)), r.wall_s);
    }
    let mut groups: BTreeMap<(&str, i64, Method), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.status == "solved" || r.status == "time_limit") {
        groups.entry((cell_of(&r.instance), key(r.ub_factor), r.method)).or_default().push(r);
    }
    let runtime = groups
        .into_iter()
        .map(|((cell, f, method), rs)| {
            let ratios: Vec<f64> = rs
                .iter()
                .filter_map(|r| full.get(&(r.instance.as_str(), f)).filter(|&&w| w > 0.0).map(|w| r.wall_s / w))
                .collect();
            RuntimeLine {
                cell: cell.to_string(),
                ub_factor: f as f64 / 1000.0,
                method,
                runs: rs.len(),
                mean_wall_s: rs.iter().map(|r| r.wall_s).sum::<f64>() / rs.len() as f64,
                mean_ratio: (!ratios.is_empty()).then(|| ratios.iter().sum::<f64>() / ratios.len() as f64),
                limit_hit: rs.iter().any(|r| r.status == "time_limit"),
            }
        })
        .collect();

    let mut solved: BTreeMap<(Method, i64), Vec<f64>> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.solved()) {
        solved.entry((r.method, key(r.ub_factor))).or_default().push(r.wall_s);
    }
    let mut curves = Vec::new();
    for ((method, f), mut times) in solved {
        times.sort_by(f64::total_cmp);
        for (i, t) in times.into_iter().enumerate() {
            curves.push(CurvePoint { method, ub_factor: f as f64 / 1000.0, time_s: t, solved: i + 1 });
        }
    }

    let mut by_iter: BTreeMap<(Method, usize), ViolationLine> = BTreeMap::new();
    for t in records {
        let r = &t.record;
        let line = by_iter.entry((t.method, r.iteration)).or_insert_with(|| ViolationLine {
            method: t.method,
            iteration: r.iteration,
            runs: 0,
            short: 0,
            throughput: 0,
            storage: 0,
            prop_short: 0.0,
            prop_throughput: 0.0,
            prop_storage: 0.0,
            nodes_short: 0,
            nodes_throughput: 0,
            nodes_storage: 0,
        });
        line.runs += 1;
        line.short += r.violations.short;
        line.throughput += r.violations.throughput;
        line.storage += r.violations.storage;
        line.nodes_short += r.violations.nodes_short;
        line.nodes_throughput += r.violations.nodes_throughput;
        line.nodes_storage += r.violations.nodes_storage;
    }
    let violations = by_iter
        .into_values()
        .map(|mut l| {
            let total = (l.short + l.throughput + l.storage) as f64;
            if total > 0.0 {
                l.prop_short = l.short as f64 / total;
                l.prop_throughput = l.throughput as f64 / total;
                l.prop_storage = l.storage as f64 / total;
            }
            l
        })
        .collect();
    Report { runtime, curves, violations }
}

fn write_csv<T: Serialize>(items: &[T], path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for i in items {
        w.serialize(i)?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `runtime.csv`, `cumulative.csv` and `violations.csv` into `dir`.
pub fn write_report(rep: &Report, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir)?;
    let paths = [dir.join("runtime.csv"), dir.join("cumulative.csv"), dir.join("violations.csv")];
    write_csv(&rep.runtime, &paths[0])?;
    write_csv(&rep.curves, &paths[1])?;
    write_csv(&rep.violations, &paths[2])?;
    Ok(paths.to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(instance: &str, method: Method, wall_s: f64) -> ResultRow {
        ResultRow { wall_s, ..ResultRow::blank(instance, method, 1.0, "solved") }
    }

    #[test]
    fn header_matches_row_fields() {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.serialize(row("a", Method::Ddd, 1.0)).unwrap();
        let text = String::from_utf8(w.into_inner().unwrap()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert!(text.lines().nth(1).unwrap().starts_with("a,ddd,1.0,solved,1.0,,0,"));
    }

    #[test]
    fn equal_times_give_unit_ratios() {
        let rows = vec![row("x_s1", Method::FullIp, 2.0), row("x_s1", Method::Ddd, 2.0)];
        let rep = report(&rows, &[]);
        assert!(rep.runtime.iter().all(|l| l.mean_ratio == Some(1.0)));
    }

    #[test]
    fn mean_of_ratios() {
        // Ratios 0.1 and 2.0 average to 1.05; the ratio of means is 11/11 = 1.
        let rows = vec![
            row("c_s1", Method::FullIp, 10.0),
            row("c_s1", Method::Ddd, 1.0),
            row("c_s2", Method::FullIp, 1.0),
            row("c_s2", Method::Ddd, 2.0),
        ];
        let rep = report(&rows, &[]);
        let ddd = rep.runtime.iter().find(|l| l.method == Method::Ddd).unwrap();
        assert_eq!(ddd.cell, "c");
        assert!((ddd.mean_ratio.unwrap() - 1.05).abs() < 1e-12);
        assert!((ddd.mean_wall_s - 1.5).abs() < 1e-12);
    }

    #[test]
    fn cumulative_curve_counts() {
        let mut rows = vec![row("a_s1", Method::Ddd, 3.0), row("a_s2", Method::Ddd, 1.0)];
        rows.push(ResultRow { status: "time_limit".into(), ..row("a_s3", Method::Ddd, 9.0) });
        let rep = report(&rows, &[]);
        let pts: Vec<(f64, usize)> = rep.curves.iter().map(|p| (p.time_s, p.solved)).collect();
        assert_eq!(pts, vec![(1.0, 1), (3.0, 2)]);
        assert!(rep.runtime[0].limit_hit);
    }

    #[test]
    fn matrix_expansion() {
        let cfg = BenchConfig::from_toml(
            r#"
            methods = ["ddd", "full_ip"]
            ub_factors = [1.0]
            [generator]
            seeds = [1, 2]
            n = [3, 4, 5]
            k = [2, 4, 6]
            [generator.base]
            family = "tiny"
            "#,
        )
        .unwrap();
        let cells = cfg.generator.as_ref().unwrap().expand();
        assert_eq!(cells.len(), 18);
        assert_eq!(cells[0].0, "tiny_n3_k2_s1");
        assert_eq!(cell_of(&cells[0].0), "tiny_n3_k2");
        assert_eq!(cfg.methods, vec![Method::Ddd, Method::FullIp]);
    }

    #[test]
    fn capacity_fracs_apply() {
        let g = GenMatrix {
            base: GenParams { seed: 0, family: Family::Geographic(Default::default()) },
            seeds: vec![],
            n: vec![],
            m: vec![30],
            k: vec![60],
            capacity_fracs: vec![0.025],
        };
        let (id, p) = &g.expand()[0];
        assert_eq!(id, "geographic_n20_m30_k60_c0.025_s0");
        match &p.family {
            Family::Geographic(g) => assert_eq!((g.throughput, g.storage), ((1, 2), (0, 2))),
            _ => unreachable!(),
        }
    }
}
