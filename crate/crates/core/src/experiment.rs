//! Batch experiments: a TOML configuration declaring a grid, named weights
//! and fields, and an ordered task list; running it writes a CSV summary,
//! one JSON record per task and the fields produced by operator tasks.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::analysis::{
    apply_operator, check_a1_characterization, check_chains, check_duality, check_heat_apriori,
    check_kernel_equivalence, check_lag_monotonicity, check_measure_condition, check_pointwise_control,
    check_riesz_shells, check_selection, check_shifted_bound, check_welland, probe_self_improvement, welland_ladder,
    CheckReport, HeatStudy, OperatorKind,
};
use crate::constructions::{build_chain, verify_chain, ChainParams};
use crate::error::{Error, Result};
use crate::family::{Ladder, RectangleFamily};
use crate::fields::FieldSpec;
use crate::geometry::{Direction, Params, ParabolicRectangle, Point};
use crate::grid::{GridSpec, SampledField};
use crate::operators::KernelParams;
use crate::weights::{eval_weight, ta_constant, WeightSpec};

fn forward() -> Direction {
    Direction::Forward
}

/// Inequality checks runnable from a configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "check", rename_all = "kebab-case")]
pub enum CheckTask {
    PointwiseControl { field: String, gamma: f64, beta: f64, ladder: Ladder, tolerance: f64 },
    /// Ladder defaults to ratio `2^{1/4}` from half a cell to twice the window.
    Welland { field: String, gamma: f64, beta: f64, eps: f64, #[serde(default)] ladder: Option<Ladder> },
    Duality { u: String, v: String, r: f64, q: f64, gamma: f64, family: RectangleFamily, tolerance: f64 },
    A1Characterization { u: String, v: String, q: f64, gamma: f64, family: RectangleFamily },
    LagMonotonicity { u: String, v: String, r: f64, q: f64, gamma1: f64, gamma2: f64, family: RectangleFamily },
    ShiftedBound { field: String, gamma: f64, beta: f64, ladder: Ladder, slack: f64 },
    MeasureCondition { u: String, v: String, r: f64, delta: f64, c: f64, gamma: f64, family: RectangleFamily },
    RieszShells { field: String, gamma: f64, beta: f64, shells: usize },
    SelfImprovement { u: String, v: String, r: f64, q: f64, gamma: f64, family: RectangleFamily, deltas: Vec<f64> },
    KernelEquivalence { gamma: f64, beta: f64, samples: usize },
    Chains { gamma: f64, alpha: f64, tau: f64, samples: usize },
    Selection { gamma: f64, count: usize, extent: f64, cells: usize },
    HeatApriori(HeatStudy),
}

/// One unit of work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Task {
    ConstantEstimate {
        name: String,
        u: String,
        v: String,
        r: f64,
        q: f64,
        gamma: f64,
        #[serde(default = "forward")]
        direction: Direction,
        family: RectangleFamily,
    },
    OperatorEval {
        name: String,
        field: String,
        gamma: f64,
        beta: f64,
        operator: OperatorKind,
    },
    /// Builds and verifies one chain inside `R(0, 0, 1)`.
    Construction {
        name: String,
        gamma: f64,
        alpha: f64,
        tau: f64,
        indices: [u64; 4],
    },
    Check {
        name: String,
        #[serde(flatten)]
        check: CheckTask,
    },
}

impl Task {
    pub fn name(&self) -> &str {
        match self {
            Task::ConstantEstimate { name, .. }
            | Task::OperatorEval { name, .. }
            | Task::Construction { name, .. }
            | Task::Check { name, .. } => name,
        }
    }

    fn weight_refs(&self) -> Vec<(&'static str, &str)> {
        match self {
            Task::ConstantEstimate { u, v, .. } => vec![("u", u.as_str()), ("v", v.as_str())],
            Task::Check { check, .. } => match check {
                CheckTask::Duality { u, v, .. }
                | CheckTask::A1Characterization { u, v, .. }
                | CheckTask::LagMonotonicity { u, v, .. }
                | CheckTask::MeasureCondition { u, v, .. }
                | CheckTask::SelfImprovement { u, v, .. } => vec![("u", u.as_str()), ("v", v.as_str())],
                _ => vec![],
            },
            _ => vec![],
        }
    }

    fn field_ref(&self) -> Option<&str> {
        match self {
            Task::OperatorEval { field, .. } => Some(field),
            Task::Check { check, .. } => match check {
                CheckTask::PointwiseControl { field, .. }
                | CheckTask::Welland { field, .. }
                | CheckTask::ShiftedBound { field, .. }
                | CheckTask::RieszShells { field, .. } => Some(field),
                _ => None,
            },
            _ => None,
        }
    }
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Root of every random stream in the run.
    pub seed: u64,
    pub params: Params,
    pub grid: GridSpec,
    #[serde(default)]
    pub weights: BTreeMap<String, WeightSpec>,
    #[serde(default)]
    pub fields: BTreeMap<String, FieldSpec>,
    #[serde(default)]
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub output: Option<PathBuf>,
}

fn config_error(path: impl Into<String>, msg: impl Into<String>) -> Error {
    Error::Config { path: path.into(), msg: msg.into() }
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let de = toml::Deserializer::new(text);
        let cfg: ExperimentConfig = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            config_error(path, e.into_inner().message().trim().to_string())
        })?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.n() != self.params.n() {
            return Err(config_error("grid.origin", "grid dimension differs from params.n"));
        }
        let mut names = std::collections::BTreeSet::new();
        for (i, task) in self.tasks.iter().enumerate() {
            if !names.insert(task.name()) {
                return Err(config_error(format!("tasks[{i}].name"), format!("duplicate task name `{}`", task.name())));
            }
            for (key, w) in task.weight_refs() {
                if !self.weights.contains_key(w) {
                    return Err(config_error(format!("tasks[{i}].{key}"), format!("undeclared weight `{w}`")));
                }
            }
            if let Some(f) = task.field_ref() {
                if !self.fields.contains_key(f) {
                    return Err(config_error(format!("tasks[{i}].field"), format!("undeclared field `{f}`")));
                }
            }
        }
        Ok(())
    }
}

/// Seed of the `index`-th task: stream `index` of the root generator.
pub fn task_seed(root: u64, index: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(root);
    rng.set_stream(index as u64);
    rng.next_u64()
}

/// First 16 hex digits of the SHA-256 of the task's JSON form.
pub fn params_hash(task: &Task) -> String {
    let text = serde_json::to_string(task).expect("tasks serialize");
    hex::encode(&Sha256::digest(text.as_bytes())[..8])
}

/// Result of one task.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskRecord {
    pub name: String,
    pub kind: &'static str,
    pub params_hash: String,
    /// Estimate for value-producing tasks, margin for checks.
    pub value: f64,
    pub pass: bool,
    pub record: Value,
    #[serde(skip)]
    pub field: Option<SampledField>,
}

/// Outcome of a run.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub records: Vec<TaskRecord>,
    pub output: PathBuf,
}

impl RunSummary {
    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }
}

fn to_json<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("records serialize")
}

struct Context<'a> {
    cfg: &'a ExperimentConfig,
    seed: u64,
}

impl Context<'_> {
    fn weight(&self, name: &str) -> Result<SampledField> {
        eval_weight(&self.cfg.weights[name], &self.cfg.grid)
    }

    fn field(&self, name: &str) -> Result<SampledField> {
        self.cfg.fields[name].sample(&self.cfg.grid)
    }

    fn rects(&self, fam: &RectangleFamily, gamma: f64) -> Result<Vec<ParabolicRectangle>> {
        fam.rectangles(&self.cfg.grid, self.cfg.params.p(), gamma)
    }

    fn check(&self, c: &CheckTask) -> Result<CheckReport> {
        let p = self.cfg.params.p();
        let n = self.cfg.params.n();
        let spec = &self.cfg.grid;
        match c {
            CheckTask::PointwiseControl { field, gamma, beta, ladder, tolerance } => {
                check_pointwise_control(&self.field(field)?, p, *gamma, *beta, &ladder.resolve(spec)?, *tolerance)
            }
            CheckTask::Welland { field, gamma, beta, eps, ladder } => {
                let ls = match ladder {
                    Some(l) => l.resolve(spec)?,
                    None => welland_ladder(spec, p),
                };
                check_welland(&self.field(field)?, p, *gamma, *beta, *eps, &ls)
            }
            CheckTask::Duality { u, v, r, q, gamma, family, tolerance } => {
                check_duality(&self.weight(u)?, &self.weight(v)?, *r, *q, *gamma, &self.rects(family, *gamma)?, *tolerance)
            }
            CheckTask::A1Characterization { u, v, q, gamma, family } => {
                check_a1_characterization(&self.weight(u)?, &self.weight(v)?, *q, *gamma, &self.rects(family, *gamma)?)
            }
            CheckTask::LagMonotonicity { u, v, r, q, gamma1, gamma2, family } => check_lag_monotonicity(
                &self.weight(u)?,
                &self.weight(v)?,
                *r,
                *q,
                *gamma1,
                *gamma2,
                &self.rects(family, *gamma2)?,
            ),
            CheckTask::ShiftedBound { field, gamma, beta, ladder, slack } => {
                check_shifted_bound(&self.field(field)?, p, *gamma, *beta, &ladder.resolve(spec)?, *slack)
            }
            CheckTask::MeasureCondition { u, v, r, delta, c, gamma, family } => check_measure_condition(
                &self.weight(u)?,
                &self.weight(v)?,
                *r,
                *delta,
                *c,
                *gamma,
                &self.rects(family, *gamma)?,
                self.seed,
            ),
            CheckTask::RieszShells { field, gamma, beta, shells } => {
                check_riesz_shells(&self.field(field)?, *gamma, &KernelParams::new(n, p, *beta)?, *shells)
            }
            CheckTask::SelfImprovement { u, v, r, q, gamma, family, deltas } => probe_self_improvement(
                &self.weight(u)?,
                &self.weight(v)?,
                *r,
                *q,
                *gamma,
                &self.rects(family, *gamma)?,
                deltas,
            ),
            CheckTask::KernelEquivalence { gamma, beta, samples } => {
                check_kernel_equivalence(*gamma, &KernelParams::new(n, p, *beta)?, *samples, self.seed)
            }
            CheckTask::Chains { gamma, alpha, tau, samples } => {
                let base = ParabolicRectangle::new(Point::origin(n), 1.0, p)?;
                check_chains(*gamma, *alpha, *tau, base, *samples, self.seed)
            }
            CheckTask::Selection { gamma, count, extent, cells } => {
                check_selection(n, p, *gamma, *count, *extent, self.seed, *cells)
            }
            CheckTask::HeatApriori(study) => check_heat_apriori(study),
        }
    }

    fn run(&self, task: &Task) -> Result<(f64, bool, Value, Option<SampledField>)> {
        let p = self.cfg.params.p();
        match task {
            Task::ConstantEstimate { u, v, r, q, gamma, direction, family, .. } => {
                let est = ta_constant(
                    &self.cfg.weights[u],
                    &self.cfg.weights[v],
                    *r,
                    *q,
                    *gamma,
                    *direction,
                    family,
                    &self.cfg.grid,
                    p,
                )?;
                Ok((est.value, true, to_json(&est), None))
            }
            Task::OperatorEval { field, gamma, beta, operator, .. } => {
                let out = apply_operator(&self.field(field)?, p, *gamma, *beta, operator)?;
                let max = out.max();
                Ok((max, true, json!({ "max": max, "cells": out.values().len() }), Some(out)))
            }
            Task::Construction { gamma, alpha, tau, indices, .. } => {
                let base = ParabolicRectangle::new(Point::origin(self.cfg.params.n()), 1.0, p)?;
                let [i, j, k, iota] = *indices;
                let chain = build_chain(&ChainParams { gamma: *gamma, alpha: *alpha, tau: *tau, base, i, j, k, iota })?;
                let rep = verify_chain(&chain)?;
                Ok((chain.len() as f64, rep.ok, to_json(&rep), None))
            }
            Task::Check { check, .. } => {
                let rep = self.check(check)?;
                Ok((rep.margin, rep.pass, to_json(&rep), None))
            }
        }
    }
}

fn kind(task: &Task) -> &'static str {
    match task {
        Task::ConstantEstimate { .. } => "constant-estimate",
        Task::OperatorEval { .. } => "operator-eval",
        Task::Construction { .. } => "construction",
        Task::Check { .. } => "check",
    }
}

/// Runs every task; a failing task is recorded and does not stop the rest.
pub fn execute(cfg: &ExperimentConfig, jobs: usize) -> Result<Vec<TaskRecord>> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::Format(e.to_string()))?;
    let records = pool.install(|| {
        cfg.tasks
            .par_iter()
            .enumerate()
            .map(|(i, task)| {
                let ctx = Context { cfg, seed: task_seed(cfg.seed, i) };
                let (value, pass, record, field) = match ctx.run(task) {
                    Ok(out) => out,
                    Err(e) => (f64::NAN, false, json!({ "error": e.to_string() }), None),
                };
                TaskRecord {
                    name: task.name().to_string(),
                    kind: kind(task),
                    params_hash: params_hash(task),
                    value,
                    pass,
                    record,
                    field,
                }
            })
            .collect()
    });
    Ok(records)
}

pub const SUMMARY_HEADER: [&str; 5] = ["name", "kind", "params_hash", "value", "pass"];

/// Writes `summary.csv`, `NN-name.json` per task and `name.field` for each
/// operator output.
pub fn write_outputs(records: &[TaskRecord], dir: &Path) -> Result<()> {
    fs::create_dir_all(dir)?;
    let mut w = csv::Writer::from_path(dir.join("summary.csv")).map_err(|e| Error::Format(e.to_string()))?;
    w.write_record(SUMMARY_HEADER).map_err(|e| Error::Format(e.to_string()))?;
    for (i, r) in records.iter().enumerate() {
        w.write_record([r.name.as_str(), r.kind, &r.params_hash, &r.value.to_string(), &r.pass.to_string()])
            .map_err(|e| Error::Format(e.to_string()))?;
        let mut f = fs::File::create(dir.join(format!("{i:02}-{}.json", r.name)))?;
        serde_json::to_writer_pretty(&mut f, r).map_err(|e| Error::Format(e.to_string()))?;
        f.write_all(b"\n")?;
        if let Some(field) = &r.field {
            field.write_binary(fs::File::create(dir.join(format!("{}.field", r.name)))?)?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Executes the configuration and writes its outputs to `out`.
pub fn run_config(cfg: &ExperimentConfig, out: &Path, jobs: usize) -> Result<RunSummary> {
    let records = execute(cfg, jobs)?;
    write_outputs(&records, out)?;
    Ok(RunSummary { records, output: out.to_path_buf() })
}

#[cfg(test)]
mod tests {
    use super::*;

    const HEAD: &str = r#"
seed = 1
[params]
n = 1
p = 2.0
[grid]
origin = { x = [0.0], t = 0.0 }
shape = [8, 16]
h_x = 0.125
h_t = 0.0625
"#;

    #[test]
    fn empty_task_list() {
        let cfg = ExperimentConfig::parse(HEAD).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let sum = run_config(&cfg, dir.path(), 1).unwrap();
        assert!(sum.all_pass());
        let text = fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        assert_eq!(text, "name,kind,params_hash,value,pass\n");
    }

    #[test]
    fn constant_pair_row() {
        let text = format!(
            "{HEAD}
[weights.one]
kind = \"constant\"
c = 1.0
[[tasks]]
kind = \"constant-estimate\"
name = \"ones\"
u = \"one\"
v = \"one\"
r = 2.0
q = 2.0
gamma = 0.5
family = {{ id = \"all\", rule = \"exhaustive\" }}
"
        );
        let cfg = ExperimentConfig::parse(&text).unwrap();
        let recs = execute(&cfg, 1).unwrap();
        assert_eq!(recs.len(), 1);
        assert!((recs[0].value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn undeclared_reference_has_path() {
        let text = format!(
            "{HEAD}
[[tasks]]
kind = \"check\"
check = \"riesz-shells\"
name = \"s\"
field = \"missing\"
gamma = 0.5
beta = 2.0
shells = 3
"
        );
        match ExperimentConfig::parse(&text) {
            Err(Error::Config { path, .. }) => assert_eq!(path, "tasks[0].field"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn parse_error_has_path() {
        let text = format!("{HEAD}\n[[tasks]]\nkind = \"constant-estimate\"\nname = 3\n");
        match ExperimentConfig::parse(&text) {
            Err(Error::Config { path, .. }) => assert!(path.starts_with("tasks"), "{path}"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn task_seeds_differ() {
        assert_ne!(task_seed(1, 0), task_seed(1, 1));
        assert_eq!(task_seed(1, 3), task_seed(1, 3));
    }
}
