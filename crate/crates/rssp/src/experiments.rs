//! Monte Carlo sweep runner.
//!
//! A sweep iterates a (width, trial) grid; each pair derives an
//! independent seed from the master seed, generates one instance, and
//! runs every requested method on that same instance (paired design).
//! Records are merged and canonically sorted, so the output is identical
//! for any worker count. Timings are wall-clock per solve call, excluding
//! instance generation; all other fields are deterministic.

use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use anyhow::{bail, Context};
use serde::{Deserialize, Serialize};

use rssp_core::baselines::{
    exact_min_error, fptas_gens_levner, run_metaheuristic, MetaheuristicParams,
};
use rssp_core::beam::closest_beam_search;
use rssp_core::instance::{DistributionSpec, Instance, TargetRule};
use rssp_core::mitm::{mitm_solve, PhaseAVariant, SplitRule};
use rssp_core::variants::{bounded_mitm_solve, vector_mitm_solve, VectorInstance};
use rssp_core::{mix64, mix64_3};

/// Solvers a sweep can run on each instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Mitm,
    MitmEqui,
    PlainBeam,
    BoundedMitm,
    Sa,
    Ga,
    Pso,
    Tabu,
    Aoa,
    Fptas,
    Exact,
}

impl Method {
    pub fn tag(&self) -> &'static str {
        match self {
            Method::Mitm => "mitm",
            Method::MitmEqui => "mitm_equi",
            Method::PlainBeam => "plain_beam",
            Method::BoundedMitm => "bounded_mitm",
            Method::Sa => "sa",
            Method::Ga => "ga",
            Method::Pso => "pso",
            Method::Tabu => "tabu",
            Method::Aoa => "aoa",
            Method::Fptas => "fptas",
            Method::Exact => "exact",
        }
    }
}

impl FromStr for Method {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> anyhow::Result<Self> {
        Ok(match s {
            "mitm" => Method::Mitm,
            "mitm_equi" | "mitm-equi" => Method::MitmEqui,
            "plain_beam" | "plain-beam" | "plain" => Method::PlainBeam,
            "bounded_mitm" | "bounded-mitm" | "bounded" => Method::BoundedMitm,
            "sa" => Method::Sa,
            "ga" => Method::Ga,
            "pso" => Method::Pso,
            "tabu" => Method::Tabu,
            "aoa" => Method::Aoa,
            "fptas" => Method::Fptas,
            "exact" => Method::Exact,
            other => bail!("unknown method {other:?}"),
        })
    }
}

mod split_rule_text {
    use super::SplitRule;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rule: &SplitRule, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rule.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<SplitRule, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

mod target_rule_text {
    use super::TargetRule;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(rule: &TargetRule, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&rule.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<TargetRule, D::Error> {
        let text = String::deserialize(d)?;
        text.parse().map_err(serde::de::Error::custom)
    }
}

fn default_parallelism() -> usize {
    std::thread::available_parallelism()
        .map(|p| p.get())
        .unwrap_or(1)
}

fn default_target() -> TargetRule {
    TargetRule::RandomSubset
}

/// One full sweep specification; serializable as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SweepConfig {
    pub distribution: DistributionSpec,
    pub n: usize,
    pub trials: usize,
    pub w_grid: Vec<usize>,
    #[serde(with = "split_rule_text")]
    pub split: SplitRule,
    #[serde(with = "target_rule_text", default = "default_target")]
    pub target: TargetRule,
    pub methods: Vec<Method>,
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
    /// Metaheuristic evaluation budget; defaults to `n * w` per trial.
    #[serde(default)]
    pub budget_evals: Option<u64>,
    /// Bounded-variant budget; defaults to `ceil(ln(n*w)) + 8`.
    #[serde(default)]
    pub k: Option<usize>,
    #[serde(default)]
    pub fptas_eps: Option<f64>,
}

impl SweepConfig {
    pub fn new(distribution: DistributionSpec, n: usize, trials: usize, w_grid: Vec<usize>) -> Self {
        SweepConfig {
            distribution,
            n,
            trials,
            w_grid,
            split: SplitRule::log_default(),
            target: TargetRule::RandomSubset,
            methods: vec![Method::Mitm],
            master_seed: 1,
            parallelism: default_parallelism(),
            budget_evals: None,
            k: None,
            fptas_eps: None,
        }
    }

    fn validate(&self) -> anyhow::Result<()> {
        if self.trials == 0 {
            bail!("trials must be >= 1");
        }
        if self.w_grid.is_empty() {
            bail!("w_grid must be nonempty");
        }
        if !self.w_grid.windows(2).all(|p| p[0] < p[1]) {
            bail!("w_grid must be strictly increasing");
        }
        if self.methods.is_empty() {
            bail!("methods must be nonempty");
        }
        if self.parallelism == 0 {
            bail!("parallelism must be >= 1");
        }
        Ok(())
    }
}

/// One benchmark observation. Fields are sufficient to re-run the trial
/// exactly.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub method: String,
    pub distribution: String,
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: i64,
    #[serde(rename = "w")]
    pub width: usize,
    pub split: String,
    pub seed: u64,
    pub error: u64,
    pub elapsed_ns: u64,
    #[serde(rename = "extras_json")]
    pub extras: String,
}

impl TrialRecord {
    /// Rows whose solver failed carry a `failed` key in the extras and are
    /// excluded from aggregation.
    pub fn is_failure(&self) -> bool {
        serde_json::from_str::<serde_json::Value>(&self.extras)
            .map(|v| v.get("failed").is_some())
            .unwrap_or(false)
    }

    pub fn extras_value(&self) -> serde_json::Value {
        serde_json::from_str(&self.extras).unwrap_or(serde_json::Value::Null)
    }
}

/// 64-bit content digest of an instance, for paired-design checks.
pub fn instance_digest(inst: &Instance) -> u64 {
    let mut acc = mix64(inst.bound as u64, inst.target as u64);
    for &x in &inst.items {
        acc = mix64(acc, x as u64);
    }
    acc
}

fn vector_digest(vinst: &VectorInstance) -> u64 {
    let mut acc = mix64(vinst.bound as u64, vinst.dim as u64);
    for c in vinst.target.iter().chain(vinst.vectors.iter().flatten()) {
        acc = mix64(acc, *c as u64);
    }
    acc
}

/// Default bounded-cardinality budget, `ceil(ln(n*w)) + 8`.
pub fn default_cardinality_budget(n: usize, width: usize) -> usize {
    ((n * width) as f64).ln().ceil() as usize + 8
}

fn run_method(
    method: Method,
    inst: &Instance,
    width: usize,
    config: &SweepConfig,
    seed: u64,
    extras: &mut serde_json::Map<String, serde_json::Value>,
) -> Result<u64, rssp_core::Error> {
    match method {
        Method::Mitm | Method::MitmEqui => {
            let variant = if method == Method::Mitm {
                PhaseAVariant::BucketRandom
            } else {
                PhaseAVariant::EquiSample
            };
            let r = mitm_solve(inst, width, config.split, seed, variant)?;
            extras.insert("t_hit".into(), serde_json::json!(r.trace.t_hit));
            extras.insert("fallback".into(), serde_json::json!(r.fallback));
            extras.insert("n_left".into(), serde_json::json!(r.n_left));
            Ok(r.error)
        }
        Method::PlainBeam => {
            let (best, _) = closest_beam_search(&inst.items, inst.target, width)?;
            Ok(inst.error_of(best))
        }
        Method::BoundedMitm => {
            let k = config
                .k
                .unwrap_or_else(|| default_cardinality_budget(inst.len(), width));
            let r = bounded_mitm_solve(inst, width, k, seed)?;
            extras.insert("cardinality".into(), serde_json::json!(r.cardinality));
            extras.insert("k".into(), serde_json::json!(k));
            Ok(r.result.error)
        }
        Method::Sa | Method::Ga | Method::Pso | Method::Tabu | Method::Aoa => {
            let budget = config.budget_evals.unwrap_or((inst.len() * width) as u64);
            let params = match method {
                Method::Sa => MetaheuristicParams::sa(budget),
                Method::Ga => MetaheuristicParams::ga(budget),
                Method::Pso => MetaheuristicParams::pso(budget),
                Method::Tabu => MetaheuristicParams::tabu(budget),
                _ => MetaheuristicParams::aoa(budget),
            };
            extras.insert("budget_evals".into(), serde_json::json!(budget));
            let sum = run_metaheuristic(&inst.items, inst.target, &params, seed)?;
            Ok(inst.error_of(sum))
        }
        Method::Fptas => {
            let eps = config.fptas_eps.unwrap_or(0.1);
            extras.insert("eps".into(), serde_json::json!(eps));
            let sum = fptas_gens_levner(&inst.items, inst.target, eps)?;
            Ok(inst.error_of(sum))
        }
        Method::Exact => {
            let r = exact_min_error(&inst.items, inst.target)?;
            Ok(r.min_error)
        }
    }
}

fn run_one_pair(config: &SweepConfig, w_idx: usize, trial: u64) -> Vec<TrialRecord> {
    let width = config.w_grid[w_idx];
    let trial_seed = mix64_3(config.master_seed, w_idx as u64, trial);
    let dist_tag = config.distribution.tag();
    let split_tag = config.split.to_string();
    let base = |seed: u64, method: Method, error: u64, elapsed: u64, extras: String| TrialRecord {
        trial_id: trial,
        method: method.tag().to_string(),
        distribution: dist_tag.clone(),
        n: config.n,
        bound: config.distribution.bound,
        width,
        split: split_tag.clone(),
        seed,
        error,
        elapsed_ns: elapsed,
        extras,
    };
    let inst = match Instance::generate(
        &config.distribution,
        config.n,
        config.target,
        mix64(trial_seed, 0),
    ) {
        Ok(inst) => inst,
        Err(e) => {
            // Instance generation failed: one failure row per method.
            return config
                .methods
                .iter()
                .map(|&m| {
                    let extras = serde_json::json!({ "failed": e.to_string() }).to_string();
                    base(trial_seed, m, 0, 0, extras)
                })
                .collect();
        }
    };
    let digest = format!("{:016x}", instance_digest(&inst));
    config
        .methods
        .iter()
        .enumerate()
        .map(|(m_idx, &method)| {
            let seed = mix64(trial_seed, 1 + m_idx as u64);
            let mut extras = serde_json::Map::new();
            extras.insert("digest".into(), serde_json::json!(digest));
            let start = Instant::now();
            let outcome = run_method(method, &inst, width, config, seed, &mut extras);
            let elapsed = start.elapsed().as_nanos() as u64;
            let error = match outcome {
                Ok(err) => err,
                Err(e) => {
                    extras.insert("failed".into(), serde_json::json!(e.to_string()));
                    0
                }
            };
            base(
                seed,
                method,
                error,
                elapsed,
                serde_json::Value::Object(extras).to_string(),
            )
        })
        .collect()
}

fn sort_records(records: &mut [TrialRecord]) {
    records.sort_by(|a, b| {
        (a.width, a.trial_id, &a.method).cmp(&(b.width, b.trial_id, &b.method))
    });
}

/// Runs every (width, trial, method) combination of the config across a
/// worker pool; per-trial solver failures become failure rows and never
/// abort the sweep.
pub fn run_sweep(config: &SweepConfig) -> anyhow::Result<Vec<TrialRecord>> {
    config.validate()?;
    let jobs: Vec<(usize, u64)> = (0..config.w_grid.len())
        .flat_map(|w| (0..config.trials as u64).map(move |t| (w, t)))
        .collect();
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<TrialRecord>> = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = config.parallelism.min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(w_idx, trial)) = jobs.get(j) else {
                    break;
                };
                let records = run_one_pair(config, w_idx, trial);
                out.lock().expect("worker poisoned the record sink").extend(records);
            });
        }
    });
    let mut records = out.into_inner().expect("worker poisoned the record sink");
    sort_records(&mut records);
    Ok(records)
}

/// Vector sweep specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VectorSweepConfig {
    pub dim: usize,
    pub n: usize,
    #[serde(rename = "B")]
    pub bound: i64,
    pub trials: usize,
    pub w_grid: Vec<usize>,
    #[serde(with = "split_rule_text")]
    pub split: SplitRule,
    pub master_seed: u64,
    #[serde(default = "default_parallelism")]
    pub parallelism: usize,
}

/// Runs the vector solver over a (width, trial) grid of uniform planted
/// instances. The record error column is the rounded Euclidean error; the
/// extras carry the exact squared error.
pub fn run_vector_sweep(config: &VectorSweepConfig) -> anyhow::Result<Vec<TrialRecord>> {
    if config.trials == 0 || config.w_grid.is_empty() {
        bail!("vector sweep needs trials >= 1 and a nonempty w_grid");
    }
    let jobs: Vec<(usize, u64)> = (0..config.w_grid.len())
        .flat_map(|w| (0..config.trials as u64).map(move |t| (w, t)))
        .collect();
    let next = AtomicUsize::new(0);
    let out: Mutex<Vec<TrialRecord>> = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = config.parallelism.min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let j = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(w_idx, trial)) = jobs.get(j) else {
                    break;
                };
                let width = config.w_grid[w_idx];
                let trial_seed = mix64_3(config.master_seed, w_idx as u64, trial);
                let record = vector_trial(config, width, trial, trial_seed);
                out.lock().expect("worker poisoned the record sink").push(record);
            });
        }
    });
    let mut records = out.into_inner().expect("worker poisoned the record sink");
    sort_records(&mut records);
    Ok(records)
}

fn vector_trial(
    config: &VectorSweepConfig,
    width: usize,
    trial: u64,
    trial_seed: u64,
) -> TrialRecord {
    let mut extras = serde_json::Map::new();
    let (error, elapsed) = match VectorInstance::generate_uniform(
        config.dim,
        config.n,
        config.bound,
        mix64(trial_seed, 0),
    ) {
        Ok(vinst) => {
            extras.insert(
                "digest".into(),
                serde_json::json!(format!("{:016x}", vector_digest(&vinst))),
            );
            let seed = mix64(trial_seed, 1);
            let start = Instant::now();
            match vector_mitm_solve(&vinst, width, config.split, seed) {
                Ok(r) => {
                    extras.insert("l2".into(), serde_json::json!(r.error));
                    extras.insert("err_sq".into(), serde_json::json!(r.error_sq.to_string()));
                    extras.insert("fallback".into(), serde_json::json!(r.fallback));
                    (r.error.round() as u64, start.elapsed().as_nanos() as u64)
                }
                Err(e) => {
                    extras.insert("failed".into(), serde_json::json!(e.to_string()));
                    (0, 0)
                }
            }
        }
        Err(e) => {
            extras.insert("failed".into(), serde_json::json!(e.to_string()));
            (0, 0)
        }
    };
    TrialRecord {
        trial_id: trial,
        method: "vector_mitm".to_string(),
        distribution: format!("uniform-vector-d{}", config.dim),
        n: config.n,
        bound: config.bound,
        width,
        split: config.split.to_string(),
        seed: trial_seed,
        error,
        elapsed_ns: elapsed,
        extras: serde_json::Value::Object(extras).to_string(),
    }
}

/// Per-(method, width) summary statistics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AggregateRow {
    pub method: String,
    #[serde(rename = "w")]
    pub width: usize,
    pub count: usize,
    pub mean_error: f64,
    /// Unbiased sample standard deviation; absent for single-record
    /// groups.
    pub sd: Option<f64>,
    /// Standard error of the mean, `sd / sqrt(count)`.
    pub se: Option<f64>,
    pub mean_elapsed_ns: f64,
}

/// Groups records by (method, width) and reports mean error, sample sd
/// (n-1 denominator), standard error, and mean elapsed time. Failure rows
/// are skipped.
pub fn aggregate(records: &[TrialRecord]) -> Vec<AggregateRow> {
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, usize), Vec<&TrialRecord>> = BTreeMap::new();
    for r in records {
        if r.is_failure() {
            continue;
        }
        groups.entry((r.method.clone(), r.width)).or_default().push(r);
    }
    groups
        .into_iter()
        .map(|((method, width), rows)| {
            let count = rows.len();
            let mean_error = rows.iter().map(|r| r.error as f64).sum::<f64>() / count as f64;
            let mean_elapsed_ns =
                rows.iter().map(|r| r.elapsed_ns as f64).sum::<f64>() / count as f64;
            let (sd, se) = if count >= 2 {
                let var = rows
                    .iter()
                    .map(|r| {
                        let d = r.error as f64 - mean_error;
                        d * d
                    })
                    .sum::<f64>()
                    / (count - 1) as f64;
                let sd = var.sqrt();
                (Some(sd), Some(sd / (count as f64).sqrt()))
            } else {
                (None, None)
            };
            AggregateRow {
                method,
                width,
                count,
                mean_error,
                sd,
                se,
                mean_elapsed_ns,
            }
        })
        .collect()
}

/// Reads a sweep config from a JSON file.
pub fn load_sweep_config(path: &std::path::Path) -> anyhow::Result<SweepConfig> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading sweep config {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing sweep config {}", path.display()))
}
