//! Scenario sweeps: expansion, fan-out, oracle checks and report rows.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::apps::floyd::max_safe_weight;
use crate::apps::{self, db, EncGraph, EncTable, EncTree, Graph, Table, Tree};
use crate::costmodel::{predict_scenario, reconcile, OpMix, Predicted, Verdict};
use crate::emulator::{ContextConfig, EvalContext, Interval, Method, WordParams};
use crate::error::{Error, Result};
use crate::exec::{derive_seed, Execution};
use crate::report::{ReportRow, RowHead};
use crate::workloads::{self, WorkloadKind, WorkloadResult, WorkloadSpec};

/// Cartesian product of workload flags, `repeat` seeds per combination.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchPlan {
    pub workloads: Vec<WorkloadKind>,
    pub methods: Vec<Method>,
    pub bits: Vec<u32>,
    pub slots: usize,
    pub seed: u64,
    pub repeat: u64,
}

impl BenchPlan {
    /// Scenario specs sorted by scenario id, duplicates removed.
    pub fn expand(&self) -> Vec<WorkloadSpec> {
        let mut specs = Vec::new();
        for rep in 0..self.repeat {
            for &kind in &self.workloads {
                for &method in &self.methods {
                    for &bits in &self.bits {
                        specs.push(WorkloadSpec::new(kind, method, bits, self.slots, self.seed + rep));
                    }
                }
            }
        }
        sort_dedup(specs, WorkloadSpec::scenario_id)
    }
}

fn sort_dedup<T>(mut v: Vec<T>, key: impl Fn(&T) -> String) -> Vec<T> {
    v.sort_by_cached_key(&key);
    v.dedup_by(|a, b| key(a) == key(b));
    v
}

pub fn workload_row(r: &WorkloadResult) -> ReportRow {
    let s = &r.spec;
    let head = RowHead {
        scenario: r.scenario.clone(),
        kind: "workload",
        name: s.kind.to_string(),
        method: s.method.to_string(),
        bits: s.bits,
        slot_count: if s.method.simd() { s.slots } else { 1 },
        size: s.slots,
        seed: s.seed,
        oracle_pass: r.oracle_pass,
    };
    ReportRow::new(head, r.reconciliation.verdict, &r.ledger, &r.predicted, r.estimated_ms)
}

/// Runs every spec; rows come back in spec order. The first error is
/// returned tagged with its scenario id.
pub fn run_workloads(specs: &[WorkloadSpec], cfg: &ContextConfig, exec: Execution) -> Result<Vec<ReportRow>> {
    exec.map(specs, |s| {
        workloads::run(s, cfg).map(|r| workload_row(&r)).map_err(|e| tag(&s.scenario_id(), e))
    })
    .into_iter()
    .collect()
}

fn tag(scenario: &str, e: Error) -> Error {
    Error::InvalidParameter(format!("{scenario}: {e}"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AppKind {
    Floyd,
    Tree,
    Sort,
    Db,
}

impl AppKind {
    pub const ALL: [AppKind; 4] = [AppKind::Floyd, AppKind::Tree, AppKind::Sort, AppKind::Db];

    pub fn name(self) -> &'static str {
        match self {
            AppKind::Floyd => "floyd",
            AppKind::Tree => "tree",
            AppKind::Sort => "sort",
            AppKind::Db => "db",
        }
    }

    fn size_key(self) -> &'static str {
        match self {
            AppKind::Floyd => "n",
            AppKind::Tree => "d",
            AppKind::Sort => "m",
            AppKind::Db => "rows",
        }
    }
}

impl fmt::Display for AppKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AppKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        AppKind::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown app '{s}' (expected floyd, tree, sort or db)")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AppSpec {
    pub app: AppKind,
    /// Nodes, tree depth, array length or table rows.
    pub size: usize,
    pub method: Method,
    pub bits: u32,
    pub seed: u64,
}

impl AppSpec {
    pub fn scenario_id(&self) -> String {
        format!(
            "{}-{}-b{}-{}{}-seed{}",
            self.app,
            self.method,
            self.bits,
            self.app.size_key(),
            self.size,
            self.seed
        )
    }

    fn rng(&self) -> ChaCha8Rng {
        let key = format!("{}-b{}-{}{}", self.app, self.bits, self.app.size_key(), self.size);
        ChaCha8Rng::seed_from_u64(derive_seed(self.seed, &key))
    }
}

/// Caller-supplied application input; random inputs are drawn otherwise.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AppInput {
    Graph(Graph),
    Tree { tree: Tree, features: Vec<u64> },
    Array(Vec<u64>),
    Table { table: Table, query: db::Predicate },
}

impl AppInput {
    pub fn size(&self) -> usize {
        match self {
            AppInput::Graph(g) => g.n,
            AppInput::Tree { tree, .. } => tree.depth,
            AppInput::Array(v) => v.len(),
            AppInput::Table { table, .. } => table.rows(),
        }
    }

    fn kind(&self) -> AppKind {
        match self {
            AppInput::Graph(_) => AppKind::Floyd,
            AppInput::Tree { .. } => AppKind::Tree,
            AppInput::Array(_) => AppKind::Sort,
            AppInput::Table { .. } => AppKind::Db,
        }
    }
}

/// Outcome of one application run.
#[derive(Debug)]
pub struct AppRun {
    pub spec: AppSpec,
    pub oracle_pass: bool,
    pub mix: OpMix,
    pub ctx: EvalContext,
}

fn smallest_inf(bits: u32) -> u64 {
    ((1u64 << bits) - 1) / 2
}

fn app_context(cfg: &ContextConfig, spec: &AppSpec, slots: usize) -> Result<EvalContext> {
    let mut ctx = cfg.context(spec.method, spec.bits, slots.max(1))?;
    ctx.auto_refresh = true;
    Ok(ctx)
}

fn lanes_if_bits(method: Method, lanes: usize) -> u64 {
    if method.simd() {
        1
    } else {
        lanes as u64
    }
}

fn floyd(spec: &AppSpec, cfg: &ContextConfig, input: Option<Graph>) -> Result<AppRun> {
    let g = match input {
        Some(g) => g,
        None => {
            let w = max_safe_weight(spec.size, smallest_inf(spec.bits)).min(64);
            Graph::random(&mut spec.rng(), spec.size, 0.3, w)
        }
    };
    let n = g.n;
    let mut ctx = app_context(cfg, spec, n)?;
    let enc = EncGraph::encrypt(&mut ctx, &g)?;
    let out = apps::floyd_warshall_enc(&mut ctx, &enc)?;
    let want = apps::floyd_warshall_plain(&g.to_matrix(enc.inf)?, enc.inf)?;
    let oracle_pass = out.decrypt(&ctx) == want;
    let nn = (n * n) as u64;
    let mix = OpMix {
        executions: lanes_if_bits(spec.method, n),
        compares: nn,
        masked: 2 * nn,
        adds: nn,
        chain_compares: n as u32,
        chain_mults: n as u32,
        depth_cap: Some(ctx.depth_budget()),
        ..Default::default()
    };
    Ok(AppRun { spec: AppSpec { size: n, ..*spec }, oracle_pass, mix, ctx })
}

fn tree(spec: &AppSpec, cfg: &ContextConfig, input: Option<(Tree, Vec<u64>)>) -> Result<AppRun> {
    let limit = 1u64 << spec.bits;
    let (tree, x) = match input {
        Some(t) => t,
        None => {
            let mut rng = spec.rng();
            let t = Tree::random(&mut rng, spec.size, 4, limit);
            let x = (0..4).map(|_| rng.gen_range(0..limit)).collect();
            (t, x)
        }
    };
    let leaves = tree.leaves();
    let mut ctx = app_context(cfg, spec, leaves)?;
    let et = EncTree::new(tree.clone(), apps::value_limit(&ctx)?)?;
    let bound = x.iter().copied().max().unwrap_or(0);
    let fx = apps::encrypt_features(&mut ctx, &x, leaves, bound)?;
    let out = apps::pdte_infer(&mut ctx, &et, &fx)?;
    let ind = ctx.decrypt_vec(&out.indicators);
    let oracle_pass = ctx.decrypt_vec(&out.label)[0] == tree.infer_plain(&x) && ind.iter().sum::<u64>() == 1;
    let d = tree.depth as u64;
    let mix = OpMix {
        executions: lanes_if_bits(spec.method, leaves),
        compares: d,
        equals: 1,
        adds: d,
        plain_mults: 1,
        chain_compares: 1,
        chain_equals: 1,
        depth_cap: Some(ctx.depth_budget()),
        ..Default::default()
    };
    Ok(AppRun { spec: AppSpec { size: tree.depth, ..*spec }, oracle_pass, mix, ctx })
}

fn sort(spec: &AppSpec, cfg: &ContextConfig, input: Option<Vec<u64>>) -> Result<AppRun> {
    let values = match input {
        Some(v) => v,
        None => {
            let mut rng = spec.rng();
            (0..spec.size).map(|_| rng.gen_range(0..1u64 << spec.bits)).collect()
        }
    };
    let m = values.len();
    let mut ctx = app_context(cfg, spec, m)?;
    let hi = values.iter().copied().max().unwrap_or(0);
    let xs = ctx.encrypt_vec_bounded(&values, Interval::new(0, hi as i128))?;
    let out = apps::direct_sort(&mut ctx, &xs)?;
    let got: Vec<u64> = out.sorted.iter().map(|v| ctx.decrypt_vec(v)[0]).collect();
    let mut sigma: Vec<u64> = out.sigma.iter().map(|v| ctx.decrypt_vec(v)[0]).collect();
    sigma.sort_unstable();
    let mut want = values.clone();
    want.sort_unstable_by(|a, b| b.cmp(a));
    let oracle_pass = got == want && sigma.iter().copied().eq(0..m as u64);
    let mm = (m * m) as u64;
    let mix = OpMix {
        executions: 1,
        compares: mm.saturating_sub(m as u64) / 2,
        equals: mm,
        masked: mm,
        adds: 2 * mm.saturating_sub(m as u64),
        chain_compares: 1,
        chain_equals: 1,
        chain_mults: 1,
        depth_cap: Some(ctx.depth_budget()),
        ..Default::default()
    };
    Ok(AppRun { spec: AppSpec { size: m, ..*spec }, oracle_pass, mix, ctx })
}

fn database(spec: &AppSpec, cfg: &ContextConfig, input: Option<(Table, db::Predicate)>) -> Result<AppRun> {
    let (table, query) = match input {
        Some(t) => t,
        None => (Table::random_employees(&mut spec.rng(), spec.size, spec.bits), db::employee_query(spec.bits)),
    };
    let rows = table.rows();
    let mut ctx = app_context(cfg, spec, rows)?;
    let et = EncTable::encrypt(&mut ctx, &table)?;
    let mask = apps::db_filter(&mut ctx, &et, &query)?;
    let want = apps::filter_plain(&table, &query)?;
    let mut oracle_pass = ctx.decrypt_vec(&mask) == want;
    if let Ok(ids) = table.column("id") {
        let sel = apps::db_select_ids(&mut ctx, &et, &mask)?;
        let want_ids: Vec<u64> = ids.iter().zip(&want).map(|(i, m)| i * m).collect();
        oracle_pass &= ctx.decrypt_vec(&sel) == want_ids;
    }
    let mix = OpMix {
        executions: lanes_if_bits(spec.method, rows),
        compares: 4,
        ct_mults: 4,
        masked: 1,
        adds: 1,
        chain_compares: 1,
        // product, two ANDs, id selection
        chain_mults: 4,
        depth_cap: Some(ctx.depth_budget()),
        ..Default::default()
    };
    Ok(AppRun { spec: AppSpec { size: rows, ..*spec }, oracle_pass, mix, ctx })
}

/// Runs one application scenario with its plaintext oracle.
pub fn run_app(spec: &AppSpec, cfg: &ContextConfig, input: Option<AppInput>) -> Result<AppRun> {
    if let Some(i) = &input {
        if i.kind() != spec.app {
            return Err(Error::InvalidParameter(format!("{} input given to {}", i.kind(), spec.app)));
        }
    } else if spec.size == 0 {
        return Err(Error::InvalidParameter(format!("{} size must be at least 1", spec.app)));
    }
    match (spec.app, input) {
        (AppKind::Floyd, Some(AppInput::Graph(g))) => floyd(spec, cfg, Some(g)),
        (AppKind::Floyd, _) => floyd(spec, cfg, None),
        (AppKind::Tree, Some(AppInput::Tree { tree: t, features })) => tree(spec, cfg, Some((t, features))),
        (AppKind::Tree, _) => tree(spec, cfg, None),
        (AppKind::Sort, Some(AppInput::Array(v))) => sort(spec, cfg, Some(v)),
        (AppKind::Sort, _) => sort(spec, cfg, None),
        (AppKind::Db, Some(AppInput::Table { table, query })) => database(spec, cfg, Some((table, query))),
        (AppKind::Db, _) => database(spec, cfg, None),
    }
}

fn prediction_params(bits: u32) -> (u64, u32) {
    WordParams::for_bits(bits).map_or((2, bits), |p| (p.p, p.r))
}

pub fn app_row(run: &AppRun) -> Result<ReportRow> {
    let s = &run.spec;
    let scenario = s.scenario_id();
    let (p, r) = prediction_params(s.bits);
    let predicted: Predicted = predict_scenario(&scenario, s.method, s.bits, p, r, &run.mix)?;
    let rec = reconcile(&predicted, &scenario, &run.ctx.ledger)?;
    let head = RowHead {
        scenario,
        kind: "app",
        name: s.app.to_string(),
        method: s.method.to_string(),
        bits: s.bits,
        slot_count: run.ctx.slot_count(),
        size: s.size,
        seed: s.seed,
        oracle_pass: run.oracle_pass,
    };
    Ok(ReportRow::new(head, rec.verdict, &run.ctx.ledger, &predicted, run.ctx.estimated_ms()))
}

/// Runs application scenarios with random inputs; rows in spec order.
pub fn run_apps(specs: &[AppSpec], cfg: &ContextConfig, exec: Execution) -> Result<Vec<ReportRow>> {
    exec.map(specs, |s| {
        run_app(s, cfg, None).and_then(|r| app_row(&r)).map_err(|e| tag(&s.scenario_id(), e))
    })
    .into_iter()
    .collect()
}

/// App specs for every method, width, size and repeat, sorted by scenario id.
pub fn expand_apps(app: AppKind, methods: &[Method], bits: &[u32], sizes: &[usize], seed: u64, repeat: u64) -> Vec<AppSpec> {
    let mut specs = Vec::new();
    for rep in 0..repeat {
        for &method in methods {
            for &b in bits {
                for &size in sizes {
                    specs.push(AppSpec { app, size, method, bits: b, seed: seed + rep });
                }
            }
        }
    }
    sort_dedup(specs, AppSpec::scenario_id)
}

/// Whether every row passed its oracle; the first failing scenario otherwise.
pub fn first_failure(rows: &[ReportRow]) -> Option<&str> {
    rows.iter().find(|r| !r.oracle_pass).map(|r| r.scenario.as_str())
}

pub fn worst_verdict(rows: &[ReportRow]) -> Verdict {
    rows.iter().map(|r| r.verdict).max_by_key(|v| *v as u8).unwrap_or(Verdict::Pass)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::{render, Format};

    fn plan(repeat: u64) -> BenchPlan {
        BenchPlan {
            workloads: WorkloadKind::ALL.to_vec(),
            methods: Method::ALL.to_vec(),
            bits: vec![6, 8],
            slots: 16,
            seed: 3,
            repeat,
        }
    }

    #[test]
    fn expansion_sorted_and_deduplicated() {
        let specs = plan(2).expand();
        assert_eq!(specs.len(), 3 * 3 * 2 * 2);
        let ids: Vec<String> = specs.iter().map(WorkloadSpec::scenario_id).collect();
        let mut sorted = ids.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(ids, sorted);
        assert!(plan(0).expand().is_empty());
        let mut p = plan(1);
        p.bits = vec![8, 8];
        assert_eq!(p.expand().len(), 9);
    }

    #[test]
    fn parallel_and_sequential_reports_identical() {
        let specs = plan(1).expand();
        let cfg = ContextConfig::default();
        let a = run_workloads(&specs, &cfg, Execution::Sequential).unwrap();
        let b = run_workloads(&specs, &cfg, Execution::Parallel).unwrap();
        assert_eq!(render(&a, Format::JsonLines).unwrap(), render(&b, Format::JsonLines).unwrap());
        assert!(first_failure(&a).is_none());
    }

    #[test]
    fn every_app_passes_its_oracle() {
        let cfg = ContextConfig::default();
        for app in AppKind::ALL {
            let size = match app {
                AppKind::Floyd => 5,
                AppKind::Tree => 3,
                AppKind::Sort => 4,
                AppKind::Db => 20,
            };
            let specs = expand_apps(app, &Method::ALL, &[8], &[size], 1, 1);
            let rows = run_apps(&specs, &cfg, Execution::Parallel).unwrap();
            for r in &rows {
                assert!(r.oracle_pass, "{}", r.scenario);
                assert_ne!(r.verdict, Verdict::Fail, "{r:?}");
                assert_eq!(r.comparisons, r.pred_comparisons, "{}", r.scenario);
                assert_eq!(r.equalities, r.pred_equalities, "{}", r.scenario);
            }
        }
    }

    #[test]
    fn floyd_tfhe_16_nodes_counts() {
        let spec = AppSpec { app: AppKind::Floyd, size: 16, method: Method::BitwiseTfhe, bits: 8, seed: 0 };
        let row = app_row(&run_app(&spec, &ContextConfig::default(), None).unwrap()).unwrap();
        assert!(row.oracle_pass);
        assert_eq!(row.comparisons, 256);
        assert_eq!(row.scenario, "floyd-tfhe-b8-n16-seed0");
    }

    #[test]
    fn explicit_inputs() {
        let cfg = ContextConfig::default();
        let spec = AppSpec { app: AppKind::Sort, size: 0, method: Method::EncodingSwitching, bits: 8, seed: 0 };
        let run = run_app(&spec, &cfg, Some(AppInput::Array(vec![9]))).unwrap();
        assert!(run.oracle_pass);
        assert_eq!(run.spec.size, 1);
        assert!(run_app(&spec, &cfg, Some(AppInput::Array(vec![]))).is_err());
        assert!(run_app(&spec, &cfg, Some(AppInput::Graph(Graph::new(2)))).is_err());
        assert!(run_app(&spec, &cfg, None).is_err());
    }
}
