//! Mixed linear / non-linear workloads with plaintext verification.
//!
//! * W1: `[A·B < C]`
//! * W2: `[A < B]·C`
//! * W3: `[A·B < C]·D`

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::compare;
use crate::costmodel::{predict_scenario, reconcile, OpMix, Predicted, Reconciliation};
use crate::emulator::{ContextConfig, CostLedger, EncVec, EvalContext, Interval, Method, WordParams};
use crate::error::{Error, Result};
use crate::exec::derive_seed;

pub const WORKLOAD_WIDTHS: [u32; 4] = [6, 8, 12, 16];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WorkloadKind {
    W1,
    W2,
    W3,
}

impl WorkloadKind {
    pub const ALL: [WorkloadKind; 3] = [WorkloadKind::W1, WorkloadKind::W2, WorkloadKind::W3];

    pub fn name(self) -> &'static str {
        match self {
            WorkloadKind::W1 => "w1",
            WorkloadKind::W2 => "w2",
            WorkloadKind::W3 => "w3",
        }
    }

    /// High-level operation counts of one execution.
    pub fn op_mix(self) -> OpMix {
        let base = OpMix { executions: 1, compares: 1, chain_compares: 1, ..Default::default() };
        match self {
            WorkloadKind::W1 => OpMix { ct_mults: 1, chain_mults: 1, ..base },
            WorkloadKind::W2 => OpMix { masked: 1, chain_mults: 1, ..base },
            WorkloadKind::W3 => OpMix { ct_mults: 1, masked: 1, chain_mults: 2, ..base },
        }
    }

    /// Plaintext reference for one lane.
    pub fn oracle(self, a: u64, b: u64, c: u64, d: u64) -> u64 {
        match self {
            WorkloadKind::W1 => u64::from(a * b < c),
            WorkloadKind::W2 => u64::from(a < b) * c,
            WorkloadKind::W3 => u64::from(a * b < c) * d,
        }
    }
}

impl fmt::Display for WorkloadKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WorkloadKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "w1" => Ok(WorkloadKind::W1),
            "w2" => Ok(WorkloadKind::W2),
            "w3" => Ok(WorkloadKind::W3),
            _ => Err(Error::InvalidParameter(format!("unknown workload '{s}' (expected w1, w2 or w3)"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub kind: WorkloadKind,
    pub bits: u32,
    /// Lanes per run; also the slot count for the SIMD methods.
    pub slots: usize,
    pub method: Method,
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn new(kind: WorkloadKind, method: Method, bits: u32, slots: usize, seed: u64) -> Self {
        Self { kind, bits, slots, method, seed }
    }

    pub fn scenario_id(&self) -> String {
        format!("{}-{}-b{}-s{}-seed{}", self.kind, self.method, self.bits, self.slots, self.seed)
    }

    /// Key for input generation. Independent of the method so every method
    /// sees the same inputs.
    fn input_key(&self) -> String {
        format!("{}-b{}-s{}", self.kind, self.bits, self.slots)
    }

    pub fn validate(&self) -> Result<()> {
        if !WORKLOAD_WIDTHS.contains(&self.bits) {
            return Err(Error::InvalidParameter(format!(
                "workload width {} not in {WORKLOAD_WIDTHS:?}",
                self.bits
            )));
        }
        if self.slots == 0 {
            return Err(Error::InvalidParameter("slot count must be at least 1".into()));
        }
        Ok(())
    }
}

/// Lane-wise operands. `d` is only read by W3.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WorkloadInputs {
    pub a: Vec<u64>,
    pub b: Vec<u64>,
    pub c: Vec<u64>,
    pub d: Vec<u64>,
}

impl WorkloadInputs {
    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }

    fn check(&self) -> Result<()> {
        let n = self.a.len();
        for (name, v) in [("b", &self.b), ("c", &self.c), ("d", &self.d)] {
            if v.len() != n {
                return Err(Error::ContextMismatch(format!("operand {name} has {} lanes, a has {n}", v.len())));
            }
        }
        Ok(())
    }

    /// Upper bounds (inclusive) on A and B for a workload at `bits`.
    fn factor_max(kind: WorkloadKind, bits: u32) -> u64 {
        match kind {
            WorkloadKind::W2 => (1 << bits) - 1,
            WorkloadKind::W1 | WorkloadKind::W3 => (1 << (bits / 2)) - 1,
        }
    }
}

/// Uniform draws that keep every intermediate value below 2^b.
pub fn draw_inputs(spec: &WorkloadSpec) -> WorkloadInputs {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(spec.seed, &spec.input_key()));
    let f = WorkloadInputs::factor_max(spec.kind, spec.bits);
    let full = (1u64 << spec.bits) - 1;
    let mut draw = |hi: u64| (0..spec.slots).map(|_| rng.gen_range(0..=hi)).collect::<Vec<_>>();
    let a = draw(f);
    let b = draw(f);
    let c = draw(full);
    let d = draw(full);
    WorkloadInputs { a, b, c, d }
}

pub fn expected_outputs(kind: WorkloadKind, inputs: &WorkloadInputs) -> Vec<u64> {
    (0..inputs.len())
        .map(|i| kind.oracle(inputs.a[i], inputs.b[i], inputs.c[i], inputs.d[i]))
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorkloadResult {
    pub scenario: String,
    pub spec: WorkloadSpec,
    pub outputs: Vec<u64>,
    pub expected: Vec<u64>,
    pub oracle_pass: bool,
    /// Cost of one execution: one packed pass for SIMD methods, one lane
    /// for the bit-wise method.
    pub ledger: CostLedger,
    pub estimated_ms: f64,
    pub predicted: Predicted,
    pub reconciliation: Reconciliation,
    pub diagnostics: Vec<String>,
}

fn evaluate(ctx: &mut EvalContext, kind: WorkloadKind, x: &[Vec<u64>; 4], bits: u32) -> Result<EncVec> {
    let f = WorkloadInputs::factor_max(kind, bits) as i128;
    let full = (1i128 << bits) - 1;
    let a = ctx.encrypt_vec_bounded(&x[0], Interval::new(0, f))?;
    let b = ctx.encrypt_vec_bounded(&x[1], Interval::new(0, f))?;
    let c = ctx.encrypt_vec_bounded(&x[2], Interval::new(0, full))?;
    match kind {
        WorkloadKind::W1 => {
            let ab = ctx.v_mul(&a, &b)?;
            compare::lt(ctx, &ab, &c)
        }
        WorkloadKind::W2 => {
            let m = compare::lt(ctx, &a, &b)?;
            ctx.v_mask_mul(&m, &c)
        }
        WorkloadKind::W3 => {
            let d = ctx.encrypt_vec_bounded(&x[3], Interval::new(0, full))?;
            let ab = ctx.v_mul(&a, &b)?;
            let m = compare::lt(ctx, &ab, &c)?;
            ctx.v_mask_mul(&m, &d)
        }
    }
}

/// Runs a workload on explicit inputs.
pub fn execute(spec: &WorkloadSpec, cfg: &ContextConfig, inputs: &WorkloadInputs) -> Result<WorkloadResult> {
    spec.validate()?;
    inputs.check()?;
    if inputs.len() != spec.slots {
        return Err(Error::ContextMismatch(format!("{} input lanes for {} slots", inputs.len(), spec.slots)));
    }
    let scenario = spec.scenario_id();
    let cols = |i: usize| -> Vec<u64> { [&inputs.a, &inputs.b, &inputs.c, &inputs.d][i].clone() };

    let (outputs, ledger, estimated_ms, diagnostics) = if spec.method.simd() {
        let mut ctx = cfg.context(spec.method, spec.bits, spec.slots)?;
        let out = evaluate(&mut ctx, spec.kind, &[cols(0), cols(1), cols(2), cols(3)], spec.bits)?;
        (ctx.decrypt_vec(&out), ctx.ledger.clone(), ctx.estimated_ms(), ctx.diagnostics.clone())
    } else {
        let mut outputs = Vec::with_capacity(spec.slots);
        let mut ledger = CostLedger::default();
        let mut ms = 0f64;
        let mut diagnostics = Vec::new();
        for i in 0..spec.slots {
            let mut ctx = cfg.context(spec.method, spec.bits, 1)?;
            let lane = [vec![inputs.a[i]], vec![inputs.b[i]], vec![inputs.c[i]], vec![inputs.d[i]]];
            let out = evaluate(&mut ctx, spec.kind, &lane, spec.bits)?;
            outputs.extend(ctx.decrypt_vec(&out));
            ledger = ledger.max_with(&ctx.ledger);
            ms = ms.max(ctx.estimated_ms());
            diagnostics.append(&mut ctx.diagnostics);
        }
        (outputs, ledger, ms, diagnostics)
    };

    let expected = expected_outputs(spec.kind, inputs);
    let params = WordParams::for_bits(spec.bits)?;
    let predicted = predict_scenario(&scenario, spec.method, spec.bits, params.p, params.r, &spec.kind.op_mix())?;
    let reconciliation = reconcile(&predicted, &scenario, &ledger)?;
    Ok(WorkloadResult {
        scenario,
        spec: *spec,
        oracle_pass: outputs == expected,
        outputs,
        expected,
        ledger,
        estimated_ms,
        predicted,
        reconciliation,
        diagnostics,
    })
}

/// Draws inputs from the spec's seed and runs the workload.
pub fn run(spec: &WorkloadSpec, cfg: &ContextConfig) -> Result<WorkloadResult> {
    execute(spec, cfg, &draw_inputs(spec))
}

fn run_kind(kind: WorkloadKind, spec: &WorkloadSpec) -> Result<WorkloadResult> {
    if spec.kind != kind {
        return Err(Error::InvalidParameter(format!("spec is {}, expected {kind}", spec.kind)));
    }
    run(spec, &ContextConfig::default())
}

pub fn run_w1(spec: &WorkloadSpec) -> Result<WorkloadResult> {
    run_kind(WorkloadKind::W1, spec)
}

pub fn run_w2(spec: &WorkloadSpec) -> Result<WorkloadResult> {
    run_kind(WorkloadKind::W2, spec)
}

pub fn run_w3(spec: &WorkloadSpec) -> Result<WorkloadResult> {
    run_kind(WorkloadKind::W3, spec)
}

/// Per-lane share of a run's cost. Depth is not divided.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AmortizedCost {
    pub counters: Vec<(String, f64)>,
    pub max_depth: u32,
    pub estimated_ms: f64,
}

impl AmortizedCost {
    pub fn get(&self, name: &str) -> Option<f64> {
        self.counters.iter().find(|(n, _)| n == name).map(|&(_, v)| v)
    }
}

/// Divides every counter and the time estimate by `slot_count` for SIMD
/// methods. Bit-wise results already describe one lane.
pub fn amortize(result: &WorkloadResult, slot_count: usize) -> Result<AmortizedCost> {
    if slot_count == 0 {
        return Err(Error::InvalidParameter("slot count must be at least 1".into()));
    }
    let div = if result.spec.method.simd() { slot_count as f64 } else { 1.0 };
    let counters = result
        .ledger
        .counters()
        .iter()
        .filter(|(n, _)| *n != "max_depth")
        .map(|&(n, v)| (n.to_string(), v as f64 / div))
        .collect();
    Ok(AmortizedCost { counters, max_depth: result.ledger.max_depth, estimated_ms: result.estimated_ms / div })
}
