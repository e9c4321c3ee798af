//! Concrete cost predictions, prediction-vs-ledger reconciliation and the
//! method advisor.
//!
//! Asymptotic cost rows are concretized with unit constants (O(b) becomes b
//! gates), so reconciliation checks ratio bands rather than equality.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::compare::{digit_depth_bound, lift_mults, reduction_mults};
use crate::emulator::{Calibration, CostLedger, Method};
use crate::error::{Error, Result};
use crate::modmath::ceil_log2;

/// Methods with a cost row. Only the first three can run scenarios.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum CostMethod {
    BitwiseTfhe,
    SchemeSwitching,
    EncodingSwitching,
    Interpolation,
    Xcmp,
    Ckks,
    FunctionalBootstrap,
}

impl From<Method> for CostMethod {
    fn from(m: Method) -> Self {
        match m {
            Method::BitwiseTfhe => CostMethod::BitwiseTfhe,
            Method::SchemeSwitching => CostMethod::SchemeSwitching,
            Method::EncodingSwitching => CostMethod::EncodingSwitching,
        }
    }
}

impl FromStr for CostMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if let Ok(m) = s.parse::<Method>() {
            return Ok(m.into());
        }
        match s.to_ascii_lowercase().as_str() {
            "interp" | "interpolation" => Ok(CostMethod::Interpolation),
            "xcmp" => Ok(CostMethod::Xcmp),
            "ckks" => Ok(CostMethod::Ckks),
            "fbs" | "functional-bootstrap" => Ok(CostMethod::FunctionalBootstrap),
            other => Err(Error::UnsupportedMethod(other.to_string())),
        }
    }
}

/// One row of the method comparison table, as formulas.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ComplexityRow {
    pub method: &'static str,
    pub nonlinear_depth: &'static str,
    pub nonlinear_complexity: &'static str,
    pub linear_depth: &'static str,
    pub linear_complexity: &'static str,
    pub simd: bool,
    pub exact: bool,
    pub general: bool,
}

pub fn complexity_table() -> Vec<ComplexityRow> {
    let row = |method, nd, nc, ld, lc, simd, exact, general| ComplexityRow {
        method,
        nonlinear_depth: nd,
        nonlinear_complexity: nc,
        linear_depth: ld,
        linear_complexity: lc,
        simd,
        exact,
        general,
    };
    vec![
        row("ckks-approx", "O(log d)", "O(sqrt d) mults", "1", "1 mult", true, false, false),
        row("interpolation", "O(log p)", "O(sqrt p) mults", "1", "1 mult", true, true, false),
        row("xcmp", "O(1)", "1 ring mult", "-", "-", false, true, false),
        row("functional-bootstrap", "1 bootstrap", "O(2^b)", "1", "1 mult", true, true, false),
        row("tfhe", "-", "O(b) gates", "-", "O(b^2) gates", false, true, true),
        row("scheme", "switch", "O(2^b) per switch", "1", "1 mult", true, true, true),
        row(
            "encoding",
            "log2(log_p 2^b) + log2(p-1) + 4",
            "O(d^2 sqrt p) mults",
            "1",
            "1 mult",
            true,
            true,
            true,
        ),
    ]
}

/// Predicted per-operation costs for one parameter point.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct OpPrediction {
    /// Levels consumed by one comparison.
    pub compare_depth: u32,
    /// Levels consumed by one equality test.
    pub equal_depth: u32,
    pub compare_mults: u64,
    pub equal_mults: u64,
    pub compare_gates: u64,
    pub equal_gates: u64,
    /// Gates for one b-bit addition / multiplication / masked selection.
    pub add_gates: u64,
    pub mul_gates: u64,
    pub select_gates: u64,
    pub switch_cost_units: u64,
}

/// Per-operation predictions for `method` at input width `b` with (p, r)
/// and `d` base-p digits.
pub fn predict(method: CostMethod, b: u32, p: u64, r: u32, d: u32) -> Result<OpPrediction> {
    if b == 0 || b > 32 {
        return Err(Error::InvalidParameter(format!("bit width {b} outside [1, 32]")));
    }
    let b64 = b as u64;
    Ok(match method {
        CostMethod::BitwiseTfhe => OpPrediction {
            compare_gates: b64,
            equal_gates: b64,
            add_gates: b64,
            mul_gates: b64 * b64,
            select_gates: b64,
            ..Default::default()
        },
        CostMethod::SchemeSwitching => OpPrediction { switch_cost_units: 1 << b, ..Default::default() },
        CostMethod::EncodingSwitching => {
            require_prime(p)?;
            if (r as f64) * (p as f64).log2() < b as f64 {
                return Err(Error::InvalidParameter(format!("{p}^{r} cannot hold {b}-bit inputs")));
            }
            let d = d.max(1);
            let logp = ceil_log2(p - 1);
            OpPrediction {
                compare_depth: digit_depth_bound(p, b),
                equal_depth: logp + ceil_log2(d as u64),
                compare_mults: 2 * reduction_mults(p, d) + lift_mults(p, d),
                equal_mults: 2 * reduction_mults(p, d) + lift_mults(p, d),
                ..Default::default()
            }
        }
        CostMethod::Interpolation => {
            require_prime(p)?;
            let sq = (p as f64).sqrt().ceil() as u64;
            OpPrediction {
                compare_depth: ceil_log2(p),
                equal_depth: ceil_log2(p - 1),
                compare_mults: sq,
                equal_mults: ceil_log2(p - 1) as u64,
                ..Default::default()
            }
        }
        CostMethod::Xcmp => OpPrediction { compare_depth: 1, compare_mults: 1, ..Default::default() },
        CostMethod::Ckks | CostMethod::FunctionalBootstrap => {
            return Err(Error::UnsupportedMethod(format!("{method:?} has no runnable cost model")))
        }
    })
}

fn require_prime(p: u64) -> Result<()> {
    if !crate::modmath::is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    Ok(())
}

/// Modeled time of one scheme switch at width `b`, in seconds.
pub fn switch_seconds(b: u32, cal: &Calibration) -> f64 {
    cal.switch_unit_s * (1u64 << b) as f64
}

/// Least-squares constant c for the model t = c * 2^b through the origin.
pub fn fit_switch_unit(points: &[(u32, f64)]) -> f64 {
    let (num, den) = points.iter().fold((0.0, 0.0), |(n, d), &(b, t)| {
        let x = (1u64 << b) as f64;
        (n + x * t, d + x * x)
    });
    if den == 0.0 {
        0.0
    } else {
        num / den
    }
}

/// Mean of the per-point constants t / 2^b.
pub fn calibrate_switch_unit(points: &[(u32, f64)]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    points.iter().map(|&(b, t)| t / (1u64 << b) as f64).sum::<f64>() / points.len() as f64
}

/// Scenario-level predicted counters.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Predicted {
    pub scenario: String,
    pub nonscalar_mults: u64,
    pub gate_bootstraps: u64,
    pub comparisons: u64,
    pub equalities: u64,
    pub masked_mults: u64,
    pub switches: u64,
    pub switch_cost_units: u64,
    pub max_depth: u32,
}

/// Counts of high-level operations in a scenario, used to scale the
/// per-operation predictions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OpMix {
    /// Independent ciphertext executions (lanes for bit-wise, 1 for SIMD).
    pub executions: u64,
    pub ct_mults: u64,
    pub compares: u64,
    pub equals: u64,
    pub masked: u64,
    pub adds: u64,
    /// Plaintext-constant multiplications (bit-wise pays a shift-and-add
    /// multiplier).
    pub plain_mults: u64,
    /// Critical path: ciphertext multiplications, comparisons and equalities
    /// in sequence.
    pub chain_mults: u32,
    pub chain_compares: u32,
    pub chain_equals: u32,
    /// When set, refreshes cap the depth at the budget.
    pub depth_cap: Option<u32>,
}

pub fn predict_scenario(scenario: &str, method: Method, b: u32, p: u64, r: u32, mix: &OpMix) -> Result<Predicted> {
    let op = predict(method.into(), b, p, r, r)?;
    let per_exec = |x: u64| x * mix.executions.max(1);
    let mut out = Predicted {
        scenario: scenario.to_string(),
        comparisons: mix.compares,
        equalities: mix.equals,
        masked_mults: mix.masked,
        ..Default::default()
    };
    match method {
        Method::BitwiseTfhe => {
            let g = mix.compares * op.compare_gates
                + mix.equals * op.equal_gates
                + mix.ct_mults * op.mul_gates
                + mix.masked * op.select_gates
                + mix.adds * op.add_gates
                + mix.plain_mults * op.mul_gates;
            out.gate_bootstraps = per_exec(g);
        }
        Method::SchemeSwitching => {
            out.switches = mix.compares + mix.equals;
            out.switch_cost_units = out.switches * op.switch_cost_units;
            out.nonscalar_mults = mix.ct_mults + mix.masked;
            out.max_depth = mix.chain_mults;
        }
        Method::EncodingSwitching => {
            out.nonscalar_mults =
                mix.ct_mults + mix.masked + mix.compares * op.compare_mults + mix.equals * op.equal_mults;
            out.max_depth = mix.chain_mults
                + mix.chain_compares * op.compare_depth
                + mix.chain_equals * op.equal_depth;
        }
    }
    if let Some(cap) = mix.depth_cap {
        out.max_depth = out.max_depth.min(cap);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Warn,
    Fail,
}

/// Measured/predicted ratios and the verdict for one scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Reconciliation {
    pub scenario: String,
    pub ratios: Vec<(String, f64)>,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

/// Mult counts beyond this multiple of the prediction raise a warning.
pub const SOFT_BAND: f64 = 4.0;

fn ratio(measured: u64, predicted: u64) -> f64 {
    if measured == 0 && predicted == 0 {
        0.0
    } else if predicted == 0 {
        f64::INFINITY
    } else {
        measured as f64 / predicted as f64
    }
}

/// Compares a ledger against its prediction.
pub fn reconcile(predicted: &Predicted, scenario: &str, ledger: &CostLedger) -> Result<Reconciliation> {
    if predicted.scenario != scenario {
        return Err(Error::ScenarioMismatch(predicted.scenario.clone(), scenario.to_string()));
    }
    let pairs: [(&str, u64, u64); 7] = [
        ("nonscalar_mults", ledger.nonscalar_mults, predicted.nonscalar_mults),
        ("gate_bootstraps", ledger.gate_bootstraps, predicted.gate_bootstraps),
        ("comparisons", ledger.comparisons, predicted.comparisons),
        ("equalities", ledger.equalities, predicted.equalities),
        ("masked_mults", ledger.masked_mults, predicted.masked_mults),
        ("switches", ledger.switches, predicted.switches),
        ("switch_cost_units", ledger.switch_cost_units, predicted.switch_cost_units),
    ];
    let mut verdict = Verdict::Pass;
    let mut notes = Vec::new();
    let mut ratios = Vec::with_capacity(pairs.len() + 1);
    for (name, m, p) in pairs {
        let q = ratio(m, p);
        ratios.push((name.to_string(), q));
        let banded = matches!(name, "nonscalar_mults" | "gate_bootstraps");
        if banded && q > SOFT_BAND {
            verdict = verdict.max_with(Verdict::Warn);
            notes.push(format!("{name}: measured {m} exceeds {SOFT_BAND}x predicted {p}"));
        } else if !banded && m != p {
            verdict = verdict.max_with(Verdict::Warn);
            notes.push(format!("{name}: measured {m}, predicted {p}"));
        }
    }
    ratios.push(("max_depth".into(), ratio(ledger.max_depth as u64, predicted.max_depth as u64)));
    if ledger.max_depth > predicted.max_depth {
        verdict = Verdict::Fail;
        notes.push(format!("depth {} exceeds predicted {}", ledger.max_depth, predicted.max_depth));
    }
    Ok(Reconciliation { scenario: scenario.to_string(), ratios, verdict, notes })
}

impl Verdict {
    fn max_with(self, other: Verdict) -> Verdict {
        use Verdict::*;
        match (self, other) {
            (Fail, _) | (_, Fail) => Fail,
            (Warn, _) | (_, Warn) => Warn,
            _ => Pass,
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Pass => "pass",
            Verdict::Warn => "warn",
            Verdict::Fail => "fail",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OpMixKind {
    LinearOnly,
    NonlinearOnly,
    Mixed,
}

impl FromStr for OpMixKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "linear" | "linear-only" => Ok(OpMixKind::LinearOnly),
            "nonlinear" | "nonlinear-only" => Ok(OpMixKind::NonlinearOnly),
            "mixed" => Ok(OpMixKind::Mixed),
            other => Err(Error::InvalidParameter(format!("unknown op mix '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AdvisorQuery {
    pub op_mix: OpMixKind,
    pub simd_useful: bool,
    pub exact_required: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    WordWise,
    BitwiseTfhe,
    WordWiseNonlinear,
    CkksApproximation,
    EncodingOrSchemeSwitching,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Recommendation {
    pub family: Family,
    pub text: String,
}

/// Method-selection decision table; total over all 12 queries.
pub fn advise(q: AdvisorQuery) -> Recommendation {
    let (family, text) = match (q.op_mix, q.simd_useful, q.exact_required) {
        (OpMixKind::LinearOnly, _, _) => (Family::WordWise, "word-wise FHE (BGV, BFV or CKKS)"),
        (OpMixKind::NonlinearOnly, false, _) => (Family::BitwiseTfhe, "bit-wise TFHE"),
        (OpMixKind::NonlinearOnly, true, _) => (
            Family::WordWiseNonlinear,
            "word-wise non-linear evaluation: polynomial interpolation, digit decomposition or XCMP",
        ),
        (OpMixKind::Mixed, false, _) => (Family::BitwiseTfhe, "bit-wise TFHE"),
        (OpMixKind::Mixed, true, false) => (Family::CkksApproximation, "CKKS with polynomial approximation"),
        (OpMixKind::Mixed, true, true) => (
            Family::EncodingOrSchemeSwitching,
            "Encoding Switching or Scheme Switching; Encoding Switching preferred at b >= 8",
        ),
    };
    Recommendation { family, text: text.to_string() }
}

/// Every query in table order (mix, simd, exact).
pub fn all_queries() -> Vec<AdvisorQuery> {
    let mut out = Vec::with_capacity(12);
    for op_mix in [OpMixKind::LinearOnly, OpMixKind::NonlinearOnly, OpMixKind::Mixed] {
        for simd_useful in [false, true] {
            for exact_required in [false, true] {
                out.push(AdvisorQuery { op_mix, simd_useful, exact_required });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn encoding_depth_example() {
        let o = predict(CostMethod::EncodingSwitching, 8, 5, 4, 4).unwrap();
        assert_eq!(o.compare_depth, 8);
        assert_eq!(predict(CostMethod::Xcmp, 8, 5, 4, 4).unwrap().compare_depth, 1);
        assert!(matches!(predict(CostMethod::Ckks, 8, 5, 4, 4), Err(Error::UnsupportedMethod(_))));
        assert!(matches!("bfv".parse::<CostMethod>(), Err(Error::UnsupportedMethod(_))));
    }

    #[test]
    fn scheme_ratio_and_fit() {
        let u6 = predict(CostMethod::SchemeSwitching, 6, 3, 4, 4).unwrap().switch_cost_units;
        let u8 = predict(CostMethod::SchemeSwitching, 8, 5, 4, 4).unwrap().switch_cost_units;
        assert_eq!(u8 / u6, 4);
        let pts = [(6u32, 43.8), (8, 162.7)];
        let mean = calibrate_switch_unit(&pts);
        assert!((mean - 0.66).abs() < 0.005);
        let ls = fit_switch_unit(&pts);
        assert!((ls - 0.638).abs() < 0.001);
        let cal = Calibration { switch_unit_s: mean, ..Calibration::default() };
        for (b, t) in pts {
            assert!((switch_seconds(b, &cal) - t).abs() / t < 0.25);
        }
    }

    #[test]
    fn monotone_in_bits() {
        for m in [CostMethod::BitwiseTfhe, CostMethod::SchemeSwitching] {
            let mut prev = 0;
            for b in 1..=32 {
                let o = predict(m, b, 5, 4, 4).unwrap();
                let cost = o.compare_gates + o.switch_cost_units;
                assert!(cost >= prev);
                prev = cost;
            }
        }
        let mut prev = 0;
        for b in 1..=32 {
            let o = predict(CostMethod::EncodingSwitching, b, 5, 14, 14).unwrap();
            assert!(o.compare_depth >= prev);
            prev = o.compare_depth;
        }
    }

    #[test]
    fn reconcile_rules() {
        let pred = Predicted { scenario: "s".into(), max_depth: 3, nonscalar_mults: 10, ..Default::default() };
        let ok = CostLedger { max_depth: 3, nonscalar_mults: 12, ..Default::default() };
        assert_eq!(reconcile(&pred, "s", &ok).unwrap().verdict, Verdict::Pass);
        let deep = CostLedger { max_depth: 4, ..ok.clone() };
        assert_eq!(reconcile(&pred, "s", &deep).unwrap().verdict, Verdict::Fail);
        let heavy = CostLedger { nonscalar_mults: 41, ..ok.clone() };
        assert_eq!(reconcile(&pred, "s", &heavy).unwrap().verdict, Verdict::Warn);
        assert!(matches!(reconcile(&pred, "t", &ok), Err(Error::ScenarioMismatch(..))));
        let zero = Predicted { scenario: "z".into(), ..Default::default() };
        let r = reconcile(&zero, "z", &CostLedger::default()).unwrap();
        assert!(r.ratios.iter().all(|(_, q)| *q == 0.0));
        assert_eq!(r.verdict, Verdict::Pass);
    }

    #[test]
    fn bit_mul_fit_band() {
        for b in [6u32, 8, 12, 16] {
            let measured = (b * (b + 1) / 2 + (1..b).map(|w| 5 * w - 3).sum::<u32>()) as f64;
            let pred = predict(CostMethod::BitwiseTfhe, b, 5, 4, 4).unwrap().mul_gates as f64;
            let q = measured / pred;
            assert!((0.25..=4.0).contains(&q), "b={b} ratio {q}");
        }
    }

    #[test]
    fn advisor_is_total() {
        let qs = all_queries();
        assert_eq!(qs.len(), 12);
        let mixed_exact_no_simd = AdvisorQuery { op_mix: OpMixKind::Mixed, simd_useful: false, exact_required: true };
        assert_eq!(advise(mixed_exact_no_simd).family, Family::BitwiseTfhe);
        let mixed_simd_exact = AdvisorQuery { op_mix: OpMixKind::Mixed, simd_useful: true, exact_required: true };
        assert!(advise(mixed_simd_exact).text.contains("preferred at b >= 8"));
    }
}
