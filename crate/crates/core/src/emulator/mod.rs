//! Functional ciphertext emulation with a cost ledger.
//!
//! Ciphertexts carry their plaintext in the clear together with metadata
//! (multiplicative depth, a conservative value interval) so every
//! homomorphic operation can be metered without real cryptography.

mod bits;
mod config;
mod lanes;
mod word;

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modmath::is_prime;

pub use bits::{BitCipher, Gate, ALLOWED_WIDTHS};
pub use config::{ContextConfig, RngName, CONFIG_ENV};
pub use lanes::EncVec;
pub use word::{Interval, WordBackend, WordCipher};
pub(crate) use bits::{to_bits, Circuit};

/// The three methods able to compose linear and non-linear operations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "tfhe")]
    BitwiseTfhe,
    #[serde(rename = "scheme")]
    SchemeSwitching,
    #[serde(rename = "encoding")]
    EncodingSwitching,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::BitwiseTfhe, Method::SchemeSwitching, Method::EncodingSwitching];

    pub fn name(self) -> &'static str {
        match self {
            Method::BitwiseTfhe => "tfhe",
            Method::SchemeSwitching => "scheme",
            Method::EncodingSwitching => "encoding",
        }
    }

    /// Whether linear operations are batched across slots.
    pub fn simd(self) -> bool {
        !matches!(self, Method::BitwiseTfhe)
    }

    pub fn word_wise(self) -> bool {
        self.simd()
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "tfhe" | "bitwise" | "bitwise-tfhe" => Ok(Method::BitwiseTfhe),
            "scheme" | "scheme-switching" => Ok(Method::SchemeSwitching),
            "encoding" | "encoding-switching" => Ok(Method::EncodingSwitching),
            other => Err(Error::UnsupportedMethod(other.to_string())),
        }
    }
}

/// Reporting-only conversion constants from counts to model-estimated time.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    /// Milliseconds per gate bootstrap.
    pub gate_ms: f64,
    /// Seconds per switch cost unit (one unit = one LUT entry, 2^b per switch).
    pub switch_unit_s: f64,
}

impl Default for Calibration {
    fn default() -> Self {
        Self { gate_ms: 15.0, switch_unit_s: 0.66 }
    }
}

/// Bits of ciphertext modulus consumed per multiplicative level.
pub const DEFAULT_LEVEL_BITS: u32 = 30;

/// Plaintext/ciphertext parameters for the word-wise methods at one input width.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordParams {
    pub p: u64,
    pub r: u32,
    pub log2_q: u32,
}

impl WordParams {
    pub fn new(p: u64, r: u32, log2_q: u32) -> Result<Self> {
        if !is_prime(p) || r == 0 {
            return Err(Error::InvalidParameter(format!("(p, r) = ({p}, {r}) needs p prime and r >= 1")));
        }
        p.checked_pow(r)
            .filter(|m| *m < (1u64 << 62))
            .ok_or_else(|| Error::InvalidParameter(format!("{p}^{r} too large")))?;
        Ok(Self { p, r, log2_q })
    }

    /// Default parameters per input width. The 6-bit row uses (3, 4) because
    /// p must be prime for interpolation.
    pub fn for_bits(bits: u32) -> Result<Self> {
        match bits {
            6 => Self::new(3, 4, 256),
            8 => Self::new(5, 4, 320),
            12 => Self::new(7, 5, 488),
            16 => Self::new(17, 4, 648),
            _ => Err(Error::InvalidParameter(format!(
                "no word-wise parameter set for {bits}-bit inputs (supported: 6, 8, 12, 16)"
            ))),
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p.pow(self.r)
    }

    pub fn default_depth_budget(&self, level_bits: u32) -> u32 {
        self.log2_q / level_bits.max(1)
    }
}

/// Cost rules and budget for one method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MethodProfile {
    pub method: Method,
    pub depth_budget: u32,
    pub calibration: Calibration,
}

impl MethodProfile {
    /// Budget from the modulus table for word-wise methods; the bit-wise
    /// method bootstraps every gate, so its leveled budget is unbounded.
    pub fn default_for(method: Method, bits: u32) -> Result<Self> {
        let depth_budget = if method.word_wise() {
            WordParams::for_bits(bits)?.default_depth_budget(DEFAULT_LEVEL_BITS)
        } else {
            u32::MAX
        };
        Ok(Self { method, depth_budget, calibration: Calibration::default() })
    }
}

/// Counters for every metered homomorphic operation.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    pub nonscalar_mults: u64,
    pub scalar_mults: u64,
    pub additions: u64,
    pub rotations: u64,
    pub comparisons: u64,
    pub equalities: u64,
    pub masked_mults: u64,
    pub gate_bootstraps: u64,
    pub switches: u64,
    pub switch_cost_units: u64,
    pub refreshes: u64,
    pub max_depth: u32,
}

impl CostLedger {
    pub fn estimated_ms(&self, cal: &Calibration) -> f64 {
        self.gate_bootstraps as f64 * cal.gate_ms + self.switch_cost_units as f64 * cal.switch_unit_s * 1000.0
    }

    /// Counter-wise difference `self - earlier`; depth is kept from `self`.
    pub fn since(&self, earlier: &CostLedger) -> CostLedger {
        CostLedger {
            nonscalar_mults: self.nonscalar_mults - earlier.nonscalar_mults,
            scalar_mults: self.scalar_mults - earlier.scalar_mults,
            additions: self.additions - earlier.additions,
            rotations: self.rotations - earlier.rotations,
            comparisons: self.comparisons - earlier.comparisons,
            equalities: self.equalities - earlier.equalities,
            masked_mults: self.masked_mults - earlier.masked_mults,
            gate_bootstraps: self.gate_bootstraps - earlier.gate_bootstraps,
            switches: self.switches - earlier.switches,
            switch_cost_units: self.switch_cost_units - earlier.switch_cost_units,
            refreshes: self.refreshes - earlier.refreshes,
            max_depth: self.max_depth,
        }
    }

    /// Counter names and values in report order.
    pub fn counters(&self) -> [(&'static str, u64); 12] {
        [
            ("nonscalar_mults", self.nonscalar_mults),
            ("scalar_mults", self.scalar_mults),
            ("additions", self.additions),
            ("rotations", self.rotations),
            ("comparisons", self.comparisons),
            ("equalities", self.equalities),
            ("masked_mults", self.masked_mults),
            ("gate_bootstraps", self.gate_bootstraps),
            ("switches", self.switches),
            ("switch_cost_units", self.switch_cost_units),
            ("refreshes", self.refreshes),
            ("max_depth", self.max_depth as u64),
        ]
    }

    /// Counter-wise maximum.
    pub fn max_with(&self, other: &CostLedger) -> CostLedger {
        CostLedger {
            nonscalar_mults: self.nonscalar_mults.max(other.nonscalar_mults),
            scalar_mults: self.scalar_mults.max(other.scalar_mults),
            additions: self.additions.max(other.additions),
            rotations: self.rotations.max(other.rotations),
            comparisons: self.comparisons.max(other.comparisons),
            equalities: self.equalities.max(other.equalities),
            masked_mults: self.masked_mults.max(other.masked_mults),
            gate_bootstraps: self.gate_bootstraps.max(other.gate_bootstraps),
            switches: self.switches.max(other.switches),
            switch_cost_units: self.switch_cost_units.max(other.switch_cost_units),
            refreshes: self.refreshes.max(other.refreshes),
            max_depth: self.max_depth.max(other.max_depth),
        }
    }

    /// Adds another ledger's counters; depth takes the maximum.
    pub fn absorb(&mut self, other: &CostLedger) {
        self.nonscalar_mults += other.nonscalar_mults;
        self.scalar_mults += other.scalar_mults;
        self.additions += other.additions;
        self.rotations += other.rotations;
        self.comparisons += other.comparisons;
        self.equalities += other.equalities;
        self.masked_mults += other.masked_mults;
        self.gate_bootstraps += other.gate_bootstraps;
        self.switches += other.switches;
        self.switch_cost_units += other.switch_cost_units;
        self.refreshes += other.refreshes;
        self.max_depth = self.max_depth.max(other.max_depth);
    }
}

/// What to do when a comparison precondition on value ranges cannot be proven.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum RangePolicy {
    #[default]
    Strict,
    Diagnose,
}

static NEXT_CONTEXT_ID: AtomicU64 = AtomicU64::new(1);

/// One evaluation session. Not shared between threads while in use; distinct
/// contexts are fully independent.
#[derive(Debug)]
pub struct EvalContext {
    id: u64,
    profile: MethodProfile,
    bits: u32,
    slot_count: usize,
    params: Option<WordParams>,
    pub ledger: CostLedger,
    pub diagnostics: Vec<String>,
    pub range_policy: RangePolicy,
    /// Refresh (bootstrap) operands instead of failing when the budget runs out.
    pub auto_refresh: bool,
    metering: bool,
}

impl EvalContext {
    /// Context with the default profile and parameters for `method` at `bits`.
    pub fn new(method: Method, bits: u32, slot_count: usize) -> Result<Self> {
        let profile = MethodProfile::default_for(method, bits)?;
        let params = if method.word_wise() { Some(WordParams::for_bits(bits)?) } else { None };
        Self::with_profile(profile, bits, slot_count, params)
    }

    pub fn with_profile(
        profile: MethodProfile,
        bits: u32,
        slot_count: usize,
        params: Option<WordParams>,
    ) -> Result<Self> {
        if profile.depth_budget == 0 {
            return Err(Error::InvalidParameter("depth budget must be positive".into()));
        }
        if slot_count == 0 {
            return Err(Error::InvalidParameter("slot count must be at least 1".into()));
        }
        let slot_count = if profile.method.word_wise() {
            let params = params.ok_or_else(|| {
                Error::InvalidParameter(format!("{} needs (p, r) parameters", profile.method))
            })?;
            if bits >= 63 || params.modulus() < (1u64 << bits) {
                return Err(Error::InvalidParameter(format!(
                    "p^r = {} cannot hold {bits}-bit inputs",
                    params.modulus()
                )));
            }
            slot_count
        } else {
            1
        };
        if matches!(profile.method, Method::BitwiseTfhe | Method::SchemeSwitching)
            && !ALLOWED_WIDTHS.contains(&(bits as usize))
        {
            return Err(Error::InvalidParameter(format!("unsupported bit width {bits}")));
        }
        Ok(Self {
            id: NEXT_CONTEXT_ID.fetch_add(1, Ordering::Relaxed),
            profile,
            bits,
            slot_count,
            params,
            ledger: CostLedger::default(),
            diagnostics: Vec::new(),
            range_policy: RangePolicy::Strict,
            auto_refresh: false,
            metering: true,
        })
    }

    pub fn method(&self) -> Method {
        self.profile.method
    }

    pub fn profile(&self) -> &MethodProfile {
        &self.profile
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn slot_count(&self) -> usize {
        self.slot_count
    }

    pub fn params(&self) -> Result<WordParams> {
        self.params
            .ok_or_else(|| Error::UnsupportedMethod(format!("{} has no word-wise parameters", self.method())))
    }

    pub fn depth_budget(&self) -> u32 {
        self.profile.depth_budget
    }

    pub fn estimated_ms(&self) -> f64 {
        self.ledger.estimated_ms(&self.profile.calibration)
    }

    pub(crate) fn id(&self) -> u64 {
        self.id
    }

    pub(crate) fn note_depth(&mut self, depth: u32) {
        self.ledger.max_depth = self.ledger.max_depth.max(depth);
    }

    pub(crate) fn diagnose(&mut self, msg: String) {
        if self.metering {
            self.diagnostics.push(msg);
        }
    }

    /// Reports a violated comparison precondition according to the policy.
    pub(crate) fn range_violation(&mut self, msg: String) -> Result<()> {
        match self.range_policy {
            RangePolicy::Strict => Err(Error::RangeViolation(msg)),
            RangePolicy::Diagnose => {
                self.diagnostics.push(format!("range violation: {msg}"));
                Ok(())
            }
        }
    }

    /// Runs `f` with interval diagnostics suppressed (for residue-level
    /// polynomial evaluation where wrap-around is the intended semantics).
    pub(crate) fn unmetered<T>(&mut self, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = self.metering;
        self.metering = false;
        let out = f(self);
        self.metering = saved;
        out
    }

    pub(crate) fn metering(&self) -> bool {
        self.metering
    }

    /// Scheme-switching charge: one switch and 2^b cost units.
    pub fn charge_switch(&mut self, bits: u32) -> Result<()> {
        if self.method() != Method::SchemeSwitching {
            return Err(Error::ProfileMismatch { expected: "scheme", actual: self.method().name() });
        }
        self.ledger.switches += 1;
        self.ledger.switch_cost_units += 1u64 << bits;
        Ok(())
    }
}
