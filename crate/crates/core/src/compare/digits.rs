use crate::emulator::{EvalContext, Interval, WordCipher};
use crate::error::{Error, Result};

use super::interp::{fermat_is_zero, lt_bivariate, lt_bivariate_plain};

/// Base-p digits of an integer, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitVec {
    digits: Vec<u64>,
    p: u64,
}

impl DigitVec {
    pub fn from_value(value: u64, p: u64, r: u32) -> Result<Self> {
        let m = p.checked_pow(r).ok_or_else(|| Error::InvalidParameter(format!("{p}^{r} overflows")))?;
        if value >= m {
            return Err(Error::InvalidParameter(format!("{value} does not fit {r} base-{p} digits")));
        }
        let mut digits = vec![0u64; r as usize];
        let mut v = value;
        for d in digits.iter_mut().rev() {
            *d = v % p;
            v /= p;
        }
        Ok(Self { digits, p })
    }

    pub fn digits(&self) -> &[u64] {
        &self.digits
    }

    pub fn base(&self) -> u64 {
        self.p
    }

    pub fn value(&self) -> u64 {
        self.digits.iter().fold(0, |acc, &d| acc * self.p + d)
    }
}

/// Digit-encoded lanes: one ciphertext over F_p per digit, most significant first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DigitCipher {
    pub digits: Vec<WordCipher>,
    pub p: u64,
}

impl DigitCipher {
    pub fn depth(&self) -> u32 {
        self.digits.iter().map(|d| d.depth()).max().unwrap_or(0)
    }
}

/// Ceiling of a non-negative real cost term.
pub(crate) fn ceil_count(x: f64) -> u64 {
    let c = x.ceil();
    // guard against 3.0000000001 style noise
    if (x - x.round()).abs() < 1e-9 {
        x.round() as u64
    } else {
        c as u64
    }
}

/// Modeled reduction cost (Z_{p^r} to digits) in non-scalar multiplications.
pub fn reduction_mults(p: u64, r: u32) -> u64 {
    ceil_count((r as f64).powi(2) * (p as f64).sqrt())
}

/// Modeled lifting cost (F_p back to Z_{p^r}) in non-scalar multiplications.
pub fn lift_mults(p: u64, r: u32) -> u64 {
    ceil_count((r as f64 * p as f64).sqrt())
}

/// Encrypts lanes directly in digit form.
pub fn encrypt_digits(ctx: &mut EvalContext, values: &[u64], p: u64, r: u32) -> Result<DigitCipher> {
    let per_lane: Vec<DigitVec> = values.iter().map(|&v| DigitVec::from_value(v, p, r)).collect::<Result<_>>()?;
    let digits = (0..r as usize)
        .map(|i| {
            let lane: Vec<u64> = per_lane.iter().map(|d| d.digits[i]).collect();
            let mut ct = ctx.encrypt_in(&lane, p, 1)?;
            ct.range = Interval::new(0, p as i128 - 1);
            Ok(ct)
        })
        .collect::<Result<_>>()?;
    Ok(DigitCipher { digits, p })
}

pub fn decrypt_digits(ctx: &EvalContext, ct: &DigitCipher) -> Vec<u64> {
    let n = ct.digits.first().map_or(0, |d| d.len());
    (0..n)
        .map(|lane| ct.digits.iter().fold(0u64, |acc, d| acc * ct.p + ctx.decrypt(d)[lane]))
        .collect()
}

/// Reduction from Z_{p^r} to base-p digits; charged as a cost rule.
pub fn decompose(ctx: &mut EvalContext, ct: &WordCipher) -> Result<DigitCipher> {
    let (p, r) = ct.base();
    let top = ct.modulus() as i128 - 1;
    if !ct.range().within(0, top) || ct.overflowed() {
        ctx.range_violation(format!(
            "decomposition needs values in [0, {top}], range is [{}, {}]",
            ct.range().lo,
            ct.range().hi
        ))?;
    }
    ctx.ledger.nonscalar_mults += reduction_mults(p, r);
    let values = ctx.decrypt(ct);
    let mut out = encrypt_digits_unchecked(ctx, &values, p, r)?;
    for d in &mut out.digits {
        d.depth = ct.depth();
    }
    Ok(out)
}

fn encrypt_digits_unchecked(ctx: &mut EvalContext, values: &[u64], p: u64, r: u32) -> Result<DigitCipher> {
    let m = p.pow(r);
    let reduced: Vec<u64> = values.iter().map(|v| v % m).collect();
    encrypt_digits(ctx, &reduced, p, r)
}

/// Lifts a 0/1 result over F_p into Z_{p^r}; charged as a cost rule.
pub fn lift(ctx: &mut EvalContext, bit: &WordCipher, r: u32) -> Result<WordCipher> {
    let (p, _) = bit.base();
    ctx.ledger.nonscalar_mults += lift_mults(p, r);
    let values = ctx.decrypt(bit);
    let mut out = ctx.encrypt_in(&values, p, r)?;
    out.depth = bit.depth();
    out.range = bit.range();
    Ok(out)
}

fn check_digits(a: &DigitCipher, b: &DigitCipher) -> Result<()> {
    if a.p != b.p || a.digits.len() != b.digits.len() || a.digits.is_empty() {
        return Err(Error::ContextMismatch(format!(
            "digit encodings ({}, {}) and ({}, {})",
            a.p,
            a.digits.len(),
            b.p,
            b.digits.len()
        )));
    }
    Ok(())
}

/// Most-significant-first lexicographic combine: acc = lt_i + eq_i * acc.
fn combine(ctx: &mut EvalContext, lts: Vec<WordCipher>, eqs: Vec<WordCipher>) -> Result<WordCipher> {
    let r = lts.len();
    let mut acc = lts[r - 1].clone();
    for i in (0..r - 1).rev() {
        let guarded = ctx.ct_mul(&eqs[i], &acc)?;
        acc = ctx.ct_add(&lts[i], &guarded)?;
        acc.set_flag_range();
    }
    Ok(acc)
}

fn and_tree(ctx: &mut EvalContext, mut bits: Vec<WordCipher>) -> Result<WordCipher> {
    while bits.len() > 1 {
        let mut next = Vec::with_capacity(bits.len().div_ceil(2));
        for pair in bits.chunks(2) {
            next.push(if pair.len() == 2 { ctx.ct_mul(&pair[0], &pair[1])? } else { pair[0].clone() });
        }
        bits = next;
    }
    let mut out = bits.pop().expect("at least one digit");
    out.set_flag_range();
    Ok(out)
}

/// `[value(a) < value(b)]` over digit encodings; result over F_p.
pub fn lt_digits(ctx: &mut EvalContext, a: &DigitCipher, b: &DigitCipher) -> Result<WordCipher> {
    check_digits(a, b)?;
    ctx.ledger.comparisons += 1;
    lt_digits_inner(ctx, a, b)
}

pub(crate) fn lt_digits_inner(ctx: &mut EvalContext, a: &DigitCipher, b: &DigitCipher) -> Result<WordCipher> {
    let r = a.digits.len();
    let mut lts = Vec::with_capacity(r);
    let mut eqs = Vec::with_capacity(r);
    for i in 0..r {
        lts.push(lt_bivariate(ctx, &a.digits[i], &b.digits[i])?);
        if i + 1 < r {
            let d = ctx.unmetered(|c| c.ct_sub(&a.digits[i], &b.digits[i]))?;
            eqs.push(fermat_is_zero(ctx, &d)?);
        }
    }
    combine(ctx, lts, eqs)
}

fn plain_digit_lanes(k: &[u64], n: usize, p: u64, r: u32) -> Result<Vec<Vec<u64>>> {
    let m = p.pow(r);
    let mut out = vec![vec![0u64; n]; r as usize];
    for lane in 0..n {
        let v = k.get(lane).copied().unwrap_or(0);
        if v >= m {
            return Err(Error::InvalidParameter(format!("plaintext {v} does not fit modulus {m}")));
        }
        let dv = DigitVec::from_value(v, p, r)?;
        for (i, &d) in dv.digits().iter().enumerate() {
            out[i][lane] = d;
        }
    }
    Ok(out)
}

/// `[value(a) < k]` against plaintext lane values.
pub fn lt_digits_plain(ctx: &mut EvalContext, a: &DigitCipher, k: &[u64]) -> Result<WordCipher> {
    ctx.ledger.comparisons += 1;
    lt_digits_plain_inner(ctx, a, k)
}

pub(crate) fn lt_digits_plain_inner(ctx: &mut EvalContext, a: &DigitCipher, k: &[u64]) -> Result<WordCipher> {
    let r = a.digits.len();
    let n = a.digits[0].len();
    let kd = plain_digit_lanes(k, n, a.p, r as u32)?;
    let mut lts = Vec::with_capacity(r);
    let mut eqs = Vec::with_capacity(r);
    for i in 0..r {
        lts.push(lt_bivariate_plain(ctx, &a.digits[i], &kd[i])?);
        if i + 1 < r {
            let neg: Vec<u64> = kd[i].iter().map(|&v| (a.p - v) % a.p).collect();
            let d = ctx.unmetered(|c| c.ct_add_plain(&a.digits[i], &neg))?;
            eqs.push(fermat_is_zero(ctx, &d)?);
        }
    }
    combine(ctx, lts, eqs)
}

/// `[value(a) = value(b)]` as a product of per-digit Fermat tests.
pub fn eq_digits(ctx: &mut EvalContext, a: &DigitCipher, b: &DigitCipher) -> Result<WordCipher> {
    check_digits(a, b)?;
    ctx.ledger.equalities += 1;
    eq_digits_inner(ctx, a, b)
}

pub(crate) fn eq_digits_inner(ctx: &mut EvalContext, a: &DigitCipher, b: &DigitCipher) -> Result<WordCipher> {
    let mut eqs = Vec::with_capacity(a.digits.len());
    for (x, y) in a.digits.iter().zip(&b.digits) {
        let d = ctx.unmetered(|c| c.ct_sub(x, y))?;
        eqs.push(fermat_is_zero(ctx, &d)?);
    }
    and_tree(ctx, eqs)
}

pub fn eq_digits_plain(ctx: &mut EvalContext, a: &DigitCipher, k: &[u64]) -> Result<WordCipher> {
    ctx.ledger.equalities += 1;
    eq_digits_plain_inner(ctx, a, k)
}

pub(crate) fn eq_digits_plain_inner(ctx: &mut EvalContext, a: &DigitCipher, k: &[u64]) -> Result<WordCipher> {
    let r = a.digits.len();
    let n = a.digits[0].len();
    let kd = plain_digit_lanes(k, n, a.p, r as u32)?;
    let mut eqs = Vec::with_capacity(r);
    for i in 0..r {
        let neg: Vec<u64> = kd[i].iter().map(|&v| (a.p - v) % a.p).collect();
        let d = ctx.unmetered(|c| c.ct_add_plain(&a.digits[i], &neg))?;
        eqs.push(fermat_is_zero(ctx, &d)?);
    }
    and_tree(ctx, eqs)
}

/// Depth ceiling for digit comparison at input width `bits`:
/// ceil(log2(log_p 2^b) + log2(p - 1) + 4).
pub fn digit_depth_bound(p: u64, bits: u32) -> u32 {
    let digits = bits as f64 / (p as f64).log2();
    (digits.log2() + ((p - 1) as f64).log2() + 4.0 - 1e-9).ceil() as u32
}
