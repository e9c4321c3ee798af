use crate::error::{Error, Result};
use crate::modmath::{centered, ceil_log2, power, ScalarBackend, Tracked, EvalCount};
use crate::negaring::{monomial, nega_mul, NegaPoly};

/// Result of an XCMP evaluation with its ring-multiplication cost.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct XcmpOutcome {
    /// +1 when a <= b, -1 otherwise.
    pub sign: i64,
    pub ring_mults: u32,
    pub depth: u32,
}

impl XcmpOutcome {
    /// The sign mapped to a 0/1 "a <= b" bit.
    pub fn le_bit(&self) -> u64 {
        u64::from(self.sign > 0)
    }
}

fn check_domain(v: u64, n: usize) -> Result<()> {
    if v as usize >= n {
        return Err(Error::DomainTooLarge { value: v, n });
    }
    Ok(())
}

/// XCMP: the centered constant coefficient of T * X^a * X^-b in
/// Z_p[x]/(x^n + 1) with T = 1 + x + ... + x^(n-1).
pub fn lt_xcmp(a: u64, b: u64, n: usize, p: u64) -> Result<i64> {
    Ok(xcmp(a, b, n, p)?.sign)
}

pub fn xcmp(a: u64, b: u64, n: usize, p: u64) -> Result<XcmpOutcome> {
    if !n.is_power_of_two() || n < 2 {
        return Err(Error::InvalidParameter(format!("ring degree {n} is not a power of two")));
    }
    if p < 3 {
        return Err(Error::InvalidModulus(p));
    }
    check_domain(a, n)?;
    check_domain(b, n)?;
    let t = NegaPoly::all_ones(n, p)?;
    // T * X^a is plaintext-by-monomial (a rotation with sign flips)
    let ta = nega_mul(&t, &monomial(a as i64, n, p)?)?;
    let c = nega_mul(&ta, &monomial(-(b as i64), n, p)?)?;
    let sign = centered(c.coeffs()[0], p);
    debug_assert!(sign == 1 || sign == -1);
    Ok(XcmpOutcome { sign, ring_mults: 1, depth: 1 })
}

/// Two-digit XCMP over the domain [0, n^2): digits base n compared
/// lexicographically, with the high-digit equality from a Fermat test over
/// F_p (needs p > n). Depth is metered on tracked scalars.
pub fn xcmp_wide(a: u64, b: u64, n: usize, p: u64) -> Result<XcmpOutcome> {
    let nn = n as u64;
    if a >= nn * nn || b >= nn * nn {
        return Err(Error::DomainTooLarge { value: a.max(b), n: n * n });
    }
    if p <= nn || !crate::modmath::is_prime(p) {
        return Err(Error::InvalidParameter(format!("wide XCMP needs a prime p > n, got p = {p}, n = {n}")));
    }
    let (ah, al, bh, bl) = (a / nn, a % nn, b / nn, b % nn);
    let le_lo = xcmp(al, bl, n, p)?;
    let ge_hi = xcmp(bh, ah, n, p)?;
    let mut be = ScalarBackend { p, count: EvalCount::default() };
    let bit = |o: XcmpOutcome| Tracked { value: o.le_bit(), depth: o.depth };
    // lt_hi = 1 - [b_hi <= a_hi]
    let lt_hi = Tracked { value: 1 - ge_hi.le_bit(), depth: ge_hi.depth };
    let diff = Tracked { value: (ah + p - bh) % p, depth: 0 };
    let pw = if p > 2 { power(&mut be, &diff, p - 1)? } else { diff };
    let eq_hi = Tracked { value: (1 + p - pw.value) % p, depth: pw.depth };
    let guarded = crate::modmath::PolyBackend::mul(&mut be, &eq_hi, &bit(le_lo))?;
    let le = (lt_hi.value + guarded.value) % p;
    let depth = lt_hi.depth.max(guarded.depth);
    debug_assert_eq!(depth, ceil_log2(p - 1).max(1) + 1);
    Ok(XcmpOutcome { sign: if le == 1 { 1 } else { -1 }, ring_mults: 2, depth })
}
