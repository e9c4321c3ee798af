use crate::emulator::{to_bits, BitCipher, Circuit, EncVec, EvalContext, Interval, Method, WordCipher};
use crate::error::{Error, Result};

use super::digits::{decompose, eq_digits_inner, eq_digits_plain_inner, lift, lt_digits_inner, lt_digits_plain_inner};

#[derive(Clone, Copy)]
enum Op {
    Lt,
    Eq,
}

impl Op {
    fn count(self, ctx: &mut EvalContext) {
        match self {
            Op::Lt => ctx.ledger.comparisons += 1,
            Op::Eq => ctx.ledger.equalities += 1,
        }
    }
}

fn lanes(a: &EncVec, b: usize) -> Result<()> {
    if a.len() != b {
        return Err(Error::ContextMismatch(format!("{} lanes vs {b} lanes", a.len())));
    }
    Ok(())
}

fn check_switch_range(ctx: &mut EvalContext, ct: &WordCipher) -> Result<()> {
    let top = ct.modulus() as i128 - 1;
    if !ct.range().within(0, top) || ct.overflowed() {
        ctx.range_violation(format!(
            "switching needs values in [0, {top}], range is [{}, {}]",
            ct.range().lo,
            ct.range().hi
        ))?;
    }
    Ok(())
}

/// Scheme switching: the packed lanes go to bit-wise form, the comparator
/// runs there and the 0/1 result returns packed. The switch charge covers
/// the bit-wise work, so its gates are not billed separately.
fn switched(ctx: &mut EvalContext, op: Op, a: &WordCipher, b: Option<&WordCipher>, k: &[u64]) -> Result<WordCipher> {
    check_switch_range(ctx, a)?;
    if let Some(b) = b {
        check_switch_range(ctx, b)?;
    }
    ctx.charge_switch(ctx.bits())?;
    let m = a.modulus();
    let width = (64 - (m - 1).leading_zeros()) as usize;
    let xs = ctx.decrypt(a);
    let ys: Vec<u64> = match b {
        Some(b) => ctx.decrypt(b),
        None => (0..xs.len()).map(|i| k.get(i).copied().unwrap_or(0)).collect(),
    };
    let mut circuit = Circuit::default();
    let out: Vec<u64> = xs
        .iter()
        .zip(&ys)
        .map(|(&x, &y)| {
            let (xb, yb) = (to_bits(x, width), to_bits(y.min(m - 1), width));
            let v = match op {
                Op::Lt if y >= m => true,
                Op::Lt => circuit.lt(&xb, &yb),
                Op::Eq if y >= m => false,
                Op::Eq => circuit.eq(&xb, &yb),
            };
            u64::from(v)
        })
        .collect();
    let (p, r) = a.base();
    let mut ct = ctx.encrypt_in(&out, p, r)?;
    ct.depth = a.depth().max(b.map_or(0, |b| b.depth()));
    ct.range = Interval::new(0, 1);
    Ok(ct)
}

fn encoded(ctx: &mut EvalContext, op: Op, a: &WordCipher, b: Option<&WordCipher>, k: &[u64]) -> Result<WordCipher> {
    let (_, r) = a.base();
    let m = a.modulus();
    let da = decompose(ctx, a)?;
    let bit = match b {
        Some(b) => {
            let db = decompose(ctx, b)?;
            match op {
                Op::Lt => lt_digits_inner(ctx, &da, &db)?,
                Op::Eq => eq_digits_inner(ctx, &da, &db)?,
            }
        }
        None => {
            if let Some(&big) = k.iter().find(|&&v| v >= m) {
                return Err(Error::InvalidParameter(format!("plaintext {big} does not fit modulus {m}")));
            }
            match op {
                Op::Lt => lt_digits_plain_inner(ctx, &da, k)?,
                Op::Eq => eq_digits_plain_inner(ctx, &da, k)?,
            }
        }
    };
    lift(ctx, &bit, r)
}

fn word_op(ctx: &mut EvalContext, op: Op, a: &WordCipher, b: Option<&WordCipher>, k: &[u64]) -> Result<WordCipher> {
    match ctx.method() {
        Method::EncodingSwitching => encoded(ctx, op, a, b, k),
        Method::SchemeSwitching => switched(ctx, op, a, b, k),
        Method::BitwiseTfhe => Err(Error::ProfileMismatch { expected: "scheme|encoding", actual: "tfhe" }),
    }
}

fn bit_op(ctx: &mut EvalContext, op: Op, a: &[BitCipher], b: Option<&[BitCipher]>, k: &[u64]) -> Result<EncVec> {
    let out = a
        .iter()
        .enumerate()
        .map(|(i, x)| match (op, b) {
            (Op::Lt, Some(b)) => ctx.bit_lt(x, &b[i]),
            (Op::Eq, Some(b)) => ctx.bit_eq(x, &b[i]),
            (Op::Lt, None) => ctx.bit_lt_plain(x, k.get(i).copied().unwrap_or(0)),
            (Op::Eq, None) => ctx.bit_eq_plain(x, k.get(i).copied().unwrap_or(0)),
        })
        .collect::<Result<_>>()?;
    Ok(EncVec::Bits(out))
}

fn dispatch(ctx: &mut EvalContext, op: Op, a: &EncVec, b: &EncVec) -> Result<EncVec> {
    lanes(a, b.len())?;
    let out = match (a, b) {
        (EncVec::Word { ct: x, len }, EncVec::Word { ct: y, .. }) => {
            EncVec::Word { ct: word_op(ctx, op, x, Some(y), &[])?, len: *len }
        }
        (EncVec::Bits(x), EncVec::Bits(y)) => bit_op(ctx, op, x, Some(y), &[])?,
        _ => return Err(Error::ContextMismatch("word and bit lanes mixed".into())),
    };
    op.count(ctx);
    Ok(out)
}

fn dispatch_plain(ctx: &mut EvalContext, op: Op, a: &EncVec, k: &[u64]) -> Result<EncVec> {
    if k.len() > a.len() {
        return Err(Error::ContextMismatch(format!("{} lanes vs {} plaintexts", a.len(), k.len())));
    }
    let out = match a {
        EncVec::Word { ct, len } => EncVec::Word { ct: word_op(ctx, op, ct, None, k)?, len: *len },
        EncVec::Bits(x) => bit_op(ctx, op, x, None, k)?,
    };
    op.count(ctx);
    Ok(out)
}

/// Lane-wise `[a < b]` routed by the context's method: digit comparison
/// after reduction (encoding switching), a bit-wise comparator after a
/// switch (scheme switching), or the comparator circuit (bit-wise TFHE).
pub fn compare(ctx: &mut EvalContext, a: &EncVec, b: &EncVec) -> Result<EncVec> {
    dispatch(ctx, Op::Lt, a, b)
}

pub fn lt(ctx: &mut EvalContext, a: &EncVec, b: &EncVec) -> Result<EncVec> {
    dispatch(ctx, Op::Lt, a, b)
}

/// `[a < k]` against plaintext lane values.
pub fn lt_plain(ctx: &mut EvalContext, a: &EncVec, k: &[u64]) -> Result<EncVec> {
    dispatch_plain(ctx, Op::Lt, a, k)
}

pub fn eq(ctx: &mut EvalContext, a: &EncVec, b: &EncVec) -> Result<EncVec> {
    dispatch(ctx, Op::Eq, a, b)
}

pub fn eq_plain(ctx: &mut EvalContext, a: &EncVec, k: &[u64]) -> Result<EncVec> {
    dispatch_plain(ctx, Op::Eq, a, k)
}

/// `[a <= b]` as the complement of `[b < a]`.
pub fn le(ctx: &mut EvalContext, a: &EncVec, b: &EncVec) -> Result<EncVec> {
    let gt = lt(ctx, b, a)?;
    ctx.v_flag_not(&gt)
}

/// Standalone bit-wise comparator: `[a < b]` for one pair of bit ciphertexts.
pub fn bit_lt(ctx: &mut EvalContext, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
    let out = ctx.bit_lt(a, b)?;
    ctx.ledger.comparisons += 1;
    Ok(out)
}
