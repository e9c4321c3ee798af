use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use crate::emulator::{EvalContext, Interval, WordBackend, WordCipher};
use crate::error::{Error, Result};
use crate::modmath::{lagrange_sign_poly, lt_bivariate_coeffs, paterson_stockmeyer, power, power_table, SignPoly};

fn cached<T: Send + Sync + 'static>(
    cell: &'static OnceLock<Mutex<HashMap<u64, Arc<T>>>>,
    p: u64,
    build: impl FnOnce(u64) -> Result<T>,
) -> Result<Arc<T>> {
    let map = cell.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(v) = map.lock().expect("cache lock").get(&p) {
        return Ok(v.clone());
    }
    let v = Arc::new(build(p)?);
    map.lock().expect("cache lock").insert(p, v.clone());
    Ok(v)
}

pub(crate) fn sign_poly(p: u64) -> Result<Arc<SignPoly>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<SignPoly>>>> = OnceLock::new();
    cached(&CACHE, p, lagrange_sign_poly)
}

pub(crate) fn bivariate(p: u64) -> Result<Arc<Vec<Vec<u64>>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Vec<Vec<u64>>>>>> = OnceLock::new();
    cached(&CACHE, p, lt_bivariate_coeffs)
}

fn require_field(ct: &WordCipher) -> Result<u64> {
    let (p, r) = ct.base();
    if r != 1 {
        return Err(Error::InvalidParameter(format!("expected a ciphertext over F_p, got modulus {p}^{r}")));
    }
    Ok(p)
}

fn constant_like(ctx: &mut EvalContext, like: &WordCipher, c: u64) -> Result<WordCipher> {
    // c = 0*x + c keeps the operand's depth and context
    let zero = ctx.ct_mul_scalar(like, 0)?;
    let n = like.len();
    ctx.ct_add_plain(&zero, &vec![c; n])
}

/// `[a < b]` lane-wise by evaluating the sign polynomial on `a - b`.
/// Precondition: the centered difference stays within the window of size p.
pub fn lt_interp(ctx: &mut EvalContext, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
    let p = require_field(a)?;
    require_field(b)?;
    let half = ((p - 1) / 2) as i128;
    let diff_range = a.range().sub(b.range());
    if !diff_range.within(-half, half) {
        ctx.range_violation(format!(
            "difference range [{}, {}] leaves the centered window of F_{p}",
            diff_range.lo, diff_range.hi
        ))?;
    }
    ctx.ledger.comparisons += 1;
    let poly = sign_poly(p)?;
    let mut out = ctx.unmetered(|c| -> Result<WordCipher> {
        let d = c.ct_sub(a, b)?;
        let mut be = WordBackend { ctx: c };
        match paterson_stockmeyer(&mut be, &poly, &d)? {
            Ok(v) => Ok(v),
            Err(k) => constant_like(be.ctx, &d, k),
        }
    })?;
    out.set_flag_range();
    Ok(out)
}

/// `1 - (a - b)^(p-1)`: 1 where the lanes are equal.
pub fn eq_fermat(ctx: &mut EvalContext, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
    require_field(a)?;
    require_field(b)?;
    ctx.ledger.equalities += 1;
    let d = ctx.unmetered(|c| c.ct_sub(a, b))?;
    fermat_is_zero(ctx, &d)
}

/// Equality against a plaintext lane vector.
pub fn eq_fermat_plain(ctx: &mut EvalContext, a: &WordCipher, k: &[u64]) -> Result<WordCipher> {
    let p = require_field(a)?;
    ctx.ledger.equalities += 1;
    let neg: Vec<u64> = k.iter().map(|&v| (p - v % p) % p).collect();
    let d = ctx.unmetered(|c| c.ct_add_plain(a, &neg))?;
    fermat_is_zero(ctx, &d)
}

pub(crate) fn fermat_is_zero(ctx: &mut EvalContext, d: &WordCipher) -> Result<WordCipher> {
    let p = require_field(d)?;
    let n = d.len();
    let mut out = ctx.unmetered(|c| -> Result<WordCipher> {
        let e = power(&mut WordBackend { ctx: c }, d, p - 1)?;
        c.ct_sub_from_plain(&vec![1; n], &e)
    })?;
    out.set_flag_range();
    Ok(out)
}

enum Lin {
    Const(u64),
    Enc(WordCipher),
}

fn lin_combo(ctx: &mut EvalContext, coeffs: &[u64], pows: &[Option<WordCipher>]) -> Result<Lin> {
    let mut acc: Option<WordCipher> = None;
    for (j, &c) in coeffs.iter().enumerate().skip(1) {
        if c == 0 {
            continue;
        }
        let term = ctx.ct_mul_scalar(pows[j].as_ref().expect("power present"), c)?;
        acc = Some(match acc {
            None => term,
            Some(prev) => ctx.ct_add(&prev, &term)?,
        });
    }
    Ok(match acc {
        None => Lin::Const(coeffs[0]),
        Some(v) if coeffs[0] != 0 => {
            let n = v.len();
            Lin::Enc(ctx.ct_add_plain(&v, &vec![coeffs[0]; n])?)
        }
        Some(v) => Lin::Enc(v),
    })
}

/// Bivariate `[x < y]` for full-range digits x, y in [0, p).
pub(crate) fn lt_bivariate(ctx: &mut EvalContext, x: &WordCipher, y: &WordCipher) -> Result<WordCipher> {
    let p = require_field(x)?;
    require_field(y)?;
    let c = bivariate(p)?;
    let deg = (p - 1) as usize;
    let mut out = ctx.unmetered(|ctx| -> Result<WordCipher> {
        let xp = power_table(&mut WordBackend { ctx }, x, deg)?;
        let yp = power_table(&mut WordBackend { ctx }, y, deg)?;
        let mut acc: Option<WordCipher> = None;
        let mut constant = 0u64;
        for (i, row) in c.iter().enumerate() {
            let g = lin_combo(ctx, row, &yp)?;
            let term = match (i, g) {
                (_, Lin::Const(0)) => None,
                (0, Lin::Const(k)) => {
                    constant = k;
                    None
                }
                (0, Lin::Enc(v)) => Some(v),
                (_, Lin::Const(k)) => Some(ctx.ct_mul_scalar(xp[i].as_ref().expect("power"), k)?),
                (_, Lin::Enc(v)) => Some(ctx.ct_mul(&v, xp[i].as_ref().expect("power"))?),
            };
            if let Some(t) = term {
                acc = Some(match acc {
                    None => t,
                    Some(prev) => ctx.ct_add(&prev, &t)?,
                });
            }
        }
        match acc {
            Some(v) if constant != 0 => {
                let n = v.len();
                ctx.ct_add_plain(&v, &vec![constant; n])
            }
            Some(v) => Ok(v),
            None => constant_like(ctx, x, constant),
        }
    })?;
    out.set_flag_range();
    Ok(out)
}

/// Bivariate `[x < k]` with a plaintext right operand: the y-polynomials
/// become plaintext lane vectors, so only x's powers cost levels.
pub(crate) fn lt_bivariate_plain(ctx: &mut EvalContext, x: &WordCipher, k: &[u64]) -> Result<WordCipher> {
    let p = require_field(x)?;
    let c = bivariate(p)?;
    let deg = (p - 1) as usize;
    let n = x.len();
    let lanes: Vec<u64> = (0..n).map(|i| k.get(i).copied().unwrap_or(0) % p).collect();
    let g: Vec<Vec<u64>> = c
        .iter()
        .map(|row| {
            lanes
                .iter()
                .map(|&y| row.iter().rev().fold(0u64, |acc, &cj| (acc * y + cj) % p))
                .collect()
        })
        .collect();
    let mut out = ctx.unmetered(|ctx| -> Result<WordCipher> {
        let xp = power_table(&mut WordBackend { ctx }, x, deg)?;
        let mut acc = constant_like(ctx, x, 0)?;
        acc = ctx.ct_add_plain(&acc, &g[0])?;
        for i in 1..=deg {
            if g[i].iter().all(|&v| v == 0) {
                continue;
            }
            let t = ctx.ct_mul_plain(xp[i].as_ref().expect("power"), &g[i])?;
            acc = ctx.ct_add(&acc, &t)?;
        }
        Ok(acc)
    })?;
    out.set_flag_range();
    Ok(out)
}

impl WordCipher {
    pub(crate) fn set_flag_range(&mut self) {
        self.range = Interval::new(0, 1);
        self.overflow = false;
    }
}
