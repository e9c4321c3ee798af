use crate::error::{Error, Result};
use crate::modmath::{add_mod, mul_mod, sub_mod, PolyBackend};

use super::EvalContext;

/// Conservative bounds on the integer a ciphertext's slots stand for.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interval {
    pub lo: i128,
    pub hi: i128,
}

impl Interval {
    pub fn new(lo: i128, hi: i128) -> Self {
        debug_assert!(lo <= hi);
        Self { lo, hi }
    }

    pub fn point(v: i128) -> Self {
        Self { lo: v, hi: v }
    }

    pub fn of_values(values: &[u64]) -> Self {
        let lo = values.iter().copied().min().unwrap_or(0) as i128;
        let hi = values.iter().copied().max().unwrap_or(0) as i128;
        Self { lo, hi }
    }

    pub fn add(self, o: Self) -> Self {
        Self { lo: self.lo.saturating_add(o.lo), hi: self.hi.saturating_add(o.hi) }
    }

    pub fn sub(self, o: Self) -> Self {
        Self { lo: self.lo.saturating_sub(o.hi), hi: self.hi.saturating_sub(o.lo) }
    }

    /// Saturates at the i128 limits; anything that large has long since
    /// been flagged as wrapping.
    pub fn mul(self, o: Self) -> Self {
        let c = [
            self.lo.saturating_mul(o.lo),
            self.lo.saturating_mul(o.hi),
            self.hi.saturating_mul(o.lo),
            self.hi.saturating_mul(o.hi),
        ];
        Self { lo: *c.iter().min().unwrap(), hi: *c.iter().max().unwrap() }
    }

    pub fn hull(self, o: Self) -> Self {
        Self { lo: self.lo.min(o.lo), hi: self.hi.max(o.hi) }
    }

    pub fn min(self, o: Self) -> Self {
        Self { lo: self.lo.min(o.lo), hi: self.hi.min(o.hi) }
    }

    pub fn magnitude(self) -> u128 {
        self.lo.unsigned_abs().max(self.hi.unsigned_abs())
    }

    pub fn within(self, lo: i128, hi: i128) -> bool {
        self.lo >= lo && self.hi <= hi
    }
}

/// Emulated word-wise ciphertext: a slot vector over Z_{p^r}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WordCipher {
    pub(crate) slots: Vec<u64>,
    pub(crate) p: u64,
    pub(crate) r: u32,
    pub(crate) modulus: u64,
    pub(crate) depth: u32,
    pub(crate) range: Interval,
    pub(crate) overflow: bool,
    pub(crate) ctx: u64,
}

impl WordCipher {
    pub fn slots(&self) -> &[u64] {
        &self.slots
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn base(&self) -> (u64, u32) {
        (self.p, self.r)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn range(&self) -> Interval {
        self.range
    }

    /// Whether the range meter saw a possible wrap modulo p^r.
    pub fn overflowed(&self) -> bool {
        self.overflow
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }
}

impl EvalContext {
    /// Encrypts into Z_{p^r} with the context parameters; missing slots are zero.
    pub fn encrypt(&mut self, values: &[u64]) -> Result<WordCipher> {
        let params = self.params()?;
        self.encrypt_in(values, params.p, params.r)
    }

    /// Encrypts with an explicit plaintext modulus p^r (e.g. digit ciphertexts over F_p).
    pub fn encrypt_in(&mut self, values: &[u64], p: u64, r: u32) -> Result<WordCipher> {
        if values.len() > self.slot_count {
            return Err(Error::InvalidParameter(format!(
                "{} values exceed {} slots",
                values.len(),
                self.slot_count
            )));
        }
        let modulus = p.pow(r);
        let mut slots: Vec<u64> = values.iter().map(|v| v % modulus).collect();
        let range = if values.iter().all(|&v| v < modulus) {
            let mut r = Interval::of_values(values);
            if values.len() < self.slot_count {
                r = r.hull(Interval::point(0));
            }
            r
        } else {
            Interval::new(0, modulus as i128 - 1)
        };
        slots.resize(self.slot_count, 0);
        Ok(WordCipher { slots, p, r, modulus, depth: 0, range, overflow: false, ctx: self.id() })
    }

    /// Encryption with a declared bound on the plaintext (e.g. an input domain).
    pub fn encrypt_bounded(&mut self, values: &[u64], range: Interval) -> Result<WordCipher> {
        let mut ct = self.encrypt(values)?;
        ct.range = range;
        Ok(ct)
    }

    pub fn decrypt(&self, ct: &WordCipher) -> Vec<u64> {
        ct.slots.clone()
    }

    fn check_pair(&self, a: &WordCipher, b: &WordCipher) -> Result<()> {
        if a.ctx != self.id() || b.ctx != self.id() {
            return Err(Error::ContextMismatch("ciphertext from another context".into()));
        }
        if a.modulus != b.modulus {
            return Err(Error::ContextMismatch(format!("moduli {} and {}", a.modulus, b.modulus)));
        }
        Ok(())
    }

    fn check_own(&self, a: &WordCipher) -> Result<()> {
        if a.ctx != self.id() {
            return Err(Error::ContextMismatch("ciphertext from another context".into()));
        }
        Ok(())
    }

    fn check_plain(&self, a: &WordCipher, k: &[u64]) -> Result<()> {
        self.check_own(a)?;
        if k.len() > a.slots.len() {
            return Err(Error::ContextMismatch(format!(
                "plaintext of {} slots vs ciphertext of {}",
                k.len(),
                a.slots.len()
            )));
        }
        Ok(())
    }

    /// Applies the range meter to a fresh result.
    fn meter(&mut self, mut out: WordCipher, what: &str) -> WordCipher {
        let limit = out.modulus as u128 - 1;
        if out.range.magnitude() > limit {
            if !out.overflow && self.metering() {
                self.diagnose(format!(
                    "{what}: range [{}, {}] may wrap modulo {}",
                    out.range.lo, out.range.hi, out.modulus
                ));
            }
            out.overflow = true;
        }
        out
    }

    fn zip_slots(a: &WordCipher, b: &WordCipher, f: impl Fn(u64, u64) -> u64) -> Vec<u64> {
        a.slots.iter().zip(&b.slots).map(|(&x, &y)| f(x, y)).collect()
    }

    fn plain_lane(k: &[u64], i: usize) -> u64 {
        k.get(i).copied().unwrap_or(0)
    }

    pub fn ct_add(&mut self, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
        self.check_pair(a, b)?;
        let m = a.modulus;
        self.ledger.additions += 1;
        let out = WordCipher {
            slots: Self::zip_slots(a, b, |x, y| add_mod(x, y, m)),
            depth: a.depth.max(b.depth),
            range: a.range.add(b.range),
            overflow: a.overflow || b.overflow,
            ..a.clone()
        };
        Ok(self.meter(out, "add"))
    }

    pub fn ct_sub(&mut self, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
        self.check_pair(a, b)?;
        let m = a.modulus;
        self.ledger.additions += 1;
        let out = WordCipher {
            slots: Self::zip_slots(a, b, |x, y| sub_mod(x, y, m)),
            depth: a.depth.max(b.depth),
            range: a.range.sub(b.range),
            overflow: a.overflow || b.overflow,
            ..a.clone()
        };
        Ok(self.meter(out, "sub"))
    }

    /// Ciphertext-ciphertext product; consumes one level.
    pub fn ct_mul(&mut self, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
        self.check_pair(a, b)?;
        let (a, b) = self.fit_depth(a, b)?;
        let m = a.modulus;
        self.ledger.nonscalar_mults += 1;
        let depth = a.depth.max(b.depth) + 1;
        self.note_depth(depth);
        let out = WordCipher {
            slots: Self::zip_slots(&a, &b, |x, y| mul_mod(x, y, m)),
            depth,
            range: a.range.mul(b.range),
            overflow: a.overflow || b.overflow,
            ..a.clone()
        };
        Ok(self.meter(out, "mul"))
    }

    fn fit_depth(&mut self, a: &WordCipher, b: &WordCipher) -> Result<(WordCipher, WordCipher)> {
        let budget = self.depth_budget();
        let needed = a.depth.max(b.depth).saturating_add(1);
        if needed <= budget {
            return Ok((a.clone(), b.clone()));
        }
        if !self.auto_refresh {
            return Err(Error::DepthExceeded { needed, budget });
        }
        let mut a = a.clone();
        let mut b = b.clone();
        if a.depth + 1 > budget {
            a = self.ct_refresh(&a)?;
        }
        if b.depth + 1 > budget {
            b = self.ct_refresh(&b)?;
        }
        Ok((a, b))
    }

    /// Models a word-wise bootstrap: resets the level counter.
    pub fn ct_refresh(&mut self, a: &WordCipher) -> Result<WordCipher> {
        self.check_own(a)?;
        self.ledger.refreshes += 1;
        Ok(WordCipher { depth: 0, ..a.clone() })
    }

    /// Slot-wise product with a plaintext vector; no level consumed.
    pub fn ct_mul_plain(&mut self, a: &WordCipher, k: &[u64]) -> Result<WordCipher> {
        self.check_plain(a, k)?;
        let m = a.modulus;
        self.ledger.scalar_mults += 1;
        let slots = a.slots.iter().enumerate().map(|(i, &x)| mul_mod(x, Self::plain_lane(k, i) % m, m)).collect();
        let mut kr = Interval::of_values(k);
        if k.len() < a.slots.len() {
            kr = kr.hull(Interval::point(0));
        }
        let out = WordCipher { slots, range: a.range.mul(kr), ..a.clone() };
        Ok(self.meter(out, "mul_plain"))
    }

    /// Product with one scalar broadcast to every slot.
    pub fn ct_mul_scalar(&mut self, a: &WordCipher, k: u64) -> Result<WordCipher> {
        self.check_own(a)?;
        let m = a.modulus;
        self.ledger.scalar_mults += 1;
        let out = WordCipher {
            slots: a.slots.iter().map(|&x| mul_mod(x, k % m, m)).collect(),
            range: a.range.mul(Interval::point((k % m) as i128)),
            ..a.clone()
        };
        Ok(self.meter(out, "mul_scalar"))
    }

    pub fn ct_add_plain(&mut self, a: &WordCipher, k: &[u64]) -> Result<WordCipher> {
        self.check_plain(a, k)?;
        let m = a.modulus;
        self.ledger.additions += 1;
        let slots = a.slots.iter().enumerate().map(|(i, &x)| add_mod(x, Self::plain_lane(k, i) % m, m)).collect();
        let mut kr = Interval::of_values(k);
        if k.len() < a.slots.len() {
            kr = kr.hull(Interval::point(0));
        }
        let out = WordCipher { slots, range: a.range.add(kr), ..a.clone() };
        Ok(self.meter(out, "add_plain"))
    }

    /// `k - a` slot-wise.
    pub fn ct_sub_from_plain(&mut self, k: &[u64], a: &WordCipher) -> Result<WordCipher> {
        self.check_plain(a, k)?;
        let m = a.modulus;
        self.ledger.additions += 1;
        let slots = a.slots.iter().enumerate().map(|(i, &x)| sub_mod(Self::plain_lane(k, i) % m, x, m)).collect();
        let mut kr = Interval::of_values(k);
        if k.len() < a.slots.len() {
            kr = kr.hull(Interval::point(0));
        }
        let out = WordCipher { slots, range: kr.sub(a.range), ..a.clone() };
        Ok(self.meter(out, "sub_from_plain"))
    }

    /// Cyclic left rotation by `k` slots.
    pub fn ct_rotate(&mut self, a: &WordCipher, k: usize) -> Result<WordCipher> {
        self.check_own(a)?;
        let n = a.slots.len();
        if k >= n {
            return Err(Error::InvalidParameter(format!("rotation {k} out of range for {n} slots")));
        }
        self.ledger.rotations += 1;
        let mut slots = a.slots.clone();
        slots.rotate_left(k);
        Ok(WordCipher { slots, ..a.clone() })
    }

    /// Replicates slot `idx` into every slot: one mask multiply, then
    /// rotate-and-add doublings.
    pub fn ct_broadcast(&mut self, a: &WordCipher, idx: usize) -> Result<WordCipher> {
        self.check_own(a)?;
        let n = a.slots.len();
        if idx >= n {
            return Err(Error::InvalidParameter(format!("slot {idx} out of range for {n} slots")));
        }
        if n == 1 {
            return Ok(a.clone());
        }
        let mut mask = vec![0u64; n];
        mask[idx] = 1;
        let single = self.ct_mul_plain(a, &mask)?;
        let mut acc = single.clone();
        let mut covered = 1usize;
        while covered < n {
            let step = covered.min(n - covered);
            let part = if step == covered {
                acc.clone()
            } else {
                // keep only `step` consecutive copies ending at the original slot
                let mut keep = vec![0u64; n];
                for t in 0..step {
                    keep[(idx + n - t) % n] = 1;
                }
                self.ct_mul_plain(&acc, &keep)?
            };
            let shifted = self.ct_rotate(&part, covered % n)?;
            acc = self.ct_add(&acc, &shifted)?;
            covered += step;
        }
        // every slot holds a single copy of a[idx]
        acc.range = single.range.hull(a.range);
        acc.overflow = a.overflow;
        Ok(acc)
    }

    /// `mask ? x : y` as y + mask*(x - y); the result interval is the hull.
    pub fn ct_select(&mut self, mask: &WordCipher, x: &WordCipher, y: &WordCipher) -> Result<WordCipher> {
        let range = x.range.hull(y.range);
        self.select_with_range(mask, x, y, range)
    }

    /// Like [`ct_select`](Self::ct_select) when `mask = [x < y]`, so the
    /// result is min(x, y) and its interval is the interval minimum.
    pub fn ct_select_lesser(&mut self, mask: &WordCipher, x: &WordCipher, y: &WordCipher) -> Result<WordCipher> {
        let range = x.range.min(y.range);
        self.select_with_range(mask, x, y, range)
    }

    fn select_with_range(
        &mut self,
        mask: &WordCipher,
        x: &WordCipher,
        y: &WordCipher,
        range: Interval,
    ) -> Result<WordCipher> {
        self.check_pair(mask, x)?;
        self.check_pair(x, y)?;
        if !mask.range.within(0, 1) {
            self.range_violation(format!("select mask range [{}, {}] is not 0/1", mask.range.lo, mask.range.hi))?;
        }
        let diff = self.unmetered(|c| c.ct_sub(x, y))?;
        let prod = self.unmetered(|c| c.ct_mul(mask, &diff))?;
        self.ledger.masked_mults += 1;
        let mut out = self.unmetered(|c| c.ct_add(y, &prod))?;
        out.range = range;
        out.overflow = x.overflow || y.overflow || mask.overflow;
        Ok(out)
    }

    /// Product with a 0/1 mask; the result interval is the hull of 0 and `x`.
    pub fn ct_mask_mul(&mut self, mask: &WordCipher, x: &WordCipher) -> Result<WordCipher> {
        self.check_pair(mask, x)?;
        if !mask.range.within(0, 1) {
            self.range_violation(format!("mask range [{}, {}] is not 0/1", mask.range.lo, mask.range.hi))?;
        }
        let mut out = self.unmetered(|c| c.ct_mul(mask, x))?;
        self.ledger.masked_mults += 1;
        out.range = x.range.hull(Interval::point(0));
        out.overflow = x.overflow || mask.overflow;
        Ok(out)
    }

    /// Sum of all slots, replicated into every slot (rotate-and-add tree).
    pub fn ct_sum_slots(&mut self, a: &WordCipher) -> Result<WordCipher> {
        self.check_own(a)?;
        let n = a.slots.len();
        if !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("slot sum needs a power-of-two slot count, got {n}")));
        }
        let mut acc = a.clone();
        let mut step = 1;
        while step < n {
            let rot = self.ct_rotate(&acc, step)?;
            acc = self.ct_add(&acc, &rot)?;
            step <<= 1;
        }
        Ok(acc)
    }
}

/// Adapts an [`EvalContext`] for polynomial evaluation on ciphertexts.
pub struct WordBackend<'a> {
    pub ctx: &'a mut EvalContext,
}

impl PolyBackend for WordBackend<'_> {
    type Value = WordCipher;

    fn mul(&mut self, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
        self.ctx.ct_mul(a, b)
    }

    fn mul_scalar(&mut self, a: &WordCipher, k: u64) -> WordCipher {
        self.ctx.ct_mul_scalar(a, k).expect("operand from this context")
    }

    fn add(&mut self, a: &WordCipher, b: &WordCipher) -> Result<WordCipher> {
        self.ctx.ct_add(a, b)
    }

    fn add_scalar(&mut self, a: &WordCipher, k: u64) -> WordCipher {
        let n = a.slots.len();
        self.ctx.ct_add_plain(a, &vec![k; n]).expect("operand from this context")
    }
}

#[cfg(test)]
mod tests {
    use super::super::{EvalContext, Method, MethodProfile, WordParams};
    use super::*;

    fn ctx25(slots: usize) -> EvalContext {
        let profile = MethodProfile { depth_budget: 4, ..MethodProfile::default_for(Method::EncodingSwitching, 6).unwrap() };
        EvalContext::with_profile(profile, 4, slots, Some(WordParams::new(5, 2, 256).unwrap())).unwrap()
    }

    #[test]
    fn interval_arithmetic_saturates() {
        let big = Interval::new(-(1 << 100), 1 << 100);
        let sq = big.mul(big).mul(big);
        assert_eq!((sq.lo, sq.hi), (i128::MIN, i128::MAX));
        assert_eq!(sq.add(sq).hi, i128::MAX);
        assert_eq!(sq.sub(sq).lo, i128::MIN);
        assert_eq!(Interval::new(-2, 3).mul(Interval::new(-5, 1)), Interval::new(-15, 10));
    }

    #[test]
    fn add_examples() {
        let mut ctx = ctx25(2);
        let a = ctx.encrypt(&[1, 2]).unwrap();
        let b = ctx.encrypt(&[3, 4]).unwrap();
        let s = ctx.ct_add(&a, &b).unwrap();
        assert_eq!(ctx.decrypt(&s), vec![4, 6]);
        assert_eq!(ctx.ledger.additions, 1);
        assert!(!s.overflowed());

        let mut ctx = ctx25(1);
        let a = ctx.encrypt(&[24]).unwrap();
        let b = ctx.encrypt(&[1]).unwrap();
        let s = ctx.ct_add(&a, &b).unwrap();
        assert_eq!(ctx.decrypt(&s), vec![0]);
        assert!(s.overflowed());
        assert_eq!(ctx.diagnostics.len(), 1);
    }

    #[test]
    fn mul_depth_and_range() {
        let mut ctx = ctx25(2);
        let a = ctx.encrypt(&[2, 3]).unwrap();
        let b = ctx.encrypt(&[4, 5]).unwrap();
        let ab = ctx.ct_mul(&a, &b).unwrap();
        assert_eq!(ctx.decrypt(&ab), vec![8, 15]);
        assert_eq!(ab.depth(), 1);
        let abb = ctx.ct_mul(&ab, &b).unwrap();
        assert_eq!(abb.depth(), 2);
        assert_eq!(ctx.ledger.nonscalar_mults, 2);
        assert_eq!(ctx.ledger.max_depth, 2);

        let mut ctx = ctx25(1);
        let x = ctx.encrypt(&[20]).unwrap();
        let y = ctx.encrypt(&[20]).unwrap();
        let z = ctx.ct_mul(&x, &y).unwrap();
        assert!(z.overflowed());
        assert!(ctx.diagnostics[0].contains("mul"));
    }

    #[test]
    fn depth_budget_enforced() {
        let mut ctx = ctx25(1);
        let mut a = ctx.encrypt(&[2]).unwrap();
        let one = ctx.encrypt(&[1]).unwrap();
        for _ in 0..4 {
            a = ctx.ct_mul(&a, &one).unwrap();
        }
        assert_eq!(ctx.ct_mul(&a, &one), Err(Error::DepthExceeded { needed: 5, budget: 4 }));
        ctx.auto_refresh = true;
        let b = ctx.ct_mul(&a, &one).unwrap();
        assert_eq!(b.depth(), 1);
        assert_eq!(ctx.ledger.refreshes, 1);
    }

    #[test]
    fn plain_mul_and_rotation() {
        let mut ctx = ctx25(4);
        let a = ctx.encrypt(&[5, 7, 9, 11]).unwrap();
        let m = ctx.ct_mul_plain(&a, &[0, 0, 0, 1]).unwrap();
        assert_eq!(ctx.decrypt(&m), vec![0, 0, 0, 11]);
        assert_eq!(m.depth(), 0);
        assert_eq!(ctx.ledger.scalar_mults, 1);
        let same = ctx.ct_mul_plain(&a, &[1, 1, 1, 1]).unwrap();
        assert_eq!(ctx.decrypt(&same), ctx.decrypt(&a));

        let v = ctx.encrypt(&[1, 2, 3, 4]).unwrap();
        assert_eq!({ let t = ctx.ct_rotate(&v, 1).unwrap(); ctx.decrypt(&t) }, vec![2, 3, 4, 1]);
        assert_eq!({ let t = ctx.ct_rotate(&v, 0).unwrap(); ctx.decrypt(&t) }, vec![1, 2, 3, 4]);
    }

    #[test]
    fn broadcast_examples() {
        let mut ctx = ctx25(4);
        let a = ctx.encrypt(&[5, 7, 9, 11]).unwrap();
        let b = ctx.ct_broadcast(&a, 3).unwrap();
        assert_eq!(ctx.decrypt(&b), vec![11; 4]);

        let mut ctx = ctx25(8);
        let a = ctx.encrypt(&[1, 2, 3, 4, 5, 6, 7, 8]).unwrap();
        let before = ctx.ledger.clone();
        let b = ctx.ct_broadcast(&a, 5).unwrap();
        assert_eq!(ctx.decrypt(&b), vec![6; 8]);
        let d = ctx.ledger.since(&before);
        assert_eq!((d.rotations, d.scalar_mults, d.additions), (3, 1, 3));

        let mut ctx = ctx25(1);
        let a = ctx.encrypt(&[9]).unwrap();
        assert_eq!({ let t = ctx.ct_broadcast(&a, 0).unwrap(); ctx.decrypt(&t) }, vec![9]);

        for n in 1..12usize {
            let mut ctx = ctx25(n);
            let vals: Vec<u64> = (0..n as u64).map(|v| v + 1).collect();
            let a = ctx.encrypt(&vals).unwrap();
            for idx in 0..n {
                let b = ctx.ct_broadcast(&a, idx).unwrap();
                assert_eq!(ctx.decrypt(&b), vec![vals[idx]; n], "n={n} idx={idx}");
            }
        }
    }

    #[test]
    fn select_forms() {
        let mut ctx = ctx25(3);
        let m = ctx.encrypt_bounded(&[1, 0, 1], Interval::new(0, 1)).unwrap();
        let x = ctx.encrypt(&[3, 4, 5]).unwrap();
        let y = ctx.encrypt(&[9, 8, 7]).unwrap();
        let s = ctx.ct_select(&m, &x, &y).unwrap();
        assert_eq!(ctx.decrypt(&s), vec![3, 8, 5]);
        assert_eq!(ctx.ledger.masked_mults, 1);
        assert_eq!(ctx.ledger.nonscalar_mults, 1);
        let mm = ctx.ct_mask_mul(&m, &y).unwrap();
        assert_eq!(ctx.decrypt(&mm), vec![9, 0, 7]);
        assert!(ctx.diagnostics.is_empty());
    }

    #[test]
    fn foreign_ciphertext_rejected() {
        let mut c1 = ctx25(2);
        let mut c2 = ctx25(2);
        let a = c1.encrypt(&[1, 2]).unwrap();
        let b = c2.encrypt(&[1, 2]).unwrap();
        assert!(matches!(c1.ct_add(&a, &b), Err(Error::ContextMismatch(_))));
        let d = c1.encrypt_in(&[1, 2], 5, 1).unwrap();
        assert!(matches!(c1.ct_mul(&a, &d), Err(Error::ContextMismatch(_))));
    }
}
