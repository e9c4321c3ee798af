use crate::error::{Error, Result};

use super::{EvalContext, Method};

/// Widths accepted by the bit-wise method.
pub const ALLOWED_WIDTHS: [usize; 6] = [6, 8, 12, 16, 24, 32];

/// Boolean gates. NOT is free; every other gate costs one bootstrap.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Gate {
    Not,
    And,
    Or,
    Xor,
    Xnor,
    Mux,
}

impl Gate {
    pub fn bootstraps(self) -> u64 {
        match self {
            Gate::Not => 0,
            _ => 1,
        }
    }
}

/// Gate evaluator that counts bootstraps.
#[derive(Debug, Default, Clone, Copy)]
pub(crate) struct Circuit {
    pub gates: u64,
}

impl Circuit {
    fn charge(&mut self, g: Gate) {
        self.gates += g.bootstraps();
    }

    pub fn not(&mut self, a: bool) -> bool {
        self.charge(Gate::Not);
        !a
    }

    pub fn and(&mut self, a: bool, b: bool) -> bool {
        self.charge(Gate::And);
        a && b
    }

    pub fn or(&mut self, a: bool, b: bool) -> bool {
        self.charge(Gate::Or);
        a || b
    }

    pub fn xor(&mut self, a: bool, b: bool) -> bool {
        self.charge(Gate::Xor);
        a ^ b
    }

    pub fn xnor(&mut self, a: bool, b: bool) -> bool {
        self.charge(Gate::Xnor);
        a == b
    }

    pub fn mux(&mut self, s: bool, a: bool, b: bool) -> bool {
        self.charge(Gate::Mux);
        if s {
            a
        } else {
            b
        }
    }

    /// Ripple-carry adder modulo 2^w; the top position skips its carry-out.
    pub fn add(&mut self, a: &[bool], b: &[bool], carry_in: bool) -> Vec<bool> {
        let w = a.len();
        let mut out = Vec::with_capacity(w);
        let mut c = carry_in;
        for i in 0..w {
            let t = self.xor(a[i], b[i]);
            out.push(self.xor(t, c));
            if i + 1 < w {
                let g = self.and(a[i], b[i]);
                let h = self.and(c, t);
                c = self.or(g, h);
            }
        }
        out
    }

    pub fn sub(&mut self, a: &[bool], b: &[bool]) -> Vec<bool> {
        let nb: Vec<bool> = b.iter().map(|&x| self.not(x)).collect();
        self.add(a, &nb, true)
    }

    /// Schoolbook multiplier modulo 2^w.
    pub fn mul(&mut self, a: &[bool], b: &[bool]) -> Vec<bool> {
        let w = a.len();
        let mut acc: Vec<bool> = (0..w).map(|i| self.and(a[i], b[0])).collect();
        for j in 1..w {
            let row: Vec<bool> = (0..w - j).map(|i| self.and(a[i], b[j])).collect();
            let hi = self.add(&acc[j..], &row, false);
            acc[j..].copy_from_slice(&hi);
        }
        acc
    }

    /// `[a < b]` for unsigned operands, LSB to MSB.
    pub fn lt(&mut self, a: &[bool], b: &[bool]) -> bool {
        let na0 = self.not(a[0]);
        let mut lt = self.and(na0, b[0]);
        for i in 1..a.len() {
            let e = self.xnor(a[i], b[i]);
            let na = self.not(a[i]);
            let strict = self.and(na, b[i]);
            let carry = self.and(e, lt);
            lt = self.or(strict, carry);
        }
        lt
    }

    /// `[a < k]` against a public constant.
    pub fn lt_plain(&mut self, a: &[bool], k: &[bool]) -> bool {
        let mut lt = if k[0] { self.not(a[0]) } else { false };
        for i in 1..a.len() {
            let na = self.not(a[i]);
            lt = if k[i] { self.or(na, lt) } else { self.and(na, lt) };
        }
        lt
    }

    pub fn eq(&mut self, a: &[bool], b: &[bool]) -> bool {
        let bits: Vec<bool> = a.iter().zip(b).map(|(&x, &y)| self.xnor(x, y)).collect();
        self.and_all(&bits)
    }

    pub fn eq_plain(&mut self, a: &[bool], k: &[bool]) -> bool {
        let bits: Vec<bool> = a.iter().zip(k).map(|(&x, &y)| if y { x } else { self.not(x) }).collect();
        self.and_all(&bits)
    }

    fn and_all(&mut self, bits: &[bool]) -> bool {
        let mut acc = bits[0];
        for &b in &bits[1..] {
            acc = self.and(acc, b);
        }
        acc
    }
}

pub(crate) fn to_bits(v: u64, width: usize) -> Vec<bool> {
    (0..width).map(|i| (v >> i) & 1 == 1).collect()
}

pub(crate) fn from_bits(bits: &[bool]) -> u64 {
    bits.iter().enumerate().fold(0, |acc, (i, &b)| acc | ((b as u64) << i))
}

/// Emulated bit-wise ciphertext of an unsigned integer, LSB first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitCipher {
    pub(crate) bits: Vec<bool>,
    pub(crate) ctx: u64,
}

impl BitCipher {
    pub fn width(&self) -> usize {
        self.bits.len()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }
}

impl EvalContext {
    fn require_bitwise(&self) -> Result<()> {
        if self.method() != Method::BitwiseTfhe {
            return Err(Error::ProfileMismatch { expected: "tfhe", actual: self.method().name() });
        }
        Ok(())
    }

    fn bit_check(&self, a: &BitCipher, b: &BitCipher) -> Result<()> {
        if a.ctx != self.id() || b.ctx != self.id() {
            return Err(Error::ContextMismatch("ciphertext from another context".into()));
        }
        if a.width() != b.width() {
            return Err(Error::WidthMismatch(a.width(), b.width()));
        }
        Ok(())
    }

    fn run(&mut self, f: impl FnOnce(&mut Circuit) -> Vec<bool>) -> BitCipher {
        let mut c = Circuit::default();
        let bits = f(&mut c);
        self.ledger.gate_bootstraps += c.gates;
        BitCipher { bits, ctx: self.id() }
    }

    /// Encrypts `value mod 2^b` at the context width.
    pub fn encrypt_bits(&mut self, value: u64) -> Result<BitCipher> {
        self.require_bitwise()?;
        let w = self.bits() as usize;
        let masked = if w >= 64 { value } else { value & ((1u64 << w) - 1) };
        Ok(BitCipher { bits: to_bits(masked, w), ctx: self.id() })
    }

    pub fn decrypt_bits(&self, ct: &BitCipher) -> u64 {
        from_bits(&ct.bits)
    }

    pub fn bit_add(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        Ok(self.run(|c| c.add(&a.bits, &b.bits, false)))
    }

    pub fn bit_sub(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        Ok(self.run(|c| c.sub(&a.bits, &b.bits)))
    }

    pub fn bit_mul(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        Ok(self.run(|c| c.mul(&a.bits, &b.bits)))
    }

    fn flag(&self, v: bool, w: usize) -> Vec<bool> {
        let mut out = vec![false; w];
        out[0] = v;
        out
    }

    /// `[a < b]` as a 0/1 value at full width.
    pub fn bit_lt(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        let w = a.width();
        let mut c = Circuit::default();
        let v = c.lt(&a.bits, &b.bits);
        self.ledger.gate_bootstraps += c.gates;
        Ok(BitCipher { bits: self.flag(v, w), ctx: self.id() })
    }

    pub fn bit_lt_plain(&mut self, a: &BitCipher, k: u64) -> Result<BitCipher> {
        self.bit_check(a, a)?;
        let w = a.width();
        if w < 64 && k >= 1u64 << w {
            // every w-bit value is below k
            return Ok(BitCipher { bits: self.flag(true, w), ctx: self.id() });
        }
        let mut c = Circuit::default();
        let v = c.lt_plain(&a.bits, &to_bits(k, w));
        self.ledger.gate_bootstraps += c.gates;
        Ok(BitCipher { bits: self.flag(v, w), ctx: self.id() })
    }

    pub fn bit_eq(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        let w = a.width();
        let mut c = Circuit::default();
        let v = c.eq(&a.bits, &b.bits);
        self.ledger.gate_bootstraps += c.gates;
        Ok(BitCipher { bits: self.flag(v, w), ctx: self.id() })
    }

    pub fn bit_eq_plain(&mut self, a: &BitCipher, k: u64) -> Result<BitCipher> {
        self.bit_check(a, a)?;
        let w = a.width();
        if w < 64 && k >= 1u64 << w {
            return Ok(BitCipher { bits: self.flag(false, w), ctx: self.id() });
        }
        let mut c = Circuit::default();
        let v = c.eq_plain(&a.bits, &to_bits(k, w));
        self.ledger.gate_bootstraps += c.gates;
        Ok(BitCipher { bits: self.flag(v, w), ctx: self.id() })
    }

    /// `m ? x : y` bit by bit using the low bit of `m`.
    pub fn bit_mux(&mut self, m: &BitCipher, x: &BitCipher, y: &BitCipher) -> Result<BitCipher> {
        self.bit_check(m, x)?;
        self.bit_check(x, y)?;
        let s = m.bits[0];
        Ok(self.run(|c| x.bits.iter().zip(&y.bits).map(|(&a, &b)| c.mux(s, a, b)).collect()))
    }

    /// Fans the low bit of `m` out with AND over every bit of `x`.
    pub fn bit_and_mask(&mut self, m: &BitCipher, x: &BitCipher) -> Result<BitCipher> {
        self.bit_check(m, x)?;
        let s = m.bits[0];
        Ok(self.run(|c| x.bits.iter().map(|&a| c.and(s, a)).collect()))
    }

    /// Logic on 0/1 flags held in the low bit.
    pub fn bit_flag_not(&mut self, m: &BitCipher) -> Result<BitCipher> {
        self.bit_check(m, m)?;
        Ok(BitCipher { bits: self.flag(!m.bits[0], m.width()), ctx: self.id() })
    }

    pub fn bit_flag_and(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        self.ledger.gate_bootstraps += Gate::And.bootstraps();
        Ok(BitCipher { bits: self.flag(a.bits[0] && b.bits[0], a.width()), ctx: self.id() })
    }

    pub fn bit_flag_or(&mut self, a: &BitCipher, b: &BitCipher) -> Result<BitCipher> {
        self.bit_check(a, b)?;
        self.ledger.gate_bootstraps += Gate::Or.bootstraps();
        Ok(BitCipher { bits: self.flag(a.bits[0] || b.bits[0], a.width()), ctx: self.id() })
    }
}
