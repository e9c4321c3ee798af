use crate::error::{Error, Result};

use super::bits::{to_bits, Circuit};
use super::word::{Interval, WordCipher};
use super::{BitCipher, EvalContext};

/// A vector of encrypted lanes under either ciphertext kind. Word-wise
/// methods pack the lanes into slots; the bit-wise method keeps one
/// ciphertext per lane.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EncVec {
    Word { ct: WordCipher, len: usize },
    Bits(Vec<BitCipher>),
}

impl EncVec {
    pub fn len(&self) -> usize {
        match self {
            EncVec::Word { len, .. } => *len,
            EncVec::Bits(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Multiplicative depth of the word ciphertext; zero for bit lanes.
    pub fn depth(&self) -> u32 {
        match self {
            EncVec::Word { ct, .. } => ct.depth(),
            EncVec::Bits(_) => 0,
        }
    }

    pub fn as_word(&self) -> Option<&WordCipher> {
        match self {
            EncVec::Word { ct, .. } => Some(ct),
            EncVec::Bits(_) => None,
        }
    }
}

fn kind_mismatch() -> Error {
    Error::ContextMismatch("word and bit lanes mixed".into())
}

fn lanes_mismatch(a: usize, b: usize) -> Error {
    Error::ContextMismatch(format!("{a} lanes vs {b} lanes"))
}

impl EvalContext {
    pub fn encrypt_vec(&mut self, values: &[u64]) -> Result<EncVec> {
        if self.method().word_wise() {
            let ct = self.encrypt(values)?;
            Ok(EncVec::Word { ct, len: values.len() })
        } else {
            Ok(EncVec::Bits(values.iter().map(|&v| self.encrypt_bits(v)).collect::<Result<_>>()?))
        }
    }

    /// Word lanes with a declared value interval (bit lanes ignore it).
    pub fn encrypt_vec_bounded(&mut self, values: &[u64], range: Interval) -> Result<EncVec> {
        let mut v = self.encrypt_vec(values)?;
        if let EncVec::Word { ct, .. } = &mut v {
            ct.range = range;
        }
        Ok(v)
    }

    pub fn decrypt_vec(&self, v: &EncVec) -> Vec<u64> {
        match v {
            EncVec::Word { ct, len } => self.decrypt(ct)[..*len].to_vec(),
            EncVec::Bits(lanes) => lanes.iter().map(|c| self.decrypt_bits(c)).collect(),
        }
    }

    fn zip_bits(
        &mut self,
        a: &[BitCipher],
        b: &[BitCipher],
        mut f: impl FnMut(&mut Self, &BitCipher, &BitCipher) -> Result<BitCipher>,
    ) -> Result<EncVec> {
        if a.len() != b.len() {
            return Err(lanes_mismatch(a.len(), b.len()));
        }
        Ok(EncVec::Bits(a.iter().zip(b).map(|(x, y)| f(self, x, y)).collect::<Result<_>>()?))
    }

    fn word_len(a: usize, b: usize) -> Result<usize> {
        if a != b {
            return Err(lanes_mismatch(a, b));
        }
        Ok(a)
    }

    pub fn v_add(&mut self, a: &EncVec, b: &EncVec) -> Result<EncVec> {
        match (a, b) {
            (EncVec::Word { ct: x, len: n }, EncVec::Word { ct: y, len: m }) => {
                let len = Self::word_len(*n, *m)?;
                Ok(EncVec::Word { ct: self.ct_add(x, y)?, len })
            }
            (EncVec::Bits(x), EncVec::Bits(y)) => self.zip_bits(x, y, |c, p, q| c.bit_add(p, q)),
            _ => Err(kind_mismatch()),
        }
    }

    pub fn v_sub(&mut self, a: &EncVec, b: &EncVec) -> Result<EncVec> {
        match (a, b) {
            (EncVec::Word { ct: x, len: n }, EncVec::Word { ct: y, len: m }) => {
                let len = Self::word_len(*n, *m)?;
                Ok(EncVec::Word { ct: self.ct_sub(x, y)?, len })
            }
            (EncVec::Bits(x), EncVec::Bits(y)) => self.zip_bits(x, y, |c, p, q| c.bit_sub(p, q)),
            _ => Err(kind_mismatch()),
        }
    }

    pub fn v_mul(&mut self, a: &EncVec, b: &EncVec) -> Result<EncVec> {
        match (a, b) {
            (EncVec::Word { ct: x, len: n }, EncVec::Word { ct: y, len: m }) => {
                let len = Self::word_len(*n, *m)?;
                Ok(EncVec::Word { ct: self.ct_mul(x, y)?, len })
            }
            (EncVec::Bits(x), EncVec::Bits(y)) => self.zip_bits(x, y, |c, p, q| c.bit_mul(p, q)),
            _ => Err(kind_mismatch()),
        }
    }

    fn bits_plain(
        &mut self,
        a: &[BitCipher],
        k: &[u64],
        f: impl Fn(&mut Circuit, &[bool], &[bool]) -> Vec<bool>,
    ) -> Result<EncVec> {
        if k.len() > a.len() {
            return Err(lanes_mismatch(a.len(), k.len()));
        }
        let mut c = Circuit::default();
        let out = a
            .iter()
            .enumerate()
            .map(|(i, x)| {
                let kb = to_bits(k.get(i).copied().unwrap_or(0), x.width());
                BitCipher { bits: f(&mut c, &x.bits, &kb), ctx: x.ctx }
            })
            .collect();
        self.ledger.gate_bootstraps += c.gates;
        Ok(EncVec::Bits(out))
    }

    pub fn v_mul_plain(&mut self, a: &EncVec, k: &[u64]) -> Result<EncVec> {
        match a {
            EncVec::Word { ct, len } => {
                if k.len() > *len {
                    return Err(lanes_mismatch(*len, k.len()));
                }
                Ok(EncVec::Word { ct: self.ct_mul_plain(ct, k)?, len: *len })
            }
            EncVec::Bits(x) => self.bits_plain(x, k, |c, a, kb| {
                // shift-and-add over the set bits of the constant
                let w = a.len();
                let mut acc: Option<Vec<bool>> = None;
                for (s, _) in kb.iter().enumerate().filter(|(_, &b)| b) {
                    let mut shifted = vec![false; w];
                    shifted[s..].copy_from_slice(&a[..w - s]);
                    acc = Some(match acc {
                        None => shifted,
                        Some(prev) => c.add(&prev, &shifted, false),
                    });
                }
                acc.unwrap_or_else(|| vec![false; w])
            }),
        }
    }

    pub fn v_add_plain(&mut self, a: &EncVec, k: &[u64]) -> Result<EncVec> {
        match a {
            EncVec::Word { ct, len } => {
                if k.len() > *len {
                    return Err(lanes_mismatch(*len, k.len()));
                }
                Ok(EncVec::Word { ct: self.ct_add_plain(ct, k)?, len: *len })
            }
            EncVec::Bits(x) => self.bits_plain(x, k, |c, a, kb| c.add(a, kb, false)),
        }
    }

    /// `k - a` lane-wise.
    pub fn v_sub_from_plain(&mut self, k: &[u64], a: &EncVec) -> Result<EncVec> {
        match a {
            EncVec::Word { ct, len } => {
                if k.len() > *len {
                    return Err(lanes_mismatch(*len, k.len()));
                }
                Ok(EncVec::Word { ct: self.ct_sub_from_plain(k, ct)?, len: *len })
            }
            EncVec::Bits(x) => self.bits_plain(x, k, |c, a, kb| c.sub(kb, a)),
        }
    }

    /// `mask ? x : y` per lane.
    pub fn v_select(&mut self, mask: &EncVec, x: &EncVec, y: &EncVec) -> Result<EncVec> {
        match (mask, x, y) {
            (EncVec::Word { ct: m, len: a }, EncVec::Word { ct: p, len: b }, EncVec::Word { ct: q, len: c }) => {
                let len = Self::word_len(*a, *b)?;
                Self::word_len(len, *c)?;
                Ok(EncVec::Word { ct: self.ct_select(m, p, q)?, len })
            }
            (EncVec::Bits(m), EncVec::Bits(p), EncVec::Bits(q)) => {
                Self::word_len(m.len(), p.len())?;
                Self::word_len(p.len(), q.len())?;
                self.ledger.masked_mults += 1;
                let out = m
                    .iter()
                    .zip(p.iter().zip(q))
                    .map(|(s, (a, b))| self.bit_mux(s, a, b))
                    .collect::<Result<_>>()?;
                Ok(EncVec::Bits(out))
            }
            _ => Err(kind_mismatch()),
        }
    }

    /// Selection known to produce min(x, y); tightens the word interval.
    pub fn v_select_lesser(&mut self, mask: &EncVec, x: &EncVec, y: &EncVec) -> Result<EncVec> {
        match (mask, x, y) {
            (EncVec::Word { ct: m, len: a }, EncVec::Word { ct: p, len: b }, EncVec::Word { ct: q, len: c }) => {
                let len = Self::word_len(*a, *b)?;
                Self::word_len(len, *c)?;
                Ok(EncVec::Word { ct: self.ct_select_lesser(m, p, q)?, len })
            }
            _ => self.v_select(mask, x, y),
        }
    }

    /// Lane-wise product with a 0/1 mask.
    pub fn v_mask_mul(&mut self, mask: &EncVec, x: &EncVec) -> Result<EncVec> {
        match (mask, x) {
            (EncVec::Word { ct: m, len: a }, EncVec::Word { ct: p, len: b }) => {
                let len = Self::word_len(*a, *b)?;
                Ok(EncVec::Word { ct: self.ct_mask_mul(m, p)?, len })
            }
            (EncVec::Bits(m), EncVec::Bits(p)) => {
                self.ledger.masked_mults += 1;
                self.zip_bits(m, p, |c, s, v| c.bit_and_mask(s, v))
            }
            _ => Err(kind_mismatch()),
        }
    }

    /// Copies lane `idx` into every lane.
    pub fn v_broadcast(&mut self, a: &EncVec, idx: usize) -> Result<EncVec> {
        if idx >= a.len() {
            return Err(Error::InvalidParameter(format!("lane {idx} out of range for {} lanes", a.len())));
        }
        match a {
            EncVec::Word { ct, len } => Ok(EncVec::Word { ct: self.ct_broadcast(ct, idx)?, len: *len }),
            EncVec::Bits(x) => Ok(EncVec::Bits(vec![x[idx].clone(); x.len()])),
        }
    }

    /// Sum over the logical lanes, placed in every lane.
    pub fn v_sum_lanes(&mut self, a: &EncVec) -> Result<EncVec> {
        match a {
            EncVec::Word { ct, len } => {
                // padding slots beyond `len` must not contribute
                let n = ct.len();
                let clean = if *len < n {
                    let mut keep = vec![1u64; *len];
                    keep.resize(n, 0);
                    self.ct_mul_plain(ct, &keep)?
                } else {
                    ct.clone()
                };
                Ok(EncVec::Word { ct: self.ct_sum_slots(&clean)?, len: *len })
            }
            EncVec::Bits(x) => {
                let mut acc = x[0].clone();
                for lane in &x[1..] {
                    acc = self.bit_add(&acc, lane)?;
                }
                Ok(EncVec::Bits(vec![acc; x.len()]))
            }
        }
    }

    /// Lanes `start..start + count` as a new vector (rotation plus mask for words).
    pub fn v_take(&mut self, a: &EncVec, start: usize, count: usize) -> Result<EncVec> {
        if start + count > a.len() {
            return Err(Error::InvalidParameter(format!(
                "lanes {start}..{} out of range for {}",
                start + count,
                a.len()
            )));
        }
        match a {
            EncVec::Word { ct, .. } => {
                let rotated = if start == 0 { ct.clone() } else { self.ct_rotate(ct, start)? };
                let ct = if count < ct.len() {
                    let mut keep = vec![1u64; count];
                    keep.resize(ct.len(), 0);
                    self.ct_mul_plain(&rotated, &keep)?
                } else {
                    rotated
                };
                Ok(EncVec::Word { ct, len: count })
            }
            EncVec::Bits(x) => Ok(EncVec::Bits(x[start..start + count].to_vec())),
        }
    }

    /// Sum of terms with at most one nonzero term per lane. The result
    /// interval is the hull of the term intervals.
    pub(crate) fn v_one_hot_sum(&mut self, terms: &[EncVec]) -> Result<EncVec> {
        let (first, rest) = terms
            .split_first()
            .ok_or_else(|| Error::InvalidParameter("empty sum".into()))?;
        let mut acc = first.clone();
        for t in rest {
            acc = self.unmetered(|c| c.v_add(&acc, t))?;
        }
        if let EncVec::Word { ct, .. } = &mut acc {
            let mut hull = terms[0].as_word().map(|w| w.range).unwrap_or(ct.range);
            let mut overflow = false;
            for w in terms.iter().filter_map(EncVec::as_word) {
                hull = hull.hull(w.range);
                overflow |= w.overflow;
            }
            ct.range = hull;
            ct.overflow = overflow;
        }
        Ok(acc)
    }

    /// [`EvalContext::v_sum_lanes`] for a vector with at most one nonzero lane.
    pub(crate) fn v_one_hot_sum_lanes(&mut self, a: &EncVec) -> Result<EncVec> {
        let mut out = self.unmetered(|c| c.v_sum_lanes(a))?;
        if let (EncVec::Word { ct, .. }, EncVec::Word { ct: src, .. }) = (&mut out, a) {
            ct.range = src.range.hull(Interval::point(0));
            ct.overflow = src.overflow;
        }
        Ok(out)
    }

    /// Boolean NOT of a 0/1 flag vector.
    pub fn v_flag_not(&mut self, a: &EncVec) -> Result<EncVec> {
        match a {
            EncVec::Word { ct, len } => {
                let mut out = self.ct_sub_from_plain(&vec![1; *len], ct)?;
                out.range = Interval::new(0, 1);
                Ok(EncVec::Word { ct: out, len: *len })
            }
            EncVec::Bits(x) => Ok(EncVec::Bits(x.iter().map(|c| self.bit_flag_not(c)).collect::<Result<_>>()?)),
        }
    }

    pub fn v_flag_and(&mut self, a: &EncVec, b: &EncVec) -> Result<EncVec> {
        match (a, b) {
            (EncVec::Word { ct: x, len: n }, EncVec::Word { ct: y, len: m }) => {
                let len = Self::word_len(*n, *m)?;
                let mut out = self.ct_mul(x, y)?;
                out.range = Interval::new(0, 1);
                Ok(EncVec::Word { ct: out, len })
            }
            (EncVec::Bits(x), EncVec::Bits(y)) => self.zip_bits(x, y, |c, p, q| c.bit_flag_and(p, q)),
            _ => Err(kind_mismatch()),
        }
    }

    pub fn v_flag_or(&mut self, a: &EncVec, b: &EncVec) -> Result<EncVec> {
        match (a, b) {
            (EncVec::Word { ct: x, len: n }, EncVec::Word { ct: y, len: m }) => {
                let len = Self::word_len(*n, *m)?;
                let prod = self.ct_mul(x, y)?;
                let sum = self.ct_add(x, y)?;
                let mut out = self.unmetered(|c| c.ct_sub(&sum, &prod))?;
                out.range = Interval::new(0, 1);
                out.overflow = x.overflow || y.overflow;
                Ok(EncVec::Word { ct: out, len })
            }
            (EncVec::Bits(x), EncVec::Bits(y)) => self.zip_bits(x, y, |c, p, q| c.bit_flag_or(p, q)),
            _ => Err(kind_mismatch()),
        }
    }
}
