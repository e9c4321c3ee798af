//! Exact arithmetic over F_p and Z_{p^r}, Lagrange interpolation of the
//! sign/less-than indicator polynomials, and depth-aware polynomial
//! evaluation with instrumented operation counts.

use crate::error::{Error, Result};

/// Deterministic trial-division primality test.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut d = 3u64;
    while d.saturating_mul(d) <= n {
        if n % d == 0 {
            return false;
        }
        d += 2;
    }
    true
}

#[inline]
pub fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

#[inline]
pub fn add_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 + b as u128) % m as u128) as u64
}

#[inline]
pub fn sub_mod(a: u64, b: u64, m: u64) -> u64 {
    add_mod(a % m, m - b % m, m)
}

pub fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Inverse of `a` modulo the prime `p` via the extended Euclidean algorithm.
pub fn mod_inv(a: u64, p: u64) -> Result<u64> {
    let a = a % p;
    if a == 0 {
        return Err(Error::NotInvertible(a, p));
    }
    let (mut r0, mut r1) = (p as i128, a as i128);
    let (mut t0, mut t1) = (0i128, 1i128);
    while r1 != 0 {
        let q = r0 / r1;
        (r0, r1) = (r1, r0 - q * r1);
        (t0, t1) = (t1, t0 - q * t1);
    }
    if r0 != 1 {
        return Err(Error::NotInvertible(a, p));
    }
    Ok(t0.rem_euclid(p as i128) as u64)
}

/// Centered representative of `x` in Z_m: `x` if `x <= (m-1)/2`, else `x - m`.
pub fn centered(x: u64, m: u64) -> i64 {
    debug_assert!(x < m);
    if x <= (m - 1) / 2 {
        x as i64
    } else {
        x as i64 - m as i64
    }
}

/// Reduces a signed integer into [0, m).
pub fn reduce_signed(x: i64, m: u64) -> u64 {
    (x as i128).rem_euclid(m as i128) as u64
}

/// An odd prime field F_p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if p < 3 || !is_prime(p) {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Self { p })
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }
}

/// Operation counts for one polynomial evaluation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EvalCount {
    pub nonscalar_mults: u64,
    pub scalar_mults: u64,
    pub additions: u64,
    pub depth: u32,
}

/// Interpolation polynomial over F_p, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl SignPoly {
    pub fn from_coeffs(p: u64, coeffs: Vec<u64>) -> Self {
        Self { p, coeffs }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    /// Degree ignoring trailing zero coefficients (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs.iter().rposition(|&c| c != 0).unwrap_or(0)
    }

    /// Plain Horner evaluation.
    pub fn horner(&self, x: u64) -> u64 {
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| add_mod(mul_mod(acc, x, self.p), c, self.p))
    }
}

/// Lagrange basis polynomial for node `a` over all of F_p.
///
/// The vanishing polynomial of F_p is X^p - X, whose derivative is -1 at every
/// node, so L_a(X) = -(X^p - X)/(X - a).
fn lagrange_basis(p: u64, a: u64) -> Vec<u64> {
    let p_us = p as usize;
    let mut q = vec![0u64; p_us];
    // synthetic division of X^p - X by (X - a), from the top
    let top = |i: usize| -> u64 {
        match i {
            _ if i == p_us => 1,
            1 => p - 1,
            _ => 0,
        }
    };
    let mut carry = 0u64;
    for j in (0..p_us).rev() {
        carry = add_mod(top(j + 1), mul_mod(a, carry, p), p);
        q[j] = carry;
    }
    q.iter().map(|&c| (p - c) % p).collect()
}

/// Interpolates the unique polynomial of degree < p taking `f(x)` at every x in F_p.
pub fn interpolate(field: PrimeField, f: impl Fn(u64) -> u64) -> SignPoly {
    let p = field.modulus();
    let mut coeffs = vec![0u64; p as usize];
    for a in 0..p {
        let y = f(a) % p;
        if y == 0 {
            continue;
        }
        for (c, l) in coeffs.iter_mut().zip(lagrange_basis(p, a)) {
            *c = add_mod(*c, mul_mod(l, y, p), p);
        }
    }
    SignPoly { p, coeffs }
}

/// P with P(x) = 1 when centered(x) < 0 and 0 otherwise.
pub fn lagrange_sign_poly(p: u64) -> Result<SignPoly> {
    let field = PrimeField::new(p)?;
    Ok(interpolate(field, |x| u64::from(centered(x, p) < 0)))
}

/// Coefficient matrix `c[i][j]` (x-degree i, y-degree j) of the bivariate
/// polynomial over F_p equal to 1 when x < y as integers in [0, p), else 0.
pub fn lt_bivariate_coeffs(p: u64) -> Result<Vec<Vec<u64>>> {
    if !is_prime(p) {
        return Err(Error::InvalidModulus(p));
    }
    let n = p as usize;
    let bases: Vec<Vec<u64>> = (0..p).map(|a| lagrange_basis(p, a)).collect();
    // suffix[a] = sum of L_b(y) for b > a
    let mut suffix = vec![vec![0u64; n]; n];
    for a in (0..n.saturating_sub(1)).rev() {
        let mut next = suffix[a + 1].clone();
        for (s, l) in next.iter_mut().zip(&bases[a + 1]) {
            *s = add_mod(*s, *l, p);
        }
        suffix[a] = next;
    }
    let mut c = vec![vec![0u64; n]; n];
    for a in 0..n {
        for (i, &la) in bases[a].iter().enumerate() {
            if la == 0 {
                continue;
            }
            for (j, &s) in suffix[a].iter().enumerate() {
                c[i][j] = add_mod(c[i][j], mul_mod(la, s, p), p);
            }
        }
    }
    Ok(c)
}

/// Arithmetic a polynomial evaluator needs. Implemented for plain tracked
/// scalars here and for emulated ciphertexts in the emulator.
pub trait PolyBackend {
    type Value: Clone;
    /// Ciphertext-ciphertext multiplication (consumes one level).
    fn mul(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn mul_scalar(&mut self, a: &Self::Value, k: u64) -> Self::Value;
    fn add(&mut self, a: &Self::Value, b: &Self::Value) -> Result<Self::Value>;
    fn add_scalar(&mut self, a: &Self::Value, k: u64) -> Self::Value;
}

fn largest_pow2_below(n: usize) -> usize {
    debug_assert!(n >= 2);
    1 << (usize::BITS - 1 - (n - 1).leading_zeros())
}

/// Computes x^e for every e in `1..=max` with depth ceil(log2 e), reusing
/// the table. Index 0 is unused.
pub fn power_table<B: PolyBackend>(
    backend: &mut B,
    x: &B::Value,
    max: usize,
) -> Result<Vec<Option<B::Value>>> {
    let mut pows: Vec<Option<B::Value>> = vec![None; max + 1];
    if max >= 1 {
        pows[1] = Some(x.clone());
    }
    for e in 2..=max {
        let hi = largest_pow2_below(e);
        let lhs = pows[hi].clone().expect("lower power present");
        let rhs = pows[e - hi].clone().expect("lower power present");
        pows[e] = Some(backend.mul(&lhs, &rhs)?);
    }
    Ok(pows)
}

/// x^e with multiplicative depth ceil(log2 e); `e >= 1`.
pub fn power<B: PolyBackend>(backend: &mut B, x: &B::Value, e: u64) -> Result<B::Value> {
    assert!(e >= 1, "exponent must be positive");
    // square-and-multiply, combining set bits low to high so the largest
    // square is multiplied in last
    let mut squares = vec![x.clone()];
    while (1u64 << squares.len()) <= e {
        let last = squares.last().expect("non-empty").clone();
        squares.push(backend.mul(&last, &last)?);
    }
    let mut acc: Option<B::Value> = None;
    for (bit, sq) in squares.iter().enumerate() {
        if e >> bit & 1 == 1 {
            acc = Some(match acc {
                None => sq.clone(),
                Some(a) => backend.mul(&a, sq)?,
            });
        }
    }
    Ok(acc.expect("e >= 1 has a set bit"))
}

enum Node<V> {
    Plain(u64),
    Enc(V),
}

/// Paterson-Stockmeyer evaluation of `poly` at the encrypted point `x`.
///
/// Baby steps x^1..x^k with k = ceil(sqrt(deg+1)); giant steps (x^k)^(2^t);
/// blocks are combined in a balanced tree so depth stays logarithmic.
/// Returns `None` in the value slot if the polynomial is constant; the
/// constant is returned separately in that case.
pub fn paterson_stockmeyer<B: PolyBackend>(
    backend: &mut B,
    poly: &SignPoly,
    x: &B::Value,
) -> Result<std::result::Result<B::Value, u64>> {
    let p = poly.p;
    let deg = poly.degree();
    let coeffs = &poly.coeffs[..=deg.min(poly.coeffs.len().saturating_sub(1))];
    if deg == 0 {
        return Ok(Err(coeffs.first().copied().unwrap_or(0) % p));
    }
    let n = deg + 1;
    let k = (n as f64).sqrt().ceil() as usize;
    let k = if k * k < n { k + 1 } else { k };
    let blocks = n.div_ceil(k);
    let baby_max = if blocks > 1 { k } else { deg };
    let pows = power_table(backend, x, baby_max)?;

    let leaf = |backend: &mut B, j: usize| -> Node<B::Value> {
        let chunk = &coeffs[j * k..((j + 1) * k).min(n)];
        let mut acc: Option<B::Value> = None;
        for (i, &c) in chunk.iter().enumerate().skip(1) {
            if c == 0 {
                continue;
            }
            let term = backend.mul_scalar(pows[i].as_ref().expect("baby power"), c);
            acc = Some(match acc {
                None => term,
                Some(a) => backend.add(&a, &term).expect("same-context add"),
            });
        }
        match acc {
            None => Node::Plain(chunk[0]),
            Some(a) if chunk[0] != 0 => Node::Enc(backend.add_scalar(&a, chunk[0])),
            Some(a) => Node::Enc(a),
        }
    };

    let mut giants: Vec<B::Value> = Vec::new();
    if blocks > 1 {
        giants.push(pows[k].clone().expect("x^k"));
    }

    fn combine<B: PolyBackend>(
        backend: &mut B,
        giants: &mut Vec<B::Value>,
        leaf: &dyn Fn(&mut B, usize) -> Node<B::Value>,
        lo: usize,
        hi: usize,
    ) -> Result<Node<B::Value>> {
        if hi - lo == 1 {
            return Ok(leaf(backend, lo));
        }
        let h = largest_pow2_below(hi - lo);
        let t = h.trailing_zeros() as usize;
        while giants.len() <= t {
            let last = giants.last().expect("x^k present").clone();
            giants.push(backend.mul(&last, &last)?);
        }
        let low = combine(backend, giants, leaf, lo, lo + h)?;
        let high = combine(backend, giants, leaf, lo + h, hi)?;
        let g = giants[t].clone();
        let shifted = match high {
            Node::Plain(0) => None,
            Node::Plain(c) => Some(backend.mul_scalar(&g, c)),
            Node::Enc(v) => Some(backend.mul(&v, &g)?),
        };
        Ok(match (low, shifted) {
            (low, None) => low,
            (Node::Plain(c), Some(s)) if c == 0 => Node::Enc(s),
            (Node::Plain(c), Some(s)) => Node::Enc(backend.add_scalar(&s, c)),
            (Node::Enc(l), Some(s)) => Node::Enc(backend.add(&l, &s)?),
        })
    }

    let node = combine(backend, &mut giants, &leaf, 0, blocks)?;
    Ok(match node {
        Node::Plain(c) => Err(c),
        Node::Enc(v) => Ok(v),
    })
}

/// A plaintext value with its multiplicative depth, for instrumented scalar
/// evaluation.
#[derive(Debug, Clone, Copy)]
pub struct Tracked {
    pub value: u64,
    pub depth: u32,
}

/// Scalar backend that meters operations into an [`EvalCount`].
#[derive(Debug)]
pub struct ScalarBackend {
    pub p: u64,
    pub count: EvalCount,
}

impl PolyBackend for ScalarBackend {
    type Value = Tracked;

    fn mul(&mut self, a: &Tracked, b: &Tracked) -> Result<Tracked> {
        self.count.nonscalar_mults += 1;
        Ok(Tracked { value: mul_mod(a.value, b.value, self.p), depth: a.depth.max(b.depth) + 1 })
    }

    fn mul_scalar(&mut self, a: &Tracked, k: u64) -> Tracked {
        self.count.scalar_mults += 1;
        Tracked { value: mul_mod(a.value, k, self.p), depth: a.depth }
    }

    fn add(&mut self, a: &Tracked, b: &Tracked) -> Result<Tracked> {
        self.count.additions += 1;
        Ok(Tracked { value: add_mod(a.value, b.value, self.p), depth: a.depth.max(b.depth) })
    }

    fn add_scalar(&mut self, a: &Tracked, k: u64) -> Tracked {
        self.count.additions += 1;
        Tracked { value: add_mod(a.value, k, self.p), depth: a.depth }
    }
}

/// Evaluates `poly(x) mod p` with Paterson-Stockmeyer, reporting costs.
pub fn eval_poly_ps(poly: &SignPoly, x: u64) -> (u64, EvalCount) {
    let mut backend = ScalarBackend { p: poly.p, count: EvalCount::default() };
    let input = Tracked { value: x % poly.p, depth: 0 };
    let out = paterson_stockmeyer(&mut backend, poly, &input).expect("scalar backend is infallible");
    match out {
        Ok(t) => {
            backend.count.depth = t.depth;
            (t.value, backend.count)
        }
        Err(c) => (c, backend.count),
    }
}

/// ceil(log2(n)) for n >= 1.
pub fn ceil_log2(n: u64) -> u32 {
    if n <= 1 {
        0
    } else {
        64 - (n - 1).leading_zeros()
    }
}
