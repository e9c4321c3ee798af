//! Arithmetic in Z_p[x]/(x^n + 1).
//!
//! Schoolbook multiplication is the reference; the NTT path is only taken
//! when p = 1 (mod 2n) and is checked against schoolbook in tests.

use crate::error::{Error, Result};
use crate::modmath::{add_mod, is_prime, mod_inv, mul_mod, pow_mod, sub_mod};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NegaPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl NegaPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Result<Self> {
        let n = coeffs.len();
        if n == 0 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("degree bound {n} is not a power of two")));
        }
        if p < 2 {
            return Err(Error::InvalidModulus(p));
        }
        Ok(Self { p, coeffs: coeffs.into_iter().map(|c| c % p).collect() })
    }

    pub fn zero(n: usize, p: u64) -> Result<Self> {
        Self::new(p, vec![0; n])
    }

    pub fn one(n: usize, p: u64) -> Result<Self> {
        let mut c = vec![0; n];
        c[0] = 1;
        Self::new(p, c)
    }

    /// 1 + x + ... + x^(n-1)
    pub fn all_ones(n: usize, p: u64) -> Result<Self> {
        Self::new(p, vec![1; n])
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    fn check_same_ring(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.coeffs.len() != other.coeffs.len() {
            return Err(Error::MismatchedRing(
                self.p,
                self.coeffs.len(),
                other.p,
                other.coeffs.len(),
            ));
        }
        Ok(())
    }

    pub fn scale(&self, k: u64) -> Self {
        Self { p: self.p, coeffs: self.coeffs.iter().map(|&c| mul_mod(c, k, self.p)).collect() }
    }
}

/// X^e for e >= 0, -X^(n+e) for e < 0.
pub fn monomial(e: i64, n: usize, p: u64) -> Result<NegaPoly> {
    if e.unsigned_abs() as usize >= n {
        return Err(Error::ExponentOutOfRange { exponent: e, n });
    }
    let mut c = vec![0u64; n];
    if e >= 0 {
        c[e as usize] = 1 % p;
    } else {
        c[(n as i64 + e) as usize] = (p - 1) % p;
    }
    NegaPoly::new(p, c)
}

/// Schoolbook negacyclic product.
pub fn nega_mul_schoolbook(a: &NegaPoly, b: &NegaPoly) -> Result<NegaPoly> {
    a.check_same_ring(b)?;
    let (n, p) = (a.coeffs.len(), a.p);
    let mut out = vec![0u64; n];
    for (i, &ai) in a.coeffs.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.coeffs.iter().enumerate() {
            let t = mul_mod(ai, bj, p);
            let k = i + j;
            if k < n {
                out[k] = add_mod(out[k], t, p);
            } else {
                out[k - n] = sub_mod(out[k - n], t, p);
            }
        }
    }
    Ok(NegaPoly { p, coeffs: out })
}

/// Negacyclic product; uses the NTT when the modulus supports it.
pub fn nega_mul(a: &NegaPoly, b: &NegaPoly) -> Result<NegaPoly> {
    a.check_same_ring(b)?;
    match NttPlan::new(a.coeffs.len(), a.p) {
        Some(plan) => Ok(plan.multiply(a, b)),
        None => nega_mul_schoolbook(a, b),
    }
}

fn primitive_root(p: u64) -> u64 {
    let phi = p - 1;
    let mut factors = Vec::new();
    let mut m = phi;
    let mut d = 2;
    while d * d <= m {
        if m % d == 0 {
            factors.push(d);
            while m % d == 0 {
                m /= d;
            }
        }
        d += 1;
    }
    if m > 1 {
        factors.push(m);
    }
    (2..p)
        .find(|&g| factors.iter().all(|&q| pow_mod(g, phi / q, p) != 1))
        .expect("prime field has a generator")
}

/// Precomputed twiddles for the negacyclic NTT of size n over F_p.
#[derive(Debug, Clone)]
pub struct NttPlan {
    n: usize,
    p: u64,
    psi_pows: Vec<u64>,
    psi_inv_pows: Vec<u64>,
    omega: u64,
    omega_inv: u64,
    n_inv: u64,
}

impl NttPlan {
    /// Returns `None` unless p is prime with p = 1 (mod 2n).
    pub fn new(n: usize, p: u64) -> Option<Self> {
        if n < 2 || !n.is_power_of_two() || !is_prime(p) || (p - 1) % (2 * n as u64) != 0 {
            return None;
        }
        let g = primitive_root(p);
        let psi = pow_mod(g, (p - 1) / (2 * n as u64), p);
        let psi_inv = mod_inv(psi, p).ok()?;
        let mut psi_pows = Vec::with_capacity(n);
        let mut psi_inv_pows = Vec::with_capacity(n);
        let (mut s, mut si) = (1u64, 1u64);
        for _ in 0..n {
            psi_pows.push(s);
            psi_inv_pows.push(si);
            s = mul_mod(s, psi, p);
            si = mul_mod(si, psi_inv, p);
        }
        let omega = mul_mod(psi, psi, p);
        Some(Self {
            n,
            p,
            psi_pows,
            psi_inv_pows,
            omega,
            omega_inv: mod_inv(omega, p).ok()?,
            n_inv: mod_inv(n as u64, p).ok()?,
        })
    }

    fn transform(&self, a: &mut [u64], root: u64) {
        let (n, p) = (self.n, self.p);
        let bits = n.trailing_zeros();
        for i in 0..n {
            let j = i.reverse_bits() >> (usize::BITS - bits);
            if i < j {
                a.swap(i, j);
            }
        }
        let mut len = 2;
        while len <= n {
            let w_len = pow_mod(root, (n / len) as u64, p);
            for start in (0..n).step_by(len) {
                let mut w = 1u64;
                for k in 0..len / 2 {
                    let u = a[start + k];
                    let v = mul_mod(a[start + k + len / 2], w, p);
                    a[start + k] = add_mod(u, v, p);
                    a[start + k + len / 2] = sub_mod(u, v, p);
                    w = mul_mod(w, w_len, p);
                }
            }
            len <<= 1;
        }
    }

    pub fn multiply(&self, a: &NegaPoly, b: &NegaPoly) -> NegaPoly {
        let p = self.p;
        let twist = |x: &NegaPoly| -> Vec<u64> {
            x.coeffs.iter().zip(&self.psi_pows).map(|(&c, &s)| mul_mod(c, s, p)).collect()
        };
        let mut fa = twist(a);
        let mut fb = twist(b);
        self.transform(&mut fa, self.omega);
        self.transform(&mut fb, self.omega);
        let mut prod: Vec<u64> = fa.iter().zip(&fb).map(|(&x, &y)| mul_mod(x, y, p)).collect();
        self.transform(&mut prod, self.omega_inv);
        let coeffs = prod
            .iter()
            .zip(&self.psi_inv_pows)
            .map(|(&c, &s)| mul_mod(mul_mod(c, s, p), self.n_inv, p))
            .collect();
        NegaPoly { p, coeffs }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_poly(rng: &mut ChaCha8Rng, n: usize, p: u64) -> NegaPoly {
        NegaPoly::new(p, (0..n).map(|_| rng.gen_range(0..p)).collect()).unwrap()
    }

    #[test]
    fn wraparound_sign() {
        let out = nega_mul(&monomial(3, 4, 5).unwrap(), &monomial(1, 4, 5).unwrap()).unwrap();
        assert_eq!(out.coeffs(), &[4, 0, 0, 0]);
    }

    #[test]
    fn all_ones_times_x_cubed() {
        let t = NegaPoly::all_ones(4, 5).unwrap();
        let out = nega_mul(&t, &monomial(3, 4, 5).unwrap()).unwrap();
        assert_eq!(out.coeffs(), &[4, 4, 4, 1]);
    }

    #[test]
    fn identity_and_mismatch() {
        let a = NegaPoly::new(17, vec![3, 1, 4, 1, 5, 9, 2, 6]).unwrap();
        assert_eq!(nega_mul(&a, &NegaPoly::one(8, 17).unwrap()).unwrap(), a);
        let b = NegaPoly::one(4, 17).unwrap();
        assert!(matches!(nega_mul(&a, &b), Err(Error::MismatchedRing(..))));
        let c = NegaPoly::one(8, 5).unwrap();
        assert!(matches!(nega_mul(&a, &c), Err(Error::MismatchedRing(..))));
    }

    #[test]
    fn monomial_examples() {
        assert_eq!(monomial(2, 4, 5).unwrap().coeffs(), &[0, 0, 1, 0]);
        assert_eq!(monomial(-2, 4, 5).unwrap().coeffs(), &[0, 0, 4, 0]);
        assert!(matches!(monomial(4, 4, 5), Err(Error::ExponentOutOfRange { .. })));
        assert!(matches!(monomial(-4, 4, 5), Err(Error::ExponentOutOfRange { .. })));
        for n in [4usize, 8, 16] {
            for b in 1..n as i64 {
                let prod = nega_mul(&monomial(-b, n, 5).unwrap(), &monomial(b, n, 5).unwrap()).unwrap();
                assert_eq!(prod, NegaPoly::one(n, 5).unwrap());
            }
        }
    }

    #[test]
    fn monomial_exponent_law_exhaustive() {
        let (n, p) = (16usize, 17u64);
        for a in -(n as i64 - 1)..n as i64 {
            for b in -(n as i64 - 1)..n as i64 {
                let lhs = nega_mul(&monomial(a, n, p).unwrap(), &monomial(-b, n, p).unwrap()).unwrap();
                // reduce a - b into (-n, n) tracking the sign flip of x^n = -1
                let mut e = a - b;
                let mut sign = 1u64;
                while e >= n as i64 {
                    e -= n as i64;
                    sign = p - sign;
                }
                while e <= -(n as i64) {
                    e += n as i64;
                    sign = p - sign;
                }
                let rhs = monomial(e, n, p).unwrap().scale(sign);
                assert_eq!(lhs, rhs, "a={a} b={b}");
            }
        }
    }

    #[test]
    fn commutative_and_associative() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for &n in &[4usize, 8, 16] {
            for &p in &[5u64, 17] {
                for _ in 0..1000 {
                    let a = random_poly(&mut rng, n, p);
                    let b = random_poly(&mut rng, n, p);
                    let c = random_poly(&mut rng, n, p);
                    assert_eq!(nega_mul(&a, &b).unwrap(), nega_mul(&b, &a).unwrap());
                    let left = nega_mul(&nega_mul(&a, &b).unwrap(), &c).unwrap();
                    let right = nega_mul(&a, &nega_mul(&b, &c).unwrap()).unwrap();
                    assert_eq!(left, right);
                }
            }
        }
    }

    #[test]
    fn ntt_matches_schoolbook() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let cases = [(4usize, 17u64), (8, 17), (16, 97), (32, 193), (64, 257)];
        for &(n, p) in &cases {
            let plan = NttPlan::new(n, p).expect("ntt-friendly");
            for _ in 0..2000 {
                let a = random_poly(&mut rng, n, p);
                let b = random_poly(&mut rng, n, p);
                assert_eq!(plan.multiply(&a, &b), nega_mul_schoolbook(&a, &b).unwrap());
            }
        }
        assert!(NttPlan::new(4, 5).is_none());
    }
}
