//! Direct sorting through a less-than matrix and rank-indexed placement.

use super::value_limit;
use crate::compare;
use crate::emulator::{EncVec, EvalContext};
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct SortOutput {
    /// Descending order: `sorted[k]` is the element of rank `k`.
    pub sorted: Vec<EncVec>,
    /// `sigma[i]`: number of elements ranked above element `i`.
    pub sigma: Vec<EncVec>,
}

impl SortOutput {
    pub fn into_ascending(mut self) -> Vec<EncVec> {
        self.sorted.reverse();
        self.sorted
    }
}

/// Sorts the lanes of `xs` in descending order.
///
/// `L[i][j]` is `[x_i < x_j]` for `i < j`, zero on the diagonal and
/// `1 - L[j][i]` below it, so ties are ranked by position and the row sums
/// form a permutation of `0..m`. Element `j` lands in position `k` through
/// `[sigma_j = k]`.
pub fn direct_sort(ctx: &mut EvalContext, xs: &EncVec) -> Result<SortOutput> {
    let m = xs.len();
    if m == 0 {
        return Err(Error::InvalidParameter("nothing to sort".into()));
    }
    if m as u64 > value_limit(ctx)? {
        return Err(Error::InvalidParameter(format!("{m} elements exceed the lane range")));
    }
    let elems = (0..m).map(|i| ctx.v_take(xs, i, 1)).collect::<Result<Vec<_>>>()?;

    let mut l: Vec<Vec<Option<EncVec>>> = vec![vec![None; m]; m];
    for i in 0..m {
        for j in i + 1..m {
            let lt = compare::lt(ctx, &elems[i], &elems[j])?;
            l[j][i] = Some(ctx.v_flag_not(&lt)?);
            l[i][j] = Some(lt);
        }
    }

    let mut sigma = Vec::with_capacity(m);
    for row in &l {
        let mut acc: Option<EncVec> = None;
        for e in row.iter().flatten() {
            acc = Some(match acc {
                None => e.clone(),
                Some(a) => ctx.v_add(&a, e)?,
            });
        }
        sigma.push(match acc {
            Some(a) => a,
            None => ctx.encrypt_vec(&[0])?,
        });
    }

    let mut sorted = Vec::with_capacity(m);
    for k in 0..m as u64 {
        let terms = sigma
            .iter()
            .zip(&elems)
            .map(|(s, x)| {
                let hit = compare::eq_plain(ctx, s, &[k])?;
                ctx.v_mask_mul(&hit, x)
            })
            .collect::<Result<Vec<_>>>()?;
        sorted.push(ctx.v_one_hot_sum(&terms)?);
    }
    Ok(SortOutput { sorted, sigma })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::emulator::{Interval, Method};

    fn sort(m: Method, values: &[u64]) -> (Vec<u64>, Vec<u64>, EvalContext) {
        let mut ctx = EvalContext::new(m, 8, values.len()).unwrap();
        ctx.auto_refresh = true;
        let xs = ctx.encrypt_vec_bounded(values, Interval::new(0, 255)).unwrap();
        let out = direct_sort(&mut ctx, &xs).unwrap();
        let s = out.sorted.iter().map(|v| ctx.decrypt_vec(v)[0]).collect();
        let sigma = out.sigma.iter().map(|v| ctx.decrypt_vec(v)[0]).collect();
        (s, sigma, ctx)
    }

    #[test]
    fn examples() {
        for m in Method::ALL {
            assert_eq!(sort(m, &[3, 1, 2]).0, vec![3, 2, 1], "{m}");
            assert_eq!(sort(m, &[42]).0, vec![42]);
            let (s, mut sigma, ctx) = sort(m, &[2, 2, 1]);
            assert_eq!(s, vec![2, 2, 1]);
            sigma.sort();
            assert_eq!(sigma, vec![0, 1, 2]);
            assert_eq!((ctx.ledger.comparisons, ctx.ledger.equalities), (3, 9));
        }
    }

    #[test]
    fn ascending_reverses() {
        let mut ctx = EvalContext::new(Method::BitwiseTfhe, 8, 1).unwrap();
        let xs = ctx.encrypt_vec(&[5, 9, 1, 7]).unwrap();
        let asc = direct_sort(&mut ctx, &xs).unwrap().into_ascending();
        let v: Vec<u64> = asc.iter().map(|e| ctx.decrypt_vec(e)[0]).collect();
        assert_eq!(v, vec![1, 5, 7, 9]);
    }

    #[test]
    fn counts_are_exact() {
        for len in 1..=6u64 {
            let vals: Vec<u64> = (0..len).map(|i| (i * 7) % 5).collect();
            let (_, _, ctx) = sort(Method::EncodingSwitching, &vals);
            assert_eq!(ctx.ledger.comparisons, len * (len - 1) / 2);
            assert_eq!(ctx.ledger.equalities, len * len);
        }
    }
}
