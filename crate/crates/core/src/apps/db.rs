//! Column-batched table filtering with a small predicate AST.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::value_limit;
use crate::compare;
use crate::emulator::{EncVec, EvalContext, Interval};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Column {
    pub name: String,
    pub values: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<Column>,
}

impl Table {
    pub fn new(columns: Vec<(&str, Vec<u64>)>) -> Result<Self> {
        let t = Self {
            columns: columns.into_iter().map(|(n, values)| Column { name: n.to_string(), values }).collect(),
        };
        t.check()?;
        Ok(t)
    }

    pub fn rows(&self) -> usize {
        self.columns.first().map_or(0, |c| c.values.len())
    }

    pub fn column(&self, name: &str) -> Result<&[u64]> {
        self.columns
            .iter()
            .find(|c| c.name == name)
            .map(|c| c.values.as_slice())
            .ok_or_else(|| Error::InvalidParameter(format!("no column '{name}'")))
    }

    pub fn check(&self) -> Result<()> {
        let n = self.rows();
        if let Some(c) = self.columns.iter().find(|c| c.values.len() != n) {
            return Err(Error::InvalidParameter(format!("column '{}' has {} rows, expected {n}", c.name, c.values.len())));
        }
        Ok(())
    }

    /// Employee table: `id`, `salary` and `hours` below 2^(b/2), `bonus`
    /// below the scaled upper bound of the bonus predicate.
    pub fn random_employees(rng: &mut impl Rng, rows: usize, bits: u32) -> Self {
        let half = 1u64 << (bits / 2);
        let (_, hi) = employee_bounds(bits).1;
        let bonus_cap = (2 * hi).min(1 << (bits - 1));
        let ids = (0..rows as u64).map(|i| (i + 1) % (1 << bits)).collect();
        let mut draw = |cap: u64| (0..rows).map(|_| rng.gen_range(0..cap)).collect::<Vec<_>>();
        let salary = draw(half);
        let hours = draw(half);
        let bonus = draw(bonus_cap);
        Self::new(vec![("id", ids), ("salary", salary), ("hours", hours), ("bonus", bonus)])
            .expect("columns have equal length")
    }
}

/// Linear expression over columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Expr {
    Col(String),
    Const(u64),
    Add(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn col(name: &str) -> Self {
        Expr::Col(name.to_string())
    }

    pub fn add(self, o: Expr) -> Self {
        Expr::Add(Box::new(self), Box::new(o))
    }

    pub fn mul(self, o: Expr) -> Self {
        Expr::Mul(Box::new(self), Box::new(o))
    }

    pub fn eval_plain(&self, t: &Table, row: usize) -> Result<u64> {
        Ok(match self {
            Expr::Col(c) => t.column(c)?[row],
            Expr::Const(k) => *k,
            Expr::Add(a, b) => a.eval_plain(t, row)? + b.eval_plain(t, row)?,
            Expr::Mul(a, b) => a.eval_plain(t, row)? * b.eval_plain(t, row)?,
        })
    }
}

/// Row predicate. `Between` is inclusive on both ends.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum Predicate {
    Lt(Expr, u64),
    Ge(Expr, u64),
    Between(Expr, u64, u64),
    Not(Box<Predicate>),
    And(Box<Predicate>, Box<Predicate>),
    Or(Box<Predicate>, Box<Predicate>),
}

impl Predicate {
    pub fn and(self, o: Predicate) -> Self {
        Predicate::And(Box::new(self), Box::new(o))
    }

    pub fn or(self, o: Predicate) -> Self {
        Predicate::Or(Box::new(self), Box::new(o))
    }

    pub fn eval_plain(&self, t: &Table, row: usize) -> Result<bool> {
        Ok(match self {
            Predicate::Lt(e, k) => e.eval_plain(t, row)? < *k,
            Predicate::Ge(e, k) => e.eval_plain(t, row)? >= *k,
            Predicate::Between(e, lo, hi) => (*lo..=*hi).contains(&e.eval_plain(t, row)?),
            Predicate::Not(p) => !p.eval_plain(t, row)?,
            Predicate::And(a, b) => a.eval_plain(t, row)? && b.eval_plain(t, row)?,
            Predicate::Or(a, b) => a.eval_plain(t, row)? || b.eval_plain(t, row)?,
        })
    }
}

/// Range bounds of the employee query at `bits`, scaled down from the
/// 13-bit originals for narrower widths.
fn employee_bounds(bits: u32) -> ((u64, u64), (u64, u64)) {
    let scale = |v: u64| if bits < 13 { (v << bits) / 8192 } else { v };
    ((scale(5000), scale(6000)), (scale(700), scale(800)))
}

/// `salary * hours BETWEEN 5000 AND 6000 AND salary + bonus BETWEEN 700 AND 800`.
pub fn employee_query(bits: u32) -> Predicate {
    let ((a, b), (c, d)) = employee_bounds(bits);
    Predicate::Between(Expr::col("salary").mul(Expr::col("hours")), a, b)
        .and(Predicate::Between(Expr::col("salary").add(Expr::col("bonus")), c, d))
}

/// Plaintext reference mask.
pub fn filter_plain(t: &Table, pred: &Predicate) -> Result<Vec<u64>> {
    (0..t.rows()).map(|r| pred.eval_plain(t, r).map(u64::from)).collect()
}

/// Column-batched encrypted table.
#[derive(Debug, Clone)]
pub struct EncTable {
    pub rows: usize,
    pub columns: Vec<(String, EncVec)>,
}

impl EncTable {
    /// Encrypts every column with its value range as the declared interval.
    pub fn encrypt(ctx: &mut EvalContext, t: &Table) -> Result<Self> {
        t.check()?;
        let columns = t
            .columns
            .iter()
            .map(|c| {
                let hi = c.values.iter().copied().max().unwrap_or(0);
                Ok((c.name.clone(), ctx.encrypt_vec_bounded(&c.values, Interval::new(0, hi as i128))?))
            })
            .collect::<Result<_>>()?;
        Ok(Self { rows: t.rows(), columns })
    }

    pub fn column(&self, name: &str) -> Result<&EncVec> {
        self.columns
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, c)| c)
            .ok_or_else(|| Error::InvalidParameter(format!("no column '{name}'")))
    }
}

enum Val {
    Ct(EncVec),
    Plain(u64),
}

fn eval_expr(ctx: &mut EvalContext, t: &EncTable, e: &Expr) -> Result<Val> {
    let n = t.rows;
    Ok(match e {
        Expr::Col(c) => Val::Ct(t.column(c)?.clone()),
        Expr::Const(k) => Val::Plain(*k),
        Expr::Add(a, b) => match (eval_expr(ctx, t, a)?, eval_expr(ctx, t, b)?) {
            (Val::Ct(x), Val::Ct(y)) => Val::Ct(ctx.v_add(&x, &y)?),
            (Val::Ct(x), Val::Plain(k)) | (Val::Plain(k), Val::Ct(x)) => Val::Ct(ctx.v_add_plain(&x, &vec![k; n])?),
            (Val::Plain(x), Val::Plain(y)) => Val::Plain(x + y),
        },
        Expr::Mul(a, b) => match (eval_expr(ctx, t, a)?, eval_expr(ctx, t, b)?) {
            (Val::Ct(x), Val::Ct(y)) => Val::Ct(ctx.v_mul(&x, &y)?),
            (Val::Ct(x), Val::Plain(k)) | (Val::Plain(k), Val::Ct(x)) => Val::Ct(ctx.v_mul_plain(&x, &vec![k; n])?),
            (Val::Plain(x), Val::Plain(y)) => Val::Plain(x * y),
        },
    })
}

fn column_expr(ctx: &mut EvalContext, t: &EncTable, e: &Expr) -> Result<EncVec> {
    match eval_expr(ctx, t, e)? {
        Val::Ct(v) => Ok(v),
        Val::Plain(_) => Err(Error::InvalidParameter("predicate compares constants only".into())),
    }
}

/// `[x < k]`; bounds beyond the lane range are always true.
fn less(ctx: &mut EvalContext, x: &EncVec, k: u64, n: usize) -> Result<EncVec> {
    if k > value_limit(ctx)? {
        let none = compare::lt_plain(ctx, x, &vec![0; n])?;
        return ctx.v_flag_not(&none);
    }
    compare::lt_plain(ctx, x, &vec![k; n])
}

fn eval_pred(ctx: &mut EvalContext, t: &EncTable, p: &Predicate) -> Result<EncVec> {
    let n = t.rows;
    match p {
        Predicate::Lt(e, k) => {
            let x = column_expr(ctx, t, e)?;
            less(ctx, &x, *k, n)
        }
        Predicate::Ge(e, k) => {
            let x = column_expr(ctx, t, e)?;
            let lt = less(ctx, &x, *k, n)?;
            ctx.v_flag_not(&lt)
        }
        Predicate::Between(e, lo, hi) => {
            let x = column_expr(ctx, t, e)?;
            let below = less(ctx, &x, *lo, n)?;
            let ge = ctx.v_flag_not(&below)?;
            let le = less(ctx, &x, hi.saturating_add(1), n)?;
            ctx.v_flag_and(&ge, &le)
        }
        Predicate::Not(a) => {
            let m = eval_pred(ctx, t, a)?;
            ctx.v_flag_not(&m)
        }
        Predicate::And(a, b) => {
            let (x, y) = (eval_pred(ctx, t, a)?, eval_pred(ctx, t, b)?);
            ctx.v_flag_and(&x, &y)
        }
        Predicate::Or(a, b) => {
            let (x, y) = (eval_pred(ctx, t, a)?, eval_pred(ctx, t, b)?);
            ctx.v_flag_or(&x, &y)
        }
    }
}

/// Encrypted 0/1 row mask of `pred`.
pub fn db_filter(ctx: &mut EvalContext, t: &EncTable, pred: &Predicate) -> Result<EncVec> {
    eval_pred(ctx, t, pred)
}

/// The `id` column with non-matching rows zeroed.
pub fn db_select_ids(ctx: &mut EvalContext, t: &EncTable, mask: &EncVec) -> Result<EncVec> {
    let ids = t.column("id")?.clone();
    ctx.v_mask_mul(mask, &ids)
}
