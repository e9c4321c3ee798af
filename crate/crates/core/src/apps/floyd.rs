//! All-pairs shortest paths with row-batched distance and next-hop matrices.

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::value_limit;
use crate::compare;
use crate::emulator::{EncVec, EvalContext, Interval};
use crate::error::{Error, Result};

pub type Matrix = Vec<Vec<u64>>;

/// Directed graph with non-negative integer weights.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Graph {
    pub n: usize,
    pub edges: Vec<(usize, usize, u64)>,
}

impl Graph {
    pub fn new(n: usize) -> Self {
        Self { n, edges: Vec::new() }
    }

    pub fn max_weight(&self) -> u64 {
        self.edges.iter().map(|e| e.2).max().unwrap_or(0)
    }

    /// Adjacency matrix with `inf` for missing edges and 0 on the diagonal.
    /// Parallel edges keep the lightest weight.
    pub fn to_matrix(&self, inf: u64) -> Result<Matrix> {
        let mut m = vec![vec![inf; self.n]; self.n];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 0;
        }
        for &(u, v, w) in &self.edges {
            if u >= self.n || v >= self.n {
                return Err(Error::InvalidParameter(format!("edge ({u}, {v}) outside {} nodes", self.n)));
            }
            if w >= inf {
                return Err(Error::InvalidParameter(format!("weight {w} reaches INF = {inf}")));
            }
            m[u][v] = m[u][v].min(w);
        }
        Ok(m)
    }

    /// Random graph with edge probability `density` and weights in `0..=max_w`.
    pub fn random(rng: &mut impl Rng, n: usize, density: f64, max_w: u64) -> Self {
        let mut g = Self::new(n);
        for u in 0..n {
            for v in 0..n {
                if u != v && rng.gen_bool(density) {
                    g.edges.push((u, v, rng.gen_range(0..=max_w)));
                }
            }
        }
        g
    }
}

/// INF sentinel for a context: half the largest lane value.
pub fn inf_for(ctx: &EvalContext) -> Result<u64> {
    Ok(value_limit(ctx)? / 2)
}

/// Largest edge weight for which no relaxation sum on `n` nodes reaches `inf`.
pub fn max_safe_weight(n: usize, inf: u64) -> u64 {
    (inf - 1) / (2 * n.saturating_sub(1).max(1) as u64)
}

/// Plaintext Floyd-Warshall over a square matrix. Returns distances and
/// next-hop indices (`P[i][j]` is the first node after `i` on the path).
pub fn floyd_warshall_plain(adj: &[Vec<u64>], inf: u64) -> Result<(Matrix, Matrix)> {
    let n = adj.len();
    if adj.iter().any(|r| r.len() != n) {
        return Err(Error::InvalidParameter("adjacency matrix is not square".into()));
    }
    let mut d: Matrix = adj.iter().map(|r| r.iter().map(|&w| w.min(inf)).collect()).collect();
    let mut p: Matrix = (0..n).map(|_| (0..n as u64).collect()).collect();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = d[i][k] + d[k][j];
                if via < d[i][j] {
                    d[i][j] = via;
                    p[i][j] = p[i][k];
                }
            }
        }
    }
    Ok((d, p))
}

/// Row-batched encrypted distance and next-hop matrices.
#[derive(Debug, Clone)]
pub struct EncGraph {
    pub n: usize,
    pub dist: Vec<EncVec>,
    pub next: Vec<EncVec>,
    pub inf: u64,
}

impl EncGraph {
    /// Encrypts the graph for `ctx`, rejecting weights that could let a
    /// relaxation sum reach INF.
    pub fn encrypt(ctx: &mut EvalContext, g: &Graph) -> Result<Self> {
        let inf = inf_for(ctx)?;
        let cap = max_safe_weight(g.n, inf);
        if g.max_weight() > cap {
            return Err(Error::RangeViolation(format!(
                "weight {} exceeds {cap}; paths on {} nodes could reach INF = {inf}",
                g.max_weight(),
                g.n
            )));
        }
        let adj = g.to_matrix(inf)?;
        let n = g.n;
        let dist = adj
            .iter()
            .map(|row| ctx.encrypt_vec_bounded(row, Interval::new(0, inf as i128)))
            .collect::<Result<_>>()?;
        let cols: Vec<u64> = (0..n as u64).collect();
        let next = (0..n)
            .map(|_| ctx.encrypt_vec_bounded(&cols, Interval::new(0, n as i128 - 1)))
            .collect::<Result<_>>()?;
        Ok(Self { n, dist, next, inf })
    }

    pub fn decrypt(&self, ctx: &EvalContext) -> (Matrix, Matrix) {
        (
            self.dist.iter().map(|r| ctx.decrypt_vec(r)).collect(),
            self.next.iter().map(|r| ctx.decrypt_vec(r)).collect(),
        )
    }
}

/// Encrypted Floyd-Warshall: for each `(k, i)` one lane-wise comparison of
/// `D[i,k] + D[k,:]` against `D[i,:]` and two masked updates.
pub fn floyd_warshall_enc(ctx: &mut EvalContext, g: &EncGraph) -> Result<EncGraph> {
    let mut out = g.clone();
    for k in 0..g.n {
        sweep(ctx, &mut out, k).inspect_err(|e| {
            ctx.diagnostics.push(format!("floyd-warshall stopped at k = {k}: {e}"));
        })?;
    }
    Ok(out)
}

fn sweep(ctx: &mut EvalContext, g: &mut EncGraph, k: usize) -> Result<()> {
    let row_k = g.dist[k].clone();
    for i in 0..g.n {
        let d_ik = ctx.v_broadcast(&g.dist[i], k)?;
        let via = ctx.v_add(&d_ik, &row_k)?;
        let m = compare::lt(ctx, &via, &g.dist[i])?;
        g.dist[i] = ctx.v_select_lesser(&m, &via, &g.dist[i])?;
        let p_ik = ctx.v_broadcast(&g.next[i], k)?;
        g.next[i] = ctx.v_select(&m, &p_ik, &g.next[i])?;
    }
    Ok(())
}
