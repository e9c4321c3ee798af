//! Private decision-tree evaluation with layer-batched comparisons.
//!
//! Thresholds and the tree shape stay with the server as plaintext; the
//! client's features are encrypted. A leaf is reached iff no node on its
//! path points the other way, so its indicator is `[wrong-turn count = 0]`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::compare;
use crate::emulator::{EncVec, EvalContext, Interval};
use crate::error::{Error, Result};

/// Complete binary tree in level order. At node `q` of level `l` the
/// traversal goes left iff `x[features[l][q]] < thresholds[l][q]`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tree {
    pub depth: usize,
    pub thresholds: Vec<Vec<u64>>,
    pub features: Vec<Vec<usize>>,
    pub labels: Vec<u64>,
}

impl Tree {
    /// Builds a tree from level-order node lists. Every node reads feature 0
    /// unless `features` is given.
    pub fn from_levels(thresholds: Vec<Vec<u64>>, features: Option<Vec<Vec<usize>>>, labels: Vec<u64>) -> Result<Self> {
        let depth = thresholds.len();
        let features = features.unwrap_or_else(|| thresholds.iter().map(|l| vec![0; l.len()]).collect());
        let t = Self { depth, thresholds, features, labels };
        t.check_shape()?;
        Ok(t)
    }

    pub fn leaves(&self) -> usize {
        1 << self.depth
    }

    pub fn feature_count(&self) -> usize {
        self.features.iter().flatten().max().map_or(1, |&f| f + 1)
    }

    fn check_shape(&self) -> Result<()> {
        if self.depth == 0 {
            return Err(Error::InvalidParameter("tree depth must be at least 1".into()));
        }
        for l in 0..self.depth {
            if self.thresholds[l].len() != 1 << l || self.features.get(l).map(Vec::len) != Some(1 << l) {
                return Err(Error::InvalidParameter(format!("level {l} must hold {} nodes", 1 << l)));
            }
        }
        if self.features.len() != self.depth {
            return Err(Error::InvalidParameter("feature routing does not match the depth".into()));
        }
        if self.labels.len() != self.leaves() {
            return Err(Error::InvalidParameter(format!(
                "{} labels for {} leaves",
                self.labels.len(),
                self.leaves()
            )));
        }
        Ok(())
    }

    /// Plaintext inference.
    pub fn infer_plain(&self, x: &[u64]) -> u64 {
        let mut node = 0;
        for l in 0..self.depth {
            let right = x[self.features[l][node]] >= self.thresholds[l][node];
            node = 2 * node + usize::from(right);
        }
        self.labels[node]
    }

    /// Random tree with values below `limit` reading from `n_features` features.
    pub fn random(rng: &mut impl Rng, depth: usize, n_features: usize, limit: u64) -> Self {
        let thresholds = (0..depth).map(|l| (0..1 << l).map(|_| rng.gen_range(0..limit)).collect()).collect();
        let features = (0..depth).map(|l| (0..1 << l).map(|_| rng.gen_range(0..n_features)).collect()).collect();
        let labels = (0..1 << depth).map(|_| rng.gen_range(0..limit)).collect();
        Self { depth, thresholds, features, labels }
    }

    /// Node of level `l` on the path to `leaf`.
    fn node_of(&self, l: usize, leaf: usize) -> usize {
        leaf >> (self.depth - l)
    }

    /// Whether `leaf` lies in the right subtree of its level-`l` node.
    fn turns_right(&self, l: usize, leaf: usize) -> bool {
        (leaf >> (self.depth - 1 - l)) & 1 == 1
    }
}

/// Server-side tree with thresholds spread to one lane per leaf.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncTree {
    pub tree: Tree,
    /// Per level: the governing node's threshold in every leaf lane.
    pub leaf_thresholds: Vec<Vec<u64>>,
    /// Per level and feature: 0/1 lanes of the leaves whose node reads it.
    routing: Vec<Vec<Vec<u64>>>,
}

impl EncTree {
    pub fn new(tree: Tree, limit: u64) -> Result<Self> {
        tree.check_shape()?;
        if let Some(&big) = tree.labels.iter().chain(tree.thresholds.iter().flatten()).find(|&&v| v > limit) {
            return Err(Error::InvalidParameter(format!("tree value {big} exceeds lane limit {limit}")));
        }
        let leaves = tree.leaves();
        let nf = tree.feature_count();
        let leaf_thresholds = (0..tree.depth)
            .map(|l| (0..leaves).map(|j| tree.thresholds[l][tree.node_of(l, j)]).collect())
            .collect();
        let routing = (0..tree.depth)
            .map(|l| {
                (0..nf)
                    .map(|f| (0..leaves).map(|j| u64::from(tree.features[l][tree.node_of(l, j)] == f)).collect())
                    .collect()
            })
            .collect();
        Ok(Self { tree, leaf_thresholds, routing })
    }
}

/// Encrypted features: one ciphertext per feature. Word-wise ciphertexts
/// replicate the value across every leaf lane.
#[derive(Debug, Clone)]
pub struct EncFeatures(pub Vec<EncVec>);

pub fn encrypt_features(ctx: &mut EvalContext, x: &[u64], leaves: usize, bound: u64) -> Result<EncFeatures> {
    let lanes = if ctx.method().word_wise() { leaves } else { 1 };
    let range = Interval::new(0, bound as i128);
    Ok(EncFeatures(x.iter().map(|&v| ctx.encrypt_vec_bounded(&vec![v; lanes], range)).collect::<Result<_>>()?))
}

#[derive(Debug, Clone)]
pub struct PdteOutput {
    /// The label, in lane 0 (every lane for word-wise methods).
    pub label: EncVec,
    /// One-hot leaf indicators.
    pub indicators: EncVec,
}

/// Per-level `[x < t]` over the leaf lanes.
fn level_flags(ctx: &mut EvalContext, tree: &EncTree, x: &EncFeatures, l: usize) -> Result<EncVec> {
    let t = &tree.tree;
    if ctx.method().word_wise() {
        // gather each leaf's feature value, then one batched comparison
        let terms = tree.routing[l]
            .iter()
            .enumerate()
            .filter(|(_, mask)| mask.contains(&1))
            .map(|(f, mask)| ctx.v_mul_plain(&x.0[f], mask))
            .collect::<Result<Vec<_>>>()?;
        let xs = ctx.v_one_hot_sum(&terms)?;
        compare::lt_plain(ctx, &xs, &tree.leaf_thresholds[l])
    } else {
        let nodes = EncVec::Bits(
            t.features[l]
                .iter()
                .map(|&f| match &x.0[f] {
                    EncVec::Bits(v) => Ok(v[0].clone()),
                    EncVec::Word { .. } => Err(Error::ContextMismatch("word features on bit lanes".into())),
                })
                .collect::<Result<_>>()?,
        );
        let c = compare::lt_plain(ctx, &nodes, &t.thresholds[l])?;
        let EncVec::Bits(c) = c else { unreachable!("bit lanes in, bit lanes out") };
        Ok(EncVec::Bits((0..t.leaves()).map(|j| c[t.node_of(l, j)].clone()).collect()))
    }
}

/// Per-lane choice between two encrypted vectors by a plaintext 0/1 pattern.
fn choose(ctx: &mut EvalContext, pick_a: &[u64], a: &EncVec, b: &EncVec) -> Result<EncVec> {
    match (a, b) {
        (EncVec::Bits(x), EncVec::Bits(y)) => Ok(EncVec::Bits(
            pick_a.iter().zip(x.iter().zip(y)).map(|(&s, (p, q))| if s == 1 { p } else { q }.clone()).collect(),
        )),
        _ => {
            let other: Vec<u64> = pick_a.iter().map(|s| 1 - s).collect();
            let pa = ctx.v_mul_plain(a, pick_a)?;
            let pb = ctx.v_mul_plain(b, &other)?;
            ctx.v_one_hot_sum(&[pa, pb])
        }
    }
}

/// Encrypted inference: `depth` batched comparisons, one equality on the
/// wrong-turn counts, and a masked sum of the labels.
pub fn pdte_infer(ctx: &mut EvalContext, tree: &EncTree, x: &EncFeatures) -> Result<PdteOutput> {
    let t = &tree.tree;
    if x.0.len() < t.feature_count() {
        return Err(Error::InvalidParameter(format!(
            "tree reads {} features, {} supplied",
            t.feature_count(),
            x.0.len()
        )));
    }
    let leaves = t.leaves();
    let mut wrong: Option<EncVec> = None;
    for l in 0..t.depth {
        let go_left = level_flags(ctx, tree, x, l)?;
        let go_right = ctx.v_flag_not(&go_left)?;
        // a right-subtree leaf is missed when the node goes left, and vice versa
        let right: Vec<u64> = (0..leaves).map(|j| u64::from(t.turns_right(l, j))).collect();
        let w = choose(ctx, &right, &go_left, &go_right)?;
        wrong = Some(match wrong {
            None => w,
            Some(acc) => ctx.v_add(&acc, &w)?,
        });
    }
    let wrong = wrong.expect("depth is at least 1");
    let indicators = compare::eq_plain(ctx, &wrong, &vec![0; leaves])?;
    let weighted = ctx.v_mul_plain(&indicators, &t.labels)?;
    let label = ctx.v_one_hot_sum_lanes(&weighted)?;
    Ok(PdteOutput { label, indicators })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apps::value_limit;
    use crate::emulator::Method;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn run(m: Method, bits: u32, tree: &Tree, x: &[u64]) -> (u64, Vec<u64>, EvalContext) {
        let mut ctx = EvalContext::new(m, bits, tree.leaves()).unwrap();
        ctx.auto_refresh = true;
        let bound = (1u64 << bits) - 1;
        let et = EncTree::new(tree.clone(), value_limit(&ctx).unwrap()).unwrap();
        let fx = encrypt_features(&mut ctx, x, tree.leaves(), bound).unwrap();
        let out = pdte_infer(&mut ctx, &et, &fx).unwrap();
        let label = ctx.decrypt_vec(&out.label)[0];
        let ind = ctx.decrypt_vec(&out.indicators);
        (label, ind, ctx)
    }

    #[test]
    fn depth_two_example() {
        let tree = Tree::from_levels(vec![vec![5], vec![3, 7]], None, vec![10, 20, 30, 40]).unwrap();
        assert_eq!(tree.infer_plain(&[4]), 20);
        for m in Method::ALL {
            let (label, ind, ctx) = run(m, 8, &tree, &[4]);
            assert_eq!(label, 20, "{m}");
            assert_eq!(ind, vec![0, 1, 0, 0]);
            assert_eq!((ctx.ledger.comparisons, ctx.ledger.equalities), (2, 1));
        }
    }

    #[test]
    fn zero_thresholds_go_right() {
        let tree = Tree::from_levels(vec![vec![0], vec![0, 0], vec![0; 4]], None, (1..=8).collect()).unwrap();
        for m in Method::ALL {
            assert_eq!(run(m, 6, &tree, &[13]).0, 8);
        }
    }

    #[test]
    fn random_trees_match_plain() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        for m in Method::ALL {
            for d in [1, 3, 5] {
                for _ in 0..4 {
                    let tree = Tree::random(&mut rng, d, 3, 256);
                    let x: Vec<u64> = (0..3).map(|_| rng.gen_range(0..256)).collect();
                    let (label, ind, ctx) = run(m, 8, &tree, &x);
                    assert_eq!(label, tree.infer_plain(&x), "{m} d={d}");
                    assert_eq!(ind.iter().sum::<u64>(), 1);
                    assert!(ctx.diagnostics.is_empty(), "{:?}", ctx.diagnostics);
                }
            }
        }
    }

    #[test]
    fn malformed_trees_rejected() {
        assert!(Tree::from_levels(vec![vec![1], vec![2]], None, vec![0; 4]).is_err());
        assert!(Tree::from_levels(vec![vec![1]], None, vec![0; 3]).is_err());
        let t = Tree::from_levels(vec![vec![1]], None, vec![300, 0]).unwrap();
        assert!(EncTree::new(t, 255).is_err());
    }
}
