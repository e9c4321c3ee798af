//! Applications built from the lane operations and comparisons.

pub mod db;
pub mod floyd;
pub mod pdte;
pub mod sort;
pub use db::{db_filter, db_select_ids, employee_query, filter_plain, Column, EncTable, Expr, Predicate, Table};
pub use floyd::{floyd_warshall_enc, floyd_warshall_plain, EncGraph, Graph, Matrix};
pub use pdte::{encrypt_features, pdte_infer, EncFeatures, EncTree, PdteOutput, Tree};
pub use sort::{direct_sort, SortOutput};

use crate::emulator::EvalContext;
use crate::error::Result;

/// Largest plaintext a lane can hold in `ctx`: p^r - 1 for word-wise
/// methods, 2^b - 1 for bit-wise.
pub fn value_limit(ctx: &EvalContext) -> Result<u64> {
    if ctx.method().word_wise() {
        Ok(ctx.params()?.modulus() - 1)
    } else {
        Ok((1u64 << ctx.bits()) - 1)
    }
}
