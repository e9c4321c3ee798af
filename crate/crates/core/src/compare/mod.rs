//! Exact less-than and equality under each encoding.

mod digits;
mod facade;
mod interp;
mod xcmp;

pub use digits::{
    decompose, decrypt_digits, digit_depth_bound, encrypt_digits, eq_digits, eq_digits_plain, lift, lift_mults,
    lt_digits, lt_digits_plain, reduction_mults, DigitCipher, DigitVec,
};
pub use facade::{bit_lt, compare, eq, eq_plain, le, lt, lt_plain};
pub use interp::{eq_fermat, eq_fermat_plain, lt_interp};
pub use xcmp::{lt_xcmp, xcmp, xcmp_wide, XcmpOutcome};
