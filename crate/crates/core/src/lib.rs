//! Exact computations with valued-field filtrations of `SL_2`, its affine
//! Kac-Moody extension and the Bruhat-Tits tree, together with randomized
//! verification suites for the identities relating them.

#![allow(clippy::needless_range_loop)]

pub mod affine_sl2;
pub mod expr;
pub mod harness;
pub mod root_data;
pub mod sl2_rank1;
pub mod valued_field;
