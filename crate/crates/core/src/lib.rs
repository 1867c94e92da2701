// Numerical kernels index several arrays with one loop counter, and
// `!(x > 0.0)` style guards reject NaN along with out-of-range values.
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod linalg;
pub mod models;
pub mod circstats;
pub mod entropy;
pub mod nonorth;
pub mod sweep;
pub mod io;
pub mod selftest;
