//! Boolean-function tooling: communication matrices and their ranks,
//! GF(2) decompositions, the decomposition-to-protocol compiler and
//! transcript rectangles.

mod compile;
mod matrix;
mod rects;

pub use compile::{compile_clean, gf2_decompose, threshold, CompileMode, CompileReport, Compiled, Gf2Decomposition};
pub use matrix::{comm_matrix, log_rank_bound, rank, CommMatrix, Field};
pub use rects::{extract_rectangles, Rectangle, RectanglePartition, Violation};
