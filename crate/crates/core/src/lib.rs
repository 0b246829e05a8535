//! Coefficients of Catalan states of the lattice crossing `L(m,n)` in the
//! Kauffman bracket skein module, computed exactly.

pub mod cli;
pub mod coeff;
pub mod kauffman;
pub mod laurent;
pub mod maxseq;
pub mod states;
pub mod trees;
