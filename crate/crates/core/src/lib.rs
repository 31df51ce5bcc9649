//! Exact computations with twisted logarithmic de Rham complexes.

pub mod charp;
pub mod exactalg;
pub mod filtcx;
pub mod localmodel;
pub mod p1global;
pub mod par;
