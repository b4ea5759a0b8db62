//! Read-once quantum formula dequantization and one-qubit program compilation.
//!
//! The library is generic over the real scalar ([`Real`], implemented for
//! `f32` and `f64`). The `*64` and `*32` aliases below fix the scalar for
//! callers that do not need the generality.
//!
//! Modules:
//! - [`qlinalg`]: dense complex matrices, density matrices, Kraus channels.
//! - [`ir`]: formula, circuit and program trees plus their JSON codec.
//! - [`simulate`]: exhaustive evaluation and reachable-state enumeration.
//! - [`dequantize`]: exact and bounded-error conversion to classical formulas.
//! - [`toffoli`]: the traced Toffoli channel and its depth-one classification.
//! - [`oqp`]: boolean circuit to one-qubit program compiler.
//! - [`genrand`]: seeded corpus generators.

pub mod dequantize;
pub mod genrand;
pub mod ir;
pub mod oqp;
pub mod qlinalg;
mod scalar;
pub mod simulate;
pub mod toffoli;

pub use scalar::Real;

pub type Cx64 = qlinalg::Cx<f64>;
pub type Mat64 = qlinalg::Mat<f64>;
pub type DensityMatrix64 = qlinalg::DensityMatrix<f64>;
pub type Channel64 = qlinalg::Channel<f64>;
pub type Tolerances64 = qlinalg::Tolerances<f64>;
pub type QFormula64 = ir::QFormula<f64>;
pub type OneQubitProgram64 = ir::OneQubitProgram<f64>;
pub type DequantizeOutput64 = dequantize::DequantizeOutput<f64>;

pub type Cx32 = qlinalg::Cx<f32>;
pub type Mat32 = qlinalg::Mat<f32>;
pub type DensityMatrix32 = qlinalg::DensityMatrix<f32>;
pub type Channel32 = qlinalg::Channel<f32>;
pub type Tolerances32 = qlinalg::Tolerances<f32>;
pub type QFormula32 = ir::QFormula<f32>;
pub type OneQubitProgram32 = ir::OneQubitProgram<f32>;
pub type DequantizeOutput32 = dequantize::DequantizeOutput<f32>;
