//! Finite-rank quantum transfer operator `M(z, h)`.
//!
//! Each block is the kernel quantization
//! `K(y, y') = (2 pi h)^(-1/2) |S_yy'|^(1/2) exp(i (S + z tau) / h)` of a
//! fitted return-map block, compressed between the Hermite bases of the
//! elliptic projectors of its source and target charts. The open baker map is
//! the exactly solvable toy model.

pub mod baker;
pub mod block;
pub mod io;
pub mod projector;

pub use baker::{open_baker, shifted_dft};
pub use block::{assemble_m, BlockKernel, QuantParams, QuantumBlock, QuantumSystem, QuantumTransferOperator};
pub use io::{read_matrix, save_operator, write_matrix, MatrixFile, Sidecar};
pub use projector::{build_projector, build_projector_with, hermite_functions, projector_rank, ProjectorParams, SectionProjector};
