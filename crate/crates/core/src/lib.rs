// SPDX-License-Identifier: Apache-2.0

//! Lindblad dynamics of an XY spin chain whose sites are coupled to thermal
//! spin baths.
//!
//! Site 1 is the leftmost Kronecker factor and the single-spin basis is
//! ordered `(|↑⟩, |↓⟩)`, so `σ_z = diag(1, −1)` and the Gibbs state
//! `ρ_β = e^{−βσ_z}/Tr e^{−βσ_z} = diag(β_0, β_1)`.

pub mod error;
pub mod lindblad;
pub mod model;
pub mod operators;
pub mod rqi;
pub mod sampling;
pub mod steady;
pub mod thermo;

pub use error::{Error, Result};
pub use lindblad::{EvolveMethod, Lindbladian, Picture, SuperOperator};
pub use model::{BathSpec, ChainParams, LindbladModel};
pub use operators::{CMatrix, ChainOperator};
