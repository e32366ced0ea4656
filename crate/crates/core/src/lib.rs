//! Intermediate beta-transformations `T_{beta,alpha}(x) = beta x + alpha mod 1`:
//! exact multinacci arithmetic, Parry densities, matching intervals and the
//! mean normalized error `M_beta(alpha)`.

pub mod arith;
pub mod density;
pub mod dynamics;
pub mod error;
mod kernel;
pub mod matching;
pub mod mvalue;
pub mod numberfield;
pub mod verify;

pub use arith::{Arithmetic, ExactArith, FloatArith, Floor};
pub use dynamics::{BetaSpec, Regime, TransformParams, Variant};
pub use error::{Error, Result};
pub use numberfield::{FieldElement, MultinacciField, Rational, RootEnclosure, Sign};

/// Parameters evaluated exactly in `Q(beta_{q,m})`.
pub type ExactParams = TransformParams<ExactArith>;
/// Parameters evaluated in `f64`.
pub type FloatParams = TransformParams<FloatArith<f64>>;
/// Parameters evaluated in `f32`.
pub type Float32Params = TransformParams<FloatArith<f32>>;
