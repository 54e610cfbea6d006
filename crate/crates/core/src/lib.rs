//! Numerics for iterating a Baker-type entire function built as an infinite
//! product: log-polar complex arithmetic, evaluation of `h`, `f = z + e^h`
//! and `g`, hyperbolic-metric checks, growth and obstruction verifiers,
//! orbit classification and PPM rendering.

// `!(x > 0.0)` is deliberate throughout: it rejects NaN along with the bound.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod acceptance;
pub mod dynamics;
pub mod error;
pub mod hfun;
pub mod hyperbolic;
pub mod logc;
pub mod params;
pub mod render;
pub mod verify;

pub use error::{DynError, EvalError, HypError, ParamError, VerifyError};
pub use hfun::{eval_f, eval_g, eval_h, EvalResult, Regime};
pub use logc::{LogComplex, MaybeZeroLC};
pub use params::{make_toy, ParamSeq, Profile};
