//! Workbench for finitary essentially algebraic theories: multi-sorted
//! signatures whose partial operations are defined by equations in total ones.
//!
//! The crate covers theories and terms ([`theory`], [`text`]), a bounded
//! congruence-closure engine ([`engine`]), finite models and their limits
//! ([`model`]), relations ([`relation`]), Mal'tsev and regularity witnesses
//! ([`maltsev`]) and lazily generated fragments of the free regular Mal'tsev
//! completion theory ([`gamma`]).
//!
//! ```
//! use eatwb_core::{engine::Limits, engine::Prover, fixtures, text::parse_term, theory::*};
//!
//! let th = fixtures::z2_vector_spaces();
//! let ctx = Context::from_pairs([("x", "v"), ("y", "v")]);
//! let (l, _) = parse_term(&th, &ctx, "add(x,add(x,y))")?;
//! let (r, _) = parse_term(&th, &ctx, "y")?;
//! let j = Prover::new(th, Limits::with_depth(4)).prove(&Equation::new(ctx, l, r));
//! assert!(j.is_proved());
//! # Ok::<(), eatwb_core::Error>(())
//! ```

pub mod egraph;
pub mod engine;
pub mod enumerate;
pub mod error;
pub mod files;
pub mod fixtures;
pub mod gamma;
pub mod maltsev;
pub mod model;
pub mod relation;
pub mod text;
pub mod theory;

pub use error::{Error, Result};
