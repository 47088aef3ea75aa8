//! Inexact proximal operators as objects of study: six approximation models
//! of `prox_phi`, their quality and regularity constants, and the splitting
//! algorithms (proximal point, forward-backward, Peaceman-Rachford,
//! Douglas-Rachford) that keep converging to a ball when the errors never
//! vanish.
//!
//! The crate is organized around a small penalty catalog with closed-form
//! proximal operators (`penalties`), constructors for the approximation
//! types (a)-(e) (`approx`) and the Monte-Carlo type (f) (`hjprox`), the
//! iteration drivers and contraction-factor calculators (`algorithms`), and
//! a proposition-keyed verification registry (`verify`).

pub mod algorithms;
pub mod approx;
pub mod hjprox;
pub mod linalg;
pub mod oracle;
pub mod penalties;
pub mod schedule;
pub mod sets;
pub mod svg;
pub mod verify;

pub use approx::{ApproxKind, ApproxOperator, Constants, LipschitzPair};
pub use penalties::Penalty;
pub use schedule::Schedule;
pub use sets::ConvexSet;
