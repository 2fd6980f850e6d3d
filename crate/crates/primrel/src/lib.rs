//! Primitive-relation calculus for smooth projective toric varieties.
//!
//! A fan is presented by its ray generators and the full set of primitive
//! relations. On top of that encoding the crate provides the three birational
//! rewrite rules (blow-up, blow-down, star flip), a Fano test, Mori-cone
//! extremality, a brute-force geometric oracle that certifies every output,
//! and the staged anti-flip construction turning the blow-up of projective
//! space at torus-invariant points into a smooth Fano variety.

pub mod constructions;
pub mod error;
pub mod lattice;
pub mod mori;
pub mod oracle;
pub mod presentation;
pub mod transforms;

pub use error::{Error, Result};
pub use presentation::{FanPresentation, Label, PrimitiveRelation};
