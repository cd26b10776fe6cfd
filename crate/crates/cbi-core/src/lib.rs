//! A verification workbench for Classical BI (CBI).
//!
//! The crate provides:
//!
//! - [`formula`]: CBI formula syntax, parsing, and rendering;
//! - [`semantics`]: finite CBI-models, the forcing semantics, truth and
//!   validity checking, countermodel search, and constructive model builders;
//! - [`display`]: the display calculus DL_CBI — structures, consecutions,
//!   display postulates, proof rules, proof checking, and static audits;
//! - [`search`]: bounded cut-free backward proof search;
//! - [`modal`]: the modal-logic presentation of CBI and the translations
//!   between the two.
//!
//! Everything is pure and immutable; all types are safe to share across
//! threads.

pub mod display;
pub mod fixtures;
pub mod formula;
pub mod modal;
pub mod search;
pub mod semantics;
