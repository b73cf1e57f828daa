//! Attribute-based encryption over monotone access formulas, built on a
//! secret-sharing scheme in which every trustee holds a single master key
//! and derives all of their shares from it with a PRF. Public "fictitious
//! trustee" values embedded in the published formula make reconstruction
//! line up with the secret.
//!
//! The crate is `no_std` (alloc required). IO, JSON file formats and the
//! command-line front end live in the companion `mkabe-cli` crate.
//!
//! Module map:
//! * [`formula`]: parsing, normalization, addressing and evaluation of
//!   monotone AND/OR access formulas.
//! * [`crypto`]: Schnorr-subgroup arithmetic, scalar sampling and the PRF
//!   family instantiations.
//! * [`sss_standard`]: the Benaloh–Leichter generalized secret-sharing
//!   scheme, used as a correctness and secrecy oracle.
//! * [`sss_advanced`]: the master-key scheme: the `g_s` formula transform,
//!   PRF share derivation and reconstruction.
//! * [`abe`]: setup/encrypt/decrypt with Diffie–Hellman derived master keys.
//! * [`games`]: executable security games (Selective-Id, Selective-Set,
//!   m-PRF, m-DDH) with pluggable adversaries.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod abe;
pub mod crypto;
pub mod formula;
pub mod games;
pub mod sss_advanced;
pub mod sss_standard;

pub use formula::{AddressedFormula, AttributeId, FormulaNode, ModifiedFormula, VarLeaf, YLeaf};
