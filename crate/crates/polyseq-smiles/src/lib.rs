//! SMILES parsing, writing, canonicalization, and rotation-based enumeration
//! for polymer repeating units (`*` marks chain attachment points).
//!
//! The supported grammar covers the organic subset, bracket atoms with charge
//! and explicit hydrogen counts, aromatic lowercase atoms, ring closures
//! (including `%nn`), branches, bond orders, stereo bond markers `/` `\`,
//! tetrahedral `@`/`@@`, and the `*` wildcard. Isotopes and extended
//! chirality classes are rejected. There is no valence model: tokenization
//! and augmentation downstream are purely syntactic.

pub mod canon;
pub mod graph;
pub mod parse;
pub mod sample;
pub mod write;

pub use canon::{canonical_ranks, canonicalize};
pub use graph::{Atom, Bond, BondOrder, BondStereo, Chirality, MolecularGraph};
pub use parse::{parse_smiles, SyntaxError};
pub use write::{enumerate_smiles, write_smiles};
