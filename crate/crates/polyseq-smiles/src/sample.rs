//! Seeded random molecule generation for tests and corpus construction.
//!
//! Graphs produced here stay inside the supported grammar subset: organic
//! and bracket atoms, charges in range, aromatic rings with aromatic bonds
//! only, occasional stereo markers and wildcards.

use crate::graph::{Atom, Bond, BondOrder, BondStereo, Chirality, MolecularGraph};

/// Small deterministic generator (SplitMix64). Not cryptographic; exists so
/// test corpora are reproducible without external crates.
#[derive(Debug, Clone)]
pub struct Rng(u64);

impl Rng {
    pub fn new(seed: u64) -> Self {
        Rng(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform in `0..n` (n > 0).
    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    /// Uniform in `[0, 1)`.
    pub fn f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn chance(&mut self, p: f64) -> bool {
        self.f64() < p
    }

    pub fn pick<'a, T>(&mut self, items: &'a [T]) -> &'a T {
        &items[self.below(items.len())]
    }

    /// Fisher-Yates shuffle.
    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        for i in (1..items.len()).rev() {
            items.swap(i, self.below(i + 1));
        }
    }
}

const CHAIN_ELEMENTS: &[&str] = &["C", "C", "C", "C", "C", "O", "O", "N", "S"];
const SUBSTITUENTS: &[&str] = &["F", "Cl", "Br", "I", "Si", "Se", "Na", "Li"];

/// Random connected molecular graph with 1..=max_atoms heavy atoms.
pub fn random_graph(rng: &mut Rng, max_atoms: usize) -> MolecularGraph {
    assert!(max_atoms >= 1);
    let target = 1 + rng.below(max_atoms);
    let mut g = MolecularGraph::default();

    let first = pick_element(rng);
    g.atoms.push(Atom::new(first, 0));
    while g.atoms.len() < target {
        if g.atoms.len() + 6 <= target && rng.chance(0.2) {
            attach_aromatic_ring(rng, &mut g);
            continue;
        }
        let idx = g.atoms.len();
        let element = if rng.chance(0.15) {
            (*rng.pick(SUBSTITUENTS)).to_string()
        } else {
            pick_element(rng)
        };
        let mut atom = Atom::new(element, idx);
        if rng.chance(0.05) && matches!(atom.element.as_str(), "N" | "O") {
            atom.charge = if atom.element == "N" { 1 } else { -1 };
        }
        if rng.chance(0.04) && atom.element == "N" {
            atom.explicit_h = Some(1 + rng.below(3) as u8);
        }
        if rng.chance(0.04) && atom.element == "C" {
            atom.chirality = if rng.chance(0.5) {
                Chirality::Clockwise
            } else {
                Chirality::Counterclockwise
            };
        }
        g.atoms.push(atom);
        let anchor = pick_open_atom(rng, &g, idx);
        let order = if rng.chance(0.12)
            && !g.atoms[anchor].aromatic
            && g.atoms[idx].element == "C"
            && g.atoms[anchor].element != "F"
        {
            if rng.chance(0.2) {
                BondOrder::Triple
            } else {
                BondOrder::Double
            }
        } else {
            BondOrder::Single
        };
        let stereo = if order == BondOrder::Single && rng.chance(0.04) {
            if rng.chance(0.5) {
                BondStereo::Up
            } else {
                BondStereo::Down
            }
        } else {
            BondStereo::None
        };
        g.bonds.push(Bond {
            a: anchor,
            b: idx,
            order,
            stereo,
        });
    }

    // occasional aliphatic ring closure between existing atoms
    if g.atoms.len() >= 5 && rng.chance(0.3) {
        for _ in 0..3 {
            let a = rng.below(g.atoms.len());
            let b = rng.below(g.atoms.len());
            if a != b
                && !g.atoms[a].aromatic
                && !g.atoms[b].aromatic
                && g.bond_between(a, b).is_none()
            {
                g.bonds.push(Bond {
                    a,
                    b,
                    order: BondOrder::Single,
                    stereo: BondStereo::None,
                });
                break;
            }
        }
    }

    // wildcards at the ends make many samples look like repeating units
    if rng.chance(0.4) {
        for _ in 0..2 {
            let idx = g.atoms.len();
            let anchor = pick_open_atom(rng, &g, idx);
            g.atoms.push(Atom::new("*", idx));
            g.bonds.push(Bond {
                a: anchor,
                b: idx,
                order: BondOrder::Single,
                stereo: BondStereo::None,
            });
        }
    }
    g
}

/// Random SMILES string (written from atom 0 of a random graph).
pub fn random_smiles(rng: &mut Rng, max_atoms: usize) -> String {
    crate::write::write_smiles(&random_graph(rng, max_atoms), 0)
}

fn pick_element(rng: &mut Rng) -> String {
    (*rng.pick(CHAIN_ELEMENTS)).to_string()
}

/// Attachment point for new atoms: never aromatic (ring substitution is
/// handled when the ring is built), never a wildcard or halogen terminal.
fn pick_open_atom(rng: &mut Rng, g: &MolecularGraph, new_idx: usize) -> usize {
    debug_assert!(new_idx > 0);
    for _ in 0..16 {
        let cand = rng.below(new_idx);
        let atom = &g.atoms[cand];
        if !atom.is_wildcard()
            && !matches!(atom.element.as_str(), "F" | "Cl" | "Br" | "I")
            && g.degree(cand) < 4
        {
            return cand;
        }
    }
    0
}

fn attach_aromatic_ring(rng: &mut Rng, g: &mut MolecularGraph) {
    let base = g.atoms.len();
    let anchor = pick_open_atom(rng, g, base);
    let hetero = rng.chance(0.3);
    for i in 0..6 {
        let mut atom = Atom::new(if hetero && i == 2 { "N" } else { "C" }, base + i);
        atom.aromatic = true;
        g.atoms.push(atom);
    }
    for i in 0..6 {
        g.bonds.push(Bond {
            a: base + i,
            b: base + (i + 1) % 6,
            order: BondOrder::Aromatic,
            stereo: BondStereo::None,
        });
    }
    g.bonds.push(Bond {
        a: anchor,
        b: base,
        order: BondOrder::Single,
        stereo: BondStereo::None,
    });
}
