//! Depth-first SMILES emission and rotation-based enumeration.

use std::collections::HashSet;

use crate::graph::{
    BondOrder, BondStereo, Chirality, MolecularGraph, AROMATIC_BARE, ORGANIC_SUBSET,
};

/// Write a SMILES string by depth-first traversal starting at `start_atom`.
///
/// The output reparses to an isomorphic graph: same atoms, bonds,
/// aromaticity, charges, and stereo markers. Aromatic atoms are emitted
/// lowercase (never kekulized).
///
/// Panics if `start_atom` is out of range or the graph is empty.
pub fn write_smiles(graph: &MolecularGraph, start_atom: usize) -> String {
    write_smiles_ordered(graph, start_atom, None)
}

/// Emit all start-atom rotations of `graph`, drop exact-string duplicates
/// (first occurrence wins), and truncate to `limit` entries if given. Every
/// output canonicalizes to the same string as `graph`.
pub fn enumerate_smiles(graph: &MolecularGraph, limit: Option<usize>) -> Vec<String> {
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for start in 0..graph.atoms.len() {
        let s = write_smiles(graph, start);
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    if let Some(limit) = limit {
        out.truncate(limit);
    }
    out
}

/// As [`write_smiles`], but when `rank` is given neighbors are visited in
/// ascending rank order instead of input-index order. The canonicalizer
/// drives this with its refined ranks.
pub(crate) fn write_smiles_ordered(
    graph: &MolecularGraph,
    start_atom: usize,
    rank: Option<&[usize]>,
) -> String {
    let n = graph.atoms.len();
    assert!(n > 0, "cannot write an empty graph");
    assert!(
        start_atom < n,
        "start atom {start_atom} out of range ({n} atoms)"
    );

    let key = |atom: usize| rank.map_or(atom, |r| r[atom]);
    let mut adjacency = graph.adjacency();
    for nbrs in &mut adjacency {
        nbrs.sort_by_key(|&(other, _)| key(other));
    }

    // spanning-tree pass: children per atom in visit order, plus ring bonds
    let mut visited = vec![false; n];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut ring_bonds: Vec<Vec<usize>> = vec![Vec::new(); n]; // bond indices per atom
    let mut seen_ring: HashSet<usize> = HashSet::new();
    let mut stack = vec![(start_atom, usize::MAX)];
    visited[start_atom] = true;
    while let Some((atom, parent)) = stack.pop() {
        let mut kids = Vec::new();
        for &(other, bi) in &adjacency[atom] {
            if other == parent {
                continue;
            }
            if visited[other] {
                if seen_ring.insert(bi) {
                    ring_bonds[atom].push(bi);
                    ring_bonds[other].push(bi);
                }
            } else {
                visited[other] = true;
                kids.push(other);
            }
        }
        // push in reverse so the lowest-key child is emitted first
        for &kid in kids.iter().rev() {
            stack.push((kid, atom));
        }
        children[atom] = kids;
    }
    debug_assert!(visited.iter().all(|&v| v), "graph must be connected");

    let mut writer = Writer {
        graph,
        children: &children,
        ring_bonds: &ring_bonds,
        ring_numbers: vec![None; graph.bonds.len()],
        next_number: 1,
        free_numbers: Vec::new(),
        out: String::new(),
    };
    writer.emit(start_atom, usize::MAX);
    writer.out
}

struct Writer<'a> {
    graph: &'a MolecularGraph,
    children: &'a [Vec<usize>],
    ring_bonds: &'a [Vec<usize>],
    /// Per-bond ring number while the closure is open.
    ring_numbers: Vec<Option<u32>>,
    next_number: u32,
    free_numbers: Vec<u32>,
    out: String,
}

impl Writer<'_> {
    fn emit(&mut self, atom: usize, parent: usize) {
        if parent != usize::MAX {
            self.out.push_str(&bond_token(self.graph, parent, atom));
        }
        self.out.push_str(&atom_token(self.graph, atom));
        for &bi in &self.ring_bonds[atom] {
            match self.ring_numbers[bi] {
                Some(number) => {
                    self.out.push_str(&ring_token(number));
                    self.ring_numbers[bi] = None;
                    self.free_numbers.push(number);
                }
                None => {
                    let number = self.free_numbers.pop().unwrap_or_else(|| {
                        let v = self.next_number;
                        self.next_number += 1;
                        v
                    });
                    debug_assert!(number < 100, "more than 99 concurrently open rings");
                    let bond = &self.graph.bonds[bi];
                    let other = if bond.a == atom { bond.b } else { bond.a };
                    self.out.push_str(&bond_token(self.graph, atom, other));
                    self.out.push_str(&ring_token(number));
                    self.ring_numbers[bi] = Some(number);
                }
            }
        }
        let kids = &self.children[atom];
        for (i, &child) in kids.iter().enumerate() {
            if i + 1 < kids.len() {
                self.out.push('(');
                self.emit(child, atom);
                self.out.push(')');
            } else {
                self.emit(child, atom);
            }
        }
    }
}

fn ring_token(number: u32) -> String {
    if number < 10 {
        number.to_string()
    } else {
        format!("%{number:02}")
    }
}

/// Bond symbol for traversal direction `from -> to`; empty when implicit.
fn bond_token(graph: &MolecularGraph, from: usize, to: usize) -> String {
    let bond = graph
        .bond_between(from, to)
        .expect("traversal follows existing bonds");
    match bond.order {
        BondOrder::Single => {
            let oriented = if bond.a == from {
                bond.stereo
            } else {
                bond.stereo.flipped()
            };
            match oriented {
                BondStereo::Up => "/".to_string(),
                BondStereo::Down => "\\".to_string(),
                BondStereo::None => {
                    // an implicit bond between aromatic atoms would reparse
                    // as aromatic, so a true single bond must be explicit
                    if graph.atoms[from].aromatic && graph.atoms[to].aromatic {
                        "-".to_string()
                    } else {
                        String::new()
                    }
                }
            }
        }
        BondOrder::Double => "=".to_string(),
        BondOrder::Triple => "#".to_string(),
        BondOrder::Aromatic => {
            if graph.atoms[from].aromatic && graph.atoms[to].aromatic {
                String::new()
            } else {
                ":".to_string()
            }
        }
    }
}

fn atom_token(graph: &MolecularGraph, idx: usize) -> String {
    let atom = &graph.atoms[idx];
    let bare_ok = if atom.is_wildcard() {
        true
    } else if atom.aromatic {
        AROMATIC_BARE.contains(&atom.element.as_str())
    } else {
        ORGANIC_SUBSET.contains(&atom.element.as_str())
    };
    let plain = atom.charge == 0 && atom.explicit_h.is_none() && atom.chirality == Chirality::None;
    let symbol = if atom.aromatic {
        atom.element.to_ascii_lowercase()
    } else {
        atom.element.clone()
    };
    if plain && bare_ok {
        return symbol;
    }
    let mut s = String::from("[");
    s.push_str(&symbol);
    match atom.chirality {
        Chirality::None => {}
        Chirality::Counterclockwise => s.push('@'),
        Chirality::Clockwise => s.push_str("@@"),
    }
    match atom.explicit_h {
        None => {}
        Some(1) => s.push('H'),
        Some(k) => s.push_str(&format!("H{k}")),
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        q if q > 0 => s.push_str(&format!("+{q}")),
        q => s.push_str(&format!("-{}", -q)),
    }
    s.push(']');
    s
}
