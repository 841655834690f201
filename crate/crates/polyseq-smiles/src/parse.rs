//! SMILES parser producing one [`MolecularGraph`] per `.`-separated component.

use std::collections::HashMap;

use thiserror::Error;

use crate::graph::{
    is_element, Atom, Bond, BondOrder, BondStereo, Chirality, MolecularGraph, AROMATIC_ELEMENTS,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at position {position}: {message}")]
pub struct SyntaxError {
    /// Byte offset into the input string.
    pub position: usize,
    pub message: String,
}

impl SyntaxError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        SyntaxError {
            position,
            message: message.into(),
        }
    }
}

/// Parse a SMILES string into one graph per `.`-separated component.
///
/// Atom order equals left-to-right appearance. `*` parses as a wildcard
/// atom. Isotope fields and extended chirality classes are rejected.
pub fn parse_smiles(text: &str) -> Result<Vec<MolecularGraph>, SyntaxError> {
    if text.is_empty() {
        return Err(SyntaxError::new(0, "empty SMILES input"));
    }
    if !text.is_ascii() {
        let pos = text.bytes().position(|b| !b.is_ascii()).unwrap_or(0);
        return Err(SyntaxError::new(pos, "non-ASCII character in SMILES"));
    }
    let bytes = text.as_bytes();
    let mut parser = Parser { bytes, pos: 0 };
    let mut graphs = Vec::new();
    loop {
        graphs.push(parser.component()?);
        if parser.pos >= bytes.len() {
            break;
        }
        // component() only stops early on a top-level dot
        debug_assert_eq!(bytes[parser.pos], b'.');
        parser.pos += 1;
        if parser.pos >= bytes.len() {
            return Err(SyntaxError::new(parser.pos, "empty component after '.'"));
        }
    }
    Ok(graphs)
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
}

/// Bond symbol noted before the next atom or ring digit.
#[derive(Clone, Copy)]
struct PendingBond {
    order: Option<BondOrder>,
    stereo: BondStereo,
    pos: usize,
}

struct OpenRing {
    atom: usize,
    bond: Option<PendingBond>,
    open_pos: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn component(&mut self) -> Result<MolecularGraph, SyntaxError> {
        let mut graph = MolecularGraph::default();
        // bonds whose order was left implicit, resolved after the scan
        let mut unspecified: Vec<usize> = Vec::new();
        let mut bond_pos: Vec<usize> = Vec::new();
        let mut prev: Option<usize> = None;
        let mut branch_stack: Vec<usize> = Vec::new();
        let mut pending: Option<PendingBond> = None;
        let mut rings: HashMap<u32, OpenRing> = HashMap::new();

        if self.peek() == Some(b'.') {
            return Err(SyntaxError::new(self.pos, "empty component before '.'"));
        }

        while let Some(c) = self.peek() {
            let here = self.pos;
            match c {
                b'.' => {
                    if !branch_stack.is_empty() {
                        return Err(SyntaxError::new(here, "'.' inside a branch"));
                    }
                    break;
                }
                b'(' => {
                    let at =
                        prev.ok_or_else(|| SyntaxError::new(here, "branch before any atom"))?;
                    if pending.is_some() {
                        return Err(SyntaxError::new(here, "bond symbol before '('"));
                    }
                    branch_stack.push(at);
                    self.pos += 1;
                }
                b')' => {
                    if let Some(pb) = pending {
                        return Err(SyntaxError::new(pb.pos, "dangling bond symbol"));
                    }
                    let back = branch_stack
                        .pop()
                        .ok_or_else(|| SyntaxError::new(here, "unmatched ')'"))?;
                    prev = Some(back);
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if pending.is_some() {
                        return Err(SyntaxError::new(here, "two bond symbols in a row"));
                    }
                    if prev.is_none() {
                        return Err(SyntaxError::new(here, "bond symbol before any atom"));
                    }
                    pending = Some(match c {
                        b'-' => PendingBond {
                            order: Some(BondOrder::Single),
                            stereo: BondStereo::None,
                            pos: here,
                        },
                        b'=' => PendingBond {
                            order: Some(BondOrder::Double),
                            stereo: BondStereo::None,
                            pos: here,
                        },
                        b'#' => PendingBond {
                            order: Some(BondOrder::Triple),
                            stereo: BondStereo::None,
                            pos: here,
                        },
                        b':' => PendingBond {
                            order: Some(BondOrder::Aromatic),
                            stereo: BondStereo::None,
                            pos: here,
                        },
                        b'/' => PendingBond {
                            order: Some(BondOrder::Single),
                            stereo: BondStereo::Up,
                            pos: here,
                        },
                        _ => PendingBond {
                            order: Some(BondOrder::Single),
                            stereo: BondStereo::Down,
                            pos: here,
                        },
                    });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let from =
                        prev.ok_or_else(|| SyntaxError::new(here, "ring closure before any atom"))?;
                    let number = self.ring_number()?;
                    self.close_or_open_ring(
                        &mut graph,
                        &mut rings,
                        &mut unspecified,
                        &mut bond_pos,
                        number,
                        from,
                        pending.take(),
                        here,
                    )?;
                }
                _ => {
                    let atom = self.atom(graph.atoms.len())?;
                    let idx = atom.index;
                    graph.atoms.push(atom);
                    if let Some(p) = prev {
                        let pb = pending.take();
                        push_bond(
                            &mut graph,
                            &mut unspecified,
                            &mut bond_pos,
                            p,
                            idx,
                            pb,
                            here,
                        )?;
                    } else if let Some(pb) = pending.take() {
                        return Err(SyntaxError::new(pb.pos, "bond symbol before first atom"));
                    }
                    prev = Some(idx);
                }
            }
        }

        if let Some(pb) = pending {
            return Err(SyntaxError::new(
                pb.pos,
                "dangling bond symbol at end of component",
            ));
        }
        if !branch_stack.is_empty() {
            return Err(SyntaxError::new(self.pos, "unmatched '('"));
        }
        if let Some(open) = rings.values().min_by_key(|r| r.open_pos) {
            return Err(SyntaxError::new(
                open.open_pos,
                "unmatched ring-closure digit",
            ));
        }
        if graph.atoms.is_empty() {
            return Err(SyntaxError::new(self.pos, "empty component"));
        }

        // implicit bonds: aromatic between two aromatic atoms, single otherwise
        for &bi in &unspecified {
            let (a, b) = (graph.bonds[bi].a, graph.bonds[bi].b);
            graph.bonds[bi].order = if graph.atoms[a].aromatic && graph.atoms[b].aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            };
        }
        for (bi, bond) in graph.bonds.iter().enumerate() {
            if bond.order == BondOrder::Aromatic
                && !(graph.atoms[bond.a].aromatic && graph.atoms[bond.b].aromatic)
            {
                return Err(SyntaxError::new(
                    bond_pos[bi],
                    "aromatic bond between non-aromatic atoms",
                ));
            }
        }
        Ok(graph)
    }

    fn ring_number(&mut self) -> Result<u32, SyntaxError> {
        let c = self.peek().unwrap();
        if c == b'%' {
            let start = self.pos;
            self.pos += 1;
            let mut digits = 0u32;
            let mut value = 0u32;
            while digits < 2 {
                match self.peek() {
                    Some(d @ b'0'..=b'9') => {
                        value = value * 10 + u32::from(d - b'0');
                        digits += 1;
                        self.pos += 1;
                    }
                    _ => return Err(SyntaxError::new(start, "'%' needs two digits")),
                }
            }
            Ok(value)
        } else {
            self.pos += 1;
            Ok(u32::from(c - b'0'))
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn close_or_open_ring(
        &mut self,
        graph: &mut MolecularGraph,
        rings: &mut HashMap<u32, OpenRing>,
        unspecified: &mut Vec<usize>,
        bond_pos: &mut Vec<usize>,
        number: u32,
        from: usize,
        pending: Option<PendingBond>,
        here: usize,
    ) -> Result<(), SyntaxError> {
        if let Some(open) = rings.remove(&number) {
            if open.atom == from {
                return Err(SyntaxError::new(here, "ring closure bonds atom to itself"));
            }
            // merge bond specs from either side of the closure; the closing
            // side's slash is relative to close->open, so flip it
            let merged = match (open.bond, pending) {
                (None, None) => None,
                (Some(pb), None) => Some(pb),
                (None, Some(pb)) => Some(PendingBond {
                    order: pb.order,
                    stereo: pb.stereo.flipped(),
                    pos: pb.pos,
                }),
                (Some(a), Some(b)) => {
                    if a.order != b.order || a.stereo != b.stereo.flipped() {
                        return Err(SyntaxError::new(here, "ring bond symbols disagree"));
                    }
                    Some(a)
                }
            };
            push_bond(graph, unspecified, bond_pos, open.atom, from, merged, here)
        } else {
            rings.insert(
                number,
                OpenRing {
                    atom: from,
                    bond: pending,
                    open_pos: here,
                },
            );
            Ok(())
        }
    }

    fn atom(&mut self, index: usize) -> Result<Atom, SyntaxError> {
        let here = self.pos;
        match self.peek().unwrap() {
            b'[' => self.bracket_atom(index),
            b'*' => {
                self.pos += 1;
                Ok(Atom::new("*", index))
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                let symbol = (self.peek().unwrap() as char)
                    .to_ascii_uppercase()
                    .to_string();
                self.pos += 1;
                let mut atom = Atom::new(symbol, index);
                atom.aromatic = true;
                Ok(atom)
            }
            b'A'..=b'Z' => {
                // bare atoms: organic subset only; Cl and Br are the only
                // bare two-letter symbols
                let first = self.peek().unwrap() as char;
                let two = self.bytes.get(self.pos + 1).map(|&b| b as char);
                let symbol = match (first, two) {
                    ('C', Some('l')) => {
                        self.pos += 2;
                        "Cl".to_string()
                    }
                    ('B', Some('r')) => {
                        self.pos += 2;
                        "Br".to_string()
                    }
                    ('B', _)
                    | ('C', _)
                    | ('N', _)
                    | ('O', _)
                    | ('P', _)
                    | ('S', _)
                    | ('F', _)
                    | ('I', _) => {
                        self.pos += 1;
                        first.to_string()
                    }
                    _ => {
                        return Err(SyntaxError::new(
                            here,
                            format!("'{first}' is not a bare-writable atom"),
                        ))
                    }
                };
                Ok(Atom::new(symbol, index))
            }
            other => Err(SyntaxError::new(
                here,
                format!("unexpected character '{}'", other as char),
            )),
        }
    }

    fn bracket_atom(&mut self, index: usize) -> Result<Atom, SyntaxError> {
        let open = self.pos;
        self.pos += 1; // consume '['
        let mut atom = Atom::new("", index);

        match self.peek() {
            Some(b'0'..=b'9') => {
                return Err(SyntaxError::new(
                    self.pos,
                    "isotope specifications are not supported",
                ))
            }
            Some(b'*') => {
                atom.element = "*".to_string();
                self.pos += 1;
            }
            Some(b'a'..=b'z') => {
                let here = self.pos;
                let first = self.peek().unwrap() as char;
                let second = self.bytes.get(self.pos + 1).map(|&b| b as char);
                // lowercase aromatic: one letter, or 'se'/'as'
                let symbol = match (first, second) {
                    ('s', Some('e')) => {
                        self.pos += 2;
                        "Se".to_string()
                    }
                    ('a', Some('s')) => {
                        self.pos += 2;
                        "As".to_string()
                    }
                    _ => {
                        self.pos += 1;
                        first.to_ascii_uppercase().to_string()
                    }
                };
                if !AROMATIC_ELEMENTS.contains(&symbol.as_str()) {
                    return Err(SyntaxError::new(here, "element cannot be aromatic"));
                }
                atom.element = symbol;
                atom.aromatic = true;
            }
            Some(b'A'..=b'Z') => {
                let here = self.pos;
                let first = self.peek().unwrap() as char;
                let second = self.bytes.get(self.pos + 1).map(|&b| b as char);
                let mut symbol = first.to_string();
                if let Some(s @ 'a'..='z') = second {
                    let candidate = format!("{first}{s}");
                    if crate::graph::TWO_LETTER_ELEMENTS
                        .binary_search(&candidate.as_str())
                        .is_ok()
                    {
                        symbol = candidate;
                        self.pos += 1;
                    }
                }
                self.pos += 1;
                if !is_element(&symbol) {
                    return Err(SyntaxError::new(
                        here,
                        format!("unknown element '{symbol}'"),
                    ));
                }
                atom.element = symbol;
            }
            _ => return Err(SyntaxError::new(open, "bracket atom without a symbol")),
        }

        loop {
            let here = self.pos;
            match self.peek() {
                Some(b']') => {
                    self.pos += 1;
                    return Ok(atom);
                }
                Some(b'@') => {
                    if atom.chirality != Chirality::None {
                        return Err(SyntaxError::new(here, "duplicate chirality marker"));
                    }
                    self.pos += 1;
                    if self.peek() == Some(b'@') {
                        atom.chirality = Chirality::Clockwise;
                        self.pos += 1;
                    } else {
                        atom.chirality = Chirality::Counterclockwise;
                        let class = self.bytes.get(self.pos..self.pos + 2);
                        if let Some(two) = class {
                            if matches!(two, b"TH" | b"AL" | b"SP" | b"TB" | b"OH") {
                                return Err(SyntaxError::new(
                                    here,
                                    "extended chirality classes are not supported",
                                ));
                            }
                        }
                    }
                }
                Some(b'H') => {
                    if atom.explicit_h.is_some() {
                        return Err(SyntaxError::new(here, "duplicate H count"));
                    }
                    self.pos += 1;
                    let mut count: u32 = 1;
                    if let Some(d @ b'0'..=b'9') = self.peek() {
                        count = u32::from(d - b'0');
                        self.pos += 1;
                        while let Some(d @ b'0'..=b'9') = self.peek() {
                            count = count * 10 + u32::from(d - b'0');
                            self.pos += 1;
                        }
                    }
                    if count > u32::from(u8::MAX) {
                        return Err(SyntaxError::new(here, "H count out of range"));
                    }
                    atom.explicit_h = Some(count as u8);
                }
                Some(sign @ (b'+' | b'-')) => {
                    if atom.charge != 0 {
                        return Err(SyntaxError::new(here, "duplicate charge"));
                    }
                    self.pos += 1;
                    let mut magnitude: i32 = 1;
                    if let Some(d @ b'0'..=b'9') = self.peek() {
                        magnitude = i32::from(d - b'0');
                        self.pos += 1;
                    } else {
                        while self.peek() == Some(sign) {
                            magnitude += 1;
                            self.pos += 1;
                        }
                    }
                    if magnitude > 4 {
                        return Err(SyntaxError::new(here, "charge outside [-4, +4]"));
                    }
                    atom.charge = if sign == b'+' {
                        magnitude as i8
                    } else {
                        -(magnitude as i8)
                    };
                }
                Some(other) => {
                    return Err(SyntaxError::new(
                        here,
                        format!("unexpected '{}' in bracket atom", other as char),
                    ))
                }
                None => return Err(SyntaxError::new(open, "unclosed bracket atom")),
            }
        }
    }
}

fn push_bond(
    graph: &mut MolecularGraph,
    unspecified: &mut Vec<usize>,
    bond_pos: &mut Vec<usize>,
    a: usize,
    b: usize,
    pending: Option<PendingBond>,
    here: usize,
) -> Result<(), SyntaxError> {
    if graph.bond_between(a, b).is_some() {
        return Err(SyntaxError::new(here, "duplicate bond between atoms"));
    }
    let bi = graph.bonds.len();
    match pending {
        Some(pb) => {
            graph.bonds.push(Bond {
                a,
                b,
                order: pb.order.unwrap_or(BondOrder::Single),
                stereo: pb.stereo,
            });
            bond_pos.push(pb.pos);
        }
        None => {
            graph.bonds.push(Bond {
                a,
                b,
                order: BondOrder::Single, // placeholder, fixed up after the scan
                stereo: BondStereo::None,
            });
            unspecified.push(bi);
            bond_pos.push(here);
        }
    }
    Ok(())
}
