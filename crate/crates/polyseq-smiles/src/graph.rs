//! Molecular graph types shared by the parser, writer, and canonicalizer.

/// Two-letter element symbols (IUPAC). Checked before single letters so the
/// parser and tokenizer agree on longest-match behaviour.
pub const TWO_LETTER_ELEMENTS: &[&str] = &[
    "Ac", "Ag", "Al", "Am", "Ar", "As", "At", "Au", "Ba", "Be", "Bh", "Bi", "Bk", "Br", "Ca", "Cd",
    "Ce", "Cf", "Cl", "Cm", "Cn", "Co", "Cr", "Cs", "Cu", "Db", "Ds", "Dy", "Er", "Es", "Eu", "Fe",
    "Fl", "Fm", "Fr", "Ga", "Gd", "Ge", "He", "Hf", "Hg", "Ho", "Hs", "In", "Ir", "Kr", "La", "Li",
    "Lr", "Lu", "Lv", "Mc", "Md", "Mg", "Mn", "Mo", "Mt", "Na", "Nb", "Nd", "Ne", "Nh", "Ni", "No",
    "Np", "Og", "Os", "Pa", "Pb", "Pd", "Pm", "Po", "Pr", "Pt", "Pu", "Ra", "Rb", "Re", "Rf", "Rg",
    "Rh", "Rn", "Ru", "Sb", "Sc", "Se", "Sg", "Si", "Sm", "Sn", "Sr", "Ta", "Tb", "Tc", "Te", "Th",
    "Ti", "Tl", "Tm", "Ts", "Xe", "Yb", "Zn", "Zr",
];

/// Single-letter element symbols.
pub const SINGLE_LETTER_ELEMENTS: &[&str] = &[
    "B", "C", "F", "H", "I", "K", "N", "O", "P", "S", "U", "V", "W", "Y",
];

/// Elements writable bare (no brackets) when uncharged and unannotated.
pub const ORGANIC_SUBSET: &[&str] = &["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];

/// Elements that may carry the aromatic flag.
pub const AROMATIC_ELEMENTS: &[&str] = &["B", "C", "N", "O", "P", "S", "Se", "As"];

/// Aromatic elements writable bare in lowercase (`Se`/`As` need brackets).
pub const AROMATIC_BARE: &[&str] = &["B", "C", "N", "O", "P", "S"];

pub fn is_element(symbol: &str) -> bool {
    TWO_LETTER_ELEMENTS.binary_search(&symbol).is_ok() || SINGLE_LETTER_ELEMENTS.contains(&symbol)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Chirality {
    #[default]
    None,
    Clockwise,
    Counterclockwise,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    /// Element symbol, or `*` for a wildcard attachment point.
    pub element: String,
    pub aromatic: bool,
    pub charge: i8,
    pub explicit_h: Option<u8>,
    pub chirality: Chirality,
    /// Ordinal position in parse order within the owning graph.
    pub index: usize,
}

impl Atom {
    pub fn new(element: impl Into<String>, index: usize) -> Self {
        Atom {
            element: element.into(),
            aromatic: false,
            charge: 0,
            explicit_h: None,
            chirality: Chirality::None,
            index,
        }
    }

    pub fn is_wildcard(&self) -> bool {
        self.element == "*"
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

/// Directional single-bond marker. `Up` means the bond is written `/` when
/// traversed from `a` to `b`; writing it in the other direction flips the
/// slash, which preserves the cis/trans relationship under re-rooting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BondStereo {
    #[default]
    None,
    Up,
    Down,
}

impl BondStereo {
    pub fn flipped(self) -> Self {
        match self {
            BondStereo::None => BondStereo::None,
            BondStereo::Up => BondStereo::Down,
            BondStereo::Down => BondStereo::Up,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: BondStereo,
}

/// One connected SMILES component: atoms in parse order plus bonds.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MolecularGraph {
    pub atoms: Vec<Atom>,
    pub bonds: Vec<Bond>,
}

impl MolecularGraph {
    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    /// Adjacency list: for each atom, `(neighbor, bond index)` pairs in bond
    /// insertion order.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (bi, bond) in self.bonds.iter().enumerate() {
            adj[bond.a].push((bond.b, bi));
            adj[bond.b].push((bond.a, bi));
        }
        adj
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.bonds
            .iter()
            .find(|bd| (bd.a == a && bd.b == b) || (bd.a == b && bd.b == a))
    }

    pub fn degree(&self, atom: usize) -> usize {
        self.bonds
            .iter()
            .filter(|bd| bd.a == atom || bd.b == atom)
            .count()
    }

    /// Relabel atoms so old index `i` becomes `perm[i]`. Used by the
    /// permutation-invariance tests for canonicalization.
    pub fn relabel(&self, perm: &[usize]) -> MolecularGraph {
        assert_eq!(perm.len(), self.atoms.len(), "permutation length mismatch");
        let mut atoms = vec![None; self.atoms.len()];
        for (i, atom) in self.atoms.iter().enumerate() {
            let mut moved = atom.clone();
            moved.index = perm[i];
            atoms[perm[i]] = Some(moved);
        }
        let mut bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|bd| Bond {
                a: perm[bd.a],
                b: perm[bd.b],
                order: bd.order,
                stereo: bd.stereo,
            })
            .collect();
        bonds.sort_by_key(|bd| (bd.a.min(bd.b), bd.a.max(bd.b)));
        MolecularGraph {
            atoms: atoms.into_iter().map(Option::unwrap).collect(),
            bonds,
        }
    }

    /// Copy with all stereo annotations removed; canonical-equivalence checks
    /// on stereo-bearing inputs compare these stripped forms.
    pub fn strip_stereo(&self) -> MolecularGraph {
        let mut g = self.clone();
        for atom in &mut g.atoms {
            atom.chirality = Chirality::None;
        }
        for bond in &mut g.bonds {
            bond.stereo = BondStereo::None;
        }
        g
    }
}
