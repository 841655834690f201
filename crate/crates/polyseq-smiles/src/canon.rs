//! Deterministic canonical SMILES via iterative neighborhood refinement.
//!
//! Atom invariants are (element, charge, degree, aromatic, explicit-H count);
//! stereo markers are preserved on write but never influence ranking.
//! Remaining ties are broken by (lowest refined rank, then input index) and
//! refinement is rerun until every atom has a distinct rank.

use crate::graph::{BondOrder, MolecularGraph};
use crate::write::write_smiles_ordered;

/// Canonical string for `graph`; isomorphic graphs yield identical output.
pub fn canonicalize(graph: &MolecularGraph) -> String {
    let ranks = canonical_ranks(graph);
    let start = ranks
        .iter()
        .position(|&r| r == 0)
        .expect("rank 0 always exists");
    write_smiles_ordered(graph, start, Some(&ranks))
}

/// Discrete canonical ranks, one per atom, in `0..atom_count`.
pub fn canonical_ranks(graph: &MolecularGraph) -> Vec<usize> {
    let n = graph.atoms.len();
    assert!(n > 0, "cannot rank an empty graph");
    let adjacency = graph.adjacency();
    // neighbor lists annotated with bond-order codes; without these,
    // single- vs double-bonded neighbors of equal rank would collapse into
    // one class and the index tie-break would not be permutation invariant
    let annotated: Vec<Vec<(u8, usize)>> = (0..n)
        .map(|i| {
            adjacency[i]
                .iter()
                .map(|&(j, bi)| (bond_code(graph.bonds[bi].order), j))
                .collect()
        })
        .collect();

    let initial: Vec<InitialKey> = graph
        .atoms
        .iter()
        .map(|a| InitialKey {
            element: a.element.clone(),
            charge: a.charge,
            degree: adjacency[a.index].len(),
            aromatic: a.aromatic,
            explicit_h: a.explicit_h.unwrap_or(0),
        })
        .collect();
    let mut ranks = dense_ranks(&initial);

    loop {
        ranks = refine(&ranks, &annotated);
        let classes = count_classes(&ranks);
        if classes == n {
            return ranks;
        }
        // break the tie at the lowest-ranked non-singleton class, preferring
        // the lowest input index within it
        let chosen = (0..n)
            .filter(|&i| ranks.iter().filter(|&&r| r == ranks[i]).count() > 1)
            .min_by_key(|&i| (ranks[i], i))
            .expect("a non-singleton class exists");
        let bumped: Vec<usize> = (0..n)
            .map(|i| ranks[i] * 2 + usize::from(i != chosen))
            .collect();
        ranks = dense_ranks(&bumped);
    }
}

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct InitialKey {
    element: String,
    charge: i8,
    degree: usize,
    aromatic: bool,
    explicit_h: u8,
}

fn bond_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

/// Refine ranks with sorted (bond code, neighbor rank) multisets until
/// stable.
fn refine(ranks: &[usize], annotated: &[Vec<(u8, usize)>]) -> Vec<usize> {
    let mut current = ranks.to_vec();
    loop {
        let keys: Vec<(usize, Vec<(u8, usize)>)> = current
            .iter()
            .enumerate()
            .map(|(i, &r)| {
                let mut nbrs: Vec<(u8, usize)> = annotated[i]
                    .iter()
                    .map(|&(code, j)| (code, current[j]))
                    .collect();
                nbrs.sort_unstable();
                (r, nbrs)
            })
            .collect();
        let next = dense_ranks(&keys);
        if next == current {
            return next;
        }
        current = next;
    }
}

/// Map arbitrary ordered keys to dense ranks `0..distinct_count`.
fn dense_ranks<K: Ord + Clone>(keys: &[K]) -> Vec<usize> {
    let mut sorted: Vec<&K> = keys.iter().collect();
    sorted.sort();
    sorted.dedup();
    keys.iter()
        .map(|k| sorted.binary_search(&k).expect("key present"))
        .collect()
}

fn count_classes(ranks: &[usize]) -> usize {
    let mut seen = ranks.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}
