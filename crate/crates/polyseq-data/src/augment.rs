//! Training-set augmentation by SMILES enumeration. Every repeating unit
//! of every component is re-rooted through its rotations; combinations are
//! taken component-major in rotation order, the original record always
//! comes first, exact duplicates are dropped, and the schema's mode caps
//! the expansion. Must only ever be called on the training side of a
//! split.

use rayon::prelude::*;

use polyseq_smiles::{enumerate_smiles, parse_smiles, write_smiles};
use polyseq_tokenizer::PolymerRecord;

use crate::schema::{AugmentMode, DatasetSchema};

#[derive(Debug)]
pub struct AugmentOutcome {
    pub records: Vec<PolymerRecord>,
    /// Records that could not be enumerated and fell back to the original.
    pub warnings: Vec<String>,
}

/// Expand training records per the schema's augmentation mode. Rotation
/// enumeration is deterministic, so `_seed` currently has no effect; it is
/// part of the interface so sampled truncation could be added without
/// changing callers.
pub fn augment_train(
    train_records: &[PolymerRecord],
    schema: &DatasetSchema,
    _seed: u64,
) -> AugmentOutcome {
    let per_record: Vec<(Vec<PolymerRecord>, Option<String>)> = train_records
        .par_iter()
        .enumerate()
        .map(|(idx, record)| augment_one(idx, record, schema.augmentation))
        .collect();

    let mut records = Vec::new();
    let mut warnings = Vec::new();
    for (expanded, warning) in per_record {
        records.extend(expanded);
        if let Some(w) = warning {
            warnings.push(w);
        }
    }
    AugmentOutcome { records, warnings }
}

fn augment_one(
    idx: usize,
    record: &PolymerRecord,
    mode: AugmentMode,
) -> (Vec<PolymerRecord>, Option<String>) {
    // variant spellings per component; element 0 is always the verbatim
    // original so the identity combination reproduces the input record
    let mut component_variants: Vec<Vec<String>> = Vec::with_capacity(record.components.len());
    for component in &record.components {
        match unit_variants(&component.smiles, mode) {
            Ok(mut variants) => {
                let original = component.smiles.clone();
                variants.retain(|v| *v != original);
                let mut with_original = vec![original];
                with_original.append(&mut variants);
                component_variants.push(with_original);
            }
            Err(e) => {
                return (
                    vec![record.clone()],
                    Some(format!(
                        "record {idx}: augmentation fell back to the original ({e})"
                    )),
                );
            }
        }
    }

    let total_limit = match mode {
        AugmentMode::Total(n) => Some(n),
        _ => None,
    };
    let mut out = Vec::new();
    let mut seen = std::collections::HashSet::new();
    // component-major Cartesian product: the last component's rotation
    // index advances fastest, and (0, 0, ...) is the original
    let mut cursor = vec![0usize; component_variants.len()];
    loop {
        let smiles: Vec<&String> = cursor
            .iter()
            .zip(&component_variants)
            .map(|(&i, variants)| &variants[i])
            .collect();
        if seen.insert(
            smiles
                .iter()
                .map(|s| s.as_str())
                .collect::<Vec<_>>()
                .join("\u{1}"),
        ) {
            let mut variant = record.clone();
            for (component, s) in variant.components.iter_mut().zip(&smiles) {
                component.smiles = (*s).clone();
            }
            out.push(variant);
            if let Some(limit) = total_limit {
                if out.len() >= limit {
                    break;
                }
            }
        }
        // odometer increment
        let mut done = true;
        for d in (0..cursor.len()).rev() {
            cursor[d] += 1;
            if cursor[d] < component_variants[d].len() {
                done = false;
                break;
            }
            cursor[d] = 0;
        }
        if done {
            break;
        }
    }
    (out, None)
}

/// All rotation spellings of one component. `.`-joined repeating units are
/// enumerated independently and recombined unit-major.
fn unit_variants(smiles: &str, mode: AugmentMode) -> Result<Vec<String>, String> {
    let graphs = parse_smiles(smiles).map_err(|e| e.to_string())?;
    let per_unit_limit = match mode {
        AugmentMode::PerUnit(n) => Some(n),
        _ => None,
    };
    let unit_lists: Vec<Vec<String>> = graphs
        .iter()
        .map(|g| {
            let mut variants = enumerate_smiles(g, per_unit_limit);
            // keep the verbatim spelling first when rotation 0 differs
            let original = write_smiles(g, 0);
            if variants.first() != Some(&original) {
                variants.insert(0, original);
            }
            variants
        })
        .collect();

    let mut combos = vec![String::new()];
    for (ui, unit) in unit_lists.iter().enumerate() {
        let mut next = Vec::with_capacity(combos.len() * unit.len());
        for prefix in &combos {
            for variant in unit {
                let mut s = prefix.clone();
                if ui > 0 {
                    s.push('.');
                }
                s.push_str(variant);
                next.push(s);
            }
        }
        combos = next;
    }
    Ok(combos)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::DatasetSchema;
    use polyseq_smiles::canonicalize;
    use polyseq_tokenizer::Descriptor;

    fn schema(mode: &str, limit: Option<usize>) -> DatasetSchema {
        let augmentation = match limit {
            Some(n) => format!("[augmentation]\nmode = \"{mode}\"\nlimit = {n}\n"),
            None => format!("[augmentation]\nmode = \"{mode}\"\n"),
        };
        DatasetSchema::from_toml_str(&format!(
            "format = 1\nname = \"t\"\nlabel = \"y\"\n{augmentation}\n[[component]]\nsmiles = \"smiles\"\n"
        ))
        .unwrap()
    }

    fn record(smiles: &str, label: f64) -> PolymerRecord {
        let mut r = PolymerRecord::single(smiles);
        r.label = Some(label);
        r
    }

    #[test]
    fn total_mode_produces_exactly_the_limit() {
        let schema = schema("total", Some(5));
        // long enough chain to admit >= 5 rotations
        let out = augment_train(&[record("*COC(=O)OC*", 1.0)], &schema, 0);
        assert_eq!(out.records.len(), 5);
        assert!(out.warnings.is_empty());
        assert_eq!(out.records[0].components[0].smiles, "*COC(=O)OC*");
    }

    #[test]
    fn single_atom_has_no_variants() {
        let schema = schema("total", Some(5));
        let out = augment_train(&[record("C", 2.0)], &schema, 0);
        assert_eq!(out.records.len(), 1);
        assert_eq!(out.records[0].label, Some(2.0));
    }

    #[test]
    fn variants_canonicalize_to_the_original() {
        let schema = schema("unlimited", None);
        let source = "*CC(C)OC(=O)C*";
        let expected = canonicalize(&parse_smiles(source).unwrap()[0]);
        let out = augment_train(&[record(source, 0.5)], &schema, 0);
        assert!(out.records.len() > 3);
        for r in &out.records {
            let g = parse_smiles(&r.components[0].smiles).unwrap().remove(0);
            assert_eq!(canonicalize(&g), expected, "{}", r.components[0].smiles);
            assert_eq!(r.label, Some(0.5));
        }
    }

    #[test]
    fn labels_and_descriptors_copied_verbatim() {
        let schema = DatasetSchema::from_toml_str(
            "format = 1\nname = \"t\"\nlabel = \"y\"\n[augmentation]\nmode = \"total\"\nlimit = 3\n[[component]]\nsmiles = \"smiles\"\n  [[component.descriptor]]\n  name = \"Tg\"\n  column = \"tg\"\n",
        )
        .unwrap();
        let mut r = record("*CCCO*", -1.5);
        r.components[0].descriptors = vec![Descriptor::present("Tg", "-23")];
        let out = augment_train(&[r], &schema, 0);
        assert_eq!(out.records.len(), 3);
        for rec in &out.records {
            assert_eq!(rec.label, Some(-1.5));
            assert_eq!(
                rec.components[0].descriptors[0].value.as_deref(),
                Some("-23")
            );
        }
    }

    #[test]
    fn copolymer_units_enumerate_independently() {
        let schema = schema("per_unit", Some(2));
        let out = augment_train(&[record("*CCO*.*CC(C)O*", 0.0)], &schema, 0);
        // 2 variants per unit -> up to 4 combinations
        assert!(
            out.records.len() <= 4 && out.records.len() >= 2,
            "{}",
            out.records.len()
        );
        for r in &out.records {
            let parts: Vec<&str> = r.components[0].smiles.split('.').collect();
            assert_eq!(parts.len(), 2, "{}", r.components[0].smiles);
        }
    }

    #[test]
    fn no_duplicate_outputs_and_deterministic() {
        let schema = schema("unlimited", None);
        let records = vec![record("*CC(N)CO*", 1.0), record("c1ccccc1O", 2.0)];
        let a = augment_train(&records, &schema, 7);
        let b = augment_train(&records, &schema, 7);
        assert_eq!(a.records, b.records);
        let keys: Vec<String> = a
            .records
            .iter()
            .map(|r| {
                r.components
                    .iter()
                    .map(|c| c.smiles.as_str())
                    .collect::<Vec<_>>()
                    .join("|")
                    + &format!("{:?}", r.label)
            })
            .collect();
        let unique: std::collections::HashSet<_> = keys.iter().collect();
        // duplicates only across different source records, never within one
        assert_eq!(unique.len(), keys.len());
    }
}
