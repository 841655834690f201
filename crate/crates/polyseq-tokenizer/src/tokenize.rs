//! Slice an assembled sequence into tokens.
//!
//! Separators `$` and `|` are their own tokens and delimit regions. The
//! region after the k-th `$` of a component is that component's k-th
//! schema descriptor; once a component's descriptors are exhausted the
//! remaining `$` regions are the globals. Descriptor regions are one token
//! (the value string or `NAN_<name>`), except SMILES-valued descriptors
//! which are sliced like the polymer SMILES itself: longest-match element
//! symbols first (`Cl`, `Br`, `Si`, ...), then single-character symbols.

use thiserror::Error;

use polyseq_smiles::graph::TWO_LETTER_ELEMENTS;

use crate::schema::{DescriptorKind, DescriptorSpec, SequenceSchema};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("tokenize error at byte {position}: {message}")]
pub struct TokenizeError {
    pub position: usize,
    pub message: String,
}

impl TokenizeError {
    fn new(position: usize, message: impl Into<String>) -> Self {
        TokenizeError {
            position,
            message: message.into(),
        }
    }
}

/// Lowercase two-letter aromatic symbols recognized as single tokens.
const AROMATIC_TWO_LETTER: &[&str] = &["as", "se", "te"];

/// Single-character SMILES symbols: bare single-letter elements, aromatic
/// lowercase, digits, and structural punctuation.
const SINGLE_CHARS: &str = "BCFHIKNOPSUVWYbcnops0123456789*.^|$()[]=#+-/\\%@:";

/// Which schema slot the text between two separators belongs to.
#[derive(Clone, Copy, Debug)]
enum Region {
    Smiles,
    CompDesc(usize),
    Global(usize),
}

pub fn tokenize(flat: &str, schema: &SequenceSchema) -> Result<Vec<String>, TokenizeError> {
    if !flat.is_ascii() {
        let pos = flat.bytes().position(|b| !b.is_ascii()).unwrap_or(0);
        return Err(TokenizeError::new(pos, "non-ASCII character"));
    }

    let globals = schema.expanded_globals();
    let n_cd = schema.component_descriptors.len();
    let at_component_end = |region: Region| match region {
        Region::Smiles => n_cd == 0,
        Region::CompDesc(k) => k + 1 == n_cd,
        Region::Global(_) => false,
    };

    let mut tokens = Vec::new();
    let mut region = Region::Smiles;
    let mut start = 0usize;
    for (pos, &b) in flat.as_bytes().iter().enumerate() {
        if b != b'$' && b != b'|' {
            continue;
        }
        flush_region(
            &mut tokens,
            &flat[start..pos],
            start,
            region,
            schema,
            &globals,
        )?;
        if b == b'$' {
            tokens.push("$".to_string());
            region = match region {
                Region::Smiles if n_cd > 0 => Region::CompDesc(0),
                Region::CompDesc(k) if k + 1 < n_cd => Region::CompDesc(k + 1),
                Region::Smiles | Region::CompDesc(_) if !globals.is_empty() => Region::Global(0),
                Region::Global(k) if k + 1 < globals.len() => Region::Global(k + 1),
                _ => {
                    return Err(TokenizeError::new(
                        pos,
                        "more descriptors than the schema declares",
                    ))
                }
            };
        } else {
            if !at_component_end(region) {
                return Err(TokenizeError::new(
                    pos,
                    "'|' before the component's descriptors were complete",
                ));
            }
            tokens.push("|".to_string());
            region = Region::Smiles;
        }
        start = pos + 1;
    }
    flush_region(&mut tokens, &flat[start..], start, region, schema, &globals)?;

    let complete = if globals.is_empty() {
        at_component_end(region)
    } else {
        matches!(region, Region::Global(k) if k + 1 == globals.len())
    };
    if !complete {
        return Err(TokenizeError::new(
            flat.len(),
            "sequence ends before all schema descriptors are present",
        ));
    }
    Ok(tokens)
}

fn flush_region(
    tokens: &mut Vec<String>,
    text: &str,
    offset: usize,
    region: Region,
    schema: &SequenceSchema,
    globals: &[&DescriptorSpec],
) -> Result<(), TokenizeError> {
    let spec = match region {
        Region::Smiles => return scan_smiles_region(tokens, text, offset),
        Region::CompDesc(k) => &schema.component_descriptors[k],
        Region::Global(k) => globals[k],
    };
    if text.is_empty() {
        return Err(TokenizeError::new(offset, "empty descriptor region"));
    }
    if text == spec.nan_token() {
        tokens.push(text.to_string());
        return Ok(());
    }
    match spec.kind {
        DescriptorKind::Numeric | DescriptorKind::Categorical => {
            tokens.push(text.to_string());
            Ok(())
        }
        DescriptorKind::Smiles => scan_smiles_region(tokens, text, offset),
    }
}

/// Greedy longest-match scan of a SMILES region. Two-letter element symbols
/// win over single letters, mirroring the element-aware regular expression
/// the sequences were designed for.
fn scan_smiles_region(
    tokens: &mut Vec<String>,
    region: &str,
    offset: usize,
) -> Result<(), TokenizeError> {
    if region.is_empty() {
        return Err(TokenizeError::new(offset, "empty SMILES region"));
    }
    let bytes = region.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if i + 1 < bytes.len() {
            let pair = &region[i..i + 2];
            if TWO_LETTER_ELEMENTS.binary_search(&pair).is_ok()
                || AROMATIC_TWO_LETTER.contains(&pair)
            {
                tokens.push(pair.to_string());
                i += 2;
                continue;
            }
        }
        let c = bytes[i] as char;
        if SINGLE_CHARS.contains(c) {
            tokens.push(c.to_string());
            i += 1;
        } else {
            return Err(TokenizeError::new(
                offset + i,
                format!("unrecognizable character '{c}'"),
            ));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schema::{DescriptorKind, DescriptorSpec, GlobalDescriptorSpec};

    fn toks(flat: &str, schema: &SequenceSchema) -> Vec<String> {
        tokenize(flat, schema).unwrap()
    }

    #[test]
    fn peo_tokens() {
        let schema = SequenceSchema::bare();
        assert_eq!(toks("*CCO*", &schema), ["*", "C", "C", "O", "*"]);
    }

    #[test]
    fn silicon_is_one_token() {
        let schema = SequenceSchema::bare();
        let tokens = toks("*C[Si](C)O*", &schema);
        assert!(tokens.iter().any(|t| t == "Si"), "{tokens:?}");
        assert!(!tokens.iter().any(|t| t == "i"), "{tokens:?}");
        assert_eq!(tokens.concat(), "*C[Si](C)O*");
    }

    #[test]
    fn bracket_contents_tokenized_per_symbol() {
        let schema = SequenceSchema::bare();
        assert_eq!(toks("[B-]", &schema), ["[", "B", "-", "]"]);
    }

    #[test]
    fn minus_is_one_token_in_descriptor_region_and_a_bond_in_smiles() {
        let schema = SequenceSchema {
            max_components: 1,
            component_descriptors: vec![DescriptorSpec::new("Tg", DescriptorKind::Numeric)],
            global_descriptors: vec![],
        };
        let tokens = toks("C-C$-23", &schema);
        assert_eq!(tokens, ["C", "-", "C", "$", "-23"]);
    }

    #[test]
    fn electrolyte_sequence_full_layout() {
        let schema = SequenceSchema {
            max_components: 1,
            component_descriptors: vec![
                DescriptorSpec::new("anion", DescriptorKind::Smiles),
                DescriptorSpec::new("ratio", DescriptorKind::Numeric),
                DescriptorSpec::new("comonomer_pct", DescriptorKind::Numeric),
                DescriptorSpec::new("MW", DescriptorKind::Numeric),
                DescriptorSpec::new("Tg", DescriptorKind::Numeric),
                DescriptorSpec::new("structure", DescriptorKind::Categorical),
            ],
            global_descriptors: vec![],
        };
        let flat = "*COC(=O)OC*.*CCO*$F[B-](F)(F)F$0.17$95.2$37.0$-23$S_1";
        let tokens = toks(flat, &schema);
        assert_eq!(tokens.concat(), flat);
        for one in ["0.17", "95.2", "37.0", "-23", "S_1"] {
            assert_eq!(
                tokens.iter().filter(|t| t.as_str() == one).count(),
                1,
                "{one}: {tokens:?}"
            );
        }
        // anion region is SMILES-sliced
        assert!(tokens.iter().filter(|t| t.as_str() == "F").count() >= 4);
        assert!(tokens.contains(&"[".to_string()));
    }

    #[test]
    fn nan_token_is_single() {
        let schema = SequenceSchema {
            max_components: 1,
            component_descriptors: vec![DescriptorSpec::new("Tg", DescriptorKind::Numeric)],
            global_descriptors: vec![],
        };
        assert_eq!(toks("C$NAN_Tg", &schema), ["C", "$", "NAN_Tg"]);
    }

    #[test]
    fn caret_passes_through() {
        let schema = SequenceSchema::bare();
        let tokens = toks("*CC*^*CO*", &schema);
        assert!(tokens.contains(&"^".to_string()));
        assert_eq!(tokens.concat(), "*CC*^*CO*");
    }

    #[test]
    fn pipe_separates_components_and_globals_follow() {
        let schema = SequenceSchema {
            max_components: 2,
            component_descriptors: vec![],
            global_descriptors: vec![GlobalDescriptorSpec {
                spec: DescriptorSpec::new("temperature", DescriptorKind::Numeric),
                per_component: false,
            }],
        };
        let tokens = toks("*CCO*|*CC(C)O*$60", &schema);
        assert_eq!(tokens.concat(), "*CCO*|*CC(C)O*$60");
        assert_eq!(tokens.iter().filter(|t| t.as_str() == "|").count(), 1);
        assert_eq!(tokens.last().unwrap(), "60");
    }

    #[test]
    fn unrecognizable_character_cites_byte_offset() {
        let schema = SequenceSchema::bare();
        let err = tokenize("CC?C", &schema).unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn too_many_descriptors_rejected() {
        let schema = SequenceSchema::bare();
        assert!(tokenize("C$1.0", &schema).is_err());
    }

    #[test]
    fn ring_percent_digits_are_separate_tokens() {
        let schema = SequenceSchema::bare();
        assert_eq!(
            toks("C%12CC%12", &schema),
            ["C", "%", "1", "2", "C", "C", "%", "1", "2"]
        );
    }
}
