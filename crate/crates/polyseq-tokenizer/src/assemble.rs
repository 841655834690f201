//! Flatten a [`PolymerRecord`] into the sequence string fed to the
//! tokenizer: per component its SMILES then each descriptor preceded by
//! `$`; components joined by `|`; global descriptors appended, each
//! preceded by `$`.

use thiserror::Error;

use crate::record::{Descriptor, PolymerRecord};
use crate::schema::SequenceSchema;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SchemaError {
    #[error("record has no components")]
    NoComponents,
    #[error("record has {found} components, schema allows at most {max}")]
    TooManyComponents { found: usize, max: usize },
    #[error(
        "component {component}: expected descriptor '{expected}' at slot {slot}, found '{found}'"
    )]
    DescriptorMismatch {
        component: usize,
        slot: usize,
        expected: String,
        found: String,
    },
    #[error("global descriptors: expected '{expected}' at slot {slot}, found '{found}'")]
    GlobalMismatch {
        slot: usize,
        expected: String,
        found: String,
    },
    #[error("expected {expected} global descriptor slots, found {found}")]
    GlobalCount { expected: usize, found: usize },
    #[error("descriptor '{name}' value '{value}' contains a separator or is empty")]
    InvalidValue { name: String, value: String },
}

pub fn assemble_sequence(
    record: &PolymerRecord,
    schema: &SequenceSchema,
) -> Result<String, SchemaError> {
    if record.components.is_empty() {
        return Err(SchemaError::NoComponents);
    }
    if record.components.len() > schema.max_components {
        return Err(SchemaError::TooManyComponents {
            found: record.components.len(),
            max: schema.max_components,
        });
    }

    let mut out = String::new();
    for (ci, component) in record.components.iter().enumerate() {
        if ci > 0 {
            out.push('|');
        }
        out.push_str(&component.smiles);
        if component.descriptors.len() != schema.component_descriptors.len() {
            return Err(SchemaError::DescriptorMismatch {
                component: ci,
                slot: component
                    .descriptors
                    .len()
                    .min(schema.component_descriptors.len()),
                expected: schema
                    .component_descriptors
                    .get(component.descriptors.len())
                    .map(|s| s.name.clone())
                    .unwrap_or_else(|| "<none>".into()),
                found: component
                    .descriptors
                    .get(schema.component_descriptors.len())
                    .map(|d| d.name.clone())
                    .unwrap_or_else(|| "<none>".into()),
            });
        }
        for (slot, (desc, spec)) in component
            .descriptors
            .iter()
            .zip(&schema.component_descriptors)
            .enumerate()
        {
            if desc.name != spec.name {
                return Err(SchemaError::DescriptorMismatch {
                    component: ci,
                    slot,
                    expected: spec.name.clone(),
                    found: desc.name.clone(),
                });
            }
            out.push('$');
            out.push_str(&descriptor_token(desc, spec.nan_token())?);
        }
    }

    let globals = schema.expanded_globals();
    if record.global_descriptors.len() != globals.len() {
        return Err(SchemaError::GlobalCount {
            expected: globals.len(),
            found: record.global_descriptors.len(),
        });
    }
    for (slot, (desc, spec)) in record.global_descriptors.iter().zip(&globals).enumerate() {
        if desc.name != spec.name {
            return Err(SchemaError::GlobalMismatch {
                slot,
                expected: spec.name.clone(),
                found: desc.name.clone(),
            });
        }
        out.push('$');
        out.push_str(&descriptor_token(desc, spec.nan_token())?);
    }
    Ok(out)
}

fn descriptor_token(desc: &Descriptor, nan: String) -> Result<String, SchemaError> {
    match &desc.value {
        None => Ok(nan),
        Some(v) => {
            if v.is_empty() || v.contains('$') || v.contains('|') {
                return Err(SchemaError::InvalidValue {
                    name: desc.name.clone(),
                    value: v.clone(),
                });
            }
            Ok(v.clone())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::PolymerComponent;
    use crate::schema::{DescriptorKind, DescriptorSpec};

    fn electrolyte_schema() -> SequenceSchema {
        SequenceSchema {
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
        }
    }

    #[test]
    fn bare_single_component() {
        let record = PolymerRecord::single("*CCO*");
        let schema = SequenceSchema::bare();
        assert_eq!(assemble_sequence(&record, &schema).unwrap(), "*CCO*");
    }

    #[test]
    fn electrolyte_blend_layout() {
        let mut component = PolymerComponent::new("*COC(=O)OC*.*CCO*");
        component.descriptors = vec![
            Descriptor::present("anion", "F[B-](F)(F)F"),
            Descriptor::present("ratio", "0.17"),
            Descriptor::present("comonomer_pct", "95.2"),
            Descriptor::present("MW", "37.0"),
            Descriptor::present("Tg", "-23"),
            Descriptor::present("structure", "S_1"),
        ];
        let record = PolymerRecord {
            components: vec![component],
            global_descriptors: vec![],
            label: Some(-4.2),
        };
        assert_eq!(
            assemble_sequence(&record, &electrolyte_schema()).unwrap(),
            "*COC(=O)OC*.*CCO*$F[B-](F)(F)F$0.17$95.2$37.0$-23$S_1"
        );
    }

    #[test]
    fn missing_value_becomes_nan_token() {
        let mut component = PolymerComponent::new("*CCO*");
        component.descriptors = vec![
            Descriptor::present("anion", "F"),
            Descriptor::present("ratio", "0.5"),
            Descriptor::present("comonomer_pct", "1.0"),
            Descriptor::present("MW", "10.0"),
            Descriptor::missing("Tg"),
            Descriptor::present("structure", "S_1"),
        ];
        let record = PolymerRecord {
            components: vec![component],
            global_descriptors: vec![],
            label: None,
        };
        let flat = assemble_sequence(&record, &electrolyte_schema()).unwrap();
        assert!(flat.contains("$NAN_Tg$"), "{flat}");
    }

    #[test]
    fn components_joined_by_pipe_and_globals_padded() {
        let schema = SequenceSchema {
            max_components: 2,
            component_descriptors: vec![],
            global_descriptors: vec![
                crate::schema::GlobalDescriptorSpec {
                    spec: DescriptorSpec::new("ratio", DescriptorKind::Numeric),
                    per_component: true,
                },
                crate::schema::GlobalDescriptorSpec {
                    spec: DescriptorSpec::new("temperature", DescriptorKind::Numeric),
                    per_component: false,
                },
            ],
        };
        let record = PolymerRecord {
            components: vec![
                PolymerComponent::new("*CCO*"),
                PolymerComponent::new("*CC(C)O*"),
            ],
            global_descriptors: vec![
                Descriptor::present("ratio", "0.7"),
                Descriptor::missing("ratio"),
                Descriptor::present("temperature", "25"),
            ],
            label: None,
        };
        assert_eq!(
            assemble_sequence(&record, &schema).unwrap(),
            "*CCO*|*CC(C)O*$0.7$NAN_ratio$25"
        );
    }

    #[test]
    fn name_mismatch_is_schema_error() {
        let mut component = PolymerComponent::new("C");
        component.descriptors = vec![Descriptor::present("wrong", "1")];
        let record = PolymerRecord {
            components: vec![component],
            global_descriptors: vec![],
            label: None,
        };
        let schema = SequenceSchema {
            max_components: 1,
            component_descriptors: vec![DescriptorSpec::new("Tg", DescriptorKind::Numeric)],
            global_descriptors: vec![],
        };
        assert!(matches!(
            assemble_sequence(&record, &schema),
            Err(SchemaError::DescriptorMismatch { .. })
        ));
    }
}
