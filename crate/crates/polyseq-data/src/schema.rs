//! Dataset schema files: versioned TOML mapping CSV columns onto record
//! roles (per-component SMILES and descriptors, globals, label, split
//! column) plus the augmentation strategy.

use std::path::Path;

use serde::Deserialize;

use polyseq_tokenizer::{DescriptorKind, DescriptorSpec, GlobalDescriptorSpec, SequenceSchema};

use crate::error::DataError;

/// How far training records may be expanded by SMILES enumeration.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    /// Each repeating unit contributes at most this many spellings.
    PerUnit(usize),
    /// Each record expands to at most this many records in total
    /// (the original counts toward the limit).
    Total(usize),
    /// Every distinct rotation combination.
    Unlimited,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnDescriptor {
    pub name: String,
    pub column: String,
    pub kind: DescriptorKind,
    /// Fixed-decimal rounding applied at load time; otherwise the cell
    /// string is kept verbatim ("95.2" and "95.20" stay distinct tokens).
    pub decimals: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentSpec {
    pub smiles_column: String,
    pub descriptors: Vec<ColumnDescriptor>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlobalSpec {
    pub name: String,
    /// One column, or one per component when `per_component` (padded with
    /// missing entries up to the component count).
    pub columns: Vec<String>,
    pub kind: DescriptorKind,
    pub decimals: Option<u32>,
    pub per_component: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSchema {
    pub name: String,
    pub label_column: Option<String>,
    pub split_column: Option<String>,
    pub components: Vec<ComponentSpec>,
    pub globals: Vec<GlobalSpec>,
    pub augmentation: AugmentMode,
}

impl DatasetSchema {
    pub fn max_components(&self) -> usize {
        self.components.len()
    }

    /// The descriptor layout seen by the tokenizer.
    pub fn sequence_schema(&self) -> SequenceSchema {
        let component_descriptors = self
            .components
            .first()
            .map(|c| {
                c.descriptors
                    .iter()
                    .map(|d| DescriptorSpec::new(d.name.clone(), d.kind))
                    .collect()
            })
            .unwrap_or_default();
        SequenceSchema {
            max_components: self.max_components(),
            component_descriptors,
            global_descriptors: self
                .globals
                .iter()
                .map(|g| GlobalDescriptorSpec {
                    spec: DescriptorSpec::new(g.name.clone(), g.kind),
                    per_component: g.per_component,
                })
                .collect(),
        }
    }

    pub fn from_path(path: &Path) -> Result<Self, DataError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml_str(&text)
    }

    pub fn from_toml_str(text: &str) -> Result<Self, DataError> {
        let raw: TomlSchema = toml::from_str(text).map_err(|e| DataError::Schema(e.to_string()))?;
        raw.build()
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.components.is_empty() {
            return Err(DataError::Schema("schema declares no components".into()));
        }
        let first: Vec<&str> = self.components[0]
            .descriptors
            .iter()
            .map(|d| d.name.as_str())
            .collect();
        for (i, c) in self.components.iter().enumerate() {
            if c.smiles_column.trim().is_empty() {
                return Err(DataError::Schema(format!(
                    "component {i} has an empty smiles column"
                )));
            }
            let names: Vec<&str> = c.descriptors.iter().map(|d| d.name.as_str()).collect();
            if names != first {
                return Err(DataError::Schema(format!(
                    "component {i} descriptor names {names:?} differ from component 0 {first:?}"
                )));
            }
        }
        for g in &self.globals {
            if g.per_component {
                if g.columns.is_empty() || g.columns.len() > self.max_components() {
                    return Err(DataError::Schema(format!(
                        "per-component global '{}' must have 1..={} columns",
                        g.name,
                        self.max_components()
                    )));
                }
            } else if g.columns.len() != 1 {
                return Err(DataError::Schema(format!(
                    "global '{}' must name exactly one column",
                    g.name
                )));
            }
        }
        if let Some(label) = &self.label_column {
            if label.trim().is_empty() {
                return Err(DataError::Schema("label column name is empty".into()));
            }
        }
        Ok(())
    }
}

// ---- raw TOML shape -----------------------------------------------------

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomlSchema {
    format: u32,
    name: String,
    label: Option<String>,
    split_column: Option<String>,
    augmentation: Option<TomlAugmentation>,
    component: Vec<TomlComponent>,
    #[serde(default)]
    global: Vec<TomlGlobal>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomlComponent {
    smiles: String,
    #[serde(default)]
    descriptor: Vec<TomlDescriptor>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomlDescriptor {
    name: String,
    column: String,
    kind: Option<String>,
    decimals: Option<u32>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomlGlobal {
    name: String,
    column: Option<String>,
    columns: Option<Vec<String>>,
    kind: Option<String>,
    decimals: Option<u32>,
    #[serde(default)]
    per_component: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct TomlAugmentation {
    mode: String,
    limit: Option<usize>,
}

fn parse_kind(kind: Option<&str>) -> Result<DescriptorKind, DataError> {
    match kind.unwrap_or("numeric") {
        "numeric" => Ok(DescriptorKind::Numeric),
        "categorical" => Ok(DescriptorKind::Categorical),
        "smiles" => Ok(DescriptorKind::Smiles),
        other => Err(DataError::Schema(format!(
            "unknown descriptor kind '{other}' (numeric|categorical|smiles)"
        ))),
    }
}

impl TomlSchema {
    fn build(self) -> Result<DatasetSchema, DataError> {
        if self.format != 1 {
            return Err(DataError::Schema(format!(
                "unsupported schema format {}, expected 1",
                self.format
            )));
        }
        let augmentation = match self.augmentation {
            None => AugmentMode::Unlimited,
            Some(a) => match (a.mode.as_str(), a.limit) {
                ("per_unit", Some(n)) if n > 0 => AugmentMode::PerUnit(n),
                ("total", Some(n)) if n > 0 => AugmentMode::Total(n),
                ("unlimited", None) => AugmentMode::Unlimited,
                (mode, limit) => {
                    return Err(DataError::Schema(format!(
                        "bad augmentation mode={mode} limit={limit:?} \
                         (per_unit/total need a positive limit; unlimited takes none)"
                    )))
                }
            },
        };
        let components = self
            .component
            .into_iter()
            .map(|c| {
                let descriptors = c
                    .descriptor
                    .into_iter()
                    .map(|d| {
                        Ok(ColumnDescriptor {
                            name: d.name,
                            column: d.column,
                            kind: parse_kind(d.kind.as_deref())?,
                            decimals: d.decimals,
                        })
                    })
                    .collect::<Result<Vec<_>, DataError>>()?;
                Ok(ComponentSpec {
                    smiles_column: c.smiles,
                    descriptors,
                })
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        let globals = self
            .global
            .into_iter()
            .map(|g| {
                let columns = match (g.column, g.columns) {
                    (Some(c), None) => vec![c],
                    (None, Some(cs)) => cs,
                    _ => {
                        return Err(DataError::Schema(format!(
                            "global '{}' must set exactly one of column/columns",
                            g.name
                        )))
                    }
                };
                Ok(GlobalSpec {
                    name: g.name,
                    columns,
                    kind: parse_kind(g.kind.as_deref())?,
                    decimals: g.decimals,
                    per_component: g.per_component,
                })
            })
            .collect::<Result<Vec<_>, DataError>>()?;
        let schema = DatasetSchema {
            name: self.name,
            label_column: self.label,
            split_column: self.split_column,
            components,
            globals,
            augmentation,
        };
        schema.validate()?;
        Ok(schema)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const EXAMPLE: &str = r#"
format = 1
name = "mini"
label = "target"

[augmentation]
mode = "total"
limit = 3

[[component]]
smiles = "smiles"

  [[component.descriptor]]
  name = "Tg"
  column = "tg"
  decimals = 1

[[global]]
name = "temperature"
column = "temp"
"#;

    #[test]
    fn parses_and_lowers_to_sequence_schema() {
        let schema = DatasetSchema::from_toml_str(EXAMPLE).unwrap();
        assert_eq!(schema.name, "mini");
        assert_eq!(schema.augmentation, AugmentMode::Total(3));
        assert_eq!(schema.max_components(), 1);
        let seq = schema.sequence_schema();
        assert_eq!(seq.component_descriptors[0].name, "Tg");
        assert_eq!(seq.nan_tokens(), ["NAN_Tg", "NAN_temperature"]);
    }

    #[test]
    fn format_version_checked() {
        let bad = EXAMPLE.replace("format = 1", "format = 2");
        assert!(matches!(
            DatasetSchema::from_toml_str(&bad),
            Err(DataError::Schema(_))
        ));
    }

    #[test]
    fn unknown_keys_rejected() {
        let bad = EXAMPLE.replace("name = \"mini\"", "name = \"mini\"\nbogus = 1");
        let err = DatasetSchema::from_toml_str(&bad).unwrap_err();
        assert!(err.to_string().contains("bogus"), "{err}");
    }

    #[test]
    fn descriptor_order_must_match_across_components() {
        let two = r#"
format = 1
name = "x"
label = "y"
[[component]]
smiles = "a"
  [[component.descriptor]]
  name = "Tg"
  column = "tg_a"
[[component]]
smiles = "b"
  [[component.descriptor]]
  name = "MW"
  column = "mw_b"
"#;
        assert!(matches!(
            DatasetSchema::from_toml_str(two),
            Err(DataError::Schema(_))
        ));
    }

    #[test]
    fn per_component_global_columns() {
        let text = r#"
format = 1
name = "x"
label = "y"
[[component]]
smiles = "a"
[[component]]
smiles = "b"
[[global]]
name = "ratio"
columns = ["ratio_a", "ratio_b"]
per_component = true
"#;
        let schema = DatasetSchema::from_toml_str(text).unwrap();
        assert_eq!(schema.globals[0].columns.len(), 2);
        let seq = schema.sequence_schema();
        assert_eq!(seq.expanded_globals().len(), 2);
    }
}
