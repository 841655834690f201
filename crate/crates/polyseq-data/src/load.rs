//! CSV ingestion: one record per row, missing cells become missing
//! descriptors (NAN tokens downstream), SMILES validated by the parser.

use std::path::Path;

use rayon::prelude::*;

use polyseq_smiles::parse_smiles;
use polyseq_tokenizer::{Descriptor, DescriptorKind, PolymerComponent, PolymerRecord};

use crate::error::{DataError, RowError};
use crate::schema::{ColumnDescriptor, DatasetSchema};

/// Records plus, when the schema declares a split column, its per-record
/// values (for hold-out routing).
#[derive(Debug)]
pub struct LoadedDataset {
    pub records: Vec<PolymerRecord>,
    pub split_values: Option<Vec<String>>,
}

/// Load and validate a dataset. All row errors are collected; unless
/// `skip_bad_rows` is set, any error aborts the load.
pub fn load_dataset(
    path: &Path,
    schema: &DatasetSchema,
    skip_bad_rows: bool,
) -> Result<(LoadedDataset, Vec<RowError>), DataError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)?;
    let headers = reader.headers()?.clone();
    let column_index = |name: &str| -> Result<usize, DataError> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| DataError::MissingColumn(name.to_string()))
    };

    // resolve all column indices up front so header problems surface once
    struct ComponentCols {
        smiles: usize,
        descriptors: Vec<(usize, ColumnDescriptor)>,
    }
    let mut component_cols = Vec::new();
    for c in &schema.components {
        component_cols.push(ComponentCols {
            smiles: column_index(&c.smiles_column)?,
            descriptors: c
                .descriptors
                .iter()
                .map(|d| Ok((column_index(&d.column)?, d.clone())))
                .collect::<Result<Vec<_>, DataError>>()?,
        });
    }
    let mut global_cols = Vec::new();
    for g in &schema.globals {
        let cols = g
            .columns
            .iter()
            .map(|c| column_index(c))
            .collect::<Result<Vec<_>, DataError>>()?;
        global_cols.push((cols, g.clone()));
    }
    let label_col = schema
        .label_column
        .as_deref()
        .map(column_index)
        .transpose()?;
    let split_col = schema
        .split_column
        .as_deref()
        .map(column_index)
        .transpose()?;

    let rows: Vec<csv::StringRecord> = reader.records().collect::<Result<_, _>>()?;

    type RowOutcome = Result<(PolymerRecord, Option<String>), Vec<RowError>>;
    let parsed: Vec<RowOutcome> = rows
        .par_iter()
        .enumerate()
        .map(|(i, row)| {
            let line = i + 2; // header is line 1
            let mut errors = Vec::new();
            let cell = |col: usize| row.get(col).unwrap_or("").trim();

            let mut components = Vec::new();
            for (ci, cols) in component_cols.iter().enumerate() {
                let smiles = cell(cols.smiles);
                if smiles.is_empty() {
                    if ci == 0 {
                        errors.push(RowError {
                            line,
                            column: headers[cols.smiles].to_string(),
                            message: "first component SMILES is empty".into(),
                        });
                    }
                    continue;
                }
                if let Err(e) = parse_smiles(smiles) {
                    errors.push(RowError {
                        line,
                        column: headers[cols.smiles].to_string(),
                        message: format!("unparseable SMILES: {e}"),
                    });
                    continue;
                }
                let mut component = PolymerComponent::new(smiles);
                for (col, spec) in &cols.descriptors {
                    match parse_descriptor(cell(*col), spec) {
                        Ok(d) => component.descriptors.push(d),
                        Err(message) => errors.push(RowError {
                            line,
                            column: headers[*col].to_string(),
                            message,
                        }),
                    }
                }
                components.push(component);
            }

            let mut global_descriptors = Vec::new();
            for (cols, g) in &global_cols {
                let slots = if g.per_component {
                    schema.max_components()
                } else {
                    1
                };
                for slot in 0..slots {
                    let value = cols.get(slot).map(|&c| cell(c)).unwrap_or("");
                    let spec = ColumnDescriptor {
                        name: g.name.clone(),
                        column: String::new(),
                        kind: g.kind,
                        decimals: g.decimals,
                    };
                    match parse_descriptor(value, &spec) {
                        Ok(d) => global_descriptors.push(d),
                        Err(message) => errors.push(RowError {
                            line,
                            column: g
                                .columns
                                .get(slot)
                                .cloned()
                                .unwrap_or_else(|| g.name.clone()),
                            message,
                        }),
                    }
                }
            }

            let label = match label_col {
                None => None,
                Some(col) => match cell(col).parse::<f64>() {
                    Ok(v) if v.is_finite() => Some(v),
                    _ => {
                        errors.push(RowError {
                            line,
                            column: headers[col].to_string(),
                            message: format!("label '{}' is not a finite number", cell(col)),
                        });
                        None
                    }
                },
            };
            let split_value = split_col.map(|col| cell(col).to_string());

            if errors.is_empty() {
                Ok((
                    PolymerRecord {
                        components,
                        global_descriptors,
                        label,
                    },
                    split_value,
                ))
            } else {
                Err(errors)
            }
        })
        .collect();

    let mut records = Vec::new();
    let mut split_values = Vec::new();
    let mut all_errors = Vec::new();
    for item in parsed {
        match item {
            Ok((record, split)) => {
                records.push(record);
                if let Some(s) = split {
                    split_values.push(s);
                }
            }
            Err(mut errors) => all_errors.append(&mut errors),
        }
    }
    if !all_errors.is_empty() && !skip_bad_rows {
        return Err(DataError::RowErrors(all_errors));
    }
    let split_values = if split_col.is_some() {
        Some(split_values)
    } else {
        None
    };
    Ok((
        LoadedDataset {
            records,
            split_values,
        },
        all_errors,
    ))
}

fn parse_descriptor(value: &str, spec: &ColumnDescriptor) -> Result<Descriptor, String> {
    if value.is_empty() {
        return Ok(Descriptor::missing(spec.name.clone()));
    }
    match spec.kind {
        DescriptorKind::Numeric => {
            let parsed: f64 = value
                .parse()
                .map_err(|_| format!("'{value}' is not a number"))?;
            if !parsed.is_finite() {
                return Err(format!("'{value}' is not finite"));
            }
            let rendered = match spec.decimals {
                Some(d) => format!("{parsed:.*}", d as usize),
                None => value.to_string(),
            };
            Ok(Descriptor::present(spec.name.clone(), rendered))
        }
        DescriptorKind::Categorical => {
            if value.contains(['$', '|']) || value.contains(char::is_whitespace) {
                return Err(format!("categorical value '{value}' contains separators"));
            }
            Ok(Descriptor::present(spec.name.clone(), value))
        }
        DescriptorKind::Smiles => {
            parse_smiles(value).map_err(|e| format!("unparseable SMILES descriptor: {e}"))?;
            Ok(Descriptor::present(spec.name.clone(), value))
        }
    }
}
