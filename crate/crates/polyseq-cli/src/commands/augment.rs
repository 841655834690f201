//! `polyseq augment`: expand a training-side CSV by SMILES enumeration,
//! writing the same columns back out. Split-column values are carried
//! through so hold-out protocols stay intact.

use polyseq_data::{augment_train, DatasetSchema};
use polyseq_tensor::io::atomic_write;
use polyseq_tokenizer::PolymerRecord;

use crate::cli::AugmentArgs;
use crate::commands::{load_records, load_schema};
use crate::error::CliError;

pub fn run(args: AugmentArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema)?;
    let data = load_records(&args.input, &schema, false)?;

    let mut rows = Vec::new();
    for (i, record) in data.records.iter().enumerate() {
        let outcome = augment_train(std::slice::from_ref(record), &schema, args.seed);
        for warning in &outcome.warnings {
            eprintln!("warning: {warning}");
        }
        let split_value = data.split_values.as_ref().map(|values| values[i].clone());
        for variant in outcome.records {
            rows.push((variant, split_value.clone()));
        }
    }

    let csv = render_csv(&schema, &rows);
    atomic_write(&args.out, csv.as_bytes()).map_err(CliError::input)?;
    eprintln!(
        "augmented {} records to {} rows -> {}",
        data.records.len(),
        rows.len(),
        args.out.display()
    );
    Ok(())
}

fn render_csv(schema: &DatasetSchema, rows: &[(PolymerRecord, Option<String>)]) -> String {
    let mut header: Vec<String> = Vec::new();
    for c in &schema.components {
        header.push(c.smiles_column.clone());
        for d in &c.descriptors {
            header.push(d.column.clone());
        }
    }
    for g in &schema.globals {
        header.extend(g.columns.iter().cloned());
    }
    if let Some(label) = &schema.label_column {
        header.push(label.clone());
    }
    if let Some(split) = &schema.split_column {
        header.push(split.clone());
    }

    let mut out = header.join(",");
    out.push('\n');
    for (record, split_value) in rows {
        let mut cells: Vec<String> = Vec::with_capacity(header.len());
        for (ci, c) in schema.components.iter().enumerate() {
            match record.components.get(ci) {
                Some(component) => {
                    cells.push(component.smiles.clone());
                    for d in &component.descriptors {
                        cells.push(d.value.clone().unwrap_or_default());
                    }
                }
                None => {
                    cells.push(String::new());
                    cells.extend(c.descriptors.iter().map(|_| String::new()));
                }
            }
        }
        let mut global_iter = record.global_descriptors.iter();
        for g in &schema.globals {
            let slots = if g.per_component {
                schema.max_components()
            } else {
                1
            };
            for slot in 0..slots {
                let value = global_iter
                    .next()
                    .and_then(|d| d.value.clone())
                    .unwrap_or_default();
                if slot < g.columns.len() {
                    cells.push(value);
                }
            }
        }
        if schema.label_column.is_some() {
            cells.push(record.label.map(|v| v.to_string()).unwrap_or_default());
        }
        if schema.split_column.is_some() {
            cells.push(split_value.clone().unwrap_or_default());
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}
