//! `polyseq tokenize`: print tokens (and ids with a vocabulary), one
//! record per line, tab-separated.

use polyseq_tokenizer::Vocabulary;

use crate::cli::TokenizeArgs;
use crate::commands::{input_sequences, load_schema, tokenize_all};
use crate::error::CliError;

pub fn run(args: TokenizeArgs) -> Result<(), CliError> {
    let schema = load_schema(&args.schema)?;
    let seq_schema = schema.sequence_schema();
    let flats = input_sequences(&args.input, &schema)?;
    let token_lists = tokenize_all(&flats, &seq_schema)?;
    let vocab = args
        .vocab
        .as_deref()
        .map(Vocabulary::load)
        .transpose()
        .map_err(|e| CliError::config(format!("--vocab: {e}")))?;

    let mut out = String::new();
    for tokens in &token_lists {
        let line: Vec<String> = match &vocab {
            None => tokens.clone(),
            Some(v) => tokens.iter().map(|t| format!("{t}:{}", v.id(t))).collect(),
        };
        out.push_str(&line.join("\t"));
        out.push('\n');
    }
    print!("{out}");
    Ok(())
}
