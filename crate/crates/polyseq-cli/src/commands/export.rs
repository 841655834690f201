//! Analysis exports: per-layer/head attention matrices for one sequence,
//! and max-pooled last-layer embeddings for a sequence file. Everything is
//! plot-ready CSV.

use polyseq_model::{Heads, Mode, Model};
use polyseq_tensor::io::atomic_write;
use polyseq_tokenizer::{encode, tokenize, TokenSequence, Vocabulary};

use crate::cli::{ExportAttentionArgs, ExportEmbeddingsArgs};
use crate::commands::{input_sequences, load_checkpoint, load_schema};
use crate::error::CliError;

fn load_vocab(path: &std::path::Path) -> Result<Vocabulary, CliError> {
    Vocabulary::load(path).map_err(|e| CliError::config(format!("--vocab: {e}")))
}

fn encoder_model(ckpt_path: &std::path::Path, seed: u64) -> Result<(Model<f32>, usize), CliError> {
    let (ckpt, model_cfg) = load_checkpoint(ckpt_path)?;
    let max_length = model_cfg.max_length;
    let model: Model<f32> = Model::new(
        model_cfg,
        Heads {
            mlm: false,
            regressor: false,
        },
        seed,
    )?;
    model.params.load_matching(&ckpt.params);
    Ok((model, max_length))
}

pub fn run_attention(args: ExportAttentionArgs) -> Result<(), CliError> {
    let (model, max_length) = encoder_model(&args.ckpt, 0)?;
    let vocab = load_vocab(&args.vocab)?;
    if vocab.len() != model.cfg.vocab_size {
        return Err(CliError::config(format!(
            "vocabulary size {} does not match checkpoint vocab_size {}",
            vocab.len(),
            model.cfg.vocab_size
        )));
    }
    let schema = load_schema(&args.schema)?;
    let seq_schema = schema.sequence_schema();
    let tokens = tokenize(&args.seq, &seq_schema).map_err(CliError::input)?;
    let seq = encode(&tokens, &vocab, max_length);
    let real = seq.real_len();

    let layers: Vec<usize> = match &args.layers {
        None => (0..model.cfg.n_layers).collect(),
        Some(spec) => spec
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<usize>()
                    .ok()
                    .filter(|&l| l < model.cfg.n_layers)
                    .ok_or_else(|| {
                        CliError::config(format!(
                            "--layers: '{s}' is not a layer index below {}",
                            model.cfg.n_layers
                        ))
                    })
            })
            .collect::<Result<_, _>>()?,
    };

    let (_, weights) = model.encoder_forward(&seq.ids, &seq.attention_mask, 1, Mode::Eval)?;

    let mut matrix_csv = String::from("layer,head,q_idx,q_token,k_idx,k_token,weight\n");
    let mut cls_csv = String::from("layer,head,k_idx,k_token,weight\n");
    let len = seq.len();
    for &layer in &layers {
        let data = weights[layer].data();
        for head in 0..model.cfg.n_heads {
            let base = head * len * len;
            for qi in 0..real {
                for ki in 0..real {
                    let w = data.data()[base + qi * len + ki];
                    matrix_csv.push_str(&format!(
                        "{layer},{head},{qi},{},{ki},{},{w}\n",
                        seq.tokens[qi], seq.tokens[ki]
                    ));
                    if qi == 0 {
                        cls_csv.push_str(&format!("{layer},{head},{ki},{},{w}\n", seq.tokens[ki]));
                    }
                }
            }
        }
    }
    atomic_write(&args.out, matrix_csv.as_bytes()).map_err(CliError::input)?;
    let stem = args
        .out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "attention".to_string());
    let cls_path = args.out.with_file_name(format!("{stem}.cls.csv"));
    atomic_write(&cls_path, cls_csv.as_bytes()).map_err(CliError::input)?;
    println!(
        "wrote {} layer(s) x {} head(s), {real}x{real} weights -> {} (cls rows -> {})",
        layers.len(),
        model.cfg.n_heads,
        args.out.display(),
        cls_path.display()
    );
    Ok(())
}

pub fn run_embeddings(args: ExportEmbeddingsArgs) -> Result<(), CliError> {
    let (model, max_length) = encoder_model(&args.ckpt, 0)?;
    let vocab = load_vocab(&args.vocab)?;
    if vocab.len() != model.cfg.vocab_size {
        return Err(CliError::config(format!(
            "vocabulary size {} does not match checkpoint vocab_size {}",
            vocab.len(),
            model.cfg.vocab_size
        )));
    }
    let schema = load_schema(&args.schema)?;
    let seq_schema = schema.sequence_schema();
    let flats = input_sequences(&args.input, &schema)?;
    let seqs: Vec<TokenSequence> = flats
        .iter()
        .map(|flat| {
            tokenize(flat, &seq_schema)
                .map(|tokens| encode(&tokens, &vocab, max_length))
                .map_err(|e| CliError::input(format!("'{flat}': {e}")))
        })
        .collect::<Result<_, _>>()?;

    let d = model.cfg.d_model;
    let mut csv = String::from("id");
    for j in 0..d {
        csv.push_str(&format!(",e{j}"));
    }
    csv.push('\n');

    for (chunk_start, chunk) in seqs.chunks(32).enumerate().map(|(i, c)| (i * 32, c)) {
        let mut ids = Vec::new();
        let mut mask = Vec::new();
        for s in chunk {
            ids.extend_from_slice(&s.ids);
            mask.extend_from_slice(&s.attention_mask);
        }
        let (hidden, _) = model.encoder_forward(&ids, &mask, chunk.len(), Mode::Eval)?;
        let data = hidden.data();
        for (bi, seq) in chunk.iter().enumerate() {
            // max over non-pad positions, per dimension
            let mut pooled = vec![f32::NEG_INFINITY; d];
            for (pos, &m) in seq.attention_mask.iter().enumerate() {
                if m == 0 {
                    continue;
                }
                let row = &data.data()[(bi * seq.len() + pos) * d..(bi * seq.len() + pos + 1) * d];
                for (p, &v) in pooled.iter_mut().zip(row) {
                    *p = p.max(v);
                }
            }
            csv.push_str(&(chunk_start + bi).to_string());
            for v in pooled {
                csv.push_str(&format!(",{v}"));
            }
            csv.push('\n');
        }
    }
    atomic_write(&args.out, csv.as_bytes()).map_err(CliError::input)?;
    println!(
        "wrote {} embedding row(s) -> {}",
        seqs.len(),
        args.out.display()
    );
    Ok(())
}
