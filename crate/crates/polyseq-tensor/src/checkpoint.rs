//! Versioned checkpoint files: a text manifest (meta lines, then one line
//! per tensor with name, dtype, byte offset, and shape) followed by raw
//! little-endian values. Optimizer moments ride along in the same layout.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use crate::error::TensorError;
use crate::io::atomic_write;
use crate::ndarray::NdArray;
use crate::optim::{AdamW, ParamStore};
use crate::scalar::Scalar;

pub const CKPT_MAGIC: &str = "POLYSEQ-CKPT-1";

#[derive(Debug)]
pub struct OptState<S: Scalar> {
    pub step: u64,
    pub m: BTreeMap<String, NdArray<S>>,
    pub v: BTreeMap<String, NdArray<S>>,
}

#[derive(Debug)]
pub struct Checkpoint<S: Scalar> {
    pub meta: Vec<(String, String)>,
    pub params: BTreeMap<String, NdArray<S>>,
    pub opt: Option<OptState<S>>,
}

pub fn write_checkpoint<S: Scalar>(
    path: &Path,
    meta: &[(String, String)],
    store: &ParamStore<S>,
    opt: Option<&AdamW<S>>,
) -> Result<(), TensorError> {
    let mut manifest = String::new();
    let mut blob: Vec<u8> = Vec::new();
    manifest.push_str(CKPT_MAGIC);
    manifest.push('\n');
    for (key, value) in meta {
        manifest.push_str(&format!("meta {key} {value}\n"));
    }
    for (name, tensor) in store.iter() {
        let data = tensor.data();
        push_entry(&mut manifest, &mut blob, "param", name, &data);
    }
    if let Some(opt) = opt {
        let (step, m, v) = opt.state();
        manifest.push_str(&format!("opt_step {step}\n"));
        for (name, arr) in m {
            push_entry(&mut manifest, &mut blob, "moment m", name, arr);
        }
        for (name, arr) in v {
            push_entry(&mut manifest, &mut blob, "moment v", name, arr);
        }
    }
    manifest.push_str(&format!("data {}\n", blob.len()));
    let mut bytes = manifest.into_bytes();
    bytes.extend_from_slice(&blob);
    atomic_write(path, &bytes)?;
    Ok(())
}

fn push_entry<S: Scalar>(
    manifest: &mut String,
    blob: &mut Vec<u8>,
    tag: &str,
    name: &str,
    arr: &NdArray<S>,
) {
    let offset = blob.len();
    for &v in arr.data() {
        v.write_le(blob);
    }
    let dims: Vec<String> = arr.shape().iter().map(usize::to_string).collect();
    manifest.push_str(&format!(
        "{tag} {name} {} {offset} {}\n",
        S::DTYPE,
        dims.join(" ")
    ));
}

pub fn read_checkpoint<S: Scalar>(path: &Path) -> Result<Checkpoint<S>, TensorError> {
    let bytes = fs::read(path)?;
    let data_start;
    let mut meta = Vec::new();
    let mut params = BTreeMap::new();
    let mut m = BTreeMap::new();
    let mut v = BTreeMap::new();
    let mut opt_step: Option<u64> = None;
    let declared_len: usize;

    struct Entry {
        kind: u8, // 0 param, 1 m, 2 v
        name: String,
        dtype: String,
        offset: usize,
        shape: Vec<usize>,
    }
    let mut entries: Vec<Entry> = Vec::new();

    let mut cursor = 0usize;
    let mut first = true;
    loop {
        let line_end = bytes[cursor..]
            .iter()
            .position(|&b| b == b'\n')
            .ok_or_else(|| TensorError::Checkpoint("missing data section".to_string()))?
            + cursor;
        let line = std::str::from_utf8(&bytes[cursor..line_end])
            .map_err(|_| TensorError::Checkpoint("manifest is not UTF-8".to_string()))?;
        cursor = line_end + 1;
        if first {
            if line != CKPT_MAGIC {
                return Err(TensorError::Checkpoint(format!(
                    "bad magic '{line}', expected '{CKPT_MAGIC}'"
                )));
            }
            first = false;
            continue;
        }
        let mut fields = line.split(' ');
        match fields.next() {
            Some("meta") => {
                let key = fields
                    .next()
                    .ok_or_else(|| TensorError::Checkpoint("meta line without key".into()))?;
                let value = fields.collect::<Vec<_>>().join(" ");
                meta.push((key.to_string(), value));
            }
            Some("param") | Some("moment") => {
                let is_param = line.starts_with("param ");
                let kind = if is_param {
                    0
                } else {
                    match fields.next() {
                        Some("m") => 1,
                        Some("v") => 2,
                        other => {
                            return Err(TensorError::Checkpoint(format!(
                                "bad moment tag {other:?}"
                            )))
                        }
                    }
                };
                let name = fields
                    .next()
                    .ok_or_else(|| TensorError::Checkpoint("entry without name".into()))?
                    .to_string();
                let dtype = fields
                    .next()
                    .ok_or_else(|| TensorError::Checkpoint("entry without dtype".into()))?
                    .to_string();
                let offset: usize = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| TensorError::Checkpoint("entry without offset".into()))?;
                let shape: Vec<usize> = fields
                    .map(|s| {
                        s.parse()
                            .map_err(|_| TensorError::Checkpoint(format!("bad dim '{s}'")))
                    })
                    .collect::<Result<_, _>>()?;
                entries.push(Entry {
                    kind,
                    name,
                    dtype,
                    offset,
                    shape,
                });
            }
            Some("opt_step") => {
                opt_step = fields.next().and_then(|s| s.parse().ok());
                if opt_step.is_none() {
                    return Err(TensorError::Checkpoint("bad opt_step".into()));
                }
            }
            Some("data") => {
                declared_len = fields
                    .next()
                    .and_then(|s| s.parse().ok())
                    .ok_or_else(|| TensorError::Checkpoint("bad data length".into()))?;
                data_start = cursor;
                break;
            }
            other => {
                return Err(TensorError::Checkpoint(format!(
                    "unexpected manifest line {other:?}"
                )))
            }
        }
    }

    let blob = &bytes[data_start..];
    if blob.len() != declared_len {
        return Err(TensorError::Checkpoint(format!(
            "data section is {} bytes, manifest declares {declared_len}",
            blob.len()
        )));
    }

    for entry in entries {
        let numel: usize = entry.shape.iter().product();
        let data = read_values::<S>(&entry.dtype, blob, entry.offset, numel)?;
        let arr = NdArray::new(entry.shape, data)
            .map_err(|e| TensorError::Checkpoint(format!("{}: {e}", entry.name)))?;
        match entry.kind {
            0 => params.insert(entry.name, arr),
            1 => m.insert(entry.name, arr),
            _ => v.insert(entry.name, arr),
        };
    }

    let opt = opt_step.map(|step| OptState { step, m, v });
    Ok(Checkpoint { meta, params, opt })
}

fn read_values<S: Scalar>(
    dtype: &str,
    blob: &[u8],
    offset: usize,
    numel: usize,
) -> Result<Vec<S>, TensorError> {
    let width = match dtype {
        "f32" => 4,
        "f64" => 8,
        other => return Err(TensorError::Checkpoint(format!("unknown dtype '{other}'"))),
    };
    let end = offset + numel * width;
    if end > blob.len() {
        return Err(TensorError::Checkpoint(format!(
            "entry at offset {offset} overruns data section"
        )));
    }
    let slice = &blob[offset..end];
    let out = match dtype {
        "f32" => slice
            .chunks_exact(4)
            .map(|c| S::from_f64(f64::from(f32::from_le_bytes(c.try_into().unwrap()))))
            .collect(),
        _ => slice
            .chunks_exact(8)
            .map(|c| S::from_f64(f64::from_le_bytes(c.try_into().unwrap())))
            .collect(),
    };
    Ok(out)
}

/// Convenience: load every matching parameter of `store` from the file.
pub fn load_into_store<S: Scalar>(
    path: &Path,
    store: &mut ParamStore<S>,
) -> Result<Checkpoint<S>, TensorError> {
    let ckpt = read_checkpoint::<S>(path)?;
    store.load_matching(&ckpt.params);
    Ok(ckpt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tmp(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("polyseq-ckpt-{}-{name}", std::process::id()))
    }

    #[test]
    fn round_trip_params_and_meta() {
        let mut store: ParamStore<f32> = ParamStore::new();
        store.insert(
            "enc.0.w",
            NdArray::new(vec![2, 2], vec![1.0, 2.0, 3.0, 4.0]).unwrap(),
        );
        store.insert("head.b", NdArray::from_vec(vec![-0.5]));
        let meta = vec![("d_model".to_string(), "32".to_string())];
        let path = tmp("roundtrip");
        write_checkpoint(&path, &meta, &store, None).unwrap();

        let loaded = read_checkpoint::<f32>(&path).unwrap();
        assert_eq!(loaded.meta, meta);
        assert_eq!(loaded.params.len(), 2);
        assert_eq!(loaded.params["enc.0.w"].data(), &[1.0f32, 2.0, 3.0, 4.0]);
        assert!(loaded.opt.is_none());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn magic_is_checked() {
        let path = tmp("magic");
        std::fs::write(&path, b"NOT-A-CKPT\ndata 0\n").unwrap();
        assert!(matches!(
            read_checkpoint::<f32>(&path),
            Err(TensorError::Checkpoint(_))
        ));
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn optimizer_state_round_trips() {
        let store: ParamStore<f32> = {
            let mut s = ParamStore::new();
            s.insert("w", NdArray::from_vec(vec![1.0f32, 2.0]));
            s
        };
        store.get("w").sum_all().backward().unwrap();
        let mut opt = AdamW::uniform(&store, 0.1, 0.0);
        opt.step(&store, 1.0).unwrap();

        let path = tmp("opt");
        write_checkpoint(&path, &[], &store, Some(&opt)).unwrap();
        let loaded = read_checkpoint::<f32>(&path).unwrap();
        let opt_state = loaded.opt.unwrap();
        assert_eq!(opt_state.step, 1);
        let (_, m, _) = opt.state();
        assert_eq!(opt_state.m["w"].data(), m["w"].data());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn f32_file_loads_as_f64() {
        let mut store: ParamStore<f32> = ParamStore::new();
        store.insert("w", NdArray::from_vec(vec![0.25f32, -1.5]));
        let path = tmp("dtype");
        write_checkpoint(&path, &[], &store, None).unwrap();
        let loaded = read_checkpoint::<f64>(&path).unwrap();
        assert_eq!(loaded.params["w"].data(), &[0.25f64, -1.5]);
        std::fs::remove_file(&path).ok();
    }
}
