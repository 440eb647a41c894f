//! Model files.
//!
//! `<name>.bin` is a 72-byte little-endian header followed by the input
//! table and then the output table, each `V x dim` `f32` values, row-major:
//!
//! | offset | type    | field        |
//! |--------|---------|--------------|
//! | 0      | [u8; 8] | magic `BIASEMB\0` |
//! | 8      | u32     | version (1)  |
//! | 12     | u32     | dim          |
//! | 16     | u64     | vocab size V |
//! | 24     | u64     | seed         |
//! | 32     | u32     | window       |
//! | 36     | u32     | epochs       |
//! | 40     | u32     | negatives    |
//! | 44     | u32     | threads      |
//! | 48     | u64     | min_count    |
//! | 56     | f64     | initial_lr   |
//! | 64     | f64     | subsample_t  |
//!
//! `<name>.vocab` lists `word count` per line in row order; lines starting
//! with `#` are ignored.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::scalar::Real;

use super::{EmbeddingModel, TrainConfig, Vocabulary};

pub const MODEL_MAGIC: &[u8; 8] = b"BIASEMB\0";
pub const MODEL_VERSION: u32 = 1;

fn vocab_path(bin: &Path) -> PathBuf {
    bin.with_extension("vocab")
}

/// Writes `bin` and its `.vocab` sidecar. `header` becomes a `# ` comment
/// line at the top of the sidecar.
pub fn write_model<F: Real>(model: &EmbeddingModel<F>, bin: &Path, header: Option<&str>) -> Result<()> {
    let io = |e| Error::io(bin, e);
    let mut w = BufWriter::new(File::create(bin).map_err(io)?);
    let c = &model.config;
    let mut head = Vec::with_capacity(72);
    head.extend_from_slice(MODEL_MAGIC);
    head.extend_from_slice(&MODEL_VERSION.to_le_bytes());
    head.extend_from_slice(&(model.dim as u32).to_le_bytes());
    head.extend_from_slice(&(model.vocab.len() as u64).to_le_bytes());
    head.extend_from_slice(&c.seed.to_le_bytes());
    for v in [c.window, c.epochs, c.negatives, c.threads] {
        head.extend_from_slice(&(v as u32).to_le_bytes());
    }
    head.extend_from_slice(&c.min_count.to_le_bytes());
    head.extend_from_slice(&c.initial_lr.to_le_bytes());
    head.extend_from_slice(&c.subsample_t.to_le_bytes());
    debug_assert_eq!(head.len(), 72);
    w.write_all(&head).map_err(io)?;
    for x in model.input.iter().chain(&model.output) {
        let v = x.to_f32().unwrap_or(f32::NAN);
        w.write_all(&v.to_le_bytes()).map_err(io)?;
    }
    w.flush().map_err(io)?;

    let vp = vocab_path(bin);
    let io = |e| Error::io(&vp, e);
    let mut w = BufWriter::new(File::create(&vp).map_err(io)?);
    if let Some(h) = header {
        writeln!(w, "# {h}").map_err(io)?;
    }
    for (word, count) in model.vocab.words().iter().zip(model.vocab.counts()) {
        writeln!(w, "{word} {count}").map_err(io)?;
    }
    w.flush().map_err(io)
}

/// Reads a model written by [`write_model`].
pub fn read_model<F: Real>(bin: &Path) -> Result<EmbeddingModel<F>> {
    let bad = |m: String| Error::parse(bin.display().to_string(), m);
    let mut r = BufReader::new(File::open(bin).map_err(|e| Error::io(bin, e))?);
    let mut head = [0u8; 72];
    r.read_exact(&mut head).map_err(|e| Error::io(bin, e))?;
    if &head[0..8] != MODEL_MAGIC {
        return Err(bad("not a model file (bad magic)".into()));
    }
    let u32_at = |o: usize| u32::from_le_bytes(head[o..o + 4].try_into().unwrap());
    let u64_at = |o: usize| u64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let f64_at = |o: usize| f64::from_le_bytes(head[o..o + 8].try_into().unwrap());
    let version = u32_at(8);
    if version != MODEL_VERSION {
        return Err(bad(format!("unsupported model version {version}")));
    }
    let dim = u32_at(12) as usize;
    let v = u64_at(16) as usize;
    let config = TrainConfig {
        dim,
        seed: u64_at(24),
        window: u32_at(32) as usize,
        epochs: u32_at(36) as usize,
        negatives: u32_at(40) as usize,
        threads: u32_at(44) as usize,
        min_count: u64_at(48),
        initial_lr: f64_at(56),
        subsample_t: f64_at(64),
    };
    let n = v * dim;
    let mut buf = vec![0u8; 2 * n * 4];
    r.read_exact(&mut buf).map_err(|_| bad("truncated vector data".into()))?;
    let mut rest = Vec::new();
    r.read_to_end(&mut rest).map_err(|e| Error::io(bin, e))?;
    if !rest.is_empty() {
        return Err(bad("trailing bytes after vector data".into()));
    }
    let values: Vec<F> = buf
        .chunks_exact(4)
        .map(|c| F::of(f32::from_le_bytes(c.try_into().unwrap()) as f64))
        .collect();
    let (input, output) = values.split_at(n);

    let vp = vocab_path(bin);
    let file = File::open(&vp).map_err(|e| Error::io(&vp, e))?;
    let mut entries = Vec::with_capacity(v);
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(&vp, e))?;
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let (Some(word), Some(count), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Error::parse(format!("{} line {}", vp.display(), i + 1), "expected `word count`"));
        };
        let count: u64 = count
            .parse()
            .map_err(|e| Error::parse(format!("{} line {}", vp.display(), i + 1), e))?;
        entries.push((word.to_string(), count));
    }
    if entries.len() != v {
        return Err(bad(format!("vocabulary has {} words, header says {v}", entries.len())));
    }
    let vocab = Vocabulary::from_counts(entries, config.min_count);
    EmbeddingModel::from_parts(vocab, input.to_vec(), output.to_vec(), config)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::embedding::train_documents;

    #[test]
    fn save_and_load_preserve_f32_model() {
        let docs: Vec<Vec<String>> = (0..50)
            .map(|i| (0..12).map(|j| format!("w{}", (i + j * j) % 9)).collect())
            .collect();
        let refs: Vec<&[String]> = docs.iter().map(Vec::as_slice).collect();
        let cfg = TrainConfig { dim: 6, min_count: 1, seed: 3, ..TrainConfig::default() };
        let (m, _) = train_documents::<f32>(&refs, &cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("m.bin");
        write_model(&m, &bin, Some("manifest abc")).unwrap();
        let bytes = std::fs::metadata(&bin).unwrap().len() as usize;
        assert_eq!(bytes, 72 + 2 * 4 * m.vocab().len() * 6);
        let back: EmbeddingModel<f32> = read_model(&bin).unwrap();
        assert_eq!(back, m);
        let text = std::fs::read_to_string(dir.path().join("m.vocab")).unwrap();
        assert!(text.starts_with("# manifest abc\n"));
    }

    #[test]
    fn rejects_foreign_files() {
        let dir = tempfile::tempdir().unwrap();
        let bin = dir.path().join("x.bin");
        std::fs::write(&bin, [0u8; 100]).unwrap();
        assert!(read_model::<f32>(&bin).is_err());
    }
}
