//! Run manifests and output files stamped with the manifest digest.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use biascorpus::Error;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::config::Config;

pub const HEADER_PREFIX: &str = "# biascorpus manifest ";
pub const MANIFEST_KEY: &str = "_manifest";

#[derive(Debug, Clone, Serialize)]
pub struct InputDigest {
    pub name: String,
    pub sha256: String,
}

/// Everything that determines a command's outputs.
#[derive(Debug, Clone, Serialize)]
pub struct ManifestCore {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub threads: usize,
    pub config: Config,
    pub inputs: Vec<InputDigest>,
}

#[derive(Debug, Serialize)]
struct Manifest<'a> {
    digest: &'a str,
    #[serde(flatten)]
    core: &'a ManifestCore,
    timings_ms: &'a BTreeMap<String, f64>,
}

fn sha256_file(path: &Path) -> anyhow::Result<String> {
    let mut f = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut h = Sha256::new();
    let mut buf = vec![0u8; 1 << 16];
    loop {
        let n = f.read(&mut buf).map_err(|e| Error::io(path, e))?;
        if n == 0 {
            break;
        }
        h.update(&buf[..n]);
    }
    Ok(hex::encode(h.finalize()))
}

fn base_name(p: &Path) -> String {
    p.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| p.display().to_string())
}

/// Digests of input files; a directory contributes each regular file in it
/// except manifests. Names exclude parent directories so the same inputs in
/// a different location give the same digest.
pub fn digest_inputs(paths: &[&Path]) -> anyhow::Result<Vec<InputDigest>> {
    let mut out = Vec::new();
    for &p in paths {
        if p.is_dir() {
            let mut files: Vec<PathBuf> = std::fs::read_dir(p)
                .map_err(|e| Error::io(p, e))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|f| f.is_file() && !f.to_string_lossy().ends_with(".manifest.json"))
                .collect();
            files.sort();
            for f in files {
                out.push(InputDigest {
                    name: format!("{}/{}", base_name(p), base_name(&f)),
                    sha256: sha256_file(&f)?,
                });
            }
        } else {
            out.push(InputDigest {
                name: base_name(p),
                sha256: sha256_file(p)?,
            });
        }
    }
    Ok(out)
}

/// An in-progress command: knows its output directory and digest.
pub struct Run {
    core: ManifestCore,
    digest: String,
    out: PathBuf,
    started: Instant,
    timings: BTreeMap<String, f64>,
}

impl Run {
    pub fn start(command: &str, config: &Config, inputs: &[&Path], out: &Path) -> anyhow::Result<Self> {
        let core = ManifestCore {
            tool: "biascorpus",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed: config.seed,
            threads: config.threads,
            config: config.clone(),
            inputs: digest_inputs(inputs)?,
        };
        let digest = hex::encode(Sha256::digest(serde_json::to_vec(&core)?));
        std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
        Ok(Self {
            core,
            digest,
            out: out.to_path_buf(),
            started: Instant::now(),
            timings: BTreeMap::new(),
        })
    }

    pub fn header(&self) -> String {
        format!("{HEADER_PREFIX}{}", self.digest)
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// Runs `f`, recording its wall time under `stage`.
    pub fn timed<T>(&mut self, stage: &str, f: impl FnOnce() -> T) -> T {
        let t = Instant::now();
        let v = f();
        *self.timings.entry(stage.to_string()).or_default() += t.elapsed().as_secs_f64() * 1e3;
        v
    }

    /// Writes a text file whose first line is the digest comment.
    pub fn write_text(
        &self,
        name: &str,
        body: impl FnOnce(&mut dyn Write) -> biascorpus::Result<()>,
    ) -> anyhow::Result<PathBuf> {
        let path = self.path(name);
        let mut w = BufWriter::new(File::create(&path).map_err(|e| Error::io(&path, e))?);
        writeln!(w, "{}", self.header()).map_err(|e| Error::io(&path, e))?;
        body(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Serializable rows as CSV with a header row.
    pub fn write_csv<T: Serialize>(&self, name: &str, rows: &[T]) -> anyhow::Result<PathBuf> {
        self.write_text(name, |w| {
            let mut c = csv::Writer::from_writer(w);
            for r in rows {
                c.serialize(r).map_err(|e| Error::parse(name, e))?;
            }
            c.flush().map_err(|e| Error::io(name, e))
        })
    }

    /// Pretty JSON object carrying the digest under `_manifest`.
    pub fn write_json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<PathBuf> {
        let mut v = serde_json::to_value(value)?;
        let obj = match v {
            Value::Object(ref mut m) => m,
            other => {
                v = serde_json::json!({ "value": other });
                v.as_object_mut().expect("object")
            }
        };
        obj.insert(MANIFEST_KEY.into(), Value::String(self.digest.clone()));
        let path = self.path(name);
        let mut text = serde_json::to_string_pretty(&v)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Writes `<command>.manifest.json`.
    pub fn finish(mut self) -> anyhow::Result<()> {
        self.timings.insert("total".into(), self.started.elapsed().as_secs_f64() * 1e3);
        let m = Manifest {
            digest: &self.digest,
            core: &self.core,
            timings_ms: &self.timings,
        };
        let path = self.path(&format!("{}.manifest.json", self.core.command.replace(' ', "-")));
        let mut text = serde_json::to_string_pretty(&m)?;
        text.push('\n');
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        Ok(())
    }
}
