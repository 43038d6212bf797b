//! Result files: atomic writes, CSV tables and the run manifest.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use crate::error::{Error, Result};

/// Writes `bytes` to `path` via a temporary sibling and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path
        .parent()
        .filter(|p| !p.as_os_str().is_empty())
        .unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let name = path
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default();
    let tmp = dir.join(format!(".{name}.tmp{}", std::process::id()));
    let mut f = std::fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(bytes).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    drop(f);
    std::fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| Error::Format {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    bytes.push(b'\n');
    write_atomic(path, &bytes)
}

/// In-memory CSV table with a fixed header.
pub struct Table {
    writer: csv::Writer<Vec<u8>>,
    width: usize,
}

impl Table {
    pub fn new<I, T>(header: I) -> Self
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        let header: Vec<String> = header.into_iter().map(|h| h.as_ref().to_string()).collect();
        let mut writer = csv::Writer::from_writer(Vec::new());
        writer.write_record(&header).expect("writing to memory");
        Self {
            writer,
            width: header.len(),
        }
    }

    pub fn row<I, T>(&mut self, fields: I)
    where
        I: IntoIterator<Item = T>,
        T: ToString,
    {
        let row: Vec<String> = fields.into_iter().map(|f| f.to_string()).collect();
        assert_eq!(row.len(), self.width, "row width does not match header");
        self.writer.write_record(&row).expect("writing to memory");
    }

    pub fn save(self, path: &Path) -> Result<()> {
        let bytes = self.writer.into_inner().expect("flushing memory buffer");
        write_atomic(path, &bytes)
    }
}

/// Column names `prefix_1 .. prefix_n`.
pub fn numbered(prefix: &str, n: usize) -> impl Iterator<Item = String> + '_ {
    (1..=n).map(move |i| format!("{prefix}_{i}"))
}

#[derive(Debug, Clone, Serialize)]
pub struct StageTiming {
    pub stage: String,
    pub seconds: f64,
}

/// Describes one CLI invocation; written as `manifest.json` next to the results.
#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: Option<u64>,
    pub version: String,
    pub files: Vec<String>,
    pub timings: Vec<StageTiming>,
    #[serde(skip)]
    clock: Option<(String, Instant)>,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: Option<&Path>, output_dir: &Path, seed: Option<u64>) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config: config.map(Path::to_path_buf),
            output_dir: output_dir.to_path_buf(),
            seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            files: Vec::new(),
            timings: Vec::new(),
            clock: None,
        }
    }

    /// Closes the running stage (if any) and starts timing `stage`.
    pub fn stage(&mut self, stage: &str) {
        self.finish_stage();
        self.clock = Some((stage.to_string(), Instant::now()));
    }

    fn finish_stage(&mut self) {
        if let Some((stage, start)) = self.clock.take() {
            self.timings.push(StageTiming {
                stage,
                seconds: start.elapsed().as_secs_f64(),
            });
        }
    }

    /// Path of result file `name` in the output directory, recorded in the manifest.
    pub fn file(&mut self, name: &str) -> PathBuf {
        self.files.push(name.to_string());
        self.output_dir.join(name)
    }

    pub fn save(mut self) -> Result<()> {
        self.finish_stage();
        let path = self.output_dir.join("manifest.json");
        write_json(&path, &self)
    }
}
