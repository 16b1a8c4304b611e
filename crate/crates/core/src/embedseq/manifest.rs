//! JSON Lines dataset manifests.
//!
//! One object per line with keys `path`, `video_id`, `label`, `generator`
//! and `source`. Relative paths resolve against the manifest's directory.
//! Unknown keys are ignored so producers can attach provenance fields.

use std::collections::HashSet;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{read_sequence, EmbeddingSequence, Label};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub path: PathBuf,
    pub video_id: String,
    #[serde(default)]
    pub label: Label,
    #[serde(default)]
    pub generator: Option<String>,
    #[serde(default)]
    pub source: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct DatasetManifest {
    pub entries: Vec<ManifestEntry>,
    base_dir: Option<PathBuf>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let m = Self {
            entries,
            base_dir: None,
        };
        m.check_unique()?;
        Ok(m)
    }

    pub fn with_base_dir(mut self, dir: impl Into<PathBuf>) -> Self {
        self.base_dir = Some(dir.into());
        self
    }

    pub fn base_dir(&self) -> Option<&Path> {
        self.base_dir.as_deref()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn check_unique(&self) -> Result<()> {
        let mut seen = HashSet::new();
        for (i, e) in self.entries.iter().enumerate() {
            if !seen.insert(e.video_id.as_str()) {
                return Err(Error::Manifest {
                    line: i + 1,
                    message: format!("duplicate video_id {:?}", e.video_id),
                });
            }
        }
        Ok(())
    }

    pub fn resolve(&self, entry: &ManifestEntry) -> PathBuf {
        match &self.base_dir {
            Some(base) if entry.path.is_relative() => base.join(&entry.path),
            _ => entry.path.clone(),
        }
    }

    /// Reads the entry's embedding file and stamps it with the entry's id,
    /// label and generator.
    pub fn load(&self, entry: &ManifestEntry) -> Result<EmbeddingSequence> {
        Ok(read_sequence(self.resolve(entry))?
            .with_video_id(entry.video_id.clone())
            .with_label(entry.label)
            .with_generator(entry.generator.clone()))
    }

    pub fn parse(reader: impl BufRead) -> Result<Self> {
        let mut entries = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line.map_err(|e| Error::Manifest {
                line: i + 1,
                message: e.to_string(),
            })?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: ManifestEntry = serde_json::from_str(&line).map_err(|e| Error::Manifest {
                line: i + 1,
                message: e.to_string(),
            })?;
            entries.push(entry);
        }
        Self::new(entries)
    }

    pub fn write_to(&self, writer: impl Write) -> Result<()> {
        let mut w = BufWriter::new(writer);
        for e in &self.entries {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n").map_err(|e| Error::io("<manifest>", e))?;
        }
        w.flush().map_err(|e| Error::io("<manifest>", e))
    }
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<DatasetManifest> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let manifest = DatasetManifest::parse(BufReader::new(file))?;
    let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
    Ok(manifest.with_base_dir(base))
}

pub fn write_manifest(manifest: &DatasetManifest, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    manifest.write_to(file)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lines_and_ignores_extra_keys() {
        let text = r#"{"path":"a.emb","video_id":"a","label":"real","generator":null,"source":"vatex"}

{"path":"b.emb","video_id":"b","label":"generated","generator":"gen-x","source":null,"resize":224}
"#;
        let m = DatasetManifest::parse(text.as_bytes()).unwrap();
        assert_eq!(m.len(), 2);
        assert_eq!(m.entries[0].source.as_deref(), Some("vatex"));
        assert_eq!(m.entries[1].label, Label::Generated);
        assert_eq!(m.entries[1].generator.as_deref(), Some("gen-x"));
    }

    #[test]
    fn duplicate_ids_rejected() {
        let text = "{\"path\":\"a\",\"video_id\":\"x\",\"label\":\"real\"}\n{\"path\":\"b\",\"video_id\":\"x\",\"label\":\"real\"}\n";
        assert!(matches!(
            DatasetManifest::parse(text.as_bytes()),
            Err(Error::Manifest { line: 2, .. })
        ));
    }

    #[test]
    fn write_then_parse() {
        let m = DatasetManifest::new(vec![ManifestEntry {
            path: "x/y.emb".into(),
            video_id: "y".into(),
            label: Label::Real,
            generator: None,
            source: Some("s".into()),
        }])
        .unwrap();
        let mut buf = Vec::new();
        m.write_to(&mut buf).unwrap();
        let line = String::from_utf8(buf.clone()).unwrap();
        assert!(line.contains("\"path\":\"x/y.emb\""));
        assert_eq!(DatasetManifest::parse(&buf[..]).unwrap().entries, m.entries);
    }
}
