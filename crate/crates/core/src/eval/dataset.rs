use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::check::FmVerdict;
use super::EvalError;
use crate::sva::{parse_with_signals, SignalTable, SvaAst};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    #[serde(default)]
    pub name: String,
    pub designs: Vec<ManifestDesign>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManifestDesign {
    pub design_id: String,
    pub records: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Design {
    pub design_id: String,
    pub verilog_path: PathBuf,
    pub verilog: String,
    pub signals: SignalTable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalRecord {
    pub record_id: String,
    pub design_id: String,
    pub nl_property: String,
    pub golden_sva: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generated_sva: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sc: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fm: Option<FmVerdict>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalDataset {
    pub root: PathBuf,
    pub designs: Vec<Design>,
    pub records: Vec<EvalRecord>,
    /// SHA-256 over every file the dataset was loaded from.
    pub digest: String,
}

impl EvalDataset {
    pub fn design(&self, id: &str) -> Option<&Design> {
        self.designs.iter().find(|d| d.design_id == id)
    }

    pub fn golden(&self, record: &EvalRecord) -> Result<SvaAst, EvalError> {
        let design = self
            .design(&record.design_id)
            .ok_or_else(|| EvalError::Manifest(format!("unknown design `{}`", record.design_id)))?;
        parse_with_signals(&record.golden_sva, &design.signals).map_err(|e| EvalError::GoldenParse {
            record_id: record.record_id.clone(),
            message: e.to_string(),
        })
    }
}

struct Reader {
    hasher: Sha256,
}

impl Reader {
    fn read(&mut self, root: &Path, rel: &Path) -> Result<String, EvalError> {
        let path = root.join(rel);
        let text = fs::read_to_string(&path).map_err(|e| {
            EvalError::Manifest(format!("cannot read {}: {e}", path.display()))
        })?;
        self.hasher.update(rel.to_string_lossy().as_bytes());
        self.hasher.update([0]);
        self.hasher.update((text.len() as u64).to_le_bytes());
        self.hasher.update(text.as_bytes());
        Ok(text)
    }
}

fn check_id(kind: &str, id: &str) -> Result<(), EvalError> {
    let ok = !id.is_empty()
        && id
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
        && id != "."
        && id != "..";
    if ok {
        Ok(())
    } else {
        Err(EvalError::Manifest(format!("{kind} id `{id}` is not a plain name")))
    }
}

/// Loads `manifest.json` and, per design, `design.v` and `signals.json`,
/// then per record `property.txt` and `golden.sva`. Every golden assertion
/// is parsed and checked against its design's signals.
pub fn load_dataset(root: &Path) -> Result<EvalDataset, EvalError> {
    let mut reader = Reader {
        hasher: Sha256::new(),
    };
    let manifest_text = reader.read(root, Path::new("manifest.json"))?;
    let manifest: Manifest = serde_json::from_str(&manifest_text)
        .map_err(|e| EvalError::Manifest(format!("manifest.json: {e}")))?;
    let mut designs = Vec::new();
    let mut records = Vec::new();
    for d in &manifest.designs {
        check_id("design", &d.design_id)?;
        if designs.iter().any(|x: &Design| x.design_id == d.design_id) {
            return Err(EvalError::Manifest(format!("design `{}` listed twice", d.design_id)));
        }
        let dir = Path::new(&d.design_id);
        if !root.join(dir).is_dir() {
            return Err(EvalError::Manifest(format!(
                "design directory `{}` does not exist",
                d.design_id
            )));
        }
        let verilog_path = dir.join("design.v");
        let verilog = reader.read(root, &verilog_path)?;
        let signals_text = reader.read(root, &dir.join("signals.json"))?;
        let signals: SignalTable = serde_json::from_str(&signals_text)
            .map_err(|e| EvalError::Manifest(format!("{}/signals.json: {e}", d.design_id)))?;
        for r in &d.records {
            check_id("record", r)?;
            if records.iter().any(|x: &EvalRecord| &x.record_id == r) {
                return Err(EvalError::Manifest(format!("record `{r}` listed twice")));
            }
            let rdir = dir.join(r);
            let nl_property = reader.read(root, &rdir.join("property.txt"))?.trim().to_string();
            let golden_sva = reader.read(root, &rdir.join("golden.sva"))?.trim().to_string();
            parse_with_signals(&golden_sva, &signals).map_err(|e| EvalError::GoldenParse {
                record_id: r.clone(),
                message: e.to_string(),
            })?;
            records.push(EvalRecord {
                record_id: r.clone(),
                design_id: d.design_id.clone(),
                nl_property,
                golden_sva,
                generated_sva: None,
                sc: None,
                fm: None,
            });
        }
        designs.push(Design {
            design_id: d.design_id.clone(),
            verilog_path: root.join(verilog_path),
            verilog,
            signals,
        });
    }
    Ok(EvalDataset {
        root: root.to_path_buf(),
        designs,
        records,
        digest: hex::encode(reader.hasher.finalize()),
    })
}
