//! Model and report persistence. Structured JSON with explicit [re, im]
//! number pairs — auditability over size — and byte-stable round trips:
//! field order is fixed by the structs, maps are sorted, and floats use the
//! shortest exact representation, so store∘load∘store is a fixed point.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use qazb_core::lattice::LatticeParams;
use qazb_core::qexp::QExp;
use qazb_core::{CMat, TolerancePolicy};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
pub struct Header {
    pub format_version: u32,
    pub n: u32,
    pub m: u32,
    pub lambda: f64,
    pub seed: u64,
    pub tolerance: TolerancePolicy,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Blob {
    pub dim: usize,
    /// row-major [re, im] pairs
    pub entries: Vec<[f64; 2]>,
}

impl Blob {
    pub fn from_mat(m: &CMat) -> Self {
        Blob {
            dim: m.dim(),
            entries: m.data().iter().map(|z| [z.re, z.im]).collect(),
        }
    }

    pub fn to_mat(&self) -> Result<CMat> {
        if self.entries.len() != self.dim * self.dim {
            bail!(
                "blob has {} entries for dim {}",
                self.entries.len(),
                self.dim
            );
        }
        let mut out = CMat::zeros(self.dim);
        for i in 0..self.dim {
            for j in 0..self.dim {
                let [re, im] = self.entries[i * self.dim + j];
                out[(i, j)] = Complex64::new(re, im);
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CacheEntry {
    pub sector_micro: i64,
    pub logmod_micro: i64,
    pub value: [f64; 2],
}

#[derive(Debug, Serialize, Deserialize)]
pub struct QexpTable {
    pub phases: Vec<f64>,
    pub cache: Vec<CacheEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct ModelFile {
    pub header: Header,
    pub operators: BTreeMap<String, Blob>,
    pub qexp: Option<QexpTable>,
    /// K dimension when the file carries a representation
    pub kdim: Option<usize>,
    pub notes: Vec<String>,
}

impl ModelFile {
    pub fn new(p: &LatticeParams, seed: u64, pol: &TolerancePolicy) -> Self {
        ModelFile {
            header: Header {
                format_version: FORMAT_VERSION,
                n: p.n,
                m: p.m,
                lambda: p.lambda,
                seed,
                tolerance: pol.clone(),
            },
            operators: BTreeMap::new(),
            qexp: None,
            kdim: None,
            notes: Vec::new(),
        }
    }

    pub fn lattice(&self) -> Result<LatticeParams> {
        let p = LatticeParams::new(self.header.n, self.header.m)?;
        if (p.lambda - self.header.lambda).abs() > 1e-12 {
            bail!(
                "lambda mismatch: file {} vs derived {}",
                self.header.lambda,
                p.lambda
            );
        }
        Ok(p)
    }

    pub fn operator(&self, name: &str) -> Result<CMat> {
        let blob = self
            .operators
            .get(name)
            .with_context(|| format!("operator '{name}' missing from model file"))?;
        blob.to_mat()
    }

    pub fn set_operator(&mut self, name: &str, m: &CMat) {
        self.operators.insert(name.to_string(), Blob::from_mat(m));
    }

    pub fn set_qexp(&mut self, f: &QExp) {
        self.qexp = Some(QexpTable {
            phases: f.phases.clone(),
            cache: f
                .cache
                .iter()
                .map(|(&(s, l), v)| CacheEntry {
                    sector_micro: s,
                    logmod_micro: l,
                    value: [v.re, v.im],
                })
                .collect(),
        });
    }

    pub fn qexp_table(&self, p: &LatticeParams) -> Result<Option<QExp>> {
        match &self.qexp {
            None => Ok(None),
            Some(t) => {
                let mut f = QExp::from_phases(p, t.phases.clone())?;
                for e in &t.cache {
                    f.cache.insert(
                        (e.sector_micro, e.logmod_micro),
                        Complex64::new(e.value[0], e.value[1]),
                    );
                }
                Ok(Some(f))
            }
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self)?;
        std::fs::write(path, text.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let file: ModelFile = serde_json::from_str(&text)
            .with_context(|| format!("parsing {}", path.display()))?;
        if file.header.format_version != FORMAT_VERSION {
            bail!(
                "format version {} not supported (expected {})",
                file.header.format_version,
                FORMAT_VERSION
            );
        }
        Ok(file)
    }
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CheckRecord {
    pub check: String,
    /// the relation the residual measures
    pub anchor: String,
    pub residual: f64,
    pub gate: f64,
    pub pass: bool,
    pub seconds: f64,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct Report {
    pub calibration_version: String,
    pub model: String,
    pub flags: String,
    pub seed: u64,
    pub records: Vec<CheckRecord>,
}

impl Report {
    pub fn new(calibration_version: &str, model: &str, flags: &str, seed: u64) -> Self {
        Report {
            calibration_version: calibration_version.to_string(),
            model: model.to_string(),
            flags: flags.to_string(),
            seed,
            records: Vec::new(),
        }
    }

    pub fn push(&mut self, check: &str, anchor: &str, residual: f64, gate: f64, seconds: f64) {
        self.records.push(CheckRecord {
            check: check.to_string(),
            anchor: anchor.to_string(),
            residual,
            gate,
            pass: residual <= gate,
            seconds,
        });
    }

    pub fn all_pass(&self) -> bool {
        self.records.iter().all(|r| r.pass)
    }

    pub fn print(&self) {
        println!(
            "calibration {} | model {} | flags {} | seed {}",
            self.calibration_version, self.model, self.flags, self.seed
        );
        for r in &self.records {
            println!(
                "{} {:<28} residual {:>12.4e}  gate {:>12.4e}  [{}]  ({:.2}s)",
                if r.pass { "PASS" } else { "FAIL" },
                r.check,
                r.residual,
                r.gate,
                r.anchor,
                r.seconds
            );
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, serde_json::to_string_pretty(self)?.as_bytes())
            .with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Ok(serde_json::from_str(&text)?)
    }
}
