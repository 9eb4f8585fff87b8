//! Concept embedding sets and their plain-text file format.
//!
//! The text format is `<count> <dim>` on the first line followed by one
//! `<concept> <v1> ... <vdim>` line per concept, values written with eight
//! significant digits. Concept labels may contain spaces: the last `dim`
//! fields of a line are the vector, everything before them the label.

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::graph::{ColexType, ConceptId, DenseMatrix};
use crate::numerics::cosine_similarity;
use crate::tsv::format_significant;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub method: String,
    pub colex_types: Vec<ColexType>,
    pub config_digest: String,
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingSet {
    dim: usize,
    vectors: BTreeMap<ConceptId, Vec<f64>>,
    pub provenance: Provenance,
}

impl EmbeddingSet {
    pub fn new(dim: usize, vectors: BTreeMap<ConceptId, Vec<f64>>, provenance: Provenance) -> Result<Self> {
        if dim == 0 {
            return Err(Error::Validation("embedding dimension must be positive".into()));
        }
        for (c, v) in &vectors {
            if v.len() != dim {
                return Err(Error::Validation(format!(
                    "vector for {c} has length {}, expected {dim}",
                    v.len()
                )));
            }
            if v.iter().any(|x| !x.is_finite()) {
                return Err(Error::Validation(format!("vector for {c} has non-finite entries")));
            }
        }
        Ok(EmbeddingSet {
            dim,
            vectors,
            provenance,
        })
    }

    /// Rows of a labeled matrix become the vectors.
    pub fn from_matrix(m: &DenseMatrix, provenance: Provenance) -> Result<Self> {
        let labels = m
            .row_labels
            .as_ref()
            .ok_or_else(|| Error::Argument("matrix rows carry no concept labels".into()))?;
        let vectors = labels
            .iter()
            .enumerate()
            .map(|(i, c)| (c.clone(), m.row(i).to_vec()))
            .collect();
        Self::new(m.cols(), vectors, provenance)
    }

    /// Labeled matrix with rows in sorted concept order.
    pub fn to_matrix(&self) -> DenseMatrix {
        let labels: Vec<ConceptId> = self.vectors.keys().cloned().collect();
        let values: Vec<f64> = self.vectors.values().flatten().copied().collect();
        DenseMatrix::new(labels.len(), self.dim, values)
            .and_then(|m| m.with_labels(labels))
            .expect("validated vectors")
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn vectors(&self) -> &BTreeMap<ConceptId, Vec<f64>> {
        &self.vectors
    }

    pub fn get(&self, c: &ConceptId) -> Option<&[f64]> {
        self.vectors.get(c).map(Vec::as_slice)
    }

    pub fn contains(&self, c: &ConceptId) -> bool {
        self.vectors.contains_key(c)
    }

    pub fn concepts(&self) -> impl Iterator<Item = &ConceptId> {
        self.vectors.keys()
    }

    /// Cosine similarity, `None` if either concept is missing.
    pub fn cosine(&self, a: &ConceptId, b: &ConceptId) -> Option<f64> {
        Some(cosine_similarity(self.get(a)?, self.get(b)?))
    }

    pub fn to_text(&self) -> String {
        let mut out = format!("{} {}\n", self.vectors.len(), self.dim);
        for (c, v) in &self.vectors {
            out.push_str(c.as_str());
            for x in v {
                out.push(' ');
                out.push_str(&format_significant(*x, 8));
            }
            out.push('\n');
        }
        out
    }

    /// Writes the text file plus a `<path>.meta.json` provenance sidecar.
    pub fn save(&self, path: &Path) -> Result<()> {
        fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))?;
        let meta = crate::graph::sidecar_path(path);
        let json = serde_json::to_string_pretty(&self.provenance).expect("provenance serializes");
        fs::write(&meta, json + "\n").map_err(|e| Error::io(&meta, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let vectors = read_vectors(path, None)?;
        let dim = vectors.1;
        let meta = crate::graph::sidecar_path(path);
        let provenance = if meta.exists() {
            let text = fs::read_to_string(&meta).map_err(|e| Error::io(&meta, e))?;
            serde_json::from_str(&text).map_err(|e| Error::parse(&meta, e.line(), e.to_string()))?
        } else {
            Provenance::default()
        };
        Self::new(dim, vectors.0, provenance)
    }
}

/// Streams a vector file, keeping only labels accepted by `keep` (all when
/// `None`). Returns the vectors and the declared dimension.
pub(crate) fn read_vectors(
    path: &Path,
    keep: Option<&dyn Fn(&str) -> bool>,
) -> Result<(BTreeMap<ConceptId, Vec<f64>>, usize)> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut lines = BufReader::new(file).lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::io(path, e))?,
        None => return Err(Error::parse(path, 1, "missing `<count> <dim>` header")),
    };
    let parts: Vec<&str> = header.split_whitespace().collect();
    let (count, dim) = match parts.as_slice() {
        [c, d] => match (c.parse::<usize>(), d.parse::<usize>()) {
            (Ok(c), Ok(d)) if d > 0 => (c, d),
            _ => return Err(Error::parse(path, 1, format!("bad header {header:?}"))),
        },
        _ => return Err(Error::parse(path, 1, format!("bad header {header:?}"))),
    };

    let mut vectors = BTreeMap::new();
    let mut seen = 0;
    for (k, line) in lines.enumerate() {
        let lineno = k + 2;
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        seen += 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < dim + 1 {
            return Err(Error::parse(
                path,
                lineno,
                format!("expected a label and {dim} values, found {} fields", fields.len()),
            ));
        }
        let split = fields.len() - dim;
        let label = fields[..split].join(" ");
        if let Some(keep) = keep {
            if !keep(&label) {
                continue;
            }
        }
        let values = fields[split..]
            .iter()
            .map(|f| crate::tsv::parse_f64(path, lineno, f, "vector entry"))
            .collect::<Result<Vec<f64>>>()?;
        let concept = ConceptId::new(label).map_err(|_| Error::parse(path, lineno, "empty label"))?;
        if vectors.insert(concept.clone(), values).is_some() {
            return Err(Error::parse(path, lineno, format!("duplicate label {concept}")));
        }
    }
    if seen != count {
        log::warn!("{}: header declares {count} vectors, found {seen}", path.display());
    }
    Ok((vectors, dim))
}

/// Hex SHA-256 of a serializable configuration's canonical JSON.
pub fn config_digest<T: Serialize>(config: &T) -> String {
    let json = serde_json::to_vec(config).expect("configuration serializes");
    hex::encode(Sha256::digest(&json))
}

/// Hex SHA-256 of a file's bytes.
pub fn file_digest(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}
