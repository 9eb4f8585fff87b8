//! Fusing embedding sets, and projecting word vectors onto concepts.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use crate::embedding::{config_digest, file_digest, read_vectors, EmbeddingSet, Provenance};
use crate::error::{Error, Result};
use crate::graph::{ConceptId, DenseMatrix};
use crate::numerics::pca_reduce;
use crate::tsv::{parse_f64, read_tsv};

/// Side-by-side concatenation over the union of concepts (sorted), with a
/// zero block wherever a set lacks a concept.
pub fn concatenate(sets: &[EmbeddingSet]) -> Result<DenseMatrix> {
    let universe: BTreeSet<&ConceptId> = sets.iter().flat_map(|s| s.concepts()).collect();
    let width: usize = sets.iter().map(EmbeddingSet::dim).sum();
    let mut values = Vec::with_capacity(universe.len() * width);
    for c in &universe {
        for s in sets {
            match s.get(c) {
                Some(v) => values.extend_from_slice(v),
                None => values.extend(std::iter::repeat_n(0.0, s.dim())),
            }
        }
    }
    let labels: Vec<ConceptId> = universe.iter().map(|&c| c.clone()).collect();
    DenseMatrix::new(labels.len(), width, values)?.with_labels(labels)
}

/// Concatenates the sets (see [`concatenate`]) and reduces to `d` with PCA.
pub fn combine(sets: &[EmbeddingSet], d: usize) -> Result<EmbeddingSet> {
    if sets.len() < 2 {
        return Err(Error::Argument("combining needs at least two embedding sets".into()));
    }
    let pca = pca_reduce(&concatenate(sets)?, d)?;
    let universe: BTreeSet<&ConceptId> = sets.iter().flat_map(|s| s.concepts()).collect();

    let mut colex_types = Vec::new();
    for t in sets.iter().flat_map(|s| &s.provenance.colex_types) {
        if !colex_types.contains(t) {
            colex_types.push(*t);
        }
    }
    let mut notes = Vec::new();
    let shared = universe.iter().filter(|c| sets.iter().all(|s| s.contains(c))).count();
    if shared == 0 {
        notes.push("input sets share no concepts".to_string());
    }
    if pca.null_components > 0 {
        notes.push(format!("{} components beyond the rank of the input", pca.null_components));
    }
    let digests: Vec<&str> = sets.iter().map(|s| s.provenance.config_digest.as_str()).collect();
    let methods: Vec<&str> = sets.iter().map(|s| s.provenance.method.as_str()).collect();
    let provenance = Provenance {
        method: format!("combine({})", methods.join(",")),
        colex_types,
        config_digest: config_digest(&(d, digests)),
        seed: sets[0].provenance.seed,
        notes,
    };
    EmbeddingSet::from_matrix(&pca.projected, provenance)
}

#[derive(Clone, Debug)]
pub struct ExternalMapping {
    pub embedding: EmbeddingSet,
    /// Concepts none of whose words appear in the vector file.
    pub excluded: Vec<ConceptId>,
}

/// Concept vectors before dimensionality reduction.
#[derive(Clone, Debug)]
pub struct ConceptMeans {
    pub dim: usize,
    pub vectors: BTreeMap<ConceptId, Vec<f64>>,
    pub excluded: Vec<ConceptId>,
}

/// Frequency-weighted mean word vector per concept. `concept_map` is a
/// `CONCEPT\tWORD\tFREQUENCY` TSV; words missing from the vector file are
/// dropped and the remaining weights renormalized.
pub fn concept_means(vector_file: &Path, concept_map: &Path) -> Result<ConceptMeans> {
    let rows = read_tsv(concept_map, &["CONCEPT", "WORD", "FREQUENCY"], &[])?;
    let mut words_of: BTreeMap<ConceptId, Vec<(String, f64)>> = BTreeMap::new();
    for row in &rows {
        if row.fields.len() != 3 {
            return Err(Error::parse(
                concept_map,
                row.line,
                format!("expected 3 fields, found {}", row.fields.len()),
            ));
        }
        let concept =
            ConceptId::new(row.fields[0].as_str()).map_err(|_| Error::parse(concept_map, row.line, "empty CONCEPT"))?;
        let word = row.fields[1].trim().to_string();
        if word.is_empty() {
            return Err(Error::parse(concept_map, row.line, "empty WORD"));
        }
        let freq = parse_f64(concept_map, row.line, &row.fields[2], "frequency")?;
        if !(freq > 0.0) {
            return Err(Error::parse(concept_map, row.line, format!("frequency {freq} is not positive")));
        }
        words_of.entry(concept).or_default().push((word, freq));
    }

    let wanted: HashSet<&str> = words_of.values().flatten().map(|(w, _)| w.as_str()).collect();
    let keep = |label: &str| wanted.contains(label);
    let (word_vectors, dim) = read_vectors(vector_file, Some(&keep))?;
    let word_vectors: HashMap<&str, &Vec<f64>> = word_vectors.iter().map(|(k, v)| (k.as_str(), v)).collect();

    let mut vectors = BTreeMap::new();
    let mut excluded = Vec::new();
    for (concept, words) in &words_of {
        let found: Vec<(&Vec<f64>, f64)> = words
            .iter()
            .filter_map(|(w, f)| word_vectors.get(w.as_str()).map(|v| (*v, *f)))
            .collect();
        if found.is_empty() {
            excluded.push(concept.clone());
            continue;
        }
        let total: f64 = found.iter().map(|(_, f)| f).sum();
        let mut mean = vec![0.0; dim];
        for (v, f) in found {
            for (m, x) in mean.iter_mut().zip(v) {
                *m += f / total * x;
            }
        }
        vectors.insert(concept.clone(), mean);
    }
    Ok(ConceptMeans { dim, vectors, excluded })
}

/// Concept means reduced to `d` dimensions with PCA.
pub fn map_external_vectors(vector_file: &Path, concept_map: &Path, d: usize) -> Result<ExternalMapping> {
    let means = concept_means(vector_file, concept_map)?;
    if means.vectors.is_empty() {
        return Err(Error::EmptyResult(format!(
            "no concept in {} has a word in {}",
            concept_map.display(),
            vector_file.display()
        )));
    }
    if !means.excluded.is_empty() {
        log::info!("{} concepts have no resolvable word", means.excluded.len());
    }
    let labels: Vec<ConceptId> = means.vectors.keys().cloned().collect();
    let values: Vec<f64> = means.vectors.values().flatten().copied().collect();
    let m = DenseMatrix::new(labels.len(), means.dim, values)?.with_labels(labels)?;
    let pca = pca_reduce(&m, d)?;
    let mut notes = vec![format!("{} concepts without resolvable words", means.excluded.len())];
    if pca.null_components > 0 {
        notes.push(format!("{} components beyond the rank of the input", pca.null_components));
    }
    let provenance = Provenance {
        method: "external".into(),
        colex_types: Vec::new(),
        config_digest: config_digest(&(d, file_digest(concept_map)?)),
        seed: None,
        notes,
    };
    Ok(ExternalMapping {
        embedding: EmbeddingSet::from_matrix(&pca.projected, provenance)?,
        excluded: means.excluded,
    })
}
