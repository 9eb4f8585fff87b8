//! Inference of full, affix and overlap colexifications from a wordlist.
//!
//! Forms are compared as sequences of segment tokens. Within one language a
//! pair of concepts is colexified when some form of the first and some form
//! of the second match under the requested type; the edge weight is the
//! number of distinct language families with at least one such language.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ColexGraph, ColexType, ConceptId, Edge, GraphMeta, WeightSemantics};
use crate::tsv::read_tsv;

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct WordlistEntry {
    pub language: String,
    pub family: String,
    pub concept: ConceptId,
    pub form: Vec<String>,
}

#[derive(Clone, Debug, Default)]
pub struct Wordlist {
    entries: Vec<WordlistEntry>,
    families: BTreeMap<String, String>,
}

impl Wordlist {
    /// Validates and deduplicates entries on (language, concept, form).
    pub fn new(entries: impl IntoIterator<Item = WordlistEntry>) -> Result<Self> {
        let mut families: BTreeMap<String, String> = BTreeMap::new();
        let mut seen = HashSet::new();
        let mut kept = Vec::new();
        for e in entries {
            if e.form.is_empty() || e.form.iter().any(|t| t.is_empty()) {
                return Err(Error::Validation(format!(
                    "empty form or token for {} in {}",
                    e.concept, e.language
                )));
            }
            match families.get(&e.language) {
                Some(f) if f != &e.family => {
                    return Err(Error::Validation(format!(
                        "language {} listed under families {} and {}",
                        e.language, f, e.family
                    )))
                }
                Some(_) => {}
                None => {
                    families.insert(e.language.clone(), e.family.clone());
                }
            }
            if seen.insert((e.language.clone(), e.concept.clone(), e.form.clone())) {
                kept.push(e);
            }
        }
        Ok(Wordlist {
            entries: kept,
            families,
        })
    }

    /// Reads `LANGUAGE\tFAMILY\tCONCEPT\tFORM` where FORM is space-separated.
    pub fn load(path: &Path) -> Result<Self> {
        let rows = read_tsv(path, &["LANGUAGE", "FAMILY", "CONCEPT", "FORM"], &[])?;
        let mut entries = Vec::with_capacity(rows.len());
        for row in rows {
            if row.fields.len() != 4 {
                return Err(Error::parse(
                    path,
                    row.line,
                    format!("expected 4 columns, found {}", row.fields.len()),
                ));
            }
            let language = row.fields[0].trim().to_string();
            let family = row.fields[1].trim().to_string();
            if language.is_empty() || family.is_empty() {
                return Err(Error::parse(path, row.line, "empty LANGUAGE or FAMILY"));
            }
            let concept = ConceptId::new(row.fields[2].trim())
                .map_err(|_| Error::parse(path, row.line, "empty CONCEPT"))?;
            let form: Vec<String> = row.fields[3].split_whitespace().map(str::to_string).collect();
            if form.is_empty() {
                return Err(Error::parse(path, row.line, "empty FORM"));
            }
            entries.push(WordlistEntry {
                language,
                family,
                concept,
                form,
            });
        }
        Wordlist::new(entries)
    }

    pub fn entries(&self) -> &[WordlistEntry] {
        &self.entries
    }

    /// Language to family map.
    pub fn families(&self) -> &BTreeMap<String, String> {
        &self.families
    }

    pub fn family_count(&self) -> usize {
        self.families.values().collect::<BTreeSet<_>>().len()
    }

    pub fn concepts(&self) -> BTreeSet<ConceptId> {
        self.entries.iter().map(|e| e.concept.clone()).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ColexParams {
    /// Minimum length, in segments, of the shorter form of an affix match.
    pub min_form_len: usize,
    /// Minimum length, in segments, of the shared block of an overlap match.
    pub min_overlap_len: usize,
    /// Affix matches need a strictly longer derived form.
    pub require_proper: bool,
}

impl Default for ColexParams {
    fn default() -> Self {
        ColexParams {
            min_form_len: 3,
            min_overlap_len: 4,
            require_proper: true,
        }
    }
}

impl ColexParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_form_len == 0 || self.min_overlap_len == 0 {
            return Err(Error::Argument("length thresholds must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum AffixDirection {
    ADerivedFromB,
    BDerivedFromA,
}

impl AffixDirection {
    pub fn reversed(self) -> Self {
        match self {
            AffixDirection::ADerivedFromB => AffixDirection::BDerivedFromA,
            AffixDirection::BDerivedFromA => AffixDirection::ADerivedFromB,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ColexMatch {
    None,
    Full,
    Affix(AffixDirection),
    Overlap,
}

impl ColexMatch {
    pub fn colex_type(self) -> Option<ColexType> {
        match self {
            ColexMatch::None => None,
            ColexMatch::Full => Some(ColexType::Full),
            ColexMatch::Affix(_) => Some(ColexType::Affix),
            ColexMatch::Overlap => Some(ColexType::Overlap),
        }
    }
}

/// Classifies two forms; full beats affix beats overlap.
pub fn classify_pair<S: AsRef<str>>(a: &[S], b: &[S], p: &ColexParams) -> ColexMatch {
    if tokens_eq(a, b) {
        return ColexMatch::Full;
    }
    let (short, long, dir) = if a.len() <= b.len() {
        (a, b, AffixDirection::BDerivedFromA)
    } else {
        (b, a, AffixDirection::ADerivedFromB)
    };
    let long_enough = if p.require_proper {
        long.len() > short.len()
    } else {
        long.len() >= short.len()
    };
    if short.len() >= p.min_form_len && long_enough {
        let prefix = tokens_eq(short, &long[..short.len()]);
        let suffix = tokens_eq(short, &long[long.len() - short.len()..]);
        if prefix || suffix {
            return ColexMatch::Affix(dir);
        }
    }
    if longest_common_block(a, b) >= p.min_overlap_len {
        return ColexMatch::Overlap;
    }
    ColexMatch::None
}

fn tokens_eq<S: AsRef<str>>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.as_ref() == y.as_ref())
}

/// Length of the longest common contiguous token block.
pub fn longest_common_block<S: AsRef<str>>(a: &[S], b: &[S]) -> usize {
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    let mut best = 0;
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x.as_ref() == y.as_ref() { prev[j] + 1 } else { 0 };
            best = best.max(cur[j + 1]);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    best
}

/// Builds the colexification network of one type. Affix networks are
/// directed from the derived-form concept to the stem concept; the other two
/// are undirected. Every concept in the wordlist becomes a node.
pub fn infer_network(w: &Wordlist, kind: ColexType, p: &ColexParams) -> Result<ColexGraph> {
    p.validate()?;
    let attestations = collect_attestations(w, kind, p);
    let edges = attestations
        .into_iter()
        .map(|((s, t), fams)| Edge {
            source: s,
            target: t,
            weight: fams.len() as f64,
        })
        .collect();
    ColexGraph::new(
        w.concepts(),
        edges,
        GraphMeta {
            colex_type: kind,
            directed: kind == ColexType::Affix,
            weight_semantics: WeightSemantics::FamilyCount,
        },
    )
}

/// Undirected network that counts, per unordered concept pair, the union of
/// families attesting either direction. For full and overlap this equals
/// [`infer_network`].
pub fn infer_undirected_network(
    w: &Wordlist,
    kind: ColexType,
    p: &ColexParams,
) -> Result<ColexGraph> {
    p.validate()?;
    let mut merged: BTreeMap<(ConceptId, ConceptId), BTreeSet<&str>> = BTreeMap::new();
    for ((s, t), fams) in collect_attestations(w, kind, p) {
        let key = if s <= t { (s, t) } else { (t, s) };
        merged.entry(key).or_default().extend(fams);
    }
    let edges = merged
        .into_iter()
        .map(|((s, t), fams)| Edge {
            source: s,
            target: t,
            weight: fams.len() as f64,
        })
        .collect();
    ColexGraph::new(
        w.concepts(),
        edges,
        GraphMeta {
            colex_type: kind,
            directed: false,
            weight_semantics: WeightSemantics::FamilyCount,
        },
    )
}

type Attestations<'a> = BTreeMap<(ConceptId, ConceptId), BTreeSet<&'a str>>;

fn collect_attestations<'a>(w: &'a Wordlist, kind: ColexType, p: &ColexParams) -> Attestations<'a> {
    let mut by_language: BTreeMap<&str, Vec<&WordlistEntry>> = BTreeMap::new();
    for e in &w.entries {
        by_language.entry(e.language.as_str()).or_default().push(e);
    }
    let per_language: Vec<(&str, BTreeSet<(ConceptId, ConceptId)>)> = by_language
        .par_iter()
        .map(|(lang, entries)| {
            let family = w.families[*lang].as_str();
            (family, language_edges(entries, kind, p))
        })
        .collect();

    let mut out: Attestations<'a> = BTreeMap::new();
    for (family, edges) in per_language {
        for key in edges {
            out.entry(key).or_default().insert(family);
        }
    }
    out
}

/// Edges attested by a single language. Candidate pairs come from hashing
/// (identical forms, prefixes/suffixes, shared n-grams) and are confirmed by
/// [`classify_pair`].
fn language_edges(
    entries: &[&WordlistEntry],
    kind: ColexType,
    p: &ColexParams,
) -> BTreeSet<(ConceptId, ConceptId)> {
    let mut candidates: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut add = |i: usize, j: usize| {
        if entries[i].concept != entries[j].concept {
            candidates.insert((i.min(j), i.max(j)));
        }
    };
    match kind {
        ColexType::Full => {
            let mut groups: HashMap<&[String], Vec<usize>> = HashMap::new();
            for (i, e) in entries.iter().enumerate() {
                groups.entry(e.form.as_slice()).or_default().push(i);
            }
            for members in groups.values() {
                for (x, &i) in members.iter().enumerate() {
                    for &j in &members[x + 1..] {
                        add(i, j);
                    }
                }
            }
        }
        ColexType::Affix => {
            let mut by_form: HashMap<&[String], Vec<usize>> = HashMap::new();
            for (i, e) in entries.iter().enumerate() {
                if e.form.len() >= p.min_form_len {
                    by_form.entry(e.form.as_slice()).or_default().push(i);
                }
            }
            for (i, e) in entries.iter().enumerate() {
                let n = e.form.len();
                let upper = if p.require_proper { n.saturating_sub(1) } else { n };
                for len in p.min_form_len..=upper {
                    for part in [&e.form[..len], &e.form[n - len..]] {
                        if let Some(stems) = by_form.get(part) {
                            for &j in stems {
                                if j != i {
                                    add(i, j);
                                }
                            }
                        }
                    }
                }
            }
        }
        ColexType::Overlap => {
            let k = p.min_overlap_len;
            let mut grams: HashMap<&[String], Vec<usize>> = HashMap::new();
            for (i, e) in entries.iter().enumerate() {
                if e.form.len() >= k {
                    let mut local: HashSet<&[String]> = HashSet::new();
                    for g in e.form.windows(k) {
                        if local.insert(g) {
                            grams.entry(g).or_default().push(i);
                        }
                    }
                }
            }
            for members in grams.values() {
                for (x, &i) in members.iter().enumerate() {
                    for &j in &members[x + 1..] {
                        add(i, j);
                    }
                }
            }
        }
    }

    let mut edges = BTreeSet::new();
    for (i, j) in candidates {
        let (a, b) = (entries[i], entries[j]);
        let m = classify_pair(&a.form, &b.form, p);
        if m.colex_type() != Some(kind) {
            continue;
        }
        let key = match m {
            ColexMatch::Affix(AffixDirection::ADerivedFromB) => (a.concept.clone(), b.concept.clone()),
            ColexMatch::Affix(AffixDirection::BDerivedFromA) => (b.concept.clone(), a.concept.clone()),
            _ if a.concept <= b.concept => (a.concept.clone(), b.concept.clone()),
            _ => (b.concept.clone(), a.concept.clone()),
        };
        edges.insert(key);
    }
    edges
}
