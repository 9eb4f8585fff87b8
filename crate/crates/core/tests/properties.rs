mod common;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use colexvec::colexifier::infer_network;
use colexvec::embedding::{EmbeddingSet, Provenance};
use colexvec::eval::{draw_negatives, filter_association_pairs, ConceptPair};
use colexvec::graph::{ColexGraph, ColexType, ConceptId};
use colexvec::node2vec::extract_pairs;
use colexvec::numerics::{cosine_similarity, spearman_rho};
use colexvec::prone::{prone, ProneConfig};

fn ids(n: usize) -> Vec<ConceptId> {
    (0..n).map(|i| ConceptId::from(format!("K{i:02}").as_str())).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn networks_match_enumerator(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let w = common::random_wordlist(&mut rng);
        let p = common::random_params(&mut rng);
        for kind in [ColexType::Full, ColexType::Affix, ColexType::Overlap] {
            let g = infer_network(&w, kind, &p).unwrap();
            let (order, m) = common::oracle_network(&w, kind, &p);
            let got = g.adjacency_matrix(&order).unwrap();
            for i in 0..order.len() {
                for j in 0..order.len() {
                    let want = if kind == ColexType::Affix { m[i][j] } else { m[i][j].max(m[j][i]) };
                    prop_assert_eq!(got.get(i, j), want);
                }
            }
        }
    }

    #[test]
    fn cosine_is_bounded_and_symmetric(
        u in prop::collection::vec(-1e3f64..1e3, 1..12),
        v in prop::collection::vec(-1e3f64..1e3, 1..12),
    ) {
        let n = u.len().min(v.len());
        let (u, v) = (&u[..n], &v[..n]);
        let c = cosine_similarity(u, v);
        prop_assert!((-1.0..=1.0).contains(&c));
        prop_assert_eq!(c, cosine_similarity(v, u));
    }

    #[test]
    fn spearman_ignores_monotone_maps(xs in prop::collection::vec(-50i32..50, 3..30), shift in -5.0f64..5.0) {
        let xs: Vec<f64> = xs.into_iter().map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().enumerate().map(|(i, x)| x * 0.5 + (i % 4) as f64).collect();
        let mapped: Vec<f64> = xs.iter().map(|x| x.powi(3) + shift).collect();
        if let (Ok(a), Ok(b)) = (spearman_rho(&xs, &ys), spearman_rho(&mapped, &ys)) {
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&a));
        }
    }

    #[test]
    fn undirected_view_is_idempotent(seed in any::<u64>(), n in 2usize..12) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, 0.3);
        let once = g.to_undirected();
        prop_assert_eq!(&once, &once.to_undirected());
        prop_assert_eq!(once.nodes(), g.nodes());
    }

    #[test]
    fn graphs_survive_a_round_trip(seed in any::<u64>(), n in 1usize..10) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, 0.5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.tsv");
        g.save(&path).unwrap();
        let back = ColexGraph::load(&path).unwrap();
        // isolated nodes are not written, so compare the edges
        let (a, b) = (g.adjacency(), back.adjacency());
        for e in g.edges() {
            let (i, j) = (b.index_of(&e.source).unwrap(), b.index_of(&e.target).unwrap());
            prop_assert!(b.out[i].contains(&(j, e.weight)));
        }
        prop_assert_eq!(g.edges().len(), back.edges().len());
        prop_assert!(a.len() >= b.len());
    }

    #[test]
    fn embeddings_survive_a_round_trip(rows in prop::collection::vec(prop::collection::vec(-1e6f64..1e6, 3), 1..8)) {
        let vectors: BTreeMap<ConceptId, Vec<f64>> = ids(rows.len()).into_iter().zip(rows).collect();
        let e = EmbeddingSet::new(3, vectors, Provenance { method: "test".into(), ..Provenance::default() }).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("e.txt");
        e.save(&path).unwrap();
        let back = EmbeddingSet::load(&path).unwrap();
        // files carry eight significant digits
        for (c, v) in e.vectors() {
            for (x, y) in v.iter().zip(back.get(c).unwrap()) {
                prop_assert!((x - y).abs() <= 5e-8 * x.abs(), "{} vs {}", x, y);
            }
        }
        let again = dir.path().join("again.txt");
        back.save(&again).unwrap();
        prop_assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&again).unwrap());
    }

    #[test]
    fn negatives_are_valid(seed in any::<u64>(), n in 6usize..20, k in 1usize..5) {
        let pool = ids(n);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        use rand::Rng;
        let mut positives = Vec::new();
        let mut seen = HashSet::new();
        for _ in 0..k {
            let (a, b) = (rng.random_range(0..n), rng.random_range(0..n));
            if a != b && seen.insert((a.min(b), a.max(b))) {
                positives.push(ConceptPair::new(pool[a].clone(), pool[b].clone()));
            }
        }
        // fewer positives than n - 2, so every pair has a valid replacement
        prop_assume!(!positives.is_empty());
        let known: HashSet<_> = positives.iter().map(ConceptPair::unordered).collect();
        let negatives = draw_negatives(&positives, &pool, seed).unwrap();
        prop_assert_eq!(negatives.len(), positives.len());
        for (neg, pos) in negatives.iter().zip(&positives) {
            prop_assert!(neg.a != neg.b);
            prop_assert!(!known.contains(&neg.unordered()));
            // one side of the positive survives
            prop_assert!(neg.a == pos.a || neg.b == pos.b);
        }
        prop_assert_eq!(negatives, draw_negatives(&positives, &pool, seed).unwrap());
    }

    #[test]
    fn association_filter_keeps_heavy_in_space_pairs(
        edges in prop::collection::vec((0usize..8, 0usize..8, 1u64..10), 1..30),
        min_weight in 1u64..10,
    ) {
        let names = ids(10);
        let space: BTreeSet<ConceptId> = names[..6].iter().cloned().collect();
        let pairs: Vec<ConceptPair> = edges
            .iter()
            .filter(|(a, b, _)| a != b)
            .map(|&(a, b, w)| ConceptPair { a: names[a].clone(), b: names[b].clone(), weight: Some(w) })
            .collect();
        let kept = filter_association_pairs(&pairs, min_weight, &space).unwrap();
        let mut seen = HashSet::new();
        for p in &kept {
            prop_assert!(space.contains(&p.a) && space.contains(&p.b));
            prop_assert!(p.weight.unwrap() >= min_weight);
            prop_assert!(seen.insert(p.unordered()));
        }
    }

    #[test]
    fn window_pairs_are_counted_exactly(lens in prop::collection::vec(1usize..12, 1..6), window in 1usize..5) {
        let walks: Vec<Vec<usize>> = lens.iter().map(|&l| (0..l).collect()).collect();
        let pairs = extract_pairs(&walks, window);
        let expected: usize = lens
            .iter()
            .map(|&l| (0..l).map(|i| (0..l).filter(|&j| j != i && i.abs_diff(j) <= window).count()).sum::<usize>())
            .sum();
        prop_assert_eq!(pairs.len(), expected);
        prop_assert!(pairs.iter().all(|(a, b)| a != b && a.abs_diff(*b) <= window));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn prone_rows_are_unit_vectors(seed in any::<u64>(), n in 6usize..25) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = common::random_graph(&mut rng, n, 0.3);
        let cfg = ProneConfig { dim: 4.min(n - 1), seed, ..ProneConfig::default() };
        let out = prone(&g, &cfg).unwrap();
        for v in out.embedding.vectors().values() {
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            prop_assert!((norm - 1.0).abs() < 1e-9 || norm == 0.0);
        }
        prop_assert_eq!(out.embedding.len() + out.uncovered.len(), n);
    }
}

#[test]
fn saturated_pool_is_a_sampling_error() {
    let pool = ids(4);
    let mut complete = Vec::new();
    for i in 0..4 {
        for j in i + 1..4 {
            complete.push(ConceptPair::new(pool[i].clone(), pool[j].clone()));
        }
    }
    let err = draw_negatives(&complete, &pool, 3).unwrap_err();
    assert!(matches!(err, colexvec::error::Error::Sampling(_)), "{err}");
}
