use std::collections::BTreeMap;

use proptest::prelude::*;

use tdam::corpus::{build_vocab, parse_corpus, tokenize_text, LabelSchema, Vocabulary};
use tdam::evaluation::{accuracy, topic_coherence, CoherenceConfig};
use tdam::extraction::{kmeans, pca_2d, DumpEntry, Level, LocalEmbeddingDump, Tsne};
use tdam::model::{encode_values, encoder_registry, Checkpoint, ForwardMode, ModelDims};
use tdam::training::{derive_seed, init_params};

fn small_dims() -> impl Strategy<Value = ModelDims> {
    (1usize..4, 1usize..4, 1usize..5, 2usize..12).prop_map(|(h, k, d, v)| ModelDims {
        hidden: 2 * h,
        topics: k,
        embedding: d,
        vocab: v,
        sentiment_classes: 3,
        domain_classes: 2,
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn checkpoint_text_round_trips(dims in small_dims(), seed: u64) {
        let params = init_params(dims, seed).unwrap();
        let tokens: Vec<String> = ["<pad>", "<unk>"].iter().map(|t| t.to_string()).chain((2..dims.vocab).map(|i| format!("w{i}"))).collect();
        let ckpt = Checkpoint {
            params,
            encoder: "tdam".into(),
            vocab: Vocabulary::from_tokens(tokens),
            labels: LabelSchema {
                sentiment: vec!["neg".into(), "neu".into(), "pos".into()],
                domains: vec!["a".into(), "b".into()],
            },
            settings: BTreeMap::from([("seed".to_string(), seed.to_string())]),
        };
        let back = Checkpoint::from_text(&ckpt.to_text()).unwrap();
        prop_assert_eq!(back, ckpt);
    }

    #[test]
    fn encoding_is_deterministic_and_finite(dims in small_dims(), seed: u64, words in prop::collection::vec(prop::collection::vec(0usize..64, 1..6), 1..4)) {
        let params = init_params(dims, seed).unwrap();
        let sentences: Vec<Vec<usize>> = words.iter().map(|s| s.iter().map(|w| w % dims.vocab).collect()).collect();
        let registry = encoder_registry();
        for name in registry.names() {
            let enc = registry.get(name).unwrap();
            let a = encode_values(enc, &params, &sentences, ForwardMode::inference()).unwrap();
            let b = encode_values(enc, &params, &sentences, ForwardMode::inference()).unwrap();
            prop_assert!(a.doc_rep.iter().all(|v| v.is_finite()));
            prop_assert!((a.sentiment_probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            prop_assert_eq!(a, b);
        }
    }

    #[test]
    fn npmi_scores_stay_in_range(docs in prop::collection::vec(prop::collection::vec(0u8..8, 0..30), 1..8), window in 1usize..12) {
        let reference: Vec<Vec<String>> = docs.iter().map(|d| d.iter().map(|w| format!("t{w}")).collect()).collect();
        prop_assume!(reference.iter().any(|d| !d.is_empty()));
        let topics = vec![(0..5).map(|i| format!("t{i}")).collect::<Vec<_>>(), (3..8).map(|i| format!("t{i}")).collect()];
        let cfg = CoherenceConfig { window, ..CoherenceConfig::default() };
        let report = topic_coherence(&topics, &reference, &cfg).unwrap();
        for t in &report.topics {
            prop_assert_eq!(t.pairs_scored + t.pairs_skipped, 10);
            if let Some(s) = t.score {
                prop_assert!((-1.0 - 1e-9..=1.0 + 1e-9).contains(&s), "score {}", s);
            }
        }
    }

    #[test]
    fn accuracy_is_a_fraction(pairs in prop::collection::vec((0usize..3, 0usize..3), 1..50)) {
        let (p, g): (Vec<usize>, Vec<usize>) = pairs.into_iter().unzip();
        let a = accuracy(&p, &g).unwrap();
        let hits = p.iter().zip(&g).filter(|(x, y)| x == y).count();
        prop_assert_eq!(a, hits as f64 / p.len() as f64);
    }

    #[test]
    fn kmeans_assigns_every_point_to_its_nearest_centroid(points in prop::collection::vec((-5.0f64..5.0, -5.0f64..5.0), 4..30), k in 1usize..4, seed: u64) {
        let pts: Vec<Vec<f64>> = points.iter().map(|&(x, y)| vec![x, y]).collect();
        let km = kmeans(&pts, k, seed, 300).unwrap();
        prop_assert_eq!(km.assignments.len(), pts.len());
        if km.converged {
            for (p, &a) in pts.iter().zip(&km.assignments) {
                let own = tdam::extraction::squared_distance(p, &km.centroids[a]);
                for c in &km.centroids {
                    prop_assert!(own <= tdam::extraction::squared_distance(p, c) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn derived_seeds_are_stable(base: u64, a: u64, b: u64) {
        prop_assert_eq!(derive_seed(base, &[a, b]), derive_seed(base, &[a, b]));
        prop_assume!(a != b);
        prop_assert_ne!(derive_seed(base, &[a]), derive_seed(base, &[b]));
    }
}

#[test]
fn dump_text_round_trips() {
    let dump = LocalEmbeddingDump {
        level: Level::Sentence,
        dim: 3,
        checkpoint_hash: "abc".into(),
        entries: vec![
            DumpEntry {
                member: "d1#0".into(),
                doc_id: "d1".into(),
                sentence: 0,
                position: 0,
                vector: vec![0.1, -2.5e-7, 1.0 / 3.0],
            },
            DumpEntry {
                member: "d1#1".into(),
                doc_id: "d1".into(),
                sentence: 1,
                position: 0,
                vector: vec![f64::MIN_POSITIVE, 7.0, -0.0],
            },
        ],
    };
    assert_eq!(LocalEmbeddingDump::from_text(&dump.to_text()).unwrap(), dump);
}

fn blobs() -> (Vec<Vec<f64>>, Vec<usize>) {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(4);
    let centres = [[0.0; 5], [8.0, 0.0, 0.0, 8.0, 0.0], [0.0, 8.0, 8.0, 0.0, 8.0]];
    let mut pts = Vec::new();
    let mut labels = Vec::new();
    for (c, centre) in centres.iter().enumerate() {
        for _ in 0..20 {
            pts.push(centre.iter().map(|v| v + rng.random_range(-0.5..0.5)).collect());
            labels.push(c);
        }
    }
    (pts, labels)
}

/// Smallest distance between blob centroids over the largest blob radius.
fn separation(y: &[[f64; 2]], labels: &[usize]) -> f64 {
    let centroid = |c: usize| {
        let m: Vec<&[f64; 2]> = y.iter().zip(labels).filter(|(_, l)| **l == c).map(|(p, _)| p).collect();
        let n = m.len() as f64;
        [m.iter().map(|p| p[0]).sum::<f64>() / n, m.iter().map(|p| p[1]).sum::<f64>() / n]
    };
    let cs: Vec<[f64; 2]> = (0..3).map(centroid).collect();
    let dist = |a: &[f64; 2], b: &[f64; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let spread = y.iter().zip(labels).map(|(p, &l)| dist(p, &cs[l])).fold(0.0, f64::max);
    let gap = (0..3).flat_map(|i| (i + 1..3).map(move |j| (i, j))).map(|(i, j)| dist(&cs[i], &cs[j])).fold(f64::INFINITY, f64::min);
    gap / spread
}

#[test]
fn tsne_keeps_separated_blobs_apart() {
    let (pts, labels) = blobs();
    // default schedule; small sets need the full run to settle after exaggeration
    let tsne = Tsne {
        perplexity: 10.0,
        ..Tsne::default()
    };
    let y = tsne.embed(&pts, 0).unwrap();
    let ratio = separation(&y, &labels);
    assert!(ratio > 3.0, "separation ratio {ratio}");
    assert_eq!(tsne.embed(&pts, 0).unwrap(), y);
}

#[test]
fn pca_keeps_separated_blobs_apart() {
    let (pts, labels) = blobs();
    let ratio = separation(&pca_2d(&pts).unwrap(), &labels);
    assert!(ratio > 3.0, "separation ratio {ratio}");
}

#[test]
fn corpus_vocabulary_covers_training_tokens() {
    let text = "r1\tpositive\tbooks\tGreat plot. Loved it!\nr2\tnegative\tdvd\tBroken disc .\n";
    let corpus = parse_corpus(text, &LabelSchema::default()).unwrap();
    let vocab = build_vocab(corpus.sentences(), 1);
    for s in tokenize_text("Great plot. Loved it!") {
        for w in s {
            assert!(vocab.get(&w).is_some(), "{w} missing");
        }
    }
    let docs = corpus.documents(&vocab);
    assert_eq!(docs.len(), 2);
    assert!(docs.iter().all(|d| d.sentences.iter().flatten().all(|&id| id < vocab.len())));
}
