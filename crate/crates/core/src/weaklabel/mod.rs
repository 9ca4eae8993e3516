//! Weakly labeled datasets and the discriminability statistic.

mod build;
mod dataset;
mod pairs;

pub use build::{
    build_eval_sample, build_hashtag_baseline, build_informed, exclude, InformedConfig, TextIndex,
};
pub use dataset::{Example, Provenance, WeakDataset};
pub use pairs::{pairwise_rate, pairwise_rate_from_scores, repeated_rate, PairRate, RepeatedRate};

#[cfg(test)]
mod tests {
    use std::collections::{BTreeSet, HashMap};

    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;
    use crate::corpus::{CleanText, CorpusPartition, Polarity};
    use crate::scorer::{rank, Direction, ScoreTable};
    use crate::Error;

    struct Fixture {
        part: CorpusPartition,
        table: ScoreTable,
        texts: TextIndex,
    }

    /// `n_sup` supportive and `n_not` not-supportive posts with random scores;
    /// every `dup_every`-th post reuses an earlier text.
    fn fixture(n_sup: usize, n_not: usize, dup_every: usize, seed: u64) -> Fixture {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut part = CorpusPartition::default();
        let mut ids = Vec::new();
        let mut hope = Vec::new();
        let mut empathy = Vec::new();
        let mut texts = HashMap::new();
        for i in 0..n_sup + n_not {
            let id = format!("{i:06}");
            if i < n_sup {
                part.supportive.insert(id.clone());
            } else {
                part.not_supportive.insert(id.clone());
            }
            let t = if dup_every > 0 && i % dup_every == dup_every - 1 {
                format!("text {}", i - 1)
            } else {
                format!("text {i}")
            };
            texts.insert(id.clone(), CleanText::from_normalized(&t));
            ids.push(id);
            hope.push(rng.gen::<f64>());
            empathy.push(rng.gen::<f64>());
        }
        let table = ScoreTable::from_columns(
            vec!["hope".into(), "empathy".into()],
            &ids,
            vec![hope, empathy],
            "fp".into(),
        )
        .unwrap();
        Fixture { part, table, texts }
    }

    fn small_config() -> InformedConfig {
        InformedConfig {
            top_k: 50,
            neg_per_list: 30,
            ..InformedConfig::default()
        }
    }

    #[test]
    fn disjoint_top_lists_give_two_k_positives() {
        // hope ranks ascending ids first, empathy descending, so the top lists never meet
        let mut part = CorpusPartition::default();
        let mut texts = HashMap::new();
        let ids: Vec<String> = (0..400).map(|i| format!("{i:03}")).collect();
        for (i, id) in ids.iter().enumerate() {
            if i < 200 {
                part.supportive.insert(id.clone());
            } else {
                part.not_supportive.insert(id.clone());
            }
            texts.insert(id.clone(), CleanText::from_normalized(&format!("t {i}")));
        }
        let hope: Vec<f64> = (0..400).map(|i| 1.0 - i as f64 / 400.0).collect();
        let empathy: Vec<f64> = (0..400).map(|i| i as f64 / 400.0).collect();
        let table = ScoreTable::from_columns(
            vec!["hope".into(), "empathy".into()],
            &ids,
            vec![hope, empathy],
            "".into(),
        )
        .unwrap();
        let ds = build_informed(&table, &part, &texts, &small_config(), 1).unwrap();
        assert_eq!(ds.count_by_label().0, 100);
    }

    #[test]
    fn invariants_hold_with_duplicates() {
        let f = fixture(600, 800, 7, 3);
        let cfg = small_config();
        let ds = build_informed(&f.table, &f.part, &f.texts, &cfg, 11).unwrap();
        let (pos, neg) = ds.count_by_label();
        assert!(pos <= 2 * cfg.top_k && pos > 0 && neg > 0);

        let texts: Vec<&str> = ds.examples.iter().map(|e| e.text.as_str()).collect();
        let unique: BTreeSet<&str> = texts.iter().copied().collect();
        assert_eq!(unique.len(), texts.len());

        let n_not = f.part.not_supportive.len();
        let start = cfg.bottom_start(n_not);
        for e in ds.positives() {
            assert!(f.part.supportive.contains(&e.id));
            assert_eq!(e.provenance, Provenance::InformedPositive);
        }
        for e in ds.negatives() {
            assert!(f.part.not_supportive.contains(&e.id));
            for scorer in &e.via {
                let ranked = rank(
                    &f.table,
                    scorer,
                    f.part.not_supportive.iter().map(String::as_str),
                    Direction::Descending,
                )
                .unwrap();
                let pos = ranked.iter().position(|x| *x == e.id).unwrap() + 1;
                assert!(pos > start, "{} at rank {pos} of {scorer}", e.id);
            }
        }

        let again = build_informed(&f.table, &f.part, &f.texts, &cfg, 11).unwrap();
        assert_eq!(again.to_jsonl(), ds.to_jsonl());
    }

    #[test]
    fn shortfall_is_reported() {
        let f = fixture(40, 800, 0, 3);
        match build_informed(&f.table, &f.part, &f.texts, &small_config(), 0) {
            Err(Error::InsufficientData(msg)) => assert!(msg.contains("short by 10"), "{msg}"),
            other => panic!("{other:?}"),
        }
        let f = fixture(100, 20, 0, 3);
        assert!(build_informed(&f.table, &f.part, &f.texts, &small_config(), 0).is_err());
    }

    #[test]
    fn missing_scorer_is_reported() {
        let f = fixture(100, 200, 0, 3);
        let cfg = InformedConfig {
            scorers: vec!["hope".into(), "distress".into()],
            ..small_config()
        };
        assert!(matches!(
            build_informed(&f.table, &f.part, &f.texts, &cfg, 0),
            Err(Error::UnknownScorer(_))
        ));
    }

    #[test]
    fn hashtag_baseline_sizes_and_seeds() {
        let f = fixture(300, 300, 0, 5);
        let a = build_hashtag_baseline(&f.part, &f.texts, 97, 50, 1).unwrap();
        let b = build_hashtag_baseline(&f.part, &f.texts, 97, 50, 2).unwrap();
        assert_eq!(a.count_by_label(), (97, 50));
        assert_eq!(b.count_by_label(), (97, 50));
        assert_ne!(a.ids(), b.ids());
        assert!(a.positives().all(|e| f.part.supportive.contains(&e.id)));
        assert!(a.negatives().all(|e| f.part.not_supportive.contains(&e.id)));
        assert!(build_hashtag_baseline(&f.part, &f.texts, 0, 50, 1).is_err());
        assert!(build_hashtag_baseline(&f.part, &f.texts, 301, 50, 1).is_err());
    }

    #[test]
    fn eval_sample_exhaustive_and_excluded() {
        let f = fixture(30, 20, 0, 5);
        let all = build_eval_sample(&f.part, &f.texts, 50, 4).unwrap();
        assert_eq!(all.ids().len(), 50);
        assert!(all.examples.iter().all(|e| e.label.is_none()));
        let sorted: Vec<String> = all.ids().into_iter().collect();
        let order: Vec<String> = all.examples.iter().map(|e| e.id.clone()).collect();
        assert_ne!(order, sorted);
        assert!(build_eval_sample(&f.part, &f.texts, 51, 4).is_err());

        let f = fixture(600, 800, 0, 6);
        let eval = build_eval_sample(&f.part, &f.texts, 200, 4).unwrap();
        let pool = exclude(&f.part, &eval);
        let ds = build_informed(&f.table, &pool, &f.texts, &small_config(), 4).unwrap();
        assert!(ds.ids().is_disjoint(&eval.ids()));
    }

    #[test]
    fn pair_rate_edge_cases() {
        let sup = vec![1.0; 10];
        let not = vec![0.0; 12];
        assert_eq!(
            pairwise_rate_from_scores("o", &sup, &not, 1000, 1)
                .unwrap()
                .rate,
            1.0
        );
        let same = vec![0.5; 10];
        assert_eq!(
            pairwise_rate_from_scores("c", &same, &same, 1000, 1)
                .unwrap()
                .rate,
            0.0
        );
        assert!(pairwise_rate_from_scores("c", &[], &same, 1000, 1).is_err());
        assert!(pairwise_rate_from_scores("c", &same, &same, 0, 1).is_err());
    }

    #[test]
    fn repeated_rate_on_separable_scores_has_no_spread() {
        let mut f = fixture(50, 50, 0, 8);
        let ids: Vec<String> = f.table.ids().map(String::from).collect();
        let col = ids
            .iter()
            .map(|id| {
                if f.part.supportive.contains(id) {
                    0.9
                } else {
                    0.1
                }
            })
            .collect();
        f.table =
            ScoreTable::from_columns(vec!["hope".into()], &ids, vec![col], "".into()).unwrap();
        let r = repeated_rate(&f.table, &f.part, "hope", 5000, 5, 0).unwrap();
        assert_eq!((r.mean, r.std), (1.0, 0.0));
        assert_eq!(
            r.runs.iter().map(|x| x.seed).collect::<Vec<_>>(),
            [0, 1, 2, 3, 4]
        );
        assert!(repeated_rate(&f.table, &f.part, "hope", 5000, 0, 0).is_err());
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn swapped_sides_estimate_strict_losses(
            sup in proptest::collection::vec(0u8..5, 1..20),
            not in proptest::collection::vec(0u8..5, 1..20),
            seed in 0u64..1000,
        ) {
            let sup: Vec<f64> = sup.into_iter().map(f64::from).collect();
            let not: Vec<f64> = not.into_iter().map(f64::from).collect();
            let n = 20_000u64;
            let fwd = pairwise_rate_from_scores("s", &sup, &not, n, seed).unwrap();
            let rev = pairwise_rate_from_scores("s", &not, &sup, n, seed).unwrap();
            // exact probabilities by enumerating every pair
            let total = (sup.len() * not.len()) as f64;
            let wins = sup.iter().flat_map(|x| not.iter().map(move |y| x > y)).filter(|&b| b).count() as f64;
            let losses = sup.iter().flat_map(|x| not.iter().map(move |y| x < y)).filter(|&b| b).count() as f64;
            for (est, p) in [(fwd.rate, wins / total), (rev.rate, losses / total)] {
                let sigma = (p * (1.0 - p) / n as f64).sqrt();
                prop_assert!((est - p).abs() <= 5.0 * sigma + 1e-12, "estimate {est} vs exact {p}");
            }
            prop_assert_eq!(fwd.rate, fwd.wins as f64 / n as f64);
        }

        #[test]
        fn labels_match_sides(seed in 0u64..50) {
            let f = fixture(120, 200, 5, seed);
            let cfg = InformedConfig { top_k: 20, neg_per_list: 15, ..InformedConfig::default() };
            let ds = build_informed(&f.table, &f.part, &f.texts, &cfg, seed).unwrap();
            for e in &ds.examples {
                let expected = if f.part.supportive.contains(&e.id) { Polarity::Supportive } else { Polarity::NotSupportive };
                prop_assert_eq!(e.label, Some(expected));
            }
        }
    }
}
