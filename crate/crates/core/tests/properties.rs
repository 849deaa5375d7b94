use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use textaug_core::corpus::{select_augmentation_targets, split, Dataset, LabeledExample};
use textaug_core::eda::{intensity, random_deletion, random_swap, synonym_replacement};
use textaug_core::lexicon::{cosine, SynonymMap};
use textaug_core::stats::{mcnemar, ContingencyTable};

fn vocab_map() -> SynonymMap {
    let mut m = SynonymMap::new();
    for (a, b) in [("bom", "ótimo"), ("ruim", "péssimo"), ("produto", "item"), ("loja", "vendedor"), ("chegou", "veio")] {
        m.insert(a, b);
        m.insert(b, a);
    }
    m
}

fn sentence() -> impl Strategy<Value = Vec<String>> {
    prop::collection::vec(
        prop::sample::select(vec![
            "o", "produto", "chegou", "bom", "ruim", "loja", "entrega", "rápida", "não", "gostei", "muito", "ótimo", "veio",
        ]),
        1..30,
    )
    .prop_map(|v| v.into_iter().map(String::from).collect())
}

fn sorted(mut v: Vec<String>) -> Vec<String> {
    v.sort();
    v
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn eda_invariants(tokens in sentence(), seed in any::<u64>(), alpha in 0.05f64..0.5) {
        let map = vocab_map();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n = intensity(alpha, tokens.len());
        prop_assert!(n >= 1);

        let sr = synonym_replacement(&tokens, n, &map, &mut rng);
        prop_assert_eq!(sr.len(), tokens.len());

        let sw = random_swap(&tokens, n, &mut rng);
        prop_assert_eq!(sorted(sw), sorted(tokens.clone()));

        let rd = random_deletion(&tokens, alpha, &mut rng);
        prop_assert!(!rd.is_empty());
        prop_assert!(rd.len() <= tokens.len());
        prop_assert!(rd.iter().all(|t| tokens.contains(t)));
    }

    #[test]
    fn deletion_keeps_order(tokens in sentence(), seed in any::<u64>()) {
        let indexed: Vec<String> = tokens.iter().enumerate().map(|(i, t)| format!("{t}{i}")).collect();
        let out = random_deletion(&indexed, 0.5, &mut ChaCha8Rng::seed_from_u64(seed));
        let positions: Vec<usize> = out.iter().map(|t| indexed.iter().position(|x| x == t).unwrap()).collect();
        prop_assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn cosine_properties(
        a in prop::collection::vec(-10.0f64..10.0, 8),
        b in prop::collection::vec(-10.0f64..10.0, 8),
    ) {
        prop_assume!(a.iter().any(|x| x.abs() > 1e-3) && b.iter().any(|x| x.abs() > 1e-3));
        let ab = cosine(&a, &b).unwrap();
        let ba = cosine(&b, &a).unwrap();
        prop_assert_eq!(ab, ba);
        prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&ab));
        prop_assert!((cosine(&a, &a).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn split_partitions_subset(n in 4usize..200, k in 2usize..5, seed in any::<u64>()) {
        let examples = (0..n)
            .map(|i| LabeledExample::new(&format!("frase {i}"), &format!("c{}", i % k)).unwrap())
            .collect();
        let ds = Dataset::new("p", examples);
        let s = split(&ds, 0.75, seed).unwrap();
        let mut all: Vec<usize> = s.train_indices.iter().chain(&s.test_indices).copied().collect();
        all.sort();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        prop_assert_eq!(s.train.len(), (0.75 * n as f64).round() as usize);
        prop_assert_eq!(s.train.len() + s.test.len(), n);
        prop_assert_eq!(&s, &split(&ds, 0.75, seed).unwrap());
    }

    #[test]
    fn targets_are_unique_indices(len in 0usize..2000, bp in 0u32..=10000, seed in any::<u64>()) {
        let p = f64::from(bp) / 10000.0;
        let t = select_augmentation_targets(len, p, seed).unwrap();
        prop_assert_eq!(t.len(), (p * len as f64 + 1e-9).floor() as usize);
        prop_assert!(t.windows(2).all(|w| w[0] < w[1]));
        prop_assert!(t.iter().all(|&i| i < len));
    }

    #[test]
    fn mcnemar_symmetric_and_bounded(b in 0u64..500, c in 0u64..500) {
        let x = mcnemar(&ContingencyTable { a: 3, b, c, d: 7 });
        let y = mcnemar(&ContingencyTable { a: 3, b: c, c: b, d: 7 });
        prop_assert_eq!(x, y);
        prop_assert!((0.0..=1.0).contains(&x.p_value));
    }

    #[test]
    fn mcnemar_monotone_in_discordance(n in 1u64..300) {
        let mut last = f64::INFINITY;
        for b in (n.div_ceil(2))..=n {
            let p = mcnemar(&ContingencyTable { a: 0, b, c: n - b, d: 0 }).p_value;
            prop_assert!(p <= last);
            last = p;
        }
    }
}

#[test]
fn intensity_examples() {
    assert_eq!(intensity(0.1, 9), 1);
    assert_eq!(intensity(0.1, 25), 2);
    assert_eq!(intensity(0.1, 1), 1);
}
