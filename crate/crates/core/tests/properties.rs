mod common;

use std::collections::{BTreeMap, HashSet};

use common::{id, CentsMatrix};
use promptrec::data::{normalize, read_dataset, write_dataset, DedupPolicy, RatingDataset, RatingMatrix};
use promptrec::engine::{correlation, pearson, predict, recommend_top_n, EngineConfig, SimilarityModel};
use promptrec::eval::{f1, fold_indices, mae, precision_recall, retrieval_counts, rmse, EmptyConvention, PrecisionBase, PredictionPair};
use promptrec::par::Execution;
use promptrec::text::{cosine, nearest_known_prompt, tokenize, vectorize, CorpusStats, MatchMethod};
use proptest::prelude::*;

fn cents() -> impl Strategy<Value = i64> {
    100i64..=500
}

fn rating() -> impl Strategy<Value = f64> {
    cents().prop_map(|c| c as f64 / 100.0)
}

/// Records over `n` prompts named "prompt i", possibly with repeated pairs.
fn records(max_prompts: usize, max_records: usize) -> impl Strategy<Value = (usize, Vec<(usize, usize, f64)>)> {
    (3..=max_prompts).prop_flat_map(move |n| {
        let rec = (0..n, 0..n, rating()).prop_filter("no self ratings", |(c, t, _)| c != t);
        (Just(n), prop::collection::vec(rec, 1..=max_records))
    })
}

fn dataset(n: usize, recs: &[(usize, usize, f64)]) -> RatingDataset {
    let mut d = RatingDataset::new();
    for i in 0..n {
        d.catalog.intern(&format!("prompt {i}"));
    }
    for &(c, t, r) in recs {
        d.push(&format!("prompt {c}"), &format!("prompt {t}"), r).unwrap();
    }
    d
}

/// Records without repeated pairs, so the integer oracle applies.
fn unique_dataset(n: usize, recs: &[(usize, usize, f64)]) -> RatingDataset {
    let mut seen = HashSet::new();
    let unique: Vec<_> = recs.iter().copied().filter(|&(c, t, _)| seen.insert((c, t))).collect();
    dataset(n, &unique)
}

fn pair_list() -> impl Strategy<Value = Vec<PredictionPair>> {
    prop::collection::vec((0u32..6, 0u32..12, rating(), 1.0f64..=5.0), 1..60).prop_map(|v| {
        v.into_iter()
            .map(|(c, t, actual, predicted)| PredictionPair {
                context: promptrec::PromptId(c),
                target: promptrec::PromptId(t),
                actual,
                predicted,
            })
            .collect()
    })
}

/// Straightforward counting: for each context, sort its pairs, walk the
/// first `top_n`, and tally with plain boolean logic.
fn naive_counts(pairs: &[PredictionPair], top_n: usize, t: f64, all_top_n: bool) -> (u64, u64, u64) {
    let mut by: BTreeMap<u32, Vec<PredictionPair>> = BTreeMap::new();
    for p in pairs {
        by.entry(p.context.0).or_default().push(*p);
    }
    let (mut tp, mut fp, mut relevant) = (0, 0, 0);
    for list in by.values_mut() {
        list.sort_by(|a, b| b.predicted.partial_cmp(&a.predicted).unwrap().then(a.target.0.cmp(&b.target.0)));
        for (i, p) in list.iter().enumerate() {
            if p.actual >= t {
                relevant += 1;
            }
            if i >= top_n {
                continue;
            }
            if p.predicted >= t && p.actual >= t {
                tp += 1;
            } else if p.predicted >= t || all_top_n {
                fp += 1;
            }
        }
    }
    (tp, fp, relevant - tp)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn correlation_is_symmetric_and_bounded(xs in prop::collection::vec((rating(), rating()), 2..20)) {
        let swapped: Vec<(f64, f64)> = xs.iter().map(|&(a, b)| (b, a)).collect();
        let c = correlation(&xs);
        prop_assert_eq!(c, correlation(&swapped));
        if let Some(c) = c {
            prop_assert!((-1.0 - 1e-12..=1.0 + 1e-12).contains(&c));
        }
    }

    #[test]
    fn correlation_ignores_positive_affine_maps(
        xs in prop::collection::vec((rating(), rating()), 3..20),
        scale in 0.5f64..4.0,
        shift in -3.0f64..3.0,
    ) {
        let mapped: Vec<(f64, f64)> = xs.iter().map(|&(a, b)| (a * scale + shift, b)).collect();
        let negated: Vec<(f64, f64)> = xs.iter().map(|&(a, b)| (-a, b)).collect();
        match (correlation(&xs), correlation(&mapped), correlation(&negated)) {
            (Some(c), Some(m), Some(n)) => {
                prop_assert!((c - m).abs() < 1e-9);
                prop_assert!((c + n).abs() < 1e-9);
            }
            (None, _, _) => {}
            other => prop_assert!(false, "definedness changed: {:?}", other),
        }
    }

    #[test]
    fn pearson_symmetric_in_range_and_matches_oracle((n, recs) in records(9, 60)) {
        let d = unique_dataset(n, &recs);
        let m = RatingMatrix::build(&d, DedupPolicy::Mean);
        let oracle = CentsMatrix::from_dataset(&d);
        for a in 0..n {
            for b in 0..n {
                if a == b { continue; }
                let ab = pearson(id(a), id(b), &m, 2).unwrap();
                prop_assert_eq!(ab, pearson(id(b), id(a), &m, 2).unwrap());
                match (ab, oracle.pearson(a, b, 2)) {
                    (Some(g), Some(w)) => {
                        prop_assert!((-1.0..=1.0).contains(&g));
                        prop_assert!((g - w).abs() < 1e-9);
                    }
                    (None, None) => {}
                    other => prop_assert!(false, "({}, {}): {:?}", a, b, other),
                }
            }
        }
    }

    #[test]
    fn predictions_stay_on_scale((n, recs) in records(8, 50), k in 1usize..6) {
        let d = dataset(n, &recs);
        let m = RatingMatrix::build(&d, DedupPolicy::Mean);
        let config = EngineConfig { k_neighbors: k, ..EngineConfig::default() };
        let model = SimilarityModel::build(&m, config, Execution::Sequential).unwrap();
        for c in 0..n {
            for t in 0..n {
                if c == t { continue; }
                let p = predict(&model, &m, id(c), id(t)).unwrap();
                prop_assert!((1.0..=5.0).contains(&p.predicted));
                prop_assert!(p.neighbor_count <= k);
            }
        }
    }

    #[test]
    fn top_n_is_sound_and_threshold_filters_a_prefix(
        (n, recs) in records(10, 70),
        top in 1usize..8,
        t in 1.0f64..5.0,
    ) {
        let d = dataset(n, &recs);
        let m = RatingMatrix::build(&d, DedupPolicy::Mean);
        let model = SimilarityModel::build(&m, EngineConfig::default(), Execution::Sequential).unwrap();
        for c in 0..n {
            let all = recommend_top_n(&model, &m, id(c), top, None).unwrap();
            prop_assert!(all.len() <= top);
            let mut seen = HashSet::new();
            for (i, r) in all.iter().enumerate() {
                prop_assert_eq!(r.rank, i + 1);
                prop_assert!(r.target != id(c));
                prop_assert!(!m.has_rated(id(c), r.target));
                prop_assert!(seen.insert(r.target));
                let direct = predict(&model, &m, id(c), r.target).unwrap();
                prop_assert_eq!(direct.predicted, r.predicted);
                if i > 0 {
                    prop_assert!(all[i - 1].predicted >= r.predicted);
                }
            }
            // everything left out scores no higher than the last entry kept
            if all.len() == top {
                let floor = all[top - 1].predicted;
                for j in 0..n {
                    let jd = id(j);
                    if j == c || m.has_rated(id(c), jd) || seen.contains(&jd) { continue; }
                    prop_assert!(predict(&model, &m, id(c), jd).unwrap().predicted <= floor);
                }
            }
            let gated = recommend_top_n(&model, &m, id(c), top, Some(t)).unwrap();
            let expected: Vec<_> = all.iter().filter(|r| r.predicted >= t).map(|r| r.target).collect();
            prop_assert_eq!(gated.iter().map(|r| r.target).collect::<Vec<_>>(), expected);
            let higher = recommend_top_n(&model, &m, id(c), top, Some(t + 0.5)).unwrap();
            let gated_ids: HashSet<_> = gated.iter().map(|r| r.target).collect();
            prop_assert!(higher.iter().all(|r| gated_ids.contains(&r.target)));
        }
    }

    #[test]
    fn csv_round_trip_preserves_records((n, recs) in records(12, 80)) {
        let d = dataset(n, &recs);
        let mut buf = Vec::new();
        write_dataset(&d, &mut buf).unwrap();
        let back = read_dataset(buf.as_slice()).unwrap();
        prop_assert_eq!(back.records.len(), d.records.len());
        for (a, b) in d.records.iter().zip(&back.records) {
            prop_assert_eq!(d.catalog.text(a.context), back.catalog.text(b.context));
            prop_assert_eq!(d.catalog.text(a.target), back.catalog.text(b.target));
            prop_assert_eq!(a.rating, b.rating);
        }
    }

    #[test]
    fn incremental_matrix_equals_batch((n, recs) in records(10, 60), policy in prop_oneof![
        Just(DedupPolicy::Mean), Just(DedupPolicy::First), Just(DedupPolicy::Last)
    ]) {
        let d = dataset(n, &recs);
        let batch = RatingMatrix::build(&d, policy);
        let mut inc = RatingMatrix::with_catalog(d.catalog.clone(), policy);
        for &(c, t, r) in &recs {
            inc.add_rating(&format!("prompt {c}"), &format!("prompt {t}"), r).unwrap();
        }
        prop_assert_eq!(inc.cell_count(), batch.cell_count());
        prop_assert_eq!(inc.observation_count(), batch.observation_count());
        for c in 0..n {
            for t in 0..n {
                prop_assert_eq!(inc.rating(id(c), id(t)), batch.rating(id(c), id(t)));
            }
        }
        let (gi, gb) = (inc.global_mean().unwrap(), batch.global_mean().unwrap());
        prop_assert!((gi - gb).abs() < 1e-9);
    }

    #[test]
    fn mean_policy_matches_group_by((n, recs) in records(6, 60)) {
        let d = dataset(n, &recs);
        let m = RatingMatrix::build(&d, DedupPolicy::Mean);
        let mut groups: BTreeMap<(usize, usize), Vec<f64>> = BTreeMap::new();
        for &(c, t, r) in &recs {
            groups.entry((c, t)).or_default().push(r);
        }
        prop_assert_eq!(m.cell_count(), groups.len());
        for ((c, t), v) in groups {
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            prop_assert!((m.rating(id(c), id(t)).unwrap() - mean).abs() < 1e-9);
        }
    }

    #[test]
    fn catalog_interning_is_a_bijection(texts in prop::collection::vec("[a-c]{1,3}( [a-c]{1,2})?", 1..30)) {
        let mut d = RatingDataset::new();
        let ids: Vec<_> = texts.iter().map(|t| d.catalog.intern(t).unwrap()).collect();
        for (t, &i) in texts.iter().zip(&ids) {
            prop_assert_eq!(d.catalog.lookup(t), Some(i));
            prop_assert_eq!(d.catalog.key(i), normalize(t));
        }
        let distinct: HashSet<String> = texts.iter().map(|t| normalize(t)).collect();
        prop_assert_eq!(d.catalog.len(), distinct.len());
    }

    #[test]
    fn normalization_is_idempotent(s in "[ a-zA-Z\t]{0,30}") {
        let once = normalize(&s);
        prop_assert_eq!(normalize(&once), once.clone());
        prop_assert!(!once.contains("  "));
        prop_assert_eq!(once.trim(), once.as_str());
    }

    #[test]
    fn cosine_matches_dense_computation(
        docs in prop::collection::vec("(alpha|beta|gamma|delta|model|data|the) (alpha|beta|gamma|delta|model|data)( (gamma|zeta|data))?", 2..10),
        query in "(alpha|beta|zeta|data|model)( (alpha|gamma|the))?",
    ) {
        let stats = CorpusStats::from_documents(docs.iter().map(String::as_str));
        let n = docs.len() as f64;
        let dense = |text: &str| -> BTreeMap<String, f64> {
            let mut tf: BTreeMap<String, f64> = BTreeMap::new();
            for tok in tokenize(text) {
                *tf.entry(tok).or_default() += 1.0;
            }
            tf.into_iter()
                .map(|(term, c)| {
                    let df = docs.iter().filter(|d| tokenize(d).contains(&term)).count() as f64;
                    let idf = ((1.0 + n) / (1.0 + df)).ln() + 1.0;
                    (term, c * idf)
                })
                .collect()
        };
        let (u, v) = (dense(&query), dense(&docs[0]));
        let dot: f64 = u.iter().map(|(k, w)| w * v.get(k).unwrap_or(&0.0)).sum();
        let (nu, nv) = (u.values().map(|w| w * w).sum::<f64>().sqrt(), v.values().map(|w| w * w).sum::<f64>().sqrt());
        let want = if nu == 0.0 || nv == 0.0 { 0.0 } else { (dot / (nu * nv)).clamp(0.0, 1.0) };
        let got = cosine(&vectorize(&query, &stats), &vectorize(&docs[0], &stats));
        prop_assert!((got - want).abs() < 1e-9, "{} vs {}", got, want);
    }

    #[test]
    fn nearest_prompt_is_the_argmax(
        docs in prop::collection::vec("(privacy|fairness|audit|model|email|bias) (privacy|filter|model|email|report|bias)", 1..40),
        query in "(privacy|audit|email|zeta) (model|bias|report)",
    ) {
        let mut d = RatingDataset::new();
        for t in &docs {
            d.catalog.intern(t);
        }
        let stats = CorpusStats::from_documents(d.catalog.iter().map(|p| p.text.as_str()));
        let q = vectorize(&query, &stats);
        let result = nearest_known_prompt(&query, &d.catalog, 0.15);
        if let Some(exact) = d.catalog.lookup(&query) {
            prop_assert_eq!(result.method, MatchMethod::Exact);
            prop_assert_eq!(result.id(), Some(exact));
            return Ok(());
        }
        let best = d.catalog.iter().map(|p| cosine(&q, &vectorize(&p.text, &stats))).fold(0.0, f64::max);
        match result.method {
            MatchMethod::LexicalCosine => {
                prop_assert!((result.score - best).abs() < 1e-12);
                prop_assert!(best >= 0.15);
            }
            MatchMethod::None => prop_assert!(best < 0.15),
            MatchMethod::Exact => prop_assert!(false, "no exact key exists"),
        }
    }

    #[test]
    fn error_metrics_match_naive_and_mae_le_rmse(pairs in pair_list()) {
        let errs: Vec<f64> = pairs.iter().map(|p| p.actual - p.predicted).collect();
        let naive_mae = errs.iter().map(|e| e.abs()).sum::<f64>() / errs.len() as f64;
        let naive_rmse = (errs.iter().map(|e| e * e).sum::<f64>() / errs.len() as f64).sqrt();
        let (m, r) = (mae(&pairs).unwrap(), rmse(&pairs).unwrap());
        prop_assert!((m - naive_mae).abs() < 1e-9);
        prop_assert!((r - naive_rmse).abs() < 1e-9);
        prop_assert!(m <= r + 1e-12);
    }

    #[test]
    fn retrieval_counts_match_naive(pairs in pair_list(), top in 1usize..8, t in 1.0f64..5.0, all in any::<bool>()) {
        let base = if all { PrecisionBase::AllTopN } else { PrecisionBase::Gated };
        let c = retrieval_counts(&pairs, top, t, base).unwrap();
        prop_assert_eq!((c.tp, c.fp, c.fn_), naive_counts(&pairs, top, t, all));
        let (_, p, r) = precision_recall(&pairs, top, t, base, EmptyConvention::One).unwrap();
        let naive_p = if c.tp + c.fp == 0 { 1.0 } else { c.tp as f64 / (c.tp + c.fp) as f64 };
        let naive_r = if c.tp + c.fn_ == 0 { 1.0 } else { c.tp as f64 / (c.tp + c.fn_) as f64 };
        prop_assert!((p - naive_p).abs() < 1e-9 && (r - naive_r).abs() < 1e-9);
        let f = f1(p, r);
        let naive_f = if p + r == 0.0 { 0.0 } else { 2.0 * p * r / (p + r) };
        prop_assert!((f - naive_f).abs() < 1e-9);
    }

    #[test]
    fn true_positives_never_grow_with_threshold(pairs in pair_list(), top in 1usize..8, t in 1.0f64..4.5, step in 0.01f64..1.0) {
        let lo = retrieval_counts(&pairs, top, t, PrecisionBase::Gated).unwrap();
        let hi = retrieval_counts(&pairs, top, (t + step).min(5.0), PrecisionBase::Gated).unwrap();
        prop_assert!(hi.tp <= lo.tp);
        prop_assert!(hi.tp + hi.fn_ <= lo.tp + lo.fn_);
    }

    #[test]
    fn f1_bounds(p in 0.0f64..=1.0, r in 0.0f64..=1.0) {
        let f = f1(p, r);
        prop_assert!((0.0..=1.0).contains(&f));
        prop_assert_eq!(f == 0.0, p == 0.0 || r == 0.0);
        prop_assert!(f <= 2.0 * p.min(r) + 1e-12);
    }

    #[test]
    fn folds_partition_records(n in 2usize..400, k in 2usize..12, seed in any::<u64>()) {
        prop_assume!(n >= k);
        let folds = fold_indices(n, k, seed).unwrap();
        prop_assert_eq!(&folds, &fold_indices(n, k, seed).unwrap());
        let mut all: Vec<usize> = folds.iter().flatten().copied().collect();
        all.sort_unstable();
        prop_assert_eq!(all, (0..n).collect::<Vec<_>>());
        let sizes: Vec<usize> = folds.iter().map(Vec::len).collect();
        prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
    }
}

#[test]
fn equal_errors_make_mae_equal_rmse() {
    let pairs: Vec<PredictionPair> = (0..5)
        .map(|i| PredictionPair {
            context: promptrec::PromptId(i),
            target: promptrec::PromptId(i + 1),
            actual: 4.0,
            predicted: if i % 2 == 0 { 3.5 } else { 4.5 },
        })
        .collect();
    assert!((mae(&pairs).unwrap() - rmse(&pairs).unwrap()).abs() < 1e-12);
}

#[test]
fn raising_the_threshold_can_raise_recall() {
    // Relevance shrinks along with hits, so recall alone is not monotone:
    // at 3.0 one of two relevant pairs is found, at 4.0 the only relevant
    // pair is found.
    let pair = |t, actual, predicted| PredictionPair {
        context: promptrec::PromptId(0),
        target: promptrec::PromptId(t),
        actual,
        predicted,
    };
    let pairs = [pair(1, 5.0, 5.0), pair(2, 3.0, 1.0)];
    let r = |t| {
        precision_recall(&pairs, 10, t, PrecisionBase::Gated, EmptyConvention::One)
            .unwrap()
            .2
    };
    assert_eq!(r(3.0), 0.5);
    assert_eq!(r(4.0), 1.0);
}
