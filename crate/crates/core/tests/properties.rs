use std::collections::BTreeMap;

use hemoprior::io::{
    decode_image, encode_png, parse_predictions, write_predictions, DumpFormat, PredictionRecord,
    PredictionSet, RgbFrame, ScoreKind,
};
use hemoprior::metrics::{auc_ovr, evaluate, ConfusionMatrix, EvalOptions};
use hemoprior::prior::{
    adaptive_avg_pool, blood_probability_v1, blood_probability_v2, conv2d,
    expand_first_conv_weights, hemoglobin_index, percentile_clip_normalize, radial_fluence,
    ChannelTensor, ConvWeights, PercentileMethod, ScalarMap,
};
use hemoprior::split::{
    greedy_video_split, validate_split, DatasetManifest, FrameEntry, SplitRatios, VideoEntry,
};
use hemoprior::stats::{
    bonferroni, bootstrap_ci, cross_seed_aggregate, delong_paired, mcnemar, BootstrapConfig,
    PerSeed, Statistic,
};
use hemoprior::{ClassSet, NUM_CLASSES};
use proptest::prelude::*;

fn scores_and_labels(max_n: usize) -> impl Strategy<Value = (Vec<f64>, Vec<bool>)> {
    (2..=max_n)
        .prop_flat_map(|n| {
            (
                prop::collection::vec(-50i32..50, n),
                prop::collection::vec(any::<bool>(), n),
            )
        })
        .prop_map(|(s, l)| (s.into_iter().map(|v| f64::from(v) / 10.0).collect(), l))
        .prop_filter("both classes present", |(_, l)| {
            l.iter().any(|&x| x) && l.iter().any(|&x| !x)
        })
}

fn tie_free(scores: &[f64]) -> Vec<f64> {
    // index-dependent jitter smaller than the 0.1 score grid
    scores
        .iter()
        .enumerate()
        .map(|(i, s)| s + i as f64 * 1e-6)
        .collect()
}

fn prediction_set(max_n: usize) -> impl Strategy<Value = PredictionSet> {
    prop::collection::vec(
        (
            0..NUM_CLASSES,
            prop::collection::vec(-8.0f64..8.0, NUM_CLASSES),
        ),
        1..=max_n,
    )
    .prop_map(|rows| {
        let records = rows
            .into_iter()
            .enumerate()
            .map(|(i, (label, s))| PredictionRecord {
                frame_id: format!("frame_{i:04}"),
                video_id: format!("vid{}", i % 5),
                true_label: label,
                scores: s.try_into().unwrap(),
            })
            .collect();
        PredictionSet::new(records, ScoreKind::Logits).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn auc_invariant_under_increasing_transforms((s, l) in scores_and_labels(120)) {
        let base = auc_ovr(&s, &l).unwrap();
        let affine: Vec<f64> = s.iter().map(|v| 3.0 * v - 7.0).collect();
        let exp: Vec<f64> = s.iter().map(|v| v.exp()).collect();
        prop_assert_eq!(auc_ovr(&affine, &l).unwrap(), base);
        prop_assert_eq!(auc_ovr(&exp, &l).unwrap(), base);
    }

    #[test]
    fn auc_of_negated_scores_is_complement((s, l) in scores_and_labels(120)) {
        let s = tie_free(&s);
        let neg: Vec<f64> = s.iter().map(|v| -v).collect();
        prop_assert_eq!(auc_ovr(&s, &l).unwrap() + auc_ovr(&neg, &l).unwrap(), 1.0);
    }

    #[test]
    fn delong_against_itself_is_null((s, l) in scores_and_labels(120)) {
        let r = delong_paired(&s, &s, &l).unwrap();
        prop_assert_eq!(r.delta, 0.0);
        prop_assert_eq!(r.p_two_sided, 1.0);
    }

    #[test]
    fn delong_aucs_match_auc_ovr((a, l) in scores_and_labels(120), seed in any::<u64>()) {
        let b: Vec<f64> = a.iter().enumerate().map(|(i, v)| v + ((seed >> (i % 60)) & 7) as f64 * 0.1).collect();
        let r = delong_paired(&a, &b, &l).unwrap();
        prop_assert_eq!(r.auc_a, auc_ovr(&a, &l).unwrap());
        prop_assert_eq!(r.auc_b, auc_ovr(&b, &l).unwrap());
    }

    #[test]
    fn mcnemar_is_symmetric(b in 0u64..5000, c in 0u64..5000) {
        let (x, y) = (mcnemar(b, c), mcnemar(c, b));
        prop_assert_eq!(x.chi2, y.chi2);
        prop_assert_eq!(x.p, y.p);
        prop_assert_eq!(x.net, -y.net);
    }

    #[test]
    fn bonferroni_is_monotone(p1 in 0.0f64..=1.0, p2 in 0.0f64..=1.0, m in 2usize..20) {
        let adj = bonferroni(&[p1, p2], m).unwrap();
        if p1 <= p2 {
            prop_assert!(adj[0] <= adj[1]);
        } else {
            prop_assert!(adj[0] >= adj[1]);
        }
    }

    #[test]
    fn prediction_dumps_round_trip(set in prediction_set(40), jsonl in any::<bool>()) {
        let format = if jsonl { DumpFormat::Jsonl } else { DumpFormat::Csv };
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("dump");
        write_predictions(&path, &set, format).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let back = parse_predictions(&text, format, ScoreKind::Logits, "roundtrip").unwrap();
        prop_assert_eq!(back, set);
    }

    #[test]
    fn confusion_counts_and_recall_agree(set in prediction_set(80)) {
        let cm = ConfusionMatrix::from_predictions(&set);
        prop_assert_eq!(cm.total(), set.len() as u64);
        let norm = cm.row_normalized();
        for c in 0..NUM_CLASSES {
            let support = set.records.iter().filter(|r| r.true_label == c).count();
            let hits = set.records.iter().filter(|r| r.true_label == c && r.argmax() == c).count();
            let recall = if support == 0 { 0.0 } else { hits as f64 / support as f64 };
            prop_assert!((norm[c][c] - recall).abs() < 1e-12);
        }
    }

    #[test]
    fn macro_auc_ignores_training_only_classes(set in prediction_set(80), shift in prop::collection::vec(-5.0f64..5.0, 80)) {
        let evaluable = ClassSet::evaluable();
        let before = evaluate(&set, &evaluable, &EvalOptions::default()).unwrap();
        let mut moved = set.clone();
        for (r, d) in moved.records.iter_mut().zip(&shift) {
            for c in (0..NUM_CLASSES).filter(|&c| !evaluable.contains(c)) {
                r.scores[c] = d * (c as f64 + 1.0);
            }
        }
        // Argmax may change, so only the AUC summary is compared.
        let after = evaluate(&moved, &evaluable, &EvalOptions::default()).unwrap();
        prop_assert_eq!(before.macro_auc_evaluable, after.macro_auc_evaluable);
    }

    #[test]
    fn hemoglobin_index_increases_with_red(g in 0.0f64..1.0, b in 0.0f64..1.0, r1 in 0.0f64..1.0, dr in 1e-6f64..1.0) {
        let r2 = (r1 + dr).min(1.0);
        prop_assume!(r2 > r1);
        let frame = RgbFrame::<f64>::new(2, 1, vec![r1, g, b, r2, g, b]).unwrap();
        let h = hemoglobin_index(&frame, 1e-6);
        prop_assert!(h.get(1, 0) > h.get(0, 0));
    }

    #[test]
    fn prior_ranges(w in 2usize..40, h in 2usize..40, seed in any::<u64>()) {
        let mut state = seed | 1;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            (state >> 11) as f64 / (1u64 << 53) as f64
        };
        let frame = RgbFrame::<f64>::new(w, h, (0..w * h * 3).map(|_| next()).collect()).unwrap();
        let phi = radial_fluence::<f64>(w, h, 0.25).unwrap();
        prop_assert!(phi.values().iter().all(|&v| v > 0.0 && v <= 1.0));
        let hn = percentile_clip_normalize(&hemoglobin_index(&frame, 1e-6), 1.0, 99.0, 1e-6, PercentileMethod::Linear).unwrap();
        prop_assert!(hn.values().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let p1 = blood_probability_v1(&hn, &phi, 4.0).unwrap();
        let p2 = blood_probability_v2(&frame, &phi, 6.0, 0.3, 1e-6).unwrap();
        prop_assert!(p1.values().iter().chain(p2.values()).all(|&v| v > 0.0 && v < 1.0));
    }

    #[test]
    fn v1_prior_increases_with_h_norm(a in 0.0f64..1.0, d in 1e-6f64..1.0, phi in 0.01f64..=1.0) {
        let b = (a + d).min(1.0);
        prop_assume!(b > a);
        let hn = ScalarMap::new(2, 1, vec![a, b]).unwrap();
        let p = blood_probability_v1(&hn, &ScalarMap::filled(2, 1, phi), 4.0).unwrap();
        prop_assert!(p.get(1, 0) > p.get(0, 0));
    }

    #[test]
    fn outlier_does_not_move_other_pixels(px in 0usize..100, py in 0usize..100) {
        let ramp = |outlier: bool| ScalarMap::from_fn(100, 100, |x, y| {
            if outlier && (x, y) == (px, py) { 1.4e5 } else { (y * 100 + x) as f64 / 9999.0 }
        });
        let norm = |m: &ScalarMap<f64>| percentile_clip_normalize(m, 1.0, 99.0, 1e-6, PercentileMethod::Linear).unwrap();
        let (clean, dirty) = (norm(&ramp(false)), norm(&ramp(true)));
        for y in 0..100 {
            for x in 0..100 {
                if (x, y) != (px, py) {
                    prop_assert!((clean.get(x, y) - dirty.get(x, y)).abs() < 1e-3);
                }
            }
        }
    }

    #[test]
    fn v2_pivot_gives_half_fluence(r in 0.05f64..1.0, w in 2usize..20, h in 2usize..20) {
        // (r - g) / (r + g) = 0.3 when g = r * 0.7 / 1.3
        let frame = RgbFrame::<f64>::uniform(w, h, [r, r * 0.7 / 1.3, 0.5]).unwrap();
        let phi = radial_fluence::<f64>(w, h, 0.25).unwrap();
        let p = blood_probability_v2(&frame, &phi, 6.0, 0.3, 0.0).unwrap();
        for (pv, fv) in p.values().iter().zip(phi.values()) {
            prop_assert!((pv - 0.5 * fv).abs() < 1e-12);
        }
    }

    #[test]
    fn even_pooling_preserves_mean(oh in 1usize..6, ow in 1usize..6, kh in 1usize..5, kw in 1usize..5, seed in 0u32..1000) {
        let map = ScalarMap::from_fn(ow * kw, oh * kh, |x, y| ((x * 31 + y * 17 + seed as usize) % 64) as f64 / 8.0);
        let pooled = adaptive_avg_pool(&map, oh, ow).unwrap();
        prop_assert!((pooled.mean() - map.mean()).abs() < 1e-12);
    }

    #[test]
    fn zero_init_expansion_is_exact(
        out_c in 1usize..6,
        k in prop::sample::select(vec![1usize, 3, 5]),
        stride in 1usize..3,
        w in prop::collection::vec(-2.0f64..2.0, 5 * 3 * 25),
        x in prop::collection::vec(-100.0f64..100.0, 5 * 12 * 12),
    ) {
        let w3 = ConvWeights::new(out_c, 3, k, w[..out_c * 3 * k * k].to_vec()).unwrap();
        let w5 = expand_first_conv_weights(&w3, 2).unwrap();
        let input = ChannelTensor::new(5, 12, 12, x).unwrap();
        let y5 = conv2d(&input, &w5, stride, k / 2).unwrap();
        let y3 = conv2d(&input.leading_channels(3), &w3, stride, k / 2).unwrap();
        prop_assert_eq!(y5, y3);
    }

    #[test]
    fn png_decode_encode_is_idempotent(w in 1usize..12, h in 1usize..12, px in prop::collection::vec(0u8..=255, 432)) {
        let data: Vec<f64> = px[..w * h * 3].iter().map(|&v| f64::from(v) / 255.0).collect();
        let first = RgbFrame::<f64>::new(w, h, data).unwrap();
        let once = decode_image::<f64>(&encode_png(&first).unwrap()).unwrap();
        let twice = decode_image::<f64>(&encode_png(&once).unwrap()).unwrap();
        prop_assert_eq!(&once, &first);
        prop_assert_eq!(twice, once);
    }
}

#[derive(Debug, Clone)]
struct SmallManifest {
    manifest: DatasetManifest,
}

fn small_manifest() -> impl Strategy<Value = SmallManifest> {
    // video -> list of (class, frame count)
    (1usize..=7)
        .prop_flat_map(|n| {
            prop::collection::vec(prop::collection::vec((0usize..5, 1usize..30), 1..4), n)
        })
        .prop_map(|videos| {
            let videos = videos
                .into_iter()
                .enumerate()
                .map(|(v, classes)| {
                    let mut frames = Vec::new();
                    for (class, count) in classes {
                        for j in 0..count {
                            frames.push(FrameEntry {
                                frame_id: format!("v{v}_c{class}_{j}_{}", frames.len()),
                                class_index: class,
                            });
                        }
                    }
                    VideoEntry {
                        video_id: format!("v{v}"),
                        frames,
                    }
                })
                .collect();
            SmallManifest {
                manifest: DatasetManifest { videos },
            }
        })
}

/// Decides satisfiability of 1a/1b/1c by enumerating all 3^n assignments.
fn satisfiable(m: &DatasetManifest) -> bool {
    let n = m.videos.len();
    let counts = m.source_video_counts();
    let classes: Vec<Vec<usize>> = m
        .videos
        .iter()
        .map(|v| v.classes().into_iter().collect())
        .collect();
    (0..3usize.pow(n as u32)).any(|mut code| {
        let mut cov = [[false; 3]; NUM_CLASSES];
        for cs in &classes {
            let split = code % 3;
            code /= 3;
            for &c in cs {
                cov[c][split] = true;
            }
        }
        // split indices: 0 train, 1 val, 2 test
        (0..NUM_CLASSES).all(|c| {
            (counts[c] < 1 || cov[c][0])
                && (counts[c] < 2 || cov[c][2])
                && (counts[c] < 3 || cov[c][1])
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn split_meets_constraints_whenever_satisfiable(m in small_manifest()) {
        let m = m.manifest;
        let s = greedy_video_split(&m, &SplitRatios::default()).unwrap();
        let report = validate_split(&m, &s).unwrap();
        prop_assert_eq!(report.all_passed(), satisfiable(&m));
        prop_assert_eq!(s.assignment.len(), m.videos.len());
        prop_assert_eq!(s.frame_counts.iter().sum::<usize>(), m.total_frames());
        prop_assert_eq!(greedy_video_split(&m, &SplitRatios::default()).unwrap(), s);
    }
}

#[test]
fn bootstrap_narrows_with_more_data() {
    use rand::{RngExt, SeedableRng};

    let make = |rng: &mut rand_pcg::Pcg64, n: usize| {
        let records = (0..n)
            .map(|i| {
                let label = usize::from(i % 3 == 0);
                let mut scores = [0.0; NUM_CLASSES];
                scores[1] = rng.random_range(-1.0..1.0) + label as f64;
                PredictionRecord {
                    frame_id: format!("f{i}"),
                    video_id: "v".into(),
                    true_label: label,
                    scores,
                }
            })
            .collect();
        PredictionSet::new(records, ScoreKind::Logits).unwrap()
    };
    let mut rng = rand_pcg::Pcg64::seed_from_u64(17);
    let cfg = BootstrapConfig {
        n_resamples: 300,
        ..Default::default()
    };
    let (mut small, mut large) = (0.0, 0.0);
    for trial in 0..20 {
        let cfg = BootstrapConfig {
            seed: trial,
            ..cfg.clone()
        };
        small += bootstrap_ci(&make(&mut rng, 60), Statistic::ClassAuc(1), &cfg)
            .unwrap()
            .width();
        large += bootstrap_ci(&make(&mut rng, 240), Statistic::ClassAuc(1), &cfg)
            .unwrap()
            .width();
    }
    assert!(
        large <= small,
        "mean width 4x data {} vs 1x {}",
        large / 20.0,
        small / 20.0
    );
}

#[test]
fn cross_seed_rows_recomputed_from_inputs() {
    let rows = [
        (41u64, [0.789, 0.777, 0.777]),
        (42, [0.751, 0.797, 0.816]),
        (43, [0.705, 0.742, 0.752]),
        (44, [0.775, 0.822, 0.735]),
        (45, [0.777, 0.780, 0.800]),
        (47, [0.762, 0.780, 0.761]),
    ];
    let arms = ["rgb", "pi", "distill"];
    let per_seed: PerSeed = rows
        .iter()
        .map(|(s, v)| {
            (
                *s,
                arms.iter()
                    .zip(v)
                    .map(|(a, x)| (a.to_string(), *x))
                    .collect::<BTreeMap<_, _>>(),
            )
        })
        .collect();
    let sweep = cross_seed_aggregate(&per_seed, "rgb").unwrap();
    for (k, arm) in arms.iter().enumerate() {
        let xs: Vec<f64> = rows.iter().map(|(_, v)| v[k]).collect();
        let mean = xs.iter().sum::<f64>() / 6.0;
        let sd = (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / 6.0).sqrt();
        assert!((sweep.arms[*arm].mean - mean).abs() < 1e-12);
        assert!((sweep.arms[*arm].sd_population - sd).abs() < 1e-12);
    }
}
