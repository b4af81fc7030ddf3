mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::Rng;
use xalign_core::corpus::{LanguageNames, LanguageTag, ParallelPair};
use xalign_core::instructgen::{
    count_by_objective, generate_dataset, interleave_replay, make_xss, perturb, BatchSource, GenerateOptions,
    Objective, PerturbationConfig, ReplayMode, ReplayPlan, XSS_NEGATIVE, XSS_POSITIVE,
};
use xalign_core::rng::{sample_indices, seeded};

use common::rng;

fn tag(code: &str) -> LanguageTag {
    LanguageTag::new(code).unwrap()
}

fn pair(id: &str, src: &str, tgt: &str) -> ParallelPair {
    ParallelPair {
        id: id.into(),
        src_lang: tag("eng"),
        tgt_lang: tag("ind"),
        src_text: src.into(),
        tgt_text: tgt.into(),
    }
}

fn corpus(n: usize) -> Vec<ParallelPair> {
    (0..n)
        .map(|i| {
            pair(
                &format!("p{i:05}"),
                &format!("the word {i} is here"),
                &format!("kata {i} ada di sini"),
            )
        })
        .collect()
}

#[test]
fn every_objective_yields_unique_ids() {
    let samples = generate_dataset(
        &corpus(2000),
        &GenerateOptions::new(Objective::ALL.to_vec(), 1),
        &LanguageNames::default(),
    )
    .unwrap();
    assert_eq!(samples.len(), 16000);
    let ids: BTreeSet<&str> = samples.iter().map(|s| s.id.as_str()).collect();
    assert_eq!(ids.len(), 16000);
    let counts = count_by_objective(&samples);
    assert!(counts.values().all(|&c| c == 4000), "{counts:?}");
}

#[test]
fn xss_is_balanced_with_genuine_negatives() {
    let pairs = corpus(100);
    let by_id: BTreeMap<&str, &ParallelPair> = pairs.iter().map(|p| (p.id.as_str(), p)).collect();
    let samples = generate_dataset(
        &pairs,
        &GenerateOptions::new(vec![Objective::Xss], 9),
        &LanguageNames::default(),
    )
    .unwrap();
    let (pos, neg): (Vec<_>, Vec<_>) = samples.iter().partition(|s| s.target == XSS_POSITIVE);
    assert_eq!((pos.len(), neg.len()), (100, 100));
    for s in neg {
        assert_eq!(s.target, XSS_NEGATIVE);
        let own = by_id[s.meta.pair_id.as_str()];
        let other = by_id[s.meta.distractor_id.as_deref().unwrap()];
        assert_ne!(other.tgt_text, own.tgt_text);
        assert!(s.prompt.contains(&other.tgt_text));
    }
    for s in pos {
        assert!(s.prompt.contains(&by_id[s.meta.pair_id.as_str()].tgt_text));
        assert!(s.meta.distractor_id.is_none());
    }
}

#[test]
fn prompts_rerender_from_their_metadata() {
    let samples = generate_dataset(
        &corpus(30),
        &GenerateOptions::new(Objective::ALL.to_vec(), 5),
        &LanguageNames::default(),
    )
    .unwrap();
    for s in &samples {
        assert_eq!(s.rerender().unwrap(), s.prompt, "{}", s.id);
        let json = serde_json::to_string(s).unwrap();
        let back: xalign_core::instructgen::InstructSample = serde_json::from_str(&json).unwrap();
        assert_eq!(&back, s);
    }
}

#[test]
fn generation_is_reproducible_and_seed_sensitive() {
    let opts = GenerateOptions::new(vec![Objective::Tlm, Objective::Mlm], 11);
    let names = LanguageNames::default();
    let a = generate_dataset(&corpus(50), &opts, &names).unwrap();
    let b = generate_dataset(&corpus(50), &opts, &names).unwrap();
    assert_eq!(a, b);
    let c = generate_dataset(
        &corpus(50),
        &GenerateOptions::new(vec![Objective::Tlm, Objective::Mlm], 12),
        &names,
    )
    .unwrap();
    assert_ne!(a, c);
}

#[test]
fn two_pair_corpus_uses_the_other_pair_as_distractor() {
    let pairs = [pair("a", "one", "satu"), pair("b", "two", "dua")];
    for seed in 0..20 {
        let (_, neg) = make_xss(&pairs[0], &pairs, 0, seed, &LanguageNames::default()).unwrap();
        assert_eq!(neg.meta.distractor_id.as_deref(), Some("b"));
    }
    let same = [pair("a", "one", "sama"), pair("b", "two", "sama")];
    assert!(make_xss(&same[0], &same, 0, 0, &LanguageNames::default()).is_err());
    let opts = GenerateOptions::new(vec![Objective::Xss], 0);
    assert!(generate_dataset(&same, &opts, &LanguageNames::default()).is_err());
}

/// ceil(ratio * n) for ratio = pct / 100, kept below n.
fn expected_masks(pct: usize, n: usize) -> usize {
    (pct * n).div_ceil(100).min(n - 1)
}

proptest! {
    #[test]
    fn perturbation_masks_a_seeded_uniform_subset(n in 1usize..80, pct in 1usize..100, seed in any::<u64>()) {
        let tokens: Vec<String> = (0..n).map(|i| format!("w{i}")).collect();
        let cfg = PerturbationConfig { mask_ratio: pct as f64 / 100.0, mask_token: "<mask>".into(), seed };
        let out = perturb(&tokens, &cfg).unwrap();
        let m = expected_masks(pct, n);

        // Independent partial Fisher-Yates on the same stream.
        let mut r = seeded(seed);
        let mut slots: Vec<usize> = (0..n).collect();
        for i in 0..m {
            let j = r.gen_range(i..n);
            slots.swap(i, j);
        }
        let chosen: BTreeSet<usize> = slots[..m].iter().copied().collect();
        for (i, tok) in out.iter().enumerate() {
            if chosen.contains(&i) {
                prop_assert_eq!(tok, "<mask>");
            } else {
                prop_assert_eq!(tok, &tokens[i]);
            }
        }
    }
}

#[test]
fn default_ratio_mask_counts() {
    let cfg = PerturbationConfig::new(0);
    let got: Vec<usize> = [1, 2, 6, 7, 20, 21, 100].iter().map(|&n| cfg.mask_count(n)).collect();
    assert_eq!(got, [0, 1, 1, 2, 3, 4, 15]);
    for bad in [0.0, 1.0, -0.5] {
        let cfg = PerturbationConfig {
            mask_ratio: bad,
            ..PerturbationConfig::new(0)
        };
        assert!(perturb(&["a", "b"], &cfg).is_err());
    }
}

#[test]
fn small_replay_enumeration() {
    let old: Vec<u32> = (0..10).collect();
    let new: Vec<u32> = (0..10).collect();
    let plan = ReplayPlan { r: 6, seed: 4 };
    let batches = interleave_replay(&old, &new, &ReplayMode::Replay(plan), 4, 1).unwrap();
    assert_eq!(batches.len(), 5);
    let replayed: BTreeSet<usize> = sample_indices(&mut seeded(4), 10, 6).into_iter().collect();
    let mut new_seen = Vec::new();
    let mut old_seen = Vec::new();
    for b in &batches {
        assert_eq!(b.len(), 4);
        for (pos, item) in b.iter().enumerate() {
            let want = if pos % 2 == 0 {
                BatchSource::Old
            } else {
                BatchSource::New
            };
            assert_eq!(item.source, want);
            if want == BatchSource::New {
                new_seen.push(item.index)
            } else {
                old_seen.push(item.index)
            }
        }
    }
    new_seen.sort();
    assert_eq!(new_seen, (0..10).collect::<Vec<_>>());
    let first_pass: BTreeSet<usize> = old_seen[..6].iter().copied().collect();
    assert_eq!(first_pass, replayed);
    assert!(old_seen.iter().all(|i| replayed.contains(i)));
}

#[test]
fn replay_rejects_invalid_plans() {
    let data = [0u8; 8];
    let replay = |r| ReplayMode::Replay(ReplayPlan { r, seed: 0 });
    assert!(interleave_replay(&data, &data, &replay(4), 3, 1).is_err());
    assert!(interleave_replay(&data, &data, &replay(0), 4, 1).is_err());
    assert!(interleave_replay(&data, &data, &replay(9), 4, 1).is_err());
    assert!(interleave_replay(&data, &data[..0], &replay(2), 4, 1).is_err());
    let plain = interleave_replay(&data, &data, &ReplayMode::NoReplay { seed: 0 }, 3, 2).unwrap();
    assert_eq!(plain.len(), 6);
    assert!(plain.iter().flatten().all(|b| b.source == BatchSource::New));
}

proptest! {
    #[test]
    fn replay_batches_alternate_and_cover_each_epoch(
        n_old in 1usize..40,
        half in 1usize..6,
        per_epoch in 1usize..8,
        epochs in 1usize..4,
        seed in any::<u64>(),
    ) {
        let r = rng(seed).gen_range(1..=n_old);
        let n_new = half * per_epoch;
        let old = vec![(); n_old];
        let new = vec![(); n_new];
        let batches = interleave_replay(&old, &new, &ReplayMode::Replay(ReplayPlan { r, seed }), 2 * half, epochs).unwrap();
        prop_assert_eq!(batches.len(), per_epoch * epochs);
        let replayed: BTreeSet<usize> = sample_indices(&mut seeded(seed), n_old, r).into_iter().collect();
        for epoch in batches.chunks(per_epoch) {
            let mut seen: Vec<usize> = Vec::new();
            for b in epoch {
                for (pos, item) in b.iter().enumerate() {
                    if pos % 2 == 0 {
                        prop_assert_eq!(item.source, BatchSource::Old);
                        prop_assert!(replayed.contains(&item.index));
                    } else {
                        prop_assert_eq!(item.source, BatchSource::New);
                        seen.push(item.index);
                    }
                }
            }
            seen.sort();
            prop_assert_eq!(seen, (0..n_new).collect::<Vec<_>>());
        }
    }
}
