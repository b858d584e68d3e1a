mod common;

use lc_arena::curvestore::{
    CurveKey, CurveKind, LearningCurve, MetaDataset, MetaSplit, Split,
};
use lc_arena::env::{
    accumulated_alc, normalized_time, reward, write_step_log, Action, Env, RevealMode,
    RewardConfig,
};
use lc_arena::synthgen::{generate, GenSpec, Scenario};
use lc_arena::ArenaError;
use proptest::prelude::*;

use common::{assert_no_test_leak, build_md, exact_sum, synthetic, test_only_values};

fn one_algo_md() -> MetaDataset {
    build_md(&[2.0], 1, MetaSplit { meta_train: vec![], meta_test: vec![0] }, |_, _, s| match s {
        Split::Test => vec![(1.0, 0.6)],
        _ => vec![(1.0, 0.5)],
    })
}

#[test]
fn normalized_time_examples() {
    assert_eq!(normalized_time(0.0, 100.0, 20.0), 0.0);
    assert_eq!(normalized_time(100.0, 100.0, 20.0), 1.0);
    let v = normalized_time(50.0, 100.0, 20.0);
    assert!((v - 3.5f64.ln() / 6f64.ln()).abs() < 1e-15);
    assert!((v - 0.699_180_3).abs() < 1e-7);
}

#[test]
fn reward_examples() {
    assert_eq!(reward(0.5, 0.5, 0.3), 0.0);
    assert!((reward(0.5, 0.7, 0.25) - 0.15).abs() < 1e-15);
    assert!((reward(0.7, 0.6, 0.5) + 0.05).abs() < 1e-15);
    assert_eq!(accumulated_alc(&[]), 0.0);
    assert!((accumulated_alc(&[0.5, 0.15]) - 0.65).abs() < 1e-15);
}

#[test]
fn two_step_hand_episode() {
    let md = one_algo_md();
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    let s1 = env.step(Action::new(0, 1.0, 0)).unwrap();
    let tt = 2f64.ln() / 3f64.ln();
    assert!((s1.observation.t_tilde - tt).abs() < 1e-15);
    assert!((s1.reward - 0.6 * (1.0 - tt)).abs() < 1e-15);
    assert!((s1.reward - 0.221_442).abs() < 1e-6);
    assert!(!s1.done);
    let s2 = env.step(Action::new(0, 1.0, 0)).unwrap();
    assert_eq!(s2.observation.t_tilde, 1.0);
    assert_eq!(s2.reward, 0.0);
    assert!(s2.done);
    assert!(matches!(env.step(Action::new(0, 1.0, 0)), Err(ArenaError::EpisodeDone)));
}

#[test]
fn overshoot_is_truncated() {
    let md = one_algo_md();
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    env.step(Action::new(0, 0.5, 0)).unwrap();
    let s = env.step(Action::new(0, 100.0, 0)).unwrap();
    assert_eq!(s.charged, 1.5);
    assert!(s.done);
    assert_eq!(s.observation.remaining_budget, 0.0);
}

#[test]
fn invalid_actions_rejected() {
    let md = one_algo_md();
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    for a in [
        Action::new(1, 1.0, 0),
        Action::new(0, 1.0, 4),
        Action::new(0, 0.0, 0),
        Action::new(0, -1.0, 0),
        Action::new(0, f64::NAN, 0),
    ] {
        assert!(matches!(env.step(a), Err(ArenaError::InvalidAction(_))), "{a:?}");
    }
    assert!(matches!(
        Env::new(&md, 9, cfg, RevealMode::FullCurve),
        Err(ArenaError::UnknownDataset(9))
    ));
    assert!(RewardConfig::new(0.0, 0.0).is_err());
}

#[test]
fn reset_is_clean_and_repeatable() {
    let md = synthetic(2, 3, 4, Scenario::Generic);
    let cfg = RewardConfig::for_dataset(&md, 0, None).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    let first = env.reset();
    assert_eq!(first.spent.iter().sum::<f64>(), 0.0);
    assert_eq!(first.remaining_budget, md.dataset(0).unwrap().total_budget);
    assert!(first.revealed.iter().all(Vec::is_empty));
    assert!(!first.meta_features.is_empty());
    assert_eq!(first.algorithms.len(), 3);
    env.step(Action::new(1, 3.0, 1)).unwrap();
    assert_eq!(env.reset(), first);
}

#[test]
fn prediction_getting_worse_is_penalized() {
    // algorithm 1 looks best early, algorithm 0 ends best
    let md = build_md(&[10.0], 2, MetaSplit { meta_train: vec![], meta_test: vec![0] }, |_, a, _| {
        if a == 0 {
            vec![(1.0, 0.8)]
        } else {
            vec![(1.0, 0.3)]
        }
    });
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    env.step(Action::new(0, 1.0, 0)).unwrap();
    let s = env.step(Action::new(1, 1.0, 1)).unwrap();
    assert!(s.reward < 0.0);
    let expected = (0.3 - 0.8) * (1.0 - normalized_time(2.0, 10.0, 1.0));
    assert!((s.reward - expected).abs() < 1e-15);
}

#[test]
fn untrained_prediction_scores_baseline() {
    let md = one_algo_md();
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    let s = env.step(Action::new(0, 0.5, 0)).unwrap();
    assert_eq!(s.reward, 0.0);
    assert_eq!(s.observation.revealed[0][0].valid, 0.0);
}

#[test]
fn last_point_only_reveals_final_anchor() {
    let md = synthetic(1, 2, 9, Scenario::Generic);
    let cfg = RewardConfig::for_dataset(&md, 0, None).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::LastPointOnly).unwrap();
    env.reset();
    let s = env.step(Action::new(1, 0.5, 1)).unwrap();
    let p = s.observation.revealed[1][0];
    assert_eq!(p.valid, md.curve(0, 1, Split::Valid).last().score);
    assert_eq!(p.train, md.curve(0, 1, Split::Train).last().score);
    assert_eq!(s.charged, 0.5);
}

fn size_md() -> MetaDataset {
    let md = generate(&GenSpec {
        n_datasets: 1,
        n_algorithms: 2,
        curve_kind: CurveKind::SizeIndexed,
        anchors_per_curve: 10,
        seed: 2,
        ..Default::default()
    })
    .unwrap();
    assert_eq!(md.curve_kind(), CurveKind::SizeIndexed);
    md
}

#[test]
fn size_indexed_requests_snap_to_grid() {
    let md = size_md();
    let grid: Vec<f64> = md.curve(0, 0, Split::Valid).anchors().iter().map(|a| a.cost).collect();
    let cfg = RewardConfig::for_dataset(&md, 0, None).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    // between the third and fourth anchor: snapped down to the third
    let s = env.step(Action::new(0, (grid[2] + grid[3]) / 2.0, 0)).unwrap();
    assert_eq!(s.observation.spent[0], grid[2]);
    assert!((s.charged - grid[2]).abs() < 1e-12);
    // below one grid step: charged as requested, left-hold value revealed
    let tiny = md.curve(0, 1, Split::Valid).first().cost / 4.0;
    let s = env.step(Action::new(1, tiny, 0)).unwrap();
    assert!((s.charged - tiny).abs() < 1e-12);
    assert_eq!(s.observation.revealed[1][0].valid, md.baseline_score());
}

#[test]
fn step_log_has_documented_fields() {
    let md = one_algo_md();
    let cfg = RewardConfig::new(1.0, 0.0).unwrap();
    let mut env = Env::new(&md, 0, cfg, RevealMode::FullCurve).unwrap();
    env.reset();
    env.step(Action::new(0, 1.0, 0)).unwrap();
    env.step(Action::new(0, 1.0, 0)).unwrap();
    let mut buf = Vec::new();
    write_step_log(env.records(), &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    let v: serde_json::Value = serde_json::from_str(lines[0]).unwrap();
    for key in ["t", "algo", "delta", "charged", "t_tilde", "reward", "revealed_train", "revealed_valid", "predicted_best"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
}

#[test]
fn hand_built_curves_reject_foreign_grid() {
    let md = size_md();
    let mut parts = md.to_parts();
    parts.curves.insert(
        CurveKey::new(0, 0, Split::Test),
        LearningCurve::from_pairs(&[(1.0, 0.2), (2.0, 0.3)], CurveKind::SizeIndexed).unwrap(),
    );
    assert!(MetaDataset::from_parts(parts).is_err());
}

/// Rectangles of the predicted-best test score over normalized time.
fn integral_oracle(t_tildes: &[f64], tests: &[f64], baseline: f64) -> f64 {
    let mut area = 0.0;
    for k in 0..t_tildes.len() {
        let end = if k + 1 < t_tildes.len() { t_tildes[k + 1] } else { 1.0 };
        area += (tests[k] - baseline) * (end - t_tildes[k]);
    }
    area
}

fn arb_actions() -> impl Strategy<Value = Vec<(usize, f64, usize)>> {
    prop::collection::vec((0usize..4, 0.001f64..0.4, 0usize..4), 1..40)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn episode_invariants(seed in 0u64..1000, dataset in 0usize..3, kind in 0u8..2, actions in arb_actions()) {
        let md = generate(&GenSpec {
            n_datasets: 3,
            n_algorithms: 4,
            curve_kind: if kind == 0 { CurveKind::TimeIndexed } else { CurveKind::SizeIndexed },
            seed,
            ..Default::default()
        }).unwrap();
        let forbidden = test_only_values(&md);
        let total = md.dataset(dataset).unwrap().total_budget;
        let cfg = RewardConfig::for_dataset(&md, dataset, None).unwrap();
        let mut env = Env::new(&md, dataset, cfg, RevealMode::FullCurve).unwrap();
        let mut obs = env.reset();
        assert_no_test_leak(&serde_json::to_value(&obs).unwrap(), &forbidden);

        let mut charged = Vec::new();
        let mut rewards = Vec::new();
        let mut results = Vec::new();
        let mut k = 0;
        // cycle through the actions until the budget runs out
        while !env.is_done() {
            let (a, frac, p) = actions[k % actions.len()];
            k += 1;
            let action = Action::new(a, frac * total, p);
            let res = env.step(action).unwrap();
            prop_assert!(res.charged >= 0.0);
            prop_assert!(res.observation.t_tilde >= 0.0 && res.observation.t_tilde <= 1.0);
            if res.charged > 0.0 && !res.done {
                prop_assert!(res.observation.t_tilde > obs.t_tilde);
            }
            prop_assert!(res.observation.t_tilde >= obs.t_tilde);
            prop_assert_eq!(res.done, res.observation.remaining_budget == 0.0);
            for j in 0..4 {
                let before = &obs.revealed[j];
                let after = &res.observation.revealed[j];
                prop_assert!(after.len() >= before.len());
                prop_assert_eq!(&after[..before.len()], &before[..]);
            }
            assert_no_test_leak(&serde_json::to_value(&res.observation).unwrap(), &forbidden);
            charged.push(res.charged);
            rewards.push(res.reward);
            obs = res.observation.clone();
            results.push((action, res));
        }
        prop_assert_eq!(exact_sum(&charged), total);

        let t_tildes: Vec<f64> = env.records().iter().map(|r| r.t_tilde).collect();
        let oracle = integral_oracle(&t_tildes, env.predicted_test_trace(), md.baseline_score());
        prop_assert!((accumulated_alc(&rewards) - oracle).abs() < 1e-12);

        // replaying the same actions reproduces every result
        env.reset();
        for (action, res) in &results {
            prop_assert_eq!(&env.step(*action).unwrap(), res);
        }
    }
}
