mod common;

use std::fs;

use lc_arena::agents::{
    Agent, AgentConfig, AvgRankAgent, BosAgent, BosConfig, DdqnAgent, DdqnConfig,
    RandSearchAgent, RandSearchConfig,
};
use lc_arena::curvestore::{MetaSplit, Split};
use lc_arena::harness::{
    aggregate, analyze_trajectory, compare_reports, phase_datasets, read_report_json,
    read_trajectory_jsonl, run_ablation, run_episode, run_meta_test, run_meta_train,
    step_function_alc, write_comparison, write_run_outputs, AblationKind, HarnessConfig, Phase,
};
use lc_arena::synthgen::Scenario;
use lc_arena::ArenaError;

use common::{build_md, exact_sum, synthetic};

fn tiny_ddqn(seed: u64) -> DdqnConfig {
    DdqnConfig {
        hidden: vec![8],
        episodes: 6,
        batch_size: 8,
        target_sync: 10,
        seed,
        ..Default::default()
    }
}

/// Three algorithms on one dataset; algorithm 0 leads on validation at the
/// first anchor.
fn three_algo_md() -> lc_arena::curvestore::MetaDataset {
    let split = MetaSplit {
        meta_train: vec![1],
        meta_test: vec![0],
    };
    build_md(&[100.0, 100.0], 3, split, |_, a, s| {
        let top = [0.8, 0.5, 0.3][a];
        let bump = if s == Split::Train { 0.05 } else { 0.0 };
        vec![(1.0, top - 0.2 + bump), (50.0, top + bump)]
    })
}

#[test]
fn avg_rank_plays_one_step() {
    let md = synthetic(6, 4, 2, Scenario::Generic);
    let cfg = HarnessConfig::default();
    let mut agent = AvgRankAgent::new();
    run_meta_train(&mut agent, &md, &cfg).unwrap();
    let report = run_meta_test(&agent, &md, &cfg, &[1, 2]).unwrap();
    let families: Vec<String> = md.algorithms().iter().map(|a| a.family.clone()).collect();
    for traj in &report.trajectories {
        assert_eq!(traj.steps.len(), 1);
        assert_eq!(analyze_trajectory(traj, &families).switch_count, 0);
    }
}

#[test]
fn bos_switches_through_every_probe() {
    let md = three_algo_md();
    let cfg = HarnessConfig::default();
    let mut agent = BosAgent::new(BosConfig::default());
    let traj = run_episode(&mut agent, &md, 0, &cfg, 1, 0).unwrap();
    let algos: Vec<usize> = traj.steps.iter().map(|s| s.algo).collect();
    assert_eq!(algos, vec![0, 1, 2, 0]);
    let summary = analyze_trajectory(&traj, &["sgd".into(), "knn".into(), "sgd".into()]);
    assert_eq!(summary.switch_count, 3);
    assert_eq!(summary.family_occupancy["sgd"], 3);
    assert_eq!(summary.family_occupancy["knn"], 1);
}

#[test]
fn rand_search_averages_its_repeats() {
    let md = synthetic(4, 5, 3, Scenario::Generic);
    let cfg = HarnessConfig::default();
    let agent = RandSearchAgent::new(RandSearchConfig::default());
    let report = run_meta_test(&agent, &md, &cfg, &[7]).unwrap();
    let n_test = md.split().meta_test.len();
    assert_eq!(report.entries.len(), n_test);
    assert_eq!(report.trajectories.len(), 5 * n_test);
    for e in &report.entries {
        let alcs: Vec<f64> = report
            .trajectories
            .iter()
            .filter(|t| t.dataset == e.dataset)
            .map(|t| t.alc)
            .collect();
        assert_eq!(alcs.len(), 5);
        assert!((e.alc - alcs.iter().sum::<f64>() / 5.0).abs() < 1e-12);
    }
}

#[test]
fn episode_metrics_are_consistent() {
    let md = synthetic(6, 6, 4, Scenario::FrequentCrossing);
    let cfg = HarnessConfig::default();
    let mut ranked = AvgRankAgent::new();
    run_meta_train(&mut ranked, &md, &cfg).unwrap();
    let agents: Vec<Box<dyn Agent>> = vec![
        Box::new(ranked),
        AgentConfig::from_name("bos").unwrap().build(),
        AgentConfig::from_name("rand_search").unwrap().build(),
        AgentConfig::from_name("freeze_thaw").unwrap().build(),
    ];
    for agent in &agents {
        let report = run_meta_test(agent.as_ref(), &md, &cfg, &[1, 2]).unwrap();
        for traj in &report.trajectories {
            assert!((-1.0..=1.0).contains(&traj.alc), "{}: {}", traj.agent, traj.alc);
            let max_test = traj
                .steps
                .iter()
                .map(|s| s.predicted_test)
                .fold(f64::NEG_INFINITY, f64::max);
            assert_eq!(traj.fixed_time, max_test);
            assert!((traj.alc - step_function_alc(traj)).abs() < 1e-9);
            assert_eq!(exact_sum(&traj.steps.iter().map(|s| s.charged).collect::<Vec<_>>()), traj.total_budget);
        }
        let again = aggregate(&report.entries);
        assert!((again.alc.worst_mean - report.aggregate.alc.worst_mean).abs() < 1e-12);
        assert!((again.fixed_time.overall_mean - report.aggregate.fixed_time.overall_mean).abs() < 1e-12);
        // worst seed by hand
        let per_seed: Vec<f64> = [1u64, 2]
            .iter()
            .map(|&s| {
                let v: Vec<f64> = report.entries.iter().filter(|e| e.seed == s).map(|e| e.alc).collect();
                v.iter().sum::<f64>() / v.len() as f64
            })
            .collect();
        let worst = per_seed.iter().cloned().fold(f64::INFINITY, f64::min);
        assert!((report.aggregate.alc.worst_mean - worst).abs() < 1e-12);
    }
}

#[test]
fn meta_train_requires_datasets() {
    let md = synthetic(3, 3, 1, Scenario::Generic);
    let empty = md
        .with_split(MetaSplit {
            meta_train: vec![],
            meta_test: vec![0, 1, 2],
        })
        .unwrap();
    let mut agent = AvgRankAgent::new();
    assert!(run_meta_train(&mut agent, &empty, &HarnessConfig::default()).is_err());
}

#[test]
fn untrained_avg_rank_refused() {
    let md = synthetic(3, 3, 1, Scenario::Generic);
    let err = run_meta_test(&AvgRankAgent::new(), &md, &HarnessConfig::default(), &[1]).unwrap_err();
    assert!(matches!(err, ArenaError::NotMetaTrained(_)));
}

#[test]
fn phases_partition_meta_test() {
    let md = synthetic(9, 2, 1, Scenario::Generic);
    let all = phase_datasets(&md, Phase::All);
    let mut joined = phase_datasets(&md, Phase::Feedback);
    joined.extend(phase_datasets(&md, Phase::Final));
    assert_eq!(all, joined);
    assert_eq!(all, md.split().meta_test);
}

#[test]
fn ablation_schedules_match() {
    let md = synthetic(6, 4, 5, Scenario::Generic);
    let cfg = HarnessConfig::default();
    for kind in [AblationKind::NoMetaTrain, AblationKind::LastPointOnly] {
        let rep = run_ablation(kind, &tiny_ddqn(3), &md, &cfg, &[1, 2]).unwrap();
        assert_eq!(rep.full.schedule(), rep.ablated.schedule());
        assert!(rep.paired_margin().is_finite());
        assert_eq!(rep.ablated.meta_trained, kind == AblationKind::LastPointOnly);
    }
}

#[test]
fn parallel_matches_serial() {
    let md = synthetic(8, 4, 6, Scenario::Generic);
    let mut agent = DdqnAgent::new(tiny_ddqn(1));
    let serial = HarnessConfig::default();
    run_meta_train(&mut agent, &md, &serial).unwrap();
    let a = run_meta_test(&agent, &md, &serial, &[1, 2, 3]).unwrap();
    let parallel = HarnessConfig {
        workers: 4,
        ..Default::default()
    };
    let b = run_meta_test(&agent, &md, &parallel, &[1, 2, 3]).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.trajectories, b.trajectories);
}

#[test]
fn run_outputs_written() {
    let md = synthetic(4, 3, 8, Scenario::Generic);
    let report = run_meta_test(
        AgentConfig::from_name("bos").unwrap().build().as_ref(),
        &md,
        &HarnessConfig::default(),
        &[1, 2],
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    write_run_outputs(&report, dir.path()).unwrap();

    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("agent,dataset,seed,alc,fixed_time"));
    assert_eq!(lines.count(), report.entries.len());

    let back = read_report_json(&dir.path().join("report.json")).unwrap();
    assert_eq!(back.entries, report.entries);
    assert_eq!(back.aggregate, report.aggregate);

    let d = report.entries[0].dataset;
    let traj_path = dir.path().join(format!("trajectories/bos_d{d}_s1.jsonl"));
    let trajs = read_trajectory_jsonl(&traj_path).unwrap();
    let original: Vec<_> = report
        .trajectories
        .iter()
        .filter(|t| t.dataset == d && t.seed == 1)
        .cloned()
        .collect();
    assert_eq!(trajs.len(), original.len());
    for (x, y) in trajs.iter().zip(&original) {
        assert_eq!(x.steps, y.steps);
        assert_eq!(x.fixed_time, y.fixed_time);
        assert!((x.alc - y.alc).abs() < 1e-12);
    }
    let first_line = fs::read_to_string(&traj_path).unwrap();
    let row: serde_json::Value = serde_json::from_str(first_line.lines().next().unwrap()).unwrap();
    for key in ["t", "algo", "delta", "charged", "t_tilde", "reward", "revealed_train", "revealed_valid", "predicted_best"] {
        assert!(row.get(key).is_some(), "missing {key}");
    }

    let plot = fs::read_to_string(dir.path().join(format!("plots/anytime_bos_d{d}_s1.csv"))).unwrap();
    assert!(plot.starts_with("x,y\n0,"));
    assert!(dir.path().join("plots/alc_by_dataset_bos.csv").exists());
}

#[test]
fn comparison_written() {
    let md = synthetic(4, 3, 8, Scenario::Generic);
    let cfg = HarnessConfig::default();
    let reports: Vec<_> = ["bos", "rand_search"]
        .iter()
        .map(|n| run_meta_test(AgentConfig::from_name(n).unwrap().build().as_ref(), &md, &cfg, &[1]).unwrap())
        .collect();
    let table = compare_reports(&reports).unwrap();
    assert_eq!(table.rows.len(), 2);
    let pair = table.wins.iter().find(|w| w.agent == "bos").unwrap();
    let back = table
        .wins
        .iter()
        .find(|w| w.agent == "rand_search")
        .unwrap();
    assert!(pair.wins + back.wins <= pair.datasets);

    let dir = tempfile::tempdir().unwrap();
    write_comparison(&table, dir.path()).unwrap();
    let csv = fs::read_to_string(dir.path().join("comparison.csv")).unwrap();
    assert!(csv.starts_with(
        "agent,meta_trained,alc_worst_mean,alc_std,fixed_time_worst_mean,fixed_time_std,alc_overall_mean\n"
    ));
    for f in ["wins.csv", "comparison.json", "plots/bar_alc.csv", "plots/bar_fixed_time.csv"] {
        assert!(dir.path().join(f).exists(), "{f}");
    }
    assert!(compare_reports(&[]).is_err());
}
