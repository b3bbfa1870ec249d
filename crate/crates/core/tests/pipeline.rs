use std::path::Path;

use rsl_core::pipeline::{
    export_dataset, names, prepare, run_all, run_classify_stage, run_resonance_stage, run_score_stage,
    run_synthesize_stage, verify_report, DataSource, RunConfig, ScoreReport, Stage,
};
use rsl_core::RslError;

fn toy() -> RunConfig {
    RunConfig {
        resonance_epochs: 60,
        classifier_epochs: 40,
        ..RunConfig::default()
    }
}

fn read(dir: &Path, name: &str) -> String {
    std::fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn staged_run_reproduces_full_run() {
    let cfg = toy();
    let dir = tempfile::tempdir().unwrap();
    let (full, staged) = (dir.path().join("full"), dir.path().join("staged"));
    run_all(&cfg, &full).unwrap();
    run_resonance_stage(&cfg, &staged).unwrap();
    run_synthesize_stage(&cfg, &staged).unwrap();
    run_classify_stage(&cfg, &staged).unwrap();
    run_score_stage(&cfg, &staged).unwrap();
    for name in [names::SCORES, names::CANDIDATES, names::SYNTHETIC, names::MODEL, names::REPORT] {
        assert_eq!(read(&full, name), read(&staged, name), "{name}");
    }
}

#[test]
fn synthesize_without_candidates_is_dependency_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = run_synthesize_stage(&toy(), dir.path()).unwrap_err();
    assert_eq!(err.stage, Stage::Synthesize);
    assert!(matches!(err.error, RslError::Dependency(_)));
    assert_eq!(err.exit_code(), 3);
}

#[test]
fn corrupted_model_fails_scoring() {
    let cfg = toy();
    let dir = tempfile::tempdir().unwrap();
    run_all(&cfg, dir.path()).unwrap();
    let model = dir.path().join(names::MODEL);
    let text = read(dir.path(), names::MODEL);
    let cut = text.len() / 2;
    std::fs::write(&model, &text[..cut]).unwrap();
    let err = run_score_stage(&cfg, dir.path()).unwrap_err();
    assert_eq!(err.stage, Stage::Score);
    assert!(err.exit_code() != 0);
}

#[test]
fn too_many_candidates_leaves_no_report() {
    let cfg = RunConfig {
        candidate_n: 1000,
        ..toy()
    };
    let dir = tempfile::tempdir().unwrap();
    let err = run_all(&cfg, dir.path()).unwrap_err();
    assert!(matches!(err.error, RslError::Config(_)));
    assert_eq!(err.exit_code(), 2);
    assert!(!dir.path().join(names::REPORT).exists());
    assert!(!dir.path().join(names::SCORES).exists());
    assert!(read(dir.path(), names::FAILED).contains("candidate_n"));
}

#[test]
fn report_is_self_consistent_and_tamper_evident() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_all(&toy(), dir.path()).unwrap();
    report.verify().unwrap();
    let loaded = verify_report(dir.path()).unwrap();
    assert_eq!(loaded.summary.classifier, report.summary.classifier);
    assert!(!dir.path().join(names::FAILED).exists());

    let scores = read(dir.path(), names::SCORES);
    let mut lines: Vec<String> = scores.lines().map(String::from).collect();
    // flip the OOD label of one test node; metrics cover the test split only
    let row = lines.iter().position(|l| l.split(',').nth(1) == Some("test")).unwrap();
    let cells: Vec<&str> = lines[row].split(',').collect();
    let flipped = if cells[2] == "1" { "0" } else { "1" };
    let mut new_cells: Vec<String> = cells.iter().map(|s| s.to_string()).collect();
    new_cells[2] = flipped.into();
    lines[row] = new_cells.join(",");
    std::fs::write(dir.path().join(names::SCORES), lines.join("\n") + "\n").unwrap();
    assert!(matches!(verify_report(dir.path()), Err(RslError::Consistency(_))));
}

#[test]
fn config_echo_reproduces_run() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    let cfg = RunConfig { seed: 3, ..toy() };
    run_all(&cfg, &a).unwrap();
    let echoed = RunConfig::load(&a.join(names::CONFIG)).unwrap();
    assert_eq!(echoed, cfg);
    run_all(&echoed, &b).unwrap();
    assert_eq!(read(&a, names::SCORES), read(&b, names::SCORES));
}

#[test]
fn exported_dataset_runs_identically() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("data");
    let cfg = toy();
    export_dataset(&cfg, &data).unwrap();
    let files = RunConfig {
        source: DataSource::Files,
        edge_path: Some(data.join("edges.txt")),
        feature_path: Some(data.join("features.csv")),
        roles_path: Some(data.join("roles.txt")),
        ood_flags_path: Some(data.join("ood.txt")),
        labels_path: Some(data.join("labels.txt")),
        ..cfg.clone()
    };
    let a = run_all(&cfg, &dir.path().join("a")).unwrap();
    let b = run_all(&files, &dir.path().join("b")).unwrap();
    assert_eq!(a.rows, b.rows);
}

#[test]
fn trained_classifier_improves_on_initialization() {
    let cfg = RunConfig {
        seed: 1,
        ..RunConfig::sbm_benchmark()
    };
    let dir = tempfile::tempdir().unwrap();
    run_resonance_stage(&cfg, dir.path()).unwrap();
    run_synthesize_stage(&cfg, dir.path()).unwrap();
    let outcome = run_classify_stage(&cfg, dir.path()).unwrap();
    let best = outcome.val_auroc[outcome.best_epoch];
    assert!(outcome.best_epoch > 0);
    assert!(best > outcome.val_auroc[0], "{best} vs {}", outcome.val_auroc[0]);
}

#[test]
fn shipped_configs_parse() {
    let root = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let sbm = RunConfig::load(&root.join("sbm.toml")).unwrap();
    assert_eq!(
        sbm,
        RunConfig {
            out_dir: sbm.out_dir.clone(),
            ..RunConfig::sbm_benchmark()
        }
    );
    let toy_cfg = RunConfig::load(&root.join("toy.toml")).unwrap();
    assert_eq!(toy_cfg.source, DataSource::Toy);
    prepare(&toy_cfg).unwrap();
}

#[test]
fn loaded_report_matches_written() {
    let dir = tempfile::tempdir().unwrap();
    let report = run_all(&toy(), dir.path()).unwrap();
    let loaded = ScoreReport::load(dir.path()).unwrap();
    assert_eq!(loaded.rows, report.rows);
    assert_eq!(loaded.summary, report.summary);
}

#[test]
fn toy_resonance_selects_a_separating_epoch() {
    for seed in 0..5 {
        let cfg = RunConfig {
            seed,
            ..RunConfig::default()
        };
        let prep = prepare(&cfg).unwrap();
        let (trace, res) = rsl_core::pipeline::resonance_phase(&cfg, &prep).unwrap();
        assert!(res.val_auroc >= 0.90, "seed {seed}: {}", res.val_auroc);
        assert_eq!(res.val_auroc, trace.val_auroc[res.t_star]);
        let mean = |ood: bool| {
            let v: Vec<f64> = res
                .nodes
                .iter()
                .zip(&res.tau)
                .filter(|(&n, _)| prep.dataset.is_ood[n] == ood)
                .map(|(_, &t)| t)
                .collect();
            v.iter().sum::<f64>() / v.len() as f64
        };
        assert!(mean(false) > mean(true), "seed {seed}");
    }
}
