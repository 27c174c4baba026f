//! CSV and summary.json formats, including validation against the shipped schema.

use std::fs;
use std::path::Path;

use coopbandit_core::config::{Algorithm, DeltaMode, ExperimentConfig, MeansSource};
use coopbandit_core::output::{run_experiment, write_outputs, CSV_HEADER};
use serde_json::Value;

fn schema() -> jsonschema::Validator {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schema/summary.schema.json");
    let schema: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::validator_for(&schema).unwrap()
}

fn run_to(config: &ExperimentConfig, dir: &Path) -> Value {
    write_outputs(&run_experiment(config).unwrap(), dir).unwrap();
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn assert_valid(validator: &jsonschema::Validator, summary: &Value) {
    let errors: Vec<String> = validator
        .iter_errors(summary)
        .map(|e| e.to_string())
        .collect();
    assert!(errors.is_empty(), "schema violations: {errors:?}");
}

#[test]
fn summaries_validate_against_schema() {
    let validator = schema();
    let tmp = tempfile::tempdir().unwrap();
    let means = tmp.path().join("means.txt");
    fs::write(&means, "# ctr\n0.05\n0.04\n0.03\n0.045\n").unwrap();
    let configs = [
        ExperimentConfig::new(
            Algorithm::DoeBandit,
            4,
            3,
            3000,
            MeansSource::Synthetic { top: 0.9, gap: 0.4 },
            1,
        ),
        ExperimentConfig::new(
            Algorithm::FullcommUcb,
            3,
            2,
            500,
            MeansSource::File(means.clone()),
            2,
        ),
        ExperimentConfig {
            delta_mode: DeltaMode::Fixed(0.01),
            ..ExperimentConfig::new(
                Algorithm::NocommUcb,
                3,
                2,
                500,
                MeansSource::Synthetic { top: 0.5, gap: 0.1 },
                3,
            )
        },
    ];
    for (i, mut c) in configs.into_iter().enumerate() {
        c.trials = 3;
        let summary = run_to(&c, &tmp.path().join(format!("run{i}")));
        assert_valid(&validator, &summary);
        assert!(summary["bounds"].is_object());
    }
}

#[test]
fn equal_means_give_null_bounds() {
    let tmp = tempfile::tempdir().unwrap();
    let means = tmp.path().join("flat.txt");
    fs::write(&means, "0.5\n0.5\n").unwrap();
    let mut c = ExperimentConfig::new(Algorithm::DoeBandit, 2, 2, 200, MeansSource::File(means), 4);
    c.trials = 1;
    let summary = run_to(&c, &tmp.path().join("out"));
    assert_valid(&schema(), &summary);
    assert!(summary["bounds"].is_null());
    assert!(summary["environment"]["min_gap"].is_null());
}

#[test]
fn schema_rejects_a_missing_key() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(
        Algorithm::DoeBandit,
        2,
        2,
        100,
        MeansSource::Synthetic { top: 0.9, gap: 0.5 },
        5,
    );
    c.trials = 1;
    let mut summary = run_to(&c, tmp.path());
    summary.as_object_mut().unwrap().remove("aggregate");
    assert!(!schema().is_valid(&summary));
}

#[test]
fn csv_has_one_row_per_recorded_slot() {
    let tmp = tempfile::tempdir().unwrap();
    let means = tmp.path().join("one.txt");
    fs::write(&means, "0.7\n").unwrap();
    let mut c = ExperimentConfig::new(Algorithm::DoeBandit, 1, 2, 3, MeansSource::File(means), 6);
    c.trials = 1;
    c.record_every = 1;
    run_to(&c, &tmp.path().join("out"));
    let csv = fs::read_to_string(tmp.path().join("out/trial_0.csv")).unwrap();
    assert_eq!(
        csv,
        format!("{CSV_HEADER}\n1,0.000000,0.000000,0,1\n2,0.000000,0.000000,0,1\n3,0.000000,0.000000,0,1\n")
    );
}

#[test]
fn one_csv_per_trial_and_aggregates_match_finals() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(
        Algorithm::DoeBandit,
        5,
        3,
        4000,
        MeansSource::Synthetic { top: 0.8, gap: 0.3 },
        7,
    );
    c.trials = 7;
    let summary = run_to(&c, tmp.path());
    let mut names: Vec<String> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    let mut expected: Vec<String> = (0..7).map(|i| format!("trial_{i}.csv")).collect();
    expected.push("summary.json".into());
    expected.sort();
    assert_eq!(names, expected);

    let trials = summary["trials"].as_array().unwrap();
    let msgs: Vec<f64> = trials
        .iter()
        .map(|t| t["messages"].as_f64().unwrap())
        .collect();
    let mean = msgs.iter().sum::<f64>() / msgs.len() as f64;
    assert!((summary["aggregate"]["messages"]["mean"].as_f64().unwrap() - mean).abs() < 1e-9);

    // The last CSV row carries each trial's finals.
    for t in trials {
        let idx = t["trial"].as_u64().unwrap();
        let csv = fs::read_to_string(tmp.path().join(format!("trial_{idx}.csv"))).unwrap();
        let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
        assert_eq!(last[0], "4000");
        assert_eq!(last[3], t["messages"].to_string());
        let g: f64 = last[1].parse().unwrap();
        assert!((g - t["group_regret"].as_f64().unwrap()).abs() <= 5e-7);
    }
}

#[test]
fn thread_count_does_not_change_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = ExperimentConfig::new(
        Algorithm::DoeBandit,
        6,
        4,
        3000,
        MeansSource::Synthetic { top: 0.9, gap: 0.3 },
        8,
    );
    c.trials = 8;
    // Only this test touches the variable.
    std::env::set_var(coopbandit_core::output::THREADS_ENV, "1");
    run_to(&c, &tmp.path().join("one"));
    std::env::set_var(coopbandit_core::output::THREADS_ENV, "3");
    run_to(&c, &tmp.path().join("three"));
    std::env::remove_var(coopbandit_core::output::THREADS_ENV);
    for name in (0..8)
        .map(|i| format!("trial_{i}.csv"))
        .chain(["summary.json".to_string()])
    {
        assert_eq!(
            fs::read(tmp.path().join("one").join(&name)).unwrap(),
            fs::read(tmp.path().join("three").join(&name)).unwrap(),
            "{name}"
        );
    }
}
