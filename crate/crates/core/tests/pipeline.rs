use std::fs;

use devoc::config::Config;
use devoc::pipeline::{evaluate, prepare, train_all, write_report, Corpus, GroupModelSet, PredictedLabel};
use devoc::synth::{builtin_templates, generate_corpus, render, write_corpus, JitterSpec};
use devoc::Error;

fn small_corpus(dir: &std::path::Path, per_class: usize, seed: u64) -> Corpus {
    write_corpus(dir, &generate_corpus(&builtin_templates(), per_class, 2.0, seed)).unwrap();
    Corpus::load(dir).unwrap()
}

#[test]
fn train_then_evaluate_round_trip() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_corpus(&tmp.path().join("c"), 20, 3);
    let cfg = Config::default();
    let outcome = train_all(&corpus, &cfg).unwrap();
    assert_eq!(outcome.models.len(), 4);

    let models_dir = tmp.path().join("m");
    outcome.models.save(&models_dir).unwrap();
    let loaded = GroupModelSet::load(&models_dir).unwrap();
    assert_eq!(loaded, outcome.models);

    let (report, records) = evaluate(&corpus, &loaded, &cfg).unwrap();
    assert_eq!(records.len(), corpus.entries.len());
    assert!(report.rows.values().all(|r| r.train_accuracy().unwrap() >= 0.9));

    write_report(&models_dir, &report, &records).unwrap();
    let csv = fs::read_to_string(models_dir.join("report.csv")).unwrap();
    assert!(csv.starts_with("group,test_acc,train_acc,n_test,n_train\n"));
}

#[test]
fn zero_jitter_template_gets_its_own_label() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_corpus(tmp.path(), 20, 9);
    let cfg = Config::default();
    let models = train_all(&corpus, &cfg).unwrap().models;
    for t in builtin_templates() {
        let glyph = prepare(&render(&t, JitterSpec::NONE), &cfg).unwrap();
        let p = devoc::pipeline::classify_prepared(&glyph, &models).unwrap();
        assert_eq!(p.label, PredictedLabel::Class(t.class_label.clone()), "{}", t.id);
        let n_out = models.get(p.group).unwrap().labels.len() as f64;
        assert!(p.confidence > 1.0 / n_out);
    }
}

#[test]
fn single_class_group_is_insufficient() {
    let tmp = tempfile::tempdir().unwrap();
    let templates: Vec<_> = builtin_templates().into_iter().filter(|t| t.id != "kha" && t.id != "sha").collect();
    write_corpus(tmp.path(), &generate_corpus(&templates, 10, 0.0, 1)).unwrap();
    let corpus = Corpus::load(tmp.path()).unwrap();
    match train_all(&corpus, &Config::default()) {
        Err(Error::InsufficientData { group, .. }) => assert_eq!(group, "full_end"),
        other => panic!("expected InsufficientData, got {other:?}"),
    }
}

#[test]
fn training_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = small_corpus(&tmp.path().join("c"), 10, 4);
    let cfg = Config::default();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    train_all(&corpus, &cfg).unwrap().models.save(&a).unwrap();
    train_all(&corpus, &cfg).unwrap().models.save(&b).unwrap();
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn config_text_round_trip() {
    let mut cfg = Config::default();
    cfg.train.seed = 77;
    cfg.structural.step_tol = 3;
    assert_eq!(Config::parse(&cfg.to_text()).unwrap(), cfg);
    assert!(Config::parse("stepp_tol = 2").is_err());
}
