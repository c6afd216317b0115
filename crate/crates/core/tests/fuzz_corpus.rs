//! Replays the checked-in fuzz seeds through the same parse entry points the
//! fuzz targets exercise.

use std::path::{Path, PathBuf};

use contrastbench::config::ExperimentConfig;
use contrastbench::model::Phrasing;
use contrastbench::navworld::{FurnitureClass, NavWorld, Phrasebook};
use contrastbench::strategies::{records_from_jsonl, records_to_jsonl};
use contrastbench::tabletop::templates::TemplateBook;
use contrastbench::tabletop::Tabletop;
use contrastbench::{Environment, EvaluationSet, PerturbationTag};

fn seeds(target: &str) -> Vec<(PathBuf, String)> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fuzz/corpus").join(target);
    let mut out: Vec<_> = std::fs::read_dir(&dir)
        .unwrap_or_else(|e| panic!("{}: {e}", dir.display()))
        .map(|e| e.unwrap().path())
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            (p, text)
        })
        .collect();
    out.sort();
    assert!(!out.is_empty(), "no seeds for {target}");
    out
}

#[test]
fn experiment_configs_round_trip() {
    for (p, text) in seeds("experiment_config") {
        let c = ExperimentConfig::from_json(&text).unwrap_or_else(|e| panic!("{}: {e}", p.display()));
        let again = ExperimentConfig::from_json(&c.to_json().unwrap()).unwrap();
        assert_eq!(again, c);
        assert_eq!(again.hash(), c.hash());
    }
}

#[test]
fn evaluation_sets_parse_and_check() {
    for (_, text) in seeds("tabletop_set") {
        let set = EvaluationSet::<Tabletop>::from_json(&text).unwrap();
        let env = Tabletop::default();
        for inst in &set.instances {
            env.check_instance(inst).unwrap();
        }
    }
    for (_, text) in seeds("nav_set") {
        let set = EvaluationSet::<NavWorld>::from_json(&text).unwrap();
        let env = NavWorld::default();
        for inst in &set.instances {
            env.check_instance(inst).unwrap();
        }
    }
}

#[test]
fn trial_logs_round_trip() {
    for (_, text) in seeds("trial_jsonl") {
        let records = records_from_jsonl(&text).unwrap();
        assert!(!records.is_empty());
        assert_eq!(records_from_jsonl(&records_to_jsonl(&records).unwrap()).unwrap(), records);
    }
}

#[test]
fn grammars_parse() {
    for (_, text) in seeds("tabletop_templates") {
        TemplateBook::parse(&text).unwrap();
    }
    for (_, text) in seeds("nav_phrasebook") {
        let book = Phrasebook::parse(&text).unwrap();
        for (t, tpl) in book.templates.iter().enumerate() {
            for p in 0..tpl.paraphrases.len() {
                let phrasing = Phrasing {
                    template: t as u16,
                    paraphrase: p as u16,
                    synonyms: 0,
                };
                let s = book.render(phrasing, FurnitureClass::Lamp, FurnitureClass::Bed).unwrap();
                assert!(!s.contains('{'), "{s}");
            }
        }
    }
}

#[test]
fn perturbation_tags() {
    let mut valid = 0;
    for (p, text) in seeds("perturbation_tag") {
        let name = p.file_name().unwrap().to_str().unwrap();
        match text.parse::<PerturbationTag>() {
            Ok(tag) => {
                valid += 1;
                assert_eq!(tag.to_string(), text, "{name}");
            }
            Err(_) => assert!(matches!(name, "X" | "LB0"), "{name} should parse"),
        }
    }
    assert_eq!(valid, 9);
}
