#![no_main]
use contrastbench::navworld::NavWorld;
use contrastbench::{Environment, EvaluationSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(set) = EvaluationSet::<NavWorld>::from_json(text) else {
        return;
    };
    let env = NavWorld::default();
    for inst in set.instances.iter().take(4) {
        let _ = env.check_instance(inst);
    }
    let back = EvaluationSet::<NavWorld>::from_json(&set.to_json().unwrap()).unwrap();
    assert_eq!(back.instances.len(), set.instances.len());
});
