#![no_main]
use contrastbench::tabletop::Tabletop;
use contrastbench::{Environment, EvaluationSet};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(set) = EvaluationSet::<Tabletop>::from_json(text) else {
        return;
    };
    let env = Tabletop::default();
    // Arbitrary scenes may be infeasible; they must not panic the planner.
    for inst in set.instances.iter().take(4) {
        let _ = env.check_instance(inst);
    }
    let back = EvaluationSet::<Tabletop>::from_json(&set.to_json().unwrap()).unwrap();
    assert_eq!(back.instances.len(), set.instances.len());
});
