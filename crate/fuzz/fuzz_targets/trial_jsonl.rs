#![no_main]
use contrastbench::strategies::{records_from_jsonl, records_to_jsonl};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(records) = records_from_jsonl(text) {
        let again = records_from_jsonl(&records_to_jsonl(&records).unwrap()).unwrap();
        assert_eq!(again, records);
    }
});
