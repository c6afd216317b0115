#![no_main]
use contrastbench::PerturbationTag;
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(tag) = text.parse::<PerturbationTag>() {
        assert_eq!(tag.to_string().parse::<PerturbationTag>().unwrap(), tag);
    }
});
