#![no_main]
use contrastbench::model::Phrasing;
use contrastbench::navworld::{FurnitureClass, Phrasebook};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    let Ok(book) = Phrasebook::parse(text) else {
        return;
    };
    for (t, tpl) in book.templates.iter().enumerate() {
        for p in 0..tpl.paraphrases.len() {
            let phrasing = Phrasing {
                template: t as u16,
                paraphrase: p as u16,
                synonyms: 0,
            };
            let s = book.render(phrasing, FurnitureClass::Lamp, FurnitureClass::Bed).unwrap();
            assert!(!s.contains("{g1}") && !s.contains("{g2}"));
        }
    }
});
