//! Versioned paraphrase and synonym tables for navigation instructions.

use std::collections::BTreeMap;

use super::FurnitureClass;
use crate::error::{Error, Result};
use crate::model::Phrasing;

const BUILTIN: &str = include_str!("../../resources/nav_phrasebook.v1.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    pub name: String,
    /// Index 0 is the canonical wording.
    pub paraphrases: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Phrasebook {
    pub version: u32,
    pub templates: Vec<Template>,
    synonyms: BTreeMap<FurnitureClass, String>,
}

fn check_placeholders(text: &str) -> std::result::Result<(), String> {
    for ph in ["{g1}", "{g2}"] {
        if text.matches(ph).count() != 1 {
            return Err(format!("paraphrase must contain {ph} exactly once"));
        }
    }
    let stripped = text.replace("{g1}", "").replace("{g2}", "");
    if stripped.contains(['{', '}']) {
        return Err("unknown placeholder".into());
    }
    Ok(())
}

impl Phrasebook {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin nav phrasebook is valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Resource { line, message };
        let mut version = None;
        let mut templates: Vec<Template> = Vec::new();
        let mut synonyms = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let n = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (directive, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            if version.is_none() && directive != "version" {
                return Err(err(n, "first directive must be `version`".into()));
            }
            match directive {
                "version" => {
                    if version.is_some() {
                        return Err(err(n, "duplicate version".into()));
                    }
                    version = Some(
                        rest.parse::<u32>()
                            .map_err(|_| err(n, format!("bad version {rest:?}")))?,
                    );
                }
                "template" => {
                    let (id, name) = rest
                        .split_once(' ')
                        .ok_or_else(|| err(n, "template needs an id and a name".into()))?;
                    let id: usize = id.parse().map_err(|_| err(n, format!("bad template id {id:?}")))?;
                    if id != templates.len() {
                        return Err(err(n, format!("template ids must be dense; expected {}", templates.len())));
                    }
                    if let Some(prev) = templates.last() {
                        if prev.paraphrases.is_empty() {
                            return Err(err(n, format!("template {} has no paraphrases", prev.name)));
                        }
                    }
                    templates.push(Template {
                        name: name.trim().to_string(),
                        paraphrases: Vec::new(),
                    });
                }
                "para" => {
                    let t = templates
                        .last_mut()
                        .ok_or_else(|| err(n, "para before any template".into()))?;
                    check_placeholders(rest).map_err(|m| err(n, m))?;
                    t.paraphrases.push(rest.to_string());
                }
                "synonym" => {
                    let (class, word) = rest
                        .split_once(' ')
                        .ok_or_else(|| err(n, "synonym needs a class and text".into()))?;
                    let class = FurnitureClass::from_name(class)
                        .ok_or_else(|| err(n, format!("unknown class {class:?}")))?;
                    let word = word.trim();
                    if word.is_empty() || word.contains(['{', '}']) {
                        return Err(err(n, "bad synonym text".into()));
                    }
                    if synonyms.insert(class, word.to_string()).is_some() {
                        return Err(err(n, format!("duplicate synonym for {class}")));
                    }
                }
                other => return Err(err(n, format!("unknown directive {other:?}"))),
            }
        }
        let version = version.ok_or_else(|| err(0, "missing version".into()))?;
        match templates.last() {
            None => return Err(err(0, "no templates".into())),
            Some(t) if t.paraphrases.is_empty() => {
                return Err(err(0, format!("template {} has no paraphrases", t.name)))
            }
            _ => {}
        }
        Ok(Self {
            version,
            templates,
            synonyms,
        })
    }

    pub fn synonym(&self, class: FurnitureClass) -> Option<&str> {
        self.synonyms.get(&class).map(String::as_str)
    }

    pub fn paraphrase_count(&self, template: u16) -> usize {
        self.templates
            .get(usize::from(template))
            .map_or(0, |t| t.paraphrases.len())
    }

    /// Surface form for a phrasing; `None` if the phrasing does not exist in
    /// this book or asks for a synonym the table lacks.
    pub fn render(&self, phrasing: Phrasing, g1: FurnitureClass, g2: FurnitureClass) -> Option<String> {
        let text = self
            .templates
            .get(usize::from(phrasing.template))?
            .paraphrases
            .get(usize::from(phrasing.paraphrase))?;
        let name = |class: FurnitureClass, bit: u8| -> Option<String> {
            if phrasing.synonyms & bit != 0 {
                self.synonym(class).map(str::to_string)
            } else {
                Some(class.name().to_string())
            }
        };
        if phrasing.synonyms & !0b11 != 0 {
            return None;
        }
        Some(text.replace("{g1}", &name(g1, 1)?).replace("{g2}", &name(g2, 2)?))
    }
}
