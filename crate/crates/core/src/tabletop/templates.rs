//! Versioned instruction templates for the tabletop grammar.

use std::collections::BTreeMap;

use super::task::{Category, Direction, Magnitude, Region, TabletopTask};
use crate::error::{Error, Result};

const BUILTIN: &str = include_str!("../../resources/tabletop_templates.v1.txt");

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TemplateBook {
    pub version: u32,
    templates: BTreeMap<Category, String>,
    words: BTreeMap<String, String>,
}

fn region_key(r: Region) -> &'static str {
    match r {
        Region::TopLeft => "region.top-left",
        Region::Top => "region.top",
        Region::TopRight => "region.top-right",
        Region::Left => "region.left",
        Region::Center => "region.center",
        Region::Right => "region.right",
        Region::BottomLeft => "region.bottom-left",
        Region::Bottom => "region.bottom",
        Region::BottomRight => "region.bottom-right",
    }
}

fn direction_name(d: Direction) -> &'static str {
    match d {
        Direction::Up => "up",
        Direction::Down => "down",
        Direction::Left => "left",
        Direction::Right => "right",
    }
}

fn magnitude_name(m: Magnitude) -> &'static str {
    match m {
        Magnitude::Slightly => "slightly",
        Magnitude::Somewhat => "somewhat",
    }
}

fn required_words() -> Vec<String> {
    let mut keys: Vec<String> = Region::ALL.iter().map(|r| region_key(*r).to_string()).collect();
    for d in Direction::ALL {
        keys.push(format!("direction.{}", direction_name(d)));
        keys.push(format!("relation.{}", direction_name(d)));
    }
    for m in [Magnitude::Slightly, Magnitude::Somewhat] {
        keys.push(format!("magnitude.{}", magnitude_name(m)));
    }
    keys
}

fn placeholders(category: Category) -> &'static [&'static str] {
    match category {
        Category::Block2Block | Category::Separate => &["source", "target"],
        Category::Block2Abs => &["source", "region"],
        Category::Block2Rel => &["source", "magnitude", "direction"],
        Category::Block2BlockRel => &["source", "relation", "target"],
    }
}

/// Names inside `{...}`; errors on unbalanced braces.
fn placeholder_names(text: &str) -> std::result::Result<Vec<&str>, String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find(['{', '}']) {
        if rest.as_bytes()[open] == b'}' {
            return Err("unbalanced '}'".into());
        }
        let after = &rest[open + 1..];
        let close = after.find('}').ok_or("unterminated '{'")?;
        let name = &after[..close];
        if name.contains('{') {
            return Err("nested '{'".into());
        }
        out.push(name);
        rest = &after[close + 1..];
    }
    Ok(out)
}

impl TemplateBook {
    pub fn builtin() -> Self {
        Self::parse(BUILTIN).expect("builtin tabletop templates are valid")
    }

    pub fn parse(text: &str) -> Result<Self> {
        let err = |line: usize, message: String| Error::Resource { line, message };
        let mut version = None;
        let mut templates = BTreeMap::new();
        let mut words = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line_no = i + 1;
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (directive, rest) = line.split_once(' ').unwrap_or((line, ""));
            let rest = rest.trim();
            if version.is_none() && directive != "version" {
                return Err(err(line_no, "first directive must be `version`".into()));
            }
            match directive {
                "version" => {
                    if version.is_some() {
                        return Err(err(line_no, "duplicate version".into()));
                    }
                    let v = rest
                        .parse::<u32>()
                        .map_err(|_| err(line_no, format!("bad version {rest:?}")))?;
                    version = Some(v);
                }
                "template" => {
                    let (cat, body) = rest
                        .split_once(' ')
                        .ok_or_else(|| err(line_no, "template needs a category and text".into()))?;
                    let category = Category::from_name(cat)
                        .ok_or_else(|| err(line_no, format!("unknown category {cat:?}")))?;
                    let body = body.trim();
                    let names = placeholder_names(body).map_err(|m| err(line_no, m))?;
                    let allowed = placeholders(category);
                    for n in &names {
                        if !allowed.contains(n) {
                            return Err(err(line_no, format!("placeholder {{{n}}} not valid here")));
                        }
                    }
                    for a in allowed {
                        if !names.contains(a) {
                            return Err(err(line_no, format!("template lacks {{{a}}}")));
                        }
                    }
                    if templates.insert(category, body.to_string()).is_some() {
                        return Err(err(line_no, format!("duplicate template {cat}")));
                    }
                }
                "word" => {
                    let (key, body) = rest
                        .split_once(' ')
                        .ok_or_else(|| err(line_no, "word needs a key and text".into()))?;
                    let body = body.trim();
                    if body.is_empty() || body.contains(['{', '}']) {
                        return Err(err(line_no, format!("bad text for {key}")));
                    }
                    words.insert(key.to_string(), body.to_string());
                }
                other => return Err(err(line_no, format!("unknown directive {other:?}"))),
            }
        }
        let version = version.ok_or_else(|| err(0, "missing version".into()))?;
        for c in Category::ALL {
            if !templates.contains_key(&c) {
                return Err(err(0, format!("missing template for {}", c.name())));
            }
        }
        for k in required_words() {
            if !words.contains_key(&k) {
                return Err(err(0, format!("missing word {k}")));
            }
        }
        Ok(Self {
            version,
            templates,
            words,
        })
    }

    fn word<'a>(&'a self, key: &'a str) -> &'a str {
        self.words.get(key).map(String::as_str).unwrap_or(key)
    }

    /// Canonical surface form of a frame.
    pub fn render(&self, task: &TabletopTask) -> String {
        let mut s = self.templates[&task.category].clone();
        s = s.replace("{source}", &task.source.to_string());
        if let Some(t) = task.target {
            s = s.replace("{target}", &t.to_string());
        }
        if let Some(r) = task.region {
            s = s.replace("{region}", self.word(region_key(r)));
        }
        if let Some(d) = task.direction {
            let dir = self.word(&format!("direction.{}", direction_name(d))).to_string();
            let rel = self.word(&format!("relation.{}", direction_name(d))).to_string();
            s = s.replace("{direction}", &dir).replace("{relation}", &rel);
        }
        if let Some(m) = task.magnitude {
            s = s.replace("{magnitude}", self.word(&format!("magnitude.{}", magnitude_name(m))));
        }
        s
    }
}
