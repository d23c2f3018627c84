//! Prompt and phrase templates.
//!
//! Each language has a directory of UTF-8 files using `{name}` placeholders:
//! `rules.txt`, `observation_rule.txt`, `history_rule.txt`,
//! `guider_prompt.txt`, `tom_prompt.txt`, `retrieval_prompt.txt`,
//! `coordinator_prompt.txt` and `phrases.json` (a flat key/template map).
//! The built-in copies are compiled in; [`Templates::load_dir`] overrides
//! any subset from disk.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    #[default]
    Zh,
    En,
}

impl Language {
    pub fn code(self) -> &'static str {
        match self {
            Language::Zh => "zh",
            Language::En => "en",
        }
    }
}

impl FromStr for Language {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "zh" => Ok(Language::Zh),
            "en" => Ok(Language::En),
            _ => Err(format!("unknown language `{s}` (expected zh or en)")),
        }
    }
}

impl fmt::Display for Language {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Json { path: String, source: serde_json::Error },
    #[error("{path}: missing phrase keys {keys:?}")]
    MissingPhrases { path: String, keys: Vec<String> },
}

/// Named template files, in the order listed in the module docs.
pub const FILES: [&str; 7] = [
    "rules.txt",
    "observation_rule.txt",
    "history_rule.txt",
    "guider_prompt.txt",
    "tom_prompt.txt",
    "retrieval_prompt.txt",
    "coordinator_prompt.txt",
];

macro_rules! builtin {
    ($lang:literal) => {
        [
            include_str!(concat!("../templates/", $lang, "/rules.txt")),
            include_str!(concat!("../templates/", $lang, "/observation_rule.txt")),
            include_str!(concat!("../templates/", $lang, "/history_rule.txt")),
            include_str!(concat!("../templates/", $lang, "/guider_prompt.txt")),
            include_str!(concat!("../templates/", $lang, "/tom_prompt.txt")),
            include_str!(concat!("../templates/", $lang, "/retrieval_prompt.txt")),
            include_str!(concat!("../templates/", $lang, "/coordinator_prompt.txt")),
        ]
    };
}

const ZH_FILES: [&str; 7] = builtin!("zh");
const EN_FILES: [&str; 7] = builtin!("en");
const ZH_PHRASES: &str = include_str!("../templates/zh/phrases.json");
const EN_PHRASES: &str = include_str!("../templates/en/phrases.json");

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Templates {
    language: Language,
    files: BTreeMap<&'static str, String>,
    phrases: BTreeMap<String, String>,
}

impl Templates {
    pub fn builtin(language: Language) -> Templates {
        let (files, phrases) = match language {
            Language::Zh => (ZH_FILES, ZH_PHRASES),
            Language::En => (EN_FILES, EN_PHRASES),
        };
        Templates {
            language,
            files: FILES.iter().zip(files).map(|(k, v)| (*k, v.to_string())).collect(),
            phrases: serde_json::from_str(phrases).expect("built-in phrase table is valid JSON"),
        }
    }

    /// Built-in templates overridden by whatever exists under `dir/<lang>/`.
    pub fn load_dir(dir: &Path, language: Language) -> Result<Templates, TemplateError> {
        let mut t = Templates::builtin(language);
        let base = dir.join(language.code());
        for name in FILES {
            let path = base.join(name);
            if path.exists() {
                let text = std::fs::read_to_string(&path)
                    .map_err(|source| TemplateError::Io { path: path.display().to_string(), source })?;
                t.files.insert(name, text);
            }
        }
        let path = base.join("phrases.json");
        if path.exists() {
            let shown = path.display().to_string();
            let text =
                std::fs::read_to_string(&path).map_err(|source| TemplateError::Io { path: shown.clone(), source })?;
            let loaded: BTreeMap<String, String> =
                serde_json::from_str(&text).map_err(|source| TemplateError::Json { path: shown.clone(), source })?;
            let missing: Vec<String> = t.phrases.keys().filter(|k| !loaded.contains_key(*k)).cloned().collect();
            if !missing.is_empty() {
                return Err(TemplateError::MissingPhrases { path: shown, keys: missing });
            }
            t.phrases = loaded;
        }
        Ok(t)
    }

    pub fn language(&self) -> Language {
        self.language
    }

    /// A template file by name; see [`FILES`].
    pub fn file(&self, name: &str) -> &str {
        self.files.get(name).map(String::as_str).unwrap_or_else(|| panic!("unknown template file {name}"))
    }

    /// A phrase template by key. Unknown keys are a programming error.
    pub fn phrase(&self, key: &str) -> &str {
        self.phrases.get(key).map(String::as_str).unwrap_or_else(|| panic!("unknown phrase key {key}"))
    }

    /// Fills the phrase `key` with `vars`.
    pub fn say(&self, key: &str, vars: &[(&str, &str)]) -> String {
        fill(self.phrase(key), vars)
    }

    pub fn phrase_keys(&self) -> impl Iterator<Item = &str> {
        self.phrases.keys().map(String::as_str)
    }
}

/// Replaces each `{name}` in `template` with its value. Placeholders without
/// a value are left untouched; substituted text is not rescanned.
pub fn fill(template: &str, vars: &[(&str, &str)]) -> String {
    let mut out = String::with_capacity(template.len() + 64);
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        out.push_str(&rest[..open]);
        let after = &rest[open + 1..];
        match after.find('}') {
            Some(close) => {
                let name = &after[..close];
                match vars.iter().find(|(k, _)| *k == name) {
                    Some((_, v)) => out.push_str(v),
                    None => {
                        out.push('{');
                        out.push_str(name);
                        out.push('}');
                    }
                }
                rest = &after[close + 1..];
            }
            None => {
                out.push_str(&rest[open..]);
                rest = "";
            }
        }
    }
    out.push_str(rest);
    out
}
