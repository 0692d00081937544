use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::ParseError;

/// Label assigned to unmapped tags in lenient mode. No extraction rule matches it.
pub const OTHER: &str = "OTHER";

/// Dependency labels the extraction rules are written against.
pub const CANONICAL_DEPRELS: &[&str] = &[
    "NSUBJ",
    "CSUBJ",
    "NSUBJPASS",
    "CSUBJPASS",
    "COMPOUND",
    "PRT",
    "NEG",
    "AUX",
    "AUXPASS",
    "DOBJ",
    "DATIVE",
    "POBJ",
    "PREP",
    "AGENT",
    "ATTR",
    "OPRD",
    "PCOMP",
    "CCOMP",
    "XCOMP",
    "ADVCL",
    "ADVMOD",
    "NPADVMOD",
    "ROOT",
];

const UPOS: &[&str] = &[
    "ADJ", "ADP", "ADV", "AUX", "CCONJ", "DET", "INTJ", "NOUN", "NUM", "PART", "PRON", "PROPN",
    "PUNCT", "SCONJ", "SYM", "VERB", "X",
];

// Remaining spaCy/ClearNLP labels that no rule consumes but that appear in parser output.
const SPACY_EXTRA: &[&str] = &[
    "ACL",
    "ACOMP",
    "AMOD",
    "APPOS",
    "CASE",
    "CC",
    "CONJ",
    "CSUBJPASS",
    "DEP",
    "DET",
    "DOBJ",
    "EXPL",
    "INTJ",
    "MARK",
    "META",
    "NMOD",
    "NPMOD",
    "NUMMOD",
    "NUMBER",
    "PARATAXIS",
    "POSS",
    "PRECONJ",
    "PREDET",
    "PUNCT",
    "QUANTMOD",
    "RELCL",
];

const UD_TO_CANONICAL: &[(&str, &str)] = &[
    ("nsubj", "NSUBJ"),
    ("nsubj:pass", "NSUBJPASS"),
    ("csubj", "CSUBJ"),
    ("csubj:pass", "CSUBJPASS"),
    ("obj", "DOBJ"),
    ("iobj", "DATIVE"),
    ("compound", "COMPOUND"),
    ("flat", "COMPOUND"),
    ("compound:prt", "PRT"),
    ("obl", "POBJ"),
    ("obl:agent", "AGENT"),
    ("obl:tmod", "NPADVMOD"),
    ("obl:npmod", "NPADVMOD"),
    ("case", "PREP"),
    ("advcl", "ADVCL"),
    ("advmod", "ADVMOD"),
    ("aux", "AUX"),
    ("aux:pass", "AUXPASS"),
    ("xcomp", "XCOMP"),
    ("ccomp", "CCOMP"),
    ("root", "ROOT"),
    ("acl", "ACL"),
    ("acl:relcl", "RELCL"),
    ("amod", "AMOD"),
    ("appos", "APPOS"),
    ("cc", "CC"),
    ("clf", "CLF"),
    ("conj", "CONJ"),
    ("cop", "COP"),
    ("dep", "DEP"),
    ("det", "DET"),
    ("det:poss", "POSS"),
    ("discourse", "DISCOURSE"),
    ("dislocated", "DISLOCATED"),
    ("expl", "EXPL"),
    ("fixed", "FIXED"),
    ("goeswith", "GOESWITH"),
    ("list", "LIST"),
    ("mark", "MARK"),
    ("nmod", "NMOD"),
    ("nmod:poss", "POSS"),
    ("nmod:tmod", "NMOD"),
    ("nummod", "NUMMOD"),
    ("orphan", "ORPHAN"),
    ("parataxis", "PARATAXIS"),
    ("punct", "PUNCT"),
    ("reparandum", "REPARANDUM"),
    ("vocative", "VOCATIVE"),
];

/// Mapping from a parser's tag inventory onto the canonical labels.
///
/// Lookup is case-insensitive on the source label. A label that is already one
/// of the scheme's canonical outputs is accepted verbatim, so serialized trees
/// re-parse under the scheme that produced them.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TagScheme {
    pub deprel_map: BTreeMap<String, String>,
    pub pos_map: BTreeMap<String, String>,
}

impl TagScheme {
    pub fn new(deprel_map: BTreeMap<String, String>, pos_map: BTreeMap<String, String>) -> Self {
        let lower = |m: BTreeMap<String, String>| {
            m.into_iter()
                .map(|(k, v)| (k.to_lowercase(), v.to_uppercase()))
                .collect()
        };
        TagScheme {
            deprel_map: lower(deprel_map),
            pos_map: lower(pos_map),
        }
    }

    /// Identity scheme over the spaCy/ClearNLP English inventory.
    pub fn spacy() -> Self {
        let deprel_map = CANONICAL_DEPRELS
            .iter()
            .chain(SPACY_EXTRA)
            .map(|l| (l.to_string(), l.to_string()))
            .collect();
        TagScheme::new(deprel_map, upos_identity())
    }

    /// Plain Universal Dependencies labels mapped onto the canonical inventory.
    pub fn ud() -> Self {
        let deprel_map = UD_TO_CANONICAL
            .iter()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect();
        TagScheme::new(deprel_map, upos_identity())
    }

    /// Resolves `"spacy"`/`"ud"` to a shipped scheme, anything else to a JSON file.
    pub fn load(name_or_path: &str) -> Result<Self, ParseError> {
        match name_or_path {
            "spacy" => Ok(Self::spacy()),
            "ud" => Ok(Self::ud()),
            path => Self::from_json_file(path),
        }
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ParseError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ParseError::Scheme {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json(&text).map_err(|e| match e {
            ParseError::Scheme { message, .. } => ParseError::Scheme {
                path: path.display().to_string(),
                message,
            },
            other => other,
        })
    }

    pub fn from_json(text: &str) -> Result<Self, ParseError> {
        #[derive(Deserialize)]
        struct Raw {
            deprel_map: BTreeMap<String, String>,
            #[serde(default)]
            pos_map: BTreeMap<String, String>,
        }
        let raw: Raw = serde_json::from_str(text).map_err(|e| ParseError::Scheme {
            path: "<inline>".into(),
            message: e.to_string(),
        })?;
        Ok(TagScheme::new(raw.deprel_map, raw.pos_map))
    }

    pub fn map_deprel(&self, label: &str) -> Option<String> {
        lookup(&self.deprel_map, label)
    }

    pub fn map_pos(&self, tag: &str) -> Option<String> {
        lookup(&self.pos_map, tag)
    }
}

fn lookup(map: &BTreeMap<String, String>, label: &str) -> Option<String> {
    if let Some(v) = map.get(&label.to_lowercase()) {
        return Some(v.clone());
    }
    let upper = label.to_uppercase();
    if upper == OTHER || map.values().any(|v| *v == upper) {
        return Some(upper);
    }
    None
}

fn upos_identity() -> BTreeMap<String, String> {
    UPOS.iter()
        .map(|t| (t.to_string(), t.to_string()))
        .collect()
}
