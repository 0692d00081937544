//! Clause type assignment.

use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extractor::{Chunk, ClauseFrame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ClauseType {
    SV,
    SVO,
    SVC,
    SVA,
    SVOC,
    SVOA,
    SVOO,
}

impl ClauseType {
    pub const ALL: [ClauseType; 7] = [
        ClauseType::SV,
        ClauseType::SVO,
        ClauseType::SVC,
        ClauseType::SVA,
        ClauseType::SVOC,
        ClauseType::SVOA,
        ClauseType::SVOO,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ClauseType::SV => "SV",
            ClauseType::SVO => "SVO",
            ClauseType::SVC => "SVC",
            ClauseType::SVA => "SVA",
            ClauseType::SVOC => "SVOC",
            ClauseType::SVOA => "SVOA",
            ClauseType::SVOO => "SVOO",
        }
    }
}

impl fmt::Display for ClauseType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ClauseType {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        ClauseType::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| format!("unknown clause type `{s}`"))
    }
}

#[derive(Debug, Error)]
pub enum LexiconError {
    #[error("cannot read lexicon {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("lexicon {0} contains no lemmas")]
    Empty(String),
}

/// Lemmas treated as linking verbs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerbLexicon {
    linking_verbs: BTreeSet<String>,
    source: String,
}

const BUILTIN_LINKING: &[&str] = &[
    "be", "seem", "become", "appear", "feel", "look", "sound", "taste", "smell", "remain", "stay",
    "grow", "turn", "prove", "get", "keep",
];

impl Default for VerbLexicon {
    fn default() -> Self {
        Self::builtin()
    }
}

impl VerbLexicon {
    pub fn builtin() -> Self {
        VerbLexicon {
            linking_verbs: BUILTIN_LINKING.iter().map(|s| s.to_string()).collect(),
            source: "builtin".into(),
        }
    }

    /// A lexicon with no linking verbs; every predicate is non-linking.
    pub fn empty() -> Self {
        VerbLexicon {
            linking_verbs: BTreeSet::new(),
            source: "empty".into(),
        }
    }

    /// One lemma per line, `#` starts a comment.
    pub fn parse(text: &str, source: &str) -> Result<Self, LexiconError> {
        let linking_verbs: BTreeSet<String> = text
            .lines()
            .map(|l| l.split('#').next().unwrap_or("").trim().to_lowercase())
            .filter(|l| !l.is_empty())
            .collect();
        if linking_verbs.is_empty() {
            return Err(LexiconError::Empty(source.to_string()));
        }
        Ok(VerbLexicon {
            linking_verbs,
            source: source.to_string(),
        })
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self, LexiconError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|source| LexiconError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::parse(&text, &path.display().to_string())
    }

    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn contains(&self, lemma: &str) -> bool {
        self.linking_verbs.contains(&lemma.to_lowercase())
    }

    pub fn is_linking(&self, predicate: &Chunk) -> bool {
        self.contains(&predicate.head_lemma)
    }
}

/// The presence pattern the decision sequence reads from a frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ClauseSignature {
    pub direct_object: bool,
    pub indirect_object: bool,
    /// A prepositional object or an adverbial is present.
    pub prep_or_adverbial: bool,
    pub complement: bool,
    pub linking: bool,
}

impl ClauseSignature {
    pub fn of(frame: &ClauseFrame, lex: &VerbLexicon) -> Self {
        ClauseSignature {
            direct_object: frame.direct_object.is_some(),
            indirect_object: frame.indirect_object.is_some(),
            prep_or_adverbial: !frame.prep_objects.is_empty() || !frame.adverbials.is_empty(),
            complement: !frame.complements.is_empty(),
            linking: lex.is_linking(&frame.predicate),
        }
    }

    pub fn classify(self) -> ClauseType {
        let ClauseSignature {
            direct_object: od,
            indirect_object: oi,
            prep_or_adverbial: adv,
            complement: c,
            linking,
        } = self;
        if c {
            return if od && !oi {
                ClauseType::SVOC
            } else {
                ClauseType::SVC
            };
        }
        if od && oi {
            return ClauseType::SVOO;
        }
        if od {
            return if adv && linking {
                ClauseType::SVOA
            } else {
                ClauseType::SVO
            };
        }
        if !oi && adv && linking {
            return ClauseType::SVA;
        }
        ClauseType::SV
    }
}

pub fn classify(frame: &ClauseFrame, lex: &VerbLexicon) -> ClauseType {
    ClauseSignature::of(frame, lex).classify()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::ChunkKind;

    fn chunk(kind: ChunkKind, text: &str, lemma: &str, id: usize) -> Chunk {
        Chunk {
            kind,
            word_ids: vec![id],
            text: text.into(),
            head_id: id,
            head_lemma: lemma.into(),
        }
    }

    fn frame(lemma: &str) -> ClauseFrame {
        ClauseFrame {
            sentence: 0,
            subject: chunk(ChunkKind::Subject, "S", "s", 1),
            predicate: chunk(ChunkKind::Predicate, "V", lemma, 2),
            direct_object: None,
            indirect_object: None,
            prep_objects: vec![],
            complements: vec![],
            adverbials: vec![],
            negated: false,
            passive: false,
            synthetic_predicate: false,
        }
    }

    #[test]
    fn linking_lookup() {
        let lex = VerbLexicon::builtin();
        assert!(lex.is_linking(&chunk(ChunkKind::Predicate, "seemed", "seem", 1)));
        assert!(!lex.is_linking(&chunk(ChunkKind::Predicate, "eat", "eat", 1)));
        assert!(lex.contains("SEEM"));
        let empty = VerbLexicon::empty();
        for w in BUILTIN_LINKING {
            assert!(!empty.contains(w));
        }
    }

    #[test]
    fn lexicon_file_format() {
        let lex = VerbLexicon::parse("# copulas\nBe\n  seem  # trailing\n\n", "t").unwrap();
        assert!(lex.contains("be") && lex.contains("seem"));
        assert!(!lex.contains("become"));
        assert!(matches!(
            VerbLexicon::parse("# nothing\n", "t"),
            Err(LexiconError::Empty(_))
        ));
    }

    #[test]
    fn decision_sequence_examples() {
        let lex = VerbLexicon::builtin();
        let mut f = frame("make");
        f.direct_object = Some(chunk(ChunkKind::DirectObject, "O", "o", 3));
        f.complements = vec![chunk(ChunkKind::Complement, "C", "c", 4)];
        assert_eq!(classify(&f, &lex), ClauseType::SVOC);

        let mut f = frame("give");
        f.direct_object = Some(chunk(ChunkKind::DirectObject, "O", "o", 3));
        f.indirect_object = Some(chunk(ChunkKind::IndirectObject, "I", "i", 4));
        assert_eq!(classify(&f, &lex), ClauseType::SVOO);
        f.complements = vec![chunk(ChunkKind::Complement, "C", "c", 5)];
        assert_eq!(classify(&f, &lex), ClauseType::SVC);

        assert_eq!(classify(&frame("sleep"), &lex), ClauseType::SV);

        let mut f = frame("worry");
        f.prep_objects = vec![chunk(ChunkKind::PrepObject, "P", "p", 3)];
        assert_eq!(classify(&f, &lex), ClauseType::SV);
        let mut f = frame("be");
        f.adverbials = vec![chunk(ChunkKind::Adverbial, "A", "a", 3)];
        assert_eq!(classify(&f, &lex), ClauseType::SVA);
    }

    #[test]
    fn classify_ignores_chunk_text() {
        let lex = VerbLexicon::builtin();
        let mut a = frame("be");
        a.adverbials = vec![chunk(ChunkKind::Adverbial, "here", "here", 3)];
        let mut b = a.clone();
        b.subject.text = "something else".into();
        b.adverbials[0].text = "there".into();
        b.predicate.text = "was".into();
        assert_eq!(classify(&a, &lex), classify(&b, &lex));
    }

    #[test]
    fn parse_display_round_trip() {
        for t in ClauseType::ALL {
            assert_eq!(t.to_string().parse::<ClauseType>().unwrap(), t);
        }
        assert!("SVX".parse::<ClauseType>().is_err());
    }
}
