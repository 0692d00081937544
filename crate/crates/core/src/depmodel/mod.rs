//! Dependency trees and the CoNLL-U reader they are built from.
//!
//! Word indices are 1-based as in CoNLL-U; index 0 is the virtual root and
//! never names a token.

mod conllu;
mod scheme;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use conllu::{parse_conllu, write_conllu, ParseOptions};
pub use scheme::{TagScheme, CANONICAL_DEPRELS, OTHER};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TreeError {
    #[error("sentence has no tokens")]
    Empty,
    #[error("word index {0} is not in the sentence")]
    InvalidId(usize),
    #[error("word ids are not contiguous: expected {expected}, found {found}")]
    NonContiguousIds { expected: usize, found: usize },
    #[error("token {id} has head {head} outside the sentence")]
    HeadOutOfRange { id: usize, head: usize },
    #[error("token {id} has an empty {field}")]
    EmptyField { id: usize, field: &'static str },
    #[error("sentence has no root (no token with head 0)")]
    NoRoot,
    #[error("sentence has multiple roots: {0:?}")]
    MultipleRoots(Vec<usize>),
    #[error("head relation has a cycle through token {0}")]
    CycleDetected(usize),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: malformed token line: {message}")]
    MalformedLine { line: usize, message: String },
    #[error("line {line}: {source}")]
    Tree {
        line: usize,
        #[source]
        source: TreeError,
    },
    #[error("line {line}: {kind} label `{label}` is not mapped by the tag scheme")]
    UnmappedLabel {
        line: usize,
        kind: &'static str,
        label: String,
    },
    #[error("line {line}: duplicate doc_id `{doc_id}`")]
    DuplicateDocId { line: usize, doc_id: String },
    #[error("tag scheme {path}: {message}")]
    Scheme { path: String, message: String },
}

impl ParseError {
    /// Line number the error refers to, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            ParseError::MalformedLine { line, .. }
            | ParseError::Tree { line, .. }
            | ParseError::UnmappedLabel { line, .. }
            | ParseError::DuplicateDocId { line, .. } => Some(*line),
            ParseError::Scheme { .. } => None,
        }
    }

    pub fn tree_error(&self) -> Option<&TreeError> {
        match self {
            ParseError::Tree { source, .. } => Some(source),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub id: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub deprel: String,
    pub head: usize,
    pub misc: Option<String>,
}

impl Token {
    pub fn new(id: usize, form: &str, lemma: &str, upos: &str, deprel: &str, head: usize) -> Self {
        Token {
            id,
            form: form.to_string(),
            lemma: lemma.to_string(),
            upos: upos.to_uppercase(),
            deprel: deprel.to_uppercase(),
            head,
            misc: None,
        }
    }

    pub fn is_root(&self) -> bool {
        self.head == 0
    }
}

/// A named-entity span over word ids `start..=end`, read from `NER=<label>:<span>` MISC entries.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    pub label: String,
    pub start: usize,
    pub end: usize,
}

impl EntitySpan {
    pub fn contains(&self, id: usize) -> bool {
        self.start <= id && id <= self.end
    }

    pub fn ids(&self) -> impl Iterator<Item = usize> {
        self.start..=self.end
    }
}

/// One sentence as a validated, rooted dependency tree.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepTree {
    tokens: Vec<Token>,
    root_id: usize,
    // children[h] holds dependents of word h in surface order; slot 0 is the virtual root
    children: Vec<Vec<usize>>,
}

impl DepTree {
    /// Builds a tree from tokens given in any order.
    pub fn new(mut tokens: Vec<Token>) -> Result<Self, TreeError> {
        if tokens.is_empty() {
            return Err(TreeError::Empty);
        }
        tokens.sort_by_key(|t| t.id);
        let n = tokens.len();
        for (i, t) in tokens.iter().enumerate() {
            if t.id != i + 1 {
                return Err(TreeError::NonContiguousIds {
                    expected: i + 1,
                    found: t.id,
                });
            }
            if t.head == t.id {
                return Err(TreeError::CycleDetected(t.id));
            }
            if t.head > n {
                return Err(TreeError::HeadOutOfRange {
                    id: t.id,
                    head: t.head,
                });
            }
            if t.upos.is_empty() {
                return Err(TreeError::EmptyField {
                    id: t.id,
                    field: "upos",
                });
            }
            if t.deprel.is_empty() {
                return Err(TreeError::EmptyField {
                    id: t.id,
                    field: "deprel",
                });
            }
        }
        let roots: Vec<usize> = tokens
            .iter()
            .filter(|t| t.is_root())
            .map(|t| t.id)
            .collect();
        let root_id = match roots.as_slice() {
            [] => return Err(TreeError::NoRoot),
            [r] => *r,
            _ => return Err(TreeError::MultipleRoots(roots)),
        };
        // Walk up from each token; with a single root, any walk longer than n loops.
        for t in &tokens {
            let mut cur = t.head;
            let mut steps = 0;
            while cur != 0 {
                steps += 1;
                if steps > n {
                    return Err(TreeError::CycleDetected(t.id));
                }
                cur = tokens[cur - 1].head;
            }
        }
        let mut children = vec![Vec::new(); n + 1];
        for t in &tokens {
            children[t.head].push(t.id);
        }
        Ok(DepTree {
            tokens,
            root_id,
            children,
        })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn root_id(&self) -> usize {
        self.root_id
    }

    pub fn token(&self, id: usize) -> Result<&Token, TreeError> {
        if id == 0 || id > self.tokens.len() {
            return Err(TreeError::InvalidId(id));
        }
        Ok(&self.tokens[id - 1])
    }

    pub(crate) fn child_ids(&self, id: usize) -> Result<&[usize], TreeError> {
        self.token(id)?;
        Ok(&self.children[id])
    }

    /// Dependents of `id` in surface order.
    pub fn children(&self, id: usize) -> Result<Vec<&Token>, TreeError> {
        Ok(self
            .child_ids(id)?
            .iter()
            .map(|&c| &self.tokens[c - 1])
            .collect())
    }

    /// `id` and all its descendants, sorted by surface position.
    pub fn subtree_span(&self, id: usize) -> Result<Vec<usize>, TreeError> {
        self.token(id)?;
        let mut out = Vec::new();
        let mut stack = vec![id];
        while let Some(cur) = stack.pop() {
            out.push(cur);
            stack.extend(self.children[cur].iter().copied());
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Space-joined surface forms of the given word ids, in the order given.
    pub fn join_forms(&self, ids: &[usize]) -> String {
        ids.iter()
            .filter_map(|&i| self.token(i).ok())
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn text(&self) -> String {
        self.tokens
            .iter()
            .map(|t| t.form.as_str())
            .collect::<Vec<_>>()
            .join(" ")
    }

    /// Entity spans carried in the MISC column as `NER=<label>:<start>-<end>` (or `:<id>`).
    pub fn entities(&self) -> Vec<EntitySpan> {
        let mut out: Vec<EntitySpan> = self
            .tokens
            .iter()
            .filter_map(|t| t.misc.as_deref())
            .flat_map(|m| m.split('|'))
            .filter_map(parse_ner_entry)
            .filter(|e| e.start >= 1 && e.start <= e.end && e.end <= self.tokens.len())
            .collect();
        out.sort();
        out.dedup();
        out
    }

    pub fn has_upos(&self, upos: &str) -> bool {
        self.tokens.iter().any(|t| t.upos == upos)
    }
}

fn parse_ner_entry(entry: &str) -> Option<EntitySpan> {
    let rest = entry.strip_prefix("NER=")?;
    let (label, span) = rest.rsplit_once(':')?;
    let (start, end) = match span.split_once('-') {
        Some((a, b)) => (a.parse().ok()?, b.parse().ok()?),
        None => {
            let k = span.parse().ok()?;
            (k, k)
        }
    };
    Some(EntitySpan {
        label: label.to_string(),
        start,
        end,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<DepTree>,
    pub label: Option<String>,
}
