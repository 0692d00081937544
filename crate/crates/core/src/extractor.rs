//! Predicate-argument extraction over dependency trees.
//!
//! Every rule here reads canonical labels (see [`crate::depmodel::TagScheme`]).
//! A sentence yields one [`ClauseFrame`] per subject head: the subject chunk,
//! the predicate chunk built around the subject's governor, and whatever
//! objects, complements and adverbials hang off that predicate.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::depmodel::{DepTree, EntitySpan, TreeError};

const SUBJECT_LABELS: &[&str] = &["NSUBJ", "CSUBJ", "NSUBJPASS", "CSUBJPASS"];
const PREDICATE_LABELS: &[&str] = &["PRT", "NEG", "AUX", "AUXPASS"];
const COMPLEMENT_LABELS: &[&str] = &["ATTR", "OPRD", "PCOMP", "CCOMP", "XCOMP"];
const ADVERBIAL_LABELS: &[&str] = &["ADVCL", "ADVMOD", "NPADVMOD"];
const PREP_HEAD_LABELS: &[&str] = &["POBJ", "PREP", "AGENT"];

// Subtrees that carry their own argument structure; the prepositional-object
// search does not descend into them.
const PREP_BARRIER_LABELS: &[&str] = &[
    "NSUBJ",
    "CSUBJ",
    "NSUBJPASS",
    "CSUBJPASS",
    "CONJ",
    "ATTR",
    "OPRD",
    "PCOMP",
    "CCOMP",
    "XCOMP",
    "ADVCL",
    "ADVMOD",
    "NPADVMOD",
    "RELCL",
    "ACL",
    "PARATAXIS",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ChunkKind {
    Subject,
    Predicate,
    DirectObject,
    IndirectObject,
    PrepObject,
    Complement,
    Adverbial,
}

/// A surface-ordered group of words standing for one concept.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Chunk {
    pub kind: ChunkKind,
    pub word_ids: Vec<usize>,
    pub text: String,
    pub head_id: usize,
    pub head_lemma: String,
}

impl Chunk {
    fn build(
        tree: &DepTree,
        kind: ChunkKind,
        head: usize,
        ids: impl IntoIterator<Item = usize>,
    ) -> Self {
        let mut word_ids: Vec<usize> = ids.into_iter().collect();
        word_ids.push(head);
        word_ids.sort_unstable();
        word_ids.dedup();
        let head_lemma = tree
            .token(head)
            .map(|t| t.lemma.to_lowercase())
            .unwrap_or_default();
        Chunk {
            kind,
            text: tree.join_forms(&word_ids),
            word_ids,
            head_id: head,
            head_lemma,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseFrame {
    /// Index of the source sentence within its document.
    pub sentence: usize,
    pub subject: Chunk,
    pub predicate: Chunk,
    pub direct_object: Option<Chunk>,
    pub indirect_object: Option<Chunk>,
    pub prep_objects: Vec<Chunk>,
    pub complements: Vec<Chunk>,
    pub adverbials: Vec<Chunk>,
    pub negated: bool,
    pub passive: bool,
    /// The predicate is a copy of the subject head (sentence has no verb).
    pub synthetic_predicate: bool,
}

/// Supplies entity spans used to widen or narrow subject chunks.
pub trait NerRectifier {
    fn entity_spans(&self, tree: &DepTree) -> Vec<EntitySpan>;
}

/// Reads spans from the `NER=` entries of the CoNLL-U MISC column.
#[derive(Debug, Clone, Copy, Default)]
pub struct MiscNer;

impl NerRectifier for MiscNer {
    fn entity_spans(&self, tree: &DepTree) -> Vec<EntitySpan> {
        tree.entities()
    }
}

fn has_label(labels: &[&str], deprel: &str) -> bool {
    labels.contains(&deprel)
}

/// Subject heads in surface order. A sentence with no verbal token (VERB or
/// AUX) falls back to its root.
pub fn extract_subject_heads(tree: &DepTree) -> Vec<usize> {
    if !tree.has_upos("VERB") && !tree.has_upos("AUX") {
        return vec![tree.root_id()];
    }
    tree.tokens()
        .iter()
        .filter(|t| has_label(SUBJECT_LABELS, &t.deprel))
        .map(|t| t.id)
        .collect()
}

/// Subject head plus every descendant reachable through COMPOUND edges or
/// NOUN/PROPN tokens only.
pub fn expand_subject_chunk(tree: &DepTree, head: usize) -> Result<Chunk, TreeError> {
    let mut ids = Vec::new();
    let mut stack = vec![head];
    while let Some(cur) = stack.pop() {
        for child in tree.children(cur)? {
            if child.deprel == "COMPOUND" || child.upos == "NOUN" || child.upos == "PROPN" {
                ids.push(child.id);
                stack.push(child.id);
            }
        }
    }
    Ok(Chunk::build(tree, ChunkKind::Subject, head, ids))
}

/// Governor of the subject head, or the head itself when it is the root.
pub fn extract_predicate_head(tree: &DepTree, subject_head: usize) -> Result<usize, TreeError> {
    let tok = tree.token(subject_head)?;
    Ok(if tok.is_root() {
        subject_head
    } else {
        tok.head
    })
}

/// Predicate head with its directly attached particles, negation and auxiliaries.
///
/// Returns the chunk with its `(negated, passive)` flags.
pub fn expand_predicate_chunk(
    tree: &DepTree,
    pred_head: usize,
) -> Result<(Chunk, bool, bool), TreeError> {
    let mut ids = Vec::new();
    let mut negated = false;
    let mut passive = false;
    for child in tree.children(pred_head)? {
        if has_label(PREDICATE_LABELS, &child.deprel) {
            ids.push(child.id);
            negated |= child.deprel == "NEG";
            passive |= child.deprel == "AUXPASS";
        }
    }
    Ok((
        Chunk::build(tree, ChunkKind::Predicate, pred_head, ids),
        negated,
        passive,
    ))
}

fn compound_expansion(tree: &DepTree, head: usize, out: &mut Vec<usize>) -> Result<(), TreeError> {
    out.push(head);
    for child in tree.children(head)? {
        if child.deprel == "COMPOUND" {
            compound_expansion(tree, child.id, out)?;
        }
    }
    Ok(())
}

fn is_prep_head(deprel: &str, upos: &str) -> bool {
    has_label(PREP_HEAD_LABELS, deprel) || (deprel == "DATIVE" && upos == "ADP")
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Objects {
    pub direct: Option<Chunk>,
    pub indirect: Option<Chunk>,
    pub preps: Vec<Chunk>,
}

/// Direct, indirect and prepositional objects of a predicate.
///
/// Direct and indirect objects are non-ADP DOBJ/DATIVE children, expanded
/// along COMPOUND edges. Prepositional heads are the top-most POBJ, PREP,
/// AGENT or ADP-tagged DATIVE nodes in the predicate subtree; a preposition's
/// chunk absorbs the COMPOUND expansion of its POBJ children, and a bare POBJ
/// head absorbs its PREP (case-marker) children.
pub fn extract_objects(tree: &DepTree, pred_head: usize) -> Result<Objects, TreeError> {
    let mut objects = Objects::default();
    for child in tree.children(pred_head)? {
        if child.upos == "ADP" {
            continue;
        }
        let slot = match child.deprel.as_str() {
            "DOBJ" => &mut objects.direct,
            "DATIVE" => &mut objects.indirect,
            _ => continue,
        };
        if slot.is_none() {
            let kind = if child.deprel == "DOBJ" {
                ChunkKind::DirectObject
            } else {
                ChunkKind::IndirectObject
            };
            let mut ids = Vec::new();
            compound_expansion(tree, child.id, &mut ids)?;
            *slot = Some(Chunk::build(tree, kind, child.id, ids));
        }
    }

    let mut heads = Vec::new();
    let mut stack: Vec<usize> = tree.child_ids(pred_head)?.iter().rev().copied().collect();
    while let Some(cur) = stack.pop() {
        let tok = tree.token(cur)?;
        if is_prep_head(&tok.deprel, &tok.upos) {
            heads.push(cur);
            continue;
        }
        if has_label(PREP_BARRIER_LABELS, &tok.deprel) {
            continue;
        }
        stack.extend(tree.child_ids(cur)?.iter().rev().copied());
    }
    heads.sort_unstable();

    for head in heads {
        let tok = tree.token(head)?;
        let mut ids = Vec::new();
        compound_expansion(tree, head, &mut ids)?;
        for child in tree.children(head)? {
            let merge = if tok.deprel == "POBJ" {
                child.deprel == "PREP"
            } else {
                child.deprel == "POBJ"
            };
            if merge {
                compound_expansion(tree, child.id, &mut ids)?;
            }
        }
        objects
            .preps
            .push(Chunk::build(tree, ChunkKind::PrepObject, head, ids));
    }
    Ok(objects)
}

fn subtree_chunks(
    tree: &DepTree,
    pred_head: usize,
    labels: &[&str],
    kind: ChunkKind,
) -> Result<Vec<Chunk>, TreeError> {
    tree.children(pred_head)?
        .into_iter()
        .filter(|c| has_label(labels, &c.deprel))
        .map(|c| Ok(Chunk::build(tree, kind, c.id, tree.subtree_span(c.id)?)))
        .collect()
}

/// One chunk per ATTR/OPRD/PCOMP/CCOMP/XCOMP child: that child's full subtree.
pub fn extract_complements(tree: &DepTree, pred_head: usize) -> Result<Vec<Chunk>, TreeError> {
    subtree_chunks(tree, pred_head, COMPLEMENT_LABELS, ChunkKind::Complement)
}

/// One chunk per ADVCL/ADVMOD/NPADVMOD child of the predicate: that child's full subtree.
pub fn extract_adverbials(tree: &DepTree, pred_head: usize) -> Result<Vec<Chunk>, TreeError> {
    subtree_chunks(tree, pred_head, ADVERBIAL_LABELS, ChunkKind::Adverbial)
}

fn rectify(tree: &DepTree, subject: Chunk, pred_head: usize, spans: &[EntitySpan]) -> Chunk {
    let Some(span) = spans.iter().find(|s| s.contains(subject.head_id)) else {
        return subject;
    };
    if span.contains(pred_head) && pred_head != subject.head_id {
        return subject;
    }
    Chunk::build(tree, ChunkKind::Subject, subject.head_id, span.ids())
}

/// All clause frames of one sentence, ordered by subject position.
pub fn extract_frames(
    tree: &DepTree,
    sentence: usize,
    rectifier: Option<&dyn NerRectifier>,
) -> Result<Vec<ClauseFrame>, TreeError> {
    let spans = rectifier.map(|r| r.entity_spans(tree)).unwrap_or_default();
    let mut frames = Vec::new();
    for head in extract_subject_heads(tree) {
        let pred_head = extract_predicate_head(tree, head)?;
        let mut subject = expand_subject_chunk(tree, head)?;
        if !spans.is_empty() {
            subject = rectify(tree, subject, pred_head, &spans);
        }

        if pred_head == head {
            let predicate = Chunk::build(tree, ChunkKind::Predicate, head, []);
            frames.push(ClauseFrame {
                sentence,
                subject,
                predicate,
                direct_object: None,
                indirect_object: None,
                prep_objects: Vec::new(),
                complements: Vec::new(),
                adverbials: Vec::new(),
                negated: false,
                passive: false,
                synthetic_predicate: true,
            });
            continue;
        }

        let (predicate, negated, passive) = expand_predicate_chunk(tree, pred_head)?;
        let objects = extract_objects(tree, pred_head)?;
        let claimed: BTreeSet<usize> = objects
            .direct
            .iter()
            .chain(&objects.indirect)
            .chain(&objects.preps)
            .flat_map(|c| c.word_ids.iter().copied())
            .collect();
        // object paths win over complement paths on shared tokens
        let complements = extract_complements(tree, pred_head)?
            .into_iter()
            .filter(|c| !claimed.contains(&c.head_id))
            .map(|c| {
                let ids: Vec<usize> = c
                    .word_ids
                    .iter()
                    .copied()
                    .filter(|i| !claimed.contains(i))
                    .collect();
                Chunk::build(tree, ChunkKind::Complement, c.head_id, ids)
            })
            .collect();

        frames.push(ClauseFrame {
            sentence,
            subject,
            predicate,
            direct_object: objects.direct,
            indirect_object: objects.indirect,
            prep_objects: objects.preps,
            complements,
            adverbials: extract_adverbials(tree, pred_head)?,
            negated,
            passive,
            synthetic_predicate: false,
        });
    }
    Ok(frames)
}
