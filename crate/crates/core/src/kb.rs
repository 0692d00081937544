//! Per-document knowledge-base graphs built from classified clause frames.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clauses::ClauseType;
use crate::extractor::{Chunk, ClauseFrame};

#[derive(Debug, Error)]
pub enum KbError {
    #[error("document `{0}` produced no clause frames")]
    EmptyDocument(String),
    #[error("invalid knowledge base: {0}")]
    Invalid(String),
    #[error("malformed knowledge-base JSON: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NodeKind {
    Entity,
    Predicate,
    Dummy,
    FusedPredicate,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Provenance {
    pub sent: usize,
    pub words: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbNode {
    pub id: usize,
    pub text: String,
    pub kind: NodeKind,
    pub provenance: Vec<Provenance>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum EdgeLabel {
    Pred,
    Append,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KbEdge {
    pub src: usize,
    pub dst: usize,
    pub label: EdgeLabel,
}

/// Clause type of one aggregated frame and the node carrying its predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClauseRecord {
    #[serde(rename = "type")]
    pub clause_type: ClauseType,
    pub pred: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeBase {
    pub doc_id: String,
    pub label: Option<String>,
    pub nodes: Vec<KbNode>,
    pub edges: Vec<KbEdge>,
    #[serde(default)]
    pub clauses: Vec<ClauseRecord>,
}

/// Lowercases and collapses runs of whitespace.
pub fn normalize_text(text: &str) -> String {
    text.split_whitespace()
        .map(str::to_lowercase)
        .collect::<Vec<_>>()
        .join(" ")
}

fn provenance(sent: usize, chunk: &Chunk) -> Provenance {
    Provenance {
        sent,
        words: chunk.word_ids.clone(),
    }
}

#[derive(Default)]
struct Builder {
    nodes: Vec<KbNode>,
    edges: Vec<KbEdge>,
    clauses: Vec<ClauseRecord>,
    entities: HashMap<String, usize>,
}

impl Builder {
    fn push(&mut self, text: String, kind: NodeKind, provenance: Vec<Provenance>) -> usize {
        let id = self.nodes.len();
        self.nodes.push(KbNode {
            id,
            text,
            kind,
            provenance,
        });
        id
    }

    fn entity(&mut self, sent: usize, chunk: &Chunk) -> usize {
        let text = normalize_text(&chunk.text);
        let prov = provenance(sent, chunk);
        if let Some(&id) = self.entities.get(&text) {
            let node = &mut self.nodes[id];
            if !node.provenance.contains(&prov) {
                node.provenance.push(prov);
            }
            return id;
        }
        let id = self.push(text.clone(), NodeKind::Entity, vec![prov]);
        self.entities.insert(text, id);
        id
    }

    fn link(&mut self, src: usize, dst: usize, label: EdgeLabel) {
        self.edges.push(KbEdge { src, dst, label });
    }

    fn add(&mut self, frame: &ClauseFrame, ty: ClauseType) {
        let sent = frame.sentence;
        let subject = self.entity(sent, &frame.subject);

        if ty == ClauseType::SVOO {
            let (Some(od), Some(oi)) = (&frame.direct_object, &frame.indirect_object) else {
                unreachable!("SVOO frames carry both objects");
            };
            let fused = self.push(
                normalize_text(&format!("{} {}", frame.predicate.text, od.text)),
                NodeKind::FusedPredicate,
                vec![provenance(sent, &frame.predicate), provenance(sent, od)],
            );
            self.link(subject, fused, EdgeLabel::Pred);
            let oi = self.entity(sent, oi);
            self.link(fused, oi, EdgeLabel::Pred);
            self.clauses.push(ClauseRecord {
                clause_type: ty,
                pred: fused,
            });
            return;
        }

        let pred = self.push(
            normalize_text(&frame.predicate.text),
            NodeKind::Predicate,
            vec![provenance(sent, &frame.predicate)],
        );
        self.clauses.push(ClauseRecord {
            clause_type: ty,
            pred,
        });
        self.link(subject, pred, EdgeLabel::Pred);

        let direct = || {
            frame
                .direct_object
                .as_ref()
                .expect("object clause types carry Od")
        };
        match ty {
            ClauseType::SV => {
                let dummy = self.push(String::new(), NodeKind::Dummy, Vec::new());
                self.link(pred, dummy, EdgeLabel::Pred);
            }
            ClauseType::SVO => {
                let o = self.entity(sent, direct());
                self.link(pred, o, EdgeLabel::Pred);
            }
            ClauseType::SVC => {
                for c in &frame.complements {
                    let c = self.entity(sent, c);
                    self.link(pred, c, EdgeLabel::Pred);
                }
            }
            ClauseType::SVA => {
                for a in adverbial_side(frame) {
                    let a = self.entity(sent, a);
                    self.link(pred, a, EdgeLabel::Pred);
                }
            }
            ClauseType::SVOC | ClauseType::SVOA => {
                let o = self.entity(sent, direct());
                self.link(pred, o, EdgeLabel::Pred);
                let appended: Vec<&Chunk> = if ty == ClauseType::SVOC {
                    frame.complements.iter().collect()
                } else {
                    adverbial_side(frame)
                };
                for x in appended {
                    let x = self.entity(sent, x);
                    self.link(o, x, EdgeLabel::Append);
                }
            }
            ClauseType::SVOO => unreachable!(),
        }
    }
}

// Prepositional objects and adverbials, ordered by head position.
fn adverbial_side(frame: &ClauseFrame) -> Vec<&Chunk> {
    let mut out: Vec<&Chunk> = frame.prep_objects.iter().chain(&frame.adverbials).collect();
    out.sort_by_key(|c| c.head_id);
    out
}

/// Turns one document's classified frames into a knowledge base.
///
/// Entity nodes with equal normalized text are shared across the document;
/// predicate, fused-predicate and dummy nodes are created per frame.
pub fn aggregate(
    doc_id: &str,
    label: Option<&str>,
    frames: &[(ClauseFrame, ClauseType)],
) -> Result<KnowledgeBase, KbError> {
    if frames.is_empty() {
        return Err(KbError::EmptyDocument(doc_id.to_string()));
    }
    let mut b = Builder::default();
    for (frame, ty) in frames {
        b.add(frame, *ty);
    }
    Ok(KnowledgeBase {
        doc_id: doc_id.to_string(),
        label: label.map(str::to_string),
        nodes: b.nodes,
        edges: b.edges,
        clauses: b.clauses,
    })
}

impl KnowledgeBase {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Directed pairs in insertion order followed by their reversals, and the node count.
    pub fn to_edge_list(&self) -> (Vec<(usize, usize)>, usize) {
        let forward = self.edges.iter().map(|e| (e.src, e.dst));
        let backward = self.edges.iter().map(|e| (e.dst, e.src));
        (forward.chain(backward).collect(), self.nodes.len())
    }

    pub fn validate(&self) -> Result<(), KbError> {
        let k = self.nodes.len();
        for (i, n) in self.nodes.iter().enumerate() {
            if n.id != i {
                return Err(KbError::Invalid(format!(
                    "node at position {i} has id {}",
                    n.id
                )));
            }
            match n.kind {
                NodeKind::Dummy if !n.text.is_empty() || !n.provenance.is_empty() => {
                    return Err(KbError::Invalid(format!("dummy node {i} carries content")));
                }
                NodeKind::Dummy => {}
                _ if n.provenance.is_empty() => {
                    return Err(KbError::Invalid(format!("node {i} has no provenance")));
                }
                _ => {}
            }
        }
        for e in &self.edges {
            if e.src >= k || e.dst >= k {
                return Err(KbError::Invalid(format!(
                    "edge {}->{} references a node outside 0..{k}",
                    e.src, e.dst
                )));
            }
            let entity_loop =
                e.label == EdgeLabel::Append && self.nodes[e.src].kind == NodeKind::Entity;
            if e.src == e.dst && !entity_loop {
                return Err(KbError::Invalid(format!("self-loop on node {}", e.src)));
            }
        }
        for c in &self.clauses {
            if c.pred >= k {
                return Err(KbError::Invalid(format!(
                    "clause predicate {} out of range",
                    c.pred
                )));
            }
        }
        Ok(())
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("knowledge base serializes");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, KbError> {
        let kb: KnowledgeBase = serde_json::from_str(text)?;
        kb.validate()?;
        Ok(kb)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extractor::ChunkKind;

    fn chunk(kind: ChunkKind, text: &str, ids: &[usize]) -> Chunk {
        Chunk {
            kind,
            word_ids: ids.to_vec(),
            text: text.into(),
            head_id: *ids.last().unwrap(),
            head_lemma: text.to_lowercase(),
        }
    }

    fn frame(s: &str, v: &str) -> ClauseFrame {
        ClauseFrame {
            sentence: 0,
            subject: chunk(ChunkKind::Subject, s, &[1]),
            predicate: chunk(ChunkKind::Predicate, v, &[2]),
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
    fn sv_gets_dummy() {
        let kb = aggregate("d", None, &[(frame("Alice", "sleeps"), ClauseType::SV)]).unwrap();
        let kinds: Vec<_> = kb.nodes.iter().map(|n| n.kind).collect();
        assert_eq!(
            kinds,
            [NodeKind::Entity, NodeKind::Predicate, NodeKind::Dummy]
        );
        assert_eq!(kb.edges.len(), 2);
        assert_eq!(kb.nodes[2].text, "");
        assert!(kb.nodes[2].provenance.is_empty());
        kb.validate().unwrap();
        assert_eq!(kb.to_edge_list(), (vec![(0, 1), (1, 2), (1, 0), (2, 1)], 3));
    }

    #[test]
    fn svoo_fuses_predicate() {
        let mut f = frame("She", "gave");
        f.direct_object = Some(chunk(ChunkKind::DirectObject, "book", &[5]));
        f.indirect_object = Some(chunk(ChunkKind::IndirectObject, "him", &[3]));
        let kb = aggregate("d", None, &[(f, ClauseType::SVOO)]).unwrap();
        assert_eq!(kb.nodes.len(), 3);
        assert_eq!(kb.nodes[1].kind, NodeKind::FusedPredicate);
        assert_eq!(kb.nodes[1].text, "gave book");
        assert_eq!(kb.nodes[1].provenance.len(), 2);
        assert_eq!(kb.nodes[2].text, "him");
        assert_eq!(kb.edges.len(), 2);
    }

    #[test]
    fn entities_deduplicate_document_wide() {
        let mut a = frame("Alice", "reads");
        a.direct_object = Some(chunk(ChunkKind::DirectObject, "books", &[3]));
        let mut b = frame("alice", "writes");
        b.sentence = 1;
        b.direct_object = Some(chunk(ChunkKind::DirectObject, "letters", &[3]));
        let kb = aggregate("d", None, &[(a, ClauseType::SVO), (b, ClauseType::SVO)]).unwrap();
        assert_eq!(kb.node_count(), 5);
        assert_eq!(kb.nodes[0].provenance.len(), 2);
        kb.validate().unwrap();
    }

    #[test]
    fn predicates_never_deduplicate() {
        let kb = aggregate(
            "d",
            None,
            &[
                (frame("a", "runs"), ClauseType::SV),
                (frame("b", "runs"), ClauseType::SV),
            ],
        )
        .unwrap();
        let preds = kb
            .nodes
            .iter()
            .filter(|n| n.kind == NodeKind::Predicate)
            .count();
        assert_eq!(preds, 2);
    }

    #[test]
    fn empty_document() {
        assert!(matches!(
            aggregate("x", None, &[]),
            Err(KbError::EmptyDocument(_))
        ));
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_text("  New   York\tCity "), "new york city");
    }

    #[test]
    fn lone_node_edge_list() {
        let kb = KnowledgeBase {
            doc_id: "x".into(),
            label: None,
            nodes: vec![KbNode {
                id: 0,
                text: "a".into(),
                kind: NodeKind::Entity,
                provenance: vec![Provenance {
                    sent: 0,
                    words: vec![1],
                }],
            }],
            edges: vec![],
            clauses: vec![],
        };
        assert_eq!(kb.to_edge_list(), (vec![], 1));
    }

    #[test]
    fn rejects_invalid_json() {
        let bad = r#"{"doc_id":"x","label":null,"nodes":[{"id":0,"text":"a","kind":"ENTITY","provenance":[]}],"edges":[]}"#;
        assert!(matches!(
            KnowledgeBase::from_json(bad),
            Err(KbError::Invalid(_))
        ));
        let dangling = r#"{"doc_id":"x","label":null,"nodes":[{"id":0,"text":"","kind":"DUMMY","provenance":[]}],"edges":[{"src":0,"dst":4,"label":"PRED"}]}"#;
        assert!(matches!(
            KnowledgeBase::from_json(dangling),
            Err(KbError::Invalid(_))
        ));
    }
}
