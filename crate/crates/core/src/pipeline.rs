//! Document-level glue: trees to classified frames, frames to knowledge bases,
//! and the line formats the command-line front end prints.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clauses::{classify, ClauseType, VerbLexicon};
use crate::depmodel::{Document, TreeError};
use crate::extractor::{extract_frames, Chunk, ClauseFrame, NerRectifier};
use crate::kb::{aggregate, EdgeLabel, KbError, KnowledgeBase, NodeKind};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("document `{doc}`, sentence {sent}: {source}")]
    Tree {
        doc: String,
        sent: usize,
        #[source]
        source: TreeError,
    },
    #[error(transparent)]
    Kb(#[from] KbError),
}

#[derive(Clone, Copy, Default)]
pub struct ExtractOptions<'a> {
    pub rectifier: Option<&'a dyn NerRectifier>,
}

/// Extracts and classifies every frame of a document, in sentence order.
pub fn classify_document(
    doc: &Document,
    lex: &VerbLexicon,
    opts: ExtractOptions<'_>,
) -> Result<Vec<(ClauseFrame, ClauseType)>, PipelineError> {
    let mut out = Vec::new();
    for (sent, tree) in doc.sentences.iter().enumerate() {
        let frames =
            extract_frames(tree, sent, opts.rectifier).map_err(|source| PipelineError::Tree {
                doc: doc.doc_id.clone(),
                sent,
                source,
            })?;
        out.extend(frames.into_iter().map(|f| {
            let ty = classify(&f, lex);
            (f, ty)
        }));
    }
    Ok(out)
}

pub fn build_kb(
    doc: &Document,
    lex: &VerbLexicon,
    opts: ExtractOptions<'_>,
) -> Result<KnowledgeBase, PipelineError> {
    let frames = classify_document(doc, lex, opts)?;
    Ok(aggregate(&doc.doc_id, doc.label.as_deref(), &frames)?)
}

/// One line of the frame dump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrameRecord {
    pub doc: String,
    pub sent: usize,
    #[serde(rename = "S")]
    pub subject: String,
    #[serde(rename = "V")]
    pub predicate: String,
    #[serde(rename = "Od")]
    pub direct_object: Option<String>,
    #[serde(rename = "Oi")]
    pub indirect_object: Option<String>,
    #[serde(rename = "Op")]
    pub prep_objects: Vec<String>,
    #[serde(rename = "C")]
    pub complements: Vec<String>,
    #[serde(rename = "A")]
    pub adverbials: Vec<String>,
    pub neg: bool,
    pub passive: bool,
    #[serde(rename = "type")]
    pub clause_type: ClauseType,
    pub spans: BTreeMap<String, Vec<usize>>,
}

impl FrameRecord {
    pub fn new(doc: &str, frame: &ClauseFrame, clause_type: ClauseType) -> Self {
        let texts = |cs: &[Chunk]| cs.iter().map(|c| c.text.clone()).collect::<Vec<_>>();
        let mut spans = BTreeMap::new();
        spans.insert("S".to_string(), frame.subject.word_ids.clone());
        spans.insert("V".to_string(), frame.predicate.word_ids.clone());
        if let Some(c) = &frame.direct_object {
            spans.insert("Od".to_string(), c.word_ids.clone());
        }
        if let Some(c) = &frame.indirect_object {
            spans.insert("Oi".to_string(), c.word_ids.clone());
        }
        for (prefix, chunks) in [
            ("Op", &frame.prep_objects),
            ("C", &frame.complements),
            ("A", &frame.adverbials),
        ] {
            for (i, c) in chunks.iter().enumerate() {
                spans.insert(format!("{prefix}{i}"), c.word_ids.clone());
            }
        }
        FrameRecord {
            doc: doc.to_string(),
            sent: frame.sentence,
            subject: frame.subject.text.clone(),
            predicate: frame.predicate.text.clone(),
            direct_object: frame.direct_object.as_ref().map(|c| c.text.clone()),
            indirect_object: frame.indirect_object.as_ref().map(|c| c.text.clone()),
            prep_objects: texts(&frame.prep_objects),
            complements: texts(&frame.complements),
            adverbials: texts(&frame.adverbials),
            neg: frame.negated,
            passive: frame.passive,
            clause_type,
            spans,
        }
    }

    pub fn to_json_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("frame record serializes");
        s.push('\n');
        s
    }
}

/// Tab-separated `doc, Arg1, Pred, Arg2` rows read off a knowledge base.
///
/// Each PRED path subject→predicate→argument gives one row (a dummy argument
/// prints as `DUMMY`); each APPEND edge gives a row with `+` as its relation.
pub fn tuple_rows(kb: &KnowledgeBase) -> Vec<String> {
    let text = |id: usize| {
        let n = &kb.nodes[id];
        if n.kind == NodeKind::Dummy {
            "DUMMY".to_string()
        } else {
            n.text.clone()
        }
    };
    let mut rows = Vec::new();
    for clause in &kb.clauses {
        let subjects = kb
            .edges
            .iter()
            .filter(|e| e.dst == clause.pred && e.label == EdgeLabel::Pred);
        for s in subjects {
            for arg in kb
                .edges
                .iter()
                .filter(|e| e.src == clause.pred && e.label == EdgeLabel::Pred)
            {
                rows.push(format!(
                    "{}\t{}\t{}\t{}",
                    kb.doc_id,
                    text(s.src),
                    text(clause.pred),
                    text(arg.dst)
                ));
            }
        }
    }
    for e in kb.edges.iter().filter(|e| e.label == EdgeLabel::Append) {
        rows.push(format!(
            "{}\t{}\t+\t{}",
            kb.doc_id,
            text(e.src),
            text(e.dst)
        ));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depmodel::{parse_conllu, ParseOptions, TagScheme};

    const GAVE: &str = "# doc_id = g\n# label = gifts\n\
        1\tShe\tshe\tPRON\t_\t_\t2\tnsubj\t_\t_\n\
        2\tgave\tgive\tVERB\t_\t_\t0\tROOT\t_\t_\n\
        3\thim\the\tPRON\t_\t_\t2\tdative\t_\t_\n\
        4\ta\ta\tDET\t_\t_\t5\tdet\t_\t_\n\
        5\tbook\tbook\tNOUN\t_\t_\t2\tdobj\t_\t_\n\n";

    fn doc() -> Document {
        parse_conllu(GAVE, &TagScheme::spacy(), ParseOptions::default())
            .unwrap()
            .remove(0)
    }

    #[test]
    fn frame_record_json() {
        let frames =
            classify_document(&doc(), &VerbLexicon::builtin(), Default::default()).unwrap();
        let rec = FrameRecord::new("g", &frames[0].0, frames[0].1);
        assert_eq!(
            rec.to_json_line(),
            "{\"doc\":\"g\",\"sent\":0,\"S\":\"She\",\"V\":\"gave\",\"Od\":\"book\",\"Oi\":\"him\",\
             \"Op\":[],\"C\":[],\"A\":[],\"neg\":false,\"passive\":false,\"type\":\"SVOO\",\
             \"spans\":{\"Od\":[5],\"Oi\":[3],\"S\":[1],\"V\":[2]}}\n"
        );
        let back: FrameRecord = serde_json::from_str(&rec.to_json_line()).unwrap();
        assert_eq!(back, rec);
    }

    #[test]
    fn kb_and_tuples() {
        let kb = build_kb(&doc(), &VerbLexicon::builtin(), Default::default()).unwrap();
        assert_eq!(kb.label.as_deref(), Some("gifts"));
        assert_eq!(tuple_rows(&kb), vec!["g\tshe\tgave book\thim"]);
    }
}
