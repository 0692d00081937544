//! Inputs shared by the benchmarks: the hand-annotated corpus and embedding
//! tables sized to match a knowledge base.

use std::collections::BTreeMap;

use ndarray::Array2;
use newsgraph::{
    build_kb, parse_conllu, Document, EmbeddingTable, KnowledgeBase, ParseOptions, TagScheme,
    VerbLexicon,
};

pub const ORACLE_CORPUS: &str = include_str!("../../core/fixtures/oracle/corpus.conllu");

pub fn oracle_documents() -> Vec<Document> {
    parse_conllu(ORACLE_CORPUS, &TagScheme::spacy(), ParseOptions::default())
        .expect("oracle corpus parses")
}

/// The oracle corpus repeated `copies` times under fresh doc ids.
pub fn scaled_corpus(copies: usize) -> String {
    let mut out = String::with_capacity(ORACLE_CORPUS.len() * copies);
    for c in 0..copies {
        for line in ORACLE_CORPUS.lines() {
            match line.strip_prefix("# doc_id = ") {
                Some(id) => out.push_str(&format!("# doc_id = {id}_{c}")),
                None => out.push_str(line),
            }
            out.push('\n');
        }
        out.push('\n');
    }
    out
}

/// One knowledge base holding every frame of the corpus, merged as a single
/// multi-sentence document.
pub fn merged_kb() -> (Document, KnowledgeBase) {
    let sentences = oracle_documents()
        .into_iter()
        .flat_map(|d| d.sentences)
        .collect();
    let doc = Document {
        doc_id: "merged".into(),
        sentences,
        label: None,
    };
    let kb = build_kb(&doc, &VerbLexicon::builtin(), Default::default())
        .expect("merged corpus yields frames");
    (doc, kb)
}

/// An embedding table for `doc` with `subwords` rows per word and
/// deterministic pseudo-random values.
pub fn embedding_table(doc: &Document, dim: usize, subwords: usize) -> EmbeddingTable {
    let mut offsets = BTreeMap::new();
    let mut next = 0;
    for (s, tree) in doc.sentences.iter().enumerate() {
        for tok in tree.tokens() {
            offsets.insert((s, tok.id), (next..next + subwords).collect());
            next += subwords;
        }
    }
    let rows = Array2::from_shape_fn((next, dim), |(i, j)| {
        ((i * 31 + j * 17) % 101) as f64 / 101.0 - 0.5
    });
    EmbeddingTable::new(rows, offsets).expect("offsets cover the table")
}
