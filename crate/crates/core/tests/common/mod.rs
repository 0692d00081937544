#![allow(dead_code)]

use newsgraph::depmodel::{DepTree, Token};
use proptest::prelude::*;

pub const DEPRELS: &[&str] = &[
    "NSUBJ",
    "NSUBJPASS",
    "CSUBJ",
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
    "XCOMP",
    "CCOMP",
    "ADVMOD",
    "NPADVMOD",
    "ADVCL",
    "DET",
    "AMOD",
    "CONJ",
    "CC",
    "PUNCT",
];
pub const UPOS: &[&str] = &[
    "NOUN", "PROPN", "VERB", "AUX", "ADP", "DET", "ADJ", "ADV", "PRON", "PART",
];

/// Raw material for a random tree: for each word its attachment choice,
/// label and POS, plus the order in which words join the tree.
#[derive(Debug, Clone)]
pub struct TreeSpec {
    pub heads: Vec<usize>,
    pub deprels: Vec<&'static str>,
    pub upos: Vec<&'static str>,
}

/// Random valid trees with 1 to `max` words. Word `order[0]` is the root and
/// every later word attaches to one placed before it, so the result is acyclic.
pub fn tree_spec(max: usize) -> impl Strategy<Value = TreeSpec> {
    (1..=max).prop_flat_map(|n| {
        (
            Just((1..=n).collect::<Vec<usize>>()).prop_shuffle(),
            proptest::collection::vec(any::<prop::sample::Index>(), n),
            proptest::collection::vec(prop::sample::select(DEPRELS), n),
            proptest::collection::vec(prop::sample::select(UPOS), n),
        )
            .prop_map(move |(order, picks, deprels, upos)| {
                let mut heads = vec![0; n];
                for (pos, &id) in order.iter().enumerate().skip(1) {
                    heads[id - 1] = order[picks[pos].index(pos)];
                }
                TreeSpec {
                    heads,
                    deprels,
                    upos,
                }
            })
    })
}

impl TreeSpec {
    pub fn tokens(&self) -> Vec<Token> {
        (0..self.heads.len())
            .map(|i| {
                let deprel = if self.heads[i] == 0 {
                    "ROOT"
                } else {
                    self.deprels[i]
                };
                Token::new(
                    i + 1,
                    &format!("w{}", i + 1),
                    &format!("l{}", i + 1),
                    self.upos[i],
                    deprel,
                    self.heads[i],
                )
            })
            .collect()
    }

    pub fn tree(&self) -> DepTree {
        DepTree::new(self.tokens()).expect("generated trees are valid")
    }

    pub fn conllu(&self, doc_id: &str) -> String {
        let mut out = format!("# doc_id = {doc_id}\n");
        for t in self.tokens() {
            out.push_str(&conllu_line(&t));
        }
        out.push('\n');
        out
    }
}

pub fn conllu_line(t: &Token) -> String {
    format!(
        "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}\n",
        t.id,
        t.form,
        t.lemma,
        t.upos,
        t.head,
        t.deprel.to_lowercase(),
        t.misc.as_deref().unwrap_or("_")
    )
}
