use std::collections::HashSet;
use std::fmt::Write as _;

use super::scheme::OTHER;
use super::{DepTree, Document, ParseError, TagScheme, Token};

#[derive(Debug, Clone, Copy, Default)]
pub struct ParseOptions {
    /// Map labels missing from the scheme to `OTHER` instead of failing.
    pub lenient: bool,
}

struct Pending {
    first_line: usize,
    tokens: Vec<Token>,
}

#[derive(Default)]
struct Reader {
    docs: Vec<Document>,
    seen_ids: HashSet<String>,
    // doc_id announced by a comment and not yet attached to a sentence
    announced: Option<(usize, String)>,
    label: Option<String>,
    // true once any explicit doc_id has been seen; later bare sentences extend the open document
    explicit_open: bool,
    blocks: usize,
}

/// Reads CoNLL-U text into documents.
///
/// A `# doc_id = ...` (or `# newdoc id = ...`) comment opens a document that
/// collects every following sentence until the next one. Sentences seen before
/// any such comment each become a synthetic document `doc<N>`, numbered by
/// sentence block. `# label = ...` sets the classification label of the
/// document the next sentence lands in.
pub fn parse_conllu(
    text: &str,
    scheme: &TagScheme,
    opts: ParseOptions,
) -> Result<Vec<Document>, ParseError> {
    let mut reader = Reader::default();
    let mut pending: Option<Pending> = None;

    for (idx, raw) in text.split('\n').enumerate() {
        let line_no = idx + 1;
        let line = raw.strip_suffix('\r').unwrap_or(raw);
        if line.trim().is_empty() {
            if let Some(p) = pending.take() {
                reader.finish_sentence(p)?;
            }
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            reader.comment(comment.trim(), line_no);
            continue;
        }
        if let Some(tok) = parse_token_line(line, line_no, scheme, opts)? {
            pending
                .get_or_insert_with(|| Pending {
                    first_line: line_no,
                    tokens: Vec::new(),
                })
                .tokens
                .push(tok);
        }
    }
    if let Some(p) = pending.take() {
        reader.finish_sentence(p)?;
    }
    Ok(reader.docs)
}

impl Reader {
    fn comment(&mut self, body: &str, line: usize) {
        let Some((key, value)) = body.split_once('=') else {
            return;
        };
        let value = value.trim().to_string();
        match key.trim() {
            "doc_id" | "newdoc id" => self.announced = Some((line, value)),
            "label" => self.label = Some(value),
            _ => {}
        }
    }

    fn finish_sentence(&mut self, p: Pending) -> Result<(), ParseError> {
        let tree = DepTree::new(p.tokens).map_err(|source| ParseError::Tree {
            line: p.first_line,
            source,
        })?;
        self.blocks += 1;
        if let Some((line, doc_id)) = self.announced.take() {
            self.open(doc_id, line)?;
            self.explicit_open = true;
        } else if !self.explicit_open {
            let doc_id = format!("doc{}", self.blocks);
            self.open(doc_id, p.first_line)?;
        }
        let doc = self.docs.last_mut().expect("a document is open");
        if let Some(label) = self.label.take() {
            doc.label = Some(label);
        }
        doc.sentences.push(tree);
        Ok(())
    }

    fn open(&mut self, doc_id: String, line: usize) -> Result<(), ParseError> {
        if !self.seen_ids.insert(doc_id.clone()) {
            return Err(ParseError::DuplicateDocId { line, doc_id });
        }
        self.docs.push(Document {
            doc_id,
            sentences: Vec::new(),
            label: None,
        });
        Ok(())
    }
}

fn parse_token_line(
    line: &str,
    line_no: usize,
    scheme: &TagScheme,
    opts: ParseOptions,
) -> Result<Option<Token>, ParseError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ParseError::MalformedLine {
            line: line_no,
            message: format!("expected 10 tab-separated columns, found {}", cols.len()),
        });
    }
    // multiword token ranges and empty nodes carry no tree structure
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let malformed = |message: String| ParseError::MalformedLine {
        line: line_no,
        message,
    };
    let id: usize = cols[0]
        .parse()
        .map_err(|_| malformed(format!("bad word id `{}`", cols[0])))?;
    if id == 0 {
        return Err(malformed("word id must be >= 1".into()));
    }
    let head: usize = cols[6]
        .parse()
        .map_err(|_| malformed(format!("bad head `{}`", cols[6])))?;

    let map = |raw: &str, kind: &'static str, found: Option<String>| match found {
        Some(v) => Ok(v),
        None if opts.lenient => Ok(OTHER.to_string()),
        None => Err(ParseError::UnmappedLabel {
            line: line_no,
            kind,
            label: raw.to_string(),
        }),
    };
    let upos = map(cols[3], "POS", scheme.map_pos(cols[3]))?;
    let deprel = map(cols[7], "dependency", scheme.map_deprel(cols[7]))?;
    let misc = match cols[9] {
        "_" | "" => None,
        m => Some(m.to_string()),
    };
    Ok(Some(Token {
        id,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos,
        deprel,
        head,
        misc,
    }))
}

/// Serializes documents back to CoNLL-U with canonical labels.
pub fn write_conllu(docs: &[Document]) -> String {
    let mut out = String::new();
    for doc in docs {
        for (i, tree) in doc.sentences.iter().enumerate() {
            if i == 0 {
                let _ = writeln!(out, "# doc_id = {}", doc.doc_id);
                if let Some(label) = &doc.label {
                    let _ = writeln!(out, "# label = {label}");
                }
            }
            for t in tree.tokens() {
                let _ = writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t_\t_\t{}\t{}\t_\t{}",
                    t.id,
                    t.form,
                    t.lemma,
                    t.upos,
                    t.head,
                    t.deprel,
                    t.misc.as_deref().unwrap_or("_")
                );
            }
            out.push('\n');
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::depmodel::TreeError;

    const ALICE: &str = "# doc_id = d1\n# label = sleep\n\
        1\tAlice\tAlice\tNOUN\t_\t_\t2\tnsubj\t_\t_\n\
        2\tsleeps\tsleep\tVERB\t_\t_\t0\troot\t_\t_\n\n";

    fn parse(text: &str) -> Result<Vec<Document>, ParseError> {
        parse_conllu(text, &TagScheme::spacy(), ParseOptions::default())
    }

    #[test]
    fn two_token_sentence() {
        let docs = parse(ALICE).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].doc_id, "d1");
        assert_eq!(docs[0].label.as_deref(), Some("sleep"));
        assert_eq!(docs[0].sentences.len(), 1);
        let tree = &docs[0].sentences[0];
        assert_eq!(tree.root_id(), 2);
        assert_eq!(tree.token(1).unwrap().deprel, "NSUBJ");
    }

    #[test]
    fn empty_input() {
        assert!(parse("").unwrap().is_empty());
        assert!(parse("\n\n").unwrap().is_empty());
    }

    #[test]
    fn crlf_accepted() {
        let docs = parse(&ALICE.replace('\n', "\r\n")).unwrap();
        assert_eq!(docs[0].sentences[0].len(), 2);
    }

    #[test]
    fn self_head_is_cycle() {
        let err = parse("1\tx\tx\tNOUN\t_\t_\t1\troot\t_\t_\n").unwrap_err();
        assert_eq!(err.tree_error(), Some(&TreeError::CycleDetected(1)));
        assert_eq!(err.line(), Some(1));
    }

    #[test]
    fn wrong_column_count() {
        let err = parse("# doc_id = a\n1\tx\tx\tNOUN\t_\t_\t0\n").unwrap_err();
        assert!(
            matches!(err, ParseError::MalformedLine { line: 2, .. }),
            "{err}"
        );
    }

    #[test]
    fn multiple_roots() {
        let err = parse("1\tx\tx\tNOUN\t_\t_\t0\troot\t_\t_\n2\ty\ty\tNOUN\t_\t_\t0\troot\t_\t_\n")
            .unwrap_err();
        assert_eq!(
            err.tree_error(),
            Some(&TreeError::MultipleRoots(vec![1, 2]))
        );
    }

    #[test]
    fn unmapped_and_lenient() {
        let text = "1\tx\tx\tNOUN\t_\t_\t0\tweird\t_\t_\n";
        let err = parse(text).unwrap_err();
        assert!(matches!(err, ParseError::UnmappedLabel { ref label, .. } if label == "weird"));
        let docs = parse_conllu(text, &TagScheme::spacy(), ParseOptions { lenient: true }).unwrap();
        assert_eq!(docs[0].sentences[0].token(1).unwrap().deprel, OTHER);
    }

    #[test]
    fn skips_multiword_and_empty_nodes() {
        let text = "1-2\tdon't\t_\t_\t_\t_\t_\t_\t_\t_\n\
            1\tdo\tdo\tAUX\t_\t_\t3\taux\t_\t_\n\
            2\tn't\tnot\tPART\t_\t_\t3\tneg\t_\t_\n\
            3\tgo\tgo\tVERB\t_\t_\t0\troot\t_\t_\n\
            3.1\tgone\tgo\tVERB\t_\t_\t_\t_\t_\t_\n";
        let docs = parse(text).unwrap();
        assert_eq!(docs[0].sentences[0].len(), 3);
    }

    #[test]
    fn grouping_without_doc_ids() {
        let s = "1\tx\tx\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
        let docs = parse(&s.repeat(3)).unwrap();
        let ids: Vec<_> = docs.iter().map(|d| d.doc_id.as_str()).collect();
        assert_eq!(ids, ["doc1", "doc2", "doc3"]);

        let with_id = format!("# doc_id = a\n{s}{s}# doc_id = b\n{s}");
        let docs = parse(&with_id).unwrap();
        assert_eq!(docs.len(), 2);
        assert_eq!(docs[0].sentences.len(), 2);
        assert_eq!(docs[1].sentences.len(), 1);
    }

    #[test]
    fn duplicate_doc_id() {
        let s = "# doc_id = a\n1\tx\tx\tNOUN\t_\t_\t0\troot\t_\t_\n\n";
        let err = parse(&s.repeat(2)).unwrap_err();
        assert!(
            matches!(err, ParseError::DuplicateDocId { line: 4, .. }),
            "{err}"
        );
    }

    #[test]
    fn round_trip_ud() {
        let text = "# doc_id = u\n\
            1\tThe\tthe\tDET\t_\t_\t2\tdet\t_\t_\n\
            2\tbook\tbook\tNOUN\t_\t_\t3\tnsubj:pass\t_\tNER=WORK:2\n\
            3\twas\tbe\tAUX\t_\t_\t4\taux:pass\t_\t_\n\
            4\twritten\twrite\tVERB\t_\t_\t0\troot\t_\t_\n\n";
        let scheme = TagScheme::ud();
        let docs = parse_conllu(text, &scheme, ParseOptions::default()).unwrap();
        let again = parse_conllu(&write_conllu(&docs), &scheme, ParseOptions::default()).unwrap();
        assert_eq!(docs, again);
        assert_eq!(docs[0].sentences[0].token(2).unwrap().deprel, "NSUBJPASS");
    }
}
