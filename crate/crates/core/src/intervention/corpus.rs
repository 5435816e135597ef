//! Annotated-corpus TSV format.
//!
//! ```text
//! #doc <id>
//! surface<TAB>pos<TAB>ner<TAB>coref
//! ...
//! <blank line ends a sentence>
//! ```
//!
//! `ner` is one of `PERSON`, `OTHER`, `NONE` (`O` is read as `NONE`); an empty
//! `coref` field means the token belongs to no coreference chain.

use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, Lines, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ner {
    Person,
    Other,
    None,
}

impl Ner {
    fn parse(s: &str) -> Option<Ner> {
        match s {
            "PERSON" => Some(Ner::Person),
            "OTHER" => Some(Ner::Other),
            "NONE" | "O" => Some(Ner::None),
            _ => None,
        }
    }
}

impl fmt::Display for Ner {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ner::Person => "PERSON",
            Ner::Other => "OTHER",
            Ner::None => "NONE",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotatedToken {
    pub surface: String,
    pub pos: String,
    pub ner: Ner,
    pub coref: Option<u32>,
}

impl AnnotatedToken {
    pub fn new(surface: impl Into<String>, pos: impl Into<String>) -> Self {
        Self {
            surface: surface.into(),
            pos: pos.into(),
            ner: Ner::None,
            coref: None,
        }
    }

    pub fn person(mut self) -> Self {
        self.ner = Ner::Person;
        self
    }

    pub fn chain(mut self, id: u32) -> Self {
        self.coref = Some(id);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub sentences: Vec<Vec<AnnotatedToken>>,
}

impl Document {
    pub fn tokens(&self) -> impl Iterator<Item = &AnnotatedToken> {
        self.sentences.iter().flatten()
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Vec::len).sum()
    }
}

/// Streams documents from an annotated TSV source in file order.
pub struct AnnotatedReader<R> {
    lines: Lines<R>,
    line_no: usize,
    pending_id: Option<String>,
    done: bool,
}

impl<R: BufRead> AnnotatedReader<R> {
    pub fn new(reader: R) -> Self {
        Self {
            lines: reader.lines(),
            line_no: 0,
            pending_id: None,
            done: false,
        }
    }
}

fn parse_token(line_no: usize, line: &str) -> Result<AnnotatedToken> {
    let fields: Vec<&str> = line.split('\t').collect();
    if fields.len() != 4 {
        return Err(Error::parse(
            line_no,
            format!("expected 4 tab-separated fields, found {}", fields.len()),
        ));
    }
    if fields[0].is_empty() {
        return Err(Error::parse(line_no, "empty surface"));
    }
    let ner = Ner::parse(fields[2])
        .ok_or_else(|| Error::parse(line_no, format!("unknown NER tag '{}'", fields[2])))?;
    let coref = match fields[3] {
        "" => None,
        s => Some(
            s.parse()
                .map_err(|_| Error::parse(line_no, format!("bad coref id '{s}'")))?,
        ),
    };
    Ok(AnnotatedToken {
        surface: fields[0].to_string(),
        pos: fields[1].to_string(),
        ner,
        coref,
    })
}

impl<R: BufRead> AnnotatedReader<R> {
    fn next_document(&mut self) -> Result<Option<Document>> {
        let id = match self.pending_id.take() {
            Some(id) => id,
            None => loop {
                match self.lines.next() {
                    None => return Ok(None),
                    Some(line) => {
                        self.line_no += 1;
                        let line = line?;
                        if line.trim().is_empty() {
                            continue;
                        }
                        match line.strip_prefix("#doc ") {
                            Some(id) => break id.trim().to_string(),
                            None => {
                                return Err(Error::parse(self.line_no, "missing '#doc <id>' header"))
                            }
                        }
                    }
                }
            },
        };
        let mut doc = Document {
            id,
            sentences: Vec::new(),
        };
        let mut sentence = Vec::new();
        for line in self.lines.by_ref() {
            self.line_no += 1;
            let line = line?;
            if let Some(next) = line.strip_prefix("#doc ") {
                self.pending_id = Some(next.trim().to_string());
                break;
            }
            if line.is_empty() {
                if !sentence.is_empty() {
                    doc.sentences.push(std::mem::take(&mut sentence));
                }
                continue;
            }
            let tok = parse_token(self.line_no, &line)?;
            sentence.push(tok);
        }
        if !sentence.is_empty() {
            doc.sentences.push(sentence);
        }
        Ok(Some(doc))
    }
}

impl<R: BufRead> Iterator for AnnotatedReader<R> {
    type Item = Result<Document>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        match self.next_document() {
            Ok(Some(d)) => Some(Ok(d)),
            Ok(None) => {
                self.done = true;
                None
            }
            Err(e) => {
                self.done = true;
                Some(Err(e))
            }
        }
    }
}

/// Reads a whole corpus, rejecting duplicate document ids.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<Document>> {
    let mut seen = HashSet::new();
    let mut docs = Vec::new();
    for doc in AnnotatedReader::new(reader) {
        let doc = doc?;
        if !seen.insert(doc.id.clone()) {
            return Err(Error::Duplicate(format!("document id '{}'", doc.id)));
        }
        docs.push(doc);
    }
    Ok(docs)
}

pub fn write_document<W: Write>(doc: &Document, w: &mut W) -> Result<()> {
    writeln!(w, "#doc {}", doc.id)?;
    for sentence in &doc.sentences {
        for t in sentence {
            match t.coref {
                Some(c) => writeln!(w, "{}\t{}\t{}\t{}", t.surface, t.pos, t.ner, c)?,
                None => writeln!(w, "{}\t{}\t{}\t", t.surface, t.pos, t.ner)?,
            }
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn write_corpus<W: Write>(docs: &[Document], mut w: W) -> Result<()> {
    for d in docs {
        write_document(d, &mut w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_two_token_doc() {
        let text = "#doc a\nJohn\tNNP\tPERSON\t1\nslept\tVBD\tNONE\t\n\n";
        let docs = read_corpus(text.as_bytes()).unwrap();
        assert_eq!(docs.len(), 1);
        assert_eq!(docs[0].sentences.len(), 1);
        assert_eq!(docs[0].sentences[0].len(), 2);
        assert_eq!(docs[0].sentences[0][0].ner, Ner::Person);
        assert_eq!(docs[0].sentences[0][0].coref, Some(1));
        assert_eq!(docs[0].sentences[0][1].coref, None);
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(read_corpus("#doc a\nJohn\tNNP\tPERSON\n".as_bytes()).is_err());
        assert!(read_corpus("John\tNNP\tPERSON\t\n".as_bytes()).is_err());
        assert!(read_corpus("#doc a\nx\tNN\tFOO\t\n".as_bytes()).is_err());
        assert!(read_corpus("#doc a\nx\tNN\tO\t\n#doc a\ny\tNN\tO\t\n".as_bytes()).is_err());
    }

    fn arb_token() -> impl Strategy<Value = AnnotatedToken> {
        (
            "[A-Za-z][a-z']{0,6}",
            prop::sample::select(vec!["NN", "NNP", "PRP", "PRP$", "VBD"]),
            prop::sample::select(vec![Ner::Person, Ner::Other, Ner::None]),
            prop::option::of(0u32..5),
        )
            .prop_map(|(s, p, n, c)| AnnotatedToken {
                surface: s,
                pos: p.to_string(),
                ner: n,
                coref: c,
            })
    }

    proptest! {
        #[test]
        fn write_then_read_is_identity(
            docs in prop::collection::vec(
                prop::collection::vec(prop::collection::vec(arb_token(), 1..6), 0..4),
                0..5,
            )
        ) {
            let docs: Vec<Document> = docs
                .into_iter()
                .enumerate()
                .map(|(i, sentences)| Document { id: format!("d{i}"), sentences })
                .collect();
            let mut buf = Vec::new();
            write_corpus(&docs, &mut buf).unwrap();
            let back = read_corpus(buf.as_slice()).unwrap();
            prop_assert_eq!(back, docs);
        }
    }
}
